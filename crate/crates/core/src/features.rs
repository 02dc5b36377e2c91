//! The 17-dimensional per-frame voice-parameter vector and the projections
//! each predictor sees.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pitch::PitchEstimate;
use crate::spectrum::{HIGH_CEPSTRUM_LEN, TEL_CEPSTRUM_LEN};

pub const FEATURE_DIM: usize = 17;
pub const LOW_TARGET_DIM: usize = 2;
pub const ENERGY_EPS: f64 = 1e-10;
/// Pitch gain range passed on to the predictors; the raw gain is unbounded
/// when the lagged segment is nearly silent.
pub const PITCH_GAIN_RANGE: (f64, f64) = (0.0, 1.2);

/// Feature layout, in order: 10 telephone cepstra, pitch gain, pitch period,
/// log-energy difference, differences of the first 4 cepstra.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub cepstrum_tel: [f64; TEL_CEPSTRUM_LEN],
    pub pitch_gain: f64,
    pub pitch_period: f64,
    pub d_log_energy: f64,
    pub d_cepstrum: [f64; 4],
}

impl FeatureVector {
    pub fn to_array(&self) -> [f64; FEATURE_DIM] {
        let mut out = [0.0; FEATURE_DIM];
        out[..10].copy_from_slice(&self.cepstrum_tel);
        out[10] = self.pitch_gain;
        out[11] = self.pitch_period;
        out[12] = self.d_log_energy;
        out[13..].copy_from_slice(&self.d_cepstrum);
        out
    }

    pub fn from_slice(v: &[f64]) -> Result<Self> {
        if v.len() != FEATURE_DIM {
            return Err(Error::precondition(format!(
                "feature vectors have {FEATURE_DIM} entries, got {}",
                v.len()
            )));
        }
        let mut cepstrum_tel = [0.0; TEL_CEPSTRUM_LEN];
        cepstrum_tel.copy_from_slice(&v[..10]);
        let mut d_cepstrum = [0.0; 4];
        d_cepstrum.copy_from_slice(&v[13..]);
        Ok(Self {
            cepstrum_tel,
            pitch_gain: v[10],
            pitch_period: v[11],
            d_log_energy: v[12],
            d_cepstrum,
        })
    }
}

/// What the previous frame contributes to the differential features.
#[derive(Debug, Clone, Copy)]
pub struct PreviousFrame<'a> {
    pub cepstrum_tel: &'a [f64],
    pub excitation_energy: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct FrameContext<'a> {
    pub cepstrum_tel: &'a [f64],
    pub pitch: &'a PitchEstimate,
    pub excitation_energy: f64,
    /// `None` on the first frame, whose differentials are zero.
    pub previous: Option<PreviousFrame<'a>>,
}

pub fn extract_features(ctx: &FrameContext<'_>) -> Result<FeatureVector> {
    if ctx.cepstrum_tel.len() != TEL_CEPSTRUM_LEN {
        return Err(Error::precondition("telephone cepstrum must have 10 coefficients"));
    }
    let mut cepstrum_tel = [0.0; TEL_CEPSTRUM_LEN];
    cepstrum_tel.copy_from_slice(ctx.cepstrum_tel);
    let (d_log_energy, d_cepstrum) = match ctx.previous {
        None => (0.0, [0.0; 4]),
        Some(prev) => {
            let de = (ctx.excitation_energy + ENERGY_EPS).ln() - (prev.excitation_energy + ENERGY_EPS).ln();
            let mut dc = [0.0; 4];
            for (k, d) in dc.iter_mut().enumerate() {
                *d = ctx.cepstrum_tel[k] - prev.cepstrum_tel[k];
            }
            (de, dc)
        }
    };
    Ok(FeatureVector {
        cepstrum_tel,
        pitch_gain: ctx.pitch.gain.clamp(PITCH_GAIN_RANGE.0, PITCH_GAIN_RANGE.1),
        pitch_period: ctx.pitch.fractional_period,
        d_log_energy,
        d_cepstrum,
    })
}

/// Per-predictor projection of a [`FeatureVector`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FeatureMask {
    /// All 17 features followed by a constant 1.
    Regression,
    /// Everything but the pitch period.
    Mlp,
    /// Cepstra, `4β` and the energy difference.
    Codebook,
}

impl FeatureMask {
    pub fn dim(self) -> usize {
        match self {
            FeatureMask::Regression => FEATURE_DIM + 1,
            FeatureMask::Mlp => FEATURE_DIM - 1,
            FeatureMask::Codebook => 12,
        }
    }
}

pub fn apply_mask(v: &FeatureVector, mask: FeatureMask) -> Vec<f64> {
    let mut out = Vec::with_capacity(mask.dim());
    out.extend_from_slice(&v.cepstrum_tel);
    match mask {
        FeatureMask::Regression => {
            out.extend([v.pitch_gain, v.pitch_period, v.d_log_energy]);
            out.extend_from_slice(&v.d_cepstrum);
            out.push(1.0);
        }
        FeatureMask::Mlp => {
            out.extend([v.pitch_gain, v.d_log_energy]);
            out.extend_from_slice(&v.d_cepstrum);
        }
        FeatureMask::Codebook => {
            out.extend([4.0 * v.pitch_gain, v.d_log_energy]);
        }
    }
    out
}

/// Per-dimension standardization `(x - mean) / std`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureScaler {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl FeatureScaler {
    pub fn identity(dim: usize) -> Self {
        Self {
            mean: vec![0.0; dim],
            std: vec![1.0; dim],
        }
    }

    /// Statistics of `rows`; a constant column keeps unit scale.
    pub fn fit(rows: &[Vec<f64>]) -> Result<Self> {
        let first = rows.first().ok_or_else(|| Error::Training("no rows to standardize".into()))?;
        let dim = first.len();
        let n = rows.len() as f64;
        let mut mean = vec![0.0; dim];
        for r in rows {
            for (m, v) in mean.iter_mut().zip(r) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = vec![0.0; dim];
        for r in rows {
            for ((s, v), m) in var.iter_mut().zip(r).zip(&mean) {
                *s += (v - m) * (v - m);
            }
        }
        let std = var
            .into_iter()
            .map(|s| {
                let sd = (s / n).sqrt();
                if sd > 1e-12 {
                    sd
                } else {
                    1.0
                }
            })
            .collect();
        Ok(Self { mean, std })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn transform(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(&self.mean)
            .zip(&self.std)
            .map(|((v, m), s)| (v - m) / s)
            .collect()
    }
}

/// One training example: features plus the two prediction targets.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingRow {
    pub features: FeatureVector,
    pub high_target: [f64; HIGH_CEPSTRUM_LEN],
    pub low_target: [f64; LOW_TARGET_DIM],
}

/// Writes rows as space-separated decimals: 17 features, 8 high-band
/// targets, 2 low-band targets.
pub fn write_dump(mut w: impl Write, rows: &[TrainingRow]) -> Result<()> {
    for row in rows {
        let fields: Vec<String> = row
            .features
            .to_array()
            .iter()
            .chain(&row.high_target)
            .chain(&row.low_target)
            .map(|v| format!("{v:?}"))
            .collect();
        writeln!(w, "{}", fields.join(" "))?;
    }
    Ok(())
}

pub fn read_dump(r: impl BufRead) -> Result<Vec<TrainingRow>> {
    let width = FEATURE_DIM + HIGH_CEPSTRUM_LEN + LOW_TARGET_DIM;
    let mut rows = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let vals = line
            .split_whitespace()
            .map(|t| t.parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::Format(format!("dump line {}: {e}", i + 1)))?;
        if vals.len() != width {
            return Err(Error::Format(format!(
                "dump line {} has {} fields, expected {width}",
                i + 1,
                vals.len()
            )));
        }
        let mut high_target = [0.0; HIGH_CEPSTRUM_LEN];
        high_target.copy_from_slice(&vals[FEATURE_DIM..FEATURE_DIM + HIGH_CEPSTRUM_LEN]);
        rows.push(TrainingRow {
            features: FeatureVector::from_slice(&vals[..FEATURE_DIM])?,
            high_target,
            low_target: [vals[width - 2], vals[width - 1]],
        });
    }
    Ok(rows)
}
