//! Telephone band in, wideband out.

use std::path::Path;

use crate::audio_io::{read_wav, write_wav, SampleRate, SignalBuffer};
use crate::error::{Error, Result};
use crate::filters::{
    design_inverse_irs, default_inverse_band, irs_modified_response, make_bandshape_filters, BandShapeFilters,
    FirFilter, IrsTable, DESIGN_GRID,
};
use crate::highband::{
    assemble_wideband_lpc, extend_excitation, postprocess_highband, predict_high_envelope, smooth_envelope_track,
    ExcitationConfig,
};
use crate::lowband::{denormalize_amplitudes, extract_residual_harmonics, synthesize_lowband, LowbandFrame};
use crate::lpc::{analysis_filter, de_emphasize, pre_emphasize, synthesis_filter, FilterState, LpcModel};
use crate::predictors::ModelBundle;
use crate::spectrum::{CepstralVector, HIGH_CEPSTRUM_LEN};

use super::analysis::{analyze_telephone, frame_omega0, window_slice, TelephoneAnalysis};
use super::config::PipelineConfig;
use super::latency::LatencyBudget;

/// The three bands of an extended signal, each at 16 kHz and aligned.
#[derive(Debug, Clone)]
pub struct ExtendedBands {
    /// Upsampled (optionally equalized) input.
    pub telephone: Vec<f64>,
    pub high: Vec<f64>,
    pub low: Vec<f64>,
}

impl ExtendedBands {
    pub fn sum(&self) -> Vec<f64> {
        self.telephone
            .iter()
            .zip(&self.high)
            .zip(&self.low)
            .map(|((a, b), c)| a + b + c)
            .collect()
    }
}

/// Loads the IRS table named by the config, or the built-in one.
pub fn irs_table(cfg: &PipelineConfig) -> Result<IrsTable> {
    match &cfg.irs_table {
        Some(p) => IrsTable::load(p),
        None => Ok(IrsTable::builtin()),
    }
}

/// The inverse-IRS equalizer when the config asks for one.
pub fn inverse_irs_filter(cfg: &PipelineConfig) -> Result<Option<FirFilter>> {
    if !cfg.inverse_irs {
        return Ok(None);
    }
    let g = irs_modified_response(&irs_table(cfg)?, DESIGN_GRID)?;
    Ok(Some(design_inverse_irs(&g, cfg.inverse_irs_half_order, default_inverse_band())?))
}

/// A trained bundle with the fixed filters it runs with.
pub struct Extender {
    pub bundle: ModelBundle,
    pub filters: BandShapeFilters,
    pub inverse_irs: Option<FirFilter>,
    pub cfg: PipelineConfig,
}

impl Extender {
    /// The bundle's analysis settings take precedence over `cfg.analysis`.
    pub fn new(bundle: ModelBundle, cfg: &PipelineConfig) -> Result<Self> {
        bundle.validate()?;
        let mut cfg = cfg.clone();
        cfg.analysis = bundle.analysis.clone();
        let ext = Self {
            inverse_irs: inverse_irs_filter(&cfg)?,
            filters: make_bandshape_filters(),
            bundle,
            cfg,
        };
        ext.latency().check()?;
        Ok(ext)
    }

    pub fn latency(&self) -> LatencyBudget {
        LatencyBudget::new(&self.cfg.analysis, &self.filters, self.inverse_irs.as_ref())
    }

    pub fn analyze(&self, x_tel: &SignalBuffer) -> Result<TelephoneAnalysis> {
        analyze_telephone(x_tel, &self.cfg.analysis, self.inverse_irs.as_ref(), self.cfg.silence_rms)
    }

    /// Per-frame high-band cepstra after smoothing; silent frames get zeros.
    /// A non-finite prediction repeats the previous frame's.
    pub fn high_track(&self, analysis: &TelephoneAnalysis) -> Vec<CepstralVector> {
        let mut last = CepstralVector { coefficients: vec![0.0; HIGH_CEPSTRUM_LEN] };
        let raw: Vec<CepstralVector> = analysis
            .frames
            .iter()
            .map(|f| {
                if f.silent {
                    return CepstralVector { coefficients: vec![0.0; HIGH_CEPSTRUM_LEN] };
                }
                let c = predict_high_envelope(&f.features, &self.bundle.high);
                if c.coefficients.iter().all(|v| v.is_finite()) {
                    last = c.clone();
                    c
                } else {
                    last.clone()
                }
            })
            .collect();
        smooth_envelope_track(&raw)
    }

    /// Wideband synthesis filter per frame; a frame whose envelope cannot be
    /// converted keeps the previous frame's filter.
    pub fn wideband_filters(&self, analysis: &TelephoneAnalysis, track: &[CepstralVector]) -> Vec<LpcModel> {
        let a = &self.cfg.analysis;
        let mut last = LpcModel::zero(a.lpc_order_wide);
        analysis
            .frames
            .iter()
            .zip(track)
            .map(|(f, c)| {
                if let Ok(m) = assemble_wideband_lpc(&f.tel_env, c, a.preemph_alpha, a.lpc_order_wide) {
                    last = m;
                }
                last.clone()
            })
            .collect()
    }

    fn high_band(&self, analysis: &TelephoneAnalysis) -> Result<Vec<f64>> {
        let a = &self.cfg.analysis;
        let x = &analysis.x_up;
        let track = self.high_track(analysis);
        let models = self.wideband_filters(analysis, &track);
        let p = pre_emphasize(x, a.preemph_alpha);
        let mut st = FilterState::new(a.lpc_order_wide);
        let mut r = Vec::with_capacity(x.len());
        for (t, m) in models.iter().enumerate() {
            let lo = (t * a.hop).min(x.len());
            let hi = ((t + 1) * a.hop).min(x.len());
            r.extend(analysis_filter(&p[lo..hi], m, &mut st)?);
        }
        let e = extend_excitation(&r, &ExcitationConfig::from_analysis(a), &self.filters.lowpass_3500)?;
        let mut st = FilterState::new(a.lpc_order_wide);
        let mut s = Vec::with_capacity(x.len());
        for (t, (m, f)) in models.iter().zip(&analysis.frames).enumerate() {
            let lo = (t * a.hop).min(x.len());
            let hi = ((t + 1) * a.hop).min(x.len());
            if f.silent {
                s.extend(std::iter::repeat(0.0).take(hi - lo));
                st = FilterState::new(a.lpc_order_wide);
            } else {
                s.extend(synthesis_filter(&e[lo..hi], m, &mut st)?);
            }
        }
        let s = de_emphasize(&s, a.preemph_alpha);
        Ok(postprocess_highband(&s, &self.filters, self.cfg.highband_attenuation_db))
    }

    /// Low-band synthesis parameters per frame.
    pub fn low_frames(&self, analysis: &TelephoneAnalysis) -> Result<Vec<LowbandFrame>> {
        let a = &self.cfg.analysis;
        let tel_low = self.filters.lowpass_200.filter(&analysis.x_up, true);
        analysis
            .frames
            .iter()
            .enumerate()
            .map(|(t, f)| {
                let omega0 = frame_omega0(&f.pitch);
                if f.silent {
                    return Ok(LowbandFrame::silent(omega0));
                }
                let pred = self.bundle.low.predict(&f.features);
                if pred.len() != 2 || pred.iter().any(|v| !v.is_finite()) {
                    return Ok(LowbandFrame::silent(omega0));
                }
                let amplitudes = denormalize_amplitudes([pred[0], pred[1]], f.excitation_rms);
                let start = ((t + 1) * a.hop) as isize - a.frame_len as isize;
                let seg = window_slice(&tel_low, start, a.frame_len);
                let phases = extract_residual_harmonics(&seg, omega0)?.phases;
                Ok(LowbandFrame { omega0, amplitudes, phases })
            })
            .collect()
    }

    fn low_band(&self, analysis: &TelephoneAnalysis) -> Result<Vec<f64>> {
        let a = &self.cfg.analysis;
        let frames = self.low_frames(analysis)?;
        let origin = a.hop as isize - a.frame_len as isize;
        let mut y = synthesize_lowband(&frames, a.frame_len, origin, analysis.x_up.len(), Some(&self.filters.lowpass_200))?;
        y.iter_mut().for_each(|v| *v *= self.cfg.lowband_gain);
        Ok(y)
    }

    pub fn extend_bands(&self, x_tel: &SignalBuffer) -> Result<ExtendedBands> {
        let analysis = self.analyze(x_tel)?;
        let high = self.high_band(&analysis)?;
        let low = self.low_band(&analysis)?;
        Ok(ExtendedBands {
            telephone: analysis.x_up,
            high,
            low,
        })
    }

    /// The interpolator is the 3500 Hz low-pass, so the upsampled input is
    /// summed as is.
    pub fn extend(&self, x_tel: &SignalBuffer) -> Result<SignalBuffer> {
        SignalBuffer::new(self.extend_bands(x_tel)?.sum(), SampleRate::Wide)
    }
}

/// Reads an 8 kHz WAV, extends it and writes a 16 kHz WAV.
pub fn extend_file(
    input: impl AsRef<Path>,
    output: impl AsRef<Path>,
    bundle: ModelBundle,
    cfg: &PipelineConfig,
) -> Result<SignalBuffer> {
    let x = read_wav(input)?;
    if x.sample_rate() != SampleRate::Narrow {
        return Err(Error::precondition(format!(
            "extend expects an 8 kHz telephone signal, got {} Hz",
            x.sample_rate().hz()
        )));
    }
    let y = Extender::new(bundle, cfg)?.extend(&x)?;
    write_wav(output, &y)?;
    Ok(y)
}
