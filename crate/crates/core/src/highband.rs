//! 3500–8000 Hz reconstruction.
//!
//! The excitation is widened by full-wave rectification and re-flattened by a
//! short LPC inverse filter. The envelope above 3000 Hz comes from a
//! predictor, is smoothed across frames, and is spliced onto the telephone
//! envelope to form one wideband synthesis filter.

use crate::error::{Error, Result};
use crate::filters::{BandShapeFilters, FirFilter};
use crate::lpc::{analysis_filter, analyze_frame, hanning_window, FilterState, LpcModel};
use crate::predictors::Predictor;
use crate::features::FeatureVector;
use crate::spectrum::{
    envelope_to_lpc, idct, telephone_to_wide_emphasis, CepstralVector, SpectralEnvelope, HIGH_BAND,
    HIGH_CEPSTRUM_LEN, TEL_BAND, WIDE_POINTS,
};

/// First and last grid points where telephone and predicted envelopes are
/// blended (3000–3375 Hz).
pub const SEAM: (usize, usize) = (24, 27);

/// Leak of the block energy sums behind the renormalization gain.
const ENERGY_MEMORY: f64 = 0.5;

/// Baseline excitation extension: `out(2n) = 2 r(n)`, `out(2n+1) = 0`.
/// The spectrum above 4 kHz mirrors the one below.
pub fn spectral_fold(r_tel: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; 2 * r_tel.len()];
    for (n, v) in r_tel.iter().enumerate() {
        out[2 * n] = 2.0 * v;
    }
    out
}

/// Settings of [`extend_excitation`].
#[derive(Debug, Clone, PartialEq)]
pub struct ExcitationConfig {
    pub whitening_order: usize,
    /// Samples per block sharing one whitening filter and one gain.
    pub block: usize,
    /// Analysis window, ending with the block.
    pub window: usize,
    pub noise_floor_alpha: f64,
    pub lag_beta: f64,
}

impl ExcitationConfig {
    pub fn from_analysis(cfg: &crate::lpc::AnalysisConfig) -> Self {
        Self {
            whitening_order: 8,
            block: cfg.hop,
            window: cfg.frame_len,
            noise_floor_alpha: cfg.noise_floor_alpha,
            lag_beta: cfg.lag_beta,
        }
    }
}

/// Widens a 16 kHz residual that is band-limited to 3500 Hz.
///
/// Per block: rectify, whiten with an LPC inverse filter estimated on the
/// rectified signal, then rescale so the energy below 3500 Hz matches the
/// input's. Both the whitening window and the energy measurement (through
/// `lowpass_3500`, not delay-compensated) end with the block, so nothing
/// past the block is read. Blocks whose input has no energy in that band
/// come out silent.
pub fn extend_excitation(r: &[f64], cfg: &ExcitationConfig, lowpass_3500: &FirFilter) -> Result<Vec<f64>> {
    if cfg.block == 0 || cfg.window < cfg.block {
        return Err(Error::precondition("excitation window must cover its block"));
    }
    let rect: Vec<f64> = r.iter().map(|v| v.abs()).collect();
    let win = hanning_window(cfg.window);
    let lead = cfg.window - cfg.block;
    let mut state = FilterState::new(cfg.whitening_order);
    let mut white = Vec::with_capacity(r.len());
    let mut frame = vec![0.0; cfg.window];
    for start in (0..r.len()).step_by(cfg.block) {
        let end = (start + cfg.block).min(r.len());
        for (i, f) in frame.iter_mut().enumerate() {
            let n = (start + i) as isize - lead as isize;
            let v = if n >= 0 && (n as usize) < rect.len() { rect[n as usize] } else { 0.0 };
            *f = v * win[i];
        }
        let lpc = analyze_frame(&frame, cfg.whitening_order, cfg.noise_floor_alpha, cfg.lag_beta)?.model;
        white.extend(analysis_filter(&rect[start..end], &lpc, &mut state)?);
    }

    let band_in = lowpass_3500.filter(r, false);
    let band_out = lowpass_3500.filter(&white, false);
    let mut out = white;
    let (mut e_in, mut e_out) = (0.0, 0.0);
    for start in (0..r.len()).step_by(cfg.block) {
        let end = (start + cfg.block).min(r.len());
        let block_in: f64 = band_in[start..end].iter().map(|v| v * v).sum();
        e_in = ENERGY_MEMORY * e_in + block_in;
        e_out = ENERGY_MEMORY * e_out + band_out[start..end].iter().map(|v| v * v).sum::<f64>();
        let g = if block_in > 1e-20 && e_out > 1e-30 { (e_in / e_out).sqrt() } else { 0.0 };
        out[start..end].iter_mut().for_each(|v| *v *= g);
    }
    Ok(out)
}

/// The predicted high-band cepstrum for one frame.
pub fn predict_high_envelope(features: &FeatureVector, predictor: &Predictor) -> CepstralVector {
    CepstralVector {
        coefficients: predictor.predict(features),
    }
}

/// Per-coefficient `[¼, ½, ¼]` smoothing across frames; the first and last
/// frames are replicated at the edges.
pub fn smooth_envelope_track(track: &[CepstralVector]) -> Vec<CepstralVector> {
    let n = track.len();
    (0..n)
        .map(|t| {
            let prev = &track[t.saturating_sub(1)].coefficients;
            let next = &track[(t + 1).min(n - 1)].coefficients;
            CepstralVector {
                coefficients: track[t]
                    .coefficients
                    .iter()
                    .zip(prev)
                    .zip(next)
                    .map(|((c, p), q)| 0.25 * p + 0.5 * c + 0.25 * q)
                    .collect(),
            }
        })
        .collect()
}

/// Splices a high-band cepstrum onto a telephone envelope.
///
/// The telephone envelope (8 kHz analysis) is first moved into the 16 kHz
/// pre-emphasis domain. The high segment is `idct(c) + mean(T[2..=28])`:
/// cepstra are trained relative to the telephone band's mean level. Points
/// 24..=27 are a linear cross-fade.
pub fn assemble_wideband_envelope(
    tel_env: &SpectralEnvelope,
    high_cep: &CepstralVector,
    preemph_alpha: f64,
) -> Result<SpectralEnvelope> {
    if high_cep.coefficients.len() != HIGH_CEPSTRUM_LEN {
        return Err(Error::precondition("high-band cepstrum must have 8 coefficients"));
    }
    let tel = telephone_to_wide_emphasis(tel_env, preemph_alpha)?;
    let reference = tel[TEL_BAND].iter().sum::<f64>() / TEL_BAND.count() as f64;
    let high = idct(&high_cep.coefficients, HIGH_BAND.count());
    let mut out = vec![0.0; WIDE_POINTS];
    let span = (SEAM.1 - SEAM.0 + 2) as f64;
    for (k, o) in out.iter_mut().enumerate() {
        let h = if k >= *HIGH_BAND.start() { high[k - HIGH_BAND.start()] + reference } else { 0.0 };
        *o = if k < SEAM.0 {
            tel[k]
        } else if k <= SEAM.1 {
            let w = (k + 1 - SEAM.0) as f64 / span;
            (1.0 - w) * tel[k] + w * h
        } else {
            h
        };
    }
    SpectralEnvelope::new(out)
}

/// [`assemble_wideband_envelope`] followed by conversion to an LPC model.
pub fn assemble_wideband_lpc(
    tel_env: &SpectralEnvelope,
    high_cep: &CepstralVector,
    preemph_alpha: f64,
    order: usize,
) -> Result<LpcModel> {
    envelope_to_lpc(&assemble_wideband_envelope(tel_env, high_cep, preemph_alpha)?, order)
}

/// High-pass at 3500 Hz, stop 3500–4500 Hz, attenuate by `attenuation_db`.
pub fn postprocess_highband(signal: &[f64], filters: &BandShapeFilters, attenuation_db: f64) -> Vec<f64> {
    let g = 10f64.powf(-attenuation_db / 20.0);
    let hp = filters.highpass_3500.filter(signal, true);
    let mut out = filters.notch_3500_4500.filter(&hp, true);
    out.iter_mut().for_each(|v| *v *= g);
    out
}
