//! Per-frame analysis shared by training, evaluation and extension.
//!
//! Frame `t` owns the 16 kHz block `[128t, 128t + 128)` (default geometry).
//! Its analysis windows are centred on the block: `[128t - 64, 128t + 192)`
//! at 16 kHz and `[64t - 32, 64t + 96)` at 8 kHz. Low-band fit frames are
//! `[128t - 128, 128t + 128)` and end with the block.

use crate::audio_io::{downsample_2x, upsample_2x, SampleRate, SignalBuffer};
use crate::error::{Error, Result};
use crate::features::{extract_features, FeatureVector, FrameContext, PreviousFrame};
use crate::filters::FirFilter;
use crate::lowband::{harmonic_ls_fit, normalize_amplitudes};
use crate::lpc::{analysis_filter, analyze_frame, hanning_window, pre_emphasize, AnalysisConfig, FilterState};
use crate::measure::rms;
use crate::pitch::{estimate_pitch, PitchEstimate, PitchWindow};
use crate::spectrum::{lpc_to_envelope, CepstralVector, SpectralEnvelope, TEL_BAND, TEL_POINTS, WIDE_POINTS};

/// `x[start..start + len]`, zero outside the signal.
pub fn window_slice(x: &[f64], start: isize, len: usize) -> Vec<f64> {
    (0..len)
        .map(|i| {
            let n = start + i as isize;
            if n >= 0 && (n as usize) < x.len() {
                x[n as usize]
            } else {
                0.0
            }
        })
        .collect()
}

/// Number of hop blocks covering `len` samples at 16 kHz.
pub fn frame_count(len: usize, hop: usize) -> usize {
    len.div_ceil(hop)
}

/// What the telephone signal tells about one frame.
#[derive(Debug, Clone)]
pub struct FrameAnalysis {
    pub tel_env: SpectralEnvelope,
    pub cepstrum_tel: Vec<f64>,
    pub pitch: PitchEstimate,
    /// RMS of the telephone LPC residual over the frame's block.
    pub excitation_rms: f64,
    pub features: FeatureVector,
    pub silent: bool,
}

#[derive(Debug, Clone)]
pub struct TelephoneAnalysis {
    /// The (optionally equalized) input upsampled to 16 kHz.
    pub x_up: Vec<f64>,
    pub frames: Vec<FrameAnalysis>,
}

/// Wideband version → telephone version: decimate to 8 kHz, then apply the
/// IRS weighting (delay-compensated).
pub fn narrowband_from_wide(wide: &SignalBuffer, irs: &FirFilter) -> Result<SignalBuffer> {
    if wide.sample_rate() != SampleRate::Wide {
        return Err(Error::precondition("expected a 16 kHz signal"));
    }
    let narrow = downsample_2x(wide)?;
    SignalBuffer::new(irs.filter(narrow.samples(), true), SampleRate::Narrow)
}

/// Analyses an 8 kHz telephone signal frame by frame.
pub fn analyze_telephone(
    x_tel: &SignalBuffer,
    cfg: &AnalysisConfig,
    inverse_irs: Option<&FirFilter>,
    silence_rms: f64,
) -> Result<TelephoneAnalysis> {
    if x_tel.sample_rate() != SampleRate::Narrow {
        return Err(Error::precondition("telephone analysis expects 8 kHz input"));
    }
    let tel: Vec<f64> = match inverse_irs {
        Some(f) => f.filter(x_tel.samples(), true),
        None => x_tel.samples().to_vec(),
    };
    let tel_buf = SignalBuffer::new(tel, SampleRate::Narrow)?;
    let x_up = upsample_2x(&tel_buf)?.into_samples();
    let tel = tel_buf.into_samples();

    let hop = cfg.hop;
    let len = cfg.frame_len;
    let lead = (len - hop) / 2;
    let (hop8, len8, lead8) = (hop / 2, len / 2, lead / 2);
    let n_frames = frame_count(x_up.len(), hop);
    let pre8 = pre_emphasize(&tel, cfg.preemph_alpha);
    let win8 = hanning_window(len8);
    let beta8 = cfg.lag_beta_for(SampleRate::Narrow);

    // history for the longest pitch lag, room for the last window
    let pad = cfg.pitch_max + lead;
    let mut padded = vec![0.0; pad];
    padded.extend_from_slice(&x_up);
    padded.resize(pad + n_frames * hop + len, 0.0);

    let mut state = FilterState::new(cfg.lpc_order_tel);
    let mut frames: Vec<FrameAnalysis> = Vec::with_capacity(n_frames);
    for t in 0..n_frames {
        let w8: Vec<f64> = window_slice(&pre8, (t * hop8) as isize - lead8 as isize, len8)
            .iter()
            .zip(&win8)
            .map(|(x, w)| x * w)
            .collect();
        let lpc = analyze_frame(&w8, cfg.lpc_order_tel, cfg.noise_floor_alpha, beta8)?.model;
        let tel_env = lpc_to_envelope(&lpc, TEL_POINTS)?;
        let cepstrum_tel = CepstralVector::telephone(&tel_env)?.coefficients;

        let block = window_slice(&pre8, (t * hop8) as isize, hop8);
        let resid = analysis_filter(&block, &lpc, &mut state)?;
        let excitation_rms = rms(&resid);

        let frame_start = pad + t * hop - lead;
        let pw = PitchWindow::new(&padded[..frame_start + len], frame_start, cfg.pitch_max)?;
        let pitch = estimate_pitch(&pw, (cfg.pitch_min, cfg.pitch_max), cfg.anti_doubling_theta)?;
        let silent = rms(&padded[frame_start..frame_start + len]) < silence_rms;

        let features = extract_features(&FrameContext {
            cepstrum_tel: &cepstrum_tel,
            pitch: &pitch,
            excitation_energy: excitation_rms * excitation_rms,
            previous: frames.last().map(|p| PreviousFrame {
                cepstrum_tel: &p.cepstrum_tel,
                excitation_energy: p.excitation_rms * p.excitation_rms,
            }),
        })?;
        frames.push(FrameAnalysis {
            tel_env,
            cepstrum_tel,
            pitch,
            excitation_rms,
            features,
            silent,
        });
    }
    Ok(TelephoneAnalysis { x_up, frames })
}

/// Training targets of one frame, measured on the original wideband signal.
#[derive(Debug, Clone)]
pub struct FrameTargets {
    /// Envelope of the pre-emphasized wideband signal.
    pub wide_env: SpectralEnvelope,
    /// Mean of `wide_env` over the telephone points.
    pub reference: f64,
    /// High-band cepstrum relative to `reference`.
    pub high: Vec<f64>,
    /// Harmonic amplitudes of the true 0–200 Hz band.
    pub low_amplitudes: [f64; 2],
    /// `low_amplitudes` normalized by the excitation RMS.
    pub low: [f64; 2],
}

/// Clamps the frame's fundamental into the low-band fit's admissible range.
pub fn frame_omega0(pitch: &PitchEstimate) -> f64 {
    use std::f64::consts::PI;
    let (lo, hi) = crate::lowband::F0_RANGE_HZ;
    pitch.omega0().clamp(2.0 * PI * lo / 16000.0, 2.0 * PI * hi / 16000.0)
}

/// Targets for every analysed frame. `wide` is aligned sample-for-sample
/// with `analysis.x_up`.
pub fn wideband_targets(
    wide: &[f64],
    analysis: &TelephoneAnalysis,
    cfg: &AnalysisConfig,
    lowpass_200: &FirFilter,
) -> Result<Vec<FrameTargets>> {
    let hop = cfg.hop;
    let len = cfg.frame_len;
    let lead = (len - hop) / 2;
    let pre = pre_emphasize(wide, cfg.preemph_alpha);
    let win = hanning_window(len);
    let low = lowpass_200.filter(wide, true);
    analysis
        .frames
        .iter()
        .enumerate()
        .map(|(t, fa)| {
            let w: Vec<f64> = window_slice(&pre, (t * hop) as isize - lead as isize, len)
                .iter()
                .zip(&win)
                .map(|(x, w)| x * w)
                .collect();
            let lpc = analyze_frame(&w, cfg.lpc_order_wide, cfg.noise_floor_alpha, cfg.lag_beta)?.model;
            let wide_env = lpc_to_envelope(&lpc, WIDE_POINTS)?;
            let reference = wide_env.log_power()[TEL_BAND].iter().sum::<f64>() / TEL_BAND.count() as f64;
            let high = CepstralVector::high(&wide_env, reference)?.coefficients;
            let seg = window_slice(&low, (t * hop) as isize + hop as isize - len as isize, len);
            let low_amplitudes = harmonic_ls_fit(&seg, frame_omega0(&fa.pitch))?.amplitudes();
            Ok(FrameTargets {
                wide_env,
                reference,
                high,
                low_amplitudes,
                low: normalize_amplitudes(low_amplitudes, fa.excitation_rms),
            })
        })
        .collect()
}
