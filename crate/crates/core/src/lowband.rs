//! 50–200 Hz reconstruction with a two-harmonic sinusoidal model.
//!
//! A windowed frame is approximated by
//! `w(n) [g0 + g1 cos ω0n + h1 sin ω0n + g2 cos 2ω0n + h2 sin 2ω0n]`,
//! `w` the Hann window, and the five parameters are fitted by least squares.
//! Amplitudes `A_k = √(g_k² + h_k²)` are predicted; phases are recovered from
//! what the telephone channel left of the harmonics.
//!
//! Phase convention: `g cos θ + h sin θ = A cos(θ + φ)` with
//! `φ = atan2(-h, g)`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::filters::FirFilter;
use crate::linalg::{least_squares_qr, Matrix, NormalEquations};

/// Floor inside the amplitude logarithms.
pub const AMPLITUDE_EPS: f64 = 1e-10;
/// Fitted amplitudes below this carry no usable phase.
pub const PHASE_RELIABILITY: f64 = 1e-7;
/// Smallest frame the fit accepts.
pub const MIN_FIT_LEN: usize = 64;

/// Admissible fundamentals, in Hz at 16 kHz.
pub const F0_RANGE_HZ: (f64, f64) = (50.0, 400.0);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HarmonicFit {
    pub g0: f64,
    pub g1: f64,
    pub h1: f64,
    pub g2: f64,
    pub h2: f64,
    pub omega0: f64,
}

impl HarmonicFit {
    pub fn amplitudes(&self) -> [f64; 2] {
        [self.g1.hypot(self.h1), self.g2.hypot(self.h2)]
    }

    pub fn phases(&self) -> [f64; 2] {
        [(-self.h1).atan2(self.g1), (-self.h2).atan2(self.g2)]
    }
}

/// Periodic Hann window `(1 - cos 2πn/N) / 2`; shifted copies at hop `N/2`
/// sum to one.
pub fn ola_window(len: usize) -> Vec<f64> {
    (0..len)
        .map(|n| 0.5 * (1.0 - (2.0 * PI * n as f64 / len as f64).cos()))
        .collect()
}

fn check_omega(omega0: f64) -> Result<()> {
    let lo = 2.0 * PI * F0_RANGE_HZ.0 / 16000.0;
    let hi = 2.0 * PI * F0_RANGE_HZ.1 / 16000.0;
    if !(omega0 >= lo * (1.0 - 1e-9) && omega0 <= hi * (1.0 + 1e-9)) {
        return Err(Error::precondition(format!(
            "fundamental {:.1} Hz is outside 50–400 Hz",
            omega0 * 16000.0 / (2.0 * PI)
        )));
    }
    Ok(())
}

/// Least-squares fit of the windowed two-harmonic model to the Hann-windowed
/// frame. The frame's first sample is `n = 0`.
pub fn harmonic_ls_fit(frame: &[f64], omega0: f64) -> Result<HarmonicFit> {
    if frame.len() < MIN_FIT_LEN {
        return Err(Error::precondition(format!("harmonic fit needs {MIN_FIT_LEN} samples")));
    }
    check_omega(omega0)?;
    let w = ola_window(frame.len());
    let mut ne = NormalEquations::new(5, 1);
    for (n, (x, wn)) in frame.iter().zip(&w).enumerate() {
        let t = omega0 * n as f64;
        let row = [
            *wn,
            wn * t.cos(),
            wn * t.sin(),
            wn * (2.0 * t).cos(),
            wn * (2.0 * t).sin(),
        ];
        ne.add_row(&row, &[wn * x], 1.0);
    }
    let p = ne.solve(0.0)?;
    Ok(HarmonicFit {
        g0: p[(0, 0)],
        g1: p[(1, 0)],
        h1: p[(2, 0)],
        g2: p[(3, 0)],
        h2: p[(4, 0)],
        omega0,
    })
}

/// `ln(A_k + ε) - ln(‖r‖ + ε)`, `‖r‖` the excitation RMS.
pub fn normalize_amplitudes(a: [f64; 2], excitation_rms: f64) -> [f64; 2] {
    let r = (excitation_rms + AMPLITUDE_EPS).ln();
    a.map(|ak| (ak + AMPLITUDE_EPS).ln() - r)
}

/// Inverse of [`normalize_amplitudes`]; negative results clamp to zero.
pub fn denormalize_amplitudes(a_norm: [f64; 2], excitation_rms: f64) -> [f64; 2] {
    let r = (excitation_rms + AMPLITUDE_EPS).ln();
    a_norm.map(|v| ((v + r).exp() - AMPLITUDE_EPS).max(0.0))
}

/// Phases of the attenuated harmonics still present in a telephone-band
/// frame; `None` where the fitted amplitude is too small to trust.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualHarmonics {
    pub fit: HarmonicFit,
    pub phases: [Option<f64>; 2],
}

impl ResidualHarmonics {
    /// Set when at least one harmonic falls back to oscillator continuity.
    pub fn fallback(&self) -> bool {
        self.phases.iter().any(Option::is_none)
    }
}

/// Harmonics up to this frequency enter the residual fit; the ones above the
/// second absorb what the 200 Hz low-pass leaks of the telephone band.
pub const NUISANCE_LIMIT_HZ: f64 = 400.0;

/// Windowed least-squares fit of `g0 + Σ_k g_k cos kω0n + h_k sin kω0n`,
/// `k = 1..=count`, solved by QR. Returns `[g0, g1, h1, g2, h2, ...]`.
fn fit_harmonics(frame: &[f64], omega0: f64, count: usize) -> Result<Vec<f64>> {
    let w = ola_window(frame.len());
    let rows: Vec<Vec<f64>> = w
        .iter()
        .enumerate()
        .map(|(n, wn)| {
            let mut row = vec![*wn];
            for k in 1..=count {
                let t = k as f64 * omega0 * n as f64;
                row.extend([wn * t.cos(), wn * t.sin()]);
            }
            row
        })
        .collect();
    let b: Vec<f64> = frame.iter().zip(&w).map(|(x, wn)| x * wn).collect();
    least_squares_qr(&Matrix::from_rows(&rows), &b)
}

pub fn extract_residual_harmonics(tel_frame: &[f64], omega0: f64) -> Result<ResidualHarmonics> {
    if tel_frame.len() < MIN_FIT_LEN {
        return Err(Error::precondition(format!("harmonic fit needs {MIN_FIT_LEN} samples")));
    }
    check_omega(omega0)?;
    let limit = 2.0 * PI * NUISANCE_LIMIT_HZ / 16000.0;
    let count = ((limit / omega0 + 1e-9).floor() as usize).max(2);
    let p = fit_harmonics(tel_frame, omega0, count)?;
    let fit = HarmonicFit {
        g0: p[0],
        g1: p[1],
        h1: p[2],
        g2: p[3],
        h2: p[4],
        omega0,
    };
    let amps = fit.amplitudes();
    let ph = fit.phases();
    Ok(ResidualHarmonics {
        fit,
        phases: [0, 1].map(|k| (amps[k] >= PHASE_RELIABILITY).then_some(ph[k])),
    })
}

/// Parameters of one synthesis frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LowbandFrame {
    pub omega0: f64,
    pub amplitudes: [f64; 2],
    /// Phase at the frame's first sample, or `None` to continue the
    /// previous frame's oscillator.
    pub phases: [Option<f64>; 2],
}

impl LowbandFrame {
    pub fn silent(omega0: f64) -> Self {
        Self {
            omega0,
            amplitudes: [0.0; 2],
            phases: [None; 2],
        }
    }
}

/// Overlap-add of Hann-windowed two-tone frames.
///
/// Frame `t` starts at `origin + t·frame_len/2`; samples outside
/// `0..out_len` are dropped. The sum is finally low-passed by `lowpass_200`
/// (delay-compensated) when given.
pub fn synthesize_lowband(
    frames: &[LowbandFrame],
    frame_len: usize,
    origin: isize,
    out_len: usize,
    lowpass_200: Option<&FirFilter>,
) -> Result<Vec<f64>> {
    if frame_len < 2 || frame_len % 2 != 0 {
        return Err(Error::precondition("synthesis frame length must be even"));
    }
    let hop = frame_len / 2;
    let w = ola_window(frame_len);
    let mut out = vec![0.0; out_len];
    let mut prev: Option<([f64; 2], f64)> = None;
    for (t, f) in frames.iter().enumerate() {
        let start = origin + (t * hop) as isize;
        let phases = [0, 1].map(|k| {
            f.phases[k].unwrap_or_else(|| match prev {
                Some((p, w_prev)) => p[k] + (k + 1) as f64 * 0.5 * (w_prev + f.omega0) * hop as f64,
                None => 0.0,
            })
        });
        prev = Some((phases, f.omega0));
        if f.amplitudes == [0.0; 2] {
            continue;
        }
        for (n, wn) in w.iter().enumerate() {
            let idx = start + n as isize;
            if idx < 0 || idx as usize >= out_len {
                continue;
            }
            let th = f.omega0 * n as f64;
            out[idx as usize] += wn
                * (f.amplitudes[0] * (th + phases[0]).cos() + f.amplitudes[1] * (2.0 * th + phases[1]).cos());
        }
    }
    Ok(match lowpass_200 {
        Some(lp) => lp.filter(&out, true),
        None => out,
    })
}
