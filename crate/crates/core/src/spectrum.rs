//! Log-power envelopes on the 125 Hz grid, their DCT ("cepstral")
//! compression, and the spectral-distortion measure.
//!
//! Envelopes store the natural log of the LPC synthesis power spectrum
//! `1/|A(e^jω)|²`. A 64-point envelope covers 0–8000 Hz of a 16 kHz analysis
//! and a 32-point envelope covers 0–4000 Hz of an 8 kHz analysis; either way
//! point `k` sits at `125·k` Hz.

use std::ops::RangeInclusive;
use std::sync::atomic::{AtomicU64, Ordering};

use rustfft::{num_complex::Complex, FftPlanner};

use crate::error::{Error, Result};
use crate::lpc::{levinson_durbin, Autocorrelation, LpcModel};

pub const GRID_HZ: f64 = 125.0;
pub const WIDE_POINTS: usize = 64;
pub const TEL_POINTS: usize = 32;
/// Telephone sub-band (250–3500 Hz) of the 32-point grid.
pub const TEL_BAND: RangeInclusive<usize> = 2..=28;
/// High-band segment (3000–7875 Hz) of the 64-point grid.
pub const HIGH_BAND: RangeInclusive<usize> = 24..=63;
pub const TEL_CEPSTRUM_LEN: usize = 10;
pub const HIGH_CEPSTRUM_LEN: usize = 8;

static CLAMPED_BINS: AtomicU64 = AtomicU64::new(0);

/// Number of times [`lpc_to_envelope`] has had to clamp a zero of `|A|²`.
pub fn clamped_bin_count() -> u64 {
    CLAMPED_BINS.load(Ordering::Relaxed)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralEnvelope {
    log_power: Vec<f64>,
}

impl SpectralEnvelope {
    pub fn new(log_power: Vec<f64>) -> Result<Self> {
        if log_power.len() != WIDE_POINTS && log_power.len() != TEL_POINTS {
            return Err(Error::precondition(format!(
                "envelopes have 32 or 64 points, got {}",
                log_power.len()
            )));
        }
        if log_power.iter().any(|v| !v.is_finite()) {
            return Err(Error::precondition("envelope values must be finite"));
        }
        Ok(Self { log_power })
    }

    pub fn flat(n_points: usize) -> Result<Self> {
        Self::new(vec![0.0; n_points])
    }

    pub fn log_power(&self) -> &[f64] {
        &self.log_power
    }

    pub fn n_points(&self) -> usize {
        self.log_power.len()
    }

    pub fn freq_hz(k: usize) -> f64 {
        k as f64 * GRID_HZ
    }
}

/// Truncated DCT of an envelope segment.
#[derive(Debug, Clone, PartialEq)]
pub struct CepstralVector {
    pub coefficients: Vec<f64>,
}

impl CepstralVector {
    /// The 10 coefficients describing points 2..=28 of a telephone envelope.
    pub fn telephone(env: &SpectralEnvelope) -> Result<Self> {
        if env.n_points() != TEL_POINTS {
            return Err(Error::precondition("telephone cepstrum needs a 32-point envelope"));
        }
        Ok(Self {
            coefficients: dct(&env.log_power[TEL_BAND], TEL_CEPSTRUM_LEN),
        })
    }

    /// The 8 coefficients describing points 24..=63 of a wideband envelope,
    /// taken relative to `reference` (a log level subtracted first).
    pub fn high(env: &SpectralEnvelope, reference: f64) -> Result<Self> {
        if env.n_points() != WIDE_POINTS {
            return Err(Error::precondition("high-band cepstrum needs a 64-point envelope"));
        }
        let seg: Vec<f64> = env.log_power[HIGH_BAND].iter().map(|v| v - reference).collect();
        Ok(Self {
            coefficients: dct(&seg, HIGH_CEPSTRUM_LEN),
        })
    }
}

/// `log(1/|A|²)` on `k = 0..n_points` with `ω_k = πk/n_points`, via a
/// `2·n_points` FFT of the zero-padded analysis polynomial.
pub fn lpc_to_envelope(lpc: &LpcModel, n_points: usize) -> Result<SpectralEnvelope> {
    let nfft = 2 * n_points;
    let poly = lpc.polynomial();
    if poly.len() > nfft {
        return Err(Error::precondition(format!(
            "order {} is too high for a {nfft}-point DFT",
            lpc.order()
        )));
    }
    let mut buf = vec![Complex::new(0.0, 0.0); nfft];
    for (b, &p) in buf.iter_mut().zip(&poly) {
        b.re = p;
    }
    FftPlanner::new().plan_fft_forward(nfft).process(&mut buf);
    let log_power = buf[..n_points]
        .iter()
        .map(|c| {
            let mut sa = c.norm_sqr();
            if !(sa > 1e-30) {
                CLAMPED_BINS.fetch_add(1, Ordering::Relaxed);
                sa = 1e-30;
            }
            -sa.ln()
        })
        .collect();
    SpectralEnvelope::new(log_power)
}

/// Oversampling of the log spectrum before the autocorrelation integral.
const CEPSTRAL_OVERSAMPLING: usize = 8;

/// Autocorrelation of the power spectrum `exp(log_power)`, extended
/// even-symmetrically to `2n` points.
///
/// The Nyquist point is not on the grid; it is extrapolated from the last two
/// points by the parabola symmetric about Nyquist. The log spectrum is then
/// interpolated by zero-padding its cepstrum, which keeps the aliasing of long
/// autocorrelations of sharp envelopes far below that of the raw grid.
pub fn envelope_autocorrelation(env: &SpectralEnvelope, max_lag: usize) -> Result<Autocorrelation> {
    let n = env.n_points();
    let lp = &env.log_power;
    let nyquist = (4.0 * lp[n - 1] - lp[n - 2]) / 3.0;
    let nfft = 2 * n;
    if max_lag >= nfft {
        return Err(Error::precondition("lag exceeds the spectral grid"));
    }
    let mut planner = FftPlanner::new();
    let mut ceps: Vec<Complex<f64>> = (0..nfft)
        .map(|k| {
            let l = match k {
                k if k < n => lp[k],
                k if k == n => nyquist,
                k => lp[nfft - k],
            };
            Complex::new(l, 0.0)
        })
        .collect();
    planner.plan_fft_inverse(nfft).process(&mut ceps);
    let fine = nfft * CEPSTRAL_OVERSAMPLING;
    let mut buf = vec![Complex::new(0.0, 0.0); fine];
    for m in 0..n {
        buf[m] = ceps[m] / nfft as f64;
        if m > 0 {
            buf[fine - m] = ceps[nfft - m] / nfft as f64;
        }
    }
    buf[n] = ceps[n] / (2 * nfft) as f64;
    buf[fine - n] = buf[n];
    planner.plan_fft_forward(fine).process(&mut buf);
    for b in buf.iter_mut() {
        *b = Complex::new(b.re.exp(), 0.0);
    }
    planner.plan_fft_inverse(fine).process(&mut buf);
    Autocorrelation::new(buf[..=max_lag].iter().map(|c| c.re / fine as f64).collect())
}

/// Fits an order-`order` LPC model to the envelope.
pub fn envelope_to_lpc(env: &SpectralEnvelope, order: usize) -> Result<LpcModel> {
    let r = envelope_autocorrelation(env, order)?;
    Ok(levinson_durbin(&r, order)?.model)
}

fn dct_scale(k: usize, n: usize) -> f64 {
    if k == 0 {
        (1.0 / n as f64).sqrt()
    } else {
        (2.0 / n as f64).sqrt()
    }
}

/// Orthonormal DCT-II, keeping the first `keep` coefficients.
pub fn dct(x: &[f64], keep: usize) -> Vec<f64> {
    let n = x.len();
    assert!(keep <= n, "cannot keep {keep} of {n} coefficients");
    let nf = n as f64;
    (0..keep)
        .map(|k| {
            let s: f64 = x
                .iter()
                .enumerate()
                .map(|(i, v)| v * (std::f64::consts::PI * (2 * i + 1) as f64 * k as f64 / (2.0 * nf)).cos())
                .sum();
            dct_scale(k, n) * s
        })
        .collect()
}

/// Inverse of [`dct`] after zero-padding `c` to `n_points` coefficients.
pub fn idct(c: &[f64], n_points: usize) -> Vec<f64> {
    assert!(c.len() <= n_points, "more coefficients than output points");
    let nf = n_points as f64;
    (0..n_points)
        .map(|i| {
            c.iter()
                .enumerate()
                .map(|(k, ck)| {
                    dct_scale(k, n_points)
                        * ck
                        * (std::f64::consts::PI * (2 * i + 1) as f64 * k as f64 / (2.0 * nf)).cos()
                })
                .sum()
        })
        .collect()
}

const DB_PER_NEPER_POWER: f64 = 10.0 / std::f64::consts::LN_10;

/// RMS over paired points of the dB difference between two natural-log power
/// sequences.
pub fn spectral_distortion_points(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::precondition("envelopes must share a grid"));
    }
    if a.is_empty() {
        return Err(Error::precondition("spectral distortion over an empty band"));
    }
    let ms = a
        .iter()
        .zip(b)
        .map(|(x, y)| {
            let d = DB_PER_NEPER_POWER * (x - y);
            d * d
        })
        .sum::<f64>()
        / a.len() as f64;
    Ok(ms.sqrt())
}

/// Grid points whose frequency lies in `[f1, f2]`.
pub fn band_points(n_points: usize, f1: f64, f2: f64) -> RangeInclusive<usize> {
    let lo = (f1 / GRID_HZ).ceil().max(0.0) as usize;
    let hi = ((f2 / GRID_HZ).floor() as usize).min(n_points - 1);
    lo..=hi
}

/// Spectral distortion in dB between two envelopes over `[f1, f2]` Hz.
pub fn spectral_distortion(a: &SpectralEnvelope, b: &SpectralEnvelope, band: (f64, f64)) -> Result<f64> {
    if a.n_points() != b.n_points() {
        return Err(Error::precondition("envelopes must share a grid"));
    }
    let pts = band_points(a.n_points(), band.0, band.1);
    if pts.is_empty() {
        return Err(Error::precondition(format!(
            "band [{}, {}] Hz contains no grid point",
            band.0, band.1
        )));
    }
    spectral_distortion_points(&a.log_power[pts.clone()], &b.log_power[pts])
}

/// Quadrature mean `sqrt(mean(D_k²))` of per-frame distortions.
pub fn aggregate_distortion(per_frame: &[f64]) -> Result<f64> {
    if per_frame.is_empty() {
        return Err(Error::precondition("no frames to aggregate"));
    }
    Ok((per_frame.iter().map(|d| d * d).sum::<f64>() / per_frame.len() as f64).sqrt())
}

/// `ln|1 - α e^{-jω}|²` at `freq_hz` for sampling rate `fs`.
pub fn emphasis_log_gain(alpha: f64, freq_hz: f64, fs: f64) -> f64 {
    let w = 2.0 * std::f64::consts::PI * freq_hz / fs;
    (1.0 - 2.0 * alpha * w.cos() + alpha * alpha).ln()
}

/// Re-expresses a 32-point telephone envelope analysed on an 8 kHz
/// pre-emphasized signal in the pre-emphasis domain of a 16 kHz analysis.
pub fn telephone_to_wide_emphasis(tel: &SpectralEnvelope, alpha: f64) -> Result<Vec<f64>> {
    if tel.n_points() != TEL_POINTS {
        return Err(Error::precondition("expected a 32-point telephone envelope"));
    }
    Ok(tel
        .log_power
        .iter()
        .enumerate()
        .map(|(k, v)| {
            let f = SpectralEnvelope::freq_hz(k);
            v + emphasis_log_gain(alpha, f, 8000.0) - emphasis_log_gain(alpha, f, 16000.0)
        })
        .collect())
}
