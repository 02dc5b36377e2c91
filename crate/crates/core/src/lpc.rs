//! Short-term linear prediction.
//!
//! A frame is Hanning-windowed, its autocorrelation is conditioned (a white
//! noise floor on `R(0)` and a Gaussian lag window on the other lags), and the
//! normal equations are solved with the Levinson-Durbin recursion. The
//! resulting predictor `A(z) = 1 - Σ a_i z^-i` whitens the frame; `1/A(z)`
//! shapes an excitation back into speech.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::audio_io::{SampleRate, SignalBuffer};
use crate::error::{Error, Result};

/// Frame geometry and conditioning constants shared by every analysis.
///
/// Lengths are expressed at 16 kHz. Telephone-band analyses run at 8 kHz on
/// frames and hops half as long, with a lag window twice as wide in lags so
/// the spectral smoothing is the same in Hz.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisConfig {
    pub frame_len: usize,
    pub hop: usize,
    pub lpc_order_wide: usize,
    pub lpc_order_tel: usize,
    pub preemph_alpha: f64,
    pub noise_floor_alpha: f64,
    /// Gaussian lag-window parameter at 16 kHz. The default keeps nearly all
    /// envelope resonances at least 250 Hz wide, two points of the 125 Hz grid.
    pub lag_beta: f64,
    pub fft_size: usize,
    pub pitch_min: usize,
    pub pitch_max: usize,
    /// Score ratio above which a sub-multiple of the pitch period wins.
    pub anti_doubling_theta: f64,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            frame_len: 256,
            hop: 128,
            lpc_order_wide: 16,
            lpc_order_tel: 10,
            preemph_alpha: 0.7,
            noise_floor_alpha: 1.0001,
            lag_beta: 2.0 * PI * 187.5 / 16000.0,
            fft_size: 128,
            pitch_min: 40,
            pitch_max: 320,
            anti_doubling_theta: 0.85,
        }
    }
}

impl AnalysisConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.fft_size != 128 {
            return bad(format!("fft_size must be 128 (125 Hz grid), got {}", self.fft_size));
        }
        if !self.frame_len.is_power_of_two() || self.frame_len < self.fft_size {
            return bad(format!(
                "frame_len must be a power of two >= fft_size, got {}",
                self.frame_len
            ));
        }
        if self.hop * 2 != self.frame_len {
            return bad(format!("hop must be frame_len/2, got {}", self.hop));
        }
        if !(self.preemph_alpha > 0.0 && self.preemph_alpha < 1.0) {
            return bad(format!("preemph_alpha must lie in (0, 1), got {}", self.preemph_alpha));
        }
        if !(self.noise_floor_alpha > 1.0) || !self.noise_floor_alpha.is_finite() {
            return bad(format!("noise_floor_alpha must exceed 1, got {}", self.noise_floor_alpha));
        }
        if !(self.lag_beta >= 0.0) || !self.lag_beta.is_finite() {
            return bad(format!("lag_beta must be non-negative, got {}", self.lag_beta));
        }
        if self.lpc_order_tel == 0 || self.lpc_order_wide == 0 {
            return bad("LPC orders must be positive".into());
        }
        if self.lpc_order_tel >= self.frame_len / 2 || self.lpc_order_wide >= self.frame_len {
            return bad("LPC order exceeds the frame length".into());
        }
        if self.pitch_min < 2 || self.pitch_min >= self.pitch_max || self.pitch_max > 2 * self.frame_len {
            return bad(format!(
                "pitch range [{}, {}] must satisfy 2 <= min < max <= 2*frame_len",
                self.pitch_min, self.pitch_max
            ));
        }
        if !(self.anti_doubling_theta > 0.0) {
            return bad("anti_doubling_theta must be positive".into());
        }
        Ok(())
    }

    /// Lag-window parameter for an analysis at `rate`.
    pub fn lag_beta_for(&self, rate: SampleRate) -> f64 {
        match rate {
            SampleRate::Wide => self.lag_beta,
            SampleRate::Narrow => 2.0 * self.lag_beta,
        }
    }
}

/// Signal-to-noise ratio in dB of the white floor added by scaling `R(0)` by
/// `alpha`.
pub fn noise_floor_snr_db(alpha: f64) -> f64 {
    10.0 * (1.0 / (alpha - 1.0)).log10()
}

/// Prediction coefficients `a_1..a_N` of `x(n) ≈ Σ a_i x(n-i)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpcModel {
    coefficients: Vec<f64>,
}

impl LpcModel {
    pub fn new(coefficients: Vec<f64>) -> Result<Self> {
        if coefficients.iter().any(|c| !c.is_finite()) {
            return Err(Error::precondition("LPC coefficients must be finite"));
        }
        Ok(Self { coefficients })
    }

    /// `A(z) = 1`.
    pub fn zero(order: usize) -> Self {
        Self {
            coefficients: vec![0.0; order],
        }
    }

    pub fn order(&self) -> usize {
        self.coefficients.len()
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    /// The analysis polynomial `[1, -a_1, ..., -a_N]`.
    pub fn polynomial(&self) -> Vec<f64> {
        std::iter::once(1.0)
            .chain(self.coefficients.iter().map(|a| -a))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Autocorrelation {
    values: Vec<f64>,
}

impl Autocorrelation {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() || values.iter().any(|v| !v.is_finite()) {
            return Err(Error::precondition("autocorrelation must be non-empty and finite"));
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn max_lag(&self) -> usize {
        self.values.len() - 1
    }
}

/// Symmetric Hanning window `0.5 - 0.5 cos(2πn/(L-1))`.
pub fn hanning_window(len: usize) -> Vec<f64> {
    assert!(len >= 2, "Hanning window needs at least two points");
    let denom = (len - 1) as f64;
    (0..len)
        .map(|n| 0.5 - 0.5 * (2.0 * PI * n as f64 / denom).cos())
        .collect()
}

/// `y(n) = x(n) - α x(n-1)` with `x(-1) = 0`.
pub fn pre_emphasize(x: &[f64], alpha: f64) -> Vec<f64> {
    let mut prev = 0.0;
    x.iter()
        .map(|&v| {
            let y = v - alpha * prev;
            prev = v;
            y
        })
        .collect()
}

/// Inverse of [`pre_emphasize`]: `y(n) = x(n) + α y(n-1)`.
pub fn de_emphasize(x: &[f64], alpha: f64) -> Vec<f64> {
    let mut prev = 0.0;
    x.iter()
        .map(|&v| {
            prev = v + alpha * prev;
            prev
        })
        .collect()
}

pub fn pre_emphasis(signal: &SignalBuffer, alpha: f64) -> SignalBuffer {
    SignalBuffer::from_parts_unchecked(pre_emphasize(signal.samples(), alpha), signal.sample_rate())
}

pub fn de_emphasis(signal: &SignalBuffer, alpha: f64) -> SignalBuffer {
    SignalBuffer::from_parts_unchecked(de_emphasize(signal.samples(), alpha), signal.sample_rate())
}

/// Raw autocorrelation `R(m) = Σ_n x(n) x(n-m)` for `m = 0..=max_lag`.
pub fn autocorrelation(frame: &[f64], max_lag: usize) -> Result<Autocorrelation> {
    if max_lag >= frame.len() {
        return Err(Error::precondition(format!(
            "max_lag {max_lag} must be below the frame length {}",
            frame.len()
        )));
    }
    let values = (0..=max_lag)
        .map(|m| frame[m..].iter().zip(frame).map(|(a, b)| a * b).sum())
        .collect();
    Ok(Autocorrelation { values })
}

/// Noise floor on `R(0)` and Gaussian lag window `exp(-(βm)²)` on the rest.
pub fn condition(r: &Autocorrelation, noise_floor_alpha: f64, lag_beta: f64) -> Autocorrelation {
    let mut values = r.values.clone();
    if values[0] <= 0.0 {
        values[0] = 1e-10;
        values[1..].iter_mut().for_each(|v| *v = 0.0);
        return Autocorrelation { values };
    }
    values[0] *= noise_floor_alpha;
    for (m, v) in values.iter_mut().enumerate().skip(1) {
        let x = lag_beta * m as f64;
        *v *= (-x * x).exp();
    }
    Autocorrelation { values }
}

/// Output of the Levinson-Durbin recursion.
#[derive(Debug, Clone, PartialEq)]
pub struct LpcSolution {
    pub model: LpcModel,
    /// Final prediction-error energy.
    pub error_energy: f64,
    pub reflection: Vec<f64>,
}

/// Solves the Toeplitz normal equations in `O(N²)`.
///
/// Fails with [`Error::Instability`] as soon as a reflection coefficient
/// reaches magnitude 1.
pub fn levinson_durbin(r: &Autocorrelation, order: usize) -> Result<LpcSolution> {
    let r = &r.values;
    if order > r.len() - 1 {
        return Err(Error::precondition(format!(
            "order {order} needs {} lags, have {}",
            order,
            r.len() - 1
        )));
    }
    if !(r[0] > 0.0) {
        return Err(Error::precondition("R(0) must be positive"));
    }
    let mut a = vec![0.0; order];
    let mut tmp = vec![0.0; order];
    let mut reflection = Vec::with_capacity(order);
    let mut err = r[0];
    for i in 0..order {
        let mut acc = r[i + 1];
        for j in 0..i {
            acc -= a[j] * r[i - j];
        }
        let k = acc / err;
        if !(k.abs() < 1.0) {
            return Err(Error::Instability(format!(
                "reflection coefficient {} = {k:.6} at stage {}",
                i + 1,
                i + 1
            )));
        }
        tmp[..i].copy_from_slice(&a[..i]);
        for j in 0..i {
            a[j] = tmp[j] - k * tmp[i - 1 - j];
        }
        a[i] = k;
        err *= 1.0 - k * k;
        reflection.push(k);
    }
    Ok(LpcSolution {
        model: LpcModel { coefficients: a },
        error_energy: err,
        reflection,
    })
}

/// Window, autocorrelate, condition and solve one frame.
pub fn analyze_frame(
    frame: &[f64],
    order: usize,
    noise_floor_alpha: f64,
    lag_beta: f64,
) -> Result<LpcSolution> {
    let w = hanning_window(frame.len());
    let windowed: Vec<f64> = frame.iter().zip(&w).map(|(x, w)| x * w).collect();
    let r = autocorrelation(&windowed, order)?;
    levinson_durbin(&condition(&r, noise_floor_alpha, lag_beta), order)
}

/// Past samples carried between successive blocks of a direct-form filter.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterState {
    history: Vec<f64>,
}

impl FilterState {
    pub fn new(order: usize) -> Self {
        Self {
            history: vec![0.0; order],
        }
    }

    pub fn len(&self) -> usize {
        self.history.len()
    }

    pub fn is_empty(&self) -> bool {
        self.history.is_empty()
    }

    fn check(&self, lpc: &LpcModel) -> Result<()> {
        if self.history.len() != lpc.order() {
            return Err(Error::precondition(format!(
                "filter state holds {} samples, model order is {}",
                self.history.len(),
                lpc.order()
            )));
        }
        Ok(())
    }

    fn push(&mut self, v: f64) {
        if !self.history.is_empty() {
            self.history.rotate_right(1);
            self.history[0] = v;
        }
    }
}

/// `r(n) = x(n) - Σ a_i x(n-i)`; the state holds past inputs.
pub fn analysis_filter(x: &[f64], lpc: &LpcModel, state: &mut FilterState) -> Result<Vec<f64>> {
    state.check(lpc)?;
    let a = lpc.coefficients();
    let mut out = Vec::with_capacity(x.len());
    for &v in x {
        let pred: f64 = a.iter().zip(&state.history).map(|(a, h)| a * h).sum();
        out.push(v - pred);
        state.push(v);
    }
    Ok(out)
}

/// `x(n) = Σ a_i x(n-i) + r(n)`; the state holds past outputs.
pub fn synthesis_filter(r: &[f64], lpc: &LpcModel, state: &mut FilterState) -> Result<Vec<f64>> {
    state.check(lpc)?;
    let a = lpc.coefficients();
    let mut out = Vec::with_capacity(r.len());
    for (n, &v) in r.iter().enumerate() {
        let y = v + a.iter().zip(&state.history).map(|(a, h)| a * h).sum::<f64>();
        if !(y.abs() <= 1e6) {
            return Err(Error::Instability(format!(
                "synthesis output {y:.3e} at sample {n}"
            )));
        }
        out.push(y);
        state.push(y);
    }
    Ok(out)
}
