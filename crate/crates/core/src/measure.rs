//! Spectral measurements used by the evaluation driver and the tests.

use std::f64::consts::PI;

use rustfft::{num_complex::Complex, FftPlanner};

/// One-sided power spectrum on a uniform frequency grid.
#[derive(Debug, Clone)]
pub struct PowerSpectrum {
    pub bin_hz: f64,
    pub power: Vec<f64>,
}

impl PowerSpectrum {
    pub fn freq(&self, k: usize) -> f64 {
        k as f64 * self.bin_hz
    }

    /// Sum of the bins whose centre lies in `[lo_hz, hi_hz]`.
    pub fn band_power(&self, lo_hz: f64, hi_hz: f64) -> f64 {
        self.power
            .iter()
            .enumerate()
            .filter(|(k, _)| {
                let f = self.freq(*k);
                f >= lo_hz && f <= hi_hz
            })
            .map(|(_, p)| p)
            .sum()
    }

    /// Geometric over arithmetic mean of the bins in `[lo_hz, hi_hz]`.
    pub fn flatness(&self, lo_hz: f64, hi_hz: f64) -> f64 {
        let band: Vec<f64> = self
            .power
            .iter()
            .enumerate()
            .filter(|(k, _)| {
                let f = self.freq(*k);
                f >= lo_hz && f <= hi_hz
            })
            .map(|(_, &p)| p.max(1e-300))
            .collect();
        if band.is_empty() {
            return 0.0;
        }
        let n = band.len() as f64;
        let log_mean = band.iter().map(|p| p.ln()).sum::<f64>() / n;
        let mean = band.iter().sum::<f64>() / n;
        if mean <= 0.0 {
            0.0
        } else {
            log_mean.exp() / mean
        }
    }
}

fn periodic_hann(len: usize) -> Vec<f64> {
    (0..len)
        .map(|n| 0.5 - 0.5 * (2.0 * PI * n as f64 / len as f64).cos())
        .collect()
}

fn windowed_power(segment: &[f64], window: &[f64], nfft: usize) -> Vec<f64> {
    let mut buf: Vec<Complex<f64>> = vec![Complex::new(0.0, 0.0); nfft];
    for (i, (x, w)) in segment.iter().zip(window).enumerate() {
        buf[i].re = x * w;
    }
    FftPlanner::new().plan_fft_forward(nfft).process(&mut buf);
    buf[..=nfft / 2].iter().map(|c| c.norm_sqr()).collect()
}

/// Hann-windowed periodogram of the whole signal.
pub fn periodogram(x: &[f64], sample_rate: f64) -> PowerSpectrum {
    let nfft = x.len().max(2).next_power_of_two();
    let window = periodic_hann(x.len());
    let norm = window.iter().map(|w| w * w).sum::<f64>().max(1e-300);
    let power = windowed_power(x, &window, nfft)
        .into_iter()
        .map(|p| p / norm)
        .collect();
    PowerSpectrum {
        bin_hz: sample_rate / nfft as f64,
        power,
    }
}

/// Welch average of Hann-windowed periodograms (50% overlap).
pub fn welch(x: &[f64], segment: usize, sample_rate: f64) -> PowerSpectrum {
    assert!(segment >= 2 && segment.is_power_of_two());
    if x.len() < segment {
        let mut padded = x.to_vec();
        padded.resize(segment, 0.0);
        return welch(&padded, segment, sample_rate);
    }
    let window = periodic_hann(segment);
    let norm = window.iter().map(|w| w * w).sum::<f64>();
    let hop = segment / 2;
    let mut acc = vec![0.0; segment / 2 + 1];
    let mut count = 0usize;
    let mut start = 0;
    while start + segment <= x.len() {
        for (a, p) in acc.iter_mut().zip(windowed_power(&x[start..start + segment], &window, segment)) {
            *a += p;
        }
        count += 1;
        start += hop;
    }
    acc.iter_mut().for_each(|a| *a /= norm * count as f64);
    PowerSpectrum {
        bin_hz: sample_rate / segment as f64,
        power: acc,
    }
}

/// Amplitude of the sinusoid at `freq_hz` that best fits `x` in least squares.
pub fn tone_amplitude(x: &[f64], freq_hz: f64, sample_rate: f64) -> f64 {
    let w = 2.0 * PI * freq_hz / sample_rate;
    let (mut cc, mut ss, mut cs, mut xc, mut xs) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (n, &v) in x.iter().enumerate() {
        let (s, c) = (w * n as f64).sin_cos();
        cc += c * c;
        ss += s * s;
        cs += c * s;
        xc += v * c;
        xs += v * s;
    }
    let det = cc * ss - cs * cs;
    if det.abs() < 1e-300 {
        return 0.0;
    }
    let a = (xc * ss - xs * cs) / det;
    let b = (xs * cc - xc * cs) / det;
    a.hypot(b)
}

pub fn rms(x: &[f64]) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    (x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64).sqrt()
}

pub fn db(power_ratio: f64) -> f64 {
    10.0 * power_ratio.log10()
}
