//! Open-loop long-term prediction: for each frame, the lag `T` and gain `β`
//! of the predictor `x(n) ≈ β x(n-T)`.
//!
//! The lag maximizes `(Σ x(n)x(n-T))² / Σ x(n-T)²` over the frame, counting
//! only positive correlations. A second pass prefers a sub-multiple of the
//! winning lag when its score is close, which suppresses pitch doubling.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PitchEstimate {
    /// Integer lag in samples.
    pub period: usize,
    /// Lag refined by parabolic interpolation of the score, in thirds of a
    /// sample.
    pub fractional_period: f64,
    pub gain: f64,
    /// The maximized score at `period`.
    pub normalized_score: f64,
}

impl PitchEstimate {
    /// Fundamental in radians per sample, from the fractional lag.
    pub fn omega0(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.fractional_period
    }
}

/// A frame together with the history the lags reach back into.
#[derive(Debug, Clone, Copy)]
pub struct PitchWindow<'a> {
    buffer: &'a [f64],
    frame_start: usize,
}

impl<'a> PitchWindow<'a> {
    /// `buffer[frame_start..]` is the frame, everything before it history.
    pub fn new(buffer: &'a [f64], frame_start: usize, max_lag: usize) -> Result<Self> {
        if frame_start < max_lag {
            return Err(Error::precondition(format!(
                "pitch search needs {max_lag} samples of history, have {frame_start}"
            )));
        }
        if frame_start >= buffer.len() {
            return Err(Error::precondition("pitch frame is empty"));
        }
        Ok(Self { buffer, frame_start })
    }

    /// `(Σ x(n)x(n-T), Σ x(n-T)²)` over the frame.
    fn terms(&self, lag: usize) -> (f64, f64) {
        let frame = &self.buffer[self.frame_start..];
        let past = &self.buffer[self.frame_start - lag..self.buffer.len() - lag];
        let mut c = 0.0;
        let mut e = 0.0;
        for (x, p) in frame.iter().zip(past) {
            c += x * p;
            e += p * p;
        }
        (c, e)
    }

    /// The maximand; zero for non-positive correlation or empty history.
    pub fn score(&self, lag: usize) -> f64 {
        let (c, e) = self.terms(lag);
        if e > 0.0 && c > 0.0 {
            c * c / e
        } else {
            0.0
        }
    }

    fn gain(&self, lag: usize) -> f64 {
        let (c, e) = self.terms(lag);
        if e > 0.0 {
            c / e
        } else {
            0.0
        }
    }

    fn estimate(&self, lag: usize, range: (usize, usize)) -> PitchEstimate {
        let score = self.score(lag);
        let mut frac = lag as f64;
        if score > 0.0 && lag > range.0 && lag < range.1 {
            let (l, r) = (self.score(lag - 1), self.score(lag + 1));
            let denom = l - 2.0 * score + r;
            if denom < 0.0 {
                let delta = (0.5 * (l - r) / denom).clamp(-0.5, 0.5);
                frac += (3.0 * delta).round() / 3.0;
            }
        }
        PitchEstimate {
            period: lag,
            fractional_period: frac,
            gain: self.gain(lag),
            normalized_score: score,
        }
    }
}

/// Exhaustive search of integer lags in `range` (inclusive); ties go to the
/// smaller lag. A frame with no positive correlation at any lag returns
/// `T = range.0`, `β = 0`.
pub fn pitch_search(win: &PitchWindow<'_>, range: (usize, usize)) -> Result<PitchEstimate> {
    let (lo, hi) = range;
    if lo == 0 || lo > hi || hi > win.frame_start {
        return Err(Error::precondition(format!("invalid pitch range [{lo}, {hi}]")));
    }
    let mut best = (lo, 0.0);
    for lag in lo..=hi {
        let s = win.score(lag);
        if s > best.1 {
            best = (lag, s);
        }
    }
    if best.1 == 0.0 {
        return Ok(PitchEstimate {
            period: lo,
            fractional_period: lo as f64,
            gain: 0.0,
            normalized_score: 0.0,
        });
    }
    Ok(win.estimate(best.0, range))
}

/// Replaces `est` by the best lag near `T/3` or, failing that, near `T/2`
/// when that lag scores at least `theta` times the original.
pub fn refine_anti_doubling(
    est: &PitchEstimate,
    win: &PitchWindow<'_>,
    range: (usize, usize),
    theta: f64,
) -> PitchEstimate {
    let base = est.normalized_score;
    if base <= 0.0 {
        return *est;
    }
    for d in [3usize, 2] {
        let centre = (est.period as f64 / d as f64).round() as i64;
        let lo = (centre - 2).max(range.0 as i64) as usize;
        let hi = (centre + 2).min(range.1 as i64);
        if hi < lo as i64 {
            continue;
        }
        let mut best: Option<(usize, f64)> = None;
        for lag in lo..=hi as usize {
            let s = win.score(lag);
            if s >= theta * base && best.is_none_or(|(_, b)| s > b) {
                best = Some((lag, s));
            }
        }
        if let Some((lag, _)) = best {
            return win.estimate(lag, range);
        }
    }
    *est
}

/// Search followed by the anti-doubling pass.
pub fn estimate_pitch(win: &PitchWindow<'_>, range: (usize, usize), theta: f64) -> Result<PitchEstimate> {
    let est = pitch_search(win, range)?;
    Ok(refine_anti_doubling(&est, win, range, theta))
}
