//! FIR filtering, the modified-IRS send characteristic and its least-squares
//! linear-phase inverse, plus the fixed band-shaping filters of the pipeline.

use std::f64::consts::PI;
use std::path::Path;

use crate::audio_io::SignalBuffer;
use crate::error::{Error, Result};
use crate::linalg::{least_squares_qr, Matrix};

/// Default number of uniform grid points on `[0, π]` for least-squares designs.
pub const DESIGN_GRID: usize = 512;

/// Half order of the inverse-IRS equalizer.
pub const INVERSE_IRS_HALF_ORDER: usize = 30;

/// Half order of the FIR used to impose the IRS characteristic on wideband
/// material when building telephone-band training data.
pub const IRS_FILTER_HALF_ORDER: usize = 40;

const BUILTIN_IRS_TABLE: &str = include_str!("../data/irs_modified.txt");

/// A finite impulse response filter.
#[derive(Debug, Clone, PartialEq)]
pub struct FirFilter {
    taps: Vec<f64>,
    linear_phase: bool,
}

impl FirFilter {
    pub fn new(taps: Vec<f64>) -> Result<Self> {
        if taps.is_empty() {
            return Err(Error::precondition("FIR filter needs at least one tap"));
        }
        if taps.iter().any(|t| !t.is_finite()) {
            return Err(Error::precondition("FIR taps must be finite"));
        }
        Ok(Self {
            taps,
            linear_phase: false,
        })
    }

    /// A filter flagged linear-phase; the taps must be symmetric within 1e-12.
    pub fn linear_phase(taps: Vec<f64>) -> Result<Self> {
        let mut f = Self::new(taps)?;
        let n = f.taps.len();
        for i in 0..n / 2 {
            if (f.taps[i] - f.taps[n - 1 - i]).abs() > 1e-12 {
                return Err(Error::precondition(format!(
                    "taps {i} and {} are not symmetric",
                    n - 1 - i
                )));
            }
        }
        f.linear_phase = true;
        Ok(f)
    }

    pub fn identity() -> Self {
        Self {
            taps: vec![1.0],
            linear_phase: true,
        }
    }

    pub fn taps(&self) -> &[f64] {
        &self.taps
    }

    pub fn len(&self) -> usize {
        self.taps.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn is_linear_phase(&self) -> bool {
        self.linear_phase
    }

    /// Delay in samples, `(len - 1) / 2`. Exact for odd-length linear-phase filters.
    pub fn group_delay(&self) -> usize {
        (self.taps.len() - 1) / 2
    }

    /// `|H(e^{jω})|`
    pub fn magnitude_at(&self, omega: f64) -> f64 {
        let (mut re, mut im) = (0.0, 0.0);
        for (n, h) in self.taps.iter().enumerate() {
            let phase = omega * n as f64;
            re += h * phase.cos();
            im -= h * phase.sin();
        }
        re.hypot(im)
    }

    /// Magnitude response on a uniform grid over `[0, π]`.
    pub fn frequency_response(&self, grid_size: usize) -> FrequencyResponse {
        let magnitudes = (0..grid_size)
            .map(|j| self.magnitude_at(grid_omega(j, grid_size)))
            .collect();
        FrequencyResponse { magnitudes }
    }

    /// Filters a slice. See [`apply_fir`].
    pub fn filter(&self, x: &[f64], delay_compensate: bool) -> Vec<f64> {
        let shift = if delay_compensate {
            self.group_delay()
        } else {
            0
        };
        let n = x.len();
        let mut y = vec![0.0; n];
        for (i, out) in y.iter_mut().enumerate() {
            // full-convolution index
            let m = i + shift;
            let k_lo = m.saturating_sub(n - 1);
            let k_hi = m.min(self.taps.len() - 1);
            let mut acc = 0.0;
            for k in k_lo..=k_hi {
                acc += self.taps[k] * x[m - k];
            }
            *out = acc;
        }
        y
    }
}

/// Direct-form convolution of `signal` with `filter`. The output has the
/// input's length; with `delay_compensate` it is advanced by the group delay
/// (zero-padded at the end) so a linear-phase filter introduces no shift.
pub fn apply_fir(signal: &SignalBuffer, filter: &FirFilter, delay_compensate: bool) -> SignalBuffer {
    SignalBuffer::from_parts_unchecked(
        filter.filter(signal.samples(), delay_compensate),
        signal.sample_rate(),
    )
}

fn grid_omega(j: usize, grid_size: usize) -> f64 {
    if grid_size <= 1 {
        0.0
    } else {
        PI * j as f64 / (grid_size - 1) as f64
    }
}

/// Magnitudes on a uniform grid over `[0, π]`, endpoints included.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyResponse {
    magnitudes: Vec<f64>,
}

impl FrequencyResponse {
    pub fn new(magnitudes: Vec<f64>) -> Result<Self> {
        if magnitudes.len() < 2 {
            return Err(Error::precondition("frequency grid needs at least 2 points"));
        }
        if magnitudes.iter().any(|m| !m.is_finite() || *m < 0.0) {
            return Err(Error::precondition(
                "frequency response magnitudes must be finite and non-negative",
            ));
        }
        Ok(Self { magnitudes })
    }

    /// Samples `f(ω)` on the grid.
    pub fn from_fn(grid_size: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new((0..grid_size).map(|j| f(grid_omega(j, grid_size))).collect())
    }

    pub fn magnitudes(&self) -> &[f64] {
        &self.magnitudes
    }

    pub fn grid_size(&self) -> usize {
        self.magnitudes.len()
    }

    pub fn omega(&self, j: usize) -> f64 {
        grid_omega(j, self.magnitudes.len())
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.magnitudes.iter().map(|m| m * factor).collect())
    }
}

/// Tabulated magnitude of the modified-IRS send characteristic for 8 kHz
/// telephone speech.
#[derive(Debug, Clone, PartialEq)]
pub struct IrsTable {
    points: Vec<(f64, f64)>,
}

impl IrsTable {
    pub const SAMPLE_RATE: f64 = 8000.0;

    /// The table shipped with the crate (`data/irs_modified.txt`).
    pub fn builtin() -> Self {
        Self::parse(BUILTIN_IRS_TABLE).expect("built-in IRS table is valid")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::Config(format!("cannot read IRS table {}: {e}", path.display()))
        })?;
        Self::parse(&text)
    }

    /// Parses `frequency_hz magnitude_linear` lines. `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut points = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut fields = line.split_whitespace();
            let parse = |s: Option<&str>| -> Result<f64> {
                s.and_then(|s| s.parse::<f64>().ok())
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| {
                        Error::Config(format!("IRS table line {}: expected two numbers", lineno + 1))
                    })
            };
            let f = parse(fields.next())?;
            let m = parse(fields.next())?;
            if fields.next().is_some() {
                return Err(Error::Config(format!(
                    "IRS table line {}: trailing fields",
                    lineno + 1
                )));
            }
            if m < 0.0 {
                return Err(Error::Config(format!(
                    "IRS table line {}: negative magnitude",
                    lineno + 1
                )));
            }
            if let Some(&(prev, _)) = points.last() {
                if f <= prev {
                    return Err(Error::Config(format!(
                        "IRS table line {}: frequencies must ascend",
                        lineno + 1
                    )));
                }
            }
            points.push((f, m));
        }
        if points.len() < 2 {
            return Err(Error::Config("IRS table needs at least two points".into()));
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    /// Linear interpolation in frequency; held constant beyond the table ends.
    pub fn magnitude_at_hz(&self, hz: f64) -> f64 {
        let pts = &self.points;
        if hz <= pts[0].0 {
            return pts[0].1;
        }
        if hz >= pts[pts.len() - 1].0 {
            return pts[pts.len() - 1].1;
        }
        let i = pts.partition_point(|&(f, _)| f <= hz);
        let (f0, m0) = pts[i - 1];
        let (f1, m1) = pts[i];
        m0 + (m1 - m0) * (hz - f0) / (f1 - f0)
    }

    pub fn response(&self, grid_size: usize) -> Result<FrequencyResponse> {
        if grid_size < 64 {
            return Err(Error::precondition("IRS response grid needs at least 64 points"));
        }
        FrequencyResponse::from_fn(grid_size, |w| {
            self.magnitude_at_hz(w / PI * Self::SAMPLE_RATE / 2.0)
        })
    }
}

/// `|G(ω)|` of the modified IRS filter at 8 kHz on a `grid_size` grid.
pub fn irs_modified_response(table: &IrsTable, grid_size: usize) -> Result<FrequencyResponse> {
    table.response(grid_size)
}

/// Default fitting band of the inverse design: 200–3500 Hz at 8 kHz.
pub fn default_inverse_band() -> (f64, f64) {
    (2.0 * PI * 200.0 / 8000.0, 2.0 * PI * 3500.0 / 8000.0)
}

/// Weighted least-squares fit of a zero-phase cosine series
/// `a0 + 2 Σ a_k cos(kω)` to `target` on the grid of `weights`. Returns the
/// symmetric `2·half_order + 1` tap filter `[a_N … a_1, a_0, a_1 … a_N]`.
pub fn design_ls_linear_phase(target: &[f64], weights: &[f64], half_order: usize) -> Result<FirFilter> {
    if target.len() != weights.len() || target.len() < 2 {
        return Err(Error::precondition("target and weights must share a grid"));
    }
    let grid = target.len();
    let unknowns = half_order + 1;
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    for (j, (&t, &w)) in target.iter().zip(weights).enumerate() {
        if w == 0.0 {
            continue;
        }
        let omega = grid_omega(j, grid);
        let sw = w.sqrt();
        let row: Vec<f64> = (0..unknowns)
            .map(|k| if k == 0 { sw } else { sw * 2.0 * (k as f64 * omega).cos() })
            .collect();
        rows.push(row);
        rhs.push(sw * t);
    }
    if rows.len() < unknowns {
        return Err(Error::precondition("fewer weighted grid points than unknowns"));
    }
    let a = least_squares_qr(&Matrix::from_rows(&rows), &rhs)?;
    let mut taps = Vec::with_capacity(2 * half_order + 1);
    taps.extend(a[1..].iter().rev());
    taps.extend(a.iter());
    FirFilter::linear_phase(taps)
}

/// Designs the linear-phase FIR whose response approximates `1/|G(ω)|` in the
/// least-squares sense over `band = (ω1, ω2)`; grid points outside the band
/// carry no weight.
pub fn design_inverse_irs(g: &FrequencyResponse, half_order: usize, band: (f64, f64)) -> Result<FirFilter> {
    let (w1, w2) = band;
    if !(w1 < w2) {
        return Err(Error::precondition("inverse design band is empty"));
    }
    let grid = g.grid_size();
    let mut target = vec![0.0; grid];
    let mut weights = vec![0.0; grid];
    for j in 0..grid {
        let omega = g.omega(j);
        if omega >= w1 && omega <= w2 {
            let m = g.magnitudes()[j];
            if !(m > 0.0) {
                return Err(Error::precondition(format!(
                    "|G| must be positive inside the band (zero at ω = {omega:.4})"
                )));
            }
            target[j] = 1.0 / m;
            weights[j] = 1.0;
        }
    }
    if weights.iter().filter(|w| **w > 0.0).count() < half_order + 1 {
        return Err(Error::precondition("too few grid points inside the band"));
    }
    design_ls_linear_phase(&target, &weights, half_order)
}

/// Linear-phase FIR that realizes the tabulated IRS magnitude at 8 kHz, fitted
/// over the whole band.
pub fn irs_filter(table: &IrsTable, half_order: usize) -> Result<FirFilter> {
    let g = table.response(DESIGN_GRID)?;
    let weights = vec![1.0; g.grid_size()];
    design_ls_linear_phase(g.magnitudes(), &weights, half_order)
}

fn hamming(n: usize, len: usize) -> f64 {
    if len == 1 {
        return 1.0;
    }
    0.54 - 0.46 * (2.0 * PI * n as f64 / (len - 1) as f64).cos()
}

/// Hamming-windowed sinc low-pass with unit DC gain. `num_taps` must be odd.
pub fn design_lowpass(num_taps: usize, cutoff_hz: f64, sample_rate: f64) -> FirFilter {
    assert!(num_taps % 2 == 1, "windowed-sinc designs use odd lengths");
    let fc = cutoff_hz / sample_rate;
    let mid = (num_taps / 2) as f64;
    let mut taps: Vec<f64> = (0..num_taps)
        .map(|n| {
            let t = n as f64 - mid;
            let sinc = if t == 0.0 {
                2.0 * fc
            } else {
                (2.0 * PI * fc * t).sin() / (PI * t)
            };
            sinc * hamming(n, num_taps)
        })
        .collect();
    let dc: f64 = taps.iter().sum();
    taps.iter_mut().for_each(|t| *t /= dc);
    symmetrize(&mut taps);
    FirFilter::linear_phase(taps).expect("windowed sinc is symmetric")
}

/// Spectral inversion of [`design_lowpass`].
pub fn design_highpass(num_taps: usize, cutoff_hz: f64, sample_rate: f64) -> FirFilter {
    let lp = design_lowpass(num_taps, cutoff_hz, sample_rate);
    let mut taps: Vec<f64> = lp.taps().iter().map(|t| -t).collect();
    taps[num_taps / 2] += 1.0;
    FirFilter::linear_phase(taps).expect("symmetric")
}

/// Band-stop between `lo_hz` and `hi_hz` (the 6 dB edges).
pub fn design_bandstop(num_taps: usize, lo_hz: f64, hi_hz: f64, sample_rate: f64) -> FirFilter {
    let lp = design_lowpass(num_taps, lo_hz, sample_rate);
    let hp = design_highpass(num_taps, hi_hz, sample_rate);
    let taps = lp.taps().iter().zip(hp.taps()).map(|(a, b)| a + b).collect();
    FirFilter::linear_phase(taps).expect("symmetric")
}

fn symmetrize(taps: &mut [f64]) {
    let n = taps.len();
    for i in 0..n / 2 {
        let avg = 0.5 * (taps[i] + taps[n - 1 - i]);
        taps[i] = avg;
        taps[n - 1 - i] = avg;
    }
}

/// Tap count of the 3500 Hz low-pass (also the upsampling interpolator).
pub const LOWPASS_3500_TAPS: usize = 127;
/// Tap count of the 3500 Hz high-pass and of the 3500–4500 Hz band-stop.
pub const HIGHBAND_SHAPE_TAPS: usize = 129;
/// Tap count of the 200 Hz low-pass.
pub const LOWPASS_200_TAPS: usize = 257;

/// The fixed 16 kHz filters used by the pipeline.
#[derive(Debug, Clone)]
pub struct BandShapeFilters {
    pub highpass_3500: FirFilter,
    /// Attenuates 3500–4500 Hz by at least 30 dB.
    pub notch_3500_4500: FirFilter,
    pub lowpass_200: FirFilter,
    pub lowpass_3500: FirFilter,
}

pub fn make_bandshape_filters() -> BandShapeFilters {
    let fs = 16000.0;
    BandShapeFilters {
        highpass_3500: design_highpass(HIGHBAND_SHAPE_TAPS, 3500.0, fs),
        // 6 dB edges pulled out by ~250 Hz so the Hamming stopband covers the
        // whole 3500–4500 Hz gap.
        notch_3500_4500: design_bandstop(HIGHBAND_SHAPE_TAPS, 3250.0, 4750.0, fs),
        lowpass_200: design_lowpass(LOWPASS_200_TAPS, 200.0, fs),
        lowpass_3500: design_lowpass(LOWPASS_3500_TAPS, 3500.0, fs),
    }
}
