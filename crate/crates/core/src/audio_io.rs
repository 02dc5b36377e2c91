//! Mono 16-bit PCM WAV input/output and the 8 kHz ↔ 16 kHz rate changes.

use std::path::Path;

use crate::error::{Error, Result};
use crate::filters::{design_lowpass, FirFilter, LOWPASS_3500_TAPS};

/// The two sampling rates the toolkit works at.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum SampleRate {
    /// 8 kHz telephone band.
    Narrow,
    /// 16 kHz wideband.
    Wide,
}

impl SampleRate {
    pub fn hz(self) -> u32 {
        match self {
            SampleRate::Narrow => 8000,
            SampleRate::Wide => 16000,
        }
    }

    pub fn from_hz(hz: u32) -> Result<Self> {
        match hz {
            8000 => Ok(SampleRate::Narrow),
            16000 => Ok(SampleRate::Wide),
            other => Err(Error::UnsupportedFormat(format!(
                "sample rate {other} Hz (only 8000 and 16000 are supported)"
            ))),
        }
    }
}

/// Mono audio normalized to `[-1, 1]`, tagged with its sample rate.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalBuffer {
    samples: Vec<f64>,
    sample_rate: SampleRate,
}

impl SignalBuffer {
    pub fn new(samples: Vec<f64>, sample_rate: SampleRate) -> Result<Self> {
        if let Some(i) = samples.iter().position(|s| !s.is_finite()) {
            return Err(Error::precondition(format!("sample {i} is not finite")));
        }
        Ok(Self {
            samples,
            sample_rate,
        })
    }

    pub fn silence(len: usize, sample_rate: SampleRate) -> Self {
        Self {
            samples: vec![0.0; len],
            sample_rate,
        }
    }

    pub(crate) fn from_parts_unchecked(samples: Vec<f64>, sample_rate: SampleRate) -> Self {
        debug_assert!(samples.iter().all(|s| s.is_finite()));
        Self {
            samples,
            sample_rate,
        }
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn sample_rate(&self) -> SampleRate {
        self.sample_rate
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_secs(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate.hz() as f64
    }
}

fn map_hound(e: hound::Error) -> Error {
    match e {
        hound::Error::IoError(io) => Error::Io(io),
        hound::Error::FormatError(msg) => Error::Format(msg.to_string()),
        hound::Error::Unsupported => Error::UnsupportedFormat("unsupported WAV encoding".into()),
        other => Error::Format(other.to_string()),
    }
}

/// Reads a mono 16-bit PCM WAV file; samples are scaled by `1/32768`.
pub fn read_wav(path: impl AsRef<Path>) -> Result<SignalBuffer> {
    let reader = hound::WavReader::open(path).map_err(map_hound)?;
    let spec = reader.spec();
    if spec.channels != 1 {
        return Err(Error::UnsupportedFormat(format!(
            "{} channels (mono required)",
            spec.channels
        )));
    }
    if spec.sample_format != hound::SampleFormat::Int || spec.bits_per_sample != 16 {
        return Err(Error::UnsupportedFormat(format!(
            "{:?} {}-bit samples (16-bit PCM required)",
            spec.sample_format, spec.bits_per_sample
        )));
    }
    let rate = SampleRate::from_hz(spec.sample_rate)?;
    let samples = reader
        .into_samples::<i16>()
        .map(|s| s.map(|v| v as f64 / 32768.0))
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(map_hound)?;
    Ok(SignalBuffer::from_parts_unchecked(samples, rate))
}

/// Quantizes one sample: clamp to `[-1, 1 - 2^-15]`, scale by 32768, round.
pub fn to_pcm16(x: f64) -> i16 {
    let clamped = x.clamp(-1.0, 1.0 - 1.0 / 32768.0);
    (clamped * 32768.0).round() as i16
}

pub fn write_wav(path: impl AsRef<Path>, signal: &SignalBuffer) -> Result<()> {
    let spec = hound::WavSpec {
        channels: 1,
        sample_rate: signal.sample_rate.hz(),
        bits_per_sample: 16,
        sample_format: hound::SampleFormat::Int,
    };
    let mut writer = hound::WavWriter::create(path, spec).map_err(map_hound)?;
    for &s in &signal.samples {
        writer.write_sample(to_pcm16(s)).map_err(map_hound)?;
    }
    writer.finalize().map_err(map_hound)
}

/// The interpolation low-pass shared by [`upsample_2x`] and the telephone
/// band-limiter: 127-tap Hamming windowed sinc, 3500 Hz cutoff at 16 kHz.
pub fn interpolation_filter() -> FirFilter {
    design_lowpass(LOWPASS_3500_TAPS, 3500.0, 16000.0)
}

/// 8 kHz → 16 kHz: zero insertion with gain 2, then the linear-phase
/// interpolation low-pass with its 63-sample delay removed.
pub fn upsample_2x(signal: &SignalBuffer) -> Result<SignalBuffer> {
    if signal.sample_rate != SampleRate::Narrow {
        return Err(Error::precondition("upsample_2x expects an 8 kHz signal"));
    }
    let mut stuffed = vec![0.0; 2 * signal.len()];
    for (i, &s) in signal.samples.iter().enumerate() {
        stuffed[2 * i] = 2.0 * s;
    }
    let out = interpolation_filter().filter(&stuffed, true);
    Ok(SignalBuffer::from_parts_unchecked(out, SampleRate::Wide))
}

/// 16 kHz → 8 kHz: 3500 Hz anti-alias low-pass, then every other sample.
pub fn downsample_2x(signal: &SignalBuffer) -> Result<SignalBuffer> {
    if signal.sample_rate != SampleRate::Wide {
        return Err(Error::precondition("downsample_2x expects a 16 kHz signal"));
    }
    let filtered = interpolation_filter().filter(&signal.samples, true);
    let out = filtered.into_iter().step_by(2).collect();
    Ok(SignalBuffer::from_parts_unchecked(out, SampleRate::Narrow))
}
