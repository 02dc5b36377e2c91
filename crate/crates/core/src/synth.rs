//! Seeded formant synthesizer for reproducible training and test material.
//!
//! Voiced segments drive a cascade of five resonators with a glottal pulse
//! train; fricatives drive one or two resonators with white noise. Speakers
//! differ by pitch and vocal-tract length. The same seed always yields the
//! same samples.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::audio_io::{write_wav, SampleRate, SignalBuffer};
use crate::error::Result;

const FS: f64 = 16000.0;
/// Samples between resonator coefficient updates.
const CONTROL_STEP: usize = 32;

/// Formant frequencies and bandwidths (Hz) of a few vowels.
pub const VOWELS: [[(f64, f64); 5]; 6] = [
    // a
    [(730.0, 90.0), (1090.0, 110.0), (2440.0, 160.0), (3400.0, 250.0), (4500.0, 300.0)],
    // i
    [(270.0, 60.0), (2290.0, 100.0), (3010.0, 160.0), (3700.0, 250.0), (4800.0, 300.0)],
    // u
    [(300.0, 60.0), (870.0, 90.0), (2240.0, 150.0), (3300.0, 250.0), (4400.0, 300.0)],
    // e
    [(530.0, 70.0), (1840.0, 100.0), (2480.0, 160.0), (3500.0, 250.0), (4600.0, 300.0)],
    // o
    [(570.0, 80.0), (840.0, 90.0), (2410.0, 160.0), (3350.0, 250.0), (4450.0, 300.0)],
    // schwa
    [(500.0, 80.0), (1500.0, 100.0), (2500.0, 160.0), (3500.0, 250.0), (4500.0, 300.0)],
];

/// Noise-shaping resonances of a few fricatives: (centre, bandwidth, gain).
const FRICATIVES: [[(f64, f64, f64); 2]; 3] = [
    // s
    [(5500.0, 1200.0, 1.0), (7200.0, 900.0, 0.5)],
    // sh
    [(3000.0, 600.0, 0.8), (4800.0, 1500.0, 1.0)],
    // f
    [(2000.0, 4000.0, 0.5), (6000.0, 4000.0, 0.5)],
];

#[derive(Debug, Clone, Copy)]
struct Resonator {
    a: f64,
    b: f64,
    c: f64,
    y1: f64,
    y2: f64,
}

impl Resonator {
    fn new() -> Self {
        Self { a: 1.0, b: 0.0, c: 0.0, y1: 0.0, y2: 0.0 }
    }

    /// Unit gain at DC.
    fn tune(&mut self, f: f64, bw: f64) {
        let r = (-PI * bw / FS).exp();
        self.c = -r * r;
        self.b = 2.0 * r * (2.0 * PI * f / FS).cos();
        self.a = 1.0 - self.b - self.c;
    }

    /// Unit gain at the centre frequency instead.
    fn tune_peak(&mut self, f: f64, bw: f64) {
        self.tune(f, bw);
        let w = 2.0 * PI * f / FS;
        let (cr, ci) = (1.0 - self.b * w.cos() - self.c * (2.0 * w).cos(), self.b * w.sin() + self.c * (2.0 * w).sin());
        self.a = cr.hypot(ci);
    }

    fn step(&mut self, x: f64) -> f64 {
        let y = self.a * x + self.b * self.y1 + self.c * self.y2;
        self.y2 = self.y1;
        self.y1 = y;
        y
    }
}

#[derive(Debug, Clone, Copy)]
struct Speaker {
    f0: f64,
    tract_scale: f64,
}

#[derive(Debug, Clone, Copy)]
enum Segment {
    Vowel { index: usize, len: usize, loudness: f64 },
    Fricative { index: usize, len: usize, loudness: f64 },
    Pause { len: usize },
}

impl Segment {
    fn len(&self) -> usize {
        match *self {
            Segment::Vowel { len, .. } | Segment::Fricative { len, .. } | Segment::Pause { len } => len,
        }
    }
}

/// Glottal source state: a smoothed pulse per period, tilted by two poles.
struct Glottis {
    phase: f64,
    lp1: f64,
    lp2: f64,
}

impl Glottis {
    fn step(&mut self, f0: f64, rng: &mut ChaCha8Rng) -> f64 {
        self.phase += f0 / FS;
        let pulse = if self.phase >= 1.0 {
            self.phase -= 1.0;
            1.0
        } else {
            0.0
        };
        let w: f64 = StandardNormal.sample(rng);
        let aspiration = 0.01 * w;
        self.lp1 = 0.9 * self.lp1 + pulse + aspiration;
        self.lp2 = 0.1 * self.lp2 + self.lp1;
        self.lp2
    }
}

/// `intonation` lets the pitch drift within each segment.
fn render(segments: &[Segment], speaker: Speaker, intonation: bool, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let total: usize = segments.iter().map(Segment::len).sum();
    let mut out = Vec::with_capacity(total);
    let mut glottis = Glottis { phase: 0.0, lp1: 0.0, lp2: 0.0 };
    let mut tract = [Resonator::new(); 5];
    let mut noise_shapers = [Resonator::new(); 2];
    let mut current = VOWELS[5];
    let mut gain = 0.0;
    let mut prev_out = 0.0;
    let mut vib_phase: f64 = rng.gen_range(0.0..2.0 * PI);
    for seg in segments {
        let len = seg.len();
        let (target, target_gain) = match *seg {
            Segment::Vowel { index, loudness, .. } => (VOWELS[index], loudness),
            _ => (current, 0.0),
        };
        let (fric, fric_gain) = match *seg {
            Segment::Fricative { index, loudness, .. } => (Some(FRICATIVES[index]), loudness),
            _ => (None, 0.0),
        };
        if let Some(f) = fric {
            for (r, (fc, bw, _)) in noise_shapers.iter_mut().zip(f) {
                r.tune_peak(fc * speaker.tract_scale.sqrt(), bw);
            }
        }
        let start = current;
        let start_gain = gain;
        let glide = (len / 3).max(1);
        let f0_slope = if intonation { rng.gen_range(-0.15..0.1) } else { 0.0 };
        for n in 0..len {
            if n % CONTROL_STEP == 0 {
                let a = (n as f64 / glide as f64).min(1.0);
                for (k, r) in tract.iter_mut().enumerate() {
                    let f = (1.0 - a) * start[k].0 + a * target[k].0;
                    let bw = (1.0 - a) * start[k].1 + a * target[k].1;
                    r.tune(f * speaker.tract_scale, bw);
                }
                gain = (1.0 - a) * start_gain + a * target_gain;
            }
            vib_phase += 2.0 * PI * 5.0 / FS;
            let f0 = speaker.f0 * (1.0 + f0_slope * n as f64 / len as f64 + 0.02 * vib_phase.sin());
            let mut v = glottis.step(f0, rng) * gain;
            for r in tract.iter_mut() {
                v = r.step(v);
            }
            let mut s = v - prev_out;
            prev_out = v;
            if let Some(f) = fric {
                let ramp = (n.min(len - n) as f64 / 200.0).min(1.0);
                let w: f64 = StandardNormal.sample(rng);
                let shaped: f64 = noise_shapers.iter_mut().zip(f).map(|(r, (_, _, g))| g * r.step(w)).sum();
                s += fric_gain * ramp * shaped;
            }
            out.push(s);
        }
        if matches!(seg, Segment::Vowel { .. }) {
            current = target;
        }
    }
    out
}

fn normalize(mut x: Vec<f64>, peak: f64) -> Vec<f64> {
    let m = x.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if m > 0.0 {
        x.iter_mut().for_each(|v| *v *= peak / m);
    }
    x
}

fn random_speaker(rng: &mut ChaCha8Rng) -> Speaker {
    Speaker {
        f0: rng.gen_range(85.0..250.0),
        tract_scale: rng.gen_range(0.9..1.15),
    }
}

/// A wideband utterance of about `seconds` seconds: vowels, fricatives and
/// short pauses from one random speaker.
pub fn synth_utterance(seconds: f64, seed: u64) -> SignalBuffer {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let speaker = random_speaker(&mut rng);
    let target = (seconds * FS) as usize;
    let mut segments = Vec::new();
    let mut total = 0;
    while total < target {
        let roll: f64 = rng.gen();
        let seg = if roll < 0.7 {
            Segment::Vowel {
                index: rng.gen_range(0..VOWELS.len()),
                len: rng.gen_range(1600..4000),
                loudness: rng.gen_range(0.5..1.0),
            }
        } else if roll < 0.9 {
            Segment::Fricative {
                index: rng.gen_range(0..FRICATIVES.len()),
                len: rng.gen_range(1200..2400),
                loudness: rng.gen_range(0.02..0.06),
            }
        } else {
            Segment::Pause { len: rng.gen_range(800..2000) }
        };
        total += seg.len();
        segments.push(seg);
    }
    let mut x = normalize(render(&segments, speaker, true, &mut rng), 0.5);
    x.truncate(target);
    SignalBuffer::new(x, SampleRate::Wide).expect("synthesizer output is finite")
}

/// A steady vowel from `VOWELS[index]` at fundamental `f0_hz`.
pub fn synth_vowel(index: usize, f0_hz: f64, seconds: f64, seed: u64) -> SignalBuffer {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let len = (seconds * FS) as usize;
    let seg = [Segment::Vowel { index: index % VOWELS.len(), len, loudness: 1.0 }];
    let speaker = Speaker { f0: f0_hz, tract_scale: 1.0 };
    let x = normalize(render(&seg, speaker, false, &mut rng), 0.5);
    SignalBuffer::new(x, SampleRate::Wide).expect("synthesizer output is finite")
}

/// Writes `files` utterances named `synth_000.wav`… into `dir`.
pub fn write_corpus(dir: impl AsRef<Path>, files: usize, seconds: f64, seed: u64) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir)?;
    (0..files)
        .map(|i| {
            let path = dir.join(format!("synth_{i:03}.wav"));
            write_wav(&path, &synth_utterance(seconds, seed.wrapping_add(i as u64)))?;
            Ok(path)
        })
        .collect()
}
