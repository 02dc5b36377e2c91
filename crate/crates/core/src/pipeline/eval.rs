//! Objective scores of a trained bundle against wideband truth.

use std::io::Write;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::predictors::ModelBundle;
use crate::spectrum::{idct, spectral_distortion_points, HIGH_BAND, HIGH_CEPSTRUM_LEN};

use super::config::PipelineConfig;
use super::corpus::{list_wavs, CorpusFrontend, PairedFrame};
use super::train::{quadrature_mean, Target};

/// First grid point of the scored band (3500 Hz).
pub const SCORED_FROM: usize = 28;

/// Where the high-band cepstrum comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HighSource {
    Model,
    /// The true truncated cepstrum: the DCT truncation floor.
    Oracle,
    /// All-zero cepstrum: a flat high band at the telephone-band mean level.
    Zero,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrameScore {
    pub file: String,
    pub frame: usize,
    pub sd_high: f64,
    pub low_error: f64,
    /// High-band SD after residual VQ correction, when the bundle has one.
    pub sd_high_vq: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct EvalReport {
    pub frames: Vec<FrameScore>,
    pub files: usize,
    pub sd_high: f64,
    pub low_error: f64,
    pub sd_high_vq: Option<f64>,
    pub seconds: f64,
}

/// SD in dB between `W` and `idct(c) + reference` over 3500–8000 Hz.
pub fn high_band_sd(wide_log_power: &[f64], reference: f64, c: &[f64]) -> Result<f64> {
    let lo = *HIGH_BAND.start();
    let est: Vec<f64> = idct(c, HIGH_BAND.count()).into_iter().map(|v| v + reference).collect();
    spectral_distortion_points(&est[SCORED_FROM - lo..], &wide_log_power[SCORED_FROM..=*HIGH_BAND.end()])
}

/// Scores one paired frame.
pub fn score_frame(frame: &PairedFrame, bundle: &ModelBundle, source: HighSource, file: &str) -> Result<FrameScore> {
    let t = &frame.targets;
    let w = t.wide_env.log_power();
    let predicted = bundle.high.predict(&frame.analysis.features);
    let c = match source {
        HighSource::Model => predicted.clone(),
        HighSource::Oracle => t.high.clone(),
        HighSource::Zero => vec![0.0; HIGH_CEPSTRUM_LEN],
    };
    let sd_high = high_band_sd(w, t.reference, &c)?;
    let sd_high_vq = match (&bundle.residual_vq, source) {
        (Some(vq), HighSource::Model) => Some(high_band_sd(w, t.reference, &vq.correct(&predicted, &t.high))?),
        _ => None,
    };
    let low_error = Target::Low.frame_error_db(&bundle.low.predict(&frame.analysis.features), &t.low);
    Ok(FrameScore {
        file: file.to_string(),
        frame: frame.index,
        sd_high,
        low_error,
        sd_high_vq,
    })
}

impl EvalReport {
    pub fn from_frames(frames: Vec<FrameScore>, files: usize, seconds: f64) -> Self {
        let sd_high_vq = if !frames.is_empty() && frames.iter().all(|f| f.sd_high_vq.is_some()) {
            Some(quadrature_mean(frames.iter().filter_map(|f| f.sd_high_vq)))
        } else {
            None
        };
        Self {
            sd_high: quadrature_mean(frames.iter().map(|f| f.sd_high)),
            low_error: quadrature_mean(frames.iter().map(|f| f.low_error)),
            sd_high_vq,
            files,
            seconds,
            frames,
        }
    }

    pub fn to_text(&self) -> String {
        let mut s = format!(
            "files: {}\nframes: {}\nhigh band SD (3500-8000 Hz): {:.4} dB\nlow band log-amplitude error: {:.4} dB\n",
            self.files,
            self.frames.len(),
            self.sd_high,
            self.low_error
        );
        if let Some(v) = self.sd_high_vq {
            s.push_str(&format!("high band SD with residual VQ: {v:.4} dB\n"));
        }
        s.push_str(&format!("evaluation time: {:.2} s\n", self.seconds));
        s
    }

    /// One line per frame: `file,frame,sd_high_db,low_error_db,sd_high_vq_db`.
    pub fn write_csv(&self, mut w: impl Write) -> Result<()> {
        writeln!(w, "file,frame,sd_high_db,low_error_db,sd_high_vq_db")?;
        for f in &self.frames {
            let vq = f.sd_high_vq.map(|v| format!("{v:?}")).unwrap_or_default();
            writeln!(w, "{},{},{:?},{:?},{}", f.file, f.frame, f.sd_high, f.low_error, vq)?;
        }
        Ok(())
    }

    pub fn save(&self, report: Option<&Path>, frames: Option<&Path>) -> Result<()> {
        if let Some(p) = report {
            std::fs::write(p, self.to_text())?;
        }
        if let Some(p) = frames {
            self.write_csv(std::io::BufWriter::new(std::fs::File::create(p)?))?;
        }
        Ok(())
    }
}

/// Scores every non-silent frame of every file in `corpus_dir`.
pub fn evaluate(
    corpus_dir: impl AsRef<Path>,
    bundle: &ModelBundle,
    cfg: &PipelineConfig,
    source: HighSource,
) -> Result<EvalReport> {
    let start = Instant::now();
    bundle.validate()?;
    let mut cfg = cfg.clone();
    cfg.analysis = bundle.analysis.clone();
    let files = list_wavs(corpus_dir)?;
    let front = CorpusFrontend::new(&cfg)?;
    let per_file = files
        .par_iter()
        .map(|p| {
            let name = p.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
            front
                .pair_file(p)?
                .iter()
                .map(|f| score_frame(f, bundle, source, &name))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let frames: Vec<FrameScore> = per_file.into_iter().flatten().collect();
    if frames.is_empty() {
        return Err(Error::precondition("the corpus has no non-silent frames"));
    }
    Ok(EvalReport::from_frames(frames, files.len(), start.elapsed().as_secs_f64()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn score(sd: f64, low: f64) -> FrameScore {
        FrameScore { file: "a.wav".into(), frame: 0, sd_high: sd, low_error: low, sd_high_vq: None }
    }

    #[test]
    fn aggregate_is_quadrature_mean() {
        let r = EvalReport::from_frames(vec![score(3.0, 1.0), score(4.0, 1.0)], 1, 0.0);
        assert!((r.sd_high - 12.5f64.sqrt()).abs() < 1e-12);
        assert_eq!(r.sd_high_vq, None);
    }

    #[test]
    fn csv_has_header_and_rows() {
        let r = EvalReport::from_frames(vec![score(1.5, 0.5)], 1, 0.0);
        let mut out = Vec::new();
        r.write_csv(&mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert_eq!(text.lines().count(), 2);
        assert_eq!(text.lines().nth(1).unwrap(), "a.wav,0,1.5,0.5,");
    }

    #[test]
    fn flat_truth_scores_zero_for_zero_cepstrum() {
        let w = vec![-2.0; 64];
        assert!(high_band_sd(&w, -2.0, &[0.0; 8]).unwrap() < 1e-12);
        assert!(high_band_sd(&w, -1.0, &[0.0; 8]).unwrap() > 4.0);
    }
}
