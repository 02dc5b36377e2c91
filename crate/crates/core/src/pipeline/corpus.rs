//! Wideband corpora: listing, telephone simulation and per-frame pairing.

use std::path::{Path, PathBuf};

use crate::audio_io::{read_wav, SampleRate, SignalBuffer};
use crate::error::{Error, Result};
use crate::features::TrainingRow;
use crate::filters::{irs_filter, make_bandshape_filters, BandShapeFilters, FirFilter, IRS_FILTER_HALF_ORDER};

use super::analysis::{analyze_telephone, narrowband_from_wide, wideband_targets, FrameAnalysis, FrameTargets};
use super::config::PipelineConfig;
use super::extend::{inverse_irs_filter, irs_table};

/// The `.wav` files of `dir`, sorted by name.
pub fn list_wavs(dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| Error::precondition(format!("cannot list corpus {}: {e}", dir.display())))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x.eq_ignore_ascii_case("wav")))
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(Error::precondition(format!("no .wav files in {}", dir.display())));
    }
    Ok(files)
}

/// One analysed frame with its wideband truth.
#[derive(Debug, Clone)]
pub struct PairedFrame {
    pub index: usize,
    pub analysis: FrameAnalysis,
    pub targets: FrameTargets,
}

impl PairedFrame {
    pub fn training_row(&self) -> Option<TrainingRow> {
        let mut high_target = [0.0; crate::spectrum::HIGH_CEPSTRUM_LEN];
        if self.targets.high.len() != high_target.len() {
            return None;
        }
        high_target.copy_from_slice(&self.targets.high);
        let row = TrainingRow {
            features: self.analysis.features.clone(),
            high_target,
            low_target: self.targets.low,
        };
        let finite = row.features.to_array().iter().chain(&row.high_target).chain(&row.low_target).all(|v| v.is_finite());
        finite.then_some(row)
    }
}

/// Filters needed to turn wideband material into telephone/target pairs.
pub struct CorpusFrontend {
    pub cfg: PipelineConfig,
    pub irs: FirFilter,
    pub inverse_irs: Option<FirFilter>,
    pub filters: BandShapeFilters,
}

impl CorpusFrontend {
    pub fn new(cfg: &PipelineConfig) -> Result<Self> {
        Ok(Self {
            irs: irs_filter(&irs_table(cfg)?, IRS_FILTER_HALF_ORDER)?,
            inverse_irs: inverse_irs_filter(cfg)?,
            filters: make_bandshape_filters(),
            cfg: cfg.clone(),
        })
    }

    /// Non-silent frames of a 16 kHz signal, paired with their targets.
    pub fn pair(&self, wide: &SignalBuffer) -> Result<Vec<PairedFrame>> {
        if wide.sample_rate() != SampleRate::Wide {
            return Err(Error::precondition(format!(
                "corpus files must be 16 kHz, got {} Hz",
                wide.sample_rate().hz()
            )));
        }
        let tel = narrowband_from_wide(wide, &self.irs)?;
        let analysis = analyze_telephone(&tel, &self.cfg.analysis, self.inverse_irs.as_ref(), self.cfg.silence_rms)?;
        let targets = wideband_targets(wide.samples(), &analysis, &self.cfg.analysis, &self.filters.lowpass_200)?;
        Ok(analysis
            .frames
            .into_iter()
            .zip(targets)
            .enumerate()
            .filter(|(_, (a, _))| !a.silent)
            .map(|(index, (analysis, targets))| PairedFrame { index, analysis, targets })
            .collect())
    }

    pub fn pair_file(&self, path: &Path) -> Result<Vec<PairedFrame>> {
        self.pair(&read_wav(path)?)
    }

    pub fn rows(&self, wide: &SignalBuffer) -> Result<Vec<TrainingRow>> {
        Ok(self.pair(wide)?.iter().filter_map(PairedFrame::training_row).collect())
    }
}
