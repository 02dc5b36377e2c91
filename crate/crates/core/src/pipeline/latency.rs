//! Algorithmic lookahead of the extension pipeline.
//!
//! Output is produced one hop block at a time. A stage's lookahead is the
//! number of 16 kHz input samples it needs past the end of the block being
//! finalized. Stages in a path add up; the two band paths run in parallel,
//! so the system lookahead is the larger path total.

use crate::audio_io::interpolation_filter;
use crate::error::{Error, Result};
use crate::filters::{BandShapeFilters, FirFilter};
use crate::lpc::AnalysisConfig;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stage {
    pub name: &'static str,
    pub lookahead: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatencyBudget {
    pub high: Vec<Stage>,
    pub low: Vec<Stage>,
    /// Two analysis frames.
    pub limit: usize,
}

impl LatencyBudget {
    pub fn new(cfg: &AnalysisConfig, filters: &BandShapeFilters, inverse_irs: Option<&FirFilter>) -> Self {
        let mut front = vec![Stage {
            name: "2x interpolation filter",
            lookahead: interpolation_filter().group_delay(),
        }];
        if let Some(f) = inverse_irs {
            front.push(Stage {
                name: "inverse IRS equalizer (8 kHz)",
                lookahead: 2 * f.group_delay(),
            });
        }
        let analysis = (cfg.frame_len - cfg.hop) / 2;
        let mut high = front.clone();
        high.extend([
            Stage { name: "centred analysis window", lookahead: analysis },
            Stage { name: "envelope smoothing (next frame)", lookahead: cfg.hop },
            Stage { name: "3500 Hz high-pass", lookahead: filters.highpass_3500.group_delay() },
            Stage { name: "3500-4500 Hz notch", lookahead: filters.notch_3500_4500.group_delay() },
        ]);
        // The next frame's analysis window and its phase low-pass are read in
        // parallel; only the longer counts.
        let mut low = front;
        low.extend([
            Stage { name: "overlap-add (next frame)", lookahead: cfg.hop },
            Stage {
                name: "phase-extraction low-pass or analysis window",
                lookahead: filters.lowpass_200.group_delay().max(analysis),
            },
            Stage { name: "final 200 Hz low-pass", lookahead: filters.lowpass_200.group_delay() },
        ]);
        Self {
            high,
            low,
            limit: 2 * cfg.frame_len,
        }
    }

    pub fn high_total(&self) -> usize {
        self.high.iter().map(|s| s.lookahead).sum()
    }

    pub fn low_total(&self) -> usize {
        self.low.iter().map(|s| s.lookahead).sum()
    }

    pub fn total(&self) -> usize {
        self.high_total().max(self.low_total())
    }

    pub fn millis(&self) -> f64 {
        self.total() as f64 / 16.0
    }

    pub fn check(&self) -> Result<()> {
        if self.total() > self.limit {
            return Err(Error::Config(format!(
                "pipeline lookahead {} samples exceeds the {}-sample budget",
                self.total(),
                self.limit
            )));
        }
        Ok(())
    }

    pub fn describe(&self) -> String {
        let mut s = String::new();
        for (label, path, total) in [("high band", &self.high, self.high_total()), ("low band", &self.low, self.low_total())] {
            s.push_str(&format!("{label}: {total} samples\n"));
            for st in path {
                s.push_str(&format!("  {:>4}  {}\n", st.lookahead, st.name));
            }
        }
        s.push_str(&format!(
            "total lookahead: {} samples ({:.1} ms), limit {}\n",
            self.total(),
            self.millis(),
            self.limit
        ));
        s
    }
}
