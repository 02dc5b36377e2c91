//! Pipeline settings and their flat `key = value` file format.

use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::lpc::AnalysisConfig;
use crate::predictors::{PredictorKind, TrainSchedule};

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub analysis: AnalysisConfig,
    pub high_predictor: PredictorKind,
    pub low_predictor: PredictorKind,
    pub hidden_high: Vec<usize>,
    pub hidden_low: Vec<usize>,
    /// Codebook size is `2^codebook_bits`.
    pub codebook_bits: u32,
    /// Residual VQ trained alongside the high-band predictor when set.
    pub residual_vq_bits: Option<u32>,
    pub highband_attenuation_db: f64,
    pub lowband_gain: f64,
    pub inverse_irs: bool,
    pub inverse_irs_half_order: usize,
    /// IRS magnitude table; the built-in one when unset.
    pub irs_table: Option<PathBuf>,
    /// Frames quieter than this RMS are skipped in training and left
    /// unextended at inference.
    pub silence_rms: f64,
    pub validation_fraction: f64,
    pub schedule: TrainSchedule,
    /// Attempts at an MLP that beats regression before giving up.
    pub mlp_attempts: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            analysis: AnalysisConfig::default(),
            high_predictor: PredictorKind::Mlp,
            low_predictor: PredictorKind::Mlp,
            hidden_high: vec![30, 30],
            hidden_low: vec![10],
            codebook_bits: 8,
            residual_vq_bits: None,
            highband_attenuation_db: 6.0,
            lowband_gain: 1.0,
            inverse_irs: true,
            inverse_irs_half_order: crate::filters::INVERSE_IRS_HALF_ORDER,
            irs_table: None,
            silence_rms: 1e-4,
            validation_fraction: 0.2,
            schedule: TrainSchedule::default(),
            mlp_attempts: 4,
        }
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("'{key}': cannot parse '{value}'")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value.to_ascii_lowercase().as_str() {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => Err(Error::Config(format!("'{key}': expected a boolean, got '{value}'"))),
    }
}

/// `30,30` → `[30, 30]`; an empty string means no hidden layer.
pub fn parse_layers(value: &str) -> Result<Vec<usize>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| match s.parse::<usize>() {
            Ok(n) if n > 0 => Ok(n),
            _ => Err(Error::Config(format!("bad hidden layer size '{s}'"))),
        })
        .collect()
}

impl PipelineConfig {
    /// Sets one field by name. Keys are the field names of this struct, of
    /// [`AnalysisConfig`] and of [`TrainSchedule`].
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let a = &mut self.analysis;
        let s = &mut self.schedule;
        match key {
            "frame_len" => a.frame_len = parse_num(key, value)?,
            "hop" => a.hop = parse_num(key, value)?,
            "lpc_order_wide" => a.lpc_order_wide = parse_num(key, value)?,
            "lpc_order_tel" => a.lpc_order_tel = parse_num(key, value)?,
            "preemph_alpha" => a.preemph_alpha = parse_num(key, value)?,
            "noise_floor_alpha" => a.noise_floor_alpha = parse_num(key, value)?,
            "lag_beta" => a.lag_beta = parse_num(key, value)?,
            "fft_size" => a.fft_size = parse_num(key, value)?,
            "pitch_min" => a.pitch_min = parse_num(key, value)?,
            "pitch_max" => a.pitch_max = parse_num(key, value)?,
            "anti_doubling_theta" => a.anti_doubling_theta = parse_num(key, value)?,
            "high_predictor" => self.high_predictor = value.parse()?,
            "low_predictor" => self.low_predictor = value.parse()?,
            "hidden_high" => self.hidden_high = parse_layers(value)?,
            "hidden_low" => self.hidden_low = parse_layers(value)?,
            "codebook_bits" => self.codebook_bits = parse_num(key, value)?,
            "residual_vq_bits" => {
                self.residual_vq_bits = match value {
                    "" | "none" | "off" => None,
                    v => Some(parse_num(key, v)?),
                }
            }
            "highband_attenuation_db" => self.highband_attenuation_db = parse_num(key, value)?,
            "lowband_gain" => self.lowband_gain = parse_num(key, value)?,
            "inverse_irs" => self.inverse_irs = parse_bool(key, value)?,
            "inverse_irs_half_order" => self.inverse_irs_half_order = parse_num(key, value)?,
            "irs_table" => self.irs_table = Some(PathBuf::from(value)),
            "silence_rms" => self.silence_rms = parse_num(key, value)?,
            "validation_fraction" => self.validation_fraction = parse_num(key, value)?,
            "mlp_attempts" => self.mlp_attempts = parse_num(key, value)?,
            "batch_size" => s.batch_size = parse_num(key, value)?,
            "max_epochs" => s.max_epochs = parse_num(key, value)?,
            "patience" => s.patience = parse_num(key, value)?,
            "eta_init" => s.eta_init = parse_num(key, value)?,
            "eta_min" => s.eta_min = parse_num(key, value)?,
            "eta_max" => s.eta_max = parse_num(key, value)?,
            "kappa" => s.kappa = parse_num(key, value)?,
            "phi" => s.phi = parse_num(key, value)?,
            "theta" => s.theta = parse_num(key, value)?,
            "seed" => s.seed = parse_num(key, value)?,
            _ => return Err(Error::Config(format!("unknown configuration key '{key}'"))),
        }
        Ok(())
    }

    /// Applies `key = value` lines over `self`. `#` starts a comment.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", i + 1)))?;
            self.set(k.trim(), v.trim().trim_matches('"'))?;
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        cfg.apply_text(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn validate(&self) -> Result<()> {
        self.analysis.validate()?;
        if !(2..=11).contains(&self.codebook_bits) {
            return Err(Error::Config("codebook_bits must be in 2..=11 (4 to 2048 cells)".into()));
        }
        if let Some(b) = self.residual_vq_bits {
            if !(4..=12).contains(&b) {
                return Err(Error::Config("residual_vq_bits must be in 4..=12".into()));
            }
        }
        if !(0.0..0.9).contains(&self.validation_fraction) {
            return Err(Error::Config("validation_fraction must be in [0, 0.9)".into()));
        }
        if !(self.silence_rms >= 0.0) || !self.highband_attenuation_db.is_finite() || !self.lowband_gain.is_finite() {
            return Err(Error::Config("gains and thresholds must be finite and non-negative".into()));
        }
        if self.mlp_attempts == 0 || self.schedule.batch_size == 0 {
            return Err(Error::Config("mlp_attempts and batch_size must be positive".into()));
        }
        if let Some(p) = &self.irs_table {
            if !p.exists() {
                return Err(Error::Config(format!("IRS table {} does not exist", p.display())));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_keys_comments_and_layers() {
        let cfg = PipelineConfig::parse(
            "# tuned\nhidden_high = 20, 10\nhigh_predictor = codebook\ninverse_irs = off\nseed=7 # trailing\n",
        )
        .unwrap();
        assert_eq!(cfg.hidden_high, vec![20, 10]);
        assert_eq!(cfg.high_predictor, PredictorKind::Codebook);
        assert!(!cfg.inverse_irs);
        assert_eq!(cfg.schedule.seed, 7);
    }

    #[test]
    fn unknown_key_and_bad_value_are_config_errors() {
        assert!(matches!(PipelineConfig::parse("colour = red"), Err(Error::Config(_))));
        assert!(matches!(PipelineConfig::parse("hop = many"), Err(Error::Config(_))));
        assert!(matches!(PipelineConfig::parse("just text"), Err(Error::Config(_))));
        assert!(matches!(PipelineConfig::parse("codebook_bits = 12"), Err(Error::Config(_))));
    }

    #[test]
    fn analysis_invariants_are_checked() {
        assert!(matches!(PipelineConfig::parse("hop = 100"), Err(Error::Config(_))));
    }

    #[test]
    fn missing_irs_table_is_rejected() {
        assert!(PipelineConfig::parse("irs_table = /no/such/table.txt").is_err());
    }
}
