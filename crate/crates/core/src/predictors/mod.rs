//! Hetero-association from narrowband features to envelope parameters.
//!
//! Three engines share one calling convention: a [`Predictor`] masks the
//! feature vector, standardizes it with statistics frozen at training time,
//! and hands it to its model.

pub mod bundle;
pub mod codebook;
pub mod mlp;
pub mod regression;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{apply_mask, FeatureMask, FeatureScaler, FeatureVector};

pub use bundle::{load_model, save_model, ModelBundle, BUNDLE_EXTENSION, FORMAT_VERSION};
pub use codebook::{codebook_associate, lbg_train, AssociativeCodebook, LbgOutcome, ResidualVq};
pub use mlp::{mlp_train, Activation, MlpModel, TrainReport, TrainSchedule};
pub use regression::{regression_fit, RegressionFit, RegressionModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PredictorKind {
    Regression,
    Codebook,
    Mlp,
}

impl PredictorKind {
    pub fn mask(self) -> FeatureMask {
        match self {
            PredictorKind::Regression => FeatureMask::Regression,
            PredictorKind::Codebook => FeatureMask::Codebook,
            PredictorKind::Mlp => FeatureMask::Mlp,
        }
    }
}

impl std::str::FromStr for PredictorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "regression" | "linear" => Ok(Self::Regression),
            "codebook" | "vq" => Ok(Self::Codebook),
            "mlp" => Ok(Self::Mlp),
            other => Err(Error::Config(format!("unknown predictor kind '{other}'"))),
        }
    }
}

impl std::fmt::Display for PredictorKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            PredictorKind::Regression => "regression",
            PredictorKind::Codebook => "codebook",
            PredictorKind::Mlp => "mlp",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "lowercase")]
pub enum PredictorModel {
    Regression(RegressionModel),
    Codebook(AssociativeCodebook),
    Mlp(MlpModel),
}

impl PredictorModel {
    pub fn kind(&self) -> PredictorKind {
        match self {
            PredictorModel::Regression(_) => PredictorKind::Regression,
            PredictorModel::Codebook(_) => PredictorKind::Codebook,
            PredictorModel::Mlp(_) => PredictorKind::Mlp,
        }
    }

    pub fn in_dim(&self) -> usize {
        match self {
            PredictorModel::Regression(m) => m.in_dim(),
            PredictorModel::Codebook(m) => m.input_centroids.first().map_or(0, Vec::len),
            PredictorModel::Mlp(m) => m.in_dim(),
        }
    }

    pub fn out_dim(&self) -> usize {
        match self {
            PredictorModel::Regression(m) => m.out_dim(),
            PredictorModel::Codebook(m) => m.output_codewords.first().map_or(0, Vec::len),
            PredictorModel::Mlp(m) => m.out_dim(),
        }
    }

    pub fn predict(&self, x: &[f64]) -> Vec<f64> {
        match self {
            PredictorModel::Regression(m) => m.predict(x),
            PredictorModel::Codebook(m) => m.predict(x),
            PredictorModel::Mlp(m) => m.forward(x),
        }
    }
}

/// Mask, scaler and model travelling together.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Predictor {
    pub mask: FeatureMask,
    pub scaler: FeatureScaler,
    pub model: PredictorModel,
}

impl Predictor {
    pub fn new(mask: FeatureMask, scaler: FeatureScaler, model: PredictorModel) -> Result<Self> {
        let p = Self { mask, scaler, model };
        p.validate()?;
        Ok(p)
    }

    /// A regression predictor that always outputs zero.
    pub fn zero(out_dim: usize) -> Self {
        let mask = FeatureMask::Regression;
        Self {
            mask,
            scaler: FeatureScaler::identity(mask.dim()),
            model: PredictorModel::Regression(RegressionModel::zeros(out_dim, mask.dim())),
        }
    }

    pub fn kind(&self) -> PredictorKind {
        self.model.kind()
    }

    pub fn out_dim(&self) -> usize {
        self.model.out_dim()
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.mask.dim();
        if self.scaler.dim() != d || self.model.in_dim() != d {
            return Err(Error::Load(format!(
                "predictor dimensions disagree: mask {d}, scaler {}, model {}",
                self.scaler.dim(),
                self.model.in_dim()
            )));
        }
        if self.scaler.std.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
            return Err(Error::Load("scaler has non-positive deviations".into()));
        }
        if let PredictorModel::Codebook(cb) = &self.model {
            let m = cb.size();
            if !m.is_power_of_two() || m != cb.output_codewords.len() {
                return Err(Error::Load(format!("codebook of size {m} is malformed")));
            }
        }
        Ok(())
    }

    /// The masked, standardized input the model sees.
    pub fn prepare(&self, features: &FeatureVector) -> Vec<f64> {
        self.scaler.transform(&apply_mask(features, self.mask))
    }

    pub fn predict(&self, features: &FeatureVector) -> Vec<f64> {
        self.model.predict(&self.prepare(features))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_predictor_outputs_zero() {
        let p = Predictor::zero(8);
        let f = FeatureVector::from_slice(&[0.3; 17]).unwrap();
        assert_eq!(p.predict(&f), vec![0.0; 8]);
    }

    #[test]
    fn mismatched_scaler_is_rejected() {
        let model = PredictorModel::Mlp(MlpModel::zeros(&[16, 4, 8]).unwrap());
        let r = Predictor::new(FeatureMask::Mlp, FeatureScaler::identity(12), model);
        assert!(matches!(r, Err(Error::Load(_))));
    }

    #[test]
    fn kind_parses_case_insensitively() {
        assert_eq!("MLP".parse::<PredictorKind>().unwrap(), PredictorKind::Mlp);
        assert!("gmm".parse::<PredictorKind>().is_err());
    }
}
