//! Model bundle files (`.bxm`): JSON with a format version and a SHA-256 of
//! the content.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{Predictor, ResidualVq};
use crate::error::{Error, Result};
use crate::lpc::AnalysisConfig;

pub const FORMAT_VERSION: u32 = 1;
pub const BUNDLE_EXTENSION: &str = "bxm";

/// Everything `extend` needs besides the input signal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelBundle {
    pub analysis: AnalysisConfig,
    /// Predicts the 8 high-band cepstral coefficients.
    pub high: Predictor,
    /// Predicts the 2 normalized low-band harmonic amplitudes.
    pub low: Predictor,
    #[serde(default)]
    pub residual_vq: Option<ResidualVq>,
}

#[derive(Serialize, Deserialize)]
struct Envelope<T> {
    format_version: u32,
    content: T,
    checksum: String,
}

fn digest(content: &ModelBundle) -> Result<String> {
    let text = serde_json::to_string(content).map_err(|e| Error::Load(e.to_string()))?;
    Ok(hex::encode(Sha256::digest(text.as_bytes())))
}

impl ModelBundle {
    pub fn validate(&self) -> Result<()> {
        self.analysis.validate()?;
        self.high.validate()?;
        self.low.validate()?;
        if self.high.out_dim() != crate::spectrum::HIGH_CEPSTRUM_LEN {
            return Err(Error::Load(format!(
                "high-band predictor outputs {} values",
                self.high.out_dim()
            )));
        }
        if self.low.out_dim() != crate::features::LOW_TARGET_DIM {
            return Err(Error::Load(format!("low-band predictor outputs {} values", self.low.out_dim())));
        }
        if let Some(vq) = &self.residual_vq {
            if vq.codewords.len() != 1 << vq.bits
                || vq.codewords.iter().any(|c| c.len() != crate::spectrum::HIGH_CEPSTRUM_LEN)
            {
                return Err(Error::Load("residual VQ codebook is malformed".into()));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        let env = Envelope {
            format_version: FORMAT_VERSION,
            checksum: digest(self)?,
            content: self,
        };
        serde_json::to_string_pretty(&env).map_err(|e| Error::Load(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let head: serde_json::Value =
            serde_json::from_str(text).map_err(|e| Error::Load(format!("bundle is not valid JSON: {e}")))?;
        match head.get("format_version").and_then(serde_json::Value::as_u64) {
            Some(v) if v == FORMAT_VERSION as u64 => {}
            Some(v) => return Err(Error::Load(format!("unsupported bundle version {v}"))),
            None => return Err(Error::Load("bundle has no format_version".into())),
        }
        let env: Envelope<ModelBundle> =
            serde_json::from_value(head).map_err(|e| Error::Load(format!("malformed bundle: {e}")))?;
        if digest(&env.content)? != env.checksum {
            return Err(Error::Load("bundle checksum mismatch".into()));
        }
        env.content.validate()?;
        Ok(env.content)
    }
}

pub fn save_model(bundle: &ModelBundle, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, bundle.to_json()?)?;
    Ok(())
}

pub fn load_model(path: impl AsRef<Path>) -> Result<ModelBundle> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Load(format!("cannot read {}: {e}", path.display())))?;
    ModelBundle::from_json(&text)
}
