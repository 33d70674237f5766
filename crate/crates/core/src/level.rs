//! Level descriptions and the versioned level file format.

use serde::{Deserialize, Serialize};

use crate::gradient::Level2Spec;
use crate::knn::Level3Spec;
use crate::outcome::OutcomeContent;
use crate::supervised::Level1Spec;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LevelSpec {
    Supervised(Level1Spec),
    Gradient(Level2Spec),
    Knn(Level3Spec),
}

impl LevelSpec {
    pub fn level(&self) -> u8 {
        match self {
            LevelSpec::Supervised(_) => 1,
            LevelSpec::Gradient(_) => 2,
            LevelSpec::Knn(_) => 3,
        }
    }

    pub fn outcome(&self) -> &OutcomeContent {
        match self {
            LevelSpec::Supervised(s) => &s.outcome,
            LevelSpec::Gradient(s) => &s.outcome,
            LevelSpec::Knn(s) => &s.outcome,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("malformed document: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported format version {0} (expected {FORMAT_VERSION})")]
    Version(u32),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LevelFile {
    pub version: u32,
    pub spec: LevelSpec,
}

impl LevelFile {
    pub fn new(spec: LevelSpec) -> Self {
        Self { version: FORMAT_VERSION, spec }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("level specs serialize");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, FormatError> {
        let file: LevelFile = serde_json::from_str(text)?;
        if file.version != FORMAT_VERSION {
            return Err(FormatError::Version(file.version));
        }
        Ok(file)
    }
}
