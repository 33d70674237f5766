//! Likert questionnaire analytics: per-item mean and spread, demographic
//! shares, and correlations between factor scores.

pub mod dataset;
pub mod instrument;
pub mod report;
pub mod stats;

pub use dataset::{Participant, SurveyDataset};
pub use instrument::{DemographicKind, DemographicQuestion, Factor, Item, SurveyInstrument};
pub use report::{demographics, factor_scores, item_stats, report, Report, ReportOptions};
pub use stats::SdKind;


#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SurveyError {
    #[error("dataset has no participants")]
    Empty,
    #[error("unknown variable code {0:?}")]
    UnknownCode(String),
    #[error("item {code} is unanswered by participant {row}")]
    MissingResponses { code: String, row: usize },
    #[error("row {row}: {code} = {value:?} is not an answer on the 1-5 scale")]
    OutOfRange { row: usize, code: String, value: String },
    #[error("row {row}: {code} has unknown option {option:?}")]
    UnknownOption { row: usize, code: String, option: String },
    #[error("correlation is undefined for a constant vector")]
    ConstantVector,
    #[error("vectors differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("need at least two values, got {0}")]
    TooShort(usize),
    #[error("instrument: {0}")]
    Instrument(String),
    #[error("csv: {0}")]
    Csv(String),
}

/// Statistics at `f64`, the precision the reports use.
pub type ItemStats = report::ItemStats<f64>;
