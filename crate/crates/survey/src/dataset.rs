use std::collections::BTreeMap;
use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::instrument::{DemographicKind, SurveyInstrument};
use crate::SurveyError;

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Participant {
    /// Likert answers by item code; `None` when left blank.
    pub likert: BTreeMap<String, Option<u8>>,
    /// Chosen option tokens by demographic code; empty when unanswered.
    pub demographics: BTreeMap<String, Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SurveyDataset {
    pub participants: Vec<Participant>,
}

impl SurveyDataset {
    pub fn len(&self) -> usize {
        self.participants.len()
    }

    pub fn is_empty(&self) -> bool {
        self.participants.is_empty()
    }

    /// Read comma-separated rows with a header of variable codes. Multi-select
    /// cells hold `;`-separated option tokens. Unknown columns are rejected.
    pub fn from_csv<R: Read>(reader: R, instrument: &SurveyInstrument) -> Result<Self, SurveyError> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let header: Vec<String> = rdr.headers().map_err(|e| SurveyError::Csv(e.to_string()))?.iter().map(str::to_owned).collect();
        for h in &header {
            if instrument.item(h).is_none() && !instrument.demographics.iter().any(|d| &d.code == h) {
                return Err(SurveyError::UnknownCode(h.clone()));
            }
        }
        let mut participants = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let row = i + 1;
            let rec = rec.map_err(|e| SurveyError::Csv(e.to_string()))?;
            let mut p = Participant::default();
            for (code, cell) in header.iter().zip(rec.iter()) {
                if instrument.item(code).is_some() {
                    let v = if cell.is_empty() {
                        None
                    } else {
                        match cell.parse::<u8>() {
                            Ok(v @ 1..=5) => Some(v),
                            _ => return Err(SurveyError::OutOfRange { row, code: code.clone(), value: cell.into() }),
                        }
                    };
                    p.likert.insert(code.clone(), v);
                    continue;
                }
                let q = instrument.demographics.iter().find(|d| &d.code == code).expect("header checked");
                let tokens: Vec<String> = cell.split(';').map(str::trim).filter(|t| !t.is_empty()).map(str::to_owned).collect();
                if q.kind == DemographicKind::SingleSelect && tokens.len() > 1 {
                    return Err(SurveyError::UnknownOption { row, code: code.clone(), option: cell.into() });
                }
                if let Some(bad) = tokens.iter().find(|t| q.label(t).is_none()) {
                    return Err(SurveyError::UnknownOption { row, code: code.clone(), option: bad.clone() });
                }
                p.demographics.insert(code.clone(), tokens);
            }
            participants.push(p);
        }
        Ok(Self { participants })
    }

    /// Every participant's answer to `code`, in row order.
    pub fn responses(&self, code: &str) -> Result<Vec<u8>, SurveyError> {
        self.participants
            .iter()
            .enumerate()
            .map(|(i, p)| match p.likert.get(code) {
                Some(Some(v)) => Ok(*v),
                _ => Err(SurveyError::MissingResponses { code: code.into(), row: i + 1 }),
            })
            .collect()
    }
}
