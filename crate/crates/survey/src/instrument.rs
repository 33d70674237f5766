use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::SurveyError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Factor {
    /// Perceived usefulness.
    U,
    /// Perceived ease of use.
    EU,
    /// Intention to use.
    I,
    /// Correctness of the concept mapping.
    C,
}

impl Factor {
    pub const ALL: [Factor; 4] = [Factor::U, Factor::EU, Factor::I, Factor::C];
}

impl fmt::Display for Factor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Factor::U => "U",
            Factor::EU => "EU",
            Factor::I => "I",
            Factor::C => "C",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Item {
    pub code: String,
    pub text: String,
    pub factor: Factor,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DemographicKind {
    SingleSelect,
    MultiSelect,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DemographicQuestion {
    /// CSV column name.
    pub code: String,
    pub title: String,
    pub kind: DemographicKind,
    /// (token used in the data, label used in reports)
    pub options: Vec<(String, String)>,
}

impl DemographicQuestion {
    pub fn label(&self, token: &str) -> Option<&str> {
        self.options.iter().find(|(t, _)| t == token).map(|(_, l)| l.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurveyInstrument {
    pub items: Vec<Item>,
    pub demographics: Vec<DemographicQuestion>,
}

fn item(code: &str, text: &str, factor: Factor) -> Item {
    Item { code: code.into(), text: text.into(), factor }
}

fn yes_no(code: &str, title: &str) -> DemographicQuestion {
    DemographicQuestion {
        code: code.into(),
        title: title.into(),
        kind: DemographicKind::SingleSelect,
        options: vec![("yes".into(), "Yes".into()), ("no".into(), "No".into())],
    }
}

impl Default for SurveyInstrument {
    /// The eight-item questionnaire with its three demographic questions.
    fn default() -> Self {
        use Factor::*;
        Self {
            items: vec![
                item("EU1", "Learning to operate the game is easy", EU),
                item("EU2", "Getting good at the game is easy", EU),
                item("U1", "The game helps me understand machine learning ideas", U),
                item("U2", "The game helps me learn several machine learning principles", U),
                item("U3", "The game makes machine learning concepts easier to learn", U),
                item("I1", "I would play the game if I had access to it", I),
                item("I2", "The game made learning interactive for me", I),
                item("C1", "The visuals of each level fit the concept it teaches", C),
            ],
            demographics: vec![
                yes_no("prior_knowledge", "Prior knowledge about ML"),
                yes_no("inquisitiveness", "Inquisitiveness for ML"),
                DemographicQuestion {
                    code: "platform".into(),
                    title: "Choice of the platform".into(),
                    kind: DemographicKind::MultiSelect,
                    options: vec![
                        ("laptop_desktop".into(), "Laptop/Desktop".into()),
                        ("smartphone".into(), "Smartphone".into()),
                    ],
                },
            ],
        }
    }
}

impl SurveyInstrument {
    pub fn check(&self) -> Result<(), SurveyError> {
        let mut codes = BTreeSet::new();
        for code in self.items.iter().map(|i| &i.code).chain(self.demographics.iter().map(|d| &d.code)) {
            if !codes.insert(code) {
                return Err(SurveyError::Instrument(format!("duplicate code {code}")));
            }
        }
        Ok(())
    }

    pub fn item(&self, code: &str) -> Option<&Item> {
        self.items.iter().find(|i| i.code == code)
    }

    pub fn items_of(&self, factor: Factor) -> impl Iterator<Item = &Item> {
        self.items.iter().filter(move |i| i.factor == factor)
    }
}
