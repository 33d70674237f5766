//! Learning-outcome content revealed at the end of each level.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutcomeContent {
    pub concept_name: String,
    pub definition: String,
    /// (what the player did, the concept step it stands for)
    pub mapping: Vec<(String, String)>,
}

impl OutcomeContent {
    pub fn is_well_formed(&self) -> bool {
        !self.concept_name.trim().is_empty() && !self.definition.trim().is_empty() && !self.mapping.is_empty()
    }

    /// Plain-text rendering used by the outcome modal.
    pub fn render(&self) -> String {
        let mut s = format!("{}\n\n{}\n", self.concept_name, self.definition);
        for (i, (game, concept)) in self.mapping.iter().enumerate() {
            s.push_str(&format!("\n{}. {} -> {}", i + 1, game, concept));
        }
        s
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct DefaultOutcomes {
    supervised: OutcomeContent,
    gradient: OutcomeContent,
    knn: OutcomeContent,
}

const DEFAULT_OUTCOMES: &str = include_str!("../data/outcomes.json");

fn defaults() -> DefaultOutcomes {
    serde_json::from_str(DEFAULT_OUTCOMES).expect("bundled outcomes.json is valid")
}

/// Bundled outcome text for level 1, 2 or 3.
pub fn default_outcome(level: u8) -> OutcomeContent {
    let d = defaults();
    match level {
        1 => d.supervised,
        2 => d.gradient,
        _ => d.knn,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_outcomes_are_well_formed() {
        for level in 1..=3 {
            let o = default_outcome(level);
            assert!(o.is_well_formed(), "level {level}");
        }
        assert_eq!(default_outcome(3).concept_name, "K-Nearest Neighbour Classification");
    }
}
