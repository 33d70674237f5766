use std::fmt::Write as _;

use num_traits::{Float, FromPrimitive};
use serde::{Deserialize, Serialize};

use crate::dataset::SurveyDataset;
use crate::instrument::{DemographicKind, Factor, SurveyInstrument};
pub use crate::stats::round_to;
use crate::stats::{self, SdKind};
use crate::SurveyError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ItemStats<T> {
    pub mean: T,
    pub sd: T,
}

pub fn item_stats<T: Float + FromPrimitive>(
    dataset: &SurveyDataset,
    instrument: &SurveyInstrument,
    code: &str,
    kind: SdKind,
) -> Result<ItemStats<T>, SurveyError> {
    if instrument.item(code).is_none() {
        return Err(SurveyError::UnknownCode(code.into()));
    }
    if dataset.is_empty() {
        return Err(SurveyError::Empty);
    }
    let xs: Vec<T> = dataset.responses(code)?.into_iter().map(|v| T::from_u8(v).expect("small integer")).collect();
    Ok(ItemStats { mean: stats::mean(&xs)?, sd: stats::sd(&xs, kind)? })
}

/// One participant's factor scores: the mean of their items within each factor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FactorScores {
    pub u: f64,
    pub eu: f64,
    pub i: f64,
    pub c: f64,
}

impl FactorScores {
    pub fn get(&self, f: Factor) -> f64 {
        match f {
            Factor::U => self.u,
            Factor::EU => self.eu,
            Factor::I => self.i,
            Factor::C => self.c,
        }
    }
}

pub fn factor_scores(dataset: &SurveyDataset, instrument: &SurveyInstrument) -> Result<Vec<FactorScores>, SurveyError> {
    let mut per_factor = Vec::new();
    for f in Factor::ALL {
        let codes: Vec<&str> = instrument.items_of(f).map(|i| i.code.as_str()).collect();
        let answers = codes.iter().map(|c| dataset.responses(c)).collect::<Result<Vec<_>, _>>()?;
        let scores: Vec<f64> = (0..dataset.len())
            .map(|row| {
                let vals: Vec<f64> = answers.iter().map(|a| f64::from(a[row])).collect();
                stats::mean(&vals).unwrap_or(f64::NAN)
            })
            .collect();
        per_factor.push(scores);
    }
    Ok((0..dataset.len())
        .map(|row| FactorScores { u: per_factor[0][row], eu: per_factor[1][row], i: per_factor[2][row], c: per_factor[3][row] })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptionShare {
    pub label: String,
    pub count: usize,
    pub percent: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemographicSummary {
    pub code: String,
    pub title: String,
    pub kind: DemographicKind,
    /// Denominator of the percentages.
    pub respondents: usize,
    pub options: Vec<OptionShare>,
}

/// Single-select shares are over those who answered the question, so they sum
/// to 100. Multi-select shares are over every participant and may exceed it.
pub fn demographics(dataset: &SurveyDataset, instrument: &SurveyInstrument) -> Vec<DemographicSummary> {
    instrument
        .demographics
        .iter()
        .map(|q| {
            let answers: Vec<&Vec<String>> = dataset.participants.iter().filter_map(|p| p.demographics.get(&q.code)).collect();
            let respondents = match q.kind {
                DemographicKind::SingleSelect => answers.iter().filter(|a| !a.is_empty()).count(),
                DemographicKind::MultiSelect => dataset.len(),
            };
            let options = q
                .options
                .iter()
                .map(|(token, label)| {
                    let count = answers.iter().filter(|a| a.contains(token)).count();
                    let percent = if respondents == 0 { 0.0 } else { 100.0 * count as f64 / respondents as f64 };
                    OptionShare { label: label.clone(), count, percent }
                })
                .collect();
            DemographicSummary { code: q.code.clone(), title: q.title.clone(), kind: q.kind, respondents, options }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportOptions {
    pub sd: SdKind,
    /// Include the single-item correctness factor in the correlation matrix.
    pub correlate_c: bool,
}

impl Default for ReportOptions {
    fn default() -> Self {
        Self { sd: SdKind::Sample, correlate_c: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ItemRow {
    pub code: String,
    pub text: String,
    pub mean: f64,
    pub sd: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationMatrix {
    pub factors: Vec<Factor>,
    /// Lower triangle, diagonal included: `rows[i]` has `i + 1` entries.
    pub rows: Vec<Vec<f64>>,
}

impl CorrelationMatrix {
    pub fn get(&self, a: Factor, b: Factor) -> Option<f64> {
        let i = self.factors.iter().position(|f| *f == a)?;
        let j = self.factors.iter().position(|f| *f == b)?;
        let (hi, lo) = if i >= j { (i, j) } else { (j, i) };
        Some(self.rows[hi][lo])
    }
}

/// Unrounded results; the renderers round for display.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub participants: usize,
    pub sd_kind: SdKind,
    pub items: Vec<ItemRow>,
    pub demographics: Vec<DemographicSummary>,
    pub correlations: CorrelationMatrix,
}

pub fn report(dataset: &SurveyDataset, instrument: &SurveyInstrument, opts: ReportOptions) -> Result<Report, SurveyError> {
    instrument.check()?;
    if dataset.is_empty() {
        return Err(SurveyError::Empty);
    }
    let items = instrument
        .items
        .iter()
        .map(|it| {
            let s: ItemStats<f64> = item_stats(dataset, instrument, &it.code, opts.sd)?;
            Ok(ItemRow { code: it.code.clone(), text: it.text.clone(), mean: s.mean, sd: s.sd })
        })
        .collect::<Result<Vec<_>, SurveyError>>()?;
    let scores = factor_scores(dataset, instrument)?;
    let factors: Vec<Factor> =
        [Factor::U, Factor::EU, Factor::I].into_iter().chain(opts.correlate_c.then_some(Factor::C)).collect();
    let mut rows = Vec::new();
    for (i, a) in factors.iter().enumerate() {
        let xs: Vec<f64> = scores.iter().map(|s| s.get(*a)).collect();
        let mut row = Vec::new();
        for b in &factors[..i] {
            let ys: Vec<f64> = scores.iter().map(|s| s.get(*b)).collect();
            row.push(stats::pearson(&xs, &ys)?);
        }
        row.push(1.0);
        rows.push(row);
    }
    Ok(Report {
        participants: dataset.len(),
        sd_kind: opts.sd,
        items,
        demographics: demographics(dataset, instrument),
        correlations: CorrelationMatrix { factors, rows },
    })
}

impl Report {
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let width = self.items.iter().map(|i| i.text.len()).max().unwrap_or(0);
        let _ = writeln!(out, "Item statistics (n = {}, {} SD)", self.participants, match self.sd_kind {
            SdKind::Sample => "sample",
            SdKind::Population => "population",
        });
        let _ = writeln!(out, "{:<width$}  {:<4}  {:>5}  {:>5}", "Question", "Code", "Mean", "SD");
        for i in &self.items {
            let _ = writeln!(out, "{:<width$}  {:<4}  {:>5.2}  {:>5.2}", i.text, i.code, round_to(i.mean, 2), round_to(i.sd, 2));
        }
        let _ = writeln!(out, "\nDemographics (%)");
        for d in &self.demographics {
            let _ = writeln!(out, "{} (n = {})", d.title, d.respondents);
            for o in &d.options {
                let _ = writeln!(out, "  {:<16} {:>5.1}", o.label, round_to(o.percent, 1));
            }
        }
        let _ = writeln!(out, "\nFactor correlations (Pearson)");
        let _ = write!(out, "{:<3}", "");
        for f in &self.correlations.factors {
            let _ = write!(out, " {:>7}", f.to_string());
        }
        out.push('\n');
        for (f, row) in self.correlations.factors.iter().zip(&self.correlations.rows) {
            let _ = write!(out, "{:<3}", f.to_string());
            for (j, v) in row.iter().enumerate() {
                if j + 1 == row.len() {
                    let _ = write!(out, " {:>7}", "1");
                } else {
                    let _ = write!(out, " {:>7.4}", round_to(*v, 4));
                }
            }
            out.push('\n');
        }
        out
    }

    /// Machine-readable form with display rounding applied.
    pub fn to_json(&self) -> String {
        let mut r = self.clone();
        for i in &mut r.items {
            i.mean = round_to(i.mean, 2);
            i.sd = round_to(i.sd, 2);
        }
        for d in &mut r.demographics {
            for o in &mut d.options {
                o.percent = round_to(o.percent, 1);
            }
        }
        for row in &mut r.correlations.rows {
            for v in row {
                *v = round_to(*v, 4);
            }
        }
        let mut s = serde_json::to_string_pretty(&r).expect("report serializes");
        s.push('\n');
        s
    }
}
