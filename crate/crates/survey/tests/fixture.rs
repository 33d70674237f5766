//! Regression against the reconstructed 23-participant fixture.

use mlquest_survey::report::round_to;
use mlquest_survey::{demographics, report, DemographicKind, Factor, ReportOptions, SurveyDataset, SurveyError, SurveyInstrument};

const CSV: &str = include_str!("../data/reconstructed_responses.csv");

fn fixture() -> SurveyDataset {
    SurveyDataset::from_csv(CSV.as_bytes(), &SurveyInstrument::default()).unwrap()
}

#[test]
fn item_table_matches_published_rounding() {
    let r = report(&fixture(), &SurveyInstrument::default(), ReportOptions::default()).unwrap();
    assert_eq!(r.participants, 23);
    let published = [
        ("EU1", 3.52, 0.95),
        ("EU2", 3.70, 0.93),
        ("U1", 3.91, 0.85),
        ("U2", 3.78, 0.74),
        ("U3", 3.65, 0.78),
        ("I1", 3.43, 0.95),
        ("I2", 3.87, 0.69),
        ("C1", 3.65, 0.83),
    ];
    for ((code, m, s), row) in published.iter().zip(&r.items) {
        assert_eq!(&row.code, code);
        assert_eq!(round_to(row.mean, 2), *m, "{code} mean");
        assert_eq!(round_to(row.sd, 2), *s, "{code} sd");
    }
}

#[test]
fn demographic_shares() {
    let d = demographics(&fixture(), &SurveyInstrument::default());
    let pct = |i: usize| d[i].options.iter().map(|o| round_to(o.percent, 1)).collect::<Vec<_>>();
    assert_eq!(pct(0), vec![33.3, 66.7]);
    assert_eq!(pct(1), vec![42.1, 57.9]);
    assert_eq!(pct(2), vec![69.6, 47.8]);
    assert!(pct(2).iter().sum::<f64>() > 100.0);
    for s in d.iter().filter(|s| s.kind == DemographicKind::SingleSelect) {
        let total: f64 = s.options.iter().map(|o| o.percent).sum();
        assert!((total - 100.0).abs() <= 0.1);
    }
}

#[test]
fn correlation_matrix_shape() {
    let r = report(&fixture(), &SurveyInstrument::default(), ReportOptions::default()).unwrap();
    let m = &r.correlations;
    assert_eq!(m.factors, vec![Factor::U, Factor::EU, Factor::I]);
    for (i, row) in m.rows.iter().enumerate() {
        assert_eq!(row.len(), i + 1);
        assert_eq!(row[i], 1.0);
    }
    // All positive, with I correlating more strongly than EU does with U.
    let (ue, ui, ei) = (m.get(Factor::EU, Factor::U).unwrap(), m.get(Factor::I, Factor::U).unwrap(), m.get(Factor::I, Factor::EU).unwrap());
    assert!(0.0 < ue && ue < ui && ei > ue);
    assert!((ue - 0.2994).abs() < 0.01 && (ui - 0.4952).abs() < 0.01 && (ei - 0.4694).abs() < 0.01);
}

#[test]
fn rendering_is_stable() {
    let inst = SurveyInstrument::default();
    let a = report(&fixture(), &inst, ReportOptions::default()).unwrap();
    let b = report(&fixture(), &inst, ReportOptions::default()).unwrap();
    assert_eq!(a.render_text(), b.render_text());
    assert_eq!(a.to_json(), b.to_json());
    let text = a.render_text();
    assert!(text.contains("I2     3.87   0.69"), "{text}");
    assert!(text.contains("Smartphone        47.8"));
    let json: serde_json::Value = serde_json::from_str(&a.to_json()).unwrap();
    assert_eq!(json["items"][6]["mean"], 3.87);
}

#[test]
fn bad_inputs() {
    let inst = SurveyInstrument::default();
    assert_eq!(report(&SurveyDataset::default(), &inst, ReportOptions::default()), Err(SurveyError::Empty));
    let bad = "EU1,EU2\n6,3\n";
    assert!(matches!(SurveyDataset::from_csv(bad.as_bytes(), &inst), Err(SurveyError::OutOfRange { .. })));
    let unknown = "XX\n1\n";
    assert_eq!(SurveyDataset::from_csv(unknown.as_bytes(), &inst), Err(SurveyError::UnknownCode("XX".into())));
    let missing = SurveyDataset::from_csv("EU1,EU2\n3,\n".as_bytes(), &inst).unwrap();
    assert!(matches!(
        mlquest_survey::item_stats::<f64>(&missing, &inst, "EU2", Default::default()),
        Err(SurveyError::MissingResponses { .. })
    ));
    assert!(matches!(
        SurveyDataset::from_csv("platform\ntablet\n".as_bytes(), &inst),
        Err(SurveyError::UnknownOption { .. })
    ));
}

#[test]
fn hand_counted_multi_select() {
    let inst = SurveyInstrument::default();
    let csv = "EU1,platform\n4,laptop_desktop;smartphone\n3,smartphone\n5,\n2,laptop_desktop\n";
    let d = demographics(&SurveyDataset::from_csv(csv.as_bytes(), &inst).unwrap(), &inst);
    let p = &d[2];
    assert_eq!(p.respondents, 4);
    assert_eq!(p.options[0].count, 2);
    assert_eq!(p.options[1].count, 2);
    assert_eq!(p.options[0].percent, 50.0);
}
