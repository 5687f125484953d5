//! Catalog-metric features for a (query, target attribute, candidate
//! value) triple.
//!
//! Two score families, both derived from graph counts and both in
//! [0, 1]:
//!
//! - **presence**: how often items carrying the anchor value have *any*
//!   value for the target attribute — `pair / degree`.
//! - **value**: how strongly the anchor value co-occurs with the
//!   specific candidate value — `log(triple) / log(degree)`, log-
//!   smoothed because raw co-occurrence counts are heavy-tailed.
//!
//! Each non-target schema attribute contributes one score per family,
//! weighted by anchor confidence, giving a fixed-width vector of
//! `2 * (N_attrs - 1)` numbers with 0 meaning "no evidence".

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::catalog::KnowledgeGraph;
use crate::error::{Error, Result};
use crate::lexicon::{anchors, AnchorAssignment, CandidateSpan};

/// Fraction of items with the anchor value that carry the target
/// attribute at all. 0 when the anchor value is unseen (degree 0).
pub fn presence_ratio(pair_count: u64, degree: u64) -> f64 {
    if degree == 0 {
        0.0
    } else {
        (pair_count as f64 / degree as f64).min(1.0)
    }
}

/// Log-smoothed co-occurrence strength `log(count) / log(degree)`.
///
/// Degenerate cases are pinned: a zero count is no evidence (0); a
/// count equal to the degree is perfect evidence (1), including the
/// single-item case where both logs vanish; a degree of 0 or 1 leaves
/// the denominator undefined (0). The result is capped at 1.
pub fn log_smoothed_ratio(count: u64, degree: u64) -> f64 {
    if count == 0 {
        0.0
    } else if count >= degree {
        1.0
    } else if degree <= 1 {
        0.0
    } else {
        ((count as f64).ln() / (degree as f64).ln()).min(1.0)
    }
}

/// Confidence-weighted presence score of target attribute `m` given
/// the anchor assignments of one non-target attribute.
///
/// Assignments must all belong to the same attribute; their
/// confidences sum to at most 1, so the result stays in [0, 1].
pub fn presence_score(
    kg: &KnowledgeGraph,
    assignments: &[AnchorAssignment],
    m: &str,
) -> Result<f64> {
    debug_assert!(assignments.windows(2).all(|w| w[0].attribute == w[1].attribute));
    let mut score = 0.0;
    for a in assignments {
        let degree = kg.degree(&a.attribute, &a.value)?;
        let pair = kg.pair_count(&a.attribute, &a.value, m)?;
        score += presence_ratio(pair, degree) * a.confidence;
    }
    Ok(score)
}

/// Confidence-weighted value score of `m = l` given the anchor
/// assignments of one non-target attribute.
pub fn value_score(
    kg: &KnowledgeGraph,
    assignments: &[AnchorAssignment],
    m: &str,
    l: &str,
) -> Result<f64> {
    debug_assert!(assignments.windows(2).all(|w| w[0].attribute == w[1].attribute));
    let mut score = 0.0;
    for a in assignments {
        let degree = kg.degree(&a.attribute, &a.value)?;
        let triple = kg.triple_count(&a.attribute, &a.value, m, l)?;
        score += log_smoothed_ratio(triple, degree) * a.confidence;
    }
    Ok(score)
}

/// Feature vector for one (target attribute, candidate value)
/// hypothesis.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub target: String,
    pub candidate_value: String,
    /// Per non-target attribute: presence score.
    pub presence_features: BTreeMap<String, f64>,
    /// Per non-target attribute: value score.
    pub value_features: BTreeMap<String, f64>,
    /// All presence scores in schema order, then all value scores in
    /// schema order. Width is fixed at `2 * (N_attrs - 1)`.
    pub dense: Vec<f64>,
}

impl FeatureVector {
    pub fn width(&self) -> usize {
        self.dense.len()
    }

    /// Rebuild a full vector from its dense form, e.g. when reading a
    /// feature dump back. The dense layout is positional, so the
    /// schema must be the one the features were computed under.
    pub fn from_dense(
        schema: &crate::catalog::AttributeSchema,
        target: &str,
        candidate_value: &str,
        dense: Vec<f64>,
    ) -> Result<Self> {
        schema.require(target)?;
        let expected = 2 * (schema.len() - 1);
        if dense.len() != expected {
            return Err(Error::WidthMismatch {
                expected,
                actual: dense.len(),
            });
        }
        let non_target: Vec<&String> =
            schema.attributes().iter().filter(|n| *n != target).collect();
        let presence_features = non_target
            .iter()
            .zip(&dense)
            .map(|(n, &s)| ((*n).clone(), s))
            .collect();
        let value_features = non_target
            .iter()
            .zip(&dense[non_target.len()..])
            .map(|(n, &s)| ((*n).clone(), s))
            .collect();
        Ok(FeatureVector {
            target: target.to_string(),
            candidate_value: candidate_value.to_string(),
            presence_features,
            value_features,
            dense,
        })
    }
}

/// Compute the feature vector for candidate `m = l` from a query's
/// extracted spans.
///
/// Every non-target attribute contributes a slot in both families;
/// attributes with no span in the query score 0.
pub fn featurize(
    kg: &KnowledgeGraph,
    spans: &[CandidateSpan],
    m: &str,
    l: &str,
) -> Result<FeatureVector> {
    let schema = kg.schema();
    schema.require(m)?;

    let mut by_attr: BTreeMap<String, Vec<AnchorAssignment>> = BTreeMap::new();
    for a in anchors(spans, m) {
        schema.require(&a.attribute)?;
        by_attr.entry(a.attribute.clone()).or_default().push(a);
    }

    let mut presence_features = BTreeMap::new();
    let mut value_features = BTreeMap::new();
    let mut dense = Vec::with_capacity(2 * (schema.len() - 1));

    for n in schema.attributes() {
        if n == m {
            continue;
        }
        let p = match by_attr.get(n) {
            Some(assignments) => presence_score(kg, assignments, m)?,
            None => 0.0,
        };
        presence_features.insert(n.clone(), p);
        dense.push(p);
    }
    for n in schema.attributes() {
        if n == m {
            continue;
        }
        let v = match by_attr.get(n) {
            Some(assignments) => value_score(kg, assignments, m, l)?,
            None => 0.0,
        };
        value_features.insert(n.clone(), v);
        dense.push(v);
    }

    Ok(FeatureVector {
        target: m.to_string(),
        candidate_value: l.to_string(),
        presence_features,
        value_features,
        dense,
    })
}

/// One line of the feature dump format: enough to train on or debug a
/// single candidate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureRecord {
    pub query: String,
    pub target: String,
    pub candidate_value: String,
    pub dense: Vec<f64>,
    /// Present means the candidate is genuinely the target attribute.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<bool>,
}

/// Write feature records as newline-delimited JSON.
pub fn save_features(records: &[FeatureRecord], path: &Path) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    for record in records {
        serde_json::to_writer(&mut out, record)
            .map_err(|e| Error::Io(std::io::Error::other(e)))?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

/// Read feature records written by [`save_features`].
pub fn load_features(path: &Path) -> Result<Vec<FeatureRecord>> {
    let file = File::open(path)?;
    let mut records = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        records.push(
            serde_json::from_str(&line).map_err(|e| Error::MalformedRecord {
                line: i + 1,
                message: e.to_string(),
            })?,
        );
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{build_graph, AttributeSchema, Item};
    use crate::fixtures::fixture_f;
    use crate::lexicon::{build_dictionary, extract_candidates, Query};
    use proptest::prelude::*;
    use tempfile::tempdir;

    fn fixture_graph() -> KnowledgeGraph {
        let (schema, items) = fixture_f();
        build_graph(&schema, items).unwrap()
    }

    fn anchor(attr: &str, value: &str, confidence: f64) -> AnchorAssignment {
        AnchorAssignment {
            attribute: attr.into(),
            value: value.into(),
            confidence,
        }
    }

    #[test]
    fn presence_from_dvd_anchor() {
        let kg = fixture_graph();
        let a = [anchor("product_type", "dvd", 1.0)];
        assert_eq!(presence_score(&kg, &a, "color").unwrap(), 0.1);
        assert_eq!(presence_score(&kg, &a, "brand").unwrap(), 0.8);
    }

    #[test]
    fn presence_of_unseen_anchor_value_is_zero() {
        let kg = fixture_graph();
        let a = [anchor("product_type", "toaster", 1.0)];
        assert_eq!(presence_score(&kg, &a, "color").unwrap(), 0.0);
    }

    #[test]
    fn presence_self_anchor_errors() {
        let kg = fixture_graph();
        let a = [anchor("color", "maroon", 1.0)];
        assert!(presence_score(&kg, &a, "color").is_err());
    }

    #[test]
    fn value_from_shirt_anchor() {
        let kg = fixture_graph();
        let a = [anchor("product_type", "shirt", 1.0)];
        let got = value_score(&kg, &a, "color", "maroon").unwrap();
        let want = 3f64.ln() / 5f64.ln();
        assert!((got - want).abs() < 1e-15, "got {got}, want {want}");
        assert!((got - 0.6826).abs() < 1e-4);
    }

    #[test]
    fn log_ratio_guards() {
        assert_eq!(log_smoothed_ratio(0, 10), 0.0); // no co-occurrence
        assert_eq!(log_smoothed_ratio(1, 10), 0.0); // log 1 = 0
        assert_eq!(log_smoothed_ratio(7, 7), 1.0); // full co-occurrence
        assert_eq!(log_smoothed_ratio(1, 1), 1.0); // both logs vanish
        assert_eq!(log_smoothed_ratio(0, 1), 0.0);
        assert_eq!(log_smoothed_ratio(0, 0), 0.0);
    }

    #[test]
    fn log_ratio_matches_any_base() {
        for (count, degree) in [(2u64, 10u64), (3, 5), (9, 10), (5, 1000), (999, 1000)] {
            let natural = log_smoothed_ratio(count, degree);
            let base2 = (count as f64).log2() / (degree as f64).log2();
            let base10 = (count as f64).log10() / (degree as f64).log10();
            assert!((natural - base2).abs() < 1e-12, "{count}/{degree} vs log2");
            assert!((natural - base10).abs() < 1e-12, "{count}/{degree} vs log10");
        }
    }

    #[test]
    fn confidence_weights_sum_scores() {
        let kg = fixture_graph();
        // two half-confidence product types: score is the average
        let a = [
            anchor("product_type", "dvd", 0.5),
            anchor("product_type", "shirt", 0.5),
        ];
        let got = presence_score(&kg, &a, "color").unwrap();
        assert!((got - (0.5 * 0.1 + 0.5 * 1.0)).abs() < 1e-15);
    }

    #[test]
    fn featurize_band_query_for_color() {
        let kg = fixture_graph();
        let dict = build_dictionary(&kg, 1).unwrap();
        let spans = extract_candidates(&Query::new("maroon 5 dvds"), &dict);
        let fv = featurize(&kg, &spans, "color", "maroon").unwrap();

        assert_eq!(fv.width(), 4);
        assert_eq!(fv.presence_features["product_type"], 0.1);
        // all 8 "maroon 5" items are colorless, so brand gives no
        // presence evidence at all
        assert_eq!(fv.presence_features["brand"], 0.0);
        // triple(product_type=dvd, color=maroon) = 1 → log 1 = 0
        assert_eq!(fv.value_features["product_type"], 0.0);
        assert_eq!(fv.value_features["brand"], 0.0);
        // dense layout: presence in schema order, then value
        assert_eq!(fv.dense, [0.1, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn featurize_target_only_query_is_all_zero() {
        let kg = fixture_graph();
        let dict = build_dictionary(&kg, 1).unwrap();
        let spans = extract_candidates(&Query::new("maroon"), &dict);
        let fv = featurize(&kg, &spans, "color", "maroon").unwrap();
        assert!(fv.dense.iter().all(|&x| x == 0.0));
        assert_eq!(fv.width(), 4);
    }

    #[test]
    fn featurize_two_attribute_schema_has_width_two() {
        let schema = AttributeSchema::new(["product_type", "color"]).unwrap();
        let items = vec![Item::new(
            "i1",
            [("product_type", vec!["shirt"]), ("color", vec!["red"])],
        )];
        let kg = build_graph(&schema, items).unwrap();
        let fv = featurize(&kg, &[], "color", "red").unwrap();
        assert_eq!(fv.width(), 2);
    }

    #[test]
    fn featurize_unknown_target_errors() {
        let kg = fixture_graph();
        assert!(featurize(&kg, &[], "material", "wool").is_err());
    }

    #[test]
    fn featurize_is_deterministic() {
        let kg = fixture_graph();
        let dict = build_dictionary(&kg, 1).unwrap();
        let spans = extract_candidates(&Query::new("maroon 5 dvds"), &dict);
        let a = featurize(&kg, &spans, "color", "maroon").unwrap();
        let b = featurize(&kg, &spans, "color", "maroon").unwrap();
        assert_eq!(a, b);
        assert_eq!(a.dense, b.dense);
    }

    #[test]
    fn feature_records_round_trip() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("features.jsonl");
        let records = vec![
            FeatureRecord {
                query: "maroon 5 dvds".into(),
                target: "color".into(),
                candidate_value: "maroon".into(),
                dense: vec![0.1, 0.0, 0.0, 0.0],
                label: Some(false),
            },
            FeatureRecord {
                query: "maroon shirt".into(),
                target: "color".into(),
                candidate_value: "maroon".into(),
                dense: vec![1.0, 0.0, 0.6826, 0.0],
                label: None,
            },
        ];
        save_features(&records, &path).unwrap();
        assert_eq!(load_features(&path).unwrap(), records);
    }

    #[test]
    fn feature_file_bad_line_is_rejected() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("features.jsonl");
        std::fs::write(&path, "{\"query\":\"x\"}\n").unwrap();
        let err = load_features(&path).unwrap_err();
        assert!(err.to_string().contains("line 1"));
    }

    /// Tiny random catalogs for the from-scratch oracle comparison:
    /// 3 attributes, small value vocabularies, so co-occurrence counts
    /// are non-trivial.
    fn small_catalog() -> impl Strategy<Value = Vec<Item>> {
        proptest::collection::vec(
            (
                proptest::option::of(0u8..4),
                proptest::option::of(0u8..4),
                proptest::option::of(0u8..4),
            ),
            0..60,
        )
        .prop_map(|rows| {
            rows.into_iter()
                .enumerate()
                .map(|(i, (a, b, c))| {
                    let mut values: Vec<(&str, Vec<String>)> = Vec::new();
                    if let Some(a) = a {
                        values.push(("pt", vec![format!("t{a}")]));
                    }
                    if let Some(b) = b {
                        values.push(("brand", vec![format!("b{b}")]));
                    }
                    if let Some(c) = c {
                        values.push(("color", vec![format!("c{c}")]));
                    }
                    Item::new(format!("i{i}"), values)
                })
                .collect()
        })
    }

    /// Recompute both scores for one anchor straight from the item
    /// list, no graph involved.
    fn oracle_scores(items: &[Item], n: &str, x: &str, m: &str, l: &str) -> (f64, f64) {
        let degree = items.iter().filter(|it| it.has_value(n, x)).count() as f64;
        let pair = items
            .iter()
            .filter(|it| it.has_value(n, x) && it.has_attribute(m))
            .count() as f64;
        let triple = items
            .iter()
            .filter(|it| it.has_value(n, x) && it.has_value(m, l))
            .count() as f64;
        let presence = if degree == 0.0 { 0.0 } else { pair / degree };
        let value = if triple == 0.0 {
            0.0
        } else if triple >= degree {
            1.0
        } else if degree <= 1.0 {
            0.0
        } else {
            triple.ln() / degree.ln()
        };
        (presence, value)
    }

    proptest! {
        #[test]
        fn scores_match_item_list_oracle(
            items in small_catalog(),
            x in 0u8..4,
            l in 0u8..4,
        ) {
            let schema = AttributeSchema::new(["pt", "brand", "color"]).unwrap();
            let kg = build_graph(&schema, items.clone()).unwrap();
            let x = format!("t{x}");
            let l = format!("c{l}");
            let a = [anchor("pt", &x, 1.0)];
            let (want_p, want_v) = oracle_scores(&items, "pt", &x, "color", &l);
            let got_p = presence_score(&kg, &a, "color").unwrap();
            let got_v = value_score(&kg, &a, "color", &l).unwrap();
            prop_assert!((got_p - want_p).abs() < 1e-12);
            prop_assert!((got_v - want_v).abs() < 1e-12);
        }

        #[test]
        fn ratios_stay_in_unit_interval(count in 0u64..5000, extra in 0u64..5000) {
            let degree = count + extra;
            let p = presence_ratio(count, degree);
            let v = log_smoothed_ratio(count, degree);
            prop_assert!((0.0..=1.0).contains(&p));
            prop_assert!((0.0..=1.0).contains(&v));
        }

        #[test]
        fn ratios_grow_with_count(degree in 2u64..2000, c1 in 0u64..2000, c2 in 0u64..2000) {
            let (lo, hi) = (c1.min(c2).min(degree), c1.max(c2).min(degree));
            prop_assert!(presence_ratio(lo, degree) <= presence_ratio(hi, degree));
            prop_assert!(log_smoothed_ratio(lo, degree) <= log_smoothed_ratio(hi, degree));
        }
    }
}
