//! Evaluation: identification quality (precision/recall/F1) and
//! ranking impact (nDCG@k) of resolved attributes.
//!
//! The ranker here is deliberately minimal — score items by how many
//! resolved (attribute, value) pairs they match, demote items whose
//! catalog value contradicts a resolved value. Baseline and classifier
//! are compared under this same ranker, so any nDCG difference
//! isolates the attribute-resolution decision itself.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::catalog::{Item, KnowledgeGraph};
use crate::error::{Error, Result};

/// Confusion counts and the derived ratios.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PRF1Report {
    pub true_positives: usize,
    pub false_positives: usize,
    pub true_negatives: usize,
    pub false_negatives: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Score binary decisions against labels. Degenerate denominators
/// yield 0 rather than NaN: no positive predictions means precision 0,
/// no positive labels means recall 0.
pub fn prf1(predictions: &[bool], labels: &[bool]) -> Result<PRF1Report> {
    if predictions.len() != labels.len() {
        return Err(Error::LengthMismatch {
            left: predictions.len(),
            right: labels.len(),
        });
    }
    let mut tp = 0;
    let mut fp = 0;
    let mut tn = 0;
    let mut fn_ = 0;
    for (&p, &y) in predictions.iter().zip(labels) {
        match (p, y) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, false) => tn += 1,
            (false, true) => fn_ += 1,
        }
    }
    let ratio = |num: usize, den: usize| if den == 0 { 0.0 } else { num as f64 / den as f64 };
    let precision = ratio(tp, tp + fp);
    let recall = ratio(tp, tp + fn_);
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    Ok(PRF1Report {
        true_positives: tp,
        false_positives: fp,
        true_negatives: tn,
        false_negatives: fn_,
        precision,
        recall,
        f1,
    })
}

/// Relevance of one (query, item) pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Judgment {
    pub query: String,
    pub item_id: String,
    /// Non-negative graded relevance.
    pub gain: f64,
}

/// Map a raw order count to a bounded relevance gain.
///
/// Order counts are heavy-tailed; capping at 4 keeps `2^gain` from
/// letting a single runaway item dominate the metric.
pub fn judgment_from_orders(orders: u64) -> f64 {
    orders.min(4) as f64
}

/// Graded-relevance ranking quality in [0, 1].
///
/// `DCG = Σ (2^gain − 1) / log2(pos + 1)` over the first k ranked
/// items; the ideal DCG ranks the judged gains in descending order.
/// Unjudged items have gain 0; if every gain is 0 the result is 0.
/// Judgments are matched by item id (duplicates keep the max gain), so
/// pass a single query's judgments.
pub fn ndcg_at_k(ranking: &[String], judgments: &[Judgment], k: usize) -> f64 {
    let mut gains: HashMap<&str, f64> = HashMap::new();
    for j in judgments {
        let g = gains.entry(j.item_id.as_str()).or_insert(0.0);
        *g = g.max(j.gain);
    }

    let discounted = |gain: f64, pos: usize| (2f64.powf(gain) - 1.0) / ((pos + 2) as f64).log2();

    let dcg: f64 = ranking
        .iter()
        .take(k)
        .enumerate()
        .map(|(i, id)| discounted(gains.get(id.as_str()).copied().unwrap_or(0.0), i))
        .sum();

    let mut ideal: Vec<f64> = gains.values().copied().collect();
    ideal.sort_unstable_by(|a, b| b.partial_cmp(a).unwrap());
    let idcg: f64 = ideal
        .iter()
        .take(k)
        .enumerate()
        .map(|(i, &g)| discounted(g, i))
        .sum();

    if idcg == 0.0 {
        0.0
    } else {
        dcg / idcg
    }
}

/// Write (query, item_id, orders) rows as UTF-8 tab-separated lines.
pub fn save_judgments(rows: &[(String, String, u64)], path: &Path) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    for (query, item_id, orders) in rows {
        writeln!(out, "{query}\t{item_id}\t{orders}")?;
    }
    out.flush()?;
    Ok(())
}

/// Read a judgments file, mapping raw order counts to gains via
/// [`judgment_from_orders`].
pub fn load_judgments(path: &Path) -> Result<Vec<Judgment>> {
    let file = File::open(path)?;
    let mut judgments = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let mut parts = line.split('\t');
        let parsed = match (parts.next(), parts.next(), parts.next(), parts.next()) {
            (Some(query), Some(item_id), Some(orders), None) => orders
                .parse::<u64>()
                .ok()
                .map(|o| (query.to_string(), item_id.to_string(), o)),
            _ => None,
        };
        let Some((query, item_id, orders)) = parsed else {
            return Err(Error::MalformedRecord {
                line: i + 1,
                message: "expected query<TAB>item_id<TAB>orders".into(),
            });
        };
        judgments.push(Judgment {
            query,
            item_id,
            gain: judgment_from_orders(orders),
        });
    }
    Ok(judgments)
}

/// What to do with items that contradict a resolved attribute value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RankMode {
    /// Keep contradicting items, ranked below everything else.
    Boost,
    /// Drop contradicting items from the ranking entirely.
    Filter,
}

/// Reusable ranker over a fixed catalog.
///
/// Item popularity (the sum of the item's value degrees in the graph)
/// does not depend on the query, so it is computed once here; ranking
/// many queries against the same catalog then only pays for the
/// per-query resolved-pair checks.
pub struct ItemRanker<'a> {
    items: &'a [Item],
    popularity: Vec<u64>,
}

impl<'a> ItemRanker<'a> {
    pub fn new(kg: &KnowledgeGraph, items: &'a [Item]) -> Self {
        let popularity = items
            .iter()
            .map(|item| {
                item.values()
                    .iter()
                    .flat_map(|(attr, values)| {
                        values.iter().map(move |v| kg.degree(attr, v).unwrap_or(0))
                    })
                    .sum()
            })
            .collect();
        ItemRanker { items, popularity }
    }

    /// Rank the catalog against one query's resolved (attribute,
    /// value) pairs.
    ///
    /// Items matching more resolved pairs come first; items with no
    /// overlap follow in popularity order; items whose catalog value
    /// for a resolved attribute differs from the resolved value are
    /// demoted below both (or removed, per [`RankMode`]). All ties
    /// break by item id, so the order is total and deterministic.
    pub fn rank(&self, resolved: &[(String, String)], mode: RankMode) -> Vec<String> {
        let mut scored: Vec<(u8, u64, u64, &str)> = Vec::with_capacity(self.items.len());
        for (item, &popularity) in self.items.iter().zip(&self.popularity) {
            let mut matches = 0u64;
            let mut contradicted = false;
            for (attr, value) in resolved {
                if item.has_value(attr, value) {
                    matches += 1;
                } else if item.has_attribute(attr) {
                    contradicted = true;
                }
            }
            let tier = if contradicted {
                2
            } else if matches > 0 {
                0
            } else {
                1
            };
            if tier == 2 && mode == RankMode::Filter {
                continue;
            }
            scored.push((tier, matches, popularity, item.id()));
        }
        scored.sort_unstable_by(|a, b| {
            a.0.cmp(&b.0)
                .then(b.1.cmp(&a.1))
                .then(b.2.cmp(&a.2))
                .then_with(|| a.3.cmp(b.3))
        });
        scored.into_iter().map(|(_, _, _, id)| id.to_string()).collect()
    }
}

/// One-shot convenience over [`ItemRanker`] for ranking a single query.
pub fn rank_items(
    kg: &KnowledgeGraph,
    items: &[Item],
    resolved: &[(String, String)],
    mode: RankMode,
) -> Vec<String> {
    ItemRanker::new(kg, items).rank(resolved, mode)
}
