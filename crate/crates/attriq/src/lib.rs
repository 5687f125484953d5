//! Decide which attributes a search query *really* asks for, using
//! co-occurrence statistics mined from the product catalog itself.
//!
//! A dictionary tagger sees the query `maroon 5 dvds` and happily tags
//! `maroon` as a color — but the shopper wants a band's albums, not
//! red discs. Plain dictionary lookup cannot tell those cases apart
//! because the evidence is not in the query; it is in the catalog:
//! items of type *dvd* almost never carry a color, while items of type
//! *shirt* almost always do. This crate turns that observation into a
//! pipeline:
//!
//! ```text
//! catalog ─→ co-occurrence graph ─→ value dictionary
//!                    │                     │
//!                    │              query ─┴→ candidate spans (+ conflicts)
//!                    └──────────────────────→ presence / value features
//!                                                    │
//!                                         logistic classifier ─→ present?
//!                                                    │
//!                                          resolved attributes ─→ item ranking
//! ```
//!
//! Every stage is available as a library call, as a subcommand of the
//! `attriq` binary (`synth`, `build`, `dict`, `featurize`, `train`,
//! `predict`, `eval`, `bench`), and as a runnable example.
//!
//! ## Quick start
//!
//! ```
//! use attriq::{build_graph, build_dictionary, extract_candidates,
//!              AttributeSchema, Item, Query};
//!
//! let schema = AttributeSchema::new(["product_type", "brand", "color"])?;
//! let items = vec![
//!     Item::new("d1", [("product_type", vec!["dvd"]), ("brand", vec!["maroon 5"])]),
//!     Item::new("s1", [("product_type", vec!["shirt"]), ("color", vec!["maroon"])]),
//! ];
//! let kg = build_graph(&schema, items)?;
//! let dict = build_dictionary(&kg, 1)?;
//!
//! // every reading of the tokens, contradictions included
//! let spans = extract_candidates(&Query::new("maroon 5 dvds"), &dict);
//! assert!(spans.iter().any(|s| s.attribute == "color"));  // the trap
//! assert!(spans.iter().any(|s| s.attribute == "brand"));  // the truth
//!
//! // and the catalog knows dvds don't come in colors
//! assert_eq!(kg.pair_count("product_type", "dvd", "color")?, 0);
//! # Ok::<(), attriq::Error>(())
//! ```
//!
//! ## Examples
//!
//! Each major capability has a runnable walkthrough under `examples/`:
//!
//! - **`build_graph`** — count a hand-sized catalog into degrees, pair
//!   and triple counts
//! - **`extract_candidates`** — tokenize a query, find all dictionary
//!   spans, group the contradictions, derive anchors
//! - **`catalog_scores`** — presence and value scores, and how they
//!   become feature vectors for two query shapes
//! - **`synthesize_corpus`** — generate a seeded catalog, labeled
//!   queries, and relevance judgments with planted conflicts
//! - **`train_classifier`** — fit the logistic model, watch the loss
//!   fall, spot-check predictions
//! - **`resolve_query`** — the classifier against the dictionary
//!   baseline on the queries that separate them
//! - **`evaluate_ranking`** — how resolved attributes reorder items,
//!   measured with graded nDCG
//! - **`benchmark_throughput`** — per-query latency and sustained
//!   queries/second
//!
//! ```bash
//! cargo run --example build_graph
//! cargo run --example extract_candidates
//! cargo run --example catalog_scores
//! cargo run --example synthesize_corpus
//! cargo run --example train_classifier
//! cargo run --example resolve_query
//! cargo run --example evaluate_ranking
//! cargo run --release --example benchmark_throughput
//! ```
//!
//! ## Modules
//!
//! - [`catalog`] — attribute schema, items, graph construction, and
//!   the versioned graph snapshot format
//! - [`lexicon`] — tokenization, the value dictionary, candidate span
//!   extraction, conflict grouping, anchor derivation
//! - [`features`] — presence / value scoring and fixed-width feature
//!   vectors
//! - [`model`] — the from-scratch logistic classifier, the dictionary
//!   baseline, and labeled-query files
//! - [`eval`] — precision / recall / F1, graded nDCG, and attribute-
//!   aware item ranking
//! - [`synth`] — the seeded corpus generator behind every test number
//! - [`cli`] — the `attriq` binary: subcommands, exit codes, run
//!   manifests
//! - [`normalize`] — the one token/phrase normalization used everywhere

pub mod catalog;
pub mod cli;
pub mod error;
pub mod eval;
pub mod features;
pub mod lexicon;
pub mod model;
pub mod normalize;
pub mod synth;

#[cfg(test)]
pub(crate) mod fixtures;

pub use catalog::{
    build_graph, build_graph_stream, load_catalog, load_graph, save_catalog, save_graph,
    AttributeSchema, Item, KnowledgeGraph,
};
pub use error::{Error, Result};
pub use eval::{
    judgment_from_orders, load_judgments, ndcg_at_k, prf1, rank_items, save_judgments, ItemRanker,
    Judgment, PRF1Report, RankMode,
};
pub use features::{
    featurize, load_features, presence_score, save_features, value_score, FeatureRecord,
    FeatureVector,
};
pub use lexicon::{
    anchors, build_dictionary, detect_conflicts, extract_candidates, load_dictionary,
    save_dictionary, AnchorAssignment, CandidateSpan, Dictionary, Query,
};
pub use model::{
    baseline_predict, load_labeled_queries, load_model, predict, save_labeled_queries, save_model,
    train, LabeledQuery, Model, TrainConfig,
};
pub use synth::{generate_catalog, generate_judgments, generate_labeled_queries, SynthConfig};
