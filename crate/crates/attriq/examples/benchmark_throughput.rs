//! Time the per-query resolution loop — extract, featurize, predict —
//! in a tight in-process measurement.
//!
//! The catalog statistics live in hash maps and the model is a handful
//! of weights, so a single resolution is a few microseconds. The
//! `bench` subcommand wraps this same loop with worker threads and a
//! latency histogram; this example shows the raw library path.
//!
//! ```bash
//! cargo run --release -p attriq --example benchmark_throughput
//! ```

use std::time::Instant;

use attriq::{
    build_dictionary, build_graph, extract_candidates, featurize, generate_catalog,
    generate_labeled_queries, predict, train, AttributeSchema, Query, SynthConfig, TrainConfig,
};

fn main() -> attriq::Result<()> {
    let config = SynthConfig {
        item_count: 5_000,
        query_count: 1_000,
        ..SynthConfig::default()
    };
    let catalog = generate_catalog(&config)?;
    let queries = generate_labeled_queries(&catalog, &config)?;
    let schema = AttributeSchema::new(config.schema.clone())?;
    let kg = build_graph(&schema, catalog)?;
    let dict = build_dictionary(&kg, 1)?;
    let mut examples = Vec::new();
    for lq in &queries {
        let spans = extract_candidates(&Query::new(&lq.query), &dict);
        examples.push((featurize(&kg, &spans, &lq.target, &lq.candidate_value)?, lq.label));
    }
    let model = train(&schema, &examples, &TrainConfig::default())?;

    let texts: Vec<&str> = queries.iter().map(|q| q.query.as_str()).collect();
    let rounds = 20;

    let started = Instant::now();
    let mut decisions = 0u64;
    for _ in 0..rounds {
        for text in &texts {
            let spans = extract_candidates(&Query::new(*text), &dict);
            for span in &spans {
                if span.attribute == "color" {
                    let fv = featurize(&kg, &spans, "color", &span.value)?;
                    let (_, present) = predict(&model, &fv)?;
                    decisions += u64::from(present);
                }
            }
        }
    }
    let elapsed = started.elapsed();

    let total = (texts.len() * rounds) as f64;
    println!(
        "{} queries in {:.1} ms -> {:.0} queries/second ({} present decisions)",
        total as u64,
        elapsed.as_secs_f64() * 1e3,
        total / elapsed.as_secs_f64(),
        decisions
    );
    println!(
        "mean per query: {:.2} us",
        elapsed.as_secs_f64() * 1e6 / total
    );
    Ok(())
}
