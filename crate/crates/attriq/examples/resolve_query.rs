//! The whole framework against one adversarial query, next to the
//! baseline that gets it wrong.
//!
//! The query mentions a brand whose first word is a color. Dictionary
//! lookup alone asserts the color is present; the classifier sees
//! that items carrying this brand essentially never have a color and
//! says absent.
//!
//! ```bash
//! cargo run -p attriq --example resolve_query
//! ```

use attriq::{
    baseline_predict, build_dictionary, build_graph, detect_conflicts, extract_candidates,
    featurize, generate_catalog, generate_labeled_queries, predict, train, AttributeSchema,
    Query, SynthConfig, TrainConfig,
};

fn main() -> attriq::Result<()> {
    // corpus + trained model, all in memory
    let config = SynthConfig {
        item_count: 3_000,
        query_count: 600,
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

    // the canonical adversarial shape: a color-embedding brand on a
    // product type that rarely has colors at all — plus a genuine
    // color query for contrast
    let absent = queries
        .iter()
        .find(|q| !q.label && q.query.trim_end_matches('s').ends_with("dvd"))
        .unwrap();
    let present = queries.iter().find(|q| q.label).unwrap();

    for lq in [absent, present] {
        let query = Query::new(&lq.query);
        let spans = extract_candidates(&query, &dict);
        println!("query {:?}", lq.query);
        for span in &spans {
            println!("  span: {} = {:?} (tokens {}..={})", span.attribute, span.value, span.first_token, span.last_token);
        }
        let conflicts = detect_conflicts(&spans);
        println!("  conflict groups: {}", conflicts.len());

        let fv = featurize(&kg, &spans, "color", &lq.candidate_value)?;
        let (p, framework_says) = predict(&model, &fv)?;
        let baseline_says = baseline_predict(&spans, "color");
        println!(
            "  is {:?} really a color here? baseline: {:<7} framework: {:<7} (p = {p:.3}, truth: {})",
            lq.candidate_value,
            if baseline_says { "present" } else { "absent" },
            if framework_says { "present" } else { "absent" },
            if lq.label { "present" } else { "absent" },
        );
        println!();
    }

    // and over the whole corpus, not just the showcase pair
    let mut framework_correct = 0;
    let mut baseline_correct = 0;
    for (lq, (fv, label)) in queries.iter().zip(&examples) {
        let spans = extract_candidates(&Query::new(&lq.query), &dict);
        let (_, fw) = predict(&model, fv)?;
        framework_correct += usize::from(fw == *label);
        baseline_correct += usize::from(baseline_predict(&spans, "color") == *label);
    }
    println!(
        "decision accuracy over {} queries: framework {:.3}, baseline {:.3}",
        queries.len(),
        framework_correct as f64 / queries.len() as f64,
        baseline_correct as f64 / queries.len() as f64,
    );
    Ok(())
}
