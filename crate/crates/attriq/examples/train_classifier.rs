//! Train the presence classifier on a synthetic corpus, watching the
//! loss fall, then inspect what it learned.
//!
//! The model is a two-class logistic regression over the catalog
//! evidence scores. With the default corpus the decisive signal is the
//! presence score under the product-type anchor: color-bearing types
//! push the probability up, colorless ones pull it down.
//!
//! ```bash
//! cargo run -p attriq --example train_classifier
//! ```

use attriq::{
    build_dictionary, build_graph, extract_candidates, featurize, generate_catalog,
    generate_labeled_queries, model::train_with_history, predict, AttributeSchema, Query,
    SynthConfig, TrainConfig,
};

fn main() -> attriq::Result<()> {
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

    let mut examples = Vec::with_capacity(queries.len());
    for lq in &queries {
        let spans = extract_candidates(&Query::new(&lq.query), &dict);
        let fv = featurize(&kg, &spans, &lq.target, &lq.candidate_value)?;
        examples.push((fv, lq.label));
    }

    let train_config = TrainConfig::default();
    let (model, history) = train_with_history(&schema, &examples, &train_config)?;

    println!("trained on {} examples, {} epochs", examples.len(), train_config.epochs);
    println!("loss curve (every 400th epoch):");
    for (epoch, loss) in history.iter().enumerate().step_by(400) {
        println!("  epoch {epoch:>4}: {loss:.6}");
    }
    println!("  final:      {:.6}", history.last().unwrap());

    println!();
    println!("learned weights (presence scores first, then value scores):");
    println!("  {:?}", model.weights);
    println!("  bias {:.4}, threshold {}", model.bias, model.threshold);

    // score both kinds of query: a genuine color and a brand-induced one
    println!();
    for (fv, label) in examples.iter().take(6) {
        let (p, present) = predict(&model, fv)?;
        println!(
            "  candidate {:?}: p = {p:.3}, predicted {}, labeled {}",
            fv.candidate_value,
            if present { "present" } else { "absent" },
            if *label { "present" } else { "absent" },
        );
    }
    Ok(())
}
