//! Generate a seeded synthetic corpus and look at what makes it
//! adversarial.
//!
//! Value popularity follows a power law, and half the brand
//! vocabulary embeds a color word as its first token — so color words
//! routinely show up in queries that are not about color at all.
//! Rerunning with the same seed reproduces the corpus byte for byte.
//!
//! ```bash
//! cargo run -p attriq --example synthesize_corpus
//! ```

use std::collections::BTreeMap;

use attriq::{generate_catalog, generate_judgments, generate_labeled_queries, SynthConfig};

fn main() -> attriq::Result<()> {
    let config = SynthConfig {
        item_count: 3_000,
        query_count: 600,
        ..SynthConfig::default()
    };

    let catalog = generate_catalog(&config)?;
    println!("catalog: {} items under schema {:?}", catalog.len(), config.schema);

    let mut type_counts: BTreeMap<&str, usize> = BTreeMap::new();
    let mut conflicted_brand_items = 0;
    for item in &catalog {
        if let Some(types) = item.values().get("product_type") {
            for t in types {
                *type_counts.entry(t.as_str()).or_insert(0) += 1;
            }
        }
        if let Some(brands) = item.values().get("brand") {
            // conflicted brands look like "maroon 2": color word first
            if brands.iter().any(|b| b.split(' ').nth(1).is_some_and(|t| t.parse::<u32>().is_ok()))
            {
                conflicted_brand_items += 1;
            }
        }
    }
    let mut by_count: Vec<_> = type_counts.into_iter().collect();
    by_count.sort_by(|a, b| b.1.cmp(&a.1));
    println!("most common product types (power-law head):");
    for (t, n) in by_count.iter().take(4) {
        println!("  {t:<10} {n} items");
    }
    println!("items with a color-embedding brand: {conflicted_brand_items}");

    let queries = generate_labeled_queries(&catalog, &config)?;
    let absent = queries.iter().filter(|q| !q.label).count();
    println!();
    println!(
        "queries: {} total, {} present / {} absent",
        queries.len(),
        queries.len() - absent,
        absent
    );
    println!("a few of each:");
    for lq in queries.iter().filter(|q| q.label).take(3) {
        println!("  present: {:?} (color really is {:?})", lq.query, lq.gold_value.as_deref().unwrap());
    }
    for lq in queries.iter().filter(|q| !q.label).take(3) {
        println!("  absent:  {:?} ({:?} belongs to the brand)", lq.query, lq.candidate_value);
    }

    let judgments = generate_judgments(&catalog, &queries, &config)?;
    println!();
    println!("judgments: {} (query, item, orders) rows", judgments.len());

    // determinism: the same config yields the same corpus
    let again = generate_catalog(&config)?;
    println!("same seed reproduces the catalog: {}", again == catalog);
    Ok(())
}
