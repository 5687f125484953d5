//! Tag a query with candidate attribute spans, then find the spans
//! that fight over the same tokens.
//!
//! "maroon 5 dvds" contains a brand ("maroon 5"), a color word
//! ("maroon") that is only there because of the brand, and a plural
//! product type ("dvds"). The dictionary matches all three; conflict
//! detection groups the two that overlap.
//!
//! ```bash
//! cargo run -p attriq --example extract_candidates
//! ```

use attriq::{
    anchors, build_dictionary, build_graph, detect_conflicts, extract_candidates,
    AttributeSchema, Item, Query,
};

fn main() -> attriq::Result<()> {
    let schema = AttributeSchema::new(["product_type", "brand", "color"])?;
    let mut items = vec![
        Item::new("shirt-0", [("product_type", vec!["shirt"]), ("color", vec!["maroon"])]),
        Item::new("dvd-plain", [("product_type", vec!["dvd"])]),
    ];
    for i in 0..3 {
        items.push(Item::new(
            format!("dvd-band-{i}"),
            [("product_type", vec!["dvd"]), ("brand", vec!["maroon 5"])],
        ));
    }
    let kg = build_graph(&schema, items)?;

    // every value with at least one item becomes a dictionary phrase,
    // along with naive plural variants of single-token phrases
    let dict = build_dictionary(&kg, 1)?;
    println!("dictionary: {} surface forms", dict.len());

    let query = Query::new("Maroon 5 DVDs");
    println!("query: {:?} -> tokens {:?}", query.raw(), query.tokens().len());

    let spans = extract_candidates(&query, &dict);
    println!();
    println!("candidate spans:");
    for span in &spans {
        println!(
            "  tokens {}..={}  {} = {:?}",
            span.first_token, span.last_token, span.attribute, span.value
        );
    }

    println!();
    println!("conflict groups (overlapping spans, different attributes):");
    for (i, group) in detect_conflicts(&spans).iter().enumerate() {
        for span in group {
            println!("  group {i}: {} = {:?}", span.attribute, span.value);
        }
    }

    // treating color as the attribute in question, the brand span is
    // an anchor: a value taken at face value that supplies evidence
    println!();
    println!("anchors for target attribute color:");
    for anchor in anchors(&spans, "color") {
        println!(
            "  {} = {:?} (confidence {})",
            anchor.attribute, anchor.value, anchor.confidence
        );
    }
    Ok(())
}
