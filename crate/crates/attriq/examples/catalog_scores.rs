//! The two catalog evidence scores, computed for the same color word
//! under two different anchors.
//!
//! The presence score asks: of the items carrying the anchor value,
//! what fraction carry the target attribute at all? The value score
//! asks, log-smoothed: how often do they carry one specific target
//! value? Together they separate "maroon the color of this shirt"
//! from "maroon the first word of a band name on a dvd".
//!
//! ```bash
//! cargo run -p attriq --example catalog_scores
//! ```

use attriq::{
    build_graph, featurize, presence_score, value_score, AnchorAssignment, AttributeSchema,
    CandidateSpan, Item,
};

fn main() -> attriq::Result<()> {
    let schema = AttributeSchema::new(["product_type", "brand", "color"])?;
    let mut items = Vec::new();
    for i in 0..8 {
        items.push(Item::new(
            format!("dvd-band-{i}"),
            [("product_type", vec!["dvd"]), ("brand", vec!["maroon 5"])],
        ));
    }
    items.push(Item::new(
        "dvd-maroon",
        [("product_type", vec!["dvd"]), ("color", vec!["maroon"])],
    ));
    items.push(Item::new("dvd-plain", [("product_type", vec!["dvd"])]));
    for (i, color) in ["maroon", "maroon", "maroon", "red", "blue"].iter().enumerate() {
        items.push(Item::new(
            format!("shirt-{i}"),
            [("product_type", vec!["shirt"]), ("color", vec![*color])],
        ));
    }
    let kg = build_graph(&schema, items)?;

    let anchor = |attribute: &str, value: &str| {
        vec![AnchorAssignment {
            attribute: attribute.to_string(),
            value: value.to_string(),
            confidence: 1.0,
        }]
    };

    for type_value in ["dvd", "shirt"] {
        let a = anchor("product_type", type_value);
        println!("anchored on product_type = {type_value}:");
        println!(
            "  presence of color: {:.4}",
            presence_score(&kg, &a, "color")?
        );
        println!(
            "  value score for color = maroon: {:.4}",
            value_score(&kg, &a, "color", "maroon")?
        );
        println!();
    }

    // featurize assembles both families across every non-target
    // attribute into one fixed-width vector; compare the two query
    // shapes the scores are meant to separate
    let span = |attribute: &str, value: &str, first: usize, last: usize| CandidateSpan {
        attribute: attribute.to_string(),
        value: value.to_string(),
        first_token: first,
        last_token: last,
        char_start: 0,
        char_end: 0,
    };
    let band_query = vec![
        span("brand", "maroon 5", 0, 1),
        span("color", "maroon", 0, 0),
        span("product_type", "dvd", 2, 2),
    ];
    let shirt_query = vec![span("color", "maroon", 0, 0), span("product_type", "shirt", 1, 1)];

    for (name, spans) in [("\"maroon 5 dvds\"", &band_query), ("\"maroon shirts\"", &shirt_query)]
    {
        let fv = featurize(&kg, spans, "color", "maroon")?;
        println!("feature vector for color = maroon in {name}:");
        for (attr, score) in &fv.presence_features {
            println!("  presence[{attr}] = {score:.4}");
        }
        for (attr, score) in &fv.value_features {
            println!("  value[{attr}]    = {score:.4}");
        }
        println!();
    }
    Ok(())
}
