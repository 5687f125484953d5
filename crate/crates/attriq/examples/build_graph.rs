//! Count a hand-written catalog into the co-occurrence graph and read
//! the statistics back.
//!
//! The catalog is small enough to verify every number by hand: ten
//! dvds (eight of them by the band "maroon 5", one actually maroon in
//! color, one plain) and five shirts (three maroon, one red, one
//! blue).
//!
//! ```bash
//! cargo run -p attriq --example build_graph
//! ```

use attriq::{build_graph, AttributeSchema, Item};

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

    println!("catalog: {} items", kg.item_count());
    println!();
    println!("value nodes and degrees:");
    for (attr, value, degree) in kg.iter_values() {
        println!("  {attr} = {value:<10} degree {degree}");
    }

    println!();
    println!("co-occurrence counts around product_type = dvd:");
    println!(
        "  items also carrying any brand: {}",
        kg.pair_count("product_type", "dvd", "brand")?
    );
    println!(
        "  items also carrying any color: {}",
        kg.pair_count("product_type", "dvd", "color")?
    );
    println!(
        "  items specifically maroon:     {}",
        kg.triple_count("product_type", "dvd", "color", "maroon")?
    );

    println!();
    println!("same counts around product_type = shirt:");
    println!(
        "  items also carrying any color: {}",
        kg.pair_count("product_type", "shirt", "color")?
    );
    println!(
        "  items specifically maroon:     {}",
        kg.triple_count("product_type", "shirt", "color", "maroon")?
    );

    // the asymmetry these counts encode is the whole point: a color
    // word next to "dvd" is rarely a real color, next to "shirt" it
    // usually is
    Ok(())
}
