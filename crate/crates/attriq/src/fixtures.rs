//! Small hand-built catalog shared across unit tests.
//!
//! The shape is chosen so every interesting count is checkable by hand:
//!
//! - 10 dvds: 8 branded "maroon 5" (no color), 1 maroon-colored
//!   (no brand), 1 with neither — so `degree(product_type, dvd) = 10`,
//!   `pair(product_type, dvd, brand) = 8`, and
//!   `triple(product_type, dvd, color, maroon) = 1`.
//! - 5 shirts, all colored: 3 maroon, 1 red, 1 blue — so the
//!   shirt -> maroon association is strong (log 3 / log 5) while the
//!   dvd -> maroon association is weak (log 1 / log 10 = 0).

use std::path::Path;

use crate::catalog::{save_catalog, AttributeSchema, Item};

/// Schema and items of the hand-checked fixture catalog.
pub fn fixture_f() -> (AttributeSchema, Vec<Item>) {
    let schema = AttributeSchema::new(["product_type", "brand", "color"]).unwrap();
    let mut items = Vec::new();

    for i in 0..8 {
        items.push(Item::new(
            format!("dvd-band-{i}"),
            [
                ("product_type", vec!["dvd"]),
                ("brand", vec!["maroon 5"]),
            ],
        ));
    }
    items.push(Item::new(
        "dvd-maroon",
        [("product_type", vec!["dvd"]), ("color", vec!["maroon"])],
    ));
    items.push(Item::new("dvd-plain", [("product_type", vec!["dvd"])]));

    for (i, color) in ["maroon", "maroon", "maroon", "red", "blue"]
        .iter()
        .enumerate()
    {
        items.push(Item::new(
            format!("shirt-{i}"),
            [("product_type", vec!["shirt"]), ("color", vec![*color])],
        ));
    }

    (schema, items)
}

/// Write `items` as a catalog file, panicking on failure (test helper).
pub fn write_catalog_file(items: &[Item], path: &Path) {
    save_catalog(items, path).unwrap();
}
