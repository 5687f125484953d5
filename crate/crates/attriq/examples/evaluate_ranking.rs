//! How a wrongly resolved attribute damages item ranking, measured
//! with graded-relevance nDCG.
//!
//! For the query "maroon 5 dvds" the right reading is brand + type.
//! Resolving color = maroon as well (the baseline's mistake) demotes
//! every item whose color is something other than maroon — including
//! the band's own dvds once they carry any color value — and pulls
//! maroon-colored items of the wrong kind upward.
//!
//! ```bash
//! cargo run -p attriq --example evaluate_ranking
//! ```

use attriq::{
    build_graph, judgment_from_orders, ndcg_at_k, rank_items, AttributeSchema, Item, Judgment,
    RankMode,
};

fn main() -> attriq::Result<()> {
    let schema = AttributeSchema::new(["product_type", "brand", "color"])?;
    let mut items = Vec::new();
    for i in 0..4 {
        items.push(Item::new(
            format!("band-dvd-{i}"),
            [("product_type", vec!["dvd"]), ("brand", vec!["maroon 5"])],
        ));
    }
    // a special edition with a colored cover: still the right answer,
    // but it contradicts a resolved color = maroon
    items.push(Item::new(
        "band-dvd-red",
        [
            ("product_type", vec!["dvd"]),
            ("brand", vec!["maroon 5"]),
            ("color", vec!["red"]),
        ],
    ));
    items.push(Item::new(
        "maroon-sofa-dvd",
        [("product_type", vec!["dvd"]), ("color", vec!["maroon"])],
    ));
    items.push(Item::new("plain-dvd", [("product_type", vec!["dvd"])]));
    let kg = build_graph(&schema, items.clone())?;

    // relevance: band dvds were what people ordered for this query
    let judgments: Vec<Judgment> = items
        .iter()
        .filter(|item| item.has_value("brand", "maroon 5"))
        .map(|item| Judgment {
            query: "maroon 5 dvds".to_string(),
            item_id: item.id().to_string(),
            gain: judgment_from_orders(3),
        })
        .collect();

    let right = vec![
        ("brand".to_string(), "maroon 5".to_string()),
        ("product_type".to_string(), "dvd".to_string()),
    ];
    let mut wrong = right.clone();
    wrong.push(("color".to_string(), "maroon".to_string()));

    for (name, resolved) in [("brand + type", &right), ("brand + type + color", &wrong)] {
        let ranking = rank_items(&kg, &items, resolved, RankMode::Boost);
        let ndcg = ndcg_at_k(&ranking, &judgments, 5);
        println!("resolved as {name}: nDCG@5 = {ndcg:.4}");
        for (pos, id) in ranking.iter().enumerate().take(5) {
            println!("  {}. {id}", pos + 1);
        }
        println!();
    }

    println!("filter mode drops contradicting items instead of demoting them:");
    let ranking = rank_items(&kg, &items, &wrong, RankMode::Filter);
    println!("  {} of {} items survive", ranking.len(), items.len());
    Ok(())
}
