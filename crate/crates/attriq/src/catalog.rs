//! Catalog ingestion and the co-occurrence knowledge graph.
//!
//! The graph stores three families of counts over the catalog:
//!
//! - `degree(n, x)` — items whose attribute `n` carries value `x`
//! - `pair_count(n, x, m)` — of those, items that have *any* value for `m`
//! - `triple_count(n, x, m, l)` — of those, items with `m = l`
//!
//! Only observed keys are stored; lookups of unseen keys return 0. After
//! [`build_graph`] returns the graph is immutable and safe to share across
//! threads.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::normalize::normalize_phrase;

/// Current graph snapshot format version.
const GRAPH_FORMAT_VERSION: u32 = 1;
const GRAPH_FORMAT_NAME: &str = "attriq-graph";

/// Ordered list of attribute identifiers the catalog is described by.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttributeSchema {
    attributes: Vec<String>,
    index: HashMap<String, usize>,
}

impl AttributeSchema {
    /// Build a schema from an ordered list of attribute identifiers.
    ///
    /// Identifiers must be unique and non-empty, and the list itself
    /// must be non-empty.
    pub fn new<I, S>(attributes: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let attributes: Vec<String> = attributes.into_iter().map(Into::into).collect();
        if attributes.is_empty() {
            return Err(Error::InvalidSchema("attribute list is empty".into()));
        }
        let mut index = HashMap::with_capacity(attributes.len());
        for (i, attr) in attributes.iter().enumerate() {
            if attr.is_empty() {
                return Err(Error::InvalidSchema(format!(
                    "attribute at position {i} is empty"
                )));
            }
            if index.insert(attr.clone(), i).is_some() {
                return Err(Error::InvalidSchema(format!("duplicate attribute {attr:?}")));
            }
        }
        Ok(AttributeSchema { attributes, index })
    }

    /// Number of attributes.
    pub fn len(&self) -> usize {
        self.attributes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.attributes.is_empty()
    }

    /// Position of `attr` in schema order, if present.
    pub fn index_of(&self, attr: &str) -> Option<usize> {
        self.index.get(attr).copied()
    }

    /// Position of `attr`, or an [`Error::UnknownAttribute`].
    pub fn require(&self, attr: &str) -> Result<usize> {
        self.index_of(attr)
            .ok_or_else(|| Error::UnknownAttribute(attr.to_string()))
    }

    /// Attribute names in schema order.
    pub fn attributes(&self) -> &[String] {
        &self.attributes
    }

    /// Stable hex digest of the ordered attribute list.
    ///
    /// Models carry this fingerprint so they can refuse to score feature
    /// vectors produced under a different schema.
    pub fn fingerprint(&self) -> String {
        let mut hasher = Sha256::new();
        for attr in &self.attributes {
            hasher.update(attr.as_bytes());
            hasher.update([0u8]);
        }
        hex_digest(hasher)
    }
}

fn hex_digest(hasher: Sha256) -> String {
    let bytes = hasher.finalize();
    let mut out = String::with_capacity(bytes.len() * 2);
    for b in bytes {
        out.push_str(&format!("{b:02x}"));
    }
    out
}

/// One catalog item: an opaque id plus normalized values per attribute.
///
/// An attribute is "present" on the item iff its value set is non-empty;
/// construction drops values that normalize to the empty string, and
/// attributes left with no values.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Item {
    item_id: String,
    values: BTreeMap<String, BTreeSet<String>>,
}

impl Item {
    /// Build an item, normalizing every value string.
    pub fn new<I, A, V>(item_id: impl Into<String>, values: I) -> Self
    where
        I: IntoIterator<Item = (A, V)>,
        A: Into<String>,
        V: IntoIterator,
        V::Item: AsRef<str>,
    {
        let mut normalized: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
        for (attr, vals) in values {
            let set = normalized.entry(attr.into()).or_default();
            for v in vals {
                let norm = normalize_phrase(v.as_ref());
                if !norm.is_empty() {
                    set.insert(norm);
                }
            }
        }
        normalized.retain(|_, set| !set.is_empty());
        Item {
            item_id: item_id.into(),
            values: normalized,
        }
    }

    pub fn id(&self) -> &str {
        &self.item_id
    }

    /// Normalized values per attribute, attributes with no values omitted.
    pub fn values(&self) -> &BTreeMap<String, BTreeSet<String>> {
        &self.values
    }

    /// Whether the item carries value `x` for attribute `attr`.
    pub fn has_value(&self, attr: &str, x: &str) -> bool {
        self.values.get(attr).is_some_and(|set| set.contains(x))
    }

    /// Whether the item has any value for `attr`.
    pub fn has_attribute(&self, attr: &str) -> bool {
        self.values.contains_key(attr)
    }

    fn validate_against(&self, schema: &AttributeSchema) -> Result<()> {
        for attr in self.values.keys() {
            schema.require(attr)?;
        }
        Ok(())
    }
}

/// Wire format of one catalog line.
#[derive(Serialize, Deserialize)]
struct ItemRecord {
    item_id: String,
    attributes: BTreeMap<String, Vec<String>>,
}

/// Streaming reader over a newline-delimited catalog file.
///
/// Yields one [`Item`] per line with normalization applied; parse errors
/// carry the 1-based line number.
pub struct CatalogReader {
    lines: std::io::Lines<BufReader<File>>,
    schema: AttributeSchema,
    line_no: usize,
}

impl Iterator for CatalogReader {
    type Item = Result<Item>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            let line = match self.lines.next()? {
                Ok(l) => l,
                Err(e) => return Some(Err(e.into())),
            };
            self.line_no += 1;
            if line.trim().is_empty() {
                continue;
            }
            return Some(self.parse_line(&line));
        }
    }
}

impl CatalogReader {
    fn parse_line(&self, line: &str) -> Result<Item> {
        let record: ItemRecord =
            serde_json::from_str(line).map_err(|e| Error::MalformedRecord {
                line: self.line_no,
                message: e.to_string(),
            })?;
        for attr in record.attributes.keys() {
            if self.schema.index_of(attr).is_none() {
                return Err(Error::MalformedRecord {
                    line: self.line_no,
                    message: format!("unknown attribute {attr:?}"),
                });
            }
        }
        Ok(Item::new(record.item_id, record.attributes))
    }
}

/// Open a catalog file for streaming reads.
pub fn load_catalog(path: &Path, schema: &AttributeSchema) -> Result<CatalogReader> {
    let file = File::open(path)?;
    Ok(CatalogReader {
        lines: BufReader::new(file).lines(),
        schema: schema.clone(),
        line_no: 0,
    })
}

/// Write items to a catalog file, one JSON record per line.
pub fn save_catalog(items: &[Item], path: &Path) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    for item in items {
        let record = ItemRecord {
            item_id: item.item_id.clone(),
            attributes: item
                .values
                .iter()
                .map(|(a, vs)| (a.clone(), vs.iter().cloned().collect()))
                .collect(),
        };
        serde_json::to_writer(&mut out, &record)
            .map_err(|e| Error::Io(std::io::Error::other(e)))?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

/// Per-(attribute, value) count block.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
struct ValueStats {
    degree: u64,
    /// Co-presence count per other attribute, indexed by schema position.
    pair: Vec<u64>,
    /// Per other attribute: value -> co-occurrence count.
    triple: Vec<HashMap<String, u64>>,
}

impl ValueStats {
    fn new(n_attrs: usize) -> Self {
        ValueStats {
            degree: 0,
            pair: vec![0; n_attrs],
            triple: vec![HashMap::new(); n_attrs],
        }
    }
}

/// Immutable co-occurrence statistics over attribute-value nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct KnowledgeGraph {
    schema: AttributeSchema,
    item_count: u64,
    /// Outer index: anchor attribute position in the schema.
    stats: Vec<HashMap<String, ValueStats>>,
}

impl KnowledgeGraph {
    pub fn schema(&self) -> &AttributeSchema {
        &self.schema
    }

    /// Total number of items counted into the graph.
    pub fn item_count(&self) -> u64 {
        self.item_count
    }

    /// Number of items with `n = x`; 0 when the pair was never observed.
    pub fn degree(&self, n: &str, x: &str) -> Result<u64> {
        let n_idx = self.schema.require(n)?;
        Ok(self.stats[n_idx].get(x).map_or(0, |s| s.degree))
    }

    /// Number of items with `n = x` that have any value for `m`.
    pub fn pair_count(&self, n: &str, x: &str, m: &str) -> Result<u64> {
        let n_idx = self.schema.require(n)?;
        let m_idx = self.schema.require(m)?;
        if n_idx == m_idx {
            return Err(Error::SelfAnchor(n.to_string()));
        }
        Ok(self.stats[n_idx].get(x).map_or(0, |s| s.pair[m_idx]))
    }

    /// Number of items with `n = x` and `m = l`.
    pub fn triple_count(&self, n: &str, x: &str, m: &str, l: &str) -> Result<u64> {
        let n_idx = self.schema.require(n)?;
        let m_idx = self.schema.require(m)?;
        if n_idx == m_idx {
            return Err(Error::SelfAnchor(n.to_string()));
        }
        Ok(self
            .stats[n_idx]
            .get(x)
            .map_or(0, |s| s.triple[m_idx].get(l).copied().unwrap_or(0)))
    }

    /// Every observed (attribute, value, degree) node.
    ///
    /// Iteration order is unspecified; callers that emit artifacts must
    /// sort.
    pub fn iter_values(&self) -> impl Iterator<Item = (&str, &str, u64)> + '_ {
        self.schema
            .attributes()
            .iter()
            .enumerate()
            .flat_map(move |(n_idx, attr)| {
                self.stats[n_idx]
                    .iter()
                    .map(move |(value, s)| (attr.as_str(), value.as_str(), s.degree))
            })
    }
}

/// Count a stream of already-validated items into a graph.
///
/// Counts are a single exhaustive pass: per item, every present
/// (anchor, value) node gains one degree, one pair count per other
/// present attribute, and one triple count per value of that attribute.
pub fn build_graph_stream<I>(schema: &AttributeSchema, items: I) -> Result<KnowledgeGraph>
where
    I: IntoIterator<Item = Result<Item>>,
{
    let n_attrs = schema.len();
    let mut stats: Vec<HashMap<String, ValueStats>> = vec![HashMap::new(); n_attrs];
    let mut item_count = 0u64;

    for item in items {
        let item = item?;
        item.validate_against(schema)?;
        item_count += 1;

        // (attr index, values) for attributes present on this item
        let present: Vec<(usize, &BTreeSet<String>)> = item
            .values()
            .iter()
            .map(|(attr, vals)| (schema.index_of(attr).expect("validated"), vals))
            .collect();

        for &(n_idx, xs) in &present {
            for x in xs {
                let entry = stats[n_idx]
                    .entry(x.clone())
                    .or_insert_with(|| ValueStats::new(n_attrs));
                entry.degree += 1;
                for &(m_idx, ls) in &present {
                    if m_idx == n_idx {
                        continue;
                    }
                    entry.pair[m_idx] += 1;
                    for l in ls {
                        *entry.triple[m_idx].entry(l.clone()).or_insert(0) += 1;
                    }
                }
            }
        }
    }

    Ok(KnowledgeGraph {
        schema: schema.clone(),
        item_count,
        stats,
    })
}

/// [`build_graph_stream`] over in-memory items.
pub fn build_graph<I>(schema: &AttributeSchema, items: I) -> Result<KnowledgeGraph>
where
    I: IntoIterator<Item = Item>,
{
    build_graph_stream(schema, items.into_iter().map(Ok))
}

/// Serialized snapshot layout. Nested BTreeMaps keep the file byte-stable
/// across runs.
#[derive(Serialize, Deserialize)]
struct GraphSnapshot {
    format: String,
    format_version: u32,
    schema: Vec<String>,
    item_count: u64,
    degree: BTreeMap<String, BTreeMap<String, u64>>,
    pair: BTreeMap<String, BTreeMap<String, BTreeMap<String, u64>>>,
    triple: BTreeMap<String, BTreeMap<String, BTreeMap<String, BTreeMap<String, u64>>>>,
}

/// Write a lossless snapshot of the graph.
pub fn save_graph(kg: &KnowledgeGraph, path: &Path) -> Result<()> {
    let mut degree: BTreeMap<String, BTreeMap<String, u64>> = BTreeMap::new();
    let mut pair: BTreeMap<String, BTreeMap<String, BTreeMap<String, u64>>> = BTreeMap::new();
    let mut triple: BTreeMap<String, BTreeMap<String, BTreeMap<String, BTreeMap<String, u64>>>> =
        BTreeMap::new();

    for (n_idx, attr) in kg.schema.attributes().iter().enumerate() {
        for (x, s) in &kg.stats[n_idx] {
            degree
                .entry(attr.clone())
                .or_default()
                .insert(x.clone(), s.degree);
            for (m_idx, m) in kg.schema.attributes().iter().enumerate() {
                if m_idx == n_idx {
                    continue;
                }
                if s.pair[m_idx] > 0 {
                    pair.entry(attr.clone())
                        .or_default()
                        .entry(x.clone())
                        .or_default()
                        .insert(m.clone(), s.pair[m_idx]);
                }
                if !s.triple[m_idx].is_empty() {
                    let by_value: BTreeMap<String, u64> = s.triple[m_idx]
                        .iter()
                        .map(|(l, c)| (l.clone(), *c))
                        .collect();
                    triple
                        .entry(attr.clone())
                        .or_default()
                        .entry(x.clone())
                        .or_default()
                        .insert(m.clone(), by_value);
                }
            }
        }
    }

    let snapshot = GraphSnapshot {
        format: GRAPH_FORMAT_NAME.to_string(),
        format_version: GRAPH_FORMAT_VERSION,
        schema: kg.schema.attributes().to_vec(),
        item_count: kg.item_count,
        degree,
        pair,
        triple,
    };

    let mut out = BufWriter::new(File::create(path)?);
    serde_json::to_writer(&mut out, &snapshot)
        .map_err(|e| Error::Io(std::io::Error::other(e)))?;
    out.write_all(b"\n")?;
    out.flush()?;
    Ok(())
}

/// Load a snapshot written by [`save_graph`].
pub fn load_graph(path: &Path) -> Result<KnowledgeGraph> {
    let file = File::open(path)?;
    let snapshot: GraphSnapshot = serde_json::from_reader(BufReader::new(file))
        .map_err(|e| Error::corrupt(path, e.to_string()))?;

    if snapshot.format != GRAPH_FORMAT_NAME {
        return Err(Error::corrupt(
            path,
            format!("not a graph snapshot (format {:?})", snapshot.format),
        ));
    }
    if snapshot.format_version != GRAPH_FORMAT_VERSION {
        return Err(Error::VersionMismatch {
            path: path.display().to_string(),
            found: snapshot.format_version,
            expected: GRAPH_FORMAT_VERSION,
        });
    }

    let schema = AttributeSchema::new(snapshot.schema)?;
    let n_attrs = schema.len();
    let mut stats: Vec<HashMap<String, ValueStats>> = vec![HashMap::new(); n_attrs];

    for (attr, by_value) in &snapshot.degree {
        let n_idx = schema
            .index_of(attr)
            .ok_or_else(|| Error::corrupt(path, format!("degree key {attr:?} not in schema")))?;
        for (x, d) in by_value {
            stats[n_idx]
                .entry(x.clone())
                .or_insert_with(|| ValueStats::new(n_attrs))
                .degree = *d;
        }
    }
    for (attr, by_value) in &snapshot.pair {
        let n_idx = schema
            .index_of(attr)
            .ok_or_else(|| Error::corrupt(path, format!("pair key {attr:?} not in schema")))?;
        for (x, by_m) in by_value {
            let entry = stats[n_idx]
                .entry(x.clone())
                .or_insert_with(|| ValueStats::new(n_attrs));
            for (m, c) in by_m {
                let m_idx = schema
                    .index_of(m)
                    .ok_or_else(|| Error::corrupt(path, format!("pair key {m:?} not in schema")))?;
                entry.pair[m_idx] = *c;
            }
        }
    }
    for (attr, by_value) in &snapshot.triple {
        let n_idx = schema
            .index_of(attr)
            .ok_or_else(|| Error::corrupt(path, format!("triple key {attr:?} not in schema")))?;
        for (x, by_m) in by_value {
            let entry = stats[n_idx]
                .entry(x.clone())
                .or_insert_with(|| ValueStats::new(n_attrs));
            for (m, by_l) in by_m {
                let m_idx = schema.index_of(m).ok_or_else(|| {
                    Error::corrupt(path, format!("triple key {m:?} not in schema"))
                })?;
                for (l, c) in by_l {
                    entry.triple[m_idx].insert(l.clone(), *c);
                }
            }
        }
    }

    Ok(KnowledgeGraph {
        schema,
        item_count: snapshot.item_count,
        stats,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{fixture_f, write_catalog_file};
    use tempfile::tempdir;

    /// Brute-force counting oracle: nested loops over items, no graph.
    fn oracle_degree(items: &[Item], n: &str, x: &str) -> u64 {
        items.iter().filter(|it| it.has_value(n, x)).count() as u64
    }

    fn oracle_pair(items: &[Item], n: &str, x: &str, m: &str) -> u64 {
        items
            .iter()
            .filter(|it| it.has_value(n, x) && it.has_attribute(m))
            .count() as u64
    }

    fn oracle_triple(items: &[Item], n: &str, x: &str, m: &str, l: &str) -> u64 {
        items
            .iter()
            .filter(|it| it.has_value(n, x) && it.has_value(m, l))
            .count() as u64
    }

    /// Compare every stored count in `kg` against the oracle, and assert
    /// the monotonicity chain triple <= pair <= degree <= item_count.
    fn assert_graph_matches_oracle(kg: &KnowledgeGraph, items: &[Item]) {
        let attrs = kg.schema().attributes().to_vec();
        for (n, x, d) in kg.iter_values() {
            assert_eq!(d, oracle_degree(items, n, x), "degree({n},{x})");
            assert!(d <= kg.item_count());
            for m in &attrs {
                if m == n {
                    continue;
                }
                let p = kg.pair_count(n, x, m).unwrap();
                assert_eq!(p, oracle_pair(items, n, x, m), "pair({n},{x},{m})");
                assert!(p <= d);
                let mut triple_sum = 0;
                for item in items {
                    if let Some(ls) = item.values().get(m) {
                        for l in ls {
                            let t = kg.triple_count(n, x, m, l).unwrap();
                            assert_eq!(t, oracle_triple(items, n, x, m, l));
                            assert!(t <= p);
                        }
                    }
                }
                // multi-valued attributes can push the sum above pair_count
                for item in items.iter().filter(|it| it.has_value(n, x)) {
                    if item.has_attribute(m) {
                        triple_sum += item.values()[m].len() as u64;
                    }
                }
                let _ = triple_sum;
            }
        }
    }

    #[test]
    fn schema_rejects_duplicates_and_empty() {
        assert!(AttributeSchema::new(["a", "a"]).is_err());
        assert!(AttributeSchema::new(Vec::<String>::new()).is_err());
        assert!(AttributeSchema::new(["a", ""]).is_err());
        let s = AttributeSchema::new(["product_type", "brand", "color"]).unwrap();
        assert_eq!(s.len(), 3);
        assert_eq!(s.index_of("brand"), Some(1));
    }

    #[test]
    fn schema_fingerprint_is_order_sensitive() {
        let a = AttributeSchema::new(["x", "y"]).unwrap();
        let b = AttributeSchema::new(["y", "x"]).unwrap();
        assert_ne!(a.fingerprint(), b.fingerprint());
        assert_eq!(a.fingerprint(), AttributeSchema::new(["x", "y"]).unwrap().fingerprint());
    }

    #[test]
    fn item_normalizes_values() {
        let item = Item::new("i1", [("color", vec!["  Maroon "])]);
        assert!(item.has_value("color", "maroon"));
        let empty = Item::new("i2", [("color", vec!["!!!"])]);
        assert!(!empty.has_attribute("color"));
    }

    #[test]
    fn load_catalog_single_record() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("catalog.jsonl");
        std::fs::write(
            &path,
            "{\"item_id\":\"i1\",\"attributes\":{\"color\":[\"Maroon\"]}}\n",
        )
        .unwrap();
        let schema = AttributeSchema::new(["product_type", "brand", "color"]).unwrap();
        let items: Vec<Item> = load_catalog(&path, &schema)
            .unwrap()
            .collect::<Result<_>>()
            .unwrap();
        assert_eq!(items.len(), 1);
        assert!(items[0].has_value("color", "maroon"));
    }

    #[test]
    fn load_catalog_empty_file() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("catalog.jsonl");
        std::fs::write(&path, "").unwrap();
        let schema = AttributeSchema::new(["color"]).unwrap();
        let items: Vec<Item> = load_catalog(&path, &schema)
            .unwrap()
            .collect::<Result<_>>()
            .unwrap();
        assert!(items.is_empty());
    }

    #[test]
    fn load_catalog_unknown_attribute_names_the_key() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("catalog.jsonl");
        std::fs::write(
            &path,
            "{\"item_id\":\"i1\",\"attributes\":{\"sku_weight\":[\"3\"]}}\n",
        )
        .unwrap();
        let schema = AttributeSchema::new(["color"]).unwrap();
        let err = load_catalog(&path, &schema)
            .unwrap()
            .next()
            .unwrap()
            .unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("sku_weight"), "error should name the key: {msg}");
        assert!(msg.contains("line 1"), "error should carry the line: {msg}");
    }

    #[test]
    fn load_catalog_malformed_line_number() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("catalog.jsonl");
        std::fs::write(
            &path,
            "{\"item_id\":\"i1\",\"attributes\":{}}\nnot json\n",
        )
        .unwrap();
        let schema = AttributeSchema::new(["color"]).unwrap();
        let results: Vec<Result<Item>> = load_catalog(&path, &schema).unwrap().collect();
        assert!(results[0].is_ok());
        let msg = results[1].as_ref().unwrap_err().to_string();
        assert!(msg.contains("line 2"), "got: {msg}");
    }

    #[test]
    fn fixture_counts_match_spec() {
        let (schema, items) = fixture_f();
        let kg = build_graph(&schema, items.clone()).unwrap();
        assert_eq!(kg.degree("product_type", "dvd").unwrap(), 10);
        assert_eq!(kg.pair_count("product_type", "dvd", "brand").unwrap(), 8);
        assert_eq!(kg.triple_count("product_type", "dvd", "color", "maroon").unwrap(), 1);
        assert_eq!(kg.degree("product_type", "shirt").unwrap(), 5);
        assert_eq!(kg.pair_count("product_type", "shirt", "color").unwrap(), 5);
        assert_eq!(kg.triple_count("product_type", "shirt", "color", "maroon").unwrap(), 3);
        assert_eq!(kg.item_count(), 15);
        assert_graph_matches_oracle(&kg, &items);
    }

    #[test]
    fn empty_stream_builds_empty_graph() {
        let schema = AttributeSchema::new(["a", "b"]).unwrap();
        let kg = build_graph(&schema, Vec::new()).unwrap();
        assert_eq!(kg.item_count(), 0);
        assert_eq!(kg.iter_values().count(), 0);
        assert_eq!(kg.degree("a", "anything").unwrap(), 0);
    }

    #[test]
    fn single_item_counts() {
        let schema = AttributeSchema::new(["brand", "color"]).unwrap();
        let item = Item::new("i1", [("brand", vec!["maroon 5"]), ("color", vec!["red"])]);
        let kg = build_graph(&schema, [item]).unwrap();
        assert_eq!(kg.degree("brand", "maroon 5").unwrap(), 1);
        assert_eq!(kg.triple_count("brand", "maroon 5", "color", "red").unwrap(), 1);
    }

    #[test]
    fn degree_of_unseen_value_is_zero() {
        let (schema, items) = fixture_f();
        let kg = build_graph(&schema, items).unwrap();
        assert_eq!(kg.degree("color", "chartreuse").unwrap(), 0);
    }

    #[test]
    fn degree_of_unknown_attribute_errors() {
        let (schema, items) = fixture_f();
        let kg = build_graph(&schema, items).unwrap();
        assert!(matches!(
            kg.degree("nonexistent_attr", "x"),
            Err(Error::UnknownAttribute(_))
        ));
    }

    #[test]
    fn self_anchor_pair_count_errors() {
        let (schema, items) = fixture_f();
        let kg = build_graph(&schema, items).unwrap();
        assert!(matches!(
            kg.pair_count("brand", "maroon 5", "brand"),
            Err(Error::SelfAnchor(_))
        ));
    }

    #[test]
    fn build_rejects_item_outside_schema() {
        let schema = AttributeSchema::new(["color"]).unwrap();
        let item = Item::new("i1", [("brand", vec!["x"])]);
        assert!(build_graph(&schema, [item]).is_err());
    }

    #[test]
    fn build_is_order_invariant() {
        let (schema, mut items) = fixture_f();
        let forward = build_graph(&schema, items.clone()).unwrap();
        items.reverse();
        let backward = build_graph(&schema, items.clone()).unwrap();
        assert_eq!(forward, backward);
        // and a rotation
        items.rotate_left(4);
        assert_eq!(forward, build_graph(&schema, items).unwrap());
    }

    #[test]
    fn snapshot_round_trips_fixture() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("graph.json");
        let (schema, items) = fixture_f();
        let kg = build_graph(&schema, items).unwrap();
        save_graph(&kg, &path).unwrap();
        let loaded = load_graph(&path).unwrap();
        assert_eq!(kg, loaded);
    }

    #[test]
    fn snapshot_round_trips_empty_graph() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("graph.json");
        let schema = AttributeSchema::new(["a", "b"]).unwrap();
        let kg = build_graph(&schema, Vec::new()).unwrap();
        save_graph(&kg, &path).unwrap();
        assert_eq!(kg, load_graph(&path).unwrap());
    }

    #[test]
    fn truncated_snapshot_is_corrupt() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("graph.json");
        let (schema, items) = fixture_f();
        let kg = build_graph(&schema, items).unwrap();
        save_graph(&kg, &path).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        std::fs::write(&path, &bytes[..bytes.len() / 2]).unwrap();
        assert!(matches!(load_graph(&path), Err(Error::Corrupt { .. })));
    }

    #[test]
    fn future_version_snapshot_is_rejected() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("graph.json");
        let (schema, items) = fixture_f();
        let kg = build_graph(&schema, items).unwrap();
        save_graph(&kg, &path).unwrap();
        let text = std::fs::read_to_string(&path)
            .unwrap()
            .replace("\"format_version\":1", "\"format_version\":99");
        std::fs::write(&path, text).unwrap();
        assert!(matches!(load_graph(&path), Err(Error::VersionMismatch { .. })));
    }

    #[test]
    fn catalog_file_round_trips_fixture() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("catalog.jsonl");
        let (schema, items) = fixture_f();
        write_catalog_file(&items, &path);
        let loaded: Vec<Item> = load_catalog(&path, &schema)
            .unwrap()
            .collect::<Result<_>>()
            .unwrap();
        assert_eq!(items, loaded);
    }
}
