//! Seeded synthetic catalogs and labeled query sets with controlled
//! attribute conflicts.
//!
//! The generator builds a three-role world: an item-type attribute
//! (some types carry colors, some rarely do), a target attribute drawn
//! from a real color vocabulary, and a conflict attribute whose values
//! are brand-like names. A configurable fraction of those brands embed
//! a color word as their first token ("maroon 5"-shaped), which is
//! what makes the corpus adversarial: a query mentioning such a brand
//! contains a color token that is *not* a color.
//!
//! Everything is deterministic per seed. Value popularity follows a
//! power law, and queries are sampled popularity-first to mimic
//! traffic weighting.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::catalog::Item;
use crate::error::{Error, Result};
use crate::model::LabeledQuery;

/// Chance an item of a color-bearing type has a color.
const COLOR_P_COLORFUL: f64 = 0.9;
/// Chance an item of a colorless type has a color anyway.
const COLOR_P_COLORLESS: f64 = 0.05;
/// Chance a second color is added to an already-colored item.
const SECOND_COLOR_P: f64 = 0.15;
/// Brand presence per type class.
const BRAND_P_COLORFUL: f64 = 0.6;
const BRAND_P_COLORLESS: f64 = 0.85;
/// Chance a genuine-target query also mentions its item's brand.
const QUERY_BRAND_P: f64 = 0.8;
/// Chance the type token is pluralized in a query.
const QUERY_PLURAL_P: f64 = 0.5;
/// Judged items kept per query.
const JUDGMENTS_PER_QUERY: usize = 40;

/// RNG stream ids, one per generation purpose, so adding draws to one
/// stage never shifts another.
const STREAM_CATALOG: u64 = 1;
const STREAM_QUERIES: u64 = 2;

const COLOR_WORDS: &[&str] = &[
    "maroon", "red", "blue", "green", "black", "white", "navy", "teal", "coral", "olive",
    "beige", "ivory", "gold", "silver", "purple", "orange", "yellow", "pink", "gray", "brown",
    "cyan", "magenta", "indigo", "violet",
];

const TYPE_WORDS: &[&str] = &[
    "dvd", "shirt", "jacket", "sofa", "blender", "laptop", "sneaker", "candle", "backpack",
    "headphone", "mug", "lamp", "keyboard", "wallet", "pillow", "curtain",
];

/// Generator settings. The defaults produce the corpus every
/// directional result in this repository is reported on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub seed: u64,
    pub item_count: usize,
    pub query_count: usize,
    /// Exactly the three role attributes, in graph schema order.
    pub schema: Vec<String>,
    /// Value vocabulary size per attribute.
    pub vocab_sizes: BTreeMap<String, usize>,
    /// Power-law exponent for value popularity.
    pub exponent: f64,
    /// Fraction of conflict-attribute values that embed a target-
    /// vocabulary word as their first token.
    pub conflict_rate: f64,
    /// Probability of flipping a query label.
    pub noise_rate: f64,
    /// Attribute naming the kind of item ("product_type" role).
    pub type_attr: String,
    /// Attribute whose values are brand-like and may embed conflicts.
    pub conflict_attr: String,
    /// Attribute whose presence the corpus is labeled for.
    pub target_attr: String,
}

impl Default for SynthConfig {
    fn default() -> Self {
        let mut vocab_sizes = BTreeMap::new();
        vocab_sizes.insert("product_type".to_string(), 16);
        vocab_sizes.insert("brand".to_string(), 128);
        vocab_sizes.insert("color".to_string(), 24);
        SynthConfig {
            seed: 42,
            item_count: 10_000,
            query_count: 2_000,
            schema: vec![
                "product_type".to_string(),
                "brand".to_string(),
                "color".to_string(),
            ],
            vocab_sizes,
            exponent: 1.0,
            conflict_rate: 0.5,
            noise_rate: 0.0,
            type_attr: "product_type".to_string(),
            conflict_attr: "brand".to_string(),
            target_attr: "color".to_string(),
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        if self.item_count < 1 || self.query_count < 1 {
            return Err(Error::InvalidConfig("counts must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.conflict_rate) {
            return Err(Error::InvalidConfig("conflict_rate must be in [0, 1]".into()));
        }
        if !(0.0..=1.0).contains(&self.noise_rate) {
            return Err(Error::InvalidConfig("noise_rate must be in [0, 1]".into()));
        }
        if !(self.exponent > 0.0) {
            return Err(Error::InvalidConfig("exponent must be positive".into()));
        }
        let roles = [&self.type_attr, &self.conflict_attr, &self.target_attr];
        let role_set: BTreeSet<&String> = roles.iter().copied().collect();
        if role_set.len() != 3 {
            return Err(Error::InvalidConfig(
                "type_attr, conflict_attr, and target_attr must be distinct".into(),
            ));
        }
        if self.schema.len() != 3 || !roles.iter().all(|r| self.schema.contains(r)) {
            return Err(Error::InvalidConfig(
                "schema must list exactly the three role attributes".into(),
            ));
        }
        for attr in &self.schema {
            match self.vocab_sizes.get(attr) {
                Some(&n) if n >= 1 => {}
                _ => {
                    return Err(Error::InvalidConfig(format!(
                        "vocab size for {attr:?} must be at least 1"
                    )))
                }
            }
        }
        Ok(())
    }

    /// Apply one `key=value` setting. Unknown keys are errors so typos
    /// fail loudly.
    pub fn apply_kv(&mut self, key: &str, value: &str) -> Result<()> {
        let bad = |what: &str| Error::InvalidConfig(format!("bad value for {what}: {value:?}"));
        match key {
            "seed" => self.seed = value.parse().map_err(|_| bad(key))?,
            "item_count" => self.item_count = value.parse().map_err(|_| bad(key))?,
            "query_count" => self.query_count = value.parse().map_err(|_| bad(key))?,
            "exponent" => self.exponent = value.parse().map_err(|_| bad(key))?,
            "conflict_rate" => self.conflict_rate = value.parse().map_err(|_| bad(key))?,
            "noise_rate" => self.noise_rate = value.parse().map_err(|_| bad(key))?,
            "schema" => {
                self.schema = value.split(',').map(|s| s.trim().to_string()).collect();
            }
            "type_attr" => self.type_attr = value.trim().to_string(),
            "conflict_attr" => self.conflict_attr = value.trim().to_string(),
            "target_attr" => self.target_attr = value.trim().to_string(),
            _ => {
                if let Some(attr) = key.strip_prefix("vocab.") {
                    let n: usize = value.parse().map_err(|_| bad(key))?;
                    self.vocab_sizes.insert(attr.to_string(), n);
                } else {
                    return Err(Error::InvalidConfig(format!("unknown config key {key:?}")));
                }
            }
        }
        Ok(())
    }

    /// Read `key=value` lines ('#' comments and blanks ignored) over
    /// the defaults.
    pub fn from_file(path: &Path) -> Result<SynthConfig> {
        let mut config = SynthConfig::default();
        config.apply_file(path)?;
        Ok(config)
    }

    /// Apply a `key=value` file on top of the current settings.
    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let file = File::open(path)?;
        for (i, line) in BufReader::new(file).lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::MalformedRecord {
                    line: i + 1,
                    message: "expected key=value".into(),
                });
            };
            self.apply_kv(key.trim(), value.trim())?;
        }
        Ok(())
    }
}

/// Draw ranks 1..=n with probability proportional to `1 / rank^s`, via
/// inverse-CDF over precomputed cumulative weights.
pub(crate) struct ZipfSampler {
    cumulative: Vec<f64>,
}

impl ZipfSampler {
    pub(crate) fn new(n: usize, exponent: f64) -> Self {
        let mut cumulative = Vec::with_capacity(n);
        let mut total = 0.0;
        for rank in 1..=n {
            total += 1.0 / (rank as f64).powf(exponent);
            cumulative.push(total);
        }
        ZipfSampler { cumulative }
    }

    /// 0-based index: 0 is the most popular rank.
    pub(crate) fn sample(&self, rng: &mut impl Rng) -> usize {
        let total = *self.cumulative.last().expect("non-empty sampler");
        let u = rng.gen::<f64>() * total;
        self.cumulative.partition_point(|&c| c <= u).min(self.cumulative.len() - 1)
    }

    pub(crate) fn weight(rank0: usize, exponent: f64) -> f64 {
        1.0 / ((rank0 + 1) as f64).powf(exponent)
    }
}

/// The fixed vocabularies a config expands to. Reconstructible from
/// the config alone, with no RNG involved.
pub(crate) struct SynthWorld {
    pub(crate) types: Vec<String>,
    pub(crate) colors: Vec<String>,
    /// Conflicted brands (embedding a color word) come first, matching
    /// the head of the popularity distribution.
    pub(crate) brands: Vec<String>,
}

/// Deterministic pseudo-word from an index: three
/// consonant-vowel syllables.
fn pseudo_word(index: usize) -> String {
    const C: &[u8] = b"bdfgklmnprstvz";
    const V: &[u8] = b"aeiou";
    let mut word = String::with_capacity(6);
    let mut i = index;
    for _ in 0..3 {
        word.push(C[i % C.len()] as char);
        i /= C.len();
        word.push(V[i % V.len()] as char);
        i /= V.len();
    }
    word
}

/// Words that must not collide with a new vocabulary entry: the word
/// itself and its naive plural variants, which the dictionary will
/// also index.
fn forbid(set: &mut BTreeSet<String>, word: &str) {
    set.insert(word.to_string());
    set.insert(format!("{word}s"));
    if let Some(stripped) = word.strip_suffix('s') {
        if !stripped.is_empty() {
            set.insert(stripped.to_string());
        }
    }
}

fn fill_vocab(
    builtin: &[&str],
    want: usize,
    salt: usize,
    forbidden: &mut BTreeSet<String>,
) -> Vec<String> {
    let mut vocab = Vec::with_capacity(want);
    for word in builtin.iter().take(want) {
        vocab.push(word.to_string());
        forbid(forbidden, word);
    }
    let mut candidate = salt;
    while vocab.len() < want {
        let word = pseudo_word(candidate);
        candidate += 1;
        if forbidden.contains(&word) {
            continue;
        }
        forbid(forbidden, &word);
        vocab.push(word);
    }
    vocab
}

impl SynthWorld {
    pub(crate) fn build(config: &SynthConfig) -> Result<SynthWorld> {
        config.validate()?;
        let n_types = config.vocab_sizes[&config.type_attr];
        let n_colors = config.vocab_sizes[&config.target_attr];
        let n_brands = config.vocab_sizes[&config.conflict_attr];

        let mut forbidden = BTreeSet::new();
        let types = fill_vocab(TYPE_WORDS, n_types, 1_000_000, &mut forbidden);
        let colors = fill_vocab(COLOR_WORDS, n_colors, 2_000_000, &mut forbidden);

        let conflicted = ((config.conflict_rate * n_brands as f64).round() as usize).min(n_brands);
        let mut brands = Vec::with_capacity(n_brands);
        for i in 0..conflicted {
            // "maroon 5"-shaped: a color word plus a number token
            brands.push(format!("{} {}", colors[i % n_colors], 2 + i / n_colors));
        }
        let clean = fill_vocab(&[], n_brands - conflicted, 3_000_000, &mut forbidden);
        brands.extend(clean);

        Ok(SynthWorld { types, colors, brands })
    }

    /// Types at odd vocabulary ranks carry colors; even ranks (led by
    /// the most popular type) rarely do.
    pub(crate) fn is_colorful(type_idx: usize) -> bool {
        type_idx % 2 == 1
    }
}

/// Generate the item catalog. Deterministic per seed.
pub fn generate_catalog(config: &SynthConfig) -> Result<Vec<Item>> {
    let world = SynthWorld::build(config)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(STREAM_CATALOG);

    let type_sampler = ZipfSampler::new(world.types.len(), config.exponent);
    let color_sampler = ZipfSampler::new(world.colors.len(), config.exponent);
    let brand_sampler = ZipfSampler::new(world.brands.len(), config.exponent);

    let mut items = Vec::with_capacity(config.item_count);
    for i in 0..config.item_count {
        let type_idx = type_sampler.sample(&mut rng);
        let colorful = SynthWorld::is_colorful(type_idx);

        let mut values: Vec<(String, Vec<String>)> =
            vec![(config.type_attr.clone(), vec![world.types[type_idx].clone()])];

        let color_p = if colorful { COLOR_P_COLORFUL } else { COLOR_P_COLORLESS };
        if rng.gen_bool(color_p) {
            let mut colors = vec![world.colors[color_sampler.sample(&mut rng)].clone()];
            if rng.gen_bool(SECOND_COLOR_P) {
                let second = world.colors[color_sampler.sample(&mut rng)].clone();
                if second != colors[0] {
                    colors.push(second);
                }
            }
            values.push((config.target_attr.clone(), colors));
        }

        let brand_p = if colorful { BRAND_P_COLORFUL } else { BRAND_P_COLORLESS };
        if rng.gen_bool(brand_p) {
            let brand = world.brands[brand_sampler.sample(&mut rng)].clone();
            values.push((config.conflict_attr.clone(), vec![brand]));
        }

        items.push(Item::new(format!("item-{i:06}"), values));
    }
    Ok(items)
}

/// Generate labeled queries off the catalog, sampling items by the
/// popularity of their type.
///
/// Each query commits to a label up front (even odds): a *present*
/// query takes a color-bearing item and embeds one of its real target
/// values; an *absent* query takes an item whose brand embeds a color
/// word, so the target token in the query belongs to the brand.
/// Labels may then be flipped by the configured noise rate.
pub fn generate_labeled_queries(
    catalog: &[Item],
    config: &SynthConfig,
) -> Result<Vec<LabeledQuery>> {
    if catalog.is_empty() {
        return Err(Error::InvalidConfig("catalog is empty".into()));
    }
    let world = SynthWorld::build(config)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(STREAM_QUERIES);

    let type_rank: HashMap<&str, usize> = world
        .types
        .iter()
        .enumerate()
        .map(|(i, t)| (t.as_str(), i))
        .collect();
    let color_set: BTreeSet<&str> = world.colors.iter().map(|c| c.as_str()).collect();
    // only color words that actually occur as catalog target values
    // can produce a dictionary span
    let colors_in_catalog: BTreeSet<&str> = catalog
        .iter()
        .filter_map(|item| item.values().get(&config.target_attr))
        .flatten()
        .map(|v| v.as_str())
        .collect();

    // popularity-weighted sampling: cumulative type weights per item
    let mut cumulative = Vec::with_capacity(catalog.len());
    let mut total = 0.0;
    for item in catalog {
        let rank = item
            .values()
            .get(&config.type_attr)
            .and_then(|vs| vs.iter().next())
            .and_then(|t| type_rank.get(t.as_str()).copied())
            .unwrap_or(world.types.len() - 1);
        total += ZipfSampler::weight(rank, config.exponent);
        cumulative.push(total);
    }
    let sample_item = |rng: &mut ChaCha8Rng| -> usize {
        let u = rng.gen::<f64>() * total;
        cumulative.partition_point(|&c| c <= u).min(catalog.len() - 1)
    };

    // an absent query needs a brand whose leading token is a color
    // word with a real span in the dictionary
    let conflicted_brand_color = |item: &Item| -> Option<String> {
        let brand = item.values().get(&config.conflict_attr)?.iter().next()?;
        let first = brand.split(' ').next()?;
        (color_set.contains(first) && colors_in_catalog.contains(first))
            .then(|| first.to_string())
    };

    let mut queries = Vec::with_capacity(config.query_count);
    for _ in 0..config.query_count {
        let want_present = rng.gen_bool(0.5);

        let mut found = None;
        for _attempt in 0..100_000 {
            let item = &catalog[sample_item(&mut rng)];
            if want_present {
                if let Some(color) = item
                    .values()
                    .get(&config.target_attr)
                    .and_then(|vs| vs.iter().next())
                {
                    found = Some((item, color.clone(), None));
                    break;
                }
            } else if let Some(embedded) = conflicted_brand_color(item) {
                found = Some((item, embedded, Some(())));
                break;
            }
        }
        let Some((item, candidate_value, absent_marker)) = found else {
            return Err(Error::InvalidConfig(
                "catalog admits no queries for the requested label mix; \
                 raise conflict_rate or item_count"
                    .into(),
            ));
        };

        let brand = item
            .values()
            .get(&config.conflict_attr)
            .and_then(|vs| vs.iter().next());
        let item_type = item
            .values()
            .get(&config.type_attr)
            .and_then(|vs| vs.iter().next())
            .expect("generated items always have a type");

        let mut tokens: Vec<String> = Vec::new();
        let absent_case = absent_marker.is_some();
        if let Some(brand) = brand {
            // the absent case exists because of the brand: always say it
            if absent_case || rng.gen_bool(QUERY_BRAND_P) {
                tokens.push(brand.clone());
            }
        }
        if !absent_case {
            tokens.push(candidate_value.clone());
        }
        let plural = rng.gen_bool(QUERY_PLURAL_P);
        tokens.push(if plural {
            format!("{item_type}s")
        } else {
            item_type.clone()
        });

        let mut label = !absent_case;
        let gold_value = (!absent_case).then(|| candidate_value.clone());
        if config.noise_rate > 0.0 && rng.gen_bool(config.noise_rate) {
            label = !label;
        }

        queries.push(LabeledQuery {
            query: tokens.join(" "),
            target: config.target_attr.clone(),
            candidate_value,
            label,
            gold_value,
        });
    }
    Ok(queries)
}

/// Synthetic relevance judgments: (query, item_id, orders) rows.
///
/// A query's true (attribute, value) pairs are recovered from its
/// assembly structure; an item's order count is the number of those
/// pairs it satisfies. The top judged items per distinct query are
/// kept, ordered deterministically.
pub fn generate_judgments(
    catalog: &[Item],
    queries: &[LabeledQuery],
    config: &SynthConfig,
) -> Result<Vec<(String, String, u64)>> {
    let world = SynthWorld::build(config)?;
    let types: BTreeSet<&str> = world.types.iter().map(|t| t.as_str()).collect();
    let brands: BTreeSet<&str> = world.brands.iter().map(|b| b.as_str()).collect();

    let mut rows = Vec::new();
    let mut seen: BTreeSet<&str> = BTreeSet::new();
    for lq in queries {
        if !seen.insert(&lq.query) {
            continue;
        }
        let Some(true_pairs) = query_true_pairs(lq, config, &types, &brands) else {
            continue;
        };

        let mut scored: Vec<(u64, &str)> = catalog
            .iter()
            .filter_map(|item| {
                let orders = true_pairs
                    .iter()
                    .filter(|(attr, value)| item.has_value(attr, value))
                    .count() as u64;
                (orders > 0).then_some((orders, item.id()))
            })
            .collect();
        scored.sort_unstable_by(|a, b| b.0.cmp(&a.0).then_with(|| a.1.cmp(b.1)));
        scored.truncate(JUDGMENTS_PER_QUERY);
        for (orders, item_id) in scored {
            rows.push((lq.query.clone(), item_id.to_string(), orders));
        }
    }
    Ok(rows)
}

/// Recover the (attribute, value) pairs a generated query is really
/// about, by inverting the fixed assembly order
/// `[brand?] [target value?] [type]`.
fn query_true_pairs(
    lq: &LabeledQuery,
    config: &SynthConfig,
    types: &BTreeSet<&str>,
    brands: &BTreeSet<&str>,
) -> Option<Vec<(String, String)>> {
    let tokens: Vec<&str> = lq.query.split(' ').collect();
    let last = *tokens.last()?;
    let item_type = if types.contains(last) {
        last.to_string()
    } else {
        let stripped = last.strip_suffix('s')?;
        types.contains(stripped).then(|| stripped.to_string())?
    };

    let mut pairs = vec![(config.type_attr.clone(), item_type)];
    let mut rest = &tokens[..tokens.len() - 1];

    if let Some(gold) = &lq.gold_value {
        if rest.last() == Some(&gold.as_str()) {
            rest = &rest[..rest.len() - 1];
        }
        pairs.push((config.target_attr.clone(), gold.clone()));
    }
    if !rest.is_empty() {
        let brand = rest.join(" ");
        if brands.contains(brand.as_str()) {
            pairs.push((config.conflict_attr.clone(), brand));
        }
    }
    Some(pairs)
}
