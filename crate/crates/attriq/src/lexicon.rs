//! Query tokenization, the attribute-value dictionary, and candidate
//! span extraction.
//!
//! The dictionary maps normalized phrases to the (attribute, value)
//! pairs they can stand for. Extraction walks every token window of a
//! query and returns *all* matches — overlapping, nested, and mutually
//! contradictory spans included. Resolving which candidates are real is
//! the job of downstream scoring; this module only finds and groups
//! them.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::catalog::KnowledgeGraph;
use crate::error::{Error, Result};
use crate::normalize::{normalize_phrase, normalize_token};

/// A search query, tokenized once up front.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Query {
    raw: String,
    tokens: Vec<QueryToken>,
}

/// One normalized token plus the byte range of the raw word it came
/// from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QueryToken {
    pub text: String,
    /// Byte offset of the raw word's first byte in the raw query.
    pub start: usize,
    /// Byte offset one past the raw word's last byte.
    pub end: usize,
}

impl Query {
    /// Tokenize on whitespace and normalize each token. Tokens that
    /// normalize to nothing (pure punctuation) are dropped.
    pub fn new(raw: impl Into<String>) -> Self {
        let raw = raw.into();
        let mut tokens = Vec::new();
        let mut word_start: Option<usize> = None;
        for (i, c) in raw.char_indices() {
            if c.is_whitespace() {
                if let Some(s) = word_start.take() {
                    push_token(&raw, s, i, &mut tokens);
                }
            } else if word_start.is_none() {
                word_start = Some(i);
            }
        }
        if let Some(s) = word_start {
            push_token(&raw, s, raw.len(), &mut tokens);
        }
        Query { raw, tokens }
    }

    pub fn raw(&self) -> &str {
        &self.raw
    }

    pub fn tokens(&self) -> &[QueryToken] {
        &self.tokens
    }
}

fn push_token(raw: &str, start: usize, end: usize, out: &mut Vec<QueryToken>) {
    let text = normalize_token(&raw[start..end]);
    if !text.is_empty() {
        out.push(QueryToken { text, start, end });
    }
}

/// One dictionary match in a query.
///
/// Token positions are inclusive on both ends; `char_start..char_end`
/// is the byte range of the matched words in the raw query.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CandidateSpan {
    pub attribute: String,
    pub value: String,
    pub first_token: usize,
    pub last_token: usize,
    pub char_start: usize,
    pub char_end: usize,
}

impl CandidateSpan {
    /// Number of tokens covered.
    pub fn token_len(&self) -> usize {
        self.last_token - self.first_token + 1
    }

    /// Whether the token ranges share at least one position.
    pub fn overlaps(&self, other: &CandidateSpan) -> bool {
        self.first_token <= other.last_token && other.first_token <= self.last_token
    }

    /// Overlapping spans claiming different attributes contradict each
    /// other: the tokens cannot be both at once.
    pub fn conflicts_with(&self, other: &CandidateSpan) -> bool {
        self.attribute != other.attribute && self.overlaps(other)
    }
}

/// One resolved attribute hypothesis from the query context: attribute
/// `n` is `value` with the given confidence.
#[derive(Debug, Clone, PartialEq)]
pub struct AnchorAssignment {
    pub attribute: String,
    pub value: String,
    /// In (0, 1]; assignments of one attribute sum to 1.
    pub confidence: f64,
}

/// Normalized phrase → set of (attribute, value) senses.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Dictionary {
    entries: HashMap<String, BTreeSet<(String, String)>>,
    max_tokens: usize,
}

impl Dictionary {
    pub fn new() -> Self {
        Dictionary::default()
    }

    /// Add a phrase → (attribute, value) sense, plus naive plural
    /// surface forms when the phrase is a single token: "dvd" also
    /// matches as "dvds", and "shoes" also as "shoe". Surface forms
    /// keep the canonical value.
    pub fn insert(&mut self, phrase: &str, attribute: &str, value: &str) {
        let phrase = normalize_phrase(phrase);
        if phrase.is_empty() {
            return;
        }
        self.insert_surface(&phrase, attribute, value);
        if !phrase.contains(' ') {
            self.insert_surface(&format!("{phrase}s"), attribute, value);
            if phrase.len() > 1 {
                if let Some(stripped) = phrase.strip_suffix('s') {
                    self.insert_surface(stripped, attribute, value);
                }
            }
        }
    }

    /// Add exactly one key with no surface-form expansion. Used when
    /// reading a dictionary file back, which already lists every
    /// surface form.
    pub fn insert_surface(&mut self, phrase: &str, attribute: &str, value: &str) {
        let n_tokens = phrase.split(' ').count();
        self.max_tokens = self.max_tokens.max(n_tokens);
        self.entries
            .entry(phrase.to_string())
            .or_default()
            .insert((attribute.to_string(), value.to_string()));
    }

    /// Senses of a normalized phrase, if it is a key.
    pub fn lookup(&self, phrase: &str) -> Option<&BTreeSet<(String, String)>> {
        self.entries.get(phrase)
    }

    /// Number of distinct phrases (surface forms counted separately).
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Token count of the longest phrase; bounds the match window.
    pub fn max_phrase_tokens(&self) -> usize {
        self.max_tokens
    }

    /// All (phrase, senses) pairs in arbitrary order.
    pub fn iter(&self) -> impl Iterator<Item = (&str, &BTreeSet<(String, String)>)> {
        self.entries.iter().map(|(p, s)| (p.as_str(), s))
    }
}

/// Build the dictionary from every graph value with
/// `degree >= min_support`.
pub fn build_dictionary(kg: &KnowledgeGraph, min_support: u64) -> Result<Dictionary> {
    if min_support < 1 {
        return Err(Error::InvalidConfig(
            "min_support must be at least 1".into(),
        ));
    }
    let mut dict = Dictionary::new();
    for (attr, value, degree) in kg.iter_values() {
        if degree >= min_support {
            dict.insert(value, attr, value);
        }
    }
    Ok(dict)
}

/// Write a dictionary as UTF-8 tab-separated lines
/// `phrase<TAB>attribute<TAB>value`, sorted, one sense per line.
///
/// Every surface form is written out, so reading the file back with
/// [`load_dictionary`] reproduces the dictionary exactly.
pub fn save_dictionary(dict: &Dictionary, path: &Path) -> Result<()> {
    let mut rows: Vec<(&str, &str, &str)> = dict
        .iter()
        .flat_map(|(phrase, senses)| {
            senses
                .iter()
                .map(move |(a, v)| (phrase, a.as_str(), v.as_str()))
        })
        .collect();
    rows.sort_unstable();
    let mut out = BufWriter::new(File::create(path)?);
    for (phrase, attr, value) in rows {
        writeln!(out, "{phrase}\t{attr}\t{value}")?;
    }
    out.flush()?;
    Ok(())
}

/// Read a dictionary written by [`save_dictionary`]. Lines are taken
/// verbatim (no plural expansion).
pub fn load_dictionary(path: &Path) -> Result<Dictionary> {
    let file = File::open(path)?;
    let mut dict = Dictionary::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let mut parts = line.split('\t');
        match (parts.next(), parts.next(), parts.next(), parts.next()) {
            (Some(phrase), Some(attr), Some(value), None)
                if !phrase.is_empty() && !attr.is_empty() && !value.is_empty() =>
            {
                dict.insert_surface(phrase, attr, value);
            }
            _ => {
                return Err(Error::MalformedRecord {
                    line: i + 1,
                    message: "expected phrase<TAB>attribute<TAB>value".into(),
                })
            }
        }
    }
    Ok(dict)
}

/// Find every dictionary phrase occurring on token boundaries in the
/// query.
///
/// All matches are returned — nested, overlapping, and conflicting
/// alike — ordered by start token, then longer spans first, then
/// (attribute, value).
pub fn extract_candidates(query: &Query, dict: &Dictionary) -> Vec<CandidateSpan> {
    let tokens = query.tokens();
    let n = tokens.len();
    let max_len = dict.max_phrase_tokens().min(n);
    let mut spans = Vec::new();
    let mut phrase = String::new();

    for start in 0..n {
        phrase.clear();
        for len in 1..=max_len.min(n - start) {
            let last = start + len - 1;
            if len > 1 {
                phrase.push(' ');
            }
            phrase.push_str(&tokens[last].text);
            if let Some(senses) = dict.lookup(&phrase) {
                for (attribute, value) in senses {
                    spans.push(CandidateSpan {
                        attribute: attribute.clone(),
                        value: value.clone(),
                        first_token: start,
                        last_token: last,
                        char_start: tokens[start].start,
                        char_end: tokens[last].end,
                    });
                }
            }
        }
    }
    sort_spans(&mut spans);
    spans
}

/// Canonical span order: start ascending, longer first, then
/// (attribute, value).
pub(crate) fn sort_spans(spans: &mut [CandidateSpan]) {
    spans.sort_unstable_by(|a, b| {
        a.first_token
            .cmp(&b.first_token)
            .then(b.last_token.cmp(&a.last_token))
            .then_with(|| a.attribute.cmp(&b.attribute))
            .then_with(|| a.value.cmp(&b.value))
    });
}

/// Group spans that contradict each other.
///
/// Two spans are directly in conflict when their token ranges overlap
/// and their attributes differ; groups are the transitive closure of
/// that relation, so a group can pull in same-attribute spans through a
/// shared rival. Spans in no group are unconflicted and not returned.
pub fn detect_conflicts(spans: &[CandidateSpan]) -> Vec<Vec<CandidateSpan>> {
    let n = spans.len();
    let mut group_of: Vec<Option<usize>> = vec![None; n];
    let mut groups: Vec<Vec<usize>> = Vec::new();

    for i in 0..n {
        if group_of[i].is_some() {
            continue;
        }
        // breadth-first walk over direct conflicts starting at i
        let mut frontier = vec![i];
        let mut members = vec![i];
        group_of[i] = Some(groups.len());
        while let Some(a) = frontier.pop() {
            for b in 0..n {
                if group_of[b].is_none() && spans[a].conflicts_with(&spans[b]) {
                    group_of[b] = Some(groups.len());
                    members.push(b);
                    frontier.push(b);
                }
            }
        }
        if members.len() > 1 {
            groups.push(members);
        } else {
            group_of[i] = None; // singleton: unconflicted, no group
        }
    }

    let mut out: Vec<Vec<CandidateSpan>> = groups
        .into_iter()
        .map(|members| {
            let mut group: Vec<CandidateSpan> =
                members.into_iter().map(|i| spans[i].clone()).collect();
            sort_spans(&mut group);
            group
        })
        .collect();
    out.sort_unstable_by(|a, b| {
        a[0].first_token
            .cmp(&b[0].first_token)
            .then(b[0].last_token.cmp(&a[0].last_token))
            .then_with(|| a[0].attribute.cmp(&b[0].attribute))
    });
    out
}

/// Derive anchor assignments for every non-target attribute with at
/// least one span.
///
/// An attribute with k distinct candidate values yields k assignments
/// of confidence 1/k each. Anchors that overlap a target-attribute
/// span are deliberately kept: the whole point of context scoring is to
/// let that evidence adjudicate the conflict.
pub fn anchors(spans: &[CandidateSpan], target: &str) -> Vec<AnchorAssignment> {
    let mut values_by_attr: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
    for span in spans {
        if span.attribute != target {
            values_by_attr
                .entry(&span.attribute)
                .or_default()
                .insert(&span.value);
        }
    }
    let mut out = Vec::new();
    for (attribute, values) in values_by_attr {
        let confidence = 1.0 / values.len() as f64;
        for value in values {
            out.push(AnchorAssignment {
                attribute: attribute.to_string(),
                value: value.to_string(),
                confidence,
            });
        }
    }
    out
}
