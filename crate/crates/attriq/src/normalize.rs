//! String normalization shared by catalog values and query tokens.
//!
//! Catalog values and query text must normalize identically or dictionary
//! matching falls apart, so every code path funnels through this module:
//! lowercase, split on whitespace, strip ASCII punctuation from token
//! edges, drop tokens that end up empty, join with single spaces.

/// Normalize a single token: lowercase and strip leading/trailing
/// ASCII punctuation. Returns an empty string for all-punctuation input.
pub fn normalize_token(token: &str) -> String {
    token
        .trim_matches(|c: char| c.is_ascii_punctuation() || c.is_whitespace())
        .to_lowercase()
}

/// Normalize a full phrase (a catalog value or a dictionary key).
///
/// Collapses internal whitespace to single spaces as a side effect of
/// re-joining the normalized tokens.
pub fn normalize_phrase(phrase: &str) -> String {
    let mut out = String::with_capacity(phrase.len());
    for token in phrase.split_whitespace() {
        let t = normalize_token(token);
        if t.is_empty() {
            continue;
        }
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(&t);
    }
    out
}
