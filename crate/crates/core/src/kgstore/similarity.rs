//! Text normalization and character-trigram similarity used for label,
//! class and property matching.

use std::collections::BTreeSet;

use unicode_normalization::char::is_combining_mark;
use unicode_normalization::UnicodeNormalization;

/// Minimum similarity for linking a named entity to a KG resource.
pub const INSTANCE_THRESHOLD: f64 = 0.45;
/// Minimum similarity for class and property synonyms.
pub const SYNONYM_THRESHOLD: f64 = 0.6;

/// Lowercases, folds diacritics, turns punctuation into spaces and collapses
/// whitespace.
pub fn normalize(text: &str) -> String {
    let folded: String = text
        .nfd()
        .filter(|c| !is_combining_mark(*c))
        .flat_map(char::to_lowercase)
        .map(|c| if c.is_alphanumeric() { c } else { ' ' })
        .collect();
    folded.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Strips English plural endings from a single lowercase word.
pub fn singularize(word: &str) -> String {
    let w = word;
    if w.len() <= 3 {
        return w.to_string();
    }
    if let Some(stem) = w.strip_suffix("ies") {
        return format!("{stem}y");
    }
    for suffix in ["sses", "xes", "ches", "shes", "zes"] {
        if w.ends_with(suffix) {
            return w[..w.len() - 2].to_string();
        }
    }
    if w.ends_with("ss") || w.ends_with("us") || w.ends_with("is") {
        return w.to_string();
    }
    if let Some(stem) = w.strip_suffix('s') {
        return stem.to_string();
    }
    w.to_string()
}

/// Normalized text with every word singularized.
pub fn lemma_normalize(text: &str) -> String {
    normalize(text)
        .split(' ')
        .filter(|w| !w.is_empty())
        .map(singularize)
        .collect::<Vec<_>>()
        .join(" ")
}

/// Character trigrams of already-normalized text, padded with one boundary
/// space on each side.
pub fn trigrams(normalized: &str) -> BTreeSet<String> {
    let padded: Vec<char> = format!(" {normalized} ").chars().collect();
    padded
        .windows(3)
        .map(|w| w.iter().collect::<String>())
        .collect()
}

pub fn jaccard(a: &BTreeSet<String>, b: &BTreeSet<String>) -> f64 {
    if a.is_empty() && b.is_empty() {
        return 0.0;
    }
    let inter = a.intersection(b).count();
    let union = a.len() + b.len() - inter;
    inter as f64 / union as f64
}

/// Trigram Jaccard similarity of two raw strings after normalization.
pub fn similarity(a: &str, b: &str) -> f64 {
    jaccard(&trigrams(&normalize(a)), &trigrams(&normalize(b)))
}

/// Same as [`similarity`] but with plural stripping on both sides.
pub fn lemma_similarity(a: &str, b: &str) -> f64 {
    jaccard(
        &trigrams(&lemma_normalize(a)),
        &trigrams(&lemma_normalize(b)),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalization_folds_case_diacritics_and_punctuation() {
        assert_eq!(normalize("  Île-de-France "), "ile de france");
        assert_eq!(normalize("Emilia-Romagna"), "emilia romagna");
        assert_eq!(normalize("São  Paulo"), "sao paulo");
        assert_eq!(normalize("!!"), "");
    }

    #[test]
    fn plural_table() {
        assert_eq!(singularize("cities"), "city");
        assert_eq!(singularize("images"), "image");
        assert_eq!(singularize("boxes"), "box");
        assert_eq!(singularize("rivers"), "river");
        assert_eq!(singularize("tagus"), "tagus");
        assert_eq!(singularize("gas"), "gas");
        assert_eq!(lemma_normalize("Sentinel-2 Images"), "sentinel 2 image");
    }

    #[test]
    fn trigram_jaccard_by_hand() {
        // " romme " -> { ro,rom,omm,mme,me } ; " rome " -> { ro,rom,ome,me }
        // shared 3, union 6
        assert!((similarity("Romme", "Rome") - 0.5).abs() < 1e-12);
        assert!((similarity("Romme", "Roma") - 2.0 / 7.0).abs() < 1e-12);
        assert_eq!(similarity("Rome", "rome"), 1.0);
    }
}
