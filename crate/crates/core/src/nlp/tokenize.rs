use super::{NlpError, Pos, Token};
use crate::kgstore::similarity::singularize;

const DETERMINERS: &[&str] = &[
    "the", "a", "an", "all", "every", "each", "some", "any", "this", "that", "these", "those",
    "which", "no",
];

const ADPOSITIONS: &[&str] = &[
    "in", "within", "inside", "of", "from", "to", "with", "near", "at", "on", "by", "for", "than",
    "between", "before", "after", "since", "until", "during", "over", "under", "above", "below",
    "across", "along", "into", "per", "through", "throughout", "without", "like",
];

const CONJUNCTIONS: &[&str] = &["and", "or", "but", "nor"];

const ADVERBS: &[&str] = &[
    "less", "more", "most", "least", "how", "where", "when", "away", "far", "not", "also",
    "exactly", "only", "approximately", "roughly", "there", "close", "about", "around", "fewer",
    "very", "too", "currently",
];

const PRONOUNS: &[&str] = &[
    "me", "i", "you", "it", "they", "them", "we", "us", "what", "who", "whom", "its", "their",
    "my", "our", "your", "he", "she", "him", "her",
];

/// Auxiliary and copular forms; tagged VERB.
pub const AUXILIARIES: &[&str] = &[
    "is", "are", "was", "were", "be", "been", "being", "am", "do", "does", "did", "has", "have",
    "had", "can", "could", "will", "would", "should", "may", "might", "must",
];

const VERBS: &[&str] = &[
    "show", "give", "find", "list", "get", "return", "display", "retrieve", "fetch", "tell",
    "taken", "located", "take", "captured", "capture", "acquired", "lie", "lies", "flow", "flows",
    "cross", "crosses", "contain", "contains", "intersect", "intersects", "overlap", "overlaps",
    "border", "borders", "exist", "exists", "situated", "depict", "depicts", "covers",
    "pass", "passes", "provide", "want", "need", "see", "locate",
];

const ADJECTIVES: &[&str] = &[
    "big", "large", "long", "small", "short", "high", "low", "many", "much", "recent", "old",
    "new", "several", "few", "total", "northern", "southern", "eastern", "western", "central",
    "available", "larger", "bigger", "longer", "smaller", "shorter", "higher", "lower", "greater",
    "wider", "newer", "older", "later", "earlier", "largest", "biggest", "longest", "smallest",
    "shortest", "highest", "lowest", "greatest", "widest", "newest", "oldest", "latest",
    "earliest", "wide", "deep", "deeper", "deepest", "cloudy", "snowy", "clear", "cloudless",
];

const NUMBER_WORDS: &[(&str, f64)] = &[
    ("zero", 0.0),
    ("one", 1.0),
    ("two", 2.0),
    ("three", 3.0),
    ("four", 4.0),
    ("five", 5.0),
    ("six", 6.0),
    ("seven", 7.0),
    ("eight", 8.0),
    ("nine", 9.0),
    ("ten", 10.0),
    ("eleven", 11.0),
    ("twelve", 12.0),
    ("fifteen", 15.0),
    ("twenty", 20.0),
    ("thirty", 30.0),
    ("forty", 40.0),
    ("fifty", 50.0),
    ("hundred", 100.0),
    ("thousand", 1000.0),
    ("dozen", 12.0),
];

/// Measurement units that close a measure phrase.
pub const UNITS: &[&str] = &[
    "km", "m", "%", "kilometres", "kilometers", "kilometre", "kilometer", "metres", "meters",
    "metre", "meter", "percent",
];

pub const MONTHS: &[&str] = &[
    "january", "february", "march", "april", "may", "june", "july", "august", "september",
    "october", "november", "december",
];

pub fn is_unit(word: &str) -> bool {
    UNITS.contains(&word.to_lowercase().as_str())
}

pub fn month_number(word: &str) -> Option<u32> {
    let w = word.to_lowercase();
    let w = w.strip_suffix('.').unwrap_or(&w);
    MONTHS
        .iter()
        .position(|m| *m == w || (w.len() == 3 && m.starts_with(w)) || (w == "sept" && *m == "september"))
        .map(|i| i as u32 + 1)
}

/// Numeric value of a NUM token: digits (with `.` decimals) or a number word.
pub fn number_value(surface: &str) -> Option<f64> {
    if let Ok(v) = surface.replace(',', "").parse::<f64>() {
        return v.is_finite().then_some(v);
    }
    let lower = surface.to_lowercase();
    NUMBER_WORDS
        .iter()
        .find(|(w, _)| *w == lower)
        .map(|&(_, v)| v)
}

/// Splits `question` into tokens and assigns coarse part-of-speech tags.
pub fn tokenize_and_tag(question: &str) -> Result<Vec<Token>, NlpError> {
    let pieces = split(question);
    if pieces.is_empty() {
        return Err(NlpError::EmptyQuestion);
    }
    Ok(pieces
        .into_iter()
        .enumerate()
        .map(|(index, (start, end))| {
            let surface = &question[start..end];
            let pos = tag(surface);
            Token {
                index,
                surface: surface.to_string(),
                lemma: lemma(surface, pos),
                pos,
                span: (start, end),
            }
        })
        .collect())
}

fn lemma(surface: &str, pos: Pos) -> String {
    let lower = surface.to_lowercase();
    match pos {
        Pos::Noun => singularize(&lower),
        _ => lower,
    }
}

/// Part-of-speech for a single token, from closed-class lists, suffix rules
/// and capitalization.
pub fn tag(surface: &str) -> Pos {
    let lower = surface.to_lowercase();
    let w = lower.as_str();
    let first = surface.chars().next().unwrap_or(' ');
    if number_value(surface).is_some() || is_iso_date(surface) {
        return Pos::Num;
    }
    if is_unit(w) {
        return Pos::Noun;
    }
    if !first.is_alphanumeric() {
        return Pos::Punct;
    }
    if DETERMINERS.contains(&w) {
        return Pos::Det;
    }
    if CONJUNCTIONS.contains(&w) {
        return Pos::Conj;
    }
    if ADPOSITIONS.contains(&w) {
        return Pos::Adp;
    }
    if PRONOUNS.contains(&w) {
        return Pos::Other;
    }
    if AUXILIARIES.contains(&w) && w != "may" {
        return Pos::Verb;
    }
    if VERBS.contains(&w) {
        return Pos::Verb;
    }
    if ADVERBS.contains(&w) {
        return Pos::Adv;
    }
    if ADJECTIVES.contains(&w) {
        return Pos::Adj;
    }
    if MONTHS.contains(&w) {
        return Pos::Propn;
    }
    if first.is_uppercase() {
        return Pos::Propn;
    }
    if w.len() > 4 && w.ends_with("ing") {
        return Pos::Verb;
    }
    if w.len() > 4 && w.ends_with("ed") {
        return Pos::Verb;
    }
    if w.len() > 4 && w.ends_with("ly") {
        return Pos::Adv;
    }
    if w.len() > 5 && ["ous", "ful", "ive", "able", "ible"].iter().any(|s| w.ends_with(s)) {
        return Pos::Adj;
    }
    Pos::Noun
}

/// `YYYY-MM` or `YYYY-MM-DD`.
pub fn is_iso_date(s: &str) -> bool {
    let b = s.as_bytes();
    let digits = |r: std::ops::Range<usize>| b.get(r).is_some_and(|x| x.iter().all(u8::is_ascii_digit));
    match b.len() {
        7 => digits(0..4) && b[4] == b'-' && digits(5..7),
        10 => digits(0..4) && b[4] == b'-' && digits(5..7) && b[7] == b'-' && digits(8..10),
        _ => false,
    }
}

/// Byte spans of the tokens: number runs, word runs (keeping internal
/// hyphens and apostrophes), ISO dates, and single punctuation characters.
fn split(text: &str) -> Vec<(usize, usize)> {
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let end_of = |k: usize| chars.get(k).map_or(text.len(), |&(b, _)| b);
    let mut out = Vec::new();
    let mut k = 0;
    while k < chars.len() {
        let (start, c) = chars[k];
        if c.is_whitespace() {
            k += 1;
            continue;
        }
        let mut j = k + 1;
        if c.is_ascii_digit() {
            for len in [10, 7] {
                if k + len <= chars.len() && is_iso_date(&text[start..end_of(k + len)]) {
                    let after = chars.get(k + len).map(|&(_, c)| c);
                    if !after.is_some_and(|c| c.is_alphanumeric()) {
                        j = k + len;
                        break;
                    }
                }
            }
            if j == k + 1 {
                while j < chars.len() {
                    let d = chars[j].1;
                    let next_digit = chars.get(j + 1).is_some_and(|&(_, c)| c.is_ascii_digit());
                    if d.is_ascii_digit() || ((d == '.' || d == ',') && next_digit) {
                        j += 1;
                    } else {
                        break;
                    }
                }
            }
        } else if c.is_alphabetic() {
            while j < chars.len() {
                let d = chars[j].1;
                let next_alnum = chars.get(j + 1).is_some_and(|&(_, c)| c.is_alphanumeric());
                if d.is_alphanumeric() || d == '_' {
                    j += 1;
                } else if d == '-' && next_alnum {
                    j += 1;
                } else {
                    break;
                }
            }
        } else if c == '\'' {
            while j < chars.len() && chars[j].1.is_alphabetic() {
                j += 1;
            }
        }
        out.push((start, end_of(j)));
        k = j;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn surfaces(q: &str) -> Vec<String> {
        tokenize_and_tag(q).unwrap().into_iter().map(|t| t.surface).collect()
    }

    #[test]
    fn show_me_all_images() {
        let toks = tokenize_and_tag("Show me all images").unwrap();
        assert_eq!(toks.len(), 4);
        assert_eq!(toks[3].pos, Pos::Noun);
        assert_eq!(toks[3].lemma, "image");
        assert_eq!(toks[0].pos, Pos::Verb);
    }

    #[test]
    fn units_split_from_numbers() {
        let toks = tokenize_and_tag("less than 2km").unwrap();
        let got: Vec<(&str, Pos)> = toks.iter().map(|t| (t.surface.as_str(), t.pos)).collect();
        assert_eq!(
            got,
            vec![("less", Pos::Adv), ("than", Pos::Adp), ("2", Pos::Num), ("km", Pos::Noun)]
        );
        assert_eq!(surfaces("10%"), vec!["10", "%"]);
        assert_eq!(surfaces("2.5km,"), vec!["2.5", "km", ","]);
    }

    #[test]
    fn hyphenated_words_and_dates_stay_whole() {
        assert_eq!(surfaces("Emilia-Romagna region"), vec!["Emilia-Romagna", "region"]);
        assert_eq!(surfaces("Sentinel-2 images"), vec!["Sentinel-2", "images"]);
        assert_eq!(surfaces("after 2021-03-05?"), vec!["after", "2021-03-05", "?"]);
        assert_eq!(surfaces("Italy's rivers"), vec!["Italy", "'s", "rivers"]);
    }

    #[test]
    fn empty_question_is_rejected() {
        assert_eq!(tokenize_and_tag(""), Err(NlpError::EmptyQuestion));
        assert_eq!(tokenize_and_tag("   "), Err(NlpError::EmptyQuestion));
    }

    #[test]
    fn spans_are_ordered_and_in_bounds() {
        let q = "Where is the Tagus river located?";
        let toks = tokenize_and_tag(q).unwrap();
        for w in toks.windows(2) {
            assert!(w[0].span.1 <= w[1].span.0);
        }
        for t in &toks {
            assert_eq!(&q[t.span.0..t.span.1], t.surface);
        }
    }

    #[test]
    fn numbers_and_months() {
        assert_eq!(number_value("hundred"), Some(100.0));
        assert_eq!(number_value("2.5"), Some(2.5));
        assert_eq!(month_number("January"), Some(1));
        assert_eq!(month_number("Sept"), Some(9));
        assert_eq!(month_number("mar"), Some(3));
        assert_eq!(month_number("forest"), None);
        assert_eq!(tag("forests"), Pos::Noun);
        assert_eq!(tag("Rome"), Pos::Propn);
    }
}
