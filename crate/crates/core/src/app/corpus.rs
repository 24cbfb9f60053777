use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{AskOptions, Engine, Trace};
use crate::kgstore::Term;
use crate::sparql::{parse, ResultSet};

/// One question of an evaluation corpus (a JSON Lines record).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct CorpusEntry {
    pub id: String,
    pub question: String,
    pub category: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gold_query: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gold_answers: Option<ResultSet>,
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("{path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error("line {line}: {message}")]
    Json { line: usize, message: String },
    #[error("corpus is empty")]
    Empty,
    #[error("entry {0} has neither goldQuery nor goldAnswers")]
    MissingGold(String),
    #[error("entry id {0} appears more than once")]
    DuplicateId(String),
    #[error("entry {id}: goldQuery does not parse: {message}")]
    BadGoldQuery { id: String, message: String },
}

/// Label of the question family a category letter stands for.
pub fn category_name(category: &str) -> Option<&'static str> {
    Some(match category {
        "A" => "attribute lookup",
        "B" => "containment",
        "C" => "distance",
        "D" => "counting and grouping",
        "E" => "superlatives",
        "F" => "yes/no",
        "G" => "temporal",
        "H" => "image requests",
        "I" => "conjunctions",
        _ => return None,
    })
}

/// Parses JSON Lines text; blank lines are skipped.
pub fn parse_corpus(text: &str) -> Result<Vec<CorpusEntry>, CorpusError> {
    let mut entries = Vec::new();
    let mut ids = BTreeSet::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let e: CorpusEntry = serde_json::from_str(line).map_err(|err| CorpusError::Json {
            line: i + 1,
            message: err.to_string(),
        })?;
        if e.gold_query.is_none() && e.gold_answers.is_none() {
            return Err(CorpusError::MissingGold(e.id));
        }
        if let Some(q) = &e.gold_query {
            parse(q).map_err(|err| CorpusError::BadGoldQuery {
                id: e.id.clone(),
                message: err.to_string(),
            })?;
        }
        if !ids.insert(e.id.clone()) {
            return Err(CorpusError::DuplicateId(e.id));
        }
        entries.push(e);
    }
    if entries.is_empty() {
        return Err(CorpusError::Empty);
    }
    Ok(entries)
}

pub fn load_corpus(path: &Path) -> Result<Vec<CorpusEntry>, CorpusError> {
    let text = std::fs::read_to_string(path).map_err(|e| CorpusError::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    parse_corpus(&text)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum MatchMode {
    Answers,
    Query,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct EntryOutcome {
    pub id: String,
    pub category: String,
    pub question: String,
    pub mode: MatchMode,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sparql: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    /// Gold rows the engine did not return.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub missing: Vec<String>,
    /// Returned rows absent from the gold answers.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub unexpected: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gold_query: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<Trace>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CategoryScore {
    pub category: String,
    pub total: usize,
    pub passed: usize,
    pub accuracy: f64,
}

impl CategoryScore {
    fn new(category: &str, total: usize, passed: usize) -> Self {
        CategoryScore {
            category: category.to_string(),
            total,
            passed,
            accuracy: if total == 0 { 0.0 } else { passed as f64 / total as f64 },
        }
    }
}

/// Per-category and overall exact-match accuracy. Entries are sorted by id
/// so the report does not depend on corpus order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorpusReport {
    pub overall: CategoryScore,
    pub categories: Vec<CategoryScore>,
    pub entries: Vec<EntryOutcome>,
}

fn answer_lines(rs: &ResultSet) -> BTreeSet<String> {
    if let Some(b) = rs.boolean {
        return BTreeSet::from([b.to_string()]);
    }
    rs.rows
        .iter()
        .map(|r| r.iter().map(Term::to_string).collect::<Vec<_>>().join("\t"))
        .collect()
}

fn run_entry(engine: &Engine, e: &CorpusEntry) -> EntryOutcome {
    let mode = if e.gold_answers.is_some() {
        MatchMode::Answers
    } else {
        MatchMode::Query
    };
    let mut out = EntryOutcome {
        id: e.id.clone(),
        category: e.category.clone(),
        question: e.question.clone(),
        mode,
        passed: false,
        sparql: None,
        error: None,
        missing: Vec::new(),
        unexpected: Vec::new(),
        gold_query: None,
        trace: None,
    };
    let opts = AskOptions {
        execute: mode == MatchMode::Answers,
        trace: true,
    };
    let response = match engine.ask(&e.question, opts) {
        Ok(r) => r,
        Err(err) => {
            out.error = Some(err.to_string());
            out.gold_query = e.gold_query.clone();
            return out;
        }
    };
    out.sparql = Some(response.sparql.clone());
    match mode {
        MatchMode::Answers => {
            let gold = e.gold_answers.as_ref().expect("answers mode");
            let got = response.answers.as_ref().expect("executed");
            out.passed = got.same_answers(gold);
            let (g, a) = (answer_lines(gold), answer_lines(got));
            out.missing = g.difference(&a).cloned().collect();
            out.unexpected = a.difference(&g).cloned().collect();
        }
        MatchMode::Query => {
            let gold = parse(e.gold_query.as_deref().expect("query mode")).expect("checked at load");
            let ours = parse(&response.sparql).expect("engine output re-parses");
            out.passed = ours.alpha_equivalent(&gold);
        }
    }
    if !out.passed {
        out.gold_query = e.gold_query.clone();
        out.trace = response.trace;
    }
    out
}

/// Scores every entry: with gold answers the result sets must be equal as
/// sets of rows; with only a gold query the ASTs must be equal up to
/// variable renaming.
pub fn evaluate_corpus(engine: &Engine, entries: &[CorpusEntry]) -> Result<CorpusReport, CorpusError> {
    if entries.is_empty() {
        return Err(CorpusError::Empty);
    }
    let mut outcomes: Vec<EntryOutcome> = entries.iter().map(|e| run_entry(engine, e)).collect();
    outcomes.sort_by(|a, b| a.id.cmp(&b.id));
    let mut per: BTreeMap<&str, (usize, usize)> = BTreeMap::new();
    for o in &outcomes {
        let slot = per.entry(o.category.as_str()).or_default();
        slot.0 += 1;
        slot.1 += usize::from(o.passed);
    }
    let categories = per.iter().map(|(c, (t, p))| CategoryScore::new(c, *t, *p)).collect();
    let passed = outcomes.iter().filter(|o| o.passed).count();
    Ok(CorpusReport {
        overall: CategoryScore::new("ALL", outcomes.len(), passed),
        categories,
        entries: outcomes,
    })
}

impl CorpusReport {
    pub fn failures(&self) -> impl Iterator<Item = &EntryOutcome> {
        self.entries.iter().filter(|e| !e.passed)
    }

    /// Plain-text table, one row per category plus `ALL`, followed by the
    /// failing entries.
    pub fn to_table(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{:<9}{:<24}{:>10}{:>9}{:>10}", "Category", "", "Questions", "Correct", "Accuracy");
        let row = |s: &mut String, c: &CategoryScore, name: &str| {
            let _ = writeln!(
                s,
                "{:<9}{:<24}{:>10}{:>9}{:>9.2}%",
                c.category,
                name,
                c.total,
                c.passed,
                c.accuracy * 100.0
            );
        };
        for c in &self.categories {
            row(&mut s, c, category_name(&c.category).unwrap_or(""));
        }
        row(&mut s, &self.overall, "");
        let failures: Vec<&EntryOutcome> = self.failures().collect();
        if !failures.is_empty() {
            let _ = writeln!(s, "\nFailures:");
            for f in failures {
                let _ = writeln!(s, "  {} [{}] {}", f.id, f.category, f.question);
                if let Some(e) = &f.error {
                    let _ = writeln!(s, "    error: {e}");
                }
                for m in &f.missing {
                    let _ = writeln!(s, "    - {m}");
                }
                for u in &f.unexpected {
                    let _ = writeln!(s, "    + {u}");
                }
                if f.mode == MatchMode::Query {
                    let _ = writeln!(s, "    query differs from the gold query");
                }
            }
        }
        s
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("reports serialize")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_entries_without_gold() {
        let err = parse_corpus(r#"{"id":"a","question":"q","category":"A"}"#).unwrap_err();
        assert!(matches!(err, CorpusError::MissingGold(id) if id == "a"));
    }

    #[test]
    fn rejects_empty_and_duplicate_corpora() {
        assert!(matches!(parse_corpus("\n\n"), Err(CorpusError::Empty)));
        let line = r#"{"id":"a","question":"q","category":"A","goldAnswers":{"vars":[],"rows":[],"boolean":true}}"#;
        let twice = format!("{line}\n{line}\n");
        assert!(matches!(parse_corpus(&twice), Err(CorpusError::DuplicateId(_))));
    }

    #[test]
    fn reports_bad_json_with_line_number() {
        let text = "\n{not json}\n";
        assert!(matches!(parse_corpus(text), Err(CorpusError::Json { line: 2, .. })));
    }

    #[test]
    fn rejects_unparseable_gold_query() {
        let line = r#"{"id":"a","question":"q","category":"A","goldQuery":"SELECT WHERE"}"#;
        assert!(matches!(parse_corpus(line), Err(CorpusError::BadGoldQuery { .. })));
    }

    #[test]
    fn category_letters_have_names() {
        for c in ["A", "B", "C", "D", "E", "F", "G", "H", "I"] {
            assert!(category_name(c).is_some());
        }
        assert_eq!(category_name("Z"), None);
    }
}
