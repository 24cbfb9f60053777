use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::kgstore::{parse_term, Term};

/// Query answers: ordered rows of terms aligned with `vars`, or a boolean
/// for ASK queries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResultSet {
    pub vars: Vec<String>,
    pub rows: Vec<Vec<Term>>,
    pub boolean: Option<bool>,
}

#[derive(Serialize, Deserialize)]
struct Wire {
    vars: Vec<String>,
    rows: Vec<BTreeMap<String, String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    boolean: Option<bool>,
}

impl ResultSet {
    pub fn select(vars: Vec<String>, rows: Vec<Vec<Term>>) -> Self {
        ResultSet {
            vars,
            rows,
            boolean: None,
        }
    }

    pub fn boolean(value: bool) -> Self {
        ResultSet {
            vars: Vec::new(),
            rows: Vec::new(),
            boolean: Some(value),
        }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty() && self.boolean != Some(true)
    }

    /// Row tuples as a set, ignoring variable names and row order.
    pub fn row_set(&self) -> BTreeSet<&[Term]> {
        self.rows.iter().map(Vec::as_slice).collect()
    }

    /// Exact-match comparison: same boolean and the same set of tuples.
    pub fn same_answers(&self, other: &ResultSet) -> bool {
        self.boolean == other.boolean && self.row_set() == other.row_set()
    }

    /// `{"vars":[...],"rows":[{var: term}]}` with terms in N-Triples syntax.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self.wire()).expect("result sets serialize")
    }

    fn wire(&self) -> Wire {
        Wire {
            vars: self.vars.clone(),
            rows: self
                .rows
                .iter()
                .map(|r| {
                    self.vars
                        .iter()
                        .cloned()
                        .zip(r.iter().map(Term::to_string))
                        .collect()
                })
                .collect(),
            boolean: self.boolean,
        }
    }

    pub fn from_json(value: &serde_json::Value) -> Result<Self, String> {
        let wire: Wire = serde_json::from_value(value.clone()).map_err(|e| e.to_string())?;
        let mut rows = Vec::with_capacity(wire.rows.len());
        for (i, r) in wire.rows.iter().enumerate() {
            let mut row = Vec::with_capacity(wire.vars.len());
            for v in &wire.vars {
                let text = r.get(v).ok_or_else(|| format!("row {i} does not bind {v}"))?;
                row.push(parse_term(text).map_err(|e| format!("row {i}, {v}: {e}"))?);
            }
            if r.len() != wire.vars.len() {
                return Err(format!("row {i} binds variables outside the header"));
            }
            rows.push(row);
        }
        Ok(ResultSet {
            vars: wire.vars,
            rows,
            boolean: wire.boolean,
        })
    }

    /// Header line of `?var` names, then one tab-separated line per row.
    /// ASK results print `true` or `false`.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        if let Some(b) = self.boolean {
            let _ = writeln!(out, "{b}");
            return out;
        }
        let header: Vec<String> = self.vars.iter().map(|v| format!("?{v}")).collect();
        let _ = writeln!(out, "{}", header.join("\t"));
        for r in &self.rows {
            let cells: Vec<String> = r.iter().map(Term::to_string).collect();
            let _ = writeln!(out, "{}", cells.join("\t"));
        }
        out
    }
}

impl Serialize for ResultSet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.wire().serialize(s)
    }
}

impl<'de> Deserialize<'de> for ResultSet {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let value = serde_json::Value::deserialize(d)?;
        ResultSet::from_json(&value).map_err(serde::de::Error::custom)
    }
}
