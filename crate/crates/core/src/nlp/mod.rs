//! Tokenization, part-of-speech tagging and dependency parsing for English
//! questions, plus CoNLL-U exchange with external parsers.

mod conllu;
mod parser;
mod tokenize;

use std::collections::VecDeque;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use conllu::{export_conllu, ingest_conllu};
pub use parser::parse_dependencies;
pub use tokenize::{
    is_iso_date, is_unit, month_number, number_value, tag, tokenize_and_tag, AUXILIARIES, MONTHS,
    UNITS,
};

/// Dependency labels the built-in parser emits.
pub const LABELS: &[&str] = &[
    "root", "nsubj", "obj", "iobj", "obl", "nmod", "amod", "nummod", "det", "case", "cc",
    "conj:and", "conj:or", "advmod", "compound", "punct", "acl", "acl:relcl", "aux", "cop", "fixed",
    "obl:npmod", "nmod:npmod", "dep",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Pos {
    Noun,
    Propn,
    Verb,
    Adj,
    Adv,
    Adp,
    Num,
    Det,
    Conj,
    Punct,
    Other,
}

impl Pos {
    pub fn as_str(self) -> &'static str {
        match self {
            Pos::Noun => "NOUN",
            Pos::Propn => "PROPN",
            Pos::Verb => "VERB",
            Pos::Adj => "ADJ",
            Pos::Adv => "ADV",
            Pos::Adp => "ADP",
            Pos::Num => "NUM",
            Pos::Det => "DET",
            Pos::Conj => "CONJ",
            Pos::Punct => "PUNCT",
            Pos::Other => "OTHER",
        }
    }

    pub fn is_nominal(self) -> bool {
        matches!(self, Pos::Noun | Pos::Propn)
    }
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub index: usize,
    pub surface: String,
    pub lemma: String,
    pub pos: Pos,
    /// Byte offsets `[start, end)` into the question.
    pub span: (usize, usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub head: usize,
    pub dependent: usize,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NlpError {
    #[error("empty question")]
    EmptyQuestion,
    #[error("token index {index} out of range for {len} tokens")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("dependency graph has {0} roots")]
    RootCount(usize),
    #[error("cycle through token {0}")]
    Cycle(usize),
    #[error("CoNLL-U line {line}: {message}")]
    Conllu { line: usize, message: String },
}

/// A rooted dependency tree over the tokens of one question.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DepGraph {
    pub tokens: Vec<Token>,
    pub edges: Vec<Edge>,
    pub root: usize,
    #[serde(skip)]
    heads: Vec<Option<usize>>,
}

impl DepGraph {
    /// Builds a graph from one `(head, label)` per token; exactly one token
    /// has no head.
    pub fn from_heads(
        tokens: Vec<Token>,
        heads: Vec<Option<(usize, String)>>,
    ) -> Result<Self, NlpError> {
        let n = tokens.len();
        if n == 0 {
            return Err(NlpError::EmptyQuestion);
        }
        let roots: Vec<usize> = (0..n).filter(|&i| heads[i].is_none()).collect();
        if roots.len() != 1 {
            return Err(NlpError::RootCount(roots.len()));
        }
        let mut edges = Vec::new();
        let mut plain = vec![None; n];
        for (i, h) in heads.into_iter().enumerate() {
            if let Some((head, label)) = h {
                if head >= n {
                    return Err(NlpError::IndexOutOfRange { index: head, len: n });
                }
                plain[i] = Some(head);
                edges.push(Edge {
                    head,
                    dependent: i,
                    label,
                });
            }
        }
        for start in 0..n {
            let mut cur = start;
            for _ in 0..=n {
                match plain[cur] {
                    Some(h) => cur = h,
                    None => break,
                }
            }
            if plain[cur].is_some() {
                return Err(NlpError::Cycle(start));
            }
        }
        Ok(DepGraph {
            tokens,
            edges,
            root: roots[0],
            heads: plain,
        })
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn head(&self, i: usize) -> Option<usize> {
        self.heads.get(i).copied().flatten()
    }

    pub fn label(&self, i: usize) -> Option<&str> {
        self.edges
            .iter()
            .find(|e| e.dependent == i)
            .map(|e| e.label.as_str())
    }

    pub fn children(&self, i: usize) -> Vec<(usize, &str)> {
        self.edges
            .iter()
            .filter(|e| e.head == i)
            .map(|e| (e.dependent, e.label.as_str()))
            .collect()
    }

    /// Tokens in breadth-first order from the root, children by position.
    pub fn bfs_order(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.len());
        let mut queue = VecDeque::from([self.root]);
        while let Some(i) = queue.pop_front() {
            out.push(i);
            let mut kids: Vec<usize> = self.children(i).into_iter().map(|(c, _)| c).collect();
            kids.sort_unstable();
            queue.extend(kids);
        }
        out
    }

    fn path_to_root(&self, mut i: usize) -> Vec<usize> {
        let mut out = vec![i];
        while let Some(h) = self.head(i) {
            out.push(h);
            i = h;
        }
        out
    }
}

/// Number of edges on the undirected tree path between `i` and `j`.
pub fn tree_distance(g: &DepGraph, i: usize, j: usize) -> Result<usize, NlpError> {
    for index in [i, j] {
        if index >= g.len() {
            return Err(NlpError::IndexOutOfRange {
                index,
                len: g.len(),
            });
        }
    }
    let a = g.path_to_root(i);
    let b = g.path_to_root(j);
    // Strip the shared suffix above the lowest common ancestor.
    let mut shared = 0;
    while shared < a.len() && shared < b.len() && a[a.len() - 1 - shared] == b[b.len() - 1 - shared] {
        shared += 1;
    }
    Ok(a.len() - shared + b.len() - shared)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph(q: &str) -> DepGraph {
        parse_dependencies(&tokenize_and_tag(q).unwrap())
    }

    fn bfs_distance(g: &DepGraph, i: usize, j: usize) -> usize {
        let mut dist = vec![usize::MAX; g.len()];
        dist[i] = 0;
        let mut queue = VecDeque::from([i]);
        while let Some(u) = queue.pop_front() {
            for e in &g.edges {
                let v = if e.head == u {
                    e.dependent
                } else if e.dependent == u {
                    e.head
                } else {
                    continue;
                };
                if dist[v] == usize::MAX {
                    dist[v] = dist[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        dist[j]
    }

    #[test]
    fn distance_matches_bfs() {
        let g = graph("Show me all images taken in January 2021 with rivers less than 2km away from towns and forests in the Emilia Romagna region, having cloud coverage less than 10%");
        for i in 0..g.len() {
            for j in 0..g.len() {
                assert_eq!(tree_distance(&g, i, j).unwrap(), bfs_distance(&g, i, j));
            }
        }
        assert!(tree_distance(&g, 0, g.len()).is_err());
    }

    #[test]
    fn single_token_is_root() {
        let g = graph("rivers");
        assert_eq!(g.root, 0);
        assert!(g.edges.is_empty());
        assert_eq!(tree_distance(&g, 0, 0).unwrap(), 0);
    }

    #[test]
    fn two_roots_rejected() {
        let toks = tokenize_and_tag("rivers lakes").unwrap();
        assert_eq!(
            DepGraph::from_heads(toks, vec![None, None]),
            Err(NlpError::RootCount(2))
        );
    }

    #[test]
    fn cycles_rejected() {
        let toks = tokenize_and_tag("a b c").unwrap();
        let heads = vec![None, Some((2, "dep".into())), Some((1, "dep".into()))];
        assert!(matches!(DepGraph::from_heads(toks, heads), Err(NlpError::Cycle(_))));
    }
}
