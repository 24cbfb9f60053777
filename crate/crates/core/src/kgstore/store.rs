use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::ops::Bound;

use super::ntriples::Triple;
use super::similarity::{jaccard, normalize, trigrams};
use super::term::{Iri, Term};
use super::vocab;

pub type TermId = u32;

/// One `rdfs:label` occurrence.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelEntry {
    pub resource: Iri,
    pub text: String,
    pub language: Option<String>,
    pub normalized: String,
}

/// Trigram inverted index over every `rdfs:label` literal in the store.
#[derive(Debug, Default, Clone)]
pub struct LabelIndex {
    entries: Vec<LabelEntry>,
    postings: HashMap<String, Vec<usize>>,
    grams: Vec<BTreeSet<String>>,
}

impl LabelIndex {
    fn build(entries: Vec<LabelEntry>) -> Self {
        let mut postings: HashMap<String, Vec<usize>> = HashMap::new();
        let mut grams = Vec::with_capacity(entries.len());
        for (i, e) in entries.iter().enumerate() {
            let g = trigrams(&e.normalized);
            for t in &g {
                postings.entry(t.clone()).or_default().push(i);
            }
            grams.push(g);
        }
        LabelIndex {
            entries,
            postings,
            grams,
        }
    }

    pub fn entries(&self) -> &[LabelEntry] {
        &self.entries
    }

    /// Label ids sharing at least one trigram with `grams`.
    fn candidates(&self, grams: &BTreeSet<String>) -> BTreeSet<usize> {
        grams
            .iter()
            .filter_map(|g| self.postings.get(g))
            .flatten()
            .copied()
            .collect()
    }
}

/// A resource matched by [`TripleStore::lookup_label`].
#[derive(Debug, Clone, PartialEq)]
pub struct LabelHit {
    pub iri: Iri,
    pub score: f64,
    pub label: String,
}

/// In-memory triple store with dictionary-encoded terms and three sorted
/// permutation indexes. Immutable once built.
#[derive(Debug, Default, Clone)]
pub struct TripleStore {
    terms: Vec<Term>,
    ids: HashMap<Term, TermId>,
    spo: BTreeSet<[TermId; 3]>,
    pos: BTreeSet<[TermId; 3]>,
    osp: BTreeSet<[TermId; 3]>,
    labels: LabelIndex,
}

impl TripleStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_triples(triples: impl IntoIterator<Item = Triple>) -> Self {
        let mut store = TripleStore::new();
        store.insert_all(triples);
        store
    }

    /// Returns a new store holding this store's triples plus `extra`.
    pub fn with_triples(mut self, extra: impl IntoIterator<Item = Triple>) -> Self {
        self.insert_all(extra);
        self
    }

    fn insert_all(&mut self, triples: impl IntoIterator<Item = Triple>) {
        for t in triples {
            let s = self.intern(Term::Iri(t.subject));
            let p = self.intern(Term::Iri(t.predicate));
            let o = self.intern(t.object);
            self.spo.insert([s, p, o]);
            self.pos.insert([p, o, s]);
            self.osp.insert([o, s, p]);
        }
        self.rebuild_labels();
    }

    fn intern(&mut self, term: Term) -> TermId {
        if let Some(id) = self.ids.get(&term) {
            return *id;
        }
        let id = self.terms.len() as TermId;
        self.terms.push(term.clone());
        self.ids.insert(term, id);
        id
    }

    fn rebuild_labels(&mut self) {
        let mut entries = Vec::new();
        if let Some(label) = self.id_of_iri(vocab::RDFS_LABEL) {
            for [s, _, o] in self.match_ids(None, Some(label), None) {
                let (Term::Iri(resource), Term::Literal(lit)) = (self.term(s), self.term(o)) else {
                    continue;
                };
                entries.push(LabelEntry {
                    resource: resource.clone(),
                    text: lit.lexical.clone(),
                    language: lit.language.clone(),
                    normalized: normalize(&lit.lexical),
                });
            }
        }
        entries.sort_by(|a, b| {
            (&a.resource, &a.text, &a.language).cmp(&(&b.resource, &b.text, &b.language))
        });
        self.labels = LabelIndex::build(entries);
    }

    pub fn len(&self) -> usize {
        self.spo.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spo.is_empty()
    }

    pub fn term(&self, id: TermId) -> &Term {
        &self.terms[id as usize]
    }

    pub fn id_of(&self, term: &Term) -> Option<TermId> {
        self.ids.get(term).copied()
    }

    pub fn id_of_iri(&self, iri: &str) -> Option<TermId> {
        let iri = Iri::new(iri).ok()?;
        self.id_of(&Term::Iri(iri))
    }

    pub fn labels(&self) -> &LabelIndex {
        &self.labels
    }

    /// Triples matching the bound positions, in (s, p, o) id order.
    pub fn match_ids(
        &self,
        s: Option<TermId>,
        p: Option<TermId>,
        o: Option<TermId>,
    ) -> Vec<[TermId; 3]> {
        fn range(
            set: &BTreeSet<[TermId; 3]>,
            a: TermId,
            b: Option<TermId>,
        ) -> impl Iterator<Item = &[TermId; 3]> {
            let (lo, hi) = match b {
                Some(b) => ([a, b, 0], Bound::Included([a, b, TermId::MAX])),
                None => ([a, 0, 0], Bound::Included([a, TermId::MAX, TermId::MAX])),
            };
            set.range((Bound::Included(lo), hi))
        }
        match (s, p, o) {
            (Some(s), Some(p), Some(o)) => {
                if self.spo.contains(&[s, p, o]) {
                    vec![[s, p, o]]
                } else {
                    Vec::new()
                }
            }
            (Some(s), p, None) => range(&self.spo, s, p).copied().collect(),
            (Some(s), None, Some(o)) => range(&self.osp, o, Some(s))
                .map(|&[o, s, p]| [s, p, o])
                .collect(),
            (None, Some(p), o) => {
                let mut v: Vec<_> = range(&self.pos, p, o).map(|&[p, o, s]| [s, p, o]).collect();
                v.sort_unstable();
                v
            }
            (None, None, Some(o)) => {
                let mut v: Vec<_> = range(&self.osp, o, None).map(|&[o, s, p]| [s, p, o]).collect();
                v.sort_unstable();
                v
            }
            (None, None, None) => self.spo.iter().copied().collect(),
        }
    }

    /// Iterates every triple as owned terms, in id order.
    pub fn triples(&self) -> impl Iterator<Item = (&Term, &Term, &Term)> + '_ {
        self.spo
            .iter()
            .map(|&[s, p, o]| (self.term(s), self.term(p), self.term(o)))
    }

    /// Objects of `subject predicate ?o`.
    pub fn objects(&self, subject: &Iri, predicate: &str) -> Vec<&Term> {
        let (Some(s), Some(p)) = (
            self.id_of(&Term::Iri(subject.clone())),
            self.id_of_iri(predicate),
        ) else {
            return Vec::new();
        };
        self.match_ids(Some(s), Some(p), None)
            .into_iter()
            .map(|[_, _, o]| self.term(o))
            .collect()
    }

    /// Subjects of `?s predicate object`.
    pub fn subjects(&self, predicate: &str, object: &Term) -> Vec<&Iri> {
        let (Some(p), Some(o)) = (self.id_of_iri(predicate), self.id_of(object)) else {
            return Vec::new();
        };
        self.match_ids(None, Some(p), Some(o))
            .into_iter()
            .filter_map(|[s, _, _]| self.term(s).as_iri())
            .collect()
    }

    pub fn contains(&self, s: &Iri, p: &str, o: &Term) -> bool {
        match (
            self.id_of(&Term::Iri(s.clone())),
            self.id_of_iri(p),
            self.id_of(o),
        ) {
            (Some(s), Some(p), Some(o)) => self.spo.contains(&[s, p, o]),
            _ => false,
        }
    }

    /// Top-`k` resources whose labels are most similar to `text`.
    ///
    /// Scores are trigram Jaccard similarities over normalized text. Each
    /// resource is scored by its best label; ties prefer a resource whose best
    /// label is English, then lower IRI.
    pub fn lookup_label(&self, text: &str, k: usize) -> Vec<LabelHit> {
        let normalized = normalize(text);
        if normalized.is_empty() || k == 0 {
            return Vec::new();
        }
        let query = trigrams(&normalized);
        let mut best: BTreeMap<&Iri, (f64, bool, &str)> = BTreeMap::new();
        for id in self.labels.candidates(&query) {
            let entry = &self.labels.entries[id];
            let score = jaccard(&query, &self.labels.grams[id]);
            let english = entry.language.as_deref().is_none_or(|l| l == "en" || l.starts_with("en-"));
            let slot = best
                .entry(&entry.resource)
                .or_insert((score, english, entry.text.as_str()));
            if score > slot.0 || (score == slot.0 && english && !slot.1) {
                *slot = (score, english, entry.text.as_str());
            }
        }
        let mut hits: Vec<_> = best.into_iter().collect();
        hits.sort_by(|(ia, (sa, ea, _)), (ib, (sb, eb, _))| {
            sb.total_cmp(sa).then(eb.cmp(ea)).then(ia.cmp(ib))
        });
        hits.into_iter()
            .take(k)
            .map(|(iri, (score, _, label))| LabelHit {
                iri: iri.clone(),
                score,
                label: label.to_string(),
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kgstore::term::Literal;

    fn iri(s: &str) -> Iri {
        Iri::new(format!("http://t.org/{s}")).unwrap()
    }

    fn label(s: &str, text: &str) -> Triple {
        Triple::new(
            iri(s),
            Iri::new(vocab::RDFS_LABEL).unwrap(),
            Literal::lang(text, "en"),
        )
    }

    fn gazetteer() -> TripleStore {
        TripleStore::from_triples([
            label("rome", "Rome"),
            Triple::new(iri("roma"), Iri::new(vocab::RDFS_LABEL).unwrap(), Literal::lang("Roma", "it")),
            label("paris", "Paris"),
            Triple::new(iri("rome"), iri("p"), iri("paris")),
        ])
    }

    #[test]
    fn misspelling_ranks_closest_label_first() {
        let hits = gazetteer().lookup_label("Romme", 3);
        assert_eq!(hits[0].iri, iri("rome"));
        assert!((hits[0].score - 0.5).abs() < 1e-12);
        assert!(hits.windows(2).all(|w| w[0].score >= w[1].score));
    }

    #[test]
    fn exact_label_scores_one() {
        let hits = gazetteer().lookup_label("paris", 1);
        assert_eq!(hits.len(), 1);
        assert_eq!(hits[0].score, 1.0);
    }

    #[test]
    fn empty_after_normalization_gives_nothing() {
        assert!(gazetteer().lookup_label(" -- ", 5).is_empty());
    }

    #[test]
    fn pattern_matching_uses_all_permutations() {
        let store = gazetteer();
        let p = store.id_of(&Term::Iri(iri("p"))).unwrap();
        let paris = store.id_of(&Term::Iri(iri("paris"))).unwrap();
        assert_eq!(store.match_ids(None, Some(p), None).len(), 1);
        assert_eq!(store.match_ids(None, None, Some(paris)).len(), 1);
        assert_eq!(store.match_ids(None, None, None).len(), 4);
        assert!(store.contains(&iri("rome"), "http://t.org/p", &Term::Iri(iri("paris"))));
    }
}
