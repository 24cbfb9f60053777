//! The assembled question-answering engine, corpus evaluation and the HTTP
//! service.

mod corpus;
pub mod server;

use std::collections::BTreeSet;
use std::path::Path;
use std::time::Instant;

use serde::Serialize;
use thiserror::Error;

pub use corpus::{
    category_name, evaluate_corpus, load_corpus, parse_corpus, CategoryScore, CorpusEntry,
    CorpusError, CorpusReport, EntryOutcome, MatchMode,
};

use crate::annotate::{annotate, AnnotationSet, HeuristicClassifier, ReturnType, ReturnTypeClassifier};
use crate::geofns::{materialize, GeoCache, SpatialPredicate};
use crate::kgstore::{load_kg_dir, read_triples, Iri, KgError, KnowledgeGraph, Triple, TripleStore};
use crate::nlp::{export_conllu, parse_dependencies, tokenize_and_tag, NlpError};
use crate::querygen::{generate, gost_rewrite, QueryGenError};
use crate::sparql::{evaluate, parse, serialize, EvalError, Query, ResultSet};

#[derive(Debug, Error)]
pub enum AskError {
    #[error("question is empty")]
    EmptyQuestion,
    #[error("could not parse the question: {0}")]
    Nlp(#[from] NlpError),
    #[error("could not build a query: {0}")]
    Generate(#[from] QueryGenError),
    #[error("generated query does not re-parse: {0}")]
    Reparse(String),
    #[error("query evaluation failed: {0}")]
    Eval(#[from] EvalError),
}

#[derive(Debug, Error)]
pub enum EngineError {
    #[error(transparent)]
    Kg(#[from] KgError),
    #[error("{0}: materialized file holds no spatial relation triples")]
    NoRelations(String),
}

/// Milliseconds spent in each stage of one request.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct Timings {
    pub parse: f64,
    pub annotate: f64,
    pub generate: f64,
    pub rewrite: f64,
    pub execute: f64,
    pub total: f64,
}

/// Everything recorded on the way from question to query.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Trace {
    pub conllu: String,
    pub annotations: AnnotationSet,
    pub generation_notes: Vec<String>,
    pub sparql: String,
    pub rewritten_sparql: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct AskResponse {
    pub question: String,
    pub sparql: String,
    pub rewritten_sparql: String,
    pub answers: Option<ResultSet>,
    pub return_types: Vec<ReturnType>,
    pub trace: Option<Trace>,
    pub timings: Timings,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AskOptions {
    pub execute: bool,
    pub trace: bool,
}

impl Default for AskOptions {
    fn default() -> Self {
        AskOptions {
            execute: true,
            trace: false,
        }
    }
}

/// Class and property listing served to clients for autocompletion.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OntologyCatalog {
    pub classes: Vec<CatalogClass>,
    pub properties: Vec<CatalogProperty>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CatalogClass {
    pub iri: Iri,
    pub parent: Option<Iri>,
    pub synonyms: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CatalogProperty {
    pub iri: Iri,
    pub datatype: Option<Iri>,
    pub domains: Vec<Iri>,
    pub synonyms: Vec<String>,
}

/// Immutable after construction; shared freely between threads.
pub struct Engine {
    kg: KnowledgeGraph,
    materialized: TripleStore,
    relations: BTreeSet<Iri>,
    geo: GeoCache,
    classifier: Box<dyn ReturnTypeClassifier>,
}

fn ms(since: Instant) -> f64 {
    since.elapsed().as_secs_f64() * 1000.0
}

impl Engine {
    /// Materializes all three topological relations in memory.
    pub fn new(kg: KnowledgeGraph) -> Self {
        let relations = materialize(&kg.store, &SpatialPredicate::ALL.into_iter().collect());
        let triples = relations.iter().map(|r| r.to_triple()).collect();
        Self::with_materialized(kg, triples)
    }

    /// Uses precomputed relation triples, e.g. from `eoqa materialize`.
    pub fn with_materialized(kg: KnowledgeGraph, relations: Vec<Triple>) -> Self {
        let mut predicates: BTreeSet<Iri> = SpatialPredicate::ALL
            .into_iter()
            .map(SpatialPredicate::relation_iri)
            .filter(|p| relations.iter().any(|t| &t.predicate == p))
            .collect();
        if relations.is_empty() {
            predicates.clear();
        }
        Engine {
            materialized: kg.store.clone().with_triples(relations),
            kg,
            relations: predicates,
            geo: GeoCache::new(),
            classifier: Box::new(HeuristicClassifier),
        }
    }

    /// Loads every `.nt` file in `dir`; relations come from `materialized`
    /// when given, otherwise they are computed.
    pub fn load(dir: &Path, materialized: Option<&Path>) -> Result<Self, EngineError> {
        let kg = load_kg_dir(dir)?;
        match materialized {
            Some(path) => {
                let triples = read_triples(&[path.to_path_buf()])?;
                let relations: Vec<Triple> = triples
                    .into_iter()
                    .filter(|t| SpatialPredicate::from_relation_iri(t.predicate.as_str()).is_some())
                    .collect();
                if relations.is_empty() {
                    return Err(EngineError::NoRelations(path.display().to_string()));
                }
                Ok(Self::with_materialized(kg, relations))
            }
            None => Ok(Self::new(kg)),
        }
    }

    pub fn with_classifier(mut self, classifier: Box<dyn ReturnTypeClassifier>) -> Self {
        self.classifier = classifier;
        self
    }

    pub fn kg(&self) -> &KnowledgeGraph {
        &self.kg
    }

    /// Store holding the knowledge graph plus the materialized relations.
    pub fn materialized_store(&self) -> &TripleStore {
        &self.materialized
    }

    pub fn materialized_predicates(&self) -> &BTreeSet<Iri> {
        &self.relations
    }

    /// Runs the generated query on the plain store, without rewriting.
    pub fn execute(&self, q: &Query) -> Result<ResultSet, EvalError> {
        evaluate(q, &self.kg.store, &self.geo)
    }

    /// Runs a query on the store with materialized relations.
    pub fn execute_materialized(&self, q: &Query) -> Result<ResultSet, EvalError> {
        evaluate(q, &self.materialized, &self.geo)
    }

    pub fn rewrite(&self, q: &Query) -> Query {
        gost_rewrite(q, &self.relations)
    }

    /// Parses, annotates and generates the query without executing it.
    pub fn translate(&self, question: &str) -> Result<(AnnotationSet, Query, Vec<String>, String), AskError> {
        if question.trim().is_empty() {
            return Err(AskError::EmptyQuestion);
        }
        let g = parse_dependencies(&tokenize_and_tag(question)?);
        let set = annotate(question, &g, &self.kg, self.classifier.as_ref());
        let (q, notes) = generate(&set, &g)?;
        Ok((set, q, notes, export_conllu(&g, question)))
    }

    pub fn ask(&self, question: &str, opts: AskOptions) -> Result<AskResponse, AskError> {
        let start = Instant::now();
        if question.trim().is_empty() {
            return Err(AskError::EmptyQuestion);
        }
        let mut timings = Timings::default();

        let t = Instant::now();
        let g = parse_dependencies(&tokenize_and_tag(question)?);
        timings.parse = ms(t);

        let t = Instant::now();
        let set = annotate(question, &g, &self.kg, self.classifier.as_ref());
        timings.annotate = ms(t);

        let t = Instant::now();
        let (q, notes) = generate(&set, &g)?;
        let sparql = serialize(&q);
        match parse(&sparql) {
            Ok(back) if back == q => {}
            Ok(_) => return Err(AskError::Reparse("re-parsed query differs".into())),
            Err(e) => return Err(AskError::Reparse(e.to_string())),
        }
        timings.generate = ms(t);

        let t = Instant::now();
        let rewritten = self.rewrite(&q);
        let rewritten_sparql = serialize(&rewritten);
        timings.rewrite = ms(t);

        let t = Instant::now();
        let answers = if opts.execute {
            Some(self.execute_materialized(&rewritten)?)
        } else {
            None
        };
        timings.execute = ms(t);

        let trace = opts.trace.then(|| Trace {
            conllu: export_conllu(&g, question),
            annotations: set.clone(),
            generation_notes: notes,
            sparql: sparql.clone(),
            rewritten_sparql: rewritten_sparql.clone(),
        });
        timings.total = ms(start);
        Ok(AskResponse {
            question: question.to_string(),
            sparql,
            rewritten_sparql,
            answers,
            return_types: set.return_types.clone(),
            trace,
            timings,
        })
    }

    pub fn ontology_catalog(&self) -> OntologyCatalog {
        let o = &self.kg.ontology;
        OntologyCatalog {
            classes: o
                .classes
                .values()
                .map(|c| CatalogClass {
                    iri: c.iri.clone(),
                    parent: c.parent.clone(),
                    synonyms: c.synonyms.clone(),
                })
                .collect(),
            properties: o
                .properties
                .values()
                .map(|p| CatalogProperty {
                    iri: p.iri.clone(),
                    datatype: p.datatype.clone(),
                    domains: p.domains.clone(),
                    synonyms: p.synonyms.clone(),
                })
                .collect(),
        }
    }
}
