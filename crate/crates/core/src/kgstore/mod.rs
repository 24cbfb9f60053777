//! Feature-centric knowledge graph: terms, N-Triples I/O, the indexed triple
//! store with its label index, and the ontology.

mod ntriples;
mod ontology;
pub mod similarity;
mod store;
mod term;
pub mod vocab;

use std::path::PathBuf;

use thiserror::Error;

pub(crate) use ntriples::parse_literal_prefix;
pub use ntriples::{parse_document, parse_line, parse_term, write_document, NtError, Triple};
pub use ontology::{
    build_kg, feature_geometries, load_kg, load_kg_dir, nt_files_in, read_triples, ClassInfo,
    KnowledgeGraph, Ontology, PropertyInfo,
};
pub use store::{LabelEntry, LabelHit, LabelIndex, TermId, TripleStore};
pub use term::{Iri, IriError, Literal, Term};

#[derive(Debug, Error)]
pub enum KgError {
    #[error("{path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("ontology is empty: no Feature class declared")]
    EmptyOntology,
    #[error("ontology cycle through class {0}")]
    OntologyCycle(Iri),
    #[error("class {0} does not descend from Feature")]
    Unrooted(Iri),
    #[error("class {0} declares more than one superclass")]
    MultipleParents(Iri),
    #[error("{0} has no English synonyms")]
    MissingSynonyms(Iri),
    #[error("{subject} refers to unknown class {class}")]
    UnknownClass { subject: Iri, class: Iri },
    #[error("feature {0} has a geometry but no ontology type")]
    UntypedFeature(Iri),
    #[error("feature {subject}: geometry {geometry} has no geo:asWKT literal")]
    DanglingGeometry { subject: Iri, geometry: Iri },
    #[error("feature {subject}: malformed WKT: {message}")]
    MalformedWkt { subject: Iri, message: String },
}
