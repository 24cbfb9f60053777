//! Translates natural-language requests about satellite image archives and
//! geographic entities into GeoSPARQL, runs them over an in-memory knowledge
//! graph and returns the answers.

pub mod annotate;
pub mod app;
pub mod geofns;
pub mod kgstore;
pub mod nlp;
pub mod querygen;
pub mod sparql;
