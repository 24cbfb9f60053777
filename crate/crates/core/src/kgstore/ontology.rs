use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::ntriples::{parse_document, Triple};
use super::similarity::{lemma_similarity, SYNONYM_THRESHOLD};
use super::store::TripleStore;
use super::term::{Iri, Term};
use super::{vocab, KgError};
use crate::geofns::parse_wkt;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassInfo {
    pub iri: Iri,
    pub synonyms: Vec<String>,
    pub parent: Option<Iri>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropertyInfo {
    pub iri: Iri,
    pub synonyms: Vec<String>,
    pub datatype: Option<Iri>,
    pub domains: Vec<Iri>,
}

/// Class hierarchy rooted at `Feature`, with English synonyms for classes
/// and properties and the per-class property schema.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Ontology {
    pub root: Iri,
    pub classes: BTreeMap<Iri, ClassInfo>,
    pub properties: BTreeMap<Iri, PropertyInfo>,
}

impl Ontology {
    /// Extracts and validates the ontology described by `store`.
    pub fn from_store(store: &TripleStore) -> Result<Self, KgError> {
        let root = Iri::from_static(vocab::EO_FEATURE);
        let class_markers = [vocab::OWL_CLASS, vocab::RDFS_CLASS];
        let mut class_iris = BTreeSet::new();
        for marker in class_markers {
            for s in store.subjects(vocab::RDF_TYPE, &Term::Iri(Iri::from_static(marker))) {
                class_iris.insert(s.clone());
            }
        }
        if !class_iris.contains(&root) {
            return Err(KgError::EmptyOntology);
        }

        let mut classes = BTreeMap::new();
        for iri in &class_iris {
            let parents: Vec<Iri> = store
                .objects(iri, vocab::RDFS_SUBCLASS_OF)
                .into_iter()
                .filter_map(|t| t.as_iri().cloned())
                .collect();
            if parents.len() > 1 {
                return Err(KgError::MultipleParents(iri.clone()));
            }
            let parent = parents.into_iter().next();
            if let Some(p) = &parent {
                if !class_iris.contains(p) {
                    return Err(KgError::UnknownClass {
                        subject: iri.clone(),
                        class: p.clone(),
                    });
                }
            }
            let synonyms = synonyms_of(store, iri);
            if synonyms.is_empty() {
                return Err(KgError::MissingSynonyms(iri.clone()));
            }
            classes.insert(
                iri.clone(),
                ClassInfo {
                    iri: iri.clone(),
                    synonyms,
                    parent,
                },
            );
        }

        if classes[&root].parent.is_some() {
            return Err(KgError::Unrooted(root));
        }
        for iri in classes.keys() {
            let mut seen = BTreeSet::new();
            let mut cur = iri.clone();
            loop {
                if !seen.insert(cur.clone()) {
                    return Err(KgError::OntologyCycle(iri.clone()));
                }
                match &classes[&cur].parent {
                    Some(p) => cur = p.clone(),
                    None if cur == root => break,
                    None => return Err(KgError::Unrooted(iri.clone())),
                }
            }
        }

        let mut properties = BTreeMap::new();
        let property_markers = [
            vocab::OWL_DATATYPE_PROPERTY,
            vocab::OWL_OBJECT_PROPERTY,
            vocab::RDF_PROPERTY,
        ];
        let mut prop_iris = BTreeSet::new();
        for marker in property_markers {
            for s in store.subjects(vocab::RDF_TYPE, &Term::Iri(Iri::from_static(marker))) {
                prop_iris.insert(s.clone());
            }
        }
        for iri in prop_iris {
            let domains: Vec<Iri> = store
                .objects(&iri, vocab::RDFS_DOMAIN)
                .into_iter()
                .filter_map(|t| t.as_iri().cloned())
                .collect();
            for d in &domains {
                if !classes.contains_key(d) {
                    return Err(KgError::UnknownClass {
                        subject: iri.clone(),
                        class: d.clone(),
                    });
                }
            }
            let synonyms = synonyms_of(store, &iri);
            if synonyms.is_empty() {
                return Err(KgError::MissingSynonyms(iri.clone()));
            }
            let datatype = store
                .objects(&iri, vocab::RDFS_RANGE)
                .into_iter()
                .find_map(|t| t.as_iri().cloned());
            properties.insert(
                iri.clone(),
                PropertyInfo {
                    iri,
                    synonyms,
                    datatype,
                    domains,
                },
            );
        }

        Ok(Ontology {
            root,
            classes,
            properties,
        })
    }

    /// `class` followed by its ancestors up to the root.
    pub fn ancestors(&self, class: &Iri) -> Vec<Iri> {
        let mut out = Vec::new();
        let mut cur = Some(class.clone());
        while let Some(c) = cur {
            cur = self.classes.get(&c).and_then(|i| i.parent.clone());
            out.push(c);
        }
        out
    }

    pub fn is_subclass_of(&self, class: &Iri, ancestor: &Iri) -> bool {
        self.ancestors(class).iter().any(|c| c == ancestor)
    }

    /// Properties declared on `class` or inherited from its ancestors.
    pub fn properties_of(&self, class: &Iri) -> Vec<&PropertyInfo> {
        let lineage = self.ancestors(class);
        self.properties
            .values()
            .filter(|p| p.domains.iter().any(|d| lineage.contains(d)))
            .collect()
    }

    /// Best class whose synonym matches `word` (plurals folded), if the
    /// similarity reaches the synonym threshold.
    pub fn class_for_word(&self, word: &str) -> Option<(Iri, f64)> {
        best_match(
            self.classes
                .values()
                .flat_map(|c| c.synonyms.iter().map(move |s| (&c.iri, s))),
            word,
        )
    }

    pub fn property_for_phrase(
        &self,
        class: &Iri,
        phrase: &str,
    ) -> Result<Option<(Iri, f64)>, KgError> {
        if !self.classes.contains_key(class) {
            return Err(KgError::UnknownClass {
                subject: class.clone(),
                class: class.clone(),
            });
        }
        Ok(best_match(
            self.properties_of(class)
                .into_iter()
                .flat_map(|p| p.synonyms.iter().map(move |s| (&p.iri, s))),
            phrase,
        ))
    }

    /// Most specific ontology class among the `rdf:type`s of `resource`.
    pub fn most_specific_type(&self, store: &TripleStore, resource: &Iri) -> Option<Iri> {
        let types: Vec<Iri> = store
            .objects(resource, vocab::RDF_TYPE)
            .into_iter()
            .filter_map(|t| t.as_iri().cloned())
            .filter(|t| self.classes.contains_key(t))
            .collect();
        types
            .iter()
            .max_by(|a, b| {
                self.ancestors(a)
                    .len()
                    .cmp(&self.ancestors(b).len())
                    .then(b.cmp(a))
            })
            .cloned()
    }
}

fn synonyms_of(store: &TripleStore, iri: &Iri) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for pred in [vocab::RDFS_LABEL, vocab::EO_SYNONYM] {
        for t in store.objects(iri, pred) {
            if let Some(lit) = t.as_literal() {
                let english = lit
                    .language
                    .as_deref()
                    .is_none_or(|l| l == "en" || l.starts_with("en-"));
                if english && !out.contains(&lit.lexical) {
                    out.push(lit.lexical.clone());
                }
            }
        }
    }
    out
}

fn best_match<'a>(
    candidates: impl Iterator<Item = (&'a Iri, &'a String)>,
    text: &str,
) -> Option<(Iri, f64)> {
    let mut best: Option<(&Iri, f64)> = None;
    for (iri, synonym) in candidates {
        let score = lemma_similarity(text, synonym);
        let better = match best {
            None => true,
            Some((b_iri, b_score)) => score > b_score || (score == b_score && iri < b_iri),
        };
        if better {
            best = Some((iri, score));
        }
    }
    best.filter(|(_, s)| *s >= SYNONYM_THRESHOLD)
        .map(|(i, s)| (i.clone(), s))
}

/// A loaded and validated knowledge graph.
#[derive(Debug, Clone)]
pub struct KnowledgeGraph {
    pub store: TripleStore,
    pub ontology: Ontology,
}

impl KnowledgeGraph {
    /// Adds triples (e.g. materialized relations) that do not touch the
    /// ontology or labels' ownership rules.
    pub fn with_triples(self, extra: impl IntoIterator<Item = Triple>) -> Self {
        KnowledgeGraph {
            store: self.store.with_triples(extra),
            ontology: self.ontology,
        }
    }

    /// Resources carrying a `geo:hasGeometry` link, sorted by IRI.
    pub fn features(&self) -> Vec<Iri> {
        feature_geometries(&self.store)
            .into_iter()
            .map(|(f, _)| f)
            .collect()
    }
}

/// Reads and concatenates N-Triples files without ontology validation.
pub fn read_triples(paths: &[PathBuf]) -> Result<Vec<Triple>, KgError> {
    let mut all = Vec::new();
    for path in paths {
        let text = std::fs::read_to_string(path).map_err(|e| KgError::Io {
            path: path.clone(),
            message: e.to_string(),
        })?;
        let triples = parse_document(&text).map_err(|e| KgError::Parse {
            path: path.clone(),
            line: e.line,
            message: e.message,
        })?;
        all.extend(triples);
    }
    Ok(all)
}

/// The `*.nt` files of `dir`, sorted by file name.
pub fn nt_files_in(dir: &Path) -> Result<Vec<PathBuf>, KgError> {
    let entries = std::fs::read_dir(dir).map_err(|e| KgError::Io {
        path: dir.to_path_buf(),
        message: e.to_string(),
    })?;
    let mut files: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "nt"))
        .collect();
    files.sort();
    Ok(files)
}

/// Loads the given N-Triples files into a validated knowledge graph.
///
/// Validation covers the class hierarchy (acyclic, rooted at `Feature`), the
/// typing of geometry-bearing features and the parseability of every WKT
/// literal. Type triples for every ancestor class are added so that class
/// queries see instances of subclasses.
pub fn load_kg(paths: &[PathBuf]) -> Result<KnowledgeGraph, KgError> {
    let triples = read_triples(paths)?;
    build_kg(triples)
}

pub fn load_kg_dir(dir: &Path) -> Result<KnowledgeGraph, KgError> {
    load_kg(&nt_files_in(dir)?)
}

pub fn build_kg(triples: Vec<Triple>) -> Result<KnowledgeGraph, KgError> {
    let store = TripleStore::from_triples(triples);
    let ontology = Ontology::from_store(&store)?;

    let geometry_links = geometry_links(&store);
    let mut inferred = Vec::new();
    let rdf_type = Iri::from_static(vocab::RDF_TYPE);
    for (feature, geometry) in &geometry_links {
        let types: Vec<Iri> = store
            .objects(feature, vocab::RDF_TYPE)
            .into_iter()
            .filter_map(|t| t.as_iri().cloned())
            .collect();
        let Some(class) = types.iter().find(|t| ontology.classes.contains_key(*t)) else {
            return Err(KgError::UntypedFeature(feature.clone()));
        };
        for t in &types {
            if !ontology.classes.contains_key(t) {
                return Err(KgError::UnknownClass {
                    subject: feature.clone(),
                    class: t.clone(),
                });
            }
        }
        let wkt = store
            .objects(geometry, vocab::GEO_AS_WKT)
            .into_iter()
            .find_map(|t| t.as_literal().cloned())
            .ok_or_else(|| KgError::DanglingGeometry {
                subject: feature.clone(),
                geometry: geometry.clone(),
            })?;
        parse_wkt(&wkt.lexical).map_err(|e| KgError::MalformedWkt {
            subject: feature.clone(),
            message: e.to_string(),
        })?;
        for ancestor in ontology.ancestors(class).into_iter().skip(1) {
            inferred.push(Triple::new(feature.clone(), rdf_type.clone(), ancestor));
        }
    }
    // Non-geometric typed resources get their ancestors too.
    for (s, p, o) in store.triples() {
        if p.as_iri().map(Iri::as_str) != Some(vocab::RDF_TYPE) {
            continue;
        }
        let (Term::Iri(s), Term::Iri(o)) = (s, o) else { continue };
        if ontology.classes.contains_key(o) && !ontology.classes.contains_key(s) {
            for ancestor in ontology.ancestors(o).into_iter().skip(1) {
                inferred.push(Triple::new(s.clone(), rdf_type.clone(), ancestor));
            }
        }
    }
    Ok(KnowledgeGraph {
        store: store.with_triples(inferred),
        ontology,
    })
}

fn geometry_links(store: &TripleStore) -> Vec<(Iri, Iri)> {
    let Some(p) = store.id_of_iri(vocab::GEO_HAS_GEOMETRY) else {
        return Vec::new();
    };
    store
        .match_ids(None, Some(p), None)
        .into_iter()
        .filter_map(|[s, _, o]| Some((store.term(s).as_iri()?.clone(), store.term(o).as_iri()?.clone())))
        .collect()
}

/// `(feature, WKT text)` for every geometry-bearing resource, sorted by
/// feature IRI. Features whose geometry does not resolve are skipped.
pub fn feature_geometries(store: &TripleStore) -> Vec<(Iri, String)> {
    let mut out: Vec<(Iri, String)> = geometry_links(store)
        .into_iter()
        .filter_map(|(f, g)| {
            let wkt = store
                .objects(&g, vocab::GEO_AS_WKT)
                .into_iter()
                .find_map(|t| t.as_literal().map(|l| l.lexical.clone()))?;
            Some((f, wkt))
        })
        .collect();
    out.sort();
    out.dedup_by(|a, b| a.0 == b.0);
    out
}
