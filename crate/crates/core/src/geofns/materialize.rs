use std::collections::BTreeSet;

use serde::Serialize;

use super::{parse_wkt, sf_contains, sf_intersects, sf_within, Geometry, SpatialPredicate};
use crate::kgstore::{feature_geometries, Iri, Term, Triple, TripleStore};

/// A precomputed `(subject, predicate, object)` spatial fact.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct MaterializedRelation {
    pub subject: Iri,
    pub predicate: SpatialPredicate,
    pub object: Iri,
}

impl MaterializedRelation {
    pub fn to_triple(&self) -> Triple {
        Triple::new(
            self.subject.clone(),
            self.predicate.relation_iri(),
            Term::Iri(self.object.clone()),
        )
    }
}

/// Evaluates every requested predicate over every ordered pair of
/// geometry-bearing features, self-pairs included.
pub fn materialize(
    store: &TripleStore,
    predicates: &BTreeSet<SpatialPredicate>,
) -> BTreeSet<MaterializedRelation> {
    let mut out = BTreeSet::new();
    if predicates.is_empty() {
        return out;
    }
    let features: Vec<(Iri, Geometry)> = feature_geometries(store)
        .into_iter()
        .filter_map(|(iri, wkt)| parse_wkt(&wkt).ok().map(|g| (iri, g)))
        .collect();
    let boxes: Vec<_> = features.iter().map(|(_, g)| g.bbox()).collect();
    for (i, (a, ga)) in features.iter().enumerate() {
        for (j, (b, gb)) in features.iter().enumerate() {
            // Disjoint boxes rule out all three predicates.
            if !boxes[i].intersects(&boxes[j]) {
                continue;
            }
            for &pred in predicates {
                let holds = match pred {
                    SpatialPredicate::Within => sf_within(ga, gb),
                    SpatialPredicate::Contains => sf_contains(ga, gb),
                    SpatialPredicate::Intersects => sf_intersects(ga, gb),
                };
                if holds {
                    out.insert(MaterializedRelation {
                        subject: a.clone(),
                        predicate: pred,
                        object: b.clone(),
                    });
                }
            }
        }
    }
    out
}

/// N-Triples text of the relations, one per line, in sorted order.
pub fn to_ntriples(relations: &BTreeSet<MaterializedRelation>) -> String {
    let triples: Vec<Triple> = relations.iter().map(MaterializedRelation::to_triple).collect();
    crate::kgstore::write_document(&triples)
}
