//! WKT geometries, simple-features predicates, geodesic distance and the
//! offline materializer for spatial relations.

mod distance;
mod geometry;
mod materialize;
mod predicates;
mod wkt;

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use serde::{Deserialize, Serialize};

pub use distance::{densify, distance_metres, haversine_m, DENSIFY_STEP_DEG, EARTH_RADIUS_M};
pub use geometry::{BBox, Coord, Geometry, Polygon};
pub use materialize::{materialize, to_ntriples, MaterializedRelation};
pub use predicates::{
    locate_in_polygon, on_segment, segments_intersect, sf_contains, sf_intersects, sf_within,
    Location,
};
pub use wkt::{parse_wkt, WktError};

use crate::kgstore::{vocab, Iri};

/// The three topological relations that can be materialized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SpatialPredicate {
    Within,
    Contains,
    Intersects,
}

impl SpatialPredicate {
    pub const ALL: [SpatialPredicate; 3] = [
        SpatialPredicate::Within,
        SpatialPredicate::Contains,
        SpatialPredicate::Intersects,
    ];

    /// `geo:sfWithin` etc., used as triple predicates.
    pub fn relation_iri(self) -> Iri {
        Iri::from_static(match self {
            SpatialPredicate::Within => vocab::GEO_SF_WITHIN,
            SpatialPredicate::Contains => vocab::GEO_SF_CONTAINS,
            SpatialPredicate::Intersects => vocab::GEO_SF_INTERSECTS,
        })
    }

    /// `geof:sfWithin` etc., used as filter functions.
    pub fn function_iri(self) -> Iri {
        Iri::from_static(match self {
            SpatialPredicate::Within => vocab::GEOF_SF_WITHIN,
            SpatialPredicate::Contains => vocab::GEOF_SF_CONTAINS,
            SpatialPredicate::Intersects => vocab::GEOF_SF_INTERSECTS,
        })
    }

    pub fn from_relation_iri(iri: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|p| p.relation_iri().as_str() == iri)
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name.to_ascii_lowercase().as_str() {
            "within" | "sfwithin" => Some(SpatialPredicate::Within),
            "contains" | "sfcontains" => Some(SpatialPredicate::Contains),
            "intersects" | "sfintersects" => Some(SpatialPredicate::Intersects),
            _ => None,
        }
    }

    pub fn holds(self, a: &Geometry, b: &Geometry) -> bool {
        match self {
            SpatialPredicate::Within => sf_within(a, b),
            SpatialPredicate::Contains => sf_contains(a, b),
            SpatialPredicate::Intersects => sf_intersects(a, b),
        }
    }
}

/// Spatial functions the query evaluator calls on WKT literal text.
/// `None` means the arguments are not usable geometries.
pub trait SpatialFunctions {
    fn relate(&self, predicate: SpatialPredicate, a: &str, b: &str) -> Option<bool>;
    fn distance_m(&self, a: &str, b: &str) -> Option<f64>;
}

struct Prepared {
    geometry: Geometry,
    samples: Vec<Coord>,
}

/// Thread-safe provider that parses each WKT literal once and keeps its
/// densified boundary for distance computations.
#[derive(Default)]
pub struct GeoCache {
    prepared: RwLock<HashMap<String, Option<Arc<Prepared>>>>,
}

impl GeoCache {
    pub fn new() -> Self {
        Self::default()
    }

    fn get(&self, wkt: &str) -> Option<Arc<Prepared>> {
        if let Some(hit) = self.prepared.read().expect("geo cache poisoned").get(wkt) {
            return hit.clone();
        }
        let prepared = parse_wkt(wkt).ok().map(|geometry| {
            Arc::new(Prepared {
                samples: densify(&geometry),
                geometry,
            })
        });
        self.prepared
            .write()
            .expect("geo cache poisoned")
            .insert(wkt.to_string(), prepared.clone());
        prepared
    }
}

impl SpatialFunctions for GeoCache {
    fn relate(&self, predicate: SpatialPredicate, a: &str, b: &str) -> Option<bool> {
        let (a, b) = (self.get(a)?, self.get(b)?);
        Some(predicate.holds(&a.geometry, &b.geometry))
    }

    fn distance_m(&self, a: &str, b: &str) -> Option<f64> {
        let (a, b) = (self.get(a)?, self.get(b)?);
        Some(distance::distance_between_samples(
            &a.geometry,
            &b.geometry,
            &a.samples,
            &b.samples,
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn predicate_iris_round_trip() {
        for p in SpatialPredicate::ALL {
            assert_eq!(
                SpatialPredicate::from_relation_iri(p.relation_iri().as_str()),
                Some(p)
            );
        }
        assert_eq!(
            SpatialPredicate::Within.function_iri().as_str(),
            vocab::GEOF_SF_WITHIN
        );
    }

    #[test]
    fn cache_rejects_bad_wkt() {
        let cache = GeoCache::new();
        assert_eq!(cache.relate(SpatialPredicate::Within, "POINT(0 0)", "nope"), None);
        assert_eq!(
            cache.relate(SpatialPredicate::Within, "POINT(0 0)", "POINT(0 0)"),
            Some(true)
        );
        assert_eq!(cache.distance_m("POINT(0 0)", "POINT(0 0)"), Some(0.0));
    }
}
