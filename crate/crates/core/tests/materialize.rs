mod common;

use std::collections::BTreeSet;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use eoqa::geofns::{materialize, to_ntriples, Coord, MaterializedRelation, SpatialPredicate};
use eoqa::kgstore::{parse_document, vocab, Iri, Literal, Term, Triple, TripleStore};

use common::{load_fixture_kg, per_pair, polygon_wkt, star_polygon};

fn all_predicates() -> BTreeSet<SpatialPredicate> {
    SpatialPredicate::ALL.into_iter().collect()
}

fn iri(s: String) -> Iri {
    Iri::new(s).unwrap()
}

fn feature_triples(i: usize, wkt: String) -> Vec<Triple> {
    let f = iri(format!("http://example.org/t/f{i}"));
    let g = iri(format!("http://example.org/t/f{i}/geom"));
    vec![
        Triple::new(f, iri(vocab::GEO_HAS_GEOMETRY.into()), Term::Iri(g.clone())),
        Triple::new(
            g,
            iri(vocab::GEO_AS_WKT.into()),
            Term::Literal(Literal::typed(wkt, iri(vocab::GEO_WKT_LITERAL.into()))),
        ),
    ]
}

#[test]
fn fixture_batch_equals_per_pair() {
    let kg = load_fixture_kg();
    let batch = materialize(&kg.store, &all_predicates());
    let expected = per_pair(&kg.store);
    assert!(!expected.is_empty());
    assert_eq!(batch, expected);
}

#[test]
fn fixture_relations_obey_duality() {
    let kg = load_fixture_kg();
    let batch = materialize(&kg.store, &all_predicates());
    let has = |s: &Iri, p, o: &Iri| {
        batch.contains(&MaterializedRelation {
            subject: s.clone(),
            predicate: p,
            object: o.clone(),
        })
    };
    for r in &batch {
        match r.predicate {
            SpatialPredicate::Within => {
                assert!(has(&r.object, SpatialPredicate::Contains, &r.subject));
                assert!(has(&r.subject, SpatialPredicate::Intersects, &r.object));
            }
            SpatialPredicate::Contains => assert!(has(&r.object, SpatialPredicate::Within, &r.subject)),
            SpatialPredicate::Intersects => assert!(has(&r.object, SpatialPredicate::Intersects, &r.subject)),
        }
    }
}

#[test]
fn subsets_of_predicates_filter_the_full_run() {
    let kg = load_fixture_kg();
    let full = materialize(&kg.store, &all_predicates());
    for p in SpatialPredicate::ALL {
        let only = materialize(&kg.store, &BTreeSet::from([p]));
        let expected: BTreeSet<_> = full.iter().filter(|r| r.predicate == p).cloned().collect();
        assert_eq!(only, expected);
    }
    assert!(materialize(&kg.store, &BTreeSet::new()).is_empty());
}

#[test]
fn ntriples_output_is_sorted_and_reloads() {
    let kg = load_fixture_kg();
    let rel = materialize(&kg.store, &all_predicates());
    let text = to_ntriples(&rel);
    assert_eq!(text, to_ntriples(&materialize(&kg.store, &all_predicates())));
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), rel.len());
    let back: BTreeSet<Triple> = parse_document(&text).unwrap().into_iter().collect();
    let expected: BTreeSet<Triple> = rel.iter().map(MaterializedRelation::to_triple).collect();
    assert_eq!(back, expected);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn random_kgs_batch_equals_per_pair(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(1..=12);
        let mut triples = Vec::new();
        for i in 0..n {
            let c = Coord::new(rng.gen_range(0.0..2.0), rng.gen_range(0.0..2.0));
            let wkt = match rng.gen_range(0..3) {
                0 => format!("POINT({} {})", c.lon, c.lat),
                1 => format!("LINESTRING({} {}, {} {})", c.lon, c.lat, c.lon + 0.5, c.lat + rng.gen_range(-0.5..0.5)),
                _ => polygon_wkt(&star_polygon(&mut rng, c, 0.8)),
            };
            triples.extend(feature_triples(i, wkt));
        }
        let store = TripleStore::from_triples(triples);
        prop_assert_eq!(materialize(&store, &all_predicates()), per_pair(&store));
    }
}
