#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::sync::OnceLock;

use chrono::{TimeZone, Utc};
use rand::seq::SliceRandom;
use rand::Rng;

use eoqa::app::Engine;
use eoqa::geofns::{
    distance_metres, parse_wkt, sf_intersects, sf_within, Coord, Geometry, MaterializedRelation, Polygon,
    SpatialPredicate,
};
use eoqa::kgstore::{feature_geometries, load_kg_dir, vocab, Iri, KnowledgeGraph, Literal, Term, Triple, TripleStore};
use eoqa::sparql::{
    CompareOp, Expr, GeoFunction, Pattern, PredicatePath, Projection, Query, QueryForm, TermPattern,
    TriplePattern, Variable,
};

pub const RUNNING_EXAMPLE: &str = "Show me all images taken in January 2021 with rivers less than 2km away from towns and forests in the Emilia Romagna region, having cloud coverage less than 10%";

pub fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

pub fn fixtures() -> PathBuf {
    root().join("data/fixtures")
}

pub fn corpus_path() -> PathBuf {
    root().join("data/corpus/gold.jsonl")
}

pub fn gold_conllu_path() -> PathBuf {
    root().join("data/conllu/running_example.conllu")
}

pub fn load_fixture_kg() -> KnowledgeGraph {
    load_kg_dir(&fixtures()).expect("fixture KG loads")
}

/// One engine per test binary.
pub fn engine() -> &'static Engine {
    static ENGINE: OnceLock<Engine> = OnceLock::new();
    ENGINE.get_or_init(|| Engine::new(load_fixture_kg()))
}

pub fn eo(local: &str) -> Iri {
    Iri::new(format!("{}{local}", vocab::EO)).unwrap()
}

pub fn eor(local: &str) -> Iri {
    Iri::new(format!("{}{local}", vocab::EOR)).unwrap()
}

// ---------------------------------------------------------------------------
// Running example

fn var_of(t: &TermPattern) -> Option<&str> {
    t.as_var().map(Variable::name)
}

fn triples(q: &Query) -> Vec<&TriplePattern> {
    q.where_clause
        .iter()
        .filter_map(|p| match p {
            Pattern::Triple(t) => Some(t),
            _ => None,
        })
        .collect()
}

fn filters(q: &Query) -> Vec<&Expr> {
    q.where_clause
        .iter()
        .filter_map(|p| match p {
            Pattern::Filter(e) => Some(e),
            _ => None,
        })
        .collect()
}

/// Variable typed as `class` and the WKT variable of its geometry.
fn typed_geometry(q: &Query, class: &Iri) -> Option<(String, String)> {
    let ts = triples(q);
    let subject = ts.iter().find_map(|t| {
        (t.path == PredicatePath::rdf_type() && t.object == TermPattern::Iri(class.clone()))
            .then(|| var_of(&t.subject))
            .flatten()
    })?;
    let wkt = ts.iter().find_map(|t| {
        (t.path.is_geometry_wkt() && var_of(&t.subject) == Some(subject))
            .then(|| var_of(&t.object))
            .flatten()
    })?;
    Some((subject.to_string(), wkt.to_string()))
}

fn property_var(q: &Query, property: &Iri) -> Option<String> {
    triples(q).iter().find_map(|t| {
        (t.path == PredicatePath::single(property.clone()))
            .then(|| var_of(&t.object).map(str::to_string))
            .flatten()
    })
}

fn is_var(e: &Expr, name: &str) -> bool {
    matches!(e, Expr::Term(TermPattern::Var(v)) if v.name() == name)
}

fn literal_number(e: &Expr) -> Option<f64> {
    match e {
        Expr::Term(TermPattern::Literal(l)) => l.as_f64(),
        _ => None,
    }
}

fn literal_date(e: &Expr) -> Option<chrono::DateTime<Utc>> {
    match e {
        Expr::Term(TermPattern::Literal(l)) => l.as_date_time(),
        _ => None,
    }
}

fn has_filter(q: &Query, pred: impl Fn(CompareOp, &Expr, &Expr) -> bool) -> bool {
    filters(q).iter().any(|e| match e {
        Expr::Compare { op, lhs, rhs } => pred(*op, lhs, rhs),
        _ => false,
    })
}

fn has_call(q: &Query, function: GeoFunction, a: &str, b: &str) -> bool {
    filters(q).iter().any(|e| match e {
        Expr::Call { function: f, args } => *f == function && is_var(&args[0], a) && is_var(&args[1], b),
        _ => false,
    })
}

fn distance_below(q: &Query, a: &str, b: &str, metres: f64) -> bool {
    let metre = Iri::new(vocab::UOM_METRE).unwrap();
    has_filter(q, |op, lhs, rhs| {
        op == CompareOp::Lt
            && literal_number(rhs) == Some(metres)
            && match lhs {
                Expr::Call { function: GeoFunction::Distance, args } => {
                    let (x, y) = (&args[0], &args[1]);
                    ((is_var(x, a) && is_var(y, b)) || (is_var(x, b) && is_var(y, a)))
                        && args[2] == Expr::Term(TermPattern::Iri(metre.clone()))
                }
                _ => false,
            }
    })
}

/// The six structural properties the running example's query must have.
pub fn running_example_checks(q: &Query) -> Vec<(&'static str, bool)> {
    let river = typed_geometry(q, &eo("River"));
    let town = typed_geometry(q, &eo("Town"));
    let forest = typed_geometry(q, &eo("Forest"));
    let region = triples(q).iter().find_map(|t| {
        (t.path.is_geometry_wkt() && t.subject == TermPattern::Iri(eor("Emilia-Romagna")))
            .then(|| var_of(&t.object).map(str::to_string))
            .flatten()
    });

    let distance = match (&river, &town, &forest) {
        (Some((_, r)), Some((_, t)), Some((_, f))) => {
            distance_below(q, r, t, 2000.0) && distance_below(q, r, f, 2000.0)
        }
        _ => false,
    };
    let within = match (&region, [&river, &town, &forest]) {
        (Some(i), features) => features
            .iter()
            .all(|f| f.as_ref().is_some_and(|(_, w)| has_call(q, GeoFunction::SfWithin, w, i))),
        _ => false,
    };
    let cloud = property_var(q, &eo("cloudCover")).is_some_and(|p| {
        has_filter(q, |op, lhs, rhs| op == CompareOp::Lt && is_var(lhs, &p) && literal_number(rhs) == Some(10.0))
    });
    let jan = Utc.with_ymd_and_hms(2021, 1, 1, 0, 0, 0).unwrap();
    let feb = Utc.with_ymd_and_hms(2021, 2, 1, 0, 0, 0).unwrap();
    let time = property_var(q, &eo("timestamp")).is_some_and(|p| {
        has_filter(q, |op, lhs, rhs| op == CompareOp::Ge && is_var(lhs, &p) && literal_date(rhs) == Some(jan))
            && has_filter(q, |op, lhs, rhs| op == CompareOp::Lt && is_var(lhs, &p) && literal_date(rhs) == Some(feb))
    });
    vec![
        ("type and geometry blocks for River, Town and Forest", river.is_some() && town.is_some() && forest.is_some()),
        ("Emilia-Romagna geometry block", region.is_some()),
        ("distance below 2000 m from rivers to towns and forests", distance),
        ("sfWithin the region for rivers, towns and forests", within),
        ("cloudCover below 10", cloud),
        ("timestamp in [2021-01-01, 2021-02-01)", time),
    ]
}

fn members(store: &TripleStore, class: &str) -> Vec<Iri> {
    store
        .subjects(vocab::RDF_TYPE, &Term::Iri(eo(class)))
        .into_iter()
        .cloned()
        .collect()
}

fn geometry_of(store: &TripleStore, feature: &Iri) -> Option<Geometry> {
    let g = store.objects(feature, vocab::GEO_HAS_GEOMETRY).into_iter().find_map(Term::as_iri)?.clone();
    let wkt = store.objects(&g, vocab::GEO_AS_WKT).into_iter().find_map(Term::as_literal)?;
    parse_wkt(&wkt.lexical).ok()
}

fn literal_of<'a>(store: &'a TripleStore, s: &Iri, p: &str) -> Option<&'a Literal> {
    store.objects(s, p).into_iter().find_map(Term::as_literal)
}

/// Images answering the running example, found by looping over every
/// combination of features with the geometry functions called directly.
pub fn running_example_oracle(kg: &KnowledgeGraph) -> BTreeSet<Iri> {
    let store = &kg.store;
    let region = geometry_of(store, &eor("Emilia-Romagna")).expect("region geometry");
    let inside = |class: &str| -> Vec<Geometry> {
        members(store, class)
            .iter()
            .filter_map(|f| geometry_of(store, f))
            .filter(|g| sf_within(g, &region))
            .collect()
    };
    let (rivers, towns, forests) = (inside("River"), inside("Town"), inside("Forest"));
    let near = |r: &Geometry, others: &[Geometry]| others.iter().any(|o| distance_metres(r, o) < 2000.0);
    let good_rivers: Vec<&Geometry> = rivers.iter().filter(|r| near(r, &towns) && near(r, &forests)).collect();
    let jan = Utc.with_ymd_and_hms(2021, 1, 1, 0, 0, 0).unwrap();
    let feb = Utc.with_ymd_and_hms(2021, 2, 1, 0, 0, 0).unwrap();
    members(store, "Image")
        .into_iter()
        .filter(|img| {
            let cloud = literal_of(store, img, &format!("{}cloudCover", vocab::EO)).and_then(Literal::as_f64);
            let when = literal_of(store, img, vocab::EO_TIMESTAMP).and_then(Literal::as_date_time);
            let link = literal_of(store, img, vocab::EO_LINK);
            let Some(footprint) = geometry_of(store, img) else { return false };
            link.is_some()
                && cloud.is_some_and(|c| c < 10.0)
                && when.is_some_and(|t| t >= jan && t < feb)
                && good_rivers.iter().any(|r| sf_intersects(&footprint, r))
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Geometry

/// Great-circle distance through the angle between unit vectors.
pub fn vector_great_circle_m(a: Coord, b: Coord) -> f64 {
    let v = |c: Coord| {
        let (lon, lat) = (c.lon.to_radians(), c.lat.to_radians());
        [lat.cos() * lon.cos(), lat.cos() * lon.sin(), lat.sin()]
    };
    let (p, q) = (v(a), v(b));
    let cross = [
        p[1] * q[2] - p[2] * q[1],
        p[2] * q[0] - p[0] * q[2],
        p[0] * q[1] - p[1] * q[0],
    ];
    let sin = (cross[0].powi(2) + cross[1].powi(2) + cross[2].powi(2)).sqrt();
    let cos = p[0] * q[0] + p[1] * q[1] + p[2] * q[2];
    6_371_000.0 * sin.atan2(cos)
}

/// Star-shaped, hence simple, polygon around `centre`. Angular gaps stay
/// below pi so the centre is interior.
pub fn star_polygon<R: Rng>(rng: &mut R, centre: Coord, max_radius: f64) -> Polygon {
    let n = rng.gen_range(3..=12);
    let mut ring: Vec<Coord> = (0..n)
        .map(|k| {
            let a = (k as f64 + rng.gen_range(0.0..0.4)) / n as f64 * std::f64::consts::TAU;
            let r = rng.gen_range(0.2 * max_radius..max_radius);
            Coord::new(centre.lon + r * a.cos(), centre.lat + r * a.sin())
        })
        .collect();
    ring.push(ring[0]);
    Polygon { rings: vec![ring] }
}

/// Winding-number test; `Some(true)` inside, `Some(false)` outside, `None`
/// within `eps` of the boundary.
pub fn winding_inside(p: Coord, ring: &[Coord], eps: f64) -> Option<bool> {
    let mut wn = 0i32;
    for w in ring.windows(2) {
        let (a, b) = (w[0], w[1]);
        let (dx, dy) = (b.lon - a.lon, b.lat - a.lat);
        let len2 = dx * dx + dy * dy;
        let t = (((p.lon - a.lon) * dx + (p.lat - a.lat) * dy) / len2).clamp(0.0, 1.0);
        let d = ((a.lon + t * dx - p.lon).powi(2) + (a.lat + t * dy - p.lat).powi(2)).sqrt();
        if d < eps {
            return None;
        }
        let cross = dx * (p.lat - a.lat) - dy * (p.lon - a.lon);
        if a.lat <= p.lat {
            if b.lat > p.lat && cross > 0.0 {
                wn += 1;
            }
        } else if b.lat <= p.lat && cross < 0.0 {
            wn -= 1;
        }
    }
    Some(wn != 0)
}

pub fn polygon_wkt(p: &Polygon) -> String {
    let ring: Vec<String> = p.exterior().iter().map(|c| format!("{} {}", c.lon, c.lat)).collect();
    format!("POLYGON(({}))", ring.join(", "))
}

/// Every ordered feature pair, every predicate, no bounding-box shortcut.
pub fn per_pair(store: &TripleStore) -> BTreeSet<MaterializedRelation> {
    let features: Vec<_> = feature_geometries(store)
        .into_iter()
        .map(|(iri, wkt)| (iri, parse_wkt(&wkt).unwrap()))
        .collect();
    let mut out = BTreeSet::new();
    for (a, ga) in &features {
        for (b, gb) in &features {
            for p in SpatialPredicate::ALL {
                if p.holds(ga, gb) {
                    out.insert(MaterializedRelation {
                        subject: a.clone(),
                        predicate: p,
                        object: b.clone(),
                    });
                }
            }
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Evaluator oracle

const SUBJECTS: usize = 6;
const PREDICATES: usize = 3;
const VARS: [&str; 4] = ["a", "b", "c", "d"];

fn node(i: usize) -> Iri {
    Iri::new(format!("http://example.org/t/n{i}")).unwrap()
}

fn pred(i: usize) -> Iri {
    Iri::new(format!("http://example.org/t/p{i}")).unwrap()
}

fn random_object<R: Rng>(rng: &mut R) -> Term {
    if rng.gen_bool(0.6) {
        Term::Iri(node(rng.gen_range(0..SUBJECTS)))
    } else {
        Term::Literal(Literal::integer(rng.gen_range(0..6)))
    }
}

pub fn random_store<R: Rng>(rng: &mut R) -> Vec<Triple> {
    let n = rng.gen_range(0..=200);
    (0..n)
        .map(|_| Triple::new(node(rng.gen_range(0..SUBJECTS)), pred(rng.gen_range(0..PREDICATES)), random_object(rng)))
        .collect()
}

fn random_position<R: Rng>(rng: &mut R, subject: bool) -> TermPattern {
    if rng.gen_bool(0.75) {
        TermPattern::var(VARS.choose(rng).unwrap())
    } else if subject {
        TermPattern::Iri(node(rng.gen_range(0..SUBJECTS)))
    } else {
        match random_object(rng) {
            Term::Iri(i) => TermPattern::Iri(i),
            Term::Literal(l) => TermPattern::Literal(l),
        }
    }
}

/// SELECT or ASK over one to five triple patterns with optional
/// comparison filters on bound variables.
pub fn random_query<R: Rng>(rng: &mut R) -> Query {
    let k = rng.gen_range(1..=5);
    let mut where_clause: Vec<Pattern> = (0..k)
        .map(|_| {
            Pattern::Triple(TriplePattern {
                subject: random_position(rng, true),
                path: PredicatePath::single(pred(rng.gen_range(0..PREDICATES))),
                object: random_position(rng, false),
            })
        })
        .collect();
    let mut bound: Vec<Variable> = Vec::new();
    for p in &where_clause {
        if let Pattern::Triple(t) = p {
            for v in [t.subject.as_var(), t.object.as_var()].into_iter().flatten() {
                if !bound.contains(v) {
                    bound.push(v.clone());
                }
            }
        }
    }
    for _ in 0..rng.gen_range(0..=2) {
        if bound.is_empty() {
            break;
        }
        let v = bound.choose(rng).unwrap().clone();
        let op = *[CompareOp::Lt, CompareOp::Gt, CompareOp::Le, CompareOp::Ge, CompareOp::Eq].choose(rng).unwrap();
        let rhs = if rng.gen_bool(0.7) {
            TermPattern::Literal(Literal::integer(rng.gen_range(0..6)))
        } else {
            TermPattern::Iri(node(rng.gen_range(0..SUBJECTS)))
        };
        let pos = rng.gen_range(0..=where_clause.len());
        where_clause.insert(pos, Pattern::Filter(Expr::compare(op, Expr::Term(TermPattern::Var(v)), Expr::Term(rhs))));
    }
    if bound.is_empty() || rng.gen_bool(0.15) {
        return Query::ask(where_clause);
    }
    let mut projected: Vec<Variable> = bound.iter().filter(|_| rng.gen_bool(0.6)).cloned().collect();
    if projected.is_empty() {
        projected.push(bound[0].clone());
    }
    Query {
        form: QueryForm::Select,
        distinct: rng.gen_bool(0.5),
        projection: projected.into_iter().map(Projection::Var).collect(),
        where_clause,
        group_by: Vec::new(),
        order_by: Vec::new(),
        limit: None,
    }
}

fn oracle_compare(op: CompareOp, a: &Term, b: &Term) -> bool {
    let num = |t: &Term| t.as_literal().and_then(Literal::as_f64);
    match (num(a), num(b)) {
        (Some(x), Some(y)) => match op {
            CompareOp::Lt => x < y,
            CompareOp::Gt => x > y,
            CompareOp::Le => x <= y,
            CompareOp::Ge => x >= y,
            CompareOp::Eq => x == y,
        },
        _ => op == CompareOp::Eq && a == b && a.as_iri().is_some(),
    }
}

/// Rows as multisets (sorted vectors), or the ASK boolean.
#[derive(Debug, PartialEq)]
pub enum OracleAnswer {
    Rows(Vec<Vec<Term>>),
    Boolean(bool),
}

/// Nested loops over the full triple list for every pattern, in query order.
pub fn oracle_evaluate(q: &Query, store: &[Triple]) -> OracleAnswer {
    let graph: BTreeSet<&Triple> = store.iter().collect();
    let graph: Vec<&Triple> = graph.into_iter().collect();
    let patterns: Vec<&TriplePattern> = triples(q);
    let mut solutions: Vec<BTreeMap<String, Term>> = vec![BTreeMap::new()];
    for tp in &patterns {
        let mut next = Vec::new();
        for sol in &solutions {
            for t in &graph {
                if PredicatePath::single(t.predicate.clone()) != tp.path {
                    continue;
                }
                let mut s = sol.clone();
                let mut ok = true;
                for (pat, value) in [(&tp.subject, Term::Iri(t.subject.clone())), (&tp.object, t.object.clone())] {
                    match pat {
                        TermPattern::Var(v) => match s.get(v.name()) {
                            Some(existing) if *existing != value => ok = false,
                            Some(_) => {}
                            None => {
                                s.insert(v.name().to_string(), value);
                            }
                        },
                        TermPattern::Iri(i) => ok &= value == Term::Iri(i.clone()),
                        TermPattern::Literal(l) => ok &= value == Term::Literal(l.clone()),
                    }
                }
                if ok {
                    next.push(s);
                }
            }
        }
        solutions = next;
    }
    solutions.retain(|s| {
        filters(q).iter().all(|e| match e {
            Expr::Compare { op, lhs, rhs } => {
                let value = |x: &Expr| match x {
                    Expr::Term(TermPattern::Var(v)) => s.get(v.name()).cloned(),
                    Expr::Term(TermPattern::Iri(i)) => Some(Term::Iri(i.clone())),
                    Expr::Term(TermPattern::Literal(l)) => Some(Term::Literal(l.clone())),
                    _ => None,
                };
                match (value(lhs), value(rhs)) {
                    (Some(a), Some(b)) => oracle_compare(*op, &a, &b),
                    _ => false,
                }
            }
            _ => unreachable!("random queries only compare"),
        })
    });
    if q.form == QueryForm::Ask {
        return OracleAnswer::Boolean(!solutions.is_empty());
    }
    let mut rows: Vec<Vec<Term>> = solutions
        .iter()
        .map(|s| q.projection.iter().map(|p| s[p.output_var().name()].clone()).collect())
        .collect();
    rows.sort();
    if q.distinct {
        rows.dedup();
    }
    OracleAnswer::Rows(rows)
}

pub fn evaluator_answer(rs: &eoqa::sparql::ResultSet) -> OracleAnswer {
    match rs.boolean {
        Some(b) => OracleAnswer::Boolean(b),
        None => {
            let mut rows = rs.rows.clone();
            rows.sort();
            OracleAnswer::Rows(rows)
        }
    }
}
