use std::collections::BTreeSet;

use super::entities::is_numeric_property;
use super::{
    score, AnnotationSet, Comparator, ConstraintTarget, DistanceConstraint, LinkOrigin,
    MentionKind, NumericConstraint, SpatialFunction, SpatialLink,
};
use crate::kgstore::Ontology;
use crate::nlp::{number_value, DepGraph, Pos};

const GREATER_ADJ: &[&str] = &[
    "larger", "bigger", "longer", "greater", "higher", "wider", "deeper", "newer", "later", "more",
];
const SMALLER_ADJ: &[&str] = &["smaller", "shorter", "lower", "older", "earlier", "less", "fewer"];

fn unit_of(word: &str) -> Option<(&'static str, f64)> {
    Some(match word.to_lowercase().as_str() {
        "km" | "kilometre" | "kilometres" | "kilometer" | "kilometers" => ("m", 1000.0),
        "m" | "metre" | "metres" | "meter" | "meters" => ("m", 1.0),
        "%" | "percent" => ("%", 1.0),
        _ => return None,
    })
}

/// Comparator expressed by the words before token `x`, if any.
fn comparator_before(words: &[String], x: usize) -> Option<Comparator> {
    let w = |k: usize| x.checked_sub(k).map(|i| words[i].as_str());
    match (w(2), w(1)) {
        (Some("at"), Some("least")) => return Some(Comparator::Ge),
        (Some("at"), Some("most")) => return Some(Comparator::Le),
        (Some("up"), Some("to")) => return Some(Comparator::Le),
        (Some(a), Some("than")) if GREATER_ADJ.contains(&a) => return Some(Comparator::Gt),
        (Some(a), Some("than")) if SMALLER_ADJ.contains(&a) => return Some(Comparator::Lt),
        _ => {}
    }
    Some(match w(1)? {
        "under" | "below" => Comparator::Lt,
        "over" | "above" | "exceeding" => Comparator::Gt,
        "within" => Comparator::Le,
        "exactly" | "equal" => Comparator::Eq,
        "about" | "around" | "approximately" | "roughly" | "nearly" => Comparator::Approx,
        _ => return None,
    })
}

#[derive(Clone, Copy)]
enum Candidate {
    Property(usize, usize),
    Link(usize, usize),
}

/// Resolves each number to a limit, a property comparison or a distance
/// bound on a spatial relation.
pub fn solve_numerics(
    g: &DepGraph,
    ontology: &Ontology,
    reserved: &BTreeSet<usize>,
    set: &mut AnnotationSet,
) {
    let words: Vec<String> = g.tokens.iter().map(|t| t.surface.to_lowercase()).collect();
    for t in &g.tokens {
        let x = t.index;
        if t.pos != Pos::Num || reserved.contains(&x) || set.mentions.iter().any(|m| m.covers(x)) {
            continue;
        }
        let Some(raw) = number_value(&t.surface) else {
            continue;
        };
        let unit = words.get(x + 1).and_then(|u| unit_of(u));
        let comparator = comparator_before(&words, x);
        let value = raw * unit.map_or(1.0, |(_, f)| f);

        let nummod_of_concept = g.label(x) == Some("nummod")
            && g.head(x).is_some_and(|h| {
                set.mentions.iter().any(|m| m.kind == MentionKind::Concept && m.covers(h))
            });
        if comparator.is_none() && unit.is_none() && nummod_of_concept && raw.fract() == 0.0 && raw > 0.0 {
            set.limit = Some(raw as u64);
            continue;
        }

        let mut candidates = Vec::new();
        for m in set.mentions.iter().filter(|m| m.kind == MentionKind::Property) {
            if is_numeric_property(ontology, &m.target) {
                candidates.push(Candidate::Property(m.id, m.head));
            }
        }
        if unit.is_none_or(|(u, _)| u == "m") {
            for l in set.spatial_links.iter().filter(|l| l.function == SpatialFunction::Distance) {
                if l.distance.is_none() {
                    candidates.push(Candidate::Link(l.id, l.token));
                }
            }
        }
        let best = candidates
            .into_iter()
            .min_by_key(|c| match *c {
                Candidate::Property(id, anchor) => (score(g, x, anchor), 1, id),
                Candidate::Link(id, anchor) => (score(g, x, anchor), 0, id),
            });
        let comparator = comparator.unwrap_or(Comparator::Eq);
        let target = match best {
            Some(Candidate::Property(id, _)) => ConstraintTarget::Property(id),
            Some(Candidate::Link(id, _)) => {
                if let Some(l) = set.spatial_links.iter_mut().find(|l| l.id == id) {
                    l.distance = Some(DistanceConstraint {
                        comparator,
                        metres: value,
                    });
                }
                ConstraintTarget::Link(id)
            }
            None => {
                set.note("numerics", format!("number {:?} has no target", t.surface));
                continue;
            }
        };
        set.numeric.push(NumericConstraint {
            token: x,
            value,
            unit: unit.map(|(u, _)| u.to_string()),
            comparator,
            target,
        });
    }
}

/// Distributes relations and constraints over `and`-coordinated words.
pub fn solve_conjunctions(g: &DepGraph, set: &mut AnnotationSet) {
    for e in g.edges.iter().filter(|e| e.label == "conj:and") {
        let (x, y) = (e.head, e.dependent);
        let mention_of = |k: usize| set.mentions.iter().find(|m| m.covers(k)).map(|m| (m.id, m.kind));
        match (mention_of(x), mention_of(y)) {
            (Some((a, ka)), Some((b, kb))) if a != b && ka != MentionKind::Property && kb != MentionKind::Property => {
                clone_links(set, a, b);
                clone_links(set, b, a);
            }
            (Some((a, MentionKind::Property)), Some((b, MentionKind::Property))) if a != b => {
                clone_constraints(set, a, b);
                clone_constraints(set, b, a);
            }
            (None, None) => {
                let ix = set.numeric.iter().position(|n| n.token == x);
                let iy = set.numeric.iter().position(|n| n.token == y);
                if let (Some(ix), Some(iy)) = (ix, iy) {
                    let shared = set.numeric[ix].target;
                    let old = set.numeric[iy].target;
                    if old != shared {
                        set.numeric[iy].target = shared;
                        if let ConstraintTarget::Link(l) = old {
                            let still = set.numeric.iter().any(|n| n.target == old);
                            if let Some(link) = set.spatial_links.iter_mut().find(|k| k.id == l) {
                                if !still {
                                    link.distance = None;
                                }
                            }
                        }
                        set.note("conjunctions", format!("numbers at {x} and {y} share one target"));
                    }
                }
            }
            (Some((p, MentionKind::Property)), None) | (None, Some((p, MentionKind::Property))) => {
                let num = if mention_of(x).is_none() { x } else { y };
                if let Some(n) = set.numeric.iter_mut().find(|n| n.token == num) {
                    n.target = ConstraintTarget::Property(p);
                }
            }
            _ => {}
        }
    }
}

/// Copies every relation of `from` onto `to`.
fn clone_links(set: &mut AnnotationSet, from: usize, to: usize) {
    let existing = set.spatial_links.clone();
    for l in existing.iter().filter(|l| l.arg1 == from || l.arg2 == from) {
        let (arg1, arg2) = if l.arg1 == from { (to, l.arg2) } else { (l.arg1, to) };
        if arg1 == arg2 {
            continue;
        }
        let known = set
            .spatial_links
            .iter()
            .any(|k| k.function == l.function && k.arg1 == arg1 && k.arg2 == arg2);
        if known {
            continue;
        }
        let id = set.next_link_id();
        set.spatial_links.push(SpatialLink {
            id,
            function: l.function,
            arg1,
            arg2,
            token: l.token,
            distance: l.distance,
            origin: LinkOrigin::Conjunction,
        });
    }
}

fn clone_constraints(set: &mut AnnotationSet, from: usize, to: usize) {
    let has = |set: &AnnotationSet, p: usize| {
        set.numeric.iter().any(|n| n.target == ConstraintTarget::Property(p))
            || set.temporal.iter().any(|t| t.target == Some(p))
    };
    if has(set, to) {
        return;
    }
    let copies: Vec<NumericConstraint> = set
        .numeric
        .iter()
        .filter(|n| n.target == ConstraintTarget::Property(from))
        .map(|n| NumericConstraint {
            target: ConstraintTarget::Property(to),
            ..n.clone()
        })
        .collect();
    set.numeric.extend(copies);
}
