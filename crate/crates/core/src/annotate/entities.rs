use std::collections::BTreeSet;

use super::{
    score, AnnotationSet, ComparativeKind, ComparativeMark, Direction, Mention, MentionKind,
    ValueConstraint,
};
use crate::kgstore::similarity::INSTANCE_THRESHOLD;
use crate::kgstore::{vocab, Iri, KnowledgeGraph, Ontology, Term, TripleStore};
use crate::nlp::{is_unit, month_number, DepGraph, Pos};

const CONNECTORS: &[&str] = &["of", "della", "delle", "dei", "de", "di", "del", "la", "le", "du", "des"];
const SEASONS: &[&str] = &["spring", "summer", "autumn", "fall", "winter"];

/// The ontology class `EO:<local>`, if declared.
pub(crate) fn eo_class(ontology: &Ontology, local: &str) -> Option<Iri> {
    let iri = Iri::new(format!("{}{local}", vocab::EO)).ok()?;
    ontology.classes.contains_key(&iri).then_some(iri)
}

pub(crate) fn eo_property(ontology: &Ontology, local: &str) -> Option<Iri> {
    let iri = Iri::new(format!("{}{local}", vocab::EO)).ok()?;
    ontology.properties.contains_key(&iri).then_some(iri)
}

pub(crate) fn is_a(ontology: &Ontology, class: Option<&Iri>, local: &str) -> bool {
    match (class, eo_class(ontology, local)) {
        (Some(c), Some(a)) => ontology.is_subclass_of(c, &a),
        _ => false,
    }
}

/// Property used when a superlative names no property of its own.
pub(crate) fn default_property(ontology: &Ontology, class: &Iri) -> Option<Iri> {
    const TABLE: &[(&str, &str)] = &[
        ("River", "length"),
        ("Region", "area"),
        ("City", "area"),
        ("Town", "area"),
        ("Forest", "area"),
        ("Lake", "area"),
        ("Image", "timestamp"),
    ];
    TABLE
        .iter()
        .find(|(c, _)| is_a(ontology, Some(class), c))
        .and_then(|(_, p)| eo_property(ontology, p))
}

pub(crate) fn is_numeric_property(ontology: &Ontology, property: &Iri) -> bool {
    match ontology.properties.get(property).and_then(|p| p.datatype.as_ref()) {
        Some(d) => [vocab::XSD_INTEGER, vocab::XSD_DECIMAL, vocab::XSD_DOUBLE, vocab::XSD_FLOAT]
            .contains(&d.as_str()),
        None => true,
    }
}

/// `(property, lexical value)` for every literal of a string-valued property.
pub(crate) fn string_values(store: &TripleStore, ontology: &Ontology) -> Vec<(Iri, String)> {
    let mut out = BTreeSet::new();
    for p in ontology.properties.values() {
        if p.datatype.as_ref().map(Iri::as_str) != Some(vocab::XSD_STRING) {
            continue;
        }
        let Some(pid) = store.id_of_iri(p.iri.as_str()) else {
            continue;
        };
        for [_, _, o] in store.match_ids(None, Some(pid), None) {
            if let Term::Literal(l) = store.term(o) {
                out.insert((p.iri.clone(), l.lexical.clone()));
            }
        }
    }
    out.into_iter().collect()
}

fn is_temporal_token(surface: &str, pos: Pos) -> bool {
    let w = surface.to_lowercase();
    (pos == Pos::Propn && month_number(&w).is_some()) || SEASONS.contains(&w.as_str())
}

fn span_text(g: &DepGraph, a: usize, b: usize) -> String {
    g.tokens[a..=b]
        .iter()
        .map(|t| t.surface.as_str())
        .collect::<Vec<_>>()
        .join(" ")
}

/// Links runs of proper nouns to KG features by label similarity, trying
/// longer spans first.
pub fn identify_instances(
    g: &DepGraph,
    store: &TripleStore,
    ontology: &Ontology,
    reserved: &BTreeSet<usize>,
    set: &mut AnnotationSet,
) -> Vec<Mention> {
    let toks = &g.tokens;
    let values: BTreeSet<String> = string_values(store, ontology)
        .into_iter()
        .map(|(_, v)| v.to_lowercase())
        .collect();
    let candidate = |k: usize| {
        toks[k].pos == Pos::Propn
            && !reserved.contains(&k)
            && !is_temporal_token(&toks[k].surface, toks[k].pos)
            && !values.contains(&toks[k].surface.to_lowercase())
    };
    let connector = |k: usize| CONNECTORS.contains(&toks[k].surface.to_lowercase().as_str());

    let mut runs: Vec<(usize, usize)> = Vec::new();
    let mut i = 0;
    while i < toks.len() {
        if !candidate(i) {
            i += 1;
            continue;
        }
        let mut end = i;
        loop {
            if end + 1 < toks.len() && candidate(end + 1) {
                end += 1;
            } else if end + 2 < toks.len() && connector(end + 1) && candidate(end + 2) {
                end += 2;
            } else {
                break;
            }
        }
        runs.push((i, end));
        i = end + 1;
    }

    let mut found: Vec<Mention> = Vec::new();
    for (a, b) in runs {
        let mut used = vec![false; b - a + 1];
        for len in (1..=b - a + 1).rev() {
            for s in a..=b + 1 - len {
                let e = s + len - 1;
                if (s..=e).any(|k| used[k - a]) || connector(s) || connector(e) {
                    continue;
                }
                let text = span_text(g, s, e);
                let hits: Vec<_> = store
                    .lookup_label(&text, 10)
                    .into_iter()
                    .filter(|h| h.score >= INSTANCE_THRESHOLD)
                    .filter_map(|h| ontology.most_specific_type(store, &h.iri).map(|c| (h, c)))
                    .collect();
                let Some(top) = hits.first().map(|(h, _)| h.score) else {
                    continue;
                };
                // A class word next to the name breaks ties between namesakes.
                let neighbour_class = [e + 1, s.wrapping_sub(1)]
                    .into_iter()
                    .filter(|&k| k < toks.len() && toks[k].pos == Pos::Noun)
                    .find_map(|k| ontology.class_for_word(&toks[k].surface))
                    .map(|(c, _)| c);
                let chosen = neighbour_class
                    .and_then(|nc| {
                        hits.iter()
                            .filter(|(h, _)| top - h.score < 1e-9)
                            .find(|(_, c)| ontology.is_subclass_of(c, &nc))
                    })
                    .unwrap_or(&hits[0]);
                let (hit, class) = chosen.clone();
                used[s - a..=e - a].iter_mut().for_each(|u| *u = true);
                found.push(Mention {
                    id: 0,
                    kind: MentionKind::Instance,
                    span: (s, e),
                    head: e,
                    text,
                    target: hit.iri.clone(),
                    class: Some(class),
                    score: hit.score,
                    variable: String::new(),
                    owner: None,
                    synthetic: false,
                });
                set.note("instances", format!("{:?} -> {} ({:.2})", found.last().expect("pushed").text, hit.iri, hit.score));
            }
        }
    }
    found.sort_by_key(|m| m.span.0);
    for (n, m) in found.iter_mut().enumerate() {
        m.id = n;
        m.variable = format!("iWKT{}", n + 1);
    }
    found
}

/// Maps common nouns (and `X of Y` / two-word phrases) outside instance
/// spans to ontology classes.
pub fn identify_concepts(
    g: &DepGraph,
    ontology: &Ontology,
    instances: &[Mention],
    reserved: &BTreeSet<usize>,
    set: &mut AnnotationSet,
) -> Vec<Mention> {
    let toks = &g.tokens;
    let eligible = |k: usize| {
        k < toks.len()
            && toks[k].pos.is_nominal()
            && !reserved.contains(&k)
            && !is_unit(&toks[k].surface)
            && !is_temporal_token(&toks[k].surface, toks[k].pos)
            && !instances.iter().any(|m| m.covers(k))
    };
    let mut out: Vec<Mention> = Vec::new();
    let mut i = 0;
    while i < toks.len() {
        if !eligible(i) {
            i += 1;
            continue;
        }
        let mut tries = Vec::new();
        if eligible(i + 2) && toks[i + 1].surface.eq_ignore_ascii_case("of") {
            tries.push((i, i + 2, i));
        }
        if eligible(i + 1) {
            tries.push((i, i + 1, i + 1));
        }
        tries.push((i, i, i));
        let hit = tries.into_iter().find_map(|(s, e, head)| {
            let text = span_text(g, s, e);
            ontology
                .class_for_word(&text)
                .map(|(class, sc)| (s, e, head, text, class, sc))
        });
        match hit {
            Some((s, e, head, text, class, sc)) => {
                let n = out.len();
                out.push(Mention {
                    id: instances.len() + n,
                    kind: MentionKind::Concept,
                    span: (s, e),
                    head,
                    text,
                    target: class.clone(),
                    class: Some(class),
                    score: sc,
                    variable: format!("c{}", n + 1),
                    owner: None,
                    synthetic: false,
                });
                i = e + 1;
            }
            None => i += 1,
        }
    }
    for m in &out {
        set.note("concepts", format!("{:?} -> {} ({:.2})", m.text, m.target, m.score));
    }
    out
}

/// Folds a class word adjacent to a named entity of that class ("the Po
/// river") into the instance mention. Returns the kept mentions and the
/// variables of the concepts absorbed.
pub fn consolidate(ontology: &Ontology, mut mentions: Vec<Mention>) -> (Vec<Mention>, Vec<String>) {
    mentions.sort_by_key(|m| (m.span.0, m.id));
    let mut retired = Vec::new();
    let mut k = 0;
    while k < mentions.len() {
        if mentions[k].kind != MentionKind::Concept {
            k += 1;
            continue;
        }
        let c = &mentions[k];
        let partner = mentions.iter().position(|m| {
            m.kind == MentionKind::Instance
                && (m.span.1 + 1 == c.span.0 || c.span.1 + 1 == m.span.0)
                && m.class.as_ref().is_some_and(|ic| ontology.is_subclass_of(ic, &c.target))
        });
        let Some(p) = partner else {
            k += 1;
            continue;
        };
        let concept = mentions.remove(k);
        let p = if p > k { p - 1 } else { p };
        let inst = &mut mentions[p];
        inst.text = if concept.span.0 < inst.span.0 {
            format!("{} {}", concept.text, inst.text)
        } else {
            format!("{} {}", inst.text, concept.text)
        };
        inst.span = (inst.span.0.min(concept.span.0), inst.span.1.max(concept.span.1));
        inst.head = inst.head.max(concept.head);
        retired.push(concept.variable);
    }
    (mentions, retired)
}

/// Property phrases (one to three tokens) owned by the closest instance or
/// concept whose class has a matching property.
pub fn identify_properties(
    g: &DepGraph,
    ontology: &Ontology,
    reserved: &BTreeSet<usize>,
    set: &mut AnnotationSet,
) {
    let toks = &g.tokens;
    let mut used: Vec<bool> = (0..toks.len())
        .map(|k| {
            reserved.contains(&k)
                || set.mentions.iter().any(|m| m.covers(k))
                || is_unit(&toks[k].surface)
                || !matches!(toks[k].pos, Pos::Noun | Pos::Propn | Pos::Adp | Pos::Adj)
        })
        .collect();
    for len in (1..=3).rev() {
        for s in 0..toks.len().saturating_sub(len - 1) {
            let e = s + len - 1;
            if (s..=e).any(|k| used[k]) || !toks[s].pos.is_nominal() || !toks[e].pos.is_nominal() {
                continue;
            }
            if (s..=e).any(|k| toks[k].pos == Pos::Adp && !toks[k].surface.eq_ignore_ascii_case("of")) {
                continue;
            }
            let phrase = span_text(g, s, e);
            let head = if len == 3 && toks[s + 1].surface.eq_ignore_ascii_case("of") { s } else { e };
            let best = set
                .mentions
                .iter()
                .filter(|m| m.is_geo())
                .filter_map(|m| {
                    let class = m.class.as_ref()?;
                    let (iri, sc) = ontology.property_for_phrase(class, &phrase).ok()??;
                    Some((score(g, m.head, head), m.id, iri, sc))
                })
                .min_by_key(|(a, id, _, _)| (*a, *id));
            let Some((_, owner, iri, sc)) = best else {
                continue;
            };
            let id = set.next_mention_id();
            let n = set.next_var_number("p");
            set.note("properties", format!("{phrase:?} -> {iri} of mention {owner} ({sc:.2})"));
            set.mentions.push(Mention {
                id,
                kind: MentionKind::Property,
                span: (s, e),
                head,
                text: phrase,
                target: iri,
                class: None,
                score: sc,
                variable: format!("p{n}"),
                owner: Some(owner),
                synthetic: false,
            });
            used[s..=e].iter_mut().for_each(|u| *u = true);
        }
    }
}

/// Tokens equal to a known string literal (e.g. a polarization mode) become
/// equality constraints on that property.
pub fn identify_values(
    g: &DepGraph,
    kg: &KnowledgeGraph,
    reserved: &BTreeSet<usize>,
    set: &mut AnnotationSet,
) {
    let values = string_values(&kg.store, &kg.ontology);
    for t in &g.tokens {
        if reserved.contains(&t.index) || set.mentions.iter().any(|m| m.is_geo() && m.covers(t.index)) {
            continue;
        }
        let Some((prop, lexical)) = values.iter().find(|(_, v)| v.eq_ignore_ascii_case(&t.surface)) else {
            continue;
        };
        let owner = set
            .mentions
            .iter()
            .filter(|m| m.is_geo())
            .filter(|m| {
                m.class.as_ref().is_some_and(|c| {
                    kg.ontology.properties_of(c).iter().any(|p| &p.iri == prop)
                })
            })
            .min_by_key(|m| (score(g, m.head, t.index), m.id))
            .map(|m| m.id);
        let Some(owner) = owner else {
            set.note("values", format!("{:?} has no owner with {prop}", t.surface));
            continue;
        };
        let property = set.ensure_property(owner, prop, t.index);
        set.values.push(ValueConstraint {
            token: t.index,
            value: lexical.clone(),
            property,
        });
    }
}

fn superlative(word: &str, next: Option<&str>) -> Option<(Direction, Option<&'static str>, usize)> {
    Some(match (word, next) {
        ("largest" | "biggest", _) => (Direction::Max, Some("area"), 1),
        ("smallest", _) => (Direction::Min, Some("area"), 1),
        ("longest", _) => (Direction::Max, Some("length"), 1),
        ("shortest", _) => (Direction::Min, Some("length"), 1),
        ("latest" | "newest", _) => (Direction::Max, Some("timestamp"), 1),
        ("oldest" | "earliest", _) => (Direction::Min, Some("timestamp"), 1),
        ("most", Some("recent")) => (Direction::Max, Some("timestamp"), 2),
        ("most", Some("populous" | "populated")) => (Direction::Max, Some("population"), 2),
        ("least", Some("populous" | "populated")) => (Direction::Min, Some("population"), 2),
        ("highest" | "greatest" | "most" | "maximum", _) => (Direction::Max, None, 1),
        ("lowest" | "least" | "minimum", _) => (Direction::Min, None, 1),
        _ => return None,
    })
}

fn comparative(word: &str) -> Option<&'static str> {
    Some(match word {
        "larger" | "bigger" | "smaller" => "area",
        "longer" | "shorter" => "length",
        "newer" | "older" | "later" | "earlier" => "timestamp",
        _ => return None,
    })
}

/// Superlatives ("largest", "highest cloud coverage") and comparatives
/// followed by `than`.
pub fn identify_comparatives(g: &DepGraph, ontology: &Ontology, set: &mut AnnotationSet) {
    let toks = &g.tokens;
    let lower: Vec<String> = toks.iter().map(|t| t.surface.to_lowercase()).collect();
    let mut i = 0;
    while i < toks.len() {
        let w = lower[i].as_str();
        let next = lower.get(i + 1).map(String::as_str);
        let prev = i.checked_sub(1).map(|k| lower[k].as_str());
        if prev == Some("at") || (matches!(w, "more" | "less" | "fewer") && next == Some("than")) {
            i += 1;
            continue;
        }
        if let Some(local) = comparative(w).filter(|_| next == Some("than")) {
            if let Some((owner, prop)) = owner_for(g, ontology, set, i, local) {
                let target = set.ensure_property(owner, &prop, i);
                set.comparatives.push(ComparativeMark {
                    kind: ComparativeKind::Comparative,
                    direction: if matches!(w, "larger" | "bigger" | "longer" | "newer" | "later") {
                        Direction::Max
                    } else {
                        Direction::Min
                    },
                    token: i,
                    target,
                });
            }
            i += 1;
            continue;
        }
        let Some((direction, named, width)) = superlative(w, next) else {
            i += 1;
            continue;
        };
        let target = match named {
            Some(local) => owner_for(g, ontology, set, i, local).map(|(o, p)| set.ensure_property(o, &p, i)),
            None => {
                let explicit = set
                    .mentions
                    .iter()
                    .filter(|m| m.kind == MentionKind::Property && m.span.0 > i && !m.synthetic)
                    .min_by_key(|m| (score(g, m.head, i), m.id))
                    .map(|m| m.id);
                explicit.or_else(|| {
                    if matches!(w, "most" | "least") {
                        return None;
                    }
                    let owner = nearest_geo(g, set, i)?;
                    let class = set.mention(owner)?.class.clone()?;
                    let prop = default_property(ontology, &class)?;
                    Some(set.ensure_property(owner, &prop, i))
                })
            }
        };
        match target {
            Some(target) => set.comparatives.push(ComparativeMark {
                kind: ComparativeKind::Superlative,
                direction,
                token: i,
                target,
            }),
            None => set.note("comparatives", format!("{w:?} has nothing to rank")),
        }
        i += width;
    }
}

fn nearest_geo(g: &DepGraph, set: &AnnotationSet, token: usize) -> Option<usize> {
    set.mentions
        .iter()
        .filter(|m| m.is_geo())
        .min_by_key(|m| (m.kind != MentionKind::Concept, score(g, m.head, token), m.id))
        .map(|m| m.id)
}

/// The closest concept (then instance) that has property `local`, falling
/// back to its class default when it does not.
fn owner_for(
    g: &DepGraph,
    ontology: &Ontology,
    set: &AnnotationSet,
    token: usize,
    local: &str,
) -> Option<(usize, Iri)> {
    let owner = nearest_geo(g, set, token)?;
    let class = set.mention(owner)?.class.clone()?;
    let named = eo_property(ontology, local)
        .filter(|p| ontology.properties_of(&class).iter().any(|q| &q.iri == p));
    named.or_else(|| default_property(ontology, &class)).map(|p| (owner, p))
}
