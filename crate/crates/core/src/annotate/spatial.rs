use super::entities::is_a;
use super::{score, AnnotationSet, LinkOrigin, MentionKind, SpatialFunction, SpatialLink};
use crate::kgstore::Ontology;
use crate::nlp::{is_unit, DepGraph, Pos};

const WITHIN: &[&str] = &["in", "within", "inside"];
const CONTAINS: &[&str] = &["contain", "contains", "containing"];
const INTERSECTS: &[&str] = &[
    "cross", "crosses", "crossing", "intersect", "intersects", "intersecting", "overlap",
    "overlaps", "overlapping", "pass", "passes", "passing", "flow", "flows", "flowing", "through",
    "across", "border", "borders", "bordering", "near",
];
const IMAGE_KEYWORDS: &[&str] = &[
    "of", "with", "over", "showing", "covering", "covers", "depicting", "depicts",
];

enum Trigger {
    Function(SpatialFunction),
    /// Distance relation whose object follows the given adposition.
    DistanceVia(&'static [&'static str]),
    ImageOnly,
    GroupBy,
}

fn trigger(g: &DepGraph, i: usize) -> Option<Trigger> {
    let toks = &g.tokens;
    let w = toks[i].surface.to_lowercase();
    let next = |k: usize| toks.get(k).map(|t| t.surface.to_lowercase());
    let measure_follows = (i + 1..toks.len().min(i + 5))
        .take_while(|&k| matches!(toks[k].pos, Pos::Num | Pos::Noun) || toks[k].pos == Pos::Adv)
        .any(|k| is_unit(&toks[k].surface) && toks[k].surface != "%");
    Some(match w.as_str() {
        "within" if measure_follows => Trigger::DistanceVia(&["of", "from"]),
        "per" => Trigger::GroupBy,
        "away" | "far" if next(i + 1).as_deref() == Some("from") => Trigger::DistanceVia(&["from"]),
        "close" if next(i + 1).as_deref() == Some("to") => Trigger::DistanceVia(&["to"]),
        _ if is_unit(&w) && w != "%" && w != "percent" && next(i + 1).as_deref() == Some("from") => {
            Trigger::DistanceVia(&["from"])
        }
        w if WITHIN.contains(&w) && toks[i].pos == Pos::Adp => Trigger::Function(SpatialFunction::Within),
        w if CONTAINS.contains(&w) => Trigger::Function(SpatialFunction::Contains),
        w if INTERSECTS.contains(&w) => Trigger::Function(SpatialFunction::Intersects),
        w if IMAGE_KEYWORDS.contains(&w) => Trigger::ImageOnly,
        _ => return None,
    })
}

/// The token an adposition at `t` introduces, or the object of a verb.
fn object_of(g: &DepGraph, t: usize) -> Option<usize> {
    match g.tokens[t].pos {
        Pos::Adp => (g.label(t) == Some("case")).then(|| g.head(t)).flatten(),
        _ => {
            let kids = g.children(t);
            kids.iter()
                .find(|(_, l)| *l == "obj")
                .or_else(|| kids.iter().find(|(c, l)| *l == "obl" && *c > t))
                .map(|(c, _)| *c)
                .or_else(|| {
                    (t + 1..g.len())
                        .find(|&k| g.tokens[k].pos == Pos::Adp && g.label(k) == Some("case"))
                        .and_then(|k| g.head(k))
                })
        }
    }
}

/// Keyword and image-linkage rules that relate pairs of instance and
/// concept mentions.
pub fn identify_spatial_relations(g: &DepGraph, ontology: &Ontology, set: &mut AnnotationSet) {
    let toks = &g.tokens;
    let mut consumed = Vec::new();
    for t in 0..toks.len() {
        if consumed.contains(&t) {
            continue;
        }
        let Some(trig) = trigger(g, t) else {
            continue;
        };
        let mention_at = |set: &AnnotationSet, k: usize| {
            set.mentions.iter().find(|m| m.is_geo() && m.covers(k)).map(|m| m.id)
        };
        if set.mentions.iter().any(|m| m.covers(t)) {
            continue;
        }
        let object_token = match &trig {
            Trigger::DistanceVia(adps) => {
                let adp = (t + 1..toks.len())
                    .find(|&k| adps.contains(&toks[k].surface.to_lowercase().as_str()) && toks[k].pos == Pos::Adp);
                consumed.extend(adp);
                adp.and_then(|k| object_of(g, k))
                    .or_else(|| (t + 1..toks.len()).find(|&k| mention_at(set, k).is_some()))
            }
            _ => object_of(g, t),
        };
        let Some(object) = object_token.and_then(|k| mention_at(set, k)) else {
            continue;
        };
        let obj_span = set.mention(object).expect("exists").span;
        let subject = set
            .mentions
            .iter()
            .filter(|m| m.is_geo() && m.id != object && m.span.1 < t)
            .min_by_key(|m| (score(g, m.head, t), m.id))
            .or_else(|| {
                set.mentions
                    .iter()
                    .filter(|m| m.is_geo() && m.id != object && m.span.0 > obj_span.1)
                    .min_by_key(|m| (score(g, m.head, t), m.id))
            })
            .map(|m| (m.id, m.kind, m.class.clone()));
        let Some((subject, subject_kind, subject_class)) = subject else {
            continue;
        };
        let subject_image = is_a(ontology, subject_class.as_ref(), "Image");
        let object_kind = set.mention(object).expect("exists").kind;
        let (function, origin) = match trig {
            Trigger::DistanceVia(_) => (SpatialFunction::Distance, LinkOrigin::Keyword),
            Trigger::GroupBy => {
                if !set.group_by.contains(&object) {
                    set.group_by.push(object);
                }
                (SpatialFunction::Within, LinkOrigin::Keyword)
            }
            Trigger::Function(SpatialFunction::Within | SpatialFunction::Contains) if subject_image => {
                (SpatialFunction::Intersects, LinkOrigin::ImageLinkage)
            }
            Trigger::Function(f) => (f, LinkOrigin::Keyword),
            Trigger::ImageOnly if subject_image => (SpatialFunction::Intersects, LinkOrigin::ImageLinkage),
            Trigger::ImageOnly
                if toks[t].surface.eq_ignore_ascii_case("of")
                    && subject_kind == MentionKind::Concept
                    && object_kind == MentionKind::Instance =>
            {
                (SpatialFunction::Within, LinkOrigin::Keyword)
            }
            Trigger::ImageOnly => continue,
        };
        let duplicate = set
            .spatial_links
            .iter()
            .any(|l| l.function == function && l.arg1 == subject && l.arg2 == object);
        if duplicate {
            continue;
        }
        let id = set.next_link_id();
        set.spatial_links.push(SpatialLink {
            id,
            function,
            arg1: subject,
            arg2: object,
            token: t,
            distance: None,
            origin,
        });
    }
}

/// `distance(A, B)` together with `within(B, R)` places A in R as well,
/// unless A already has a containment relation or is an image.
pub fn propagate_containment(ontology: &Ontology, set: &mut AnnotationSet) {
    let mut added = Vec::new();
    for d in set.spatial_links.iter().filter(|l| l.function == SpatialFunction::Distance) {
        let a = d.arg1;
        let a_class = set.mention(a).and_then(|m| m.class.clone());
        if is_a(ontology, a_class.as_ref(), "Image") {
            continue;
        }
        let has_within = |x: usize| {
            set.spatial_links
                .iter()
                .chain(added.iter())
                .any(|l: &SpatialLink| l.function == SpatialFunction::Within && l.arg1 == x)
        };
        if has_within(a) {
            continue;
        }
        let region = set
            .spatial_links
            .iter()
            .find(|l| l.function == SpatialFunction::Within && l.arg1 == d.arg2)
            .map(|l| l.arg2);
        if let Some(r) = region.filter(|&r| r != a) {
            added.push(SpatialLink {
                id: 0,
                function: SpatialFunction::Within,
                arg1: a,
                arg2: r,
                token: d.token,
                distance: None,
                origin: LinkOrigin::Propagated,
            });
        }
    }
    for mut l in added {
        l.id = set.next_link_id();
        set.note("spatial", format!("mention {} placed within mention {} through a distance relation", l.arg1, l.arg2));
        set.spatial_links.push(l);
    }
}
