//! Builds a GeoSPARQL query from an [`AnnotationSet`] and rewrites spatial
//! filters into materialized-relation triple patterns.

use std::collections::{BTreeMap, BTreeSet};

use chrono::{DateTime, Utc};
use serde::Serialize;
use thiserror::Error;

use crate::annotate::{
    AnnotationSet, Comparator, ComparativeKind, ConstraintTarget, Direction, Mention, MentionKind,
    QuestionForm, ReturnType, SpatialFunction, ValidationError,
};
use crate::kgstore::{vocab, Iri, Literal};
use crate::nlp::DepGraph;
use crate::sparql::{
    approximately, AstError, CompareOp, Expr, GeoFunction, OrderKey, Pattern, PredicatePath,
    Projection, Query, QueryForm, TermPattern, TriplePattern, Variable,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QueryGenError {
    #[error("annotation set is inconsistent: {0}")]
    Annotation(#[from] ValidationError),
    #[error("constraint refers to retired variable ?{0}")]
    RetiredVariable(String),
    #[error("generated query is invalid: {0}")]
    Ast(#[from] AstError),
}

/// Patterns contributed by one identifier, with the variables they bind.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WhereBlock {
    pub origin: String,
    pub patterns: Vec<Pattern>,
    pub introduced: Vec<Variable>,
}

impl WhereBlock {
    fn new(origin: &str) -> Self {
        WhereBlock {
            origin: origin.to_string(),
            patterns: Vec::new(),
            introduced: Vec::new(),
        }
    }
}

/// SELECT/ASK clause chosen from the return types.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProjectionSpec {
    pub form: QueryForm,
    pub distinct: bool,
    pub projection: Vec<Projection>,
    pub group_by: Vec<Variable>,
    pub notes: Vec<String>,
}

fn var(name: &str) -> TermPattern {
    TermPattern::var(name)
}

fn triple(subject: TermPattern, path: PredicatePath, object: TermPattern) -> Pattern {
    Pattern::Triple(TriplePattern {
        subject,
        path,
        object,
    })
}

fn number(v: f64) -> Expr {
    Expr::Term(TermPattern::Literal(Literal::number(v)))
}

fn date_time(d: DateTime<Utc>) -> Expr {
    Expr::Term(TermPattern::Literal(Literal::date_time(d)))
}

fn compare_filters(lhs: Expr, comparator: Comparator, value: f64) -> Vec<Pattern> {
    let op = match comparator {
        Comparator::Lt => CompareOp::Lt,
        Comparator::Gt => CompareOp::Gt,
        Comparator::Le => CompareOp::Le,
        Comparator::Ge => CompareOp::Ge,
        Comparator::Eq => CompareOp::Eq,
        Comparator::Approx => return approximately(lhs, value).into_iter().map(Pattern::Filter).collect(),
    };
    vec![Pattern::Filter(Expr::compare(op, lhs, number(value)))]
}

fn geo_function(f: SpatialFunction) -> GeoFunction {
    match f {
        SpatialFunction::Within => GeoFunction::SfWithin,
        SpatialFunction::Contains => GeoFunction::SfContains,
        SpatialFunction::Intersects => GeoFunction::SfIntersects,
        SpatialFunction::Distance => GeoFunction::Distance,
    }
}

/// Subject term standing for a mention's feature: the IRI of an instance,
/// the variable of a concept.
fn feature_term(m: &Mention) -> TermPattern {
    match m.kind {
        MentionKind::Instance => TermPattern::Iri(m.target.clone()),
        _ => var(&m.variable),
    }
}

/// One block per mention, relation and constraint, in a fixed order:
/// geometries, properties, spatial filters, numeric, value and temporal
/// filters.
pub fn build_where(set: &AnnotationSet) -> Result<Vec<WhereBlock>, QueryGenError> {
    set.validate()?;
    if let Some(m) = set.mentions.iter().find(|m| set.retired.contains(&m.variable)) {
        return Err(QueryGenError::RetiredVariable(m.variable.clone()));
    }
    let mention = |id: usize| set.mention(id).expect("validated reference");
    let mut blocks = Vec::new();
    let ordered = set.mentions_in_order();

    for m in ordered.iter().filter(|m| m.is_geo()) {
        let wkt = m.wkt_var().expect("geo mention");
        let mut b = WhereBlock::new(match m.kind {
            MentionKind::Instance => "instance",
            _ => "concept",
        });
        if m.kind == MentionKind::Concept {
            b.patterns.push(triple(var(&m.variable), PredicatePath::rdf_type(), TermPattern::Iri(m.target.clone())));
            b.introduced.push(Variable::new(&m.variable));
        }
        b.patterns.push(triple(feature_term(m), PredicatePath::geometry_wkt(), var(&wkt)));
        b.introduced.push(Variable::new(wkt));
        blocks.push(b);
    }

    for m in ordered.iter().filter(|m| m.kind == MentionKind::Property) {
        let owner = mention(m.owner.expect("validated owner"));
        let mut b = WhereBlock::new("property");
        b.patterns.push(triple(feature_term(owner), PredicatePath::single(m.target.clone()), var(&m.variable)));
        b.introduced.push(Variable::new(&m.variable));
        blocks.push(b);
    }

    for l in &set.spatial_links {
        let a = Expr::var(&mention(l.arg1).wkt_var().expect("geo"));
        let c = Expr::var(&mention(l.arg2).wkt_var().expect("geo"));
        let mut b = WhereBlock::new("spatial");
        match (l.function, l.distance) {
            (SpatialFunction::Distance, Some(d)) => {
                let call = Expr::Call {
                    function: GeoFunction::Distance,
                    args: vec![a, c, Expr::Term(TermPattern::Iri(Iri::from_static(vocab::UOM_METRE)))],
                };
                b.patterns.extend(compare_filters(call, d.comparator, d.metres));
            }
            (f, _) => b.patterns.push(Pattern::Filter(Expr::Call {
                function: geo_function(f),
                args: vec![a, c],
            })),
        }
        blocks.push(b);
    }

    for n in &set.numeric {
        if let ConstraintTarget::Property(p) = n.target {
            let mut b = WhereBlock::new("numeric");
            b.patterns.extend(compare_filters(Expr::var(&mention(p).variable), n.comparator, n.value));
            blocks.push(b);
        }
    }

    for v in &set.values {
        let mut b = WhereBlock::new("value");
        b.patterns.push(Pattern::Filter(Expr::compare(
            CompareOp::Eq,
            Expr::var(&mention(v.property).variable),
            Expr::Term(TermPattern::Literal(Literal::simple(v.value.clone()))),
        )));
        blocks.push(b);
    }

    for t in &set.temporal {
        let Some(p) = t.target else {
            continue;
        };
        let pv = &mention(p).variable;
        let mut b = WhereBlock::new("temporal");
        if let Some(s) = t.start {
            b.patterns.push(Pattern::Filter(Expr::compare(CompareOp::Ge, Expr::var(pv), date_time(s))));
        }
        if let Some(e) = t.end {
            b.patterns.push(Pattern::Filter(Expr::compare(CompareOp::Lt, Expr::var(pv), date_time(e))));
        }
        blocks.push(b);
    }
    Ok(blocks)
}

/// Chooses the form and the projected variables for the first return type.
pub fn build_projection(set: &AnnotationSet, _g: &DepGraph) -> ProjectionSpec {
    let mut spec = ProjectionSpec {
        form: QueryForm::Select,
        distinct: true,
        projection: Vec::new(),
        group_by: Vec::new(),
        notes: Vec::new(),
    };
    if set.form == QuestionForm::Ask {
        spec.form = QueryForm::Ask;
        spec.distinct = false;
        return spec;
    }
    let ordered = set.mentions_in_order();
    let concepts: Vec<&Mention> = ordered.iter().copied().filter(|m| m.kind == MentionKind::Concept).collect();
    let first_var = |spec: &mut ProjectionSpec, why: &str| {
        spec.notes.push(format!("no target for {why}; projecting the first mention"));
        ordered
            .iter()
            .find(|m| m.kind != MentionKind::Instance)
            .map(|m| m.variable.clone())
            .or_else(|| ordered.first().and_then(|m| m.wkt_var()))
    };
    let link = Iri::from_static(vocab::EO_LINK);
    let rt = set.return_types.first().copied().unwrap_or(ReturnType::Name);
    let chosen: Vec<String> = match rt {
        ReturnType::Name => concepts
            .first()
            .map(|m| m.variable.clone())
            .or_else(|| first_var(&mut spec, "Name"))
            .into_iter()
            .collect(),
        ReturnType::Coordinates => ordered
            .iter()
            .find(|m| m.is_geo())
            .and_then(|m| m.wkt_var())
            .into_iter()
            .collect(),
        ReturnType::NumberProperty => {
            spec.distinct = false;
            let props: Vec<&&Mention> = ordered.iter().filter(|m| m.kind == MentionKind::Property).collect();
            props
                .iter()
                .find(|m| !m.synthetic)
                .or_else(|| props.first())
                .map(|m| m.variable.clone())
                .or_else(|| first_var(&mut spec, "NumberProperty"))
                .into_iter()
                .collect()
        }
        ReturnType::NumberCount => {
            spec.distinct = false;
            let grouped: Vec<&Mention> = set.group_by.iter().filter_map(|id| set.mention(*id)).collect();
            let counted = concepts.iter().find(|m| !set.group_by.contains(&m.id));
            for gm in &grouped {
                let v = gm.feature_var().or_else(|| gm.wkt_var()).expect("geo mention");
                spec.group_by.push(Variable::new(&v));
                spec.projection.push(Projection::Var(Variable::new(v)));
            }
            match counted {
                Some(c) => spec.projection.push(Projection::Count {
                    var: Variable::new(&c.variable),
                    distinct: true,
                    alias: Variable::new("count"),
                }),
                None => {
                    if let Some(v) = first_var(&mut spec, "NumberCount") {
                        spec.projection.push(Projection::Count {
                            var: Variable::new(v),
                            distinct: true,
                            alias: Variable::new("count"),
                        });
                    }
                }
            }
            Vec::new()
        }
        ReturnType::Image => {
            let img = concepts.first().copied();
            match img {
                Some(m) => {
                    let link = set
                        .mentions
                        .iter()
                        .find(|p| p.kind == MentionKind::Property && p.owner == Some(m.id) && p.target == link);
                    std::iter::once(m.variable.clone()).chain(link.map(|p| p.variable.clone())).collect()
                }
                None => first_var(&mut spec, "Image").into_iter().collect(),
            }
        }
    };
    spec.projection.extend(chosen.into_iter().map(|v| Projection::Var(Variable::new(v))));
    spec
}

/// Merges blocks and projection into one query: triples grouped by subject
/// in order of first appearance, then filters; superlatives add ORDER BY
/// and a limit of one unless the question gives a count.
pub fn assemble(blocks: &[WhereBlock], spec: &ProjectionSpec, set: &AnnotationSet) -> Result<Query, QueryGenError> {
    let mut subjects: Vec<TermPattern> = Vec::new();
    let mut by_subject: BTreeMap<usize, Vec<Pattern>> = BTreeMap::new();
    let mut filters = Vec::new();
    for p in blocks.iter().flat_map(|b| b.patterns.iter()) {
        match p {
            Pattern::Triple(t) => {
                let k = match subjects.iter().position(|s| *s == t.subject) {
                    Some(k) => k,
                    None => {
                        subjects.push(t.subject.clone());
                        subjects.len() - 1
                    }
                };
                let group = by_subject.entry(k).or_default();
                if !group.contains(p) {
                    group.push(p.clone());
                }
            }
            Pattern::Filter(_) => {
                if !filters.contains(p) {
                    filters.push(p.clone());
                }
            }
        }
    }
    let mut where_clause: Vec<Pattern> = by_subject.into_values().flatten().collect();
    where_clause.extend(filters);

    let mut order_by = Vec::new();
    let mut limit = set.limit;
    if spec.form == QueryForm::Select {
        for c in set.comparatives.iter().filter(|c| c.kind == ComparativeKind::Superlative) {
            let Some(p) = set.mention(c.target) else {
                continue;
            };
            order_by.push(OrderKey {
                expr: Expr::var(&p.variable),
                ascending: c.direction == Direction::Min,
            });
            limit.get_or_insert(1);
        }
    }
    let ask = spec.form == QueryForm::Ask;
    let q = Query {
        form: spec.form,
        distinct: spec.distinct && !ask,
        projection: if ask { Vec::new() } else { spec.projection.clone() },
        where_clause,
        group_by: spec.group_by.clone(),
        order_by,
        limit: if ask { None } else { limit },
    };
    q.validate()?;
    Ok(q)
}

/// Replaces topological filters over feature geometries by triple patterns
/// on the materialized relations, then drops geometry patterns nothing else
/// uses. Distance filters are left alone.
pub fn gost_rewrite(q: &Query, materialized: &BTreeSet<Iri>) -> Query {
    if materialized.is_empty() {
        return q.clone();
    }
    let geometry_of: BTreeMap<Variable, TermPattern> = q
        .where_clause
        .iter()
        .filter_map(|p| match p {
            Pattern::Triple(t) if t.path.is_geometry_wkt() => t.object.as_var().map(|v| (v.clone(), t.subject.clone())),
            _ => None,
        })
        .collect();
    let relation = |f: GeoFunction| -> Option<Iri> {
        let iri = match f {
            GeoFunction::SfWithin => vocab::GEO_SF_WITHIN,
            GeoFunction::SfContains => vocab::GEO_SF_CONTAINS,
            GeoFunction::SfIntersects => vocab::GEO_SF_INTERSECTS,
            GeoFunction::Distance => return None,
        };
        let iri = Iri::from_static(iri);
        materialized.contains(&iri).then_some(iri)
    };
    let feature = |e: &Expr| match e {
        Expr::Term(TermPattern::Var(v)) => geometry_of.get(v).cloned(),
        _ => None,
    };
    let mut rewritten = Vec::with_capacity(q.where_clause.len());
    let mut changed = false;
    for p in &q.where_clause {
        if let Pattern::Filter(Expr::Call { function, args }) = p {
            if let (Some(pred), [a, b]) = (relation(*function), args.as_slice()) {
                if let (Some(s), Some(o)) = (feature(a), feature(b)) {
                    rewritten.push(triple(s, PredicatePath::single(pred), o));
                    changed = true;
                    continue;
                }
            }
        }
        rewritten.push(p.clone());
    }
    if !changed {
        return q.clone();
    }

    let mut used = BTreeSet::new();
    for p in &rewritten {
        match p {
            Pattern::Filter(e) => e.variables(&mut used),
            Pattern::Triple(t) if !t.path.is_geometry_wkt() => {
                for term in [&t.subject, &t.object] {
                    if let TermPattern::Var(v) = term {
                        used.insert(v.clone());
                    }
                }
            }
            Pattern::Triple(_) => {}
        }
    }
    for p in &q.projection {
        match p {
            Projection::Var(v) => {
                used.insert(v.clone());
            }
            Projection::Count { var, .. } => {
                used.insert(var.clone());
            }
        }
    }
    used.extend(q.group_by.iter().cloned());
    for k in &q.order_by {
        k.expr.variables(&mut used);
    }
    // A concept's own variable must stay bound by some pattern.
    let keep = |t: &TriplePattern, all: &[Pattern]| -> bool {
        let wkt_used = t.object.as_var().is_some_and(|v| used.contains(v));
        if wkt_used {
            return true;
        }
        match &t.subject {
            TermPattern::Var(s) => !all.iter().any(|p| match p {
                Pattern::Triple(o) if !o.path.is_geometry_wkt() => o.subject == TermPattern::Var(s.clone()) || o.object == TermPattern::Var(s.clone()),
                _ => false,
            }),
            _ => false,
        }
    };
    let pruned: Vec<Pattern> = rewritten
        .iter()
        .filter(|p| match p {
            Pattern::Triple(t) if t.path.is_geometry_wkt() => keep(t, &rewritten),
            _ => true,
        })
        .cloned()
        .collect();
    Query {
        where_clause: pruned,
        ..q.clone()
    }
}

/// `build_where`, `build_projection` and `assemble` in sequence.
pub fn generate(set: &AnnotationSet, g: &DepGraph) -> Result<(Query, Vec<String>), QueryGenError> {
    let blocks = build_where(set)?;
    let spec = build_projection(set, g);
    let q = assemble(&blocks, &spec, set)?;
    Ok((q, spec.notes))
}
