//! Identifiers and solvers that turn a parsed question into an
//! [`AnnotationSet`]: linked instances, concepts and properties, spatial
//! relations, numeric and temporal constraints, comparatives and the
//! expected answer type.

mod entities;
mod numeric;
mod returntype;
mod spatial;
mod temporal;

use std::collections::BTreeSet;
use std::fmt;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kgstore::{Iri, KnowledgeGraph};
use crate::nlp::{tree_distance, DepGraph, NlpError};

pub use entities::{
    consolidate, identify_comparatives, identify_concepts, identify_instances,
    identify_properties, identify_values,
};
pub use numeric::{solve_conjunctions, solve_numerics};
pub use returntype::{HeuristicClassifier, ReturnTypeClassifier};
pub use spatial::{identify_spatial_relations, propagate_containment};
pub use temporal::{attach_temporal, identify_temporal, DateSpan};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum MentionKind {
    Instance,
    Concept,
    Property,
}

/// A token span linked to a KG resource, class or property.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mention {
    pub id: usize,
    pub kind: MentionKind,
    /// Inclusive token range.
    pub span: (usize, usize),
    /// Token used for attachment scoring.
    pub head: usize,
    pub text: String,
    pub target: Iri,
    /// Ontology class of the mentioned entity; the property's domain class
    /// is not recorded.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub class: Option<Iri>,
    pub score: f64,
    /// Variable name without `?`: `iWKT1`, `c1`, `p1`.
    pub variable: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub owner: Option<usize>,
    /// Introduced by a rule rather than by a property phrase in the text.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub synthetic: bool,
}

impl Mention {
    pub fn is_geo(&self) -> bool {
        matches!(self.kind, MentionKind::Instance | MentionKind::Concept)
    }

    pub fn covers(&self, token: usize) -> bool {
        self.span.0 <= token && token <= self.span.1
    }

    /// Variable holding the feature itself (concepts only).
    pub fn feature_var(&self) -> Option<String> {
        (self.kind == MentionKind::Concept).then(|| self.variable.clone())
    }

    /// Variable holding the WKT literal of the feature's geometry.
    pub fn wkt_var(&self) -> Option<String> {
        match self.kind {
            MentionKind::Instance => Some(self.variable.clone()),
            MentionKind::Concept => Some(format!("cWKT{}", &self.variable[1..])),
            MentionKind::Property => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SpatialFunction {
    #[serde(rename = "geof:sfWithin")]
    Within,
    #[serde(rename = "geof:sfContains")]
    Contains,
    #[serde(rename = "geof:sfIntersects")]
    Intersects,
    #[serde(rename = "geof:distance")]
    Distance,
}

impl SpatialFunction {
    pub fn iri(self) -> &'static str {
        use crate::kgstore::vocab;
        match self {
            SpatialFunction::Within => vocab::GEOF_SF_WITHIN,
            SpatialFunction::Contains => vocab::GEOF_SF_CONTAINS,
            SpatialFunction::Intersects => vocab::GEOF_SF_INTERSECTS,
            SpatialFunction::Distance => vocab::GEOF_DISTANCE,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Comparator {
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = ">")]
    Gt,
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = "=")]
    Eq,
    #[serde(rename = "~")]
    Approx,
}

impl Comparator {
    pub fn symbol(self) -> &'static str {
        match self {
            Comparator::Lt => "<",
            Comparator::Gt => ">",
            Comparator::Le => "<=",
            Comparator::Ge => ">=",
            Comparator::Eq => "=",
            Comparator::Approx => "~",
        }
    }
}

impl fmt::Display for Comparator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistanceConstraint {
    pub comparator: Comparator,
    pub metres: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum LinkOrigin {
    Keyword,
    ImageLinkage,
    Conjunction,
    Propagated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpatialLink {
    pub id: usize,
    pub function: SpatialFunction,
    pub arg1: usize,
    pub arg2: usize,
    /// Token that triggered the relation.
    pub token: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub distance: Option<DistanceConstraint>,
    pub origin: LinkOrigin,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", content = "id")]
pub enum ConstraintTarget {
    Property(usize),
    Link(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NumericConstraint {
    pub token: usize,
    /// Normalized value; kilometres are converted to metres.
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub unit: Option<String>,
    pub comparator: Comparator,
    pub target: ConstraintTarget,
}

/// Half-open UTC interval; a missing bound is unbounded.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TemporalConstraint {
    pub text: String,
    pub span: (usize, usize),
    #[serde(skip_serializing_if = "Option::is_none")]
    pub start: Option<DateTime<Utc>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub end: Option<DateTime<Utc>>,
    /// Timestamp property mention the interval restricts.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target: Option<usize>,
}

/// Equality with a string literal, e.g. a polarization mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValueConstraint {
    pub token: usize,
    pub value: String,
    pub property: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ComparativeKind {
    Comparative,
    Superlative,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    Max,
    Min,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparativeMark {
    pub kind: ComparativeKind,
    pub direction: Direction,
    pub token: usize,
    /// Property mention being compared.
    pub target: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ReturnType {
    Name,
    Coordinates,
    NumberProperty,
    NumberCount,
    Image,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum QuestionForm {
    Select,
    Ask,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceNote {
    pub component: String,
    pub message: String,
}

/// Everything the identifiers found in one question.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotationSet {
    pub question: String,
    pub mentions: Vec<Mention>,
    pub spatial_links: Vec<SpatialLink>,
    pub numeric: Vec<NumericConstraint>,
    pub temporal: Vec<TemporalConstraint>,
    pub values: Vec<ValueConstraint>,
    pub comparatives: Vec<ComparativeMark>,
    pub return_types: Vec<ReturnType>,
    pub form: QuestionForm,
    /// Concept mentions the answer is grouped by ("per region").
    pub group_by: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub limit: Option<u64>,
    /// Variables removed by consolidation.
    pub retired: Vec<String>,
    pub notes: Vec<TraceNote>,
}

impl AnnotationSet {
    pub fn new(question: &str) -> Self {
        AnnotationSet {
            question: question.to_string(),
            mentions: Vec::new(),
            spatial_links: Vec::new(),
            numeric: Vec::new(),
            temporal: Vec::new(),
            values: Vec::new(),
            comparatives: Vec::new(),
            return_types: Vec::new(),
            form: QuestionForm::Select,
            group_by: Vec::new(),
            limit: None,
            retired: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn mention(&self, id: usize) -> Option<&Mention> {
        self.mentions.iter().find(|m| m.id == id)
    }

    pub fn link(&self, id: usize) -> Option<&SpatialLink> {
        self.spatial_links.iter().find(|l| l.id == id)
    }

    pub fn note(&mut self, component: &str, message: impl Into<String>) {
        self.notes.push(TraceNote {
            component: component.to_string(),
            message: message.into(),
        });
    }

    pub fn next_mention_id(&self) -> usize {
        self.mentions.iter().map(|m| m.id + 1).max().unwrap_or(0)
    }

    pub fn next_link_id(&self) -> usize {
        self.spatial_links.iter().map(|l| l.id + 1).max().unwrap_or(0)
    }

    /// Next free number for a variable family (`c`, `iWKT`, `p`), counting
    /// retired variables as used.
    pub fn next_var_number(&self, prefix: &str) -> usize {
        self.mentions
            .iter()
            .map(|m| m.variable.as_str())
            .chain(self.retired.iter().map(String::as_str))
            .filter_map(|v| v.strip_prefix(prefix)?.parse::<usize>().ok())
            .max()
            .unwrap_or(0)
            + 1
    }

    /// Mentions sorted by token position.
    pub fn mentions_in_order(&self) -> Vec<&Mention> {
        let mut out: Vec<&Mention> = self.mentions.iter().collect();
        out.sort_by_key(|m| (m.span.0, m.id));
        out
    }

    /// Adds a rule-generated property mention owned by `owner`, or returns
    /// the existing one for the same property.
    pub fn ensure_property(&mut self, owner: usize, property: &Iri, token: usize) -> usize {
        if let Some(m) = self.mentions.iter().find(|m| {
            m.kind == MentionKind::Property && m.owner == Some(owner) && &m.target == property
        }) {
            return m.id;
        }
        let id = self.next_mention_id();
        let n = self.next_var_number("p");
        self.mentions.push(Mention {
            id,
            kind: MentionKind::Property,
            span: (token, token),
            head: token,
            text: property.local_name().to_string(),
            target: property.clone(),
            class: None,
            score: 1.0,
            variable: format!("p{n}"),
            owner: Some(owner),
            synthetic: true,
        });
        id
    }

    /// Checks that every cross-reference resolves and the structural
    /// invariants hold.
    pub fn validate(&self) -> Result<(), ValidationError> {
        let ids: BTreeSet<usize> = self.mentions.iter().map(|m| m.id).collect();
        if ids.len() != self.mentions.len() {
            return Err(ValidationError::DuplicateMention);
        }
        let mut vars = BTreeSet::new();
        for m in &self.mentions {
            if !vars.insert(m.variable.as_str()) || self.retired.contains(&m.variable) {
                return Err(ValidationError::VariableReuse(m.variable.clone()));
            }
            match (m.kind, m.owner) {
                (MentionKind::Property, None) => return Err(ValidationError::OwnerlessProperty(m.id)),
                (MentionKind::Property, Some(o)) => match self.mention(o) {
                    Some(owner) if owner.is_geo() => {}
                    _ => return Err(ValidationError::Dangling(format!("owner {o} of mention {}", m.id))),
                },
                (_, Some(_)) => return Err(ValidationError::Dangling(format!("owner on mention {}", m.id))),
                _ => {}
            }
        }
        let geo: Vec<&Mention> = self.mentions.iter().filter(|m| m.is_geo()).collect();
        for (i, a) in geo.iter().enumerate() {
            for b in &geo[i + 1..] {
                if a.span.0 <= b.span.1 && b.span.0 <= a.span.1 {
                    return Err(ValidationError::Overlap(a.id, b.id));
                }
            }
        }
        let geo_ref = |id: usize, what: &str| match self.mention(id) {
            Some(m) if m.is_geo() => Ok(()),
            _ => Err(ValidationError::Dangling(format!("{what} {id}"))),
        };
        let prop_ref = |id: usize, what: &str| match self.mention(id) {
            Some(m) if m.kind == MentionKind::Property => Ok(()),
            _ => Err(ValidationError::Dangling(format!("{what} {id}"))),
        };
        for l in &self.spatial_links {
            geo_ref(l.arg1, "link argument")?;
            geo_ref(l.arg2, "link argument")?;
            let is_distance = l.function == SpatialFunction::Distance;
            if is_distance != l.distance.is_some() {
                return Err(ValidationError::DistanceConstraint(l.id));
            }
        }
        for n in &self.numeric {
            match n.target {
                ConstraintTarget::Property(p) => prop_ref(p, "numeric target")?,
                ConstraintTarget::Link(l) => {
                    if self.link(l).is_none() {
                        return Err(ValidationError::Dangling(format!("numeric target link {l}")));
                    }
                }
            }
        }
        for t in &self.temporal {
            if let (Some(s), Some(e)) = (t.start, t.end) {
                if s >= e {
                    return Err(ValidationError::EmptyInterval(t.text.clone()));
                }
            }
            if let Some(p) = t.target {
                prop_ref(p, "temporal target")?;
            }
        }
        for v in &self.values {
            prop_ref(v.property, "value target")?;
        }
        for c in &self.comparatives {
            prop_ref(c.target, "comparative target")?;
        }
        for g in &self.group_by {
            geo_ref(*g, "group-by mention")?;
        }
        if self.return_types.is_empty() {
            return Err(ValidationError::NoReturnType);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ValidationError {
    #[error("duplicate mention id")]
    DuplicateMention,
    #[error("variable {0} is used twice or was retired")]
    VariableReuse(String),
    #[error("property mention {0} has no owner")]
    OwnerlessProperty(usize),
    #[error("dangling reference: {0}")]
    Dangling(String),
    #[error("instance/concept mentions {0} and {1} overlap")]
    Overlap(usize, usize),
    #[error("spatial link {0}: distance links need a distance constraint, other links none")]
    DistanceConstraint(usize),
    #[error("empty interval for {0:?}")]
    EmptyInterval(String),
    #[error("no return type")]
    NoReturnType,
}

/// Tree distance plus a small word-distance tie breaker.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AttachmentScore {
    pub tree_distance: usize,
    pub word_distance: usize,
}

impl AttachmentScore {
    pub fn score(&self) -> f64 {
        self.tree_distance as f64 + self.word_distance as f64 / 100.0
    }

    /// `score * 100` as an exact integer, used for comparisons.
    pub fn key(&self) -> usize {
        self.tree_distance * 100 + self.word_distance
    }
}

impl PartialOrd for AttachmentScore {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for AttachmentScore {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.key().cmp(&other.key())
    }
}

pub fn attachment_score(g: &DepGraph, i: usize, j: usize) -> Result<AttachmentScore, NlpError> {
    Ok(AttachmentScore {
        tree_distance: tree_distance(g, i, j)?,
        word_distance: i.abs_diff(j),
    })
}

/// Score for indices already known to be in range.
pub(crate) fn score(g: &DepGraph, i: usize, j: usize) -> AttachmentScore {
    attachment_score(g, i, j).expect("token indices in range")
}

/// Runs every identifier and solver in pipeline order.
pub fn annotate(
    question: &str,
    g: &DepGraph,
    kg: &KnowledgeGraph,
    classifier: &dyn ReturnTypeClassifier,
) -> AnnotationSet {
    let mut set = AnnotationSet::new(question);
    let dates = identify_temporal(g, &mut set);
    let reserved: BTreeSet<usize> = dates.iter().flat_map(|d| d.span.0..=d.span.1).collect();

    let instances = identify_instances(g, &kg.store, &kg.ontology, &reserved, &mut set);
    let concepts = identify_concepts(g, &kg.ontology, &instances, &reserved, &mut set);
    let mut mentions = instances;
    mentions.extend(concepts);
    let (mentions, retired) = consolidate(&kg.ontology, mentions);
    for v in &retired {
        set.note("consolidate", format!("retired ?{v}"));
    }
    set.retired = retired;
    set.mentions = mentions;

    identify_properties(g, &kg.ontology, &reserved, &mut set);
    identify_values(g, kg, &reserved, &mut set);
    identify_comparatives(g, &kg.ontology, &mut set);
    identify_spatial_relations(g, &kg.ontology, &mut set);
    solve_numerics(g, &kg.ontology, &reserved, &mut set);
    solve_conjunctions(g, &mut set);
    propagate_containment(&kg.ontology, &mut set);
    attach_temporal(g, &kg.ontology, dates, &mut set);

    let dropped: Vec<usize> = set
        .spatial_links
        .iter()
        .filter(|l| l.function == SpatialFunction::Distance && l.distance.is_none())
        .map(|l| l.id)
        .collect();
    for id in dropped {
        set.note("spatial", format!("distance relation {id} has no numeric bound; dropped"));
        set.spatial_links.retain(|l| l.id != id);
    }

    returntype::identify_return_type(g, &kg.ontology, classifier, &mut set);
    set
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nlp::{parse_dependencies, tokenize_and_tag};

    #[test]
    fn score_formula_is_exact_on_small_graphs() {
        let g = parse_dependencies(&tokenize_and_tag("rivers less than 2km away from towns").unwrap());
        for i in 0..g.len() {
            for j in 0..g.len() {
                let s = attachment_score(&g, i, j).unwrap();
                assert_eq!(s.word_distance, i.abs_diff(j));
                assert_eq!(s.score(), s.tree_distance as f64 + s.word_distance as f64 / 100.0);
            }
        }
        assert_eq!(attachment_score(&g, 2, 2).unwrap().score(), 0.0);
        assert!(attachment_score(&g, 0, 99).is_err());
    }

    #[test]
    fn score_examples() {
        let s = AttachmentScore { tree_distance: 2, word_distance: 5 };
        assert!((s.score() - 2.05).abs() < 1e-12);
        let a = AttachmentScore { tree_distance: 1, word_distance: 3 };
        let b = AttachmentScore { tree_distance: 1, word_distance: 7 };
        assert!(a < b);
        assert!((a.score() - 1.03).abs() < 1e-12 && (b.score() - 1.07).abs() < 1e-12);
    }
}
