use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kgstore::{vocab, Iri, Literal};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Variable(String);

impl Variable {
    /// `name` without the leading `?`.
    pub fn new(name: impl Into<String>) -> Self {
        Variable(name.into())
    }

    pub fn name(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Variable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "?{}", self.0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TermPattern {
    Var(Variable),
    Iri(Iri),
    Literal(Literal),
}

impl TermPattern {
    pub fn var(name: &str) -> Self {
        TermPattern::Var(Variable::new(name))
    }

    pub fn as_var(&self) -> Option<&Variable> {
        match self {
            TermPattern::Var(v) => Some(v),
            _ => None,
        }
    }
}

/// One IRI or a two-step sequence path such as `geo:hasGeometry/geo:asWKT`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PredicatePath(pub Vec<Iri>);

impl PredicatePath {
    pub fn single(iri: Iri) -> Self {
        PredicatePath(vec![iri])
    }

    pub fn geometry_wkt() -> Self {
        PredicatePath(vec![
            Iri::from_static(vocab::GEO_HAS_GEOMETRY),
            Iri::from_static(vocab::GEO_AS_WKT),
        ])
    }

    pub fn rdf_type() -> Self {
        PredicatePath::single(Iri::from_static(vocab::RDF_TYPE))
    }

    pub fn is_geometry_wkt(&self) -> bool {
        *self == Self::geometry_wkt()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TriplePattern {
    pub subject: TermPattern,
    pub path: PredicatePath,
    pub object: TermPattern,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CompareOp {
    Lt,
    Gt,
    Le,
    Ge,
    Eq,
}

impl CompareOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CompareOp::Lt => "<",
            CompareOp::Gt => ">",
            CompareOp::Le => "<=",
            CompareOp::Ge => ">=",
            CompareOp::Eq => "=",
        }
    }

    pub fn from_symbol(s: &str) -> Option<Self> {
        Some(match s {
            "<" => CompareOp::Lt,
            ">" => CompareOp::Gt,
            "<=" => CompareOp::Le,
            ">=" => CompareOp::Ge,
            "=" => CompareOp::Eq,
            _ => return None,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum GeoFunction {
    SfWithin,
    SfContains,
    SfIntersects,
    Distance,
}

impl GeoFunction {
    pub fn iri(self) -> &'static str {
        match self {
            GeoFunction::SfWithin => vocab::GEOF_SF_WITHIN,
            GeoFunction::SfContains => vocab::GEOF_SF_CONTAINS,
            GeoFunction::SfIntersects => vocab::GEOF_SF_INTERSECTS,
            GeoFunction::Distance => vocab::GEOF_DISTANCE,
        }
    }

    pub fn from_iri(iri: &str) -> Option<Self> {
        [
            GeoFunction::SfWithin,
            GeoFunction::SfContains,
            GeoFunction::SfIntersects,
            GeoFunction::Distance,
        ]
        .into_iter()
        .find(|f| f.iri() == iri)
    }

    pub fn arity(self) -> usize {
        match self {
            GeoFunction::Distance => 3,
            _ => 2,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Expr {
    Term(TermPattern),
    Call { function: GeoFunction, args: Vec<Expr> },
    Compare { op: CompareOp, lhs: Box<Expr>, rhs: Box<Expr> },
}

impl Expr {
    pub fn var(name: &str) -> Self {
        Expr::Term(TermPattern::var(name))
    }

    pub fn compare(op: CompareOp, lhs: Expr, rhs: Expr) -> Self {
        Expr::Compare {
            op,
            lhs: Box::new(lhs),
            rhs: Box::new(rhs),
        }
    }

    pub fn variables(&self, out: &mut BTreeSet<Variable>) {
        match self {
            Expr::Term(TermPattern::Var(v)) => {
                out.insert(v.clone());
            }
            Expr::Term(_) => {}
            Expr::Call { args, .. } => args.iter().for_each(|a| a.variables(out)),
            Expr::Compare { lhs, rhs, .. } => {
                lhs.variables(out);
                rhs.variables(out);
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pattern {
    Triple(TriplePattern),
    Filter(Expr),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Projection {
    Var(Variable),
    Count {
        var: Variable,
        distinct: bool,
        alias: Variable,
    },
}

impl Projection {
    pub fn output_var(&self) -> &Variable {
        match self {
            Projection::Var(v) => v,
            Projection::Count { alias, .. } => alias,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct OrderKey {
    pub expr: Expr,
    pub ascending: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum QueryForm {
    Select,
    Ask,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Query {
    pub form: QueryForm,
    pub distinct: bool,
    pub projection: Vec<Projection>,
    pub where_clause: Vec<Pattern>,
    pub group_by: Vec<Variable>,
    pub order_by: Vec<OrderKey>,
    pub limit: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AstError {
    #[error("projected variable {0} does not occur in the WHERE clause")]
    UnboundProjection(Variable),
    #[error("variable {0} must be grouped when aggregates are projected")]
    UngroupedVariable(Variable),
    #[error("filter variable {0} is not bound by a triple pattern")]
    UnboundFilterVariable(Variable),
    #[error("ORDER BY variable {0} is not bound")]
    UnboundOrderVariable(Variable),
    #[error("{0} expects {1} arguments")]
    Arity(&'static str, usize),
    #[error("SELECT query without projection")]
    EmptyProjection,
}

impl Query {
    pub fn ask(where_clause: Vec<Pattern>) -> Self {
        Query {
            form: QueryForm::Ask,
            distinct: false,
            projection: Vec::new(),
            where_clause,
            group_by: Vec::new(),
            order_by: Vec::new(),
            limit: None,
        }
    }

    /// Variables bound by the triple patterns.
    pub fn bound_variables(&self) -> BTreeSet<Variable> {
        let mut out = BTreeSet::new();
        for p in &self.where_clause {
            if let Pattern::Triple(t) = p {
                for term in [&t.subject, &t.object] {
                    if let TermPattern::Var(v) = term {
                        out.insert(v.clone());
                    }
                }
            }
        }
        out
    }

    pub fn has_aggregate(&self) -> bool {
        self.projection
            .iter()
            .any(|p| matches!(p, Projection::Count { .. }))
    }

    pub fn validate(&self) -> Result<(), AstError> {
        let bound = self.bound_variables();
        if self.form == QueryForm::Select && self.projection.is_empty() {
            return Err(AstError::EmptyProjection);
        }
        for p in &self.projection {
            let v = match p {
                Projection::Var(v) => v,
                Projection::Count { var, .. } => var,
            };
            if !bound.contains(v) {
                return Err(AstError::UnboundProjection(v.clone()));
            }
        }
        if self.has_aggregate() {
            for p in &self.projection {
                if let Projection::Var(v) = p {
                    if !self.group_by.contains(v) {
                        return Err(AstError::UngroupedVariable(v.clone()));
                    }
                }
            }
        }
        for p in &self.where_clause {
            if let Pattern::Filter(e) = p {
                check_arity(e)?;
                let mut vars = BTreeSet::new();
                e.variables(&mut vars);
                if let Some(v) = vars.into_iter().find(|v| !bound.contains(v)) {
                    return Err(AstError::UnboundFilterVariable(v));
                }
            }
        }
        let aliases: BTreeSet<&Variable> = self.projection.iter().map(Projection::output_var).collect();
        for key in &self.order_by {
            let mut vars = BTreeSet::new();
            key.expr.variables(&mut vars);
            if let Some(v) = vars
                .into_iter()
                .find(|v| !bound.contains(v) && !aliases.contains(v))
            {
                return Err(AstError::UnboundOrderVariable(v));
            }
        }
        Ok(())
    }

    /// Copy with variables renamed `v0, v1, ...` in order of first occurrence.
    pub fn canonical_renaming(&self) -> Query {
        let mut names: BTreeMap<Variable, Variable> = BTreeMap::new();
        let mut order = Vec::new();
        let mut visit = |v: &Variable| {
            if !names.contains_key(v) {
                let fresh = Variable::new(format!("v{}", names.len()));
                names.insert(v.clone(), fresh);
                order.push(v.clone());
            }
        };
        for p in &self.projection {
            match p {
                Projection::Var(v) => visit(v),
                Projection::Count { var, alias, .. } => {
                    visit(var);
                    visit(alias);
                }
            }
        }
        for p in &self.where_clause {
            match p {
                Pattern::Triple(t) => {
                    for term in [&t.subject, &t.object] {
                        if let TermPattern::Var(v) = term {
                            visit(v);
                        }
                    }
                }
                Pattern::Filter(e) => visit_expr(e, &mut visit),
            }
        }
        for v in &self.group_by {
            visit(v);
        }
        for k in &self.order_by {
            visit_expr(&k.expr, &mut visit);
        }
        self.map_variables(&|v| names.get(v).cloned().unwrap_or_else(|| v.clone()))
    }

    /// Equality up to a consistent renaming of variables.
    pub fn alpha_equivalent(&self, other: &Query) -> bool {
        self.canonical_renaming() == other.canonical_renaming()
    }

    pub fn map_variables(&self, f: &dyn Fn(&Variable) -> Variable) -> Query {
        let term = |t: &TermPattern| match t {
            TermPattern::Var(v) => TermPattern::Var(f(v)),
            other => other.clone(),
        };
        Query {
            form: self.form,
            distinct: self.distinct,
            projection: self
                .projection
                .iter()
                .map(|p| match p {
                    Projection::Var(v) => Projection::Var(f(v)),
                    Projection::Count {
                        var,
                        distinct,
                        alias,
                    } => Projection::Count {
                        var: f(var),
                        distinct: *distinct,
                        alias: f(alias),
                    },
                })
                .collect(),
            where_clause: self
                .where_clause
                .iter()
                .map(|p| match p {
                    Pattern::Triple(t) => Pattern::Triple(TriplePattern {
                        subject: term(&t.subject),
                        path: t.path.clone(),
                        object: term(&t.object),
                    }),
                    Pattern::Filter(e) => Pattern::Filter(map_expr(e, f)),
                })
                .collect(),
            group_by: self.group_by.iter().map(f).collect(),
            order_by: self
                .order_by
                .iter()
                .map(|k| OrderKey {
                    expr: map_expr(&k.expr, f),
                    ascending: k.ascending,
                })
                .collect(),
            limit: self.limit,
        }
    }
}

fn check_arity(e: &Expr) -> Result<(), AstError> {
    match e {
        Expr::Term(_) => Ok(()),
        Expr::Call { function, args } => {
            if args.len() != function.arity() {
                return Err(AstError::Arity(function.iri(), function.arity()));
            }
            args.iter().try_for_each(check_arity)
        }
        Expr::Compare { lhs, rhs, .. } => {
            check_arity(lhs)?;
            check_arity(rhs)
        }
    }
}

fn visit_expr(e: &Expr, visit: &mut dyn FnMut(&Variable)) {
    match e {
        Expr::Term(TermPattern::Var(v)) => visit(v),
        Expr::Term(_) => {}
        Expr::Call { args, .. } => args.iter().for_each(|a| visit_expr(a, visit)),
        Expr::Compare { lhs, rhs, .. } => {
            visit_expr(lhs, visit);
            visit_expr(rhs, visit);
        }
    }
}

fn map_expr(e: &Expr, f: &dyn Fn(&Variable) -> Variable) -> Expr {
    match e {
        Expr::Term(TermPattern::Var(v)) => Expr::Term(TermPattern::Var(f(v))),
        Expr::Term(t) => Expr::Term(t.clone()),
        Expr::Call { function, args } => Expr::Call {
            function: *function,
            args: args.iter().map(|a| map_expr(a, f)).collect(),
        },
        Expr::Compare { op, lhs, rhs } => Expr::Compare {
            op: *op,
            lhs: Box::new(map_expr(lhs, f)),
            rhs: Box::new(map_expr(rhs, f)),
        },
    }
}
