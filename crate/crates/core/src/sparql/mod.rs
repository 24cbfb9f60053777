//! The GeoSPARQL subset the generator emits: AST, canonical serializer,
//! parser and an in-memory evaluator.

mod ast;
mod eval;
mod parse;
mod results;
mod serialize;

pub use ast::{
    AstError, CompareOp, Expr, GeoFunction, OrderKey, Pattern, PredicatePath, Projection, Query,
    QueryForm, TermPattern, TriplePattern, Variable,
};
pub use eval::{evaluate, EvalError};
pub use parse::{parse, ParseError};
pub use results::ResultSet;
pub use serialize::serialize;

/// Filters for "approximately `value`": within 10% either side.
pub fn approximately(lhs: Expr, value: f64) -> [Expr; 2] {
    use crate::kgstore::Literal;
    let bound = |v: f64| Expr::Term(TermPattern::Literal(Literal::number(v)));
    [
        Expr::compare(CompareOp::Ge, lhs.clone(), bound(value * 0.9)),
        Expr::compare(CompareOp::Le, lhs, bound(value * 1.1)),
    ]
}
