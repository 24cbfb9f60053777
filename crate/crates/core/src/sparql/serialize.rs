use std::fmt::Write as _;

use super::ast::{Expr, OrderKey, Pattern, PredicatePath, Projection, Query, QueryForm, TermPattern};
use crate::kgstore::{vocab, Iri, Literal};

/// Canonical SPARQL text. Queries with at most one pattern print on one line.
pub fn serialize(q: &Query) -> String {
    let one_line = q.where_clause.len() <= 1;
    let mut out = String::new();
    match q.form {
        QueryForm::Ask => out.push_str("ASK"),
        QueryForm::Select => {
            out.push_str("SELECT");
            if q.distinct {
                out.push_str(" DISTINCT");
            }
            for p in &q.projection {
                out.push(' ');
                out.push_str(&projection(p));
            }
        }
    }
    if one_line {
        out.push_str(" WHERE {");
        if let Some(p) = q.where_clause.first() {
            out.push(' ');
            out.push_str(&pattern_line(p));
        }
        out.push_str(" }");
    } else {
        out.push_str("\nWHERE {\n");
        write_block(&mut out, &q.where_clause);
        out.push('}');
    }
    let sep = if one_line { " " } else { "\n" };
    if !q.group_by.is_empty() {
        out.push_str(sep);
        out.push_str("GROUP BY");
        for v in &q.group_by {
            let _ = write!(out, " {v}");
        }
    }
    if !q.order_by.is_empty() {
        out.push_str(sep);
        out.push_str("ORDER BY");
        for k in &q.order_by {
            out.push(' ');
            out.push_str(&order_key(k));
        }
    }
    if let Some(n) = q.limit {
        out.push_str(sep);
        let _ = write!(out, "LIMIT {n}");
    }
    out
}

fn projection(p: &Projection) -> String {
    match p {
        Projection::Var(v) => v.to_string(),
        Projection::Count {
            var,
            distinct,
            alias,
        } => {
            let d = if *distinct { "DISTINCT " } else { "" };
            format!("(COUNT({d}{var}) AS {alias})")
        }
    }
}

fn order_key(k: &OrderKey) -> String {
    let dir = if k.ascending { "ASC" } else { "DESC" };
    format!("{dir}({})", expr(&k.expr))
}

fn pattern_line(p: &Pattern) -> String {
    match p {
        Pattern::Triple(t) => format!(
            "{} {} {} .",
            term(&t.subject),
            path(&t.path),
            term(&t.object)
        ),
        Pattern::Filter(e) => format!("FILTER ({})", expr(e)),
    }
}

/// Consecutive triples sharing a subject are joined with `;`.
fn write_block(out: &mut String, patterns: &[Pattern]) {
    let mut i = 0;
    while i < patterns.len() {
        match &patterns[i] {
            Pattern::Filter(_) => {
                let _ = writeln!(out, "  {}", pattern_line(&patterns[i]));
                i += 1;
            }
            Pattern::Triple(first) => {
                let mut j = i + 1;
                while let Some(Pattern::Triple(t)) = patterns.get(j) {
                    if t.subject != first.subject {
                        break;
                    }
                    j += 1;
                }
                let _ = write!(
                    out,
                    "  {} {} {}",
                    term(&first.subject),
                    path(&first.path),
                    term(&first.object)
                );
                for p in &patterns[i + 1..j] {
                    if let Pattern::Triple(t) = p {
                        let _ = write!(out, " ;\n      {} {}", path(&t.path), term(&t.object));
                    }
                }
                out.push_str(" .\n");
                i = j;
            }
        }
    }
}

fn expr(e: &Expr) -> String {
    match e {
        Expr::Term(t) => term(t),
        Expr::Call { function, args } => {
            let args: Vec<String> = args.iter().map(expr).collect();
            format!("{}({})", iri(&Iri::from_static(function.iri())), args.join(", "))
        }
        Expr::Compare { op, lhs, rhs } => format!("{} {} {}", expr(lhs), op.symbol(), expr(rhs)),
    }
}

fn path(p: &PredicatePath) -> String {
    if p.0.len() == 1 && p.0[0].as_str() == vocab::RDF_TYPE {
        return "a".to_string();
    }
    p.0.iter().map(iri).collect::<Vec<_>>().join("/")
}

fn term(t: &TermPattern) -> String {
    match t {
        TermPattern::Var(v) => v.to_string(),
        TermPattern::Iri(i) => iri(i),
        TermPattern::Literal(l) => literal(l),
    }
}

pub(crate) fn iri(i: &Iri) -> String {
    vocab::compact(i.as_str()).unwrap_or_else(|| i.to_string())
}

/// Integers and plain decimals print bare; everything else keeps its
/// datatype, compacted when possible.
pub(crate) fn literal(l: &Literal) -> String {
    match l.datatype_str() {
        Some(vocab::XSD_INTEGER) if is_bare_integer(&l.lexical) => l.lexical.clone(),
        Some(vocab::XSD_DECIMAL) if is_bare_decimal(&l.lexical) => l.lexical.clone(),
        Some(_) => {
            let dt = l.datatype.as_ref().expect("datatype present");
            let plain = Literal {
                lexical: l.lexical.clone(),
                datatype: None,
                language: None,
            };
            format!("{plain}^^{}", iri(dt))
        }
        None => l.to_string(),
    }
}

fn is_bare_integer(s: &str) -> bool {
    let digits = s.strip_prefix(['-', '+']).unwrap_or(s);
    !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit())
}

fn is_bare_decimal(s: &str) -> bool {
    let body = s.strip_prefix(['-', '+']).unwrap_or(s);
    match body.split_once('.') {
        Some((int, frac)) => {
            int.bytes().all(|b| b.is_ascii_digit())
                && !frac.is_empty()
                && frac.bytes().all(|b| b.is_ascii_digit())
        }
        None => false,
    }
}
