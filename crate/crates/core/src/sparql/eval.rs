use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashMap};

use chrono::{DateTime, Utc};
use thiserror::Error;

use super::ast::{
    AstError, CompareOp, Expr, GeoFunction, Pattern, Projection, Query, QueryForm, TermPattern,
    Variable,
};
use super::results::ResultSet;
use crate::geofns::{SpatialFunctions, SpatialPredicate};
use crate::kgstore::{vocab, Iri, Literal, Term, TermId, TripleStore};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error(transparent)]
    Invalid(#[from] AstError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Slot {
    Var(usize),
    Const(TermId),
}

struct Atom {
    s: Slot,
    p: TermId,
    o: Slot,
}

/// Evaluates `q` over `store`, delegating geometry functions to `geo`.
pub fn evaluate(
    q: &Query,
    store: &TripleStore,
    geo: &dyn SpatialFunctions,
) -> Result<ResultSet, EvalError> {
    q.validate()?;
    let mut vars: Vec<Variable> = Vec::new();
    let mut slot_of: HashMap<Variable, usize> = HashMap::new();
    let mut slot = |v: &Variable, vars: &mut Vec<Variable>| -> usize {
        *slot_of.entry(v.clone()).or_insert_with(|| {
            vars.push(v.clone());
            vars.len() - 1
        })
    };
    let mut atoms = Vec::new();
    let mut filters = Vec::new();
    let mut impossible = false;
    let mut hidden = 0usize;
    let mut resolve = |t: &TermPattern, vars: &mut Vec<Variable>, impossible: &mut bool| match t {
        TermPattern::Var(v) => Slot::Var(slot(v, vars)),
        TermPattern::Iri(i) => const_slot(store, &Term::Iri(i.clone()), impossible),
        TermPattern::Literal(l) => const_slot(store, &Term::Literal(l.clone()), impossible),
    };
    for p in &q.where_clause {
        match p {
            Pattern::Triple(t) => {
                let s = resolve(&t.subject, &mut vars, &mut impossible);
                let o = resolve(&t.object, &mut vars, &mut impossible);
                let mut steps = Vec::new();
                for iri in &t.path.0 {
                    match store.id_of(&Term::Iri(iri.clone())) {
                        Some(id) => steps.push(id),
                        None => impossible = true,
                    }
                }
                if impossible {
                    continue;
                }
                // A sequence path joins through a fresh hidden variable.
                let mut prev = s;
                for (k, &p) in steps.iter().enumerate() {
                    let next = if k + 1 == steps.len() {
                        o
                    } else {
                        hidden += 1;
                        let v = Variable::new(format!(" path{hidden}"));
                        resolve(&TermPattern::Var(v), &mut vars, &mut impossible)
                    };
                    atoms.push(Atom { s: prev, p, o: next });
                    prev = next;
                }
            }
            Pattern::Filter(e) => filters.push(e),
        }
    }
    let var_index: HashMap<Variable, usize> =
        vars.iter().enumerate().map(|(i, v)| (v.clone(), i)).collect();

    let plan = plan_joins(&atoms);
    let mut attached: Vec<Vec<&Expr>> = vec![Vec::new(); plan.len() + 1];
    let mut bound = BTreeSet::new();
    let ready_at = |e: &Expr, bound: &BTreeSet<usize>| {
        let mut vs = BTreeSet::new();
        e.variables(&mut vs);
        vs.iter().all(|v| var_index.get(v).is_some_and(|i| bound.contains(i)))
    };
    let mut pending: Vec<&Expr> = filters.clone();
    pending.retain(|e| {
        if ready_at(e, &bound) {
            attached[0].push(e);
            false
        } else {
            true
        }
    });
    for (step, &ai) in plan.iter().enumerate() {
        for slot in [atoms[ai].s, atoms[ai].o] {
            if let Slot::Var(i) = slot {
                bound.insert(i);
            }
        }
        pending.retain(|e| {
            if ready_at(e, &bound) {
                attached[step + 1].push(e);
                false
            } else {
                true
            }
        });
    }
    debug_assert!(impossible || pending.is_empty(), "validated filters are always bound");

    let mut solutions: Vec<Vec<Option<TermId>>> = Vec::new();
    if !impossible {
        let mut ctx = Search {
            store,
            geo,
            atoms: &atoms,
            plan: &plan,
            filters: &attached,
            var_index: &var_index,
            out: &mut solutions,
            stop_after_first: q.form == QueryForm::Ask,
        };
        let mut binding = vec![None; vars.len()];
        ctx.search(0, &mut binding);
    }

    if q.form == QueryForm::Ask {
        return Ok(ResultSet::boolean(!solutions.is_empty()));
    }
    Ok(finish(q, store, geo, &var_index, solutions))
}

fn const_slot(store: &TripleStore, term: &Term, impossible: &mut bool) -> Slot {
    match store.id_of(term) {
        Some(id) => Slot::Const(id),
        None => {
            *impossible = true;
            Slot::Const(TermId::MAX)
        }
    }
}

/// Greedy order: next is the atom with the most already-bound positions.
fn plan_joins(atoms: &[Atom]) -> Vec<usize> {
    let mut bound = BTreeSet::new();
    let mut left: Vec<usize> = (0..atoms.len()).collect();
    let mut plan = Vec::new();
    while !left.is_empty() {
        let score = |a: &Atom| {
            [a.s, a.o]
                .iter()
                .filter(|s| match s {
                    Slot::Const(_) => true,
                    Slot::Var(i) => bound.contains(i),
                })
                .count()
        };
        let (pos, _) = left
            .iter()
            .enumerate()
            .max_by(|(_, &a), (_, &b)| score(&atoms[a]).cmp(&score(&atoms[b])).then(b.cmp(&a)))
            .expect("non-empty");
        let ai = left.remove(pos);
        for s in [atoms[ai].s, atoms[ai].o] {
            if let Slot::Var(i) = s {
                bound.insert(i);
            }
        }
        plan.push(ai);
    }
    plan
}

struct Search<'a> {
    store: &'a TripleStore,
    geo: &'a dyn SpatialFunctions,
    atoms: &'a [Atom],
    plan: &'a [usize],
    filters: &'a [Vec<&'a Expr>],
    var_index: &'a HashMap<Variable, usize>,
    out: &'a mut Vec<Vec<Option<TermId>>>,
    stop_after_first: bool,
}

impl Search<'_> {
    fn filters_pass(&self, step: usize, binding: &[Option<TermId>]) -> bool {
        let lookup = |v: &Variable| {
            self.var_index
                .get(v)
                .and_then(|&i| binding[i])
                .map(|id| self.store.term(id))
        };
        self.filters[step]
            .iter()
            .all(|e| effective_boolean(&eval_expr(e, &lookup, self.geo)))
    }

    fn search(&mut self, step: usize, binding: &mut Vec<Option<TermId>>) -> bool {
        if !self.filters_pass(step, binding) {
            return false;
        }
        if step == self.plan.len() {
            self.out.push(binding.clone());
            return self.stop_after_first;
        }
        let atom = &self.atoms[self.plan[step]];
        let get = |s: Slot, b: &[Option<TermId>]| match s {
            Slot::Const(id) => Some(id),
            Slot::Var(i) => b[i],
        };
        let matches = self
            .store
            .match_ids(get(atom.s, binding), Some(atom.p), get(atom.o, binding));
        for [s, _, o] in matches {
            let mut newly = Vec::new();
            let mut ok = true;
            for (slot, value) in [(atom.s, s), (atom.o, o)] {
                if let Slot::Var(i) = slot {
                    match binding[i] {
                        None => {
                            binding[i] = Some(value);
                            newly.push(i);
                        }
                        Some(existing) if existing != value => ok = false,
                        Some(_) => {}
                    }
                }
            }
            let stop = ok && self.search(step + 1, binding);
            for i in newly {
                binding[i] = None;
            }
            if stop {
                return true;
            }
        }
        false
    }
}

#[derive(Debug, Clone, Copy)]
enum Value<'a> {
    Iri(&'a Iri),
    Lit(&'a Literal),
    Num(f64),
    Bool(bool),
    Error,
}

fn value_of(t: &Term) -> Value<'_> {
    match t {
        Term::Iri(i) => Value::Iri(i),
        Term::Literal(l) => Value::Lit(l),
    }
}

fn effective_boolean(v: &Value) -> bool {
    match v {
        Value::Bool(b) => *b,
        Value::Num(n) => *n != 0.0 && !n.is_nan(),
        Value::Lit(l) if l.datatype_str() == Some(vocab::XSD_BOOLEAN) => l.lexical == "true",
        _ => false,
    }
}

fn number(v: &Value) -> Option<f64> {
    match v {
        Value::Num(n) => Some(*n),
        Value::Lit(l) if l.is_numeric() => l.as_f64(),
        _ => None,
    }
}

fn date_time(v: &Value) -> Option<DateTime<Utc>> {
    match v {
        Value::Lit(l) if l.datatype_str() == Some(vocab::XSD_DATE_TIME) => l.as_date_time(),
        _ => None,
    }
}

fn plain_string<'a>(v: &Value<'a>) -> Option<(&'a str, Option<&'a str>)> {
    match v {
        Value::Lit(l) if l.datatype.is_none() || l.datatype_str() == Some(vocab::XSD_STRING) => {
            Some((l.lexical.as_str(), l.language.as_deref()))
        }
        _ => None,
    }
}

/// Type-mismatched operands compare as false.
fn compare(op: CompareOp, a: &Value, b: &Value) -> Value<'static> {
    let ord = if let (Some(x), Some(y)) = (number(a), number(b)) {
        x.partial_cmp(&y)
    } else if let (Some(x), Some(y)) = (date_time(a), date_time(b)) {
        Some(x.cmp(&y))
    } else if let (Some((x, lx)), Some((y, ly))) = (plain_string(a), plain_string(b)) {
        (lx == ly).then(|| x.cmp(y))
    } else {
        let same = match (a, b) {
            (Value::Iri(x), Value::Iri(y)) => Some(x == y),
            (Value::Lit(x), Value::Lit(y)) => Some(x == y),
            (Value::Bool(x), Value::Bool(y)) => Some(x == y),
            _ => None,
        };
        return match (op, same) {
            (CompareOp::Eq, Some(s)) => Value::Bool(s),
            _ => Value::Bool(false),
        };
    };
    let Some(ord) = ord else {
        return Value::Bool(false);
    };
    Value::Bool(match op {
        CompareOp::Lt => ord == Ordering::Less,
        CompareOp::Gt => ord == Ordering::Greater,
        CompareOp::Le => ord != Ordering::Greater,
        CompareOp::Ge => ord != Ordering::Less,
        CompareOp::Eq => ord == Ordering::Equal,
    })
}

fn eval_expr<'a>(
    e: &'a Expr,
    lookup: &dyn Fn(&Variable) -> Option<&'a Term>,
    geo: &dyn SpatialFunctions,
) -> Value<'a> {
    match e {
        Expr::Term(TermPattern::Var(v)) => lookup(v).map_or(Value::Error, value_of),
        Expr::Term(TermPattern::Iri(i)) => Value::Iri(i),
        Expr::Term(TermPattern::Literal(l)) => Value::Lit(l),
        Expr::Compare { op, lhs, rhs } => {
            let (a, b) = (eval_expr(lhs, lookup, geo), eval_expr(rhs, lookup, geo));
            if matches!(a, Value::Error) || matches!(b, Value::Error) {
                return Value::Error;
            }
            compare(*op, &a, &b)
        }
        Expr::Call { function, args } => {
            let vals: Vec<Value> = args.iter().map(|a| eval_expr(a, lookup, geo)).collect();
            let wkt = |v: &Value<'a>| match v {
                Value::Lit(l) => Some(l.lexical.as_str()),
                _ => None,
            };
            let (Some(a), Some(b)) = (wkt(&vals[0]), wkt(&vals[1])) else {
                return Value::Error;
            };
            let pred = match function {
                GeoFunction::SfWithin => SpatialPredicate::Within,
                GeoFunction::SfContains => SpatialPredicate::Contains,
                GeoFunction::SfIntersects => SpatialPredicate::Intersects,
                GeoFunction::Distance => {
                    return match vals[2] {
                        Value::Iri(u) if u.as_str() == vocab::UOM_METRE => {
                            geo.distance_m(a, b).map_or(Value::Error, Value::Num)
                        }
                        _ => Value::Error,
                    }
                }
            };
            geo.relate(pred, a, b).map_or(Value::Error, Value::Bool)
        }
    }
}

/// Total order used by ORDER BY: errors first, then numbers, booleans,
/// date-times, IRIs and remaining literals.
fn order_cmp(a: &Value, b: &Value) -> Ordering {
    fn rank(v: &Value) -> u8 {
        if matches!(v, Value::Error) {
            0
        } else if number(v).is_some() {
            1
        } else if matches!(v, Value::Bool(_)) {
            2
        } else if date_time(v).is_some() {
            3
        } else if matches!(v, Value::Iri(_)) {
            4
        } else {
            5
        }
    }
    rank(a).cmp(&rank(b)).then_with(|| match (a, b) {
        _ if number(a).is_some() => number(a)
            .expect("numeric")
            .total_cmp(&number(b).expect("numeric")),
        (Value::Bool(x), Value::Bool(y)) => x.cmp(y),
        _ if date_time(a).is_some() => date_time(a).cmp(&date_time(b)),
        (Value::Iri(x), Value::Iri(y)) => x.cmp(y),
        (Value::Lit(x), Value::Lit(y)) => x.cmp(y),
        _ => Ordering::Equal,
    })
}

/// Aggregation, ordering, projection, DISTINCT and LIMIT, in that order.
fn finish(
    q: &Query,
    store: &TripleStore,
    geo: &dyn SpatialFunctions,
    var_index: &HashMap<Variable, usize>,
    solutions: Vec<Vec<Option<TermId>>>,
) -> ResultSet {
    // Each environment maps variable names to terms for ORDER BY and projection.
    let envs: Vec<BTreeMap<Variable, Term>> = if q.has_aggregate() {
        let mut groups: BTreeMap<Vec<TermId>, Vec<&Vec<Option<TermId>>>> = BTreeMap::new();
        for s in &solutions {
            let key = q
                .group_by
                .iter()
                .map(|v| s[var_index[v]].expect("grouped variables are bound"))
                .collect();
            groups.entry(key).or_default().push(s);
        }
        if groups.is_empty() && q.group_by.is_empty() {
            groups.insert(Vec::new(), Vec::new());
        }
        groups
            .into_iter()
            .map(|(key, members)| {
                let mut env: BTreeMap<Variable, Term> = q
                    .group_by
                    .iter()
                    .zip(key)
                    .map(|(v, id)| (v.clone(), store.term(id).clone()))
                    .collect();
                for p in &q.projection {
                    if let Projection::Count {
                        var,
                        distinct,
                        alias,
                    } = p
                    {
                        let values = members.iter().filter_map(|s| s[var_index[var]]);
                        let n = if *distinct {
                            values.collect::<BTreeSet<_>>().len()
                        } else {
                            values.count()
                        };
                        env.insert(alias.clone(), Term::Literal(Literal::integer(n as i64)));
                    }
                }
                env
            })
            .collect()
    } else {
        let names: Vec<(&Variable, usize)> = var_index
            .iter()
            .filter(|(v, _)| !v.name().starts_with(' '))
            .map(|(v, &i)| (v, i))
            .collect();
        solutions
            .iter()
            .map(|s| {
                names
                    .iter()
                    .filter_map(|(v, i)| s[*i].map(|id| ((*v).clone(), store.term(id).clone())))
                    .collect()
            })
            .collect()
    };

    let columns: Vec<&Variable> = q.projection.iter().map(Projection::output_var).collect();
    let mut rows: Vec<(Vec<Value>, Vec<Term>)> = envs
        .iter()
        .map(|env| {
            let lookup = |v: &Variable| env.get(v);
            let keys = q
                .order_by
                .iter()
                .map(|k| eval_expr(&k.expr, &lookup, geo))
                .collect();
            let row = columns
                .iter()
                .map(|v| env.get(*v).cloned().expect("projected variables are bound"))
                .collect();
            (keys, row)
        })
        .collect();
    rows.sort_by(|(ka, ra), (kb, rb)| {
        for (k, (a, b)) in q.order_by.iter().zip(ka.iter().zip(kb)) {
            let o = order_cmp(a, b);
            let o = if k.ascending { o } else { o.reverse() };
            if o != Ordering::Equal {
                return o;
            }
        }
        ra.cmp(rb)
    });
    let mut out: Vec<Vec<Term>> = rows.into_iter().map(|(_, r)| r).collect();
    if q.distinct {
        let mut seen = BTreeSet::new();
        out.retain(|r| seen.insert(r.clone()));
    }
    if let Some(n) = q.limit {
        out.truncate(n as usize);
    }
    ResultSet::select(columns.iter().map(|v| v.name().to_string()).collect(), out)
}
