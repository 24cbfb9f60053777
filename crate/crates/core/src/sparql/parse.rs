use std::collections::BTreeMap;

use thiserror::Error;

use super::ast::{
    AstError, CompareOp, Expr, GeoFunction, OrderKey, Pattern, PredicatePath, Projection, Query,
    QueryForm, TermPattern, TriplePattern, Variable,
};
use crate::kgstore::{parse_literal_prefix, vocab, Iri, Literal};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at byte {position}: {message}")]
    Syntax { position: usize, message: String },
    #[error("unsupported feature {feature} at byte {position}")]
    Unsupported { feature: String, position: usize },
    #[error("invalid query: {0}")]
    Invalid(#[from] AstError),
}

const UNSUPPORTED: &[&str] = &[
    "OPTIONAL", "UNION", "MINUS", "BIND", "VALUES", "SERVICE", "GRAPH", "CONSTRUCT", "DESCRIBE",
    "HAVING", "OFFSET", "FROM", "NAMED", "EXISTS", "NOT", "SUM", "AVG", "MIN", "MAX", "SAMPLE",
    "GROUP_CONCAT", "REGEX", "STR", "LANG", "BOUND", "IF", "COALESCE", "BASE", "INSERT", "DELETE",
];

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Word(String),
    Var(String),
    Iri(String),
    Prefixed(String, String),
    Lit(Literal),
    Number(String),
    Punct(&'static str),
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    pos: usize,
}

fn syntax(position: usize, message: impl Into<String>) -> ParseError {
    ParseError::Syntax {
        position,
        message: message.into(),
    }
}

fn is_name_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '-'
}

fn tokenize(text: &str) -> Result<Vec<Token>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < text.len() {
        let c = text[i..].chars().next().expect("in bounds");
        if c.is_whitespace() {
            i += c.len_utf8();
            continue;
        }
        if c == '#' {
            i = text[i..].find('\n').map_or(text.len(), |n| i + n);
            continue;
        }
        let start = i;
        let tok = match c {
            '?' | '$' => {
                let name: String = text[i + 1..].chars().take_while(|&c| is_name_char(c)).collect();
                if name.is_empty() {
                    return Err(syntax(start, "empty variable name"));
                }
                i += 1 + name.len();
                Tok::Var(name)
            }
            '<' => {
                // An IRI runs to '>' without whitespace; otherwise this is a comparison.
                let rest = &text[i + 1..];
                let end = rest.find(|c: char| c == '>' || c.is_whitespace() || c == '<' || c == '"');
                match end {
                    Some(n) if rest[n..].starts_with('>') && n > 0 && !rest[..n].starts_with('=') => {
                        i += n + 2;
                        Tok::Iri(rest[..n].to_string())
                    }
                    _ if rest.starts_with('=') => {
                        i += 2;
                        Tok::Punct("<=")
                    }
                    _ => {
                        i += 1;
                        Tok::Punct("<")
                    }
                }
            }
            '>' => {
                if bytes.get(i + 1) == Some(&b'=') {
                    i += 2;
                    Tok::Punct(">=")
                } else {
                    i += 1;
                    Tok::Punct(">")
                }
            }
            '"' => {
                let (lit, used) = parse_literal_prefix(&text[i..]).map_err(|m| syntax(start, m))?;
                i += used;
                if text[i..].starts_with("^^") && !text[i..].starts_with("^^<") {
                    let dt_start = i + 2;
                    let (prefix, local, used) = prefixed_name(&text[dt_start..])
                        .ok_or_else(|| syntax(dt_start, "expected datatype"))?;
                    let iri = vocab::expand(&prefix, &local)
                        .ok_or_else(|| syntax(dt_start, format!("unknown prefix {prefix}:")))?;
                    let iri = Iri::new(iri).map_err(|e| syntax(dt_start, e.to_string()))?;
                    i = dt_start + used;
                    Tok::Lit(Literal::typed(lit.lexical, iri))
                } else {
                    Tok::Lit(lit)
                }
            }
            '{' | '}' | '(' | ')' | '.' | ';' | ',' | '/' | '*' | '=' => {
                i += 1;
                Tok::Punct(match c {
                    '{' => "{",
                    '}' => "}",
                    '(' => "(",
                    ')' => ")",
                    '.' => ".",
                    ';' => ";",
                    ',' => ",",
                    '/' => "/",
                    '*' => "*",
                    _ => "=",
                })
            }
            c if c.is_ascii_digit() || ((c == '-' || c == '+') && next_is_digit(text, i + 1)) => {
                let n = number_len(&text[i..]);
                let s = text[i..i + n].to_string();
                i += n;
                Tok::Number(s)
            }
            c if c.is_alphabetic() || c == '_' => match prefixed_name(&text[i..]) {
                Some((prefix, local, used)) => {
                    i += used;
                    Tok::Prefixed(prefix, local)
                }
                None => {
                    let word: String = text[i..].chars().take_while(|&c| is_name_char(c)).collect();
                    i += word.len();
                    Tok::Word(word)
                }
            },
            ':' => {
                let (prefix, local, used) =
                    prefixed_name(&text[i..]).ok_or_else(|| syntax(start, "bad prefixed name"))?;
                i += used;
                Tok::Prefixed(prefix, local)
            }
            other => return Err(syntax(start, format!("unexpected character '{other}'"))),
        };
        out.push(Token { tok, pos: start });
    }
    Ok(out)
}

fn next_is_digit(text: &str, at: usize) -> bool {
    text.as_bytes().get(at).is_some_and(u8::is_ascii_digit)
}

fn number_len(s: &str) -> usize {
    let b = s.as_bytes();
    let mut i = 0;
    if matches!(b.first(), Some(b'-' | b'+')) {
        i += 1;
    }
    while b.get(i).is_some_and(u8::is_ascii_digit) {
        i += 1;
    }
    if b.get(i) == Some(&b'.') && b.get(i + 1).is_some_and(u8::is_ascii_digit) {
        i += 1;
        while b.get(i).is_some_and(u8::is_ascii_digit) {
            i += 1;
        }
    }
    if matches!(b.get(i), Some(b'e' | b'E')) {
        let mut j = i + 1;
        if matches!(b.get(j), Some(b'-' | b'+')) {
            j += 1;
        }
        if b.get(j).is_some_and(u8::is_ascii_digit) {
            while b.get(j).is_some_and(u8::is_ascii_digit) {
                j += 1;
            }
            i = j;
        }
    }
    i
}

/// `prefix:local` at the start of `s`; the prefix may be empty.
fn prefixed_name(s: &str) -> Option<(String, String, usize)> {
    let prefix: String = s.chars().take_while(|&c| is_name_char(c)).collect();
    let rest = &s[prefix.len()..];
    let rest = rest.strip_prefix(':')?;
    let mut local: String = rest
        .chars()
        .take_while(|&c| is_name_char(c) || c == '.')
        .collect();
    while local.ends_with('.') {
        local.pop();
    }
    Some((prefix.clone(), local.clone(), prefix.len() + 1 + local.len()))
}

struct Parser {
    toks: Vec<Token>,
    at: usize,
    end: usize,
    prefixes: BTreeMap<String, String>,
}

/// Parses the supported SELECT/ASK subset and validates the result.
pub fn parse(text: &str) -> Result<Query, ParseError> {
    let toks = tokenize(text)?;
    let mut p = Parser {
        toks,
        at: 0,
        end: text.len(),
        prefixes: vocab::PREDECLARED_PREFIXES
            .iter()
            .map(|(p, ns)| (p.to_string(), ns.to_string()))
            .collect(),
    };
    let q = p.query()?;
    if let Some(t) = p.toks.get(p.at) {
        return Err(syntax(t.pos, "trailing tokens after query"));
    }
    q.validate()?;
    Ok(q)
}

impl Parser {
    fn pos(&self) -> usize {
        self.toks.get(self.at).map_or(self.end, |t| t.pos)
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|t| &t.tok)
    }

    fn next(&mut self) -> Result<Tok, ParseError> {
        let t = self
            .toks
            .get(self.at)
            .ok_or_else(|| syntax(self.end, "unexpected end of query"))?;
        self.at += 1;
        Ok(t.tok.clone())
    }

    fn is_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Some(Tok::Word(w)) if w.eq_ignore_ascii_case(kw))
    }

    fn eat_keyword(&mut self, kw: &str) -> bool {
        if self.is_keyword(kw) {
            self.at += 1;
            true
        } else {
            false
        }
    }

    fn expect_keyword(&mut self, kw: &str) -> Result<(), ParseError> {
        self.check_unsupported()?;
        if self.eat_keyword(kw) {
            Ok(())
        } else {
            Err(syntax(self.pos(), format!("expected {kw}")))
        }
    }

    fn is_punct(&self, p: &str) -> bool {
        matches!(self.peek(), Some(Tok::Punct(q)) if *q == p)
    }

    fn eat_punct(&mut self, p: &str) -> bool {
        if self.is_punct(p) {
            self.at += 1;
            true
        } else {
            false
        }
    }

    fn expect_punct(&mut self, p: &str) -> Result<(), ParseError> {
        self.check_unsupported()?;
        if self.eat_punct(p) {
            Ok(())
        } else {
            Err(syntax(self.pos(), format!("expected '{p}'")))
        }
    }

    fn check_unsupported(&self) -> Result<(), ParseError> {
        if let Some(Tok::Word(w)) = self.peek() {
            let upper = w.to_ascii_uppercase();
            if UNSUPPORTED.contains(&upper.as_str()) {
                return Err(ParseError::Unsupported {
                    feature: upper,
                    position: self.pos(),
                });
            }
        }
        Ok(())
    }

    fn query(&mut self) -> Result<Query, ParseError> {
        while self.eat_keyword("PREFIX") {
            let pos = self.pos();
            let prefix = match self.next()? {
                Tok::Prefixed(p, l) if l.is_empty() => p,
                _ => return Err(syntax(pos, "expected prefix name")),
            };
            let pos = self.pos();
            let ns = match self.next()? {
                Tok::Iri(i) => i,
                _ => return Err(syntax(pos, "expected namespace IRI")),
            };
            self.prefixes.insert(prefix, ns);
        }
        self.check_unsupported()?;
        let form = if self.eat_keyword("SELECT") {
            QueryForm::Select
        } else if self.eat_keyword("ASK") {
            QueryForm::Ask
        } else {
            return Err(syntax(self.pos(), "expected SELECT or ASK"));
        };
        let mut q = Query {
            form,
            distinct: false,
            projection: Vec::new(),
            where_clause: Vec::new(),
            group_by: Vec::new(),
            order_by: Vec::new(),
            limit: None,
        };
        if form == QueryForm::Select {
            q.distinct = self.eat_keyword("DISTINCT");
            if self.is_keyword("REDUCED") {
                return Err(ParseError::Unsupported {
                    feature: "REDUCED".into(),
                    position: self.pos(),
                });
            }
            if self.is_punct("*") {
                return Err(ParseError::Unsupported {
                    feature: "SELECT *".into(),
                    position: self.pos(),
                });
            }
            loop {
                match self.peek() {
                    Some(Tok::Var(_)) => {
                        if let Tok::Var(v) = self.next()? {
                            q.projection.push(Projection::Var(Variable::new(v)));
                        }
                    }
                    Some(Tok::Punct("(")) => q.projection.push(self.aggregate()?),
                    _ => break,
                }
            }
            if q.projection.is_empty() {
                self.check_unsupported()?;
                return Err(syntax(self.pos(), "expected projection"));
            }
        }
        self.eat_keyword("WHERE");
        self.expect_punct("{")?;
        q.where_clause = self.group()?;
        if self.eat_keyword("GROUP") {
            self.expect_keyword("BY")?;
            while let Some(Tok::Var(_)) = self.peek() {
                if let Tok::Var(v) = self.next()? {
                    q.group_by.push(Variable::new(v));
                }
            }
            if q.group_by.is_empty() {
                return Err(syntax(self.pos(), "expected GROUP BY variable"));
            }
        }
        if self.eat_keyword("ORDER") {
            self.expect_keyword("BY")?;
            loop {
                let ascending = if self.eat_keyword("ASC") {
                    true
                } else if self.eat_keyword("DESC") {
                    false
                } else if let Some(Tok::Var(_)) = self.peek() {
                    let e = self.primary()?;
                    q.order_by.push(OrderKey {
                        expr: e,
                        ascending: true,
                    });
                    continue;
                } else {
                    break;
                };
                self.expect_punct("(")?;
                let e = self.expression()?;
                self.expect_punct(")")?;
                q.order_by.push(OrderKey { expr: e, ascending });
            }
            if q.order_by.is_empty() {
                return Err(syntax(self.pos(), "expected ORDER BY key"));
            }
        }
        self.check_unsupported()?;
        if self.eat_keyword("LIMIT") {
            let pos = self.pos();
            match self.next()? {
                Tok::Number(n) => {
                    q.limit = Some(n.parse().map_err(|_| syntax(pos, "LIMIT needs a non-negative integer"))?)
                }
                _ => return Err(syntax(pos, "LIMIT needs a non-negative integer")),
            }
        }
        self.check_unsupported()?;
        Ok(q)
    }

    fn aggregate(&mut self) -> Result<Projection, ParseError> {
        self.expect_punct("(")?;
        self.expect_keyword("COUNT")?;
        self.expect_punct("(")?;
        let distinct = self.eat_keyword("DISTINCT");
        let pos = self.pos();
        let var = match self.next()? {
            Tok::Var(v) => Variable::new(v),
            Tok::Punct("*") => {
                return Err(ParseError::Unsupported {
                    feature: "COUNT(*)".into(),
                    position: pos,
                })
            }
            _ => return Err(syntax(pos, "expected variable in COUNT")),
        };
        self.expect_punct(")")?;
        self.expect_keyword("AS")?;
        let pos = self.pos();
        let alias = match self.next()? {
            Tok::Var(v) => Variable::new(v),
            _ => return Err(syntax(pos, "expected alias variable")),
        };
        self.expect_punct(")")?;
        Ok(Projection::Count {
            var,
            distinct,
            alias,
        })
    }

    fn group(&mut self) -> Result<Vec<Pattern>, ParseError> {
        let mut out = Vec::new();
        loop {
            self.check_unsupported()?;
            if self.eat_punct("}") {
                return Ok(out);
            }
            if self.is_punct("{") {
                return Err(ParseError::Unsupported {
                    feature: "nested group".into(),
                    position: self.pos(),
                });
            }
            if self.eat_keyword("FILTER") {
                self.expect_punct("(")?;
                let e = self.expression()?;
                self.expect_punct(")")?;
                out.push(Pattern::Filter(e));
                self.eat_punct(".");
                continue;
            }
            let subject = self.term()?;
            loop {
                let path = self.path()?;
                loop {
                    let object = self.term()?;
                    out.push(Pattern::Triple(TriplePattern {
                        subject: subject.clone(),
                        path: path.clone(),
                        object,
                    }));
                    if !self.eat_punct(",") {
                        break;
                    }
                }
                if !self.eat_punct(";") {
                    break;
                }
                if self.is_punct(".") || self.is_punct("}") {
                    break;
                }
            }
            if !self.eat_punct(".") && !self.is_punct("}") {
                self.check_unsupported()?;
                return Err(syntax(self.pos(), "expected '.' or '}'"));
            }
        }
    }

    fn path(&mut self) -> Result<PredicatePath, ParseError> {
        let mut steps = vec![self.predicate_iri()?];
        while self.eat_punct("/") {
            steps.push(self.predicate_iri()?);
        }
        if steps.len() > 2 {
            return Err(ParseError::Unsupported {
                feature: "path longer than two steps".into(),
                position: self.pos(),
            });
        }
        Ok(PredicatePath(steps))
    }

    fn predicate_iri(&mut self) -> Result<Iri, ParseError> {
        let pos = self.pos();
        if self.eat_keyword("a") {
            return Ok(Iri::from_static(vocab::RDF_TYPE));
        }
        match self.next()? {
            Tok::Var(_) => Err(ParseError::Unsupported {
                feature: "variable predicate".into(),
                position: pos,
            }),
            Tok::Punct(p @ ("*" | "(")) => Err(ParseError::Unsupported {
                feature: format!("path operator {p}"),
                position: pos,
            }),
            t => self.iri_of(t, pos),
        }
    }

    fn iri_of(&self, t: Tok, pos: usize) -> Result<Iri, ParseError> {
        let full = match t {
            Tok::Iri(i) => i,
            Tok::Prefixed(p, l) => {
                let ns = self
                    .prefixes
                    .get(&p)
                    .ok_or_else(|| syntax(pos, format!("undeclared prefix {p}:")))?;
                format!("{ns}{l}")
            }
            _ => return Err(syntax(pos, "expected IRI")),
        };
        Iri::new(full).map_err(|e| syntax(pos, e.to_string()))
    }

    fn term(&mut self) -> Result<TermPattern, ParseError> {
        self.check_unsupported()?;
        let pos = self.pos();
        match self.next()? {
            Tok::Var(v) => Ok(TermPattern::Var(Variable::new(v))),
            Tok::Lit(l) => Ok(TermPattern::Literal(l)),
            Tok::Number(n) => Ok(TermPattern::Literal(number_literal(&n))),
            Tok::Word(w) if w == "true" || w == "false" => Ok(TermPattern::Literal(Literal::typed(
                w,
                Iri::from_static(vocab::XSD_BOOLEAN),
            ))),
            t @ (Tok::Iri(_) | Tok::Prefixed(..)) => Ok(TermPattern::Iri(self.iri_of(t, pos)?)),
            _ => Err(syntax(pos, "expected term")),
        }
    }

    fn expression(&mut self) -> Result<Expr, ParseError> {
        let lhs = self.primary()?;
        let op = match self.peek() {
            Some(Tok::Punct(p)) => CompareOp::from_symbol(p),
            _ => None,
        };
        match op {
            Some(op) => {
                self.at += 1;
                let rhs = self.primary()?;
                Ok(Expr::compare(op, lhs, rhs))
            }
            None => Ok(lhs),
        }
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        self.check_unsupported()?;
        let pos = self.pos();
        let is_call = matches!(self.peek(), Some(Tok::Iri(_) | Tok::Prefixed(..)))
            && matches!(self.toks.get(self.at + 1).map(|t| &t.tok), Some(Tok::Punct("(")));
        if is_call {
            let t = self.next()?;
            let iri = self.iri_of(t, pos)?;
            let function = GeoFunction::from_iri(iri.as_str()).ok_or_else(|| ParseError::Unsupported {
                feature: format!("function {iri}"),
                position: pos,
            })?;
            self.expect_punct("(")?;
            let mut args = vec![self.expression()?];
            while self.eat_punct(",") {
                args.push(self.expression()?);
            }
            self.expect_punct(")")?;
            if args.len() != function.arity() {
                return Err(syntax(pos, format!("{} expects {} arguments", iri, function.arity())));
            }
            return Ok(Expr::Call { function, args });
        }
        if self.eat_punct("(") {
            let e = self.expression()?;
            self.expect_punct(")")?;
            return Ok(e);
        }
        Ok(Expr::Term(self.term()?))
    }
}

fn number_literal(text: &str) -> Literal {
    let dt = if text.contains(['e', 'E']) {
        vocab::XSD_DOUBLE
    } else if text.contains('.') {
        vocab::XSD_DECIMAL
    } else {
        vocab::XSD_INTEGER
    };
    Literal::typed(text, Iri::from_static(dt))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_text_is_a_syntax_error() {
        assert!(matches!(parse(""), Err(ParseError::Syntax { position: 0, .. })));
    }

    #[test]
    fn optional_is_unsupported() {
        let err = parse("SELECT ?x WHERE { ?x a ?y . OPTIONAL { ?x ?p ?o } }").unwrap_err();
        assert!(matches!(err, ParseError::Unsupported { ref feature, .. } if feature == "OPTIONAL"), "{err}");
    }

    #[test]
    fn less_than_versus_iri() {
        let q = parse("SELECT ?c WHERE { ?i <http://x.org/cc> ?c . FILTER (?c <10) }").unwrap();
        assert_eq!(q.where_clause.len(), 2);
        let q = parse("SELECT ?c WHERE { ?i <http://x.org/cc> ?c . FILTER (?c <= 10) }").unwrap();
        match &q.where_clause[1] {
            Pattern::Filter(Expr::Compare { op, .. }) => assert_eq!(*op, CompareOp::Le),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn declared_prefixes_expand() {
        let q = parse("PREFIX eo: <http://example.org/eoqa/ontology#>\nSELECT ?r WHERE { ?r a eo:River }")
            .unwrap();
        match &q.where_clause[0] {
            Pattern::Triple(t) => assert_eq!(
                t.object,
                TermPattern::Iri(Iri::new("http://example.org/eoqa/ontology#River").unwrap())
            ),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_prefix_reports_position() {
        let err = parse("SELECT ?r WHERE { ?r a zz:River }").unwrap_err();
        assert!(matches!(err, ParseError::Syntax { position: 23, .. }), "{err:?}");
    }

    #[test]
    fn typed_literals_and_numbers() {
        let q = parse(
            "SELECT ?i WHERE { ?i <http://x.org/t> ?t . FILTER (?t >= \"2020-01-01T00:00:00Z\"^^xsd:dateTime) }",
        )
        .unwrap();
        let Pattern::Filter(Expr::Compare { rhs, .. }) = &q.where_clause[1] else {
            panic!()
        };
        let Expr::Term(TermPattern::Literal(l)) = rhs.as_ref() else {
            panic!()
        };
        assert_eq!(l.datatype_str(), Some(vocab::XSD_DATE_TIME));
        assert_eq!(number_literal("1.5").datatype_str(), Some(vocab::XSD_DECIMAL));
        assert_eq!(number_literal("-3").datatype_str(), Some(vocab::XSD_INTEGER));
        assert_eq!(number_literal("2e3").datatype_str(), Some(vocab::XSD_DOUBLE));
    }

    #[test]
    fn validation_errors_surface() {
        assert!(matches!(
            parse("SELECT ?z WHERE { ?x a ?y }"),
            Err(ParseError::Invalid(AstError::UnboundProjection(_)))
        ));
        assert!(matches!(
            parse("SELECT ?x WHERE { ?x a ?y . FILTER (?q < 3) }"),
            Err(ParseError::Invalid(AstError::UnboundFilterVariable(_)))
        ));
    }
}
