//! Line-oriented N-Triples subset: IRI subjects and predicates, IRI or literal
//! objects, `#` comments and blank lines. No blank nodes.

use std::fmt::Write as _;

use thiserror::Error;

use super::term::{Iri, Literal, Term};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Triple {
    pub subject: Iri,
    pub predicate: Iri,
    pub object: Term,
}

impl Triple {
    pub fn new(subject: Iri, predicate: Iri, object: impl Into<Term>) -> Self {
        Triple {
            subject,
            predicate,
            object: object.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct NtError {
    pub line: usize,
    pub message: String,
}

pub fn parse_document(text: &str) -> Result<Vec<Triple>, NtError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let triple = parse_line(line).map_err(|message| NtError {
            line: i + 1,
            message,
        })?;
        out.push(triple);
    }
    Ok(out)
}

pub fn parse_line(line: &str) -> Result<Triple, String> {
    let mut cur = Cursor { s: line, pos: 0, strict: true };
    cur.skip_ws();
    let subject = cur.iri()?;
    cur.skip_ws();
    let predicate = cur.iri()?;
    cur.skip_ws();
    let object = cur.object()?;
    cur.skip_ws();
    if !cur.eat('.') {
        return Err(format!("expected '.' at column {}", cur.pos + 1));
    }
    cur.skip_ws();
    if !cur.rest().is_empty() && !cur.rest().starts_with('#') {
        return Err(format!("trailing content at column {}", cur.pos + 1));
    }
    Ok(Triple {
        subject,
        predicate,
        object,
    })
}

/// Parses a single IRI or literal in N-Triples syntax, e.g. `"5"^^<...#integer>`.
pub fn parse_term(text: &str) -> Result<Term, String> {
    let mut cur = Cursor { s: text, pos: 0, strict: true };
    cur.skip_ws();
    let term = cur.object()?;
    cur.skip_ws();
    if !cur.rest().is_empty() {
        return Err(format!("trailing content at column {}", cur.pos + 1));
    }
    Ok(term)
}

/// Parses a double-quoted string with N-Triples escapes at the start of
/// `text`, plus an optional language tag or `^^<datatype>`. Returns the
/// literal and the number of bytes consumed.
pub(crate) fn parse_literal_prefix(text: &str) -> Result<(Literal, usize), String> {
    let mut cur = Cursor {
        s: text,
        pos: 0,
        strict: false,
    };
    if cur.peek() != Some('"') {
        return Err("expected '\"'".to_string());
    }
    let lit = cur.literal()?;
    Ok((lit, cur.pos))
}

pub fn write_triple(out: &mut String, triple: &Triple) {
    let _ = writeln!(
        out,
        "{} {} {} .",
        triple.subject, triple.predicate, triple.object
    );
}

pub fn write_document<'a>(triples: impl IntoIterator<Item = &'a Triple>) -> String {
    let mut out = String::new();
    for t in triples {
        write_triple(&mut out, t);
    }
    out
}

struct Cursor<'a> {
    s: &'a str,
    pos: usize,
    /// When false, a `^^` not followed by `<` is left for the caller.
    strict: bool,
}

impl<'a> Cursor<'a> {
    fn rest(&self) -> &'a str {
        &self.s[self.pos..]
    }

    fn peek(&self) -> Option<char> {
        self.rest().chars().next()
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.peek() {
            if c == ' ' || c == '\t' {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn iri(&mut self) -> Result<Iri, String> {
        let col = self.pos + 1;
        if !self.eat('<') {
            return Err(format!("expected IRI at column {col}"));
        }
        let rest = self.rest();
        let end = rest
            .find('>')
            .ok_or_else(|| format!("unterminated IRI at column {col}"))?;
        let value = &rest[..end];
        self.pos += end + 1;
        Iri::new(value).map_err(|e| format!("{e} at column {col}"))
    }

    fn object(&mut self) -> Result<Term, String> {
        match self.peek() {
            Some('<') => Ok(Term::Iri(self.iri()?)),
            Some('"') => Ok(Term::Literal(self.literal()?)),
            _ => Err(format!("expected IRI or literal at column {}", self.pos + 1)),
        }
    }

    fn literal(&mut self) -> Result<Literal, String> {
        let col = self.pos + 1;
        self.eat('"');
        let mut lexical = String::new();
        loop {
            let c = self
                .peek()
                .ok_or_else(|| format!("unterminated literal at column {col}"))?;
            self.pos += c.len_utf8();
            match c {
                '"' => break,
                '\\' => {
                    let e = self
                        .peek()
                        .ok_or_else(|| format!("dangling escape at column {}", self.pos))?;
                    self.pos += e.len_utf8();
                    match e {
                        'n' => lexical.push('\n'),
                        't' => lexical.push('\t'),
                        'r' => lexical.push('\r'),
                        '"' => lexical.push('"'),
                        '\\' => lexical.push('\\'),
                        'u' | 'U' => {
                            let len = if e == 'u' { 4 } else { 8 };
                            let hex = self
                                .rest()
                                .get(..len)
                                .ok_or_else(|| format!("short unicode escape at column {}", self.pos))?;
                            let code = u32::from_str_radix(hex, 16)
                                .ok()
                                .and_then(char::from_u32)
                                .ok_or_else(|| format!("bad unicode escape at column {}", self.pos))?;
                            lexical.push(code);
                            self.pos += len;
                        }
                        other => return Err(format!("unknown escape \\{other} at column {}", self.pos)),
                    }
                }
                c => lexical.push(c),
            }
        }
        if self.eat('@') {
            let rest = self.rest();
            let end = rest
                .find(|c: char| !(c.is_ascii_alphanumeric() || c == '-'))
                .unwrap_or(rest.len());
            if end == 0 {
                return Err(format!("empty language tag at column {}", self.pos + 1));
            }
            let lang = &rest[..end];
            self.pos += end;
            return Ok(Literal::lang(lexical, lang));
        }
        if self.rest().starts_with("^^") && (self.strict || self.rest().starts_with("^^<")) {
            self.pos += 2;
            let dt = self.iri()?;
            return Ok(Literal::typed(lexical, dt));
        }
        Ok(Literal::simple(lexical))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_the_three_object_forms() {
        let doc = r#"
# comment
<http://a.org/s> <http://a.org/p> <http://a.org/o> .
<http://a.org/s> <http://a.org/label> "Emilia-Romagna"@en .
<http://a.org/s> <http://a.org/n> "5"^^<http://www.w3.org/2001/XMLSchema#integer> .
<http://a.org/s> <http://a.org/q> "say \"hi\"é" .
"#;
        let triples = parse_document(doc).unwrap();
        assert_eq!(triples.len(), 4);
        assert_eq!(
            triples[1].object,
            Term::Literal(Literal::lang("Emilia-Romagna", "en"))
        );
        assert_eq!(triples[2].object.as_literal().unwrap().as_f64(), Some(5.0));
        assert_eq!(triples[3].object.as_literal().unwrap().lexical, "say \"hi\"é");
    }

    #[test]
    fn standalone_terms_round_trip() {
        for text in [
            "<http://a.org/x>",
            "\"Roma\"@it",
            "\"2.5\"^^<http://www.w3.org/2001/XMLSchema#decimal>",
            "\"tab\\there\"",
        ] {
            let term = parse_term(text).unwrap();
            assert_eq!(term.to_string(), text);
        }
        assert!(parse_term("<http://a.org/x> junk").is_err());
    }

    #[test]
    fn reports_line_numbers() {
        let doc = "<http://a.org/s> <http://a.org/p> <http://a.org/o> .\n\n<http://a.org/s> <http://a.org/p> oops .\n";
        let err = parse_document(doc).unwrap_err();
        assert_eq!(err.line, 3);
    }

    #[test]
    fn missing_dot_is_an_error() {
        assert!(parse_line("<http://a.org/s> <http://a.org/p> <http://a.org/o>").is_err());
    }

    #[test]
    fn write_then_parse_is_identity() {
        let doc = "<http://a.org/s> <http://a.org/p> \"x\\ny\"@en .\n";
        let triples = parse_document(doc).unwrap();
        assert_eq!(write_document(&triples), doc);
    }
}
