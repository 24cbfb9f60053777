use std::fmt;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::vocab;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid IRI {value:?}: {reason}")]
pub struct IriError {
    pub value: String,
    pub reason: &'static str,
}

/// An absolute IRI.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Iri(String);

impl Iri {
    pub fn new(value: impl Into<String>) -> Result<Self, IriError> {
        let value = value.into();
        let fail = |reason| {
            Err(IriError {
                value: value.clone(),
                reason,
            })
        };
        if value.is_empty() {
            return fail("empty");
        }
        if value
            .chars()
            .any(|c| c.is_whitespace() || matches!(c, '<' | '>' | '"' | '{' | '}' | '|' | '^' | '`' | '\\'))
        {
            return fail("contains whitespace or a forbidden character");
        }
        let scheme_end = match value.find(':') {
            Some(i) if i > 0 => i,
            _ => return fail("missing scheme"),
        };
        let scheme = &value[..scheme_end];
        if !scheme.starts_with(|c: char| c.is_ascii_alphabetic())
            || !scheme
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || matches!(c, '+' | '-' | '.'))
        {
            return fail("malformed scheme");
        }
        Ok(Iri(value))
    }

    /// For compile-time vocabulary constants that are known to be valid.
    pub(crate) fn from_static(value: &'static str) -> Self {
        debug_assert!(Iri::new(value).is_ok(), "{value}");
        Iri(value.to_string())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// Fragment or last path segment, handy for display.
    pub fn local_name(&self) -> &str {
        let s = self.0.as_str();
        let cut = s.rfind(['#', '/']).map(|i| i + 1).unwrap_or(0);
        &s[cut..]
    }
}

impl TryFrom<String> for Iri {
    type Error = IriError;
    fn try_from(value: String) -> Result<Self, Self::Error> {
        Iri::new(value)
    }
}

impl From<Iri> for String {
    fn from(iri: Iri) -> Self {
        iri.0
    }
}

impl fmt::Display for Iri {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{}>", self.0)
    }
}

/// An RDF literal. `datatype` is `None` for simple and language-tagged strings.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Literal {
    pub lexical: String,
    pub datatype: Option<Iri>,
    pub language: Option<String>,
}

impl Literal {
    pub fn simple(lexical: impl Into<String>) -> Self {
        Literal {
            lexical: lexical.into(),
            datatype: None,
            language: None,
        }
    }

    pub fn lang(lexical: impl Into<String>, language: impl Into<String>) -> Self {
        Literal {
            lexical: lexical.into(),
            datatype: None,
            language: Some(language.into().to_ascii_lowercase()),
        }
    }

    pub fn typed(lexical: impl Into<String>, datatype: Iri) -> Self {
        Literal {
            lexical: lexical.into(),
            datatype: Some(datatype),
            language: None,
        }
    }

    pub fn integer(value: i64) -> Self {
        Literal::typed(value.to_string(), Iri::from_static(vocab::XSD_INTEGER))
    }

    /// Numeric literal with the narrowest lexical form: integers stay
    /// `xsd:integer`, anything else becomes `xsd:decimal`.
    pub fn number(value: f64) -> Self {
        if value.fract() == 0.0 && value.abs() < 1e15 {
            Literal::integer(value as i64)
        } else {
            Literal::typed(format_decimal(value), Iri::from_static(vocab::XSD_DECIMAL))
        }
    }

    pub fn date_time(value: DateTime<Utc>) -> Self {
        Literal::typed(
            value.format("%Y-%m-%dT%H:%M:%SZ").to_string(),
            Iri::from_static(vocab::XSD_DATE_TIME),
        )
    }

    pub fn datatype_str(&self) -> Option<&str> {
        self.datatype.as_ref().map(Iri::as_str)
    }

    pub fn is_numeric(&self) -> bool {
        matches!(
            self.datatype_str(),
            Some(vocab::XSD_INTEGER | vocab::XSD_DECIMAL | vocab::XSD_DOUBLE | vocab::XSD_FLOAT)
        )
    }

    pub fn as_f64(&self) -> Option<f64> {
        if self.is_numeric() {
            self.lexical.trim().parse::<f64>().ok()
        } else {
            None
        }
    }

    pub fn as_date_time(&self) -> Option<DateTime<Utc>> {
        if self.datatype_str() != Some(vocab::XSD_DATE_TIME) {
            return None;
        }
        DateTime::parse_from_rfc3339(self.lexical.trim())
            .ok()
            .map(|d| d.with_timezone(&Utc))
    }

    pub fn is_wkt(&self) -> bool {
        self.datatype_str() == Some(vocab::GEO_WKT_LITERAL)
    }
}

fn format_decimal(value: f64) -> String {
    let s = format!("{value}");
    if s.contains('.') || s.contains('e') || s.contains("inf") || s.contains("NaN") {
        s
    } else {
        format!("{s}.0")
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "\"{}\"", escape_string(&self.lexical))?;
        if let Some(lang) = &self.language {
            write!(f, "@{lang}")
        } else if let Some(dt) = &self.datatype {
            write!(f, "^^{dt}")
        } else {
            Ok(())
        }
    }
}

pub(crate) fn escape_string(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c => out.push(c),
        }
    }
    out
}

/// Object position of a triple: an IRI or a literal. IRIs sort before literals.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Term {
    Iri(Iri),
    Literal(Literal),
}

impl Term {
    pub fn as_iri(&self) -> Option<&Iri> {
        match self {
            Term::Iri(i) => Some(i),
            Term::Literal(_) => None,
        }
    }

    pub fn as_literal(&self) -> Option<&Literal> {
        match self {
            Term::Literal(l) => Some(l),
            Term::Iri(_) => None,
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Iri(i) => i.fmt(f),
            Term::Literal(l) => l.fmt(f),
        }
    }
}

impl From<Iri> for Term {
    fn from(iri: Iri) -> Self {
        Term::Iri(iri)
    }
}

impl From<Literal> for Term {
    fn from(lit: Literal) -> Self {
        Term::Literal(lit)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn iri_validation() {
        assert!(Iri::new("http://example.org/a").is_ok());
        assert!(Iri::new("urn:x").is_ok());
        assert!(Iri::new("").is_err());
        assert!(Iri::new("http://example.org/a b").is_err());
        assert!(Iri::new("relative/path").is_err());
        assert!(Iri::new(":nothing").is_err());
    }

    #[test]
    fn literal_display() {
        let lit = Literal::typed("5", Iri::new(vocab::XSD_INTEGER).unwrap());
        assert_eq!(
            lit.to_string(),
            "\"5\"^^<http://www.w3.org/2001/XMLSchema#integer>"
        );
        assert_eq!(Literal::lang("Roma", "IT").to_string(), "\"Roma\"@it");
        assert_eq!(Literal::simple("a\"b").to_string(), "\"a\\\"b\"");
    }

    #[test]
    fn number_literals() {
        assert_eq!(Literal::number(2000.0).lexical, "2000");
        assert_eq!(Literal::number(2.5).lexical, "2.5");
        assert_eq!(Literal::number(2.5).as_f64(), Some(2.5));
    }

    #[test]
    fn local_names() {
        assert_eq!(Iri::new(vocab::EO_FEATURE).unwrap().local_name(), "Feature");
        assert_eq!(Iri::new("http://x.org/a/b").unwrap().local_name(), "b");
    }
}
