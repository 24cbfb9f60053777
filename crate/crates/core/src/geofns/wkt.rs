use thiserror::Error;

use super::geometry::{Coord, Geometry, Polygon};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WktError {
    #[error("unsupported geometry kind {0}")]
    UnsupportedKind(String),
    #[error("ring {ring} is not closed")]
    UnclosedRing { ring: usize },
    #[error("arity error: {0}")]
    Arity(String),
    #[error("coordinate out of range: ({lon}, {lat})")]
    OutOfRange { lon: f64, lat: f64 },
    #[error("syntax error at byte {pos}: {message}")]
    Syntax { pos: usize, message: String },
}

/// Parses POINT, LINESTRING, POLYGON and MULTIPOLYGON WKT, optionally
/// preceded by a `<crs-iri>` as in GeoSPARQL literals. Coordinates are
/// longitude then latitude.
pub fn parse_wkt(text: &str) -> Result<Geometry, WktError> {
    let mut p = Parser { s: text, pos: 0 };
    p.ws();
    if p.peek() == Some('<') {
        match p.rest().find('>') {
            Some(end) => p.pos += end + 1,
            None => return Err(p.err("unterminated CRS IRI")),
        }
        p.ws();
    }
    let start = p.pos;
    while p.peek().is_some_and(|c| c.is_ascii_alphabetic()) {
        p.pos += 1;
    }
    let kind = text[start..p.pos].to_ascii_uppercase();
    p.ws();
    let geom = match kind.as_str() {
        "POINT" => {
            p.expect('(')?;
            let c = p.coord()?;
            p.expect(')')?;
            Geometry::Point(c)
        }
        "LINESTRING" => {
            let cs = p.coord_list()?;
            if cs.len() < 2 {
                return Err(WktError::Arity(format!(
                    "LINESTRING needs at least 2 points, got {}",
                    cs.len()
                )));
            }
            Geometry::LineString(cs)
        }
        "POLYGON" => Geometry::Polygon(p.polygon(&mut 0)?),
        "MULTIPOLYGON" => {
            p.expect('(')?;
            let mut polys = Vec::new();
            let mut ring_no = 0;
            loop {
                polys.push(p.polygon(&mut ring_no)?);
                p.ws();
                if !p.eat(',') {
                    break;
                }
            }
            p.expect(')')?;
            Geometry::MultiPolygon(polys)
        }
        "" => return Err(p.err("expected geometry kind")),
        other => return Err(WktError::UnsupportedKind(other.to_string())),
    };
    p.ws();
    if p.pos != text.len() {
        return Err(p.err("trailing content"));
    }
    for c in geom.coords() {
        if !(-180.0..=180.0).contains(&c.lon) || !(-90.0..=90.0).contains(&c.lat) {
            return Err(WktError::OutOfRange {
                lon: c.lon,
                lat: c.lat,
            });
        }
    }
    Ok(geom)
}

struct Parser<'a> {
    s: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn rest(&self) -> &'a str {
        &self.s[self.pos..]
    }

    fn peek(&self) -> Option<char> {
        self.rest().chars().next()
    }

    fn ws(&mut self) {
        while self.peek().is_some_and(char::is_whitespace) {
            self.pos += self.peek().map_or(1, char::len_utf8);
        }
    }

    fn eat(&mut self, c: char) -> bool {
        self.ws();
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<(), WktError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.err(&format!("expected '{c}'")))
        }
    }

    fn err(&self, message: &str) -> WktError {
        WktError::Syntax {
            pos: self.pos,
            message: message.to_string(),
        }
    }

    fn number(&mut self) -> Option<f64> {
        self.ws();
        let rest = self.rest();
        let end = rest
            .find(|c: char| !(c.is_ascii_digit() || matches!(c, '+' | '-' | '.' | 'e' | 'E')))
            .unwrap_or(rest.len());
        let v = rest[..end].parse::<f64>().ok()?;
        if !v.is_finite() {
            return None;
        }
        self.pos += end;
        Some(v)
    }

    fn coord(&mut self) -> Result<Coord, WktError> {
        let mut values = Vec::new();
        while let Some(v) = self.number() {
            values.push(v);
        }
        match values.as_slice() {
            [lon, lat] => Ok(Coord::new(*lon, *lat)),
            [] => Err(self.err("expected coordinate")),
            other => Err(WktError::Arity(format!(
                "coordinate with {} values, expected 2",
                other.len()
            ))),
        }
    }

    fn coord_list(&mut self) -> Result<Vec<Coord>, WktError> {
        self.expect('(')?;
        let mut out = vec![self.coord()?];
        while self.eat(',') {
            out.push(self.coord()?);
        }
        self.expect(')')?;
        Ok(out)
    }

    fn polygon(&mut self, ring_no: &mut usize) -> Result<Polygon, WktError> {
        self.expect('(')?;
        let mut rings = Vec::new();
        loop {
            let ring = self.coord_list()?;
            if ring.len() < 4 {
                return Err(WktError::Arity(format!(
                    "ring {} has {} vertices, expected at least 4",
                    *ring_no,
                    ring.len()
                )));
            }
            if ring.first() != ring.last() {
                return Err(WktError::UnclosedRing { ring: *ring_no });
            }
            *ring_no += 1;
            rings.push(ring);
            if !self.eat(',') {
                break;
            }
        }
        self.expect(')')?;
        Ok(Polygon { rings })
    }
}
