use std::fmt;

/// A longitude/latitude pair in degrees.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coord {
    pub lon: f64,
    pub lat: f64,
}

impl Coord {
    pub const fn new(lon: f64, lat: f64) -> Self {
        Coord { lon, lat }
    }
}

/// Closed rings; the first is the exterior, the rest are holes.
#[derive(Debug, Clone, PartialEq)]
pub struct Polygon {
    pub rings: Vec<Vec<Coord>>,
}

impl Polygon {
    pub fn exterior(&self) -> &[Coord] {
        &self.rings[0]
    }

    pub fn edges(&self) -> impl Iterator<Item = (Coord, Coord)> + '_ {
        self.rings
            .iter()
            .flat_map(|r| r.windows(2).map(|w| (w[0], w[1])))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Geometry {
    Point(Coord),
    LineString(Vec<Coord>),
    Polygon(Polygon),
    MultiPolygon(Vec<Polygon>),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BBox {
    pub min: Coord,
    pub max: Coord,
}

impl BBox {
    pub fn intersects(&self, other: &BBox) -> bool {
        self.min.lon <= other.max.lon
            && other.min.lon <= self.max.lon
            && self.min.lat <= other.max.lat
            && other.min.lat <= self.max.lat
    }

    pub fn contains(&self, other: &BBox) -> bool {
        self.min.lon <= other.min.lon
            && self.min.lat <= other.min.lat
            && other.max.lon <= self.max.lon
            && other.max.lat <= self.max.lat
    }
}

impl Geometry {
    pub fn kind(&self) -> &'static str {
        match self {
            Geometry::Point(_) => "POINT",
            Geometry::LineString(_) => "LINESTRING",
            Geometry::Polygon(_) => "POLYGON",
            Geometry::MultiPolygon(_) => "MULTIPOLYGON",
        }
    }

    pub fn coords(&self) -> Box<dyn Iterator<Item = Coord> + '_> {
        match self {
            Geometry::Point(c) => Box::new(std::iter::once(*c)),
            Geometry::LineString(cs) => Box::new(cs.iter().copied()),
            Geometry::Polygon(p) => Box::new(p.rings.iter().flatten().copied()),
            Geometry::MultiPolygon(ps) => {
                Box::new(ps.iter().flat_map(|p| p.rings.iter().flatten().copied()))
            }
        }
    }

    /// All segments: linestring pieces or ring edges.
    pub fn segments(&self) -> Vec<(Coord, Coord)> {
        match self {
            Geometry::Point(_) => Vec::new(),
            Geometry::LineString(cs) => cs.windows(2).map(|w| (w[0], w[1])).collect(),
            Geometry::Polygon(p) => p.edges().collect(),
            Geometry::MultiPolygon(ps) => ps.iter().flat_map(|p| p.edges()).collect(),
        }
    }

    pub fn bbox(&self) -> BBox {
        let mut it = self.coords();
        let first = it.next().expect("geometries are never empty");
        let mut b = BBox {
            min: first,
            max: first,
        };
        for c in it {
            b.min.lon = b.min.lon.min(c.lon);
            b.min.lat = b.min.lat.min(c.lat);
            b.max.lon = b.max.lon.max(c.lon);
            b.max.lat = b.max.lat.max(c.lat);
        }
        b
    }
}

fn write_coords(f: &mut fmt::Formatter<'_>, cs: &[Coord]) -> fmt::Result {
    for (i, c) in cs.iter().enumerate() {
        if i > 0 {
            f.write_str(", ")?;
        }
        write!(f, "{} {}", c.lon, c.lat)?;
    }
    Ok(())
}

fn write_polygon(f: &mut fmt::Formatter<'_>, p: &Polygon) -> fmt::Result {
    f.write_str("(")?;
    for (i, r) in p.rings.iter().enumerate() {
        if i > 0 {
            f.write_str(", ")?;
        }
        f.write_str("(")?;
        write_coords(f, r)?;
        f.write_str(")")?;
    }
    f.write_str(")")
}

impl fmt::Display for Geometry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Geometry::Point(c) => write!(f, "POINT({} {})", c.lon, c.lat),
            Geometry::LineString(cs) => {
                f.write_str("LINESTRING(")?;
                write_coords(f, cs)?;
                f.write_str(")")
            }
            Geometry::Polygon(p) => {
                f.write_str("POLYGON")?;
                write_polygon(f, p)
            }
            Geometry::MultiPolygon(ps) => {
                f.write_str("MULTIPOLYGON(")?;
                for (i, p) in ps.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write_polygon(f, p)?;
                }
                f.write_str(")")
            }
        }
    }
}
