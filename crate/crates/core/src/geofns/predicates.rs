//! Simple-features predicates on planar lon/lat coordinates.
//!
//! Point-in-polygon is even-odd ray casting with an explicit boundary test.
//! An areal or linear geometry is within an areal one when none of its
//! vertices or edge midpoints lie outside it and no pair of edges crosses
//! properly. Shapes that touch themselves are not handled specially.

use super::geometry::{Coord, Geometry, Polygon};

const EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Location {
    Interior,
    Boundary,
    Exterior,
}

fn orient(a: Coord, b: Coord, c: Coord) -> f64 {
    (b.lon - a.lon) * (c.lat - a.lat) - (b.lat - a.lat) * (c.lon - a.lon)
}

fn sign(v: f64) -> i8 {
    if v > EPS {
        1
    } else if v < -EPS {
        -1
    } else {
        0
    }
}

fn in_box(p: Coord, a: Coord, b: Coord) -> bool {
    p.lon >= a.lon.min(b.lon) - EPS
        && p.lon <= a.lon.max(b.lon) + EPS
        && p.lat >= a.lat.min(b.lat) - EPS
        && p.lat <= a.lat.max(b.lat) + EPS
}

pub fn on_segment(p: Coord, a: Coord, b: Coord) -> bool {
    sign(orient(a, b, p)) == 0 && in_box(p, a, b)
}

/// Closed-segment intersection, touching included.
pub fn segments_intersect(a1: Coord, a2: Coord, b1: Coord, b2: Coord) -> bool {
    let o1 = sign(orient(a1, a2, b1));
    let o2 = sign(orient(a1, a2, b2));
    let o3 = sign(orient(b1, b2, a1));
    let o4 = sign(orient(b1, b2, a2));
    if o1 != o2 && o3 != o4 {
        return true;
    }
    (o1 == 0 && in_box(b1, a1, a2))
        || (o2 == 0 && in_box(b2, a1, a2))
        || (o3 == 0 && in_box(a1, b1, b2))
        || (o4 == 0 && in_box(a2, b1, b2))
}

/// Segments whose interiors cross at a single point.
pub fn segments_cross_properly(a1: Coord, a2: Coord, b1: Coord, b2: Coord) -> bool {
    let o1 = sign(orient(a1, a2, b1));
    let o2 = sign(orient(a1, a2, b2));
    let o3 = sign(orient(b1, b2, a1));
    let o4 = sign(orient(b1, b2, a2));
    o1 * o2 < 0 && o3 * o4 < 0
}

pub fn locate_in_polygon(p: Coord, poly: &Polygon) -> Location {
    if poly.edges().any(|(a, b)| on_segment(p, a, b)) {
        return Location::Boundary;
    }
    let mut inside = false;
    for (a, b) in poly.edges() {
        if (a.lat > p.lat) != (b.lat > p.lat) {
            let x = a.lon + (p.lat - a.lat) / (b.lat - a.lat) * (b.lon - a.lon);
            if p.lon < x {
                inside = !inside;
            }
        }
    }
    if inside {
        Location::Interior
    } else {
        Location::Exterior
    }
}

/// Location of a point relative to an areal geometry. Panics on other kinds.
fn locate_areal(p: Coord, g: &Geometry) -> Location {
    let parts: &[Polygon] = match g {
        Geometry::Polygon(poly) => std::slice::from_ref(poly),
        Geometry::MultiPolygon(ps) => ps,
        _ => unreachable!("locate_areal on non-areal geometry"),
    };
    let mut boundary = false;
    for part in parts {
        match locate_in_polygon(p, part) {
            Location::Interior => return Location::Interior,
            Location::Boundary => boundary = true,
            Location::Exterior => {}
        }
    }
    if boundary {
        Location::Boundary
    } else {
        Location::Exterior
    }
}

fn on_line(p: Coord, line: &[Coord]) -> bool {
    line.windows(2).any(|w| on_segment(p, w[0], w[1]))
}

fn dimension(g: &Geometry) -> u8 {
    match g {
        Geometry::Point(_) => 0,
        Geometry::LineString(_) => 1,
        Geometry::Polygon(_) | Geometry::MultiPolygon(_) => 2,
    }
}

fn midpoint(a: Coord, b: Coord) -> Coord {
    Coord::new((a.lon + b.lon) / 2.0, (a.lat + b.lat) / 2.0)
}

fn probe_points(line: &[Coord]) -> Vec<Coord> {
    let mut pts: Vec<Coord> = line.to_vec();
    pts.extend(line.windows(2).map(|w| midpoint(w[0], w[1])));
    pts
}

fn any_proper_crossing(a: &[(Coord, Coord)], b: &[(Coord, Coord)]) -> bool {
    a.iter().any(|&(a1, a2)| {
        b.iter()
            .any(|&(b1, b2)| segments_cross_properly(a1, a2, b1, b2))
    })
}

fn polygon_within_areal(pa: &Polygon, b: &Geometry) -> bool {
    let probes = probe_points(pa.exterior());
    if probes
        .iter()
        .any(|p| locate_areal(*p, b) == Location::Exterior)
    {
        return false;
    }
    let pa_edges: Vec<_> = pa.exterior().windows(2).map(|w| (w[0], w[1])).collect();
    if any_proper_crossing(&pa_edges, &b.segments()) {
        return false;
    }
    // A hole of `b` sitting inside `pa` means `pa` is not covered.
    let holes_inside = |poly: &Polygon| {
        poly.rings[1..]
            .iter()
            .flatten()
            .any(|c| locate_in_polygon(*c, pa) == Location::Interior)
    };
    match b {
        Geometry::Polygon(pb) => !holes_inside(pb),
        Geometry::MultiPolygon(ps) => !ps.iter().any(holes_inside),
        _ => false,
    }
}

/// `a` lies inside `b` and their interiors meet. Reflexive.
pub fn sf_within(a: &Geometry, b: &Geometry) -> bool {
    if dimension(a) > dimension(b) {
        return false;
    }
    if !b.bbox().contains(&a.bbox()) {
        return false;
    }
    match (a, b) {
        (Geometry::Point(p), Geometry::Point(q)) => p == q,
        (Geometry::Point(p), Geometry::LineString(l)) => on_line(*p, l),
        (Geometry::Point(p), areal) => locate_areal(*p, areal) == Location::Interior,
        (Geometry::LineString(l), Geometry::LineString(m)) => {
            probe_points(l).iter().all(|p| on_line(*p, m))
        }
        (Geometry::LineString(l), areal) => {
            let probes = probe_points(l);
            let locs: Vec<Location> = probes.iter().map(|p| locate_areal(*p, areal)).collect();
            if locs.contains(&Location::Exterior) || !locs.contains(&Location::Interior) {
                return false;
            }
            let segs: Vec<_> = l.windows(2).map(|w| (w[0], w[1])).collect();
            !any_proper_crossing(&segs, &areal.segments())
        }
        (Geometry::Polygon(pa), areal) => polygon_within_areal(pa, areal),
        (Geometry::MultiPolygon(ps), areal) => ps.iter().all(|pa| polygon_within_areal(pa, areal)),
    }
}

pub fn sf_contains(a: &Geometry, b: &Geometry) -> bool {
    sf_within(b, a)
}

/// The two geometries share at least one point. Symmetric.
pub fn sf_intersects(a: &Geometry, b: &Geometry) -> bool {
    if !a.bbox().intersects(&b.bbox()) {
        return false;
    }
    let (lo, hi) = if dimension(a) <= dimension(b) { (a, b) } else { (b, a) };
    match (lo, hi) {
        (Geometry::Point(p), Geometry::Point(q)) => p == q,
        (Geometry::Point(p), Geometry::LineString(l)) => on_line(*p, l),
        (Geometry::Point(p), areal) => locate_areal(*p, areal) != Location::Exterior,
        (Geometry::LineString(l), Geometry::LineString(m)) => l.windows(2).any(|s| {
            m.windows(2)
                .any(|t| segments_intersect(s[0], s[1], t[0], t[1]))
        }),
        (Geometry::LineString(l), areal) => {
            l.iter().any(|c| locate_areal(*c, areal) != Location::Exterior)
                || edges_meet(&l.windows(2).map(|w| (w[0], w[1])).collect::<Vec<_>>(), &areal.segments())
        }
        (a, b) => {
            a.coords().any(|c| locate_areal(c, b) != Location::Exterior)
                || b.coords().any(|c| locate_areal(c, a) != Location::Exterior)
                || edges_meet(&a.segments(), &b.segments())
        }
    }
}

fn edges_meet(a: &[(Coord, Coord)], b: &[(Coord, Coord)]) -> bool {
    a.iter()
        .any(|&(a1, a2)| b.iter().any(|&(b1, b2)| segments_intersect(a1, a2, b1, b2)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geofns::parse_wkt;

    fn g(s: &str) -> Geometry {
        parse_wkt(s).unwrap()
    }

    const UNIT: &str = "POLYGON((0 0,1 0,1 1,0 1,0 0))";

    #[test]
    fn point_in_polygon() {
        assert!(sf_within(&g("POINT(0.5 0.5)"), &g(UNIT)));
        assert!(!sf_within(&g("POINT(1.5 0.5)"), &g(UNIT)));
        // boundary points intersect but are not within
        assert!(!sf_within(&g("POINT(1 0.5)"), &g(UNIT)));
        assert!(sf_intersects(&g("POINT(1 0.5)"), &g(UNIT)));
    }

    #[test]
    fn within_is_reflexive() {
        for s in [UNIT, "POINT(3 4)", "LINESTRING(0 0, 1 1, 2 0)"] {
            assert!(sf_within(&g(s), &g(s)), "{s}");
        }
    }

    #[test]
    fn disjoint_square() {
        let far = g("POLYGON((2 2,3 2,3 3,2 3,2 2))");
        assert!(!sf_within(&far, &g(UNIT)));
        assert!(!sf_intersects(&far, &g(UNIT)));
    }

    #[test]
    fn concave_container_rejects_bridging_edge() {
        // U shape; the probe square spans the notch.
        let u = g("POLYGON((0 0,3 0,3 3,2 3,2 1,1 1,1 3,0 3,0 0))");
        let spanning = g("POLYGON((0.5 2,2.5 2,2.5 2.5,0.5 2.5,0.5 2))");
        let inside_leg = g("POLYGON((0.2 1.5,0.8 1.5,0.8 2.5,0.2 2.5,0.2 1.5))");
        assert!(!sf_within(&spanning, &u));
        assert!(sf_within(&inside_leg, &u));
        assert!(sf_intersects(&spanning, &u));
    }

    #[test]
    fn holes_are_respected() {
        let donut = g("POLYGON((0 0,10 0,10 10,0 10,0 0),(4 4,6 4,6 6,4 6,4 4))");
        assert!(!sf_within(&g("POINT(5 5)"), &donut));
        assert!(sf_within(&g("POINT(2 2)"), &donut));
        let covering_hole = g("POLYGON((3 3,7 3,7 7,3 7,3 3))");
        assert!(!sf_within(&covering_hole, &donut));
        assert!(sf_intersects(&covering_hole, &donut));
    }

    #[test]
    fn lines() {
        let line = g("LINESTRING(0.2 0.2, 0.8 0.8)");
        assert!(sf_within(&line, &g(UNIT)));
        let crossing = g("LINESTRING(0.5 0.5, 1.5 0.5)");
        assert!(!sf_within(&crossing, &g(UNIT)));
        assert!(sf_intersects(&crossing, &g(UNIT)));
        let along_edge = g("LINESTRING(0 0, 1 0)");
        assert!(!sf_within(&along_edge, &g(UNIT)));
        assert!(sf_intersects(&along_edge, &g(UNIT)));
        assert!(sf_intersects(
            &g("LINESTRING(0 0, 2 2)"),
            &g("LINESTRING(0 2, 2 0)")
        ));
        assert!(sf_within(&g("POINT(1 1)"), &g("LINESTRING(0 0, 2 2)")));
    }

    #[test]
    fn multipolygon_parts() {
        let mp = g("MULTIPOLYGON(((0 0,1 0,1 1,0 1,0 0)),((5 5,6 5,6 6,5 6,5 5)))");
        assert!(sf_within(&g("POINT(5.5 5.5)"), &mp));
        assert!(!sf_within(&g("POINT(3 3)"), &mp));
        assert!(!sf_within(&g("POLYGON((0.5 0.5,5.5 0.5,5.5 5.5,0.5 0.5))"), &mp));
        assert!(sf_within(&mp, &g("POLYGON((-1 -1,7 -1,7 7,-1 7,-1 -1))")));
    }

    #[test]
    fn contains_is_dual() {
        assert!(sf_contains(&g(UNIT), &g("POINT(0.5 0.5)")));
        assert!(!sf_contains(&g("POINT(0.5 0.5)"), &g(UNIT)));
    }
}
