use super::geometry::{Coord, Geometry};
use super::predicates::sf_intersects;

pub const EARTH_RADIUS_M: f64 = 6_371_000.0;

/// Maximum edge piece length, in degrees, when sampling boundaries.
pub const DENSIFY_STEP_DEG: f64 = 0.01;

/// Great-circle distance between two lon/lat points on a sphere of radius
/// [`EARTH_RADIUS_M`].
pub fn haversine_m(a: Coord, b: Coord) -> f64 {
    let (lat1, lat2) = (a.lat.to_radians(), b.lat.to_radians());
    let dlat = lat2 - lat1;
    let dlon = (b.lon - a.lon).to_radians();
    let h = (dlat / 2.0).sin().powi(2) + lat1.cos() * lat2.cos() * (dlon / 2.0).sin().powi(2);
    2.0 * EARTH_RADIUS_M * h.sqrt().min(1.0).asin()
}

/// Vertices plus interpolated points so that no gap along a segment exceeds
/// [`DENSIFY_STEP_DEG`].
pub fn densify(g: &Geometry) -> Vec<Coord> {
    match g {
        Geometry::Point(c) => vec![*c],
        _ => {
            let mut out = Vec::new();
            for (a, b) in g.segments() {
                let len = ((b.lon - a.lon).powi(2) + (b.lat - a.lat).powi(2)).sqrt();
                let pieces = (len / DENSIFY_STEP_DEG).ceil().max(1.0) as usize;
                for i in 0..pieces {
                    let t = i as f64 / pieces as f64;
                    out.push(Coord::new(
                        a.lon + t * (b.lon - a.lon),
                        a.lat + t * (b.lat - a.lat),
                    ));
                }
                out.push(b);
            }
            out
        }
    }
}

/// Minimum distance in metres; zero exactly when the geometries intersect.
pub fn distance_metres(a: &Geometry, b: &Geometry) -> f64 {
    distance_between_samples(a, b, &densify(a), &densify(b))
}

/// [`distance_metres`] with precomputed boundary samples.
pub fn distance_between_samples(a: &Geometry, b: &Geometry, sa: &[Coord], sb: &[Coord]) -> f64 {
    if sf_intersects(a, b) {
        return 0.0;
    }
    let mut best = f64::INFINITY;
    for p in sa {
        for q in sb {
            let d = haversine_m(*p, *q);
            if d < best {
                best = d;
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geofns::parse_wkt;

    #[test]
    fn identical_points_are_zero_apart() {
        let p = parse_wkt("POINT(12.5 44.5)").unwrap();
        assert_eq!(distance_metres(&p, &p), 0.0);
    }

    #[test]
    fn thousandth_of_a_degree_of_latitude() {
        // R * 0.001° in radians = 6_371_000 * 1.745329e-5 = 111.19 m
        let a = parse_wkt("POINT(0 0)").unwrap();
        let b = parse_wkt("POINT(0 0.001)").unwrap();
        let d = distance_metres(&a, &b);
        assert!((d - 111.19).abs() / 111.19 < 0.005, "{d}");
    }

    #[test]
    fn point_inside_polygon_is_zero() {
        let sq = parse_wkt("POLYGON((0 0,1 0,1 1,0 1,0 0))").unwrap();
        let p = parse_wkt("POINT(0.3 0.3)").unwrap();
        assert_eq!(distance_metres(&p, &sq), 0.0);
        let outside = parse_wkt("POINT(1.01 0.5)").unwrap();
        let d = distance_metres(&outside, &sq);
        assert!(d > 1000.0 && d < 1200.0, "{d}");
    }

    #[test]
    fn densify_bounds_gaps() {
        let line = parse_wkt("LINESTRING(0 0, 0.05 0)").unwrap();
        let pts = densify(&line);
        assert!(pts.windows(2).all(|w| (w[1].lon - w[0].lon).abs() <= DENSIFY_STEP_DEG + 1e-12));
        assert_eq!(pts.first().unwrap().lon, 0.0);
        assert_eq!(pts.last().unwrap().lon, 0.05);
    }
}
