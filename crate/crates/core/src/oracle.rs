//! Independent reference computations used to cross-check the closed forms.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::{FRAC_PI_2, PI};

use crate::boundary_metrics::GeodesicRay;
use crate::error::{Error, Result};
use crate::space_models::{PolarPoint, SpaceModel};

/// Shortest path found by the visibility-graph search.
#[derive(Clone, Debug, PartialEq)]
pub struct OraclePath {
    pub length: f64,
    /// Vertices of the polygonal path, from `p` to `q`.
    pub vertices: Vec<PolarPoint>,
}

#[derive(Clone, Copy, PartialEq)]
struct Entry {
    dist: f64,
    node: usize,
}

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other.dist.total_cmp(&self.dist).then(self.node.cmp(&other.node))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Whether the planar segment between two points in the same sheet stays
/// outside the open unit disk.
fn segment_clears_disk(a: PolarPoint, b: PolarPoint) -> bool {
    let delta = b.theta - a.theta;
    if delta.abs() >= PI {
        return false;
    }
    let (ax, ay) = (a.r, 0.0);
    let (bx, by) = (b.r * delta.cos(), b.r * delta.sin());
    let (dx, dy) = (bx - ax, by - ay);
    let len2 = dx * dx + dy * dy;
    let u = if len2 > 0.0 { (-(ax * dx + ay * dy) / len2).clamp(0.0, 1.0) } else { 0.0 };
    let (cx, cy) = (ax + u * dx, ay + u * dy);
    cx.hypot(cy) >= 1.0 - 1e-9
}

fn planar_length(a: PolarPoint, b: PolarPoint) -> f64 {
    let delta = b.theta - a.theta;
    (b.r * delta.cos() - a.r).hypot(b.r * delta.sin())
}

/// Shortest path between two points of the seaweed cover, computed by
/// Dijkstra's algorithm on a visibility graph: the endpoints plus nodes on
/// the unit circle spaced at most `spacing` apart, joined by circle arcs
/// between neighbouring nodes and by straight segments that avoid the disk.
///
/// Every graph edge is an honest path in the space, so the result is an
/// upper bound on the distance that tightens as `spacing` shrinks.
pub fn seaweed_oracle_distance(p: PolarPoint, q: PolarPoint, spacing: f64) -> Result<OraclePath> {
    if !(spacing > 0.0 && spacing <= 0.1) {
        return Err(Error::param("spacing", format!("{spacing} must lie in (0, 0.1]")));
    }
    for x in [p, q] {
        if !(x.r >= 1.0 && x.r.is_finite() && x.theta.is_finite()) {
            return Err(Error::InvalidPoint(format!("({}, {}) is not in the seaweed cover", x.r, x.theta)));
        }
    }
    let lo = p.theta.min(q.theta) - FRAC_PI_2;
    let hi = p.theta.max(q.theta) + FRAC_PI_2;
    let n_ring = ((hi - lo) / spacing).ceil() as usize + 1;
    let h = (hi - lo) / (n_ring - 1) as f64;
    let mut nodes = vec![p, q];
    nodes.extend((0..n_ring).map(|k| PolarPoint::new(1.0, lo + h * k as f64)));
    let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); nodes.len()];
    let link = |a: usize, b: usize, w: f64, adj: &mut Vec<Vec<(usize, f64)>>| {
        adj[a].push((b, w));
        adj[b].push((a, w));
    };
    for k in 0..n_ring - 1 {
        link(2 + k, 3 + k, h, &mut adj);
    }
    for end in 0..2 {
        let x = nodes[end];
        let first = ((x.theta - FRAC_PI_2 - lo) / h).floor().max(0.0) as usize;
        let last = (((x.theta + FRAC_PI_2 - lo) / h).ceil() as usize).min(n_ring - 1);
        for k in first..=last {
            let y = nodes[2 + k];
            if segment_clears_disk(x, y) {
                link(end, 2 + k, planar_length(x, y), &mut adj);
            }
        }
    }
    if segment_clears_disk(p, q) {
        link(0, 1, planar_length(p, q), &mut adj);
    }

    let mut dist = vec![f64::INFINITY; nodes.len()];
    let mut prev = vec![usize::MAX; nodes.len()];
    let mut heap = BinaryHeap::new();
    dist[0] = 0.0;
    heap.push(Entry { dist: 0.0, node: 0 });
    while let Some(Entry { dist: d, node }) = heap.pop() {
        if d > dist[node] {
            continue;
        }
        if node == 1 {
            break;
        }
        for &(next, w) in &adj[node] {
            let nd = d + w;
            if nd < dist[next] {
                dist[next] = nd;
                prev[next] = node;
                heap.push(Entry { dist: nd, node: next });
            }
        }
    }
    if !dist[1].is_finite() {
        return Err(Error::Degenerate("the visibility graph does not connect the endpoints".into()));
    }
    let mut vertices = vec![q];
    let mut at = 1;
    while prev[at] != usize::MAX {
        at = prev[at];
        vertices.push(nodes[at]);
    }
    vertices.reverse();
    Ok(OraclePath { length: dist[1], vertices })
}

/// Tits angle between two rays from the closed-form description of each
/// boundary: the round sphere for Euclidean space, the discrete set of ends
/// for trees, the line of straight directions plus two isolated spiral
/// points for the seaweed cover, and the spherical join for products.
pub fn reference_angle(space: &SpaceModel, a: &GeodesicRay, b: &GeodesicRay) -> Result<f64> {
    space.validate_ray(a)?;
    space.validate_ray(b)?;
    Ok(angle_unchecked(a, b))
}

fn angle_unchecked(a: &GeodesicRay, b: &GeodesicRay) -> f64 {
    match (a, b) {
        (GeodesicRay::Euclidean { direction: u }, GeodesicRay::Euclidean { direction: v }) => {
            let dot: f64 = u.iter().zip(v).map(|(x, y)| x * y).sum();
            let diff = u.iter().zip(v).fold(0.0f64, |acc, (x, y)| acc.hypot(x - y));
            // 2 asin(|u - v| / 2) is accurate near 0; acos is accurate near π/2
            if dot > 0.5 {
                2.0 * (0.5 * diff).asin()
            } else {
                dot.clamp(-1.0, 1.0).acos()
            }
        }
        (GeodesicRay::Straight { theta: x }, GeodesicRay::Straight { theta: y }) => (x - y).abs().min(PI),
        (
            GeodesicRay::Product { left: l1, right: r1, a: a1, b: b1 },
            GeodesicRay::Product { left: l2, right: r2, a: a2, b: b2 },
        ) => {
            let cos = a1 * a2 * angle_unchecked(l1, l2).cos() + b1 * b2 * angle_unchecked(r1, r2).cos();
            cos.clamp(-1.0, 1.0).acos()
        }
        _ if a == b => 0.0,
        _ => PI,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space_models::{Orientation, Point};

    #[test]
    fn oracle_matches_simple_cases() {
        let chord = seaweed_oracle_distance(PolarPoint::new(2.0, 0.0), PolarPoint::new(3.0, 0.0), 1e-3).unwrap();
        assert!((chord.length - 1.0).abs() < 1e-12);
        assert_eq!(chord.vertices.len(), 2);
        // antipodal points at radius 2: two tangents of length √3 and an arc of π/3
        let wrap = seaweed_oracle_distance(PolarPoint::new(2.0, 0.0), PolarPoint::new(2.0, PI), 1e-3).unwrap();
        let exact = 2.0 * 3f64.sqrt() + PI / 3.0;
        assert!(wrap.length >= exact - 1e-12 && wrap.length < exact + 1e-5, "{}", wrap.length);
        assert!(seaweed_oracle_distance(PolarPoint::new(0.5, 0.0), PolarPoint::new(2.0, 0.0), 1e-3).is_err());
    }

    #[test]
    fn oracle_agrees_with_closed_form_far_around() {
        let s = SpaceModel::seaweed();
        let (p, q) = (PolarPoint::new(5.0, -3.0), PolarPoint::new(12.0, 9.0));
        let o = seaweed_oracle_distance(p, q, 1e-3).unwrap();
        let d = s.distance(&p.into(), &Point::from(q)).unwrap();
        assert!(o.length >= d - 1e-9 && o.length <= d * (1.0 + 1e-6));
    }

    #[test]
    fn reference_angles() {
        let s = SpaceModel::seaweed();
        let sp = GeodesicRay::spiral(Orientation::Positive);
        assert_eq!(reference_angle(&s, &GeodesicRay::straight(0.0), &GeodesicRay::straight(2.0)).unwrap(), 2.0);
        assert_eq!(reference_angle(&s, &GeodesicRay::straight(0.0), &GeodesicRay::straight(4.0)).unwrap(), PI);
        assert_eq!(reference_angle(&s, &sp, &sp).unwrap(), 0.0);
        assert_eq!(reference_angle(&s, &sp, &GeodesicRay::straight(0.0)).unwrap(), PI);
        let e = SpaceModel::euclidean(2);
        let a = reference_angle(&e, &GeodesicRay::planar(0.0), &GeodesicRay::planar(1e-9)).unwrap();
        assert!((a - 1e-9).abs() < 1e-20);
    }
}
