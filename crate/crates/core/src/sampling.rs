//! Seeded generators for random instances of every model.

use rand::Rng;
use std::f64::consts::PI;

use crate::boundary_metrics::{ConePoint, GeodesicRay};
use crate::error::{Error, Result};
use crate::quasi_isometry::{close_rays_bound, hausdorff_distance, is_quasi_geodesic};
use crate::rescaling::ScaleSequence;
use crate::space_models::{MetricTree, Orientation, Point, SpaceModel, TreeEdge, TreePoint, VertexLabel};

/// Random recursive tree with `2..=max_vertices` vertices and edge lengths in
/// `[0.1, 1]`. Every vertex of degree at most one carries a branch and every
/// other vertex carries one with probability 0.3; branch periods have one to
/// three cells of length in `[0.25, 1]`.
pub fn random_tree<R: Rng>(rng: &mut R, max_vertices: usize) -> Result<MetricTree> {
    if max_vertices < 2 {
        return Err(Error::param("max_vertices", "need at least two vertices"));
    }
    let n = rng.gen_range(2..=max_vertices);
    let edges: Vec<(usize, usize, f64)> = (1..n).map(|v| (rng.gen_range(0..v), v, rng.gen_range(0.1..=1.0))).collect();
    let mut degree = vec![0usize; n];
    for &(a, b, _) in &edges {
        degree[a] += 1;
        degree[b] += 1;
    }
    let mut branches = Vec::new();
    for (v, &deg) in degree.iter().enumerate() {
        if deg <= 1 || rng.gen_bool(0.3) {
            let cells = rng.gen_range(1..=3);
            branches.push((v, (0..cells).map(|_| rng.gen_range(0.25..=1.0)).collect()));
        }
    }
    MetricTree::new((0..n as i64).map(VertexLabel::Int).collect(), edges, 0, Some(branches))
}

/// Uniformly random unit vector.
pub fn random_direction<R: Rng>(rng: &mut R, dimension: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dimension).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        let norm = v.iter().fold(0.0f64, |acc, x| acc.hypot(*x));
        if norm > 1e-3 && norm <= 1.0 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

/// Random ray: uniform directions in Euclidean space, uniform branches in
/// trees, and in the seaweed cover a straight ray with asymptotic angle in
/// `[-6, 6]` or, one time in ten, a spiral.
pub fn random_ray<R: Rng>(rng: &mut R, space: &SpaceModel) -> GeodesicRay {
    match space {
        SpaceModel::Euclidean { dimension } => GeodesicRay::euclidean(random_direction(rng, *dimension)),
        SpaceModel::Tree(t) => GeodesicRay::tree(rng.gen_range(0..t.branch_count())),
        SpaceModel::Seaweed(_) => {
            if rng.gen_bool(0.1) {
                GeodesicRay::spiral(if rng.gen_bool(0.5) { Orientation::Positive } else { Orientation::Negative })
            } else {
                GeodesicRay::straight(rng.gen_range(-6.0..=6.0))
            }
        }
        SpaceModel::Product(l, r) => {
            let phi: f64 = rng.gen_range(0.0..=PI / 2.0);
            GeodesicRay::product(random_ray(rng, l), random_ray(rng, r), phi.cos(), phi.sin())
        }
    }
}

pub fn random_cone_point<R: Rng>(rng: &mut R, space: &SpaceModel) -> ConePoint {
    ConePoint::new(rng.gen_range(0.1..=3.0), random_ray(rng, space))
}

/// Random point within roughly `radius` of the basepoint.
pub fn random_point<R: Rng>(rng: &mut R, space: &SpaceModel, radius: f64) -> Point {
    match space {
        SpaceModel::Euclidean { dimension } => {
            let r = rng.gen_range(0.0..=radius);
            Point::euclidean(random_direction(rng, *dimension).into_iter().map(|x| r * x).collect::<Vec<_>>())
        }
        SpaceModel::Tree(t) => {
            let p = if t.vertex_count() > 1 && rng.gen_bool(0.5) {
                let id = rng.gen_range(0..t.vertex_count() - 1);
                let len = t.edge_length(TreeEdge::Core { id }).expect("core edge");
                t.point_on_edge(TreeEdge::Core { id }, rng.gen_range(0.0..=len))
            } else {
                let branch = rng.gen_range(0..t.branch_count());
                let index = rng.gen_range(0..(radius.max(1.0) as u64));
                let len = t.edge_length(TreeEdge::Branch { branch, index }).expect("branch edge");
                t.point_on_edge(TreeEdge::Branch { branch, index }, rng.gen_range(0.0..=len))
            };
            Point::Tree { point: p.unwrap_or_else(|_| TreePoint::core_vertex(0)) }
        }
        SpaceModel::Seaweed(_) => Point::seaweed(rng.gen_range(1.0..=radius.max(1.0)), rng.gen_range(-6.0..=6.0)),
        SpaceModel::Product(l, r) => Point::product(random_point(rng, l, radius), random_point(rng, r, radius)),
    }
}

/// Random divergent scaling sequence: geometric, polynomial, or a
/// geometric sequence with irregular multiplicative jitter.
pub fn random_divergent_sequence<R: Rng>(rng: &mut R) -> Result<ScaleSequence> {
    match rng.gen_range(0..3) {
        0 => ScaleSequence::geometric(rng.gen_range(0.1..=10.0), rng.gen_range(1.001..=1.05)),
        1 => ScaleSequence::polynomial(rng.gen_range(0.1..=10.0), rng.gen_range(0.25..=3.0)),
        _ => {
            let (base, ratio): (f64, f64) = (rng.gen_range(0.1..=5.0), rng.gen_range(1.001..=1.01));
            let jitter: Vec<f64> = (0..64).map(|_| rng.gen_range(0.5..=2.0)).collect();
            Ok(ScaleSequence::from_fn(move |n| base * ratio.powf(n as f64) * jitter[(n % 64) as usize]))
        }
    }
}

/// Parameters of a planar instance of the close-rays bound: a slowed-down
/// line `β` and a wiggling curve `α` in its `M`-neighbourhood.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct HausdorffInstance {
    pub l: f64,
    pub c: f64,
    pub l2: f64,
    pub c2: f64,
    pub m: f64,
    pub omega: f64,
    pub t_max: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct HausdorffOutcome {
    pub hypotheses_hold: bool,
    pub measured: f64,
    pub bound: f64,
}

impl HausdorffInstance {
    /// `β(t) = (t / L, 0)` and `α(t) = (t / L', M sin ωt)`, with `ω` small
    /// enough that `α` is an `(L', 0)`-quasi-geodesic.
    pub fn sample<R: Rng>(rng: &mut R) -> Self {
        let l2 = rng.gen_range(1.2..=3.0);
        let m = rng.gen_range(0.1..=2.0);
        HausdorffInstance {
            l: rng.gen_range(1.0..=3.0),
            c: rng.gen_range(0.0..=1.0),
            l2,
            c2: rng.gen_range(0.0..=1.0),
            m,
            omega: rng.gen_range(0.1..=0.9) * (l2 - 1.0 / l2) / m,
            t_max: rng.gen_range(20.0..=60.0),
        }
    }

    fn alpha(&self, t: f64) -> Point {
        Point::euclidean([t / self.l2, self.m * (self.omega * t).sin()])
    }

    fn beta(&self, t: f64) -> Point {
        Point::euclidean([t / self.l, 0.0])
    }

    /// Checks the hypotheses on samples and compares the sampled Hausdorff
    /// distance with the bound.
    pub fn evaluate(&self, samples: usize) -> Result<HausdorffOutcome> {
        let e = SpaceModel::euclidean(2);
        let ta: Vec<f64> = (0..=samples).map(|k| self.t_max * k as f64 / samples as f64).collect();
        let tb: Vec<f64> = ta.iter().map(|t| t * self.l / self.l2).collect();
        let a: Vec<Point> = ta.iter().map(|&t| self.alpha(t)).collect();
        let b: Vec<Point> = tb.iter().map(|&t| self.beta(t)).collect();
        // β covers the segment from the origin to (t_max / L', 0), so α lies in
        // its M-neighbourhood exactly when its second coordinate stays in [-M, M]
        let within = a.iter().all(|p| p.as_coords().is_some_and(|x| x[1].abs() <= self.m));
        let hypotheses_hold = within
            && is_quasi_geodesic(&e, &ta, &a, self.l2, self.c2)?
            && is_quasi_geodesic(&e, &tb, &b, self.l, self.c)?;
        Ok(HausdorffOutcome {
            hypotheses_hold,
            measured: hausdorff_distance(&e, &a, &b)?,
            bound: close_rays_bound(self.l, self.c, self.l2, self.c2, self.m),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn trees_are_valid_and_seeded() {
        let mut a = ChaCha8Rng::seed_from_u64(3);
        let mut b = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let (ta, tb) = (random_tree(&mut a, 64).unwrap(), random_tree(&mut b, 64).unwrap());
            assert_eq!(ta.vertex_count(), tb.vertex_count());
            assert!(ta.vertex_count() <= 64 && ta.branch_count() >= 1);
        }
    }

    #[test]
    fn random_points_validate() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let t = SpaceModel::tree(random_tree(&mut rng, 20).unwrap());
        for space in [SpaceModel::euclidean(3), t, SpaceModel::seaweed()] {
            for _ in 0..100 {
                let p = random_point(&mut rng, &space, 10.0);
                space.validate_point(&p).unwrap();
                space.validate_ray(&random_ray(&mut rng, &space)).unwrap();
            }
        }
    }

    #[test]
    fn hausdorff_instances_satisfy_hypotheses() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..5 {
            let out = HausdorffInstance::sample(&mut rng).evaluate(300).unwrap();
            assert!(out.hypotheses_hold);
            assert!(out.measured <= out.bound);
        }
    }
}
