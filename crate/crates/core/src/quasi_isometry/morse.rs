//! Probing rays for the Morse property with lateral detours.
//!
//! For each probe size `T` the path `[γ(0), z] ∪ [z, γ(T)]` is built through
//! a point `z` displaced sideways by `δ`. Starting from `δ = εT`, the
//! displacement is shrunk by bisection until the path passes an
//! `(L, C)`-quasi-geodesic check on its samples, and the largest distance
//! from the path to `γ[0, T]` is recorded. Deviation growing linearly with
//! `T` refutes the Morse property; deviation staying flat is evidence for it
//! within this probe family only.

use serde::{Deserialize, Serialize};

use super::hausdorff::is_quasi_geodesic;
use crate::boundary_metrics::GeodesicRay;
use crate::error::{Error, Result};
use crate::space_models::tree::SideDirection;
use crate::space_models::{Point, SpaceModel};

/// Relative displacements tried at every probe size.
pub const PROBE_EPSILONS: [f64; 3] = [0.1, 0.2, 0.4];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MorseVerdict {
    Bounded,
    Growing,
    Inconclusive,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MorseRow {
    pub size: f64,
    pub epsilon: f64,
    /// Displacement actually used after shrinking.
    pub delta: f64,
    pub deviation: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MorseProbeResult {
    pub l: f64,
    pub c: f64,
    pub probes: usize,
    pub max_deviation: f64,
    /// Largest deviation at each probe size.
    pub deviations: Vec<f64>,
    pub verdict: MorseVerdict,
    pub rows: Vec<MorseRow>,
}

/// Recipe for the displaced point at a given probe size.
enum Lateral {
    /// `γ(T/2) + δ w`.
    Euclidean { direction: Vec<f64>, normal: Vec<f64> },
    /// Walk `δ` into a side direction off the ray's core path.
    Tree { vertex: usize, side: SideDirection },
    /// Planar normal to the ray at `γ(T/2)`, pointing away from the origin.
    SeaweedStraight,
    /// Radially outward from `γ(T/2)`.
    SeaweedSpiral,
}

fn lateral_recipe(space: &SpaceModel, ray: &GeodesicRay) -> Result<Lateral> {
    match (space, ray) {
        (SpaceModel::Euclidean { dimension }, GeodesicRay::Euclidean { direction }) => {
            if *dimension < 2 {
                return Err(Error::Unsupported("no lateral direction on a line".into()));
            }
            let axis = (0..direction.len())
                .min_by(|&i, &j| direction[i].abs().total_cmp(&direction[j].abs()))
                .expect("dimension >= 2");
            let mut w: Vec<f64> = direction.iter().map(|u| -u * direction[axis]).collect();
            w[axis] += 1.0;
            let norm = w.iter().fold(0.0f64, |acc, x| acc.hypot(*x));
            Ok(Lateral::Euclidean { direction: direction.clone(), normal: w.iter().map(|x| x / norm).collect() })
        }
        (SpaceModel::Tree(t), GeodesicRay::Tree { branch }) => {
            let mut v = t.branch_attachment(*branch).ok_or_else(|| Error::InvalidRay("unknown branch".into()))?;
            let mut below: Option<usize> = None;
            loop {
                if let Some(b) = t.branches_at(v).find(|b| b != branch) {
                    return Ok(Lateral::Tree { vertex: v, side: SideDirection::Branch(b) });
                }
                if let Some(c) = t.children(v).find(|&c| Some(c) != below) {
                    return Ok(Lateral::Tree { vertex: v, side: SideDirection::Child(c) });
                }
                match t.parent(v) {
                    Some(p) => {
                        below = Some(v);
                        v = p;
                    }
                    None => return Err(Error::Unsupported("the ray's core path has no side directions".into())),
                }
            }
        }
        (SpaceModel::Seaweed(_), GeodesicRay::Straight { .. }) => Ok(Lateral::SeaweedStraight),
        (SpaceModel::Seaweed(_), GeodesicRay::Spiral { .. }) => Ok(Lateral::SeaweedSpiral),
        (SpaceModel::Product(..), _) => Err(Error::Unsupported("lateral detours in products".into())),
        _ => Err(Error::InvalidRay(format!("descriptor {ray:?} does not belong to {}", space.name()))),
    }
}

fn displaced(space: &SpaceModel, ray: &GeodesicRay, recipe: &Lateral, size: f64, delta: f64) -> Result<Point> {
    let half = 0.5 * size;
    match recipe {
        Lateral::Euclidean { direction, normal } => {
            Ok(Point::euclidean(direction.iter().zip(normal).map(|(u, w)| half * u + delta * w).collect::<Vec<_>>()))
        }
        Lateral::Tree { vertex, side } => {
            let t = space.as_tree().expect("tree recipe");
            Ok(t.walk_into(*vertex, *side, delta).into())
        }
        Lateral::SeaweedStraight => {
            let m = space.ray_eval(ray, half)?.as_polar().expect("seaweed point");
            let eta = 1e-4f64.min(half);
            let local = |t: f64| -> Result<(f64, f64)> {
                let p = space.ray_eval(ray, t)?.as_polar().expect("seaweed point");
                let a = p.theta - m.theta;
                Ok((p.r * a.cos(), p.r * a.sin()))
            };
            let (a, b) = (local(half - eta)?, local(half + eta)?);
            let (dx, dy) = (b.0 - a.0, b.1 - a.1);
            let norm = dx.hypot(dy);
            let (mut nx, mut ny) = (-dy / norm, dx / norm);
            if nx < 0.0 {
                (nx, ny) = (-nx, -ny);
            }
            let (x, y) = (m.r + delta * nx, delta * ny);
            Ok(Point::seaweed(x.hypot(y).max(1.0), m.theta + y.atan2(x)))
        }
        Lateral::SeaweedSpiral => {
            let m = space.ray_eval(ray, half)?.as_polar().expect("seaweed point");
            Ok(Point::seaweed(m.r + delta, m.theta))
        }
    }
}

/// Arclength samples of the detour: uniform, plus dense around the corner.
fn detour_params(len1: f64, len2: f64, delta: f64, l: f64, c: f64) -> Vec<f64> {
    let total = len1 + len2;
    let mut u: Vec<f64> = (0..=64).map(|k| total * k as f64 / 64.0).collect();
    for k in 0..=16 {
        let off = delta * k as f64 / 16.0;
        u.extend([len1 - off, len1 + off]);
    }
    for j in 0..=8 {
        let off = l * c * 0.5f64.powi(j);
        u.extend([len1 - off, len1 + off]);
    }
    let mut u: Vec<f64> = u.into_iter().map(|x| x.clamp(0.0, total)).collect();
    u.sort_by(f64::total_cmp);
    u.dedup();
    u
}

struct Detour {
    params: Vec<f64>,
    points: Vec<Point>,
}

fn detour(space: &SpaceModel, start: &Point, z: &Point, end: &Point, delta: f64, l: f64, c: f64) -> Result<Detour> {
    let len1 = space.distance(start, z)?;
    let len2 = space.distance(z, end)?;
    let params = detour_params(len1, len2, delta, l, c);
    let points = params
        .iter()
        .map(|&u| {
            if u <= len1 {
                space.geodesic_eval(start, z, u)
            } else {
                space.geodesic_eval(z, end, (u - len1).min(len2))
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Detour { params, points })
}

/// Distance from `x` to the segment `γ[0, T]`, by golden-section search on
/// the convex function `t ↦ d(x, γ(t))`.
fn distance_to_segment(space: &SpaceModel, ray: &GeodesicRay, size: f64, x: &Point) -> Result<f64> {
    let f = |t: f64| -> Result<f64> { space.distance(x, &space.ray_eval(ray, t)?) };
    let inv_phi = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (0.0, size);
    let (mut c, mut d) = (b - inv_phi * (b - a), a + inv_phi * (b - a));
    let (mut fc, mut fd) = (f(c)?, f(d)?);
    for _ in 0..90 {
        if fc <= fd {
            b = d;
            (d, fd) = (c, fc);
            c = b - inv_phi * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            (c, fc) = (d, fd);
            d = a + inv_phi * (b - a);
            fd = f(d)?;
        }
    }
    Ok(fc.min(fd).min(f(0.0)?).min(f(size)?))
}

/// Probes `γ` with lateral detours at each size and classifies the trend of
/// the deviations.
///
/// The verdict is `growing` when the deviations increase strictly and their
/// overall ratio is at least half the ratio of the sizes, `bounded` when the
/// largest deviation over the larger half of the sizes is within 10% of the
/// largest over the smaller half, and `inconclusive` otherwise.
pub fn morse_probe(space: &SpaceModel, ray: &GeodesicRay, l: f64, c: f64, sizes: &[f64]) -> Result<MorseProbeResult> {
    if sizes.len() < 3 {
        return Err(Error::param("probe_sizes", "need at least three probe sizes"));
    }
    crate::rescaling::validate_schedule(sizes)?;
    if !(l >= 1.0 && c >= 0.0) {
        return Err(Error::param("l", format!("need L >= 1 and C >= 0, got ({l}, {c})")));
    }
    space.validate_ray(ray)?;
    let recipe = lateral_recipe(space, ray)?;
    let start = space.basepoint();
    let mut rows = Vec::new();
    let mut deviations = Vec::with_capacity(sizes.len());
    for &size in sizes {
        let end = space.ray_eval(ray, size)?;
        let mut best = 0.0f64;
        for &eps in &PROBE_EPSILONS {
            let passes = |delta: f64| -> Result<Option<Detour>> {
                let z = displaced(space, ray, &recipe, size, delta)?;
                let path = detour(space, &start, &z, &end, delta, l, c)?;
                Ok(is_quasi_geodesic(space, &path.params, &path.points, l, c)?.then_some(path))
            };
            let mut delta = eps * size;
            let mut path = passes(delta)?;
            if path.is_none() {
                let (mut lo, mut hi) = (0.0, delta);
                let mut lo_path = None;
                for _ in 0..50 {
                    let mid = 0.5 * (lo + hi);
                    match passes(mid)? {
                        Some(p) => {
                            lo = mid;
                            lo_path = Some(p);
                        }
                        None => hi = mid,
                    }
                }
                delta = lo;
                path = lo_path;
            }
            let deviation = match path {
                Some(p) => p
                    .points
                    .iter()
                    .map(|x| distance_to_segment(space, ray, size, x))
                    .collect::<Result<Vec<f64>>>()?
                    .into_iter()
                    .fold(0.0, f64::max),
                None => 0.0,
            };
            best = best.max(deviation);
            rows.push(MorseRow { size, epsilon: eps, delta, deviation });
        }
        deviations.push(best);
    }
    let verdict = classify(sizes, &deviations);
    let max_deviation = deviations.iter().copied().fold(0.0, f64::max);
    Ok(MorseProbeResult { l, c, probes: rows.len(), max_deviation, deviations, verdict, rows })
}

fn classify(sizes: &[f64], devs: &[f64]) -> MorseVerdict {
    let n = devs.len();
    let increasing = devs.windows(2).all(|w| w[1] > w[0]);
    if increasing && devs[0] > 0.0 && devs[n - 1] / devs[0] >= 0.5 * sizes[n - 1] / sizes[0] {
        return MorseVerdict::Growing;
    }
    let half = n / 2;
    let small = devs[..half].iter().copied().fold(0.0, f64::max);
    let large = devs[half..].iter().copied().fold(0.0, f64::max);
    if large <= 1.1 * small + 1e-6 {
        MorseVerdict::Bounded
    } else {
        MorseVerdict::Inconclusive
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space_models::{MetricTree, Orientation, VertexLabel};

    fn sizes() -> Vec<f64> {
        (4..=8).map(|k| (1u64 << k) as f64).collect()
    }

    #[test]
    fn flat_rays_are_not_morse() {
        let e = SpaceModel::euclidean(2);
        let r = morse_probe(&e, &GeodesicRay::planar(0.3), 2.0, 1.0, &sizes()).unwrap();
        assert_eq!(r.verdict, MorseVerdict::Growing);
        assert!((r.deviations[0] - 0.4 * 16.0).abs() < 1e-6);
    }

    #[test]
    fn tree_rays_are_bounded() {
        let t = MetricTree::new(
            (0..3).map(VertexLabel::Int).collect(),
            vec![(0, 1, 1.0), (1, 2, 1.0)],
            0,
            Some(vec![(2, vec![1.0]), (1, vec![0.5, 0.25])]),
        )
        .unwrap();
        let s = SpaceModel::tree(t);
        let r = morse_probe(&s, &GeodesicRay::tree(0), 2.0, 1.0, &sizes()).unwrap();
        assert_eq!(r.verdict, MorseVerdict::Bounded, "{:?}", r.deviations);
        assert!(r.max_deviation <= 1.0 + 1e-6);
    }

    #[test]
    fn seaweed_rays() {
        let s = SpaceModel::seaweed();
        let r = morse_probe(&s, &GeodesicRay::straight(0.0), 2.0, 1.0, &sizes()).unwrap();
        assert_eq!(r.verdict, MorseVerdict::Growing, "{:?}", r.deviations);
        let r = morse_probe(&s, &GeodesicRay::spiral(Orientation::Positive), 2.0, 1.0, &sizes()).unwrap();
        assert_eq!(r.verdict, MorseVerdict::Bounded, "{:?}", r.deviations);
    }

    #[test]
    fn unsupported_cases() {
        let line = SpaceModel::euclidean(1);
        assert!(matches!(
            morse_probe(&line, &GeodesicRay::euclidean([1.0]), 2.0, 1.0, &sizes()),
            Err(Error::Unsupported(_))
        ));
        let lonely = MetricTree::new(vec![VertexLabel::Int(0)], vec![], 0, Some(vec![(0, vec![1.0])])).unwrap();
        assert!(matches!(
            morse_probe(&SpaceModel::tree(lonely), &GeodesicRay::tree(0), 2.0, 1.0, &sizes()),
            Err(Error::Unsupported(_))
        ));
        assert!(morse_probe(&line, &GeodesicRay::euclidean([1.0]), 2.0, 1.0, &[1.0, 2.0]).is_err());
    }
}
