//! Quasi-isometries and their scale-dependent action on boundaries.
//!
//! A quasi-isometry `f` does not act on rays directly. At scale `s` the ray
//! `α` is sent to the based ray through `f(α(s))` (the chord
//! `[f α(0), f α(s)]` moved to the basepoint), and the limit set of `f∘α`
//! is swept out by varying `s`. Morse rays give the same answer at every
//! scale; other rays may not.

mod hausdorff;
mod morse;
mod spiral;

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::boundary_metrics::GeodesicRay;
use crate::error::{Error, Result};
use crate::rescaling::theta_map;
use crate::space_models::{Point, SpaceModel};

pub use hausdorff::{
    close_rays_bound, directed_hausdorff, hausdorff_distance, is_quasi_geodesic, quasi_geodesic_defect,
};
pub use morse::{morse_probe, MorseProbeResult, MorseRow, MorseVerdict, PROBE_EPSILONS};
pub use spiral::{
    distortion, euclidean_spiral, lift_to, lift_to_seaweed, max_twist, shear_lipschitz, spiral_analysis, DistortionRow,
    SpiralAnalysis, SpiralMap, SpiralProfile, MAX_TWIST,
};

/// Point map between models.
pub type PointFn = Arc<dyn Fn(&Point) -> Result<Point> + Send + Sync>;

/// Evaluable map between models with claimed constants `(λ, C)`.
#[derive(Clone)]
pub struct QuasiIsometryMap {
    pub domain: SpaceModel,
    pub codomain: SpaceModel,
    pub lambda: f64,
    pub c: f64,
    pub name: String,
    eval: PointFn,
}

impl fmt::Debug for QuasiIsometryMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("QuasiIsometryMap")
            .field("name", &self.name)
            .field("domain", &self.domain.name())
            .field("codomain", &self.codomain.name())
            .field("lambda", &self.lambda)
            .field("c", &self.c)
            .finish()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QiCheck {
    pub pairs: u64,
    /// Largest `d(f x, f y) - (λ d(x, y) + C)`.
    pub upper_excess: f64,
    /// Largest `(d(x, y)/λ - C) - d(f x, f y)`.
    pub lower_excess: f64,
    pub holds: bool,
}

impl QuasiIsometryMap {
    pub fn new(
        domain: SpaceModel,
        codomain: SpaceModel,
        eval: PointFn,
        lambda: f64,
        c: f64,
        name: impl Into<String>,
    ) -> Self {
        QuasiIsometryMap { domain, codomain, lambda, c, name: name.into(), eval }
    }

    pub fn identity(space: SpaceModel) -> Self {
        QuasiIsometryMap::new(space.clone(), space, Arc::new(|p: &Point| Ok(p.clone())), 1.0, 0.0, "identity")
    }

    /// Isometry of a tree onto its relabelled copy (see
    /// [`crate::space_models::MetricTree::relabeled`]), with the branch map.
    pub fn tree_relabel(space: &SpaceModel, perm: &[usize]) -> Result<(Self, Vec<usize>)> {
        let tree = space.as_tree().ok_or_else(|| Error::Unsupported("relabelling needs a tree".into()))?.clone();
        let (image, branches) = tree.relabeled(perm)?;
        let perm = perm.to_vec();
        let f = Arc::new(move |p: &Point| -> Result<Point> {
            let Point::Tree { point } = p else {
                return Err(Error::InvalidPoint("tree point expected".into()));
            };
            Ok(tree.relabel_point(&perm, point).into())
        });
        Ok((QuasiIsometryMap::new(space.clone(), SpaceModel::tree(image), f, 1.0, 0.0, "relabel"), branches))
    }

    pub fn eval(&self, p: &Point) -> Result<Point> {
        self.domain.validate_point(p)?;
        let q = (self.eval)(p)?;
        self.codomain.validate_point(&q)?;
        Ok(q)
    }

    /// Checks `d(x,y)/λ - C <= d(f x, f y) <= λ d(x,y) + C` on all pairs of
    /// the sample, with slack `1e-9` relative to the distances involved.
    pub fn check_on_samples(&self, points: &[Point]) -> Result<QiCheck> {
        let images = points.iter().map(|p| self.eval(p)).collect::<Result<Vec<_>>>()?;
        let parts = (0..points.len())
            .into_par_iter()
            .map(|i| -> Result<(u64, f64, f64)> {
                let (mut up, mut low) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
                for j in 0..i {
                    let d = self.domain.distance(&points[i], &points[j])?;
                    let fd = self.codomain.distance(&images[i], &images[j])?;
                    let slack = 1e-9 * d.max(fd).max(1.0);
                    up = up.max(fd - (self.lambda * d + self.c) - slack);
                    low = low.max((d / self.lambda - self.c) - fd - slack);
                }
                Ok((i as u64, up, low))
            })
            .collect::<Result<Vec<_>>>()?;
        let upper_excess = parts.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
        let lower_excess = parts.iter().map(|p| p.2).fold(f64::NEG_INFINITY, f64::max);
        let pairs = parts.iter().map(|p| p.0).sum();
        Ok(QiCheck { pairs, upper_excess, lower_excess, holds: upper_excess <= 0.0 && lower_excess <= 0.0 })
    }
}

/// Based ray through `q`, for the chord that starts at `from`. Euclidean
/// factors translate the chord to the origin; other models use the ray from
/// the basepoint through `q`.
fn based_ray_through(space: &SpaceModel, from: &Point, q: &Point) -> Result<GeodesicRay> {
    match (space, from, q) {
        (SpaceModel::Euclidean { .. }, Point::Euclidean { coords: a }, Point::Euclidean { coords: b }) => {
            let v: Vec<f64> = b.iter().zip(a).map(|(x, y)| x - y).collect();
            let norm = v.iter().fold(0.0f64, |acc, x| acc.hypot(*x));
            if norm == 0.0 {
                return Err(Error::Degenerate("chord has zero length".into()));
            }
            Ok(GeodesicRay::euclidean(v.iter().map(|x| x / norm).collect::<Vec<_>>()))
        }
        (SpaceModel::Tree(t), _, Point::Tree { point }) => {
            if t.depth_of(point) == 0.0 {
                return Err(Error::Degenerate("image point is the basepoint".into()));
            }
            Ok(GeodesicRay::tree(t.branch_through(point)))
        }
        (SpaceModel::Seaweed(s), _, Point::Seaweed { r, theta }) => {
            let p = crate::space_models::PolarPoint::new(*r, *theta);
            if s.distance(&s.basepoint, &p) == 0.0 {
                return Err(Error::Degenerate("image point is the basepoint".into()));
            }
            Ok(match s.extension_direction(&p) {
                Ok(theta) => GeodesicRay::straight(theta),
                Err(sign) => GeodesicRay::spiral(sign),
            })
        }
        (SpaceModel::Product(l, r), Point::Product { left: fl, right: fr }, Point::Product { left: ql, right: qr }) => {
            let factor_length = |m: &SpaceModel, f: &Point, q: &Point| -> Result<f64> {
                match m {
                    SpaceModel::Euclidean { .. } => m.distance(f, q),
                    _ => m.distance(&m.basepoint(), q),
                }
            };
            let (dl, dr) = (factor_length(l, fl, ql)?, factor_length(r, fr, qr)?);
            let total = dl.hypot(dr);
            if total == 0.0 {
                return Err(Error::Degenerate("chord has zero length".into()));
            }
            let left = if dl > 0.0 { based_ray_through(l, fl, ql)? } else { l.default_ray() };
            let right = if dr > 0.0 { based_ray_through(r, fr, qr)? } else { r.default_ray() };
            Ok(GeodesicRay::product(left, right, dl / total, dr / total))
        }
        _ => Err(Error::InvalidPoint(format!("image point does not belong to {}", space.name()))),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Pushforward {
    pub scale: f64,
    pub ray: GeodesicRay,
    /// `f(α(s))`.
    pub target: Point,
    /// Tits component label of the ray; labels are never merged.
    pub component: String,
}

/// `f^s(α)`: the based ray through `f(α(s))`.
pub fn pushforward_at_scale(f: &QuasiIsometryMap, alpha: &GeodesicRay, s: f64) -> Result<Pushforward> {
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::param("s", format!("scale {s} must be positive")));
    }
    let start = f.eval(&f.domain.ray_eval(alpha, 0.0)?)?;
    let target = f.eval(&f.domain.ray_eval(alpha, s)?)?;
    let ray = based_ray_through(&f.codomain, &start, &target)?;
    let component = f.codomain.tits_component(&ray);
    Ok(Pushforward { scale: s, ray, target, component })
}

/// Distance between two descriptors of the same model at boundary
/// resolution: the angle for Euclidean directions, `|Δθ|` for seaweed
/// `Straight` rays, 0 or `∞` for discrete descriptors. Different Tits
/// components are infinitely far apart.
pub fn descriptor_gap(a: &GeodesicRay, b: &GeodesicRay) -> f64 {
    match (a, b) {
        (GeodesicRay::Euclidean { direction: u }, GeodesicRay::Euclidean { direction: v }) => {
            let dot: f64 = u.iter().zip(v).map(|(x, y)| x * y).sum();
            dot.clamp(-1.0, 1.0).acos()
        }
        (GeodesicRay::Straight { theta: x }, GeodesicRay::Straight { theta: y }) => (x - y).abs(),
        (
            GeodesicRay::Product { left: l1, right: r1, a: a1, b: b1 },
            GeodesicRay::Product { left: l2, right: r2, a: a2, b: b2 },
        ) => {
            let split = (b1.atan2(*a1) - b2.atan2(*a2)).abs();
            let lg = if *a1 == 0.0 && *a2 == 0.0 { 0.0 } else { descriptor_gap(l1, l2) };
            let rg = if *b1 == 0.0 && *b2 == 0.0 { 0.0 } else { descriptor_gap(r1, r2) };
            split.max(lg).max(rg)
        }
        _ if a.same_as(b) => 0.0,
        _ => f64::INFINITY,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sweep {
    pub rows: Vec<Pushforward>,
    /// Visited descriptors merged at the requested resolution, in visiting
    /// order.
    pub distinct: Vec<GeodesicRay>,
    /// First index from which every descriptor lies within the resolution of
    /// the final one.
    pub stable_from: usize,
}

impl Sweep {
    pub fn is_singleton(&self) -> bool {
        self.distinct.len() == 1
    }
}

/// `f^s(α)` across an increasing grid of scales.
pub fn limit_set_sweep(f: &QuasiIsometryMap, alpha: &GeodesicRay, grid: &[f64], resolution: f64) -> Result<Sweep> {
    crate::rescaling::validate_schedule(grid)?;
    if !(resolution >= 0.0) {
        return Err(Error::param("resolution", format!("{resolution} must be non-negative")));
    }
    let rows = grid.par_iter().map(|&s| pushforward_at_scale(f, alpha, s)).collect::<Result<Vec<_>>>()?;
    let mut distinct: Vec<GeodesicRay> = Vec::new();
    for r in &rows {
        if !distinct.iter().any(|d| descriptor_gap(d, &r.ray) <= resolution) {
            distinct.push(r.ray.clone());
        }
    }
    let last = &rows[rows.len() - 1].ray;
    let stable_from = rows.iter().rposition(|r| descriptor_gap(&r.ray, last) > resolution).map_or(0, |i| i + 1);
    Ok(Sweep { rows, distinct, stable_from })
}

/// Largest distance from a sampled direction to a point of the circle,
/// i.e. half the largest gap between the directions mod 2π.
pub fn circle_coverage(angles: &[f64]) -> f64 {
    if angles.is_empty() {
        return std::f64::consts::PI;
    }
    let tau = std::f64::consts::TAU;
    let mut a: Vec<f64> = angles.iter().map(|x| x.rem_euclid(tau)).collect();
    a.sort_by(f64::total_cmp);
    let wrap = a[0] + tau - a[a.len() - 1];
    let gap = a.windows(2).map(|w| w[1] - w[0]).fold(wrap, f64::max);
    0.5 * gap
}

/// Rescaled gap `d(Θ_{s→s'} f(α(s)), f^s(α)(s')) / s'` between the
/// retracted image point and the pushed-forward ray at scale `s' <= s`.
pub fn relations_gap(f: &QuasiIsometryMap, alpha: &GeodesicRay, s: f64, s2: f64) -> Result<f64> {
    let push = pushforward_at_scale(f, alpha, s)?;
    let retracted = theta_map(&f.codomain, s, s2, &push.target)?;
    let on_ray = f.codomain.ray_eval(&push.ray, s2)?;
    Ok(f.codomain.distance(&retracted, &on_ray)? / s2)
}

/// First grid scale `s` from which the relations gap stays within `tol` for
/// every pair of grid scales `s' <= s''` with `s <= s''`.
pub fn stabilization_scale(f: &QuasiIsometryMap, alpha: &GeodesicRay, grid: &[f64], tol: f64) -> Result<Option<f64>> {
    crate::rescaling::validate_schedule(grid)?;
    let ok = grid
        .par_iter()
        .enumerate()
        .map(|(j, &s)| -> Result<bool> {
            for &s2 in &grid[..=j] {
                if relations_gap(f, alpha, s, s2)? > tol {
                    return Ok(false);
                }
            }
            Ok(true)
        })
        .collect::<Result<Vec<bool>>>()?;
    Ok(match ok.iter().rposition(|x| !x) {
        None => Some(grid[0]),
        Some(i) => grid.get(i + 1).copied(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoundtripReport {
    pub forward: GeodesicRay,
    pub back: GeodesicRay,
    /// Largest sampled `d(back(t), α(t))`.
    pub gap: f64,
    pub bounded: bool,
}

/// Times at which roundtrip rays are compared: `2^0, …, 2^20`.
pub fn roundtrip_times() -> Vec<f64> {
    (0..=20).map(|k| (1u64 << k) as f64).collect()
}

/// Pushes `α` forward by `f` at scale `s` and back by `g` at scale `s2`,
/// and measures how far the result strays from `α`. Requires `g` to undo
/// `f` up to its additive constant on sample points along `α`.
pub fn roundtrip_check(
    f: &QuasiIsometryMap,
    g: &QuasiIsometryMap,
    alpha: &GeodesicRay,
    s: f64,
    s2: f64,
) -> Result<RoundtripReport> {
    let times = roundtrip_times();
    let c = g.c.max(f.c);
    for &t in &times {
        let x = f.domain.ray_eval(alpha, t)?;
        let fx = f.eval(&x)?;
        let gfx = g.eval(&fx)?;
        let slack = 1e-9 * t.max(1.0);
        let d1 = f.domain.distance(&gfx, &x)?;
        let d2 = f.codomain.distance(&f.eval(&gfx)?, &fx)?;
        if d1.max(d2) > c + slack {
            return Err(Error::QuasiInverse(format!("round trip moves a point by {} at t = {t}", d1.max(d2))));
        }
    }
    let forward = pushforward_at_scale(f, alpha, s)?.ray;
    let back = pushforward_at_scale(g, &forward, s2)?.ray;
    let gaps = times
        .iter()
        .map(|&t| f.domain.distance(&f.domain.ray_eval(&back, t)?, &f.domain.ray_eval(alpha, t)?))
        .collect::<Result<Vec<f64>>>()?;
    let half = gaps.len() / 2;
    let early = gaps[..half].iter().copied().fold(0.0, f64::max);
    let late = gaps[half..].iter().copied().fold(0.0, f64::max);
    Ok(RoundtripReport { forward, back, gap: early.max(late), bounded: late <= 1.1 * early + 1e-6 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space_models::{MetricTree, Orientation, VertexLabel};
    use approx::assert_abs_diff_eq;

    fn small_tree() -> SpaceModel {
        let t = MetricTree::new(
            (0..4).map(VertexLabel::Int).collect(),
            vec![(0, 1, 1.0), (1, 2, 0.5), (1, 3, 2.0)],
            0,
            None,
        )
        .unwrap();
        SpaceModel::tree(t)
    }

    #[test]
    fn identity_pushforward_is_the_ray() {
        let e = SpaceModel::euclidean(2);
        let f = QuasiIsometryMap::identity(e);
        let alpha = GeodesicRay::planar(0.7);
        let p = pushforward_at_scale(&f, &alpha, 13.0).unwrap();
        assert!(descriptor_gap(&p.ray, &alpha) < 1e-15);
        let s = QuasiIsometryMap::identity(SpaceModel::seaweed());
        let p = pushforward_at_scale(&s, &GeodesicRay::straight(2.5), 40.0).unwrap();
        assert!(descriptor_gap(&p.ray, &GeodesicRay::straight(2.5)) < 1e-9);
    }

    #[test]
    fn log_spiral_direction() {
        let f = euclidean_spiral(&SpiralMap::new(SpiralProfile::Log), 1e9).unwrap();
        for s in [2.0, 50.0, 1e6] {
            let p = pushforward_at_scale(&f, &GeodesicRay::planar(0.3), s).unwrap();
            let want = GeodesicRay::planar(0.3 + f64::ln(s));
            assert!(descriptor_gap(&p.ray, &want) < 1e-9);
        }
    }

    #[test]
    fn relabelling_moves_branches() {
        let t = small_tree();
        let (f, branches) = QuasiIsometryMap::tree_relabel(&t, &[3, 2, 1, 0]).unwrap();
        for (b, &image) in branches.iter().enumerate().take(2) {
            let p = pushforward_at_scale(&f, &GeodesicRay::tree(b), 20.0).unwrap();
            assert_eq!(p.ray, GeodesicRay::tree(image));
        }
        let pts: Vec<Point> = (0..8).map(|k| t.ray_eval(&GeodesicRay::tree(k % 2), k as f64 * 0.7).unwrap()).collect();
        assert!(f.check_on_samples(&pts).unwrap().holds);
    }

    #[test]
    fn roundtrips() {
        let e = SpaceModel::euclidean(2);
        let id = QuasiIsometryMap::identity(e);
        let r = roundtrip_check(&id, &id, &GeodesicRay::planar(1.0), 8.0, 64.0).unwrap();
        assert!(r.bounded);
        assert!(r.gap < 1e-9);
        let t = small_tree();
        let perm = [2, 0, 3, 1];
        let (f, _) = QuasiIsometryMap::tree_relabel(&t, &perm).unwrap();
        let mut inv = [0; 4];
        for (v, &p) in perm.iter().enumerate() {
            inv[p] = v;
        }
        let (g, _) = QuasiIsometryMap::tree_relabel(&f.codomain, &inv).unwrap();
        let r = roundtrip_check(&f, &g, &GeodesicRay::tree(1), 3.0, 5.0).unwrap();
        assert!(r.bounded);
        assert_eq!(r.gap, 0.0);
    }

    #[test]
    fn seaweed_spirals_are_fixed() {
        let f = lift_to_seaweed(&SpiralMap::new(SpiralProfile::Log), 1e12).unwrap();
        for s in [1.0, 10.0, 1e5] {
            let p = pushforward_at_scale(&f, &GeodesicRay::spiral(Orientation::Negative), s).unwrap();
            assert_eq!(p.ray, GeodesicRay::spiral(Orientation::Negative));
            assert_eq!(p.component, "-inf");
        }
    }

    #[test]
    fn coverage_of_the_circle() {
        assert_abs_diff_eq!(circle_coverage(&[0.0, std::f64::consts::PI]), std::f64::consts::FRAC_PI_2);
        let dense: Vec<f64> = (0..200).map(|k| 0.1 * k as f64).collect();
        assert!(circle_coverage(&dense) <= 0.05 + 1e-12);
    }

    #[test]
    fn spiral_relations_gap_vanishes() {
        let f = euclidean_spiral(&SpiralMap::new(SpiralProfile::Log), 1e9).unwrap();
        let gap = relations_gap(&f, &GeodesicRay::planar(0.0), 1e4, 10.0).unwrap();
        assert!(gap < 1e-12);
        let grid: Vec<f64> = (1..10).map(|k| 10f64.powi(k)).collect();
        assert_eq!(stabilization_scale(&f, &GeodesicRay::planar(0.0), &grid, 1e-9).unwrap(), Some(10.0));
    }
}
