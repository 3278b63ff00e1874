//! Finite-scale stand-ins for asymptotic-cone constructions.
//!
//! A point `t·α` of the cone over the boundary is sent to `α(t·s)` at scale
//! `s`, and scales are connected by the retraction `Θ` that shrinks distances
//! to the basepoint by `s'/s`. Limits over scales are taken along explicit
//! schedules and reported with their convergence status.

mod schedule;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::boundary_metrics::{
    secant_trace, visual_distance, BoundaryConfig, ConePoint, ConvergenceEstimate, GeodesicRay, TracePoint,
};
use crate::error::{Error, Result};
use crate::space_models::{Point, SpaceModel};

pub use schedule::{
    audit_lattice, lattice_level, scale_lattice_bounds, validate_schedule, LatticeAudit, ScaleSequence, ScheduleSpec,
};

fn check_scale(name: &'static str, s: f64) -> Result<()> {
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::param(name, format!("scale {s} must be positive and finite")));
    }
    Ok(())
}

/// `Ψ`: the point `α(t·s)`, at rescaled distance `t` from the basepoint.
pub fn psi_eval(space: &SpaceModel, s: f64, t: f64, ray: &GeodesicRay) -> Result<Point> {
    check_scale("s", s)?;
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::param("t", format!("radius {t} must be non-negative")));
    }
    space.ray_eval(ray, t * s)
}

/// `Θ` from scale `s` down to scale `s2 <= s`: retracts `x` towards the
/// basepoint so that its rescaled distance to the basepoint is unchanged.
pub fn theta_map(space: &SpaceModel, s: f64, s2: f64, x: &Point) -> Result<Point> {
    check_scale("s", s)?;
    check_scale("s2", s2)?;
    if s2 > s {
        return Err(Error::OrderViolation { from: s, target: s2 });
    }
    if s2 == s {
        space.validate_point(x)?;
        return Ok(x.clone());
    }
    let d = space.distance(&space.basepoint(), x)?;
    space.retraction_xi(x, (s2 / s) * d)
}

/// A model observed at a fixed scale: distances are divided by `scale`.
#[derive(Clone, Debug)]
pub struct ScaledView<'a> {
    pub space: &'a SpaceModel,
    pub scale: f64,
}

impl<'a> ScaledView<'a> {
    pub fn new(space: &'a SpaceModel, scale: f64) -> Result<Self> {
        check_scale("scale", scale)?;
        Ok(ScaledView { space, scale })
    }

    pub fn distance(&self, p: &Point, q: &Point) -> Result<f64> {
        Ok(self.space.distance(p, q)? / self.scale)
    }

    pub fn psi(&self, a: &ConePoint) -> Result<Point> {
        psi_eval(self.space, self.scale, a.t, &a.ray)
    }

    /// `Θ` into the view at `scale`, from a coarser view.
    pub fn theta_from(&self, source: &ScaledView<'_>, x: &Point) -> Result<Point> {
        theta_map(self.space, source.scale, self.scale, x)
    }
}

/// Rescaled distance `d(α(t s), β(t' s)) / s` along the schedule.
///
/// The function `s ↦ d(α(t s), β(t' s))` is convex and vanishes at 0, so its
/// secant slopes are nondecreasing and converge to the same limit as the
/// rescaled distance itself; the estimate reports the secant slopes, which
/// are exact once the distance becomes affine in `s`.
pub fn cone_distance_at_scale(
    space: &SpaceModel,
    a: &ConePoint,
    b: &ConePoint,
    schedule: &[f64],
    cfg: &BoundaryConfig,
) -> Result<ConvergenceEstimate> {
    if schedule.is_empty() {
        return Err(Error::EmptySchedule);
    }
    for p in [a, b] {
        if !(p.t >= 0.0 && p.t.is_finite()) {
            return Err(Error::param("t", format!("cone radius {} must be non-negative", p.t)));
        }
        space.validate_ray(&p.ray)?;
    }
    let rows = secant_trace(schedule, |s| {
        space.distance_unchecked(&space.ray_point(&a.ray, a.t * s), &space.ray_point(&b.ray, b.t * s))
    })?;
    let trace = rows.into_iter().map(|(param, raw, estimate)| TracePoint { param, raw, estimate }).collect();
    Ok(ConvergenceEstimate::from_trace(trace, cfg.tolerance))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CollapseRow {
    pub index: usize,
    pub visual: f64,
    pub scale: f64,
    /// Largest `d(α_n(t d'), α(t d'))` over the admissible samples.
    pub max_gap: f64,
    pub checked: u64,
    pub skipped: u64,
    pub violations: u64,
    /// Rescaled gap `d(α_n(t₀ d_n), α(t₀ d_n)) / d_n`.
    pub rescaled_gap: f64,
    /// Upper bound on `d_C(α_n, α)` implied by the rescaled gap.
    pub converse_bound: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CollapseReport {
    pub c: f64,
    pub t0: f64,
    pub scales: Vec<f64>,
    pub rows: Vec<CollapseRow>,
    pub bound_holds: bool,
    pub converse_holds: bool,
}

impl CollapseReport {
    pub fn schedule(&self) -> Result<ScaleSequence> {
        ScaleSequence::explicit(self.scales.clone())
    }
}

/// Sample radii for the collapse bound.
pub const COLLAPSE_SAMPLE_RADII: [f64; 8] = [0.1, 0.25, 0.5, 1.0, 2.0, 3.5, 6.0, 10.0];

/// Scales `d_n = (1 / d_C(α, α_n))^{1/2}` for rays `α_n` converging to `α`,
/// with both directions of the collapse verified on sampled data.
///
/// The bound `d(α_n(t d'), α(t d')) <= C` is checked for each sample radius
/// `t <= 10` and each `d' = d_n / 2^k` with `t <= d' <= d_n`, which keeps
/// `t d'` below the last time the rays are `C`-close. Samples with `t > d_n`
/// are skipped and counted. The converse bound at radius `t₀` follows from
/// convexity: either the gap at `t₀ d_n` is at most `C`, so `d_C <= 1/(t₀
/// d_n)`, or it exceeds `C` and `d_C <= gap / (C t₀)`.
pub fn collapse_schedule(
    space: &SpaceModel,
    rays: &[GeodesicRay],
    target: &GeodesicRay,
    c: f64,
    t0: f64,
    cfg: &BoundaryConfig,
) -> Result<CollapseReport> {
    if rays.is_empty() {
        return Err(Error::param("rays", "empty ray family"));
    }
    if !(t0 > 0.0 && t0.is_finite()) {
        return Err(Error::param("t0", format!("{t0} must be positive")));
    }
    let visual = rays
        .par_iter()
        .map(|r| visual_distance(space, target, r, c, cfg).map(|v| v.value))
        .collect::<Result<Vec<f64>>>()?;
    if let Some(i) = visual.iter().position(|&v| v == 0.0) {
        return Err(Error::Degenerate(format!("ray {i} coincides with the target at the visual horizon")));
    }
    if let Some(i) = (1..visual.len()).find(|&i| visual[i] > visual[i - 1] * (1.0 + 1e-9)) {
        return Err(Error::NonConvergentFamily {
            index: i,
            reason: format!("d_C rises from {} to {}", visual[i - 1], visual[i]),
        });
    }
    let scales: Vec<f64> = visual.iter().map(|v| (1.0 / v).sqrt()).collect();
    let gap = |r: &GeodesicRay, t: f64| space.distance_unchecked(&space.ray_point(r, t), &space.ray_point(target, t));
    let rows: Vec<CollapseRow> = rays
        .par_iter()
        .enumerate()
        .map(|(index, r)| {
            let dn = scales[index];
            let (mut max_gap, mut checked, mut skipped, mut violations) = (0.0f64, 0u64, 0u64, 0u64);
            for &t in &COLLAPSE_SAMPLE_RADII {
                if t > dn {
                    skipped += 1;
                    continue;
                }
                let mut d = dn;
                while d >= t {
                    let g = gap(r, t * d);
                    // the sup time carries the relative bisection error
                    violations += u64::from(g > c + 1e-9 * (t * d).max(1.0));
                    max_gap = max_gap.max(g);
                    checked += 1;
                    d *= 0.5;
                }
            }
            let rescaled_gap = gap(r, t0 * dn) / dn;
            let converse_bound = (rescaled_gap / (c * t0)).max(1.0 / (t0 * dn));
            CollapseRow {
                index,
                visual: visual[index],
                scale: dn,
                max_gap,
                checked,
                skipped,
                violations,
                rescaled_gap,
                converse_bound,
            }
        })
        .collect();
    let bound_holds = rows.iter().all(|r| r.violations == 0);
    let converse_holds = rows.iter().all(|r| r.visual <= r.converse_bound * (1.0 + 1e-9));
    Ok(CollapseReport { c, t0, scales, rows, bound_holds, converse_holds })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CutPointWitness {
    pub separated: bool,
    /// Depth of the branching point of the two rays.
    pub prefix: f64,
    /// Rescaled distance from the basepoint to the geodesic between the
    /// two images.
    pub meet_rescaled: f64,
}

/// Whether the geodesic between `α(t s)` and `β(t s)` in a tree passes
/// through the branching point of the rays, which sits at rescaled depth
/// `ℓ / s`: the finite-scale picture of the basepoint separating the two
/// images in the cone.
pub fn cut_point_witness(
    space: &SpaceModel,
    alpha: &GeodesicRay,
    beta: &GeodesicRay,
    t: f64,
    s: f64,
) -> Result<CutPointWitness> {
    let tree =
        space.as_tree().ok_or_else(|| Error::Unsupported(format!("cut points need a tree, got {}", space.name())))?;
    let (GeodesicRay::Tree { branch: b1 }, GeodesicRay::Tree { branch: b2 }) = (alpha, beta) else {
        return Err(Error::InvalidRay("tree rays expected".into()));
    };
    space.validate_ray(alpha)?;
    space.validate_ray(beta)?;
    let prefix =
        tree.shared_prefix(*b1, *b2).ok_or_else(|| Error::PreconditionFailed("the two rays coincide".into()))?;
    let p = psi_eval(space, s, t, alpha)?;
    let q = psi_eval(space, s, t, beta)?;
    if t * s <= prefix {
        return Err(Error::Inconclusive(format!(
            "radius {} at scale {s} does not pass the shared prefix {prefix}",
            t * s
        )));
    }
    let base = space.basepoint();
    let (dpq, dp, dq) = (space.distance(&p, &q)?, space.distance(&p, &base)?, space.distance(&q, &base)?);
    let m = space.geodesic_eval(&p, &q, 0.5 * (dpq + dp - dq))?;
    let depth = space.distance(&m, &base)?;
    let tol = 1e-9 * (t * s).max(1.0);
    let on_path = |x: &Point, dx: f64| -> Result<bool> { Ok((space.distance(&m, x)? + depth - dx).abs() <= tol) };
    let interior = space.distance(&m, &p)? > tol && space.distance(&m, &q)? > tol;
    let separated = interior && (depth - prefix).abs() <= tol && on_path(&p, dp)? && on_path(&q, dq)?;
    Ok(CutPointWitness { separated, prefix, meet_rescaled: depth / s })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boundary_metrics::cone_metric_radii;
    use crate::space_models::{MetricTree, VertexLabel};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::FRAC_PI_2;

    fn cfg() -> BoundaryConfig {
        BoundaryConfig::default()
    }

    /// Path `0 - 1 - … - n` of unit edges with a branch at every vertex, so
    /// branch `k` leaves the core at depth `k` and shares a prefix of length
    /// `min(j, k)` with branch `j`. Branch `n + 1` continues the path.
    fn comb(n: usize) -> SpaceModel {
        let mut branches: Vec<(usize, Vec<f64>)> = (0..=n).map(|k| (k, vec![1.0])).collect();
        branches.push((n, vec![1.0]));
        let t = MetricTree::new(
            (0..=n as i64).map(VertexLabel::Int).collect(),
            (0..n).map(|k| (k, k + 1, 1.0)).collect(),
            0,
            Some(branches),
        )
        .unwrap();
        SpaceModel::tree(t)
    }

    #[test]
    fn psi_examples() {
        let e = SpaceModel::euclidean(2);
        assert_eq!(psi_eval(&e, 100.0, 2.0, &GeodesicRay::planar(0.0)).unwrap(), Point::euclidean([200.0, 0.0]));
        assert_eq!(psi_eval(&e, 100.0, 0.0, &GeodesicRay::planar(1.0)).unwrap(), e.basepoint());
        let t = comb(6);
        let p = psi_eval(&t, 8.0, 0.5, &GeodesicRay::tree(5)).unwrap();
        assert_abs_diff_eq!(
            t.as_tree().unwrap().depth_of(match &p {
                Point::Tree { point } => point,
                _ => unreachable!(),
            }),
            4.0
        );
    }

    #[test]
    fn theta_examples() {
        let e = SpaceModel::euclidean(2);
        let x = Point::euclidean([10.0, 0.0]);
        assert_eq!(theta_map(&e, 10.0, 5.0, &x).unwrap(), Point::euclidean([5.0, 0.0]));
        assert_eq!(theta_map(&e, 10.0, 10.0, &x).unwrap(), x);
        assert!(matches!(theta_map(&e, 5.0, 10.0, &x), Err(Error::OrderViolation { .. })));
        let once = theta_map(&e, 10.0, 2.0, &Point::euclidean([3.0, 4.0])).unwrap();
        let twice = theta_map(&e, 5.0, 2.0, &theta_map(&e, 10.0, 5.0, &Point::euclidean([3.0, 4.0])).unwrap()).unwrap();
        assert_eq!(once, twice);
    }

    #[test]
    fn cone_distance_examples() {
        let sched: Vec<f64> = (0..=20).map(|k| (1u64 << k) as f64).collect();
        let e = SpaceModel::euclidean(2);
        let a = ConePoint::new(1.0, GeodesicRay::planar(0.0));
        let b = ConePoint::new(1.0, GeodesicRay::planar(FRAC_PI_2));
        let est = cone_distance_at_scale(&e, &a, &b, &sched, &cfg()).unwrap();
        for tp in &est.trace {
            assert_abs_diff_eq!(tp.estimate, 2f64.sqrt(), epsilon = 1e-12);
        }
        let t = comb(4);
        let a = ConePoint::new(1.0, GeodesicRay::tree(3));
        let b = ConePoint::new(1.0, GeodesicRay::tree(5));
        let est = cone_distance_at_scale(&t, &a, &b, &sched, &cfg()).unwrap();
        assert!(est.trace.iter().filter(|tp| tp.param > 4.0).all(|tp| (tp.estimate - 2.0).abs() < 1e-12));
        let s = SpaceModel::seaweed();
        let a = ConePoint::new(1.0, GeodesicRay::straight(0.0));
        let b = ConePoint::new(1.0, GeodesicRay::straight(1.0));
        let est = cone_distance_at_scale(&s, &a, &b, &sched, &cfg()).unwrap();
        assert_abs_diff_eq!(est.value, cone_metric_radii(1.0, 1.0, 1.0).unwrap(), epsilon = 1e-4);
        assert!(cone_distance_at_scale(&s, &a, &b, &[], &cfg()).is_err());
    }

    #[test]
    fn collapse_in_the_plane() {
        let e = SpaceModel::euclidean(2);
        let rays: Vec<GeodesicRay> = (1..=20).map(|n| GeodesicRay::planar(1.0 / n as f64)).collect();
        let rep = collapse_schedule(&e, &rays, &GeodesicRay::planar(0.0), 1.0, 1.0, &cfg()).unwrap();
        for (i, d) in rep.scales.iter().enumerate() {
            let n = (i + 1) as f64;
            assert_abs_diff_eq!(*d, (1.0 / (2.0 * (0.5 / n).sin())).sqrt(), epsilon = 1e-6 * d);
        }
        assert!(rep.bound_holds && rep.converse_holds);
    }

    #[test]
    fn collapse_in_a_tree() {
        let t = comb(12);
        let rays: Vec<GeodesicRay> = (1..=10).map(GeodesicRay::tree).collect();
        let rep = collapse_schedule(&t, &rays, &GeodesicRay::tree(13), 1.0, 1.0, &cfg()).unwrap();
        for (i, d) in rep.scales.iter().enumerate() {
            assert_abs_diff_eq!(*d, ((i + 1) as f64 + 0.5).sqrt(), epsilon = 1e-8);
        }
        assert!(rep.bound_holds && rep.converse_holds);
    }

    #[test]
    fn collapse_rejects_bad_families() {
        let e = SpaceModel::euclidean(2);
        let same = vec![GeodesicRay::planar(0.0); 3];
        assert!(matches!(
            collapse_schedule(&e, &same, &GeodesicRay::planar(0.0), 1.0, 1.0, &cfg()),
            Err(Error::Degenerate(_))
        ));
        let away: Vec<GeodesicRay> = [0.1, 0.2, 0.05].map(GeodesicRay::planar).to_vec();
        assert!(matches!(
            collapse_schedule(&e, &away, &GeodesicRay::planar(0.0), 1.0, 1.0, &cfg()),
            Err(Error::NonConvergentFamily { index: 1, .. })
        ));
    }

    #[test]
    fn cut_points() {
        let t = comb(5);
        let w = cut_point_witness(&t, &GeodesicRay::tree(0), &GeodesicRay::tree(4), 1.0, 0.5).unwrap();
        assert!(w.separated);
        let w = cut_point_witness(&t, &GeodesicRay::tree(3), &GeodesicRay::tree(5), 1.0, 6.0).unwrap();
        assert!(w.separated);
        assert_abs_diff_eq!(w.meet_rescaled, 0.5, epsilon = 1e-12);
        assert!(matches!(
            cut_point_witness(&t, &GeodesicRay::tree(3), &GeodesicRay::tree(5), 1.0, 2.0),
            Err(Error::Inconclusive(_))
        ));
        assert!(matches!(
            cut_point_witness(&t, &GeodesicRay::tree(3), &GeodesicRay::tree(3), 1.0, 9.0),
            Err(Error::PreconditionFailed(_))
        ));
    }
}
