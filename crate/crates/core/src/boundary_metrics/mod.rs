//! Boundary metrics on the space of geodesic rays from the basepoint.
//!
//! * the visual metric `d_C(α, β) = 1 / sup{t : d(α(t), β(t)) <= C}`;
//! * the angle metric, the limit of comparison angles at the basepoint;
//! * the Tits metric, the path metric induced by the angle metric, estimated
//!   along explicit interpolation families;
//! * the Euclidean cone metric over the boundary and the flat-sector test.
//!
//! Limits are never taken implicitly. Every limiting quantity is evaluated
//! along an explicit schedule of parameters and returned as a
//! [`ConvergenceEstimate`] whose status says whether the last increment fell
//! below the configured tolerance.

mod ray;

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rescaling::validate_schedule;
use crate::space_models::{SpaceModel, ARCCOS_SLACK};

pub use ray::GeodesicRay;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryConfig {
    /// Convergence tolerance on the last increment of an estimate.
    pub tolerance: f64,
    /// Largest parameter used by default schedules.
    pub horizon: f64,
    /// Largest time searched when computing `d_C`; beyond it the rays are
    /// reported as indistinguishable.
    pub visual_horizon: f64,
    /// Relative bracket width at which the `d_C` bisection stops.
    pub bisection_tolerance: f64,
    /// Small-parameter cutoff, relative to the grid scale, for the angle at
    /// the basepoint.
    pub basepoint_angle_scale: f64,
}

impl Default for BoundaryConfig {
    fn default() -> Self {
        BoundaryConfig {
            tolerance: 1e-6,
            horizon: (1u64 << 20) as f64,
            visual_horizon: 1e12,
            bisection_tolerance: 1e-10,
            basepoint_angle_scale: 1e-6,
        }
    }
}

impl BoundaryConfig {
    /// Doubling schedule `1, 2, 4, …` up to the horizon.
    pub fn default_schedule(&self) -> Vec<f64> {
        let mut out = vec![1.0];
        while *out.last().unwrap() * 2.0 <= self.horizon {
            out.push(out.last().unwrap() * 2.0);
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConvergenceStatus {
    Converged,
    NotConverged,
    Diverged,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    /// Schedule parameter (time or scale).
    pub param: f64,
    /// Raw quantity at that parameter, e.g. `d(α(t), β(t))`.
    pub raw: f64,
    /// Running estimate of the limit.
    pub estimate: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceEstimate {
    pub value: f64,
    pub last_increment: f64,
    pub status: ConvergenceStatus,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub trace: Vec<TracePoint>,
}

impl ConvergenceEstimate {
    pub(crate) fn from_trace(trace: Vec<TracePoint>, tolerance: f64) -> Self {
        let n = trace.len();
        let value = trace[n - 1].estimate;
        let last_increment = if n >= 2 { (value - trace[n - 2].estimate).abs() } else { f64::INFINITY };
        Self::with_status(value, last_increment, tolerance, trace)
    }

    pub(crate) fn with_status(value: f64, last_increment: f64, tolerance: f64, trace: Vec<TracePoint>) -> Self {
        let status = if !value.is_finite() {
            ConvergenceStatus::Diverged
        } else if last_increment <= tolerance {
            ConvergenceStatus::Converged
        } else {
            ConvergenceStatus::NotConverged
        };
        ConvergenceEstimate { value, last_increment, status, trace }
    }

    pub fn exact(value: f64) -> Self {
        let status = if value.is_finite() { ConvergenceStatus::Converged } else { ConvergenceStatus::Diverged };
        ConvergenceEstimate { value, last_increment: 0.0, status, trace: Vec::new() }
    }

    pub fn is_converged(&self) -> bool {
        self.status == ConvergenceStatus::Converged
    }

    /// Largest decrease between consecutive estimates in the trace.
    pub fn max_decrease(&self) -> f64 {
        self.trace.windows(2).map(|w| w[0].estimate - w[1].estimate).fold(0.0, f64::max)
    }
}

/// Evaluates the convex function `g` (with `g(0) = 0`) along the schedule
/// and returns its secant slopes: `g(t₀)/t₀`, then
/// `(g(t_k) - g(t_{k-1}))/(t_k - t_{k-1})`. Convexity makes the slopes
/// nondecreasing, and they share the limit of `g(t)/t`.
pub(crate) fn secant_trace<G>(schedule: &[f64], g: G) -> Result<Vec<(f64, f64, f64)>>
where
    G: Fn(f64) -> f64 + Sync,
{
    validate_schedule(schedule)?;
    let values: Vec<f64> = schedule.par_iter().map(|&t| g(t)).collect();
    let mut out = Vec::with_capacity(schedule.len());
    for k in 0..schedule.len() {
        let slope = if k == 0 {
            values[0] / schedule[0]
        } else {
            (values[k] - values[k - 1]) / (schedule[k] - schedule[k - 1])
        };
        out.push((schedule[k], values[k], slope));
    }
    Ok(out)
}

/// `2 arcsin(min(1, ratio))`, with ratios within rounding of 1 mapped to π.
pub(crate) fn angle_from_half_ratio(ratio: f64) -> f64 {
    if ratio >= 1.0 - ARCCOS_SLACK {
        PI
    } else {
        2.0 * ratio.max(0.0).asin()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VisualDistance {
    pub value: f64,
    /// Last time the rays are within `C` (infinite past the horizon).
    pub sup_time: f64,
    pub horizon_reached: bool,
}

/// Visual metric `d_C(α, β)`.
///
/// `g(t) = d(α(t), β(t))` is convex with `g(0) = 0`, hence nondecreasing, so
/// the supremum of `{t : g(t) <= C}` is bracketed by doubling and then
/// bisected. Rays still within `C` at the visual horizon get distance 0 and
/// the horizon flag.
pub fn visual_distance(
    space: &SpaceModel,
    alpha: &GeodesicRay,
    beta: &GeodesicRay,
    c: f64,
    cfg: &BoundaryConfig,
) -> Result<VisualDistance> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::param("C", format!("{c} must be positive")));
    }
    space.validate_ray(alpha)?;
    space.validate_ray(beta)?;
    let g = |t: f64| space.distance_unchecked(&space.ray_point(alpha, t), &space.ray_point(beta, t));
    let (mut lo, mut hi) = (0.0, 1.0);
    while g(hi) <= c {
        lo = hi;
        hi *= 2.0;
        if lo >= cfg.visual_horizon {
            return Ok(VisualDistance { value: 0.0, sup_time: f64::INFINITY, horizon_reached: true });
        }
    }
    while hi - lo > cfg.bisection_tolerance * hi {
        let mid = 0.5 * (lo + hi);
        if g(mid) <= c {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let sup = 0.5 * (lo + hi);
    Ok(VisualDistance { value: 1.0 / sup, sup_time: sup, horizon_reached: false })
}

/// Angle `∠(α, β)` as the limit of `2 arcsin(d(α(t), β(t)) / 2t)`.
///
/// The running estimate uses secant slopes of `g(t) = d(α(t), β(t))` in place
/// of `g(t)/t`; both tend to the same limit and both are nondecreasing, but
/// the secants are exact as soon as `g` becomes affine (flats, and trees past
/// the shared prefix).
pub fn angle_between(
    space: &SpaceModel,
    alpha: &GeodesicRay,
    beta: &GeodesicRay,
    schedule: &[f64],
    cfg: &BoundaryConfig,
) -> Result<ConvergenceEstimate> {
    if schedule.is_empty() {
        return Err(Error::EmptySchedule);
    }
    if schedule.len() < 2 {
        return Err(Error::param("schedule", "need at least two parameters"));
    }
    space.validate_ray(alpha)?;
    space.validate_ray(beta)?;
    let rows =
        secant_trace(schedule, |t| space.distance_unchecked(&space.ray_point(alpha, t), &space.ray_point(beta, t)))?;
    let trace = rows
        .into_iter()
        .map(|(param, raw, slope)| TracePoint { param, raw, estimate: angle_from_half_ratio(0.5 * slope) })
        .collect();
    Ok(ConvergenceEstimate::from_trace(trace, cfg.tolerance))
}

/// Comparison angle at the basepoint between `α(τ)` and `β(τ)`.
pub fn basepoint_angle(space: &SpaceModel, alpha: &GeodesicRay, beta: &GeodesicRay, tau: f64) -> Result<f64> {
    let base = space.basepoint();
    space.comparison_angle(&base, &space.ray_eval(alpha, tau)?, &space.ray_eval(beta, tau)?)
}

/// Estimate of the Tits distance as the angle length of an interpolating
/// chain of `k` steps between `α` and `β`.
///
/// Chains exist for Euclidean directions (great-circle interpolation),
/// seaweed `Straight` directions (linear in the asymptotic angle) and product
/// rays sharing their factor rays (interpolating the speed split). When no
/// chain is available and the direct angle is π the rays lie in different
/// Tits components and the distance is reported as `+∞`. Any other case is
/// unsupported.
pub fn tits_distance_chain(
    space: &SpaceModel,
    alpha: &GeodesicRay,
    beta: &GeodesicRay,
    k: usize,
    schedule: &[f64],
    cfg: &BoundaryConfig,
) -> Result<ConvergenceEstimate> {
    if k == 0 {
        return Err(Error::param("k", "chain size must be at least 1"));
    }
    space.validate_ray(alpha)?;
    space.validate_ray(beta)?;
    if alpha.same_as(beta) {
        return Ok(ConvergenceEstimate::exact(0.0));
    }
    let Some(family) = interpolation_family(alpha, beta)? else {
        let direct = angle_between(space, alpha, beta, schedule, cfg)?;
        if direct.value >= PI - cfg.tolerance {
            return Ok(ConvergenceEstimate::exact(f64::INFINITY));
        }
        return Err(Error::Unsupported(format!(
            "no interpolation family between {alpha:?} and {beta:?} at angle {}",
            direct.value
        )));
    };
    let chain_sum = |steps: usize| -> Result<(f64, bool)> {
        let rays: Vec<GeodesicRay> = (0..=steps).map(|i| family(i as f64 / steps as f64)).collect();
        let parts = rays
            .par_windows(2)
            .map(|w| angle_between(space, &w[0], &w[1], schedule, cfg))
            .collect::<Result<Vec<_>>>()?;
        Ok((parts.iter().map(|p| p.value).sum(), parts.iter().all(|p| p.is_converged())))
    };
    let (fine, fine_ok) = chain_sum(k)?;
    let increment = if k >= 2 { (fine - chain_sum(k / 2)?.0).abs() } else { f64::INFINITY };
    let mut est = ConvergenceEstimate::with_status(fine, increment, cfg.tolerance.max(1e-9 * k as f64), Vec::new());
    if !fine_ok && est.status == ConvergenceStatus::Converged {
        est.status = ConvergenceStatus::NotConverged;
    }
    Ok(est)
}

type Family = Box<dyn Fn(f64) -> GeodesicRay + Send + Sync>;

fn interpolation_family(alpha: &GeodesicRay, beta: &GeodesicRay) -> Result<Option<Family>> {
    match (alpha, beta) {
        (GeodesicRay::Euclidean { direction: u }, GeodesicRay::Euclidean { direction: v }) => {
            let (u, v) = (u.clone(), v.clone());
            let dot: f64 = u.iter().zip(&v).map(|(a, b)| a * b).sum::<f64>().clamp(-1.0, 1.0);
            let omega = dot.acos();
            // unit vector orthogonal to u in the plane of the path
            let mut w: Vec<f64> = v.iter().zip(&u).map(|(b, a)| b - dot * a).collect();
            let mut norm = w.iter().fold(0.0f64, |acc, x| acc.hypot(*x));
            if norm < 1e-9 {
                if u.len() < 2 {
                    return Err(Error::Unsupported(
                        "antipodal directions on a line have no interpolating chain".into(),
                    ));
                }
                let axis = (0..u.len()).min_by(|&i, &j| u[i].abs().partial_cmp(&u[j].abs()).unwrap()).unwrap();
                w = u.iter().enumerate().map(|(i, a)| f64::from(u8::from(i == axis)) - u[axis] * a).collect();
                norm = w.iter().fold(0.0f64, |acc, x| acc.hypot(*x));
            }
            let w: Vec<f64> = w.iter().map(|x| x / norm).collect();
            Ok(Some(Box::new(move |f| {
                let (c, s) = ((f * omega).cos(), (f * omega).sin());
                GeodesicRay::euclidean(u.iter().zip(&w).map(|(a, b)| c * a + s * b).collect::<Vec<_>>())
            })))
        }
        (GeodesicRay::Straight { theta: a }, GeodesicRay::Straight { theta: b }) => {
            let (a, b) = (*a, *b);
            Ok(Some(Box::new(move |f| GeodesicRay::straight(a + f * (b - a)))))
        }
        (
            GeodesicRay::Product { left: l1, right: r1, a: a1, b: b1 },
            GeodesicRay::Product { left: l2, right: r2, a: a2, b: b2 },
        ) => {
            let left_ok = *a1 == 0.0 || *a2 == 0.0 || l1.same_as(l2);
            let right_ok = *b1 == 0.0 || *b2 == 0.0 || r1.same_as(r2);
            if !(left_ok && right_ok) {
                return Ok(None);
            }
            let left = if *a1 == 0.0 { l2.clone() } else { l1.clone() };
            let right = if *b1 == 0.0 { r2.clone() } else { r1.clone() };
            let (w1, w2) = (b1.atan2(*a1), b2.atan2(*a2));
            Ok(Some(Box::new(move |f| {
                let w = w1 + f * (w2 - w1);
                GeodesicRay::Product { left: left.clone(), right: right.clone(), a: w.cos(), b: w.sin() }
            })))
        }
        _ => Ok(None),
    }
}

/// Point `t·α` of the Euclidean cone over the boundary.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConePoint {
    pub t: f64,
    pub ray: GeodesicRay,
}

impl ConePoint {
    pub fn new(t: f64, ray: GeodesicRay) -> Self {
        ConePoint { t, ray }
    }
}

impl PartialEq for ConePoint {
    fn eq(&self, other: &Self) -> bool {
        (self.t == 0.0 && other.t == 0.0) || (self.t == other.t && self.ray.same_as(&other.ray))
    }
}

/// Euclidean cone distance between radii `s` and `t` whose boundary points
/// are `angle` apart, with the angle capped at π.
pub fn cone_metric_radii(s: f64, t: f64, angle: f64) -> Result<f64> {
    if !(s >= 0.0 && t >= 0.0) {
        return Err(Error::param("t", format!("cone radii ({s}, {t}) must be non-negative")));
    }
    if !(angle >= 0.0) {
        return Err(Error::param("boundary_angle", format!("{angle} must be non-negative")));
    }
    let half = 0.5 * angle.min(PI);
    Ok((s - t).hypot(2.0 * (s * t).sqrt() * half.sin()))
}

pub fn cone_metric(a: &ConePoint, b: &ConePoint, boundary_angle: f64) -> Result<f64> {
    cone_metric_radii(a.t, b.t, boundary_angle)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlatSectorReport {
    pub angle: f64,
    pub basepoint_angle: f64,
    pub max_deviation: f64,
    pub flat: bool,
}

/// Compares `d(α(s), β(t))` with the cone metric over the grid of `(s, t)`
/// pairs. The rays must meet at a converged angle below π that agrees with
/// their angle at the basepoint.
pub fn flat_sector_check(
    space: &SpaceModel,
    alpha: &GeodesicRay,
    beta: &GeodesicRay,
    grid: &[(f64, f64)],
    schedule: &[f64],
    tolerance: f64,
    cfg: &BoundaryConfig,
) -> Result<FlatSectorReport> {
    if grid.is_empty() {
        return Err(Error::param("grid", "empty sample grid"));
    }
    let angle = angle_between(space, alpha, beta, schedule, cfg)?;
    if !angle.is_converged() {
        return Err(Error::PreconditionFailed(format!("angle estimate did not converge ({:?})", angle.status)));
    }
    if angle.value >= PI - cfg.tolerance {
        return Err(Error::PreconditionFailed("rays meet at angle π; they bound no sector".into()));
    }
    let scale = grid.iter().map(|&(s, t)| s.max(t)).fold(1.0, f64::max);
    let at_base = basepoint_angle(space, alpha, beta, cfg.basepoint_angle_scale * scale)?;
    if (at_base - angle.value).abs() > tolerance.max(cfg.tolerance) {
        return Err(Error::PreconditionFailed(format!(
            "angle at the basepoint {at_base} differs from the boundary angle {}",
            angle.value
        )));
    }
    let deviations = grid
        .par_iter()
        .map(|&(s, t)| {
            let d = space.distance(&space.ray_eval(alpha, s)?, &space.ray_eval(beta, t)?)?;
            Ok((d - cone_metric_radii(s, t, angle.value)?).abs())
        })
        .collect::<Result<Vec<f64>>>()?;
    let max_deviation = deviations.into_iter().fold(0.0, f64::max);
    Ok(FlatSectorReport {
        angle: angle.value,
        basepoint_angle: at_base,
        max_deviation,
        flat: max_deviation <= tolerance,
    })
}

/// Checks the two inclusions relating `d_C` balls to the visual basis sets
/// `U(α, R, ε) = {β : d(α(R), β(R)) < ε}` on the witness `β`:
/// `d_C(α,β) < ε/(CR)` implies `β ∈ U(α, R, ε)` (for `0 < ε <= C`), and
/// `β ∈ U(α, 1/ε + C/2, C/2)` implies `d_C(α, β) <= ε`. Returns whether each
/// implication holds (vacuous implications count as holding).
pub fn visual_ball_inclusions(
    space: &SpaceModel,
    alpha: &GeodesicRay,
    beta: &GeodesicRay,
    c: f64,
    radius: f64,
    eps: f64,
    cfg: &BoundaryConfig,
) -> Result<(bool, bool)> {
    if !(eps > 0.0 && eps <= c && radius > 0.0) {
        return Err(Error::param("eps", "need 0 < ε <= C and R > 0"));
    }
    let dc = visual_distance(space, alpha, beta, c, cfg)?.value;
    let gap = |t: f64| -> Result<f64> { space.distance(&space.ray_eval(alpha, t)?, &space.ray_eval(beta, t)?) };
    let slack = 1e-9;
    let first = dc >= eps / (c * radius) || gap(radius)? <= eps + slack;
    let second = gap(1.0 / eps + 0.5 * c)? >= 0.5 * c || dc <= eps + slack;
    Ok((first, second))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space_models::{MetricTree, Orientation, VertexLabel};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_3};

    fn cfg() -> BoundaryConfig {
        BoundaryConfig::default()
    }

    /// Star with a core path of length `prefix` and two branches at its end.
    fn forked(prefix: f64) -> SpaceModel {
        let t = MetricTree::new(
            (0..2).map(VertexLabel::Int).collect(),
            vec![(0, 1, prefix)],
            0,
            Some(vec![(1, vec![1.0]), (1, vec![0.5, 1.5])]),
        )
        .unwrap();
        SpaceModel::tree(t)
    }

    #[test]
    fn visual_distance_euclidean_closed_form() {
        let e = SpaceModel::euclidean(2);
        for phi in [0.1, 1.0, FRAC_PI_2, 3.0, PI] {
            let d = visual_distance(&e, &GeodesicRay::planar(0.0), &GeodesicRay::planar(phi), 1.0, &cfg()).unwrap();
            assert_abs_diff_eq!(d.value, 2.0 * (phi / 2.0).sin(), epsilon = 1e-9);
        }
    }

    #[test]
    fn visual_distance_identity_and_trees() {
        let e = SpaceModel::euclidean(2);
        let d = visual_distance(&e, &GeodesicRay::planar(0.4), &GeodesicRay::planar(0.4), 1.0, &cfg()).unwrap();
        assert_eq!(d.value, 0.0);
        assert!(d.horizon_reached);
        let t = forked(3.0);
        let d = visual_distance(&t, &GeodesicRay::tree(0), &GeodesicRay::tree(1), 1.0, &cfg()).unwrap();
        assert_abs_diff_eq!(d.value, 1.0 / 3.5, epsilon = 1e-10);
        assert!(visual_distance(&t, &GeodesicRay::tree(0), &GeodesicRay::tree(1), 0.0, &cfg()).is_err());
    }

    #[test]
    fn angle_exact_in_flats_and_trees() {
        let e = SpaceModel::euclidean(2);
        let sched = cfg().default_schedule();
        let est = angle_between(&e, &GeodesicRay::planar(0.0), &GeodesicRay::planar(1.2), &sched, &cfg()).unwrap();
        for tp in &est.trace {
            assert_abs_diff_eq!(tp.estimate, 1.2, epsilon = 1e-12);
        }
        let t = forked(5.0);
        let est = angle_between(&t, &GeodesicRay::tree(0), &GeodesicRay::tree(1), &sched, &cfg()).unwrap();
        for tp in est.trace.iter().skip(1).filter(|tp| tp.param > 16.0) {
            assert_eq!(tp.estimate, PI);
        }
        assert!(angle_between(&t, &GeodesicRay::tree(0), &GeodesicRay::tree(1), &[], &cfg()).is_err());
    }

    #[test]
    fn seaweed_angles_saturate_at_pi() {
        let s = SpaceModel::seaweed();
        let sched: Vec<f64> = (0..=20).map(|k| 10f64.powf(k as f64 * 0.3)).collect();
        let est = angle_between(&s, &GeodesicRay::straight(0.0), &GeodesicRay::straight(4.0), &sched, &cfg()).unwrap();
        assert_abs_diff_eq!(est.value, PI, epsilon = 1e-3);
        let est = angle_between(&s, &GeodesicRay::straight(0.0), &GeodesicRay::straight(2.0), &sched, &cfg()).unwrap();
        assert_abs_diff_eq!(est.value, 2.0, epsilon = 1e-3);
        assert!(est.max_decrease() <= 1e-12);
    }

    #[test]
    fn tits_chain_cases() {
        let sched = cfg().default_schedule();
        let e = SpaceModel::euclidean(2);
        let est =
            tits_distance_chain(&e, &GeodesicRay::planar(0.0), &GeodesicRay::planar(FRAC_PI_3), 4, &sched, &cfg())
                .unwrap();
        assert_abs_diff_eq!(est.value, FRAC_PI_3, epsilon = 1e-9);
        let t = forked(1.0);
        let est = tits_distance_chain(&t, &GeodesicRay::tree(0), &GeodesicRay::tree(1), 8, &sched, &cfg()).unwrap();
        assert_eq!(est.value, f64::INFINITY);
        assert_eq!(est.status, ConvergenceStatus::Diverged);
        let s = SpaceModel::seaweed();
        let est = tits_distance_chain(
            &s,
            &GeodesicRay::straight(0.0),
            &GeodesicRay::spiral(Orientation::Positive),
            8,
            &sched,
            &cfg(),
        )
        .unwrap();
        assert_eq!(est.value, f64::INFINITY);
    }

    #[test]
    fn line_antipodes_are_unsupported() {
        let e = SpaceModel::euclidean(1);
        let sched = cfg().default_schedule();
        let r =
            tits_distance_chain(&e, &GeodesicRay::euclidean([1.0]), &GeodesicRay::euclidean([-1.0]), 4, &sched, &cfg());
        assert!(matches!(r, Err(Error::Unsupported(_))));
    }

    #[test]
    fn cone_metric_examples() {
        let a = ConePoint::new(1.0, GeodesicRay::planar(0.0));
        let b = ConePoint::new(1.0, GeodesicRay::planar(1.0));
        assert_abs_diff_eq!(cone_metric(&a, &b, FRAC_PI_2).unwrap(), 2f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(cone_metric_radii(2.0, 3.0, 4.0).unwrap(), 5.0, epsilon = 1e-15);
        assert_abs_diff_eq!(cone_metric_radii(0.0, 3.0, 0.7).unwrap(), 3.0, epsilon = 1e-15);
        assert!(cone_metric_radii(-1.0, 3.0, 0.7).is_err());
        assert_eq!(ConePoint::new(0.0, GeodesicRay::planar(0.0)), ConePoint::new(0.0, GeodesicRay::planar(2.0)));
    }

    #[test]
    fn flat_sector_in_the_plane_and_failure_in_trees() {
        let e = SpaceModel::euclidean(2);
        let grid: Vec<(f64, f64)> =
            [0.5, 1.0, 3.0, 10.0].iter().flat_map(|&s| [0.5, 2.0, 7.0].map(|t| (s, t))).collect();
        let sched = cfg().default_schedule();
        let rep =
            flat_sector_check(&e, &GeodesicRay::planar(0.2), &GeodesicRay::planar(2.0), &grid, &sched, 1e-9, &cfg())
                .unwrap();
        assert!(rep.flat);
        assert!(rep.max_deviation < 1e-12);
        let star = MetricTree::new(vec![VertexLabel::Int(0)], vec![], 0, Some(vec![(0, vec![1.0]), (0, vec![2.0])]));
        let t = SpaceModel::tree(star.unwrap());
        let r = flat_sector_check(&t, &GeodesicRay::tree(0), &GeodesicRay::tree(1), &grid, &sched, 1e-9, &cfg());
        assert!(matches!(r, Err(Error::PreconditionFailed(_))));
    }
}
