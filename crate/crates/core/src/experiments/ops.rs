use std::f64::consts::{PI, TAU};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Context, ModelKind, Operation, Outcome, SpaceSpec};
use crate::boundary_metrics::{
    angle_between, cone_metric_radii, tits_distance_chain, visual_distance, BoundaryConfig, ConePoint,
    ConvergenceStatus, GeodesicRay,
};
use crate::error::{Error, Result};
use crate::oracle::{reference_angle, seaweed_oracle_distance};
use crate::quasi_isometry::{
    circle_coverage, distortion, euclidean_spiral, lift_to_seaweed, max_twist, morse_probe, pushforward_at_scale,
    MorseVerdict, QuasiIsometryMap, SpiralMap, SpiralProfile,
};
use crate::rescaling::{
    audit_lattice, collapse_schedule, cone_distance_at_scale, cut_point_witness, psi_eval, scale_lattice_bounds,
    theta_map,
};
use crate::sampling::{random_cone_point, random_divergent_sequence, random_point, random_ray, HausdorffInstance};
use crate::space_models::{Orientation, Point, SpaceModel};

pub(super) fn run(ctx: &mut Context<'_>) -> Result<Outcome> {
    match ctx.scenario.operation {
        Operation::MetricAudit => metric_audit(ctx),
        Operation::SineFormula => sine_formula(ctx),
        Operation::SeaweedTits => seaweed_tits(ctx),
        Operation::ConeConverge => cone_converge(ctx),
        Operation::ThetaCommute => theta_commute(ctx),
        Operation::CollapseSchedule => collapse(ctx),
        Operation::ScaleLattice => scale_lattice(ctx),
        Operation::SpiralSweep => spiral_sweep(ctx),
        Operation::SeaweedPushforward => seaweed_pushforward(ctx),
        Operation::MorseProbe => morse(ctx),
        Operation::HausdorffBound => hausdorff(ctx),
        Operation::CutPoint => cut_point(ctx),
        Operation::SeaweedOracle => seaweed_oracle(ctx),
    }
}

/// Model families an operation runs on; empty for operations that take no
/// spaces.
fn supported_models(op: Operation) -> &'static [ModelKind] {
    use ModelKind::*;
    match op {
        Operation::MetricAudit | Operation::SineFormula | Operation::ConeConverge | Operation::ThetaCommute => {
            &[Euclidean, Tree, Seaweed, Product]
        }
        Operation::CollapseSchedule | Operation::MorseProbe => &[Euclidean, Tree, Seaweed],
        Operation::SeaweedTits | Operation::SeaweedPushforward | Operation::SeaweedOracle => &[Seaweed],
        Operation::CutPoint => &[Tree],
        Operation::ScaleLattice | Operation::SpiralSweep | Operation::HausdorffBound => &[],
    }
}

pub(super) fn validate_params(ctx: &Context<'_>) -> Result<()> {
    let op = ctx.scenario.operation;
    let models = supported_models(op);
    if models.is_empty() && !ctx.scenario.spaces.is_empty() {
        return Err(Error::param("spaces", format!("{op} takes no spaces")));
    }
    if !models.is_empty() {
        for spec in ctx.spaces()? {
            if !models.contains(&spec.kind()) {
                return Err(Error::Unsupported(format!("{op} does not run on {}", spec.label())));
            }
        }
    }
    match op {
        Operation::MetricAudit => ctx.params::<MetricAuditParams>().map(drop),
        Operation::SineFormula => ctx.params::<SineParams>().map(drop),
        Operation::SeaweedTits => ctx.params::<TitsParams>().map(drop),
        Operation::ConeConverge => ctx.params::<ConeParams>().map(drop),
        Operation::ThetaCommute => ctx.params::<CommuteParams>().map(drop),
        Operation::CollapseSchedule => ctx.params::<CollapseParams>().map(drop),
        Operation::ScaleLattice => ctx.params::<LatticeParams>().map(drop),
        Operation::SpiralSweep => ctx.params::<SweepParams>().map(drop),
        Operation::SeaweedPushforward => ctx.params::<PushforwardParams>().map(drop),
        Operation::MorseProbe => ctx.params::<MorseParams>().map(drop),
        Operation::HausdorffBound => ctx.params::<HausdorffParams>().map(drop),
        Operation::CutPoint => ctx.params::<CutPointParams>().map(drop),
        Operation::SeaweedOracle => ctx.params::<OracleParams>().map(drop),
    }
}

/// Default parameters of an operation, as written into templates.
pub(super) fn default_params(op: Operation) -> serde_json::Map<String, serde_json::Value> {
    let v = match op {
        Operation::MetricAudit => serde_json::to_value(MetricAuditParams::default()),
        Operation::SineFormula => serde_json::to_value(SineParams::default()),
        Operation::SeaweedTits => serde_json::to_value(TitsParams::default()),
        Operation::ConeConverge => serde_json::to_value(ConeParams::default()),
        Operation::ThetaCommute => serde_json::to_value(CommuteParams::default()),
        Operation::CollapseSchedule => serde_json::to_value(CollapseParams::default()),
        Operation::ScaleLattice => serde_json::to_value(LatticeParams::default()),
        Operation::SpiralSweep => serde_json::to_value(SweepParams::default()),
        Operation::SeaweedPushforward => serde_json::to_value(PushforwardParams::default()),
        Operation::MorseProbe => serde_json::to_value(MorseParams::default()),
        Operation::HausdorffBound => serde_json::to_value(HausdorffParams::default()),
        Operation::CutPoint => serde_json::to_value(CutPointParams::default()),
        Operation::SeaweedOracle => serde_json::to_value(OracleParams::default()),
    };
    match v {
        Ok(serde_json::Value::Object(m)) => m,
        _ => unreachable!("parameter structs serialize to objects"),
    }
}

fn doubling(from: f64, to: f64) -> Vec<f64> {
    let mut out = vec![from];
    while out[out.len() - 1] * 2.0 <= to {
        out.push(out[out.len() - 1] * 2.0);
    }
    out
}

/// Doubling schedule from 1 that ends exactly at `t_max`.
fn doubling_to(t_max: f64) -> Vec<f64> {
    let mut out = doubling(1.0, t_max);
    if out[out.len() - 1] < t_max {
        out.push(t_max);
    }
    out
}

fn schedule_or(ctx: &Context<'_>, default: Vec<f64>) -> Result<Vec<f64>> {
    match &ctx.scenario.schedule {
        Some(s) => s.values(),
        None => Ok(default),
    }
}

fn max_of(xs: impl IntoIterator<Item = f64>) -> f64 {
    xs.into_iter().fold(0.0, f64::max)
}

/// Unit vector at angle `phi` in the first two coordinates.
fn planar_ray(dimension: usize, phi: f64) -> Result<GeodesicRay> {
    if dimension < 2 {
        return Err(Error::param("dimension", "planar rays need dimension at least 2"));
    }
    let mut v = vec![0.0; dimension];
    v[0] = phi.cos();
    v[1] = phi.sin();
    Ok(GeodesicRay::euclidean(v))
}

fn euclidean_dimension(space: &SpaceModel) -> usize {
    match space {
        SpaceModel::Euclidean { dimension } => *dimension,
        _ => 0,
    }
}

/// Draws one space per case for random specs, or shares a single instance.
fn instances(ctx: &mut Context<'_>, spec: &SpaceSpec, n: usize) -> Result<Vec<SpaceModel>> {
    if spec.is_random() {
        (0..n).map(|_| spec.instantiate(&mut ctx.rng)).collect()
    } else {
        let s = spec.instantiate(&mut ctx.rng)?;
        Ok(vec![s; n])
    }
}

// ---------------------------------------------------------------- metric-audit

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct MetricAuditParams {
    triples: usize,
    /// Constant `C` of the visual metric.
    c: f64,
    /// Probability that the second ray of a triple repeats the first.
    duplicate_rate: f64,
}

impl Default for MetricAuditParams {
    fn default() -> Self {
        MetricAuditParams { triples: 500, c: 1.0, duplicate_rate: 0.1 }
    }
}

struct TripleAudit {
    d_ab: f64,
    excess: f64,
    asymmetry: f64,
    zero_ok: bool,
}

fn audit_triple(space: &SpaceModel, r: &[GeodesicRay; 3], c: f64, cfg: &BoundaryConfig) -> Result<TripleAudit> {
    let d = |i: usize, j: usize| visual_distance(space, &r[i], &r[j], c, cfg).map(|v| v.value);
    let (ab, ba, bc, cb, ac, ca) = (d(0, 1)?, d(1, 0)?, d(1, 2)?, d(2, 1)?, d(0, 2)?, d(2, 0)?);
    let excess = (ac - (ab + bc)).max(ab - (ac + cb)).max(bc - (ba + ac));
    let asymmetry = max_of([(ab - ba).abs(), (bc - cb).abs(), (ac - ca).abs()]);
    let mut zero_ok = d(0, 0)? == 0.0;
    for (i, j, v) in [(0, 1, ab), (1, 2, bc), (0, 2, ac)] {
        zero_ok &= (v == 0.0) == r[i].same_as(&r[j]);
    }
    Ok(TripleAudit { d_ab: ab, excess, asymmetry, zero_ok })
}

fn metric_audit(ctx: &mut Context<'_>) -> Result<Outcome> {
    let p: MetricAuditParams = ctx.params()?;
    let tol = ctx.tol("triangle", 1e-9);
    let scenario = ctx.scenario;
    let mut out = Outcome::default();
    for spec in ctx.spaces()?.to_vec() {
        let spaces = instances(ctx, &spec, p.triples)?;
        let mut cases = Vec::with_capacity(p.triples);
        for space in spaces {
            let a = random_ray(&mut ctx.rng, &space);
            let b = if ctx.rng.gen_bool(p.duplicate_rate.clamp(0.0, 1.0)) {
                a.clone()
            } else {
                random_ray(&mut ctx.rng, &space)
            };
            let c = random_ray(&mut ctx.rng, &space);
            cases.push((space, [a, b, c]));
        }
        let cfg = ctx.cfg;
        let audits =
            cases.par_iter().map(|(space, r)| audit_triple(space, r, p.c, &cfg)).collect::<Result<Vec<_>>>()?;
        let label = spec.label();
        for (i, a) in audits.iter().enumerate() {
            out.row(
                format!("{label}#{i}"),
                a.d_ab,
                a.excess,
                a.asymmetry,
                a.excess <= tol && a.asymmetry == 0.0 && a.zero_ok,
            );
        }
        let worst = max_of(audits.iter().map(|a| a.excess));
        out.check(
            format!("triangle inequality on {label}"),
            worst <= tol,
            format!("{} triples, worst excess {worst:e}", audits.len()),
        );
        let asym = max_of(audits.iter().map(|a| a.asymmetry));
        out.check(format!("symmetry on {label}"), asym == 0.0, format!("largest asymmetry {asym:e}"));
        let zero = audits.iter().filter(|a| !a.zero_ok).count();
        out.check(format!("zero iff equal on {label}"), zero == 0, format!("{zero} triples with a misplaced zero"));
    }
    let _ = scenario;
    Ok(out)
}

// ---------------------------------------------------------------- sine-formula

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct SineParams {
    /// Last parameter of the default schedule.
    t_max: f64,
    /// Angles between planar rays in Euclidean spaces.
    angles: Vec<f64>,
    /// Random pairs of distinct rays per tree or product space.
    pairs: usize,
    /// Seaweed pairs `Straight(theta_base)`, `Straight(theta_base + Δ)`.
    seaweed_deltas: Vec<f64>,
    theta_base: f64,
}

impl Default for SineParams {
    fn default() -> Self {
        SineParams {
            t_max: 1e6,
            angles: vec![0.25, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0, PI],
            pairs: 20,
            seaweed_deltas: vec![0.5, 1.0, 2.0, 3.0, 4.0, 6.0],
            theta_base: -1.0,
        }
    }
}

fn sine_formula(ctx: &mut Context<'_>) -> Result<Outcome> {
    let p: SineParams = ctx.params()?;
    let schedule = schedule_or(ctx, doubling_to(p.t_max))?;
    let mut out = Outcome::default();
    for spec in ctx.spaces()?.to_vec() {
        let (tol, tol_name) = match spec.kind() {
            ModelKind::Euclidean => (ctx.tol("euclidean", 1e-6), "euclidean"),
            ModelKind::Tree => (ctx.tol("tree", 0.0), "tree"),
            ModelKind::Seaweed => (ctx.tol("seaweed", 1e-3), "seaweed"),
            ModelKind::Product => (ctx.tol("product", 1e-3), "product"),
        };
        let mut cases: Vec<(SpaceModel, GeodesicRay, GeodesicRay, String)> = Vec::new();
        match spec.kind() {
            ModelKind::Euclidean => {
                let space = spec.instantiate(&mut ctx.rng)?;
                let dim = euclidean_dimension(&space);
                for &phi in &p.angles {
                    cases.push((space.clone(), planar_ray(dim, 0.0)?, planar_ray(dim, phi)?, format!("phi={phi}")));
                }
            }
            ModelKind::Seaweed => {
                let space = spec.instantiate(&mut ctx.rng)?;
                for &d in &p.seaweed_deltas {
                    let (a, b) = (GeodesicRay::straight(p.theta_base), GeodesicRay::straight(p.theta_base + d));
                    cases.push((space.clone(), a, b, format!("delta={d}")));
                }
            }
            ModelKind::Tree | ModelKind::Product => {
                for (i, space) in instances(ctx, &spec, p.pairs)?.into_iter().enumerate() {
                    let a = random_ray(&mut ctx.rng, &space);
                    let mut b = random_ray(&mut ctx.rng, &space);
                    for _ in 0..64 {
                        if !b.same_as(&a) {
                            break;
                        }
                        b = random_ray(&mut ctx.rng, &space);
                    }
                    cases.push((space, a, b, format!("pair{i}")));
                }
            }
        }
        let cfg = ctx.cfg;
        let results = cases
            .par_iter()
            .map(|(space, a, b, _)| -> Result<(f64, f64)> {
                Ok((reference_angle(space, a, b)?, angle_between(space, a, b, &schedule, &cfg)?.value))
            })
            .collect::<Result<Vec<_>>>()?;
        let label = spec.label();
        let mut worst = 0.0f64;
        for ((_, _, _, name), (expected, estimate)) in cases.iter().zip(&results) {
            let err = (estimate - expected).abs();
            worst = worst.max(err);
            out.row(format!("{label}:{name}"), *expected, *estimate, err, err <= tol);
        }
        out.check(
            format!("sine formula on {label}"),
            worst <= tol,
            format!(
                "{} pairs at t = {}, worst error {worst:e} ({tol_name} tolerance {tol:e})",
                results.len(),
                schedule[schedule.len() - 1]
            ),
        );
    }
    Ok(out)
}

// ---------------------------------------------------------------- seaweed-tits

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct TitsParams {
    chain: usize,
    /// Pairs of asymptotic angles joined by interpolating chains.
    pairs: Vec<[f64; 2]>,
    /// Straight directions whose angle to both spirals is measured.
    spiral_thetas: Vec<f64>,
}

impl Default for TitsParams {
    fn default() -> Self {
        TitsParams { chain: 8, pairs: vec![[0.0, 4.0], [-2.0, 1.0], [1.0, 7.5]], spiral_thetas: vec![-3.0, 0.0, 3.0] }
    }
}

fn seaweed_tits(ctx: &mut Context<'_>) -> Result<Outcome> {
    let p: TitsParams = ctx.params()?;
    let space = SpaceModel::seaweed();
    let schedule = schedule_or(ctx, ctx.cfg.default_schedule())?;
    let (chain_tol, angle_tol) = (ctx.tol("chain", 1e-2), ctx.tol("angle", 1e-3));
    let cfg = ctx.cfg;
    let mut out = Outcome::default();

    let chains = p
        .pairs
        .par_iter()
        .map(|[a, b]| {
            tits_distance_chain(
                &space,
                &GeodesicRay::straight(*a),
                &GeodesicRay::straight(*b),
                p.chain,
                &schedule,
                &cfg,
            )
        })
        .collect::<Result<Vec<_>>>()?;
    let mut worst = 0.0f64;
    for ([a, b], est) in p.pairs.iter().zip(&chains) {
        let expected = (b - a).abs();
        let err = (est.value - expected).abs();
        worst = worst.max(err);
        out.row(format!("chain {a}->{b}"), expected, est.value, est.last_increment, err <= chain_tol);
    }
    out.check(
        "tits distance along the line",
        worst <= chain_tol,
        format!("chain size {}, worst error {worst:e}", p.chain),
    );

    let spirals = [GeodesicRay::spiral(Orientation::Positive), GeodesicRay::spiral(Orientation::Negative)];
    let mut pairs: Vec<(GeodesicRay, GeodesicRay, String)> = Vec::new();
    for &theta in &p.spiral_thetas {
        for s in &spirals {
            pairs.push((
                GeodesicRay::straight(theta),
                s.clone(),
                format!("straight({theta}) to {}", space.tits_component(s)),
            ));
        }
    }
    pairs.push((spirals[0].clone(), spirals[1].clone(), "spiral(+) to spiral(-)".into()));
    let angles = pairs
        .par_iter()
        .map(|(a, b, _)| angle_between(&space, a, b, &schedule, &cfg).map(|e| e.value))
        .collect::<Result<Vec<f64>>>()?;
    let mut worst = 0.0f64;
    for ((_, _, name), v) in pairs.iter().zip(&angles) {
        let err = (v - PI).abs();
        worst = worst.max(err);
        out.row(format!("angle {name}"), PI, *v, err, err <= angle_tol);
    }
    out.check("spirals are isolated at angle pi", worst <= angle_tol, format!("worst error {worst:e}"));

    let apart = tits_distance_chain(&space, &GeodesicRay::straight(0.0), &spirals[0], p.chain, &schedule, &cfg)?;
    let diverged = apart.status == ConvergenceStatus::Diverged && apart.value == f64::INFINITY;
    out.row("chain straight(0)->spiral(+)", f64::INFINITY, apart.value, 0.0, diverged);
    out.check("line and spirals lie in different components", diverged, format!("{:?}", apart.status));
    Ok(out)
}

// ---------------------------------------------------------------- cone-converge

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct ConeParams {
    /// Random cone point pairs per space.
    pairs: usize,
    /// Largest scale of the default doubling schedule.
    scale_max: f64,
    /// Cone radii used with explicit scenario rays.
    radii: [f64; 2],
}

impl Default for ConeParams {
    fn default() -> Self {
        ConeParams { pairs: 200, scale_max: (1u64 << 20) as f64, radii: [1.0, 1.0] }
    }
}

fn cone_converge(ctx: &mut Context<'_>) -> Result<Outcome> {
    let p: ConeParams = ctx.params()?;
    let schedule = schedule_or(ctx, doubling(1.0, p.scale_max))?;
    let (match_tol, tree_tol, mono_tol) = (ctx.tol("match", 1e-4), ctx.tol("tree", 1e-9), ctx.tol("monotone", 1e-9));
    let cfg = ctx.cfg;
    let mut out = Outcome::default();
    let rays = ctx.scenario.rays.clone();
    for spec in ctx.spaces()?.to_vec() {
        let label = spec.label();
        let tol = if spec.kind() == ModelKind::Tree { tree_tol } else { match_tol };
        if rays.len() >= 2 {
            // explicit pair: report the whole trace
            let space = spec.instantiate(&mut ctx.rng)?;
            let a = ConePoint::new(p.radii[0], rays[0].clone());
            let b = ConePoint::new(p.radii[1], rays[1].clone());
            let expected = cone_metric_radii(a.t, b.t, reference_angle(&space, &a.ray, &b.ray)?)?;
            let est = cone_distance_at_scale(&space, &a, &b, &schedule, &cfg)?;
            let mut prev = 0.0f64;
            for tp in &est.trace {
                let step_ok = tp.estimate >= prev - mono_tol * prev.max(1.0);
                out.row(
                    format!("{label}:s={}", tp.param),
                    tp.param,
                    tp.estimate,
                    (tp.estimate - expected).abs(),
                    step_ok,
                );
                prev = tp.estimate;
            }
            let err = (est.value - expected).abs();
            out.check(
                format!("cone metric on {label}"),
                err <= tol,
                format!("limit {} against {expected}, error {err:e}", est.value),
            );
            continue;
        }
        let spaces = instances(ctx, &spec, p.pairs)?;
        let cases: Vec<(SpaceModel, ConePoint, ConePoint)> = spaces
            .into_iter()
            .map(|space| {
                let a = random_cone_point(&mut ctx.rng, &space);
                let b = random_cone_point(&mut ctx.rng, &space);
                (space, a, b)
            })
            .collect();
        let results = cases
            .par_iter()
            .map(|(space, a, b)| -> Result<(f64, f64, f64)> {
                let expected = cone_metric_radii(a.t, b.t, reference_angle(space, &a.ray, &b.ray)?)?;
                let est = cone_distance_at_scale(space, a, b, &schedule, &cfg)?;
                Ok((expected, est.value, est.max_decrease()))
            })
            .collect::<Result<Vec<_>>>()?;
        let (mut worst, mut worst_drop) = (0.0f64, 0.0f64);
        for (i, (expected, value, drop)) in results.iter().enumerate() {
            let err = (value - expected).abs();
            let rel_drop = drop / value.max(1.0);
            worst = worst.max(err);
            worst_drop = worst_drop.max(rel_drop);
            out.row(format!("{label}#{i}"), *expected, *value, *drop, err <= tol && rel_drop <= mono_tol);
        }
        out.check(
            format!("cone metric on {label}"),
            worst <= tol,
            format!("{} pairs at scale {}, worst error {worst:e}", results.len(), schedule[schedule.len() - 1]),
        );
        out.check(
            format!("monotone convergence on {label}"),
            worst_drop <= mono_tol,
            format!("largest relative decrease {worst_drop:e}"),
        );
    }
    Ok(out)
}

// ---------------------------------------------------------------- theta-commute

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct CommuteParams {
    samples: usize,
    s_min: f64,
    s_max: f64,
    t_max: f64,
}

impl Default for CommuteParams {
    fn default() -> Self {
        CommuteParams { samples: 1000, s_min: 1.0, s_max: 1e3, t_max: 3.0 }
    }
}

struct CommuteCase {
    space: SpaceModel,
    s: f64,
    s2: f64,
    t: f64,
    ray: GeodesicRay,
    x: Point,
    y: Point,
}

/// Commutation gap, Lipschitz excess and basepoint error of one sample.
fn commute_case(c: &CommuteCase) -> Result<(f64, f64, f64)> {
    let sp = &c.space;
    let lhs = theta_map(sp, c.s, c.s2, &psi_eval(sp, c.s, c.t, &c.ray)?)?;
    let rhs = psi_eval(sp, c.s2, c.t, &c.ray)?;
    let gap = sp.distance(&lhs, &rhs)? / c.s2;
    let (tx, ty) = (theta_map(sp, c.s, c.s2, &c.x)?, theta_map(sp, c.s, c.s2, &c.y)?);
    let lip = sp.distance(&tx, &ty)? / c.s2 - sp.distance(&c.x, &c.y)? / c.s;
    let base = sp.basepoint();
    let before = sp.distance(&base, &c.x)? / c.s;
    let after = sp.distance(&base, &tx)? / c.s2;
    Ok((gap, lip, (after - before).abs() / before.max(1.0)))
}

fn theta_commute(ctx: &mut Context<'_>) -> Result<Outcome> {
    let p: CommuteParams = ctx.params()?;
    if !(p.s_min > 0.0 && p.s_max >= p.s_min && p.t_max > 0.0) {
        return Err(Error::param("s_min", "need 0 < s_min <= s_max and t_max > 0"));
    }
    let (commute_tol, lip_tol, base_tol) =
        (ctx.tol("commute", 1e-12), ctx.tol("lipschitz", 1e-9), ctx.tol("basepoint", 1e-12));
    let mut out = Outcome::default();
    for spec in ctx.spaces()?.to_vec() {
        let spaces = instances(ctx, &spec, p.samples)?;
        let (ln_lo, ln_hi) = (p.s_min.ln(), p.s_max.ln());
        let cases: Vec<CommuteCase> = spaces
            .into_iter()
            .map(|space| {
                let rng = &mut ctx.rng;
                let s = rng.gen_range(ln_lo..=ln_hi).exp();
                let s2 = if rng.gen_bool(0.05) { s } else { s * rng.gen_range(0.01..=1.0) };
                let t = rng.gen_range(0.0..=p.t_max);
                let ray = random_ray(rng, &space);
                let x = random_point(rng, &space, s * p.t_max);
                let y = random_point(rng, &space, s * p.t_max);
                CommuteCase { space, s, s2, t, ray, x, y }
            })
            .collect();
        let results = cases.par_iter().map(commute_case).collect::<Result<Vec<_>>>()?;
        let label = spec.label();
        for (i, (c, (gap, lip, base))) in cases.iter().zip(&results).enumerate() {
            out.row(
                format!("{label}#{i}"),
                c.s2 / c.s,
                *gap,
                *lip,
                *gap <= commute_tol && *lip <= lip_tol && *base <= base_tol,
            );
        }
        let g = max_of(results.iter().map(|r| r.0));
        let l = results.iter().map(|r| r.1).fold(f64::NEG_INFINITY, f64::max);
        let b = max_of(results.iter().map(|r| r.2));
        out.check(
            format!("retraction commutes with rescaling on {label}"),
            g <= commute_tol,
            format!("largest rescaled gap {g:e}"),
        );
        out.check(format!("retraction is 1-Lipschitz on {label}"), l <= lip_tol, format!("largest excess {l:e}"));
        out.check(
            format!("rescaled basepoint distance preserved on {label}"),
            b <= base_tol,
            format!("largest relative error {b:e}"),
        );
    }
    Ok(out)
}

// ---------------------------------------------------------------- collapse-schedule

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct CollapseParams {
    /// Length of the constructed families in the plane and the seaweed cover.
    family_len: usize,
    c: f64,
    t0: f64,
}

impl Default for CollapseParams {
    fn default() -> Self {
        CollapseParams { family_len: 12, c: 1.0, t0: 1.0 }
    }
}

/// Space, target ray, rays converging to it, and a family name.
type Family = (SpaceModel, GeodesicRay, Vec<GeodesicRay>, &'static str);

type Offset = (&'static str, fn(f64) -> f64);

/// Three ray families converging to a common target.
fn collapse_families(ctx: &mut Context<'_>, spec: &SpaceSpec, len: usize) -> Result<Vec<Family>> {
    let offsets: [Offset; 3] =
        [("2^-n", |n| 0.5f64.powf(n)), ("-1/n^2", |n| -1.0 / (n * n)), ("3n^-1.5", |n| 3.0 * n.powf(-1.5))];
    match spec.kind() {
        ModelKind::Euclidean => {
            let space = spec.instantiate(&mut ctx.rng)?;
            let dim = euclidean_dimension(&space);
            let phi0 = 0.3;
            offsets
                .iter()
                .map(|(name, f)| {
                    let rays = (1..=len).map(|n| planar_ray(dim, phi0 + f(n as f64))).collect::<Result<Vec<_>>>()?;
                    Ok((space.clone(), planar_ray(dim, phi0)?, rays, *name))
                })
                .collect()
        }
        ModelKind::Seaweed => {
            let space = spec.instantiate(&mut ctx.rng)?;
            let theta0 = 0.5;
            Ok(offsets
                .iter()
                .map(|(name, f)| {
                    let rays = (1..=len).map(|n| GeodesicRay::straight(theta0 + f(n as f64))).collect();
                    (space.clone(), GeodesicRay::straight(theta0), rays, *name)
                })
                .collect())
        }
        ModelKind::Tree => {
            let spaces = instances(ctx, spec, 3)?;
            let names = ["all branches", "every other branch", "deeper half"];
            spaces
                .into_iter()
                .zip(names)
                .map(|(space, name)| {
                    let tree = space.as_tree().expect("tree model");
                    let branches = tree.branch_count();
                    let depth = |b: usize| tree.vertex_depth(tree.branch_attachment(b).expect("branch exists"));
                    let target = (0..branches)
                        .max_by(|&a, &b| depth(a).total_cmp(&depth(b)).then(b.cmp(&a)))
                        .expect("trees have branches");
                    let mut others: Vec<(f64, usize)> = (0..branches)
                        .filter(|&b| b != target)
                        .map(|b| (tree.shared_prefix(b, target).unwrap_or(0.0), b))
                        .collect();
                    others.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
                    let chosen: Vec<usize> = match name {
                        "all branches" => others.iter().map(|o| o.1).collect(),
                        "every other branch" => others.iter().rev().step_by(2).rev().map(|o| o.1).collect(),
                        _ => others[others.len() / 2..].iter().map(|o| o.1).collect(),
                    };
                    if chosen.is_empty() {
                        return Err(Error::Degenerate(format!("{} has a single branch", spec.label())));
                    }
                    Ok((
                        space.clone(),
                        GeodesicRay::tree(target),
                        chosen.into_iter().map(GeodesicRay::tree).collect(),
                        name,
                    ))
                })
                .collect()
        }
        ModelKind::Product => Err(Error::Unsupported("collapse families in products".into())),
    }
}

fn collapse(ctx: &mut Context<'_>) -> Result<Outcome> {
    let p: CollapseParams = ctx.params()?;
    let mut out = Outcome::default();
    let cfg = ctx.cfg;
    for spec in ctx.spaces()?.to_vec() {
        let label = spec.label();
        for (space, target, rays, name) in collapse_families(ctx, &spec, p.family_len)? {
            let rep = collapse_schedule(&space, &rays, &target, p.c, p.t0, &cfg)?;
            for r in &rep.rows {
                out.row(
                    format!("{label}/{name}/{}", r.index + 1),
                    r.scale,
                    r.max_gap,
                    r.converse_bound,
                    r.violations == 0 && r.visual <= r.converse_bound * (1.0 + 1e-9),
                );
            }
            let checked: u64 = rep.rows.iter().map(|r| r.checked).sum();
            let skipped: u64 = rep.rows.iter().map(|r| r.skipped).sum();
            out.check(
                format!("collapse bound on {label} ({name})"),
                rep.bound_holds,
                format!("{checked} samples checked, {skipped} radii beyond d_n skipped"),
            );
            out.check(
                format!("converse bound on {label} ({name})"),
                rep.converse_holds,
                format!("{} rays", rep.rows.len()),
            );
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------- scale-lattice

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct LatticeParams {
    sequences: usize,
    prefix: u64,
}

impl Default for LatticeParams {
    fn default() -> Self {
        LatticeParams { sequences: 10, prefix: 10_000 }
    }
}

fn scale_lattice(ctx: &mut Context<'_>) -> Result<Outcome> {
    let p: LatticeParams = ctx.params()?;
    if p.sequences == 0 || p.prefix == 0 {
        return Err(Error::param("sequences", "need at least one sequence and a positive prefix"));
    }
    let seqs = (0..p.sequences).map(|_| random_divergent_sequence(&mut ctx.rng)).collect::<Result<Vec<_>>>()?;
    let (upper, lower) = scale_lattice_bounds(&seqs, p.prefix)?;
    let audit = audit_lattice(&seqs, &upper, &lower, p.prefix)?;
    let mut out = Outcome::default();
    let mut ns: Vec<u64> = (1..=p.prefix.min(16)).collect();
    let mut n = 32;
    while n < p.prefix {
        ns.push(n);
        n *= 2;
    }
    ns.push(p.prefix);
    ns.dedup();
    for n in ns {
        let d: Vec<f64> = seqs.iter().map(|s| s.get(n)).collect::<Result<_>>()?;
        let (u, l) = (upper.get(n)?, lower.get(n)?);
        let k = d.len().min(usize::try_from(n).unwrap_or(usize::MAX));
        let level = crate::rescaling::lattice_level(&seqs, n)?;
        let dominates = d[..k].iter().all(|&x| u >= x);
        let below = d.iter().take(level.min(d.len() as u64) as usize).all(|&x| l <= x);
        let witness = level == 0 || l > (level - 1) as f64;
        out.row(format!("n={n}"), n as f64, u, l, dominates && below && witness);
    }
    out.check("upper bound dominates", audit.upper_violations == 0, format!("{} violations", audit.upper_violations));
    out.check(
        "lower bound below members on A_i",
        audit.lower_violations == 0,
        format!("{} violations", audit.lower_violations),
    );
    out.check(
        "lower bound exceeds i - 1 on A_i",
        audit.witness_violations == 0,
        format!("{} violations", audit.witness_violations),
    );
    out.check("lattice audit size", audit.checks > 0, format!("{} checks over n <= {}", audit.checks, p.prefix));
    Ok(out)
}

// ---------------------------------------------------------------- spiral-sweep

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct SweepParams {
    profile: SpiralProfile,
    theta0: f64,
    /// Number of grid steps between `s = 1` and `s_max`.
    grid: usize,
    s_max: f64,
    /// Covering radius required of the swept directions.
    resolution: f64,
    /// Range on which the twist is maximized.
    r_max: f64,
    /// Scales at which the `loglog` distortion is tabulated; the last one is
    /// asserted.
    distortion_scales: Vec<f64>,
}

impl Default for SweepParams {
    fn default() -> Self {
        SweepParams {
            profile: SpiralProfile::Log,
            theta0: 0.3,
            grid: 200,
            s_max: (4.0 * PI).exp(),
            resolution: 0.05,
            r_max: 1e12,
            distortion_scales: vec![32.0, 1024.0, 32768.0, (1u64 << 20) as f64],
        }
    }
}

fn wrap_angle(x: f64) -> f64 {
    let y = x.rem_euclid(TAU);
    if y > PI {
        y - TAU
    } else {
        y
    }
}

fn spiral_sweep(ctx: &mut Context<'_>) -> Result<Outcome> {
    let p: SweepParams = ctx.params()?;
    if p.grid == 0 || !(p.s_max > 1.0) {
        return Err(Error::param("grid", "need a positive grid and s_max > 1"));
    }
    let (twist_tol, dir_tol, dist_max) =
        (ctx.tol("twist", 1e-9), ctx.tol("direction", 1e-9), ctx.tol("distortion", 0.01));
    let mut out = Outcome::default();

    let (sup, at) = max_twist(&SpiralProfile::Log, p.r_max)?;
    out.row("sup r h'(r), log", at, sup, (sup - 1.0).abs(), (sup - 1.0).abs() <= twist_tol);
    out.check("twist of log is 1", (sup - 1.0).abs() <= twist_tol, format!("sup {sup} at r = {at}"));

    let radii: Vec<f64> = (2..=80).map(|k| (0.5 * k as f64).exp()).collect();
    let excess = max_of(radii.iter().map(|&r| SpiralProfile::LogLog.r_h_prime(r) - 1.0 / r.ln()));
    let ok = radii.iter().all(|&r| SpiralProfile::LogLog.r_h_prime(r) <= 1.0 / r.ln());
    out.check(
        "twist of loglog below 1/log r",
        ok,
        format!("{} radii in [e, e^40], largest excess {excess:e}", radii.len()),
    );

    let map = SpiralMap::new(p.profile.clone());
    let f = euclidean_spiral(&map, p.r_max.max(p.s_max))?;
    let alpha = GeodesicRay::planar(p.theta0);
    let step = p.s_max.ln() / p.grid as f64;
    let grid: Vec<f64> = (0..=p.grid).map(|k| (step * k as f64).exp()).collect();
    let pushed = grid.par_iter().map(|&s| pushforward_at_scale(&f, &alpha, s)).collect::<Result<Vec<_>>>()?;
    let mut angles = Vec::with_capacity(grid.len());
    let mut worst = 0.0f64;
    for (s, push) in grid.iter().zip(&pushed) {
        let GeodesicRay::Euclidean { direction } = &push.ray else {
            return Err(Error::Degenerate("planar pushforward is not a Euclidean ray".into()));
        };
        let measured = direction[1].atan2(direction[0]);
        let expected = p.theta0 + p.profile.h(*s);
        let err = wrap_angle(measured - expected).abs();
        worst = worst.max(err);
        angles.push(measured);
        out.row(format!("s={s}"), *s, expected, measured, err <= dir_tol);
    }
    out.check(
        "pushforward direction is theta0 + h(s)",
        worst <= dir_tol,
        format!("{} scales, worst error {worst:e}", grid.len()),
    );
    if p.profile == SpiralProfile::Log {
        let cover = circle_coverage(&angles);
        out.check(
            "directions cover the circle",
            cover <= p.resolution,
            format!("every direction within {cover:.4} of a sampled one for s <= {:.6e}", p.s_max),
        );
    }

    let loglog = SpiralMap::new(SpiralProfile::LogLog);
    let table = p.distortion_scales.par_iter().map(|&s| distortion(&loglog, s)).collect::<Result<Vec<f64>>>()?;
    for (s, d) in p.distortion_scales.iter().zip(&table) {
        out.row(format!("loglog distortion s={s}"), *s, *d, dist_max, true);
    }
    if let (Some(s), Some(d)) = (p.distortion_scales.last(), table.last()) {
        out.check("loglog distortion", *d <= dist_max, format!("distortion({s}) = {d:.5} against {dist_max}"));
    }
    Ok(out)
}

// ---------------------------------------------------------------- seaweed-pushforward

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct PushforwardParams {
    /// The `h = log` sweep runs over `s = e^k`, `k <= log_k_max`.
    log_k_max: u32,
    log_theta0: f64,
    /// Lower bound the last `h = log` pushforward angle must exceed.
    log_bound: f64,
    oscillating_theta0: f64,
    /// The oscillating sweep runs over `s = e^L`, `L` on a grid up to `l_max`.
    l_max: f64,
    l_step: f64,
    targets: [f64; 2],
    target_step: f64,
}

impl Default for PushforwardParams {
    fn default() -> Self {
        PushforwardParams {
            log_k_max: 100,
            log_theta0: 0.0,
            log_bound: 90.0,
            oscillating_theta0: 4.0,
            l_max: 150.0,
            l_step: 0.02,
            targets: [-10.0, 10.0],
            target_step: 0.1,
        }
    }
}

fn straight_angles(f: &QuasiIsometryMap, alpha: &GeodesicRay, grid: &[f64]) -> Result<Vec<Option<f64>>> {
    grid.par_iter()
        .map(|&s| {
            pushforward_at_scale(f, alpha, s).map(|push| match push.ray {
                GeodesicRay::Straight { theta } => Some(theta),
                _ => None,
            })
        })
        .collect()
}

fn seaweed_pushforward(ctx: &mut Context<'_>) -> Result<Outcome> {
    let p: PushforwardParams = ctx.params()?;
    if !(p.l_step > 0.0 && p.l_max > 0.0 && p.target_step > 0.0 && p.targets[0] <= p.targets[1]) {
        return Err(Error::param("l_step", "grid steps must be positive and targets ordered"));
    }
    let hit_tol = ctx.tol("hit", 0.05);
    let mut out = Outcome::default();

    let log_grid: Vec<f64> = (0..=p.log_k_max).map(|k| (k as f64).exp()).collect();
    let f_log = lift_to_seaweed(&SpiralMap::new(SpiralProfile::Log), log_grid[log_grid.len() - 1])?;
    let log_angles = straight_angles(&f_log, &GeodesicRay::straight(p.log_theta0), &log_grid)?;
    let mut increasing = true;
    let mut prev = f64::NEG_INFINITY;
    for (k, a) in log_angles.iter().enumerate() {
        let v = a.unwrap_or(f64::NAN);
        let ok = v > prev;
        increasing &= ok;
        prev = v;
        out.row(format!("log k={k}"), k as f64, v, p.log_theta0 + k as f64, ok);
    }
    let last = log_angles.last().copied().flatten().unwrap_or(f64::NAN);
    out.check(
        "log lift pushes directions to +infinity",
        increasing && last > p.log_bound,
        format!("angle increasing along s = e^k, reaching {last:.3} at k = {}", p.log_k_max),
    );

    let steps = (p.l_max / p.l_step).round() as usize;
    let osc_grid: Vec<f64> = (0..=steps).map(|i| (p.l_step * i as f64).exp()).collect();
    let f_osc = lift_to_seaweed(&SpiralMap::new(SpiralProfile::LogSinLogLog), osc_grid[osc_grid.len() - 1])?;
    let osc: Vec<f64> = straight_angles(&f_osc, &GeodesicRay::straight(p.oscillating_theta0), &osc_grid)?
        .into_iter()
        .flatten()
        .collect();
    let n_targets = ((p.targets[1] - p.targets[0]) / p.target_step).round() as usize;
    let mut missed = 0;
    for i in 0..=n_targets {
        let target = p.targets[0] + p.target_step * i as f64;
        let best =
            osc.iter().copied().min_by(|a, b| (a - target).abs().total_cmp(&(b - target).abs())).unwrap_or(f64::NAN);
        let err = (best - target).abs();
        missed += usize::from(!(err <= hit_tol));
        out.row(format!("target {target:.1}"), target, best, err, err <= hit_tol);
    }
    out.check(
        "oscillating lift reaches every target",
        missed == 0,
        format!(
            "{} targets in [{}, {}], {missed} missed, {} scales up to e^{}",
            n_targets + 1,
            p.targets[0],
            p.targets[1],
            osc_grid.len(),
            p.l_max
        ),
    );

    let mut all_fixed = true;
    for (name, f, grid) in [("log", &f_log, &log_grid), ("log_sin_loglog", &f_osc, &osc_grid)] {
        for sign in [Orientation::Positive, Orientation::Negative] {
            let alpha = GeodesicRay::spiral(sign);
            let fixed = grid
                .par_iter()
                .map(|&s| pushforward_at_scale(f, &alpha, s).map(|push| push.ray == alpha))
                .collect::<Result<Vec<bool>>>()?;
            let count = fixed.iter().filter(|&&b| b).count();
            all_fixed &= count == grid.len();
            out.row(
                format!("{name} {}", f_log.codomain.tits_component(&alpha)),
                grid.len() as f64,
                count as f64,
                0.0,
                count == grid.len(),
            );
        }
    }
    out.check("spiral rays are fixed at every scale", all_fixed, "both lifts, both orientations");
    Ok(out)
}

// ---------------------------------------------------------------- morse-probe

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct MorseParams {
    l: f64,
    c: f64,
    sizes: Vec<f64>,
    /// Asymptotic angles of the seaweed `Straight` rays probed.
    seaweed_straight: Vec<f64>,
    /// Direction of the planar ray probed in Euclidean spaces.
    euclidean_angle: f64,
}

impl Default for MorseParams {
    fn default() -> Self {
        MorseParams {
            l: 2.0,
            c: 1.0,
            sizes: (4..=12).map(|k| (1u64 << k) as f64).collect(),
            seaweed_straight: vec![0.0, 2.5],
            euclidean_angle: 0.7,
        }
    }
}

/// Verdict the boundary structure predicts for a ray: isolated points of the
/// boundary (tree ends, seaweed spirals) are Morse, directions in a flat
/// piece are not.
fn expected_verdict(ray: &GeodesicRay) -> MorseVerdict {
    match ray {
        GeodesicRay::Tree { .. } | GeodesicRay::Spiral { .. } => MorseVerdict::Bounded,
        _ => MorseVerdict::Growing,
    }
}

fn morse(ctx: &mut Context<'_>) -> Result<Outcome> {
    let p: MorseParams = ctx.params()?;
    let mut cases: Vec<(String, SpaceModel, GeodesicRay)> = Vec::new();
    let explicit = ctx.scenario.rays.clone();
    for spec in ctx.spaces()?.to_vec() {
        let space = spec.instantiate(&mut ctx.rng)?;
        let label = spec.label();
        let rays = if !explicit.is_empty() {
            explicit.clone()
        } else {
            match spec.kind() {
                ModelKind::Euclidean => vec![planar_ray(euclidean_dimension(&space), p.euclidean_angle)?],
                ModelKind::Tree => {
                    let tree = space.as_tree().expect("tree model");
                    let depth = |b: usize| tree.vertex_depth(tree.branch_attachment(b).expect("branch exists"));
                    let deepest =
                        (0..tree.branch_count()).max_by(|&a, &b| depth(a).total_cmp(&depth(b)).then(b.cmp(&a)));
                    deepest.map(GeodesicRay::tree).into_iter().collect()
                }
                ModelKind::Seaweed => {
                    let mut v: Vec<GeodesicRay> =
                        p.seaweed_straight.iter().map(|&t| GeodesicRay::straight(t)).collect();
                    v.push(GeodesicRay::spiral(Orientation::Positive));
                    v.push(GeodesicRay::spiral(Orientation::Negative));
                    v
                }
                ModelKind::Product => return Err(Error::Unsupported("Morse probes in products".into())),
            }
        };
        for r in rays {
            cases.push((format!("{label}:{}", space.tits_component(&r)), space.clone(), r));
        }
    }
    let results = cases
        .par_iter()
        .map(|(_, space, ray)| morse_probe(space, ray, p.l, p.c, &p.sizes))
        .collect::<Result<Vec<_>>>()?;
    let mut out = Outcome::default();
    for ((name, _, ray), res) in cases.iter().zip(&results) {
        let expected = expected_verdict(ray);
        let ok = res.verdict == expected;
        for (size, dev) in p.sizes.iter().zip(&res.deviations) {
            out.row(format!("{name} T={size}"), *size, *dev, res.max_deviation, ok);
        }
        out.check(
            format!("{name} is {expected:?}").to_lowercase(),
            ok,
            format!(
                "verdict {:?}, deviations {:?}",
                res.verdict,
                res.deviations.iter().map(|d| (d * 1e3).round() / 1e3).collect::<Vec<_>>()
            ),
        );
    }
    Ok(out)
}

// ---------------------------------------------------------------- hausdorff-bound

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct HausdorffParams {
    tuples: usize,
    samples: usize,
}

impl Default for HausdorffParams {
    fn default() -> Self {
        HausdorffParams { tuples: 100, samples: 400 }
    }
}

fn hausdorff(ctx: &mut Context<'_>) -> Result<Outcome> {
    let p: HausdorffParams = ctx.params()?;
    if p.samples < 2 {
        return Err(Error::param("samples", "need at least two samples per curve"));
    }
    let instances: Vec<HausdorffInstance> = (0..p.tuples).map(|_| HausdorffInstance::sample(&mut ctx.rng)).collect();
    let results = instances.par_iter().map(|h| h.evaluate(p.samples)).collect::<Result<Vec<_>>>()?;
    let mut out = Outcome::default();
    let (mut hyp, mut within) = (0, 0);
    for (i, (h, r)) in instances.iter().zip(&results).enumerate() {
        hyp += usize::from(r.hypotheses_hold);
        within += usize::from(r.measured <= r.bound);
        out.row(
            format!("tuple{i} L={:.3} M={:.3}", h.l, h.m),
            r.bound,
            r.measured,
            h.m,
            r.hypotheses_hold && r.measured <= r.bound,
        );
    }
    out.check("hypotheses verified on samples", hyp == results.len(), format!("{hyp} of {} tuples", results.len()));
    out.check(
        "Hausdorff distance within the bound",
        within == results.len(),
        format!("{within} of {} tuples", results.len()),
    );
    Ok(out)
}

// ---------------------------------------------------------------- cut-point

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct CutPointParams {
    trees: usize,
    t: f64,
    scales: Vec<f64>,
}

impl Default for CutPointParams {
    fn default() -> Self {
        CutPointParams { trees: 50, t: 1.0, scales: (-3..=10).map(|k| 2f64.powi(k)).collect() }
    }
}

fn cut_point(ctx: &mut Context<'_>) -> Result<Outcome> {
    let p: CutPointParams = ctx.params()?;
    let mut out = Outcome::default();
    for spec in ctx.spaces()?.to_vec() {
        let label = spec.label();
        let (mut agree, mut total) = (0usize, 0usize);
        for (i, space) in instances(ctx, &spec, p.trees)?.into_iter().enumerate() {
            let tree = space.as_tree().expect("tree model");
            if tree.branch_count() < 2 {
                return Err(Error::Degenerate(format!("tree {i} has a single branch")));
            }
            let b1 = ctx.rng.gen_range(0..tree.branch_count());
            let mut b2 = ctx.rng.gen_range(0..tree.branch_count() - 1);
            if b2 >= b1 {
                b2 += 1;
            }
            let (a, b) = (GeodesicRay::tree(b1), GeodesicRay::tree(b2));
            let prefix = tree.shared_prefix(b1, b2).expect("distinct branches");
            let mut scales = p.scales.clone();
            if prefix > 0.0 {
                scales.extend([0.999 * prefix / p.t, 1.001 * prefix / p.t]);
            }
            scales.sort_by(f64::total_cmp);
            for s in scales {
                let above = p.t * s > prefix;
                let (separated, meet, ok) = match cut_point_witness(&space, &a, &b, p.t, s) {
                    Ok(w) => (w.separated, w.meet_rescaled, above && w.separated),
                    Err(Error::Inconclusive(_)) => (false, f64::NAN, !above),
                    Err(e) => return Err(e),
                };
                total += 1;
                agree += usize::from(ok);
                out.row(format!("{label}#{i} s={s}"), s, f64::from(u8::from(separated)), meet, ok);
            }
        }
        out.check(
            format!("basepoint separates images past the prefix on {label}"),
            agree == total,
            format!("{agree} of {total} (tree, scale) cases"),
        );
    }
    Ok(out)
}

// ---------------------------------------------------------------- seaweed-oracle

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct OracleParams {
    pairs: usize,
    r_max: f64,
    /// Largest gap between circle nodes of the visibility graph.
    spacing: f64,
}

impl Default for OracleParams {
    fn default() -> Self {
        OracleParams { pairs: 100, r_max: 50.0, spacing: 1e-3 }
    }
}

fn seaweed_oracle(ctx: &mut Context<'_>) -> Result<Outcome> {
    let p: OracleParams = ctx.params()?;
    let rel_tol = ctx.tol("relative", 0.01);
    let space = SpaceModel::seaweed();
    let pairs: Vec<(Point, Point)> = (0..p.pairs)
        .map(|_| (random_point(&mut ctx.rng, &space, p.r_max), random_point(&mut ctx.rng, &space, p.r_max)))
        .collect();
    let results = pairs
        .par_iter()
        .map(|(a, b)| -> Result<(f64, f64)> {
            let (pa, pb) = (a.as_polar().expect("seaweed point"), b.as_polar().expect("seaweed point"));
            Ok((space.distance(a, b)?, seaweed_oracle_distance(pa, pb, p.spacing)?.length))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut out = Outcome::default();
    let mut worst = 0.0f64;
    for (i, (exact, oracle)) in results.iter().enumerate() {
        let rel = (exact - oracle).abs() / exact.max(1e-12);
        worst = worst.max(rel);
        out.row(format!("pair{i}"), *exact, *oracle, rel, rel <= rel_tol);
    }
    out.check(
        "closed form matches the graph search",
        worst <= rel_tol,
        format!("{} pairs, worst relative error {worst:e}", results.len()),
    );
    Ok(out)
}
