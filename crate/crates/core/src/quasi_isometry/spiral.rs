//! Radius-preserving spiral maps `(r, θ) ↦ (r, θ + h(r))`.
//!
//! Such a map is Lipschitz exactly when `r h'(r)` is bounded, with constant
//! the largest singular value of `[[1, 0], [K, 1]]` for `K = sup |r h'(r)|`.
//! The same map lifts to the seaweed cover in unwrapped coordinates.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::QuasiIsometryMap;
use crate::error::{Error, Result};
use crate::space_models::{Point, SpaceModel};

/// Largest `sup |r h'(r)|` accepted when building a map.
pub const MAX_TWIST: f64 = 1e3;

/// Angular offset `h`. The `loglog` family uses `log(1 + log r)` in place of
/// `log log r`, which is undefined below `r = e^0` and has unbounded `r h'`
/// near `r = 1`; all three iterated profiles vanish for `r < 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ProfileRepr", into = "ProfileRepr")]
pub enum SpiralProfile {
    Zero,
    Log,
    LogLog,
    LogSinLogLog,
    LogLogSinLogLogLog,
    /// Piecewise-linear `h` through the knots, constant outside them.
    Table {
        r: Vec<f64>,
        h: Vec<f64>,
    },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum ProfileRepr {
    Name(String),
    Table { r: Vec<f64>, h: Vec<f64> },
}

impl TryFrom<ProfileRepr> for SpiralProfile {
    type Error = Error;

    fn try_from(repr: ProfileRepr) -> Result<Self> {
        match repr {
            ProfileRepr::Name(name) => name.parse(),
            ProfileRepr::Table { r, h } => SpiralProfile::table(r, h),
        }
    }
}

impl From<SpiralProfile> for ProfileRepr {
    fn from(p: SpiralProfile) -> Self {
        match p {
            SpiralProfile::Table { r, h } => ProfileRepr::Table { r, h },
            other => ProfileRepr::Name(other.to_string()),
        }
    }
}

impl FromStr for SpiralProfile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "zero" => Ok(SpiralProfile::Zero),
            "log" => Ok(SpiralProfile::Log),
            "loglog" => Ok(SpiralProfile::LogLog),
            "log_sin_loglog" => Ok(SpiralProfile::LogSinLogLog),
            "loglog_sin_logloglog" => Ok(SpiralProfile::LogLogSinLogLogLog),
            other => Err(Error::param("profile", format!("unknown spiral profile `{other}`"))),
        }
    }
}

impl fmt::Display for SpiralProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            SpiralProfile::Zero => "zero",
            SpiralProfile::Log => "log",
            SpiralProfile::LogLog => "loglog",
            SpiralProfile::LogSinLogLog => "log_sin_loglog",
            SpiralProfile::LogLogSinLogLogLog => "loglog_sin_logloglog",
            SpiralProfile::Table { .. } => "table",
        };
        f.write_str(name)
    }
}

impl SpiralProfile {
    pub fn table(r: Vec<f64>, h: Vec<f64>) -> Result<Self> {
        if r.len() < 2 || r.len() != h.len() {
            return Err(Error::param("table", "need at least two knots with one value each"));
        }
        if r.iter().chain(&h).any(|v| !v.is_finite()) || r[0] <= 0.0 || r.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::param("table", "knots must be positive, finite and strictly increasing"));
        }
        Ok(SpiralProfile::Table { r, h })
    }

    pub fn h(&self, r: f64) -> f64 {
        match self {
            SpiralProfile::Zero => 0.0,
            SpiralProfile::Log => r.ln(),
            _ if r < 1.0 && !matches!(self, SpiralProfile::Table { .. }) => 0.0,
            SpiralProfile::LogLog => r.ln().ln_1p(),
            SpiralProfile::LogSinLogLog => {
                let l = r.ln();
                l * l.ln_1p().sin()
            }
            SpiralProfile::LogLogSinLogLogLog => {
                let l = r.ln().ln_1p();
                l * l.ln_1p().sin()
            }
            SpiralProfile::Table { r: knots, h } => {
                let i = segment(knots, r);
                let f = ((r - knots[i]) / (knots[i + 1] - knots[i])).clamp(0.0, 1.0);
                h[i] + f * (h[i + 1] - h[i])
            }
        }
    }

    /// Derivative `h'(r)`, right-continuous at kinks.
    pub fn dh(&self, r: f64) -> f64 {
        match self {
            SpiralProfile::Zero => 0.0,
            SpiralProfile::Log => 1.0 / r,
            _ if r < 1.0 && !matches!(self, SpiralProfile::Table { .. }) => 0.0,
            SpiralProfile::LogLog => 1.0 / (r * (1.0 + r.ln())),
            SpiralProfile::LogSinLogLog => {
                let l = r.ln();
                let u = l.ln_1p();
                (u.sin() + l * u.cos() / (1.0 + l)) / r
            }
            SpiralProfile::LogLogSinLogLogLog => {
                let l = r.ln().ln_1p();
                let u = l.ln_1p();
                (u.sin() + l * u.cos() / (1.0 + l)) / (r * (1.0 + r.ln()))
            }
            SpiralProfile::Table { r: knots, h } => {
                if r < knots[0] || r >= knots[knots.len() - 1] {
                    return 0.0;
                }
                let i = segment(knots, r);
                (h[i + 1] - h[i]) / (knots[i + 1] - knots[i])
            }
        }
    }

    pub fn r_h_prime(&self, r: f64) -> f64 {
        r * self.dh(r)
    }

    fn knots(&self) -> &[f64] {
        match self {
            SpiralProfile::Table { r, .. } => r,
            _ => &[],
        }
    }
}

fn segment(knots: &[f64], r: f64) -> usize {
    knots.partition_point(|&k| k <= r).clamp(1, knots.len() - 1) - 1
}

/// Spiral map with a fixed profile, usable on the plane or the seaweed cover.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpiralMap {
    pub profile: SpiralProfile,
}

impl SpiralMap {
    pub fn new(profile: SpiralProfile) -> Self {
        SpiralMap { profile }
    }

    /// Image of a planar point; the origin is fixed.
    pub fn apply_planar(&self, x: f64, y: f64) -> (f64, f64) {
        let r = x.hypot(y);
        if r == 0.0 {
            return (0.0, 0.0);
        }
        let theta = y.atan2(x) + self.profile.h(r);
        (r * theta.cos(), r * theta.sin())
    }

    /// Image of a point of the seaweed cover in unwrapped coordinates.
    pub fn apply_polar(&self, r: f64, theta: f64) -> (f64, f64) {
        (r, theta + self.profile.h(r))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistortionRow {
    pub scale: f64,
    pub distortion: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpiralAnalysis {
    pub sup_r_h_prime: f64,
    pub argmax: f64,
    pub table: Vec<DistortionRow>,
}

/// `sup |r h'(r)|` over `[min(1, first knot), r_max]`, by a log-spaced scan
/// refined with golden-section search around the best sample.
pub fn max_twist(profile: &SpiralProfile, r_max: f64) -> Result<(f64, f64)> {
    if !(r_max >= 1.0 && r_max.is_finite()) {
        return Err(Error::param("r_max", format!("{r_max} must be at least 1")));
    }
    let lo = profile.knots().first().copied().unwrap_or(1.0).min(1.0).ln();
    let hi = r_max.ln();
    const N: usize = 4096;
    let g = |u: f64| profile.r_h_prime(u.exp()).abs();
    let mut samples: Vec<f64> = (0..=N).map(|i| lo + (hi - lo) * i as f64 / N as f64).collect();
    samples.extend(profile.knots().iter().filter(|&&k| k <= r_max).map(|k| k.ln()));
    let (mut best_u, mut best) = (lo, f64::NEG_INFINITY);
    for &u in &samples {
        let v = g(u);
        if !v.is_finite() {
            return Err(Error::NotQuasiIsometric(format!("r h'(r) is not finite at r = {}", u.exp())));
        }
        if v > best {
            (best_u, best) = (u, v);
        }
    }
    let step = (hi - lo) / N as f64;
    let (mut a, mut b) = ((best_u - step).max(lo), (best_u + step).min(hi));
    let inv_phi = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..80 {
        let (c, d) = (b - inv_phi * (b - a), a + inv_phi * (b - a));
        if g(c) > g(d) {
            b = d;
        } else {
            a = c;
        }
    }
    let mid = 0.5 * (a + b);
    if g(mid) > best {
        (best_u, best) = (mid, g(mid));
    }
    Ok((best, best_u.exp()))
}

/// Fixed sample of the disk of radius `s`: radii `s·k/24` and `s·2^-j`,
/// angles in steps of `2π/24`.
fn disk_sample(s: f64) -> Vec<(f64, f64)> {
    let mut radii: Vec<f64> = (0..=24).map(|k| s * k as f64 / 24.0).collect();
    radii.extend((5..=12).map(|j| s * 0.5f64.powi(j)));
    let mut out = vec![(0.0, 0.0)];
    for &r in radii.iter().filter(|&&r| r > 0.0) {
        for m in 0..24 {
            let a = std::f64::consts::TAU * m as f64 / 24.0;
            out.push((r * a.cos(), r * a.sin()));
        }
    }
    out
}

/// Rescaled distortion `sup |d(f x, f y) - d(x, y)| / s` over a fixed
/// sample of pairs in the planar disk of radius `s`.
pub fn distortion(map: &SpiralMap, s: f64) -> Result<f64> {
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::param("s", format!("scale {s} must be positive")));
    }
    let pts = disk_sample(s);
    let imgs: Vec<(f64, f64)> = pts.iter().map(|&(x, y)| map.apply_planar(x, y)).collect();
    let worst = (0..pts.len())
        .into_par_iter()
        .map(|i| {
            let mut w = 0.0f64;
            for j in 0..i {
                let d = (pts[i].0 - pts[j].0).hypot(pts[i].1 - pts[j].1);
                let fd = (imgs[i].0 - imgs[j].0).hypot(imgs[i].1 - imgs[j].1);
                w = w.max((fd - d).abs());
            }
            w
        })
        .reduce(|| 0.0, f64::max);
    Ok(worst / s)
}

pub fn spiral_analysis(map: &SpiralMap, r_max: f64, scales: &[f64]) -> Result<SpiralAnalysis> {
    let (sup_r_h_prime, argmax) = max_twist(&map.profile, r_max)?;
    let table = scales
        .iter()
        .map(|&scale| Ok(DistortionRow { scale, distortion: distortion(map, scale)? }))
        .collect::<Result<Vec<_>>>()?;
    Ok(SpiralAnalysis { sup_r_h_prime, argmax, table })
}

/// Lipschitz constant of a map whose Jacobian is orthogonally equivalent to
/// `[[1, 0], [k, 1]]` with `|k| <= twist`.
pub fn shear_lipschitz(twist: f64) -> f64 {
    0.5 * (twist + (twist * twist + 4.0).sqrt())
}

fn checked_twist(map: &SpiralMap, r_max: f64) -> Result<f64> {
    let (k, at) = max_twist(&map.profile, r_max)?;
    if !(k <= MAX_TWIST) {
        return Err(Error::NotQuasiIsometric(format!("sup |r h'(r)| = {k} at r = {at} exceeds {MAX_TWIST}")));
    }
    Ok(k)
}

/// The spiral map on the Euclidean plane, with constants from the twist on
/// `[1, r_max]`.
pub fn euclidean_spiral(map: &SpiralMap, r_max: f64) -> Result<QuasiIsometryMap> {
    let k = checked_twist(map, r_max)?;
    let m = map.clone();
    let f = Arc::new(move |p: &Point| -> Result<Point> {
        let Point::Euclidean { coords } = p else {
            return Err(Error::InvalidPoint("planar point expected".into()));
        };
        let (x, y) = m.apply_planar(coords[0], coords[1]);
        Ok(Point::euclidean([x, y]))
    });
    let space = SpaceModel::euclidean(2);
    Ok(QuasiIsometryMap::new(space.clone(), space, f, shear_lipschitz(k), 0.0, format!("spiral:{}", map.profile)))
}

/// Lift of the spiral map to the seaweed cover. Rejected when `r h'(r)` is
/// unbounded on `[1, r_max]`.
pub fn lift_to_seaweed(map: &SpiralMap, r_max: f64) -> Result<QuasiIsometryMap> {
    lift_to(map, SpaceModel::seaweed(), r_max)
}

pub fn lift_to(map: &SpiralMap, space: SpaceModel, r_max: f64) -> Result<QuasiIsometryMap> {
    if !matches!(space, SpaceModel::Seaweed(_)) {
        return Err(Error::Unsupported(format!("spiral lift onto {}", space.name())));
    }
    let k = checked_twist(map, r_max)?;
    let m = map.clone();
    let f = Arc::new(move |p: &Point| -> Result<Point> {
        let q = p.as_polar().ok_or_else(|| Error::InvalidPoint("seaweed point expected".into()))?;
        let (r, theta) = m.apply_polar(q.r, q.theta);
        Ok(Point::seaweed(r, theta))
    });
    Ok(QuasiIsometryMap::new(space.clone(), space, f, shear_lipschitz(k), 0.0, format!("lift:{}", map.profile)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn derivatives_match_finite_differences() {
        for p in
            [SpiralProfile::Log, SpiralProfile::LogLog, SpiralProfile::LogSinLogLog, SpiralProfile::LogLogSinLogLogLog]
        {
            for r in [1.5, 3.0, 40.0, 1e4, 1e9] {
                let e = 1e-6 * r;
                let fd = (p.h(r + e) - p.h(r - e)) / (2.0 * e);
                assert_abs_diff_eq!(p.dh(r) * r, fd * r, epsilon = 1e-6);
            }
        }
    }

    #[test]
    fn twist_of_standard_profiles() {
        let (k, _) = max_twist(&SpiralProfile::Log, 1e12).unwrap();
        assert_abs_diff_eq!(k, 1.0, epsilon = 1e-9);
        assert_eq!(max_twist(&SpiralProfile::Zero, 1e6).unwrap().0, 0.0);
        for r in [3.0, 100.0, 1e6] {
            assert!(SpiralProfile::LogLog.r_h_prime(r) <= 1.0 / f64::ln(r));
        }
    }

    #[test]
    fn zero_profile_is_an_isometry() {
        assert!(distortion(&SpiralMap::new(SpiralProfile::Zero), 100.0).unwrap() < 1e-14);
    }

    #[test]
    fn names_and_tables_parse() {
        let p: SpiralProfile = serde_json::from_str("\"log_sin_loglog\"").unwrap();
        assert_eq!(p, SpiralProfile::LogSinLogLog);
        let t: SpiralProfile = serde_json::from_str(r#"{"r":[1,2,4],"h":[0,1,1.5]}"#).unwrap();
        assert_abs_diff_eq!(t.h(3.0), 1.25);
        assert_abs_diff_eq!(t.dh(1.5), 1.0);
        assert_eq!(t.dh(10.0), 0.0);
        assert!(serde_json::from_str::<SpiralProfile>("\"spiral\"").is_err());
        assert!(serde_json::from_str::<SpiralProfile>(r#"{"r":[2,1],"h":[0,1]}"#).is_err());
    }

    #[test]
    fn steep_tables_are_rejected() {
        let steep = SpiralProfile::table(vec![1.0, 1.001], vec![0.0, 10.0]).unwrap();
        let r = lift_to_seaweed(&SpiralMap::new(steep), 10.0);
        assert!(matches!(r, Err(Error::NotQuasiIsometric(_))));
    }

    #[test]
    fn lipschitz_constant_of_the_log_spiral() {
        let f = lift_to_seaweed(&SpiralMap::new(SpiralProfile::Log), 1e6).unwrap();
        assert_abs_diff_eq!(f.lambda, 0.5 * (1.0 + 5f64.sqrt()), epsilon = 1e-9);
    }
}
