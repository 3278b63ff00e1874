//! Universal cover of the plane with the open unit disk removed.
//!
//! Points carry a radius `r >= 1` and an unwrapped angle `theta`. Two points
//! see each other along a straight chord when their angular separation is at
//! most the sum of their tangent angles `acos(1/r)`; otherwise the geodesic
//! runs down a tangent segment, around the unit circle, and back out along a
//! second tangent segment.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolarPoint {
    pub r: f64,
    pub theta: f64,
}

impl PolarPoint {
    pub const fn new(r: f64, theta: f64) -> Self {
        PolarPoint { r, theta }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Orientation {
    #[serde(rename = "+")]
    Positive,
    #[serde(rename = "-")]
    Negative,
}

impl Orientation {
    pub fn sign(self) -> f64 {
        match self {
            Orientation::Positive => 1.0,
            Orientation::Negative => -1.0,
        }
    }
}

/// Angle between the radial direction at radius `r` and the tangent line to
/// the unit circle.
pub fn tangent_angle(r: f64) -> f64 {
    (1.0 / r).min(1.0).acos()
}

/// Length of the tangent segment from radius `r` to the unit circle.
pub fn tangent_length(r: f64) -> f64 {
    if r < 1e150 {
        ((r - 1.0).max(0.0) * (r + 1.0)).sqrt()
    } else {
        r
    }
}

/// Planar chord length between points at radii `a`, `b` separated by angle
/// `delta`, stable for large radii and small angles.
pub fn chord(a: f64, b: f64, delta: f64) -> f64 {
    (a - b).hypot(2.0 * (a.sqrt() * b.sqrt()) * (0.5 * delta).sin())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeaweedCover {
    pub basepoint: PolarPoint,
}

impl Default for SeaweedCover {
    fn default() -> Self {
        SeaweedCover { basepoint: PolarPoint::new(1.0, 0.0) }
    }
}

/// Shape of the geodesic between two points.
#[derive(Clone, Copy, Debug)]
enum Route {
    Chord { length: f64 },
    Wrap { sign: f64, first: f64, arc: f64, second: f64 },
}

impl SeaweedCover {
    pub fn with_basepoint(basepoint: PolarPoint) -> Result<Self> {
        let cover = SeaweedCover { basepoint };
        cover.validate(&basepoint)?;
        Ok(cover)
    }

    pub fn validate(&self, p: &PolarPoint) -> Result<()> {
        if !(p.r.is_finite() && p.theta.is_finite()) {
            return Err(Error::InvalidPoint(format!("non-finite seaweed point {p:?}")));
        }
        if p.r < 1.0 {
            return Err(Error::InvalidPoint(format!("seaweed radius {} below 1", p.r)));
        }
        Ok(())
    }

    fn route(p: &PolarPoint, q: &PolarPoint) -> Route {
        let delta = (q.theta - p.theta).abs();
        let (psi_p, psi_q) = (tangent_angle(p.r), tangent_angle(q.r));
        if delta <= psi_p + psi_q {
            Route::Chord { length: chord(p.r, q.r, delta) }
        } else {
            Route::Wrap {
                sign: (q.theta - p.theta).signum(),
                first: tangent_length(p.r),
                arc: delta - (psi_p + psi_q),
                second: tangent_length(q.r),
            }
        }
    }

    pub fn distance(&self, p: &PolarPoint, q: &PolarPoint) -> f64 {
        match Self::route(p, q) {
            Route::Chord { length } => length,
            // grouped so that the result is bitwise symmetric in p and q
            Route::Wrap { first, arc, second, .. } => (first + second) + arc,
        }
    }

    /// True when the geodesic from `p` to `q` touches the unit circle along
    /// an arc of positive length.
    pub fn wraps(&self, p: &PolarPoint, q: &PolarPoint) -> bool {
        matches!(Self::route(p, q), Route::Wrap { .. })
    }

    pub fn geodesic_eval(&self, p: &PolarPoint, q: &PolarPoint, t: f64) -> PolarPoint {
        match Self::route(p, q) {
            Route::Chord { length } => {
                if length == 0.0 {
                    return *p;
                }
                let d = q.theta - p.theta;
                let (qx, qy) = (q.r * d.cos(), q.r * d.sin());
                let f = (t / length).clamp(0.0, 1.0);
                let (x, y) = (p.r + f * (qx - p.r), f * qy);
                polar_from_local(p.theta, x, y)
            }
            Route::Wrap { sign, first, arc, second } => {
                let psi_p = tangent_angle(p.r);
                if t <= first {
                    let (tx, ty) = (psi_p.cos(), sign * psi_p.sin());
                    let f = if first > 0.0 { t / first } else { 0.0 };
                    polar_from_local(p.theta, p.r + f * (tx - p.r), f * ty)
                } else if t <= first + arc {
                    PolarPoint::new(1.0, p.theta + sign * (psi_p + (t - first)))
                } else {
                    let psi_q = tangent_angle(q.r);
                    let u = (t - first - arc).min(second);
                    let (tx, ty) = (psi_q.cos(), -sign * psi_q.sin());
                    let f = if second > 0.0 { u / second } else { 1.0 };
                    polar_from_local(q.theta, tx + f * (q.r - tx), ty * (1.0 - f))
                }
            }
        }
    }

    /// Point at arclength `t` along the ray from the basepoint that is
    /// asymptotic to planar direction `theta_inf`.
    pub fn straight_ray(&self, theta_inf: f64, t: f64) -> PolarPoint {
        let b = self.basepoint;
        let psi0 = tangent_angle(b.r);
        let phi = theta_inf - b.theta;
        if phi.abs() <= std::f64::consts::FRAC_PI_2 + psi0 {
            return polar_from_local(b.theta, b.r + t * phi.cos(), t * phi.sin());
        }
        let sign = phi.signum();
        let first = tangent_length(b.r);
        let arc = phi.abs() - std::f64::consts::FRAC_PI_2 - psi0;
        if t <= first {
            let f = if first > 0.0 { t / first } else { 0.0 };
            let (tx, ty) = (psi0.cos(), sign * psi0.sin());
            polar_from_local(b.theta, b.r + f * (tx - b.r), f * ty)
        } else if t <= first + arc {
            PolarPoint::new(1.0, b.theta + sign * (psi0 + t - first))
        } else {
            let u = t - first - arc;
            let leave = theta_inf - sign * std::f64::consts::FRAC_PI_2;
            PolarPoint::new(u.hypot(1.0), leave + sign * u.atan())
        }
    }

    /// Point at arclength `t` along the ray that winds around the unit
    /// circle forever in the given orientation.
    pub fn spiral_ray(&self, orientation: Orientation, t: f64) -> PolarPoint {
        let b = self.basepoint;
        let sign = orientation.sign();
        let psi0 = tangent_angle(b.r);
        let first = tangent_length(b.r);
        if t <= first {
            let f = if first > 0.0 { t / first } else { 0.0 };
            polar_from_local(b.theta, b.r + f * (psi0.cos() - b.r), f * sign * psi0.sin())
        } else {
            PolarPoint::new(1.0, b.theta + sign * (psi0 + t - first))
        }
    }

    /// Asymptotic direction of the geodesic from the basepoint through `q`,
    /// continued past `q`. Returns `None` when the extension follows the
    /// unit circle (the geodesic ends on the circle after wrapping).
    pub(crate) fn extension_direction(&self, q: &PolarPoint) -> std::result::Result<f64, Orientation> {
        let b = self.basepoint;
        match Self::route(&b, q) {
            Route::Chord { length } => {
                if length == 0.0 {
                    return Ok(b.theta);
                }
                let d = q.theta - b.theta;
                let (x, y) = (q.r * d.cos() - b.r, q.r * d.sin());
                Ok(b.theta + y.atan2(x))
            }
            Route::Wrap { sign, second, .. } => {
                let orientation = if sign > 0.0 { Orientation::Positive } else { Orientation::Negative };
                if second <= 1e-12 {
                    Err(orientation)
                } else {
                    Ok(q.theta - sign * tangent_angle(q.r) + sign * std::f64::consts::FRAC_PI_2)
                }
            }
        }
    }
}

/// Converts local Cartesian coordinates (in the frame rotated so the reference
/// angle lies on the positive x-axis) to a polar point with unwrapped angle.
fn polar_from_local(reference: f64, x: f64, y: f64) -> PolarPoint {
    PolarPoint::new(x.hypot(y).max(1.0), reference + y.atan2(x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_3, PI};

    #[test]
    fn half_turn_on_the_circle() {
        let s = SeaweedCover::default();
        let d = s.distance(&PolarPoint::new(1.0, 0.0), &PolarPoint::new(1.0, PI));
        assert_abs_diff_eq!(d, PI, epsilon = 1e-15);
    }

    #[test]
    fn tangency_point_after_tangent_segment() {
        let s = SeaweedCover::default();
        let p = PolarPoint::new(2.0, 0.0);
        let q = PolarPoint::new(2.0, 10.0);
        let x = s.geodesic_eval(&p, &q, 3f64.sqrt());
        assert_abs_diff_eq!(x.r, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(x.theta, FRAC_PI_3, epsilon = 1e-12);
    }

    #[test]
    fn chord_case_matches_planar_distance() {
        let s = SeaweedCover::default();
        let p = PolarPoint::new(3.0, 0.2);
        let q = PolarPoint::new(5.0, 0.9);
        let planar = (9.0f64 + 25.0 - 30.0 * 0.7f64.cos()).sqrt();
        assert_abs_diff_eq!(s.distance(&p, &q), planar, epsilon = 1e-12);
    }

    #[test]
    fn straight_rays_are_continuous_at_the_wrap_threshold() {
        let s = SeaweedCover::default();
        let a = s.straight_ray(std::f64::consts::FRAC_PI_2, 3.0);
        let b = s.straight_ray(std::f64::consts::FRAC_PI_2 + 1e-12, 3.0);
        assert_abs_diff_eq!(a.r, b.r, epsilon = 1e-9);
        assert_abs_diff_eq!(a.theta, b.theta, epsilon = 1e-9);
    }

    #[test]
    fn extension_of_a_wrapped_geodesic() {
        let s = SeaweedCover::default();
        let q = s.straight_ray(4.0, 50.0);
        let dir = s.extension_direction(&q).unwrap();
        assert_abs_diff_eq!(dir, 4.0, epsilon = 1e-9);
        let on_circle = s.spiral_ray(Orientation::Negative, 7.0);
        assert_eq!(s.extension_direction(&on_circle), Err(Orientation::Negative));
    }

    #[test]
    fn rejects_points_inside_the_disk() {
        let s = SeaweedCover::default();
        assert!(s.validate(&PolarPoint::new(0.5, 0.0)).is_err());
        assert!(SeaweedCover::with_basepoint(PolarPoint::new(0.99, 0.0)).is_err());
    }
}
