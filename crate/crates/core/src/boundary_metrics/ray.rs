use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::space_models::{Orientation, Point, SpaceModel};

/// Unit-speed geodesic ray from the basepoint of a model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GeodesicRay {
    /// Straight ray along a unit direction vector.
    Euclidean { direction: Vec<f64> },
    /// Ray leaving the core of a tree through the given branch.
    Tree { branch: usize },
    /// Pair of rays traversed with speeds `a` and `b`, `a² + b² = 1`.
    Product { left: Box<GeodesicRay>, right: Box<GeodesicRay>, a: f64, b: f64 },
    /// Seaweed ray asymptotic to the planar direction `theta` (unwrapped).
    Straight { theta: f64 },
    /// Seaweed ray that winds around the unit circle forever.
    Spiral { sign: Orientation },
}

impl GeodesicRay {
    pub fn euclidean(direction: impl Into<Vec<f64>>) -> Self {
        GeodesicRay::Euclidean { direction: direction.into() }
    }

    /// Unit ray in the plane at angle `phi` from the x-axis.
    pub fn planar(phi: f64) -> Self {
        GeodesicRay::euclidean([phi.cos(), phi.sin()])
    }

    pub fn tree(branch: usize) -> Self {
        GeodesicRay::Tree { branch }
    }

    pub fn straight(theta: f64) -> Self {
        GeodesicRay::Straight { theta }
    }

    pub fn spiral(sign: Orientation) -> Self {
        GeodesicRay::Spiral { sign }
    }

    pub fn product(left: GeodesicRay, right: GeodesicRay, a: f64, b: f64) -> Self {
        GeodesicRay::Product { left: Box::new(left), right: Box::new(right), a, b }
    }

    /// Descriptor equality, ignoring product factors traversed at speed 0.
    pub fn same_as(&self, other: &GeodesicRay) -> bool {
        match (self, other) {
            (
                GeodesicRay::Product { left: l1, right: r1, a: a1, b: b1 },
                GeodesicRay::Product { left: l2, right: r2, a: a2, b: b2 },
            ) => a1 == a2 && b1 == b2 && (*a1 == 0.0 || l1.same_as(l2)) && (*b1 == 0.0 || r1.same_as(r2)),
            _ => self == other,
        }
    }
}

impl SpaceModel {
    fn check_ray_shape(&self, ray: &GeodesicRay) -> Result<()> {
        match (self, ray) {
            (SpaceModel::Euclidean { dimension }, GeodesicRay::Euclidean { direction }) => {
                if direction.len() != *dimension {
                    return Err(Error::InvalidRay(format!(
                        "direction has {} entries for dimension {dimension}",
                        direction.len()
                    )));
                }
                let norm = direction.iter().fold(0.0f64, |acc, x| acc.hypot(*x));
                if !((norm - 1.0).abs() <= 1e-9) {
                    return Err(Error::InvalidRay(format!("direction has norm {norm}, expected 1")));
                }
                Ok(())
            }
            (SpaceModel::Tree(t), GeodesicRay::Tree { branch }) => {
                if *branch >= t.branch_count() {
                    return Err(Error::InvalidRay(format!("branch {branch} does not exist")));
                }
                Ok(())
            }
            (SpaceModel::Product(l, r), GeodesicRay::Product { left, right, a, b }) => {
                if !(a.is_finite() && b.is_finite() && *a >= 0.0 && *b >= 0.0) {
                    return Err(Error::InvalidRay("product speeds must be non-negative".into()));
                }
                if (a * a + b * b - 1.0).abs() > 1e-9 {
                    return Err(Error::InvalidRay(format!("speed split ({a}, {b}) is not a unit vector")));
                }
                l.check_ray_shape(left)?;
                r.check_ray_shape(right)
            }
            (SpaceModel::Seaweed(_), GeodesicRay::Straight { theta }) => {
                if !theta.is_finite() {
                    return Err(Error::InvalidRay("non-finite asymptotic direction".into()));
                }
                Ok(())
            }
            (SpaceModel::Seaweed(_), GeodesicRay::Spiral { .. }) => Ok(()),
            _ => Err(Error::InvalidRay(format!("descriptor {ray:?} does not belong to {}", self.name()))),
        }
    }

    /// Checks the descriptor against the model and samples the unit-speed
    /// property `|d(r(s), r(t)) - |s - t|| <= 1e-9`.
    pub fn validate_ray(&self, ray: &GeodesicRay) -> Result<()> {
        self.check_ray_shape(ray)?;
        const SAMPLES: [f64; 8] = [0.0, 0.25, 1.0, 2.5, 7.0, 20.0, 55.0, 100.0];
        let points: Vec<Point> = SAMPLES.iter().map(|&t| self.ray_point(ray, t)).collect();
        let base = self.basepoint();
        if self.distance_unchecked(&points[0], &base) > 1e-12 {
            return Err(Error::InvalidRay("ray does not start at the basepoint".into()));
        }
        for i in 0..SAMPLES.len() {
            self.validate_point(&points[i])?;
            for j in 0..i {
                let d = self.distance_unchecked(&points[i], &points[j]);
                if (d - (SAMPLES[i] - SAMPLES[j])).abs() > 1e-9 {
                    return Err(Error::InvalidRay(format!(
                        "not unit speed between t={} and t={}: distance {d}",
                        SAMPLES[j], SAMPLES[i]
                    )));
                }
            }
        }
        Ok(())
    }

    /// Point at arclength `t` along `ray`.
    pub fn ray_eval(&self, ray: &GeodesicRay, t: f64) -> Result<Point> {
        if !(t >= 0.0 && t.is_finite()) {
            return Err(Error::param("t", format!("ray parameter {t} must be finite and non-negative")));
        }
        self.check_ray_shape(ray)?;
        Ok(self.ray_point(ray, t))
    }

    pub(crate) fn ray_point(&self, ray: &GeodesicRay, t: f64) -> Point {
        match (self, ray) {
            (SpaceModel::Euclidean { .. }, GeodesicRay::Euclidean { direction }) => {
                Point::euclidean(direction.iter().map(|u| t * u).collect::<Vec<_>>())
            }
            (SpaceModel::Tree(tree), GeodesicRay::Tree { branch }) => tree.ray_point(*branch, t).into(),
            (SpaceModel::Product(l, r), GeodesicRay::Product { left, right, a, b }) => {
                let lp = if *a == 0.0 { l.basepoint() } else { l.ray_point(left, a * t) };
                let rp = if *b == 0.0 { r.basepoint() } else { r.ray_point(right, b * t) };
                Point::product(lp, rp)
            }
            (SpaceModel::Seaweed(s), GeodesicRay::Straight { theta }) => s.straight_ray(*theta, t).into(),
            (SpaceModel::Seaweed(s), GeodesicRay::Spiral { sign }) => s.spiral_ray(*sign, t).into(),
            _ => unreachable!("ray shape checked against the model"),
        }
    }

    /// Some valid ray of the model, used where a factor's direction is
    /// irrelevant.
    pub fn default_ray(&self) -> GeodesicRay {
        match self {
            SpaceModel::Euclidean { dimension } => {
                let mut d = vec![0.0; *dimension];
                if let Some(first) = d.first_mut() {
                    *first = 1.0;
                }
                GeodesicRay::euclidean(d)
            }
            SpaceModel::Tree(_) => GeodesicRay::tree(0),
            SpaceModel::Product(l, r) => GeodesicRay::product(l.default_ray(), r.default_ray(), 1.0, 0.0),
            SpaceModel::Seaweed(s) => GeodesicRay::straight(s.basepoint.theta),
        }
    }

    /// Label of the Tits path component containing `ray`. Rays with
    /// different labels are at infinite Tits distance.
    pub fn tits_component(&self, ray: &GeodesicRay) -> String {
        match ray {
            GeodesicRay::Euclidean { .. } => "sphere".into(),
            GeodesicRay::Tree { branch } => format!("end:{branch}"),
            GeodesicRay::Product { .. } => "join".into(),
            GeodesicRay::Straight { .. } => "line".into(),
            GeodesicRay::Spiral { sign: Orientation::Positive } => "+inf".into(),
            GeodesicRay::Spiral { sign: Orientation::Negative } => "-inf".into(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space_models::{MetricTree, TreeEdge, TreePoint, VertexLabel};
    use std::f64::consts::PI;

    #[test]
    fn euclidean_ray() {
        let e = SpaceModel::euclidean(2);
        let p = e.ray_eval(&GeodesicRay::euclidean([1.0, 0.0]), 3.0).unwrap();
        assert_eq!(p, Point::euclidean([3.0, 0.0]));
        assert!(e.ray_eval(&GeodesicRay::euclidean([1.0, 0.0]), -1.0).is_err());
        assert!(e.validate_ray(&GeodesicRay::euclidean([1.0, 1.0])).is_err());
    }

    #[test]
    fn periodic_tree_word() {
        let t = MetricTree::new(vec![VertexLabel::Int(0)], vec![], 0, Some(vec![(0, vec![1.0, 1.0])])).unwrap();
        let s = SpaceModel::tree(t);
        let p = s.ray_eval(&GeodesicRay::tree(0), 1.5).unwrap();
        assert_eq!(p, TreePoint::Edge { edge: TreeEdge::Branch { branch: 0, index: 1 }, offset: 0.5 }.into());
    }

    #[test]
    fn spiral_from_unit_basepoint() {
        let s = SpaceModel::seaweed();
        let p = s.ray_eval(&GeodesicRay::spiral(Orientation::Positive), PI).unwrap();
        assert_eq!(p, Point::seaweed(1.0, PI));
    }

    #[test]
    fn seaweed_rays_have_unit_speed() {
        let s = SpaceModel::seaweed();
        for theta in [-7.0, -2.0, -1.0, 0.0, 0.5, 1.57, 1.6, 4.0, 30.0] {
            s.validate_ray(&GeodesicRay::straight(theta)).unwrap();
        }
        s.validate_ray(&GeodesicRay::spiral(Orientation::Negative)).unwrap();
        let off = SpaceModel::Seaweed(
            crate::space_models::SeaweedCover::with_basepoint(crate::space_models::PolarPoint::new(3.0, 1.0)).unwrap(),
        );
        for theta in [-5.0, 0.0, 1.0, 3.5, 9.0] {
            off.validate_ray(&GeodesicRay::straight(theta)).unwrap();
        }
        off.validate_ray(&GeodesicRay::spiral(Orientation::Positive)).unwrap();
    }

    #[test]
    fn product_rays() {
        let s = SpaceModel::product(SpaceModel::euclidean(1), SpaceModel::seaweed());
        let r = GeodesicRay::product(GeodesicRay::euclidean([1.0]), GeodesicRay::straight(0.3), 0.6, 0.8);
        s.validate_ray(&r).unwrap();
        let bad = GeodesicRay::product(GeodesicRay::euclidean([1.0]), GeodesicRay::straight(0.3), 0.6, 0.6);
        assert!(s.validate_ray(&bad).is_err());
        let frozen1 = GeodesicRay::product(GeodesicRay::euclidean([1.0]), GeodesicRay::straight(0.3), 0.0, 1.0);
        let frozen2 = GeodesicRay::product(GeodesicRay::euclidean([-1.0]), GeodesicRay::straight(0.3), 0.0, 1.0);
        assert!(frozen1.same_as(&frozen2));
    }

    #[test]
    fn descriptors_roundtrip_json() {
        let r = GeodesicRay::product(GeodesicRay::tree(2), GeodesicRay::spiral(Orientation::Negative), 1.0, 0.0);
        let json = serde_json::to_string(&r).unwrap();
        assert!(json.contains("\"sign\":\"-\""));
        let back: GeodesicRay = serde_json::from_str(&json).unwrap();
        assert_eq!(back, r);
    }
}
