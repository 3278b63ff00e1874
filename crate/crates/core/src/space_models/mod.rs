//! Exact distance and geodesic computation in the model CAT(0) spaces.
//!
//! Four geometries are supported: Euclidean space, metric trees with
//! infinite branches, Euclidean products of two models, and the seaweed
//! cover (the universal cover of the plane minus the open unit disk). All
//! values are immutable and every operation is a pure function.

pub mod seaweed;
pub mod tree;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use seaweed::{Orientation, PolarPoint, SeaweedCover};
pub use tree::{MetricTree, TreeDescription, TreeEdge, TreePoint, TreeVertex, VertexLabel};

/// Slack allowed on arccos arguments before they count as out of domain.
pub const ARCCOS_SLACK: f64 = 1e-12;

#[derive(Clone, Debug)]
pub enum SpaceModel {
    Euclidean { dimension: usize },
    Tree(Arc<MetricTree>),
    Product(Box<SpaceModel>, Box<SpaceModel>),
    Seaweed(SeaweedCover),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum Point {
    Euclidean { coords: Vec<f64> },
    Tree { point: TreePoint },
    Product { left: Box<Point>, right: Box<Point> },
    Seaweed { r: f64, theta: f64 },
}

impl Point {
    pub fn euclidean(coords: impl Into<Vec<f64>>) -> Self {
        Point::Euclidean { coords: coords.into() }
    }

    pub fn seaweed(r: f64, theta: f64) -> Self {
        Point::Seaweed { r, theta }
    }

    pub fn product(left: Point, right: Point) -> Self {
        Point::Product { left: Box::new(left), right: Box::new(right) }
    }

    pub fn as_polar(&self) -> Option<PolarPoint> {
        match *self {
            Point::Seaweed { r, theta } => Some(PolarPoint::new(r, theta)),
            _ => None,
        }
    }

    pub fn as_coords(&self) -> Option<&[f64]> {
        match self {
            Point::Euclidean { coords } => Some(coords),
            _ => None,
        }
    }
}

impl From<PolarPoint> for Point {
    fn from(p: PolarPoint) -> Self {
        Point::Seaweed { r: p.r, theta: p.theta }
    }
}

impl From<TreePoint> for Point {
    fn from(point: TreePoint) -> Self {
        Point::Tree { point }
    }
}

impl SpaceModel {
    pub fn euclidean(dimension: usize) -> Self {
        SpaceModel::Euclidean { dimension }
    }

    pub fn tree(tree: MetricTree) -> Self {
        SpaceModel::Tree(Arc::new(tree))
    }

    pub fn product(left: SpaceModel, right: SpaceModel) -> Self {
        SpaceModel::Product(Box::new(left), Box::new(right))
    }

    pub fn seaweed() -> Self {
        SpaceModel::Seaweed(SeaweedCover::default())
    }

    pub fn name(&self) -> String {
        match self {
            SpaceModel::Euclidean { dimension } => format!("euclidean{dimension}"),
            SpaceModel::Tree(t) => format!("tree{}", t.vertex_count()),
            SpaceModel::Product(l, r) => format!("product({},{})", l.name(), r.name()),
            SpaceModel::Seaweed(_) => "seaweed".into(),
        }
    }

    pub fn as_tree(&self) -> Option<&MetricTree> {
        match self {
            SpaceModel::Tree(t) => Some(t),
            _ => None,
        }
    }

    pub fn basepoint(&self) -> Point {
        match self {
            SpaceModel::Euclidean { dimension } => Point::euclidean(vec![0.0; *dimension]),
            SpaceModel::Tree(t) => t.basepoint().into(),
            SpaceModel::Product(l, r) => Point::product(l.basepoint(), r.basepoint()),
            SpaceModel::Seaweed(s) => s.basepoint.into(),
        }
    }

    pub fn validate_point(&self, p: &Point) -> Result<()> {
        match (self, p) {
            (SpaceModel::Euclidean { dimension }, Point::Euclidean { coords }) => {
                if coords.len() != *dimension {
                    return Err(Error::InvalidPoint(format!("expected {dimension} coordinates, got {}", coords.len())));
                }
                if coords.iter().any(|c| !c.is_finite()) {
                    return Err(Error::InvalidPoint("non-finite coordinate".into()));
                }
                Ok(())
            }
            (SpaceModel::Tree(t), Point::Tree { point }) => t.validate(point),
            (SpaceModel::Product(l, r), Point::Product { left, right }) => {
                l.validate_point(left)?;
                r.validate_point(right)
            }
            (SpaceModel::Seaweed(s), Point::Seaweed { r, theta }) => s.validate(&PolarPoint::new(*r, *theta)),
            _ => Err(Error::InvalidPoint(format!("point {p:?} does not belong to {}", self.name()))),
        }
    }

    pub fn distance(&self, p: &Point, q: &Point) -> Result<f64> {
        self.validate_point(p)?;
        self.validate_point(q)?;
        Ok(self.distance_unchecked(p, q))
    }

    pub(crate) fn distance_unchecked(&self, p: &Point, q: &Point) -> f64 {
        match (self, p, q) {
            (SpaceModel::Euclidean { .. }, Point::Euclidean { coords: a }, Point::Euclidean { coords: b }) => {
                a.iter().zip(b).fold(0.0f64, |acc, (x, y)| acc.hypot(x - y))
            }
            (SpaceModel::Tree(t), Point::Tree { point: a }, Point::Tree { point: b }) => t.distance(a, b),
            (
                SpaceModel::Product(l, r),
                Point::Product { left: pl, right: pr },
                Point::Product { left: ql, right: qr },
            ) => l.distance_unchecked(pl, ql).hypot(r.distance_unchecked(pr, qr)),
            (SpaceModel::Seaweed(s), Point::Seaweed { r: r1, theta: t1 }, Point::Seaweed { r: r2, theta: t2 }) => {
                s.distance(&PolarPoint::new(*r1, *t1), &PolarPoint::new(*r2, *t2))
            }
            _ => f64::NAN,
        }
    }

    /// Point at arclength `t` along the geodesic from `p` to `q`.
    pub fn geodesic_eval(&self, p: &Point, q: &Point, t: f64) -> Result<Point> {
        let d = self.distance(p, q)?;
        let slack = 1e-9 * d.max(1.0);
        if !(t.is_finite() && t >= -slack && t <= d + slack) {
            return Err(Error::param("t", format!("{t} outside [0, {d}]")));
        }
        Ok(self.geodesic_unchecked(p, q, t.clamp(0.0, d)))
    }

    pub(crate) fn geodesic_unchecked(&self, p: &Point, q: &Point, t: f64) -> Point {
        match (self, p, q) {
            (SpaceModel::Euclidean { .. }, Point::Euclidean { coords: a }, Point::Euclidean { coords: b }) => {
                let d = self.distance_unchecked(p, q);
                if d == 0.0 || t <= 0.0 {
                    return p.clone();
                }
                if t >= d {
                    return q.clone();
                }
                let f = t / d;
                Point::euclidean(a.iter().zip(b).map(|(x, y)| x + f * (y - x)).collect::<Vec<_>>())
            }
            (SpaceModel::Tree(tr), Point::Tree { point: a }, Point::Tree { point: b }) => {
                tr.geodesic_eval(a, b, t).into()
            }
            (
                SpaceModel::Product(l, r),
                Point::Product { left: pl, right: pr },
                Point::Product { left: ql, right: qr },
            ) => {
                let (dl, dr) = (l.distance_unchecked(pl, ql), r.distance_unchecked(pr, qr));
                let d = dl.hypot(dr);
                if d == 0.0 {
                    return p.clone();
                }
                let f = (t / d).clamp(0.0, 1.0);
                Point::product(l.geodesic_unchecked(pl, ql, f * dl), r.geodesic_unchecked(pr, qr, f * dr))
            }
            (SpaceModel::Seaweed(s), Point::Seaweed { r: r1, theta: t1 }, Point::Seaweed { r: r2, theta: t2 }) => {
                s.geodesic_eval(&PolarPoint::new(*r1, *t1), &PolarPoint::new(*r2, *t2), t).into()
            }
            _ => unreachable!("points validated against the model"),
        }
    }

    /// Angle at `x` of the Euclidean comparison triangle for `(x, y, z)`.
    pub fn comparison_angle(&self, x: &Point, y: &Point, z: &Point) -> Result<f64> {
        let a = self.distance(x, y)?;
        let b = self.distance(x, z)?;
        let c = self.distance(y, z)?;
        if a == 0.0 || b == 0.0 {
            return Err(Error::Degenerate("comparison angle needs y != x and z != x".into()));
        }
        law_of_cosines_angle(a, b, c)
    }

    /// Geodesic retraction onto the basepoint: the point of `[x0, x]` at
    /// distance `min(t, d(x0, x))` from the basepoint.
    pub fn retraction_xi(&self, x: &Point, t: f64) -> Result<Point> {
        if !(t >= 0.0) {
            return Err(Error::param("t", format!("retraction parameter {t} is negative")));
        }
        let base = self.basepoint();
        let d = self.distance(&base, x)?;
        if t >= d {
            return Ok(x.clone());
        }
        Ok(self.geodesic_unchecked(&base, x, t))
    }
}

/// Angle opposite side `c` in a Euclidean triangle with sides `a`, `b`, `c`.
pub fn law_of_cosines_angle(a: f64, b: f64, c: f64) -> Result<f64> {
    let cos = (a * a + b * b - c * c) / (2.0 * a * b);
    clamped_acos(cos)
}

pub fn clamped_acos(x: f64) -> Result<f64> {
    if !(-1.0 - ARCCOS_SLACK..=1.0 + ARCCOS_SLACK).contains(&x) {
        return Err(Error::NumericalDomain(x));
    }
    Ok(x.clamp(-1.0, 1.0).acos())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    #[test]
    fn pythagoras() {
        let e = SpaceModel::euclidean(2);
        let d = e.distance(&Point::euclidean([0.0, 0.0]), &Point::euclidean([3.0, 4.0])).unwrap();
        assert_eq!(d, 5.0);
    }

    #[test]
    fn euclidean_midpoint() {
        let e = SpaceModel::euclidean(2);
        let m = e.geodesic_eval(&Point::euclidean([0.0, 0.0]), &Point::euclidean([2.0, 0.0]), 1.0).unwrap();
        assert_eq!(m, Point::euclidean([1.0, 0.0]));
        assert!(e.geodesic_eval(&Point::euclidean([0.0, 0.0]), &Point::euclidean([2.0, 0.0]), 2.5).is_err());
    }

    #[test]
    fn comparison_angles() {
        let e = SpaceModel::euclidean(2);
        let o = Point::euclidean([0.0, 0.0]);
        let ang = e.comparison_angle(&o, &Point::euclidean([1.0, 0.0]), &Point::euclidean([0.0, 1.0])).unwrap();
        assert_abs_diff_eq!(ang, FRAC_PI_2, epsilon = 1e-15);
        let ang = e.comparison_angle(&o, &Point::euclidean([1.0, 0.0]), &Point::euclidean([1.0, 1.0])).unwrap();
        assert_abs_diff_eq!(ang, FRAC_PI_4, epsilon = 1e-15);
        assert!(matches!(e.comparison_angle(&o, &o, &Point::euclidean([1.0, 1.0])), Err(Error::Degenerate(_))));
    }

    #[test]
    fn tree_angle_across_branches_is_pi() {
        let t =
            MetricTree::new((0..3).map(VertexLabel::Int).collect(), vec![(0, 1, 1.0), (0, 2, 2.0)], 0, None).unwrap();
        let s = SpaceModel::tree(t);
        let ang = s
            .comparison_angle(&s.basepoint(), &TreePoint::core_vertex(1).into(), &TreePoint::core_vertex(2).into())
            .unwrap();
        assert_eq!(ang, PI);
    }

    #[test]
    fn retraction_cases() {
        let e = SpaceModel::euclidean(2);
        let x = Point::euclidean([4.0, 0.0]);
        assert_eq!(e.retraction_xi(&x, 1.0).unwrap(), Point::euclidean([1.0, 0.0]));
        assert_eq!(e.retraction_xi(&x, 7.0).unwrap(), x);
        assert!(e.retraction_xi(&x, -1.0).is_err());
    }

    #[test]
    fn acos_slack_is_enforced() {
        assert_eq!(clamped_acos(1.0 + 1e-13).unwrap(), 0.0);
        assert!(matches!(clamped_acos(1.0 + 1e-9), Err(Error::NumericalDomain(_))));
    }

    #[test]
    fn mismatched_points_are_rejected() {
        let s = SpaceModel::seaweed();
        assert!(s.distance(&Point::euclidean([1.0]), &Point::seaweed(1.0, 0.0)).is_err());
        let p = SpaceModel::product(SpaceModel::euclidean(1), SpaceModel::seaweed());
        let good = Point::product(Point::euclidean([1.0]), Point::seaweed(2.0, 0.0));
        assert!(p.validate_point(&good).is_ok());
    }
}
