use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::space_models::{Point, SpaceModel};

/// `sup_{a ∈ A} inf_{b ∈ B} d(a, b)` over finite samples.
pub fn directed_hausdorff(space: &SpaceModel, a: &[Point], b: &[Point]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::param("samples", "empty point set"));
    }
    let nearest = a
        .par_iter()
        .map(|p| b.iter().try_fold(f64::INFINITY, |acc, q| Ok(acc.min(space.distance(p, q)?))))
        .collect::<Result<Vec<f64>>>()?;
    Ok(nearest.into_iter().fold(0.0, f64::max))
}

/// Hausdorff distance between two finite samples.
pub fn hausdorff_distance(space: &SpaceModel, a: &[Point], b: &[Point]) -> Result<f64> {
    Ok(directed_hausdorff(space, a, b)?.max(directed_hausdorff(space, b, a)?))
}

/// Neighbourhood radius containing a `(L, C)`-quasi-geodesic ray `β` when
/// the `(L', C')`-quasi-geodesic ray `α` lies in the `M`-neighbourhood of
/// `β`: consecutive parameters `t_n` with `d(β(t_n), α(n)) <= M` are at
/// most `L(2M + L' + C' + C)` apart, and every `β(t)` in between is close to
/// some `α(n)`.
pub fn close_rays_bound(l: f64, c: f64, l2: f64, c2: f64, m: f64) -> f64 {
    l * l * (2.0 * m + l2 + c2 + c) + c + m
}

/// Largest violation of `|s - t|/L - C <= d(x_s, x_t) <= L|s - t| + C` over
/// all pairs of the parameterized sample (non-positive when it holds).
pub fn quasi_geodesic_defect(space: &SpaceModel, params: &[f64], points: &[Point], l: f64, c: f64) -> Result<f64> {
    if params.len() != points.len() {
        return Err(Error::param("params", "one parameter per point"));
    }
    if !(l >= 1.0 && c >= 0.0) {
        return Err(Error::param("l", format!("need L >= 1 and C >= 0, got ({l}, {c})")));
    }
    let worst = (0..points.len())
        .into_par_iter()
        .map(|i| -> Result<f64> {
            let mut w = f64::NEG_INFINITY;
            for j in 0..i {
                let d = space.distance(&points[i], &points[j])?;
                let dt = (params[i] - params[j]).abs();
                w = w.max(d - (l * dt + c)).max((dt / l - c) - d);
            }
            Ok(w)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(worst.into_iter().fold(f64::NEG_INFINITY, f64::max))
}

pub fn is_quasi_geodesic(space: &SpaceModel, params: &[f64], points: &[Point], l: f64, c: f64) -> Result<bool> {
    let scale = params.iter().fold(1.0f64, |acc, t| acc.max(t.abs()));
    Ok(quasi_geodesic_defect(space, params, points, l, c)? <= 1e-9 * scale)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_and_parallel_sets() {
        let e = SpaceModel::euclidean(2);
        let a: Vec<Point> = (0..=100).map(|k| Point::euclidean([k as f64 * 0.1, 0.0])).collect();
        let b: Vec<Point> = (0..=100).map(|k| Point::euclidean([k as f64 * 0.1, 1.0])).collect();
        assert_eq!(hausdorff_distance(&e, &a, &a).unwrap(), 0.0);
        assert!((hausdorff_distance(&e, &a, &b).unwrap() - 1.0).abs() < 1e-12);
        assert!(hausdorff_distance(&e, &a, &[]).is_err());
    }

    #[test]
    fn directed_distances_differ() {
        let e = SpaceModel::euclidean(1);
        let a = vec![Point::euclidean([0.0])];
        let b = vec![Point::euclidean([0.0]), Point::euclidean([5.0])];
        assert_eq!(directed_hausdorff(&e, &a, &b).unwrap(), 0.0);
        assert_eq!(directed_hausdorff(&e, &b, &a).unwrap(), 5.0);
    }

    #[test]
    fn slow_line_is_quasi_geodesic() {
        let e = SpaceModel::euclidean(2);
        let params: Vec<f64> = (0..50).map(|k| k as f64).collect();
        let pts: Vec<Point> = params.iter().map(|t| Point::euclidean([t / 2.0, 0.0])).collect();
        assert!(is_quasi_geodesic(&e, &params, &pts, 2.0, 0.0).unwrap());
        assert!(!is_quasi_geodesic(&e, &params, &pts, 1.5, 0.0).unwrap());
    }
}
