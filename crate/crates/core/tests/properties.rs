use cat0_core::boundary_metrics::{cone_metric_radii, visual_distance, BoundaryConfig};
use cat0_core::experiments::{run_scenario, template, RunOptions};
use cat0_core::oracle::{reference_angle, seaweed_oracle_distance};
use cat0_core::sampling::{random_point, random_ray, random_tree};
use cat0_core::space_models::{Point, SpaceModel};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn space(rng: &mut ChaCha8Rng, kind: u8) -> SpaceModel {
    match kind % 4 {
        0 => SpaceModel::euclidean(rng.gen_range(1..=4)),
        1 => SpaceModel::tree(random_tree(rng, 24).unwrap()),
        2 => SpaceModel::seaweed(),
        _ => SpaceModel::product(SpaceModel::tree(random_tree(rng, 8).unwrap()), SpaceModel::seaweed()),
    }
}

fn points(rng: &mut ChaCha8Rng, s: &SpaceModel, n: usize) -> Vec<Point> {
    (0..n).map(|_| random_point(rng, s, 20.0)).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn distances_are_metrics(seed in any::<u64>(), kind in 0u8..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = space(&mut rng, kind);
        let p = points(&mut rng, &s, 3);
        let d = |i: usize, j: usize| s.distance(&p[i], &p[j]).unwrap();
        prop_assert_eq!(d(0, 0), 0.0);
        prop_assert_eq!(d(0, 1), d(1, 0));
        prop_assert!(d(0, 2) <= d(0, 1) + d(1, 2) + 1e-9 * (1.0 + d(0, 2)));
    }

    #[test]
    fn geodesics_have_unit_speed(seed in any::<u64>(), kind in 0u8..4, f in 0.0f64..=1.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = space(&mut rng, kind);
        let p = points(&mut rng, &s, 2);
        let d = s.distance(&p[0], &p[1]).unwrap();
        let m = s.geodesic_eval(&p[0], &p[1], f * d).unwrap();
        let tol = 1e-9 * (1.0 + d);
        prop_assert!((s.distance(&p[0], &m).unwrap() - f * d).abs() <= tol);
        prop_assert!((s.distance(&m, &p[1]).unwrap() - (1.0 - f) * d).abs() <= tol);
    }

    /// Midpoint inequality characterizing non-positive curvature.
    #[test]
    fn midpoints_satisfy_the_cn_inequality(seed in any::<u64>(), kind in 0u8..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = space(&mut rng, kind);
        let p = points(&mut rng, &s, 3);
        let d = |a: &Point, b: &Point| s.distance(a, b).unwrap();
        let m = s.geodesic_eval(&p[0], &p[1], 0.5 * d(&p[0], &p[1])).unwrap();
        let lhs = d(&p[2], &m).powi(2);
        let rhs = 0.5 * d(&p[2], &p[0]).powi(2) + 0.5 * d(&p[2], &p[1]).powi(2) - 0.25 * d(&p[0], &p[1]).powi(2);
        prop_assert!(lhs <= rhs + 1e-7 * (1.0 + rhs.abs()), "{} > {}", lhs, rhs);
    }

    #[test]
    fn visual_distance_is_bounded_and_symmetric(seed in any::<u64>(), kind in 0u8..3, c in 0.1f64..4.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = space(&mut rng, kind);
        let (a, b) = (random_ray(&mut rng, &s), random_ray(&mut rng, &s));
        let cfg = BoundaryConfig::default();
        let ab = visual_distance(&s, &a, &b, c, &cfg).unwrap().value;
        prop_assert_eq!(ab, visual_distance(&s, &b, &a, c, &cfg).unwrap().value);
        // the rays start together, so they stay C-close at least until C / 2,
        // up to the bisection tolerance on that time
        prop_assert!((0.0..=2.0 / c * (1.0 + 1e-9)).contains(&ab));
    }

    /// The cone over the boundary angle is itself a metric.
    #[test]
    fn cone_metric_triangle(seed in any::<u64>(), kind in 0u8..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = space(&mut rng, kind);
        let rays: Vec<_> = (0..3).map(|_| random_ray(&mut rng, &s)).collect();
        let t: Vec<f64> = (0..3).map(|_| rng.gen_range(0.0..5.0)).collect();
        let d = |i: usize, j: usize| cone_metric_radii(t[i], t[j], reference_angle(&s, &rays[i], &rays[j]).unwrap()).unwrap();
        prop_assert!(d(0, 2) <= d(0, 1) + d(1, 2) + 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// The graph search only finds honest paths, so it can never beat the
    /// closed form, and with fine spacing it comes close.
    #[test]
    fn seaweed_distance_against_graph_search(r1 in 1.0f64..30.0, t1 in -8.0f64..8.0, r2 in 1.0f64..30.0, t2 in -8.0f64..8.0) {
        let s = SpaceModel::seaweed();
        let (p, q) = (Point::seaweed(r1, t1), Point::seaweed(r2, t2));
        let exact = s.distance(&p, &q).unwrap();
        let oracle = seaweed_oracle_distance(p.as_polar().unwrap(), q.as_polar().unwrap(), 1e-3).unwrap().length;
        prop_assert!(oracle >= exact - 1e-9 * (1.0 + exact));
        prop_assert!(oracle <= exact * (1.0 + 1e-4) + 1e-9);
    }
}

#[test]
fn reports_are_reproducible() {
    for name in ["metric-audit", "theta-commute", "cut-point", "scale-lattice"] {
        let s = template(name).unwrap();
        let a = run_scenario(&s, RunOptions::default()).unwrap();
        let b = run_scenario(&s, RunOptions::default()).unwrap();
        assert_eq!(a.rows_csv().unwrap(), b.rows_csv().unwrap(), "{name}");
        assert_eq!(a.to_json().unwrap(), b.to_json().unwrap(), "{name}");
    }
}

#[test]
fn seeds_change_random_draws() {
    let mut s = template("metric-audit").unwrap();
    let a = run_scenario(&s, RunOptions::default()).unwrap();
    s.seed += 1;
    let b = run_scenario(&s, RunOptions::default()).unwrap();
    assert_ne!(a.rows_csv().unwrap(), b.rows_csv().unwrap());
}

#[test]
fn tolerance_overrides_apply() {
    let mut s = template("sine-formula").unwrap();
    s.tolerances.insert("seaweed".into(), -1.0);
    assert!(run_scenario(&s, RunOptions::default()).is_err());
    let s = template("sine-formula").unwrap();
    assert!(run_scenario(&s, RunOptions { default_tolerance: Some(0.0) }).is_err());
    assert!(run_scenario(&s, RunOptions { default_tolerance: Some(1e-8) }).unwrap().passed());
}
