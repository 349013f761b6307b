use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use finsler_project::convex_sets::{ConvexSet, HalfSpace};
use finsler_project::curvature_probe::{self, build_parallelogramoid, random_frame};
use finsler_project::double_projection::{alternate, compose, CompositionMode};
use finsler_project::model_spaces::{self, distance, geodesic_point, GeodesicSegment, ModelSpace};
use finsler_project::norms::random_vector;
use finsler_project::projection::{self, project, project_backward, project_forward, variational_residual};
use finsler_project::{Direction, NormSpec, Vector};

fn randers(n: usize) -> NormSpec {
    let a = match n {
        2 => DMatrix::from_row_slice(2, 2, &[1.5, 0.4, 0.4, 1.0]),
        _ => DMatrix::from_row_slice(3, 3, &[2.0, 0.3, 0.1, 0.3, 1.0, 0.2, 0.1, 0.2, 1.5]),
    };
    let b = if n == 2 { Vector::from_vec(vec![0.35, -0.2]) } else { Vector::from_vec(vec![0.3, -0.2, 0.1]) };
    NormSpec::randers(a, b).unwrap()
}

fn smooth_specs(n: usize) -> Vec<NormSpec> {
    let mut v = vec![NormSpec::euclidean(n).unwrap(), NormSpec::pnorm(n, 4.0).unwrap(), randers(n)];
    if n == 2 {
        v.push(NormSpec::matsumoto_reference());
    }
    v
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn nonzero(r: &mut ChaCha8Rng, n: usize) -> Vector {
    loop {
        let v = random_vector(r, n);
        if v.norm() > 1e-3 {
            return v;
        }
    }
}

/// One of every set variant, chosen by `kind`.
fn random_set(r: &mut ChaCha8Rng, n: usize, kind: usize) -> ConvexSet {
    let a = random_vector(r, n);
    match kind % 5 {
        0 => ConvexSet::segment(a.clone(), &a + nonzero(r, n)).unwrap(),
        1 => ConvexSet::half_line(a, nonzero(r, n)).unwrap(),
        2 => ConvexSet::line(a, nonzero(r, n)).unwrap(),
        3 => {
            let k = r.random_range(3..6);
            ConvexSet::polytope((0..k).map(|_| random_vector(r, n)).collect()).unwrap()
        }
        _ => {
            let m = r.random_range(1..=n.min(2));
            let span: Vec<Vector> = (0..m).map(|_| nonzero(r, n)).collect();
            let cons = (0..r.random_range(1..4))
                .map(|_| HalfSpace { normal: nonzero(r, n), offset: r.random_range(0.2..1.5) })
                .collect();
            ConvexSet::affine_slab(a.clone(), span, cons).unwrap_or_else(|_| ConvexSet::segment(a.clone(), &a + nonzero(r, n)).unwrap())
        }
    }
}

/// Upper bound on the spacing of edge samples in `sample_grid(resolution, radius)`.
fn edge_spacing(set: &ConvexSet, radius: f64, resolution: usize) -> f64 {
    let steps = (resolution - 1) as f64;
    match set {
        ConvexSet::Segment { a, b } => (b - a).norm() / steps,
        ConvexSet::Polytope { vertices } => {
            let diam = vertices.iter().flat_map(|u| vertices.iter().map(move |v| (u - v).norm())).fold(0.0, f64::max);
            diam / steps
        }
        ConvexSet::AffineSlab { base, span, constraints } if span.len() == 2 => constraints
            .iter()
            .map(|h| 2.0 * (radius * 2f64.sqrt() + (h.offset - h.normal.dot(base)).abs() / h.normal.norm()) / steps)
            .fold(0.0, f64::max),
        _ => 2.0 * radius / steps,
    }
}

/// Clip radius large enough to reach the set from its base point.
fn reach(set: &ConvexSet) -> f64 {
    2.0 + 2.0 * set.euclidean_distance(&set.base_point()).unwrap()
}

/// Parameters of a random member of a one-parameter or polytope set.
fn random_member(r: &mut ChaCha8Rng, set: &ConvexSet) -> Vector {
    match set {
        ConvexSet::Segment { .. } => set.point_at(&[r.random_range(0.0..1.0)]).unwrap(),
        ConvexSet::HalfLine { .. } => set.point_at(&[r.random_range(0.0..3.0)]).unwrap(),
        ConvexSet::Line { .. } => set.point_at(&[r.random_range(-3.0..3.0)]).unwrap(),
        _ => {
            let g = set.sample_grid(9, reach(set)).unwrap();
            g[r.random_range(0..g.len())].clone()
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn norm_homogeneity_and_triangle_inequality(seed in any::<u64>(), t in 1e-3f64..10.0, n in 2usize..4) {
        let mut r = rng(seed);
        for spec in smooth_specs(n) {
            let y = nonzero(&mut r, n);
            let w = nonzero(&mut r, n);
            let fy = spec.eval(&y).unwrap();
            prop_assert!((spec.eval(&(&y * t)).unwrap() - t * fy).abs() <= 1e-9 * (1.0 + t * fy));
            prop_assert!(spec.eval(&(&y + &w)).unwrap() <= fy + spec.eval(&w).unwrap() + 1e-9);
        }
    }

    #[test]
    fn tensor_consistency(seed in any::<u64>(), n in 2usize..4) {
        let mut r = rng(seed);
        for spec in smooth_specs(n) {
            let y = nonzero(&mut r, n) * r.random_range(0.1..5.0);
            let g = spec.metric_tensor(&y).unwrap();
            let f = spec.eval(&y).unwrap();
            prop_assert!((g.apply(&y, &y) - f * f).abs() <= 1e-9 * (1.0 + f * f));
        }
    }

    #[test]
    fn finite_difference_hessian_matches_analytic(seed in any::<u64>(), n in 2usize..4) {
        let mut r = rng(seed);
        for spec in [NormSpec::euclidean(n).unwrap(), NormSpec::pnorm(n, 4.0).unwrap(), randers(n)] {
            let y = nonzero(&mut r, n);
            let exact = spec.analytic_metric_tensor(&y).unwrap().unwrap();
            let fd = spec.fd_metric_tensor(&y).unwrap();
            let scale = exact.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            for (a, b) in exact.iter().zip(fd.iter()) {
                prop_assert!((a - b).abs() <= 1e-5 * scale, "{exact} vs {fd}");
            }
        }
    }

    #[test]
    fn one_sided_fundamental_inequality(seed in any::<u64>(), n in 2usize..4) {
        let mut r = rng(seed);
        for spec in smooth_specs(n) {
            let y = nonzero(&mut r, n);
            let w = nonzero(&mut r, n);
            let res = spec.fundamental_inequality_residual(&y, &w).unwrap();
            let scale = 1.0 + spec.eval(&y).unwrap() * spec.eval(&w).unwrap();
            prop_assert!(res.one_sided_residual >= -1e-8 * scale);
        }
    }

    #[test]
    fn grids_are_members_and_deterministic(seed in any::<u64>(), kind in 0usize..5, n in 2usize..4) {
        let mut r = rng(seed);
        let set = random_set(&mut r, n, kind);
        let g = set.sample_grid(17, reach(&set)).unwrap();
        for x in &g {
            prop_assert!(set.contains(x, 1e-9).unwrap());
        }
        prop_assert_eq!(&g, &set.sample_grid(17, reach(&set)).unwrap());
    }

    #[test]
    fn sets_are_convex(seed in any::<u64>(), kind in 0usize..5, n in 2usize..4, t in 0.0f64..=1.0) {
        let mut r = rng(seed);
        let set = random_set(&mut r, n, kind);
        let x = random_member(&mut r, &set);
        let y = random_member(&mut r, &set);
        prop_assert!(set.contains(&(&x + (&y - &x) * t), 1e-9).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn solver_matches_grid_minimum(seed in any::<u64>(), kind in 0usize..5) {
        let mut r = rng(seed);
        let set = random_set(&mut r, 2, kind);
        let q = random_vector(&mut r, 2) * 1.5;
        let inside = set.contains(&q, 1e-12).unwrap();
        for spec in smooth_specs(2) {
            let s = project_forward(&spec, &set, &q).unwrap();
            let base = set.base_point();
            let radius = 0.5 + 1.25 * (&s.minimizer - &base).norm().max((&q - &base).norm());
            let grid = set.sample_grid(4001, radius).unwrap();
            if inside {
                // no lattice node need coincide with q
                prop_assert!(s.distance <= 1e-9, "{} {}: inside, solver {}", spec.kind(), set.kind(), s.distance);
                continue;
            }
            let brute = grid.iter().map(|z| spec.eval(&(z - &q)).unwrap()).fold(f64::INFINITY, f64::min);
            let what = format!("{} {}: solver {} grid {}", spec.kind(), set.kind(), s.distance, brute);
            prop_assert!(s.distance <= brute + 1e-9, "{}", what);
            // off a vertex the lattice gap is about f''·h²/8 with f'' ≲ 4/d
            let h = edge_spacing(&set, radius, 4001);
            let tol = 1e-5 + h * h / (2.0 * set.euclidean_distance(&q).unwrap());
            prop_assert!(brute - s.distance <= tol, "{} tol {}", what, tol);
        }
    }

    #[test]
    fn solver_output_is_certified_and_idempotent(seed in any::<u64>(), kind in 0usize..5, n in 2usize..4) {
        let mut r = rng(seed);
        let set = random_set(&mut r, n, kind);
        let q = random_vector(&mut r, n) * 2.0;
        for spec in smooth_specs(n) {
            for dir in [Direction::Forward, Direction::Backward] {
                let s = project(&spec, &set, &q, dir).unwrap();
                if s.distance > 1e-9 {
                    let res = variational_residual(&spec, &set, &s.minimizer, &q, dir).unwrap();
                    prop_assert!(res >= -1e-8, "{} {}: residual {res:e}", spec.kind(), set.kind());
                }
                let again = project(&spec, &set, &s.minimizer, dir).unwrap();
                prop_assert!(again.distance <= 1e-9);
            }
        }
    }

    #[test]
    fn euclidean_forward_equals_backward(seed in any::<u64>(), kind in 0usize..3, n in 2usize..5) {
        let mut r = rng(seed);
        let set = random_set(&mut r, n, kind);
        let q = random_vector(&mut r, n) * 3.0;
        let spec = NormSpec::euclidean(n).unwrap();
        let f = project_forward(&spec, &set, &q).unwrap();
        let b = project_backward(&spec, &set, &q).unwrap();
        prop_assert!((&f.minimizer - &b.minimizer).norm() <= 1e-10);
        prop_assert!((f.distance - set.euclidean_distance(&q).unwrap()).abs() <= 1e-10);
    }

    #[test]
    fn projection_commutes_with_translation(seed in any::<u64>(), kind in 0usize..5, n in 2usize..4) {
        let mut r = rng(seed);
        let set = random_set(&mut r, n, kind);
        let q = random_vector(&mut r, n) * 2.0;
        let c = random_vector(&mut r, n) * 3.0;
        for spec in smooth_specs(n) {
            let a = project_forward(&spec, &set, &q).unwrap();
            let b = project_forward(&spec, &set.translate(&c), &(&q + &c)).unwrap();
            prop_assert!((b.distance - a.distance).abs() <= 1e-8 * (1.0 + a.distance));
            prop_assert!((&b.minimizer - (&a.minimizer + &c)).norm() <= 1e-6, "{} {}", spec.kind(), set.kind());
        }
    }

    #[test]
    fn alternation_is_monotone(seed in any::<u64>()) {
        let mut r = rng(seed);
        let spec = [NormSpec::pnorm(3, 4.0).unwrap(), randers(3)][r.random_range(0..2)].clone();
        let s1 = random_set(&mut r, 3, 2);
        let k2 = r.random_range(0..3);
        let s2 = random_set(&mut r, 3, k2);
        let q0 = s1.point_at(&[r.random_range(-2.0..2.0)]).unwrap();
        let traj = alternate(&spec, &s1, &s2, &q0, 30).unwrap();
        let gaps: Vec<f64> = traj
            .points
            .iter()
            .map(|q| projection::project_forward(&spec, &s2, q).unwrap().distance)
            .collect();
        for w in gaps.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-9, "{gaps:?}");
        }
    }

    #[test]
    fn composition_lands_in_first_set(seed in any::<u64>(), mode in 0usize..4) {
        let mut r = rng(seed);
        let spec = NormSpec::matsumoto_reference();
        let (k1, k2) = (r.random_range(0..3), r.random_range(0..3));
        let s1 = random_set(&mut r, 2, k1);
        let s2 = random_set(&mut r, 2, k2);
        let q = random_vector(&mut r, 2);
        let z = compose(&spec, &s1, &s2, &q, CompositionMode::ALL[mode]).unwrap();
        prop_assert!(s1.contains(&z, 1e-8).unwrap());
    }
}

fn model(kappa: f64) -> ModelSpace {
    ModelSpace::new(kappa).unwrap()
}

fn spread(kappa: f64) -> f64 {
    if kappa > 0.0 { 1.0 } else { 2.0 }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn model_distance_is_a_metric(seed in any::<u64>(), k in prop::sample::select(vec![-1.0, 0.0, 1.0])) {
        let mut r = rng(seed);
        let s = model(k);
        let [a, b, c] = [0, 1, 2].map(|_| s.random_point(&mut r, spread(k)));
        let (ab, ba) = (distance(&a, &b).unwrap(), distance(&b, &a).unwrap());
        prop_assert!((ab - ba).abs() <= 1e-12);
        prop_assert!(distance(&a, &c).unwrap() <= ab + distance(&b, &c).unwrap() + 1e-9);
        for p in [&a, &b, &c] {
            prop_assert!(p.embedding_defect() < 1e-10);
        }
    }

    #[test]
    fn geodesic_additivity(seed in any::<u64>(), k in prop::sample::select(vec![-1.0, 0.0, 1.0]), t1 in 0.0f64..=1.0, t2 in 0.0f64..=1.0) {
        let mut r = rng(seed);
        let s = model(k);
        let seg = GeodesicSegment::new(s.random_point(&mut r, spread(k)), s.random_point(&mut r, spread(k))).unwrap();
        let (x, y) = (geodesic_point(&seg, t1).unwrap(), geodesic_point(&seg, t2).unwrap());
        prop_assert!((distance(&x, &y).unwrap() - (t2 - t1).abs() * seg.length).abs() <= 1e-9);
        prop_assert!(x.embedding_defect() < 1e-10);
    }

    #[test]
    fn comparison_triangle_round_trip(seed in any::<u64>(), k in prop::sample::select(vec![-1.0, 0.0, 1.0])) {
        let mut r = rng(seed);
        let s = model(k);
        let p = [0, 1, 2].map(|_| s.random_point(&mut r, spread(k)));
        let d = |i: usize, j: usize| distance(&p[i], &p[j]).unwrap();
        let c = model_spaces::comparison_triangle(d(0, 1), d(0, 2), d(1, 2), k).unwrap();
        let e = |i: usize, j: usize| distance(&c[i], &c[j]).unwrap();
        for (i, j) in [(0, 1), (0, 2), (1, 2)] {
            prop_assert!((d(i, j) - e(i, j)).abs() <= 1e-9);
        }
    }

    #[test]
    fn distance_is_convex_along_geodesics(seed in any::<u64>(), k in prop::sample::select(vec![-1.0, 0.0]), t in 0.0f64..=1.0, h in 0.0f64..0.5) {
        let mut r = rng(seed);
        let s = model(k);
        let g1 = GeodesicSegment::new(s.random_point(&mut r, 2.0), s.random_point(&mut r, 2.0)).unwrap();
        let g2 = GeodesicSegment::new(s.random_point(&mut r, 2.0), s.random_point(&mut r, 2.0)).unwrap();
        let (lo, hi) = ((t - h).max(0.0), (t + h).min(1.0));
        let mid = 0.5 * (lo + hi);
        let f = |u: f64| distance(&geodesic_point(&g1, u).unwrap(), &geodesic_point(&g2, u).unwrap()).unwrap();
        prop_assert!(f(mid) <= 0.5 * (f(lo) + f(hi)) + 1e-9);
    }

    #[test]
    fn hyperbolic_projection_is_nonexpansive(seed in any::<u64>()) {
        let mut r = rng(seed);
        let s = model(-1.0);
        let seg = GeodesicSegment::new(s.random_point(&mut r, 2.0), s.random_point(&mut r, 2.0)).unwrap();
        let res = model_spaces::nonexpansiveness_residual(&seg, &s.random_point(&mut r, 2.0), &s.random_point(&mut r, 2.0)).unwrap();
        prop_assert!(res >= -1e-9);
    }

    #[test]
    fn parallelogramoid_invariants(seed in any::<u64>(), k in prop::sample::select(vec![-1.0, 0.0, 1.0]), h in 0.01f64..=0.2) {
        let mut r = rng(seed);
        let s = model(k);
        let p = s.random_point(&mut r, 0.5);
        let (v, w) = random_frame(&p, &mut r);
        let pg = build_parallelogramoid(k, &p, &v, &w, h, h).unwrap();
        prop_assert!(pg.perpendicularity_defect <= 1e-10);
        let q = curvature_probe::curvature_quotient(&pg);
        if k == 0.0 {
            prop_assert!((distance(&pg.gamma0_u, &pg.gamma_tu).unwrap() - h).abs() <= 1e-12);
            prop_assert!((distance(&pg.sigma_t, &pg.gamma_tu).unwrap() - h).abs() <= 1e-12);
        } else {
            prop_assert_eq!(q.signum(), k);
            prop_assert_eq!(curvature_probe::side_defect(&pg).signum(), k);
        }
    }

    #[test]
    fn curvature_error_shrinks_at_second_order(seed in any::<u64>(), k in prop::sample::select(vec![-1.0, 1.0])) {
        let reports = curvature_probe::random_frame_estimates(k, &[0.2, 0.1, 0.05], 1, seed).unwrap();
        let rep = &reports[0];
        let errs: Vec<f64> = rep.estimates.iter().map(|e| (e - k).abs()).collect();
        prop_assert!(errs[0] > errs[1] && errs[1] > errs[2], "{rep:?}");
        for o in rep.observed_orders.iter().flatten() {
            prop_assert!((1.5..=2.5).contains(o), "{rep:?}");
        }
    }
}
