//! Perpendicular geodesic families on model surfaces, the projection
//! identities they satisfy, and a curvature estimate from the four-point
//! parallelogramoid.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{GeomError, Result};
use crate::model_spaces::{self, distance, exp, parallel_transport, GeodesicSegment, ModelPoint, ModelSpace, TangentVector};

const PERP_TOL: f64 = 1e-10;
/// Fraction of the admissible scale that `t‖V₀‖ + u‖W₀‖` may use.
const SCALE_FRACTION: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Parallelogramoid {
    pub kappa: f64,
    pub p: ModelPoint,
    pub v0: TangentVector,
    pub w0: TangentVector,
    pub t: f64,
    pub u: f64,
    pub sigma_t: ModelPoint,
    pub gamma0_u: ModelPoint,
    pub gamma_tu: ModelPoint,
    /// Transport of `W₀` to `σ(t)`.
    pub w_t: TangentVector,
    /// `|g(W(t), σ̇(t))|` for unit directions.
    pub perpendicularity_defect: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CurvatureReport {
    pub h_values: Vec<f64>,
    pub estimates: Vec<f64>,
    pub extrapolated: f64,
    pub true_kappa: f64,
    pub inequality_violations: usize,
    /// `log(e_i/e_{i+1}) / log(h_i/h_{i+1})` with `e = |estimate - κ|`;
    /// `None` when an error is at rounding level.
    pub observed_orders: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct DirectedViolation {
    pub segment: GeodesicSegment,
    pub q1: ModelPoint,
    pub q2: ModelPoint,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct NpcSummary {
    pub kappa: f64,
    pub trials: usize,
    pub nonexpansive_violations: usize,
    pub best_approximation_violations: usize,
    pub min_nonexpansive_residual: f64,
    pub min_best_approximation_residual: f64,
    pub directed: Option<DirectedViolation>,
}

/// `min(injectivity radius, π/√max(1, κ))`.
pub fn admissible_scale(kappa: f64) -> f64 {
    let inj = model_spaces::diameter(kappa);
    inj.min(std::f64::consts::PI / kappa.max(1.0).sqrt())
}

fn check_scale(kappa: f64, reach: f64) -> Result<()> {
    let bound = SCALE_FRACTION * admissible_scale(kappa);
    if !(reach < bound) {
        return Err(GeomError::ScaleBound(format!(
            "t|V0| + u|W0| = {reach} is not below {bound}"
        )));
    }
    Ok(())
}

pub fn build_parallelogramoid(
    kappa: f64,
    p: &ModelPoint,
    v0: &TangentVector,
    w0: &TangentVector,
    t: f64,
    u: f64,
) -> Result<Parallelogramoid> {
    for k in [p.kappa, v0.base.kappa, w0.base.kappa] {
        if k != kappa {
            return Err(GeomError::KappaMismatch(kappa, k));
        }
    }
    if v0.base != *p || w0.base != *p {
        return Err(GeomError::Precondition("V0 and W0 must be based at p".into()));
    }
    if !(t > 0.0 && u > 0.0 && t.is_finite() && u.is_finite()) {
        return Err(GeomError::Precondition("t and u must be positive and finite".into()));
    }
    let (nv, nw) = (v0.norm(), w0.norm());
    if nv == 0.0 || nw == 0.0 {
        return Err(GeomError::ZeroVector);
    }
    let g = v0.inner(w0);
    if g.abs() > PERP_TOL * nv * nw {
        return Err(GeomError::Precondition(format!("V0 and W0 are not perpendicular: g(V0, W0) = {g}")));
    }
    check_scale(kappa, t * nv + u * nw)?;

    let sigma_t = exp(&v0.scaled(t));
    let gamma0_u = exp(&w0.scaled(u));
    let seg = GeodesicSegment::new(p.clone(), sigma_t.clone())?;
    let w_t = parallel_transport(&seg, w0, 1.0)?;
    let gamma_tu = exp(&w_t.scaled(u));
    let vel = seg.unit_velocity(1.0);
    let perpendicularity_defect = (w_t.inner(&vel) / nw).abs();
    Ok(Parallelogramoid {
        kappa,
        p: p.clone(),
        v0: v0.clone(),
        w0: w0.clone(),
        t,
        u,
        sigma_t,
        gamma0_u,
        gamma_tu,
        w_t,
        perpendicularity_defect,
    })
}

/// Distances from the projected feet to their expected positions:
/// `P_{γ_t}(p)` against `σ(t)` and `P_{γ₀}(σ(t))` against `p`.
pub fn projection_identity_check(pg: &Parallelogramoid) -> Result<(f64, f64)> {
    let gamma_t = GeodesicSegment::new(pg.sigma_t.clone(), pg.gamma_tu.clone())?;
    let gamma_0 = GeodesicSegment::new(pg.p.clone(), pg.gamma0_u.clone())?;
    let f1 = model_spaces::project_to_geodesic(&gamma_t, &pg.p)?;
    let f2 = model_spaces::project_to_geodesic(&gamma_0, &pg.sigma_t)?;
    Ok((distance(&f1.foot, &pg.sigma_t)?, distance(&f2.foot, &pg.p)?))
}

/// `d(p, σ(t)) - d(γ₀(u), γ_t(u))`.
pub fn side_defect(pg: &Parallelogramoid) -> f64 {
    distance(&pg.p, &pg.sigma_t).unwrap() - distance(&pg.gamma0_u, &pg.gamma_tu).unwrap()
}

/// `(d²(p,σ(t)) - d²(γ₀(u),γ_t(u))) / (d²(p,γ₀(u)) · d²(p,σ(t)))`.
pub fn curvature_quotient(pg: &Parallelogramoid) -> f64 {
    let a = distance(&pg.p, &pg.sigma_t).unwrap();
    let b = distance(&pg.gamma0_u, &pg.gamma_tu).unwrap();
    let c = distance(&pg.p, &pg.gamma0_u).unwrap();
    (a - b) * (a + b) / (c * c * a * a)
}

pub fn curvature_estimate(
    kappa: f64,
    p: &ModelPoint,
    v0: &TangentVector,
    w0: &TangentVector,
    h_list: &[f64],
) -> Result<CurvatureReport> {
    if h_list.len() < 2 {
        return Err(GeomError::Precondition("need at least two h values".into()));
    }
    if h_list.iter().any(|h| !(*h > 0.0)) || h_list.windows(2).any(|w| w[1] >= w[0]) {
        return Err(GeomError::Precondition("h values must be positive and strictly decreasing".into()));
    }
    let mut estimates = Vec::with_capacity(h_list.len());
    let mut violations = 0;
    for &h in h_list {
        let pg = build_parallelogramoid(kappa, p, v0, w0, h, h)?;
        estimates.push(curvature_quotient(&pg));
        let defect = side_defect(&pg);
        let scale = 1e-12 * (1.0 + h);
        if sign_with_tol(defect, scale) != sign_with_tol(kappa, 0.0) {
            violations += 1;
        }
    }
    let n = h_list.len();
    let rho2 = (h_list[n - 2] / h_list[n - 1]).powi(2);
    let extrapolated = (rho2 * estimates[n - 1] - estimates[n - 2]) / (rho2 - 1.0);
    let observed_orders = (0..n - 1)
        .map(|i| {
            let e0 = (estimates[i] - kappa).abs();
            let e1 = (estimates[i + 1] - kappa).abs();
            if e0 < 1e-12 || e1 < 1e-12 {
                None
            } else {
                Some((e0 / e1).ln() / (h_list[i] / h_list[i + 1]).ln())
            }
        })
        .collect();
    Ok(CurvatureReport {
        h_values: h_list.to_vec(),
        estimates,
        extrapolated,
        true_kappa: kappa,
        inequality_violations: violations,
        observed_orders,
    })
}

fn sign_with_tol(x: f64, tol: f64) -> i8 {
    if x > tol {
        1
    } else if x < -tol {
        -1
    } else {
        0
    }
}

/// Unit frame `(V₀, W₀)` at the base point of `M_κ²`.
pub fn unit_frame(kappa: f64) -> Result<(ModelPoint, TangentVector, TangentVector)> {
    let space = ModelSpace::new(kappa)?;
    let (e1, e2) = space.base_frame();
    Ok((space.base_point(), e1, e2))
}

fn trial_rng(seed: u64, index: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ (index as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15))
}

/// Random unit vector at `p`, and one perpendicular to it.
pub fn random_frame<R: Rng>(p: &ModelPoint, rng: &mut R) -> (TangentVector, TangentVector) {
    let space = ModelSpace { kappa: p.kappa };
    let base = space.base_point();
    let theta = rng.random_range(0.0..std::f64::consts::TAU);
    let (e1, e2) = space.base_frame();
    let a = TangentVector {
        base: base.clone(),
        components: &e1.components * theta.cos() + &e2.components * theta.sin(),
    };
    let b = TangentVector {
        base: base.clone(),
        components: &e1.components * -theta.sin() + &e2.components * theta.cos(),
    };
    if base == *p {
        return (a, b);
    }
    let seg = GeodesicSegment::new(base, p.clone()).expect("sampled points stay inside the injectivity radius");
    let v = parallel_transport(&seg, &a, 1.0).unwrap();
    let w = parallel_transport(&seg, &b, 1.0).unwrap();
    // transport lands on the exp-computed endpoint; rebase on p exactly
    (
        TangentVector::new(p.clone(), v.components).unwrap(),
        TangentVector::new(p.clone(), w.components).unwrap(),
    )
}

/// Curvature reports at `trials` random base points with random unit
/// frames.
pub fn random_frame_estimates(kappa: f64, h_list: &[f64], trials: usize, seed: u64) -> Result<Vec<CurvatureReport>> {
    let space = ModelSpace::new(kappa)?;
    let spread = 0.25 * admissible_scale(kappa).min(4.0);
    (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(seed, i);
            let p = space.random_point(&mut rng, spread);
            let (v0, w0) = random_frame(&p, &mut rng);
            curvature_estimate(kappa, &p, &v0, &w0, h_list)
        })
        .collect()
}

/// Searches around the latitude pair over an equatorial unit segment for
/// the most expanding configuration.
fn directed_sphere_search(kappa: f64) -> Result<DirectedViolation> {
    let s = ModelSpace::new(kappa)?;
    let r = s.radius();
    let seg = GeodesicSegment::new(s.lat_lon(0.0, 0.0)?, s.lat_lon(0.0, 1.0 / r)?)?;
    let mut best: Option<DirectedViolation> = None;
    for i in 0..=8 {
        for j in 0..=8 {
            let lat = (0.4 + 0.05 * i as f64) / r;
            let gap = (0.3 + 0.05 * j as f64) / r;
            let q1 = s.lat_lon(lat, 0.5 / r - 0.5 * gap)?;
            let q2 = s.lat_lon(lat, 0.5 / r + 0.5 * gap)?;
            let residual = model_spaces::nonexpansiveness_residual(&seg, &q1, &q2)?;
            if best.as_ref().is_none_or(|b| residual < b.residual) {
                best = Some(DirectedViolation { segment: seg.clone(), q1, q2, residual });
            }
        }
    }
    Ok(best.expect("search grid is non-empty"))
}

/// Randomized non-expansiveness and side-defect trials within the scale
/// bound, plus a directed search on `κ > 0`.
pub fn npc_projection_test(kappa: f64, trials: usize, seed: u64) -> Result<NpcSummary> {
    if trials == 0 {
        return Err(GeomError::Precondition("need at least one trial".into()));
    }
    let space = ModelSpace::new(kappa)?;
    let spread = 0.25 * admissible_scale(kappa).min(4.0);
    let results: Vec<Result<(f64, f64)>> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(seed, i);
            let a = space.random_point(&mut rng, spread);
            let b = space.random_point(&mut rng, spread);
            let q1 = space.random_point(&mut rng, spread);
            let q2 = space.random_point(&mut rng, spread);
            let seg = GeodesicSegment::new(a, b)?;
            let ne = model_spaces::nonexpansiveness_residual(&seg, &q1, &q2)?;
            let p = space.random_point(&mut rng, spread);
            let (v0, w0) = random_frame(&p, &mut rng);
            let h = rng.random_range(0.01..0.3) * admissible_scale(kappa).min(1.0);
            let pg = build_parallelogramoid(kappa, &p, &v0, &w0, h, h)?;
            Ok((ne, -side_defect(&pg)))
        })
        .collect();
    let mut summary = NpcSummary {
        kappa,
        trials,
        nonexpansive_violations: 0,
        best_approximation_violations: 0,
        min_nonexpansive_residual: f64::INFINITY,
        min_best_approximation_residual: f64::INFINITY,
        directed: None,
    };
    for r in results {
        let (ne, ba) = r?;
        summary.min_nonexpansive_residual = summary.min_nonexpansive_residual.min(ne);
        summary.min_best_approximation_residual = summary.min_best_approximation_residual.min(ba);
        summary.nonexpansive_violations += (ne < -1e-9) as usize;
        summary.best_approximation_violations += (ba < -1e-9) as usize;
    }
    if kappa > 0.0 {
        let d = directed_sphere_search(kappa)?;
        if d.residual < -1e-9 {
            summary.nonexpansive_violations += 1;
        }
        summary.min_nonexpansive_residual = summary.min_nonexpansive_residual.min(d.residual);
        summary.directed = Some(d);
    }
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::norms::Vector;

    #[test]
    fn flat_rectangle() {
        let (p, v, w) = unit_frame(0.0).unwrap();
        let pg = build_parallelogramoid(0.0, &p, &v.scaled(1.3), &w, 0.4, 0.7).unwrap();
        let side = distance(&pg.gamma0_u, &pg.gamma_tu).unwrap();
        assert!((side - 0.4 * 1.3).abs() < 1e-12);
        assert!((distance(&pg.sigma_t, &pg.gamma_tu).unwrap() - 0.7).abs() < 1e-12);
        let (r1, r2) = projection_identity_check(&pg).unwrap();
        assert!(r1 < 1e-12 && r2 < 1e-12);
    }

    #[test]
    fn side_defect_sign_tracks_curvature() {
        for (k, sign) in [(1.0, 1.0), (-1.0, -1.0)] {
            let (p, v, w) = unit_frame(k).unwrap();
            let pg = build_parallelogramoid(k, &p, &v, &w, 0.1, 0.1).unwrap();
            assert_eq!(side_defect(&pg).signum(), sign);
            assert!(pg.perpendicularity_defect < 1e-10);
        }
    }

    #[test]
    fn sphere_quotient_matches_closed_form() {
        // equatorial frame on the unit sphere: cos d = sin²u + cos²u cos t
        let (p, v, w) = unit_frame(1.0).unwrap();
        let h: f64 = 0.1;
        let pg = build_parallelogramoid(1.0, &p, &v, &w, h, h).unwrap();
        let d = (h.sin().powi(2) + h.cos().powi(2) * h.cos()).acos();
        let oracle = (h * h - d * d) / h.powi(4);
        assert!((curvature_quotient(&pg) - oracle).abs() < 1e-9);
    }

    #[test]
    fn rejects_bad_inputs() {
        let (p, v, w) = unit_frame(1.0).unwrap();
        let skew = TangentVector::new(p.clone(), &v.components + &w.components * 0.1).unwrap();
        assert!(matches!(build_parallelogramoid(1.0, &p, &skew, &w, 0.1, 0.1), Err(GeomError::Precondition(_))));
        assert!(matches!(build_parallelogramoid(1.0, &p, &v, &w, 1.0, 1.0), Err(GeomError::ScaleBound(_))));
        let zero = TangentVector::new(p.clone(), Vector::zeros(3)).unwrap();
        assert!(matches!(build_parallelogramoid(1.0, &p, &zero, &w, 0.1, 0.1), Err(GeomError::ZeroVector)));
        assert!(curvature_estimate(1.0, &p, &v, &w, &[0.1, 0.2]).is_err());
    }

    #[test]
    fn curvature_estimates() {
        let h = [0.2, 0.1, 0.05];
        for k in [0.0, 1.0, -1.0] {
            let (p, v, w) = unit_frame(k).unwrap();
            let r = curvature_estimate(k, &p, &v, &w, &h).unwrap();
            if k == 0.0 {
                assert!(r.estimates.iter().all(|e| e.abs() < 1e-9));
                assert!(r.extrapolated.abs() < 1e-9);
            } else {
                assert!((r.extrapolated - k).abs() < 0.05, "{r:?}");
                for o in r.observed_orders.iter().flatten() {
                    assert!((1.5..=2.5).contains(o), "{r:?}");
                }
            }
            assert_eq!(r.inequality_violations, 0);
        }
    }

    #[test]
    fn sphere_identities_hold_inside_scale_bound() {
        // reflection symmetry keeps both feet exact on the sphere as well
        let (p, v, w) = unit_frame(1.0).unwrap();
        let pg = build_parallelogramoid(1.0, &p, &v, &w, 0.7, 0.7).unwrap();
        let (r1, r2) = projection_identity_check(&pg).unwrap();
        assert!(r1 < 1e-7 && r2 < 1e-7);
    }

    #[test]
    fn npc_trials() {
        for k in [0.0, -1.0] {
            let s = npc_projection_test(k, 100, 3).unwrap();
            assert_eq!(s.nonexpansive_violations, 0, "{s:?}");
            assert_eq!(s.best_approximation_violations, 0, "{s:?}");
        }
        let s = npc_projection_test(1.0, 20, 3).unwrap();
        let d = s.directed.unwrap();
        assert!(d.residual < -1e-3);
        assert!(s.best_approximation_violations > 0);
    }
}
