//! Forward and backward metric projections onto [`ConvexSet`]s.
//!
//! The forward projection of `q` minimizes `s ↦ F(s - q)`, the backward one
//! minimizes `s ↦ F(q - s)`. Along any affine parametrization of the set
//! the objective is convex, so one-parameter sets are handled by a single
//! 1-D minimization and multi-parameter sets by cyclic descent over
//! feasible directions, each step being a 1-D minimization.

use serde::Serialize;

use crate::convex_sets::{combinations, dot, ConvexSet};
use crate::error::{GeomError, Result};
use crate::norms::{check_dim, NormSpec, Vector};
use crate::search::minimize_1d;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Forward,
    Backward,
}

impl Direction {
    pub fn sign(self) -> f64 {
        match self {
            Direction::Forward => 1.0,
            Direction::Backward => -1.0,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Direction::Forward => '+',
            Direction::Backward => '-',
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ProjectionResult {
    #[serde(serialize_with = "crate::ser::vector")]
    pub minimizer: Vector,
    pub distance: f64,
    pub parameters: Vec<f64>,
    /// `+∞` when the query lies in the set, NaN for the non-smooth norm.
    pub variational_residual: f64,
    pub unique_certified: bool,
}

/// Raw solver output.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Solved {
    pub minimizer: Vector,
    pub distance: f64,
    pub parameters: Vec<f64>,
    pub flat: bool,
}

const CYCLE_TOL: f64 = 1e-11;
const MAX_CYCLES: usize = 20_000;

/// Objective `s ↦ F(σ(s - q))` with `σ = ±1` for forward/backward mode.
struct Objective<'a> {
    spec: &'a NormSpec,
    q: &'a Vector,
    sign: f64,
}

impl Objective<'_> {
    fn at(&self, s: &[f64], buf: &mut [f64]) -> f64 {
        for ((b, si), qi) in buf.iter_mut().zip(s).zip(self.q.iter()) {
            *b = self.sign * (si - qi);
        }
        self.spec.value(buf)
    }

    /// Whether stepping `t·vel` from `s` to a point valued `value` descends.
    /// Values within a few ulps are decided by the slope, since near the
    /// minimum the objective changes by less than its rounding error.
    fn descends(&self, s: &[f64], vel: &[f64], t: f64, value: f64, buf: &mut [f64]) -> bool {
        let f0 = self.at(s, buf);
        let noise = 4.0 * f64::EPSILON * f0.abs();
        if t == 0.0 || value > f0 + noise {
            return false;
        }
        if value < f0 - noise {
            return true;
        }
        let step: Vec<f64> = vel.iter().map(|v| self.sign * v * t.signum()).collect();
        self.spec.dir_derivative(buf, &step) < 0.0
    }

    /// Objective and right derivative along `vel` at `o + t·vel`.
    fn line<'b>(&'b self, o: &'b [f64], vel: &'b [f64]) -> (impl Fn(f64) -> f64 + 'b, impl Fn(f64) -> f64 + 'b) {
        let n = o.len();
        let point = move |t: f64| -> Vec<f64> {
            (0..n).map(|i| self.sign * (o[i] + t * vel[i] - self.q[i])).collect()
        };
        let svel: Vec<f64> = vel.iter().map(|v| self.sign * v).collect();
        let f = move |t: f64| self.spec.value(&point(t));
        let df = move |t: f64| self.spec.dir_derivative(&point(t), &svel);
        (f, df)
    }
}

fn check_inputs(spec: &NormSpec, set: &ConvexSet, q: &Vector) -> Result<()> {
    check_dim(q, spec.dim())?;
    if set.dim() != spec.dim() {
        return Err(GeomError::DimensionMismatch {
            expected: spec.dim(),
            found: set.dim(),
        });
    }
    if !spec.is_smooth() && !matches!(set, ConvexSet::Segment { .. }) {
        return Err(GeomError::UnsupportedVariant(format!(
            "the non-smooth norm only projects onto segments, not onto a {}",
            set.kind()
        )));
    }
    Ok(())
}

/// Minimizes the projection objective. `start` overrides the default
/// initial parameters.
pub(crate) fn solve(spec: &NormSpec, set: &ConvexSet, q: &Vector, dir: Direction, start: Option<&[f64]>) -> Result<Solved> {
    check_inputs(spec, set, q)?;
    let obj = Objective { spec, q, sign: dir.sign() };
    match set {
        ConvexSet::Polytope { vertices } => solve_polytope(&obj, vertices, start),
        ConvexSet::AffineSlab { base, span, .. } => solve_slab(&obj, set, base, span, start),
        _ => {
            let (o, vel) = set.ray().expect("one-parameter variant");
            let (lo, hi) = set.interval().expect("one-parameter variant");
            let vel_norm2 = vel.norm_squared();
            if vel_norm2 == 0.0 {
                let mut buf = vec![0.0; q.len()];
                return Ok(Solved {
                    minimizer: o.clone(),
                    distance: obj.at(o.as_slice(), &mut buf),
                    parameters: vec![0.0],
                    flat: false,
                });
            }
            let scale = if hi - lo <= 1.0 { 1.0 } else { 1f64.max((q - o).norm()) };
            let t0 = match start {
                Some(s) if s.len() == 1 => s[0],
                _ => (q - o).dot(&vel) / vel_norm2,
            };
            let (f, df) = obj.line(o.as_slice(), vel.as_slice());
            let m = minimize_1d(&f, &df, lo, hi, t0, scale)?;
            Ok(Solved {
                minimizer: o + &vel * m.t,
                distance: m.value,
                parameters: vec![m.t],
                flat: m.flat,
            })
        }
    }
}

fn solve_polytope(obj: &Objective<'_>, vertices: &[Vector], start: Option<&[f64]>) -> Result<Solved> {
    let nv = vertices.len();
    let n = obj.q.len();
    let mut w = match start {
        Some(s) if s.len() == nv => s.to_vec(),
        _ => {
            let nearest = (0..nv)
                .min_by(|&i, &j| {
                    (&vertices[i] - obj.q)
                        .norm()
                        .total_cmp(&(&vertices[j] - obj.q).norm())
                })
                .expect("non-empty polytope");
            let mut w = vec![0.0; nv];
            w[nearest] = 1.0;
            w
        }
    };
    let mut s = vertices.iter().zip(&w).fold(Vector::zeros(n), |acc, (v, x)| acc + v * *x);
    let scale = 1.0;
    let mut flat = false;
    let mut buf = vec![0.0; n];
    for _ in 0..MAX_CYCLES {
        let mut moved = 0.0f64;
        flat = false;
        let w_old = w.clone();
        for i in 0..nv {
            for j in 0..nv {
                if i >= j {
                    continue;
                }
                // move mass θ from vertex j to vertex i
                let lo = -w[i];
                let hi = w[j];
                if hi - lo <= 0.0 {
                    continue;
                }
                let vel = &vertices[i] - &vertices[j];
                if vel.norm() == 0.0 {
                    continue;
                }
                let m = {
                    let (f, df) = obj.line(s.as_slice(), vel.as_slice());
                    minimize_1d(&f, &df, lo, hi, 0.0, scale)?
                };
                if obj.descends(s.as_slice(), vel.as_slice(), m.t, m.value, &mut buf) {
                    w[i] += m.t;
                    w[j] -= m.t;
                    // snap mass lost to rounding
                    if w[i] < 0.0 {
                        w[i] = 0.0;
                    }
                    if w[j] < 0.0 {
                        w[j] = 0.0;
                    }
                    s += &vel * m.t;
                    moved = moved.max((&vel * m.t).norm());
                }
                flat |= m.flat;
            }
        }
        // extrapolate along the net move of the cycle, which the pairwise
        // steps only zigzag towards
        let mut dw: Vec<f64> = w.iter().zip(&w_old).map(|(a, b)| a - b).collect();
        let drift = dw.iter().sum::<f64>() / nv as f64;
        dw.iter_mut().for_each(|d| *d -= drift);
        let hi = w
            .iter()
            .zip(&dw)
            .filter(|(_, d)| **d < 0.0)
            .map(|(x, d)| x / -d)
            .fold(f64::INFINITY, f64::min);
        let vel = vertices.iter().zip(&dw).fold(Vector::zeros(n), |acc, (v, d)| acc + v * *d);
        if moved >= CYCLE_TOL && hi.is_finite() && hi > 0.0 && vel.norm() > 0.0 {
            let m = {
                let (f, df) = obj.line(s.as_slice(), vel.as_slice());
                minimize_1d(&f, &df, 0.0, hi, 0.0, scale)?
            };
            if obj.descends(s.as_slice(), vel.as_slice(), m.t, m.value, &mut buf) {
                for (x, d) in w.iter_mut().zip(&dw) {
                    *x = (*x + m.t * d).max(0.0);
                }
                let total: f64 = w.iter().sum();
                w.iter_mut().for_each(|x| *x /= total);
                s = vertices.iter().zip(&w).fold(Vector::zeros(n), |acc, (v, x)| acc + v * *x);
            }
        }
        if moved < CYCLE_TOL {
            break;
        }
    }
    let total: f64 = w.iter().sum();
    for x in w.iter_mut() {
        *x /= total;
    }
    let s = vertices.iter().zip(&w).fold(Vector::zeros(n), |acc, (v, x)| acc + v * *x);
    let distance = obj.at(s.as_slice(), &mut buf);
    Ok(Solved {
        minimizer: s,
        distance,
        parameters: w,
        flat,
    })
}

fn solve_slab(obj: &Objective<'_>, set: &ConvexSet, base: &Vector, span: &[Vector], start: Option<&[f64]>) -> Result<Solved> {
    let m = span.len();
    let n = base.len();
    let c0 = match start {
        Some(s) if s.len() == m => s.to_vec(),
        _ => set
            .slab_feasible_coeffs()
            .ok_or_else(|| GeomError::InvalidSet("slab has no feasible point".into()))?,
    };
    let mut buf = vec![0.0; n];
    let Some((u, to_coeff, cons)) = set.slab_frame() else {
        let s = base.clone();
        let distance = obj.at(s.as_slice(), &mut buf);
        return Ok(Solved { minimizer: s, distance, parameters: c0, flat: false });
    };
    // descend in orthonormal coordinates; raw span coefficients can be
    // badly conditioned
    let offset = span.iter().zip(&c0).fold(Vector::zeros(n), |acc, (d, x)| acc + d * *x);
    let mut x: Vec<f64> = (u.transpose() * offset).iter().copied().collect();
    let point = |x: &[f64]| base + &u * Vector::from_column_slice(x);
    let scale = 1f64.max((obj.q - base).norm());
    let mut flat = false;
    for _ in 0..MAX_CYCLES {
        let directions = slab_directions(m, &cons, &x);
        let mut moved = 0.0f64;
        flat = false;
        let x_old = x.clone();
        for d in &directions {
            let (lo, hi) = feasible_interval(&cons, &x, d);
            if !(hi > lo) {
                continue;
            }
            let s = point(&x);
            let vel = &u * Vector::from_column_slice(d);
            let (f, df) = obj.line(s.as_slice(), vel.as_slice());
            let r = minimize_1d(&f, &df, lo, hi, 0.0, scale)?;
            if obj.descends(s.as_slice(), vel.as_slice(), r.t, r.value, &mut buf) {
                for (xi, di) in x.iter_mut().zip(d) {
                    *xi += r.t * di;
                }
                moved = moved.max((&vel * r.t).norm());
            }
            flat |= r.flat;
        }
        let dx: Vec<f64> = x.iter().zip(&x_old).map(|(a, b)| a - b).collect();
        if moved >= CYCLE_TOL {
            let (_, hi) = feasible_interval(&cons, &x, &dx);
            if hi > 0.0 {
                let s = point(&x);
                let vel = &u * Vector::from_column_slice(&dx);
                let (f, df) = obj.line(s.as_slice(), vel.as_slice());
                let r = minimize_1d(&f, &df, 0.0, hi.min(1e6), 0.0, scale)?;
                if obj.descends(s.as_slice(), vel.as_slice(), r.t, r.value, &mut buf) {
                    for (xi, di) in x.iter_mut().zip(&dx) {
                        *xi += r.t * di;
                    }
                }
            }
        }
        if moved < CYCLE_TOL {
            break;
        }
    }
    let s = point(&x);
    let distance = obj.at(s.as_slice(), &mut buf);
    let parameters = (to_coeff * Vector::from_column_slice(&x)).iter().copied().collect();
    Ok(Solved { minimizer: s, distance, parameters, flat })
}

/// Coordinate axes plus their projections onto the null spaces of small
/// subsets of the active constraints, so the descent can slide along faces.
fn slab_directions(m: usize, cons: &[(Vec<f64>, f64)], c: &[f64]) -> Vec<Vec<f64>> {
    let axes: Vec<Vec<f64>> = (0..m)
        .map(|j| {
            let mut e = vec![0.0; m];
            e[j] = 1.0;
            e
        })
        .collect();
    let active: Vec<usize> = cons
        .iter()
        .enumerate()
        .filter(|(_, (a, b))| b - dot(a, c) <= 1e-9 * (1.0 + b.abs()))
        .map(|(k, _)| k)
        .collect();
    let mut out = axes.clone();
    let max_k = active.len().min(m.saturating_sub(1));
    for k in 1..=max_k {
        for subset in combinations(active.len(), k).into_iter().take(64) {
            let normals: Vec<&Vec<f64>> = subset.iter().map(|&i| &cons[active[i]].0).collect();
            let basis = gram_schmidt(&normals);
            for e in &axes {
                let mut d = e.clone();
                for u in &basis {
                    let proj = dot(&d, u);
                    for (di, ui) in d.iter_mut().zip(u) {
                        *di -= proj * ui;
                    }
                }
                let len = dot(&d, &d).sqrt();
                if len > 1e-8 {
                    out.push(d.iter().map(|x| x / len).collect());
                }
            }
        }
    }
    out
}

fn gram_schmidt(vs: &[&Vec<f64>]) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for v in vs {
        let mut w = (*v).clone();
        for u in &basis {
            let p = dot(&w, u);
            for (wi, ui) in w.iter_mut().zip(u) {
                *wi -= p * ui;
            }
        }
        let len = dot(&w, &w).sqrt();
        if len > 1e-12 {
            basis.push(w.iter().map(|x| x / len).collect());
        }
    }
    basis
}

/// Range of θ keeping `c + θd` feasible.
fn feasible_interval(cons: &[(Vec<f64>, f64)], c: &[f64], d: &[f64]) -> (f64, f64) {
    let mut lo = f64::NEG_INFINITY;
    let mut hi = f64::INFINITY;
    for (a, b) in cons {
        let ad = dot(a, d);
        let slack = (b - dot(a, c)).max(0.0);
        let na = dot(a, a).sqrt();
        if ad.abs() <= 1e-14 * na.max(1.0) {
            continue;
        }
        let lim = slack / ad;
        if ad > 0.0 {
            hi = hi.min(lim);
        } else {
            lo = lo.max(lim);
        }
    }
    (lo.min(0.0), hi.max(0.0))
}

fn probe_radius(set: &ConvexSet, q: &Vector, s: &Vector) -> f64 {
    let base = set.base_point();
    10.0 * (1.0 + (q - &base).norm() + (s - &base).norm())
}

fn residual_unchecked(spec: &NormSpec, set: &ConvexSet, s: &Vector, q: &Vector, dir: Direction) -> Result<f64> {
    let y = (s - q) * dir.sign();
    if y.iter().all(|&x| x == 0.0) {
        return Ok(f64::INFINITY);
    }
    let fy = spec.value(y.as_slice());
    let grad = spec.gradient(&y)?;
    let probes = set.sample_grid(64, probe_radius(set, q, s))?;
    // forward: min g_y(y, z - s); backward: -max g_y(y, z - s)
    let mut worst = f64::INFINITY;
    for z in probes {
        let g = fy * grad.dot(&(z - s));
        worst = worst.min(dir.sign() * g);
    }
    Ok(worst)
}

/// Variational-inequality certificate of `s` as the projection of `q`.
/// Non-negative (up to rounding) iff `s` is optimal.
pub fn variational_residual(spec: &NormSpec, set: &ConvexSet, s: &Vector, q: &Vector, dir: Direction) -> Result<f64> {
    check_inputs(spec, set, q)?;
    check_dim(s, spec.dim())?;
    if !spec.is_smooth() {
        return Err(GeomError::UnsupportedVariant(
            "variational certificate of the non-smooth norm".into(),
        ));
    }
    if !set.contains(s, 1e-9)? {
        return Err(GeomError::Precondition("candidate is not a member of the set".into()));
    }
    residual_unchecked(spec, set, s, q, dir)
}

pub fn project(spec: &NormSpec, set: &ConvexSet, q: &Vector, dir: Direction) -> Result<ProjectionResult> {
    let solved = solve(spec, set, q, dir, None)?;
    let residual = if spec.is_smooth() {
        residual_unchecked(spec, set, &solved.minimizer, q, dir)?
    } else {
        f64::NAN
    };
    let unique = !solved.flat && (!spec.is_smooth() || residual >= -1e-8);
    Ok(ProjectionResult {
        minimizer: solved.minimizer,
        distance: solved.distance,
        parameters: solved.parameters,
        variational_residual: residual,
        unique_certified: unique,
    })
}

/// `P⁺_S(q)`: minimizer of `s ↦ d_F(q, s) = F(s - q)`.
pub fn project_forward(spec: &NormSpec, set: &ConvexSet, q: &Vector) -> Result<ProjectionResult> {
    project(spec, set, q, Direction::Forward)
}

/// `P⁻_S(q)`: minimizer of `s ↦ d_F(s, q) = F(q - s)`.
pub fn project_backward(spec: &NormSpec, set: &ConvexSet, q: &Vector) -> Result<ProjectionResult> {
    project(spec, set, q, Direction::Backward)
}

/// Distinct initial parameters for multistart.
fn restart_points(set: &ConvexSet, q: &Vector, restarts: usize) -> Result<Vec<Vec<f64>>> {
    let k = restarts;
    let spread = |i: usize| i as f64 / (k - 1) as f64;
    Ok(match set {
        ConvexSet::Segment { .. } => (0..k).map(|i| vec![spread(i)]).collect(),
        ConvexSet::HalfLine { origin, .. } => {
            let r = 4.0 * (1.0 + (q - origin).norm());
            (0..k).map(|i| vec![r * spread(i)]).collect()
        }
        ConvexSet::Line { point, .. } => {
            let r = 4.0 * (1.0 + (q - point).norm());
            (0..k).map(|i| vec![r * (2.0 * spread(i) - 1.0)]).collect()
        }
        ConvexSet::Polytope { vertices } => (0..k)
            .map(|i| {
                let mut w = vec![0.0; vertices.len()];
                w[i % vertices.len()] = 1.0;
                if i >= vertices.len() {
                    w.iter_mut().for_each(|x| *x = 1.0 / vertices.len() as f64);
                }
                w
            })
            .collect(),
        ConvexSet::AffineSlab { base, span, .. } => {
            let grid = set.sample_grid(5, 4.0 * (1.0 + (q - base).norm()))?;
            let a = nalgebra::DMatrix::from_columns(span);
            let pinv = (a.transpose() * &a)
                .try_inverse()
                .ok_or_else(|| GeomError::InvalidSet("degenerate span".into()))?
                * a.transpose();
            let step = (grid.len() / k).max(1);
            grid.iter()
                .step_by(step)
                .take(k)
                .map(|p| (&pinv * (p - base)).iter().copied().collect())
                .collect()
        }
    })
}

/// Runs the solver from `restarts` distinct initializations and reports
/// whether all minimizers agree within `1e-7`.
pub fn uniqueness_probe(spec: &NormSpec, set: &ConvexSet, q: &Vector, dir: Direction, restarts: usize) -> Result<bool> {
    if restarts < 2 {
        return Err(GeomError::Precondition("uniqueness probe needs at least two restarts".into()));
    }
    let starts = restart_points(set, q, restarts)?;
    let mut first: Option<Vector> = None;
    for s in &starts {
        let r = solve(spec, set, q, dir, Some(s))?;
        match &first {
            None => first = Some(r.minimizer),
            Some(f) => {
                if (f - &r.minimizer).norm() > 1e-7 {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convex_sets::HalfSpace;

    fn v(xs: &[f64]) -> Vector {
        Vector::from_column_slice(xs)
    }

    #[test]
    fn perpendicular_foot_on_segment() {
        let e = NormSpec::euclidean(2).unwrap();
        let seg = ConvexSet::segment(v(&[0.0, 1.0]), v(&[2.0, 1.0])).unwrap();
        let r = project_forward(&e, &seg, &v(&[1.0, 0.0])).unwrap();
        assert!((r.minimizer - v(&[1.0, 1.0])).norm() < 1e-12);
        assert!((r.distance - 1.0).abs() < 1e-12);
        assert!(r.unique_certified);
        assert!(r.variational_residual.abs() < 1e-10);
    }

    #[test]
    fn orthogonal_projection_on_line() {
        let e = NormSpec::euclidean(2).unwrap();
        let line = ConvexSet::line(v(&[0.0, 0.0]), v(&[1.0, -1.0])).unwrap();
        let r = project_backward(&e, &line, &v(&[1.0, 0.0])).unwrap();
        assert!((r.minimizer - v(&[0.5, -0.5])).norm() < 1e-12);
    }

    #[test]
    fn pnorm_symmetric_segment() {
        let p = NormSpec::pnorm(2, 4.0).unwrap();
        let seg = ConvexSet::segment(v(&[1.0, -1.0]), v(&[1.0, 1.0])).unwrap();
        let r = project_forward(&p, &seg, &v(&[0.0, 0.0])).unwrap();
        assert!((r.minimizer - v(&[1.0, 0.0])).norm() < 1e-9);
    }

    #[test]
    fn slope_walking_half_line_corner() {
        let m = NormSpec::matsumoto_reference();
        let (_, s2) = ConvexSet::paper_example_sets();
        let b = project_backward(&m, &s2, &v(&[0.0, 0.0])).unwrap();
        assert!((b.minimizer - v(&[0.5, 0.5])).norm() < 1e-9);
        let f = project_forward(&m, &s2, &v(&[0.0, 0.0])).unwrap();
        assert!((f.minimizer - v(&[0.58988935, 0.41011065])).norm() < 1e-7);
        assert!(f.variational_residual >= -1e-8);
    }

    #[test]
    fn variational_residual_detects_wrong_candidate() {
        let e = NormSpec::euclidean(2).unwrap();
        let seg = ConvexSet::segment(v(&[0.0, 1.0]), v(&[2.0, 1.0])).unwrap();
        let q = v(&[1.0, 0.0]);
        let good = variational_residual(&e, &seg, &v(&[1.0, 1.0]), &q, Direction::Forward).unwrap();
        assert!(good.abs() < 1e-14);
        let bad = variational_residual(&e, &seg, &v(&[0.0, 1.0]), &q, Direction::Forward).unwrap();
        assert!(bad < -0.5);
        let inside = variational_residual(&e, &seg, &v(&[1.0, 1.0]), &v(&[1.0, 1.0]), Direction::Forward).unwrap();
        assert_eq!(inside, f64::INFINITY);
        let ns = NormSpec::nonsmooth(2, 1.0).unwrap();
        assert!(variational_residual(&ns, &seg, &v(&[1.0, 1.0]), &q, Direction::Forward).is_err());
    }

    #[test]
    fn nonsmooth_norm_restricted_to_segments() {
        let ns = NormSpec::nonsmooth(2, 1.0).unwrap();
        let line = ConvexSet::line(v(&[0.0, 0.0]), v(&[1.0, 0.0])).unwrap();
        assert!(matches!(
            project_forward(&ns, &line, &v(&[0.0, 1.0])),
            Err(GeomError::UnsupportedVariant(_))
        ));
        let seg = ConvexSet::segment(v(&[-1.0, 1.0]), v(&[1.0, 1.0])).unwrap();
        let r = project_forward(&ns, &seg, &v(&[0.0, 0.0])).unwrap();
        assert!((r.minimizer - v(&[0.0, 1.0])).norm() < 1e-9);
        assert!(r.variational_residual.is_nan());
        assert!(uniqueness_probe(&ns, &seg, &v(&[0.0, 0.0]), Direction::Forward, 5).unwrap());
    }

    #[test]
    fn polytope_projection() {
        let e = NormSpec::euclidean(2).unwrap();
        let sq = ConvexSet::polytope(vec![v(&[0.0, 0.0]), v(&[1.0, 0.0]), v(&[1.0, 1.0]), v(&[0.0, 1.0])]).unwrap();
        let r = project_forward(&e, &sq, &v(&[2.0, 0.3])).unwrap();
        assert!((&r.minimizer - v(&[1.0, 0.3])).norm() < 1e-9, "{}", r.minimizer);
        assert!((r.parameters.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let inside = project_forward(&e, &sq, &v(&[0.2, 0.7])).unwrap();
        assert!(inside.distance < 1e-9);
    }

    #[test]
    fn slab_projection_onto_quadrant() {
        let r = NormSpec::randers(nalgebra::DMatrix::identity(3, 3), v(&[0.3, 0.0, 0.0])).unwrap();
        let slab = ConvexSet::affine_slab(
            v(&[0.0, 0.0, 1.0]),
            vec![v(&[1.0, 0.0, 0.0]), v(&[0.0, 1.0, 0.0])],
            vec![
                HalfSpace { normal: v(&[-1.0, 0.0, 0.0]), offset: 0.0 },
                HalfSpace { normal: v(&[0.0, -1.0, 0.0]), offset: 0.0 },
            ],
        )
        .unwrap();
        let q = v(&[-1.0, -2.0, 0.0]);
        let res = project_forward(&r, &slab, &q).unwrap();
        // the corner (0,0,1) is optimal: both coordinates push against the constraints
        assert!((&res.minimizer - v(&[0.0, 0.0, 1.0])).norm() < 1e-8, "{}", res.minimizer);
        assert!(res.variational_residual >= -1e-8);
    }

    #[test]
    fn degenerate_segment_is_identity_valued() {
        let e = NormSpec::euclidean(2).unwrap();
        let p = ConvexSet::segment(v(&[1.0, 1.0]), v(&[1.0, 1.0])).unwrap();
        let r = project_forward(&e, &p, &v(&[4.0, 5.0])).unwrap();
        assert_eq!(r.minimizer, v(&[1.0, 1.0]));
        assert!((r.distance - 5.0).abs() < 1e-15);
    }

    #[test]
    fn uniqueness_on_smooth_norm() {
        let m = NormSpec::matsumoto_reference();
        let (s1, _) = ConvexSet::paper_example_sets();
        assert!(uniqueness_probe(&m, &s1, &v(&[0.3, 2.0]), Direction::Forward, 4).unwrap());
        assert!(uniqueness_probe(&m, &s1, &v(&[0.3, 2.0]), Direction::Forward, 1).is_err());
    }
}
