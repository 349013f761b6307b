//! Compositions of forward/backward projections between two convex sets,
//! fixed-point detection and brute-force best-approximation oracles.
//!
//! For a query `q ∈ S₁` the fixed-point statement (DP₁) is
//! `q = P_{S₁}(P_{S₂}(q))` and the best-approximation statement (DP₂) is
//! `d(q, P_{S₂}(q)) ≤ d(z₁, z₂)` for all `z₁ ∈ S₁`, `z₂ ∈ S₂`. In the
//! non-reversible forward case DP₁ uses `P⁻_{S₁} ∘ P⁺_{S₂}`, in the backward
//! case `P⁺_{S₁} ∘ P⁻_{S₂}`.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::convex_sets::ConvexSet;
use crate::error::{GeomError, Result};
use crate::norms::{NormSpec, Vector};
use crate::projection::{self, Direction};
use crate::search::minimize_1d;

pub const TOL_FP: f64 = 1e-7;

/// `P^{outer}_{S₁} ∘ P^{inner}_{S₂}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CompositionMode {
    pub outer: Direction,
    pub inner: Direction,
}

impl CompositionMode {
    pub const ALL: [CompositionMode; 4] = [
        CompositionMode::new(Direction::Forward, Direction::Forward),
        CompositionMode::new(Direction::Forward, Direction::Backward),
        CompositionMode::new(Direction::Backward, Direction::Forward),
        CompositionMode::new(Direction::Backward, Direction::Backward),
    ];

    pub const fn new(outer: Direction, inner: Direction) -> Self {
        CompositionMode { outer, inner }
    }
}

impl fmt::Display for CompositionMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.outer.symbol(), self.inner.symbol())
    }
}

impl Serialize for CompositionMode {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Which form of the double-projection property is tested.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DpCase {
    /// `q = P⁻_{S₁}(P⁺_{S₂}(q))` vs `d_F(q, P⁺_{S₂}(q)) ≤ d_F(z₁, z₂)`.
    Forward,
    /// `q = P⁺_{S₁}(P⁻_{S₂}(q))` vs `d_F(P⁻_{S₂}(q), q) ≤ d_F(z₂, z₁)`.
    Backward,
    /// Symmetric form with forward projections on both sides.
    Reversible,
}

impl DpCase {
    pub fn mode(self) -> CompositionMode {
        match self {
            DpCase::Forward => CompositionMode::new(Direction::Backward, Direction::Forward),
            DpCase::Backward => CompositionMode::new(Direction::Forward, Direction::Backward),
            DpCase::Reversible => CompositionMode::new(Direction::Forward, Direction::Forward),
        }
    }

    /// Direction of the projection onto `S₂` and sign `σ` of the distance
    /// `F(σ(z₂ - z₁))`.
    fn inner(self) -> Direction {
        self.mode().inner
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct DPReport {
    pub case: DpCase,
    pub mode: CompositionMode,
    #[serde(serialize_with = "crate::ser::vector")]
    pub q: Vector,
    #[serde(serialize_with = "crate::ser::vector")]
    pub composed_point: Vector,
    pub fixed_point_residual: f64,
    pub proj_distance: f64,
    pub oracle_best: f64,
    pub tol_oracle: f64,
    pub dp1_holds: bool,
    pub dp2_holds: bool,
    pub equivalence_verdict: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    #[serde(serialize_with = "crate::ser::vectors")]
    pub points: Vec<Vector>,
    pub converged: bool,
}

pub fn compose(spec: &NormSpec, s1: &ConvexSet, s2: &ConvexSet, q: &Vector, mode: CompositionMode) -> Result<Vector> {
    let inner = projection::solve(spec, s2, q, mode.inner, None)?;
    Ok(projection::solve(spec, s1, &inner.minimizer, mode.outer, None)?.minimizer)
}

/// Result of the brute-force best-approximation search.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Oracle {
    pub best: f64,
    /// Lipschitz constant times the resolution of the sampled pairs.
    pub cell_bound: f64,
    pub clip_radius: f64,
}

const COARSE_MAX: usize = 101;
const MAX_PAIRS: f64 = 4e6;

/// Minimizes `F(σ(z₂ - z₁))` over sampled pairs. Pairs of one-parameter
/// sets are sampled on a coarse parameter grid whose best node seeds a
/// nested 1-D minimization; other sets are sampled once on a full grid.
pub(crate) fn oracle(spec: &NormSpec, s1: &ConvexSet, s2: &ConvexSet, sign: f64, resolution: usize, radius: f64) -> Result<Oracle> {
    let mut radius = radius;
    let lip = spec.lipschitz_bound();
    for attempt in 0..=4 {
        let last = attempt == 4;
        let found = match (s1.ray(), s2.ray()) {
            (Some(_), Some(_)) => oracle_pairs(spec, s1, s2, sign, resolution, radius)?,
            _ => oracle_grids(spec, s1, s2, sign, resolution, radius)?,
        };
        if found.interior || last {
            return Ok(Oracle {
                best: found.best,
                cell_bound: lip * found.cell,
                clip_radius: radius,
            });
        }
        radius *= 2.0;
    }
    unreachable!("loop returns on the last attempt")
}

struct Found {
    best: f64,
    cell: f64,
    interior: bool,
}

fn clipped_interval(set: &ConvexSet, radius: f64) -> (f64, f64) {
    let (lo, hi) = set.interval().expect("one-parameter variant");
    (lo.max(-radius), hi.min(radius))
}

fn oracle_pairs(spec: &NormSpec, s1: &ConvexSet, s2: &ConvexSet, sign: f64, resolution: usize, radius: f64) -> Result<Found> {
    let (o1, v1) = s1.ray().expect("one-parameter");
    let (o2, v2) = s2.ray().expect("one-parameter");
    let (d1, d2) = (clipped_interval(s1, radius), clipped_interval(s2, radius));
    let (len1, len2) = (v1.norm(), v2.norm());
    let n = o1.len();
    // y(t1, t2) = σ(γ₂(t2) - γ₁(t1)); ∂y/∂t1 = -σv₁, ∂y/∂t2 = σv₂
    let y = |t1: f64, t2: f64| -> Vec<f64> {
        (0..n).map(|i| sign * ((o2[i] + t2 * v2[i]) - (o1[i] + t1 * v1[i]))).collect()
    };
    let dy1: Vec<f64> = v1.iter().map(|x| -sign * x).collect();
    let dy2: Vec<f64> = v2.iter().map(|x| sign * x).collect();
    let eval = |t1: f64, t2: f64| spec.value(&y(t1, t2));

    let coarse = resolution.clamp(2, COARSE_MAX);
    let axis = |d: (f64, f64)| -> Vec<f64> {
        if d.1 <= d.0 {
            return vec![d.0];
        }
        (0..coarse).map(|i| d.0 + (d.1 - d.0) * i as f64 / (coarse - 1) as f64).collect()
    };
    let coarse_h = ((d1.1 - d1.0) / (coarse - 1) as f64, (d2.1 - d2.0) / (coarse - 1) as f64);
    let mut grid_best = (f64::INFINITY, d1.0, d2.0);
    for &t1 in &axis(d1) {
        for &t2 in &axis(d2) {
            let f = eval(t1, t2);
            if f < grid_best.0 {
                grid_best = (f, t1, t2);
            }
        }
    }

    // partial minimization over t2 is convex in t1; refine by nested 1-D
    // minimization started at the best grid node
    let scale2 = if d2.1 - d2.0 <= 1.0 { 1.0 } else { 1.0 + radius };
    let scale1 = if d1.1 - d1.0 <= 1.0 { 1.0 } else { 1.0 + radius };
    let inner = |t1: f64| -> (f64, f64) {
        let m = minimize_1d(|t2| eval(t1, t2), |t2| spec.dir_derivative(&y(t1, t2), &dy2), d2.0, d2.1, grid_best.2, scale2);
        match m {
            Ok(m) => (m.value, m.t),
            Err(_) => (f64::INFINITY, grid_best.2),
        }
    };
    let outer = minimize_1d(
        |t1| inner(t1).0,
        |t1| {
            let (_, t2) = inner(t1);
            spec.dir_derivative(&y(t1, t2), &dy1)
        },
        d1.0,
        d1.1,
        grid_best.1,
        scale1,
    )?;
    let (refined, t2) = inner(outer.t);
    let best = if refined < grid_best.0 { (refined, outer.t, t2) } else { grid_best };
    let resolved = 1e-12 * (scale1 * len1 + scale2 * len2);

    let near_clip = |t: f64, d: (f64, f64), unbounded_lo: bool, unbounded_hi: bool, h: f64| {
        (unbounded_lo && t <= d.0 + h) || (unbounded_hi && t >= d.1 - h)
    };
    let (lo1, hi1) = s1.interval().expect("one-parameter");
    let (lo2, hi2) = s2.interval().expect("one-parameter");
    let interior = !near_clip(best.1, d1, lo1.is_infinite(), hi1.is_infinite(), coarse_h.0)
        && !near_clip(best.2, d2, lo2.is_infinite(), hi2.is_infinite(), coarse_h.1);
    Ok(Found {
        best: best.0,
        cell: resolved,
        interior,
    })
}

/// Upper estimate of the distance from any member (inside the clip region)
/// to the nearest grid point.
fn grid_spacing(set: &ConvexSet, resolution: usize, radius: f64) -> f64 {
    let r = (resolution - 1) as f64;
    match set {
        ConvexSet::Segment { a, b } => (b - a).norm() / r,
        ConvexSet::HalfLine { .. } => radius / r,
        ConvexSet::Line { .. } => 2.0 * radius / r,
        ConvexSet::Polytope { vertices } => {
            let diam = vertices
                .iter()
                .flat_map(|x| vertices.iter().map(move |y| (x - y).norm()))
                .fold(0.0, f64::max);
            diam * set.dim() as f64 / r.min(64.0)
        }
        ConvexSet::AffineSlab { span, .. } => {
            let m = span.len().max(1);
            let per_axis = ((resolution).min(1e6f64.powf(1.0 / m as f64) as usize).max(2) - 1) as f64;
            2.0 * radius * (m as f64).sqrt() / per_axis
        }
    }
}

fn oracle_grids(spec: &NormSpec, s1: &ConvexSet, s2: &ConvexSet, sign: f64, resolution: usize, radius: f64) -> Result<Found> {
    let mut res = resolution;
    let (g1, g2) = loop {
        let g1 = s1.sample_grid(res, radius)?;
        let g2 = s2.sample_grid(res, radius)?;
        if (g1.len() as f64) * (g2.len() as f64) <= MAX_PAIRS || res <= 3 {
            break (g1, g2);
        }
        res = (res / 2).max(2);
    };
    let n = s1.dim();
    let mut best = f64::INFINITY;
    let mut arg = (0, 0);
    let mut buf = vec![0.0; n];
    for (i, z1) in g1.iter().enumerate() {
        for (j, z2) in g2.iter().enumerate() {
            for k in 0..n {
                buf[k] = sign * (z2[k] - z1[k]);
            }
            let f = spec.value(&buf);
            if f < best {
                best = f;
                arg = (i, j);
            }
        }
    }
    let edge = |set: &ConvexSet, z: &Vector| {
        !matches!(set, ConvexSet::Segment { .. } | ConvexSet::Polytope { .. })
            && (z - set.base_point()).norm() >= 0.9 * radius
    };
    Ok(Found {
        best,
        cell: grid_spacing(s1, res, radius) + grid_spacing(s2, res, radius),
        interior: !edge(s1, &g1[arg.0]) && !edge(s2, &g2[arg.1]),
    })
}

pub fn dp_report(spec: &NormSpec, s1: &ConvexSet, s2: &ConvexSet, q: &Vector, case: DpCase, grid_resolution: usize) -> Result<DPReport> {
    dp_report_with(spec, s1, s2, q, case, &DpOptions { grid_resolution, ..DpOptions::default() })
}

/// Oracle and fixed-point settings for [`dp_report_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DpOptions {
    pub grid_resolution: usize,
    /// `None` picks `10(1 + |q| + |P(q) - q|)`.
    pub clip_radius: Option<f64>,
    pub tol_fp: f64,
}

impl Default for DpOptions {
    fn default() -> Self {
        DpOptions { grid_resolution: 2001, clip_radius: None, tol_fp: TOL_FP }
    }
}

pub fn dp_report_with(spec: &NormSpec, s1: &ConvexSet, s2: &ConvexSet, q: &Vector, case: DpCase, opts: &DpOptions) -> Result<DPReport> {
    let grid_resolution = opts.grid_resolution;
    if grid_resolution < 2 {
        return Err(GeomError::Precondition("grid resolution must be at least 2".into()));
    }
    if !s1.contains(q, 1e-9)? {
        return Err(GeomError::Precondition("q must be a member of the first set".into()));
    }
    let mode = case.mode();
    let inner = case.inner();
    let p2 = projection::solve(spec, s2, q, inner, None)?;
    let composed = projection::solve(spec, s1, &p2.minimizer, mode.outer, None)?.minimizer;
    let fixed_point_residual = (&composed - q).norm();
    // forward and reversible: d_F(q, P(q)) = F(P(q) - q); backward: F(q - P⁻(q))
    let proj_distance = p2.distance;
    let radius = match opts.clip_radius {
        Some(r) if r > 0.0 && r.is_finite() => r,
        Some(r) => return Err(GeomError::Precondition(format!("clip radius {r} must be positive"))),
        None => 10.0 * (1.0 + q.norm() + (&p2.minimizer - q).norm()),
    };
    let o = oracle(spec, s1, s2, inner.sign(), grid_resolution, radius)?;
    let tol_oracle = o.cell_bound + 1e-10 * (1.0 + proj_distance);
    let dp1 = fixed_point_residual <= opts.tol_fp;
    let dp2 = proj_distance <= o.best + tol_oracle;
    Ok(DPReport {
        case,
        mode,
        q: q.clone(),
        composed_point: composed,
        fixed_point_residual,
        proj_distance,
        oracle_best: o.best,
        tol_oracle,
        dp1_holds: dp1,
        dp2_holds: dp2,
        equivalence_verdict: dp1 == dp2,
    })
}

/// Iterates `q ↦ P⁻_{S₁}(P⁺_{S₂}(q))`. A step shorter than `1e-10` ends
/// the run without being appended.
pub fn alternate(spec: &NormSpec, s1: &ConvexSet, s2: &ConvexSet, q0: &Vector, max_iter: usize) -> Result<Trajectory> {
    if !s1.contains(q0, 1e-9)? {
        return Err(GeomError::Precondition("q0 must be a member of the first set".into()));
    }
    let mode = DpCase::Forward.mode();
    let mut points = vec![q0.clone()];
    for _ in 0..max_iter {
        let cur = points.last().expect("non-empty");
        let next = compose(spec, s1, s2, cur, mode)?;
        if (&next - cur).norm() < 1e-10 {
            return Ok(Trajectory { points, converged: true });
        }
        points.push(next);
    }
    Ok(Trajectory { points, converged: false })
}

/// A best-approximation point of a one-parameter `s1` with respect to
/// `s2`: the minimizer over `q ∈ s1` of the distance from `q` to its
/// projection onto `s2` in the direction prescribed by `case`.
pub fn best_approximation_point(spec: &NormSpec, s1: &ConvexSet, s2: &ConvexSet, case: DpCase) -> Result<Vector> {
    let (o1, v1) = s1
        .ray()
        .ok_or_else(|| GeomError::UnsupportedVariant("best-approximation search needs a one-parameter first set".into()))?;
    let (lo, hi) = s1.interval().expect("one-parameter");
    let dir = case.inner();
    let sign = dir.sign();
    let at = |t: f64| o1 + &v1 * t;
    let h = |t: f64| projection::solve(spec, s2, &at(t), dir, None).map(|r| r.distance).unwrap_or(f64::INFINITY);
    // envelope theorem: d/dt F(σ(s* - γ(t))) with s* frozen
    let dh = |t: f64| match projection::solve(spec, s2, &at(t), dir, None) {
        Ok(r) => {
            let y = (&r.minimizer - at(t)) * sign;
            let w = &v1 * -sign;
            spec.dir_derivative(y.as_slice(), w.as_slice())
        }
        Err(_) => 0.0,
    };
    let t0 = if lo.is_finite() && hi.is_finite() { 0.5 * (lo + hi) } else { 0.0f64.clamp(lo, hi) };
    let scale = if hi - lo <= 1.0 { 1.0 } else { 1.0 + s2.base_point().norm() + o1.norm() };
    let m = minimize_1d(h, dh, lo, hi, t0, scale)?;
    Ok(at(m.t))
}

/// The non-smooth strictly convex construction in ℝ³ with
/// `F(y) = |y| + |y₁|`: `p = (0,1,0)` is a kink of the unit sphere, `z` is
/// the common point of the supporting plane at `p`, the translated
/// supporting plane at `-p` and the plane `x₃ = 0`. The query `q = 0` lies
/// in `[0, z]` and is a fixed point of the composed projections through
/// `[p, z]`, yet the two segments meet at `z`.
pub fn nonsmooth_counterexample(grid_resolution: usize) -> Result<DPReport> {
    let spec = NormSpec::nonsmooth(3, 1.0)?;
    let raw = Vector::from_vec(vec![0.0, 1.0, 0.0]);
    let p = &raw / spec.eval(&raw)?;
    let n_p = spec.right_gradient(&p)?;
    let n_q = spec.right_gradient(&-&p)?;
    let plane = Vector::from_vec(vec![0.0, 0.0, 1.0]);
    let m = DMatrix::from_rows(&[n_p.transpose(), n_q.transpose(), plane.transpose()]);
    let rhs = DVector::from_vec(vec![n_p.dot(&p), 0.0, 0.0]);
    let z = m
        .lu()
        .solve(&rhs)
        .filter(|z| z.iter().all(|x| x.is_finite()))
        .ok_or_else(|| GeomError::Construction("supporting planes do not meet in a point".into()))?;
    let origin = Vector::zeros(3);
    let first = ConvexSet::segment(origin.clone(), z.clone())?;
    let second = ConvexSet::segment(p, z)?;
    dp_report(&spec, &first, &second, &origin, DpCase::Reversible, grid_resolution)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FigurePoint {
    pub label: String,
    #[serde(serialize_with = "crate::ser::vector")]
    pub point: Vector,
}

/// The query point and its four compositions for the slope-walking
/// example sets.
pub fn matsumoto_reproduction() -> Result<Vec<FigurePoint>> {
    let spec = NormSpec::matsumoto_reference();
    let (s1, s2) = ConvexSet::paper_example_sets();
    let q = Vector::zeros(2);
    let mut out = vec![FigurePoint { label: "q".into(), point: q.clone() }];
    let order = [
        CompositionMode::new(Direction::Backward, Direction::Forward),
        CompositionMode::new(Direction::Forward, Direction::Forward),
        CompositionMode::new(Direction::Forward, Direction::Backward),
        CompositionMode::new(Direction::Backward, Direction::Backward),
    ];
    for mode in order {
        out.push(FigurePoint {
            label: mode.to_string(),
            point: compose(&spec, &s1, &s2, &q, mode)?,
        });
    }
    Ok(out)
}

/// One random instance of the equivalence suite.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub spec: NormSpec,
    pub s1: ConvexSet,
    pub s2: ConvexSet,
    pub q: Vector,
    pub planted: bool,
}

fn random_vec(rng: &mut ChaCha8Rng, n: usize, half_width: f64) -> Vector {
    Vector::from_iterator(n, (0..n).map(|_| rng.random_range(-half_width..half_width)))
}

fn random_dir(rng: &mut ChaCha8Rng, n: usize) -> Vector {
    loop {
        let d = Vector::from_iterator(n, (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)));
        if d.norm() > 1e-3 {
            return d.normalize();
        }
    }
}

fn random_set(rng: &mut ChaCha8Rng, n: usize) -> Result<ConvexSet> {
    match rng.random_range(0..3) {
        0 => {
            let a = random_vec(rng, n, 2.0);
            let b = &a + random_dir(rng, n) * rng.random_range(0.5..3.0);
            ConvexSet::segment(a, b)
        }
        1 => ConvexSet::half_line(random_vec(rng, n, 2.0), random_dir(rng, n)),
        _ => ConvexSet::line(random_vec(rng, n, 2.0), random_dir(rng, n)),
    }
}

fn random_member(rng: &mut ChaCha8Rng, set: &ConvexSet) -> Vector {
    let (lo, hi) = set.interval().expect("one-parameter");
    let t = rng.random_range(lo.max(-3.0)..hi.min(3.0));
    let (o, v) = set.ray().expect("one-parameter");
    o + v * t
}

/// Instance `index` of the suite seeded by `seed`; independent of how many
/// other instances are generated, so suites can run in parallel.
pub fn random_instance(specs: &[NormSpec], case: DpCase, seed: u64, index: usize) -> Result<Instance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (index as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
    let spec = specs[index % specs.len()].clone();
    let n = spec.dim();
    let s1 = random_set(&mut rng, n)?;
    let s2 = random_set(&mut rng, n)?;
    let planted = rng.random_bool(0.5);
    let q = if planted {
        best_approximation_point(&spec, &s1, &s2, case)?
    } else {
        random_member(&mut rng, &s1)
    };
    Ok(Instance { spec, s1, s2, q, planted })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SuiteSummary {
    pub case: DpCase,
    pub instances: usize,
    pub agreements: usize,
    pub dp1_true: usize,
    /// Indices and reports of instances where DP₁ and DP₂ disagree.
    pub disagreements: Vec<(usize, DPReport)>,
}

pub fn equivalence_suite(specs: &[NormSpec], case: DpCase, count: usize, seed: u64, grid_resolution: usize) -> Result<SuiteSummary> {
    if specs.is_empty() {
        return Err(GeomError::Precondition("equivalence suite needs at least one norm".into()));
    }
    let reports: Vec<Result<DPReport>> = (0..count)
        .into_par_iter()
        .map(|i| {
            let inst = random_instance(specs, case, seed, i)?;
            dp_report(&inst.spec, &inst.s1, &inst.s2, &inst.q, case, grid_resolution)
        })
        .collect();
    let mut summary = SuiteSummary {
        case,
        instances: count,
        agreements: 0,
        dp1_true: 0,
        disagreements: Vec::new(),
    };
    for (i, r) in reports.into_iter().enumerate() {
        let r = r?;
        if r.dp1_holds {
            summary.dp1_true += 1;
        }
        if r.equivalence_verdict {
            summary.agreements += 1;
        } else {
            summary.disagreements.push((i, r));
        }
    }
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(xs: &[f64]) -> Vector {
        Vector::from_column_slice(xs)
    }

    #[test]
    fn slope_walking_compositions() {
        let pts = matsumoto_reproduction().unwrap();
        let expect = [
            ("q", [0.0, 0.0]),
            ("(-,+)", [0.0, 0.0]),
            ("(+,+)", [0.32338512, -0.32338512]),
            ("(+,-)", [0.23349577, -0.23349577]),
            ("(-,-)", [-0.08988935, 0.08988935]),
        ];
        for (p, (label, xy)) in pts.iter().zip(expect) {
            assert_eq!(p.label, label);
            assert!((p.point[0] - xy[0]).abs() < 1e-6 && (p.point[1] - xy[1]).abs() < 1e-6, "{label}: {}", p.point);
        }
    }

    #[test]
    fn slope_walking_forward_report() {
        let spec = NormSpec::matsumoto_reference();
        let (s1, s2) = ConvexSet::paper_example_sets();
        let r = dp_report(&spec, &s1, &s2, &v(&[0.0, 0.0]), DpCase::Forward, 2001).unwrap();
        assert!(r.dp1_holds && r.dp2_holds && r.equivalence_verdict, "{r:?}");
    }

    #[test]
    fn parallel_segments() {
        let e = NormSpec::euclidean(2).unwrap();
        let s1 = ConvexSet::segment(v(&[0.0, 0.0]), v(&[1.0, 0.0])).unwrap();
        let s2 = ConvexSet::segment(v(&[0.0, 2.0]), v(&[1.0, 2.0])).unwrap();
        for q in [v(&[0.0, 0.0]), v(&[1.0, 0.0])] {
            let r = dp_report(&e, &s1, &s2, &q, DpCase::Reversible, 2001).unwrap();
            assert!(r.dp1_holds && r.dp2_holds);
            assert!((r.proj_distance - 2.0).abs() < 1e-12);
            assert!((r.oracle_best - 2.0).abs() < 1e-12);
        }
        let traj = alternate(&e, &s1, &s2, &v(&[1.0, 0.0]), 10).unwrap();
        assert!(traj.converged && traj.points.len() <= 3);
        assert_eq!(traj.points.len(), 1);
    }

    #[test]
    fn non_fixed_point_fails_both() {
        let e = NormSpec::euclidean(2).unwrap();
        let s1 = ConvexSet::segment(v(&[0.0, 0.0]), v(&[4.0, 0.0])).unwrap();
        let s2 = ConvexSet::segment(v(&[0.0, 1.0]), v(&[1.0, 3.0])).unwrap();
        let r = dp_report(&e, &s1, &s2, &v(&[3.0, 0.0]), DpCase::Reversible, 201).unwrap();
        assert!(!r.dp1_holds && !r.dp2_holds && r.equivalence_verdict);
        assert!(dp_report(&e, &s1, &s2, &v(&[3.0, 1.0]), DpCase::Reversible, 201).is_err());
    }

    #[test]
    fn counterexample_breaks_equivalence() {
        let r = nonsmooth_counterexample(401).unwrap();
        assert!(r.dp1_holds, "{r:?}");
        assert!(!r.dp2_holds);
        assert!(r.oracle_best <= 1e-9);
        assert!((r.proj_distance - 1.0).abs() < 1e-9);
        assert!(!r.equivalence_verdict);
    }

    #[test]
    fn alternation_from_both_sides_of_the_plateau() {
        let spec = NormSpec::matsumoto_reference();
        let (s1, s2) = ConvexSet::paper_example_sets();
        // the sets are parallel, so (3,-3) is already a fixed point
        let t = alternate(&spec, &s1, &s2, &v(&[3.0, -3.0]), 50).unwrap();
        assert!(t.converged);
        assert_eq!(t.points.len(), 1);
        let t = alternate(&spec, &s1, &s2, &v(&[-3.0, 3.0]), 50).unwrap();
        assert!(t.converged);
        let last = t.points.last().unwrap();
        assert!((last - v(&[-0.08988935, 0.08988935])).norm() < 1e-7, "{last}");
    }

    #[test]
    fn planted_point_is_a_fixed_point() {
        let spec = NormSpec::pnorm(2, 4.0).unwrap();
        let s1 = ConvexSet::line(v(&[0.0, 0.0]), v(&[1.0, 0.2])).unwrap();
        let s2 = ConvexSet::segment(v(&[1.0, 2.0]), v(&[3.0, 1.5])).unwrap();
        let q = best_approximation_point(&spec, &s1, &s2, DpCase::Forward).unwrap();
        let r = dp_report(&spec, &s1, &s2, &q, DpCase::Forward, 401).unwrap();
        assert!(r.dp1_holds && r.dp2_holds, "{r:?}");
    }

    #[test]
    fn suite_is_reproducible() {
        let specs = [NormSpec::matsumoto_reference()];
        let a = equivalence_suite(&specs, DpCase::Backward, 6, 7, 201).unwrap();
        let b = equivalence_suite(&specs, DpCase::Backward, 6, 7, 201).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.agreements, 6, "{:?}", a.disagreements);
    }

    #[test]
    fn mode_labels() {
        assert_eq!(DpCase::Forward.mode().to_string(), "(-,+)");
        assert_eq!(DpCase::Backward.mode().to_string(), "(+,-)");
    }
}
