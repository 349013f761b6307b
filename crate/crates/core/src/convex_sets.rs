//! Closed convex subsets of ℝⁿ with affine parametrizations.
//!
//! Every variant is closed, hence proximinal for the coercive norms in
//! [`crate::norms`]. Directions of lines and half-lines are stored with unit
//! Euclidean length.

use nalgebra::{DMatrix, DVector};

use crate::error::{GeomError, Result};
use crate::norms::{check_dim, NormSpec, Vector};
use crate::projection::{self, Direction};

/// `normal · x ≤ offset`.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfSpace {
    pub normal: Vector,
    pub offset: f64,
}

/// Orthonormal span frame, frame-to-coefficient map, and constraints in the frame.
pub(crate) type SlabFrame = (DMatrix<f64>, DMatrix<f64>, Vec<(Vec<f64>, f64)>);

#[derive(Debug, Clone, PartialEq)]
pub enum ConvexSet {
    /// `[a, b]`; `a == b` is allowed and gives a single point.
    Segment { a: Vector, b: Vector },
    HalfLine { origin: Vector, direction: Vector },
    Line { point: Vector, direction: Vector },
    /// Convex hull of the vertices.
    Polytope { vertices: Vec<Vector> },
    /// `{ base + Σ c_j span_j } ∩ ⋂ constraints`.
    AffineSlab {
        base: Vector,
        span: Vec<Vector>,
        constraints: Vec<HalfSpace>,
    },
}

/// A set member together with the parameters that produce it.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamPoint<'a> {
    pub set: &'a ConvexSet,
    pub parameters: Vec<f64>,
    pub point: Vector,
}

fn unit(direction: Vector, what: &str) -> Result<Vector> {
    let n = direction.norm();
    if !(n > 0.0 && n.is_finite()) {
        return Err(GeomError::InvalidSet(format!("{what} direction must be non-zero")));
    }
    Ok(direction / n)
}

impl ConvexSet {
    pub fn segment(a: Vector, b: Vector) -> Result<Self> {
        check_dim(&a, a.len())?;
        check_dim(&b, a.len())?;
        Ok(ConvexSet::Segment { a, b })
    }

    pub fn half_line(origin: Vector, direction: Vector) -> Result<Self> {
        check_dim(&origin, origin.len())?;
        check_dim(&direction, origin.len())?;
        Ok(ConvexSet::HalfLine {
            origin,
            direction: unit(direction, "half-line")?,
        })
    }

    pub fn line(point: Vector, direction: Vector) -> Result<Self> {
        check_dim(&point, point.len())?;
        check_dim(&direction, point.len())?;
        Ok(ConvexSet::Line {
            point,
            direction: unit(direction, "line")?,
        })
    }

    pub fn polytope(vertices: Vec<Vector>) -> Result<Self> {
        let Some(first) = vertices.first() else {
            return Err(GeomError::InvalidSet("polytope needs at least one vertex".into()));
        };
        let n = first.len();
        for v in &vertices {
            check_dim(v, n)?;
        }
        Ok(ConvexSet::Polytope { vertices })
    }

    pub fn affine_slab(base: Vector, span: Vec<Vector>, constraints: Vec<HalfSpace>) -> Result<Self> {
        let n = base.len();
        check_dim(&base, n)?;
        for s in &span {
            check_dim(s, n)?;
        }
        for c in &constraints {
            check_dim(&c.normal, n)?;
            if !c.offset.is_finite() {
                return Err(GeomError::NonFinite("half-space offset"));
            }
        }
        if !span.is_empty() {
            let m = DMatrix::from_columns(&span);
            let svd = m.svd(false, false);
            let smax = svd.singular_values.max();
            let smin = svd.singular_values.min();
            if span.len() > n || smin <= 1e-12 * smax.max(1.0) {
                return Err(GeomError::InvalidSet("span directions must be linearly independent".into()));
            }
        }
        let set = ConvexSet::AffineSlab { base, span, constraints };
        if set.slab_feasible_coeffs().is_none() {
            return Err(GeomError::InvalidSet(
                "half-space constraints do not meet the affine span".into(),
            ));
        }
        Ok(set)
    }

    /// The two sets of the slope-walking example: the line `y₁ + y₂ = 0` and
    /// the half-line `{y₁ + y₂ = 1, y₁ ≥ 1/2}`.
    pub fn paper_example_sets() -> (ConvexSet, ConvexSet) {
        let d = Vector::from_vec(vec![1.0, -1.0]) / 2f64.sqrt();
        (
            ConvexSet::Line {
                point: Vector::zeros(2),
                direction: d.clone(),
            },
            ConvexSet::HalfLine {
                origin: Vector::from_vec(vec![0.5, 0.5]),
                direction: d,
            },
        )
    }

    pub fn dim(&self) -> usize {
        match self {
            ConvexSet::Segment { a, .. } => a.len(),
            ConvexSet::HalfLine { origin, .. } => origin.len(),
            ConvexSet::Line { point, .. } => point.len(),
            ConvexSet::Polytope { vertices } => vertices[0].len(),
            ConvexSet::AffineSlab { base, .. } => base.len(),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            ConvexSet::Segment { .. } => "segment",
            ConvexSet::HalfLine { .. } => "halfline",
            ConvexSet::Line { .. } => "line",
            ConvexSet::Polytope { .. } => "polytope",
            ConvexSet::AffineSlab { .. } => "slab",
        }
    }

    /// Anchor for clipping unbounded sets.
    pub fn base_point(&self) -> Vector {
        match self {
            ConvexSet::Segment { a, .. } => a.clone(),
            ConvexSet::HalfLine { origin, .. } => origin.clone(),
            ConvexSet::Line { point, .. } => point.clone(),
            ConvexSet::Polytope { vertices } => {
                vertices.iter().fold(Vector::zeros(self.dim()), |acc, v| acc + v) / vertices.len() as f64
            }
            ConvexSet::AffineSlab { base, .. } => base.clone(),
        }
    }

    /// Diameter-like length used to scale solver tolerances.
    pub fn scale(&self) -> f64 {
        match self {
            ConvexSet::Segment { a, b } => (b - a).norm(),
            ConvexSet::Polytope { vertices } => {
                let c = self.base_point();
                vertices.iter().map(|v| (v - &c).norm()).fold(0.0, f64::max)
            }
            _ => 1.0,
        }
    }

    /// Parameter interval of the one-parameter variants.
    pub(crate) fn interval(&self) -> Option<(f64, f64)> {
        match self {
            ConvexSet::Segment { .. } => Some((0.0, 1.0)),
            ConvexSet::HalfLine { .. } => Some((0.0, f64::INFINITY)),
            ConvexSet::Line { .. } => Some((f64::NEG_INFINITY, f64::INFINITY)),
            _ => None,
        }
    }

    /// Origin and velocity of the affine parametrization of a one-parameter
    /// variant.
    pub(crate) fn ray(&self) -> Option<(&Vector, Vector)> {
        match self {
            ConvexSet::Segment { a, b } => Some((a, b - a)),
            ConvexSet::HalfLine { origin, direction } => Some((origin, direction.clone())),
            ConvexSet::Line { point, direction } => Some((point, direction.clone())),
            _ => None,
        }
    }

    /// Evaluates the parametrization. Segment/line/half-line take one
    /// parameter, polytopes take barycentric weights, slabs take span
    /// coefficients.
    pub fn point_at(&self, params: &[f64]) -> Result<Vector> {
        let expect = |k: usize| {
            if params.len() != k {
                Err(GeomError::DimensionMismatch { expected: k, found: params.len() })
            } else {
                Ok(())
            }
        };
        match self {
            ConvexSet::Polytope { vertices } => {
                expect(vertices.len())?;
                Ok(vertices
                    .iter()
                    .zip(params)
                    .fold(Vector::zeros(self.dim()), |acc, (v, w)| acc + v * *w))
            }
            ConvexSet::AffineSlab { base, span, .. } => {
                expect(span.len())?;
                Ok(span.iter().zip(params).fold(base.clone(), |acc, (s, c)| acc + s * *c))
            }
            _ => {
                expect(1)?;
                let (o, vel) = self.ray().expect("one-parameter variant");
                Ok(o + vel * params[0])
            }
        }
    }

    /// Parameters → member point, rejecting parameters outside the domain.
    pub fn param_point(&self, params: &[f64]) -> Result<ParamPoint<'_>> {
        let ok = match self {
            ConvexSet::Polytope { .. } => {
                params.iter().all(|&w| w >= -1e-12) && (params.iter().sum::<f64>() - 1.0).abs() <= 1e-12
            }
            ConvexSet::AffineSlab { .. } => {
                self.slab_coeff_constraints().iter().all(|(a, b)| dot(a, params) <= b + 1e-12)
            }
            _ => {
                let (lo, hi) = self.interval().expect("one-parameter variant");
                params.len() == 1 && params[0] >= lo - 1e-12 && params[0] <= hi + 1e-12
            }
        };
        let point = self.point_at(params)?;
        if !ok {
            return Err(GeomError::Precondition("parameters outside the set's domain".into()));
        }
        Ok(ParamPoint {
            set: self,
            parameters: params.to_vec(),
            point,
        })
    }

    pub fn translate(&self, c: &Vector) -> ConvexSet {
        match self {
            ConvexSet::Segment { a, b } => ConvexSet::Segment { a: a + c, b: b + c },
            ConvexSet::HalfLine { origin, direction } => ConvexSet::HalfLine {
                origin: origin + c,
                direction: direction.clone(),
            },
            ConvexSet::Line { point, direction } => ConvexSet::Line {
                point: point + c,
                direction: direction.clone(),
            },
            ConvexSet::Polytope { vertices } => ConvexSet::Polytope {
                vertices: vertices.iter().map(|v| v + c).collect(),
            },
            ConvexSet::AffineSlab { base, span, constraints } => ConvexSet::AffineSlab {
                base: base + c,
                span: span.clone(),
                constraints: constraints
                    .iter()
                    .map(|h| HalfSpace {
                        normal: h.normal.clone(),
                        offset: h.offset + h.normal.dot(c),
                    })
                    .collect(),
            },
        }
    }

    /// Constraints rewritten in span coefficients: `a · c ≤ b`.
    pub(crate) fn slab_coeff_constraints(&self) -> Vec<(Vec<f64>, f64)> {
        let ConvexSet::AffineSlab { base, span, constraints } = self else {
            return Vec::new();
        };
        constraints
            .iter()
            .map(|h| {
                let a: Vec<f64> = span.iter().map(|s| s.dot(&h.normal)).collect();
                (a, h.offset - h.normal.dot(base))
            })
            .collect()
    }

    /// Orthonormal frame `U` of the span, the map `x ↦ c` with
    /// `base + U x = base + Σ c_j span_j`, and the constraints in `x`.
    pub(crate) fn slab_frame(&self) -> Option<SlabFrame> {
        let ConvexSet::AffineSlab { span, .. } = self else {
            return None;
        };
        if span.is_empty() {
            return None;
        }
        let s = DMatrix::from_columns(span);
        let u = s.clone().qr().q();
        let to_coeff = s.svd(true, true).pseudo_inverse(0.0).expect("SVD with both factors") * &u;
        let local = self
            .slab_coeff_constraints()
            .iter()
            .map(|(a, b)| {
                let a = DVector::from_column_slice(a);
                ((to_coeff.transpose() * a).iter().copied().collect(), *b)
            })
            .collect();
        Some((u, to_coeff, local))
    }

    /// Some feasible coefficient vector, found by sampling and then by cyclic
    /// projection onto violated half-spaces.
    pub(crate) fn slab_feasible_coeffs(&self) -> Option<Vec<f64>> {
        let ConvexSet::AffineSlab { span, .. } = self else {
            return None;
        };
        let m = span.len();
        let cons = self.slab_coeff_constraints();
        let feasible = |c: &[f64], slack: f64| cons.iter().all(|(a, b)| dot(a, c) <= b + slack);
        let zero = vec![0.0; m];
        if feasible(&zero, 0.0) {
            return Some(zero);
        }
        for radius in [1.0, 10.0, 100.0, 1000.0] {
            for c in lattice(m, 11, radius) {
                if feasible(&c, 0.0) {
                    return Some(c);
                }
            }
        }
        let mut c = zero;
        for _ in 0..20_000 {
            let mut moved = false;
            for (a, b) in &cons {
                let aa = dot(a, a);
                let viol = dot(a, &c) - b;
                if viol > 0.0 {
                    if aa == 0.0 {
                        return None;
                    }
                    // nudge slightly past the boundary
                    let s = (viol + 1e-12 * (1.0 + b.abs())) / aa;
                    for (ci, ai) in c.iter_mut().zip(a) {
                        *ci -= s * ai;
                    }
                    moved = true;
                }
            }
            if !moved {
                return Some(c);
            }
        }
        feasible(&c, 1e-9).then_some(c)
    }

    /// Polyhedron vertices in span coefficients (only for `m ≤ 3`).
    fn slab_vertex_coeffs(&self) -> Vec<Vec<f64>> {
        let ConvexSet::AffineSlab { span, .. } = self else {
            return Vec::new();
        };
        let m = span.len();
        let cons = self.slab_coeff_constraints();
        if m == 0 || m > 3 || cons.len() < m {
            return Vec::new();
        }
        let mut out = Vec::new();
        for idx in combinations(cons.len(), m) {
            let a = DMatrix::from_fn(m, m, |i, j| cons[idx[i]].0[j]);
            let b = DVector::from_iterator(m, idx.iter().map(|&i| cons[i].1));
            let Some(lu) = a.clone().lu().solve(&b) else { continue };
            let c: Vec<f64> = lu.iter().copied().collect();
            if c.iter().all(|x| x.is_finite())
                && cons
                    .iter()
                    .all(|(ai, bi)| dot(ai, &c) <= bi + 1e-9 * (1.0 + bi.abs()))
            {
                out.push(c);
            }
        }
        out
    }

    /// Euclidean distance from `x` to the set.
    pub fn euclidean_distance(&self, x: &Vector) -> Result<f64> {
        check_dim(x, self.dim())?;
        match self {
            ConvexSet::Segment { a, b } => {
                let ab = b - a;
                let len2 = ab.norm_squared();
                let t = if len2 == 0.0 { 0.0 } else { ((x - a).dot(&ab) / len2).clamp(0.0, 1.0) };
                Ok((a + ab * t - x).norm())
            }
            ConvexSet::HalfLine { origin, direction } => {
                let t = (x - origin).dot(direction).max(0.0);
                Ok((origin + direction * t - x).norm())
            }
            ConvexSet::Line { point, direction } => {
                let t = (x - point).dot(direction);
                Ok((point + direction * t - x).norm())
            }
            ConvexSet::Polytope { vertices } => match hull_distance_exhaustive(vertices, x) {
                Some(d) => Ok(d),
                None => self.generic_euclidean_distance(x),
            },
            ConvexSet::AffineSlab { .. } => self.generic_euclidean_distance(x),
        }
    }

    fn generic_euclidean_distance(&self, x: &Vector) -> Result<f64> {
        let e = NormSpec::Euclidean { dim: self.dim() };
        Ok(projection::solve(&e, self, x, Direction::Forward, None)?.distance)
    }

    /// `true` iff the Euclidean distance from `x` to the set is at most `tol`.
    pub fn contains(&self, x: &Vector, tol: f64) -> Result<bool> {
        if !(tol > 0.0) {
            return Err(GeomError::Precondition("membership tolerance must be positive".into()));
        }
        Ok(self.euclidean_distance(x)? <= tol)
    }

    /// Deterministic member grid. Unbounded sets are clipped to the
    /// Euclidean ball of `radius` around [`ConvexSet::base_point`].
    ///
    /// Polytopes: every vertex, every edge at `resolution` points, and
    /// higher-dimensional faces on a barycentric lattice of at most 64
    /// subdivisions. Slabs: a coefficient lattice (capped at about 10⁶
    /// points), every vertex, and for two-dimensional spans every boundary
    /// edge at `resolution` points.
    pub fn sample_grid(&self, resolution: usize, radius: f64) -> Result<Vec<Vector>> {
        if resolution < 2 {
            return Err(GeomError::Precondition("grid resolution must be at least 2".into()));
        }
        if !(radius > 0.0) {
            return Err(GeomError::Precondition("clip radius must be positive".into()));
        }
        let steps = (resolution - 1) as f64;
        let along = |lo: f64, hi: f64| -> Vec<f64> { (0..resolution).map(|i| lo + (hi - lo) * i as f64 / steps).collect() };
        let out: Vec<Vector> = match self {
            ConvexSet::Segment { a, b } => along(0.0, 1.0).into_iter().map(|t| a + (b - a) * t).collect(),
            ConvexSet::HalfLine { origin, direction } => {
                along(0.0, radius).into_iter().map(|t| origin + direction * t).collect()
            }
            ConvexSet::Line { point, direction } => {
                along(-radius, radius).into_iter().map(|t| point + direction * t).collect()
            }
            ConvexSet::Polytope { vertices } => polytope_lattice(vertices, resolution),
            ConvexSet::AffineSlab { span, base, .. } => {
                let m = span.len();
                let cons = self.slab_coeff_constraints();
                let mut pts: Vec<Vector> = Vec::new();
                if m == 0 {
                    if cons.iter().all(|(_, b)| *b >= -1e-12 * (1.0 + b.abs())) {
                        pts.push(base.clone());
                    }
                } else {
                    // lattice in an orthonormal frame of the span, so the
                    // clip disc is covered whatever the span lengths
                    let (u, _, local) = self.slab_frame().expect("slab with a span");
                    let inside = |x: &[f64]| local.iter().all(|(a, b)| dot(a, x) <= b + 1e-12 * (1.0 + b.abs()));
                    let per_axis = resolution.min((1e6f64.powf(1.0 / m as f64)) as usize).max(2);
                    let mut xs = lattice(m, per_axis, radius);
                    if m == 2 {
                        for (a, b) in &local {
                            xs.extend(edge_coeffs(a, *b, &[radius, radius], resolution));
                        }
                    }
                    pts.extend(
                        xs.into_iter()
                            .filter(|x| inside(x))
                            .map(|x| base + &u * DVector::from_vec(x)),
                    );
                    pts.extend(
                        self.slab_vertex_coeffs()
                            .into_iter()
                            .map(|c| span.iter().zip(&c).fold(base.clone(), |acc, (s, x)| acc + s * *x)),
                    );
                }
                pts.into_iter().filter(|p| (p - base).norm() <= radius * (1.0 + 1e-12)).collect()
            }
        };
        if out.is_empty() {
            return Err(GeomError::ClipMiss("sampling region misses the set".into()));
        }
        Ok(out)
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `k`-subsets of `0..n` in lexicographic order.
pub(crate) fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k > n {
        return out;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(idx.clone());
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if idx[i] != i + n - k {
                break;
            }
            if i == 0 {
                return out;
            }
        }
        if idx[i] == i + n - k {
            return out;
        }
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Cartesian lattice `[-radius, radius]^m` with `per_axis` points per axis.
fn lattice(m: usize, per_axis: usize, radius: f64) -> Vec<Vec<f64>> {
    let axis: Vec<f64> = (0..per_axis)
        .map(|i| -radius + 2.0 * radius * i as f64 / (per_axis - 1) as f64)
        .collect();
    let mut out = vec![Vec::with_capacity(m)];
    for _ in 0..m {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                axis.iter().map(move |&x| {
                    let mut p = prefix.clone();
                    p.push(x);
                    p
                })
            })
            .collect();
    }
    out
}

/// Points along the boundary line `a · c = b` of a two-dimensional slab,
/// inside the coefficient box.
fn edge_coeffs(a: &[f64], b: f64, scales: &[f64], resolution: usize) -> Vec<Vec<f64>> {
    let na = a[0].hypot(a[1]);
    if na == 0.0 {
        return Vec::new();
    }
    let foot = [a[0] * b / (na * na), a[1] * b / (na * na)];
    let tangent = [-a[1] / na, a[0] / na];
    let reach = scales[0].hypot(scales[1]) + foot[0].hypot(foot[1]);
    (0..resolution)
        .map(|i| {
            let s = -reach + 2.0 * reach * i as f64 / (resolution - 1) as f64;
            vec![foot[0] + s * tangent[0], foot[1] + s * tangent[1]]
        })
        .collect()
}

fn polytope_lattice(vertices: &[Vector], resolution: usize) -> Vec<Vector> {
    let n = vertices[0].len();
    let kmax = vertices.len().min(n + 1);
    let mut out: Vec<Vector> = vertices.to_vec();
    for k in 2..=kmax {
        let denom = if k == 2 { resolution - 1 } else { (resolution - 1).min(64) };
        if denom < k {
            continue;
        }
        let parts = positive_compositions(denom, k);
        for subset in combinations(vertices.len(), k) {
            for weights in &parts {
                let p = subset
                    .iter()
                    .zip(weights)
                    .fold(Vector::zeros(n), |acc, (&i, &w)| acc + &vertices[i] * (w as f64 / denom as f64));
                out.push(p);
            }
        }
    }
    out
}

/// Compositions of `total` into `k` strictly positive parts.
fn positive_compositions(total: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(rem: usize, k: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k == 1 {
            prefix.push(rem);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for first in 1..=rem - (k - 1) {
            prefix.push(first);
            rec(rem - first, k - 1, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if total >= k {
        rec(total, k, &mut Vec::new(), &mut out);
    }
    out
}

/// Exact Euclidean distance to a convex hull by projecting onto the affine
/// hull of every affinely independent vertex subset of size `≤ n + 1`.
/// `None` when the enumeration would be too large.
fn hull_distance_exhaustive(vertices: &[Vector], x: &Vector) -> Option<f64> {
    let n = x.len();
    let kmax = vertices.len().min(n + 1);
    let mut total = 0f64;
    for k in 1..=kmax {
        total += binomial(vertices.len(), k);
    }
    if n > 3 || total > 2e5 {
        return None;
    }
    let mut best = f64::INFINITY;
    for k in 1..=kmax {
        for subset in combinations(vertices.len(), k) {
            let v0 = &vertices[subset[0]];
            if k == 1 {
                best = best.min((v0 - x).norm());
                continue;
            }
            let m = DMatrix::from_columns(&subset[1..].iter().map(|&i| &vertices[i] - v0).collect::<Vec<_>>());
            let gram = m.transpose() * &m;
            let Some(chol) = gram.clone().cholesky() else { continue };
            let diag_min = (0..k - 1).map(|i| chol.l()[(i, i)]).fold(f64::INFINITY, f64::min);
            let diag_max = (0..k - 1).map(|i| chol.l()[(i, i)]).fold(0.0, f64::max);
            if diag_min <= 1e-10 * diag_max {
                continue;
            }
            let mu = chol.solve(&(m.transpose() * (x - v0)));
            let lam0 = 1.0 - mu.sum();
            if lam0 >= -1e-12 && mu.iter().all(|&w| w >= -1e-12) {
                best = best.min((v0 + &m * mu - x).norm());
            }
        }
    }
    Some(best)
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}
