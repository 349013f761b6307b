//! Constant-curvature model surfaces `M_κ²`.
//!
//! `κ = 0` is the plane ℝ². `κ > 0` is the sphere `|p| = r` in ℝ³ with
//! `r = 1/√κ`. `κ < 0` is the upper sheet of the hyperboloid
//! `⟨p, p⟩_L = -r²` with `⟨x, y⟩_L = x₁y₁ + x₂y₂ - x₃y₃` and `r = 1/√(-κ)`;
//! the time coordinate is the last one.

use rand::Rng;
use serde::Serialize;

use crate::error::{GeomError, Result};
use crate::norms::Vector;
use crate::search::{extrapolate_to_zero, minimize_1d};

const EMBED_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModelSpace {
    pub kappa: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelPoint {
    pub kappa: f64,
    #[serde(serialize_with = "crate::ser::vector")]
    pub coords: Vector,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TangentVector {
    pub base: ModelPoint,
    #[serde(serialize_with = "crate::ser::vector")]
    pub components: Vector,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeodesicSegment {
    pub kappa: f64,
    pub start: ModelPoint,
    pub end: ModelPoint,
    pub length: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct TriangleReport {
    pub vertices: [ModelPoint; 3],
    pub side_lengths: [f64; 3],
    pub comparison_vertices: [ModelPoint; 3],
    pub max_cat_violation: f64,
    pub sample_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeodesicProjection {
    pub foot: ModelPoint,
    pub t: f64,
    pub dist: f64,
    pub unique: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AngleEstimate {
    pub angle: f64,
    pub limit: f64,
    pub quotients: Vec<f64>,
    /// The quotient is non-increasing in `s`.
    pub monotone: bool,
}

/// `π/√κ` for `κ > 0`, `∞` otherwise.
pub fn diameter(kappa: f64) -> f64 {
    if kappa > 0.0 {
        std::f64::consts::PI / kappa.sqrt()
    } else {
        f64::INFINITY
    }
}

fn ambient_dim(kappa: f64) -> usize {
    if kappa == 0.0 {
        2
    } else {
        3
    }
}

/// Euclidean product for `κ ≥ 0`, Lorentz product for `κ < 0`.
fn ip(kappa: f64, a: &Vector, b: &Vector) -> f64 {
    if kappa < 0.0 {
        a[0] * b[0] + a[1] * b[1] - a[2] * b[2]
    } else {
        a.dot(b)
    }
}

fn check_kappa(kappa: f64) -> Result<()> {
    if !kappa.is_finite() {
        return Err(GeomError::NonFinite("curvature"));
    }
    Ok(())
}

fn same_kappa(a: f64, b: f64) -> Result<()> {
    if a != b {
        return Err(GeomError::KappaMismatch(a, b));
    }
    Ok(())
}

impl ModelSpace {
    pub fn new(kappa: f64) -> Result<Self> {
        check_kappa(kappa)?;
        Ok(ModelSpace { kappa })
    }

    /// `1/√|κ|`; `∞` for the plane.
    pub fn radius(&self) -> f64 {
        if self.kappa == 0.0 {
            f64::INFINITY
        } else {
            1.0 / self.kappa.abs().sqrt()
        }
    }

    pub fn base_point(&self) -> ModelPoint {
        let coords = if self.kappa == 0.0 {
            Vector::zeros(2)
        } else {
            Vector::from_vec(vec![0.0, 0.0, self.radius()])
        };
        ModelPoint { kappa: self.kappa, coords }
    }

    /// Orthonormal tangent frame at [`ModelSpace::base_point`].
    pub fn base_frame(&self) -> (TangentVector, TangentVector) {
        let base = self.base_point();
        let n = ambient_dim(self.kappa);
        let mut e1 = Vector::zeros(n);
        let mut e2 = Vector::zeros(n);
        e1[0] = 1.0;
        e2[1] = 1.0;
        (
            TangentVector { base: base.clone(), components: e1 },
            TangentVector { base, components: e2 },
        )
    }

    /// `exp` at the base point of `x·e₁ + y·e₂`.
    pub fn chart_point(&self, x: f64, y: f64) -> ModelPoint {
        let (e1, e2) = self.base_frame();
        let v = TangentVector {
            base: e1.base.clone(),
            components: e1.components * x + e2.components * y,
        };
        exp(&v)
    }

    /// Sphere point at latitude `lat` and longitude `lon` (equator `x₃ = 0`).
    pub fn lat_lon(&self, lat: f64, lon: f64) -> Result<ModelPoint> {
        if self.kappa <= 0.0 {
            return Err(GeomError::Precondition("latitude/longitude only on the sphere".into()));
        }
        let r = self.radius();
        ModelPoint::new(
            self.kappa,
            Vector::from_vec(vec![r * lat.cos() * lon.cos(), r * lat.cos() * lon.sin(), r * lat.sin()]),
        )
    }

    /// A point at distance at most `spread` from the base point, uniform in
    /// direction.
    pub fn random_point<R: Rng>(&self, rng: &mut R, spread: f64) -> ModelPoint {
        let theta = rng.random_range(0.0..std::f64::consts::TAU);
        let rad = spread * rng.random_range(0.0f64..1.0).sqrt();
        self.chart_point(rad * theta.cos(), rad * theta.sin())
    }
}

impl ModelPoint {
    /// Validates the embedding constraint within `1e-10` relative and
    /// renormalizes.
    pub fn new(kappa: f64, coords: Vector) -> Result<Self> {
        check_kappa(kappa)?;
        let n = ambient_dim(kappa);
        if coords.len() != n {
            return Err(GeomError::DimensionMismatch { expected: n, found: coords.len() });
        }
        if coords.iter().any(|x| !x.is_finite()) {
            return Err(GeomError::NonFinite("model point coordinate"));
        }
        if kappa != 0.0 {
            let r2 = 1.0 / kappa.abs();
            let q = ip(kappa, &coords, &coords);
            let target = if kappa > 0.0 { r2 } else { -r2 };
            let scale = if kappa > 0.0 { r2 } else { r2 + coords[0] * coords[0] + coords[1] * coords[1] };
            if (q - target).abs() > EMBED_TOL * scale {
                return Err(GeomError::Precondition(format!(
                    "point violates the embedding constraint: <p,p> = {q}, expected {target}"
                )));
            }
            if kappa < 0.0 && coords[2] <= 0.0 {
                return Err(GeomError::Precondition("hyperboloid point must lie on the upper sheet".into()));
            }
        }
        Ok(Self::renormalized(kappa, coords))
    }

    fn renormalized(kappa: f64, mut coords: Vector) -> Self {
        if kappa > 0.0 {
            let r = 1.0 / kappa.sqrt();
            coords *= r / coords.norm();
        } else if kappa < 0.0 {
            let r2 = -1.0 / kappa;
            coords[2] = (r2 + coords[0] * coords[0] + coords[1] * coords[1]).sqrt();
        }
        ModelPoint { kappa, coords }
    }

    /// Defect of the embedding constraint relative to `r²`.
    pub fn embedding_defect(&self) -> f64 {
        if self.kappa == 0.0 {
            return 0.0;
        }
        let r2 = 1.0 / self.kappa.abs();
        let target = if self.kappa > 0.0 { r2 } else { -r2 };
        (ip(self.kappa, &self.coords, &self.coords) - target).abs() / r2
    }
}

impl TangentVector {
    /// Validates tangency within `1e-10` and projects onto the tangent
    /// plane.
    pub fn new(base: ModelPoint, components: Vector) -> Result<Self> {
        if components.len() != base.coords.len() {
            return Err(GeomError::DimensionMismatch {
                expected: base.coords.len(),
                found: components.len(),
            });
        }
        if components.iter().any(|x| !x.is_finite()) {
            return Err(GeomError::NonFinite("tangent component"));
        }
        if base.kappa != 0.0 {
            let r = 1.0 / base.kappa.abs().sqrt();
            let off = ip(base.kappa, &base.coords, &components) / r;
            if off.abs() > EMBED_TOL * (1.0 + components.norm()) {
                return Err(GeomError::Precondition(format!("vector is not tangent: <p,v>/r = {off}")));
            }
        }
        Ok(Self::projected(base, components))
    }

    fn projected(base: ModelPoint, mut components: Vector) -> Self {
        let k = base.kappa;
        if k != 0.0 {
            let pp = ip(k, &base.coords, &base.coords);
            let c = ip(k, &components, &base.coords) / pp;
            components -= &base.coords * c;
        }
        TangentVector { base, components }
    }

    /// Riemannian length.
    pub fn norm(&self) -> f64 {
        ip(self.base.kappa, &self.components, &self.components).max(0.0).sqrt()
    }

    pub fn inner(&self, other: &TangentVector) -> f64 {
        ip(self.base.kappa, &self.components, &other.components)
    }

    pub fn scaled(&self, s: f64) -> TangentVector {
        TangentVector {
            base: self.base.clone(),
            components: &self.components * s,
        }
    }
}

pub fn distance(p: &ModelPoint, q: &ModelPoint) -> Result<f64> {
    same_kappa(p.kappa, q.kappa)?;
    Ok(dist_unchecked(p, q))
}

fn dist_unchecked(p: &ModelPoint, q: &ModelPoint) -> f64 {
    let k = p.kappa;
    if k == 0.0 {
        return (&p.coords - &q.coords).norm();
    }
    let r = 1.0 / k.abs().sqrt();
    if k > 0.0 {
        let a = &p.coords / r;
        let b = &q.coords / r;
        r * a.cross(&b).norm().atan2(a.dot(&b))
    } else {
        // ⟨p̂ - q̂, p̂ - q̂⟩_L = 4 sinh²(d / 2r)
        let diff = (&p.coords - &q.coords) / r;
        let s = ip(k, &diff, &diff).max(0.0).sqrt();
        2.0 * r * (0.5 * s).asinh()
    }
}

pub fn exp(v: &TangentVector) -> ModelPoint {
    let k = v.base.kappa;
    let p = &v.base.coords;
    if k == 0.0 {
        return ModelPoint { kappa: k, coords: p + &v.components };
    }
    let s = v.norm();
    if s == 0.0 {
        return v.base.clone();
    }
    let r = 1.0 / k.abs().sqrt();
    let dir = &v.components / s;
    let coords = if k > 0.0 {
        p * (s / r).cos() + dir * (r * (s / r).sin())
    } else {
        p * (s / r).cosh() + dir * (r * (s / r).sinh())
    };
    ModelPoint::renormalized(k, coords)
}

/// Inverse of [`exp`] within the injectivity domain.
pub fn log(p: &ModelPoint, q: &ModelPoint) -> Result<TangentVector> {
    same_kappa(p.kappa, q.kappa)?;
    let k = p.kappa;
    if k == 0.0 {
        return Ok(TangentVector { base: p.clone(), components: &q.coords - &p.coords });
    }
    let d = dist_unchecked(p, q);
    let pp = ip(k, &p.coords, &p.coords);
    let u = &q.coords - &p.coords * (ip(k, &q.coords, &p.coords) / pp);
    let un = ip(k, &u, &u).max(0.0).sqrt();
    if un == 0.0 || d == 0.0 {
        if d > 0.0 {
            return Err(GeomError::Antipodal);
        }
        return Ok(TangentVector { base: p.clone(), components: Vector::zeros(3) });
    }
    Ok(TangentVector::projected(p.clone(), u * (d / un)))
}

impl GeodesicSegment {
    pub fn new(start: ModelPoint, end: ModelPoint) -> Result<Self> {
        same_kappa(start.kappa, end.kappa)?;
        let length = dist_unchecked(&start, &end);
        if start.kappa > 0.0 && length >= diameter(start.kappa) * (1.0 - 1e-12) {
            return Err(GeomError::Antipodal);
        }
        Ok(GeodesicSegment { kappa: start.kappa, start, end, length })
    }

    /// Initial velocity `log_start(end)` (length = segment length).
    pub fn initial_velocity(&self) -> TangentVector {
        log(&self.start, &self.end).expect("segment endpoints are not antipodal")
    }

    /// Unit velocity at `γ(t)`; at a degenerate segment the zero vector.
    pub fn unit_velocity(&self, t: f64) -> TangentVector {
        let base = exp(&self.initial_velocity().scaled(t));
        let k = self.kappa;
        if self.length == 0.0 {
            let n = ambient_dim(k);
            return TangentVector { base, components: Vector::zeros(n) };
        }
        let u0 = self.initial_velocity().components / self.length;
        let components = if k == 0.0 {
            u0
        } else {
            let r = 1.0 / k.abs().sqrt();
            let th = t * self.length / r;
            let p = &self.start.coords / r;
            if k > 0.0 {
                p * -th.sin() + u0 * th.cos()
            } else {
                p * th.sinh() + u0 * th.cosh()
            }
        };
        TangentVector::projected(base, components)
    }
}

/// Point at arc length `t·length` from the start.
pub fn geodesic_point(seg: &GeodesicSegment, t: f64) -> Result<ModelPoint> {
    if !(0.0..=1.0).contains(&t) {
        return Err(GeomError::Precondition(format!("geodesic parameter {t} outside [0, 1]")));
    }
    Ok(geodesic_point_unchecked(seg, t))
}

fn geodesic_point_unchecked(seg: &GeodesicSegment, t: f64) -> ModelPoint {
    if t == 0.0 {
        return seg.start.clone();
    }
    if t == 1.0 {
        return seg.end.clone();
    }
    exp(&seg.initial_velocity().scaled(t))
}

/// Transports `w0` (based at the segment start) to `γ(t)`. The component
/// along the unit velocity rotates with it; the normal component is
/// constant in the ambient space.
pub fn parallel_transport(seg: &GeodesicSegment, w0: &TangentVector, t: f64) -> Result<TangentVector> {
    same_kappa(seg.kappa, w0.base.kappa)?;
    if (&w0.base.coords - &seg.start.coords).norm() > EMBED_TOL * (1.0 + seg.start.coords.norm()) {
        return Err(GeomError::Precondition("tangent vector is not based at the segment start".into()));
    }
    let target = exp(&seg.initial_velocity().scaled(t));
    if seg.length == 0.0 || seg.kappa == 0.0 {
        return Ok(TangentVector { base: target, components: w0.components.clone() });
    }
    let u0 = seg.unit_velocity(0.0);
    let a = w0.inner(&u0);
    let normal = &w0.components - &u0.components * a;
    let ut = seg.unit_velocity(t);
    Ok(TangentVector::projected(target, ut.components * a + normal))
}

/// Three points of `M_κ̄²` with the given pairwise distances: vertex 1 at
/// the base point, vertex 2 along `e₁`, vertex 3 on the `e₂ ≥ 0` side.
pub fn comparison_triangle(d12: f64, d13: f64, d23: f64, kappa_bar: f64) -> Result<[ModelPoint; 3]> {
    check_kappa(kappa_bar)?;
    let ds = [d12, d13, d23];
    if ds.iter().any(|d| !(d.is_finite() && *d >= 0.0)) {
        return Err(GeomError::Precondition("side lengths must be finite and non-negative".into()));
    }
    let slack = 1e-12 * (1.0 + d12 + d13 + d23);
    if d12 > d13 + d23 + slack || d13 > d12 + d23 + slack || d23 > d12 + d13 + slack {
        return Err(GeomError::Precondition("side lengths violate the triangle inequality".into()));
    }
    if d12 + d13 + d23 >= 2.0 * diameter(kappa_bar) {
        return Err(GeomError::Precondition("perimeter must be less than twice the model diameter".into()));
    }
    let space = ModelSpace { kappa: kappa_bar };
    // half-angle law: S(c) = S(a - b) + W(a)W(b) sin²(θ/2)
    let (a, b, c) = (d12, d13, d23);
    let hav_theta = if a == 0.0 || b == 0.0 {
        0.0
    } else if kappa_bar == 0.0 {
        (0.25 * c * c - 0.25 * (a - b) * (a - b)) / (a * b)
    } else if kappa_bar > 0.0 {
        let rho = kappa_bar.sqrt();
        let s = |x: f64| (0.5 * rho * x).sin().powi(2);
        (s(c) - s(a - b)) / ((rho * a).sin() * (rho * b).sin())
    } else {
        let rho = (-kappa_bar).sqrt();
        let s = |x: f64| (0.5 * rho * x).sinh().powi(2);
        (s(c) - s(a - b)) / ((rho * a).sinh() * (rho * b).sinh())
    };
    let theta = 2.0 * hav_theta.clamp(0.0, 1.0).sqrt().asin();
    Ok([
        space.base_point(),
        space.chart_point(a, 0.0),
        space.chart_point(b * theta.cos(), b * theta.sin()),
    ])
}

fn perimeter_check(sides: &[f64; 3], kappa_bar: f64) -> Result<()> {
    if sides.iter().sum::<f64>() >= 2.0 * diameter(kappa_bar) {
        return Err(GeomError::Precondition("perimeter must be less than twice the model diameter".into()));
    }
    Ok(())
}

/// Compares chords between side samples with the chords of the comparison
/// triangle in `M_κ̄²`. Each side carries `grid_per_side + 1` samples at
/// equal arc-length fractions; all sample pairs are compared.
pub fn cat_check(triangle: &[ModelPoint; 3], kappa_bar: f64, grid_per_side: usize) -> Result<TriangleReport> {
    if grid_per_side == 0 {
        return Err(GeomError::Precondition("need at least one sample interval per side".into()));
    }
    let k = triangle[0].kappa;
    same_kappa(k, triangle[1].kappa)?;
    same_kappa(k, triangle[2].kappa)?;
    let pairs = [(0usize, 1usize), (1, 2), (2, 0)];
    let sides = pairs.map(|(i, j)| GeodesicSegment::new(triangle[i].clone(), triangle[j].clone()));
    let sides = [sides[0].clone()?, sides[1].clone()?, sides[2].clone()?];
    let lengths = [sides[0].length, sides[1].length, sides[2].length];
    perimeter_check(&lengths, kappa_bar)?;
    let cmp = comparison_triangle(lengths[0], lengths[2], lengths[1], kappa_bar)?;
    let cmp_sides = [
        GeodesicSegment::new(cmp[0].clone(), cmp[1].clone())?,
        GeodesicSegment::new(cmp[1].clone(), cmp[2].clone())?,
        GeodesicSegment::new(cmp[2].clone(), cmp[0].clone())?,
    ];
    let mut samples = Vec::new();
    for (side, cside) in sides.iter().zip(&cmp_sides) {
        for i in 0..=grid_per_side {
            let f = i as f64 / grid_per_side as f64;
            samples.push((geodesic_point_unchecked(side, f), geodesic_point_unchecked(cside, f)));
        }
    }
    let mut worst = f64::NEG_INFINITY;
    let mut count = 0;
    for (i, (x, xb)) in samples.iter().enumerate() {
        for (y, yb) in &samples[i + 1..] {
            worst = worst.max(dist_unchecked(x, y) - dist_unchecked(xb, yb));
            count += 1;
        }
    }
    Ok(TriangleReport {
        vertices: triangle.clone(),
        side_lengths: lengths,
        comparison_vertices: cmp,
        max_cat_violation: worst,
        sample_count: count,
    })
}

/// `d₁₂d₃₄ + d₁₄d₂₃ - d₁₃d₂₄`.
pub fn ptolemy_residual(p1: &ModelPoint, p2: &ModelPoint, p3: &ModelPoint, p4: &ModelPoint) -> Result<f64> {
    let d = distance;
    Ok(d(p1, p2)? * d(p3, p4)? + d(p1, p4)? * d(p2, p3)? - d(p1, p3)? * d(p2, p4)?)
}

/// Nearest point of the segment to `q`. On the sphere the segment must be
/// shorter than `πr` (guaranteed by construction) and `q` within `πr/2` of
/// it.
pub fn project_to_geodesic(seg: &GeodesicSegment, q: &ModelPoint) -> Result<GeodesicProjection> {
    same_kappa(seg.kappa, q.kappa)?;
    if seg.length == 0.0 {
        return Ok(GeodesicProjection {
            foot: seg.start.clone(),
            t: 0.0,
            dist: dist_unchecked(&seg.start, q),
            unique: true,
        });
    }
    let f = |t: f64| dist_unchecked(q, &geodesic_point_unchecked(seg, t));
    let df = |t: f64| {
        let g = geodesic_point_unchecked(seg, t);
        let d = dist_unchecked(q, &g);
        if d == 0.0 {
            return seg.length;
        }
        let vel = seg.unit_velocity(t).scaled(seg.length);
        match log(&g, q) {
            Ok(l) => -l.inner(&vel) / d,
            Err(_) => 0.0,
        }
    };
    let m = minimize_1d(f, df, 0.0, 1.0, 0.5, 1.0)?;
    if seg.kappa > 0.0 {
        let bound = 0.5 * diameter(seg.kappa);
        if m.value >= bound * (1.0 - 1e-12) {
            return Err(GeomError::Regime(format!(
                "distance {} to the segment is not below pi*r/2 = {bound}",
                m.value
            )));
        }
    }
    Ok(GeodesicProjection {
        foot: geodesic_point_unchecked(seg, m.t),
        t: m.t,
        dist: m.value,
        unique: !m.flat,
    })
}

/// `d(q₁, q₂) - d(P(q₁), P(q₂))` for the projection onto the segment.
pub fn nonexpansiveness_residual(seg: &GeodesicSegment, q1: &ModelPoint, q2: &ModelPoint) -> Result<f64> {
    let f1 = project_to_geodesic(seg, q1)?;
    let f2 = project_to_geodesic(seg, q2)?;
    Ok(distance(q1, q2)? - dist_unchecked(&f1.foot, &f2.foot))
}

/// Angle at `p` between the geodesic towards `direction_point` and the one
/// towards `z`, from the first-variation quotient
/// `(d(p,z) - d(γ(s),z))/s` extrapolated to `s = 0`.
pub fn alexandrov_angle(p: &ModelPoint, direction_point: &ModelPoint, z: &ModelPoint, s_sequence: &[f64]) -> Result<AngleEstimate> {
    same_kappa(p.kappa, direction_point.kappa)?;
    same_kappa(p.kappa, z.kappa)?;
    if s_sequence.len() < 2 {
        return Err(GeomError::Precondition("need at least two s values".into()));
    }
    if s_sequence.iter().any(|s| !(*s > 0.0)) || s_sequence.windows(2).any(|w| w[1] >= w[0]) {
        return Err(GeomError::Precondition("s values must be positive and strictly decreasing".into()));
    }
    let dz = dist_unchecked(p, z);
    if dz == 0.0 {
        return Err(GeomError::Precondition("p and z must differ".into()));
    }
    let dir = log(p, direction_point)?;
    let len = dir.norm();
    if len == 0.0 {
        return Err(GeomError::ZeroVector);
    }
    let unit = dir.scaled(1.0 / len);
    let quotients: Vec<f64> = s_sequence
        .iter()
        .map(|&s| (dz - dist_unchecked(&exp(&unit.scaled(s)), z)) / s)
        .collect();
    // s decreases along the list, so a non-increasing Q(s) grows along it
    let monotone = quotients.windows(2).all(|w| w[0] <= w[1] + 1e-12);
    let limit = extrapolate_to_zero(s_sequence, &quotients);
    Ok(AngleEstimate {
        angle: limit.clamp(-1.0, 1.0).acos(),
        limit,
        quotients,
        monotone,
    })
}

/// `d²(p, end) - d²(p, start) - d²(start, end)`; requires `start` to be the
/// foot of `p` and `κ ≤ 0`.
pub fn pythagorean_residual(p: &ModelPoint, seg: &GeodesicSegment) -> Result<f64> {
    same_kappa(p.kappa, seg.kappa)?;
    if seg.kappa > 0.0 {
        return Err(GeomError::Precondition("Pythagorean inequality needs curvature <= 0".into()));
    }
    let proj = project_to_geodesic(seg, p)?;
    if dist_unchecked(&proj.foot, &seg.start) > 1e-8 {
        return Err(GeomError::Precondition(format!(
            "segment start is not the foot of p (foot at t = {})",
            proj.t
        )));
    }
    let a = dist_unchecked(p, &seg.end);
    let b = dist_unchecked(p, &seg.start);
    Ok(a * a - b * b - seg.length * seg.length)
}
