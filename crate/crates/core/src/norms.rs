//! Minkowski norms on ℝⁿ and the quantities derived from them.
//!
//! A norm `F` here is positively homogeneous (`F(ty) = tF(y)` for `t ≥ 0`)
//! but not necessarily symmetric, so `d_F(p, q) = F(q - p)` is in general a
//! quasi-distance. For the smooth variants the fundamental tensor
//! `g_y = ∇²(F²/2)(y)` is available either in closed form or by finite
//! differences; `g_y(y, w)` itself is always evaluated through Euler's
//! identity `g_y(y, w) = F(y)·DF(y)[w]`, which is exact.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{GeomError, Result};

pub type Vector = DVector<f64>;

/// Variants of positively homogeneous Minkowski norms.
#[derive(Debug, Clone, PartialEq)]
pub enum NormSpec {
    Euclidean { dim: usize },
    /// `(Σ|y_i|^p)^{1/p}` with `p ≥ 2`.
    PNorm { dim: usize, p: f64 },
    /// `sqrt(yᵀAy) + bᵀy` with `A` symmetric positive definite and
    /// `‖b‖_{A⁻¹} < 1`.
    Randers { a: DMatrix<f64>, b: Vector },
    /// Slope-walking norm in ℝ²: `|y|² / (v|y| + (g/2)·y₁·sin α)`.
    Matsumoto { v: f64, alpha: f64, gravity: f64 },
    /// `|y|₂ + λ|y₁|`: strictly convex unit ball, not differentiable where
    /// `y₁ = 0`.
    NonSmoothSum { dim: usize, lambda: f64 },
}

/// `g_y` at a non-zero base vector.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricTensor {
    pub base: Vector,
    pub matrix: DMatrix<f64>,
}

impl MetricTensor {
    pub fn apply(&self, u: &Vector, v: &Vector) -> f64 {
        u.dot(&(&self.matrix * v))
    }
}

/// Both sides of the fundamental inequality at a pair `(y, w)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FundamentalInequality {
    /// `F(y)F(w) - |g_y(y, w)|`.
    pub residual: f64,
    /// `F(y)F(w) - g_y(y, w)`.
    pub one_sided_residual: f64,
    /// Largest relative defect of `g_y(y,y) = F(y)²` and `g_w(w,w) = F(w)²`
    /// computed from the full tensors.
    pub tensor_defect: f64,
}

/// Standard normal sample in ℝⁿ.
pub fn random_vector<R: rand::Rng + ?Sized>(rng: &mut R, n: usize) -> Vector {
    Vector::from_iterator(n, (0..n).map(|_| StandardNormal.sample(rng)))
}

pub(crate) fn check_dim(v: &Vector, n: usize) -> Result<()> {
    if v.len() != n {
        return Err(GeomError::DimensionMismatch {
            expected: n,
            found: v.len(),
        });
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(GeomError::NonFinite("vector coordinate"));
    }
    Ok(())
}

fn norm2(y: &[f64]) -> f64 {
    y.iter().fold(0.0f64, |acc, &x| acc.hypot(x))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl NormSpec {
    pub fn euclidean(dim: usize) -> Result<Self> {
        let spec = NormSpec::Euclidean { dim };
        spec.validate()?;
        Ok(spec)
    }

    pub fn pnorm(dim: usize, p: f64) -> Result<Self> {
        let spec = NormSpec::PNorm { dim, p };
        spec.validate()?;
        Ok(spec)
    }

    pub fn randers(a: DMatrix<f64>, b: Vector) -> Result<Self> {
        let spec = NormSpec::Randers { a, b };
        spec.validate()?;
        Ok(spec)
    }

    pub fn matsumoto(v: f64, alpha: f64, gravity: f64) -> Result<Self> {
        let spec = NormSpec::Matsumoto { v, alpha, gravity };
        spec.validate()?;
        Ok(spec)
    }

    pub fn nonsmooth(dim: usize, lambda: f64) -> Result<Self> {
        let spec = NormSpec::NonSmoothSum { dim, lambda };
        spec.validate()?;
        Ok(spec)
    }

    /// The instance used for the slope-walking reproduction: `v = 10`,
    /// `α = π/3`, `g = 9.81`.
    pub fn matsumoto_reference() -> Self {
        NormSpec::Matsumoto {
            v: 10.0,
            alpha: std::f64::consts::FRAC_PI_3,
            gravity: 9.81,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(GeomError::InvalidNorm(m));
        match self {
            NormSpec::Euclidean { dim } | NormSpec::NonSmoothSum { dim, .. } if *dim == 0 => {
                bad("dimension must be at least 1".into())
            }
            NormSpec::PNorm { dim, p } => {
                if *dim == 0 {
                    bad("dimension must be at least 1".into())
                } else if !(p.is_finite() && *p >= 2.0) {
                    bad(format!("p-norm exponent must be finite and >= 2, got {p}"))
                } else {
                    Ok(())
                }
            }
            NormSpec::NonSmoothSum { lambda, .. } if !(lambda.is_finite() && *lambda > 0.0) => {
                bad(format!("lambda must be positive, got {lambda}"))
            }
            NormSpec::Randers { a, b } => {
                let n = b.len();
                if n == 0 || a.nrows() != n || a.ncols() != n {
                    return bad(format!(
                        "Randers A must be {n}x{n}, got {}x{}",
                        a.nrows(),
                        a.ncols()
                    ));
                }
                if a.iter().chain(b.iter()).any(|x| !x.is_finite()) {
                    return bad("Randers data must be finite".into());
                }
                let scale = a.amax().max(1.0);
                if (a - a.transpose()).amax() > 1e-12 * scale {
                    return bad("Randers A must be symmetric".into());
                }
                let Some(chol) = a.clone().cholesky() else {
                    return bad("Randers A must be positive definite".into());
                };
                let dual = b.dot(&chol.solve(b));
                if dual.sqrt() >= 1.0 {
                    return bad(format!("Randers drift must satisfy |b|_(A^-1) < 1, got {}", dual.sqrt()));
                }
                Ok(())
            }
            NormSpec::Matsumoto { v, alpha, gravity } => {
                if !(v.is_finite() && *v > 0.0) {
                    bad(format!("speed v must be positive, got {v}"))
                } else if !(gravity.is_finite() && *gravity > 0.0) {
                    bad(format!("gravity must be positive, got {gravity}"))
                } else if !(alpha.is_finite() && *alpha >= 0.0 && *alpha < std::f64::consts::FRAC_PI_2) {
                    bad(format!("alpha must lie in [0, pi/2), got {alpha}"))
                } else if gravity * alpha.sin() > *v {
                    bad(format!("admissibility g*sin(alpha) <= v fails: {} > {v}", gravity * alpha.sin()))
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            NormSpec::Euclidean { dim } | NormSpec::PNorm { dim, .. } | NormSpec::NonSmoothSum { dim, .. } => *dim,
            NormSpec::Randers { b, .. } => b.len(),
            NormSpec::Matsumoto { .. } => 2,
        }
    }

    /// Everything except the non-smooth demo norm is `C²` away from 0.
    pub fn is_smooth(&self) -> bool {
        !matches!(self, NormSpec::NonSmoothSum { .. })
    }

    pub fn kind(&self) -> &'static str {
        match self {
            NormSpec::Euclidean { .. } => "euclidean",
            NormSpec::PNorm { .. } => "pnorm",
            NormSpec::Randers { .. } => "randers",
            NormSpec::Matsumoto { .. } => "matsumoto",
            NormSpec::NonSmoothSum { .. } => "nonsmooth",
        }
    }

    fn matsumoto_drift(alpha: f64, gravity: f64) -> f64 {
        0.5 * gravity * alpha.sin()
    }

    /// `F(y)` without validation. Callers guarantee `y.len() == dim()`.
    pub(crate) fn value(&self, y: &[f64]) -> f64 {
        match self {
            NormSpec::Euclidean { .. } => norm2(y),
            NormSpec::PNorm { p, .. } => {
                let m = y.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
                if m == 0.0 {
                    return 0.0;
                }
                let s: f64 = y.iter().map(|x| (x.abs() / m).powf(*p)).sum();
                m * s.powf(1.0 / p)
            }
            NormSpec::Randers { a, b } => {
                let n = y.len();
                let mut quad = 0.0;
                for i in 0..n {
                    let mut row = 0.0;
                    for j in 0..n {
                        row += a[(i, j)] * y[j];
                    }
                    quad += y[i] * row;
                }
                quad.max(0.0).sqrt() + dot(b.as_slice(), y)
            }
            NormSpec::Matsumoto { v, alpha, gravity } => {
                let n = y[0].hypot(y[1]);
                if n == 0.0 {
                    return 0.0;
                }
                let c = Self::matsumoto_drift(*alpha, *gravity);
                n * n / (v * n + c * y[0])
            }
            NormSpec::NonSmoothSum { lambda, .. } => norm2(y) + lambda * y[0].abs(),
        }
    }

    /// Right directional derivative `lim_{s→0⁺} (F(y + s w) - F(y)) / s`.
    pub(crate) fn dir_derivative(&self, y: &[f64], w: &[f64]) -> f64 {
        if y.iter().all(|&x| x == 0.0) {
            return self.value(w);
        }
        match self {
            NormSpec::NonSmoothSum { lambda, .. } => {
                let kink = if y[0] > 0.0 {
                    w[0]
                } else if y[0] < 0.0 {
                    -w[0]
                } else {
                    w[0].abs()
                };
                dot(y, w) / norm2(y) + lambda * kink
            }
            _ => dot(self.gradient_raw(y).as_slice(), w),
        }
    }

    /// Gradient of a smooth variant at `y ≠ 0`.
    fn gradient_raw(&self, y: &[f64]) -> Vector {
        let n = y.len();
        match self {
            NormSpec::Euclidean { .. } => {
                let r = norm2(y);
                Vector::from_iterator(n, y.iter().map(|x| x / r))
            }
            NormSpec::PNorm { p, .. } => {
                let f = self.value(y);
                Vector::from_iterator(n, y.iter().map(|x| x.signum() * (x.abs() / f).powf(p - 1.0)))
            }
            NormSpec::Randers { a, b } => {
                let yv = Vector::from_column_slice(y);
                let ay = a * &yv;
                let alpha = yv.dot(&ay).max(0.0).sqrt();
                ay / alpha + b
            }
            NormSpec::Matsumoto { v, alpha, gravity } => {
                let c = Self::matsumoto_drift(*alpha, *gravity);
                let nrm = y[0].hypot(y[1]);
                let d = v * nrm + c * y[0];
                let k = 2.0 * d - v * nrm;
                let d2 = d * d;
                Vector::from_vec(vec![(k * y[0] - nrm * nrm * c) / d2, k * y[1] / d2])
            }
            NormSpec::NonSmoothSum { lambda, .. } => {
                let r = norm2(y);
                let mut g = Vector::from_iterator(n, y.iter().map(|x| x / r));
                g[0] += lambda * if y[0] >= 0.0 { 1.0 } else { -1.0 };
                g
            }
        }
    }

    pub fn eval(&self, y: &Vector) -> Result<f64> {
        check_dim(y, self.dim())?;
        Ok(self.value(y.as_slice()))
    }

    /// `d_F(p, q) = F(q - p)`.
    pub fn quasi_distance(&self, p: &Vector, q: &Vector) -> Result<f64> {
        check_dim(p, self.dim())?;
        check_dim(q, self.dim())?;
        Ok(self.value((q - p).as_slice()))
    }

    pub fn gradient(&self, y: &Vector) -> Result<Vector> {
        check_dim(y, self.dim())?;
        if !self.is_smooth() {
            return Err(GeomError::UnsupportedVariant(
                "gradient of the non-smooth norm; use right_gradient".into(),
            ));
        }
        if y.iter().all(|&x| x == 0.0) {
            return Err(GeomError::ZeroVector);
        }
        Ok(self.gradient_raw(y.as_slice()))
    }

    /// Gradient with the right-hand convention `sgn(0) = +1` on kinks. For
    /// smooth variants this is the ordinary gradient.
    pub fn right_gradient(&self, y: &Vector) -> Result<Vector> {
        check_dim(y, self.dim())?;
        if y.iter().all(|&x| x == 0.0) {
            return Err(GeomError::ZeroVector);
        }
        Ok(self.gradient_raw(y.as_slice()))
    }

    /// `g_y(y, w)` through Euler's identity.
    pub fn fundamental_form(&self, y: &Vector, w: &Vector) -> Result<f64> {
        let grad = self.gradient(y)?;
        check_dim(w, self.dim())?;
        Ok(self.value(y.as_slice()) * grad.dot(w))
    }

    /// `∇²(F²/2)(y)`: closed form for Euclidean, p-norm and Randers, finite
    /// differences for Matsumoto.
    pub fn metric_tensor(&self, y: &Vector) -> Result<MetricTensor> {
        check_dim(y, self.dim())?;
        if !self.is_smooth() {
            return Err(GeomError::UnsupportedVariant(
                "metric tensor of the non-smooth norm".into(),
            ));
        }
        if y.iter().all(|&x| x == 0.0) {
            return Err(GeomError::UndefinedTensor);
        }
        let matrix = match self.analytic_hessian(y) {
            Some(m) => m,
            None => self.fd_hessian(y),
        };
        Ok(MetricTensor {
            base: y.clone(),
            matrix,
        })
    }

    /// Finite-difference Hessian of `F²/2`, available for every smooth
    /// variant. Central differences of the exact gradient `F∇F` with step
    /// `ε^{1/3}·max(1, |y|)`.
    pub fn fd_metric_tensor(&self, y: &Vector) -> Result<DMatrix<f64>> {
        check_dim(y, self.dim())?;
        if !self.is_smooth() {
            return Err(GeomError::UnsupportedVariant(
                "metric tensor of the non-smooth norm".into(),
            ));
        }
        if y.iter().all(|&x| x == 0.0) {
            return Err(GeomError::UndefinedTensor);
        }
        Ok(self.fd_hessian(y))
    }

    fn half_sq_gradient(&self, y: &[f64]) -> Vector {
        self.gradient_raw(y) * self.value(y)
    }

    fn fd_hessian(&self, y: &Vector) -> DMatrix<f64> {
        let n = y.len();
        let h = f64::EPSILON.cbrt() * y.norm().max(1.0);
        let mut m = DMatrix::zeros(n, n);
        let mut buf = y.clone();
        for j in 0..n {
            buf[j] = y[j] + h;
            let plus = self.half_sq_gradient(buf.as_slice());
            buf[j] = y[j] - h;
            let minus = self.half_sq_gradient(buf.as_slice());
            buf[j] = y[j];
            let col = (plus - minus) / (2.0 * h);
            m.set_column(j, &col);
        }
        (&m + m.transpose()) * 0.5
    }

    fn analytic_hessian(&self, y: &Vector) -> Option<DMatrix<f64>> {
        let n = y.len();
        match self {
            NormSpec::Euclidean { .. } => Some(DMatrix::identity(n, n)),
            NormSpec::PNorm { p, .. } => {
                let f = self.value(y.as_slice());
                let r: Vec<f64> = y.iter().map(|x| x.abs() / f).collect();
                let u: Vec<f64> = y
                    .iter()
                    .zip(&r)
                    .map(|(x, ri)| x.signum() * ri.powf(p - 1.0))
                    .collect();
                Some(DMatrix::from_fn(n, n, |i, j| {
                    let diag = if i == j { (p - 1.0) * r[i].powf(p - 2.0) } else { 0.0 };
                    diag + (2.0 - p) * u[i] * u[j]
                }))
            }
            NormSpec::Randers { a, b } => {
                let ay = a * y;
                let alpha = y.dot(&ay).sqrt();
                let f = alpha + b.dot(y);
                let grad = &ay / alpha + b;
                let hess_f = a / alpha - (&ay * ay.transpose()) / alpha.powi(3);
                Some(&grad * grad.transpose() + hess_f * f)
            }
            _ => None,
        }
    }

    /// Closed-form tensor where one exists; `None` for Matsumoto.
    pub fn analytic_metric_tensor(&self, y: &Vector) -> Result<Option<DMatrix<f64>>> {
        check_dim(y, self.dim())?;
        if y.iter().all(|&x| x == 0.0) {
            return Err(GeomError::UndefinedTensor);
        }
        Ok(self.analytic_hessian(y))
    }

    /// An upper bound for `F` on the Euclidean unit sphere, i.e. a Lipschitz
    /// constant of `F` with respect to the Euclidean norm.
    pub fn lipschitz_bound(&self) -> f64 {
        match self {
            NormSpec::Euclidean { .. } | NormSpec::PNorm { .. } => 1.0,
            NormSpec::Randers { a, b } => {
                let eig = a.clone().symmetric_eigen();
                eig.eigenvalues.max().sqrt() + b.norm()
            }
            NormSpec::Matsumoto { v, alpha, gravity } => 1.0 / (v - Self::matsumoto_drift(*alpha, *gravity)),
            NormSpec::NonSmoothSum { lambda, .. } => 1.0 + lambda,
        }
    }

    /// Both sides of `|g_y(y, w)| ≤ F(y)F(w)`.
    pub fn fundamental_inequality_residual(&self, y: &Vector, w: &Vector) -> Result<FundamentalInequality> {
        check_dim(y, self.dim())?;
        check_dim(w, self.dim())?;
        if y.iter().all(|&x| x == 0.0) || w.iter().all(|&x| x == 0.0) {
            return Err(GeomError::ZeroVector);
        }
        let fy = self.value(y.as_slice());
        let fw = self.value(w.as_slice());
        let gyw = self.fundamental_form(y, w)?;
        let gy = self.metric_tensor(y)?;
        let gw = self.metric_tensor(w)?;
        let defect_y = (gy.apply(y, y) - fy * fy).abs() / (1.0 + fy * fy);
        let defect_w = (gw.apply(w, w) - fw * fw).abs() / (1.0 + fw * fw);
        Ok(FundamentalInequality {
            residual: fy * fw - gyw.abs(),
            one_sided_residual: fy * fw - gyw,
            tensor_defect: defect_y.max(defect_w),
        })
    }

    /// Samples `F(-y) = F(y)` on `samples` points of the unit sphere.
    pub fn is_reversible(&self, samples: usize) -> bool {
        let n = self.dim();
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        let mut y = vec![0.0; n];
        let mut neg = vec![0.0; n];
        for _ in 0..samples.max(1) {
            for c in y.iter_mut() {
                *c = StandardNormal.sample(&mut rng);
            }
            let r = norm2(&y);
            if r == 0.0 {
                continue;
            }
            for (c, m) in y.iter_mut().zip(neg.iter_mut()) {
                *c /= r;
                *m = -*c;
            }
            let f = self.value(&y);
            if (self.value(&neg) - f).abs() > 1e-12 * (1.0 + f) {
                return false;
            }
        }
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::FRAC_PI_3;

    fn v(xs: &[f64]) -> Vector {
        Vector::from_column_slice(xs)
    }

    #[test]
    fn euclidean_three_four_five() {
        let e = NormSpec::euclidean(2).unwrap();
        assert_eq!(e.eval(&v(&[3.0, 4.0])).unwrap(), 5.0);
        assert_eq!(e.quasi_distance(&v(&[0.0, 0.0]), &v(&[3.0, 4.0])).unwrap(), 5.0);
    }

    #[test]
    fn matsumoto_reference_values() {
        let m = NormSpec::matsumoto_reference();
        // hand evaluation of the closed form: F((±1, 0)) = 1 / (v ± (g/2) sin α)
        let c = 4.905 * FRAC_PI_3.sin();
        let fwd = m.quasi_distance(&v(&[0.0, 0.0]), &v(&[1.0, 0.0])).unwrap();
        let bwd = m.quasi_distance(&v(&[1.0, 0.0]), &v(&[0.0, 0.0])).unwrap();
        assert_relative_eq!(fwd, 1.0 / (10.0 + c), epsilon = 1e-15);
        assert_relative_eq!(bwd, 1.0 / (10.0 - c), epsilon = 1e-15);
        assert!((fwd - 0.0701860).abs() < 5e-8);
        assert!((bwd - 0.173848).abs() < 5e-7);
        assert!(m.eval(&v(&[0.0, 0.0])).unwrap() == 0.0);
    }

    #[test]
    fn dimension_and_finiteness_errors() {
        let e = NormSpec::euclidean(3).unwrap();
        assert!(matches!(
            e.eval(&v(&[1.0, 2.0])),
            Err(GeomError::DimensionMismatch { expected: 3, found: 2 })
        ));
        assert!(matches!(e.eval(&v(&[1.0, f64::NAN, 0.0])), Err(GeomError::NonFinite(_))));
        let m = NormSpec::matsumoto_reference();
        assert!(m.eval(&v(&[1.0, 0.0, 0.0])).is_err());
    }

    #[test]
    fn constructor_validation() {
        assert!(NormSpec::pnorm(2, 1.5).is_err());
        assert!(NormSpec::matsumoto(10.0, 1.6, 9.81).is_err());
        assert!(NormSpec::matsumoto(5.0, 1.5, 9.81).is_err());
        // boundary of admissibility is accepted as written
        assert!(NormSpec::matsumoto(9.81, std::f64::consts::FRAC_PI_2 - 1e-12, 9.81).is_ok());
        assert!(NormSpec::randers(DMatrix::identity(2, 2), v(&[1.0, 0.0])).is_err());
        assert!(NormSpec::randers(DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 0.0, 1.0]), v(&[0.1, 0.0])).is_err());
        assert!(NormSpec::nonsmooth(3, 0.0).is_err());
    }

    #[test]
    fn tensor_of_zero_vector_is_an_error() {
        let e = NormSpec::euclidean(2).unwrap();
        assert_eq!(e.metric_tensor(&v(&[0.0, 0.0])), Err(GeomError::UndefinedTensor));
        let ns = NormSpec::nonsmooth(3, 1.0).unwrap();
        assert!(matches!(
            ns.metric_tensor(&v(&[1.0, 1.0, 0.0])),
            Err(GeomError::UnsupportedVariant(_))
        ));
    }

    #[test]
    fn euclidean_tensor_is_identity() {
        let e = NormSpec::euclidean(3).unwrap();
        let g = e.metric_tensor(&v(&[0.3, -2.0, 1.0])).unwrap();
        assert_eq!(g.matrix, DMatrix::identity(3, 3));
    }

    #[test]
    fn randers_tensor_example() {
        let r = NormSpec::randers(DMatrix::identity(2, 2), v(&[0.5, 0.0])).unwrap();
        let y = v(&[1.0, 0.0]);
        let g = r.metric_tensor(&y).unwrap();
        assert_relative_eq!(g.apply(&y, &y), 2.25, epsilon = 1e-14);
        let fd = r.fd_metric_tensor(&y).unwrap();
        assert_relative_eq!(fd.apply_quad(&y), 2.25, epsilon = 1e-9);
        assert_relative_eq!(g.matrix[(1, 1)], 1.5, epsilon = 1e-14);
    }

    trait Quad {
        fn apply_quad(&self, y: &Vector) -> f64;
    }
    impl Quad for DMatrix<f64> {
        fn apply_quad(&self, y: &Vector) -> f64 {
            y.dot(&(self * y))
        }
    }

    #[test]
    fn matsumoto_fd_tensor_satisfies_euler_identity() {
        let m = NormSpec::matsumoto_reference();
        for y in [v(&[1.0, 0.0]), v(&[-0.3, 0.7]), v(&[5.0, -2.0])] {
            let f = m.eval(&y).unwrap();
            let g = m.metric_tensor(&y).unwrap();
            assert!((g.apply(&y, &y) - f * f).abs() <= 1e-9 * (1.0 + f * f));
            assert!(g.matrix.clone().cholesky().is_some());
        }
    }

    #[test]
    fn fundamental_inequality_equality_and_examples() {
        let m = NormSpec::matsumoto_reference();
        let y = v(&[1.0, 0.0]);
        let res = m.fundamental_inequality_residual(&y, &y).unwrap();
        assert!(res.residual.abs() < 1e-15);
        let res = m.fundamental_inequality_residual(&y, &v(&[0.0, 1.0])).unwrap();
        assert!(res.residual > 0.0);
        let e = NormSpec::euclidean(2).unwrap();
        let r = e.fundamental_inequality_residual(&v(&[1.0, 2.0]), &v(&[-3.0, 0.5])).unwrap();
        let direct = 5f64.sqrt() * (9.25f64).sqrt() - (1.0f64 * -3.0 + 2.0 * 0.5).abs();
        assert_relative_eq!(r.residual, direct, epsilon = 1e-14);
        assert!(matches!(
            e.fundamental_inequality_residual(&v(&[0.0, 0.0]), &y),
            Err(GeomError::ZeroVector)
        ));
    }

    #[test]
    fn absolute_fundamental_inequality_fails_for_nonreversible_norms() {
        // g_y(y, -y) = -F(y)² while F(y)F(-y) < F(y)² whenever F(-y) < F(y).
        let r = NormSpec::randers(DMatrix::identity(2, 2), v(&[0.5, 0.0])).unwrap();
        let res = r.fundamental_inequality_residual(&v(&[1.0, 0.0]), &v(&[-1.0, 0.0])).unwrap();
        assert_relative_eq!(res.residual, 1.5 * 0.5 - 2.25, epsilon = 1e-14);
        assert!(res.one_sided_residual > 0.0);
    }

    #[test]
    fn reversibility() {
        assert!(NormSpec::euclidean(3).unwrap().is_reversible(1000));
        assert!(NormSpec::matsumoto(10.0, 0.0, 9.81).unwrap().is_reversible(1000));
        assert!(!NormSpec::matsumoto_reference().is_reversible(1000));
        assert!(NormSpec::pnorm(3, 4.0).unwrap().is_reversible(1000));
        assert!(NormSpec::nonsmooth(3, 1.0).unwrap().is_reversible(1000));
        assert!(!NormSpec::randers(DMatrix::identity(2, 2), v(&[0.2, 0.1])).unwrap().is_reversible(1000));
    }

    #[test]
    fn pnorm_tensor_degenerates_on_coordinate_axes() {
        // p > 2 makes g_y only semidefinite where some y_i = 0.
        let p = NormSpec::pnorm(2, 4.0).unwrap();
        let g = p.metric_tensor(&v(&[1.0, 0.0])).unwrap();
        assert_relative_eq!(g.matrix[(1, 1)], 0.0, epsilon = 1e-15);
        assert_relative_eq!(g.matrix[(0, 0)], 1.0, epsilon = 1e-15);
    }

    #[test]
    fn nonsmooth_directional_derivatives_are_one_sided() {
        let ns = NormSpec::nonsmooth(3, 1.0).unwrap();
        let p = [0.0, 1.0, 0.0];
        assert_eq!(ns.dir_derivative(&p, &[1.0, 0.0, 0.0]), 1.0);
        assert_eq!(ns.dir_derivative(&p, &[-1.0, 0.0, 0.0]), 1.0);
        let rg = ns.right_gradient(&v(&p)).unwrap();
        assert_eq!(rg, v(&[1.0, 1.0, 0.0]));
    }

    #[test]
    fn lipschitz_bound_dominates_samples() {
        let specs = [
            NormSpec::matsumoto_reference(),
            NormSpec::randers(DMatrix::from_row_slice(2, 2, &[2.0, 0.3, 0.3, 1.0]), v(&[0.4, -0.2])).unwrap(),
            NormSpec::pnorm(2, 6.0).unwrap(),
        ];
        for s in &specs {
            let l = s.lipschitz_bound();
            for k in 0..720 {
                let t = k as f64 * std::f64::consts::PI / 360.0;
                assert!(s.value(&[t.cos(), t.sin()]) <= l * (1.0 + 1e-12));
            }
        }
    }
}
