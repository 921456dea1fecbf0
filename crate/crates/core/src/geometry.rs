//! Pointwise geometry of a radial graph `{(x, r(x))}` over the round sphere,
//! seen as a hypersurface of hyperbolic space with metric `dr² + sinh²r σ`.
//!
//! Everything here works on a single chart point. The unknown is carried in
//! the substituted variable `u = ∫_c^r ds / sinh s`, in which the shape
//! operator is affine in the covariant Hessian of `u`:
//!
//! ```text
//! v² = 1 + σ^{ij} u_i u_j
//! g_ij = sinh²r (u_i u_j + σ_ij)
//! g^ij = sinh⁻²r (σ^ij − u^i u^j / v²)
//! h_ij = (sinh r / v) (cosh r (u_i u_j + σ_ij) − u_;ij)
//! h^i_j = (cosh r δ^i_j − g̃^{ik} u_;kj) / (v sinh r),   g̃^ij = σ^ij − u^i u^j / v²
//! ```
//!
//! Dimensions 1 (curves in H²) and 2 (surfaces in H³) are supported; matrices
//! are stored in fixed 2×2 arrays with an active size.

use crate::scalar::{artanh, Real};
use thiserror::Error;

/// Reference radius of the `u` substitution. Any positive value works since
/// it only shifts `u` by a constant.
pub const REFERENCE_RADIUS: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("radius must be positive, got {0}")]
    NonPositiveRadius(f64),
    #[error("reference radius must be positive, got {0}")]
    NonPositiveReference(f64),
    #[error("u = {u} is outside the image of the substitution (limit {limit}); radius would be infinite")]
    OutsideImage { u: f64, limit: f64 },
    #[error("order k = {k} outside 1..={n}")]
    OrderOutOfRange { k: usize, n: usize },
    #[error("unsupported dimension {0}; only 1 and 2 are implemented")]
    UnsupportedDimension(usize),
    #[error("induced metric is not positive definite")]
    DegenerateMetric,
}

pub type GeometryResult<T> = Result<T, GeometryError>;

/// Square matrix of size 1 or 2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmallMat<T> {
    n: usize,
    a: [[T; 2]; 2],
}

impl<T: Real> SmallMat<T> {
    pub fn zeros(n: usize) -> Self {
        assert!(n == 1 || n == 2, "SmallMat supports n = 1, 2");
        Self { n, a: [[T::zero(); 2]; 2] }
    }

    pub fn identity(n: usize) -> Self {
        Self::diag(n, &[T::one(), T::one()])
    }

    pub fn diag(n: usize, d: &[T]) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.a[i][i] = d[i];
        }
        m
    }

    /// Builds from a row-major slice of length `n*n`.
    pub fn from_rows(n: usize, rows: &[T]) -> Self {
        assert_eq!(rows.len(), n * n);
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m.a[i][j] = rows[i * n + j];
            }
        }
        m
    }

    /// Symmetric outer product `x xᵀ`.
    pub fn outer(n: usize, x: &[T; 2], y: &[T; 2]) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m.a[i][j] = x[i] * y[j];
            }
        }
        m
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.a[i][j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, x: T) {
        self.a[i][j] = x;
    }

    pub fn scale(&self, s: T) -> Self {
        self.map(|x| x * s)
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        let mut m = *self;
        for i in 0..self.n {
            for j in 0..self.n {
                m.a[i][j] = f(self.a[i][j]);
            }
        }
        m
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut m = *self;
        for i in 0..self.n {
            for j in 0..self.n {
                m.a[i][j] = self.a[i][j] + o.a[i][j];
            }
        }
        m
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.scale(-T::one()))
    }

    pub fn mul(&self, o: &Self) -> Self {
        debug_assert_eq!(self.n, o.n);
        let mut m = Self::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                let mut s = T::zero();
                for k in 0..self.n {
                    s = s + self.a[i][k] * o.a[k][j];
                }
                m.a[i][j] = s;
            }
        }
        m
    }

    pub fn mul_vec(&self, x: &[T; 2]) -> [T; 2] {
        let mut y = [T::zero(); 2];
        for (i, yi) in y.iter_mut().enumerate().take(self.n) {
            for (k, xk) in x.iter().enumerate().take(self.n) {
                *yi = *yi + self.a[i][k] * *xk;
            }
        }
        y
    }

    pub fn transpose(&self) -> Self {
        let mut m = *self;
        for i in 0..self.n {
            for j in 0..self.n {
                m.a[i][j] = self.a[j][i];
            }
        }
        m
    }

    pub fn trace(&self) -> T {
        (0..self.n).fold(T::zero(), |s, i| s + self.a[i][i])
    }

    pub fn det(&self) -> T {
        match self.n {
            1 => self.a[0][0],
            _ => self.a[0][0] * self.a[1][1] - self.a[0][1] * self.a[1][0],
        }
    }

    pub fn inverse(&self) -> Option<Self> {
        let d = self.det();
        if d == T::zero() || !d.is_finite() {
            return None;
        }
        Some(match self.n {
            1 => Self::diag(1, &[T::one() / d, T::zero()]),
            _ => Self::from_rows(
                2,
                &[self.a[1][1] / d, -self.a[0][1] / d, -self.a[1][0] / d, self.a[0][0] / d],
            ),
        })
    }

    pub fn symmetrized(&self) -> Self {
        self.add(&self.transpose()).scale(T::half())
    }

    pub fn frobenius(&self) -> T {
        let mut s = T::zero();
        for i in 0..self.n {
            for j in 0..self.n {
                s = s + self.a[i][j] * self.a[i][j];
            }
        }
        s.sqrt()
    }

    /// Lower Cholesky factor of a symmetric positive definite matrix.
    pub fn cholesky(&self) -> Option<Self> {
        let l11 = self.a[0][0];
        if l11 <= T::zero() {
            return None;
        }
        let l11 = l11.sqrt();
        if self.n == 1 {
            return Some(Self::diag(1, &[l11, T::zero()]));
        }
        let l21 = self.a[1][0] / l11;
        let d = self.a[1][1] - l21 * l21;
        if d <= T::zero() {
            return None;
        }
        Some(Self::from_rows(2, &[l11, T::zero(), l21, d.sqrt()]))
    }

    /// Eigenvalues of a symmetric matrix, ascending.
    pub fn symmetric_eigenvalues(&self) -> [T; 2] {
        match self.n {
            1 => [self.a[0][0], T::zero()],
            _ => {
                let mean = T::half() * (self.a[0][0] + self.a[1][1]);
                let half_diff = T::half() * (self.a[0][0] - self.a[1][1]);
                let off = T::half() * (self.a[0][1] + self.a[1][0]);
                let rad = half_diff.hypot(off);
                [mean - rad, mean + rad]
            }
        }
    }
}

/// A point of the sphere chart: the angle `φ` on S¹, or `(θ, φ)` on S² with
/// colatitude `θ ∈ (0, π)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChartPoint<T> {
    dim: usize,
    coords: [T; 2],
}

impl<T: Real> ChartPoint<T> {
    pub fn circle(phi: T) -> Self {
        Self { dim: 1, coords: [phi, T::zero()] }
    }

    pub fn sphere(theta: T, phi: T) -> Self {
        debug_assert!(theta > T::zero() && theta < T::PI(), "colatitude must be interior");
        Self { dim: 2, coords: [theta, phi] }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn coords(&self) -> &[T] {
        &self.coords[..self.dim]
    }

    /// The round metric `σ` and its inverse at this point.
    pub fn round_metric(&self) -> RoundMetric<T> {
        match self.dim {
            1 => RoundMetric::flat(1),
            _ => {
                let s2 = self.coords[0].sin().powi(2);
                RoundMetric {
                    sigma: SmallMat::diag(2, &[T::one(), s2]),
                    sigma_inv: SmallMat::diag(2, &[T::one(), T::one() / s2]),
                }
            }
        }
    }

    /// Unit vector of the point in the ambient Euclidean space (`R²` or `R³`).
    pub fn unit_vector(&self) -> [T; 3] {
        match self.dim {
            1 => [self.coords[0].cos(), self.coords[0].sin(), T::zero()],
            _ => {
                let (st, ct) = self.coords[0].sin_cos();
                let (sp, cp) = self.coords[1].sin_cos();
                [st * cp, st * sp, ct]
            }
        }
    }
}

/// Round metric components at a chart point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoundMetric<T> {
    pub sigma: SmallMat<T>,
    pub sigma_inv: SmallMat<T>,
}

impl<T: Real> RoundMetric<T> {
    /// Identity metric, used on S¹ and in tests.
    pub fn flat(n: usize) -> Self {
        Self { sigma: SmallMat::identity(n), sigma_inv: SmallMat::identity(n) }
    }
}

/// Value and covariant derivatives of the radial function at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointJet<T> {
    pub r: T,
    pub u: T,
    /// `D_i u`, first covariant derivatives with respect to `σ`.
    pub du: [T; 2],
    /// `D_i D_j u`, covariant Hessian with respect to `σ` (Christoffel terms applied).
    pub d2u: SmallMat<T>,
}

impl<T: Real> PointJet<T> {
    /// Jet from `u`-data; the radius is recovered through the substitution.
    pub fn from_u(u: T, du: [T; 2], d2u: SmallMat<T>, c: T) -> GeometryResult<Self> {
        let r = r_from_u(u, c)?;
        Ok(Self { r, u, du, d2u: d2u.symmetrized() })
    }

    /// Jet from derivatives of `r`: `D_i u = D_i r / sinh r` and
    /// `D_iD_j u = D_iD_j r / sinh r − cosh r D_i r D_j r / sinh² r`.
    pub fn from_r(r: T, dr: [T; 2], d2r: SmallMat<T>, c: T) -> GeometryResult<Self> {
        let u = u_from_r(r, c)?;
        let n = d2r.dim();
        let (sh, ch) = (r.sinh(), r.cosh());
        let du = [dr[0] / sh, if n > 1 { dr[1] / sh } else { T::zero() }];
        let d2u = d2r.scale(T::one() / sh).sub(&SmallMat::outer(n, &dr, &dr).scale(ch / (sh * sh)));
        Ok(Self { r, u, du, d2u: d2u.symmetrized() })
    }

    /// Round sphere `r ≡ ρ`.
    pub fn round(n: usize, rho: T, c: T) -> GeometryResult<Self> {
        Self::from_r(rho, [T::zero(); 2], SmallMat::zeros(n), c)
    }

    pub fn dim(&self) -> usize {
        self.d2u.dim()
    }

    /// `D_i r = sinh r · D_i u`.
    pub fn dr(&self) -> [T; 2] {
        let sh = self.r.sinh();
        [self.du[0] * sh, self.du[1] * sh]
    }
}

/// `u(r) = ∫_c^r ds / sinh s = ln tanh(r/2) − ln tanh(c/2)`.
pub fn u_from_r<T: Real>(r: T, c: T) -> GeometryResult<T> {
    if !(r > T::zero()) {
        return Err(GeometryError::NonPositiveRadius(r.to_f64_lossy()));
    }
    if !(c > T::zero()) {
        return Err(GeometryError::NonPositiveReference(c.to_f64_lossy()));
    }
    Ok((r * T::half()).tanh().ln() - (c * T::half()).tanh().ln())
}

/// Inverse of [`u_from_r`]: `r = 2 artanh(tanh(c/2) e^u)`.
pub fn r_from_u<T: Real>(u: T, c: T) -> GeometryResult<T> {
    if !(c > T::zero()) {
        return Err(GeometryError::NonPositiveReference(c.to_f64_lossy()));
    }
    let y = (c * T::half()).tanh() * u.exp();
    if !(y < T::one()) || !y.is_finite() {
        let limit = -(c * T::half()).tanh().ln();
        return Err(GeometryError::OutsideImage { u: u.to_f64_lossy(), limit: limit.to_f64_lossy() });
    }
    Ok(T::two() * artanh(y))
}

/// `v = sqrt(1 + σ^{ij} D_i u D_j u)`.
pub fn slope_factor<T: Real>(du: &[T; 2], sigma_inv: &SmallMat<T>) -> T {
    let raised = sigma_inv.mul_vec(du);
    let n = sigma_inv.dim();
    let sq = (0..n).fold(T::zero(), |s, i| s + raised[i] * du[i]);
    (T::one() + sq).sqrt()
}

/// Induced metric `g`, its inverse and `g̃^{ij} = σ^{ij} − D^iu D^ju / v²`.
pub fn metric_fields<T: Real>(
    jet: &PointJet<T>,
    round: &RoundMetric<T>,
) -> GeometryResult<(SmallMat<T>, SmallMat<T>, SmallMat<T>)> {
    check_radius(jet.r)?;
    let n = jet.dim();
    let v = slope_factor(&jet.du, &round.sigma_inv);
    let sh2 = jet.r.sinh().powi(2);
    let raised = round.sigma_inv.mul_vec(&jet.du);
    let g = SmallMat::outer(n, &jet.du, &jet.du).add(&round.sigma).scale(sh2);
    let g_tilde_inv = round.sigma_inv.sub(&SmallMat::outer(n, &raised, &raised).scale(T::one() / (v * v)));
    let g_inv = g_tilde_inv.scale(T::one() / sh2);
    Ok((g, g_inv, g_tilde_inv))
}

/// Second fundamental form and its derived spectra.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShapeOperator<T> {
    /// `h_ij`.
    pub h: SmallMat<T>,
    /// Mixed Weingarten matrix `h^i_j`.
    pub w: SmallMat<T>,
    /// Shifted Weingarten matrix `W − I`.
    pub s: SmallMat<T>,
    /// Principal curvatures, ascending.
    pub kappa: [T; 2],
    /// Shifted principal curvatures `κ − 1`, ascending.
    pub lambda: [T; 2],
}

/// `h_ij`, `h^i_j`, `W − I` and the principal curvatures at a jet.
///
/// Eigenvalues come from the symmetric matrix `L⁻¹ h L⁻ᵀ` with `g = L Lᵀ`,
/// which is similar to `g⁻¹ h`.
pub fn shape_operator<T: Real>(jet: &PointJet<T>, round: &RoundMetric<T>) -> GeometryResult<ShapeOperator<T>> {
    let (g, _g_inv, g_tilde_inv) = metric_fields(jet, round)?;
    shape_from_metric(jet, round, &g, &g_tilde_inv)
}

fn shape_from_metric<T: Real>(
    jet: &PointJet<T>,
    round: &RoundMetric<T>,
    g: &SmallMat<T>,
    g_tilde_inv: &SmallMat<T>,
) -> GeometryResult<ShapeOperator<T>> {
    let n = jet.dim();
    let v = slope_factor(&jet.du, &round.sigma_inv);
    let (sh, ch) = (jet.r.sinh(), jet.r.cosh());
    let first = SmallMat::outer(n, &jet.du, &jet.du).add(&round.sigma);
    let h = first.scale(ch).sub(&jet.d2u).scale(sh / v);
    let w = SmallMat::identity(n)
        .scale(ch)
        .sub(&g_tilde_inv.mul(&jet.d2u))
        .scale(T::one() / (v * sh));
    let s = w.sub(&SmallMat::identity(n));

    let l = g.cholesky().ok_or(GeometryError::DegenerateMetric)?;
    let l_inv = l.inverse().ok_or(GeometryError::DegenerateMetric)?;
    let sym = l_inv.mul(&h).mul(&l_inv.transpose()).symmetrized();
    let kappa = sym.symmetric_eigenvalues();
    let mut lambda = [kappa[0] - T::one(), kappa[1] - T::one()];
    if n == 1 {
        lambda[1] = T::zero();
    }
    Ok(ShapeOperator { h, w, s, kappa, lambda })
}

/// Product of the shifted principal curvatures, sign preserved.
pub fn shifted_gauss<T: Real>(lambda: &[T]) -> T {
    lambda.iter().fold(T::one(), |p, l| p * *l)
}

/// Elementary symmetric polynomial `σ_k` of `values`, `σ_0 = 1`.
pub fn elementary_symmetric<T: Real>(values: &[T], k: usize) -> T {
    // e[j] after processing a prefix holds σ_j of that prefix
    let mut e = vec![T::zero(); k + 1];
    e[0] = T::one();
    for &x in values {
        for j in (1..=k).rev() {
            e[j] = e[j] + e[j - 1] * x;
        }
    }
    e[k]
}

fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `σ_k(κ − 1)` through the expansion in the unshifted curvatures:
/// `Σ_{i=0}^{k} (−1)^{k−i} C(n−i, k−i) σ_i(κ)`.
pub fn shifted_sigma_k<T: Real>(kappa: &[T], k: usize) -> GeometryResult<T> {
    let n = kappa.len();
    if k == 0 || k > n {
        return Err(GeometryError::OrderOutOfRange { k, n });
    }
    let mut total = T::zero();
    for i in 0..=k {
        let sign = if (k - i) % 2 == 0 { T::one() } else { -T::one() };
        total = total + sign * T::lit(binomial(n - i, k - i)) * elementary_symmetric(kappa, i);
    }
    Ok(total)
}

/// Support function `⟨V, ν⟩ = sinh r / v` for `V = sinh r ∂_r`, and the
/// primitive `Λ(r) = ∫_0^r sinh s ds = cosh r − 1`.
pub fn support_and_primitive<T: Real>(jet: &PointJet<T>, round: &RoundMetric<T>) -> (T, T) {
    let v = slope_factor(&jet.du, &round.sigma_inv);
    (jet.r.sinh() / v, primitive(jet.r))
}

#[inline]
pub fn primitive<T: Real>(r: T) -> T {
    // cosh r − 1 = 2 sinh²(r/2), no cancellation near 0
    T::two() * (r * T::half()).sinh().powi(2)
}

fn check_radius<T: Real>(r: T) -> GeometryResult<()> {
    if r > T::zero() {
        Ok(())
    } else {
        Err(GeometryError::NonPositiveRadius(r.to_f64_lossy()))
    }
}

/// All pointwise quantities at one jet.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometryFields<T> {
    pub v: T,
    pub g: SmallMat<T>,
    pub g_inv: SmallMat<T>,
    pub g_tilde_inv: SmallMat<T>,
    pub h: SmallMat<T>,
    pub w: SmallMat<T>,
    pub s: SmallMat<T>,
    pub lambda: [T; 2],
    pub kappa: [T; 2],
    /// Trace of the Weingarten matrix.
    pub mean_curvature: T,
    pub support: T,
    pub primitive: T,
}

impl<T: Real> GeometryFields<T> {
    pub fn evaluate(jet: &PointJet<T>, round: &RoundMetric<T>) -> GeometryResult<Self> {
        let n = jet.dim();
        if n != round.sigma.dim() {
            return Err(GeometryError::UnsupportedDimension(n));
        }
        let (g, g_inv, g_tilde_inv) = metric_fields(jet, round)?;
        let shape = shape_from_metric(jet, round, &g, &g_tilde_inv)?;
        let (support, primitive) = support_and_primitive(jet, round);
        Ok(Self {
            v: slope_factor(&jet.du, &round.sigma_inv),
            g,
            g_inv,
            g_tilde_inv,
            h: shape.h,
            w: shape.w,
            s: shape.s,
            lambda: shape.lambda,
            kappa: shape.kappa,
            mean_curvature: shape.w.trace(),
            support,
            primitive,
        })
    }

    pub fn dim(&self) -> usize {
        self.g.dim()
    }

    pub fn lambda(&self) -> &[T] {
        &self.lambda[..self.dim()]
    }

    pub fn kappa(&self) -> &[T] {
        &self.kappa[..self.dim()]
    }

    pub fn min_lambda(&self) -> T {
        self.lambda[0]
    }

    /// All principal curvatures exceed one.
    pub fn is_horo_convex(&self) -> bool {
        self.min_lambda() > T::zero()
    }

    pub fn shifted_gauss(&self) -> T {
        shifted_gauss(self.lambda())
    }

    /// `|A|² = tr(W²)`.
    pub fn norm_second_fundamental_sq(&self) -> T {
        self.w.mul(&self.w).trace()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::coth;
    use proptest::prelude::*;

    const C: f64 = REFERENCE_RADIUS;

    fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        let h = (b - a) / n as f64;
        let mut s = f(a) + f(b);
        for i in 1..n {
            s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        s * h / 3.0
    }

    fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
        let whole = simpson(f, a, b, 2);
        let m = 0.5 * (a + b);
        let split = simpson(f, a, m, 2) + simpson(f, m, b, 2);
        if (split - whole).abs() < 15.0 * tol {
            split + (split - whole) / 15.0
        } else {
            adaptive_simpson(f, a, m, tol / 2.0) + adaptive_simpson(f, m, b, tol / 2.0)
        }
    }

    #[test]
    fn u_at_reference_is_zero() {
        assert_eq!(u_from_r(C, C).unwrap(), 0.0);
        assert_eq!(r_from_u(0.0, 1.0).unwrap(), 1.0);
    }

    #[test]
    fn u_matches_quadrature() {
        for &c in &[0.3, 1.0, 1.7] {
            let exact = u_from_r(2.0 * c, c).unwrap();
            let quad = adaptive_simpson(&|s: f64| 1.0 / s.sinh(), c, 2.0 * c, 1e-14);
            assert!((exact - quad).abs() < 1e-12, "c={c}: {exact} vs {quad}");
        }
    }

    #[test]
    fn substitution_roundtrip() {
        for &r in &[0.5, 1.0, 2.0] {
            let back: f64 = r_from_u(u_from_r(r, 1.0).unwrap(), 1.0).unwrap();
            assert!((back - r).abs() < 1e-14);
        }
    }

    #[test]
    fn r_from_u_matches_bisection() {
        let target = -1.0;
        let (mut lo, mut hi) = (1e-6, 1.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if u_from_r(mid, 1.0).unwrap() < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let r: f64 = r_from_u(target, 1.0).unwrap();
        assert!((r - 0.5 * (lo + hi)).abs() < 1e-13);
    }

    #[test]
    fn substitution_domain_errors() {
        let limit = -(0.5f64).tanh().ln();
        assert!(matches!(r_from_u(limit, 1.0), Err(GeometryError::OutsideImage { .. })));
        assert!(matches!(r_from_u(limit + 1.0, 1.0), Err(GeometryError::OutsideImage { .. })));
        assert!(r_from_u(limit - 1e-3, 1.0).unwrap() > 5.0);
        assert!(matches!(u_from_r(0.0, 1.0), Err(GeometryError::NonPositiveRadius(_))));
        assert!(matches!(u_from_r(1.0, -1.0), Err(GeometryError::NonPositiveReference(_))));
    }

    #[test]
    fn u_derivative_is_inverse_sinh() {
        for &r in &[0.2, 1.0, 3.0] {
            let h = 1e-5;
            let fd = (u_from_r(r + h, C).unwrap() - u_from_r(r - h, C).unwrap()) / (2.0 * h);
            assert!((fd * r.sinh() - 1.0).abs() < 1e-8, "r={r}: {fd}");
        }
    }

    #[test]
    fn slope_factor_cases() {
        let flat1 = RoundMetric::<f64>::flat(1);
        assert_eq!(slope_factor(&[0.0, 0.0], &flat1.sigma_inv), 1.0);
        assert!((slope_factor(&[1.0, 0.0], &flat1.sigma_inv) - 2f64.sqrt()).abs() < 1e-15);
        let p = ChartPoint::sphere(0.7, 2.0).round_metric();
        let du = [0.3, -0.45];
        let direct = (1.0 + du[0] * du[0] + du[1] * du[1] / 0.7f64.sin().powi(2)).sqrt();
        assert!((slope_factor(&du, &p.sigma_inv) - direct).abs() < 1e-14);
    }

    #[test]
    fn round_metric_fields() {
        let rho = 1.3;
        let p = ChartPoint::sphere(0.4, 1.0).round_metric();
        let jet = PointJet::round(2, rho, C).unwrap();
        let (g, g_inv, gt) = metric_fields(&jet, &p).unwrap();
        let s2 = rho.sinh().powi(2);
        for i in 0..2 {
            for j in 0..2 {
                assert!((g.get(i, j) - s2 * p.sigma.get(i, j)).abs() < 1e-13);
                assert!((gt.get(i, j) - p.sigma_inv.get(i, j)).abs() < 1e-13);
            }
        }
        let id = g.mul(&g_inv);
        assert!(id.sub(&SmallMat::identity(2)).frobenius() < 1e-12);
    }

    #[test]
    fn metric_matches_explicit_assembly() {
        let theta: f64 = 1.1;
        let p = ChartPoint::sphere(theta, 0.3).round_metric();
        let (ut, up) = (0.21, -0.37);
        let d2u = SmallMat::from_rows(2, &[0.1, 0.02, 0.02, -0.3]);
        let jet = PointJet::from_u(-0.2, [ut, up], d2u, C).unwrap();
        let (g, _, _) = metric_fields(&jet, &p).unwrap();
        let s2 = jet.r.sinh().powi(2);
        let expect = [
            s2 * (ut * ut + 1.0),
            s2 * ut * up,
            s2 * ut * up,
            s2 * (up * up + theta.sin().powi(2)),
        ];
        for (k, e) in expect.iter().enumerate() {
            assert!((g.get(k / 2, k % 2) - e).abs() < 1e-14);
        }
    }

    #[test]
    fn geodesic_sphere_is_umbilic() {
        // coth ρ = 2
        let rho = 0.5 * 3f64.ln();
        for n in 1..=2 {
            let round = if n == 1 { RoundMetric::flat(1) } else { ChartPoint::sphere(0.9, 0.1).round_metric() };
            let jet = PointJet::round(n, rho, C).unwrap();
            let geo = GeometryFields::evaluate(&jet, &round).unwrap();
            for i in 0..n {
                assert!((geo.kappa[i] - 2.0).abs() < 1e-13);
                assert!((geo.lambda[i] - 1.0).abs() < 1e-13);
                for j in 0..n {
                    let expect = if i == j { 2.0 } else { 0.0 };
                    assert!((geo.w.get(i, j) - expect).abs() < 1e-13);
                }
            }
            assert!((geo.shifted_gauss() - 1.0).abs() < 1e-12);
            assert!((geo.mean_curvature - 2.0 * n as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn umbilic_works_in_single_precision() {
        let rho = 0.8f32;
        let jet = PointJet::<f32>::round(2, rho, 1.0).unwrap();
        let geo = GeometryFields::evaluate(&jet, &ChartPoint::sphere(1.0f32, 0.0).round_metric()).unwrap();
        let k = coth(rho);
        assert!((geo.kappa[0] - k).abs() < 1e-5 && (geo.kappa[1] - k).abs() < 1e-5);
    }

    /// Radius of the geodesic sphere of radius `big_r` centred at distance `d`
    /// from the origin on the polar axis, in direction `θ`:
    /// `cosh R = cosh r cosh d − sinh r sinh d cos θ`, solved for `r`.
    fn offcentre_radius(theta: f64, big_r: f64, d: f64) -> f64 {
        let (a, b) = (d.cosh(), -d.sinh() * theta.cos());
        // a cosh r + b sinh r = cosh R  with a > |b|
        let amp = (a * a - b * b).sqrt();
        let shift = (b / a).atanh();
        (big_r.cosh() / amp).acosh() - shift
    }

    #[test]
    fn offcentre_geodesic_sphere_has_constant_curvature() {
        // an isometric image of a geodesic sphere has κ ≡ coth R everywhere
        let (big_r, d) = (1.4, 0.5);
        let fd = |f: &dyn Fn(f64) -> f64, x: f64, k: usize| -> f64 {
            let h = 1e-3;
            match k {
                1 => (-f(x + 2.0 * h) + 8.0 * f(x + h) - 8.0 * f(x - h) + f(x - 2.0 * h)) / (12.0 * h),
                _ => (-f(x + 2.0 * h) + 16.0 * f(x + h) - 30.0 * f(x) + 16.0 * f(x - h) - f(x - 2.0 * h)) / (12.0 * h * h),
            }
        };
        let r_of = |t: f64| offcentre_radius(t, big_r, d);
        for &theta in &[0.3, 1.0, 1.9, 2.8] {
            let r = r_of(theta);
            let rt = fd(&r_of, theta, 1);
            let rtt = fd(&r_of, theta, 2);
            let round = ChartPoint::sphere(theta, 0.0).round_metric();
            // axisymmetric: D_θθ r = r_θθ, D_φφ r = sinθ cosθ r_θ
            let d2r = SmallMat::from_rows(2, &[rtt, 0.0, 0.0, theta.sin() * theta.cos() * rt]);
            let jet = PointJet::from_r(r, [rt, 0.0], d2r, C).unwrap();
            let geo = GeometryFields::evaluate(&jet, &round).unwrap();
            let k = coth(big_r);
            assert!((geo.kappa[0] - k).abs() < 1e-7, "θ={theta}: {:?}", geo.kappa);
            assert!((geo.kappa[1] - k).abs() < 1e-7, "θ={theta}: {:?}", geo.kappa);
        }
    }

    #[test]
    fn offcentre_circle_in_plane() {
        let (big_r, d) = (0.9, 0.4);
        let r_of = |p: f64| offcentre_radius(p, big_r, d);
        for &phi in &[0.0, 0.8, 2.0, 3.1] {
            let h = 1e-3;
            let r = r_of(phi);
            let rp = (-r_of(phi + 2.0 * h) + 8.0 * r_of(phi + h) - 8.0 * r_of(phi - h) + r_of(phi - 2.0 * h)) / (12.0 * h);
            let rpp = (-r_of(phi + 2.0 * h) + 16.0 * r_of(phi + h) - 30.0 * r + 16.0 * r_of(phi - h)
                - r_of(phi - 2.0 * h))
                / (12.0 * h * h);
            let jet = PointJet::from_r(r, [rp, 0.0], SmallMat::diag(1, &[rpp, 0.0]), C).unwrap();
            let geo = GeometryFields::evaluate(&jet, &RoundMetric::flat(1)).unwrap();
            assert!((geo.kappa[0] - coth(big_r)).abs() < 1e-7);
        }
    }

    /// Principal curvatures of the surface of revolution `r(θ)` computed in
    /// the hyperboloid model of H³ inside Minkowski space, at longitude 0.
    fn revolution_curvatures(r: f64, rt: f64, rtt: f64, theta: f64) -> (f64, f64) {
        let (sh, ch) = (r.sinh(), r.cosh());
        let (st, ct) = theta.sin_cos();
        // embedding restricted to the plane φ = 0: (cosh r, sinh r sinθ, ·, sinh r cosθ)
        let a = sh * st;
        let x_t = [sh * rt, ch * rt * st + sh * ct, ch * rt * ct - sh * st];
        let x_tt = [
            ch * rt * rt + sh * rtt,
            sh * rt * rt * st + ch * rtt * st + 2.0 * ch * rt * ct - sh * st,
            sh * rt * rt * ct + ch * rtt * ct - 2.0 * ch * rt * st - sh * ct,
        ];
        let x = [ch, sh * st, sh * ct];
        let lor = |p: &[f64; 3], q: &[f64; 3]| -p[0] * q[0] + p[1] * q[1] + p[2] * q[2];
        // Lorentz-orthogonal to x and x_t: J (x × x_t)
        let cr = [
            x[1] * x_t[2] - x[2] * x_t[1],
            x[2] * x_t[0] - x[0] * x_t[2],
            x[0] * x_t[1] - x[1] * x_t[0],
        ];
        let mut nu = [-cr[0], cr[1], cr[2]];
        let len = lor(&nu, &nu).sqrt();
        nu.iter_mut().for_each(|c| *c /= len);
        let radial = [sh, ch * st, ch * ct];
        if lor(&nu, &radial) < 0.0 {
            nu.iter_mut().for_each(|c| *c = -*c);
        }
        let k_mer = -lor(&x_tt, &nu) / lor(&x_t, &x_t);
        // X_φφ = (0, −A, 0, 0) in the (e0, e1, e3) slice
        let x_pp = [0.0, -a, 0.0];
        let k_par = -lor(&x_pp, &nu) / (a * a);
        (k_mer, k_par)
    }

    #[test]
    fn surface_of_revolution_matches_ambient_model() {
        let eps = 0.1;
        for &theta in &[0.4, std::f64::consts::FRAC_PI_2, 2.5] {
            let r = 1.0 + eps * theta.cos();
            let rt = -eps * theta.sin();
            let rtt = -eps * theta.cos();
            let d2r = SmallMat::from_rows(2, &[rtt, 0.0, 0.0, theta.sin() * theta.cos() * rt]);
            let jet = PointJet::from_r(r, [rt, 0.0], d2r, C).unwrap();
            let geo = GeometryFields::evaluate(&jet, &ChartPoint::sphere(theta, 0.0).round_metric()).unwrap();
            let (a, b) = revolution_curvatures(r, rt, rtt, theta);
            let expect = [a.min(b), a.max(b)];
            assert!((geo.kappa[0] - expect[0]).abs() < 1e-12, "{:?} vs {:?}", geo.kappa, expect);
            assert!((geo.kappa[1] - expect[1]).abs() < 1e-12);
        }
        // sanity of the oracle itself on a round sphere
        let (a, b) = revolution_curvatures(0.8, 0.0, 0.0, 1.0);
        assert!((a - coth(0.8)).abs() < 1e-13 && (b - coth(0.8)).abs() < 1e-13);
    }

    #[test]
    fn shifted_gauss_cases() {
        assert_eq!(shifted_gauss(&[1.0, 1.0]), 1.0);
        let rho: f64 = 0.7;
        let l = coth(rho) - 1.0;
        assert!((shifted_gauss(&[l, l]) - l * l).abs() < 1e-15);
        assert_eq!(shifted_gauss(&[-0.5, 2.0]), -1.0);
    }

    #[test]
    fn shifted_sigma_k_cases() {
        assert!((shifted_sigma_k(&[2.0f64, 2.0], 2).unwrap() - 1.0).abs() < 1e-15);
        let (a, b, c) = (1.3f64, 2.2, 4.0);
        assert!((shifted_sigma_k(&[a, b, c], 1).unwrap() - (a + b + c - 3.0)).abs() < 1e-14);
        assert!(matches!(shifted_sigma_k(&[1.0, 2.0], 3), Err(GeometryError::OrderOutOfRange { k: 3, n: 2 })));
        assert!(shifted_sigma_k(&[1.0, 2.0], 0).is_err());
    }

    #[test]
    fn support_and_primitive_cases() {
        let round = RoundMetric::<f64>::flat(1);
        let jet = PointJet::round(1, 1e-300, C).unwrap_or(PointJet {
            r: 1e-300,
            u: 0.0,
            du: [0.0; 2],
            d2u: SmallMat::zeros(1),
        });
        assert_eq!(support_and_primitive(&jet, &round).1, 0.0);
        assert_eq!(primitive(0.0f64), 0.0);
        let jet = PointJet::round(1, 1.7, C).unwrap();
        let (s, lam) = support_and_primitive(&jet, &round);
        assert!((s - 1.7f64.sinh()).abs() < 1e-14);
        assert!((lam - (1.7f64.cosh() - 1.0)).abs() < 1e-14);
    }

    fn arb_jet2() -> impl Strategy<Value = (PointJet<f64>, RoundMetric<f64>)> {
        (0.2f64..2.5, -1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0, 0.2f64..2.9).prop_map(
            |(r, a, b, p, q, s, theta)| {
                let d2u = SmallMat::from_rows(2, &[p, q, q, s]);
                let jet = PointJet::from_r(r, [0.0; 2], SmallMat::zeros(2), C).unwrap();
                let jet = PointJet { du: [a, b], d2u, ..jet };
                (jet, ChartPoint::sphere(theta, 0.0).round_metric())
            },
        )
    }

    proptest! {
        #[test]
        fn kappa_minus_lambda_is_one((jet, round) in arb_jet2()) {
            let geo = GeometryFields::evaluate(&jet, &round).unwrap();
            for i in 0..2 {
                prop_assert!((geo.kappa[i] - geo.lambda[i] - 1.0).abs() < 1e-12);
            }
            prop_assert!(geo.lambda[0] <= geo.lambda[1]);
            prop_assert_eq!(geo.is_horo_convex(), geo.kappa[0] > 1.0);
        }

        #[test]
        fn metric_consistency((jet, round) in arb_jet2()) {
            let geo = GeometryFields::evaluate(&jet, &round).unwrap();
            let id = geo.g.mul(&geo.g_inv);
            prop_assert!(id.sub(&SmallMat::identity(2)).frobenius() < 1e-12 * geo.g.frobenius().max(1.0) * geo.g_inv.frobenius().max(1.0));
            // h_ij = g_ik W^k_j is symmetric and reproduces h
            let h = geo.g.mul(&geo.w);
            let scale = geo.h.frobenius().max(1.0);
            prop_assert!((h.get(0, 1) - h.get(1, 0)).abs() < 1e-12 * scale);
            prop_assert!(h.sub(&geo.h).frobenius() < 1e-12 * scale);
            // eigenvalues of W from trace/determinant agree with the congruence route
            prop_assert!((geo.w.trace() - geo.kappa[0] - geo.kappa[1]).abs() < 1e-10 * scale);
            prop_assert!((geo.w.det() - geo.kappa[0] * geo.kappa[1]).abs() < 1e-10 * scale * scale);
            prop_assert!((geo.support * geo.v - jet.r.sinh()).abs() < 1e-12 * jet.r.sinh());
            let direct_v = (1.0 + jet.du[0].powi(2) + jet.du[1].powi(2) * round.sigma_inv.get(1, 1)).sqrt();
            prop_assert!((geo.v - direct_v).abs() < 1e-12 * direct_v);
        }

        #[test]
        fn conversion_matches_direct_shifted_sigma(kappa in proptest::collection::vec(-3.0f64..5.0, 1..7)) {
            let shifted: Vec<f64> = kappa.iter().map(|k| k - 1.0).collect();
            for k in 1..=kappa.len() {
                let via = shifted_sigma_k(&kappa, k).unwrap();
                let direct = elementary_symmetric(&shifted, k);
                let scale = elementary_symmetric(&kappa.iter().map(|x| x.abs() + 1.0).collect::<Vec<_>>(), k);
                prop_assert!((via - direct).abs() <= 1e-12 * scale, "k={} {} vs {}", k, via, direct);
            }
            prop_assert!((shifted_gauss(&shifted) - elementary_symmetric(&shifted, kappa.len())).abs() < 1e-10);
        }
    }
}
