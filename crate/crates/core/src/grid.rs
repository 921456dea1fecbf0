//! Tensor grids on S¹ and S², finite-difference covariant derivatives,
//! transfer between resolutions and the shifted sphere Laplacian.
//!
//! S² nodes sit at `θ_j = π (j + ½) / N_θ`, `φ_k = 2π k / N_φ`, row-major with
//! `θ` outer. No node lies on a pole. Latitude stencils reaching past a pole
//! read the node on the opposite meridian: `(θ_{-1-j}, φ) ≡ (θ_j, φ + π)`.
//! In the extended chart `∂_θ` flips sign across a pole while `∂_φ` does not,
//! so a tensor component with `p` latitude indices picks up `(−1)^p`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{ChartPoint, GeometryError, PointJet, SmallMat};
use crate::linalg::DenseLu;
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GridError {
    #[error("invalid grid: {0}")]
    Config(String),
    #[error("grid function has {got} values, grid has {expected} nodes")]
    Length { expected: usize, got: usize },
    #[error("non-finite value at node {0}")]
    NonFinite(usize),
    #[error("node {node}: {source}")]
    Geometry {
        node: usize,
        #[source]
        source: GeometryError,
    },
}

pub type GridResult<T> = Result<T, GridError>;

/// Accuracy order of the centred difference stencils.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum FdOrder {
    Second,
    #[default]
    Fourth,
}

impl FdOrder {
    pub fn order(self) -> usize {
        match self {
            FdOrder::Second => 2,
            FdOrder::Fourth => 4,
        }
    }

}

/// Sign a field picks up across a pole.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    /// Parity of a tensor component with `theta_indices` latitude slots.
    pub fn of_component(theta_indices: usize) -> Self {
        if theta_indices % 2 == 0 {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    fn sign<T: Real>(self) -> T {
        match self {
            Parity::Even => T::one(),
            Parity::Odd => -T::one(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridSpec {
    /// Sphere dimension, 1 or 2.
    pub dim: usize,
    /// Latitude rows; 1 on S¹.
    pub n_theta: usize,
    /// Nodes per row.
    pub n_phi: usize,
    #[serde(default)]
    pub order: FdOrder,
}

impl GridSpec {
    pub fn circle(n: usize) -> Self {
        Self { dim: 1, n_theta: 1, n_phi: n, order: FdOrder::Fourth }
    }

    pub fn sphere(n_theta: usize, n_phi: usize) -> Self {
        Self { dim: 2, n_theta, n_phi, order: FdOrder::Fourth }
    }

    pub fn with_order(mut self, order: FdOrder) -> Self {
        self.order = order;
        self
    }

    pub fn validate(&self) -> GridResult<()> {
        match self.dim {
            1 => {
                if self.n_theta != 1 {
                    return Err(GridError::Config(format!("S¹ grid needs n_theta = 1, got {}", self.n_theta)));
                }
                if self.n_phi < 8 || self.n_phi % 2 != 0 {
                    return Err(GridError::Config(format!("S¹ needs an even N ≥ 8, got {}", self.n_phi)));
                }
            }
            2 => {
                if self.n_theta < 9 {
                    return Err(GridError::Config(format!("S² needs N_θ ≥ 9, got {}", self.n_theta)));
                }
                if self.n_phi < 16 || self.n_phi % 2 != 0 {
                    return Err(GridError::Config(format!("S² needs an even N_φ ≥ 16, got {}", self.n_phi)));
                }
            }
            d => return Err(GridError::Config(format!("dimension must be 1 or 2, got {d}"))),
        }
        Ok(())
    }

    pub fn node_count(&self) -> usize {
        self.n_theta * self.n_phi
    }

    #[inline]
    pub fn index(&self, j: usize, k: usize) -> usize {
        j * self.n_phi + k
    }

    pub fn h_theta<T: Real>(&self) -> T {
        T::PI() / T::from_usize_lossy(self.n_theta)
    }

    pub fn h_phi<T: Real>(&self) -> T {
        T::two() * T::PI() / T::from_usize_lossy(self.n_phi)
    }

    /// Largest coordinate spacing.
    pub fn max_spacing<T: Real>(&self) -> T {
        if self.dim == 1 {
            self.h_phi()
        } else {
            self.h_theta::<T>().max(self.h_phi())
        }
    }

    pub fn theta<T: Real>(&self, j: usize) -> T {
        if self.dim == 1 {
            T::FRAC_PI_2()
        } else {
            self.h_theta::<T>() * (T::from_usize_lossy(j) + T::half())
        }
    }

    pub fn phi<T: Real>(&self, k: usize) -> T {
        self.h_phi::<T>() * T::from_usize_lossy(k)
    }

    pub fn chart_point<T: Real>(&self, node: usize) -> ChartPoint<T> {
        let (j, k) = (node / self.n_phi, node % self.n_phi);
        match self.dim {
            1 => ChartPoint::circle(self.phi(k)),
            _ => ChartPoint::sphere(self.theta(j), self.phi(k)),
        }
    }

    /// Same layout at twice the resolution in every direction.
    pub fn refined(&self) -> Self {
        let n_theta = if self.dim == 1 { 1 } else { 2 * self.n_theta };
        Self { n_theta, n_phi: 2 * self.n_phi, ..*self }
    }

    /// Node `(j, k)` with `j` allowed one stencil width past either pole;
    /// returns the real node and the reflection flag.
    #[inline]
    fn resolve(&self, j: isize, k: usize) -> (usize, bool) {
        let nt = self.n_theta as isize;
        let half = self.n_phi / 2;
        if j < 0 {
            ((-1 - j) as usize * self.n_phi + (k + half) % self.n_phi, true)
        } else if j >= nt {
            ((2 * nt - 1 - j) as usize * self.n_phi + (k + half) % self.n_phi, true)
        } else {
            (j as usize * self.n_phi + k, false)
        }
    }
}

/// Samples of a scalar on every node of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction<T> {
    spec: GridSpec,
    values: Vec<T>,
}

impl<T: Real> GridFunction<T> {
    pub fn new(spec: GridSpec, values: Vec<T>) -> GridResult<Self> {
        spec.validate()?;
        if values.len() != spec.node_count() {
            return Err(GridError::Length { expected: spec.node_count(), got: values.len() });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(GridError::NonFinite(i));
        }
        Ok(Self { spec, values })
    }

    pub fn constant(spec: GridSpec, value: T) -> GridResult<Self> {
        Self::new(spec, vec![value; spec.node_count()])
    }

    /// Samples `f(θ, φ)` (θ = π/2 on S¹).
    pub fn from_fn(spec: GridSpec, f: impl Fn(T, T) -> T) -> GridResult<Self> {
        let values = (0..spec.node_count())
            .map(|i| f(spec.theta(i / spec.n_phi), spec.phi(i % spec.n_phi)))
            .collect();
        Self::new(spec, values)
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> GridResult<Self> {
        Self::new(self.spec, self.values.iter().map(|v| f(*v)).collect())
    }
}

/// `max |u|` and the first node attaining it.
pub fn sup_norm_and_argmax<T: Real>(values: &[T]) -> (T, usize) {
    let mut best = (T::zero(), 0);
    for (i, v) in values.iter().enumerate() {
        if v.abs() > best.0 {
            best = (v.abs(), i);
        }
    }
    best
}

/// Difference operators on a grid.
#[derive(Debug, Clone, Copy)]
pub struct Stencils {
    spec: GridSpec,
}

impl Stencils {
    pub fn new(spec: GridSpec) -> GridResult<Self> {
        spec.validate()?;
        Ok(Self { spec })
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    fn first_weights<T: Real>(order: FdOrder) -> &'static [(isize, f64)] {
        match order {
            FdOrder::Second => &[(-1, -0.5), (1, 0.5)],
            FdOrder::Fourth => &[(-2, 1.0 / 12.0), (-1, -8.0 / 12.0), (1, 8.0 / 12.0), (2, -1.0 / 12.0)],
        }
    }

    fn second_weights(order: FdOrder) -> &'static [(isize, f64)] {
        match order {
            FdOrder::Second => &[(-1, 1.0), (1, 1.0)],
            FdOrder::Fourth => &[(-2, -1.0 / 12.0), (-1, 16.0 / 12.0), (1, 16.0 / 12.0), (2, -1.0 / 12.0)],
        }
    }

    /// Periodic longitude derivative of order 1 or 2.
    pub fn d_phi<T: Real>(&self, f: &[T], deriv: usize) -> Vec<T> {
        let s = &self.spec;
        let n = s.n_phi as isize;
        let h: T = s.h_phi();
        let (w, scale) = match deriv {
            1 => (Self::first_weights::<T>(s.order), T::one() / h),
            2 => (Self::second_weights(s.order), T::one() / (h * h)),
            _ => panic!("only first and second derivatives"),
        };
        let mut out = vec![T::zero(); f.len()];
        for j in 0..s.n_theta {
            let row = &f[j * s.n_phi..(j + 1) * s.n_phi];
            for k in 0..s.n_phi {
                let f0 = row[k];
                // differences against the centre keep round-off proportional to the variation
                let acc = w.iter().fold(T::zero(), |acc, &(o, c)| {
                    let kk = (k as isize + o).rem_euclid(n) as usize;
                    acc + T::lit(c) * (row[kk] - f0)
                });
                out[j * s.n_phi + k] = acc * scale;
            }
        }
        out
    }

    /// Latitude derivative of order 1 or 2 with cross-pole closure. Only
    /// meaningful on S².
    pub fn d_theta<T: Real>(&self, f: &[T], deriv: usize, parity: Parity) -> Vec<T> {
        let s = &self.spec;
        assert_eq!(s.dim, 2, "latitude derivatives exist on S² only");
        let h: T = s.h_theta();
        let (w, scale) = match deriv {
            1 => (Self::first_weights::<T>(s.order), T::one() / h),
            2 => (Self::second_weights(s.order), T::one() / (h * h)),
            _ => panic!("only first and second derivatives"),
        };
        let sign: T = parity.sign();
        let mut out = vec![T::zero(); f.len()];
        for j in 0..s.n_theta {
            for k in 0..s.n_phi {
                let f0 = f[j * s.n_phi + k];
                let acc = w.iter().fold(T::zero(), |acc, &(o, c)| {
                    let (idx, reflected) = s.resolve(j as isize + o, k);
                    let val = if reflected { sign * f[idx] } else { f[idx] };
                    acc + T::lit(c) * (val - f0)
                });
                out[j * s.n_phi + k] = acc * scale;
            }
        }
        out
    }

    /// Coordinate partial derivatives of a field with the given pole parity.
    pub fn partials<T: Real>(&self, f: &[T], parity: Parity) -> Partials<T> {
        let f_phi = self.d_phi(f, 1);
        let f_phiphi = self.d_phi(f, 2);
        if self.spec.dim == 1 {
            return Partials { first: [f_phi, Vec::new()], second: [Vec::new(), Vec::new(), f_phiphi] };
        }
        let f_theta = self.d_theta(f, 1, parity);
        let f_thetatheta = self.d_theta(f, 2, parity);
        // ∂_φ keeps the parity of f, so the mixed derivative uses the same sign
        let f_thetaphi = self.d_theta(&f_phi, 1, parity);
        Partials { first: [f_theta, f_phi], second: [f_thetatheta, f_thetaphi, f_phiphi] }
    }

    /// Value, covariant gradient and covariant Hessian (round metric) of a
    /// scalar field at every node.
    pub fn covariant_derivatives<T: Real>(&self, f: &[T]) -> Vec<([T; 2], SmallMat<T>)> {
        let s = &self.spec;
        let p = self.partials(f, Parity::Even);
        (0..s.node_count())
            .map(|i| match s.dim {
                1 => ([p.first[0][i], T::zero()], SmallMat::diag(1, &[p.second[2][i], T::zero()])),
                _ => {
                    let theta: T = s.theta(i / s.n_phi);
                    let (st, ct) = theta.sin_cos();
                    let (ft, fp) = (p.first[0][i], p.first[1][i]);
                    // Γ^θ_φφ = −sinθ cosθ, Γ^φ_θφ = cotθ
                    let dtt = p.second[0][i];
                    let dtp = p.second[1][i] - ct / st * fp;
                    let dpp = p.second[2][i] + st * ct * ft;
                    ([ft, fp], SmallMat::from_rows(2, &[dtt, dtp, dtp, dpp]))
                }
            })
            .collect()
    }

    /// Per-node jets `(r, u, Du, D²u)` of the substituted unknown `u`.
    pub fn covariant_jet<T: Real>(&self, u: &GridFunction<T>, c: T) -> GridResult<Vec<PointJet<T>>> {
        if u.spec() != &self.spec {
            return Err(GridError::Config("grid function does not match the stencil grid".into()));
        }
        let derivs = self.covariant_derivatives(u.values());
        u.values()
            .iter()
            .zip(derivs)
            .enumerate()
            .map(|(i, (&ui, (du, d2u)))| {
                PointJet::from_u(ui, du, d2u, c).map_err(|source| GridError::Geometry { node: i, source })
            })
            .collect()
    }

    /// Discrete `Δ_σ f`, built from the same stencils as the jets.
    pub fn laplacian<T: Real>(&self, f: &[T]) -> Vec<T> {
        self.covariant_derivatives(f)
            .into_iter()
            .enumerate()
            .map(|(i, (_, hess))| match self.spec.dim {
                1 => hess.get(0, 0),
                _ => {
                    let st = self.spec.theta::<T>(i / self.spec.n_phi).sin();
                    hess.get(0, 0) + hess.get(1, 1) / (st * st)
                }
            })
            .collect()
    }

    /// Midpoint-rule integral against the round area element.
    pub fn integrate<T: Real>(&self, f: &[T]) -> T {
        let s = &self.spec;
        let hp: T = s.h_phi();
        match s.dim {
            1 => f.iter().fold(T::zero(), |a, v| a + *v) * hp,
            _ => {
                let ht: T = s.h_theta();
                (0..s.node_count()).fold(T::zero(), |a, i| a + f[i] * s.theta::<T>(i / s.n_phi).sin()) * ht * hp
            }
        }
    }
}

/// Coordinate partials of a grid field. On S¹ only `first[0]` (∂_φ) and
/// `second[2]` (∂_φφ) are populated. On S²: `first = [∂_θ, ∂_φ]`,
/// `second = [∂_θθ, ∂_θφ, ∂_φφ]`.
#[derive(Debug, Clone)]
pub struct Partials<T> {
    pub first: [Vec<T>; 2],
    pub second: [Vec<T>; 3],
}

/// Real discrete Fourier transform of length `n` (even), by table lookup.
#[derive(Debug, Clone)]
pub struct RealDft<T> {
    n: usize,
    cos: Vec<T>,
    sin: Vec<T>,
}

impl<T: Real> RealDft<T> {
    pub fn new(n: usize) -> Self {
        let step = T::two() * T::PI() / T::from_usize_lossy(n);
        let cos = (0..n).map(|i| (step * T::from_usize_lossy(i)).cos()).collect();
        let sin = (0..n).map(|i| (step * T::from_usize_lossy(i)).sin()).collect();
        Self { n, cos, sin }
    }

    pub fn modes(&self) -> usize {
        self.n / 2 + 1
    }

    /// `a_m = Σ f_k cos(m φ_k)`, `b_m = Σ f_k sin(m φ_k)` for `m = 0..=n/2`.
    pub fn forward(&self, f: &[T]) -> (Vec<T>, Vec<T>) {
        let mut a = vec![T::zero(); self.modes()];
        let mut b = vec![T::zero(); self.modes()];
        for m in 0..self.modes() {
            let (mut sa, mut sb) = (T::zero(), T::zero());
            for (k, fk) in f.iter().enumerate() {
                let idx = (m * k) % self.n;
                sa = sa + *fk * self.cos[idx];
                sb = sb + *fk * self.sin[idx];
            }
            a[m] = sa;
            b[m] = sb;
        }
        (a, b)
    }

    /// Inverse of [`RealDft::forward`].
    pub fn inverse(&self, a: &[T], b: &[T]) -> Vec<T> {
        let nyq = self.n / 2;
        let inv_n = T::one() / T::from_usize_lossy(self.n);
        (0..self.n)
            .map(|k| {
                let mut s = a[0];
                for m in 1..nyq {
                    let idx = (m * k) % self.n;
                    s = s + T::two() * (a[m] * self.cos[idx] + b[m] * self.sin[idx]);
                }
                s = s + a[nyq] * self.cos[(nyq * k) % self.n];
                s * inv_n
            })
            .collect()
    }

    /// Trigonometric interpolant evaluated at arbitrary angle `phi`, with the
    /// Nyquist mode split symmetrically.
    pub fn evaluate(&self, a: &[T], b: &[T], phi: T) -> T {
        let nyq = self.n / 2;
        let inv_n = T::one() / T::from_usize_lossy(self.n);
        let mut s = a[0];
        for m in 1..nyq {
            let x = phi * T::from_usize_lossy(m);
            s = s + T::two() * (a[m] * x.cos() + b[m] * x.sin());
        }
        s = s + a[nyq] * (phi * T::from_usize_lossy(nyq)).cos();
        s * inv_n
    }
}

fn lagrange_weights<T: Real>(nodes: &[T], x: T) -> Vec<T> {
    nodes
        .iter()
        .enumerate()
        .map(|(i, xi)| {
            nodes
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .fold(T::one(), |w, (_, xj)| w * (x - *xj) / (*xi - *xj))
        })
        .collect()
}

/// Number of coefficients [`band_limited`] consumes on a grid of dimension `dim`.
pub fn band_limited_len(dim: usize) -> usize {
    if dim == 1 {
        8
    } else {
        20
    }
}

/// Smooth perturbation built from `coeffs`, scaled to sup norm `amplitude`.
///
/// On S¹ the coefficients weight `cos kφ, sin kφ` for `k = 1..4`; on S² they
/// weight the monomials of degree at most three in the ambient coordinates,
/// which are smooth across the poles.
pub fn band_limited<T: Real>(spec: &GridSpec, coeffs: &[T], amplitude: T) -> Vec<T> {
    assert_eq!(coeffs.len(), band_limited_len(spec.dim), "coefficient count");
    let mut values: Vec<T> = (0..spec.node_count())
        .map(|node| {
            let x = spec.chart_point::<T>(node);
            if spec.dim == 1 {
                let phi = x.coords()[0];
                (1..=4).fold(T::zero(), |acc, k| {
                    let (s, c) = (T::from_usize_lossy(k) * phi).sin_cos();
                    acc + coeffs[2 * (k - 1)] * c + coeffs[2 * k - 1] * s
                })
            } else {
                let p = x.unit_vector();
                let mut acc = T::zero();
                let mut i = 0;
                for a in 0..=3i32 {
                    for b in 0..=(3 - a) {
                        for c in 0..=(3 - a - b) {
                            acc = acc + coeffs[i] * p[0].powi(a) * p[1].powi(b) * p[2].powi(c);
                            i += 1;
                        }
                    }
                }
                acc
            }
        })
        .collect();
    let (sup, _) = sup_norm_and_argmax(&values);
    if sup > T::zero() {
        let scale = amplitude / sup;
        values.iter_mut().for_each(|v| *v = *v * scale);
    }
    values
}

/// Doubles the resolution: trigonometric interpolation in longitude and
/// six-point Lagrange interpolation in latitude across the poles.
pub fn refine<T: Real>(u: &GridFunction<T>) -> GridFunction<T> {
    let s = *u.spec();
    let fine = s.refined();
    let dft = RealDft::new(s.n_phi);
    // longitude pass on the coarse rows
    let mut rows = vec![T::zero(); s.n_theta * fine.n_phi];
    for j in 0..s.n_theta {
        let (a, b) = dft.forward(&u.values()[j * s.n_phi..(j + 1) * s.n_phi]);
        for k in 0..fine.n_phi {
            rows[j * fine.n_phi + k] = dft.evaluate(&a, &b, fine.phi(k));
        }
    }
    if s.dim == 1 {
        return GridFunction::new(fine, rows).expect("refined values finite");
    }
    let mid = GridSpec { n_theta: s.n_theta, ..fine };
    let offsets: Vec<T> = (-3..=3).map(|o: i32| T::lit(o as f64)).collect();
    let w_plus = lagrange_weights(&offsets[1..], T::lit(0.25)); // nodes -2..=3
    let w_minus = lagrange_weights(&offsets[..6], T::lit(-0.25)); // nodes -3..=2
    let mut out = vec![T::zero(); fine.node_count()];
    for j in 0..s.n_theta {
        for k in 0..fine.n_phi {
            let sample = |o: isize| {
                let (idx, _) = mid.resolve(j as isize + o, k);
                rows[idx]
            };
            let plus = (-2..=3).zip(&w_plus).fold(T::zero(), |acc, (o, w)| acc + *w * sample(o));
            let minus = (-3..=2).zip(&w_minus).fold(T::zero(), |acc, (o, w)| acc + *w * sample(o));
            out[fine.index(2 * j, k)] = minus;
            out[fine.index(2 * j + 1, k)] = plus;
        }
    }
    GridFunction::new(fine, out).expect("refined values finite")
}

/// Inverse transfer of [`refine`]: every other longitude, latitude midpoints
/// by six-point interpolation.
pub fn restrict<T: Real>(u: &GridFunction<T>) -> GridResult<GridFunction<T>> {
    let f = *u.spec();
    if f.n_phi % 4 != 0 || (f.dim == 2 && f.n_theta % 2 != 0) {
        return Err(GridError::Config("restriction needs even halvable resolution".into()));
    }
    let coarse = GridSpec {
        n_theta: if f.dim == 1 { 1 } else { f.n_theta / 2 },
        n_phi: f.n_phi / 2,
        ..f
    };
    coarse.validate()?;
    if f.dim == 1 {
        return GridFunction::new(coarse, u.values().iter().step_by(2).copied().collect());
    }
    let offsets: Vec<T> = (-2..=3).map(|o: i32| T::lit(o as f64)).collect();
    let w = lagrange_weights(&offsets, T::half());
    let mut out = vec![T::zero(); coarse.node_count()];
    for j in 0..coarse.n_theta {
        for k in 0..coarse.n_phi {
            let kf = 2 * k;
            out[coarse.index(j, k)] = (-2..=3).zip(&w).fold(T::zero(), |acc, (o, wt)| {
                let (idx, _) = f.resolve(2 * j as isize + o, kf);
                acc + *wt * u.values()[idx]
            });
        }
    }
    GridFunction::new(coarse, out)
}

/// Exact inverse of the discrete operator `α I − Δ_σ` on a grid, by Fourier
/// decomposition in longitude and a dense solve per mode in latitude.
#[derive(Debug, Clone)]
pub struct ShiftedLaplacian<T> {
    spec: GridSpec,
    alpha: T,
    dft: RealDft<T>,
    /// One factorization per longitude mode (S²) or the scalar symbols (S¹).
    modes: Vec<ModeSolver<T>>,
}

#[derive(Debug, Clone)]
enum ModeSolver<T> {
    Scalar(T),
    Dense(DenseLu<T>),
}

impl<T: Real> ShiftedLaplacian<T> {
    pub fn new(spec: GridSpec, alpha: T) -> GridResult<Self> {
        spec.validate()?;
        let dft = RealDft::new(spec.n_phi);
        let hp: T = spec.h_phi();
        // eigenvalue of the periodic second-difference stencil on mode m
        let symbol = |m: usize| -> T {
            let x = hp * T::from_usize_lossy(m);
            match spec.order {
                FdOrder::Second => (T::two() * x.cos() - T::two()) / (hp * hp),
                FdOrder::Fourth => {
                    (-T::two() * (T::two() * x).cos() + T::lit(32.0) * x.cos() - T::lit(30.0)) / (T::lit(12.0) * hp * hp)
                }
            }
        };
        let mut modes = Vec::with_capacity(dft.modes());
        for m in 0..dft.modes() {
            let mu = symbol(m);
            if spec.dim == 1 {
                modes.push(ModeSolver::Scalar(alpha - mu));
                continue;
            }
            let nt = spec.n_theta;
            let ht: T = spec.h_theta();
            let sign = if m % 2 == 0 { T::one() } else { -T::one() };
            let mut a = vec![T::zero(); nt * nt];
            let w1 = Stencils::first_weights::<T>(spec.order);
            let w2 = Stencils::second_weights(spec.order);
            for j in 0..nt {
                let theta: T = spec.theta(j);
                let (st, ct) = theta.sin_cos();
                let cot = ct / st;
                // centre coefficients of the difference-form stencils
                let c2: T = w2.iter().fold(T::zero(), |s, &(_, c)| s - T::lit(c)) / (ht * ht);
                a[j * nt + j] = alpha - c2 - mu / (st * st);
                let mut add = |o: isize, coef: T| {
                    let jj = j as isize + o;
                    let (col, s) = if jj < 0 {
                        ((-1 - jj) as usize, sign)
                    } else if jj >= nt as isize {
                        ((2 * nt as isize - 1 - jj) as usize, sign)
                    } else {
                        (jj as usize, T::one())
                    };
                    a[j * nt + col] = a[j * nt + col] - s * coef;
                };
                for &(o, c) in w2 {
                    add(o, T::lit(c) / (ht * ht));
                }
                for &(o, c) in w1 {
                    add(o, cot * T::lit(c) / ht);
                }
            }
            let lu = DenseLu::factor(nt, a).ok_or_else(|| GridError::Config("singular shifted Laplacian".into()))?;
            modes.push(ModeSolver::Dense(lu));
        }
        Ok(Self { spec, alpha, dft, modes })
    }

    pub fn alpha(&self) -> T {
        self.alpha
    }

    /// `(α − Δ)⁻¹ rhs`.
    pub fn solve(&self, rhs: &[T]) -> Vec<T> {
        let s = &self.spec;
        let nm = self.dft.modes();
        let mut a = vec![T::zero(); s.n_theta * nm];
        let mut b = vec![T::zero(); s.n_theta * nm];
        for j in 0..s.n_theta {
            let (aj, bj) = self.dft.forward(&rhs[j * s.n_phi..(j + 1) * s.n_phi]);
            a[j * nm..(j + 1) * nm].copy_from_slice(&aj);
            b[j * nm..(j + 1) * nm].copy_from_slice(&bj);
        }
        for (m, solver) in self.modes.iter().enumerate() {
            match solver {
                ModeSolver::Scalar(d) => {
                    a[m] = a[m] / *d;
                    b[m] = b[m] / *d;
                }
                ModeSolver::Dense(lu) => {
                    let col_a: Vec<T> = (0..s.n_theta).map(|j| a[j * nm + m]).collect();
                    let col_b: Vec<T> = (0..s.n_theta).map(|j| b[j * nm + m]).collect();
                    let (xa, xb) = (lu.solve(&col_a), lu.solve(&col_b));
                    for j in 0..s.n_theta {
                        a[j * nm + m] = xa[j];
                        b[j * nm + m] = xb[j];
                    }
                }
            }
        }
        let mut out = Vec::with_capacity(rhs.len());
        for j in 0..s.n_theta {
            out.extend(self.dft.inverse(&a[j * nm..(j + 1) * nm], &b[j * nm..(j + 1) * nm]));
        }
        out
    }
}
