//! Exact-solution test problems: pick a target radius `r*`, evaluate its
//! shifted Gauss curvature analytically and build `f = F*(x) e^{β (r* − r)}`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{ChartPoint, GeometryError, GeometryFields, PointJet, SmallMat, REFERENCE_RADIUS};
use crate::grid::{GridError, GridSpec};
use crate::problem::{Phi, ProblemSpec, RhsFamily};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ManufactureError {
    #[error("target is not horo-convex: min lambda = {min_lambda:e} at node {node} of the probe grid")]
    NotHoroConvex { node: usize, min_lambda: f64 },
    #[error("target {0} needs a grid of dimension {1}")]
    Dimension(&'static str, usize),
    #[error("target radius must stay in [0.05, ∞), got min {0}")]
    Radius(f64),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Built-in analytic target radii.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TargetSurface {
    /// `r ≡ rho` on S¹ or S².
    Constant { rho: f64 },
    /// `rho + eps cos θ` on S².
    CosTheta { rho: f64, eps: f64 },
    /// `rho + eps Y` on S² with the real degree-two harmonic
    /// `m = 0: (3cos²θ − 1)/2`, `m = 1: sinθ cosθ cosφ`, `m = 2: sin²θ cos 2φ`.
    Harmonic2 { rho: f64, eps: f64, m: u32 },
    /// `rho + eps cos(kφ)` on S¹.
    CosPhi { rho: f64, eps: f64, k: u32 },
}

impl TargetSurface {
    pub fn name(&self) -> &'static str {
        match self {
            TargetSurface::Constant { .. } => "constant",
            TargetSurface::CosTheta { .. } => "cos_theta",
            TargetSurface::Harmonic2 { .. } => "harmonic2",
            TargetSurface::CosPhi { .. } => "cos_phi",
        }
    }

    fn check_dim(&self, dim: usize) -> Result<(), ManufactureError> {
        let needed = match self {
            TargetSurface::Constant { .. } => return Ok(()),
            TargetSurface::CosTheta { .. } | TargetSurface::Harmonic2 { .. } => 2,
            TargetSurface::CosPhi { .. } => 1,
        };
        if dim != needed {
            return Err(ManufactureError::Dimension(self.name(), needed));
        }
        if let TargetSurface::Harmonic2 { m, .. } = self {
            if *m > 2 {
                return Err(ManufactureError::Dimension("harmonic2 with m > 2", 2));
            }
        }
        Ok(())
    }

    pub fn mean_radius(&self) -> f64 {
        match *self {
            TargetSurface::Constant { rho }
            | TargetSurface::CosTheta { rho, .. }
            | TargetSurface::Harmonic2 { rho, .. }
            | TargetSurface::CosPhi { rho, .. } => rho,
        }
    }

    /// Value, coordinate partials `[∂_θ, ∂_φ]` and `[∂_θθ, ∂_θφ, ∂_φφ]` at `(θ, φ)`.
    /// On S¹ only the φ entries are used.
    fn partials<T: Real>(&self, theta: T, phi: T) -> (T, [T; 2], [T; 3]) {
        let z = T::zero();
        let (st, ct) = theta.sin_cos();
        let (s2t, c2t) = (T::two() * theta).sin_cos();
        match *self {
            TargetSurface::Constant { rho } => (T::lit(rho), [z; 2], [z; 3]),
            TargetSurface::CosTheta { rho, eps } => {
                let e = T::lit(eps);
                (T::lit(rho) + e * ct, [-e * st, z], [-e * ct, z, z])
            }
            TargetSurface::Harmonic2 { rho, eps, m } => {
                let e = T::lit(eps);
                let (y, dy, d2y) = match m {
                    0 => {
                        let three = T::lit(3.0);
                        ((three * ct * ct - T::one()) * T::half(), [-three * ct * st, z], [-three * c2t, z, z])
                    }
                    1 => {
                        let (sp, cp) = phi.sin_cos();
                        let h = T::half();
                        (
                            h * s2t * cp,
                            [c2t * cp, -h * s2t * sp],
                            [-T::two() * s2t * cp, -c2t * sp, -h * s2t * cp],
                        )
                    }
                    _ => {
                        let (sp, cp) = (T::two() * phi).sin_cos();
                        let two = T::two();
                        (
                            st * st * cp,
                            [s2t * cp, -two * st * st * sp],
                            [two * c2t * cp, -two * s2t * sp, -T::lit(4.0) * st * st * cp],
                        )
                    }
                };
                (T::lit(rho) + e * y, [e * dy[0], e * dy[1]], [e * d2y[0], e * d2y[1], e * d2y[2]])
            }
            TargetSurface::CosPhi { rho, eps, k } => {
                let (e, kk) = (T::lit(eps), T::from_usize_lossy(k as usize));
                let (sp, cp) = (kk * phi).sin_cos();
                (T::lit(rho) + e * cp, [z, -e * kk * sp], [z, z, -e * kk * kk * cp])
            }
        }
    }

    /// Radius at a chart point.
    pub fn radius<T: Real>(&self, x: &ChartPoint<T>) -> T {
        let (theta, phi) = split(x);
        self.partials(theta, phi).0
    }

    /// Exact jet (covariant derivatives with respect to the round metric).
    pub fn jet<T: Real>(&self, x: &ChartPoint<T>) -> Result<PointJet<T>, GeometryError> {
        let (theta, phi) = split(x);
        let (r, d, dd) = self.partials(theta, phi);
        let c = T::lit(REFERENCE_RADIUS);
        if x.dim() == 1 {
            return PointJet::from_r(r, [d[1], T::zero()], SmallMat::diag(1, &[dd[2], T::zero()]), c);
        }
        let (st, ct) = theta.sin_cos();
        let hess = SmallMat::from_rows(2, &[dd[0], dd[1] - ct / st * d[1], dd[1] - ct / st * d[1], dd[2] + st * ct * d[0]]);
        PointJet::from_r(r, d, hess, c)
    }

    /// Exact geometry at a chart point.
    pub fn fields<T: Real>(&self, x: &ChartPoint<T>) -> Result<GeometryFields<T>, GeometryError> {
        GeometryFields::evaluate(&self.jet(x)?, &x.round_metric())
    }
}

fn split<T: Real>(x: &ChartPoint<T>) -> (T, T) {
    match x.coords() {
        [phi] => (T::FRAC_PI_2(), *phi),
        [theta, phi] => (*theta, *phi),
        _ => unreachable!("chart points have one or two coordinates"),
    }
}

/// Parameters of a manufactured problem besides the target.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ManufactureOptions {
    pub beta: f64,
    /// Barrier radii are `min r* − margin` and `max r* + margin`.
    pub barrier_margin: f64,
    pub phi_k: f64,
}

impl Default for ManufactureOptions {
    fn default() -> Self {
        Self { beta: 2.0, barrier_margin: 0.25, phi_k: 1.0 }
    }
}

/// A generated problem together with its exact solution on the grid.
#[derive(Debug, Clone)]
pub struct Manufactured<T> {
    pub target: TargetSurface,
    pub options: ManufactureOptions,
    pub problem: ProblemSpec<T>,
    /// `r*` at every grid node.
    pub exact_radius: Vec<T>,
    /// Smallest shifted principal curvature seen on the 2× probe grid.
    pub probe_min_lambda: T,
}

/// Builds `f(x, r) = F*(x) e^{β (r*(x) − r)}` with `F* = Π λ_i[r*]`.
pub fn manufacture<T: Real>(
    target: TargetSurface,
    grid: GridSpec,
    options: ManufactureOptions,
) -> Result<Manufactured<T>, ManufactureError> {
    grid.validate()?;
    target.check_dim(grid.dim)?;
    let probe = grid.refined();
    let mut probe_min = T::infinity();
    let mut probe_node = 0;
    for node in 0..probe.node_count() {
        let l = target.fields(&probe.chart_point::<T>(node))?.min_lambda();
        if l < probe_min {
            probe_min = l;
            probe_node = node;
        }
    }
    if !(probe_min > T::zero()) {
        return Err(ManufactureError::NotHoroConvex { node: probe_node, min_lambda: probe_min.to_f64_lossy() });
    }
    let mut amplitude = Vec::with_capacity(grid.node_count());
    let mut center = Vec::with_capacity(grid.node_count());
    for node in 0..grid.node_count() {
        let x = grid.chart_point::<T>(node);
        let fields = target.fields(&x)?;
        amplitude.push(fields.shifted_gauss());
        center.push(target.radius(&x));
    }
    let lo = center.iter().fold(T::infinity(), |m, r| m.min(*r));
    let hi = center.iter().fold(T::neg_infinity(), |m, r| m.max(*r));
    let margin = T::lit(options.barrier_margin);
    let r1 = (lo - margin).max(T::lit(crate::problem::MIN_RADIUS));
    if !(lo > r1) {
        return Err(ManufactureError::Radius(lo.to_f64_lossy()));
    }
    let problem = ProblemSpec {
        dim: grid.dim,
        f: RhsFamily::Separable { grid, amplitude, center: center.clone(), beta: T::lit(options.beta) },
        r1,
        r2: hi + margin,
        phi: Phi::new(T::lit(target.mean_radius()), T::lit(options.phi_k)),
    };
    Ok(Manufactured { target, options, problem, exact_radius: center, probe_min_lambda: probe_min })
}
