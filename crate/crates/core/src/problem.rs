//! Problem data: the prescribed right-hand side, barrier radii and the
//! homotopy weight.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grid::GridSpec;
use crate::scalar::{coth_minus_one, Real};

/// Smallest admissible inner barrier radius.
pub const MIN_RADIUS: f64 = 0.05;

/// Minimum number of radii in a tabulated right-hand side.
pub const MIN_TABLE_RADII: usize = 16;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProblemError {
    #[error("r1 = {r1} must be at least {MIN_RADIUS}")]
    InnerRadiusTooSmall { r1: f64 },
    #[error("barrier radii must satisfy r1 < r2, got r1 = {r1}, r2 = {r2}")]
    BarrierOrder { r1: f64, r2: f64 },
    #[error("phi.r0 = {r0} must lie strictly between r1 = {r1} and r2 = {r2}")]
    PhiRoot { r0: f64, r1: f64, r2: f64 },
    #[error("phi.k = {0} must be positive")]
    PhiSteepness(f64),
    #[error("f is not positive at node {node}, r = {r}: f = {value}")]
    NonPositive { node: usize, r: f64, value: f64 },
    #[error("problem is tied to a {expected:?} grid but was used with {got:?}")]
    GridMismatch { expected: GridSpec, got: GridSpec },
    #[error("problem dimension {0} is not 1 or 2")]
    Dimension(usize),
    #[error("tabulated f: {0}")]
    Table(String),
    #[error("invalid parameter {name}: {reason}")]
    Parameter { name: &'static str, reason: String },
}

pub type ProblemResult<T> = Result<T, ProblemError>;

/// Homotopy weight `φ(r) = exp(k (r0 − r))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Phi<T> {
    pub r0: T,
    pub k: T,
}

impl<T: Real> Phi<T> {
    pub fn new(r0: T, k: T) -> Self {
        Self { r0, k }
    }

    pub fn value(&self, r: T) -> T {
        (self.k * (self.r0 - r)).exp()
    }

    pub fn derivative(&self, r: T) -> T {
        -self.k * self.value(r)
    }
}

/// The prescribed function `f(x, r)` of `Π λ_i = f`.
#[derive(Debug, Clone, PartialEq)]
pub enum RhsFamily<T> {
    /// `((coth r − 1) e^{rate (r0 − r)})^power`.
    RadialExponential { r0: T, rate: T, power: T },
    /// `f ≡ value`.
    Constant { value: T },
    /// `f = F(x) e^{β (c(x) − r)}` with per-node amplitude and centre.
    Separable { grid: GridSpec, amplitude: Vec<T>, center: Vec<T>, beta: T },
    /// Per-node samples on a radius lattice, interpolated by local cubics in `r`.
    /// `values[i][node]` belongs to `radii[i]`.
    Tabulated { grid: GridSpec, radii: Vec<T>, values: Vec<Vec<T>> },
}

impl<T: Real> RhsFamily<T> {
    /// The grid a node-indexed family is bound to.
    pub fn grid(&self) -> Option<&GridSpec> {
        match self {
            RhsFamily::Separable { grid, .. } | RhsFamily::Tabulated { grid, .. } => Some(grid),
            _ => None,
        }
    }

    pub fn eval(&self, node: usize, r: T) -> T {
        match self {
            RhsFamily::RadialExponential { r0, rate, power } => {
                (coth_minus_one(r) * (*rate * (*r0 - r)).exp()).powf(*power)
            }
            RhsFamily::Constant { value } => *value,
            RhsFamily::Separable { amplitude, center, beta, .. } => {
                amplitude[node] * (*beta * (center[node] - r)).exp()
            }
            RhsFamily::Tabulated { radii, values, .. } => {
                let i = stencil_start(radii, r);
                let xs = &radii[i..i + 4];
                (0..4).fold(T::zero(), |acc, a| {
                    let w = (0..4)
                        .filter(|&b| b != a)
                        .fold(T::one(), |w, b| w * (r - xs[b]) / (xs[a] - xs[b]));
                    acc + w * values[i + a][node]
                })
            }
        }
    }

    /// Samples the family onto a radius lattice.
    pub fn tabulate(&self, grid: GridSpec, radii: Vec<T>) -> Self {
        let values = radii
            .iter()
            .map(|&r| (0..grid.node_count()).map(|node| self.eval(node, r)).collect())
            .collect();
        RhsFamily::Tabulated { grid, radii, values }
    }

    fn validate_shape(&self) -> ProblemResult<()> {
        match self {
            RhsFamily::RadialExponential { rate, power, .. } => {
                if !(power.is_finite() && *power > T::zero()) {
                    return Err(ProblemError::Parameter { name: "power", reason: "must be positive".into() });
                }
                if !rate.is_finite() {
                    return Err(ProblemError::Parameter { name: "rate", reason: "must be finite".into() });
                }
            }
            RhsFamily::Constant { value } => {
                if !(*value > T::zero() && value.is_finite()) {
                    return Err(ProblemError::NonPositive { node: 0, r: f64::NAN, value: value.to_f64_lossy() });
                }
            }
            RhsFamily::Separable { grid, amplitude, center, beta } => {
                let n = grid.node_count();
                if amplitude.len() != n || center.len() != n {
                    return Err(ProblemError::Table(format!(
                        "separable data has {} / {} entries, grid has {n} nodes",
                        amplitude.len(),
                        center.len()
                    )));
                }
                if !beta.is_finite() {
                    return Err(ProblemError::Parameter { name: "beta", reason: "must be finite".into() });
                }
                if let Some(node) = amplitude.iter().position(|a| !(*a > T::zero() && a.is_finite())) {
                    return Err(ProblemError::NonPositive { node, r: f64::NAN, value: amplitude[node].to_f64_lossy() });
                }
            }
            RhsFamily::Tabulated { grid, radii, values } => {
                if radii.len() < MIN_TABLE_RADII {
                    return Err(ProblemError::Table(format!(
                        "need at least {MIN_TABLE_RADII} radii, got {}",
                        radii.len()
                    )));
                }
                if radii.windows(2).any(|w| !(w[1] > w[0])) {
                    return Err(ProblemError::Table("radii must be strictly increasing".into()));
                }
                if values.len() != radii.len() || values.iter().any(|row| row.len() != grid.node_count()) {
                    return Err(ProblemError::Table("value table does not match radii × nodes".into()));
                }
            }
        }
        Ok(())
    }
}

/// First index of the four-point stencil used at `r`.
fn stencil_start<T: Real>(radii: &[T], r: T) -> usize {
    let above = radii.partition_point(|x| *x <= r);
    above.saturating_sub(2).min(radii.len() - 4)
}

/// A complete problem: `Π λ_i = f(x, r)` with barrier radii and homotopy weight.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec<T> {
    pub dim: usize,
    pub f: RhsFamily<T>,
    pub r1: T,
    pub r2: T,
    pub phi: Phi<T>,
}

impl<T: Real> ProblemSpec<T> {
    /// Checks the parameter constraints and positivity of `f` on a margin
    /// around the barrier annulus, sampled on `grid`.
    pub fn validate(&self, grid: &GridSpec) -> ProblemResult<()> {
        if self.dim != 1 && self.dim != 2 {
            return Err(ProblemError::Dimension(self.dim));
        }
        if self.dim != grid.dim {
            return Err(ProblemError::GridMismatch { expected: GridSpec { dim: self.dim, ..*grid }, got: *grid });
        }
        let (r1, r2) = (self.r1.to_f64_lossy(), self.r2.to_f64_lossy());
        if !(r1 >= MIN_RADIUS) {
            return Err(ProblemError::InnerRadiusTooSmall { r1 });
        }
        if !(r1 < r2) {
            return Err(ProblemError::BarrierOrder { r1, r2 });
        }
        let r0 = self.phi.r0.to_f64_lossy();
        if !(r1 < r0 && r0 < r2) {
            return Err(ProblemError::PhiRoot { r0, r1, r2 });
        }
        if !(self.phi.k > T::zero()) {
            return Err(ProblemError::PhiSteepness(self.phi.k.to_f64_lossy()));
        }
        if let Some(g) = self.f.grid() {
            if g != grid {
                return Err(ProblemError::GridMismatch { expected: *g, got: *grid });
            }
        }
        self.f.validate_shape()?;
        if let RhsFamily::Tabulated { radii, .. } = &self.f {
            let (lo, hi) = (T::lit(0.8) * self.r1, T::lit(1.2) * self.r2);
            if radii[0] > lo || radii[radii.len() - 1] < hi {
                return Err(ProblemError::Table(format!(
                    "radii must span [{}, {}], got [{}, {}]",
                    lo,
                    hi,
                    radii[0],
                    radii[radii.len() - 1]
                )));
            }
        }
        for r in self.sample_radii() {
            for node in 0..grid.node_count() {
                let value = self.f.eval(node, r);
                if !(value > T::zero() && value.is_finite()) {
                    return Err(ProblemError::NonPositive { node, r: r.to_f64_lossy(), value: value.to_f64_lossy() });
                }
            }
        }
        Ok(())
    }

    /// Radii on `[0.8 r1, 1.2 r2]` (clamped below at the minimum radius).
    pub fn sample_radii(&self) -> Vec<T> {
        let lo = (T::lit(0.8) * self.r1).max(T::lit(MIN_RADIUS));
        let hi = T::lit(1.2) * self.r2;
        let n = MIN_TABLE_RADII;
        (0..n)
            .map(|i| lo + (hi - lo) * T::from_usize_lossy(i) / T::from_usize_lossy(n - 1))
            .collect()
    }

    /// `f^{1/n}`, the right-hand side of the normalized equation at `t = 1`.
    pub fn f_root(&self, node: usize, r: T) -> T {
        let f = self.f.eval(node, r);
        if self.dim == 1 {
            f
        } else {
            f.sqrt()
        }
    }

    /// Right-hand side of the homotopy `t f^{1/n} + (1 − t) φ(r)(coth r − 1)`.
    pub fn homotopy_rhs(&self, node: usize, r: T, t: T) -> T {
        let start = self.phi.value(r) * coth_minus_one(r);
        if t == T::zero() {
            return start;
        }
        t * self.f_root(node, r) + (T::one() - t) * start
    }
}

/// Outcome of sampling the barrier hypotheses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BarrierReport {
    /// `f^{1/n} ≥ coth r − 1` at the inner radii.
    pub inner_holds: bool,
    /// `f^{1/n} ≤ coth r − 1` at the outer radii.
    pub outer_holds: bool,
    pub radii: Vec<f64>,
    /// Worst signed margin at the inner radii (negative means violated).
    pub inner_margin: f64,
    pub inner_worst_node: usize,
    pub outer_margin: f64,
    pub outer_worst_node: usize,
}

impl BarrierReport {
    pub fn holds(&self) -> bool {
        self.inner_holds && self.outer_holds
    }
}

/// Samples `f^{1/n}` against `coth r − 1` at `{r1(1−δ), r1}` and `{r2, r2(1+δ)}`.
///
/// The comparison uses the normalized form since that is what the maximum
/// principle argument for the barriers compares with the sphere value.
pub fn barrier_crossing_check<T: Real>(problem: &ProblemSpec<T>, grid: &GridSpec, delta: T) -> BarrierReport {
    let inner = [problem.r1 * (T::one() - delta), problem.r1];
    let outer = [problem.r2, problem.r2 * (T::one() + delta)];
    let mut inner_margin = T::infinity();
    let mut outer_margin = T::infinity();
    let (mut inner_worst_node, mut outer_worst_node) = (0, 0);
    for node in 0..grid.node_count() {
        for &r in &inner {
            let m = problem.f_root(node, r) - coth_minus_one(r);
            if m < inner_margin {
                inner_margin = m;
                inner_worst_node = node;
            }
        }
        for &r in &outer {
            let m = coth_minus_one(r) - problem.f_root(node, r);
            if m < outer_margin {
                outer_margin = m;
                outer_worst_node = node;
            }
        }
    }
    BarrierReport {
        inner_holds: inner_margin >= T::zero(),
        outer_holds: outer_margin >= T::zero(),
        radii: inner.iter().chain(&outer).map(|r| r.to_f64_lossy()).collect(),
        inner_margin: inner_margin.to_f64_lossy(),
        inner_worst_node,
        outer_margin: outer_margin.to_f64_lossy(),
        outer_worst_node,
    }
}
