//! Residual of the normalized homotopy equation and a cone-guarded
//! Jacobian-free Newton–Krylov solver.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grid::{sup_norm_and_argmax, GridError, GridFunction, ShiftedLaplacian};
use crate::linalg::{gmres, GmresConfig};
use crate::problem::{ProblemError, ProblemSpec};
use crate::scalar::{coth_minus_one, sup_norm, Real};
use crate::surface::Discretization;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    #[error("left the horo-convex cone at node {node}: min lambda = {min_lambda:e}")]
    Cone { node: usize, min_lambda: f64 },
    #[error("initial guess is not admissible: {0}")]
    Precondition(Box<SolveError>),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error("non-finite residual at node {0}")]
    NonFinite(usize),
}

pub type SolveResult<T> = Result<T, SolveError>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    pub tol_residual: f64,
    pub max_newton: usize,
    pub cone_floor: f64,
    pub krylov_tol: f64,
    pub fd_epsilon: f64,
    pub krylov_restart: usize,
    pub krylov_max_iter: usize,
    /// Shift `α` of the `αI − Δ` preconditioner.
    pub precond_shift: f64,
    pub max_halvings: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tol_residual: 1e-10,
            max_newton: 50,
            cone_floor: 1e-8,
            krylov_tol: 1e-6,
            fd_epsilon: 1e-7,
            krylov_restart: 40,
            krylov_max_iter: 400,
            precond_shift: 1.0,
            max_halvings: 30,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), String> {
        let positive = [
            ("tol_residual", self.tol_residual),
            ("cone_floor", self.cone_floor),
            ("krylov_tol", self.krylov_tol),
            ("fd_epsilon", self.fd_epsilon),
            ("precond_shift", self.precond_shift),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(format!("solver.{name} must be positive, got {v}"));
            }
        }
        if self.tol_residual >= 1.0 {
            return Err(format!("solver.tol_residual must be below 1, got {}", self.tol_residual));
        }
        if self.max_newton == 0 || self.krylov_restart == 0 || self.krylov_max_iter == 0 {
            return Err("solver iteration limits must be positive".into());
        }
        Ok(())
    }
}

/// Per-node residual `(Π λ_i)^{1/n} − [t f^{1/n} + (1 − t) φ(r)(coth r − 1)]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualField<T> {
    pub values: Vec<T>,
    pub norm_inf: T,
    pub argmax: usize,
    pub min_lambda: T,
    pub min_lambda_node: usize,
    pub radii: Vec<T>,
}

/// `n`-th root of the product of shifted principal curvatures.
pub fn normalized_shifted_gauss<T: Real>(lambda: &[T]) -> T {
    match lambda {
        [l] => *l,
        [a, b] => (*a * *b).sqrt(),
        _ => T::nan(),
    }
}

pub fn residual<T: Real>(
    disc: &Discretization<T>,
    u: &GridFunction<T>,
    t: T,
    problem: &ProblemSpec<T>,
    cone_floor: T,
) -> SolveResult<ResidualField<T>> {
    let fields = disc.fields(u)?;
    let mut min_lambda = T::infinity();
    let mut min_lambda_node = 0;
    for (node, f) in fields.iter().enumerate() {
        if f.min_lambda() < min_lambda || !f.min_lambda().is_finite() {
            min_lambda = f.min_lambda();
            min_lambda_node = node;
        }
    }
    if !(min_lambda > cone_floor) {
        return Err(SolveError::Cone { node: min_lambda_node, min_lambda: min_lambda.to_f64_lossy() });
    }
    let radii = disc.radii(u)?;
    let values: Vec<T> = fields
        .iter()
        .zip(&radii)
        .enumerate()
        .map(|(node, (f, &r))| normalized_shifted_gauss(f.lambda()) - problem.homotopy_rhs(node, r, t))
        .collect();
    if let Some(node) = values.iter().position(|v| !v.is_finite()) {
        return Err(SolveError::NonFinite(node));
    }
    let (norm_inf, argmax) = sup_norm_and_argmax(&values);
    Ok(ResidualField { values, norm_inf, argmax, min_lambda, min_lambda_node, radii })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureReason {
    MaxIterations,
    ConeBoundary,
    LinearStagnation,
    LineSearch,
    NonFinite,
}

/// History of one Newton solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRecord {
    pub t: f64,
    pub converged: bool,
    pub iterations: usize,
    pub residual_history: Vec<f64>,
    pub min_lambda_history: Vec<f64>,
    /// Accepted line-search step length per iteration.
    pub step_history: Vec<f64>,
    pub krylov_iterations: Vec<usize>,
    pub failure: Option<FailureReason>,
}

#[derive(Debug, Clone)]
pub struct NewtonOutcome<T> {
    /// Final iterate (the last accepted one on failure).
    pub u: GridFunction<T>,
    pub residual: ResidualField<T>,
    pub record: ConvergenceRecord,
}

/// Newton solver bound to one grid and one preconditioner.
#[derive(Debug, Clone)]
pub struct NewtonSolver<T> {
    disc: Discretization<T>,
    precond: ShiftedLaplacian<T>,
    config: SolverConfig,
}

impl<T: Real> NewtonSolver<T> {
    pub fn new(disc: Discretization<T>, config: SolverConfig) -> SolveResult<Self> {
        let precond = ShiftedLaplacian::new(*disc.spec(), T::lit(config.precond_shift))?;
        Ok(Self { disc, precond, config })
    }

    pub fn discretization(&self) -> &Discretization<T> {
        &self.disc
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    pub fn residual(&self, u: &GridFunction<T>, t: T, problem: &ProblemSpec<T>) -> SolveResult<ResidualField<T>> {
        residual(&self.disc, u, t, problem, T::lit(self.config.cone_floor))
    }

    /// Central-difference directional derivative of the residual.
    pub fn jacobian_apply(
        &self,
        u: &GridFunction<T>,
        w: &[T],
        t: T,
        problem: &ProblemSpec<T>,
    ) -> SolveResult<Vec<T>> {
        let w_norm = sup_norm(w);
        if w_norm == T::zero() {
            return Ok(vec![T::zero(); w.len()]);
        }
        let eps = T::lit(self.config.fd_epsilon) * (T::one() + sup_norm(u.values())) / w_norm;
        let shifted = |s: T| -> SolveResult<GridFunction<T>> {
            let vals = u.values().iter().zip(w).map(|(a, b)| *a + s * *b).collect();
            Ok(GridFunction::new(*u.spec(), vals)?)
        };
        let plus = self.residual(&shifted(eps)?, t, problem)?;
        let minus = self.residual(&shifted(-eps)?, t, problem)?;
        let inv = T::one() / (T::two() * eps);
        Ok(plus.values.iter().zip(&minus.values).map(|(p, m)| (*p - *m) * inv).collect())
    }

    pub fn solve(&self, u0: &GridFunction<T>, t: T, problem: &ProblemSpec<T>) -> SolveResult<NewtonOutcome<T>> {
        let cfg = &self.config;
        let mut u = u0.clone();
        let mut res = self
            .residual(&u, t, problem)
            .map_err(|e| SolveError::Precondition(Box::new(e)))?;
        let mut record = ConvergenceRecord {
            t: t.to_f64_lossy(),
            converged: false,
            iterations: 0,
            residual_history: Vec::new(),
            min_lambda_history: Vec::new(),
            step_history: Vec::new(),
            krylov_iterations: Vec::new(),
            failure: None,
        };
        let gcfg = GmresConfig {
            rel_tol: T::lit(cfg.krylov_tol),
            restart: cfg.krylov_restart,
            max_iter: cfg.krylov_max_iter,
        };
        loop {
            record.residual_history.push(res.norm_inf.to_f64_lossy());
            record.min_lambda_history.push(res.min_lambda.to_f64_lossy());
            if res.norm_inf <= T::lit(cfg.tol_residual) {
                record.converged = true;
                break;
            }
            if record.iterations >= cfg.max_newton {
                record.failure = Some(FailureReason::MaxIterations);
                break;
            }
            let rhs: Vec<T> = res.values.iter().map(|v| -*v).collect();
            let lin = gmres(&rhs, |w| self.jacobian_apply(&u, w, t, problem), |v| self.precond.solve(v), &gcfg);
            let lin = match lin {
                Ok(l) => l,
                Err(SolveError::Cone { .. }) | Err(SolveError::Grid(GridError::Geometry { .. })) => {
                    record.failure = Some(FailureReason::ConeBoundary);
                    break;
                }
                Err(SolveError::NonFinite(_)) => {
                    record.failure = Some(FailureReason::NonFinite);
                    break;
                }
                Err(e) => return Err(e),
            };
            record.krylov_iterations.push(lin.iterations);
            if !lin.converged && !(lin.rel_residual < T::half()) {
                record.failure = Some(FailureReason::LinearStagnation);
                break;
            }
            if lin.x.iter().any(|x| !x.is_finite()) {
                record.failure = Some(FailureReason::NonFinite);
                break;
            }

            let mut step = T::one();
            let mut accepted = None;
            let mut cone_hit = false;
            for _ in 0..=cfg.max_halvings {
                let vals: Vec<T> = u.values().iter().zip(&lin.x).map(|(a, d)| *a + step * *d).collect();
                let trial = GridFunction::new(*u.spec(), vals);
                match trial.map_err(SolveError::from).and_then(|tr| Ok((self.residual(&tr, t, problem)?, tr))) {
                    Ok((r, tr)) if r.norm_inf < res.norm_inf => {
                        accepted = Some((r, tr));
                        break;
                    }
                    Ok(_) => {}
                    Err(SolveError::Cone { .. }) | Err(SolveError::Grid(GridError::Geometry { .. })) => cone_hit = true,
                    Err(SolveError::NonFinite(_)) | Err(SolveError::Grid(GridError::NonFinite(_))) => {}
                    Err(e) => return Err(e),
                }
                step = step * T::half();
            }
            match accepted {
                Some((r, tr)) => {
                    record.iterations += 1;
                    record.step_history.push(step.to_f64_lossy());
                    u = tr;
                    res = r;
                }
                None => {
                    record.failure =
                        Some(if cone_hit { FailureReason::ConeBoundary } else { FailureReason::LineSearch });
                    break;
                }
            }
        }
        Ok(NewtonOutcome { u, residual: res, record })
    }
}

/// Finite-difference check of the sign of the linearization at the round
/// solution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignCheckReport {
    /// Derivative of the residual along a constant radial shift.
    pub measured: f64,
    /// `−φ′(r0)(coth r0 − 1)`.
    pub expected: f64,
    pub relative_error: f64,
    /// Dominant eigenvalue of the discrete linearization from power iteration.
    pub dominant_eigenvalue: f64,
    pub passed: bool,
}

/// Measures `d/ds residual(r0 + s)` at `t = 0` by central differences and the
/// dominant eigenvalue of the linearization at the round solution.
pub fn linearized_diagonal_sign_check<T: Real>(
    solver: &NewtonSolver<T>,
    problem: &ProblemSpec<T>,
    step: T,
) -> SolveResult<SignCheckReport> {
    let disc = solver.discretization();
    let r0 = problem.phi.r0;
    let n = disc.spec().node_count();
    let at = |s: T| -> SolveResult<T> {
        let u = disc.from_radii(&vec![r0 + s; n])?;
        let res = solver.residual(&u, T::zero(), problem)?;
        Ok(res.values.iter().fold(T::zero(), |a, v| a + *v) / T::from_usize_lossy(n))
    };
    let measured = (at(step)? - at(-step)?) / (T::two() * step);
    let expected = -problem.phi.derivative(r0) * coth_minus_one(r0);
    let relative_error = ((measured - expected) / expected).abs();

    let round = disc.from_radii(&vec![r0; n])?;
    // start with energy in every mode; the iteration picks out the stiffest one
    let mut w: Vec<T> = (0..n)
        .map(|i| T::one() + T::lit(((i * 7919) % 101) as f64 / 101.0))
        .collect();
    let mut eig = T::zero();
    for _ in 0..200 {
        let jw = solver.jacobian_apply(&round, &w, T::zero(), problem)?;
        let norm = crate::scalar::norm2(&jw);
        eig = crate::scalar::dot(&w, &jw) / crate::scalar::dot(&w, &w);
        w = jw.iter().map(|x| *x / norm).collect();
    }
    let passed = relative_error <= T::lit(0.05) && measured > T::zero() && eig > T::zero();
    Ok(SignCheckReport {
        measured: measured.to_f64_lossy(),
        expected: expected.to_f64_lossy(),
        relative_error: relative_error.to_f64_lossy(),
        dominant_eigenvalue: eig.to_f64_lossy(),
        passed,
    })
}
