//! Path following in the homotopy parameter from the round solution at
//! `t = 0` to `t = 1`.

use serde::{Deserialize, Serialize};

use crate::grid::{GridFunction, GridResult};
use crate::problem::ProblemSpec;
use crate::solver::{ConvergenceRecord, FailureReason, NewtonOutcome, NewtonSolver, SolveResult};
use crate::surface::Discretization;
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StepConfig {
    pub initial_step: f64,
    pub min_step: f64,
    pub max_step: f64,
    pub grow: f64,
    /// Steps converging within this many Newton iterations grow the step.
    pub fast_iterations: usize,
}

impl Default for StepConfig {
    fn default() -> Self {
        Self { initial_step: 0.1, min_step: 1e-4, max_step: 0.25, grow: 1.5, fast_iterations: 5 }
    }
}

impl StepConfig {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.min_step > 0.0 && self.min_step <= self.initial_step && self.initial_step <= self.max_step) {
            return Err(format!(
                "continuation steps must satisfy 0 < min_step <= initial_step <= max_step, got {} / {} / {}",
                self.min_step, self.initial_step, self.max_step
            ));
        }
        if !(self.max_step <= 1.0) {
            return Err(format!("continuation.max_step must be at most 1, got {}", self.max_step));
        }
        if !(self.grow >= 1.0) {
            return Err(format!("continuation.grow must be at least 1, got {}", self.grow));
        }
        Ok(())
    }
}

/// One accepted point on the path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub t: f64,
    pub residual_norm: f64,
    pub min_lambda: f64,
    pub min_r: f64,
    pub max_r: f64,
    pub newton_iterations: usize,
    /// Index into the run's snapshot list.
    pub snapshot: usize,
}

/// An attempted step that did not converge.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RejectedStep {
    pub t: f64,
    pub step: f64,
    pub reason: Option<FailureReason>,
    pub residual_norm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum TraceStatus {
    Success,
    FailedAtT { t_attempted: f64, last_good_t: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuationTrace {
    pub steps: Vec<StepRecord>,
    pub rejected: Vec<RejectedStep>,
    pub status: TraceStatus,
    /// Sup distance of the final radius from a known exact solution, when one exists.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exact_error: Option<f64>,
}

impl ContinuationTrace {
    pub fn succeeded(&self) -> bool {
        self.status == TraceStatus::Success
    }

    pub fn final_t(&self) -> f64 {
        self.steps.last().map_or(0.0, |s| s.t)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("trace serializes")
    }
}

/// A trace plus the accepted solutions it refers to.
#[derive(Debug, Clone)]
pub struct ContinuationRun<T> {
    pub trace: ContinuationTrace,
    pub snapshots: Vec<GridFunction<T>>,
    /// Newton history of every attempt, accepted or not, in order.
    pub records: Vec<ConvergenceRecord>,
}

impl<T: Real> ContinuationRun<T> {
    /// Last accepted solution.
    pub fn last(&self) -> &GridFunction<T> {
        self.snapshots.last().expect("the round start is always recorded")
    }
}

/// Constant grid function `u ≡ u(r0)` of the weight's root.
pub fn round_start<T: Real>(disc: &Discretization<T>, problem: &ProblemSpec<T>) -> GridResult<GridFunction<T>> {
    disc.from_radii(&vec![problem.phi.r0; disc.spec().node_count()])
}

pub fn continue_to_one<T: Real>(
    solver: &NewtonSolver<T>,
    problem: &ProblemSpec<T>,
    steps: &StepConfig,
) -> SolveResult<ContinuationRun<T>> {
    let start = round_start(solver.discretization(), problem)?;
    continue_from(solver, problem, steps, start)
}

/// Like [`continue_to_one`] with an explicit initial guess for the `t = 0` solve.
pub fn continue_from<T: Real>(
    solver: &NewtonSolver<T>,
    problem: &ProblemSpec<T>,
    steps: &StepConfig,
    start: GridFunction<T>,
) -> SolveResult<ContinuationRun<T>> {
    let first = solver.solve(&start, T::zero(), problem)?;
    let mut trace = ContinuationTrace { steps: Vec::new(), rejected: Vec::new(), status: TraceStatus::Success, exact_error: None };
    let mut snapshots = Vec::new();
    let mut records = vec![first.record.clone()];
    let record = |t: f64, out: &NewtonOutcome<T>, snapshot: usize| StepRecord {
        t,
        residual_norm: out.residual.norm_inf.to_f64_lossy(),
        min_lambda: out.residual.min_lambda.to_f64_lossy(),
        min_r: out.residual.radii.iter().fold(f64::INFINITY, |m, r| m.min(r.to_f64_lossy())),
        max_r: out.residual.radii.iter().fold(f64::NEG_INFINITY, |m, r| m.max(r.to_f64_lossy())),
        newton_iterations: out.record.iterations,
        snapshot,
    };
    if !first.record.converged {
        trace.rejected.push(RejectedStep {
            t: 0.0,
            step: 0.0,
            reason: first.record.failure,
            residual_norm: first.residual.norm_inf.to_f64_lossy(),
        });
        trace.status = TraceStatus::FailedAtT { t_attempted: 0.0, last_good_t: 0.0 };
        snapshots.push(start);
        return Ok(ContinuationRun { trace, snapshots, records });
    }
    trace.steps.push(record(0.0, &first, 0));
    snapshots.push(first.u);

    let mut t = 0.0f64;
    let mut dt = steps.initial_step;
    while t < 1.0 {
        let t_next = (t + dt).min(1.0);
        let current = snapshots.last().expect("non-empty");
        let out = solver.solve(current, T::lit(t_next), problem)?;
        records.push(out.record.clone());
        if out.record.converged {
            trace.steps.push(record(t_next, &out, snapshots.len()));
            let fast = out.record.iterations <= steps.fast_iterations;
            snapshots.push(out.u);
            t = t_next;
            if fast {
                dt = (dt * steps.grow).min(steps.max_step);
            }
        } else {
            trace.rejected.push(RejectedStep {
                t: t_next,
                step: t_next - t,
                reason: out.record.failure,
                residual_norm: out.residual.norm_inf.to_f64_lossy(),
            });
            dt *= 0.5;
            if dt < steps.min_step {
                trace.status = TraceStatus::FailedAtT { t_attempted: t_next, last_good_t: t };
                break;
            }
        }
    }
    Ok(ContinuationRun { trace, snapshots, records })
}
