//! TOML run configuration and its resolution against command-line overrides.

use std::path::{Path, PathBuf};

use serde::Deserialize;
use shifted_gauss::io::{load_problem, ColumnFormat, LoadedProblem};
use shifted_gauss::problem::{Phi, ProblemSpec, RhsFamily};
use shifted_gauss::verifier::MonitorConfig;
use shifted_gauss::{manufacture, FdOrder, GridSpec, ManufactureOptions, Manufactured, SolverConfig, StepConfig, TargetSurface};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub dim: Option<usize>,
    #[serde(default)]
    pub seed: u64,
    pub grid: Option<GridSection>,
    pub problem: ProblemSource,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub continuation: StepConfig,
    #[serde(default)]
    pub monitor: MonitorConfig,
    #[serde(default)]
    pub start: StartConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub n_theta: Option<usize>,
    pub n_phi: usize,
    #[serde(default)]
    pub order: FdOrder,
}

/// Where `f` comes from.
#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProblemSource {
    /// A problem file written by `manufacture` or by hand.
    File { path: PathBuf },
    /// `f = ((coth r − 1) e^{rate (r0 − r)})^power`.
    RadialExponential {
        r0: f64,
        #[serde(default = "one")]
        rate: f64,
        #[serde(default = "one")]
        power: f64,
        r1: f64,
        r2: f64,
        phi_r0: Option<f64>,
        #[serde(default = "one")]
        phi_k: f64,
    },
    Constant {
        value: f64,
        r1: f64,
        r2: f64,
        phi_r0: f64,
        #[serde(default = "one")]
        phi_k: f64,
    },
    /// Exact-solution problem generated on the run grid.
    Manufactured {
        target: TargetSurface,
        #[serde(default)]
        options: ManufactureOptions,
    },
}

fn one() -> f64 {
    1.0
}

/// Initial guess for the `t = 0` solve.
#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StartConfig {
    /// Sup norm of a seeded band-limited perturbation added to `u`.
    #[serde(default)]
    pub noise: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub format: ColumnFormat,
    pub mesh: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: PathBuf::from("out"), format: ColumnFormat::Binary, mesh: true }
    }
}

/// Values given on the command line, which take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub grid: Option<(usize, usize)>,
    pub dim: Option<usize>,
    pub seed: Option<u64>,
}

/// A configuration with the grid and problem fully determined.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub grid: GridSpec,
    pub problem: ProblemSpec<f64>,
    pub manufactured: Option<Manufactured>,
    pub exact_radius: Option<Vec<f64>>,
    pub seed: u64,
    pub solver: SolverConfig,
    pub continuation: StepConfig,
    pub monitor: MonitorConfig,
    pub start: StartConfig,
    pub output: OutputConfig,
}

pub fn load(path: &Path) -> Result<RunConfig, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    toml::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
}

/// Parses `NθxNφ`, or a single `N` meaning an S¹ grid with `N` nodes.
pub fn parse_grid(s: &str) -> Result<(usize, usize), String> {
    let bad = || format!("--grid expects NθxNφ or N, got `{s}`");
    match s.split_once(['x', 'X']) {
        Some((a, b)) => Ok((a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?)),
        None => Ok((1, s.trim().parse().map_err(|_| bad())?)),
    }
}

impl RunConfig {
    /// Applies overrides, builds the grid and problem and validates everything.
    pub fn resolve(self, base: &Path, over: &Overrides) -> Result<Resolved, String> {
        self.solver.validate()?;
        self.continuation.validate()?;
        if !(self.start.noise >= 0.0 && self.start.noise.is_finite()) {
            return Err(format!("start.noise must be non-negative, got {}", self.start.noise));
        }
        let loaded = match &self.problem {
            ProblemSource::File { path } => {
                let path = if path.is_absolute() { path.clone() } else { base.join(path) };
                Some(load_problem(&path).map_err(|e| format!("problem.path: {e}"))?)
            }
            _ => None,
        };
        let file_grid = loaded.as_ref().and_then(|l| l.problem.f.grid().copied());
        let dim = over
            .dim
            .or(self.dim)
            .or(loaded.as_ref().map(|l| l.problem.dim))
            .or(match self.problem {
                ProblemSource::Manufactured { target: TargetSurface::CosPhi { .. }, .. } => Some(1),
                _ => None,
            })
            .unwrap_or(2);
        if dim != 1 && dim != 2 {
            return Err(format!("dim must be 1 or 2, got {dim}"));
        }
        let order = self.grid.map(|g| g.order).unwrap_or_default();
        let grid = match (over.grid, self.grid, file_grid) {
            (Some((nt, np)), _, _) => shape(dim, nt, np, order),
            (None, Some(g), _) => shape(dim, g.n_theta.unwrap_or(if dim == 1 { 1 } else { 0 }), g.n_phi, g.order),
            (None, None, Some(g)) => g,
            (None, None, None) => return Err("no grid: give --grid or a [grid] section".into()),
        };
        if grid.dim != dim {
            return Err(format!("grid is for dimension {}, but dim = {dim}", grid.dim));
        }
        grid.validate().map_err(|e| format!("grid: {e}"))?;

        let (problem, manufactured, exact_radius) = match (self.problem, loaded) {
            (_, Some(LoadedProblem { problem, exact_radius, .. })) => (problem, None, exact_radius),
            (ProblemSource::RadialExponential { r0, rate, power, r1, r2, phi_r0, phi_k }, None) => (
                ProblemSpec { dim, f: RhsFamily::RadialExponential { r0, rate, power }, r1, r2, phi: Phi::new(phi_r0.unwrap_or(r0), phi_k) },
                None,
                None,
            ),
            (ProblemSource::Constant { value, r1, r2, phi_r0, phi_k }, None) => {
                (ProblemSpec { dim, f: RhsFamily::Constant { value }, r1, r2, phi: Phi::new(phi_r0, phi_k) }, None, None)
            }
            (ProblemSource::Manufactured { target, options }, None) => {
                let m = manufacture(target, grid, options).map_err(|e| format!("problem.target: {e}"))?;
                let exact = m.exact_radius.clone();
                (m.problem.clone(), Some(m), Some(exact))
            }
            (ProblemSource::File { .. }, None) => unreachable!("file problems are loaded above"),
        };
        if problem.dim != dim {
            return Err(format!("problem is for dimension {}, but dim = {dim}", problem.dim));
        }
        problem.validate(&grid).map_err(|e| format!("problem: {e}"))?;

        let mut output = self.output;
        if let Some(out) = &over.out {
            output.dir = out.clone();
        } else if output.dir.is_relative() {
            output.dir = base.join(&output.dir);
        }
        Ok(Resolved {
            grid,
            problem,
            manufactured,
            exact_radius,
            seed: over.seed.unwrap_or(self.seed),
            solver: self.solver,
            continuation: self.continuation,
            monitor: self.monitor,
            start: self.start,
            output,
        })
    }
}

fn shape(dim: usize, n_theta: usize, n_phi: usize, order: FdOrder) -> GridSpec {
    let g = if dim == 1 { GridSpec { n_theta, ..GridSpec::circle(n_phi) } } else { GridSpec::sphere(n_theta, n_phi) };
    g.with_order(order)
}
