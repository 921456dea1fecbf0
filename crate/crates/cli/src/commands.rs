use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use shifted_gauss::continuation::round_start;
use shifted_gauss::grid::{band_limited, band_limited_len};
use shifted_gauss::io::{load_problem, load_solution, save_problem, save_solution, write_columns, write_obj, Columns, Solution};
use shifted_gauss::problem::barrier_crossing_check;
use shifted_gauss::verifier::{check_curvature_bound_monitor, check_path, check_residual, verify_surface, VerificationReport};
use shifted_gauss::{continue_from, Discretization, GridFunction, NewtonSolver, SolverConfig};

use crate::config::{self, Overrides};

/// A command failure, mapped onto the process exit code.
#[derive(Debug)]
pub enum Failure {
    Config(String),
    Continuation(String),
    Verification(String),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => 1,
            Failure::Continuation(_) => 2,
            Failure::Verification(_) => 3,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Config(m) | Failure::Continuation(m) | Failure::Verification(m) => m,
        }
    }
}

type CmdResult = Result<(), Failure>;

fn cfg_err(e: impl ToString) -> Failure {
    Failure::Config(e.to_string())
}

fn create_dir(dir: &Path) -> CmdResult {
    fs::create_dir_all(dir).map_err(|e| Failure::Config(format!("output.dir {}: {e}", dir.display())))
}

fn write_text(path: &Path, text: &str) -> CmdResult {
    fs::write(path, text).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))
}

fn load_resolved(config: Option<&Path>, over: &Overrides) -> Result<config::Resolved, Failure> {
    let path = config.ok_or_else(|| Failure::Config("--config is required for this command".into()))?;
    let cfg = config::load(path).map_err(Failure::Config)?;
    let base = path.parent().unwrap_or_else(|| Path::new(""));
    cfg.resolve(base, over).map_err(Failure::Config)
}

fn finish(report: &VerificationReport, out: &Path, quiet: bool) -> CmdResult {
    write_text(&out.join("report.json"), &report.to_json())?;
    if !quiet {
        print!("{}", report.to_table());
    }
    if report.hard_passed() {
        Ok(())
    } else {
        let failed: Vec<&str> = report.checks.iter().filter(|c| c.hard && !c.passed).map(|c| c.name.as_str()).collect();
        Err(Failure::Verification(format!("verification failed: {}", failed.join(", "))))
    }
}

pub fn solve(config: Option<&Path>, over: &Overrides, quiet: bool) -> CmdResult {
    let r = load_resolved(config, over)?;
    let out = &r.output.dir;
    create_dir(out)?;
    save_problem(&out.join("problem.json"), &r.problem, r.manufactured.as_ref(), r.output.format).map_err(cfg_err)?;

    let disc = Discretization::new(r.grid).map_err(cfg_err)?;
    let solver = NewtonSolver::new(disc, r.solver).map_err(cfg_err)?;
    let disc = solver.discretization();
    let mut start = round_start(disc, &r.problem).map_err(cfg_err)?;
    if r.start.noise > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(r.seed);
        let coeffs: Vec<f64> = (0..band_limited_len(r.grid.dim)).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let noise = band_limited(&r.grid, &coeffs, r.start.noise);
        let values = start.values().iter().zip(&noise).map(|(u, d)| u + d).collect();
        start = GridFunction::new(r.grid, values).map_err(cfg_err)?;
    }

    let run = continue_from(&solver, &r.problem, &r.continuation, start)
        .map_err(|e| Failure::Continuation(format!("continuation aborted: {e}")))?;
    let mut trace = run.trace.clone();
    let u = run.last();
    let t = trace.final_t();
    let res = solver.residual(u, t, &r.problem).map_err(|e| Failure::Continuation(e.to_string()))?;
    let radii = res.radii.clone();
    if let Some(exact) = &r.exact_radius {
        trace.exact_error = Some(radii.iter().zip(exact).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max));
    }
    write_text(&out.join("trace.json"), &trace.to_json())?;
    let solution = Solution {
        grid: r.grid,
        reference_radius: disc.reference(),
        t,
        residual_norm: res.norm_inf,
        min_lambda: res.min_lambda,
        u: u.values().to_vec(),
        r: radii.clone(),
    };
    save_solution(&out.join("solution.json"), &solution, r.output.format).map_err(cfg_err)?;

    if !trace.succeeded() {
        return Err(Failure::Continuation(format!(
            "continuation failed: {:?}; last accepted solution written to {}",
            trace.status,
            out.join("solution.json").display()
        )));
    }
    if r.grid.dim == 2 && r.output.mesh {
        write_obj(&out.join("mesh.obj"), &r.grid, &radii).map_err(cfg_err)?;
    }

    let mut report = verify_surface(disc, u, Some(&r.problem)).map_err(cfg_err)?;
    report.checks.extend(check_residual(disc, u, t, &r.problem, None, r.solver.tol_residual));
    let hyp = barrier_crossing_check(&r.problem, &r.grid, 0.1);
    report.checks.extend(check_path(&trace, &r.problem, &hyp));
    report.checks.extend(check_curvature_bound_monitor(disc, &run, &r.monitor).map_err(cfg_err)?);
    if !quiet {
        println!(
            "reached t = 1 in {} steps ({} rejected); residual {:.3e}",
            trace.steps.len(),
            trace.rejected.len(),
            res.norm_inf
        );
        if let Some(e) = trace.exact_error {
            println!("sup error against the exact solution: {e:.3e}");
        }
    }
    finish(&report, out, quiet)
}

pub fn manufacture(config: Option<&Path>, over: &Overrides, quiet: bool) -> CmdResult {
    let r = load_resolved(config, over)?;
    let m = r
        .manufactured
        .as_ref()
        .ok_or_else(|| Failure::Config("manufacture needs problem.kind = \"manufactured\"".into()))?;
    create_dir(&r.output.dir)?;
    let path = r.output.dir.join("problem.json");
    save_problem(&path, &m.problem, Some(m), r.output.format).map_err(cfg_err)?;
    if !quiet {
        let hyp = barrier_crossing_check(&m.problem, &r.grid, 0.1);
        println!(
            "wrote {} ({}; r1 = {}, r2 = {}, probe min lambda = {:.6e}, barrier hypotheses {})",
            path.display(),
            m.target.name(),
            m.problem.r1,
            m.problem.r2,
            m.probe_min_lambda,
            if hyp.holds() { "hold" } else { "do not hold" }
        );
    }
    Ok(())
}

fn default_out(solution: &Path, over: &Overrides) -> PathBuf {
    over.out.clone().unwrap_or_else(|| solution.parent().unwrap_or_else(|| Path::new(".")).to_path_buf())
}

fn load_surface(solution: &Path) -> Result<(Solution, Discretization, GridFunction), Failure> {
    let sol = load_solution(solution).map_err(cfg_err)?;
    let disc = Discretization::new(sol.grid).map_err(cfg_err)?;
    if sol.reference_radius != disc.reference() {
        return Err(Failure::Config(format!(
            "{}: reference_radius {} is not the supported value {}",
            solution.display(),
            sol.reference_radius,
            disc.reference()
        )));
    }
    let u = GridFunction::new(sol.grid, sol.u.clone()).map_err(cfg_err)?;
    Ok((sol, disc, u))
}

pub fn verify(solution: &Path, problem: Option<&Path>, over: &Overrides, quiet: bool) -> CmdResult {
    let (sol, disc, u) = load_surface(solution)?;
    let problem = match problem {
        Some(p) => {
            let loaded = load_problem(p).map_err(cfg_err)?;
            loaded.problem.validate(&sol.grid).map_err(|e| Failure::Config(format!("{}: {e}", p.display())))?;
            Some(loaded.problem)
        }
        None => None,
    };
    let mut report = verify_surface(&disc, &u, problem.as_ref()).map_err(cfg_err)?;
    if let Some(p) = &problem {
        let tol = SolverConfig::default().tol_residual;
        report.checks.extend(check_residual(&disc, &u, sol.t, p, Some(sol.residual_norm), tol));
    }
    let out = default_out(solution, over);
    create_dir(&out)?;
    finish(&report, &out, quiet)
}

pub fn export(solution: &Path, over: &Overrides, quiet: bool) -> CmdResult {
    let (sol, disc, u) = load_surface(solution)?;
    let fields = disc.fields(&u).map_err(cfg_err)?;
    let out = default_out(solution, over);
    create_dir(&out)?;
    let mut cols = Columns::new(sol.grid);
    cols.push("u", sol.u.clone());
    cols.push("r", disc.radii(&u).map_err(cfg_err)?);
    cols.push("min_lambda", fields.iter().map(|f| f.min_lambda()).collect());
    cols.push("mean_curvature", fields.iter().map(|f| f.mean_curvature).collect());
    cols.push("shifted_gauss", fields.iter().map(|f| f.shifted_gauss()).collect());
    let csv = out.join("fields.csv");
    write_columns(&csv, shifted_gauss::io::ColumnFormat::Csv, &cols).map_err(cfg_err)?;
    let obj = out.join("mesh.obj");
    write_obj(&obj, &sol.grid, cols.get("r").expect("pushed above")).map_err(cfg_err)?;
    if !quiet {
        println!("wrote {} and {}", csv.display(), obj.display());
    }
    Ok(())
}
