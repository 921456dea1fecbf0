use proptest::prelude::*;
use shifted_gauss::continuation::round_start;
use shifted_gauss::grid::{band_limited, band_limited_len};
use shifted_gauss::problem::{Phi, RhsFamily};
use shifted_gauss::verifier::{check_gradient_bound, check_horoconvex};
use shifted_gauss::{
    continue_to_one, manufacture, Discretization, GridFunction, GridSpec, ManufactureOptions, NewtonSolver, ProblemSpec,
    SolverConfig, StepConfig, TargetSurface,
};

fn solver(spec: GridSpec, config: SolverConfig) -> NewtonSolver {
    NewtonSolver::new(Discretization::new(spec).unwrap(), config).unwrap()
}

fn perturbed(u: &GridFunction, coeffs: &[f64], amplitude: f64) -> GridFunction {
    let d = band_limited(u.spec(), coeffs, amplitude);
    GridFunction::new(*u.spec(), u.values().iter().zip(&d).map(|(a, b)| a + b).collect()).unwrap()
}

#[test]
fn newton_tail_is_quadratic() {
    let spec = GridSpec::sphere(16, 32);
    let m = manufacture(TargetSurface::CosTheta { rho: 1.0, eps: 0.05 }, spec, ManufactureOptions::default()).unwrap();
    let s = solver(spec, SolverConfig { krylov_tol: 1e-13, tol_residual: 1e-13, ..Default::default() });
    let disc = s.discretization();
    let exact = disc.from_radii(&m.exact_radius).unwrap();
    let coeffs: Vec<f64> = (0..band_limited_len(2)).map(|i| ((i * 7 + 3) % 11) as f64 / 11.0 - 0.5).collect();
    let out = s.solve(&perturbed(&exact, &coeffs, 0.02), 1.0, &m.problem).unwrap();
    assert!(out.record.converged, "{:?}", out.record);
    let hist = &out.record.residual_history;
    let mut seen = 0;
    for w in hist.windows(2) {
        if w[0] < 1e-3 && w[1] > 1e-12 {
            assert!(w[1] / (w[0] * w[0]) < 1e3, "{hist:?}");
            seen += 1;
        }
    }
    assert!(seen >= 1, "{hist:?}");
}

#[test]
fn manufactured_path_invariants() {
    let spec = GridSpec::sphere(12, 24);
    let m = manufacture(TargetSurface::Harmonic2 { rho: 1.0, eps: 0.08, m: 0 }, spec, ManufactureOptions::default()).unwrap();
    let s = solver(spec, SolverConfig::default());
    let run = continue_to_one(&s, &m.problem, &StepConfig::default()).unwrap();
    assert!(run.trace.succeeded());
    let floor = s.config().cone_floor;
    for rec in &run.records {
        assert!(rec.min_lambda_history.iter().all(|l| *l > floor), "{rec:?}");
    }
    assert!(run.trace.steps.windows(2).all(|w| w[0].t < w[1].t));
    assert_eq!(run.trace.steps.first().unwrap().t, 0.0);
    assert_eq!(run.trace.final_t(), 1.0);
    for step in &run.trace.steps {
        let replay = s.residual(&run.snapshots[step.snapshot], step.t, &m.problem).unwrap();
        assert!((replay.norm_inf - step.residual_norm).abs() <= 1e-12);
        assert!(replay.norm_inf <= s.config().tol_residual);
    }
}

#[test]
fn radial_circle_stays_between_barriers() {
    let spec = GridSpec::circle(32);
    let problem = ProblemSpec {
        dim: 1,
        f: RhsFamily::RadialExponential { r0: 1.0, rate: 1.0, power: 1.0 },
        r1: 0.5,
        r2: 2.0,
        phi: Phi::new(1.0, 1.0),
    };
    let s = solver(spec, SolverConfig::default());
    let run = continue_to_one(&s, &problem, &StepConfig::default()).unwrap();
    assert!(run.trace.succeeded());
    for u in &run.snapshots {
        let radii = s.discretization().radii(u).unwrap();
        assert!(radii.iter().all(|r| *r > problem.r1 && *r < problem.r2));
    }
}

fn shifted(values: &[f64], spec: &GridSpec, s: usize) -> Vec<f64> {
    let n = spec.n_phi;
    (0..values.len()).map(|i| values[(i / n) * n + (i % n + s) % n]).collect()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 3, ..ProptestConfig::default() })]

    #[test]
    fn solution_rotates_with_the_data(s in 1usize..24) {
        let spec = GridSpec::sphere(12, 24);
        let m = manufacture(TargetSurface::Harmonic2 { rho: 1.0, eps: 0.05, m: 2 }, spec, ManufactureOptions::default()).unwrap();
        let RhsFamily::Separable { grid, amplitude, center, beta } = m.problem.f.clone() else { panic!("separable data") };
        let rotated = ProblemSpec {
            f: RhsFamily::Separable { grid, amplitude: shifted(&amplitude, &spec, s), center: shifted(&center, &spec, s), beta },
            ..m.problem.clone()
        };
        let sv = solver(spec, SolverConfig::default());
        let a = continue_to_one(&sv, &m.problem, &StepConfig::default()).unwrap();
        let b = continue_to_one(&sv, &rotated, &StepConfig::default()).unwrap();
        prop_assert!(a.trace.succeeded() && b.trace.succeeded());
        let expect = shifted(a.last().values(), &spec, s);
        let diff = expect.iter().zip(b.last().values()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        prop_assert!(diff < 1e-9, "shift {s}: {diff}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 32, ..ProptestConfig::default() })]

    #[test]
    fn axisymmetric_data_gives_axisymmetric_solutions(eps in 0.0f64..0.08) {
        let spec = GridSpec::sphere(10, 20);
        let m = manufacture(TargetSurface::CosTheta { rho: 1.0, eps }, spec, ManufactureOptions::default()).unwrap();
        let sv = solver(spec, SolverConfig::default());
        let start = round_start(sv.discretization(), &m.problem).unwrap();
        let out = sv.solve(&start, 1.0, &m.problem).unwrap();
        prop_assume!(out.record.converged);
        for row in out.u.values().chunks(spec.n_phi) {
            let spread = row.iter().fold(f64::NEG_INFINITY, |a, b| a.max(*b)) - row.iter().fold(f64::INFINITY, |a, b| a.min(*b));
            prop_assert!(spread < 1e-12, "{spread}");
        }
    }

    #[test]
    fn horoconvex_check_matches_min_lambda(
        coeffs in prop::collection::vec(-1.0f64..1.0, 20),
        amplitude in 0.0f64..0.4,
        rho in 0.4f64..2.0,
    ) {
        let spec = GridSpec::sphere(10, 20);
        let disc = Discretization::new(spec).unwrap();
        let round = disc.from_radius_fn(|_, _| rho).unwrap();
        let u = perturbed(&round, &coeffs, amplitude);
        let Ok(fields) = disc.fields(&u) else { return Ok(()) };
        let min = fields.iter().map(|f| f.min_lambda()).fold(f64::INFINITY, f64::min);
        let c = check_horoconvex(&disc, &u).unwrap();
        prop_assert_eq!(c.passed, min > 0.0);
        prop_assert_eq!(c.measured, min);
    }

    #[test]
    fn horoconvex_surfaces_satisfy_the_gradient_bound(
        coeffs in prop::collection::vec(-1.0f64..1.0, 20),
        amplitude in 0.0f64..0.2,
        rho in 0.3f64..2.5,
    ) {
        let spec = GridSpec::sphere(16, 32);
        let disc = Discretization::new(spec).unwrap();
        let u = perturbed(&disc.from_radius_fn(|_, _| rho).unwrap(), &coeffs, amplitude);
        let Ok(convex) = check_horoconvex(&disc, &u) else { return Ok(()) };
        prop_assume!(convex.passed);
        let c = check_gradient_bound(&disc, &u).unwrap();
        prop_assert!(c.passed, "{c:?}");
    }
}
