use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use shifted_gauss::io::{load_solution, save_solution, ColumnFormat, Solution};
use shifted_gauss::{Discretization, GridSpec};
use tempfile::TempDir;

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_shifted-gauss")).current_dir(dir).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn write(dir: &Path, name: &str, text: &str) {
    fs::write(dir.join(name), text).unwrap();
}

const RADIAL1: &str = r#"
dim = 1
[grid]
n_phi = 32
[problem]
kind = "radial_exponential"
r0 = 1.0
r1 = 0.5
r2 = 2.0
[output]
dir = "out"
"#;

const MANUFACTURED: &str = r#"
[grid]
n_theta = 12
n_phi = 24
[problem]
kind = "manufactured"
target = { kind = "cos_theta", rho = 1.0, eps = 0.05 }
[output]
dir = "out"
"#;

#[test]
fn radial_circle_solves_to_constant() {
    let tmp = TempDir::new().unwrap();
    write(tmp.path(), "run.toml", RADIAL1);
    let out = run(tmp.path(), &["solve", "--config", "run.toml", "--quiet"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let sol = load_solution(&tmp.path().join("out/solution.json")).unwrap();
    assert_eq!(sol.t, 1.0);
    assert!(sol.r.iter().all(|r| (r - 1.0).abs() < 1e-8));
    for f in ["trace.json", "report.json", "problem.json", "solution.bin"] {
        assert!(tmp.path().join("out").join(f).exists(), "{f}");
    }
}

#[test]
fn swapped_barriers_exit_one_naming_keys() {
    let tmp = TempDir::new().unwrap();
    write(tmp.path(), "run.toml", &RADIAL1.replace("r1 = 0.5", "r1 = 2.5"));
    let out = run(tmp.path(), &["solve", "--config", "run.toml"]);
    assert_eq!(code(&out), 1);
    let msg = stderr(&out);
    assert!(msg.contains("r1") && msg.contains("r2"), "{msg}");
}

#[test]
fn bad_input_exits_one() {
    let tmp = TempDir::new().unwrap();
    write(tmp.path(), "run.toml", &RADIAL1.replace("n_phi = 32", "n_phi = 32\nspacing = 3"));
    let out = run(tmp.path(), &["solve", "--config", "run.toml"]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("spacing"));

    write(tmp.path(), "ok.toml", RADIAL1);
    assert_eq!(code(&run(tmp.path(), &["solve", "--config", "ok.toml", "--grid", "32by64"])), 1);
    assert_eq!(code(&run(tmp.path(), &["solve", "--config", "ok.toml", "--dim", "3"])), 1);
    assert_eq!(code(&run(tmp.path(), &["solve"])), 1);
    assert_eq!(code(&run(tmp.path(), &["--help"])), 0);
}

#[test]
fn manufactured_run_reports_error_and_verifies() {
    let tmp = TempDir::new().unwrap();
    write(tmp.path(), "run.toml", MANUFACTURED);
    let out = run(tmp.path(), &["solve", "--config", "run.toml", "--quiet"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let trace: serde_json::Value = serde_json::from_str(&fs::read_to_string(tmp.path().join("out/trace.json")).unwrap()).unwrap();
    let err = trace["exact_error"].as_f64().unwrap();
    assert!(err > 0.0 && err < 1e-4, "{err}");
    assert!(tmp.path().join("out/mesh.obj").exists());

    let out = run(tmp.path(), &["verify", "out/solution.json", "--problem", "out/problem.json", "--out", "check", "--quiet"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(tmp.path().join("check/report.json")).unwrap()).unwrap();
    let replay = report["checks"].as_array().unwrap().iter().find(|c| c["name"] == "residual_replay").unwrap();
    assert!(replay["passed"].as_bool().unwrap());
    assert!(replay["measured"].as_f64().unwrap() <= 1e-12);
}

#[test]
fn manufacture_writes_a_loadable_problem() {
    let tmp = TempDir::new().unwrap();
    write(tmp.path(), "gen.toml", MANUFACTURED);
    let out = run(tmp.path(), &["manufacture", "--config", "gen.toml", "--out", "gen", "--quiet"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let solve_cfg = "[problem]\nkind = \"file\"\npath = \"gen/problem.json\"\n[output]\ndir = \"solved\"\n";
    write(tmp.path(), "solve.toml", solve_cfg);
    let out = run(tmp.path(), &["solve", "--config", "solve.toml", "--quiet"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let trace: serde_json::Value = serde_json::from_str(&fs::read_to_string(tmp.path().join("solved/trace.json")).unwrap()).unwrap();
    assert!(trace["exact_error"].as_f64().unwrap() < 1e-4);
}

#[test]
fn radial_sphere_continuation_failure_exits_two() {
    let tmp = TempDir::new().unwrap();
    let cfg = RADIAL1.replace("dim = 1", "dim = 2").replace("n_phi = 32", "n_theta = 10\nn_phi = 20");
    write(tmp.path(), "run.toml", &cfg);
    let out = run(tmp.path(), &["solve", "--config", "run.toml", "--quiet"]);
    assert_eq!(code(&out), 2, "{}", stderr(&out));
    let trace: serde_json::Value = serde_json::from_str(&fs::read_to_string(tmp.path().join("out/trace.json")).unwrap()).unwrap();
    assert_eq!(trace["status"]["status"], "failed_at_t");
    assert!(trace["status"]["last_good_t"].as_f64().unwrap() < 1.0);
}

#[test]
fn truncated_solution_exits_one() {
    let tmp = TempDir::new().unwrap();
    write(tmp.path(), "run.toml", RADIAL1);
    assert_eq!(code(&run(tmp.path(), &["solve", "--config", "run.toml", "--quiet"])), 0);
    let bin = tmp.path().join("out/solution.bin");
    let bytes = fs::read(&bin).unwrap();
    fs::write(&bin, &bytes[..bytes.len() - 5]).unwrap();
    let out = run(tmp.path(), &["verify", "out/solution.json", "--quiet"]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("truncated"), "{}", stderr(&out));
}

#[test]
fn non_convex_surface_fails_verification() {
    let tmp = TempDir::new().unwrap();
    let grid = GridSpec::circle(32);
    let disc = Discretization::new(grid).unwrap();
    let u = disc.from_radius_fn(|_, p| 1.0 + 0.3 * (3.0 * p).cos()).unwrap();
    let sol = Solution {
        grid,
        reference_radius: disc.reference(),
        t: 1.0,
        residual_norm: 0.0,
        min_lambda: -1.0,
        u: u.values().to_vec(),
        r: disc.radii(&u).unwrap(),
    };
    save_solution(&tmp.path().join("bad.json"), &sol, ColumnFormat::Csv).unwrap();
    let out = run(tmp.path(), &["verify", "bad.json", "--quiet"]);
    assert_eq!(code(&out), 3, "{}", stderr(&out));
}

#[test]
fn csv_output_and_export() {
    let tmp = TempDir::new().unwrap();
    let cfg = MANUFACTURED.replace("dir = \"out\"", "dir = \"out\"\nformat = \"csv\"");
    write(tmp.path(), "run.toml", &cfg);
    assert_eq!(code(&run(tmp.path(), &["solve", "--config", "run.toml", "--quiet"])), 0);
    assert!(tmp.path().join("out/solution.csv").exists());
    let out = run(tmp.path(), &["export", "out/solution.json", "--out", "exp", "--quiet"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let obj = fs::read_to_string(tmp.path().join("exp/mesh.obj")).unwrap();
    let verts: Vec<[f64; 3]> = obj
        .lines()
        .filter_map(|l| l.strip_prefix("v "))
        .map(|l| {
            let v: Vec<f64> = l.split_whitespace().map(|x| x.parse().unwrap()).collect();
            [v[0], v[1], v[2]]
        })
        .collect();
    assert_eq!(verts.len(), 12 * 24 + 2);
    assert!(verts.iter().all(|v| (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt() < 1.0));
    // divergence theorem: outward winding gives positive enclosed volume
    let mut volume = 0.0;
    for l in obj.lines().filter_map(|l| l.strip_prefix("f ")) {
        let i: Vec<usize> = l.split_whitespace().map(|x| x.parse::<usize>().unwrap() - 1).collect();
        let (a, b, c) = (verts[i[0]], verts[i[1]], verts[i[2]]);
        volume += (a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0]) + a[2] * (b[0] * c[1] - b[1] * c[0])) / 6.0;
    }
    let radius = (0.5f64).tanh();
    let ball = 4.0 / 3.0 * std::f64::consts::PI * radius.powi(3);
    assert!((volume - ball).abs() < 0.05 * ball, "{volume} vs {ball}");
    let csv = fs::read_to_string(tmp.path().join("exp/fields.csv")).unwrap();
    assert!(csv.starts_with("theta,phi,u,r,min_lambda,mean_curvature,shifted_gauss"));
}

#[test]
fn repeated_runs_are_bitwise_identical() {
    let tmp = TempDir::new().unwrap();
    let cfg = format!("seed = 11\n{}", MANUFACTURED.replace("[output]", "[start]\nnoise = 0.02\n[output]"));
    write(tmp.path(), "run.toml", &cfg);
    let a = run(tmp.path(), &["solve", "--config", "run.toml", "--out", "a", "--quiet"]);
    let b = run(tmp.path(), &["solve", "--config", "run.toml", "--out", "b", "--quiet"]);
    assert_eq!(code(&a), 0, "{}", stderr(&a));
    assert_eq!(code(&b), 0);
    let ta = fs::read(tmp.path().join("a/trace.json")).unwrap();
    assert_eq!(ta, fs::read(tmp.path().join("b/trace.json")).unwrap());
    assert_eq!(fs::read(tmp.path().join("a/solution.bin")).unwrap(), fs::read(tmp.path().join("b/solution.bin")).unwrap());

    // a different seed perturbs only the start; the t = 0 solve removes it
    let c = run(tmp.path(), &["solve", "--config", "run.toml", "--out", "c", "--seed", "12", "--quiet"]);
    assert_eq!(code(&c), 0);
    let (sa, sc) = (load_solution(&tmp.path().join("a/solution.json")).unwrap(), load_solution(&tmp.path().join("c/solution.json")).unwrap());
    let diff = sa.r.iter().zip(&sc.r).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    assert!(diff < 1e-9, "{diff}");
}
