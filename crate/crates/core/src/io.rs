//! Problem and solution files, column data and mesh export.
//!
//! Metadata lives in JSON; node data lives in a sidecar column file that is
//! either little-endian binary or CSV. Column files list nodes in grid order
//! (θ rows, φ fastest).

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grid::{GridError, GridSpec};
use crate::manufacture::{ManufactureOptions, Manufactured, TargetSurface};
use crate::problem::{Phi, ProblemError, ProblemSpec, RhsFamily};

pub const FORMAT_VERSION: u32 = 1;
pub const PROBLEM_FORMAT: &str = "shifted-gauss/problem";
pub const SOLUTION_FORMAT: &str = "shifted-gauss/solution";
const MAGIC: &[u8; 8] = b"SGCOLUMN";

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Json { path: PathBuf, source: serde_json::Error },
    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Problem(#[from] ProblemError),
}

pub type IoResult<T> = Result<T, IoError>;

fn format_err(path: &Path, message: impl Into<String>) -> IoError {
    IoError::Format { path: path.to_path_buf(), message: message.into() }
}

fn read_bytes(path: &Path) -> IoResult<Vec<u8>> {
    fs::read(path).map_err(|source| IoError::Io { path: path.to_path_buf(), source })
}

fn write_bytes(path: &Path, bytes: &[u8]) -> IoResult<()> {
    fs::write(path, bytes).map_err(|source| IoError::Io { path: path.to_path_buf(), source })
}

fn read_json<D: for<'de> Deserialize<'de>>(path: &Path) -> IoResult<D> {
    let bytes = read_bytes(path)?;
    serde_json::from_slice(&bytes).map_err(|source| IoError::Json { path: path.to_path_buf(), source })
}

fn write_json<S: Serialize>(path: &Path, value: &S) -> IoResult<()> {
    let mut text = serde_json::to_string_pretty(value).expect("metadata serializes");
    text.push('\n');
    write_bytes(path, text.as_bytes())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ColumnFormat {
    #[default]
    Binary,
    Csv,
}

impl ColumnFormat {
    pub fn extension(self) -> &'static str {
        match self {
            ColumnFormat::Binary => "bin",
            ColumnFormat::Csv => "csv",
        }
    }
}

/// Named per-node columns on one grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Columns {
    pub spec: GridSpec,
    pub names: Vec<String>,
    pub data: Vec<Vec<f64>>,
}

impl Columns {
    pub fn new(spec: GridSpec) -> Self {
        Self { spec, names: Vec::new(), data: Vec::new() }
    }

    pub fn push(&mut self, name: impl Into<String>, values: Vec<f64>) {
        assert_eq!(values.len(), self.spec.node_count(), "column length must match the grid");
        self.names.push(name.into());
        self.data.push(values);
    }

    pub fn get(&self, name: &str) -> Option<&[f64]> {
        self.names.iter().position(|n| n == name).map(|i| self.data[i].as_slice())
    }

    fn require(&self, name: &str, path: &Path) -> IoResult<Vec<f64>> {
        self.get(name).map(<[f64]>::to_vec).ok_or_else(|| format_err(path, format!("missing column `{name}`")))
    }
}

/// Sidecar reference stored in metadata. `file` is relative to the JSON file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataRef {
    pub file: String,
    pub format: ColumnFormat,
    pub columns: Vec<String>,
}

fn order_code(spec: &GridSpec) -> u32 {
    spec.order.order() as u32
}

pub fn encode_binary(cols: &Columns) -> Vec<u8> {
    let spec = &cols.spec;
    let mut out = Vec::with_capacity(64 + 8 * cols.data.len() * spec.node_count());
    out.extend_from_slice(MAGIC);
    for v in [FORMAT_VERSION, spec.dim as u32, spec.n_theta as u32, spec.n_phi as u32, order_code(spec), cols.names.len() as u32] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    for name in &cols.names {
        out.extend_from_slice(&(name.len() as u32).to_le_bytes());
        out.extend_from_slice(name.as_bytes());
    }
    for col in &cols.data {
        for x in col {
            out.extend_from_slice(&x.to_le_bytes());
        }
    }
    out
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
    path: &'a Path,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> IoResult<&'a [u8]> {
        if self.bytes.len() - self.pos < n {
            return Err(format_err(
                self.path,
                format!("truncated column file: needed {n} bytes at offset {}, {} left", self.pos, self.bytes.len() - self.pos),
            ));
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u32(&mut self) -> IoResult<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("four bytes")))
    }
}

/// Decodes a binary column file and checks it against the expected grid.
pub fn decode_binary(bytes: &[u8], expected: &GridSpec, path: &Path) -> IoResult<Columns> {
    let mut c = Cursor { bytes, pos: 0, path };
    if c.take(8)? != MAGIC {
        return Err(format_err(path, "not a column file (bad magic)"));
    }
    let version = c.u32()?;
    if version != FORMAT_VERSION {
        return Err(format_err(path, format!("unsupported column file version {version}")));
    }
    let header = [c.u32()?, c.u32()?, c.u32()?, c.u32()?];
    let want = [expected.dim as u32, expected.n_theta as u32, expected.n_phi as u32, order_code(expected)];
    if header != want {
        return Err(format_err(
            path,
            format!("grid (dim, n_theta, n_phi, order) = {header:?} does not match metadata {want:?}"),
        ));
    }
    let ncols = c.u32()? as usize;
    let mut names = Vec::with_capacity(ncols);
    for _ in 0..ncols {
        let len = c.u32()? as usize;
        let raw = c.take(len)?;
        names.push(String::from_utf8(raw.to_vec()).map_err(|_| format_err(path, "column name is not UTF-8"))?);
    }
    let n = expected.node_count();
    let mut data = Vec::with_capacity(ncols);
    for _ in 0..ncols {
        let raw = c.take(8 * n)?;
        data.push(raw.chunks_exact(8).map(|b| f64::from_le_bytes(b.try_into().expect("eight bytes"))).collect());
    }
    if c.pos != bytes.len() {
        return Err(format_err(path, format!("{} trailing bytes after column data", bytes.len() - c.pos)));
    }
    Ok(Columns { spec: *expected, names, data })
}

/// CSV with a `theta,phi` prefix. Values use the shortest round-trip form.
pub fn encode_csv(cols: &Columns) -> String {
    let spec = &cols.spec;
    let mut out = String::from("theta,phi");
    for name in &cols.names {
        out.push(',');
        out.push_str(name);
    }
    out.push('\n');
    for node in 0..spec.node_count() {
        let _ = write!(out, "{},{}", spec.theta::<f64>(node / spec.n_phi), spec.phi::<f64>(node % spec.n_phi));
        for col in &cols.data {
            let _ = write!(out, ",{}", col[node]);
        }
        out.push('\n');
    }
    out
}

pub fn decode_csv(text: &str, expected: &GridSpec, path: &Path) -> IoResult<Columns> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| format_err(path, "empty CSV"))?;
    let fields: Vec<&str> = header.split(',').map(str::trim).collect();
    if fields.len() < 2 || fields[0] != "theta" || fields[1] != "phi" {
        return Err(format_err(path, "CSV header must start with theta,phi"));
    }
    let names: Vec<String> = fields[2..].iter().map(|s| s.to_string()).collect();
    let n = expected.node_count();
    let mut data = vec![Vec::with_capacity(n); names.len()];
    let mut rows = 0;
    for (i, line) in lines.enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let line_no = i + 2;
        if rows == n {
            return Err(format_err(path, format!("line {line_no}: more rows than the {n} grid nodes")));
        }
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() != names.len() + 2 {
            return Err(format_err(path, format!("line {line_no}: expected {} fields, got {}", names.len() + 2, parts.len())));
        }
        let parse = |s: &str| -> IoResult<f64> {
            s.trim().parse::<f64>().map_err(|e| format_err(path, format!("line {line_no}: `{s}`: {e}")))
        };
        let (theta, phi) = (parse(parts[0])?, parse(parts[1])?);
        let (et, ep) = (expected.theta::<f64>(rows / expected.n_phi), expected.phi::<f64>(rows % expected.n_phi));
        if (theta - et).abs() > 1e-12 || (phi - ep).abs() > 1e-12 {
            return Err(format_err(path, format!("line {line_no}: node ({theta}, {phi}) is not grid node ({et}, {ep})")));
        }
        for (col, s) in data.iter_mut().zip(&parts[2..]) {
            col.push(parse(s)?);
        }
        rows += 1;
    }
    if rows != n {
        return Err(format_err(path, format!("CSV has {rows} rows, grid has {n} nodes")));
    }
    Ok(Columns { spec: *expected, names, data })
}

pub fn write_columns(path: &Path, format: ColumnFormat, cols: &Columns) -> IoResult<()> {
    match format {
        ColumnFormat::Binary => write_bytes(path, &encode_binary(cols)),
        ColumnFormat::Csv => write_bytes(path, encode_csv(cols).as_bytes()),
    }
}

pub fn read_columns(path: &Path, format: ColumnFormat, expected: &GridSpec) -> IoResult<Columns> {
    let bytes = read_bytes(path)?;
    match format {
        ColumnFormat::Binary => decode_binary(&bytes, expected, path),
        ColumnFormat::Csv => {
            let text = String::from_utf8(bytes).map_err(|_| format_err(path, "CSV is not UTF-8"))?;
            decode_csv(&text, expected, path)
        }
    }
}

fn sidecar(json_path: &Path, format: ColumnFormat) -> (PathBuf, String) {
    let path = json_path.with_extension(format.extension());
    let name = path.file_name().expect("json path has a file name").to_string_lossy().into_owned();
    (path, name)
}

fn resolve_sidecar(json_path: &Path, data: &DataRef) -> PathBuf {
    json_path.parent().unwrap_or_else(|| Path::new("")).join(&data.file)
}

/// How `f` is stored in a problem file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RhsSource {
    RadialExponential { r0: f64, rate: f64, power: f64 },
    Constant { value: f64 },
    /// Columns `amplitude` and `center`; `f = amplitude · exp(beta (center − r))`.
    Separable { grid: GridSpec, beta: f64 },
    /// One column per radius, `f_0 … f_{m−1}`; local four-point Lagrange cubic in `r`.
    Tabulated { grid: GridSpec, radii: Vec<f64>, interpolation: String },
}

pub const TABLE_INTERPOLATION: &str = "lagrange4";

/// Provenance of a manufactured problem. The exact radius is column `r_exact`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManufacturedMeta {
    pub target: TargetSurface,
    pub options: ManufactureOptions,
    pub probe_min_lambda: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub format: String,
    pub version: u32,
    pub dim: usize,
    pub r1: f64,
    pub r2: f64,
    pub phi: Phi<f64>,
    pub f: RhsSource,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub manufactured: Option<ManufacturedMeta>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub data: Option<DataRef>,
}

/// A problem read from disk.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedProblem {
    pub problem: ProblemSpec<f64>,
    pub manufactured: Option<ManufacturedMeta>,
    pub exact_radius: Option<Vec<f64>>,
}

/// Writes `problem` to `json_path`, with node data (if any) in a sidecar next to it.
pub fn save_problem(
    json_path: &Path,
    problem: &ProblemSpec<f64>,
    manufactured: Option<&Manufactured<f64>>,
    format: ColumnFormat,
) -> IoResult<()> {
    let mut cols = problem.f.grid().map(|g| Columns::new(*g));
    let f = match &problem.f {
        RhsFamily::RadialExponential { r0, rate, power } => RhsSource::RadialExponential { r0: *r0, rate: *rate, power: *power },
        RhsFamily::Constant { value } => RhsSource::Constant { value: *value },
        RhsFamily::Separable { grid, amplitude, center, beta } => {
            let c = cols.as_mut().expect("node data");
            c.push("amplitude", amplitude.clone());
            c.push("center", center.clone());
            RhsSource::Separable { grid: *grid, beta: *beta }
        }
        RhsFamily::Tabulated { grid, radii, values } => {
            let c = cols.as_mut().expect("node data");
            for (i, row) in values.iter().enumerate() {
                c.push(format!("f_{i}"), row.clone());
            }
            RhsSource::Tabulated { grid: *grid, radii: radii.clone(), interpolation: TABLE_INTERPOLATION.into() }
        }
    };
    let meta = manufactured.map(|m| ManufacturedMeta {
        target: m.target,
        options: m.options,
        probe_min_lambda: m.probe_min_lambda,
    });
    if let Some(m) = manufactured {
        let spec = cols.as_ref().map(|c| c.spec).or_else(|| problem.f.grid().copied());
        let c = cols.get_or_insert_with(|| Columns::new(spec.expect("manufactured problems are grid-bound")));
        c.push("r_exact", m.exact_radius.clone());
    }
    let data = match &cols {
        Some(c) => {
            let (path, file) = sidecar(json_path, format);
            write_columns(&path, format, c)?;
            Some(DataRef { file, format, columns: c.names.clone() })
        }
        None => None,
    };
    let file = ProblemFile {
        format: PROBLEM_FORMAT.into(),
        version: FORMAT_VERSION,
        dim: problem.dim,
        r1: problem.r1,
        r2: problem.r2,
        phi: problem.phi,
        f,
        manufactured: meta,
        data,
    };
    write_json(json_path, &file)
}

pub fn load_problem(json_path: &Path) -> IoResult<LoadedProblem> {
    let file: ProblemFile = read_json(json_path)?;
    check_header(json_path, &file.format, PROBLEM_FORMAT, file.version)?;
    let cols = match (&file.data, node_grid(&file.f)) {
        (Some(d), Some(grid)) => Some(read_columns(&resolve_sidecar(json_path, d), d.format, &grid)?),
        (None, Some(_)) => return Err(format_err(json_path, "grid-bound f needs a `data` entry")),
        _ => None,
    };
    let data_path = file.data.as_ref().map(|d| resolve_sidecar(json_path, d)).unwrap_or_default();
    let f = match &file.f {
        RhsSource::RadialExponential { r0, rate, power } => RhsFamily::RadialExponential { r0: *r0, rate: *rate, power: *power },
        RhsSource::Constant { value } => RhsFamily::Constant { value: *value },
        RhsSource::Separable { grid, beta } => {
            let c = cols.as_ref().expect("columns read");
            RhsFamily::Separable {
                grid: *grid,
                amplitude: c.require("amplitude", &data_path)?,
                center: c.require("center", &data_path)?,
                beta: *beta,
            }
        }
        RhsSource::Tabulated { grid, radii, interpolation } => {
            if interpolation != TABLE_INTERPOLATION {
                return Err(format_err(json_path, format!("unknown interpolation `{interpolation}`")));
            }
            let c = cols.as_ref().expect("columns read");
            let values = (0..radii.len()).map(|i| c.require(&format!("f_{i}"), &data_path)).collect::<IoResult<_>>()?;
            RhsFamily::Tabulated { grid: *grid, radii: radii.clone(), values }
        }
    };
    let exact_radius = match (&file.manufactured, &cols) {
        (Some(_), Some(c)) => Some(c.require("r_exact", &data_path)?),
        _ => None,
    };
    let problem = ProblemSpec { dim: file.dim, f, r1: file.r1, r2: file.r2, phi: file.phi };
    Ok(LoadedProblem { problem, manufactured: file.manufactured, exact_radius })
}

fn node_grid(f: &RhsSource) -> Option<GridSpec> {
    match f {
        RhsSource::Separable { grid, .. } | RhsSource::Tabulated { grid, .. } => Some(*grid),
        _ => None,
    }
}

fn check_header(path: &Path, format: &str, expected: &str, version: u32) -> IoResult<()> {
    if format != expected {
        return Err(format_err(path, format!("format is `{format}`, expected `{expected}`")));
    }
    if version != FORMAT_VERSION {
        return Err(format_err(path, format!("unsupported version {version}")));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolutionMeta {
    pub format: String,
    pub version: u32,
    pub grid: GridSpec,
    /// Reference radius `c` of `r = 2 artanh(tanh(c/2) e^u)`.
    pub reference_radius: f64,
    pub t: f64,
    pub residual_norm: f64,
    pub min_lambda: f64,
    pub data: DataRef,
}

/// A grid solution with the residual recorded when it was written.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub grid: GridSpec,
    pub reference_radius: f64,
    pub t: f64,
    pub residual_norm: f64,
    pub min_lambda: f64,
    pub u: Vec<f64>,
    /// Radii, stored for convenience; `u` is authoritative.
    pub r: Vec<f64>,
}

pub fn save_solution(json_path: &Path, sol: &Solution, format: ColumnFormat) -> IoResult<()> {
    let mut cols = Columns::new(sol.grid);
    cols.push("u", sol.u.clone());
    cols.push("r", sol.r.clone());
    let (path, file) = sidecar(json_path, format);
    write_columns(&path, format, &cols)?;
    let meta = SolutionMeta {
        format: SOLUTION_FORMAT.into(),
        version: FORMAT_VERSION,
        grid: sol.grid,
        reference_radius: sol.reference_radius,
        t: sol.t,
        residual_norm: sol.residual_norm,
        min_lambda: sol.min_lambda,
        data: DataRef { file, format, columns: cols.names },
    };
    write_json(json_path, &meta)
}

pub fn load_solution(json_path: &Path) -> IoResult<Solution> {
    let meta: SolutionMeta = read_json(json_path)?;
    check_header(json_path, &meta.format, SOLUTION_FORMAT, meta.version)?;
    meta.grid.validate()?;
    let path = resolve_sidecar(json_path, &meta.data);
    let cols = read_columns(&path, meta.data.format, &meta.grid)?;
    let u = cols.require("u", &path)?;
    if let Some(i) = u.iter().position(|x| !x.is_finite()) {
        return Err(format_err(&path, format!("u is not finite at node {i}")));
    }
    let r = cols.require("r", &path)?;
    Ok(Solution {
        grid: meta.grid,
        reference_radius: meta.reference_radius,
        t: meta.t,
        residual_norm: meta.residual_norm,
        min_lambda: meta.min_lambda,
        u,
        r,
    })
}

fn ball_point(x: [f64; 3], r: f64) -> [f64; 3] {
    let s = (0.5 * r).tanh();
    [s * x[0], s * x[1], s * x[2]]
}

/// Mesh of the graph in the Poincaré ball model, `y = tanh(r/2) x`.
///
/// On S² the staggered grid gives quads between rows, split into triangles,
/// plus a fan around each pole vertex; faces wind outward. On S¹ the curve is
/// written as a closed polyline in the `z = 0` plane.
pub fn obj_string(spec: &GridSpec, radii: &[f64]) -> String {
    assert_eq!(radii.len(), spec.node_count());
    let mut out = String::new();
    let (nt, np) = (spec.n_theta, spec.n_phi);
    for node in 0..spec.node_count() {
        let x = spec.chart_point::<f64>(node).unit_vector();
        let y = ball_point(x, radii[node]);
        let _ = writeln!(out, "v {} {} {}", y[0], y[1], y[2]);
    }
    if spec.dim == 1 {
        out.push('l');
        for k in 0..=np {
            let _ = write!(out, " {}", k % np + 1);
        }
        out.push('\n');
        return out;
    }
    // pole radius from the axisymmetric part of the two nearest rows
    let ring_mean = |j: usize| radii[j * np..(j + 1) * np].iter().sum::<f64>() / np as f64;
    let north = (9.0 * ring_mean(0) - ring_mean(1)) / 8.0;
    let south = (9.0 * ring_mean(nt - 1) - ring_mean(nt - 2)) / 8.0;
    for (z, r) in [(1.0, north), (-1.0, south)] {
        let y = ball_point([0.0, 0.0, z], r);
        let _ = writeln!(out, "v {} {} {}", y[0], y[1], y[2]);
    }
    let v = |j: usize, k: usize| j * np + (k % np) + 1;
    let (n_pole, s_pole) = (nt * np + 1, nt * np + 2);
    for k in 0..np {
        let _ = writeln!(out, "f {} {} {}", n_pole, v(0, k), v(0, k + 1));
    }
    for j in 0..nt - 1 {
        for k in 0..np {
            let _ = writeln!(out, "f {} {} {}", v(j, k), v(j + 1, k), v(j + 1, k + 1));
            let _ = writeln!(out, "f {} {} {}", v(j, k), v(j + 1, k + 1), v(j, k + 1));
        }
    }
    for k in 0..np {
        let _ = writeln!(out, "f {} {} {}", s_pole, v(nt - 1, k + 1), v(nt - 1, k));
    }
    out
}

pub fn write_obj(path: &Path, spec: &GridSpec, radii: &[f64]) -> IoResult<()> {
    write_bytes(path, obj_string(spec, radii).as_bytes())
}
