//! Command line front end: `verify`, `analyze`, `simulate` and `sweep`.
//!
//! Networks are read from JSON files of the form
//!
//! ```json
//! {"d": 2,
//!  "functions": [{"kind": "hill", "lambda": 0.0, "r": 2.0},
//!                {"kind": "hill", "lambda": 0.0, "r": 2.0}],
//!  "alpha": [3.0, 3.0],
//!  "hypotheses_check": true}
//! ```
//!
//! Reports go to stdout as JSON, diagnostics to stderr. Exit codes: 0
//! success, 1 input error, 2 hypothesis violation, 3 numeric failure.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::atlas::{self, Axis, Format, SweepSpec};
use crate::dynamics::{self, AttractorReport, SimulationOptions, StepStats};
use crate::error::Error;
use crate::network::{CyclicNetwork, DEFAULT_TOL};
use crate::regulation::{Convexity, Monotonicity, RegulationFunction, RegulationKind};
use crate::stability::{classify_network, thresholds, RegimeReport, Thresholds};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_HYPOTHESIS: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

const DEFAULT_RES: usize = 61;

#[derive(Debug, Parser)]
#[command(name = "cyclone", version, about = "Equilibria, spectra and regimes of cyclic feedback loops")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check the convexity and boundedness hypotheses of a network.
    Verify {
        spec: PathBuf,
    },
    /// Find equilibria, spectra and the regime of a network.
    Analyze {
        spec: PathBuf,
        /// Fixed point tolerance.
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        /// JSON report (default).
        #[arg(long, conflicts_with = "table")]
        json: bool,
        /// Plain text table instead of JSON.
        #[arg(long)]
        table: bool,
        /// Write the report to a file instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Integrate a trajectory and identify its attractor.
    Simulate(SimulateArgs),
    /// Classify a grid of production rates.
    Sweep(SweepArgs),
}

#[derive(Debug, Args)]
struct SimulateArgs {
    spec: PathBuf,
    /// Initial state, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    x0: Vec<f64>,
    #[arg(long, default_value_t = dynamics::DEFAULT_T_END)]
    t_end: f64,
    #[arg(long, default_value_t = dynamics::DEFAULT_RTOL)]
    rtol: f64,
    #[arg(long, default_value_t = dynamics::DEFAULT_ATOL)]
    atol: f64,
    #[arg(long, default_value_t = dynamics::DEFAULT_TRANSIENT)]
    transient: f64,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: f64,
    /// Trajectory CSV output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SweepArgs {
    spec: PathBuf,
    /// Swept alpha indices: `1` or `1,2` for one or two axes, `1+2` ties
    /// components to one axis, `diag` ties all of them.
    #[arg(long)]
    axis: String,
    /// `lo:hi`, once for all axes or once per axis.
    #[arg(long, required = true, allow_hyphen_values = true)]
    range: Vec<String>,
    /// Grid points, once for all axes or once per axis.
    #[arg(long, default_values_t = [DEFAULT_RES])]
    res: Vec<usize>,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: f64,
    /// Output prefix for `<prefix>.csv` and, for 2-axis sweeps, `<prefix>.svg`.
    #[arg(long, default_value = "atlas")]
    out: String,
}

/// Network description file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkSpecFile {
    pub d: usize,
    pub functions: Vec<RegulationKind<f64>>,
    pub alpha: Vec<f64>,
    #[serde(default)]
    pub hypotheses_check: bool,
}

impl NetworkSpecFile {
    pub fn parse(text: &str) -> Result<Self, String> {
        serde_json::from_str(text).map_err(|e| format!("malformed network spec: {e}"))
    }

    /// Validates field by field so that messages name the offending entry.
    pub fn build(&self) -> Result<CyclicNetwork<f64>, String> {
        if self.d < 2 {
            return Err(format!("d: must be at least 2, got {}", self.d));
        }
        if self.functions.len() != self.d {
            return Err(format!("functions: d = {} but {} functions given", self.d, self.functions.len()));
        }
        if self.alpha.len() != self.d {
            return Err(format!("alpha: d = {} but {} values given", self.d, self.alpha.len()));
        }
        let mut functions = Vec::with_capacity(self.d);
        for (i, kind) in self.functions.iter().enumerate() {
            functions.push(RegulationFunction::new(*kind).map_err(|e| format!("functions[{i}]: {e}"))?);
        }
        for (i, a) in self.alpha.iter().enumerate() {
            if !(*a > 0.0 && a.is_finite()) {
                return Err(format!("alpha[{i}]: must be finite and > 0, got {a}"));
            }
        }
        CyclicNetwork::new(functions, self.alpha.clone()).map_err(|e| e.to_string())
    }
}

/// Defaults and overrides in effect for a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Settings {
    pub tol: f64,
    pub rtol: f64,
    pub atol: f64,
    pub t_end: f64,
    pub transient: f64,
}

impl Default for Settings {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            rtol: dynamics::DEFAULT_RTOL,
            atol: dynamics::DEFAULT_ATOL,
            t_end: dynamics::DEFAULT_T_END,
            transient: dynamics::DEFAULT_TRANSIENT,
        }
    }
}

impl Settings {
    fn with_tol(tol: f64) -> Self {
        Self { tol, ..Self::default() }
    }
}

/// Hypothesis check of one regulation function.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FunctionCheck {
    pub index: usize,
    pub function: RegulationKind<f64>,
    pub monotonicity: Monotonicity,
    pub bounded: bool,
    pub supremum: Option<f64>,
    pub log_sensitivity_sup: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<Convexity<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate_error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub settings: Settings,
    pub d: usize,
    pub n: usize,
    pub parity: &'static str,
    #[serde(rename = "D")]
    pub d_value: f64,
    pub thresholds: Thresholds<f64>,
    pub functions: Vec<FunctionCheck>,
    /// Every function passed the convexity scan and at least one strictly.
    pub certified: bool,
    /// Regimes reachable for some choice of production rates.
    pub possible: String,
}

/// Runs the hypothesis checks on `net`.
pub fn verify_network(net: &CyclicNetwork<f64>) -> Result<VerifyReport, Error> {
    let d = net.dim();
    let n = net.decreasing_count();
    let th = thresholds::<f64>(d)?;
    let d_value = net.d_value();
    let functions: Vec<FunctionCheck> = net
        .functions()
        .iter()
        .enumerate()
        .map(|(i, f)| {
            let (certificate, certificate_error) = match f.certify() {
                Ok(c) => (Some(c), None),
                Err(e) => (None, Some(e.to_string())),
            };
            FunctionCheck {
                index: i + 1,
                function: f.kind(),
                monotonicity: f.monotonicity(),
                bounded: f.is_bounded(),
                supremum: f.supremum(),
                log_sensitivity_sup: f.log_sensitivity_sup(),
                certificate,
                certificate_error,
            }
        })
        .collect();
    let all_convex = functions.iter().all(|c| matches!(c.certificate, Some(ref cert) if !cert.is_violated()));
    let any_strict = functions.iter().any(|c| matches!(c.certificate, Some(ref cert) if cert.is_strict()));
    Ok(VerifyReport {
        settings: Settings::default(),
        d,
        n,
        parity: if n % 2 == 0 { "even" } else { "odd" },
        d_value,
        possible: possible_regimes(n, d_value, &th),
        thresholds: th,
        functions,
        certified: all_convex && any_strict,
    })
}

fn possible_regimes(n: usize, d_value: f64, th: &Thresholds<f64>) -> String {
    if n % 2 == 0 {
        if d_value <= 1.0 {
            "monostable: unique globally attracting equilibrium for every alpha".into()
        } else if th.t_even.is_some_and(|t| d_value > t) {
            "bistability possible; periodic orbits possible".into()
        } else {
            "bistability possible".into()
        }
    } else if d_value > th.t_odd {
        "oscillation possible".into()
    } else {
        "stable equilibrium for every alpha".into()
    }
}

#[derive(Debug)]
enum Failure {
    Input(String),
    Hypothesis(String),
    Numeric(String),
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Input(_) => EXIT_INPUT,
            Failure::Hypothesis(_) => EXIT_HYPOTHESIS,
            Failure::Numeric(_) => EXIT_NUMERIC,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Input(m) | Failure::Hypothesis(m) | Failure::Numeric(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Domain { .. }
            | Error::InvalidRegulation(_)
            | Error::InvalidNetwork(_)
            | Error::InvalidInterval { .. }
            | Error::InvalidDimension(_)
            | Error::InvalidSweep(_)
            | Error::Format(_) => Failure::Input(e.to_string()),
            Error::Singular { .. }
            | Error::ConvergenceFailure { .. }
            | Error::SuspectCount { .. }
            | Error::StepSizeUnderflow { .. }
            | Error::StepLimit { .. }
            | Error::Internal(_) => Failure::Numeric(e.to_string()),
        }
    }
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure::Input(format!("{}: {e}", path.display()))
}

fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

fn load(path: &Path) -> Result<(NetworkSpecFile, CyclicNetwork<f64>), Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| io_failure(path, e))?;
    let spec = NetworkSpecFile::parse(&text).map_err(Failure::Input)?;
    let net = spec.build().map_err(Failure::Input)?;
    Ok((spec, net))
}

fn require_hypotheses(spec: &NetworkSpecFile, net: &CyclicNetwork<f64>) -> Result<(), Failure> {
    if !spec.hypotheses_check {
        return Ok(());
    }
    let report = verify_network(net)?;
    if report.certified {
        Ok(())
    } else {
        Err(Failure::Hypothesis(format!(
            "hypotheses not certified; run `cyclone verify` for details\n{}",
            json(&report).trim_end()
        )))
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    std::fs::write(path, bytes).map_err(|e| io_failure(path, e))
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, S>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let text = e.render().to_string();
            if code == EXIT_OK {
                let _ = out.write_all(text.as_bytes());
            } else {
                let _ = err.write_all(text.as_bytes());
            }
            return code;
        }
    };
    let result = match cli.command {
        Command::Verify { spec } => cmd_verify(&spec, out),
        Command::Analyze { spec, tol, table, out: path, .. } => cmd_analyze(&spec, tol, table, path.as_deref(), out),
        Command::Simulate(args) => cmd_simulate(&args, out),
        Command::Sweep(args) => cmd_sweep(&args, out, err),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message());
            f.code()
        }
    }
}

/// Entry point of the binary.
pub fn main_with_env() -> i32 {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock())
}

fn emit(out: &mut dyn Write, text: &str) -> Result<(), Failure> {
    out.write_all(text.as_bytes()).map_err(|e| Failure::Input(format!("stdout: {e}")))
}

fn cmd_verify(path: &Path, out: &mut dyn Write) -> Result<i32, Failure> {
    let (_, net) = load(path)?;
    let report = verify_network(&net)?;
    emit(out, &json(&report))?;
    Ok(if report.certified { EXIT_OK } else { EXIT_HYPOTHESIS })
}

#[derive(Serialize)]
struct AnalyzeOutput<'a> {
    settings: Settings,
    report: &'a RegimeReport<f64>,
}

fn cmd_analyze(path: &Path, tol: f64, table: bool, dest: Option<&Path>, out: &mut dyn Write) -> Result<i32, Failure> {
    if !(tol > 0.0) {
        return Err(Failure::Input(format!("--tol must be positive, got {tol}")));
    }
    let (spec, net) = load(path)?;
    require_hypotheses(&spec, &net)?;
    let report = classify_network(&net, tol, None)?;
    let settings = Settings::with_tol(tol);
    let text = if table { render_table(&report, &settings) } else { json(&AnalyzeOutput { settings, report: &report }) };
    match dest {
        Some(p) => write_file(p, text.as_bytes())?,
        None => emit(out, &text)?,
    }
    Ok(EXIT_OK)
}

fn fmt_vec(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.10}")).collect();
    format!("({})", parts.join(", "))
}

fn render_table(r: &RegimeReport<f64>, s: &Settings) -> String {
    let mut t = String::new();
    let _ = writeln!(t, "branch      {}", r.branch);
    let _ = writeln!(t, "d           {}", r.d);
    let _ = writeln!(t, "n           {} ({})", r.n, if r.n % 2 == 0 { "even" } else { "odd" });
    let _ = writeln!(t, "D           {}", r.d_value);
    let _ = writeln!(t, "t_odd       {}", r.thresholds.t_odd);
    let _ = writeln!(t, "t_even      {}", r.thresholds.t_even.map_or("-".into(), |v| v.to_string()));
    let _ = writeln!(t, "tol         {:e}", s.tol);
    let _ = writeln!(t, "rtol        {:e}", s.rtol);
    let _ = writeln!(t, "t_end       {}", s.t_end);
    let _ = writeln!(t, "transient   {}", s.transient);
    let _ = writeln!(t);
    let _ = writeln!(t, "{:>3}  {:>22}  {:>22}  {:>10}  {:>10}  x_bar", "#", "p", "G", "stable_dim", "hyperbolic");
    for (k, e) in r.equilibria.iter().enumerate() {
        let _ = writeln!(
            t,
            "{:>3}  {:>22.15e}  {:>22.15e}  {:>10}  {:>10}  {}",
            k + 1,
            e.equilibrium.p,
            e.equilibrium.g,
            e.spectrum.stable_dim,
            e.spectrum.hyperbolic,
            fmt_vec(&e.equilibrium.x_bar)
        );
    }
    t
}

#[derive(Serialize)]
struct SimulateOutput<'a> {
    settings: Settings,
    attractor: &'a AttractorReport<f64>,
    extended: bool,
    final_state: &'a [f64],
    steps: StepStats,
}

fn cmd_simulate(args: &SimulateArgs, out: &mut dyn Write) -> Result<i32, Failure> {
    let (spec, net) = load(&args.spec)?;
    if args.x0.len() != net.dim() {
        return Err(Failure::Input(format!("--x0: expected {} values, got {}", net.dim(), args.x0.len())));
    }
    if let Some((i, v)) = args.x0.iter().enumerate().find(|(_, v)| !(**v >= 0.0 && v.is_finite())) {
        return Err(Failure::Input(format!("--x0: entry {} is {v}; initial states must be finite and >= 0", i + 1)));
    }
    for (name, v) in [("--t-end", args.t_end), ("--rtol", args.rtol), ("--atol", args.atol), ("--tol", args.tol)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Failure::Input(format!("{name} must be finite and positive, got {v}")));
        }
    }
    if !(args.transient >= 0.0) {
        return Err(Failure::Input(format!("--transient must be >= 0, got {}", args.transient)));
    }
    require_hypotheses(&spec, &net)?;

    let mut opts = SimulationOptions::<f64> { t_end: args.t_end, tol: args.tol, ..Default::default() };
    opts.integrator.rel_tol = args.rtol;
    opts.integrator.abs_tol = args.atol;
    opts.detect.transient = args.transient;
    let sim = dynamics::simulate(&net, &args.x0, &opts)?;
    if let Some(p) = &args.out {
        let mut buf = Vec::new();
        sim.trajectory.write_csv(&mut buf).map_err(|e| io_failure(p, e))?;
        write_file(p, &buf)?;
    }
    let settings = Settings { tol: args.tol, rtol: args.rtol, atol: args.atol, t_end: args.t_end, transient: args.transient };
    emit(
        out,
        &json(&SimulateOutput {
            settings,
            attractor: &sim.report,
            extended: sim.extended,
            final_state: sim.trajectory.final_state(),
            steps: sim.trajectory.stats,
        }),
    )?;
    Ok(EXIT_OK)
}

/// Parses the `--axis` syntax into groups of 1-based indices.
pub fn parse_axes(text: &str, d: usize) -> Result<Vec<Vec<usize>>, String> {
    let text = text.trim();
    if text.eq_ignore_ascii_case("diag") {
        return Ok(vec![(1..=d).collect()]);
    }
    let axes: Vec<Vec<usize>> = text
        .split(',')
        .map(|group| {
            group
                .split('+')
                .map(|i| {
                    let i = i.trim();
                    match i.parse::<usize>() {
                        Ok(k) if (1..=d).contains(&k) => Ok(k),
                        _ => Err(format!("--axis: {i:?} is not an index in 1..={d}")),
                    }
                })
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<_, _>>()?;
    if axes.is_empty() || axes.len() > 2 {
        return Err(format!("--axis: expected one or two axes, got {}", axes.len()));
    }
    Ok(axes)
}

/// Parses `lo:hi`.
pub fn parse_range(text: &str) -> Result<(f64, f64), String> {
    let (lo, hi) = text.split_once(':').ok_or_else(|| format!("--range: expected lo:hi, got {text:?}"))?;
    let parse = |s: &str| s.trim().parse::<f64>().map_err(|_| format!("--range: {s:?} is not a number"));
    let (lo, hi) = (parse(lo)?, parse(hi)?);
    if !(lo > 0.0 && hi > lo && hi.is_finite()) {
        return Err(format!("--range: need 0 < lo < hi < inf, got {lo}:{hi}"));
    }
    Ok((lo, hi))
}

fn per_axis<T: Copy>(values: &[T], n: usize, name: &str) -> Result<Vec<T>, String> {
    match values.len() {
        1 => Ok(vec![values[0]; n]),
        k if k == n => Ok(values.to_vec()),
        k => Err(format!("{name}: given {k} times for {n} axes")),
    }
}

#[derive(Serialize)]
struct SweepOutput<'a> {
    settings: Settings,
    axes: &'a [Axis],
    cells: usize,
    errors: usize,
    transitions: Vec<atlas::Transition>,
    outputs: Vec<String>,
}

fn cmd_sweep(args: &SweepArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, Failure> {
    let (spec, net) = load(&args.spec)?;
    let groups = parse_axes(&args.axis, net.dim()).map_err(Failure::Input)?;
    let ranges: Vec<(f64, f64)> = args.range.iter().map(|r| parse_range(r)).collect::<Result<_, _>>().map_err(Failure::Input)?;
    let ranges = per_axis(&ranges, groups.len(), "--range").map_err(Failure::Input)?;
    let res = per_axis(&args.res, groups.len(), "--res").map_err(Failure::Input)?;
    let axes: Vec<Axis> = groups
        .into_iter()
        .zip(ranges)
        .zip(res)
        .map(|((indices, (lo, hi)), r)| Axis::new(indices, lo, hi, r))
        .collect();
    let mut sweep = SweepSpec::new(net.clone(), axes)?;
    if !(args.tol > 0.0) {
        return Err(Failure::Input(format!("--tol must be positive, got {}", args.tol)));
    }
    sweep.tol = args.tol;
    require_hypotheses(&spec, &net)?;

    let table = atlas::run_sweep(&sweep)?;
    let mut outputs = Vec::new();
    let csv_path = PathBuf::from(format!("{}.csv", args.out));
    write_file(&csv_path, &atlas::emit(&table, Format::Csv)?)?;
    outputs.push(csv_path.display().to_string());
    let transitions = if sweep.axes.len() == 2 {
        let svg_path = PathBuf::from(format!("{}.svg", args.out));
        write_file(&svg_path, &atlas::emit(&table, Format::Svg)?)?;
        outputs.push(svg_path.display().to_string());
        Vec::new()
    } else {
        atlas::boundary_trace(&sweep, &table)?
    };
    for t in &transitions {
        let _ = writeln!(err, "transition {} -> {} in [{}, {}]", t.branch_low, t.branch_high, t.alpha_low, t.alpha_high);
    }
    let errors = table.rows.iter().filter(|r| r.branch.is_none()).count();
    emit(
        out,
        &json(&SweepOutput {
            settings: Settings::with_tol(sweep.tol),
            axes: &sweep.axes,
            cells: table.rows.len(),
            errors,
            transitions,
            outputs,
        }),
    )?;
    Ok(EXIT_OK)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn axis_syntax() {
        assert_eq!(parse_axes("diag", 3).unwrap(), vec![vec![1, 2, 3]]);
        assert_eq!(parse_axes("1,2", 2).unwrap(), vec![vec![1], vec![2]]);
        assert_eq!(parse_axes("1+2", 3).unwrap(), vec![vec![1, 2]]);
        assert_eq!(parse_axes("1+3,2", 3).unwrap(), vec![vec![1, 3], vec![2]]);
        assert!(parse_axes("0", 2).is_err());
        assert!(parse_axes("3", 2).is_err());
        assert!(parse_axes("1,2,3", 3).is_err());
        assert!(parse_axes("a", 3).is_err());
    }

    #[test]
    fn range_syntax() {
        assert_eq!(parse_range("1:4").unwrap(), (1.0, 4.0));
        assert_eq!(parse_range("0.5:8").unwrap(), (0.5, 8.0));
        assert!(parse_range("4:1").is_err());
        assert!(parse_range("-1:1").is_err());
        assert!(parse_range("1-4").is_err());
    }

    #[test]
    fn spec_file_messages_name_fields() {
        let parse = |s: &str| NetworkSpecFile::parse(s).and_then(|f| f.build());
        let err = parse(r#"{"d":2,"functions":[{"kind":"hill","lambda":1.0,"r":2.0},{"kind":"hill","lambda":0.0,"r":2.0}],"alpha":[1,1]}"#).unwrap_err();
        assert!(err.starts_with("functions[0]"), "{err}");
        let err = parse(r#"{"d":2,"functions":[{"kind":"hill","lambda":0.0,"r":2.0},{"kind":"hill","lambda":0.0,"r":2.0}],"alpha":[1,0]}"#).unwrap_err();
        assert!(err.starts_with("alpha[1]"), "{err}");
        let err = parse(r#"{"d":3,"functions":[{"kind":"hill","lambda":0.0,"r":2.0},{"kind":"hill","lambda":0.0,"r":2.0}],"alpha":[1,1]}"#).unwrap_err();
        assert!(err.starts_with("functions:"), "{err}");
        let err = parse(r#"{"d":2,"functions":[]}"#).unwrap_err();
        assert!(err.contains("alpha"), "{err}");
    }

    #[test]
    fn possible_regimes_text() {
        let hill = |l: f64, r: f64| RegulationFunction::hill(l, r).unwrap();
        let rep = verify_network(&CyclicNetwork::uniform(3, hill(0.0, 4.0), 3.0).unwrap()).unwrap();
        assert_eq!((rep.n, rep.parity, rep.d_value, rep.thresholds.t_odd), (3, "odd", 64.0, 8.0));
        assert_eq!(rep.possible, "oscillation possible");
        assert!(rep.certified);
        let rep = verify_network(&CyclicNetwork::uniform(2, hill(0.0, 2.0), 3.0).unwrap()).unwrap();
        assert_eq!((rep.n, rep.parity, rep.d_value), (2, "even", 4.0));
        assert_eq!(rep.possible, "bistability possible");
    }
}
