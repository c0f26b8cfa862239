//! Command-line front end for `anosov-core`.
//!
//! Exit codes: 0 success, 1 bad input or usage, 2 numerical or resource
//! failure, 3 the pipeline ran but a verification check failed.

pub mod verify;

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anosov_core::exponents::{bin_for_form, delta_phi, entropy, generator_spread};
use anosov_core::hilbert::{pairs_csv, preserves_ellipsoid, quasi_metric_dimension, BoundaryPoint, ConvexDomain};
use anosov_core::limit_set::{limit_box_dimension, points_csv, sample_limit_set, LimitMetric, LimitSample};
use anosov_core::linalg::Projective;
use anosov_core::reps::config::parse_config;
use anosov_core::reps::{build_scenario, catalog, Scenario, ScenarioParams};
use anosov_core::words::{ball_csv, conjugacy_csv, enumerate_ball, enumerate_conjugacy_classes};
use anosov_core::{Error, LinearForm};
use clap::{Args, Parser, Subcommand};

pub use verify::{
    ellipsoid_center, run_hilbert, run_verify, Check, HilbertReport, RunOptions, StageError, VerificationReport,
    BAND_MIN_COUNT,
};

/// Environment variable holding the worker count.
pub const THREADS_ENV: &str = "ANOSOV_THREADS";

#[derive(Parser, Debug)]
#[command(name = "anosov", version, about = "Critical exponents and limit sets of Schottky-type subgroups of SL(n, R)")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Export the Cartan projections of the word ball as CSV.
    Ball(Common),
    /// Export conjugacy-class representatives and Jordan projections as CSV.
    Conjugacy(Common),
    /// Critical exponent of a linear form.
    Exponent(Common),
    /// Growth rate of conjugacy classes for a linear form.
    Entropy(Common),
    /// Sample the symmetric limit set and export its points as CSV.
    LimitSet(Common),
    /// Box-counting dimension of the sampled limit set.
    Boxdim(Common),
    /// Hilbert-metric checks for groups preserving the round ellipsoid.
    Hilbert(Common),
    /// Run the full pipeline and the inequality checks.
    Verify(Common),
    /// Print the scenario catalog.
    ListScenarios,
}

#[derive(Args, Debug, Clone, Default)]
struct Common {
    #[arg(long)]
    scenario: Option<String>,
    /// key=value file; command-line flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    max_len: Option<usize>,
    #[arg(long)]
    word_len: Option<usize>,
    #[arg(long)]
    count: Option<usize>,
    #[arg(long)]
    bin: Option<f64>,
    /// a12, a1n, e1 or custom:c1,...,cn
    #[arg(long)]
    form: Option<String>,
    /// sym, line, dual or gromov
    #[arg(long)]
    metric: Option<String>,
    #[arg(long)]
    scales: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long)]
    budget: Option<u64>,
    /// Include wall-clock time in JSON reports (breaks byte-identical output).
    #[arg(long)]
    timing: bool,
}

#[derive(Debug)]
enum CliError {
    Core(Error),
    Stage(StageError),
    Io(String),
    ChecksFailed(usize),
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) | CliError::Stage(StageError { error: e, .. }) => {
                if e.is_input_error() {
                    1
                } else {
                    2
                }
            }
            CliError::Io(_) => 1,
            CliError::ChecksFailed(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Stage(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "{e}"),
            CliError::ChecksFailed(n) => write!(f, "{n} verification check(s) failed"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

type CliResult<T> = Result<T, CliError>;

/// Flags and config file merged into one set of settings.
#[derive(Debug, Clone)]
struct Settings {
    scenario: String,
    params: ScenarioParams,
    n: Option<usize>,
    opts: RunOptions,
    form: String,
    metric: String,
    out: Option<PathBuf>,
    report: Option<PathBuf>,
    timing: bool,
}

fn config_error(msg: String) -> CliError {
    CliError::Core(Error::Config(msg))
}

fn parse_num<T: std::str::FromStr>(key: &str, v: &str) -> CliResult<T> {
    v.parse().map_err(|_| config_error(format!("{key}: cannot parse {v:?}")))
}

impl Settings {
    fn resolve(c: &Common) -> CliResult<Settings> {
        let mut s = Settings {
            scenario: String::new(),
            params: ScenarioParams::default(),
            n: None,
            opts: RunOptions::default(),
            form: "a12".into(),
            metric: "sym".into(),
            out: None,
            report: None,
            timing: false,
        };
        let mut name = None;
        if let Some(path) = &c.config {
            let text = fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            for (k, v) in parse_config(&text)? {
                s.apply(&k, &v, &mut name)?;
            }
        }
        if let Some(v) = &c.scenario {
            name = Some(v.clone());
        }
        if let Some(v) = c.seed {
            s.params.seed = v;
        }
        if let Some(v) = c.max_len {
            s.opts.max_len = v;
        }
        if let Some(v) = c.word_len {
            s.opts.word_len = v;
        }
        if let Some(v) = c.count {
            s.opts.count = v;
        }
        if let Some(v) = c.bin {
            s.opts.bin = v;
        }
        if let Some(v) = c.scales {
            s.opts.scales = v;
        }
        if let Some(v) = c.budget {
            s.opts.budget = v;
        }
        if let Some(v) = &c.form {
            s.form = v.clone();
        }
        if let Some(v) = &c.metric {
            s.metric = v.clone();
        }
        if c.out.is_some() {
            s.out = c.out.clone();
        }
        if c.report.is_some() {
            s.report = c.report.clone();
        }
        s.timing |= c.timing;
        s.scenario = name
            .ok_or_else(|| CliError::Core(Error::input("no scenario given (use --scenario or name= in --config)")))?;
        if !(s.opts.bin > 0.0 && s.opts.bin.is_finite()) {
            return Err(CliError::Core(Error::input(format!("bin must be positive, got {}", s.opts.bin))));
        }
        Ok(s)
    }

    fn apply(&mut self, key: &str, v: &str, name: &mut Option<String>) -> CliResult<()> {
        match key.replace('-', "_").as_str() {
            "name" | "scenario" => *name = Some(v.to_string()),
            "n" => self.n = Some(parse_num(key, v)?),
            "max_len" => self.opts.max_len = parse_num(key, v)?,
            "word_len" => self.opts.word_len = parse_num(key, v)?,
            "count" => self.opts.count = parse_num(key, v)?,
            "bin" => self.opts.bin = parse_num(key, v)?,
            "scales" => self.opts.scales = parse_num(key, v)?,
            "budget" => self.opts.budget = parse_num(key, v)?,
            "form" => self.form = v.to_string(),
            "metric" => self.metric = v.to_string(),
            "out" => self.out = Some(PathBuf::from(v)),
            "report" => self.report = Some(PathBuf::from(v)),
            "timing" => self.timing = parse_num(key, v)?,
            other => {
                if !self.params.set(other, v)? {
                    return Err(config_error(format!("unknown key {key:?}")));
                }
            }
        }
        Ok(())
    }

    fn scenario(&self) -> CliResult<Scenario> {
        let s = build_scenario(&self.scenario, &self.params)?;
        if let Some(n) = self.n {
            if n != s.ambient_n {
                return Err(config_error(format!("n = {n} but {} lives in dimension {}", s.name, s.ambient_n)));
            }
        }
        Ok(s)
    }
}

fn parse_form(spec: &str, n: usize) -> CliResult<LinearForm> {
    let f = match spec {
        "a12" => LinearForm::alpha(1, 2, n)?,
        "a1n" => LinearForm::alpha(1, n, n)?,
        "e1" => LinearForm::epsilon(1, n)?,
        other => {
            let Some(list) = other.strip_prefix("custom:") else {
                return Err(CliError::Core(Error::input(format!("unknown form {other:?}"))));
            };
            let coeffs = list
                .split(',')
                .map(|c| c.trim().parse::<f64>().map_err(|_| Error::input(format!("bad coefficient {c:?}"))))
                .collect::<Result<Vec<_>, _>>()?;
            if coeffs.len() != n {
                return Err(CliError::Core(Error::input(format!(
                    "form has {} coefficients, expected {n}",
                    coeffs.len()
                ))));
            }
            LinearForm::new(coeffs)?
        }
    };
    Ok(f)
}

fn write_output(path: Option<&Path>, text: &str) -> CliResult<()> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| CliError::Io(format!("{}: {e}", p.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes()).map_err(|e| CliError::Io(e.to_string()))
        }
    }
}

fn json_text(v: serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(&anosov_core::format::round_json(v)).expect("json");
    s.push('\n');
    s
}

/// JSON goes to `--report`, falling back to `--out`, then stdout.
fn write_json(s: &Settings, v: serde_json::Value) -> CliResult<()> {
    write_output(s.report.as_deref().or(s.out.as_deref()), &json_text(v))
}

fn sample(s: &Settings, sc: &Scenario) -> CliResult<LimitSample> {
    Ok(sample_limit_set(&sc.generators, s.opts.word_len, s.opts.count, sc.seed)?)
}

fn boundary_points(sample: &LimitSample) -> CliResult<Vec<BoundaryPoint>> {
    Ok(sample.points.iter().map(|p| BoundaryPoint::project_to_ellipsoid(p.line.unit())).collect::<Result<_, _>>()?)
}

fn require_ellipsoid(sc: &Scenario) -> CliResult<()> {
    if sc.generators.generators().iter().all(|g| preserves_ellipsoid(g, 1e-9)) {
        Ok(())
    } else {
        Err(CliError::Core(Error::Unsupported(format!("{} does not preserve the round ellipsoid", sc.name))))
    }
}

fn cmd_ball(s: &Settings) -> CliResult<()> {
    let sc = s.scenario()?;
    let entries = enumerate_ball(&sc.generators, s.opts.max_len, s.opts.budget)?;
    write_output(s.out.as_deref(), &ball_csv(&sc.generators, &entries))
}

fn cmd_conjugacy(s: &Settings) -> CliResult<()> {
    let sc = s.scenario()?;
    let classes = enumerate_conjugacy_classes(&sc.generators, s.opts.max_len, s.opts.budget)?;
    write_output(s.out.as_deref(), &conjugacy_csv(&sc.generators, &classes))
}

fn cmd_exponent(s: &Settings, classes: bool) -> CliResult<()> {
    let sc = s.scenario()?;
    let gs = &sc.generators;
    let phi = parse_form(&s.form, sc.ambient_n)?;
    let bin = bin_for_form(gs, &phi, s.opts.bin)?;
    let margin = generator_spread(gs, &phi)?;
    let est = if classes {
        let cls = enumerate_conjugacy_classes(gs, s.opts.max_len, s.opts.budget)?;
        entropy(&cls, &phi, bin, margin)?
    } else {
        let ball = anosov_core::words::ball_projections(gs, s.opts.max_len, s.opts.budget)?;
        delta_phi(&ball, &phi, bin, margin)?
    };
    write_json(s, est.to_json())
}

fn cmd_limit_set(s: &Settings) -> CliResult<()> {
    let sc = s.scenario()?;
    let sample = sample(s, &sc)?;
    write_output(s.out.as_deref(), &points_csv(&sc.generators, &sample.points))
}

fn cmd_boxdim(s: &Settings) -> CliResult<()> {
    let sc = s.scenario()?;
    let sample = sample(s, &sc)?;
    let metric = match s.metric.as_str() {
        "sym" => Some(LimitMetric::Sym),
        "line" => Some(LimitMetric::Line),
        "dual" => Some(LimitMetric::Dual),
        "gromov" => None,
        other => return Err(CliError::Core(Error::input(format!("unknown metric {other:?}")))),
    };
    let est = match metric {
        Some(m) => limit_box_dimension(&sample.points, m, s.opts.scales)?,
        None => {
            require_ellipsoid(&sc)?;
            let n = sc.ambient_n;
            quasi_metric_dimension(
                &boundary_points(&sample)?,
                &ConvexDomain::Ellipsoid(n),
                &ellipsoid_center(n),
                s.opts.scales,
            )?
        }
    };
    write_json(s, est.to_json())
}

fn cmd_hilbert(s: &Settings) -> CliResult<()> {
    let report = run_hilbert(&s.scenario, &s.params, &s.opts).map_err(CliError::Stage)?;
    if let Some(out) = &s.out {
        write_output(Some(out), &pairs_csv(&report.comparison, &report.pairs))?;
    }
    write_output(s.report.as_deref(), &report.to_json())
}

fn cmd_verify(s: &Settings) -> CliResult<()> {
    let report = run_verify(&s.scenario, &s.params, &s.opts, s.timing).map_err(CliError::Stage)?;
    if let Some(n) = s.n {
        if n != report.scenario.ambient_n {
            return Err(config_error(format!(
                "n = {n} but {} lives in dimension {}",
                report.scenario.name, report.scenario.ambient_n
            )));
        }
    }
    let text = report.to_json();
    write_output(s.report.as_deref().or(s.out.as_deref()), &text)?;
    let failed: Vec<&Check> = report.inequality_checks.iter().filter(|c| !c.pass).collect();
    for c in &failed {
        eprintln!("FAIL {}: lhs {} rhs {} margin {} tolerance {}", c.name, c.lhs, c.rhs, c.margin, c.tolerance);
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::ChecksFailed(failed.len()))
    }
}

fn list_scenarios() -> CliResult<()> {
    let text: String = catalog().iter().map(|(name, desc)| format!("{name}\t{desc}\n")).collect();
    write_output(None, &text)
}

/// Installs the global worker pool from [`THREADS_ENV`], if set.
pub fn init_threads() -> Result<(), String> {
    let Ok(v) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("{THREADS_ENV}: expected a positive integer, got {v:?}"))?;
    // a pool that already exists (as in tests) is fine
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

/// Parses `argv` (including the program name), runs the command and returns
/// the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
        }
    };
    if let Err(e) = init_threads() {
        eprintln!("error: {e}");
        return 1;
    }
    let result = match &cli.command {
        Command::ListScenarios => list_scenarios(),
        Command::Ball(c) => Settings::resolve(c).and_then(|s| cmd_ball(&s)),
        Command::Conjugacy(c) => Settings::resolve(c).and_then(|s| cmd_conjugacy(&s)),
        Command::Exponent(c) => Settings::resolve(c).and_then(|s| cmd_exponent(&s, false)),
        Command::Entropy(c) => Settings::resolve(c).and_then(|s| cmd_exponent(&s, true)),
        Command::LimitSet(c) => Settings::resolve(c).and_then(|s| cmd_limit_set(&s)),
        Command::Boxdim(c) => Settings::resolve(c).and_then(|s| cmd_boxdim(&s)),
        Command::Hilbert(c) => Settings::resolve(c).and_then(|s| cmd_hilbert(&s)),
        Command::Verify(c) => Settings::resolve(c).and_then(|s| cmd_verify(&s)),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn common(scenario: &str) -> Common {
        Common { scenario: Some(scenario.into()), ..Default::default() }
    }

    #[test]
    fn forms_parse() {
        assert_eq!(parse_form("a1n", 3).unwrap(), LinearForm::alpha(1, 3, 3).unwrap());
        assert_eq!(parse_form("custom:1,0,-1", 3).unwrap(), LinearForm::alpha(1, 3, 3).unwrap());
        assert!(parse_form("custom:1,0", 3).is_err());
        assert!(parse_form("a13", 3).is_err());
    }

    #[test]
    fn config_then_flags() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.cfg");
        fs::write(&path, "name = fuchsian-red-sl3\nt = 2.5\nmax_len = 5\nseed = 3\n").unwrap();
        let mut c = common("schottky-so21");
        c.scenario = None;
        c.config = Some(path.clone());
        c.max_len = Some(7);
        let s = Settings::resolve(&c).unwrap();
        assert_eq!(s.scenario, "fuchsian-red-sl3");
        assert_eq!(s.params.t, 2.5);
        assert_eq!(s.params.seed, 3);
        assert_eq!(s.opts.max_len, 7);

        fs::write(&path, "name = fuchsian-red-sl3\nbogus = 1\n").unwrap();
        let err = Settings::resolve(&c).unwrap_err();
        assert_eq!(err.exit_code(), 1);
    }

    #[test]
    fn dimension_mismatch_is_config_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.cfg");
        fs::write(&path, "name = schottky-so21\nn = 4\n").unwrap();
        let c = Common { config: Some(path), ..Default::default() };
        let s = Settings::resolve(&c).unwrap();
        assert!(matches!(s.scenario(), Err(CliError::Core(Error::Config(_)))));
    }

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::Core(Error::input("x")).exit_code(), 1);
        assert_eq!(CliError::Core(Error::numeric("x")).exit_code(), 2);
        assert_eq!(CliError::Core(Error::Resource("x".into())).exit_code(), 2);
        assert_eq!(CliError::ChecksFailed(1).exit_code(), 3);
        assert_eq!(run(["anosov", "--no-such-flag"]), 1);
        assert_eq!(run(["anosov", "ball"]), 1);
        assert_eq!(run(["anosov", "ball", "--scenario", "nope"]), 1);
        assert_eq!(
            run([
                "anosov",
                "ball",
                "--scenario",
                "schottky-so21",
                "--max-len",
                "30",
                "--budget",
                "100",
                "--out",
                "/dev/null"
            ]),
            2
        );
    }
}
