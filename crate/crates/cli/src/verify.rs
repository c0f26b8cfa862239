//! End-to-end pipeline: enumeration, exponents, entropies, limit set and the
//! dimension inequalities, collected into one deterministic report.

use std::collections::BTreeMap;
use std::fmt;
use std::time::Instant;

use anosov_core::exponents::{bin_for_form, delta_phi, entropy, generator_spread, ExponentEstimate, DEFAULT_BIN};
use anosov_core::hilbert::{
    comparison_ratio, hilbert_orbit_exponent, orbit_distances, preserves_ellipsoid, quasi_metric_dimension,
    BoundaryPoint, ComparisonReport, ConvexDomain,
};
use anosov_core::limit_set::{
    limit_box_dimension, periodic_limit_point, sample_limit_set, DimensionEstimate, LimitMetric, DEFAULT_SCALES,
    PERIODIC_GAP,
};
use anosov_core::linalg::Projective;
use anosov_core::reps::{build_scenario, ExpectedRelation, Scenario, ScenarioParams};
use anosov_core::words::{ball_projections, enumerate_conjugacy_classes, DEFAULT_BUDGET};
use anosov_core::{Error, LinearForm, ProjPoint};
use rayon::prelude::*;
use serde::Serialize;

/// Slack added to the combined standard error of every inequality check.
pub const CHECK_SLACK: f64 = 0.05;

/// Pipeline sizes.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunOptions {
    pub max_len: usize,
    pub word_len: usize,
    pub count: usize,
    pub bin: f64,
    pub scales: usize,
    pub budget: u64,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            max_len: 12,
            word_len: 14,
            count: 2000,
            bin: DEFAULT_BIN,
            scales: DEFAULT_SCALES,
            budget: DEFAULT_BUDGET,
        }
    }
}

/// A failure inside one pipeline stage.
#[derive(Debug, Clone, PartialEq)]
pub struct StageError {
    pub stage: &'static str,
    pub error: Error,
}

impl fmt::Display for StageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.stage, self.error)
    }
}

impl std::error::Error for StageError {}

trait Stage<T> {
    fn stage(self, stage: &'static str) -> Result<T, StageError>;
}

impl<T> Stage<T> for anosov_core::Result<T> {
    fn stage(self, stage: &'static str) -> Result<T, StageError> {
        self.map_err(|error| StageError { stage, error })
    }
}

/// One estimator-level comparison `lhs <= rhs` (or `lhs = rhs` for exact
/// relations). It passes when `margin >= -tolerance`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    fn at_most(name: &str, lhs: f64, lhs_err: f64, rhs: f64, rhs_err: f64) -> Self {
        let tolerance = (lhs_err * lhs_err + rhs_err * rhs_err).sqrt() + CHECK_SLACK;
        let margin = rhs - lhs;
        Check { name: name.to_string(), lhs, rhs, margin, tolerance, pass: margin >= -tolerance }
    }

    fn equal(name: &str, lhs: f64, rhs: f64, tolerance: f64) -> Self {
        let margin = -(lhs - rhs).abs();
        Check { name: name.to_string(), lhs, rhs, margin, tolerance, pass: margin >= -tolerance }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScenarioInfo {
    pub name: String,
    pub params: ScenarioParams,
    pub seed: u64,
    pub ambient_n: usize,
    pub convex_cocompact: bool,
    pub expected: Vec<ExpectedRelation>,
    pub notes: Vec<String>,
}

impl From<&Scenario> for ScenarioInfo {
    fn from(s: &Scenario) -> Self {
        ScenarioInfo {
            name: s.name.clone(),
            params: s.params.clone(),
            seed: s.seed,
            ambient_n: s.ambient_n,
            convex_cocompact: s.convex_cocompact,
            expected: s.expected.clone(),
            notes: s.notes.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerificationReport {
    pub scenario: ScenarioInfo,
    pub options: RunOptions,
    pub delta12: ExponentEstimate,
    pub delta1n: ExponentEstimate,
    pub delta1: ExponentEstimate,
    pub h12: ExponentEstimate,
    pub h1n: ExponentEstimate,
    pub boxdim_sym: DimensionEstimate,
    pub boxdim_line: DimensionEstimate,
    pub boxdim_dual: DimensionEstimate,
    pub limit_points: usize,
    pub rejected_samples: usize,
    /// Largest `|x_n|` over the limit points `xi(w+)` of the sampled words,
    /// when an invariant line is expected.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub invariant_line_deviation: Option<f64>,
    pub inequality_checks: Vec<Check>,
    /// Wall-clock time; left out of the JSON unless timing was requested,
    /// so reports stay byte-identical across runs.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub runtime_s: Option<f64>,
    pub versions: BTreeMap<String, String>,
}

impl VerificationReport {
    pub fn all_pass(&self) -> bool {
        self.inequality_checks.iter().all(|c| c.pass)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.inequality_checks.iter().find(|c| c.name == name)
    }

    /// Canonical JSON: sorted keys, floats at 12 significant digits.
    pub fn to_json(&self) -> String {
        let v = serde_json::to_value(self).expect("report serializes");
        let mut s = serde_json::to_string_pretty(&anosov_core::format::round_json(v)).expect("json");
        s.push('\n');
        s
    }
}

/// Critical exponent of `phi` over the ball, with bins matched across forms.
fn form_exponent(
    scenario: &Scenario,
    ball: &[(usize, anosov_core::CartanVector)],
    phi: &LinearForm,
    opts: &RunOptions,
) -> anosov_core::Result<ExponentEstimate> {
    let gs = &scenario.generators;
    let bin = bin_for_form(gs, phi, opts.bin)?;
    delta_phi(ball, phi, bin, generator_spread(gs, phi)?)
}

/// Runs the whole pipeline on a catalog scenario.
pub fn run_verify(
    scenario_name: &str,
    params: &ScenarioParams,
    opts: &RunOptions,
    timing: bool,
) -> Result<VerificationReport, StageError> {
    let start = Instant::now();
    let scenario = build_scenario(scenario_name, params).stage("scenario")?;
    let gs = &scenario.generators;
    let n = scenario.ambient_n;
    let a12 = LinearForm::alpha(1, 2, n).stage("forms")?;
    let a1n = LinearForm::alpha(1, n, n).stage("forms")?;
    let e1 = LinearForm::epsilon(1, n).stage("forms")?;

    let ball = ball_projections(gs, opts.max_len, opts.budget).stage("ball")?;
    let delta12 = form_exponent(&scenario, &ball, &a12, opts).stage("exponent a12")?;
    let delta1n = form_exponent(&scenario, &ball, &a1n, opts).stage("exponent a1n")?;
    let delta1 = form_exponent(&scenario, &ball, &e1, opts).stage("exponent e1")?;
    drop(ball);

    let classes = enumerate_conjugacy_classes(gs, opts.max_len, opts.budget).stage("conjugacy")?;
    let class_entropy = |phi: &LinearForm| -> anosov_core::Result<ExponentEstimate> {
        entropy(&classes, phi, bin_for_form(gs, phi, opts.bin)?, generator_spread(gs, phi)?)
    };
    let h12 = class_entropy(&a12).stage("entropy a12")?;
    let h1n = class_entropy(&a1n).stage("entropy a1n")?;
    drop(classes);

    let sample = sample_limit_set(gs, opts.word_len, opts.count, scenario.seed).stage("limit set")?;
    let boxdim_sym = limit_box_dimension(&sample.points, LimitMetric::Sym, opts.scales).stage("box dimension sym")?;
    let boxdim_line =
        limit_box_dimension(&sample.points, LimitMetric::Line, opts.scales).stage("box dimension line")?;
    let boxdim_dual =
        limit_box_dimension(&sample.points, LimitMetric::Dual, opts.scales).stage("box dimension dual")?;

    let mut checks = Vec::new();
    if scenario.convex_cocompact {
        checks.push(Check::at_most(
            "lower: 2 delta_1n <= dim_sym",
            2.0 * delta1n.value,
            2.0 * delta1n.stderr,
            boxdim_sym.value,
            boxdim_sym.stderr,
        ));
    } else {
        checks.push(Check::at_most(
            "lower: delta_1n <= dim_sym",
            delta1n.value,
            delta1n.stderr,
            boxdim_sym.value,
            boxdim_sym.stderr,
        ));
    }
    checks.push(Check::at_most(
        "upper: dim_sym <= delta_12",
        boxdim_sym.value,
        boxdim_sym.stderr,
        delta12.value,
        delta12.stderr,
    ));
    checks.push(Check::at_most("entropy: h_12 <= delta_12", h12.value, h12.stderr, delta12.value, delta12.stderr));
    checks.push(Check::at_most("entropy: h_1n <= delta_1n", h1n.value, h1n.stderr, delta1n.value, delta1n.stderr));

    let mut invariant_line_deviation = None;
    for rel in &scenario.expected {
        match *rel {
            ExpectedRelation::ExactRatio { ratio, tolerance } => {
                let measured = if delta12.value > 0.0 { delta1n.value / (ratio * delta12.value) } else { f64::NAN };
                checks.push(Check::equal(&format!("expected: delta_1n = {ratio} delta_12"), measured, 1.0, tolerance));
            }
            ExpectedRelation::EqualityCase { tolerance } => {
                checks.push(Check::equal(
                    "expected: 2 delta_1n = delta_12",
                    2.0 * delta1n.value,
                    delta12.value,
                    tolerance,
                ));
            }
            ExpectedRelation::LinesOnInvariantLine { tolerance } => {
                // exact limit points xi(w+) of the sampled words, so the
                // finite-word error does not enter
                let dev = sample
                    .points
                    .par_iter()
                    .map(|p| periodic_limit_point(gs, &p.word, PERIODIC_GAP).map(|q| q.line.unit()[n - 1].abs()))
                    .collect::<anosov_core::Result<Vec<f64>>>()
                    .stage("invariant line")?
                    .into_iter()
                    .fold(0.0, f64::max);
                invariant_line_deviation = Some(dev);
                checks.push(Check::equal("expected: limit lines in {x_n = 0}", dev, 0.0, tolerance));
            }
        }
    }

    let versions = BTreeMap::from([
        ("anosov-cli".to_string(), env!("CARGO_PKG_VERSION").to_string()),
        ("anosov-core".to_string(), anosov_core::VERSION.to_string()),
    ]);
    Ok(VerificationReport {
        scenario: ScenarioInfo::from(&scenario),
        options: opts.clone(),
        delta12,
        delta1n,
        delta1,
        h12,
        h1n,
        boxdim_sym,
        boxdim_line,
        boxdim_dual,
        limit_points: sample.points.len(),
        rejected_samples: sample.rejected.len(),
        invariant_line_deviation,
        inequality_checks: checks,
        runtime_s: timing.then(|| start.elapsed().as_secs_f64()),
        versions,
    })
}

/// Output of the Hilbert-geometry pipeline on an ellipsoid-preserving scenario.
#[derive(Clone, Debug)]
pub struct HilbertReport {
    pub scenario: String,
    pub pairs: Vec<(BoundaryPoint, BoundaryPoint)>,
    pub comparison: ComparisonReport,
    /// Box dimension of the limit set under the Gromov quasi-distance.
    pub quasi_dimension: DimensionEstimate,
    /// Critical exponent of the orbit counting function of the Hilbert metric.
    pub orbit_exponent: ExponentEstimate,
}

impl HilbertReport {
    pub fn to_json(&self) -> String {
        let v = serde_json::json!({
            "scenario": self.scenario,
            "pairs": self.pairs.len(),
            "skipped": self.comparison.skipped.len(),
            "max_ratio": self.comparison.max_ratio,
            "band_spread": self.comparison.band_spread(BAND_MIN_COUNT),
            "by_scale": self.comparison.by_scale,
            "quasi_dimension": self.quasi_dimension.to_json(),
            "orbit_exponent": self.orbit_exponent.to_json(),
        });
        let mut s = serde_json::to_string_pretty(&anosov_core::format::round_json(v)).expect("json");
        s.push('\n');
        s
    }
}

/// Bands with fewer pairs are left out of the band spread.
pub const BAND_MIN_COUNT: usize = 10;

/// `[0 : ... : 0 : 1]`, the centre of the ellipsoid.
pub fn ellipsoid_center(n: usize) -> ProjPoint {
    ProjPoint::basis(n, n)
}

/// Boundary points of the sampled limit lines, the comparison ratios over
/// neighbouring and antipodal sample pairs, the quasi-metric dimension and the
/// orbit exponent of the Hilbert metric.
pub fn run_hilbert(
    scenario_name: &str,
    params: &ScenarioParams,
    opts: &RunOptions,
) -> Result<HilbertReport, StageError> {
    let scenario = build_scenario(scenario_name, params).stage("scenario")?;
    let gs = &scenario.generators;
    if !gs.generators().iter().all(|g| preserves_ellipsoid(g, 1e-9)) {
        return Err(StageError {
            stage: "scenario",
            error: Error::Unsupported(format!("{} does not preserve the round ellipsoid", scenario.name)),
        });
    }
    let n = scenario.ambient_n;
    let omega = ConvexDomain::Ellipsoid(n);
    let base = ellipsoid_center(n);
    let sample = sample_limit_set(gs, opts.word_len, opts.count, scenario.seed).stage("limit set")?;
    let pts = sample
        .points
        .iter()
        .map(|p| BoundaryPoint::project_to_ellipsoid(p.line.unit()))
        .collect::<anosov_core::Result<Vec<_>>>()
        .stage("boundary points")?;
    let m = pts.len();
    // neighbours in sampling order give small separations, antipodal indices large ones
    let pairs: Vec<(BoundaryPoint, BoundaryPoint)> = (0..m)
        .flat_map(|i| [(i, (i + 1) % m), (i, (i + m / 2) % m)])
        .filter(|(i, j)| i != j)
        .map(|(i, j)| (pts[i].clone(), pts[j].clone()))
        .collect();
    let comparison = comparison_ratio(&omega, &base, &pairs).stage("comparison")?;
    let quasi_dimension = quasi_metric_dimension(&pts, &omega, &base, opts.scales).stage("quasi-metric dimension")?;

    // orbit distances binned like the Cartan counts of alpha_12
    let spread = orbit_distances(gs, &base, 1, opts.budget).stage("orbit")?.iter().map(|d| d.1).fold(0.0, f64::max);
    let a12 = LinearForm::alpha(1, 2, n).stage("forms")?;
    let bin = opts.bin * spread / generator_spread(gs, &a12).stage("forms")?;
    let orbit_exponent =
        hilbert_orbit_exponent(gs, &base, opts.max_len, opts.budget, bin, spread).stage("orbit exponent")?;
    Ok(HilbertReport { scenario: scenario.name, pairs, comparison, quasi_dimension, orbit_exponent })
}
