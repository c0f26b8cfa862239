//! Counting functions and growth-rate estimators.
//!
//! For a linear form `phi` on the Cartan subspace the critical exponent is the
//! exponential growth rate of `#{gamma : phi(mu(gamma)) <= R}`, and the entropy
//! the growth rate of `#{[gamma] : phi(lambda(gamma)) <= R}`. Both are
//! estimated by a least-squares fit of `log N(R)` against `R` over a window
//! where the enumerated data is complete.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{CartanVector, LinearForm};
use crate::words::{ConjClassEntry, GeneratorSet};

/// Default bin width, in natural-log units.
pub const DEFAULT_BIN: f64 = 0.25;
/// Thresholds with fewer entries than this are left out of the fit.
pub const MIN_COUNT: u64 = 10;
/// Fewer window points than this make the estimate low-confidence.
pub const MIN_WINDOW_POINTS: usize = 6;

// Values within this relative distance of a threshold count as lying on it,
// so that rounding noise does not move exact lattice values across bins.
const SNAP: f64 = 1e-9;

/// `phi(v)` with a dimension check.
pub fn evaluate_form(phi: &LinearForm, v: &CartanVector) -> Result<f64> {
    phi.eval(v)
}

/// Largest value of `phi(mu(s))` over generators and their inverses.
pub fn generator_spread(gs: &GeneratorSet, phi: &LinearForm) -> Result<f64> {
    let mut best = f64::NEG_INFINITY;
    for g in gs.symmetric_set() {
        best = best.max(phi.eval(&crate::linalg::cartan_projection(&g)?)?);
    }
    Ok(best)
}

/// Bin width for `phi`, chosen so that every form sees the same number of bins
/// per generator step as `alpha_{1,2}` does at width `base_bin`.
///
/// When two forms agree up to a constant factor on the whole group their count
/// series are then identical entry by entry.
pub fn bin_for_form(gs: &GeneratorSet, phi: &LinearForm, base_bin: f64) -> Result<f64> {
    let n = gs.dim();
    let reference = generator_spread(gs, &LinearForm::alpha(1, 2, n)?)?;
    let own = generator_spread(gs, phi)?;
    if !(reference > 0.0) || !(own > 0.0) {
        return Ok(base_bin);
    }
    Ok(base_bin * own / reference)
}

/// Cumulative counts `N_k = #{entries with value <= R_k}` at `R_k = k * bin`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CountSeries {
    pub thresholds: Vec<f64>,
    pub counts: Vec<u64>,
    pub bin: f64,
    /// Largest observed value.
    pub max_value: f64,
    /// Counts at thresholds above this value may be missing entries.
    pub complete_to: f64,
}

impl CountSeries {
    /// Wraps externally computed counts; the whole range is taken as complete.
    pub fn from_counts(thresholds: Vec<f64>, counts: Vec<u64>) -> Result<Self> {
        if thresholds.is_empty() || thresholds.len() != counts.len() {
            return Err(Error::input("thresholds and counts must be nonempty and of equal length"));
        }
        if thresholds.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::input("thresholds must be increasing"));
        }
        if counts.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::input("counts must be nondecreasing"));
        }
        let bin = if thresholds.len() > 1 { thresholds[1] - thresholds[0] } else { thresholds[0].abs() };
        let max_value = *thresholds.last().unwrap();
        Ok(CountSeries { thresholds, counts, bin, max_value, complete_to: max_value })
    }

    pub fn len(&self) -> usize {
        self.thresholds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.thresholds.is_empty()
    }
}

fn bin_index(v: f64, bin: f64) -> i64 {
    let x = v / bin;
    let k = x.ceil();
    // pull values sitting just above a threshold back onto it
    if k - x > 1.0 - SNAP * x.abs().max(1.0) {
        k as i64 - 1
    } else {
        k as i64
    }
}

/// Counts values at thresholds `bin, 2 bin, ...` up to the largest value.
pub fn count_values(values: &[f64], bin: f64) -> Result<CountSeries> {
    if !(bin > 0.0) || !bin.is_finite() {
        return Err(Error::input(format!("bin must be positive, got {bin}")));
    }
    if values.is_empty() {
        return Err(Error::input("cannot count an empty set of entries"));
    }
    if let Some(v) = values.iter().find(|v| !v.is_finite()) {
        return Err(Error::numeric(format!("non-finite form value {v}")));
    }
    let max_value = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let top = bin_index(max_value, bin).max(1);
    // Histogram over bin indices, merged by addition: exact for any split.
    let hist = values
        .par_chunks(4096)
        .map(|chunk| {
            let mut h = vec![0u64; top as usize + 1];
            for &v in chunk {
                h[bin_index(v, bin).clamp(0, top) as usize] += 1;
            }
            h
        })
        .reduce(
            || vec![0u64; top as usize + 1],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
    let mut thresholds = Vec::with_capacity(top as usize);
    let mut counts = Vec::with_capacity(top as usize);
    let mut acc = hist[0];
    for (k, h) in hist.iter().enumerate().take(top as usize + 1).skip(1) {
        acc += h;
        thresholds.push(k as f64 * bin);
        counts.push(acc);
    }
    Ok(CountSeries { thresholds, counts, bin, max_value, complete_to: max_value })
}

/// Count series of `phi` over `(word length, vector)` entries.
///
/// The data is treated as complete up to `min(max - margin, m)`, where `m` is
/// the smallest value among entries of the largest word length: an element
/// one letter longer than the enumeration radius is unlikely to fall below it.
pub fn count_series(entries: &[(usize, CartanVector)], phi: &LinearForm, bin: f64, margin: f64) -> Result<CountSeries> {
    let values = entries.iter().map(|(_, v)| phi.eval(v)).collect::<Result<Vec<f64>>>()?;
    let mut cs = count_values(&values, bin)?;
    let longest = entries.iter().map(|(l, _)| *l).max().unwrap_or(0);
    let frontier = entries
        .iter()
        .zip(&values)
        .filter(|((l, _), _)| *l == longest && longest > 0)
        .map(|(_, &v)| v)
        .fold(f64::INFINITY, f64::min);
    cs.complete_to = (cs.max_value - margin.max(0.0)).min(frontier);
    Ok(cs)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimateMethod {
    /// Least squares over at least [`MIN_WINDOW_POINTS`] thresholds.
    Regression,
    /// Too little usable growth; the value is a best effort.
    LowConfidence,
    /// No growth at all; the value is 0.
    Degenerate,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EstimateDiagnostics {
    /// Number of thresholds inside the window.
    pub points: usize,
    /// Largest deviation of a local slope (over a quarter of the window) from the fit.
    pub max_local_deviation: f64,
    /// Upper end of the complete range of the data.
    pub complete_to: f64,
    pub bin: f64,
    /// Exponent `beta` of the fitted prefactor `R^beta`.
    pub prefactor: f64,
    pub note: String,
}

/// A growth-rate estimate per unit of the form.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExponentEstimate {
    pub form: Vec<f64>,
    pub value: f64,
    pub stderr: f64,
    pub window: [f64; 2],
    pub count_at_hi: u64,
    pub method: EstimateMethod,
    pub diagnostics: EstimateDiagnostics,
}

impl ExponentEstimate {
    pub fn to_json(&self) -> serde_json::Value {
        crate::format::round_json(serde_json::to_value(self).expect("estimate serializes"))
    }

    fn with_form(mut self, phi: &LinearForm) -> Self {
        self.form = phi.coeffs().to_vec();
        self
    }
}

/// Slope, intercept and slope standard error of a least-squares line.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    if sxx == 0.0 {
        return (0.0, my, 0.0);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let stderr = if x.len() > 2 {
        let rss: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
        (rss / (n - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    (slope, intercept, stderr)
}

fn degenerate(cs: &CountSeries, note: &str) -> ExponentEstimate {
    let hi = cs.thresholds.last().copied().unwrap_or(0.0);
    ExponentEstimate {
        form: Vec::new(),
        value: 0.0,
        stderr: 0.0,
        window: [cs.thresholds[0], hi],
        count_at_hi: *cs.counts.last().unwrap_or(&0),
        method: EstimateMethod::Degenerate,
        diagnostics: EstimateDiagnostics {
            points: cs.len(),
            max_local_deviation: 0.0,
            complete_to: cs.complete_to,
            bin: cs.bin,
            prefactor: 0.0,
            note: note.to_string(),
        },
    }
}

/// Least-squares growth rate of `log N_k` against `R_k` over the window of
/// thresholds that are complete and have at least [`MIN_COUNT`] entries.
pub fn critical_exponent(cs: &CountSeries) -> Result<ExponentEstimate> {
    fit_growth(cs, &[0.0])
}

/// Growth rate for counts that may carry a polynomial prefactor,
/// `N(R) ~ C R^beta e^(h R)` with `beta` in `{0, -1}`; the prefactor with the
/// smaller residual is kept. Closed geodesics and conjugacy classes typically
/// count as `e^(h R) / (h R)`.
pub fn class_growth_exponent(cs: &CountSeries) -> Result<ExponentEstimate> {
    fit_growth(cs, &[0.0, -1.0])
}

fn fit_growth(cs: &CountSeries, prefactors: &[f64]) -> Result<ExponentEstimate> {
    if cs.is_empty() {
        return Err(Error::input("empty count series"));
    }
    if cs.counts.first() == cs.counts.last() {
        return Ok(degenerate(cs, "counts do not grow"));
    }
    let tol = SNAP * cs.complete_to.abs().max(1.0);
    let window: Vec<usize> =
        (0..cs.len()).filter(|&k| cs.counts[k] >= MIN_COUNT && cs.thresholds[k] <= cs.complete_to + tol).collect();
    let mut note = String::new();
    // Keep the upper half of the range when that still leaves enough points:
    // the lower thresholds carry the largest subexponential corrections.
    let window = match window.last() {
        Some(&hi) => {
            let upper: Vec<usize> =
                window.iter().copied().filter(|&k| cs.thresholds[k] >= 0.5 * cs.thresholds[hi]).collect();
            if upper.len() >= MIN_WINDOW_POINTS {
                upper
            } else {
                window
            }
        }
        None => window,
    };
    let idx: Vec<usize> = if window.len() >= 2 {
        window
    } else {
        note.push_str("window too short, fitting every threshold with positive count; ");
        (0..cs.len()).filter(|&k| cs.counts[k] > 0).collect()
    };
    let x: Vec<f64> = idx.iter().map(|&k| cs.thresholds[k]).collect();
    let raw: Vec<f64> = idx.iter().map(|&k| (cs.counts[k] as f64).ln()).collect();
    if x.len() < 2 || raw.first() == raw.last() {
        return Ok(degenerate(cs, "no growth inside the usable range"));
    }
    let mut best: Option<(f64, f64, f64, f64, Vec<f64>)> = None;
    for &beta in prefactors {
        let y: Vec<f64> = raw.iter().zip(&x).map(|(v, r)| v - beta * r.max(f64::MIN_POSITIVE).ln()).collect();
        let (slope, intercept, stderr) = linear_fit(&x, &y);
        let rss: f64 = x.iter().zip(&y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
        if best.as_ref().is_none_or(|b| rss < b.3) {
            best = Some((beta, slope, stderr, rss, y));
        }
    }
    let (prefactor, slope, stderr, _, y) = best.expect("at least one prefactor");
    let method = if idx.len() >= MIN_WINDOW_POINTS && slope > 0.0 && note.is_empty() {
        EstimateMethod::Regression
    } else {
        if idx.len() < MIN_WINDOW_POINTS {
            note.push_str(&format!("only {} thresholds in the window", idx.len()));
        }
        EstimateMethod::LowConfidence
    };
    // local slopes over sub-windows a quarter as long
    let span = (idx.len() / 4).max(2).min(idx.len());
    let mut dev: f64 = 0.0;
    for s in 0..=(idx.len() - span) {
        let (local, _, _) = linear_fit(&x[s..s + span], &y[s..s + span]);
        dev = dev.max((local - slope).abs());
    }
    Ok(ExponentEstimate {
        form: Vec::new(),
        value: slope.max(0.0),
        stderr,
        window: [x[0], *x.last().unwrap()],
        count_at_hi: cs.counts[*idx.last().unwrap()],
        method,
        diagnostics: EstimateDiagnostics {
            points: idx.len(),
            max_local_deviation: dev,
            complete_to: cs.complete_to,
            bin: cs.bin,
            prefactor,
            note,
        },
    })
}

/// Critical exponent of `phi` from ball data `(word length, mu)`.
pub fn delta_phi(
    entries: &[(usize, CartanVector)],
    phi: &LinearForm,
    bin: f64,
    margin: f64,
) -> Result<ExponentEstimate> {
    let cs = count_series(entries, phi, bin, margin)?;
    Ok(critical_exponent(&cs)?.with_form(phi))
}

/// Entropy of `phi`: growth rate of conjugacy classes counted by `phi(lambda)`,
/// fitted with [`class_growth_exponent`].
pub fn entropy(classes: &[ConjClassEntry], phi: &LinearForm, bin: f64, margin: f64) -> Result<ExponentEstimate> {
    let entries: Vec<(usize, CartanVector)> =
        classes.iter().map(|c| (c.representative.len(), c.lambda.clone())).collect();
    let cs = count_series(&entries, phi, bin, margin)?;
    Ok(class_growth_exponent(&cs)?.with_form(phi))
}

/// Partial Poincare series `sum exp(-s phi(mu))` over the entries.
pub fn poincare_series(entries: &[CartanVector], phi: &LinearForm, s: f64) -> Result<f64> {
    if !(s >= 0.0) {
        return Err(Error::input(format!("exponent s must be nonnegative, got {s}")));
    }
    let mut values = entries.iter().map(|v| Ok((-s * phi.eval(v)?).exp())).collect::<Result<Vec<f64>>>()?;
    // sorted summation keeps the result independent of the entry order
    values.sort_by(|a, b| a.total_cmp(b));
    Ok(values.iter().sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cv(v: &[f64]) -> CartanVector {
        CartanVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn forms_on_examples() {
        let v = cv(&[1.0, 0.0, -1.0]);
        assert_eq!(evaluate_form(&LinearForm::alpha(1, 2, 3).unwrap(), &v).unwrap(), 1.0);
        assert_eq!(evaluate_form(&LinearForm::alpha(1, 3, 3).unwrap(), &v).unwrap(), 2.0);
        let w = cv(&[2.0, 1.0, -3.0]);
        assert_eq!(evaluate_form(&LinearForm::weight(2, 3).unwrap(), &w).unwrap(), 3.0);
        assert!(evaluate_form(&LinearForm::alpha(1, 2, 4).unwrap(), &v).is_err());
    }

    #[test]
    fn counting_examples() {
        let cs = count_values(&[0.0], 0.25).unwrap();
        assert!(cs.counts.iter().all(|&c| c == 1));
        let cs = count_values(&[1.0, 2.0, 3.0], 1.0).unwrap();
        assert_eq!(cs.counts, vec![1, 2, 3]);
        assert_eq!(cs.thresholds, vec![1.0, 2.0, 3.0]);
        assert!(count_values(&[], 1.0).is_err());
        assert!(count_values(&[1.0], 0.0).is_err());
    }

    #[test]
    fn snapping_keeps_lattice_values_on_thresholds() {
        let cs = count_values(&[2.0 + 1e-14, 2.0 - 1e-14, 2.5], 0.5).unwrap();
        assert_eq!(cs.counts, vec![0, 0, 0, 2, 3]);
    }

    #[test]
    fn planted_growth() {
        let thresholds: Vec<f64> = (1..=60).map(|k| k as f64 * 0.25).collect();
        let counts = thresholds.iter().map(|r| (0.7 * r).exp().ceil() as u64).collect();
        let est = critical_exponent(&CountSeries::from_counts(thresholds, counts).unwrap()).unwrap();
        assert!((est.value - 0.7).abs() < 0.02, "{est:?}");
        assert_eq!(est.method, EstimateMethod::Regression);
    }

    #[test]
    fn constant_counts_are_degenerate() {
        let est = critical_exponent(&CountSeries::from_counts(vec![1.0, 2.0, 3.0], vec![5, 5, 5]).unwrap()).unwrap();
        assert_eq!(est.method, EstimateMethod::Degenerate);
        assert_eq!(est.value, 0.0);
    }

    #[test]
    fn free_group_word_length_growth_is_ln3() {
        // 2k(2k-1)^(l-1) words of length l in rank 2, placed at phi = l
        let mut values = vec![0.0];
        for l in 1..=12u32 {
            values.extend(std::iter::repeat_n(l as f64, (4 * 3u64.pow(l - 1)) as usize));
        }
        let est = critical_exponent(&count_values(&values, 1.0).unwrap()).unwrap();
        assert!((est.value - 3f64.ln()).abs() < 0.05, "{est:?}");
    }

    #[test]
    fn entropy_on_planted_ladder_and_single_class() {
        use crate::words::Word;
        let mut classes = Vec::new();
        for k in 1..=64u32 {
            let r = k as f64 * 0.25;
            let mult = (0.5 * r).exp().round() as usize;
            for _ in 0..mult {
                classes.push(ConjClassEntry { representative: Word::identity(), lambda: cv(&[r, -r]) });
            }
        }
        let phi = LinearForm::epsilon(1, 2).unwrap();
        let est = entropy(&classes, &phi, 0.25, 0.0).unwrap();
        assert!((est.value - 0.5).abs() < 0.02, "{est:?}");
        let one = entropy(&classes[..1], &phi, 0.25, 0.0).unwrap();
        assert_eq!(one.value, 0.0);
        assert_eq!(one.method, EstimateMethod::Degenerate);
    }

    #[test]
    fn poincare_limits() {
        let entries = vec![cv(&[0.0, 0.0]), cv(&[1.0, -1.0]), cv(&[2.0, -2.0])];
        let phi = LinearForm::alpha(1, 2, 2).unwrap();
        assert_eq!(poincare_series(&entries, &phi, 0.0).unwrap(), 3.0);
        assert!((poincare_series(&entries, &phi, 50.0).unwrap() - 1.0).abs() < 1e-12);
        assert!(poincare_series(&entries, &phi, -1.0).is_err());
    }

    #[test]
    fn estimate_json_shape() {
        let est = critical_exponent(&count_values(&[1.0, 2.0, 3.0], 1.0).unwrap()).unwrap();
        let j = est.to_json();
        for key in ["form", "value", "stderr", "window", "count_at_hi", "method", "diagnostics"] {
            assert!(j.get(key).is_some(), "{key}");
        }
    }
}
