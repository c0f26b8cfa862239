//! Sampling the symmetric limit set and box-counting dimensions.
//!
//! A long word `w` with a large gap `mu_1 - mu_2` has a well-defined top
//! singular direction; the first and last left singular vectors of its matrix
//! approximate the limit line and limit hyperplane of the boundary point
//! starting with `w`.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exponents::linear_fit;
use crate::format::fmt_sig;
use crate::linalg::{
    cartan_projection, proj_distance, proximal_frame, sym_distance, DualProjPoint, ProjPoint, SquareMatrix,
};
use crate::words::{inverse_letter, word_cartan, GeneratorSet, Word};

/// Samples with a smaller gap are discarded: their line is uncertain beyond 0.1.
pub const QUALITY_GAP: f64 = std::f64::consts::LN_10;
/// Below this gap the group is most likely not projective Anosov.
pub const MIN_GAP: f64 = 1e-6;
/// Fewest points accepted by [`box_dimension`].
pub const MIN_POINTS: usize = 500;
/// Default number of dyadic scales.
pub const DEFAULT_SCALES: usize = 12;

/// A point `(xi, xi*)` of the symmetric limit set, with its provenance.
#[derive(Clone, Debug, PartialEq)]
pub struct SymLimitPoint {
    pub line: ProjPoint,
    pub hyperplane: DualProjPoint,
    pub word: Word,
    /// `mu_1 - mu_2` of the word matrix.
    pub gap: f64,
}

impl SymLimitPoint {
    pub fn sym_distance(&self, other: &SymLimitPoint) -> f64 {
        sym_distance((&self.line, &self.hyperplane), (&other.line, &other.hyperplane)).unwrap_or(f64::NAN)
    }
}

/// Points handed to the greedy-net estimator. The coordinates only fix the
/// processing order.
pub trait NetPoint {
    fn coords(&self) -> Vec<f64>;
}

impl NetPoint for ProjPoint {
    fn coords(&self) -> Vec<f64> {
        self.unit().to_vec()
    }
}

impl NetPoint for DualProjPoint {
    fn coords(&self) -> Vec<f64> {
        self.unit().to_vec()
    }
}

impl NetPoint for SymLimitPoint {
    fn coords(&self) -> Vec<f64> {
        let mut c = self.line.unit().to_vec();
        c.extend_from_slice(self.hyperplane.unit());
        c
    }
}

impl NetPoint for Vec<f64> {
    fn coords(&self) -> Vec<f64> {
        self.clone()
    }
}

use crate::linalg::Projective;

fn normalized_product<I: Iterator<Item = DMatrix<f64>>>(n: usize, factors: I) -> DMatrix<f64> {
    let mut acc = DMatrix::identity(n, n);
    for f in factors {
        acc = &acc * f;
        let s = acc.amax();
        if s > 0.0 {
            acc /= s;
        }
    }
    acc
}

/// Top eigenvector of `m m^T`. With a large gap this is accurate to machine
/// precision, unlike the 2x2 special case of the SVD routine.
fn top_left_singular_vector(m: DMatrix<f64>) -> Result<Vec<f64>> {
    let gram = &m * m.transpose();
    let eig = nalgebra::SymmetricEigen::try_new(gram, 1e-15, 0)
        .ok_or_else(|| Error::numeric("symmetric eigendecomposition did not converge"))?;
    let k = eig.eigenvalues.imax();
    Ok(eig.eigenvectors.column(k).iter().copied().collect())
}

/// Limit-set sample of a single word, without the quality filter.
pub fn limit_point(gs: &GeneratorSet, w: &Word) -> Result<SymLimitPoint> {
    let n = gs.dim();
    let mu = word_cartan(gs, w)?;
    let gap = mu.mu(1) - mu.mu(2);
    let direct = normalized_product(n, w.letters().iter().map(|&l| gs.letter_matrix(l).as_matrix().clone()));
    // Last left singular vector of W is the first one of W^-T = s_1^-T ... s_L^-T.
    let dual =
        normalized_product(n, w.letters().iter().map(|&l| gs.letter_matrix(inverse_letter(l)).as_matrix().transpose()));
    Ok(SymLimitPoint {
        line: ProjPoint::new(&top_left_singular_vector(direct)?)?,
        hyperplane: DualProjPoint::new(&top_left_singular_vector(dual)?)?,
        word: w.clone(),
        gap,
    })
}

/// Gap reached by [`periodic_limit_point`] before it stops taking powers.
pub const PERIODIC_GAP: f64 = 40.0;

/// The point `xi(w+)` fixed by `w`, from a power `w^k` whose gap is at least
/// `min_gap`, so the singular-vector error `O(e^-gap)` is below double precision
/// for the default. The word is cyclically reduced first (`w = x c x^-1`, then
/// `w^k = x c^k x^-1`).
pub fn periodic_limit_point(gs: &GeneratorSet, w: &Word, min_gap: f64) -> Result<SymLimitPoint> {
    let l = w.letters();
    let mut h = 0;
    while 2 * h + 1 < l.len() && l[l.len() - 1 - h] == inverse_letter(l[h]) {
        h += 1;
    }
    let (head, core, tail) = (&l[..h], &l[h..l.len() - h], &l[l.len() - h..]);
    if core.is_empty() {
        return Err(Error::input("the identity has no attracting point"));
    }
    let power = |k: usize| -> Result<Word> {
        let mut v = head.to_vec();
        for _ in 0..k {
            v.extend_from_slice(core);
        }
        v.extend_from_slice(tail);
        Word::new(v)
    };
    let mut k = 1;
    loop {
        let wk = power(k)?;
        let mu = word_cartan(gs, &wk)?;
        if mu.mu(1) - mu.mu(2) >= min_gap {
            let mut p = limit_point(gs, &wk)?;
            p.word = w.clone();
            return Ok(p);
        }
        if k * core.len() > 1 << 14 {
            return Err(Error::numeric(format!(
                "powers of {} do not reach gap {min_gap}; not proximal",
                gs.format_word(w)
            )));
        }
        k *= 2;
    }
}

/// Reduced word of length `len` at position `index` in lexicographic order.
pub fn word_at_index(gs: &GeneratorSet, len: usize, mut index: u128) -> Result<Word> {
    let alphabet = gs.alphabet_size() as u128;
    let branch = alphabet - 1;
    if len == 0 {
        return Ok(Word::identity());
    }
    let tail = branch.pow(len as u32 - 1);
    if index >= alphabet * tail {
        return Err(Error::input(format!("word index {index} out of range")));
    }
    let mut letters = Vec::with_capacity(len);
    let mut place = tail;
    let first = (index / place) as u8;
    index %= place;
    letters.push(first);
    for _ in 1..len {
        place /= branch;
        let digit = (index / place) as u8;
        index %= place;
        let forbidden = inverse_letter(*letters.last().unwrap());
        let letter = (0..alphabet as u8).filter(|&l| l != forbidden).nth(digit as usize).unwrap();
        letters.push(letter);
    }
    Word::new(letters)
}

/// Sampled points plus a record of the rejected words.
#[derive(Clone, Debug)]
pub struct LimitSample {
    pub points: Vec<SymLimitPoint>,
    /// Words discarded by the quality filter, with their gaps.
    pub rejected: Vec<(Word, f64)>,
}

/// Samples `count` words of length `word_len` at an even stride through
/// lexicographic order, starting at a seeded offset, and keeps those whose gap
/// is at least [`QUALITY_GAP`].
pub fn sample_limit_set(gs: &GeneratorSet, word_len: usize, count: usize, seed: u64) -> Result<LimitSample> {
    if word_len < 4 {
        return Err(Error::input(format!("word length must be at least 4, got {word_len}")));
    }
    if count == 0 {
        return Err(Error::input("sample count must be positive"));
    }
    if !gs.is_free() {
        return Err(Error::Unsupported("limit-set sampling indexes reduced words of a free group".into()));
    }
    let alphabet = gs.alphabet_size() as u128;
    let total = (alphabet - 1)
        .checked_pow(word_len as u32 - 1)
        .and_then(|t| t.checked_mul(alphabet))
        .ok_or_else(|| Error::Resource(format!("word length {word_len} too large to index")))?;
    if (count as u128) > total {
        return Err(Error::input(format!("only {total} reduced words of length {word_len}, asked for {count}")));
    }
    let stride = total / count as u128;
    let offset = ChaCha8Rng::seed_from_u64(seed).random_range(0..stride.min(u64::MAX as u128) as u64) as u128;
    let results = (0..count)
        .into_par_iter()
        .map(|j| {
            let idx = offset + (j as u128 * total) / count as u128;
            let w = word_at_index(gs, word_len, idx)?;
            limit_point(gs, &w)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut points = Vec::with_capacity(count);
    let mut rejected = Vec::new();
    for p in results {
        if p.gap >= QUALITY_GAP {
            points.push(p);
        } else {
            rejected.push((p.word.clone(), p.gap));
        }
    }
    if points.is_empty() {
        let worst = rejected.iter().map(|r| r.1).fold(f64::INFINITY, f64::min);
        return Err(Error::numeric(format!(
            "every sample failed the gap filter (smallest gap {worst:.3e}{}); the group is likely not projective Anosov",
            if worst < MIN_GAP { ", below 1e-6" } else { "" }
        )));
    }
    Ok(LimitSample { points, rejected })
}

/// CSV with columns `word, gap, line_1..line_n, hyp_1..hyp_n`.
pub fn points_csv(gs: &GeneratorSet, points: &[SymLimitPoint]) -> String {
    let n = gs.dim();
    let mut out = String::from("word,gap");
    for i in 1..=n {
        out.push_str(&format!(",line_{i}"));
    }
    for i in 1..=n {
        out.push_str(&format!(",hyp_{i}"));
    }
    out.push('\n');
    for p in points {
        out.push_str(&gs.format_word(&p.word));
        out.push(',');
        out.push_str(&fmt_sig(p.gap));
        for x in p.line.unit().iter().chain(p.hyperplane.unit()) {
            out.push(',');
            out.push_str(&fmt_sig(*x));
        }
        out.push('\n');
    }
    out
}

/// Box-counting estimate.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DimensionEstimate {
    pub value: f64,
    pub stderr: f64,
    /// `(eps, N(eps))` for every scale, coarsest first.
    pub scales: Vec<(f64, u64)>,
    /// Inclusive index range into `scales` used by the fit.
    pub window: (usize, usize),
    pub note: String,
}

impl DimensionEstimate {
    pub fn to_json(&self) -> serde_json::Value {
        let v = serde_json::json!({
            "value": self.value,
            "stderr": self.stderr,
            "scales": self.scales.iter().map(|(e, n)| serde_json::json!([e, n])).collect::<Vec<_>>(),
            "window": [self.window.0, self.window.1],
            "note": self.note,
        });
        crate::format::round_json(v)
    }
}

/// Greedy net: a point becomes a center when it is farther than `eps` from all
/// earlier centers.
fn greedy_net_size<P, M>(points: &[&P], metric: &M, eps: f64) -> u64
where
    P: Sync,
    M: Fn(&P, &P) -> f64 + Sync,
{
    let mut centers: Vec<&P> = Vec::new();
    for p in points {
        let covered = if centers.len() > 512 {
            centers.par_iter().any(|c| metric(c, p) <= eps)
        } else {
            centers.iter().any(|c| metric(c, p) <= eps)
        };
        if !covered {
            centers.push(p);
        }
    }
    centers.len() as u64
}

/// Box-counting dimension from greedy `eps`-nets at `eps_j = diam / 2^j`,
/// `j = 2..=scale_count + 1`, fitted where `N(eps_j) <= points / 10`.
///
/// Points are processed in lexicographic order of their coordinates, so the
/// result does not depend on the input order or the thread count. The metric
/// only needs to be symmetric and nonnegative.
pub fn box_dimension<P, M>(points: &[P], metric: M, scale_count: usize) -> Result<DimensionEstimate>
where
    P: NetPoint + Sync,
    M: Fn(&P, &P) -> f64 + Sync,
{
    if points.is_empty() {
        return Err(Error::input("no points"));
    }
    if scale_count < 2 {
        return Err(Error::input("need at least two scales"));
    }
    let mut order: Vec<(Vec<f64>, usize)> = points.iter().enumerate().map(|(i, p)| (p.coords(), i)).collect();
    order
        .sort_by(|a, b| a.0.iter().zip(&b.0).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(a.1.cmp(&b.1)));
    let sorted: Vec<&P> = order.iter().map(|(_, i)| &points[*i]).collect();

    let diam = (0..sorted.len())
        .into_par_iter()
        .map(|i| sorted[i + 1..].iter().map(|q| metric(sorted[i], q)).fold(0.0, f64::max))
        .reduce(|| 0.0, f64::max);
    if !diam.is_finite() {
        return Err(Error::numeric("metric returned a non-finite value"));
    }
    if diam == 0.0 {
        return Ok(DimensionEstimate {
            value: 0.0,
            stderr: 0.0,
            scales: Vec::new(),
            window: (0, 0),
            note: "all points coincide".into(),
        });
    }
    if points.len() < MIN_POINTS {
        return Err(Error::input(format!("box counting needs at least {MIN_POINTS} points, got {}", points.len())));
    }
    let guard = points.len() as u64 / 10;
    let mut scales = Vec::with_capacity(scale_count);
    for j in 2..=scale_count + 1 {
        let eps = diam / 2f64.powi(j as i32);
        // finer scales are out of the window once the guard is exceeded
        let n = if scales.last().is_some_and(|&(_, n)| n > guard) {
            break;
        } else {
            greedy_net_size(&sorted, &metric, eps)
        };
        scales.push((eps, n));
    }
    let window_idx: Vec<usize> = (0..scales.len()).filter(|&i| scales[i].1 <= guard).collect();
    if window_idx.len() < 2 {
        return Ok(DimensionEstimate {
            value: 0.0,
            stderr: 0.0,
            window: (0, window_idx.first().copied().unwrap_or(0)),
            scales,
            note: "fewer than two scales pass the density guard".into(),
        });
    }
    let x: Vec<f64> = window_idx.iter().map(|&i| (1.0 / scales[i].0).ln()).collect();
    let y: Vec<f64> = window_idx.iter().map(|&i| (scales[i].1 as f64).ln()).collect();
    let (slope, _, stderr) = linear_fit(&x, &y);
    let note = if scales.len() < scale_count {
        "scales finer than the density guard were skipped".into()
    } else {
        String::new()
    };
    Ok(DimensionEstimate {
        value: slope.max(0.0),
        stderr,
        window: (window_idx[0], *window_idx.last().unwrap()),
        scales,
        note,
    })
}

/// Metric choices for limit-set points.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LimitMetric {
    Sym,
    Line,
    Dual,
}

pub fn limit_box_dimension(
    points: &[SymLimitPoint],
    metric: LimitMetric,
    scale_count: usize,
) -> Result<DimensionEstimate> {
    match metric {
        LimitMetric::Sym => {
            box_dimension(points, |a: &SymLimitPoint, b: &SymLimitPoint| a.sym_distance(b), scale_count)
        }
        LimitMetric::Line => {
            let lines: Vec<ProjPoint> = points.iter().map(|p| p.line.clone()).collect();
            box_dimension(&lines, |a: &ProjPoint, b: &ProjPoint| proj_distance(a, b).unwrap_or(f64::NAN), scale_count)
        }
        LimitMetric::Dual => {
            let hyps: Vec<DualProjPoint> = points.iter().map(|p| p.hyperplane.clone()).collect();
            box_dimension(
                &hyps,
                |a: &DualProjPoint, b: &DualProjPoint| proj_distance(a, b).unwrap_or(f64::NAN),
                scale_count,
            )
        }
    }
}

const ALIGN_TOL: f64 = 1e-6;

/// Largest `dist(g p, [e_1]) / (r e^(mu_2 - mu_1))` over `sample` points `p`
/// on the sphere of radius `r` about `[e_1]`.
///
/// `g` must be proximal with attracting line `[e_1]` and repelling hyperplane
/// `span(e_2, ..., e_n)`.
pub fn distortion_check(g: &SquareMatrix, r: f64, sample: usize, seed: u64) -> Result<f64> {
    let n = g.dim();
    if !(r > 0.0 && r <= 0.1) {
        return Err(Error::input(format!("radius must lie in (0, 0.1], got {r}")));
    }
    if sample == 0 {
        return Err(Error::input("sample must be positive"));
    }
    let frame = proximal_frame(g)?.map_err(|reason| Error::input(format!("g is not proximal: {reason}")))?;
    let e1 = ProjPoint::basis(1, n);
    let e1_star = DualProjPoint::basis(1, n);
    if proj_distance(&frame.line, &e1)? > ALIGN_TOL || proj_distance(&frame.repelling, &e1_star)? > ALIGN_TOL {
        return Err(Error::input(
            "g is not aligned: conjugate so that g+ = [e1] and the repelling hyperplane is span(e2..en)",
        ));
    }
    let mu = cartan_projection(g)?;
    let contraction = (mu.mu(2) - mu.mu(1)).exp();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (s, c) = r.sin_cos();
    let mut worst: f64 = 0.0;
    for _ in 0..sample {
        let mut u: Vec<f64> = (1..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let norm = u.iter().map(|x| x * x).sum::<f64>().sqrt();
        u.iter_mut().for_each(|x| *x /= norm);
        let mut p = vec![c];
        p.extend(u.iter().map(|x| s * x));
        let gp = ProjPoint::new(&p)?.transform(g)?;
        worst = worst.max(proj_distance(&gp, &e1)? / (r * contraction));
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reps::{build_scenario, ScenarioParams};
    use std::f64::consts::PI;

    fn circle(count: usize) -> Vec<ProjPoint> {
        (0..count)
            .map(|k| {
                let t = PI * k as f64 / count as f64;
                ProjPoint::new(&[t.cos(), t.sin(), 0.0]).unwrap()
            })
            .collect()
    }

    fn pd(a: &ProjPoint, b: &ProjPoint) -> f64 {
        proj_distance(a, b).unwrap()
    }

    #[test]
    fn circle_has_dimension_one() {
        let est = box_dimension(&circle(1000), pd, 10).unwrap();
        assert!((est.value - 1.0).abs() < 0.05, "{est:?}");
        assert!(est.scales.windows(2).all(|w| w[1].1 >= w[0].1));
    }

    #[test]
    fn cantor_set_dimension() {
        let level = 12;
        let pts: Vec<ProjPoint> = (0..1u32 << level)
            .map(|bits| {
                let x: f64 = (0..level).map(|i| if bits >> i & 1 == 1 { 2.0 / 3f64.powi(i + 1) } else { 0.0 }).sum();
                let t = x * 1.2;
                ProjPoint::new(&[t.cos(), t.sin(), 0.0]).unwrap()
            })
            .collect();
        let est = box_dimension(&pts, pd, 16).unwrap();
        assert!((est.value - 2f64.ln() / 3f64.ln()).abs() < 0.03, "{est:?}");
    }

    #[test]
    fn repeated_point_and_too_few_points() {
        let p = vec![ProjPoint::basis(1, 3); 600];
        assert_eq!(box_dimension(&p, pd, 8).unwrap().value, 0.0);
        assert_eq!(box_dimension(&p[..1], pd, 8).unwrap().value, 0.0);
        assert!(box_dimension(&circle(100), pd, 8).is_err());
    }

    #[test]
    fn word_indexing_is_lexicographic() {
        let gs = build_scenario("fuchsian-red-sl3", &ScenarioParams::default()).unwrap().generators;
        let words: Vec<String> = (0..4 * 27).map(|i| gs.format_word(&word_at_index(&gs, 4, i).unwrap())).collect();
        assert_eq!(words[0], "aaaa");
        assert_eq!(words[1], "aaab");
        let mut sorted = words.clone();
        let rank = |c: char| "aAbB".find(c).unwrap();
        sorted.sort_by_key(|w| w.chars().map(rank).collect::<Vec<_>>());
        assert_eq!(words, sorted);
        sorted.dedup();
        assert_eq!(sorted.len(), 108);
        assert!(word_at_index(&gs, 4, 108).is_err());
    }

    #[test]
    fn powers_converge_to_attracting_line() {
        let a = SquareMatrix::from_row_slice(2, &[2.0, 1.0, 1.0, 1.0]).unwrap();
        let gs = GeneratorSet::free(vec![a.clone(), SquareMatrix::identity(2)]).unwrap();
        let p = limit_point(&gs, &Word::new(vec![0; 12]).unwrap()).unwrap();
        let (line, _) = crate::linalg::attracting_pair(&a).unwrap().unwrap();
        assert!(pd(&p.line, &line) < 1e-9, "{:?} {:?}", p.line, line);
    }

    #[test]
    fn periodic_point_is_attracting_eigenline() {
        let s = build_scenario("schottky-so21", &ScenarioParams::default()).unwrap();
        let gs = &s.generators;
        // a b a^-1 is not cyclically reduced; its attracting line is a.(b+)
        for w in ["abA", "ab", "aBBA"] {
            let w = gs.parse_word(w).unwrap();
            let p = periodic_limit_point(gs, &w, PERIODIC_GAP).unwrap();
            let m = crate::words::word_matrix(gs, &w).unwrap();
            let (line, _) = crate::linalg::attracting_pair(&m).unwrap().unwrap();
            assert!(pd(&p.line, &line) < 1e-9);
            assert_eq!(p.word, w);
        }
        assert!(periodic_limit_point(gs, &Word::identity(), PERIODIC_GAP).is_err());
    }

    #[test]
    fn reducible_lines_stay_on_invariant_line() {
        let s = build_scenario("fuchsian-red-sl3", &ScenarioParams::default()).unwrap();
        let sample = sample_limit_set(&s.generators, 10, 200, 1).unwrap();
        assert_eq!(sample.points.len() + sample.rejected.len(), 200);
        for p in &sample.points {
            assert!(p.line.unit()[2].abs() < 1e-6);
            assert!(p.hyperplane.pairing(&p.line).abs() <= 3.0 * (-p.gap).exp());
        }
    }

    #[test]
    fn extension_moves_point_by_at_most_gap_bound() {
        let s = build_scenario("schottky-so21", &ScenarioParams::default()).unwrap();
        let gs = &s.generators;
        for i in [0u128, 17, 250] {
            let w = word_at_index(gs, 8, i).unwrap();
            let p = limit_point(gs, &w).unwrap();
            for l in 0..4u8 {
                if l == inverse_letter(*w.letters().last().unwrap()) {
                    continue;
                }
                let q = limit_point(gs, &w.concat(&Word::new(vec![l]).unwrap())).unwrap();
                assert!(pd(&p.line, &q.line) <= 10.0 * (-p.gap).exp());
            }
        }
    }

    #[test]
    fn distortion_examples() {
        for r in [0.01, 0.05, 0.1] {
            let g = SquareMatrix::diag(&[1f64.exp(), 1.0, (-1f64).exp()]).unwrap();
            let ratio = distortion_check(&g, r, 500, 0).unwrap();
            assert!(ratio <= 1.0 + 10.0 * r, "{r} {ratio}");
        }
        let rot = SquareMatrix::from_row_slice(3, &[0.8, -0.6, 0.0, 0.6, 0.8, 0.0, 0.0, 0.0, 1.0]).unwrap();
        let g = rot.conjugate(&SquareMatrix::diag(&[2.0, 1.0, 0.5]).unwrap());
        assert!(matches!(distortion_check(&g, 0.1, 10, 0), Err(Error::Input(_))));
        assert!(distortion_check(&SquareMatrix::identity(3), 0.1, 10, 0).is_err());
    }
}
