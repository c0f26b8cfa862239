//! Enumeration of balls and conjugacy classes in finitely generated matrix groups.
//!
//! Letters are encoded as `2 * generator + inverse_bit`, so the alphabet order is
//! `a, A, b, B, ...` (uppercase denotes the inverse). Every enumeration walks the
//! reduced-word prefix tree depth first in that order.
//!
//! Cartan and Jordan projections of long words cannot be read off the product
//! matrix directly: its small singular values are lost to rounding long before
//! the large ones are. The walker therefore carries the running products of all
//! exterior powers `Lambda^i g`, `1 <= i < n`, and recovers
//! `mu_1 + ... + mu_i = log sigma_1(Lambda^i g)` (respectively spectral radii for
//! the Jordan projection), which only needs the top singular value of each factor.

use std::collections::HashMap;
use std::fmt::Write as _;

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::format::fmt_sig;
use crate::linalg::{spectral_radius, top_singular_value, CartanVector, SquareMatrix};
use crate::reps::exterior_power_raw;

/// Default cap on the number of ball entries.
pub const DEFAULT_BUDGET: u64 = 10_000_000;

/// Grid used to identify numerically equal matrices in non-free mode.
pub const DEDUP_GRID: f64 = 1e-6;

const MAX_CONDITION: f64 = 1e10;

/// A finite generating set `a_1, ..., a_k` of matrices.
#[derive(Clone, Debug)]
pub struct GeneratorSet {
    gens: Vec<SquareMatrix>,
    inverses: Vec<SquareMatrix>,
    labels: Vec<char>,
    free: bool,
}

impl GeneratorSet {
    /// `labels` must be distinct lowercase ASCII letters; the uppercase letter
    /// names the inverse.
    pub fn new(gens: Vec<SquareMatrix>, labels: Vec<char>, free: bool) -> Result<Self> {
        if gens.is_empty() {
            return Err(Error::input("generating set is empty"));
        }
        if gens.len() != labels.len() {
            return Err(Error::input("one label per generator required"));
        }
        let n = gens[0].dim();
        for (g, l) in gens.iter().zip(&labels) {
            if g.dim() != n {
                return Err(Error::input(format!("generator {l} has dimension {}, expected {n}", g.dim())));
            }
            let cond = g.condition_number();
            if !(cond < MAX_CONDITION) {
                return Err(Error::input(format!("generator {l} has condition number {cond:e}")));
            }
        }
        for (i, l) in labels.iter().enumerate() {
            if !l.is_ascii_lowercase() {
                return Err(Error::input(format!("label {l:?} is not a lowercase ASCII letter")));
            }
            if labels[..i].contains(l) {
                return Err(Error::input(format!("label {l} repeated")));
            }
        }
        let inverses = gens.iter().map(|g| g.inverse()).collect();
        Ok(GeneratorSet { gens, inverses, labels, free })
    }

    /// Generators labelled `a, b, c, ...`, free mode.
    pub fn free(gens: Vec<SquareMatrix>) -> Result<Self> {
        let labels = (0..gens.len()).map(|i| (b'a' + i as u8) as char).collect();
        Self::new(gens, labels, true)
    }

    pub fn rank(&self) -> usize {
        self.gens.len()
    }

    pub fn dim(&self) -> usize {
        self.gens[0].dim()
    }

    pub fn is_free(&self) -> bool {
        self.free
    }

    pub fn with_free_flag(mut self, free: bool) -> Self {
        self.free = free;
        self
    }

    pub fn generators(&self) -> &[SquareMatrix] {
        &self.gens
    }

    pub fn labels(&self) -> &[char] {
        &self.labels
    }

    /// Matrix of a single letter.
    pub fn letter_matrix(&self, letter: u8) -> &SquareMatrix {
        let g = (letter / 2) as usize;
        if letter.is_multiple_of(2) {
            &self.gens[g]
        } else {
            &self.inverses[g]
        }
    }

    /// Generators followed by their inverses, in alphabet order.
    pub fn symmetric_set(&self) -> Vec<SquareMatrix> {
        (0..self.alphabet_size() as u8).map(|l| self.letter_matrix(l).clone()).collect()
    }

    pub fn alphabet_size(&self) -> usize {
        2 * self.gens.len()
    }

    /// Applies `f` to every generator, keeping labels and mode.
    pub fn map<F>(&self, f: F) -> Result<GeneratorSet>
    where
        F: Fn(&SquareMatrix) -> Result<SquareMatrix>,
    {
        let gens = self.gens.iter().map(f).collect::<Result<Vec<_>>>()?;
        GeneratorSet::new(gens, self.labels.clone(), self.free)
    }

    pub fn parse_word(&self, s: &str) -> Result<Word> {
        if s == "1" || s.is_empty() {
            return Ok(Word::identity());
        }
        let mut letters = Vec::with_capacity(s.len());
        for c in s.chars() {
            let idx = self
                .labels
                .iter()
                .position(|l| *l == c.to_ascii_lowercase())
                .ok_or_else(|| Error::input(format!("unknown letter {c:?} in word {s:?}")))?;
            letters.push(2 * idx as u8 + u8::from(c.is_ascii_uppercase()));
        }
        Word::new(letters)
    }

    pub fn format_word(&self, w: &Word) -> String {
        if w.is_empty() {
            return "1".to_string();
        }
        w.letters()
            .iter()
            .map(|&l| {
                let c = self.labels[(l / 2) as usize];
                if l % 2 == 1 {
                    c.to_ascii_uppercase()
                } else {
                    c
                }
            })
            .collect()
    }

    fn check_word(&self, w: &Word) -> Result<()> {
        match w.letters().iter().find(|&&l| l as usize >= self.alphabet_size()) {
            Some(l) => Err(Error::input(format!("letter index {l} outside alphabet of size {}", self.alphabet_size()))),
            None => Ok(()),
        }
    }
}

/// A reduced word over the letters `a_i^(+-1)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word {
    letters: Vec<u8>,
}

#[inline]
pub fn inverse_letter(l: u8) -> u8 {
    l ^ 1
}

impl Word {
    pub fn new(letters: Vec<u8>) -> Result<Self> {
        if let Some(w) = letters.windows(2).find(|w| w[1] == inverse_letter(w[0])) {
            return Err(Error::input(format!("word is not reduced: letters {} {} cancel", w[0], w[1])));
        }
        Ok(Word { letters })
    }

    pub fn identity() -> Self {
        Word { letters: Vec::new() }
    }

    pub fn letters(&self) -> &[u8] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn inverse(&self) -> Word {
        Word { letters: self.letters.iter().rev().map(|&l| inverse_letter(l)).collect() }
    }

    /// Reduced concatenation `self * other`.
    pub fn concat(&self, other: &Word) -> Word {
        let mut letters = self.letters.clone();
        for &l in &other.letters {
            if letters.last() == Some(&inverse_letter(l)) {
                letters.pop();
            } else {
                letters.push(l);
            }
        }
        Word { letters }
    }

    pub fn is_cyclically_reduced(&self) -> bool {
        match (self.letters.first(), self.letters.last()) {
            (Some(&f), Some(&l)) => self.letters.len() == 1 || f != inverse_letter(l),
            _ => true,
        }
    }

    /// True when this word is cyclically reduced and lexicographically least
    /// among its rotations.
    pub fn is_class_representative(&self) -> bool {
        !self.letters.is_empty() && self.is_cyclically_reduced() && is_min_rotation(&self.letters)
    }
}

fn is_min_rotation(w: &[u8]) -> bool {
    let n = w.len();
    (1..n).all(|r| {
        for i in 0..n {
            let a = w[(r + i) % n];
            let b = w[i];
            if a != b {
                return a > b;
            }
        }
        true
    })
}

/// Ordered product of the generator matrices along `w`; the empty word gives the identity.
pub fn word_matrix(gs: &GeneratorSet, w: &Word) -> Result<SquareMatrix> {
    gs.check_word(w)?;
    let n = gs.dim();
    let mut acc = DMatrix::identity(n, n);
    for &l in w.letters() {
        acc = &acc * gs.letter_matrix(l).as_matrix();
    }
    Ok(SquareMatrix::from_unimodular(acc))
}

/// One element of a ball: its word, matrix and Cartan projection.
#[derive(Clone, Debug)]
pub struct BallEntry {
    pub word: Word,
    pub matrix: SquareMatrix,
    pub mu: CartanVector,
}

/// One conjugacy class: its canonical cyclic word and Jordan projection.
#[derive(Clone, Debug)]
pub struct ConjClassEntry {
    pub representative: Word,
    pub lambda: CartanVector,
}

/// A matrix with an external log-scale factor, so long products never overflow.
#[derive(Clone)]
struct Scaled {
    m: DMatrix<f64>,
    log_scale: f64,
}

impl Scaled {
    fn identity(d: usize) -> Self {
        Scaled { m: DMatrix::identity(d, d), log_scale: 0.0 }
    }

    fn times(&self, rhs: &DMatrix<f64>) -> Self {
        let mut m = &self.m * rhs;
        let mut log_scale = self.log_scale;
        let amax = m.amax();
        if amax > 1e50 || (amax < 1e-50 && amax > 0.0) {
            m /= amax;
            log_scale += amax.ln();
        }
        Scaled { m, log_scale }
    }
}

/// Running products of `Lambda^1 g, ..., Lambda^(n-1) g`.
#[derive(Clone)]
struct Chain {
    powers: Vec<Scaled>,
}

/// Exterior powers of every letter, precomputed.
struct ChainTables {
    per_letter: Vec<Vec<DMatrix<f64>>>,
    dims: Vec<usize>,
}

impl ChainTables {
    fn new(gs: &GeneratorSet) -> Self {
        let n = gs.dim();
        let per_letter = (0..gs.alphabet_size() as u8)
            .map(|l| (1..n).map(|i| exterior_power_raw(gs.letter_matrix(l).as_matrix(), i)).collect())
            .collect::<Vec<Vec<_>>>();
        let dims = per_letter[0].iter().map(|m| m.nrows()).collect();
        ChainTables { per_letter, dims }
    }

    fn identity(&self) -> Chain {
        Chain { powers: self.dims.iter().map(|&d| Scaled::identity(d)).collect() }
    }

    fn extend(&self, chain: &Chain, letter: u8) -> Chain {
        let tables = &self.per_letter[letter as usize];
        Chain { powers: chain.powers.iter().zip(tables).map(|(p, t)| p.times(t)).collect() }
    }
}

/// Converts partial sums `s_i = v_1 + ... + v_i` (`s_n = 0`) into a Cartan vector.
fn from_partial_sums(sums: &[f64]) -> Result<CartanVector> {
    let mut values = Vec::with_capacity(sums.len() + 1);
    let mut prev = 0.0;
    for &s in sums {
        values.push(s - prev);
        prev = s;
    }
    values.push(-prev);
    CartanVector::from_unsorted(values)
}

impl Chain {
    fn cartan(&self) -> Result<CartanVector> {
        let sums = self
            .powers
            .iter()
            .map(|p| Ok(top_singular_value(&p.m)?.ln() + p.log_scale))
            .collect::<Result<Vec<f64>>>()?;
        from_partial_sums(&sums)
    }

    fn jordan(&self) -> Result<CartanVector> {
        let sums = self
            .powers
            .iter()
            .map(|p| {
                let r = spectral_radius(&p.m)?;
                if r <= 0.0 {
                    return Err(Error::numeric("vanishing spectral radius"));
                }
                Ok(r.ln() + p.log_scale)
            })
            .collect::<Result<Vec<f64>>>()?;
        from_partial_sums(&sums)
    }

    fn matrix(&self) -> SquareMatrix {
        let p = &self.powers[0];
        SquareMatrix::from_unimodular(&p.m * p.log_scale.exp())
    }
}

/// Cartan projection of a word, computed through the exterior-power chain.
pub fn word_cartan(gs: &GeneratorSet, w: &Word) -> Result<CartanVector> {
    gs.check_word(w)?;
    let tables = ChainTables::new(gs);
    let mut chain = tables.identity();
    for &l in w.letters() {
        chain = tables.extend(&chain, l);
    }
    chain.cartan()
}

/// Jordan projection of a word, computed through the exterior-power chain.
pub fn word_jordan(gs: &GeneratorSet, w: &Word) -> Result<CartanVector> {
    gs.check_word(w)?;
    let tables = ChainTables::new(gs);
    let mut chain = tables.identity();
    for &l in w.letters() {
        chain = tables.extend(&chain, l);
    }
    chain.jordan()
}

/// Number of reduced words of length exactly `len` in a free group of rank `k`.
pub fn sphere_size(k: usize, len: usize) -> u64 {
    if len == 0 {
        return 1;
    }
    let k = k as u64;
    (2 * k).saturating_mul((2 * k - 1).saturating_pow(len as u32 - 1))
}

/// Number of reduced words of length at most `max_len`.
pub fn ball_size(k: usize, max_len: usize) -> u64 {
    (0..=max_len).fold(0u64, |acc, l| acc.saturating_add(sphere_size(k, l)))
}

fn check_budget(gs: &GeneratorSet, max_len: usize, budget: u64) -> Result<()> {
    let total = ball_size(gs.rank(), max_len);
    if total > budget {
        return Err(Error::Resource(format!(
            "ball of radius {max_len} in rank {} has {total} reduced words, above the budget of {budget}",
            gs.rank()
        )));
    }
    Ok(())
}

/// Depth-first walk over reduced words of length <= `max_len`, in alphabet
/// order, calling `visit` on every node. Subtrees below each length-2 prefix
/// run in parallel; their outputs are concatenated in prefix order, so the
/// result is identical to the sequential preorder.
fn walk<T, F>(gs: &GeneratorSet, max_len: usize, visit: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&[u8], &Chain) -> Result<Option<T>> + Sync,
{
    let tables = ChainTables::new(gs);
    let alphabet = gs.alphabet_size() as u8;

    fn subtree<T, F>(
        tables: &ChainTables,
        alphabet: u8,
        max_len: usize,
        word: &mut Vec<u8>,
        chain: &Chain,
        visit: &F,
        out: &mut Vec<T>,
    ) -> Result<()>
    where
        F: Fn(&[u8], &Chain) -> Result<Option<T>>,
    {
        if let Some(x) = visit(word, chain)? {
            out.push(x);
        }
        if word.len() == max_len {
            return Ok(());
        }
        let last = word.last().copied();
        for l in 0..alphabet {
            if Some(inverse_letter(l)) == last {
                continue;
            }
            let next = tables.extend(chain, l);
            word.push(l);
            subtree(tables, alphabet, max_len, word, &next, visit, out)?;
            word.pop();
        }
        Ok(())
    }

    let root = tables.identity();
    let mut out = Vec::new();
    if let Some(x) = visit(&[], &root)? {
        out.push(x);
    }
    if max_len == 0 {
        return Ok(out);
    }
    for a in 0..alphabet {
        let chain_a = tables.extend(&root, a);
        if let Some(x) = visit(&[a], &chain_a)? {
            out.push(x);
        }
        if max_len == 1 {
            continue;
        }
        let seconds: Vec<u8> = (0..alphabet).filter(|&b| b != inverse_letter(a)).collect();
        let parts = seconds
            .par_iter()
            .map(|&b| {
                let mut local = Vec::new();
                let chain_ab = tables.extend(&chain_a, b);
                let mut word = vec![a, b];
                subtree(&tables, alphabet, max_len, &mut word, &chain_ab, &visit, &mut local)?;
                Ok(local)
            })
            .collect::<Result<Vec<Vec<T>>>>()?;
        out.extend(parts.into_iter().flatten());
    }
    Ok(out)
}

/// Every element of word length <= `max_len`, identity included.
///
/// In free mode there is exactly one entry per reduced word, in depth-first
/// alphabet order. Otherwise the ball is explored breadth first and entries
/// whose matrices agree on the [`DEDUP_GRID`] are merged, keeping the first
/// (shortest) word.
pub fn enumerate_ball(gs: &GeneratorSet, max_len: usize, budget: u64) -> Result<Vec<BallEntry>> {
    if !gs.is_free() {
        return enumerate_ball_dedup(gs, max_len, budget);
    }
    check_budget(gs, max_len, budget)?;
    walk(gs, max_len, |w, chain| {
        Ok(Some(BallEntry { word: Word { letters: w.to_vec() }, matrix: chain.matrix(), mu: chain.cartan()? }))
    })
}

/// Word lengths and Cartan projections of the ball, without storing matrices.
pub fn ball_projections(gs: &GeneratorSet, max_len: usize, budget: u64) -> Result<Vec<(usize, CartanVector)>> {
    if !gs.is_free() {
        return Ok(enumerate_ball_dedup(gs, max_len, budget)?.into_iter().map(|e| (e.word.len(), e.mu)).collect());
    }
    check_budget(gs, max_len, budget)?;
    walk(gs, max_len, |w, chain| Ok(Some((w.len(), chain.cartan()?))))
}

/// Applies `f(word length, matrix)` to every element of the ball, in the
/// order of [`enumerate_ball`], without storing the entries.
pub fn ball_map<T, F>(gs: &GeneratorSet, max_len: usize, budget: u64, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize, &SquareMatrix) -> Result<T> + Sync,
{
    if !gs.is_free() {
        return enumerate_ball_dedup(gs, max_len, budget)?.iter().map(|e| f(e.word.len(), &e.matrix)).collect();
    }
    check_budget(gs, max_len, budget)?;
    walk(gs, max_len, |w, chain| Ok(Some(f(w.len(), &chain.matrix())?)))
}

fn dedup_key(m: &DMatrix<f64>) -> Vec<i64> {
    let first = m.row(0).iter().copied().find(|x| x.abs() > DEDUP_GRID).unwrap_or(1.0);
    let sign = if first < 0.0 { -1.0 } else { 1.0 };
    m.transpose().iter().map(|x| (sign * x / DEDUP_GRID).round() as i64).collect()
}

fn enumerate_ball_dedup(gs: &GeneratorSet, max_len: usize, budget: u64) -> Result<Vec<BallEntry>> {
    let tables = ChainTables::new(gs);
    let mut seen: HashMap<Vec<i64>, ()> = HashMap::new();
    let root = tables.identity();
    seen.insert(dedup_key(&root.powers[0].m), ());
    let mut out = vec![BallEntry { word: Word::identity(), matrix: root.matrix(), mu: root.cartan()? }];
    let mut frontier = vec![(Vec::<u8>::new(), root)];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for (word, chain) in &frontier {
            for l in 0..gs.alphabet_size() as u8 {
                if word.last() == Some(&inverse_letter(l)) {
                    continue;
                }
                let c = tables.extend(chain, l);
                let m = c.matrix();
                if seen.insert(dedup_key(m.as_matrix()), ()).is_some() {
                    continue;
                }
                if out.len() as u64 >= budget {
                    return Err(Error::Resource(format!("ball exceeds the budget of {budget} entries")));
                }
                let mut w = word.clone();
                w.push(l);
                out.push(BallEntry { word: Word { letters: w.clone() }, matrix: m, mu: c.cartan()? });
                next.push((w, c));
            }
        }
        frontier = next;
    }
    Ok(out)
}

/// One entry per nontrivial conjugacy class with a cyclically reduced
/// representative of length <= `max_len`. Classes of `g` and `g^-1` are
/// distinct entries; proper powers are kept.
pub fn enumerate_conjugacy_classes(gs: &GeneratorSet, max_len: usize, budget: u64) -> Result<Vec<ConjClassEntry>> {
    if !gs.is_free() {
        return Err(Error::Unsupported("conjugacy classes are only enumerated for free generating sets".to_string()));
    }
    check_budget(gs, max_len, budget)?;
    walk(gs, max_len, |w, chain| {
        let word = Word { letters: w.to_vec() };
        if !word.is_class_representative() {
            return Ok(None);
        }
        Ok(Some(ConjClassEntry { lambda: chain.jordan()?, representative: word }))
    })
}

/// Ball export: `word,length,mu_1..mu_n`.
pub fn ball_csv(gs: &GeneratorSet, entries: &[BallEntry]) -> String {
    let n = gs.dim();
    let mut s = String::from("word,length");
    for i in 1..=n {
        let _ = write!(s, ",mu_{i}");
    }
    s.push('\n');
    for e in entries {
        let _ = write!(s, "{},{}", gs.format_word(&e.word), e.word.len());
        for v in e.mu.values() {
            let _ = write!(s, ",{}", fmt_sig(*v));
        }
        s.push('\n');
    }
    s
}

/// Conjugacy export: `word,length,lambda_1..lambda_n`.
pub fn conjugacy_csv(gs: &GeneratorSet, entries: &[ConjClassEntry]) -> String {
    let n = gs.dim();
    let mut s = String::from("word,length");
    for i in 1..=n {
        let _ = write!(s, ",lambda_{i}");
    }
    s.push('\n');
    for e in entries {
        let _ = write!(s, "{},{}", gs.format_word(&e.representative), e.representative.len());
        for v in e.lambda.values() {
            let _ = write!(s, ",{}", fmt_sig(*v));
        }
        s.push('\n');
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{cartan_projection, jordan_projection};
    use std::collections::HashSet;

    fn hyperbolic_pair() -> GeneratorSet {
        let a = SquareMatrix::diag(&[2.0, 0.5]).unwrap();
        let r = SquareMatrix::from_row_slice(2, &[0.6, -0.8, 0.8, 0.6]).unwrap();
        let b = r.conjugate(&a);
        GeneratorSet::free(vec![a, b]).unwrap()
    }

    #[test]
    fn word_parsing_and_reduction() {
        let gs = hyperbolic_pair();
        let w = gs.parse_word("aBb").unwrap_err();
        assert!(matches!(w, Error::Input(_)));
        assert!(gs.parse_word("ac").is_err());
        let w = gs.parse_word("aBab").unwrap();
        assert_eq!(gs.format_word(&w), "aBab");
        assert_eq!(gs.format_word(&Word::identity()), "1");
        assert_eq!(w.concat(&w.inverse()), Word::identity());
    }

    #[test]
    fn word_matrix_products() {
        let gs = hyperbolic_pair();
        let id = word_matrix(&gs, &Word::identity()).unwrap();
        assert!(id.max_abs_diff(&SquareMatrix::identity(2)) == 0.0);
        let ab = word_matrix(&gs, &gs.parse_word("ab").unwrap()).unwrap();
        let oracle = gs.generators()[0].as_matrix() * gs.generators()[1].as_matrix();
        assert!((ab.as_matrix() - oracle).amax() < 1e-15);
        let bad = Word::new(vec![9]).unwrap();
        assert!(word_matrix(&gs, &bad).is_err());
    }

    #[test]
    fn ball_counts() {
        let gs = hyperbolic_pair();
        assert_eq!(enumerate_ball(&gs, 0, DEFAULT_BUDGET).unwrap().len(), 1);
        assert_eq!(enumerate_ball(&gs, 3, DEFAULT_BUDGET).unwrap().len(), 53);
        assert_eq!(ball_size(2, 3), 53);
        let err = enumerate_ball(&gs, 12, 1000).unwrap_err();
        assert!(matches!(err, Error::Resource(ref m) if m.contains("1000")));
    }

    #[test]
    fn ball_entries_are_consistent() {
        let gs = hyperbolic_pair();
        let ball = enumerate_ball(&gs, 5, DEFAULT_BUDGET).unwrap();
        let words: HashSet<_> = ball.iter().map(|e| e.word.clone()).collect();
        assert_eq!(words.len(), ball.len());
        for e in ball.iter().step_by(7) {
            let direct = word_matrix(&gs, &e.word).unwrap();
            let rel = (direct.as_matrix() - e.matrix.as_matrix()).amax() / direct.as_matrix().amax();
            assert!(rel < 1e-8);
            assert!(cartan_projection(&direct).unwrap().max_abs_diff(&e.mu) < 1e-9);
        }
    }

    #[test]
    fn dedup_mode_merges_equal_elements() {
        // A commuting pair: a and b = a^2 generate Z, so the ball of radius 2
        // contains a^k for |k| <= 4 only.
        let a = SquareMatrix::diag(&[1.5, 1.0 / 1.5]).unwrap();
        let b = &a * &a;
        let gs = GeneratorSet::new(vec![a, b], vec!['a', 'b'], false).unwrap();
        let ball = enumerate_ball(&gs, 2, DEFAULT_BUDGET).unwrap();
        assert_eq!(ball.len(), 9);
        assert!(ball.iter().all(|e| e.word.len() <= 2));
        assert!(matches!(enumerate_conjugacy_classes(&gs, 2, DEFAULT_BUDGET), Err(Error::Unsupported(_))));
    }

    #[test]
    fn conjugacy_small_counts() {
        let gs = hyperbolic_pair();
        assert_eq!(enumerate_conjugacy_classes(&gs, 1, DEFAULT_BUDGET).unwrap().len(), 4);
        assert_eq!(enumerate_conjugacy_classes(&gs, 2, DEFAULT_BUDGET).unwrap().len(), 12);
    }

    #[test]
    fn class_of_generator_has_its_jordan_projection() {
        let gs = hyperbolic_pair();
        let classes = enumerate_conjugacy_classes(&gs, 1, DEFAULT_BUDGET).unwrap();
        let a = classes.iter().find(|c| c.representative.letters() == [0]).unwrap();
        let direct = jordan_projection(&gs.generators()[0]).unwrap();
        assert!(a.lambda.max_abs_diff(&direct) < 1e-12);
    }

    #[test]
    fn rotation_canonical_form() {
        assert!(is_min_rotation(&[0, 2, 0, 3]));
        assert!(!is_min_rotation(&[2, 0, 3, 0]));
        assert!(is_min_rotation(&[0, 0]));
        let w = Word::new(vec![0, 2, 1]).unwrap();
        assert!(!w.is_cyclically_reduced());
    }

    #[test]
    fn long_words_keep_small_singular_values() {
        // mu_2 of a length-30 word is about -30 log 2 · c; the direct SVD loses it
        // but the chain keeps the zero-sum structure and matches mu_1.
        let gs = hyperbolic_pair();
        let w = Word::new((0..30).map(|i| if i % 2 == 0 { 0 } else { 2 }).collect()).unwrap();
        let mu = word_cartan(&gs, &w).unwrap();
        assert!((mu.mu(1) + mu.mu(2)).abs() < 1e-12);
        let direct = cartan_projection(&word_matrix(&gs, &w).unwrap());
        if let Ok(d) = direct {
            assert!((d.mu(1) - mu.mu(1)).abs() < 1e-9);
        }
    }
}
