//! Numerical substrate: unimodular matrices, Cartan and Jordan projections,
//! the round metric on projective space, and proximality diagnostics.
//!
//! Everything is specialised to `SL(n, R)`: the Cartan projection is the
//! vector of log singular values and the Jordan projection the vector of log
//! eigenvalue moduli, both sorted nonincreasingly.

use std::fmt;
use std::ops::Mul;

use nalgebra::{Complex, DMatrix, DVector, Schur, SVD};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest accepted matrix dimension. Native scenarios stay at n <= 16, the
/// representation functors (tensor products, exterior powers) go higher.
pub const MAX_DIM: usize = 256;

/// Ties between singular values or eigenvalue moduli closer than this are
/// treated as equal by the proximality predicates.
pub const TIE_TOL: f64 = 1e-12;

/// Proximality threshold used when a scenario does not provide one.
pub const DEFAULT_PROXIMALITY_EPS: f64 = 0.1;

const SVD_EPS: f64 = f64::EPSILON;
const ZERO_SUM_TOL: f64 = 1e-8;
const MONOTONE_TOL: f64 = 1e-12;

/// A real `n x n` matrix of determinant one.
#[derive(Clone, PartialEq)]
pub struct SquareMatrix {
    m: DMatrix<f64>,
}

impl SquareMatrix {
    /// Builds a unimodular matrix, rescaling by `det^(-1/n)`.
    ///
    /// Matrices with nonpositive determinant or non-finite entries are rejected.
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        let n = m.nrows();
        if n != m.ncols() {
            return Err(Error::input(format!("matrix is {}x{}, expected square", n, m.ncols())));
        }
        if !(2..=MAX_DIM).contains(&n) {
            return Err(Error::input(format!("dimension {n} outside 2..={MAX_DIM}")));
        }
        if m.iter().any(|x| !x.is_finite()) {
            return Err(Error::input("matrix has non-finite entries"));
        }
        let det = m.clone().lu().determinant();
        if !det.is_finite() || det <= 0.0 {
            return Err(Error::input(format!(
                "determinant {det:e} is not positive; cannot renormalise into SL({n},R)"
            )));
        }
        let scale = det.powf(-1.0 / n as f64);
        let m = m * scale;
        let det = m.clone().lu().determinant();
        let max_abs = m.amax();
        if (det - 1.0).abs() > 1e-6 * max_abs.powi(n as i32).max(1.0) {
            return Err(Error::numeric(format!("renormalised determinant {det} is not 1")));
        }
        Ok(SquareMatrix { m })
    }

    pub fn from_row_slice(n: usize, entries: &[f64]) -> Result<Self> {
        if entries.len() != n * n {
            return Err(Error::input(format!("expected {} entries, got {}", n * n, entries.len())));
        }
        Self::new(DMatrix::from_row_slice(n, n, entries))
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::input("rows have inconsistent lengths"));
        }
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        Self::from_row_slice(n, &flat)
    }

    pub fn diag(values: &[f64]) -> Result<Self> {
        Self::new(DMatrix::from_diagonal(&DVector::from_column_slice(values)))
    }

    pub fn identity(n: usize) -> Self {
        assert!((2..=MAX_DIM).contains(&n), "dimension {n} out of range");
        SquareMatrix { m: DMatrix::identity(n, n) }
    }

    /// Wraps a matrix already known to be (numerically) unimodular, such as a
    /// product of unimodular matrices.
    pub(crate) fn from_unimodular(m: DMatrix<f64>) -> Self {
        debug_assert!(m.is_square());
        SquareMatrix { m }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.m
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.m[(i, j)]
    }

    pub fn try_mul(&self, other: &SquareMatrix) -> Result<SquareMatrix> {
        if self.dim() != other.dim() {
            return Err(Error::input(format!(
                "cannot multiply {}x{} by {}x{}",
                self.dim(),
                self.dim(),
                other.dim(),
                other.dim()
            )));
        }
        Ok(SquareMatrix::from_unimodular(&self.m * &other.m))
    }

    pub fn inverse(&self) -> SquareMatrix {
        let inv = self.m.clone().lu().try_inverse().expect("unimodular matrices are invertible");
        SquareMatrix::from_unimodular(inv)
    }

    pub fn transpose(&self) -> SquareMatrix {
        SquareMatrix::from_unimodular(self.m.transpose())
    }

    pub fn pow(&self, k: u32) -> SquareMatrix {
        let mut acc = DMatrix::identity(self.dim(), self.dim());
        let mut base = self.m.clone();
        let mut e = k;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            e >>= 1;
        }
        SquareMatrix::from_unimodular(acc)
    }

    /// `self * other * self^-1`.
    pub fn conjugate(&self, other: &SquareMatrix) -> SquareMatrix {
        SquareMatrix::from_unimodular(&self.m * &other.m * self.inverse().m)
    }

    /// Condition number in the spectral norm.
    pub fn condition_number(&self) -> f64 {
        let sv = self.m.clone().singular_values();
        sv.max() / sv.min()
    }

    pub fn max_abs_diff(&self, other: &SquareMatrix) -> f64 {
        (&self.m - &other.m).amax()
    }
}

impl fmt::Debug for SquareMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SquareMatrix{}", self.m)
    }
}

impl Mul for &SquareMatrix {
    type Output = SquareMatrix;

    fn mul(self, rhs: &SquareMatrix) -> SquareMatrix {
        self.try_mul(rhs).expect("dimension mismatch in matrix product")
    }
}

/// A nonincreasing zero-sum vector: the Cartan or Jordan projection of an
/// element of `SL(n, R)`, in natural-log units.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CartanVector {
    values: Vec<f64>,
}

impl CartanVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::input("Cartan vectors need at least two entries"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::numeric("Cartan vector has non-finite entries"));
        }
        if values.windows(2).any(|w| w[0] < w[1] - MONOTONE_TOL) {
            return Err(Error::input(format!("values {values:?} are not nonincreasing")));
        }
        let sum: f64 = values.iter().sum();
        if sum.abs() > ZERO_SUM_TOL {
            return Err(Error::numeric(format!(
                "values {values:?} sum to {sum:e}; singular values or eigenvalues are not resolved"
            )));
        }
        Ok(CartanVector { values })
    }

    /// Sorts `values` nonincreasingly (stable for ties) and validates.
    pub fn from_unsorted(mut values: Vec<f64>) -> Result<Self> {
        values.sort_by(|a, b| b.total_cmp(a));
        Self::new(values)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// 1-based coordinate access, matching the `mu_1 >= mu_2 >= ...` convention.
    pub fn mu(&self, i: usize) -> f64 {
        self.values[i - 1]
    }

    pub fn max_abs_diff(&self, other: &CartanVector) -> f64 {
        self.values.iter().zip(&other.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }
}

/// A linear form `sum c_i eps_i` on Cartan vectors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearForm {
    coeffs: Vec<f64>,
}

impl LinearForm {
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.is_empty() || coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::input("linear form needs finite coefficients"));
        }
        Ok(LinearForm { coeffs })
    }

    /// `eps_i - eps_j` (1-based).
    pub fn alpha(i: usize, j: usize, n: usize) -> Result<Self> {
        if i == 0 || j == 0 || i > n || j > n || i == j {
            return Err(Error::input(format!("alpha({i},{j}) invalid for n = {n}")));
        }
        let mut c = vec![0.0; n];
        c[i - 1] = 1.0;
        c[j - 1] = -1.0;
        Ok(LinearForm { coeffs: c })
    }

    /// The coordinate form `eps_i` (1-based).
    pub fn epsilon(i: usize, n: usize) -> Result<Self> {
        if i == 0 || i > n {
            return Err(Error::input(format!("eps_{i} invalid for n = {n}")));
        }
        let mut c = vec![0.0; n];
        c[i - 1] = 1.0;
        Ok(LinearForm { coeffs: c })
    }

    /// Fundamental weight `w_i = eps_1 + ... + eps_i`.
    pub fn weight(i: usize, n: usize) -> Result<Self> {
        if i == 0 || i >= n {
            return Err(Error::input(format!("w_{i} invalid for n = {n}")));
        }
        let c = (0..n).map(|k| if k < i { 1.0 } else { 0.0 }).collect();
        Ok(LinearForm { coeffs: c })
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn dim(&self) -> usize {
        self.coeffs.len()
    }

    pub fn scaled(&self, t: f64) -> LinearForm {
        LinearForm { coeffs: self.coeffs.iter().map(|c| c * t).collect() }
    }

    pub fn eval(&self, v: &CartanVector) -> Result<f64> {
        if v.dim() != self.dim() {
            return Err(Error::input(format!(
                "form of dimension {} applied to vector of dimension {}",
                self.dim(),
                v.dim()
            )));
        }
        Ok(self.eval_slice(v.values()))
    }

    pub(crate) fn eval_slice(&self, v: &[f64]) -> f64 {
        self.coeffs.iter().zip(v).map(|(c, x)| c * x).sum()
    }
}

fn canonical_unit(v: &[f64]) -> Result<Vec<f64>> {
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::input("projective point has non-finite coordinates"));
    }
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(Error::input("the zero vector is not a projective point"));
    }
    let mut u: Vec<f64> = v.iter().map(|x| x / norm).collect();
    if let Some(first) = u.iter().find(|x| x.abs() > 1e-10) {
        if *first < 0.0 {
            u.iter_mut().for_each(|x| *x = -*x);
        }
    }
    Ok(u)
}

/// A line in `R^n`, stored as a sign-canonical unit vector.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProjPoint {
    unit: Vec<f64>,
}

/// A hyperplane of `R^n`, stored as a sign-canonical unit covector whose
/// kernel is the hyperplane.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DualProjPoint {
    unit: Vec<f64>,
}

/// Common view of lines and hyperplanes as unit vectors up to sign.
pub trait Projective {
    fn unit(&self) -> &[f64];

    fn dim(&self) -> usize {
        self.unit().len()
    }
}

impl ProjPoint {
    pub fn new(v: &[f64]) -> Result<Self> {
        Ok(ProjPoint { unit: canonical_unit(v)? })
    }

    /// The coordinate line `[e_i]` (1-based).
    pub fn basis(i: usize, n: usize) -> Self {
        let mut v = vec![0.0; n];
        v[i - 1] = 1.0;
        ProjPoint { unit: v }
    }

    /// Image under the linear action of `g`.
    pub fn transform(&self, g: &SquareMatrix) -> Result<ProjPoint> {
        let v = g.as_matrix() * DVector::from_column_slice(&self.unit);
        ProjPoint::new(v.as_slice())
    }
}

impl DualProjPoint {
    pub fn new(v: &[f64]) -> Result<Self> {
        Ok(DualProjPoint { unit: canonical_unit(v)? })
    }

    pub fn basis(i: usize, n: usize) -> Self {
        let mut v = vec![0.0; n];
        v[i - 1] = 1.0;
        DualProjPoint { unit: v }
    }

    /// Image under the dual action `f -> f o g^-1`, i.e. the covector of `g(ker f)`.
    pub fn transform(&self, g: &SquareMatrix) -> Result<DualProjPoint> {
        let ginv_t = g.inverse().transpose();
        let v = ginv_t.as_matrix() * DVector::from_column_slice(&self.unit);
        DualProjPoint::new(v.as_slice())
    }

    /// `|f(v)|` for unit representatives; zero iff the hyperplane contains the line.
    pub fn pairing(&self, line: &ProjPoint) -> f64 {
        dot(&self.unit, &line.unit).abs()
    }
}

impl Projective for ProjPoint {
    fn unit(&self) -> &[f64] {
        &self.unit
    }
}

impl Projective for DualProjPoint {
    fn unit(&self) -> &[f64] {
        &self.unit
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Angle between two lines, in `[0, pi/2]`.
///
/// Evaluated as `2 atan2(|p - s q|, |p + s q|)` with `s = sign <p, q>`, which stays
/// accurate for nearly equal points where `acos` would not.
pub fn proj_distance<P: Projective>(p: &P, q: &P) -> Result<f64> {
    if p.dim() != q.dim() {
        return Err(Error::input(format!("points live in dimensions {} and {}", p.dim(), q.dim())));
    }
    Ok(unit_angle(p.unit(), q.unit()))
}

pub(crate) fn unit_angle(p: &[f64], q: &[f64]) -> f64 {
    let s = if dot(p, q) < 0.0 { -1.0 } else { 1.0 };
    let (mut minus, mut plus) = (0.0, 0.0);
    for (a, b) in p.iter().zip(q) {
        minus += (a - s * b).powi(2);
        plus += (a + s * b).powi(2);
    }
    2.0 * minus.sqrt().atan2(plus.sqrt())
}

/// Max-metric on `P(R^n) x P((R^n)*)`.
pub fn sym_distance(a: (&ProjPoint, &DualProjPoint), b: (&ProjPoint, &DualProjPoint)) -> Result<f64> {
    Ok(proj_distance(a.0, b.0)?.max(proj_distance(a.1, b.1)?))
}

/// Full decomposition `g = U diag(exp(mu)) V^T`.
pub fn cartan_decomposition(g: &SquareMatrix) -> Result<(DMatrix<f64>, CartanVector, DMatrix<f64>)> {
    let svd = SVD::try_new(g.as_matrix().clone(), true, true, SVD_EPS, 0)
        .ok_or_else(|| Error::numeric("singular value decomposition did not converge"))?;
    let mu = log_values(svd.singular_values.as_slice())?;
    Ok((svd.u.unwrap(), mu, svd.v_t.unwrap()))
}

fn log_values(sv: &[f64]) -> Result<CartanVector> {
    if sv.iter().any(|s| *s <= 0.0) {
        return Err(Error::numeric("matrix is numerically singular"));
    }
    CartanVector::from_unsorted(sv.iter().map(|s| s.ln()).collect())
}

/// Logarithms of the singular values of `g`, sorted nonincreasingly.
pub fn cartan_projection(g: &SquareMatrix) -> Result<CartanVector> {
    let svd = SVD::try_new(g.as_matrix().clone(), false, false, SVD_EPS, 0)
        .ok_or_else(|| Error::numeric("singular value decomposition did not converge"))?;
    log_values(svd.singular_values.as_slice())
}

/// Largest singular value of an arbitrary real matrix.
pub(crate) fn top_singular_value(m: &DMatrix<f64>) -> Result<f64> {
    let svd = SVD::try_new(m.clone(), false, false, SVD_EPS, 0)
        .ok_or_else(|| Error::numeric("singular value decomposition did not converge"))?;
    Ok(svd.singular_values.max())
}

/// Complex eigenvalues of a real matrix, computed on the balanced matrix.
pub(crate) fn eigenvalues(m: &DMatrix<f64>) -> Result<Vec<Complex<f64>>> {
    let mut balanced = m.clone();
    nalgebra::linalg::balancing::balance_parlett_reinsch(&mut balanced);
    let schur = Schur::try_new(balanced, SVD_EPS, 10_000).ok_or_else(|| {
        Error::numeric(format!(
            "Schur iteration did not converge for a {}x{} matrix (max entry {:e})",
            m.nrows(),
            m.ncols(),
            m.amax()
        ))
    })?;
    Ok(schur.complex_eigenvalues().iter().copied().collect())
}

/// Spectral radius of an arbitrary real square matrix.
pub(crate) fn spectral_radius(m: &DMatrix<f64>) -> Result<f64> {
    Ok(eigenvalues(m)?.iter().map(|z| z.norm()).fold(0.0, f64::max))
}

/// Logarithms of the moduli of the complex eigenvalues of `g`, sorted nonincreasingly.
pub fn jordan_projection(g: &SquareMatrix) -> Result<CartanVector> {
    let eig = eigenvalues(g.as_matrix())?;
    let logs: Vec<f64> = eig.iter().map(|z| z.norm().ln()).collect();
    if logs.iter().any(|x| !x.is_finite()) {
        return Err(Error::numeric("zero eigenvalue in a unimodular matrix"));
    }
    CartanVector::from_unsorted(logs)
}

/// `(v_1, ..., v_n) -> (-v_n, ..., -v_1)`.
pub fn opposition_involution(v: &CartanVector) -> CartanVector {
    CartanVector { values: v.values.iter().rev().map(|x| -x).collect() }
}

/// Outcome of the proximality test.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum Proximality {
    /// `gap` is `lambda_1 - lambda_2`, `angle` the angle between the attracting
    /// line and the repelling hyperplane.
    Proximal {
        gap: f64,
        angle: f64,
    },
    NotProximal {
        reason: String,
    },
}

impl Proximality {
    pub fn is_eps_proximal(&self, eps: f64) -> bool {
        matches!(self, Proximality::Proximal { angle, .. } if *angle > eps)
    }

    pub fn gap(&self) -> Option<f64> {
        match self {
            Proximality::Proximal { gap, .. } => Some(*gap),
            Proximality::NotProximal { .. } => None,
        }
    }

    pub fn angle(&self) -> Option<f64> {
        match self {
            Proximality::Proximal { angle, .. } => Some(*angle),
            Proximality::NotProximal { .. } => None,
        }
    }
}

const PROXIMAL_GAP_MIN: f64 = 1e-9;

/// The eigenvalue of largest modulus when it is real and strictly dominant,
/// together with the log-modulus gap to the next one.
fn dominant_real_eigenvalue(m: &DMatrix<f64>) -> Result<std::result::Result<(f64, f64), String>> {
    let mut eig = eigenvalues(m)?;
    eig.sort_by(|a, b| b.norm().total_cmp(&a.norm()));
    let top = eig[0];
    let gap = top.norm().ln() - eig[1].norm().ln();
    if !(gap > PROXIMAL_GAP_MIN) {
        return Ok(Err(format!("no strictly dominant eigenvalue (log gap {gap:e})")));
    }
    if top.im.abs() > 1e-9 * top.norm() {
        return Ok(Err("dominant eigenvalue is not real".to_string()));
    }
    Ok(Ok((top.re, gap)))
}

/// Unit vector spanning the kernel of `m - lambda I` (smallest right singular vector).
fn eigenvector(m: &DMatrix<f64>, lambda: f64) -> Result<Vec<f64>> {
    let n = m.nrows();
    let shifted = m - DMatrix::identity(n, n) * lambda;
    let svd = SVD::try_new(shifted, false, true, SVD_EPS, 0)
        .ok_or_else(|| Error::numeric("singular value decomposition did not converge"))?;
    let v_t = svd.v_t.unwrap();
    let k = svd.singular_values.imin();
    Ok(v_t.row(k).iter().copied().collect())
}

/// Attracting eigenline, repelling hyperplane and spectral gap of a proximal matrix.
#[derive(Clone, Debug)]
pub struct ProximalFrame {
    pub line: ProjPoint,
    /// Left eigenvector of the top eigenvalue; its kernel is the sum of the
    /// other generalised eigenspaces.
    pub repelling: DualProjPoint,
    pub gap: f64,
}

impl ProximalFrame {
    /// Angle between the attracting line and the repelling hyperplane.
    pub fn angle(&self) -> f64 {
        self.repelling.pairing(&self.line).min(1.0).asin()
    }
}

pub fn proximal_frame(g: &SquareMatrix) -> Result<std::result::Result<ProximalFrame, String>> {
    let m = g.as_matrix();
    let (lambda, gap) = match dominant_real_eigenvalue(m)? {
        Ok(x) => x,
        Err(reason) => return Ok(Err(reason)),
    };
    let line = ProjPoint::new(&eigenvector(m, lambda)?)?;
    let repelling = DualProjPoint::new(&eigenvector(&m.transpose(), lambda)?)?;
    Ok(Ok(ProximalFrame { line, repelling, gap }))
}

/// Spectral gap `lambda_1 - lambda_2` and the angle between the attracting
/// eigenline `g+` and the repelling hyperplane `H-(g)`.
pub fn proximality_gaps(g: &SquareMatrix) -> Result<Proximality> {
    Ok(match proximal_frame(g)? {
        Ok(frame) => Proximality::Proximal { gap: frame.gap, angle: frame.angle() },
        Err(reason) => Proximality::NotProximal { reason },
    })
}

/// Attracting line of `g` and the covector of its attracting hyperplane.
///
/// The line is the eigenline of the top eigenvalue; the covector is the left
/// eigenvector of the bottom eigenvalue, whose kernel is the sum of the other
/// generalised eigenspaces and therefore contains the line. Both are fixed by `g`
/// (the covector under the dual action).
pub fn attracting_pair(g: &SquareMatrix) -> Result<std::result::Result<(ProjPoint, DualProjPoint), String>> {
    let m = g.as_matrix();
    let (top, _) = match dominant_real_eigenvalue(m)? {
        Ok(x) => x,
        Err(reason) => return Ok(Err(format!("g is not proximal: {reason}"))),
    };
    let inv = g.inverse();
    let (bottom_inv, _) = match dominant_real_eigenvalue(inv.as_matrix())? {
        Ok(x) => x,
        Err(reason) => return Ok(Err(format!("g^-1 is not proximal: {reason}"))),
    };
    let line = ProjPoint::new(&eigenvector(m, top)?)?;
    let covector = DualProjPoint::new(&eigenvector(&m.transpose(), 1.0 / bottom_inv)?)?;
    Ok(Ok((line, covector)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    fn rotation3(theta: f64) -> SquareMatrix {
        let (s, c) = theta.sin_cos();
        SquareMatrix::from_row_slice(3, &[c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0]).unwrap()
    }

    #[test]
    fn constructor_renormalises_and_rejects() {
        let g = SquareMatrix::diag(&[2.0, 2.0]).unwrap();
        assert!((g.get(0, 0) - 1.0).abs() < 1e-15);
        assert!(SquareMatrix::diag(&[-1.0, 1.0]).is_err());
        assert!(SquareMatrix::from_row_slice(2, &[1.0, f64::NAN, 0.0, 1.0]).is_err());
        assert!(SquareMatrix::new(DMatrix::zeros(2, 3)).is_err());
        assert!(SquareMatrix::diag(&[1.0]).is_err());
    }

    #[test]
    fn cartan_of_diagonal_rotation_and_shear() {
        let mu = cartan_projection(&SquareMatrix::diag(&[2.0, 1.0, 0.5]).unwrap()).unwrap();
        let ln2 = 2f64.ln();
        assert!(mu.max_abs_diff(&CartanVector::new(vec![ln2, 0.0, -ln2]).unwrap()) < 1e-14);

        let mu = cartan_projection(&rotation3(0.7)).unwrap();
        assert!(mu.values().iter().all(|x| x.abs() < 1e-14));

        // g g^T = [[2,1],[1,1]] has eigenvalues (3 +- sqrt 5)/2.
        let shear = SquareMatrix::from_row_slice(2, &[1.0, 1.0, 0.0, 1.0]).unwrap();
        let expected = 0.5 * ((3.0 + 5f64.sqrt()) / 2.0).ln();
        let mu = cartan_projection(&shear).unwrap();
        assert!((mu.mu(1) - expected).abs() < 1e-14);
        assert!((mu.mu(2) + expected).abs() < 1e-14);
        assert!((expected - 0.4812).abs() < 1e-4);
    }

    #[test]
    fn cartan_decomposition_reconstructs() {
        let g = SquareMatrix::from_row_slice(3, &[1.0, 2.0, 0.5, -0.3, 1.1, 0.0, 0.2, 0.7, 3.0]).unwrap();
        let (u, mu, vt) = cartan_decomposition(&g).unwrap();
        let s = DMatrix::from_diagonal(&DVector::from_iterator(3, mu.values().iter().map(|x| x.exp())));
        let rec = u * s * vt;
        let err = (&rec - g.as_matrix()).norm() / g.as_matrix().norm();
        assert!(err < 1e-9);
    }

    #[test]
    fn jordan_examples() {
        let shear = SquareMatrix::from_row_slice(2, &[1.0, 1.0, 0.0, 1.0]).unwrap();
        let l = jordan_projection(&shear).unwrap();
        assert!(l.values().iter().all(|x| x.abs() < 1e-12));

        let d = SquareMatrix::diag(&[3.0, 1.0 / 3.0]).unwrap();
        let l = jordan_projection(&d).unwrap();
        assert!((l.mu(1) - 3f64.ln()).abs() < 1e-14);

        let p = SquareMatrix::from_row_slice(2, &[2.0, 1.0, 0.3, 0.9]).unwrap();
        let conj = p.conjugate(&d);
        let l = jordan_projection(&conj).unwrap();
        assert!((l.mu(1) - 3f64.ln()).abs() < 1e-12);
        assert!((l.mu(2) + 3f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn opposition_examples() {
        let v = CartanVector::new(vec![1.0, 0.0, -1.0]).unwrap();
        assert_eq!(opposition_involution(&v), v);
        let v = CartanVector::new(vec![2.0, -0.5, -1.5]).unwrap();
        assert_eq!(opposition_involution(&v).values(), &[1.5, 0.5, -2.0]);
        assert_eq!(opposition_involution(&opposition_involution(&v)), v);
    }

    #[test]
    fn cartan_vector_invariants() {
        assert!(CartanVector::new(vec![0.0, 1.0, -1.0]).is_err());
        assert!(CartanVector::new(vec![1.0, 0.0, 0.0]).is_err());
        assert!(CartanVector::from_unsorted(vec![0.0, 1.0, -1.0]).is_ok());
    }

    #[test]
    fn linear_form_examples() {
        let v = CartanVector::new(vec![1.0, 0.0, -1.0]).unwrap();
        assert_eq!(LinearForm::alpha(1, 2, 3).unwrap().eval(&v).unwrap(), 1.0);
        assert_eq!(LinearForm::alpha(1, 3, 3).unwrap().eval(&v).unwrap(), 2.0);
        let w = CartanVector::new(vec![2.0, 1.0, -3.0]).unwrap();
        assert_eq!(LinearForm::weight(2, 3).unwrap().eval(&w).unwrap(), 3.0);
        assert!(LinearForm::alpha(1, 2, 4).unwrap().eval(&v).is_err());
        assert!(LinearForm::alpha(2, 2, 3).is_err());
    }

    #[test]
    fn projective_distance_examples() {
        let e1 = ProjPoint::basis(1, 3);
        let e2 = ProjPoint::basis(2, 3);
        let mid = ProjPoint::new(&[1.0, 1.0, 0.0]).unwrap();
        assert_eq!(proj_distance(&e1, &e1).unwrap(), 0.0);
        assert!((proj_distance(&e1, &e2).unwrap() - FRAC_PI_2).abs() < 1e-15);
        assert!((proj_distance(&e1, &mid).unwrap() - FRAC_PI_4).abs() < 1e-15);
        let neg = ProjPoint::new(&[-1.0, -1.0, 0.0]).unwrap();
        assert_eq!(neg, mid);
        assert!(proj_distance(&e1, &ProjPoint::basis(1, 2)).is_err());
        // tiny angles stay resolved
        let near = ProjPoint::new(&[1.0, 1e-9, 0.0]).unwrap();
        assert!((proj_distance(&e1, &near).unwrap() - 1e-9).abs() < 1e-20);
    }

    #[test]
    fn sym_distance_examples() {
        let e1 = ProjPoint::basis(1, 3);
        let e2 = ProjPoint::basis(2, 3);
        let f3 = DualProjPoint::basis(3, 3);
        let f_mid = DualProjPoint::new(&[0.0, 1.0, 1.0]).unwrap();
        assert_eq!(sym_distance((&e1, &f3), (&e1, &f3)).unwrap(), 0.0);
        assert!((sym_distance((&e1, &f3), (&e1, &f_mid)).unwrap() - FRAC_PI_4).abs() < 1e-15);
        assert!((sym_distance((&e1, &f3), (&e2, &f3)).unwrap() - FRAC_PI_2).abs() < 1e-15);
    }

    #[test]
    fn proximality_examples() {
        let d = SquareMatrix::diag(&[2.0, 1.0, 0.5]).unwrap();
        let p = proximality_gaps(&d).unwrap();
        assert!((p.gap().unwrap() - 2f64.ln()).abs() < 1e-12);
        assert!((p.angle().unwrap() - FRAC_PI_2).abs() < 1e-9);

        assert!(matches!(proximality_gaps(&rotation3(0.4)).unwrap(), Proximality::NotProximal { .. }));
        let ident = SquareMatrix::identity(3);
        assert!(matches!(proximality_gaps(&ident).unwrap(), Proximality::NotProximal { .. }));
    }

    #[test]
    fn shear_conjugation_shrinks_angle() {
        // g = S diag(2, 1/2) S^-1 with S = [[1, s], [0, 1]]: eigenlines e1 and (s, 1).
        // The repelling hyperplane is the line (s, 1), so sin(angle) = 1/sqrt(1 + s^2).
        let d = SquareMatrix::diag(&[2.0, 0.5]).unwrap();
        for s in [0.5, 1.0, 3.0] {
            let shear = SquareMatrix::from_row_slice(2, &[1.0, s, 0.0, 1.0]).unwrap();
            let g = shear.conjugate(&d);
            let p = proximality_gaps(&g).unwrap();
            assert!((p.gap().unwrap() - 4f64.ln()).abs() < 1e-12);
            let expected = (1.0 / (1.0 + s * s).sqrt()).asin();
            assert!((p.angle().unwrap() - expected).abs() < 1e-10, "s = {s}");
            assert!(p.angle().unwrap() < FRAC_PI_2);
        }
    }

    #[test]
    fn attracting_pair_examples() {
        let d = SquareMatrix::diag(&[2.0, 1.0, 0.5]).unwrap();
        let (line, cov) = attracting_pair(&d).unwrap().unwrap();
        assert_eq!(line, ProjPoint::basis(1, 3));
        assert!(proj_distance(&cov, &DualProjPoint::basis(3, 3)).unwrap() < 1e-12);
        assert!(attracting_pair(&rotation3(0.3)).unwrap().is_err());

        let h = SquareMatrix::from_row_slice(2, &[2.0, 1.0, 1.0, 1.0]).unwrap();
        let (line, cov) = attracting_pair(&h).unwrap().unwrap();
        assert!(cov.pairing(&line) < 1e-12);
        assert!(proj_distance(&line.transform(&h).unwrap(), &line).unwrap() < 1e-12);
    }
}
