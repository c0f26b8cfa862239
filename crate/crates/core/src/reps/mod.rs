//! Linear-algebraic functors on `SL(n, R)` and the scenario catalog.
//!
//! Basis conventions (all lexicographic, 0-based internally):
//!
//! - `Lambda^i R^n`: `e_{j1} ^ ... ^ e_{ji}` with `j1 < ... < ji`, subsets in
//!   lexicographic order.
//! - `Sym^2 R^n`: `e_i e_j` with `i <= j`, pairs in lexicographic order.
//! - `R^n (x) R^m`: `e_i (x) f_j`, `i` major.
//! - `Sym^(n-1) R^2` (principal embedding): `e_1^(n-1-k) e_2^k`, `k = 0..n-1`.

mod cocycle;
pub mod config;
mod scenario;

pub use cocycle::Cocycle;
pub use scenario::{
    build_scenario, catalog, check_separation, sl2_schottky, so21_schottky, CocycleMode, ExpectedRelation, Scenario,
    ScenarioParams, CATALOG, SEPARATION_ANGLE,
};

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::SquareMatrix;

/// All `k`-subsets of `0..n` in lexicographic order.
pub fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for j in start..n {
            if n - j < k - cur.len() {
                break;
            }
            cur.push(j);
            rec(j + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::with_capacity(k), &mut out);
    out
}

fn minor(m: &DMatrix<f64>, rows: &[usize], cols: &[usize]) -> f64 {
    match rows.len() {
        1 => m[(rows[0], cols[0])],
        2 => m[(rows[0], cols[0])] * m[(rows[1], cols[1])] - m[(rows[0], cols[1])] * m[(rows[1], cols[0])],
        k => DMatrix::from_fn(k, k, |i, j| m[(rows[i], cols[j])]).lu().determinant(),
    }
}

/// `Lambda^i` of an arbitrary square matrix: entry `(I, J)` is the minor on rows `I`, columns `J`.
pub(crate) fn exterior_power_raw(m: &DMatrix<f64>, i: usize) -> DMatrix<f64> {
    let n = m.nrows();
    if i == 1 {
        return m.clone();
    }
    let basis = subsets(n, i);
    let d = basis.len();
    DMatrix::from_fn(d, d, |r, c| minor(m, &basis[r], &basis[c]))
}

/// Matrix of `Lambda^i g` on the `C(n, i)`-dimensional exterior power.
pub fn exterior_power(g: &SquareMatrix, i: usize) -> Result<SquareMatrix> {
    let n = g.dim();
    if i == 0 || i >= n {
        return Err(Error::input(format!("exterior power {i} outside 1..={} for n = {n}", n - 1)));
    }
    SquareMatrix::new(exterior_power_raw(g.as_matrix(), i))
}

/// Action on `Sym^2 R^n` in the monomial basis `e_i e_j` (`i <= j`).
pub fn sym_square(g: &SquareMatrix) -> Result<SquareMatrix> {
    let n = g.dim();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).collect();
    let m = g.as_matrix();
    let out = DMatrix::from_fn(pairs.len(), pairs.len(), |r, c| {
        let (k, l) = pairs[r];
        let (i, j) = pairs[c];
        if k == l {
            m[(k, i)] * m[(k, j)]
        } else {
            m[(k, i)] * m[(l, j)] + m[(l, i)] * m[(k, j)]
        }
    });
    SquareMatrix::new(out)
}

/// Kronecker product `g (x) h`.
pub fn tensor_product(g: &SquareMatrix, h: &SquareMatrix) -> Result<SquareMatrix> {
    SquareMatrix::new(g.as_matrix().kronecker(h.as_matrix()))
}

/// The contragredient `(g^-1)^T`.
pub fn dual_rep(g: &SquareMatrix) -> SquareMatrix {
    g.inverse().transpose()
}

/// Irreducible `n`-dimensional representation of `SL(2, R)`, realised on
/// homogeneous polynomials of degree `n - 1`.
pub fn principal_sl2(g: &SquareMatrix, n: usize) -> Result<SquareMatrix> {
    if g.dim() != 2 {
        return Err(Error::input(format!("principal embedding needs a 2x2 matrix, got {}", g.dim())));
    }
    if n < 2 {
        return Err(Error::input(format!("target dimension {n} < 2")));
    }
    let (a, b, c, d) = (g.get(0, 0), g.get(0, 1), g.get(1, 0), g.get(1, 1));
    let m = n - 1;
    let mut out = DMatrix::zeros(n, n);
    for k in 0..n {
        // (a + c x)^(m - k) (b + d x)^k, coefficient of x^j lands in row j.
        let mut poly = vec![1.0];
        for _ in 0..(m - k) {
            poly = poly_mul(&poly, &[a, c]);
        }
        for _ in 0..k {
            poly = poly_mul(&poly, &[b, d]);
        }
        for (j, coef) in poly.into_iter().enumerate() {
            out[(j, k)] = coef;
        }
    }
    SquareMatrix::new(out)
}

/// [`principal_sl2`] written in the basis `sqrt(C(n-1, j)) x^j`, which is
/// orthonormal for an `SO(2)`-invariant inner product. Rotations then map to
/// orthogonal matrices, so `mu(rho(g))` is exactly the weight ladder of `mu(g)`.
pub fn principal_sl2_orthonormal(g: &SquareMatrix, n: usize) -> Result<SquareMatrix> {
    let rho = principal_sl2(g, n)?;
    let m = n - 1;
    let scale: Vec<f64> = (0..n).map(|j| binomial(m, j).sqrt()).collect();
    let mut out = rho.into_matrix();
    for i in 0..n {
        for j in 0..n {
            out[(i, j)] *= scale[j] / scale[i];
        }
    }
    SquareMatrix::new(out)
}

fn binomial(m: usize, j: usize) -> f64 {
    (0..j).fold(1.0, |acc, i| acc * (m - i) as f64 / (i + 1) as f64)
}

fn poly_mul(p: &[f64], q: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; p.len() + q.len() - 1];
    for (i, x) in p.iter().enumerate() {
        for (j, y) in q.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Block embedding `g -> diag(g, 1)` of `SL(n)` into `SL(n + 1)`.
pub fn block_embed(g: &SquareMatrix) -> SquareMatrix {
    let n = g.dim();
    let mut out = DMatrix::identity(n + 1, n + 1);
    out.view_mut((0, 0), (n, n)).copy_from(g.as_matrix());
    SquareMatrix::new(out).expect("block embedding of a unimodular matrix is unimodular")
}
