use nalgebra::{DMatrix, Vector2};

use crate::error::{Error, Result};
use crate::linalg::SquareMatrix;
use crate::words::{GeneratorSet, Word};

/// A cocycle `u: Gamma -> R^2` on a free group, determined by its values on
/// the generators and extended by `u(g h) = u(g) + g u(h)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Cocycle {
    values: Vec<[f64; 2]>,
}

impl Cocycle {
    pub fn new(values: Vec<[f64; 2]>) -> Self {
        Cocycle { values }
    }

    pub fn zero(rank: usize) -> Self {
        Cocycle { values: vec![[0.0; 2]; rank] }
    }

    /// The coboundary `u(g) = g v - v`.
    pub fn coboundary(gs: &GeneratorSet, v: [f64; 2]) -> Result<Self> {
        check_sl2(gs)?;
        let v = Vector2::new(v[0], v[1]);
        let values = gs
            .generators()
            .iter()
            .map(|g| {
                let m = g.as_matrix();
                let gv = Vector2::new(m[(0, 0)] * v[0] + m[(0, 1)] * v[1], m[(1, 0)] * v[0] + m[(1, 1)] * v[1]);
                let d = gv - v;
                [d[0], d[1]]
            })
            .collect();
        Ok(Cocycle { values })
    }

    pub fn values(&self) -> &[[f64; 2]] {
        &self.values
    }

    /// `u` on a single letter; `u(a^-1) = -a^-1 u(a)`.
    fn letter_value(&self, gs: &GeneratorSet, letter: u8) -> [f64; 2] {
        let g = (letter / 2) as usize;
        let u = self.values[g];
        if letter.is_multiple_of(2) {
            u
        } else {
            let inv = gs.letter_matrix(letter).as_matrix();
            [-(inv[(0, 0)] * u[0] + inv[(0, 1)] * u[1]), -(inv[(1, 0)] * u[0] + inv[(1, 1)] * u[1])]
        }
    }

    /// `u(w)` by the cocycle rule, scanning the word from the right.
    pub fn evaluate(&self, gs: &GeneratorSet, w: &Word) -> Result<[f64; 2]> {
        check_sl2(gs)?;
        if self.values.len() != gs.rank() {
            return Err(Error::input("cocycle rank differs from the generating set"));
        }
        let mut u = [0.0, 0.0];
        for &l in w.letters().iter().rev() {
            // u(l w') = u(l) + l u(w')
            let m = gs.letter_matrix(l).as_matrix();
            let ul = self.letter_value(gs, l);
            u = [ul[0] + m[(0, 0)] * u[0] + m[(0, 1)] * u[1], ul[1] + m[(1, 0)] * u[0] + m[(1, 1)] * u[1]];
        }
        Ok(u)
    }

    /// Generators of `rho_u(gamma) = [[gamma, u(gamma)], [0, 1]]` in `SL(3, R)`.
    pub fn affine_generators(&self, gs: &GeneratorSet) -> Result<GeneratorSet> {
        check_sl2(gs)?;
        if self.values.len() != gs.rank() {
            return Err(Error::input("cocycle rank differs from the generating set"));
        }
        let gens = gs.generators().iter().zip(&self.values).map(|(g, u)| affine(g, *u)).collect::<Result<Vec<_>>>()?;
        GeneratorSet::new(gens, gs.labels().to_vec(), gs.is_free())
    }
}

/// `[[g, u], [0, 1]]`.
pub(crate) fn affine(g: &SquareMatrix, u: [f64; 2]) -> Result<SquareMatrix> {
    let m = g.as_matrix();
    let mut out = DMatrix::identity(3, 3);
    out.view_mut((0, 0), (2, 2)).copy_from(m);
    out[(0, 2)] = u[0];
    out[(1, 2)] = u[1];
    SquareMatrix::new(out)
}

fn check_sl2(gs: &GeneratorSet) -> Result<()> {
    if gs.dim() != 2 {
        return Err(Error::input(format!("cocycles take values in R^2; generators are {}x{}", gs.dim(), gs.dim())));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::words::word_matrix;

    fn gens() -> GeneratorSet {
        let a = SquareMatrix::diag(&[2.5, 0.4]).unwrap();
        let r = SquareMatrix::from_row_slice(2, &[0.8, -0.6, 0.6, 0.8]).unwrap();
        GeneratorSet::free(vec![a.clone(), r.conjugate(&a)]).unwrap()
    }

    #[test]
    fn cocycle_identity_on_word_pairs() {
        let gs = gens();
        let u = Cocycle::new(vec![[0.3, -1.1], [0.7, 0.2]]);
        let words = ["a", "B", "ab", "aBBa", "baAb", "AAb", "bab"];
        for x in words {
            for y in words {
                let (wx, wy) = (gs.parse_word(x), gs.parse_word(y));
                let (Ok(wx), Ok(wy)) = (wx, wy) else { continue };
                let lhs = u.evaluate(&gs, &wx.concat(&wy)).unwrap();
                let ux = u.evaluate(&gs, &wx).unwrap();
                let uy = u.evaluate(&gs, &wy).unwrap();
                let g = word_matrix(&gs, &wx).unwrap();
                let m = g.as_matrix();
                let rhs =
                    [ux[0] + m[(0, 0)] * uy[0] + m[(0, 1)] * uy[1], ux[1] + m[(1, 0)] * uy[0] + m[(1, 1)] * uy[1]];
                assert!((lhs[0] - rhs[0]).abs() < 1e-10 && (lhs[1] - rhs[1]).abs() < 1e-10, "{x} {y}");
            }
        }
    }

    #[test]
    fn affine_block_carries_the_cocycle() {
        let gs = gens();
        let u = Cocycle::new(vec![[0.3, -1.1], [0.7, 0.2]]);
        let rho = u.affine_generators(&gs).unwrap();
        let w = gs.parse_word("abAbb").unwrap();
        let m = word_matrix(&rho, &w).unwrap();
        let uw = u.evaluate(&gs, &w).unwrap();
        assert!((m.get(0, 2) - uw[0]).abs() < 1e-10);
        assert!((m.get(1, 2) - uw[1]).abs() < 1e-10);
    }

    #[test]
    fn coboundary_matches_formula() {
        let gs = gens();
        let v = [0.4, -0.9];
        let u = Cocycle::coboundary(&gs, v).unwrap();
        let w = gs.parse_word("aBBab").unwrap();
        let g = word_matrix(&gs, &w).unwrap();
        let m = g.as_matrix();
        let expected = [m[(0, 0)] * v[0] + m[(0, 1)] * v[1] - v[0], m[(1, 0)] * v[0] + m[(1, 1)] * v[1] - v[1]];
        let got = u.evaluate(&gs, &w).unwrap();
        assert!((got[0] - expected[0]).abs() < 1e-10 && (got[1] - expected[1]).abs() < 1e-10);
    }
}
