mod common;

use anosov_core::hilbert::{
    gromov_product, hilbert_distance, psd_point, translation_length_hilbert, BoundaryPoint, ConvexDomain,
    DEFAULT_RAY_LENGTH,
};
use anosov_core::linalg::Projective;
use anosov_core::reps::{build_scenario, ScenarioParams};
use anosov_core::words::{word_matrix, GeneratorSet, Word};
use anosov_core::{ProjPoint, SquareMatrix};
use common::assert_close;
use nalgebra::DMatrix;
use proptest::prelude::*;

const DISK: ConvexDomain = ConvexDomain::Ellipsoid(3);

fn so21() -> GeneratorSet {
    build_scenario("schottky-so21", &ScenarioParams::default()).unwrap().generators
}

fn disk_point(r: f64, theta: f64) -> ProjPoint {
    ProjPoint::new(&[r * theta.cos(), r * theta.sin(), 1.0]).unwrap()
}

fn apply(g: &SquareMatrix, x: &ProjPoint) -> ProjPoint {
    x.transform(g).unwrap()
}

/// `[[a, b], [b, c]] -> ((a - c) / 2, b, (a + c) / 2)` carries the cone of
/// positive 2x2 forms onto the cone over the disk.
fn psd_to_disk(a: f64, b: f64, c: f64) -> ProjPoint {
    ProjPoint::new(&[0.5 * (a - c), b, 0.5 * (a + c)]).unwrap()
}

fn short_word(letters: &[u8]) -> Word {
    let mut reduced: Vec<u8> = Vec::new();
    for &l in letters {
        if reduced.last().is_some_and(|&x| l == anosov_core::words::inverse_letter(x)) {
            reduced.pop();
        } else {
            reduced.push(l);
        }
    }
    Word::new(reduced).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 96, ..ProptestConfig::default() })]

    #[test]
    fn disk_distance_is_a_metric(r in prop::array::uniform3(0.0f64..0.95), t in prop::array::uniform3(0.0f64..6.3)) {
        let (x, y, z) = (disk_point(r[0], t[0]), disk_point(r[1], t[1]), disk_point(r[2], t[2]));
        let d = |a: &ProjPoint, b: &ProjPoint| hilbert_distance(&DISK, a, b).unwrap();
        prop_assert!((d(&x, &y) - d(&y, &x)).abs() < 1e-12);
        prop_assert!(d(&x, &z) <= d(&x, &y) + d(&y, &z) + 1e-9);
        prop_assert!(d(&x, &x) == 0.0);
    }

    #[test]
    fn projective_invariance(r in prop::array::uniform2(0.0f64..0.9), t in prop::array::uniform2(0.0f64..6.3),
                             letters in prop::collection::vec(0u8..4, 0..5)) {
        let gs = so21();
        let g = word_matrix(&gs, &short_word(&letters)).unwrap();
        let (x, y) = (disk_point(r[0], t[0]), disk_point(r[1], t[1]));
        let before = hilbert_distance(&DISK, &x, &y).unwrap();
        let after = hilbert_distance(&DISK, &apply(&g, &x), &apply(&g, &y)).unwrap();
        prop_assert!((before - after).abs() < 1e-8 * (1.0 + before), "{before} {after}");
    }

    #[test]
    fn psd_cone_agrees_with_disk(a in 0.1f64..5.0, c in 0.1f64..5.0, s in -0.95f64..0.95,
                                 a2 in 0.1f64..5.0, c2 in 0.1f64..5.0, s2 in -0.95f64..0.95) {
        let (b, b2) = (s * (a * c).sqrt(), s2 * (a2 * c2).sqrt());
        let m1 = DMatrix::from_row_slice(2, 2, &[a, b, b, c]);
        let m2 = DMatrix::from_row_slice(2, 2, &[a2, b2, b2, c2]);
        let cone = hilbert_distance(&ConvexDomain::PsdCone(2), &psd_point(&m1).unwrap(), &psd_point(&m2).unwrap()).unwrap();
        let disk = hilbert_distance(&DISK, &psd_to_disk(a, b, c), &psd_to_disk(a2, b2, c2)).unwrap();
        prop_assert!((cone - disk).abs() < 1e-8, "{cone} {disk}");
    }

    #[test]
    fn gromov_products_are_invariant(t in prop::array::uniform2(0.0f64..6.3), letters in prop::collection::vec(0u8..4, 0..3)) {
        prop_assume!((t[0] - t[1]).abs() > 0.05 && (t[0] - t[1]).abs() < 6.2);
        let gs = so21();
        let g = word_matrix(&gs, &short_word(&letters)).unwrap();
        let o = disk_point(0.0, 0.0);
        let (xi, eta) = (BoundaryPoint::disk(t[0]), BoundaryPoint::disk(t[1]));
        let before = gromov_product(&DISK, &o, &xi, &eta, DEFAULT_RAY_LENGTH).unwrap();
        // closed form at the center of the disk
        prop_assert!((before + (0.5 * (t[0] - t[1])).sin().abs().ln()).abs() < 1e-9);
        let move_b = |p: &BoundaryPoint| BoundaryPoint::project_to_ellipsoid(apply(&g, &p.point).unit()).unwrap();
        let after = gromov_product(&DISK, &apply(&g, &o), &move_b(&xi), &move_b(&eta), DEFAULT_RAY_LENGTH).unwrap();
        prop_assert!((before - after).abs() < 1e-6, "{before} {after}");
    }
}

#[test]
fn translation_length_is_the_displacement_rate() {
    let gs = so21();
    for w in ["a", "ab", "aBab"] {
        let g = word_matrix(&gs, &gs.parse_word(w).unwrap()).unwrap();
        let ell = translation_length_hilbert(&g).unwrap();
        assert!(!ell.degenerate);
        // a point near the axis, joining the fixed points
        let frame = anosov_core::linalg::proximal_frame(&g).unwrap().unwrap();
        let back = anosov_core::linalg::proximal_frame(&g.inverse()).unwrap().unwrap();
        let (p, q) = (frame.line.unit().to_vec(), back.line.unit().to_vec());
        let sign = if p[2] * q[2] < 0.0 { -1.0 } else { 1.0 };
        let mut x: Vec<f64> = p.iter().zip(&q).map(|(a, b)| a + sign * b).collect();
        x[0] += 1e-3 * x[2];
        let x = ProjPoint::new(&x).unwrap();
        // keep g^k x well inside the disk in double precision
        let k = ((6.0 / ell.value) as u32).max(1);
        let d = hilbert_distance(&DISK, &x, &apply(&g.pow(k), &x)).unwrap();
        assert_close(d / k as f64, ell.value, 1e-3, w);
    }
}

#[test]
fn cone_translation_length() {
    // X -> A X A^T on 2x2 forms, with A = diag(e^s, e^-s)
    let s: f64 = 0.7;
    let (e2, em2) = ((2.0 * s).exp(), (-2.0 * s).exp());
    // coordinates (x11, x12, x22)
    let g = SquareMatrix::diag(&[e2, 1.0, em2]).unwrap();
    let ell = translation_length_hilbert(&g).unwrap();
    assert_close(ell.value, 2.0 * s, 1e-12, "translation length");
    let id = psd_point(&DMatrix::identity(2, 2)).unwrap();
    let d = hilbert_distance(&ConvexDomain::PsdCone(2), &id, &id.transform(&g.pow(5)).unwrap()).unwrap();
    assert_close(d, 5.0 * 2.0 * s, 1e-9, "displacement");
}
