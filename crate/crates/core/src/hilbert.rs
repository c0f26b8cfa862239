//! Hilbert metric on two convex models, Gromov products and the boundary
//! quasi-distance `d_x = exp(-(xi|eta)_x)`.
//!
//! The ellipsoid model is the projectivised negative cone of
//! `q(x) = x_1^2 + ... + x_(n-1)^2 - x_n^2`; its Hilbert metric is hyperbolic
//! distance (curvature -1). The cone model is the projectivised cone of
//! positive-definite `k x k` matrices, with coordinates the upper triangle
//! read row by row.

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exponents::{count_values, critical_exponent, ExponentEstimate};
use crate::format::fmt_sig;
use crate::limit_set::{box_dimension, DimensionEstimate, NetPoint};
use crate::linalg::{
    jordan_projection, proj_distance, proximal_frame, DualProjPoint, ProjPoint, Projective, SquareMatrix,
};
use crate::words::{ball_map, GeneratorSet};

/// Default ray length for Gromov products.
pub const DEFAULT_RAY_LENGTH: f64 = 12.0;
const INTERIOR_TOL: f64 = 1e-10;
const BOUNDARY_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ConvexDomain {
    /// Negative lines of `x_1^2 + ... + x_(n-1)^2 - x_n^2` in `P(R^n)`.
    Ellipsoid(usize),
    /// Positive-definite forms on `R^k`, inside `P(R^(k(k+1)/2))`.
    PsdCone(usize),
}

impl ConvexDomain {
    /// Dimension of the ambient vector space.
    pub fn ambient_dim(&self) -> usize {
        match *self {
            ConvexDomain::Ellipsoid(n) => n,
            ConvexDomain::PsdCone(k) => k * (k + 1) / 2,
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            ConvexDomain::Ellipsoid(n) if n >= 2 => Ok(()),
            ConvexDomain::PsdCone(k) if k >= 2 => Ok(()),
            _ => Err(Error::input(format!("degenerate domain {self:?}"))),
        }
    }

    pub fn contains(&self, x: &ProjPoint) -> bool {
        if x.dim() != self.ambient_dim() {
            return false;
        }
        match *self {
            ConvexDomain::Ellipsoid(_) => qform(x.unit()) < -INTERIOR_TOL,
            ConvexDomain::PsdCone(k) => {
                let m = psd_matrix(x, k);
                let tr = m.trace();
                let eig = SymmetricEigen::new(m).eigenvalues;
                let sign = tr.signum();
                tr != 0.0 && eig.iter().all(|e| sign * e / tr.abs() > INTERIOR_TOL)
            }
        }
    }
}

/// `x_1^2 + ... + x_(n-1)^2 - x_n^2`.
pub fn qform(x: &[f64]) -> f64 {
    bilinear(x, x)
}

/// Polarisation of [`qform`].
pub fn bilinear(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len();
    x[..n - 1].iter().zip(&y[..n - 1]).map(|(a, b)| a * b).sum::<f64>() - x[n - 1] * y[n - 1]
}

/// Point of the cone model for a symmetric matrix.
pub fn psd_point(m: &DMatrix<f64>) -> Result<ProjPoint> {
    let k = m.nrows();
    if m.ncols() != k {
        return Err(Error::input("matrix must be square"));
    }
    let mut v = Vec::with_capacity(k * (k + 1) / 2);
    for i in 0..k {
        for j in i..k {
            v.push(0.5 * (m[(i, j)] + m[(j, i)]));
        }
    }
    ProjPoint::new(&v)
}

/// Symmetric matrix of a cone-model point, scaled to have nonnegative trace.
pub fn psd_matrix(x: &ProjPoint, k: usize) -> DMatrix<f64> {
    let v = x.unit();
    let mut m = DMatrix::zeros(k, k);
    let mut idx = 0;
    for i in 0..k {
        for j in i..k {
            m[(i, j)] = v[idx];
            m[(j, i)] = v[idx];
            idx += 1;
        }
    }
    if m.trace() < 0.0 {
        m = -m;
    }
    m
}

fn check_interior(omega: &ConvexDomain, x: &ProjPoint) -> Result<()> {
    omega.validate()?;
    if x.dim() != omega.ambient_dim() {
        return Err(Error::input(format!("point of dimension {} for {omega:?}", x.dim())));
    }
    if !omega.contains(x) {
        return Err(Error::input(format!("point is not in the interior of {omega:?}")));
    }
    Ok(())
}

/// Hilbert distance `1/2 log [a, x, y, b]`.
///
/// On the ellipsoid the chord through `x` and `y` is `x + s y`; the boundary
/// parameters are the roots of `q(x) + 2 s B(x, y) + s^2 q(y) = 0`, and with
/// `x` at `s = 0` and `y` at `s = infinity` the cross-ratio is the ratio of
/// the roots. On the cone model the distance is `1/2 log(l_max / l_min)` for
/// the eigenvalues of `x^-1 y`.
pub fn hilbert_distance(omega: &ConvexDomain, x: &ProjPoint, y: &ProjPoint) -> Result<f64> {
    check_interior(omega, x)?;
    check_interior(omega, y)?;
    if x == y {
        return Ok(0.0);
    }
    match *omega {
        ConvexDomain::Ellipsoid(_) => Ok(ellipsoid_distance(x.unit(), y.unit())),
        ConvexDomain::PsdCone(k) => {
            let (mx, my) = (psd_matrix(x, k), psd_matrix(y, k));
            // eigenvalues of x^-1 y through the symmetric form L^-1 y L^-T
            let l =
                mx.cholesky().ok_or_else(|| Error::numeric("Cholesky factorisation of an interior point failed"))?.l();
            let li = l.try_inverse().ok_or_else(|| Error::numeric("singular Cholesky factor"))?;
            let s = &li * my * li.transpose();
            let s = 0.5 * (&s + s.transpose());
            let eig = SymmetricEigen::new(s).eigenvalues;
            let (lo, hi) = (eig.min(), eig.max());
            if !(lo > 0.0) {
                return Err(Error::numeric("pair is not simultaneously positive definite"));
            }
            Ok(0.5 * (hi / lo).ln())
        }
    }
}

fn ellipsoid_distance(x: &[f64], y: &[f64]) -> f64 {
    let (qx, qy, b) = (qform(x), qform(y), bilinear(x, y));
    let disc = (b * b - qx * qy).max(0.0);
    // stable pair of roots: the large one directly, the small one from the product
    let big = (-b - b.signum() * disc.sqrt()) / qy;
    let small = qx / (qy * big);
    0.5 * (big / small).abs().ln().abs()
}

/// Hilbert translation length, tagged degenerate when it vanishes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TranslationLength {
    pub value: f64,
    pub degenerate: bool,
}

/// `1/2 alpha_{1,n}(lambda(g))`, the translation length along the axis of a
/// biproximal element.
pub fn translation_length_hilbert(g: &SquareMatrix) -> Result<TranslationLength> {
    let lambda = jordan_projection(g)?;
    let n = g.dim();
    let value = 0.5 * (lambda.mu(1) - lambda.mu(n));
    if value < 1e-4 {
        return Ok(TranslationLength { value: 0.0, degenerate: true });
    }
    proximal_frame(g)?.map_err(|r| Error::input(format!("g is not proximal: {r}")))?;
    proximal_frame(&g.inverse())?.map_err(|r| Error::input(format!("g^-1 is not proximal: {r}")))?;
    Ok(TranslationLength { value, degenerate: false })
}

/// A boundary point together with its supporting hyperplane.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryPoint {
    pub point: ProjPoint,
    pub tangent: DualProjPoint,
}

impl BoundaryPoint {
    /// A point of the ellipsoid boundary; the tangent is the gradient of `q`.
    pub fn on_ellipsoid(v: &[f64]) -> Result<Self> {
        let point = ProjPoint::new(v)?;
        if qform(point.unit()).abs() > BOUNDARY_TOL {
            return Err(Error::input("point is not on the ellipsoid boundary"));
        }
        Self::with_gradient(point)
    }

    /// Radial projection `(x', x_n) -> (x_n x'/|x'|, x_n)` onto the boundary.
    pub fn project_to_ellipsoid(v: &[f64]) -> Result<Self> {
        let n = v.len();
        let sign = if v[n - 1] < 0.0 { -1.0 } else { 1.0 };
        let last = sign * v[n - 1];
        let r = v[..n - 1].iter().map(|x| x * x).sum::<f64>().sqrt();
        if r == 0.0 || last == 0.0 {
            return Err(Error::input("vector has no radial projection onto the boundary"));
        }
        let mut w: Vec<f64> = v[..n - 1].iter().map(|x| sign * x * last / r).collect();
        w.push(last);
        Self::with_gradient(ProjPoint::new(&w)?)
    }

    /// Boundary point of the disk `Ellipsoid(3)` at angle `theta`.
    pub fn disk(theta: f64) -> Self {
        Self::on_ellipsoid(&[theta.cos(), theta.sin(), 1.0]).expect("circle point is on the boundary")
    }

    fn with_gradient(point: ProjPoint) -> Result<Self> {
        let p = point.unit();
        let n = p.len();
        let mut grad = p[..n - 1].to_vec();
        grad.push(-p[n - 1]);
        Ok(BoundaryPoint { tangent: DualProjPoint::new(&grad)?, point })
    }
}

impl NetPoint for BoundaryPoint {
    fn coords(&self) -> Vec<f64> {
        self.point.unit().to_vec()
    }
}

/// Base point normalised to `q(b) = -1`, `b_n > 0`.
fn hyperboloid(base: &ProjPoint) -> Vec<f64> {
    let b = base.unit();
    let s = (-qform(b)).sqrt() * if b[b.len() - 1] < 0.0 { -1.0 } else { 1.0 };
    b.iter().map(|x| x / s).collect()
}

/// Unit tangent `u` at `b` with `x_T = cosh T b + sinh T u` tending to `p`.
fn ray_direction(b: &[f64], p: &[f64]) -> Vec<f64> {
    let c = -bilinear(p, b);
    p.iter().zip(b).map(|(pi, bi)| pi / c - bi).collect()
}

/// `1/2 [d(x_T, b) + d(y_T, b) - d(x_T, y_T)] = T - d(x_T, y_T) / 2` for
/// rays from `b` with unit tangents `u`, `v`, where `s = q(u - v)`.
fn bracket(t: f64, s: f64) -> f64 {
    // cosh d = 1 + w with w = 1/2 sinh^2 T q(u - v)
    let w = 0.5 * t.sinh().powi(2) * s;
    let d = (w + (w * (2.0 + w)).sqrt()).ln_1p();
    t - 0.5 * d
}

fn gromov_from_gap(s: f64, t: f64) -> f64 {
    if s <= 1e-24 {
        return f64::INFINITY;
    }
    let (g1, g2) = (bracket(t, s), bracket(2.0 * t, s));
    // the bracket converges like e^(-2T)
    let r = (-2.0 * t).exp();
    (g2 - r * g1) / (1.0 - r)
}

fn check_gromov_inputs(omega: &ConvexDomain, base: &ProjPoint, pts: &[&BoundaryPoint], t: f64) -> Result<()> {
    if !matches!(omega, ConvexDomain::Ellipsoid(_)) {
        return Err(Error::Unsupported("Gromov products are implemented on the ellipsoid model".into()));
    }
    check_interior(omega, base)?;
    if !(t >= 5.0) {
        return Err(Error::input(format!("ray length T must be at least 5, got {t}")));
    }
    for p in pts {
        if p.point.dim() != omega.ambient_dim() || qform(p.point.unit()).abs() > BOUNDARY_TOL {
            return Err(Error::input("point is not on the boundary of the domain"));
        }
    }
    Ok(())
}

/// Gromov product `(xi|eta)_base`, from the bracket at ray lengths `T` and
/// `2T` with Richardson extrapolation. Returns infinity when `xi = eta`.
pub fn gromov_product(
    omega: &ConvexDomain,
    base: &ProjPoint,
    xi: &BoundaryPoint,
    eta: &BoundaryPoint,
    t: f64,
) -> Result<f64> {
    check_gromov_inputs(omega, base, &[xi, eta], t)?;
    let b = hyperboloid(base);
    let u = ray_direction(&b, xi.point.unit());
    let v = ray_direction(&b, eta.point.unit());
    let diff: Vec<f64> = u.iter().zip(&v).map(|(a, c)| a - c).collect();
    Ok(gromov_from_gap(qform(&diff).max(0.0), t))
}

/// `d_x(xi, eta) = exp(-(xi|eta)_x)`.
pub fn gromov_quasi_distance(
    omega: &ConvexDomain,
    base: &ProjPoint,
    xi: &BoundaryPoint,
    eta: &BoundaryPoint,
) -> Result<f64> {
    Ok((-gromov_product(omega, base, xi, eta, DEFAULT_RAY_LENGTH)?).exp())
}

/// Largest ratio within one dyadic band `2^-(band+1) < d <= 2^-band`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BandMax {
    pub band: i32,
    pub count: usize,
    pub max_ratio: f64,
}

/// One evaluated pair.
#[derive(Clone, Debug, PartialEq)]
pub struct PairRatio {
    pub index: usize,
    pub d: f64,
    pub d_star: f64,
    pub d_x: f64,
    pub ratio: f64,
    pub band: i32,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ComparisonReport {
    pub max_ratio: f64,
    pub by_scale: Vec<BandMax>,
    pub pairs: Vec<PairRatio>,
    /// Indices of coincident pairs that were skipped.
    pub skipped: Vec<usize>,
}

impl ComparisonReport {
    /// Largest over smallest band maximum, among bands with at least `min_count` pairs.
    pub fn band_spread(&self, min_count: usize) -> f64 {
        let m: Vec<f64> = self.by_scale.iter().filter(|b| b.count >= min_count).map(|b| b.max_ratio).collect();
        if m.is_empty() {
            return 1.0;
        }
        m.iter().copied().fold(0.0, f64::max) / m.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// `d_x(p, q) / sqrt(d(p, q) d*(p*, q*))` for every pair, maximised overall and
/// within dyadic bands of `d(p, q)`.
pub fn comparison_ratio(
    omega: &ConvexDomain,
    base: &ProjPoint,
    pairs: &[(BoundaryPoint, BoundaryPoint)],
) -> Result<ComparisonReport> {
    let all: Vec<&BoundaryPoint> = pairs.iter().flat_map(|(p, q)| [p, q]).collect();
    check_gromov_inputs(omega, base, &all, DEFAULT_RAY_LENGTH)?;
    let evaluated = pairs
        .par_iter()
        .enumerate()
        .map(|(i, (p, q))| {
            let d = proj_distance(&p.point, &q.point)?;
            let d_star = proj_distance(&p.tangent, &q.tangent)?;
            if d <= 1e-14 || d_star <= 1e-14 {
                return Ok(Err(i));
            }
            let d_x = gromov_quasi_distance(omega, base, p, q)?;
            let ratio = d_x / (d * d_star).sqrt();
            let band = (-d.log2()).floor() as i32;
            Ok(Ok(PairRatio { index: i, d, d_star, d_x, ratio, band }))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut out = Vec::new();
    let mut skipped = Vec::new();
    for e in evaluated {
        match e {
            Ok(p) => out.push(p),
            Err(i) => skipped.push(i),
        }
    }
    let mut bands: std::collections::BTreeMap<i32, (usize, f64)> = Default::default();
    for p in &out {
        let e = bands.entry(p.band).or_insert((0, 0.0));
        e.0 += 1;
        e.1 = e.1.max(p.ratio);
    }
    Ok(ComparisonReport {
        max_ratio: out.iter().map(|p| p.ratio).fold(0.0, f64::max),
        by_scale: bands.into_iter().map(|(band, (count, max_ratio))| BandMax { band, count, max_ratio }).collect(),
        pairs: out,
        skipped,
    })
}

/// CSV with columns `p, q, d, d_star, d_x, ratio, band`; `p` and `q` are pair
/// indices into the input.
pub fn pairs_csv(report: &ComparisonReport, pairs: &[(BoundaryPoint, BoundaryPoint)]) -> String {
    let fmt_point = |p: &BoundaryPoint| p.point.unit().iter().map(|x| fmt_sig(*x)).collect::<Vec<_>>().join(";");
    let mut out = String::from("p,q,d,d_star,d_x,ratio,band\n");
    for r in &report.pairs {
        let (p, q) = &pairs[r.index];
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            fmt_point(p),
            fmt_point(q),
            fmt_sig(r.d),
            fmt_sig(r.d_star),
            fmt_sig(r.d_x),
            fmt_sig(r.ratio),
            r.band
        ));
    }
    out
}

struct Ray<'a> {
    point: &'a BoundaryPoint,
    u: Vec<f64>,
}

impl NetPoint for Ray<'_> {
    fn coords(&self) -> Vec<f64> {
        self.point.coords()
    }
}

/// Box-counting dimension of boundary points under `d_x`.
pub fn quasi_metric_dimension(
    points: &[BoundaryPoint],
    omega: &ConvexDomain,
    base: &ProjPoint,
    scale_count: usize,
) -> Result<DimensionEstimate> {
    let refs: Vec<&BoundaryPoint> = points.iter().collect();
    check_gromov_inputs(omega, base, &refs, DEFAULT_RAY_LENGTH)?;
    let b = hyperboloid(base);
    let rays: Vec<Ray> = points.iter().map(|p| Ray { u: ray_direction(&b, p.point.unit()), point: p }).collect();
    box_dimension(
        &rays,
        |x: &Ray, y: &Ray| {
            let diff: Vec<f64> = x.u.iter().zip(&y.u).map(|(a, c)| a - c).collect();
            (-gromov_from_gap(qform(&diff).max(0.0), DEFAULT_RAY_LENGTH)).exp()
        },
        scale_count,
    )
}

/// True when `g^T J g = J` to `tol`, i.e. `g` preserves the ellipsoid.
pub fn preserves_ellipsoid(g: &SquareMatrix, tol: f64) -> bool {
    let n = g.dim();
    let mut j = DMatrix::identity(n, n);
    j[(n - 1, n - 1)] = -1.0;
    let m = g.as_matrix();
    (m.transpose() * &j * m - j).amax() <= tol
}

/// `d_H(o, gamma o)` over the ball of radius `max_len`, with word lengths.
///
/// Every generator must preserve the ellipsoid; then `q(gamma o) = q(o)`, and
/// the distance `acosh(|B(o, gamma o)| / |q(o)|)` needs only the bilinear
/// pairing, which stays accurate for long words.
pub fn orbit_distances(gs: &GeneratorSet, base: &ProjPoint, max_len: usize, budget: u64) -> Result<Vec<(usize, f64)>> {
    let n = gs.dim();
    let omega = ConvexDomain::Ellipsoid(n);
    check_interior(&omega, base)?;
    if let Some(i) = gs.generators().iter().position(|g| !preserves_ellipsoid(g, 1e-9)) {
        return Err(Error::input(format!("generator {i} does not preserve the ellipsoid")));
    }
    let o = hyperboloid(base);
    let ov = nalgebra::DVector::from_column_slice(&o);
    ball_map(gs, max_len, budget, |len, g| {
        let go = g.as_matrix() * &ov;
        let c = -bilinear(&o, go.as_slice());
        Ok((len, c.max(1.0).acosh()))
    })
}

/// Critical exponent of the orbit counting function `#{gamma : d_H(o, gamma o) <= R}`,
/// with the same completeness cut as the Cartan counts.
pub fn hilbert_orbit_exponent(
    gs: &GeneratorSet,
    base: &ProjPoint,
    max_len: usize,
    budget: u64,
    bin: f64,
    margin: f64,
) -> Result<ExponentEstimate> {
    let data = orbit_distances(gs, base, max_len, budget)?;
    let values: Vec<f64> = data.iter().map(|d| d.1).collect();
    let mut cs = count_values(&values, bin)?;
    let frontier = data.iter().filter(|d| d.0 == max_len).map(|d| d.1).fold(f64::INFINITY, f64::min);
    cs.complete_to = (cs.max_value - margin).min(frontier);
    critical_exponent(&cs)
}
