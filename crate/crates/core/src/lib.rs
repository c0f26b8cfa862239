//! Numerics for projective Anosov subgroups of `SL(n, R)`.
//!
//! The crate enumerates balls and conjugacy classes of finitely generated
//! matrix groups, estimates the critical exponents `delta_phi` and entropies
//! `h_phi` attached to linear forms on the Cartan subspace, samples the
//! symmetric limit set in `P(R^n) x P((R^n)*)` and estimates its box-counting
//! dimension, and provides Hilbert-metric tools on the ellipsoid and
//! positive-definite-cone models.
//!
//! Module map:
//!
//! - [`linalg`]: unimodular matrices, Cartan/Jordan projections, projective metrics.
//! - [`words`]: reduced-word and conjugacy-class enumeration.
//! - [`reps`]: exterior/symmetric/tensor functors and the scenario catalog.
//! - [`exponents`]: counting series and exponent estimators.
//! - [`limit_set`]: limit-set sampling and box-counting dimension.
//! - [`hilbert`]: Hilbert distance, Gromov products and the boundary quasi-metric.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod exponents;
pub mod format;
pub mod hilbert;
pub mod limit_set;
pub mod linalg;
pub mod reps;
pub mod words;

/// Crate version, recorded in reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub use error::{Error, Result};
pub use linalg::{
    attracting_pair, cartan_projection, jordan_projection, opposition_involution, proj_distance, proximality_gaps,
    sym_distance, CartanVector, DualProjPoint, LinearForm, ProjPoint, Proximality, SquareMatrix,
};
