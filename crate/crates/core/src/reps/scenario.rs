//! Named example families, each realised by a two-generator free group.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_3};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::cocycle::Cocycle;
use super::{block_embed, principal_sl2_orthonormal, sym_square, tensor_product};
use crate::error::{Error, Result};
use crate::linalg::{proj_distance, proximal_frame, SquareMatrix};
use crate::words::GeneratorSet;

/// Scenario names, in catalog order.
pub const CATALOG: [&str; 6] =
    ["schottky-so21", "fuchsian-irr-sl3", "fuchsian-red-sl3", "cocycle-sl3", "product-sl4", "dgk-embed"];

/// Minimum angle (radians) required by the ping-pong heuristic.
pub const SEPARATION_ANGLE: f64 = 0.3;
const MIN_GENERATOR_GAP: f64 = 0.1;

/// One-line description per catalog entry.
pub fn catalog() -> Vec<(&'static str, &'static str)> {
    vec![
        ("schottky-so21", "two hyperbolic boosts in SO(2,1) < SL(3,R); params t, psi"),
        ("fuchsian-irr-sl3", "SL(2,R) Schottky group through the irreducible representation; params t, psi"),
        ("fuchsian-red-sl3", "SL(2,R) Schottky group block-embedded as diag(g, 1); params t, psi"),
        ("cocycle-sl3", "affine deformation [[g, u(g)], [0, 1]]; params t, psi, cocycle, scale, seed"),
        ("product-sl4", "j1(g) (x) j2(g) for two SL(2,R) Schottky groups; params t, psi, t2, psi2"),
        ("dgk-embed", "Sym^2 of another scenario; params base plus the base's params"),
    ]
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CocycleMode {
    /// Seeded uniform values in `[-scale, scale]^2` on each generator.
    Random,
    /// `u(g) = g v - v` with a seeded `v`.
    Coboundary,
    Zero,
}

/// Resolved free parameters of a scenario.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScenarioParams {
    /// Translation length of each generator of the first Schottky group.
    pub t: f64,
    /// Angle between the generator axes, measured in the hyperbolic disk.
    pub psi: f64,
    pub t2: f64,
    pub psi2: f64,
    pub seed: u64,
    pub cocycle: CocycleMode,
    pub scale: f64,
    pub base: String,
}

impl Default for ScenarioParams {
    fn default() -> Self {
        ScenarioParams {
            t: 2.0,
            psi: FRAC_PI_2,
            t2: 3.0,
            psi2: FRAC_PI_3,
            seed: 0,
            cocycle: CocycleMode::Random,
            scale: 1.0,
            base: "fuchsian-red-sl3".to_string(),
        }
    }
}

impl ScenarioParams {
    /// Applies one `key=value` override; returns `false` for keys that are not
    /// scenario parameters.
    pub fn set(&mut self, key: &str, value: &str) -> Result<bool> {
        let float = |v: &str| -> Result<f64> {
            v.parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| Error::Config(format!("{key}: {v:?} is not a finite number")))
        };
        match key {
            "t" => self.t = float(value)?,
            "psi" => self.psi = float(value)?,
            "t2" => self.t2 = float(value)?,
            "psi2" => self.psi2 = float(value)?,
            "scale" => self.scale = float(value)?,
            "seed" => {
                self.seed =
                    value.parse().map_err(|_| Error::Config(format!("seed: {value:?} is not an unsigned integer")))?
            }
            "cocycle" => {
                self.cocycle = match value {
                    "random" => CocycleMode::Random,
                    "coboundary" => CocycleMode::Coboundary,
                    "zero" => CocycleMode::Zero,
                    other => return Err(Error::Config(format!("unknown cocycle mode {other:?}"))),
                }
            }
            "base" => self.base = value.to_string(),
            _ => return Ok(false),
        }
        Ok(true)
    }

    pub fn from_map(map: &BTreeMap<String, String>) -> Result<Self> {
        let mut p = ScenarioParams::default();
        for (k, v) in map {
            p.set(k, v)?;
        }
        Ok(p)
    }
}

/// A relation the scenario is expected to satisfy, checked by the verifier.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ExpectedRelation {
    /// `delta_{1,n} = ratio * delta_{1,2}`, holding entry by entry in the counts.
    ExactRatio { ratio: f64, tolerance: f64 },
    /// `2 delta_{1,n} = dim = delta_{1,2}`.
    EqualityCase { tolerance: f64 },
    /// Every limit line lies in the projective line `x_n = 0`.
    LinesOnInvariantLine { tolerance: f64 },
}

#[derive(Clone, Debug)]
pub struct Scenario {
    pub name: String,
    pub params: ScenarioParams,
    pub generators: GeneratorSet,
    pub ambient_n: usize,
    /// Whether the group is projectively convex cocompact, which selects the
    /// stronger lower bound `2 delta_{1,n} <= dim`.
    pub convex_cocompact: bool,
    pub expected: Vec<ExpectedRelation>,
    pub seed: u64,
    pub notes: Vec<String>,
}

fn rotation2(phi: f64) -> SquareMatrix {
    let (s, c) = phi.sin_cos();
    SquareMatrix::from_row_slice(2, &[c, -s, s, c]).unwrap()
}

/// Two hyperbolic elements of `SL(2, R)` with translation length `t` whose axes
/// pass through the center of the disk at angle `psi`.
pub fn sl2_schottky(t: f64, psi: f64) -> Result<GeneratorSet> {
    if !(t > 0.0) {
        return Err(Error::Config(format!("translation length t = {t} must be positive")));
    }
    let a = SquareMatrix::diag(&[(t / 2.0).exp(), (-t / 2.0).exp()])?;
    // Rotation by phi in SL(2) rotates the disk by 2 phi.
    let b = rotation2(psi / 2.0).conjugate(&a);
    GeneratorSet::free(vec![a, b])
}

/// Boosts of rapidity `t` in `SO(2,1)` preserving `x1^2 + x2^2 - x3^2`, the
/// second rotated by `psi` about the `x3` axis.
pub fn so21_schottky(t: f64, psi: f64) -> Result<GeneratorSet> {
    if !(t > 0.0) {
        return Err(Error::Config(format!("translation length t = {t} must be positive")));
    }
    let (ch, sh) = (t.cosh(), t.sinh());
    let boost = SquareMatrix::from_row_slice(3, &[ch, 0.0, sh, 0.0, 1.0, 0.0, sh, 0.0, ch])?;
    let (s, c) = psi.sin_cos();
    let rot = SquareMatrix::from_row_slice(3, &[c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0])?;
    let b = rot.conjugate(&boost);
    GeneratorSet::free(vec![boost, b])
}

/// Ping-pong heuristic: every generator and inverse is proximal with gap at
/// least 0.1 and angle at least [`SEPARATION_ANGLE`] to its own repelling
/// hyperplane; for distinct letters `s, s'` with `s' != s^-1` the attracting
/// line of `s` is that far from the repelling hyperplane of `s'` and from the
/// attracting line of `s'`.
pub fn check_separation(gs: &GeneratorSet) -> Result<()> {
    let letters = gs.symmetric_set();
    let mut frames = Vec::with_capacity(letters.len());
    for (i, g) in letters.iter().enumerate() {
        match proximal_frame(g)? {
            Ok(f) => frames.push(f),
            Err(reason) => {
                return Err(Error::Config(format!(
                    "letter {i} is not proximal ({reason}); not a Schottky configuration"
                )))
            }
        }
    }
    for (i, f) in frames.iter().enumerate() {
        if f.gap < MIN_GENERATOR_GAP {
            return Err(Error::Config(format!(
                "letter {i} has spectral gap {:.3} < {MIN_GENERATOR_GAP}; increase the translation length",
                f.gap
            )));
        }
        if f.angle() < SEPARATION_ANGLE {
            return Err(Error::Config(format!("letter {i} is only {:.3}-proximal (< {SEPARATION_ANGLE})", f.angle())));
        }
        for (j, h) in frames.iter().enumerate() {
            if i == j || j == (i ^ 1) {
                continue;
            }
            let to_hyperplane = h.repelling.pairing(&f.line).min(1.0).asin();
            let to_line = proj_distance(&f.line, &h.line)?;
            if to_hyperplane < SEPARATION_ANGLE || to_line < SEPARATION_ANGLE {
                return Err(Error::Config(format!(
                    "letters {i} and {j} are not separated: angle to repelling hyperplane {to_hyperplane:.3}, \
                     between attracting lines {to_line:.3} (need >= {SEPARATION_ANGLE}); adjust psi or t"
                )));
            }
        }
    }
    Ok(())
}

/// Builds a catalog scenario with the given parameters.
pub fn build_scenario(name: &str, params: &ScenarioParams) -> Result<Scenario> {
    let p = params.clone();
    let mut notes = Vec::new();
    // the deformed generators need not play ping-pong themselves
    let mut certified = None;
    let (generators, convex_cocompact, expected) = match name {
        "schottky-so21" => {
            let gs = so21_schottky(p.t, p.psi)?;
            (gs, true, vec![ExpectedRelation::EqualityCase { tolerance: 0.05 }])
        }
        "fuchsian-irr-sl3" => {
            let gs = sl2_schottky(p.t, p.psi)?.map(|g| principal_sl2_orthonormal(g, 3))?;
            (gs, true, vec![ExpectedRelation::ExactRatio { ratio: 0.5, tolerance: 1e-6 }])
        }
        "fuchsian-red-sl3" => {
            let gs = sl2_schottky(p.t, p.psi)?.map(|g| Ok(block_embed(g)))?;
            let expected = vec![
                ExpectedRelation::ExactRatio { ratio: 0.5, tolerance: 1e-6 },
                ExpectedRelation::LinesOnInvariantLine { tolerance: 1e-6 },
            ];
            (gs, false, expected)
        }
        "cocycle-sl3" => {
            let base = sl2_schottky(p.t, p.psi)?;
            let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
            let mut draw = || [p.scale * rng.random_range(-1.0..1.0), p.scale * rng.random_range(-1.0..1.0)];
            let u = match p.cocycle {
                CocycleMode::Random => Cocycle::new((0..base.rank()).map(|_| draw()).collect()),
                CocycleMode::Coboundary => Cocycle::coboundary(&base, draw())?,
                CocycleMode::Zero => Cocycle::zero(base.rank()),
            };
            notes.push(format!("cocycle values on generators: {:?}", u.values()));
            let gs = u.affine_generators(&base)?;
            certified = Some(base.map(|g| Ok(block_embed(g)))?);
            (gs, false, vec![ExpectedRelation::LinesOnInvariantLine { tolerance: 1e-6 }])
        }
        "product-sl4" => {
            let j1 = sl2_schottky(p.t, p.psi)?;
            let j2 = sl2_schottky(p.t2, p.psi2)?;
            let gens = j1
                .generators()
                .iter()
                .zip(j2.generators())
                .map(|(g, h)| tensor_product(g, h))
                .collect::<Result<Vec<_>>>()?;
            notes.push(
                "free (Schottky) surrogate for a closed-surface group: delta_12 = 1 is not expected here, \
                 only the inequalities"
                    .to_string(),
            );
            (GeneratorSet::free(gens)?, false, Vec::new())
        }
        "dgk-embed" => {
            if p.base == "dgk-embed" {
                return Err(Error::Config("dgk-embed cannot wrap itself".to_string()));
            }
            let base = build_scenario(&p.base, &p)?;
            notes.push(format!("Sym^2 of {}", base.name));
            notes.extend(base.notes);
            (base.generators.map(sym_square)?, true, Vec::new())
        }
        other => return Err(Error::Config(format!("unknown scenario {other:?}; available: {}", CATALOG.join(", ")))),
    };
    check_separation(certified.as_ref().unwrap_or(&generators))?;
    Ok(Scenario {
        name: name.to_string(),
        ambient_n: generators.dim(),
        seed: p.seed,
        params: p,
        generators,
        convex_cocompact,
        expected,
        notes,
    })
}
