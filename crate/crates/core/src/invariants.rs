//! Statistical and exact invariant checks over randomly generated inputs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::Result;
use crate::flux::flux_of_word;
use crate::gamma::{gamma_closed_form, gamma_mc, GammaEstimate, GammaProblem, PathSystem};
use crate::geom::Vec2;
use crate::homology::{signed_crossings, BasisCurve, CurveSystem};
use crate::isotopy::{check_volume_preservation, Cylinder, Letter, Schedule, TwistWord};
use crate::random::{random_phi, random_profile, random_word};
use crate::surface::FlatSurface;

/// One checked property. `pass` is authoritative; `expected`, `observed`
/// and `tolerance` describe the comparison for the report.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct InvariantCheck {
    pub name: String,
    pub expected: f64,
    pub observed: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl InvariantCheck {
    fn within(name: impl Into<String>, expected: f64, observed: f64, tolerance: f64) -> Self {
        let pass = (observed - expected).abs() <= tolerance;
        InvariantCheck { name: name.into(), expected, observed, tolerance, pass }
    }

    fn below(name: impl Into<String>, limit: f64, observed: f64) -> Self {
        InvariantCheck { name: name.into(), expected: limit, observed, tolerance: 0.0, pass: observed < limit }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InvariantConfig {
    /// Monte Carlo samples per estimate.
    pub samples: usize,
    pub seed: u64,
    /// Random words per statistical property.
    pub cases: usize,
}

impl Default for InvariantConfig {
    fn default() -> Self {
        InvariantConfig { samples: 200_000, seed: 7, cases: 2 }
    }
}

fn combined(es: &[&GammaEstimate]) -> f64 {
    es.iter().map(|e| e.stderr * e.stderr).sum::<f64>().sqrt()
}

/// Runs every invariant on `surface` with the given curve system and
/// cylinders.
pub fn run_invariants(
    surface: &FlatSurface,
    system: &CurveSystem,
    cylinders: &[Cylinder],
    cfg: &InvariantConfig,
) -> Result<Vec<InvariantCheck>> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut out = Vec::new();
    let n = system.dim();
    let mut seed = cfg.seed.wrapping_mul(1000);
    let mut next_seed = || {
        seed += 1;
        seed
    };

    out.push(normalize_idempotence(surface, &mut rng)?);
    out.extend(crossing_antisymmetry(surface, system, &mut rng)?);

    let word = random_word(cylinders, 5, &mut rng)?;
    let vol = check_volume_preservation(surface, &word, cfg.samples, next_seed())?;
    out.push(InvariantCheck::below("volume-preservation/chi-square", vol.threshold, vol.chi_square));
    out.push(InvariantCheck::within("volume-preservation/jacobian", 0.0, vol.jacobian_max_deviation, 0.0));

    let mut worst_scaling: f64 = 0.0;
    let mut max_seen_over_bound: f64 = 0.0;
    for case in 0..cfg.cases {
        let w1 = random_word(cylinders, 3, &mut rng)?;
        let w2 = random_word(cylinders, 3, &mut rng)?;
        let phi = random_phi(n, &mut rng);
        let tag = |s: &str| format!("{s}/case-{case}");

        for t in [-2.0, -1.0, 0.5, 3.0] {
            let g = gamma_closed_form(&phi, &w1, system)?;
            let gt = gamma_closed_form(&phi, &w1.scaled(t), system)?;
            worst_scaling = worst_scaling.max((gt - t * g).abs() / (t * g).abs().max(f64::MIN_POSITIVE));
            let f = flux_of_word(&w1, system)?;
            let ft = flux_of_word(&w1.scaled(t), system)?;
            for (a, b) in ft.periods.iter().zip(&f.periods) {
                worst_scaling = worst_scaling.max((a - t * b).abs() / (t * b).abs().max(f64::MIN_POSITIVE));
            }
        }

        let base = GammaProblem::new(surface, system, &w1);
        let straight = gamma_mc(&base, &phi, cfg.samples, next_seed())?;
        let paths = PathSystem::Waypoint { waypoint: waypoint(surface) };
        let via = gamma_mc(&base.with_paths(paths), &phi, cfg.samples, next_seed())?;
        out.push(InvariantCheck::within(
            tag("path-system-independence"),
            straight.value,
            via.value,
            3.0 * combined(&[&straight, &via]),
        ));

        let smooth = gamma_mc(&base.with_schedule(Schedule::Smoothstep { steps: 4 }), &phi, cfg.samples, next_seed())?;
        out.push(InvariantCheck::within(
            tag("isotopy-independence/schedule"),
            straight.value,
            smooth.value,
            3.0 * combined(&[&straight, &smooth]),
        ));

        let commuting = commuting_word(&w1, cylinders, &mut rng)?;
        let a = gamma_mc(&GammaProblem::new(surface, system, &commuting), &phi, cfg.samples, next_seed())?;
        let swapped = commuting.transposed(0, 1);
        let b = gamma_mc(&GammaProblem::new(surface, system, &swapped), &phi, cfg.samples, next_seed())?;
        out.push(InvariantCheck::within(
            tag("isotopy-independence/commuting-letters"),
            a.value,
            b.value,
            3.0 * combined(&[&a, &b]),
        ));

        let composed = w1.then(&w2);
        let g12 = gamma_mc(&GammaProblem::new(surface, system, &composed), &phi, cfg.samples, next_seed())?;
        let g2 = gamma_mc(&GammaProblem::new(surface, system, &w2), &phi, cfg.samples, next_seed())?;
        out.push(InvariantCheck::within(
            tag("homomorphism-additivity"),
            straight.value + g2.value,
            g12.value,
            3.0 * combined(&[&straight, &g2, &g12]),
        ));

        let neg = w1.scaled(-1.0);
        let gn = gamma_mc(&GammaProblem::new(surface, system, &neg), &phi, cfg.samples, next_seed())?;
        out.push(InvariantCheck::within(
            tag("negation"),
            -straight.value,
            gn.value,
            3.0 * combined(&[&straight, &gn]),
        ));

        for e in [&straight, &via, &smooth, &a, &b, &g12, &g2, &gn] {
            max_seen_over_bound = max_seen_over_bound.max(e.max_abs_integrand / e.integrand_bound.max(f64::MIN_POSITIVE));
        }
    }
    out.push(InvariantCheck::within("scaling/exact", 0.0, worst_scaling, 1e-12));
    out.push(InvariantCheck {
        name: "integrand-bound".into(),
        expected: 1.0,
        observed: max_seen_over_bound,
        tolerance: 0.0,
        pass: max_seen_over_bound <= 1.0,
    });
    Ok(out)
}

/// A waypoint in the kernel, away from the base point.
pub fn waypoint(surface: &FlatSurface) -> Vec2 {
    let b = surface.base_point().coords;
    [(-0.2, 0.15), (0.15, -0.2), (-0.1, -0.1), (0.1, 0.1)]
        .into_iter()
        .map(|(dx, dy)| Vec2::new(b.x + dx, b.y + dy))
        .find(|&w| surface.in_kernel(w))
        .unwrap_or(Vec2::new(b.x + 1e-3, b.y + 1e-3))
}

/// Two commuting letters taken from `word` if possible, otherwise two random
/// letters on the same cylinder.
fn commuting_word<R: Rng>(word: &TwistWord, cylinders: &[Cylinder], rng: &mut R) -> Result<TwistWord> {
    for i in 0..word.len() {
        for j in i + 1..word.len() {
            if word.letters_commute(i, j) {
                return TwistWord::new(vec![word.letters()[i].clone(), word.letters()[j].clone()]);
            }
        }
    }
    let cyl = &cylinders[rng.random_range(0..cylinders.len())];
    TwistWord::new(vec![
        Letter::new(random_profile(cyl, rng)?, rng.random_range(-1.5..1.5)),
        Letter::new(random_profile(cyl, rng)?, rng.random_range(-1.5..1.5)),
    ])
}

fn random_interior<R: Rng>(surface: &FlatSurface, rng: &mut R) -> Vec2 {
    surface.sample_point(rng).coords
}

fn normalize_idempotence<R: Rng>(surface: &FlatSurface, rng: &mut R) -> Result<InvariantCheck> {
    let mut violations = 0usize;
    for _ in 0..2000 {
        let p = random_interior(surface, rng);
        let theta = rng.random_range(0.0..std::f64::consts::TAU);
        let dir = Vec2::new(theta.cos(), theta.sin());
        let len = rng.random_range(0.0..3.0);
        let mut pieces = Vec::new();
        let end = match surface.unroll_into(p, dir, len, &mut pieces) {
            Ok(e) => e,
            Err(e) if e.is_resampleable() => continue,
            Err(e) => return Err(e),
        };
        let once = surface.normalize(end)?;
        let twice = surface.normalize(once.coords)?;
        violations += (once != twice) as usize;
    }
    Ok(InvariantCheck::within("normalize-idempotence", 0.0, violations as f64, 0.0))
}

fn crossing_antisymmetry<R: Rng>(
    surface: &FlatSurface,
    system: &CurveSystem,
    rng: &mut R,
) -> Result<Vec<InvariantCheck>> {
    let j = system.intersection_form();
    let mut form_dev = 0i64;
    for (a, row) in j.iter().enumerate() {
        for (b, &v) in row.iter().enumerate() {
            form_dev = form_dev.max((v + j[b][a]).abs());
        }
    }
    let mut violations = 0usize;
    let segment = |rng: &mut R| -> Result<Option<Vec<crate::geom::Piece>>> {
        let p = random_interior(surface, rng);
        let theta = rng.random_range(0.0..std::f64::consts::TAU);
        let mut pieces = Vec::new();
        match surface.unroll_into(p, Vec2::new(theta.cos(), theta.sin()), rng.random_range(0.1..4.0), &mut pieces) {
            Ok(_) => Ok(Some(pieces)),
            Err(e) if e.is_resampleable() => Ok(None),
            Err(e) => Err(e),
        }
    };
    for _ in 0..2000 {
        let (Some(a), Some(b)) = (segment(rng)?, segment(rng)?) else { continue };
        let ca = BasisCurve { id: "a".into(), pieces: a.clone(), orientation: 1 };
        let cb = BasisCurve { id: "b".into(), pieces: b.clone(), orientation: 1 };
        match (signed_crossings(&a, &cb), signed_crossings(&b, &ca)) {
            (Ok(x), Ok(y)) => violations += (x != -y) as usize,
            (Err(e), _) | (_, Err(e)) if e.is_resampleable() => {}
            (Err(e), _) | (_, Err(e)) => return Err(e),
        }
    }
    Ok(vec![
        InvariantCheck::within("crossing-antisymmetry/form", 0.0, form_dev as f64, 0.0),
        InvariantCheck::within("crossing-antisymmetry/segments", 0.0, violations as f64, 0.0),
    ])
}
