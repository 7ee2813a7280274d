//! The volume flux of twist words.
//!
//! The flux class is stored by its periods on the basis curves. A letter
//! `(ω, c)` on a cylinder with core `β` sweeps `c·∫ω dz` of area across every
//! curve, once per algebraic crossing of `β` with it, so its period on `c_j`
//! is `c · ∫ω dz · ι(β, c_j)`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::homology::{signed_crossings, CurveSystem};
use crate::isotopy::{standard_cylinders, Schedule, TwistWord};
use crate::montecarlo::integrate;
use crate::profile::TwistProfile;
use crate::surface::{FlatSurface, GENUS2_L, TORUS};
use crate::geom::Piece;

/// A class in `H¹(M; ℝ)` given by its periods on the basis curves.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct FluxClass {
    pub periods: Vec<f64>,
}

impl FluxClass {
    pub fn zero(dim: usize) -> Self {
        FluxClass { periods: vec![0.0; dim] }
    }

    pub fn is_zero(&self) -> bool {
        self.periods.iter().all(|&p| p == 0.0)
    }
}

/// Closed-form flux of a word under its canonical isotopy.
pub fn flux_of_word(word: &TwistWord, system: &CurveSystem) -> Result<FluxClass> {
    let mut periods = vec![0.0; system.dim()];
    let form = system.intersection_form();
    for letter in word.letters() {
        let core = system.index_of(letter.cylinder().core())?;
        let swept = letter.scale * letter.profile.integral();
        for (p, &j) in periods.iter_mut().zip(&form[core]) {
            *p += swept * j as f64;
        }
    }
    Ok(FluxClass { periods })
}

/// Monte Carlo estimate with its standard error.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct OracleEstimate {
    pub value: f64,
    pub sigma: f64,
    pub samples: usize,
    pub resamples: usize,
}

/// Net area carried across `curve` by the isotopy, estimated as
/// `area · E[crossings(trajectory(x), curve)]` over uniform `x`.
pub fn flux_oracle(
    surface: &FlatSurface,
    word: &TwistWord,
    curve: &crate::homology::BasisCurve,
    samples: usize,
    seed: u64,
) -> Result<OracleEstimate> {
    let curves = std::slice::from_ref(curve);
    flux_oracle_curves(surface, word, curves, samples, seed, Schedule::Linear).map(|mut v| v.remove(0))
}

/// Oracle estimates for several curves from the same samples, under an
/// arbitrary time schedule.
pub fn flux_oracle_curves(
    surface: &FlatSurface,
    word: &TwistWord,
    curves: &[crate::homology::BasisCurve],
    samples: usize,
    seed: u64,
    schedule: Schedule,
) -> Result<Vec<OracleEstimate>> {
    let moments = integrate(samples, seed, curves.len(), |rng, out| {
        let x = surface.sample_point(rng);
        let mut pieces: Vec<Piece> = Vec::new();
        word.trace_into(surface, x, schedule, &mut pieces, None)?;
        for (o, c) in out.iter_mut().zip(curves) {
            *o = signed_crossings(&pieces, c)? as f64;
        }
        Ok(())
    })?;
    let area = surface.area();
    Ok((0..curves.len())
        .map(|k| OracleEstimate {
            value: area * moments.mean(k),
            sigma: area * moments.stderr(k),
            samples,
            resamples: moments.resamples,
        })
        .collect())
}

/// Outcome of trying to build a loop in the diffeomorphism group out of a
/// full-circumference shear.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct FluxLoopReport {
    pub surface: String,
    pub cylinder: String,
    /// Shear amount as a multiple of the circumference.
    pub turns: f64,
    pub flux: FluxClass,
    /// The time-one map fixes every sampled point.
    pub time_one_is_identity: bool,
    /// Every intermediate map is a homeomorphism of the surface.
    pub continuous_isotopy: bool,
    pub is_loop: bool,
    pub note: String,
}

/// Constant full-rotation shear of the first horizontal cylinder.
///
/// On the torus the cylinder is the whole surface, its two boundary circles
/// are glued, and the isotopy is a loop with non-zero flux. On the genus-2
/// surface a constant profile does not vanish near the cylinder boundary, so
/// the same construction does not give an isotopy at all.
pub fn flux_loop_demo(surface: &FlatSurface) -> Result<FluxLoopReport> {
    flux_loop_demo_turns(surface, 1.0)
}

pub fn flux_loop_demo_turns(surface: &FlatSurface, turns: f64) -> Result<FluxLoopReport> {
    if surface.name() != TORUS && surface.name() != GENUS2_L {
        return Err(Error::UnsupportedSurface(surface.name().into()));
    }
    let system = crate::homology::standard_curves(surface)?;
    let cylinder = standard_cylinders(surface)?.remove(0);
    let amount = turns * cylinder.circumference();
    let profile = TwistProfile::full_shear(cylinder.clone(), amount);
    let word = TwistWord::single(profile.clone(), 1.0);
    let flux = flux_of_word(&word, &system)?;

    let mut time_one_is_identity = true;
    for x in surface.sample_area(1000, 0x5eed) {
        let y = word.apply_point(surface, x)?;
        if y.coords.dist(x.coords) > 1e-12 {
            time_one_is_identity = false;
            break;
        }
    }
    let (z0, z1) = cylinder.transverse();
    let covers_surface = (cylinder.area() - surface.area()).abs() < 1e-12;
    let boundary_matches = (profile.eval(z0) - profile.eval(z1)).abs() < 1e-12;
    let continuous_isotopy = profile.vanishes_near_boundary() || (covers_surface && boundary_matches);
    let is_loop = continuous_isotopy && time_one_is_identity;
    let note = if is_loop {
        format!(
            "constant shear by {amount} around `{}` closes up into a loop with non-zero flux",
            cylinder.id()
        )
    } else if !continuous_isotopy {
        format!(
            "profile on `{}` must vanish near the cylinder boundary; a constant shear tears the surface",
            cylinder.id()
        )
    } else {
        "time-one map is not the identity".to_string()
    };
    Ok(FluxLoopReport {
        surface: surface.name().into(),
        cylinder: cylinder.id().into(),
        turns,
        flux,
        time_one_is_identity,
        continuous_isotopy,
        is_loop,
        note,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::homology::standard_curves;
    use crate::isotopy::Letter;

    fn setup() -> (FlatSurface, CurveSystem, Vec<crate::isotopy::Cylinder>) {
        let s = FlatSurface::genus2_l();
        let sys = standard_curves(&s).unwrap();
        let c = standard_cylinders(&s).unwrap();
        (s, sys, c)
    }

    #[test]
    fn closed_form_examples() {
        let (_, sys, c) = setup();
        assert!(flux_of_word(&TwistWord::empty(), &sys).unwrap().is_zero());
        let p = TwistProfile::with_integral(c[0].clone(), 0.5).unwrap();
        let f = flux_of_word(&TwistWord::single(p.clone(), 1.0), &sys).unwrap();
        let expected = [0.0, 0.0, 0.5, 0.5];
        for (a, b) in f.periods.iter().zip(expected) {
            assert!((a - b).abs() < 1e-15);
        }
        for s in [-2.0, -1.0, 0.5, 3.0] {
            let fs = flux_of_word(&TwistWord::single(p.clone(), s), &sys).unwrap();
            for (a, b) in fs.periods.iter().zip(&f.periods) {
                assert!((a - s * b).abs() <= 1e-12 * (s * b).abs());
            }
        }
    }

    #[test]
    fn additivity() {
        let (_, sys, c) = setup();
        let w1 = TwistWord::single(TwistProfile::tent(c[0].clone(), 0.2, 0.8, 1.0).unwrap(), 1.3);
        let w2 = TwistWord::new(vec![
            Letter::new(TwistProfile::tent(c[2].clone(), 0.2, 0.8, 0.5).unwrap(), -0.4),
            Letter::new(TwistProfile::tent(c[1].clone(), 1.2, 1.8, 2.0).unwrap(), 1.0),
        ])
        .unwrap();
        let f = flux_of_word(&w1.then(&w2), &sys).unwrap();
        let (f1, f2) = (flux_of_word(&w1, &sys).unwrap(), flux_of_word(&w2, &sys).unwrap());
        for k in 0..4 {
            assert_eq!(f.periods[k], f1.periods[k] + f2.periods[k]);
        }
    }

    #[test]
    fn unknown_core_is_an_error() {
        let (_, sys, _) = setup();
        let t = FlatSurface::torus();
        let tc = standard_cylinders(&t).unwrap();
        let w = TwistWord::single(TwistProfile::with_integral(tc[0].clone(), 1.0).unwrap(), 1.0);
        assert!(matches!(flux_of_word(&w, &sys), Err(Error::UnknownCurve(_))));
    }

    #[test]
    fn oracle_small_run() {
        let (s, sys, c) = setup();
        let e = flux_oracle(&s, &TwistWord::empty(), sys.curve("v1").unwrap(), 1000, 1).unwrap();
        assert_eq!(e.value, 0.0);
        let w = TwistWord::single(TwistProfile::with_integral(c[0].clone(), 0.5).unwrap(), 1.0);
        let e = flux_oracle(&s, &w, sys.curve("v1").unwrap(), 50_000, 2).unwrap();
        assert!((e.value - 0.5).abs() < 4.0 * e.sigma, "{e:?}");
        let round_trip = w.then(&w.inverse());
        let e = flux_oracle(&s, &round_trip, sys.curve("v1").unwrap(), 20_000, 3).unwrap();
        assert!(e.value.abs() <= 3.0 * e.sigma);
    }

    #[test]
    fn loop_demo() {
        let t = flux_loop_demo(&FlatSurface::torus()).unwrap();
        assert!(t.is_loop);
        assert_eq!(t.flux.periods, vec![0.0, 1.0]);
        let t2 = flux_loop_demo_turns(&FlatSurface::torus(), 2.0).unwrap();
        assert!(t2.is_loop);
        assert_eq!(t2.flux.periods, vec![0.0, 2.0]);
        let l = flux_loop_demo(&FlatSurface::genus2_l()).unwrap();
        assert!(!l.is_loop);
        assert!(!l.continuous_isotopy);
        assert!(l.time_one_is_identity);
    }
}
