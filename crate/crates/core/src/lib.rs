//! Fundamental-group averaging and the volume flux homomorphism on flat
//! surfaces.
//!
//! A closed flat surface is modelled as a Euclidean polygon with edges glued
//! by translations ([`surface`]). Area-preserving diffeomorphisms are words in
//! cylinder twists, each a shear `(z, s) -> (z, s + ω(z))` supported in a flat
//! cylinder ([`isotopy`]). For such a word `f` with its canonical isotopy the
//! crate computes
//!
//! * the flux class, in closed form and by a swept-area Monte Carlo oracle
//!   ([`flux`]);
//! * the average `∫ φ(γ(f; x)) dA` of a cohomology class `φ` over the loops
//!   obtained by closing isotopy tracks with paths to a base point, by Monte
//!   Carlo and by stratified quadrature, and its closed form
//!   `φ(PD(Flux(f)))` ([`gamma`]).
//!
//! Loop classes are computed in homology by signed crossing counts against a
//! basis of curves ([`homology`]).

pub mod error;
pub mod flux;
pub mod gamma;
pub mod geom;
pub mod homology;
pub mod invariants;
pub mod isotopy;
pub mod montecarlo;
pub mod profile;
pub mod random;
pub mod surface;

pub use error::{Error, Result};
pub use flux::{flux_loop_demo, flux_of_word, flux_oracle, FluxClass, FluxLoopReport};
pub use gamma::{
    build_loop, gamma_closed_form, gamma_mc, gamma_mc_multi, gamma_stratified,
    gamma_stratified_multi, injectivity_witness, verify_theorem2, Budget, GammaEstimate,
    GammaMethod, GammaProblem, InjectivityReport, PathSystem, Theorem2Report,
};
pub use geom::{Piece, Vec2};
pub use homology::{
    eval_phi, loop_class, poincare_dual, signed_crossings, standard_curves, BasisCurve,
    CohomologyClass, CurveSystem, HomologyVector,
};
pub use isotopy::{
    check_volume_preservation, standard_cylinders, Axis, Cylinder, Letter, Schedule, Trajectory,
    TwistWord,
};
pub use profile::TwistProfile;
pub use surface::{FlatSurface, Segment, SurfacePoint};

/// Library version string.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Distance below which a point counts as sitting on a cone point.
pub const EPS_CONE: f64 = 1e-9;

/// Distance below which a trace vertex counts as sitting on a curve.
pub const EPS_CROSS: f64 = 1e-9;
