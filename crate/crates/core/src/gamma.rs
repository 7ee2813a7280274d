//! Averages of a cohomology class over the loops swept out by an isotopy.
//!
//! For a word `f` and a point `x`, the loop `l(f; x)` runs from the base
//! point `x⁰` to `x` along a leg of the path system, follows the isotopy
//! track of `x`, and returns from `f(x)` to `x⁰`. The estimators here
//! integrate `φ([l(f; x)])` over the surface and compare the result with
//! the closed form `φ(PD(Flux(f)))`.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flux::flux_of_word;
use crate::geom::{Piece, Vec2};
use crate::homology::{eval_phi, poincare_dual, signed_crossings, CohomologyClass, CurveSystem};
use crate::isotopy::{Schedule, TwistWord};
use crate::montecarlo::{integrate, DEGENERACY_BUDGET};
use crate::profile::TwistProfile;
use crate::surface::{dist_to_piece, FlatSurface, SurfacePoint};
use crate::EPS_CONE;

/// How the base point is joined to an arbitrary point.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum PathSystem {
    /// One straight segment from the base point.
    #[default]
    Straight,
    /// Straight to the waypoint, then straight to the target.
    Waypoint { waypoint: Vec2 },
}

impl PathSystem {
    /// Every leg must stay inside the polygon chart, so the base point and
    /// the waypoint must both see the whole polygon.
    pub fn validate(&self, surface: &FlatSurface) -> Result<()> {
        match *self {
            PathSystem::Straight => Ok(()),
            PathSystem::Waypoint { waypoint } => {
                if !waypoint.is_finite() || !surface.in_kernel(waypoint) {
                    return Err(Error::InvalidArgument(format!(
                        "waypoint ({}, {}) does not see the whole polygon",
                        waypoint.x, waypoint.y
                    )));
                }
                if waypoint.dist(surface.base_point().coords) < EPS_CONE {
                    return Err(Error::InvalidArgument("waypoint coincides with the base point".into()));
                }
                Ok(())
            }
        }
    }

    fn leg_pieces(&self) -> usize {
        match self {
            PathSystem::Straight => 1,
            PathSystem::Waypoint { .. } => 2,
        }
    }

    /// Appends the leg from the base point to `x`, reversed if `back`.
    fn push_leg(&self, base: Vec2, x: Vec2, back: bool, out: &mut Vec<Piece>) -> Result<()> {
        match *self {
            PathSystem::Straight => {
                if x.dist(base) < EPS_CONE {
                    return Err(Error::DegenerateLeg { x: x.x, y: x.y });
                }
                out.push(if back { Piece::new(x, base) } else { Piece::new(base, x) });
            }
            PathSystem::Waypoint { waypoint } => {
                if dist_to_piece(x, base, waypoint) < EPS_CONE || x.dist(waypoint) < EPS_CONE {
                    return Err(Error::DegenerateLeg { x: x.x, y: x.y });
                }
                if back {
                    out.push(Piece::new(x, waypoint));
                    out.push(Piece::new(waypoint, base));
                } else {
                    out.push(Piece::new(base, waypoint));
                    out.push(Piece::new(waypoint, x));
                }
            }
        }
        Ok(())
    }
}

/// The closed loop `l(f; x)` as chart pieces, starting and ending at the
/// base point.
pub fn build_loop(
    surface: &FlatSurface,
    word: &TwistWord,
    x: SurfacePoint,
    paths: PathSystem,
) -> Result<Vec<Piece>> {
    let mut out = Vec::new();
    append_loop(surface, word, x, paths, Schedule::Linear, &mut out)?;
    Ok(out)
}

fn append_loop(
    surface: &FlatSurface,
    word: &TwistWord,
    x: SurfacePoint,
    paths: PathSystem,
    schedule: Schedule,
    out: &mut Vec<Piece>,
) -> Result<()> {
    let base = surface.base_point().coords;
    paths.push_leg(base, x.coords, false, out)?;
    let y = word.trace_into(surface, x, schedule, out, None)?;
    paths.push_leg(base, y.coords, true, out)
}

/// Everything that defines the integrand `x ↦ φ([l(f; x)])` apart from `φ`.
#[derive(Debug, Clone, Copy)]
pub struct GammaProblem<'a> {
    pub surface: &'a FlatSurface,
    pub system: &'a CurveSystem,
    pub word: &'a TwistWord,
    pub paths: PathSystem,
    pub schedule: Schedule,
}

impl<'a> GammaProblem<'a> {
    pub fn new(surface: &'a FlatSurface, system: &'a CurveSystem, word: &'a TwistWord) -> Self {
        GammaProblem { surface, system, word, paths: PathSystem::Straight, schedule: Schedule::Linear }
    }

    pub fn with_paths(mut self, paths: PathSystem) -> Self {
        self.paths = paths;
        self
    }

    pub fn with_schedule(mut self, schedule: Schedule) -> Self {
        self.schedule = schedule;
        self
    }

    fn check(&self) -> Result<()> {
        self.paths.validate(self.surface)?;
        if let Some(l) = self.word.letters().first() {
            if l.cylinder().surface_name() != self.surface.name() {
                return Err(Error::InvalidArgument(format!(
                    "word lives on `{}`, not `{}`",
                    l.cylinder().surface_name(),
                    self.surface.name()
                )));
            }
        }
        Ok(())
    }

    /// Evaluates `φ_k([l(f; x)])` for every weight vector; `weights[k]` are
    /// the crossing weights of `φ_k`.
    fn eval(&self, x: SurfacePoint, weights: &[Vec<f64>], buf: &mut Vec<Piece>, out: &mut [f64]) -> Result<()> {
        buf.clear();
        append_loop(self.surface, self.word, x, self.paths, self.schedule, buf)?;
        out.iter_mut().for_each(|o| *o = 0.0);
        for (j, curve) in self.system.curves().iter().enumerate() {
            let c = signed_crossings(buf, curve)?;
            if c != 0 {
                for (o, w) in out.iter_mut().zip(weights) {
                    *o += w[j] * c as f64;
                }
            }
        }
        Ok(())
    }

    /// Upper bound on `|φ([l(f; x)])|` over all `x`, from the number of
    /// chart pieces a loop can have and the number of pieces of each curve.
    pub fn integrand_bound(&self, phi: &CohomologyClass) -> Result<f64> {
        let weights = self.system.crossing_weights(phi)?;
        let mut pieces = 2 * self.paths.leg_pieces();
        for letter in self.word.letters() {
            let cyl = letter.cylinder();
            let reach = letter.scale.abs() * letter.profile.max_abs();
            let wraps = (reach / cyl.circumference()).ceil() as usize + 1;
            let steps = match self.schedule {
                Schedule::Linear => 1,
                Schedule::Smoothstep { steps } => steps.max(1),
            };
            pieces += wraps * (pieces_per_turn(self.surface, cyl) + 1) + steps;
        }
        Ok(weights
            .iter()
            .zip(self.system.curves())
            .map(|(w, c)| w.abs() * (pieces * c.pieces.len()) as f64)
            .sum())
    }
}

/// Chart pieces of one trip around a cylinder, measured along its core.
fn pieces_per_turn(surface: &FlatSurface, cyl: &crate::isotopy::Cylinder) -> usize {
    let (z0, z1) = cyl.transverse();
    let start = cyl.point(0.5 * (z0 + z1) + 1e-7, cyl.origin() + 1e-7);
    let mut out = Vec::new();
    match surface.unroll_into(start, cyl.direction(), cyl.circumference(), &mut out) {
        Ok(_) => out.len().max(1) + 1,
        Err(_) => surface.polygon().len(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GammaMethod {
    Mc,
    Stratified,
}

impl std::fmt::Display for GammaMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            GammaMethod::Mc => "mc",
            GammaMethod::Stratified => "stratified",
        })
    }
}

/// A numerical value of `Γ(φ)(f)`.
///
/// Monte Carlo estimates report a standard error and a zero bound;
/// quadrature estimates report a discretisation bound and a zero standard
/// error.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct GammaEstimate {
    pub value: f64,
    pub stderr: f64,
    pub bound: f64,
    pub sample_count: usize,
    pub method: GammaMethod,
    pub resamples: usize,
    /// Largest `|φ([l(f; x)])|` seen.
    pub max_abs_integrand: f64,
    pub integrand_bound: f64,
}

impl GammaEstimate {
    /// Acceptance radius `max(3·stderr, bound)`.
    pub fn tolerance(&self) -> f64 {
        (3.0 * self.stderr).max(self.bound)
    }

    pub fn within_bound(&self) -> bool {
        self.max_abs_integrand <= self.integrand_bound * (1.0 + 1e-12)
    }
}

fn all_weights(problem: &GammaProblem, phis: &[CohomologyClass]) -> Result<Vec<Vec<f64>>> {
    phis.iter().map(|p| problem.system.crossing_weights(p)).collect()
}

/// `Γ(φ)(f)` as `area · mean φ([l(f; x)])` over uniform samples.
pub fn gamma_mc(problem: &GammaProblem, phi: &CohomologyClass, samples: usize, seed: u64) -> Result<GammaEstimate> {
    gamma_mc_multi(problem, std::slice::from_ref(phi), samples, seed).map(|mut v| v.remove(0))
}

/// Monte Carlo estimates for several classes from the same samples.
pub fn gamma_mc_multi(
    problem: &GammaProblem,
    phis: &[CohomologyClass],
    samples: usize,
    seed: u64,
) -> Result<Vec<GammaEstimate>> {
    problem.check()?;
    let weights = all_weights(problem, phis)?;
    let moments = integrate(samples, seed, phis.len(), |rng, out| {
        let x = problem.surface.sample_point(rng);
        let mut buf = Vec::with_capacity(16);
        problem.eval(x, &weights, &mut buf, out)
    })?;
    let area = problem.surface.area();
    phis.iter()
        .enumerate()
        .map(|(k, phi)| {
            Ok(GammaEstimate {
                value: area * moments.mean(k),
                stderr: area * moments.stderr(k),
                bound: 0.0,
                sample_count: samples,
                method: GammaMethod::Mc,
                resamples: moments.resamples,
                max_abs_integrand: moments.max_abs[k],
                integrand_bound: problem.integrand_bound(phi)?,
            })
        })
        .collect()
}

/// Offsets, as fractions of a cell, tried when a cell midpoint is degenerate.
const NUDGES: [(f64, f64); 8] = [
    (0.0113, 0.0071),
    (-0.0097, 0.0131),
    (0.0149, -0.0083),
    (-0.0127, -0.0109),
    (0.0211, 0.0037),
    (-0.0043, 0.0223),
    (0.0239, -0.0191),
    (-0.0251, -0.0173),
];

/// `Γ(φ)(f)` by the midpoint rule on a `grid × grid` subdivision of the
/// polygon's bounding box.
///
/// The reported bound is `area · TV / grid`, where the total variation `TV`
/// of the integrand is estimated from the jumps between neighbouring cells.
pub fn gamma_stratified(problem: &GammaProblem, phi: &CohomologyClass, grid: usize) -> Result<GammaEstimate> {
    gamma_stratified_multi(problem, std::slice::from_ref(phi), grid).map(|mut v| v.remove(0))
}

pub fn gamma_stratified_multi(
    problem: &GammaProblem,
    phis: &[CohomologyClass],
    grid: usize,
) -> Result<Vec<GammaEstimate>> {
    if grid < 16 {
        return Err(Error::InvalidArgument(format!("grid resolution {grid} is below 16")));
    }
    problem.check()?;
    let weights = all_weights(problem, phis)?;
    let surface = problem.surface;
    let (lo, hi) = surface.bounding_box();
    let cell = Vec2::new((hi.x - lo.x) / grid as f64, (hi.y - lo.y) / grid as f64);
    let dims = phis.len();

    // One row of cells per task: values (NaN outside) and nudge count.
    let rows: Vec<Result<(Vec<f64>, usize)>> = (0..grid)
        .into_par_iter()
        .map(|r| {
            let mut vals = vec![f64::NAN; grid * dims];
            let mut nudged = 0;
            let mut buf = Vec::with_capacity(16);
            let mut out = vec![0.0; dims];
            for c in 0..grid {
                let mid = Vec2::new(lo.x + (c as f64 + 0.5) * cell.x, lo.y + (r as f64 + 0.5) * cell.y);
                if !surface.contains_interior(mid) {
                    continue;
                }
                let mut attempt = 0;
                loop {
                    let p = if attempt == 0 {
                        mid
                    } else {
                        let (dx, dy) = NUDGES[attempt - 1];
                        mid + Vec2::new(dx * cell.x, dy * cell.y)
                    };
                    let res = if surface.near_cone_point(p) {
                        Err(Error::ConePointHit { x: p.x, y: p.y })
                    } else {
                        problem.eval(SurfacePoint { coords: p }, &weights, &mut buf, &mut out)
                    };
                    match res {
                        Ok(()) => break,
                        Err(e) if e.is_resampleable() && attempt < NUDGES.len() => {
                            attempt += 1;
                        }
                        Err(e) => return Err(e),
                    }
                }
                nudged += (attempt > 0) as usize;
                vals[c * dims..(c + 1) * dims].copy_from_slice(&out);
            }
            Ok((vals, nudged))
        })
        .collect();

    let mut field = Vec::with_capacity(grid);
    let mut nudged = 0;
    for row in rows {
        let (v, n) = row?;
        field.push(v);
        nudged += n;
    }
    let cells = field.iter().map(|row| row.iter().step_by(dims).filter(|v| !v.is_nan()).count()).sum::<usize>();
    if nudged as f64 > DEGENERACY_BUDGET * cells as f64 {
        return Err(Error::ExcessiveDegeneracy { resamples: nudged, samples: cells });
    }

    let cell_area = cell.x * cell.y;
    let mut out = Vec::with_capacity(dims);
    for (k, phi) in phis.iter().enumerate() {
        let at = |r: usize, c: usize| field[r][c * dims + k];
        let (mut sum, mut tv, mut max_abs) = (0.0, 0.0, 0.0f64);
        for r in 0..grid {
            for c in 0..grid {
                let v = at(r, c);
                if v.is_nan() {
                    continue;
                }
                sum += v;
                max_abs = max_abs.max(v.abs());
                if c + 1 < grid && !at(r, c + 1).is_nan() {
                    tv += (at(r, c + 1) - v).abs() * cell.y;
                }
                if r + 1 < grid && !at(r + 1, c).is_nan() {
                    tv += (at(r + 1, c) - v).abs() * cell.x;
                }
            }
        }
        out.push(GammaEstimate {
            value: sum * cell_area,
            stderr: 0.0,
            bound: surface.area() * tv / grid as f64,
            sample_count: cells,
            method: GammaMethod::Stratified,
            resamples: nudged,
            max_abs_integrand: max_abs,
            integrand_bound: problem.integrand_bound(phi)?,
        });
    }
    Ok(out)
}

/// `φ(PD(Flux(f)))`.
pub fn gamma_closed_form(phi: &CohomologyClass, word: &TwistWord, system: &CurveSystem) -> Result<f64> {
    let flux = flux_of_word(word, system)?;
    eval_phi(phi, &poincare_dual(&flux, system)?)
}

/// Numerical effort and acceptance settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default, deny_unknown_fields)]
pub struct Budget {
    pub samples: usize,
    pub grid: usize,
    pub seed: u64,
    pub mc: bool,
    pub stratified: bool,
    /// Multiplies every acceptance radius.
    pub tolerance_scale: f64,
}

impl Default for Budget {
    fn default() -> Self {
        Budget { samples: 1_000_000, grid: 1024, seed: 1, mc: true, stratified: true, tolerance_scale: 1.0 }
    }
}

/// One method's estimate against the closed form.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct MethodCheck {
    pub estimate: GammaEstimate,
    pub tolerance: f64,
    pub pass: bool,
}

impl MethodCheck {
    fn new(estimate: GammaEstimate, closed_form: f64, scale: f64) -> Self {
        let tolerance = scale * estimate.tolerance();
        let pass = (estimate.value - closed_form).abs() <= tolerance && estimate.within_bound();
        MethodCheck { estimate, tolerance, pass }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Theorem2Report {
    pub closed_form: f64,
    pub mc: Option<MethodCheck>,
    pub stratified: Option<MethodCheck>,
    pub pass: bool,
}

/// Compares the integral definition of `Γ(φ)(f)` with its closed form using
/// every method enabled in the budget.
pub fn verify_theorem2(problem: &GammaProblem, phi: &CohomologyClass, budget: &Budget) -> Result<Theorem2Report> {
    let closed_form = gamma_closed_form(phi, problem.word, problem.system)?;
    let mc = if budget.mc {
        let e = gamma_mc(problem, phi, budget.samples, budget.seed)?;
        Some(MethodCheck::new(e, closed_form, budget.tolerance_scale))
    } else {
        None
    };
    let stratified = if budget.stratified {
        let e = gamma_stratified(problem, phi, budget.grid)?;
        Some(MethodCheck::new(e, closed_form, budget.tolerance_scale))
    } else {
        None
    };
    let pass = (mc.is_some() || stratified.is_some())
        && mc.as_ref().is_none_or(|m| m.pass)
        && stratified.as_ref().is_none_or(|m| m.pass);
    Ok(Theorem2Report { closed_form, mc, stratified, pass })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct InjectivityReport {
    /// `matrix[i][j] = Γ(φ_i)(F_{ω_j})` in closed form, `φ_i` the dual basis.
    pub matrix: Vec<Vec<f64>>,
    pub determinant: f64,
    pub min_singular_value: f64,
    /// Largest absolute entry.
    pub scale: f64,
    /// Monte Carlo estimates, same layout as `matrix`.
    pub estimates: Vec<Vec<GammaEstimate>>,
    pub entries_confirmed: bool,
    pub pass: bool,
}

/// Evaluates the dual basis of `H¹` on one twist per basis cylinder and
/// checks that the resulting matrix is non-singular.
pub fn injectivity_witness(
    surface: &FlatSurface,
    system: &CurveSystem,
    profiles: &[TwistProfile],
    budget: &Budget,
) -> Result<InjectivityReport> {
    let n = system.dim();
    if profiles.len() != n {
        return Err(Error::ProfileCountMismatch { expected: n, got: profiles.len() });
    }
    let phis: Vec<CohomologyClass> = (0..n).map(|i| CohomologyClass::dual(n, i)).collect();
    let mut matrix = vec![vec![0.0; n]; n];
    let mut estimates: Vec<Vec<Option<GammaEstimate>>> = vec![vec![None; n]; n];
    let mut entries_confirmed = true;
    for (j, profile) in profiles.iter().enumerate() {
        let word = TwistWord::single(profile.clone(), 1.0);
        for (i, phi) in phis.iter().enumerate() {
            matrix[i][j] = gamma_closed_form(phi, &word, system)?;
        }
        let problem = GammaProblem::new(surface, system, &word);
        let col = gamma_mc_multi(&problem, &phis, budget.samples, budget.seed.wrapping_add(j as u64))?;
        for (i, e) in col.into_iter().enumerate() {
            let tol = budget.tolerance_scale * e.tolerance();
            entries_confirmed &= (e.value - matrix[i][j]).abs() <= tol && e.within_bound();
            estimates[i][j] = Some(e);
        }
    }
    let m = DMatrix::from_fn(n, n, |i, j| matrix[i][j]);
    let determinant = m.determinant();
    let min_singular_value = m.clone().singular_values().min();
    let scale = matrix.iter().flatten().fold(0.0f64, |a, v| a.max(v.abs()));
    let nonsingular = determinant.abs() > 1e-6 * scale.powi(n as i32) && scale > 0.0;
    Ok(InjectivityReport {
        matrix,
        determinant,
        min_singular_value,
        scale,
        estimates: estimates.into_iter().map(|r| r.into_iter().map(Option::unwrap).collect()).collect(),
        entries_confirmed,
        pass: nonsingular && entries_confirmed,
    })
}
