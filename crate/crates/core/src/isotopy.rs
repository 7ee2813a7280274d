//! Cylinder twists, words in them, and their canonical isotopies.
//!
//! A letter `(ω, c)` acts on its cylinder by the shear
//! `(z, s) -> (z, s + c·ω(z))`, with `s` taken modulo the circumference, and is
//! the identity elsewhere. A word `[l_1, …, l_n]` is the composition
//! `l_1 ∘ … ∘ l_n`: the last letter acts first. Its canonical isotopy runs the
//! letters one after another in equal time slots, each as the linear shear
//! `(z, s + t·c·ω(z))`.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};
use crate::geom::{Piece, Vec2};
use crate::montecarlo::GridPartition;
use crate::profile::{ProfileSpec, TwistProfile};
use crate::surface::{FlatSurface, SurfacePoint, GENUS2_L, TORUS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    Horizontal,
    Vertical,
}

/// Serialized cylinder description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct CylinderSpec {
    pub id: String,
    pub axis: Axis,
    /// Transverse coordinate range `[z0, z1]` (y for horizontal cylinders).
    pub transverse: [f64; 2],
    /// Chart coordinate along the core where the cylinder's fundamental
    /// strip starts.
    pub origin: f64,
    pub circumference: f64,
    /// Basis curve that is the core of this cylinder.
    pub core: String,
}

/// An embedded flat cylinder, realised in the chart as the rectangle
/// `[origin, origin + circumference] × [z0, z1]` in `(s, z)` coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Cylinder {
    surface: String,
    spec: CylinderSpec,
}

impl Cylinder {
    /// Validates the rectangle against the surface: it must lie in the
    /// polygon and the straight flow along the axis must close up after one
    /// circumference.
    pub fn new(surface: &FlatSurface, spec: CylinderSpec) -> Result<Self> {
        let [z0, z1] = spec.transverse;
        if !(z1 > z0) || !(spec.circumference > 0.0) || !spec.origin.is_finite() {
            return Err(Error::InvalidArgument(format!("cylinder `{}` has an empty rectangle", spec.id)));
        }
        let cyl = Cylinder { surface: surface.name().to_string(), spec };
        let (s0, len) = (cyl.spec.origin, cyl.spec.circumference);
        for k in 1..8 {
            let z = z0 + (z1 - z0) * k as f64 / 8.0;
            for s in [s0, s0 + 0.5 * len, s0 + len] {
                if !surface.contains(cyl.point(z, s)) {
                    return Err(Error::InvalidArgument(format!(
                        "cylinder `{}` leaves the polygon at z = {z}",
                        cyl.id()
                    )));
                }
            }
            let start = surface.normalize(cyl.point(z, s0 + 0.37 * len))?;
            let seg = surface.unroll_segment(start, cyl.direction(), len)?;
            if seg.end.coords.dist(start.coords) > 1e-9 {
                return Err(Error::InvalidArgument(format!(
                    "cylinder `{}`: flow along the core does not close after one circumference",
                    cyl.id()
                )));
            }
        }
        Ok(cyl)
    }

    pub fn id(&self) -> &str {
        &self.spec.id
    }

    pub fn surface_name(&self) -> &str {
        &self.surface
    }

    pub fn spec(&self) -> &CylinderSpec {
        &self.spec
    }

    pub fn axis(&self) -> Axis {
        self.spec.axis
    }

    pub fn transverse(&self) -> (f64, f64) {
        (self.spec.transverse[0], self.spec.transverse[1])
    }

    pub fn height(&self) -> f64 {
        self.spec.transverse[1] - self.spec.transverse[0]
    }

    pub fn circumference(&self) -> f64 {
        self.spec.circumference
    }

    pub fn origin(&self) -> f64 {
        self.spec.origin
    }

    pub fn core(&self) -> &str {
        &self.spec.core
    }

    pub fn area(&self) -> f64 {
        self.height() * self.circumference()
    }

    /// Unit vector along the core, in the direction positive shears move.
    pub fn direction(&self) -> Vec2 {
        match self.spec.axis {
            Axis::Horizontal => Vec2::new(1.0, 0.0),
            Axis::Vertical => Vec2::new(0.0, 1.0),
        }
    }

    /// Chart point -> `(z, s)`.
    #[inline]
    pub fn coords(&self, p: Vec2) -> (f64, f64) {
        match self.spec.axis {
            Axis::Horizontal => (p.y, p.x),
            Axis::Vertical => (p.x, p.y),
        }
    }

    #[inline]
    pub fn point(&self, z: f64, s: f64) -> Vec2 {
        match self.spec.axis {
            Axis::Horizontal => Vec2::new(s, z),
            Axis::Vertical => Vec2::new(z, s),
        }
    }

    /// Whether a canonical chart point lies in the open cylinder.
    #[inline]
    pub fn contains(&self, p: Vec2) -> bool {
        let (z, s) = self.coords(p);
        let [z0, z1] = self.spec.transverse;
        let s0 = self.spec.origin;
        z > z0 && z < z1 && s >= s0 - 1e-10 && s <= s0 + self.spec.circumference + 1e-10
    }

    /// Whether the two open rectangles are disjoint (so twists on them commute).
    pub fn disjoint_from(&self, other: &Cylinder) -> bool {
        let rect = |c: &Cylinder| {
            let p = c.point(c.spec.transverse[0], c.spec.origin);
            let q = c.point(c.spec.transverse[1], c.spec.origin + c.spec.circumference);
            (p.x.min(q.x), p.x.max(q.x), p.y.min(q.y), p.y.max(q.y))
        };
        let (ax0, ax1, ay0, ay1) = rect(self);
        let (bx0, bx1, by0, by1) = rect(other);
        ax1 <= bx0 || bx1 <= ax0 || ay1 <= by0 || by1 <= ay0
    }
}

/// The maximal horizontal and vertical cylinders of a shipped surface, with
/// ids matching the standard curve system.
///
/// L-surface order: `h1` (bottom row), `h2` (top square), `v1` (left
/// column), `v2` (right square). Torus: `alpha` (horizontal), `beta`
/// (vertical).
pub fn standard_cylinders(surface: &FlatSurface) -> Result<Vec<Cylinder>> {
    let mk = |id: &str, axis, transverse: [f64; 2], origin, circumference| {
        Cylinder::new(
            surface,
            CylinderSpec { id: id.into(), axis, transverse, origin, circumference, core: id.into() },
        )
    };
    match surface.name() {
        GENUS2_L => Ok(vec![
            mk("h1", Axis::Horizontal, [0.0, 1.0], 0.0, 2.0)?,
            mk("h2", Axis::Horizontal, [1.0, 2.0], 0.0, 1.0)?,
            mk("v1", Axis::Vertical, [0.0, 1.0], 0.0, 2.0)?,
            mk("v2", Axis::Vertical, [1.0, 2.0], 0.0, 1.0)?,
        ]),
        TORUS => Ok(vec![
            mk("alpha", Axis::Horizontal, [0.0, 1.0], 0.0, 1.0)?,
            mk("beta", Axis::Vertical, [0.0, 1.0], 0.0, 1.0)?,
        ]),
        other => Err(Error::UnsupportedSurface(other.into())),
    }
}

/// One twist `F_{scale·ω}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Letter {
    pub profile: TwistProfile,
    pub scale: f64,
}

impl Letter {
    pub fn new(profile: TwistProfile, scale: f64) -> Self {
        Letter { profile, scale }
    }

    pub fn cylinder(&self) -> &Cylinder {
        self.profile.cylinder()
    }

    /// Signed shear displacement at a chart point, zero outside the cylinder.
    #[inline]
    pub fn displacement(&self, p: Vec2) -> f64 {
        let cyl = self.profile.cylinder();
        if !cyl.contains(p) {
            return 0.0;
        }
        let (z, _) = cyl.coords(p);
        self.scale * self.profile.eval(z)
    }

    /// Exact image of a chart point, as an unnormalized chart point inside
    /// the cylinder rectangle.
    #[inline]
    fn apply_raw(&self, p: Vec2) -> Vec2 {
        let cyl = self.profile.cylinder();
        if !cyl.contains(p) {
            return p;
        }
        let (z, s) = cyl.coords(p);
        let shift = self.scale * self.profile.eval(z);
        if shift == 0.0 {
            return p;
        }
        let s0 = cyl.origin();
        let s_new = s0 + (s - s0 + shift).rem_euclid(cyl.circumference());
        cyl.point(z, s_new)
    }

    /// Jacobian determinant of the shear at `p`, computed from the shear
    /// matrix `[[1, 0], [c ω'(z), 1]]` in `(z, s)` coordinates.
    pub fn jacobian_det(&self, p: Vec2) -> f64 {
        let cyl = self.profile.cylinder();
        let (z, _) = cyl.coords(p);
        let dz = if cyl.contains(p) { self.scale * self.profile.derivative(z) } else { 0.0 };
        let m = [[1.0, 0.0], [dz, 1.0]];
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct LetterSpec {
    pub profile: ProfileSpec,
    #[serde(default = "one")]
    pub scale: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct WordSpec {
    pub letters: Vec<LetterSpec>,
}

/// A finite composition of cylinder twists, in functional order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TwistWord {
    letters: Vec<Letter>,
}

impl TwistWord {
    pub fn new(letters: Vec<Letter>) -> Result<Self> {
        if let Some(first) = letters.first() {
            let name = first.cylinder().surface_name();
            if letters.iter().any(|l| l.cylinder().surface_name() != name) {
                return Err(Error::InvalidArgument("letters reference different surfaces".into()));
            }
        }
        if letters.iter().any(|l| !l.scale.is_finite()) {
            return Err(Error::InvalidArgument("letter scale must be finite".into()));
        }
        Ok(TwistWord { letters })
    }

    pub fn empty() -> Self {
        TwistWord::default()
    }

    pub fn single(profile: TwistProfile, scale: f64) -> Self {
        TwistWord { letters: vec![Letter::new(profile, scale)] }
    }

    pub fn from_spec(spec: &WordSpec, cylinders: &[Cylinder]) -> Result<Self> {
        let letters = spec
            .letters
            .iter()
            .map(|l| Ok(Letter::new(TwistProfile::from_spec(&l.profile, cylinders)?, l.scale)))
            .collect::<Result<Vec<_>>>()?;
        TwistWord::new(letters)
    }

    pub fn to_spec(&self) -> WordSpec {
        WordSpec {
            letters: self
                .letters
                .iter()
                .map(|l| LetterSpec { profile: l.profile.to_spec(), scale: l.scale })
                .collect(),
        }
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    /// Letters in the order they act.
    pub fn application_order(&self) -> impl Iterator<Item = &Letter> {
        self.letters.iter().rev()
    }

    /// Group inverse: letters reversed, scales negated.
    pub fn inverse(&self) -> Self {
        TwistWord {
            letters: self
                .letters
                .iter()
                .rev()
                .map(|l| Letter::new(l.profile.clone(), -l.scale))
                .collect(),
        }
    }

    /// The product `self · other` (`other` acts first).
    pub fn then(&self, other: &TwistWord) -> Self {
        let mut letters = self.letters.clone();
        letters.extend(other.letters.iter().cloned());
        TwistWord { letters }
    }

    /// Every letter's scale multiplied by `t`.
    pub fn scaled(&self, t: f64) -> Self {
        TwistWord {
            letters: self.letters.iter().map(|l| Letter::new(l.profile.clone(), l.scale * t)).collect(),
        }
    }

    /// Swaps letters `i` and `j`.
    pub fn transposed(&self, i: usize, j: usize) -> Self {
        let mut letters = self.letters.clone();
        letters.swap(i, j);
        TwistWord { letters }
    }

    /// Whether letters `i` and `j` live on disjoint cylinders.
    pub fn letters_commute(&self, i: usize, j: usize) -> bool {
        let (a, b) = (self.letters[i].cylinder(), self.letters[j].cylinder());
        a.disjoint_from(b)
    }

    fn check_surface(&self, surface: &FlatSurface) -> Result<()> {
        match self.letters.first() {
            Some(l) if l.cylinder().surface_name() != surface.name() => Err(Error::InvalidArgument(format!(
                "word lives on `{}`, not on `{}`",
                l.cylinder().surface_name(),
                surface.name()
            ))),
            _ => Ok(()),
        }
    }

    /// Image of `x` under the composed diffeomorphism.
    pub fn apply_point(&self, surface: &FlatSurface, x: SurfacePoint) -> Result<SurfacePoint> {
        self.check_surface(surface)?;
        if surface.near_cone_point(x.coords) {
            return Err(Error::ConePointHit { x: x.x(), y: x.y() });
        }
        let mut p = x;
        for letter in self.application_order() {
            p = surface.normalize(letter.apply_raw(p.coords))?;
        }
        Ok(p)
    }

    /// Track of `t -> f_t(x)` under the canonical isotopy.
    pub fn trajectory(&self, surface: &FlatSurface, x: SurfacePoint) -> Result<Trajectory> {
        self.trajectory_with(surface, x, Schedule::Linear)
    }

    /// Track of `x` under the isotopy with the given time schedule inside
    /// each slot.
    pub fn trajectory_with(&self, surface: &FlatSurface, x: SurfacePoint, schedule: Schedule) -> Result<Trajectory> {
        self.check_surface(surface)?;
        let mut pieces = Vec::new();
        let mut slots = Vec::with_capacity(self.letters.len());
        let end = self.trace_into(surface, x, schedule, &mut pieces, Some(&mut slots))?;
        Ok(Trajectory { start: x, end, pieces, slots })
    }

    /// Appends the trajectory pieces of `x` to `out`; returns the endpoint.
    pub(crate) fn trace_into(
        &self,
        surface: &FlatSurface,
        x: SurfacePoint,
        schedule: Schedule,
        out: &mut Vec<Piece>,
        mut slots: Option<&mut Vec<Slot>>,
    ) -> Result<SurfacePoint> {
        if surface.near_cone_point(x.coords) {
            return Err(Error::ConePointHit { x: x.x(), y: x.y() });
        }
        let mut p = x;
        for letter in self.application_order() {
            let first_piece = out.len();
            let disp = letter.displacement(p.coords);
            let dir = letter.cylinder().direction() * disp.signum();
            if disp != 0.0 {
                match schedule {
                    Schedule::Linear => {
                        let end = surface.unroll_into(p.coords, dir, disp.abs(), out)?;
                        p = surface.normalize(end)?;
                    }
                    Schedule::Smoothstep { steps } => {
                        let steps = steps.max(1);
                        let mut done = 0.0;
                        for k in 1..=steps {
                            let t = k as f64 / steps as f64;
                            let target = disp.abs() * smoothstep(t);
                            let end = surface.unroll_into(p.coords, dir, target - done, out)?;
                            p = surface.normalize(end)?;
                            done = target;
                        }
                    }
                }
            }
            if let Some(slots) = slots.as_deref_mut() {
                slots.push(Slot { pieces: first_piece..out.len(), displacement: disp, end: p });
            }
        }
        Ok(p)
    }
}

/// Time reparametrisation used inside each letter's slot.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Schedule {
    /// Constant speed; the canonical isotopy.
    #[default]
    Linear,
    /// Smoothstep `3t² - 2t³` progress, traced as `steps` sub-moves.
    Smoothstep { steps: usize },
}

impl Schedule {
    /// Fraction of the slot's displacement completed at local time `t`.
    pub fn progress(&self, t: f64) -> f64 {
        match self {
            Schedule::Linear => t,
            Schedule::Smoothstep { .. } => smoothstep(t),
        }
    }
}

fn smoothstep(t: f64) -> f64 {
    t * t * (3.0 - 2.0 * t)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Slot {
    pub pieces: std::ops::Range<usize>,
    pub displacement: f64,
    /// Point at the end of this slot.
    pub end: SurfacePoint,
}

/// Piecewise-linear track of one point under an isotopy.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub start: SurfacePoint,
    pub end: SurfacePoint,
    pub pieces: Vec<Piece>,
    /// One entry per letter, in application order.
    pub slots: Vec<Slot>,
}

impl Trajectory {
    pub fn track_length(&self) -> f64 {
        self.pieces.iter().map(Piece::length).sum()
    }

    pub fn is_constant(&self) -> bool {
        self.pieces.is_empty()
    }
}

/// Outcome of the analytic and statistical area-preservation checks.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct VolumeReport {
    /// Largest `|det J - 1|` seen over all letters and sample points.
    pub jacobian_max_deviation: f64,
    pub chi_square: f64,
    pub degrees_of_freedom: usize,
    /// Critical value at significance 0.001.
    pub threshold: f64,
    pub samples: usize,
    pub pass: bool,
}

/// Checks that a word preserves area: exactly through the shear Jacobians,
/// and statistically by a chi-square test of pushed-forward uniform samples
/// over a six-cell partition.
pub fn check_volume_preservation(
    surface: &FlatSurface,
    word: &TwistWord,
    sample_count: usize,
    seed: u64,
) -> Result<VolumeReport> {
    if sample_count == 0 {
        return Err(Error::InvalidArgument("sample count must be positive".into()));
    }
    let partition = GridPartition::six_cells(surface)?;
    let mut counts = vec![0u64; partition.len()];
    let mut jac_dev: f64 = 0.0;
    for x in surface.sample_area(sample_count, seed) {
        let mut p = x;
        for letter in word.application_order() {
            jac_dev = jac_dev.max((letter.jacobian_det(p.coords) - 1.0).abs());
            p = surface.normalize(letter.apply_raw(p.coords))?;
        }
        if let Some(c) = partition.cell_of(p.coords) {
            counts[c] += 1;
        }
    }
    let chi_square = partition.chi_square(&counts);
    let dof = partition.len() - 1;
    let threshold = chi_square_critical(dof, 0.001);
    Ok(VolumeReport {
        jacobian_max_deviation: jac_dev,
        chi_square,
        degrees_of_freedom: dof,
        threshold,
        samples: sample_count,
        pass: jac_dev == 0.0 && chi_square < threshold,
    })
}

/// Upper-tail critical value of the chi-square distribution.
pub fn chi_square_critical(dof: usize, significance: f64) -> f64 {
    ChiSquared::new(dof as f64).expect("positive dof").inverse_cdf(1.0 - significance)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup() -> (FlatSurface, Vec<Cylinder>) {
        let s = FlatSurface::genus2_l();
        let c = standard_cylinders(&s).unwrap();
        (s, c)
    }

    fn pt(s: &FlatSurface, x: f64, y: f64) -> SurfacePoint {
        s.normalize(Vec2::new(x, y)).unwrap()
    }

    #[test]
    fn cylinders_of_l_surface() {
        let (_, c) = setup();
        let ids: Vec<_> = c.iter().map(|c| c.id()).collect();
        assert_eq!(ids, ["h1", "h2", "v1", "v2"]);
        assert!(c[1].disjoint_from(&c[3]));
        assert!(!c[0].disjoint_from(&c[2]));
        assert!(!c[0].disjoint_from(&c[3]));
    }

    #[test]
    fn bad_cylinder_rejected() {
        let s = FlatSurface::genus2_l();
        let spec = CylinderSpec {
            id: "x".into(),
            axis: Axis::Horizontal,
            transverse: [0.0, 1.0],
            origin: 0.0,
            circumference: 1.5,
            core: "h1".into(),
        };
        assert!(Cylinder::new(&s, spec).is_err());
    }

    #[test]
    fn apply_outside_cylinder_is_identity() {
        let (s, c) = setup();
        let w = TwistWord::single(TwistProfile::tent(c[0].clone(), 0.25, 0.75, 1.0).unwrap(), 1.0);
        let x = pt(&s, 0.5, 1.5);
        assert_eq!(w.apply_point(&s, x).unwrap(), x);
        // Inside the cylinder but outside the support.
        let x = pt(&s, 0.5, 0.1);
        assert_eq!(w.apply_point(&s, x).unwrap(), x);
    }

    #[test]
    fn apply_single_letter_shears() {
        let (s, c) = setup();
        let prof = TwistProfile::tent(c[0].clone(), 0.25, 0.75, 1.0).unwrap();
        let w = TwistWord::single(prof.clone(), 1.0);
        let x = pt(&s, 1.7, 0.5);
        // ω(0.5) = 1: s = 1.7 + 1 = 2.7 ≡ 0.7 mod 2.
        let y = w.apply_point(&s, x).unwrap();
        assert!(y.coords.dist(Vec2::new(0.7, 0.5)) < 1e-15);
        let x = pt(&s, 0.2, 0.4);
        let y = w.apply_point(&s, x).unwrap();
        assert!((y.x() - (0.2 + prof.eval(0.4))).abs() < 1e-15);
        assert_eq!(y.y(), 0.4);
    }

    #[test]
    fn inverse_word_undoes() {
        let (s, c) = setup();
        let w = TwistWord::new(vec![
            Letter::new(TwistProfile::tent(c[0].clone(), 0.2, 0.8, 1.3).unwrap(), 1.0),
            Letter::new(TwistProfile::quadratic_bump(c[2].clone(), 0.1, 0.9, 2.5).unwrap(), -0.7),
            Letter::new(TwistProfile::tent(c[1].clone(), 1.3, 1.9, 0.6).unwrap(), 2.0),
        ])
        .unwrap();
        let inv = w.inverse();
        for x in s.sample_area(200, 11) {
            let y = inv.apply_point(&s, w.apply_point(&s, x).unwrap()).unwrap();
            assert!(y.coords.dist(x.coords) < 1e-12);
        }
    }

    #[test]
    fn trajectory_examples() {
        let (s, c) = setup();
        let prof = TwistProfile::smooth_plateau(c[0].clone(), 0.2, 0.8, 0.1, 3.2).unwrap();
        let w = TwistWord::single(prof, 1.0);
        let x = pt(&s, 0.3, 0.5);
        let tr = w.trajectory(&s, x).unwrap();
        assert!((tr.track_length() - 3.2).abs() < 1e-12);
        // 0.3 + 3.2 = 3.5: pieces 0.3→2 then 0→1.5.
        assert_eq!(tr.pieces.len(), 2);
        assert!(tr.end.coords.dist(Vec2::new(1.5, 0.5)) < 1e-12);

        let outside = pt(&s, 0.5, 1.5);
        assert!(w.trajectory(&s, outside).unwrap().is_constant());
        assert!(w.scaled(0.0).trajectory(&s, x).unwrap().is_constant());
    }

    #[test]
    fn trajectory_scaling_is_exact() {
        let (s, c) = setup();
        let prof = TwistProfile::tent(c[2].clone(), 0.2, 0.8, 1.7).unwrap();
        let x = pt(&s, 0.45, 1.2);
        let base = TwistWord::single(prof.clone(), 1.0).trajectory(&s, x).unwrap().track_length();
        for t in [-2.0, -1.0, 0.5, 3.0] {
            let len = TwistWord::single(prof.clone(), t).trajectory(&s, x).unwrap().track_length();
            assert!((len - t.abs() * base).abs() < 1e-12);
        }
    }

    #[test]
    fn smoothstep_schedule_traces_same_endpoint() {
        let (s, c) = setup();
        let w = TwistWord::new(vec![
            Letter::new(TwistProfile::tent(c[0].clone(), 0.2, 0.8, 2.3).unwrap(), 1.0),
            Letter::new(TwistProfile::tent(c[3].clone(), 1.2, 1.8, 0.9).unwrap(), -1.0),
        ])
        .unwrap();
        let x = pt(&s, 1.4, 0.6);
        let a = w.trajectory(&s, x).unwrap();
        let b = w.trajectory_with(&s, x, Schedule::Smoothstep { steps: 7 }).unwrap();
        assert!(a.end.coords.dist(b.end.coords) < 1e-12);
        assert!((a.track_length() - b.track_length()).abs() < 1e-12);
        assert!(b.pieces.len() > a.pieces.len());
    }

    #[test]
    fn volume_check_empty_and_single() {
        let (s, c) = setup();
        let r = check_volume_preservation(&s, &TwistWord::empty(), 1000, 1).unwrap();
        assert_eq!(r.jacobian_max_deviation, 0.0);
        let w = TwistWord::single(TwistProfile::tent(c[0].clone(), 0.2, 0.8, 1.0).unwrap(), 1.0);
        let r = check_volume_preservation(&s, &w, 1000, 1).unwrap();
        assert_eq!(r.jacobian_max_deviation, 0.0);
        assert_eq!(r.degrees_of_freedom, 5);
        assert!((r.threshold - 20.515).abs() < 1e-3);
    }

    #[test]
    fn word_spec_round_trip() {
        let (_, c) = setup();
        let w = TwistWord::new(vec![
            Letter::new(TwistProfile::tent(c[0].clone(), 0.2, 0.8, 2.3).unwrap(), 1.5),
            Letter::new(TwistProfile::tent(c[3].clone(), 1.2, 1.8, 0.9).unwrap(), -1.0),
        ])
        .unwrap();
        assert_eq!(TwistWord::from_spec(&w.to_spec(), &c).unwrap(), w);
    }
}
