//! Homology basis curves, signed crossing counts and the intersection form.
//!
//! Homology classes are computed from crossings: a closed trace `γ` with
//! class `Σ_i a_i [c_i]` crosses basis curve `c_j` algebraically
//! `Σ_i a_i J[i][j]` times, where `J[i][j]` is the signed crossing number of
//! `c_i` against `c_j`. Solving `Jᵀ a = crossings` recovers the class.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{Piece, Vec2};
use crate::surface::{dist_to_piece, FlatSurface, GENUS2_L, TORUS};
use crate::{EPS_CONE, EPS_CROSS};

/// A closed oriented curve on the surface, stored as chart pieces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct BasisCurve {
    pub id: String,
    pub pieces: Vec<Piece>,
    /// `+1` to traverse the pieces as stored, `-1` to reverse.
    #[serde(default = "plus_one")]
    pub orientation: i8,
}

fn plus_one() -> i8 {
    1
}

impl BasisCurve {
    pub fn length(&self) -> f64 {
        self.pieces.iter().map(Piece::length).sum()
    }

    /// The curve's pieces in traversal order, as a trace.
    pub fn as_trace(&self) -> Vec<Piece> {
        if self.orientation >= 0 {
            self.pieces.clone()
        } else {
            self.pieces.iter().rev().map(Piece::reversed).collect()
        }
    }

    fn bbox(&self) -> (Vec2, Vec2) {
        let mut lo = Vec2::new(f64::INFINITY, f64::INFINITY);
        let mut hi = Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in &self.pieces {
            for v in [p.a, p.b] {
                lo = Vec2::new(lo.x.min(v.x), lo.y.min(v.y));
                hi = Vec2::new(hi.x.max(v.x), hi.y.max(v.y));
            }
        }
        (lo, hi)
    }
}

/// Signed crossing number of one trace piece against one curve piece.
///
/// Counts a proper crossing as `sign(det(trace direction, curve direction))`.
/// Meeting within `EPS_CROSS` of either piece's endpoints is degenerate.
#[inline]
fn piece_crossing(t: &Piece, c: &Piece) -> Result<i64> {
    let r = t.b - t.a;
    let s = c.b - c.a;
    let denom = r.cross(s);
    let (rl, sl) = (r.norm(), s.norm());
    if rl == 0.0 || sl == 0.0 {
        return Ok(0);
    }
    let qp = c.a - t.a;
    if denom.abs() <= 1e-14 * rl * sl {
        // Parallel: only an overlap is a problem.
        if qp.cross(r).abs() / rl < EPS_CROSS {
            let u0 = qp.dot(r) / (rl * rl);
            let u1 = (c.b - t.a).dot(r) / (rl * rl);
            let (lo, hi) = (u0.min(u1), u0.max(u1));
            if hi >= -EPS_CROSS / rl && lo <= 1.0 + EPS_CROSS / rl {
                return Err(Error::DegenerateCrossing { x: c.a.x, y: c.a.y });
            }
        }
        return Ok(0);
    }
    let tt = qp.cross(s) / denom;
    let uu = qp.cross(r) / denom;
    let (et, eu) = (EPS_CROSS / rl, EPS_CROSS / sl);
    if tt < -et || tt > 1.0 + et || uu < -eu || uu > 1.0 + eu {
        return Ok(0);
    }
    if tt <= et || tt >= 1.0 - et || uu <= eu || uu >= 1.0 - eu {
        let p = t.a + r * tt;
        return Err(Error::DegenerateCrossing { x: p.x, y: p.y });
    }
    Ok(if denom > 0.0 { 1 } else { -1 })
}

/// Algebraic number of crossings of `trace` with `curve`.
pub fn signed_crossings(trace: &[Piece], curve: &BasisCurve) -> Result<i64> {
    let (lo, hi) = curve.bbox();
    let mut total = 0;
    for t in trace {
        if t.a.x.max(t.b.x) < lo.x - EPS_CROSS
            || t.a.x.min(t.b.x) > hi.x + EPS_CROSS
            || t.a.y.max(t.b.y) < lo.y - EPS_CROSS
            || t.a.y.min(t.b.y) > hi.y + EPS_CROSS
        {
            continue;
        }
        for c in &curve.pieces {
            total += piece_crossing(t, c)?;
        }
    }
    Ok(total * curve.orientation.signum() as i64)
}

/// A homology basis of `2g` curves with its intersection form.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveSystem {
    curves: Vec<BasisCurve>,
    form: Vec<Vec<i64>>,
    /// `J⁻ᵀ`, mapping crossing vectors to class coordinates.
    inv_transpose: DMatrix<f64>,
    /// `J⁻¹`, mapping cohomology coefficients to crossing weights.
    inverse: DMatrix<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct CurveSystemSpec {
    pub curves: Vec<BasisCurve>,
}

impl CurveSystem {
    /// Computes the intersection form by crossing counts and checks it is
    /// antisymmetric and unimodular.
    pub fn new(surface: &FlatSurface, curves: Vec<BasisCurve>) -> Result<Self> {
        let n = curves.len();
        if n != 2 * surface.genus() {
            return Err(Error::InvalidCurveSystem(format!(
                "{n} curves for a genus-{} surface",
                surface.genus()
            )));
        }
        for c in &curves {
            validate_curve(surface, c)?;
        }
        let mut form = vec![vec![0i64; n]; n];
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    form[i][j] = signed_crossings(&curves[i].as_trace(), &curves[j])?;
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                if form[i][j] != -form[j][i] {
                    return Err(Error::InvalidCurveSystem("intersection form is not antisymmetric".into()));
                }
            }
        }
        let j = DMatrix::from_fn(n, n, |r, c| form[r][c] as f64);
        let det = j.determinant();
        if (det.abs() - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidCurveSystem(format!(
                "intersection form has determinant {det}; curves are not a basis"
            )));
        }
        let inverse = j.clone().try_inverse().ok_or(Error::SingularPairing)?;
        Ok(CurveSystem { curves, form, inv_transpose: inverse.transpose(), inverse })
    }

    pub fn from_spec(surface: &FlatSurface, spec: &CurveSystemSpec) -> Result<Self> {
        CurveSystem::new(surface, spec.curves.clone())
    }

    pub fn to_spec(&self) -> CurveSystemSpec {
        CurveSystemSpec { curves: self.curves.clone() }
    }

    pub fn curves(&self) -> &[BasisCurve] {
        &self.curves
    }

    pub fn dim(&self) -> usize {
        self.curves.len()
    }

    /// `J[i][j] = ι(c_i, c_j)`.
    pub fn intersection_form(&self) -> &[Vec<i64>] {
        &self.form
    }

    pub fn determinant(&self) -> f64 {
        let n = self.dim();
        DMatrix::from_fn(n, n, |r, c| self.form[r][c] as f64).determinant()
    }

    pub fn index_of(&self, id: &str) -> Result<usize> {
        self.curves
            .iter()
            .position(|c| c.id == id)
            .ok_or_else(|| Error::UnknownCurve(id.to_string()))
    }

    pub fn curve(&self, id: &str) -> Result<&BasisCurve> {
        Ok(&self.curves[self.index_of(id)?])
    }

    /// Crossing counts of a trace against every basis curve.
    pub fn crossing_vector(&self, trace: &[Piece], out: &mut [i64]) -> Result<()> {
        for (o, c) in out.iter_mut().zip(&self.curves) {
            *o = signed_crossings(trace, c)?;
        }
        Ok(())
    }

    /// Solves `Jᵀ x = rhs`.
    pub(crate) fn solve_transpose(&self, rhs: &[f64]) -> Vec<f64> {
        (&self.inv_transpose * DVector::from_column_slice(rhs)).as_slice().to_vec()
    }

    /// Weights `w = J⁻¹ φ`, so that `φ(class(γ)) = Σ_j w_j · crossings(γ, c_j)`.
    pub fn crossing_weights(&self, phi: &CohomologyClass) -> Result<Vec<f64>> {
        check_dim(self.dim(), phi.coeffs.len())?;
        Ok((&self.inverse * DVector::from_column_slice(&phi.coeffs)).as_slice().to_vec())
    }
}

fn validate_curve(surface: &FlatSurface, c: &BasisCurve) -> Result<()> {
    if c.pieces.is_empty() {
        return Err(Error::InvalidCurveSystem(format!("curve `{}` is empty", c.id)));
    }
    if c.orientation != 1 && c.orientation != -1 {
        return Err(Error::InvalidCurveSystem(format!("curve `{}` orientation must be ±1", c.id)));
    }
    let close = |a: Vec2, b: Vec2| -> Result<bool> {
        Ok(surface.normalize(a)?.coords.dist(surface.normalize(b)?.coords) < 1e-9)
    };
    let n = c.pieces.len();
    for k in 0..n {
        if !close(c.pieces[k].b, c.pieces[(k + 1) % n].a)? {
            return Err(Error::InvalidCurveSystem(format!("curve `{}` is not closed at piece {k}", c.id)));
        }
    }
    let base = surface.base_point().coords;
    for p in &c.pieces {
        if dist_to_piece(base, p.a, p.b) < EPS_CONE {
            return Err(Error::InvalidCurveSystem(format!("curve `{}` passes through the base point", c.id)));
        }
        for cone in surface.cone_points() {
            // Any chart copy of the cone point.
            for v in surface.polygon() {
                if surface.normalize(*v)?.coords == cone.position && dist_to_piece(*v, p.a, p.b) < EPS_CONE {
                    return Err(Error::InvalidCurveSystem(format!(
                        "curve `{}` passes through a cone point",
                        c.id
                    )));
                }
            }
        }
    }
    Ok(())
}

/// Transverse offset of the `k`-th standard curve from its cylinder's middle.
fn standard_offset(k: usize, attempt: usize) -> f64 {
    1.0 / 1024.0 + (k + 1 + 8 * attempt) as f64 * (2.0f64).powi(-20)
}

/// Core curves of the shipped surfaces' maximal cylinders.
///
/// L-surface: `h1`, `h2`, `v1`, `v2` with `ι(h_i, v_j) = 1` except
/// `ι(h2, v2) = 0`. Torus: `alpha`, `beta` with `ι(alpha, beta) = 1`.
pub fn standard_curves(surface: &FlatSurface) -> Result<CurveSystem> {
    // (id, start on the polygon boundary minus offset, direction, length)
    type Layout = (&'static str, f64, f64, bool, f64);
    let layout: Vec<Layout> = match surface.name() {
        // (id, transverse middle, boundary coordinate, horizontal?, length)
        GENUS2_L => vec![
            ("h1", 0.5, 0.0, true, 2.0),
            ("h2", 1.5, 0.0, true, 1.0),
            ("v1", 0.5, 0.0, false, 2.0),
            ("v2", 1.5, 0.0, false, 1.0),
        ],
        TORUS => vec![("alpha", 0.5, 0.0, true, 1.0), ("beta", 0.5, 0.0, false, 1.0)],
        other => return Err(Error::UnsupportedSurface(other.into())),
    };
    let mut last_err = Error::SingularPairing;
    for attempt in 0..16 {
        let mut curves = Vec::with_capacity(layout.len());
        for (k, &(id, mid, edge, horizontal, len)) in layout.iter().enumerate() {
            let z = mid + standard_offset(k, attempt);
            let (start, dir) = if horizontal {
                (Vec2::new(edge, z), Vec2::new(1.0, 0.0))
            } else {
                (Vec2::new(z, edge), Vec2::new(0.0, 1.0))
            };
            let seg = surface.unroll_segment(surface.normalize(start)?, dir, len)?;
            curves.push(BasisCurve { id: id.into(), pieces: seg.pieces, orientation: 1 });
        }
        match CurveSystem::new(surface, curves) {
            Ok(sys) => return Ok(sys),
            Err(e @ Error::DegenerateCrossing { .. }) => last_err = e,
            Err(e) => return Err(e),
        }
    }
    Err(last_err)
}

fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch { expected, got });
    }
    Ok(())
}

/// `φ ∈ H¹(M; ℝ)`, given by its values on the basis curves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CohomologyClass {
    pub coeffs: Vec<f64>,
}

impl CohomologyClass {
    pub fn new(coeffs: Vec<f64>) -> Self {
        CohomologyClass { coeffs }
    }

    pub fn zero(dim: usize) -> Self {
        CohomologyClass { coeffs: vec![0.0; dim] }
    }

    /// The class taking value 1 on basis curve `i` and 0 on the others.
    pub fn dual(dim: usize, i: usize) -> Self {
        let mut coeffs = vec![0.0; dim];
        coeffs[i] = 1.0;
        CohomologyClass { coeffs }
    }
}

/// An element of `H₁(M; ℝ)` in the basis-curve basis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct HomologyVector {
    pub comps: Vec<f64>,
}

impl HomologyVector {
    pub fn zero(dim: usize) -> Self {
        HomologyVector { comps: vec![0.0; dim] }
    }
}

/// Homology class of a closed trace.
pub fn loop_class(trace: &[Piece], system: &CurveSystem) -> Result<HomologyVector> {
    let mut c = vec![0i64; system.dim()];
    system.crossing_vector(trace, &mut c)?;
    let rhs: Vec<f64> = c.iter().map(|&v| v as f64).collect();
    Ok(HomologyVector { comps: system.solve_transpose(&rhs) })
}

/// `φ(class)`.
pub fn eval_phi(phi: &CohomologyClass, cls: &HomologyVector) -> Result<f64> {
    check_dim(phi.coeffs.len(), cls.comps.len())?;
    Ok(phi.coeffs.iter().zip(&cls.comps).map(|(a, b)| a * b).sum())
}

/// Poincaré dual of a class given by its periods: the homology vector `D`
/// with `ι(D, c_j) = periods[j]` for every basis curve.
pub fn poincare_dual(flux: &crate::flux::FluxClass, system: &CurveSystem) -> Result<HomologyVector> {
    check_dim(system.dim(), flux.periods.len())?;
    Ok(HomologyVector { comps: system.solve_transpose(&flux.periods) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flux::FluxClass;

    fn l_system() -> (FlatSurface, CurveSystem) {
        let s = FlatSurface::genus2_l();
        let sys = standard_curves(&s).unwrap();
        (s, sys)
    }

    /// Cofactor-expansion determinant, independent of the LU route.
    fn det_cofactor(m: &[Vec<i64>]) -> i64 {
        let n = m.len();
        if n == 1 {
            return m[0][0];
        }
        (0..n)
            .map(|c| {
                let minor: Vec<Vec<i64>> =
                    m[1..].iter().map(|row| (0..n).filter(|&k| k != c).map(|k| row[k]).collect()).collect();
                let sign = if c % 2 == 0 { 1 } else { -1 };
                sign * m[0][c] * det_cofactor(&minor)
            })
            .sum()
    }

    #[test]
    fn l_surface_form() {
        let (_, sys) = l_system();
        let j = sys.intersection_form();
        let expected = vec![vec![0, 0, 1, 1], vec![0, 0, 1, 0], vec![-1, -1, 0, 0], vec![-1, 0, 0, 0]];
        assert_eq!(j, expected.as_slice());
        assert_eq!(det_cofactor(j).abs(), 1);
        assert!((sys.determinant().abs() - 1.0).abs() < 1e-12);
        assert_eq!(j[1][3], 0);
    }

    #[test]
    fn torus_form() {
        let s = FlatSurface::torus();
        let sys = standard_curves(&s).unwrap();
        assert_eq!(sys.intersection_form(), &[vec![0, 1], vec![-1, 0]]);
    }

    #[test]
    fn crossing_examples() {
        let (s, sys) = l_system();
        let h1 = sys.curve("h1").unwrap();
        let v1 = sys.curve("v1").unwrap();
        // A short trace in the top square misses h1.
        let trace = [Piece::new(Vec2::new(0.2, 1.2), Vec2::new(0.8, 1.7))];
        assert_eq!(signed_crossings(&trace, h1).unwrap(), 0);
        assert_eq!(signed_crossings(&v1.as_trace(), h1).unwrap(), -1);
        // Twice around the bottom cylinder.
        let start = s.normalize(Vec2::new(0.1, 0.3)).unwrap();
        let twice = s.unroll_segment(start, Vec2::new(1.0, 0.0), 4.0).unwrap();
        assert_eq!(signed_crossings(&twice.pieces, v1).unwrap(), 2);
    }

    #[test]
    fn degenerate_vertex_on_curve() {
        let (_, sys) = l_system();
        let h1 = sys.curve("h1").unwrap();
        let y = h1.pieces[0].a.y;
        let trace = [Piece::new(Vec2::new(0.3, 0.2), Vec2::new(0.3, y))];
        assert!(matches!(signed_crossings(&trace, h1), Err(Error::DegenerateCrossing { .. })));
        let overlap = [Piece::new(Vec2::new(0.3, y), Vec2::new(0.9, y))];
        assert!(matches!(signed_crossings(&overlap, h1), Err(Error::DegenerateCrossing { .. })));
    }

    #[test]
    fn loop_class_examples() {
        let (_, sys) = l_system();
        assert_eq!(loop_class(&[], &sys).unwrap(), HomologyVector::zero(4));
        // A curve overlaps itself, so use pushed-off copies.
        let push = |id: &str, d: Vec2| -> Vec<Piece> {
            sys.curve(id).unwrap().as_trace().iter().map(|p| Piece::new(p.a + d, p.b + d)).collect()
        };
        let h1 = loop_class(&push("h1", Vec2::new(0.0, 0.01)), &sys).unwrap();
        for (k, v) in h1.comps.iter().enumerate() {
            assert!((v - if k == 0 { 1.0 } else { 0.0 }).abs() < 1e-12);
        }
        // Concatenation adds classes.
        let mut both = push("h1", Vec2::new(0.0, 0.01));
        both.extend(push("v2", Vec2::new(0.01, 0.0)));
        let c = loop_class(&both, &sys).unwrap();
        assert!((c.comps[0] - 1.0).abs() < 1e-12 && (c.comps[3] - 1.0).abs() < 1e-12);
        // Reversal negates.
        let rev: Vec<Piece> = both.iter().rev().map(Piece::reversed).collect();
        let r = loop_class(&rev, &sys).unwrap();
        for (a, b) in c.comps.iter().zip(&r.comps) {
            assert!((a + b).abs() < 1e-12);
        }
    }

    #[test]
    fn eval_phi_examples() {
        let cls = HomologyVector { comps: vec![1.0, 1.0, 0.0, 0.0] };
        assert_eq!(eval_phi(&CohomologyClass::zero(4), &cls).unwrap(), 0.0);
        let e = HomologyVector { comps: vec![1.0, 0.0, 0.0, 0.0] };
        assert_eq!(eval_phi(&CohomologyClass::dual(4, 0), &e).unwrap(), 1.0);
        assert_eq!(eval_phi(&CohomologyClass::new(vec![2.0, -1.0, 0.0, 0.0]), &cls).unwrap(), 1.0);
        assert!(matches!(
            eval_phi(&CohomologyClass::zero(2), &cls),
            Err(Error::DimensionMismatch { expected: 2, got: 4 })
        ));
    }

    #[test]
    fn poincare_dual_examples() {
        let (_, sys) = l_system();
        let zero = poincare_dual(&FluxClass::zero(4), &sys).unwrap();
        assert_eq!(zero, HomologyVector::zero(4));
        // An h1 twist of total integral A has periods A·J[h1][·].
        let a = 0.37;
        let periods: Vec<f64> = sys.intersection_form()[0].iter().map(|&v| a * v as f64).collect();
        let d = poincare_dual(&FluxClass { periods }, &sys).unwrap();
        assert!((d.comps[0] - a).abs() < 1e-12);
        assert!(d.comps[1..].iter().all(|v| v.abs() < 1e-12));
        // Linearity.
        let f1 = FluxClass { periods: vec![0.3, -1.0, 2.0, 0.5] };
        let f2 = FluxClass { periods: vec![1.0, 0.25, -0.5, 0.0] };
        let combo = FluxClass { periods: (0..4).map(|k| 2.0 * f1.periods[k] - 3.0 * f2.periods[k]).collect() };
        let (d1, d2, dc) =
            (poincare_dual(&f1, &sys).unwrap(), poincare_dual(&f2, &sys).unwrap(), poincare_dual(&combo, &sys).unwrap());
        for k in 0..4 {
            assert!((dc.comps[k] - (2.0 * d1.comps[k] - 3.0 * d2.comps[k])).abs() < 1e-12);
        }
    }

    #[test]
    fn curves_are_closed_and_validated() {
        let (s, sys) = l_system();
        let mut bad = sys.curves().to_vec();
        bad[0].pieces.pop();
        assert!(CurveSystem::new(&s, bad).is_err());
        let spec = sys.to_spec();
        assert_eq!(CurveSystem::from_spec(&s, &spec).unwrap(), sys);
        assert!(CurveSystem::new(&s, sys.curves()[..2].to_vec()).is_err());
    }
}
