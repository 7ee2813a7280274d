//! Piecewise-cubic twist profiles `ω(z)` on a cylinder's transverse interval.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::isotopy::Cylinder;

const CONTINUITY_TOL: f64 = 1e-12;

/// Serialized profile: breakpoints `z_0 < … < z_k` and, for each piece, the
/// coefficients `[c0, c1, c2, c3]` of `c0 + c1 u + c2 u² + c3 u³` in the local
/// variable `u = z - z_i`. The profile is zero outside `[z_0, z_k]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct ProfileSpec {
    pub cylinder: String,
    pub breakpoints: Vec<f64>,
    pub coeffs: Vec<[f64; 4]>,
}

/// Shear amount `ω(z)` of a cylinder twist, in units of length along the
/// core direction.
#[derive(Debug, Clone, PartialEq)]
pub struct TwistProfile {
    cylinder: Cylinder,
    breakpoints: Vec<f64>,
    coeffs: Vec<[f64; 4]>,
}

#[inline]
fn horner(c: &[f64; 4], u: f64) -> f64 {
    ((c[3] * u + c[2]) * u + c[1]) * u + c[0]
}

impl TwistProfile {
    /// Builds a profile, requiring continuity and support strictly inside
    /// the cylinder's transverse interval.
    pub fn new(cylinder: Cylinder, breakpoints: Vec<f64>, coeffs: Vec<[f64; 4]>) -> Result<Self> {
        let p = Self::unchecked(cylinder, breakpoints, coeffs)?;
        let (z0, z1) = p.cylinder.transverse();
        let (lo, hi) = p.support();
        if !(lo > z0 && hi < z1) {
            return Err(Error::InvalidProfile(format!(
                "support [{lo}, {hi}] must lie strictly inside the cylinder interval ({z0}, {z1})"
            )));
        }
        let scale = p.max_abs().max(1.0);
        let first = p.coeffs[0][0];
        let last = p.eval_piece(p.coeffs.len() - 1, hi);
        if first.abs() > CONTINUITY_TOL * scale || last.abs() > CONTINUITY_TOL * scale {
            return Err(Error::InvalidProfile(
                "profile must vanish at both ends of its support".into(),
            ));
        }
        Ok(p)
    }

    /// Shape checks only: no boundary condition.
    fn unchecked(cylinder: Cylinder, breakpoints: Vec<f64>, coeffs: Vec<[f64; 4]>) -> Result<Self> {
        if coeffs.is_empty() || breakpoints.len() != coeffs.len() + 1 {
            return Err(Error::InvalidProfile(format!(
                "{} breakpoints for {} pieces",
                breakpoints.len(),
                coeffs.len()
            )));
        }
        if breakpoints.iter().any(|b| !b.is_finite()) || coeffs.iter().flatten().any(|c| !c.is_finite()) {
            return Err(Error::InvalidProfile("non-finite breakpoint or coefficient".into()));
        }
        if breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidProfile("breakpoints must be strictly increasing".into()));
        }
        let p = TwistProfile { cylinder, breakpoints, coeffs };
        let scale = p.max_abs().max(1.0);
        for i in 1..p.coeffs.len() {
            let left = p.eval_piece(i - 1, p.breakpoints[i]);
            let right = p.coeffs[i][0];
            if (left - right).abs() > CONTINUITY_TOL * scale {
                return Err(Error::InvalidProfile(format!(
                    "discontinuity at z = {}: {left} vs {right}",
                    p.breakpoints[i]
                )));
            }
        }
        Ok(p)
    }

    pub fn from_spec(spec: &ProfileSpec, cylinders: &[Cylinder]) -> Result<Self> {
        let cyl = cylinders
            .iter()
            .find(|c| c.id() == spec.cylinder)
            .ok_or_else(|| Error::UnknownCurve(spec.cylinder.clone()))?;
        Self::new(cyl.clone(), spec.breakpoints.clone(), spec.coeffs.clone())
    }

    pub fn to_spec(&self) -> ProfileSpec {
        ProfileSpec {
            cylinder: self.cylinder.id().to_string(),
            breakpoints: self.breakpoints.clone(),
            coeffs: self.coeffs.clone(),
        }
    }

    /// Piecewise-linear tent of the given peak height over `[lo, hi]`.
    pub fn tent(cylinder: Cylinder, lo: f64, hi: f64, height: f64) -> Result<Self> {
        let mid = 0.5 * (lo + hi);
        let slope = height / (mid - lo);
        Self::new(cylinder, vec![lo, mid, hi], vec![[0.0, slope, 0.0, 0.0], [height, -slope, 0.0, 0.0]])
    }

    /// Parabola `height · 4t(1 - t)` with `t = (z - lo) / (hi - lo)`.
    pub fn quadratic_bump(cylinder: Cylinder, lo: f64, hi: f64, height: f64) -> Result<Self> {
        let w = hi - lo;
        Self::new(cylinder, vec![lo, hi], vec![[0.0, 4.0 * height / w, -4.0 * height / (w * w), 0.0]])
    }

    /// Plateau of the given height on `[lo + ramp, hi - ramp]` joined to zero
    /// by cubic smoothstep ramps, so the profile is C¹.
    pub fn smooth_plateau(cylinder: Cylinder, lo: f64, hi: f64, ramp: f64, height: f64) -> Result<Self> {
        if !(ramp > 0.0 && 2.0 * ramp <= hi - lo) {
            return Err(Error::InvalidProfile(format!(
                "ramp {ramp} does not fit twice in [{lo}, {hi}]"
            )));
        }
        let (r2, r3) = (ramp * ramp, ramp * ramp * ramp);
        let up = [0.0, 0.0, 3.0 * height / r2, -2.0 * height / r3];
        let down = [height, 0.0, -3.0 * height / r2, 2.0 * height / r3];
        let flat_lo = lo + ramp;
        let flat_hi = hi - ramp;
        if flat_hi - flat_lo > 0.0 {
            Self::new(
                cylinder,
                vec![lo, flat_lo, flat_hi, hi],
                vec![up, [height, 0.0, 0.0, 0.0], down],
            )
        } else {
            Self::new(cylinder, vec![lo, flat_lo, hi], vec![up, down])
        }
    }

    /// Smooth plateau occupying the middle 80% of the cylinder, scaled so
    /// that its transverse integral equals `integral`.
    pub fn with_integral(cylinder: Cylinder, integral: f64) -> Result<Self> {
        let (z0, z1) = cylinder.transverse();
        let h = z1 - z0;
        let (lo, hi, ramp) = (z0 + 0.1 * h, z1 - 0.1 * h, 0.1 * h);
        let height = integral / (hi - lo - ramp);
        Self::smooth_plateau(cylinder, lo, hi, ramp, height)
    }

    /// Constant shear over the whole transverse interval. This is not a
    /// valid compactly supported twist; it exists to probe loops in the
    /// diffeomorphism group.
    pub fn full_shear(cylinder: Cylinder, amount: f64) -> Self {
        let (z0, z1) = cylinder.transverse();
        Self::unchecked(cylinder, vec![z0, z1], vec![[amount, 0.0, 0.0, 0.0]])
            .expect("constant profile is well formed")
    }

    pub fn cylinder(&self) -> &Cylinder {
        &self.cylinder
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn coeffs(&self) -> &[[f64; 4]] {
        &self.coeffs
    }

    /// `[z_0, z_k]`; the profile vanishes outside it.
    pub fn support(&self) -> (f64, f64) {
        (self.breakpoints[0], *self.breakpoints.last().unwrap())
    }

    /// Whether the profile is zero on a neighbourhood of both boundary
    /// circles of its cylinder.
    pub fn vanishes_near_boundary(&self) -> bool {
        let (z0, z1) = self.cylinder.transverse();
        let (lo, hi) = self.support();
        let scale = self.max_abs().max(1.0);
        lo > z0
            && hi < z1
            && self.coeffs[0][0].abs() <= CONTINUITY_TOL * scale
            && self.eval_piece(self.coeffs.len() - 1, hi).abs() <= CONTINUITY_TOL * scale
    }

    #[inline]
    fn eval_piece(&self, i: usize, z: f64) -> f64 {
        horner(&self.coeffs[i], z - self.breakpoints[i])
    }

    fn piece_index(&self, z: f64) -> Option<usize> {
        let (lo, hi) = self.support();
        if z < lo || z > hi {
            return None;
        }
        // breakpoints[i] <= z, last such i, clamped to the final piece.
        let i = self.breakpoints.partition_point(|&b| b <= z);
        Some(i.saturating_sub(1).min(self.coeffs.len() - 1))
    }

    pub fn eval(&self, z: f64) -> f64 {
        match self.piece_index(z) {
            Some(i) => self.eval_piece(i, z),
            None => 0.0,
        }
    }

    pub fn derivative(&self, z: f64) -> f64 {
        match self.piece_index(z) {
            Some(i) => {
                let c = &self.coeffs[i];
                let u = z - self.breakpoints[i];
                (3.0 * c[3] * u + 2.0 * c[2]) * u + c[1]
            }
            None => 0.0,
        }
    }

    /// Exact `∫ ω(z) dz` over the transverse interval.
    pub fn integral(&self) -> f64 {
        self.coeffs
            .iter()
            .zip(self.breakpoints.windows(2))
            .map(|(c, w)| {
                let h = w[1] - w[0];
                h * (c[0] + h * (c[1] / 2.0 + h * (c[2] / 3.0 + h * c[3] / 4.0)))
            })
            .sum()
    }

    /// Exact `max |ω|`, from piece endpoints and interior critical points.
    pub fn max_abs(&self) -> f64 {
        let mut best: f64 = 0.0;
        for (c, w) in self.coeffs.iter().zip(self.breakpoints.windows(2)) {
            let h = w[1] - w[0];
            let mut consider = |u: f64| {
                if (0.0..=h).contains(&u) {
                    best = best.max(horner(c, u).abs());
                }
            };
            consider(0.0);
            consider(h);
            // Roots of c1 + 2 c2 u + 3 c3 u².
            let (a, b, cc) = (3.0 * c[3], 2.0 * c[2], c[1]);
            if a.abs() > 1e-300 {
                let disc = b * b - 4.0 * a * cc;
                if disc >= 0.0 {
                    let s = disc.sqrt();
                    consider((-b + s) / (2.0 * a));
                    consider((-b - s) / (2.0 * a));
                }
            } else if b.abs() > 1e-300 {
                consider(-cc / b);
            }
        }
        best
    }
}
