//! Reproducible random twist words and cohomology classes for randomized
//! checks.

use rand::Rng;

use crate::error::{Error, Result};
use crate::homology::CohomologyClass;
use crate::isotopy::{Cylinder, Letter, TwistWord};
use crate::profile::TwistProfile;

/// Smooth plateau with random support inside the cylinder and a random
/// height of magnitude in `[0.2, 1.5]`.
pub fn random_profile<R: Rng + ?Sized>(cylinder: &Cylinder, rng: &mut R) -> Result<TwistProfile> {
    let (z0, z1) = cylinder.transverse();
    let h = z1 - z0;
    let lo = z0 + h * rng.random_range(0.05..0.3);
    let hi = z1 - h * rng.random_range(0.05..0.3);
    let ramp = (hi - lo) * rng.random_range(0.1..0.45);
    let height = rng.random_range(0.2..1.5) * if rng.random::<bool>() { 1.0 } else { -1.0 };
    TwistProfile::smooth_plateau(cylinder.clone(), lo, hi, ramp, height)
}

/// Word of `1..=max_len` letters on uniformly chosen cylinders with scales
/// in `[-1.5, 1.5]`.
pub fn random_word<R: Rng + ?Sized>(cylinders: &[Cylinder], max_len: usize, rng: &mut R) -> Result<TwistWord> {
    if cylinders.is_empty() || max_len == 0 {
        return Err(Error::InvalidArgument("need at least one cylinder and one letter".into()));
    }
    let len = rng.random_range(1..=max_len);
    let letters = (0..len)
        .map(|_| {
            let cyl = &cylinders[rng.random_range(0..cylinders.len())];
            Ok(Letter::new(random_profile(cyl, rng)?, rng.random_range(-1.5..1.5)))
        })
        .collect::<Result<Vec<_>>>()?;
    TwistWord::new(letters)
}

/// Class with coefficients uniform in `[-1, 1]`.
pub fn random_phi<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CohomologyClass {
    CohomologyClass::new((0..dim).map(|_| rng.random_range(-1.0..=1.0)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::isotopy::standard_cylinders;
    use crate::surface::FlatSurface;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn reproducible_and_valid() {
        let cyl = standard_cylinders(&FlatSurface::genus2_l()).unwrap();
        let mut a = ChaCha8Rng::seed_from_u64(9);
        let mut b = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..50 {
            let wa = random_word(&cyl, 5, &mut a).unwrap();
            let wb = random_word(&cyl, 5, &mut b).unwrap();
            assert_eq!(wa, wb);
            assert!((1..=5).contains(&wa.len()));
            for l in wa.letters() {
                assert!(l.scale.abs() <= 1.5);
                assert!(l.profile.vanishes_near_boundary());
                let m = l.profile.max_abs();
                assert!((0.2..=1.5).contains(&m), "{m}");
            }
        }
        let phi = random_phi(4, &mut a);
        assert!(phi.coeffs.iter().all(|c| c.abs() <= 1.0));
    }
}
