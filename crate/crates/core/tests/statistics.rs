use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use volflux_core::flux::flux_oracle_curves;
use volflux_core::random::random_word;
use volflux_core::{
    check_volume_preservation, flux_of_word, standard_curves, standard_cylinders, FlatSurface, Schedule,
    TwistProfile, TwistWord,
};

#[test]
fn area_samples_are_uniform() {
    let s = FlatSurface::genus2_l();
    let n = 300_000;
    let pts = s.sample_area(n, 42);
    let (mut mx, mut my) = (0.0, 0.0);
    let mut squares = [0usize; 3];
    for p in &pts {
        mx += p.x();
        my += p.y();
        let k = match (p.x() < 1.0, p.y() < 1.0) {
            (true, true) => 0,
            (false, true) => 1,
            _ => 2,
        };
        squares[k] += 1;
    }
    // Centroid of the three unit squares is (5/6, 5/6); per-coordinate
    // variance is 11/36.
    let se = (11.0f64 / 36.0 / n as f64).sqrt();
    assert!((mx / n as f64 - 5.0 / 6.0).abs() < 4.0 * se);
    assert!((my / n as f64 - 5.0 / 6.0).abs() < 4.0 * se);
    let fse = (2.0f64 / 9.0 / n as f64).sqrt();
    for c in squares {
        assert!((c as f64 / n as f64 - 1.0 / 3.0).abs() < 4.0 * fse);
    }
}

#[test]
fn random_words_preserve_area() {
    for s in [FlatSurface::genus2_l(), FlatSurface::torus()] {
        let cyl = standard_cylinders(&s).unwrap();
        let w = random_word(&cyl, 5, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        let r = check_volume_preservation(&s, &w, 1_000_000, 17).unwrap();
        assert!(r.pass, "{}: {r:?}", s.name());
        assert_eq!(r.degrees_of_freedom, 5);
        assert!((r.threshold - 20.515).abs() < 1e-3);
    }
}

#[test]
fn oracle_does_not_depend_on_schedule() {
    let s = FlatSurface::genus2_l();
    let sys = standard_curves(&s).unwrap();
    let cyl = standard_cylinders(&s).unwrap();
    let w = TwistWord::single(TwistProfile::with_integral(cyl[2].clone(), 1.0).unwrap(), 1.3);
    let closed = flux_of_word(&w, &sys).unwrap();
    let est = flux_oracle_curves(&s, &w, sys.curves(), 200_000, 9, Schedule::Smoothstep { steps: 5 }).unwrap();
    for (e, cf) in est.iter().zip(&closed.periods) {
        assert!((e.value - cf).abs() <= 3.0 * e.sigma, "{e:?} vs {cf}");
    }
}
