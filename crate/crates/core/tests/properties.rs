use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use volflux_core::gamma::build_loop;
use volflux_core::random::{random_phi, random_word};
use volflux_core::{
    flux_of_word, gamma_closed_form, loop_class, signed_crossings, standard_curves, standard_cylinders, BasisCurve,
    Error, FlatSurface, PathSystem, Piece, SurfacePoint, TwistWord, Vec2,
};

fn surface(torus: bool) -> FlatSurface {
    if torus {
        FlatSurface::torus()
    } else {
        FlatSurface::genus2_l()
    }
}

fn point(s: &FlatSurface, seed: u64) -> SurfacePoint {
    s.sample_point(&mut ChaCha8Rng::seed_from_u64(seed))
}

fn word(s: &FlatSurface, seed: u64, max_len: usize) -> TwistWord {
    let cyl = standard_cylinders(s).unwrap();
    random_word(&cyl, max_len, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap()
}

fn dir(theta: f64) -> Vec2 {
    Vec2::new(theta.cos(), theta.sin())
}

fn segment(s: &FlatSurface, seed: u64, theta: f64, len: f64) -> Option<Vec<Piece>> {
    s.unroll_segment(point(s, seed), dir(theta), len).ok().map(|seg| seg.pieces)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn normalize_is_idempotent(torus: bool, seed: u64, theta in 0.0..6.3f64, len in 0.0..5.0f64) {
        let s = surface(torus);
        let seg = s.unroll_segment(point(&s, seed), dir(theta), len);
        prop_assume!(seg.is_ok());
        let end = seg.unwrap().end;
        prop_assert_eq!(s.normalize(end.coords).unwrap(), end);
    }

    #[test]
    fn unrolling_is_additive(torus: bool, seed: u64, theta in 0.0..6.3f64, a in 0.01..3.0f64, b in 0.01..3.0f64) {
        let s = surface(torus);
        let x = point(&s, seed);
        let whole = s.unroll_segment(x, dir(theta), a + b);
        let first = s.unroll_segment(x, dir(theta), a);
        prop_assume!(whole.is_ok() && first.is_ok());
        let second = s.unroll_segment(first.unwrap().end, dir(theta), b);
        prop_assume!(second.is_ok());
        let (p, q) = (whole.unwrap().end.coords, second.unwrap().end.coords);
        prop_assert!(p.dist(q) < 1e-9, "{:?} vs {:?}", p, q);
    }

    #[test]
    fn unrolling_reverses(torus: bool, seed: u64, theta in 0.0..6.3f64, len in 0.01..4.0f64) {
        let s = surface(torus);
        let x = point(&s, seed);
        let fwd = s.unroll_segment(x, dir(theta), len);
        prop_assume!(fwd.is_ok());
        let fwd = fwd.unwrap();
        let back = s.unroll_segment(fwd.end, dir(theta) * -1.0, len);
        prop_assume!(back.is_ok());
        let back = back.unwrap();
        prop_assert!(back.end.coords.dist(x.coords) < 1e-9);
        prop_assert!((back.length() - fwd.length()).abs() < 1e-9);
    }

    #[test]
    fn crossings_are_antisymmetric(torus: bool, s1: u64, s2: u64, t1 in 0.0..6.3f64, t2 in 0.0..6.3f64,
                                   l1 in 0.1..4.0f64, l2 in 0.1..4.0f64) {
        let s = surface(torus);
        let (a, b) = (segment(&s, s1, t1, l1), segment(&s, s2, t2, l2));
        prop_assume!(a.is_some() && b.is_some());
        let (a, b) = (a.unwrap(), b.unwrap());
        let ca = BasisCurve { id: "a".into(), pieces: a.clone(), orientation: 1 };
        let cb = BasisCurve { id: "b".into(), pieces: b.clone(), orientation: 1 };
        match (signed_crossings(&a, &cb), signed_crossings(&b, &ca)) {
            (Ok(x), Ok(y)) => prop_assert_eq!(x, -y),
            (Err(e), _) | (_, Err(e)) => prop_assert!(e.is_resampleable()),
        }
    }

    #[test]
    fn crossings_survive_small_perturbation(torus: bool, seed: u64, theta in 0.0..6.3f64, len in 0.1..5.0f64,
                                            dx in -1e-9..1e-9f64, dy in -1e-9..1e-9f64) {
        let s = surface(torus);
        let sys = standard_curves(&s).unwrap();
        let x = point(&s, seed);
        let y = SurfacePoint { coords: x.coords + Vec2::new(dx, dy) };
        prop_assume!(s.contains_interior(y.coords));
        let (a, b) = (s.unroll_segment(x, dir(theta), len), s.unroll_segment(y, dir(theta), len));
        prop_assume!(a.is_ok() && b.is_ok());
        let (a, b) = (a.unwrap(), b.unwrap());
        for c in sys.curves() {
            match (signed_crossings(&a.pieces, c), signed_crossings(&b.pieces, c)) {
                (Ok(u), Ok(v)) => prop_assert_eq!(u, v),
                (Err(e), _) | (_, Err(e)) => prop_assert!(e.is_resampleable()),
            }
        }
    }

    #[test]
    fn inverse_word_undoes(torus: bool, ws: u64, xs: u64) {
        let s = surface(torus);
        let w = word(&s, ws, 5);
        let x = point(&s, xs);
        let y = w.apply_point(&s, x).unwrap();
        let z = w.inverse().apply_point(&s, y).unwrap();
        prop_assert!(z.coords.dist(x.coords) < 1e-9, "{:?} -> {:?}", x, z);
    }

    #[test]
    fn trajectory_ends_at_image(torus: bool, ws: u64, xs: u64) {
        let s = surface(torus);
        let w = word(&s, ws, 5);
        let x = point(&s, xs);
        match w.trajectory(&s, x) {
            Ok(t) => {
                let y = w.apply_point(&s, x).unwrap();
                prop_assert!(t.end.coords.dist(y.coords) < 1e-9);
            }
            Err(e) => prop_assert!(matches!(e, Error::ConePointHit { .. }), "{e:?}"),
        }
    }

    #[test]
    fn commuting_letters_commute(ws: u64, xs: u64) {
        let s = FlatSurface::genus2_l();
        let w = word(&s, ws, 5);
        let x = point(&s, xs);
        let a = w.apply_point(&s, x).unwrap();
        for i in 1..w.len() {
            if w.letters_commute(i - 1, i) {
                let b = w.transposed(i - 1, i).apply_point(&s, x).unwrap();
                prop_assert!(a.coords.dist(b.coords) < 1e-12);
            }
        }
    }

    #[test]
    fn loops_have_integral_classes(torus: bool, ws: u64, xs: u64, waypoint: bool) {
        let s = surface(torus);
        let sys = standard_curves(&s).unwrap();
        let w = word(&s, ws, 4);
        let paths = if waypoint {
            PathSystem::Waypoint { waypoint: s.base_point().coords + Vec2::new(-0.2, 0.15) }
        } else {
            PathSystem::Straight
        };
        let l = build_loop(&s, &w, point(&s, xs), paths);
        prop_assume!(l.is_ok());
        let l = l.unwrap();
        prop_assert_eq!(l.first().unwrap().a, s.base_point().coords);
        prop_assert_eq!(l.last().unwrap().b, s.base_point().coords);
        match loop_class(&l, &sys) {
            Ok(c) => {
                for v in c.comps {
                    prop_assert!((v - v.round()).abs() < 1e-9);
                }
            }
            Err(e) => prop_assert!(e.is_resampleable()),
        }
    }

    #[test]
    fn flux_and_gamma_are_additive_and_homogeneous(w1s: u64, w2s: u64, ps: u64, t in -3.0..3.0f64) {
        let s = FlatSurface::genus2_l();
        let sys = standard_curves(&s).unwrap();
        let (w1, w2) = (word(&s, w1s, 5), word(&s, w2s, 5));
        let phi = random_phi(4, &mut ChaCha8Rng::seed_from_u64(ps));
        let f12 = flux_of_word(&w1.then(&w2), &sys).unwrap();
        let (f1, f2) = (flux_of_word(&w1, &sys).unwrap(), flux_of_word(&w2, &sys).unwrap());
        for k in 0..4 {
            prop_assert!((f12.periods[k] - f1.periods[k] - f2.periods[k]).abs() < 1e-12);
        }
        let g = gamma_closed_form(&phi, &w1, &sys).unwrap();
        let gt = gamma_closed_form(&phi, &w1.scaled(t), &sys).unwrap();
        prop_assert!((gt - t * g).abs() <= 1e-12 * (t * g).abs().max(1e-300));
        let ginv = gamma_closed_form(&phi, &w1.inverse(), &sys).unwrap();
        prop_assert!((ginv + g).abs() < 1e-12);
    }
}
