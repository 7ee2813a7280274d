//! Execution of the verification suites.

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use volflux_core::flux::flux_oracle_curves;
use volflux_core::gamma::MethodCheck;
use volflux_core::invariants::{run_invariants, InvariantConfig};
use volflux_core::random::{random_phi, random_word};
use volflux_core::{
    flux_of_word, injectivity_witness, standard_cylinders, verify_theorem2, CohomologyClass, GammaProblem, Result,
    Schedule, TwistWord,
};

use crate::report::{CheckRow, FluxRow, GammaRow, SuiteReport, Timing, SCHEMA_VERSION};
use crate::scenario::{Prepared, Suite};

#[derive(Debug, Default)]
struct Output {
    checks: Vec<CheckRow>,
    gamma: Vec<GammaRow>,
    flux: Vec<FluxRow>,
    demos: Vec<volflux_core::FluxLoopReport>,
}

impl Output {
    fn check(&mut self, suite: Suite, name: impl Into<String>, expected: f64, observed: f64, tolerance: f64) {
        let pass = (observed - expected).abs() <= tolerance;
        self.push(suite, name, expected, observed, tolerance, pass);
    }

    fn push(&mut self, suite: Suite, name: impl Into<String>, expected: f64, observed: f64, tolerance: f64, pass: bool) {
        self.checks.push(CheckRow { suite: suite.name().into(), name: name.into(), expected, observed, tolerance, pass });
    }

    fn method(&mut self, suite: Suite, case: &str, phi_id: &str, word_id: &str, closed_form: f64, m: &MethodCheck) {
        let e = &m.estimate;
        self.gamma.push(GammaRow {
            phi_id: phi_id.into(),
            word_id: word_id.into(),
            method: e.method.to_string(),
            value: e.value,
            stderr_or_bound: e.stderr.max(e.bound),
            samples: e.sample_count,
            closed_form,
            pass: m.pass,
        });
        self.push(suite, format!("{case}/{}", e.method), closed_form, e.value, m.tolerance, m.pass);
    }
}

/// Runs the selected suites in parallel and assembles the report in suite
/// order.
pub fn run(p: &Prepared) -> SuiteReport {
    let outputs: Vec<(Output, f64)> = p
        .suites
        .par_iter()
        .map(|&s| {
            let t = Instant::now();
            let out = run_suite(p, s).unwrap_or_else(|e| {
                let mut o = Output::default();
                o.push(s, format!("error: {e}"), f64::NAN, f64::NAN, f64::NAN, false);
                o
            });
            (out, t.elapsed().as_secs_f64())
        })
        .collect();
    let mut report = SuiteReport {
        schema_version: SCHEMA_VERSION,
        version: volflux_core::VERSION.into(),
        seed: p.budget.seed,
        surface: p.surface.name().into(),
        suites: p.suites.iter().map(|s| s.name().to_string()).collect(),
        aggregate_pass: true,
        checks: Vec::new(),
        gamma: Vec::new(),
        flux: Vec::new(),
        flux_loop_demo: Vec::new(),
        timings: Vec::new(),
    };
    for (&s, (o, secs)) in p.suites.iter().zip(outputs) {
        report.checks.extend(o.checks);
        report.gamma.extend(o.gamma);
        report.flux.extend(o.flux);
        report.flux_loop_demo.extend(o.demos);
        report.timings.push(Timing { suite: s.name().into(), seconds: secs });
    }
    report.aggregate_pass = !report.checks.is_empty() && report.checks.iter().all(|c| c.pass);
    report
}

fn run_suite(p: &Prepared, suite: Suite) -> Result<Output> {
    match suite {
        Suite::Lemma3 => lemma3(p),
        Suite::Theorem2 => theorem2(p),
        Suite::Injectivity => injectivity(p),
        Suite::FluxOracle => flux_oracle(p),
        Suite::FluxLoopDemo => flux_loop_demo(p),
        Suite::Invariants => invariants(p),
    }
}

fn lemma3(p: &Prepared) -> Result<Output> {
    let mut o = Output::default();
    let case = p.lemma3.as_ref().expect("prepared with lemma3 selected");
    let prob = GammaProblem::new(&p.surface, &p.system, &case.word);
    let r = verify_theorem2(&prob, &case.phi, &p.budget)?;
    o.check(Suite::Lemma3, "closed-form", case.expected, r.closed_form, 1e-12 * case.expected.abs().max(1.0));
    for m in [&r.mc, &r.stratified].into_iter().flatten() {
        o.method(Suite::Lemma3, &case.word_id, &case.phi_id, &case.word_id, case.expected, m);
    }
    Ok(o)
}

fn theorem2(p: &Prepared) -> Result<Output> {
    let mut o = Output::default();
    let cfg = &p.theorem2;
    let mut cases: Vec<(String, CohomologyClass, String, TwistWord)> = cfg
        .cases
        .iter()
        .map(|c| (c.phi.clone(), p.phi(&c.phi).clone(), c.word.clone(), p.word(&c.word).clone()))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.random_seed);
    for k in 0..cfg.random_cases {
        let w = random_word(&p.cylinders, cfg.max_length, &mut rng)?;
        let phi = random_phi(p.system.dim(), &mut rng);
        cases.push((format!("random-phi-{k}"), phi, format!("random-word-{k}"), w));
    }
    for (k, (phi_id, phi, word_id, word)) in cases.iter().enumerate() {
        let budget = volflux_core::Budget { seed: p.budget.seed.wrapping_add(k as u64 + 1), ..p.budget };
        let prob = GammaProblem::new(&p.surface, &p.system, word);
        let r = verify_theorem2(&prob, phi, &budget)?;
        let case = format!("{phi_id}:{word_id}");
        for m in [&r.mc, &r.stratified].into_iter().flatten() {
            o.method(Suite::Theorem2, &case, phi_id, word_id, r.closed_form, m);
        }
    }
    Ok(o)
}

fn injectivity(p: &Prepared) -> Result<Output> {
    let mut o = Output::default();
    let profiles = p.injectivity.as_ref().expect("prepared with injectivity selected");
    let r = injectivity_witness(&p.surface, &p.system, profiles, &p.budget)?;
    let n = p.system.dim();
    let threshold = 1e-6 * r.scale.powi(n as i32);
    let det_ok = r.determinant.abs() > threshold && r.scale > 0.0;
    o.push(Suite::Injectivity, "determinant", threshold, r.determinant.abs(), 0.0, det_ok);
    o.push(Suite::Injectivity, "min-singular-value", 0.0, r.min_singular_value, 0.0, r.min_singular_value > 0.0);
    for (i, row) in r.estimates.iter().enumerate() {
        for (j, e) in row.iter().enumerate() {
            let phi_id = format!("dual-{}", p.system.curves()[i].id);
            let word_id = format!("profile-{j}-{}", profiles[j].cylinder().id());
            let tol = p.budget.tolerance_scale * e.tolerance();
            let pass = (e.value - r.matrix[i][j]).abs() <= tol && e.within_bound();
            let m = MethodCheck { estimate: e.clone(), tolerance: tol, pass };
            o.method(Suite::Injectivity, &format!("entry[{i}][{j}]"), &phi_id, &word_id, r.matrix[i][j], &m);
        }
    }
    Ok(o)
}

fn flux_oracle(p: &Prepared) -> Result<Output> {
    let mut o = Output::default();
    for (k, (word_id, word)) in p.flux_oracle_words.iter().enumerate() {
        let closed = flux_of_word(word, &p.system)?;
        let seed = p.budget.seed.wrapping_add(1000 + k as u64);
        let est = flux_oracle_curves(&p.surface, word, p.system.curves(), p.budget.samples, seed, Schedule::Linear)?;
        for ((curve, e), &cf) in p.system.curves().iter().zip(est).zip(&closed.periods) {
            let tol = p.budget.tolerance_scale * 3.0 * e.sigma;
            let pass = (e.value - cf).abs() <= tol;
            o.flux.push(FluxRow {
                word_id: word_id.clone(),
                curve_id: curve.id.clone(),
                closed_form: cf,
                oracle: e.value,
                sigma_mc: e.sigma,
                samples: e.samples,
                pass,
            });
            o.push(Suite::FluxOracle, format!("{word_id}/{}", curve.id), cf, e.value, tol, pass);
        }
    }
    Ok(o)
}

fn flux_loop_demo(p: &Prepared) -> Result<Output> {
    let mut o = Output::default();
    let turns = p.flux_loop_demo.turns;
    let d = volflux_core::flux::flux_loop_demo_turns(&p.surface, turns)?;
    let cyl = standard_cylinders(&p.surface)?.remove(0);
    let (z0, z1) = cyl.transverse();
    let swept = (turns * cyl.circumference() * (z1 - z0)).abs();
    let observed = d.flux.periods.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    o.check(Suite::FluxLoopDemo, "period-magnitude", swept, observed, 1e-12 * swept);
    let expect_loop = p.surface.genus() == 1;
    o.push(
        Suite::FluxLoopDemo,
        "is-loop",
        expect_loop as u8 as f64,
        d.is_loop as u8 as f64,
        0.0,
        d.is_loop == expect_loop,
    );
    o.demos.push(d);
    Ok(o)
}

fn invariants(p: &Prepared) -> Result<Output> {
    let mut o = Output::default();
    let cfg = InvariantConfig {
        samples: p.invariants.samples.unwrap_or(p.budget.samples),
        seed: p.invariants.seed,
        cases: p.invariants.cases,
    };
    for c in run_invariants(&p.surface, &p.system, &p.cylinders, &cfg)? {
        // Statistical comparisons widen with the tolerance scale.
        let pass = if c.tolerance > 0.0 {
            (c.observed - c.expected).abs() <= c.tolerance * p.budget.tolerance_scale
        } else {
            c.pass
        };
        o.push(Suite::Invariants, c.name, c.expected, c.observed, c.tolerance * p.budget.tolerance_scale, pass);
    }
    Ok(o)
}
