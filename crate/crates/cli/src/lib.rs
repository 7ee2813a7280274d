//! Scenario runner for the volflux verification suites.
//!
//! A scenario is a single JSON document naming a surface, a curve system,
//! cylinders, cohomology classes, twist words, the suites to run and the
//! numerical budget. Every field is optional; the empty document `{}` runs
//! all suites on the genus-2 L-surface.

pub mod error;
pub mod report;
pub mod scenario;
pub mod suites;

use std::path::Path;

pub use error::ConfigError;
pub use report::SuiteReport;
pub use scenario::{Overrides, Prepared, Scenario, Suite};

/// Loads, validates and runs a scenario file.
pub fn run_scenario(path: &Path, overrides: &Overrides) -> Result<SuiteReport, ConfigError> {
    let mut sc = Scenario::load(path)?;
    overrides.apply(&mut sc);
    run(&sc)
}

/// Validates and runs an in-memory scenario.
pub fn run(sc: &Scenario) -> Result<SuiteReport, ConfigError> {
    let prepared = Prepared::new(sc)?;
    Ok(suites::run(&prepared))
}

/// Shipped surfaces, curve systems and suites, in a fixed order.
pub fn list_builtins() -> String {
    let mut s = String::from("surfaces:\n");
    s.push_str("  genus2-L    L-shaped genus-2 surface, three unit squares, one cone point of angle 6π\n");
    s.push_str("  torus       unit square torus\n");
    s.push_str("curve systems:\n");
    s.push_str("  standard    genus2-L: h1 h2 v1 v2; torus: alpha beta\n");
    s.push_str("cylinders:\n");
    s.push_str("  standard    maximal horizontal and vertical cylinders, ids matching the curves\n");
    s.push_str("suites:\n");
    for suite in Suite::ALL {
        s.push_str(&format!("  {}\n", suite.name()));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtins_listing() {
        let a = list_builtins();
        assert_eq!(a, list_builtins());
        for needle in ["genus2-L", "torus", "theorem2", "flux-loop-demo"] {
            assert!(a.contains(needle));
        }
        let suites: Vec<&str> = a.lines().skip_while(|l| *l != "suites:").skip(1).map(str::trim).collect();
        assert_eq!(suites, Suite::ALL.map(Suite::name).to_vec());
    }
}
