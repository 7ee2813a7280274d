//! Report rows and their CSV and JSON encodings.

use std::fs;
use std::path::Path;

use serde::Serialize;
use volflux_core::FluxLoopReport;

/// Version of the JSON report layout.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CheckRow {
    pub suite: String,
    pub name: String,
    pub expected: f64,
    pub observed: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct GammaRow {
    pub phi_id: String,
    pub word_id: String,
    pub method: String,
    pub value: f64,
    /// Standard error for `mc`, quadrature bound for `stratified`.
    pub stderr_or_bound: f64,
    pub samples: usize,
    pub closed_form: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct FluxRow {
    pub word_id: String,
    pub curve_id: String,
    pub closed_form: f64,
    pub oracle: f64,
    pub sigma_mc: f64,
    pub samples: usize,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Timing {
    pub suite: String,
    pub seconds: f64,
}

/// Everything a run produced. Timings are kept out of the JSON report so
/// that reports are byte-identical across runs.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SuiteReport {
    pub schema_version: u32,
    pub version: String,
    pub seed: u64,
    pub surface: String,
    pub suites: Vec<String>,
    pub aggregate_pass: bool,
    pub checks: Vec<CheckRow>,
    pub gamma: Vec<GammaRow>,
    pub flux: Vec<FluxRow>,
    pub flux_loop_demo: Vec<FluxLoopReport>,
    #[serde(skip)]
    pub timings: Vec<Timing>,
}

impl SuiteReport {
    pub fn failures(&self) -> impl Iterator<Item = &CheckRow> {
        self.checks.iter().filter(|c| !c.pass)
    }

    /// Writes `report.json`, `checks.csv`, `gamma.csv`, `flux.csv` and
    /// `timings.json` into `dir`.
    pub fn write(&self, dir: &Path) -> std::io::Result<()> {
        fs::create_dir_all(dir)?;
        let mut json = serde_json::to_string_pretty(self).map_err(std::io::Error::other)?;
        json.push('\n');
        fs::write(dir.join("report.json"), json)?;
        write_csv(&dir.join("checks.csv"), &self.checks)?;
        write_csv(&dir.join("gamma.csv"), &self.gamma)?;
        write_csv(&dir.join("flux.csv"), &self.flux)?;
        let timings = serde_json::to_string_pretty(&self.timings).map_err(std::io::Error::other)?;
        fs::write(dir.join("timings.json"), timings + "\n")
    }

    /// One line per check plus a summary line.
    pub fn summary(&self) -> String {
        let mut s = String::new();
        for c in &self.checks {
            s.push_str(&format!(
                "{} {:<48} expected {:>12.6e} observed {:>12.6e} tol {:>10.3e}\n",
                if c.pass { "PASS" } else { "FAIL" },
                format!("{}/{}", c.suite, c.name),
                c.expected,
                c.observed,
                c.tolerance
            ));
        }
        let failed = self.failures().count();
        s.push_str(&format!(
            "{} checks, {} failed: {}\n",
            self.checks.len(),
            failed,
            if self.aggregate_pass { "PASS" } else { "FAIL" }
        ));
        s
    }
}

fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> std::io::Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()
}

/// Header line of each CSV file, for documentation and tests.
pub fn csv_headers() -> [(&'static str, &'static str); 3] {
    [
        ("checks.csv", "suite,name,expected,observed,tolerance,pass"),
        ("gamma.csv", "phiId,wordId,method,value,stderrOrBound,samples,closedForm,pass"),
        ("flux.csv", "wordId,curveId,closedForm,oracle,sigmaMc,samples,pass"),
    ]
}
