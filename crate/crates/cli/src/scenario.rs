//! Scenario documents and their validation.

use std::path::Path;

use serde::{Deserialize, Serialize};
use volflux_core::homology::CurveSystemSpec;
use volflux_core::isotopy::{CylinderSpec, LetterSpec, WordSpec};
use volflux_core::profile::ProfileSpec;
use volflux_core::surface::{SurfaceSpec, GENUS2_L};
use volflux_core::{
    standard_curves, standard_cylinders, Budget, CohomologyClass, CurveSystem, Cylinder, FlatSurface,
    TwistProfile, TwistWord,
};

use crate::error::ConfigError;

/// Verification suites, in canonical execution order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Lemma3,
    Theorem2,
    Injectivity,
    FluxOracle,
    FluxLoopDemo,
    Invariants,
}

impl Suite {
    pub const ALL: [Suite; 6] =
        [Suite::Lemma3, Suite::Theorem2, Suite::Injectivity, Suite::FluxOracle, Suite::FluxLoopDemo, Suite::Invariants];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Lemma3 => "lemma3",
            Suite::Theorem2 => "theorem2",
            Suite::Injectivity => "injectivity",
            Suite::FluxOracle => "flux-oracle",
            Suite::FluxLoopDemo => "flux-loop-demo",
            Suite::Invariants => "invariants",
        }
    }

    pub fn parse(s: &str) -> Option<Suite> {
        Suite::ALL.into_iter().find(|x| x.name() == s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SurfaceRef {
    Builtin(String),
    Custom(SurfaceSpec),
}

/// `"standard"` or an explicit list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Choice<T> {
    Named(String),
    Custom(T),
}

impl<T> Default for Choice<T> {
    fn default() -> Self {
        Choice::Named("standard".into())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct NamedPhi {
    pub id: String,
    pub coeffs: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct NamedWord {
    pub id: String,
    pub letters: Vec<LetterSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields, default)]
pub struct Lemma3Config {
    /// Single-letter word; defaults to a plateau twist on the first cylinder.
    pub word: Option<String>,
    /// Defaults to the dual of that cylinder's core.
    pub phi: Option<String>,
    pub int_omega: f64,
}

impl Default for Lemma3Config {
    fn default() -> Self {
        Lemma3Config { word: None, phi: None, int_omega: 0.5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct CaseRef {
    pub phi: String,
    pub word: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields, default)]
pub struct Theorem2Config {
    pub cases: Vec<CaseRef>,
    pub random_cases: usize,
    pub random_seed: u64,
    pub max_length: usize,
}

impl Default for Theorem2Config {
    fn default() -> Self {
        Theorem2Config { cases: Vec::new(), random_cases: 20, random_seed: 2024, max_length: 5 }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields, default)]
pub struct InjectivityConfig {
    /// One profile per basis curve, in curve order. Defaults to unit
    /// integral plateaus on the cylinders whose cores are the basis curves.
    pub profiles: Option<Vec<ProfileSpec>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields, default)]
pub struct FluxOracleConfig {
    /// Defaults to one unit twist per cylinder.
    pub words: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields, default)]
pub struct FluxLoopDemoConfig {
    pub turns: f64,
}

impl Default for FluxLoopDemoConfig {
    fn default() -> Self {
        FluxLoopDemoConfig { turns: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields, default)]
pub struct InvariantsConfig {
    /// Defaults to the budget's sample count.
    pub samples: Option<usize>,
    pub seed: u64,
    pub cases: usize,
}

impl Default for InvariantsConfig {
    fn default() -> Self {
        InvariantsConfig { samples: None, seed: 7, cases: 2 }
    }
}

fn default_surface() -> SurfaceRef {
    SurfaceRef::Builtin(GENUS2_L.into())
}

fn all_suites() -> Vec<Suite> {
    Suite::ALL.to_vec()
}

/// A complete run configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct Scenario {
    #[serde(default = "default_surface")]
    pub surface: SurfaceRef,
    #[serde(default)]
    pub curves: Choice<CurveSystemSpec>,
    #[serde(default)]
    pub cylinders: Choice<Vec<CylinderSpec>>,
    #[serde(default)]
    pub phis: Vec<NamedPhi>,
    #[serde(default)]
    pub words: Vec<NamedWord>,
    #[serde(default = "all_suites")]
    pub suites: Vec<Suite>,
    #[serde(default)]
    pub budget: Budget,
    #[serde(default)]
    pub lemma3: Lemma3Config,
    #[serde(default)]
    pub theorem2: Theorem2Config,
    #[serde(default)]
    pub injectivity: InjectivityConfig,
    #[serde(default)]
    pub flux_oracle: FluxOracleConfig,
    #[serde(default)]
    pub flux_loop_demo: FluxLoopDemoConfig,
    #[serde(default)]
    pub invariants: InvariantsConfig,
}

impl Default for Scenario {
    fn default() -> Self {
        serde_json::from_str("{}").expect("empty scenario is valid")
    }
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        serde_json::from_str(text).map_err(|e| ConfigError::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::Io { path: path.display().to_string(), message: e.to_string() })?;
        Self::from_json(&text)
    }
}

/// Command-line settings that take precedence over the scenario file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub suites: Option<Vec<Suite>>,
    pub samples: Option<usize>,
    pub grid: Option<usize>,
    pub seed: Option<u64>,
    pub tolerance_scale: Option<f64>,
}

impl Overrides {
    pub fn apply(&self, scenario: &mut Scenario) {
        if let Some(s) = &self.suites {
            scenario.suites = s.clone();
        }
        let b = &mut scenario.budget;
        b.samples = self.samples.unwrap_or(b.samples);
        b.grid = self.grid.unwrap_or(b.grid);
        b.seed = self.seed.unwrap_or(b.seed);
        b.tolerance_scale = self.tolerance_scale.unwrap_or(b.tolerance_scale);
    }
}

/// A validated scenario with every id resolved.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub surface: FlatSurface,
    pub system: CurveSystem,
    pub cylinders: Vec<Cylinder>,
    pub phis: Vec<(String, CohomologyClass)>,
    pub words: Vec<(String, TwistWord)>,
    pub suites: Vec<Suite>,
    pub budget: Budget,
    pub lemma3: Option<Lemma3Case>,
    pub theorem2: Theorem2Config,
    pub injectivity: Option<Vec<TwistProfile>>,
    pub flux_oracle_words: Vec<(String, TwistWord)>,
    pub flux_loop_demo: FluxLoopDemoConfig,
    pub invariants: InvariantsConfig,
}

#[derive(Debug, Clone)]
pub struct Lemma3Case {
    pub word_id: String,
    pub word: TwistWord,
    pub phi_id: String,
    pub phi: CohomologyClass,
    /// `φ(core) · scale · ∫ω`.
    pub expected: f64,
}

fn invalid(field: impl Into<String>, message: impl ToString) -> ConfigError {
    ConfigError::Validation { field: field.into(), message: message.to_string() }
}

impl Prepared {
    pub fn new(sc: &Scenario) -> Result<Self, ConfigError> {
        let surface = match &sc.surface {
            SurfaceRef::Builtin(name) => FlatSurface::builtin(name).map_err(|e| invalid("surface", e))?,
            SurfaceRef::Custom(spec) => FlatSurface::new(spec.clone()).map_err(|e| invalid("surface", e))?,
        };
        let system = match &sc.curves {
            Choice::Named(n) if n == "standard" => standard_curves(&surface).map_err(|e| invalid("curves", e))?,
            Choice::Named(n) => return Err(invalid("curves", format!("unknown curve system `{n}`"))),
            Choice::Custom(spec) => CurveSystem::from_spec(&surface, spec).map_err(|e| invalid("curves", e))?,
        };
        let cylinders = match &sc.cylinders {
            Choice::Named(n) if n == "standard" => {
                standard_cylinders(&surface).map_err(|e| invalid("cylinders", e))?
            }
            Choice::Named(n) => return Err(invalid("cylinders", format!("unknown cylinder set `{n}`"))),
            Choice::Custom(specs) => specs
                .iter()
                .enumerate()
                .map(|(k, s)| Cylinder::new(&surface, s.clone()).map_err(|e| invalid(format!("cylinders[{k}]"), e)))
                .collect::<Result<_, _>>()?,
        };
        for (k, c) in cylinders.iter().enumerate() {
            if system.index_of(c.core()).is_err() {
                return Err(invalid(format!("cylinders[{k}].core"), format!("no basis curve `{}`", c.core())));
            }
        }

        let mut phis = Vec::new();
        for (k, p) in sc.phis.iter().enumerate() {
            if p.coeffs.len() != system.dim() {
                return Err(invalid(
                    format!("phis[{k}].coeffs"),
                    format!("expected {} coefficients, got {}", system.dim(), p.coeffs.len()),
                ));
            }
            if p.coeffs.iter().any(|c| !c.is_finite()) {
                return Err(invalid(format!("phis[{k}].coeffs"), "coefficients must be finite"));
            }
            check_unique(&phis, &p.id, format!("phis[{k}].id"))?;
            phis.push((p.id.clone(), CohomologyClass::new(p.coeffs.clone())));
        }
        let mut words = Vec::new();
        for (k, w) in sc.words.iter().enumerate() {
            let word = build_word(&w.letters, &cylinders, &format!("words[{k}]"))?;
            check_unique(&words, &w.id, format!("words[{k}].id"))?;
            words.push((w.id.clone(), word));
        }

        let b = sc.budget;
        if b.samples == 0 {
            return Err(invalid("budget.samples", "must be positive"));
        }
        if b.grid < 16 {
            return Err(invalid("budget.grid", "must be at least 16"));
        }
        if !(b.tolerance_scale > 0.0 && b.tolerance_scale.is_finite()) {
            return Err(invalid("budget.toleranceScale", "must be positive"));
        }
        if !b.mc && !b.stratified {
            return Err(invalid("budget", "enable at least one of `mc` and `stratified`"));
        }
        let mut suites = sc.suites.clone();
        suites.sort();
        suites.dedup();
        if suites.is_empty() {
            return Err(invalid("suites", "select at least one suite"));
        }
        let wants = |s: Suite| suites.contains(&s);

        let lemma3 = if wants(Suite::Lemma3) { Some(lemma3_case(sc, &system, &cylinders, &phis, &words)?) } else { None };

        for (k, c) in sc.theorem2.cases.iter().enumerate() {
            lookup(&phis, &c.phi, &format!("theorem2.cases[{k}].phi"))?;
            lookup(&words, &c.word, &format!("theorem2.cases[{k}].word"))?;
        }
        if sc.theorem2.max_length == 0 {
            return Err(invalid("theorem2.maxLength", "must be positive"));
        }

        let injectivity = match &sc.injectivity.profiles {
            _ if !wants(Suite::Injectivity) => None,
            Some(specs) => Some(
                specs
                    .iter()
                    .enumerate()
                    .map(|(k, s)| {
                        TwistProfile::from_spec(s, &cylinders).map_err(|e| invalid(format!("injectivity.profiles[{k}]"), e))
                    })
                    .collect::<Result<Vec<_>, _>>()?,
            ),
            None => Some(
                system
                    .curves()
                    .iter()
                    .map(|c| {
                        let cyl = cylinders.iter().find(|y| y.core() == c.id).ok_or_else(|| {
                            invalid("injectivity.profiles", format!("no cylinder has core `{}`", c.id))
                        })?;
                        TwistProfile::with_integral(cyl.clone(), 1.0).map_err(|e| invalid("injectivity.profiles", e))
                    })
                    .collect::<Result<Vec<_>, _>>()?,
            ),
        };

        let flux_oracle_words = match &sc.flux_oracle.words {
            Some(ids) => ids
                .iter()
                .enumerate()
                .map(|(k, id)| Ok((id.clone(), lookup(&words, id, &format!("fluxOracle.words[{k}]"))?.clone())))
                .collect::<Result<Vec<_>, ConfigError>>()?,
            None => cylinders
                .iter()
                .map(|c| {
                    let p = TwistProfile::with_integral(c.clone(), 1.0).map_err(|e| invalid("fluxOracle", e))?;
                    Ok((format!("unit-{}", c.id()), TwistWord::single(p, 1.0)))
                })
                .collect::<Result<Vec<_>, ConfigError>>()?,
        };

        if !(sc.flux_loop_demo.turns.is_finite() && sc.flux_loop_demo.turns != 0.0) {
            return Err(invalid("fluxLoopDemo.turns", "must be finite and non-zero"));
        }
        if sc.invariants.samples == Some(0) {
            return Err(invalid("invariants.samples", "must be positive"));
        }

        Ok(Prepared {
            surface,
            system,
            cylinders,
            phis,
            words,
            suites,
            budget: b,
            lemma3,
            theorem2: sc.theorem2.clone(),
            injectivity,
            flux_oracle_words,
            flux_loop_demo: sc.flux_loop_demo.clone(),
            invariants: sc.invariants.clone(),
        })
    }

    pub fn phi(&self, id: &str) -> &CohomologyClass {
        &self.phis.iter().find(|(k, _)| k == id).expect("validated id").1
    }

    pub fn word(&self, id: &str) -> &TwistWord {
        &self.words.iter().find(|(k, _)| k == id).expect("validated id").1
    }
}

fn check_unique<T>(seen: &[(String, T)], id: &str, field: String) -> Result<(), ConfigError> {
    if seen.iter().any(|(k, _)| k == id) {
        return Err(invalid(field, format!("duplicate id `{id}`")));
    }
    Ok(())
}

fn lookup<'a, T>(items: &'a [(String, T)], id: &str, field: &str) -> Result<&'a T, ConfigError> {
    items.iter().find(|(k, _)| k == id).map(|(_, v)| v).ok_or_else(|| invalid(field, format!("unknown id `{id}`")))
}

fn build_word(letters: &[LetterSpec], cylinders: &[Cylinder], field: &str) -> Result<TwistWord, ConfigError> {
    for (j, l) in letters.iter().enumerate() {
        TwistProfile::from_spec(&l.profile, cylinders)
            .map_err(|e| invalid(format!("{field}.letters[{j}].profile"), e))?;
    }
    TwistWord::from_spec(&WordSpec { letters: letters.to_vec() }, cylinders).map_err(|e| invalid(field, e))
}

fn lemma3_case(
    sc: &Scenario,
    system: &CurveSystem,
    cylinders: &[Cylinder],
    phis: &[(String, CohomologyClass)],
    words: &[(String, TwistWord)],
) -> Result<Lemma3Case, ConfigError> {
    let cfg = &sc.lemma3;
    let (word_id, word) = match &cfg.word {
        Some(id) => (id.clone(), lookup(words, id, "lemma3.word")?.clone()),
        None => {
            let cyl = cylinders.first().ok_or_else(|| invalid("cylinders", "no cylinders"))?;
            let p = TwistProfile::with_integral(cyl.clone(), cfg.int_omega).map_err(|e| invalid("lemma3.intOmega", e))?;
            (format!("lemma-{}", cyl.id()), TwistWord::single(p, 1.0))
        }
    };
    let [letter] = word.letters() else {
        return Err(invalid("lemma3.word", "must have exactly one letter"));
    };
    let core = system.index_of(letter.cylinder().core()).map_err(|e| invalid("lemma3.word", e))?;
    let (phi_id, phi) = match &cfg.phi {
        Some(id) => (id.clone(), lookup(phis, id, "lemma3.phi")?.clone()),
        None => (format!("dual-{}", system.curves()[core].id), CohomologyClass::dual(system.dim(), core)),
    };
    let expected = phi.coeffs[core] * letter.scale * letter.profile.integral();
    Ok(Lemma3Case { word_id, word, phi_id, phi, expected })
}
