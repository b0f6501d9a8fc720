//! Experiment configuration: one TOML file with named potentials, profiles
//! and schedules cross-referenced from the `[experiment]` section.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::chain::NoiseCoupling;
use crate::error::{Error, Result};
use crate::estimators::TestFunction;
use crate::expr::Expr;
use crate::potential::Potential;
use crate::profile::{MacroProfile, TensionSchedule};
use crate::thermo::{self, Lambda, MacroState};

/// How the initial macroscopic state is given.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProfileDef {
    /// Uniform equilibrium `D Theta(tension beta, velocity beta, beta)`.
    Equilibrium {
        tension: f64,
        #[serde(default)]
        velocity: f64,
        beta: f64,
    },
    Constant { r: f64, p: f64, e_tot: f64 },
    Analytic { r: Expr, p: Expr, e_tot: Expr },
    /// CSV with columns `x,r,p,E`, linearly interpolated.
    Csv { path: PathBuf },
}

impl ProfileDef {
    pub fn resolve(&self, pot: &Potential, base: &Path) -> Result<MacroProfile> {
        Ok(match self {
            Self::Equilibrium { tension, velocity, beta } => {
                MacroProfile::constant(thermo::grad_theta(Lambda::from_tension(*tension, *velocity, *beta), pot)?)
            }
            Self::Constant { r, p, e_tot } => MacroProfile::constant(MacroState::new(*r, *p, *e_tot)),
            Self::Analytic { r, p, e_tot } => MacroProfile::Analytic { r: r.clone(), p: p.clone(), e_tot: e_tot.clone() },
            Self::Csv { path } => MacroProfile::from_csv(&base.join(path))?,
        })
    }

    /// The generating parameters when the profile is a uniform equilibrium.
    pub fn equilibrium_lambda(&self) -> Option<Lambda> {
        match *self {
            Self::Equilibrium { tension, velocity, beta } => Some(Lambda::from_tension(tension, velocity, beta)),
            _ => None,
        }
    }

    fn validate(&self, field: &str) -> Result<()> {
        match self {
            Self::Equilibrium { tension, velocity, beta } => {
                if !(*beta > 0.0 && beta.is_finite()) {
                    return Err(Error::config(format!("{field}.beta"), format!("must be positive, got {beta}")));
                }
                if !tension.is_finite() || !velocity.is_finite() {
                    return Err(Error::config(field, "tension and velocity must be finite"));
                }
                Ok(())
            }
            Self::Constant { r, p, e_tot } => {
                if [r, p, e_tot].iter().all(|v| v.is_finite()) {
                    Ok(())
                } else {
                    Err(Error::config(field, "constant profile must be finite"))
                }
            }
            Self::Analytic { r, p, e_tot } => MacroProfile::Analytic { r: r.clone(), p: p.clone(), e_tot: e_tot.clone() }
                .validate()
                .map_err(|e| prefix(field, e)),
            Self::Csv { path } => {
                if path.as_os_str().is_empty() {
                    Err(Error::config(format!("{field}.path"), "empty path"))
                } else {
                    Ok(())
                }
            }
        }
    }
}

fn prefix(field: &str, e: Error) -> Error {
    match e {
        Error::Config { field: f, message } => Error::config(format!("{field}.{f}"), message),
        other => other,
    }
}

fn default_gamma() -> f64 {
    1.0
}
fn default_ensemble() -> usize {
    1
}
fn default_cfl() -> f64 {
    0.4
}
fn default_eos_spacing() -> f64 {
    0.01
}
fn default_cutoff_factor() -> f64 {
    20.0
}
fn default_blocks() -> Vec<usize> {
    vec![8, 32, 128]
}
fn default_tests() -> Vec<String> {
    TestFunction::default_set().iter().map(|j| j.name().to_string()).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    pub potential: String,
    pub profile: String,
    pub schedule: String,
    /// Chain sizes for refinement studies.
    pub n: Vec<usize>,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    pub t_macro: f64,
    /// Microscopic step; defaults to `1e-3 / sqrt(sup V'')`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt_micro: Option<f64>,
    #[serde(default)]
    pub coupling: NoiseCoupling,
    #[serde(default = "default_ensemble")]
    pub ensemble: usize,
    pub snapshot_times: Vec<f64>,
    /// PDE snapshot times; default `snapshot_times`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pde_times: Option<Vec<f64>>,
    /// PDE grid sizes.
    pub m: Vec<usize>,
    #[serde(default = "default_cfl")]
    pub cfl: f64,
    #[serde(default = "default_eos_spacing")]
    pub eos_spacing: f64,
    #[serde(default)]
    pub audit_swaps: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimatorSection {
    #[serde(default = "default_blocks")]
    pub block_k: Vec<usize>,
    /// Absolute energy cutoff; default `cutoff_factor x` mean site energy.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cutoff: Option<f64>,
    #[serde(default = "default_cutoff_factor")]
    pub cutoff_factor: f64,
    /// Built-in names (`one`, `sin_pi`, `parabola`, `bump`) or keys of `custom_tests`.
    #[serde(default = "default_tests")]
    pub test_functions: Vec<String>,
    #[serde(default)]
    pub custom_tests: BTreeMap<String, Expr>,
    /// Local-equilibrium block length as a fraction of `N`.
    #[serde(default = "default_le_fraction")]
    pub local_eq_fraction: f64,
}

fn default_le_fraction() -> f64 {
    1.0 / 32.0
}

impl Default for EstimatorSection {
    fn default() -> Self {
        Self {
            block_k: default_blocks(),
            cutoff: None,
            cutoff_factor: default_cutoff_factor(),
            test_functions: default_tests(),
            custom_tests: BTreeMap::new(),
            local_eq_fraction: default_le_fraction(),
        }
    }
}

/// Grid of parameters `(tension, velocity, beta)` for thermodynamic tables.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LambdaGrid {
    #[serde(default)]
    pub tension: Vec<f64>,
    /// Empty means `[0]`.
    #[serde(default)]
    pub velocity: Vec<f64>,
    #[serde(default)]
    pub beta: Vec<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThermoSection {
    /// Potential used for tables; defaults to the experiment's.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub potential: Option<String>,
    #[serde(default)]
    pub lambda_grid: LambdaGrid,
    /// Macro states `[r, p, E]`.
    #[serde(default)]
    pub states: Vec<[f64; 3]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    pub potentials: BTreeMap<String, Potential>,
    pub profiles: BTreeMap<String, ProfileDef>,
    pub schedules: BTreeMap<String, TensionSchedule>,
    pub experiment: ExperimentSection,
    #[serde(default)]
    pub estimators: EstimatorSection,
    #[serde(default)]
    pub thermo: ThermoSection,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| {
            let mut field = String::from("<toml>");
            if let Some(span) = e.span() {
                let line = text[..span.start.min(text.len())].matches('\n').count() + 1;
                field = format!("line {line}");
            }
            Error::config(field, e.message().to_string())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::config(path.display().to_string(), e.to_string()))?;
        Self::parse(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serialises")
    }

    /// SHA-256 of the canonical serialisation.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_toml().as_bytes()))
    }

    pub fn potential(&self) -> Result<Potential> {
        self.lookup_potential(&self.experiment.potential, "experiment.potential")
    }

    fn lookup_potential(&self, name: &str, field: &str) -> Result<Potential> {
        self.potentials
            .get(name)
            .copied()
            .ok_or_else(|| Error::config(field, format!("unknown potential '{name}'")))
    }

    pub fn thermo_potential(&self) -> Result<Potential> {
        match &self.thermo.potential {
            Some(name) => self.lookup_potential(name, "thermo.potential"),
            None => self.potential(),
        }
    }

    pub fn profile_def(&self) -> Result<&ProfileDef> {
        let name = &self.experiment.profile;
        self.profiles
            .get(name)
            .ok_or_else(|| Error::config("experiment.profile", format!("unknown profile '{name}'")))
    }

    pub fn schedule(&self) -> Result<&TensionSchedule> {
        let name = &self.experiment.schedule;
        self.schedules
            .get(name)
            .ok_or_else(|| Error::config("experiment.schedule", format!("unknown schedule '{name}'")))
    }

    pub fn dt_micro(&self) -> Result<f64> {
        Ok(self.experiment.dt_micro.unwrap_or(self.potential()?.default_dt_micro()))
    }

    pub fn pde_times(&self) -> Vec<f64> {
        self.experiment.pde_times.clone().unwrap_or_else(|| self.experiment.snapshot_times.clone())
    }

    pub fn test_functions(&self) -> Result<Vec<TestFunction>> {
        self.estimators
            .test_functions
            .iter()
            .enumerate()
            .map(|(k, name)| {
                let builtin = TestFunction::default_set().into_iter().find(|j| j.name() == name);
                match (builtin, self.estimators.custom_tests.get(name)) {
                    (Some(j), _) => Ok(j),
                    (None, Some(f)) => Ok(TestFunction::Expr { name: name.clone(), f: f.clone() }),
                    (None, None) => Err(Error::config(
                        format!("estimators.test_functions[{k}]"),
                        format!("unknown test function '{name}'"),
                    )),
                }
            })
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.seed > i64::MAX as u64 {
            return Err(Error::config("seed", format!("TOML integers are signed 64-bit; {} is too large", self.seed)));
        }
        for (name, p) in &self.potentials {
            p.validate().map_err(|e| prefix(&format!("potentials.{name}"), e))?;
        }
        for (name, p) in &self.profiles {
            p.validate(&format!("profiles.{name}"))?;
        }
        for (name, s) in &self.schedules {
            s.validate().map_err(|e| prefix(&format!("schedules.{name}"), e))?;
        }
        let pot = self.potential()?;
        self.profile_def()?;
        self.schedule()?;
        self.thermo_potential()?;
        let x = &self.experiment;
        if x.n.is_empty() {
            return Err(Error::config("experiment.n", "need at least one chain size"));
        }
        for (k, &n) in x.n.iter().enumerate() {
            if n == 0 {
                return Err(Error::config(format!("experiment.n[{k}]"), "must be positive"));
            }
        }
        if !(x.gamma >= 0.0 && x.gamma.is_finite()) {
            return Err(Error::config("experiment.gamma", format!("must be >= 0, got {}", x.gamma)));
        }
        if !(x.t_macro > 0.0 && x.t_macro.is_finite()) {
            return Err(Error::config("experiment.t_macro", format!("must be positive, got {}", x.t_macro)));
        }
        if let Some(dt) = x.dt_micro {
            let limit = 0.1 / pot.curvature_sup(pot.growth_probe_radius()).sqrt();
            if !(dt > 0.0 && dt <= limit) {
                return Err(Error::config("experiment.dt_micro", format!("must lie in (0, {limit}], got {dt}")));
            }
        }
        if x.ensemble == 0 {
            return Err(Error::config("experiment.ensemble", "must be positive"));
        }
        let check_times = |field: &str, times: &[f64]| -> Result<()> {
            for (k, &t) in times.iter().enumerate() {
                if !(t >= 0.0 && t <= x.t_macro) {
                    return Err(Error::config(format!("{field}[{k}]"), format!("{t} outside [0, t_macro = {}]", x.t_macro)));
                }
                if k > 0 && !(t > times[k - 1]) {
                    return Err(Error::config(format!("{field}[{k}]"), "times must be strictly increasing"));
                }
            }
            Ok(())
        };
        check_times("experiment.snapshot_times", &x.snapshot_times)?;
        if let Some(t) = &x.pde_times {
            check_times("experiment.pde_times", t)?;
        }
        for (k, &m) in x.m.iter().enumerate() {
            if m < 4 {
                return Err(Error::config(format!("experiment.m[{k}]"), format!("need at least 4 cells, got {m}")));
            }
        }
        if !(x.cfl > 0.0 && x.cfl <= 1.0) {
            return Err(Error::config("experiment.cfl", format!("must lie in (0, 1], got {}", x.cfl)));
        }
        if !(x.eos_spacing > 0.0 && x.eos_spacing <= 0.1) {
            return Err(Error::config("experiment.eos_spacing", format!("must lie in (0, 0.1], got {}", x.eos_spacing)));
        }
        let e = &self.estimators;
        for (k, &b) in e.block_k.iter().enumerate() {
            if b % 2 != 0 {
                return Err(Error::config(format!("estimators.block_k[{k}]"), format!("must be even, got {b}")));
            }
        }
        if let Some(b) = e.cutoff {
            if !(b > 0.0) {
                return Err(Error::config("estimators.cutoff", format!("must be positive, got {b}")));
            }
        }
        if !(e.cutoff_factor > 0.0) {
            return Err(Error::config("estimators.cutoff_factor", "must be positive"));
        }
        if !(e.local_eq_fraction > 0.0 && e.local_eq_fraction <= 1.0) {
            return Err(Error::config("estimators.local_eq_fraction", "must lie in (0, 1]"));
        }
        for j in self.test_functions()? {
            j.validate()?;
        }
        let g = &self.thermo.lambda_grid;
        for (k, &b) in g.beta.iter().enumerate() {
            if !(b > 0.0 && b.is_finite()) {
                return Err(Error::config(format!("thermo.lambda_grid.beta[{k}]"), format!("lambda3 must be positive, got {b}")));
            }
        }
        for (name, v) in [("tension", &g.tension), ("velocity", &g.velocity)] {
            if let Some(k) = v.iter().position(|x| !x.is_finite()) {
                return Err(Error::config(format!("thermo.lambda_grid.{name}[{k}]"), "must be finite"));
            }
        }
        for (k, s) in self.thermo.states.iter().enumerate() {
            if s.iter().any(|v| !v.is_finite()) {
                return Err(Error::config(format!("thermo.states[{k}]"), "must be finite"));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const SAMPLE: &str = r#"
seed = 7

[potentials.cos]
kind = "coslattice"
a = 0.5

[profiles.eq]
kind = "equilibrium"
tension = 1.0
beta = 1.0

[schedules.ramp]
kind = "smooth_ramp"
base = 1.0
amp = 0.5
omega = 6.283185307179586

[experiment]
potential = "cos"
profile = "eq"
schedule = "ramp"
n = [64]
t_macro = 0.1
dt_micro = 0.01
snapshot_times = [0.05, 0.1]
m = [64]
"#;

    #[test]
    fn parses_and_round_trips() {
        let cfg = ExperimentConfig::parse(SAMPLE).unwrap();
        assert_eq!(cfg.experiment.ensemble, 1);
        let again = ExperimentConfig::parse(&cfg.to_toml()).unwrap();
        assert_eq!(cfg, again);
        assert_eq!(cfg.hash(), again.hash());
    }

    #[test]
    fn unresolved_names_are_field_precise() {
        let bad = SAMPLE.replace("potential = \"cos\"", "potential = \"nope\"");
        match ExperimentConfig::parse(&bad) {
            Err(Error::Config { field, .. }) => assert_eq!(field, "experiment.potential"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn syntax_errors_report_line() {
        let bad = SAMPLE.replace("t_macro = 0.1", "t_macro = = 0.1");
        match ExperimentConfig::parse(&bad) {
            Err(Error::Config { field, .. }) => assert!(field.starts_with("line "), "{field}"),
            other => panic!("{other:?}"),
        }
    }
}
