use super::HarnessError;
use crate::engine::{Profile, SolverConfig};
use crate::library::{build_control, CircleProblem, ControlProblemSpec, ControlVariant, SyntheticQp, SyntheticQpSpec};
use crate::problem::{OracleKind, Problem};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};
use std::sync::Arc;
use toml::{Table, Value};

/// Environment variable that overrides `harness.output_dir`.
pub const OUTPUT_DIR_ENV: &str = "SISQO_OUTPUT_DIR";

fn default_condition() -> f64 {
    10.0
}
fn default_floor() -> f64 {
    1.0
}
fn default_terms() -> usize {
    3
}
fn default_lambda() -> f64 {
    1e-5
}
fn default_eps_s() -> f64 {
    15f64.sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProblemConfig {
    Synthetic {
        n: usize,
        m: usize,
        #[serde(default)]
        seed: u64,
        #[serde(default = "default_condition")]
        condition: f64,
        #[serde(default = "default_floor")]
        curvature_floor: f64,
    },
    Control {
        variant: ControlVariant,
        grid: usize,
        #[serde(default = "default_terms")]
        terms: usize,
        #[serde(default = "default_lambda")]
        lambda: f64,
        #[serde(default = "default_eps_s")]
        eps_s: f64,
    },
    Circle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleChoice {
    Exact,
    Gaussian,
    FiniteSum,
}

/// `eps_n` is the noise level of the Gaussian oracle and the target spread
/// of the control problems.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleConfig {
    pub kind: OracleChoice,
    #[serde(default)]
    pub eps_n: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Csv,
    Json,
}

fn default_seeds() -> Vec<u64> {
    vec![0]
}
fn default_kappa_exact() -> f64 {
    1e-7
}
fn default_output_dir() -> PathBuf {
    PathBuf::from("results")
}
fn default_formats() -> Vec<OutputFormat> {
    vec![OutputFormat::Csv, OutputFormat::Json]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HarnessParams {
    #[serde(default = "default_profile")]
    pub profile: Profile,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    /// Noise levels swept by `sweep`; defaults to `oracle.eps_n` alone.
    #[serde(default)]
    pub eps_n_values: Vec<f64>,
    /// `κ` of the near-exact variant in comparisons.
    #[serde(default = "default_kappa_exact")]
    pub kappa_exact: f64,
    /// Sweeps run budget-matched pairs rather than single runs.
    #[serde(default)]
    pub compare: bool,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default = "default_formats")]
    pub formats: Vec<OutputFormat>,
}

fn default_profile() -> Profile {
    Profile::General
}

impl Default for HarnessParams {
    fn default() -> Self {
        toml::from_str("").expect("all harness fields have defaults")
    }
}

/// Fully resolved experiment description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub problem: ProblemConfig,
    pub oracle: OracleConfig,
    #[serde(flatten)]
    pub solver: SolverConfig,
    pub harness: HarnessParams,
}

/// Parses `section.key=value`; the value is read as a TOML literal and
/// falls back to a bare string.
fn apply_override(root: &mut Table, spec: &str) -> Result<(), HarnessError> {
    let (path, raw) = spec
        .split_once('=')
        .ok_or_else(|| HarnessError::Config(format!("override '{spec}' is not of the form section.key=value")))?;
    let keys: Vec<&str> = path.trim().split('.').collect();
    if keys.len() < 2 || keys.iter().any(|k| k.is_empty()) {
        return Err(HarnessError::Config(format!("override key '{path}' needs a section and a key")));
    }
    let raw = raw.trim();
    let value = match toml::from_str::<Table>(&format!("v = {raw}")) {
        Ok(mut t) => t.remove("v").expect("parsed key"),
        Err(_) => Value::String(raw.to_string()),
    };
    let mut table = root;
    for key in &keys[..keys.len() - 1] {
        let entry = table.entry(key.to_string()).or_insert_with(|| Value::Table(Table::new()));
        table = entry
            .as_table_mut()
            .ok_or_else(|| HarnessError::Config(format!("override '{path}': '{key}' is not a table")))?;
    }
    table.insert(keys[keys.len() - 1].to_string(), value);
    Ok(())
}

fn merge(base: &mut Table, over: Table) {
    for (k, v) in over {
        match (base.get_mut(&k), v) {
            // tagged enums are replaced whole so a new `kind` does not inherit
            // fields of the old one
            (Some(Value::Table(b)), Value::Table(o)) if !o.contains_key("kind") => merge(b, o),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

impl ExperimentConfig {
    /// Reads a config from TOML text. The solver sections start from the
    /// profile named in `harness.profile`, then take the file's values, then
    /// the overrides.
    pub fn from_toml_str(text: &str, overrides: &[String]) -> Result<Self, HarnessError> {
        let mut root: Table = toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        for o in overrides {
            apply_override(&mut root, o)?;
        }
        for key in root.keys() {
            if !["problem", "oracle", "algorithm", "solver", "harness"].contains(&key.as_str()) {
                return Err(HarnessError::Config(format!("unknown section '{key}'")));
            }
        }
        let harness: HarnessParams = match root.remove("harness") {
            Some(v) => v.try_into().map_err(|e: toml::de::Error| HarnessError::Config(format!("[harness]: {e}")))?,
            None => HarnessParams::default(),
        };
        let profile = SolverConfig::profile(harness.profile);
        let mut solver_table = Table::try_from(&profile).map_err(|e| HarnessError::Config(e.to_string()))?;
        let mut user = Table::new();
        for section in ["algorithm", "solver"] {
            if let Some(v) = root.remove(section) {
                user.insert(section.to_string(), v);
            }
        }
        merge(&mut solver_table, user);
        let solver: SolverConfig = Value::Table(solver_table)
            .try_into()
            .map_err(|e: toml::de::Error| HarnessError::Config(format!("[algorithm]/[solver]: {e}")))?;
        let problem: ProblemConfig = root
            .remove("problem")
            .ok_or_else(|| HarnessError::Config("missing [problem] section".into()))?
            .try_into()
            .map_err(|e: toml::de::Error| HarnessError::Config(format!("[problem]: {e}")))?;
        let oracle: OracleConfig = match root.remove("oracle") {
            Some(v) => v.try_into().map_err(|e: toml::de::Error| HarnessError::Config(format!("[oracle]: {e}")))?,
            None => OracleConfig { kind: OracleChoice::Exact, eps_n: 0.0 },
        };
        let cfg = Self { problem, oracle, solver, harness };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path, overrides: &[String]) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|source| HarnessError::Io { path: path.to_path_buf(), source })?;
        Self::from_toml_str(&text, overrides)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        self.solver.validate().map_err(|e| HarnessError::Config(e.to_string()))?;
        if !(self.harness.kappa_exact > 0.0 && self.harness.kappa_exact < 1.0) {
            return Err(HarnessError::Config("harness.kappa_exact must lie in (0,1)".into()));
        }
        if self.harness.seeds.is_empty() {
            return Err(HarnessError::Config("harness.seeds is empty".into()));
        }
        for &eps in self.noise_levels().iter() {
            if !(eps >= 0.0 && eps.is_finite()) {
                return Err(HarnessError::Config(format!("noise level {eps} must be finite and nonnegative")));
            }
        }
        // build once so problem-spec errors surface at load time
        self.build_problem(self.oracle.eps_n)?;
        Ok(())
    }

    pub fn noise_levels(&self) -> Vec<f64> {
        if self.harness.eps_n_values.is_empty() {
            vec![self.oracle.eps_n]
        } else {
            self.harness.eps_n_values.clone()
        }
    }

    pub fn build_problem(&self, eps_n: f64) -> Result<Arc<dyn Problem>, HarnessError> {
        Ok(match &self.problem {
            &ProblemConfig::Synthetic { n, m, seed, condition, curvature_floor } => {
                Arc::new(SyntheticQp::new(&SyntheticQpSpec { n, m, seed, condition, curvature_floor })?)
            }
            &ProblemConfig::Control { variant, grid, terms, lambda, eps_s } => {
                build_control(&ControlProblemSpec { variant, grid, terms, lambda, eps_n, eps_s })?
            }
            ProblemConfig::Circle => Arc::new(CircleProblem),
        })
    }

    pub fn oracle_kind(&self, eps_n: f64) -> OracleKind {
        match self.oracle.kind {
            OracleChoice::Exact => OracleKind::Exact,
            OracleChoice::Gaussian => OracleKind::Gaussian { eps_n },
            OracleChoice::FiniteSum => OracleKind::FiniteSum,
        }
    }

    pub fn exact_solver(&self) -> SolverConfig {
        self.solver.clone().with_kappa(self.harness.kappa_exact)
    }

    /// First 16 hex digits of the SHA-256 of the canonical JSON form.
    pub fn config_hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        let digest = Sha256::digest(json.as_bytes());
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }

    /// `harness.output_dir`, unless the environment variable is set.
    pub fn output_dir(&self) -> PathBuf {
        match std::env::var_os(OUTPUT_DIR_ENV) {
            Some(dir) if !dir.is_empty() => PathBuf::from(dir),
            _ => self.harness.output_dir.clone(),
        }
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes to TOML")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::LipschitzMode;

    const BASIC: &str = r#"
[problem]
kind = "control"
variant = "poisson_distributed"
grid = 8

[oracle]
kind = "finite_sum"
eps_n = 0.01

[harness]
profile = "control"
seeds = [1, 2]
"#;

    #[test]
    fn profile_then_file_then_overrides() {
        let cfg = ExperimentConfig::from_toml_str(BASIC, &[]).unwrap();
        assert_eq!(cfg.solver.algorithm.tau_init, 1e-4);
        assert_eq!(cfg.solver.algorithm.lipschitz, LipschitzMode::Fixed { l: 1.0, gamma: 0.0 });
        let text = format!("{BASIC}\n[algorithm]\neta = 0.3\n");
        let cfg = ExperimentConfig::from_toml_str(&text, &["algorithm.kappa=0.01".into(), "solver.max_outer_iterations=7".into()])
            .unwrap();
        assert_eq!(cfg.solver.algorithm.eta, 0.3);
        assert_eq!(cfg.solver.algorithm.kappa, 0.01);
        assert_eq!(cfg.solver.algorithm.tau_init, 1e-4);
        assert_eq!(cfg.solver.solver.max_outer_iterations, 7);
    }

    #[test]
    fn tagged_override_replaces_whole_enum() {
        let cfg = ExperimentConfig::from_toml_str(
            BASIC,
            &["algorithm.lipschitz={ kind = \"estimate\", probe_scale = 1e-3, floor = 1e-6 }".into()],
        )
        .unwrap();
        assert_eq!(cfg.solver.algorithm.lipschitz, LipschitzMode::Estimate { probe_scale: 1e-3, floor: 1e-6 });
    }

    #[test]
    fn string_override_without_quotes() {
        let cfg = ExperimentConfig::from_toml_str(BASIC, &["oracle.kind=exact".into()]).unwrap();
        assert_eq!(cfg.oracle.kind, OracleChoice::Exact);
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        assert!(ExperimentConfig::from_toml_str(&format!("{BASIC}\n[algorithm]\nkapa = 0.1\n"), &[]).is_err());
        assert!(ExperimentConfig::from_toml_str(BASIC, &["algorithm.eta=2.0".into()]).is_err());
        assert!(ExperimentConfig::from_toml_str(BASIC, &["nokey".into()]).is_err());
        assert!(ExperimentConfig::from_toml_str(BASIC, &["extra.key=1".into()]).is_err());
        assert!(ExperimentConfig::from_toml_str(BASIC, &["problem.grid=1".into()]).is_err());
    }

    #[test]
    fn hash_is_stable_and_sensitive() {
        let a = ExperimentConfig::from_toml_str(BASIC, &[]).unwrap();
        let b = ExperimentConfig::from_toml_str(BASIC, &[]).unwrap();
        let c = ExperimentConfig::from_toml_str(BASIC, &["algorithm.theta=10".into()]).unwrap();
        assert_eq!(a.config_hash(), b.config_hash());
        assert_ne!(a.config_hash(), c.config_hash());
        assert_eq!(a.config_hash().len(), 16);
    }

    #[test]
    fn toml_round_trip() {
        let a = ExperimentConfig::from_toml_str(BASIC, &[]).unwrap();
        let b = ExperimentConfig::from_toml_str(&a.to_toml_string(), &[]).unwrap();
        assert_eq!(a, b);
    }
}
