//! Declarative experiment configuration (TOML).
//!
//! One file describes the whole experiment: the edge system, the demand
//! source, the policy roster, the solver, and run bookkeeping. Unknown keys
//! are rejected. Every field has a default mirroring the reference setup
//! (five SBSs with rental set {0,2,4,6} of 2 GHz units, unit tariff,
//! 150 tasks per unit, 1 MB / 10⁹-cycle tasks, budget 8, horizon 2700), so
//! a minimal synthetic config is just `mode = "synthetic"`.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kcg::Solver;
use crate::model::{Budget, CloudConfig, EdgeModel, ModelError, SbsConfig, TaskProfile};
use crate::policy::{
    design_parameters, CoerrParams, CoerrPolicy, CucbPolicy, LinUcbConfig, LinUcbPolicy,
    OraclePolicy, Policy, PolicyError, RandomPolicy,
};
use crate::rng;
use crate::sim::synthetic::SyntheticModel;

const TAG_POLICY_SEED: u64 = 0x70;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("cannot parse config: {0}")]
    Parse(String),

    #[error("invalid config: {0}")]
    Invalid(String),

    #[error(transparent)]
    Model(#[from] ModelError),

    #[error(transparent)]
    Policy(#[from] PolicyError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Synthetic,
    Trace,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TaskSection {
    pub input_bits: f64,
    pub cpu_cycles: f64,
    pub max_delay: f64,
}

impl Default for TaskSection {
    fn default() -> Self {
        Self {
            input_bits: 8e6, // one 1 MB task
            cpu_cycles: 1e9,
            max_delay: 10.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CloudSection {
    pub cpu_hz: f64,
    pub uplink_rate: f64,
    pub backbone_rate: f64,
    pub round_trip: f64,
}

impl Default for CloudSection {
    fn default() -> Self {
        Self {
            cpu_hz: 2e10,
            uplink_rate: 2e6,
            backbone_rate: 1e8,
            round_trip: 0.05,
        }
    }
}

/// Homogeneous SBS template, optionally overridden per SBS via `custom`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SbsSection {
    pub count: usize,
    pub rental_set: Vec<f64>,
    pub unit_hz: f64,
    pub price_per_unit: f64,
    pub tasks_per_unit: f64,
    pub uplink_rate: f64,
    /// Full per-SBS descriptions; length must equal `count` when present.
    pub custom: Option<Vec<SbsCustom>>,
}

impl Default for SbsSection {
    fn default() -> Self {
        Self {
            count: 5,
            rental_set: vec![0.0, 2.0, 4.0, 6.0],
            unit_hz: 2e9,
            price_per_unit: 1.0,
            tasks_per_unit: 150.0,
            uplink_rate: 5e6,
            custom: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SbsCustom {
    pub rental_set: Vec<f64>,
    pub unit_hz: f64,
    pub price_per_unit: f64,
    pub tasks_per_unit: f64,
    pub uplink_rate: f64,
}

impl Default for SbsCustom {
    fn default() -> Self {
        let t = SbsSection::default();
        Self {
            rental_set: t.rental_set,
            unit_hz: t.unit_hz,
            price_per_unit: t.price_per_unit,
            tasks_per_unit: t.tasks_per_unit,
            uplink_rate: t.uplink_rate,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SyntheticSection {
    /// Demand range bound λ_max.
    pub demand_range: f64,
    pub noise_std: f64,
    pub holder_l: f64,
    /// Active context cells per SBS; 0 = uniform over the whole cube.
    pub active_cells_per_sbs: usize,
    /// Context grid of the generator; defaults to the designed h_T.
    pub context_cells_per_dim: Option<u32>,
}

impl Default for SyntheticSection {
    fn default() -> Self {
        Self {
            demand_range: 900.0, // largest servable load, cap(6) = 150·6
            noise_std: 60.0,
            holder_l: 900.0,
            active_cells_per_sbs: 4,
            context_cells_per_dim: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceSection {
    pub path: PathBuf,
    #[serde(default = "default_slot_seconds")]
    pub slot_seconds: u64,
    /// site_id → SBS index; defaults to distinct sites in sorted order.
    #[serde(default)]
    pub site_map: Option<BTreeMap<String, usize>>,
}

fn default_slot_seconds() -> u64 {
    10_800 // 3 h rental cycle
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub mode: Mode,
    pub seed: u64,
    pub horizon: u64,
    pub replications: usize,
    pub policies: Vec<String>,
    pub solver: Solver,
    pub budget: f64,
    /// Hölder exponent fed to the parameter design.
    pub alpha: f64,
    pub context_dim: usize,
    /// δ for the cumulative δ-regret column (1 = plain regret).
    pub delta: Option<f64>,
    pub output_dir: PathBuf,
    pub task: TaskSection,
    pub cloud: CloudSection,
    pub sbs: SbsSection,
    pub synthetic: SyntheticSection,
    pub trace: Option<TraceSection>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            mode: Mode::Synthetic,
            seed: 42,
            horizon: 2700,
            replications: 1,
            policies: vec![
                "oracle".into(),
                "coerr".into(),
                "cucb".into(),
                "random".into(),
            ],
            solver: Solver::BranchAndBound,
            budget: 8.0,
            alpha: 1.0,
            context_dim: 2,
            delta: None,
            output_dir: PathBuf::from("out"),
            task: TaskSection::default(),
            cloud: CloudSection::default(),
            sbs: SbsSection::default(),
            synthetic: SyntheticSection::default(),
            trace: None,
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml(&text)
    }

    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: Self = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    /// FNV fingerprint of the canonical serialized form.
    pub fn hash(&self) -> u64 {
        rng::fnv1a_str(&self.to_toml())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.horizon < 1 {
            return Err(ConfigError::Invalid("horizon must be >= 1".into()));
        }
        if self.replications < 1 {
            return Err(ConfigError::Invalid("replications must be >= 1".into()));
        }
        if self.context_dim < 1 {
            return Err(ConfigError::Invalid("context_dim must be >= 1".into()));
        }
        if !(self.alpha > 0.0) {
            return Err(ConfigError::Invalid("alpha must be > 0".into()));
        }
        if let Some(d) = self.delta {
            if !(d >= 1.0) {
                return Err(ConfigError::Invalid("delta must be >= 1".into()));
            }
        }
        if self.policies.is_empty() {
            return Err(ConfigError::Invalid("need at least one policy".into()));
        }
        for name in &self.policies {
            parse_policy_name(name)
                .ok_or_else(|| ConfigError::Invalid(format!("unknown policy '{name}'")))?;
        }
        if self.mode == Mode::Trace {
            if self.trace.is_none() {
                return Err(ConfigError::Invalid(
                    "trace mode needs a [trace] section".into(),
                ));
            }
            if self.context_dim != 2 {
                return Err(ConfigError::Invalid(
                    "trace mode derives 2 context features; set context_dim = 2".into(),
                ));
            }
        }
        if let Some(custom) = &self.sbs.custom {
            if custom.len() != self.sbs.count {
                return Err(ConfigError::Invalid(format!(
                    "sbs.custom has {} entries for count {}",
                    custom.len(),
                    self.sbs.count
                )));
            }
        }
        // Surface model-level violations now rather than at run time.
        self.build_model().map(|_| ()).map_err(ConfigError::from)
    }

    pub fn n_sbs(&self) -> usize {
        self.sbs.count
    }

    pub fn build_model(&self) -> Result<EdgeModel, ModelError> {
        let sbss: Vec<SbsConfig> = match &self.sbs.custom {
            Some(custom) => custom
                .iter()
                .enumerate()
                .map(|(id, c)| {
                    SbsConfig::linear(
                        id,
                        c.rental_set.clone(),
                        c.unit_hz,
                        c.price_per_unit,
                        c.tasks_per_unit,
                        c.uplink_rate,
                    )
                })
                .collect::<Result<_, _>>()?,
            None => (0..self.sbs.count)
                .map(|id| {
                    SbsConfig::linear(
                        id,
                        self.sbs.rental_set.clone(),
                        self.sbs.unit_hz,
                        self.sbs.price_per_unit,
                        self.sbs.tasks_per_unit,
                        self.sbs.uplink_rate,
                    )
                })
                .collect::<Result<_, _>>()?,
        };
        EdgeModel::new(
            TaskProfile::new(self.task.input_bits, self.task.cpu_cycles, self.task.max_delay)?,
            CloudConfig::new(
                self.cloud.cpu_hz,
                self.cloud.uplink_rate,
                self.cloud.backbone_rate,
                self.cloud.round_trip,
            )?,
            sbss,
            Budget::new(self.budget)?,
        )
    }

    /// Horizon-designed COERR parameters for this config.
    pub fn designed_params(&self) -> CoerrParams {
        design_parameters(self.horizon, self.alpha, self.context_dim)
    }

    pub fn build_synthetic(&self) -> Result<SyntheticModel, ConfigError> {
        let cells = self
            .synthetic
            .context_cells_per_dim
            .unwrap_or(self.designed_params().cells_per_dim);
        Ok(SyntheticModel::generate(
            self.sbs.count,
            self.context_dim,
            self.synthetic.demand_range,
            self.synthetic.noise_std,
            self.synthetic.holder_l,
            self.alpha,
            self.seed,
            cells,
            self.synthetic.active_cells_per_sbs,
        ))
    }

    /// Instantiate the configured policy roster for one replication.
    pub fn build_policies(
        &self,
        model: &EdgeModel,
        replication: u64,
    ) -> Result<Vec<Box<dyn Policy>>, ConfigError> {
        let shared = Arc::new(model.clone());
        let params = self.designed_params();
        self.policies
            .iter()
            .enumerate()
            .map(|(index, name)| {
                let kind = parse_policy_name(name)
                    .ok_or_else(|| ConfigError::Invalid(format!("unknown policy '{name}'")))?;
                let seed = rng::stream_seed(self.seed, &[TAG_POLICY_SEED, replication, index as u64]);
                build_policy(kind, name, &shared, params, self.solver, seed, self.context_dim)
                    .map_err(ConfigError::from)
            })
            .collect()
    }
}

/// Recognized policy names.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PolicyKind {
    Oracle,
    Coerr,
    CoerrOrx(f64),
    Cucb,
    LinUcb,
    Random,
}

pub fn parse_policy_name(name: &str) -> Option<PolicyKind> {
    match name {
        "oracle" => Some(PolicyKind::Oracle),
        "coerr" => Some(PolicyKind::Coerr),
        "cucb" => Some(PolicyKind::Cucb),
        "linucb" => Some(PolicyKind::LinUcb),
        "random" => Some(PolicyKind::Random),
        other => {
            let capacity: f64 = other.strip_prefix("coerr-or")?.parse().ok()?;
            (capacity > 0.0).then_some(PolicyKind::CoerrOrx(capacity))
        }
    }
}

fn build_policy(
    kind: PolicyKind,
    name: &str,
    model: &Arc<EdgeModel>,
    params: CoerrParams,
    solver: Solver,
    seed: u64,
    context_dim: usize,
) -> Result<Box<dyn Policy>, PolicyError> {
    Ok(match kind {
        PolicyKind::Oracle => Box::new(OraclePolicy::new(name, Arc::clone(model), solver)),
        PolicyKind::Coerr => Box::new(CoerrPolicy::new(name, Arc::clone(model), params, solver)?),
        PolicyKind::CoerrOrx(capacity) => Box::new(CoerrPolicy::fixed_capacity(
            name, model, capacity, params, solver,
        )?),
        PolicyKind::Cucb => Box::new(CucbPolicy::new(name, Arc::clone(model))?),
        PolicyKind::LinUcb => Box::new(LinUcbPolicy::new(
            name,
            Arc::clone(model),
            context_dim,
            LinUcbConfig::default(),
        )?),
        PolicyKind::Random => Box::new(RandomPolicy::new(name, Arc::clone(model), seed)?),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_uses_reference_defaults() {
        let cfg = ExperimentConfig::from_toml("mode = \"synthetic\"").unwrap();
        assert_eq!(cfg.horizon, 2700);
        assert_eq!(cfg.budget, 8.0);
        assert_eq!(cfg.sbs.count, 5);
        assert_eq!(cfg.designed_params().cells_per_dim, 5);
        let model = cfg.build_model().unwrap();
        assert_eq!(model.n_sbs(), 5);
        assert_eq!(model.max_admission_cap(), 900.0);
    }

    #[test]
    fn unknown_keys_rejected() {
        let err = ExperimentConfig::from_toml("mode = \"synthetic\"\nbananas = 3").unwrap_err();
        assert!(matches!(err, ConfigError::Parse(_)));
    }

    #[test]
    fn round_trip_is_idempotent() {
        let cfg = ExperimentConfig::from_toml(
            "mode = \"synthetic\"\nseed = 7\npolicies = [\"coerr\", \"random\"]\nbudget = 12.0",
        )
        .unwrap();
        let text = cfg.to_toml();
        let back = ExperimentConfig::from_toml(&text).unwrap();
        assert_eq!(cfg, back);
        assert_eq!(text, back.to_toml());
        assert_eq!(cfg.hash(), back.hash());
    }

    #[test]
    fn trace_mode_requires_section() {
        let err = ExperimentConfig::from_toml("mode = \"trace\"").unwrap_err();
        assert!(matches!(err, ConfigError::Invalid(_)));
        let cfg = ExperimentConfig::from_toml(
            "mode = \"trace\"\n[trace]\npath = \"demo.csv\"",
        )
        .unwrap();
        assert_eq!(cfg.trace.as_ref().unwrap().slot_seconds, 10_800);
    }

    #[test]
    fn policy_names_parse() {
        assert_eq!(parse_policy_name("oracle"), Some(PolicyKind::Oracle));
        assert_eq!(parse_policy_name("coerr-or2"), Some(PolicyKind::CoerrOrx(2.0)));
        assert_eq!(parse_policy_name("coerr-or6"), Some(PolicyKind::CoerrOrx(6.0)));
        assert_eq!(parse_policy_name("thompson"), None);
        assert!(ExperimentConfig::from_toml("mode = \"synthetic\"\npolicies = [\"zzz\"]").is_err());
    }

    #[test]
    fn builds_full_roster() {
        let cfg = ExperimentConfig::from_toml(
            "mode = \"synthetic\"\npolicies = [\"oracle\", \"coerr\", \"coerr-or2\", \"cucb\", \"linucb\", \"random\"]",
        )
        .unwrap();
        let model = cfg.build_model().unwrap();
        let policies = cfg.build_policies(&model, 0).unwrap();
        assert_eq!(policies.len(), 6);
        assert_eq!(policies[2].name(), "coerr-or2");
    }

    #[test]
    fn custom_sbs_entries() {
        let cfg = ExperimentConfig::from_toml(
            r#"
mode = "synthetic"
[sbs]
count = 2
[[sbs.custom]]
rental_set = [0.0, 1.0]
price_per_unit = 3.0
[[sbs.custom]]
rental_set = [0.0, 2.0, 4.0]
uplink_rate = 1e6
"#,
        )
        .unwrap();
        let model = cfg.build_model().unwrap();
        assert_eq!(model.sbss[0].rental_set, vec![0.0, 1.0]);
        assert_eq!(model.sbss[0].price_of(1.0), 3.0);
        assert_eq!(model.sbss[1].uplink_rate, 1e6);
    }
}
