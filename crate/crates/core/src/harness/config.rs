use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::classification::ClassifierParams;
use crate::decision::DecisionParams;
use crate::diffusion::check_stepsize_stability;
use crate::error::{Error, Result};
use crate::markov::EXACT_AGENT_CAP;
use crate::mobility::MotionParams;
use crate::network::{ModelPair, Topology};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    StaticTwoModel,
    Fish,
    ChainSweep,
    ClassifyBench,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    Conventional,
    Modified,
    ModifiedFastWeights,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CombinationRule {
    Uniform,
    Fast,
}

/// Parameters of the Markov-chain sweep scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChainSweepConfig {
    pub agents: Vec<usize>,
    pub k_max: u32,
    /// Also build exact chains on complete graphs of these sizes.
    pub exact_agents: Vec<usize>,
}

impl Default for ChainSweepConfig {
    fn default() -> Self {
        ChainSweepConfig {
            agents: vec![4, 6, 8],
            k_max: 5,
            exact_agents: vec![],
        }
    }
}

/// Parameters of the controlled classifier benchmark.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassifyBenchConfig {
    pub samples: usize,
    pub tau_samples: usize,
    pub far_distance: f64,
    pub near_distance: f64,
    /// Noise level of the benchmark agent, in dB.
    pub noise_db: f64,
    pub oracle_trials: usize,
}

impl Default for ClassifyBenchConfig {
    fn default() -> Self {
        ClassifyBenchConfig {
            samples: 100_000,
            tau_samples: 200_000,
            far_distance: 10.0,
            near_distance: 0.01,
            noise_db: -5.0,
            oracle_trials: 100_000,
        }
    }
}

/// Mobility settings for the fish scenario.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FishConfig {
    pub motion: MotionParams,
    pub comm_radius: f64,
    /// Side of the square, centred at the origin, where agents start.
    pub init_side: f64,
    /// Radius around the agreed target that counts as arrival.
    pub arrival_radius: f64,
}

impl Default for FishConfig {
    fn default() -> Self {
        FishConfig {
            motion: MotionParams::default(),
            comm_radius: 4.5,
            init_side: 20.0,
            arrival_radius: 5.0,
        }
    }
}

/// A complete experiment description. Every field has a default, so a
/// config file only needs the values it changes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub kind: ScenarioKind,
    pub agents: usize,
    pub models: ModelPair,
    /// Agents `0..split` observe `w0`, the rest `w1`.
    pub split: usize,
    pub strategy: Strategy,
    pub combination: CombinationRule,
    pub mu: f64,
    pub nu: f64,
    pub alpha: f64,
    pub eta: f64,
    #[serde(rename = "K")]
    pub k: u32,
    pub beta: [f64; 2],
    pub iterations: usize,
    pub replicas: usize,
    pub seed: u64,
    pub mean_degree: f64,
    pub ru_range: (f64, f64),
    pub noise_db_range: (f64, f64),
    /// Explicit topology; drawn at random from `seed` when absent.
    pub topology: Option<Topology>,
    /// Every agent keeps its own direction table for its neighbors unless
    /// this is set, in which case agents share their own estimate.
    pub share_directions: bool,
    /// Record beliefs of the first replica every this many iterations.
    pub belief_stride: Option<usize>,
    pub fish: FishConfig,
    pub chain: ChainSweepConfig,
    pub bench: ClassifyBenchConfig,
    pub output: Option<PathBuf>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            kind: ScenarioKind::StaticTwoModel,
            agents: 40,
            models: ModelPair::from_slices(&[5.0, -5.0, 5.0, 5.0], &[5.0, 5.0, -5.0, 5.0]).expect("distinct"),
            split: 20,
            strategy: Strategy::Modified,
            combination: CombinationRule::Uniform,
            mu: 0.005,
            nu: 0.05,
            alpha: 0.95,
            eta: 1.0,
            k: 4,
            beta: [1.0, 1.0],
            iterations: 5000,
            replicas: 50,
            seed: 1,
            mean_degree: 5.0,
            ru_range: (1.0, 2.0),
            noise_db_range: (-35.0, -5.0),
            topology: None,
            share_directions: false,
            belief_stride: None,
            fish: FishConfig::default(),
            chain: ChainSweepConfig::default(),
            bench: ClassifyBenchConfig::default(),
            output: None,
        }
    }
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ScenarioConfig = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn classifier(&self) -> ClassifierParams {
        ClassifierParams {
            nu: self.nu,
            eta: self.eta,
            alpha: self.alpha,
        }
    }

    pub fn decision(&self) -> DecisionParams {
        DecisionParams {
            k: self.k,
            beta: self.beta,
        }
    }

    /// Fast weights follow from either the strategy or the rule.
    pub fn uses_fast_weights(&self) -> bool {
        self.strategy == Strategy::ModifiedFastWeights || self.combination == CombinationRule::Fast
    }

    pub fn validate(&self) -> Result<()> {
        let cfg_err = |msg: String| -> Result<()> { Err(Error::Config(msg)) };
        match self.kind {
            ScenarioKind::ChainSweep => return self.validate_chain(),
            ScenarioKind::ClassifyBench => return self.validate_bench(),
            _ => {}
        }
        if self.agents < 2 {
            return cfg_err(format!("need at least 2 agents, got {}", self.agents));
        }
        if self.split > self.agents {
            return cfg_err(format!("split {} exceeds agent count {}", self.split, self.agents));
        }
        if self.iterations == 0 || self.replicas == 0 {
            return cfg_err("iterations and replicas must be positive".into());
        }
        if !(self.mu > 0.0) || !self.mu.is_finite() {
            return cfg_err(format!("mu must be positive, got {}", self.mu));
        }
        self.classifier().validate().map_err(into_config)?;
        self.decision().validate().map_err(into_config)?;
        if self.strategy == Strategy::Conventional && self.combination == CombinationRule::Fast {
            return cfg_err("fast combination weights need the modified strategy".into());
        }
        if self.belief_stride == Some(0) {
            return cfg_err("belief_stride must be positive".into());
        }
        if let Some(t) = &self.topology {
            if t.len() != self.agents {
                return cfg_err(format!("topology has {} agents, config has {}", t.len(), self.agents));
            }
        } else if !(self.mean_degree >= 2.0) {
            return cfg_err(format!("mean_degree must be at least 2, got {}", self.mean_degree));
        }
        match self.kind {
            ScenarioKind::StaticTwoModel => {
                let (lo, hi) = self.ru_range;
                if !(lo > 0.0 && hi >= lo && hi.is_finite()) {
                    return cfg_err(format!("ru_range must satisfy 0 < lo <= hi, got {:?}", self.ru_range));
                }
                if self.noise_db_range.1 < self.noise_db_range.0 {
                    return cfg_err(format!("bad noise_db_range {:?}", self.noise_db_range));
                }
                // the largest possible covariance eigenvalue is hi
                let worst = nalgebra::DMatrix::from_element(1, 1, hi);
                if !check_stepsize_stability(self.mu, &worst) {
                    return cfg_err(format!(
                        "step-size mu = {} violates 0 < mu < 2 / rho(R_u) = {} for covariance entries up to {hi}",
                        self.mu,
                        2.0 / hi
                    ));
                }
            }
            ScenarioKind::Fish => {
                if self.models.dim() != 2 {
                    return cfg_err("fish targets must be planar (length 2)".into());
                }
                self.fish.motion.validate().map_err(into_config)?;
                if !(self.fish.comm_radius > 0.0 && self.fish.init_side > 0.0 && self.fish.arrival_radius > 0.0) {
                    return cfg_err("comm_radius, init_side and arrival_radius must be positive".into());
                }
                // bearings are unit vectors, so rho(R_u) <= 1
                if self.mu >= 2.0 {
                    return cfg_err(format!("step-size mu = {} violates mu < 2 for unit regressors", self.mu));
                }
            }
            _ => unreachable!(),
        }
        Ok(())
    }

    fn validate_chain(&self) -> Result<()> {
        if self.chain.agents.is_empty() && self.chain.exact_agents.is_empty() {
            return Err(Error::Config("chain sweep needs at least one network size".into()));
        }
        if let Some(&n) = self.chain.agents.iter().find(|&&n| n <= 2) {
            return Err(Error::Config(format!("mean-field sweep needs N > 2, got {n}")));
        }
        if let Some(&n) = self.chain.exact_agents.iter().find(|&&n| !(2..=EXACT_AGENT_CAP).contains(&n)) {
            return Err(Error::Config(format!("exact chains need 2 <= N <= {EXACT_AGENT_CAP}, got {n}")));
        }
        if self.chain.k_max < 2 {
            return Err(Error::Config("k_max must be at least 2".into()));
        }
        Ok(())
    }

    fn validate_bench(&self) -> Result<()> {
        self.classifier().validate().map_err(into_config)?;
        let b = &self.bench;
        if b.samples < 1000 || b.tau_samples < 10_000 || b.oracle_trials < 10_000 {
            return Err(Error::Config(
                "bench needs samples >= 1000, tau_samples >= 10000, oracle_trials >= 10000".into(),
            ));
        }
        if !(b.far_distance > 0.0 && b.near_distance > 0.0) {
            return Err(Error::Config("benchmark distances must be positive".into()));
        }
        if !(self.mu > 0.0) {
            return Err(Error::Config("mu must be positive".into()));
        }
        Ok(())
    }

    /// Named experiment presets.
    pub fn preset(name: &str) -> Result<Self> {
        let base = ScenarioConfig::default();
        let cfg = match name {
            "fig5" => base,
            "fig6" => ScenarioConfig {
                replicas: 1,
                iterations: 1000,
                belief_stride: Some(1),
                ..base
            },
            "fig8" => ScenarioConfig { k: 1, ..base },
            "fig9" => ScenarioConfig {
                strategy: Strategy::ModifiedFastWeights,
                combination: CombinationRule::Fast,
                ..base
            },
            "fig14" => ScenarioConfig {
                kind: ScenarioKind::Fish,
                models: ModelPair::from_slices(&[10.0, 10.0], &[-10.0, 10.0]).expect("distinct"),
                mu: FISH_MU,
                iterations: 2500,
                replicas: 1,
                ..base
            },
            "chain" => ScenarioConfig {
                kind: ScenarioKind::ChainSweep,
                ..base
            },
            "classify" => ScenarioConfig {
                kind: ScenarioKind::ClassifyBench,
                ..base
            },
            other => {
                return Err(Error::Config(format!(
                    "unknown preset '{other}' (expected fig5, fig6, fig8, fig9, fig14, chain, classify)"
                )))
            }
        };
        Ok(cfg)
    }
}

/// Estimation step-size for the fish scenario.
pub const FISH_MU: f64 = 0.02;

fn into_config(e: Error) -> Error {
    match e {
        Error::InvalidParameter(m) => Error::Config(m),
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_encode_reference_setup() {
        let c = ScenarioConfig::preset("fig5").unwrap();
        assert_eq!(c.agents, 40);
        assert_eq!(c.models.dim(), 4);
        assert_eq!(c.models.get(0).as_slice(), &[5.0, -5.0, 5.0, 5.0]);
        assert_eq!(c.models.get(1).as_slice(), &[5.0, 5.0, -5.0, 5.0]);
        assert_eq!(c.split, 20);
        assert_eq!((c.mu, c.nu, c.alpha, c.eta, c.k), (0.005, 0.05, 0.95, 1.0, 4));
        assert_eq!(c.ru_range, (1.0, 2.0));
        assert_eq!(c.noise_db_range, (-35.0, -5.0));
        assert_eq!(c.combination, CombinationRule::Uniform);
        for name in ["fig5", "fig6", "fig8", "fig9", "fig14", "chain", "classify"] {
            ScenarioConfig::preset(name).unwrap().validate().unwrap();
        }
        assert_eq!(ScenarioConfig::preset("fig8").unwrap().k, 1);
        assert!(ScenarioConfig::preset("fig9").unwrap().uses_fast_weights());
        assert!(ScenarioConfig::preset("fig7").is_err());
    }

    #[test]
    fn json_partial_config() {
        let c = ScenarioConfig::from_json(r#"{"agents": 10, "split": 5, "K": 1, "models": [[1, 0], [0, 1]]}"#).unwrap();
        assert_eq!(c.agents, 10);
        assert_eq!(c.k, 1);
        assert_eq!(c.models.dim(), 2);
        assert_eq!(c.mu, 0.005);
    }

    #[test]
    fn json_rejections() {
        assert!(matches!(ScenarioConfig::from_json(r#"{"agnets": 10}"#), Err(Error::Config(_))));
        assert!(matches!(ScenarioConfig::from_json(r#"{"mu": 1.5}"#), Err(Error::Config(_))));
        assert!(ScenarioConfig::from_json(r#"{"models": [[1, 0], [1, 0]]}"#).is_err());
        assert!(ScenarioConfig::from_json(r#"{"split": 41}"#).is_err());
        assert!(ScenarioConfig::from_json(r#"{"alpha": 1.0}"#).is_err());
        assert!(ScenarioConfig::from_json(r#"{"strategy": "conventional", "combination": "fast"}"#).is_err());
        assert!(ScenarioConfig::from_json(r#"{"kind": "chain_sweep", "chain": {"agents": [2]}}"#).is_err());
    }

    #[test]
    fn roundtrip() {
        let c = ScenarioConfig::preset("fig14").unwrap();
        let back = ScenarioConfig::from_json(&serde_json::to_string(&c).unwrap()).unwrap();
        assert_eq!(c, back);
    }
}
