//! Configuration layers: file < environment < flags.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use seq_outlier::harness::{DataModel, TrialPlan};
use seq_outlier::spam::{FeatureSelector, QuantizerStrategy};
use seq_outlier::{Distribution, Horizon, Hypothesis, Knowledge, Model, TestConfig};

/// Reads a config layer from TOML, JSON, or the provenance of an artifact
/// written earlier (a `# config:` line or a JSON `provenance` block).
pub fn load_layer<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read config file {}", path.display()))?;
    let mut value = if let Some(v) = seq_outlier::harness::Provenance::read_config(&text) {
        v
    } else if text.trim_start().starts_with('{') {
        let v: serde_json::Value =
            serde_json::from_str(&text).with_context(|| format!("invalid JSON in {}", path.display()))?;
        match v.get("provenance").and_then(|p| p.get("config")) {
            Some(c) => c.clone(),
            None => v,
        }
    } else {
        toml::from_str(&text).with_context(|| format!("invalid TOML in {}", path.display()))?
    };
    if let Some(obj) = value.as_object_mut() {
        obj.remove("command");
    }
    serde_json::from_value(value).with_context(|| format!("invalid config in {}", path.display()))
}

pub fn read_distribution(path: &Path) -> Result<Distribution> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read distribution file {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("invalid distribution in {}", path.display()))
}

/// Settings shared by `simulate` and `sweep`; every field optional so that
/// layers can be merged.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunLayer {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<Model>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub knowledge: Option<Knowledge>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub thresholds: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub horizon: Option<Horizon>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu: Option<Vec<Distribution>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pi: Option<Distribution>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub null_tail_tolerance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub truth: Option<Hypothesis>,
}

macro_rules! overlay {
    ($base:expr, $top:expr, $($f:ident),*) => {
        RunLayer { $($f: $top.$f.or($base.$f)),* }
    };
}

impl RunLayer {
    /// Fields of `top` win over fields of `self`.
    pub fn overlay(self, top: RunLayer) -> RunLayer {
        overlay!(self, top, m, k, model, knowledge, thresholds, horizon, mu, pi, trials, seed, null_tail_tolerance, truth)
    }

    fn defaults() -> RunLayer {
        RunLayer {
            m: Some(5),
            k: Some(2),
            model: Some(Model::Identical),
            knowledge: Some(Knowledge::Universal),
            thresholds: Some(vec![std::f64::consts::E.powi(2)]),
            horizon: Some(Horizon::default()),
            mu: None,
            pi: Some(Distribution::new(vec![0.2, 0.8]).expect("valid")),
            trials: Some(1000),
            seed: Some(0),
            null_tail_tolerance: Some(seq_outlier::harness::DEFAULT_NULL_TAIL_TOLERANCE),
            truth: None,
        }
    }

    /// Fills every gap with defaults; the result is what provenance records.
    pub fn resolve(self) -> Result<RunLayer> {
        let mut r = RunLayer::defaults().overlay(self);
        let model = r.model.expect("defaulted");
        let k = r.k.expect("defaulted");
        if r.mu.is_none() {
            let default_mus = match model {
                Model::Identical => vec![vec![0.8, 0.2]],
                Model::Distinct => [0.9, 0.7, 0.8, 0.6, 0.85, 0.75]
                    .iter()
                    .cycle()
                    .take(k)
                    .map(|&p| vec![p, 1.0 - p])
                    .collect(),
            };
            r.mu = Some(
                default_mus
                    .into_iter()
                    .map(Distribution::new)
                    .collect::<seq_outlier::Result<Vec<_>>>()?,
            );
        }
        if r.truth.is_none() {
            r.truth = Some(Hypothesis::new((0..k).collect())?);
        }
        Ok(r)
    }

    pub fn thresholds(&self) -> &[f64] {
        self.thresholds.as_deref().unwrap_or(&[])
    }

    /// Builds the library plan from a resolved layer.
    pub fn plan(&self) -> Result<TrialPlan> {
        let (m, k) = (self.m.unwrap_or(5), self.k.unwrap_or(2));
        let model = self.model.unwrap_or(Model::Identical);
        let knowledge = self.knowledge.unwrap_or(Knowledge::Universal);
        let pi = self.pi.clone().context("missing pi")?;
        let mus = self.mu.clone().context("missing mu")?;
        let first = *self.thresholds().first().context("no thresholds given")?;
        let data = match model {
            Model::Identical => {
                if mus.len() != 1 {
                    bail!("the identical model takes one outlier distribution, got {}", mus.len());
                }
                DataModel::Identical { mu: mus[0].clone(), pi: pi.clone() }
            }
            Model::Distinct => DataModel::Distinct { mus: mus.clone(), pi: pi.clone() },
        };
        let mut config = TestConfig::universal(m, k, model, pi.len(), first);
        config.horizon = self.horizon.unwrap_or_default();
        match knowledge {
            Knowledge::Universal => {}
            Knowledge::PiKnown => config = config.with_pi(pi),
            Knowledge::BothKnown => config = config.with_mu_pi(mus[0].clone(), pi),
        }
        let mut plan = TrialPlan::new(config, data, self.trials.unwrap_or(1000), self.seed.unwrap_or(0));
        plan.null_tail_tolerance = match self.null_tail_tolerance {
            Some(t) if t > 0.0 => Some(t),
            Some(_) => None,
            None => plan.null_tail_tolerance,
        };
        Ok(plan)
    }
}

/// Settings of the `spam` subcommand.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpamLayer {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub data: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub feature: Option<FeatureSelector>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub strategy: Option<QuantizerStrategy>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub thresholds: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub swap_pools: Option<bool>,
}

impl SpamLayer {
    pub fn overlay(self, top: SpamLayer) -> SpamLayer {
        SpamLayer {
            data: top.data.or(self.data),
            feature: top.feature.or(self.feature),
            strategy: top.strategy.or(self.strategy),
            thresholds: top.thresholds.or(self.thresholds),
            trials: top.trials.or(self.trials),
            seed: top.seed.or(self.seed),
            swap_pools: top.swap_pools.or(self.swap_pools),
        }
    }

    pub fn resolve(self) -> Result<SpamLayer> {
        let defaults = SpamLayer {
            data: None,
            feature: Some(FeatureSelector::default()),
            strategy: Some(QuantizerStrategy::default()),
            thresholds: Some(vec![3.98, 4.0, 4.05, 4.1]),
            trials: Some(1000),
            seed: Some(0),
            swap_pools: Some(false),
        };
        let r = defaults.overlay(self);
        if r.data.is_none() {
            bail!("no data file given (use --data)");
        }
        Ok(r)
    }
}
