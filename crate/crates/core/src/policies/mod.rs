//! Online allocation policies.
//!
//! A policy sees only the active set of each step and its own state. The
//! engine calls [`Policy::decide`] once per step; the returned allocation is
//! the one applied to that step.

mod baseline;
mod monitor;
mod mw;
mod owm;

use std::collections::BTreeMap;

pub use baseline::{proportional_online, OnlineProportional, StaticPolicy};
pub use monitor::{Lemma, LemmaMonitor, LemmaReport, LemmaViolation, MonitorMode};
pub use mw::{MwPolicy, MwVariant};
pub use owm::{Bucket, OwmPolicy};

use crate::error::{Error, Result};
use crate::model::{ActiveSet, Allocation, PolicyParams, SlaVector};

pub trait Policy: Send {
    fn name(&self) -> &str;

    fn n(&self) -> usize;

    /// Allocation for the current step, given the users whose queues are non-empty.
    fn decide(&mut self, active: &ActiveSet) -> Result<Allocation>;

    /// An independent copy of the current state.
    fn fork(&self) -> Box<dyn Policy>;

    fn params(&self) -> Option<PolicyParams> {
        None
    }

    fn lemma_report(&self) -> Option<&LemmaReport> {
        None
    }
}

/// Online policies that can be built from a [`PolicySpec`].
pub const ONLINE_POLICIES: [&str; 5] = ["alg1", "alg2", "static", "po", "owm"];

/// A policy named by data, as it appears in experiment configs.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PolicySpec {
    pub name: String,
    pub params: BTreeMap<String, f64>,
}

impl PolicySpec {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            params: BTreeMap::new(),
        }
    }

    pub fn with(mut self, key: &str, value: f64) -> Self {
        self.params.insert(key.to_string(), value);
        self
    }
}

/// Instantiates an online policy. The multiplicative-weight policies take
/// `epsilon`, `eta` and optionally `lambda`; the others take no parameters.
pub fn build_policy(spec: &PolicySpec, sla: &SlaVector, monitor: MonitorMode) -> Result<Box<dyn Policy>> {
    let allowed: &[&str] = match spec.name.as_str() {
        "alg1" | "alg2" => &["epsilon", "eta", "lambda"],
        "static" | "po" | "owm" => &[],
        other => {
            return Err(Error::Config(format!(
                "unknown policy '{other}', expected one of {}",
                ONLINE_POLICIES.join(", ")
            )))
        }
    };
    if let Some(key) = spec.params.keys().find(|k| !allowed.contains(&k.as_str())) {
        return Err(Error::Config(format!(
            "policy '{}' does not take parameter '{key}'",
            spec.name
        )));
    }
    let policy: Box<dyn Policy> = match spec.name.as_str() {
        "alg1" | "alg2" => {
            let get = |k: &str| {
                spec.params
                    .get(k)
                    .copied()
                    .ok_or_else(|| Error::Config(format!("policy '{}' needs parameter '{k}'", spec.name)))
            };
            let mut params = PolicyParams::new(get("epsilon")?, get("eta")?, sla.len())?;
            if let Some(&l) = spec.params.get("lambda") {
                params = params.with_lambda(l)?;
            }
            let variant = if spec.name == "alg1" {
                MwVariant::Basic
            } else {
                MwVariant::Proportional
            };
            Box::new(MwPolicy::new(sla.clone(), params, variant)?.with_monitor(monitor))
        }
        "static" => Box::new(StaticPolicy::new(sla.clone())),
        "po" => Box::new(OnlineProportional::new(sla.clone())),
        _ => Box::new(OwmPolicy::new(sla.len())),
    };
    Ok(policy)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factory_builds_every_online_policy() {
        let sla = SlaVector::new(vec![0.2, 0.3, 0.5]).unwrap();
        for name in ONLINE_POLICIES {
            let mut spec = PolicySpec::new(name);
            if name.starts_with("alg") {
                spec = spec.with("epsilon", 0.05).with("eta", 0.2);
            }
            let mut p = build_policy(&spec, &sla, MonitorMode::Off).unwrap();
            assert_eq!(p.name(), name);
            let h = p.decide(&ActiveSet::all(3)).unwrap();
            assert_eq!(h.len(), 3);
        }
    }

    #[test]
    fn factory_rejects_unknown_names_and_params() {
        let sla = SlaVector::uniform(2).unwrap();
        let err = build_policy(&PolicySpec::new("nope"), &sla, MonitorMode::Off)
            .err()
            .unwrap();
        assert!(err.to_string().contains("nope"));
        let spec = PolicySpec::new("static").with("eta", 0.1);
        let err = build_policy(&spec, &sla, MonitorMode::Off).err().unwrap();
        assert!(err.to_string().contains("eta"));
        let spec = PolicySpec::new("alg1").with("epsilon", 0.1);
        let err = build_policy(&spec, &sla, MonitorMode::Off).err().unwrap();
        assert!(err.to_string().contains("eta"));
    }

    #[test]
    fn lambda_override_is_flagged() {
        let sla = SlaVector::uniform(2).unwrap();
        let spec = PolicySpec::new("alg2")
            .with("epsilon", 0.1)
            .with("eta", 0.3)
            .with("lambda", 0.5);
        let p = build_policy(&spec, &sla, MonitorMode::Off).unwrap();
        assert!(!p.params().unwrap().canonical_lambda);
    }
}
