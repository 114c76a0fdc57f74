//! SLA-driven baselines: the static split and its active-set renormalization.

use super::Policy;
use crate::error::{check_len, Error, Result};
use crate::model::{ActiveSet, Allocation, SlaVector};

/// Plays `h = beta` every step and leaves `1 - sum(beta)` idle.
#[derive(Debug, Clone)]
pub struct StaticPolicy {
    sla: SlaVector,
}

impl StaticPolicy {
    pub fn new(sla: SlaVector) -> Self {
        Self { sla }
    }
}

impl Policy for StaticPolicy {
    fn name(&self) -> &str {
        "static"
    }

    fn n(&self) -> usize {
        self.sla.len()
    }

    fn decide(&mut self, active: &ActiveSet) -> Result<Allocation> {
        check_len("active set", self.sla.len(), active.len())?;
        Ok(Allocation::from_raw(self.sla.as_slice().to_vec()))
    }

    fn fork(&self) -> Box<dyn Policy> {
        Box::new(self.clone())
    }
}

/// SLAs renormalized over `active`; the plain SLAs when nobody is active.
pub fn proportional_online(active: &ActiveSet, sla: &SlaVector) -> Result<Allocation> {
    check_len("active set", sla.len(), active.len())?;
    if active.is_none_active() {
        return Ok(Allocation::from_raw(sla.as_slice().to_vec()));
    }
    let share: f64 = active.members().map(|i| sla[i]).sum();
    if share <= 0.0 {
        return Err(Error::DegenerateSla);
    }
    Ok(Allocation::from_raw(
        (0..sla.len())
            .map(|i| if active.contains(i) { sla[i] / share } else { 0.0 })
            .collect(),
    ))
}

/// Online proportional policy. Starts at `beta`; each step plays the
/// current allocation and then renormalizes the SLAs over that step's
/// active set for the next one.
#[derive(Debug, Clone)]
pub struct OnlineProportional {
    sla: SlaVector,
    h: Allocation,
}

impl OnlineProportional {
    pub fn new(sla: SlaVector) -> Self {
        let h = Allocation::from_raw(sla.as_slice().to_vec());
        Self { sla, h }
    }
}

impl Policy for OnlineProportional {
    fn name(&self) -> &str {
        "po"
    }

    fn n(&self) -> usize {
        self.sla.len()
    }

    fn decide(&mut self, active: &ActiveSet) -> Result<Allocation> {
        let next = proportional_online(active, &self.sla)?;
        Ok(std::mem::replace(&mut self.h, next))
    }

    fn fork(&self) -> Box<dyn Policy> {
        Box::new(self.clone())
    }
}
