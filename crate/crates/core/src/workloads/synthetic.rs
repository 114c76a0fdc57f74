use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::Distribution;

use super::{GammaParams, LoadMatrix};
use crate::error::{Error, Result};
use crate::model::SlaVector;

/// Gamma shape of every synthetic demand.
pub const SYNTHETIC_SHAPE: f64 = 2000.0;

/// Demand pattern of one period. User indices are 0-based.
#[derive(Debug, Clone, PartialEq)]
pub enum PeriodSpec {
    /// `bulk` drops one large job at the first step of the period, sized
    /// `(period length) * Gamma(k, share/k)` with `share = beta(bulk) / (beta(bulk) + beta(steady))`.
    /// `steady` then demands `Gamma(k, share'/k)` on every later step, `share'` its own SLA share of the pair.
    Proportional { bulk: usize, steady: usize },
    /// Each listed user demands `Gamma(k, mean/k)` every step.
    Uniform { users: Vec<usize>, mean: f64 },
}

impl PeriodSpec {
    fn users(&self) -> Vec<usize> {
        match self {
            PeriodSpec::Proportional { bulk, steady } => vec![*bulk, *steady],
            PeriodSpec::Uniform { users, .. } => users.clone(),
        }
    }
}

/// Equal-length periods played back to back.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSchedule {
    pub periods: Vec<PeriodSpec>,
    pub shape: f64,
}

impl SyntheticSchedule {
    /// The three-user schedule: SLA-proportional demand from the pairs
    /// (2,3), (1,2), (1,3), then mean-1/2 demand from the same pairs.
    pub fn three_user() -> Self {
        use PeriodSpec::*;
        let pairs = [(1, 2), (0, 1), (0, 2)];
        let mut periods: Vec<PeriodSpec> = pairs
            .iter()
            .map(|&(bulk, steady)| Proportional { bulk, steady })
            .collect();
        periods.extend(pairs.iter().map(|&(a, b)| Uniform {
            users: vec![a, b],
            mean: 0.5,
        }));
        Self {
            periods,
            shape: SYNTHETIC_SHAPE,
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if self.periods.is_empty() {
            return Err(Error::Config("synthetic schedule has no periods".into()));
        }
        if !(self.shape > 0.0) {
            return Err(Error::Config(format!(
                "Gamma shape must be positive, got {}",
                self.shape
            )));
        }
        for (k, p) in self.periods.iter().enumerate() {
            if let Some(u) = p.users().into_iter().find(|&u| u >= n) {
                return Err(Error::Config(format!(
                    "period {} names user {} but there are only {n} users",
                    k + 1,
                    u + 1
                )));
            }
            match p {
                PeriodSpec::Proportional { bulk, steady } if bulk == steady => {
                    return Err(Error::Config(format!(
                        "period {} uses user {} as both bulk and steady user",
                        k + 1,
                        bulk + 1
                    )))
                }
                PeriodSpec::Uniform { mean, .. } if !(*mean > 0.0 && mean.is_finite()) => {
                    return Err(Error::Config(format!("period {} has non-positive mean {mean}", k + 1)))
                }
                _ => {}
            }
        }
        Ok(())
    }
}

/// Generates the synthetic Gamma workload. A fixed seed always gives the same matrix.
pub fn synthetic_gamma(sla: &SlaVector, steps: usize, seed: u64, schedule: &SyntheticSchedule) -> Result<LoadMatrix> {
    let n = sla.len();
    schedule.validate(n)?;
    let periods = schedule.periods.len();
    if steps == 0 || steps % periods != 0 {
        return Err(Error::Config(format!(
            "synthetic horizon must be a positive multiple of {periods}, got {steps}"
        )));
    }
    let len = steps / periods;
    let k = schedule.shape;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut data = vec![0.0; steps * n];

    for (p, spec) in schedule.periods.iter().enumerate() {
        let start = p * len;
        match spec {
            PeriodSpec::Proportional { bulk, steady } => {
                let pair = sla[*bulk] + sla[*steady];
                if !(pair > 0.0) {
                    return Err(Error::Config(format!(
                        "period {} pairs users {} and {} whose SLAs sum to zero",
                        p + 1,
                        bulk + 1,
                        steady + 1
                    )));
                }
                let big = GammaParams::with_mean(k, sla[*bulk] / pair)?.distribution();
                let small = GammaParams::with_mean(k, sla[*steady] / pair)?;
                data[start * n + bulk] = len as f64 * big.sample(&mut rng);
                if sla[*steady] > 0.0 {
                    let small = small.distribution();
                    for t in start + 1..start + len {
                        data[t * n + steady] = small.sample(&mut rng);
                    }
                }
            }
            PeriodSpec::Uniform { users, mean } => {
                let d = GammaParams::with_mean(k, *mean)?.distribution();
                for t in start..start + len {
                    for &u in users {
                        data[t * n + u] = d.sample(&mut rng);
                    }
                }
            }
        }
    }
    LoadMatrix::from_flat(n, data)
}
