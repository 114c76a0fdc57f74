use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{sample_gamma, GammaParams, LoadMatrix};
use crate::error::{Error, Result};

/// Bernoulli-Gamma demands used for randomized invariant testing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FuzzParams {
    pub n: usize,
    pub steps: usize,
    pub seed: u64,
    /// Probability that a user demands anything in a step.
    pub p: f64,
    /// Mean of a non-zero demand.
    pub mean: f64,
}

impl FuzzParams {
    /// `p = 1/2` and a mean of `2/N`, so the expected total demand per step is 1.
    pub fn balanced(n: usize, steps: usize, seed: u64) -> Self {
        Self {
            n,
            steps,
            seed,
            p: 0.5,
            mean: 2.0 / n as f64,
        }
    }
}

/// Each user independently demands `Gamma(2, mean/2)` with probability `p`, else nothing.
pub fn fuzz_loads(params: &FuzzParams) -> Result<LoadMatrix> {
    if params.n == 0 || params.steps == 0 {
        return Err(Error::Config("fuzz loads need N >= 1 and T >= 1".into()));
    }
    if !(0.0..=1.0).contains(&params.p) {
        return Err(Error::Config(format!("p must lie in [0, 1], got {}", params.p)));
    }
    let gamma = GammaParams::with_mean(2.0, params.mean)?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut data = Vec::with_capacity(params.n * params.steps);
    for _ in 0..params.n * params.steps {
        let on = rng.random_bool(params.p);
        data.push(if on { sample_gamma(&gamma, &mut rng) } else { 0.0 });
    }
    LoadMatrix::from_flat(params.n, data)
}
