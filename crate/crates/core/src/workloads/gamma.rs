use rand::Rng;
use rand_distr::{Distribution, Gamma};

use crate::error::{Error, Result};

/// Shape-scale parameters of a Gamma distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaParams {
    pub shape: f64,
    pub scale: f64,
}

impl GammaParams {
    pub fn new(shape: f64, scale: f64) -> Result<Self> {
        if !(shape > 0.0 && shape.is_finite() && scale > 0.0 && scale.is_finite()) {
            return Err(Error::Domain(format!(
                "Gamma needs positive finite shape and scale, got k={shape}, theta={scale}"
            )));
        }
        Ok(Self { shape, scale })
    }

    /// Shape `k` with scale chosen so the mean is `mean`.
    pub fn with_mean(shape: f64, mean: f64) -> Result<Self> {
        Self::new(shape, mean / shape)
    }

    pub fn mean(&self) -> f64 {
        self.shape * self.scale
    }

    pub fn variance(&self) -> f64 {
        self.shape * self.scale * self.scale
    }

    pub fn distribution(&self) -> Gamma<f64> {
        Gamma::new(self.shape, self.scale).expect("parameters validated on construction")
    }
}

/// One draw from `Gamma(k, theta)`.
pub fn sample_gamma<R: Rng + ?Sized>(params: &GammaParams, rng: &mut R) -> f64 {
    params.distribution().sample(rng)
}
