use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// RMSProp hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RmsProp {
    pub lr: f64,
    pub rho: f64,
    pub eps: f64,
}

impl Default for RmsProp {
    fn default() -> Self {
        RmsProp {
            lr: 1e-3,
            rho: 0.9,
            eps: 1e-7,
        }
    }
}

/// Running mean of squared gradients, one accumulator per parameter.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct OptimState {
    pub acc: Vec<Vec<f64>>,
    pub steps: u64,
}

impl OptimState {
    pub fn for_shapes<'a>(blocks: impl IntoIterator<Item = &'a [f64]>) -> Self {
        OptimState {
            acc: blocks.into_iter().map(|b| vec![0.0; b.len()]).collect(),
            steps: 0,
        }
    }
}

impl RmsProp {
    /// `acc <- rho * acc + (1 - rho) * g^2`, then
    /// `param <- param - lr * g / (sqrt(acc) + eps)`, elementwise.
    pub fn step(
        &self,
        params: &mut [&mut [f64]],
        grads: &[&[f64]],
        state: &mut OptimState,
    ) -> Result<()> {
        if params.len() != grads.len() {
            return Err(Error::dim("gradient blocks", params.len(), grads.len()));
        }
        if state.acc.is_empty() && state.steps == 0 {
            *state = OptimState::for_shapes(params.iter().map(|p| &**p));
        }
        if state.acc.len() != params.len() {
            return Err(Error::dim("optimizer state blocks", params.len(), state.acc.len()));
        }
        for ((p, g), a) in params.iter().zip(grads).zip(&state.acc) {
            if p.len() != g.len() {
                return Err(Error::dim("gradient block length", p.len(), g.len()));
            }
            if p.len() != a.len() {
                return Err(Error::dim("optimizer state length", p.len(), a.len()));
            }
            if g.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite("gradient".into()));
            }
        }
        for ((p, g), a) in params.iter_mut().zip(grads).zip(state.acc.iter_mut()) {
            for ((p, &g), a) in p.iter_mut().zip(g.iter()).zip(a.iter_mut()) {
                *a = self.rho * *a + (1.0 - self.rho) * g * g;
                *p -= self.lr * g / (a.sqrt() + self.eps);
            }
        }
        state.steps += 1;
        Ok(())
    }
}
