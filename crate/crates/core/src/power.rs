use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Per-node maximum transmit powers (linear): `p0` at the transmitter and one
/// entry per relay.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerBudget {
    p0: f64,
    relays: Vec<f64>,
}

impl PowerBudget {
    pub fn new(p0: f64, relays: Vec<f64>) -> Result<Self> {
        if !(p0.is_finite() && p0 > 0.0) {
            return Err(Error::InvalidArgument("transmitter power must be positive and finite"));
        }
        if relays.is_empty() {
            return Err(Error::InvalidArgument("at least one relay budget is required"));
        }
        if relays.iter().any(|p| !(p.is_finite() && *p > 0.0)) {
            return Err(Error::InvalidArgument("relay powers must be positive and finite"));
        }
        Ok(Self { p0, relays })
    }

    /// Same power `p` at the transmitter and all `relay_count` relays.
    pub fn uniform(p: f64, relay_count: usize) -> Result<Self> {
        Self::new(p, alloc::vec![p; relay_count])
    }

    pub fn p0(&self) -> f64 {
        self.p0
    }

    pub fn relay(&self, j: usize) -> f64 {
        self.relays[j]
    }

    pub fn relays(&self) -> &[f64] {
        &self.relays
    }

    pub fn relay_count(&self) -> usize {
        self.relays.len()
    }
}

/// Output of every allocator: amplitude fractions of each node's budget.
///
/// The transmitter spends `alpha0² · P0` in the first step and `beta0² · P0`
/// in the second; relay `j` spends `alpha[j]² · P_j`. `snr` is the linear
/// receive SNR the allocator reports for its own objective, and `i0` is the
/// number of relays at full power.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerAllocation {
    pub alpha0: f64,
    pub beta0: f64,
    pub alpha: Vec<f64>,
    pub snr: f64,
    pub i0: usize,
}

impl PowerAllocation {
    pub(crate) fn zeros(relay_count: usize) -> Self {
        Self { alpha0: 1.0, beta0: 0.0, alpha: alloc::vec![0.0; relay_count], snr: 0.0, i0: 0 }
    }

    /// Checks `alpha0² + beta0² ≤ 1` and `0 ≤ alpha_j ≤ 1`, with `tol` slack.
    pub fn is_feasible(&self, tol: f64) -> bool {
        let tx = self.alpha0 * self.alpha0 + self.beta0 * self.beta0;
        self.alpha0 >= -tol
            && self.beta0 >= -tol
            && tx <= 1.0 + tol
            && self.alpha.iter().all(|&a| a >= -tol && a <= 1.0 + tol)
    }
}

pub(crate) fn check_box(alpha: &[f64]) -> Result<()> {
    if alpha.iter().all(|a| (0.0..=1.0).contains(a)) {
        Ok(())
    } else {
        Err(Error::InvalidArgument("relay power fractions must lie in [0, 1]"))
    }
}
