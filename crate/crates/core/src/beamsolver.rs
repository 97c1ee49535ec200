//! Receive-SNR maximization for networks without a direct link.
//!
//! With relays match-filtering their phases and the transmitter at full
//! power, the receive SNR for relay amplitude fractions `x ∈ [0,1]^R` is
//!
//! ```text
//! SNR(x) = P0 · ⟨b, x⟩² / (1 + ‖diag(a)·x‖²)
//! a_j = |g_j|·√P_j / √(1 + |f_j|²·P0),   b_j = |f_j|·a_j
//! ```
//!
//! Sorting relays by `φ_j = |f_j| / a_j` in descending order, the optimum
//! puts the first `i0` relays at full power and scales the rest by a common
//! factor `λ_{i0}·φ_j`, where `i0` is the first prefix length at which the
//! scan condition `λ_i < 1/φ_{τ(i+1)}` holds. Finding `i0` is one linear
//! pass after the sort.
//!
//! The same machinery, with an extra direct-link term in the numerator and a
//! transmitter fraction `α0 < 1`, drives the direct-link solvers in
//! [`crate::dlsolver`], so [`SolverWorkspace`] carries both.

use alloc::vec;
use alloc::vec::Vec;

use crate::channel::ChannelRealization;
use crate::error::{Error, Result};
use crate::power::{check_box, PowerAllocation, PowerBudget};

/// `φ = |f|·√(1 + |f|²·P0) / (|g|·√Pj)`.
///
/// A relay with `|g| = 0` or `Pj = 0` has no statistic and must be left
/// silent by the caller.
pub fn phi_statistic(f_mag: f64, g_mag: f64, p0: f64, pj: f64) -> Result<f64> {
    if f_mag < 0.0 || g_mag < 0.0 || p0 < 0.0 || pj < 0.0 {
        return Err(Error::InvalidArgument("magnitudes and powers must be non-negative"));
    }
    if g_mag == 0.0 || pj == 0.0 {
        return Err(Error::DegenerateRelay);
    }
    Ok(f_mag * libm::sqrt(1.0 + f_mag * f_mag * p0) / (g_mag * libm::sqrt(pj)))
}

fn check_shapes(ch: &ChannelRealization, budget: &PowerBudget) -> Result<()> {
    if ch.relay_count() != budget.relay_count() {
        return Err(Error::InvalidArgument("channel and budget disagree on relay count"));
    }
    Ok(())
}

/// Receive SNR of the second-step signal for a general transmitter split:
/// `P0 · (direct + α0·Σ α_i|f_i g_i|√P_i / √(1+α0²|f_i|²P0))² /
/// (1 + Σ α_i²|g_i|²P_i / (1+α0²|f_i|²P0))`, where `direct = β0·|f0|`.
pub(crate) fn beam_snr(ch: &ChannelRealization, budget: &PowerBudget, alpha0: f64, direct: f64, alpha: &[f64]) -> f64 {
    let p0 = budget.p0();
    let mut signal = 0.0;
    let mut noise = 0.0;
    for (j, &x) in alpha.iter().enumerate() {
        if x == 0.0 {
            continue;
        }
        let f = ch.f_mag(j);
        let g = ch.g_mag(j);
        let pj = budget.relay(j);
        let den = 1.0 + alpha0 * alpha0 * f * f * p0;
        signal += x * f * g * libm::sqrt(pj / den);
        noise += x * x * g * g * pj / den;
    }
    let amp = direct + alpha0 * signal;
    p0 * amp * amp / (1.0 + noise)
}

/// Receive SNR without a direct link and with the transmitter at full power.
pub fn receive_snr_no_dl(ch: &ChannelRealization, budget: &PowerBudget, alpha: &[f64]) -> Result<f64> {
    check_shapes(ch, budget)?;
    if alpha.len() != ch.relay_count() {
        return Err(Error::InvalidArgument("one power fraction per relay is required"));
    }
    check_box(alpha)?;
    Ok(beam_snr(ch, budget, 1.0, 0.0, alpha))
}

/// Per-relay coefficients and the ordered scan used by the exact solvers.
///
/// Vectors `a`, `b`, `c`, `phi` are indexed by relay. `tau` lists the
/// non-degenerate relays by descending `phi` (ties by ascending index);
/// relays with `|f| = 0` or `|g| = 0` are absent from it and stay silent.
/// `lambda[i]` is `(1 + Σ_{m<i} a²_{τ_m}) / (direct + Σ_{m<i} b_{τ_m})` for
/// `i = 0..=tau.len()`, infinite when the denominator vanishes.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverWorkspace {
    pub p0: f64,
    pub alpha0: f64,
    pub direct: f64,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    pub phi: Vec<f64>,
    pub tau: Vec<usize>,
    pub lambda: Vec<f64>,
}

impl SolverWorkspace {
    /// Workspace for the network without a direct link (`α0 = 1`).
    pub fn no_direct_link(ch: &ChannelRealization, budget: &PowerBudget) -> Result<Self> {
        Self::build(ch, budget, 1.0, 0.0)
    }

    /// Workspace for a fixed transmitter fraction `alpha0 ∈ (0, 1]` with a
    /// second-step direct link of magnitude `f0_mag`, which contributes
    /// `√(1 − α0²)·|f0|` to the coherent amplitude.
    pub fn with_direct_link(ch: &ChannelRealization, budget: &PowerBudget, f0_mag: f64, alpha0: f64) -> Result<Self> {
        if !(alpha0 > 0.0 && alpha0 <= 1.0) {
            return Err(Error::InvalidArgument("alpha0 must lie in (0, 1]"));
        }
        if !(f0_mag >= 0.0 && f0_mag.is_finite()) {
            return Err(Error::InvalidArgument("direct-link magnitude must be non-negative"));
        }
        let direct = libm::sqrt((1.0 - alpha0 * alpha0).max(0.0)) * f0_mag;
        Self::build(ch, budget, alpha0, direct)
    }

    fn build(ch: &ChannelRealization, budget: &PowerBudget, alpha0: f64, direct: f64) -> Result<Self> {
        check_shapes(ch, budget)?;
        let r = ch.relay_count();
        let p0 = budget.p0();
        let mut a = vec![0.0; r];
        let mut b = vec![0.0; r];
        let mut c = vec![0.0; r];
        let mut phi = vec![0.0; r];
        let mut tau = Vec::with_capacity(r);
        for j in 0..r {
            let f = ch.f_mag(j);
            let g = ch.g_mag(j);
            let den = libm::sqrt(1.0 + alpha0 * alpha0 * f * f * p0);
            a[j] = g * libm::sqrt(budget.relay(j)) / den;
            c[j] = alpha0 * f;
            b[j] = a[j] * c[j];
            if a[j] > 0.0 && c[j] > 0.0 {
                phi[j] = c[j] / a[j];
                tau.push(j);
            }
        }
        // Stable sort keeps ascending relay index among equal φ.
        tau.sort_by(|&l, &m| phi[m].total_cmp(&phi[l]));

        let mut lambda = Vec::with_capacity(tau.len() + 1);
        let (mut sum_a2, mut sum_b) = (0.0, 0.0);
        for i in 0..=tau.len() {
            let den = direct + sum_b;
            lambda.push(if den > 0.0 { (1.0 + sum_a2) / den } else { f64::INFINITY });
            if let Some(&j) = tau.get(i) {
                sum_a2 += a[j] * a[j];
                sum_b += b[j];
            }
        }
        Ok(Self { p0, alpha0, direct, a, b, c, phi, tau, lambda })
    }

    pub fn relay_count(&self) -> usize {
        self.a.len()
    }

    /// Number of relays taking part in the scan.
    pub fn active_count(&self) -> usize {
        self.tau.len()
    }

    /// `φ_{τ(i+1)}` in 1-based scan notation, i.e. the statistic of the relay
    /// right after the first `i` ordered relays; 0 past the end.
    pub fn next_phi(&self, i: usize) -> f64 {
        self.tau.get(i).map_or(0.0, |&j| self.phi[j])
    }

    /// Scan condition `λ_i < 1/φ_{τ(i+1)}`, evaluated as `λ_i·φ < 1`.
    pub fn scan_condition(&self, i: usize) -> bool {
        let lambda = self.lambda[i];
        if !lambda.is_finite() {
            return false;
        }
        lambda * self.next_phi(i) < 1.0
    }

    /// Smallest `i ≥ first` meeting the scan condition. `None` only when no
    /// relay is active and there is no direct-link term.
    pub fn select_i0(&self, first: usize) -> Option<usize> {
        (first..=self.active_count()).find(|&i| self.scan_condition(i))
    }

    /// Candidate vector `x^(i)`: full power for the first `i` ordered relays,
    /// `λ_i·φ_j` for the remaining active relays, zero for degenerate ones.
    pub fn candidate(&self, i: usize) -> Vec<f64> {
        let mut x = vec![0.0; self.relay_count()];
        let lambda = self.lambda[i];
        for (m, &j) in self.tau.iter().enumerate() {
            x[j] = if m < i { 1.0 } else { lambda * self.phi[j] };
        }
        x
    }

    /// Closed form of the objective at `x^(i)`:
    /// `P0·(Σ_{m>i} c²_{τ_m} + (direct + Σ_{m≤i} b_{τ_m})² / (1 + Σ_{m≤i} a²_{τ_m}))`.
    pub fn candidate_snr(&self, i: usize) -> f64 {
        let (head, tail) = self.tau.split_at(i);
        let sum_a2: f64 = head.iter().map(|&j| self.a[j] * self.a[j]).sum();
        let sum_b: f64 = head.iter().map(|&j| self.b[j]).sum();
        let tail_c2: f64 = tail.iter().map(|&j| self.c[j] * self.c[j]).sum();
        let amp = self.direct + sum_b;
        self.p0 * (tail_c2 + amp * amp / (1.0 + sum_a2))
    }

    /// Objective evaluated directly at an arbitrary relay vector.
    pub fn objective(&self, x: &[f64]) -> f64 {
        let mut signal = self.direct;
        let mut noise = 0.0;
        for (j, &xj) in x.iter().enumerate() {
            signal += self.b[j] * xj;
            noise += self.a[j] * self.a[j] * xj * xj;
        }
        self.p0 * signal * signal / (1.0 + noise)
    }

    /// Optimal relay vector from the scan starting at prefix length `first`,
    /// with the selected `i0`.
    pub(crate) fn solve(&self, first: usize) -> (Vec<f64>, usize) {
        match self.select_i0(first) {
            Some(i0) => (self.candidate(i0), i0),
            None => (vec![0.0; self.relay_count()], 0),
        }
    }
}

/// Exact optimum without a direct link.
///
/// The transmitter always uses full power (`alpha0 = 1`, `beta0 = 0`). The
/// returned `i0 ≥ 1` unless every relay is degenerate, in which case the
/// allocation is all zero with SNR 0.
pub fn solve_no_dl(ch: &ChannelRealization, budget: &PowerBudget) -> Result<PowerAllocation> {
    solve_no_dl_detailed(ch, budget).map(|(alloc, _)| alloc)
}

/// [`solve_no_dl`] together with the workspace it used, for callers that
/// need `φ`, `τ` or `λ` (the feedback encoders, invariant checks).
pub fn solve_no_dl_detailed(
    ch: &ChannelRealization,
    budget: &PowerBudget,
) -> Result<(PowerAllocation, SolverWorkspace)> {
    let ws = SolverWorkspace::no_direct_link(ch, budget)?;
    let (alpha, i0) = ws.solve(1);
    let snr = beam_snr(ch, budget, 1.0, 0.0, &alpha);
    let alloc = PowerAllocation { alpha0: 1.0, beta0: 0.0, alpha, snr, i0 };
    Ok((alloc, ws))
}

/// Upper bound on objective evaluations [`oracle_grid`] will perform.
pub const GRID_EVALUATION_LIMIT: u128 = 4_000_000_000;

/// Largest relay count [`oracle_grid`] accepts.
pub const GRID_MAX_RELAYS: usize = 4;

/// Grid levels `{0, step, 2·step, …, 1}`; the last level is exactly 1 even
/// when `step` does not divide 1.
pub fn grid_levels(step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0 && step <= 0.5) {
        return Err(Error::InvalidArgument("grid step must lie in (0, 0.5]"));
    }
    let n = libm::ceil(1.0 / step - 1e-9) as usize;
    let mut levels: Vec<f64> = (0..n).map(|k| k as f64 * step).collect();
    levels.push(1.0);
    Ok(levels)
}

/// Exhaustive maximization of [`receive_snr_no_dl`] over the grid
/// `{0, step, …, 1}^R`. Verification oracle only.
pub fn oracle_grid(ch: &ChannelRealization, budget: &PowerBudget, step: f64) -> Result<PowerAllocation> {
    check_shapes(ch, budget)?;
    let levels = grid_levels(step)?;
    let r = ch.relay_count();
    let evaluations = (levels.len() as u128).pow(r as u32);
    if r > GRID_MAX_RELAYS || evaluations > GRID_EVALUATION_LIMIT {
        let evaluations = if r > GRID_MAX_RELAYS { u128::MAX } else { evaluations };
        return Err(Error::ResourceLimit { evaluations, limit: GRID_EVALUATION_LIMIT });
    }
    let p0 = budget.p0();
    let mut b = vec![0.0; r];
    let mut a2 = vec![0.0; r];
    for j in 0..r {
        let f = ch.f_mag(j);
        let g = ch.g_mag(j);
        let pj = budget.relay(j);
        b[j] = f * g * libm::sqrt(pj / (1.0 + f * f * p0));
        a2[j] = g * g * pj / (1.0 + f * f * p0);
    }
    let mut scan =
        GridScan { levels: &levels, b: &b, a2: &a2, point: vec![0; r], best_value: -1.0, best_point: vec![0; r] };
    scan.descend(0, 0.0, 0.0);
    let alpha: Vec<f64> = scan.best_point.iter().map(|&k| levels[k]).collect();
    let i0 = alpha.iter().filter(|&&x| x == 1.0).count();
    Ok(PowerAllocation { alpha0: 1.0, beta0: 0.0, alpha, snr: p0 * scan.best_value, i0 })
}

struct GridScan<'a> {
    levels: &'a [f64],
    b: &'a [f64],
    a2: &'a [f64],
    point: Vec<usize>,
    best_value: f64,
    best_point: Vec<usize>,
}

impl GridScan<'_> {
    fn descend(&mut self, depth: usize, signal: f64, noise: f64) {
        let last = depth + 1 == self.b.len();
        for (k, &x) in self.levels.iter().enumerate() {
            self.point[depth] = k;
            let s = signal + x * self.b[depth];
            let n = noise + x * x * self.a2[depth];
            if last {
                let value = s * s / (1.0 + n);
                if value > self.best_value {
                    self.best_value = value;
                    self.best_point.copy_from_slice(&self.point);
                }
            } else {
                self.descend(depth + 1, s, n);
            }
        }
    }
}

/// Relay selection function `h = Pj·|f g|² / (1 + |f|²·P0 + |g|²·Pj)`.
/// A single relay at full power yields receive SNR `P0·h`.
pub fn relay_selection_value(f_mag: f64, g_mag: f64, p0: f64, pj: f64) -> f64 {
    let fg = f_mag * g_mag;
    pj * fg * fg / (1.0 + f_mag * f_mag * p0 + g_mag * g_mag * pj)
}

/// Best single relay by the selection function; that relay transmits at full
/// power and all others stay silent. Ties go to the lowest relay index.
/// Indices are 0-based.
pub fn select_best_relay(ch: &ChannelRealization, budget: &PowerBudget) -> Result<(usize, PowerAllocation)> {
    check_shapes(ch, budget)?;
    let p0 = budget.p0();
    let mut best = 0;
    let mut best_h = f64::NEG_INFINITY;
    for j in 0..ch.relay_count() {
        let h = relay_selection_value(ch.f_mag(j), ch.g_mag(j), p0, budget.relay(j));
        if h > best_h {
            best = j;
            best_h = h;
        }
    }
    let mut alpha = vec![0.0; ch.relay_count()];
    alpha[best] = 1.0;
    let snr = beam_snr(ch, budget, 1.0, 0.0, &alpha);
    Ok((best, PowerAllocation { alpha0: 1.0, beta0: 0.0, alpha, snr, i0: 1 }))
}

/// Optimal allocation under an aggregate relay constraint `Σ α_j² ≤ 1` with
/// every relay at nominal power `p_total`:
/// `α_j ∝ |f_j g_j|·√(1 + |f_j|²P0) / (|f_j|²P0 + |g_j|²P + 1)`, normalized to
/// unit norm. Used as a comparison scheme; `snr` is evaluated with every
/// relay budget equal to `p_total`.
pub fn larsson_alloc(ch: &ChannelRealization, p0: f64, p_total: f64) -> Result<PowerAllocation> {
    let r = ch.relay_count();
    let budget = PowerBudget::new(p0, vec![p_total; r])?;
    let mut alpha: Vec<f64> = (0..r)
        .map(|j| {
            let f = ch.f_mag(j);
            let g = ch.g_mag(j);
            f * g * libm::sqrt(1.0 + f * f * p0) / (f * f * p0 + g * g * p_total + 1.0)
        })
        .collect();
    let norm = libm::sqrt(alpha.iter().map(|w| w * w).sum::<f64>());
    if norm == 0.0 {
        let mut zeros = PowerAllocation::zeros(r);
        zeros.alpha0 = 1.0;
        return Ok(zeros);
    }
    alpha.iter_mut().for_each(|w| *w /= norm);
    let snr = beam_snr(ch, &budget, 1.0, 0.0, &alpha);
    let i0 = alpha.iter().filter(|&&x| x >= 1.0).count();
    Ok(PowerAllocation { alpha0: 1.0, beta0: 0.0, alpha, snr, i0 })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ch2() -> ChannelRealization {
        ChannelRealization::from_magnitudes(None, &[1.0, 0.5], &[1.0, 2.0]).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn phi_examples() {
        let v = phi_statistic(1.0, 1.0, 10.0, 10.0).unwrap();
        assert!(rel(v, libm::sqrt(11.0) / libm::sqrt(10.0)) < 1e-15);
        assert!((v - 1.04881).abs() < 1e-5);
        assert_eq!(phi_statistic(0.0, 0.7, 10.0, 3.0).unwrap(), 0.0);
        let w = phi_statistic(0.5, 2.0, 10.0, 10.0).unwrap();
        assert!(rel(w, 0.5 * libm::sqrt(3.5) / (2.0 * libm::sqrt(10.0))) < 1e-15);
        assert!((w - 0.14790).abs() < 1e-5);
        assert_eq!(phi_statistic(1.0, 0.0, 10.0, 10.0), Err(Error::DegenerateRelay));
        assert_eq!(phi_statistic(1.0, 1.0, 10.0, 0.0), Err(Error::DegenerateRelay));
    }

    #[test]
    fn phi_monotonicity() {
        let base = phi_statistic(0.8, 1.2, 5.0, 4.0).unwrap();
        assert!(phi_statistic(0.9, 1.2, 5.0, 4.0).unwrap() > base);
        assert!(phi_statistic(0.8, 1.3, 5.0, 4.0).unwrap() < base);
        assert!(phi_statistic(0.8, 1.2, 5.0, 4.5).unwrap() < base);
    }

    #[test]
    fn snr_examples() {
        let budget = PowerBudget::uniform(10.0, 2).unwrap();
        assert_eq!(receive_snr_no_dl(&ch2(), &budget, &[0.0, 0.0]).unwrap(), 0.0);
        let one = ChannelRealization::from_magnitudes(None, &[1.0], &[1.0]).unwrap();
        let b1 = PowerBudget::uniform(10.0, 1).unwrap();
        let snr = receive_snr_no_dl(&one, &b1, &[1.0]).unwrap();
        assert!(rel(snr, 100.0 / 21.0) < 1e-14);
        let sym = ChannelRealization::from_magnitudes(None, &[0.8, 0.8], &[1.3, 1.3]).unwrap();
        let s1 = receive_snr_no_dl(&sym, &budget, &[0.3, 0.9]).unwrap();
        let s2 = receive_snr_no_dl(&sym, &budget, &[0.9, 0.3]).unwrap();
        assert!(rel(s1, s2) < 1e-15);
        assert!(receive_snr_no_dl(&ch2(), &budget, &[1.2, 0.0]).is_err());
        assert!(receive_snr_no_dl(&ch2(), &budget, &[-0.1, 0.0]).is_err());
        assert!(receive_snr_no_dl(&ch2(), &budget, &[0.5]).is_err());
    }

    #[test]
    fn two_relay_worked_example() {
        let budget = PowerBudget::uniform(10.0, 2).unwrap();
        let (alloc, ws) = solve_no_dl_detailed(&ch2(), &budget).unwrap();
        assert_eq!(ws.tau, vec![0, 1]);
        assert_eq!(alloc.i0, 1);
        assert_eq!(alloc.alpha[0], 1.0);
        assert!((ws.lambda[1] - 2.0022).abs() < 1e-4);
        assert!((alloc.alpha[1] - 0.2961).abs() < 1e-4);
        assert!(rel(alloc.alpha[1], ws.lambda[1] * ws.phi[1]) < 1e-15);
        let direct = receive_snr_no_dl(&ch2(), &budget, &alloc.alpha).unwrap();
        assert!(rel(alloc.snr, direct) < 1e-15);
        assert_eq!((alloc.alpha0, alloc.beta0), (1.0, 0.0));
    }

    #[test]
    fn single_relay_uses_full_power() {
        for (f, g) in [(0.1, 3.0), (2.0, 0.2), (1.0, 1.0)] {
            let ch = ChannelRealization::from_magnitudes(None, &[f], &[g]).unwrap();
            let alloc = solve_no_dl(&ch, &PowerBudget::uniform(7.0, 1).unwrap()).unwrap();
            assert_eq!(alloc.alpha, vec![1.0]);
            assert_eq!(alloc.i0, 1);
        }
    }

    #[test]
    fn degenerate_relays_stay_silent() {
        let ch = ChannelRealization::from_magnitudes(None, &[0.0, 1.0, 0.7], &[1.0, 0.0, 0.9]).unwrap();
        let alloc = solve_no_dl(&ch, &PowerBudget::uniform(10.0, 3).unwrap()).unwrap();
        assert_eq!(alloc.alpha[0], 0.0);
        assert_eq!(alloc.alpha[1], 0.0);
        assert_eq!(alloc.alpha[2], 1.0);

        let dead = ChannelRealization::from_magnitudes(None, &[0.0, 1.0], &[1.0, 0.0]).unwrap();
        let alloc = solve_no_dl(&dead, &PowerBudget::uniform(10.0, 2).unwrap()).unwrap();
        assert_eq!(alloc.alpha, vec![0.0, 0.0]);
        assert_eq!(alloc.snr, 0.0);
    }

    #[test]
    fn ties_keep_index_order_and_snr() {
        let ch = ChannelRealization::from_magnitudes(None, &[0.9, 0.9, 0.4], &[1.1, 1.1, 1.5]).unwrap();
        let budget = PowerBudget::uniform(10.0, 3).unwrap();
        let ws = SolverWorkspace::no_direct_link(&ch, &budget).unwrap();
        assert_eq!(ws.tau, vec![0, 1, 2]);
        let swapped = ChannelRealization::from_magnitudes(None, &[0.4, 0.9, 0.9], &[1.5, 1.1, 1.1]).unwrap();
        let a = solve_no_dl(&ch, &budget).unwrap();
        let b = solve_no_dl(&swapped, &budget).unwrap();
        assert!(rel(a.snr, b.snr) < 1e-14);
    }

    #[test]
    fn grid_cardinality_and_single_relay() {
        assert_eq!(grid_levels(0.5).unwrap().len(), 3);
        assert_eq!(grid_levels(0.5).unwrap().len().pow(2), 9);
        assert_eq!(grid_levels(0.3).unwrap(), vec![0.0, 0.3, 0.6, 0.8999999999999999, 1.0]);
        assert!(grid_levels(0.0).is_err() && grid_levels(0.6).is_err());
        let one = ChannelRealization::from_magnitudes(None, &[0.3], &[2.0]).unwrap();
        let b1 = PowerBudget::uniform(5.0, 1).unwrap();
        for step in [0.5, 0.1, 0.013] {
            assert_eq!(oracle_grid(&one, &b1, step).unwrap().alpha, vec![1.0]);
        }
    }

    #[test]
    fn grid_refuses_large_problems() {
        let ch = ChannelRealization::from_magnitudes(None, &[1.0; 5], &[1.0; 5]).unwrap();
        let budget = PowerBudget::uniform(10.0, 5).unwrap();
        assert!(matches!(oracle_grid(&ch, &budget, 0.5), Err(Error::ResourceLimit { .. })));
        let ch4 = ChannelRealization::from_magnitudes(None, &[1.0; 4], &[1.0; 4]).unwrap();
        let b4 = PowerBudget::uniform(10.0, 4).unwrap();
        assert!(matches!(oracle_grid(&ch4, &b4, 0.001), Err(Error::ResourceLimit { .. })));
    }

    #[test]
    fn worked_example_against_grid() {
        let budget = PowerBudget::uniform(10.0, 2).unwrap();
        let grid = oracle_grid(&ch2(), &budget, 1e-3).unwrap();
        let exact = solve_no_dl(&ch2(), &budget).unwrap();
        assert!(exact.snr >= grid.snr - 1e-4 * grid.snr);
        assert!(exact.snr >= grid.snr * (1.0 - 1e-12));
    }

    #[test]
    fn best_relay_examples() {
        let budget = PowerBudget::uniform(10.0, 2).unwrap();
        let h1 = relay_selection_value(1.0, 1.0, 10.0, 10.0);
        let h2 = relay_selection_value(0.5, 2.0, 10.0, 10.0);
        assert!(rel(h1, 10.0 / 21.0) < 1e-15 && rel(h2, 10.0 / 43.5) < 1e-15);
        let (idx, alloc) = select_best_relay(&ch2(), &budget).unwrap();
        assert_eq!(idx, 0);
        assert_eq!(alloc.alpha, vec![1.0, 0.0]);
        // Cross-check: the winner also has the larger single-relay SNR.
        let s1 = receive_snr_no_dl(&ch2(), &budget, &[1.0, 0.0]).unwrap();
        let s2 = receive_snr_no_dl(&ch2(), &budget, &[0.0, 1.0]).unwrap();
        assert!(s1 > s2);
        assert!(rel(s1, 10.0 * h1) < 1e-14);

        let boosted = ChannelRealization::from_magnitudes(None, &[1.0, 1.5], &[1.0, 4.0]).unwrap();
        assert_eq!(select_best_relay(&boosted, &budget).unwrap().0, 1);

        let tied = ChannelRealization::from_magnitudes(None, &[1.0, 1.0], &[1.0, 1.0]).unwrap();
        assert_eq!(select_best_relay(&tied, &budget).unwrap().0, 0);
        let one = ChannelRealization::from_magnitudes(None, &[0.2], &[0.1]).unwrap();
        assert_eq!(select_best_relay(&one, &PowerBudget::uniform(1.0, 1).unwrap()).unwrap().0, 0);
    }

    #[test]
    fn larsson_examples() {
        let sym = ChannelRealization::from_magnitudes(None, &[0.7, 0.7], &[1.2, 1.2]).unwrap();
        let alloc = larsson_alloc(&sym, 10.0, 10.0).unwrap();
        for a in &alloc.alpha {
            assert!((a - core::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        }
        let one = ChannelRealization::from_magnitudes(None, &[0.7], &[1.2]).unwrap();
        assert!((larsson_alloc(&one, 10.0, 10.0).unwrap().alpha[0] - 1.0).abs() < 1e-15);
        let zero = ChannelRealization::from_magnitudes(None, &[0.0, 0.0], &[1.0, 1.0]).unwrap();
        assert_eq!(larsson_alloc(&zero, 10.0, 10.0).unwrap().alpha, vec![0.0, 0.0]);
    }

    #[test]
    fn larsson_matches_circle_scan() {
        // Oracle: parametrize Σα² = 1 in the first quadrant by an angle.
        let budget = PowerBudget::uniform(10.0, 2).unwrap();
        let alloc = larsson_alloc(&ch2(), 10.0, 10.0).unwrap();
        let norm2: f64 = alloc.alpha.iter().map(|a| a * a).sum();
        assert!((norm2 - 1.0).abs() < 1e-14);
        let mut best = 0.0f64;
        let steps = 1571; // π/2 at step 1e-3
        for k in 0..=steps {
            let t = core::f64::consts::FRAC_PI_2 * k as f64 / steps as f64;
            let x = [libm::cos(t), libm::sin(t)];
            best = best.max(receive_snr_no_dl(&ch2(), &budget, &x).unwrap());
        }
        assert!(alloc.snr >= best * (1.0 - 1e-12));
        assert!(alloc.snr <= best * (1.0 + 1e-5));
    }
}
