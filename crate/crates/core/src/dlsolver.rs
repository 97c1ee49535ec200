//! Power control with a direct link between transmitter and receiver.
//!
//! * First step only: the receiver combines the direct copy with the relayed
//!   one, and both branch SNRs grow with the transmitter power, so the
//!   transmitter goes to full power and the relay problem is exactly the
//!   no-direct-link one.
//! * Second step only: the transmitter splits its budget, `α0²` for the
//!   broadcast and `β0² = 1 − α0²` for the direct transmission. For fixed
//!   `α0` the relay vector is solved exactly by the ordered scan (which may
//!   now stop at `i0 = 0`); `α0` is found by alternating with a 1-D search.
//! * Both steps: as above with the extra first-step branch `α0²·P0·|f0|²`.

use alloc::vec;
use alloc::vec::Vec;

use crate::beamsolver::{beam_snr, solve_no_dl, SolverWorkspace};
use crate::channel::ChannelRealization;
use crate::error::{Error, Result};
use crate::power::{check_box, PowerAllocation, PowerBudget};
use crate::quartic::{eval_poly, solve_quartic};
use crate::search::maximize;

/// Workspace of the fixed-`α0` inner problem: `â`, `b̂`, `ĉ`, `φ̂`, `τ̂`, `λ̂`.
pub type DlWorkspace = SolverWorkspace;

/// Interior search interval for `α0` is `[ALPHA0_MARGIN, 1 − ALPHA0_MARGIN]`.
pub const ALPHA0_MARGIN: f64 = 1e-6;

/// Stopping rule for the alternating algorithms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationControl {
    /// Maximum number of (α0, x) rounds.
    pub iter: usize,
    /// Convergence threshold on the change in objective between rounds.
    pub thre: f64,
    /// Interpret `thre` relative to the current objective.
    pub relative: bool,
}

impl Default for IterationControl {
    fn default() -> Self {
        Self { iter: 20, thre: 1e-6, relative: true }
    }
}

impl IterationControl {
    pub fn validate(&self) -> Result<()> {
        if self.iter == 0 {
            return Err(Error::InvalidArgument("iter must be at least 1"));
        }
        if !(self.thre > 0.0 && self.thre.is_finite()) {
            return Err(Error::InvalidArgument("thre must be positive"));
        }
        Ok(())
    }

    fn threshold(&self, objective: f64) -> f64 {
        if self.relative {
            self.thre * objective.abs()
        } else {
            self.thre
        }
    }
}

fn require_f0(ch: &ChannelRealization) -> Result<f64> {
    ch.f0_mag().ok_or(Error::InvalidArgument("a direct-link solver needs f0"))
}

fn check_f0(f0_mag: f64) -> Result<()> {
    if f0_mag >= 0.0 && f0_mag.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument("direct-link magnitude must be non-negative"))
    }
}

/// Allocation for a direct link during the first step only: identical to
/// [`solve_no_dl`]. Use [`dl_first_total_snr`] for the combined SNR.
pub fn solve_dl_first(ch: &ChannelRealization, budget: &PowerBudget) -> Result<PowerAllocation> {
    require_f0(ch)?;
    solve_no_dl(ch, budget)
}

/// MRC output SNR with a first-step direct link: `α0²·P0·|f0|²` plus the
/// relay branch SNR already stored in `alloc.snr`.
pub fn dl_first_total_snr(ch: &ChannelRealization, budget: &PowerBudget, alloc: &PowerAllocation) -> Result<f64> {
    let f0 = require_f0(ch)?;
    Ok(alloc.alpha0 * alloc.alpha0 * budget.p0() * f0 * f0 + alloc.snr)
}

/// Second-step receive SNR
/// `ψ(α0, x) = P0·(√(1−α0²)·|f0| + ⟨b̂, x⟩)² / (1 + ‖Â·x‖²)`.
pub fn psi(ch: &ChannelRealization, budget: &PowerBudget, f0_mag: f64, alpha0: f64, alpha: &[f64]) -> Result<f64> {
    check_f0(f0_mag)?;
    if !(0.0..=1.0).contains(&alpha0) {
        return Err(Error::InvalidArgument("alpha0 must lie in [0, 1]"));
    }
    if alpha.len() != ch.relay_count() || ch.relay_count() != budget.relay_count() {
        return Err(Error::InvalidArgument("one power fraction per relay is required"));
    }
    check_box(alpha)?;
    let direct = libm::sqrt(1.0 - alpha0 * alpha0) * f0_mag;
    Ok(beam_snr(ch, budget, alpha0, direct, alpha))
}

/// Exact relay vector maximizing `ψ(alpha0, ·)` for a fixed `alpha0 ∈ (0, 1]`.
///
/// The scan starts at prefix length 0: with a strong direct link every relay
/// may end up below full power. `snr` is `ψ` at the returned point and
/// `beta0 = √(1 − alpha0²)`.
pub fn theorem2_inner(
    ch: &ChannelRealization,
    budget: &PowerBudget,
    f0_mag: f64,
    alpha0: f64,
) -> Result<PowerAllocation> {
    let ws = DlWorkspace::with_direct_link(ch, budget, f0_mag, alpha0)?;
    let (alpha, i0) = ws.solve(0);
    let snr = beam_snr(ch, budget, alpha0, ws.direct, &alpha);
    let beta0 = libm::sqrt((1.0 - alpha0 * alpha0).max(0.0));
    Ok(PowerAllocation { alpha0, beta0, alpha, snr, i0 })
}

/// `ψ` and the two-branch objective as functions of `α0` alone, for a fixed
/// relay vector.
#[derive(Debug, Clone)]
struct Alpha0Objective {
    p0: f64,
    f0: f64,
    // Per active relay: (α|f g|√P, α²|g|²P, |f|²P0).
    terms: Vec<(f64, f64, f64)>,
}

impl Alpha0Objective {
    fn new(ch: &ChannelRealization, budget: &PowerBudget, f0_mag: f64, alpha: &[f64]) -> Result<Self> {
        psi(ch, budget, f0_mag, 1.0, alpha)?;
        let p0 = budget.p0();
        let terms = alpha
            .iter()
            .enumerate()
            .filter(|(_, &x)| x > 0.0)
            .map(|(j, &x)| {
                let (f, g, pj) = (ch.f_mag(j), ch.g_mag(j), budget.relay(j));
                (x * f * g * libm::sqrt(pj), x * x * g * g * pj, f * f * p0)
            })
            .collect();
        Ok(Self { p0, f0: f0_mag, terms })
    }

    fn psi(&self, alpha0: f64) -> f64 {
        let a2 = alpha0 * alpha0;
        let mut signal = 0.0;
        let mut noise = 0.0;
        for &(u, v, w) in &self.terms {
            let den = 1.0 + a2 * w;
            signal += u / libm::sqrt(den);
            noise += v / den;
        }
        let amp = libm::sqrt((1.0 - a2).max(0.0)) * self.f0 + alpha0 * signal;
        self.p0 * amp * amp / (1.0 + noise)
    }

    fn total(&self, alpha0: f64) -> f64 {
        alpha0 * alpha0 * self.p0 * self.f0 * self.f0 + self.psi(alpha0)
    }
}

const MULTISTART: [f64; 3] = [0.25, 0.5, 0.75];

fn alpha0_seeds(ch: &ChannelRealization, budget: &PowerBudget, f0_mag: f64, alpha: &[f64]) -> Vec<f64> {
    let mut seeds = MULTISTART.to_vec();
    if let Ok(coeffs) = HighSnrCoeffs::new(ch, budget, alpha) {
        if let Ok(est) = alpha0_high_snr(f0_mag, &coeffs) {
            seeds.push(est.alpha0);
        }
    }
    seeds
}

/// Transmitter split maximizing `ψ(·, alpha)` for a direct link in the second
/// step only. With `|f0| = 0` the direct term vanishes, `ψ` increases in
/// `α0` and the result is 1.
pub fn optimize_alpha0_second(
    ch: &ChannelRealization,
    budget: &PowerBudget,
    f0_mag: f64,
    alpha: &[f64],
) -> Result<f64> {
    alpha0_step(Mode::Second, ch, budget, f0_mag, alpha, None)
}

/// Transmitter split maximizing `α0²·P0·|f0|² + ψ(·, alpha)` for a direct
/// link in both steps.
pub fn optimize_alpha0_both(ch: &ChannelRealization, budget: &PowerBudget, f0_mag: f64, alpha: &[f64]) -> Result<f64> {
    alpha0_step(Mode::Both, ch, budget, f0_mag, alpha, None)
}

/// `current`, when given, is searched alongside the other seeds so the
/// result is never worse than staying put.
fn alpha0_step(
    mode: Mode,
    ch: &ChannelRealization,
    budget: &PowerBudget,
    f0_mag: f64,
    alpha: &[f64],
    current: Option<f64>,
) -> Result<f64> {
    let objective = Alpha0Objective::new(ch, budget, f0_mag, alpha)?;
    if f0_mag == 0.0 {
        return Ok(1.0);
    }
    let mut seeds = match mode {
        Mode::Second => alpha0_seeds(ch, budget, f0_mag, alpha),
        Mode::Both => MULTISTART.to_vec(),
    };
    seeds.extend(current);
    let best = match mode {
        Mode::Second => maximize(|a| objective.psi(a), ALPHA0_MARGIN, 1.0 - ALPHA0_MARGIN, (0.0, 1.0), &seeds),
        Mode::Both => maximize(|a| objective.total(a), ALPHA0_MARGIN, 1.0 - ALPHA0_MARGIN, (0.0, 1.0), &seeds),
    };
    Ok(best.x)
}

/// Coefficients of the high-power approximation
/// `ψ(α0, x) ≈ P0·(√(1−α0²)·|f0| + d1)² / (1 + d2/α0²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HighSnrCoeffs {
    /// `(1/√P0)·Σ α_i·|g_i|·√P_i`
    pub d1: f64,
    /// `(1/P0)·Σ α_i²·|g_i/f_i|²·P_i`
    pub d2: f64,
}

impl HighSnrCoeffs {
    /// Relays with `|f_i| = 0` forward only noise and are left out of both
    /// sums.
    pub fn new(ch: &ChannelRealization, budget: &PowerBudget, alpha: &[f64]) -> Result<Self> {
        if alpha.len() != ch.relay_count() || ch.relay_count() != budget.relay_count() {
            return Err(Error::InvalidArgument("one power fraction per relay is required"));
        }
        check_box(alpha)?;
        let p0 = budget.p0();
        let (mut d1, mut d2) = (0.0, 0.0);
        for (j, &x) in alpha.iter().enumerate() {
            let f = ch.f_mag(j);
            if x == 0.0 || f == 0.0 {
                continue;
            }
            let g = ch.g_mag(j);
            let pj = budget.relay(j);
            d1 += x * g * libm::sqrt(pj);
            d2 += x * x * (g / f) * (g / f) * pj;
        }
        Ok(Self { d1: d1 / libm::sqrt(p0), d2: d2 / p0 })
    }

    /// The approximation divided by `P0`.
    pub fn objective(&self, f0_mag: f64, alpha0: f64) -> f64 {
        let amp = libm::sqrt((1.0 - alpha0 * alpha0).max(0.0)) * f0_mag + self.d1;
        amp * amp / (1.0 + self.d2 / (alpha0 * alpha0))
    }

    /// Stationarity condition of [`Self::objective`] in `u = α0²`:
    /// `|f0|·u² + 2·d2·|f0|·u − d2·|f0| − d1·d2·√(1−u)`. Strictly increasing
    /// on `[0, 1]`, negative at 0 and positive at 1.
    pub fn stationarity(&self, f0_mag: f64, u: f64) -> f64 {
        let (f, d1, d2) = (f0_mag, self.d1, self.d2);
        f * u * u + 2.0 * d2 * f * u - d2 * f - d1 * d2 * libm::sqrt((1.0 - u).max(0.0))
    }

    /// Coefficients (highest degree first) of the quartic in `u = α0²`
    /// obtained by squaring [`Self::stationarity`]:
    /// `F²u⁴ + 4d2F²u³ + (4d2² − 2d2)F²u² + d2²(d1² − 4F²)u + d2²(F² − d1²)`.
    pub fn quartic(&self, f0_mag: f64) -> [f64; 5] {
        let (f2, d1s, d2) = (f0_mag * f0_mag, self.d1 * self.d1, self.d2);
        [f2, 4.0 * d2 * f2, (4.0 * d2 * d2 - 2.0 * d2) * f2, d2 * d2 * (d1s - 4.0 * f2), d2 * d2 * (f2 - d1s)]
    }
}

/// High-power estimate of the optimal `α0` for a second-step direct link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HighSnrAlpha0 {
    pub alpha0: f64,
    /// False when no usable quartic root was found and the stationarity
    /// condition was solved by bisection instead.
    pub from_quartic: bool,
}

/// Maximizer of the high-power approximation, from the real roots of its
/// quartic in `α0²`. Squaring admits spurious roots; the one kept is the
/// root in `(0, 1)` that satisfies the unsquared condition.
pub fn alpha0_high_snr(f0_mag: f64, coeffs: &HighSnrCoeffs) -> Result<HighSnrAlpha0> {
    if !(f0_mag > 0.0 && f0_mag.is_finite()) {
        return Err(Error::InvalidArgument("alpha0_high_snr needs |f0| > 0"));
    }
    if !(coeffs.d2 > 0.0 && coeffs.d2.is_finite() && coeffs.d1 >= 0.0) {
        return Err(Error::InvalidArgument("alpha0_high_snr needs d2 > 0"));
    }
    let q = coeffs.quartic(f0_mag);
    let roots = solve_quartic(q[0], q[1], q[2], q[3], q[4]);
    let scale = f0_mag * (1.0 + 2.0 * coeffs.d2) + coeffs.d1 * coeffs.d2;
    let genuine = roots
        .as_slice()
        .iter()
        .copied()
        .filter(|u| *u > 0.0 && *u < 1.0)
        .map(|u| (u, libm::fabs(coeffs.stationarity(f0_mag, u))))
        .filter(|&(_, residual)| residual <= 1e-7 * scale)
        .min_by(|a, b| a.1.total_cmp(&b.1));
    if let Some((u, _)) = genuine {
        return Ok(HighSnrAlpha0 { alpha0: libm::sqrt(u), from_quartic: true });
    }
    // The condition is monotone in u, so bisection always succeeds.
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if coeffs.stationarity(f0_mag, mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(HighSnrAlpha0 { alpha0: libm::sqrt(0.5 * (lo + hi)), from_quartic: false })
}

/// Relative residual of `u = alpha0²` in the quartic.
pub fn quartic_residual(f0_mag: f64, coeffs: &HighSnrCoeffs, alpha0: f64) -> f64 {
    let q = coeffs.quartic(f0_mag);
    let u = alpha0 * alpha0;
    let magnitude = q.iter().rev().enumerate().map(|(k, c)| libm::fabs(*c) * libm::pow(u, k as f64)).sum::<f64>();
    libm::fabs(eval_poly(&q, u)) / magnitude.max(f64::MIN_POSITIVE)
}

/// One round of an alternating algorithm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationRecord {
    pub alpha0: f64,
    /// Objective after the `α0` step, with the previous relay vector.
    pub after_alpha0_step: f64,
    /// Objective after the relay step.
    pub objective: f64,
}

/// Which of the final candidates won.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DlCandidate {
    /// The alternating iterate `(α0⁽¹⁾, x1)`.
    Alternating,
    /// `α0 = 1` with its exact relay vector.
    FullBroadcast,
    /// `α0 = 0`: direct link only, relays silent.
    DirectOnly,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DlSolution {
    pub allocation: PowerAllocation,
    pub trace: Vec<IterationRecord>,
    /// False when `iter` rounds ran out before the change fell below `thre`.
    pub converged: bool,
    pub winner: DlCandidate,
}

#[derive(Clone, Copy)]
enum Mode {
    Second,
    Both,
}

fn alternate(
    ch: &ChannelRealization,
    budget: &PowerBudget,
    f0_mag: f64,
    ctrl: &IterationControl,
    mode: Mode,
) -> Result<DlSolution> {
    ctrl.validate()?;
    check_f0(f0_mag)?;
    if ch.relay_count() != budget.relay_count() {
        return Err(Error::InvalidArgument("channel and budget disagree on relay count"));
    }
    let r = ch.relay_count();
    let p0 = budget.p0();
    let direct_gain = p0 * f0_mag * f0_mag;
    let first_branch = |alpha0: f64| match mode {
        Mode::Second => 0.0,
        Mode::Both => alpha0 * alpha0 * direct_gain,
    };

    let mut x_prev = vec![1.0; r];
    let mut snr_prev = 0.0;
    let mut trace = Vec::new();
    let (alpha0, current, converged) = loop {
        let alpha0 = alpha0_step(mode, ch, budget, f0_mag, &x_prev, trace.last().map(|r: &IterationRecord| r.alpha0))?;
        let after_alpha0_step = first_branch(alpha0) + psi(ch, budget, f0_mag, alpha0, &x_prev)?;
        let current = theorem2_inner(ch, budget, f0_mag, alpha0)?;
        let objective = first_branch(alpha0) + current.snr;
        trace.push(IterationRecord { alpha0, after_alpha0_step, objective });
        let settled = libm::fabs(objective - snr_prev) <= ctrl.threshold(objective);
        if trace.len() >= ctrl.iter || settled {
            break (alpha0, current, settled);
        }
        x_prev = current.alpha.clone();
        snr_prev = objective;
    };
    let alternating = first_branch(alpha0) + current.snr;

    let full = theorem2_inner(ch, budget, f0_mag, 1.0)?;
    let full_objective = first_branch(1.0) + full.snr;

    let mut winner = DlCandidate::Alternating;
    let mut allocation = PowerAllocation { snr: alternating, ..current };
    if full_objective > allocation.snr {
        winner = DlCandidate::FullBroadcast;
        allocation = PowerAllocation { snr: full_objective, ..full };
    }
    if matches!(mode, Mode::Second) && direct_gain > allocation.snr {
        winner = DlCandidate::DirectOnly;
        allocation = PowerAllocation { alpha0: 0.0, beta0: 1.0, alpha: vec![0.0; r], snr: direct_gain, i0: 0 };
    }
    Ok(DlSolution { allocation, trace, converged, winner })
}

/// Alternating power control for a direct link during the second step only.
///
/// Starting from all relays at full power, alternates the `α0` search with
/// the exact relay step until the objective settles or `ctrl.iter` rounds
/// pass, then returns the best of that iterate, `α0 = 1` with its exact
/// relay vector, and the direct-only point `α0 = 0`. `allocation.snr` is
/// `ψ` at the returned point.
pub fn solve_dl_second(
    ch: &ChannelRealization,
    budget: &PowerBudget,
    f0_mag: f64,
    ctrl: &IterationControl,
) -> Result<DlSolution> {
    alternate(ch, budget, f0_mag, ctrl, Mode::Second)
}

/// Alternating power control for a direct link during both steps.
///
/// The objective is the MRC total `α0²·P0·|f0|² + ψ(α0, x)`, reported in
/// `allocation.snr`. The `α0 = 0` point is never better than `α0 = 1` here
/// and is not considered.
pub fn solve_dl_both(
    ch: &ChannelRealization,
    budget: &PowerBudget,
    f0_mag: f64,
    ctrl: &IterationControl,
) -> Result<DlSolution> {
    alternate(ch, budget, f0_mag, ctrl, Mode::Both)
}
