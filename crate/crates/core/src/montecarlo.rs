//! Link-level simulation of the two-step network: BPSK, maximum-ratio
//! combining, block error rates and diversity estimates.
//!
//! A block is a single BPSK symbol with its own channel draw. Trial `t` of a
//! curve runs on sub-stream `t` of the curve's seed at every power point and
//! for every scheme, so schemes are compared on common random numbers and a
//! run's error counts do not depend on how trials are scheduled.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::Range;
use core::str::FromStr;

use num_complex::Complex64;

use crate::beamsolver::{larsson_alloc, select_best_relay, solve_no_dl};
use crate::channel::{ChannelRealization, Topology};
use crate::dlsolver::{solve_dl_both, solve_dl_first, solve_dl_second, IterationControl};
use crate::error::{Error, Result};
use crate::power::PowerBudget;
use crate::rng::{RngSeed, SimRng};

/// Transmission strategies that can be simulated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scheme {
    /// Optimal relay powers, no direct link.
    BeamformNoDl,
    /// Optimal relay powers; the receiver also hears the first-step broadcast.
    BeamformDlFirst,
    /// Optimal powers; the transmitter also sends during the second step.
    BeamformDlSecond,
    /// Optimal powers with the direct link in both steps.
    BeamformDlBoth,
    /// Single best relay at full power.
    BestRelay,
    /// Aggregate relay power constraint, total equal to the largest relay
    /// budget.
    LarssonAggregate,
    /// Every relay at full power, no direct link.
    AfNoPowerControl,
    /// Half the transmitter power in each step, relays at full power,
    /// receiver ignores the first step.
    DlSecondFixedSplit,
    /// Half the transmitter power in each step, relays at full power, MRC of
    /// both steps.
    DlBothFixedSplit,
    /// Transmitter only, full power in the second step.
    DirectOnly,
}

impl Scheme {
    pub const ALL: [Scheme; 10] = [
        Scheme::BeamformNoDl,
        Scheme::BeamformDlFirst,
        Scheme::BeamformDlSecond,
        Scheme::BeamformDlBoth,
        Scheme::BestRelay,
        Scheme::LarssonAggregate,
        Scheme::AfNoPowerControl,
        Scheme::DlSecondFixedSplit,
        Scheme::DlBothFixedSplit,
        Scheme::DirectOnly,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Scheme::BeamformNoDl => "beamform-no-dl",
            Scheme::BeamformDlFirst => "beamform-dl-first",
            Scheme::BeamformDlSecond => "beamform-dl-second",
            Scheme::BeamformDlBoth => "beamform-dl-both",
            Scheme::BestRelay => "best-relay",
            Scheme::LarssonAggregate => "larsson-aggregate",
            Scheme::AfNoPowerControl => "af-no-power-control",
            Scheme::DlSecondFixedSplit => "dl-second-fixed-split",
            Scheme::DlBothFixedSplit => "dl-both-fixed-split",
            Scheme::DirectOnly => "direct-only",
        }
    }

    /// True when the receiver listens to the transmitter in the first step.
    pub fn direct_first(self) -> bool {
        matches!(self, Scheme::BeamformDlFirst | Scheme::BeamformDlBoth | Scheme::DlBothFixedSplit)
    }

    /// True when the transmitter also sends in the second step.
    pub fn direct_second(self) -> bool {
        matches!(
            self,
            Scheme::BeamformDlSecond
                | Scheme::BeamformDlBoth
                | Scheme::DlSecondFixedSplit
                | Scheme::DlBothFixedSplit
                | Scheme::DirectOnly
        )
    }

    pub fn uses_direct_link(self) -> bool {
        self.direct_first() || self.direct_second()
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scheme::ALL.into_iter().find(|sc| sc.label() == s).ok_or(Error::InvalidArgument("unknown scheme"))
    }
}

/// Powers used for one block: transmitter fractions per step, relay
/// fractions and the relay budgets they refer to.
#[derive(Debug, Clone, PartialEq)]
pub struct TransmitPlan {
    pub alpha0: f64,
    pub beta0: f64,
    pub alpha: Vec<f64>,
    pub relay_power: Vec<f64>,
    pub direct_first: bool,
}

/// Allocation of `scheme` on one channel draw.
pub fn plan(
    scheme: Scheme,
    ch: &ChannelRealization,
    budget: &PowerBudget,
    control: &IterationControl,
) -> Result<TransmitPlan> {
    let r = ch.relay_count();
    if budget.relay_count() != r {
        return Err(Error::InvalidArgument("budget and topology disagree on relay count"));
    }
    if scheme.uses_direct_link() && ch.f0().is_none() {
        return Err(Error::InvalidArgument("scheme needs a direct link"));
    }
    let f0 = ch.f0_mag().unwrap_or(0.0);
    let relay_power = budget.relays().to_vec();
    let half = core::f64::consts::FRAC_1_SQRT_2;
    let (alpha0, beta0, alpha, relay_power) = match scheme {
        Scheme::BeamformNoDl => (1.0, 0.0, solve_no_dl(ch, budget)?.alpha, relay_power),
        Scheme::BeamformDlFirst => (1.0, 0.0, solve_dl_first(ch, budget)?.alpha, relay_power),
        Scheme::BeamformDlSecond => {
            let a = solve_dl_second(ch, budget, f0, control)?.allocation;
            (a.alpha0, a.beta0, a.alpha, relay_power)
        }
        Scheme::BeamformDlBoth => {
            let a = solve_dl_both(ch, budget, f0, control)?.allocation;
            (a.alpha0, a.beta0, a.alpha, relay_power)
        }
        Scheme::BestRelay => (1.0, 0.0, select_best_relay(ch, budget)?.1.alpha, relay_power),
        Scheme::LarssonAggregate => {
            let total = budget.relays().iter().copied().fold(0.0, f64::max);
            (1.0, 0.0, larsson_alloc(ch, budget.p0(), total)?.alpha, vec![total; r])
        }
        Scheme::AfNoPowerControl => (1.0, 0.0, vec![1.0; r], relay_power),
        Scheme::DlSecondFixedSplit | Scheme::DlBothFixedSplit => (half, half, vec![1.0; r], relay_power),
        Scheme::DirectOnly => (0.0, 1.0, vec![0.0; r], relay_power),
    };
    Ok(TransmitPlan { alpha0, beta0, alpha, relay_power, direct_first: scheme.direct_first() })
}

/// Effective scalar channels of one block.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Effective {
    /// First-step direct gain `α0·√P0·f0`, when the receiver uses it.
    pub a1: Option<Complex64>,
    /// Second-step gain: direct term plus coherently combined relays.
    pub a2: Complex64,
    /// Second-step noise variance `1 + Σ α_i²|g_i|²P_i / (1 + α0²|f_i|²P0)`.
    pub noise_var2: f64,
}

impl Effective {
    /// MRC output SNR.
    pub fn snr(&self) -> f64 {
        self.a1.map_or(0.0, |a| a.norm_sqr()) + self.a2.norm_sqr() / self.noise_var2
    }
}

/// Per-relay amplifier gain `α_i·√(P_i / (1 + α0²|f_i|²P0))·e^{jθ_i}` with the
/// matched phase `θ_i = −(arg f_i + arg g_i)`.
fn relay_gains(ch: &ChannelRealization, p0: f64, plan: &TransmitPlan) -> Vec<Complex64> {
    let a0 = plan.alpha0;
    (0..ch.relay_count())
        .map(|j| {
            let f = ch.f()[j];
            let g = ch.g()[j];
            let k = plan.alpha[j] * libm::sqrt(plan.relay_power[j] / (1.0 + a0 * a0 * f.norm_sqr() * p0));
            Complex64::from_polar(k, -(f.arg() + g.arg()))
        })
        .collect()
}

/// Noise-free branch gains and the second-step noise variance.
pub fn effective_channel(ch: &ChannelRealization, p0: f64, plan: &TransmitPlan) -> Effective {
    let sp = libm::sqrt(p0);
    let f0 = ch.f0().unwrap_or_default();
    let gains = relay_gains(ch, p0, plan);
    let mut a2 = Complex64::new(plan.beta0 * sp * f0.norm(), 0.0);
    let mut noise_var2 = 1.0;
    for (j, k) in gains.iter().enumerate() {
        let gk = ch.g()[j] * k;
        a2 += gk * ch.f()[j] * (plan.alpha0 * sp);
        noise_var2 += gk.norm_sqr();
    }
    let a1 = plan.direct_first.then(|| f0 * (plan.alpha0 * sp));
    Effective { a1, a2, noise_var2 }
}

/// ML decision for BPSK under maximum-ratio combining: the sign of
/// `Re{Ā1·x1} + Re{Ā2·x2}/noise_var2`, with +1 on a tie.
pub fn mrc_decode(x1: Option<Complex64>, x2: Complex64, gains: (Complex64, Complex64), noise_var2: f64) -> f64 {
    let mut stat = (gains.1.conj() * x2).re / noise_var2;
    if let Some(x1) = x1 {
        stat += (gains.0.conj() * x1).re;
    }
    if stat >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialOutcome {
    pub transmitted: f64,
    pub decided: f64,
    pub snr_achieved: f64,
}

impl TrialOutcome {
    pub fn is_error(&self) -> bool {
        self.transmitted != self.decided
    }
}

/// Sends one BPSK symbol over `ch` with `plan` and decodes it. Draw order:
/// symbol, first-step receiver noise, relay noises, second-step receiver
/// noise. With `noiseless` the noise samples are still drawn but scaled by
/// zero.
pub fn transmit_block(
    ch: &ChannelRealization,
    plan: &TransmitPlan,
    p0: f64,
    noiseless: bool,
    rng: &mut SimRng,
) -> TrialOutcome {
    let sp = libm::sqrt(p0);
    let s = rng.bpsk();
    let scale = if noiseless { 0.0 } else { 1.0 };
    let w1 = rng.complex_normal() * scale;

    let f0 = ch.f0().unwrap_or_default();
    let broadcast = plan.alpha0 * sp;
    let mut a2 = Complex64::new(plan.beta0 * sp * f0.norm(), 0.0);
    let mut x2 = a2 * s;
    let mut noise_var2 = 1.0;
    for j in 0..ch.relay_count() {
        let v = rng.complex_normal() * scale;
        let (f, g) = (ch.f()[j], ch.g()[j]);
        let fg = f * g;
        let mag = fg.norm();
        if plan.alpha[j] == 0.0 || mag == 0.0 {
            continue;
        }
        let k = plan.alpha[j] * libm::sqrt(plan.relay_power[j] / (1.0 + broadcast * broadcast * f.norm_sqr()));
        // g·k·e^{jθ} with e^{jθ} = conj(f g)/|f g|.
        let gain = g * fg.conj() * (k / mag);
        x2 += gain * (f * (broadcast * s) + v);
        a2 += gain * f * broadcast;
        noise_var2 += gain.norm_sqr();
    }
    x2 += rng.complex_normal() * scale;
    let a1 = f0 * broadcast;
    let x1 = plan.direct_first.then(|| a1 * s + w1);
    let decided = mrc_decode(x1, x2, (a1, a2), noise_var2);
    let first = if plan.direct_first { a1.norm_sqr() } else { 0.0 };
    TrialOutcome { transmitted: s, decided, snr_achieved: first + a2.norm_sqr() / noise_var2 }
}

/// Everything fixed across the trials of one curve point.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialSetup {
    pub scheme: Scheme,
    pub topology: Topology,
    pub budget: PowerBudget,
    pub control: IterationControl,
    /// Zero every noise sample; see [`transmit_block`].
    pub noiseless: bool,
}

impl TrialSetup {
    pub fn new(scheme: Scheme, topology: Topology, budget: PowerBudget) -> Result<Self> {
        topology.validate()?;
        if budget.relay_count() != topology.relay_count {
            return Err(Error::InvalidArgument("budget and topology disagree on relay count"));
        }
        Ok(Self { scheme, topology, budget, control: IterationControl::default(), noiseless: false })
    }

    /// One block on a fresh channel draw followed by [`transmit_block`].
    pub fn run(&self, rng: &mut SimRng) -> Result<TrialOutcome> {
        let ch = self.topology.realize_with(rng);
        let plan = plan(self.scheme, &ch, &self.budget, &self.control)?;
        Ok(transmit_block(&ch, &plan, self.budget.p0(), self.noiseless, rng))
    }

    /// Error count over trials `range` of `seed`.
    pub fn count_errors(&self, seed: RngSeed, range: Range<u64>) -> Result<PointCount> {
        let mut count = PointCount::default();
        for t in range {
            let outcome = self.run(&mut seed.trial(t).rng())?;
            count.trials += 1;
            count.errors += u64::from(outcome.is_error());
        }
        Ok(count)
    }
}

/// One block of `scheme` over `topology`, with default iteration control.
pub fn run_trial(scheme: Scheme, topology: &Topology, budget: &PowerBudget, rng: &mut SimRng) -> Result<TrialOutcome> {
    TrialSetup::new(scheme, topology.clone(), budget.clone())?.run(rng)
}

/// Trials and errors at one power point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct PointCount {
    pub trials: u64,
    pub errors: u64,
}

impl core::ops::Add for PointCount {
    type Output = Self;

    fn add(self, rhs: Self) -> Self {
        Self { trials: self.trials + rhs.trials, errors: self.errors + rhs.errors }
    }
}

const Z95: f64 = 1.959_963_984_540_054;

/// Wilson score interval at 95% for `errors` out of `trials`.
pub fn wilson(errors: u64, trials: u64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = errors as f64 / n;
    let z2 = Z95 * Z95;
    let den = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / den;
    let half = Z95 * libm::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / den;
    let lo = if errors == 0 { 0.0 } else { (centre - half).max(0.0) };
    let hi = if errors == trials { 1.0 } else { (centre + half).min(1.0) };
    (lo, hi)
}

/// Block error rate versus transmit power for one scheme.
#[derive(Debug, Clone, PartialEq)]
pub struct BlerCurve {
    pub scheme: Scheme,
    pub seed: RngSeed,
    pub power_db: Vec<f64>,
    pub trials: Vec<u64>,
    pub errors: Vec<u64>,
    pub bler: Vec<f64>,
    pub ci95: Vec<(f64, f64)>,
    /// Points where no error was observed; their `bler` of 0 is only an
    /// upper-bounded estimate.
    pub low_confidence: Vec<bool>,
}

impl BlerCurve {
    pub fn new(scheme: Scheme, seed: RngSeed) -> Self {
        Self {
            scheme,
            seed,
            power_db: Vec::new(),
            trials: Vec::new(),
            errors: Vec::new(),
            bler: Vec::new(),
            ci95: Vec::new(),
            low_confidence: Vec::new(),
        }
    }

    pub fn push(&mut self, power_db: f64, count: PointCount) {
        let bler = if count.trials == 0 { 0.0 } else { count.errors as f64 / count.trials as f64 };
        self.power_db.push(power_db);
        self.trials.push(count.trials);
        self.errors.push(count.errors);
        self.bler.push(bler);
        self.ci95.push(wilson(count.errors, count.trials));
        self.low_confidence.push(count.errors == 0);
    }

    pub fn len(&self) -> usize {
        self.power_db.len()
    }

    pub fn is_empty(&self) -> bool {
        self.power_db.is_empty()
    }
}

/// `10^(p_db/10)`.
pub fn db_to_linear(p_db: f64) -> f64 {
    libm::pow(10.0, p_db / 10.0)
}

/// Budget with `P0 = P` and `P_j = ratio_j·P` at `P = 10^(p_db/10)`.
pub fn budget_at_db(p_db: f64, relay_ratios: &[f64]) -> Result<PowerBudget> {
    let p = db_to_linear(p_db);
    PowerBudget::new(p, relay_ratios.iter().map(|r| r * p).collect())
}

/// Sequential BLER estimate of `scheme` at each `(p_db, budget)` point,
/// `trials_per_point` blocks each.
pub fn estimate_bler(
    scheme: Scheme,
    topology: &Topology,
    sweep: &[(f64, PowerBudget)],
    trials_per_point: u64,
    seed: RngSeed,
    control: &IterationControl,
) -> Result<BlerCurve> {
    let mut curve = BlerCurve::new(scheme, seed);
    for (p_db, budget) in sweep {
        let mut setup = TrialSetup::new(scheme, topology.clone(), budget.clone())?;
        setup.control = *control;
        curve.push(*p_db, setup.count_errors(seed, 0..trials_per_point)?);
    }
    Ok(curve)
}

/// Diversity estimate: minus the least-squares slope of `log10(bler)` against
/// `p_db/10` over points with `window.0 ≤ p_db ≤ window.1`.
pub fn diversity_slope(curve: &BlerCurve, window_db: (f64, f64)) -> Result<f64> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for k in 0..curve.len() {
        let p = curve.power_db[k];
        if p < window_db.0 || p > window_db.1 {
            continue;
        }
        if curve.errors[k] == 0 {
            return Err(Error::Estimation("a point in the window has no errors"));
        }
        xs.push(p / 10.0);
        ys.push(libm::log10(curve.bler[k]));
    }
    if xs.len() < 3 {
        return Err(Error::Estimation("fewer than three points in the window"));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    Ok(-sxy / sxx)
}
