//! Channel realizations: Rayleigh fading, path loss and network geometry.
//!
//! Every gain is a unit-variance circularly-symmetric complex Gaussian scaled
//! by the path-loss amplitude `d^(-ε/2)`, so the link variance is `d^(-ε)`
//! with unity at distance 1. Gains are redrawn independently for every
//! transmission block, and the direct-link gain `f0` is shared by both steps
//! of a block.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::rng::{RngSeed, SimRng};

/// Complex gains for one coherence block: the optional direct link `f0`,
/// transmitter→relay gains `f` and relay→receiver gains `g`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    f0: Option<Complex64>,
    f: Vec<Complex64>,
    g: Vec<Complex64>,
}

impl ChannelRealization {
    pub fn new(f0: Option<Complex64>, f: Vec<Complex64>, g: Vec<Complex64>) -> Result<Self> {
        if f.is_empty() {
            return Err(Error::InvalidArgument("a relay network needs at least one relay"));
        }
        if f.len() != g.len() {
            return Err(Error::InvalidArgument("f and g must have one gain per relay"));
        }
        let finite = |z: &Complex64| z.re.is_finite() && z.im.is_finite();
        if !(f.iter().all(finite) && g.iter().all(finite) && f0.as_ref().is_none_or(finite)) {
            return Err(Error::InvalidArgument("channel gains must be finite"));
        }
        Ok(Self { f0, f, g })
    }

    /// Real, non-negative gains. Phases do not affect any power-control
    /// result because relays match-filter them away.
    pub fn from_magnitudes(f0: Option<f64>, f: &[f64], g: &[f64]) -> Result<Self> {
        if f.iter().chain(g).chain(f0.iter()).any(|m| *m < 0.0) {
            return Err(Error::InvalidArgument("channel magnitudes must be non-negative"));
        }
        let lift = |m: &f64| Complex64::new(*m, 0.0);
        Self::new(f0.map(|m| lift(&m)), f.iter().map(lift).collect(), g.iter().map(lift).collect())
    }

    pub fn relay_count(&self) -> usize {
        self.f.len()
    }

    pub fn f0(&self) -> Option<Complex64> {
        self.f0
    }

    pub fn f(&self) -> &[Complex64] {
        &self.f
    }

    pub fn g(&self) -> &[Complex64] {
        &self.g
    }

    pub fn f0_mag(&self) -> Option<f64> {
        self.f0.map(|z| z.norm())
    }

    pub fn f_mag(&self, j: usize) -> f64 {
        self.f[j].norm()
    }

    pub fn g_mag(&self, j: usize) -> f64 {
        self.g[j].norm()
    }

    /// The same realization without its direct link.
    pub fn without_direct_link(&self) -> Self {
        Self { f0: None, f: self.f.clone(), g: self.g.clone() }
    }
}

/// Amplitude scale for a link of length `distance` with path-loss exponent
/// `exponent`: `distance^(-exponent/2)`.
pub fn path_loss_amplitude(distance: f64, exponent: f64) -> Result<f64> {
    if !(distance.is_finite() && distance > 0.0) {
        return Err(Error::InvalidArgument("distance must be positive"));
    }
    if !(exponent.is_finite() && exponent >= 0.0) {
        return Err(Error::InvalidArgument("path-loss exponent must be non-negative"));
    }
    Ok(libm::pow(distance, -0.5 * exponent))
}

/// Iterator over independent unit-variance Rayleigh realizations.
#[derive(Debug, Clone)]
pub struct RayleighStream {
    rng: SimRng,
    remaining: usize,
    relay_count: usize,
    with_dl: bool,
}

impl Iterator for RayleighStream {
    type Item = ChannelRealization;

    fn next(&mut self) -> Option<ChannelRealization> {
        if self.remaining == 0 {
            return None;
        }
        self.remaining -= 1;
        let f0 = self.with_dl.then(|| self.rng.complex_normal());
        let f = (0..self.relay_count).map(|_| self.rng.complex_normal()).collect();
        let g = (0..self.relay_count).map(|_| self.rng.complex_normal()).collect();
        Some(ChannelRealization { f0, f, g })
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        (self.remaining, Some(self.remaining))
    }
}

impl ExactSizeIterator for RayleighStream {}

/// `realization_count` draws where every gain is CN(0, 1); `f0` is present
/// iff `with_dl`.
pub fn sample_rayleigh(
    realization_count: usize,
    relay_count: usize,
    with_dl: bool,
    seed: RngSeed,
) -> Result<RayleighStream> {
    if relay_count == 0 {
        return Err(Error::InvalidArgument("relay_count must be at least 1"));
    }
    Ok(RayleighStream { rng: seed.rng(), remaining: realization_count, relay_count, with_dl })
}

/// Relay position relative to the transmitter/receiver midpoint.
///
/// `rho` is the distance from the midpoint and `theta` the angle against the
/// midpoint→transmitter direction; `d_tx`, `d_rx` are the resulting link
/// lengths.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelayPlacement {
    pub rho: f64,
    pub theta: f64,
    pub d_tx: f64,
    pub d_rx: f64,
}

impl RelayPlacement {
    /// Law of cosines with the transmitter and receiver at distance
    /// `half_distance` on either side of the midpoint.
    pub fn from_polar(rho: f64, theta: f64, half_distance: f64) -> Self {
        let h = half_distance;
        let base = h * h + rho * rho;
        let cross = 2.0 * h * rho * libm::cos(theta);
        Self { rho, theta, d_tx: libm::sqrt((base - cross).max(0.0)), d_rx: libm::sqrt(base + cross) }
    }

    /// Placement from the two uniform variates used by the sampler:
    /// `rho = r·√x`, `theta = π·t`, half-distance 1.
    pub fn from_uniforms(r: f64, x: f64, t: f64) -> Self {
        Self::from_polar(r * libm::sqrt(x), PI * t, 1.0)
    }
}

fn check_radius(r: f64) -> Result<()> {
    if r > 0.0 && r < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument("disk radius must lie in (0, 1)"))
    }
}

/// Uniform relay position inside a disk of radius `r` (relative to the
/// half-distance) centred between transmitter and receiver.
///
/// `rho = r·√X` with `X ~ U(0,1)` has CDF `x²/r²`, the radial law of a
/// uniform point in the disk; `theta ~ U[0, π)`.
pub fn sample_disk_placement(r: f64, seed: RngSeed) -> Result<RelayPlacement> {
    check_radius(r)?;
    let mut rng = seed.rng();
    Ok(disk_placement(r, 1.0, &mut rng))
}

fn disk_placement(r: f64, half_distance: f64, rng: &mut SimRng) -> RelayPlacement {
    let x = rng.uniform();
    let t = rng.uniform();
    RelayPlacement::from_polar(r * half_distance * libm::sqrt(x), PI * t, half_distance)
}

/// Where the relays sit.
#[derive(Debug, Clone, PartialEq)]
pub enum TopologyKind {
    /// No geometry: every link has unit variance.
    UnitVariance,
    /// Transmitter, receiver and relays on the vertices of an equilateral
    /// triangle; every edge has length `tx_rx_distance`.
    Triangle,
    /// Relays at the midpoint of the transmitter–receiver segment.
    Line,
    /// Each relay uniform in a disk of radius `radius · tx_rx_distance / 2`
    /// around the midpoint, redrawn every block.
    RandomDisk { radius: f64 },
    /// Fixed per-relay link lengths `(d_tx, d_rx)`.
    Explicit { links: Vec<(f64, f64)> },
}

/// Network geometry plus path-loss exponent.
#[derive(Debug, Clone, PartialEq)]
pub struct Topology {
    pub kind: TopologyKind,
    pub relay_count: usize,
    pub tx_rx_distance: f64,
    pub path_loss_exponent: f64,
}

impl Topology {
    pub fn unit_variance(relay_count: usize) -> Self {
        Self { kind: TopologyKind::UnitVariance, relay_count, tx_rx_distance: 1.0, path_loss_exponent: 0.0 }
    }

    pub fn triangle(relay_count: usize, path_loss_exponent: f64) -> Self {
        Self { kind: TopologyKind::Triangle, relay_count, tx_rx_distance: 1.0, path_loss_exponent }
    }

    pub fn line(relay_count: usize, path_loss_exponent: f64) -> Self {
        Self { kind: TopologyKind::Line, relay_count, tx_rx_distance: 2.0, path_loss_exponent }
    }

    pub fn random_disk(relay_count: usize, radius: f64, path_loss_exponent: f64) -> Self {
        Self { kind: TopologyKind::RandomDisk { radius }, relay_count, tx_rx_distance: 2.0, path_loss_exponent }
    }

    pub fn explicit(links: Vec<(f64, f64)>, tx_rx_distance: f64, path_loss_exponent: f64) -> Self {
        Self { relay_count: links.len(), kind: TopologyKind::Explicit { links }, tx_rx_distance, path_loss_exponent }
    }

    /// Short lowercase name used in file names and CSV rows.
    pub fn label(&self) -> &'static str {
        match self.kind {
            TopologyKind::UnitVariance => "unit",
            TopologyKind::Triangle => "triangle",
            TopologyKind::Line => "line",
            TopologyKind::RandomDisk { .. } => "random-disk",
            TopologyKind::Explicit { .. } => "explicit",
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.relay_count == 0 {
            return Err(Error::InvalidArgument("relay_count must be at least 1"));
        }
        if !(self.tx_rx_distance.is_finite() && self.tx_rx_distance > 0.0) {
            return Err(Error::InvalidArgument("tx_rx_distance must be positive"));
        }
        if !(self.path_loss_exponent.is_finite() && self.path_loss_exponent >= 0.0) {
            return Err(Error::InvalidArgument("path-loss exponent must be non-negative"));
        }
        match &self.kind {
            TopologyKind::RandomDisk { radius } => check_radius(*radius),
            TopologyKind::Explicit { links } => {
                if links.len() != self.relay_count {
                    return Err(Error::InvalidArgument("explicit links must match relay_count"));
                }
                if links.iter().any(|&(a, b)| !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite())) {
                    return Err(Error::InvalidArgument("link lengths must be positive"));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// Draws one block's gains from `rng`. The draw order is fixed: `f0`, then
    /// for each relay its placement (random disk only), `f_i`, `g_i`. `f0` is
    /// always drawn so that every scheme sees the same relay gains for the
    /// same stream.
    ///
    /// The caller must have validated the topology.
    pub fn realize_with(&self, rng: &mut SimRng) -> ChannelRealization {
        let eps = self.path_loss_exponent;
        let scale = |d: f64| libm::pow(d, -0.5 * eps);
        let unit = matches!(self.kind, TopologyKind::UnitVariance);
        let f0 = rng.complex_normal() * if unit { 1.0 } else { scale(self.tx_rx_distance) };
        let half = 0.5 * self.tx_rx_distance;
        let mut f = Vec::with_capacity(self.relay_count);
        let mut g = Vec::with_capacity(self.relay_count);
        for j in 0..self.relay_count {
            let (d_tx, d_rx) = match &self.kind {
                TopologyKind::UnitVariance => (1.0, 1.0),
                TopologyKind::Triangle => (self.tx_rx_distance, self.tx_rx_distance),
                TopologyKind::Line => (half, half),
                TopologyKind::RandomDisk { radius } => {
                    let p = disk_placement(*radius, half, rng);
                    (p.d_tx, p.d_rx)
                }
                TopologyKind::Explicit { links } => links[j],
            };
            let (a_tx, a_rx) = if unit { (1.0, 1.0) } else { (scale(d_tx), scale(d_rx)) };
            f.push(rng.complex_normal() * a_tx);
            g.push(rng.complex_normal() * a_rx);
        }
        ChannelRealization { f0: Some(f0), f, g }
    }
}

/// One block's channel for `topology`, drawn from `seed`.
pub fn realize(topology: &Topology, seed: RngSeed) -> Result<ChannelRealization> {
    topology.validate()?;
    Ok(topology.realize_with(&mut seed.rng()))
}
