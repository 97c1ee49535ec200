//! Distributed reconstruction of the no-direct-link allocation.
//!
//! The receiver solves centrally and broadcasts a short message; each relay
//! then recovers its own `α_j` from the message and its own `|f_j|`, `|g_j|`,
//! `P_j` and `P0`:
//!
//! * [`FeedbackMessage::IndexList`] names the relays at full power and
//!   carries `λ_{i0}`. Cost `i0·⌈log₂R⌉ + b1` bits.
//! * [`FeedbackMessage::Threshold`] carries `λ_{i0}` and a threshold `d`;
//!   relays with `φ_j > d` go to full power. Cost `2·b1` bits.
//!
//! Reals are quantized with `b1` bits, uniformly in the log domain over
//! [`QUANT_RANGE`]. Relay indices are 0-based.

use alloc::vec;
use alloc::vec::Vec;

use crate::beamsolver::{phi_statistic, SolverWorkspace};
use crate::error::{Error, Result};
use crate::power::PowerAllocation;

/// Range covered by the log-domain quantizer; values outside are clamped.
pub const QUANT_RANGE: (f64, f64) = (1e-3, 1e3);

/// `b1`-bit quantizer, uniform in `ln x` over [`QUANT_RANGE`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LogQuantizer {
    bits: u32,
}

impl LogQuantizer {
    pub fn new(bits: u32) -> Result<Self> {
        if (1..=64).contains(&bits) {
            Ok(Self { bits })
        } else {
            Err(Error::InvalidArgument("b1 must lie in 1..=64"))
        }
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    /// Largest code, `2^b1 − 1`.
    pub fn max_code(&self) -> u64 {
        u64::MAX >> (64 - self.bits)
    }

    fn span() -> (f64, f64) {
        let lo = libm::log(QUANT_RANGE.0);
        (lo, libm::log(QUANT_RANGE.1) - lo)
    }

    /// Nearest code to `x`.
    pub fn encode(&self, x: f64) -> u64 {
        let (lo, span) = Self::span();
        let t = ((libm::log(x) - lo) / span).clamp(0.0, 1.0);
        let code = libm::round(t * self.max_code() as f64);
        // Float-to-int casts saturate.
        (code as u64).min(self.max_code())
    }

    pub fn decode(&self, code: u64) -> f64 {
        let (lo, span) = Self::span();
        let t = code.min(self.max_code()) as f64 / self.max_code() as f64;
        libm::exp(lo + t * span)
    }

    /// Code nearest `target` among those decoding strictly inside
    /// `(lower, upper)`, if any.
    fn nearest_inside(&self, target: f64, lower: f64, upper: f64) -> Option<u64> {
        let max = self.max_code();
        // First code decoding above `lower`.
        let first = self.partition(|c| self.decode(c) > lower)?;
        // First code decoding at or above `upper`; codes before it are inside.
        let stop = self.partition(|c| self.decode(c) >= upper).unwrap_or(max.wrapping_add(1));
        if stop == 0 || first > stop - 1 {
            return None;
        }
        Some(self.encode(target).clamp(first, stop - 1))
    }

    /// Smallest code satisfying a monotone predicate.
    fn partition(&self, pred: impl Fn(u64) -> bool) -> Option<u64> {
        let max = self.max_code();
        if !pred(max) {
            return None;
        }
        let (mut lo, mut hi) = (0u64, max);
        while lo < hi {
            let mid = lo + (hi - lo) / 2;
            if pred(mid) {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        Some(lo)
    }
}

/// Message broadcast by the receiver. Reals are stored as quantizer codes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FeedbackMessage {
    IndexList { indices: Vec<usize>, lambda_q: u64, b1: u32 },
    Threshold { lambda_q: u64, d_q: u64, b1: u32 },
}

fn index_bits(relay_count: usize) -> u32 {
    match relay_count {
        0 | 1 => 0,
        r => usize::BITS - (r - 1).leading_zeros(),
    }
}

impl FeedbackMessage {
    pub fn b1(&self) -> u32 {
        match self {
            Self::IndexList { b1, .. } | Self::Threshold { b1, .. } => *b1,
        }
    }

    fn quantizer(&self) -> Result<LogQuantizer> {
        LogQuantizer::new(self.b1()).map_err(|_| Error::Protocol("b1 outside 1..=64"))
    }

    /// Dequantized `λ_{i0}`.
    pub fn lambda(&self) -> Result<f64> {
        let q = self.quantizer()?;
        let code = match self {
            Self::IndexList { lambda_q, .. } | Self::Threshold { lambda_q, .. } => *lambda_q,
        };
        Ok(q.decode(code))
    }

    /// Dequantized threshold, `None` for an index list.
    pub fn threshold(&self) -> Result<Option<f64>> {
        match self {
            Self::IndexList { .. } => Ok(None),
            Self::Threshold { d_q, .. } => Ok(Some(self.quantizer()?.decode(*d_q))),
        }
    }

    /// Payload size in bits for a network of `relay_count` relays.
    pub fn bit_cost(&self, relay_count: usize) -> u64 {
        match self {
            Self::IndexList { indices, b1, .. } => {
                indices.len() as u64 * u64::from(index_bits(relay_count)) + u64::from(*b1)
            }
            Self::Threshold { b1, .. } => 2 * u64::from(*b1),
        }
    }

    fn validate(&self) -> Result<LogQuantizer> {
        let q = self.quantizer()?;
        let max = q.max_code();
        match self {
            Self::IndexList { indices, lambda_q, .. } => {
                if *lambda_q > max {
                    return Err(Error::Protocol("lambda code exceeds b1 bits"));
                }
                for (k, i) in indices.iter().enumerate() {
                    if indices[..k].contains(i) {
                        return Err(Error::Protocol("duplicate relay index"));
                    }
                }
            }
            Self::Threshold { lambda_q, d_q, .. } => {
                if *lambda_q > max || *d_q > max {
                    return Err(Error::Protocol("code exceeds b1 bits"));
                }
            }
        }
        Ok(q)
    }

    /// Fixed-width encoding: tag byte (0 index list, 1 threshold), count
    /// byte, `⌈log₂R⌉`-bit indices, then `b1`-bit codes (λ, then d), packed
    /// MSB-first and zero-padded to a whole byte.
    pub fn to_bytes(&self, relay_count: usize) -> Result<Vec<u8>> {
        self.validate()?;
        let mut w = BitWriter::default();
        match self {
            Self::IndexList { indices, lambda_q, b1 } => {
                let count = u8::try_from(indices.len())
                    .map_err(|_| Error::InvalidArgument("at most 255 indices fit the count byte"))?;
                if indices.iter().any(|&i| i >= relay_count) {
                    return Err(Error::InvalidArgument("relay index out of range"));
                }
                w.push(0, 8);
                w.push(u64::from(count), 8);
                let width = index_bits(relay_count);
                for &i in indices {
                    w.push(i as u64, width);
                }
                w.push(*lambda_q, *b1);
            }
            Self::Threshold { lambda_q, d_q, b1 } => {
                w.push(1, 8);
                w.push(0, 8);
                w.push(*lambda_q, *b1);
                w.push(*d_q, *b1);
            }
        }
        Ok(w.finish())
    }

    /// Inverse of [`Self::to_bytes`]; `relay_count` and `b1` are known to
    /// every node in advance.
    pub fn from_bytes(bytes: &[u8], relay_count: usize, b1: u32) -> Result<Self> {
        LogQuantizer::new(b1).map_err(|_| Error::Protocol("b1 outside 1..=64"))?;
        let mut r = BitReader::new(bytes);
        let tag = r.take(8)?;
        let count = r.take(8)? as usize;
        let msg = match tag {
            0 => {
                let width = index_bits(relay_count);
                let mut indices = Vec::with_capacity(count);
                for _ in 0..count {
                    let i = r.take(width)? as usize;
                    if i >= relay_count {
                        return Err(Error::Protocol("relay index out of range"));
                    }
                    indices.push(i);
                }
                let lambda_q = r.take(b1)?;
                Self::IndexList { indices, lambda_q, b1 }
            }
            1 => {
                if count != 0 {
                    return Err(Error::Protocol("threshold message with nonzero count"));
                }
                let lambda_q = r.take(b1)?;
                let d_q = r.take(b1)?;
                Self::Threshold { lambda_q, d_q, b1 }
            }
            _ => return Err(Error::Protocol("unknown message tag")),
        };
        r.finish()?;
        msg.validate()?;
        Ok(msg)
    }
}

#[derive(Default)]
struct BitWriter {
    bytes: Vec<u8>,
    used: u32,
}

impl BitWriter {
    fn push(&mut self, value: u64, width: u32) {
        for k in (0..width).rev() {
            if self.used.is_multiple_of(8) {
                self.bytes.push(0);
            }
            let bit = ((value >> k) & 1) as u8;
            let last = self.bytes.len() - 1;
            self.bytes[last] |= bit << (7 - self.used % 8);
            self.used += 1;
        }
    }

    fn finish(self) -> Vec<u8> {
        self.bytes
    }
}

struct BitReader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> BitReader<'a> {
    fn new(bytes: &'a [u8]) -> Self {
        Self { bytes, pos: 0 }
    }

    fn take(&mut self, width: u32) -> Result<u64> {
        let mut value = 0u64;
        for _ in 0..width {
            let byte = *self.bytes.get(self.pos / 8).ok_or(Error::Protocol("truncated message"))?;
            let bit = (byte >> (7 - self.pos % 8)) & 1;
            value = (value << 1) | u64::from(bit);
            self.pos += 1;
        }
        Ok(value)
    }

    fn finish(self) -> Result<()> {
        if self.bytes.len() != self.pos.div_ceil(8) {
            return Err(Error::Protocol("trailing bytes"));
        }
        if !self.pos.is_multiple_of(8) {
            let last = self.bytes[self.bytes.len() - 1];
            if last & (0xff >> (self.pos % 8)) != 0 {
                return Err(Error::Protocol("nonzero padding"));
            }
        }
        Ok(())
    }
}

fn check_pairing(alloc: &PowerAllocation, ws: &SolverWorkspace) -> Result<()> {
    if alloc.alpha.len() != ws.relay_count() || alloc.i0 > ws.active_count() {
        return Err(Error::InvalidArgument("allocation does not match the workspace"));
    }
    Ok(())
}

/// Index-list message for an allocation returned by the no-direct-link
/// solver with workspace `ws`: the `i0` full-power relays in scan order and
/// the quantized `λ_{i0}`.
pub fn encode_index_list(alloc: &PowerAllocation, ws: &SolverWorkspace, b1: u32) -> Result<FeedbackMessage> {
    check_pairing(alloc, ws)?;
    let q = LogQuantizer::new(b1)?;
    Ok(FeedbackMessage::IndexList { indices: ws.tau[..alloc.i0].to_vec(), lambda_q: q.encode(ws.lambda[alloc.i0]), b1 })
}

/// Threshold message for the same allocation. `d` is the geometric mean of
/// the `φ` values on either side of the `i0` boundary (half the smallest `φ`
/// when every relay is at full power), moved to the nearest quantizer level
/// still inside the bracket.
///
/// Returns the index-list message instead when the bracket is empty (an
/// exact `φ` tie across the boundary) or too narrow for any `b1`-bit level.
pub fn encode_threshold(alloc: &PowerAllocation, ws: &SolverWorkspace, b1: u32) -> Result<FeedbackMessage> {
    check_pairing(alloc, ws)?;
    let q = LogQuantizer::new(b1)?;
    let lambda_q = q.encode(ws.lambda[alloc.i0]);
    let i0 = alloc.i0;
    let phi_at = |m: usize| ws.phi[ws.tau[m]];
    let d_q = if ws.active_count() == 0 {
        Some(q.encode(1.0))
    } else {
        let upper = if i0 == 0 { f64::INFINITY } else { phi_at(i0 - 1) };
        let (lower, target) = if i0 == ws.active_count() {
            (0.0, 0.5 * phi_at(i0 - 1))
        } else {
            let lower = phi_at(i0);
            (lower, libm::sqrt(upper * lower))
        };
        if upper > lower {
            q.nearest_inside(target, lower, upper)
        } else {
            None
        }
    };
    match d_q {
        Some(d_q) => Ok(FeedbackMessage::Threshold { lambda_q, d_q, b1 }),
        None => encode_index_list(alloc, ws, b1),
    }
}

/// Relay `own_index` reconstructs its amplitude fraction from the broadcast
/// and its local quantities. Full power when named or when `φ_j > d`;
/// otherwise `λ·φ_j` clipped to `[0, 1]`. A relay with `|f_j| = 0` or
/// `|g_j| = 0` stays silent.
pub fn relay_apply(msg: &FeedbackMessage, own_index: usize, f_mag: f64, g_mag: f64, p0: f64, pj: f64) -> Result<f64> {
    let q = msg.validate()?;
    if !(p0 > 0.0 && pj > 0.0 && f_mag >= 0.0) {
        return Err(Error::InvalidArgument("relay quantities must be positive"));
    }
    let phi = match phi_statistic(f_mag, g_mag, p0, pj) {
        Ok(phi) if phi > 0.0 => phi,
        Ok(_) | Err(Error::DegenerateRelay) => return Ok(0.0),
        Err(e) => return Err(e),
    };
    let full = match msg {
        FeedbackMessage::IndexList { indices, .. } => indices.contains(&own_index),
        FeedbackMessage::Threshold { d_q, .. } => phi > q.decode(*d_q),
    };
    if full {
        return Ok(1.0);
    }
    Ok((msg.lambda()? * phi).clamp(0.0, 1.0))
}

/// Every relay's reconstruction, for simulations holding the whole channel.
pub fn apply_all(
    msg: &FeedbackMessage,
    f_mags: &[f64],
    g_mags: &[f64],
    p0: f64,
    relay_powers: &[f64],
) -> Result<Vec<f64>> {
    if f_mags.len() != g_mags.len() || f_mags.len() != relay_powers.len() {
        return Err(Error::InvalidArgument("one entry per relay is required"));
    }
    let mut alpha = vec![0.0; f_mags.len()];
    for (j, a) in alpha.iter_mut().enumerate() {
        *a = relay_apply(msg, j, f_mags[j], g_mags[j], p0, relay_powers[j])?;
    }
    Ok(alpha)
}
