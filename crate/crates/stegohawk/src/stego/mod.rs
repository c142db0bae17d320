//! Embedding plans, LSB substitution, fitness, keys and the end-to-end
//! hide/recover pipelines.

mod fitness;
mod key;
mod pipeline;
mod plan;

pub use fitness::{fitness, FitnessConfig, FitnessEvaluator};
pub use key::{read_key, write_key, StegoKey, KEY_MAGIC, KEY_VERSION};
pub use pipeline::{run_embedding, run_extraction, EmbedOutcome, EmbedSettings, OptimizerKind};
pub use plan::{decode_plan, EmbeddingPlan};

use std::fmt;

use thiserror::Error;

use crate::audio::AudioError;
use crate::bitstream::BitStream;
use crate::image::{CandidateSet, ImageError, RasterImage};
use crate::metrics::MetricsError;
use crate::optimizer::OptimizerError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StegoError {
    #[error("plan needs {needed} slots but only {available} candidates exist")]
    PlanInfeasible { needed: usize, available: usize },
    #[error("payload needs {required} bits but capacity is {available} bits")]
    CapacityExceeded { required: u64, available: u64 },
    #[error("slot (pixel {pixel}, channel {channel}) outside the image")]
    SlotOutOfBounds { pixel: u32, channel: u8 },
    #[error("duplicate slot (pixel {pixel}, channel {channel})")]
    DuplicateSlot { pixel: u32, channel: u8 },
    #[error("LSB depth {0} unsupported (must be 1 or 2)")]
    InvalidLsbDepth(u8),
    #[error("key does not match stego image: {0}")]
    KeyMismatch(String),
    #[error("malformed key file: {0}")]
    MalformedKey(String),
    #[error("key version {found} not supported (expected {expected})")]
    KeyVersionMismatch { expected: u16, found: u16 },
    #[error("key checksum mismatch")]
    KeyChecksumMismatch,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Audio(#[from] AudioError),
    #[error(transparent)]
    Image(#[from] ImageError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Optimizer(#[from] OptimizerError),
}

/// Bits replaced per slot; deeper doubles capacity at the cost of up to
/// three intensity levels of distortion per value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LsbDepth {
    #[default]
    One,
    Two,
}

impl LsbDepth {
    pub fn bits(self) -> u8 {
        match self {
            LsbDepth::One => 1,
            LsbDepth::Two => 2,
        }
    }

    pub fn try_from_bits(bits: u8) -> Result<Self, StegoError> {
        match bits {
            1 => Ok(LsbDepth::One),
            2 => Ok(LsbDepth::Two),
            other => Err(StegoError::InvalidLsbDepth(other)),
        }
    }
}

impl fmt::Display for LsbDepth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.bits())
    }
}

/// Maximum payload bits the candidate slots can carry at a given depth.
pub fn capacity(candidates: &CandidateSet, lsb_depth: LsbDepth) -> u64 {
    candidates.len() as u64 * lsb_depth.bits() as u64
}

fn check_slots_in_bounds(image: &RasterImage, plan: &EmbeddingPlan) -> Result<(), StegoError> {
    let pixel_count = image.pixel_count();
    for slot in plan.slots() {
        if slot.pixel >= pixel_count || slot.channel > 2 {
            return Err(StegoError::SlotOutOfBounds {
                pixel: slot.pixel,
                channel: slot.channel,
            });
        }
    }
    Ok(())
}

/// Copies the cover and replaces, for slot `k`, the `lsb_depth` low bits of
/// that channel value with the next payload bits (group MSB into the higher
/// replaced bit). Unused trailing slot bits stay unchanged.
pub fn embed_bits(
    cover: &RasterImage,
    plan: &EmbeddingPlan,
    bits: &BitStream,
) -> Result<RasterImage, StegoError> {
    if (plan.capacity_bits() as u64) < bits.len() as u64 {
        return Err(StegoError::CapacityExceeded {
            required: bits.len() as u64,
            available: plan.capacity_bits() as u64,
        });
    }
    check_slots_in_bounds(cover, plan)?;

    let mut stego = cover.clone();
    let depth = plan.lsb_depth().bits() as usize;
    let mut cursor = 0;
    for slot in plan.slots() {
        if cursor >= bits.len() {
            break;
        }
        let mut value = stego.value(slot.pixel, slot.channel);
        for k in 0..depth {
            if cursor >= bits.len() {
                break;
            }
            let target = depth - 1 - k;
            let bit = bits.bit(cursor).expect("cursor checked against length") as u8;
            value = value & !(1 << target) | bit << target;
            cursor += 1;
        }
        stego.set_value(slot.pixel, slot.channel, value);
    }
    Ok(stego)
}

/// Reads low bits back in plan order; the exact inverse of [`embed_bits`].
pub fn extract_bits(
    stego: &RasterImage,
    plan: &EmbeddingPlan,
    n_bits: usize,
) -> Result<BitStream, StegoError> {
    if n_bits > plan.capacity_bits() {
        return Err(StegoError::CapacityExceeded {
            required: n_bits as u64,
            available: plan.capacity_bits() as u64,
        });
    }
    check_slots_in_bounds(stego, plan)?;

    let depth = plan.lsb_depth().bits() as usize;
    let mut out = BitStream::with_capacity(n_bits);
    'slots: for slot in plan.slots() {
        let value = stego.value(slot.pixel, slot.channel);
        for k in 0..depth {
            if out.len() == n_bits {
                break 'slots;
            }
            let target = depth - 1 - k;
            out.push_bit(value >> target & 1 == 1);
        }
    }
    Ok(out)
}
