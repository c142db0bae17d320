//! Decoding optimizer positions into concrete slot assignments.

use std::collections::HashSet;

use super::{LsbDepth, StegoError};
use crate::image::{CandidateSet, Slot};

/// A concrete assignment of payload bit groups to distinct slots, in
/// payload order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmbeddingPlan {
    slots: Vec<Slot>,
    lsb_depth: LsbDepth,
}

impl EmbeddingPlan {
    pub fn new(slots: Vec<Slot>, lsb_depth: LsbDepth) -> Result<Self, StegoError> {
        let mut seen = HashSet::with_capacity(slots.len());
        for slot in &slots {
            if !seen.insert(((slot.pixel as u64) << 2) | slot.channel as u64) {
                return Err(StegoError::DuplicateSlot {
                    pixel: slot.pixel,
                    channel: slot.channel,
                });
            }
        }
        Ok(Self { slots, lsb_depth })
    }

    /// Constructor for callers that guarantee distinctness structurally
    /// (the probe rule in [`decode_plan`], a validated key).
    pub(crate) fn from_distinct_slots(slots: Vec<Slot>, lsb_depth: LsbDepth) -> Self {
        debug_assert!({
            let mut seen = HashSet::new();
            slots
                .iter()
                .all(|s| seen.insert(((s.pixel as u64) << 2) | s.channel as u64))
        });
        Self { slots, lsb_depth }
    }

    pub fn slots(&self) -> &[Slot] {
        &self.slots
    }

    pub fn lsb_depth(&self) -> LsbDepth {
        self.lsb_depth
    }

    pub fn capacity_bits(&self) -> usize {
        self.slots.len() * self.lsb_depth.bits() as usize
    }
}

/// Maps each position coordinate to a candidate slot: round to the nearest
/// index, clamp into range, and resolve collisions by probing upward
/// (wrapping) to the next unused candidate. Output order follows
/// coordinate order, so bit `k` of the payload always lands at the slot
/// decoded from coordinate `k / lsb_depth`.
pub fn decode_plan(
    position: &[f64],
    candidates: &CandidateSet,
    lsb_depth: LsbDepth,
) -> Result<EmbeddingPlan, StegoError> {
    let n = candidates.len();
    if position.len() > n {
        return Err(StegoError::PlanInfeasible {
            needed: position.len(),
            available: n,
        });
    }

    // next_free[i] == i while candidate i is unused; an occupied entry
    // points onward, so chasing the chain lands on the first unused index
    // at or after i in wrap order - the same slot naive upward probing
    // would find, found in near-constant amortized time even when the
    // optimizer's coordinates cluster tightly.
    let mut next_free: Vec<u32> = (0..n as u32).collect();
    let mut slots = Vec::with_capacity(position.len());
    let max_index = (n - 1) as f64;
    for &coordinate in position {
        let rounded = if coordinate.is_nan() {
            0.0
        } else {
            coordinate.round().clamp(0.0, max_index)
        };
        let mut index = rounded as usize;
        loop {
            let parent = next_free[index] as usize;
            if parent == index {
                break;
            }
            // Path halving: skip to the grandparent and remember it.
            let grandparent = next_free[parent] as usize;
            next_free[index] = grandparent as u32;
            index = grandparent;
        }
        next_free[index] = if index + 1 == n { 0 } else { index as u32 + 1 };
        slots.push(candidates.slot(index));
    }
    Ok(EmbeddingPlan::from_distinct_slots(slots, lsb_depth))
}
