//! The stego key: everything the receiver needs for exact extraction.
//!
//! Wire format, little-endian:
//!
//! ```text
//! magic "SHWK-KEY" (8) | version u16 | width u32 | height u32
//! | lsb_depth u8 | reserved u8 | payload_bit_length u64 | slot_count u64
//! | slot_count x { pixel_index u32, channel u8 }
//! | crc32 of everything above, u32
//! ```

use std::collections::HashSet;

use super::{EmbeddingPlan, LsbDepth, StegoError};
use crate::image::Slot;

pub const KEY_MAGIC: &[u8; 8] = b"SHWK-KEY";
pub const KEY_VERSION: u16 = 1;

const KEY_FIXED_BYTES: usize = 8 + 2 + 4 + 4 + 1 + 1 + 8 + 8 + 4;
const SLOT_BYTES: usize = 5;

/// Serialized record enabling exact extraction: the slot list, LSB depth,
/// payload length and the cover dimensions it belongs to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StegoKey {
    width: u32,
    height: u32,
    lsb_depth: LsbDepth,
    payload_bit_length: u64,
    slots: Vec<Slot>,
}

impl StegoKey {
    pub fn new(
        width: u32,
        height: u32,
        lsb_depth: LsbDepth,
        payload_bit_length: u64,
        slots: Vec<Slot>,
    ) -> Result<Self, StegoError> {
        let pixel_count = width as u64 * height as u64;
        let mut seen = HashSet::with_capacity(slots.len());
        for slot in &slots {
            if (slot.pixel as u64) >= pixel_count || slot.channel > 2 {
                return Err(StegoError::SlotOutOfBounds {
                    pixel: slot.pixel,
                    channel: slot.channel,
                });
            }
            if !seen.insert(((slot.pixel as u64) << 2) | slot.channel as u64) {
                return Err(StegoError::DuplicateSlot {
                    pixel: slot.pixel,
                    channel: slot.channel,
                });
            }
        }
        // The plan never reserves more capacity than the payload needs.
        let needed = payload_bit_length.div_ceil(lsb_depth.bits() as u64);
        if slots.len() as u64 != needed {
            return Err(StegoError::InvalidConfig(format!(
                "{} slots cannot carry exactly {payload_bit_length} bits at depth {lsb_depth}",
                slots.len()
            )));
        }
        Ok(Self {
            width,
            height,
            lsb_depth,
            payload_bit_length,
            slots,
        })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn lsb_depth(&self) -> LsbDepth {
        self.lsb_depth
    }

    pub fn payload_bit_length(&self) -> u64 {
        self.payload_bit_length
    }

    pub fn slots(&self) -> &[Slot] {
        &self.slots
    }

    pub fn plan(&self) -> EmbeddingPlan {
        EmbeddingPlan::from_distinct_slots(self.slots.clone(), self.lsb_depth)
    }
}

pub fn write_key(key: &StegoKey) -> Vec<u8> {
    let mut out = Vec::with_capacity(KEY_FIXED_BYTES + key.slots.len() * SLOT_BYTES);
    out.extend_from_slice(KEY_MAGIC);
    out.extend_from_slice(&KEY_VERSION.to_le_bytes());
    out.extend_from_slice(&key.width.to_le_bytes());
    out.extend_from_slice(&key.height.to_le_bytes());
    out.push(key.lsb_depth.bits());
    out.push(0);
    out.extend_from_slice(&key.payload_bit_length.to_le_bytes());
    out.extend_from_slice(&(key.slots.len() as u64).to_le_bytes());
    for slot in &key.slots {
        out.extend_from_slice(&slot.pixel.to_le_bytes());
        out.push(slot.channel);
    }
    let crc = crc32fast::hash(&out);
    out.extend_from_slice(&crc.to_le_bytes());
    out
}

pub fn read_key(raw: &[u8]) -> Result<StegoKey, StegoError> {
    if raw.len() < KEY_FIXED_BYTES {
        return Err(StegoError::MalformedKey(format!(
            "{} bytes is shorter than the fixed layout",
            raw.len()
        )));
    }
    if &raw[0..8] != KEY_MAGIC {
        return Err(StegoError::MalformedKey("bad magic".into()));
    }
    let version = u16::from_le_bytes([raw[8], raw[9]]);
    if version != KEY_VERSION {
        return Err(StegoError::KeyVersionMismatch {
            expected: KEY_VERSION,
            found: version,
        });
    }
    let width = u32::from_le_bytes([raw[10], raw[11], raw[12], raw[13]]);
    let height = u32::from_le_bytes([raw[14], raw[15], raw[16], raw[17]]);
    let lsb_depth = LsbDepth::try_from_bits(raw[18])
        .map_err(|_| StegoError::MalformedKey(format!("LSB depth byte {}", raw[18])))?;
    let payload_bit_length = u64::from_le_bytes(raw[20..28].try_into().expect("8 bytes"));
    let slot_count = u64::from_le_bytes(raw[28..36].try_into().expect("8 bytes"));

    let expected_len = KEY_FIXED_BYTES as u64 + slot_count * SLOT_BYTES as u64;
    if raw.len() as u64 != expected_len {
        return Err(StegoError::MalformedKey(format!(
            "{} bytes but {slot_count} slots imply {expected_len}",
            raw.len()
        )));
    }

    let body_end = raw.len() - 4;
    let stored_crc = u32::from_le_bytes(raw[body_end..].try_into().expect("4 bytes"));
    if crc32fast::hash(&raw[..body_end]) != stored_crc {
        return Err(StegoError::KeyChecksumMismatch);
    }

    let mut slots = Vec::with_capacity(slot_count as usize);
    let mut at = 36;
    for _ in 0..slot_count {
        slots.push(Slot {
            pixel: u32::from_le_bytes(raw[at..at + 4].try_into().expect("4 bytes")),
            channel: raw[at + 4],
        });
        at += SLOT_BYTES;
    }
    StegoKey::new(width, height, lsb_depth, payload_bit_length, slots)
        .map_err(|e| StegoError::MalformedKey(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_key() -> StegoKey {
        let slots = vec![
            Slot {
                pixel: 10,
                channel: 0,
            },
            Slot {
                pixel: 10,
                channel: 2,
            },
            Slot {
                pixel: 99,
                channel: 1,
            },
        ];
        StegoKey::new(16, 16, LsbDepth::Two, 6, slots).unwrap()
    }

    #[test]
    fn read_inverts_write() {
        let key = sample_key();
        assert_eq!(read_key(&write_key(&key)).unwrap(), key);
    }

    #[test]
    fn empty_key_is_forty_bytes() {
        let key = StegoKey::new(8, 8, LsbDepth::One, 0, vec![]).unwrap();
        let bytes = write_key(&key);
        assert_eq!(bytes.len(), 40);
        assert_eq!(read_key(&bytes).unwrap(), key);
    }

    #[test]
    fn flipped_slot_byte_fails_checksum() {
        let mut bytes = write_key(&sample_key());
        bytes[37] ^= 0x40;
        assert_eq!(read_key(&bytes).unwrap_err(), StegoError::KeyChecksumMismatch);
    }

    #[test]
    fn bad_magic_is_malformed() {
        let mut bytes = write_key(&sample_key());
        bytes[0] = b'X';
        assert!(matches!(
            read_key(&bytes).unwrap_err(),
            StegoError::MalformedKey(_)
        ));
    }

    #[test]
    fn version_bump_is_detected() {
        let mut bytes = write_key(&sample_key());
        bytes[8] = 2;
        // Keep the checksum consistent so the version check is what fires.
        let body_end = bytes.len() - 4;
        let crc = crc32fast::hash(&bytes[..body_end]).to_le_bytes();
        bytes[body_end..].copy_from_slice(&crc);
        assert_eq!(
            read_key(&bytes).unwrap_err(),
            StegoError::KeyVersionMismatch {
                expected: 1,
                found: 2
            }
        );
    }

    #[test]
    fn truncated_key_is_malformed() {
        let bytes = write_key(&sample_key());
        assert!(matches!(
            read_key(&bytes[..bytes.len() - 3]).unwrap_err(),
            StegoError::MalformedKey(_)
        ));
    }

    #[test]
    fn slot_capacity_must_match_payload() {
        let slots = vec![Slot {
            pixel: 0,
            channel: 0,
        }];
        let err = StegoKey::new(4, 4, LsbDepth::One, 5, slots).unwrap_err();
        assert!(matches!(err, StegoError::InvalidConfig(_)));
    }

    #[test]
    fn out_of_range_slot_rejected() {
        let slots = vec![Slot {
            pixel: 16,
            channel: 0,
        }];
        let err = StegoKey::new(4, 4, LsbDepth::One, 1, slots).unwrap_err();
        assert!(matches!(err, StegoError::SlotOutOfBounds { .. }));
    }
}
