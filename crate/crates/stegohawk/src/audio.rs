//! PCM WAV parsing/writing and the framed payload bitstream.
//!
//! A payload is carried inside the image as a self-describing frame so the
//! receiver needs no side information about the audio format:
//!
//! ```text
//! offset size field
//! 0      4    magic "SHWK"
//! 4      1    version (currently 1)
//! 5      1    reserved, zero
//! 6      4    sample_rate, u32 LE
//! 10     2    channels, u16 LE
//! 12     2    bits_per_sample, u16 LE
//! 14     4    data_len, u32 LE
//! 18     4    CRC-32 (IEEE) of the data bytes, u32 LE
//! 22     2    reserved, zero
//! 24     -    data bytes
//! ```
//!
//! The frame is serialized MSB-first per byte, so the total bit length is
//! exactly `(24 + data_len) * 8`.

use thiserror::Error;

use crate::bitstream::BitStream;

pub const FRAME_MAGIC: [u8; 4] = *b"SHWK";
pub const FRAME_VERSION: u8 = 1;
pub const FRAME_HEADER_BYTES: usize = 24;

const WAVE_FORMAT_PCM: u16 = 1;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AudioError {
    #[error("malformed WAV container: {0}")]
    MalformedContainer(String),
    #[error("unsupported audio format: {0}")]
    UnsupportedFormat(String),
    #[error("payload of {0} bytes exceeds the 2^32 - 1 frame limit")]
    PayloadTooLarge(usize),
    #[error("frame magic mismatch (wrong key or not a payload)")]
    BadMagic,
    #[error("frame version {found} not supported (expected {expected})")]
    VersionMismatch { expected: u8, found: u8 },
    #[error("bitstream too short: need {required} bits, have {available}")]
    LengthMismatch { required: usize, available: usize },
    #[error("payload checksum mismatch (stored {stored:#010x}, computed {computed:#010x})")]
    ChecksumMismatch { stored: u32, computed: u32 },
}

/// Decoded PCM audio: format metadata plus the raw data-chunk bytes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AudioPayload {
    sample_rate: u32,
    channels: u16,
    bits_per_sample: u16,
    data: Vec<u8>,
}

impl AudioPayload {
    /// Validates the supported-format invariants: positive sample rate,
    /// 1 or 2 channels, 8 or 16 bits, data length a whole number of frames.
    pub fn new(
        sample_rate: u32,
        channels: u16,
        bits_per_sample: u16,
        data: Vec<u8>,
    ) -> Result<Self, AudioError> {
        if sample_rate == 0 {
            return Err(AudioError::UnsupportedFormat(
                "sample rate must be positive".into(),
            ));
        }
        if !matches!(channels, 1 | 2) {
            return Err(AudioError::UnsupportedFormat(format!(
                "{channels} channels (only mono and stereo supported)"
            )));
        }
        if !matches!(bits_per_sample, 8 | 16) {
            return Err(AudioError::UnsupportedFormat(format!(
                "{bits_per_sample}-bit samples (only 8 and 16 supported)"
            )));
        }
        let frame_size = channels as usize * (bits_per_sample as usize / 8);
        if !data.len().is_multiple_of(frame_size) {
            return Err(AudioError::MalformedContainer(format!(
                "data length {} is not a multiple of the {}-byte sample frame",
                data.len(),
                frame_size
            )));
        }
        Ok(Self {
            sample_rate,
            channels,
            bits_per_sample,
            data,
        })
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn channels(&self) -> u16 {
        self.channels
    }

    pub fn bits_per_sample(&self) -> u16 {
        self.bits_per_sample
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    /// Bits required to carry this payload once framed.
    pub fn framed_bit_len(&self) -> usize {
        (FRAME_HEADER_BYTES + self.data.len()) * 8
    }
}

fn read_u16(raw: &[u8], at: usize) -> u16 {
    u16::from_le_bytes([raw[at], raw[at + 1]])
}

fn read_u32(raw: &[u8], at: usize) -> u32 {
    u32::from_le_bytes([raw[at], raw[at + 1], raw[at + 2], raw[at + 3]])
}

/// Parses a RIFF/WAVE container holding PCM audio.
///
/// Unknown chunks are skipped (with RIFF even-byte padding); the fmt and
/// data chunks must both be present.
pub fn parse_wav(raw: &[u8]) -> Result<AudioPayload, AudioError> {
    if raw.len() < 12 {
        return Err(AudioError::MalformedContainer(format!(
            "{} bytes is too short for a RIFF header",
            raw.len()
        )));
    }
    if &raw[0..4] != b"RIFF" {
        return Err(AudioError::MalformedContainer("missing RIFF magic".into()));
    }
    if &raw[8..12] != b"WAVE" {
        return Err(AudioError::MalformedContainer(
            "missing WAVE identifier".into(),
        ));
    }

    let mut fmt: Option<(u16, u16, u32, u16)> = None; // (format, channels, rate, bits)
    let mut data: Option<&[u8]> = None;
    let mut pos = 12;
    while pos + 8 <= raw.len() {
        let chunk_id = &raw[pos..pos + 4];
        let chunk_size = read_u32(raw, pos + 4) as usize;
        let body_start = pos + 8;
        let body_end = body_start
            .checked_add(chunk_size)
            .ok_or_else(|| AudioError::MalformedContainer("chunk size overflow".into()))?;
        if body_end > raw.len() {
            return Err(AudioError::MalformedContainer(format!(
                "chunk {:?} truncated",
                String::from_utf8_lossy(chunk_id)
            )));
        }
        match chunk_id {
            b"fmt " => {
                if chunk_size < 16 {
                    return Err(AudioError::MalformedContainer("fmt chunk too short".into()));
                }
                fmt = Some((
                    read_u16(raw, body_start),
                    read_u16(raw, body_start + 2),
                    read_u32(raw, body_start + 4),
                    read_u16(raw, body_start + 14),
                ));
            }
            b"data" => {
                data = Some(&raw[body_start..body_end]);
            }
            _ => {}
        }
        // RIFF chunks are padded to even offsets.
        pos = body_end + chunk_size % 2;
    }

    let (format, channels, sample_rate, bits_per_sample) =
        fmt.ok_or_else(|| AudioError::MalformedContainer("missing fmt chunk".into()))?;
    let data = data.ok_or_else(|| AudioError::MalformedContainer("missing data chunk".into()))?;
    if format != WAVE_FORMAT_PCM {
        return Err(AudioError::UnsupportedFormat(format!(
            "format tag {format} (only PCM supported)"
        )));
    }
    AudioPayload::new(sample_rate, channels, bits_per_sample, data.to_vec())
}

/// Emits a canonical 44-byte-header PCM WAV; the exact inverse of
/// [`parse_wav`] for any valid payload.
pub fn write_wav(payload: &AudioPayload) -> Vec<u8> {
    let data_len = payload.data.len() as u32;
    let block_align = payload.channels * (payload.bits_per_sample / 8);
    let byte_rate = payload.sample_rate * block_align as u32;

    let mut out = Vec::with_capacity(44 + payload.data.len());
    out.extend_from_slice(b"RIFF");
    out.extend_from_slice(&(36 + data_len).to_le_bytes());
    out.extend_from_slice(b"WAVE");
    out.extend_from_slice(b"fmt ");
    out.extend_from_slice(&16u32.to_le_bytes());
    out.extend_from_slice(&WAVE_FORMAT_PCM.to_le_bytes());
    out.extend_from_slice(&payload.channels.to_le_bytes());
    out.extend_from_slice(&payload.sample_rate.to_le_bytes());
    out.extend_from_slice(&byte_rate.to_le_bytes());
    out.extend_from_slice(&block_align.to_le_bytes());
    out.extend_from_slice(&payload.bits_per_sample.to_le_bytes());
    out.extend_from_slice(b"data");
    out.extend_from_slice(&data_len.to_le_bytes());
    out.extend_from_slice(&payload.data);
    out
}

/// Frames the payload into the embeddable bitstream described in the
/// module docs.
pub fn frame_payload(payload: &AudioPayload) -> Result<BitStream, AudioError> {
    let data_len = u32::try_from(payload.data.len())
        .map_err(|_| AudioError::PayloadTooLarge(payload.data.len()))?;

    let mut frame = Vec::with_capacity(FRAME_HEADER_BYTES + payload.data.len());
    frame.extend_from_slice(&FRAME_MAGIC);
    frame.push(FRAME_VERSION);
    frame.push(0);
    frame.extend_from_slice(&payload.sample_rate.to_le_bytes());
    frame.extend_from_slice(&payload.channels.to_le_bytes());
    frame.extend_from_slice(&payload.bits_per_sample.to_le_bytes());
    frame.extend_from_slice(&data_len.to_le_bytes());
    frame.extend_from_slice(&crc32fast::hash(&payload.data).to_le_bytes());
    frame.extend_from_slice(&[0, 0]);
    frame.extend_from_slice(&payload.data);
    Ok(BitStream::from_bytes(&frame))
}

/// Inverse of [`frame_payload`]; validates magic, version, length and the
/// data checksum. A checksum failure signals a wrong key or a corrupted
/// stego image.
pub fn deframe_payload(bits: &BitStream) -> Result<AudioPayload, AudioError> {
    let header_bits = FRAME_HEADER_BYTES * 8;
    if bits.len() < header_bits {
        return Err(AudioError::LengthMismatch {
            required: header_bits,
            available: bits.len(),
        });
    }
    let header = bits.leading_bytes(FRAME_HEADER_BYTES);
    if header[0..4] != FRAME_MAGIC {
        return Err(AudioError::BadMagic);
    }
    if header[4] != FRAME_VERSION {
        return Err(AudioError::VersionMismatch {
            expected: FRAME_VERSION,
            found: header[4],
        });
    }
    let sample_rate = read_u32(header, 6);
    let channels = read_u16(header, 10);
    let bits_per_sample = read_u16(header, 12);
    let data_len = read_u32(header, 14) as usize;
    let stored_crc = read_u32(header, 18);

    let required = (FRAME_HEADER_BYTES + data_len) * 8;
    if bits.len() < required {
        return Err(AudioError::LengthMismatch {
            required,
            available: bits.len(),
        });
    }
    let data = bits.leading_bytes(FRAME_HEADER_BYTES + data_len)[FRAME_HEADER_BYTES..].to_vec();
    let computed = crc32fast::hash(&data);
    if computed != stored_crc {
        return Err(AudioError::ChecksumMismatch {
            stored: stored_crc,
            computed,
        });
    }
    AudioPayload::new(sample_rate, channels, bits_per_sample, data)
}
