//! Packed bit sequences, most-significant-bit first within each byte.

/// Ordered sequence of bits backed by packed bytes.
///
/// Bit `i` lives in byte `i / 8` at position `7 - i % 8`, so serializing a
/// byte and reading its bits back yields the byte's bits from MSB to LSB.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct BitStream {
    bytes: Vec<u8>,
    bit_len: usize,
}

impl BitStream {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity(bits: usize) -> Self {
        Self {
            bytes: Vec::with_capacity(bits.div_ceil(8)),
            bit_len: 0,
        }
    }

    /// All bits of `bytes` in order, MSB of each byte first.
    pub fn from_bytes(bytes: &[u8]) -> Self {
        Self {
            bytes: bytes.to_vec(),
            bit_len: bytes.len() * 8,
        }
    }

    pub fn len(&self) -> usize {
        self.bit_len
    }

    pub fn is_empty(&self) -> bool {
        self.bit_len == 0
    }

    pub fn push_bit(&mut self, bit: bool) {
        let offset = self.bit_len % 8;
        if offset == 0 {
            self.bytes.push(0);
        }
        if bit {
            *self.bytes.last_mut().expect("byte just pushed") |= 1 << (7 - offset);
        }
        self.bit_len += 1;
    }

    pub fn push_byte(&mut self, byte: u8) {
        if self.bit_len.is_multiple_of(8) {
            self.bytes.push(byte);
            self.bit_len += 8;
        } else {
            for shift in (0..8).rev() {
                self.push_bit((byte >> shift) & 1 == 1);
            }
        }
    }

    /// Bit at `index`, or `None` past the end.
    pub fn bit(&self, index: usize) -> Option<bool> {
        if index >= self.bit_len {
            return None;
        }
        Some(self.bytes[index / 8] >> (7 - index % 8) & 1 == 1)
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.bit_len).map(move |i| self.bit(i).expect("index within length"))
    }

    /// Packed bytes; the final byte is zero-padded when the length is not a
    /// multiple of eight.
    pub fn as_raw_bytes(&self) -> &[u8] {
        &self.bytes
    }

    /// First `n` whole bytes, panicking if fewer than `n * 8` bits exist.
    pub fn leading_bytes(&self, n: usize) -> &[u8] {
        assert!(n * 8 <= self.bit_len, "bitstream shorter than {n} bytes");
        &self.bytes[..n]
    }
}

impl FromIterator<bool> for BitStream {
    fn from_iter<T: IntoIterator<Item = bool>>(iter: T) -> Self {
        let mut stream = BitStream::new();
        for bit in iter {
            stream.push_bit(bit);
        }
        stream
    }
}
