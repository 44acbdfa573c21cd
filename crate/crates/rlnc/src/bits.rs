//! MSB-first bit packing shared by the codec and the wire format.

/// Accumulates values MSB-first into a byte buffer.
pub(crate) struct BitWriter {
    bytes: Vec<u8>,
    bit_len: usize,
}

impl BitWriter {
    pub(crate) fn with_capacity(bits: usize) -> Self {
        BitWriter { bytes: Vec::with_capacity(bits.div_ceil(8)), bit_len: 0 }
    }

    /// Appends the low `width` bits of `value`, most significant first.
    pub(crate) fn push(&mut self, value: u32, width: u32) {
        debug_assert!((1..=32).contains(&width));
        debug_assert!(width == 32 || value < (1u32 << width));
        for i in (0..width).rev() {
            let bit = (value >> i) & 1;
            if self.bit_len.is_multiple_of(8) {
                self.bytes.push(0);
            }
            let byte = self.bytes.last_mut().expect("pushed above");
            *byte |= (bit as u8) << (7 - (self.bit_len % 8));
            self.bit_len += 1;
        }
    }

    /// Returns the buffer, with the trailing partial byte zero-padded.
    pub(crate) fn finish(self) -> Vec<u8> {
        self.bytes
    }
}

/// Reads values MSB-first out of a byte slice.
pub(crate) struct BitReader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> BitReader<'a> {
    pub(crate) fn new(bytes: &'a [u8]) -> Self {
        BitReader { bytes, pos: 0 }
    }

    pub(crate) fn remaining(&self) -> usize {
        self.bytes.len() * 8 - self.pos
    }

    fn next_bit(&mut self) -> u32 {
        let byte = self.bytes[self.pos / 8];
        let bit = (byte >> (7 - (self.pos % 8))) & 1;
        self.pos += 1;
        bit as u32
    }

    /// Reads the next `width` bits as one value. The caller must check
    /// `remaining()` first.
    pub(crate) fn read(&mut self, width: u32) -> u32 {
        debug_assert!(width as usize <= self.remaining());
        let mut value = 0;
        for _ in 0..width {
            value = (value << 1) | self.next_bit();
        }
        value
    }

    /// Reads up to `width` bits; if fewer are left, the missing low bits are
    /// taken as zero. Used when cutting a byte stream into symbols whose width
    /// does not divide the stream length.
    pub(crate) fn read_padded(&mut self, width: u32) -> u32 {
        let available = (self.remaining() as u32).min(width);
        let value = self.read(available);
        value << (width - available)
    }

    /// True if every bit left in the buffer is zero.
    pub(crate) fn rest_is_zero(&mut self) -> bool {
        while self.remaining() > 0 {
            if self.next_bit() != 0 {
                return false;
            }
        }
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn writer_packs_msb_first() {
        let mut w = BitWriter::with_capacity(0);
        w.push(0, 1);
        w.push(1, 1);
        w.push(0, 1);
        w.push(0, 1);
        w.push(1, 1);
        assert_eq!(w.finish(), vec![0b0100_1000]);
    }

    #[test]
    fn writer_crosses_byte_boundaries() {
        let mut w = BitWriter::with_capacity(0);
        w.push(0xF, 4);
        w.push(0x0, 4);
        w.push(0xF, 4);
        assert_eq!(w.finish(), vec![0xF0, 0xF0]);

        let mut w = BitWriter::with_capacity(0);
        w.push(0xABCD, 16);
        w.push(0x3, 2);
        assert_eq!(w.finish(), vec![0xAB, 0xCD, 0b1100_0000]);
    }

    #[test]
    fn reader_roundtrips_writer() {
        let widths = [1, 2, 4, 8, 16];
        for &width in &widths {
            let values: Vec<u32> =
                (0..23u32).map(|i| i.wrapping_mul(2654435761) & ((1 << width) - 1)).collect();
            let mut w = BitWriter::with_capacity(0);
            for &v in &values {
                w.push(v, width);
            }
            let bytes = w.finish();
            let mut r = BitReader::new(&bytes);
            for &v in &values {
                assert_eq!(r.read(width), v);
            }
            assert!(r.rest_is_zero());
        }
    }

    #[test]
    fn read_padded_fills_missing_low_bits() {
        let bytes = [0b1011_0000];
        let mut r = BitReader::new(&bytes);
        assert_eq!(r.read(4), 0b1011);
        // Only 4 bits remain; a 16-bit read takes them as the high bits.
        assert_eq!(r.read_padded(16), 0b0000_0000_0000_0000);

        let bytes = [0xFF];
        let mut r = BitReader::new(&bytes);
        assert_eq!(r.read_padded(16), 0xFF00);
    }

    #[test]
    fn rest_is_zero_spots_stray_bits() {
        let bytes = [0b1000_0001];
        let mut r = BitReader::new(&bytes);
        r.read(1);
        assert!(!r.rest_is_zero());
    }
}
