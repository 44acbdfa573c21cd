//! Bit-exact serialization of coded packets and generation containers.
//!
//! A container is one header followed by length-prefixed packet records:
//!
//! ```text
//! header (20 bytes)
//!   magic             4 bytes   ASCII "NCP1"
//!   version           1 byte    1
//!   field bits (s)    1 byte    1, 2, 4, 8 or 16
//!   packet count (n)  2 bytes   big-endian
//!   symbols/packet(m) 4 bytes   big-endian
//!   original length   8 bytes   big-endian, bytes before padding
//! record, repeated
//!   record length     4 bytes   big-endian
//!   encoding vector   ceil(n*s/8) bytes
//!   payload           ceil(m*s/8) bytes
//! ```
//!
//! Both packet sections are dense MSB-first packs of `s`-bit symbols, each
//! zero-padded to its own byte boundary, so GF(2^8) packets are plain byte
//! dumps. Readers reject any nonzero padding bit. The per-packet overhead is
//! exactly the encoding vector riding along with the coded data.

use std::io::{self, Read, Write};

use thiserror::Error;

use crate::bits::{BitReader, BitWriter};
use crate::codec::{CodedPacket, GenerationParams};
use crate::galois::{Field, Symbol, TableMode, MAX_TABLE_WIDTH, SUPPORTED_WIDTHS};

pub const MAGIC: [u8; 4] = *b"NCP1";
pub const VERSION: u8 = 1;
pub const HEADER_LEN: usize = 20;

#[derive(Debug, Error)]
pub enum WireError {
    #[error("i/o failure: {0}")]
    Io(#[from] io::Error),
    #[error("bad magic {0:02x?}, not a coded-packet container")]
    BadMagic([u8; 4]),
    #[error("unsupported container version {0}")]
    BadVersion(u8),
    #[error("container declares unsupported symbol width {0}")]
    BadWidth(u8),
    #[error("framing: {0}")]
    Framing(String),
    #[error("integrity: {0}")]
    Integrity(String),
    #[error("capacity: {n} packets of {m} symbols cannot hold {original_byte_len} bytes")]
    InsufficientCapacity { n: u16, m: u32, original_byte_len: u64 },
}

/// The fixed-size container header carrying the generation shape.
///
/// `original_byte_len` resolves the padding question once per generation: the
/// receiver truncates the reassembled bytes to this length.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ContainerHeader {
    pub field_bits: u8,
    pub packet_count: u16,
    pub symbols_per_packet: u32,
    pub original_byte_len: u64,
}

impl ContainerHeader {
    pub fn validate(&self) -> Result<(), WireError> {
        if !SUPPORTED_WIDTHS.contains(&(self.field_bits as u32)) {
            return Err(WireError::BadWidth(self.field_bits));
        }
        if self.packet_count == 0 || self.symbols_per_packet == 0 {
            return Err(WireError::Framing(
                "packet count and symbols per packet must be nonzero".into(),
            ));
        }
        // Every packet must hold its slice of the original: m*s bits per
        // packet against ceil(len / n) bytes.
        let chunk_bytes = self.original_byte_len.div_ceil(self.packet_count as u64);
        let capacity_bits = self.symbols_per_packet as u64 * self.field_bits as u64;
        if chunk_bytes * 8 > capacity_bits {
            return Err(WireError::InsufficientCapacity {
                n: self.packet_count,
                m: self.symbols_per_packet,
                original_byte_len: self.original_byte_len,
            });
        }
        Ok(())
    }

    pub fn to_bytes(&self) -> [u8; HEADER_LEN] {
        let mut bytes = [0u8; HEADER_LEN];
        bytes[0..4].copy_from_slice(&MAGIC);
        bytes[4] = VERSION;
        bytes[5] = self.field_bits;
        bytes[6..8].copy_from_slice(&self.packet_count.to_be_bytes());
        bytes[8..12].copy_from_slice(&self.symbols_per_packet.to_be_bytes());
        bytes[12..20].copy_from_slice(&self.original_byte_len.to_be_bytes());
        bytes
    }

    pub fn from_bytes(bytes: &[u8; HEADER_LEN]) -> Result<Self, WireError> {
        let mut magic = [0u8; 4];
        magic.copy_from_slice(&bytes[0..4]);
        if magic != MAGIC {
            return Err(WireError::BadMagic(magic));
        }
        if bytes[4] != VERSION {
            return Err(WireError::BadVersion(bytes[4]));
        }
        let header = ContainerHeader {
            field_bits: bytes[5],
            packet_count: u16::from_be_bytes([bytes[6], bytes[7]]),
            symbols_per_packet: u32::from_be_bytes([bytes[8], bytes[9], bytes[10], bytes[11]]),
            original_byte_len: u64::from_be_bytes(bytes[12..20].try_into().expect("8 bytes")),
        };
        header.validate()?;
        Ok(header)
    }

    /// Generation parameters matching this header. Lookup tables are enabled
    /// whenever the width allows, which is what bulk decoding wants.
    pub fn generation_params(&self) -> Result<GenerationParams, WireError> {
        self.validate()?;
        let mode = if self.field_bits as u32 <= MAX_TABLE_WIDTH {
            TableMode::On
        } else {
            TableMode::Off
        };
        let field = Field::new(self.field_bits as u32, mode)
            .map_err(|_| WireError::BadWidth(self.field_bits))?;
        GenerationParams::new(self.packet_count as usize, self.symbols_per_packet as usize, field)
            .map_err(|e| WireError::Framing(e.to_string()))
    }

    /// Exact serialized size of one packet record body (without the length
    /// prefix): `ceil(n*s/8) + ceil(m*s/8)`.
    pub fn packet_record_len(&self) -> usize {
        section_len(self.packet_count as usize, self.field_bits as u32)
            + section_len(self.symbols_per_packet as usize, self.field_bits as u32)
    }
}

fn section_len(symbols: usize, bits: u32) -> usize {
    (symbols * bits as usize).div_ceil(8)
}

fn pack_section(symbols: &[Symbol], bits: u32, out: &mut Vec<u8>) {
    let mut writer = BitWriter::with_capacity(symbols.len() * bits as usize);
    for &symbol in symbols {
        writer.push(symbol, bits);
    }
    out.extend_from_slice(&writer.finish());
}

fn unpack_section(bytes: &[u8], count: usize, bits: u32, what: &str) -> Result<Vec<Symbol>, WireError> {
    let mut reader = BitReader::new(bytes);
    let mut symbols = Vec::with_capacity(count);
    for _ in 0..count {
        symbols.push(reader.read(bits));
    }
    if !reader.rest_is_zero() {
        return Err(WireError::Integrity(format!("nonzero padding bit in {what} section")));
    }
    Ok(symbols)
}

/// Serializes one packet: the encoding vector section, then the payload
/// section, each packed MSB-first and zero-padded to a byte boundary.
pub fn write_packet(packet: &CodedPacket, header: &ContainerHeader) -> Result<Vec<u8>, WireError> {
    header.validate()?;
    if packet.encoding_vector.len() != header.packet_count as usize
        || packet.payload.len() != header.symbols_per_packet as usize
    {
        return Err(WireError::Framing(format!(
            "packet shape {}x{} does not match header {}x{}",
            packet.encoding_vector.len(),
            packet.payload.len(),
            header.packet_count,
            header.symbols_per_packet
        )));
    }
    let bits = header.field_bits as u32;
    let max = (1u32 << bits) - 1;
    for &symbol in packet.encoding_vector.iter().chain(&packet.payload) {
        if symbol > max {
            return Err(WireError::Integrity(format!(
                "symbol {symbol:#x} does not fit in {bits} bits"
            )));
        }
    }
    let mut out = Vec::with_capacity(header.packet_record_len());
    pack_section(&packet.encoding_vector, bits, &mut out);
    pack_section(&packet.payload, bits, &mut out);
    Ok(out)
}

/// Parses one packet record body. The input must be exactly
/// [`ContainerHeader::packet_record_len`] bytes.
pub fn read_packet(bytes: &[u8], header: &ContainerHeader) -> Result<CodedPacket, WireError> {
    header.validate()?;
    let expected = header.packet_record_len();
    if bytes.len() != expected {
        return Err(WireError::Framing(format!(
            "packet record is {} bytes, expected {expected}",
            bytes.len()
        )));
    }
    let bits = header.field_bits as u32;
    let vector_len = section_len(header.packet_count as usize, bits);
    let encoding_vector = unpack_section(
        &bytes[..vector_len],
        header.packet_count as usize,
        bits,
        "encoding vector",
    )?;
    let payload = unpack_section(
        &bytes[vector_len..],
        header.symbols_per_packet as usize,
        bits,
        "payload",
    )?;
    Ok(CodedPacket { encoding_vector, payload })
}

/// Writes a full container: header, then each packet as a length-prefixed
/// record.
pub fn write_container<W: Write>(
    mut out: W,
    header: &ContainerHeader,
    packets: &[CodedPacket],
) -> Result<(), WireError> {
    header.validate()?;
    out.write_all(&header.to_bytes())?;
    for packet in packets {
        let record = write_packet(packet, header)?;
        out.write_all(&(record.len() as u32).to_be_bytes())?;
        out.write_all(&record)?;
    }
    Ok(())
}

/// Reads a full container back. Every record must carry the exact length the
/// header dictates; trailing partial records are framing errors.
pub fn read_container<R: Read>(mut input: R) -> Result<(ContainerHeader, Vec<CodedPacket>), WireError> {
    let mut header_bytes = [0u8; HEADER_LEN];
    input
        .read_exact(&mut header_bytes)
        .map_err(|e| match e.kind() {
            io::ErrorKind::UnexpectedEof => WireError::Framing("container shorter than its header".into()),
            _ => WireError::Io(e),
        })?;
    let header = ContainerHeader::from_bytes(&header_bytes)?;
    let record_len = header.packet_record_len();

    let mut packets = Vec::new();
    loop {
        let mut prefix = [0u8; 4];
        if !read_exact_or_eof(&mut input, &mut prefix)? {
            break; // clean end of container
        }
        let declared = u32::from_be_bytes(prefix) as usize;
        if declared != record_len {
            return Err(WireError::Framing(format!(
                "record declares {declared} bytes, expected {record_len}"
            )));
        }
        let mut record = vec![0u8; record_len];
        input.read_exact(&mut record).map_err(|e| match e.kind() {
            io::ErrorKind::UnexpectedEof => WireError::Framing("truncated packet record".into()),
            _ => WireError::Io(e),
        })?;
        packets.push(read_packet(&record, &header)?);
    }
    Ok((header, packets))
}

/// Fills `buf` completely, or returns `false` if the reader was already at
/// end of input. A partial fill is a framing error.
fn read_exact_or_eof<R: Read>(input: &mut R, buf: &mut [u8]) -> Result<bool, WireError> {
    let mut filled = 0;
    while filled < buf.len() {
        match input.read(&mut buf[filled..]) {
            Ok(0) if filled == 0 => return Ok(false),
            Ok(0) => {
                return Err(WireError::Framing("truncated record length prefix".into()));
            }
            Ok(read) => filled += read,
            Err(e) if e.kind() == io::ErrorKind::Interrupted => {}
            Err(e) => return Err(WireError::Io(e)),
        }
    }
    Ok(true)
}
