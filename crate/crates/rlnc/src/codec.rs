//! Packet-level coding: cutting byte payloads into field symbols, random
//! linear encoding, intermediate-node recoding and incremental decoding.
//!
//! A generation is `n` source packets of `m` symbols each. Every coded packet
//! carries an *encoding vector* (its weight over each original packet) next to
//! its *information vector* (the combined payload); together they state one
//! linear equation over the originals. The [`Decoder`] keeps the received
//! equations as an augmented matrix in reduced row echelon form, so the rank
//! and the already-recoverable originals can be read off at any time.

use rand::Rng;
use thiserror::Error;

use crate::bits::{BitReader, BitWriter};
use crate::galois::{Field, Symbol};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CodecError {
    #[error("a generation needs at least one packet and one symbol per packet")]
    EmptyGeneration,
    #[error("recoding needs at least one received packet")]
    NothingToRecode,
    #[error("input is {got} bits but a packet holds at most {capacity} bits")]
    PayloadTooLong { got: usize, capacity: usize },
    #[error("coefficient vector must not be all zero")]
    ZeroCoefficients,
    #[error("expected {expected} {what}, got {got}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("symbol {value:#x} does not fit in GF(2^{bits})")]
    SymbolOutOfRange { value: Symbol, bits: u32 },
    #[error("the recoded encoding vector vanished: the inputs are dependent under these weights")]
    DegenerateCombination,
    #[error("requested {requested} bytes but the payload holds only {available}")]
    ByteLengthTooLarge { requested: usize, available: usize },
}

/// Shape of one generation: `n` original packets of `m` symbols over a field.
#[derive(Debug, Clone)]
pub struct GenerationParams {
    n: usize,
    m: usize,
    field: Field,
}

impl GenerationParams {
    pub fn new(n: usize, m: usize, field: Field) -> Result<Self, CodecError> {
        if n == 0 || m == 0 {
            return Err(CodecError::EmptyGeneration);
        }
        Ok(GenerationParams { n, m, field })
    }

    /// Derives `m` from a packet size in bytes: `packet_size / s` symbols,
    /// rounded up so a partial trailing symbol still fits.
    pub fn for_packet_bytes(n: usize, packet_bytes: usize, field: Field) -> Result<Self, CodecError> {
        let m = (packet_bytes * 8).div_ceil(field.bits() as usize);
        Self::new(n, m, field)
    }

    /// Number of original packets in the generation (`n`).
    pub fn packet_count(&self) -> usize {
        self.n
    }

    /// Symbols per packet (`m`).
    pub fn symbols_per_packet(&self) -> usize {
        self.m
    }

    pub fn field(&self) -> &Field {
        &self.field
    }
}

/// An original packet: `m` symbols, the last `pad_count` of which are zero
/// padding appended by [`symbolize`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourcePacket {
    pub payload: Vec<Symbol>,
    pub pad_count: usize,
}

/// A coded packet: the encoding vector `(e_1 .. e_n)` and the combined
/// payload it weighs together.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodedPacket {
    pub encoding_vector: Vec<Symbol>,
    pub payload: Vec<Symbol>,
}

fn check_symbols(values: &[Symbol], field: &Field) -> Result<(), CodecError> {
    match values.iter().find(|&&v| !field.contains(v)) {
        Some(&value) => Err(CodecError::SymbolOutOfRange { value, bits: field.bits() }),
        None => Ok(()),
    }
}

/// Cuts a byte payload into `m` symbols of `s` bits, consuming bits MSB-first
/// and appending zero symbols up to `m`. Fails if the input does not fit.
pub fn symbolize(bytes: &[u8], params: &GenerationParams) -> Result<SourcePacket, CodecError> {
    let s = params.field().bits();
    let capacity = params.m * s as usize;
    let got = bytes.len() * 8;
    if got > capacity {
        return Err(CodecError::PayloadTooLong { got, capacity });
    }
    let mut reader = BitReader::new(bytes);
    let mut payload = Vec::with_capacity(params.m);
    for _ in 0..params.m {
        if reader.remaining() == 0 {
            payload.push(0);
        } else {
            payload.push(reader.read_padded(s));
        }
    }
    let data_symbols = got.div_ceil(s as usize);
    Ok(SourcePacket { payload, pad_count: params.m - data_symbols })
}

/// Inverse of [`symbolize`]: writes the symbols back to bits MSB-first and
/// truncates to the original byte length.
pub fn desymbolize(
    payload: &[Symbol],
    params: &GenerationParams,
    byte_len: usize,
) -> Result<Vec<u8>, CodecError> {
    let s = params.field().bits();
    if payload.len() != params.m {
        return Err(CodecError::LengthMismatch {
            what: "payload symbols",
            expected: params.m,
            got: payload.len(),
        });
    }
    let available = params.m * s as usize / 8;
    if byte_len * 8 > params.m * s as usize {
        return Err(CodecError::ByteLengthTooLarge { requested: byte_len, available });
    }
    check_symbols(payload, params.field())?;
    let mut writer = BitWriter::with_capacity(params.m * s as usize);
    for &symbol in payload {
        writer.push(symbol, s);
    }
    let mut bytes = writer.finish();
    bytes.truncate(byte_len);
    Ok(bytes)
}

/// Draws `n` coefficients uniformly over the field. All-zero vectors carry no
/// information and are redrawn, so the result always names a usable packet.
/// Deterministic for a seeded generator.
pub fn random_coefficients<R: Rng + ?Sized>(n: usize, field: &Field, rng: &mut R) -> Vec<Symbol> {
    assert!(n >= 1, "a coefficient vector needs at least one entry");
    loop {
        let coefficients: Vec<Symbol> = (0..n).map(|_| rng.gen_range(0..=field.max_symbol())).collect();
        if coefficients.iter().any(|&c| c != 0) {
            return coefficients;
        }
    }
}

/// Source-side encoding: the coded payload is the coefficient-weighted sum of
/// the original payloads, symbol by symbol; the coefficients become the
/// encoding vector.
pub fn encode(
    originals: &[SourcePacket],
    coefficients: &[Symbol],
    field: &Field,
) -> Result<CodedPacket, CodecError> {
    if originals.is_empty() {
        return Err(CodecError::EmptyGeneration);
    }
    if coefficients.len() != originals.len() {
        return Err(CodecError::LengthMismatch {
            what: "coefficients",
            expected: originals.len(),
            got: coefficients.len(),
        });
    }
    check_symbols(coefficients, field)?;
    if coefficients.iter().all(|&c| c == 0) {
        return Err(CodecError::ZeroCoefficients);
    }
    let m = originals[0].payload.len();
    for packet in originals {
        if packet.payload.len() != m {
            return Err(CodecError::LengthMismatch {
                what: "payload symbols",
                expected: m,
                got: packet.payload.len(),
            });
        }
    }
    let mut payload = vec![0; m];
    for (packet, &c) in originals.iter().zip(coefficients) {
        if c == 0 {
            continue;
        }
        for (acc, &x) in payload.iter_mut().zip(&packet.payload) {
            *acc = field.add(*acc, field.mul(c, x));
        }
    }
    Ok(CodedPacket { encoding_vector: coefficients.to_vec(), payload })
}

/// Re-encoding at an intermediate node. The output payload is the weighted
/// sum of the received payloads; the output encoding vector is `W x F`, where
/// row `j` of `F` is the encoding vector of received packet `j`, so it still
/// refers to the *original* packets.
pub fn recode(
    received: &[CodedPacket],
    local_coefficients: &[Symbol],
    field: &Field,
) -> Result<CodedPacket, CodecError> {
    if received.is_empty() {
        return Err(CodecError::NothingToRecode);
    }
    if local_coefficients.len() != received.len() {
        return Err(CodecError::LengthMismatch {
            what: "local coefficients",
            expected: received.len(),
            got: local_coefficients.len(),
        });
    }
    check_symbols(local_coefficients, field)?;
    if local_coefficients.iter().all(|&w| w == 0) {
        return Err(CodecError::ZeroCoefficients);
    }
    let n = received[0].encoding_vector.len();
    let m = received[0].payload.len();
    for packet in received {
        if packet.encoding_vector.len() != n {
            return Err(CodecError::LengthMismatch {
                what: "encoding vector symbols",
                expected: n,
                got: packet.encoding_vector.len(),
            });
        }
        if packet.payload.len() != m {
            return Err(CodecError::LengthMismatch {
                what: "payload symbols",
                expected: m,
                got: packet.payload.len(),
            });
        }
    }
    let mut encoding_vector = vec![0; n];
    let mut payload = vec![0; m];
    for (packet, &w) in received.iter().zip(local_coefficients) {
        if w == 0 {
            continue;
        }
        for (acc, &e) in encoding_vector.iter_mut().zip(&packet.encoding_vector) {
            *acc = field.add(*acc, field.mul(w, e));
        }
        for (acc, &y) in payload.iter_mut().zip(&packet.payload) {
            *acc = field.add(*acc, field.mul(w, y));
        }
    }
    if encoding_vector.iter().all(|&e| e == 0) {
        // The weighted rows cancelled; such a packet would always be redundant.
        return Err(CodecError::DegenerateCombination);
    }
    Ok(CodedPacket { encoding_vector, payload })
}

/// What [`Decoder::receive`] made of a packet.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReceiveStatus {
    /// The packet increased the rank and was stored.
    Innovative,
    /// The packet eliminated to a zero row and was ignored.
    Redundant,
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Row {
    pivot: usize,
    coefficients: Vec<Symbol>,
    payload: Vec<Symbol>,
}

/// Incremental Gaussian-elimination decoder.
///
/// The augmented matrix `[encoding vector | payload]` is kept in reduced row
/// echelon form after every receive: each row's leading coefficient is 1, it
/// is the only nonzero entry in its column, and pivot positions move strictly
/// right going down. Rows are stored in pivot order.
///
/// Receives must be serialized per decoder; distinct decoders are independent.
#[derive(Debug, Clone)]
pub struct Decoder {
    params: GenerationParams,
    rows: Vec<Row>,
    redundant: u64,
}

impl Decoder {
    pub fn new(params: GenerationParams) -> Self {
        Decoder { params, rows: Vec::new(), redundant: 0 }
    }

    pub fn params(&self) -> &GenerationParams {
        &self.params
    }

    /// Number of independent equations gathered so far. Never decreases.
    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// True once the rank reaches `n` and every original is recoverable.
    pub fn is_complete(&self) -> bool {
        self.rows.len() == self.params.n
    }

    /// Packets that eliminated to zero and were ignored.
    pub fn redundant_count(&self) -> u64 {
        self.redundant
    }

    /// Folds one coded packet into the matrix.
    ///
    /// The incoming row is first eliminated against the stored rows; if a
    /// nonzero coefficient survives, the row is normalized so its leading
    /// entry is 1, substituted back into the stored rows, and inserted. This
    /// is ordinary Gaussian elimination at O(n * (n + m)) per packet.
    pub fn receive(&mut self, packet: &CodedPacket) -> Result<ReceiveStatus, CodecError> {
        if packet.encoding_vector.len() != self.params.n {
            return Err(CodecError::LengthMismatch {
                what: "encoding vector symbols",
                expected: self.params.n,
                got: packet.encoding_vector.len(),
            });
        }
        if packet.payload.len() != self.params.m {
            return Err(CodecError::LengthMismatch {
                what: "payload symbols",
                expected: self.params.m,
                got: packet.payload.len(),
            });
        }
        check_symbols(&packet.encoding_vector, &self.params.field)?;
        check_symbols(&packet.payload, &self.params.field)?;

        let field = self.params.field.clone();
        let mut coefficients = packet.encoding_vector.clone();
        let mut payload = packet.payload.clone();

        // Stored rows are in pivot order and already reduced against each
        // other, so one pass eliminates the incoming row completely.
        for row in &self.rows {
            let factor = coefficients[row.pivot];
            if factor == 0 {
                continue;
            }
            add_scaled(&field, factor, &row.coefficients, &mut coefficients);
            add_scaled(&field, factor, &row.payload, &mut payload);
        }

        let Some(pivot) = coefficients.iter().position(|&c| c != 0) else {
            self.redundant += 1;
            return Ok(ReceiveStatus::Redundant);
        };

        let inverse = field.inv(coefficients[pivot]).expect("pivot is nonzero");
        scale(&field, inverse, &mut coefficients);
        scale(&field, inverse, &mut payload);

        for row in &mut self.rows {
            let factor = row.coefficients[pivot];
            if factor == 0 {
                continue;
            }
            add_scaled(&field, factor, &coefficients, &mut row.coefficients);
            add_scaled(&field, factor, &payload, &mut row.payload);
        }

        let position = self.rows.partition_point(|row| row.pivot < pivot);
        self.rows.insert(position, Row { pivot, coefficients, payload });
        Ok(ReceiveStatus::Innovative)
    }

    /// The originals that are already recoverable: every row whose encoding
    /// part is a unit vector names one original outright, full rank or not.
    ///
    /// Padding metadata does not travel through coding, so the returned
    /// packets report `pad_count` 0; byte reassembly uses the original length
    /// carried out of band.
    pub fn decoded_packets(&self) -> Vec<(usize, SourcePacket)> {
        self.rows
            .iter()
            .filter(|row| {
                row.coefficients
                    .iter()
                    .enumerate()
                    .all(|(i, &c)| if i == row.pivot { c == 1 } else { c == 0 })
            })
            .map(|row| (row.pivot, SourcePacket { payload: row.payload.clone(), pad_count: 0 }))
            .collect()
    }

    /// The stored rows as `(encoding part, payload part)` pairs, in pivot
    /// order. Exposed so callers can audit the reduced-row-echelon invariant.
    pub fn matrix(&self) -> Vec<(&[Symbol], &[Symbol])> {
        self.rows
            .iter()
            .map(|row| (row.coefficients.as_slice(), row.payload.as_slice()))
            .collect()
    }
}

/// `dst += factor * src`, element-wise. Addition and subtraction coincide, so
/// this both eliminates and back-substitutes.
fn add_scaled(field: &Field, factor: Symbol, src: &[Symbol], dst: &mut [Symbol]) {
    for (d, &s) in dst.iter_mut().zip(src) {
        *d = field.add(*d, field.mul(factor, s));
    }
}

fn scale(field: &Field, factor: Symbol, values: &mut [Symbol]) {
    for v in values.iter_mut() {
        *v = field.mul(factor, *v);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::galois::TableMode;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn params(n: usize, m: usize, s: u32) -> GenerationParams {
        GenerationParams::new(n, m, Field::new(s, TableMode::Off).unwrap()).unwrap()
    }

    #[test]
    fn symbolize_splits_nibbles_and_pads() {
        let p = params(1, 4, 4);
        let packet = symbolize(&[0xFF], &p).unwrap();
        assert_eq!(packet.payload, vec![15, 15, 0, 0]);
        assert_eq!(packet.pad_count, 2);
    }

    #[test]
    fn symbolize_empty_input_is_all_padding() {
        let p = params(1, 6, 8);
        let packet = symbolize(&[], &p).unwrap();
        assert_eq!(packet.payload, vec![0; 6]);
        assert_eq!(packet.pad_count, 6);
    }

    #[test]
    fn symbolize_single_bits_msb_first() {
        let p = params(1, 8, 1);
        let packet = symbolize(&[0b1011_0011], &p).unwrap();
        assert_eq!(packet.payload, vec![1, 0, 1, 1, 0, 0, 1, 1]);
        assert_eq!(packet.pad_count, 0);
    }

    #[test]
    fn symbolize_wide_symbols_take_partial_tail_bytes() {
        let p = params(1, 2, 16);
        let packet = symbolize(&[0xAB, 0xCD, 0xEF], &p).unwrap();
        assert_eq!(packet.payload, vec![0xABCD, 0xEF00]);
        assert_eq!(packet.pad_count, 0);
    }

    #[test]
    fn symbolize_rejects_oversized_input() {
        let p = params(1, 4, 4);
        let err = symbolize(&[1, 2, 3], &p).unwrap_err();
        assert_eq!(err, CodecError::PayloadTooLong { got: 24, capacity: 16 });
    }

    #[test]
    fn desymbolize_inverts_symbolize() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for s in [1, 2, 4, 8, 16] {
            for len in [0usize, 1, 3, 7, 64] {
                let mut bytes = vec![0u8; len];
                rng.fill(bytes.as_mut_slice());
                let p = GenerationParams::for_packet_bytes(
                    1,
                    len.max(1),
                    Field::new(s, TableMode::Off).unwrap(),
                )
                .unwrap();
                let packet = symbolize(&bytes, &p).unwrap();
                assert_eq!(desymbolize(&packet.payload, &p, len).unwrap(), bytes);
            }
        }
    }

    #[test]
    fn desymbolize_checks_byte_length() {
        let p = params(1, 2, 4);
        let err = desymbolize(&[1, 2], &p, 2).unwrap_err();
        assert_eq!(err, CodecError::ByteLengthTooLarge { requested: 2, available: 1 });
    }

    #[test]
    fn random_coefficients_gf2_single_entry_is_one() {
        let field = Field::new(1, TableMode::Off).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..50 {
            assert_eq!(random_coefficients(1, &field, &mut rng), vec![1]);
        }
    }

    #[test]
    fn random_coefficients_are_deterministic_per_seed() {
        let field = Field::new(8, TableMode::Off).unwrap();
        let a = random_coefficients(16, &field, &mut ChaCha8Rng::seed_from_u64(13));
        let b = random_coefficients(16, &field, &mut ChaCha8Rng::seed_from_u64(13));
        assert_eq!(a, b);
    }

    #[test]
    fn random_coefficients_look_uniform() {
        // Empirical mean of each coordinate over 10^4 draws should sit within
        // 3 sigma of 127.5 (sigma of the mean = sqrt((2^16 - 1) / 12) / 100).
        let field = Field::new(8, TableMode::Off).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let trials = 10_000;
        let mut sums = [0f64; 4];
        for _ in 0..trials {
            let v = random_coefficients(4, &field, &mut rng);
            for (sum, &c) in sums.iter_mut().zip(&v) {
                *sum += c as f64;
            }
        }
        let tolerance = 3.0 * (65_535.0f64 / 12.0).sqrt() / (trials as f64).sqrt();
        for sum in sums {
            let mean = sum / trials as f64;
            assert!((mean - 127.5).abs() <= tolerance, "mean {mean} vs 127.5 +/- {tolerance}");
        }
    }

    #[test]
    fn encode_with_unit_vector_copies_the_original() {
        let p = params(3, 2, 8);
        let originals = vec![
            SourcePacket { payload: vec![1, 2], pad_count: 0 },
            SourcePacket { payload: vec![3, 4], pad_count: 0 },
            SourcePacket { payload: vec![5, 6], pad_count: 0 },
        ];
        let coded = encode(&originals, &[0, 1, 0], p.field()).unwrap();
        assert_eq!(coded.payload, vec![3, 4]);
        assert_eq!(coded.encoding_vector, vec![0, 1, 0]);
    }

    #[test]
    fn encode_over_gf2_xors_the_selected_packets() {
        let field = Field::new(1, TableMode::Off).unwrap();
        let originals: Vec<SourcePacket> = [0b1010u32, 0b0110, 0b1111, 0b0001, 0b1001]
            .iter()
            .map(|&bits| SourcePacket {
                payload: (0..4).rev().map(|i| (bits >> i) & 1).collect(),
                pad_count: 0,
            })
            .collect();
        // Encoding vector (0, 1, 0, 0, 1) picks X2 and X5.
        let coded = encode(&originals, &[0, 1, 0, 0, 1], &field).unwrap();
        let expected: Vec<Symbol> = originals[1]
            .payload
            .iter()
            .zip(&originals[4].payload)
            .map(|(&a, &b)| a ^ b)
            .collect();
        assert_eq!(coded.payload, expected);
    }

    #[test]
    fn encode_gf256_terms_can_cancel() {
        // 41 * 10 and 10 * 41 are both 1 and cancel under XOR.
        let field = Field::new(8, TableMode::Off).unwrap();
        let originals = vec![
            SourcePacket { payload: vec![10], pad_count: 0 },
            SourcePacket { payload: vec![41], pad_count: 0 },
        ];
        let coded = encode(&originals, &[41, 10], &field).unwrap();
        assert_eq!(coded.payload, vec![0]);
        assert_eq!(coded.encoding_vector, vec![41, 10]);
    }

    #[test]
    fn encode_rejects_bad_inputs() {
        let p = params(2, 1, 8);
        let originals = vec![
            SourcePacket { payload: vec![1], pad_count: 0 },
            SourcePacket { payload: vec![2], pad_count: 0 },
        ];
        assert_eq!(
            encode(&originals, &[0, 0], p.field()).unwrap_err(),
            CodecError::ZeroCoefficients
        );
        assert!(matches!(
            encode(&originals, &[1], p.field()).unwrap_err(),
            CodecError::LengthMismatch { .. }
        ));
        assert!(matches!(
            encode(&originals, &[1, 300], p.field()).unwrap_err(),
            CodecError::SymbolOutOfRange { .. }
        ));
        let ragged = vec![
            SourcePacket { payload: vec![1], pad_count: 0 },
            SourcePacket { payload: vec![2, 3], pad_count: 0 },
        ];
        assert!(matches!(
            encode(&ragged, &[1, 1], p.field()).unwrap_err(),
            CodecError::LengthMismatch { .. }
        ));
    }

    #[test]
    fn recode_single_packet_with_weight_one_is_identity() {
        let field = Field::new(8, TableMode::Off).unwrap();
        let packet = CodedPacket { encoding_vector: vec![3, 0, 7], payload: vec![9, 9] };
        let out = recode(std::slice::from_ref(&packet), &[1], &field).unwrap();
        assert_eq!(out, packet);
    }

    #[test]
    fn recode_over_gf2_xors_unit_rows() {
        let field = Field::new(1, TableMode::Off).unwrap();
        let received = vec![
            CodedPacket { encoding_vector: vec![1, 0, 0, 0], payload: vec![1, 0] },
            CodedPacket { encoding_vector: vec![0, 1, 0, 0], payload: vec![1, 1] },
        ];
        let out = recode(&received, &[1, 1], &field).unwrap();
        assert_eq!(out.encoding_vector, vec![1, 1, 0, 0]);
        assert_eq!(out.payload, vec![0, 1]);
    }

    #[test]
    fn recode_composes_like_a_direct_encode() {
        // Feed r encodes of the originals through a recoder and compare with a
        // direct encode under the independently composed coefficient vector
        // W x F.
        let field = Field::new(4, TableMode::Off).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        for _ in 0..50 {
            let originals: Vec<SourcePacket> = (0..3)
                .map(|_| SourcePacket {
                    payload: (0..2).map(|_| rng.gen_range(0..=field.max_symbol())).collect(),
                    pad_count: 0,
                })
                .collect();
            let rows: Vec<Vec<Symbol>> =
                (0..4).map(|_| random_coefficients(3, &field, &mut rng)).collect();
            let received: Vec<CodedPacket> = rows
                .iter()
                .map(|row| encode(&originals, row, &field).unwrap())
                .collect();
            let weights = random_coefficients(4, &field, &mut rng);

            // Oracle: e_i = sum_j w_j * F[j][i] computed straight from the rows.
            let composed: Vec<Symbol> = (0..3)
                .map(|i| {
                    rows.iter().zip(&weights).fold(0, |acc, (row, &w)| {
                        field.add(acc, field.mul(w, row[i]))
                    })
                })
                .collect();

            match recode(&received, &weights, &field) {
                Ok(out) => {
                    assert_eq!(out.encoding_vector, composed);
                    let direct = encode(&originals, &composed, &field).unwrap();
                    assert_eq!(out.payload, direct.payload);
                }
                Err(CodecError::DegenerateCombination) => {
                    assert!(composed.iter().all(|&e| e == 0));
                }
                Err(other) => panic!("unexpected error {other:?}"),
            }
        }
    }

    #[test]
    fn recode_rejects_bad_inputs() {
        let field = Field::new(8, TableMode::Off).unwrap();
        let packet = CodedPacket { encoding_vector: vec![1, 2], payload: vec![3] };
        assert_eq!(recode(&[], &[], &field).unwrap_err(), CodecError::NothingToRecode);
        assert_eq!(
            recode(std::slice::from_ref(&packet), &[0], &field).unwrap_err(),
            CodecError::ZeroCoefficients
        );
        let ragged = CodedPacket { encoding_vector: vec![1], payload: vec![3] };
        assert!(matches!(
            recode(&[packet.clone(), ragged], &[1, 1], &field).unwrap_err(),
            CodecError::LengthMismatch { .. }
        ));
        // Two identical packets under equal weights cancel completely.
        assert_eq!(
            recode(&[packet.clone(), packet], &[1, 1], &field).unwrap_err(),
            CodecError::DegenerateCombination
        );
    }

    #[test]
    fn decoder_unit_packet_is_immediately_decodable() {
        let p = params(4, 2, 8);
        let mut decoder = Decoder::new(p);
        let packet = CodedPacket { encoding_vector: vec![0, 0, 1, 0], payload: vec![7, 8] };
        assert_eq!(decoder.receive(&packet), Ok(ReceiveStatus::Innovative));
        assert_eq!(decoder.rank(), 1);
        let decoded = decoder.decoded_packets();
        assert_eq!(decoded.len(), 1);
        assert_eq!(decoded[0].0, 2);
        assert_eq!(decoded[0].1.payload, vec![7, 8]);
    }

    #[test]
    fn decoder_ignores_duplicates_and_keeps_state_identical() {
        let p = params(2, 1, 8);
        let mut decoder = Decoder::new(p);
        let packet = CodedPacket { encoding_vector: vec![5, 9], payload: vec![1] };
        assert_eq!(decoder.receive(&packet), Ok(ReceiveStatus::Innovative));
        let before: Vec<(Vec<Symbol>, Vec<Symbol>)> = decoder
            .matrix()
            .iter()
            .map(|&(c, p)| (c.to_vec(), p.to_vec()))
            .collect();
        let rank_before = decoder.rank();

        assert_eq!(decoder.receive(&packet), Ok(ReceiveStatus::Redundant));
        let after: Vec<(Vec<Symbol>, Vec<Symbol>)> = decoder
            .matrix()
            .iter()
            .map(|&(c, p)| (c.to_vec(), p.to_vec()))
            .collect();
        assert_eq!(before, after);
        assert_eq!(decoder.rank(), rank_before);
        assert_eq!(decoder.redundant_count(), 1);
    }

    #[test]
    fn decoder_gf2_hand_elimination() {
        // Receive (1,0 | y1) then (1,1 | y2): the second row eliminates to
        // (0,1 | y1 ^ y2), so X2 = payload_1 ^ payload_2.
        let p = params(2, 3, 1);
        let mut decoder = Decoder::new(p);
        let y1 = vec![1, 0, 1];
        let y2 = vec![1, 1, 0];
        decoder
            .receive(&CodedPacket { encoding_vector: vec![1, 0], payload: y1.clone() })
            .unwrap();
        let status = decoder
            .receive(&CodedPacket { encoding_vector: vec![1, 1], payload: y2.clone() })
            .unwrap();
        assert_eq!(status, ReceiveStatus::Innovative);
        assert_eq!(decoder.rank(), 2);
        assert!(decoder.is_complete());

        let decoded = decoder.decoded_packets();
        assert_eq!(decoded[0].1.payload, y1);
        let expected: Vec<Symbol> = y1.iter().zip(&y2).map(|(&a, &b)| a ^ b).collect();
        assert_eq!(decoded[1].1.payload, expected);
    }

    #[test]
    fn decoded_packets_reports_only_unit_rows() {
        let p = params(4, 1, 1);
        let mut decoder = Decoder::new(p.clone());
        assert!(decoder.decoded_packets().is_empty());
        decoder
            .receive(&CodedPacket { encoding_vector: vec![1, 0, 1, 0], payload: vec![1] })
            .unwrap();
        decoder
            .receive(&CodedPacket { encoding_vector: vec![0, 1, 0, 0], payload: vec![0] })
            .unwrap();
        let decoded = decoder.decoded_packets();
        assert_eq!(decoded.len(), 1);
        assert_eq!(decoded[0].0, 1);
    }

    #[test]
    fn decoder_rank_saturates_at_n() {
        let field = Field::new(8, TableMode::Off).unwrap();
        let p = GenerationParams::new(4, 2, field.clone()).unwrap();
        let originals: Vec<SourcePacket> = (0..4)
            .map(|i| SourcePacket { payload: vec![i as Symbol, 2 * i as Symbol], pad_count: 0 })
            .collect();
        let mut decoder = Decoder::new(p);
        assert_eq!(decoder.rank(), 0);
        assert!(!decoder.is_complete());

        let mut rng = ChaCha8Rng::seed_from_u64(16);
        let mut redundant = 0;
        while !decoder.is_complete() {
            let coeffs = random_coefficients(4, &field, &mut rng);
            let packet = encode(&originals, &coeffs, &field).unwrap();
            if decoder.receive(&packet).unwrap() == ReceiveStatus::Redundant {
                redundant += 1;
            }
        }
        assert_eq!(decoder.rank(), 4);
        // Extra packets can only be redundant now.
        for _ in 0..3 {
            let coeffs = random_coefficients(4, &field, &mut rng);
            let packet = encode(&originals, &coeffs, &field).unwrap();
            assert_eq!(decoder.receive(&packet).unwrap(), ReceiveStatus::Redundant);
            redundant += 1;
        }
        assert_eq!(decoder.rank(), 4);
        assert_eq!(decoder.redundant_count(), redundant);
    }

    #[test]
    fn decoder_rejects_mismatched_packets() {
        let p = params(2, 2, 8);
        let mut decoder = Decoder::new(p);
        let bad = CodedPacket { encoding_vector: vec![1], payload: vec![0, 0] };
        assert!(matches!(decoder.receive(&bad).unwrap_err(), CodecError::LengthMismatch { .. }));
        let bad = CodedPacket { encoding_vector: vec![1, 0], payload: vec![0, 999] };
        assert!(matches!(decoder.receive(&bad).unwrap_err(), CodecError::SymbolOutOfRange { .. }));
        assert_eq!(decoder.rank(), 0);
    }

    /// Checks the three reduced-row-echelon conditions directly on the
    /// exposed matrix, independent of the decoder internals.
    fn assert_rref(matrix: &[(&[Symbol], &[Symbol])]) {
        let mut previous_pivot: Option<usize> = None;
        let pivots: Vec<usize> = matrix
            .iter()
            .map(|(coeffs, _)| coeffs.iter().position(|&c| c != 0).expect("no zero rows"))
            .collect();
        for (row, &(coeffs, _)) in matrix.iter().enumerate() {
            let pivot = pivots[row];
            assert_eq!(coeffs[pivot], 1, "leading coefficient must be 1");
            if let Some(prev) = previous_pivot {
                assert!(pivot > prev, "pivots must move right going down");
            }
            previous_pivot = Some(pivot);
            for (other, &(other_coeffs, _)) in matrix.iter().enumerate() {
                if other != row {
                    assert_eq!(other_coeffs[pivot], 0, "pivot column must be clear elsewhere");
                }
            }
        }
    }

    #[test]
    fn roundtrip_over_all_widths_keeps_rref() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for s in [1, 4, 8, 16] {
            for n in [1usize, 2, 4, 16] {
                let field = Field::new(s, TableMode::Off).unwrap();
                let p = GenerationParams::new(n, 6, field.clone()).unwrap();
                let originals: Vec<SourcePacket> = (0..n)
                    .map(|_| SourcePacket {
                        payload: (0..6).map(|_| rng.gen_range(0..=field.max_symbol())).collect(),
                        pad_count: 0,
                    })
                    .collect();
                let mut decoder = Decoder::new(p);
                let mut previous_rank = 0;
                while !decoder.is_complete() {
                    let coeffs = random_coefficients(n, &field, &mut rng);
                    let packet = encode(&originals, &coeffs, &field).unwrap();
                    decoder.receive(&packet).unwrap();
                    assert!(decoder.rank() >= previous_rank, "rank never decreases");
                    previous_rank = decoder.rank();
                    assert_rref(&decoder.matrix());
                }
                let decoded = decoder.decoded_packets();
                assert_eq!(decoded.len(), n);
                for (index, packet) in decoded {
                    assert_eq!(packet.payload, originals[index].payload);
                }
            }
        }
    }

    #[test]
    fn recoding_chains_decode_like_direct_coding() {
        let field = Field::new(4, TableMode::Off).unwrap();
        let n = 4;
        let mut rng = ChaCha8Rng::seed_from_u64(18);
        for _ in 0..40 {
            let originals: Vec<SourcePacket> = (0..n)
                .map(|_| SourcePacket {
                    payload: (0..3).map(|_| rng.gen_range(0..=field.max_symbol())).collect(),
                    pad_count: 0,
                })
                .collect();
            // Three recoding hops, each mixing the previous hop's packets.
            let mut generation: Vec<CodedPacket> = (0..n + 2)
                .map(|_| {
                    let coeffs = random_coefficients(n, &field, &mut rng);
                    encode(&originals, &coeffs, &field).unwrap()
                })
                .collect();
            for _ in 0..3 {
                generation = (0..n + 2)
                    .map(|_| loop {
                        let weights = random_coefficients(generation.len(), &field, &mut rng);
                        match recode(&generation, &weights, &field) {
                            Ok(packet) => break packet,
                            Err(CodecError::DegenerateCombination) => continue,
                            Err(other) => panic!("unexpected error {other:?}"),
                        }
                    })
                    .collect();
            }
            let mut decoder =
                Decoder::new(GenerationParams::new(n, 3, field.clone()).unwrap());
            for packet in &generation {
                decoder.receive(packet).unwrap();
            }
            if decoder.is_complete() {
                for (index, packet) in decoder.decoded_packets() {
                    assert_eq!(packet.payload, originals[index].payload);
                }
            }
        }
    }
}
