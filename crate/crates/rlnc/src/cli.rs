//! The operations behind the `rlnc` command-line binary: file encode/decode
//! through the container format, the multiplication-table dump, arithmetic
//! throughput measurement and simulator runs.
//!
//! Everything here takes plain option structs and returns printable
//! summaries, so the binary itself only parses flags. Exit codes are fixed
//! for scripting: 0 success, 1 i/o, 2 usage, 3 decode rank shortfall,
//! 4 container format or integrity.

use std::fmt;
use std::fs;
use std::hint::black_box;
use std::io::{self, BufReader, BufWriter};
use std::path::PathBuf;
use std::str::FromStr;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::codec::{self, CodecError, Decoder, GenerationParams, ReceiveStatus, SourcePacket};
use crate::galois::{Field, FieldError, Symbol, TableMode, MAX_TABLE_WIDTH};
use crate::sim::{self, ScenarioSettings, SimError, SimReport};
use crate::wire::{self, ContainerHeader, WireError};

/// The field every command defaults to.
pub const DEFAULT_FIELD_BITS: u32 = 8;
pub const DEFAULT_PACKETS: usize = 16;
pub const DEFAULT_SEED: u64 = 42;

/// Default coded packets written per generation: a few spares beyond `n`.
pub fn default_redundancy(packets: usize) -> u32 {
    packets as u32 + 4
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("decode incomplete: rank {rank} of {needed} required packets")]
    RankShortfall { rank: usize, needed: usize, decodable: Vec<usize> },
    #[error("container error: {0}")]
    Format(WireError),
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) => 1,
            CliError::Usage(_) => 2,
            CliError::RankShortfall { .. } => 3,
            CliError::Format(_) => 4,
        }
    }
}

impl From<WireError> for CliError {
    fn from(error: WireError) -> Self {
        match error {
            WireError::Io(io) => CliError::Io(io),
            other => CliError::Format(other),
        }
    }
}

impl From<FieldError> for CliError {
    fn from(error: FieldError) -> Self {
        CliError::Usage(error.to_string())
    }
}

impl From<CodecError> for CliError {
    fn from(error: CodecError) -> Self {
        CliError::Usage(error.to_string())
    }
}

impl From<SimError> for CliError {
    fn from(error: SimError) -> Self {
        CliError::Usage(error.to_string())
    }
}

#[derive(Debug, Clone)]
pub struct EncodeOptions {
    pub input: PathBuf,
    pub output: PathBuf,
    pub field_bits: u32,
    pub packets: usize,
    pub redundancy: u32,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncodeSummary {
    pub output: PathBuf,
    pub input_bytes: u64,
    pub field_bits: u32,
    pub packets: usize,
    pub symbols_per_packet: usize,
    pub coded_packets: u32,
}

impl fmt::Display for EncodeSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "encoded {} bytes as {} coded packets ({} originals of {} GF(2^{}) symbols) into {}",
            self.input_bytes,
            self.coded_packets,
            self.packets,
            self.symbols_per_packet,
            self.field_bits,
            self.output.display()
        )
    }
}

/// Splits the input into `packets` originals (the last zero-padded), draws
/// `redundancy` random coded packets and writes them as one container.
pub fn cmd_encode(options: &EncodeOptions) -> Result<EncodeSummary, CliError> {
    let data = fs::read(&options.input)?;
    if data.is_empty() {
        return Err(CliError::Usage(format!(
            "input file {} is empty; nothing to encode",
            options.input.display()
        )));
    }
    let n = options.packets;
    if n == 0 || n > u16::MAX as usize {
        return Err(CliError::Usage(format!("--packets must be in 1..={}, got {n}", u16::MAX)));
    }
    if options.redundancy == 0 {
        return Err(CliError::Usage("--redundancy must be at least 1".into()));
    }

    // Tables pay for themselves over a whole file; wide fields stay on the fly.
    let table_mode = if options.field_bits <= MAX_TABLE_WIDTH { TableMode::On } else { TableMode::Off };
    let field = Field::new(options.field_bits, table_mode)?;

    let chunk_bytes = data.len().div_ceil(n);
    let params = GenerationParams::for_packet_bytes(n, chunk_bytes, field.clone())?;
    let m = params.symbols_per_packet();
    if m > u32::MAX as usize {
        return Err(CliError::Usage(format!("{m} symbols per packet exceed the container limit")));
    }

    let originals: Vec<SourcePacket> = (0..n)
        .map(|i| {
            let start = (i * chunk_bytes).min(data.len());
            let end = ((i + 1) * chunk_bytes).min(data.len());
            codec::symbolize(&data[start..end], &params)
        })
        .collect::<Result<_, _>>()?;

    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let coded: Vec<_> = (0..options.redundancy)
        .map(|_| {
            let coefficients = codec::random_coefficients(n, &field, &mut rng);
            codec::encode(&originals, &coefficients, &field)
        })
        .collect::<Result<_, _>>()?;

    let header = ContainerHeader {
        field_bits: options.field_bits as u8,
        packet_count: n as u16,
        symbols_per_packet: m as u32,
        original_byte_len: data.len() as u64,
    };
    let file = fs::File::create(&options.output)?;
    wire::write_container(BufWriter::new(file), &header, &coded)?;

    Ok(EncodeSummary {
        output: options.output.clone(),
        input_bytes: data.len() as u64,
        field_bits: options.field_bits,
        packets: n,
        symbols_per_packet: m,
        coded_packets: options.redundancy,
    })
}

#[derive(Debug, Clone)]
pub struct DecodeOptions {
    pub input: PathBuf,
    pub output: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecodeSummary {
    pub output: PathBuf,
    pub bytes_written: u64,
    pub innovative: u32,
    pub redundant: u32,
}

impl fmt::Display for DecodeSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "decoded {} bytes into {} ({} innovative, {} redundant packets)",
            self.bytes_written,
            self.output.display(),
            self.innovative,
            self.redundant
        )
    }
}

/// Feeds every packet in the container to a decoder. At full rank the
/// original file is reassembled and truncated to its recorded length; short
/// of full rank the error carries the rank and the indices that are already
/// recoverable.
pub fn cmd_decode(options: &DecodeOptions) -> Result<DecodeSummary, CliError> {
    let file = fs::File::open(&options.input)?;
    let (header, packets) = wire::read_container(BufReader::new(file))?;
    let params = header.generation_params()?;
    let n = params.packet_count();

    let mut decoder = Decoder::new(params.clone());
    let mut innovative = 0;
    let mut redundant = 0;
    for packet in &packets {
        match decoder.receive(packet).expect("container packets match their header") {
            ReceiveStatus::Innovative => innovative += 1,
            ReceiveStatus::Redundant => redundant += 1,
        }
    }

    if !decoder.is_complete() {
        return Err(CliError::RankShortfall {
            rank: decoder.rank(),
            needed: n,
            decodable: decoder.decoded_packets().into_iter().map(|(index, _)| index).collect(),
        });
    }

    let total = header.original_byte_len as usize;
    let chunk_bytes = total.div_ceil(n);
    let mut bytes = Vec::with_capacity(total);
    for (index, packet) in decoder.decoded_packets() {
        let start = (index * chunk_bytes).min(total);
        let end = ((index + 1) * chunk_bytes).min(total);
        bytes.extend_from_slice(&codec::desymbolize(&packet.payload, &params, end - start)?);
    }
    fs::write(&options.output, &bytes)?;

    Ok(DecodeSummary {
        output: options.output.clone(),
        bytes_written: bytes.len() as u64,
        innovative,
        redundant,
    })
}

/// Renders the full multiplication table of a small field, row per left
/// operand, in fixed-width hex. The inverse of `a` can be read off by
/// scanning row `a` for the column holding 1.
pub fn cmd_table(field_bits: u32) -> Result<String, CliError> {
    if field_bits > MAX_TABLE_WIDTH {
        return Err(CliError::Usage(format!(
            "table rendering supports widths up to {MAX_TABLE_WIDTH}, got {field_bits}"
        )));
    }
    let field = Field::new(field_bits, TableMode::On)?;
    let digits = field_bits.div_ceil(4) as usize;
    let size = 1u32 << field_bits;

    let mut out = String::new();
    out.push_str(&format!("{:>digits$} |", "*"));
    for b in 0..size {
        out.push_str(&format!(" {b:0digits$x}"));
    }
    out.push('\n');
    out.push_str(&"-".repeat(digits + 2 + (digits + 1) * size as usize));
    out.push('\n');
    for a in 0..size {
        out.push_str(&format!("{a:0digits$x} |"));
        for b in 0..size {
            out.push_str(&format!(" {:0digits$x}", field.mul(a, b)));
        }
        out.push('\n');
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BenchOp {
    Mul,
    Inv,
}

impl FromStr for BenchOp {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "mul" => Ok(BenchOp::Mul),
            "inv" => Ok(BenchOp::Inv),
            other => Err(format!("unknown bench op '{other}'; expected mul or inv")),
        }
    }
}

impl fmt::Display for BenchOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(if *self == BenchOp::Mul { "mul" } else { "inv" })
    }
}

#[derive(Debug, Clone)]
pub struct BenchOptions {
    pub field_bits: u32,
    pub op: BenchOp,
    pub iterations: u64,
}

#[derive(Debug, Clone)]
pub struct BenchReport {
    pub field_bits: u32,
    pub op: BenchOp,
    pub iterations: u64,
    pub on_the_fly_ops_per_sec: f64,
    /// Present only for widths that offer tables.
    pub table_ops_per_sec: Option<f64>,
}

impl fmt::Display for BenchReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "GF(2^{}) {} x {} iterations", self.field_bits, self.op, self.iterations)?;
        write!(f, "  on-the-fly: {:>12.0} ops/s", self.on_the_fly_ops_per_sec)?;
        if let Some(table) = self.table_ops_per_sec {
            write!(f, "\n  table:      {table:>12.0} ops/s")?;
        }
        Ok(())
    }
}

/// Measures arithmetic throughput over a fixed operand stream, once on the
/// fly and once (for small widths) through the lookup tables.
pub fn cmd_bench(options: &BenchOptions) -> Result<BenchReport, CliError> {
    if options.iterations == 0 {
        return Err(CliError::Usage("iterations must be at least 1".into()));
    }
    let plain = Field::new(options.field_bits, TableMode::Off)?;
    let tabled = if options.field_bits <= MAX_TABLE_WIDTH {
        Some(Field::new(options.field_bits, TableMode::On)?)
    } else {
        None
    };

    let mut rng = ChaCha8Rng::seed_from_u64(DEFAULT_SEED);
    let operands: Vec<(Symbol, Symbol)> = (0..1024)
        .map(|_| {
            (
                rng.gen_range(1..=plain.max_symbol()),
                rng.gen_range(1..=plain.max_symbol()),
            )
        })
        .collect();

    let measure = |field: &Field| -> f64 {
        let start = Instant::now();
        let mut acc: Symbol = 0;
        for i in 0..options.iterations {
            let (a, b) = operands[(i & 1023) as usize];
            acc ^= match options.op {
                BenchOp::Mul => field.mul(a, b),
                BenchOp::Inv => field.inv(a).expect("operands are nonzero"),
            };
        }
        black_box(acc);
        options.iterations as f64 / start.elapsed().as_secs_f64()
    };

    Ok(BenchReport {
        field_bits: options.field_bits,
        op: options.op,
        iterations: options.iterations,
        on_the_fly_ops_per_sec: measure(&plain),
        table_ops_per_sec: tabled.as_ref().map(measure),
    })
}

#[derive(Debug, Clone, Default)]
pub struct SimOptions {
    /// Optional scenario file; flags override its values.
    pub config_file: Option<PathBuf>,
    pub settings: ScenarioSettings,
    /// Where to write the per-slot CSV summary.
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone)]
pub struct SimRunOutput {
    pub report: SimReport,
    pub csv: String,
    pub csv_path: Option<PathBuf>,
}

/// Resolves the scenario (file, then flag overrides, then defaults), runs it
/// and renders the per-slot summary.
pub fn cmd_sim(options: &SimOptions) -> Result<SimRunOutput, CliError> {
    let base = match &options.config_file {
        Some(path) => ScenarioSettings::parse(&fs::read_to_string(path)?)?,
        None => ScenarioSettings::default(),
    };
    let scenario = base.merge(options.settings.clone()).build()?;
    let topology = scenario.topology()?;
    let report = sim::run(&topology, &scenario.sim)?;
    let csv = report.to_csv();
    if let Some(path) = &options.output {
        fs::write(path, &csv)?;
    }
    Ok(SimRunOutput { report, csv, csv_path: options.output.clone() })
}
