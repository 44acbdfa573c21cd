//! Thin command-line front end for the `rlnc` library. Flag parsing only;
//! the actual work lives in `rlnc::cli`.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use rlnc::cli::{
    self, BenchOp, BenchOptions, CliError, DecodeOptions, EncodeOptions, SimOptions,
    DEFAULT_FIELD_BITS, DEFAULT_PACKETS, DEFAULT_SEED,
};
use rlnc::sim::{Coding, Scenario, ScenarioSettings};

#[derive(Parser)]
#[command(name = "rlnc", version, about = "random linear network coding toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Split a file into a generation and write coded packets to a container
    Encode {
        /// File to encode
        input: PathBuf,
        /// Container path (default: INPUT.ncp)
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Symbol width s of GF(2^s): 1, 2, 4, 8 or 16
        #[arg(long, default_value_t = DEFAULT_FIELD_BITS)]
        field_bits: u32,
        /// Original packets per generation (n)
        #[arg(long, default_value_t = DEFAULT_PACKETS)]
        packets: usize,
        /// Coded packets to write (default: packets + 4)
        #[arg(long)]
        redundancy: Option<u32>,
        /// Coefficient RNG seed
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
    /// Recover the original file from a coded-packet container
    Decode {
        /// Container to decode
        input: PathBuf,
        /// Recovered file path (default: INPUT without .ncp, or INPUT.out)
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Run a scenario on the deterministic network simulator
    Sim {
        /// Optional scenario file (key = value lines); flags override it
        config: Option<PathBuf>,
        #[arg(long)]
        scenario: Option<ScenarioArg>,
        #[arg(long)]
        field_bits: Option<u32>,
        /// Generation size (n)
        #[arg(long)]
        packets: Option<usize>,
        /// Packets each source may generate over the run
        #[arg(long)]
        redundancy: Option<u32>,
        #[arg(long)]
        seed: Option<u64>,
        /// Network coding on, or plain store-and-forward off
        #[arg(long)]
        coding: Option<CodingArg>,
        /// Time slots to simulate
        #[arg(long)]
        slots: Option<u32>,
        /// Write the per-slot CSV summary here instead of stdout
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Print the multiplication table of a small field
    Table {
        #[arg(long, default_value_t = DEFAULT_FIELD_BITS)]
        field_bits: u32,
    },
    /// Measure field-arithmetic throughput, lookup table vs on the fly
    Bench {
        /// Operation to measure
        #[arg(value_enum, default_value_t = OpArg::Mul)]
        op: OpArg,
        /// Operations per measurement
        #[arg(default_value_t = 2_000_000)]
        iterations: u64,
        #[arg(long, default_value_t = DEFAULT_FIELD_BITS)]
        field_bits: u32,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ScenarioArg {
    Butterfly,
    Relay,
    Point,
}

impl From<ScenarioArg> for Scenario {
    fn from(arg: ScenarioArg) -> Self {
        match arg {
            ScenarioArg::Butterfly => Scenario::Butterfly,
            ScenarioArg::Relay => Scenario::Relay,
            ScenarioArg::Point => Scenario::Point,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum CodingArg {
    On,
    Off,
}

impl From<CodingArg> for Coding {
    fn from(arg: CodingArg) -> Self {
        match arg {
            CodingArg::On => Coding::On,
            CodingArg::Off => Coding::Off,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum OpArg {
    Mul,
    Inv,
}

impl From<OpArg> for BenchOp {
    fn from(arg: OpArg) -> Self {
        match arg {
            OpArg::Mul => BenchOp::Mul,
            OpArg::Inv => BenchOp::Inv,
        }
    }
}

fn default_encode_output(input: &Path) -> PathBuf {
    PathBuf::from(format!("{}.ncp", input.display()))
}

fn default_decode_output(input: &Path) -> PathBuf {
    match input.extension() {
        Some(ext) if ext == "ncp" => input.with_extension(""),
        _ => PathBuf::from(format!("{}.out", input.display())),
    }
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Encode { input, output, field_bits, packets, redundancy, seed } => {
            let options = EncodeOptions {
                output: output.unwrap_or_else(|| default_encode_output(&input)),
                input,
                field_bits,
                packets,
                redundancy: redundancy.unwrap_or_else(|| cli::default_redundancy(packets)),
                seed,
            };
            println!("{}", cli::cmd_encode(&options)?);
        }
        Command::Decode { input, output } => {
            let options = DecodeOptions {
                output: output.unwrap_or_else(|| default_decode_output(&input)),
                input,
            };
            println!("{}", cli::cmd_decode(&options)?);
        }
        Command::Sim { config, scenario, field_bits, packets, redundancy, seed, coding, slots, output } => {
            let options = SimOptions {
                config_file: config,
                settings: ScenarioSettings {
                    scenario: scenario.map(Into::into),
                    field_bits,
                    packets,
                    coding: coding.map(Into::into),
                    slots,
                    seed,
                    redundancy,
                    ..Default::default()
                },
                output,
            };
            let run = cli::cmd_sim(&options)?;
            print!("{}", run.report);
            match &run.csv_path {
                Some(path) => println!("per-slot summary written to {}", path.display()),
                None => print!("\n{}", run.csv),
            }
        }
        Command::Table { field_bits } => {
            print!("{}", cli::cmd_table(field_bits)?);
        }
        Command::Bench { op, iterations, field_bits } => {
            let options = BenchOptions { field_bits, op: op.into(), iterations };
            println!("{}", cli::cmd_bench(&options)?);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(error) => {
            eprintln!("error: {error}");
            if let CliError::RankShortfall { decodable, .. } = &error {
                if decodable.is_empty() {
                    eprintln!("no original packets are recoverable yet");
                } else {
                    let list: Vec<String> = decodable.iter().map(|i| i.to_string()).collect();
                    eprintln!("recoverable original packets: {}", list.join(", "));
                }
            }
            ExitCode::from(error.exit_code() as u8)
        }
    }
}
