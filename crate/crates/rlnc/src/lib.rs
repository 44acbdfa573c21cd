//! Random linear network coding toolkit.
//!
//! A generation of `n` source packets is cut into `s`-bit symbols over the
//! binary field GF(2^s). Coded packets are random linear combinations of the
//! originals and travel with their coefficient vector; intermediate nodes can
//! re-combine coded packets without decoding them, and a receiver recovers the
//! originals by keeping the received equations in reduced row echelon form.
//!
//! The crate is organized in five modules:
//!
//! - [`galois`] — exact arithmetic over GF(2^s) for s in {1, 2, 4, 8, 16},
//!   with optional precomputed multiplication/inverse tables,
//! - [`codec`] — symbolizing byte payloads, encoding, recoding and the
//!   incremental Gaussian-elimination decoder,
//! - [`wire`] — a bit-exact container format for coded packets,
//! - [`sim`] — a deterministic time-slotted network simulator with the
//!   classic butterfly and relay topologies built in,
//! - [`cli`] — the operations behind the `rlnc` command-line binary.
//!
//! ```
//! use rand::SeedableRng;
//! use rlnc::codec::{self, Decoder, GenerationParams};
//! use rlnc::galois::{Field, TableMode};
//!
//! let field = Field::new(8, TableMode::Off).unwrap();
//! let params = GenerationParams::for_packet_bytes(2, 4, field.clone()).unwrap();
//!
//! let originals = vec![
//!     codec::symbolize(b"ab", &params).unwrap(),
//!     codec::symbolize(b"cd", &params).unwrap(),
//! ];
//!
//! let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
//! let mut decoder = Decoder::new(params.clone());
//! while !decoder.is_complete() {
//!     let coeffs = codec::random_coefficients(2, &field, &mut rng);
//!     let packet = codec::encode(&originals, &coeffs, &field).unwrap();
//!     decoder.receive(&packet).unwrap();
//! }
//!
//! let decoded = decoder.decoded_packets();
//! assert_eq!(decoded[0].1.payload, originals[0].payload);
//! assert_eq!(decoded[1].1.payload, originals[1].payload);
//! ```

pub mod cli;
pub mod codec;
pub mod galois;
pub mod sim;
pub mod wire;

mod bits;

pub use codec::{CodedPacket, Decoder, GenerationParams, ReceiveStatus, SourcePacket};
pub use galois::{Field, Symbol, TableMode};
