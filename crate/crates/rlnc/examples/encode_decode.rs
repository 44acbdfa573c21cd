//! A full generation roundtrip in memory: split a message into source
//! packets, emit random linear combinations, and watch the decoder's rank
//! climb until everything is recovered.
//!
//! ```text
//! cargo run -p rlnc --example encode_decode
//! ```

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use rlnc::codec::{self, Decoder, GenerationParams};
use rlnc::galois::{Field, TableMode};

fn main() {
    let message = b"network coding turns packets into equations";
    let n = 4;
    let field = Field::new(8, TableMode::On).unwrap();
    let chunk = message.len().div_ceil(n);
    let params = GenerationParams::for_packet_bytes(n, chunk, field.clone()).unwrap();

    let originals: Vec<_> = (0..n)
        .map(|i| {
            let start = (i * chunk).min(message.len());
            let end = ((i + 1) * chunk).min(message.len());
            codec::symbolize(&message[start..end], &params).unwrap()
        })
        .collect();
    println!("{} bytes -> {n} packets of {} symbols", message.len(), params.symbols_per_packet());

    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut decoder = Decoder::new(params.clone());
    let mut emitted = 0;
    while !decoder.is_complete() {
        let coefficients = codec::random_coefficients(n, &field, &mut rng);
        let packet = codec::encode(&originals, &coefficients, &field).unwrap();
        emitted += 1;
        let status = decoder.receive(&packet).unwrap();
        println!(
            "packet {emitted} with vector {:?}: {status:?}, rank {}/{n}",
            packet.encoding_vector,
            decoder.rank()
        );
    }

    let mut restored = Vec::new();
    for (index, packet) in decoder.decoded_packets() {
        let start = (index * chunk).min(message.len());
        let end = ((index + 1) * chunk).min(message.len());
        restored.extend_from_slice(&codec::desymbolize(&packet.payload, &params, end - start).unwrap());
    }
    assert_eq!(restored, message);
    println!("recovered: {:?}", String::from_utf8(restored).unwrap());
}
