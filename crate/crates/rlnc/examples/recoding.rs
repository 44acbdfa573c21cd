//! Re-encoding at intermediate nodes: two relay hops combine coded packets
//! they cannot read, yet the destination decodes as if the source had coded
//! directly. The output coefficient vector is composed as W x F, so it keeps
//! referring to the original packets.
//!
//! ```text
//! cargo run -p rlnc --example recoding
//! ```

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use rlnc::codec::{self, CodecError, CodedPacket, Decoder, GenerationParams};
use rlnc::galois::{Field, TableMode};

fn mix<R: rand::Rng>(packets: &[CodedPacket], count: usize, field: &Field, rng: &mut R) -> Vec<CodedPacket> {
    (0..count)
        .map(|_| loop {
            let weights = codec::random_coefficients(packets.len(), field, rng);
            match codec::recode(packets, &weights, field) {
                Ok(packet) => break packet,
                Err(CodecError::DegenerateCombination) => continue,
                Err(other) => panic!("{other}"),
            }
        })
        .collect()
}

fn main() {
    let field = Field::new(4, TableMode::Off).unwrap();
    let n = 3;
    let params = GenerationParams::new(n, 6, field.clone()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);

    let originals: Vec<_> = (0..n)
        .map(|_| codec::SourcePacket {
            payload: (0..6).map(|_| rng.gen_range(0..=field.max_symbol())).collect(),
            pad_count: 0,
        })
        .collect();

    // The source emits 5 coded packets...
    let source_packets: Vec<_> = (0..n + 2)
        .map(|_| {
            let coefficients = codec::random_coefficients(n, &field, &mut rng);
            codec::encode(&originals, &coefficients, &field).unwrap()
        })
        .collect();

    // ...which pass through two relays, each remixing what it received.
    let hop1 = mix(&source_packets, n + 2, &field, &mut rng);
    let hop2 = mix(&hop1, n + 2, &field, &mut rng);
    println!("first remixed vector:  {:?}", hop1[0].encoding_vector);
    println!("second remixed vector: {:?}", hop2[0].encoding_vector);

    let mut decoder = Decoder::new(params);
    for packet in &hop2 {
        decoder.receive(packet).unwrap();
    }
    println!("rank after the two-hop chain: {}/{n}", decoder.rank());
    for (index, packet) in decoder.decoded_packets() {
        assert_eq!(packet.payload, originals[index].payload);
        println!("original {index} recovered intact: {:?}", packet.payload);
    }
}
