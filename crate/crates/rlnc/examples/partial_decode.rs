//! Partial decoding: full rank is not needed to start releasing originals.
//! Any row of the receiver's reduced matrix with a single nonzero entry
//! names one original outright.
//!
//! ```text
//! cargo run -p rlnc --example partial_decode
//! ```

use rlnc::codec::{self, Decoder, GenerationParams};
use rlnc::galois::{Field, TableMode};

fn main() {
    // GF(2): coefficients are single bits, so a combination just says which
    // originals were XORed together.
    let field = Field::new(1, TableMode::Off).unwrap();
    let n = 4;
    let params = GenerationParams::new(n, 8, field.clone()).unwrap();

    let originals: Vec<_> = [0x5Au8, 0xC3, 0x0F, 0x99]
        .iter()
        .map(|&byte| codec::symbolize(&[byte], &params).unwrap())
        .collect();

    let mut decoder = Decoder::new(params);
    for coefficients in [
        vec![1, 1, 0, 0], // X1 ^ X2
        vec![0, 1, 1, 0], // X2 ^ X3
        vec![0, 0, 0, 1], // X4 alone
    ] {
        let packet = codec::encode(&originals, &coefficients, &field).unwrap();
        decoder.receive(&packet).unwrap();
        let ready: Vec<usize> = decoder.decoded_packets().iter().map(|(i, _)| *i).collect();
        println!(
            "received {coefficients:?} -> rank {}/{n}, decodable originals {ready:?}",
            decoder.rank()
        );
    }

    // Three equations over four unknowns: not complete, but the packet that
    // carried X4 alone was enough to release it.
    assert!(!decoder.is_complete());
    let decoded = decoder.decoded_packets();
    assert!(decoded.iter().any(|(index, _)| *index == 3));
    println!("original 4 is out before the generation is complete");

    // One more independent equation finishes the job.
    let packet = codec::encode(&originals, &[1, 0, 0, 0], &field).unwrap();
    decoder.receive(&packet).unwrap();
    assert!(decoder.is_complete());
    println!("rank {}/{n}: everything decodable now", decoder.rank());
}
