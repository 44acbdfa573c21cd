//! The on-disk container format: a 20-byte header plus length-prefixed
//! packet records, every section a dense MSB-first pack of s-bit symbols.
//!
//! ```text
//! cargo run -p rlnc --example file_container
//! ```

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use rlnc::codec::{self, Decoder};
use rlnc::galois::{Field, TableMode};
use rlnc::wire::{self, ContainerHeader, HEADER_LEN};

fn main() {
    let data = b"sixteen tiny bytes pass through a container file unharmed";
    let n = 4;
    let field = Field::new(4, TableMode::On).unwrap();
    let chunk = data.len().div_ceil(n);

    let header = ContainerHeader {
        field_bits: 4,
        packet_count: n as u16,
        symbols_per_packet: (chunk * 8 / 4) as u32,
        original_byte_len: data.len() as u64,
    };
    let params = header.generation_params().unwrap();

    let originals: Vec<_> = (0..n)
        .map(|i| {
            let start = (i * chunk).min(data.len());
            let end = ((i + 1) * chunk).min(data.len());
            codec::symbolize(&data[start..end], &params).unwrap()
        })
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let packets: Vec<_> = (0..n + 2)
        .map(|_| {
            let coefficients = codec::random_coefficients(n, &field, &mut rng);
            codec::encode(&originals, &coefficients, &field).unwrap()
        })
        .collect();

    let path = std::env::temp_dir().join("rlnc_container_demo.ncp");
    wire::write_container(std::fs::File::create(&path).unwrap(), &header, &packets).unwrap();

    let record = header.packet_record_len();
    let size = std::fs::metadata(&path).unwrap().len();
    println!("wrote {}", path.display());
    println!(
        "{size} bytes = {HEADER_LEN} header + {} packets x (4-byte prefix + {record}-byte record)",
        packets.len()
    );
    assert_eq!(size as usize, HEADER_LEN + packets.len() * (4 + record));

    let (read_header, read_packets) =
        wire::read_container(std::fs::File::open(&path).unwrap()).unwrap();
    assert_eq!(read_header, header);
    assert_eq!(read_packets, packets);

    let mut decoder = Decoder::new(read_header.generation_params().unwrap());
    for packet in &read_packets {
        decoder.receive(packet).unwrap();
    }
    let mut restored = Vec::new();
    let total = read_header.original_byte_len as usize;
    for (index, packet) in decoder.decoded_packets() {
        let start = (index * chunk).min(total);
        let end = ((index + 1) * chunk).min(total);
        restored.extend_from_slice(&codec::desymbolize(&packet.payload, &params, end - start).unwrap());
    }
    assert_eq!(restored, data);
    println!("decoded back from disk: {:?}", String::from_utf8(restored).unwrap());

    std::fs::remove_file(&path).ok();
}
