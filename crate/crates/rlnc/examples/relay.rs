//! The three-node relay chain over a lossy broadcast: S sends coded packets
//! to both A and D, the relay A re-encodes whatever subset it caught, and D
//! combines both streams. A never decodes anything.
//!
//! ```text
//! cargo run -p rlnc --example relay
//! ```

use rlnc::galois::{Field, TableMode};
use rlnc::sim::{self, Coding, SimConfig, Topology};

fn main() {
    // Drop 30% of packets on every link.
    let topology = Topology::relay().with_uniform_loss(0.3).unwrap();
    let config = SimConfig {
        field: Field::new(8, TableMode::Off).unwrap(),
        packet_count: 4,
        coding: Coding::On,
        slots: 25,
        seed: 2,
        redundancy: 25,
        payload_bytes: 24,
    };

    let report = sim::run(&topology, &config).unwrap();
    print!("{report}");

    let dest = &report.destinations[0];
    println!("\nrank per slot at D: {:?}", dest.per_slot.iter().map(|s| s.rank).collect::<Vec<_>>());
    match dest.completion_slot {
        Some(slot) => println!("all {} originals recovered by slot {slot}", report.packet_count),
        None => println!("run too lossy to finish; raise redundancy or slots"),
    }
    for (index, payload) in &dest.decoded {
        assert_eq!(payload, &report.originals[*index]);
    }
    println!("every decoded payload matches its original");
}
