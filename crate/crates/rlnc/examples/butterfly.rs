//! The butterfly network, coded against uncoded. The relay's single outgoing
//! link can carry one packet per slot; mixing both sources' packets on it
//! keeps every slot useful for both destinations, while plain forwarding can
//! only serve one side at a time.
//!
//! ```text
//! cargo run -p rlnc --example butterfly
//! ```

use rlnc::galois::{Field, TableMode};
use rlnc::sim::{self, Coding, SimConfig, Topology};

fn main() {
    let topology = Topology::butterfly();
    let base = SimConfig {
        field: Field::new(8, TableMode::Off).unwrap(),
        packet_count: 16,
        coding: Coding::On,
        slots: 16,
        seed: 7,
        redundancy: 32,
        payload_bytes: 32,
    };

    let coded = sim::run(&topology, &base).unwrap();
    let uncoded = sim::run(&topology, &SimConfig { coding: Coding::Off, ..base }).unwrap();

    println!("--- coding on ---");
    print!("{coded}");
    println!("--- coding off ---");
    print!("{uncoded}");

    println!("\nnew-packets-per-slot at each destination (slot: coded / uncoded):");
    for (name, index) in [("D1", 0), ("D2", 1)] {
        print!("{name}: ");
        for slot in 0..base.slots as usize {
            print!(
                "{}:{}/{} ",
                slot + 1,
                coded.destinations[index].per_slot[slot].innovative,
                uncoded.destinations[index].per_slot[slot].innovative
            );
        }
        println!();
    }

    let total = |report: &sim::SimReport| -> usize {
        report.destinations.iter().map(|d| d.decoded.len()).sum()
    };
    println!(
        "\noriginals decoded across both destinations: {} with coding, {} without",
        total(&coded),
        total(&uncoded)
    );
}
