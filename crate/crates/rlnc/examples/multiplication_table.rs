//! Prints the GF(2^4) multiplication table and reads inverses off it: the
//! inverse of `a` is the column where row `a` holds a 1.
//!
//! ```text
//! cargo run -p rlnc --example multiplication_table
//! ```

use rlnc::galois::{Field, TableMode};

fn main() {
    let field = Field::new(4, TableMode::On).unwrap();
    let size = 1u32 << field.bits();

    print!("  *|");
    for b in 0..size {
        print!(" {b:2x}");
    }
    println!();
    println!("---+{}", "-".repeat(3 * size as usize));
    for a in 0..size {
        print!(" {a:2x}|");
        for b in 0..size {
            print!(" {:2x}", field.mul(a, b));
        }
        println!();
    }

    println!();
    for a in 1..size {
        let by_scan = (1..size).find(|&b| field.mul(a, b) == 1).unwrap();
        assert_eq!(by_scan, field.inv(a).unwrap());
        print!("inv({a:x})={by_scan:x} ");
    }
    println!("\n(each found by scanning its row for the 1)");
}
