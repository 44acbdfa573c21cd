//! Tour of GF(2^s) arithmetic: addition is XOR, multiplication reduces by an
//! irreducible polynomial, and inversion runs an addition chain.
//!
//! ```text
//! cargo run -p rlnc --example field_arithmetic
//! ```

use rlnc::galois::{is_irreducible, Field, TableMode};

fn main() {
    let gf256 = Field::new(8, TableMode::Off).unwrap();
    println!(
        "GF(2^8) uses polynomial {:#011b} (reduced to {:#010b} for the multiply loop)",
        gf256.full_polynomial(),
        gf256.reduced_polynomial()
    );

    // Addition and subtraction are the same XOR.
    let (a, b) = (10, 41);
    let sum = gf256.add(a, b);
    println!("{a} + {b} = {sum}; {sum} - {a} = {}", gf256.sub(sum, a));

    // The product wraps back into the field: 10 * 41 lands on 1,
    // which also makes the two numbers each other's inverse.
    println!("{a} * {b} = {}", gf256.mul(a, b));
    println!("inv({a}) = {}", gf256.inv(a).unwrap());
    println!("1 / {a} = {}", gf256.div(1, a).unwrap());

    // Inversion of zero is the one undefined operation.
    println!("inv(0) -> {}", gf256.inv(0).unwrap_err());

    // The same API covers every supported width; GF(2) multiplication
    // degenerates to AND.
    let gf2 = Field::new(1, TableMode::Off).unwrap();
    for x in 0..2 {
        for y in 0..2 {
            print!("{} ", gf2.mul(x, y));
        }
    }
    println!("<- GF(2) products");

    // Candidate moduli can be vetted before use.
    println!("x^4 + x + 1 irreducible? {}", is_irreducible(4, 0b0011));
    println!("x^4 + x^2 + 1 irreducible? {} (it is (x^2+x+1)^2)", is_irreducible(4, 0b0101));

    // GF(2^16) stays on the fly; products still land inside the field.
    let gf65536 = Field::new(16, TableMode::Off).unwrap();
    let wide = gf65536.mul(0xABCD, 0x1234);
    println!("GF(2^16): 0xABCD * 0x1234 = {wide:#06x}, inverse check: {}", {
        let inv = gf65536.inv(0xABCD).unwrap();
        gf65536.mul(0xABCD, inv)
    });
}
