//! Exact arithmetic over the binary fields GF(2^s).
//!
//! A symbol is an `s`-bit value read as a polynomial over GF(2): bit `i` is
//! the coefficient of `Z^i`. Addition and subtraction are the same operation,
//! bitwise XOR. Multiplication is the polynomial product reduced modulo a
//! fixed irreducible polynomial of degree `s`; the reduction only ever needs
//! the *reduced* polynomial `q`, i.e. the irreducible polynomial with its
//! `Z^s` term dropped. Inversion raises an element to `2^s - 2` along an
//! Itoh-Tsujii addition chain.
//!
//! For widths up to [`MAX_TABLE_WIDTH`] a [`Field`] can precompute the full
//! multiplication table (at most 64 KiB) plus an inverse table; lookups then
//! replace the shift-and-XOR loop.

use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use thiserror::Error;

/// One element of GF(2^s): an unsigned integer in `[0, 2^s - 1]`.
///
/// Symbols are stored in 32 bits regardless of `s`; intermediate products
/// during reduction never exceed `2s - 1 <= 31` bits for the supported widths.
pub type Symbol = u32;

/// Symbol widths accepted by [`Field::new`]. Powers of two divide byte-aligned
/// payloads cleanly; wider fields are impractical to begin with.
pub const SUPPORTED_WIDTHS: [u32; 5] = [1, 2, 4, 8, 16];

/// Widest field for which lookup tables are offered. A full GF(2^8) product
/// table is 64 KiB; GF(2^16) would need 8 GiB and stays on the fly.
pub const MAX_TABLE_WIDTH: u32 = 8;

/// Built-in reduced polynomials, one per supported width. The full polynomial
/// is `Z^s + q`. Every entry must pass [`is_irreducible`]; the test suite
/// checks them all by brute force.
const REDUCED_POLYNOMIALS: [(u32, u32); 5] = [
    (1, 0b1),                     // Z + 1
    (2, 0b11),                    // Z^2 + Z + 1
    (4, 0b0011),                  // Z^4 + Z + 1
    (8, 0b0001_1011),             // Z^8 + Z^4 + Z^3 + Z + 1
    (16, 0b0001_0000_0000_1011),  // Z^16 + Z^12 + Z^3 + Z + 1
];

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FieldError {
    #[error("unsupported symbol width {0}; supported widths are 1, 2, 4, 8 and 16")]
    UnsupportedWidth(u32),
    #[error("lookup tables are only available for symbol widths up to 8, requested {0}")]
    TableUnavailable(u32),
    #[error("zero is not invertible")]
    ZeroInverse,
    #[error("division by zero")]
    DivisionByZero,
}

/// Whether a [`Field`] precomputes its multiplication and inverse tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableMode {
    Off,
    On,
}

struct Tables {
    mul: Box<[u8]>,
    inv: Box<[u8]>,
}

/// An instance of GF(2^s) with its reduced irreducible polynomial and,
/// optionally, precomputed lookup tables.
///
/// A `Field` is immutable after construction and all operations are pure, so
/// shared references can be used from any number of threads. Clones share the
/// tables and the optional multiplication counter.
#[derive(Clone)]
pub struct Field {
    s: u32,
    q: u32,
    mask: u32,
    tables: Option<Arc<Tables>>,
    mul_counter: Option<Arc<AtomicU64>>,
}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Field")
            .field("s", &self.s)
            .field("q", &format_args!("{:#b}", self.q))
            .field("tables", &self.tables.is_some())
            .finish()
    }
}

impl Field {
    /// Builds GF(2^s) with the built-in reduced polynomial for `s`.
    ///
    /// With [`TableMode::On`] the multiplication table is filled from the
    /// on-the-fly product and the inverse table is read off it, scanning each
    /// row for the column holding 1.
    pub fn new(s: u32, table_mode: TableMode) -> Result<Field, FieldError> {
        let q = builtin_reduced_polynomial(s).ok_or(FieldError::UnsupportedWidth(s))?;
        let mut field = Field {
            s,
            q,
            mask: (1u32 << s) - 1,
            tables: None,
            mul_counter: None,
        };
        if table_mode == TableMode::On {
            if s > MAX_TABLE_WIDTH {
                return Err(FieldError::TableUnavailable(s));
            }
            field.tables = Some(Arc::new(field.build_tables()));
        }
        Ok(field)
    }

    fn build_tables(&self) -> Tables {
        let size = 1usize << self.s;
        let mut mul = vec![0u8; size * size].into_boxed_slice();
        for a in 0..size as u32 {
            for b in 0..size as u32 {
                mul[((a as usize) << self.s) | b as usize] = self.mul_on_the_fly(a, b) as u8;
            }
        }
        let mut inv = vec![0u8; size].into_boxed_slice();
        for a in 1..size as u32 {
            let row = &mul[(a as usize) << self.s..][..size];
            let b = row
                .iter()
                .position(|&p| p == 1)
                .expect("every nonzero element has an inverse");
            debug_assert_eq!(b as Symbol, self.inv_addition_chain(a));
            inv[a as usize] = b as u8;
        }
        Tables { mul, inv }
    }

    /// Symbol width in bits.
    pub fn bits(&self) -> u32 {
        self.s
    }

    /// Number of field elements, `2^s`.
    pub fn order(&self) -> u64 {
        1u64 << self.s
    }

    /// The reduced irreducible polynomial `q` (full polynomial minus `Z^s`).
    pub fn reduced_polynomial(&self) -> u32 {
        self.q
    }

    /// The full irreducible polynomial `Z^s + q`.
    pub fn full_polynomial(&self) -> u64 {
        (1u64 << self.s) | self.q as u64
    }

    /// Largest valid symbol, `2^s - 1`.
    pub fn max_symbol(&self) -> Symbol {
        self.mask
    }

    pub fn has_tables(&self) -> bool {
        self.tables.is_some()
    }

    /// True if `a` is in `[0, 2^s - 1]`.
    pub fn contains(&self, a: Symbol) -> bool {
        a <= self.mask
    }

    /// Field addition: bitwise XOR, which keeps the result inside the field.
    pub fn add(&self, a: Symbol, b: Symbol) -> Symbol {
        debug_assert!(self.contains(a) && self.contains(b));
        a ^ b
    }

    /// Field subtraction. Every element is its own additive inverse, so this
    /// is the same XOR as [`Field::add`]: if `a + b = c` then `c - a = b`.
    pub fn sub(&self, a: Symbol, b: Symbol) -> Symbol {
        self.add(a, b)
    }

    /// Field multiplication: the polynomial product of `a` and `b` modulo the
    /// irreducible polynomial. Table mode answers from the lookup table.
    pub fn mul(&self, a: Symbol, b: Symbol) -> Symbol {
        debug_assert!(self.contains(a) && self.contains(b));
        if let Some(counter) = &self.mul_counter {
            counter.fetch_add(1, Ordering::Relaxed);
        }
        match &self.tables {
            Some(tables) => tables.mul[((a as usize) << self.s) | b as usize] as Symbol,
            None => self.mul_on_the_fly(a, b),
        }
    }

    /// Shift-and-XOR product. Each round adds `a` to the product when the
    /// low bit of `b` is set, then advances `a` to `a * Z`. The carry is
    /// recomputed from the top bit of `a` on every round: it tells whether
    /// the shift left the field so `q` must be XORed back in.
    fn mul_on_the_fly(&self, mut a: Symbol, mut b: Symbol) -> Symbol {
        let mut product = 0;
        for _ in 0..self.s {
            if b & 1 == 1 {
                product ^= a;
            }
            let carry = (a >> (self.s - 1)) & 1;
            a = (a << 1) & self.mask;
            if carry == 1 {
                a ^= self.q;
            }
            b >>= 1;
        }
        product
    }

    /// Multiplicative inverse of a nonzero element.
    pub fn inv(&self, a: Symbol) -> Result<Symbol, FieldError> {
        debug_assert!(self.contains(a));
        if a == 0 {
            return Err(FieldError::ZeroInverse);
        }
        Ok(match &self.tables {
            Some(tables) => tables.inv[a as usize] as Symbol,
            None => self.inv_addition_chain(a),
        })
    }

    /// Itoh-Tsujii inversion: computes `a^(2^(s-1) - 1)` along the addition
    /// chain given by the binary digits of `s - 1`, then squares once more to
    /// reach `a^(2^s - 2) = a^-1`.
    fn inv_addition_chain(&self, a: Symbol) -> Symbol {
        // GF(2) falls outside the chain: s - 1 = 0 has no leading one digit.
        // Its single nonzero element is its own inverse.
        if self.s == 1 {
            return 1;
        }
        let exponent = self.s - 1;
        let top = 31 - exponent.leading_zeros();
        let mut c = a;
        let mut chain = 1u32; // invariant: c == a^(2^chain - 1)
        for i in (0..top).rev() {
            let mut b = c;
            for _ in 0..chain {
                b = self.mul(b, b);
            }
            c = self.mul(c, b);
            chain *= 2;
            if (exponent >> i) & 1 == 1 {
                c = self.mul(self.mul(c, c), a);
                chain += 1;
            }
        }
        self.mul(c, c)
    }

    /// Field division, `a * b^-1`.
    pub fn div(&self, a: Symbol, b: Symbol) -> Result<Symbol, FieldError> {
        if b == 0 {
            return Err(FieldError::DivisionByZero);
        }
        let inv = self.inv(b).expect("b is nonzero");
        Ok(self.mul(a, inv))
    }

    /// Makes every subsequent [`Field::mul`] (on this instance and its
    /// clones) bump `counter`. The simulator uses this to prove that
    /// store-and-forward runs perform no field multiplications.
    pub fn attach_mul_counter(&mut self, counter: Arc<AtomicU64>) {
        self.mul_counter = Some(counter);
    }
}

fn builtin_reduced_polynomial(s: u32) -> Option<u32> {
    REDUCED_POLYNOMIALS
        .iter()
        .find(|&&(width, _)| width == s)
        .map(|&(_, q)| q)
}

/// Brute-force irreducibility check for the degree-`s` polynomial `Z^s + q`.
///
/// Trial-divides by every polynomial of degree 1 through `s / 2`; a reducible
/// polynomial always has a factor in that range. Cheap for `s <= 16` and used
/// by the tests to vet every built-in polynomial.
pub fn is_irreducible(s: u32, reduced_q: u32) -> bool {
    if s == 0 || s > 31 || (reduced_q as u64) >= (1u64 << s) {
        return false;
    }
    let full = (1u64 << s) | reduced_q as u64;
    for degree in 1..=s / 2 {
        for low in 0..(1u64 << degree) {
            let divisor = (1u64 << degree) | low;
            if poly_rem(full, divisor) == 0 {
                return false;
            }
        }
    }
    true
}

/// Remainder of carry-less polynomial division over GF(2).
fn poly_rem(mut value: u64, divisor: u64) -> u64 {
    debug_assert!(divisor != 0);
    let divisor_degree = 63 - divisor.leading_zeros();
    while value != 0 {
        let degree = 63 - value.leading_zeros();
        if degree < divisor_degree {
            break;
        }
        value ^= divisor << (degree - divisor_degree);
    }
    value
}
