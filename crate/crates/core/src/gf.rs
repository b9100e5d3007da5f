//! Binary extension fields GF(2^8) and GF(2^16).
//!
//! Elements are stored as plain integers below `2^width`. Addition is XOR;
//! multiplication goes through log/antilog tables built from a generator
//! found at construction time, so any irreducible reduction polynomial of
//! the right degree is accepted, primitive or not.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// x^8 + x^4 + x^3 + x + 1
pub const DEFAULT_POLY_8: u32 = 0x11B;
/// x^16 + x^12 + x^3 + x + 1
pub const DEFAULT_POLY_16: u32 = 0x1100B;

/// An element of a field of order at most 2^16.
#[derive(Copy, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FieldElement(pub u16);

impl FieldElement {
    pub const ZERO: FieldElement = FieldElement(0);
    pub const ONE: FieldElement = FieldElement(1);

    #[inline]
    pub fn value(self) -> u16 {
        self.0
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#04x}", self.0)
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#04x}", self.0)
    }
}

/// Width and reduction polynomial of a binary extension field.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FieldSpec {
    width_bits: u8,
    reduction_polynomial: u32,
}

impl FieldSpec {
    /// Validates `poly` as an irreducible polynomial of degree `width_bits`.
    pub fn new(width_bits: u8, poly: u32) -> Result<Self> {
        if width_bits != 8 && width_bits != 16 {
            return Err(Error::Field(format!(
                "unsupported field width {width_bits}, expected 8 or 16"
            )));
        }
        if degree(poly) != Some(width_bits as u32) {
            return Err(Error::Field(format!(
                "polynomial {poly:#x} does not have degree {width_bits}"
            )));
        }
        if !is_irreducible(poly) {
            return Err(Error::Field(format!("polynomial {poly:#x} is reducible")));
        }
        Ok(FieldSpec {
            width_bits,
            reduction_polynomial: poly,
        })
    }

    pub fn gf8() -> Self {
        FieldSpec {
            width_bits: 8,
            reduction_polynomial: DEFAULT_POLY_8,
        }
    }

    pub fn gf16() -> Self {
        FieldSpec {
            width_bits: 16,
            reduction_polynomial: DEFAULT_POLY_16,
        }
    }

    /// Default spec for a width, or an error for anything but 8 and 16.
    pub fn with_width(width_bits: u8) -> Result<Self> {
        match width_bits {
            8 => Ok(Self::gf8()),
            16 => Ok(Self::gf16()),
            w => Err(Error::Field(format!(
                "unsupported field width {w}, expected 8 or 16"
            ))),
        }
    }

    pub fn width_bits(&self) -> u8 {
        self.width_bits
    }

    pub fn reduction_polynomial(&self) -> u32 {
        self.reduction_polynomial
    }

    /// Field order Q.
    pub fn order(&self) -> usize {
        1usize << self.width_bits
    }

    /// Serialized size of one symbol.
    pub fn symbol_bytes(&self) -> usize {
        self.width_bits as usize / 8
    }
}

fn degree(poly: u32) -> Option<u32> {
    if poly == 0 {
        None
    } else {
        Some(31 - poly.leading_zeros())
    }
}

/// Remainder of carry-less division `a mod b`.
fn poly_mod(mut a: u32, b: u32) -> u32 {
    let db = degree(b).expect("nonzero divisor");
    while let Some(da) = degree(a) {
        if da < db {
            break;
        }
        a ^= b << (da - db);
    }
    a
}

/// Trial division by every polynomial of degree 1..=deg/2.
fn is_irreducible(poly: u32) -> bool {
    let Some(deg) = degree(poly) else {
        return false;
    };
    if deg == 0 {
        return false;
    }
    for divisor in 2u32..(1u32 << (deg / 2 + 1)) {
        if poly_mod(poly, divisor) == 0 {
            return false;
        }
    }
    true
}

/// Carry-less multiply then reduce. Only used to seed the tables.
fn slow_mul(a: u32, b: u32, poly: u32, width: u32) -> u32 {
    let mut acc = 0u32;
    let mut a = a;
    let mut b = b;
    while b != 0 {
        if b & 1 != 0 {
            acc ^= a;
        }
        b >>= 1;
        a <<= 1;
        if a & (1 << width) != 0 {
            a ^= poly;
        }
    }
    acc
}

struct Tables {
    spec: FieldSpec,
    /// exp[i] = g^i, stored twice over so `log a + log b` never needs a mod.
    exp: Vec<u16>,
    log: Vec<u16>,
}

/// A constructed field with its arithmetic tables. Cheap to clone.
#[derive(Clone)]
pub struct Field {
    tables: Arc<Tables>,
}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Field")
            .field("spec", &self.tables.spec)
            .finish()
    }
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        self.tables.spec == other.tables.spec
    }
}

impl Eq for Field {}

impl Field {
    pub fn new(spec: FieldSpec) -> Self {
        let width = spec.width_bits as u32;
        let poly = spec.reduction_polynomial;
        let group = (1usize << width) - 1;

        let generator = (2u32..=group as u32)
            .find(|&g| multiplicative_order(g, poly, width) == group)
            .expect("irreducible polynomial yields a cyclic multiplicative group");

        let mut exp = vec![0u16; 2 * group];
        let mut log = vec![0u16; group + 1];
        let mut x = 1u32;
        for i in 0..group {
            exp[i] = x as u16;
            exp[i + group] = x as u16;
            log[x as usize] = i as u16;
            x = slow_mul(x, generator, poly, width);
        }
        Field {
            tables: Arc::new(Tables { spec, exp, log }),
        }
    }

    pub fn gf8() -> Self {
        Self::new(FieldSpec::gf8())
    }

    pub fn gf16() -> Self {
        Self::new(FieldSpec::gf16())
    }

    pub fn spec(&self) -> FieldSpec {
        self.tables.spec
    }

    pub fn order(&self) -> usize {
        self.tables.spec.order()
    }

    /// Checked conversion from a canonical integer value.
    pub fn element(&self, value: u32) -> Result<FieldElement> {
        if (value as usize) < self.order() {
            Ok(FieldElement(value as u16))
        } else {
            Err(Error::Field(format!(
                "value {value} is outside a field of order {}",
                self.order()
            )))
        }
    }

    #[inline]
    pub fn add(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        FieldElement(a.0 ^ b.0)
    }

    /// Same as [`Field::add`] in characteristic 2.
    #[inline]
    pub fn sub(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        FieldElement(a.0 ^ b.0)
    }

    #[inline]
    pub fn mul(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        if a.0 == 0 || b.0 == 0 {
            return FieldElement::ZERO;
        }
        let t = &self.tables;
        FieldElement(t.exp[t.log[a.0 as usize] as usize + t.log[b.0 as usize] as usize])
    }

    pub fn inv(&self, a: FieldElement) -> Result<FieldElement> {
        if a.0 == 0 {
            return Err(Error::DivisionByZero);
        }
        let t = &self.tables;
        let group = self.order() - 1;
        let l = t.log[a.0 as usize] as usize;
        Ok(FieldElement(t.exp[(group - l) % group]))
    }

    pub fn div(&self, a: FieldElement, b: FieldElement) -> Result<FieldElement> {
        Ok(self.mul(a, self.inv(b)?))
    }

    /// `acc[i] += c * src[i]` for every position.
    pub fn mul_add_slice(&self, acc: &mut [FieldElement], c: FieldElement, src: &[FieldElement]) {
        if c.0 == 0 {
            return;
        }
        let t = &self.tables;
        let lc = t.log[c.0 as usize] as usize;
        for (a, s) in acc.iter_mut().zip(src) {
            if s.0 != 0 {
                a.0 ^= t.exp[lc + t.log[s.0 as usize] as usize];
            }
        }
    }

    /// Inner product of two equal-length slices.
    pub fn dot(&self, a: &[FieldElement], b: &[FieldElement]) -> FieldElement {
        a.iter()
            .zip(b)
            .fold(FieldElement::ZERO, |acc, (&x, &y)| self.add(acc, self.mul(x, y)))
    }
}

fn multiplicative_order(g: u32, poly: u32, width: u32) -> usize {
    let mut x = g;
    let mut order = 1;
    while x != 1 {
        x = slow_mul(x, g, poly, width);
        order += 1;
        if order > (1 << width) {
            break;
        }
    }
    order
}
