//! On-disk formats: the JSON code spec and the binary shard file.
//!
//! Shard layout, all integers little-endian:
//!
//! | offset | size | field                  |
//! |--------|------|------------------------|
//! | 0      | 4    | magic `MSR1`           |
//! | 4      | 1    | format version (1)     |
//! | 5      | 2    | node index (1-based)   |
//! | 7      | 2    | n                      |
//! | 9      | 2    | k                      |
//! | 11     | 2    | d                      |
//! | 13     | 1    | field width in bits    |
//! | 14     | 4    | stripe count           |
//! | 18     | 8    | original file length   |
//! | 26     | ...  | payload                |
//!
//! The payload is stripe-major: stripe `i` occupies
//! `[i * alpha * w, (i + 1) * alpha * w)` where `w` is the symbol size in
//! bytes, and within a stripe symbols follow the big-endian tuple order.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::construct::{CauchyMatrix, ParityCheck};
use crate::error::{Error, Result};
use crate::gf::{Field, FieldElement, FieldSpec};
use crate::params::CodeParams;

pub const SPEC_VERSION: u32 = 1;
pub const SHARD_MAGIC: [u8; 4] = *b"MSR1";
pub const SHARD_VERSION: u8 = 1;
pub const SHARD_HEADER_LEN: usize = 26;

/// Everything needed to rebuild `H` bit-exactly.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeSpecFile {
    pub version: u32,
    pub n: usize,
    pub k: usize,
    pub d: usize,
    pub field_width: u8,
    pub reduction_poly_hex: String,
    pub a: Vec<u16>,
    pub b: Vec<u16>,
    pub rho: u16,
    /// Derived scalars, informational; checked against `(n, k, d)` on load.
    pub params: CodeParams,
}

impl CodeSpecFile {
    pub fn from_parity_check(pc: &ParityCheck) -> Self {
        let p = *pc.params();
        let spec = pc.field().spec();
        CodeSpecFile {
            version: SPEC_VERSION,
            n: p.n,
            k: p.k,
            d: p.d,
            field_width: spec.width_bits(),
            reduction_poly_hex: format!("{:#x}", spec.reduction_polynomial()),
            a: pc.cauchy().a().iter().map(|e| e.value()).collect(),
            b: pc.cauchy().b().iter().map(|e| e.value()).collect(),
            rho: pc.rho().value(),
            params: p,
        }
    }

    pub fn field_spec(&self) -> Result<FieldSpec> {
        let hex = self.reduction_poly_hex.trim();
        let digits = hex
            .strip_prefix("0x")
            .or_else(|| hex.strip_prefix("0X"))
            .unwrap_or(hex);
        let poly = u32::from_str_radix(digits, 16)
            .map_err(|_| Error::Format(format!("bad reduction polynomial {hex:?}")))?;
        FieldSpec::new(self.field_width, poly)
    }

    /// Validates every field and rebuilds the parity-check matrix.
    pub fn to_parity_check(&self) -> Result<ParityCheck> {
        if self.version != SPEC_VERSION {
            return Err(Error::Format(format!("unsupported spec version {}", self.version)));
        }
        let p = CodeParams::derive(self.n, self.k, self.d)?;
        if p != self.params {
            return Err(Error::Format("embedded params disagree with (n, k, d)".into()));
        }
        let field = Field::new(self.field_spec()?);
        let elems = |v: &[u16]| {
            v.iter()
                .map(|&x| field.element(x as u32))
                .collect::<Result<Vec<_>>>()
        };
        let (a, b) = (elems(&self.a)?, elems(&self.b)?);
        if a.len() != p.n - p.k || b.len() != p.n {
            return Err(Error::Format(format!(
                "expected {} a-points and {} b-points",
                p.n - p.k,
                p.n
            )));
        }
        let cauchy = CauchyMatrix::from_points(&field, a, b)?;
        if !cauchy.points_distinct() {
            return Err(Error::Format("Cauchy points are not distinct".into()));
        }
        let rho = field.element(self.rho as u32)?;
        ParityCheck::with_cauchy(&p, &field, cauchy, rho)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct ShardHeader {
    pub node: u16,
    pub n: u16,
    pub k: u16,
    pub d: u16,
    pub field_width: u8,
    pub stripe_count: u32,
    pub file_len: u64,
}

impl ShardHeader {
    pub fn to_bytes(&self) -> [u8; SHARD_HEADER_LEN] {
        let mut out = [0u8; SHARD_HEADER_LEN];
        out[0..4].copy_from_slice(&SHARD_MAGIC);
        out[4] = SHARD_VERSION;
        out[5..7].copy_from_slice(&self.node.to_le_bytes());
        out[7..9].copy_from_slice(&self.n.to_le_bytes());
        out[9..11].copy_from_slice(&self.k.to_le_bytes());
        out[11..13].copy_from_slice(&self.d.to_le_bytes());
        out[13] = self.field_width;
        out[14..18].copy_from_slice(&self.stripe_count.to_le_bytes());
        out[18..26].copy_from_slice(&self.file_len.to_le_bytes());
        out
    }

    pub fn from_bytes(b: &[u8]) -> Result<Self> {
        if b.len() < SHARD_HEADER_LEN {
            return Err(Error::Format("shard header truncated".into()));
        }
        if b[0..4] != SHARD_MAGIC {
            return Err(Error::Format("bad shard magic".into()));
        }
        if b[4] != SHARD_VERSION {
            return Err(Error::Format(format!("unsupported shard version {}", b[4])));
        }
        let u16_at = |i: usize| u16::from_le_bytes([b[i], b[i + 1]]);
        Ok(ShardHeader {
            node: u16_at(5),
            n: u16_at(7),
            k: u16_at(9),
            d: u16_at(11),
            field_width: b[13],
            stripe_count: u32::from_le_bytes(b[14..18].try_into().unwrap()),
            file_len: u64::from_le_bytes(b[18..26].try_into().unwrap()),
        })
    }

    pub fn write_to(&self, w: &mut impl Write) -> Result<()> {
        w.write_all(&self.to_bytes())?;
        Ok(())
    }

    pub fn read_from(r: &mut impl Read) -> Result<Self> {
        let mut buf = [0u8; SHARD_HEADER_LEN];
        r.read_exact(&mut buf)
            .map_err(|_| Error::Format("shard header truncated".into()))?;
        Self::from_bytes(&buf)
    }

    /// Checks the header against a code and returns the payload size in bytes.
    pub fn validate(&self, p: &CodeParams, field_width: u8) -> Result<u64> {
        if (self.n as usize, self.k as usize, self.d as usize) != (p.n, p.k, p.d)
            || self.field_width != field_width
        {
            return Err(Error::Format(format!(
                "shard for ({}, {}, {}) over {} bits does not match code ({}, {}, {}) over {} bits",
                self.n, self.k, self.d, self.field_width, p.n, p.k, p.d, field_width
            )));
        }
        if self.node == 0 || self.node as usize > p.n {
            return Err(Error::Format(format!("shard node index {} out of range", self.node)));
        }
        let stripe_bytes = (p.k * p.alpha * (field_width as usize / 8)) as u64;
        if self.file_len > self.stripe_count as u64 * stripe_bytes {
            return Err(Error::Format("file length exceeds stripe capacity".into()));
        }
        Ok(self.stripe_count as u64 * (p.alpha * (field_width as usize / 8)) as u64)
    }
}

/// Little-endian symbol bytes.
pub fn symbols_to_bytes(symbols: &[FieldElement], width_bits: u8, out: &mut Vec<u8>) {
    match width_bits {
        8 => out.extend(symbols.iter().map(|s| s.value() as u8)),
        _ => {
            for s in symbols {
                out.extend_from_slice(&s.value().to_le_bytes());
            }
        }
    }
}

pub fn bytes_to_symbols(bytes: &[u8], width_bits: u8) -> Vec<FieldElement> {
    match width_bits {
        8 => bytes.iter().map(|&b| FieldElement(b as u16)).collect(),
        _ => bytes
            .chunks_exact(2)
            .map(|c| FieldElement(u16::from_le_bytes([c[0], c[1]])))
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mds::find_rho;
    use proptest::prelude::*;

    fn spec() -> (ParityCheck, CodeSpecFile) {
        let p = CodeParams::derive(5, 2, 3).unwrap();
        let pc = find_rho(&p, &Field::gf8()).unwrap().parity_check;
        let file = CodeSpecFile::from_parity_check(&pc);
        (pc, file)
    }

    #[test]
    fn spec_round_trip_rebuilds_identical_matrix() {
        let (pc, file) = spec();
        let text = file.to_json().unwrap();
        let back = CodeSpecFile::from_json(&text).unwrap();
        assert_eq!(back, file);
        assert_eq!(back.to_parity_check().unwrap(), pc);
        assert_eq!(file.reduction_poly_hex, "0x11b");
        assert_eq!(file.a, vec![0, 1, 2]);
        assert_eq!(file.b, vec![3, 4, 5, 6, 7]);
    }

    #[test]
    fn spec_validation_errors() {
        let (_, file) = spec();
        let mut zero = file.clone();
        zero.rho = 0;
        assert!(matches!(zero.to_parity_check(), Err(Error::ZeroRho)));

        let mut dup = file.clone();
        dup.b[4] = 6;
        assert!(dup.to_parity_check().is_err());

        let mut bad_poly = file.clone();
        bad_poly.reduction_poly_hex = "0x101".into();
        assert!(bad_poly.to_parity_check().is_err());

        let mut bad_params = file.clone();
        bad_params.params.alpha = 4;
        assert!(bad_params.to_parity_check().is_err());

        let mut wrong_version = file;
        wrong_version.version = 2;
        assert!(wrong_version.to_parity_check().is_err());
    }

    #[test]
    fn header_layout() {
        let h = ShardHeader {
            node: 3,
            n: 5,
            k: 2,
            d: 3,
            field_width: 8,
            stripe_count: 0x01020304,
            file_len: 0x1122334455,
        };
        let b = h.to_bytes();
        assert_eq!(&b[0..4], b"MSR1");
        assert_eq!(b[4], 1);
        assert_eq!(&b[5..7], &[3, 0]);
        assert_eq!(&b[7..13], &[5, 0, 2, 0, 3, 0]);
        assert_eq!(b[13], 8);
        assert_eq!(&b[14..18], &[4, 3, 2, 1]);
        assert_eq!(&b[18..26], &[0x55, 0x44, 0x33, 0x22, 0x11, 0, 0, 0]);
        assert_eq!(ShardHeader::from_bytes(&b).unwrap(), h);
    }

    #[test]
    fn header_rejects_garbage() {
        assert!(ShardHeader::from_bytes(b"MSR").is_err());
        let mut b = ShardHeader {
            node: 1,
            n: 4,
            k: 2,
            d: 3,
            field_width: 8,
            stripe_count: 1,
            file_len: 8,
        }
        .to_bytes();
        b[0] = b'X';
        assert!(ShardHeader::from_bytes(&b).is_err());
    }

    #[test]
    fn header_validation_against_code() {
        let p = CodeParams::derive(4, 2, 3).unwrap();
        let h = ShardHeader {
            node: 2,
            n: 4,
            k: 2,
            d: 3,
            field_width: 8,
            stripe_count: 10,
            file_len: 75,
        };
        assert_eq!(h.validate(&p, 8).unwrap(), 40);
        assert!(h.validate(&p, 16).is_err());
        assert!(ShardHeader { d: 2, ..h }.validate(&p, 8).is_err());
        assert!(ShardHeader { node: 5, ..h }.validate(&p, 8).is_err());
        assert!(ShardHeader { file_len: 81, ..h }.validate(&p, 8).is_err());
    }

    proptest! {
        #[test]
        fn symbol_bytes_round_trip(values in proptest::collection::vec(any::<u16>(), 0..64)) {
            let syms: Vec<_> = values.iter().map(|&v| FieldElement(v)).collect();
            let mut out = Vec::new();
            symbols_to_bytes(&syms, 16, &mut out);
            prop_assert_eq!(out.len(), syms.len() * 2);
            prop_assert_eq!(bytes_to_symbols(&out, 16), syms);

            let narrow: Vec<_> = values.iter().map(|&v| FieldElement(v & 0xFF)).collect();
            let mut out = Vec::new();
            symbols_to_bytes(&narrow, 8, &mut out);
            prop_assert_eq!(bytes_to_symbols(&out, 8), narrow);
        }
    }
}
