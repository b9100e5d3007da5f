//! Minimum-storage regenerating (MSR) codes that repair a failed node from
//! any `d` helpers, `k <= d <= n - 1`.
//!
//! A code is fixed by `(n, k, d)`, a binary extension field and one nonzero
//! coupling coefficient `rho`. Each node stores `alpha = q^m` symbols where
//! `q = d - k + 1`; repairing one node downloads `beta = alpha / q` symbols
//! from each of `d` helpers, which meets the minimum-storage cut-set bound.
//!
//! ```
//! use msrcode::{find_rho, Codec, CodeParams, CodewordSource, Field, FieldElement, repair};
//!
//! let p = CodeParams::derive(5, 2, 3)?;
//! let search = find_rho(&p, &Field::gf8())?;
//! assert!(search.report.is_mds);
//!
//! let codec = Codec::new(search.parity_check)?;
//! let message: Vec<FieldElement> = (0..codec.message_len() as u16).map(FieldElement).collect();
//! let codeword = codec.encode(&message)?;
//!
//! let out = repair(codec.parity_check(), 4, &[1, 2, 5], &mut CodewordSource::new(&codeword))?;
//! assert_eq!(out.block, codeword.block(4));
//! assert_eq!(out.report.symbols_downloaded, 12);
//! # Ok::<(), msrcode::Error>(())
//! ```
//!
//! The guide under `book/` walks through the construction; its code
//! listings are compiled and run as doctests of this crate.

pub mod codec;
pub mod construct;
pub mod error;
pub mod format;
pub mod gf;
pub mod linalg;
pub mod mds;
pub mod params;
pub mod repair;

pub use codec::{parity_residual, Codec, Codeword, ErasureDecoder};
pub use construct::{CauchyMatrix, ParityCheck, SparseRow};
pub use error::{Error, Result};
pub use format::{CodeSpecFile, ShardHeader};
pub use gf::{Field, FieldElement, FieldSpec};
pub use linalg::{LeftSolver, Matrix};
pub use mds::{check_mds, check_mds_with_budget, find_rho, generate, MdsReport, RhoSearch};
pub use params::{CodeParams, NodeId, SymbolTuple};
pub use repair::{repair, repair_plan, BandwidthReport, CodewordSource, RepairPlan, SymbolSource};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/parameters.md")]
    mod parameters {}
    #[doc = include_str!("../../../book/src/fields.md")]
    mod fields {}
    #[doc = include_str!("../../../book/src/construction.md")]
    mod construction {}
    #[doc = include_str!("../../../book/src/mds.md")]
    mod mds {}
    #[doc = include_str!("../../../book/src/codec.md")]
    mod codec {}
    #[doc = include_str!("../../../book/src/repair.md")]
    mod repair {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
    #[doc = include_str!("../../../README.md")]
    mod readme {}
}
