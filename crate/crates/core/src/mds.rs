//! MDS certification by exhaustive subset rank tests, and the search for a
//! coupling coefficient `rho` that makes the code MDS.

use itertools::Itertools;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::construct::{CauchyMatrix, ParityCheck};
use crate::error::{Error, Result};
use crate::gf::{Field, FieldElement};
use crate::linalg::Matrix;
use crate::params::CodeParams;

/// Subset enumeration budget used when the caller does not pick one.
pub const DEFAULT_MAX_SUBSETS: u128 = 10_000;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MdsReport {
    pub is_mds: bool,
    pub subsets_checked: u64,
    /// Smallest failing node subset in lexicographic order (1-based).
    pub first_failure: Option<Vec<usize>>,
    /// `(n-k) alpha - rank` for the first failure.
    pub rank_deficiency: Option<usize>,
    /// Minimum distance when certified, `n - k + 1`.
    pub min_distance: Option<usize>,
}

pub fn rank(matrix: &Matrix, field: &Field) -> usize {
    matrix.rank(field)
}

/// Binomial coefficient without overflow for the sizes we care about.
pub fn binomial(n: usize, r: usize) -> u128 {
    if r > n {
        return 0;
    }
    let r = r.min(n - r);
    (0..r).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// Number of `(n-k)`-subsets a full certification visits.
pub fn subset_count(p: &CodeParams) -> u128 {
    binomial(p.n, p.n - p.k)
}

/// Degree bound on the product of all subset determinants as a polynomial in
/// `rho`: `C(n, n-k) (n-k) alpha`.
pub fn degree_bound(p: &CodeParams) -> u128 {
    subset_count(p) * ((p.n - p.k) * p.alpha) as u128
}

/// Certifies `pc` against every `(n-k)`-subset, refusing if the enumeration
/// would exceed `max_subsets`.
pub fn check_mds_with_budget(pc: &ParityCheck, max_subsets: u128) -> Result<MdsReport> {
    let p = pc.params();
    let total = subset_count(p);
    if total > max_subsets {
        return Err(Error::BudgetExceeded {
            subsets: total,
            budget: max_subsets,
        });
    }
    Ok(check_mds(pc))
}

/// Exhaustive check that `H(:, S)` is full rank for every `|S| = n - k`.
pub fn check_mds(pc: &ParityCheck) -> MdsReport {
    let p = pc.params();
    let field = pc.field();
    let full = (p.n - p.k) * p.alpha;
    let subsets: Vec<Vec<usize>> = (1..=p.n).combinations(p.n - p.k).collect();

    let failure = subsets.par_iter().enumerate().find_map_first(|(i, s)| {
        let r = pc.submatrix(s).rank(field);
        (r < full).then(|| (i, s.clone(), full - r))
    });

    match failure {
        Some((i, subset, deficiency)) => MdsReport {
            is_mds: false,
            subsets_checked: i as u64 + 1,
            first_failure: Some(subset),
            rank_deficiency: Some(deficiency),
            min_distance: None,
        },
        None => MdsReport {
            is_mds: true,
            subsets_checked: subsets.len() as u64,
            first_failure: None,
            rank_deficiency: None,
            min_distance: Some(p.n - p.k + 1),
        },
    }
}

#[derive(Clone, Debug)]
pub struct RhoSearch {
    pub rho: FieldElement,
    pub parity_check: ParityCheck,
    pub report: MdsReport,
    /// Candidates tried, including the winner.
    pub attempts: usize,
    pub degree_bound: u128,
}

/// Tries `rho = 1, 2, ...` in ascending order and returns the first value
/// that passes [`check_mds`].
pub fn find_rho(p: &CodeParams, field: &Field) -> Result<RhoSearch> {
    find_rho_from(p, field, 1)
}

/// Like [`find_rho`] but starts at `start` and wraps around the nonzero
/// elements, so every candidate is still visited once.
pub fn find_rho_from(p: &CodeParams, field: &Field, start: u32) -> Result<RhoSearch> {
    let cauchy = CauchyMatrix::build(p, field)?;
    let group = (field.order() - 1) as u32;
    let start = if start == 0 { 1 } else { (start - 1) % group + 1 };
    for attempt in 0..group {
        let rho = FieldElement(((start - 1 + attempt) % group + 1) as u16);
        let pc = ParityCheck::with_cauchy(p, field, cauchy.clone(), rho)?;
        let report = check_mds(&pc);
        if report.is_mds {
            return Ok(RhoSearch {
                rho,
                parity_check: pc,
                report,
                attempts: attempt as usize + 1,
                degree_bound: degree_bound(p),
            });
        }
    }
    Err(Error::RhoNotFound {
        width: field.spec().width_bits(),
        degree_bound: degree_bound(p),
    })
}

/// Outcome of [`generate`].
#[derive(Clone, Debug)]
pub struct GeneratedCode {
    pub search: RhoSearch,
    /// Field widths tried, in order; more than one entry means escalation.
    pub widths_tried: Vec<u8>,
}

impl GeneratedCode {
    pub fn escalated(&self) -> bool {
        self.widths_tried.len() > 1
    }
}

/// Finds a certified code for `p`, starting at `start_width` bits and
/// escalating from 8 to 16 when the smaller field is too small or has no
/// working `rho`.
pub fn generate(p: &CodeParams, start_width: u8, rho_start: u32, max_subsets: u128) -> Result<GeneratedCode> {
    let total = subset_count(p);
    if total > max_subsets {
        return Err(Error::BudgetExceeded {
            subsets: total,
            budget: max_subsets,
        });
    }
    let widths: &[u8] = match start_width {
        8 => &[8, 16],
        16 => &[16],
        w => return Err(Error::Field(format!("unsupported field width {w}, expected 8 or 16"))),
    };
    let mut tried = Vec::new();
    let mut last_err = None;
    for &w in widths {
        tried.push(w);
        let field = Field::new(crate::gf::FieldSpec::with_width(w)?);
        match find_rho_from(p, &field, rho_start) {
            Ok(search) => {
                return Ok(GeneratedCode {
                    search,
                    widths_tried: tried,
                })
            }
            Err(e @ (Error::FieldTooSmall { .. } | Error::RhoNotFound { .. })) => last_err = Some(e),
            Err(e) => return Err(e),
        }
    }
    Err(last_err.expect("at least one width tried"))
}
