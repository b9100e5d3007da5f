//! Parity-check matrix construction.
//!
//! `H = J + E`, where `J = C ⊗ I_alpha` for an `(n-k) x n` Cauchy matrix `C`,
//! and `E` carries a single scalar `rho` at the coupling positions of the
//! Type II rows.
//!
//! Row order:
//! * rows `[0, (n-d) alpha)` are Type I, row `(r-1) alpha + x` for constraint
//!   `r` in `1..=n-d` and tuple index `x`;
//! * rows `[(n-d) alpha, (n-k) alpha)` are Type II, row
//!   `(n-d) alpha + (delta-1) alpha + x` for `delta` in `1..q`.
//!
//! Column of symbol `(node j, tuple x)` is `(j-1) alpha + x`.

use crate::error::{Error, Result};
use crate::gf::{Field, FieldElement};
use crate::linalg::Matrix;
use crate::params::{CodeParams, NodeId};

/// `(n-k) x n` Cauchy matrix with entries `1 / (a_r + b_j)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CauchyMatrix {
    a: Vec<FieldElement>,
    b: Vec<FieldElement>,
    entries: Vec<Vec<FieldElement>>,
}

impl CauchyMatrix {
    /// Canonical points: `a = 0..n-k`, `b = n-k..2n-k`.
    pub fn build(p: &CodeParams, field: &Field) -> Result<Self> {
        let needed = p.min_field_order();
        if field.order() < needed {
            return Err(Error::FieldTooSmall {
                order: field.order(),
                needed,
            });
        }
        let a = (0..p.n - p.k).map(|v| FieldElement(v as u16)).collect();
        let b = (p.n - p.k..needed).map(|v| FieldElement(v as u16)).collect();
        Self::from_points(field, a, b)
    }

    /// Builds from explicit points. Only requires `a_r != b_j` so every entry is
    /// defined; use [`CauchyMatrix::points_distinct`] to check the full Cauchy
    /// condition.
    pub fn from_points(field: &Field, a: Vec<FieldElement>, b: Vec<FieldElement>) -> Result<Self> {
        let mut entries = Vec::with_capacity(a.len());
        for &ar in &a {
            let row = b
                .iter()
                .map(|&bj| {
                    field.inv(field.add(ar, bj)).map_err(|_| {
                        Error::Input(format!("Cauchy points collide: a = b = {ar}"))
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            entries.push(row);
        }
        Ok(CauchyMatrix { a, b, entries })
    }

    pub fn a(&self) -> &[FieldElement] {
        &self.a
    }

    pub fn b(&self) -> &[FieldElement] {
        &self.b
    }

    pub fn rows(&self) -> usize {
        self.a.len()
    }

    pub fn cols(&self) -> usize {
        self.b.len()
    }

    /// Entry for constraint row `r` (1-based) and node `j` (1-based).
    #[inline]
    pub fn entry(&self, r: usize, j: usize) -> FieldElement {
        self.entries[r - 1][j - 1]
    }

    pub fn points_distinct(&self) -> bool {
        let mut all: Vec<u16> = self.a.iter().chain(&self.b).map(|e| e.0).collect();
        all.sort_unstable();
        all.windows(2).all(|w| w[0] != w[1])
    }

    /// Square submatrix over 1-based `rows` and `cols`.
    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Matrix {
        Matrix::from_rows(
            rows.iter()
                .map(|&r| cols.iter().map(|&j| self.entry(r, j)).collect())
                .collect(),
        )
    }
}

/// One sparse parity row: `(column, coefficient)` pairs sorted by column.
pub type SparseRow = Vec<(usize, FieldElement)>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParityCheck {
    params: CodeParams,
    field: Field,
    cauchy: CauchyMatrix,
    rho: FieldElement,
    rows: Vec<SparseRow>,
}

impl ParityCheck {
    /// Builds `H = C ⊗ I_alpha + E^rho` with canonical Cauchy points.
    pub fn build(p: &CodeParams, field: &Field, rho: FieldElement) -> Result<Self> {
        let cauchy = CauchyMatrix::build(p, field)?;
        Self::with_cauchy(p, field, cauchy, rho)
    }

    pub fn with_cauchy(
        p: &CodeParams,
        field: &Field,
        cauchy: CauchyMatrix,
        rho: FieldElement,
    ) -> Result<Self> {
        if rho.is_zero() {
            return Err(Error::ZeroRho);
        }
        Self::assemble(p, field, cauchy, rho)
    }

    /// `J = C ⊗ I_alpha` alone, i.e. every coupling entry zeroed.
    pub fn base_only(p: &CodeParams, field: &Field, cauchy: CauchyMatrix) -> Result<Self> {
        Self::assemble(p, field, cauchy, FieldElement::ZERO)
    }

    fn assemble(
        p: &CodeParams,
        field: &Field,
        cauchy: CauchyMatrix,
        rho: FieldElement,
    ) -> Result<Self> {
        if cauchy.rows() != p.n - p.k || cauchy.cols() != p.n {
            return Err(Error::Input(format!(
                "Cauchy matrix is {}x{}, expected {}x{}",
                cauchy.rows(),
                cauchy.cols(),
                p.n - p.k,
                p.n
            )));
        }
        let mut pc = ParityCheck {
            params: *p,
            field: field.clone(),
            cauchy,
            rho,
            rows: Vec::with_capacity((p.n - p.k) * p.alpha),
        };
        for r in 1..=p.n - p.d {
            for x in 0..p.alpha {
                let row = pc.type1_row(r, x);
                pc.rows.push(row);
            }
        }
        for delta in 1..p.q {
            for x in 0..p.alpha {
                let row = pc.type2_row(delta, x);
                pc.rows.push(row);
            }
        }
        Ok(pc)
    }

    pub fn params(&self) -> &CodeParams {
        &self.params
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn cauchy(&self) -> &CauchyMatrix {
        &self.cauchy
    }

    pub fn rho(&self) -> FieldElement {
        self.rho
    }

    pub fn row_count(&self) -> usize {
        self.rows.len()
    }

    pub fn col_count(&self) -> usize {
        self.params.n * self.params.alpha
    }

    pub fn rows(&self) -> &[SparseRow] {
        &self.rows
    }

    pub fn type1_row_index(&self, r: usize, x: usize) -> usize {
        (r - 1) * self.params.alpha + x
    }

    pub fn type2_row_index(&self, delta: usize, x: usize) -> usize {
        let p = &self.params;
        (p.n - p.d) * p.alpha + (delta - 1) * p.alpha + x
    }

    /// Type I constraint `r` at tuple `x`: one symbol per node at tuple `x`.
    pub fn type1_row(&self, r: usize, x: usize) -> SparseRow {
        let p = &self.params;
        (1..=p.n)
            .map(|j| (p.column(j, x), self.cauchy.entry(r, j)))
            .collect()
    }

    /// Type II constraint for shift `delta` at tuple `x`: the diagonal part from
    /// Cauchy row `n-d+delta`, plus `rho` on symbol `(shift(x, g, delta); (g, x_g))`
    /// for every group `g` whose node `(g, x_g)` exists.
    pub fn type2_row(&self, delta: usize, x: usize) -> SparseRow {
        let p = &self.params;
        let r = p.n - p.d + delta;
        let mut row: SparseRow = (1..=p.n)
            .map(|j| (p.column(j, x), self.cauchy.entry(r, j)))
            .collect();
        if !self.rho.is_zero() {
            for g in 1..=p.m {
                let node = NodeId::new(g, p.coord(x, g));
                if let Ok(j) = p.node_index(node) {
                    row.push((p.column(j, p.shift_index(x, g, delta)), self.rho));
                }
            }
        }
        row.sort_unstable_by_key(|&(c, _)| c);
        row
    }

    /// Dense `H(:, S)` for 1-based node indices `nodes`, in ascending node order.
    pub fn submatrix(&self, nodes: &[usize]) -> Matrix {
        let p = &self.params;
        let mut sorted = nodes.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        // node -> position of its column block in the output
        let mut slot = vec![usize::MAX; p.n + 1];
        for (i, &j) in sorted.iter().enumerate() {
            slot[j] = i;
        }
        let mut out = Matrix::zeros(self.rows.len(), sorted.len() * p.alpha);
        for (r, row) in self.rows.iter().enumerate() {
            for &(col, v) in row {
                let node = col / p.alpha + 1;
                if slot[node] != usize::MAX {
                    out.set(r, slot[node] * p.alpha + col % p.alpha, v);
                }
            }
        }
        out
    }

    pub fn dense(&self) -> Matrix {
        let all: Vec<usize> = (1..=self.params.n).collect();
        self.submatrix(&all)
    }

    /// `H c` for a flat codeword of length `n * alpha`.
    pub fn apply(&self, flat: &[FieldElement]) -> Vec<FieldElement> {
        self.rows
            .iter()
            .map(|row| {
                row.iter().fold(FieldElement::ZERO, |acc, &(c, v)| {
                    self.field.add(acc, self.field.mul(v, flat[c]))
                })
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use itertools::Itertools;

    fn fe(v: u16) -> FieldElement {
        FieldElement(v)
    }

    fn pc(n: usize, k: usize, d: usize) -> ParityCheck {
        let p = CodeParams::derive(n, k, d).unwrap();
        ParityCheck::build(&p, &Field::gf8(), fe(1)).unwrap()
    }

    #[test]
    fn cauchy_two_by_one() {
        let p = CodeParams::derive(2, 1, 1).unwrap();
        let c = CauchyMatrix::build(&p, &Field::gf8()).unwrap();
        assert_eq!(c.a(), &[fe(0)]);
        assert_eq!(c.b(), &[fe(1), fe(2)]);
        assert_eq!(c.entry(1, 1), fe(0x01));
        assert_eq!(c.entry(1, 2), fe(0x8D));
    }

    #[test]
    fn cauchy_field_too_small() {
        // 2n - k = 257 > 256
        let p = CodeParams::derive(256, 255, 255).unwrap();
        assert!(matches!(
            CauchyMatrix::build(&p, &Field::gf8()),
            Err(Error::FieldTooSmall { order: 256, needed: 257 })
        ));
        assert!(CauchyMatrix::build(&p, &Field::gf16()).is_ok());
    }

    #[test]
    fn cauchy_entries_nonzero_and_points_distinct() {
        let p = CodeParams::derive(9, 4, 6).unwrap();
        let c = CauchyMatrix::build(&p, &Field::gf8()).unwrap();
        assert!(c.points_distinct());
        for r in 1..=c.rows() {
            for j in 1..=c.cols() {
                assert!(!c.entry(r, j).is_zero());
            }
        }
    }

    #[test]
    fn cauchy_square_submatrices_nonsingular() {
        let f = Field::gf8();
        let p = CodeParams::derive(7, 4, 5).unwrap();
        let c = CauchyMatrix::build(&p, &f).unwrap();
        for size in 1..=c.rows() {
            for rows in (1..=c.rows()).combinations(size) {
                for cols in (1..=c.cols()).combinations(size) {
                    assert_eq!(c.submatrix(&rows, &cols).rank(&f), size);
                }
            }
        }
    }

    #[test]
    fn type1_rows() {
        let h = pc(4, 2, 3);
        assert_eq!(h.type1_row(1, 0).len(), 4);
        let h = pc(5, 2, 3);
        for r in 1..=2 {
            for x in 0..8 {
                let row = h.type1_row(r, x);
                assert_eq!(row.len(), 5);
                for (j, &(col, v)) in row.iter().enumerate() {
                    assert_eq!(col, j * 8 + x);
                    assert_eq!(v, h.cauchy().entry(r, j + 1));
                }
            }
        }
    }

    #[test]
    fn type2_row_hand_expansion() {
        // (5,2,3): alpha = 8, q = 2, s = 1, m = 3. Nodes (1,0)=1 (1,1)=2 (2,0)=3 (2,1)=4 (3,0)=5.
        let h = pc(5, 2, 3);
        let cr = |j: usize| h.cauchy().entry(3, j);
        let rho = h.rho();

        // x = (0,0,0), delta = 1: couplings at (1,0)@(1,0,0), (2,0)@(0,1,0), (3,0)@(0,0,1)
        let expected: SparseRow = vec![
            (0, cr(1)),
            (4, rho),
            (8, cr(2)),
            (16, cr(3)),
            (18, rho),
            (24, cr(4)),
            (32, cr(5)),
            (33, rho),
        ];
        assert_eq!(h.type2_row(1, 0), expected);

        // x = (0,0,1): node (3,1) does not exist, so the group-3 term vanishes
        let expected: SparseRow = vec![
            (1, cr(1)),
            (5, rho),
            (9, cr(2)),
            (17, cr(3)),
            (19, rho),
            (25, cr(4)),
            (33, cr(5)),
        ];
        assert_eq!(h.type2_row(1, 1), expected);
    }

    #[test]
    fn type2_row_weights() {
        for (n, k, d) in [(5, 2, 3), (6, 3, 4), (7, 4, 5), (9, 4, 6)] {
            let h = pc(n, k, d);
            let p = *h.params();
            for delta in 1..p.q {
                for x in 0..p.alpha {
                    let row = h.type2_row(delta, x);
                    let missing = p.s > 0 && p.coord(x, p.m) >= p.s;
                    let expected = p.n + p.m - usize::from(missing);
                    assert_eq!(row.len(), expected);
                    // no coupling shares a column with a diagonal entry
                    assert!(row.windows(2).all(|w| w[0].0 < w[1].0));
                }
            }
        }
    }

    #[test]
    fn degenerate_has_no_type2_rows() {
        let h = pc(4, 2, 2);
        let p = h.params();
        assert_eq!(p.q, 1);
        assert_eq!(h.row_count(), (p.n - p.d) * p.alpha);
        assert_eq!(h.row_count(), 2);
    }

    #[test]
    fn shapes() {
        let h = pc(4, 2, 3);
        assert_eq!((h.row_count(), h.col_count()), (8, 16));
        let h = pc(5, 2, 3);
        assert_eq!((h.row_count(), h.col_count()), (24, 40));
        assert_eq!(h.row_count() - 2 * 8, 8);
    }

    #[test]
    fn zero_rho_rejected() {
        let p = CodeParams::derive(4, 2, 3).unwrap();
        assert!(matches!(
            ParityCheck::build(&p, &Field::gf8(), FieldElement::ZERO),
            Err(Error::ZeroRho)
        ));
    }

    #[test]
    fn base_equals_kronecker_product() {
        let f = Field::gf8();
        for (n, k, d) in [(4, 2, 3), (5, 2, 3), (6, 3, 4)] {
            let p = CodeParams::derive(n, k, d).unwrap();
            let c = CauchyMatrix::build(&p, &f).unwrap();
            let j = ParityCheck::base_only(&p, &f, c.clone()).unwrap().dense();
            let mut kron = Matrix::zeros((n - k) * p.alpha, n * p.alpha);
            for r in 1..=n - k {
                for col in 1..=n {
                    for x in 0..p.alpha {
                        kron.set((r - 1) * p.alpha + x, (col - 1) * p.alpha + x, c.entry(r, col));
                    }
                }
            }
            assert_eq!(j, kron);
            // H - J is exactly the coupling part: rho at m or m-1 positions per Type II row
            let h = ParityCheck::build(&p, &f, fe(3)).unwrap().dense();
            for r in 0..h.rows() {
                for col in 0..h.cols() {
                    let diff = f.add(h.get(r, col), j.get(r, col));
                    assert!(diff.is_zero() || diff == fe(3));
                    if r < (n - d) * p.alpha {
                        assert!(diff.is_zero());
                    }
                }
            }
        }
    }

    #[test]
    fn submatrix_examples() {
        let h = pc(4, 2, 3);
        let full = h.submatrix(&[1, 2, 3, 4]);
        assert_eq!(full, h.dense());
        assert_eq!(full.cols(), 16);
        let empty = h.submatrix(&[]);
        assert_eq!((empty.rows(), empty.cols()), (8, 0));
        let part = h.submatrix(&[4, 2]);
        assert_eq!(part.cols(), 8);
        for r in 0..8 {
            for x in 0..4 {
                assert_eq!(part.get(r, x), full.get(r, 4 + x));
                assert_eq!(part.get(r, 4 + x), full.get(r, 12 + x));
            }
        }
    }

    #[test]
    fn deterministic_build() {
        assert_eq!(pc(7, 4, 5), pc(7, 4, 5));
    }
}
