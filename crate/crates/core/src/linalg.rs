//! Dense matrices over a [`Field`] with exact Gaussian elimination.

use crate::error::{Error, Result};
use crate::gf::{Field, FieldElement};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<FieldElement>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![FieldElement::ZERO; rows * cols],
        }
    }

    pub fn identity(size: usize) -> Self {
        let mut m = Self::zeros(size, size);
        for i in 0..size {
            m.set(i, i, FieldElement::ONE);
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<FieldElement>>) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == cols), "ragged rows");
        Matrix {
            rows: rows.len(),
            cols,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> FieldElement {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: FieldElement) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[FieldElement] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [FieldElement] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn mul_vec(&self, field: &Field, v: &[FieldElement]) -> Vec<FieldElement> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows).map(|r| field.dot(self.row(r), v)).collect()
    }

    pub fn mul(&self, field: &Field, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows);
        let mut out = Matrix::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for i in 0..self.cols {
                let c = self.get(r, i);
                if !c.is_zero() {
                    let (dst, src) = (r * other.cols, i * other.cols);
                    field.mul_add_slice(
                        &mut out.data[dst..dst + other.cols],
                        c,
                        &other.data[src..src + other.cols],
                    );
                }
            }
        }
        out
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for c in 0..self.cols {
                self.data.swap(a * self.cols + c, b * self.cols + c);
            }
        }
    }

    /// Reduced row echelon form in place; returns pivot columns in order.
    /// Pivot rows are normalised to a leading one.
    fn reduce(&mut self, field: &Field, pivot_limit: usize) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..pivot_limit {
            if row == self.rows {
                break;
            }
            let Some(p) = (row..self.rows).find(|&r| !self.get(r, col).is_zero()) else {
                continue;
            };
            self.swap_rows(row, p);
            let inv = field.inv(self.get(row, col)).expect("pivot is nonzero");
            for v in self.row_mut(row) {
                *v = field.mul(*v, inv);
            }
            let pivot_row = self.row(row).to_vec();
            for r in 0..self.rows {
                if r != row {
                    let factor = self.get(r, col);
                    if !factor.is_zero() {
                        field.mul_add_slice(self.row_mut(r), factor, &pivot_row);
                    }
                }
            }
            pivots.push(col);
            row += 1;
        }
        pivots
    }

    /// Row rank, by forward elimination with first-nonzero pivoting.
    pub fn rank(&self, field: &Field) -> usize {
        let mut m = self.clone();
        let mut rank = 0;
        for col in 0..m.cols {
            if rank == m.rows {
                break;
            }
            let Some(p) = (rank..m.rows).find(|&r| !m.get(r, col).is_zero()) else {
                continue;
            };
            m.swap_rows(rank, p);
            let inv = field.inv(m.get(rank, col)).expect("pivot is nonzero");
            let pivot_row: Vec<FieldElement> = m.row(rank)[col..].to_vec();
            for r in rank + 1..m.rows {
                let factor = m.get(r, col);
                if !factor.is_zero() {
                    let f = field.mul(factor, inv);
                    field.mul_add_slice(&mut m.row_mut(r)[col..], f, &pivot_row);
                }
            }
            rank += 1;
        }
        rank
    }

    /// Inverse of a square matrix, or `None` when singular.
    pub fn inverse(&self, field: &Field) -> Option<Matrix> {
        assert_eq!(self.rows, self.cols, "inverse of a non-square matrix");
        let solver = LeftSolver::new(self, field)?;
        Some(solver.left_inverse)
    }
}

/// Solves overdetermined systems `A y = b` for a full-column-rank `A`.
///
/// Built once per coefficient matrix: `left_inverse * A = I`, and every row
/// of `checks` annihilates the column space of `A`, so `b` is consistent iff
/// `checks * b = 0`.
#[derive(Clone, Debug)]
pub struct LeftSolver {
    left_inverse: Matrix,
    checks: Matrix,
}

impl LeftSolver {
    /// Returns `None` when `a` does not have full column rank.
    pub fn new(a: &Matrix, field: &Field) -> Option<Self> {
        let (rows, cols) = (a.rows, a.cols);
        if cols > rows {
            return None;
        }
        let mut aug = Matrix::zeros(rows, cols + rows);
        for r in 0..rows {
            aug.row_mut(r)[..cols].copy_from_slice(a.row(r));
            aug.set(r, cols + r, FieldElement::ONE);
        }
        let pivots = aug.reduce(field, cols);
        if pivots.len() < cols {
            return None;
        }
        let mut left_inverse = Matrix::zeros(cols, rows);
        for r in 0..cols {
            left_inverse.row_mut(r).copy_from_slice(&aug.row(r)[cols..]);
        }
        let mut checks = Matrix::zeros(rows - cols, rows);
        for r in cols..rows {
            checks.row_mut(r - cols).copy_from_slice(&aug.row(r)[cols..]);
        }
        Some(LeftSolver {
            left_inverse,
            checks,
        })
    }

    pub fn left_inverse(&self) -> &Matrix {
        &self.left_inverse
    }

    pub fn is_consistent(&self, field: &Field, b: &[FieldElement]) -> bool {
        (0..self.checks.rows).all(|r| field.dot(self.checks.row(r), b).is_zero())
    }

    /// Unique solution, or [`Error::Corruption`] when `b` lies outside the column space.
    pub fn solve(&self, field: &Field, b: &[FieldElement]) -> Result<Vec<FieldElement>> {
        if b.len() != self.left_inverse.cols {
            return Err(Error::Invariant(format!(
                "right-hand side has {} entries, expected {}",
                b.len(),
                self.left_inverse.cols
            )));
        }
        if !self.is_consistent(field, b) {
            return Err(Error::Corruption);
        }
        Ok(self.left_inverse.mul_vec(field, b))
    }
}
