//! Systematic encoding and any-k reconstruction.
//!
//! The code is defined only through `H`; encoding fixes nodes `1..=k` as the
//! information set and solves the parity equations for nodes `k+1..=n`.

use std::collections::BTreeMap;

use crate::construct::ParityCheck;
use crate::error::{Error, Result};
use crate::gf::FieldElement;
use crate::linalg::{LeftSolver, Matrix};
use crate::params::CodeParams;

/// `n` node blocks of `alpha` symbols; `block(j)` is 1-based.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Codeword {
    alpha: usize,
    blocks: Vec<Vec<FieldElement>>,
}

impl Codeword {
    pub fn new(p: &CodeParams, blocks: Vec<Vec<FieldElement>>) -> Result<Self> {
        if blocks.len() != p.n || blocks.iter().any(|b| b.len() != p.alpha) {
            return Err(Error::Input(format!(
                "codeword needs {} blocks of {} symbols",
                p.n, p.alpha
            )));
        }
        Ok(Codeword {
            alpha: p.alpha,
            blocks,
        })
    }

    pub fn zero(p: &CodeParams) -> Self {
        Codeword {
            alpha: p.alpha,
            blocks: vec![vec![FieldElement::ZERO; p.alpha]; p.n],
        }
    }

    pub fn node_count(&self) -> usize {
        self.blocks.len()
    }

    pub fn block(&self, node: usize) -> &[FieldElement] {
        &self.blocks[node - 1]
    }

    pub fn block_mut(&mut self, node: usize) -> &mut [FieldElement] {
        &mut self.blocks[node - 1]
    }

    pub fn blocks(&self) -> &[Vec<FieldElement>] {
        &self.blocks
    }

    pub fn into_blocks(self) -> Vec<Vec<FieldElement>> {
        self.blocks
    }

    /// Symbol `c(x; j)` for 1-based node `j` and tuple index `x`.
    pub fn symbol(&self, node: usize, tuple: usize) -> FieldElement {
        self.blocks[node - 1][tuple]
    }

    pub fn flat(&self) -> Vec<FieldElement> {
        self.blocks.iter().flatten().copied().collect()
    }

    /// The message carried by the systematic nodes `1..=k`.
    pub fn message(&self, k: usize) -> Vec<FieldElement> {
        self.blocks[..k].iter().flatten().copied().collect()
    }

    pub fn alpha(&self) -> usize {
        self.alpha
    }
}

/// `H c`; all zero iff `c` is a codeword.
pub fn parity_residual(c: &Codeword, pc: &ParityCheck) -> Vec<FieldElement> {
    pc.apply(&c.flat())
}

/// Encoder and decoder bound to one parity-check matrix.
#[derive(Clone, Debug)]
pub struct Codec {
    pc: ParityCheck,
    /// `H(:,P)^-1 H(:,K)`, mapping the message to the parity blocks.
    parity_map: Matrix,
}

impl Codec {
    pub fn new(pc: ParityCheck) -> Result<Self> {
        let p = *pc.params();
        let field = pc.field().clone();
        let systematic: Vec<usize> = (1..=p.k).collect();
        let parity: Vec<usize> = (p.k + 1..=p.n).collect();
        let inv = pc.submatrix(&parity).inverse(&field).ok_or_else(|| {
            Error::Invariant("H restricted to the parity nodes is singular; the code is not MDS".into())
        })?;
        let parity_map = inv.mul(&field, &pc.submatrix(&systematic));
        Ok(Codec { pc, parity_map })
    }

    pub fn parity_check(&self) -> &ParityCheck {
        &self.pc
    }

    pub fn params(&self) -> &CodeParams {
        self.pc.params()
    }

    /// Message length in symbols, `k * alpha`.
    pub fn message_len(&self) -> usize {
        let p = self.params();
        p.k * p.alpha
    }

    pub fn encode(&self, message: &[FieldElement]) -> Result<Codeword> {
        let p = *self.params();
        if message.len() != self.message_len() {
            return Err(Error::Input(format!(
                "message has {} symbols, expected {}",
                message.len(),
                self.message_len()
            )));
        }
        let parity = self.parity_map.mul_vec(self.pc.field(), message);
        let blocks = message
            .chunks(p.alpha)
            .chain(parity.chunks(p.alpha))
            .map(<[FieldElement]>::to_vec)
            .collect();
        Codeword::new(&p, blocks)
    }

    /// Precomputes the solve for one availability pattern.
    pub fn erasure_decoder(&self, available: &[usize]) -> Result<ErasureDecoder> {
        let p = *self.params();
        let mut available = available.to_vec();
        available.sort_unstable();
        available.dedup();
        if let Some(&bad) = available.iter().find(|&&j| j == 0 || j > p.n) {
            return Err(Error::Input(format!("node {bad} outside [1, {}]", p.n)));
        }
        if available.len() < p.k {
            return Err(Error::InsufficientData {
                needed: p.k,
                available: available.len(),
            });
        }
        let missing: Vec<usize> = (1..=p.n).filter(|j| !available.contains(j)).collect();
        let solver = LeftSolver::new(&self.pc.submatrix(&missing), self.pc.field())
            .ok_or_else(|| Error::Invariant(format!("H restricted to nodes {missing:?} is rank deficient")))?;
        Ok(ErasureDecoder {
            params: p,
            known: self.pc.submatrix(&available),
            available,
            missing,
            solver,
        })
    }

    /// Rebuilds the full codeword from at least `k` node blocks.
    pub fn reconstruct(&self, available: &BTreeMap<usize, Vec<FieldElement>>) -> Result<Codeword> {
        let nodes: Vec<usize> = available.keys().copied().collect();
        let decoder = self.erasure_decoder(&nodes)?;
        let blocks: Vec<&[FieldElement]> = available.values().map(Vec::as_slice).collect();
        decoder.decode(self, &blocks)
    }
}

/// Solver for a fixed set of available nodes.
#[derive(Clone, Debug)]
pub struct ErasureDecoder {
    params: CodeParams,
    available: Vec<usize>,
    missing: Vec<usize>,
    known: Matrix,
    solver: LeftSolver,
}

impl ErasureDecoder {
    pub fn available(&self) -> &[usize] {
        &self.available
    }

    pub fn missing(&self) -> &[usize] {
        &self.missing
    }

    /// `blocks[i]` is the content of `available()[i]`.
    pub fn decode(&self, codec: &Codec, blocks: &[&[FieldElement]]) -> Result<Codeword> {
        let p = &self.params;
        if blocks.len() != self.available.len() || blocks.iter().any(|b| b.len() != p.alpha) {
            return Err(Error::Input(format!(
                "expected {} blocks of {} symbols",
                self.available.len(),
                p.alpha
            )));
        }
        let field = codec.pc.field();
        let known: Vec<FieldElement> = blocks.iter().flat_map(|b| b.iter().copied()).collect();
        // H_M y + H_A c_A = 0, and subtraction is addition
        let rhs = self.known.mul_vec(field, &known);
        let solved = self.solver.solve(field, &rhs)?;

        let mut out = Codeword::zero(p);
        for (&j, block) in self.available.iter().zip(blocks) {
            out.block_mut(j).copy_from_slice(block);
        }
        for (&j, chunk) in self.missing.iter().zip(solved.chunks(p.alpha)) {
            out.block_mut(j).copy_from_slice(chunk);
        }
        Ok(out)
    }
}
