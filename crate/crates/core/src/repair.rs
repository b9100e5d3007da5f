//! Single-node repair from any `d` helpers.
//!
//! Let the failed node be `(g, theta0)`. Its repair tuples are the `beta`
//! tuples with coordinate `g` equal to `theta0`. Each helper sends its raw
//! symbols at those tuples, `d * beta` symbols in total.
//!
//! * Stage 1: for each repair tuple the Type I rows form an `(n-d) x (n-d)`
//!   Cauchy system in the symbols of the failed node and the `n-d-1` nodes
//!   that were not contacted. Solving it leaves every node's symbol known at
//!   every repair tuple.
//! * Stage 2: the Type II row `(delta, y)` for a repair tuple `y` touches the
//!   failed node at `shift(y, g, delta)` with coefficient `rho` and otherwise
//!   only symbols at repair tuples, so each such row yields one more symbol.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::codec::Codeword;
use crate::construct::ParityCheck;
use crate::error::{Error, Result};
use crate::gf::FieldElement;
use crate::linalg::Matrix;
use crate::params::{CodeParams, NodeId};

/// Supplies helper symbols by `(node, tuple)`.
pub trait SymbolSource {
    fn fetch(&mut self, node: usize, tuple: usize) -> Result<FieldElement>;
}

impl<F> SymbolSource for F
where
    F: FnMut(usize, usize) -> Result<FieldElement>,
{
    fn fetch(&mut self, node: usize, tuple: usize) -> Result<FieldElement> {
        self(node, tuple)
    }
}

/// Serves symbols out of an in-memory codeword and logs every read.
pub struct CodewordSource<'a> {
    codeword: &'a Codeword,
    pub reads: Vec<(usize, usize)>,
}

impl<'a> CodewordSource<'a> {
    pub fn new(codeword: &'a Codeword) -> Self {
        CodewordSource {
            codeword,
            reads: Vec::new(),
        }
    }
}

impl SymbolSource for CodewordSource<'_> {
    fn fetch(&mut self, node: usize, tuple: usize) -> Result<FieldElement> {
        self.reads.push((node, tuple));
        Ok(self.codeword.symbol(node, tuple))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BandwidthReport {
    pub failed: usize,
    pub helpers: Vec<usize>,
    pub symbols_downloaded: u64,
    pub bytes_downloaded: u64,
    pub naive_bytes: u64,
    pub ratio: f64,
}

impl BandwidthReport {
    /// Report for `stripes` repaired stripes of `symbol_bytes`-byte symbols.
    pub fn new(p: &CodeParams, failed: usize, helpers: &[usize], stripes: u64, symbol_bytes: u64) -> Self {
        let symbols = p.repair_bandwidth() as u64 * stripes;
        let naive = p.naive_bandwidth() as u64 * stripes;
        BandwidthReport {
            failed,
            helpers: helpers.to_vec(),
            symbols_downloaded: symbols,
            bytes_downloaded: symbols * symbol_bytes,
            naive_bytes: naive * symbol_bytes,
            ratio: p.naive_bandwidth() as f64 / p.repair_bandwidth() as f64,
        }
    }
}

/// Fetch list for repairing `failed` from `helpers`: for each helper in
/// ascending node order, the repair tuples in ascending tuple order.
pub fn repair_plan(failed: NodeId, helpers: &[NodeId], p: &CodeParams) -> Result<Vec<(usize, usize)>> {
    let failed = p.node_index(failed)?;
    let helpers = helpers
        .iter()
        .map(|&h| p.node_index(h))
        .collect::<Result<Vec<_>>>()?;
    let helpers = validate_helpers(p, failed, &helpers)?;
    let id = p.node_id(failed)?;
    let tuples = p.repair_tuples(id.group, id.theta);
    Ok(helpers
        .iter()
        .flat_map(|&h| tuples.iter().map(move |&x| (h, x)))
        .collect())
}

fn validate_helpers(p: &CodeParams, failed: usize, helpers: &[usize]) -> Result<Vec<usize>> {
    if failed == 0 || failed > p.n {
        return Err(Error::Repair(format!("failed node {failed} outside [1, {}]", p.n)));
    }
    let mut sorted = helpers.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != helpers.len() {
        return Err(Error::Repair("helper list contains duplicates".into()));
    }
    if sorted.len() != p.d {
        return Err(Error::Repair(format!(
            "need exactly d = {} helpers, got {}",
            p.d,
            sorted.len()
        )));
    }
    if let Some(&bad) = sorted.iter().find(|&&h| h == 0 || h > p.n) {
        return Err(Error::Repair(format!("helper {bad} outside [1, {}]", p.n)));
    }
    if sorted.contains(&failed) {
        return Err(Error::Repair(format!("failed node {failed} cannot be a helper")));
    }
    Ok(sorted)
}

/// Everything about a repair that does not depend on the data: the fetch
/// list and the inverted stage-1 system. Reusable across stripes.
#[derive(Clone, Debug)]
pub struct RepairPlan<'a> {
    pc: &'a ParityCheck,
    failed: usize,
    failed_id: NodeId,
    helpers: Vec<usize>,
    /// Failed node plus the nodes not contacted, ascending.
    unknowns: Vec<usize>,
    repair_tuples: Vec<usize>,
    fetches: Vec<(usize, usize)>,
    stage1_inverse: Matrix,
}

impl<'a> RepairPlan<'a> {
    pub fn new(pc: &'a ParityCheck, failed: usize, helpers: &[usize]) -> Result<Self> {
        let p = pc.params();
        let helpers = validate_helpers(p, failed, helpers)?;
        let failed_id = p.node_id(failed)?;
        let unknowns: Vec<usize> = (1..=p.n).filter(|j| !helpers.contains(j)).collect();
        let constraints: Vec<usize> = (1..=p.n - p.d).collect();
        let stage1_inverse = pc
            .cauchy()
            .submatrix(&constraints, &unknowns)
            .inverse(pc.field())
            .ok_or_else(|| {
                Error::Invariant(format!(
                    "Type I coefficients on nodes {unknowns:?} are singular"
                ))
            })?;
        let repair_tuples = p.repair_tuples(failed_id.group, failed_id.theta);
        let fetches = helpers
            .iter()
            .flat_map(|&h| repair_tuples.iter().map(move |&x| (h, x)))
            .collect();
        Ok(RepairPlan {
            pc,
            failed,
            failed_id,
            helpers,
            unknowns,
            repair_tuples,
            fetches,
            stage1_inverse,
        })
    }

    pub fn failed(&self) -> usize {
        self.failed
    }

    pub fn helpers(&self) -> &[usize] {
        &self.helpers
    }

    /// `(node, tuple)` requests in the order [`RepairSession::stage1`] expects.
    pub fn fetches(&self) -> &[(usize, usize)] {
        &self.fetches
    }

    pub fn repair_tuples(&self) -> &[usize] {
        &self.repair_tuples
    }

    pub fn start(&self) -> RepairSession<'_> {
        let p = self.pc.params();
        RepairSession {
            plan: self,
            known: vec![None; p.n * p.alpha],
            ledger: Vec::with_capacity(self.fetches.len()),
            stage2_tuples: Vec::new(),
        }
    }

    pub fn bandwidth(&self, stripes: u64) -> BandwidthReport {
        let bytes = self.pc.field().spec().symbol_bytes() as u64;
        BandwidthReport::new(self.pc.params(), self.failed, &self.helpers, stripes, bytes)
    }

    /// Pulls every planned symbol from `source` and rebuilds the failed block.
    pub fn repair(&self, source: &mut impl SymbolSource) -> Result<Vec<FieldElement>> {
        let fetched = self
            .fetches
            .iter()
            .map(|&(node, tuple)| source.fetch(node, tuple))
            .collect::<Result<Vec<_>>>()?;
        let mut session = self.start();
        session.stage1(&fetched)?;
        session.stage2()?;
        session.finish()
    }
}

/// Per-stripe repair state.
#[derive(Clone, Debug)]
pub struct RepairSession<'p> {
    plan: &'p RepairPlan<'p>,
    /// Indexed by flat column `(node - 1) * alpha + tuple`.
    known: Vec<Option<FieldElement>>,
    ledger: Vec<(usize, usize)>,
    stage2_tuples: Vec<usize>,
}

impl RepairSession<'_> {
    /// `(node, tuple)` pairs downloaded so far.
    pub fn ledger(&self) -> &[(usize, usize)] {
        &self.ledger
    }

    /// Any symbol recovered or downloaded so far.
    pub fn known(&self, node: usize, tuple: usize) -> Option<FieldElement> {
        self.known[self.plan.pc.params().column(node, tuple)]
    }

    /// Symbols of all `n` nodes at the repair tuples, available after stage 1.
    pub fn stage1_recovered(&self) -> BTreeMap<(usize, usize), FieldElement> {
        let p = self.plan.pc.params();
        (1..=p.n)
            .flat_map(|j| self.plan.repair_tuples.iter().map(move |&x| (j, x)))
            .filter_map(|(j, x)| self.known(j, x).map(|v| ((j, x), v)))
            .collect()
    }

    /// Tuples of the failed node filled in by stage 2, in recovery order.
    pub fn stage2_tuples(&self) -> &[usize] {
        &self.stage2_tuples
    }

    /// Consumes the downloaded symbols, ordered as [`RepairPlan::fetches`].
    pub fn stage1(&mut self, fetched: &[FieldElement]) -> Result<()> {
        let plan = self.plan;
        let pc = plan.pc;
        let p = pc.params();
        let field = pc.field();
        if fetched.len() != plan.fetches.len() {
            return Err(Error::Repair(format!(
                "expected {} downloaded symbols, got {}",
                plan.fetches.len(),
                fetched.len()
            )));
        }
        for (&(node, tuple), &v) in plan.fetches.iter().zip(fetched) {
            let col = p.column(node, tuple);
            if self.known[col].is_some() {
                return Err(Error::Invariant(format!("duplicate fetch of ({node}, {tuple})")));
            }
            self.known[col] = Some(v);
            self.ledger.push((node, tuple));
        }

        let constraints = p.n - p.d;
        let mut rhs = vec![FieldElement::ZERO; constraints];
        for &y in &plan.repair_tuples {
            for (r, slot) in rhs.iter_mut().enumerate() {
                *slot = plan.helpers.iter().fold(FieldElement::ZERO, |acc, &h| {
                    let c = pc.cauchy().entry(r + 1, h);
                    field.add(acc, field.mul(c, self.known[p.column(h, y)].expect("fetched")))
                });
            }
            let solved = plan.stage1_inverse.mul_vec(field, &rhs);
            for (&j, v) in plan.unknowns.iter().zip(solved) {
                self.known[p.column(j, y)] = Some(v);
            }
        }
        Ok(())
    }

    /// Recovers the remaining `(q-1) beta` symbols of the failed node.
    pub fn stage2(&mut self) -> Result<()> {
        let plan = self.plan;
        let pc = plan.pc;
        let p = pc.params();
        let field = pc.field();
        let g = plan.failed_id.group;
        for &y in &plan.repair_tuples {
            for delta in 1..p.q {
                let target_tuple = p.shift_index(y, g, delta);
                let target = p.column(plan.failed, target_tuple);
                let row = &pc.rows()[pc.type2_row_index(delta, y)];
                let mut coefficient = FieldElement::ZERO;
                let mut acc = FieldElement::ZERO;
                for &(col, v) in row {
                    if col == target {
                        coefficient = v;
                        continue;
                    }
                    let known = self.known[col].ok_or_else(|| {
                        Error::Invariant(format!(
                            "Type II row ({delta}, {y}) references unrecovered column {col}"
                        ))
                    })?;
                    acc = field.add(acc, field.mul(v, known));
                }
                if self.known[target].is_some() {
                    return Err(Error::Invariant(format!("tuple {target_tuple} recovered twice")));
                }
                let value = field
                    .div(acc, coefficient)
                    .map_err(|_| Error::Invariant(format!("zero coefficient for tuple {target_tuple}")))?;
                self.known[target] = Some(value);
                self.stage2_tuples.push(target_tuple);
            }
        }
        Ok(())
    }

    /// The repaired block, once both stages covered every tuple.
    pub fn finish(&self) -> Result<Vec<FieldElement>> {
        let p = self.plan.pc.params();
        (0..p.alpha)
            .map(|x| {
                self.known(self.plan.failed, x).ok_or_else(|| {
                    Error::Invariant(format!("tuple {x} of the failed node was not recovered"))
                })
            })
            .collect()
    }
}

/// Result of [`repair`].
#[derive(Clone, Debug)]
pub struct RepairOutcome {
    pub block: Vec<FieldElement>,
    pub report: BandwidthReport,
}

/// Repairs node `failed` from exactly `d` helpers.
pub fn repair(
    pc: &ParityCheck,
    failed: usize,
    helpers: &[usize],
    source: &mut impl SymbolSource,
) -> Result<RepairOutcome> {
    let plan = RepairPlan::new(pc, failed, helpers)?;
    let block = plan.repair(source)?;
    Ok(RepairOutcome {
        block,
        report: plan.bandwidth(1),
    })
}
