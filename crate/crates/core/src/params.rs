//! Code parameters and the index algebra between node/symbol tuples and
//! flat matrix coordinates.
//!
//! Nodes are numbered `1..=n`. Node `(group, theta)` has index
//! `(group - 1) * q + theta + 1`. Groups `1..t` hold `q` nodes each; when
//! `s > 0` a final group `t` holds `s` nodes.
//!
//! Every node stores `alpha = q^m` symbols addressed by tuples in
//! `[0, q-1]^m`. Tuples flatten big-endian: coordinate 1 is the most
//! significant digit. When `s == 0` the last group is empty and the tuples
//! simply have `m = t - 1` coordinates.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest sub-packetization we agree to build.
pub const MAX_ALPHA: usize = 1 << 20;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CodeParams {
    pub n: usize,
    pub k: usize,
    pub d: usize,
    pub q: usize,
    pub t: usize,
    pub s: usize,
    pub m: usize,
    pub alpha: usize,
    pub beta: usize,
}

/// A node addressed by its group (1-based) and position within the group.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct NodeId {
    pub group: usize,
    pub theta: usize,
}

impl NodeId {
    pub fn new(group: usize, theta: usize) -> Self {
        NodeId { group, theta }
    }
}

/// A symbol address within a node block.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SymbolTuple(pub Vec<usize>);

impl SymbolTuple {
    pub fn coords(&self) -> &[usize] {
        &self.0
    }
}

impl From<Vec<usize>> for SymbolTuple {
    fn from(v: Vec<usize>) -> Self {
        SymbolTuple(v)
    }
}

impl CodeParams {
    /// Derives `(q, t, s, m, alpha, beta)` from `(n, k, d)`.
    pub fn derive(n: usize, k: usize, d: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::Params("k must be at least 1".into()));
        }
        if d < k {
            return Err(Error::Params(format!("d = {d} is smaller than k = {k}")));
        }
        if d >= n {
            return Err(Error::Params(format!("d = {d} must be at most n - 1 = {}", n.saturating_sub(1))));
        }
        if n > u16::MAX as usize {
            return Err(Error::Params(format!("n = {n} does not fit the shard format")));
        }
        let q = d - k + 1;
        // n = (t - 1) q + s with 0 <= s <= q - 1
        let t = n / q + 1;
        let s = n % q;
        if t < 2 {
            return Err(Error::Params(format!("n = {n} < q = {q} leaves no valid t > 1")));
        }
        let m = if s > 0 { t } else { t - 1 };
        let alpha = checked_pow(q, m).filter(|&a| a <= MAX_ALPHA).ok_or_else(|| {
            Error::Params(format!("sub-packetization {q}^{m} exceeds the supported maximum {MAX_ALPHA}"))
        })?;
        let beta = alpha / q;
        Ok(CodeParams {
            n,
            k,
            d,
            q,
            t,
            s,
            m,
            alpha,
            beta,
        })
    }

    /// `d == k`: a scalar MDS code with `alpha = beta = 1` and no Type II rows.
    pub fn is_degenerate(&self) -> bool {
        self.q == 1
    }

    /// Number of nodes in `group`.
    pub fn group_size(&self, group: usize) -> usize {
        if group == 0 || group > self.m {
            0
        } else if group < self.t {
            self.q
        } else {
            self.s
        }
    }

    pub fn node_exists(&self, id: NodeId) -> bool {
        id.theta < self.group_size(id.group)
    }

    /// 1-based position of a node in the system.
    pub fn node_index(&self, id: NodeId) -> Result<usize> {
        if !self.node_exists(id) {
            return Err(Error::Params(format!(
                "node ({}, {}) is not part of an (n={}, q={}) system",
                id.group, id.theta, self.n, self.q
            )));
        }
        Ok((id.group - 1) * self.q + id.theta + 1)
    }

    /// Inverse of [`CodeParams::node_index`].
    pub fn node_id(&self, index: usize) -> Result<NodeId> {
        if index == 0 || index > self.n {
            return Err(Error::Params(format!("node index {index} outside [1, {}]", self.n)));
        }
        Ok(NodeId {
            group: (index - 1) / self.q + 1,
            theta: (index - 1) % self.q,
        })
    }

    /// Place value of coordinate `g` (1-based).
    #[inline]
    fn place(&self, g: usize) -> usize {
        self.q.pow((self.m - g) as u32)
    }

    pub fn tuple_index(&self, x: &SymbolTuple) -> Result<usize> {
        if x.0.len() != self.m || x.0.iter().any(|&c| c >= self.q) {
            return Err(Error::Params(format!(
                "tuple {:?} is not in [0, {}]^{}",
                x.0,
                self.q - 1,
                self.m
            )));
        }
        Ok(x.0.iter().fold(0, |acc, &c| acc * self.q + c))
    }

    pub fn tuple_at(&self, index: usize) -> SymbolTuple {
        SymbolTuple((1..=self.m).map(|g| self.coord(index, g)).collect())
    }

    /// Coordinate `g` (1-based) of the tuple with flat index `index`.
    #[inline]
    pub fn coord(&self, index: usize, g: usize) -> usize {
        (index / self.place(g)) % self.q
    }

    /// Flat index of the tuple with coordinate `g` replaced by `(x_g - delta) mod q`.
    #[inline]
    pub fn shift_index(&self, index: usize, g: usize, delta: usize) -> usize {
        let place = self.place(g);
        let c = (index / place) % self.q;
        let shifted = (c + self.q - delta % self.q) % self.q;
        index - c * place + shifted * place
    }

    pub fn shift_tuple(&self, x: &SymbolTuple, g: usize, delta: usize) -> SymbolTuple {
        let mut out = x.clone();
        out.0[g - 1] = (x.0[g - 1] + self.q - delta % self.q) % self.q;
        out
    }

    /// Flat indices of the `beta` tuples whose coordinate `group` equals `theta`,
    /// ascending.
    pub fn repair_tuples(&self, group: usize, theta: usize) -> Vec<usize> {
        (0..self.alpha)
            .filter(|&x| self.coord(x, group) == theta)
            .collect()
    }

    /// Column of symbol `(node, tuple)` in the flat `n * alpha` layout.
    #[inline]
    pub fn column(&self, node: usize, tuple: usize) -> usize {
        (node - 1) * self.alpha + tuple
    }

    /// Total symbols downloaded by one repair, `d * beta`.
    pub fn repair_bandwidth(&self) -> usize {
        self.d * self.beta
    }

    /// Symbols a conventional decoder pulls to rebuild one node, `k * alpha`.
    pub fn naive_bandwidth(&self) -> usize {
        self.k * self.alpha
    }

    /// Minimum field size for the Cauchy base matrix.
    pub fn min_field_order(&self) -> usize {
        2 * self.n - self.k
    }
}

fn checked_pow(base: usize, exp: usize) -> Option<usize> {
    let mut acc = 1usize;
    for _ in 0..exp {
        acc = acc.checked_mul(base)?;
    }
    Some(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn shape(p: &CodeParams) -> (usize, usize, usize, usize, usize, usize) {
        (p.q, p.t, p.s, p.m, p.alpha, p.beta)
    }

    #[test]
    fn derive_examples() {
        assert_eq!(shape(&CodeParams::derive(4, 2, 3).unwrap()), (2, 3, 0, 2, 4, 2));
        assert_eq!(shape(&CodeParams::derive(5, 2, 3).unwrap()), (2, 3, 1, 3, 8, 4));
        assert_eq!(shape(&CodeParams::derive(9, 4, 6).unwrap()), (3, 4, 0, 3, 27, 9));
        assert!(matches!(CodeParams::derive(5, 3, 2), Err(Error::Params(_))));
    }

    #[test]
    fn derive_rejects_bad_ranges() {
        assert!(CodeParams::derive(4, 2, 4).is_err());
        assert!(CodeParams::derive(4, 0, 2).is_err());
        assert!(CodeParams::derive(200, 100, 101).is_err(), "alpha = 2^100");
    }

    #[test]
    fn degenerate_d_equals_k() {
        let p = CodeParams::derive(4, 2, 2).unwrap();
        assert!(p.is_degenerate());
        assert_eq!((p.q, p.s, p.alpha, p.beta), (1, 0, 1, 1));
        assert_eq!(p.repair_tuples(1, 0), vec![0]);
    }

    #[test]
    fn node_index_examples() {
        let p = CodeParams::derive(5, 2, 3).unwrap();
        assert_eq!(p.node_index(NodeId::new(1, 0)).unwrap(), 1);
        assert_eq!(p.node_index(NodeId::new(2, 1)).unwrap(), 4);
        assert_eq!(p.node_index(NodeId::new(p.t, p.s - 1)).unwrap(), p.n);
        assert!(p.node_index(NodeId::new(3, 1)).is_err());
        assert!(p.node_index(NodeId::new(4, 0)).is_err());
        assert!(p.node_index(NodeId::new(0, 0)).is_err());

        let p = CodeParams::derive(4, 2, 3).unwrap();
        assert!(p.node_index(NodeId::new(3, 0)).is_err(), "empty last group when s = 0");
    }

    #[test]
    fn tuple_index_examples() {
        let p = CodeParams::derive(4, 2, 3).unwrap();
        assert_eq!(p.tuple_index(&vec![0, 0].into()).unwrap(), 0);
        assert_eq!(p.tuple_index(&vec![1, 1].into()).unwrap(), p.alpha - 1);
        assert_eq!(p.tuple_index(&vec![1, 0].into()).unwrap(), 2);
        assert!(p.tuple_index(&vec![2, 0].into()).is_err());
        assert!(p.tuple_index(&vec![0].into()).is_err());
    }

    #[test]
    fn shift_examples() {
        let p = CodeParams::derive(4, 2, 3).unwrap();
        assert_eq!(p.shift_tuple(&vec![0, 0].into(), 1, 1), vec![1, 0].into());
        let p = CodeParams::derive(9, 4, 6).unwrap();
        assert_eq!(p.shift_tuple(&vec![2, 1, 0].into(), 3, 2), vec![2, 1, 1].into());
        let x = p.tuple_index(&vec![2, 1, 0].into()).unwrap();
        let y = p.tuple_index(&vec![2, 1, 1].into()).unwrap();
        assert_eq!(p.shift_index(x, 3, 2), y);
    }

    const SMALL: &[(usize, usize, usize)] = &[
        (4, 2, 3),
        (5, 2, 3),
        (5, 3, 4),
        (6, 3, 4),
        (6, 4, 5),
        (7, 4, 5),
        (9, 4, 6),
        (4, 2, 2),
    ];

    #[test]
    fn indices_are_bijections() {
        for &(n, k, d) in SMALL {
            let p = CodeParams::derive(n, k, d).unwrap();
            for j in 1..=n {
                let id = p.node_id(j).unwrap();
                assert_eq!(p.node_index(id).unwrap(), j);
            }
            for x in 0..p.alpha {
                let tuple = p.tuple_at(x);
                assert_eq!(p.tuple_index(&tuple).unwrap(), x);
            }
        }
    }

    #[test]
    fn repair_tuples_have_beta_members() {
        for &(n, k, d) in SMALL {
            let p = CodeParams::derive(n, k, d).unwrap();
            for j in 1..=n {
                let id = p.node_id(j).unwrap();
                let tuples = p.repair_tuples(id.group, id.theta);
                assert_eq!(tuples.len(), p.beta);
                assert!(tuples.iter().all(|&x| p.coord(x, id.group) == id.theta));
            }
        }
    }

    proptest! {
        #[test]
        fn derive_recomposes(k in 1usize..20, extra in 0usize..20, spare in 1usize..20) {
            let (d, n) = (k + extra, k + extra + spare);
            if let Ok(p) = CodeParams::derive(n, k, d) {
                prop_assert_eq!((p.t - 1) * p.q + p.s, n);
                prop_assert!(p.t >= 2);
                prop_assert!(p.s < p.q);
                prop_assert_eq!(p.beta * p.q, p.alpha);
                prop_assert_eq!(p.alpha, p.q.pow(p.m as u32));
                prop_assert_eq!(p.m, if p.s > 0 { p.t } else { p.t - 1 });
            }
        }

        #[test]
        fn shift_is_invertible(index in 0usize..27, g in 1usize..=3, delta in 1usize..3) {
            let p = CodeParams::derive(9, 4, 6).unwrap();
            let shifted = p.shift_index(index, g, delta);
            prop_assert_ne!(shifted, index);
            prop_assert_eq!(p.shift_index(shifted, g, p.q - delta), index);
            let tuple = p.tuple_at(index);
            prop_assert_eq!(p.tuple_index(&p.shift_tuple(&tuple, g, delta)).unwrap(), shifted);
        }
    }
}
