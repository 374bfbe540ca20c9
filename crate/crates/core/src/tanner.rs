//! The Tanner code `T(G, C0)` and the incremental decoding state.

use std::sync::OnceLock;

use rand::seq::index;
use rand::Rng;

use crate::error::{usage, Error, Result};
use crate::gf2::{for_each_combination, BitMatrix, BitVec};
use crate::graph::BipartiteGraph;
use crate::index_list::IndexList;
use crate::inner_code::InnerCode;

/// Largest generator dimension accepted by the brute-force oracles.
pub const BRUTE_FORCE_MAX_DIM: usize = 24;

#[derive(Debug)]
pub struct TannerCode {
    graph: BipartiteGraph,
    inner: InnerCode,
    basis: OnceLock<Vec<BitVec>>,
}

impl Clone for TannerCode {
    fn clone(&self) -> Self {
        let basis = OnceLock::new();
        if let Some(b) = self.basis.get() {
            let _ = basis.set(b.clone());
        }
        Self {
            graph: self.graph.clone(),
            inner: self.inner.clone(),
            basis,
        }
    }
}

impl TannerCode {
    pub fn new(graph: BipartiteGraph, inner: InnerCode) -> Result<Self> {
        match graph.right_regular_degree() {
            Some(d) if d == inner.length() => {}
            Some(d) => {
                return usage(format!(
                    "graph right degree {d} does not match inner code length {}",
                    inner.length()
                ))
            }
            None => return usage("Tanner codes need a right-regular graph"),
        }
        Ok(Self {
            graph,
            inner,
            basis: OnceLock::new(),
        })
    }

    pub fn graph(&self) -> &BipartiteGraph {
        &self.graph
    }

    pub fn inner(&self) -> &InnerCode {
        &self.inner
    }

    pub fn n(&self) -> usize {
        self.graph.n_left()
    }

    pub fn n_checks(&self) -> usize {
        self.graph.n_right()
    }

    pub fn c(&self) -> usize {
        self.graph.left_degree()
    }

    pub fn d(&self) -> usize {
        self.inner.length()
    }

    /// Minimum distance of the inner code.
    pub fn d0(&self) -> Result<usize> {
        self.inner
            .min_distance()
            .ok_or_else(|| Error::Usage("inner code is trivial; d0 is undefined".into()))
    }

    fn check_len(&self, x: &BitVec) -> Result<()> {
        if x.len() != self.n() {
            return usage(format!("word of length {} for a code of length {}", x.len(), self.n()));
        }
        Ok(())
    }

    /// Local view at `v` as a mask: bit `j` is `x` at the `j`-th neighbor.
    #[inline]
    pub fn local_view(&self, x: &BitVec, v: usize) -> u32 {
        self.graph
            .right_neighbors(v)
            .iter()
            .enumerate()
            .fold(0u32, |acc, (j, &u)| acc | (x.get(u as usize) as u32) << j)
    }

    pub fn is_codeword(&self, x: &BitVec) -> Result<bool> {
        self.check_len(x)?;
        Ok((0..self.n_checks()).all(|v| self.inner.contains_mask(self.local_view(x, v))))
    }

    /// `U(x)`, ascending.
    pub fn unsatisfied(&self, x: &BitVec) -> Result<Vec<usize>> {
        self.check_len(x)?;
        Ok((0..self.n_checks())
            .filter(|&v| !self.inner.contains_mask(self.local_view(x, v)))
            .collect())
    }

    /// Every parity row of `C0` lifted onto every check neighborhood.
    pub fn stacked_parity_checks(&self) -> BitMatrix {
        let n = self.n();
        let h = self.inner.parity_check();
        let mut rows = Vec::with_capacity(self.n_checks() * h.n_rows());
        for v in 0..self.n_checks() {
            let nbrs = self.graph.right_neighbors(v);
            for hr in h.rows() {
                let mut row = BitVec::zeros(n);
                for j in hr.ones_iter() {
                    row.set(nbrs[j] as usize, true);
                }
                rows.push(row);
            }
        }
        BitMatrix::from_rows(rows, n).expect("rows have length n")
    }

    /// A basis of the code, computed on first use.
    pub fn generator_basis(&self) -> &[BitVec] {
        self.basis
            .get_or_init(|| self.stacked_parity_checks().nullspace_basis())
    }

    pub fn generator_dim(&self) -> usize {
        self.generator_basis().len()
    }

    /// Uniformly random codeword.
    pub fn sample_codeword<R: Rng + ?Sized>(&self, rng: &mut R) -> BitVec {
        let mut x = BitVec::zeros(self.n());
        for b in self.generator_basis() {
            if rng.gen::<bool>() {
                x.xor_assign_unchecked(b);
            }
        }
        x
    }

    /// `sum_j message_j * basis_j`.
    pub fn encode(&self, message: &BitVec) -> Result<BitVec> {
        let basis = self.generator_basis();
        if message.len() != basis.len() {
            return usage(format!(
                "message of length {} for a code of dimension {}",
                message.len(),
                basis.len()
            ));
        }
        let mut x = BitVec::zeros(self.n());
        for j in message.ones_iter() {
            x.xor_assign_unchecked(&basis[j]);
        }
        Ok(x)
    }

    fn brute_basis(&self) -> Result<&[BitVec]> {
        let basis = self.generator_basis();
        if basis.len() > BRUTE_FORCE_MAX_DIM {
            return Err(Error::Capacity(format!(
                "dimension {} exceeds the brute-force bound {BRUTE_FORCE_MAX_DIM}",
                basis.len()
            )));
        }
        Ok(basis)
    }

    /// Closest codeword to `x`, lexicographically smallest on ties.
    pub fn brute_nearest(&self, x: &BitVec) -> Result<BitVec> {
        self.check_len(x)?;
        let basis = self.brute_basis()?;
        let mut best = BitVec::zeros(self.n());
        let mut best_dist = x.weight();
        for_each_combination(self.n(), basis, |c| {
            let mut diff = c.clone();
            diff.xor_assign_unchecked(x);
            let dist = diff.weight();
            if dist < best_dist || (dist == best_dist && c < &best) {
                best = c.clone();
                best_dist = dist;
            }
        });
        Ok(best)
    }

    /// Minimum nonzero codeword weight; `None` when the code is `{0}`.
    pub fn brute_min_distance(&self) -> Result<Option<usize>> {
        let basis = self.brute_basis()?;
        let mut best: Option<usize> = None;
        for_each_combination(self.n(), basis, |c| {
            let w = c.weight();
            if w > 0 && best.is_none_or(|b| w < b) {
                best = Some(w);
            }
        });
        Ok(best)
    }
}

/// Which positions `corrupt` flips.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Corruption {
    /// A uniformly random set of this many positions.
    Weight(usize),
    Explicit(Vec<usize>),
}

/// Flips the selected positions of `y`; returns the word and the flipped
/// positions (ascending).
pub fn corrupt<R: Rng + ?Sized>(
    y: &BitVec,
    pattern: &Corruption,
    rng: &mut R,
) -> Result<(BitVec, Vec<usize>)> {
    let n = y.len();
    let mut positions = match pattern {
        Corruption::Weight(w) => {
            if *w > n {
                return usage(format!("error weight {w} exceeds length {n}"));
            }
            index::sample(rng, n, *w).into_vec()
        }
        Corruption::Explicit(set) => {
            let mut seen = vec![false; n];
            for &i in set {
                if i >= n {
                    return usage(format!("error position {i} out of range 0..{n}"));
                }
                if std::mem::replace(&mut seen[i], true) {
                    return usage(format!("error position {i} repeated"));
                }
            }
            set.clone()
        }
    };
    positions.sort_unstable();
    let mut x = y.clone();
    for &i in &positions {
        x.flip(i);
    }
    Ok((x, positions))
}

/// Mutable word with `U(x)`, the vote table and its support kept in sync
/// under single-bit flips. Votes are integers in units of `1/(c*d0)`.
#[derive(Clone, Debug)]
pub struct DecodeState<'a> {
    code: &'a TannerCode,
    d0: u32,
    x: BitVec,
    views: Vec<u32>,
    unsat: IndexList,
    votes: Vec<u32>,
    voted: IndexList,
    journal: Option<Vec<u32>>,
}

impl<'a> DecodeState<'a> {
    /// Computes every local view and `U(x)`; votes start at zero.
    pub fn new(code: &'a TannerCode, x: BitVec) -> Result<Self> {
        code.check_len(&x)?;
        let d0 = code.d0()? as u32;
        let r = code.n_checks();
        let mut unsat = IndexList::new(r);
        let views: Vec<u32> = (0..r).map(|v| code.local_view(&x, v)).collect();
        for (v, &m) in views.iter().enumerate() {
            if !code.inner.contains_mask(m) {
                unsat.insert(v);
            }
        }
        Ok(Self {
            code,
            d0,
            votes: vec![0; x.len()],
            voted: IndexList::new(x.len()),
            x,
            views,
            unsat,
            journal: None,
        })
    }

    pub fn code(&self) -> &'a TannerCode {
        self.code
    }

    pub fn x(&self) -> &BitVec {
        &self.x
    }

    pub fn into_x(self) -> BitVec {
        self.x
    }

    pub fn views(&self) -> &[u32] {
        &self.views
    }

    pub fn unsat_count(&self) -> usize {
        self.unsat.len()
    }

    pub fn unsat(&self) -> &IndexList {
        &self.unsat
    }

    pub fn votes(&self) -> &[u32] {
        &self.votes
    }

    /// `P`: the left vertices with a nonzero vote.
    pub fn voted(&self) -> &IndexList {
        &self.voted
    }

    /// `c * d0`: a vote of this size is probability one.
    pub fn vote_scale(&self) -> u32 {
        self.code.c() as u32 * self.d0
    }

    /// Toggles `x_i` and re-evaluates the `c` checks around `i`.
    #[inline]
    pub fn flip_bit(&mut self, i: usize) {
        self.x.flip(i);
        let g = &self.code.graph;
        for (&v, &j) in g.left_neighbors(i).iter().zip(g.left_slots(i)) {
            let v = v as usize;
            self.views[v] ^= 1 << j;
            self.unsat.set(v, !self.code.inner.contains_mask(self.views[v]));
        }
        if let Some(log) = &mut self.journal {
            log.push(i as u32);
        }
    }

    /// Starts recording flips so they can be undone with [`Self::rollback`].
    pub fn enable_journal(&mut self) {
        self.journal.get_or_insert_with(Vec::new);
    }

    pub fn checkpoint(&self) -> usize {
        self.journal.as_ref().map_or(0, Vec::len)
    }

    /// Undoes every journaled flip after `mark`.
    pub fn rollback(&mut self, mark: usize) {
        let mut log = self.journal.take().expect("journal enabled");
        while log.len() > mark {
            let i = log.pop().unwrap() as usize;
            self.flip_bit(i);
        }
        self.journal = Some(log);
    }

    /// One vote pass over `U(x)`: every check whose view lies within
    /// distance `< d0/2` of its nearest codeword adds `d0 - 2*dist` to the
    /// first differing neighbor in its order.
    pub fn accumulate_votes(&mut self) {
        debug_assert!(self.voted.is_empty(), "votes must be cleared between passes");
        let g = &self.code.graph;
        for v in self.unsat.iter() {
            let view = self.views[v];
            let (nearest, dist) = self.code.inner.decode_mask(view);
            if dist >= 1 && 2 * dist < self.d0 {
                let pos = (view ^ nearest).trailing_zeros() as usize;
                let i = g.right_neighbors(v)[pos] as usize;
                self.votes[i] += self.d0 - 2 * dist;
                self.voted.insert(i);
            }
        }
    }

    /// Returns votes and `P` to their initial all-zero state in O(|P|).
    pub fn clear_votes(&mut self) {
        for i in self.voted.iter() {
            self.votes[i] = 0;
        }
        self.voted.clear();
    }

    /// Replaces the word, recomputing everything (O(n)). Clears the journal.
    pub fn reset(&mut self, x: BitVec) -> Result<()> {
        let journal = self.journal.is_some();
        *self = Self::new(self.code, x)?;
        if journal {
            self.enable_journal();
        }
        Ok(())
    }

    /// Compares the incremental data with a full recount.
    pub fn is_coherent(&self) -> bool {
        let code = self.code;
        let views_ok = (0..code.n_checks()).all(|v| self.views[v] == code.local_view(&self.x, v));
        let unsat_ok = code
            .unsatisfied(&self.x)
            .map(|u| u == self.unsat.to_sorted_vec())
            .unwrap_or(false);
        let voted: Vec<usize> = (0..self.votes.len()).filter(|&i| self.votes[i] != 0).collect();
        let scale = self.vote_scale();
        views_ok
            && unsat_ok
            && voted == self.voted.to_sorted_vec()
            && self.votes.iter().all(|&p| p <= scale)
    }
}
