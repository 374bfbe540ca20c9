//! Left-regular bipartite graphs with ordered right neighborhoods.
//!
//! Right vertex `v` stores its left neighbors in a fixed order; position `j`
//! in that list is coordinate `j` of the local view at `v`.

use std::fmt::Write as _;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{usage, Error, Result};
use crate::rational::{self, Rational};

/// Largest number of subsets the exhaustive profile will visit.
pub const EXHAUSTIVE_SUBSET_LIMIT: u128 = 10_000_000;

const MAX_RESTARTS: usize = 64;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BipartiteGraph {
    n_left: usize,
    left_degree: usize,
    right_offsets: Vec<usize>,
    right_nbrs: Vec<u32>,
    left_nbrs: Vec<u32>,
    left_slots: Vec<u32>,
}

impl BipartiteGraph {
    /// Builds a graph from ordered right adjacency lists. Every left vertex
    /// must have the same degree and no right list may repeat a vertex.
    pub fn from_right_adj(n_left: usize, right_adj: &[Vec<usize>]) -> Result<Self> {
        if n_left == 0 {
            return usage("graph needs at least one left vertex");
        }
        let mut right_offsets = Vec::with_capacity(right_adj.len() + 1);
        let mut right_nbrs = Vec::new();
        let mut degree = vec![0usize; n_left];
        right_offsets.push(0);
        let mut seen = vec![usize::MAX; n_left];
        for (v, list) in right_adj.iter().enumerate() {
            for &u in list {
                if u >= n_left {
                    return usage(format!("right vertex {v} lists left vertex {u} >= {n_left}"));
                }
                if seen[u] == v {
                    return usage(format!("right vertex {v} lists left vertex {u} twice"));
                }
                seen[u] = v;
                degree[u] += 1;
                right_nbrs.push(u as u32);
            }
            right_offsets.push(right_nbrs.len());
        }
        let c = degree[0];
        if let Some(u) = degree.iter().position(|&x| x != c) {
            return usage(format!(
                "left vertex {u} has degree {} but vertex 0 has degree {c}",
                degree[u]
            ));
        }
        let mut left_nbrs = vec![0u32; n_left * c];
        let mut left_slots = vec![0u32; n_left * c];
        let mut fill = vec![0usize; n_left];
        for v in 0..right_adj.len() {
            for (j, &u) in right_nbrs[right_offsets[v]..right_offsets[v + 1]].iter().enumerate() {
                let u = u as usize;
                let at = u * c + fill[u];
                left_nbrs[at] = v as u32;
                left_slots[at] = j as u32;
                fill[u] += 1;
            }
        }
        Ok(Self {
            n_left,
            left_degree: c,
            right_offsets,
            right_nbrs,
            left_nbrs,
            left_slots,
        })
    }

    pub fn n_left(&self) -> usize {
        self.n_left
    }

    pub fn n_right(&self) -> usize {
        self.right_offsets.len() - 1
    }

    /// The common left degree `c`.
    pub fn left_degree(&self) -> usize {
        self.left_degree
    }

    pub fn n_edges(&self) -> usize {
        self.right_nbrs.len()
    }

    pub fn right_degree(&self, v: usize) -> usize {
        self.right_offsets[v + 1] - self.right_offsets[v]
    }

    pub fn right_degrees(&self) -> Vec<usize> {
        (0..self.n_right()).map(|v| self.right_degree(v)).collect()
    }

    /// `Some(d)` when every right vertex has degree `d`.
    pub fn right_regular_degree(&self) -> Option<usize> {
        let d = self.right_degree(0);
        (0..self.n_right()).all(|v| self.right_degree(v) == d).then_some(d)
    }

    /// Ordered left neighbors of right vertex `v`.
    #[inline]
    pub fn right_neighbors(&self, v: usize) -> &[u32] {
        &self.right_nbrs[self.right_offsets[v]..self.right_offsets[v + 1]]
    }

    /// Right neighbors of left vertex `u`, ascending.
    #[inline]
    pub fn left_neighbors(&self, u: usize) -> &[u32] {
        &self.left_nbrs[u * self.left_degree..(u + 1) * self.left_degree]
    }

    /// For each entry of [`Self::left_neighbors`], the position of `u` in
    /// that right vertex's ordered list.
    #[inline]
    pub fn left_slots(&self, u: usize) -> &[u32] {
        &self.left_slots[u * self.left_degree..(u + 1) * self.left_degree]
    }

    pub fn right_adj(&self) -> Vec<Vec<usize>> {
        (0..self.n_right())
            .map(|v| self.right_neighbors(v).iter().map(|&u| u as usize).collect())
            .collect()
    }

    /// Graph text form: `n_left n_right c d`, then one ordered line per
    /// right vertex. Only right-regular graphs are representable.
    pub fn to_text(&self) -> Result<String> {
        let d = self
            .right_regular_degree()
            .ok_or_else(|| Error::Usage("only right-regular graphs can be written".into()))?;
        let mut out = String::with_capacity(self.n_edges() * 6);
        let _ = writeln!(out, "{} {} {} {}", self.n_left, self.n_right(), self.left_degree, d);
        for v in 0..self.n_right() {
            let mut first = true;
            for &u in self.right_neighbors(v) {
                if !first {
                    out.push(' ');
                }
                first = false;
                let _ = write!(out, "{u}");
            }
            out.push('\n');
        }
        Ok(out)
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty graph file".into()))?;
        let fields = parse_numbers(header)?;
        let [n_left, n_right, c, d] = fields[..] else {
            return Err(Error::Parse(format!(
                "graph header must be `n_left n_right c d`, got {header:?}"
            )));
        };
        let mut adj = Vec::with_capacity(n_right);
        for v in 0..n_right {
            let line = lines
                .next()
                .ok_or_else(|| Error::Parse(format!("graph file ends before right vertex {v}")))?;
            let list = parse_numbers(line)?;
            if list.len() != d {
                return Err(Error::Parse(format!(
                    "right vertex {v} has {} neighbors, header says {d}",
                    list.len()
                )));
            }
            adj.push(list);
        }
        if lines.next().is_some() {
            return Err(Error::Parse("trailing data after graph lines".into()));
        }
        let g = Self::from_right_adj(n_left, &adj).map_err(|e| Error::Parse(e.to_string()))?;
        if g.left_degree != c {
            return Err(Error::Parse(format!(
                "header says c = {c} but left degree is {}",
                g.left_degree
            )));
        }
        Ok(g)
    }

    fn check_set(&self, set: &[usize]) -> Result<()> {
        let mut seen = std::collections::HashSet::with_capacity(set.len());
        for &u in set {
            if u >= self.n_left {
                return usage(format!("left vertex {u} out of range 0..{}", self.n_left));
            }
            if !seen.insert(u) {
                return usage(format!("left vertex {u} repeated in set"));
            }
        }
        Ok(())
    }

    /// Exact multiplicity histogram of `N(S)`.
    pub fn neighborhood_counts(&self, set: &[usize]) -> Result<NeighborhoodCounts> {
        self.check_set(set)?;
        let mut hits: Vec<u32> = set
            .iter()
            .flat_map(|&u| self.left_neighbors(u).iter().copied())
            .collect();
        hits.sort_unstable();
        let mut by_multiplicity = vec![0usize; set.len() + 1];
        let mut i = 0;
        while i < hits.len() {
            let mut j = i;
            while j < hits.len() && hits[j] == hits[i] {
                j += 1;
            }
            by_multiplicity[j - i] += 1;
            i = j;
        }
        let neighbors = by_multiplicity.iter().skip(1).sum();
        Ok(NeighborhoodCounts {
            by_multiplicity,
            neighbors,
            edges: hits.len(),
        })
    }

    /// `|N_{<=t}(S)|`: right vertices with between 1 and `t` neighbors in S.
    pub fn n_leq(&self, set: &[usize], t: usize) -> Result<usize> {
        Ok(self.neighborhood_counts(set)?.n_leq(t))
    }

    /// `|N_{>=t}(S)|`; `t = 0` counts all of `N(S)`.
    pub fn n_geq(&self, set: &[usize], t: usize) -> Result<usize> {
        Ok(self.neighborhood_counts(set)?.n_geq(t))
    }

    /// `|N_{>=t}(S)|` for the half-integer threshold `t = twice_t / 2`.
    pub fn n_geq_half(&self, set: &[usize], twice_t: usize) -> Result<usize> {
        Ok(self.neighborhood_counts(set)?.n_geq_half(twice_t))
    }

    /// `|N(S)| / (c|S|)` as an exact rational.
    pub fn expansion_factor(&self, set: &[usize]) -> Result<Rational> {
        if set.is_empty() {
            return usage("expansion factor of the empty set is undefined");
        }
        let counts = self.neighborhood_counts(set)?;
        Ok(Rational::new(
            BigInt::from(counts.neighbors),
            BigInt::from(self.left_degree * set.len()),
        ))
    }
}

fn parse_numbers(line: &str) -> Result<Vec<usize>> {
    line.split_whitespace()
        .map(|f| {
            f.parse()
                .map_err(|_| Error::Parse(format!("expected a non-negative integer, got {f:?}")))
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NeighborhoodCounts {
    /// Entry `i` is `|N_i(S)|` for `i >= 1`; entry 0 is unused and zero.
    pub by_multiplicity: Vec<usize>,
    /// `|N(S)|`.
    pub neighbors: usize,
    /// `|E(S, N(S))|`.
    pub edges: usize,
}

impl NeighborhoodCounts {
    pub fn n_i(&self, i: usize) -> usize {
        if i == 0 {
            return 0;
        }
        self.by_multiplicity.get(i).copied().unwrap_or(0)
    }

    pub fn n_leq(&self, t: usize) -> usize {
        (1..=t.min(self.by_multiplicity.len().saturating_sub(1)))
            .map(|i| self.by_multiplicity[i])
            .sum()
    }

    pub fn n_geq(&self, t: usize) -> usize {
        (t.max(1)..self.by_multiplicity.len())
            .map(|i| self.by_multiplicity[i])
            .sum()
    }

    pub fn n_geq_half(&self, twice_t: usize) -> usize {
        self.n_geq(twice_t.div_ceil(2))
    }
}

/// Exact per-size minimum neighborhoods over all sets of size `<= max_size`.
#[derive(Clone, Debug, PartialEq)]
pub struct ExpansionProfile {
    pub alpha: Rational,
    pub left_degree: usize,
    /// `floor(alpha * n)`.
    pub max_size: usize,
    /// Entry `s - 1` is `min_{|S| = s} |N(S)|`.
    pub min_neighbors: Vec<usize>,
    /// Lexicographically first set attaining each minimum.
    pub witnesses: Vec<Vec<usize>>,
    /// Minimum expansion factor over all sizes.
    pub realized_delta: Rational,
    /// Smallest size attaining `realized_delta`.
    pub worst_size: usize,
}

impl ExpansionProfile {
    pub fn factor(&self, size: usize) -> Rational {
        Rational::new(
            BigInt::from(self.min_neighbors[size - 1]),
            BigInt::from(self.left_degree * size),
        )
    }
}

/// `floor(alpha * n)` with validation of `alpha` in `(0, 1]`.
pub fn max_set_size(alpha: &Rational, n: usize) -> Result<usize> {
    if !(alpha > &Rational::zero() && alpha <= &Rational::one()) {
        return usage(format!("alpha must lie in (0, 1], got {alpha}"));
    }
    Ok(rational::floor_usize(&(alpha * Rational::from_integer(BigInt::from(n)))))
}

fn binomial(n: usize, k: usize) -> u128 {
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul((n - i) as u128) / (i as u128 + 1);
    }
    acc
}

/// Number of nonempty subsets of size at most `s` of an `n`-set, saturating.
pub fn subsets_up_to(n: usize, s: usize) -> u128 {
    (1..=s.min(n)).fold(0u128, |acc, k| acc.saturating_add(binomial(n, k)))
}

/// Visits every nonempty subset of size `<= alpha * n` and records the
/// minimum neighborhood per size.
pub fn expansion_profile_exhaustive(g: &BipartiteGraph, alpha: &Rational) -> Result<ExpansionProfile> {
    let n = g.n_left();
    let max_size = max_set_size(alpha, n)?;
    if max_size == 0 {
        return usage(format!("alpha * n < 1 for alpha = {alpha}, n = {n}: no sets to check"));
    }
    let total = subsets_up_to(n, max_size);
    if total > EXHAUSTIVE_SUBSET_LIMIT {
        return Err(Error::Capacity(format!(
            "{total} subsets exceed the exhaustive limit {EXHAUSTIVE_SUBSET_LIMIT}; use the sampled check"
        )));
    }
    let per_first: Vec<Vec<(usize, Vec<usize>)>> = (0..n)
        .into_par_iter()
        .map(|first| profile_from(g, first, max_size))
        .collect();
    let mut min_neighbors = vec![usize::MAX; max_size];
    let mut witnesses = vec![Vec::new(); max_size];
    for local in per_first {
        for (s, (count, witness)) in local.into_iter().enumerate() {
            if count < min_neighbors[s] {
                min_neighbors[s] = count;
                witnesses[s] = witness;
            }
        }
    }
    let c = g.left_degree();
    let mut worst_size = 1;
    for s in 2..=max_size {
        // a/(cs) < b/(ct)  <=>  a*t < b*s
        if min_neighbors[s - 1] * worst_size < min_neighbors[worst_size - 1] * s {
            worst_size = s;
        }
    }
    let realized_delta = Rational::new(
        BigInt::from(min_neighbors[worst_size - 1]),
        BigInt::from(c * worst_size),
    );
    Ok(ExpansionProfile {
        alpha: alpha.clone(),
        left_degree: c,
        max_size,
        min_neighbors,
        witnesses,
        realized_delta,
        worst_size,
    })
}

/// Lexicographic DFS over subsets whose smallest element is `first`.
fn profile_from(g: &BipartiteGraph, first: usize, max_size: usize) -> Vec<(usize, Vec<usize>)> {
    let n = g.n_left();
    let mut best: Vec<(usize, Vec<usize>)> = vec![(usize::MAX, Vec::new()); max_size];
    let mut counts = vec![0u32; g.n_right()];
    let mut covered = 0usize;
    let mut stack = vec![first];
    let add = |u: usize, counts: &mut [u32], covered: &mut usize| {
        for &v in g.left_neighbors(u) {
            if counts[v as usize] == 0 {
                *covered += 1;
            }
            counts[v as usize] += 1;
        }
    };
    let sub = |u: usize, counts: &mut [u32], covered: &mut usize| {
        for &v in g.left_neighbors(u) {
            counts[v as usize] -= 1;
            if counts[v as usize] == 0 {
                *covered -= 1;
            }
        }
    };
    add(first, &mut counts, &mut covered);
    loop {
        let depth = stack.len();
        if covered < best[depth - 1].0 {
            best[depth - 1] = (covered, stack.clone());
        }
        // Descend to the next element if room remains, otherwise advance.
        let last = *stack.last().unwrap();
        if depth < max_size && last + 1 < n {
            stack.push(last + 1);
            add(last + 1, &mut counts, &mut covered);
            continue;
        }
        loop {
            let last = stack.pop().unwrap();
            sub(last, &mut counts, &mut covered);
            if stack.is_empty() {
                return best;
            }
            if last + 1 < n {
                stack.push(last + 1);
                add(last + 1, &mut counts, &mut covered);
                break;
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SampledVerdict {
    NoCounterexample { trials: usize },
    /// A set with `|N(S)| < delta * c * |S|`, found at trial `trial`.
    Counterexample { trial: usize, set: Vec<usize> },
}

/// Randomized search for a set of size `<= alpha * n` violating
/// `|N(S)| >= delta * c * |S|`. Trials alternate between uniform subsets
/// (sizes biased small) and greedy growth that always adds the vertex with
/// the fewest new neighbors, checking every prefix. The reported
/// counterexample is the one from the smallest trial index.
pub fn expansion_check_sampled(
    g: &BipartiteGraph,
    alpha: &Rational,
    delta: &Rational,
    trials: usize,
    seed: u64,
) -> Result<SampledVerdict> {
    if trials == 0 {
        return usage("sampled expansion check needs at least one trial");
    }
    let max_size = max_set_size(alpha, g.n_left())?;
    if max_size == 0 || delta <= &Rational::zero() {
        return Ok(SampledVerdict::NoCounterexample { trials });
    }
    // threshold[s] = ceil(delta * c * s); S violates iff |N(S)| < threshold.
    let c = g.left_degree();
    let threshold: Vec<usize> = (0..=max_size)
        .map(|s| ceil_usize(&(delta * Rational::from_integer(BigInt::from(c * s)))))
        .collect();
    let found = (0..trials)
        .into_par_iter()
        .map_init(
            || Scratch::new(g),
            |scratch, trial| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(trial as u64);
                if trial % 2 == 0 {
                    scratch.greedy_trial(g, max_size, &threshold, &mut rng)
                } else {
                    scratch.uniform_trial(g, max_size, &threshold, &mut rng)
                }
                .map(|set| (trial, set))
            },
        )
        .find_first(Option::is_some)
        .flatten();
    Ok(match found {
        Some((trial, mut set)) => {
            set.sort_unstable();
            SampledVerdict::Counterexample { trial, set }
        }
        None => SampledVerdict::NoCounterexample { trials },
    })
}

struct Scratch {
    right_count: Vec<u32>,
    score: Vec<u32>,
    in_set: Vec<bool>,
    touched_right: Vec<u32>,
    touched_left: Vec<u32>,
    buckets: Vec<Vec<u32>>,
}

impl Scratch {
    fn new(g: &BipartiteGraph) -> Self {
        Self {
            right_count: vec![0; g.n_right()],
            score: vec![0; g.n_left()],
            in_set: vec![false; g.n_left()],
            touched_right: Vec::new(),
            touched_left: Vec::new(),
            buckets: vec![Vec::new(); g.left_degree() + 1],
        }
    }

    fn reset(&mut self) {
        for &v in &self.touched_right {
            self.right_count[v as usize] = 0;
        }
        for &u in &self.touched_left {
            self.score[u as usize] = 0;
            self.in_set[u as usize] = false;
        }
        self.touched_right.clear();
        self.touched_left.clear();
        for b in &mut self.buckets {
            b.clear();
        }
    }

    fn uniform_trial(
        &mut self,
        g: &BipartiteGraph,
        max_size: usize,
        threshold: &[usize],
        rng: &mut ChaCha8Rng,
    ) -> Option<Vec<usize>> {
        let u: f64 = rng.gen();
        let size = ((max_size as f64 * u * u * u).ceil() as usize).clamp(1, max_size);
        let set = rand::seq::index::sample(rng, g.n_left(), size).into_vec();
        let mut covered = 0;
        for &x in &set {
            for &v in g.left_neighbors(x) {
                if self.right_count[v as usize] == 0 {
                    covered += 1;
                    self.touched_right.push(v);
                }
                self.right_count[v as usize] += 1;
            }
        }
        self.reset();
        (covered < threshold[size]).then_some(set)
    }

    fn greedy_trial(
        &mut self,
        g: &BipartiteGraph,
        max_size: usize,
        threshold: &[usize],
        rng: &mut ChaCha8Rng,
    ) -> Option<Vec<usize>> {
        let c = g.left_degree();
        let mut set = Vec::with_capacity(max_size);
        let mut covered = 0usize;
        let mut next = rng.gen_range(0..g.n_left());
        let mut result = None;
        loop {
            self.in_set[next] = true;
            self.touched_left.push(next as u32);
            set.push(next);
            for &v in g.left_neighbors(next) {
                let v = v as usize;
                if self.right_count[v] == 0 {
                    covered += 1;
                    self.touched_right.push(v as u32);
                    for &w in g.right_neighbors(v) {
                        let w = w as usize;
                        if self.in_set[w] {
                            continue;
                        }
                        if self.score[w] == 0 {
                            self.touched_left.push(w as u32);
                        }
                        self.score[w] += 1;
                        self.buckets[(self.score[w] as usize).min(c)].push(w as u32);
                    }
                }
                self.right_count[v] += 1;
            }
            if covered < threshold[set.len()] {
                result = Some(set);
                break;
            }
            if set.len() == max_size {
                break;
            }
            next = match self.pop_best(rng) {
                Some(w) => w,
                None => loop {
                    let w = rng.gen_range(0..g.n_left());
                    if !self.in_set[w] {
                        break w;
                    }
                },
            };
        }
        self.reset();
        result
    }

    /// Random member of the highest nonempty score bucket, skipping stale
    /// entries.
    fn pop_best(&mut self, rng: &mut ChaCha8Rng) -> Option<usize> {
        for b in (1..self.buckets.len()).rev() {
            while !self.buckets[b].is_empty() {
                let at = rng.gen_range(0..self.buckets[b].len());
                let w = self.buckets[b].swap_remove(at) as usize;
                if !self.in_set[w] && self.score[w] as usize == b {
                    return Some(w);
                }
            }
        }
        None
    }
}

/// Stub-matching generator with `c` stubs per left vertex and
/// `right_degrees[v]` stubs at right vertex `v`. A draw that would repeat a
/// right vertex for the current left vertex is redrawn; after `n*c*100`
/// draws the attempt restarts from scratch. Right vertex `v`'s ordered list
/// follows its stub order `(v, 0), (v, 1), ...`.
pub fn generate_regular(
    c: usize,
    right_degrees: &[usize],
    n_left: usize,
    seed: u64,
) -> Result<BipartiteGraph> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    generate_regular_with(c, right_degrees, n_left, &mut rng)
}

pub fn generate_regular_with(
    c: usize,
    right_degrees: &[usize],
    n_left: usize,
    rng: &mut ChaCha8Rng,
) -> Result<BipartiteGraph> {
    if n_left == 0 || c == 0 {
        return usage("graph generation needs n_left >= 1 and c >= 1");
    }
    let total: usize = right_degrees.iter().sum();
    if total != c * n_left {
        return usage(format!(
            "right degrees sum to {total} but c * n_left = {}",
            c * n_left
        ));
    }
    if let Some(v) = right_degrees.iter().position(|&d| d > n_left) {
        return usage(format!(
            "right vertex {v} has degree {} > n_left = {n_left}; no simple graph exists",
            right_degrees[v]
        ));
    }
    let budget = n_left * c * 100;
    'attempt: for _ in 0..MAX_RESTARTS {
        let mut stubs: Vec<(u32, u32)> = right_degrees
            .iter()
            .enumerate()
            .flat_map(|(v, &d)| (0..d as u32).map(move |j| (v as u32, j)))
            .collect();
        let mut slot_owner: Vec<Vec<usize>> = right_degrees.iter().map(|&d| vec![0; d]).collect();
        let mut draws = 0usize;
        let mut chosen: Vec<u32> = Vec::with_capacity(c);
        for u in 0..n_left {
            chosen.clear();
            for _ in 0..c {
                loop {
                    if draws == budget {
                        continue 'attempt;
                    }
                    draws += 1;
                    let at = rng.gen_range(0..stubs.len());
                    let (v, j) = stubs[at];
                    if chosen.contains(&v) {
                        continue;
                    }
                    stubs.swap_remove(at);
                    chosen.push(v);
                    slot_owner[v as usize][j as usize] = u;
                    break;
                }
            }
        }
        return BipartiteGraph::from_right_adj(n_left, &slot_owner);
    }
    Err(Error::Generation(format!(
        "no simple graph after {MAX_RESTARTS} restarts of {budget} draws each"
    )))
}

/// Smallest `n >= 1` nearest to `hint` with `d | c*n`.
pub fn suggest_regular_n(c: usize, d: usize, hint: usize) -> usize {
    let step = d / d.gcd(&c);
    let down = hint - hint % step;
    let up = down + step;
    if down == 0 || hint - down > up - hint {
        up
    } else {
        down
    }
}

/// Parameters of the merged construction, validated.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MergedShape {
    pub n: usize,
    /// `|L(G0)|`, the planted left vertices `0..n0`.
    pub n0: usize,
    /// `|R(G0)|`, the merged right vertices `0..r0`.
    pub r0: usize,
    pub n_right: usize,
}

pub fn merged_shape(
    c: usize,
    d: usize,
    d0: usize,
    k_alpha: &Rational,
    n: usize,
) -> Result<MergedShape> {
    if !(1 <= d0 && d0 <= d) {
        return usage(format!("need 1 <= d0 <= d, got d0 = {d0}, d = {d}"));
    }
    if k_alpha <= &Rational::zero() {
        return usage("k_alpha must be positive");
    }
    if k_alpha * Rational::from_integer(d.into()) > Rational::from_integer(d0.into()) {
        return usage(format!("k_alpha = {k_alpha} exceeds d0/d = {d0}/{d}"));
    }
    let n0 = k_alpha * Rational::from_integer(n.into());
    let problems = |n0: &Rational| {
        let mut out = Vec::new();
        if !n0.is_integer() {
            out.push("k_alpha*n");
        } else if !(c * n0.to_integer().to_usize().unwrap_or(0)).is_multiple_of(d0) {
            out.push("c*k_alpha*n/d0");
        }
        if !(c * n).is_multiple_of(d) {
            out.push("c*n/d");
        }
        out
    };
    let bad = problems(&n0);
    if !bad.is_empty() {
        let hint = suggest_merged_n(c, d, d0, k_alpha, n)
            .map(|m| format!("; nearest feasible n is {m}"))
            .unwrap_or_default();
        return usage(format!("n = {n} makes {} non-integral{hint}", bad.join(", ")));
    }
    let n0 = n0.to_integer().to_usize().unwrap();
    Ok(MergedShape {
        n,
        n0,
        r0: c * n0 / d0,
        n_right: c * n / d,
    })
}

/// Nearest `n` to `hint` for which the merged construction is integral.
pub fn suggest_merged_n(c: usize, d: usize, d0: usize, k_alpha: &Rational, hint: usize) -> Option<usize> {
    let feasible = |n: usize| {
        let n0 = k_alpha * Rational::from_integer(n.into());
        n >= 1
            && n0.is_integer()
            && (c * n).is_multiple_of(d)
            && n0
                .to_integer()
                .to_usize()
                .is_some_and(|n0| (c * n0).is_multiple_of(d0))
    };
    let limit = hint.max(1) * 4 + 1_000_000;
    (0..limit).find_map(|off| {
        if hint >= off && feasible(hint - off) {
            Some(hint - off)
        } else if feasible(hint + off) {
            Some(hint + off)
        } else {
            None
        }
    })
}

/// Merges a `(c, d0)`-regular graph on the planted vertices `0..n0` with a
/// left-`c`-regular graph on the rest. Right vertex `v < r0` carries its
/// planted neighbors at `support_positions` (ascending) and its other
/// neighbors at the remaining positions. Returns the graph and `0..n0`.
pub fn generate_merged(
    c: usize,
    d: usize,
    d0: usize,
    k_alpha: &Rational,
    n: usize,
    support_positions: &[usize],
    seed: u64,
) -> Result<(BipartiteGraph, Vec<usize>)> {
    let shape = merged_shape(c, d, d0, k_alpha, n)?;
    let mut positions = support_positions.to_vec();
    positions.sort_unstable();
    positions.dedup();
    if positions.len() != d0 || positions.iter().any(|&p| p >= d) {
        return usage(format!(
            "support positions must be {d0} distinct indices below {d}, got {support_positions:?}"
        ));
    }
    if shape.n0 == 0 || shape.n0 == n {
        return usage("the merged construction needs 0 < k_alpha*n < n");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g0 = generate_regular_with(c, &vec![d0; shape.r0], shape.n0, &mut rng)?;
    let mut degrees1 = vec![d; shape.n_right];
    for deg in degrees1.iter_mut().take(shape.r0) {
        *deg = d - d0;
    }
    let g1 = generate_regular_with(c, &degrees1, n - shape.n0, &mut rng)?;
    let mut is_support = vec![false; d];
    for &p in &positions {
        is_support[p] = true;
    }
    let mut adj = Vec::with_capacity(shape.n_right);
    for v in 0..shape.n_right {
        let other = g1.right_neighbors(v).iter().map(|&u| u as usize + shape.n0);
        if v < shape.r0 {
            let mut planted = g0.right_neighbors(v).iter().map(|&u| u as usize);
            let mut other = other;
            let list = (0..d)
                .map(|j| {
                    if is_support[j] {
                        planted.next().unwrap()
                    } else {
                        other.next().unwrap()
                    }
                })
                .collect();
            adj.push(list);
        } else {
            adj.push(other.collect());
        }
    }
    let g = BipartiteGraph::from_right_adj(n, &adj)?;
    Ok((g, (0..shape.n0).collect()))
}

/// `ceil(q)` for a positive rational, as usize.
pub(crate) fn ceil_usize(q: &Rational) -> usize {
    let (num, den) = (q.numer(), q.denom());
    let (quot, rem) = num.div_rem(den);
    let quot = if rem.is_zero() { quot } else { quot + 1 };
    quot.to_usize().unwrap_or(usize::MAX)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;
    use proptest::prelude::*;

    fn fixture(seed: u64) -> BipartiteGraph {
        generate_regular(3, &[6; 6], 12, seed).unwrap()
    }

    #[test]
    fn perfect_matching_c1() {
        let g = generate_regular(1, &[1, 1], 2, 7).unwrap();
        assert_eq!(g.n_edges(), 2);
        let mut owners: Vec<u32> = (0..2).map(|v| g.right_neighbors(v)[0]).collect();
        owners.sort();
        assert_eq!(owners, vec![0, 1]);
        let p = expansion_profile_exhaustive(&g, &ratio(1, 1)).unwrap();
        assert_eq!(p.realized_delta, ratio(1, 1));
    }

    #[test]
    fn regular_fixture_degrees_and_consistency() {
        for seed in 0..20 {
            let g = fixture(seed);
            assert_eq!(g.n_edges(), 36);
            assert_eq!(g.right_regular_degree(), Some(6));
            let mut from_left = 0;
            for u in 0..12 {
                assert_eq!(g.left_neighbors(u).len(), 3);
                for (&v, &j) in g.left_neighbors(u).iter().zip(g.left_slots(u)) {
                    assert_eq!(g.right_neighbors(v as usize)[j as usize] as usize, u);
                    from_left += 1;
                }
            }
            assert_eq!(from_left, 36);
        }
    }

    #[test]
    fn generation_rejects_bad_profiles() {
        assert!(matches!(generate_regular(3, &[6; 5], 12, 0), Err(Error::Usage(_))));
        assert!(matches!(generate_regular(2, &[3], 2, 0), Err(Error::Usage(_))));
    }

    #[test]
    fn generation_is_seed_deterministic() {
        assert_eq!(fixture(5), fixture(5));
        assert_ne!(fixture(5), fixture(6));
    }

    #[test]
    fn text_round_trip() {
        let g = fixture(1);
        let text = g.to_text().unwrap();
        assert!(text.starts_with("12 6 3 6\n"));
        assert_eq!(BipartiteGraph::from_text(&text).unwrap(), g);
        assert!(BipartiteGraph::from_text("2 1 1 2\n0 0\n").is_err());
        assert!(BipartiteGraph::from_text("2 1 1 2\n0 1\n5\n").is_err());
    }

    #[test]
    fn counts_edge_cases() {
        let g = fixture(2);
        let empty = g.neighborhood_counts(&[]).unwrap();
        assert_eq!((empty.neighbors, empty.edges), (0, 0));
        let single = g.neighborhood_counts(&[4]).unwrap();
        assert_eq!(single.neighbors, 3);
        assert_eq!(single.edges, 3);
        let all: Vec<usize> = (0..12).collect();
        let full = g.neighborhood_counts(&all).unwrap();
        assert_eq!(full.n_i(6), 6);
        assert_eq!(full.n_leq(6), 6);
        assert_eq!(full.n_geq(0), 6);
        assert_eq!(full.n_geq(7), 0);
        assert_eq!(full.n_geq_half(11), 6);
        assert!(g.neighborhood_counts(&[1, 1]).is_err());
        assert!(g.neighborhood_counts(&[12]).is_err());
    }

    #[test]
    fn complete_bipartite_profile() {
        let adj: Vec<Vec<usize>> = (0..3).map(|_| (0..5).collect()).collect();
        let g = BipartiteGraph::from_right_adj(5, &adj).unwrap();
        assert_eq!(g.left_degree(), 3);
        let p = expansion_profile_exhaustive(&g, &ratio(1, 1)).unwrap();
        for s in 1..=5 {
            assert_eq!(p.factor(s), ratio(1, s as i64));
        }
        assert_eq!(p.realized_delta, ratio(1, 5));
        assert_eq!(p.worst_size, 5);
    }

    #[test]
    fn capacity_error_on_large_instances() {
        let g = generate_regular(3, &vec![6; 40], 80, 0).unwrap();
        assert!(matches!(
            expansion_profile_exhaustive(&g, &ratio(1, 2)),
            Err(Error::Capacity(_))
        ));
    }

    #[test]
    fn exhaustive_matches_bitmask_recount() {
        for seed in 0..4 {
            let g = fixture(seed);
            let p = expansion_profile_exhaustive(&g, &ratio(1, 2)).unwrap();
            let mut best = vec![usize::MAX; 6];
            let mut wit = [0u32; 6];
            // Descending masks with <= keeps the lexicographically first set.
            for mask in (1u32..1 << 12).rev() {
                let s = mask.count_ones() as usize;
                if s > 6 {
                    continue;
                }
                let set: Vec<usize> = (0..12).filter(|i| mask >> i & 1 == 1).collect();
                let nb = g.neighborhood_counts(&set).unwrap().neighbors;
                let key = |m: u32| m.reverse_bits();
                if nb < best[s - 1] || (nb == best[s - 1] && key(mask) > key(wit[s - 1])) {
                    best[s - 1] = nb;
                    wit[s - 1] = mask;
                }
            }
            assert_eq!(p.min_neighbors, best);
            for s in 1..=6 {
                let w: Vec<usize> = (0..12).filter(|i| wit[s - 1] >> i & 1 == 1).collect();
                assert_eq!(g.neighborhood_counts(&p.witnesses[s - 1]).unwrap().neighbors, best[s - 1]);
                assert_eq!(p.witnesses[s - 1], w);
            }
        }
    }

    #[test]
    fn sampled_check_edge_cases() {
        let g = fixture(3);
        let alpha = ratio(1, 2);
        assert_eq!(
            expansion_check_sampled(&g, &alpha, &ratio(0, 1), 50, 1).unwrap(),
            SampledVerdict::NoCounterexample { trials: 50 }
        );
        let found = expansion_check_sampled(&g, &alpha, &ratio(11, 10), 50, 1).unwrap();
        assert!(matches!(found, SampledVerdict::Counterexample { .. }));
        let p = expansion_profile_exhaustive(&g, &alpha).unwrap();
        assert!(matches!(
            expansion_check_sampled(&g, &alpha, &p.realized_delta, 2000, 9).unwrap(),
            SampledVerdict::NoCounterexample { .. }
        ));
        let above = &p.realized_delta + ratio(1, 20);
        match expansion_check_sampled(&g, &alpha, &above, 2000, 9).unwrap() {
            SampledVerdict::Counterexample { set, .. } => {
                let f = g.expansion_factor(&set).unwrap();
                assert!(f < above);
            }
            other => panic!("expected a counterexample, got {other:?}"),
        }
    }

    #[test]
    fn ceil_helper() {
        assert_eq!(ceil_usize(&ratio(7, 2)), 4);
        assert_eq!(ceil_usize(&ratio(6, 2)), 3);
    }

    #[test]
    fn merged_shape_validation() {
        assert!(merged_shape(2, 3, 2, &ratio(1, 2), 12).is_ok());
        let err = merged_shape(2, 3, 2, &ratio(1, 2), 13).unwrap_err().to_string();
        assert!(err.contains("nearest feasible n is 12"), "{err}");
        assert!(merged_shape(2, 3, 2, &ratio(3, 4), 12).is_err());
        assert_eq!(suggest_regular_n(3, 6, 13), 12);
    }

    #[test]
    fn merged_d0_2_d_3() {
        let (g, planted) = generate_merged(2, 3, 2, &ratio(1, 2), 12, &[0, 2], 11).unwrap();
        assert_eq!(planted, (0..6).collect::<Vec<_>>());
        assert_eq!(g.right_regular_degree(), Some(3));
        let r0 = 2 * 6 / 2;
        for v in 0..g.n_right() {
            let nb = g.right_neighbors(v);
            let planted_positions: Vec<usize> = (0..3).filter(|&j| (nb[j] as usize) < 6).collect();
            if v < r0 {
                assert_eq!(planted_positions, vec![0, 2]);
            } else {
                assert!(planted_positions.is_empty());
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn counts_match_naive(seed in 0u64..1000, mask in 1u32..(1 << 12)) {
            let g = fixture(seed % 8);
            let set: Vec<usize> = (0..12).filter(|i| mask >> i & 1 == 1).collect();
            let counts = g.neighborhood_counts(&set).unwrap();
            let mut naive = [0usize; 13];
            for v in 0..g.n_right() {
                let k = g.right_neighbors(v).iter().filter(|&&u| mask >> u & 1 == 1).count();
                naive[k] += 1;
            }
            for (i, &expected) in naive.iter().enumerate().skip(1) {
                prop_assert_eq!(counts.n_i(i), expected);
            }
            let weighted: usize = (1..=12).map(|i| i * counts.n_i(i)).sum();
            prop_assert_eq!(weighted, 3 * set.len());
            prop_assert_eq!(counts.edges, 3 * set.len());
            prop_assert_eq!(counts.neighbors, g.n_right() - naive[0]);
        }

        #[test]
        fn generated_degrees_hold(seed in any::<u64>(), r in 1usize..6) {
            let g = generate_regular(2, &vec![4; r * 2], r * 4, seed).unwrap();
            prop_assert_eq!(g.right_regular_degree(), Some(4));
            prop_assert_eq!(g.left_degree(), 2);
        }
    }
}
