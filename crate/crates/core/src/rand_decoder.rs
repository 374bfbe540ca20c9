//! Randomized weighted-vote bit flipping.
//!
//! Each round computes votes over `U(x)` only and then visits only the voted
//! bits. Flip decisions come from a counter-based generator addressed by
//! `(seed, round, bit)`, so the outcome does not depend on the order in
//! which voted bits are visited.

use std::time::{Duration, Instant};

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{usage, Result};
use crate::gf2::BitVec;
use crate::rational::{int, Rational};
use crate::tanner::{DecodeState, TannerCode};

/// `ceil(8 * log2(n + 1)) + 20`.
pub fn default_max_rounds(n: usize) -> usize {
    (8.0 * ((n + 1) as f64).log2()).ceil() as usize + 20
}

#[derive(Clone, Debug, PartialEq)]
pub struct RandParams {
    /// `d0 / 2`.
    pub t: Rational,
    /// `d0/2 - 1/delta`.
    pub eps0: Rational,
    /// `eps0 * delta / t`.
    pub eps1: Rational,
    /// `c / t`.
    pub eps2: Rational,
    pub delta_used: Rational,
    pub max_rounds: usize,
}

impl RandParams {
    pub fn new(code: &TannerCode, delta: Rational, max_rounds: Option<usize>) -> Result<Self> {
        if !(delta > int(0) && delta <= int(1)) {
            return usage(format!("delta must lie in (0, 1], got {delta}"));
        }
        let d0 = code.d0()?;
        let t = Rational::new(BigInt::from(d0), BigInt::from(2));
        let eps0 = &t - delta.recip();
        let eps1 = &eps0 * &delta / &t;
        let eps2 = int(code.c() as i64) / &t;
        Ok(Self {
            t,
            eps0,
            eps1,
            eps2,
            delta_used: delta,
            max_rounds: max_rounds.unwrap_or_else(|| default_max_rounds(code.n())),
        })
    }

    /// Whether `delta * d0 > 2`, the regime the analysis covers.
    pub fn in_guarantee(&self) -> bool {
        self.eps0 > int(0)
    }
}

/// Per-bit flip decisions: bit `i` in round `r` flips iff a uniform draw
/// from `0..scale` lands below its vote.
#[derive(Clone, Debug)]
pub struct FlipCoins {
    rng: ChaCha8Rng,
}

impl FlipCoins {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    #[inline]
    pub fn flips(&mut self, round: u64, bit: usize, vote: u32, scale: u32) -> bool {
        self.rng.set_stream(round);
        self.rng.set_word_pos(16 * bit as u128);
        self.rng.gen_range(0..scale) < vote
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct FlipStats {
    /// `|P|`.
    pub voted: usize,
    pub flipped: usize,
    pub max_vote: u32,
}

/// One round of randomized flipping on the state. Votes and `P` are empty
/// again on return.
pub fn rand_flip(state: &mut DecodeState<'_>, coins: &mut FlipCoins, round: u64) -> FlipStats {
    let mut chosen = Vec::new();
    rand_flip_with(state, coins, round, &mut chosen)
}

fn rand_flip_with(
    state: &mut DecodeState<'_>,
    coins: &mut FlipCoins,
    round: u64,
    chosen: &mut Vec<usize>,
) -> FlipStats {
    state.accumulate_votes();
    let scale = state.vote_scale();
    let mut stats = FlipStats {
        voted: state.voted().len(),
        ..FlipStats::default()
    };
    chosen.clear();
    for i in state.voted().iter() {
        let vote = state.votes()[i];
        debug_assert!(vote <= scale);
        stats.max_vote = stats.max_vote.max(vote);
        if coins.flips(round, i, vote, scale) {
            chosen.push(i);
        }
    }
    state.clear_votes();
    for &i in chosen.iter() {
        state.flip_bit(i);
    }
    stats.flipped = chosen.len();
    stats
}

/// Reference round that scans every check and every bit, recomputing all
/// local views from `x`.
pub fn rand_flip_dense(code: &TannerCode, x: &BitVec, coins: &mut FlipCoins, round: u64) -> Result<BitVec> {
    let d0 = code.d0()? as u32;
    let scale = code.c() as u32 * d0;
    let mut votes = vec![0u32; code.n()];
    for v in 0..code.n_checks() {
        let view = code.local_view(x, v);
        let mut best = 0u32;
        let mut best_dist = u32::MAX;
        for &w in code.inner().codeword_masks() {
            let dist = (w ^ view).count_ones();
            if dist < best_dist {
                best = w;
                best_dist = dist;
            }
        }
        if best_dist >= 1 && 2 * best_dist < d0 {
            let nbrs = code.graph().right_neighbors(v);
            let pos = (0..nbrs.len()).find(|&j| (best ^ view) >> j & 1 == 1).unwrap();
            votes[nbrs[pos] as usize] += d0 - 2 * best_dist;
        }
    }
    let mut out = x.clone();
    for (i, &vote) in votes.iter().enumerate() {
        if vote > 0 && coins.flips(round, i, vote, scale) {
            out.flip(i);
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub enum RandOutcome {
    Decoded {
        y: BitVec,
        rounds: usize,
        elapsed: Duration,
        /// `|U|` before each round and after the last.
        trajectory: Vec<usize>,
    },
    Failed {
        x: BitVec,
        rounds: usize,
        elapsed: Duration,
        trajectory: Vec<usize>,
    },
}

impl RandOutcome {
    pub fn is_decoded(&self) -> bool {
        matches!(self, Self::Decoded { .. })
    }

    pub fn rounds(&self) -> usize {
        match self {
            Self::Decoded { rounds, .. } | Self::Failed { rounds, .. } => *rounds,
        }
    }

    pub fn elapsed(&self) -> Duration {
        match self {
            Self::Decoded { elapsed, .. } | Self::Failed { elapsed, .. } => *elapsed,
        }
    }

    pub fn trajectory(&self) -> &[usize] {
        match self {
            Self::Decoded { trajectory, .. } | Self::Failed { trajectory, .. } => trajectory,
        }
    }

    pub fn word(&self) -> &BitVec {
        match self {
            Self::Decoded { y, .. } => y,
            Self::Failed { x, .. } => x,
        }
    }
}

/// Rounds of [`rand_flip`] until no check is unsatisfied or the round cap is
/// reached. The elapsed time includes building the state.
pub fn rand_decode(code: &TannerCode, x: BitVec, params: &RandParams, seed: u64) -> Result<RandOutcome> {
    let start = Instant::now();
    let mut state = DecodeState::new(code, x)?;
    let mut coins = FlipCoins::new(seed);
    let mut chosen = Vec::new();
    let mut trajectory = vec![state.unsat_count()];
    let mut rounds = 0;
    while state.unsat_count() > 0 && rounds < params.max_rounds {
        rand_flip_with(&mut state, &mut coins, rounds as u64, &mut chosen);
        rounds += 1;
        trajectory.push(state.unsat_count());
    }
    let elapsed = start.elapsed();
    Ok(if state.unsat_count() == 0 {
        RandOutcome::Decoded {
            y: state.into_x(),
            rounds,
            elapsed,
            trajectory,
        }
    } else {
        RandOutcome::Failed {
            x: state.into_x(),
            rounds,
            elapsed,
            trajectory,
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate_regular, BipartiteGraph};
    use crate::inner_code::InnerCode;
    use crate::rational::ratio;

    fn star_code() -> TannerCode {
        // Three checks, each holding all three bits in a different order.
        let g = BipartiteGraph::from_right_adj(3, &[vec![0, 1, 2], vec![1, 0, 2], vec![2, 1, 0]])
            .unwrap();
        TannerCode::new(g, InnerCode::repetition(3).unwrap()).unwrap()
    }

    #[test]
    fn default_rounds_formula() {
        assert_eq!(default_max_rounds(0), 20);
        assert_eq!(default_max_rounds(1), 28);
        assert_eq!(default_max_rounds(1023), 100);
    }

    #[test]
    fn params_match_definitions() {
        let code = star_code();
        let p = RandParams::new(&code, ratio(3, 4), None).unwrap();
        assert_eq!(p.t, ratio(3, 2));
        assert_eq!(p.eps0, ratio(3, 2) - ratio(4, 3));
        assert_eq!(p.eps1, &p.eps0 * ratio(3, 4) / ratio(3, 2));
        assert_eq!(p.eps2, ratio(2, 1));
        assert!(p.in_guarantee());
        assert!(RandParams::new(&code, ratio(0, 1), None).is_err());
        assert!(!RandParams::new(&code, ratio(1, 2), None).unwrap().in_guarantee());
    }

    #[test]
    fn codeword_is_untouched() {
        let code = star_code();
        let y = BitVec::ones(3);
        let mut state = DecodeState::new(&code, y.clone()).unwrap();
        let stats = rand_flip(&mut state, &mut FlipCoins::new(0), 0);
        assert_eq!(stats, FlipStats::default());
        assert_eq!(state.x(), &y);
        let p = RandParams::new(&code, ratio(1, 1), None).unwrap();
        let out = rand_decode(&code, y.clone(), &p, 0).unwrap();
        assert!(out.is_decoded());
        assert_eq!(out.rounds(), 0);
    }

    #[test]
    fn single_error_on_star() {
        let code = star_code();
        let mut x = BitVec::zeros(3);
        x.flip(1);
        let mut state = DecodeState::new(&code, x).unwrap();
        state.accumulate_votes();
        // Each check adds d0 - 2 = 1 unit; p = 3/9 = (t - 1)/t.
        assert_eq!(state.votes(), &[0, 3, 0]);
        assert_eq!(state.vote_scale(), 9);
        state.clear_votes();
        assert!(state.votes().iter().all(|&v| v == 0));
        assert!(state.voted().is_empty());
    }

    #[test]
    fn coins_are_exact_and_order_free() {
        let mut a = FlipCoins::new(5);
        let mut b = FlipCoins::new(5);
        let fwd: Vec<bool> = (0..50).map(|i| a.flips(3, i, 4, 9)).collect();
        let mut back: Vec<bool> = (0..50).rev().map(|i| b.flips(3, i, 4, 9)).collect();
        back.reverse();
        assert_eq!(fwd, back);
        assert!((0..50).all(|i| a.flips(1, i, 9, 9)));
        assert!((0..50).all(|i| !a.flips(1, i, 0, 9)));
    }

    #[test]
    fn sparse_matches_dense() {
        let g = generate_regular(3, &[6; 8], 16, 2).unwrap();
        let code = TannerCode::new(g, InnerCode::repetition(6).unwrap()).unwrap();
        for seed in 0..50u64 {
            let mut x = BitVec::zeros(16);
            for i in 0..16 {
                if (seed >> (i % 8)) & 1 == 1 && i % 3 == 0 {
                    x.flip(i);
                }
            }
            let mut coins = FlipCoins::new(seed);
            let dense = rand_flip_dense(&code, &x, &mut coins, 7).unwrap();
            let mut state = DecodeState::new(&code, x).unwrap();
            rand_flip(&mut state, &mut coins, 7);
            assert_eq!(state.x(), &dense);
            assert!(state.is_coherent());
        }
    }
}
