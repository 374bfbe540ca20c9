//! Deterministic decoding: flip exactly one vote level at a time, and search
//! over level sequences.
//!
//! The searches run depth-first over level sequences in ascending
//! lexicographic order on a single journaled [`DecodeState`]; returning from
//! a branch rolls its flips back, so siblings share their common prefix.

use std::collections::BTreeMap;

use num_bigint::BigInt;

use crate::error::{usage, Error, Result};
use crate::gf2::{hamming_distance, BitVec};
use crate::rational::{self, int, Rational};
use crate::tanner::{DecodeState, TannerCode};

/// Default cap on the number of level applications a search may perform.
pub const DEFAULT_BRANCH_BUDGET: u128 = 10_000_000;

/// A vote level `q = numerator / (c * d0)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VoteLevel {
    pub numerator: u32,
    pub scale: u32,
}

impl VoteLevel {
    pub fn new(numerator: u32, scale: u32) -> Result<Self> {
        if numerator > scale {
            return usage(format!("vote level {numerator}/{scale} exceeds one"));
        }
        Ok(Self { numerator, scale })
    }

    /// All of `W`, zero included: `scale + 1` levels.
    pub fn all(scale: u32) -> impl Iterator<Item = Self> {
        (0..=scale).map(move |numerator| Self { numerator, scale })
    }

    pub fn value(&self) -> Rational {
        Rational::new(BigInt::from(self.numerator), BigInt::from(self.scale))
    }
}

/// Search constants for [`deep_flip`] and [`main_decode`].
#[derive(Clone, Debug, PartialEq)]
pub struct DetPlan {
    pub alpha: Rational,
    pub delta: Rational,
    /// `(1 + c/t)^-1 * (delta*d0 - 1)/(d0 - 1) * alpha`.
    pub gamma: Rational,
    /// `eps0 * delta / (2 c t^2)`.
    pub eps: Rational,
    pub s: usize,
    pub r: usize,
    pub r_prime: usize,
    /// The formula values of `(s, r, r')`, before overrides.
    pub default_depths: (usize, usize, usize),
    /// Set when the `s` formula gave a value below one.
    pub s_floored: bool,
    pub budget: u128,
    /// `|W \ {0}| = c * d0`.
    pub levels: u32,
    /// `floor(alpha * n)`.
    pub max_errors: usize,
    /// `floor(c * gamma * n)`.
    pub prune_limit: usize,
}

fn ceil_f64(x: f64) -> Option<i64> {
    x.is_finite().then(|| x.ceil() as i64)
}

impl DetPlan {
    pub fn new(code: &TannerCode, alpha: Rational, delta: Rational) -> Result<Self> {
        if !(alpha > int(0) && alpha <= int(1)) {
            return usage(format!("alpha must lie in (0, 1], got {alpha}"));
        }
        if !(delta > int(0) && delta <= int(1)) {
            return usage(format!("delta must lie in (0, 1], got {delta}"));
        }
        let d0 = code.d0()?;
        let c = code.c();
        let n = code.n();
        let d0r = int(d0 as i64);
        let cr = int(c as i64);
        if &delta * &d0r <= int(2) {
            return usage(format!(
                "the deterministic decoder needs delta*d0 > 2, got delta = {delta}, d0 = {d0}"
            ));
        }
        let t = &d0r / int(2);
        let eps0 = &t - delta.recip();
        let eps = &eps0 * &delta / (int(2) * &cr * &t * &t);
        let quality = (&delta * &d0r - int(1)) / (&d0r - int(1));
        let gamma = (int(1) + &cr / &t).recip() * &quality * &alpha;
        let log_step = (1.0 - rational::to_f64(&eps)).ln();
        let s_raw = ceil_f64((rational::to_f64(&quality) / 2.0).ln() / log_step).unwrap_or(0);
        let s_floored = s_raw < 1;
        let s = s_raw.max(1) as usize;
        let r = ceil_f64(rational::to_f64(&gamma).ln() / log_step).unwrap_or(0).max(0) as usize;
        let gamma_n = &gamma * int(n as i64);
        let r_prime = ceil_f64(rational::to_f64(&gamma_n).log2())
            .map_or(0, |v| (v + 1).max(0)) as usize;
        let n_big = int(n as i64);
        Ok(Self {
            max_errors: rational::floor_usize(&(&alpha * &n_big)),
            prune_limit: rational::floor_usize(&(&cr * &gamma * &n_big)),
            alpha,
            delta,
            gamma,
            eps,
            s,
            r,
            r_prime,
            default_depths: (s, r, r_prime),
            s_floored,
            budget: DEFAULT_BRANCH_BUDGET,
            levels: (c * d0) as u32,
        })
    }

    pub fn with_depths(mut self, s: usize, r: usize, r_prime: usize) -> Self {
        self.s = s;
        self.r = r;
        self.r_prime = r_prime;
        self
    }

    pub fn with_budget(mut self, budget: u128) -> Self {
        self.budget = budget;
        self
    }

    fn geometric(&self, depth: usize) -> u128 {
        let l = self.levels as u128;
        let mut term: u128 = 1;
        let mut total: u128 = 0;
        for _ in 0..depth {
            term = term.saturating_mul(l);
            total = total.saturating_add(term);
        }
        total
    }

    /// Upper bound on level applications in one [`deep_flip`] call.
    pub fn deep_branch_steps(&self) -> u128 {
        self.geometric(self.s).saturating_add(self.s as u128)
    }

    /// Upper bound on level applications in one [`main_decode`] call.
    pub fn main_branch_steps(&self) -> u128 {
        let leaves = (self.levels as u128).saturating_pow(self.r.min(u32::MAX as usize) as u32);
        let per_leaf = (self.r_prime as u128).saturating_mul(self.deep_branch_steps());
        self.geometric(self.r)
            .saturating_add(leaves.saturating_mul(per_leaf))
    }

    /// `|U| > c * 2^-stage * gamma * n`, exactly.
    fn stage_fails(&self, unsat: usize, stage: usize) -> bool {
        if unsat == 0 {
            return false;
        }
        if stage >= 100 {
            return true;
        }
        (unsat as u128) << stage > self.prune_limit as u128
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SearchStats {
    /// Level applications, replays included.
    pub steps: u64,
    /// Branches that reached full depth without pruning.
    pub leaves: u64,
    pub pruned: u64,
}

fn check_level(code: &TannerCode, q: VoteLevel) -> Result<()> {
    let scale = (code.c() * code.d0()?) as u32;
    if q.scale != scale {
        return usage(format!("vote level scale {} but c*d0 = {scale}", q.scale));
    }
    if q.numerator == 0 {
        return usage("vote level 0 flips nothing; use a nonzero level");
    }
    Ok(())
}

/// Flips exactly the bits whose vote equals `q`.
pub fn deter_flip(code: &TannerCode, x: &BitVec, q: VoteLevel) -> Result<BitVec> {
    check_level(code, q)?;
    let mut state = DecodeState::new(code, x.clone())?;
    deter_flip_state(&mut state, q.numerator);
    Ok(state.into_x())
}

/// In-place [`deter_flip`]; returns how many bits flipped.
pub fn deter_flip_state(state: &mut DecodeState<'_>, numerator: u32) -> usize {
    state.accumulate_votes();
    let chosen: Vec<usize> = state
        .voted()
        .iter()
        .filter(|&i| state.votes()[i] == numerator)
        .collect();
    state.clear_votes();
    for &i in &chosen {
        state.flip_bit(i);
    }
    chosen.len()
}

/// `P_q` for every nonzero level that occurs, positions ascending.
pub fn vote_buckets(code: &TannerCode, x: &BitVec) -> Result<BTreeMap<VoteLevel, Vec<usize>>> {
    let mut state = DecodeState::new(code, x.clone())?;
    let scale = state.vote_scale();
    state.accumulate_votes();
    let mut out: BTreeMap<VoteLevel, Vec<usize>> = BTreeMap::new();
    for i in state.voted().iter() {
        out.entry(VoteLevel {
            numerator: state.votes()[i],
            scale,
        })
        .or_default()
        .push(i);
    }
    for list in out.values_mut() {
        list.sort_unstable();
    }
    Ok(out)
}

struct Search<'s, 'a> {
    state: &'s mut DecodeState<'a>,
    plan: &'s DetPlan,
    pool: Vec<Vec<Vec<u32>>>,
    path: Vec<u32>,
    stats: SearchStats,
}

impl<'s, 'a> Search<'s, 'a> {
    fn new(state: &'s mut DecodeState<'a>, plan: &'s DetPlan) -> Self {
        state.enable_journal();
        Self {
            state,
            plan,
            pool: Vec::new(),
            path: Vec::new(),
            stats: SearchStats::default(),
        }
    }

    /// Current vote partition: entry `q - 1` holds `P_q`.
    fn buckets(&mut self) -> Vec<Vec<u32>> {
        let mut b = self
            .pool
            .pop()
            .unwrap_or_else(|| vec![Vec::new(); self.plan.levels as usize]);
        for list in &mut b {
            list.clear();
        }
        self.state.accumulate_votes();
        for i in self.state.voted().iter() {
            b[self.state.votes()[i] as usize - 1].push(i as u32);
        }
        self.state.clear_votes();
        b
    }

    fn apply(&mut self, bucket: &[u32]) {
        self.stats.steps += 1;
        for &i in bucket {
            self.state.flip_bit(i as usize);
        }
    }

    /// DeepFlip on the current word. On success the word is replaced by the
    /// winning branch (journaled) and true is returned.
    fn deep(&mut self) -> bool {
        let mut best: Option<(usize, Vec<u32>)> = None;
        let base = self.path.len();
        self.deep_level(0, base, &mut best);
        match best {
            None => false,
            Some((_, seq)) => {
                for q in seq {
                    let b = self.buckets();
                    self.apply(&b[q as usize - 1]);
                    self.pool.push(b);
                }
                true
            }
        }
    }

    fn deep_level(&mut self, depth: usize, base: usize, best: &mut Option<(usize, Vec<u32>)>) {
        let b = self.buckets();
        for q in 1..=self.plan.levels {
            let mark = self.state.checkpoint();
            self.apply(&b[q as usize - 1]);
            let unsat = self.state.unsat_count();
            if unsat > self.plan.prune_limit {
                self.stats.pruned += 1;
            } else if depth + 1 == self.plan.s {
                self.stats.leaves += 1;
                if best.as_ref().is_none_or(|(k, _)| unsat < *k) {
                    let mut seq = self.path[base..].to_vec();
                    seq.push(q);
                    *best = Some((unsat, seq));
                }
            } else {
                self.path.push(q);
                self.deep_level(depth + 1, base, best);
                self.path.pop();
            }
            self.state.rollback(mark);
        }
        self.pool.push(b);
    }

    /// MainDecode's outer enumeration. Returns the accepted level sequence.
    fn main(&mut self, input: &BitVec, depth: usize) -> Option<Vec<u32>> {
        if depth == self.plan.r {
            return self.finish(input).then(|| self.path.clone());
        }
        let b = self.buckets();
        let mut found = None;
        for q in 1..=self.plan.levels {
            let mark = self.state.checkpoint();
            self.apply(&b[q as usize - 1]);
            self.path.push(q);
            found = self.main(input, depth + 1);
            self.path.pop();
            if found.is_some() {
                break;
            }
            self.state.rollback(mark);
        }
        self.pool.push(b);
        found
    }

    /// Runs the `r'` DeepFlip stages and the acceptance test. Leaves the
    /// state modified only when accepted.
    fn finish(&mut self, input: &BitVec) -> bool {
        let mark = self.state.checkpoint();
        for stage in 1..=self.plan.r_prime {
            if !self.deep() || self.plan.stage_fails(self.state.unsat_count(), stage) {
                self.state.rollback(mark);
                return false;
            }
        }
        self.stats.leaves += 1;
        let accepted = self.state.unsat_count() == 0
            && hamming_distance(input, self.state.x()).is_ok_and(|dist| dist <= self.plan.max_errors);
        if !accepted {
            self.state.rollback(mark);
        }
        accepted
    }
}

fn check_budget(required: u128, budget: u128) -> Result<()> {
    if required > budget {
        return Err(Error::Budget { required, budget });
    }
    Ok(())
}

/// Pruned search over `(W \ {0})^s`. Returns the surviving word with the
/// fewest unsatisfied checks (first found on ties), or `None` when every
/// branch was pruned.
pub fn deep_flip(code: &TannerCode, x: &BitVec, plan: &DetPlan) -> Result<(Option<BitVec>, SearchStats)> {
    if plan.s == 0 {
        return usage("deep_flip needs s >= 1");
    }
    check_budget(plan.deep_branch_steps(), plan.budget)?;
    let mut state = DecodeState::new(code, x.clone())?;
    let mut search = Search::new(&mut state, plan);
    let ok = search.deep();
    let stats = search.stats;
    Ok((ok.then(|| state.into_x()), stats))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DetOutcome {
    Decoded {
        y: BitVec,
        /// The accepted outer level sequence.
        branch: Vec<u32>,
    },
    Failed,
}

impl DetOutcome {
    pub fn is_decoded(&self) -> bool {
        matches!(self, Self::Decoded { .. })
    }
}

/// Enumerates outer sequences in lexicographic order and returns the first
/// whose `r'` DeepFlip stages pass every pruning test and end at a codeword
/// within `alpha * n` of the input.
pub fn main_decode(code: &TannerCode, x: &BitVec, plan: &DetPlan) -> Result<(DetOutcome, SearchStats)> {
    if plan.s == 0 && plan.r_prime > 0 {
        return usage("main_decode needs s >= 1 when r' > 0");
    }
    check_budget(plan.main_branch_steps(), plan.budget)?;
    let mut state = DecodeState::new(code, x.clone())?;
    let mut search = Search::new(&mut state, plan);
    let branch = search.main(x, 0);
    let stats = search.stats;
    Ok(match branch {
        Some(branch) => {
            let y = state.into_x();
            if !code.is_codeword(&y)? || hamming_distance(x, &y)? > plan.max_errors {
                return Err(Error::Internal("accepted word failed re-verification".into()));
            }
            (DetOutcome::Decoded { y, branch }, stats)
        }
        None => (DetOutcome::Failed, stats),
    })
}
