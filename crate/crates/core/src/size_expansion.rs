//! The size-expansion function: how much expansion survives on sets `k`
//! times larger than the guaranteed size, as the value of a small LP.
//!
//! Everything here is exact rational arithmetic. With `a = 1 - 1/k` the LP
//! minimizes `(1/k) sum_i beta_i` subject to `sum_i i*beta_i = k` and
//! `sum_i (1 - a^i) beta_i >= delta`; its optimum sits on two adjacent
//! indices `i, i+1`, with `i` the bracket of `delta` between consecutive
//! values of `h(i) = k(1 - a^i)/i`.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{usage, Error, Result};
use crate::rational::{self, int, Rational};

fn validate(delta: &Rational, k: &Rational) -> Result<()> {
    if !(delta > &Rational::zero() && delta <= &Rational::one()) {
        return usage(format!("delta must lie in (0, 1], got {delta}"));
    }
    if k <= &Rational::one() {
        return usage(format!("k must exceed 1, got {k}"));
    }
    Ok(())
}

fn base(k: &Rational) -> Rational {
    Rational::one() - k.recip()
}

/// `h(i) = k (1 - a^i) / i` for `i >= 1`.
fn coverage_ratio(k: &Rational, a_pow: &Rational, i: usize) -> Rational {
    k * (Rational::one() - a_pow) / int(i as i64)
}

/// Smallest `i >= 1` with `h(i+1) <= delta <= h(i)`; also returns `a^i`.
pub fn bracket_index(delta: &Rational, k: &Rational) -> Result<(usize, Rational)> {
    validate(delta, k)?;
    let a = base(k);
    // h(i) <= k/i, so h(i+1) < delta once i + 1 > k/delta.
    let bound = rational::floor_usize(&(k / delta)) + 2;
    let mut a_pow = a.clone();
    for i in 1..=bound {
        let next = &a_pow * &a;
        if &coverage_ratio(k, &next, i + 1) <= delta {
            return Ok((i, a_pow));
        }
        a_pow = next;
    }
    Err(Error::Internal(format!(
        "no bracket for delta = {delta}, k = {k} below i = {bound}"
    )))
}

fn piece_value(delta: &Rational, k: &Rational, i: usize, a_pow: &Rational) -> Rational {
    (delta - a_pow) / (k - (k + int(i as i64)) * a_pow)
}

/// `f_delta(k)`.
pub fn f_delta(delta: &Rational, k: &Rational) -> Result<Rational> {
    let (i, a_pow) = bracket_index(delta, k)?;
    Ok(piece_value(delta, k, i, &a_pow))
}

/// `f_{d,delta}(k) = max(f_delta(k), 1/d)`.
pub fn f_d_delta(delta: &Rational, d: usize, k: &Rational) -> Result<Rational> {
    if d < 2 {
        return usage(format!("d must be at least 2, got {d}"));
    }
    let f = f_delta(delta, k)?;
    let floor = Rational::new(BigInt::one(), BigInt::from(d));
    Ok(if f < floor { floor } else { f })
}

/// `delta / k`, the bound from restricting to any subset of guaranteed size.
pub fn trivial_bound(delta: &Rational, k: &Rational) -> Result<Rational> {
    validate(delta, k)?;
    Ok(delta / k)
}

/// Matching primal and dual solutions of the LP.
#[derive(Clone, Debug, PartialEq)]
pub struct LpCertificate {
    pub support_index: usize,
    pub beta_i: Rational,
    pub beta_i_plus_1: Rational,
    pub dual_x: Rational,
    pub dual_y: Rational,
    pub value: Rational,
    /// Dual constraints were checked for `1..=horizon`.
    pub horizon: usize,
}

impl LpCertificate {
    pub fn primal_value(&self, k: &Rational) -> Rational {
        (&self.beta_i + &self.beta_i_plus_1) / k
    }

    pub fn dual_value(&self, delta: &Rational, k: &Rational) -> Rational {
        k * &self.dual_x + delta * &self.dual_y
    }

    /// Re-checks feasibility of both sides, the dual constraints through the
    /// horizon, and equality of the three values.
    pub fn verify(&self, delta: &Rational, k: &Rational) -> Result<()> {
        let fail = |what: &str| Err(Error::Internal(format!("certificate at delta = {delta}, k = {k}: {what}")));
        let i = self.support_index;
        let a = base(k);
        let a_i = rational::pow(&a, i);
        let a_next = &a_i * &a;
        if self.beta_i.is_negative() || self.beta_i_plus_1.is_negative() {
            return fail("negative primal variable");
        }
        let edges = &self.beta_i * int(i as i64) + &self.beta_i_plus_1 * int(i as i64 + 1);
        if &edges != k {
            return fail("edge constraint violated");
        }
        let cover = &self.beta_i * (Rational::one() - &a_i)
            + &self.beta_i_plus_1 * (Rational::one() - &a_next);
        if &cover < delta {
            return fail("coverage constraint violated");
        }
        if self.dual_y.is_negative() {
            return fail("negative dual y");
        }
        if &self.dual_x * k != -&self.dual_y * &a_i || (k - (k + int(i as i64)) * &a_i) * &self.dual_y != Rational::one() {
            return fail("dual variables off their defining identities");
        }
        // With those identities, constraint j reads (k + i - j) a^i <= k a^j.
        // Scaled by the denominators (k = p/q, a = (p - q)/p) this becomes
        // (p + q(i - j)) A^m <= p P^m in integers, with m = |i - j| and
        // (A, P) = (P, A) swapped when j > i.
        let (p, q) = (k.numer().clone(), k.denom().clone());
        let (num_a, den_a) = (&p - &q, p.clone());
        let (mut pow_a, mut pow_p) = (BigInt::one(), BigInt::one());
        for m in 0..i {
            let j = i - m;
            let coef = &p + &q * BigInt::from(m);
            if coef * &pow_a > &p * &pow_p {
                return fail(&format!("dual constraint {j} violated"));
            }
            pow_a *= &num_a;
            pow_p *= &den_a;
        }
        let (mut pow_a, mut pow_p) = (num_a.clone(), den_a.clone());
        for j in i + 1..=self.horizon {
            let m = BigInt::from(j - i);
            let coef = &p - &q * m;
            if coef * &pow_p > &p * &pow_a {
                return fail(&format!("dual constraint {j} violated"));
            }
            pow_a *= &num_a;
            pow_p *= &den_a;
        }
        if self.primal_value(k) != self.value || self.dual_value(delta, k) != self.value {
            return fail("primal and dual values differ");
        }
        Ok(())
    }
}

/// Builds and verifies the certificate for `f_delta(k)`.
pub fn dual_certificate(delta: &Rational, k: &Rational) -> Result<LpCertificate> {
    let (i, a_i) = bracket_index(delta, k)?;
    let a = base(k);
    let a_next = &a_i * &a;
    let ii = int(i as i64);
    let ij = int(i as i64 + 1);
    // i*b1 + (i+1)*b2 = k ; (1-a^i) b1 + (1-a^{i+1}) b2 = delta
    let (p, q) = (Rational::one() - &a_i, Rational::one() - &a_next);
    let det = &ii * &q - &ij * &p;
    if det.is_zero() {
        return Err(Error::Internal("singular two-index system".into()));
    }
    let beta_i = (k * &q - &ij * delta) / &det;
    let beta_i_plus_1 = (&ii * delta - k * &p) / &det;
    let dual_y = (k - (k + &ii) * &a_i).recip();
    let dual_x = -&dual_y * &a_i / k;
    let value = piece_value(delta, k, i, &a_i);
    let ceil_k = rational::floor_usize(k) + 1;
    let cert = LpCertificate {
        support_index: i,
        beta_i,
        beta_i_plus_1,
        dual_x,
        dual_y,
        value,
        horizon: 10 * ceil_k + i,
    };
    cert.verify(delta, k)?;
    Ok(cert)
}

/// `k` with `|f_delta(k) - target| <= 1e-12`. Exact on the first piece
/// (`target >= 1/2`), bisection on dyadic rationals otherwise.
pub fn f_delta_inverse(delta: &Rational, target: &Rational) -> Result<Rational> {
    if !(delta > &Rational::zero() && delta <= &Rational::one()) {
        return usage(format!("delta must lie in (0, 1], got {delta}"));
    }
    if !(target > &Rational::zero() && target < delta) {
        return usage(format!("target must lie in (0, delta) = (0, {delta}), got {target}"));
    }
    let one = Rational::one();
    let half = Rational::new(BigInt::one(), BigInt::from(2));
    if delta == &one {
        return usage("f_1 is identically 1; no k attains a smaller target");
    }
    if target >= &half {
        return Ok((&one - target) / (&one - delta));
    }
    let tol = Rational::new(BigInt::one(), BigInt::from(10u64.pow(13)));
    let mut lo = (int(2) * (&one - delta)).recip();
    let mut hi = &lo * int(2);
    while &f_delta(delta, &hi)? > target {
        lo = hi.clone();
        hi *= int(2);
    }
    for _ in 0..400 {
        let (f_lo, f_hi) = (f_delta(delta, &lo)?, f_delta(delta, &hi)?);
        if &f_lo - &f_hi <= tol {
            return Ok(if &f_lo - target <= target - &f_hi { lo } else { hi });
        }
        let mid = (&lo + &hi) / int(2);
        if &f_delta(delta, &mid)? > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::Internal("inverse bisection did not converge".into()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BoostMode {
    /// Target expansion `1/d0 + eps`: a distance bound.
    Distance,
    /// Target expansion `2/d0 + eps`: a decoding radius.
    Decoding,
}

/// `f_delta^{-1}(m/d0 + eps)` with `m = 1` for distance, `2` for decoding.
pub fn boost_factor(delta: &Rational, d0: usize, epsilon: &Rational, mode: BoostMode) -> Result<Rational> {
    if d0 == 0 {
        return usage("d0 must be positive");
    }
    if epsilon.is_negative() {
        return usage("epsilon must be non-negative");
    }
    let m = match mode {
        BoostMode::Distance => 1,
        BoostMode::Decoding => 2,
    };
    let target = Rational::new(BigInt::from(m), BigInt::from(d0)) + epsilon;
    if &target >= delta {
        return usage(format!(
            "boost undefined: {m}/d0 + eps = {target} is not below delta = {delta}"
        ));
    }
    f_delta_inverse(delta, &target)
}

/// `k * alpha` for the boost factor `k`: the improved radius as a fraction
/// of `n`.
pub fn boosted_radius(
    delta: &Rational,
    d0: usize,
    alpha: &Rational,
    epsilon: &Rational,
    mode: BoostMode,
) -> Result<Rational> {
    Ok(boost_factor(delta, d0, epsilon, mode)? * alpha)
}

/// How far the constraint `delta - eta` can move the value: `eta/(1-delta)`.
pub fn perturbation_bound(delta: &Rational, eta: &Rational) -> Result<Rational> {
    if delta >= &Rational::one() {
        return usage("perturbation bound needs delta < 1");
    }
    Ok(eta / (Rational::one() - delta))
}

/// `(lhs, rhs)` of `(1 - 1/k)^d0 <= 1 - delta*d0/k` at `k = f_delta^{-1}(1/d0)`.
pub fn planted_claim(delta: &Rational, d0: usize) -> Result<(Rational, Rational)> {
    let target = Rational::new(BigInt::one(), BigInt::from(d0));
    let k = f_delta_inverse(delta, &target)?;
    let lhs = rational::pow(&base(&k), d0);
    let rhs = Rational::one() - delta * int(d0 as i64) / &k;
    Ok((lhs, rhs))
}

#[derive(Clone, Debug, PartialEq)]
pub struct BinomRatio {
    /// `C(km - i, m) / C(km, m)`.
    pub exact: Rational,
    /// `(1 - 1/k)^i`.
    pub upper: Rational,
    /// `i(i-1) / (2(k-1)(km-i))`.
    pub lower_gap: Rational,
}

impl BinomRatio {
    pub fn sandwich_holds(&self) -> bool {
        self.exact <= self.upper && self.exact >= &self.upper * (Rational::one() - &self.lower_gap)
    }
}

pub fn binom_ratio_bounds(k: &Rational, m: usize, i: usize) -> Result<BinomRatio> {
    if k <= &Rational::one() || m == 0 {
        return usage("need k > 1 and m >= 1");
    }
    let km = k * int(m as i64);
    if !km.is_integer() {
        return usage(format!("k*m = {km} is not an integer"));
    }
    let km = km.to_integer();
    let top = &km - BigInt::from(m);
    if BigInt::from(i) > top {
        return usage(format!("i = {i} exceeds km - m = {top}"));
    }
    let mut exact = Rational::one();
    for j in 0..i {
        let j = BigInt::from(j);
        exact *= Rational::new(&top - &j, &km - &j);
    }
    let upper = rational::pow(&base(k), i);
    let ii = int(i as i64);
    let lower_gap = &ii * (&ii - int(1))
        / (int(2) * (k - int(1)) * (Rational::from_integer(km) - &ii));
    Ok(BinomRatio {
        exact,
        upper,
        lower_gap,
    })
}

/// One line of the size-expansion table.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SizeExpansionRow {
    pub delta: f64,
    pub k: f64,
    pub f_delta: f64,
    pub f_d_delta: Option<f64>,
    pub trivial_bound: f64,
}

pub fn table_row(delta: &Rational, k: &Rational, d: Option<usize>) -> Result<SizeExpansionRow> {
    Ok(SizeExpansionRow {
        delta: rational::to_f64(delta),
        k: rational::to_f64(k),
        f_delta: rational::to_f64(&f_delta(delta, k)?),
        f_d_delta: d
            .map(|d| f_d_delta(delta, d, k).map(|v| rational::to_f64(&v)))
            .transpose()?,
        trivial_bound: rational::to_f64(&trivial_bound(delta, k)?),
    })
}
