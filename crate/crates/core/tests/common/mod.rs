#![allow(dead_code)]

use tanner_core::graph::{expansion_profile_exhaustive, generate_regular, ExpansionProfile};
use tanner_core::rational::{int, ratio, Rational};
use tanner_core::{BipartiteGraph, InnerCode, TannerCode};

pub struct Fixture {
    pub name: String,
    pub code: TannerCode,
    pub alpha: Rational,
    pub profile: ExpansionProfile,
}

impl Fixture {
    pub fn delta(&self) -> &Rational {
        &self.profile.realized_delta
    }

    pub fn d0(&self) -> usize {
        self.code.d0().unwrap()
    }

    pub fn max_errors(&self) -> usize {
        self.profile.max_size
    }

    /// `delta * d0 > bound`.
    pub fn delta_d0_exceeds(&self, bound: i64) -> bool {
        self.delta() * int(self.d0() as i64) > int(bound)
    }
}

fn make(name: impl Into<String>, code: TannerCode, max_size: usize) -> Fixture {
    let alpha = ratio(max_size as i64, code.n() as i64);
    let profile = expansion_profile_exhaustive(code.graph(), &alpha).unwrap();
    Fixture {
        name: name.into(),
        code,
        alpha,
        profile,
    }
}

/// Edges of the complete graph `K_m` as bits, its vertices as checks; each
/// check lists its edges in ascending order.
pub fn complete_graph_code(m: usize, inner: InnerCode) -> TannerCode {
    let mut adj = vec![Vec::new(); m];
    let mut e = 0;
    for a in 0..m {
        for b in a + 1..m {
            adj[a].push(e);
            adj[b].push(e);
            e += 1;
        }
    }
    let g = BipartiteGraph::from_right_adj(e, &adj).unwrap();
    TannerCode::new(g, inner).unwrap()
}

/// `K_8` with the `[7,4,3]` Hamming code: n = 28, 2 errors, delta = 3/4.
pub fn k8_hamming() -> Fixture {
    make("K8/hamming7", complete_graph_code(8, InnerCode::hamming(3).unwrap()), 2)
}

/// `K_16` with the `[15,11,3]` Hamming code: n = 120, 2 errors, delta = 3/4.
pub fn k16_hamming() -> Fixture {
    make("K16/hamming15", complete_graph_code(16, InnerCode::hamming(4).unwrap()), 2)
}

pub fn random_fixture(c: usize, d: usize, n: usize, inner: InnerCode, seed: u64, max_size: usize) -> Fixture {
    let g = generate_regular(c, &vec![d; c * n / d], n, seed).unwrap();
    let name = format!("random({c},{d}) n={n} seed={seed}");
    make(name, TannerCode::new(g, inner).unwrap(), max_size)
}

/// Random graphs with at most 20 left vertices, small enough to enumerate
/// every set up to the fixture's size bound.
pub fn tiny_random_fixtures() -> Vec<Fixture> {
    let parity = |d| InnerCode::parity(d).unwrap();
    let mut out = Vec::new();
    for seed in 0..3 {
        out.push(random_fixture(2, 4, 16, parity(4), seed, 5));
        out.push(random_fixture(3, 6, 12, parity(6), seed, 4));
        out.push(random_fixture(2, 5, 20, parity(5), seed, 5));
        out.push(random_fixture(3, 5, 20, InnerCode::repetition(5).unwrap(), seed, 4));
        out.push(random_fixture(4, 8, 18, InnerCode::extended_hamming(3).unwrap(), seed, 4));
        out.push(random_fixture(2, 7, 14, InnerCode::hamming(3).unwrap(), seed, 4));
    }
    out
}

/// `K_6` with the length-5 repetition code: n = 15, 4 errors, delta = 1/2.
pub fn k6_repetition() -> Fixture {
    make("K6/rep5", complete_graph_code(6, InnerCode::repetition(5).unwrap()), 4)
}

/// Largest `s <= max` whose worst expansion over sizes `1..=s` keeps
/// `delta * d0 > bound`.
pub fn largest_size_with(f: &Fixture, bound: i64) -> usize {
    let d0 = int(f.d0() as i64);
    let mut worst: Option<Rational> = None;
    let mut best = 0;
    for s in 1..=f.max_errors() {
        let factor = f.profile.factor(s);
        let w = match worst {
            Some(w) if w < factor => w,
            _ => factor,
        };
        if &w * &d0 > int(bound) {
            best = s;
        }
        worst = Some(w);
    }
    best
}

/// Among a few seeds, the random graph keeping `delta * d0 > 2` up to the
/// largest size.
pub fn decodable_random_fixture(c: usize, d: usize, n: usize, inner: InnerCode, cap: usize) -> Fixture {
    let (seed, size) = (0..16)
        .map(|seed| {
            let f = random_fixture(c, d, n, inner.clone(), seed, cap);
            (seed, largest_size_with(&f, 2))
        })
        .max_by_key(|&(seed, size)| (size, std::cmp::Reverse(seed)))
        .unwrap();
    random_fixture(c, d, n, inner, seed, size)
}

/// Fixtures with `delta * d0 > 2`, the regime of both decoders.
pub fn decoding_fixtures() -> Vec<Fixture> {
    vec![
        k8_hamming(),
        k16_hamming(),
        k6_repetition(),
        decodable_random_fixture(3, 16, 48, InnerCode::extended_hamming(4).unwrap(), 4),
    ]
}

/// All subsets of `0..n` with sizes `1..=max`, in lexicographic order per size.
pub fn for_each_subset(n: usize, max: usize, mut visit: impl FnMut(&[usize])) {
    fn rec(n: usize, max: usize, start: usize, cur: &mut Vec<usize>, visit: &mut dyn FnMut(&[usize])) {
        for i in start..n {
            cur.push(i);
            visit(cur);
            if cur.len() < max {
                rec(n, max, i + 1, cur, visit);
            }
            cur.pop();
        }
    }
    rec(n, max, 0, &mut Vec::new(), &mut visit);
}

pub fn count_subsets(n: usize, max: usize) -> u64 {
    let mut total = 0u64;
    let mut binom = 1u64;
    for s in 1..=max.min(n) {
        binom = binom * (n - s + 1) as u64 / s as u64;
        total += binom;
    }
    total
}
