mod common;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::{for_each_subset, k8_hamming};
use tanner_core::harness::{
    bench_linear_time, decoder_warnings, random_code, read_vector, run_decoder, write_vector, BenchConfig,
    DecoderSpec, RunOutcome,
};
use tanner_core::rational::{parse, Rational};
use tanner_core::tanner::{corrupt, Corruption};
use tanner_core::{BitVec, InnerCode, TannerCode};

fn q(s: &str) -> Rational {
    parse(s).unwrap()
}

fn mid_code() -> TannerCode {
    random_code(3, 16, 1024, &InnerCode::extended_hamming(4).unwrap(), 2).unwrap()
}

fn rand_spec(alpha: Option<&str>) -> DecoderSpec {
    DecoderSpec::Rand {
        delta: q("0.75"),
        alpha: alpha.map(q),
        max_rounds: None,
    }
}

#[test]
fn rand_pipeline_recovers_sampled_codeword() {
    let code = mid_code();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for trial in 0..20 {
        let y = code.sample_codeword(&mut rng);
        let (x, flipped) = corrupt(&y, &Corruption::Weight(8), &mut rng).unwrap();
        let (report, out) = run_decoder(&code, &x, &rand_spec(Some("0.01")), trial).unwrap();
        assert_eq!(report.outcome, RunOutcome::Decoded);
        assert_eq!(out, y);
        assert_eq!(report.distance, flipped.len());
        assert_eq!(report.unsat_trajectory.last(), Some(&0));
    }
}

#[test]
fn failure_returns_input_word() {
    let code = mid_code();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (x, _) = corrupt(&BitVec::zeros(code.n()), &Corruption::Weight(400), &mut rng).unwrap();
    let (report, out) = run_decoder(&code, &x, &rand_spec(None), 0).unwrap();
    assert_eq!(report.outcome, RunOutcome::Failed);
    assert_eq!(out, x);
}

#[test]
fn distance_limit_rejects_far_codewords() {
    let code = mid_code();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (x, _) = corrupt(&BitVec::zeros(code.n()), &Corruption::Weight(8), &mut rng).unwrap();
    let (loose, _) = run_decoder(&code, &x, &rand_spec(Some("0.01")), 0).unwrap();
    assert_eq!(loose.outcome, RunOutcome::Decoded);
    let (tight, _) = run_decoder(&code, &x, &rand_spec(Some("0.005")), 0).unwrap();
    assert_eq!(tight.outcome, RunOutcome::Failed);
}

#[test]
fn det_pipeline_with_overridden_depths() {
    let f = k8_hamming();
    let spec = DecoderSpec::Det {
        alpha: f.alpha.clone(),
        delta: f.delta().clone(),
        depths: Some((1, 2, 1)),
        budget: u128::MAX,
    };
    assert!(decoder_warnings(&f.code, &spec).is_empty());
    let y = f.code.sample_codeword(&mut ChaCha8Rng::seed_from_u64(4));
    for_each_subset(f.code.n(), f.max_errors(), |set| {
        let mut x = y.clone();
        set.iter().for_each(|&i| x.flip(i));
        let (report, out) = run_decoder(&f.code, &x, &spec, 0).unwrap();
        assert_eq!(report.outcome, RunOutcome::Decoded, "{set:?}");
        assert_eq!(out, y);
        assert!(report.branch.is_some());
    });
}

#[test]
fn det_default_depths_are_refused() {
    let f = k8_hamming();
    let spec = DecoderSpec::det(f.alpha.clone(), f.delta().clone());
    assert!(decoder_warnings(&f.code, &spec).iter().any(|w| w.contains("override")));
    assert!(run_decoder(&f.code, &BitVec::zeros(f.code.n()), &spec, 0).is_err());
}

#[test]
fn weak_expansion_is_flagged() {
    let code = random_code(2, 7, 14, &InnerCode::hamming(3).unwrap(), 0).unwrap();
    let spec = DecoderSpec::Rand {
        delta: q("0.5"),
        alpha: None,
        max_rounds: None,
    };
    assert!(decoder_warnings(&code, &spec).iter().any(|w| w.contains("<= 2")));
    assert!(decoder_warnings(&code, &rand_spec(None)).is_empty());
}

#[test]
fn rounds_grow_logarithmically() {
    let cfg = BenchConfig {
        c: 3,
        inner: InnerCode::extended_hamming(4).unwrap(),
        sizes: vec![1 << 10, 1 << 11, 1 << 12, 1 << 13],
        trials: 5,
        warmup: 0,
        rho: q("0.002"),
        delta: q("0.75"),
        seed: 5,
    };
    let rows = bench_linear_time(&cfg).unwrap();
    assert_eq!(rows.len(), 4);
    for w in rows.windows(2) {
        assert!(w[1].median_rounds - w[0].median_rounds <= 3.0);
        assert_eq!(w[1].errors, w[1].n / 500);
    }
    assert!(rows.iter().all(|r| r.successes == r.trials));
}

#[test]
fn vector_files_round_trip() {
    let dir = std::env::temp_dir().join(format!("tanner-vec-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("v.txt");
    let x = BitVec::from_support(37, [0, 5, 36]).unwrap();
    write_vector(&path, &x).unwrap();
    assert_eq!(read_vector(&path).unwrap(), x);
    assert!(read_vector(&dir.join("missing.txt")).is_err());
    std::fs::remove_dir_all(&dir).unwrap();
}
