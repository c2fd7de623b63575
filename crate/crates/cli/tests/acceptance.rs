//! Acceptance suite: one test per criterion, each printing a pass line with
//! its elapsed time (visible under `--nocapture`). Run with
//! `cargo test -p tentmorph-cli --test acceptance`.

use std::collections::BTreeSet;
use std::process::Command;
use std::time::{Duration, Instant};

use tentmorph::bounds::{self, AvoidanceOutcome};
use tentmorph::commuter::CommuterEvaluator;
use tentmorph::numerics::{Rational, Tristate, UnitPoint};
use tentmorph::patterns::{self, Permutation};
use tentmorph::tentmap::TentMap;

fn r(s: &str) -> Rational {
    s.parse().unwrap()
}

fn u(s: &str) -> UnitPoint {
    s.parse().unwrap()
}

fn map(mu: &str) -> TentMap {
    TentMap::new(r(mu)).unwrap()
}

fn perm(s: &str) -> Permutation {
    s.parse().unwrap()
}

struct Rng(u64);

impl Rng {
    fn next(&mut self) -> u64 {
        self.0 ^= self.0 << 13;
        self.0 ^= self.0 >> 7;
        self.0 ^= self.0 << 17;
        self.0
    }

    fn below(&mut self, n: u64) -> u64 {
        self.next() % n
    }
}

fn report(criterion: usize, label: &str, started: Instant, budget: Duration) {
    let elapsed = started.elapsed();
    println!("acceptance {criterion:02} {label}: PASS ({elapsed:.2?})");
    assert!(
        elapsed <= budget,
        "criterion {criterion} exceeded its runtime budget: {elapsed:.2?} > {budget:.2?}"
    );
}

#[test]
fn criterion_01_example_reproduction() {
    let started = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_tentmorph"))
        .args(["pat", "--mu", "1", "--x", "23/100", "--n", "5"])
        .output()
        .expect("binary runs");
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "24513\n");

    // The stated budget is on the computation itself, not process startup:
    // time the library call, best of ten.
    let m = map("1");
    let x = u("23/100");
    let best = (0..10)
        .map(|_| {
            let t = Instant::now();
            let pi = patterns::pat(&x, &m, 5).unwrap();
            assert_eq!(pi.to_string(), "24513");
            t.elapsed()
        })
        .min()
        .unwrap();
    assert!(best < Duration::from_millis(1), "pattern computation took {best:.2?}");
    report(1, "pattern of 0.23 under T is 24513", started, Duration::from_secs(30));
}

#[test]
fn criterion_02_short_forbidden_patterns() {
    let started = Instant::now();
    let full = map("1");
    let low = map("3/4");

    assert!(!patterns::is_allowed(&full, &perm("321")));

    let full_four = patterns::enumerate_allowed(&full, 4).unwrap().patterns;
    let low_four = patterns::enumerate_allowed(&low, 4).unwrap().patterns;
    for s in ["2341", "3412", "3124"] {
        assert!(full_four.contains(&perm(s)), "{s} must be allowed for T");
        assert!(!low_four.contains(&perm(s)), "{s} must be forbidden for T_3/4");
    }
    assert!(low_four.is_subset(&full_four));
    report(2, "length-4 separations between T and T_3/4", started, Duration::from_secs(1));
}

#[test]
fn criterion_03_estimate_column() {
    let started = Instant::now();
    let expected = [
        (6, "0.923902"),
        (7, "0.965933"),
        (8, "0.983722"),
        (9, "0.992030"),
        (10, "0.996055"),
        (11, "0.998037"),
        (12, "0.999021"),
    ];
    for (n, text) in expected {
        let enc = bounds::mu_estimate(n).unwrap();
        assert_eq!(enc.lo.to_decimal(6), text, "n={n}");
        assert_eq!(enc.hi.to_decimal(6), text, "n={n}");
    }
    report(3, "estimate column to six decimals", started, Duration::from_secs(1));
}

#[test]
fn criterion_04_exact_threshold_column() {
    let started = Instant::now();
    let tol = r("1e-7");
    let rows = bounds::table1(4, 12, &tol).unwrap();
    let expected = [
        (4, "0.809017"),
        (5, "0.919643"),
        (6, "0.963781"),
        (7, "0.982974"),
        (8, "0.991791"),
        (9, "0.995982"),
        (10, "0.998016"),
        (11, "0.999015"),
        (12, "0.999509"),
    ];
    assert_eq!(rows.len(), expected.len());
    for (row, (n, text)) in rows.iter().zip(expected) {
        assert_eq!(row.n, n);
        assert_eq!(row.mu_exact_6dp, text, "n={n}");
        assert!(&row.mu_exact_hi - &row.mu_exact_lo <= tol);
        // The estimate column is strictly conservative wherever defined.
        if let Some(estimate) = &row.mu_estimate {
            assert!(estimate.hi < row.mu_exact_lo, "n={n}");
        }
    }
    report(4, "exact threshold column to six decimals", started, Duration::from_secs(600));
}

#[test]
fn criterion_05_exact_commutation() {
    let started = Instant::now();
    let mut rng = Rng(0xacce_0005);
    for _ in 0..1000 {
        let mu = Rational::new(1, 2) + Rational::new(1 + rng.below(1024) as i64, 2048);
        let evaluator = CommuterEvaluator::new(mu.clone()).unwrap();
        let x = UnitPoint::new(Rational::new(rng.below(1_000_001) as i64, 1_000_000)).unwrap();
        let d = 1 + rng.below(30) as usize;
        let residual = evaluator.commutation_residual(&x, d);
        assert!(residual.is_zero(), "nonzero residual at mu={mu} x={x} d={d}");
    }
    report(5, "commutation identity exact for 1000 random triples", started, Duration::from_secs(10));
}

#[test]
fn criterion_06_uniform_convergence_bound() {
    let started = Instant::now();
    let slack = Rational::pow2(-30);
    for mu in ["3/5", "3/4", "9/10", "99/100"] {
        let evaluator = CommuterEvaluator::new(r(mu)).unwrap();
        let distance = evaluator.uniform_distance_to_identity(1000, 30);
        let bound = &(Rational::one() - &r(mu)) + &slack;
        assert!(distance <= bound, "mu={mu}: distance {distance} exceeds bound {bound}");
    }
    report(6, "uniform distance to the identity within 1-mu", started, Duration::from_secs(30));
}

#[test]
fn criterion_07_peak_deviation() {
    let started = Instant::now();
    let mut rng = Rng(0xacce_0007);
    for _ in 0..50 {
        let mu = Rational::new(1, 2) + Rational::new(1 + rng.below(2048) as i64, 4096);
        assert!(bounds::peak_deviation_check(&mu, 40).unwrap(), "deviation bound fails at mu={mu}");
    }
    report(7, "peak deviation bound at 50 random heights", started, Duration::from_secs(30));
}

#[test]
fn criterion_08_sigma_localization() {
    let started = Instant::now();
    let full = map("1");
    let mut rng = Rng(0xacce_0008);
    for n in 3..=8 {
        let sigma = patterns::sigma(n).unwrap();
        let (lo, hi) = patterns::sigma_realization_interval(n).unwrap();
        let mid = UnitPoint::new((&lo + &hi) * r("1/2")).unwrap();
        assert_eq!(patterns::pat(&mid, &full, n).unwrap(), sigma, "midpoint fails at n={n}");

        let mut exterior = 0;
        while exterior < 100 {
            let y = Rational::new(rng.below(1_000_001) as i64, 1_000_000);
            if y >= lo && y <= hi {
                continue;
            }
            exterior += 1;
            if let Ok(pi) = patterns::pat(&UnitPoint::new(y.clone()).unwrap(), &full, n) {
                assert_ne!(pi, sigma, "sigma_{n} realized at exterior point {y}");
            }
        }
    }
    report(8, "sigma_n realized exactly on its interval", started, Duration::from_secs(30));
}

#[test]
fn criterion_09_range_gap_exclusion() {
    let started = Instant::now();
    let evaluator = CommuterEvaluator::new(r("3/4")).unwrap();
    let d = 40;
    let gaps = evaluator.range_gaps(4, d);
    assert_eq!(gaps.len(), 1 + 2 + 4 + 8);
    let shrink = Rational::pow2(-(d as i64));
    let grid = 10_000usize;
    let den = Rational::from_integer(grid as i64);
    for k in 0..=grid {
        let x = Rational::from_integer(k as i64) / den.clone();
        let value = evaluator.eval_depth(&UnitPoint::new(x.clone()).unwrap(), d);
        for gap in &gaps {
            let (lo, hi) = gap.certified_interval();
            assert!(
                value <= &lo + &shrink || value >= &hi - &shrink,
                "f_{d}({x}) = {value} lies inside the certified gap at level {} index {}",
                gap.level,
                gap.index
            );
        }
    }
    report(9, "10^4-point sweep avoids all certified range gaps", started, Duration::from_secs(60));
}

#[test]
fn criterion_10_oracle_equivalence() {
    let started = Instant::now();
    let grid = 10_000usize;
    for mu in ["1", "3/4"] {
        let m = map(mu);
        for n in 1..=6 {
            let enumerated: BTreeSet<Permutation> =
                patterns::enumerate_allowed(&m, n).unwrap().patterns.iter().cloned().collect();
            let mut oracle: BTreeSet<Permutation> = BTreeSet::new();
            for k in 1..grid {
                let x = UnitPoint::new(Rational::new(k as i64, grid as i64)).unwrap();
                if let Ok(pi) = patterns::pat(&x, &m, n) {
                    oracle.insert(pi);
                }
            }
            assert_eq!(oracle, enumerated, "oracle set differs at mu={mu}, n={n}");
        }
    }
    report(10, "dense-sampling oracle equals the enumeration", started, Duration::from_secs(120));
}

#[test]
fn criterion_11_strict_inclusion_with_separator() {
    let started = Instant::now();
    let full_six = patterns::enumerate_allowed(&map("1"), 6).unwrap().patterns;
    let low_six = patterns::enumerate_allowed(&map("3/4"), 6).unwrap().patterns;
    let sigma6 = patterns::sigma(6).unwrap();
    assert_eq!(sigma6.to_string(), "561234");
    assert!(low_six.is_subset(&full_six));
    assert!(full_six.contains(&sigma6));
    assert!(!low_six.contains(&sigma6));
    assert!(low_six.len() < full_six.len());
    // Consistent with the exact threshold at n = 6 sitting above 3/4.
    assert_eq!(
        bounds::certify_avoidance(&r("3/4"), 6, 40).unwrap(),
        AvoidanceOutcome::CertifiedAvoids
    );
    report(11, "strict inclusion separated by sigma_6", started, Duration::from_secs(60));
}

#[test]
fn criterion_12_conjecture_evidence() {
    let started = Instant::now();
    let rows = bounds::conjecture_evidence(200, 40).unwrap();
    assert_eq!(rows.len(), 200);
    for row in &rows {
        assert!(
            row.conj3_ok,
            "peak bound violated beyond enclosure tolerance at mu={}",
            row.mu
        );
        assert!(
            !row.conj3_certified_violation,
            "certified violation of the peak bound at mu={}",
            row.mu
        );
        assert_ne!(
            row.monotone_vs_prev,
            Tristate::No,
            "certified monotonicity violation at mu={}",
            row.mu
        );
    }
    // The certified comparisons must actually carry evidence, not all be
    // inconclusive.
    let certified = rows.iter().filter(|r| r.monotone_vs_prev == Tristate::Yes).count();
    assert!(certified >= 150, "only {certified} of 199 comparisons certified");
    report(12, "conjecture evidence grid is clean", started, Duration::from_secs(120));
}
