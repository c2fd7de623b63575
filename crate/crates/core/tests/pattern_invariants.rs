//! Heavyweight invariants of the pattern enumeration, checked against an
//! independent sampling oracle.

use std::collections::BTreeSet;

use tentmorph::numerics::{Rational, UnitPoint};
use tentmorph::patterns::{self, Permutation};
use tentmorph::tentmap::TentMap;

struct Rng(u64);

impl Rng {
    fn next(&mut self) -> u64 {
        self.0 ^= self.0 << 13;
        self.0 ^= self.0 >> 7;
        self.0 ^= self.0 << 17;
        self.0
    }

    fn unit_point(&mut self) -> UnitPoint {
        let den = 1_000_003u64; // prime, so samples rarely tie with breakpoints
        let num = 1 + self.next() % (den - 2);
        UnitPoint::new(Rational::new(num as i64, den as i64)).unwrap()
    }
}

fn map(mu: &str) -> TentMap {
    TentMap::new(mu.parse().unwrap()).unwrap()
}

#[test]
fn random_sampling_oracle_is_contained_and_every_pattern_has_a_witness() {
    let mut rng = Rng(0xfeed_0001);
    for mu in ["1", "3/4", "4/5"] {
        let m = map(mu);
        for n in 2..=6 {
            let enumerated = patterns::enumerate_allowed(&m, n).unwrap().patterns;

            // Oracle direction: every sampled pattern is enumerated.
            for _ in 0..10_000 {
                let x = rng.unit_point();
                if let Ok(pi) = patterns::pat(&x, &m, n) {
                    assert!(
                        enumerated.contains(&pi),
                        "sampled pattern {pi} at x={x} missing from enumeration (mu={mu}, n={n})"
                    );
                }
            }

            // Witness direction: every enumerated pattern is re-realized.
            for pi in enumerated.iter() {
                let witness = patterns::find_witness(&m, pi)
                    .witness
                    .unwrap_or_else(|| panic!("no witness for enumerated {pi} (mu={mu}, n={n})"));
                assert_eq!(&patterns::pat(&witness, &m, n).unwrap(), pi);
            }
        }
    }
}

#[test]
fn restriction_closure_at_length_six() {
    for mu in ["1", "3/4"] {
        let m = map(mu);
        let longer = patterns::enumerate_allowed(&m, 6).unwrap().patterns;
        let shorter = patterns::enumerate_allowed(&m, 5).unwrap().patterns;
        for pi in longer.iter() {
            let restricted = pi.restriction().unwrap();
            assert!(
                shorter.contains(&restricted),
                "{pi} in the length-6 set but its restriction {restricted} missing (mu={mu})"
            );
        }
    }
}

#[test]
fn allowed_sets_nest_into_the_full_map() {
    let full = TentMap::full();
    for mu in ["3/5", "3/4", "9/10"] {
        let m = map(mu);
        for n in 2..=7 {
            let small = patterns::enumerate_allowed(&m, n).unwrap().patterns;
            let big = patterns::enumerate_allowed(&full, n).unwrap().patterns;
            assert!(small.is_subset(&big), "inclusion fails at mu={mu}, n={n}");
        }
    }
}

#[test]
fn allowed_set_growth_stays_exponential() {
    let full = TentMap::full();
    let mut sizes = Vec::new();
    for n in 1..=10 {
        sizes.push(patterns::enumerate_allowed(&full, n).unwrap().patterns.len());
    }
    // Counts for the first few lengths, cross-checked against the random
    // sampling oracle above.
    assert_eq!(&sizes[..6], &[1, 2, 5, 12, 31, 75]);
    for w in sizes.windows(2) {
        assert!(w[0] <= w[1], "allowed-set sizes must not shrink: {sizes:?}");
        assert!(w[1] <= 4 * w[0], "growth ratio above 4: {sizes:?}");
    }
}

#[test]
fn degenerate_coordinate_diagnostics_stay_zero() {
    for mu in ["1", "3/4", "9/10"] {
        let m = map(mu);
        for n in 2..=6 {
            let enumeration = patterns::enumerate_allowed(&m, n).unwrap();
            assert_eq!(enumeration.diagnostics.degenerate_laps_skipped, 0);
            assert!(enumeration.diagnostics.laps > 0);
            assert!(enumeration.diagnostics.subintervals >= enumeration.diagnostics.laps);
        }
    }
}

#[test]
fn transfer_check_verifies_enumerated_patterns() {
    // Patterns realized by T_mu transfer to the full map through the
    // commuter; the certified comparisons must confirm it at depth 40.
    let mu: Rational = "3/4".parse().unwrap();
    let m = map("3/4");
    let enumerated = patterns::enumerate_allowed(&m, 4).unwrap().patterns;
    let full = TentMap::full();
    let full_set = patterns::enumerate_allowed(&full, 4).unwrap().patterns;
    for pi in enumerated.iter() {
        let witness = patterns::find_witness(&m, pi).witness.unwrap();
        let outcome = patterns::pattern_transfer_check(&mu, &witness, 4, 40).unwrap();
        assert_eq!(
            outcome,
            patterns::TransferOutcome::Verified,
            "transfer of {pi} at witness {witness} did not verify"
        );
        assert!(full_set.contains(pi));
    }
}

#[test]
fn sigma_is_a_mu_forbidden_separator_at_three_quarters() {
    let sets: Vec<BTreeSet<Permutation>> = ["1", "3/4"]
        .iter()
        .map(|mu| patterns::enumerate_allowed(&map(mu), 6).unwrap().patterns.iter().cloned().collect())
        .collect();
    let sigma6 = patterns::sigma(6).unwrap();
    assert!(sets[0].contains(&sigma6));
    assert!(!sets[1].contains(&sigma6));
    assert!(sets[1].is_subset(&sets[0]));
}
