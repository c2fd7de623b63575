//! Named, runnable invariant suites.
//!
//! Each suite re-checks the core guarantees of one module at interactive
//! scale, with a deterministic internal generator so runs are reproducible.
//! The CLI prints one line per check; the heavyweight end-to-end assertions
//! live in the acceptance tests instead.

use std::fmt;
use std::str::FromStr;

use crate::bounds::{self, AvoidanceOutcome};
use crate::commuter::CommuterEvaluator;
use crate::numerics::{Enclosure, Rational, Tristate, UnitPoint};
use crate::patterns;
use crate::tentmap::TentMap;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    All,
    Numerics,
    TentMap,
    Patterns,
    Commuter,
    Bounds,
}

impl FromStr for Suite {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "all" => Ok(Suite::All),
            "numerics" => Ok(Suite::Numerics),
            "tentmap" => Ok(Suite::TentMap),
            "patterns" => Ok(Suite::Patterns),
            "commuter" => Ok(Suite::Commuter),
            "bounds" => Ok(Suite::Bounds),
            other => Err(format!(
                "unknown suite {other:?}; expected all, numerics, tentmap, patterns, commuter, or bounds"
            )),
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Suite::All => "all",
            Suite::Numerics => "numerics",
            Suite::TentMap => "tentmap",
            Suite::Patterns => "patterns",
            Suite::Commuter => "commuter",
            Suite::Bounds => "bounds",
        };
        f.write_str(s)
    }
}

/// Result of one named check.
#[derive(Clone, Debug)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn pass(name: &str) -> Self {
        Check { name: name.to_string(), passed: true, detail: String::new() }
    }

    fn from_result(name: &str, run: impl FnOnce() -> Result<(), String>) -> Self {
        match run() {
            Ok(()) => Check::pass(name),
            Err(detail) => Check { name: name.to_string(), passed: false, detail },
        }
    }
}

/// Deterministic xorshift generator for reproducible spot checks.
struct Rng(u64);

impl Rng {
    fn new(seed: u64) -> Self {
        Rng(seed.max(1))
    }

    fn next(&mut self) -> u64 {
        self.0 ^= self.0 << 13;
        self.0 ^= self.0 >> 7;
        self.0 ^= self.0 << 17;
        self.0
    }

    fn below(&mut self, n: u64) -> u64 {
        self.next() % n
    }

    /// Random rational in (0, 1) with denominator 2^20.
    fn unit(&mut self) -> Rational {
        let den = 1u64 << 20;
        let num = 1 + self.below(den - 1);
        Rational::new(num as i64, den as i64)
    }

    /// Random height in (1/2, 1] with denominator 2^10.
    fn height(&mut self) -> Rational {
        let k = 1 + self.below(512);
        Rational::new(1, 2) + Rational::new(k as i64, 1024)
    }

    fn signed_small(&mut self) -> Rational {
        let num = self.below(2001) as i64 - 1000;
        let den = 1 + self.below(50) as i64;
        Rational::new(num, den)
    }
}

pub fn run_suite(suite: Suite) -> Vec<Check> {
    match suite {
        Suite::All => {
            let mut checks = numerics_checks();
            checks.extend(tentmap_checks());
            checks.extend(patterns_checks());
            checks.extend(commuter_checks());
            checks.extend(bounds_checks());
            checks
        }
        Suite::Numerics => numerics_checks(),
        Suite::TentMap => tentmap_checks(),
        Suite::Patterns => patterns_checks(),
        Suite::Commuter => commuter_checks(),
        Suite::Bounds => bounds_checks(),
    }
}

fn numerics_checks() -> Vec<Check> {
    let mut rng = Rng::new(0x5eed_0001);
    let mut checks = Vec::new();

    checks.push(Check::from_result("rational arithmetic is exact: (a+b)-b == a", || {
        let mut result = Ok(());
        for _ in 0..500 {
            let a = rng.signed_small();
            let b = rng.signed_small();
            let back = &(&a + &b) - &b;
            if back != a {
                result = Err(format!("failed for a={a} b={b}"));
                break;
            }
        }
        result
    }));

    checks.push(Check::from_result("rational order is total and transitive", || {
        let mut result = Ok(());
        for _ in 0..500 {
            let a = rng.signed_small();
            let b = rng.signed_small();
            let c = rng.signed_small();
            if (a <= b) == (b < a) {
                result = Err(format!("totality failed for {a}, {b}"));
                break;
            }
            if a <= b && b <= c && a > c {
                result = Err(format!("transitivity failed for {a}, {b}, {c}"));
                break;
            }
        }
        result
    }));

    checks.push(Check::from_result("enclosure operations contain point images", || {
        let mut result = Ok(());
        'outer: for _ in 0..200 {
            let a = rng.unit();
            let b = rng.unit();
            let e = Enclosure::new(a.clone().min(b.clone()), a.max(b)).unwrap();
            let f = {
                let a = rng.unit();
                let b = rng.unit();
                Enclosure::new(a.clone().min(b.clone()), a.max(b)).unwrap()
            };
            // Sample p in e, q in f by convex combination.
            let t = rng.unit();
            let p = &e.lo + &(&e.width() * &t);
            let q = &f.lo + &(&f.width() * &t);
            let k = rng.signed_small();
            let cases: [(&str, Enclosure, Rational); 5] = [
                ("add", e.add(&f), &p + &q),
                ("sub", e.sub(&f), &p - &q),
                ("neg", e.neg(), -&p),
                ("scale", e.scale(&k), &p * &k),
                ("one_minus", e.one_minus(), Rational::one() - &p),
            ];
            for (op, image, point) in cases {
                if !image.contains(&point) {
                    result = Err(format!("{op} lost {point} from {e} (result {image})"));
                    break 'outer;
                }
            }
            let widened = e.widen(&rng.unit()).unwrap();
            if !widened.contains(&p) {
                result = Err(format!("widen lost {p} from {e}"));
                break;
            }
        }
        result
    }));

    checks.push(Check::from_result("certified comparison is sound", || {
        let a = Enclosure::new(Rational::zero(), Rational::new(1, 4)).unwrap();
        let b = Enclosure::new(Rational::new(1, 2), Rational::new(3, 4)).unwrap();
        let c = Enclosure::new(Rational::new(1, 5), Rational::new(3, 5)).unwrap();
        if a.strictly_below(&b) == Tristate::Yes
            && b.strictly_below(&a) == Tristate::No
            && a.strictly_below(&c) == Tristate::Unknown
        {
            Ok(())
        } else {
            Err("tri-state comparison gave a wrong answer".to_string())
        }
    }));

    checks
}

fn tentmap_checks() -> Vec<Check> {
    let mut rng = Rng::new(0x5eed_0002);
    let mut checks = Vec::new();

    checks.push(Check::from_result("iterate matches repeated evaluation", || {
        let mut result = Ok(());
        'outer: for mu in ["1", "3/4", "4/5"] {
            let map = TentMap::new(mu.parse().unwrap()).unwrap();
            for n in 0..=6 {
                let it = map.iterate(n);
                for _ in 0..20 {
                    let x = rng.unit();
                    let mut direct = x.clone();
                    for _ in 0..n {
                        direct = map.eval_rational(&direct);
                    }
                    if it.eval(&x) != direct {
                        result = Err(format!("mismatch at mu={mu} n={n} x={x}"));
                        break 'outer;
                    }
                }
            }
        }
        result
    }));

    checks.push(Check::from_result("iterate breakpoints are the preimages of 1/2", || {
        let mut result = Ok(());
        for mu in ["1", "3/4"] {
            let map = TentMap::new(mu.parse().unwrap()).unwrap();
            for n in 1..=7 {
                let mut expect: Vec<Rational> = map
                    .preimages_of_half(n - 1)
                    .into_iter()
                    .map(UnitPoint::into_rational)
                    .collect();
                expect.insert(0, Rational::zero());
                expect.push(Rational::one());
                if map.iterate(n).breakpoints() != expect.as_slice() {
                    result = Err(format!("breakpoint mismatch at mu={mu} n={n}"));
                    break;
                }
            }
        }
        result
    }));

    checks.push(Check::from_result("full-height iterates have 2^n laps of slope ±2^n", || {
        let map = TentMap::full();
        let mut result = Ok(());
        for n in 1..=8 {
            let it = map.iterate(n);
            let magnitude = Rational::pow2(n as i64);
            if it.lap_count() != 1 << n {
                result = Err(format!("lap count {} at n={n}", it.lap_count()));
                break;
            }
            if !it.pieces().iter().all(|p| p.slope.abs() == magnitude) {
                result = Err(format!("slope magnitude differs from 2^{n}"));
                break;
            }
        }
        result
    }));

    checks.push(Check::from_result("interior preimage found within the stretching bound", || {
        let mut result = Ok(());
        for _ in 0..100 {
            let mu = rng.height();
            let map = TentMap::new(mu.clone()).unwrap();
            let a = rng.unit();
            let b = rng.unit();
            if a == b {
                continue;
            }
            let (x, y) = if a < b { (a, b) } else { (b, a) };
            let delta = (&y - &x).to_f64();
            let x = UnitPoint::new(x).unwrap();
            let y = UnitPoint::new(y).unwrap();
            let (x0, n) = map.find_interior_preimage(&x, &y).unwrap();
            let bound = (-(2.0 * delta).ln() / (2.0 * mu.to_f64()).ln()).ceil().max(0.0) as usize;
            if n > bound {
                result = Err(format!("n={n} exceeds bound {bound} for ({x}, {y}) at mu={mu}"));
                break;
            }
            let mut cur = x0.value().clone();
            for _ in 0..n {
                cur = map.eval_rational(&cur);
            }
            if cur != Rational::new(1, 2) {
                result = Err(format!("returned point {x0} does not reach 1/2 in {n} steps"));
                break;
            }
        }
        result
    }));

    checks
}

fn patterns_checks() -> Vec<Check> {
    let mut rng = Rng::new(0x5eed_0003);
    let mut checks = Vec::new();
    let full = TentMap::full();

    checks.push(Check::from_result("321 forbidden for T", || {
        if patterns::is_allowed(&full, &"321".parse().unwrap()) {
            Err("321 reported allowed".to_string())
        } else {
            Ok(())
        }
    }));

    checks.push(Check::from_result("pattern of 23/100 under T of length 5 is 24513", || {
        let x: UnitPoint = "23/100".parse().unwrap();
        let pi = patterns::pat(&x, &full, 5).map_err(|e| e.to_string())?;
        if pi.to_string() == "24513" {
            Ok(())
        } else {
            Err(format!("got {pi}"))
        }
    }));

    checks.push(Check::from_result("sampled patterns all appear in the enumeration", || {
        let mut result = Ok(());
        'outer: for mu in ["1", "3/4", "4/5"] {
            let map = TentMap::new(mu.parse().unwrap()).unwrap();
            for n in 2..=5 {
                let enumerated = patterns::enumerate_allowed(&map, n).unwrap().patterns;
                for _ in 0..500 {
                    let x = UnitPoint::new(rng.unit()).unwrap();
                    match patterns::pat(&x, &map, n) {
                        Ok(pi) => {
                            if !enumerated.contains(&pi) {
                                result = Err(format!("sampled {pi} missing at mu={mu} n={n}"));
                                break 'outer;
                            }
                        }
                        Err(_) => continue, // tied orbit: realizes nothing
                    }
                }
            }
        }
        result
    }));

    checks.push(Check::from_result("restriction closure of the allowed sets", || {
        let map = TentMap::new(Rational::new(3, 4)).unwrap();
        let longer = patterns::enumerate_allowed(&map, 5).unwrap().patterns;
        let shorter = patterns::enumerate_allowed(&map, 4).unwrap().patterns;
        let mut result = Ok(());
        for pi in longer.iter() {
            let restricted = pi.restriction().unwrap();
            if !shorter.contains(&restricted) {
                result = Err(format!("{pi} restricts to {restricted}, not allowed"));
                break;
            }
        }
        result
    }));

    checks.push(Check::from_result("allowed sets nest into the full map's", || {
        let mut result = Ok(());
        for mu in ["3/5", "3/4", "9/10"] {
            let map = TentMap::new(mu.parse().unwrap()).unwrap();
            for n in 2..=5 {
                let small = patterns::enumerate_allowed(&map, n).unwrap().patterns;
                let big = patterns::enumerate_allowed(&full, n).unwrap().patterns;
                if !small.is_subset(&big) {
                    result = Err(format!("inclusion fails at mu={mu} n={n}"));
                    break;
                }
            }
        }
        result
    }));

    checks.push(Check::from_result("sigma_n realized on its interval and nowhere outside", || {
        let mut result = Ok(());
        'outer: for n in 3..=6 {
            let sigma = patterns::sigma(n).unwrap();
            let (lo, hi) = patterns::sigma_realization_interval(n).unwrap();
            let mid = UnitPoint::new((&lo + &hi) * Rational::new(1, 2)).unwrap();
            match patterns::pat(&mid, &full, n) {
                Ok(pi) if pi == sigma => {}
                other => {
                    result = Err(format!("midpoint of sigma_{n} interval gave {other:?}"));
                    break;
                }
            }
            for _ in 0..30 {
                let y = rng.unit();
                if y >= lo && y <= hi {
                    continue;
                }
                let y = UnitPoint::new(y).unwrap();
                if let Ok(pi) = patterns::pat(&y, &full, n) {
                    if pi == sigma {
                        result = Err(format!("sigma_{n} realized at exterior point {y}"));
                        break 'outer;
                    }
                }
            }
        }
        result
    }));

    checks
}

fn commuter_checks() -> Vec<Check> {
    let mut rng = Rng::new(0x5eed_0004);
    let mut checks = Vec::new();

    checks.push(Check::from_result("commutation_residual == 0", || {
        let mut result = Ok(());
        for _ in 0..200 {
            let mu = rng.height();
            let evaluator = CommuterEvaluator::new(mu.clone()).unwrap();
            let x = UnitPoint::new(rng.unit()).unwrap();
            let d = 1 + rng.below(20) as usize;
            let residual = evaluator.commutation_residual(&x, d);
            if !residual.is_zero() {
                result = Err(format!("residual {residual} at mu={mu} x={x} d={d}"));
                break;
            }
        }
        result
    }));

    checks.push(Check::from_result("endpoints pinned: f_d(0) = 0 and f_d(1) = 1", || {
        let mut result = Ok(());
        for mu in ["3/5", "3/4", "99/100"] {
            let evaluator = CommuterEvaluator::new(mu.parse().unwrap()).unwrap();
            for d in [1, 7, 23] {
                if !evaluator.eval_depth(&UnitPoint::zero(), d).is_zero()
                    || evaluator.eval_depth(&UnitPoint::one(), d) != Rational::one()
                {
                    result = Err(format!("endpoint drift at mu={mu} d={d}"));
                    break;
                }
            }
        }
        result
    }));

    checks.push(Check::from_result("iterates preserve the branch halves", || {
        let mut result = Ok(());
        let half = Rational::new(1, 2);
        for _ in 0..200 {
            let mu = rng.height();
            let evaluator = CommuterEvaluator::new(mu.clone()).unwrap();
            let x = rng.unit();
            let d = 1 + rng.below(15) as usize;
            let y = evaluator.eval_depth(&UnitPoint::new(x.clone()).unwrap(), d);
            let ok = if x <= half { y <= half } else { y >= half };
            if !ok {
                result = Err(format!("f_{d}({x}) = {y} crosses 1/2 at mu={mu}"));
                break;
            }
        }
        result
    }));

    checks.push(Check::from_result("iterates are strictly increasing", || {
        let mut result = Ok(());
        for _ in 0..200 {
            let mu = rng.height();
            let evaluator = CommuterEvaluator::new(mu.clone()).unwrap();
            let a = rng.unit();
            let b = rng.unit();
            if a == b {
                continue;
            }
            let (x, y) = if a < b { (a, b) } else { (b, a) };
            let d = 1 + rng.below(15) as usize;
            let fx = evaluator.eval_depth(&UnitPoint::new(x.clone()).unwrap(), d);
            let fy = evaluator.eval_depth(&UnitPoint::new(y.clone()).unwrap(), d);
            if fx >= fy {
                result = Err(format!("f_{d} not increasing on ({x}, {y}) at mu={mu}"));
                break;
            }
        }
        result
    }));

    checks.push(Check::from_result("successive iterates within 2^-d", || {
        let mut result = Ok(());
        for _ in 0..100 {
            let mu = rng.height();
            let evaluator = CommuterEvaluator::new(mu.clone()).unwrap();
            let x = UnitPoint::new(rng.unit()).unwrap();
            let d = 1 + rng.below(20) as usize;
            let gap = (evaluator.eval_depth(&x, d) - evaluator.eval_depth(&x, d + 1)).abs();
            if gap > Rational::pow2(-(d as i64)) {
                result = Err(format!("|f_{d} - f_{}| = {gap} at mu={mu} x={x}", d + 1));
                break;
            }
        }
        result
    }));

    checks.push(Check::from_result("peak enclosure stays below one", || {
        let mut result = Ok(());
        for mu in ["3/5", "3/4", "9/10"] {
            let evaluator = CommuterEvaluator::new(mu.parse().unwrap()).unwrap();
            let peak = evaluator.eval_at_peak(40);
            if peak.hi >= Rational::one() {
                result = Err(format!("peak enclosure {peak} reaches 1 at mu={mu}"));
                break;
            }
        }
        result
    }));

    checks.push(Check::from_result("half-value identity f_d(1/2) = f_{d-1}(mu)/2", || {
        let mut result = Ok(());
        for _ in 0..50 {
            let mu = rng.height();
            let evaluator = CommuterEvaluator::new(mu.clone()).unwrap();
            let d = 1 + rng.below(20) as usize;
            let lhs = evaluator.eval_depth(&UnitPoint::half(), d);
            let peak = UnitPoint::new(mu.clone()).unwrap();
            let rhs = evaluator.eval_depth(&peak, d - 1) * Rational::new(1, 2);
            if lhs != rhs {
                result = Err(format!("identity fails at mu={mu} d={d}"));
                break;
            }
        }
        result
    }));

    checks.push(Check::from_result("no grid value lands inside a certified range gap", || {
        let evaluator = CommuterEvaluator::new(Rational::new(3, 4)).unwrap();
        let d = 30;
        let gaps = evaluator.range_gaps(3, d);
        let shrink = Rational::pow2(-(d as i64));
        let grid = 2000usize;
        let den = Rational::from_integer(grid as i64);
        let mut result = Ok(());
        'outer: for k in 0..=grid {
            let x = Rational::from_integer(k as i64) / den.clone();
            let value = evaluator.eval_depth(&UnitPoint::new(x.clone()).unwrap(), d);
            for gap in &gaps {
                let (lo, hi) = gap.certified_interval();
                if value > &lo + &shrink && value < &hi - &shrink {
                    result = Err(format!(
                        "f_{d}({x}) = {value} inside gap at level {} index {}",
                        gap.level, gap.index
                    ));
                    break 'outer;
                }
            }
        }
        result
    }));

    checks
}

fn bounds_checks() -> Vec<Check> {
    let mut rng = Rng::new(0x5eed_0005);
    let mut checks = Vec::new();

    checks.push(Check::from_result("estimates match the reference table to 6 decimals", || {
        let mut result = Ok(());
        for (n, _, expected) in bounds::TABLE1_REFERENCE {
            if let Some(expected) = expected {
                let enc = bounds::mu_estimate(n).unwrap();
                let rendered = enc.lo.to_decimal(6);
                if rendered != expected || enc.hi.to_decimal(6) != expected {
                    result = Err(format!("estimate for n={n} rendered {rendered}, expected {expected}"));
                    break;
                }
            }
        }
        result
    }));

    checks.push(Check::from_result("exact threshold for n=6 matches the reference", || {
        let bracket = bounds::mu_exact(6, &bounds::default_bisection_tol(), 12)
            .map_err(|e| e.to_string())?;
        if bracket.rendered_6dp == "0.963781" {
            Ok(())
        } else {
            Err(format!("rendered {}", bracket.rendered_6dp))
        }
    }));

    checks.push(Check::from_result("estimate sits strictly below the exact threshold (n=6)", || {
        let bracket = bounds::mu_exact(6, &bounds::default_bisection_tol(), 12)
            .map_err(|e| e.to_string())?;
        let estimate = bounds::mu_estimate(6).map_err(|e| e.to_string())?;
        if estimate.hi < bracket.lo {
            Ok(())
        } else {
            Err(format!("estimate {estimate} not below bracket lo {}", bracket.lo))
        }
    }));

    checks.push(Check::from_result("certified avoidance implies mu below the exact threshold", || {
        let bracket = bounds::mu_exact(6, &bounds::default_bisection_tol(), 12)
            .map_err(|e| e.to_string())?;
        let mut result = Ok(());
        for k in 1..=8 {
            let mu = Rational::new(1, 2) + Rational::new(k, 16);
            if mu > Rational::one() {
                break;
            }
            if bounds::certify_avoidance(&mu, 6, 40).unwrap() == AvoidanceOutcome::CertifiedAvoids
                && mu >= bracket.hi
            {
                result = Err(format!("certified at mu={mu} >= bracket hi {}", bracket.hi));
                break;
            }
        }
        result
    }));

    checks.push(Check::from_result("peak deviation bound holds at random heights", || {
        let mut result = Ok(());
        for _ in 0..20 {
            let mu = rng.height();
            if !bounds::peak_deviation_check(&mu, 30).unwrap() {
                result = Err(format!("deviation bound fails at mu={mu}"));
                break;
            }
        }
        result
    }));

    checks
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_fast_suite_passes() {
        for suite in [Suite::Numerics, Suite::TentMap, Suite::Patterns, Suite::Commuter] {
            for check in run_suite(suite) {
                assert!(check.passed, "{suite}: {} failed: {}", check.name, check.detail);
            }
        }
    }

    #[test]
    fn suite_names_parse() {
        assert_eq!("all".parse::<Suite>().unwrap(), Suite::All);
        assert_eq!("commuter".parse::<Suite>().unwrap(), Suite::Commuter);
        assert!("nope".parse::<Suite>().is_err());
    }
}
