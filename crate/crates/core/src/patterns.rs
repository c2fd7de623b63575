//! Ordinal patterns of tent-map orbits and exact enumeration of the allowed
//! sets.
//!
//! The pattern of `x` of length `n` is the permutation recording the relative
//! order of `x, T(x), ..., T^{n-1}(x)`; it is defined only when those points
//! are pairwise distinct. Enumeration works lap by lap: on every lap of the
//! common refinement induced by the preimages of `1/2` up to depth `n-2` all
//! of `T^0 .. T^{n-1}` are affine, so the realized pattern is constant
//! between consecutive crossing points of those affine coordinates and can
//! be read off exactly at subinterval midpoints.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use rayon::prelude::*;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::commuter::CommuterEvaluator;
use crate::numerics::{Rational, Tristate, UnitPoint};
use crate::tentmap::{AffinePiece, TentMap, TentMapError};

/// Default cap on pattern length for full enumeration; at length `n` the
/// lap partition has up to `2^{n-1}` cells with up to `n(n-1)/2` crossing
/// points each.
pub const DEFAULT_MAX_PATTERN_LEN: usize = 10;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PatternError {
    #[error("orbit collision: T^{i}(x) = T^{j}(x), so no pattern of this length is defined")]
    Tie { i: usize, j: usize },
    #[error("pattern length {n} outside supported range 1..={max}")]
    LengthOutOfRange { n: usize, max: usize },
    #[error("sigma_n requires n >= 3, got {0}")]
    SigmaTooShort(usize),
    #[error("entries are not a permutation of 1..={expected_len}")]
    NotAPermutation { expected_len: usize },
    #[error("cannot parse {0:?} as a permutation")]
    Parse(String),
    #[error("transfer check needs depth >= pattern length ({n}), got {depth}")]
    DepthTooSmall { depth: usize, n: usize },
    #[error(transparent)]
    TentMap(#[from] TentMapError),
}

/// A permutation of `{1, ..., n}` in one-line notation.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Permutation {
    entries: Vec<usize>,
}

impl Permutation {
    pub fn new(entries: Vec<usize>) -> Result<Self, PatternError> {
        let n = entries.len();
        let mut seen = vec![false; n];
        for &e in &entries {
            if e == 0 || e > n || seen[e - 1] {
                return Err(PatternError::NotAPermutation { expected_len: n });
            }
            seen[e - 1] = true;
        }
        if n == 0 {
            return Err(PatternError::NotAPermutation { expected_len: 0 });
        }
        Ok(Permutation { entries })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        false // length >= 1 by construction
    }

    pub fn entries(&self) -> &[usize] {
        &self.entries
    }

    /// The permutation whose entries order the given pairwise-distinct
    /// values: entry `i` is the rank of `values[i]` (1 = smallest).
    pub fn from_ranks(values: &[Rational]) -> Result<Self, PatternError> {
        let n = values.len();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| values[a].cmp(&values[b]));
        for w in order.windows(2) {
            if values[w[0]] == values[w[1]] {
                let (i, j) = (w[0].min(w[1]), w[0].max(w[1]));
                return Err(PatternError::Tie { i, j });
            }
        }
        let mut entries = vec![0usize; n];
        for (rank, &idx) in order.iter().enumerate() {
            entries[idx] = rank + 1;
        }
        Ok(Permutation { entries })
    }

    /// Positions listed in rank order: `inverse()[r]` is the index whose
    /// entry is `r + 1`.
    pub fn inverse(&self) -> Vec<usize> {
        let mut inv = vec![0usize; self.entries.len()];
        for (i, &e) in self.entries.iter().enumerate() {
            inv[e - 1] = i;
        }
        inv
    }

    /// Drop the last entry and re-rank the rest.
    pub fn restriction(&self) -> Option<Permutation> {
        if self.entries.len() <= 1 {
            return None;
        }
        let last = *self.entries.last().unwrap();
        let entries = self.entries[..self.entries.len() - 1]
            .iter()
            .map(|&e| if e > last { e - 1 } else { e })
            .collect();
        Some(Permutation { entries })
    }
}

impl fmt::Display for Permutation {
    /// Digits concatenated for lengths up to 9 (`24513`), comma-separated
    /// beyond that (`10,11,1,...`).
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.entries.len() <= 9 {
            for e in &self.entries {
                write!(f, "{e}")?;
            }
            Ok(())
        } else {
            let parts: Vec<String> = self.entries.iter().map(|e| e.to_string()).collect();
            f.write_str(&parts.join(","))
        }
    }
}

impl fmt::Debug for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl FromStr for Permutation {
    type Err = PatternError;

    fn from_str(s: &str) -> Result<Self, PatternError> {
        let s = s.trim();
        if s.is_empty() {
            return Err(PatternError::Parse(s.to_string()));
        }
        let entries: Vec<usize> = if s.contains(',') {
            s.split(',')
                .map(|p| p.trim().parse().map_err(|_| PatternError::Parse(s.to_string())))
                .collect::<Result<_, _>>()?
        } else {
            s.chars()
                .map(|c| c.to_digit(10).map(|d| d as usize).ok_or_else(|| PatternError::Parse(s.to_string())))
                .collect::<Result<_, _>>()?
        };
        Permutation::new(entries).map_err(|_| PatternError::Parse(s.to_string()))
    }
}

impl Serialize for Permutation {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

/// A deduplicated set of permutations of one common length.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct PatternSet {
    n: usize,
    members: BTreeSet<Permutation>,
}

impl PatternSet {
    pub fn new(n: usize) -> Self {
        PatternSet { n, members: BTreeSet::new() }
    }

    pub fn length(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn insert(&mut self, pi: Permutation) {
        debug_assert_eq!(pi.len(), self.n);
        self.members.insert(pi);
    }

    pub fn contains(&self, pi: &Permutation) -> bool {
        self.members.contains(pi)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Permutation> {
        self.members.iter()
    }

    pub fn is_subset(&self, other: &PatternSet) -> bool {
        self.members.is_subset(&other.members)
    }

    pub fn union_with(&mut self, other: PatternSet) {
        debug_assert_eq!(self.n, other.n);
        self.members.extend(other.members);
    }

    pub fn intersection(&self, other: &PatternSet) -> PatternSet {
        PatternSet {
            n: self.n,
            members: self.members.intersection(&other.members).cloned().collect(),
        }
    }
}

impl Serialize for PatternSet {
    /// `{"n":5,"patterns":["24513",...]}` in sorted order.
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("PatternSet", 2)?;
        s.serialize_field("n", &self.n)?;
        let patterns: Vec<String> = self.members.iter().map(|p| p.to_string()).collect();
        s.serialize_field("patterns", &patterns)?;
        s.end()
    }
}

impl<'de> serde::Deserialize<'de> for PatternSet {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(serde::Deserialize)]
        struct Data {
            n: usize,
            patterns: Vec<String>,
        }
        let data = Data::deserialize(deserializer)?;
        let mut set = PatternSet::new(data.n);
        for text in data.patterns {
            let pi: Permutation = text.parse().map_err(serde::de::Error::custom)?;
            if pi.len() != data.n {
                return Err(serde::de::Error::custom(format!(
                    "pattern {pi} has length {}, expected {}",
                    pi.len(),
                    data.n
                )));
            }
            set.insert(pi);
        }
        Ok(set)
    }
}

/// The ordinal pattern of `x` with respect to `map`, of length `n`, from
/// exact rational comparisons of the orbit prefix.
pub fn pat(x: &UnitPoint, map: &TentMap, n: usize) -> Result<Permutation, PatternError> {
    if n < 1 {
        return Err(PatternError::LengthOutOfRange { n, max: usize::MAX });
    }
    Permutation::from_ranks(&map.orbit(x, n))
}

/// One lap of the common partition together with the affine forms of the
/// orbit coordinates `T^0 .. T^{n-1}` on it.
struct Lap {
    lo: Rational,
    hi: Rational,
    coords: Vec<AffinePiece>,
}

/// Laps of the partition induced by the preimages of `1/2` up to depth
/// `n - 2`; on each one every orbit coordinate up to `T^{n-1}` is affine.
fn orbit_laps(map: &TentMap, n: usize) -> Vec<Lap> {
    let mut cuts: Vec<Rational> = vec![Rational::zero()];
    if n >= 2 {
        cuts.extend(map.preimages_of_half(n - 2).into_iter().map(UnitPoint::into_rational));
    }
    cuts.push(Rational::one());
    cuts.dedup();

    let half = Rational::new(1, 2);
    let two = Rational::from_integer(2);
    cuts.windows(2)
        .map(|w| {
            let (lo, hi) = (w[0].clone(), w[1].clone());
            let mid = (&lo + &hi) / two.clone();
            let mut coords = Vec::with_capacity(n);
            coords.push(AffinePiece { slope: Rational::one(), intercept: Rational::zero() });
            for k in 1..n {
                let prev = &coords[k - 1];
                // The previous coordinate cannot equal 1/2 at the midpoint:
                // that would make the midpoint a partition point.
                let below = prev.eval(&mid) < half;
                debug_assert!(prev.eval(&mid) != half);
                let next = if below {
                    AffinePiece {
                        slope: map.two_mu() * &prev.slope,
                        intercept: map.two_mu() * &prev.intercept,
                    }
                } else {
                    AffinePiece {
                        slope: -&(map.two_mu() * &prev.slope),
                        intercept: map.two_mu() * &(Rational::one() - &prev.intercept),
                    }
                };
                coords.push(next);
            }
            Lap { lo, hi, coords }
        })
        .collect()
}

/// Counters from an enumeration run.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct EnumerationDiagnostics {
    pub laps: usize,
    pub subintervals: usize,
    /// Laps skipped because two orbit coordinates coincided as affine
    /// functions (every point there has a tied orbit). Cannot occur for
    /// heights in `(1/2, 1]`, where distinct iterates have distinct slope
    /// magnitudes, but it is tracked rather than assumed.
    pub degenerate_laps_skipped: usize,
}

/// Result of [`enumerate_allowed`].
#[derive(Clone, Debug)]
pub struct Enumeration {
    pub patterns: PatternSet,
    pub diagnostics: EnumerationDiagnostics,
}

/// The exact set of length-`n` patterns realized by `map`, via the lap
/// partition refined at all pairwise crossings of the orbit coordinates.
pub fn enumerate_allowed(map: &TentMap, n: usize) -> Result<Enumeration, PatternError> {
    enumerate_allowed_with_limit(map, n, DEFAULT_MAX_PATTERN_LEN)
}

/// As [`enumerate_allowed`] with an explicit length cap.
pub fn enumerate_allowed_with_limit(
    map: &TentMap,
    n: usize,
    max_len: usize,
) -> Result<Enumeration, PatternError> {
    if n < 1 || n > max_len {
        return Err(PatternError::LengthOutOfRange { n, max: max_len });
    }
    let laps = orbit_laps(map, n);
    let lap_total = laps.len();

    let (sets, diag_sum) = laps
        .into_par_iter()
        .map(|lap| enumerate_lap(map, &lap, n))
        .reduce(
            || (PatternSet::new(n), EnumerationDiagnostics::default()),
            |(mut acc_set, mut acc_diag), (set, diag)| {
                acc_set.union_with(set);
                acc_diag.subintervals += diag.subintervals;
                acc_diag.degenerate_laps_skipped += diag.degenerate_laps_skipped;
                (acc_set, acc_diag)
            },
        );

    let mut diagnostics = diag_sum;
    diagnostics.laps = lap_total;
    Ok(Enumeration { patterns: sets, diagnostics })
}

fn enumerate_lap(map: &TentMap, lap: &Lap, n: usize) -> (PatternSet, EnumerationDiagnostics) {
    let mut set = PatternSet::new(n);
    let mut diag = EnumerationDiagnostics::default();
    let two = Rational::from_integer(2);

    // Pairwise crossings of the affine orbit coordinates inside the lap.
    let mut cuts: Vec<Rational> = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let ds = &lap.coords[i].slope - &lap.coords[j].slope;
            let db = &lap.coords[i].intercept - &lap.coords[j].intercept;
            if ds.is_zero() {
                if db.is_zero() {
                    // Two coordinates identical on the whole lap: every point
                    // of the lap has a tied orbit, so it realizes nothing.
                    diag.degenerate_laps_skipped += 1;
                    return (set, diag);
                }
                continue;
            }
            let x = -&(&db / &ds);
            if x > lap.lo && x < lap.hi {
                cuts.push(x);
            }
        }
    }
    cuts.sort();
    cuts.dedup();
    cuts.insert(0, lap.lo.clone());
    cuts.push(lap.hi.clone());

    for w in cuts.windows(2) {
        let mid = (&w[0] + &w[1]) / two.clone();
        let point = UnitPoint::new(mid).expect("midpoint stays in [0,1]");
        let pi = pat(&point, map, n)
            .expect("orbit coordinates are pairwise distinct between crossings");
        diag.subintervals += 1;
        set.insert(pi);
    }
    (set, diag)
}

/// Outcome of a witness search for a single pattern.
#[derive(Clone, Debug)]
pub struct WitnessSearch {
    pub witness: Option<UnitPoint>,
    pub laps_scanned: usize,
}

/// Search for a point realizing `pi`, scanning the lap partition and
/// intersecting the chain of strict affine inequalities the pattern
/// imposes. Exact: returns a witness iff the pattern is allowed.
pub fn find_witness(map: &TentMap, pi: &Permutation) -> WitnessSearch {
    let n = pi.len();
    if n == 1 {
        return WitnessSearch { witness: Some(UnitPoint::half()), laps_scanned: 0 };
    }
    let inv = pi.inverse();
    let two = Rational::from_integer(2);
    let laps = orbit_laps(map, n);
    let mut scanned = 0usize;
    for lap in &laps {
        scanned += 1;
        // Intersect { x : coord[inv[r]](x) < coord[inv[r+1]](x) } over r
        // with the open lap.
        let mut lo = lap.lo.clone();
        let mut hi = lap.hi.clone();
        let mut feasible = true;
        for r in 0..n - 1 {
            let a = &lap.coords[inv[r]];
            let b = &lap.coords[inv[r + 1]];
            let ds = &a.slope - &b.slope;
            let db = &a.intercept - &b.intercept;
            if ds.is_zero() {
                if !db.is_negative() {
                    feasible = false;
                    break;
                }
                continue;
            }
            let bound = -&(&db / &ds);
            if ds.is_negative() {
                // need x > bound
                if bound > lo {
                    lo = bound;
                }
            } else {
                // need x < bound
                if bound < hi {
                    hi = bound;
                }
            }
            if lo >= hi {
                feasible = false;
                break;
            }
        }
        if feasible && lo < hi {
            let mid = (&lo + &hi) / two.clone();
            let witness = UnitPoint::new(mid).expect("witness stays in [0,1]");
            debug_assert_eq!(pat(&witness, map, n).as_ref(), Ok(pi));
            return WitnessSearch { witness: Some(witness), laps_scanned: scanned };
        }
    }
    WitnessSearch { witness: None, laps_scanned: scanned }
}

/// Whether `pi` is realized as an ordinal pattern of `map`.
pub fn is_allowed(map: &TentMap, pi: &Permutation) -> bool {
    find_witness(map, pi).witness.is_some()
}

/// The pattern `sigma_n = (n-1) n 1 2 ... (n-2)`, defined for `n >= 3`.
pub fn sigma(n: usize) -> Result<Permutation, PatternError> {
    if n < 3 {
        return Err(PatternError::SigmaTooShort(n));
    }
    let mut entries = vec![n - 1, n];
    entries.extend(1..=n - 2);
    Ok(Permutation { entries })
}

/// The open interval `(2^{n-2}/(2^{n-1}+1), 2^{n-2}/(2^{n-1}-1))` on which
/// (and, apart from `1/2`, only on which) the full tent map realizes
/// `sigma_n`.
pub fn sigma_realization_interval(n: usize) -> Result<(Rational, Rational), PatternError> {
    if n < 3 {
        return Err(PatternError::SigmaTooShort(n));
    }
    let num = BigInt::from(1) << (n - 2);
    let denom_base = BigInt::from(1) << (n - 1);
    let lo = Rational::from_big(num.clone(), &denom_base + 1).expect("positive denominator");
    let hi = Rational::from_big(num, &denom_base - 1).expect("positive denominator");
    Ok((lo, hi))
}

/// Outcome of [`pattern_transfer_check`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TransferOutcome {
    /// Every pairwise comparison of the commuter enclosures is certified
    /// and matches the pattern's order.
    Verified,
    /// Some certified comparison contradicts the pattern's order.
    Refuted,
    /// Enclosures overlap; deepen to decide.
    Inconclusive,
}

impl fmt::Display for TransferOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            TransferOutcome::Verified => "verified",
            TransferOutcome::Refuted => "refuted",
            TransferOutcome::Inconclusive => "inconclusive",
        };
        f.write_str(s)
    }
}

/// Check that the pattern of `x` under `T_mu` transfers to the full tent
/// map through the commuter: the enclosures of `h_mu` at the orbit points
/// `T_mu^k(x)` (evaluated at depth `depth - k`, matching the exact identity
/// `T ∘ f_d = f_{d-1} ∘ T_mu`) must order the same way as the pattern.
pub fn pattern_transfer_check(
    mu: &Rational,
    x: &UnitPoint,
    n: usize,
    depth: usize,
) -> Result<TransferOutcome, PatternError> {
    if depth < n {
        return Err(PatternError::DepthTooSmall { depth, n });
    }
    let map = TentMap::new(mu.clone())?;
    let pi = pat(x, &map, n)?;
    let evaluator = CommuterEvaluator::new(mu.clone())?;
    let orbit = map.orbit(x, n);
    let enclosures: Vec<_> = orbit
        .iter()
        .enumerate()
        .map(|(k, y)| {
            let point = UnitPoint::new(y.clone()).expect("orbit stays in [0,1]");
            evaluator.eval(&point, depth - k)
        })
        .collect();

    let mut any_unknown = false;
    for i in 0..n {
        for j in (i + 1)..n {
            let expect_less = pi.entries()[i] < pi.entries()[j];
            match enclosures[i].strictly_below(&enclosures[j]) {
                Tristate::Yes if expect_less => {}
                Tristate::No if !expect_less => {}
                Tristate::Unknown => any_unknown = true,
                _ => return Ok(TransferOutcome::Refuted),
            }
        }
    }
    if any_unknown {
        Ok(TransferOutcome::Inconclusive)
    } else {
        Ok(TransferOutcome::Verified)
    }
}
