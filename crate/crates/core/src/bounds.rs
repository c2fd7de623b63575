//! Pattern-avoidance thresholds for the family `T_mu`.
//!
//! For each `n >= 4` there is a height threshold: `T_mu` avoids the pattern
//! `sigma_n = (n-1) n 1 2 ... (n-2)` exactly when `mu` is below it. This
//! module computes
//!
//! * the closed-form sufficient estimate
//!   `3/4 + (1/4) * sqrt(9 - (2^{n+2} + 8)/(2^{n-1} - 1))` (real for
//!   `n > 5`) as a tight enclosure,
//! * certified avoidance of `sigma_n` from the peak enclosure of the
//!   commuter (`h_mu(mu) < 2 (1 - 2^{n-2}/(2^{n-1} - 1))`),
//! * the exact threshold by bisection on the realization predicate, with
//!   every probe witnessed,
//! * the reference table of both columns, and grid sweeps that collect
//!   evidence for the monotonicity and peak-bound conjectures.

use num_bigint::BigInt;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::commuter::CommuterEvaluator;
use crate::numerics::{Enclosure, Rational, Tristate, UnitPoint};
use crate::patterns::{self, PatternError, Permutation, WitnessSearch};
use crate::tentmap::{TentMap, TentMapError};

/// Largest `n` accepted by [`table1`]; callers that want more use
/// [`table1_with_limit`].
pub const MAX_TABLE_N: usize = 12;

/// Default bisection tolerance: narrow enough that a 6-decimal rendering is
/// almost always unambiguous, and automatically tightened when it is not.
pub fn default_bisection_tol() -> Rational {
    Rational::new(1, 10_000_000)
}

/// Reference values (6 decimals) for the exact and estimated thresholds,
/// `n = 4..=12`. The estimate column is undefined below `n = 6`.
pub const TABLE1_REFERENCE: [(usize, &str, Option<&str>); 9] = [
    (4, "0.809017", None),
    (5, "0.919643", None),
    (6, "0.963781", Some("0.923902")),
    (7, "0.982974", Some("0.965933")),
    (8, "0.991791", Some("0.983722")),
    (9, "0.995982", Some("0.992030")),
    (10, "0.998016", Some("0.996055")),
    (11, "0.999015", Some("0.998037")),
    (12, "0.999509", Some("0.999021")),
];

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BoundsError {
    #[error("the estimate is undefined for n = {0}: it requires n > 5")]
    EstimateUndefined(usize),
    #[error("sigma_3 = 231 is allowed at every height, so n = 3 has no threshold")]
    NoThreshold,
    #[error("n = {n} outside supported range {min}..={max}")]
    NOutOfRange { n: usize, min: usize, max: usize },
    #[error("tolerance must be positive, got {0}")]
    InvalidTolerance(Rational),
    #[error("square root of a negative rational: {0}")]
    NegativeRadicand(Rational),
    #[error("could not establish an initial bracket: {0}")]
    BracketNotFound(String),
    #[error("realization predicate is not monotone in mu: {0}")]
    NonMonotonePredicate(String),
    #[error("6-decimal rendering still ambiguous at tolerance {0}; threshold sits on a rounding boundary")]
    RenderAmbiguous(Rational),
    #[error("grid needs at least two points, got {0}")]
    GridTooSmall(usize),
    #[error(transparent)]
    TentMap(#[from] TentMapError),
    #[error(transparent)]
    Pattern(#[from] PatternError),
}

/// Enclosure of `sqrt(x)` of width at most `tol`, by bisection with dyadic
/// midpoints. Exact at `x = 0`.
pub fn sqrt_enclosure(x: &Rational, tol: &Rational) -> Result<Enclosure, BoundsError> {
    if x.is_negative() {
        return Err(BoundsError::NegativeRadicand(x.clone()));
    }
    if tol.is_zero() || tol.is_negative() {
        return Err(BoundsError::InvalidTolerance(tol.clone()));
    }
    if x.is_zero() {
        return Ok(Enclosure::point(Rational::zero()));
    }
    let mut lo = Rational::zero();
    let mut hi = x.clone().max(Rational::one());
    let half = Rational::new(1, 2);
    while (&hi - &lo) > *tol {
        let mid = (&lo + &hi) * &half;
        if &(&mid * &mid) <= x {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Enclosure::new(lo, hi).expect("bisection keeps lo <= hi"))
}

/// Enclosure of the closed-form avoidance estimate for `sigma_n`, of width
/// at most `10^-9`. Defined for `n > 5`; below that the radicand is
/// nonpositive.
pub fn mu_estimate(n: usize) -> Result<Enclosure, BoundsError> {
    mu_estimate_with_tol(n, &Rational::new(1, 1_000_000_000))
}

pub fn mu_estimate_with_tol(n: usize, tol: &Rational) -> Result<Enclosure, BoundsError> {
    if n <= 5 {
        return Err(BoundsError::EstimateUndefined(n));
    }
    let radicand = estimate_radicand(n);
    debug_assert!(!radicand.is_negative());
    let quarter = Rational::new(1, 4);
    let sqrt_tol = tol / &quarter;
    let root = sqrt_enclosure(&radicand, &sqrt_tol)?;
    let base = Rational::new(3, 4);
    Ok(Enclosure::new(&base + &(&root.lo * &quarter), &base + &(&root.hi * &quarter))
        .expect("ordered"))
}

/// `9 - (2^{n+2} + 8)/(2^{n-1} - 1)`, the quantity under the square root.
fn estimate_radicand(n: usize) -> Rational {
    let num = (BigInt::from(1) << (n + 2)) + 8;
    let den = (BigInt::from(1) << (n - 1)) - 1;
    Rational::from_integer(9) - Rational::from_big(num, den).expect("positive denominator")
}

/// The avoidance threshold used by [`certify_avoidance`]:
/// `2 (1 - 2^{n-2}/(2^{n-1} - 1))`.
pub fn avoidance_threshold(n: usize) -> Result<Rational, BoundsError> {
    if n < 3 {
        return Err(BoundsError::NOutOfRange { n, min: 3, max: usize::MAX });
    }
    let frac = Rational::from_big(BigInt::from(1) << (n - 2), (BigInt::from(1) << (n - 1)) - 1)
        .expect("positive denominator");
    Ok(Rational::from_integer(2) * (Rational::one() - frac))
}

/// Outcome of the one-directional avoidance certificate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AvoidanceOutcome {
    /// The peak enclosure sits strictly below the threshold, so `T_mu`
    /// provably avoids `sigma_n`.
    CertifiedAvoids,
    /// The peak enclosure sits at or above the threshold: the hypothesis of
    /// the certificate fails, which proves nothing about avoidance.
    NotApplicable,
    /// The enclosure straddles the threshold; deepen to decide.
    Unknown,
}

/// Check the sufficient condition `h_mu(mu) < 2 (1 - 2^{n-2}/(2^{n-1}-1))`
/// against the depth-`d` peak enclosure, by exact rational comparison.
pub fn certify_avoidance(mu: &Rational, n: usize, d: usize) -> Result<AvoidanceOutcome, BoundsError> {
    let evaluator = CommuterEvaluator::new(mu.clone())?;
    let peak = evaluator.eval_at_peak(d);
    let threshold = avoidance_threshold(n)?;
    Ok(classify_peak_against_threshold(&peak, &threshold))
}

fn classify_peak_against_threshold(peak: &Enclosure, threshold: &Rational) -> AvoidanceOutcome {
    if &peak.hi < threshold {
        AvoidanceOutcome::CertifiedAvoids
    } else if &peak.lo >= threshold {
        AvoidanceOutcome::NotApplicable
    } else {
        AvoidanceOutcome::Unknown
    }
}

/// Check `|h_mu(mu) - mu| <= (1-mu)/2 + (1-mu)^2` with enclosure slack
/// `2^-d` on each side.
pub fn peak_deviation_check(mu: &Rational, d: usize) -> Result<bool, BoundsError> {
    let evaluator = CommuterEvaluator::new(mu.clone())?;
    let peak = evaluator.eval_at_peak(d);
    let one_minus = Rational::one() - mu;
    let bound = &one_minus * &Rational::new(1, 2) + &one_minus * &one_minus;
    let slack = Rational::pow2(-(d as i64));
    let lo = mu - &bound - &slack;
    let hi = mu + &bound + &slack;
    Ok(peak.lo >= lo && peak.hi <= hi)
}

/// One evaluation of the realization predicate during bisection.
#[derive(Clone, Debug, Serialize)]
pub struct ProbeRecord {
    pub mu: Rational,
    /// A realizing point when the pattern is allowed at this height; `None`
    /// records that the exhaustive lap scan found no realization.
    pub witness: Option<UnitPoint>,
    pub laps_scanned: usize,
}

impl ProbeRecord {
    pub fn realized(&self) -> bool {
        self.witness.is_some()
    }
}

/// Certified bracket for the exact avoidance threshold of `sigma_n`.
#[derive(Clone, Debug, Serialize)]
pub struct MuExactBracket {
    pub n: usize,
    /// Height where the scan proves `sigma_n` is not realized.
    pub lo: Rational,
    /// Height where a witness realizes `sigma_n`.
    pub hi: Rational,
    pub rendered_6dp: String,
    pub tol_used: Rational,
    pub lo_probe: ProbeRecord,
    pub hi_probe: ProbeRecord,
    /// Every probe made, in evaluation order.
    pub probes: Vec<ProbeRecord>,
}

/// Exact threshold `sup { mu : sigma_n not allowed for T_mu }` by bisection
/// on the realization predicate over dyadic heights. Every probe stores its
/// witness (or the exhausted scan), and any probe inconsistent with a
/// single monotone threshold aborts the run. The tolerance tightens by a
/// factor of 100 whenever the bracket still straddles a 6-decimal rounding
/// boundary.
pub fn mu_exact(n: usize, tol: &Rational, max_pattern_n: usize) -> Result<MuExactBracket, BoundsError> {
    if n == 3 {
        return Err(BoundsError::NoThreshold);
    }
    if n < 4 || n > max_pattern_n {
        return Err(BoundsError::NOutOfRange { n, min: 4, max: max_pattern_n });
    }
    if tol.is_zero() || tol.is_negative() {
        return Err(BoundsError::InvalidTolerance(tol.clone()));
    }
    let sigma_n = patterns::sigma(n)?;
    let mut probes: Vec<ProbeRecord> = Vec::new();
    let mut highest_unrealized: Option<Rational> = None;
    let mut lowest_realized: Option<Rational> = None;

    let mut probe = |mu: &Rational, probes: &mut Vec<ProbeRecord>| -> Result<ProbeRecord, BoundsError> {
        let map = TentMap::new(mu.clone())?;
        let WitnessSearch { witness, laps_scanned } = patterns::find_witness(&map, &sigma_n);
        let record = ProbeRecord { mu: mu.clone(), witness, laps_scanned };
        if record.realized() {
            if let Some(worst) = &highest_unrealized {
                if mu < worst {
                    return Err(BoundsError::NonMonotonePredicate(format!(
                        "sigma_{n} realized at mu = {mu} but not at the larger mu = {worst}"
                    )));
                }
            }
            let better = lowest_realized.as_ref().is_none_or(|best| mu < best);
            if better {
                lowest_realized = Some(mu.clone());
            }
        } else {
            if let Some(best) = &lowest_realized {
                if mu > best {
                    return Err(BoundsError::NonMonotonePredicate(format!(
                        "sigma_{n} not realized at mu = {mu} but realized at the smaller mu = {best}"
                    )));
                }
            }
            let better = highest_unrealized.as_ref().is_none_or(|worst| mu > worst);
            if better {
                highest_unrealized = Some(mu.clone());
            }
        }
        probes.push(record.clone());
        Ok(record)
    };

    // Establish the bracket: the threshold is well above 5/8 for every
    // n >= 4, but verify rather than assume, halving toward 1/2 if needed.
    let mut lo = Rational::new(5, 8);
    let mut lo_probe = probe(&lo, &mut probes)?;
    let mut tries = 0;
    while lo_probe.realized() {
        tries += 1;
        if tries > 40 {
            return Err(BoundsError::BracketNotFound(format!(
                "sigma_{n} realized at every probed height down to {lo}"
            )));
        }
        lo = Rational::new(1, 2) + (&lo - &Rational::new(1, 2)) * Rational::new(1, 2);
        lo_probe = probe(&lo, &mut probes)?;
    }
    let mut hi = Rational::one();
    let mut hi_probe = probe(&hi, &mut probes)?;
    if !hi_probe.realized() {
        return Err(BoundsError::BracketNotFound(format!(
            "sigma_{n} not realized by the full tent map; expected a witness near 1/2"
        )));
    }

    let half = Rational::new(1, 2);
    let floor_tol = Rational::new(1, 10_000_000_000_000i64); // 1e-13
    let mut current_tol = tol.clone();
    loop {
        while (&hi - &lo) > current_tol {
            let mid = (&lo + &hi) * &half;
            let record = probe(&mid, &mut probes)?;
            if record.realized() {
                hi = mid;
                hi_probe = record;
            } else {
                lo = mid;
                lo_probe = record;
            }
        }
        let lo_render = lo.to_decimal(6);
        if lo_render == hi.to_decimal(6) {
            return Ok(MuExactBracket {
                n,
                lo,
                hi,
                rendered_6dp: lo_render,
                tol_used: current_tol,
                lo_probe,
                hi_probe,
                probes,
            });
        }
        // The bracket straddles a rounding boundary: tighten and continue.
        current_tol = current_tol * Rational::new(1, 100);
        if current_tol < floor_tol {
            return Err(BoundsError::RenderAmbiguous(current_tol));
        }
    }
}

/// One row of the reference table.
#[derive(Clone, Debug, Serialize, serde::Deserialize)]
pub struct AvoidanceRow {
    pub n: usize,
    pub mu_exact_lo: Rational,
    pub mu_exact_hi: Rational,
    pub mu_exact_6dp: String,
    pub mu_estimate: Option<Enclosure>,
    pub mu_estimate_6dp: Option<String>,
    pub estimate_defined: bool,
}

/// Rows `n_min..=n_max` of the threshold table (estimate and exact
/// columns), computed in parallel. `n_max` is capped at [`MAX_TABLE_N`];
/// use [`table1_with_limit`] to go beyond.
pub fn table1(n_min: usize, n_max: usize, tol: &Rational) -> Result<Vec<AvoidanceRow>, BoundsError> {
    table1_with_limit(n_min, n_max, tol, MAX_TABLE_N)
}

pub fn table1_with_limit(
    n_min: usize,
    n_max: usize,
    tol: &Rational,
    limit: usize,
) -> Result<Vec<AvoidanceRow>, BoundsError> {
    if n_min < 4 || n_min > n_max || n_max > limit {
        let n = if n_min < 4 { n_min } else { n_max };
        return Err(BoundsError::NOutOfRange { n, min: 4, max: limit });
    }
    (n_min..=n_max)
        .into_par_iter()
        .map(|n| {
            let bracket = mu_exact(n, tol, limit)?;
            let (estimate, rendered) = match mu_estimate(n) {
                Ok(enc) => {
                    let rendered = render_estimate_6dp(n)?;
                    (Some(enc), Some(rendered))
                }
                Err(BoundsError::EstimateUndefined(_)) => (None, None),
                Err(other) => return Err(other),
            };
            Ok(AvoidanceRow {
                n,
                mu_exact_lo: bracket.lo,
                mu_exact_hi: bracket.hi,
                mu_exact_6dp: bracket.rendered_6dp,
                estimate_defined: estimate.is_some(),
                mu_estimate: estimate,
                mu_estimate_6dp: rendered,
            })
        })
        .collect()
}

/// Unambiguous 6-decimal rendering of the estimate, tightening the
/// enclosure when it straddles a rounding boundary.
fn render_estimate_6dp(n: usize) -> Result<String, BoundsError> {
    let mut tol = Rational::new(1, 1_000_000_000);
    for _ in 0..4 {
        let enc = mu_estimate_with_tol(n, &tol)?;
        let lo = enc.lo.to_decimal(6);
        if lo == enc.hi.to_decimal(6) {
            return Ok(lo);
        }
        tol = tol * Rational::new(1, 100);
    }
    Err(BoundsError::RenderAmbiguous(tol))
}

/// Classification of a pattern relative to the pair `(T, T_mu)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MuForbiddenStatus {
    /// Allowed for the full map, forbidden for `T_mu`.
    MuForbidden,
    /// Allowed for `T_mu` (hence for the full map as well).
    Allowed,
    /// Not decided here: the pattern is forbidden for the full map too, so
    /// the mu-forbidden notion does not apply, or the length exceeded the
    /// requested cap.
    Unknown,
}

/// Report on whether `pi` separates `T_mu` from the full tent map.
#[derive(Clone, Debug, Serialize)]
pub struct MuForbiddenReport {
    pub mu: Rational,
    pub pi: Permutation,
    pub status: MuForbiddenStatus,
    /// Present exactly when the pattern is allowed for `T_mu`.
    pub witness: Option<UnitPoint>,
}

/// Exact classification of `pi` for the pair `(T, T_mu)`, up to the given
/// length cap (beyond it the scan cost doubles per extra entry, so the
/// status is reported as unknown instead).
pub fn classify_mu_forbidden(
    mu: &Rational,
    pi: &Permutation,
    max_len: usize,
) -> Result<MuForbiddenReport, BoundsError> {
    let map = TentMap::new(mu.clone())?;
    if pi.len() > max_len {
        return Ok(MuForbiddenReport {
            mu: mu.clone(),
            pi: pi.clone(),
            status: MuForbiddenStatus::Unknown,
            witness: None,
        });
    }
    let here = patterns::find_witness(&map, pi);
    if let Some(witness) = here.witness {
        return Ok(MuForbiddenReport {
            mu: mu.clone(),
            pi: pi.clone(),
            status: MuForbiddenStatus::Allowed,
            witness: Some(witness),
        });
    }
    let status = if patterns::is_allowed(&TentMap::full(), pi) {
        MuForbiddenStatus::MuForbidden
    } else {
        MuForbiddenStatus::Unknown
    };
    Ok(MuForbiddenReport { mu: mu.clone(), pi: pi.clone(), status, witness: None })
}

/// One grid row of conjecture evidence.
#[derive(Clone, Debug, Serialize)]
pub struct ConjectureRow {
    pub mu: Rational,
    /// Enclosure of the peak value `h_mu(mu)`.
    pub peak: Enclosure,
    /// `mu^2 + (5/4)(1 - mu)`, the conjectured upper bound on the peak.
    pub conj3_bound: Rational,
    /// Peak enclosure sits below the bound within `2^-d` slack.
    pub conj3_ok: bool,
    /// The enclosure certifies a violation of the conjectured bound.
    pub conj3_certified_violation: bool,
    /// Certified order of this peak against the previous grid row:
    /// `Yes` = certified increase, `No` = certified decrease, `Unknown`
    /// when the enclosures overlap (or for the first row).
    pub monotone_vs_prev: Tristate,
    /// Shortest `n` for which the avoidance of `sigma_n` certifies at this
    /// height, if any within the search cap.
    pub shortest_certified_sigma: Option<usize>,
}

/// Cap for the shortest-avoided-sigma search per grid row.
const SIGMA_SEARCH_MAX: usize = 64;

/// Sweep `grid` heights `1/2 + k/(2 grid)`, `k = 1..=grid`, evaluating the
/// peak enclosure at depth `d` and collecting evidence for the
/// monotonicity and peak-bound conjectures.
pub fn conjecture_evidence(grid: usize, d: usize) -> Result<Vec<ConjectureRow>, BoundsError> {
    if grid < 2 {
        return Err(BoundsError::GridTooSmall(grid));
    }
    let slack = Rational::pow2(-(d as i64));
    let mut rows: Vec<ConjectureRow> = (1..=grid)
        .into_par_iter()
        .map(|k| {
            let mu = Rational::from_big(BigInt::from(grid as u64 + k as u64), BigInt::from(2 * grid as u64))
                .expect("positive denominator");
            let evaluator = CommuterEvaluator::new(mu.clone())?;
            let peak = evaluator.eval_at_peak(d);
            let one_minus = Rational::one() - &mu;
            let conj3_bound = &mu * &mu + Rational::new(5, 4) * &one_minus;
            let conj3_ok = peak.hi <= &conj3_bound + &slack;
            let conj3_certified_violation = peak.lo > conj3_bound;
            let shortest_certified_sigma = (3..=SIGMA_SEARCH_MAX).find(|&n| {
                let threshold = avoidance_threshold(n).expect("n >= 3");
                classify_peak_against_threshold(&peak, &threshold)
                    == AvoidanceOutcome::CertifiedAvoids
            });
            Ok(ConjectureRow {
                mu,
                peak,
                conj3_bound,
                conj3_ok,
                conj3_certified_violation,
                monotone_vs_prev: Tristate::Unknown,
                shortest_certified_sigma,
            })
        })
        .collect::<Result<_, BoundsError>>()?;

    for k in 1..rows.len() {
        let (before, after) = rows.split_at_mut(k);
        after[0].monotone_vs_prev = before[k - 1].peak.strictly_below(&after[0].peak);
    }
    Ok(rows)
}
