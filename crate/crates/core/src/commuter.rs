//! The commuter `h_mu` between `T_mu` and the full tent map, built by
//! contraction iteration.
//!
//! `h_mu` is the unique fixed point of the operator
//!
//! ```text
//! (M f)(x) = f(2*mu*x) / 2          for x on the left branch,
//! (M f)(x) = 1 - f(2*mu*(1-x)) / 2  for x on the right branch,
//! ```
//!
//! which is a contraction with constant `1/2` on maps of the unit interval.
//! Starting the iteration from the identity, the stage-`d` iterate `f_d`
//! satisfies `|f_d - h_mu| <= 2^-d` everywhere, so `f_d(x) ± 2^-d` is a
//! certified enclosure of `h_mu(x)`. Each `f_d` is computable in exact
//! rational arithmetic, is strictly increasing, and satisfies the exact
//! finite-depth commutation identity `T ∘ f_d = f_{d-1} ∘ T_mu`.

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::numerics::{Enclosure, Rational, UnitPoint};
use crate::tentmap::{TentMap, TentMapError};

/// Contraction constant of the operator family, independent of the height.
pub fn contraction_constant() -> Rational {
    Rational::new(1, 2)
}

/// Which branch of the operator the point `x = 1/2` uses. The two choices
/// produce commuters that differ only at points of discontinuity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum BoundaryConvention {
    /// `x = 1/2` evaluates through the left branch (the primary operator).
    #[default]
    HalfInLeft,
    /// `x = 1/2` evaluates through the right branch (the primed variant).
    HalfInRight,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CommuterError {
    #[error("{x0} does not reach 1/2 within {depth} steps")]
    NotAPreimage { x0: Rational, depth: usize },
    #[error("probe radius must be positive, got {0}")]
    NonPositiveEpsilon(Rational),
    #[error(transparent)]
    TentMap(#[from] TentMapError),
}

/// Evaluator for the contraction iterates `f_d` and their certified
/// enclosures of `h_mu`. Immutable; evaluations are pure.
#[derive(Clone, Debug)]
pub struct CommuterEvaluator {
    map: TentMap,
    convention: BoundaryConvention,
    default_depth: usize,
    denom_cap: Option<u32>,
}

/// Default evaluation depth: `2^-40` is far below the 6-decimal rendering
/// used by the reference table.
pub const DEFAULT_DEPTH: usize = 40;

impl CommuterEvaluator {
    pub fn new(mu: Rational) -> Result<Self, TentMapError> {
        Ok(CommuterEvaluator {
            map: TentMap::new(mu)?,
            convention: BoundaryConvention::default(),
            default_depth: DEFAULT_DEPTH,
            denom_cap: None,
        })
    }

    pub fn with_convention(mut self, convention: BoundaryConvention) -> Self {
        self.convention = convention;
        self
    }

    pub fn with_default_depth(mut self, depth: usize) -> Self {
        self.default_depth = depth;
        self
    }

    /// Cap the denominators of reported enclosure bounds at `2^bits` by
    /// outward dyadic rounding. Only [`eval`](Self::eval) and the
    /// operations built on it are affected; exact evaluation never rounds.
    pub fn with_denom_cap(mut self, bits: u32) -> Self {
        self.denom_cap = Some(bits);
        self
    }

    pub fn mu(&self) -> &Rational {
        self.map.mu()
    }

    pub fn map(&self) -> &TentMap {
        &self.map
    }

    pub fn convention(&self) -> BoundaryConvention {
        self.convention
    }

    pub fn default_depth(&self) -> usize {
        self.default_depth
    }

    fn takes_left_branch(&self, x: &Rational) -> bool {
        let half = Rational::new(1, 2);
        match self.convention {
            BoundaryConvention::HalfInLeft => *x <= half,
            BoundaryConvention::HalfInRight => *x < half,
        }
    }

    /// The exact rational value `f_d(x)`, where `f_0` is the identity and
    /// `f_d = M f_{d-1}`: follow the argument path down `d` levels, then
    /// fold the affine branch maps back up.
    pub fn eval_depth(&self, x: &UnitPoint, d: usize) -> Rational {
        let one = Rational::one();
        let half = Rational::new(1, 2);
        let mut branches = Vec::with_capacity(d);
        let mut y = x.value().clone();
        for _ in 0..d {
            let left = self.takes_left_branch(&y);
            branches.push(left);
            y = if left {
                self.map.two_mu() * &y
            } else {
                self.map.two_mu() * &(&one - &y)
            };
        }
        let mut value = y;
        for left in branches.into_iter().rev() {
            value = if left { &value * &half } else { &one - &(&value * &half) };
        }
        value
    }

    /// Certified enclosure of `h_mu(x)`: `f_d(x) ± 2^-d`, clamped to
    /// `[0, 1]`, then (if a denominator cap is set) coarsened outward to
    /// dyadic bounds. Requires `d >= 1`.
    pub fn eval(&self, x: &UnitPoint, d: usize) -> Enclosure {
        assert!(d >= 1, "enclosure depth must be at least 1");
        let center = self.eval_depth(x, d);
        let radius = Rational::pow2(-(d as i64));
        let enclosure = Enclosure::point(center)
            .widen_unit(&radius)
            .expect("radius is positive");
        match self.denom_cap {
            Some(bits) => enclosure.outward_dyadic(bits).clamp_unit(),
            None => enclosure,
        }
    }

    /// Enclosure of the peak value `h_mu(mu)`, which controls the range
    /// gaps.
    pub fn eval_at_peak(&self, d: usize) -> Enclosure {
        let peak = UnitPoint::new(self.mu().clone()).expect("mu <= 1");
        self.eval(&peak, d)
    }

    /// `|T(f_d(x)) - f_{d-1}(T_mu(x))|` for the full tent map `T`. The
    /// finite-depth commutation identity makes this exactly zero for every
    /// rational `x` and every `d >= 1`.
    pub fn commutation_residual(&self, x: &UnitPoint, d: usize) -> Rational {
        assert!(d >= 1, "residual needs d >= 1");
        let full = TentMap::full();
        let left = full.eval_rational(&self.eval_depth(x, d));
        let right = self.eval_depth(&self.map.eval(x), d - 1);
        (left - right).abs()
    }

    /// Probe the jump of `h_mu` at a point `x0` that reaches `1/2` in at
    /// most `d` steps. Returns the exact two-sided difference
    /// `f_d(x0 + eps) - f_d(x0 - eps)` (probe points clamped into `[0,1]`),
    /// flagged as a certified jump when it exceeds what enclosure widths
    /// (`2 * 2^-d`) plus slope drift (`2 * eps`, the iterates have slope at
    /// most one) could account for. `eps` defaults to `2^-(d/2)`.
    pub fn jump_at(
        &self,
        x0: &UnitPoint,
        d: usize,
        epsilon: Option<Rational>,
    ) -> Result<JumpReport, CommuterError> {
        let preimage_steps = self.steps_to_half(x0, d).ok_or_else(|| {
            CommuterError::NotAPreimage { x0: x0.value().clone(), depth: d }
        })?;
        let eps = match epsilon {
            Some(e) => {
                if e.is_zero() || e.is_negative() {
                    return Err(CommuterError::NonPositiveEpsilon(e));
                }
                e
            }
            None => Rational::pow2(-((d / 2) as i64)),
        };
        let right = UnitPoint::new((x0.value() + &eps).clamp_unit()).expect("clamped");
        let left = UnitPoint::new((x0.value() - &eps).clamp_unit()).expect("clamped");
        let value = self.eval_depth(&right, d) - self.eval_depth(&left, d);
        let allowance = Rational::pow2(1 - d as i64) + &eps * &Rational::from_integer(2);
        let certified = value > allowance;
        let lower_bound = certified.then(|| &value - &allowance);
        Ok(JumpReport { value, certified, lower_bound, preimage_steps, epsilon: eps })
    }

    /// Smallest `j <= limit` with `T_mu^j(x0) = 1/2`, if any.
    fn steps_to_half(&self, x0: &UnitPoint, limit: usize) -> Option<usize> {
        let half = Rational::new(1, 2);
        let mut cur = x0.value().clone();
        for j in 0..=limit {
            if cur == half {
                return Some(j);
            }
            cur = self.map.eval_rational(&cur);
        }
        None
    }

    /// Certified gaps in the range of `h_mu`: around each dyadic
    /// `(2i-1)/2^n` (for `n <= levels`), the open interval of radius
    /// `(1 - h_mu(mu))/2^n` misses the range. The peak value is only known
    /// as an enclosure `H`, so each gap carries the radius bracket
    /// `[(1 - H.hi)/2^n, (1 - H.lo)/2^n]`; only the smaller radius is
    /// certified, and gaps whose certified radius is not positive are
    /// omitted (for `mu = 1` the bracket collapses to zero and no gap is
    /// reported).
    pub fn range_gaps(&self, levels: usize, d: usize) -> Vec<GapInterval> {
        let peak = self.eval_at_peak(d);
        let lo_base = Rational::one() - &peak.hi;
        let hi_base = Rational::one() - &peak.lo;
        let mut gaps = Vec::new();
        if lo_base.is_zero() || lo_base.is_negative() {
            return gaps;
        }
        for level in 1..=levels {
            let scale = Rational::pow2(-(level as i64));
            let radius_lo = &lo_base * &scale;
            let radius_hi = &hi_base * &scale;
            for index in 1..=(1u64 << (level - 1)) {
                let center = Rational::from_integer(2 * index as i64 - 1) * &scale;
                gaps.push(GapInterval {
                    level,
                    index,
                    center,
                    radius_lo: radius_lo.clone(),
                    radius_hi: radius_hi.clone(),
                });
            }
        }
        gaps
    }

    /// `max |f_d(x) - x|` over an evenly spaced rational grid of the given
    /// size (endpoints included). Bounded by `(1 - mu) + 2^-d`, since
    /// `h_mu` is within `1 - mu` of the identity.
    pub fn uniform_distance_to_identity(&self, grid: usize, d: usize) -> Rational {
        assert!(grid >= 2, "grid needs at least two points");
        let denom = Rational::from_integer(grid as i64 - 1);
        (0..grid)
            .into_par_iter()
            .map(|k| {
                let x = Rational::from_integer(k as i64) / denom.clone();
                let point = UnitPoint::new(x.clone()).expect("grid point in [0,1]");
                (self.eval_depth(&point, d) - x).abs()
            })
            .reduce(Rational::zero, Rational::max)
    }
}

/// Summary of a jump probe at a preimage of `1/2`.
#[derive(Clone, Debug, Serialize)]
pub struct JumpReport {
    /// Exact two-sided difference `f_d(x0 + eps) - f_d(x0 - eps)`.
    pub value: Rational,
    /// Whether the difference exceeds everything short of a genuine jump.
    pub certified: bool,
    /// Certified lower bound on the jump, present iff `certified`.
    pub lower_bound: Option<Rational>,
    /// Number of steps for `x0` to reach `1/2`.
    pub preimage_steps: usize,
    /// The probe radius actually used.
    pub epsilon: Rational,
}

/// A certified gap in the range of `h_mu`, centered at the dyadic
/// `(2 * index - 1) / 2^level`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GapInterval {
    pub level: usize,
    pub index: u64,
    pub center: Rational,
    pub radius_lo: Rational,
    pub radius_hi: Rational,
}

impl GapInterval {
    /// The certified open gap `(center - radius_lo, center + radius_lo)`.
    pub fn certified_interval(&self) -> (Rational, Rational) {
        (&self.center - &self.radius_lo, &self.center + &self.radius_lo)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(s: &str) -> Rational {
        s.parse().unwrap()
    }

    fn u(s: &str) -> UnitPoint {
        s.parse().unwrap()
    }

    fn ev(mu: &str) -> CommuterEvaluator {
        CommuterEvaluator::new(r(mu)).unwrap()
    }

    #[test]
    fn endpoints_are_pinned() {
        let e = ev("3/4");
        for d in [0, 1, 5, 20] {
            assert_eq!(e.eval_depth(&u("0"), d), r("0"));
        }
        for d in [1, 5, 20] {
            assert_eq!(e.eval_depth(&u("1"), d), r("1"));
        }
    }

    #[test]
    fn identity_is_fixed_for_full_height() {
        let e = ev("1");
        for xs in ["2/5", "1/3", "9/11", "1/2"] {
            for d in [0, 1, 7, 25] {
                assert_eq!(e.eval_depth(&u(xs), d), r(xs), "x={xs} d={d}");
            }
        }
    }

    #[test]
    fn one_unrolling_by_hand() {
        // f_1(1/2) = f_0(2 * (3/4) * (1/2)) / 2 = (3/4) / 2 = 3/8.
        assert_eq!(ev("3/4").eval_depth(&u("1/2"), 1), r("3/8"));
    }

    #[test]
    fn half_value_identity() {
        for mu in ["3/4", "4/5", "99/100"] {
            let e = ev(mu);
            let peak = UnitPoint::new(r(mu)).unwrap();
            for d in [1, 2, 10, 25] {
                let lhs = e.eval_depth(&u("1/2"), d);
                let rhs = e.eval_depth(&peak, d - 1) * r("1/2");
                assert_eq!(lhs, rhs, "mu={mu} d={d}");
            }
        }
    }

    #[test]
    fn enclosure_at_zero_and_generic_point() {
        let e = ev("3/4");
        let z = e.eval(&u("0"), 10);
        assert_eq!(z.lo, r("0"));
        assert_eq!(z.hi, Rational::pow2(-10));

        let e1 = ev("1");
        let enc = e1.eval(&u("2/5"), 10);
        assert!(enc.contains(&r("2/5")));
        assert!(enc.width() <= Rational::pow2(-9));
    }

    #[test]
    fn peak_enclosure_stays_inside_unit_interval() {
        let enc = ev("3/4").eval(&u("3/4"), 30);
        assert!(enc.width() <= Rational::pow2(-29));
        assert!(enc.hi < r("1"), "peak enclosure must certify h(mu) < 1, got {enc}");
        assert!(enc.lo > r("0"));

        let peak = ev("3/4").eval_at_peak(30);
        assert_eq!(peak, enc);

        assert!(ev("1").eval_at_peak(10).contains(&r("1")));
    }

    #[test]
    fn peak_midpoint_identity_without_clamping() {
        let e = ev("3/4");
        let lhs = e.eval(&u("1/2"), 12).midpoint() * r("2");
        let rhs = e.eval_at_peak(11).midpoint();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn commutation_residual_is_zero() {
        for (mu, x, d) in [("3/4", "3/10", 12), ("1", "23/100", 9), ("4/5", "1/2", 5)] {
            assert_eq!(ev(mu).commutation_residual(&u(x), d), r("0"), "mu={mu} x={x}");
        }
    }

    #[test]
    fn commutation_residual_both_conventions() {
        for conv in [BoundaryConvention::HalfInLeft, BoundaryConvention::HalfInRight] {
            let e = ev("4/5").with_convention(conv);
            for x in ["1/2", "2/7", "13/17"] {
                assert_eq!(e.commutation_residual(&u(x), 8), r("0"), "{conv:?} x={x}");
            }
        }
    }

    #[test]
    fn conventions_agree_away_from_discontinuities() {
        let left = ev("3/4");
        let right = ev("3/4").with_convention(BoundaryConvention::HalfInRight);
        // 3/10 never hits 1/2 along the probed path.
        assert_eq!(left.eval_depth(&u("3/10"), 20), right.eval_depth(&u("3/10"), 20));
        // At 1/2 itself they differ.
        assert_ne!(left.eval_depth(&u("1/2"), 5), right.eval_depth(&u("1/2"), 5));
    }

    #[test]
    fn jump_at_half_is_certified() {
        let e = ev("3/4");
        let d = 30;
        let eps = Rational::pow2(-20);
        let report = e.jump_at(&u("1/2"), d, Some(eps.clone())).unwrap();
        assert_eq!(report.preimage_steps, 0);
        assert!(report.certified);
        assert!(report.value > r("1/16"));
        // The two-sided difference tracks 1 - f_{d-1}(mu) up to slope drift.
        let expected = Rational::one() - e.eval_depth(&u("3/4"), d - 1);
        assert!((&report.value - &expected).abs() <= &eps * &r("2"));
    }

    #[test]
    fn jump_for_identity_is_uncertified() {
        let report = ev("1").jump_at(&u("1/2"), 20, Some(Rational::pow2(-10))).unwrap();
        assert_eq!(report.value, Rational::pow2(-9));
        assert!(!report.certified);
        assert!(report.lower_bound.is_none());
    }

    #[test]
    fn jump_at_depth_one_preimage() {
        let report = ev("3/4").jump_at(&u("1/3"), 30, Some(Rational::pow2(-20))).unwrap();
        assert_eq!(report.preimage_steps, 1);
        assert!(report.certified);
    }

    #[test]
    fn jump_rejects_non_preimages_and_bad_epsilon() {
        let e = ev("3/4");
        assert!(matches!(
            e.jump_at(&u("1/4"), 10, None),
            Err(CommuterError::NotAPreimage { .. })
        ));
        assert!(matches!(
            e.jump_at(&u("1/2"), 10, Some(r("0"))),
            Err(CommuterError::NonPositiveEpsilon(_))
        ));
    }

    #[test]
    fn default_epsilon_is_half_depth() {
        let report = ev("3/4").jump_at(&u("1/2"), 30, None).unwrap();
        assert_eq!(report.epsilon, Rational::pow2(-15));
    }

    #[test]
    fn range_gaps_levels_and_centers() {
        let e = ev("3/4");
        let gaps = e.range_gaps(2, 30);
        assert_eq!(gaps.len(), 3);
        assert_eq!(gaps[0].center, r("1/2"));
        assert_eq!(gaps[1].center, r("1/4"));
        assert_eq!(gaps[2].center, r("3/4"));
        let peak = e.eval_at_peak(30);
        assert_eq!(gaps[0].radius_lo, (Rational::one() - &peak.hi) * r("1/2"));
        assert_eq!(gaps[0].radius_hi, (Rational::one() - &peak.lo) * r("1/2"));
        for g in &gaps {
            assert!(g.radius_lo > r("0") && g.radius_lo <= g.radius_hi);
        }
    }

    #[test]
    fn range_gaps_collapse_for_full_height() {
        assert!(ev("1").range_gaps(4, 20).is_empty());
    }

    #[test]
    fn uniform_distance_examples() {
        assert_eq!(ev("1").uniform_distance_to_identity(100, 10), r("0"));

        let bound = r("1/4") + Rational::pow2(-20);
        assert!(ev("3/4").uniform_distance_to_identity(200, 20) <= bound);

        let bound = r("1/100") + Rational::pow2(-20);
        assert!(ev("99/100").uniform_distance_to_identity(200, 20) <= bound);
    }

    #[test]
    fn denominator_cap_coarsens_outward() {
        let plain = ev("3/4");
        let capped = ev("3/4").with_denom_cap(64);
        let x = u("3/10");
        let fine = plain.eval(&x, 30);
        let coarse = capped.eval(&x, 30);
        assert!(coarse.lo <= fine.lo && fine.hi <= coarse.hi);
        assert!(coarse.lo.denominator() <= &(num_bigint::BigInt::from(1) << 64));
        assert!(coarse.width() <= fine.width() + Rational::pow2(-62));
    }
}
