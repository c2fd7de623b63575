//! Symmetric tent maps: exact evaluation, orbits, and lap decomposition of
//! iterates.
//!
//! A [`TentMap`] of height `mu` sends `x` to `2*mu*x` on `[0, 1/2]` and to
//! `2*mu*(1-x)` on `(1/2, 1]`. Heights are restricted to `1/2 < mu <= 1`;
//! below that the dynamics collapse (an attracting fixed point at `mu < 1/2`,
//! a continuum of fixed points at `mu = 1/2`), so construction rejects them
//! outright rather than clamping.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numerics::{Rational, UnitPoint};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TentMapError {
    #[error("tent map height must satisfy 1/2 < mu <= 1, got {0}")]
    MuOutOfRange(Rational),
    #[error("empty interval: need x < y, got x = {x}, y = {y}")]
    EmptyInterval { x: Rational, y: Rational },
}

/// The symmetric tent map `T_mu` for an exact height `mu` in `(1/2, 1]`.
#[derive(Clone, PartialEq, Eq)]
pub struct TentMap {
    mu: Rational,
    two_mu: Rational,
}

impl TentMap {
    pub fn new(mu: Rational) -> Result<Self, TentMapError> {
        let half = Rational::new(1, 2);
        if mu <= half || mu > Rational::one() {
            return Err(TentMapError::MuOutOfRange(mu));
        }
        let two_mu = &mu * &Rational::from_integer(2);
        Ok(TentMap { mu, two_mu })
    }

    /// The full tent map `T = T_1`.
    pub fn full() -> Self {
        TentMap::new(Rational::one()).expect("mu = 1 is in range")
    }

    pub fn mu(&self) -> &Rational {
        &self.mu
    }

    pub fn two_mu(&self) -> &Rational {
        &self.two_mu
    }

    /// One exact application of the map.
    pub fn eval(&self, x: &UnitPoint) -> UnitPoint {
        UnitPoint::new(self.eval_rational(x.value())).expect("tent map preserves [0,1]")
    }

    /// Same as [`eval`](Self::eval) on a bare rational in `[0, 1]`.
    pub fn eval_rational(&self, x: &Rational) -> Rational {
        let half = Rational::new(1, 2);
        if *x <= half {
            &self.two_mu * x
        } else {
            &self.two_mu * &(Rational::one() - x)
        }
    }

    /// The first `n` orbit points `x, T(x), ..., T^{n-1}(x)`, exact.
    pub fn orbit(&self, x: &UnitPoint, n: usize) -> Vec<Rational> {
        let mut out = Vec::with_capacity(n);
        let mut cur = x.value().clone();
        for _ in 0..n {
            let next = self.eval_rational(&cur);
            out.push(cur);
            cur = next;
        }
        out
    }

    /// Exact lap decomposition of the `n`-th iterate. `n = 0` is the
    /// identity on `[0, 1]`.
    pub fn iterate(&self, n: usize) -> PiecewiseLinearMap {
        let mut map = PiecewiseLinearMap::identity();
        for _ in 0..n {
            map = self.compose_after(&map);
        }
        map
    }

    /// The lap decomposition of `T_mu ∘ P` for a piecewise-linear `P` with
    /// values in `[0, 1]`: each lap of `P` is subdivided where `P` crosses
    /// `1/2`, then the matching branch is applied.
    fn compose_after(&self, map: &PiecewiseLinearMap) -> PiecewiseLinearMap {
        let half = Rational::new(1, 2);
        let two = Rational::from_integer(2);
        let mut breakpoints = vec![map.breakpoints[0].clone()];
        let mut pieces = Vec::new();

        let push_piece = |piece: &AffinePiece, lo: &Rational, hi: &Rational,
                              breakpoints: &mut Vec<Rational>, pieces: &mut Vec<AffinePiece>| {
            // Branch by the piece's value at the open interval's midpoint;
            // endpoints may sit exactly on 1/2 where both branches agree.
            let mid = (lo + hi) / two.clone();
            let below = piece.eval(&mid) <= half;
            let composed = if below {
                AffinePiece {
                    slope: &self.two_mu * &piece.slope,
                    intercept: &self.two_mu * &piece.intercept,
                }
            } else {
                AffinePiece {
                    slope: -&(&self.two_mu * &piece.slope),
                    intercept: &self.two_mu * &(Rational::one() - &piece.intercept),
                }
            };
            breakpoints.push(hi.clone());
            pieces.push(composed);
        };

        for (i, piece) in map.pieces.iter().enumerate() {
            let lo = &map.breakpoints[i];
            let hi = &map.breakpoints[i + 1];
            // Where does this affine piece cross 1/2?
            let crossing = if piece.slope.is_zero() {
                None
            } else {
                let x = &(&half - &piece.intercept) / &piece.slope;
                (&x > lo && &x < hi).then_some(x)
            };
            match crossing {
                Some(x) => {
                    push_piece(piece, lo, &x, &mut breakpoints, &mut pieces);
                    push_piece(piece, &x, hi, &mut breakpoints, &mut pieces);
                }
                None => push_piece(piece, lo, hi, &mut breakpoints, &mut pieces),
            }
        }
        PiecewiseLinearMap { breakpoints, pieces }
    }

    /// All points `x0` with `T^j(x0) = 1/2` for some `j <= depth`, exact,
    /// deduplicated and sorted. Depth 0 is `{1/2}`.
    pub fn preimages_of_half(&self, depth: usize) -> Vec<UnitPoint> {
        let mut all: BTreeSet<Rational> = BTreeSet::new();
        let mut frontier = vec![Rational::new(1, 2)];
        all.insert(Rational::new(1, 2));
        for _ in 0..depth {
            let mut next = Vec::with_capacity(frontier.len() * 2);
            for y in &frontier {
                // Left branch 2*mu*x = y has a solution in [0, 1/2] iff y <= mu.
                if y <= &self.mu {
                    next.push(y / &self.two_mu);
                }
                // Right branch 2*mu*(1-x) = y has a solution in (1/2, 1] iff y < mu.
                if y < &self.mu {
                    next.push(Rational::one() - &(y / &self.two_mu));
                }
            }
            for x in &next {
                all.insert(x.clone());
            }
            frontier = next;
        }
        all.into_iter()
            .map(|r| UnitPoint::new(r).expect("preimages stay in [0,1]"))
            .collect()
    }

    /// Find `x0` strictly between `x` and `y` together with the minimal `n`
    /// such that `T^n(x0) = 1/2`. Existence is guaranteed for `mu > 1/2`:
    /// each application of the map stretches an interval that misses `1/2`
    /// by a factor `2*mu > 1`, so some iterate must cover `1/2`.
    pub fn find_interior_preimage(
        &self,
        x: &UnitPoint,
        y: &UnitPoint,
    ) -> Result<(UnitPoint, usize), TentMapError> {
        if x.value() >= y.value() {
            return Err(TentMapError::EmptyInterval {
                x: x.value().clone(),
                y: y.value().clone(),
            });
        }
        let half = Rational::new(1, 2);
        // Track T^n on (x, y) as a single affine map for as long as the
        // image interval stays inside one branch.
        let mut piece = AffinePiece { slope: Rational::one(), intercept: Rational::zero() };
        for n in 0usize.. {
            let a = piece.eval(x.value());
            let b = piece.eval(y.value());
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            if lo < half && half < hi {
                // Solve T^n(x0) = 1/2 inside (x, y).
                let x0 = &(&half - &piece.intercept) / &piece.slope;
                debug_assert!(x.value() < &x0 && &x0 < y.value());
                return Ok((UnitPoint::new(x0).expect("preimage is interior"), n));
            }
            piece = if hi <= half {
                AffinePiece {
                    slope: &self.two_mu * &piece.slope,
                    intercept: &self.two_mu * &piece.intercept,
                }
            } else {
                AffinePiece {
                    slope: -&(&self.two_mu * &piece.slope),
                    intercept: &self.two_mu * &(Rational::one() - &piece.intercept),
                }
            };
        }
        unreachable!("interval stretching reaches 1/2")
    }
}

impl fmt::Debug for TentMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TentMap(mu = {})", self.mu)
    }
}

/// One affine lap `y = slope * x + intercept`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct AffinePiece {
    pub slope: Rational,
    pub intercept: Rational,
}

impl AffinePiece {
    pub fn eval(&self, x: &Rational) -> Rational {
        &(&self.slope * x) + &self.intercept
    }
}

/// A continuous piecewise-linear map on `[0, 1]`, stored as sorted
/// breakpoints `0 = b_0 < ... < b_k = 1` with one affine piece per
/// consecutive pair. Laps are indexed closed-left/open-right, the final lap
/// closed; continuity makes the convention invisible to evaluation.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct PiecewiseLinearMap {
    breakpoints: Vec<Rational>,
    pieces: Vec<AffinePiece>,
}

impl PiecewiseLinearMap {
    pub fn identity() -> Self {
        PiecewiseLinearMap {
            breakpoints: vec![Rational::zero(), Rational::one()],
            pieces: vec![AffinePiece { slope: Rational::one(), intercept: Rational::zero() }],
        }
    }

    pub fn breakpoints(&self) -> &[Rational] {
        &self.breakpoints
    }

    pub fn pieces(&self) -> &[AffinePiece] {
        &self.pieces
    }

    pub fn lap_count(&self) -> usize {
        self.pieces.len()
    }

    /// Index of the lap containing `x` under the closed-left/open-right
    /// convention (final lap closed).
    pub fn lap_index(&self, x: &Rational) -> usize {
        debug_assert!(!x.is_negative() && *x <= Rational::one());
        // partition_point: first breakpoint strictly greater than x.
        let idx = self.breakpoints.partition_point(|b| b <= x);
        idx.saturating_sub(1).min(self.pieces.len() - 1)
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        self.pieces[self.lap_index(x)].eval(x)
    }

    /// JSON-friendly view with parallel arrays of exact rationals.
    pub fn components(&self) -> PiecewiseLinearMapData {
        PiecewiseLinearMapData {
            breakpoints: self.breakpoints.clone(),
            slopes: self.pieces.iter().map(|p| p.slope.clone()).collect(),
            intercepts: self.pieces.iter().map(|p| p.intercept.clone()).collect(),
        }
    }
}

/// Serialized form of a [`PiecewiseLinearMap`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PiecewiseLinearMapData {
    pub breakpoints: Vec<Rational>,
    pub slopes: Vec<Rational>,
    pub intercepts: Vec<Rational>,
}
