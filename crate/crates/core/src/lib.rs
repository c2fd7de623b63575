//! Exact ordinal-pattern analysis for symmetric tent maps.
//!
//! The family under study is `T_mu(x) = 2*mu*x` on `[0, 1/2]` and
//! `2*mu*(1-x)` on `(1/2, 1]`, with exact rational height `mu` in
//! `(1/2, 1]`. Everything in this crate is computed in exact rational
//! arithmetic; approximate quantities are only ever reported as certified
//! interval enclosures.
//!
//! The main pieces:
//!
//! * [`numerics`] — arbitrary-precision rationals, unit-interval points and
//!   outward-conservative enclosures.
//! * [`tentmap`] — exact evaluation and lap decomposition of tent-map
//!   iterates.
//! * [`patterns`] — ordinal patterns (`pat`), exact enumeration of the
//!   allowed-pattern sets, and the distinguished patterns
//!   `sigma_n = (n-1) n 1 2 ... (n-2)`.
//! * [`commuter`] — the increasing map `h_mu` with
//!   `T ∘ h_mu = h_mu ∘ T_mu`, built by contraction iteration and evaluated
//!   with certified `2^-d` enclosures; jump probing and range gaps.
//! * [`bounds`] — pattern-avoidance thresholds: the closed-form estimate,
//!   certified avoidance checks, exact threshold bisection and the
//!   reference table, plus conjecture-evidence sweeps.
//! * [`verify`] — named, runnable invariant suites shared by the CLI and
//!   the test harness.
//!
//! ```
//! use tentmorph::numerics::{Rational, UnitPoint};
//! use tentmorph::tentmap::TentMap;
//! use tentmorph::patterns::pat;
//!
//! let map = TentMap::new(Rational::from_integer(1)).unwrap();
//! let x = UnitPoint::new("23/100".parse().unwrap()).unwrap();
//! let pi = pat(&x, &map, 5).unwrap();
//! assert_eq!(pi.to_string(), "24513");
//! ```

// Error values carry exact rationals for reporting; they are cold paths,
// so the size of the Err variant is not worth boxing away.
#![allow(clippy::result_large_err)]

pub mod bounds;
pub mod commuter;
pub mod numerics;
pub mod patterns;
pub mod tentmap;
pub mod verify;

pub use bounds::{AvoidanceOutcome, AvoidanceRow, ConjectureRow, MuExactBracket};
pub use commuter::{BoundaryConvention, CommuterEvaluator, GapInterval, JumpReport};
pub use numerics::{Enclosure, Rational, Tristate, UnitPoint};
pub use patterns::{PatternSet, Permutation, TransferOutcome};
pub use tentmap::{PiecewiseLinearMap, TentMap};
