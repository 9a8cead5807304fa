//! Exact sparse bivariate polynomials over ℚ and truncated Puiseux series.

mod branch;
mod parse;
mod poly;

pub use branch::{eval_branch, BranchClosure, DomainError, PuiseuxBranch, PuiseuxTerm, Reality};
pub use parse::{parse_poly, ParseError};
pub use poly::{mixed_derivative, BivarPoly, CompiledPoly, Exponent};

use num_bigint::BigInt;
use num_rational::{BigRational, Rational64};
use num_traits::{Signed, ToPrimitive};

/// Renders a rational as `"p/q"` (denominator always present).
pub fn ratio_string(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Same as [`ratio_string`] for small exponent rationals.
pub fn ratio64_string(r: &Rational64) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Parses `"p/q"` or a bare integer.
pub fn parse_ratio(s: &str) -> Option<BigRational> {
    let s = s.trim();
    match s.split_once('/') {
        Some((p, q)) => {
            let p: BigInt = p.trim().parse().ok()?;
            let q: BigInt = q.trim().parse().ok()?;
            if q.is_positive() {
                Some(BigRational::new(p, q))
            } else {
                None
            }
        }
        None => Some(BigRational::from_integer(s.parse().ok()?)),
    }
}

/// Nearest `f64` to a big rational.
pub fn ratio_to_f64(r: &BigRational) -> f64 {
    if let Some(v) = r.to_f64() {
        return v;
    }
    // Fall back for magnitudes outside the direct conversion range.
    let n = r.numer().to_f64().unwrap_or(f64::NAN);
    let d = r.denom().to_f64().unwrap_or(f64::NAN);
    n / d
}
