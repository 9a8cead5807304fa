use num_complex::Complex64;
use num_integer::Integer;
use num_rational::Rational64;
use num_traits::ToPrimitive;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};
use thiserror::Error;

use super::ratio64_string;

/// Coefficients smaller than this, relative to the leading one, are dropped.
pub const TERM_DROP_TOL: f64 = 1e-12;

/// One term `c · x^e` of a truncated Puiseux series.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PuiseuxTerm {
    pub exponent: Rational64,
    pub coefficient: Complex64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Reality {
    Real,
    ComplexPair,
}

/// Whether a branch is a finite, exact root or a truncation of an infinite one.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BranchClosure {
    /// The listed terms are the whole root: `F(x, Y(x)) ≡ 0`.
    Exact,
    /// Every term with exponent ≤ `order` is present; later terms were not computed.
    Truncated { order: Rational64 },
}

/// A root `y = Y(x)` of `F(x, y) = 0` for `x > 0`, expanded in fractional powers.
#[derive(Clone, Debug, PartialEq)]
pub struct PuiseuxBranch {
    /// Smallest `r` such that every exponent lies in `(1/r)ℤ`.
    pub ramification: u32,
    pub terms: Vec<PuiseuxTerm>,
    pub multiplicity: u32,
    pub reality: Reality,
    pub closure: BranchClosure,
}

#[derive(Debug, Clone, Copy, PartialEq, Error)]
#[error("branch evaluated at x = {0}, but x must be positive")]
pub struct DomainError(pub f64);

impl PuiseuxBranch {
    /// Assembles a branch, dropping negligible terms and computing the ramification.
    pub fn new(
        terms: Vec<PuiseuxTerm>,
        multiplicity: u32,
        reality: Reality,
        closure: BranchClosure,
    ) -> Self {
        let lead = terms.first().map(|t| t.coefficient.norm()).unwrap_or(0.0);
        let terms: Vec<PuiseuxTerm> = terms
            .into_iter()
            .enumerate()
            .filter(|(i, t)| *i == 0 || t.coefficient.norm() >= TERM_DROP_TOL * lead)
            .map(|(_, t)| t)
            .collect();
        let ramification = terms
            .iter()
            .fold(1i64, |acc, t| acc.lcm(t.exponent.denom()))
            .to_u32()
            .unwrap_or(u32::MAX);
        Self {
            ramification,
            terms,
            multiplicity,
            reality,
            closure,
        }
    }

    pub fn leading_exponent(&self) -> Rational64 {
        self.terms.first().map(|t| t.exponent).unwrap_or_default()
    }

    pub fn leading_coefficient(&self) -> Complex64 {
        self.terms
            .first()
            .map(|t| t.coefficient)
            .unwrap_or_default()
    }

    pub fn is_exact(&self) -> bool {
        self.closure == BranchClosure::Exact
    }

    /// Two roots that agree on every computed term could not be separated.
    pub fn split_undetermined(&self) -> bool {
        self.multiplicity > 1 && !self.is_exact()
    }

    pub fn conjugate(&self) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .map(|t| PuiseuxTerm {
                    exponent: t.exponent,
                    coefficient: t.coefficient.conj(),
                })
                .collect(),
            ..self.clone()
        }
    }

    /// Truncation order; `None` for exact branches.
    pub fn order(&self) -> Option<Rational64> {
        match self.closure {
            BranchClosure::Exact => None,
            BranchClosure::Truncated { order } => Some(order),
        }
    }
}

/// Sums the stored terms at `x > 0`.
pub fn eval_branch(b: &PuiseuxBranch, x: f64) -> Result<Complex64, DomainError> {
    if x.is_nan() || x <= 0.0 {
        return Err(DomainError(x));
    }
    let lx = x.ln();
    Ok(b.terms
        .iter()
        .map(|t| {
            let e = *t.exponent.numer() as f64 / *t.exponent.denom() as f64;
            t.coefficient * (e * lx).exp()
        })
        .sum())
}

impl Serialize for PuiseuxTerm {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("PuiseuxTerm", 3)?;
        st.serialize_field("exp", &ratio64_string(&self.exponent))?;
        st.serialize_field("re", &self.coefficient.re)?;
        st.serialize_field("im", &self.coefficient.im)?;
        st.end()
    }
}

impl Serialize for PuiseuxBranch {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("PuiseuxBranch", 7)?;
        st.serialize_field("leading_exp", &ratio64_string(&self.leading_exponent()))?;
        st.serialize_field("terms", &self.terms)?;
        st.serialize_field("multiplicity", &self.multiplicity)?;
        st.serialize_field("reality", &self.reality)?;
        st.serialize_field("ramification", &self.ramification)?;
        st.serialize_field("exact", &self.is_exact())?;
        st.serialize_field("order", &self.order().map(|o| ratio64_string(&o)))?;
        st.end()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn term(n: i64, d: i64, re: f64) -> PuiseuxTerm {
        PuiseuxTerm {
            exponent: Rational64::new(n, d),
            coefficient: Complex64::new(re, 0.0),
        }
    }

    #[test]
    fn eval_examples() {
        let b = PuiseuxBranch::new(
            vec![term(3, 2, 1.0)],
            1,
            Reality::Real,
            BranchClosure::Exact,
        );
        assert!((eval_branch(&b, 4.0).unwrap() - Complex64::new(8.0, 0.0)).norm() < 1e-14);
        assert_eq!(b.ramification, 2);

        let b = PuiseuxBranch::new(
            vec![term(1, 1, 1.0), term(5, 2, 1.0)],
            1,
            Reality::Real,
            BranchClosure::Exact,
        );
        assert!((eval_branch(&b, 1.0).unwrap() - Complex64::new(2.0, 0.0)).norm() < 1e-15);
        assert_eq!(eval_branch(&b, 0.0), Err(DomainError(0.0)));
        assert_eq!(eval_branch(&b, -1.0), Err(DomainError(-1.0)));
    }

    #[test]
    fn drops_noise_terms() {
        let b = PuiseuxBranch::new(
            vec![term(1, 1, 2.0), term(4, 3, 1e-13), term(2, 1, 0.5)],
            1,
            Reality::Real,
            BranchClosure::Truncated {
                order: Rational64::new(2, 1),
            },
        );
        assert_eq!(b.terms.len(), 2);
        assert_eq!(b.ramification, 1);
    }
}
