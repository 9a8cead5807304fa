use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::ratio_to_f64;

/// Exponent pair `(n₁, n₂)` of the monomial `x^{n₁} y^{n₂}`.
pub type Exponent = (u32, u32);

/// Sparse polynomial in `x`, `y` with exact rational coefficients.
///
/// Zero coefficients are never stored, so the key set is exactly the support.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct BivarPoly {
    terms: BTreeMap<Exponent, BigRational>,
}

impl BivarPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::constant(BigRational::one())
    }

    pub fn x() -> Self {
        Self::monomial((1, 0), BigRational::one())
    }

    pub fn y() -> Self {
        Self::monomial((0, 1), BigRational::one())
    }

    pub fn constant(c: BigRational) -> Self {
        Self::monomial((0, 0), c)
    }

    pub fn monomial(exp: Exponent, c: BigRational) -> Self {
        let mut p = Self::zero();
        p.add_term(exp, c);
        p
    }

    /// Builds a polynomial from `(exponent, coefficient)` pairs, summing repeats.
    pub fn from_terms<I>(terms: I) -> Self
    where
        I: IntoIterator<Item = (Exponent, BigRational)>,
    {
        let mut p = Self::zero();
        for (e, c) in terms {
            p.add_term(e, c);
        }
        p
    }

    /// Convenience constructor from integer coefficients.
    pub fn from_int_terms(terms: &[(Exponent, i64)]) -> Self {
        Self::from_terms(
            terms
                .iter()
                .map(|&(e, c)| (e, BigRational::from_integer(BigInt::from(c)))),
        )
    }

    pub fn add_term(&mut self, exp: Exponent, c: BigRational) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry(exp).or_insert_with(BigRational::zero);
        *slot += c;
        if slot.is_zero() {
            self.terms.remove(&exp);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in canonical (lexicographic by exponent) order.
    pub fn terms(&self) -> impl Iterator<Item = (&Exponent, &BigRational)> {
        self.terms.iter()
    }

    pub fn coeff(&self, exp: Exponent) -> Option<&BigRational> {
        self.terms.get(&exp)
    }

    pub fn support(&self) -> Vec<Exponent> {
        self.terms.keys().copied().collect()
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(|&(a, b)| a + b).max().unwrap_or(0)
    }

    pub fn degree_y(&self) -> u32 {
        self.terms.keys().map(|&(_, b)| b).max().unwrap_or(0)
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        Self {
            terms: self.terms.iter().map(|(e, v)| (*e, v * c)).collect(),
        }
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut acc = Self::one();
        let mut base = self.clone();
        let mut n = n;
        while n > 0 {
            if n & 1 == 1 {
                acc = &acc * &base;
            }
            n >>= 1;
            if n > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    pub fn partial_x(&self) -> Self {
        Self::from_terms(
            self.terms
                .iter()
                .filter(|(e, _)| e.0 > 0)
                .map(|(&(a, b), c)| ((a - 1, b), c * BigRational::from_integer(BigInt::from(a)))),
        )
    }

    pub fn partial_y(&self) -> Self {
        Self::from_terms(
            self.terms
                .iter()
                .filter(|(e, _)| e.1 > 0)
                .map(|(&(a, b), c)| ((a, b - 1), c * BigRational::from_integer(BigInt::from(b)))),
        )
    }

    /// The polynomial `S` with `∂²S/∂x∂y = self`, normalized so that `S`
    /// vanishes on both axes: `x^a y^b ↦ x^{a+1} y^{b+1} / ((a+1)(b+1))`.
    pub fn mixed_antiderivative(&self) -> Self {
        Self::from_terms(self.terms.iter().map(|(&(a, b), c)| {
            let d = BigInt::from((a + 1) as u64 * (b + 1) as u64);
            ((a + 1, b + 1), c / BigRational::from_integer(d))
        }))
    }

    /// Exact value at a rational point.
    pub fn eval_exact(&self, x: &BigRational, y: &BigRational) -> BigRational {
        // Horner in y, inner polynomials in x also by Horner.
        let max_b = self.degree_y();
        let mut rows: Vec<Vec<(u32, &BigRational)>> = vec![Vec::new(); max_b as usize + 1];
        for (&(a, b), c) in &self.terms {
            rows[b as usize].push((a, c));
        }
        let horner_x = |row: &[(u32, &BigRational)]| -> BigRational {
            let mut acc = BigRational::zero();
            let mut deg = row.last().map(|t| t.0).unwrap_or(0);
            for &(a, c) in row.iter().rev() {
                while deg > a {
                    acc *= x;
                    deg -= 1;
                }
                acc += c;
            }
            while deg > 0 {
                acc *= x;
                deg -= 1;
            }
            acc
        };
        let mut acc = BigRational::zero();
        for row in rows.iter().rev() {
            acc *= y;
            if !row.is_empty() {
                acc += horner_x(row);
            }
        }
        acc
    }

    /// Value at a floating-point point, accumulated exactly and rounded once.
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        match (BigRational::from_float(x), BigRational::from_float(y)) {
            (Some(xr), Some(yr)) => ratio_to_f64(&self.eval_exact(&xr, &yr)),
            _ => f64::NAN,
        }
    }

    /// Lossy floating-point copy for hot loops.
    pub fn compile(&self) -> CompiledPoly {
        CompiledPoly {
            terms: self
                .terms
                .iter()
                .map(|(&(a, b), c)| (a as i32, b as i32, ratio_to_f64(c)))
                .collect(),
        }
    }
}

/// Returns `∂²S/∂x∂y` with exact coefficients.
pub fn mixed_derivative(s: &BivarPoly) -> BivarPoly {
    BivarPoly::from_terms(s.terms.iter().filter(|(e, _)| e.0 >= 1 && e.1 >= 1).map(
        |(&(a, b), c)| {
            let k = BigInt::from(a as u64 * b as u64);
            ((a - 1, b - 1), c * BigRational::from_integer(k))
        },
    ))
}

impl Add for &BivarPoly {
    type Output = BivarPoly;
    fn add(self, rhs: &BivarPoly) -> BivarPoly {
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(*e, c.clone());
        }
        out
    }
}

impl Sub for &BivarPoly {
    type Output = BivarPoly;
    fn sub(self, rhs: &BivarPoly) -> BivarPoly {
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(*e, -c.clone());
        }
        out
    }
}

impl Mul for &BivarPoly {
    type Output = BivarPoly;
    fn mul(self, rhs: &BivarPoly) -> BivarPoly {
        let mut out = BivarPoly::zero();
        for (&(a1, b1), c1) in &self.terms {
            for (&(a2, b2), c2) in &rhs.terms {
                out.add_term((a1 + a2, b1 + b2), c1 * c2);
            }
        }
        out
    }
}

impl Neg for &BivarPoly {
    type Output = BivarPoly;
    fn neg(self) -> BivarPoly {
        BivarPoly {
            terms: self.terms.iter().map(|(e, c)| (*e, -c.clone())).collect(),
        }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for BivarPoly {
            type Output = BivarPoly;
            fn $m(self, rhs: BivarPoly) -> BivarPoly {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for BivarPoly {
    type Output = BivarPoly;
    fn neg(self) -> BivarPoly {
        -&self
    }
}

/// Canonical text form, accepted back by [`super::parse_poly`].
impl fmt::Display for BivarPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (&(a, b), c)) in self.terms.iter().enumerate() {
            let neg = c.is_negative();
            let mag = c.abs();
            if i == 0 {
                if neg {
                    f.write_str("-")?;
                }
            } else {
                f.write_str(if neg { " - " } else { " + " })?;
            }
            let mut factors: Vec<String> = Vec::new();
            if !mag.is_one() || (a == 0 && b == 0) {
                factors.push(if mag.is_integer() {
                    mag.numer().to_string()
                } else {
                    format!("{}/{}", mag.numer(), mag.denom())
                });
            }
            for (var, p) in [("x", a), ("y", b)] {
                match p {
                    0 => {}
                    1 => factors.push(var.to_string()),
                    _ => factors.push(format!("{var}^{p}")),
                }
            }
            f.write_str(&factors.join("*"))?;
        }
        Ok(())
    }
}

/// `f64` image of a [`BivarPoly`] used by the numerical kernels.
#[derive(Clone, Debug)]
pub struct CompiledPoly {
    terms: Vec<(i32, i32, f64)>,
}

impl CompiledPoly {
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        self.terms
            .iter()
            .map(|&(a, b, c)| c * x.powi(a) * y.powi(b))
            .sum()
    }

    /// `(∂/∂x, ∂/∂y)` at a point.
    pub fn gradient(&self, x: f64, y: f64) -> (f64, f64) {
        let mut gx = 0.0;
        let mut gy = 0.0;
        for &(a, b, c) in &self.terms {
            if a > 0 {
                gx += c * a as f64 * x.powi(a - 1) * y.powi(b);
            }
            if b > 0 {
                gy += c * b as f64 * x.powi(a) * y.powi(b - 1);
            }
        }
        (gx, gy)
    }

    /// Value at real `x`, complex `y`, plus the sum of term magnitudes
    /// (the scale against which rounding noise is judged).
    pub fn eval_complex_y(&self, x: f64, y: Complex64) -> (Complex64, f64) {
        let mut acc = Complex64::new(0.0, 0.0);
        let mut mag = 0.0;
        for &(a, b, c) in &self.terms {
            let t = y.powi(b) * (c * x.powi(a));
            mag += t.norm();
            acc += t;
        }
        (acc, mag)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}
