use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;

use newton_osc::polycore::Exponent;
use newton_osc::BivarPoly;

pub fn rational() -> impl Strategy<Value = BigRational> {
    (-20i64..=20, 1i64..=6).prop_map(|(n, d)| BigRational::new(BigInt::from(n), BigInt::from(d)))
}

pub fn nonzero_rational() -> impl Strategy<Value = BigRational> {
    (1i64..=20, 1i64..=6, any::<bool>()).prop_map(|(n, d, neg)| {
        BigRational::new(BigInt::from(if neg { -n } else { n }), BigInt::from(d))
    })
}

pub fn exponent(max: u32) -> impl Strategy<Value = Exponent> {
    (0..=max, 0..=max)
}

/// Polynomials with up to `terms` terms and exponents in `[0, max]²`.
pub fn poly(max: u32, terms: usize) -> impl Strategy<Value = BivarPoly> {
    prop::collection::vec((exponent(max), rational()), 0..=terms).prop_map(BivarPoly::from_terms)
}

pub fn nonzero_poly(max: u32, terms: usize) -> impl Strategy<Value = BivarPoly> {
    prop::collection::vec((exponent(max), nonzero_rational()), 1..=terms)
        .prop_map(BivarPoly::from_terms)
        .prop_filter("nonzero", |p| !p.is_zero())
}
