mod common;

use num_complex::Complex64;
use num_rational::Rational64;
use proptest::prelude::*;

use newton_osc::polycore::ratio_to_f64;
use newton_osc::puiseux::{branch_contract_holds, branch_residual_order};
use newton_osc::{build_polygon, expand_branches, BivarPoly};

// Non-dyadic, so that residuals of branches with coefficients like 2^(2/3)
// cannot cancel exactly at a sample.
// Small enough to be past the pre-asymptotic sign changes of the residual,
// large enough that coefficient rounding stays below the truncation error.
const SAMPLES: [f64; 6] = [3e-3, 1.1e-3, 3.7e-4, 1.3e-4, 4.1e-5, 1.4e-5];

/// Integer polynomials of `y`-degree 1..=3 with a pure `y` power, so that
/// every compact edge carries branches.
fn curve() -> impl Strategy<Value = BivarPoly> {
    (
        1u32..=3,
        prop::collection::vec(((0u32..=4, 0u32..=3), -4i64..=4), 1..6),
        1i64..=3,
    )
        .prop_map(|(deg, terms, lead)| {
            let mut all: Vec<_> = terms.into_iter().filter(|((_, b), _)| *b < deg).collect();
            all.push(((0, deg), lead));
            BivarPoly::from_int_terms(&all)
        })
        .prop_filter("has an edge", |f| {
            build_polygon(f)
                .map(|p| !p.edges.is_empty())
                .unwrap_or(false)
        })
}

fn key(c: Complex64) -> (i64, i64) {
    ((c.re * 1e6).round() as i64, (c.im * 1e6).round() as i64)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn multiplicities_match_edge_heights(f in curve()) {
        let poly = build_polygon(&f).unwrap();
        let set = expand_branches(&f, Rational64::from_integer(3)).unwrap();
        for e in &poly.edges {
            let g = ratio_to_f64(&e.gamma);
            let m: u32 = set
                .branches
                .iter()
                .filter(|b| {
                    let l = b.leading_exponent();
                    (*l.numer() as f64 / *l.denom() as f64 - g).abs() < 1e-12
                })
                .map(|b| b.multiplicity)
                .sum();
            prop_assert_eq!(m, e.n, "edge γ = {}", e.gamma);
        }
        prop_assert_eq!(set.total_multiplicity, poly.edges.iter().map(|e| e.n).sum::<u32>());
    }

    #[test]
    fn closed_under_conjugation(f in curve()) {
        let set = expand_branches(&f, Rational64::from_integer(3)).unwrap();
        let sig = |conj: bool| {
            let mut v: Vec<Vec<(Rational64, (i64, i64))>> = set
                .branches
                .iter()
                .map(|b| {
                    b.terms
                        .iter()
                        .map(|t| (t.exponent, key(if conj { t.coefficient.conj() } else { t.coefficient })))
                        .collect()
                })
                .collect();
            v.sort();
            v
        };
        prop_assert_eq!(sig(false), sig(true));
    }

    #[test]
    fn leading_terms_solve_the_edge_equation(f in curve()) {
        let poly = build_polygon(&f).unwrap();
        let set = expand_branches(&f, Rational64::from_integer(3)).unwrap();
        for b in &set.branches {
            let l = b.leading_exponent();
            let e = poly
                .edges
                .iter()
                .find(|e| ratio_to_f64(&e.gamma) == *l.numer() as f64 / *l.denom() as f64);
            prop_assert!(e.is_some(), "exponent {} is not an edge slope", l);
            let e = e.unwrap();
            let c = b.leading_coefficient();
            let (mut val, mut scale) = (Complex64::new(0.0, 0.0), 0.0);
            for (&(a, j), coef) in f.terms() {
                // On the edge line: a + γ·j = const.
                let on_edge = ratio_to_f64(&e.gamma) * (j as f64 - e.lower.1 as f64)
                    + (a as f64 - e.lower.0 as f64);
                if on_edge.abs() < 1e-12 {
                    let t = c.powu(j - e.lower.1) * ratio_to_f64(coef);
                    val += t;
                    scale += t.norm();
                }
            }
            prop_assert!(val.norm() <= 1e-8 * scale.max(1.0), "{} at {}", val, c);
        }
    }

    #[test]
    fn simple_branches_meet_the_residual_contract(f in curve()) {
        let set = expand_branches(&f, Rational64::from_integer(3)).unwrap();
        for b in set.branches.iter().filter(|b| b.multiplicity == 1) {
            let r = branch_residual_order(&f, b, &SAMPLES).unwrap();
            prop_assert!(branch_contract_holds(&f, &r, b), "{:?} for {:?}", r.points, b.order());
        }
    }
}
