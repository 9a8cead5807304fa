mod common;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use proptest::prelude::*;

use common::oracle_vertices;
use common::strategies::{exponent, nonzero_poly, nonzero_rational, poly};
use newton_osc::newton::{polygon_of_support, BoundaryCrossing};
use newton_osc::{build_polygon, decay_rate, edge_rates, BivarPoly};

fn int(n: u32) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

proptest! {
    #[test]
    fn single_monomial(a in 0u32..10, b in 0u32..10) {
        let p = build_polygon(&BivarPoly::from_int_terms(&[((a, b), 3)])).unwrap();
        prop_assert_eq!((p.a, p.b), (a, b));
        prop_assert!(p.edges.is_empty());
        let d = decay_rate(&p);
        prop_assert_eq!(d.delta, BigRational::one() / (BigRational::one() + int(a.max(b))));
    }

    #[test]
    fn agrees_with_half_plane_oracle(support in prop::collection::vec(exponent(6), 1..16)) {
        let p = polygon_of_support(&support).unwrap();
        prop_assert_eq!(&p.vertices, &oracle_vertices(&support));
        prop_assert_eq!(p.a, support.iter().map(|s| s.0).min().unwrap());
        prop_assert_eq!(p.b, support.iter().map(|s| s.1).min().unwrap());
    }

    #[test]
    fn delta_is_the_diagonal_crossing(f in nonzero_poly(6, 8)) {
        let p = build_polygon(&f).unwrap();
        let d = decay_rate(&p);
        prop_assert_eq!(&d.delta, &(BigRational::one() / (BigRational::one() + &d.t0)));
        // (t₀, t₀) lies in Γ and nothing smaller on the diagonal does.
        for r in &d.per_edge {
            prop_assert!(r.delta_nu >= d.delta);
            prop_assert_eq!(BigRational::one() / &r.delta_nu, BigRational::one() + &r.t_nu);
        }
        prop_assert!(d.t0 >= int(p.a) && d.t0 >= int(p.b));
        if d.crossing == BoundaryCrossing::Vertex {
            prop_assert!(p.vertices.iter().any(|v| int(v.0) == d.t0 && int(v.1) == d.t0));
        }
    }

    #[test]
    fn unit_invariance(f in nonzero_poly(5, 6), u0 in nonzero_rational(), rest in poly(3, 4)) {
        let mut u = rest;
        u.add_term((0, 0), u0);
        prop_assume!(u.coeff((0, 0)).is_some());
        let uf = &u * &f;
        prop_assert_eq!(build_polygon(&uf).unwrap(), build_polygon(&f).unwrap());
    }
}

#[test]
fn edge_rates_need_an_edge() {
    let p = build_polygon(&BivarPoly::from_int_terms(&[((1, 1), 1)])).unwrap();
    assert!(edge_rates(&p).is_err());
    let d = decay_rate(&p);
    assert_eq!(d.delta, BigRational::new(1.into(), 2.into()));
}
