use num_rational::{BigRational, Rational64};
use num_traits::One;
use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};

use super::NewtonPolygon;
use crate::polycore::{ratio64_string, BivarPoly, Reality};
use crate::puiseux::BranchSet;

/// Whether `F` vanishes to order `N` along a single smooth real curve `y = cx + …`.
#[derive(Debug, Clone, PartialEq)]
pub enum Degeneracy {
    NonDegenerate,
    CompletelyDegenerate {
        n: u32,
        c: f64,
    },
    /// The `N` roots agree through `checked_order` but were not shown to coincide.
    Undetermined {
        checked_order: Rational64,
    },
}

/// Expansion order used when none is given: `4·deg F + 8`.
pub fn default_order(f: &BivarPoly) -> Rational64 {
    Rational64::from_integer(4 * f.total_degree() as i64 + 8)
}

pub fn detect_degeneracy(poly: &NewtonPolygon, branches: &BranchSet) -> Degeneracy {
    let [edge] = poly.edges.as_slice() else {
        return Degeneracy::NonDegenerate;
    };
    if poly.a != 0 || poly.b != 0 || edge.gamma != BigRational::one() || edge.n < 2 {
        return Degeneracy::NonDegenerate;
    }
    let [branch] = branches.branches.as_slice() else {
        return Degeneracy::NonDegenerate;
    };
    let c = branch.leading_coefficient();
    if branch.multiplicity != edge.n || branch.reality != Reality::Real || c.re == 0.0 {
        return Degeneracy::NonDegenerate;
    }
    match branch.order() {
        None => Degeneracy::CompletelyDegenerate { n: edge.n, c: c.re },
        Some(checked_order) => Degeneracy::Undetermined { checked_order },
    }
}

impl Serialize for Degeneracy {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(None)?;
        match self {
            Degeneracy::NonDegenerate => m.serialize_entry("kind", "non_degenerate")?,
            Degeneracy::CompletelyDegenerate { n, c } => {
                m.serialize_entry("kind", "completely_degenerate")?;
                m.serialize_entry("N", n)?;
                m.serialize_entry("c", c)?;
            }
            Degeneracy::Undetermined { checked_order } => {
                m.serialize_entry("kind", "undetermined")?;
                m.serialize_entry("checked_order", &ratio64_string(checked_order))?;
            }
        }
        m.end()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::newton::build_polygon;
    use crate::polycore::parse_poly;
    use crate::puiseux::expand_branches;

    fn classify(s: &str) -> Degeneracy {
        let f = parse_poly(s).unwrap();
        let poly = build_polygon(&f).unwrap();
        let set = expand_branches(&f, default_order(&f)).unwrap();
        detect_degeneracy(&poly, &set)
    }

    #[test]
    fn examples() {
        assert_eq!(
            classify("(y-x)^2"),
            Degeneracy::CompletelyDegenerate { n: 2, c: 1.0 }
        );
        assert_eq!(
            classify("(y+2*x)^3*(1+x)"),
            Degeneracy::CompletelyDegenerate { n: 3, c: -2.0 }
        );
        assert_eq!(
            classify("(y - x - x^2)^2"),
            Degeneracy::CompletelyDegenerate { n: 2, c: 1.0 }
        );
        assert_eq!(classify("(y-x)^2 - x^5"), Degeneracy::NonDegenerate);
        assert_eq!(classify("x^2 + y^2"), Degeneracy::NonDegenerate);
        assert_eq!(classify("y - x"), Degeneracy::NonDegenerate);
        assert_eq!(classify("x*(y-x)^2"), Degeneracy::NonDegenerate);
        assert_eq!(classify("y^2 - x^3"), Degeneracy::NonDegenerate);
    }

    #[test]
    fn unresolved_root_is_undetermined() {
        let d = classify("((1-x)*y - x)^2");
        assert_eq!(
            d,
            Degeneracy::Undetermined {
                checked_order: Rational64::from_integer(24)
            }
        );
    }

    #[test]
    fn json_shape() {
        let v = serde_json::to_value(Degeneracy::CompletelyDegenerate { n: 2, c: 1.0 }).unwrap();
        assert_eq!(v["kind"], "completely_degenerate");
        assert_eq!(v["N"], 2);
    }
}
