//! Newton polygon of `F = S''_xy`, the decay rate `δ`, per-edge rates and
//! complete-degeneracy detection.

mod degeneracy;

pub use degeneracy::{default_order, detect_degeneracy, Degeneracy};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::polycore::{ratio_string, BivarPoly, Exponent};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NewtonError {
    #[error("the zero polynomial has an empty Newton polygon")]
    EmptyPolygon,
    #[error("the Newton polygon has no compact edges")]
    NoCompactEdges,
}

/// A compact edge joining `upper = (A', B')` and `lower = (A, B)` with `B' > B`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeData {
    /// `(A − A')/(B' − B)`, positive.
    pub gamma: BigRational,
    /// `B' − B`.
    pub n: u32,
    pub upper: Exponent,
    pub lower: Exponent,
}

/// Lower-left boundary of `conv(supp F) + ℝ₊²`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NewtonPolygon {
    /// Boundary vertices, `y` strictly decreasing and `x` strictly increasing.
    pub vertices: Vec<Exponent>,
    /// Compact edges ordered by increasing `gamma`.
    pub edges: Vec<EdgeData>,
    /// Offset of the vertical infinite edge.
    pub a: u32,
    /// Offset of the horizontal infinite edge.
    pub b: u32,
}

fn cross(o: Exponent, p: Exponent, q: Exponent) -> i64 {
    let (ox, oy) = (o.0 as i64, o.1 as i64);
    (p.0 as i64 - ox) * (q.1 as i64 - oy) - (p.1 as i64 - oy) * (q.0 as i64 - ox)
}

/// Builds the Newton polygon of a nonzero polynomial.
pub fn build_polygon(f: &BivarPoly) -> Result<NewtonPolygon, NewtonError> {
    if f.is_zero() {
        return Err(NewtonError::EmptyPolygon);
    }
    let support = f.support();
    polygon_of_support(&support)
}

/// Newton polygon of an arbitrary nonempty exponent set.
pub fn polygon_of_support(support: &[Exponent]) -> Result<NewtonPolygon, NewtonError> {
    let a = support
        .iter()
        .map(|e| e.0)
        .min()
        .ok_or(NewtonError::EmptyPolygon)?;
    let b = support.iter().map(|e| e.1).min().expect("nonempty");
    let top = support
        .iter()
        .filter(|e| e.0 == a)
        .map(|e| e.1)
        .min()
        .expect("nonempty");
    let right = support
        .iter()
        .filter(|e| e.1 == b)
        .map(|e| e.0)
        .min()
        .expect("nonempty");

    let mut pts: Vec<Exponent> = support
        .iter()
        .copied()
        .filter(|e| e.0 <= right && e.1 <= top)
        .collect();
    // Within a column the lowest point comes last, so stacked points are popped.
    pts.sort_unstable_by_key(|e| (e.0, std::cmp::Reverse(e.1)));
    pts.dedup();

    // Lower hull, left to right; collinear points are dropped.
    let mut hull: Vec<Exponent> = Vec::with_capacity(pts.len());
    for p in pts {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0 {
            hull.pop();
        }
        hull.push(p);
    }
    // Points sharing the leftmost x sit above (a, top); keep only the lowest.
    while hull.len() >= 2 && hull[1].0 == hull[0].0 {
        hull.remove(0);
    }
    debug_assert_eq!(hull.first(), Some(&(a, top)));
    debug_assert_eq!(hull.last(), Some(&(right, b)));

    let edges = hull
        .windows(2)
        .map(|w| {
            let (upper, lower) = (w[0], w[1]);
            let n = upper.1 - lower.1;
            EdgeData {
                gamma: BigRational::new(BigInt::from(lower.0 - upper.0), BigInt::from(n)),
                n,
                upper,
                lower,
            }
        })
        .collect();
    Ok(NewtonPolygon {
        vertices: hull,
        edges,
        a,
        b,
    })
}

impl NewtonPolygon {
    /// Whether an integer point lies in the (closed) polygon.
    pub fn contains(&self, p: Exponent) -> bool {
        if p.0 < self.a || p.1 < self.b {
            return false;
        }
        self.edges.iter().all(|e| {
            // Supporting line through the edge: n₁ + γ n₂ ≥ A_low + γ B_low.
            let lhs = BigRational::from_integer(p.0.into()) + &e.gamma * BigInt::from(p.1);
            let rhs =
                BigRational::from_integer(e.lower.0.into()) + &e.gamma * BigInt::from(e.lower.1);
            lhs >= rhs
        })
    }

    /// Total number of roots `y → 0` predicted by the polygon: `B + Σ n_α`.
    pub fn root_count(&self) -> u32 {
        self.b + self.edges.iter().map(|e| e.n).sum::<u32>()
    }

    /// Vertex `(A_ν, B_ν)` between edges `ν` and `ν+1` (`ν = 0` is the top vertex).
    pub fn vertex(&self, nu: usize) -> Exponent {
        self.vertices[nu]
    }
}

/// Where the diagonal `n₁ = n₂` leaves the polygon boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryCrossing {
    Vertex,
    CompactEdge(usize),
    InfiniteEdge,
}

impl BoundaryCrossing {
    pub fn label(&self) -> &'static str {
        match self {
            BoundaryCrossing::Vertex => "vertex",
            BoundaryCrossing::CompactEdge(_) => "compact_edge",
            BoundaryCrossing::InfiniteEdge => "infinite_edge",
        }
    }
}

/// Exact data attached to compact edge `ν` (1-based).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeRate {
    pub nu: usize,
    pub gamma: BigRational,
    pub n: u32,
    pub a_nu: BigRational,
    pub b_nu: BigRational,
    /// `(1+γ_ν)/(1 + A_ν + (1+B_ν)γ_ν)`.
    pub delta_nu: BigRational,
    /// Diagonal crossing of the line through edge `ν`.
    pub t_nu: BigRational,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecayReport {
    pub t0: BigRational,
    pub delta: BigRational,
    pub per_edge: Vec<EdgeRate>,
    pub a: u32,
    pub b: u32,
    pub crossing: BoundaryCrossing,
    /// Filled in by the analysis pipeline once branches are known.
    pub degeneracy: Option<Degeneracy>,
}

fn q(n: u32) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// Per-edge vertex coordinates and rates.
pub fn edge_rates(poly: &NewtonPolygon) -> Result<Vec<EdgeRate>, NewtonError> {
    if poly.edges.is_empty() {
        return Err(NewtonError::NoCompactEdges);
    }
    let mut out = Vec::with_capacity(poly.edges.len());
    let mut a_nu = q(poly.a);
    for (i, e) in poly.edges.iter().enumerate() {
        a_nu += &e.gamma * BigInt::from(e.n);
        let b_nu = q(poly.b) + q(poly.edges[i + 1..].iter().map(|e| e.n).sum());
        let one = BigRational::one();
        let delta_nu = (&one + &e.gamma) / (&one + &a_nu + (&one + &b_nu) * &e.gamma);
        let t_nu = (&a_nu + &e.gamma * &b_nu) / (&one + &e.gamma);
        debug_assert_eq!(&one / &delta_nu, &one + &t_nu);
        out.push(EdgeRate {
            nu: i + 1,
            gamma: e.gamma.clone(),
            n: e.n,
            a_nu: a_nu.clone(),
            b_nu,
            delta_nu,
            t_nu,
        });
    }
    Ok(out)
}

/// Computes `t₀` and `δ = 1/(1+t₀)` exactly.
pub fn decay_rate(poly: &NewtonPolygon) -> DecayReport {
    let per_edge = edge_rates(poly).unwrap_or_default();
    // (t,t) ∈ Γ iff every defining half-plane holds, so t₀ is the largest
    // lower bound any of them imposes.
    let mut t0 = q(poly.a.max(poly.b));
    for r in &per_edge {
        if r.t_nu > t0 {
            t0 = r.t_nu.clone();
        }
    }
    let crossing = if t0.is_integer() && poly.vertices.iter().any(|v| q(v.0) == t0 && q(v.1) == t0)
    {
        BoundaryCrossing::Vertex
    } else if let Some(r) = per_edge.iter().find(|r| {
        let e = &poly.edges[r.nu - 1];
        r.t_nu == t0 && q(e.lower.1) < t0 && t0 < q(e.upper.1)
    }) {
        BoundaryCrossing::CompactEdge(r.nu)
    } else {
        BoundaryCrossing::InfiniteEdge
    };
    let delta = BigRational::one() / (BigRational::one() + &t0);
    debug_assert!(delta > BigRational::zero() && delta <= BigRational::one());
    DecayReport {
        t0,
        delta,
        per_edge,
        a: poly.a,
        b: poly.b,
        crossing,
        degeneracy: None,
    }
}

impl Serialize for EdgeRate {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("EdgeRate", 6)?;
        st.serialize_field("nu", &self.nu)?;
        st.serialize_field("gamma", &ratio_string(&self.gamma))?;
        st.serialize_field("n", &self.n)?;
        st.serialize_field("A_nu", &ratio_string(&self.a_nu))?;
        st.serialize_field("B_nu", &ratio_string(&self.b_nu))?;
        st.serialize_field("delta_nu", &ratio_string(&self.delta_nu))?;
        st.end()
    }
}

impl Serialize for DecayReport {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("DecayReport", 7)?;
        st.serialize_field("t0", &ratio_string(&self.t0))?;
        st.serialize_field("delta", &ratio_string(&self.delta))?;
        st.serialize_field("edges", &self.per_edge)?;
        st.serialize_field("A", &self.a)?;
        st.serialize_field("B", &self.b)?;
        st.serialize_field("boundary_crossing", self.crossing.label())?;
        st.serialize_field("degeneracy", &self.degeneracy)?;
        st.end()
    }
}

impl Serialize for NewtonPolygon {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("NewtonPolygon", 4)?;
        st.serialize_field("vertices", &self.vertices)?;
        let edges: Vec<_> = self
            .edges
            .iter()
            .map(|e| {
                serde_json::json!({
                    "gamma": ratio_string(&e.gamma),
                    "n": e.n,
                    "upper": e.upper,
                    "lower": e.lower,
                })
            })
            .collect();
        st.serialize_field("edges", &edges)?;
        st.serialize_field("A", &self.a)?;
        st.serialize_field("B", &self.b)?;
        st.end()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polycore::parse_poly;

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn poly(s: &str) -> NewtonPolygon {
        build_polygon(&parse_poly(s).unwrap()).unwrap()
    }

    fn support(pts: &[Exponent]) -> BivarPoly {
        BivarPoly::from_int_terms(&pts.iter().map(|&e| (e, 1)).collect::<Vec<_>>())
    }

    #[test]
    fn single_points() {
        let g = poly("1");
        assert_eq!(
            (g.vertices.clone(), g.a, g.b, g.edges.len()),
            (vec![(0, 0)], 0, 0, 0)
        );
        let g = poly("x*y");
        assert_eq!(
            (g.vertices.clone(), g.a, g.b, g.edges.len()),
            (vec![(1, 1)], 1, 1, 0)
        );
    }

    #[test]
    fn circle_and_three_point_support() {
        let g = poly("x^2 + y^2");
        assert_eq!(g.vertices, vec![(0, 2), (2, 0)]);
        assert_eq!(g.edges.len(), 1);
        assert_eq!((g.edges[0].gamma.clone(), g.edges[0].n), (r(1, 1), 2));

        let g = build_polygon(&support(&[(0, 3), (2, 1), (5, 0)])).unwrap();
        let e: Vec<_> = g.edges.iter().map(|e| (e.gamma.clone(), e.n)).collect();
        assert_eq!(e, vec![(r(1, 1), 2), (r(3, 1), 1)]);
    }

    #[test]
    fn collinear_points_are_not_vertices() {
        let g = poly("(y-x)^2");
        assert_eq!(g.vertices, vec![(0, 2), (2, 0)]);
        let g = build_polygon(&support(&[(0, 4), (1, 3), (2, 2), (4, 0), (3, 3)])).unwrap();
        assert_eq!(g.vertices, vec![(0, 4), (4, 0)]);
    }

    #[test]
    fn empty_polygon_is_an_error() {
        assert_eq!(
            build_polygon(&BivarPoly::zero()),
            Err(NewtonError::EmptyPolygon)
        );
    }

    #[test]
    fn decay_examples() {
        let d = decay_rate(&poly("1"));
        assert_eq!((d.t0.clone(), d.delta.clone()), (r(0, 1), r(1, 1)));
        let d = decay_rate(&poly("x*y"));
        assert_eq!(
            (d.t0.clone(), d.delta.clone(), d.crossing),
            (r(1, 1), r(1, 2), BoundaryCrossing::Vertex)
        );
        let d = decay_rate(&poly("(y-x)^2"));
        assert_eq!((d.t0.clone(), d.delta.clone()), (r(1, 1), r(1, 2)));
        // N = 2: δ = 2/(N+2).
        assert_eq!(d.delta, r(2, 4));
        let d = decay_rate(&build_polygon(&support(&[(0, 3), (2, 1), (5, 0)])).unwrap());
        assert_eq!((d.t0.clone(), d.delta.clone()), (r(3, 2), r(2, 5)));
        assert_eq!(d.crossing, BoundaryCrossing::CompactEdge(1));
    }

    #[test]
    fn pure_power_crosses_an_infinite_edge() {
        let d = decay_rate(&poly("x^3"));
        assert_eq!(
            (d.t0, d.crossing),
            (r(3, 1), BoundaryCrossing::InfiniteEdge)
        );
        let d = decay_rate(&poly("y^2 + x^5*y"));
        assert_eq!(d.crossing, BoundaryCrossing::CompactEdge(1));
        let d = decay_rate(&poly("x^4*y + y^3"));
        // Edge (0,3)-(4,1) lies on n₁ + 2n₂ = 6, crossed at t = 2.
        assert_eq!(
            (d.t0, d.crossing),
            (r(2, 1), BoundaryCrossing::CompactEdge(1))
        );
    }

    #[test]
    fn edge_rate_examples() {
        let e = edge_rates(&poly("x^2 + y^2")).unwrap();
        assert_eq!(
            (e[0].a_nu.clone(), e[0].b_nu.clone(), e[0].delta_nu.clone()),
            (r(2, 1), r(0, 1), r(1, 2))
        );
        let e = edge_rates(&poly("(y-x)^2")).unwrap();
        assert_eq!(e[0].delta_nu, r(1, 2));

        let g = build_polygon(&support(&[(0, 3), (2, 1), (5, 0)])).unwrap();
        let e = edge_rates(&g).unwrap();
        assert_eq!(e[0].delta_nu, r(2, 5));
        assert_eq!(e[1].delta_nu, r(4, 9));
        assert_eq!(e[0].t_nu, r(3, 2));
        assert_eq!(e[1].t_nu, r(5, 4));
        for x in &e {
            assert_eq!(r(1, 1) / &x.delta_nu, r(1, 1) + &x.t_nu);
            // The (A_ν, B_ν) formula lands on the vertex below edge ν.
            let v = g.vertex(x.nu);
            assert_eq!(
                (x.a_nu.clone(), x.b_nu.clone()),
                (r(v.0 as i64, 1), r(v.1 as i64, 1))
            );
        }
        assert_eq!(edge_rates(&poly("x*y")), Err(NewtonError::NoCompactEdges));
    }

    #[test]
    fn monomials_follow_max_rule() {
        for a in 0..5u32 {
            for b in 0..5u32 {
                let g = build_polygon(&support(&[(a, b)])).unwrap();
                let d = decay_rate(&g);
                assert_eq!((g.a, g.b, g.edges.len()), (a, b, 0));
                assert_eq!(d.delta, r(1, 1 + a.max(b) as i64));
            }
        }
    }

    #[test]
    fn report_json_shape() {
        let d = decay_rate(&poly("x^2 + y^2"));
        let v = serde_json::to_value(&d).unwrap();
        assert_eq!(v["t0"], "1/1");
        assert_eq!(v["delta"], "1/2");
        assert_eq!(v["edges"][0]["A_nu"], "2/1");
        assert_eq!(v["boundary_crossing"], "compact_edge");
    }
}
