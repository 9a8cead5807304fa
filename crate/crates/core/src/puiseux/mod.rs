//! Newton–Puiseux expansion of the roots `y = Y(x)` of `F(x, y) = 0` near the origin.
//!
//! Coefficients are complex doubles; exponents stay exact rationals and each
//! branch carries its own denominators (no global `x → x^{1/r}` substitution).
//! The `x^A` and `y^B` factors of `F` are recorded as counts only.

mod residual;
pub mod roots;

pub use residual::{
    branch_contract_holds, branch_residual_order, residual_contract_holds, ResidualOrder,
    EXACT_RESIDUAL_TOL,
};

use std::collections::BTreeMap;

use num_complex::Complex64;
use num_integer::Integer;
use num_rational::Rational64;
use num_traits::Zero;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::polycore::{
    ratio64_string, BivarPoly, BranchClosure, PuiseuxBranch, PuiseuxTerm, Reality,
};
use roots::{clustered_roots, CLUSTER_TOL};

/// A substituted coefficient is treated as zero when it is this small relative
/// to the magnitudes that were summed to produce it.
pub const CANCEL_TOL: f64 = 1e-8;

/// Guard against runaway expansions.
const MAX_TERMS: usize = 2048;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PuiseuxError {
    #[error("cannot expand the zero polynomial")]
    ZeroPolynomial,
    #[error("residual underflow at x = {x}: |F| scale {scale:e} < 1e-300; use larger samples")]
    NumericalUnderflow { x: f64, scale: f64 },
    #[error("need at least 4 positive samples in (0, 0.5]")]
    BadSamples,
}

/// All branches of `{F = 0}` tending to the origin, plus the axis root counts.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchSet {
    pub branches: Vec<PuiseuxBranch>,
    /// Σ multiplicities, equal to Σ n_α over compact edges.
    pub total_multiplicity: u32,
    /// `(A, B)`: factors `x^A` and `y^B` of `F`.
    pub axis_roots: (u32, u32),
    pub order: Rational64,
    pub cluster_tol: f64,
}

impl BranchSet {
    /// Groups whose roots agree on every computed term but were not proven equal.
    pub fn undetermined_splits(&self) -> usize {
        self.branches
            .iter()
            .filter(|b| b.split_undetermined())
            .count()
    }
}

#[derive(Clone, Debug)]
struct CTerm {
    e: Rational64,
    j: u32,
    c: Complex64,
}

struct Node {
    g: Vec<CTerm>,
    mu: u32,
    prefix: Vec<PuiseuxTerm>,
    exp: Rational64,
}

fn rat(n: i64) -> Rational64 {
    Rational64::from_integer(n)
}

/// Lower-left hull of `(e, j)` points, from the top-left vertex down.
fn lower_hull(pts: &[(Rational64, u32)]) -> Vec<(Rational64, u32)> {
    let mut p: Vec<(Rational64, u32)> = pts.to_vec();
    p.sort_by_key(|q| (q.0, std::cmp::Reverse(q.1)));
    p.dedup();
    let top = p
        .iter()
        .filter(|q| q.0 == p[0].0)
        .map(|q| q.1)
        .min()
        .unwrap();
    let bottom = p.iter().map(|q| q.1).min().unwrap();
    let right = p
        .iter()
        .filter(|q| q.1 == bottom)
        .map(|q| q.0)
        .min()
        .unwrap();
    p.retain(|q| q.0 <= right && q.1 <= top);
    let cross = |o: (Rational64, u32), a: (Rational64, u32), b: (Rational64, u32)| {
        (a.0 - o.0) * rat(b.1 as i64 - o.1 as i64) - rat(a.1 as i64 - o.1 as i64) * (b.0 - o.0)
    };
    let mut hull: Vec<(Rational64, u32)> = Vec::new();
    for q in p {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], q) <= rat(0) {
            hull.pop();
        }
        hull.push(q);
    }
    while hull.len() >= 2 && hull[1].0 == hull[0].0 {
        hull.remove(0);
    }
    hull
}

/// `x^{-m} g(x, x^γ (z + y))`, dropping coefficients lost to cancellation.
fn substitute(g: &[CTerm], gamma: Rational64, z: Complex64, m: Rational64) -> Vec<CTerm> {
    let mut acc: BTreeMap<(Rational64, u32), (Complex64, f64)> = BTreeMap::new();
    for t in g {
        let e = t.e + gamma * rat(t.j as i64) - m;
        let mut binom = 1.0f64;
        for i in 0..=t.j {
            if i > 0 {
                binom = binom * (t.j - i + 1) as f64 / i as f64;
            }
            let v = t.c * z.powu(t.j - i) * binom;
            let slot = acc.entry((e, i)).or_insert((Complex64::zero(), 0.0));
            slot.0 += v;
            slot.1 += v.norm();
        }
    }
    acc.into_iter()
        .filter(|(_, (v, s))| v.norm() > CANCEL_TOL * s)
        .map(|((e, j), (c, _))| CTerm { e, j, c })
        .collect()
}

fn snap(z: Complex64) -> Complex64 {
    let n = z.norm();
    Complex64::new(
        if z.re.abs() <= 1e-10 * n { 0.0 } else { z.re },
        if z.im.abs() <= 1e-10 * n { 0.0 } else { z.im },
    )
}

fn finish(prefix: &[PuiseuxTerm], multiplicity: u32, closure: BranchClosure) -> PuiseuxBranch {
    let reality = if prefix.iter().all(|t| t.coefficient.im == 0.0) {
        Reality::Real
    } else {
        Reality::ComplexPair
    };
    PuiseuxBranch::new(prefix.to_vec(), multiplicity, reality, closure)
}

fn expand(node: Node, order: Rational64, out: &mut Vec<PuiseuxBranch>) {
    let root = node.prefix.is_empty();
    let pts: Vec<(Rational64, u32)> = node
        .g
        .iter()
        .filter(|t| t.j <= node.mu)
        .map(|t| (t.e, t.j))
        .collect();
    let bmin = pts.iter().map(|p| p.1).min().unwrap_or(node.mu);
    if !root && bmin > 0 {
        // y = 0 is an exact root of the substituted polynomial.
        out.push(finish(&node.prefix, bmin, BranchClosure::Exact));
    }
    if bmin == node.mu || pts.is_empty() {
        return;
    }
    if node.prefix.len() >= MAX_TERMS {
        out.push(finish(
            &node.prefix,
            node.mu - bmin,
            BranchClosure::Truncated { order: node.exp },
        ));
        return;
    }
    let hull = lower_hull(&pts);
    let mut pending = 0u32;
    for w in hull.windows(2) {
        let (upper, lower) = (w[0], w[1]);
        let height = upper.1 - lower.1;
        let gamma = (lower.0 - upper.0) / rat(height as i64);
        let next = node.exp + gamma;
        if !root && next > order {
            pending += height;
            continue;
        }
        let line = lower.0 + gamma * rat(lower.1 as i64);
        let on_edge: Vec<&CTerm> = node
            .g
            .iter()
            .filter(|t| t.j <= node.mu && t.e + gamma * rat(t.j as i64) == line)
            .collect();
        let step = on_edge
            .iter()
            .fold(0u32, |acc, t| acc.gcd(&(t.j - lower.1)))
            .max(1);
        let mut phi = vec![Complex64::zero(); (height / step) as usize + 1];
        for t in &on_edge {
            phi[((t.j - lower.1) / step) as usize] += t.c;
        }
        for r in clustered_roots(&phi) {
            let base = r.value.powf(1.0 / step as f64);
            for l in 0..step {
                let z = snap(
                    base * Complex64::from_polar(
                        1.0,
                        2.0 * std::f64::consts::PI * l as f64 / step as f64,
                    ),
                );
                let g = substitute(&node.g, gamma, z, line);
                let mut prefix = node.prefix.clone();
                prefix.push(PuiseuxTerm {
                    exponent: next,
                    coefficient: z,
                });
                expand(
                    Node {
                        g,
                        mu: r.multiplicity,
                        prefix,
                        exp: next,
                    },
                    order,
                    out,
                );
            }
        }
    }
    if pending > 0 {
        out.push(finish(
            &node.prefix,
            pending,
            BranchClosure::Truncated { order },
        ));
    }
}

/// Expands every root `y → 0` of `F` with exponents determined through `order`.
pub fn expand_branches(f: &BivarPoly, order: Rational64) -> Result<BranchSet, PuiseuxError> {
    if f.is_zero() {
        return Err(PuiseuxError::ZeroPolynomial);
    }
    let a = f.terms().map(|(e, _)| e.0).min().unwrap();
    let b = f.terms().map(|(e, _)| e.1).min().unwrap();
    let g: Vec<CTerm> = f
        .terms()
        .map(|(&(i, j), c)| CTerm {
            e: rat((i - a) as i64),
            j: j - b,
            c: Complex64::new(crate::polycore::ratio_to_f64(c), 0.0),
        })
        .collect();
    let mu = g
        .iter()
        .filter(|t| t.e.is_zero())
        .map(|t| t.j)
        .min()
        .unwrap();
    let mut branches = Vec::new();
    expand(
        Node {
            g,
            mu,
            prefix: Vec::new(),
            exp: rat(0),
        },
        order,
        &mut branches,
    );
    branches.sort_by(|p, q| {
        let key = |b: &PuiseuxBranch| {
            b.terms
                .iter()
                .map(|t| (t.exponent, t.coefficient.re, t.coefficient.im))
                .collect::<Vec<_>>()
        };
        key(p)
            .partial_cmp(&key(q))
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let total_multiplicity = branches.iter().map(|b| b.multiplicity).sum();
    Ok(BranchSet {
        branches,
        total_multiplicity,
        axis_roots: (a, b),
        order,
        cluster_tol: CLUSTER_TOL,
    })
}

impl Serialize for BranchSet {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("BranchSet", 5)?;
        st.serialize_field("branches", &self.branches)?;
        st.serialize_field("total_multiplicity", &self.total_multiplicity)?;
        st.serialize_field("axis_roots", &self.axis_roots)?;
        st.serialize_field("order", &ratio64_string(&self.order))?;
        st.serialize_field("cluster_tol", &self.cluster_tol)?;
        st.end()
    }
}
