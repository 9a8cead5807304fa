//! Reference implementations used as test oracles.

#![allow(dead_code)]

use newton_osc::polycore::Exponent;

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

/// Inward normals `(a, b)` with `a, b ≥ 0` of every line through two support
/// points (or an axis-parallel line through one) that keeps the whole
/// support on its closed upper side.
fn supporting_normals(support: &[Exponent], p: Exponent) -> Vec<(i64, i64)> {
    let mut normals = vec![(1, 0), (0, 1)];
    for &q in support {
        if q == p {
            continue;
        }
        let (dx, dy) = (q.0 as i64 - p.0 as i64, q.1 as i64 - p.1 as i64);
        let g = gcd(dx, dy);
        let (mut a, mut b) = (-dy / g, dx / g);
        if a < 0 || b < 0 {
            a = -a;
            b = -b;
        }
        if a >= 0 && b >= 0 {
            normals.push((a, b));
        }
    }
    normals.sort();
    normals.dedup();
    let c = |n: (i64, i64), v: Exponent| n.0 * v.0 as i64 + n.1 * v.1 as i64;
    normals
        .into_iter()
        .filter(|&n| support.iter().all(|&v| c(n, v) >= c(n, p)))
        .collect()
}

/// Vertices of `conv(support) + ℝ₊²` by brute force: a support point is a
/// vertex iff at least two distinct supporting half-planes pass through it.
/// Returned with `y` decreasing.
pub fn oracle_vertices(support: &[Exponent]) -> Vec<Exponent> {
    let mut pts: Vec<Exponent> = support.to_vec();
    pts.sort();
    pts.dedup();
    let mut v: Vec<Exponent> = pts
        .iter()
        .copied()
        .filter(|&p| supporting_normals(&pts, p).len() >= 2)
        .collect();
    v.sort_by_key(|p| std::cmp::Reverse(p.1));
    v
}

pub mod strategies;
