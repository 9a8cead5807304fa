//! Roots of complex univariate polynomials with multiplicity detection.

use num_complex::Complex64;

/// Relative tolerance used to decide that nearby roots are one multiple root.
pub const CLUSTER_TOL: f64 = 1e-8;

/// Roots closer than this (relative) are candidates for a cluster; the
/// candidate is accepted only if the derivative test at its centroid passes.
const CANDIDATE_TOL: f64 = 1e-3;

const MAX_ITER: usize = 1000;

/// Finest linkage distance tried before a cluster is split into simple roots.
const MIN_LINK_TOL: f64 = 1e-12;

/// Evaluates `p` and `p'` at `z` (coefficients in ascending degree).
fn eval_with_derivative(p: &[Complex64], z: Complex64) -> (Complex64, Complex64) {
    let mut v = Complex64::new(0.0, 0.0);
    let mut d = Complex64::new(0.0, 0.0);
    for c in p.iter().rev() {
        d = d * z + v;
        v = v * z + c;
    }
    (v, d)
}

/// Taylor coefficient `p^{(k)}(z)/k!` and the matching magnitude scale.
fn taylor_coefficient(p: &[Complex64], z: Complex64, k: usize) -> (Complex64, f64) {
    let mut v = Complex64::new(0.0, 0.0);
    let mut scale = 0.0;
    let mut binom = 1.0f64;
    for (i, c) in p.iter().enumerate().skip(k) {
        if i > k {
            binom = binom * i as f64 / (i - k) as f64;
        }
        let t = c * z.powu((i - k) as u32) * binom;
        scale += t.norm();
        v += t;
    }
    (v, scale)
}

/// All roots of `p` (ascending coefficients, nonzero leading coefficient)
/// by Aberth–Ehrlich iteration.
pub fn aberth(p: &[Complex64]) -> Vec<Complex64> {
    let deg = p.len() - 1;
    if deg == 0 {
        return Vec::new();
    }
    let lead = p[deg];
    let monic: Vec<Complex64> = p.iter().map(|c| c / lead).collect();
    if deg == 1 {
        return vec![-monic[0]];
    }
    // Start on a circle of radius ~ geometric mean of root moduli.
    let radius = monic[0].norm().powf(1.0 / deg as f64).max(1e-300);
    let mut z: Vec<Complex64> = (0..deg)
        .map(|k| {
            let th = 2.0 * std::f64::consts::PI * k as f64 / deg as f64 + 0.4;
            Complex64::from_polar(radius, th)
        })
        .collect();
    for _ in 0..MAX_ITER {
        let mut moved = 0.0f64;
        for i in 0..deg {
            let (v, d) = eval_with_derivative(&monic, z[i]);
            if v.norm() == 0.0 {
                continue;
            }
            let ratio = v / d;
            let repulsion: Complex64 = (0..deg)
                .filter(|&j| j != i)
                .map(|j| {
                    let diff = z[i] - z[j];
                    if diff.norm() == 0.0 {
                        Complex64::new(0.0, 0.0)
                    } else {
                        diff.inv()
                    }
                })
                .sum();
            let step = ratio / (Complex64::new(1.0, 0.0) - ratio * repulsion);
            if step.is_finite() {
                z[i] -= step;
                moved = moved.max(step.norm() / z[i].norm().max(1e-300));
            }
        }
        if moved < 1e-15 {
            break;
        }
    }
    z
}

/// A root with its multiplicity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub value: Complex64,
    pub multiplicity: u32,
}

fn centroid(z: &[Complex64]) -> Complex64 {
    z.iter().sum::<Complex64>() / z.len() as f64
}

/// Relative size of Taylor coefficients attributed to rounding in `p`.
const NOISE: f64 = 1e-12;

/// Radius of the smallest disc around `c` consistent with `m` roots, after
/// discounting rounding noise; zero for an exact `m`-fold root.
fn cluster_radius(p: &[Complex64], c: Complex64, m: usize) -> f64 {
    let (am, _) = taylor_coefficient(p, c, m);
    let mut binom = 1.0f64;
    let mut radius = 0.0f64;
    for k in 0..m {
        if k > 0 {
            binom = binom * (m - k + 1) as f64 / k as f64;
        }
        let (v, s) = taylor_coefficient(p, c, k);
        let excess = (v.norm() - NOISE * s).max(0.0);
        radius = radius.max((excess / (binom * am.norm())).powf(1.0 / (m - k) as f64));
    }
    radius
}

/// `c` is accepted as an `m`-fold root when the implied cluster radius is
/// within `CLUSTER_TOL` relative to `|c|`.
fn verify_cluster(p: &[Complex64], c: Complex64, m: usize) -> bool {
    cluster_radius(p, c, m) <= CLUSTER_TOL * c.norm().max(f64::MIN_POSITIVE)
}

/// Single-linkage grouping of `idx` at relative distance `tol`.
fn link(z: &[Complex64], idx: &[usize], tol: f64) -> Vec<Vec<usize>> {
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut assigned = vec![false; idx.len()];
    for s in 0..idx.len() {
        if assigned[s] {
            continue;
        }
        assigned[s] = true;
        let mut g = vec![idx[s]];
        let mut head = 0;
        while head < g.len() {
            let a = z[g[head]];
            for t in 0..idx.len() {
                if !assigned[t] {
                    let b = z[idx[t]];
                    if (a - b).norm() <= tol * a.norm().max(b.norm()) {
                        assigned[t] = true;
                        g.push(idx[t]);
                    }
                }
            }
            head += 1;
        }
        groups.push(g);
    }
    groups
}

fn resolve(p: &[Complex64], z: &[Complex64], idx: &[usize], tol: f64, out: &mut Vec<Root>) {
    for g in link(z, idx, tol) {
        let pts: Vec<Complex64> = g.iter().map(|&i| z[i]).collect();
        let c = polish(p, centroid(&pts), g.len());
        if g.len() == 1 || verify_cluster(p, c, g.len()) {
            out.push(Root {
                value: c,
                multiplicity: g.len() as u32,
            });
        } else if tol <= MIN_LINK_TOL {
            for &i in &g {
                out.push(Root {
                    value: polish(p, z[i], 1),
                    multiplicity: 1,
                });
            }
        } else {
            resolve(p, z, &g, tol * 0.1, out);
        }
    }
}

/// Newton steps on `p^{(m-1)}`, where an `m`-fold root is simple.
fn polish(p: &[Complex64], c: Complex64, m: usize) -> Complex64 {
    let mut c = c;
    for _ in 0..3 {
        let (v, _) = taylor_coefficient(p, c, m - 1);
        let (d, _) = taylor_coefficient(p, c, m);
        // p^{(m)}/m! relates to the derivative of p^{(m-1)}/(m-1)! by a factor m.
        let step = v / (d * m as f64);
        if !step.is_finite() || step.norm() > CANDIDATE_TOL * c.norm() {
            break;
        }
        c -= step;
    }
    c
}

/// Roots of `p` grouped into clusters with multiplicities summing to `deg p`.
pub fn clustered_roots(p: &[Complex64]) -> Vec<Root> {
    let z = aberth(p);
    let idx: Vec<usize> = (0..z.len()).collect();
    let mut out = Vec::new();
    resolve(p, &z, &idx, CANDIDATE_TOL, &mut out);
    // Real polynomials: snap roots that are real up to rounding.
    if p.iter().all(|c| c.im == 0.0) {
        for r in &mut out {
            if r.value.im.abs() <= 1e-10 * r.value.norm() {
                r.value.im = 0.0;
            }
        }
    }
    out.sort_by(|a, b| {
        (a.value.re, a.value.im)
            .partial_cmp(&(b.value.re, b.value.im))
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    out
}

/// Backward error proxy: `|p(r)| / Σ|c_i||r|^i`.
pub fn relative_residual(p: &[Complex64], r: Complex64) -> f64 {
    let (v, s) = taylor_coefficient(p, r, 0);
    v.norm() / s.max(f64::MIN_POSITIVE)
}
