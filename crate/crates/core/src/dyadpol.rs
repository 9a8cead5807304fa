//! Lower bounds for polynomials `P(h) = 1 + Σ aᵢ hⁱ` whose coefficients are
//! pinned to dyadic scales, `|aᵢ| ∈ [C⁻¹2^{rᵢ}, C·2^{rᵢ}]`.
//!
//! Away from the corners of the upper envelope of the lines `y = rᵢ + i·x`
//! (in `x = log₂ h`) a single term dominates, so `|P|` stays bounded below.

use num_rational::Rational64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProfileError {
    #[error("profile needs at least one exponent")]
    Empty,
    #[error("C must be at least 1, got {0}")]
    BadConstant(f64),
}

/// Exponents `r₁…r_N` and the spread constant `C`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExponentProfile {
    pub r: Vec<u32>,
    pub c: f64,
}

impl ExponentProfile {
    pub fn new(r: Vec<u32>, c: f64) -> Result<Self, ProfileError> {
        if r.is_empty() {
            return Err(ProfileError::Empty);
        }
        if !(c >= 1.0 && c.is_finite()) {
            return Err(ProfileError::BadConstant(c));
        }
        Ok(Self { r, c })
    }

    pub fn degree(&self) -> usize {
        self.r.len()
    }

    /// `(r₀ = 0, r₁, …, r_N)`.
    fn lines(&self) -> Vec<i64> {
        std::iter::once(0)
            .chain(self.r.iter().map(|&r| r as i64))
            .collect()
    }

    /// Margin `B' = ⌈log₂(4C²(N+1))⌉` around each corner.
    pub fn margin(&self) -> i64 {
        (4.0 * self.c * self.c * (self.degree() as f64 + 1.0))
            .log2()
            .ceil() as i64
    }

    /// `B = max(2^{N·B'}, 2C²(N+1))`.
    pub fn bound(&self) -> f64 {
        let n = self.degree() as f64;
        (2f64)
            .powf(n * self.margin() as f64)
            .max(2.0 * self.c * self.c * (n + 1.0))
    }
}

/// `x`-coordinates of the corners of the upper envelope of `y = rᵢ + i·x`,
/// `i = 0..=N`, increasing. Concurrent lines produce a single corner.
pub fn envelope_corners(p: &ExponentProfile) -> Vec<Rational64> {
    let r = p.lines();
    let meet = |i: usize, k: usize| Rational64::new(r[i] - r[k], k as i64 - i as i64);
    // Slopes are 0..=N in order, so this is the usual convex-hull trick.
    let mut stack: Vec<usize> = Vec::new();
    for k in 0..r.len() {
        while stack.len() >= 2 {
            let (a, b) = (stack[stack.len() - 2], stack[stack.len() - 1]);
            if meet(a, k) <= meet(a, b) {
                stack.pop();
            } else {
                break;
            }
        }
        stack.push(k);
    }
    stack.windows(2).map(|w| meet(w[0], w[1])).collect()
}

/// `[2^lo, 2^hi]`, or `[0, 2^hi]` when `lo` is `None`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DyadicInterval {
    pub lo: Option<i64>,
    pub hi: i64,
}

impl DyadicInterval {
    pub fn contains(&self, h: f64) -> bool {
        let above = match self.lo {
            None => h >= 0.0,
            Some(lo) => h >= (2f64).powi(lo as i32),
        };
        above && h <= (2f64).powi(self.hi as i32)
    }
}

/// The set `E ⊂ [0, 1]` on which `|P| ≥ 1/B` for every admissible `P`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LowerBoundSet {
    pub intervals: Vec<DyadicInterval>,
    #[serde(rename = "B")]
    pub b: f64,
    #[serde(rename = "B_prime")]
    pub b_prime: i64,
    #[serde(skip)]
    pub corners: Vec<Rational64>,
}

impl LowerBoundSet {
    pub fn contains(&self, h: f64) -> bool {
        self.intervals.iter().any(|iv| iv.contains(h))
    }

    /// `(1 − β_s) + Σ (α_{j+1} − β_j)`.
    pub fn gap_measure(&self) -> i64 {
        let last = self.intervals.last().map(|iv| iv.hi).unwrap_or(0);
        let gaps: i64 = self
            .intervals
            .windows(2)
            .map(|w| w[1].lo.unwrap_or(w[0].hi) - w[0].hi)
            .sum();
        (1 - last) + gaps
    }
}

/// Builds `E` by excising `(⌊x_j⌋ − B', ⌈x_j⌉ + B')` around every corner from `log₂ h ≤ 0`.
pub fn lower_bound_set(p: &ExponentProfile) -> LowerBoundSet {
    let corners = envelope_corners(p);
    let m = p.margin();
    // Open excisions in log₂ h, merged where they overlap or touch.
    let mut cuts: Vec<(i64, i64)> = Vec::new();
    for x in &corners {
        let (lo, hi) = (x.floor().to_integer() - m, x.ceil().to_integer() + m);
        match cuts.last_mut() {
            Some(last) if lo <= last.1 => last.1 = last.1.max(hi),
            _ => cuts.push((lo, hi)),
        }
    }
    let mut intervals = Vec::new();
    let mut start: Option<i64> = None;
    for &(lo, hi) in &cuts {
        let end = lo.min(0);
        if start.is_none_or(|s| s < end) {
            intervals.push(DyadicInterval { lo: start, hi: end });
        }
        start = Some(hi);
        if hi >= 0 {
            break;
        }
    }
    if let Some(s) = start.filter(|&s| s < 0) {
        intervals.push(DyadicInterval { lo: Some(s), hi: 0 });
    }
    LowerBoundSet {
        intervals,
        b: p.bound(),
        b_prime: m,
        corners,
    }
}

/// Checks the structural conclusions: integer ordering, `s ≤ B`,
/// `β₁ ≥ −B·max(1, max rᵢ)` and the gap measure bound.
pub fn structure_holds(p: &ExponentProfile, e: &LowerBoundSet) -> bool {
    let Some(first) = e.intervals.first() else {
        return false;
    };
    let mut prev = f64::NEG_INFINITY;
    for iv in &e.intervals {
        let lo = iv.lo.map_or(f64::NEG_INFINITY, |v| v as f64);
        if !(prev < lo || iv.lo.is_none()) || lo >= iv.hi as f64 || iv.hi > 0 {
            return false;
        }
        prev = iv.hi as f64;
    }
    let rmax = p.r.iter().copied().max().unwrap_or(0).max(1) as f64;
    first.lo.is_none()
        && e.intervals[1..].iter().all(|iv| iv.lo.is_some())
        && (e.intervals.len() as f64) <= e.b
        && first.hi as f64 >= -e.b * rmax
        && (e.gap_measure() as f64) <= e.b
}

/// Outcome of a randomized check of `|P| ≥ 1/B` on `E`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub trials: usize,
    pub evaluations: usize,
    pub min_observed: f64,
    /// `(trial, h)` attaining the minimum.
    pub argmin: (usize, f64),
    pub threshold: f64,
    pub pass: bool,
}

/// Sample points `h ∈ E`: `density` log-uniform points per unit of `log₂ h`,
/// plus the interval endpoints. The unbounded interval is sampled over four units.
fn sample_h(e: &LowerBoundSet, density: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut hs = vec![0.0];
    for iv in &e.intervals {
        let lo = iv.lo.unwrap_or(iv.hi - 4);
        hs.push((2f64).powi(lo as i32));
        hs.push((2f64).powi(iv.hi as i32));
        for unit in lo..iv.hi {
            for _ in 0..density {
                hs.push((2f64).powf(unit as f64 + rng.random::<f64>()));
            }
        }
    }
    hs
}

/// Random admissible coefficients `a₁…a_N`: random sign, log-uniform magnitude.
pub fn sample_coefficients(p: &ExponentProfile, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let lc = p.c.log2();
    p.r.iter()
        .map(|&r| {
            let mag = (2f64).powf(r as f64 + lc * rng.random_range(-1.0..=1.0));
            if rng.random::<bool>() {
                mag
            } else {
                -mag
            }
        })
        .collect()
}

pub fn eval_dyadic(a: &[f64], h: f64) -> f64 {
    a.iter().rev().fold(0.0, |acc, &c| (acc + c) * h) + 1.0
}

/// Samples `trials` random members of the class and evaluates them on `E`.
/// Trial `t` draws from stream `t` of a generator keyed by `seed`.
pub fn verify_lower_bound(
    p: &ExponentProfile,
    e: &LowerBoundSet,
    trials: usize,
    h_density: usize,
    seed: u64,
) -> VerifyReport {
    let results: Vec<(f64, f64, usize)> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(t as u64);
            let a = sample_coefficients(p, &mut rng);
            let hs = sample_h(e, h_density, &mut rng);
            let (mut best, mut at) = (f64::INFINITY, 0.0);
            for &h in &hs {
                let v = eval_dyadic(&a, h).abs();
                if v < best {
                    best = v;
                    at = h;
                }
            }
            (best, at, hs.len())
        })
        .collect();
    let evaluations = results.iter().map(|r| r.2).sum();
    let (trial, &(min_observed, h, _)) = results
        .iter()
        .enumerate()
        .min_by(|a, b| a.1 .0.total_cmp(&b.1 .0))
        .unwrap_or((0, &(f64::INFINITY, 0.0, 0)));
    let threshold = 1.0 / e.b;
    VerifyReport {
        trials,
        evaluations,
        min_observed,
        argmin: (trial, h),
        threshold,
        pass: min_observed >= threshold,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn profile(r: &[u32], c: f64) -> ExponentProfile {
        ExponentProfile::new(r.to_vec(), c).unwrap()
    }

    #[test]
    fn linear_unit_profile() {
        let p = profile(&[0], 2.0);
        assert_eq!(envelope_corners(&p), vec![Rational64::from_integer(0)]);
        let e = lower_bound_set(&p);
        let m = p.margin();
        assert_eq!(m, 5);
        assert_eq!(e.intervals, vec![DyadicInterval { lo: None, hi: -m }]);
        assert!(1.0 - p.c * (2f64).powi(-m as i32) >= 0.5);
        assert!(structure_holds(&p, &e));
    }

    #[test]
    fn corner_neighbourhood_is_excised() {
        let p = profile(&[5], 2.0);
        assert_eq!(envelope_corners(&p), vec![Rational64::from_integer(-5)]);
        let e = lower_bound_set(&p);
        assert!(!e.contains((2f64).powi(-5)));
        // a₁ = −2⁵ makes P vanish there.
        assert_eq!(eval_dyadic(&[-32.0], (2f64).powi(-5)), 0.0);
        assert!(structure_holds(&p, &e));
    }

    #[test]
    fn middle_line_is_never_maximal() {
        let p = profile(&[0, 6], 1.0);
        assert_eq!(envelope_corners(&p), vec![Rational64::from_integer(-3)]);
        let e = lower_bound_set(&p);
        assert!(!e.contains(0.125));
        assert!(structure_holds(&p, &e));
        let rep = verify_lower_bound(&p, &e, 1000, 8, 42);
        assert!(rep.pass, "{rep:?}");
    }

    #[test]
    fn flat_profile_keeps_only_the_leading_interval() {
        let p = profile(&[0, 0, 0], 1.0);
        assert_eq!(envelope_corners(&p), vec![Rational64::from_integer(0)]);
        let e = lower_bound_set(&p);
        assert_eq!(e.intervals.len(), 1);
        assert!(structure_holds(&p, &e));
    }

    #[test]
    fn separated_corners_leave_middle_intervals() {
        let p = profile(&[40, 41], 1.0);
        let e = lower_bound_set(&p);
        assert!(e.intervals.len() >= 2);
        assert!(structure_holds(&p, &e));
        assert!(verify_lower_bound(&p, &e, 200, 4, 7).pass);
    }

    #[test]
    fn verification_is_reproducible() {
        let p = profile(&[3, 9, 2], 2.0);
        let e = lower_bound_set(&p);
        let a = verify_lower_bound(&p, &e, 50, 4, 11);
        let b = verify_lower_bound(&p, &e, 50, 4, 11);
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_invalid_profiles() {
        assert_eq!(ExponentProfile::new(vec![], 2.0), Err(ProfileError::Empty));
        assert_eq!(
            ExponentProfile::new(vec![1], 0.5),
            Err(ProfileError::BadConstant(0.5))
        );
    }
}
