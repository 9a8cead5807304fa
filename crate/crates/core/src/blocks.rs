//! Smooth dyadic decomposition `T = Σ T_jk` of the `++` quadrant, block
//! classification against the Newton polygon, and per-block norm estimates.
//!
//! Block `(j, k)` lives on `R_jk = [2^{-j-1}, 2^{-j+1}] × [2^{-k-1}, 2^{-k+1}]`
//! and has kernel `e^{iλS} χ(x,y) χ_j(x) χ_k(y)`.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Signed, Zero};
use rayon::prelude::*;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::newton::NewtonPolygon;
use crate::opnorm::{
    dense_norm, grid_size, op_vdc_bound, operator_norm, size_bound, DiscreteOperator, Domain,
    NormConfig, PhaseSpec, ResolutionError,
};
use crate::polycore::{BivarPoly, CompiledPoly};

fn w(s: f64) -> f64 {
    if s > 0.0 {
        (-1.0 / s).exp()
    } else {
        0.0
    }
}

/// `θ = 1` on `t ≤ 1`, `θ = 0` on `t ≥ 2`, smooth in between.
pub fn theta(t: f64) -> f64 {
    if t <= 1.0 {
        return 1.0;
    }
    if t >= 2.0 {
        return 0.0;
    }
    let (a, b) = (w(2.0 - t), w(t - 1.0));
    a / (a + b)
}

/// Dyadic pieces `χ_j(t) = θ(2^j t) − θ(2^{j+1} t)`, `j_min ≤ j ≤ j_max`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DyadicPartition {
    pub j_min: i32,
    pub j_max: i32,
    /// Replaces `θ` by a flat step at `t = 1.5`; used to check that tests notice.
    pub fault_plateau: bool,
}

impl DyadicPartition {
    pub fn new(j_min: i32, j_max: i32) -> Self {
        assert!(j_min <= j_max, "empty dyadic range");
        Self {
            j_min,
            j_max,
            fault_plateau: false,
        }
    }

    pub fn theta(&self, t: f64) -> f64 {
        if self.fault_plateau {
            if t < 1.5 {
                1.0
            } else {
                0.5
            }
        } else {
            theta(t)
        }
    }

    pub fn chi(&self, j: i32, t: f64) -> f64 {
        let s = (2f64).powi(j);
        self.theta(s * t) - self.theta(2.0 * s * t)
    }

    /// `Σ_{j_min ≤ j ≤ j_max} χ_j(t)`.
    pub fn partial_sum(&self, t: f64) -> f64 {
        (self.j_min..=self.j_max).map(|j| self.chi(j, t)).sum()
    }

    /// Closed form of [`Self::partial_sum`]: `θ(2^{j_min}t) − θ(2^{j_max+1}t)`.
    pub fn telescoped(&self, t: f64) -> f64 {
        self.theta((2f64).powi(self.j_min) * t) - self.theta((2f64).powi(self.j_max + 1) * t)
    }
}

/// Position of a block relative to the polygon.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Region {
    /// Strictly between edges `ν` and `ν + 1`; governed by vertex `ν`.
    Gap(usize),
    /// Within `D` of the line `k = jγ_ν`.
    NearEdge(usize),
    /// `y ≲ x^{γ''}`, next to the `x`-axis (`B > 0`).
    AxisX,
    /// `y ≳ x^{γ'}`, next to the `y`-axis (`A > 0`).
    AxisY,
}

impl Region {
    pub fn is_gap(&self) -> bool {
        matches!(self, Region::Gap(_))
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Region::Gap(nu) => write!(f, "gap({nu})"),
            Region::NearEdge(nu) => write!(f, "near_edge({nu})"),
            Region::AxisX => f.write_str("axis_x"),
            Region::AxisY => f.write_str("axis_y"),
        }
    }
}

impl Serialize for Region {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

fn rational(v: f64) -> BigRational {
    BigRational::from_f64(v).expect("finite gap constant")
}

/// Region of block `(j, k)`, checked in the order near-edge, axis, gap.
///
/// Boundary slopes: `γ' = γ₁/2` if `A > 0`, else `0`; `γ'' = 2γ_last` if
/// `B > 0`, else `∞`. Without compact edges every block is `Gap(0)`.
pub fn classify_block(j: i32, k: i32, poly: &NewtonPolygon, d: f64) -> Region {
    if poly.edges.is_empty() {
        return Region::Gap(0);
    }
    let d = rational(d);
    let jq = BigRational::from_integer(BigInt::from(j));
    let kq = BigRational::from_integer(BigInt::from(k));
    let line = |g: &BigRational| &jq * g;

    let near = poly
        .edges
        .iter()
        .enumerate()
        .map(|(i, e)| (i + 1, (&kq - line(&e.gamma)).abs()))
        .filter(|(_, dist)| *dist < d)
        .min_by(|a, b| a.1.cmp(&b.1));
    if let Some((nu, _)) = near {
        return Region::NearEdge(nu);
    }
    let first = &poly.edges[0].gamma;
    let last = &poly.edges[poly.edges.len() - 1].gamma;
    let two = BigRational::from_integer(BigInt::from(2));
    let lower = (poly.a > 0).then(|| first / &two);
    let upper = (poly.b > 0).then(|| last * &two);
    if let Some(g) = &lower {
        if kq < line(g) + &d {
            return Region::AxisY;
        }
    }
    if let Some(g) = &upper {
        if kq > line(g) - &d {
            return Region::AxisX;
        }
    }
    // Between consecutive edge lines; the outermost gaps are open-ended when
    // there is no axis region beyond them.
    let nu = poly.edges.iter().filter(|e| kq > line(&e.gamma)).count();
    Region::Gap(nu)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("μ = 2^(-jA-kB) is defined only for gap blocks, not {0}")]
pub struct WrongRegion(pub Region);

/// `μ = 2^{−jA_ν−kB_ν}` with `(A_ν, B_ν)` the vertex governing `Gap(ν)`.
pub fn mu_for_block(
    j: i32,
    k: i32,
    region: Region,
    poly: &NewtonPolygon,
) -> Result<f64, WrongRegion> {
    match region {
        Region::Gap(nu) => {
            let (a, b) = poly.vertex(nu);
            Ok((2f64).powi(-(j * a as i32) - k * b as i32))
        }
        other => Err(WrongRegion(other)),
    }
}

/// Rectangle `R_jk`.
pub fn block_rect(j: i32, k: i32) -> Domain {
    Domain {
        x0: (2f64).powi(-j - 1),
        x1: (2f64).powi(-j + 1),
        y0: (2f64).powi(-k - 1),
        y1: (2f64).powi(-k + 1),
    }
}

/// `(min |F|, max |F|)` on a 16×16 grid over `R_jk`, endpoints included.
pub fn sample_abs(f: &CompiledPoly, d: Domain) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    for a in 0..16 {
        let x = d.x0 + (d.x1 - d.x0) * a as f64 / 15.0;
        for b in 0..16 {
            let y = d.y0 + (d.y1 - d.y0) * b as f64 / 15.0;
            let v = f.eval(x, y).abs();
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    (lo, hi)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlockEstimate {
    pub j: i32,
    pub k: i32,
    pub region: Region,
    /// Dyadic `μ` for gap blocks, sampled `min |F|` on `R_jk` otherwise.
    pub mu: f64,
    pub min_f: f64,
    pub max_f: f64,
    pub n: usize,
    pub measured: f64,
    pub size: f64,
    pub osc: f64,
    /// `measured / min(size, osc)`.
    pub ratio: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockConfig {
    pub d: f64,
    pub j_max: i32,
    /// Gap blocks must satisfy `ratio ≤ ratio_cap`.
    pub ratio_cap: f64,
    /// Block grids at or above this size use power iteration instead of SVD.
    pub dense_limit: usize,
    pub norm: NormConfig,
    pub fault_plateau: bool,
}

impl Default for BlockConfig {
    fn default() -> Self {
        Self {
            d: 3.0,
            j_max: 6,
            ratio_cap: 10.0,
            dense_limit: 256,
            norm: NormConfig {
                min_n: 32,
                ..NormConfig::default()
            },
            fault_plateau: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlockReport {
    pub lambda: f64,
    pub d: f64,
    pub blocks: Vec<BlockEstimate>,
    /// Largest `ratio` per region label.
    pub worst_ratio: BTreeMap<String, f64>,
    pub worst_gap_ratio: f64,
    pub gap_pass: bool,
    #[serde(serialize_with = "ser_errors")]
    pub errors: Vec<(i32, i32, ResolutionError)>,
}

fn ser_errors<S: Serializer>(e: &[(i32, i32, ResolutionError)], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(e.iter().map(|(j, k, err)| format!("({j},{k}): {err}")))
}

fn block_kernel<'a>(
    phase: &'a PhaseSpec,
    part: DyadicPartition,
    lambda: f64,
    j: i32,
    k: i32,
) -> impl Fn(f64, f64) -> Complex64 + Send + Sync + 'a {
    let base = phase.kernel(lambda);
    move |x, y| {
        let w = part.chi(j, x) * part.chi(k, y);
        if w == 0.0 {
            Complex64::zero()
        } else {
            base(x, y) * w
        }
    }
}

fn block_norm<K>(kernel: K, d: Domain, n: usize, cfg: &BlockConfig) -> f64
where
    K: Fn(f64, f64) -> Complex64 + Send + Sync,
{
    let op = DiscreteOperator::new(d, n, kernel, cfg.norm.cache_entries);
    if n < cfg.dense_limit {
        dense_norm(&op.to_dense())
    } else {
        match operator_norm(&op, cfg.norm.tol, cfg.norm.max_iter, cfg.norm.seed) {
            Ok(e) => e.value,
            Err(e) => e.value(),
        }
    }
}

/// Measures every nonzero block with `0 ≤ j, k ≤ j_max` and compares it with
/// the size and oscillatory bounds.
pub fn verify_blocks(
    phase: &PhaseSpec,
    f: &BivarPoly,
    lambda: f64,
    poly: &NewtonPolygon,
    cfg: &BlockConfig,
) -> BlockReport {
    let part = DyadicPartition {
        fault_plateau: cfg.fault_plateau,
        ..DyadicPartition::new(0, cfg.j_max)
    };
    let fc = f.compile();
    let rho = phase.rho;
    let pairs: Vec<(i32, i32)> = (0..=cfg.j_max)
        .flat_map(|j| (0..=cfg.j_max).map(move |k| (j, k)))
        .filter(|&(j, k)| (2f64).powi(-j - 1) < rho && (2f64).powi(-k - 1) < rho)
        .collect();
    let results: Vec<Result<BlockEstimate, (i32, i32, ResolutionError)>> = pairs
        .par_iter()
        .map(|&(j, k)| {
            let rect = block_rect(j, k);
            let d = Domain {
                x1: rect.x1.min(rho),
                y1: rect.y1.min(rho),
                ..rect
            };
            let n = grid_size(phase.phase(), lambda, d, &cfg.norm).map_err(|e| (j, k, e))?;
            let measured = block_norm(block_kernel(phase, part, lambda, j, k), d, n, cfg);
            let region = classify_block(j, k, poly, cfg.d);
            let (min_f, max_f) = sample_abs(&fc, rect);
            let mu = mu_for_block(j, k, region, poly).unwrap_or(min_f);
            let size = size_bound(d.x1 - d.x0, d.y1 - d.y0);
            let osc = if lambda > 0.0 && mu > 0.0 {
                op_vdc_bound(lambda, mu)
            } else {
                f64::INFINITY
            };
            Ok(BlockEstimate {
                j,
                k,
                region,
                mu,
                min_f,
                max_f,
                n,
                measured,
                size,
                osc,
                ratio: measured / size.min(osc),
            })
        })
        .collect();
    let mut blocks = Vec::new();
    let mut errors = Vec::new();
    for r in results {
        match r {
            Ok(b) => blocks.push(b),
            Err(e) => errors.push(e),
        }
    }
    let mut worst_ratio: BTreeMap<String, f64> = BTreeMap::new();
    for b in &blocks {
        let e = worst_ratio.entry(b.region.to_string()).or_insert(0.0);
        *e = e.max(b.ratio);
    }
    let worst_gap_ratio = blocks
        .iter()
        .filter(|b| b.region.is_gap())
        .map(|b| b.ratio)
        .fold(0.0, f64::max);
    BlockReport {
        lambda,
        d: cfg.d,
        gap_pass: worst_gap_ratio <= cfg.ratio_cap && errors.is_empty(),
        blocks,
        worst_ratio,
        worst_gap_ratio,
        errors,
    }
}

/// `j,k,region,mu,measured,size_bound,osc_bound,ratio` rows with a header.
pub fn blocks_csv(blocks: &[BlockEstimate]) -> String {
    let mut out = String::from("j,k,region,mu,measured,size_bound,osc_bound,ratio\n");
    for b in blocks {
        out.push_str(&format!(
            "{},{},{},{:?},{:?},{:?},{:?},{:?}\n",
            b.j, b.k, b.region, b.mu, b.measured, b.size, b.osc, b.ratio
        ));
    }
    out
}

/// Relative error `‖(T − Σ T_jk) f‖ / ‖f‖` on the `++` quadrant for `trials`
/// random `f` supported in `y ∈ [2^{-j_max}, ρ]`, with outputs restricted
/// to `x ∈ [2^{-j_max}, ρ]`.
pub fn reconstruction_error(
    phase: &PhaseSpec,
    lambda: f64,
    j_max: i32,
    n: usize,
    trials: usize,
    seed: u64,
) -> f64 {
    use rand::{Rng, SeedableRng};
    let part = DyadicPartition::new(0, j_max);
    let rho = phase.rho;
    let floor = (2f64).powi(-j_max);
    let d = Domain::square(0.0, rho);
    let (xs, ys) = d.midpoints(n);
    let h = rho / n as f64;
    let full = phase.kernel(lambda);
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..trials {
        let f: Vec<Complex64> = ys
            .iter()
            .map(|&y| {
                if y >= floor {
                    Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
                } else {
                    Complex64::zero()
                }
            })
            .collect();
        let fnorm = (f.iter().map(|z| z.norm_sqr()).sum::<f64>() * h).sqrt();
        let mut err = 0.0;
        for &x in xs.iter().filter(|&&x| x >= floor) {
            let mut diff = Complex64::zero();
            for (&y, fy) in ys.iter().zip(&f) {
                let pieces: f64 = (0..=j_max)
                    .map(|j| part.chi(j, x) * part.partial_sum(y))
                    .sum();
                diff += full(x, y) * (1.0 - pieces) * fy * h;
            }
            err += diff.norm_sqr() * h;
        }
        worst = worst.max(err.sqrt() / fnorm);
    }
    worst
}
