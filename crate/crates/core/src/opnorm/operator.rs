use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

type Kernel<'a> = Box<dyn Fn(f64, f64) -> Complex64 + Send + Sync + 'a>;

/// Column chunk width for the adjoint; fixed so sums are thread-count independent.
const ADJOINT_CHUNK: usize = 256;

/// Rows per partial sum in [`DiscreteOperator::apply_normal`].
const ROW_BLOCK: usize = 512;

/// Axis-aligned rectangle `[x0, x1] × [y0, y1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Domain {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Domain {
    pub fn square(lo: f64, hi: f64) -> Self {
        Self {
            x0: lo,
            x1: hi,
            y0: lo,
            y1: hi,
        }
    }

    pub fn side(&self) -> f64 {
        (self.x1 - self.x0).max(self.y1 - self.y0)
    }

    /// `n` midpoints per axis.
    pub fn midpoints(&self, n: usize) -> (Vec<f64>, Vec<f64>) {
        let hx = (self.x1 - self.x0) / n as f64;
        let hy = (self.y1 - self.y0) / n as f64;
        (
            (0..n).map(|a| self.x0 + (a as f64 + 0.5) * hx).collect(),
            (0..n).map(|b| self.y0 + (b as f64 + 0.5) * hy).collect(),
        )
    }
}

/// Midpoint discretization `M_ab = K(x_a, y_b)·√(h_x h_y)` of an integral
/// operator, so that `‖M‖₂` approximates the `L²` operator norm.
///
/// The matrix is cached (split into real and imaginary planes) when it has at
/// most `cache_entries` entries and recomputed on every application otherwise.
pub struct DiscreteOperator<'a> {
    n: usize,
    xs: Vec<f64>,
    ys: Vec<f64>,
    weight: f64,
    kernel: Kernel<'a>,
    cache: Option<(Vec<f32>, Vec<f32>)>,
}

/// `Σ_b (r_b + i·m_b)(x_b + i·y_b)` with four fixed accumulators.
fn dot(r: &[f32], m: &[f32], x: &[f64], y: &[f64]) -> Complex64 {
    let mut re = [0.0f64; 4];
    let mut im = [0.0f64; 4];
    let split = r.len() - r.len() % 4;
    for (((r4, m4), x4), y4) in r[..split]
        .chunks_exact(4)
        .zip(m[..split].chunks_exact(4))
        .zip(x[..split].chunks_exact(4))
        .zip(y[..split].chunks_exact(4))
    {
        for l in 0..4 {
            let (r, m) = (r4[l] as f64, m4[l] as f64);
            re[l] += r * x4[l] - m * y4[l];
            im[l] += r * y4[l] + m * x4[l];
        }
    }
    for b in split..r.len() {
        let (rb, mb) = (r[b] as f64, m[b] as f64);
        re[0] += rb * x[b] - mb * y[b];
        im[0] += rb * y[b] + mb * x[b];
    }
    Complex64::new(
        (re[0] + re[1]) + (re[2] + re[3]),
        (im[0] + im[1]) + (im[2] + im[3]),
    )
}

/// `u += conj(r + i·m)·w`.
fn axpy_conj(r: &[f32], m: &[f32], w: Complex64, ur: &mut [f64], ui: &mut [f64]) {
    for (((ur, ui), r), m) in ur.iter_mut().zip(ui.iter_mut()).zip(r).zip(m) {
        let (r, m) = (*r as f64, *m as f64);
        *ur += r * w.re + m * w.im;
        *ui += r * w.im - m * w.re;
    }
}

fn split(v: &[Complex64]) -> (Vec<f64>, Vec<f64>) {
    (
        v.iter().map(|z| z.re).collect(),
        v.iter().map(|z| z.im).collect(),
    )
}

impl<'a> DiscreteOperator<'a> {
    pub fn new<K>(domain: Domain, n: usize, kernel: K, cache_entries: usize) -> Self
    where
        K: Fn(f64, f64) -> Complex64 + Send + Sync + 'a,
    {
        let (xs, ys) = domain.midpoints(n);
        let weight = ((domain.x1 - domain.x0) * (domain.y1 - domain.y0)).sqrt() / n as f64;
        let mut op = Self {
            n,
            xs,
            ys,
            weight,
            kernel: Box::new(kernel),
            cache: None,
        };
        if n * n <= cache_entries {
            let mut re = vec![0.0f32; n * n];
            let mut im = vec![0.0f32; n * n];
            re.par_chunks_mut(n)
                .zip(im.par_chunks_mut(n))
                .enumerate()
                .for_each(|(a, (r, m))| op.fill_row(a, 0, r, m));
            op.cache = Some((re, im));
        }
        op
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn is_cached(&self) -> bool {
        self.cache.is_some()
    }

    /// Entries are rounded to single precision; all arithmetic on them is double.
    fn compute(&self, a: usize, b: usize) -> (f32, f32) {
        let z = (self.kernel)(self.xs[a], self.ys[b]) * self.weight;
        (z.re as f32, z.im as f32)
    }

    fn fill_row(&self, a: usize, b0: usize, re: &mut [f32], im: &mut [f32]) {
        for (i, (r, m)) in re.iter_mut().zip(im.iter_mut()).enumerate() {
            (*r, *m) = self.compute(a, b0 + i);
        }
    }

    pub fn entry(&self, a: usize, b: usize) -> Complex64 {
        let (r, m) = match &self.cache {
            Some((re, im)) => (re[a * self.n + b], im[a * self.n + b]),
            None => self.compute(a, b),
        };
        Complex64::new(r as f64, m as f64)
    }

    /// Runs `f` on the real and imaginary parts of `M[a, b0..b0+len]`.
    fn with_segment<R>(
        &self,
        a: usize,
        b0: usize,
        len: usize,
        buf: &mut (Vec<f32>, Vec<f32>),
        f: impl FnOnce(&[f32], &[f32]) -> R,
    ) -> R {
        match &self.cache {
            Some((re, im)) => {
                let s = a * self.n + b0;
                f(&re[s..s + len], &im[s..s + len])
            }
            None => {
                buf.0.resize(len, 0.0);
                buf.1.resize(len, 0.0);
                self.fill_row(a, b0, &mut buf.0, &mut buf.1);
                f(&buf.0, &buf.1)
            }
        }
    }

    /// `(Mf)_a = Σ_b M_ab f_b`.
    pub fn apply(&self, f: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(f.len(), self.n);
        let (fr, fi) = split(f);
        (0..self.n)
            .into_par_iter()
            .map_init(
                || (Vec::new(), Vec::new()),
                |buf, a| self.with_segment(a, 0, self.n, buf, |r, m| dot(r, m, &fr, &fi)),
            )
            .collect()
    }

    /// `(M*g)_b = Σ_a conj(M_ab) g_a`.
    pub fn apply_adjoint(&self, g: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(g.len(), self.n);
        let mut out = vec![Complex64::new(0.0, 0.0); self.n];
        out.par_chunks_mut(ADJOINT_CHUNK)
            .enumerate()
            .for_each(|(c, chunk)| {
                let b0 = c * ADJOINT_CHUNK;
                let len = chunk.len();
                let mut ur = vec![0.0f64; len];
                let mut ui = vec![0.0f64; len];
                let mut buf = (Vec::new(), Vec::new());
                for (a, ga) in g.iter().enumerate() {
                    let (gr, gi) = (ga.re, ga.im);
                    self.with_segment(a, b0, len, &mut buf, |r, m| {
                        axpy_conj(r, m, Complex64::new(gr, gi), &mut ur, &mut ui)
                    });
                }
                for (o, (r, i)) in chunk.iter_mut().zip(ur.into_iter().zip(ui)) {
                    *o = Complex64::new(r, i);
                }
            });
        out
    }

    /// `(M*Mv, ‖Mv‖²)` in one sweep over the rows: each row is used for
    /// `(Mv)_a` and then, while still in cache, for the adjoint update.
    pub fn apply_normal(&self, v: &[Complex64]) -> (Vec<Complex64>, f64) {
        assert_eq!(v.len(), self.n);
        let n = self.n;
        let (vr, vi) = split(v);
        let blocks: Vec<(Vec<f64>, Vec<f64>, f64)> = (0..n.div_ceil(ROW_BLOCK))
            .into_par_iter()
            .map(|blk| {
                let mut ur = vec![0.0f64; n];
                let mut ui = vec![0.0f64; n];
                let mut mass = 0.0;
                let mut buf = (Vec::new(), Vec::new());
                for a in blk * ROW_BLOCK..((blk + 1) * ROW_BLOCK).min(n) {
                    self.with_segment(a, 0, n, &mut buf, |r, m| {
                        let w = dot(r, m, &vr, &vi);
                        mass += w.norm_sqr();
                        axpy_conj(r, m, w, &mut ur, &mut ui);
                    });
                }
                (ur, ui, mass)
            })
            .collect();
        let mut ur = vec![0.0f64; n];
        let mut ui = vec![0.0f64; n];
        let mut mass = 0.0;
        for (br, bi, bm) in blocks {
            for b in 0..n {
                ur[b] += br[b];
                ui[b] += bi[b];
            }
            mass += bm;
        }
        let u = ur
            .into_iter()
            .zip(ui)
            .map(|(r, i)| Complex64::new(r, i))
            .collect();
        (u, mass)
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        DMatrix::from_fn(self.n, self.n, |a, b| self.entry(a, b))
    }

    /// `(max row Σ|M|, max column Σ|M|)`.
    pub fn abs_sums(&self) -> (f64, f64) {
        let mut rows = vec![0.0f64; self.n];
        let mut cols = vec![0.0f64; self.n];
        let mut buf = (Vec::new(), Vec::new());
        for (a, row) in rows.iter_mut().enumerate() {
            self.with_segment(a, 0, self.n, &mut buf, |r, m| {
                for b in 0..self.n {
                    let v = (r[b] as f64).hypot(m[b] as f64);
                    *row += v;
                    cols[b] += v;
                }
            });
        }
        let max = |v: &[f64]| v.iter().copied().fold(0.0, f64::max);
        (max(&rows), max(&cols))
    }
}

/// Largest singular value by dense SVD.
pub fn dense_norm(m: &DMatrix<Complex64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().singular_values().max()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormEstimate {
    pub value: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Error)]
#[error(
    "power iteration stopped after {iterations} steps; last Rayleigh quotients {previous:e}, {last:e}"
)]
pub struct NoConvergence {
    pub last: f64,
    pub previous: f64,
    pub iterations: usize,
}

impl NoConvergence {
    /// Norm estimate from the last Rayleigh quotient.
    pub fn value(&self) -> f64 {
        self.last.sqrt()
    }
}

fn norm2(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

/// Power iteration on `M*M` from a seeded random complex start.
///
/// Stops once successive Rayleigh quotients agree to relative `tol`.
pub fn operator_norm(
    op: &DiscreteOperator,
    tol: f64,
    max_iter: usize,
    seed: u64,
) -> Result<NormEstimate, NoConvergence> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v: Vec<Complex64> = (0..op.n())
        .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    let mut prev = 0.0;
    let mut rq = 0.0;
    for it in 1..=max_iter {
        let s = norm2(&v).sqrt();
        if s == 0.0 {
            return Ok(NormEstimate {
                value: 0.0,
                iterations: it,
            });
        }
        v.iter_mut().for_each(|z| *z /= s);
        let (u, mass) = op.apply_normal(&v);
        rq = mass;
        if rq == 0.0 || (it > 1 && (rq - prev).abs() <= tol * rq) {
            return Ok(NormEstimate {
                value: rq.sqrt(),
                iterations: it,
            });
        }
        prev = rq;
        v = u;
    }
    Err(NoConvergence {
        last: rq,
        previous: prev,
        iterations: max_iter,
    })
}
