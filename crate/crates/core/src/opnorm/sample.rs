use serde::Serialize;
use thiserror::Error;

use super::operator::{operator_norm, DiscreteOperator, Domain};
use super::PhaseSpec;
use crate::polycore::CompiledPoly;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
#[error(
    "λ = {lambda} needs {required} grid points per axis to resolve the phase; the cap is {cap}"
)]
pub struct ResolutionError {
    pub lambda: f64,
    pub required: f64,
    pub cap: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormConfig {
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
    /// Largest base grid; the `⌈1.5n⌉` comparison grid may exceed it.
    pub max_n: usize,
    pub min_n: usize,
    /// Samples are valid when the `n` and `⌈1.5n⌉` estimates agree to this.
    pub conv_tol: f64,
    /// Matrices with more entries are applied without caching.
    pub cache_entries: usize,
}

impl Default for NormConfig {
    fn default() -> Self {
        Self {
            tol: 1e-6,
            max_iter: 500,
            seed: 0,
            max_n: 4096,
            min_n: 16,
            conv_tol: 0.02,
            cache_entries: 40_000_000,
        }
    }
}

/// One measured `‖T_λ‖`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormSample {
    pub lambda: f64,
    pub n: usize,
    pub norm: f64,
    /// `|‖M_n‖ − ‖M_{⌈1.5n⌉}‖| / ‖M_{⌈1.5n⌉}‖`.
    pub conv_err: f64,
    pub iterations: usize,
    /// Power iteration reached `tol` on both grids.
    pub converged: bool,
}

impl NormSample {
    pub fn valid(&self, conv_tol: f64) -> bool {
        self.conv_err < conv_tol && self.norm.is_finite()
    }
}

/// Largest `|∂S/∂x| + |∂S/∂y|` on a 64×64 probe including the boundary.
pub fn probe_gradient(s: &CompiledPoly, d: Domain) -> f64 {
    const P: usize = 64;
    let mut g = 0.0f64;
    for a in 0..P {
        let x = d.x0 + (d.x1 - d.x0) * a as f64 / (P - 1) as f64;
        for b in 0..P {
            let y = d.y0 + (d.y1 - d.y0) * b as f64 / (P - 1) as f64;
            let (gx, gy) = s.gradient(x, y);
            g = g.max(gx.abs() + gy.abs());
        }
    }
    g
}

/// Grid size resolving `λS` on `d`: the next power of two at or above
/// `2·side·λG·(2/π)`, clamped to `[min_n, max_n]`.
pub fn grid_size(
    s: &CompiledPoly,
    lambda: f64,
    d: Domain,
    cfg: &NormConfig,
) -> Result<usize, ResolutionError> {
    let required = d.side() * lambda * probe_gradient(s, d) * 2.0 / std::f64::consts::PI;
    if required > cfg.max_n as f64 {
        return Err(ResolutionError {
            lambda,
            required,
            cap: cfg.max_n,
        });
    }
    let target = (2.0 * required).ceil().max(1.0) as usize;
    Ok(target.next_power_of_two().clamp(cfg.min_n, cfg.max_n))
}

/// Estimates `‖T_λ‖` for `phase` on `domain`, doubling the grid until the
/// `n` and `⌈1.5n⌉` estimates agree or the cap is reached.
pub fn measure_norm<K>(
    phase: &CompiledPoly,
    kernel: &K,
    lambda: f64,
    domain: Domain,
    cfg: &NormConfig,
) -> Result<NormSample, ResolutionError>
where
    K: Fn(f64, f64) -> num_complex::Complex64 + Send + Sync,
{
    let mut n = grid_size(phase, lambda, domain, cfg)?;
    loop {
        let (coarse, c_ok, iters) = estimate(kernel, domain, n, cfg);
        let m = (3 * n).div_ceil(2);
        let (fine, f_ok, _) = estimate(kernel, domain, m, cfg);
        let conv_err = if fine > 0.0 {
            (coarse - fine).abs() / fine
        } else {
            (coarse - fine).abs()
        };
        if conv_err < cfg.conv_tol || 2 * n > cfg.max_n {
            return Ok(NormSample {
                lambda,
                n,
                norm: coarse,
                conv_err,
                iterations: iters,
                converged: c_ok && f_ok,
            });
        }
        n *= 2;
    }
}

fn estimate<K>(kernel: &K, domain: Domain, n: usize, cfg: &NormConfig) -> (f64, bool, usize)
where
    K: Fn(f64, f64) -> num_complex::Complex64 + Send + Sync,
{
    let op = DiscreteOperator::new(domain, n, kernel, cfg.cache_entries);
    match operator_norm(&op, cfg.tol, cfg.max_iter, cfg.seed) {
        Ok(e) => (e.value, true, e.iterations),
        // Power iteration only approaches the norm from below; keep the last value.
        Err(e) => (e.value(), false, e.iterations),
    }
}

impl PhaseSpec {
    /// `‖T_λ‖` on the full cutoff support.
    pub fn norm(&self, lambda: f64, cfg: &NormConfig) -> Result<NormSample, ResolutionError> {
        measure_norm(
            self.phase(),
            &self.kernel(lambda),
            lambda,
            self.domain(),
            cfg,
        )
    }
}

/// `lambda,n,norm,conv_err,iterations` rows with a header line.
pub fn samples_csv(samples: &[NormSample]) -> String {
    let mut out = String::from("lambda,n,norm,conv_err,iterations\n");
    for s in samples {
        out.push_str(&format!(
            "{:?},{},{:?},{:?},{}\n",
            s.lambda, s.n, s.norm, s.conv_err, s.iterations
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::opnorm::bump;
    use crate::polycore::parse_poly;

    fn phase(s: &str) -> PhaseSpec {
        PhaseSpec::new(parse_poly(s).unwrap(), 0.5).unwrap()
    }

    #[test]
    fn zero_frequency_norm_is_bump_mass() {
        // Rank one: ‖b(·/ρ)‖₂² on [−ρ, ρ].
        let p = phase("x*y");
        let s = p.norm(0.0, &NormConfig::default()).unwrap();
        let m = 200_000;
        let h = 1.0 / m as f64;
        let mass: f64 = (0..m)
            .map(|i| bump(2.0 * (-0.5 + (i as f64 + 0.5) * h)).powi(2) * h)
            .sum();
        assert_eq!(s.n, 16);
        assert!(
            (s.norm - mass).abs() < 1e-3 * mass,
            "{} vs {}",
            s.norm,
            mass
        );
        assert!(s.conv_err < 0.02);
    }

    #[test]
    fn grid_follows_frequency() {
        let p = phase("x*y");
        let cfg = NormConfig::default();
        let s = p.phase();
        let d = p.domain();
        assert_eq!(grid_size(s, 0.0, d, &cfg).unwrap(), 16);
        // side 1, G = 1: 2·λ·(2/π) ≈ 163 → 256.
        assert_eq!(grid_size(s, 128.0, d, &cfg).unwrap(), 256);
        let err = grid_size(s, 1e5, d, &cfg).unwrap_err();
        assert_eq!(err.cap, 4096);
    }

    #[test]
    fn csv_layout() {
        let s = NormSample {
            lambda: 16.0,
            n: 64,
            norm: 0.25,
            conv_err: 1e-3,
            iterations: 12,
            converged: true,
        };
        let csv = samples_csv(&[s]);
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("lambda,n,norm,conv_err,iterations"));
        assert_eq!(lines.next(), Some("16.0,64,0.25,0.001,12"));
    }
}
