//! Discretized oscillatory integral operators
//! `Tf(x) = ∫ e^{iλS(x,y)} χ(x,y) f(y) dy` and estimates of their `L²` norm.

mod bounds;
mod operator;
mod sample;

pub use bounds::{
    op_vdc_bound, scalar_vdc_check, schur_bound, size_bound, sublevel_check, OscError,
    SublevelCheck, VdcCheck,
};
pub use operator::{
    dense_norm, operator_norm, DiscreteOperator, Domain, NoConvergence, NormEstimate,
};
pub use sample::{
    grid_size, measure_norm, probe_gradient, samples_csv, NormConfig, NormSample, ResolutionError,
};

use num_complex::Complex64;
use thiserror::Error;

use crate::polycore::{BivarPoly, CompiledPoly};

/// `b(t) = exp(1 − 1/(1 − t²))` on `|t| < 1`, zero elsewhere; `b(0) = 1`.
pub fn bump(t: f64) -> f64 {
    let s = 1.0 - t * t;
    if s <= 0.0 {
        0.0
    } else {
        (1.0 - 1.0 / s).exp()
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("cutoff radius must lie in (0, 1], got {0}")]
pub struct BadRadius(pub f64);

/// Phase `S` with the tensor cutoff `χ(x,y) = b(x/ρ)·b(y/ρ)`.
#[derive(Debug, Clone)]
pub struct PhaseSpec {
    pub s: BivarPoly,
    pub rho: f64,
    compiled: CompiledPoly,
}

impl PhaseSpec {
    pub fn new(s: BivarPoly, rho: f64) -> Result<Self, BadRadius> {
        if !(rho > 0.0 && rho <= 1.0) {
            return Err(BadRadius(rho));
        }
        let compiled = s.compile();
        Ok(Self { s, rho, compiled })
    }

    pub fn cutoff(&self, x: f64, y: f64) -> f64 {
        bump(x / self.rho) * bump(y / self.rho)
    }

    pub fn phase(&self) -> &CompiledPoly {
        &self.compiled
    }

    /// The square `[−ρ, ρ]²`.
    pub fn domain(&self) -> Domain {
        Domain::square(-self.rho, self.rho)
    }

    /// `e^{iλS(x,y)} χ(x,y)`.
    pub fn kernel(&self, lambda: f64) -> impl Fn(f64, f64) -> Complex64 + Send + Sync + '_ {
        move |x, y| {
            let c = self.cutoff(x, y);
            if c == 0.0 {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::from_polar(c, lambda * self.compiled.eval(x, y))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bump_shape() {
        assert_eq!(bump(0.0), 1.0);
        assert_eq!(bump(1.0), 0.0);
        assert_eq!(bump(-1.5), 0.0);
        assert!((bump(0.5) - (1.0f64 - 4.0 / 3.0).exp()).abs() < 1e-15);
    }

    #[test]
    fn radius_is_validated() {
        assert!(PhaseSpec::new(BivarPoly::zero(), 0.0).is_err());
        assert!(PhaseSpec::new(BivarPoly::zero(), 1.5).is_err());
        assert!(PhaseSpec::new(BivarPoly::zero(), 1.0).is_ok());
    }
}
