use num_complex::Complex64;
use thiserror::Error;

use super::operator::DiscreteOperator;
use crate::polycore::BivarPoly;

/// Finest 1-D quadrature grid.
const MAX_POINTS_1D: usize = 1 << 24;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OscError {
    #[error("λ = {lambda} needs {required} quadrature points; the cap is {cap}")]
    Resolution {
        lambda: f64,
        required: f64,
        cap: usize,
    },
    #[error("derivative of order {k} is {value} < μ = {mu} at t = {t}")]
    Precondition { k: u32, mu: f64, t: f64, value: f64 },
    #[error("empty interval [{0}, {1}]")]
    Interval(f64, f64),
}

/// Schur test: `√(M₁M₂)` with `M₁`, `M₂` the largest column and row `L¹` masses.
pub fn schur_bound(op: &DiscreteOperator) -> f64 {
    let (rows, cols) = op.abs_sums();
    (rows * cols).sqrt()
}

/// Size estimate `√(δx·δy)` for a kernel bounded by one.
pub fn size_bound(dx: f64, dy: f64) -> f64 {
    (dx * dy).sqrt()
}

/// Operator van der Corput bound `(λμ)^{-1/2}`, constant one.
pub fn op_vdc_bound(lambda: f64, mu: f64) -> f64 {
    (lambda * mu).powf(-0.5)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VdcCheck {
    /// `|∫ₐᵇ e^{iλΦ}Ψ|`.
    pub lhs: f64,
    /// `(λμ)^{-1/k}(|Ψ(b)| + ∫|Ψ'|)`.
    pub rhs: f64,
    pub points: usize,
}

impl VdcCheck {
    pub fn ratio(&self) -> f64 {
        self.lhs / self.rhs
    }
}

fn midpoints(a: f64, b: f64, n: usize) -> impl Iterator<Item = f64> {
    let h = (b - a) / n as f64;
    (0..n).map(move |i| a + (i as f64 + 0.5) * h)
}

/// Scalar van der Corput: compares `|∫ e^{iλΦ}Ψ|` with its bound.
///
/// `phi` is a polynomial in `x`; its `k`-th derivative is spot-checked
/// against `μ` on 257 points.
pub fn scalar_vdc_check(
    phi: &BivarPoly,
    psi: &dyn Fn(f64) -> f64,
    dpsi: &dyn Fn(f64) -> f64,
    k: u32,
    mu: f64,
    (a, b): (f64, f64),
    lambda: f64,
) -> Result<VdcCheck, OscError> {
    if a.is_nan() || b.is_nan() || b <= a {
        return Err(OscError::Interval(a, b));
    }
    let mut dk = phi.clone();
    for _ in 0..k {
        dk = dk.partial_x();
    }
    let (dk, d1) = (dk.compile(), phi.partial_x().compile());
    let phi_c = phi.compile();
    for i in 0..=256 {
        let t = a + (b - a) * i as f64 / 256.0;
        let v = dk.eval(t, 0.0);
        if v < mu * (1.0 - 1e-12) {
            return Err(OscError::Precondition { k, mu, t, value: v });
        }
    }
    let slope = (0..=256)
        .map(|i| d1.eval(a + (b - a) * i as f64 / 256.0, 0.0).abs())
        .fold(0.0, f64::max);
    // 32 points per radian of phase, at least 4096.
    let required = 32.0 * (b - a) * lambda * slope;
    if required > MAX_POINTS_1D as f64 {
        return Err(OscError::Resolution {
            lambda,
            required,
            cap: MAX_POINTS_1D,
        });
    }
    let n = (required.ceil() as usize).max(4096);
    let h = (b - a) / n as f64;
    let integral: Complex64 = midpoints(a, b, n)
        .map(|t| Complex64::from_polar(psi(t), lambda * phi_c.eval(t, 0.0)))
        .sum::<Complex64>()
        * h;
    let variation: f64 = midpoints(a, b, n).map(|t| dpsi(t).abs()).sum::<f64>() * h;
    Ok(VdcCheck {
        lhs: integral.norm(),
        rhs: (lambda * mu).powf(-1.0 / k as f64) * (psi(b).abs() + variation),
        points: n,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SublevelCheck {
    pub measure: f64,
    /// `A_k(γ/μ)^{1/k}` with `A_k = 2k·2^{1/k}`.
    pub bound: f64,
}

/// `|{t ∈ [a, b] : |f(t)| ≤ γ}|` by counting on a million-point midpoint grid.
pub fn sublevel_check(
    f: &dyn Fn(f64) -> f64,
    gamma: f64,
    k: u32,
    mu: f64,
    (a, b): (f64, f64),
) -> SublevelCheck {
    const N: usize = 1_000_000;
    let h = (b - a) / N as f64;
    let count = midpoints(a, b, N).filter(|&t| f(t).abs() <= gamma).count();
    let kf = k as f64;
    SublevelCheck {
        measure: count as f64 * h,
        bound: 2.0 * kf * (2f64).powf(1.0 / kf) * (gamma / mu).powf(1.0 / kf),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::opnorm::{dense_norm, Domain};
    use crate::polycore::parse_poly;

    fn one(_: f64) -> f64 {
        1.0
    }

    fn zero(_: f64) -> f64 {
        0.0
    }

    #[test]
    fn schur_examples() {
        let d = Domain::square(0.0, 1.0);
        let op = DiscreteOperator::new(d, 32, |_, _| Complex64::new(1.0, 0.0), usize::MAX);
        assert!((schur_bound(&op) - 1.0).abs() < 1e-6);
        let op = DiscreteOperator::new(
            d,
            32,
            |x, y| Complex64::from_polar(1.0, 500.0 * x * y),
            usize::MAX,
        );
        assert!((schur_bound(&op) - 1.0).abs() < 1e-6);
        assert!(dense_norm(&op.to_dense()) < 0.5);
    }

    #[test]
    fn elementary_bounds() {
        assert_eq!(size_bound(1.0, 1.0), 1.0);
        assert_eq!(op_vdc_bound(256.0, 1.0), 0.0625);
        let (j, k) = (3, 5);
        let dx = (2f64).powi(-j + 1) * 2.0;
        let dy = (2f64).powi(-k + 1) * 2.0;
        assert!((size_bound(dx, dy) - (2f64).powf(-(j + k) as f64 / 2.0 + 2.0)).abs() < 1e-15);
    }

    #[test]
    fn fresnel_ratio() {
        let phi = parse_poly("x^2/2").unwrap();
        let lambda = 4096.0;
        let c = scalar_vdc_check(&phi, &one, &zero, 2, 1.0, (-1.0, 1.0), lambda).unwrap();
        let fresnel = (2.0 * std::f64::consts::PI / lambda).sqrt();
        assert!((c.lhs - fresnel).abs() < 0.02 * fresnel);
        assert!((c.rhs - lambda.powf(-0.5)).abs() < 1e-15);
        assert!((c.ratio() - (2.0 * std::f64::consts::PI).sqrt()).abs() < 0.05);
    }

    #[test]
    fn linear_phase() {
        let phi = parse_poly("x").unwrap();
        let lambda = 100.0;
        let c = scalar_vdc_check(&phi, &one, &zero, 1, 1.0, (0.0, 1.0), lambda).unwrap();
        let exact = (Complex64::from_polar(1.0, lambda) - 1.0).norm() / lambda;
        assert!((c.lhs - exact).abs() < 1e-4 * exact);
        assert!(c.lhs <= 2.0 / lambda);
        assert!((c.rhs - 1.0 / lambda).abs() < 1e-15);
    }

    #[test]
    fn cubic_ratio_is_bounded() {
        let phi = parse_poly("x^3").unwrap();
        let ratios: Vec<f64> = (4..=14)
            .map(|m| {
                let l = (2f64).powi(m);
                scalar_vdc_check(&phi, &one, &zero, 3, 6.0, (0.0, 1.0), l)
                    .unwrap()
                    .ratio()
            })
            .collect();
        assert!(ratios.iter().all(|&r| r < 5.0), "{ratios:?}");
    }

    #[test]
    fn precondition_is_spot_checked() {
        let phi = parse_poly("x^2/2").unwrap();
        let err = scalar_vdc_check(&phi, &one, &zero, 2, 2.0, (0.0, 1.0), 10.0).unwrap_err();
        assert!(matches!(err, OscError::Precondition { k: 2, .. }));
    }

    #[test]
    fn sublevel_examples() {
        let c = sublevel_check(&|x| x, 0.1, 1, 1.0, (0.0, 1.0));
        assert!((c.measure - 0.1).abs() < 1e-5 && c.measure <= c.bound);
        let c = sublevel_check(&|x| x * x, 0.01, 2, 2.0, (-1.0, 1.0));
        assert!((c.measure - 0.2).abs() < 1e-5);
        assert!((c.bound - 4.0 * 2f64.sqrt() * 0.005f64.sqrt()).abs() < 1e-12);
        assert!(c.measure <= c.bound);
        let gamma = 1e-4;
        let c = sublevel_check(
            &|x| (x - 1.0 / 3.0) * (x - 2.0 / 3.0),
            gamma,
            2,
            2.0,
            (0.0, 1.0),
        );
        // Near each root |f| ≈ |t − root|/3.
        assert!((c.measure - 2.0 * 2.0 * 3.0 * gamma).abs() < 1e-4);
        assert!(c.measure <= c.bound);
    }
}
