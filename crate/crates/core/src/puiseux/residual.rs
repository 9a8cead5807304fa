use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::PuiseuxError;
use crate::polycore::{BivarPoly, PuiseuxBranch};

/// Observed vanishing order of `x ↦ |F(x, Y(x))|`.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualOrder {
    /// Least-squares slope of `log₂|F(x, Y(x))|` against `log₂ x`; `+∞` when every residual is zero.
    pub slope: f64,
    pub used_samples: usize,
    pub exact: bool,
    /// `(log₂ x, log₂ |residual|)` at each sample with nonzero residual.
    pub points: Vec<(f64, f64)>,
    /// `log₂` of the residual that coefficient rounding alone can produce, per point.
    pub floor: Vec<f64>,
}

#[derive(Clone)]
struct Cq {
    re: BigRational,
    im: BigRational,
}

impl Cq {
    fn real(re: BigRational) -> Self {
        Self {
            re,
            im: BigRational::zero(),
        }
    }

    fn mul(&self, o: &Cq) -> Cq {
        Cq {
            re: &self.re * &o.re - &self.im * &o.im,
            im: &self.re * &o.im + &self.im * &o.re,
        }
    }

    fn add_scaled(&mut self, o: &Cq, s: &BigRational) {
        self.re += &o.re * s;
        self.im += &o.im * s;
    }
}

fn exact(v: f64) -> BigRational {
    BigRational::from_float(v).unwrap_or_else(BigRational::zero)
}

fn log2_int(n: &BigInt) -> f64 {
    let bits = n.bits();
    if bits <= 512 {
        return n.to_f64().unwrap().log2();
    }
    let shift = bits - 64;
    (n >> shift as usize).to_f64().unwrap().log2() + shift as f64
}

/// `log₂ r` for positive `r` of any magnitude.
fn log2_big(r: &BigRational) -> f64 {
    log2_int(r.numer()) - log2_int(r.denom())
}

/// Residual order of a branch, evaluated exactly at `x = t^r` with `t` the
/// double nearest `xᵢ^{1/r}` and `r` the branch ramification.
///
/// Coefficient rounding is therefore the only error source.
pub fn branch_residual_order(
    f: &BivarPoly,
    branch: &PuiseuxBranch,
    samples: &[f64],
) -> Result<ResidualOrder, PuiseuxError> {
    if samples.len() < 4 || samples.iter().any(|&x| !(x > 0.0 && x <= 0.5)) {
        return Err(PuiseuxError::BadSamples);
    }
    let r = branch.ramification.max(1) as i64;
    let (a, b) = (
        f.terms().map(|(e, _)| e.0).min().unwrap_or(0),
        f.terms().map(|(e, _)| e.1).min().unwrap_or(0),
    );
    let compiled = f.compile();
    let dy = f.degree_y() as usize;
    let mut points = Vec::new();
    let mut floor = Vec::new();
    for &x in samples {
        let t = exact(x.powf(1.0 / r as f64));
        let xq = num_traits::pow(t.clone(), r as usize);
        let xf = xq.to_f64().unwrap_or(0.0);
        let y_approx = crate::polycore::eval_branch(branch, xf).unwrap_or_default();
        let (_, scale) = compiled.eval_complex_y(xf, y_approx);
        if scale < 1e-300 {
            return Err(PuiseuxError::NumericalUnderflow { x, scale });
        }
        let mut y = Cq::real(BigRational::zero());
        for term in &branch.terms {
            let k = (term.exponent * r).to_integer();
            let p = num_traits::pow(t.clone(), k as usize);
            y.add_scaled(
                &Cq {
                    re: exact(term.coefficient.re),
                    im: exact(term.coefficient.im),
                },
                &p,
            );
        }
        let mut ypow = vec![Cq::real(BigRational::one())];
        for j in 1..=dy {
            ypow.push(ypow[j - 1].mul(&y));
        }
        let mut acc = Cq::real(BigRational::zero());
        for (&(i, j), c) in f.terms() {
            // The x^A y^B factor is not part of the branch equation.
            let xi = num_traits::pow(xq.clone(), (i - a) as usize);
            acc.add_scaled(&ypow[(j - b) as usize], &(c * xi));
        }
        let mag2 = &acc.re * &acc.re + &acc.im * &acc.im;
        if mag2.is_zero() {
            continue;
        }
        debug_assert!(mag2.is_positive());
        points.push((xf.log2(), 0.5 * log2_big(&mag2)));
        let mut noise = (ROUNDING_SLACK * f64::EPSILON * scale).log2() - a as f64 * xf.log2();
        if b > 0 {
            noise -= b as f64 * y_approx.norm().log2();
        }
        floor.push(noise);
    }
    let exact_root = points.is_empty();
    let slope = if points.len() < 2 {
        f64::INFINITY
    } else {
        fit_slope(&points)
    };
    Ok(ResidualOrder {
        slope,
        used_samples: points.len(),
        exact: exact_root,
        points,
        floor,
    })
}

/// `|F(x, Y_K(x))|` must vanish faster than `x^K`, at rate at least
/// `K + step` up to slack, `step` being the smallest possible exponent gap.
pub fn residual_contract_holds(res: &ResidualOrder, order: f64, step: f64) -> bool {
    res.slope > order && res.slope >= order + step - 0.25
}

/// Largest residual an exact branch may show from coefficient rounding.
pub const EXACT_RESIDUAL_TOL: f64 = 1e-12;

/// Multiple of `ε · Σ|terms|` below which a residual is rounding noise.
const ROUNDING_SLACK: f64 = 64.0;

/// Truncated branches must satisfy [`residual_contract_holds`] at their
/// order, fitted over the points above the rounding floor; exact ones must
/// vanish up to coefficient rounding.
///
/// The omitted exponents lie in `(1/r)ℤ` with `r` at most the `y`-degree of
/// `F/(x^A y^B)`, which gives the step.
pub fn branch_contract_holds(f: &BivarPoly, res: &ResidualOrder, branch: &PuiseuxBranch) -> bool {
    let b = f.terms().map(|(e, _)| e.1).min().unwrap_or(0);
    let step = 1.0 / (f.degree_y() - b).max(1) as f64;
    let above: Vec<(f64, f64)> = res
        .points
        .iter()
        .zip(&res.floor)
        .filter(|(p, fl)| p.1 > **fl)
        .map(|(p, _)| *p)
        .collect();
    match branch.order() {
        Some(k) => {
            if above.len() < 2 {
                return true;
            }
            let fitted = ResidualOrder {
                slope: fit_slope(&above),
                used_samples: above.len(),
                exact: false,
                points: above,
                floor: Vec::new(),
            };
            residual_contract_holds(&fitted, *k.numer() as f64 / *k.denom() as f64, step)
        }
        None => res.points.iter().all(|p| p.1 <= EXACT_RESIDUAL_TOL.log2()),
    }
}

fn fit_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}
