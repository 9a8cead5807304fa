//! `λ` sweeps, log-log fits and the decay verdict.

use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::newton::{
    build_polygon, decay_rate, default_order, detect_degeneracy, DecayReport, Degeneracy,
    NewtonPolygon,
};
use crate::opnorm::{NormConfig, NormSample, PhaseSpec, ResolutionError};
use crate::polycore::{mixed_derivative, ratio_string, ratio_to_f64, BivarPoly};
use crate::puiseux::{expand_branches, BranchSet};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScalingError {
    #[error("need at least 4 valid samples for a fit, have {0}")]
    InsufficientSamples(usize),
    #[error("λ values must be positive and strictly increasing, at least 4 of them")]
    BadLambdas,
    #[error("S''_xy vanishes identically: no oscillatory decay expected")]
    NoOscillation,
    #[error(transparent)]
    Resolution(#[from] ResolutionError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub lambdas: Vec<f64>,
    pub tol_slope: f64,
    /// Inclusive `λ` range used by the fit; `None` fits the upper half of the sweep.
    pub fit_window: Option<(f64, f64)>,
    pub norm: NormConfig,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            lambdas: (4..=11).map(|m| (2f64).powi(m)).collect(),
            tol_slope: 0.1,
            fit_window: None,
            norm: NormConfig::default(),
        }
    }
}

impl SweepConfig {
    fn check(&self) -> Result<(), ScalingError> {
        let ok = self.lambdas.len() >= 4
            && self.lambdas[0] > 0.0
            && self.lambdas.windows(2).all(|w| w[1] > w[0]);
        if ok {
            Ok(())
        } else {
            Err(ScalingError::BadLambdas)
        }
    }

    /// Default settings for a phase: the tighter slope tolerance applies
    /// when `F` is a nonzero constant.
    pub fn for_mixed(f: &BivarPoly) -> Self {
        let constant = !f.is_zero() && f.support().iter().all(|&e| e == (0, 0));
        Self {
            tol_slope: if constant { 0.05 } else { 0.1 },
            ..Self::default()
        }
    }

    /// The `λ` range actually fitted.
    pub fn window(&self) -> (f64, f64) {
        self.fit_window.unwrap_or_else(|| {
            let n = self.lambdas.len();
            let start = (n / 2).min(n.saturating_sub(4));
            (self.lambdas[start], self.lambdas[n - 1])
        })
    }
}

/// One `‖T_λ‖` per `λ`, computed in parallel and returned in `λ` order.
pub fn sweep(phase: &PhaseSpec, cfg: &SweepConfig) -> Result<Vec<NormSample>, ScalingError> {
    cfg.check()?;
    cfg.lambdas
        .par_iter()
        .map(|&l| phase.norm(l, &cfg.norm).map_err(ScalingError::from))
        .collect()
}

/// Ordinary least squares `y = a + b·x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    /// Standard error of the slope.
    pub stderr: f64,
    pub points: usize,
}

pub fn least_squares(pts: &[(f64, f64)]) -> Result<LinearFit, ScalingError> {
    if pts.len() < 4 {
        return Err(ScalingError::InsufficientSamples(pts.len()));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = pts
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum();
    Ok(LinearFit {
        slope,
        intercept,
        stderr: (rss / (n - 2.0) / sxx).sqrt(),
        points: pts.len(),
    })
}

/// Fits `log₂ norm` against `log₂ λ` over valid samples.
pub fn fit_decay(samples: &[NormSample], conv_tol: f64) -> Result<LinearFit, ScalingError> {
    let pts: Vec<(f64, f64)> = samples
        .iter()
        .filter(|s| s.valid(conv_tol) && s.lambda > 0.0 && s.norm > 0.0)
        .map(|s| (s.lambda.log2(), s.norm.log2()))
        .collect();
    least_squares(&pts)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

/// Symbolic side of the pipeline: `F`, polygon, decay rate, branches, degeneracy.
#[derive(Debug, Clone)]
pub struct Analysis {
    pub s: Option<BivarPoly>,
    pub f: BivarPoly,
    pub polygon: NewtonPolygon,
    pub decay: DecayReport,
    pub branches: BranchSet,
}

/// Runs the symbolic pipeline on `F = S''_xy`.
pub fn analyze_mixed(f: &BivarPoly) -> Result<Analysis, crate::newton::NewtonError> {
    let polygon = build_polygon(f)?;
    let mut decay = decay_rate(&polygon);
    let branches = expand_branches(f, default_order(f)).expect("nonzero F");
    decay.degeneracy = Some(detect_degeneracy(&polygon, &branches));
    Ok(Analysis {
        s: None,
        f: f.clone(),
        polygon,
        decay,
        branches,
    })
}

pub fn analyze_phase(s: &BivarPoly) -> Result<Analysis, crate::newton::NewtonError> {
    let mut a = analyze_mixed(&mixed_derivative(s))?;
    a.s = Some(s.clone());
    Ok(a)
}

impl Analysis {
    pub fn degeneracy(&self) -> &Degeneracy {
        self.decay.degeneracy.as_ref().expect("set by analyze")
    }
}

impl Serialize for Analysis {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("Analysis", 5)?;
        st.serialize_field("S", &self.s.as_ref().map(|p| p.to_string()))?;
        st.serialize_field("F", &self.f.to_string())?;
        st.serialize_field("polygon", &self.polygon)?;
        st.serialize_field("decay", &self.decay)?;
        st.serialize_field("branches", &self.branches)?;
        st.end()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ScalingReport {
    pub rho: f64,
    pub samples: Vec<NormSample>,
    pub fit_window: (f64, f64),
    pub slope: f64,
    pub stderr: f64,
    /// `−δ/2`, or `−1/(N+2)` in the completely degenerate case.
    pub predicted: String,
    pub predicted_value: f64,
    pub tol_slope: f64,
    /// `max/min` of `norm·λ^{−predicted}` over valid samples.
    pub band_ratio: f64,
    /// Degenerate case: exponent `e` in `norm·λ^{1/(N+2)} ≈ c·(log₂λ)^e`.
    pub log_exponent_fit: Option<f64>,
    /// Degenerate case: `max q(λ)/q(λ_min)` for `q = norm·λ^{1/(N+2)}/(log₂λ)^{2N/(N+2)}`.
    pub log_ratio: Option<f64>,
    /// Every sample has `conv_err` below tolerance and a converged power iteration.
    pub all_valid: bool,
    pub verdict: Verdict,
    pub degeneracy: Degeneracy,
    /// Re-run at `ρ/2` after a failing verdict.
    pub retry: Option<Box<ScalingReport>>,
}

impl ScalingReport {
    /// `(log₂ λ, log₂ norm, predicted line)` triples; the line has slope
    /// `predicted` and passes through the mean of the fitted points.
    pub fn plot_data(&self) -> Vec<(f64, f64, f64)> {
        let (lo, hi) = self.fit_window;
        let fitted: Vec<(f64, f64)> = self
            .samples
            .iter()
            .filter(|s| s.lambda >= lo && s.lambda <= hi && s.norm > 0.0)
            .map(|s| (s.lambda.log2(), s.norm.log2()))
            .collect();
        let offset = if fitted.is_empty() {
            0.0
        } else {
            fitted
                .iter()
                .map(|(x, y)| y - self.predicted_value * x)
                .sum::<f64>()
                / fitted.len() as f64
        };
        self.samples
            .iter()
            .filter(|s| s.lambda > 0.0 && s.norm > 0.0)
            .map(|s| {
                let x = s.lambda.log2();
                (x, s.norm.log2(), offset + self.predicted_value * x)
            })
            .collect()
    }
}

/// Log-corrected bound ratio for `N`-fold degeneracy.
fn degenerate_fits(samples: &[NormSample], n: u32, conv_tol: f64) -> (Option<f64>, Option<f64>) {
    let valid: Vec<&NormSample> = samples
        .iter()
        .filter(|s| s.valid(conv_tol) && s.lambda > 2.0 && s.norm > 0.0)
        .collect();
    let p = 1.0 / (n as f64 + 2.0);
    let e = 2.0 * n as f64 / (n as f64 + 2.0);
    let pts: Vec<(f64, f64)> = valid
        .iter()
        .map(|s| (s.lambda.log2().log2(), (s.norm * s.lambda.powf(p)).log2()))
        .collect();
    let exponent = least_squares(&pts).ok().map(|f| f.slope);
    let q: Vec<f64> = valid
        .iter()
        .map(|s| s.norm * s.lambda.powf(p) / s.lambda.log2().powf(e))
        .collect();
    let ratio = q
        .first()
        .map(|&q0| q.iter().fold(0.0f64, |m, &v| m.max(v / q0)));
    (exponent, ratio)
}

/// Full pipeline: analysis, sweep, fit and verdict.
///
/// Nondegenerate phases pass when the fitted slope is within `tol_slope`
/// of `−δ/2`. Completely degenerate phases pass when the log-corrected
/// ratio stays within 2, the upper bound of the theorem being the claim.
pub fn verify_theorem(phase: &PhaseSpec, cfg: &SweepConfig) -> Result<ScalingReport, ScalingError> {
    let f = mixed_derivative(&phase.s);
    if f.is_zero() {
        return Err(ScalingError::NoOscillation);
    }
    let analysis = analyze_mixed(&f).map_err(|_| ScalingError::NoOscillation)?;
    let report = report_for(phase, cfg, &analysis)?;
    if report.verdict == Verdict::Fail && phase.rho > 1e-3 {
        if let Ok(half) = PhaseSpec::new(phase.s.clone(), phase.rho / 2.0) {
            let retry = report_for(&half, cfg, &analysis)?;
            return Ok(ScalingReport {
                retry: Some(Box::new(retry)),
                ..report
            });
        }
    }
    Ok(report)
}

fn report_for(
    phase: &PhaseSpec,
    cfg: &SweepConfig,
    analysis: &Analysis,
) -> Result<ScalingReport, ScalingError> {
    let samples = sweep(phase, cfg)?;
    let conv_tol = cfg.norm.conv_tol;
    let window = cfg.window();
    let in_window: Vec<NormSample> = samples
        .iter()
        .filter(|s| s.lambda >= window.0 && s.lambda <= window.1)
        .cloned()
        .collect();
    let fit = fit_decay(&in_window, conv_tol);
    let all_valid = samples.iter().all(|s| s.valid(conv_tol) && s.converged);
    let degeneracy = analysis.degeneracy().clone();
    let (predicted, log_exponent_fit, log_ratio) = match degeneracy {
        Degeneracy::CompletelyDegenerate { n, .. } => {
            let (e, r) = degenerate_fits(&samples, n, conv_tol);
            (BigRational::new((-1).into(), (n as i64 + 2).into()), e, r)
        }
        _ => (
            -&analysis.decay.delta / BigRational::from_integer(2.into()),
            None,
            None,
        ),
    };
    let predicted_value = ratio_to_f64(&predicted);
    let scaled: Vec<f64> = samples
        .iter()
        .filter(|s| s.valid(conv_tol) && s.lambda > 0.0)
        .map(|s| s.norm * s.lambda.powf(-predicted_value))
        .collect();
    let band_ratio = scaled.iter().cloned().fold(0.0, f64::max)
        / scaled.iter().cloned().fold(f64::INFINITY, f64::min);
    let (slope, stderr) = fit
        .as_ref()
        .map(|f| (f.slope, f.stderr))
        .unwrap_or((f64::NAN, f64::NAN));
    let verdict = match (&fit, &degeneracy) {
        (Err(_), _) => Verdict::Inconclusive,
        (Ok(_), _) if !all_valid => Verdict::Inconclusive,
        (Ok(_), Degeneracy::CompletelyDegenerate { .. }) => {
            if log_ratio.is_some_and(|r| r <= 2.0) {
                Verdict::Pass
            } else {
                Verdict::Fail
            }
        }
        (Ok(f), _) => {
            if (f.slope - predicted_value).abs() <= cfg.tol_slope {
                Verdict::Pass
            } else {
                Verdict::Fail
            }
        }
    };
    Ok(ScalingReport {
        rho: phase.rho,
        samples,
        fit_window: window,
        slope,
        stderr,
        predicted: ratio_string(&predicted),
        predicted_value,
        tol_slope: cfg.tol_slope,
        band_ratio,
        log_exponent_fit,
        log_ratio,
        all_valid,
        verdict,
        degeneracy,
        retry: None,
    })
}

/// `λ`-independent operators: every norm equal to relative `tol`.
pub fn is_flat(samples: &[NormSample], tol: f64) -> bool {
    let Some(first) = samples.first() else {
        return true;
    };
    samples
        .iter()
        .all(|s| (s.norm - first.norm).abs() <= tol * first.norm.abs().max(f64::MIN_POSITIVE))
}

/// `δ` as a float, for callers that only need the number.
pub fn delta_value(d: &DecayReport) -> f64 {
    if d.delta.is_zero() {
        0.0
    } else if d.delta == BigRational::one() {
        1.0
    } else {
        ratio_to_f64(&d.delta)
    }
}
