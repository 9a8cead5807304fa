//! Built-in checks with known answers, plus dense-SVD agreement of the
//! power iteration. Stops at the first failure.

use std::process::ExitCode;

use num_complex::Complex64;
use num_rational::Rational64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use newton_osc::blocks::{classify_block, mu_for_block, DyadicPartition, Region};
use newton_osc::dyadpol::{eval_dyadic, lower_bound_set, ExponentProfile};
use newton_osc::newton::Degeneracy;
use newton_osc::opnorm::{
    bump, dense_norm, op_vdc_bound, operator_norm, scalar_vdc_check, schur_bound, size_bound,
    sublevel_check, DiscreteOperator, Domain, NormConfig, PhaseSpec,
};
use newton_osc::polycore::{eval_branch, BranchClosure, PuiseuxTerm, Reality};
use newton_osc::puiseux::branch_residual_order;
use newton_osc::scaling::{analyze_phase, fit_decay, is_flat, sweep, verify_theorem, SweepConfig};
use newton_osc::{
    build_polygon, decay_rate, expand_branches, mixed_derivative, parse_poly, BivarPoly,
    PuiseuxBranch,
};

type Check = Result<(), String>;
type CheckFn = Box<dyn Fn() -> Check>;

fn ensure(ok: bool, what: impl FnOnce() -> String) -> Check {
    if ok {
        Ok(())
    } else {
        Err(what())
    }
}

fn close(a: f64, b: f64, tol: f64) -> Check {
    ensure((a - b).abs() <= tol * b.abs().max(1.0), || {
        format!("{a} vs {b}")
    })
}

fn poly(s: &str) -> Result<BivarPoly, String> {
    parse_poly(s).map_err(|e| e.to_string())
}

fn term_string(s: &str) -> Result<String, String> {
    Ok(poly(s)?
        .terms()
        .map(|(e, c)| format!("{:?}:{c}", e))
        .collect::<Vec<_>>()
        .join(" "))
}

fn parsing() -> Check {
    ensure(term_string("x^2*y^2/4")? == "(2, 2):1/4", || {
        "x^2*y^2/4".into()
    })?;
    let sq = term_string("(y-x)^2")?;
    ensure(sq == "(0, 2):1 (1, 1):-2 (2, 0):1", || sq)?;
    ensure(poly("0")?.is_zero(), || "0 is not zero".into())
}

fn differentiation() -> Check {
    ensure(mixed_derivative(&poly("x*y")?) == poly("1")?, || {
        "S = xy".into()
    })?;
    ensure(
        mixed_derivative(&poly("x^2*y^2/4")?) == poly("x*y")?,
        || "S = x^2y^2/4".into(),
    )?;
    let f = poly("(y-x)^2 - x^5")?;
    ensure(mixed_derivative(&f.mixed_antiderivative()) == f, || {
        "antiderivative".into()
    })
}

fn evaluation() -> Check {
    close(poly("x*y")?.eval(0.5, 0.25), 0.125, 0.0)?;
    close(BivarPoly::zero().eval(0.3, 0.7), 0.0, 0.0)?;
    close(poly("x^2+y^2")?.eval(3.0, 4.0), 25.0, 0.0)
}

fn branch_evaluation() -> Check {
    let term = |e: (i64, i64)| PuiseuxTerm {
        exponent: Rational64::new(e.0, e.1),
        coefficient: Complex64::new(1.0, 0.0),
    };
    let exact = BranchClosure::Exact;
    let b = PuiseuxBranch::new(vec![term((3, 2))], 1, Reality::Real, exact);
    let v = eval_branch(&b, 4.0).map_err(|e| e.to_string())?;
    close(v.re, 8.0, 1e-15)?;
    let b = PuiseuxBranch::new(vec![term((1, 1)), term((5, 2))], 1, Reality::Real, exact);
    let v = eval_branch(&b, 1.0).map_err(|e| e.to_string())?;
    close(v.re, 2.0, 1e-15)
}

fn polygons() -> Check {
    let p = build_polygon(&poly("1")?).map_err(|e| e.to_string())?;
    ensure(
        p.vertices == [(0, 0)] && p.a == 0 && p.b == 0 && p.edges.is_empty(),
        || format!("{p:?}"),
    )?;
    let p = build_polygon(&poly("x*y")?).map_err(|e| e.to_string())?;
    ensure(
        p.vertices == [(1, 1)] && p.a == 1 && p.b == 1 && p.edges.is_empty(),
        || format!("{p:?}"),
    )
}

fn decay_rates() -> Check {
    for (f, t0, delta) in [("1", "0", "1"), ("x*y", "1", "1/2")] {
        let d = decay_rate(&build_polygon(&poly(f)?).map_err(|e| e.to_string())?);
        ensure(
            d.t0.to_string() == t0 && d.delta.to_string() == delta,
            || format!("F = {f}: {d:?}"),
        )?;
    }
    let a = analyze_phase(&poly("x*y")?).map_err(|e| e.to_string())?;
    ensure(a.decay.delta.to_string() == "1", || "analyze x*y".into())
}

fn degeneracy() -> Check {
    let a = analyze_phase(&poly("(y-x)^2")?.mixed_antiderivative()).map_err(|e| e.to_string())?;
    match a.degeneracy() {
        Degeneracy::CompletelyDegenerate { n: 2, c } if (c - 1.0).abs() < 1e-9 => {}
        other => return Err(format!("(y-x)^2: {other:?}")),
    }
    let a = analyze_phase(&poly("x^2*y^2/4")?).map_err(|e| e.to_string())?;
    ensure(*a.degeneracy() == Degeneracy::NonDegenerate, || {
        format!("xy: {:?}", a.degeneracy())
    })
}

fn branches() -> Check {
    let k = Rational64::from_integer(6);
    let cusp = expand_branches(&poly("y^2-x^3")?, k).map_err(|e| e.to_string())?;
    ensure(
        cusp.branches.len() == 2
            && cusp
                .branches
                .iter()
                .all(|b| b.ramification == 2 && b.multiplicity == 1),
        || format!("cusp: {:?}", cusp.branches),
    )?;
    let sq = expand_branches(&poly("(y-x)^2")?, k).map_err(|e| e.to_string())?;
    ensure(
        sq.branches.len() == 1
            && sq.branches[0].multiplicity == 2
            && sq.branches[0].reality == Reality::Real,
        || format!("(y-x)^2: {:?}", sq.branches),
    )?;
    let res = branch_residual_order(
        &poly("y^2-x^3")?,
        &cusp.branches[0],
        &[0.1, 0.05, 0.025, 0.0125],
    )
    .map_err(|e| e.to_string())?;
    ensure(res.slope >= 30.0, || {
        format!("exact cusp residual slope {}", res.slope)
    })
}

fn dyadic() -> Check {
    let p = ExponentProfile::new(vec![0], 2.0).map_err(|e| e.to_string())?;
    let e = lower_bound_set(&p);
    let top = (2f64).powi(-(p.margin() as i32));
    ensure(
        e.contains(top) && e.contains(0.0) && 1.0 - p.c * top >= 0.5,
        || format!("{e:?}"),
    )?;
    let p = ExponentProfile::new(vec![5], 1.0).map_err(|e| e.to_string())?;
    let h = (2f64).powi(-5);
    ensure(
        eval_dyadic(&[-32.0], h) == 0.0 && !lower_bound_set(&p).contains(h),
        || "corner kept".into(),
    )
}

fn theta_plateau(fault: bool) -> Check {
    let part = DyadicPartition {
        fault_plateau: fault,
        ..DyadicPartition::new(0, 6)
    };
    close(part.theta(0.5), 1.0, 0.0)?;
    close(part.theta(3.0), 0.0, 0.0)?;
    for i in 0..=400 {
        let t = (2f64).powf(-6.0 + 5.0 * i as f64 / 400.0);
        close(part.partial_sum(t), 1.0, 1e-12)?;
    }
    for j in 1..6 {
        let t = (2f64).powi(-j);
        close(
            part.chi(j, t) + part.chi(j - 1, t) + part.chi(j + 1, t),
            1.0,
            1e-12,
        )?;
    }
    Ok(())
}

fn rank_one() -> Check {
    let p = PhaseSpec::new(poly("x*y")?, 0.5).map_err(|e| e.to_string())?;
    let s = p
        .norm(0.0, &NormConfig::default())
        .map_err(|e| e.to_string())?;
    let (xs, _) = p.domain().midpoints(s.n);
    let h = p.domain().side() / s.n as f64;
    let mass: f64 = xs.iter().map(|&x| bump(x / p.rho).powi(2)).sum::<f64>() * h;
    close(s.norm, mass, 1e-6)?;
    let unit = Domain::square(0.0, 1.0);
    let one = DiscreteOperator::new(unit, 64, |_, _| Complex64::new(1.0, 0.0), usize::MAX);
    close(dense_norm(&one.to_dense()), 1.0, 1e-6)?;
    close(schur_bound(&one), 1.0, 1e-6)?;
    let osc = DiscreteOperator::new(
        unit,
        64,
        |x, y| Complex64::from_polar(1.0, 300.0 * x * y),
        usize::MAX,
    );
    close(schur_bound(&osc), 1.0, 1e-6)
}

fn adjoint() -> Check {
    let p = PhaseSpec::new(poly("x^2*y - y^3/3")?, 0.5).map_err(|e| e.to_string())?;
    let k = p.kernel(80.0);
    let op = DiscreteOperator::new(p.domain(), 96, k, usize::MAX);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut vec = || -> Vec<Complex64> {
        (0..96)
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect()
    };
    let (f, g) = (vec(), vec());
    let lhs: Complex64 = op.apply(&f).iter().zip(&g).map(|(a, b)| a * b.conj()).sum();
    let rhs: Complex64 = f
        .iter()
        .zip(op.apply_adjoint(&g))
        .map(|(a, b)| a * b.conj())
        .sum();
    ensure((lhs - rhs).norm() <= 1e-12 * lhs.norm().max(1.0), || {
        format!("{lhs} vs {rhs}")
    })
}

fn elementary_bounds() -> Check {
    close(size_bound(1.0, 1.0), 1.0, 0.0)?;
    close(op_vdc_bound(256.0, 1.0), 1.0 / 16.0, 0.0)?;
    let lambda = 100.0;
    let v = scalar_vdc_check(&poly("x")?, &|_| 1.0, &|_| 0.0, 1, 1.0, (0.0, 1.0), lambda)
        .map_err(|e| e.to_string())?;
    let exact = (2.0 * (1.0 - lambda.cos())).sqrt() / lambda;
    close(v.lhs, exact, 1e-6)?;
    ensure(v.lhs <= v.rhs, || format!("{v:?}"))?;
    let s = sublevel_check(&|t| t, 0.1, 1, 1.0, (0.0, 1.0));
    close(s.measure, 0.1, 1e-5)?;
    ensure(s.measure <= s.bound, || format!("{s:?}"))
}

fn block_rules() -> Check {
    let p = build_polygon(&poly("x*y")?).map_err(|e| e.to_string())?;
    let r = classify_block(4, 9, &p, 3.0);
    ensure(r == Region::Gap(0), || format!("(4,9): {r}"))?;
    let mu = mu_for_block(4, 9, r, &p).map_err(|e| e.to_string())?;
    close(mu, (2f64).powi(-13), 0.0)
}

fn scaling_rules() -> Check {
    let cfg = SweepConfig {
        lambdas: vec![16.0, 32.0, 64.0, 128.0],
        ..SweepConfig::default()
    };
    let zero = PhaseSpec::new(BivarPoly::zero(), 0.5).map_err(|e| e.to_string())?;
    let s = sweep(&zero, &cfg).map_err(|e| e.to_string())?;
    ensure(is_flat(&s, 1e-6), || "S = 0 norms vary".into())?;
    ensure(verify_theorem(&zero, &cfg).is_err(), || {
        "fit accepted for S = 0".into()
    })?;
    let synthetic: Vec<_> = s
        .iter()
        .map(|x| newton_osc::opnorm::NormSample {
            norm: x.lambda.powf(-0.5),
            ..x.clone()
        })
        .collect();
    let fit = fit_decay(&synthetic, 0.02).map_err(|e| e.to_string())?;
    close(fit.slope, -0.5, 1e-12)?;
    ensure(fit.stderr < 1e-12, || format!("stderr {}", fit.stderr))
}

fn dense_oracle() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for trial in 0..6 {
        let n = 32 + 16 * (trial % 3);
        let (a, b, c) = (
            rng.random_range(-3.0..3.0),
            rng.random_range(-3.0..3.0),
            rng.random_range(5.0..60.0),
        );
        let kernel = move |x: f64, y: f64| {
            Complex64::from_polar(1.0 + 0.5 * (a * x).sin(), c * (x * y + b * x * x * y))
        };
        let op = DiscreteOperator::new(Domain::square(-1.0, 1.0), n, kernel, usize::MAX);
        let est = operator_norm(&op, 1e-14, 20_000, trial as u64).map_err(|e| e.to_string())?;
        let exact = dense_norm(&op.to_dense());
        ensure((est.value - exact).abs() <= 1e-8 * exact, || {
            format!("trial {trial}: power {} vs svd {exact}", est.value)
        })?;
    }
    Ok(())
}

/// Runs every check in order and reports one line each.
pub fn run(fault: Option<&str>) -> ExitCode {
    let plateau_fault = match fault {
        None => false,
        Some("theta-plateau") => true,
        Some(other) => {
            eprintln!("unknown fault {other:?}");
            return ExitCode::from(5);
        }
    };
    let checks: Vec<(&str, CheckFn)> = vec![
        ("parse", Box::new(parsing)),
        ("mixed derivative", Box::new(differentiation)),
        ("evaluation", Box::new(evaluation)),
        ("branch evaluation", Box::new(branch_evaluation)),
        (
            "theta plateau",
            Box::new(move || theta_plateau(plateau_fault)),
        ),
        ("newton polygon", Box::new(polygons)),
        ("decay rate", Box::new(decay_rates)),
        ("degeneracy", Box::new(degeneracy)),
        ("puiseux branches", Box::new(branches)),
        ("dyadic lower bound", Box::new(dyadic)),
        ("rank one", Box::new(rank_one)),
        ("adjoint identity", Box::new(adjoint)),
        ("elementary bounds", Box::new(elementary_bounds)),
        ("block classification", Box::new(block_rules)),
        ("scaling", Box::new(scaling_rules)),
        ("dense oracle", Box::new(dense_oracle)),
    ];
    for (name, check) in &checks {
        match check() {
            Ok(()) => println!("ok    {name}"),
            Err(msg) => {
                println!("FAIL  {name}: {msg}");
                eprintln!(
                    "{}",
                    serde_json::json!({
                        "schema": newton_osc::SCHEMA,
                        "error": { "kind": "selftest", "case": name, "message": msg },
                    })
                );
                return ExitCode::from(1);
            }
        }
    }
    println!("all {} checks passed", checks.len());
    ExitCode::SUCCESS
}
