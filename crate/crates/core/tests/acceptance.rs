//! End-to-end acceptance checks. Prints one verdict line per criterion and
//! exits nonzero when any criterion fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tacfit::chebyshev::{classify_target, e_inf, exp_through_three_points, plane_fit_inf, TargetClass};
use tacfit::fit::{evaluate_model, fit_exp1, fit_exp2, fit_exp2_osc, metrics};
use tacfit::oracles::{brute_l2_plane, brute_minimax_2basis};
use tacfit::projection::{exp_basis, lambdas_for_k};
use tacfit::tac::{tac_minimize_1d, TacConfig};
use tacfit::{synth, validate_observations, Error, Interval, ModelKind, ModelSpec, Norm, Observations, ParamSet};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn random_obs(rng: &mut ChaCha8Rng, n: usize) -> Observations {
    let raw: Vec<(f64, f64)> = (0..n).map(|i| (i as f64, rng.gen_range(0.0..1.0))).collect();
    validate_observations(&raw).unwrap()
}

fn random_rate(rng: &mut ChaCha8Rng) -> f64 {
    -(10f64.powf(rng.gen_range(-3.0..1.0)))
}

fn single_exp() -> Outcome {
    let obs = synth::single_exp_series();
    let start = Instant::now();
    let report = fit_exp1(&obs, &ModelSpec::exp1()).map_err(|e| e.to_string())?;
    let secs = start.elapsed().as_secs_f64();
    let p = &report.params;
    let (k, l1, l2) = (p.rates[0], p.linear[0], p.linear[1]);
    let detail = format!(
        "k={k:.10}, lambda1={l1:.9}, lambda2={l2:.9}, mse={:.3e}, {secs:.3}s",
        report.mse
    );
    ensure((k + 1.12345678).abs() <= 1e-8, || format!("k off: {detail}"))?;
    ensure((l1 - 6.87654321).abs() <= 1e-6, || format!("lambda1 off: {detail}"))?;
    ensure((l2 - 2.11223344).abs() <= 1e-6, || format!("lambda2 off: {detail}"))?;
    ensure(report.mse <= 1e-18, || format!("mse too large: {detail}"))?;
    ensure(secs < 2.0, || format!("too slow: {detail}"))?;
    Ok(detail)
}

fn quasiconvexity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let rates: Vec<f64> = synth::linspace(1.0, -3.0, 64)
        .into_iter()
        .map(|e| -(10f64.powf(e)))
        .collect();
    let mut accepted = 0;
    let mut rejected = 0;
    let mut violations = 0;
    while accepted < 200 {
        let n = rng.gen_range(4..=20);
        let obs = random_obs(&mut rng, n);
        if matches!(classify_target(&obs), TargetClass::ConstantBest { .. }) {
            rejected += 1;
            continue;
        }
        accepted += 1;
        let scale = obs.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let tol = 1e-9 * (1.0 + scale);
        let e: Vec<f64> = rates.iter().map(|&k| e_inf(k, &obs)).collect();
        // Some triple i < j < m violates the bound iff e_j exceeds both the
        // smallest value to its left and the smallest to its right.
        for j in 1..e.len() - 1 {
            let left = e[..j].iter().cloned().fold(f64::MAX, f64::min);
            let right = e[j + 1..].iter().cloned().fold(f64::MAX, f64::min);
            if e[j] > left.max(right) + tol {
                violations += 1;
            }
        }
    }
    ensure(violations == 0, || format!("{violations} violations"))?;
    Ok(format!(
        "200 series ({rejected} constant-best rejected), 64 rates, 0 violations"
    ))
}

fn equioscillation() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst_low = 0.0f64;
    for case in 0..500 {
        let n = rng.gen_range(4..=20);
        let obs = random_obs(&mut rng, n);
        let k = random_rate(&mut rng);
        let fit = plane_fit_inf(k, &obs);
        let u = exp_basis(k, &obs);
        let res = fit.residuals(&u, obs.values());
        let r = fit.r;
        let [i, j, m] = fit.triple;
        ensure(i < j && j < m && m < n, || {
            format!("case {case}: bad triple {:?}", fit.triple)
        })?;
        let s = [res[i], res[j], res[m]];
        ensure(s[0] * s[1] < 0.0 && s[1] * s[2] < 0.0, || {
            format!("case {case}: signs {s:?}")
        })?;
        for v in s {
            ensure(v.abs() >= r * (1.0 - 1e-9) && v.abs() <= r * (1.0 + 1e-12), || {
                format!("case {case}: |{v}| outside [r(1-1e-9), r(1+1e-12)] with r = {r}")
            })?;
            worst_low = worst_low.max(1.0 - v.abs() / r);
        }
        let max = res.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        ensure(max <= r * (1.0 + 1e-12), || {
            format!("case {case}: max residual {max} > r = {r}")
        })?;
    }
    Ok(format!(
        "500 cases, largest relative shortfall at the triple {worst_low:.2e}"
    ))
}

fn oracle_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst = 0.0f64;
    for case in 0..100 {
        let n = rng.gen_range(4..=12);
        let obs = random_obs(&mut rng, n);
        let k = -(10f64.powf(rng.gen_range(-2.0..0.5)));
        let fast = e_inf(k, &obs);
        let (_, _, brute) = brute_minimax_2basis(&exp_basis(k, &obs), &obs);
        let gap = (fast - brute).abs();
        ensure(gap <= 1e-12 * (1.0 + brute), || {
            format!("case {case}: exchange {fast} vs brute {brute}")
        })?;
        worst = worst.max(gap);
    }
    let mut worst_cell = 0.0f64;
    let box_ = Interval::new(-10.0, 10.0).unwrap();
    for case in 0..50 {
        let n = rng.gen_range(6..=30);
        let k = -rng.gen_range(0.05..2.0);
        let params = ParamSet::exp1(k, rng.gen_range(-3.0..3.0), rng.gen_range(-2.0..2.0));
        let clean = synth::series(ModelKind::Exp1, &params, &synth::arange(0.0, 0.5, n));
        let obs = synth::with_uniform_noise(&clean, 0.05, case);
        let (l1, l2) = lambdas_for_k(k, &obs).map_err(|e| e.to_string())?;
        let (b1, b2, _) = brute_l2_plane(k, &obs, box_, box_, 1e-4);
        let cell = (l1 - b1).abs().max((l2 - b2).abs());
        ensure(cell <= 1e-4, || {
            format!("case {case}: ({l1}, {l2}) vs grid ({b1}, {b2})")
        })?;
        worst_cell = worst_cell.max(cell);
    }
    Ok(format!(
        "max |r gap| {worst:.1e} over 100; max lambda gap {worst_cell:.1e} over 50"
    ))
}

fn interpolation() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst = 0.0f64;
    for case in 0..200 {
        let mut c = [
            rng.gen_range(0.0..10.0),
            rng.gen_range(0.0..10.0),
            rng.gen_range(0.0..10.0),
        ];
        c.sort_by(f64::total_cmp);
        if c[1] - c[0] < 0.1 || c[2] - c[1] < 0.1 {
            c = [c[0], c[0] + 0.5, c[0] + 1.7];
        }
        let k = random_rate(&mut rng).max(-3.0);
        let a = rng.gen_range(0.5..3.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let b = rng.gen_range(-2.0..2.0);
        let y = c.map(|ci| a * (k * ci).exp() + b);
        let (a2, b2, k2) = exp_through_three_points(c, y).map_err(|e| format!("case {case}: {e}"))?;
        for i in 0..3 {
            let err = (a2 * (k2 * c[i]).exp() + b2 - y[i]).abs();
            ensure(err <= 1e-12, || format!("case {case}: point {i} misses by {err:e}"))?;
            worst = worst.max(err);
        }
    }
    for case in 0..20 {
        let c = [0.0, 1.0 + case as f64 * 0.2, 5.0];
        let (p, q) = (rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        let y = c.map(|ci| p * ci + q);
        if p.abs() < 1e-3 {
            continue;
        }
        let got = exp_through_three_points(c, y);
        ensure(matches!(got, Err(Error::CollinearPoints)), || {
            format!("collinear case {case}: {got:?}")
        })?;
    }
    Ok(format!(
        "200 triples, max residual {worst:.1e}; collinear triples rejected"
    ))
}

fn tac_unimodal() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let alpha = 1e-6;
    let mut worst = 0.0f64;
    for case in 0..100 {
        let lo = rng.gen_range(-20.0..0.0);
        let hi = lo + rng.gen_range(0.5..20.0);
        let x0 = rng.gen_range(lo..hi);
        let s = rng.gen_range(0.1..5.0);
        let objective: Box<dyn Fn(f64) -> f64 + Sync> = match case % 5 {
            0 => Box::new(move |x| s * (x - x0).powi(2)),
            1 => Box::new(move |x| (x - x0).abs().sqrt()),
            2 => Box::new(move |x| ((x - x0) * s).cosh()),
            3 => Box::new(move |x| (x - x0).abs() + 0.1 * (x - x0).powi(2)),
            _ => Box::new(move |x| 1.0 - (-(x - x0).powi(2) / s).exp()),
        };
        let cfg = TacConfig::one_dimensional(Interval::new(lo, hi).unwrap(), 10, alpha);
        let res = tac_minimize_1d(|x| Ok(objective(x)), &cfg).map_err(|e| format!("case {case}: {e}"))?;
        let err = (res.minimizer[0] - x0).abs();
        ensure(err <= alpha, || {
            format!(
                "case {case} (form {}): |{} - {x0}| = {err:e}",
                case % 5,
                res.minimizer[0]
            )
        })?;
        worst = worst.max(err);
    }
    for case in 0..20 {
        let lo = rng.gen_range(-20.0..0.0);
        let hi = lo + rng.gen_range(0.5..20.0);
        let cfg = TacConfig::one_dimensional(Interval::new(lo, hi).unwrap(), 10, alpha);
        let up = tac_minimize_1d(|x| Ok((0.3 * x).exp() + x), &cfg).map_err(|e| e.to_string())?;
        let down = tac_minimize_1d(|x| Ok(-x.powi(3)), &cfg).map_err(|e| e.to_string())?;
        ensure((up.minimizer[0] - lo).abs() <= alpha, || {
            format!("increasing case {case}: {}", up.minimizer[0])
        })?;
        ensure((down.minimizer[0] - hi).abs() <= alpha, || {
            format!("decreasing case {case}: {}", down.minimizer[0])
        })?;
    }
    Ok(format!(
        "100 unimodal within alpha (max error {worst:.1e}), 40 monotone at the endpoint"
    ))
}

fn biexponential() -> Outcome {
    let obs = synth::biexp_series();
    let truth = synth::biexp_params();
    let start = Instant::now();
    let report = fit_exp2(&obs, &ModelSpec::exp2()).map_err(|e| e.to_string())?;
    let secs = start.elapsed().as_secs_f64();
    let rel: Vec<f64> = report
        .params
        .rates
        .iter()
        .zip(&truth.rates)
        .map(|(a, b)| ((a - b) / b).abs())
        .collect();
    let detail = format!(
        "k = {:?}, max relative error {:.1e}, {secs:.2}s",
        report.params.rates,
        rel.iter().cloned().fold(0.0, f64::max)
    );
    ensure(rel.iter().all(|&r| r <= 1e-4), || format!("rates off: {detail}"))?;
    ensure(secs < 60.0, || format!("too slow: {detail}"))?;
    Ok(detail)
}

fn oscillatory() -> Outcome {
    let obs = synth::oscillatory_series();
    let truth = synth::oscillatory_params();
    let nonlinear = |p: &ParamSet| [p.rates[0], p.rates[1], p.frequencies[0], p.frequencies[1]];
    let spec = ModelSpec::exp2_osc();
    let start = Instant::now();
    let coarse = fit_exp2_osc(&obs, &spec.clone().with_mesh(10)).map_err(|e| e.to_string())?;
    let fine = fit_exp2_osc(&obs, &spec.clone().with_mesh(15)).map_err(|e| e.to_string())?;
    let secs = start.elapsed().as_secs_f64();
    let (c, f, t) = (nonlinear(&coarse.params), nonlinear(&fine.params), nonlinear(&truth));
    let rel: Vec<f64> = c.iter().zip(&t).map(|(a, b)| ((a - b) / b).abs()).collect();
    let gap = c.iter().zip(&f).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    let detail = format!(
        "mesh 10: {c:?}, max relative error {:.1e}; 10 vs 15 max gap {gap:.1e}; {secs:.1}s",
        rel.iter().cloned().fold(0.0, f64::max)
    );
    ensure(rel.iter().all(|&r| r <= 1e-3), || format!("not recovered: {detail}"))?;
    ensure(gap <= spec.alpha, || format!("meshes disagree: {detail}"))?;
    Ok(detail)
}

fn degenerate() -> Outcome {
    let raw: Vec<(f64, f64)> = [0.0, 1.0, 0.0, 1.0, 0.0]
        .iter()
        .enumerate()
        .map(|(i, &v)| (i as f64, v))
        .collect();
    let obs = validate_observations(&raw).unwrap();
    match fit_exp1(&obs, &ModelSpec::exp1().with_norm(Norm::Linf)) {
        Err(Error::DegenerateTarget(class)) => ensure(*class == TargetClass::ConstantBest { value: 0.5 }, || {
            format!("witness {class:?}")
        })?,
        other => return Err(format!("expected DegenerateTarget, got {other:?}")),
    }
    let e: Vec<f64> = synth::linspace(1.0, -3.0, 20)
        .into_iter()
        .map(|x| e_inf(-(10f64.powf(x)), &obs))
        .collect();
    let spread = e.iter().cloned().fold(f64::MIN, f64::max) - e.iter().cloned().fold(f64::MAX, f64::min);
    ensure(spread <= 1e-12, || format!("e_inf spread {spread:e}"))?;
    Ok(format!(
        "ConstantBest witness 0.5; e_inf = {} with spread {spread:.1e}",
        e[0]
    ))
}

fn cli_end_to_end() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let input = dir.path().join("single.csv");
    let report_path = dir.path().join("report.json");
    let obs = synth::single_exp_series();
    let csv: String = std::iter::once("t,T\n".to_string())
        .chain(obs.pairs().iter().map(|(t, v)| format!("{t},{v}\n")))
        .collect();
    std::fs::write(&input, csv).map_err(|e| e.to_string())?;
    let status = Command::new(env!("CARGO_BIN_EXE_tacfit"))
        .args(["--input"])
        .arg(&input)
        .args([
            "--model",
            "exp1",
            "--norm",
            "l2",
            "--k-range",
            "-10:-1e-9",
            "--mesh",
            "10",
            "--alpha",
            "1e-9",
        ])
        .arg("--report")
        .arg(&report_path)
        .status()
        .map_err(|e| e.to_string())?;
    ensure(status.success(), || format!("CLI exited with {status}"))?;
    let text = std::fs::read_to_string(&report_path).map_err(|e| e.to_string())?;
    let json: serde_json::Value = serde_json::from_str(&text).map_err(|e| e.to_string())?;
    let library = fit_exp1(&obs, &ModelSpec::exp1()).map_err(|e| e.to_string())?;
    let from_cli =
        ParamSet::from_named(ModelKind::Exp1, |name| json["params"][name].as_f64()).map_err(|e| e.to_string())?;
    let bits = |p: &ParamSet| p.rates.iter().chain(&p.linear).map(|v| v.to_bits()).collect::<Vec<_>>();
    ensure(bits(&from_cli) == bits(&library.params), || {
        format!("CLI {from_cli:?} differs from library {:?}", library.params)
    })?;
    let (rss, mse) = metrics(&obs, &evaluate_model(&from_cli, ModelKind::Exp1, obs.times()));
    let rel = |a: f64, b: f64| {
        if a == b {
            0.0
        } else {
            (a - b).abs() / a.abs().max(b.abs())
        }
    };
    let reported = (
        json["rss"].as_f64().unwrap_or(f64::NAN),
        json["mse"].as_f64().unwrap_or(f64::NAN),
    );
    let gaps = (rel(rss, reported.0), rel(mse, reported.1));
    ensure(gaps.0 <= 1e-15 && gaps.1 <= 1e-15, || format!("metric gaps {gaps:?}"))?;
    Ok(format!(
        "parameters bit-identical; recomputed rss {rss:.3e} (relative gap {:.0e})",
        gaps.0
    ))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("single exponential reproduction", single_exp),
        ("max-norm error is quasiconvex", quasiconvexity),
        ("equioscillation certificate", equioscillation),
        ("oracle equivalence", oracle_equivalence),
        ("three-point exponential interpolation", interpolation),
        ("TAC on unimodal and monotone objectives", tac_unimodal),
        ("biexponential recovery", biexponential),
        ("oscillatory recovery and mesh stability", oscillatory),
        ("degenerate target", degenerate),
        ("CLI end-to-end", cli_end_to_end),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        match outcome {
            Ok(detail) => println!("[PASS] {} {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("[FAIL] {} {name}: {detail}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
