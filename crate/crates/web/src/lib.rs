//! WebAssembly entry points for the browser demo in `www/`.
//!
//! Every function takes the series as two-column text and returns a JSON
//! string; failures come back as the same error objects the CLI prints.

use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use tacfit::chebyshev::plane_fit_inf;
use tacfit::fit::{error_curve, evaluate_model, fit_exp1};
use tacfit::io::{error_json, parse_series, report_json};
use tacfit::projection::lambdas_for_k;
use tacfit::{Error, ModelKind, ModelSpec, Norm, ParamSet};

fn spec(norm: &str, mesh: usize) -> Result<ModelSpec, Error> {
    let spec = ModelSpec::exp1().with_norm(norm.parse::<Norm>()?).with_mesh(mesh);
    spec.validate()?;
    Ok(spec)
}

fn respond(result: Result<Value, Error>, spec: Option<&ModelSpec>) -> String {
    result.unwrap_or_else(|e| error_json(&e, spec)).to_string()
}

fn fit_value(series: &str, norm: &str, mesh: usize) -> Result<Value, Error> {
    let spec = spec(norm, mesh)?;
    let obs = parse_series(series)?;
    let report = fit_exp1(&obs, &spec)?;
    let mut out = report_json(&report, false);
    out["times"] = json!(obs.times());
    out["values"] = json!(obs.values());
    out["fitted"] = json!(report.fitted);
    Ok(out)
}

/// Fits `λ1 e^{kt} + λ2` and returns the report with the data and the
/// fitted curve attached.
#[wasm_bindgen]
pub fn fit_series(series: &str, norm: &str, mesh: usize) -> String {
    respond(fit_value(series, norm, mesh), spec(norm, mesh).ok().as_ref())
}

/// Samples the error function on the default rate interval as
/// `{"k": [...], "error": [...]}`.
#[wasm_bindgen]
pub fn sample_error_curve(series: &str, norm: &str, samples: usize) -> String {
    let result = (|| {
        let spec = spec(norm, 10)?;
        let obs = parse_series(series)?;
        let curve = error_curve(&obs, &spec, samples)?;
        let (k, e): (Vec<f64>, Vec<f64>) = curve.into_iter().unzip();
        Ok(json!({ "k": k, "error": e }))
    })();
    respond(result, None)
}

/// Least-squares and minimax fits at one fixed rate, with both curves
/// evaluated at the observation times and the data attached.
#[wasm_bindgen]
pub fn plane_fits_at(series: &str, k: f64) -> String {
    let result = (|| {
        let obs = parse_series(series)?;
        let curve = |p: &ParamSet| evaluate_model(p, ModelKind::Exp1, obs.times());
        let (l1, l2) = lambdas_for_k(k, &obs)?;
        let ls = ParamSet::exp1(k, l1, l2);
        let inf = plane_fit_inf(k, &obs);
        let mm = ParamSet::exp1(k, inf.a * (-k * obs.origin()).exp(), inf.b);
        let max_err = |fitted: &[f64]| {
            fitted
                .iter()
                .zip(obs.values())
                .map(|(f, v)| (f - v).abs())
                .fold(0.0, f64::max)
        };
        let (ls_fit, mm_fit) = (curve(&ls), curve(&mm));
        Ok(json!({
            "k": k,
            "times": obs.times(),
            "values": obs.values(),
            "least_squares": { "lambda1": l1, "lambda2": l2, "max_error": max_err(&ls_fit), "fitted": ls_fit },
            "minimax": {
                "lambda1": mm.linear[0], "lambda2": inf.b, "max_error": inf.r,
                "triple": inf.triple, "fitted": mm_fit,
            },
        }))
    })();
    respond(result, None)
}
