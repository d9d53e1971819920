//! End-to-end fitting pipelines.
//!
//! Every pipeline runs the mesh search over the nonlinear parameters with
//! the linear coefficients eliminated at each mesh point, then solves the
//! linear problem once more at the located point. The search works on
//! values scaled by `max |T|` so tie detection does not depend on the units
//! of the data. Reported coefficients are in original units and time.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};
use web_time::Instant;

use crate::chebyshev::{classify_target, e_inf, plane_fit_inf, TargetClass};
use crate::error::{Error, Result};
use crate::model::{FitReport, ModelKind, ModelSpec, Norm, Observations, ParamSet};
use crate::projection::{
    dot, lambdas_for_k, plane_l2, project_l2, solve_centered, BasisMatrix, CenteredColumn, Column,
};
use crate::tac::{tac_minimize_1d, tac_minimize_nd, TacConfig, TacResult};

/// Evaluates a pattern at `times` (original time).
pub fn evaluate_model(params: &ParamSet, kind: ModelKind, times: &[f64]) -> Vec<f64> {
    let r = &params.rates;
    let l = &params.linear;
    times
        .iter()
        .map(|&t| match kind {
            ModelKind::Exp1 => l[0] * (r[0] * t).exp() + l[1],
            ModelKind::Exp2 => l[0] * (r[0] * t).exp() + l[1] * (r[1] * t).exp() + l[2],
            ModelKind::Exp2Osc => {
                let mu = &params.frequencies;
                l[0] * (r[0] * t).exp()
                    + l[1] * (r[1] * t).exp()
                    + l[2]
                    + l[3] * (mu[0] * t).sin()
                    + l[4] * (mu[0] * t).cos()
                    + l[5] * (mu[1] * t).sin()
                    + l[6] * (mu[1] * t).cos()
            }
        })
        .collect()
}

/// `(rss, mse)` of `fitted` against the observed values.
pub fn metrics(obs: &Observations, fitted: &[f64]) -> (f64, f64) {
    assert_eq!(obs.len(), fitted.len(), "fitted length differs from series length");
    let rss: f64 = obs.values().iter().zip(fitted).map(|(t, f)| (t - f) * (t - f)).sum();
    (rss, rss / obs.len() as f64)
}

/// Runs the pipeline matching `spec.kind`.
pub fn fit(obs: &Observations, spec: &ModelSpec) -> Result<FitReport> {
    match spec.kind {
        ModelKind::Exp1 => fit_exp1(obs, spec),
        ModelKind::Exp2 => fit_exp2(obs, spec),
        ModelKind::Exp2Osc => fit_exp2_osc(obs, spec),
    }
}

fn scaled(obs: &Observations) -> (Observations, f64) {
    let s = obs.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let s = if s > 0.0 { s } else { 1.0 };
    (obs.with_values(obs.values().iter().map(|v| v / s).collect()), s)
}

fn expect_kind(spec: &ModelSpec, kind: ModelKind) -> Result<()> {
    spec.validate()?;
    if spec.kind != kind {
        return Err(Error::InvalidConfig(format!(
            "spec is for model {}, pipeline fits {}",
            spec.kind.name(),
            kind.name()
        )));
    }
    Ok(())
}

fn finish(
    obs: &Observations,
    spec: &ModelSpec,
    params: ParamSet,
    search: TacResult,
    objective: f64,
    started: Instant,
) -> FitReport {
    let fitted = evaluate_model(&params, spec.kind, obs.times());
    let residuals: Vec<f64> = obs.values().iter().zip(&fitted).map(|(t, f)| t - f).collect();
    let (rss, mse) = metrics(obs, &fitted);
    FitReport {
        spec: spec.clone(),
        params,
        rss,
        mse,
        residuals,
        fitted,
        tac_iterations: search.iterations,
        evaluations: search.evaluations,
        wall_time: started.elapsed().as_secs_f64(),
        objective,
        classification: None,
        minimax_radius: None,
        trace: search.trace,
    }
}

/// Fits `λ1 e^{kt} + λ2` in the norm given by `spec.norm`.
///
/// A max-norm fit first classifies the data and returns
/// [`Error::DegenerateTarget`] with the witness when no interior best
/// approximation exists.
pub fn fit_exp1(obs: &Observations, spec: &ModelSpec) -> Result<FitReport> {
    expect_kind(spec, ModelKind::Exp1)?;
    let started = Instant::now();
    let mut cfg = TacConfig::one_dimensional(spec.k_interval, spec.mesh, spec.alpha);
    cfg.tie_tol = spec.argmin_tie_tol;
    cfg.max_stalls = 4;
    cfg.parallel = spec.parallel;
    let (unit, s) = scaled(obs);

    match spec.norm {
        Norm::L2 => {
            let search = tac_minimize_1d(
                |k| match plane_l2(k, &unit) {
                    Ok(p) => Ok(p.rss.sqrt()),
                    Err(Error::DegenerateGram) => Ok(f64::INFINITY),
                    Err(e) => Err(e),
                },
                &cfg,
            )?;
            let k = search.minimizer[0];
            let (l1, l2) = lambdas_for_k(k, obs)?;
            let objective = search.objective_at_min * s;
            Ok(finish(obs, spec, ParamSet::exp1(k, l1, l2), search, objective, started))
        }
        Norm::Linf => {
            let class = classify_target(obs);
            if class != TargetClass::InteriorMinimum {
                return Err(Error::DegenerateTarget(Box::new(class)));
            }
            let search = tac_minimize_1d(|k| Ok(e_inf(k, &unit)), &cfg)?;
            let k = search.minimizer[0];
            let plane = plane_fit_inf(k, obs);
            let l1 = plane.a * (-k * obs.origin()).exp();
            let objective = search.objective_at_min * s;
            let mut report = finish(obs, spec, ParamSet::exp1(k, l1, plane.b), search, objective, started);
            report.classification = Some(class);
            report.minimax_radius = Some(plane.r);
            Ok(report)
        }
    }
}

type Key = (u8, u64);

fn key(column: Column) -> Key {
    match column {
        Column::Exp(k) => (0, k.to_bits()),
        Column::Sin(mu) => (1, mu.to_bits()),
        Column::Cos(mu) => (2, mu.to_bits()),
        Column::Const => (3, 0),
    }
}

/// Centred basis columns and their inner products, shared across mesh
/// points. Neighbouring grid points share all but one column, so almost
/// every Gram entry is a lookup.
struct ColumnCache<'a> {
    obs: &'a Observations,
    target: CenteredColumn,
    columns: Mutex<HashMap<Key, Arc<CenteredColumn>>>,
    dots: Mutex<HashMap<(Key, Option<Key>), f64>>,
}

impl<'a> ColumnCache<'a> {
    const LIMIT: usize = 1 << 16;

    fn new(obs: &'a Observations) -> Self {
        ColumnCache {
            obs,
            target: CenteredColumn::new(obs.values()),
            columns: Mutex::new(HashMap::new()),
            dots: Mutex::new(HashMap::new()),
        }
    }

    fn column(&self, column: Column) -> Arc<CenteredColumn> {
        let k = key(column);
        if let Some(c) = self.columns.lock().unwrap().get(&k) {
            return Arc::clone(c);
        }
        let c = Arc::new(CenteredColumn::new(&column.evaluate(self.obs)));
        let mut map = self.columns.lock().unwrap();
        if map.len() >= Self::LIMIT / 16 {
            map.clear();
        }
        map.insert(k, Arc::clone(&c));
        c
    }

    /// `<a, b>` of centred columns, or `<a, T>` when `b` is `None`.
    fn dot(&self, a: (Column, &CenteredColumn), b: Option<(Column, &CenteredColumn)>) -> f64 {
        let (ka, kb) = (key(a.0), b.map(|b| key(b.0)));
        let k = match kb {
            Some(kb) if kb < ka => (kb, Some(ka)),
            _ => (ka, kb),
        };
        if let Some(&v) = self.dots.lock().unwrap().get(&k) {
            return v;
        }
        let other = b.map_or(&self.target.dev, |b| &b.1.dev);
        let v = dot(&a.1.dev, other);
        let mut map = self.dots.lock().unwrap();
        if map.len() >= Self::LIMIT {
            map.clear();
        }
        map.insert(k, v);
        v
    }

    /// Residual norm of the projection onto `span{I, labels}`.
    fn residual_norm(&self, labels: &[Column]) -> Result<f64> {
        let cols: Vec<Arc<CenteredColumn>> = labels.iter().map(|&l| self.column(l)).collect();
        let p = cols.len();
        let mut gram = vec![0.0; p * p];
        let mut rhs = vec![0.0; p];
        for a in 0..p {
            for b in a..p {
                let g = self.dot((labels[a], &cols[a]), Some((labels[b], &cols[b])));
                gram[a * p + b] = g;
                gram[b * p + a] = g;
            }
            rhs[a] = self.dot((labels[a], &cols[a]), None);
        }
        let refs: Vec<&CenteredColumn> = cols.iter().map(|c| c.as_ref()).collect();
        let (_, _, rss) = solve_centered(&refs, &self.target, gram, rhs)?;
        Ok(rss.sqrt())
    }
}

fn nd_fit(obs: &Observations, spec: &ModelSpec, kind: ModelKind) -> Result<FitReport> {
    expect_kind(spec, kind)?;
    if spec.norm != Norm::L2 {
        return Err(Error::InvalidConfig(format!(
            "model {} supports only the l2 norm",
            kind.name()
        )));
    }
    let started = Instant::now();
    let mut intervals = vec![spec.k_interval, spec.k_interval];
    let mut cfg_ascending = vec![(0, 1)];
    if kind == ModelKind::Exp2Osc {
        let mu = spec
            .mu_interval
            .ok_or_else(|| Error::InvalidConfig("frequency interval required".into()))?;
        intervals.extend([mu, mu]);
        cfg_ascending.push((2, 3));
    }
    let mut cfg = TacConfig::new(intervals, spec.mesh, spec.alpha);
    cfg.ascending = cfg_ascending;
    cfg.tie_tol = spec.argmin_tie_tol;
    cfg.max_stalls = 2;
    cfg.densify_cap = if kind == ModelKind::Exp2Osc {
        2 * spec.mesh
    } else {
        spec.mesh << 5
    };
    cfg.parallel = spec.parallel;

    let (unit, s) = scaled(obs);
    let cache = ColumnCache::new(&unit);
    let objective = |p: &[f64]| -> Result<f64> {
        let mut labels = vec![Column::Exp(p[0]), Column::Exp(p[1])];
        for &mu in &p[2..] {
            labels.extend([Column::Sin(mu), Column::Cos(mu)]);
        }
        match cache.residual_norm(&labels) {
            Err(Error::DegenerateGram) => Ok(f64::INFINITY),
            other => other,
        }
    };
    let search = tac_minimize_nd(objective, &cfg)?;

    let x = &search.minimizer;
    let (rates, frequencies) = (x[..2].to_vec(), x[2..].to_vec());
    let basis = BasisMatrix::for_model(&rates, &frequencies, obs);
    let projection = project_l2(&basis, obs)?;
    let linear = basis.to_original(&projection.coeffs);
    let objective = search.objective_at_min * s;
    Ok(finish(
        obs,
        spec,
        ParamSet {
            rates,
            frequencies,
            linear,
        },
        search,
        objective,
        started,
    ))
}

/// Fits `λ1 e^{k1 t} + λ2 e^{k2 t} + λ3` with `k1 < k2`.
pub fn fit_exp2(obs: &Observations, spec: &ModelSpec) -> Result<FitReport> {
    nd_fit(obs, spec, ModelKind::Exp2)
}

/// Fits the biexponential plus `β1 sin μ1 t + β2 cos μ1 t + β3 sin μ2 t +
/// β4 cos μ2 t` with `k1 < k2` and `μ1 < μ2`.
pub fn fit_exp2_osc(obs: &Observations, spec: &ModelSpec) -> Result<FitReport> {
    nd_fit(obs, spec, ModelKind::Exp2Osc)
}

/// Samples the single-exponential error function at `samples` rates
/// spread evenly over `spec.k_interval`. Rates where the plane is
/// numerically degenerate are skipped.
pub fn error_curve(obs: &Observations, spec: &ModelSpec, samples: usize) -> Result<Vec<(f64, f64)>> {
    expect_kind(spec, ModelKind::Exp1)?;
    if samples < 2 {
        return Err(Error::InvalidConfig("error curve needs at least two samples".into()));
    }
    let iv = spec.k_interval;
    let h = iv.width() / (samples - 1) as f64;
    let mut out = Vec::with_capacity(samples);
    for i in 0..samples {
        let k = if i + 1 == samples { iv.hi } else { iv.lo + i as f64 * h };
        let e = match spec.norm {
            Norm::L2 => match plane_l2(k, obs) {
                Ok(p) => p.rss.sqrt(),
                Err(Error::DegenerateGram) => continue,
                Err(e) => return Err(e),
            },
            Norm::Linf => e_inf(k, obs),
        };
        out.push((k, e));
    }
    Ok(out)
}
