//! Euclidean best approximations for fixed nonlinear parameters.
//!
//! For a fixed rate vector the model is linear in its coefficients, so the
//! coefficients are eliminated by an orthogonal projection of the data onto
//! the span of the basis columns. The error function searched by the outer
//! optimizer is the norm of the projection residual.
//!
//! Exponential columns are evaluated in shifted time `t - t_1`. When the
//! constant column is present the projection is carried out on mean-centred
//! columns, which keeps the solve well conditioned as a rate approaches zero
//! and the exponential column approaches the constant one.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ModelKind, ModelSpec, Observations};

/// Relative pivot threshold below which a Gram matrix is treated as singular.
pub const GRAM_EPS: f64 = 1e-12;

/// `(e^{k (t_i - t_1)})_i`. The first entry is exactly one; entries may
/// underflow to zero.
pub fn exp_basis(k: f64, obs: &Observations) -> Vec<f64> {
    obs.shifted_times().iter().map(|&t| (k * t).exp()).collect()
}

/// Least-squares fit in the plane spanned by `E(k)` and the constant vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlaneL2 {
    /// Coefficient of `e^{k (t - t_1)}`.
    pub shifted_lambda1: f64,
    pub lambda2: f64,
    pub rss: f64,
}

/// Closed-form plane projection, written in terms of `E - I` so that the
/// Cauchy-Schwarz gap of the normal equations is computed without
/// cancellation.
pub fn plane_l2(k: f64, obs: &Observations) -> Result<PlaneL2> {
    let n = obs.len() as f64;
    let d: Vec<f64> = obs.shifted_times().iter().map(|&t| (k * t).exp_m1()).collect();
    let values = obs.values();
    let d_mean = d.iter().sum::<f64>() / n;
    let t_mean = values.iter().sum::<f64>() / n;

    let mut cc = 0.0;
    let mut ct = 0.0;
    let mut dd = 0.0;
    for (&di, &ti) in d.iter().zip(values) {
        let c = di - d_mean;
        cc += c * c;
        ct += c * (ti - t_mean);
        dd += di * di;
    }
    if !(cc > GRAM_EPS * dd) {
        return Err(Error::DegenerateGram);
    }
    let lambda1 = ct / cc;
    let lambda2 = t_mean - lambda1 * (1.0 + d_mean);

    let rss = d
        .iter()
        .zip(values)
        .map(|(&di, &ti)| {
            let r = (ti - t_mean) - lambda1 * (di - d_mean);
            r * r
        })
        .sum();
    Ok(PlaneL2 {
        shifted_lambda1: lambda1,
        lambda2,
        rss,
    })
}

/// Coefficients `(λ1, λ2)` of the best Euclidean approximation `λ1 E + λ2 I`,
/// with `λ1` expressed in original time (`λ1 e^{k t}`).
pub fn lambdas_for_k(k: f64, obs: &Observations) -> Result<(f64, f64)> {
    let fit = plane_l2(k, obs)?;
    Ok((fit.shifted_lambda1 * (-k * obs.origin()).exp(), fit.lambda2))
}

/// Symbolic tag of a basis column.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Column {
    /// `e^{k (t - t_1)}`
    Exp(f64),
    Const,
    /// `sin(μ t)`
    Sin(f64),
    /// `cos(μ t)`
    Cos(f64),
}

impl Column {
    pub fn evaluate(&self, obs: &Observations) -> Vec<f64> {
        match *self {
            Column::Exp(k) => exp_basis(k, obs),
            Column::Const => vec![1.0; obs.len()],
            Column::Sin(mu) => obs.times().iter().map(|&t| (mu * t).sin()).collect(),
            Column::Cos(mu) => obs.times().iter().map(|&t| (mu * t).cos()).collect(),
        }
    }
}

/// Basis columns evaluated at the observation times.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisMatrix {
    columns: Vec<Vec<f64>>,
    labels: Vec<Column>,
    origin: f64,
}

impl BasisMatrix {
    pub fn new(labels: Vec<Column>, obs: &Observations) -> Self {
        let columns = labels.iter().map(|c| c.evaluate(obs)).collect();
        BasisMatrix {
            columns,
            labels,
            origin: obs.origin(),
        }
    }

    /// Columns of the given pattern in basis order: exponentials, constant,
    /// then `sin, cos` for each frequency.
    pub fn for_model(rates: &[f64], frequencies: &[f64], obs: &Observations) -> Self {
        let mut labels: Vec<Column> = rates.iter().map(|&k| Column::Exp(k)).collect();
        labels.push(Column::Const);
        for &mu in frequencies {
            labels.push(Column::Sin(mu));
            labels.push(Column::Cos(mu));
        }
        BasisMatrix::new(labels, obs)
    }

    pub fn columns(&self) -> &[Vec<f64>] {
        &self.columns
    }

    pub fn labels(&self) -> &[Column] {
        &self.labels
    }

    /// Rescales exponential coefficients from shifted to original time.
    pub fn to_original(&self, coeffs: &[f64]) -> Vec<f64> {
        coeffs
            .iter()
            .zip(&self.labels)
            .map(|(&c, label)| match *label {
                Column::Exp(k) => c * (-k * self.origin).exp(),
                _ => c,
            })
            .collect()
    }
}

/// Result of a projection: coefficients in basis order and the residual sum
/// of squares.
#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    pub coeffs: Vec<f64>,
    pub rss: f64,
}

/// A basis column split into its mean and deviations from the mean.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct CenteredColumn {
    pub mean: f64,
    pub dev: Vec<f64>,
}

impl CenteredColumn {
    pub fn new(values: &[f64]) -> Self {
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        CenteredColumn {
            mean,
            dev: values.iter().map(|v| v - mean).collect(),
        }
    }
}

/// Projects `target` onto `span{I, cols}`. Returns the coefficients of
/// `cols` followed by the constant's coefficient.
pub(crate) fn project_centered(cols: &[&CenteredColumn], target: &CenteredColumn) -> Result<(Vec<f64>, f64, f64)> {
    let p = cols.len();
    let mut gram = vec![0.0; p * p];
    let mut rhs = vec![0.0; p];
    for a in 0..p {
        for b in a..p {
            let g = dot(&cols[a].dev, &cols[b].dev);
            gram[a * p + b] = g;
            gram[b * p + a] = g;
        }
        rhs[a] = dot(&cols[a].dev, &target.dev);
    }
    solve_centered(cols, target, gram, rhs)
}

/// Finishes [`project_centered`] from an already assembled Gram system of
/// the centred columns.
pub(crate) fn solve_centered(
    cols: &[&CenteredColumn],
    target: &CenteredColumn,
    mut gram: Vec<f64>,
    mut rhs: Vec<f64>,
) -> Result<(Vec<f64>, f64, f64)> {
    let coeffs = solve_gram(&mut gram, &mut rhs, cols.len())?;
    let constant = target.mean - coeffs.iter().zip(cols).map(|(c, col)| c * col.mean).sum::<f64>();

    let mut rss = 0.0;
    for i in 0..target.dev.len() {
        let mut r = target.dev[i];
        for (c, col) in coeffs.iter().zip(cols) {
            r -= c * col.dev[i];
        }
        rss += r * r;
    }
    Ok((coeffs, constant, rss))
}

/// Euclidean projection of the observed values onto the span of the basis
/// columns, solved through the (equilibrated) Gram system.
pub fn project_l2(basis: &BasisMatrix, obs: &Observations) -> Result<Projection> {
    let p = basis.columns.len();
    let n = obs.len();
    if p == 0 || p > n {
        return Err(Error::InvalidConfig(format!(
            "basis with {p} columns for {n} observations"
        )));
    }
    if basis.columns.iter().any(|c| c.len() != n) {
        return Err(Error::InvalidConfig(
            "basis column length differs from series length".into(),
        ));
    }
    let values = obs.values();

    if let Some(ci) = basis.labels.iter().position(|l| *l == Column::Const) {
        let target = CenteredColumn::new(values);
        let others: Vec<usize> = (0..p).filter(|&j| j != ci).collect();
        let centered: Vec<CenteredColumn> = others.iter().map(|&j| CenteredColumn::new(&basis.columns[j])).collect();
        let refs: Vec<&CenteredColumn> = centered.iter().collect();
        let (partial, constant, rss) = project_centered(&refs, &target)?;
        let mut coeffs = vec![0.0; p];
        for (&j, c) in others.iter().zip(partial) {
            coeffs[j] = c;
        }
        coeffs[ci] = constant;
        return Ok(Projection { coeffs, rss });
    }

    let mut gram = vec![0.0; p * p];
    let mut rhs = vec![0.0; p];
    for a in 0..p {
        for b in a..p {
            let g = dot(&basis.columns[a], &basis.columns[b]);
            gram[a * p + b] = g;
            gram[b * p + a] = g;
        }
        rhs[a] = dot(&basis.columns[a], values);
    }
    let coeffs = solve_gram(&mut gram, &mut rhs, p)?;
    let rss = (0..n)
        .map(|i| {
            let fitted: f64 = coeffs.iter().zip(&basis.columns).map(|(c, col)| c * col[i]).sum();
            let r = values[i] - fitted;
            r * r
        })
        .sum();
    Ok(Projection { coeffs, rss })
}

/// Euclidean error `‖F - T‖₂` of the best approximation at a nonlinear
/// point given in search-axis order (`k`, `k1 k2` or `k1 k2 μ1 μ2`).
pub fn e2(point: &[f64], spec: &ModelSpec, obs: &Observations) -> Result<f64> {
    let kind = spec.kind;
    if point.len() != kind.rate_count() + kind.frequency_count() {
        return Err(Error::InvalidConfig(format!(
            "model {} takes {} nonlinear parameters, got {}",
            kind.name(),
            kind.rate_count() + kind.frequency_count(),
            point.len()
        )));
    }
    let rss = match kind {
        ModelKind::Exp1 => plane_l2(point[0], obs)?.rss,
        _ => {
            let (rates, freqs) = point.split_at(kind.rate_count());
            project_l2(&BasisMatrix::for_model(rates, freqs, obs), obs)?.rss
        }
    };
    Ok(rss.sqrt())
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Solves the symmetric system `G c = rhs` (row-major `p × p`) after
/// scaling to unit diagonal, by elimination with partial pivoting.
fn solve_gram(gram: &mut [f64], rhs: &mut [f64], p: usize) -> Result<Vec<f64>> {
    let mut scale = vec![0.0; p];
    for i in 0..p {
        let d = gram[i * p + i];
        if !(d > 0.0) || !d.is_finite() {
            return Err(Error::DegenerateGram);
        }
        scale[i] = 1.0 / d.sqrt();
    }
    for i in 0..p {
        for j in 0..p {
            gram[i * p + j] *= scale[i] * scale[j];
        }
        rhs[i] *= scale[i];
    }

    for col in 0..p {
        let pivot_row = (col..p)
            .max_by(|&a, &b| gram[a * p + col].abs().total_cmp(&gram[b * p + col].abs()))
            .unwrap();
        if gram[pivot_row * p + col].abs() < GRAM_EPS {
            return Err(Error::DegenerateGram);
        }
        if pivot_row != col {
            for j in 0..p {
                gram.swap(col * p + j, pivot_row * p + j);
            }
            rhs.swap(col, pivot_row);
        }
        let pivot = gram[col * p + col];
        for row in col + 1..p {
            let factor = gram[row * p + col] / pivot;
            if factor == 0.0 {
                continue;
            }
            for j in col..p {
                gram[row * p + j] -= factor * gram[col * p + j];
            }
            rhs[row] -= factor * rhs[col];
        }
    }

    let mut x = vec![0.0; p];
    for row in (0..p).rev() {
        let mut acc = rhs[row];
        for j in row + 1..p {
            acc -= gram[row * p + j] * x[j];
        }
        x[row] = acc / gram[row * p + row];
    }
    Ok(x.iter().zip(&scale).map(|(v, s)| v * s).collect())
}
