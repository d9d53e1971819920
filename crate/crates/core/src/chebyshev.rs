//! Best max-norm approximation in a two-dimensional plane `span{u, I}`.
//!
//! A residual `T - (a u + b)` is minimal in the max norm exactly when it
//! attains `±r` with alternating signs at three increasing indices, and the
//! minimal element is then unique. [`minimax_2basis`] finds it with a
//! three-point exchange and returns that alternation triple as a
//! certificate. On top of it sit the max-norm error function [`e_inf`], the
//! classification of targets whose best exponential approximation is
//! degenerate, and the exponential through three points.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Observations;
use crate::projection::exp_basis;

/// Relative tolerance used to decide that two data values are equal to the
/// extreme value of the series.
pub const CLUSTER_TOL: f64 = 1e-12;

/// Best approximation `a u + b` in the max norm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlaneFit {
    pub a: f64,
    pub b: f64,
    /// Achieved max-norm error.
    pub r: f64,
    /// Increasing indices where the residual alternates in sign at `±r`.
    pub triple: [usize; 3],
}

impl PlaneFit {
    /// `T_i - (a u_i + b)`.
    pub fn residuals(&self, u: &[f64], values: &[f64]) -> Vec<f64> {
        u.iter()
            .zip(values)
            .map(|(&ui, &ti)| ti - (self.a * ui + self.b))
            .collect()
    }
}

/// Which of the four behaviours of the max-norm error function the data
/// exhibits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "case", content = "witness")]
pub enum TargetClass {
    /// A minimum lies between two maxima (or the dual): the constant
    /// `(m + M) / 2` is best for every rate.
    ConstantBest { value: f64 },
    /// The error decreases as `k → -∞`, towards this limit vector.
    LimitAtMinusInfinity { limit: Vec<f64> },
    /// The error decreases as `k → 0⁻`, towards the line `slope·t + intercept`
    /// (original time).
    LimitAtZeroLine { slope: f64, intercept: f64 },
    /// Some rate attains the unique best approximation.
    InteriorMinimum,
}

impl TargetClass {
    pub fn name(&self) -> &'static str {
        match self {
            TargetClass::ConstantBest { .. } => "ConstantBest",
            TargetClass::LimitAtMinusInfinity { .. } => "LimitAtMinusInfinity",
            TargetClass::LimitAtZeroLine { .. } => "LimitAtZeroLine",
            TargetClass::InteriorMinimum => "InteriorMinimum",
        }
    }
}

/// Best max-norm approximation of the observed values by `a u + b`, for a
/// monotone `u`.
///
/// Runs of `u` entries that agree to rounding (exponentials that decayed
/// below machine precision) are allowed; within such a run only the largest
/// and smallest value can be active, so the others are dropped before the
/// exchange.
pub fn minimax_2basis(u: &[f64], obs: &Observations) -> Result<PlaneFit> {
    if u.len() != obs.len() {
        return Err(Error::InvalidConfig("basis length differs from series length".into()));
    }
    if u.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonMonotoneBasis);
    }
    let nonincreasing = u.windows(2).all(|w| w[1] <= w[0]);
    let nondecreasing = u.windows(2).all(|w| w[1] >= w[0]);
    if !(nonincreasing || nondecreasing) {
        return Err(Error::NonMonotoneBasis);
    }
    Ok(exchange(u, obs.values()))
}

/// Three-point exchange. `u` must be monotone.
pub(crate) fn exchange(u: &[f64], values: &[f64]) -> PlaneFit {
    let active = reduce_ties(u, values);
    let (t_max, t_min) = extremes(values);

    if active.len() < 3 {
        let b = 0.5 * (t_max + t_min);
        let fit = PlaneFit {
            a: 0.0,
            b,
            r: 0.0,
            triple: constant_triple(values),
        };
        return finish(fit, u, values);
    }

    let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let u_scale = u.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut reference = [0, active.len() / 2, active.len() - 1];
    let mut best: Option<(f64, f64, f64, [usize; 3])> = None;

    for _ in 0..(50 + 4 * active.len()) {
        let [i, j, m] = reference.map(|p| active[p]);
        let a = (values[m] - values[i]) / (u[m] - u[i]);
        let h = 0.5 * ((values[i] - a * u[i]) - (values[j] - a * u[j]));
        let b = values[i] - a * u[i] - h;

        let (worst, worst_res) = active
            .iter()
            .enumerate()
            .map(|(p, &idx)| (p, values[idx] - (a * u[idx] + b)))
            .max_by(|x, y| x.1.abs().total_cmp(&y.1.abs()))
            .unwrap();
        if best.is_none_or(|(_, _, err, _)| worst_res.abs() < err) {
            best = Some((a, b, worst_res.abs(), reference));
        }
        let slack = 8.0 * f64::EPSILON * (scale + a.abs() * u_scale + b.abs());
        if worst_res.abs() <= h.abs() * (1.0 + 1e-12) + slack {
            break;
        }
        if reference.contains(&worst) {
            break;
        }

        // Signs of the residual at the reference points: (s, -s, s).
        let s = if h < 0.0 { -1.0 } else { 1.0 };
        let same = |ref_sign: f64| worst_res.signum() == ref_sign;
        let [p0, p1, p2] = reference;
        reference = if worst < p0 {
            if same(s) {
                [worst, p1, p2]
            } else {
                [worst, p0, p1]
            }
        } else if worst < p1 {
            if same(s) {
                [worst, p1, p2]
            } else {
                [p0, worst, p2]
            }
        } else if worst < p2 {
            if same(-s) {
                [p0, worst, p2]
            } else {
                [p0, p1, worst]
            }
        } else if same(s) {
            [p0, p1, worst]
        } else {
            [p1, p2, worst]
        };
    }

    let (a, b, _, reference) = best.unwrap();
    let fit = PlaneFit {
        a,
        b,
        r: 0.0,
        triple: reference.map(|p| active[p]),
    };
    finish(fit, u, values)
}

/// Sets `r` to the achieved max-norm error.
fn finish(mut fit: PlaneFit, u: &[f64], values: &[f64]) -> PlaneFit {
    fit.r = u
        .iter()
        .zip(values)
        .map(|(&ui, &ti)| (ti - (fit.a * ui + fit.b)).abs())
        .fold(0.0, f64::max);
    fit
}

fn extremes(values: &[f64]) -> (f64, f64) {
    values.iter().fold((f64::NEG_INFINITY, f64::INFINITY), |(hi, lo), &v| {
        (hi.max(v), lo.min(v))
    })
}

/// Indices that can be active: each run of `u` entries that agree to
/// rounding contributes its argmax and argmin of the values.
fn reduce_ties(u: &[f64], values: &[f64]) -> Vec<usize> {
    let u_scale = u.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let close = f64::EPSILON * u_scale;
    let mut active = Vec::with_capacity(u.len());
    let mut start = 0;
    while start < u.len() {
        let mut end = start + 1;
        while end < u.len() && (u[end] - u[start]).abs() <= close {
            end += 1;
        }
        if end - start == 1 {
            active.push(start);
        } else {
            let run = start..end;
            let hi = run.clone().max_by(|&x, &y| values[x].total_cmp(&values[y])).unwrap();
            let lo = run.min_by(|&x, &y| values[x].total_cmp(&values[y])).unwrap();
            let (first, second) = if hi < lo { (hi, lo) } else { (lo, hi) };
            active.push(first);
            if values[second] != values[first] {
                active.push(second);
            }
        }
        start = end;
    }
    active
}

/// An alternating max/min/max (or min/max/min) triple, if one exists.
fn constant_triple(values: &[f64]) -> [usize; 3] {
    let (hi, lo) = extremes(values);
    let tol = CLUSTER_TOL * (hi - lo);
    let is_hi = |v: f64| v >= hi - tol;
    let is_lo = |v: f64| v <= lo + tol;
    sandwich(values, &is_hi, &is_lo)
        .or_else(|| sandwich(values, &is_lo, &is_hi))
        .unwrap_or([0, values.len() / 2, values.len() - 1])
}

/// Indices `i < j < m` with `outer(T_i)`, `inner(T_j)`, `outer(T_m)`.
fn sandwich(values: &[f64], outer: &dyn Fn(f64) -> bool, inner: &dyn Fn(f64) -> bool) -> Option<[usize; 3]> {
    let first = values.iter().position(|&v| outer(v))?;
    let last = values.iter().rposition(|&v| outer(v))?;
    let mid = (first + 1..last).find(|&j| inner(values[j]))?;
    Some([first, mid, last])
}

/// Max-norm error of the best approximation in the plane `span{E(k), I}`.
pub fn e_inf(k: f64, obs: &Observations) -> f64 {
    exchange(&exp_basis(k, obs), obs.values()).r
}

/// Best max-norm fit in `span{E(k), I}`.
pub fn plane_fit_inf(k: f64, obs: &Observations) -> PlaneFit {
    exchange(&exp_basis(k, obs), obs.values())
}

/// Decides which of the four behaviours of [`e_inf`] the data exhibits.
pub fn classify_target(obs: &Observations) -> TargetClass {
    classify_with_tol(obs, CLUSTER_TOL)
}

pub fn classify_with_tol(obs: &Observations, tol: f64) -> TargetClass {
    let values = obs.values();
    let (hi, lo) = extremes(values);
    let spread = hi - lo;
    if spread <= 0.0 {
        return TargetClass::ConstantBest { value: hi };
    }
    let eps = tol * spread;
    let is_hi = |v: f64| v >= hi - eps;
    let is_lo = |v: f64| v <= lo + eps;

    if sandwich(values, &is_hi, &is_lo).is_some() || sandwich(values, &is_lo, &is_hi).is_some() {
        return TargetClass::ConstantBest { value: 0.5 * (hi + lo) };
    }

    if let Some(limit) = limit_at_minus_infinity(values, eps) {
        return TargetClass::LimitAtMinusInfinity { limit };
    }
    let negated: Vec<f64> = values.iter().map(|v| -v).collect();
    if let Some(limit) = limit_at_minus_infinity(&negated, eps) {
        return TargetClass::LimitAtMinusInfinity {
            limit: limit.iter().map(|v| -v).collect(),
        };
    }

    let line = exchange(obs.shifted_times(), values);
    let line_tol = tol * spread;
    if line.r <= line_tol || alternation_count(&line.residuals(obs.shifted_times(), values), line.r, line_tol) >= 4 {
        return TargetClass::LimitAtZeroLine {
            slope: line.a,
            intercept: line.b - line.a * obs.origin(),
        };
    }
    TargetClass::InteriorMinimum
}

/// `T_1` is the strict maximum and, among the remaining samples, the
/// minimum is reached before the maximum `M_2` of `T_2..T_n`.
fn limit_at_minus_infinity(values: &[f64], eps: f64) -> Option<Vec<f64>> {
    let first = values[0];
    let rest = &values[1..];
    let (hi2, lo) = extremes(rest);
    if !(first > hi2 + eps) {
        return None;
    }
    let first_min = rest.iter().position(|&v| v <= lo + eps)?;
    let last_hi2 = rest.iter().rposition(|&v| v >= hi2 - eps)?;
    if first_min < last_hi2 {
        let level = 0.5 * (hi2 + lo);
        let mut limit = vec![level; values.len()];
        limit[0] = first;
        Some(limit)
    } else {
        None
    }
}

/// Length of the longest sign-alternating sequence among residuals whose
/// magnitude is within `tol` of `r`.
fn alternation_count(residuals: &[f64], r: f64, tol: f64) -> usize {
    let mut count = 0;
    let mut last_sign = 0.0;
    for &res in residuals {
        if res.abs() >= r - tol {
            let s = res.signum();
            if s != last_sign {
                count += 1;
                last_sign = s;
            }
        }
    }
    count
}

/// The exponential `a e^{kt} + b` through three points with increasing
/// abscissae, found by bisection on the rate.
///
/// With `f_k` the exponential of rate `k` through the first two points,
/// `k ↦ f_k(c_3)` is strictly monotone, tends to `y_2` as `k → -∞`, equals
/// the straight-line extrapolation at `k = 0` and is unbounded as `k → ∞`.
pub fn exp_through_three_points(c: [f64; 3], y: [f64; 3]) -> Result<(f64, f64, f64)> {
    if !(c[0] < c[1] && c[1] < c[2]) || c.iter().chain(&y).any(|v| !v.is_finite()) {
        return Err(Error::InvalidConfig(
            "abscissae must be finite and strictly increasing".into(),
        ));
    }
    let decreasing = y[0] > y[1] && y[1] > y[2];
    let increasing = y[0] < y[1] && y[1] < y[2];
    if !(decreasing || increasing) {
        return Err(Error::NonMonotone);
    }
    let d2 = c[1] - c[0];
    let d3 = c[2] - c[0];
    // Target value of g_k(c_3) = expm1(k d3) / expm1(k d2); g is increasing
    // in k, from 1 at -∞ through d3/d2 at 0 to +∞.
    let target = (y[2] - y[0]) / (y[1] - y[0]);
    let at_zero = d3 / d2;
    if (target - at_zero).abs() <= 4.0 * f64::EPSILON * at_zero {
        return Err(Error::CollinearPoints);
    }
    let g = |k: f64| {
        if k == 0.0 {
            at_zero
        } else {
            (k * d3).exp_m1() / (k * d2).exp_m1()
        }
    };

    let mut lo;
    let mut hi;
    if target > at_zero {
        lo = 0.0;
        hi = 1.0 / d2;
        while g(hi) <= target {
            lo = hi;
            hi *= 2.0;
            if !hi.is_finite() {
                return Err(Error::NonMonotone);
            }
        }
    } else {
        hi = 0.0;
        lo = -1.0 / d2;
        while g(lo) >= target {
            hi = lo;
            lo *= 2.0;
            if !lo.is_finite() {
                return Err(Error::NonMonotone);
            }
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || hi - lo <= 1e-14 * (1.0 + mid.abs()) {
            break;
        }
        if g(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let k = if (g(lo) - target).abs() <= (g(hi) - target).abs() {
        lo
    } else {
        hi
    };
    if k == 0.0 {
        return Err(Error::CollinearPoints);
    }

    // In shifted time the exponential through the first two points is
    // y1 + (y2 - y1) expm1(k s) / expm1(k d2).
    let shifted_a = (y[1] - y[0]) / (k * d2).exp_m1();
    let b = y[0] - shifted_a;
    let a = shifted_a * (-k * c[0]).exp();
    Ok((a, b, k))
}
