//! Mesh-sampling minimizer for (quasi)convex objectives.
//!
//! Each iteration samples the objective on a uniform mesh of the current
//! bracket and inspects the samples:
//!
//! * **C1** – more than one sign change in the forward differences means
//!   relative minima were sampled. The bracket is narrowed to the span of the
//!   sign changes and the mesh is doubled.
//! * **C2** – more than one sample attains the minimum. The bracket is
//!   narrowed to the span of those samples.
//! * otherwise the bracket is narrowed to the two cells around the unique
//!   minimum and the mesh is reset. The loop stops once the located point
//!   moved by at most `alpha` and the mesh spacing is at most `alpha`.
//!
//! Two safeguards bound the work. A C1 step that keeps more than half of the
//! bracket is a stall; after `max_stalls` consecutive stalls the samples are
//! treated as resolved and the C2/refinement rules apply. A C2 step whose
//! bracket would not shrink means the minimum is a plateau covering the
//! whole bracket, and the loop stops at the middle of the plateau. The mesh
//! never grows beyond `densify_cap`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Interval;

#[derive(Debug, Clone, PartialEq)]
pub struct TacConfig {
    /// One search interval per axis.
    pub intervals: Vec<Interval>,
    /// Default mesh divisions per axis (`n_0`).
    pub mesh: usize,
    pub alpha: f64,
    /// Relative tolerance for the argmin set.
    pub tie_tol: f64,
    pub max_iterations: usize,
    /// Largest mesh the C1 block may reach. Once doubling would exceed it,
    /// sign changes are ignored as after a run of stalls.
    pub densify_cap: usize,
    /// Consecutive non-shrinking C1 steps tolerated before refining anyway.
    pub max_stalls: usize,
    /// Upper bound on objective evaluations over the whole run.
    pub max_evaluations: u64,
    /// Pairs `(a, b)` of axes with the constraint `x[a] < x[b]`. Points
    /// violating it are not evaluated.
    pub ascending: Vec<(usize, usize)>,
    pub parallel: bool,
}

impl TacConfig {
    pub fn new(intervals: Vec<Interval>, mesh: usize, alpha: f64) -> Self {
        TacConfig {
            intervals,
            mesh,
            alpha,
            tie_tol: 1e-12,
            max_iterations: 200,
            densify_cap: mesh << 14,
            max_stalls: 3,
            max_evaluations: 200_000_000,
            ascending: Vec::new(),
            parallel: false,
        }
    }

    pub fn one_dimensional(interval: Interval, mesh: usize, alpha: f64) -> Self {
        TacConfig::new(vec![interval], mesh, alpha)
    }

    pub fn with_ascending(mut self, a: usize, b: usize) -> Self {
        self.ascending.push((a, b));
        self
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.intervals.len();
        if !(1..=4).contains(&d) {
            return Err(Error::InvalidConfig(format!(
                "between 1 and 4 axes are supported, got {d}"
            )));
        }
        for iv in &self.intervals {
            Interval::new(iv.lo, iv.hi)?;
        }
        if self.mesh < 2 {
            return Err(Error::InvalidConfig("mesh must be at least 2".into()));
        }
        if !(self.alpha > 0.0) {
            return Err(Error::InvalidConfig("alpha must be positive".into()));
        }
        if !(self.tie_tol >= 0.0) {
            return Err(Error::InvalidConfig("tie tolerance must be nonnegative".into()));
        }
        if self.densify_cap < self.mesh {
            return Err(Error::InvalidConfig("densify cap below the default mesh".into()));
        }
        if self.ascending.iter().any(|&(a, b)| a >= d || b >= d || a == b) {
            return Err(Error::InvalidConfig(
                "ordering constraint refers to a missing axis".into(),
            ));
        }
        Ok(())
    }
}

/// What one axis did in one iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Step {
    /// C1: bracket the sign changes, double the mesh.
    Densify,
    /// C1 triggered elsewhere; this axis kept its bracket.
    Hold,
    /// C2: bracket the tied minima.
    Span,
    /// C2 on a plateau covering the bracket.
    Plateau,
    /// Minimum on an edge of a bracket that is narrower than the search
    /// interval; the bracket is recentred on it and doubled in width.
    Shift,
    /// Unique minimum, bracket its neighbouring cells.
    Refine,
    /// Located point moved by at most `alpha` on a mesh finer than `alpha`.
    Converged,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub brackets: Vec<Interval>,
    pub mesh: usize,
    pub argmin: Vec<f64>,
    pub min_value: f64,
    pub steps: Vec<Step>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TacResult {
    pub minimizer: Vec<f64>,
    pub objective_at_min: f64,
    pub final_bracket: Vec<Interval>,
    pub iterations: usize,
    pub evaluations: u64,
    pub trace: Vec<TraceRecord>,
}

/// Indices `i` in `1..m-1` where the sign of the forward difference changes.
/// Equal neighbours have sign 0, which counts as a sign of its own.
pub fn sign_change_indices(values: &[f64]) -> Vec<usize> {
    let signs: Vec<i8> = values
        .windows(2)
        .map(|w| match w[1].partial_cmp(&w[0]) {
            Some(std::cmp::Ordering::Greater) => 1,
            Some(std::cmp::Ordering::Less) => -1,
            _ => 0,
        })
        .collect();
    (1..signs.len()).filter(|&i| signs[i] != signs[i - 1]).collect()
}

/// Indices whose value is within `tie_tol (1 + |ω|)` of the minimum `ω`.
pub fn argmin_set(values: &[f64], tie_tol: f64) -> Vec<usize> {
    let omega = values.iter().copied().fold(f64::INFINITY, f64::min);
    let limit = omega + tie_tol * (1.0 + omega.abs());
    (0..values.len()).filter(|&i| values[i] <= limit).collect()
}

fn mesh_points(iv: &Interval, m: usize) -> Vec<f64> {
    let h = (iv.hi - iv.lo) / m as f64;
    (0..=m)
        .map(|i| if i == m { iv.hi } else { iv.lo + i as f64 * h })
        .collect()
}

fn checked(value: f64, point: &[f64]) -> Result<f64> {
    if value.is_nan() {
        Err(Error::Objective {
            point: point.to_vec(),
            source: Box::new(Error::InvalidConfig("objective returned NaN".into())),
        })
    } else {
        Ok(value)
    }
}

fn wrap<T>(r: Result<T>, point: &[f64]) -> Result<T> {
    r.map_err(|e| Error::Objective {
        point: point.to_vec(),
        source: Box::new(e),
    })
}

/// One-dimensional loop, literally following the flowchart's boxes.
pub fn tac_minimize_1d<F>(objective: F, cfg: &TacConfig) -> Result<TacResult>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    cfg.validate()?;
    if cfg.intervals.len() != 1 {
        return Err(Error::InvalidConfig(
            "one-dimensional search needs exactly one interval".into(),
        ));
    }
    let mut bracket = cfg.intervals[0];
    let mut m = cfg.mesh;
    let mut k_bar = 0.0;
    let mut stalls = 0;
    let mut evaluations = 0u64;
    let mut trace = Vec::new();

    for iteration in 1..=cfg.max_iterations {
        let k = mesh_points(&bracket, m);
        evaluations += k.len() as u64;
        if evaluations > cfg.max_evaluations {
            return Err(Error::BudgetExceeded(format!(
                "more than {} evaluations",
                cfg.max_evaluations
            )));
        }
        let eval = |&x: &f64| wrap(objective(x), &[x]).and_then(|v| checked(v, &[x]));
        let omega: Vec<f64> = if cfg.parallel {
            k.par_iter().map(eval).collect::<Result<_>>()?
        } else {
            k.iter().map(eval).collect::<Result<_>>()?
        };
        let j_set = argmin_set(&omega, cfg.tie_tol);
        let i_set = sign_change_indices(&omega);
        let j0 = j_set[0];
        if omega[j0].is_infinite() {
            return Err(Error::Objective {
                point: vec![k[j0]],
                source: Box::new(Error::InvalidConfig("objective is infinite on the whole mesh".into())),
            });
        }
        let mut record = TraceRecord {
            brackets: vec![bracket],
            mesh: m,
            argmin: vec![k[j0]],
            min_value: omega[j0],
            steps: vec![],
        };

        // C1
        if i_set.len() > 1 && stalls < cfg.max_stalls && 2 * m <= cfg.densify_cap {
            let i1 = i_set[0].saturating_sub(1);
            let i2 = (i_set[i_set.len() - 1] + 1).min(m);
            stalls = if 2 * (i2 - i1) > m { stalls + 1 } else { 0 };
            record.steps.push(Step::Densify);
            trace.push(record);
            bracket = Interval { lo: k[i1], hi: k[i2] };
            m *= 2;
            continue;
        }
        stalls = 0;

        // C2
        if j_set.len() > 1 {
            let i1 = j_set[0].saturating_sub(1);
            let i2 = (j_set[j_set.len() - 1] + 1).min(m);
            if i1 == 0 && i2 == m {
                let mid = j_set[j_set.len() / 2];
                record.steps.push(Step::Plateau);
                record.argmin = vec![k[mid]];
                record.min_value = omega[mid];
                trace.push(record);
                return Ok(TacResult {
                    minimizer: vec![k[mid]],
                    objective_at_min: omega[mid],
                    final_bracket: vec![bracket],
                    iterations: iteration,
                    evaluations,
                    trace,
                });
            }
            record.steps.push(Step::Span);
            trace.push(record);
            bracket = Interval { lo: k[i1], hi: k[i2] };
            continue;
        }

        if (k_bar - k[j0]).abs() > cfg.alpha || bracket.width() > cfg.alpha * m as f64 {
            record.steps.push(Step::Refine);
            trace.push(record);
            bracket = Interval {
                lo: k[j0.saturating_sub(1)],
                hi: k[(j0 + 1).min(m)],
            };
            m = cfg.mesh;
            k_bar = k[j0];
            continue;
        }

        record.steps.push(Step::Converged);
        trace.push(record);
        return Ok(TacResult {
            minimizer: vec![k[j0]],
            objective_at_min: omega[j0],
            final_bracket: vec![bracket],
            iterations: iteration,
            evaluations,
            trace,
        });
    }
    Err(Error::BudgetExceeded(format!(
        "no convergence within {} iterations",
        cfg.max_iterations
    )))
}

/// Axis decision for one iteration, before the global combination.
enum AxisBranch {
    Densify(usize, usize),
    Span(usize, usize),
    Plateau,
    Single,
}

/// Tensor-grid extension to up to four axes.
///
/// The full grid is sampled, the global argmin is located, and every axis
/// is analysed on the axis-aligned slice through it. If any axis sees
/// relative minima (C1) the mesh is doubled and only those axes narrow
/// their brackets. Otherwise each axis applies C2 or refinement on its own
/// slice. The loop stops when every axis has converged or sits on a plateau.
/// Points outside the ordering constraints keep the value `+∞` and slices
/// are restricted to the finite run around the argmin.
///
/// With two or more axes a minimum on the edge of a narrowed bracket can
/// lie outside it, because the location along one axis depends on the
/// others. Such a bracket is recentred on the minimum and doubled in width
/// instead of being shrunk.
pub fn tac_minimize_nd<F>(objective: F, cfg: &TacConfig) -> Result<TacResult>
where
    F: Fn(&[f64]) -> Result<f64> + Sync,
{
    cfg.validate()?;
    let d = cfg.intervals.len();
    let mut brackets = cfg.intervals.clone();
    let mut m = cfg.mesh;
    let mut k_bar = vec![0.0; d];
    let mut stalls = 0;
    let mut evaluations = 0u64;
    let mut trace = Vec::new();

    for iteration in 1..=cfg.max_iterations {
        let axes: Vec<Vec<f64>> = brackets.iter().map(|b| mesh_points(b, m)).collect();
        let side = m + 1;
        let total = side.pow(d as u32);
        let point_at = |flat: usize| -> Vec<f64> {
            let mut rest = flat;
            let mut p = vec![0.0; d];
            for ax in (0..d).rev() {
                p[ax] = axes[ax][rest % side];
                rest /= side;
            }
            p
        };
        let feasible = |p: &[f64]| cfg.ascending.iter().all(|&(a, b)| p[a] < p[b]);

        let count = (0..total).filter(|&f| feasible(&point_at(f))).count() as u64;
        evaluations += count;
        if evaluations > cfg.max_evaluations {
            return Err(Error::BudgetExceeded(format!(
                "more than {} evaluations",
                cfg.max_evaluations
            )));
        }
        let eval = |flat: usize| -> Result<f64> {
            let p = point_at(flat);
            if !feasible(&p) {
                return Ok(f64::INFINITY);
            }
            wrap(objective(&p), &p).and_then(|v| checked(v, &p))
        };
        let values: Vec<f64> = if cfg.parallel {
            (0..total).into_par_iter().map(eval).collect::<Result<_>>()?
        } else {
            (0..total).map(eval).collect::<Result<_>>()?
        };

        let global = argmin_set(&values, cfg.tie_tol);
        let anchor = global[0];
        if values[anchor].is_infinite() {
            return Err(Error::Objective {
                point: point_at(anchor),
                source: Box::new(Error::InvalidConfig("objective is infinite on the whole grid".into())),
            });
        }
        let mut anchor_idx = vec![0usize; d];
        {
            let mut rest = anchor;
            for ax in (0..d).rev() {
                anchor_idx[ax] = rest % side;
                rest /= side;
            }
        }
        let argmin: Vec<f64> = (0..d).map(|ax| axes[ax][anchor_idx[ax]]).collect();

        let branches: Vec<AxisBranch> = (0..d)
            .map(|ax| {
                let stride = side.pow((d - 1 - ax) as u32);
                let base = anchor - anchor_idx[ax] * stride;
                let slice: Vec<f64> = (0..side).map(|i| values[base + i * stride]).collect();
                let mut lo = anchor_idx[ax];
                while lo > 0 && slice[lo - 1].is_finite() {
                    lo -= 1;
                }
                let mut hi = anchor_idx[ax];
                while hi < m && slice[hi + 1].is_finite() {
                    hi += 1;
                }
                let run = &slice[lo..=hi];
                let i_set = sign_change_indices(run);
                let j_set = argmin_set(run, cfg.tie_tol);
                if i_set.len() > 1 && stalls < cfg.max_stalls && 2 * m <= cfg.densify_cap {
                    let i1 = (lo + i_set[0]).saturating_sub(1).max(lo);
                    let i2 = (lo + i_set[i_set.len() - 1] + 1).min(hi);
                    AxisBranch::Densify(i1, i2)
                } else if j_set.len() > 1 {
                    let i1 = (lo + j_set[0]).saturating_sub(1).max(lo);
                    let i2 = (lo + j_set[j_set.len() - 1] + 1).min(hi);
                    if i1 == 0 && i2 == m {
                        AxisBranch::Plateau
                    } else {
                        AxisBranch::Span(i1, i2)
                    }
                } else {
                    AxisBranch::Single
                }
            })
            .collect();

        let mut record = TraceRecord {
            brackets: brackets.clone(),
            mesh: m,
            argmin: argmin.clone(),
            min_value: values[anchor],
            steps: Vec::with_capacity(d),
        };

        let densify = branches.iter().any(|b| matches!(b, AxisBranch::Densify(..)));
        if densify {
            let mut stalled = true;
            for (ax, branch) in branches.iter().enumerate() {
                if let AxisBranch::Densify(i1, i2) = *branch {
                    if 2 * (i2 - i1) <= m {
                        stalled = false;
                    }
                    brackets[ax] = Interval {
                        lo: axes[ax][i1],
                        hi: axes[ax][i2],
                    };
                    record.steps.push(Step::Densify);
                } else {
                    record.steps.push(Step::Hold);
                }
            }
            stalls = if stalled { stalls + 1 } else { 0 };
            trace.push(record);
            m *= 2;
            continue;
        }
        stalls = 0;

        let at_inner_edge: Vec<bool> = (0..d)
            .map(|ax| {
                let idx = anchor_idx[ax];
                (idx == 0 && brackets[ax].lo > cfg.intervals[ax].lo)
                    || (idx == m && brackets[ax].hi < cfg.intervals[ax].hi)
            })
            .collect();
        let mut any_span = false;
        let mut done = true;
        for (ax, branch) in branches.iter().enumerate() {
            let idx = anchor_idx[ax];
            match *branch {
                AxisBranch::Span(i1, i2) => {
                    any_span = true;
                    done = false;
                    brackets[ax] = Interval {
                        lo: axes[ax][i1],
                        hi: axes[ax][i2],
                    };
                    record.steps.push(Step::Span);
                }
                AxisBranch::Plateau => record.steps.push(Step::Plateau),
                AxisBranch::Densify(..) | AxisBranch::Single if d > 1 && at_inner_edge[ax] => {
                    done = false;
                    record.steps.push(Step::Shift);
                }
                AxisBranch::Densify(..) | AxisBranch::Single => {
                    if (k_bar[ax] - axes[ax][idx]).abs() > cfg.alpha || brackets[ax].width() > cfg.alpha * m as f64 {
                        done = false;
                        record.steps.push(Step::Refine);
                    } else {
                        record.steps.push(Step::Converged);
                    }
                }
            }
        }
        if done {
            trace.push(record);
            return Ok(TacResult {
                minimizer: argmin,
                objective_at_min: values[anchor],
                final_bracket: brackets,
                iterations: iteration,
                evaluations,
                trace,
            });
        }
        for (ax, branch) in branches.iter().enumerate() {
            let idx = anchor_idx[ax];
            if record.steps[ax] == Step::Shift {
                let full = cfg.intervals[ax];
                let w = (2.0 * brackets[ax].width()).min(full.width());
                let hi = (axes[ax][idx] + 0.5 * w).min(full.hi);
                let lo = (hi - w).max(full.lo);
                brackets[ax] = Interval {
                    lo,
                    hi: (lo + w).min(full.hi),
                };
                k_bar[ax] = axes[ax][idx];
            } else if matches!(branch, AxisBranch::Densify(..) | AxisBranch::Single) {
                brackets[ax] = Interval {
                    lo: axes[ax][idx.saturating_sub(1)],
                    hi: axes[ax][(idx + 1).min(m)],
                };
                k_bar[ax] = axes[ax][idx];
            }
        }
        trace.push(record);
        if !any_span {
            m = cfg.mesh;
        }
    }
    Err(Error::BudgetExceeded(format!(
        "no convergence within {} iterations",
        cfg.max_iterations
    )))
}
