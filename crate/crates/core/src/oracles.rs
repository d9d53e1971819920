//! Slow brute-force references for the fast solvers.
//!
//! Nothing here calls into [`crate::projection`], [`crate::chebyshev`] or
//! [`crate::tac`], so the oracles can be used to check them.

use crate::model::{Interval, Observations};

/// Minimax line `a u + b` through enumeration of every index triple.
///
/// Each triple defines an alternation system whose solution is a candidate
/// line. The best feasible candidate is returned as `(a, b, r)` with `r` the
/// achieved max-norm error. Intended for `n <= 14` and pairwise distinct
/// `u`.
pub fn brute_minimax_2basis(u: &[f64], obs: &Observations) -> (f64, f64, f64) {
    let t = obs.values();
    let n = t.len();
    assert_eq!(u.len(), n, "basis length differs from series length");
    let scale = t.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let max_err = |a: f64, b: f64| {
        t.iter()
            .zip(u)
            .fold(0.0f64, |m, (&ti, &ui)| m.max((ti - a * ui - b).abs()))
    };

    let mut best_feasible: Option<(f64, f64, f64)> = None;
    let mut best_any: Option<(f64, f64, f64)> = None;
    for i in 0..n {
        for j in i + 1..n {
            for m in j + 1..n {
                for phase in [1.0, -1.0] {
                    let Some((a, b, h)) = solve_alternation([u[i], u[j], u[m]], [t[i], t[j], t[m]], phase) else {
                        continue;
                    };
                    let r = max_err(a, b);
                    if best_any.is_none_or(|(_, _, rb)| r < rb) {
                        best_any = Some((a, b, r));
                    }
                    let level = h.abs();
                    if r <= level * (1.0 + 1e-12) + 1e-14 * (1.0 + scale)
                        && best_feasible.is_none_or(|(_, _, rb)| r < rb)
                    {
                        best_feasible = Some((a, b, r));
                    }
                }
            }
        }
    }
    best_feasible.or(best_any).unwrap_or((0.0, 0.0, f64::INFINITY))
}

/// Solves `a u_p + b + s_p h = y_p` with signs `(phase, -phase, phase)` by
/// Cramer's rule.
fn solve_alternation(u: [f64; 3], y: [f64; 3], phase: f64) -> Option<(f64, f64, f64)> {
    let s = [phase, -phase, phase];
    let det3 = |c0: [f64; 3], c1: [f64; 3], c2: [f64; 3]| {
        c0[0] * (c1[1] * c2[2] - c1[2] * c2[1]) - c1[0] * (c0[1] * c2[2] - c0[2] * c2[1])
            + c2[0] * (c0[1] * c1[2] - c0[2] * c1[1])
    };
    let ones = [1.0; 3];
    let det = det3(u, ones, s);
    if det == 0.0 || !det.is_finite() {
        return None;
    }
    let a = det3(y, ones, s) / det;
    let b = det3(u, y, s) / det;
    let h = det3(u, ones, y) / det;
    Some((a, b, h))
}

/// Uniform scan with `samples` points including both endpoints. Returns the
/// first sample attaining the minimum and its value.
pub fn grid_scan(objective: impl Fn(f64) -> f64, interval: Interval, samples: usize) -> (f64, f64) {
    assert!(samples >= 2, "grid scan needs at least two samples");
    let step = interval.width() / (samples - 1) as f64;
    let mut best = (interval.lo, f64::INFINITY);
    for i in 0..samples {
        let x = if i + 1 == samples {
            interval.hi
        } else {
            interval.lo + i as f64 * step
        };
        let v = objective(x);
        if v < best.1 {
            best = (x, v);
        }
    }
    best
}

/// Grid minimisation of `‖λ1 e^{k t} + λ2 - T‖²` over a box of coefficients.
///
/// The box is scanned on a 101 × 101 grid, then repeatedly shrunk around the
/// best node until the spacing is at most `resolution` on both axes.
/// Returns `(λ1, λ2, rss)` at the best node of the finest grid, with `λ1`
/// in original time.
pub fn brute_l2_plane(
    k: f64,
    obs: &Observations,
    lambda1: Interval,
    lambda2: Interval,
    resolution: f64,
) -> (f64, f64, f64) {
    const NODES: usize = 101;
    const KEEP: f64 = 10.0;
    assert!(resolution > 0.0);
    let e: Vec<f64> = obs.times().iter().map(|&t| (k * t).exp()).collect();
    let t = obs.values();
    let rss = |l1: f64, l2: f64| {
        e.iter()
            .zip(t)
            .map(|(&ei, &ti)| (l1 * ei + l2 - ti).powi(2))
            .sum::<f64>()
    };

    let (mut box1, mut box2) = (lambda1, lambda2);
    loop {
        let h1 = box1.width() / (NODES - 1) as f64;
        let h2 = box2.width() / (NODES - 1) as f64;
        let mut best = (box1.lo, box2.lo, f64::INFINITY);
        for a in 0..NODES {
            let l1 = box1.lo + a as f64 * h1;
            for b in 0..NODES {
                let l2 = box2.lo + b as f64 * h2;
                let v = rss(l1, l2);
                if v < best.2 {
                    best = (l1, l2, v);
                }
            }
        }
        if h1 <= resolution && h2 <= resolution {
            return best;
        }
        let shrink = |bx: Interval, h: f64, centre: f64| {
            if h <= resolution {
                bx
            } else {
                Interval {
                    lo: centre - KEEP * h,
                    hi: centre + KEEP * h,
                }
            }
        };
        box1 = shrink(box1, h1, best.0);
        box2 = shrink(box2, h2, best.1);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::validate_observations;

    fn obs(values: &[f64]) -> Observations {
        let raw: Vec<(f64, f64)> = values.iter().enumerate().map(|(i, &v)| (i as f64, v)).collect();
        validate_observations(&raw).unwrap()
    }

    #[test]
    fn minimax_in_plane_is_exact() {
        let u = [1.0, 0.5, 0.25, 0.125];
        let o = obs(&[3.0, 2.0, 1.5, 1.25]);
        let (a, b, r) = brute_minimax_2basis(&u, &o);
        assert!(r <= 1e-14);
        assert!((a - 2.0).abs() < 1e-12 && (b - 1.0).abs() < 1e-12);
    }

    #[test]
    fn minimax_forced_alternation() {
        let u: Vec<f64> = (0..5).map(|i| (-(i as f64)).exp()).collect();
        let o = obs(&[0.0, 1.0, 0.0, 1.0, 0.0]);
        let (a, b, r) = brute_minimax_2basis(&u, &o);
        assert!((r - 0.5).abs() < 1e-12, "r = {r}, a = {a}, b = {b}");
    }

    #[test]
    fn scans() {
        let iv = Interval::new(-10.0, -1e-3).unwrap();
        let (x, _) = grid_scan(|k| (k + 3.0).powi(2), iv, 1_000_000);
        assert!((x + 3.0).abs() < 1e-5);
        assert_eq!(grid_scan(|k| k, iv, 100).0, -10.0);
        assert_eq!(grid_scan(|k| -k, iv, 100).0, -1e-3);
    }

    #[test]
    fn l2_plane_grid() {
        let values: Vec<f64> = (0..10).map(|i| 2.0 * (-0.7 * i as f64).exp() + 0.5).collect();
        let o = obs(&values);
        let iv = Interval::new(-5.0, 5.0).unwrap();
        let (l1, l2, rss) = brute_l2_plane(-0.7, &o, iv, iv, 1e-4);
        assert!((l1 - 2.0).abs() <= 1e-4 && (l2 - 0.5).abs() <= 1e-4);
        assert!(rss < 1e-6);

        let c = obs(&[1.5; 6]);
        let (l1, l2, _) = brute_l2_plane(-1.0, &c, iv, iv, 1e-4);
        assert!(l1.abs() <= 1e-4 && (l2 - 1.5).abs() <= 1e-4);
    }
}
