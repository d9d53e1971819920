//! Synthetic series for examples, tests and benchmarks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::fit::evaluate_model;
use crate::model::{validate_observations, ModelKind, Observations, ParamSet};

/// `count` points `start, start + step, ...`.
pub fn arange(start: f64, step: f64, count: usize) -> Vec<f64> {
    (0..count).map(|i| start + i as f64 * step).collect()
}

/// `count >= 2` evenly spaced points from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    assert!(count >= 2);
    let h = (hi - lo) / (count - 1) as f64;
    (0..count)
        .map(|i| if i + 1 == count { hi } else { lo + i as f64 * h })
        .collect()
}

/// Noise-free series of the given pattern.
pub fn series(kind: ModelKind, params: &ParamSet, times: &[f64]) -> Observations {
    let values = evaluate_model(params, kind, times);
    let raw: Vec<(f64, f64)> = times.iter().copied().zip(values).collect();
    validate_observations(&raw).expect("generator produced an invalid series")
}

/// Adds independent uniform noise on `[-amplitude, amplitude]`.
pub fn with_uniform_noise(obs: &Observations, amplitude: f64, seed: u64) -> Observations {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = obs
        .values()
        .iter()
        .map(|&v| v + rng.gen_range(-amplitude..=amplitude))
        .collect();
    obs.with_values(values)
}

/// `6.87654321 e^{-1.12345678 t} + 2.11223344` at `t = 1..1000`.
pub fn single_exp_series() -> Observations {
    series(ModelKind::Exp1, &single_exp_params(), &arange(1.0, 1.0, 1000))
}

pub fn single_exp_params() -> ParamSet {
    ParamSet::exp1(-1.12345678, 6.87654321, 2.11223344)
}

/// Biexponential with nano-scale amplitudes, as seen in force relaxation
/// curves.
pub fn biexp_params() -> ParamSet {
    ParamSet {
        rates: vec![-4.7832922, -0.3521602],
        frequencies: vec![],
        linear: vec![1.6849216e-10, 1.3747312e-10, 6.5258959e-10],
    }
}

/// [`biexp_params`] sampled at `t = 0, 0.005, ..., 10`.
pub fn biexp_series() -> Observations {
    series(ModelKind::Exp2, &biexp_params(), &arange(0.0, 0.005, 2001))
}

/// Biexponential decay carrying two superposed oscillations.
pub fn oscillatory_params() -> ParamSet {
    ParamSet {
        rates: vec![-17.75, -1.68],
        frequencies: vec![0.487, 2.281],
        linear: vec![1.0, 0.8, 0.5, 0.6, -0.4, 0.3, 0.5],
    }
}

/// [`oscillatory_params`] sampled at `t = 0, 0.01, ..., 10`.
pub fn oscillatory_series() -> Observations {
    series(ModelKind::Exp2Osc, &oscillatory_params(), &arange(0.0, 0.01, 1001))
}

/// Slow cooling towards a negative ambient value, sampled once per unit of
/// time on `0..=5450`.
pub fn cooling_series(noise: f64, seed: u64) -> Observations {
    let clean = series(
        ModelKind::Exp1,
        &ParamSet::exp1(-0.00273, 5.84, -1.365),
        &arange(0.0, 1.0, 5451),
    );
    with_uniform_noise(&clean, noise, seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        assert_eq!(arange(1.0, 0.5, 3), vec![1.0, 1.5, 2.0]);
        let l = linspace(0.0, 1.0, 11);
        assert_eq!(l.len(), 11);
        assert_eq!(l[10], 1.0);
    }

    #[test]
    fn single_exp_first_value() {
        let obs = single_exp_series();
        assert_eq!(obs.len(), 1000);
        assert_eq!(obs.values()[0], 6.87654321 * (-1.12345678f64).exp() + 2.11223344);
    }

    #[test]
    fn noise_is_seeded_and_bounded() {
        let obs = single_exp_series();
        let a = with_uniform_noise(&obs, 0.05, 7);
        assert_eq!(a, with_uniform_noise(&obs, 0.05, 7));
        assert_ne!(a, with_uniform_noise(&obs, 0.05, 8));
        assert!(a.values().iter().zip(obs.values()).all(|(x, y)| (x - y).abs() <= 0.05));
    }
}
