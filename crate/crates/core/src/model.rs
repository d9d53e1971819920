//! Shared domain types: observation series, parameter intervals, model
//! selection and fit reports.

use serde::{Deserialize, Serialize};

use crate::chebyshev::TargetClass;
use crate::error::{Error, Result};
use crate::tac::TraceRecord;

/// A validated, strictly time-ordered series of samples `(t_i, T_i)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Observations {
    times: Vec<f64>,
    values: Vec<f64>,
    #[serde(skip)]
    shifted: Vec<f64>,
}

impl Observations {
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// First sample time, the origin of [`Observations::shifted_times`].
    pub fn origin(&self) -> f64 {
        self.times[0]
    }

    /// Times relative to the first sample, `t_i - t_1`. Exponential columns
    /// are evaluated on these so that their first entry is exactly one.
    pub fn shifted_times(&self) -> &[f64] {
        &self.shifted
    }

    pub fn pairs(&self) -> Vec<(f64, f64)> {
        self.times.iter().copied().zip(self.values.iter().copied()).collect()
    }

    /// Same sample times with different values (used for rescaling).
    pub(crate) fn with_values(&self, values: Vec<f64>) -> Observations {
        debug_assert_eq!(values.len(), self.values.len());
        Observations {
            times: self.times.clone(),
            values,
            shifted: self.shifted.clone(),
        }
    }
}

/// Sorts raw pairs by time and checks the series invariants.
pub fn validate_observations(raw: &[(f64, f64)]) -> Result<Observations> {
    for (index, &(t, v)) in raw.iter().enumerate() {
        if !t.is_finite() || !v.is_finite() {
            return Err(Error::NonFinite { index });
        }
    }
    if raw.len() < 3 {
        return Err(Error::TooFew { n: raw.len() });
    }
    let mut sorted = raw.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    for w in sorted.windows(2) {
        if w[0].0 == w[1].0 {
            return Err(Error::DuplicateTime { time: w[0].0 });
        }
    }
    let times: Vec<f64> = sorted.iter().map(|p| p.0).collect();
    let values = sorted.iter().map(|p| p.1).collect();
    let origin = times[0];
    let shifted = times.iter().map(|t| t - origin).collect();
    Ok(Observations { times, values, shifted })
}

/// Closed interval `[lo, hi]` with `lo < hi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !lo.is_finite() || !hi.is_finite() {
            return Err(Error::InvalidInterval {
                lo,
                hi,
                reason: "bounds must be finite",
            });
        }
        if lo >= hi {
            return Err(Error::InvalidInterval {
                lo,
                hi,
                reason: "lo must be below hi",
            });
        }
        Ok(Interval { lo, hi })
    }

    /// An interval of decay (or growth) rates, which must exclude zero.
    pub fn rates(lo: f64, hi: f64) -> Result<Self> {
        let iv = Interval::new(lo, hi)?;
        if iv.contains(0.0) {
            return Err(Error::InvalidInterval {
                lo,
                hi,
                reason: "rate interval contains 0",
            });
        }
        Ok(iv)
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn contains_interval(&self, other: &Interval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    /// `λ1 e^{kt} + λ2`
    Exp1,
    /// `λ1 e^{k1 t} + λ2 e^{k2 t} + λ3`
    Exp2,
    /// `Exp2 + β1 sin(μ1 t) + β2 cos(μ1 t) + β3 sin(μ2 t) + β4 cos(μ2 t)`
    Exp2Osc,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Exp1 => "exp1",
            ModelKind::Exp2 => "exp2",
            ModelKind::Exp2Osc => "exp2osc",
        }
    }

    pub fn rate_count(self) -> usize {
        match self {
            ModelKind::Exp1 => 1,
            ModelKind::Exp2 | ModelKind::Exp2Osc => 2,
        }
    }

    pub fn frequency_count(self) -> usize {
        match self {
            ModelKind::Exp2Osc => 2,
            _ => 0,
        }
    }

    pub fn linear_count(self) -> usize {
        match self {
            ModelKind::Exp1 => 2,
            ModelKind::Exp2 => 3,
            ModelKind::Exp2Osc => 7,
        }
    }

    /// Report names of the linear coefficients, in basis order.
    pub fn linear_names(self) -> &'static [&'static str] {
        match self {
            ModelKind::Exp1 => &["lambda1", "lambda2"],
            ModelKind::Exp2 => &["lambda1", "lambda2", "lambda3"],
            ModelKind::Exp2Osc => &["lambda1", "lambda2", "lambda3", "beta1", "beta2", "beta3", "beta4"],
        }
    }

    /// Report names of the nonlinear parameters, in search-axis order.
    pub fn nonlinear_names(self) -> &'static [&'static str] {
        match self {
            ModelKind::Exp1 => &["k"],
            ModelKind::Exp2 => &["k1", "k2"],
            ModelKind::Exp2Osc => &["k1", "k2", "mu1", "mu2"],
        }
    }
}

impl std::str::FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "exp1" => Ok(ModelKind::Exp1),
            "exp2" => Ok(ModelKind::Exp2),
            "exp2osc" => Ok(ModelKind::Exp2Osc),
            other => Err(Error::InvalidConfig(format!("unknown model '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Norm {
    L2,
    Linf,
}

impl Norm {
    pub fn name(self) -> &'static str {
        match self {
            Norm::L2 => "l2",
            Norm::Linf => "linf",
        }
    }
}

impl std::str::FromStr for Norm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "l2" => Ok(Norm::L2),
            "linf" => Ok(Norm::Linf),
            other => Err(Error::InvalidConfig(format!("unknown norm '{other}'"))),
        }
    }
}

/// Which pattern is fitted and how the search is configured.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub kind: ModelKind,
    pub norm: Norm,
    pub k_interval: Interval,
    pub mu_interval: Option<Interval>,
    /// Default mesh divisions per axis.
    pub mesh: usize,
    /// Stop tolerance on the located parameters.
    pub alpha: f64,
    /// Relative tolerance used to collect tied minima.
    pub argmin_tie_tol: f64,
    /// Evaluate mesh points concurrently. Results are identical either way.
    #[serde(default)]
    pub parallel: bool,
}

impl ModelSpec {
    /// Single exponential, L2, rates in `[-10, -1e-9]`, mesh 10, `α = 1e-9`.
    pub fn exp1() -> Self {
        ModelSpec {
            kind: ModelKind::Exp1,
            norm: Norm::L2,
            k_interval: Interval { lo: -10.0, hi: -1e-9 },
            mu_interval: None,
            mesh: 10,
            alpha: 1e-9,
            argmin_tie_tol: 1e-12,
            parallel: false,
        }
    }

    /// Biexponential, rates in `[-20, -1e-6]`, mesh 10, `α = 1e-6`.
    pub fn exp2() -> Self {
        ModelSpec {
            kind: ModelKind::Exp2,
            k_interval: Interval { lo: -20.0, hi: -1e-6 },
            alpha: 1e-6,
            ..ModelSpec::exp1()
        }
    }

    /// Biexponential plus two sinusoids, frequencies in `[1e-6, 10]`.
    pub fn exp2_osc() -> Self {
        ModelSpec {
            kind: ModelKind::Exp2Osc,
            mu_interval: Some(Interval { lo: 1e-6, hi: 10.0 }),
            ..ModelSpec::exp2()
        }
    }

    pub fn with_norm(mut self, norm: Norm) -> Self {
        self.norm = norm;
        self
    }

    pub fn with_mesh(mut self, mesh: usize) -> Self {
        self.mesh = mesh;
        self
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn with_k_interval(mut self, k_interval: Interval) -> Self {
        self.k_interval = k_interval;
        self
    }

    pub fn validate(&self) -> Result<()> {
        Interval::rates(self.k_interval.lo, self.k_interval.hi)?;
        if self.norm == Norm::Linf && self.kind != ModelKind::Exp1 {
            return Err(Error::InvalidConfig(
                "the max norm is only available for the single exponential model".into(),
            ));
        }
        match (self.kind, &self.mu_interval) {
            (ModelKind::Exp2Osc, None) => {
                return Err(Error::InvalidConfig("exp2osc requires a frequency interval".into()))
            }
            (ModelKind::Exp2Osc, Some(mu)) => {
                Interval::new(mu.lo, mu.hi)?;
                if mu.lo <= 0.0 {
                    return Err(Error::InvalidInterval {
                        lo: mu.lo,
                        hi: mu.hi,
                        reason: "frequencies must be positive",
                    });
                }
            }
            _ => {}
        }
        if self.mesh < 2 {
            return Err(Error::InvalidConfig("mesh must be at least 2".into()));
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::InvalidConfig("alpha must be positive".into()));
        }
        if !(self.argmin_tie_tol >= 0.0 && self.argmin_tie_tol.is_finite()) {
            return Err(Error::InvalidConfig("argmin tie tolerance must be nonnegative".into()));
        }
        Ok(())
    }
}

/// Parameters of a fitted pattern. Linear coefficients follow basis order
/// (`λ1, λ2[, λ3][, β1..β4]`) and are expressed in original time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamSet {
    pub rates: Vec<f64>,
    pub frequencies: Vec<f64>,
    pub linear: Vec<f64>,
}

impl ParamSet {
    pub fn exp1(k: f64, lambda1: f64, lambda2: f64) -> Self {
        ParamSet {
            rates: vec![k],
            frequencies: vec![],
            linear: vec![lambda1, lambda2],
        }
    }

    /// Checks the lengths against `kind` and the ordering invariants.
    pub fn check(&self, kind: ModelKind) -> Result<()> {
        if self.rates.len() != kind.rate_count()
            || self.frequencies.len() != kind.frequency_count()
            || self.linear.len() != kind.linear_count()
        {
            return Err(Error::InvalidConfig(format!(
                "parameter counts do not match model {}",
                kind.name()
            )));
        }
        if self.rates.contains(&0.0) {
            return Err(Error::InvalidConfig("rates must be nonzero".into()));
        }
        if self.frequencies.iter().any(|&mu| mu <= 0.0) {
            return Err(Error::InvalidConfig("frequencies must be positive".into()));
        }
        Ok(())
    }

    /// `(name, value)` pairs in report order: nonlinear first, then linear.
    pub fn named(&self, kind: ModelKind) -> Vec<(&'static str, f64)> {
        let nonlinear = self.rates.iter().chain(self.frequencies.iter()).copied();
        kind.nonlinear_names()
            .iter()
            .copied()
            .zip(nonlinear)
            .chain(kind.linear_names().iter().copied().zip(self.linear.iter().copied()))
            .collect()
    }

    /// Inverse of [`ParamSet::named`]; looks every expected key up by name.
    pub fn from_named(kind: ModelKind, lookup: impl Fn(&str) -> Option<f64>) -> Result<Self> {
        let get = |name: &str| lookup(name).ok_or_else(|| Error::InvalidConfig(format!("missing parameter '{name}'")));
        let nonlinear = kind
            .nonlinear_names()
            .iter()
            .map(|n| get(n))
            .collect::<Result<Vec<_>>>()?;
        let linear = kind.linear_names().iter().map(|n| get(n)).collect::<Result<Vec<_>>>()?;
        let (rates, frequencies) = nonlinear.split_at(kind.rate_count());
        Ok(ParamSet {
            rates: rates.to_vec(),
            frequencies: frequencies.to_vec(),
            linear,
        })
    }
}

/// Outcome of an end-to-end fit.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitReport {
    pub spec: ModelSpec,
    pub params: ParamSet,
    pub rss: f64,
    pub mse: f64,
    pub residuals: Vec<f64>,
    pub fitted: Vec<f64>,
    pub tac_iterations: usize,
    pub evaluations: u64,
    pub wall_time: f64,
    /// Value of the searched error function at the located parameters.
    pub objective: f64,
    /// Only set for max-norm fits.
    pub classification: Option<TargetClass>,
    pub minimax_radius: Option<f64>,
    pub trace: Vec<TraceRecord>,
}

impl FitReport {
    pub fn n(&self) -> usize {
        self.residuals.len()
    }
}
