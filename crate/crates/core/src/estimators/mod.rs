//! Monte Carlo estimators with deterministic seeding.
//!
//! Sample `i` of an experiment is drawn from the streams
//! `seed.stream(i, role)`, so every sample can be regenerated alone and the
//! result does not depend on how samples are spread over workers. Per-sample
//! results are collected in sample order and reduced sequentially.

mod fit;
mod probability;
mod russo;

pub use fit::{fit_exponent, ExponentFit, FitPoint};
pub use probability::{
    crossing_rect, default_corr_grid, estimate_arm, estimate_arms, estimate_correlation_length, estimate_crossing, estimate_crossings,
    estimate_f_j, estimate_nested, estimate_nested_many, estimate_theta_proxy, quasi_mult_table, CorrelationLength, NestedEstimate,
    QuasiRecord,
};
pub use russo::{
    estimate_pivotal_squares, estimate_revealment, russo_check, scaling_relation_report, PivotalSquareCounts, Revealment, RussoReport,
    ScalingRow,
};

use std::time::Instant;

use rayon::prelude::*;

use crate::geometry::tessellation::{build_index, TessellationIndex};
use crate::randomness::{Role, SeedSpec};
use crate::sampling::{sample_coloring, sample_environment, Configuration, Window};
use crate::{Error, Result};

/// Seed and parallelism of an estimator run. Results do not depend on
/// `workers`.
#[derive(Debug, Clone)]
pub struct RunOptions {
    pub seed: SeedSpec,
    pub workers: usize,
}

impl RunOptions {
    pub fn new(seed: SeedSpec, workers: usize) -> Self {
        Self { seed, workers: workers.max(1) }
    }

    /// Same workers, experiment tag extended by `suffix`.
    pub fn sub(&self, suffix: &str) -> Self {
        Self { seed: self.seed.with_tag(format!("{}/{}", self.seed.tag, suffix)), workers: self.workers }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
    pub n: u64,
    pub seed: SeedSpec,
    pub wall_seconds: f64,
}

impl Estimate {
    /// Mean of `hits` indicators out of `n`, with stderr `√(v(1−v)/n)`.
    pub fn from_counts(hits: u64, n: u64, seed: &SeedSpec, wall_seconds: f64) -> Self {
        let v = if n == 0 { 0.0 } else { hits as f64 / n as f64 };
        let stderr = if n == 0 { 0.0 } else { (v * (1.0 - v) / n as f64).sqrt() };
        Self { value: v, stderr, n, seed: seed.clone(), wall_seconds }
    }

    /// Sample mean with stderr `s/√n`.
    pub fn from_values(xs: &[f64], seed: &SeedSpec, wall_seconds: f64) -> Self {
        let n = xs.len();
        let mean = if n == 0 { 0.0 } else { xs.iter().sum::<f64>() / n as f64 };
        let stderr = if n < 2 { 0.0 } else { (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64 / n as f64).sqrt() };
        Self { value: mean, stderr, n: n as u64, seed: seed.clone(), wall_seconds }
    }

    pub fn lower(&self, k: f64) -> f64 {
        self.value - k * self.stderr
    }

    pub fn upper(&self, k: f64) -> f64 {
        self.value + k * self.stderr
    }

    pub fn relative_stderr(&self) -> f64 {
        self.stderr / self.value
    }
}

/// `f(i)` for `i in 0..n`, in index order, on `workers` threads.
pub fn par_samples<T, F>(n: u64, workers: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync + Send,
{
    if workers <= 1 {
        return (0..n).map(f).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new().num_threads(workers).build().map_err(|e| Error::Estimator(format!("thread pool: {e}")))?;
    pool.install(|| (0..n).into_par_iter().map(&f).collect())
}

/// Environment, tessellation and colouring of sample `i`.
pub fn sample_at(window: &Window, seed: &SeedSpec, i: u64, p: f64) -> Result<(Configuration, TessellationIndex)> {
    let env = std::sync::Arc::new(sample_environment(window, &mut seed.stream(i, Role::Environment)));
    let index = build_index(&env)?;
    let config = sample_coloring(env, p, &mut seed.stream(i, Role::Color))?;
    Ok((config, index))
}

pub(crate) fn check_n(n: u64) -> Result<()> {
    if n == 0 {
        return Err(Error::Estimator("sample count must be positive".into()));
    }
    Ok(())
}

pub(crate) fn check_p(p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(crate::SamplingError::InvalidProbability(p).into());
    }
    Ok(())
}

pub(crate) struct Timer(Instant);

impl Timer {
    pub fn start() -> Self {
        Self(Instant::now())
    }

    pub fn secs(&self) -> f64 {
        self.0.elapsed().as_secs_f64()
    }
}
