//! Crossing and arm probabilities, nested quenched moments, correlation
//! length, θ proxy and quasi-multiplicativity ratios.

use crate::arms::{arm_event_in, hat_arm_event, ArmSpec};
use crate::connectivity::{crossing_in, QuadSpec};
use crate::geometry::complex::ClippedComplex;
use crate::geometry::point::Rect;
use crate::geometry::region::Sector;
use crate::geometry::tessellation::build_index;
use crate::pivotal::EventSpec;
use crate::randomness::Role;
use crate::sampling::{sample_coloring, sample_environment, Color, Window};
use crate::{Error, Point, Result};

use super::{check_n, check_p, par_samples, sample_at, Estimate, RunOptions, Timer};

fn union_box(boxes: impl Iterator<Item = Rect<f64>>) -> Rect<f64> {
    boxes.fold(Rect::empty(), |acc, b| acc.union(&b))
}

/// Crossing probabilities of several quads, estimated on shared samples
/// (one padded window around all of them).
pub fn estimate_crossings(p: f64, quads: &[QuadSpec], n: u64, opts: &RunOptions) -> Result<Vec<Estimate>> {
    check_n(n)?;
    check_p(p)?;
    if quads.is_empty() {
        return Ok(Vec::new());
    }
    let timer = Timer::start();
    let window = Window::padded(union_box(quads.iter().map(|q| *q.region.bbox())))?;
    let hits = par_samples(n, opts.workers, |i| {
        let (config, index) = sample_at(&window, &opts.seed, i, p)?;
        quads
            .iter()
            .map(|q| {
                let cx = ClippedComplex::build(&index, &q.region)?;
                Ok(crossing_in(&cx, config.colors(), q.side_a, q.side_b, q.color).holds)
            })
            .collect::<Result<Vec<bool>>>()
    })?;
    let wall = timer.secs();
    Ok((0..quads.len()).map(|k| Estimate::from_counts(hits.iter().filter(|h| h[k]).count() as u64, n, &opts.seed, wall)).collect())
}

pub fn estimate_crossing(p: f64, quad: &QuadSpec, n: u64, opts: &RunOptions) -> Result<Estimate> {
    Ok(estimate_crossings(p, std::slice::from_ref(quad), n, opts)?.remove(0))
}

fn same_annulus(a: &ArmSpec, b: &ArmSpec) -> bool {
    a.r == b.r && a.big_r == b.big_r && a.center == b.center && a.sector == b.sector
}

/// Arm probabilities of several specs on shared samples. Specs that differ
/// only in `j` share one clipped complex per sample.
pub fn estimate_arms(p: f64, specs: &[ArmSpec], n: u64, opts: &RunOptions) -> Result<Vec<Estimate>> {
    check_n(n)?;
    check_p(p)?;
    let timer = Timer::start();
    let live: Vec<usize> = (0..specs.len()).filter(|&k| !specs[k].is_degenerate()).collect();
    if live.is_empty() {
        return Ok(specs.iter().map(|_| Estimate::from_counts(n, n, &opts.seed, 0.0)).collect());
    }
    // group[k] = first live spec with the same annulus.
    let group: Vec<usize> = live.iter().map(|&k| *live.iter().find(|&&g| same_annulus(&specs[g], &specs[k])).unwrap()).collect();
    let regions = live.iter().map(|&k| specs[k].region()).collect::<std::result::Result<Vec<_>, _>>()?;
    let window = Window::padded(union_box(regions.iter().map(|r| *r.bbox())))?;
    let hits = par_samples(n, opts.workers, |i| {
        let (config, index) = sample_at(&window, &opts.seed, i, p)?;
        let mut complexes: Vec<Option<ClippedComplex>> = (0..live.len()).map(|_| None).collect();
        let mut out = Vec::with_capacity(live.len());
        for (li, &k) in live.iter().enumerate() {
            let g = live.iter().position(|&x| x == group[li]).unwrap();
            if complexes[g].is_none() {
                complexes[g] = Some(ClippedComplex::build(&index, &regions[g])?);
            }
            out.push(arm_event_in(complexes[g].as_ref().unwrap(), &regions[g], config.colors(), specs[k].j));
        }
        Ok(out)
    })?;
    let wall = timer.secs();
    Ok((0..specs.len())
        .map(|k| match live.iter().position(|&x| x == k) {
            Some(li) => Estimate::from_counts(hits.iter().filter(|h| h[li]).count() as u64, n, &opts.seed, wall),
            None => Estimate::from_counts(n, n, &opts.seed, wall),
        })
        .collect())
}

pub fn estimate_arm(p: f64, spec: &ArmSpec, n: u64, opts: &RunOptions) -> Result<Estimate> {
    Ok(estimate_arms(p, std::slice::from_ref(spec), n, opts)?.remove(0))
}

/// Mean of the completed arm event. A Monte Carlo completion can miss
/// completions that exist, so the estimate is biased downwards.
pub fn estimate_f_j(p: f64, spec: &ArmSpec, n: u64, inner_trials: u32, opts: &RunOptions) -> Result<Estimate> {
    check_n(n)?;
    check_p(p)?;
    let timer = Timer::start();
    let window = Window::padded(spec.outer_box())?;
    let hits = par_samples(n, opts.workers, |i| {
        let (config, index) = sample_at(&window, &opts.seed, i, p)?;
        hat_arm_event(&config, &index, spec, inner_trials, &mut opts.seed.stream(i, Role::Auxiliary(0)))
    })?;
    Ok(Estimate::from_counts(hits.iter().filter(|&&h| h).count() as u64, n, &opts.seed, timer.secs()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct NestedEstimate {
    /// Estimate of `E[P^η(A)]`.
    pub mean: f64,
    /// Estimate of `E[P^η(A)²]` from pairs of distinct colourings.
    pub second_moment: f64,
    /// `second_moment − mean²`.
    pub variance: f64,
    /// Jackknife standard error of `variance` over environments.
    pub variance_stderr: f64,
    pub n_env: u64,
    pub n_color: u64,
    pub wall_seconds: f64,
}

impl NestedEstimate {
    /// Combine per-environment success counts out of `n_color` colourings.
    pub fn from_counts(counts: &[u64], n_color: u64, wall_seconds: f64) -> Self {
        let ne = counts.len() as f64;
        let nc = n_color as f64;
        let m: Vec<f64> = counts.iter().map(|&k| k as f64 / nc).collect();
        // k(k−1)/(n(n−1)) is unbiased for P² given η.
        let q: Vec<f64> = counts.iter().map(|&k| (k as f64) * (k as f64 - 1.0) / (nc * (nc - 1.0))).collect();
        let (s1, s2): (f64, f64) = (m.iter().sum(), q.iter().sum());
        let mean = s1 / ne;
        let second_moment = s2 / ne;
        let variance = second_moment - mean * mean;
        let loo: Vec<f64> = (0..counts.len())
            .map(|e| {
                let a = (s1 - m[e]) / (ne - 1.0);
                (s2 - q[e]) / (ne - 1.0) - a * a
            })
            .collect();
        let lbar = loo.iter().sum::<f64>() / ne;
        let variance_stderr = ((ne - 1.0) / ne * loo.iter().map(|v| (v - lbar).powi(2)).sum::<f64>()).sqrt();
        Self { mean, second_moment, variance, variance_stderr, n_env: counts.len() as u64, n_color, wall_seconds }
    }
}

/// Quenched moments: `n_env` environments, each with `n_color` colourings
/// drawn from its own auxiliary streams.
pub fn estimate_nested(p: f64, event: &EventSpec, n_env: u64, n_color: u64, opts: &RunOptions) -> Result<NestedEstimate> {
    Ok(estimate_nested_many(p, std::slice::from_ref(event), n_env, n_color, opts)?.remove(0))
}

/// [`estimate_nested`] for several events on shared environments and
/// colourings.
pub fn estimate_nested_many(p: f64, events: &[EventSpec], n_env: u64, n_color: u64, opts: &RunOptions) -> Result<Vec<NestedEstimate>> {
    check_p(p)?;
    if n_env < 2 || n_color < 2 {
        return Err(Error::Estimator("nested estimation needs at least 2 environments and 2 colourings".into()));
    }
    let n_color_u32 = u32::try_from(n_color).map_err(|_| Error::Estimator("too many colourings".into()))?;
    let timer = Timer::start();
    let window = Window::padded(union_box(events.iter().map(|e| e.bbox())))?;
    let counts = par_samples(n_env, opts.workers, |e| {
        let env = std::sync::Arc::new(sample_environment(&window, &mut opts.seed.stream(e, Role::Environment)));
        let index = build_index(&env)?;
        let prepared = events.iter().map(|ev| ev.prepare(&index)).collect::<Result<Vec<_>>>()?;
        let mut k = vec![0u64; events.len()];
        for c in 0..n_color_u32 {
            let config = sample_coloring(env.clone(), p, &mut opts.seed.stream(e, Role::Auxiliary(c)))?;
            for (slot, prep) in k.iter_mut().zip(&prepared) {
                *slot += prep.eval(config.colors()) as u64;
            }
        }
        Ok(k)
    })?;
    let wall = timer.secs();
    Ok((0..events.len()).map(|j| NestedEstimate::from_counts(&counts.iter().map(|k| k[j]).collect::<Vec<_>>(), n_color, wall)).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationLength {
    /// `None` when the threshold is not reached on the grid.
    pub l_hat: Option<f64>,
    pub curve: Vec<(f64, Estimate)>,
}

/// Geometric grid with ratio √2 from 2 to 181.
pub fn default_corr_grid() -> Vec<f64> {
    (0..14).map(|k| (2.0 * std::f64::consts::SQRT_2.powi(k)).round()).collect()
}

/// `2R × R` rectangle with lower-left corner at the origin.
pub fn crossing_rect(big_r: f64) -> Rect<f64> {
    Rect::new(0.0, 0.0, 2.0 * big_r, big_r)
}

/// Smallest scale at which `P_p[Cross(2R, R)]` exceeds `1 − ε₀` with its
/// lower 2σ bound, log-linearly interpolated between the bracketing grid
/// points. Estimation stops at the first grid point over the threshold.
pub fn estimate_correlation_length(p: f64, epsilon0: f64, grid: &[f64], n: u64, opts: &RunOptions) -> Result<CorrelationLength> {
    if grid.is_empty() {
        return Err(Error::Estimator("empty scale grid".into()));
    }
    if grid.windows(2).any(|w| !(w[0] < w[1])) || grid[0] < 1.0 {
        return Err(Error::Estimator("scale grid must be increasing and start at 1 or above".into()));
    }
    if !(epsilon0 > 0.0 && epsilon0 < 1.0) {
        return Err(Error::Estimator(format!("epsilon0 must lie in (0, 1), got {epsilon0}")));
    }
    if !(p > 0.5 && p <= 1.0) {
        return Err(Error::Estimator(format!("correlation length needs p in (1/2, 1], got {p}")));
    }
    let target = 1.0 - epsilon0;
    let mut curve: Vec<(f64, Estimate)> = Vec::new();
    for &r in grid {
        let quad = QuadSpec::left_right(&crossing_rect(r), Color::Black)?;
        let est = estimate_crossing(p, &quad, n, &opts.sub(&format!("R={r}")))?;
        let lb = est.lower(2.0);
        curve.push((r, est));
        if lb > target {
            let l_hat = if curve.len() == 1 {
                r
            } else {
                let (r0, e0) = &curve[curve.len() - 2];
                let lb0 = e0.lower(2.0);
                let t = ((target - lb0) / (lb - lb0)).clamp(0.0, 1.0);
                (r0.ln() + t * (r.ln() - r0.ln())).exp()
            };
            return Ok(CorrelationLength { l_hat: Some(l_hat), curve });
        }
    }
    Ok(CorrelationLength { l_hat: None, curve })
}

/// One-arm probabilities `P_p[A₁(1, R)]` on shared samples. As `R → ∞` they
/// decrease to the percolation probability.
pub fn estimate_theta_proxy(p: f64, radii: &[f64], n: u64, opts: &RunOptions) -> Result<Vec<(f64, Estimate)>> {
    let specs =
        radii.iter().map(|&r| ArmSpec::new(1, 1.0, r, Point::new(0.0, 0.0), Sector::Full)).collect::<std::result::Result<Vec<_>, _>>()?;
    Ok(radii.iter().copied().zip(estimate_arms(p, &specs, n, opts)?).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuasiRecord {
    pub triple: (f64, f64, f64),
    pub alpha13: Estimate,
    pub alpha12: Estimate,
    pub alpha23: Estimate,
    /// `α(r1,r3) / (α(r1,r2) α(r2,r3))`; `None` if an estimate is zero.
    pub ratio: Option<f64>,
    /// Delta-method standard error of the ratio.
    pub stderr: Option<f64>,
}

/// Quasi-multiplicativity ratios from three independent estimates per
/// triple. A degenerate pair (`r1 = r2` or `r2 = r3`) has probability one and
/// the remaining two quantities coincide, so the ratio is exactly one.
pub fn quasi_mult_table(j: u32, triples: &[(f64, f64, f64)], p: f64, n: u64, opts: &RunOptions) -> Result<Vec<QuasiRecord>> {
    let mut out = Vec::new();
    for (t, &(r1, r2, r3)) in triples.iter().enumerate() {
        if !(1.0 <= r1 && r1 <= r2 && r2 <= r3) {
            return Err(Error::Estimator(format!("triple ({r1}, {r2}, {r3}) must satisfy 1 ≤ r1 ≤ r2 ≤ r3")));
        }
        let one = Estimate::from_counts(n, n, &opts.seed, 0.0);
        let est = |a: f64, b: f64, tag: &str| -> Result<Estimate> {
            estimate_arm(p, &ArmSpec::whole(j, a, b)?, n, &opts.sub(&format!("triple{t}/{tag}")))
        };
        let (a13, a12, a23) = if r1 >= r2 {
            let e = est(r2, r3, "23")?;
            (e.clone(), one, e)
        } else if r2 >= r3 {
            let e = est(r1, r2, "12")?;
            (e.clone(), e, one)
        } else {
            (est(r1, r3, "13")?, est(r1, r2, "12")?, est(r2, r3, "23")?)
        };
        let (ratio, stderr) = if a13.value > 0.0 && a12.value > 0.0 && a23.value > 0.0 {
            let ratio = a13.value / (a12.value * a23.value);
            let exact = r1 >= r2 || r2 >= r3;
            let rel2 = if exact { 0.0 } else { [&a13, &a12, &a23].iter().map(|e| e.relative_stderr().powi(2)).sum::<f64>() };
            (Some(ratio), Some(ratio * rel2.sqrt()))
        } else {
            (None, None)
        };
        out.push(QuasiRecord { triple: (r1, r2, r3), alpha13: a13, alpha12: a12, alpha23: a23, ratio, stderr });
    }
    Ok(out)
}
