//! Russo's formula check, pivotal-square counts, revealment of the
//! exploration and the near-critical scaling table.

use crate::arms::ArmSpec;
use crate::connectivity::{crossing_in, QuadSpec};
use crate::geometry::complex::ClippedComplex;
use crate::geometry::point::Rect;
use crate::pivotal::{explore_crossing, pivotal_grid, EventSpec, GridOptions, PivMode};
use crate::randomness::Role;
use crate::sampling::{Color, Window};
use crate::{Error, Result};

use super::probability::{crossing_rect, default_corr_grid, estimate_arms, estimate_correlation_length};
use super::{check_n, check_p, par_samples, sample_at, Estimate, RunOptions, Timer};

#[derive(Debug, Clone, PartialEq)]
pub struct RussoReport {
    /// `(P̂_{p+dp} − P̂_{p−dp}) / (2 dp)` on coupled colourings.
    pub finite_diff: Estimate,
    /// Mean number of quenched-pivotal points at `p`.
    pub pivotal_sum: Estimate,
    pub ratio: f64,
}

/// Compare the symmetric difference quotient of `P_p[Cross(2R, R)]` with the
/// expected number of pivotal points. Colourings at `p ± dp` threshold the
/// same uniform marks, so the difference quotient counts samples whose
/// crossing switches on between the two levels.
pub fn russo_check(p: f64, big_r: f64, dp: f64, n: u64, opts: &RunOptions) -> Result<RussoReport> {
    check_n(n)?;
    check_p(p)?;
    if !(dp > 0.0 && p - dp >= 0.0 && p + dp <= 1.0) {
        return Err(Error::Estimator(format!("need 0 ≤ p − dp and p + dp ≤ 1 with dp > 0, got p={p}, dp={dp}")));
    }
    let timer = Timer::start();
    let rect = crossing_rect(big_r);
    let quad = QuadSpec::left_right(&rect, Color::Black)?;
    let window = Window::padded(rect)?;
    let rows = par_samples(n, opts.workers, |i| {
        let (config, index) = sample_at(&window, &opts.seed, i, p)?;
        let cx = ClippedComplex::build(&index, &quad.region)?;
        let marks = config.marks().expect("sampled colouring has marks");
        let at = |q: f64| -> Vec<Color> { marks.iter().map(|&m| Color::from_mark(m, q)).collect() };
        let cross = |c: &[Color]| crossing_in(&cx, c, quad.side_a, quad.side_b, Color::Black).holds;
        let diff = cross(&at(p + dp)) as u8 as f64 - cross(&at(p - dp)) as u8 as f64;
        let mut colors = at(p);
        let base = cross(&colors);
        let mut owners = cx.owners().to_vec();
        owners.sort_unstable();
        owners.dedup();
        let mut piv = 0u32;
        for x in owners {
            colors[x as usize] = colors[x as usize].flip();
            piv += (cross(&colors) != base) as u32;
            colors[x as usize] = colors[x as usize].flip();
        }
        Ok((diff, piv as f64))
    })?;
    let wall = timer.secs();
    let diffs: Vec<f64> = rows.iter().map(|r| r.0 / (2.0 * dp)).collect();
    let pivs: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let finite_diff = Estimate::from_values(&diffs, &opts.seed, wall);
    let pivotal_sum = Estimate::from_values(&pivs, &opts.seed, wall);
    let ratio = finite_diff.value / pivotal_sum.value;
    Ok(RussoReport { finite_diff, pivotal_sum, ratio })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PivotalSquareCounts {
    pub annealed: Option<Estimate>,
    pub quenched: Option<Estimate>,
    /// Quenched-pivotal squares holding exactly one point.
    pub quenched_single_point: Option<Estimate>,
}

/// Mean number of pivotal squares of the grid `(2ρℤ)²` for `Cross(2R, R)`.
pub fn estimate_pivotal_squares(p: f64, big_r: f64, rho: f64, n: u64, mode: PivMode, opts: &RunOptions) -> Result<PivotalSquareCounts> {
    check_n(n)?;
    check_p(p)?;
    let timer = Timer::start();
    let rect = crossing_rect(big_r);
    let event = EventSpec::crossing(QuadSpec::left_right(&rect, Color::Black)?);
    let window = Window::padded(rect)?;
    let grid_opts = GridOptions::default();
    let rows = par_samples(n, opts.workers, |i| {
        let (config, index) = sample_at(&window, &opts.seed, i, p)?;
        let g = pivotal_grid(&config, &index, &event, rho, mode, &grid_opts, &mut opts.seed.stream(i, Role::Auxiliary(0)))?;
        let single = g.squares.iter().filter(|s| s.n_points == 1 && s.quenched == Some(true)).count();
        Ok((g.count_annealed() as f64, g.count_quenched() as f64, single as f64))
    })?;
    let wall = timer.secs();
    let col = |k: usize| -> Vec<f64> { rows.iter().map(|r| [r.0, r.1, r.2][k]).collect() };
    let est = |k: usize| Estimate::from_values(&col(k), &opts.seed, wall);
    let quenched = mode != PivMode::Annealed;
    Ok(PivotalSquareCounts {
        annealed: (mode != PivMode::Quenched).then(|| est(0)),
        quenched: quenched.then(|| est(1)),
        quenched_single_point: quenched.then(|| est(2)),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Revealment {
    /// `(sx, sy, frequency)` for the squares `[ρ sx, ρ(sx+1)] × [ρ sy, ρ(sy+1)]`
    /// meeting the rectangle.
    pub squares: Vec<(i64, i64, Estimate)>,
    /// Largest frequency over squares lying in the lower half of the
    /// rectangle.
    pub max: Estimate,
    pub argmax: (i64, i64),
}

/// How often the top-side exploration reads some point of each square.
pub fn estimate_revealment(p: f64, rect: &Rect<f64>, n: u64, rho: f64, opts: &RunOptions) -> Result<Revealment> {
    check_n(n)?;
    check_p(p)?;
    if !(rho > 0.0) {
        return Err(Error::Estimator(format!("square size must be positive, got {rho}")));
    }
    let timer = Timer::start();
    let window = Window::padded(*rect)?;
    let (x0, x1) = ((rect.x_min / rho).floor() as i64, (rect.x_max / rho).ceil() as i64);
    let (y0, y1) = ((rect.y_min / rho).floor() as i64, (rect.y_max / rho).ceil() as i64);
    let nx = (x1 - x0) as usize;
    let ny = (y1 - y0) as usize;
    let hits_per_sample = par_samples(n, opts.workers, |i| {
        let (config, index) = sample_at(&window, &opts.seed, i, p)?;
        let e = explore_crossing(&config, &index, rect)?;
        let mut hit = vec![false; nx * ny];
        for &q in &e.queried {
            let x = config.points()[q as usize];
            if !rect.contains(x) {
                continue;
            }
            let sx = (((x.x / rho).floor() as i64).min(x1 - 1) - x0) as usize;
            let sy = (((x.y / rho).floor() as i64).min(y1 - 1) - y0) as usize;
            hit[sy * nx + sx] = true;
        }
        Ok(hit)
    })?;
    let wall = timer.secs();
    let mid = rect.center().y;
    let mut squares = Vec::with_capacity(nx * ny);
    let mut best: Option<(usize, u64)> = None;
    for k in 0..nx * ny {
        let count = hits_per_sample.iter().filter(|h| h[k]).count() as u64;
        let (sx, sy) = (x0 + (k % nx) as i64, y0 + (k / nx) as i64);
        squares.push((sx, sy, Estimate::from_counts(count, n, &opts.seed, wall)));
        if rho * (sy + 1) as f64 <= mid + 1e-12 && best.is_none_or(|b| count > b.1) {
            best = Some((k, count));
        }
    }
    let (k, _) = best.ok_or_else(|| Error::Estimator("rectangle has no square in its lower half".into()))?;
    Ok(Revealment { max: squares[k].2.clone(), argmax: (squares[k].0, squares[k].1), squares })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingRow {
    pub p: f64,
    pub l_hat: f64,
    /// Integer scale `round(L̂)` where the arm events are evaluated.
    pub r_star: f64,
    /// `P̂_p[A₁(1, R*)]`.
    pub theta_proxy: Estimate,
    /// `P̂_{1/2}[A₁(1, R*)]`.
    pub alpha1: Estimate,
    /// `P̂_{1/2}[A₄(1, R*)]`.
    pub alpha4: Estimate,
    /// `P̂_p[A₄(1, R*)]`.
    pub alpha4_p: Estimate,
    /// `(p − 1/2) · L̂² · α̂₄`.
    pub product: f64,
    /// `θ̂_proxy / α̂₁`.
    pub theta_ratio: f64,
    /// `α̂_{4,p} / α̂_{4,1/2}` at `R*`.
    pub alpha4_ratio: f64,
}

/// Correlation length, θ proxy and arm probabilities at `R* = round(L̂(p))`
/// for each `p`. Arm probabilities at `p` and at `1/2` are estimated on the
/// same samples.
pub fn scaling_relation_report(p_list: &[f64], epsilon0: f64, n_budget: u64, opts: &RunOptions) -> Result<Vec<ScalingRow>> {
    let mut rows = Vec::new();
    for &p in p_list {
        if !(p > 0.5 && p <= 0.75) {
            return Err(Error::Estimator(format!("scaling report needs p in (1/2, 3/4], got {p}")));
        }
        let sub = opts.sub(&format!("p={p}"));
        let cl = estimate_correlation_length(p, epsilon0, &default_corr_grid(), n_budget, &sub.sub("L"))?;
        let l_hat = cl.l_hat.ok_or_else(|| Error::Estimator(format!("correlation length at p={p} beyond the scale grid")))?;
        let r_star = l_hat.round().max(2.0);
        let specs = [ArmSpec::whole(1, 1.0, r_star)?, ArmSpec::whole(4, 1.0, r_star)?];
        let crit = estimate_arms(0.5, &specs, n_budget, &sub.sub("arms"))?;
        let near = estimate_arms(p, &specs, n_budget, &sub.sub("arms"))?;
        let (alpha1, alpha4) = (crit[0].clone(), crit[1].clone());
        let (theta_proxy, alpha4_p) = (near[0].clone(), near[1].clone());
        rows.push(ScalingRow {
            p,
            l_hat,
            r_star,
            product: (p - 0.5) * l_hat * l_hat * alpha4.value,
            theta_ratio: theta_proxy.value / alpha1.value,
            alpha4_ratio: alpha4_p.value / alpha4.value,
            theta_proxy,
            alpha1,
            alpha4,
            alpha4_p,
        });
    }
    Ok(rows)
}
