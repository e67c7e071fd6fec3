//! Quick exact checks of the core library on sampled configurations.

use perc_lab::connectivity::{check_duality, crossing, validate_witness, QuadSpec};
use perc_lab::estimators::{par_samples, sample_at, RunOptions};
use perc_lab::geometry::complex::ClippedComplex;
use perc_lab::geometry::region::Region;
use perc_lab::pivotal::explore_crossing;
use perc_lab::sampling::{sample_environment_at, Color, Window};
use perc_lab::{Rect, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteResult {
    pub name: &'static str,
    pub samples: u64,
    pub failures: u64,
}

impl SuiteResult {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

fn suite(name: &'static str, n: u64, opts: &RunOptions, check: impl Fn(u64) -> Result<bool> + Sync + Send) -> Result<SuiteResult> {
    let ok = par_samples(n, opts.workers, check)?;
    Ok(SuiteResult { name, samples: n, failures: ok.iter().filter(|&&b| !b).count() as u64 })
}

/// Duality, exploration, witness, area and regeneration checks, `n` samples
/// each.
pub fn run_suites(n: u64, opts: &RunOptions, progress: &mut dyn FnMut(&str)) -> Result<Vec<SuiteResult>> {
    let rect = Rect::new(0.0, 0.0, 16.0, 8.0);
    let window = Window::padded(rect)?;
    let quad = QuadSpec::left_right(&rect, Color::Black)?;
    let region = Region::rect(&rect)?;
    let mut out = Vec::new();

    let s = opts.sub("duality");
    out.push(suite("duality", n, &s, |i| {
        let (config, index) = sample_at(&window, &s.seed, i, 0.5)?;
        Ok(check_duality(&config, &index, &rect)?)
    })?);
    progress("duality done");

    let s = opts.sub("exploration");
    out.push(suite("exploration", n, &s, |i| {
        let (config, index) = sample_at(&window, &s.seed, i, 0.5)?;
        Ok(explore_crossing(&config, &index, &rect)?.crossed == crossing(&config, &index, &quad)?.holds)
    })?);
    progress("exploration done");

    let s = opts.sub("witness");
    out.push(suite("witness", n, &s, |i| {
        let (config, index) = sample_at(&window, &s.seed, i, 0.5)?;
        let cx = ClippedComplex::build(&index, &region)?;
        let res = crossing(&config, &index, &quad)?;
        Ok(match res.witness {
            Some(path) => res.holds && validate_witness(&cx, config.colors(), quad.side_a, quad.side_b, Color::Black, &path),
            None => !res.holds,
        })
    })?);
    progress("witness done");

    let s = opts.sub("area");
    out.push(suite("area", n, &s, |i| {
        let (_, index) = sample_at(&window, &s.seed, i, 0.5)?;
        let cx = ClippedComplex::build(&index, &region)?;
        Ok((cx.total_area() - cx.region_area()).abs() <= 1e-9 * cx.region_area())
    })?);
    progress("area done");

    let s = opts.sub("regeneration");
    out.push(suite("regeneration", n, &s, |i| {
        let a = sample_environment_at(&window, &s.seed, i);
        let b = sample_environment_at(&window, &s.seed, i);
        let (c, _) = sample_at(&window, &s.seed, i, 0.5)?;
        Ok(a.points() == b.points() && a.points() == c.points())
    })?);
    progress("regeneration done");
    Ok(out)
}
