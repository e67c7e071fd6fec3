//! Experiment dispatch.

use std::fmt;
use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use perc_lab::arms::ArmSpec;
use perc_lab::connectivity::{crossing, QuadSpec};
use perc_lab::estimators::{
    crossing_rect, default_corr_grid, estimate_arm, estimate_arms, estimate_correlation_length, estimate_crossings, estimate_f_j,
    estimate_nested_many, estimate_pivotal_squares, estimate_revealment, estimate_theta_proxy, fit_exponent, par_samples, quasi_mult_table,
    russo_check, sample_at, scaling_relation_report, Estimate, FitPoint, RunOptions,
};
use perc_lab::geometry::tessellation::build_index;
use perc_lab::pivotal::{pivotal_grid, EventSpec, GridOptions};
use perc_lab::randomness::{Role, SeedSpec};
use perc_lab::sampling::{explicit_from_lines, parse_points, sample_coloring, Color, Configuration, Window};
use perc_lab::{Point, Rect};

use crate::config::{ExperimentConfig, Params};
use crate::output::{emit_plot_data, num, opt, write_atomic, PlotKind, PlotPoint, Table};
use crate::selftest::run_suites;

#[derive(Debug)]
pub enum RunError {
    /// Bad input found after parsing (unreadable or invalid files).
    Invalid(String),
    /// An estimator or output step failed.
    Failed(String),
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunError::Invalid(m) => write!(f, "invalid input: {m}"),
            RunError::Failed(m) => write!(f, "run failed: {m}"),
        }
    }
}

impl std::error::Error for RunError {}

impl From<perc_lab::Error> for RunError {
    fn from(e: perc_lab::Error) -> Self {
        RunError::Failed(e.to_string())
    }
}

fn invalid(e: impl fmt::Display) -> RunError {
    RunError::Invalid(e.to_string())
}

/// Everything an experiment produces, before anything is written.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub csv: String,
    pub dat: Option<String>,
    /// Additional files as `(suffix, contents)`, written to `<prefix><suffix>`.
    pub extra: Vec<(String, String)>,
    /// Machine-readable `key = value` summary lines.
    pub summary: Vec<String>,
    /// Set when a self-test suite failed.
    pub failed_checks: bool,
}

impl RunOutput {
    fn new(table: Table) -> Self {
        Self { csv: table.to_csv(), dat: None, extra: Vec::new(), summary: Vec::new(), failed_checks: false }
    }
}

fn seed_col(seed: u64) -> String {
    seed.to_string()
}

fn est_cols(e: &Estimate) -> [String; 2] {
    [num(e.value), num(e.stderr)]
}

fn curve(points: impl IntoIterator<Item = (f64, f64, f64)>) -> Result<String, RunError> {
    let pts: Vec<PlotPoint> = points.into_iter().map(|(x, value, stderr)| PlotPoint { x, value, stderr }).collect();
    emit_plot_data(&pts, PlotKind::Curve).map_err(|e| RunError::Failed(e.to_string()))
}

fn loglog(points: impl IntoIterator<Item = (f64, f64, f64)>) -> Result<String, RunError> {
    let pts: Vec<PlotPoint> = points.into_iter().map(|(x, value, stderr)| PlotPoint { x, value, stderr }).collect();
    emit_plot_data(&pts, PlotKind::LogLog).map_err(|e| RunError::Failed(e.to_string()))
}

fn origin() -> Point {
    Point::new(0.0, 0.0)
}

/// Run the experiment in memory. `progress` receives human-readable status
/// lines.
pub fn execute(cfg: &ExperimentConfig, workers: usize, progress: &mut dyn FnMut(&str)) -> Result<RunOutput, RunError> {
    let seed = SeedSpec::new(cfg.seed, cfg.experiment().name());
    let opts = RunOptions::new(seed.clone(), workers);
    let s = cfg.seed;
    match &cfg.params {
        Params::Crossing(c) => {
            let color: Color = c.color.into();
            let rects: Vec<Rect> = c.big_r.0.iter().map(|&r| Rect::new(0.0, 0.0, c.aspect * r, r)).collect();
            let quads = rects.iter().map(|r| QuadSpec::left_right(r, color)).collect::<Result<Vec<_>, _>>().map_err(invalid)?;
            let mut extra = Vec::new();
            let ests = match &c.env_file {
                Some(path) => {
                    let text = std::fs::read_to_string(path).map_err(|e| invalid(format!("{path}: {e}")))?;
                    let lines = parse_points(&text).map_err(|e| invalid(format!("{path}: {e}")))?;
                    let window = Window::padded(rects[0]).map_err(invalid)?;
                    let (env, colors) = explicit_from_lines(&lines, window).map_err(|e| invalid(format!("{path}: {e}")))?;
                    let index = build_index(&env).map_err(|e| invalid(format!("{path}: {e}")))?;
                    if c.dump_cells {
                        extra.push((".cells".to_string(), index.dump_cells()));
                    }
                    let t = Instant::now();
                    match colors {
                        Some(colors) => {
                            let config = Configuration::with_colors(env, colors, c.p).map_err(invalid)?;
                            let hit = crossing(&config, &index, &quads[0]).map_err(invalid)?.holds;
                            vec![Estimate::from_counts(hit as u64, 1, &seed, t.elapsed().as_secs_f64())]
                        }
                        None => {
                            progress(&format!("colouring explicit environment {} times", c.n));
                            let hits = par_samples(c.n, workers, |i| {
                                let config = sample_coloring(Arc::clone(&env), c.p, &mut seed.stream(i, Role::Color))?;
                                Ok(crossing(&config, &index, &quads[0])?.holds)
                            })?;
                            let k = hits.iter().filter(|&&h| h).count() as u64;
                            vec![Estimate::from_counts(k, c.n, &seed, t.elapsed().as_secs_f64())]
                        }
                    }
                }
                None => {
                    if c.dump_cells {
                        let union = rects.iter().fold(Rect::empty(), |a, r| a.union(r));
                        let (_, index) = sample_at(&Window::padded(union).map_err(invalid)?, &seed, 0, c.p)?;
                        extra.push((".cells".to_string(), index.dump_cells()));
                    }
                    progress(&format!("{} samples, {} scales", c.n, quads.len()));
                    estimate_crossings(c.p, &quads, c.n, &opts)?
                }
            };
            let mut t = Table::new(&["R", "width", "height", "color", "value", "stderr", "n", "seed"]);
            for ((&r, rect), e) in c.big_r.0.iter().zip(&rects).zip(&ests) {
                let [v, se] = est_cols(e);
                let col = if color == Color::Black { "black" } else { "white" };
                t.push(vec![num(r), num(rect.width()), num(rect.height()), col.into(), v, se, e.n.to_string(), seed_col(s)]);
            }
            let mut out = RunOutput::new(t);
            out.dat = Some(curve(c.big_r.0.iter().zip(&ests).map(|(&r, e)| (r, e.value, e.stderr)))?);
            out.extra = extra;
            Ok(out)
        }
        Params::Arm(a) => {
            let mut specs = Vec::new();
            for &big in &a.big_r.0 {
                for &j in &a.j.0 {
                    specs.push(ArmSpec::new(j, a.r, big, origin(), a.sector.into()).map_err(invalid)?);
                }
            }
            progress(&format!("{} samples, {} arm events", a.n, specs.len()));
            let ests = estimate_arms(a.p, &specs, a.n, &opts)?;
            let sector = serde_name(&a.sector);
            let mut t = Table::new(&["j", "sector", "r", "R", "value", "stderr", "n", "seed"]);
            for (sp, e) in specs.iter().zip(&ests) {
                let [v, se] = est_cols(e);
                t.push(vec![sp.j.to_string(), sector.clone(), num(sp.r), num(sp.big_r), v, se, e.n.to_string(), seed_col(s)]);
            }
            let mut blocks = Vec::new();
            for &j in &a.j.0 {
                let pts = specs.iter().zip(&ests).filter(|(sp, _)| sp.j == j).map(|(sp, e)| (sp.r / sp.big_r, e.value, e.stderr));
                blocks.push(format!("# j = {j}\n{}", loglog(pts)?));
            }
            let mut out = RunOutput::new(t);
            out.dat = Some(blocks.join("\n\n"));
            Ok(out)
        }
        Params::FJ(f) => {
            let spec = ArmSpec::whole(f.j, f.r, f.big_r).map_err(invalid)?;
            progress(&format!("f_j with {} samples of {} inner trials", f.n, f.inner_trials));
            let fj = estimate_f_j(f.p, &spec, f.n, f.inner_trials, &opts.sub("f"))?;
            progress("annealed arm probability");
            let alpha = estimate_arm(f.p, &spec, f.n, &opts.sub("alpha"))?;
            let mut t = Table::new(&["quantity", "j", "r", "R", "value", "stderr", "n", "seed"]);
            for (name, e) in [("f_j", &fj), ("alpha", &alpha)] {
                let [v, se] = est_cols(e);
                t.push(vec![name.into(), f.j.to_string(), num(f.r), num(f.big_r), v, se, e.n.to_string(), seed_col(s)]);
            }
            let mut out = RunOutput::new(t);
            out.summary.push(format!("f_j = {}", num(fj.value)));
            out.summary.push(format!("alpha = {}", num(alpha.value)));
            Ok(out)
        }
        Params::Nested(x) => {
            let events = x
                .big_r
                .0
                .iter()
                .map(|&r| QuadSpec::left_right(&Rect::new(0.0, 0.0, x.aspect * r, r), Color::Black).map(EventSpec::crossing))
                .collect::<Result<Vec<_>, _>>()
                .map_err(invalid)?;
            progress(&format!("{} environments × {} colourings", x.n_env, x.n_color));
            let ests = estimate_nested_many(x.p, &events, x.n_env, x.n_color, &opts)?;
            let mut t = Table::new(&["R", "mean", "second_moment", "variance", "variance_stderr", "n_env", "n_color", "seed"]);
            for (&r, e) in x.big_r.0.iter().zip(&ests) {
                t.push(vec![
                    num(r),
                    num(e.mean),
                    num(e.second_moment),
                    num(e.variance),
                    num(e.variance_stderr),
                    e.n_env.to_string(),
                    e.n_color.to_string(),
                    seed_col(s),
                ]);
            }
            let mut out = RunOutput::new(t);
            out.dat = Some(curve(x.big_r.0.iter().zip(&ests).map(|(&r, e)| (r, e.variance, e.variance_stderr)))?);
            Ok(out)
        }
        Params::CorrLength(c) => {
            let grid = c.grid.as_ref().map(|g| g.0.clone()).unwrap_or_else(default_corr_grid);
            progress(&format!("scanning {} scales at p = {}", grid.len(), c.p));
            let cl = estimate_correlation_length(c.p, c.epsilon0, &grid, c.n, &opts)?;
            let mut t = Table::new(&["R", "value", "stderr", "n", "seed"]);
            for (r, e) in &cl.curve {
                let [v, se] = est_cols(e);
                t.push(vec![num(*r), v, se, e.n.to_string(), seed_col(s)]);
            }
            let mut out = RunOutput::new(t);
            out.dat = Some(curve(cl.curve.iter().map(|(r, e)| (*r, e.value, e.stderr)))?);
            out.summary.push(format!("l_hat = {}", cl.l_hat.map(num).unwrap_or_else(|| "none".into())));
            Ok(out)
        }
        Params::Theta(th) => {
            progress(&format!("{} samples", th.n));
            let rows = estimate_theta_proxy(th.p, &th.big_r.0, th.n, &opts)?;
            let mut t = Table::new(&["R", "value", "stderr", "n", "seed"]);
            for (r, e) in &rows {
                let [v, se] = est_cols(e);
                t.push(vec![num(*r), v, se, e.n.to_string(), seed_col(s)]);
            }
            let mut out = RunOutput::new(t);
            out.dat = Some(curve(rows.iter().map(|(r, e)| (*r, e.value, e.stderr)))?);
            Ok(out)
        }
        Params::QuasiMult(q) => {
            let triples: Vec<(f64, f64, f64)> = q.triples.0.chunks(3).map(|t| (t[0], t[1], t[2])).collect();
            progress(&format!("{} triples", triples.len()));
            let recs = quasi_mult_table(q.j, &triples, q.p, q.n, &opts)?;
            let mut t = Table::new(&[
                "j",
                "r1",
                "r2",
                "r3",
                "alpha13",
                "stderr13",
                "alpha12",
                "stderr12",
                "alpha23",
                "stderr23",
                "ratio",
                "ratio_stderr",
                "n",
                "seed",
            ]);
            for rec in &recs {
                let (r1, r2, r3) = rec.triple;
                let mut row = vec![q.j.to_string(), num(r1), num(r2), num(r3)];
                for e in [&rec.alpha13, &rec.alpha12, &rec.alpha23] {
                    row.extend(est_cols(e));
                }
                row.extend([opt(rec.ratio), opt(rec.stderr), q.n.to_string(), seed_col(s)]);
                t.push(row);
            }
            Ok(RunOutput::new(t))
        }
        Params::ExponentFit(x) => {
            let specs = x
                .big_r
                .0
                .iter()
                .map(|&big| ArmSpec::new(x.j, x.r, big, origin(), x.sector.into()))
                .collect::<Result<Vec<_>, _>>()
                .map_err(invalid)?;
            progress(&format!("{} samples, {} scales", x.n, specs.len()));
            let ests = estimate_arms(x.p, &specs, x.n, &opts)?;
            let points: Vec<FitPoint> =
                specs.iter().zip(&ests).map(|(sp, e)| FitPoint { r: sp.r, big_r: sp.big_r, estimate: e.clone() }).collect();
            let fit = fit_exponent(&points)?;
            let mut t = Table::new(&["j", "sector", "r", "R", "value", "stderr", "used", "n", "seed"]);
            let sector = serde_name(&x.sector);
            for fp in &points {
                let used = !fit.excluded.iter().any(|&(r, big, _)| r == fp.r && big == fp.big_r);
                let [v, se] = est_cols(&fp.estimate);
                t.push(vec![
                    x.j.to_string(),
                    sector.clone(),
                    num(fp.r),
                    num(fp.big_r),
                    v,
                    se,
                    (used as u8).to_string(),
                    x.n.to_string(),
                    seed_col(s),
                ]);
            }
            let mut out = RunOutput::new(t);
            out.dat = Some(loglog(points.iter().map(|fp| (fp.r / fp.big_r, fp.estimate.value, fp.estimate.stderr)))?);
            out.summary.push(format!("slope = {}", num(fit.slope)));
            out.summary.push(format!("slope_stderr = {}", num(fit.slope_stderr)));
            out.summary.push(format!("intercept = {}", num(fit.intercept)));
            Ok(out)
        }
        Params::Russo(r) => {
            let mut t =
                Table::new(&["R", "dp", "finite_diff", "finite_diff_stderr", "pivotal_sum", "pivotal_sum_stderr", "ratio", "n", "seed"]);
            let mut pts = Vec::new();
            for &big in &r.big_r.0 {
                progress(&format!("R = {big}"));
                let rep = russo_check(r.p, big, r.dp, r.n, &opts.sub(&format!("R={big}")))?;
                let [fd, fdse] = est_cols(&rep.finite_diff);
                let [ps, psse] = est_cols(&rep.pivotal_sum);
                t.push(vec![num(big), num(r.dp), fd, fdse, ps, psse, num(rep.ratio), r.n.to_string(), seed_col(s)]);
                pts.push((big, rep.pivotal_sum.value, rep.pivotal_sum.stderr));
            }
            let mut out = RunOutput::new(t);
            out.dat = Some(curve(pts)?);
            Ok(out)
        }
        Params::ScalingReport(x) => {
            progress(&format!("{} values of p", x.p.0.len()));
            let rows = scaling_relation_report(&x.p.0, x.epsilon0, x.n, &opts)?;
            let mut t = Table::new(&[
                "p",
                "l_hat",
                "r_star",
                "theta_proxy",
                "theta_proxy_stderr",
                "alpha1",
                "alpha1_stderr",
                "alpha4",
                "alpha4_stderr",
                "alpha4_p",
                "alpha4_p_stderr",
                "product",
                "theta_ratio",
                "alpha4_ratio",
                "n",
                "seed",
            ]);
            for r in &rows {
                let mut row = vec![num(r.p), num(r.l_hat), num(r.r_star)];
                for e in [&r.theta_proxy, &r.alpha1, &r.alpha4, &r.alpha4_p] {
                    row.extend(est_cols(e));
                }
                row.extend([num(r.product), num(r.theta_ratio), num(r.alpha4_ratio), x.n.to_string(), seed_col(s)]);
                t.push(row);
            }
            Ok(RunOutput::new(t))
        }
        Params::Revealment(x) => {
            let mut t = Table::new(&["R", "rho", "max", "max_stderr", "argmax_sx", "argmax_sy", "n", "seed"]);
            let mut sq = Table::new(&["R", "sx", "sy", "value", "stderr", "n", "seed"]);
            let mut pts = Vec::new();
            for &big in &x.big_r.0 {
                progress(&format!("R = {big}"));
                let rev = estimate_revealment(x.p, &crossing_rect(big), x.n, x.rho, &opts.sub(&format!("R={big}")))?;
                let [m, mse] = est_cols(&rev.max);
                t.push(vec![
                    num(big),
                    num(x.rho),
                    m,
                    mse,
                    rev.argmax.0.to_string(),
                    rev.argmax.1.to_string(),
                    x.n.to_string(),
                    seed_col(s),
                ]);
                for (sx, sy, e) in &rev.squares {
                    let [v, se] = est_cols(e);
                    sq.push(vec![num(big), sx.to_string(), sy.to_string(), v, se, x.n.to_string(), seed_col(s)]);
                }
                pts.push((big, rev.max.value, rev.max.stderr));
            }
            let mut out = RunOutput::new(t);
            out.dat = Some(curve(pts)?);
            out.extra.push((".squares.csv".into(), sq.to_csv()));
            Ok(out)
        }
        Params::Pivotal(x) => {
            progress(&format!("{} samples", x.n));
            let counts = estimate_pivotal_squares(x.p, x.big_r, x.rho, x.n, x.mode.into(), &opts)?;
            let mut t = Table::new(&["quantity", "R", "rho", "value", "stderr", "n", "seed"]);
            for (name, e) in
                [("annealed", &counts.annealed), ("quenched", &counts.quenched), ("quenched_single_point", &counts.quenched_single_point)]
            {
                if let Some(e) = e {
                    let [v, se] = est_cols(e);
                    t.push(vec![name.into(), num(x.big_r), num(x.rho), v, se, x.n.to_string(), seed_col(s)]);
                }
            }
            let mut out = RunOutput::new(t);
            if x.dump_grid {
                let rect = crossing_rect(x.big_r);
                let event = EventSpec::crossing(QuadSpec::left_right(&rect, Color::Black).map_err(invalid)?);
                let (config, index) = sample_at(&Window::padded(rect).map_err(invalid)?, &seed, 0, x.p)?;
                let grid = pivotal_grid(
                    &config,
                    &index,
                    &event,
                    x.rho,
                    x.mode.into(),
                    &GridOptions::default(),
                    &mut seed.stream(0, Role::Auxiliary(0)),
                )?;
                out.extra.push((".grid.csv".into(), grid.to_csv()));
            }
            Ok(out)
        }
        Params::Selftest(st) => {
            let suites = run_suites(st.n, &opts, progress)?;
            let mut t = Table::new(&["suite", "samples", "failures", "passed", "seed"]);
            let mut out_summary = Vec::new();
            for r in &suites {
                t.push(vec![r.name.into(), r.samples.to_string(), r.failures.to_string(), (r.passed() as u8).to_string(), seed_col(s)]);
                out_summary.push(format!("{} = {}", r.name, if r.passed() { "pass" } else { "FAIL" }));
            }
            let mut out = RunOutput::new(t);
            out.summary = out_summary;
            out.failed_checks = suites.iter().any(|r| !r.passed());
            Ok(out)
        }
    }
}

fn serde_name<T: serde::Serialize>(v: &T) -> String {
    toml::Value::try_from(v).ok().and_then(|v| v.as_str().map(str::to_string)).unwrap_or_default()
}

/// Write `<prefix>.csv`, `<prefix>.dat`, extra files and finally
/// `<prefix>.meta`, each atomically.
pub fn write_outputs(
    prefix: &str,
    cfg: &ExperimentConfig,
    out: &RunOutput,
    workers: usize,
    wall_seconds: f64,
) -> std::io::Result<Vec<String>> {
    let mut written = Vec::new();
    let mut put = |suffix: &str, text: &str| -> std::io::Result<()> {
        let path = format!("{prefix}{suffix}");
        write_atomic(Path::new(&path), text)?;
        written.push(path);
        Ok(())
    };
    put(".csv", &out.csv)?;
    if let Some(dat) = &out.dat {
        put(".dat", dat)?;
    }
    for (suffix, text) in &out.extra {
        put(suffix, text)?;
    }
    put(".meta", &meta_text(cfg, out, workers, wall_seconds))?;
    Ok(written)
}

/// Config echo followed by run information as comments, so the file parses
/// back to the same configuration.
pub fn meta_text(cfg: &ExperimentConfig, out: &RunOutput, workers: usize, wall_seconds: f64) -> String {
    let mut s = cfg.to_text();
    s.push_str(&format!("\n# perc-lab {}\n", env!("CARGO_PKG_VERSION")));
    s.push_str(&format!("# perc-lab-core {}\n", perc_lab::VERSION));
    s.push_str(&format!("# seed = {}\n", cfg.seed));
    s.push_str(&format!("# workers = {workers}\n"));
    s.push_str(&format!("# wall_seconds = {wall_seconds:.3}\n"));
    for line in &out.summary {
        s.push_str(&format!("# {line}\n"));
    }
    s
}
