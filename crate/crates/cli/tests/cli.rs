use std::path::Path;
use std::process::{Command, Output};

use perc_lab::estimators::{fit_exponent, Estimate, FitPoint};
use perc_lab::randomness::SeedSpec;
use perc_lab_cli::output::parse_plot_data;
use perc_lab_cli::{emit_plot_data, ExperimentConfig, PlotKind, PlotPoint};

fn perc_lab(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_perc-lab")).current_dir(dir).args(args).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) {
    std::fs::write(dir.join(name), text).unwrap();
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

fn stdout_value(out: &Output, key: &str) -> String {
    let text = String::from_utf8_lossy(&out.stdout);
    text.lines()
        .find_map(|l| l.strip_prefix(&format!("{key} = ")).map(str::to_string))
        .unwrap_or_else(|| panic!("no `{key}` in stdout:\n{text}"))
}

#[test]
fn selftest_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = perc_lab(dir.path(), &["selftest", "--workers", "2"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = read(dir.path(), "selftest.csv");
    assert!(csv.lines().skip(1).all(|l| l.split(',').nth(3) == Some("1")), "{csv}");
    assert!(String::from_utf8_lossy(&out.stdout).contains("duality = pass"));
}

#[test]
fn invalid_probability_is_rejected_before_sampling() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "c.toml", "[run]\noutput = \"res\"\n\n[crossing]\np = 2\nn = 100000000\nR = 1000\n");
    let out = perc_lab(dir.path(), &["crossing", "--config", "c.toml"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 5"), "{err}");
    assert!(!dir.path().join("res.csv").exists());
}

#[test]
fn malformed_configs_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "k.toml", "[crossing]\np = 0.5\nn = 10\nR = 4\nwidth = 3\n");
    let out = perc_lab(dir.path(), &["crossing", "--config", "k.toml"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 5"));
    assert_eq!(perc_lab(dir.path(), &["percolate", "--config", "k.toml"]).status.code(), Some(1));
    assert_eq!(perc_lab(dir.path(), &["arm", "--config", "k.toml"]).status.code(), Some(1));
    assert_eq!(perc_lab(dir.path(), &["crossing"]).status.code(), Some(1));
    assert_eq!(perc_lab(dir.path(), &["crossing", "--config", "missing.toml"]).status.code(), Some(1));
}

#[test]
fn runs_are_byte_identical_across_worker_counts() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "c.toml", "[crossing]\np = 0.5\nn = 300\nR = [4, 6]\naspect = 2\n");
    write(dir.path(), "a.toml", "[arm]\nn = 200\nj = [1, 2]\nr = 1\nR = [2, 4]\n");
    for (exp, cfg) in [("crossing", "c.toml"), ("arm", "a.toml")] {
        let a = perc_lab(dir.path(), &[exp, "--config", cfg, "--workers", "1", "--seed", "9", "--out", "one/x"]);
        let b = perc_lab(dir.path(), &[exp, "--config", cfg, "--workers", "3", "--seed", "9", "--out", "two/x"]);
        assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stderr));
        assert_eq!(b.status.code(), Some(0));
        for f in ["x.csv", "x.dat"] {
            assert_eq!(read(&dir.path().join("one"), f), read(&dir.path().join("two"), f), "{exp} {f}");
        }
        let c = perc_lab(dir.path(), &[exp, "--config", cfg, "--workers", "1", "--seed", "10", "--out", "three/x"]);
        assert_eq!(c.status.code(), Some(0));
        assert_ne!(read(&dir.path().join("one"), "x.csv"), read(&dir.path().join("three"), "x.csv"));
    }
}

#[test]
fn meta_echo_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let text = "[crossing]\np = 0.4\nn = 20\nR = 3\ncolor = \"white\"\n";
    write(dir.path(), "c.toml", text);
    let out = perc_lab(dir.path(), &["crossing", "--config", "c.toml", "--seed", "0xffffffffffffffff", "--out", "m"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let mut expected = ExperimentConfig::parse(text, None).unwrap();
    expected.seed = u64::MAX;
    expected.output = Some("m".into());
    let meta = read(dir.path(), "m.meta");
    assert_eq!(ExperimentConfig::parse(&meta, None).unwrap(), expected, "{meta}");
    assert!(meta.contains("# wall_seconds = "));
    let csv = read(dir.path(), "m.csv");
    assert!(csv.starts_with("R,width,height,color,value,stderr,n,seed\n"));
    assert!(csv.lines().nth(1).unwrap().ends_with(&format!(",20,{}", u64::MAX)));
}

#[test]
fn explicit_environment_crossing() {
    let dir = tempfile::tempdir().unwrap();
    let mut pts = String::from("# 3 x 3 grid, middle row black\n");
    for i in 0..3 {
        for k in 0..3 {
            let c = if k == 1 { "B" } else { "W" };
            pts.push_str(&format!("{} {} {c}\n", 0.5 + i as f64, 0.5 + k as f64));
        }
    }
    write(dir.path(), "env.txt", &pts);
    write(dir.path(), "e.toml", "[crossing]\np = 0.5\nn = 1\nR = 3\nenv_file = \"env.txt\"\ndump_cells = true\n");
    let out = perc_lab(dir.path(), &["crossing", "--config", "e.toml", "--out", "e"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = read(dir.path(), "e.csv");
    assert_eq!(csv.lines().nth(1).unwrap().split(',').nth(4), Some("1"), "{csv}");
    assert_eq!(read(dir.path(), "e.cells").lines().count(), 9);

    write(dir.path(), "bad.txt", "0 0 B\n1 1\n");
    write(dir.path(), "b.toml", "[crossing]\np = 0.5\nn = 1\nR = 3\nenv_file = \"bad.txt\"\n");
    assert_eq!(perc_lab(dir.path(), &["crossing", "--config", "b.toml"]).status.code(), Some(1));
}

#[test]
fn single_point_gives_single_row() {
    for kind in [PlotKind::LogLog, PlotKind::Curve] {
        let s = emit_plot_data(&[PlotPoint { x: 0.25, value: 0.1, stderr: 0.01 }], kind).unwrap();
        assert_eq!(parse_plot_data(&s).unwrap().len(), 1);
    }
}

fn fit_from_rows(rows: &[(f64, f64, f64)]) -> perc_lab::estimators::ExponentFit {
    let pts: Vec<FitPoint> = rows
        .iter()
        .map(|&(x, y, rel)| {
            let v = y.exp();
            FitPoint {
                r: 1.0,
                big_r: (-x).exp(),
                estimate: Estimate { value: v, stderr: rel * v, n: 1, seed: SeedSpec::new(0, "dat"), wall_seconds: 0.0 },
            }
        })
        .collect();
    fit_exponent(&pts).unwrap()
}

#[test]
fn exact_power_law_rows_are_collinear() {
    let pts: Vec<PlotPoint> =
        [3.0f64, 6.0, 12.0, 24.0].iter().map(|&big| PlotPoint { x: 1.0 / big, value: big.powf(-1.25), stderr: 0.01 }).collect();
    let rows = parse_plot_data(&emit_plot_data(&pts, PlotKind::LogLog).unwrap()).unwrap();
    let fit = fit_from_rows(&rows);
    assert!(fit.weighted_rss() < 1e-20);
    assert!((fit.slope - 1.25).abs() < 1e-12);
}

#[test]
fn half_plane_three_arm_dat_matches_fit() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "f.toml", "[exponent-fit]\nn = 400\nj = 3\nr = 1\nR = [3, 6, 12]\nsector = \"upper-half\"\n");
    let out = perc_lab(dir.path(), &["exponent-fit", "--config", "f.toml", "--workers", "2", "--out", "fit"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let slope: f64 = stdout_value(&out, "slope").parse().unwrap();
    let rows = parse_plot_data(&read(dir.path(), "fit.dat")).unwrap();
    assert_eq!(rows.len(), 3);
    let fit = fit_from_rows(&rows);
    assert!((fit.slope - slope).abs() <= 1e-12, "{} vs {slope}", fit.slope);
}

#[test]
fn every_experiment_runs_on_a_tiny_config() {
    let dir = tempfile::tempdir().unwrap();
    let configs = [
        ("f_j", "[f_j]\nn = 10\nj = 1\nr = 1\nR = 3\ninner_trials = 4\n"),
        ("nested", "[nested]\nR = [2, 3]\nn_env = 4\nn_color = 3\n"),
        ("corr-length", "[corr-length]\np = 0.9\nn = 20\ngrid = [2, 3]\n"),
        ("theta", "[theta]\np = 0.6\nn = 10\nR = [2, 4]\n"),
        ("quasi-mult", "[quasi-mult]\nn = 10\nj = 1\ntriples = [1, 2, 4, 2, 2, 3]\n"),
        ("russo", "[russo]\nn = 10\nR = 2\ndp = 0.05\n"),
        ("revealment", "[revealment]\nn = 5\nR = 3\nrho = 1\n"),
        ("pivotal", "[pivotal]\nn = 3\nR = 2\nrho = 1\ndump_grid = true\n"),
        ("scaling-report", "[scaling-report]\np = 0.75\nn = 20\nepsilon0 = 0.3\n"),
    ];
    for (exp, text) in configs {
        let cfg = format!("{exp}.toml");
        write(dir.path(), &cfg, text);
        let out = perc_lab(dir.path(), &[exp, "--config", &cfg, "--workers", "1"]);
        assert_eq!(out.status.code(), Some(0), "{exp}: {}", String::from_utf8_lossy(&out.stderr));
        let csv = read(dir.path(), &format!("{exp}.csv"));
        assert!(csv.lines().count() >= 2, "{exp}: {csv}");
        assert!(ExperimentConfig::parse(&read(dir.path(), &format!("{exp}.meta")), None).is_ok());
    }
    assert!(read(dir.path(), "pivotal.grid.csv").starts_with("sx,sy,n_points,quenched,annealed\n"));
}
