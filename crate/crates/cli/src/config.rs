//! Experiment configuration files.
//!
//! A config is a `[run]` section followed by one section named after the
//! experiment:
//!
//! ```text
//! [run]
//! seed = 42
//! output = "out/crossing"
//!
//! [crossing]
//! p = 0.5
//! n = 10000
//! R = [8, 32, 128]
//! ```
//!
//! Values are numbers, strings, booleans or flat lists. Unknown sections and
//! keys are errors.

use std::fmt;

use serde::de::{Error as _, IntoDeserializer, SeqAccess, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use perc_lab::arms::ArmSpec;
use perc_lab::geometry::region::Sector;
use perc_lab::pivotal::PivMode;
use perc_lab::randomness::DEFAULT_SEED;
use perc_lab::sampling::Color;
use perc_lab::Point;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    Crossing,
    Arm,
    FJ,
    Nested,
    CorrLength,
    Theta,
    QuasiMult,
    ExponentFit,
    Russo,
    ScalingReport,
    Revealment,
    Pivotal,
    Selftest,
}

impl Experiment {
    pub const ALL: [Experiment; 13] = [
        Experiment::Crossing,
        Experiment::Arm,
        Experiment::FJ,
        Experiment::Nested,
        Experiment::CorrLength,
        Experiment::Theta,
        Experiment::QuasiMult,
        Experiment::ExponentFit,
        Experiment::Russo,
        Experiment::ScalingReport,
        Experiment::Revealment,
        Experiment::Pivotal,
        Experiment::Selftest,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Crossing => "crossing",
            Experiment::Arm => "arm",
            Experiment::FJ => "f_j",
            Experiment::Nested => "nested",
            Experiment::CorrLength => "corr-length",
            Experiment::Theta => "theta",
            Experiment::QuasiMult => "quasi-mult",
            Experiment::ExponentFit => "exponent-fit",
            Experiment::Russo => "russo",
            Experiment::ScalingReport => "scaling-report",
            Experiment::Revealment => "revealment",
            Experiment::Pivotal => "pivotal",
            Experiment::Selftest => "selftest",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|e| e.name() == s)
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Invalid configuration, with the 1-based line it refers to when known.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub msg: String,
}

impl ConfigError {
    fn new(line: Option<usize>, msg: impl Into<String>) -> Self {
        Self { line, msg: msg.into() }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}", self.msg),
            None => f.write_str(&self.msg),
        }
    }
}

impl std::error::Error for ConfigError {}

/// A scalar or a flat list of scalars; always written back as a list.
#[derive(Debug, Clone, PartialEq)]
pub struct List<T>(pub Vec<T>);

impl<'de, T: Deserialize<'de>> Deserialize<'de> for List<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V<T>(std::marker::PhantomData<T>);

        impl<'de, T: Deserialize<'de>> Visitor<'de> for V<T> {
            type Value = List<T>;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a value or a flat list of values")
            }

            fn visit_i64<E: serde::de::Error>(self, v: i64) -> Result<Self::Value, E> {
                T::deserialize(v.into_deserializer()).map(|x| List(vec![x]))
            }

            fn visit_u64<E: serde::de::Error>(self, v: u64) -> Result<Self::Value, E> {
                T::deserialize(v.into_deserializer()).map(|x| List(vec![x]))
            }

            fn visit_f64<E: serde::de::Error>(self, v: f64) -> Result<Self::Value, E> {
                T::deserialize(v.into_deserializer()).map(|x| List(vec![x]))
            }

            fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> Result<Self::Value, A::Error> {
                let mut out = Vec::new();
                while let Some(x) = seq.next_element()? {
                    out.push(x);
                }
                Ok(List(out))
            }
        }

        d.deserialize_any(V(std::marker::PhantomData))
    }
}

impl<T: Serialize> Serialize for List<T> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.0.serialize(s)
    }
}

/// Master seed; integers above `i64::MAX` are written as strings.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Seed(pub u64);

impl<'de> Deserialize<'de> for Seed {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Int(u64),
            Text(String),
        }
        let bad = || D::Error::custom("seed must be a non-negative integer");
        match Repr::deserialize(d).map_err(|_| bad())? {
            Repr::Int(v) => Ok(Seed(v)),
            Repr::Text(s) => parse_seed(&s).map(Seed).ok_or_else(bad),
        }
    }
}

impl Serialize for Seed {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match i64::try_from(self.0) {
            Ok(v) => s.serialize_i64(v),
            Err(_) => s.serialize_str(&self.0.to_string()),
        }
    }
}

/// Decimal or `0x`-prefixed hexadecimal.
pub fn parse_seed(s: &str) -> Option<u64> {
    let s = s.trim();
    match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(&hex.replace('_', ""), 16).ok(),
        None => s.replace('_', "").parse().ok(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ColorName {
    #[default]
    Black,
    White,
}

impl From<ColorName> for Color {
    fn from(c: ColorName) -> Self {
        match c {
            ColorName::Black => Color::Black,
            ColorName::White => Color::White,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SectorName {
    #[default]
    Full,
    UpperHalf,
    Quarter,
}

impl From<SectorName> for Sector {
    fn from(s: SectorName) -> Self {
        match s {
            SectorName::Full => Sector::Full,
            SectorName::UpperHalf => Sector::UpperHalf,
            SectorName::Quarter => Sector::Quarter,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModeName {
    Quenched,
    Annealed,
    #[default]
    Both,
}

impl From<ModeName> for PivMode {
    fn from(m: ModeName) -> Self {
        match m {
            ModeName::Quenched => PivMode::Quenched,
            ModeName::Annealed => PivMode::Annealed,
            ModeName::Both => PivMode::Both,
        }
    }
}

fn one() -> f64 {
    1.0
}

fn two() -> f64 {
    2.0
}

fn half() -> f64 {
    0.5
}

/// Default threshold `ε₀` of the correlation length.
pub const DEFAULT_EPSILON0: f64 = 0.05;

fn eps0() -> f64 {
    DEFAULT_EPSILON0
}

fn default_inner_trials() -> u32 {
    200
}

fn default_selftest_n() -> u64 {
    200
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub experiment: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<Seed>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
}

/// Left-right crossings of `[0, aspect·R] × [0, R]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrossingParams {
    pub p: f64,
    pub n: u64,
    #[serde(rename = "R")]
    pub big_r: List<f64>,
    #[serde(default = "one")]
    pub aspect: f64,
    #[serde(default)]
    pub color: ColorName,
    /// Explicit environment (`x y [color]` lines) instead of sampled ones.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub env_file: Option<String>,
    /// Also write `<prefix>.cells` with the cells of the first environment.
    #[serde(default)]
    pub dump_cells: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArmParams {
    #[serde(default = "half")]
    pub p: f64,
    pub n: u64,
    pub j: List<u32>,
    pub r: f64,
    #[serde(rename = "R")]
    pub big_r: List<f64>,
    #[serde(default)]
    pub sector: SectorName,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FjParams {
    #[serde(default = "half")]
    pub p: f64,
    pub n: u64,
    pub j: u32,
    pub r: f64,
    #[serde(rename = "R")]
    pub big_r: f64,
    #[serde(default = "default_inner_trials")]
    pub inner_trials: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NestedParams {
    #[serde(default = "half")]
    pub p: f64,
    #[serde(rename = "R")]
    pub big_r: List<f64>,
    #[serde(default = "two")]
    pub aspect: f64,
    pub n_env: u64,
    pub n_color: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorrLengthParams {
    pub p: f64,
    pub n: u64,
    #[serde(default = "eps0")]
    pub epsilon0: f64,
    /// Scale grid; the √2 grid from 2 to 181 when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<List<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThetaParams {
    pub p: f64,
    pub n: u64,
    #[serde(rename = "R")]
    pub big_r: List<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuasiMultParams {
    #[serde(default = "half")]
    pub p: f64,
    pub n: u64,
    pub j: u32,
    /// Flat list `r1, r2, r3, r1, r2, r3, ...`.
    pub triples: List<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExponentFitParams {
    #[serde(default = "half")]
    pub p: f64,
    pub n: u64,
    pub j: u32,
    pub r: f64,
    #[serde(rename = "R")]
    pub big_r: List<f64>,
    #[serde(default)]
    pub sector: SectorName,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RussoParams {
    #[serde(default = "half")]
    pub p: f64,
    pub n: u64,
    #[serde(rename = "R")]
    pub big_r: List<f64>,
    pub dp: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalingReportParams {
    pub p: List<f64>,
    pub n: u64,
    #[serde(default = "eps0")]
    pub epsilon0: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RevealmentParams {
    #[serde(default = "half")]
    pub p: f64,
    pub n: u64,
    #[serde(rename = "R")]
    pub big_r: List<f64>,
    #[serde(default = "one")]
    pub rho: f64,
}

/// Pivotal squares of side `2ρ` for `Cross(2R, R)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PivotalParams {
    #[serde(default = "half")]
    pub p: f64,
    pub n: u64,
    #[serde(rename = "R")]
    pub big_r: f64,
    #[serde(default = "one")]
    pub rho: f64,
    #[serde(default)]
    pub mode: ModeName,
    /// Also write `<prefix>.grid.csv` with the square grid of the first sample.
    #[serde(default)]
    pub dump_grid: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SelftestParams {
    #[serde(default = "default_selftest_n")]
    pub n: u64,
}

impl Default for SelftestParams {
    fn default() -> Self {
        Self { n: default_selftest_n() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Params {
    Crossing(CrossingParams),
    Arm(ArmParams),
    FJ(FjParams),
    Nested(NestedParams),
    CorrLength(CorrLengthParams),
    Theta(ThetaParams),
    QuasiMult(QuasiMultParams),
    ExponentFit(ExponentFitParams),
    Russo(RussoParams),
    ScalingReport(ScalingReportParams),
    Revealment(RevealmentParams),
    Pivotal(PivotalParams),
    Selftest(SelftestParams),
}

impl Params {
    pub fn experiment(&self) -> Experiment {
        match self {
            Params::Crossing(_) => Experiment::Crossing,
            Params::Arm(_) => Experiment::Arm,
            Params::FJ(_) => Experiment::FJ,
            Params::Nested(_) => Experiment::Nested,
            Params::CorrLength(_) => Experiment::CorrLength,
            Params::Theta(_) => Experiment::Theta,
            Params::QuasiMult(_) => Experiment::QuasiMult,
            Params::ExponentFit(_) => Experiment::ExponentFit,
            Params::Russo(_) => Experiment::Russo,
            Params::ScalingReport(_) => Experiment::ScalingReport,
            Params::Revealment(_) => Experiment::Revealment,
            Params::Pivotal(_) => Experiment::Pivotal,
            Params::Selftest(_) => Experiment::Selftest,
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    #[serde(default)]
    run: RunSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    crossing: Option<CrossingParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    arm: Option<ArmParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    f_j: Option<FjParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    nested: Option<NestedParams>,
    #[serde(default, rename = "corr-length", skip_serializing_if = "Option::is_none")]
    corr_length: Option<CorrLengthParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    theta: Option<ThetaParams>,
    #[serde(default, rename = "quasi-mult", skip_serializing_if = "Option::is_none")]
    quasi_mult: Option<QuasiMultParams>,
    #[serde(default, rename = "exponent-fit", skip_serializing_if = "Option::is_none")]
    exponent_fit: Option<ExponentFitParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    russo: Option<RussoParams>,
    #[serde(default, rename = "scaling-report", skip_serializing_if = "Option::is_none")]
    scaling_report: Option<ScalingReportParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    revealment: Option<RevealmentParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pivotal: Option<PivotalParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    selftest: Option<SelftestParams>,
}

impl ConfigFile {
    fn sections(self) -> Vec<Params> {
        let mut v = Vec::new();
        v.extend(self.crossing.map(Params::Crossing));
        v.extend(self.arm.map(Params::Arm));
        v.extend(self.f_j.map(Params::FJ));
        v.extend(self.nested.map(Params::Nested));
        v.extend(self.corr_length.map(Params::CorrLength));
        v.extend(self.theta.map(Params::Theta));
        v.extend(self.quasi_mult.map(Params::QuasiMult));
        v.extend(self.exponent_fit.map(Params::ExponentFit));
        v.extend(self.russo.map(Params::Russo));
        v.extend(self.scaling_report.map(Params::ScalingReport));
        v.extend(self.revealment.map(Params::Revealment));
        v.extend(self.pivotal.map(Params::Pivotal));
        v.extend(self.selftest.map(Params::Selftest));
        v
    }

    fn from_params(run: RunSection, params: &Params) -> Self {
        let mut f = ConfigFile { run, ..Default::default() };
        match params.clone() {
            Params::Crossing(x) => f.crossing = Some(x),
            Params::Arm(x) => f.arm = Some(x),
            Params::FJ(x) => f.f_j = Some(x),
            Params::Nested(x) => f.nested = Some(x),
            Params::CorrLength(x) => f.corr_length = Some(x),
            Params::Theta(x) => f.theta = Some(x),
            Params::QuasiMult(x) => f.quasi_mult = Some(x),
            Params::ExponentFit(x) => f.exponent_fit = Some(x),
            Params::Russo(x) => f.russo = Some(x),
            Params::ScalingReport(x) => f.scaling_report = Some(x),
            Params::Revealment(x) => f.revealment = Some(x),
            Params::Pivotal(x) => f.pivotal = Some(x),
            Params::Selftest(x) => f.selftest = Some(x),
        }
        f
    }
}

/// A parsed and validated experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub seed: u64,
    /// Output prefix; `None` means the experiment name in the working
    /// directory.
    pub output: Option<String>,
    pub params: Params,
}

impl ExperimentConfig {
    pub fn experiment(&self) -> Experiment {
        self.params.experiment()
    }

    /// Built-in self-test configuration.
    pub fn selftest() -> Self {
        Self { seed: DEFAULT_SEED, output: None, params: Params::Selftest(SelftestParams::default()) }
    }

    /// Parse and validate `text`. `expected` is the experiment named on the
    /// command line; it must agree with `run.experiment` when both are given.
    pub fn parse(text: &str, expected: Option<Experiment>) -> Result<Self, ConfigError> {
        let file: ConfigFile = toml::from_str(text).map_err(|e| {
            let line = e.span().map(|s| line_of(text, s.start));
            ConfigError::new(line, e.message().trim().to_string())
        })?;
        let run = file.run.clone();
        let named = match &run.experiment {
            Some(name) => Some(
                Experiment::from_name(name)
                    .ok_or_else(|| ConfigError::new(locate(text, "run", "experiment"), format!("unknown experiment `{name}`")))?,
            ),
            None => None,
        };
        let experiment = match (expected, named) {
            (Some(a), Some(b)) if a != b => {
                return Err(ConfigError::new(locate(text, "run", "experiment"), format!("config is for `{b}` but `{a}` was requested")))
            }
            (Some(a), _) | (None, Some(a)) => Some(a),
            (None, None) => None,
        };
        let mut sections = file.sections();
        if sections.len() > 1 {
            let extra = &sections[1];
            return Err(ConfigError::new(
                section_line(text, extra.experiment().name()),
                format!("more than one experiment section (found `{}` and `{}`)", sections[0].experiment(), extra.experiment()),
            ));
        }
        let params = match (sections.pop(), experiment) {
            (Some(p), Some(e)) if p.experiment() != e => {
                return Err(ConfigError::new(
                    section_line(text, p.experiment().name()),
                    format!("section `[{}]` does not match experiment `{e}`", p.experiment()),
                ))
            }
            (Some(p), _) => p,
            (None, Some(Experiment::Selftest)) => Params::Selftest(SelftestParams::default()),
            (None, Some(e)) => return Err(ConfigError::new(None, format!("missing section `[{e}]`"))),
            (None, None) => return Err(ConfigError::new(None, "no experiment section")),
        };
        let cfg = Self { seed: run.seed.map(|s| s.0).unwrap_or(DEFAULT_SEED), output: run.output, params };
        cfg.validate().map_err(|(key, msg)| ConfigError::new(locate(text, cfg.experiment().name(), key), format!("{key}: {msg}")))?;
        Ok(cfg)
    }

    /// Config text that parses back to `self`.
    pub fn to_text(&self) -> String {
        let run =
            RunSection { experiment: Some(self.experiment().name().to_string()), seed: Some(Seed(self.seed)), output: self.output.clone() };
        toml::to_string(&ConfigFile::from_params(run, &self.params)).expect("config values are serialisable")
    }

    /// Check every parameter against the preconditions of its estimator.
    /// Errors name the offending key.
    pub fn validate(&self) -> Result<(), (&'static str, String)> {
        match &self.params {
            Params::Crossing(c) => {
                prob("p", c.p)?;
                count("n", c.n)?;
                radii("R", &c.big_r.0, 0.0)?;
                stretched("aspect", c.aspect, &c.big_r.0)?;
                if c.env_file.is_some() && c.big_r.0.len() != 1 {
                    return Err(("R", "an explicit environment needs exactly one scale".into()));
                }
            }
            Params::Arm(a) => {
                prob("p", a.p)?;
                count("n", a.n)?;
                if a.j.0.is_empty() || a.j.0.contains(&0) {
                    return Err(("j", "need at least one arm count, each ≥ 1".into()));
                }
                positive("r", a.r)?;
                radii("R", &a.big_r.0, 0.0)?;
                for &big in &a.big_r.0 {
                    arm_spec(a.j.0[0], a.r, big, a.sector)?;
                }
            }
            Params::FJ(f) => {
                prob("p", f.p)?;
                count("n", f.n)?;
                length("R", f.big_r)?;
                arm_spec(f.j, f.r, f.big_r, SectorName::Full)?;
                if f.inner_trials == 0 {
                    return Err(("inner_trials", "must be positive".into()));
                }
            }
            Params::Nested(x) => {
                prob("p", x.p)?;
                radii("R", &x.big_r.0, 0.0)?;
                stretched("aspect", x.aspect, &x.big_r.0)?;
                count("n_env", x.n_env)?;
                if x.n_color < 2 {
                    return Err(("n_color", "need at least 2 colourings per environment".into()));
                }
            }
            Params::CorrLength(c) => {
                if !(c.p > 0.5 && c.p <= 1.0) {
                    return Err(("p", format!("must lie in (1/2, 1], got {}", c.p)));
                }
                count("n", c.n)?;
                epsilon("epsilon0", c.epsilon0)?;
                if let Some(g) = &c.grid {
                    radii("grid", &g.0, 1.0)?;
                    if g.0.windows(2).any(|w| !(w[0] < w[1])) {
                        return Err(("grid", "must be strictly increasing".into()));
                    }
                }
            }
            Params::Theta(t) => {
                prob("p", t.p)?;
                count("n", t.n)?;
                radii("R", &t.big_r.0, 1.0)?;
            }
            Params::QuasiMult(q) => {
                prob("p", q.p)?;
                count("n", q.n)?;
                if q.j == 0 {
                    return Err(("j", "must be ≥ 1".into()));
                }
                radii("triples", &q.triples.0, 1.0)?;
                if q.triples.0.len() % 3 != 0 {
                    return Err(("triples", "need a non-empty flat list of r1, r2, r3 triples".into()));
                }
                for t in q.triples.0.chunks(3) {
                    if !(t.iter().all(|v| v.is_finite()) && 1.0 <= t[0] && t[0] <= t[1] && t[1] <= t[2]) {
                        return Err(("triples", format!("triple ({}, {}, {}) must satisfy 1 ≤ r1 ≤ r2 ≤ r3", t[0], t[1], t[2])));
                    }
                }
            }
            Params::ExponentFit(e) => {
                prob("p", e.p)?;
                count("n", e.n)?;
                positive("r", e.r)?;
                radii("R", &e.big_r.0, 0.0)?;
                if e.big_r.0.len() < 3 {
                    return Err(("R", "a fit needs at least 3 scales".into()));
                }
                for &big in &e.big_r.0 {
                    arm_spec(e.j, e.r, big, e.sector)?;
                }
            }
            Params::Russo(r) => {
                prob("p", r.p)?;
                count("n", r.n)?;
                radii("R", &r.big_r.0, 0.0)?;
                if !(r.dp > 0.0 && r.p - r.dp >= 0.0 && r.p + r.dp <= 1.0) {
                    return Err(("dp", format!("need dp > 0, p − dp ≥ 0 and p + dp ≤ 1, got dp = {}", r.dp)));
                }
            }
            Params::ScalingReport(s) => {
                if s.p.0.is_empty() || s.p.0.iter().any(|&p| !(p > 0.5 && p <= 0.75)) {
                    return Err(("p", "need a non-empty list of values in (1/2, 3/4]".into()));
                }
                count("n", s.n)?;
                epsilon("epsilon0", s.epsilon0)?;
            }
            Params::Revealment(r) => {
                prob("p", r.p)?;
                count("n", r.n)?;
                radii("R", &r.big_r.0, 0.0)?;
                positive("rho", r.rho)?;
            }
            Params::Pivotal(x) => {
                prob("p", x.p)?;
                count("n", x.n)?;
                length("R", x.big_r)?;
                if !(x.rho >= 1.0 && x.rho.is_finite()) {
                    return Err(("rho", format!("must be ≥ 1, got {}", x.rho)));
                }
            }
            Params::Selftest(s) => count("n", s.n)?,
        }
        Ok(())
    }
}

type Check = Result<(), (&'static str, String)>;

fn prob(key: &'static str, p: f64) -> Check {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err((key, format!("probability must lie in [0, 1], got {p}")))
    }
}

fn count(key: &'static str, n: u64) -> Check {
    if n == 0 {
        Err((key, "must be positive".into()))
    } else {
        Ok(())
    }
}

fn positive(key: &'static str, v: f64) -> Check {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err((key, format!("must be positive and finite, got {v}")))
    }
}

fn epsilon(key: &'static str, v: f64) -> Check {
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err((key, format!("must lie in (0, 1), got {v}")))
    }
}

/// Largest accepted length scale; a window of this size already holds
/// tens of millions of points.
pub const MAX_LENGTH: f64 = 4096.0;

fn length(key: &'static str, v: f64) -> Check {
    positive(key, v)?;
    if v > MAX_LENGTH {
        return Err((key, format!("lengths above {MAX_LENGTH} are not supported, got {v}")));
    }
    Ok(())
}

/// Non-empty list of lengths, each `≥ min`.
fn radii(key: &'static str, v: &[f64], min: f64) -> Check {
    if v.is_empty() {
        return Err((key, "must not be empty".into()));
    }
    for &x in v {
        length(key, x)?;
        if x < min {
            return Err((key, format!("values must be ≥ {min}, got {x}")));
        }
    }
    Ok(())
}

fn stretched(key: &'static str, aspect: f64, v: &[f64]) -> Check {
    positive(key, aspect)?;
    v.iter().try_for_each(|&x| length(key, aspect * x))
}

fn arm_spec(j: u32, r: f64, big_r: f64, sector: SectorName) -> Check {
    ArmSpec::new(j, r, big_r, Point::new(0.0, 0.0), sector.into()).map(|_| ()).map_err(|e| ("R", e.to_string()))
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

fn header(line: &str) -> Option<&str> {
    let t = line.split('#').next().unwrap_or("").trim();
    t.strip_prefix('[')?.strip_suffix(']').map(|s| s.trim().trim_matches('"'))
}

fn section_line(text: &str, section: &str) -> Option<usize> {
    text.lines().position(|l| header(l) == Some(section)).map(|i| i + 1)
}

/// Line of `key = ...` inside `[section]`.
fn locate(text: &str, section: &str, key: &str) -> Option<usize> {
    let mut current = None;
    for (i, l) in text.lines().enumerate() {
        if let Some(h) = header(l) {
            current = Some(h.to_string());
        } else if current.as_deref() == Some(section) {
            if let Some((k, _)) = l.split_once('=') {
                if k.trim().trim_matches('"') == key {
                    return Some(i + 1);
                }
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    const CROSSING: &str = "[run]\nseed = 7\n\n[crossing]\np = 0.5\nn = 100\nR = [8, 16]\n";

    #[test]
    fn parse_and_defaults() {
        let c = ExperimentConfig::parse(CROSSING, Some(Experiment::Crossing)).unwrap();
        assert_eq!(c.seed, 7);
        match &c.params {
            Params::Crossing(x) => {
                assert_eq!(x.big_r.0, vec![8.0, 16.0]);
                assert_eq!(x.aspect, 1.0);
                assert_eq!(x.color, ColorName::Black);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn errors_carry_lines() {
        let e = ExperimentConfig::parse("[crossing]\np = 2\nn = 10\nR = 8\n", None).unwrap_err();
        assert_eq!(e.line, Some(2));
        let e = ExperimentConfig::parse("[crossing]\np = 0.5\nn = 10\nR = 8\nbogus = 1\n", None).unwrap_err();
        assert_eq!(e.line, Some(5));
        assert!(e.msg.contains("bogus"), "{e}");
        let e = ExperimentConfig::parse("[crossing]\np = 0.5\nn = 10\n", None).unwrap_err();
        assert!(e.msg.contains('R'), "{e}");
        let e = ExperimentConfig::parse(CROSSING, Some(Experiment::Arm)).unwrap_err();
        assert_eq!(e.line, Some(4));
        let e = ExperimentConfig::parse("[arm]\nn = 1\nj = 2\nr = 1\nR = [4, 1e8]\n", None).unwrap_err();
        assert_eq!(e.line, Some(5));
        let e = ExperimentConfig::parse("[sampling]\nx = 1\n", None).unwrap_err();
        assert_eq!(e.line, Some(1));
    }

    #[test]
    fn text_round_trips() {
        let texts = [
            CROSSING.to_string(),
            "[run]\nseed = \"18446744073709551615\"\n[arm]\nn = 5\nj = [2, 3]\nr = 1\nR = [4, 8]\nsector = \"upper-half\"\n".into(),
            "[corr-length]\np = 0.6\nn = 10\n".into(),
            "[quasi-mult]\nn = 3\nj = 1\ntriples = [1, 2, 4, 2, 8, 32]\n".into(),
            "[run]\noutput = \"out/x\"\n[selftest]\n".into(),
        ];
        for t in &texts {
            let c = ExperimentConfig::parse(t, None).unwrap();
            let echo = c.to_text();
            assert_eq!(ExperimentConfig::parse(&echo, None).unwrap(), c, "{echo}");
        }
    }

    #[test]
    fn seeds() {
        assert_eq!(parse_seed("0x10"), Some(16));
        assert_eq!(parse_seed("1_000"), Some(1000));
        assert_eq!(parse_seed("-1"), None);
    }
}
