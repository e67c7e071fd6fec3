//! Quenched and annealed pivotality, per-square pivotal grids and the
//! top-side exploration of a rectangle with queried-set tracking.

use std::collections::{BTreeSet, VecDeque};
use std::fmt::Write as _;

use crate::arms::{arm_event_in, ArmSpec};
use crate::connectivity::{crossing_in, QuadSpec};
use crate::geometry::complex::ClippedComplex;
use crate::geometry::point::{Point2, Rect};
use crate::geometry::region::{rect_side, Region};
use crate::geometry::tessellation::{build_index, TessellationIndex};
use crate::randomness::Stream;
use crate::sampling::{fill_region, resample_points_in, Color, Configuration, Zone};
use crate::{EventError, Result};

type P = Point2<f64>;

/// Default lattice spacing of the extremal fills.
pub const DEFAULT_FILL_SPACING: f64 = 0.25;
/// Default bound on `|η ∩ D|` for exhaustive recolouring.
pub const DEFAULT_EXHAUSTIVE_LIMIT: usize = 20;

#[derive(Debug, Clone)]
pub enum EventKind {
    Crossing(QuadSpec),
    Arm(ArmSpec),
}

/// An event together with whether it is increasing (preserved by turning
/// white points black).
#[derive(Debug, Clone)]
pub struct EventSpec {
    pub kind: EventKind,
    pub monotone: bool,
}

impl EventSpec {
    pub fn crossing(quad: QuadSpec) -> Self {
        let monotone = quad.color == Color::Black;
        Self { kind: EventKind::Crossing(quad), monotone }
    }

    pub fn arm(spec: ArmSpec) -> Self {
        Self { monotone: spec.j == 1, kind: EventKind::Arm(spec) }
    }

    /// Bounding box of the set the event depends on.
    pub fn bbox(&self) -> Rect<f64> {
        match &self.kind {
            EventKind::Crossing(q) => *q.region.bbox(),
            EventKind::Arm(a) => a.outer_box(),
        }
    }

    /// Complex of the event region for a fixed environment; colourings can
    /// then be evaluated cheaply.
    pub fn prepare(&self, index: &TessellationIndex) -> Result<PreparedEvent> {
        let (region, constant) = match &self.kind {
            EventKind::Crossing(q) => (q.region.clone(), None),
            EventKind::Arm(a) if a.is_degenerate() => {
                return Ok(PreparedEvent { kind: self.kind.clone(), region: None, cx: None, constant: Some(true) })
            }
            EventKind::Arm(a) => (a.region()?, None),
        };
        let cx = ClippedComplex::build(index, &region)?;
        Ok(PreparedEvent { kind: self.kind.clone(), region: Some(region), cx: Some(cx), constant })
    }

    pub fn evaluate(&self, config: &Configuration, index: &TessellationIndex) -> Result<bool> {
        Ok(self.prepare(index)?.eval(config.colors()))
    }
}

pub struct PreparedEvent {
    kind: EventKind,
    region: Option<Region>,
    cx: Option<ClippedComplex>,
    constant: Option<bool>,
}

impl PreparedEvent {
    pub fn eval(&self, colors: &[Color]) -> bool {
        if let Some(c) = self.constant {
            return c;
        }
        let cx = self.cx.as_ref().expect("prepared complex");
        match &self.kind {
            EventKind::Crossing(q) => crossing_in(cx, colors, q.side_a, q.side_b, q.color).holds,
            EventKind::Arm(a) => arm_event_in(cx, self.region.as_ref().expect("prepared region"), colors, a.j),
        }
    }

    pub fn complex(&self) -> Option<&ClippedComplex> {
        self.cx.as_ref()
    }
}

/// Sets of locations that pivotality can be asked about.
pub trait PointSet {
    fn contains_point(&self, p: P) -> bool;
}

impl PointSet for Zone {
    fn contains_point(&self, p: P) -> bool {
        self.contains(p)
    }
}

impl PointSet for Region {
    fn contains_point(&self, p: P) -> bool {
        self.contains(p)
    }
}

impl PointSet for Rect<f64> {
    fn contains_point(&self, p: P) -> bool {
        self.contains(p)
    }
}

/// Flipping the colour of point `x` changes the event.
pub fn quenched_pivotal_point(config: &Configuration, index: &TessellationIndex, x: u32, event: &EventSpec) -> Result<bool> {
    if x as usize >= config.len() {
        return Err(EventError::InvalidParameter(format!("point index {x} out of range")).into());
    }
    let prep = event.prepare(index)?;
    Ok(quenched_point_in(&prep, config.colors(), x))
}

pub fn quenched_point_in(prep: &PreparedEvent, colors: &[Color], x: u32) -> bool {
    // A point whose cell misses the event region cannot matter.
    if let Some(cx) = prep.complex() {
        if !cx.owners().contains(&x) {
            return false;
        }
    }
    let mut flipped = colors.to_vec();
    flipped[x as usize] = flipped[x as usize].flip();
    prep.eval(colors) != prep.eval(&flipped)
}

/// Some recolouring of `η ∩ D` changes the event.
pub fn quenched_pivotal_set<D: PointSet>(
    config: &Configuration,
    index: &TessellationIndex,
    d: &D,
    event: &EventSpec,
    exhaustive_limit: usize,
) -> Result<bool> {
    let prep = event.prepare(index)?;
    quenched_set_in(&prep, config, d, event.monotone, exhaustive_limit)
}

fn points_in<D: PointSet>(config: &Configuration, d: &D) -> Vec<u32> {
    config.points().iter().enumerate().filter(|(_, &p)| d.contains_point(p)).map(|(i, _)| i as u32).collect()
}

fn quenched_set_in<D: PointSet>(prep: &PreparedEvent, config: &Configuration, d: &D, monotone: bool, limit: usize) -> Result<bool> {
    let inside = points_in(config, d);
    if inside.is_empty() {
        return Ok(false);
    }
    let mut colors = config.colors().to_vec();
    if monotone {
        inside.iter().for_each(|&i| colors[i as usize] = Color::Black);
        let hi = prep.eval(&colors);
        inside.iter().for_each(|&i| colors[i as usize] = Color::White);
        return Ok(hi != prep.eval(&colors));
    }
    exhaustive_in(prep, &mut colors, &inside, limit)
}

/// Both event values occur among all `2^|inside|` recolourings.
fn exhaustive_in(prep: &PreparedEvent, colors: &mut [Color], inside: &[u32], limit: usize) -> Result<bool> {
    if inside.len() > limit {
        return Err(EventError::TooManyPoints { count: inside.len(), limit }.into());
    }
    let mut seen = [false; 2];
    for mask in 0u64..(1u64 << inside.len()) {
        for (b, &i) in inside.iter().enumerate() {
            colors[i as usize] = if mask >> b & 1 == 1 { Color::Black } else { Color::White };
        }
        seen[prep.eval(colors) as usize] = true;
        if seen[0] && seen[1] {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Exhaustive quenched test regardless of monotonicity.
pub fn quenched_pivotal_set_exhaustive<D: PointSet>(
    config: &Configuration,
    index: &TessellationIndex,
    d: &D,
    event: &EventSpec,
    limit: usize,
) -> Result<bool> {
    let prep = event.prepare(index)?;
    let inside = points_in(config, d);
    let mut colors = config.colors().to_vec();
    exhaustive_in(&prep, &mut colors, &inside, limit)
}

fn eval_fresh(event: &EventSpec, config: &Configuration) -> Result<bool> {
    let idx = build_index(config.env())?;
    event.evaluate(config, &idx)
}

/// The event holds when `d` is filled with black lattice points and fails
/// when it is filled with white ones. Exact for increasing events up to the
/// density of the fill.
pub fn annealed_pivotal_box(config: &Configuration, d: &Rect<f64>, event: &EventSpec, fill_spacing: f64) -> Result<bool> {
    if !event.monotone {
        return Err(EventError::NotMonotone.into());
    }
    let zone = Zone::rect(*d);
    let black = fill_region(config, &zone, Color::Black, fill_spacing)?;
    if !eval_fresh(event, &black)? {
        return Ok(false);
    }
    let white = fill_region(config, &zone, Color::White, fill_spacing)?;
    Ok(!eval_fresh(event, &white)?)
}

/// Both event values occur among `trials` redraws of the coloured points in
/// `d`. True certifies pivotality.
pub fn annealed_pivotal_box_mc(config: &Configuration, d: &Rect<f64>, event: &EventSpec, trials: u32, stream: &mut Stream) -> Result<bool> {
    if trials < 2 {
        return Err(EventError::InvalidParameter(format!("need at least 2 trials, got {trials}")).into());
    }
    let zone = Zone::rect(*d);
    let mut seen = [false; 2];
    for _ in 0..trials {
        let c = resample_points_in(config, &zone, stream)?;
        seen[eval_fresh(event, &c)? as usize] = true;
        if seen[0] && seen[1] {
            return Ok(true);
        }
    }
    Ok(false)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PivMode {
    Quenched,
    Annealed,
    Both,
}

#[derive(Debug, Clone, Copy)]
pub struct GridOptions {
    pub fill_spacing: f64,
    pub mc_trials: u32,
    pub exhaustive_limit: usize,
}

impl Default for GridOptions {
    fn default() -> Self {
        Self { fill_spacing: DEFAULT_FILL_SPACING, mc_trials: 32, exhaustive_limit: DEFAULT_EXHAUSTIVE_LIMIT }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PivSquare {
    /// Square `[2ρ·sx, 2ρ·(sx+1)] × [2ρ·sy, 2ρ·(sy+1)]`.
    pub sx: i64,
    pub sy: i64,
    pub n_points: usize,
    pub quenched: Option<bool>,
    pub annealed: Option<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PivGrid {
    pub rho: f64,
    pub squares: Vec<PivSquare>,
}

impl PivGrid {
    pub fn square_rect(&self, s: &PivSquare) -> Rect<f64> {
        let a = 2.0 * self.rho;
        Rect::new(a * s.sx as f64, a * s.sy as f64, a * (s.sx + 1) as f64, a * (s.sy + 1) as f64)
    }

    pub fn count_quenched(&self) -> usize {
        self.squares.iter().filter(|s| s.quenched == Some(true)).count()
    }

    pub fn count_annealed(&self) -> usize {
        self.squares.iter().filter(|s| s.annealed == Some(true)).count()
    }

    /// `sx,sy,n_points,quenched,annealed`; modes not computed are left empty.
    pub fn to_csv(&self) -> String {
        let b = |v: Option<bool>| v.map(|x| if x { "1" } else { "0" }).unwrap_or("");
        let mut out = String::from("sx,sy,n_points,quenched,annealed\n");
        for s in &self.squares {
            let _ = writeln!(out, "{},{},{},{},{}", s.sx, s.sy, s.n_points, b(s.quenched), b(s.annealed));
        }
        out
    }
}

/// Pivotality of every square of the grid `(2ρℤ)²` meeting the dilated
/// window. Squares farther than the padding from the event are reported
/// non-pivotal without evaluation. Annealed pivotality uses extremal fills
/// for increasing events and `mc_trials` redraws otherwise.
pub fn pivotal_grid(
    config: &Configuration,
    index: &TessellationIndex,
    event: &EventSpec,
    rho: f64,
    mode: PivMode,
    opts: &GridOptions,
    stream: &mut Stream,
) -> Result<PivGrid> {
    if !(rho >= 1.0 && rho.is_finite()) {
        return Err(EventError::InvalidParameter(format!("grid scale must be at least 1, got {rho}")).into());
    }
    let win = config.env().window();
    let dil = win.dilated();
    let a = 2.0 * rho;
    let ebox = event.bbox();
    let prep = if mode != PivMode::Annealed { Some(event.prepare(index)?) } else { None };
    let mut squares = Vec::new();
    let (x0, x1) = ((dil.x_min / a).floor() as i64, (dil.x_max / a).ceil() as i64);
    let (y0, y1) = ((dil.y_min / a).floor() as i64, (dil.y_max / a).ceil() as i64);
    for sy in y0..y1 {
        for sx in x0..x1 {
            let sq = Rect::new(a * sx as f64, a * sy as f64, a * (sx + 1) as f64, a * (sy + 1) as f64);
            let d = sq.intersection(&dil);
            if d.is_empty() || d.area() <= 0.0 {
                continue;
            }
            let n_points = config.points().iter().filter(|&&p| sq.contains(p)).count();
            let far = d.distance_to(&ebox) > win.padding;
            let quenched = match &prep {
                Some(_) if far => Some(false),
                Some(pr) => Some(quenched_set_in(pr, config, &sq, event.monotone, opts.exhaustive_limit)?),
                None => None,
            };
            let annealed = if mode == PivMode::Quenched {
                None
            } else if far {
                Some(false)
            } else if event.monotone {
                Some(annealed_pivotal_box(config, &d, event, opts.fill_spacing)?)
            } else {
                Some(annealed_pivotal_box_mc(config, &d, event, opts.mc_trials.max(2), stream)?)
            };
            squares.push(PivSquare { sx, sy, n_points, quenched, annealed });
        }
    }
    Ok(PivGrid { rho, squares })
}

/// Colour reads recorded per point.
struct TrackedColors<'a> {
    colors: &'a [Color],
    queried: BTreeSet<u32>,
}

impl TrackedColors<'_> {
    fn read(&mut self, i: u32) -> Color {
        self.queried.insert(i);
        self.colors[i as usize]
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Exploration {
    /// Black left-right crossing, i.e. no white top-bottom crossing.
    pub crossed: bool,
    /// Points whose colour was read, sorted.
    pub queried: Vec<u32>,
}

/// Explore the white cluster of the top side: start from the cells meeting
/// the top side, then repeatedly query all unqueried cells adjacent to white
/// active cells inside the rectangle, until no new white cell appears.
pub fn explore_crossing(config: &Configuration, index: &TessellationIndex, rect: &Rect<f64>) -> Result<Exploration> {
    let cx = ClippedComplex::build(index, &Region::rect(rect)?)?;
    Ok(explore_in(&cx, config.colors()))
}

pub fn explore_in(cx: &ClippedComplex, colors: &[Color]) -> Exploration {
    let n = cx.num_pieces();
    let mut tc = TrackedColors { colors, queried: BTreeSet::new() };
    let mut seen = vec![false; n];
    let mut frontier: Vec<u32> = (0..n as u32).filter(|&pc| cx.touches(pc) & (1 << rect_side::TOP) != 0).collect();
    frontier.iter().for_each(|&pc| seen[pc as usize] = true);
    let mut crossed = true;
    while !frontier.is_empty() {
        // Query the whole batch, keep the white ones active.
        let active: Vec<u32> = frontier.iter().copied().filter(|&pc| tc.read(cx.owner(pc)) == Color::White).collect();
        if active.iter().any(|&pc| cx.touches(pc) & (1 << rect_side::BOTTOM) != 0) {
            crossed = false;
        }
        let mut next = Vec::new();
        for &pc in &active {
            for &q in cx.neighbors(pc) {
                if !seen[q as usize] {
                    seen[q as usize] = true;
                    next.push(q);
                }
            }
        }
        frontier = next;
    }
    Exploration { crossed, queried: tc.queried.into_iter().collect() }
}

/// Breadth-first check used by tests: pieces reachable from the top side
/// through white pieces.
pub fn white_top_cluster(cx: &ClippedComplex, colors: &[Color]) -> Vec<u32> {
    let n = cx.num_pieces();
    let mut seen = vec![false; n];
    let mut q = VecDeque::new();
    for pc in 0..n as u32 {
        if cx.touches(pc) & (1 << rect_side::TOP) != 0 && colors[cx.owner(pc) as usize] == Color::White {
            seen[pc as usize] = true;
            q.push_back(pc);
        }
    }
    let mut out = Vec::new();
    while let Some(pc) = q.pop_front() {
        out.push(pc);
        for &x in cx.neighbors(pc) {
            if !seen[x as usize] && colors[cx.owner(x) as usize] == Color::White {
                seen[x as usize] = true;
                q.push_back(x);
            }
        }
    }
    out
}
