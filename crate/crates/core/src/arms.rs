//! Arm events in square annuli.
//!
//! Arms are read off the monochromatic clusters of the clipped complex that
//! join the inner and the outer boundary. Consecutive crossing clusters in
//! the angular order have different colours, so the number of colour changes
//! counts the interfaces. For odd `j` the extra black arm only has to avoid
//! the cells of the other arms; it may run inside the same black cluster as
//! one of them, so the number of piece-disjoint black crossings is computed
//! by a unit-capacity flow.

use std::collections::VecDeque;

use crate::connectivity::cluster_labels;
use crate::geometry::complex::ClippedComplex;
use crate::geometry::point::{Point2, Rect};
use crate::geometry::region::{annulus_side, AngularOrder, Region, Sector};
use crate::geometry::tessellation::{build_index, TessellationIndex};
use crate::randomness::Stream;
use crate::sampling::{resample_points_in, Color, Configuration, Environment, Zone};
use crate::{EventError, GeometryError, Result};

type P = Point2<f64>;

const INNER: u64 = 1 << annulus_side::INNER;
const OUTER: u64 = 1 << annulus_side::OUTER;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArmSpec {
    pub j: u32,
    pub r: f64,
    pub big_r: f64,
    pub center: P,
    pub sector: Sector,
}

impl ArmSpec {
    pub fn new(j: u32, r: f64, big_r: f64, center: P, sector: Sector) -> std::result::Result<Self, EventError> {
        if j == 0 {
            return Err(EventError::InvalidParameter("arm count j must be positive".into()));
        }
        if !(r > 0.0 && r.is_finite() && big_r.is_finite()) {
            return Err(EventError::InvalidParameter(format!("radii must be positive and finite, got r={r}, R={big_r}")));
        }
        Ok(Self { j, r, big_r, center, sector })
    }

    /// Whole-plane spec centred at the origin.
    pub fn whole(j: u32, r: f64, big_r: f64) -> std::result::Result<Self, EventError> {
        Self::new(j, r, big_r, P::new(0.0, 0.0), Sector::Full)
    }

    /// The event is defined true when `r >= R`.
    pub fn is_degenerate(&self) -> bool {
        self.r >= self.big_r
    }

    pub fn region(&self) -> std::result::Result<Region, GeometryError> {
        Region::annulus(self.center, self.r, self.big_r, self.sector)
    }

    /// Bounding box of the outer square.
    pub fn outer_box(&self) -> Rect<f64> {
        Rect::centered(self.center, self.big_r, self.big_r)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArmReport {
    pub holds: bool,
    pub interface_count: u32,
    /// Crossing clusters `(label, colour)` in angular order of their inner
    /// attachment.
    pub crossing_clusters: Vec<(u32, Color)>,
    /// Colour changes along the crossing clusters: cyclic for full annuli,
    /// linear for sectors.
    pub alternation_count: u32,
}

struct Crossers {
    labels: Vec<u32>,
    /// `(label, colour, inner angle, outer angle)` of each crossing cluster.
    clusters: Vec<(u32, Color, f64, f64)>,
}

fn crossers(cx: &ClippedComplex, region: &Region, colors: &[Color]) -> Crossers {
    let labels = cluster_labels(cx, colors);
    let n = cx.num_pieces();
    let mut inner = vec![f64::INFINITY; n];
    let mut outer = vec![f64::INFINITY; n];
    for pc in 0..n as u32 {
        let l = labels[pc as usize] as usize;
        for c in cx.contacts(pc) {
            let a = region.angle_of(c.midpoint());
            if c.side == annulus_side::INNER {
                inner[l] = inner[l].min(a);
            } else if c.side == annulus_side::OUTER {
                outer[l] = outer[l].min(a);
            }
        }
    }
    let mut clusters: Vec<(u32, Color, f64, f64)> = (0..n)
        .filter(|&l| labels[l] == l as u32 && inner[l].is_finite() && outer[l].is_finite())
        .map(|l| (l as u32, colors[cx.owner(l as u32) as usize], inner[l], outer[l]))
        .collect();
    clusters.sort_by(|a, b| a.2.total_cmp(&b.2).then(a.0.cmp(&b.0)));
    Crossers { labels, clusters }
}

fn changes(colors: impl Iterator<Item = Color>, cyclic: bool) -> u32 {
    let v: Vec<Color> = colors.collect();
    if v.len() < 2 {
        return 0;
    }
    let mut k = v.windows(2).filter(|w| w[0] != w[1]).count() as u32;
    if cyclic && v[0] != v[v.len() - 1] {
        k += 1;
    }
    k
}

/// Maximum number (capped at `cap`) of piece-disjoint black paths from the
/// inner to the outer boundary, by augmenting paths on the split graph.
fn disjoint_black_crossings(cx: &ClippedComplex, colors: &[Color], cr: &Crossers, cap: u32) -> u32 {
    let black_crossing: std::collections::HashSet<u32> = cr.clusters.iter().filter(|c| c.1 == Color::Black).map(|c| c.0).collect();
    if black_crossing.is_empty() || cap == 0 {
        return 0;
    }
    let n = cx.num_pieces();
    let mut node = vec![u32::MAX; n];
    let mut pieces = Vec::new();
    for pc in 0..n as u32 {
        if colors[cx.owner(pc) as usize] == Color::Black && black_crossing.contains(&cr.labels[pc as usize]) {
            node[pc as usize] = pieces.len() as u32;
            pieces.push(pc);
        }
    }
    // Nodes: 2v = in, 2v+1 = out, then source and sink.
    let m = pieces.len();
    let (src, snk) = (2 * m, 2 * m + 1);
    let mut head = vec![usize::MAX; 2 * m + 2];
    let mut to: Vec<usize> = Vec::new();
    let mut capv: Vec<u8> = Vec::new();
    let mut next: Vec<usize> = Vec::new();
    let mut add = |a: usize, b: usize, head: &mut Vec<usize>| {
        for (x, y, c) in [(a, b, 1u8), (b, a, 0u8)] {
            to.push(y);
            capv.push(c);
            next.push(head[x]);
            head[x] = to.len() - 1;
        }
    };
    for (v, &pc) in pieces.iter().enumerate() {
        add(2 * v, 2 * v + 1, &mut head);
        let t = cx.touches(pc);
        if t & INNER != 0 {
            add(src, 2 * v, &mut head);
        }
        if t & OUTER != 0 {
            add(2 * v + 1, snk, &mut head);
        }
        for &q in cx.neighbors(pc) {
            let w = node[q as usize];
            if w != u32::MAX {
                add(2 * v + 1, 2 * w as usize, &mut head);
            }
        }
    }
    let mut flow = 0;
    let mut prev_edge = vec![usize::MAX; 2 * m + 2];
    while flow < cap {
        prev_edge.iter_mut().for_each(|e| *e = usize::MAX);
        let mut queue = VecDeque::from([src]);
        let mut reached = false;
        while let Some(x) = queue.pop_front() {
            let mut e = head[x];
            while e != usize::MAX {
                let y = to[e];
                if capv[e] > 0 && y != src && prev_edge[y] == usize::MAX {
                    prev_edge[y] = e;
                    if y == snk {
                        reached = true;
                        break;
                    }
                    queue.push_back(y);
                }
                e = next[e];
            }
            if reached {
                break;
            }
        }
        if !reached {
            break;
        }
        let mut y = snk;
        while y != src {
            let e = prev_edge[y];
            capv[e] -= 1;
            capv[e ^ 1] += 1;
            y = to[e ^ 1];
        }
        flow += 1;
    }
    flow
}

/// Decide `A_j` on a prebuilt complex of `spec`'s annulus.
pub fn arm_event_in(cx: &ClippedComplex, region: &Region, colors: &[Color], j: u32) -> bool {
    let cr = crossers(cx, region, colors);
    event_from(cx, region, colors, &cr, j)
}

fn event_from(cx: &ClippedComplex, region: &Region, colors: &[Color], cr: &Crossers, j: u32) -> bool {
    let cyclic = region.angular_order() == AngularOrder::Cyclic;
    let seq = || cr.clusters.iter().map(|c| c.1);
    if !cyclic {
        // Alternating subsequence of length j in the linear order.
        return !cr.clusters.is_empty() && changes(seq(), false) + 1 >= j;
    }
    if j % 2 == 0 {
        return changes(seq(), true) >= j;
    }
    if changes(seq(), true) < j - 1 {
        return false;
    }
    disjoint_black_crossings(cx, colors, cr, j.div_ceil(2)) >= j.div_ceil(2)
}

/// Crossing clusters, alternation and interface counts on a prebuilt complex.
pub fn crossing_clusters_in(cx: &ClippedComplex, region: &Region, colors: &[Color], j: u32) -> ArmReport {
    let cr = crossers(cx, region, colors);
    let cyclic = region.angular_order() == AngularOrder::Cyclic;
    let alternation_count = changes(cr.clusters.iter().map(|c| c.1), cyclic);
    let mut by_outer: Vec<&(u32, Color, f64, f64)> = cr.clusters.iter().collect();
    by_outer.sort_by(|a, b| a.3.total_cmp(&b.3).then(a.0.cmp(&b.0)));
    let interface_count = changes(by_outer.iter().map(|c| c.1), cyclic);
    let holds = event_from(cx, region, colors, &cr, j);
    ArmReport { holds, interface_count, crossing_clusters: cr.clusters.iter().map(|c| (c.0, c.1)).collect(), alternation_count }
}

pub fn crossing_clusters(config: &Configuration, index: &TessellationIndex, spec: &ArmSpec) -> Result<ArmReport> {
    if spec.is_degenerate() {
        return Ok(ArmReport { holds: true, interface_count: 0, crossing_clusters: Vec::new(), alternation_count: 0 });
    }
    let region = spec.region()?;
    let cx = ClippedComplex::build(index, &region)?;
    Ok(crossing_clusters_in(&cx, &region, config.colors(), spec.j))
}

pub fn arm_event(config: &Configuration, index: &TessellationIndex, spec: &ArmSpec) -> Result<bool> {
    if spec.is_degenerate() {
        return Ok(true);
    }
    let region = spec.region()?;
    let cx = ClippedComplex::build(index, &region)?;
    Ok(arm_event_in(&cx, &region, config.colors(), spec.j))
}

/// Monte Carlo completion of `A_j`: true if the event holds now or after one
/// of `inner_trials` redraws of the coloured points outside the annulus
/// (inside `B_r` and outside `B_R`, within the dilated window).
pub fn hat_arm_event(
    config: &Configuration,
    index: &TessellationIndex,
    spec: &ArmSpec,
    inner_trials: u32,
    stream: &mut Stream,
) -> Result<bool> {
    if arm_event(config, index, spec)? {
        return Ok(true);
    }
    let zone = Zone::annulus_complement(spec.center, spec.r, spec.big_r, &config.env().window().dilated());
    for _ in 0..inner_trials {
        let redrawn = resample_points_in(config, &zone, stream)?;
        let idx = build_index(redrawn.env())?;
        if arm_event(&redrawn, &idx, spec)? {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Every location of `region` lies within `delta · diam(region)` of a point
/// of `env` inside the region. Decided exactly from the vertices of the
/// Voronoi cells of those points clipped to the region.
pub fn dense_event(env: &Environment, region: &Region, delta: f64) -> Result<bool> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(EventError::InvalidParameter(format!("delta must lie in (0, 1), got {delta}")).into());
    }
    if !env.window().dilated().inflate(region.tol()).contains_rect(region.bbox()) {
        return Err(GeometryError::OutsideWindow.into());
    }
    let inside: Vec<P> = env.points().iter().copied().filter(|&p| region.contains(p)).collect();
    if inside.is_empty() {
        return Ok(false);
    }
    let verts: Vec<P> = region.parts().iter().flat_map(|p| p.verts.iter().copied()).collect();
    let diam = verts.iter().flat_map(|a| verts.iter().map(move |b| a.dist(*b))).fold(0.0, f64::max);
    let limit = delta * diam;
    let idx = TessellationIndex::new(&inside, *region.bbox())?;
    let cx = ClippedComplex::build(&idx, region)?;
    let worst = cx
        .sub_pieces()
        .iter()
        .flat_map(|s| {
            let x = inside[cx.owner(s.piece) as usize];
            cx.sub_verts(s).iter().map(move |v| v.dist(x))
        })
        .fold(0.0, f64::max);
    Ok(worst <= limit)
}
