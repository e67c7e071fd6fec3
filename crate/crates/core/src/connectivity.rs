//! Monochromatic crossings of quads, decided on the clipped cell complex,
//! plus an independent raster check.

use std::collections::VecDeque;

use crate::geometry::complex::ClippedComplex;
use crate::geometry::point::{Point2, Rect};
use crate::geometry::region::{rect_side, Region};
use crate::geometry::tessellation::TessellationIndex;
use crate::sampling::{Color, Configuration};
use crate::unionfind::UnionFind;
use crate::GeometryError;

type P = Point2<f64>;

/// A region with two disjoint distinguished boundary arcs, given as bit
/// masks over the region's side ids, and the colour of the wanted path.
#[derive(Debug, Clone)]
pub struct QuadSpec {
    pub region: Region,
    pub side_a: u64,
    pub side_b: u64,
    pub color: Color,
}

impl QuadSpec {
    pub fn new(region: Region, side_a: u64, side_b: u64, color: Color) -> Result<Self, GeometryError> {
        let all = if region.num_sides() >= 64 { u64::MAX } else { (1u64 << region.num_sides()) - 1 };
        if side_a == 0 || side_b == 0 {
            return Err(GeometryError::InvalidQuad("both distinguished sides must be non-empty".into()));
        }
        if side_a & side_b != 0 {
            return Err(GeometryError::InvalidQuad("distinguished sides overlap".into()));
        }
        if (side_a | side_b) & !all != 0 {
            return Err(GeometryError::InvalidQuad("side id not present in region".into()));
        }
        Ok(Self { region, side_a, side_b, color })
    }

    /// Left side to right side of a rectangle.
    pub fn left_right(r: &Rect<f64>, color: Color) -> Result<Self, GeometryError> {
        Self::new(Region::rect(r)?, 1 << rect_side::LEFT, 1 << rect_side::RIGHT, color)
    }

    /// Bottom side to top side of a rectangle.
    pub fn bottom_top(r: &Rect<f64>, color: Color) -> Result<Self, GeometryError> {
        Self::new(Region::rect(r)?, 1 << rect_side::BOTTOM, 1 << rect_side::TOP, color)
    }

    pub fn with_color(&self, color: Color) -> Self {
        Self { color, ..self.clone() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CrossResult {
    pub holds: bool,
    /// Pieces of the clipped complex, from side A to side B.
    pub witness: Option<Vec<u32>>,
}

/// Colour of each piece.
pub fn piece_colors(cx: &ClippedComplex, colors: &[Color]) -> Vec<Color> {
    cx.owners().iter().map(|&o| colors[o as usize]).collect()
}

/// Breadth-first search for a path of `color` pieces from a piece touching
/// `side_a` to one touching `side_b`.
pub fn crossing_in(cx: &ClippedComplex, colors: &[Color], side_a: u64, side_b: u64, color: Color) -> CrossResult {
    let n = cx.num_pieces();
    let mut prev = vec![u32::MAX; n];
    let mut queue = VecDeque::new();
    let ok = |pc: u32| colors[cx.owner(pc) as usize] == color;
    for pc in 0..n as u32 {
        if ok(pc) && cx.touches(pc) & side_a != 0 {
            prev[pc as usize] = pc;
            queue.push_back(pc);
        }
    }
    while let Some(pc) = queue.pop_front() {
        if cx.touches(pc) & side_b != 0 {
            let mut path = vec![pc];
            let mut cur = pc;
            while prev[cur as usize] != cur {
                cur = prev[cur as usize];
                path.push(cur);
            }
            path.reverse();
            return CrossResult { holds: true, witness: Some(path) };
        }
        for &q in cx.neighbors(pc) {
            if prev[q as usize] == u32::MAX && ok(q) {
                prev[q as usize] = pc;
                queue.push_back(q);
            }
        }
    }
    CrossResult { holds: false, witness: None }
}

/// Crossing event on a fresh clipped complex of the quad's region.
pub fn crossing(config: &Configuration, index: &TessellationIndex, quad: &QuadSpec) -> Result<CrossResult, GeometryError> {
    let cx = ClippedComplex::build(index, &quad.region)?;
    Ok(crossing_in(&cx, config.colors(), quad.side_a, quad.side_b, quad.color))
}

/// Re-check a witness from scratch: colours, adjacency and side contact.
pub fn validate_witness(cx: &ClippedComplex, colors: &[Color], side_a: u64, side_b: u64, color: Color, path: &[u32]) -> bool {
    let (Some(&first), Some(&last)) = (path.first(), path.last()) else { return false };
    path.iter().all(|&pc| (pc as usize) < cx.num_pieces() && colors[cx.owner(pc) as usize] == color)
        && cx.touches(first) & side_a != 0
        && cx.touches(last) & side_b != 0
        && path.windows(2).all(|w| cx.neighbors(w[0]).contains(&w[1]))
}

/// Monochromatic clusters of the complex: one label per piece, labels are
/// the smallest piece index of the cluster.
pub fn cluster_labels(cx: &ClippedComplex, colors: &[Color]) -> Vec<u32> {
    let n = cx.num_pieces();
    let mut uf = UnionFind::new(n);
    for pc in 0..n as u32 {
        let c = colors[cx.owner(pc) as usize];
        for &q in cx.neighbors(pc) {
            if q > pc && colors[cx.owner(q) as usize] == c {
                uf.union(pc, q);
            }
        }
    }
    let mut label = vec![u32::MAX; n];
    let mut root_label = vec![u32::MAX; n];
    for pc in 0..n {
        let r = uf.find(pc as u32) as usize;
        if root_label[r] == u32::MAX {
            root_label[r] = pc as u32;
        }
        label[pc] = root_label[r];
    }
    label
}

/// Sides `(lengthwise_a, lengthwise_b, widthwise_a, widthwise_b)` of a
/// rectangle: lengthwise crossings join the two short sides.
pub fn lengthwise_sides(r: &Rect<f64>) -> (u64, u64, u64, u64) {
    use rect_side::*;
    if r.width() >= r.height() {
        (1 << LEFT, 1 << RIGHT, 1 << BOTTOM, 1 << TOP)
    } else {
        (1 << BOTTOM, 1 << TOP, 1 << LEFT, 1 << RIGHT)
    }
}

/// Exactly one of {black lengthwise crossing, white widthwise crossing}.
pub fn check_duality(config: &Configuration, index: &TessellationIndex, rect: &Rect<f64>) -> Result<bool, GeometryError> {
    let cx = ClippedComplex::build(index, &Region::rect(rect)?)?;
    Ok(duality_holds(&cx, config.colors(), rect))
}

pub fn duality_holds(cx: &ClippedComplex, colors: &[Color], rect: &Rect<f64>) -> bool {
    let (la, lb, wa, wb) = lengthwise_sides(rect);
    let black = crossing_in(cx, colors, la, lb, Color::Black).holds;
    let white = crossing_in(cx, colors, wa, wb, Color::White).holds;
    black != white
}

fn dist_to_segment(p: P, a: P, b: P) -> f64 {
    let d = b - a;
    let t = ((p - a).dot(d) / d.norm2()).clamp(0.0, 1.0);
    p.dist(a + d * t)
}

/// Pixel version of [`crossing`]: pixel centres are coloured by their
/// nearest point and joined 4-connectedly. A pixel is attached to a side
/// when its centre is within one pixel size of it.
pub fn raster_crossing(
    config: &Configuration,
    index: &TessellationIndex,
    quad: &QuadSpec,
    color: Color,
    resolution: f64,
) -> Result<bool, GeometryError> {
    if !(resolution > 0.0) {
        return Err(GeometryError::ResolutionTooCoarse(resolution));
    }
    let bb = *quad.region.bbox();
    let nx = (bb.width() / resolution).ceil() as usize;
    let ny = (bb.height() / resolution).ceil() as usize;
    let segs = |mask: u64| -> Vec<(P, P)> {
        (0..quad.region.num_sides()).filter(|s| mask & (1 << s) != 0).flat_map(|s| quad.region.side_segments(s)).collect()
    };
    let (sa, sb) = (segs(quad.side_a), segs(quad.side_b));
    let near = |p: P, ss: &[(P, P)]| ss.iter().any(|&(a, b)| dist_to_segment(p, a, b) <= resolution);
    // 0 = outside or wrong colour, 1 = usable, 2 = visited.
    let mut state = vec![0u8; nx * ny];
    let mut is_b = vec![false; nx * ny];
    let mut queue = VecDeque::new();
    let (mut any_a, mut any_b) = (false, false);
    for j in 0..ny {
        for i in 0..nx {
            let c = P::new(bb.x_min + (i as f64 + 0.5) * resolution, bb.y_min + (j as f64 + 0.5) * resolution);
            if !quad.region.contains(c) {
                continue;
            }
            let (ta, tb) = (near(c, &sa), near(c, &sb));
            any_a |= ta;
            any_b |= tb;
            let k = j * nx + i;
            if config.color(index.nearest_point(c)) != color {
                continue;
            }
            state[k] = 1;
            is_b[k] = tb;
            if ta {
                state[k] = 2;
                queue.push_back(k);
            }
        }
    }
    if !any_a || !any_b {
        return Err(GeometryError::ResolutionTooCoarse(resolution));
    }
    while let Some(k) = queue.pop_front() {
        if is_b[k] {
            return Ok(true);
        }
        let (i, j) = (k % nx, k / nx);
        let mut visit = |kk: usize| {
            if state[kk] == 1 {
                state[kk] = 2;
                queue.push_back(kk);
            }
        };
        if i > 0 {
            visit(k - 1);
        }
        if i + 1 < nx {
            visit(k + 1);
        }
        if j > 0 {
            visit(k - nx);
        }
        if j + 1 < ny {
            visit(k + nx);
        }
    }
    Ok(false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::tessellation::build_index;
    use crate::randomness::{Role, SeedSpec};
    use crate::sampling::{explicit_from_lines, parse_points, sample_coloring, sample_environment, Window};
    use std::sync::Arc;

    fn five_point(flip: bool) -> (Configuration, TessellationIndex) {
        let text = "-2 0 B\n0 0 B\n2 0 B\n0 2 W\n0 -2 W\n";
        let w = Window::new(Rect::new(-4.0, -4.0, 4.0, 4.0), 2.0).unwrap();
        let (env, colors) = explicit_from_lines(&parse_points(text).unwrap(), w).unwrap();
        let mut colors = colors.unwrap();
        if flip {
            colors.iter_mut().for_each(|c| *c = c.flip());
        }
        let idx = build_index(&env).unwrap();
        (Configuration::with_colors(env, colors, 0.5).unwrap(), idx)
    }

    #[test]
    fn five_point_example() {
        let quad = QuadSpec::left_right(&Rect::new(-3.0, -1.0, 3.0, 1.0), Color::Black).unwrap();
        let (cfg, idx) = five_point(false);
        let r = crossing(&cfg, &idx, &quad).unwrap();
        assert!(r.holds);
        assert!(raster_crossing(&cfg, &idx, &quad, Color::Black, 0.02).unwrap());
        let cx = ClippedComplex::build(&idx, &quad.region).unwrap();
        assert!(validate_witness(&cx, cfg.colors(), quad.side_a, quad.side_b, Color::Black, r.witness.as_ref().unwrap()));
        let white = quad.with_color(Color::White);
        assert!(!crossing(&cfg, &idx, &white).unwrap().holds);
        assert!(!raster_crossing(&cfg, &idx, &white, Color::White, 0.02).unwrap());
        let (flipped, idx2) = five_point(true);
        assert!(!crossing(&flipped, &idx2, &quad).unwrap().holds);
        assert!(!raster_crossing(&flipped, &idx2, &quad, Color::Black, 0.02).unwrap());
    }

    #[test]
    fn monochrome_and_single_point() {
        let w = Window::new(Rect::new(0.0, 0.0, 10.0, 10.0), 3.0).unwrap();
        let seed = SeedSpec::new(1, "mono");
        let env = Arc::new(sample_environment(&w, &mut seed.stream(0, Role::Environment)));
        let idx = build_index(&env).unwrap();
        let rect = Rect::new(1.0, 2.0, 9.0, 6.0);
        let quad = QuadSpec::left_right(&rect, Color::Black).unwrap();
        let black = Configuration::uniform_color(env.clone(), Color::Black);
        let white = Configuration::uniform_color(env.clone(), Color::White);
        assert!(crossing(&black, &idx, &quad).unwrap().holds);
        assert!(!crossing(&black, &idx, &quad.with_color(Color::White)).unwrap().holds);
        assert!(!raster_crossing(&white, &idx, &quad, Color::Black, 0.1).unwrap());
        assert!(check_duality(&black, &idx, &rect).unwrap());
        assert!(check_duality(&white, &idx, &rect).unwrap());

        let env1 = Arc::new(crate::sampling::Environment::explicit(vec![P::new(5.0, 5.0)], w).unwrap());
        let idx1 = build_index(&env1).unwrap();
        let one = Configuration::uniform_color(env1, Color::Black);
        assert!(raster_crossing(&one, &idx1, &quad, Color::Black, 0.5).unwrap());
        assert!(crossing(&one, &idx1, &quad).unwrap().holds);
        assert!(matches!(raster_crossing(&one, &idx1, &quad, Color::Black, 100.0), Err(GeometryError::ResolutionTooCoarse(_))));
    }

    #[test]
    fn quad_validation() {
        let region = Region::rect(&Rect::new(0.0, 0.0, 1.0, 1.0)).unwrap();
        assert!(QuadSpec::new(region.clone(), 1, 1, Color::Black).is_err());
        assert!(QuadSpec::new(region.clone(), 0, 1, Color::Black).is_err());
        assert!(QuadSpec::new(region, 1, 1 << 9, Color::Black).is_err());
    }

    #[test]
    fn duality_and_monotonicity_on_random_samples() {
        let rect = Rect::new(0.0, 0.0, 16.0, 8.0);
        let w = Window::padded(rect).unwrap();
        let seed = SeedSpec::new(8, "dual");
        let region = Region::rect(&rect).unwrap();
        for i in 0..200 {
            let env = Arc::new(sample_environment(&w, &mut seed.stream(i, Role::Environment)));
            let idx = build_index(&env).unwrap();
            let cfg = sample_coloring(env.clone(), 0.5, &mut seed.stream(i, Role::Color)).unwrap();
            let cx = ClippedComplex::build(&idx, &region).unwrap();
            assert!(duality_holds(&cx, cfg.colors(), &rect));
            let r = crossing_in(&cx, cfg.colors(), 1 << rect_side::LEFT, 1 << rect_side::RIGHT, Color::Black);
            if let Some(w) = &r.witness {
                assert!(validate_witness(&cx, cfg.colors(), 1 << rect_side::LEFT, 1 << rect_side::RIGHT, Color::Black, w));
            }
            // Recolouring a white point black never destroys a black crossing.
            if r.holds {
                if let Some(k) = cfg.colors().iter().position(|c| !c.is_black()) {
                    let more = cfg.with_color(k as u32, Color::Black);
                    assert!(crossing_in(&cx, more.colors(), 1 << rect_side::LEFT, 1 << rect_side::RIGHT, Color::Black).holds);
                }
            }
        }
    }
}
