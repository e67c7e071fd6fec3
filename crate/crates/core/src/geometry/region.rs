//! Polygonal query regions: rectangles, square annuli, sector-clipped
//! annuli and simple polygons.
//!
//! A region is stored as a set of convex parts glued along internal cuts.
//! Every boundary line of a part carries tagged intervals saying whether that
//! stretch is a named side of the region or a cut shared with another part.

use std::f64::consts::PI;

use super::point::{Point2, Rect};
use super::polygon::{signed_area, HalfPlane, LabeledPolygon};
use super::SNAP_EPS;
use crate::GeometryError;

type P = Point2<f64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EdgeTag {
    /// Outer boundary with the given side id (< 64).
    Side(u32),
    /// Internal cut between two parts.
    Cut(u32),
}

/// Side ids of a rectangle region.
pub mod rect_side {
    pub const BOTTOM: u32 = 0;
    pub const RIGHT: u32 = 1;
    pub const TOP: u32 = 2;
    pub const LEFT: u32 = 3;
}

/// Side ids of annulus regions.
pub mod annulus_side {
    pub const INNER: u32 = 0;
    pub const OUTER: u32 = 1;
    /// Radial side along the start ray of a sector.
    pub const RADIAL_START: u32 = 2;
    /// Radial side along the end ray of a sector.
    pub const RADIAL_END: u32 = 3;
}

/// Angular extent of an annulus region.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Sector {
    Full,
    /// Angles in `[0, π]`.
    UpperHalf,
    /// Angles in `[0, π/2]`.
    Quarter,
    /// Angles in `[start, start + width]`, `0 < width <= π`.
    Wedge {
        start: f64,
        width: f64,
    },
}

impl Sector {
    /// `(start, width)` of the wedge, `None` for the full turn.
    pub fn wedge(&self) -> Option<(f64, f64)> {
        match *self {
            Sector::Full => None,
            Sector::UpperHalf => Some((0.0, PI)),
            Sector::Quarter => Some((0.0, PI / 2.0)),
            Sector::Wedge { start, width } => Some((start, width)),
        }
    }
}

/// How boundary positions of a region are ordered by angle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AngularOrder {
    /// Region is not an annulus.
    None,
    /// Full annulus: cyclic order around the center.
    Cyclic,
    /// Sector: linear order by angle measured counter-clockwise from `start`.
    Linear { start: f64 },
}

/// One boundary line of a convex part.
#[derive(Debug, Clone)]
pub struct PartLine {
    pub hp: HalfPlane<f64>,
    pub origin: P,
    /// Unit direction; the part lies to the left.
    pub dir: P,
    /// `(t0, t1, tag)` with `t0 < t1` measured from `origin` along `dir`.
    pub segs: Vec<(f64, f64, EdgeTag)>,
}

impl PartLine {
    pub fn param(&self, p: P) -> f64 {
        (p - self.origin).dot(self.dir)
    }

    pub fn at(&self, t: f64) -> P {
        self.origin + self.dir * t
    }
}

#[derive(Debug, Clone)]
pub struct Part {
    /// Counter-clockwise, no collinear vertices; edge `k` lies on `lines[k]`.
    pub verts: Vec<P>,
    pub lines: Vec<PartLine>,
    pub bbox: Rect<f64>,
}

impl Part {
    fn from_tagged(poly: &LabeledPolygon<f64, EdgeTag>, tol: f64) -> Option<Part> {
        let n = poly.verts.len();
        if n < 3 || poly.area() <= 0.0 {
            return None;
        }
        let v = &poly.verts;
        let dir = |k: usize| {
            let d = v[(k + 1) % n] - v[k];
            d * (1.0 / d.norm())
        };
        let len = |k: usize| v[k].dist(v[(k + 1) % n]);
        // Edges of (near) zero length are absorbed by their neighbours.
        let keep: Vec<usize> = (0..n).filter(|&k| len(k) > tol).collect();
        let collinear = |a: usize, b: usize| {
            let (da, db) = (dir(a), dir(b));
            da.dot(db) > 0.0 && da.cross(db).abs() <= 1e-12 && HalfPlane::left_of(v[a], v[(a + 1) % n]).depth(v[b]).abs() <= tol
        };
        let m = keep.len();
        if m < 3 {
            return None;
        }
        let first = (0..m).find(|&i| !collinear(keep[(i + m - 1) % m], keep[i]))?;
        let mut verts = Vec::new();
        let mut lines: Vec<PartLine> = Vec::new();
        for s in 0..m {
            let k = keep[(first + s) % m];
            let (a, b) = (v[k], v[(k + 1) % n]);
            let extends = lines.last().is_some_and(|l: &PartLine| {
                let last = keep[(first + s + m - 1) % m];
                s > 0 && collinear(last, k) && l.dir.dot(dir(k)) > 0.0
            });
            if !extends {
                verts.push(a);
                lines.push(PartLine { hp: HalfPlane::left_of(a, b), origin: a, dir: dir(k), segs: Vec::new() });
            }
            let line = lines.last_mut().unwrap();
            let (t0, t1) = (line.param(a), line.param(b));
            match line.segs.last_mut() {
                Some(last) if last.2 == poly.labels[k] && (last.1 - t0).abs() <= tol => last.1 = t1,
                _ => line.segs.push((t0, t1, poly.labels[k])),
            }
        }
        if verts.len() < 3 {
            return None;
        }
        let bbox = poly.bbox();
        Some(Part { verts, lines, bbox })
    }

    pub fn area(&self) -> f64 {
        signed_area(&self.verts)
    }

    pub fn contains(&self, p: P, tol: f64) -> bool {
        self.lines.iter().all(|l| l.hp.depth(p) >= -tol)
    }
}

#[derive(Debug, Clone)]
pub struct Region {
    parts: Vec<Part>,
    cuts: Vec<(P, P)>,
    n_sides: u32,
    center: P,
    order: AngularOrder,
    bbox: Rect<f64>,
    area: f64,
    tol: f64,
}

impl Region {
    fn assemble(
        polys: Vec<LabeledPolygon<f64, EdgeTag>>,
        cuts: Vec<(P, P)>,
        n_sides: u32,
        center: P,
        order: AngularOrder,
    ) -> Result<Region, GeometryError> {
        let mut bbox = Rect::empty();
        for p in &polys {
            bbox = bbox.union(&p.bbox());
        }
        let scale = bbox.x_min.abs().max(bbox.x_max.abs()).max(bbox.y_min.abs()).max(bbox.y_max.abs());
        let tol = snap_tol(scale);
        let parts: Vec<Part> = polys.iter().filter_map(|p| Part::from_tagged(p, tol)).collect();
        let area: f64 = parts.iter().map(Part::area).sum();
        if parts.is_empty() || !(area > 0.0) || !area.is_finite() {
            return Err(GeometryError::DegenerateRegion("region has zero area".into()));
        }
        Ok(Region { parts, cuts, n_sides, center, order, bbox, area, tol })
    }

    /// Axis-aligned rectangle; sides follow [`rect_side`].
    pub fn rect(r: &Rect<f64>) -> Result<Region, GeometryError> {
        if !(r.width() > 0.0 && r.height() > 0.0) {
            return Err(GeometryError::DegenerateRegion(format!("rectangle {r:?} has zero area")));
        }
        use rect_side::*;
        let poly = LabeledPolygon::from_rect(r, [EdgeTag::Side(BOTTOM), EdgeTag::Side(RIGHT), EdgeTag::Side(TOP), EdgeTag::Side(LEFT)]);
        Self::assemble(vec![poly], Vec::new(), 4, r.center(), AngularOrder::None)
    }

    /// Square annulus `c + ([-outer, outer]² ∖ (-inner, inner)²)`, optionally
    /// restricted to an angular sector around `c`.
    pub fn annulus(c: P, inner: f64, outer: f64, sector: Sector) -> Result<Region, GeometryError> {
        if !(inner > 0.0 && inner < outer && outer.is_finite()) {
            return Err(GeometryError::DegenerateRegion(format!("annulus needs 0 < r < R, got r={inner}, R={outer}")));
        }
        use annulus_side::*;
        let (r, big) = (inner, outer);
        let (i, o) = (EdgeTag::Side(INNER), EdgeTag::Side(OUTER));
        let q = |x: f64, y: f64| P::new(c.x + x, c.y + y);
        // Bottom and top span the full width; left and right fill the gaps.
        let bottom = LabeledPolygon::new(
            vec![q(-big, -big), q(big, -big), q(big, -r), q(r, -r), q(-r, -r), q(-big, -r)],
            vec![o, o, EdgeTag::Cut(1), i, EdgeTag::Cut(0), o],
        );
        let top = LabeledPolygon::new(
            vec![q(-big, r), q(-r, r), q(r, r), q(big, r), q(big, big), q(-big, big)],
            vec![EdgeTag::Cut(2), i, EdgeTag::Cut(3), o, o, o],
        );
        let left = LabeledPolygon::new(vec![q(-big, -r), q(-r, -r), q(-r, r), q(-big, r)], vec![EdgeTag::Cut(0), i, EdgeTag::Cut(2), o]);
        let right = LabeledPolygon::new(vec![q(r, -r), q(big, -r), q(big, r), q(r, r)], vec![EdgeTag::Cut(1), o, EdgeTag::Cut(3), i]);
        let cuts = vec![(q(-big, -r), q(-r, -r)), (q(r, -r), q(big, -r)), (q(-big, r), q(-r, r)), (q(r, r), q(big, r))];
        let mut polys = vec![bottom, top, left, right];
        let Some((start, width)) = sector.wedge() else {
            return Self::assemble(polys, cuts, 2, c, AngularOrder::Cyclic);
        };
        if !(width > 0.0 && width <= PI + 1e-12) {
            return Err(GeometryError::DegenerateRegion(format!("sector width {width} must lie in (0, π]")));
        }
        let d0 = P::new(start.cos(), start.sin());
        let d1 = P::new((start + width).cos(), (start + width).sin());
        let hp0 = HalfPlane::left_of(c, c + d0);
        let hp1 = HalfPlane::left_of(c + d1, c);
        let tol = snap_tol(c.x.abs().max(c.y.abs()) + big);
        for poly in polys.iter_mut() {
            let clipped = poly.clip(&hp0, EdgeTag::Side(RADIAL_START), tol).clip(&hp1, EdgeTag::Side(RADIAL_END), tol);
            *poly = clipped;
            // With a half-turn both rays share a line; assign by position.
            let n = poly.verts.len();
            for k in 0..n {
                if let EdgeTag::Side(s) = poly.labels[k] {
                    if s == RADIAL_START || s == RADIAL_END {
                        let m = poly.verts[k].midpoint(poly.verts[(k + 1) % n]) - c;
                        poly.labels[k] = EdgeTag::Side(if m.dot(d0) >= m.dot(d1) { RADIAL_START } else { RADIAL_END });
                    }
                }
            }
        }
        polys.retain(|p| !p.is_empty() && p.area() > 0.0);
        Self::assemble(polys, cuts, 4, c, AngularOrder::Linear { start })
    }

    /// Simple polygon with one side id per edge (`tags[k]` for the edge from
    /// `verts[k]` to `verts[k+1]`). Either orientation is accepted.
    pub fn polygon(verts: &[P], tags: &[u32]) -> Result<Region, GeometryError> {
        if verts.len() < 3 || verts.len() != tags.len() {
            return Err(GeometryError::DegenerateRegion("polygon needs ≥ 3 vertices and one tag per edge".into()));
        }
        if tags.iter().any(|&t| t >= 64) {
            return Err(GeometryError::DegenerateRegion("side ids must be < 64".into()));
        }
        if verts.iter().any(|v| !v.x.is_finite() || !v.y.is_finite()) {
            return Err(GeometryError::NonFinite);
        }
        let mut v = verts.to_vec();
        let mut t: Vec<EdgeTag> = tags.iter().map(|&s| EdgeTag::Side(s)).collect();
        let a = signed_area(&v);
        if a == 0.0 {
            return Err(GeometryError::DegenerateRegion("polygon has zero area".into()));
        }
        if a < 0.0 {
            // Reverse vertex order; edge k becomes edge n-2-k (mod n).
            let n = v.len();
            v.reverse();
            let old = t.clone();
            for k in 0..n {
                t[k] = old[(2 * n - 2 - k) % n];
            }
        }
        if !is_simple(&v) {
            return Err(GeometryError::DegenerateRegion("polygon edges intersect".into()));
        }
        let n_sides = tags.iter().max().unwrap() + 1;
        let center = super::polygon::bounding_rect(&v).center();
        if is_convex(&v) {
            return Self::assemble(vec![LabeledPolygon::new(v, t)], Vec::new(), n_sides, center, AngularOrder::None);
        }
        let (polys, cuts) = ear_clip(&v, &t);
        Self::assemble(polys, cuts, n_sides, center, AngularOrder::None)
    }

    pub fn parts(&self) -> &[Part] {
        &self.parts
    }

    /// Canonical segment of each cut.
    pub fn cuts(&self) -> &[(P, P)] {
        &self.cuts
    }

    pub fn num_sides(&self) -> u32 {
        self.n_sides
    }

    pub fn center(&self) -> P {
        self.center
    }

    pub fn angular_order(&self) -> AngularOrder {
        self.order
    }

    pub fn bbox(&self) -> &Rect<f64> {
        &self.bbox
    }

    pub fn area(&self) -> f64 {
        self.area
    }

    /// Absolute snapping tolerance used for this region.
    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn contains(&self, p: P) -> bool {
        self.bbox.inflate(self.tol).contains(p) && self.parts.iter().any(|part| part.contains(p, self.tol))
    }

    /// Angle of `p` in the region's angular order: in `[0, 2π)` measured from
    /// the positive x axis for cyclic order, from the start ray for sectors.
    pub fn angle_of(&self, p: P) -> f64 {
        let a = p.angle_around(self.center);
        match self.order {
            AngularOrder::Linear { start } => (a - start).rem_euclid(2.0 * PI),
            _ => a,
        }
    }

    /// Total length of the boundary with side id `s`.
    pub fn side_length(&self, s: u32) -> f64 {
        self.parts
            .iter()
            .flat_map(|p| p.lines.iter())
            .flat_map(|l| l.segs.iter())
            .filter(|seg| seg.2 == EdgeTag::Side(s))
            .map(|seg| seg.1 - seg.0)
            .sum()
    }

    /// Boundary pieces of side `s` as segments.
    pub fn side_segments(&self, s: u32) -> Vec<(P, P)> {
        let mut out = Vec::new();
        for line in self.parts.iter().flat_map(|p| p.lines.iter()) {
            for seg in &line.segs {
                if seg.2 == EdgeTag::Side(s) {
                    out.push((line.at(seg.0), line.at(seg.1)));
                }
            }
        }
        out
    }
}

/// Absolute snapping tolerance for coordinates of magnitude up to `scale`.
pub fn snap_tol(scale: f64) -> f64 {
    SNAP_EPS * (1.0 + scale)
}

fn is_convex(v: &[P]) -> bool {
    let n = v.len();
    (0..n).all(|i| {
        let (a, b, c) = (v[i], v[(i + 1) % n], v[(i + 2) % n]);
        (b - a).cross(c - b) >= 0.0
    })
}

fn segments_cross(a: P, b: P, c: P, d: P) -> bool {
    use super::predicates::orient;
    use std::cmp::Ordering::*;
    let o1 = orient(a, b, c);
    let o2 = orient(a, b, d);
    let o3 = orient(c, d, a);
    let o4 = orient(c, d, b);
    if o1 != o2 && o3 != o4 && o1 != Equal && o2 != Equal && o3 != Equal && o4 != Equal {
        return true;
    }
    let on = |p: P, q: P, r: P| r.x >= p.x.min(q.x) && r.x <= p.x.max(q.x) && r.y >= p.y.min(q.y) && r.y <= p.y.max(q.y);
    (o1 == Equal && on(a, b, c)) || (o2 == Equal && on(a, b, d)) || (o3 == Equal && on(c, d, a)) || (o4 == Equal && on(c, d, b))
}

fn is_simple(v: &[P]) -> bool {
    let n = v.len();
    for i in 0..n {
        for j in i + 1..n {
            let adjacent = j == i + 1 || (i == 0 && j == n - 1);
            if adjacent {
                continue;
            }
            if segments_cross(v[i], v[(i + 1) % n], v[j], v[(j + 1) % n]) {
                return false;
            }
        }
    }
    true
}

/// Triangulate a counter-clockwise simple polygon by ear clipping. Diagonals
/// become cuts.
fn ear_clip(v: &[P], tags: &[EdgeTag]) -> (Vec<LabeledPolygon<f64, EdgeTag>>, Vec<(P, P)>) {
    use super::predicates::orient;
    use std::cmp::Ordering::*;
    // idx: remaining vertex indices; tag_after[k]: tag of edge from idx[k] to idx[k+1].
    let mut idx: Vec<usize> = (0..v.len()).collect();
    let mut tag_after: Vec<EdgeTag> = tags.to_vec();
    let mut polys = Vec::new();
    let mut cuts = Vec::new();
    while idx.len() > 3 {
        let m = idx.len();
        let mut ear = None;
        for k in 0..m {
            let (ia, ib, ic) = (idx[(k + m - 1) % m], idx[k], idx[(k + 1) % m]);
            if orient(v[ia], v[ib], v[ic]) != Greater {
                continue;
            }
            let blocked = idx.iter().any(|&j| {
                j != ia
                    && j != ib
                    && j != ic
                    && orient(v[ia], v[ib], v[j]) != Less
                    && orient(v[ib], v[ic], v[j]) != Less
                    && orient(v[ic], v[ia], v[j]) != Less
            });
            if !blocked {
                ear = Some(k);
                break;
            }
        }
        let k = ear.expect("simple polygon always has an ear");
        let (kp, kn) = ((k + m - 1) % m, (k + 1) % m);
        let (ia, ib, ic) = (idx[kp], idx[k], idx[kn]);
        let cut = EdgeTag::Cut(cuts.len() as u32);
        cuts.push((v[ic], v[ia]));
        polys.push(LabeledPolygon::new(vec![v[ia], v[ib], v[ic]], vec![tag_after[kp], tag_after[k], cut]));
        tag_after[kp] = cut;
        idx.remove(k);
        tag_after.remove(k);
    }
    polys.push(LabeledPolygon::new(vec![v[idx[0]], v[idx[1]], v[idx[2]]], tag_after.clone()));
    (polys, cuts)
}
