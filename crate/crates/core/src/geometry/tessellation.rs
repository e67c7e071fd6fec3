//! Voronoi cells of an environment, derived from its Delaunay triangulation
//! and clipped to the dilated window.

use std::fmt::Write as _;

use super::delaunay::{Delaunay, NONE};
use super::grid::BucketGrid;
use super::point::{Point2, Rect};
use super::polygon::{bounding_rect, clip_convex, signed_area, HalfPlane};
use super::SNAP_EPS;
use crate::sampling::Environment;
use crate::GeometryError;

/// Provenance of a cell or piece edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EdgeLabel {
    /// Bisector shared with the cell of this point.
    Neighbor(u32),
    /// Boundary of the dilated window.
    Window,
    /// Boundary line `k` of a region part (see [`super::region`]).
    RegionLine(u32),
}

/// Tessellate an environment inside its dilated window.
pub fn build_index(env: &Environment) -> Result<TessellationIndex, GeometryError> {
    TessellationIndex::new(env.points(), env.window().dilated())
}

#[derive(Debug, Clone)]
pub struct TessellationIndex {
    points: Vec<Point2<f64>>,
    window: Rect<f64>,
    dt: Delaunay,
    cell_start: Vec<u32>,
    cell_verts: Vec<Point2<f64>>,
    cell_labels: Vec<EdgeLabel>,
    cell_bbox: Vec<Rect<f64>>,
    grid: BucketGrid,
}

impl TessellationIndex {
    /// Tessellate `points`, which must all lie in `window`.
    pub fn new(points: &[Point2<f64>], window: Rect<f64>) -> Result<Self, GeometryError> {
        let dt = Delaunay::new(points)?;
        let n = points.len();
        let circum: Vec<Point2<f64>> = (0..dt.triangles().len() as u32).map(|t| dt.circumcenter(t)).collect();
        let window_planes = {
            let c = window.corners();
            [HalfPlane::left_of(c[0], c[1]), HalfPlane::left_of(c[1], c[2]), HalfPlane::left_of(c[2], c[3]), HalfPlane::left_of(c[3], c[0])]
        };

        let inner_window = window.inflate(-2.0 * SNAP_EPS);
        let mut cell_start = Vec::with_capacity(n + 1);
        let mut cell_verts = Vec::with_capacity(7 * n);
        let mut cell_labels = Vec::with_capacity(7 * n);
        let mut cell_bbox = Vec::with_capacity(n);
        let (mut va, mut la) = (Vec::with_capacity(16), Vec::with_capacity(16));
        let (mut vb, mut lb) = (Vec::with_capacity(16), Vec::with_capacity(16));
        cell_start.push(0);
        for v in 0..n as u32 {
            va.clear();
            la.clear();
            dt.for_each_around(v, |t, b| {
                va.push(circum[t as usize]);
                la.push(EdgeLabel::Neighbor(b));
            });
            if !inner_window.contains_rect(&bounding_rect(&va)) {
                for hp in &window_planes {
                    clip_convex(&va, &la, hp, EdgeLabel::Window, SNAP_EPS, &mut vb, &mut lb);
                    std::mem::swap(&mut va, &mut vb);
                    std::mem::swap(&mut la, &mut lb);
                }
            }
            // Edges towards the auxiliary corner vertices never survive
            // clipping; relabel defensively in case of a huge window.
            for l in la.iter_mut() {
                if let EdgeLabel::Neighbor(b) = *l {
                    if b as usize >= n {
                        *l = EdgeLabel::Window;
                    }
                }
            }
            cell_bbox.push(bounding_rect(&va));
            cell_verts.extend_from_slice(&va);
            cell_labels.extend_from_slice(&la);
            cell_start.push(cell_verts.len() as u32);
        }
        let grid = BucketGrid::new(points, &window);
        Ok(Self { points: points.to_vec(), window, dt, cell_start, cell_verts, cell_labels, cell_bbox, grid })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Point2<f64>] {
        &self.points
    }

    pub fn point(&self, i: u32) -> Point2<f64> {
        self.points[i as usize]
    }

    pub fn window(&self) -> &Rect<f64> {
        &self.window
    }

    pub fn delaunay(&self) -> &Delaunay {
        &self.dt
    }

    /// Delaunay edges between input points, `(lo, hi)`, sorted.
    pub fn delaunay_edges(&self) -> Vec<(u32, u32)> {
        self.dt.edges()
    }

    /// Delaunay neighbours of `i` in counter-clockwise order.
    pub fn neighbors(&self, i: u32) -> Vec<u32> {
        let mut out = Vec::with_capacity(8);
        self.dt.for_each_around(i, |_, b| {
            if b != NONE && self.dt.is_real(b) {
                out.push(b)
            }
        });
        out
    }

    pub fn cell(&self, i: u32) -> (&[Point2<f64>], &[EdgeLabel]) {
        let a = self.cell_start[i as usize] as usize;
        let b = self.cell_start[i as usize + 1] as usize;
        (&self.cell_verts[a..b], &self.cell_labels[a..b])
    }

    pub fn cell_bbox(&self, i: u32) -> &Rect<f64> {
        &self.cell_bbox[i as usize]
    }

    pub fn cell_area(&self, i: u32) -> f64 {
        signed_area(self.cell(i).0)
    }

    /// Length of the boundary shared by the cells of `i` and `j`.
    pub fn shared_boundary(&self, i: u32, j: u32) -> f64 {
        let (v, l) = self.cell(i);
        let n = v.len();
        (0..n).filter(|&k| l[k] == EdgeLabel::Neighbor(j)).map(|k| v[k].dist(v[(k + 1) % n])).sum()
    }

    /// Nearest point to `q`, ties to the lowest index.
    pub fn nearest_point(&self, q: Point2<f64>) -> u32 {
        self.grid.nearest(&self.points, q).expect("index is never empty")
    }

    /// Points whose bucket overlaps `r` (a superset of the points in `r`).
    pub fn points_near(&self, r: &Rect<f64>, f: impl FnMut(u32)) {
        self.grid.candidates_in(r, f)
    }

    /// One polygon per line: `i x0 y0 x1 y1 ...`, for external plotting.
    pub fn dump_cells(&self) -> String {
        let mut s = String::new();
        for i in 0..self.len() as u32 {
            let _ = write!(s, "{i}");
            for p in self.cell(i).0 {
                let _ = write!(s, " {} {}", p.x, p.y);
            }
            s.push('\n');
        }
        s
    }
}
