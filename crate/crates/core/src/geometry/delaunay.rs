//! Incremental Delaunay triangulation (point location by walking, Lawson
//! flips) on exact predicates with index-ordered symbolic perturbation.
//!
//! Four auxiliary corner vertices far outside the input bounding box enclose
//! every input point, so no triangle is ever unbounded. Their indices follow
//! the input indices and therefore carry the weakest perturbation.

use std::cmp::Ordering;

use super::point::{Point2, Rect};
use super::predicates::{incircle_sos, orient};
use crate::GeometryError;

pub const NONE: u32 = u32::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Location {
    Inside(u32),
    /// On the edge of the triangle opposite to the given local vertex.
    OnEdge(u32, usize),
    OnVertex(u32),
}

#[derive(Debug, Clone)]
pub struct Delaunay {
    verts: Vec<Point2<f64>>,
    n_real: usize,
    /// Counter-clockwise vertex triples.
    tris: Vec<[u32; 3]>,
    /// `adj[t][k]` is the triangle across the edge opposite to `tris[t][k]`.
    adj: Vec<[u32; 3]>,
    vert_tri: Vec<u32>,
}

impl Delaunay {
    /// Triangulate `points`; duplicates are rejected.
    pub fn new(points: &[Point2<f64>]) -> Result<Self, GeometryError> {
        let n = points.len();
        if n == 0 {
            return Err(GeometryError::EmptyEnvironment);
        }
        let mut bb = Rect::empty();
        for p in points {
            if !(p.x.is_finite() && p.y.is_finite()) {
                return Err(GeometryError::NonFinite);
            }
            bb.include(*p);
        }
        let c = bb.center();
        let half = 100.0 * (bb.diameter() + 1.0);
        let mut verts = Vec::with_capacity(n + 4);
        verts.extend_from_slice(points);
        verts.push(Point2::new(c.x - half, c.y - half));
        verts.push(Point2::new(c.x + half, c.y - half));
        verts.push(Point2::new(c.x + half, c.y + half));
        verts.push(Point2::new(c.x - half, c.y + half));

        let mut dt =
            Self { verts, n_real: n, tris: Vec::with_capacity(2 * n + 8), adj: Vec::with_capacity(2 * n + 8), vert_tri: vec![NONE; n + 4] };
        let g = [n as u32, n as u32 + 1, n as u32 + 2, n as u32 + 3];
        // The four corners are cocircular; pick the diagonal the perturbation
        // prefers so that the starting triangulation is itself Delaunay.
        if dt.in_circle(g[0], g[1], g[2], g[3]) == Ordering::Greater {
            dt.tris.push([g[0], g[1], g[3]]);
            dt.tris.push([g[1], g[2], g[3]]);
            dt.adj.push([1, NONE, NONE]);
            dt.adj.push([NONE, 0, NONE]);
            dt.vert_tri[g[0] as usize] = 0;
            dt.vert_tri[g[1] as usize] = 0;
            dt.vert_tri[g[2] as usize] = 1;
            dt.vert_tri[g[3] as usize] = 1;
        } else {
            dt.tris.push([g[0], g[1], g[2]]);
            dt.tris.push([g[0], g[2], g[3]]);
            dt.adj.push([NONE, 1, NONE]);
            dt.adj.push([NONE, NONE, 0]);
            dt.vert_tri[g[0] as usize] = 0;
            dt.vert_tri[g[1] as usize] = 0;
            dt.vert_tri[g[2] as usize] = 1;
            dt.vert_tri[g[3] as usize] = 1;
        }

        let order = spatial_order(points, &bb);
        let mut hint = 0u32;
        let mut stack = Vec::with_capacity(64);
        let mut walk_state = 0x9e37_79b9u32;
        for &i in &order {
            let p = dt.verts[i as usize];
            match dt.locate(p, hint, &mut walk_state) {
                Location::Inside(t) => hint = dt.split_triangle(t, i, &mut stack),
                Location::OnEdge(t, k) => hint = dt.split_edge(t, k, i, &mut stack),
                Location::OnVertex(v) => {
                    return Err(GeometryError::DuplicatePoint { first: v.min(i), second: v.max(i) });
                }
            }
            dt.legalize(&mut stack);
        }
        Ok(dt)
    }

    pub fn num_points(&self) -> usize {
        self.n_real
    }

    pub fn point(&self, i: u32) -> Point2<f64> {
        self.verts[i as usize]
    }

    #[inline]
    pub fn is_real(&self, v: u32) -> bool {
        (v as usize) < self.n_real
    }

    pub fn triangles(&self) -> &[[u32; 3]] {
        &self.tris
    }

    /// Triangles whose three vertices are input points.
    pub fn real_triangles(&self) -> impl Iterator<Item = [u32; 3]> + '_ {
        self.tris.iter().copied().filter(|t| t.iter().all(|&v| self.is_real(v)))
    }

    /// Every edge between input points, once, as `(lo, hi)`.
    pub fn edges(&self) -> Vec<(u32, u32)> {
        let mut out = Vec::with_capacity(3 * self.n_real);
        for (t, tri) in self.tris.iter().enumerate() {
            for k in 0..3 {
                let a = tri[(k + 1) % 3];
                let b = tri[(k + 2) % 3];
                let u = self.adj[t][k];
                if (u == NONE || u as usize > t) && self.is_real(a) && self.is_real(b) {
                    out.push((a.min(b), a.max(b)));
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// Visit the triangles around vertex `v` in counter-clockwise order. For
    /// each triangle `[v, a, b]` (rotated so `v` comes first) the callback
    /// receives the triangle id and `b`, the vertex shared with the next
    /// triangle of the fan.
    pub fn for_each_around(&self, v: u32, mut f: impl FnMut(u32, u32)) {
        let start = self.vert_tri[v as usize];
        let mut t = start;
        loop {
            let tri = self.tris[t as usize];
            let i = local_index(&tri, v);
            let b = tri[(i + 2) % 3];
            f(t, b);
            // Next triangle ccw shares edge (v, b): it lies opposite to `a`.
            t = self.adj[t as usize][(i + 1) % 3];
            if t == start || t == NONE {
                break;
            }
        }
    }

    pub fn circumcenter(&self, t: u32) -> Point2<f64> {
        let [a, b, c] = self.tris[t as usize];
        circumcenter(self.verts[a as usize], self.verts[b as usize], self.verts[c as usize])
    }

    #[inline]
    fn in_circle(&self, a: u32, b: u32, c: u32, d: u32) -> Ordering {
        let v = &self.verts;
        incircle_sos(v[a as usize], a, v[b as usize], b, v[c as usize], c, v[d as usize], d)
    }

    fn locate(&self, p: Point2<f64>, hint: u32, state: &mut u32) -> Location {
        let mut t = hint;
        loop {
            let tri = self.tris[t as usize];
            // Random starting edge: the stochastic visibility walk cannot cycle.
            *state ^= *state << 13;
            *state ^= *state >> 17;
            *state ^= *state << 5;
            let start = (*state % 3) as usize;
            let mut next = NONE;
            let mut zero_count = 0;
            let mut zero_k = 0;
            for s in 0..3 {
                let k = (start + s) % 3;
                let a = self.verts[tri[(k + 1) % 3] as usize];
                let b = self.verts[tri[(k + 2) % 3] as usize];
                match orient(a, b, p) {
                    Ordering::Less => {
                        let u = self.adj[t as usize][k];
                        if u != NONE {
                            next = u;
                            break;
                        }
                    }
                    Ordering::Equal => {
                        zero_count += 1;
                        zero_k = k;
                    }
                    Ordering::Greater => {}
                }
            }
            if next != NONE {
                t = next;
                continue;
            }
            return match zero_count {
                0 => Location::Inside(t),
                1 => Location::OnEdge(t, zero_k),
                _ => {
                    let v = tri.iter().copied().find(|&v| self.verts[v as usize] == p).unwrap_or(tri[0]);
                    Location::OnVertex(v)
                }
            };
        }
    }

    fn set_adj(&mut self, t: u32, old: u32, new: u32) {
        if t == NONE {
            return;
        }
        let a = &mut self.adj[t as usize];
        for slot in a.iter_mut() {
            if *slot == old {
                *slot = new;
                return;
            }
        }
        debug_assert!(false, "adjacency back-pointer not found");
    }

    fn split_triangle(&mut self, t: u32, p: u32, stack: &mut Vec<(u32, usize)>) -> u32 {
        let [a, b, c] = self.tris[t as usize];
        let [n_a, n_b, n_c] = self.adj[t as usize];
        let t1 = t;
        let t2 = self.tris.len() as u32;
        let t3 = t2 + 1;
        // t1 = [a, b, p], t2 = [b, c, p], t3 = [c, a, p]
        self.tris[t1 as usize] = [a, b, p];
        self.adj[t1 as usize] = [t2, t3, n_c];
        self.tris.push([b, c, p]);
        self.adj.push([t3, t1, n_a]);
        self.tris.push([c, a, p]);
        self.adj.push([t1, t2, n_b]);
        self.set_adj(n_a, t, t2);
        self.set_adj(n_b, t, t3);
        self.vert_tri[a as usize] = t1;
        self.vert_tri[b as usize] = t1;
        self.vert_tri[c as usize] = t2;
        self.vert_tri[p as usize] = t1;
        stack.push((t1, 2));
        stack.push((t2, 2));
        stack.push((t3, 2));
        t1
    }

    fn split_edge(&mut self, t: u32, k: usize, p: u32, stack: &mut Vec<(u32, usize)>) -> u32 {
        let tri = self.tris[t as usize];
        let c = tri[k];
        let a = tri[(k + 1) % 3];
        let b = tri[(k + 2) % 3];
        let u = self.adj[t as usize][k];
        let n_bc = self.adj[t as usize][(k + 1) % 3];
        let n_ca = self.adj[t as usize][(k + 2) % 3];
        let utri = self.tris[u as usize];
        let j = (0..3).find(|&j| self.adj[u as usize][j] == t).expect("neighbour link");
        let d = utri[j];
        let n_ad = self.adj[u as usize][(j + 1) % 3];
        let n_db = self.adj[u as usize][(j + 2) % 3];

        let t1 = t;
        let t3 = u;
        let t2 = self.tris.len() as u32;
        let t4 = t2 + 1;
        self.tris[t1 as usize] = [c, a, p];
        self.adj[t1 as usize] = [t4, t2, n_ca];
        self.tris.push([c, p, b]);
        self.adj.push([t3, n_bc, t1]);
        self.tris[t3 as usize] = [d, b, p];
        self.adj[t3 as usize] = [t2, t4, n_db];
        self.tris.push([d, p, a]);
        self.adj.push([t1, n_ad, t3]);
        self.set_adj(n_bc, t, t2);
        self.set_adj(n_ad, u, t4);
        self.vert_tri[c as usize] = t1;
        self.vert_tri[a as usize] = t1;
        self.vert_tri[b as usize] = t2;
        self.vert_tri[d as usize] = t3;
        self.vert_tri[p as usize] = t1;
        stack.push((t1, 2));
        stack.push((t2, 1));
        stack.push((t3, 2));
        stack.push((t4, 1));
        t1
    }

    fn legalize(&mut self, stack: &mut Vec<(u32, usize)>) {
        while let Some((t, i)) = stack.pop() {
            let u = self.adj[t as usize][i];
            if u == NONE {
                continue;
            }
            let tri = self.tris[t as usize];
            let p = tri[i];
            let a = tri[(i + 1) % 3];
            let b = tri[(i + 2) % 3];
            let j = match (0..3).find(|&j| self.adj[u as usize][j] == t) {
                Some(j) => j,
                None => continue,
            };
            let d = self.tris[u as usize][j];
            if self.in_circle(p, a, b, d) != Ordering::Greater {
                continue;
            }
            let n_bp = self.adj[t as usize][(i + 1) % 3];
            let n_pa = self.adj[t as usize][(i + 2) % 3];
            let n_ad = self.adj[u as usize][(j + 1) % 3];
            let n_db = self.adj[u as usize][(j + 2) % 3];
            // t' = [p, a, d], u' = [p, d, b]
            self.tris[t as usize] = [p, a, d];
            self.adj[t as usize] = [n_ad, u, n_pa];
            self.tris[u as usize] = [p, d, b];
            self.adj[u as usize] = [n_db, n_bp, t];
            self.set_adj(n_ad, u, t);
            self.set_adj(n_bp, t, u);
            self.vert_tri[p as usize] = t;
            self.vert_tri[a as usize] = t;
            self.vert_tri[d as usize] = t;
            self.vert_tri[b as usize] = u;
            stack.push((t, 0));
            stack.push((u, 0));
        }
    }
}

#[inline]
fn local_index(tri: &[u32; 3], v: u32) -> usize {
    if tri[0] == v {
        0
    } else if tri[1] == v {
        1
    } else {
        debug_assert_eq!(tri[2], v);
        2
    }
}

pub fn circumcenter(a: Point2<f64>, b: Point2<f64>, c: Point2<f64>) -> Point2<f64> {
    let ab = b - a;
    let ac = c - a;
    let d = 2.0 * ab.cross(ac);
    let ab2 = ab.norm2();
    let ac2 = ac.norm2();
    Point2::new(a.x + (ac.y * ab2 - ab.y * ac2) / d, a.y + (ab.x * ac2 - ac.x * ab2) / d)
}

/// Insertion order along a Hilbert curve over the bounding box, which keeps
/// consecutive insertions close together. A grid of about one point per cell
/// is bucketed by counting sort; ties keep index order.
pub(crate) fn spatial_order(points: &[Point2<f64>], bb: &Rect<f64>) -> Vec<u32> {
    let n = points.len();
    let order = (usize::BITS - n.leading_zeros()).div_ceil(2).clamp(1, 12);
    let side = (1u32 << order) as f64;
    let w = bb.width().max(1e-12);
    let h = bb.height().max(1e-12);
    let keys: Vec<u32> = points
        .iter()
        .map(|p| {
            let x = (((p.x - bb.x_min) / w * side) as u32).min((1 << order) - 1);
            let y = (((p.y - bb.y_min) / h * side) as u32).min((1 << order) - 1);
            hilbert_key(x, y, order) as u32
        })
        .collect();
    let mut start = vec![0u32; (1usize << (2 * order)) + 1];
    for &k in &keys {
        start[k as usize + 1] += 1;
    }
    for k in 1..start.len() {
        start[k] += start[k - 1];
    }
    let mut out = vec![0u32; n];
    for (i, &k) in keys.iter().enumerate() {
        out[start[k as usize] as usize] = i as u32;
        start[k as usize] += 1;
    }
    out
}

fn hilbert_key(mut x: u32, mut y: u32, order: u32) -> u64 {
    let mut d = 0u64;
    let mut s = 1u32 << (order - 1);
    while s > 0 {
        let rx = (x & s > 0) as u32;
        let ry = (y & s > 0) as u32;
        d += (s as u64) * (s as u64) * ((3 * rx) ^ ry) as u64;
        if ry == 0 {
            if rx == 1 {
                x = s.wrapping_sub(1).wrapping_sub(x) & (s.wrapping_mul(2).wrapping_sub(1));
                y = s.wrapping_sub(1).wrapping_sub(y) & (s.wrapping_mul(2).wrapping_sub(1));
            }
            std::mem::swap(&mut x, &mut y);
        }
        s >>= 1;
    }
    d
}
