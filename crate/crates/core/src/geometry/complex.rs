//! Voronoi cells clipped to a region.
//!
//! A piece is a connected component of `cell ∩ region`. Pieces are built from
//! sub-pieces (cell ∩ convex part) glued across cuts. Two pieces are adjacent
//! when they share a boundary segment longer than [`CONTACT_EPS`]; the same
//! rule decides which region sides a piece touches.

use std::fmt::Write as _;

use super::point::{Point2, Rect};
use super::polygon::{clip_convex, signed_area};
use super::region::{EdgeTag, Region};
use super::tessellation::{EdgeLabel, TessellationIndex};
use super::{AREA_EPS, CONTACT_EPS};
use crate::unionfind::UnionFind;
use crate::GeometryError;

type P = Point2<f64>;

const NO_SLOT: u32 = u32::MAX;

/// Positive-length stretch of region side `side` on a piece boundary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Contact {
    pub side: u32,
    pub a: P,
    pub b: P,
}

impl Contact {
    pub fn midpoint(&self) -> P {
        self.a.midpoint(self.b)
    }

    pub fn length(&self) -> f64 {
        self.a.dist(self.b)
    }
}

/// Intersection of one cell with one convex part of the region.
#[derive(Debug, Clone)]
/// Its polygon is `ClippedComplex::sub_verts(s)`.
pub struct SubPiece {
    pub piece: u32,
    pub part: u32,
    start: u32,
    end: u32,
}

#[derive(Debug, Clone)]
pub struct ClippedComplex {
    owner: Vec<u32>,
    area: Vec<f64>,
    touches: Vec<u64>,
    adj_start: Vec<u32>,
    adj: Vec<u32>,
    contact_start: Vec<u32>,
    contacts: Vec<Contact>,
    subs: Vec<SubPiece>,
    sub_verts: Vec<P>,
    /// `RegionLine(k)` refers to line `k` of the sub-piece's part.
    sub_labels: Vec<EdgeLabel>,
    region_area: f64,
}

struct CutRecord {
    cut: u32,
    part: u32,
    sub: u32,
    lo: f64,
    hi: f64,
}

impl ClippedComplex {
    /// Clip every cell meeting `region`. The region must lie inside the
    /// index window.
    pub fn build(index: &TessellationIndex, region: &Region) -> Result<Self, GeometryError> {
        let tol = region.tol();
        if !index.window().inflate(tol).contains_rect(region.bbox()) {
            return Err(GeometryError::OutsideWindow);
        }
        let n = index.len();
        let rb = region.bbox();
        let candidates: Vec<u32> = (0..n as u32).filter(|&i| index.cell_bbox(i).intersects(rb)).collect();

        let nc = candidates.len();
        let mut subs: Vec<SubPiece> = Vec::with_capacity(nc);
        let mut sub_verts: Vec<P> = Vec::with_capacity(7 * nc);
        let mut sub_labels: Vec<EdgeLabel> = Vec::with_capacity(7 * nc);
        let mut sub_owner: Vec<u32> = Vec::with_capacity(nc);
        let mut edges: Vec<(u32, u32)> = Vec::with_capacity(4 * nc);
        let mut raw_contacts: Vec<(u32, Contact)> = Vec::new();
        let mut cut_records: Vec<CutRecord> = Vec::new();
        let mut slot = vec![NO_SLOT; n];
        let (mut va, mut la) = (Vec::with_capacity(16), Vec::with_capacity(16));
        let (mut vb, mut lb) = (Vec::with_capacity(16), Vec::with_capacity(16));

        for (pi, part) in region.parts().iter().enumerate() {
            let first_sub = subs.len();
            for &i in &candidates {
                if !index.cell_bbox(i).intersects(&part.bbox) {
                    continue;
                }
                let (cv, cl) = index.cell(i);
                // Cells well inside the part need no clipping.
                let cb = index.cell_bbox(i);
                let interior = part.lines.iter().all(|line| cb.corners().iter().all(|&c| line.hp.depth(c) > tol));
                if interior {
                    slot[i as usize] = subs.len() as u32;
                    sub_owner.push(i);
                    let start = sub_verts.len() as u32;
                    sub_verts.extend_from_slice(cv);
                    sub_labels.extend_from_slice(cl);
                    subs.push(SubPiece { piece: 0, part: pi as u32, start, end: sub_verts.len() as u32 });
                    continue;
                }
                va.clear();
                la.clear();
                va.extend_from_slice(cv);
                la.extend_from_slice(cl);
                let mut alive = true;
                for (k, line) in part.lines.iter().enumerate() {
                    if !clip_convex(&va, &la, &line.hp, EdgeLabel::RegionLine(k as u32), tol, &mut vb, &mut lb) {
                        alive = false;
                        break;
                    }
                    std::mem::swap(&mut va, &mut vb);
                    std::mem::swap(&mut la, &mut lb);
                }
                if !alive || signed_area(&va) <= AREA_EPS {
                    continue;
                }
                // Cell edges lying exactly on a part line count as region boundary.
                let m = va.len();
                for e in 0..m {
                    if matches!(la[e], EdgeLabel::RegionLine(_)) {
                        continue;
                    }
                    let (a, b) = (va[e], va[(e + 1) % m]);
                    for (k, line) in part.lines.iter().enumerate() {
                        if line.hp.depth(a).abs() <= tol && line.hp.depth(b).abs() <= tol && (b - a).dot(line.dir) > 0.0 {
                            la[e] = EdgeLabel::RegionLine(k as u32);
                            break;
                        }
                    }
                }
                slot[i as usize] = subs.len() as u32;
                sub_owner.push(i);
                let start = sub_verts.len() as u32;
                sub_verts.extend_from_slice(&va);
                sub_labels.extend_from_slice(&la);
                subs.push(SubPiece { piece: 0, part: pi as u32, start, end: sub_verts.len() as u32 });
            }

            for s in first_sub..subs.len() {
                let sp = &subs[s];
                let verts = &sub_verts[sp.start as usize..sp.end as usize];
                let labels = &sub_labels[sp.start as usize..sp.end as usize];
                let m = verts.len();
                for e in 0..m {
                    let (a, b) = (verts[e], verts[if e + 1 == m { 0 } else { e + 1 }]);
                    match labels[e] {
                        EdgeLabel::Neighbor(j) => {
                            let t = slot.get(j as usize).copied().unwrap_or(NO_SLOT);
                            // Each shared edge is seen from both cells; keep one copy.
                            if t != NO_SLOT && t > s as u32 && a.dist2(b) > CONTACT_EPS * CONTACT_EPS {
                                edges.push((s as u32, t));
                            }
                        }
                        EdgeLabel::RegionLine(k) => {
                            let line = &part.lines[k as usize];
                            let (ta, tb) = (line.param(a), line.param(b));
                            for &(t0, t1, tag) in &line.segs {
                                let lo = ta.max(t0);
                                let hi = tb.min(t1);
                                if hi - lo <= CONTACT_EPS {
                                    continue;
                                }
                                match tag {
                                    EdgeTag::Side(side) => {
                                        raw_contacts.push((s as u32, Contact { side, a: line.at(lo), b: line.at(hi) }));
                                    }
                                    EdgeTag::Cut(c) => {
                                        let (ca, cb) = region.cuts()[c as usize];
                                        let d = cb - ca;
                                        let len = d.norm();
                                        let u = |p: P| (p - ca).dot(d) / len;
                                        let (u0, u1) = (u(line.at(lo)), u(line.at(hi)));
                                        cut_records.push(CutRecord {
                                            cut: c,
                                            part: pi as u32,
                                            sub: s as u32,
                                            lo: u0.min(u1),
                                            hi: u0.max(u1),
                                        });
                                    }
                                }
                            }
                        }
                        EdgeLabel::Window => {}
                    }
                }
            }
            for &i in &sub_owner[first_sub..] {
                slot[i as usize] = NO_SLOT;
            }
        }

        match_cuts(&mut cut_records, &mut edges);

        let mut uf = UnionFind::new(subs.len());
        for &(s, t) in &edges {
            if sub_owner[s as usize] == sub_owner[t as usize] {
                uf.union(s, t);
            }
        }
        let mut piece_of_root = vec![NO_SLOT; subs.len()];
        let mut owner = Vec::new();
        let mut area = Vec::new();
        for s in 0..subs.len() {
            let r = uf.find(s as u32) as usize;
            if piece_of_root[r] == NO_SLOT {
                piece_of_root[r] = owner.len() as u32;
                owner.push(sub_owner[s]);
                area.push(0.0);
            }
            let pc = piece_of_root[r];
            subs[s].piece = pc;
            area[pc as usize] += signed_area(&sub_verts[subs[s].start as usize..subs[s].end as usize]);
        }
        let np = owner.len();

        // Bucket both directions of every edge, then sort and dedup each
        // neighbour list in place.
        let mut deg = vec![0u32; np + 1];
        for &(s, t) in &edges {
            let (a, b) = (subs[s as usize].piece, subs[t as usize].piece);
            if a != b {
                deg[a as usize + 1] += 1;
                deg[b as usize + 1] += 1;
            }
        }
        for k in 0..np {
            deg[k + 1] += deg[k];
        }
        let mut fill = deg.clone();
        let mut raw = vec![0u32; deg[np] as usize];
        for &(s, t) in &edges {
            let (a, b) = (subs[s as usize].piece, subs[t as usize].piece);
            if a != b {
                raw[fill[a as usize] as usize] = b;
                fill[a as usize] += 1;
                raw[fill[b as usize] as usize] = a;
                fill[b as usize] += 1;
            }
        }
        let mut adj_start = Vec::with_capacity(np + 1);
        let mut adj = Vec::with_capacity(raw.len() / 2);
        adj_start.push(0u32);
        for k in 0..np {
            let list = &mut raw[deg[k] as usize..deg[k + 1] as usize];
            list.sort_unstable();
            let mut last = u32::MAX;
            for &b in list.iter() {
                if b != last {
                    adj.push(b);
                    last = b;
                }
            }
            adj_start.push(adj.len() as u32);
        }

        let mut touches = vec![0u64; np];
        let mut keyed: Vec<(u32, Contact)> = raw_contacts.into_iter().map(|(s, c)| (subs[s as usize].piece, c)).collect();
        keyed.sort_by_key(|(pc, _)| *pc);
        let mut contact_start = vec![0u32; np + 1];
        for (pc, c) in &keyed {
            touches[*pc as usize] |= 1u64 << c.side;
            contact_start[*pc as usize + 1] += 1;
        }
        for k in 0..np {
            contact_start[k + 1] += contact_start[k];
        }
        let contacts = keyed.into_iter().map(|(_, c)| c).collect();

        Ok(Self { owner, area, touches, adj_start, adj, contact_start, contacts, subs, sub_verts, sub_labels, region_area: region.area() })
    }

    pub fn num_pieces(&self) -> usize {
        self.owner.len()
    }

    /// Owning point of each piece.
    pub fn owners(&self) -> &[u32] {
        &self.owner
    }

    pub fn owner(&self, pc: u32) -> u32 {
        self.owner[pc as usize]
    }

    pub fn area(&self, pc: u32) -> f64 {
        self.area[pc as usize]
    }

    pub fn total_area(&self) -> f64 {
        self.area.iter().sum()
    }

    pub fn region_area(&self) -> f64 {
        self.region_area
    }

    /// Bit `s` is set when the piece touches side `s` with positive length.
    pub fn touches(&self, pc: u32) -> u64 {
        self.touches[pc as usize]
    }

    pub fn neighbors(&self, pc: u32) -> &[u32] {
        &self.adj[self.adj_start[pc as usize] as usize..self.adj_start[pc as usize + 1] as usize]
    }

    pub fn num_adjacencies(&self) -> usize {
        self.adj.len() / 2
    }

    pub fn contacts(&self, pc: u32) -> &[Contact] {
        &self.contacts[self.contact_start[pc as usize] as usize..self.contact_start[pc as usize + 1] as usize]
    }

    pub fn sub_pieces(&self) -> &[SubPiece] {
        &self.subs
    }

    pub fn sub_verts(&self, s: &SubPiece) -> &[P] {
        &self.sub_verts[s.start as usize..s.end as usize]
    }

    pub fn sub_labels(&self, s: &SubPiece) -> &[EdgeLabel] {
        &self.sub_labels[s.start as usize..s.end as usize]
    }

    /// Bounding box of a piece.
    pub fn piece_bbox(&self, pc: u32) -> Rect<f64> {
        let mut r = Rect::empty();
        for s in self.subs.iter().filter(|s| s.piece == pc) {
            for &v in self.sub_verts(s) {
                r.include(v);
            }
        }
        r
    }

    /// One polygon per line: `piece owner x0 y0 x1 y1 ...`.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for s in &self.subs {
            let _ = write!(out, "{} {}", s.piece, self.owner[s.piece as usize]);
            for v in self.sub_verts(s) {
                let _ = write!(out, " {} {}", v.x, v.y);
            }
            out.push('\n');
        }
        out
    }
}

/// Pair sub-pieces on opposite sides of each cut whose contact intervals
/// overlap with positive length.
fn match_cuts(records: &mut [CutRecord], edges: &mut Vec<(u32, u32)>) {
    records.sort_by(|a, b| (a.cut, a.part).cmp(&(b.cut, b.part)).then(a.lo.total_cmp(&b.lo)));
    let mut start = 0;
    while start < records.len() {
        let cut = records[start].cut;
        let mut end = start;
        while end < records.len() && records[end].cut == cut {
            end += 1;
        }
        let group = &records[start..end];
        // Split by part; every cut borders exactly two parts.
        let split = group.iter().position(|r| r.part != group[0].part).unwrap_or(group.len());
        let (xs, ys) = group.split_at(split);
        let (mut i, mut j) = (0, 0);
        while i < xs.len() && j < ys.len() {
            let lo = xs[i].lo.max(ys[j].lo);
            let hi = xs[i].hi.min(ys[j].hi);
            if hi - lo > CONTACT_EPS {
                edges.push((xs[i].sub, ys[j].sub));
            }
            if xs[i].hi < ys[j].hi {
                i += 1;
            } else {
                j += 1;
            }
        }
        start = end;
    }
}
