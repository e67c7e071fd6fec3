//! Convex polygons whose edges carry labels, and half-plane clipping that
//! keeps track of where every output edge came from.
//!
//! Edge `i` of a polygon runs from `verts[i]` to `verts[(i + 1) % n]` and has
//! label `labels[i]`. Vertices are counter-clockwise.

use super::point::{Point2, Rect};
use crate::scalar::Scalar;

/// `{ p : normal · p <= offset }`, with `normal` of unit length.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HalfPlane<T> {
    pub normal: Point2<T>,
    pub offset: T,
}

impl<T: Scalar> HalfPlane<T> {
    /// The closed half-plane to the left of the directed line `a → b`.
    pub fn left_of(a: Point2<T>, b: Point2<T>) -> Self {
        let d = b - a;
        let len = d.norm();
        let normal = Point2::new(d.y / len, -d.x / len);
        Self { normal, offset: normal.dot(a) }
    }

    /// Signed distance to the boundary line, positive inside.
    #[inline]
    pub fn depth(&self, p: Point2<T>) -> T {
        self.offset - self.normal.dot(p)
    }

    /// Unit direction of the boundary line, interior on its left.
    #[inline]
    pub fn direction(&self) -> Point2<T> {
        Point2::new(-self.normal.y, self.normal.x)
    }
}

/// Clip the convex polygon `(verts, labels)` by `hp`; edges created along the
/// clipping line get `cut_label`. Vertices within `tol` of the line count as
/// inside. Output buffers are cleared first. Returns `false` when nothing with
/// at least three vertices survives.
pub fn clip_convex<T: Scalar, L: Copy>(
    verts: &[Point2<T>],
    labels: &[L],
    hp: &HalfPlane<T>,
    cut_label: L,
    tol: T,
    out_verts: &mut Vec<Point2<T>>,
    out_labels: &mut Vec<L>,
) -> bool {
    out_verts.clear();
    out_labels.clear();
    let n = verts.len();
    if n < 3 {
        return false;
    }
    if verts.iter().all(|&v| hp.depth(v) >= -tol) {
        out_verts.extend_from_slice(verts);
        out_labels.extend_from_slice(labels);
        return true;
    }
    let mut d_cur = hp.depth(verts[0]);
    for i in 0..n {
        let j = if i + 1 == n { 0 } else { i + 1 };
        let d_next = hp.depth(verts[j]);
        let in_cur = d_cur >= -tol;
        let in_next = d_next >= -tol;
        if in_cur {
            out_verts.push(verts[i]);
            out_labels.push(labels[i]);
            if !in_next {
                let t = d_cur / (d_cur - d_next);
                out_verts.push(verts[i].lerp(verts[j], t));
                out_labels.push(cut_label);
            }
        } else if in_next {
            let t = d_cur / (d_cur - d_next);
            out_verts.push(verts[i].lerp(verts[j], t));
            out_labels.push(labels[i]);
        }
        d_cur = d_next;
    }
    out_verts.len() >= 3
}

/// Shoelace area; positive for counter-clockwise polygons.
pub fn signed_area<T: Scalar>(verts: &[Point2<T>]) -> T {
    let n = verts.len();
    if n < 3 {
        return T::zero();
    }
    let o = verts[0];
    let mut acc = T::zero();
    for i in 1..n - 1 {
        acc += (verts[i] - o).cross(verts[i + 1] - o);
    }
    acc * T::lit(0.5)
}

pub fn bounding_rect<T: Scalar>(verts: &[Point2<T>]) -> Rect<T> {
    let mut r = Rect::empty();
    for &v in verts {
        r.include(v);
    }
    r
}

/// Parameter of `p` along the directed segment `a → b`, in units of length
/// from `a`.
#[inline]
pub fn param_along<T: Scalar>(a: Point2<T>, b: Point2<T>, p: Point2<T>) -> T {
    let d = b - a;
    (p - a).dot(d) / d.norm()
}

/// Owned labelled convex polygon.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledPolygon<T, L> {
    pub verts: Vec<Point2<T>>,
    pub labels: Vec<L>,
}

impl<T: Scalar, L: Copy> LabeledPolygon<T, L> {
    pub fn new(verts: Vec<Point2<T>>, labels: Vec<L>) -> Self {
        assert_eq!(verts.len(), labels.len());
        Self { verts, labels }
    }

    pub fn from_rect(r: &Rect<T>, labels: [L; 4]) -> Self {
        Self::new(r.corners().to_vec(), labels.to_vec())
    }

    pub fn area(&self) -> T {
        signed_area(&self.verts)
    }

    pub fn bbox(&self) -> Rect<T> {
        bounding_rect(&self.verts)
    }

    pub fn is_empty(&self) -> bool {
        self.verts.len() < 3
    }

    pub fn edges(&self) -> impl Iterator<Item = (Point2<T>, Point2<T>, L)> + '_ {
        let n = self.verts.len();
        (0..n).map(move |i| (self.verts[i], self.verts[(i + 1) % n], self.labels[i]))
    }

    pub fn clip(&self, hp: &HalfPlane<T>, cut_label: L, tol: T) -> Self {
        let mut v = Vec::with_capacity(self.verts.len() + 1);
        let mut l = Vec::with_capacity(self.verts.len() + 1);
        clip_convex(&self.verts, &self.labels, hp, cut_label, tol, &mut v, &mut l);
        if v.len() < 3 {
            v.clear();
            l.clear();
        }
        Self { verts: v, labels: l }
    }

    pub fn contains(&self, p: Point2<T>, tol: T) -> bool {
        if self.is_empty() {
            return false;
        }
        self.edges().all(|(a, b, _)| HalfPlane::left_of(a, b).depth(p) >= -tol)
    }
}
