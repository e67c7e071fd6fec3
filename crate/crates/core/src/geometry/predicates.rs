//! Exact orientation and in-circle tests, with the in-circle tie broken by
//! symbolic perturbation of the paraboloid lift ordered by point index.
//!
//! Point `i` is lifted to `|p_i|² + ε_i` with `ε_0 ≫ ε_1 ≫ …`. When the exact
//! in-circle determinant vanishes its sign is taken from the coefficient of
//! the dominant (lowest-index) perturbation with a nonzero cofactor.

use std::cmp::Ordering;

use robust::Coord;

use super::point::Point2;

#[inline]
fn c(p: Point2<f64>) -> Coord<f64> {
    Coord { x: p.x, y: p.y }
}

/// Exact sign of the orientation of `(a, b, q)`: positive when counter-clockwise.
#[inline]
pub fn orient(a: Point2<f64>, b: Point2<f64>, q: Point2<f64>) -> Ordering {
    let v = robust::orient2d(c(a), c(b), c(q));
    v.partial_cmp(&0.0).unwrap_or(Ordering::Equal)
}

/// Exact in-circle determinant sign: positive when `d` lies inside the
/// circumcircle of the counter-clockwise triangle `(a, b, c)`.
#[inline]
pub fn incircle_exact(a: Point2<f64>, b: Point2<f64>, cc: Point2<f64>, d: Point2<f64>) -> Ordering {
    let v = robust::incircle(c(a), c(b), c(cc), c(d));
    v.partial_cmp(&0.0).unwrap_or(Ordering::Equal)
}

/// Perturbed in-circle test; never returns `Equal` when `(a, b, c)` is a
/// proper triangle. `ia..id` are the global indices used for tie-breaking.
#[allow(clippy::too_many_arguments)]
#[inline]
pub fn incircle_sos(a: Point2<f64>, ia: u32, b: Point2<f64>, ib: u32, cc: Point2<f64>, ic: u32, d: Point2<f64>, id: u32) -> Ordering {
    let exact = incircle_exact(a, b, cc, d);
    if exact != Ordering::Equal {
        return exact;
    }
    incircle_tie(a, ia, b, ib, cc, ic, d, id)
}

#[allow(clippy::too_many_arguments)]
#[cold]
fn incircle_tie(a: Point2<f64>, ia: u32, b: Point2<f64>, ib: u32, cc: Point2<f64>, ic: u32, d: Point2<f64>, id: u32) -> Ordering {
    // Coefficient of each lift in the 4×4 determinant (up to a common
    // positive factor).
    let mut terms = [(ia, orient(d, b, cc)), (ib, orient(a, d, cc)), (ic, orient(a, b, d)), (id, orient(a, b, cc).reverse())];
    terms.sort_unstable_by_key(|t| t.0);
    terms.iter().map(|t| t.1).find(|o| *o != Ordering::Equal).unwrap_or(Ordering::Equal)
}

#[cfg(test)]
mod tests {
    use super::*;

    type P = Point2<f64>;

    #[test]
    fn orientation_signs() {
        let a = P::new(0.0, 0.0);
        let b = P::new(1.0, 0.0);
        assert_eq!(orient(a, b, P::new(0.0, 1.0)), Ordering::Greater);
        assert_eq!(orient(a, b, P::new(0.0, -1.0)), Ordering::Less);
        assert_eq!(orient(a, b, P::new(3.0, 0.0)), Ordering::Equal);
    }

    #[test]
    fn incircle_generic() {
        let (a, b, c) = (P::new(0.0, 0.0), P::new(1.0, 0.0), P::new(0.0, 1.0));
        assert_eq!(incircle_exact(a, b, c, P::new(0.3, 0.3)), Ordering::Greater);
        assert_eq!(incircle_exact(a, b, c, P::new(3.0, 3.0)), Ordering::Less);
    }

    #[test]
    fn cocircular_tie_is_decided_by_lowest_index() {
        // Unit square corners: exactly cocircular.
        let p = [P::new(0.0, 0.0), P::new(1.0, 0.0), P::new(1.0, 1.0), P::new(0.0, 1.0)];
        assert_eq!(incircle_exact(p[0], p[1], p[2], p[3]), Ordering::Equal);
        // Point 0 carries the largest lift, so 3 is "inside" circle (0,1,2)
        // and the diagonal 0-2 is illegal.
        assert_eq!(incircle_sos(p[0], 0, p[1], 1, p[2], 2, p[3], 3), Ordering::Greater);
        // From the other diagonal: 0 is outside the circle of (1,2,3).
        assert_eq!(incircle_sos(p[1], 1, p[2], 2, p[3], 3, p[0], 0), Ordering::Less);
    }

    #[test]
    fn perturbation_is_antisymmetric_under_rotation_of_roles() {
        let p = [P::new(-1.0, 0.0), P::new(0.0, -1.0), P::new(1.0, 0.0), P::new(0.0, 1.0)];
        // Cyclic relabelling of the triangle keeps the answer.
        let s1 = incircle_sos(p[0], 4, p[1], 9, p[2], 2, p[3], 7);
        let s2 = incircle_sos(p[1], 9, p[2], 2, p[0], 4, p[3], 7);
        assert_eq!(s1, s2);
        assert_ne!(s1, Ordering::Equal);
    }
}
