//! Uniform bucket grid for nearest-point queries.

use super::point::{Point2, Rect};

#[derive(Debug, Clone)]
pub struct BucketGrid {
    origin: Point2<f64>,
    cell: f64,
    nx: usize,
    ny: usize,
    start: Vec<u32>,
    items: Vec<u32>,
}

impl BucketGrid {
    /// Buckets sized for roughly two points each over `bounds`.
    pub fn new(points: &[Point2<f64>], bounds: &Rect<f64>) -> Self {
        let n = points.len().max(1);
        let area = bounds.area().max(1e-12);
        let cell = (2.0 * area / n as f64).sqrt().max(1e-9);
        let nx = ((bounds.width() / cell).ceil() as usize).clamp(1, 1 << 15);
        let ny = ((bounds.height() / cell).ceil() as usize).clamp(1, 1 << 15);
        let mut grid = Self {
            origin: Point2::new(bounds.x_min, bounds.y_min),
            cell,
            nx,
            ny,
            start: vec![0; nx * ny + 1],
            items: vec![0; points.len()],
        };
        for p in points {
            let b = grid.bucket_of(*p);
            grid.start[b + 1] += 1;
        }
        for b in 0..nx * ny {
            grid.start[b + 1] += grid.start[b];
        }
        let mut fill = grid.start.clone();
        for (i, p) in points.iter().enumerate() {
            let b = grid.bucket_of(*p);
            grid.items[fill[b] as usize] = i as u32;
            fill[b] += 1;
        }
        grid
    }

    #[inline]
    fn coords(&self, p: Point2<f64>) -> (usize, usize) {
        let fx = ((p.x - self.origin.x) / self.cell).floor();
        let fy = ((p.y - self.origin.y) / self.cell).floor();
        let bx = if fx < 0.0 { 0 } else { (fx as usize).min(self.nx - 1) };
        let by = if fy < 0.0 { 0 } else { (fy as usize).min(self.ny - 1) };
        (bx, by)
    }

    #[inline]
    fn bucket_of(&self, p: Point2<f64>) -> usize {
        let (bx, by) = self.coords(p);
        by * self.nx + bx
    }

    #[inline]
    fn bucket(&self, bx: usize, by: usize) -> &[u32] {
        let b = by * self.nx + bx;
        &self.items[self.start[b] as usize..self.start[b + 1] as usize]
    }

    /// Index of the nearest point, ties to the lowest index. `None` only for
    /// an empty point set.
    pub fn nearest(&self, points: &[Point2<f64>], q: Point2<f64>) -> Option<u32> {
        if points.is_empty() {
            return None;
        }
        let (cx, cy) = self.coords(q);
        let mut best: Option<(f64, u32)> = None;
        let max_ring = self.nx.max(self.ny);
        for ring in 0..=max_ring {
            let x0 = cx as isize - ring as isize;
            let x1 = cx as isize + ring as isize;
            let y0 = cy as isize - ring as isize;
            let y1 = cy as isize + ring as isize;
            let visit = |bx: isize, by: isize, best: &mut Option<(f64, u32)>| {
                if bx < 0 || by < 0 || bx >= self.nx as isize || by >= self.ny as isize {
                    return;
                }
                for &i in self.bucket(bx as usize, by as usize) {
                    let d = points[i as usize].dist2(q);
                    match best {
                        Some((bd, bi)) if d > *bd || (d == *bd && i > *bi) => {}
                        _ => *best = Some((d, i)),
                    }
                }
            };
            if ring == 0 {
                visit(x0, y0, &mut best);
            } else {
                for bx in x0..=x1 {
                    visit(bx, y0, &mut best);
                    visit(bx, y1, &mut best);
                }
                for by in y0 + 1..y1 {
                    visit(x0, by, &mut best);
                    visit(x1, by, &mut best);
                }
            }
            if let Some((bd, _)) = best {
                // Later rings are at least ring·cell away from q's bucket.
                let reach = ring as f64 * self.cell - self.outside_offset(q);
                if reach > 0.0 && bd < reach * reach {
                    break;
                }
            }
        }
        best.map(|b| b.1)
    }

    fn outside_offset(&self, q: Point2<f64>) -> f64 {
        let x_max = self.origin.x + self.nx as f64 * self.cell;
        let y_max = self.origin.y + self.ny as f64 * self.cell;
        let dx = (self.origin.x - q.x).max(q.x - x_max).max(0.0);
        let dy = (self.origin.y - q.y).max(q.y - y_max).max(0.0);
        dx.hypot(dy)
    }

    /// Indices of points in buckets overlapping `r`.
    pub fn candidates_in(&self, r: &Rect<f64>, mut f: impl FnMut(u32)) {
        let (x0, y0) = self.coords(Point2::new(r.x_min, r.y_min));
        let (x1, y1) = self.coords(Point2::new(r.x_max, r.y_max));
        for by in y0..=y1 {
            for bx in x0..=x1 {
                for &i in self.bucket(bx, by) {
                    f(i);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nearest_matches_linear_scan() {
        let mut s = 99u64;
        let mut next = || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (s >> 11) as f64 / (1u64 << 53) as f64
        };
        let bounds = Rect::new(0.0, 0.0, 30.0, 20.0);
        let pts: Vec<Point2<f64>> = (0..600).map(|_| Point2::new(next() * 30.0, next() * 20.0)).collect();
        let grid = BucketGrid::new(&pts, &bounds);
        for _ in 0..2000 {
            let q = Point2::new(next() * 34.0 - 2.0, next() * 24.0 - 2.0);
            let brute = (0..pts.len() as u32)
                .min_by(|&a, &b| pts[a as usize].dist2(q).total_cmp(&pts[b as usize].dist2(q)).then(a.cmp(&b)))
                .unwrap();
            assert_eq!(grid.nearest(&pts, q), Some(brute));
        }
    }

    #[test]
    fn ties_go_to_lowest_index() {
        let pts = vec![
            Point2::new(5.0, 5.0),
            Point2::new(9.0, 9.0),
            Point2::new(2.0, 0.0),
            Point2::new(0.0, 0.0),
            Point2::new(8.0, 1.0),
            Point2::new(7.0, 7.0),
            Point2::new(1.0, 9.0),
            Point2::new(4.0, 0.0),
        ];
        let grid = BucketGrid::new(&pts, &Rect::new(0.0, 0.0, 10.0, 10.0));
        assert_eq!(grid.nearest(&pts, Point2::new(1.0, 0.0)), Some(2));
        assert_eq!(grid.nearest(&pts, Point2::new(3.0, 0.0)), Some(2));
    }
}
