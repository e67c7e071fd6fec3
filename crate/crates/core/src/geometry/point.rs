use std::ops::{Add, Mul, Neg, Sub};

use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point2<T> {
    pub x: T,
    pub y: T,
}

impl<T: Scalar> Point2<T> {
    #[inline]
    pub const fn new(x: T, y: T) -> Self {
        Self { x, y }
    }

    #[inline]
    pub fn dot(self, o: Self) -> T {
        self.x * o.x + self.y * o.y
    }

    /// z-component of the 3D cross product.
    #[inline]
    pub fn cross(self, o: Self) -> T {
        self.x * o.y - self.y * o.x
    }

    #[inline]
    pub fn norm2(self) -> T {
        self.dot(self)
    }

    #[inline]
    pub fn norm(self) -> T {
        self.norm2().sqrt()
    }

    #[inline]
    pub fn dist2(self, o: Self) -> T {
        (self - o).norm2()
    }

    #[inline]
    pub fn dist(self, o: Self) -> T {
        self.dist2(o).sqrt()
    }

    #[inline]
    pub fn lerp(self, o: Self, t: T) -> Self {
        Self::new(self.x + (o.x - self.x) * t, self.y + (o.y - self.y) * t)
    }

    #[inline]
    pub fn midpoint(self, o: Self) -> Self {
        self.lerp(o, T::lit(0.5))
    }

    /// Angle of `self - center` in `[0, 2π)`.
    pub fn angle_around(self, center: Self) -> T {
        let d = self - center;
        let a = d.y.atan2(d.x);
        if a < T::zero() {
            a + T::lit(std::f64::consts::TAU)
        } else {
            a
        }
    }
}

impl<T: Scalar> Add for Point2<T> {
    type Output = Self;
    #[inline]
    fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y)
    }
}

impl<T: Scalar> Sub for Point2<T> {
    type Output = Self;
    #[inline]
    fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y)
    }
}

impl<T: Scalar> Mul<T> for Point2<T> {
    type Output = Self;
    #[inline]
    fn mul(self, s: T) -> Self {
        Self::new(self.x * s, self.y * s)
    }
}

impl<T: Scalar> Neg for Point2<T> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y)
    }
}

/// Axis-aligned rectangle `[x_min, x_max] × [y_min, y_max]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect<T> {
    pub x_min: T,
    pub y_min: T,
    pub x_max: T,
    pub y_max: T,
}

impl<T: Scalar> Rect<T> {
    pub fn new(x_min: T, y_min: T, x_max: T, y_max: T) -> Self {
        Self { x_min, y_min, x_max, y_max }
    }

    /// `[-half_w, half_w] × [-half_h, half_h]` around `c`.
    pub fn centered(c: Point2<T>, half_w: T, half_h: T) -> Self {
        Self::new(c.x - half_w, c.y - half_h, c.x + half_w, c.y + half_h)
    }

    pub fn empty() -> Self {
        Self::new(T::infinity(), T::infinity(), T::neg_infinity(), T::neg_infinity())
    }

    pub fn width(&self) -> T {
        self.x_max - self.x_min
    }

    pub fn height(&self) -> T {
        self.y_max - self.y_min
    }

    pub fn area(&self) -> T {
        if self.is_empty() {
            T::zero()
        } else {
            self.width() * self.height()
        }
    }

    pub fn is_empty(&self) -> bool {
        !(self.x_min < self.x_max && self.y_min < self.y_max)
    }

    pub fn diameter(&self) -> T {
        self.width().hypot(self.height())
    }

    pub fn center(&self) -> Point2<T> {
        Point2::new(self.x_min, self.y_min).midpoint(Point2::new(self.x_max, self.y_max))
    }

    pub fn contains(&self, p: Point2<T>) -> bool {
        p.x >= self.x_min && p.x <= self.x_max && p.y >= self.y_min && p.y <= self.y_max
    }

    pub fn contains_rect(&self, o: &Self) -> bool {
        o.x_min >= self.x_min && o.x_max <= self.x_max && o.y_min >= self.y_min && o.y_max <= self.y_max
    }

    pub fn intersects(&self, o: &Self) -> bool {
        self.x_min <= o.x_max && o.x_min <= self.x_max && self.y_min <= o.y_max && o.y_min <= self.y_max
    }

    pub fn intersection(&self, o: &Self) -> Self {
        Self::new(self.x_min.max(o.x_min), self.y_min.max(o.y_min), self.x_max.min(o.x_max), self.y_max.min(o.y_max))
    }

    pub fn inflate(&self, d: T) -> Self {
        Self::new(self.x_min - d, self.y_min - d, self.x_max + d, self.y_max + d)
    }

    pub fn include(&mut self, p: Point2<T>) {
        self.x_min = self.x_min.min(p.x);
        self.y_min = self.y_min.min(p.y);
        self.x_max = self.x_max.max(p.x);
        self.y_max = self.y_max.max(p.y);
    }

    pub fn union(&self, o: &Self) -> Self {
        Self::new(self.x_min.min(o.x_min), self.y_min.min(o.y_min), self.x_max.max(o.x_max), self.y_max.max(o.y_max))
    }

    /// Euclidean distance between the two rectangles (0 when they overlap).
    pub fn distance_to(&self, o: &Self) -> T {
        let dx = (o.x_min - self.x_max).max(self.x_min - o.x_max).max(T::zero());
        let dy = (o.y_min - self.y_max).max(self.y_min - o.y_max).max(T::zero());
        dx.hypot(dy)
    }

    /// Corners in counter-clockwise order starting at the lower-left one.
    pub fn corners(&self) -> [Point2<T>; 4] {
        [
            Point2::new(self.x_min, self.y_min),
            Point2::new(self.x_max, self.y_min),
            Point2::new(self.x_max, self.y_max),
            Point2::new(self.x_min, self.y_max),
        ]
    }
}
