//! Poisson environments in a padded window, independent colourings, and
//! region-restricted resampling.

use std::sync::Arc;

use crate::geometry::delaunay::spatial_order;
use crate::geometry::point::{Point2, Rect};
use crate::randomness::Stream;
use crate::SamplingError;

type P = Point2<f64>;

/// Region of interest plus a padding band. Points are sampled in the dilated
/// window; geometric queries are meant for the region of interest.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window {
    pub roi: Rect<f64>,
    pub padding: f64,
}

impl Window {
    pub fn new(roi: Rect<f64>, padding: f64) -> Result<Self, SamplingError> {
        let finite = [roi.x_min, roi.x_max, roi.y_min, roi.y_max, padding].iter().all(|v| v.is_finite());
        if !finite || !(roi.x_min < roi.x_max && roi.y_min < roi.y_max) {
            return Err(SamplingError::InvalidWindow(format!("need x_min < x_max and y_min < y_max, got {roi:?}")));
        }
        if !(padding >= 0.0) {
            return Err(SamplingError::InvalidWindow(format!("padding {padding} must be non-negative")));
        }
        Ok(Self { roi, padding })
    }

    /// Window with `default_padding` for this region of interest.
    pub fn padded(roi: Rect<f64>) -> Result<Self, SamplingError> {
        Self::new(roi, default_padding(roi.diameter()))
    }

    pub fn dilated(&self) -> Rect<f64> {
        self.roi.inflate(self.padding)
    }

    /// Union bound on the probability that some cell meeting the region of
    /// interest has its nucleus outside the dilated window.
    ///
    /// If every square of side `pad/√2` of a grid over the region of interest
    /// holds a point, every location of the region is within `pad` of a
    /// point, so no cell reaches past the padding.
    pub fn truncation_bound(&self) -> f64 {
        if self.padding == 0.0 {
            return 1.0;
        }
        let s = self.padding / std::f64::consts::SQRT_2;
        let squares = (self.roi.width() / s).ceil() * (self.roi.height() / s).ceil();
        (squares * (-s * s).exp()).min(1.0)
    }
}

/// `max(6, 3·log10(diameter))`.
pub fn default_padding(roi_diameter: f64) -> f64 {
    (3.0 * roi_diameter.max(1.0).log10()).max(6.0)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Provenance {
    Sampled {
        master_seed: u64,
        tag: String,
        sample_index: u64,
    },
    Explicit,
    /// Derived from another environment by resampling or filling.
    Modified,
}

#[derive(Debug, Clone)]
pub struct Environment {
    points: Vec<P>,
    window: Window,
    provenance: Provenance,
}

impl Environment {
    /// Literal point list; points must be distinct and inside the dilated
    /// window.
    pub fn explicit(points: Vec<P>, window: Window) -> Result<Self, SamplingError> {
        Self::checked(points, window, Provenance::Explicit)
    }

    fn checked(points: Vec<P>, window: Window, provenance: Provenance) -> Result<Self, SamplingError> {
        let d = window.dilated();
        if let Some(i) = points.iter().position(|p| !d.contains(*p)) {
            return Err(SamplingError::PointOutsideWindow(i));
        }
        let mut order: Vec<usize> = (0..points.len()).collect();
        order.sort_by(|&a, &b| points[a].x.total_cmp(&points[b].x).then(points[a].y.total_cmp(&points[b].y)));
        for w in order.windows(2) {
            if points[w[0]] == points[w[1]] {
                return Err(SamplingError::DuplicatePoint { first: w[0].min(w[1]), second: w[0].max(w[1]) });
            }
        }
        Ok(Self { points, window, provenance })
    }

    pub fn points(&self) -> &[P] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }
}

/// Poisson process of intensity one in the dilated window.
pub fn sample_environment(window: &Window, stream: &mut Stream) -> Environment {
    let d = window.dilated();
    let n = stream.poisson(d.area());
    let raw: Vec<P> = (0..n).map(|_| P::new(stream.uniform_in(d.x_min, d.x_max), stream.uniform_in(d.y_min, d.y_max))).collect();
    // Stored in spatial order so that per-point arrays are walked locally.
    let points = spatial_order(&raw, &d).into_iter().map(|i| raw[i as usize]).collect();
    Environment { points, window: *window, provenance: Provenance::Explicit }
}

/// As [`sample_environment`], recording the stream address.
pub fn sample_environment_at(window: &Window, seed: &crate::randomness::SeedSpec, sample_index: u64) -> Environment {
    let mut s = seed.stream(sample_index, crate::randomness::Role::Environment);
    let mut env = sample_environment(window, &mut s);
    env.provenance = Provenance::Sampled { master_seed: seed.master_seed, tag: seed.tag.clone(), sample_index };
    env
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(i8)]
pub enum Color {
    Black = 1,
    White = -1,
}

impl Color {
    pub fn flip(self) -> Self {
        match self {
            Color::Black => Color::White,
            Color::White => Color::Black,
        }
    }

    pub fn is_black(self) -> bool {
        self == Color::Black
    }

    /// Coupled colour: black iff `mark < p`.
    pub fn from_mark(mark: f64, p: f64) -> Self {
        if mark < p {
            Color::Black
        } else {
            Color::White
        }
    }
}

/// Environment with one colour per point. When colours come from uniform
/// marks, the marks are kept so the same sample can be re-thresholded at
/// another `p`.
#[derive(Debug, Clone)]
pub struct Configuration {
    env: Arc<Environment>,
    colors: Vec<Color>,
    marks: Option<Vec<f64>>,
    p: f64,
}

fn check_p(p: f64) -> Result<(), SamplingError> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(SamplingError::InvalidProbability(p))
    }
}

/// Independent colouring: each point black with probability `p`.
pub fn sample_coloring(env: Arc<Environment>, p: f64, stream: &mut Stream) -> Result<Configuration, SamplingError> {
    check_p(p)?;
    let marks: Vec<f64> = (0..env.len()).map(|_| stream.uniform()).collect();
    let colors = marks.iter().map(|&m| Color::from_mark(m, p)).collect();
    Ok(Configuration { env, colors, marks: Some(marks), p })
}

impl Configuration {
    /// Explicit colours; `p` is recorded for later resampling.
    pub fn with_colors(env: Arc<Environment>, colors: Vec<Color>, p: f64) -> Result<Self, SamplingError> {
        check_p(p)?;
        if colors.len() != env.len() {
            return Err(SamplingError::ColorCount { colors: colors.len(), points: env.len() });
        }
        Ok(Self { env, colors, marks: None, p })
    }

    /// Every point gets the same colour.
    pub fn uniform_color(env: Arc<Environment>, color: Color) -> Self {
        let p = if color.is_black() { 1.0 } else { 0.0 };
        let colors = vec![color; env.len()];
        Self { env, colors, marks: None, p }
    }

    pub fn env(&self) -> &Environment {
        &self.env
    }

    pub fn env_arc(&self) -> &Arc<Environment> {
        &self.env
    }

    pub fn points(&self) -> &[P] {
        self.env.points()
    }

    pub fn colors(&self) -> &[Color] {
        &self.colors
    }

    pub fn color(&self, i: u32) -> Color {
        self.colors[i as usize]
    }

    pub fn marks(&self) -> Option<&[f64]> {
        self.marks.as_deref()
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn len(&self) -> usize {
        self.colors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.colors.is_empty()
    }

    /// Same marks thresholded at another `p`. Needs marks.
    pub fn at_p(&self, p: f64) -> Option<Self> {
        let marks = self.marks.as_ref()?;
        let colors = marks.iter().map(|&m| Color::from_mark(m, p)).collect();
        Some(Self { env: self.env.clone(), colors, marks: Some(marks.clone()), p })
    }

    /// Copy with point `i` recoloured.
    pub fn with_color(&self, i: u32, c: Color) -> Self {
        let mut out = self.clone();
        out.colors[i as usize] = c;
        out.marks = None;
        out
    }

    pub fn set_color(&mut self, i: u32, c: Color) {
        self.colors[i as usize] = c;
        self.marks = None;
    }
}

/// Finite union of pairwise interior-disjoint axis-aligned rectangles, used
/// as the support of resampling and filling.
#[derive(Debug, Clone, PartialEq)]
pub struct Zone {
    rects: Vec<Rect<f64>>,
}

impl Zone {
    pub fn rect(r: Rect<f64>) -> Self {
        Self { rects: vec![r] }
    }

    /// Rectangles must be interior-disjoint; empty ones are dropped.
    pub fn from_rects(rects: Vec<Rect<f64>>) -> Self {
        Self { rects: rects.into_iter().filter(|r| r.width() > 0.0 && r.height() > 0.0).collect() }
    }

    pub fn empty() -> Self {
        Self { rects: Vec::new() }
    }

    /// Square annulus `c + ([-outer, outer]² ∖ (-inner, inner)²)`.
    pub fn annulus(c: P, inner: f64, outer: f64) -> Self {
        let (r, s) = (inner, outer);
        Self::from_rects(vec![
            Rect::new(c.x - s, c.y - s, c.x + s, c.y - r),
            Rect::new(c.x - s, c.y + r, c.x + s, c.y + s),
            Rect::new(c.x - s, c.y - r, c.x - r, c.y + r),
            Rect::new(c.x + r, c.y - r, c.x + s, c.y + r),
        ])
    }

    /// `B_inner(c)` together with `bounds ∖ B_outer(c)`.
    pub fn annulus_complement(c: P, inner: f64, outer: f64, bounds: &Rect<f64>) -> Self {
        let b = *bounds;
        let o = Rect::new(c.x - outer, c.y - outer, c.x + outer, c.y + outer).intersection(&b);
        let mut rects = vec![Rect::new(c.x - inner, c.y - inner, c.x + inner, c.y + inner).intersection(&b)];
        if o.is_empty() {
            rects.push(b);
        } else {
            rects.push(Rect::new(b.x_min, b.y_min, b.x_max, o.y_min));
            rects.push(Rect::new(b.x_min, o.y_max, b.x_max, b.y_max));
            rects.push(Rect::new(b.x_min, o.y_min, o.x_min, o.y_max));
            rects.push(Rect::new(o.x_max, o.y_min, b.x_max, o.y_max));
        }
        Self::from_rects(rects.into_iter().filter(|r| !r.is_empty()).collect())
    }

    pub fn rects(&self) -> &[Rect<f64>] {
        &self.rects
    }

    pub fn area(&self) -> f64 {
        self.rects.iter().map(|r| r.area()).sum()
    }

    pub fn contains(&self, p: P) -> bool {
        self.rects.iter().any(|r| r.contains(p))
    }

    pub fn bbox(&self) -> Rect<f64> {
        self.rects.iter().fold(Rect::empty(), |acc, r| acc.union(r))
    }

    fn check_inside(&self, w: &Window) -> Result<(), SamplingError> {
        let d = w.dilated();
        if self.rects.iter().all(|r| d.contains_rect(r)) {
            Ok(())
        } else {
            Err(SamplingError::InvalidWindow("zone extends beyond the dilated window".into()))
        }
    }
}

/// Redraw colours of the points in `zone` at the configuration's `p`.
pub fn resample_colors_in(config: &Configuration, zone: &Zone, stream: &mut Stream) -> Configuration {
    let mut out = config.clone();
    let p = config.p;
    for (i, &x) in config.points().iter().enumerate() {
        if zone.contains(x) {
            let m = stream.uniform();
            out.colors[i] = Color::from_mark(m, p);
            if let Some(marks) = out.marks.as_mut() {
                marks[i] = m;
            }
        }
    }
    out
}

/// Replace the coloured points in `zone` by a fresh Poisson sample with
/// independent colours. Kept points come first, in their original order.
pub fn resample_points_in(config: &Configuration, zone: &Zone, stream: &mut Stream) -> Result<Configuration, SamplingError> {
    zone.check_inside(config.env.window())?;
    let mut points = Vec::with_capacity(config.len());
    let mut colors = Vec::with_capacity(config.len());
    let mut marks = config.marks.as_ref().map(|_| Vec::with_capacity(config.len()));
    for (i, &x) in config.points().iter().enumerate() {
        if !zone.contains(x) {
            points.push(x);
            colors.push(config.colors[i]);
            if let (Some(m), Some(old)) = (marks.as_mut(), config.marks.as_ref()) {
                m.push(old[i]);
            }
        }
    }
    for r in zone.rects() {
        let n = stream.poisson(r.area());
        for _ in 0..n {
            let x = P::new(stream.uniform_in(r.x_min, r.x_max), stream.uniform_in(r.y_min, r.y_max));
            let m = stream.uniform();
            points.push(x);
            colors.push(Color::from_mark(m, config.p));
            if let Some(ms) = marks.as_mut() {
                ms.push(m);
            }
        }
    }
    let env = Environment::checked(points, *config.env.window(), Provenance::Modified)?;
    Ok(Configuration { env: Arc::new(env), colors, marks, p: config.p })
}

/// Grid of spacing `spacing` anchored at the lower-left corner of `r`,
/// boundary included.
pub fn fill_grid(r: &Rect<f64>, spacing: f64) -> Vec<P> {
    let tol = 1e-9 * spacing;
    let nx = ((r.width() + tol) / spacing).floor() as usize;
    let ny = ((r.height() + tol) / spacing).floor() as usize;
    let mut out = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            out.push(P::new((r.x_min + i as f64 * spacing).min(r.x_max), (r.y_min + j as f64 * spacing).min(r.y_max)));
        }
    }
    out
}

/// Remove the points in `zone` and put a lattice of colour `color` there.
pub fn fill_region(config: &Configuration, zone: &Zone, color: Color, spacing: f64) -> Result<Configuration, SamplingError> {
    if !(spacing > 0.0) || !spacing.is_finite() {
        return Err(SamplingError::NonPositiveSpacing(spacing));
    }
    let diameter = zone.rects().iter().map(|r| r.diameter()).fold(0.0, f64::max);
    if spacing > diameter {
        return Err(SamplingError::SpacingTooLarge { spacing, diameter });
    }
    zone.check_inside(config.env.window())?;
    let mut points = Vec::with_capacity(config.len());
    let mut colors = Vec::with_capacity(config.len());
    for (i, &x) in config.points().iter().enumerate() {
        if !zone.contains(x) {
            points.push(x);
            colors.push(config.colors[i]);
        }
    }
    for (k, r) in zone.rects().iter().enumerate() {
        for x in fill_grid(r, spacing) {
            // Shared edges of adjacent rectangles belong to the first one.
            if zone.rects()[..k].iter().any(|q| q.contains(x)) {
                continue;
            }
            points.push(x);
            colors.push(color);
        }
    }
    let env = Environment::checked(points, *config.env.window(), Provenance::Modified)?;
    Ok(Configuration { env: Arc::new(env), colors, marks: None, p: config.p })
}

/// One parsed line of an explicit environment file.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointLine {
    pub point: P,
    pub color: Option<Color>,
}

/// Parse `x y [color]` lines; `#` starts a comment; colours are `B`/`W` or
/// `+1`/`-1`.
pub fn parse_points(text: &str) -> Result<Vec<PointLine>, SamplingError> {
    let mut out = Vec::new();
    for (ln, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |msg: String| SamplingError::Parse { line: ln + 1, msg };
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 2 && fields.len() != 3 {
            return Err(err(format!("expected `x y [color]`, got {} fields", fields.len())));
        }
        let num = |s: &str| -> Result<f64, SamplingError> {
            let v: f64 = s.parse().map_err(|_| err(format!("not a number: `{s}`")))?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(err(format!("not finite: `{s}`")))
            }
        };
        let point = P::new(num(fields[0])?, num(fields[1])?);
        let color = match fields.get(2) {
            None => None,
            Some(&("B" | "b" | "+1" | "1")) => Some(Color::Black),
            Some(&("W" | "w" | "-1")) => Some(Color::White),
            Some(other) => return Err(err(format!("unknown colour `{other}`"))),
        };
        out.push(PointLine { point, color });
    }
    Ok(out)
}

/// Build an explicit configuration from parsed lines. Either all lines carry
/// a colour or none does; in the latter case `None` is returned for colours.
pub fn explicit_from_lines(lines: &[PointLine], window: Window) -> Result<(Arc<Environment>, Option<Vec<Color>>), SamplingError> {
    let env = Arc::new(Environment::explicit(lines.iter().map(|l| l.point).collect(), window)?);
    let colored = lines.iter().filter(|l| l.color.is_some()).count();
    if colored == 0 {
        return Ok((env, None));
    }
    if colored != lines.len() {
        return Err(SamplingError::ColorCount { colors: colored, points: lines.len() });
    }
    Ok((env, Some(lines.iter().map(|l| l.color.unwrap()).collect())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::randomness::{Role, SeedSpec};

    fn window(w: f64, h: f64, pad: f64) -> Window {
        Window::new(Rect::new(0.0, 0.0, w, h), pad).unwrap()
    }

    #[test]
    fn window_validation() {
        assert!(Window::new(Rect::new(0.0, 0.0, 0.0, 1.0), 1.0).is_err());
        assert!(Window::new(Rect::new(0.0, 0.0, 1.0, 1.0), -1.0).is_err());
        assert_eq!(default_padding(10.0), 6.0);
        assert!((default_padding(1e4) - 12.0).abs() < 1e-12);
        let w = Window::padded(Rect::new(0.0, 0.0, 32.0, 16.0)).unwrap();
        assert!(w.truncation_bound() < 1e-4);
    }

    #[test]
    fn tiny_window_is_usually_empty() {
        let w = Window::new(Rect::new(0.0, 0.0, 1e-5, 1e-4), 0.0).unwrap();
        let seed = SeedSpec::new(3, "tiny");
        let nonempty = (0..1000).filter(|&i| !sample_environment(&w, &mut seed.stream(i, Role::Environment)).is_empty()).count();
        assert_eq!(nonempty, 0);
    }

    #[test]
    fn poisson_counts_in_area_400() {
        let w = window(20.0, 20.0, 0.0);
        let seed = SeedSpec::new(12, "count");
        let n = 10_000;
        let counts: Vec<f64> = (0..n).map(|i| sample_environment(&w, &mut seed.stream(i, Role::Environment)).len() as f64).collect();
        let m = counts.iter().sum::<f64>() / n as f64;
        let v = counts.iter().map(|c| (c - m).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!((m - 400.0).abs() <= 3.0 * 20.0 / 100.0, "mean {m}");
        assert!((v / 400.0 - 1.0).abs() < 0.05, "variance {v}");
        // Pooled over the first 10³ samples, within 1%.
        let m1000 = counts[..1000].iter().sum::<f64>() / 1000.0;
        assert!((m1000 / 400.0 - 1.0).abs() < 0.01);
    }

    #[test]
    fn positions_are_uniform() {
        let w = window(10.0, 10.0, 0.0);
        let seed = SeedSpec::new(2, "pos");
        let mut bins = [0f64; 25];
        let mut total = 0.0;
        for i in 0..300 {
            for p in sample_environment(&w, &mut seed.stream(i, Role::Environment)).points() {
                bins[(p.x / 2.0) as usize * 5 + (p.y / 2.0) as usize] += 1.0;
                total += 1.0;
            }
        }
        let e = total / 25.0;
        let chi2: f64 = bins.iter().map(|o| (o - e).powi(2) / e).sum();
        // 0.999 quantile of χ²(24) ≈ 51.2.
        assert!(chi2 < 51.2, "chi2 {chi2}");
    }

    #[test]
    fn colorings() {
        let w = window(100.0, 100.0, 0.0);
        let seed = SeedSpec::new(4, "col");
        let env = Arc::new(sample_environment(&w, &mut seed.stream(0, Role::Environment)));
        let all_b = sample_coloring(env.clone(), 1.0, &mut seed.stream(0, Role::Color)).unwrap();
        assert!(all_b.colors().iter().all(|c| c.is_black()));
        let all_w = sample_coloring(env.clone(), 0.0, &mut seed.stream(0, Role::Color)).unwrap();
        assert!(all_w.colors().iter().all(|c| !c.is_black()));
        assert!(sample_coloring(env.clone(), 1.5, &mut seed.stream(0, Role::Color)).is_err());
        let half = sample_coloring(env.clone(), 0.5, &mut seed.stream(0, Role::Color)).unwrap();
        let again = sample_coloring(env.clone(), 0.5, &mut seed.stream(0, Role::Color)).unwrap();
        assert_eq!(half.colors(), again.colors());
        // Pool to 10⁵ points.
        let mut black = 0usize;
        let mut total = 0usize;
        let mut i = 0;
        while total < 100_000 {
            let c = sample_coloring(env.clone(), 0.5, &mut seed.stream(i, Role::Color)).unwrap();
            black += c.colors().iter().filter(|c| c.is_black()).count();
            total += c.len();
            i += 1;
        }
        assert!((black as f64 / total as f64 - 0.5).abs() < 0.005);
        // Coupling: raising p only turns points black.
        let lo = half.at_p(0.4).unwrap();
        let hi = half.at_p(0.6).unwrap();
        for k in 0..env.len() {
            assert!(!lo.colors()[k].is_black() || hi.colors()[k].is_black());
        }
    }

    #[test]
    fn resample_colors_in_annulus() {
        let w = Window::new(Rect::new(-20.0, -20.0, 20.0, 20.0), 2.0).unwrap();
        let seed = SeedSpec::new(5, "rc");
        let env = Arc::new(sample_environment(&w, &mut seed.stream(0, Role::Environment)));
        let base = sample_coloring(env.clone(), 0.5, &mut seed.stream(0, Role::Color)).unwrap();
        let zone = Zone::annulus(P::new(0.0, 0.0), 4.0, 16.0);
        let inside: Vec<usize> = (0..env.len()).filter(|&i| zone.contains(env.points()[i])).collect();
        let mut black = 0usize;
        for t in 0..200 {
            let c = resample_colors_in(&base, &zone, &mut seed.stream(t, Role::Auxiliary(0)));
            assert!(Arc::ptr_eq(c.env_arc(), &env));
            for i in 0..env.len() {
                if !zone.contains(env.points()[i]) {
                    assert_eq!(c.colors()[i], base.colors()[i]);
                }
            }
            black += inside.iter().filter(|&&i| c.colors()[i].is_black()).count();
        }
        let frac = black as f64 / (200 * inside.len()) as f64;
        assert!((frac - 0.5).abs() < 0.1);
        // Empty zone: nothing changes.
        let same = resample_colors_in(&base, &Zone::empty(), &mut seed.stream(0, Role::Auxiliary(1)));
        assert_eq!(same.colors(), base.colors());
    }

    #[test]
    fn resample_points_in_box() {
        let w = Window::new(Rect::new(0.0, 0.0, 20.0, 20.0), 1.0).unwrap();
        let seed = SeedSpec::new(6, "rp");
        let env = Arc::new(sample_environment(&w, &mut seed.stream(0, Role::Environment)));
        let base = sample_coloring(env.clone(), 0.5, &mut seed.stream(0, Role::Color)).unwrap();
        let zone = Zone::rect(Rect::new(5.0, 5.0, 10.0, 10.0));
        let outside: Vec<(P, Color)> =
            (0..env.len()).filter(|&i| !zone.contains(env.points()[i])).map(|i| (env.points()[i], base.colors()[i])).collect();
        let n = 10_000;
        let mut total = 0usize;
        let mut bins = [0f64; 25];
        for t in 0..n {
            let c = resample_points_in(&base, &zone, &mut seed.stream(t, Role::Auxiliary(0))).unwrap();
            let kept: Vec<(P, Color)> = (0..outside.len()).map(|i| (c.points()[i], c.colors()[i])).collect();
            assert_eq!(kept, outside);
            for p in &c.points()[outside.len()..] {
                assert!(zone.contains(*p));
                bins[((p.x - 5.0) as usize).min(4) * 5 + ((p.y - 5.0) as usize).min(4)] += 1.0;
            }
            total += c.len() - outside.len();
        }
        let mean = total as f64 / n as f64;
        assert!((mean / 25.0 - 1.0).abs() < 0.015, "mean {mean}");
        let e = total as f64 / 25.0;
        let chi2: f64 = bins.iter().map(|o| (o - e).powi(2) / e).sum();
        assert!(chi2 < 51.2, "chi2 {chi2}");
        // Vanishing zone: output is the input minus any points there.
        let tiny = Zone::rect(Rect::new(3.0, 3.0, 3.0 + 1e-5, 3.0 + 1e-4));
        let c = resample_points_in(&base, &tiny, &mut seed.stream(0, Role::Auxiliary(2))).unwrap();
        assert_eq!(c.len(), env.len());
    }

    #[test]
    fn fill_grid_convention() {
        let w = Window::new(Rect::new(0.0, 0.0, 4.0, 4.0), 0.0).unwrap();
        let env = Arc::new(Environment::explicit(vec![P::new(0.5, 0.5), P::new(3.5, 3.5)], w).unwrap());
        let cfg = Configuration::uniform_color(env, Color::White);
        let zone = Zone::rect(Rect::new(1.0, 1.0, 3.0, 3.0));
        let f = fill_region(&cfg, &zone, Color::Black, 0.1).unwrap();
        assert_eq!(f.len(), 2 + 441);
        assert!(fill_region(&cfg, &zone, Color::Black, 3.0).is_err());
        assert!(fill_region(&cfg, &zone, Color::Black, 0.0).is_err());
        // Spacing equal to the diameter still places a point.
        let d = zone.rects()[0].diameter();
        assert!(fill_region(&cfg, &zone, Color::Black, d).unwrap().len() >= 3);
        // Removes the points inside.
        let z2 = Zone::rect(Rect::new(0.0, 0.0, 1.0, 1.0));
        let g = fill_region(&cfg, &z2, Color::Black, 0.5).unwrap();
        assert_eq!(g.len(), 1 + 9);
        assert_eq!(g.points()[0], P::new(3.5, 3.5));
    }

    #[test]
    fn explicit_files() {
        let text = "# five points\n-2 0 B\n0 0 +1\n2 0 B  # trailing\n\n0 2 W\n0 -2 -1\n";
        let lines = parse_points(text).unwrap();
        assert_eq!(lines.len(), 5);
        let w = Window::new(Rect::new(-3.0, -3.0, 3.0, 3.0), 0.0).unwrap();
        let (env, colors) = explicit_from_lines(&lines, w).unwrap();
        assert_eq!(env.len(), 5);
        assert_eq!(colors.unwrap(), vec![Color::Black, Color::Black, Color::Black, Color::White, Color::White]);
        assert!(matches!(parse_points("1 2 X"), Err(SamplingError::Parse { line: 1, .. })));
        assert!(matches!(parse_points("1\n"), Err(SamplingError::Parse { line: 1, .. })));
        assert!(matches!(parse_points("0 0\nfoo 1"), Err(SamplingError::Parse { line: 2, .. })));
        let mixed = parse_points("0 0 B\n1 1").unwrap();
        assert!(explicit_from_lines(&mixed, w).is_err());
        let dup = parse_points("0 0\n1 1\n0 0").unwrap();
        assert!(matches!(explicit_from_lines(&dup, w), Err(SamplingError::DuplicatePoint { first: 0, second: 2 })));
        let far = parse_points("10 0").unwrap();
        assert!(explicit_from_lines(&far, w).is_err());
    }
}
