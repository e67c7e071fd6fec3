//! Power-law fits of probabilities against the annulus ratio.

use crate::{Error, Result};

use super::Estimate;

#[derive(Debug, Clone, PartialEq)]
pub struct FitPoint {
    pub r: f64,
    pub big_r: f64,
    pub estimate: Estimate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExponentFit {
    /// Exponent `ζ` in `α ≈ C (r/R)^ζ`.
    pub slope: f64,
    pub slope_stderr: f64,
    pub intercept: f64,
    /// `(ln(r/R), ln α̂, weight)` of the points used.
    pub points: Vec<(f64, f64, f64)>,
    /// Points left out, with the reason.
    pub excluded: Vec<(f64, f64, String)>,
}

impl ExponentFit {
    /// Weighted residual sum of squares, recomputed from `points`.
    pub fn weighted_rss(&self) -> f64 {
        self.points.iter().map(|&(x, y, w)| w * (y - self.intercept - self.slope * x).powi(2)).sum()
    }
}

/// Weighted least squares of `ln α̂` on `ln(r/R)` with weights equal to the
/// inverse relative variance. Points with `r/R > 1/4` are dropped when at
/// least four others remain; non-positive estimates are dropped.
pub fn fit_exponent(points: &[FitPoint]) -> Result<ExponentFit> {
    let mut excluded = Vec::new();
    let mut usable: Vec<&FitPoint> = Vec::new();
    for fp in points {
        if !(fp.estimate.value > 0.0) {
            excluded.push((fp.r, fp.big_r, "non-positive estimate".to_string()));
        } else if !(fp.r > 0.0 && fp.big_r > fp.r) {
            excluded.push((fp.r, fp.big_r, "ratio r/R not in (0, 1)".to_string()));
        } else {
            usable.push(fp);
        }
    }
    let far = usable.iter().filter(|fp| fp.r / fp.big_r <= 0.25).count();
    if far >= 4 {
        usable.retain(|fp| {
            let keep = fp.r / fp.big_r <= 0.25;
            if !keep {
                excluded.push((fp.r, fp.big_r, "ratio above 1/4".to_string()));
            }
            keep
        });
    }
    if usable.len() < 3 {
        return Err(Error::Estimator(format!("exponent fit needs 3 usable points, got {}", usable.len())));
    }
    let pts: Vec<(f64, f64, f64)> = usable
        .iter()
        .map(|fp| {
            let rel = (fp.estimate.stderr / fp.estimate.value).powi(2);
            ((fp.r / fp.big_r).ln(), fp.estimate.value.ln(), 1.0 / rel.max(1e-12))
        })
        .collect();
    let sw: f64 = pts.iter().map(|p| p.2).sum();
    let xb = pts.iter().map(|p| p.2 * p.0).sum::<f64>() / sw;
    let yb = pts.iter().map(|p| p.2 * p.1).sum::<f64>() / sw;
    let sxx: f64 = pts.iter().map(|p| p.2 * (p.0 - xb).powi(2)).sum();
    if !(sxx > 0.0) {
        return Err(Error::Estimator("exponent fit needs at least two distinct ratios".into()));
    }
    let sxy: f64 = pts.iter().map(|p| p.2 * (p.0 - xb) * (p.1 - yb)).sum();
    let slope = sxy / sxx;
    Ok(ExponentFit { slope, slope_stderr: (1.0 / sxx).sqrt(), intercept: yb - slope * xb, points: pts, excluded })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::randomness::SeedSpec;

    fn fp(r: f64, big_r: f64, v: f64, se: f64) -> FitPoint {
        FitPoint { r, big_r, estimate: Estimate { value: v, stderr: se, n: 1000, seed: SeedSpec::new(0, "fit"), wall_seconds: 0.0 } }
    }

    #[test]
    fn exact_power_law() {
        let pts: Vec<FitPoint> = [2.0, 4.0, 8.0, 16.0, 32.0].iter().map(|&big| fp(1.0, big, (1.0 / big).powi(2), 0.0)).collect();
        let f = fit_exponent(&pts).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-12);
        assert!(f.intercept.abs() < 1e-12);
        assert!(f.weighted_rss() < 1e-12);
        // Ratio 1/2 dropped because four points remain.
        assert_eq!(f.points.len(), 4);
        assert_eq!(f.excluded.len(), 1);
    }

    #[test]
    fn weights_and_exclusions() {
        let pts = vec![fp(1.0, 4.0, 0.1, 0.01), fp(1.0, 8.0, 0.0, 0.0), fp(1.0, 16.0, 0.01, 0.002), fp(1.0, 32.0, 0.003, 0.001)];
        let f = fit_exponent(&pts).unwrap();
        assert_eq!(f.points.len(), 3);
        assert_eq!(f.excluded[0].2, "non-positive estimate");
        let (x, y, w): (Vec<f64>, Vec<f64>, Vec<f64>) =
            (f.points.iter().map(|p| p.0).collect(), f.points.iter().map(|p| p.1).collect(), f.points.iter().map(|p| p.2).collect());
        // Normal equations of the weighted fit hold at the solution.
        let g0: f64 = (0..3).map(|i| w[i] * (y[i] - f.intercept - f.slope * x[i])).sum();
        let g1: f64 = (0..3).map(|i| w[i] * x[i] * (y[i] - f.intercept - f.slope * x[i])).sum();
        assert!(g0.abs() < 1e-6 && g1.abs() < 1e-6);
        assert!(fit_exponent(&pts[..2]).is_err());
    }
}
