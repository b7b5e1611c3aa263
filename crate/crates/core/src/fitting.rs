//! Power-law fitting and power-law region detection on learning curves.
//!
//! Fitting is ordinary least squares on the log-log view: for
//! `loss = a * x^(-k)`, the line `ln loss = ln a - k * ln x`. Region
//! detection searches every contiguous window for the longest one whose
//! fit quality clears a threshold.

use crate::curves::LearningCurve;
use crate::error::{Error, Result};
use crate::range::IterRange;

/// Result of fitting `loss = amplitude * x^(-exponent)` over `region`.
/// `exponent` is positive for decreasing loss (the fitted log-log slope
/// is `-exponent`). `r2` is clamped to `[0, 1]`; a zero-variance window
/// reports `r2 = 1` by convention.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerLawFit {
    pub amplitude: f64,
    pub exponent: f64,
    pub region: IterRange,
    pub r2: f64,
}

/// Least-squares accumulator over log-log points, shifted by its first
/// point to keep the raw-moment sums well conditioned.
struct ShiftedOls {
    x0: f64,
    y0: f64,
    n: usize,
    sx: f64,
    sy: f64,
    sxx: f64,
    syy: f64,
    sxy: f64,
}

struct LineStats {
    slope: f64,
    intercept: f64,
    r2: f64,
}

impl ShiftedOls {
    fn new(x0: f64, y0: f64) -> Self {
        ShiftedOls { x0, y0, n: 0, sx: 0.0, sy: 0.0, sxx: 0.0, syy: 0.0, sxy: 0.0 }
    }

    fn push(&mut self, x: f64, y: f64) {
        let dx = x - self.x0;
        let dy = y - self.y0;
        self.n += 1;
        self.sx += dx;
        self.sy += dy;
        self.sxx += dx * dx;
        self.syy += dy * dy;
        self.sxy += dx * dy;
    }

    /// None when the x values carry no variance (a single abscissa).
    fn line(&self) -> Option<LineStats> {
        let n = self.n as f64;
        let sxx_c = self.sxx - self.sx * self.sx / n;
        let syy_c = self.syy - self.sy * self.sy / n;
        let sxy_c = self.sxy - self.sx * self.sy / n;
        if sxx_c <= 0.0 {
            return None;
        }
        let slope = sxy_c / sxx_c;
        // Constant y fits exactly by convention; rounding can push the
        // ratio a hair past 1, hence the clamp.
        let r2 = if syy_c <= 0.0 { 1.0 } else { (sxy_c * sxy_c / (sxx_c * syy_c)).clamp(0.0, 1.0) };
        let mean_x = self.x0 + self.sx / n;
        let mean_y = self.y0 + self.sy / n;
        let intercept = mean_y - slope * mean_x;
        Some(LineStats { slope, intercept, r2 })
    }
}

/// Fit a power law to the samples inside `region` (inclusive bounds).
/// Needs at least three samples in the region.
pub fn fit_power_law(curve: &LearningCurve, region: IterRange) -> Result<PowerLawFit> {
    let selected: Vec<(f64, f64)> = curve
        .points()
        .iter()
        .filter(|&&(iter, _)| region.contains(iter as f64))
        .map(|&(iter, loss)| ((iter as f64).ln(), loss.ln()))
        .collect();
    if selected.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "power-law fit needs at least 3 points in [{}, {}], found {}",
            region.lo,
            region.hi,
            selected.len()
        )));
    }
    let mut ols = ShiftedOls::new(selected[0].0, selected[0].1);
    for &(x, y) in &selected {
        ols.push(x, y);
    }
    let line = ols
        .line()
        .ok_or_else(|| Error::InsufficientData("fit region has no abscissa variance".into()))?;
    Ok(PowerLawFit {
        amplitude: line.intercept.exp(),
        exponent: -line.slope,
        region,
        r2: line.r2,
    })
}

/// Find the longest contiguous window of at least `min_points` samples
/// whose log-log fit has `r2 >= r2_threshold`. Ties on length prefer the
/// higher `r2`, then the earliest start. The search is exhaustive over
/// all O(n^2) windows.
pub fn detect_power_region(
    curve: &LearningCurve,
    min_points: usize,
    r2_threshold: f64,
) -> Result<IterRange> {
    if min_points < 3 {
        return Err(Error::InvalidInput(format!(
            "min_points must be at least 3, got {min_points}"
        )));
    }
    if !r2_threshold.is_finite() || r2_threshold <= 0.0 || r2_threshold > 1.0 {
        return Err(Error::InvalidInput(format!(
            "r2_threshold must be in (0, 1], got {r2_threshold}"
        )));
    }
    let pts = curve.loglog_view();
    let n = pts.len();
    if n < min_points {
        return Err(Error::InsufficientData(format!(
            "curve has {n} points, need at least {min_points}"
        )));
    }

    struct Best {
        len: usize,
        r2: f64,
        start: usize,
        end: usize,
    }
    let mut best: Option<Best> = None;
    for start in 0..=(n - min_points) {
        let mut ols = ShiftedOls::new(pts[start].0, pts[start].1);
        for (end, &(x, y)) in pts.iter().enumerate().skip(start) {
            ols.push(x, y);
            let len = end + 1 - start;
            if len < min_points {
                continue;
            }
            let Some(line) = ols.line() else { continue };
            if line.r2 < r2_threshold {
                continue;
            }
            let better = match &best {
                None => true,
                Some(b) => len > b.len || (len == b.len && line.r2 > b.r2),
            };
            if better {
                best = Some(Best { len, r2: line.r2, start, end });
            }
        }
    }

    match best {
        Some(b) => {
            let lo = curve.points()[b.start].0 as f64;
            let hi = curve.points()[b.end].0 as f64;
            IterRange::new(lo, hi)
        }
        None => Err(Error::NoPowerRegion(format!(
            "no window of {min_points}+ points reaches r2 {r2_threshold}"
        ))),
    }
}
