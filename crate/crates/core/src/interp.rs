//! Piecewise-linear interpolation in log-log space over sampled curves.
//!
//! Points must be sorted by strictly increasing positive x with positive
//! y; the public curve types guarantee this by construction. Exact
//! abscissa and ordinate hits return the stored sample to avoid log/exp
//! round-trip error.

/// Interpolated y at `x`, or `None` outside the sampled span.
pub(crate) fn loss_at(points: &[(f64, f64)], x: f64) -> Option<f64> {
    let last = points.last()?;
    if x < points[0].0 || x > last.0 {
        return None;
    }
    // First index with points[idx].x >= x; idx >= 1 unless x hits the
    // first sample exactly.
    let idx = points.partition_point(|p| p.0 < x);
    let (x1, y1) = points[idx];
    if x1 == x {
        return Some(y1);
    }
    let (x0, y0) = points[idx - 1];
    let t = (x.ln() - x0.ln()) / (x1.ln() - x0.ln());
    Some((y0.ln() + t * (y1.ln() - y0.ln())).exp())
}

/// First x at which the curve reaches `target` (y <= target), walking
/// left to right. With `snap_to_grid` the answer is the first sample's x;
/// otherwise the crossing is solved on the log-log segment. Returns
/// `None` when the curve never reaches the target.
pub(crate) fn first_reach(points: &[(f64, f64)], target: f64, snap_to_grid: bool) -> Option<f64> {
    let idx = points.iter().position(|p| p.1 <= target)?;
    let (x1, y1) = points[idx];
    if snap_to_grid || idx == 0 || y1 == target {
        return Some(x1);
    }
    let (x0, y0) = points[idx - 1];
    // y0 > target > y1 strictly, so the segment brackets the crossing.
    let t = (target.ln() - y0.ln()) / (y1.ln() - y0.ln());
    Some((x0.ln() + t * (x1.ln() - x0.ln())).exp())
}
