//! Compute-axis normalization of learning curves from different model
//! sizes, and the ranges where each size is loss-optimal.
//!
//! A curve recorded against its own iteration counter is remapped onto a
//! reference model's iteration axis by scaling the abscissa with the
//! per-iteration FLOPS ratio: one source iteration costs `scale`
//! reference iterations, so `x_remapped = x_native * scale` with
//! `scale = flops(source) / flops(reference)`. Losses are untouched.
//! Once curves share an axis, equal x means equal compute and the lowest
//! curve at a given x is the best way to spend that compute.

use crate::curves::LearningCurve;
use crate::error::{Error, Result};
use crate::interp;
use crate::model_budget::{per_iter_flops, ModelConfig};
use crate::range::{IterRange, RatioRange};

/// A learning curve on a reference compute axis.
#[derive(Debug, Clone, PartialEq)]
pub struct RemappedCurve {
    source_id: String,
    reference_id: String,
    scale: f64,
    points: Vec<(f64, f64)>,
}

impl RemappedCurve {
    /// Assemble from an already-scaled point list. Validates the same
    /// invariants as [`LearningCurve`] plus a positive finite scale.
    pub fn from_parts(
        source_id: impl Into<String>,
        reference_id: impl Into<String>,
        scale: f64,
        points: Vec<(f64, f64)>,
    ) -> Result<Self> {
        let source_id = source_id.into();
        let reference_id = reference_id.into();
        if source_id.is_empty() || reference_id.is_empty() {
            return Err(Error::InvalidCurve("curve ids must be non-empty".into()));
        }
        if !scale.is_finite() || scale <= 0.0 {
            return Err(Error::InvalidCurve(format!(
                "remap scale must be finite and positive, got {scale}"
            )));
        }
        if points.is_empty() {
            return Err(Error::InvalidCurve(format!("curve {source_id} has no points")));
        }
        let mut prev = 0.0f64;
        for &(x, loss) in &points {
            if !x.is_finite() || x <= prev {
                return Err(Error::InvalidCurve(format!(
                    "curve {source_id}: remapped iterations must be finite, positive and strictly increasing (saw {x} after {prev})"
                )));
            }
            if !loss.is_finite() || loss <= 0.0 {
                return Err(Error::InvalidCurve(format!(
                    "curve {source_id}: loss at {x} must be finite and positive, got {loss}"
                )));
            }
            prev = x;
        }
        Ok(RemappedCurve { source_id, reference_id, scale, points })
    }

    pub fn source_id(&self) -> &str {
        &self.source_id
    }

    pub fn reference_id(&self) -> &str {
        &self.reference_id
    }

    /// Reference iterations per source iteration.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    /// Sampled extent on the reference axis.
    pub fn span(&self) -> (f64, f64) {
        (self.points[0].0, self.points[self.points.len() - 1].0)
    }

    /// Points mapped back to the source's own iteration axis.
    pub fn native_points(&self) -> Vec<(f64, f64)> {
        self.points.iter().map(|&(x, loss)| (x / self.scale, loss)).collect()
    }

    /// Interpolated loss at reference iteration `x`, `None` off-span.
    pub fn loss_at(&self, x: f64) -> Option<f64> {
        interp::loss_at(&self.points, x)
    }
}

/// Remap with an explicit scale (reference iterations per source
/// iteration).
pub fn remap_curve_scaled(
    curve: &LearningCurve,
    reference_id: impl Into<String>,
    scale: f64,
) -> Result<RemappedCurve> {
    let points = curve.points().iter().map(|&(x, loss)| (x as f64 * scale, loss)).collect();
    RemappedCurve::from_parts(curve.config_id(), reference_id, scale, points)
}

/// Remap a curve recorded under `source` onto `reference`'s iteration
/// axis using the per-iteration FLOPS ratio of the two configs.
pub fn remap_curve(
    curve: &LearningCurve,
    source: &ModelConfig,
    reference: &ModelConfig,
    reference_id: impl Into<String>,
) -> Result<RemappedCurve> {
    let scale = per_iter_flops(source)? / per_iter_flops(reference)?;
    remap_curve_scaled(curve, reference_id, scale)
}

fn require_common_axis(a: &RemappedCurve, b: &RemappedCurve) -> Result<()> {
    if a.reference_id != b.reference_id {
        return Err(Error::InvalidInput(format!(
            "curves are on different reference axes: {} vs {}",
            a.reference_id, b.reference_id
        )));
    }
    Ok(())
}

/// All abscissae where two curves cross, in increasing order. Curves are
/// compared as piecewise-linear functions in log-log space over their
/// merged breakpoints, so every sign change is found. Tangential touches
/// (equal loss without an ordering flip) are not crossings. Returns an
/// empty list when one curve stays on one side of the other.
pub fn find_intersections(a: &RemappedCurve, b: &RemappedCurve) -> Result<Vec<f64>> {
    require_common_axis(a, b)?;
    let (a_lo, a_hi) = a.span();
    let (b_lo, b_hi) = b.span();
    let lo = a_lo.max(b_lo);
    let hi = a_hi.min(b_hi);
    if lo >= hi {
        return Err(Error::DisjointSpans(format!(
            "{} spans [{a_lo}, {a_hi}] but {} spans [{b_lo}, {b_hi}]",
            a.source_id, b.source_id
        )));
    }

    let mut xs: Vec<f64> = Vec::with_capacity(a.points.len() + b.points.len() + 2);
    xs.push(lo);
    xs.push(hi);
    xs.extend(a.points.iter().map(|p| p.0).filter(|&x| x > lo && x < hi));
    xs.extend(b.points.iter().map(|p| p.0).filter(|&x| x > lo && x < hi));
    xs.sort_by(|p, q| p.partial_cmp(q).unwrap());
    xs.dedup();

    // Log-loss difference at every merged breakpoint. Both curves are
    // linear in between, so the difference is linear in between.
    let diff: Vec<f64> = xs
        .iter()
        .map(|&x| {
            let la = a.loss_at(x).expect("x within common span");
            let lb = b.loss_at(x).expect("x within common span");
            la.ln() - lb.ln()
        })
        .collect();

    let mut crossings = Vec::new();
    let mut last_nonzero: Option<(usize, f64)> = None;
    for (i, &d) in diff.iter().enumerate() {
        if d == 0.0 {
            continue;
        }
        if let Some((j, prev)) = last_nonzero {
            if (d > 0.0) != (prev > 0.0) {
                let x = if i == j + 1 {
                    // Linear zero of the difference on this segment.
                    let u0 = xs[j].ln();
                    let u1 = xs[i].ln();
                    let t = prev / (prev - d);
                    (u0 + t * (u1 - u0)).exp()
                } else {
                    // The ordering flipped across a plateau of exact
                    // ties; the crossing is where the tie begins.
                    xs[j + 1]
                };
                crossings.push(x);
            }
        }
        last_nonzero = Some((i, d));
    }
    Ok(crossings)
}

/// First crossing of two curves on their common axis.
pub fn find_intersection(a: &RemappedCurve, b: &RemappedCurve) -> Result<f64> {
    let crossings = find_intersections(a, b)?;
    crossings.first().copied().ok_or_else(|| {
        Error::NoIntersection(format!(
            "{} and {} do not cross on their common span",
            a.source_id, b.source_id
        ))
    })
}

/// For each curve, the reference-axis interval where it has the lowest
/// loss of the family, converted to the curve's native iteration axis.
/// Results are in input order; a curve that is nowhere lowest gets the
/// empty range. The first interval starts at 0 and the last extends to
/// infinity: outside the sampled common span each segment winner is
/// decided by the nearest sampled behavior.
pub fn optimal_ranges(curves: &[RemappedCurve]) -> Result<Vec<(String, IterRange)>> {
    let first = curves
        .first()
        .ok_or_else(|| Error::InvalidInput("optimal_ranges needs at least one curve".into()))?;
    for c in curves {
        require_common_axis(first, c)?;
    }
    if curves.len() == 1 {
        let native = IterRange::unbounded(0.0)?.divided_by(first.scale);
        return Ok(vec![(first.source_id.clone(), native)]);
    }

    // Common span: every curve must be defined wherever we probe.
    let mut lo = f64::NEG_INFINITY;
    let mut hi = f64::INFINITY;
    for c in curves {
        let (c_lo, c_hi) = c.span();
        lo = lo.max(c_lo);
        hi = hi.min(c_hi);
    }
    if lo >= hi {
        return Err(Error::DisjointSpans(
            "curves share no common span on the reference axis".into(),
        ));
    }

    // Segment boundaries: every pairwise crossing. Pairs that never
    // cross contribute none; pairs that cross repeatedly contribute all
    // their crossings, so each segment has a single winner throughout.
    let mut bounds = vec![0.0f64];
    for (i, a) in curves.iter().enumerate() {
        for b in &curves[i + 1..] {
            bounds.extend(find_intersections(a, b)?);
        }
    }
    bounds.push(f64::INFINITY);
    bounds.sort_by(|p, q| p.partial_cmp(q).unwrap());
    bounds.dedup();

    let mut winners: Vec<Vec<(f64, f64)>> = vec![Vec::new(); curves.len()];
    for seg in bounds.windows(2) {
        let (seg_lo, seg_hi) = (seg[0], seg[1]);
        // Probe inside the segment but within the sampled common span.
        let p_lo = seg_lo.max(lo);
        let p_hi = seg_hi.min(hi);
        let probe = if p_lo < p_hi { (p_lo * p_hi).sqrt() } else { p_lo.min(hi) };
        let mut best: Option<(usize, f64)> = None;
        for (idx, c) in curves.iter().enumerate() {
            let loss = c.loss_at(probe).expect("probe within common span");
            if best.is_none_or(|(_, b)| loss < b) {
                best = Some((idx, loss));
            }
        }
        let (idx, _) = best.expect("at least one curve");
        winners[idx].push((seg_lo, seg_hi));
    }

    let mut out = Vec::with_capacity(curves.len());
    for (c, segs) in curves.iter().zip(&winners) {
        let range = if segs.is_empty() {
            IterRange::EMPTY
        } else {
            let r_lo = segs.iter().map(|s| s.0).fold(f64::INFINITY, f64::min);
            let r_hi = segs.iter().map(|s| s.1).fold(0.0f64, f64::max);
            IterRange::new(r_lo, r_hi)?.divided_by(c.scale)
        };
        out.push((c.source_id.clone(), range));
    }
    Ok(out)
}

/// Convert a native iteration range to tokens-per-parameter ratios:
/// `ratio = iterations * tokens_per_iter / params`.
pub fn tokens_per_param_range(range: IterRange, tokens_per_iter: u64, params: u64) -> RatioRange {
    let per_iter = tokens_per_iter as f64 / params as f64;
    RatioRange { lo: range.lo * per_iter, hi: range.hi * per_iter }
}

/// Intersection of ratio ranges; errors when it is empty.
pub fn intersect_ranges(ranges: &[RatioRange]) -> Result<RatioRange> {
    let first = ranges
        .first()
        .ok_or_else(|| Error::InvalidInput("intersect_ranges needs at least one range".into()))?;
    let mut lo = first.lo;
    let mut hi = first.hi;
    for r in &ranges[1..] {
        lo = lo.max(r.lo);
        hi = hi.min(r.hi);
    }
    if lo > hi {
        return Err(Error::NoOverlap(format!("ranges intersect to an empty set (lo {lo} > hi {hi})")));
    }
    Ok(RatioRange { lo, hi })
}

/// Geometric midpoint `sqrt(lo * hi)`; requires finite positive bounds.
pub fn geometric_midpoint(range: RatioRange) -> Result<f64> {
    if range.lo <= 0.0 || !range.hi.is_finite() {
        return Err(Error::DegenerateBounds(format!(
            "geometric midpoint needs finite positive bounds, got [{}, {}]",
            range.lo, range.hi
        )));
    }
    Ok((range.lo * range.hi).sqrt())
}
