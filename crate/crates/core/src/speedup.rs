//! Speedup accounting for one-epoch training.
//!
//! Two effects are measured separately and compose by multiplication:
//! the epoch speedup (how much sooner a model trained on more unique
//! data reaches the best loss a multi-epoch run ever achieves) and the
//! adjustment speedup (how much sooner a retuned model family reaches
//! the loss of the original one, compared at equal compute on a shared
//! reference axis).

use crate::curves::{CurveKind, LearningCurve};
use crate::error::{Error, Result};
use crate::interp;
use crate::remap::RemappedCurve;

/// How a "first iteration reaching a loss" query answers between
/// samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReachMode {
    /// Solve on the log-log segment between the bracketing samples.
    Interpolate,
    /// Answer with the first sampled iteration at or below the loss.
    GridSnap,
}

/// One speedup measurement: `speedup = baseline_iters / target_iters`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpeedupReport {
    /// Where the baseline run attains the comparison loss.
    pub baseline_iters: f64,
    /// Where the measured run first reaches that loss.
    pub target_iters: f64,
    pub speedup: f64,
    /// Epoch cap applied to the baseline, if any.
    pub epoch_limit: Option<u32>,
    /// True when the iteration axes were compute-normalized first.
    pub flops_adjusted: bool,
}

fn require_test_curve(curve: &LearningCurve, role: &str) -> Result<()> {
    if curve.kind() != CurveKind::Test {
        return Err(Error::InvalidInput(format!(
            "{role} curve must be a test curve, got {} ({})",
            curve.kind(),
            curve.config_id()
        )));
    }
    Ok(())
}

/// Speedup of a single-epoch run over a multi-epoch baseline: find the
/// lowest test loss the baseline reaches within `epochs` (its whole
/// history when `None`), then the first iteration at which the
/// single-epoch curve reaches that loss.
pub fn epoch_speedup(
    single: &LearningCurve,
    multi: &LearningCurve,
    iters_per_epoch: u64,
    epochs: Option<u32>,
    mode: ReachMode,
) -> Result<SpeedupReport> {
    require_test_curve(single, "single-epoch")?;
    require_test_curve(multi, "multi-epoch")?;
    if iters_per_epoch == 0 {
        return Err(Error::InvalidInput("iters_per_epoch must be positive".into()));
    }

    let cap = match epochs {
        Some(e) => (e as u64).checked_mul(iters_per_epoch).ok_or_else(|| {
            Error::InvalidInput(format!("epoch cap overflows: {e} x {iters_per_epoch}"))
        })?,
        None => u64::MAX,
    };
    // Best loss of the baseline within the cap, earliest occurrence.
    let mut best: Option<(u64, f64)> = None;
    for &(iter, loss) in multi.points().iter().take_while(|&&(iter, _)| iter <= cap) {
        if best.is_none_or(|(_, b)| loss < b) {
            best = Some((iter, loss));
        }
    }
    let (best_iter, best_loss) = best.ok_or_else(|| {
        Error::InsufficientData(format!(
            "multi-epoch curve has no samples within {} iterations",
            cap
        ))
    })?;

    let single_pts: Vec<(f64, f64)> =
        single.points().iter().map(|&(x, l)| (x as f64, l)).collect();
    let reach = interp::first_reach(&single_pts, best_loss, mode == ReachMode::GridSnap)
        .ok_or_else(|| {
            let (_, single_min) = single.min_loss_point();
            Error::UnreachableLoss { target: best_loss, gap: single_min - best_loss }
        })?;

    Ok(SpeedupReport {
        baseline_iters: best_iter as f64,
        target_iters: reach,
        speedup: best_iter as f64 / reach,
        epoch_limit: epochs,
        flops_adjusted: false,
    })
}

/// Speedup of a retuned configuration over the original at matched
/// compute: both curves live on the same reference axis, the original's
/// loss is read at its own iteration `i_old_native`, and the answer is
/// the ratio of reference-axis positions at that equal loss.
pub fn adjustment_speedup(
    old: &RemappedCurve,
    new: &RemappedCurve,
    i_old_native: u64,
    mode: ReachMode,
) -> Result<SpeedupReport> {
    if old.reference_id() != new.reference_id() {
        return Err(Error::InvalidInput(format!(
            "curves are on different reference axes: {} vs {}",
            old.reference_id(),
            new.reference_id()
        )));
    }
    let x_old = i_old_native as f64 * old.scale();
    let loss = old.loss_at(x_old).ok_or_else(|| {
        let (lo, hi) = old.span();
        Error::InvalidInput(format!(
            "iteration {i_old_native} maps to {x_old} on the reference axis, outside {}'s span [{lo}, {hi}]",
            old.source_id()
        ))
    })?;

    let reach = interp::first_reach(new.points(), loss, mode == ReachMode::GridSnap)
        .ok_or_else(|| {
            let new_min = new.points().iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
            Error::UnreachableLoss { target: loss, gap: new_min - loss }
        })?;

    Ok(SpeedupReport {
        baseline_iters: x_old,
        target_iters: reach,
        speedup: x_old / reach,
        epoch_limit: None,
        flops_adjusted: true,
    })
}

/// Total speedup when both effects apply.
pub fn combined_speedup(epoch: f64, adjustment: f64) -> f64 {
    epoch * adjustment
}
