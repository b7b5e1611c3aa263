//! Learning-curve containers and synthetic curve generation.
//!
//! A learning curve is a loss measured on a strictly increasing iteration
//! grid. Losses must be positive: all downstream analysis (fitting,
//! remapping, intersection) happens on the log-log view.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurveKind {
    Train,
    Test,
}

impl fmt::Display for CurveKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CurveKind::Train => f.write_str("train"),
            CurveKind::Test => f.write_str("test"),
        }
    }
}

impl FromStr for CurveKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "train" => Ok(CurveKind::Train),
            "test" => Ok(CurveKind::Test),
            other => Err(Error::InvalidCurve(format!(
                "curve kind must be \"train\" or \"test\", got {other:?}"
            ))),
        }
    }
}

/// Loss samples `(iteration, loss)` for one training run.
#[derive(Debug, Clone, PartialEq)]
pub struct LearningCurve {
    config_id: String,
    kind: CurveKind,
    points: Vec<(u64, f64)>,
}

impl LearningCurve {
    /// Validates: non-empty id and points, iterations strictly increasing
    /// and positive, losses finite and positive.
    pub fn new(config_id: impl Into<String>, kind: CurveKind, points: Vec<(u64, f64)>) -> Result<Self> {
        let config_id = config_id.into();
        if config_id.is_empty() {
            return Err(Error::InvalidCurve("config_id must be non-empty".into()));
        }
        if points.is_empty() {
            return Err(Error::InvalidCurve(format!("curve {config_id} has no points")));
        }
        let mut prev = 0u64;
        for &(iter, loss) in &points {
            if iter <= prev {
                return Err(Error::InvalidCurve(format!(
                    "curve {config_id}: iterations must be strictly increasing and positive (saw {iter} after {prev})"
                )));
            }
            if !loss.is_finite() || loss <= 0.0 {
                return Err(Error::InvalidCurve(format!(
                    "curve {config_id}: loss at iteration {iter} must be finite and positive, got {loss}"
                )));
            }
            prev = iter;
        }
        Ok(LearningCurve { config_id, kind, points })
    }

    pub fn config_id(&self) -> &str {
        &self.config_id
    }

    pub fn kind(&self) -> CurveKind {
        self.kind
    }

    pub fn points(&self) -> &[(u64, f64)] {
        &self.points
    }

    pub fn first_iter(&self) -> u64 {
        self.points[0].0
    }

    pub fn last_iter(&self) -> u64 {
        self.points[self.points.len() - 1].0
    }

    /// Lowest loss and where it first occurs.
    pub fn min_loss_point(&self) -> (u64, f64) {
        let mut best = self.points[0];
        for &(iter, loss) in &self.points[1..] {
            if loss < best.1 {
                best = (iter, loss);
            }
        }
        best
    }

    /// `(ln iteration, ln loss)` for every sample.
    pub fn loglog_view(&self) -> Vec<(f64, f64)> {
        self.points
            .iter()
            .map(|&(iter, loss)| ((iter as f64).ln(), loss.ln()))
            .collect()
    }
}

/// Parameters of the synthetic curve family
/// `loss(x) = floor + amplitude * x^(-exponent) + exp_amplitude * exp(-x / exp_timescale)`.
///
/// The exponential term models the fast initial transient; the power term
/// dominates at scale; the floor is the irreducible loss.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveParams {
    pub floor: f64,
    pub amplitude: f64,
    pub exponent: f64,
    pub exp_amplitude: f64,
    pub exp_timescale: f64,
}

impl CurveParams {
    pub fn validate(&self) -> Result<()> {
        let all_finite = self.floor.is_finite()
            && self.amplitude.is_finite()
            && self.exponent.is_finite()
            && self.exp_amplitude.is_finite()
            && self.exp_timescale.is_finite();
        if !all_finite {
            return Err(Error::InvalidCurve("curve parameters must be finite".into()));
        }
        if self.floor < 0.0 || self.amplitude < 0.0 || self.exponent < 0.0 || self.exp_amplitude < 0.0 {
            return Err(Error::InvalidCurve(
                "floor, amplitude, exponent and exp_amplitude must be non-negative".into(),
            ));
        }
        if self.exp_timescale <= 0.0 {
            return Err(Error::InvalidCurve("exp_timescale must be positive".into()));
        }
        Ok(())
    }

    pub fn value_at(&self, iter: u64) -> f64 {
        let x = iter as f64;
        self.floor
            + self.amplitude * x.powf(-self.exponent)
            + self.exp_amplitude * (-x / self.exp_timescale).exp()
    }
}

/// Evaluate the parametric family on a grid.
pub fn synth_curve(
    params: &CurveParams,
    grid: &[u64],
    config_id: impl Into<String>,
    kind: CurveKind,
) -> Result<LearningCurve> {
    params.validate()?;
    let points = grid.iter().map(|&iter| (iter, params.value_at(iter))).collect();
    LearningCurve::new(config_id, kind, points)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base_params() -> CurveParams {
        CurveParams {
            floor: 2.0,
            amplitude: 10.0,
            exponent: 0.067,
            exp_amplitude: 5.0,
            exp_timescale: 500.0,
        }
    }

    #[test]
    fn synth_matches_closed_form() {
        // Power term at x = 10000: 10 * 10000^(-0.067) = 5.395106225151276,
        // frozen from an independent evaluation.
        let params = CurveParams { exp_amplitude: 0.0, ..base_params() };
        let curve = synth_curve(&params, &[10_000], "c", CurveKind::Test).unwrap();
        assert!((curve.points()[0].1 - 7.395106225151276).abs() < 1e-12);

        // Exponential term alone decays by 1/e per timescale.
        let params = CurveParams {
            floor: 0.0,
            amplitude: 0.0,
            exponent: 0.1,
            exp_amplitude: 5.0,
            exp_timescale: 500.0,
        };
        let curve = synth_curve(&params, &[500], "c", CurveKind::Test).unwrap();
        assert!((curve.points()[0].1 - 5.0 / std::f64::consts::E).abs() < 1e-12);
    }

    #[test]
    fn synth_is_monotone_decreasing_for_positive_terms() {
        let grid: Vec<u64> = (1..=200).map(|i| i * 50).collect();
        let curve = synth_curve(&base_params(), &grid, "c", CurveKind::Test).unwrap();
        for pair in curve.points().windows(2) {
            assert!(pair[1].1 < pair[0].1, "loss must strictly decrease: {pair:?}");
        }
        // And it stays above the floor.
        for &(_, loss) in curve.points() {
            assert!(loss > 2.0);
        }
    }

    #[test]
    fn loglog_view_matches_componentwise_logs() {
        let params = CurveParams { floor: 0.0, exp_amplitude: 0.0, ..base_params() };
        let curve = synth_curve(&params, &[10_000], "c", CurveKind::Test).unwrap();
        let view = curve.loglog_view();
        assert!((view[0].0 - 9.210340371976184).abs() < 1e-12);
        assert!((view[0].1 - 1.6854922880716414).abs() < 1e-12);
    }

    #[test]
    fn rejects_malformed_point_lists() {
        assert!(LearningCurve::new("c", CurveKind::Test, vec![]).is_err());
        assert!(LearningCurve::new("", CurveKind::Test, vec![(1, 1.0)]).is_err());
        // Non-increasing iterations.
        assert!(LearningCurve::new("c", CurveKind::Test, vec![(5, 1.0), (5, 0.9)]).is_err());
        assert!(LearningCurve::new("c", CurveKind::Test, vec![(5, 1.0), (4, 0.9)]).is_err());
        // Iteration zero has no log-log image.
        assert!(LearningCurve::new("c", CurveKind::Test, vec![(0, 1.0)]).is_err());
        // Non-positive and non-finite losses.
        assert!(LearningCurve::new("c", CurveKind::Test, vec![(1, 0.0)]).is_err());
        assert!(LearningCurve::new("c", CurveKind::Test, vec![(1, -2.0)]).is_err());
        assert!(LearningCurve::new("c", CurveKind::Test, vec![(1, f64::NAN)]).is_err());
        assert!(LearningCurve::new("c", CurveKind::Test, vec![(1, f64::INFINITY)]).is_err());
    }

    #[test]
    fn rejects_bad_params() {
        let p = CurveParams { amplitude: -1.0, ..base_params() };
        assert!(p.validate().is_err());
        let p = CurveParams { floor: -0.1, ..base_params() };
        assert!(p.validate().is_err());
        let p = CurveParams { exp_timescale: 0.0, ..base_params() };
        assert!(p.validate().is_err());
        let p = CurveParams { exponent: f64::NAN, ..base_params() };
        assert!(p.validate().is_err());
        // All-zero params synthesize zero loss, which the curve rejects.
        let p = CurveParams {
            floor: 0.0,
            amplitude: 0.0,
            exponent: 0.1,
            exp_amplitude: 0.0,
            exp_timescale: 1.0,
        };
        assert!(synth_curve(&p, &[1, 2], "c", CurveKind::Test).is_err());
    }

    #[test]
    fn min_loss_reports_first_occurrence() {
        let curve = LearningCurve::new(
            "c",
            CurveKind::Test,
            vec![(1, 3.0), (2, 1.5), (3, 1.5), (4, 2.0)],
        )
        .unwrap();
        assert_eq!(curve.min_loss_point(), (2, 1.5));
    }

    #[test]
    fn kind_round_trips_through_strings() {
        for kind in [CurveKind::Train, CurveKind::Test] {
            assert_eq!(kind.to_string().parse::<CurveKind>().unwrap(), kind);
        }
        assert!("validation".parse::<CurveKind>().is_err());
    }
}
