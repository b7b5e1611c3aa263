use crate::error::{Error, Result};

/// Closed interval on an iteration axis. `hi` may be `f64::INFINITY` for
/// a right-unbounded range. The empty range is represented as `[0, 0]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterRange {
    pub lo: f64,
    pub hi: f64,
}

impl IterRange {
    pub const EMPTY: IterRange = IterRange { lo: 0.0, hi: 0.0 };

    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !lo.is_finite() || lo < 0.0 {
            return Err(Error::InvalidInput(format!(
                "range lower bound must be finite and non-negative, got {lo}"
            )));
        }
        if hi.is_nan() || hi < lo {
            return Err(Error::InvalidInput(format!(
                "range upper bound must be >= lower bound, got [{lo}, {hi}]"
            )));
        }
        Ok(IterRange { lo, hi })
    }

    pub fn unbounded(lo: f64) -> Result<Self> {
        IterRange::new(lo, f64::INFINITY)
    }

    /// Membership is inclusive at both bounds.
    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo && x <= self.hi
    }

    pub fn is_empty(&self) -> bool {
        self.lo == 0.0 && self.hi == 0.0
    }

    pub fn is_unbounded(&self) -> bool {
        self.hi == f64::INFINITY
    }

    /// Rescale both bounds by `1/scale`, mapping a range on one iteration
    /// axis onto another. Infinity is preserved.
    pub fn divided_by(&self, scale: f64) -> IterRange {
        IterRange { lo: self.lo / scale, hi: self.hi / scale }
    }
}

/// Closed interval of tokens-per-parameter ratios. Same shape and
/// conventions as [`IterRange`] but on a dimensionless axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioRange {
    pub lo: f64,
    pub hi: f64,
}

impl RatioRange {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !lo.is_finite() || lo < 0.0 {
            return Err(Error::InvalidInput(format!(
                "ratio lower bound must be finite and non-negative, got {lo}"
            )));
        }
        if hi.is_nan() || hi < lo {
            return Err(Error::InvalidInput(format!(
                "ratio upper bound must be >= lower bound, got [{lo}, {hi}]"
            )));
        }
        Ok(RatioRange { lo, hi })
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo && x <= self.hi
    }

    pub fn is_unbounded(&self) -> bool {
        self.hi == f64::INFINITY
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn membership_is_inclusive() {
        let r = IterRange::new(12000.0, 84000.0).unwrap();
        assert!(r.contains(12000.0));
        assert!(r.contains(84000.0));
        assert!(r.contains(30000.0));
        assert!(!r.contains(11999.9));
        assert!(!r.contains(84000.1));
    }

    #[test]
    fn unbounded_contains_everything_above_lo() {
        let r = IterRange::unbounded(28000.0).unwrap();
        assert!(r.is_unbounded());
        assert!(r.contains(28000.0));
        assert!(r.contains(1e300));
        assert!(!r.contains(27999.0));
    }

    #[test]
    fn empty_range_contains_only_zero() {
        assert!(IterRange::EMPTY.is_empty());
        assert!(IterRange::EMPTY.contains(0.0));
        assert!(!IterRange::EMPTY.contains(1.0));
    }

    #[test]
    fn rejects_inverted_or_negative_bounds() {
        assert!(IterRange::new(5.0, 4.0).is_err());
        assert!(IterRange::new(-1.0, 4.0).is_err());
        assert!(IterRange::new(f64::NAN, 4.0).is_err());
        assert!(IterRange::new(0.0, f64::NAN).is_err());
        assert!(RatioRange::new(3.0, 2.0).is_err());
    }

    #[test]
    fn rescaling_preserves_infinity_and_zero() {
        let r = IterRange::unbounded(28000.0).unwrap().divided_by(0.4);
        assert_eq!(r.lo, 70000.0);
        assert!(r.is_unbounded());
        let z = IterRange::new(0.0, 30000.0).unwrap().divided_by(2.5);
        assert_eq!(z.lo, 0.0);
        assert_eq!(z.hi, 12000.0);
    }
}
