//! Parametric simulator contrasting one-epoch training on a large
//! dataset with multi-epoch training on a small one.
//!
//! The model: only distinct tokens teach at full value. After the
//! dataset is exhausted, repeated tokens contribute a discounted
//! `repeat_value` fraction, the test loss picks up an overfitting
//! penalty that grows with the repeated fraction, and the train loss
//! dips below the test loss by that penalty plus a memorization margin.
//! Dropout suppresses both (fully at `dropout_suppression_ref`) at the
//! price of slowing effective learning.
//!
//! At iteration `t` with `c` tokens per iteration and dataset size `N`:
//!
//! ```text
//! distinct  = min(c*t, N)
//! repeats   = c*t - distinct
//! rho       = repeats / (c*t)
//! g         = min(1, dropout / dropout_suppression_ref)
//! E_eff     = (distinct + repeat_value * repeats) / (1 + dropout_slowdown * dropout)
//! test(t)   = floor + amplitude * E_eff^(-exponent) + overfit_amplitude * rho * (1 - g)
//! train(t)  = test(t) - (overfit_amplitude + memorization_margin) * rho * (1 - g) + noise
//! ```
//!
//! Noise is Gaussian, applied to the train curve only, and drawn from a
//! seeded generator so runs are reproducible.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::curves::{CurveKind, LearningCurve};
use crate::error::{Error, Result};

/// Train losses never clamp below this after noise.
const MIN_TRAIN_LOSS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub config_id: String,
    /// Distinct tokens available before repetition starts.
    pub dataset_tokens: u64,
    pub tokens_per_iter: u64,
    pub total_iters: u64,
    /// Dropout probability, `0 <= p < 1`.
    pub dropout: f64,
    /// Power-law amplitude of the loss in effective tokens.
    pub amplitude: f64,
    /// Power-law exponent, positive.
    pub exponent: f64,
    /// Irreducible loss.
    pub floor: f64,
    /// Learning value of a repeated token relative to a fresh one, in
    /// `[0, 1]`.
    pub repeat_value: f64,
    /// Test-loss penalty per unit repeated fraction.
    pub overfit_amplitude: f64,
    /// Relative slowdown of effective learning per unit dropout.
    pub dropout_slowdown: f64,
    /// Dropout level at which overfitting is fully suppressed.
    pub dropout_suppression_ref: f64,
    /// Extra train/test gap per unit repeated fraction on top of the
    /// overfitting penalty.
    pub memorization_margin: f64,
    /// Standard deviation of the train-only Gaussian noise.
    pub noise_sigma: f64,
    pub seed: u64,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.config_id.is_empty() {
            return Err(Error::InvalidConfig("config_id must be non-empty".into()));
        }
        if self.dataset_tokens == 0 || self.tokens_per_iter == 0 || self.total_iters == 0 {
            return Err(Error::InvalidConfig(
                "dataset_tokens, tokens_per_iter and total_iters must be positive".into(),
            ));
        }
        let finite = [
            self.dropout,
            self.amplitude,
            self.exponent,
            self.floor,
            self.repeat_value,
            self.overfit_amplitude,
            self.dropout_slowdown,
            self.dropout_suppression_ref,
            self.memorization_margin,
            self.noise_sigma,
        ];
        if finite.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidConfig("simulator parameters must be finite".into()));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(Error::InvalidConfig(format!(
                "dropout must be in [0, 1), got {}",
                self.dropout
            )));
        }
        if self.amplitude <= 0.0 || self.exponent <= 0.0 {
            return Err(Error::InvalidConfig(
                "amplitude and exponent must be positive".into(),
            ));
        }
        if self.floor < 0.0 {
            return Err(Error::InvalidConfig("floor must be non-negative".into()));
        }
        if !(0.0..=1.0).contains(&self.repeat_value) {
            return Err(Error::InvalidConfig(format!(
                "repeat_value must be in [0, 1], got {}",
                self.repeat_value
            )));
        }
        if self.overfit_amplitude < 0.0 || self.memorization_margin < 0.0 {
            return Err(Error::InvalidConfig(
                "overfit_amplitude and memorization_margin must be non-negative".into(),
            ));
        }
        if self.dropout_slowdown < 0.0 {
            return Err(Error::InvalidConfig("dropout_slowdown must be non-negative".into()));
        }
        if !(self.dropout_suppression_ref > 0.0 && self.dropout_suppression_ref < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "dropout_suppression_ref must be in (0, 1), got {}",
                self.dropout_suppression_ref
            )));
        }
        if self.noise_sigma < 0.0 {
            return Err(Error::InvalidConfig("noise_sigma must be non-negative".into()));
        }
        Ok(())
    }

    /// Epochs completed by the end of the run, fractional.
    pub fn epochs_trained(&self) -> f64 {
        (self.tokens_per_iter as f64 * self.total_iters as f64) / self.dataset_tokens as f64
    }
}

/// Run the simulator, returning `(train, test)` curves on the iteration
/// grid `1..=total_iters`.
pub fn simulate(config: &SimConfig) -> Result<(LearningCurve, LearningCurve)> {
    config.validate()?;
    let c = config.tokens_per_iter as f64;
    let n_tokens = config.dataset_tokens as f64;
    let g = (config.dropout / config.dropout_suppression_ref).min(1.0);
    let slowdown = 1.0 + config.dropout_slowdown * config.dropout;
    let gap_per_rho = (config.overfit_amplitude + config.memorization_margin) * (1.0 - g);

    let mut noise = if config.noise_sigma > 0.0 {
        let rng = ChaCha8Rng::seed_from_u64(config.seed);
        let normal = Normal::new(0.0, config.noise_sigma)
            .map_err(|e| Error::InvalidConfig(format!("noise distribution: {e}")))?;
        Some((rng, normal))
    } else {
        None
    };

    let iters = usize::try_from(config.total_iters)
        .map_err(|_| Error::InvalidConfig("total_iters too large".into()))?;
    let mut train_pts = Vec::with_capacity(iters);
    let mut test_pts = Vec::with_capacity(iters);
    for t in 1..=config.total_iters {
        let seen = c * t as f64;
        let distinct = seen.min(n_tokens);
        let repeats = seen - distinct;
        let rho = repeats / seen;
        let effective = (distinct + config.repeat_value * repeats) / slowdown;
        let test = config.floor
            + config.amplitude * effective.powf(-config.exponent)
            + config.overfit_amplitude * rho * (1.0 - g);
        let drawn = match &mut noise {
            Some((rng, normal)) => normal.sample(rng),
            None => 0.0,
        };
        let train = (test - gap_per_rho * rho + drawn).max(MIN_TRAIN_LOSS);
        test_pts.push((t, test));
        train_pts.push((t, train));
    }

    let train = LearningCurve::new(config.config_id.clone(), CurveKind::Train, train_pts)?;
    let test = LearningCurve::new(config.config_id.clone(), CurveKind::Test, test_pts)?;
    Ok((train, test))
}

/// Dropout for a given 0-based epoch under a schedule that starts at
/// zero and never decreases. Epochs past the end hold the last value.
pub fn adaptive_dropout(epoch: u32, schedule: &[f64]) -> Result<f64> {
    if schedule.is_empty() {
        return Err(Error::InvalidSchedule("schedule must be non-empty".into()));
    }
    if schedule[0] != 0.0 {
        return Err(Error::InvalidSchedule(format!(
            "first epoch must run without dropout, got {}",
            schedule[0]
        )));
    }
    for (i, &p) in schedule.iter().enumerate() {
        if !p.is_finite() || !(0.0..1.0).contains(&p) {
            return Err(Error::InvalidSchedule(format!(
                "schedule entry {i} must be in [0, 1), got {p}"
            )));
        }
        if i > 0 && p < schedule[i - 1] {
            return Err(Error::InvalidSchedule(format!(
                "schedule must be non-decreasing, entry {i} drops from {} to {p}",
                schedule[i - 1]
            )));
        }
    }
    let idx = (epoch as usize).min(schedule.len() - 1);
    Ok(schedule[idx])
}

/// Trailing mean over the last `window` train samples, as a smoothed
/// stand-in for the test loss when only train measurements exist.
/// Early points average what is available. The result is a test-kind
/// curve on the same grid.
pub fn running_train_estimate(train: &LearningCurve, window: usize) -> Result<LearningCurve> {
    if window == 0 {
        return Err(Error::InvalidInput("window must be positive".into()));
    }
    let pts = train.points();
    let mut prefix = Vec::with_capacity(pts.len() + 1);
    prefix.push(0.0f64);
    for &(_, loss) in pts {
        prefix.push(prefix.last().unwrap() + loss);
    }
    let smoothed: Vec<(u64, f64)> = pts
        .iter()
        .enumerate()
        .map(|(i, &(iter, _))| {
            let w = window.min(i + 1);
            (iter, (prefix[i + 1] - prefix[i + 1 - w]) / w as f64)
        })
        .collect();
    LearningCurve::new(train.config_id(), CurveKind::Test, smoothed)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Small, fast configuration: 1000 iterations of 100 tokens.
    fn base_config() -> SimConfig {
        SimConfig {
            config_id: "sim".into(),
            dataset_tokens: 200_000,
            tokens_per_iter: 100,
            total_iters: 1000,
            dropout: 0.0,
            amplitude: 10.0,
            exponent: 0.1,
            floor: 2.0,
            repeat_value: 0.3,
            overfit_amplitude: 0.05,
            dropout_slowdown: 2.0,
            dropout_suppression_ref: 0.1,
            memorization_margin: 0.05,
            noise_sigma: 0.0,
            seed: 7,
        }
    }

    fn multi_config() -> SimConfig {
        // Dataset exhausted after 100 iterations: 10 epochs total.
        SimConfig { dataset_tokens: 10_000, ..base_config() }
    }

    #[test]
    fn one_epoch_train_equals_test_exactly_without_noise() {
        let (train, test) = simulate(&base_config()).unwrap();
        assert_eq!(train.kind(), CurveKind::Train);
        assert_eq!(test.kind(), CurveKind::Test);
        for (a, b) in train.points().iter().zip(test.points()) {
            assert_eq!(a, b);
        }
    }

    #[test]
    fn test_loss_decreases_strictly_and_stays_above_floor() {
        for config in [base_config(), multi_config()] {
            let (_, test) = simulate(&config).unwrap();
            for pair in test.points().windows(2) {
                assert!(pair[1].1 < pair[0].1, "{pair:?}");
            }
            for &(_, loss) in test.points() {
                assert!(loss > config.floor);
            }
        }
    }

    #[test]
    fn repetition_opens_a_nondecreasing_gap() {
        let config = multi_config();
        let (train, test) = simulate(&config).unwrap();
        let epoch_iters = config.dataset_tokens / config.tokens_per_iter;
        let mut prev_gap = 0.0;
        for (&(iter, tr), &(_, te)) in train.points().iter().zip(test.points()) {
            let gap = te - tr;
            if iter <= epoch_iters {
                assert_eq!(gap, 0.0, "no gap within the first epoch (iter {iter})");
            } else {
                assert!(gap > 0.0, "positive gap after exhaustion (iter {iter})");
                assert!(gap >= prev_gap, "gap must not shrink (iter {iter})");
            }
            prev_gap = gap;
        }
    }

    #[test]
    fn reference_dropout_fully_suppresses_overfitting() {
        let config = SimConfig { dropout: 0.1, ..multi_config() };
        let (train, test) = simulate(&config).unwrap();
        // Penalty and gap both vanish at the suppression reference.
        for (a, b) in train.points().iter().zip(test.points()) {
            assert_eq!(a.1, b.1);
        }
        // The test curve is then a pure slowed-down power law.
        let slowdown = 1.0 + config.dropout_slowdown * config.dropout;
        for &(t, loss) in test.points() {
            let seen = config.tokens_per_iter as f64 * t as f64;
            let distinct = seen.min(config.dataset_tokens as f64);
            let effective = (distinct + config.repeat_value * (seen - distinct)) / slowdown;
            let expected = config.floor + config.amplitude * effective.powf(-config.exponent);
            assert_eq!(loss, expected);
        }
    }

    #[test]
    fn dropout_slows_learning_pointwise() {
        let baseline = base_config();
        let dropped = SimConfig { dropout: 0.1, ..base_config() };
        let (_, test0) = simulate(&baseline).unwrap();
        let (_, test1) = simulate(&dropped).unwrap();
        for (a, b) in test0.points().iter().zip(test1.points()) {
            assert!(b.1 > a.1, "dropout must cost loss at iter {}", a.0);
        }
    }

    #[test]
    fn noise_is_train_only_and_seed_deterministic() {
        let noisy = SimConfig { noise_sigma: 0.05, ..multi_config() };
        let (train1, test1) = simulate(&noisy).unwrap();
        let (train2, test2) = simulate(&noisy).unwrap();
        assert_eq!(train1, train2);
        assert_eq!(test1, test2);

        let reseeded = SimConfig { seed: 8, ..noisy.clone() };
        let (train3, test3) = simulate(&reseeded).unwrap();
        assert_eq!(test1, test3, "test curve carries no noise");
        assert_ne!(train1, train3, "different seeds give different train noise");

        let clean = SimConfig { noise_sigma: 0.0, ..noisy };
        let (_, test0) = simulate(&clean).unwrap();
        assert_eq!(test0, test1);
    }

    #[test]
    fn extreme_noise_clamps_train_above_zero() {
        let config = SimConfig { noise_sigma: 50.0, floor: 0.01, ..base_config() };
        let (train, _) = simulate(&config).unwrap();
        let min = train.points().iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
        assert!(min >= MIN_TRAIN_LOSS);
        // With this much noise the clamp actually engages somewhere.
        assert_eq!(min, MIN_TRAIN_LOSS);
    }

    #[test]
    fn epochs_trained_counts_dataset_passes() {
        assert_eq!(multi_config().epochs_trained(), 10.0);
        assert_eq!(base_config().epochs_trained(), 0.5);
    }

    #[test]
    fn validation_rejects_out_of_range_parameters() {
        let ok = base_config();
        assert!(ok.validate().is_ok());
        for broken in [
            SimConfig { config_id: String::new(), ..ok.clone() },
            SimConfig { dataset_tokens: 0, ..ok.clone() },
            SimConfig { tokens_per_iter: 0, ..ok.clone() },
            SimConfig { total_iters: 0, ..ok.clone() },
            SimConfig { dropout: 1.0, ..ok.clone() },
            SimConfig { dropout: -0.1, ..ok.clone() },
            SimConfig { amplitude: 0.0, ..ok.clone() },
            SimConfig { exponent: 0.0, ..ok.clone() },
            SimConfig { floor: -1.0, ..ok.clone() },
            SimConfig { repeat_value: 1.5, ..ok.clone() },
            SimConfig { overfit_amplitude: -0.1, ..ok.clone() },
            SimConfig { dropout_slowdown: -1.0, ..ok.clone() },
            SimConfig { dropout_suppression_ref: 0.0, ..ok.clone() },
            SimConfig { dropout_suppression_ref: 1.0, ..ok.clone() },
            SimConfig { memorization_margin: -0.5, ..ok.clone() },
            SimConfig { noise_sigma: -0.1, ..ok.clone() },
            SimConfig { exponent: f64::NAN, ..ok.clone() },
        ] {
            let err = simulate(&broken).unwrap_err();
            assert_eq!(err.code(), "invalid_config", "{broken:?}");
        }
    }

    #[test]
    fn adaptive_schedule_holds_last_value() {
        let schedule = [0.0, 0.0, 0.1, 0.2];
        assert_eq!(adaptive_dropout(0, &schedule).unwrap(), 0.0);
        assert_eq!(adaptive_dropout(1, &schedule).unwrap(), 0.0);
        assert_eq!(adaptive_dropout(2, &schedule).unwrap(), 0.1);
        assert_eq!(adaptive_dropout(3, &schedule).unwrap(), 0.2);
        assert_eq!(adaptive_dropout(100, &schedule).unwrap(), 0.2);
    }

    #[test]
    fn adaptive_schedule_rejections() {
        for bad in [
            vec![],
            vec![0.1, 0.2],
            vec![0.0, 0.2, 0.1],
            vec![0.0, 1.0],
            vec![0.0, -0.1],
            vec![0.0, f64::NAN],
        ] {
            let err = adaptive_dropout(0, &bad).unwrap_err();
            assert_eq!(err.code(), "invalid_schedule", "{bad:?}");
        }
    }

    #[test]
    fn running_estimate_windows_correctly() {
        let train = LearningCurve::new(
            "c",
            CurveKind::Train,
            vec![(1, 4.0), (2, 2.0), (3, 3.0), (4, 5.0)],
        )
        .unwrap();
        let est = running_train_estimate(&train, 2).unwrap();
        assert_eq!(est.kind(), CurveKind::Test);
        assert_eq!(est.config_id(), "c");
        let expect = [4.0, 3.0, 2.5, 4.0];
        for (&(_, got), want) in est.points().iter().zip(expect) {
            assert!((got - want).abs() < 1e-12);
        }
        // Window 1 is the identity on losses.
        let id = running_train_estimate(&train, 1).unwrap();
        for (a, b) in id.points().iter().zip(train.points()) {
            assert_eq!(a.1, b.1);
        }
        assert!(running_train_estimate(&train, 0).is_err());
    }
}
