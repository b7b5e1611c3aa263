//! Token-budget planning: pick the model size whose tokens-per-parameter
//! ratio lands closest to a target under a given budget rule.
//!
//! All selection happens on the log scale: the objective for a candidate
//! with ratio `r` is `|ln(target) - ln(r)|`, so overshooting by a factor
//! and undershooting by the same factor are equally bad.

use crate::error::{Error, Result};
use crate::model_budget::{count_params, ModelConfig};
use crate::range::IterRange;

/// Default tokens-per-parameter target for one-epoch training.
pub const DEFAULT_TARGET_RATIO: f64 = 5.0;

/// A model size under consideration.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub id: String,
    pub params: f64,
    pub tokens_per_iter: u64,
}

impl Candidate {
    pub fn new(id: impl Into<String>, params: f64, tokens_per_iter: u64) -> Self {
        Candidate { id: id.into(), params, tokens_per_iter }
    }

    /// Candidate with parameters counted from a structural config.
    pub fn from_config(id: impl Into<String>, config: &ModelConfig) -> Result<Self> {
        let count = count_params(config)?;
        Ok(Candidate {
            id: id.into(),
            params: count.total as f64,
            tokens_per_iter: config.tokens_per_iter,
        })
    }

    fn validate(&self) -> Result<()> {
        if self.id.is_empty() {
            return Err(Error::InvalidInput("candidate id must be non-empty".into()));
        }
        if !self.params.is_finite() || self.params <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "candidate {}: params must be finite and positive, got {}",
                self.id, self.params
            )));
        }
        if self.tokens_per_iter == 0 {
            return Err(Error::InvalidInput(format!(
                "candidate {}: tokens_per_iter must be positive",
                self.id
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlanMethod {
    /// Token budget shrinks as the model grows: `T = P0 * T0 / P`.
    ConstantProduct,
    /// Every candidate trains for the same number of iterations.
    FixedIterations,
    /// Candidates carry precomputed optimal-iteration ranges.
    RangeTable,
}

/// A resolved training plan for the chosen candidate.
#[derive(Debug, Clone, PartialEq)]
pub struct Plan {
    pub candidate: Candidate,
    /// Token budget assigned to the candidate.
    pub tokens: f64,
    /// Whole iterations that fit in the budget.
    pub iterations: u64,
    /// Tokens left over after the last whole iteration.
    pub remainder_tokens: f64,
    /// Tokens per parameter.
    pub ratio: f64,
    /// `|ln(target) - ln(ratio)|`.
    pub objective: f64,
    pub method: PlanMethod,
}

fn validate_target(target: f64) -> Result<()> {
    if !target.is_finite() || target <= 0.0 {
        return Err(Error::InvalidInput(format!(
            "target ratio must be finite and positive, got {target}"
        )));
    }
    Ok(())
}

fn objective(ratio: f64, target: f64) -> f64 {
    (target.ln() - ratio.ln()).abs()
}

/// Among `(candidate, tokens)` pairs, pick the smallest objective.
/// Ties prefer the smaller model, then input order.
fn pick_best<'a>(
    scored: impl Iterator<Item = (&'a Candidate, f64)>,
    target: f64,
    method: PlanMethod,
) -> Option<Plan> {
    let mut best: Option<Plan> = None;
    for (candidate, tokens) in scored {
        let ratio = tokens / candidate.params;
        let objective = objective(ratio, target);
        let replace = match &best {
            None => true,
            Some(b) => {
                objective < b.objective
                    || (objective == b.objective && candidate.params < b.candidate.params)
            }
        };
        if replace {
            let per_iter = candidate.tokens_per_iter as f64;
            let iterations = (tokens / per_iter).floor() as u64;
            best = Some(Plan {
                candidate: candidate.clone(),
                tokens,
                iterations,
                remainder_tokens: tokens - iterations as f64 * per_iter,
                ratio,
                objective,
                method,
            });
        }
    }
    best
}

fn validate_candidates(candidates: &[Candidate]) -> Result<()> {
    if candidates.is_empty() {
        return Err(Error::InvalidInput("no candidates given".into()));
    }
    for c in candidates {
        c.validate()?;
    }
    Ok(())
}

/// Hold `params * tokens` constant at `p0 * t0`: a candidate with more
/// parameters gets proportionally fewer tokens.
pub fn plan_constant_product(
    p0: f64,
    t0: f64,
    candidates: &[Candidate],
    target: f64,
) -> Result<Plan> {
    if !p0.is_finite() || p0 <= 0.0 || !t0.is_finite() || t0 <= 0.0 {
        return Err(Error::InvalidInput(format!(
            "baseline p0 and t0 must be finite and positive, got p0={p0}, t0={t0}"
        )));
    }
    validate_target(target)?;
    validate_candidates(candidates)?;
    let plan = pick_best(
        candidates.iter().map(|c| (c, p0 * t0 / c.params)),
        target,
        PlanMethod::ConstantProduct,
    );
    Ok(plan.expect("candidates are non-empty"))
}

/// Every candidate trains for `iterations` steps of `tokens_per_iter`
/// tokens; bigger models see the same data at a smaller ratio.
pub fn plan_fixed_iterations(
    iterations: u64,
    tokens_per_iter: u64,
    candidates: &[Candidate],
    target: f64,
) -> Result<Plan> {
    if iterations == 0 || tokens_per_iter == 0 {
        return Err(Error::InvalidInput(
            "iterations and tokens_per_iter must be positive".into(),
        ));
    }
    validate_target(target)?;
    validate_candidates(candidates)?;
    let tokens = iterations as f64 * tokens_per_iter as f64;
    let plan = pick_best(
        candidates.iter().map(|c| (c, tokens)),
        target,
        PlanMethod::FixedIterations,
    )
    .map(|mut p| {
        p.iterations = iterations;
        p.remainder_tokens = 0.0;
        p
    });
    Ok(plan.expect("candidates are non-empty"))
}

/// Pick by membership of `iterations` in each candidate's optimal range.
/// If several ranges contain it, the smallest model wins; if none does,
/// the candidate with the nearest finite range boundary in log-iteration
/// distance wins. Zero and infinite boundaries never enter the distance.
pub fn plan_from_ranges(
    iterations: u64,
    ranges: &[(Candidate, IterRange)],
    target: f64,
) -> Result<Plan> {
    if iterations == 0 {
        return Err(Error::InvalidInput("iterations must be positive".into()));
    }
    validate_target(target)?;
    if ranges.is_empty() {
        return Err(Error::InvalidInput("no candidates given".into()));
    }
    for (c, _) in ranges {
        c.validate()?;
    }

    let x = iterations as f64;
    let containing: Vec<&Candidate> = ranges
        .iter()
        .filter(|(_, r)| !r.is_empty() && r.contains(x))
        .map(|(c, _)| c)
        .collect();

    let chosen = if let Some(first) = containing.first() {
        containing.iter().skip(1).fold(*first, |best, c| {
            if c.params < best.params {
                c
            } else {
                best
            }
        })
    } else {
        // Nearest finite positive boundary on the log axis.
        let mut best: Option<(&Candidate, f64)> = None;
        for (c, r) in ranges {
            let mut dist = f64::INFINITY;
            for b in [r.lo, r.hi] {
                if b > 0.0 && b.is_finite() {
                    dist = dist.min((x.ln() - b.ln()).abs());
                }
            }
            let replace = match &best {
                None => dist.is_finite(),
                Some((bc, bd)) => dist < *bd || (dist == *bd && c.params < bc.params),
            };
            if replace {
                best = Some((c, dist));
            }
        }
        best.ok_or_else(|| {
            Error::InvalidInput("every candidate range is empty or unbounded on both sides".into())
        })?
        .0
    };

    let per_iter = chosen.tokens_per_iter as f64;
    let tokens = x * per_iter;
    let ratio = tokens / chosen.params;
    Ok(Plan {
        candidate: chosen.clone(),
        tokens,
        iterations,
        remainder_tokens: 0.0,
        ratio,
        objective: objective(ratio, target),
        method: PlanMethod::RangeTable,
    })
}
