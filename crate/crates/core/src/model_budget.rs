//! Parameter and relative-FLOPS accounting for a family of transformer
//! language models with adaptive input and softmax layers.
//!
//! Counts cover weight matrices only: biases and layer-norm gains are
//! excluded, as is any positional machinery. The FLOPS figure is
//! relative (proportional to parameters times tokens touched per
//! iteration); only ratios between configs are meaningful.

use crate::error::{Error, Result};

/// Structural description of one model in the family.
///
/// `cutoffs` are the vocabulary cluster boundaries of the adaptive input
/// and softmax layers, strictly increasing and all below `vocab_size`.
/// An empty list means a single full-width cluster and no projections.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModelConfig {
    pub d_model: u64,
    pub n_layers: u64,
    pub vocab_size: u64,
    pub cutoffs: Vec<u64>,
    pub adaptive_divisor: u64,
    pub tokens_per_iter: u64,
}

impl ModelConfig {
    /// Benchmark-family defaults: 6 layers, 793471-word vocabulary,
    /// adaptive cutoffs at 4k/20k/100k with divisor 4, and 6912 tokens
    /// per iteration (256 sentences of average length 27).
    pub fn with_defaults(d_model: u64) -> Self {
        ModelConfig {
            d_model,
            n_layers: 6,
            vocab_size: 793_471,
            cutoffs: vec![4_000, 20_000, 100_000],
            adaptive_divisor: 4,
            tokens_per_iter: 6_912,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.d_model == 0 {
            return Err(Error::InvalidConfig("d_model must be positive".into()));
        }
        if self.vocab_size == 0 {
            return Err(Error::InvalidConfig("vocab_size must be positive".into()));
        }
        if self.adaptive_divisor == 0 {
            return Err(Error::InvalidConfig("adaptive_divisor must be positive".into()));
        }
        if self.tokens_per_iter == 0 {
            return Err(Error::InvalidConfig("tokens_per_iter must be positive".into()));
        }
        for pair in self.cutoffs.windows(2) {
            if pair[1] <= pair[0] {
                return Err(Error::InvalidConfig(format!(
                    "cutoffs must be strictly increasing, got {} then {}",
                    pair[0], pair[1]
                )));
            }
        }
        if let Some(&first) = self.cutoffs.first() {
            if first == 0 {
                return Err(Error::InvalidConfig("cutoffs must be positive".into()));
            }
        }
        if let Some(&last) = self.cutoffs.last() {
            if last >= self.vocab_size {
                return Err(Error::InvalidConfig(format!(
                    "last cutoff {} must be below vocab_size {}",
                    last, self.vocab_size
                )));
            }
        }
        Ok(())
    }

    /// Embedding width of cluster `i`: `d_model / divisor^i`, integer
    /// division, floored at 1.
    fn cluster_dim(&self, i: usize) -> u64 {
        let mut dim = self.d_model;
        for _ in 0..i {
            dim /= self.adaptive_divisor;
        }
        dim.max(1)
    }

    /// Cluster sizes as (word count, embedding width) pairs.
    fn clusters(&self) -> Vec<(u64, u64)> {
        let mut out = Vec::with_capacity(self.cutoffs.len() + 1);
        let mut lo = 0;
        for (i, hi) in self.cutoffs.iter().chain(std::iter::once(&self.vocab_size)).enumerate() {
            out.push((hi - lo, self.cluster_dim(i)));
            lo = *hi;
        }
        out
    }
}

/// Weight counts by block. `total` is always the sum of the other five
/// fields. `projections` covers both the input and softmax sides.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParamCount {
    pub total: u64,
    pub attention: u64,
    pub feed_forward: u64,
    pub input_embedding: u64,
    pub output_softmax: u64,
    pub projections: u64,
}

fn overflow() -> Error {
    Error::InvalidConfig("parameter count overflows u64".into())
}

/// Count weights for one config.
///
/// Per layer: attention contributes `4 * d^2` (Q, K, V, output) and the
/// feed-forward block `8 * d^2` (two matrices at inner width `4d`).
/// Each adaptive cluster `i` contributes `n_i * dim_i` embedding weights
/// per side, plus a `d * dim_i` projection per side for every cluster
/// after the first. Input and softmax sides are untied, so both are
/// counted in full.
pub fn count_params(config: &ModelConfig) -> Result<ParamCount> {
    config.validate()?;
    let d = config.d_model;
    let d2 = d.checked_mul(d).ok_or_else(overflow)?;
    let attention = d2.checked_mul(4 * config.n_layers).ok_or_else(overflow)?;
    let feed_forward = d2.checked_mul(8 * config.n_layers).ok_or_else(overflow)?;

    let mut embedding_side: u64 = 0;
    let mut projection_side: u64 = 0;
    for (i, (count, dim)) in config.clusters().into_iter().enumerate() {
        let words = count.checked_mul(dim).ok_or_else(overflow)?;
        embedding_side = embedding_side.checked_add(words).ok_or_else(overflow)?;
        if i > 0 {
            let proj = d.checked_mul(dim).ok_or_else(overflow)?;
            projection_side = projection_side.checked_add(proj).ok_or_else(overflow)?;
        }
    }

    let projections = projection_side.checked_mul(2).ok_or_else(overflow)?;
    let total = attention
        .checked_add(feed_forward)
        .and_then(|t| t.checked_add(embedding_side))
        .and_then(|t| t.checked_add(embedding_side))
        .and_then(|t| t.checked_add(projections))
        .ok_or_else(overflow)?;

    Ok(ParamCount {
        total,
        attention,
        feed_forward,
        input_embedding: embedding_side,
        output_softmax: embedding_side,
        projections,
    })
}

/// Relative compute cost of one training iteration: parameters times
/// tokens per iteration. Only ratios between configs are meaningful.
pub fn per_iter_flops(config: &ModelConfig) -> Result<f64> {
    let params = count_params(config)?;
    Ok(params.total as f64 * config.tokens_per_iter as f64)
}
