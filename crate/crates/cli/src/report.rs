//! JSON report shapes emitted by the subcommands.
//!
//! Every float in a rendered report is rounded to nine significant
//! digits so reruns are byte-identical across platforms. Unbounded
//! interval ends serialize as `null`.

use serde::{Deserialize, Serialize};

use onepass_core::{IterRange, RatioRange};

use crate::formats::round_sig9;
use crate::CliResult;

/// Closed interval with `hi: null` standing for an unbounded end.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RangeJson {
    pub lo: f64,
    pub hi: Option<f64>,
}

impl From<IterRange> for RangeJson {
    fn from(r: IterRange) -> Self {
        RangeJson { lo: r.lo, hi: (!r.is_unbounded()).then_some(r.hi) }
    }
}

impl From<RatioRange> for RangeJson {
    fn from(r: RatioRange) -> Self {
        RangeJson { lo: r.lo, hi: (!r.is_unbounded()).then_some(r.hi) }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ParamsReport {
    pub d_model: u64,
    pub n_layers: u64,
    pub vocab_size: u64,
    pub cutoffs: Vec<u64>,
    pub adaptive_divisor: u64,
    pub tokens_per_iter: u64,
    pub params: ParamBreakdownJson,
    pub relative_flops: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reference: Option<ReferenceJson>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ParamBreakdownJson {
    pub total: u64,
    pub attention: u64,
    pub feed_forward: u64,
    pub input_embedding: u64,
    pub output_softmax: u64,
    pub projections: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReferenceJson {
    pub d_model: u64,
    pub params: u64,
    pub relative_flops: f64,
    pub flops_ratio: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitReport {
    pub config_id: String,
    pub kind: String,
    pub amplitude: f64,
    pub exponent: f64,
    pub r2: f64,
    pub region: RangeJson,
    pub points_used: usize,
    pub detected: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RemapReport {
    pub reference: String,
    pub models: Vec<RemapModelJson>,
    pub crossings: Vec<CrossingJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tokens_per_param_intersection: Option<RangeJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub geometric_midpoint: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RemapModelJson {
    pub config_id: String,
    pub params: u64,
    pub tokens_per_iter: u64,
    pub scale: f64,
    pub reference_range: RangeJson,
    pub native_range: RangeJson,
    pub tokens_per_param: RangeJson,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CrossingJson {
    pub a: String,
    pub b: String,
    pub reference_iterations: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PlanReport {
    pub method: String,
    pub target_ratio: f64,
    pub chosen: PlanCandidateJson,
    pub candidates: Vec<PlanCandidateJson>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PlanCandidateJson {
    pub config_id: String,
    pub params: u64,
    pub tokens: f64,
    pub iterations: u64,
    pub remainder_tokens: f64,
    pub tokens_per_param: f64,
    pub objective: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpeedupJson {
    pub mode: String,
    pub baseline_iters: f64,
    pub target_iters: f64,
    pub speedup: f64,
    pub speedup_1dp: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epoch_limit: Option<u32>,
    pub flops_adjusted: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub combined: Option<CombinedJson>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CombinedJson {
    pub factor: f64,
    pub speedup: f64,
    pub speedup_1dp: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimReport {
    pub config_id: String,
    pub epochs: f64,
    pub total_iters: u64,
    pub final_train_loss: f64,
    pub final_test_loss: f64,
    pub min_test_loss: f64,
    pub min_test_iter: u64,
}

/// Render a report as pretty JSON with every float rounded to nine
/// significant digits. Integers pass through untouched.
pub fn to_json_string<T: Serialize>(report: &T) -> CliResult<String> {
    let mut value = serde_json::to_value(report)
        .map_err(|e| crate::CliError::Usage(format!("report serialization failed: {e}")))?;
    round_floats(&mut value);
    let mut text = serde_json::to_string_pretty(&value)
        .map_err(|e| crate::CliError::Usage(format!("report serialization failed: {e}")))?;
    text.push('\n');
    Ok(text)
}

fn round_floats(value: &mut serde_json::Value) {
    use serde_json::Value;
    match value {
        Value::Number(n) => {
            if n.is_f64() {
                let rounded = round_sig9(n.as_f64().expect("checked f64"));
                if let Some(replacement) = serde_json::Number::from_f64(rounded) {
                    *n = replacement;
                }
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_floats),
        Value::Object(map) => map.values_mut().for_each(round_floats),
        _ => {}
    }
}
