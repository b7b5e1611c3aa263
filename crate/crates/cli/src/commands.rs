//! Subcommand definitions and dispatch for the `onepass` binary.
//!
//! Exit codes: 0 success, 2 bad invocation or malformed input, 3 an
//! analysis that ran and failed (the error object on stderr names the
//! failure code). Reports go to standard output unless a path flag
//! redirects them; data files are written only where flags ask for them.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use onepass_core::curves::LearningCurve;
use onepass_core::fitting::{detect_power_region, fit_power_law};
use onepass_core::model_budget::{count_params, per_iter_flops, ModelConfig};
use onepass_core::planner::{
    plan_constant_product, plan_fixed_iterations, plan_from_ranges, Candidate, Plan,
};
use onepass_core::remap::{
    find_intersections, geometric_midpoint, intersect_ranges, optimal_ranges, remap_curve_scaled,
    tokens_per_param_range, RemappedCurve,
};
use onepass_core::speedup::{adjustment_speedup, combined_speedup, epoch_speedup, ReachMode};
use onepass_core::{IterRange, RatioRange};

use crate::config::{builtin_model, ConfigDoc, ResolvedModel};
use crate::formats::{self, parse_u64_list, read_curve, remapped_to_csv, write_curve};
use crate::report::{
    to_json_string, CombinedJson, CrossingJson, FitReport, ParamBreakdownJson, ParamsReport,
    PlanCandidateJson, PlanReport, RangeJson, ReferenceJson, RemapModelJson, RemapReport,
    SimReport, SpeedupJson,
};
use crate::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(
    name = "onepass",
    version,
    about = "Training-budget planning and learning-curve analysis for one-epoch language model training"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Count parameters and relative per-iteration compute for a model width.
    Params(ParamsArgs),
    /// Generate train/test learning curves from a simulator preset.
    Simulate(SimulateArgs),
    /// Fit a power law to a learning curve, optionally detecting the region.
    Fit(FitArgs),
    /// Put curves on a shared compute axis and find optimal-iteration ranges.
    Remap(RemapArgs),
    /// Pick the model size whose budget lands nearest the target ratio.
    Plan(PlanArgs),
    /// Speedup of one curve over another at equal loss.
    Speedup(SpeedupArgs),
}

pub fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Params(args) => cmd_params(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Fit(args) => cmd_fit(args),
        Command::Remap(args) => cmd_remap(args),
        Command::Plan(args) => cmd_plan(args),
        Command::Speedup(args) => cmd_speedup(args),
    }
}

fn emit_report<T: serde::Serialize>(report: &T, out: Option<&Path>) -> CliResult<()> {
    let text = to_json_string(report)?;
    match out {
        Some(path) => formats::write_file(path, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn round_1dp(x: f64) -> f64 {
    (x * 10.0).round() / 10.0
}

fn resolve_or_builtin(doc: Option<&ConfigDoc>, id: &str) -> CliResult<ResolvedModel> {
    match doc {
        Some(doc) => doc.resolve_model(id),
        None => builtin_model(id),
    }
}

#[derive(Debug, Args)]
struct ParamsArgs {
    /// Model width (hidden dimension).
    #[arg(long)]
    d: u64,
    /// Transformer layer count.
    #[arg(long, default_value_t = 6)]
    layers: u64,
    /// Vocabulary size.
    #[arg(long, default_value_t = 793_471)]
    vocab: u64,
    /// Comma-separated adaptive-softmax cutoffs; empty means one flat cluster.
    #[arg(long, default_value = "")]
    cutoffs: String,
    /// Width divisor per adaptive cluster.
    #[arg(long, default_value_t = 4)]
    divisor: u64,
    /// Tokens consumed per training iteration.
    #[arg(long, default_value_t = 6912)]
    tokens_per_iter: u64,
    /// Width of a second config to report a compute ratio against.
    #[arg(long)]
    reference_d: Option<u64>,
    /// Write the JSON report here instead of standard output.
    #[arg(long)]
    report: Option<PathBuf>,
}

fn cmd_params(args: ParamsArgs) -> CliResult<()> {
    let cutoffs =
        parse_u64_list(&args.cutoffs).map_err(|e| CliError::usage(format!("--cutoffs: {e}")))?;
    let config = ModelConfig {
        d_model: args.d,
        n_layers: args.layers,
        vocab_size: args.vocab,
        cutoffs: cutoffs.clone(),
        adaptive_divisor: args.divisor,
        tokens_per_iter: args.tokens_per_iter,
    };
    let count = count_params(&config)?;
    let relative_flops = per_iter_flops(&config)?;

    // The reference differs from the main config only in width.
    let reference = match args.reference_d {
        None => None,
        Some(width) => {
            let mut other = config.clone();
            other.d_model = width;
            let other_count = count_params(&other)?;
            let other_flops = per_iter_flops(&other)?;
            Some(ReferenceJson {
                d_model: width,
                params: other_count.total,
                relative_flops: other_flops,
                flops_ratio: relative_flops / other_flops,
            })
        }
    };

    let report = ParamsReport {
        d_model: config.d_model,
        n_layers: config.n_layers,
        vocab_size: config.vocab_size,
        cutoffs,
        adaptive_divisor: config.adaptive_divisor,
        tokens_per_iter: config.tokens_per_iter,
        params: ParamBreakdownJson {
            total: count.total,
            attention: count.attention,
            feed_forward: count.feed_forward,
            input_embedding: count.input_embedding,
            output_softmax: count.output_softmax,
            projections: count.projections,
        },
        relative_flops,
        reference,
    };
    emit_report(&report, args.report.as_deref())
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// Config file holding the simulator section.
    #[arg(long)]
    preset: PathBuf,
    /// Section name inside the preset file.
    #[arg(long, default_value = "sim")]
    section: String,
    /// Override the preset's curve id.
    #[arg(long)]
    config_id: Option<String>,
    /// Override the preset's dropout rate.
    #[arg(long)]
    dropout: Option<f64>,
    /// Override the preset's noise seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the preset's iteration count.
    #[arg(long)]
    total_iters: Option<u64>,
    /// Override the preset's dataset size in tokens.
    #[arg(long)]
    dataset_tokens: Option<u64>,
    /// Write the train curve CSV here.
    #[arg(long)]
    out_train: Option<PathBuf>,
    /// Write the test curve CSV here.
    #[arg(long)]
    out_test: Option<PathBuf>,
    /// Write the JSON report here instead of standard output.
    #[arg(long)]
    report: Option<PathBuf>,
}

fn cmd_simulate(args: SimulateArgs) -> CliResult<()> {
    let doc = ConfigDoc::read(&args.preset)?;
    let mut sim = doc.resolve_sim(&args.section)?;
    if let Some(id) = args.config_id {
        sim.config_id = id;
    }
    if let Some(p) = args.dropout {
        sim.dropout = p;
    }
    if let Some(s) = args.seed {
        sim.seed = s;
    }
    if let Some(n) = args.total_iters {
        sim.total_iters = n;
    }
    if let Some(n) = args.dataset_tokens {
        sim.dataset_tokens = n;
    }

    let (train, test) = onepass_core::epoch_sim::simulate(&sim)?;
    if let Some(path) = &args.out_train {
        write_curve(path, &train)?;
    }
    if let Some(path) = &args.out_test {
        write_curve(path, &test)?;
    }

    let &(_, final_train_loss) = train.points().last().expect("simulate returns points");
    let &(_, final_test_loss) = test.points().last().expect("simulate returns points");
    let (min_test_iter, min_test_loss) = test.min_loss_point();
    let report = SimReport {
        config_id: sim.config_id.clone(),
        epochs: sim.epochs_trained(),
        total_iters: sim.total_iters,
        final_train_loss,
        final_test_loss,
        min_test_loss,
        min_test_iter,
    };
    emit_report(&report, args.report.as_deref())
}

#[derive(Debug, Args)]
struct FitArgs {
    /// Curve CSV to fit.
    #[arg(long)]
    curve: PathBuf,
    /// Lowest iteration included in the fit region.
    #[arg(long, conflicts_with = "detect")]
    lo: Option<f64>,
    /// Highest iteration included in the fit region.
    #[arg(long, conflicts_with = "detect")]
    hi: Option<f64>,
    /// Detect the longest well-fit window instead of taking a fixed region.
    #[arg(long)]
    detect: bool,
    /// Smallest window the detector may accept.
    #[arg(long, default_value_t = 8)]
    min_points: usize,
    /// Detector quality threshold on the log-log fit.
    #[arg(long, default_value_t = 0.995)]
    r2_threshold: f64,
    /// Write the JSON report here instead of standard output.
    #[arg(long)]
    report: Option<PathBuf>,
}

fn cmd_fit(args: FitArgs) -> CliResult<()> {
    let curve = read_curve(&args.curve)?;
    let region = if args.detect {
        detect_power_region(&curve, args.min_points, args.r2_threshold)?
    } else {
        let lo = args.lo.unwrap_or(0.0);
        match args.hi {
            Some(hi) => IterRange::new(lo, hi)?,
            None => IterRange::unbounded(lo)?,
        }
    };
    let fit = fit_power_law(&curve, region)?;
    let points_used = curve
        .points()
        .iter()
        .filter(|&&(iter, _)| fit.region.contains(iter as f64))
        .count();

    let report = FitReport {
        config_id: curve.config_id().to_string(),
        kind: curve.kind().to_string(),
        amplitude: fit.amplitude,
        exponent: fit.exponent,
        r2: fit.r2,
        region: fit.region.into(),
        points_used,
        detected: args.detect,
    };
    emit_report(&report, args.report.as_deref())
}

#[derive(Debug, Args)]
struct RemapArgs {
    /// Native-axis curve CSVs, one per model config.
    #[arg(long, num_args = 1.., required = true)]
    curves: Vec<PathBuf>,
    /// Config id whose iteration axis the curves are mapped onto.
    #[arg(long)]
    reference: String,
    /// Model config file; ids resolve as the built-in d<width> family when omitted.
    #[arg(long)]
    configs: Option<PathBuf>,
    /// Write remapped curve CSVs (<id>_remapped.csv) into this directory.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Write the ranges report here instead of standard output.
    #[arg(long)]
    ranges: Option<PathBuf>,
}

fn scaled_back(native: IterRange, scale: f64) -> IterRange {
    IterRange { lo: native.lo * scale, hi: native.hi * scale }
}

fn cmd_remap(args: RemapArgs) -> CliResult<()> {
    let doc = args.configs.as_deref().map(ConfigDoc::read).transpose()?;
    let reference = resolve_or_builtin(doc.as_ref(), &args.reference)?;

    let mut curves = Vec::with_capacity(args.curves.len());
    let mut models = Vec::with_capacity(args.curves.len());
    for path in &args.curves {
        let curve = read_curve(path)?;
        if curves.iter().any(|c: &LearningCurve| c.config_id() == curve.config_id()) {
            return Err(CliError::usage(format!(
                "duplicate config id {:?} among input curves",
                curve.config_id()
            )));
        }
        models.push(resolve_or_builtin(doc.as_ref(), curve.config_id())?);
        curves.push(curve);
    }

    let remapped: Vec<RemappedCurve> = curves
        .iter()
        .zip(&models)
        .map(|(curve, model)| {
            remap_curve_scaled(curve, &args.reference, model.rel_flops / reference.rel_flops)
        })
        .collect::<Result<_, _>>()?;

    if let Some(dir) = &args.out_dir {
        std::fs::create_dir_all(dir)
            .map_err(|source| CliError::Io { path: dir.clone(), source })?;
        for (curve, r) in curves.iter().zip(&remapped) {
            let path = dir.join(format!("{}_remapped.csv", r.source_id()));
            formats::write_file(&path, &remapped_to_csv(r, curve.kind()))?;
        }
    }

    let mut crossings = Vec::new();
    for (i, a) in remapped.iter().enumerate() {
        for b in &remapped[i + 1..] {
            let xs = find_intersections(a, b)?;
            if !xs.is_empty() {
                crossings.push(CrossingJson {
                    a: a.source_id().to_string(),
                    b: b.source_id().to_string(),
                    reference_iterations: xs,
                });
            }
        }
    }

    let native_ranges = optimal_ranges(&remapped)?;
    let ratio_ranges: Vec<RatioRange> = native_ranges
        .iter()
        .zip(&models)
        .map(|((_, native), m)| tokens_per_param_range(*native, m.tokens_per_iter, m.params))
        .collect();
    // The shared ratio window only exists if every model is optimal
    // somewhere; its midpoint only if the window has positive finite ends.
    let intersection = intersect_ranges(&ratio_ranges)?;
    let midpoint = geometric_midpoint(intersection).ok();

    let model_rows = models
        .iter()
        .zip(&remapped)
        .zip(native_ranges.iter().zip(&ratio_ranges))
        .map(|((m, r), ((_, native), ratio))| RemapModelJson {
            config_id: m.id.clone(),
            params: m.params,
            tokens_per_iter: m.tokens_per_iter,
            scale: r.scale(),
            reference_range: scaled_back(*native, r.scale()).into(),
            native_range: (*native).into(),
            tokens_per_param: (*ratio).into(),
        })
        .collect();

    let report = RemapReport {
        reference: args.reference.clone(),
        models: model_rows,
        crossings,
        tokens_per_param_intersection: Some(intersection.into()),
        geometric_midpoint: midpoint,
    };
    emit_report(&report, args.ranges.as_deref())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PlanMethodArg {
    /// Hold params * tokens constant at the baseline product.
    ConstantProduct,
    /// Train every candidate for the same iteration count.
    FixedIterations,
    /// Pick by membership in precomputed optimal-iteration ranges.
    RangeTable,
}

impl PlanMethodArg {
    fn name(self) -> &'static str {
        match self {
            PlanMethodArg::ConstantProduct => "constant-product",
            PlanMethodArg::FixedIterations => "fixed-iterations",
            PlanMethodArg::RangeTable => "range-table",
        }
    }
}

#[derive(Debug, Args)]
struct PlanArgs {
    /// Budget rule that assigns tokens to each candidate.
    #[arg(long, value_enum, default_value_t = PlanMethodArg::ConstantProduct)]
    method: PlanMethodArg,
    /// Baseline parameter count (constant-product).
    #[arg(long)]
    p0: Option<f64>,
    /// Baseline token budget (constant-product).
    #[arg(long)]
    t0: Option<f64>,
    /// Iteration count (fixed-iterations, range-table).
    #[arg(long)]
    iters: Option<u64>,
    /// Tokens per iteration for built-in candidates and the fixed schedule.
    #[arg(long)]
    tokens_per_iter: Option<u64>,
    /// Comma-separated candidate config ids.
    #[arg(long)]
    candidates: String,
    /// Model config file; ids resolve as the built-in d<width> family when omitted.
    #[arg(long)]
    configs: Option<PathBuf>,
    /// JSON file of per-candidate optimal ranges (range-table).
    #[arg(long)]
    ranges: Option<PathBuf>,
    /// Tokens-per-parameter ratio to aim for.
    #[arg(long, default_value_t = onepass_core::planner::DEFAULT_TARGET_RATIO)]
    target: f64,
    /// Write the JSON report here instead of standard output.
    #[arg(long)]
    report: Option<PathBuf>,
}

fn require_flag<T>(value: Option<T>, flag: &str, method: &str) -> CliResult<T> {
    value.ok_or_else(|| CliError::usage(format!("{flag} is required with --method {method}")))
}

fn reject_flag<T>(value: &Option<T>, flag: &str, method: &str) -> CliResult<()> {
    if value.is_some() {
        return Err(CliError::usage(format!("{flag} does not apply to --method {method}")));
    }
    Ok(())
}

fn plan_row(plan: &Plan) -> PlanCandidateJson {
    PlanCandidateJson {
        config_id: plan.candidate.id.clone(),
        params: plan.candidate.params.round() as u64,
        tokens: plan.tokens,
        iterations: plan.iterations,
        remainder_tokens: plan.remainder_tokens,
        tokens_per_param: plan.ratio,
        objective: plan.objective,
    }
}

fn parse_ranges_table(path: &Path) -> CliResult<BTreeMap<String, IterRange>> {
    let text = formats::read_to_string(path)?;
    let raw: BTreeMap<String, RangeJson> = serde_json::from_str(&text)
        .map_err(|e| CliError::format(path, format!("invalid ranges JSON: {e}")))?;
    let mut table = BTreeMap::new();
    for (id, r) in raw {
        let range = match r.hi {
            Some(hi) => IterRange::new(r.lo, hi)?,
            None => IterRange::unbounded(r.lo)?,
        };
        table.insert(id, range);
    }
    Ok(table)
}

fn cmd_plan(args: PlanArgs) -> CliResult<()> {
    let ids: Vec<&str> =
        args.candidates.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
    if ids.is_empty() {
        return Err(CliError::usage("--candidates needs at least one config id"));
    }
    let doc = args.configs.as_deref().map(ConfigDoc::read).transpose()?;
    let default_tpi = args.tokens_per_iter.unwrap_or(6912);
    let candidates: Vec<Candidate> = ids
        .iter()
        .map(|id| {
            let m = resolve_or_builtin(doc.as_ref(), id)?;
            let tpi = if doc.is_some() { m.tokens_per_iter } else { default_tpi };
            Ok(Candidate::new(m.id, m.params as f64, tpi))
        })
        .collect::<CliResult<_>>()?;

    let method = args.method.name();
    let (chosen, rows) = match args.method {
        PlanMethodArg::ConstantProduct => {
            reject_flag(&args.iters, "--iters", method)?;
            reject_flag(&args.ranges, "--ranges", method)?;
            let p0 = require_flag(args.p0, "--p0", method)?;
            let t0 = require_flag(args.t0, "--t0", method)?;
            let chosen = plan_constant_product(p0, t0, &candidates, args.target)?;
            let rows = candidates
                .iter()
                .map(|c| {
                    Ok(plan_row(&plan_constant_product(
                        p0,
                        t0,
                        std::slice::from_ref(c),
                        args.target,
                    )?))
                })
                .collect::<CliResult<Vec<_>>>()?;
            (chosen, rows)
        }
        PlanMethodArg::FixedIterations => {
            reject_flag(&args.p0, "--p0", method)?;
            reject_flag(&args.t0, "--t0", method)?;
            reject_flag(&args.ranges, "--ranges", method)?;
            let iters = require_flag(args.iters, "--iters", method)?;
            let chosen = plan_fixed_iterations(iters, default_tpi, &candidates, args.target)?;
            let rows = candidates
                .iter()
                .map(|c| {
                    Ok(plan_row(&plan_fixed_iterations(
                        iters,
                        default_tpi,
                        std::slice::from_ref(c),
                        args.target,
                    )?))
                })
                .collect::<CliResult<Vec<_>>>()?;
            (chosen, rows)
        }
        PlanMethodArg::RangeTable => {
            reject_flag(&args.p0, "--p0", method)?;
            reject_flag(&args.t0, "--t0", method)?;
            let iters = require_flag(args.iters, "--iters", method)?;
            let path = require_flag(args.ranges.as_deref(), "--ranges", method)?;
            let table = parse_ranges_table(path)?;
            let ranged: Vec<(Candidate, IterRange)> = candidates
                .iter()
                .map(|c| {
                    let range = table.get(&c.id).copied().ok_or_else(|| {
                        CliError::format(path, format!("no range entry for candidate {:?}", c.id))
                    })?;
                    Ok((c.clone(), range))
                })
                .collect::<CliResult<_>>()?;
            let chosen = plan_from_ranges(iters, &ranged, args.target)?;
            // Per-candidate rows show the cost of the same schedule on
            // each model; membership decided the winner above.
            let rows = candidates
                .iter()
                .map(|c| {
                    Ok(plan_row(&plan_fixed_iterations(
                        iters,
                        c.tokens_per_iter,
                        std::slice::from_ref(c),
                        args.target,
                    )?))
                })
                .collect::<CliResult<Vec<_>>>()?;
            (chosen, rows)
        }
    };

    let report = PlanReport {
        method: method.to_string(),
        target_ratio: args.target,
        chosen: plan_row(&chosen),
        candidates: rows,
    };
    emit_report(&report, args.report.as_deref())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SpeedupModeArg {
    /// Single-epoch curve against a multi-epoch baseline.
    Epoch,
    /// Retuned schedule against the original at matched compute.
    Adjustment,
}

#[derive(Debug, Args)]
struct SpeedupArgs {
    /// Which comparison to run.
    #[arg(long, value_enum, default_value_t = SpeedupModeArg::Epoch)]
    mode: SpeedupModeArg,
    /// Single-epoch test curve CSV (epoch mode).
    #[arg(long)]
    single: Option<PathBuf>,
    /// Multi-epoch baseline test curve CSV (epoch mode).
    #[arg(long)]
    multi: Option<PathBuf>,
    /// Iterations per epoch of the baseline (epoch mode).
    #[arg(long)]
    iters_per_epoch: Option<u64>,
    /// Cap the baseline history at this many epochs; whole history when omitted.
    #[arg(long)]
    epochs: Option<u32>,
    /// Original test curve CSV (adjustment mode).
    #[arg(long)]
    old: Option<PathBuf>,
    /// Retuned test curve CSV (adjustment mode).
    #[arg(long)]
    new: Option<PathBuf>,
    /// Model config file for compute scales (adjustment mode).
    #[arg(long)]
    configs: Option<PathBuf>,
    /// Config id owning the shared compute axis (adjustment mode).
    #[arg(long)]
    reference: Option<String>,
    /// Native iteration of the original run to match (adjustment mode).
    #[arg(long)]
    at_iter: Option<u64>,
    /// Report reach points on the sample grid instead of interpolating.
    #[arg(long)]
    grid_snap: bool,
    /// Multiply the result by an independently measured factor.
    #[arg(long)]
    combine_with: Option<f64>,
    /// Write the JSON report here instead of standard output.
    #[arg(long)]
    report: Option<PathBuf>,
}

fn cmd_speedup(args: SpeedupArgs) -> CliResult<()> {
    if let Some(f) = args.combine_with {
        if !f.is_finite() || f <= 0.0 {
            return Err(CliError::usage(format!(
                "--combine-with must be finite and positive, got {f}"
            )));
        }
    }
    let mode = if args.grid_snap { ReachMode::GridSnap } else { ReachMode::Interpolate };

    let (mode_name, result) = match args.mode {
        SpeedupModeArg::Epoch => {
            for (flag, present) in [
                ("--old", args.old.is_some()),
                ("--new", args.new.is_some()),
                ("--configs", args.configs.is_some()),
                ("--reference", args.reference.is_some()),
                ("--at-iter", args.at_iter.is_some()),
            ] {
                if present {
                    return Err(CliError::usage(format!("{flag} does not apply to --mode epoch")));
                }
            }
            let single = require_flag(args.single.as_deref(), "--single", "epoch")?;
            let multi = require_flag(args.multi.as_deref(), "--multi", "epoch")?;
            let iters_per_epoch =
                require_flag(args.iters_per_epoch, "--iters-per-epoch", "epoch")?;
            let single = read_curve(single)?;
            let multi = read_curve(multi)?;
            ("epoch", epoch_speedup(&single, &multi, iters_per_epoch, args.epochs, mode)?)
        }
        SpeedupModeArg::Adjustment => {
            for (flag, present) in [
                ("--single", args.single.is_some()),
                ("--multi", args.multi.is_some()),
                ("--iters-per-epoch", args.iters_per_epoch.is_some()),
                ("--epochs", args.epochs.is_some()),
            ] {
                if present {
                    return Err(CliError::usage(format!(
                        "{flag} does not apply to --mode adjustment"
                    )));
                }
            }
            let old_path = require_flag(args.old.as_deref(), "--old", "adjustment")?;
            let new_path = require_flag(args.new.as_deref(), "--new", "adjustment")?;
            let reference = require_flag(args.reference.as_deref(), "--reference", "adjustment")?;
            let at_iter = require_flag(args.at_iter, "--at-iter", "adjustment")?;

            let doc = args.configs.as_deref().map(ConfigDoc::read).transpose()?;
            let ref_model = resolve_or_builtin(doc.as_ref(), reference)?;
            let old_curve = read_curve(old_path)?;
            let new_curve = read_curve(new_path)?;
            let old_model = resolve_or_builtin(doc.as_ref(), old_curve.config_id())?;
            let new_model = resolve_or_builtin(doc.as_ref(), new_curve.config_id())?;
            let old_remapped = remap_curve_scaled(
                &old_curve,
                reference,
                old_model.rel_flops / ref_model.rel_flops,
            )?;
            let new_remapped = remap_curve_scaled(
                &new_curve,
                reference,
                new_model.rel_flops / ref_model.rel_flops,
            )?;
            ("adjustment", adjustment_speedup(&old_remapped, &new_remapped, at_iter, mode)?)
        }
    };

    let combined = args.combine_with.map(|factor| {
        let speedup = combined_speedup(result.speedup, factor);
        CombinedJson { factor, speedup, speedup_1dp: round_1dp(speedup) }
    });
    let report = SpeedupJson {
        mode: mode_name.to_string(),
        baseline_iters: result.baseline_iters,
        target_iters: result.target_iters,
        speedup: result.speedup,
        speedup_1dp: round_1dp(result.speedup),
        epoch_limit: result.epoch_limit,
        flops_adjusted: result.flops_adjusted,
        combined,
    };
    emit_report(&report, args.report.as_deref())
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::error::ErrorKind;

    #[test]
    fn documented_invocations_parse() {
        let cli = Cli::try_parse_from([
            "onepass", "params", "--d", "512", "--layers", "6", "--vocab", "793471", "--cutoffs",
            "4000,20000,100000",
        ])
        .unwrap();
        let Command::Params(args) = cli.command else { panic!("expected params") };
        assert_eq!(args.d, 512);
        assert_eq!(args.cutoffs, "4000,20000,100000");

        let cli = Cli::try_parse_from([
            "onepass",
            "plan",
            "--p0",
            "18e6",
            "--t0",
            "449.28e6",
            "--candidates",
            "d256,d512,d1024",
        ])
        .unwrap();
        let Command::Plan(args) = cli.command else { panic!("expected plan") };
        assert_eq!(args.p0, Some(18e6));
        assert_eq!(args.t0, Some(449.28e6));
        assert_eq!(args.method, PlanMethodArg::ConstantProduct);

        let cli = Cli::try_parse_from([
            "onepass",
            "speedup",
            "--single",
            "s.csv",
            "--multi",
            "m.csv",
            "--iters-per-epoch",
            "6500",
            "--epochs",
            "10",
        ])
        .unwrap();
        let Command::Speedup(args) = cli.command else { panic!("expected speedup") };
        assert_eq!(args.mode, SpeedupModeArg::Epoch);
        assert_eq!(args.iters_per_epoch, Some(6500));
        assert_eq!(args.epochs, Some(10));

        let cli = Cli::try_parse_from([
            "onepass", "remap", "--curves", "a.csv", "b.csv", "c.csv", "--reference", "d512",
            "--ranges", "out.json",
        ])
        .unwrap();
        let Command::Remap(args) = cli.command else { panic!("expected remap") };
        assert_eq!(args.curves.len(), 3);
        assert_eq!(args.ranges.as_deref(), Some(Path::new("out.json")));
    }

    #[test]
    fn missing_required_flags_are_usage_errors() {
        let err = Cli::try_parse_from(["onepass", "params"]).unwrap_err();
        assert_eq!(err.kind(), ErrorKind::MissingRequiredArgument);
        // Usage failures from the parser exit with code 2.
        assert_eq!(err.exit_code(), 2);

        let err =
            Cli::try_parse_from(["onepass", "fit", "--curve", "c.csv", "--detect", "--lo", "5"])
                .unwrap_err();
        assert_eq!(err.kind(), ErrorKind::ArgumentConflict);
    }

    #[test]
    fn one_decimal_rounding_matches_reporting_convention() {
        assert_eq!(round_1dp(3.25), 3.3);
        assert_eq!(round_1dp(3.2933), 3.3);
        assert_eq!(round_1dp(5.135), 5.1);
        assert_eq!(round_1dp(1.0), 1.0);
    }

    #[test]
    fn ranges_tables_accept_null_upper_bounds() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ranges.json");
        std::fs::write(
            &path,
            r#"{"d256": {"lo": 0.0, "hi": 30000.0}, "d1024": {"lo": 28000.0, "hi": null}}"#,
        )
        .unwrap();
        let table = parse_ranges_table(&path).unwrap();
        assert_eq!(table["d256"], IterRange::new(0.0, 30_000.0).unwrap());
        assert!(table["d1024"].is_unbounded());
    }
}
