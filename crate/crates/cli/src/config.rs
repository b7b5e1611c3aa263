//! Config documents: named sections of key/value pairs describing model
//! configurations and simulator presets.
//!
//! Two on-disk syntaxes parse into the same structure. INI style:
//!
//! ```text
//! # comment
//! [d512]
//! d_model = 512
//! cutoffs = 4000,20000,100000
//! ```
//!
//! or JSON (detected by a leading `{`): an object of section objects
//! whose values are numbers, strings, or arrays of numbers.
//!
//! A model section is either structural (a `d_model` plus optional
//! family overrides, parameters counted from the architecture) or
//! direct (`params` given outright, with an optional `rel_flops`
//! override for measured per-iteration cost ratios).

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use onepass_core::epoch_sim::SimConfig;
use onepass_core::model_budget::{count_params, per_iter_flops, ModelConfig};

use crate::formats::parse_u64_list;
use crate::{CliError, CliResult};

#[derive(Debug, Clone)]
pub struct ConfigDoc {
    origin: PathBuf,
    sections: BTreeMap<String, BTreeMap<String, String>>,
}

/// A model section resolved to the quantities the planner and remapper
/// need. `rel_flops` is the per-iteration compute in the same relative
/// units for every section, defaulting to `params * tokens_per_iter`.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedModel {
    pub id: String,
    pub params: u64,
    pub tokens_per_iter: u64,
    pub rel_flops: f64,
}

const MODEL_STRUCTURAL_KEYS: &[&str] =
    &["d_model", "n_layers", "vocab_size", "cutoffs", "adaptive_divisor", "tokens_per_iter"];
const MODEL_DIRECT_KEYS: &[&str] = &["params", "tokens_per_iter", "rel_flops"];
const SIM_KEYS: &[&str] = &[
    "config_id",
    "dataset_tokens",
    "tokens_per_iter",
    "total_iters",
    "dropout",
    "amplitude",
    "exponent",
    "floor",
    "repeat_value",
    "overfit_amplitude",
    "dropout_slowdown",
    "dropout_suppression_ref",
    "memorization_margin",
    "noise_sigma",
    "seed",
];

impl ConfigDoc {
    pub fn parse(text: &str, origin: &Path) -> CliResult<ConfigDoc> {
        if text.trim_start().starts_with('{') {
            Self::parse_json(text, origin)
        } else {
            Self::parse_ini(text, origin)
        }
    }

    pub fn read(path: &Path) -> CliResult<ConfigDoc> {
        Self::parse(&crate::formats::read_to_string(path)?, path)
    }

    fn parse_ini(text: &str, origin: &Path) -> CliResult<ConfigDoc> {
        let bad = |line_no: usize, message: String| {
            CliError::format(origin, format!("line {line_no}: {message}"))
        };
        let mut sections: BTreeMap<String, BTreeMap<String, String>> = BTreeMap::new();
        let mut current: Option<String> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
                continue;
            }
            if let Some(name) = line.strip_prefix('[') {
                let name = name
                    .strip_suffix(']')
                    .ok_or_else(|| bad(line_no, format!("unterminated section header {line:?}")))?
                    .trim();
                if name.is_empty() {
                    return Err(bad(line_no, "empty section name".into()));
                }
                if sections.contains_key(name) {
                    return Err(bad(line_no, format!("duplicate section [{name}]")));
                }
                sections.insert(name.to_string(), BTreeMap::new());
                current = Some(name.to_string());
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| bad(line_no, format!("expected `key = value`, got {line:?}")))?;
            let key = key.trim();
            let value = value.trim();
            if key.is_empty() {
                return Err(bad(line_no, "empty key".into()));
            }
            let section = current
                .as_ref()
                .ok_or_else(|| bad(line_no, format!("key {key:?} appears before any [section]")))?;
            let map = sections.get_mut(section).expect("section exists");
            if map.insert(key.to_string(), value.to_string()).is_some() {
                return Err(bad(line_no, format!("duplicate key {key:?} in [{section}]")));
            }
        }
        Ok(ConfigDoc { origin: origin.to_path_buf(), sections })
    }

    fn parse_json(text: &str, origin: &Path) -> CliResult<ConfigDoc> {
        use serde_json::Value;
        let bad = |message: String| CliError::format(origin, message);
        let root: serde_json::Map<String, Value> = serde_json::from_str(text)
            .map_err(|e| bad(format!("invalid JSON: {e}")))?;
        let mut sections = BTreeMap::new();
        for (name, value) in root {
            let Value::Object(fields) = value else {
                return Err(bad(format!("section {name:?} must be an object")));
            };
            let mut map = BTreeMap::new();
            for (key, v) in fields {
                let rendered = match v {
                    Value::Number(n) => n.to_string(),
                    Value::String(s) => s,
                    Value::Array(items) => {
                        let mut parts = Vec::with_capacity(items.len());
                        for item in items {
                            match item {
                                Value::Number(n) => parts.push(n.to_string()),
                                other => {
                                    return Err(bad(format!(
                                        "{name}.{key}: array entries must be numbers, got {other}"
                                    )))
                                }
                            }
                        }
                        parts.join(",")
                    }
                    other => {
                        return Err(bad(format!(
                            "{name}.{key}: expected a number, string or number array, got {other}"
                        )))
                    }
                };
                map.insert(key, rendered);
            }
            sections.insert(name, map);
        }
        Ok(ConfigDoc { origin: origin.to_path_buf(), sections })
    }

    pub fn origin(&self) -> &Path {
        &self.origin
    }

    pub fn section_names(&self) -> impl Iterator<Item = &str> {
        self.sections.keys().map(String::as_str)
    }

    fn section<'a>(&'a self, name: &'a str) -> CliResult<SectionView<'a>> {
        let fields = self.sections.get(name).ok_or_else(|| {
            CliError::format(
                &self.origin,
                format!("no [{name}] section (available: {})", self.available()),
            )
        })?;
        Ok(SectionView { doc: self, name, fields })
    }

    fn available(&self) -> String {
        let names: Vec<&str> = self.section_names().collect();
        if names.is_empty() {
            "none".to_string()
        } else {
            names.join(", ")
        }
    }

    /// Resolve a model section by config id.
    pub fn resolve_model(&self, id: &str) -> CliResult<ResolvedModel> {
        let section = self.section(id)?;
        if section.fields.contains_key("d_model") {
            section.reject_unknown_keys(MODEL_STRUCTURAL_KEYS)?;
            let d_model = section.require_u64("d_model")?;
            let mut config = ModelConfig::with_defaults(d_model);
            if let Some(n) = section.get_u64("n_layers")? {
                config.n_layers = n;
            }
            if let Some(v) = section.get_u64("vocab_size")? {
                config.vocab_size = v;
            }
            if let Some(c) = section.get_str("cutoffs") {
                config.cutoffs = parse_u64_list(c)
                    .map_err(|e| section.field_err("cutoffs", &e))?;
            }
            if let Some(d) = section.get_u64("adaptive_divisor")? {
                config.adaptive_divisor = d;
            }
            if let Some(t) = section.get_u64("tokens_per_iter")? {
                config.tokens_per_iter = t;
            }
            let params = count_params(&config)?.total;
            Ok(ResolvedModel {
                id: id.to_string(),
                params,
                tokens_per_iter: config.tokens_per_iter,
                rel_flops: per_iter_flops(&config)?,
            })
        } else if section.fields.contains_key("params") {
            section.reject_unknown_keys(MODEL_DIRECT_KEYS)?;
            let params = section.require_u64("params")?;
            if params == 0 {
                return Err(section.field_err("params", "must be positive"));
            }
            let tokens_per_iter = section.get_u64("tokens_per_iter")?.unwrap_or(6912);
            if tokens_per_iter == 0 {
                return Err(section.field_err("tokens_per_iter", "must be positive"));
            }
            let rel_flops = match section.get_f64("rel_flops")? {
                Some(f) if f.is_finite() && f > 0.0 => f,
                Some(f) => {
                    return Err(section.field_err("rel_flops", &format!("must be finite and positive, got {f}")))
                }
                None => params as f64 * tokens_per_iter as f64,
            };
            Ok(ResolvedModel { id: id.to_string(), params, tokens_per_iter, rel_flops })
        } else {
            Err(CliError::format(
                &self.origin,
                format!("[{id}] must define either d_model (structural) or params (direct)"),
            ))
        }
    }

    /// Resolve a simulator section (conventionally named `sim`).
    pub fn resolve_sim(&self, name: &str) -> CliResult<SimConfig> {
        let section = self.section(name)?;
        section.reject_unknown_keys(SIM_KEYS)?;
        Ok(SimConfig {
            config_id: section
                .get_str("config_id")
                .map(str::to_string)
                .unwrap_or_else(|| name.to_string()),
            dataset_tokens: section.require_u64("dataset_tokens")?,
            tokens_per_iter: section.require_u64("tokens_per_iter")?,
            total_iters: section.require_u64("total_iters")?,
            dropout: section.get_f64("dropout")?.unwrap_or(0.0),
            amplitude: section.require_f64("amplitude")?,
            exponent: section.require_f64("exponent")?,
            floor: section.require_f64("floor")?,
            repeat_value: section.require_f64("repeat_value")?,
            overfit_amplitude: section.require_f64("overfit_amplitude")?,
            dropout_slowdown: section.require_f64("dropout_slowdown")?,
            dropout_suppression_ref: section.require_f64("dropout_suppression_ref")?,
            memorization_margin: section.require_f64("memorization_margin")?,
            noise_sigma: section.get_f64("noise_sigma")?.unwrap_or(0.0),
            seed: section.get_u64("seed")?.unwrap_or(0),
        })
    }
}

/// Resolve an id of the form `d<width>` against the benchmark family
/// defaults, for commands invoked without a config file.
pub fn builtin_model(id: &str) -> CliResult<ResolvedModel> {
    let width: Option<u64> = id.strip_prefix('d').and_then(|w| w.parse().ok());
    let width = width.filter(|&w| w > 0).ok_or_else(|| {
        CliError::usage(format!(
            "config id {id:?} is not of the built-in d<width> form; pass --configs with a [{id}] section"
        ))
    })?;
    let config = ModelConfig::with_defaults(width);
    Ok(ResolvedModel {
        id: id.to_string(),
        params: count_params(&config)?.total,
        tokens_per_iter: config.tokens_per_iter,
        rel_flops: per_iter_flops(&config)?,
    })
}

struct SectionView<'a> {
    doc: &'a ConfigDoc,
    name: &'a str,
    fields: &'a BTreeMap<String, String>,
}

impl SectionView<'_> {
    fn field_err(&self, key: &str, message: &str) -> CliError {
        CliError::format(&self.doc.origin, format!("[{}] {key}: {message}", self.name))
    }

    fn reject_unknown_keys(&self, allowed: &[&str]) -> CliResult<()> {
        for key in self.fields.keys() {
            if !allowed.contains(&key.as_str()) {
                return Err(self.field_err(key, &format!("unknown key (expected one of: {})", allowed.join(", "))));
            }
        }
        Ok(())
    }

    fn get_str(&self, key: &str) -> Option<&str> {
        self.fields.get(key).map(String::as_str)
    }

    fn get_u64(&self, key: &str) -> CliResult<Option<u64>> {
        match self.fields.get(key) {
            None => Ok(None),
            Some(raw) => raw
                .parse::<u64>()
                .map(Some)
                .map_err(|e| self.field_err(key, &format!("bad integer {raw:?}: {e}"))),
        }
    }

    fn require_u64(&self, key: &str) -> CliResult<u64> {
        self.get_u64(key)?
            .ok_or_else(|| self.field_err(key, "missing required key"))
    }

    fn get_f64(&self, key: &str) -> CliResult<Option<f64>> {
        match self.fields.get(key) {
            None => Ok(None),
            Some(raw) => raw
                .parse::<f64>()
                .map(Some)
                .map_err(|e| self.field_err(key, &format!("bad number {raw:?}: {e}"))),
        }
    }

    fn require_f64(&self, key: &str) -> CliResult<f64> {
        self.get_f64(key)?
            .ok_or_else(|| self.field_err(key, "missing required key"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::path::PathBuf;

    fn origin() -> PathBuf {
        PathBuf::from("models.cfg")
    }

    const INI: &str = "\
# benchmark family
[d512]
d_model = 512

[d1024]
d_model = 1024
n_layers = 6

[nominal]
params = 45000000
tokens_per_iter = 6912
rel_flops = 2.5
";

    #[test]
    fn ini_structural_sections_use_family_defaults() {
        let doc = ConfigDoc::parse(INI, &origin()).unwrap();
        let m = doc.resolve_model("d512").unwrap();
        assert_eq!(m.params, 43_453_936);
        assert_eq!(m.tokens_per_iter, 6912);
        assert_eq!(m.rel_flops, 43_453_936.0 * 6912.0);
        let big = doc.resolve_model("d1024").unwrap();
        assert_eq!(big.params, 125_000_672);
    }

    #[test]
    fn direct_sections_take_params_and_flops_overrides() {
        let doc = ConfigDoc::parse(INI, &origin()).unwrap();
        let m = doc.resolve_model("nominal").unwrap();
        assert_eq!(m.params, 45_000_000);
        assert_eq!(m.rel_flops, 2.5);
    }

    #[test]
    fn json_documents_parse_to_the_same_sections() {
        let json = r#"{
            "d512": {"d_model": 512},
            "nominal": {"params": 45000000, "tokens_per_iter": 6912, "rel_flops": 2.5},
            "custom": {"d_model": 256, "cutoffs": [100, 2000], "vocab_size": 10000}
        }"#;
        let doc = ConfigDoc::parse(json, &origin()).unwrap();
        assert_eq!(doc.resolve_model("d512").unwrap().params, 43_453_936);
        assert_eq!(doc.resolve_model("nominal").unwrap().rel_flops, 2.5);
        let custom = doc.resolve_model("custom").unwrap();
        // Structural override: clusters [100, 2000, 10000] at width 256.
        let mut expect = ModelConfig::with_defaults(256);
        expect.cutoffs = vec![100, 2000];
        expect.vocab_size = 10_000;
        assert_eq!(custom.params, count_params(&expect).unwrap().total);
    }

    #[test]
    fn structural_cutoffs_can_be_cleared() {
        let doc = ConfigDoc::parse("[tiny]\nd_model = 64\nn_layers = 0\nvocab_size = 10\ncutoffs =\n", &origin()).unwrap();
        assert_eq!(doc.resolve_model("tiny").unwrap().params, 1280);
    }

    #[test]
    fn malformed_documents_are_rejected() {
        for text in [
            "[a\nd_model = 512\n",
            "[]\nd_model = 512\n",
            "d_model = 512\n",
            "[a]\nd_model\n",
            "[a]\nd_model = 512\n[a]\n",
            "[a]\nd_model = 512\nd_model = 256\n",
            "{\"a\": 5}",
            "{\"a\": {\"d_model\": [true]}}",
            "{bad json",
        ] {
            assert!(ConfigDoc::parse(text, &origin()).is_err(), "{text:?}");
        }
    }

    #[test]
    fn unknown_and_missing_keys_are_reported() {
        let doc = ConfigDoc::parse("[m]\nd_model = 512\ntypo_key = 3\n", &origin()).unwrap();
        let err = doc.resolve_model("m").unwrap_err();
        assert!(err.to_string().contains("typo_key"), "{err}");

        let doc = ConfigDoc::parse("[m]\ntokens_per_iter = 6912\n", &origin()).unwrap();
        assert!(doc.resolve_model("m").is_err(), "needs d_model or params");

        let doc = ConfigDoc::parse("[m]\nd_model = 512\n", &origin()).unwrap();
        assert!(doc.resolve_model("missing").is_err());

        let doc = ConfigDoc::parse("[m]\nparams = 0\n", &origin()).unwrap();
        assert!(doc.resolve_model("m").is_err());

        let doc = ConfigDoc::parse("[m]\nparams = 45000000\nrel_flops = -1\n", &origin()).unwrap();
        assert!(doc.resolve_model("m").is_err());
    }

    #[test]
    fn builtin_family_ids_resolve_by_width() {
        let m = builtin_model("d512").unwrap();
        assert_eq!(m.params, 43_453_936);
        assert_eq!(m.tokens_per_iter, 6912);
        assert!(builtin_model("wide").is_err());
        assert!(builtin_model("d0").is_err());
        assert!(builtin_model("d").is_err());
    }

    #[test]
    fn sim_sections_resolve_with_defaults() {
        let text = "\
[sim]
dataset_tokens = 449280000
tokens_per_iter = 6912
total_iters = 65000
amplitude = 12.0
exponent = 0.067
floor = 2.0
repeat_value = 0.3
overfit_amplitude = 0.05
dropout_slowdown = 2.0
dropout_suppression_ref = 0.1
memorization_margin = 0.05
seed = 42
";
        let doc = ConfigDoc::parse(text, &origin()).unwrap();
        let sim = doc.resolve_sim("sim").unwrap();
        assert_eq!(sim.config_id, "sim");
        assert_eq!(sim.dropout, 0.0);
        assert_eq!(sim.noise_sigma, 0.0);
        assert_eq!(sim.seed, 42);
        assert_eq!(sim.total_iters, 65_000);
        sim.validate().unwrap();

        let doc = ConfigDoc::parse("[sim]\ndataset_tokens = 100\n", &origin()).unwrap();
        assert!(doc.resolve_sim("sim").is_err(), "missing required keys");
    }
}
