//! Number formatting and the learning-curve CSV contract.
//!
//! Curve CSV layout, line feeds only:
//!
//! ```text
//! # config_id=<id> kind=<train|test>
//! iteration,loss
//! 1,7.39510623
//! ...
//! ```
//!
//! Floats serialize with 9 significant digits in plain decimal notation
//! so identical runs produce byte-identical files.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use onepass_core::curves::{CurveKind, LearningCurve};
use onepass_core::remap::RemappedCurve;

use crate::{CliError, CliResult};

/// Plain-decimal rendering with 9 significant digits (more to the left
/// of the point for magnitudes above 1e9; never scientific notation).
pub fn fmt_sig9(x: f64) -> String {
    if x == 0.0 {
        return "0.00000000".to_string();
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (8 - magnitude).max(0) as usize;
    format!("{x:.decimals$}")
}

/// Round to 9 significant digits, for JSON reports. Exact decimal
/// rounding via the scientific text form.
pub fn round_sig9(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.8e}").parse().expect("scientific form round-trips")
}

pub fn read_to_string(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

pub fn write_file(path: &Path, content: &str) -> CliResult<()> {
    fs::write(path, content).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

pub fn curve_to_csv(curve: &LearningCurve) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# config_id={} kind={}", curve.config_id(), curve.kind());
    out.push_str("iteration,loss\n");
    for &(iter, loss) in curve.points() {
        let _ = writeln!(out, "{iter},{}", fmt_sig9(loss));
    }
    out
}

pub fn write_curve(path: &Path, curve: &LearningCurve) -> CliResult<()> {
    write_file(path, &curve_to_csv(curve))
}

/// Remapped curves use the same layout with fractional iterations; the
/// id is the source config, the kind is carried over from the source.
pub fn remapped_to_csv(curve: &RemappedCurve, kind: CurveKind) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# config_id={} kind={kind}", curve.source_id());
    out.push_str("iteration,loss\n");
    for &(iter, loss) in curve.points() {
        let _ = writeln!(out, "{},{}", fmt_sig9(iter), fmt_sig9(loss));
    }
    out
}

pub fn parse_curve(text: &str, origin: &Path) -> CliResult<LearningCurve> {
    let bad = |line_no: usize, message: String| {
        CliError::format(origin, format!("line {line_no}: {message}"))
    };
    let mut lines = text.lines().enumerate();

    let (_, header) = lines
        .next()
        .ok_or_else(|| CliError::format(origin, "empty file"))?;
    let meta = header
        .strip_prefix("# ")
        .ok_or_else(|| bad(1, format!("expected `# config_id=<id> kind=<train|test>`, got {header:?}")))?;
    let mut config_id: Option<&str> = None;
    let mut kind: Option<CurveKind> = None;
    for token in meta.split_whitespace() {
        match token.split_once('=') {
            Some(("config_id", id)) if !id.is_empty() => config_id = Some(id),
            Some(("kind", k)) => kind = Some(k.parse()?),
            _ => return Err(bad(1, format!("unrecognized header token {token:?}"))),
        }
    }
    let config_id = config_id.ok_or_else(|| bad(1, "header is missing config_id".into()))?;
    let kind = kind.ok_or_else(|| bad(1, "header is missing kind".into()))?;

    let (_, columns) = lines
        .next()
        .ok_or_else(|| CliError::format(origin, "missing `iteration,loss` header row"))?;
    if columns != "iteration,loss" {
        return Err(bad(2, format!("expected `iteration,loss`, got {columns:?}")));
    }

    let mut points = Vec::new();
    for (idx, line) in lines {
        let line_no = idx + 1;
        if line.is_empty() {
            return Err(bad(line_no, "blank line inside data".into()));
        }
        let (iter_s, loss_s) = line
            .split_once(',')
            .ok_or_else(|| bad(line_no, format!("expected `iteration,loss`, got {line:?}")))?;
        let iter: u64 = iter_s
            .parse()
            .map_err(|e| bad(line_no, format!("bad iteration {iter_s:?}: {e}")))?;
        let loss: f64 = loss_s
            .parse()
            .map_err(|e| bad(line_no, format!("bad loss {loss_s:?}: {e}")))?;
        points.push((iter, loss));
    }

    Ok(LearningCurve::new(config_id, kind, points)?)
}

pub fn read_curve(path: &Path) -> CliResult<LearningCurve> {
    parse_curve(&read_to_string(path)?, path)
}

/// Comma-separated unsigned integers; empty or all-whitespace means an
/// empty list.
pub fn parse_u64_list(s: &str) -> Result<Vec<u64>, String> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|tok| {
            let tok = tok.trim();
            tok.parse::<u64>().map_err(|e| format!("bad integer {tok:?}: {e}"))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::path::PathBuf;

    fn origin() -> PathBuf {
        PathBuf::from("test.csv")
    }

    #[test]
    fn sig9_formatting() {
        assert_eq!(fmt_sig9(5.395106225151276), "5.39510623");
        assert_eq!(fmt_sig9(65000.0), "65000.0000");
        assert_eq!(fmt_sig9(449_280_000.0), "449280000");
        assert_eq!(fmt_sig9(0.00123), "0.00123000000");
        assert_eq!(fmt_sig9(0.0), "0.00000000");
        assert_eq!(fmt_sig9(-2.5), "-2.50000000");
        assert_eq!(fmt_sig9(1.5e12), "1500000000000");
    }

    #[test]
    fn sig9_rounding() {
        assert_eq!(round_sig9(4.608000000000001), 4.608);
        assert_eq!(round_sig9(30000.000000000004), 30000.0);
        assert_eq!(round_sig9(0.22474483268118362), 0.224744833);
        assert_eq!(round_sig9(-1.23456789012345), -1.23456789);
        assert_eq!(round_sig9(0.0), 0.0);
        assert_eq!(round_sig9(16_965_368.0), 16_965_368.0);
    }

    #[test]
    fn csv_round_trip_at_serialized_precision() {
        let curve = LearningCurve::new(
            "d512",
            CurveKind::Test,
            vec![(1, 7.3951062251), (500, 5.1234567890123), (65000, 2.000000014)],
        )
        .unwrap();
        let text = curve_to_csv(&curve);
        assert!(text.ends_with('\n'));
        assert!(!text.contains('\r'));
        let back = parse_curve(&text, &origin()).unwrap();
        assert_eq!(back.config_id(), "d512");
        assert_eq!(back.kind(), CurveKind::Test);
        assert_eq!(back.points().len(), 3);
        for (&(i0, l0), &(i1, l1)) in curve.points().iter().zip(back.points()) {
            assert_eq!(i0, i1);
            assert_eq!(fmt_sig9(l0), fmt_sig9(l1));
        }
        // A second round trip is exact: 9-digit values re-serialize to
        // the same bytes.
        assert_eq!(curve_to_csv(&back), text);
    }

    #[test]
    fn csv_header_is_strict() {
        for text in [
            "",
            "iteration,loss\n1,2.0\n",
            "# config=d512 kind=test\niteration,loss\n1,2.0\n",
            "# config_id=d512\niteration,loss\n1,2.0\n",
            "# config_id=d512 kind=validation\niteration,loss\n1,2.0\n",
            "# config_id=d512 kind=test\nloss,iteration\n1,2.0\n",
            "# config_id=d512 kind=test\niteration,loss\n1;2.0\n",
            "# config_id=d512 kind=test\niteration,loss\n1.5,2.0\n",
            "# config_id=d512 kind=test\niteration,loss\n1,two\n",
            "# config_id=d512 kind=test\niteration,loss\n1,2.0\n\n2,1.0\n",
        ] {
            assert!(parse_curve(text, &origin()).is_err(), "{text:?}");
        }
    }

    #[test]
    fn csv_core_validation_applies() {
        // Parsed but rejected by curve invariants: non-increasing grid.
        let text = "# config_id=c kind=test\niteration,loss\n5,2.0\n5,1.0\n";
        let err = parse_curve(text, &origin()).unwrap_err();
        assert_eq!(err.error_code(), "invalid_curve");
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn u64_lists() {
        assert_eq!(parse_u64_list("").unwrap(), Vec::<u64>::new());
        assert_eq!(parse_u64_list("  ").unwrap(), Vec::<u64>::new());
        assert_eq!(parse_u64_list("4000,20000,100000").unwrap(), vec![4000, 20000, 100000]);
        assert_eq!(parse_u64_list("4000, 20000").unwrap(), vec![4000, 20000]);
        assert!(parse_u64_list("4000,,100000").is_err());
        assert!(parse_u64_list("abc").is_err());
    }
}
