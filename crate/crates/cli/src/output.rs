//! Report serialization and atomic output.

use std::fmt::Write as _;
use std::io::Write as _;

use anyhow::{Context, Result};
use bergman_core::bounds::CheckReport;
use bergman_core::extremize::ExtremalReport;
use bergman_core::identities::IdentityCheck;
use clap::ValueEnum;
use serde::Serialize;

use crate::RunConfig;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

/// Shortest round-trip decimal; empty for non-finite values.
pub fn fmt_value(x: f64) -> String {
    if x.is_finite() {
        format!("{x}")
    } else {
        String::new()
    }
}

/// Writes the report to `--out` (via a temporary file in the same directory
/// and a rename) or to stdout.
pub fn emit<T: Serialize>(cfg: &RunConfig, json: &T, csv: impl FnOnce() -> String) -> Result<()> {
    let text = match cfg.format {
        Format::Json => serde_json::to_string_pretty(json)? + "\n",
        Format::Csv => csv(),
    };
    match &cfg.out {
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
        }
        Some(path) => {
            let dir = match path.parent() {
                Some(d) if !d.as_os_str().is_empty() => d,
                _ => std::path::Path::new("."),
            };
            let mut tmp = tempfile::NamedTempFile::new_in(dir).with_context(|| format!("creating file in {}", dir.display()))?;
            tmp.write_all(text.as_bytes())?;
            tmp.as_file().sync_all()?;
            tmp.persist(path).with_context(|| format!("writing {}", path.display()))?;
        }
    }
    Ok(())
}

pub fn summary(r: &CheckReport) -> String {
    let probe = r.probe.map(|p| format!(" {p}")).unwrap_or_default();
    let verdict = serde_json::to_value(r.verdict).ok().and_then(|v| v.as_str().map(str::to_owned)).unwrap_or_default();
    format!(
        "{}{probe}: lhs {} ± {}, rhs {}, margin {} -> {verdict}{}",
        r.check,
        r.lhs.mean,
        r.lhs.stderr,
        r.rhs,
        r.margin,
        if r.rerun { " (rerun)" } else { "" }
    )
}

pub fn checks_csv(reports: &[CheckReport]) -> String {
    let mut out = String::from("check,probe,lhs,stderr,rhs,margin,sigmas,verdict,rerun\n");
    for r in reports {
        let verdict = serde_json::to_value(r.verdict).ok().and_then(|v| v.as_str().map(str::to_owned)).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{verdict},{}",
            r.check,
            r.probe.map(|p| p.to_string()).unwrap_or_default(),
            fmt_value(r.lhs.mean),
            fmt_value(r.lhs.stderr),
            fmt_value(r.rhs),
            fmt_value(r.margin),
            r.sigmas.map(fmt_value).unwrap_or_default(),
            r.rerun
        );
    }
    out
}

pub fn identities_csv(checks: &[IdentityCheck]) -> String {
    let mut out = String::from("name,value,expected,tol,pass\n");
    for c in checks {
        let _ = writeln!(
            out,
            "\"{}\",{},{},{},{}",
            c.name.replace('"', "\"\""),
            fmt_value(c.value),
            fmt_value(c.expected),
            fmt_value(c.tol),
            c.pass
        );
    }
    out
}

pub fn restarts_csv(report: &ExtremalReport) -> String {
    let mut out = String::from("restart,start,status,iterations,value,grad_norm,fresh,fresh_stderr,best\n");
    for r in &report.restarts {
        let name = |v: serde_json::Result<serde_json::Value>| {
            v.ok().and_then(|v| v.as_str().map(str::to_owned)).unwrap_or_default()
        };
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.index,
            name(serde_json::to_value(r.start)),
            name(serde_json::to_value(r.status)),
            r.iterations,
            fmt_value(r.value),
            fmt_value(r.grad_norm),
            r.fresh.map(|e| fmt_value(e.mean)).unwrap_or_default(),
            r.fresh.map(|e| fmt_value(e.stderr)).unwrap_or_default(),
            r.index == report.best_restart
        );
    }
    out
}

#[derive(Serialize)]
pub struct TableRow<'a> {
    parameter: &'a str,
    value: f64,
}

pub fn table_json(rows: &[(String, f64)]) -> Vec<TableRow<'_>> {
    rows.iter().map(|(p, v)| TableRow { parameter: p, value: *v }).collect()
}

pub fn table_csv(rows: &[(String, f64)]) -> String {
    let mut out = String::from("parameter,value\n");
    for (p, v) in rows {
        let _ = writeln!(out, "{p},{v:.9}");
    }
    out
}

#[derive(Serialize)]
pub struct ProfileRow {
    pub t: f64,
    pub mu: f64,
    pub stderr: f64,
    /// `t^{1/α} (μ(t)^{1/N} + 1)`.
    pub li_su: f64,
}

pub fn profile_csv(rows: &[ProfileRow]) -> String {
    let mut out = String::from("t,mu,stderr,li_su\n");
    for r in rows {
        let _ = writeln!(out, "{},{},{},{}", fmt_value(r.t), fmt_value(r.mu), fmt_value(r.stderr), fmt_value(r.li_su));
    }
    out
}
