//! `bergman`: verification runs, extremal searches and closed-form tables for
//! weighted Bergman spaces on the unit ball.

mod output;
mod specs;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Result};
use bergman_core::bounds::{check_faber_krahn, check_mixture, check_pointwise, check_wehrl_probes, CheckReport};
use bergman_core::extremize::{saa_maximize, SaaOptions, SaaProblem};
use bergman_core::identities::run_identities;
use bergman_core::quadrature::{entropy_lower_bound, j_value, sharp_rhs};
use bergman_core::rearrange::LevelProfile;
use bergman_core::{ConvexProbe, McConfig, SpaceParams};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use output::{emit, fmt_value, Format};
use specs::{as_mixture, parse_function, parse_set, Usage};

#[derive(Parser)]
#[command(name = "bergman", version, about = "Wehrl-type and Faber-Krahn checks on weighted Bergman spaces of the ball")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one family of checks and write a report.
    Verify {
        #[arg(value_enum)]
        subject: Subject,
        #[command(flatten)]
        common: Common,
        /// Function under test: coherent:<z0>, poly:<path> or random:<degree>:<seed>.
        #[arg(long = "fn")]
        function: Option<String>,
        /// Rank of the mixture built from random:<degree>:<seed>.
        #[arg(long, default_value_t = 1)]
        rank: usize,
        /// Set for faber-krahn: ball:<s>[:<center>], annulus:<r1>:<r2> or superlevel:<t>.
        #[arg(long)]
        set: Option<String>,
    },
    /// Maximize the probe functional over polynomials of bounded degree.
    Extremize {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 6)]
        degree: usize,
        #[arg(long, default_value_t = 5)]
        restarts: usize,
        /// Keep per-iteration traces in the report.
        #[arg(long)]
        traces: bool,
    },
    /// Print closed-form values as `parameter,value`.
    Table {
        #[arg(value_enum)]
        what: TableKind,
        #[command(flatten)]
        common: Common,
        /// Comma-separated measures for `table j`.
        #[arg(long, value_delimiter = ',')]
        s: Vec<f64>,
    },
    /// Distribution function of `u_f` as `t,mu,stderr` rows (plot data).
    Profile {
        #[command(flatten)]
        common: Common,
        #[arg(long = "fn")]
        function: String,
        /// Number of levels, spaced geometrically below the supremum.
        #[arg(long, default_value_t = 40)]
        levels: usize,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Subject {
    Wehrl,
    Mixture,
    FaberKrahn,
    Pointwise,
    Identities,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum TableKind {
    Rhs,
    J,
    EntropyBound,
}

#[derive(Args, Clone, Debug)]
struct Common {
    /// Complex dimension of the ball.
    #[arg(long, default_value_t = 1)]
    n: usize,
    /// Weight; defaults to N + 1.
    #[arg(long, conflicts_with = "k")]
    alpha: Option<f64>,
    /// Wehrl weight index, alpha = (N + 1) k.
    #[arg(long)]
    k: Option<u32>,
    /// Convex probe: power:<p>, hinge:<t> or xlogx. Repeatable.
    #[arg(long = "probe", value_parser = parse_probe)]
    probes: Vec<ConvexProbe>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Monte Carlo sample count (default 200000; 51200 for extremize).
    #[arg(long)]
    samples: Option<usize>,
    /// Equal-probability radial strata.
    #[arg(long, default_value_t = 64)]
    strata: usize,
    /// Rotation orbit size (default 1; 32 for extremize).
    #[arg(long)]
    rotations: Option<usize>,
    /// Output file, written atomically; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Report format (default json; csv for table).
    #[arg(long, value_enum)]
    format: Option<Format>,
}

fn parse_probe(s: &str) -> std::result::Result<ConvexProbe, String> {
    s.parse().map_err(|e: bergman_core::Error| e.to_string())
}

/// Everything that determines a run; embedded in every report.
#[derive(Debug, Serialize)]
struct RunConfig {
    command: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    subject: Option<String>,
    params: SpaceParams,
    probes: Vec<ConvexProbe>,
    #[serde(skip_serializing_if = "Option::is_none")]
    function: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    rank: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    set: Option<String>,
    mc: McConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    degree: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    restarts: Option<usize>,
    out: Option<PathBuf>,
    format: Format,
}

impl RunConfig {
    fn new(command: &'static str, common: &Common, default_samples: usize, default_rotations: usize) -> Result<Self> {
        let format = common.format.unwrap_or(if command == "table" { Format::Csv } else { Format::Json });
        let params = match (common.alpha, common.k) {
            (Some(a), _) => SpaceParams::new(common.n, a),
            (None, Some(k)) => SpaceParams::wehrl(common.n, k),
            (None, None) => SpaceParams::wehrl(common.n, 1),
        }
        .map_err(|e| Usage(e.to_string()))?;
        let mut mc = McConfig::new(common.samples.unwrap_or(default_samples), common.seed);
        if common.strata > 1 {
            mc = mc.stratified(common.strata);
        }
        let rotations = common.rotations.unwrap_or(default_rotations);
        if rotations > 1 {
            mc = mc.rotated(rotations);
        }
        Ok(Self {
            command,
            subject: None,
            params,
            probes: common.probes.clone(),
            function: None,
            rank: None,
            set: None,
            mc,
            degree: None,
            restarts: None,
            out: common.out.clone(),
            format,
        })
    }

    fn probes_or(&self, default: ConvexProbe) -> Vec<ConvexProbe> {
        if self.probes.is_empty() {
            vec![default]
        } else {
            self.probes.clone()
        }
    }
}

#[derive(Serialize)]
struct Report<'a, T: Serialize> {
    config: &'a RunConfig,
    result: T,
}

fn verify(subject: Subject, common: Common, function: Option<String>, rank: usize, set: Option<String>) -> Result<bool> {
    let mut cfg = RunConfig::new("verify", &common, bergman_core::quadrature::DEFAULT_SAMPLES, 1)?;
    cfg.subject = subject.to_possible_value().map(|v| v.get_name().to_owned());
    if subject == Subject::Identities {
        let checks = run_identities(&cfg.params)?;
        let failed = checks.iter().filter(|c| !c.pass).count();
        eprintln!("identities: {} checked, {failed} failed", checks.len());
        emit(&cfg, &Report { config: &cfg, result: &checks }, || output::identities_csv(&checks))?;
        return Ok(failed == 0);
    }
    let spec = function.ok_or_else(|| Usage(format!("verify {} needs --fn", cfg.subject.as_deref().unwrap_or(""))))?;
    cfg.function = Some(spec.clone());
    cfg.rank = (rank > 1).then_some(rank);
    let state = parse_function(&spec, &cfg.params, rank)?;
    let reports: Vec<CheckReport> = match subject {
        Subject::Wehrl => check_wehrl_probes(&state, &cfg.probes_or(ConvexProbe::Power(2.0)), &cfg.mc)?,
        Subject::Mixture => {
            let mixed = as_mixture(state)?;
            cfg.probes_or(ConvexProbe::Power(2.0))
                .iter()
                .map(|p| check_mixture(&mixed, p, &cfg.mc))
                .collect::<bergman_core::Result<_>>()?
        }
        Subject::FaberKrahn => {
            let set_spec = set.unwrap_or_else(|| "ball:1".into());
            let parsed = parse_set(&set_spec, cfg.params.n())?;
            cfg.set = Some(set_spec);
            vec![check_faber_krahn(&state, &parsed, &cfg.mc)?]
        }
        Subject::Pointwise => vec![check_pointwise(&state, cfg.mc.n_samples, &cfg.mc)?],
        Subject::Identities => unreachable!(),
    };
    for r in &reports {
        eprintln!("{}", output::summary(r));
    }
    emit(&cfg, &Report { config: &cfg, result: &reports }, || output::checks_csv(&reports))?;
    Ok(!reports.iter().any(CheckReport::is_violation))
}

fn extremize(common: Common, degree: usize, restarts: usize, traces: bool) -> Result<bool> {
    let mut cfg = RunConfig::new("extremize", &common, 51_200, 32)?;
    cfg.degree = Some(degree);
    cfg.restarts = Some(restarts);
    let probe = match cfg.probes.as_slice() {
        [] => ConvexProbe::Power(2.0),
        [p] => *p,
        _ => bail!(Usage("extremize takes a single --probe".into())),
    };
    cfg.probes = vec![probe];
    let problem = SaaProblem::new(&cfg.params, probe, degree, &cfg.mc)?;
    let opts = SaaOptions { restarts, seed: common.seed, traces, ..SaaOptions::default() };
    let report = saa_maximize(&problem, &opts)?;
    eprintln!(
        "extremize {probe}: value {} (fresh {} ± {}), rhs {}, gap {}, overlap {:.6}",
        report.value.mean, report.fresh.mean, report.fresh.stderr, report.rhs, report.gap, report.coherence.overlap
    );
    let ok = report.gradient_gate.passed && report.bound_holds;
    emit(&cfg, &Report { config: &cfg, result: &report }, || output::restarts_csv(&report))?;
    Ok(ok)
}

fn table(what: TableKind, common: Common, s: Vec<f64>) -> Result<bool> {
    let cfg = RunConfig::new("table", &common, bergman_core::quadrature::DEFAULT_SAMPLES, 1)?;
    let p = &cfg.params;
    let rows: Vec<(String, f64)> = match what {
        TableKind::Rhs => cfg
            .probes_or(ConvexProbe::Power(2.0))
            .iter()
            .map(|probe| Ok((probe.to_string(), sharp_rhs(probe, p)?)))
            .collect::<bergman_core::Result<_>>()?,
        TableKind::J => {
            let grid = if s.is_empty() { vec![0.1, 1.0, 10.0] } else { s };
            if let Some(bad) = grid.iter().find(|x| !(x.is_finite() && **x >= 0.0)) {
                bail!(Usage(format!("--s values must be finite and nonnegative, got {bad}")));
            }
            grid.iter().map(|&x| (fmt_value(x), j_value(x, p))).collect()
        }
        TableKind::EntropyBound => vec![(fmt_value(p.alpha()), entropy_lower_bound(p)?)],
    };
    emit(&cfg, &Report { config: &cfg, result: output::table_json(&rows) }, || output::table_csv(&rows))?;
    Ok(true)
}

fn profile(common: Common, function: String, levels: usize) -> Result<bool> {
    let mut cfg = RunConfig::new("profile", &common, bergman_core::quadrature::DEFAULT_SAMPLES, 1)?;
    cfg.function = Some(function.clone());
    let state = parse_function(&function, &cfg.params, 1)?;
    let prof = LevelProfile::build(&state, &cfg.mc)?;
    let grid = prof.default_levels(levels.max(2), 1e-6 * prof.sup());
    let points = prof.li_su(&grid)?;
    let mu = grid.iter().map(|&t| prof.mu(t)).collect::<bergman_core::Result<Vec<_>>>()?;
    let rows: Vec<output::ProfileRow> = points
        .iter()
        .zip(&mu)
        .map(|(pt, m)| output::ProfileRow { t: pt.t, mu: m.mean, stderr: m.stderr, li_su: pt.g })
        .collect();
    emit(&cfg, &Report { config: &cfg, result: &rows }, || output::profile_csv(&rows))?;
    Ok(true)
}

fn exit_code(err: &anyhow::Error) -> u8 {
    use bergman_core::Error as E;
    if err.downcast_ref::<Usage>().is_some() {
        return 2;
    }
    match err.downcast_ref::<E>() {
        Some(E::IntegrationFailure { .. } | E::Divergent) => 3,
        Some(E::GradientCheck(_)) => 1,
        Some(_) => 2,
        None => 3,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Verify { subject, common, function, rank, set } => verify(subject, common, function, rank, set),
        Command::Extremize { common, degree, restarts, traces } => extremize(common, degree, restarts, traces),
        Command::Table { what, common, s } => table(what, common, s),
        Command::Profile { common, function, levels } => profile(common, function, levels),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
