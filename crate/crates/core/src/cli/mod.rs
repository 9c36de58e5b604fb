//! Command-line front end: argument and config-file handling, experiment
//! dispatch and CSV / JSON report emission.

mod parse;

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::error::Error;
use crate::exponent::{
    default_partition, e0_ml, exponent_curve, jscc_exponent_bound, primal_exponent_oracle, random_coding_exponent,
    E0Params, JsccDesign, SourceSpec,
};
use crate::limits::Limits;
use crate::prob::{Channel, Dist};
use crate::rng::{Seed, PRNG_ID};
use crate::sim::{simulate, CompositionSpec, DecoderKind, Engine, RateSpec, SimConfig, SimResult};
use crate::types::quantize_to_type;

pub use parse::{parse_channel_spec, parse_grid, parse_list, TEXT_ROW_TOL};

#[derive(Debug, Parser)]
#[command(name = "explab", version, about = "Random-coding error exponents and Monte Carlo checks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CommandKind {
    Exponent,
    PrimalCheck,
    Simulate,
    JsccExponent,
    JsccSimulate,
    Curve,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// E_r(R) at one rate (or each rate of --R-grid)
    Exponent(RunArgs),
    /// Dual exponent against the brute-force primal minimization
    PrimalCheck(RunArgs),
    /// Monte Carlo error probability of constant-composition random codes
    Simulate(RunArgs),
    /// Per-class and overall joint source-channel exponent bound
    JsccExponent(RunArgs),
    /// Monte Carlo error probability of a joint source-channel design
    JsccSimulate(RunArgs),
    /// E_r(R) over --R-grid
    Curve(RunArgs),
}

impl Command {
    pub fn split(self) -> (CommandKind, RunArgs) {
        match self {
            Command::Exponent(a) => (CommandKind::Exponent, a),
            Command::PrimalCheck(a) => (CommandKind::PrimalCheck, a),
            Command::Simulate(a) => (CommandKind::Simulate, a),
            Command::JsccExponent(a) => (CommandKind::JsccExponent, a),
            Command::JsccSimulate(a) => (CommandKind::JsccSimulate, a),
            Command::Curve(a) => (CommandKind::Curve, a),
        }
    }
}

/// Every run setting. A `--config` JSON file may supply any of them under the
/// same names as the long flags; flags given on the command line win.
#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunArgs {
    /// bsc:<p>, bec:<e>, zchan:<p> or matrix:<csv path>
    #[arg(long)]
    #[serde(default)]
    pub channel: Option<String>,
    /// Input composition: "uniform" or a comma list of probabilities
    #[arg(long)]
    #[serde(default)]
    pub q: Option<String>,
    /// Rate in nats per channel use
    #[arg(long = "R", allow_negative_numbers = true)]
    #[serde(default, rename = "R")]
    pub rate: Option<f64>,
    /// Rates a:b:step
    #[arg(long = "R-grid")]
    #[serde(default, rename = "R-grid")]
    pub rate_grid: Option<String>,
    /// Restrict the rho maximization to the points a:b:step
    #[arg(long = "rho-grid")]
    #[serde(default, rename = "rho-grid")]
    pub rho_grid: Option<String>,
    /// Block lengths, comma separated
    #[arg(long)]
    #[serde(default)]
    pub n: Option<String>,
    #[arg(long)]
    #[serde(default)]
    pub trials: Option<u64>,
    #[arg(long)]
    #[serde(default)]
    pub seed: Option<u64>,
    /// ml, mmi or gmmi
    #[arg(long)]
    #[serde(default)]
    pub decoder: Option<String>,
    /// auto, explicit or pairwise
    #[arg(long)]
    #[serde(default)]
    pub engine: Option<String>,
    /// Lattice resolution of the primal oracle
    #[arg(long)]
    #[serde(default)]
    pub grid: Option<usize>,
    /// Source distribution P_V, comma separated
    #[arg(long)]
    #[serde(default)]
    pub source: Option<String>,
    /// Source block length
    #[arg(long)]
    #[serde(default)]
    pub k: Option<usize>,
    /// Number of messages (instead of --R)
    #[arg(long = "M")]
    #[serde(default, rename = "M")]
    pub messages: Option<u64>,
    /// JSON file with default values for any of these options
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// CSV output path (stdout when absent)
    #[arg(long)]
    #[serde(default)]
    pub out: Option<PathBuf>,
    /// JSON metadata sidecar path
    #[arg(long = "json-meta")]
    #[serde(default, rename = "json-meta")]
    pub json_meta: Option<PathBuf>,
}

#[derive(Debug)]
pub enum CliError {
    /// Bad or missing setting; `field` names it.
    Config { field: String, message: String },
    Lib(Error),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config { .. } => 2,
            CliError::Lib(Error::ResourceLimit { .. }) => 3,
            CliError::Lib(Error::NonConvergence { .. } | Error::InsufficientData(_)) => 1,
            CliError::Lib(_) => 2,
            CliError::Io(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config { field, message } => write!(f, "{field}: {message}"),
            CliError::Lib(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "{e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Lib(e)
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn config_err(field: &str, message: impl Into<String>) -> CliError {
    CliError::Config {
        field: field.into(),
        message: message.into(),
    }
}

fn missing(field: &str) -> CliError {
    config_err(field, format!("missing --{field}"))
}

/// Tag a library error caused by one setting with that setting's name,
/// keeping resource limits distinct.
fn in_field(field: &'static str) -> impl Fn(Error) -> CliError {
    move |e| match e {
        Error::ResourceLimit { .. } => CliError::Lib(e),
        e => config_err(field, e.to_string()),
    }
}

impl RunArgs {
    /// Fill unset options from the `--config` file, if any.
    pub fn resolve(self) -> CliResult<RunArgs> {
        let Some(path) = self.config.clone() else {
            return Ok(self);
        };
        let text = fs::read_to_string(&path).map_err(|e| config_err("config", format!("{}: {e}", path.display())))?;
        let file: RunArgs = serde_json::from_str(&text).map_err(|e| config_err("config", e.to_string()))?;
        Ok(RunArgs {
            channel: self.channel.or(file.channel),
            q: self.q.or(file.q),
            rate: self.rate.or(file.rate),
            rate_grid: self.rate_grid.or(file.rate_grid),
            rho_grid: self.rho_grid.or(file.rho_grid),
            n: self.n.or(file.n),
            trials: self.trials.or(file.trials),
            seed: self.seed.or(file.seed),
            decoder: self.decoder.or(file.decoder),
            engine: self.engine.or(file.engine),
            grid: self.grid.or(file.grid),
            source: self.source.or(file.source),
            k: self.k.or(file.k),
            messages: self.messages.or(file.messages),
            config: self.config,
            out: self.out.or(file.out),
            json_meta: self.json_meta.or(file.json_meta),
        })
    }

    fn channel(&self) -> CliResult<Channel> {
        let spec = self.channel.as_deref().ok_or_else(|| missing("channel"))?;
        parse_channel_spec(spec).map_err(in_field("channel"))
    }

    fn q(&self, w: &Channel) -> CliResult<Dist> {
        match self.q.as_deref().unwrap_or("uniform") {
            "uniform" => Dist::uniform(w.input_size()).map_err(in_field("q")),
            text => {
                let p = parse_list::<f64>(text).map_err(in_field("q"))?;
                if p.len() != w.input_size() {
                    return Err(config_err(
                        "q",
                        format!("{} entries for a channel with {} inputs", p.len(), w.input_size()),
                    ));
                }
                Dist::new(p).map_err(in_field("q"))
            }
        }
    }

    fn rates(&self) -> CliResult<Vec<f64>> {
        match (self.rate, self.rate_grid.as_deref()) {
            (Some(r), _) => Ok(vec![r]),
            (None, Some(g)) => parse_grid(g).map_err(in_field("R-grid")),
            (None, None) => Err(missing("R")),
        }
    }

    fn rho_grid(&self) -> CliResult<Option<Vec<f64>>> {
        let Some(g) = self.rho_grid.as_deref() else {
            return Ok(None);
        };
        let grid = parse_grid(g).map_err(in_field("rho-grid"))?;
        if grid.iter().any(|r| !(0.0..=1.0).contains(r)) {
            return Err(config_err("rho-grid", "points must lie in [0, 1]"));
        }
        Ok(Some(grid))
    }

    fn n_list(&self) -> CliResult<Vec<usize>> {
        let text = self.n.as_deref().ok_or_else(|| missing("n"))?;
        let list = parse_list::<usize>(text).map_err(in_field("n"))?;
        if list.contains(&0) {
            return Err(config_err("n", "block lengths must be positive"));
        }
        Ok(list)
    }

    fn single_n(&self) -> CliResult<usize> {
        match self.n_list()?.as_slice() {
            [n] => Ok(*n),
            _ => Err(config_err("n", "this command takes one block length")),
        }
    }

    fn trials(&self) -> CliResult<u64> {
        match self.trials.unwrap_or(1000) {
            0 => Err(config_err("trials", "must be at least 1")),
            t => Ok(t),
        }
    }

    fn decoder(&self, default: DecoderKind) -> CliResult<DecoderKind> {
        match self.decoder.as_deref() {
            None => Ok(default),
            Some("ml") => Ok(DecoderKind::Ml),
            Some("mmi") => Ok(DecoderKind::Mmi),
            Some("gmmi") => Ok(DecoderKind::Gmmi),
            Some(d) => Err(config_err("decoder", format!("unknown decoder {d:?} (ml, mmi, gmmi)"))),
        }
    }

    fn engine(&self) -> CliResult<Engine> {
        match self.engine.as_deref().unwrap_or("auto") {
            "auto" => Ok(Engine::Auto),
            "explicit" => Ok(Engine::Explicit),
            "pairwise" => Ok(Engine::Pairwise),
            e => Err(config_err("engine", format!("unknown engine {e:?} (auto, explicit, pairwise)"))),
        }
    }

    fn seed(&self) -> Seed {
        Seed::new(self.seed.unwrap_or(0))
    }

    fn jscc_design(&self, limits: &Limits) -> CliResult<JsccDesign> {
        let w = self.channel()?;
        let text = self.source.as_deref().ok_or_else(|| missing("source"))?;
        let p_v = Dist::new(parse_list::<f64>(text).map_err(in_field("source"))?).map_err(in_field("source"))?;
        let k = self.k.ok_or_else(|| missing("k"))?;
        let src = SourceSpec::new(p_v, k).map_err(in_field("k"))?;
        let n = self.single_n()?;
        let q = quantize_to_type(&self.q(&w)?, n).map_err(in_field("q"))?;
        let partition = default_partition(&src, limits.max_types).map_err(in_field("k"))?;
        JsccDesign::with_common_composition(src, partition, q, w).map_err(in_field("q"))
    }

    /// SHA-256 of the settings that determine the output.
    pub fn hash(&self, command: CommandKind) -> String {
        let mut clean = self.clone();
        clean.out = None;
        clean.json_meta = None;
        let bytes = serde_json::to_vec(&(command, clean)).expect("settings serialize");
        hex::encode(Sha256::digest(&bytes).as_slice())
    }
}

/// Tabular result of one command plus metadata for the sidecar.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
    pub details: Value,
}

/// `%.12g`: 12 significant digits, trailing zeros removed.
pub fn fmt_g(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.into();
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.11e}");
    let (mant, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let trim = |s: &str| -> String {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s.to_string()
        }
    };
    if !(-4..12).contains(&exp) {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim(mant), exp.abs())
    } else {
        trim(&format!("{:.*}", (11 - exp) as usize, x))
    }
}

/// `max_{ρ∈grid} E0(Q, ρ) - ρR`.
fn exponent_on_rho_grid(rate: f64, e0: &[(f64, f64)]) -> (f64, f64) {
    e0.iter()
        .map(|&(rho, e)| (e - rho * rate, rho))
        .fold((f64::NEG_INFINITY, 0.0), |best, cur| if cur.0 > best.0 { cur } else { best })
}

fn cmd_exponent(args: &RunArgs) -> CliResult<Report> {
    let w = args.channel()?;
    let q = args.q(&w)?;
    let rates = args.rates()?;
    for &r in &rates {
        if !(r >= 0.0) {
            return Err(config_err("R", format!("rate {r} must be >= 0")));
        }
    }
    let mut rows = Vec::with_capacity(rates.len());
    let details;
    if let Some(grid) = args.rho_grid()? {
        let e0 = grid
            .iter()
            .map(|&rho| Ok((rho, e0_ml(&E0Params::new(q.clone(), w.clone(), rho)?)?)))
            .collect::<crate::error::Result<Vec<_>>>()?;
        for &r in &rates {
            let (e, rho) = exponent_on_rho_grid(r, &e0);
            rows.push(vec![fmt_g(r), fmt_g(e.max(0.0)), fmt_g(rho)]);
        }
        details = json!({ "rho_grid_points": grid.len() });
    } else {
        let curve = exponent_curve(&q, &w, &rates)?;
        for p in &curve.points {
            rows.push(vec![fmt_g(p.rate), fmt_g(p.exponent), fmt_g(p.rho_star)]);
        }
        details = json!({
            "optimizer": curve.diagnostics,
            "rho_grid_fallbacks": curve.grid_fallbacks,
            "r_star": curve.points.iter().map(|p| p.r_star.values().to_vec()).collect::<Vec<_>>(),
        });
    }
    Ok(Report {
        header: vec!["R", "E_r", "rho_star"],
        rows,
        details,
    })
}

fn cmd_primal_check(args: &RunArgs, limits: &Limits) -> CliResult<Report> {
    let w = args.channel()?;
    let q = args.q(&w)?;
    let grid = args.grid.unwrap_or(2000);
    let mut rows = Vec::new();
    let mut max_diff: f64 = 0.0;
    for r in args.rates()? {
        let dual = random_coding_exponent(&q, &w, r).map_err(in_field("R"))?;
        let primal = primal_exponent_oracle(&q, &w, r, grid, limits.max_primal_points).map_err(|e| match e {
            Error::OutOfRange(m) => config_err("grid", m),
            e => CliError::Lib(e),
        })?;
        let diff = (dual.value - primal.value).abs();
        max_diff = max_diff.max(diff);
        rows.push(vec![fmt_g(r), fmt_g(dual.value), fmt_g(primal.value), fmt_g(diff), grid.to_string()]);
    }
    Ok(Report {
        header: vec!["R", "E_dual", "E_primal", "abs_diff", "grid"],
        rows,
        details: json!({ "max_abs_diff": max_diff }),
    })
}

fn sim_report(res: &SimResult) -> Report {
    let rows = res
        .per_n
        .iter()
        .map(|p| {
            vec![
                p.n.to_string(),
                p.m.to_string(),
                p.trials.to_string(),
                p.errors.to_string(),
                fmt_g(p.p_hat),
                fmt_g(p.ci_lo),
                fmt_g(p.ci_hi),
            ]
        })
        .collect();
    Report {
        header: vec!["n", "M", "trials", "errors", "p_hat", "ci_lo", "ci_hi"],
        rows,
        details: json!({
            "points": res.per_n,
            "fit": res.fit,
            "warnings": res.warnings,
            "sim": res.metadata,
        }),
    }
}

fn cmd_simulate(args: &RunArgs, limits: &Limits) -> CliResult<Report> {
    let w = args.channel()?;
    let q = args.q(&w)?;
    let rate = match (args.rate, args.messages) {
        (Some(_), Some(_)) => return Err(config_err("M", "give either --R or --M, not both")),
        (Some(r), None) if r > 0.0 => RateSpec::Rate(r),
        (Some(r), None) => return Err(config_err("R", format!("rate {r} must be positive"))),
        (None, Some(0)) => return Err(config_err("M", "must be at least 1")),
        (None, Some(m)) => RateSpec::Messages(m),
        (None, None) => return Err(missing("R")),
    };
    let mut cfg = SimConfig::new(w, CompositionSpec::Quantize(q), rate, args.n_list()?, args.trials()?);
    cfg.seed = args.seed();
    cfg.decoder = args.decoder(DecoderKind::Mmi)?;
    if cfg.decoder == DecoderKind::Gmmi {
        return Err(config_err("decoder", "gmmi needs jscc-simulate"));
    }
    cfg.engine = args.engine()?;
    cfg.limits = *limits;
    Ok(sim_report(&simulate(&cfg)?))
}

fn cmd_jscc_exponent(args: &RunArgs, limits: &Limits) -> CliResult<Report> {
    let d = args.jscc_design(limits)?;
    let b = jscc_exponent_bound(&d)?;
    let rows = b
        .per_class
        .iter()
        .map(|c| {
            vec![
                c.class_index.to_string(),
                fmt_g(c.rho_star),
                fmt_g(c.value),
                fmt_g(c.e_s_at_rho),
                fmt_g(b.overall_min),
                fmt_g(b.overall_logsum),
            ]
        })
        .collect();
    let classes: Vec<Vec<Vec<usize>>> = (0..d.partition().num_classes())
        .map(|i| {
            d.partition()
                .class(i)
                .iter()
                .map(|&t| d.partition().types()[t].counts().to_vec())
                .collect()
        })
        .collect();
    Ok(Report {
        header: vec!["class_index", "rho_star", "E_class", "E_s_at_rho", "overall_min", "overall_logsum"],
        rows,
        details: json!({ "classes": classes, "composition": d.compositions()[0].counts() }),
    })
}

fn cmd_jscc_simulate(args: &RunArgs, limits: &Limits) -> CliResult<Report> {
    let d = args.jscc_design(limits)?;
    let mut cfg = SimConfig::jscc(d, args.trials()?);
    cfg.seed = args.seed();
    cfg.decoder = args.decoder(DecoderKind::Gmmi)?;
    if cfg.decoder == DecoderKind::Mmi {
        return Err(config_err("decoder", "jscc-simulate decodes with gmmi or ml"));
    }
    if args.engine()? == Engine::Pairwise {
        return Err(config_err("engine", "jscc-simulate draws explicit codebooks"));
    }
    cfg.limits = *limits;
    Ok(sim_report(&simulate(&cfg)?))
}

fn cmd_curve(args: &RunArgs) -> CliResult<Report> {
    if args.rate_grid.is_none() && args.rate.is_none() {
        return Err(missing("R-grid"));
    }
    cmd_exponent(args)
}

pub fn run(command: CommandKind, args: &RunArgs, limits: &Limits) -> CliResult<Report> {
    match command {
        CommandKind::Exponent => cmd_exponent(args),
        CommandKind::PrimalCheck => cmd_primal_check(args, limits),
        CommandKind::Simulate => cmd_simulate(args, limits),
        CommandKind::JsccExponent => cmd_jscc_exponent(args, limits),
        CommandKind::JsccSimulate => cmd_jscc_simulate(args, limits),
        CommandKind::Curve => cmd_curve(args),
    }
}

/// CSV bytes of a report.
pub fn render_csv(report: &Report) -> CliResult<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&report.header).map_err(|e| CliError::Io(e.to_string()))?;
    for row in &report.rows {
        w.write_record(row).map_err(|e| CliError::Io(e.to_string()))?;
    }
    w.into_inner().map_err(|e| CliError::Io(e.to_string()))
}

/// Parse arguments, run, write outputs and map the outcome to an exit code.
pub fn main_with(cli: Cli) -> ExitCode {
    let started = Instant::now();
    let (command, args) = cli.command.split();
    let outcome = args.resolve().and_then(|args| {
        let limits = Limits::from_env();
        let report = run(command, &args, &limits)?;
        let csv = render_csv(&report)?;
        match &args.out {
            Some(path) => fs::write(path, &csv).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?,
            None => std::io::stdout().write_all(&csv).map_err(|e| CliError::Io(e.to_string()))?,
        }
        if let Some(path) = &args.json_meta {
            let meta = json!({
                "tool": "explab",
                "version": env!("CARGO_PKG_VERSION"),
                "command": command,
                "prng": PRNG_ID,
                "seed": args.seed.unwrap_or(0),
                "config_hash": args.hash(command),
                "wall_time_s": started.elapsed().as_secs_f64(),
                "columns": report.header,
                "details": report.details,
            });
            let text = serde_json::to_string_pretty(&meta).expect("metadata serializes");
            fs::write(path, text + "\n").map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        }
        Ok(())
    });
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(fmt_g(0.1), "0.1");
        assert_eq!(fmt_g(0.223143551314), "0.223143551314");
        assert_eq!(fmt_g(1.0 / 3.0), "0.333333333333");
        assert_eq!(fmt_g(2.0), "2");
        assert_eq!(fmt_g(1.5e-7), "1.5e-07");
        assert_eq!(fmt_g(123456789012345.0), "1.23456789012e+14");
        assert_eq!(fmt_g(0.99999999999999), "1");
        assert_eq!(fmt_g(-0.00012), "-0.00012");
        assert_eq!(fmt_g(8.82677307055e-5), "8.82677307055e-05");
        assert_eq!(fmt_g(f64::INFINITY), "inf");
        for x in [0.1234567890123456, 3.3e-9, 17.25, 1e-5, 9.99999999999e11] {
            let s = fmt_g(x);
            let back: f64 = s.parse().unwrap();
            assert_eq!(fmt_g(back), s);
            assert!((back - x).abs() <= 1e-11 * x.abs());
        }
    }

    fn args(channel: Option<&str>) -> RunArgs {
        RunArgs {
            channel: channel.map(String::from),
            rate: Some(0.1),
            ..Default::default()
        }
    }

    #[test]
    fn missing_channel_is_a_config_error() {
        let e = run(CommandKind::Exponent, &args(None), &Limits::default()).unwrap_err();
        assert_eq!(e.exit_code(), 2);
        assert!(e.to_string().contains("channel"));
        let e = run(CommandKind::Exponent, &args(Some("bsc:1.5")), &Limits::default()).unwrap_err();
        assert_eq!(e.exit_code(), 2);
        assert!(e.to_string().contains("channel"));
    }

    #[test]
    fn exponent_row() {
        let r = run(CommandKind::Exponent, &args(Some("bsc:0.1")), &Limits::default()).unwrap();
        assert_eq!(r.header, vec!["R", "E_r", "rho_star"]);
        assert_eq!(r.rows.len(), 1);
        let e: f64 = r.rows[0][1].parse().unwrap();
        let want = random_coding_exponent(&Dist::uniform(2).unwrap(), &Channel::bsc(0.1).unwrap(), 0.1)
            .unwrap()
            .value;
        assert_eq!(r.rows[0][1], fmt_g(want));
        assert!(e > 0.0);
    }

    #[test]
    fn rho_grid_restricts_the_search() {
        let mut a = args(Some("bsc:0.1"));
        a.rho_grid = Some("0:1:0.25".into());
        let r = run(CommandKind::Exponent, &a, &Limits::default()).unwrap();
        let rho: f64 = r.rows[0][2].parse().unwrap();
        assert!([0.0, 0.25, 0.5, 0.75, 1.0].contains(&rho));
    }

    #[test]
    fn resource_limits_exit_with_three() {
        let mut a = args(Some("bsc:0.1"));
        a.grid = Some(100);
        let limits = Limits {
            max_primal_points: 10.0,
            ..Limits::default()
        };
        let e = run(CommandKind::PrimalCheck, &a, &limits).unwrap_err();
        assert_eq!(e.exit_code(), 3);
    }

    #[test]
    fn config_file_values_yield_to_flags() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.json");
        fs::write(&path, r#"{"channel": "bsc:0.2", "R": 0.05, "q": "uniform"}"#).unwrap();
        let a = RunArgs {
            channel: Some("zchan:0.3".into()),
            config: Some(path.clone()),
            ..Default::default()
        }
        .resolve()
        .unwrap();
        assert_eq!(a.channel.as_deref(), Some("zchan:0.3"));
        assert_eq!(a.rate, Some(0.05));
        fs::write(&path, r#"{"chanel": "bsc:0.2"}"#).unwrap();
        let e = RunArgs {
            config: Some(path),
            ..Default::default()
        }
        .resolve()
        .unwrap_err();
        assert_eq!(e.exit_code(), 2);
        assert!(e.to_string().contains("chanel"));
    }
}
