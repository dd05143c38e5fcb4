//! Command-line front end. Every subcommand can also be driven by a JSON config file.

pub mod output;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, FromArgMatches, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bifurcation::attractor::{sweep_with, ClassifyOptions, SweepGrid};
use crate::bifurcation::curves::{fold_curve, hopf_curve, BifurcationCurve};
use crate::bifurcation::tangency::tangency_curve;
use crate::ergodic::{self, FnMap, GhmHandle, MapHandle, ModelHandle, Observable, Rotation};
use crate::ghm::{self, GhmParams, PlanarState};
use crate::renorm;
use crate::spectrum::{self, MultiplierSet};
use output::{float, Csv};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("unknown command: {0}")]
    UnknownCommand(String),
    #[error("bad config: {0}")]
    BadConfig(String),
    #[error("i/o failure: {0}")]
    IoFailure(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("computation failed: {0}")]
    Failed(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::IoFailure(_) | CliError::Failed(_) => 1,
            _ => 2,
        }
    }
}

fn parse_pair(s: &str) -> Result<(f64, f64), String> {
    let v = parse_list(s)?;
    match v[..] {
        [a, b] => Ok((a, b)),
        _ => Err(format!("expected two comma-separated numbers, got {s:?}")),
    }
}

fn parse_list(s: &str) -> Result<Vec<f64>, String> {
    s.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| format!("not a number: {t:?}")))
        .collect()
}

/// Parsed clap defaults, shared by serde so that omitted config keys match omitted flags.
fn clap_defaults<T: Args + FromArgMatches>() -> T {
    let cmd = T::augment_args(clap::Command::new("defaults"));
    T::from_arg_matches(&cmd.get_matches_from(["defaults"])).expect("every argument has a default")
}

macro_rules! clap_default {
    ($($t:ty),*) => {
        $(impl Default for $t {
            fn default() -> Self {
                clap_defaults()
            }
        })*
    };
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassifyArgs {
    /// Comma-separated complex literals, e.g. "0.5+0.2i,0.5-0.2i,3".
    #[arg(long, allow_hyphen_values = true)]
    pub multipliers: Option<String>,
    #[arg(long, default_value_t = spectrum::DEFAULT_TOL)]
    pub tol: f64,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
#[command(allow_negative_numbers = true)]
#[serde(default, deny_unknown_fields)]
pub struct ParamArgs {
    #[arg(long = "m", default_value_t = 0.0)]
    pub m: f64,
    #[arg(long = "b", default_value_t = 0.3)]
    pub b: f64,
    #[arg(long = "r", default_value_t = 0.0)]
    pub r: f64,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
#[command(allow_negative_numbers = true)]
#[serde(default, deny_unknown_fields)]
pub struct OrbitArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub params: ParamArgs,
    #[arg(long, default_value_t = 0.0)]
    pub x0: f64,
    #[arg(long, default_value_t = 0.0)]
    pub y0: f64,
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub transient: usize,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
#[command(allow_negative_numbers = true)]
#[serde(default, deny_unknown_fields)]
pub struct BtArgs {
    #[arg(long = "r", default_value_t = 0.0)]
    pub r: f64,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
#[command(allow_negative_numbers = true)]
#[serde(default, deny_unknown_fields)]
pub struct LyapunovArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub params: ParamArgs,
    #[arg(long, default_value_t = 0.0)]
    pub x0: f64,
    #[arg(long, default_value_t = 0.0)]
    pub y0: f64,
    #[arg(long, default_value_t = 100_000)]
    pub n: usize,
}

#[derive(Subcommand, Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GhmCommand {
    /// Orbit as CSV with columns i,x,y.
    Orbit(OrbitArgs),
    /// Fixed points with multipliers and stability.
    FixedPoints(ParamArgs),
    /// Bogdanov-Takens point and its fixed point.
    Bt(BtArgs),
    /// Lyapunov exponents along an orbit.
    Lyapunov(LyapunovArgs),
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
#[command(allow_negative_numbers = true)]
#[serde(default, deny_unknown_fields)]
pub struct CurveArgs {
    #[arg(long = "r", default_value_t = 0.0)]
    pub r: f64,
    /// B interval "lo,hi".
    #[arg(long, value_parser = parse_pair, default_value = "0.2,3", allow_hyphen_values = true)]
    pub range: (f64, f64),
    #[arg(long, default_value_t = 0.01)]
    pub step: f64,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
#[command(allow_negative_numbers = true)]
#[serde(default, deny_unknown_fields)]
pub struct TangencyArgs {
    #[arg(long = "r", default_value_t = 0.02)]
    pub r: f64,
    /// Half-width of the (M, B) seed box centred on the BT point.
    #[arg(long, default_value_t = 0.1)]
    pub range: f64,
    /// Spacing of the constant-M rays; 0 picks the default ray count.
    #[arg(long, default_value_t = 0.0)]
    pub step: f64,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
#[command(allow_negative_numbers = true)]
#[serde(default, deny_unknown_fields)]
pub struct SweepArgs {
    #[arg(long = "r", default_value_t = 0.02)]
    pub r: f64,
    #[arg(long, value_parser = parse_pair, default_value = "-1.1,-0.9", allow_hyphen_values = true)]
    pub m_range: (f64, f64),
    #[arg(long, value_parser = parse_pair, default_value = "0.9,1.1", allow_hyphen_values = true)]
    pub b_range: (f64, f64),
    #[arg(long, default_value_t = 20)]
    pub nm: usize,
    #[arg(long, default_value_t = 20)]
    pub nb: usize,
    #[arg(long, default_value_t = ClassifyOptions::default().transient)]
    pub transient: usize,
    #[arg(long, default_value_t = ClassifyOptions::default().samples)]
    pub samples: usize,
}

#[derive(Subcommand, Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BifCommand {
    /// Saddle-node curve as CSV M,B,y,residual.
    Fold(CurveArgs),
    /// Hopf curve as CSV M,B,y,residual.
    Hopf(CurveArgs),
    /// Both homoclinic-tangency families as CSV family,M,B,gap.
    Tangency(TangencyArgs),
    /// Attractor classification over an (M, B) grid.
    Sweep(SweepArgs),
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
#[command(allow_negative_numbers = true)]
#[serde(default, deny_unknown_fields)]
pub struct RenormArgs {
    #[arg(long, default_value_t = 0.5)]
    pub lambda: f64,
    #[arg(long, default_value_t = 1.0)]
    pub phi: f64,
    #[arg(long, default_value_t = 3.0)]
    pub gamma: f64,
    #[arg(long, default_value_t = 0.0)]
    pub mu: f64,
    #[arg(long, default_value_t = 3)]
    pub n_min: usize,
    #[arg(long, default_value_t = 20)]
    pub n_max: usize,
}

#[derive(Subcommand, Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RenormCommand {
    /// Fit first-return maps over a range of n and test their scaling.
    Verify(RenormArgs),
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HistoricArgs {
    /// Orbit CSV with x and y columns, as written by `ghm orbit`.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// x, y or box:x0,x1,y0,y1.
    #[arg(long, default_value = "x", allow_hyphen_values = true)]
    pub observable: String,
    #[arg(long, default_value_t = ergodic::DEFAULT_TAIL)]
    pub tail: f64,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
#[command(allow_negative_numbers = true)]
#[serde(default, deny_unknown_fields)]
pub struct WanderArgs {
    /// ghm:M,B,R | model:lambda,phi,gamma,mu,n | halve | rotation:turns
    #[arg(long, default_value = "halve", allow_hyphen_values = true)]
    pub map: String,
    /// Comma-separated centre of the initial ball.
    #[arg(long, default_value = "1", allow_hyphen_values = true)]
    pub center: String,
    #[arg(long, default_value_t = 0.1)]
    pub radius: f64,
    #[arg(long, default_value_t = 100)]
    pub n: usize,
    #[arg(long, default_value_t = 16)]
    pub cloud: usize,
}

clap_default!(
    ClassifyArgs,
    ParamArgs,
    OrbitArgs,
    BtArgs,
    LyapunovArgs,
    CurveArgs,
    TangencyArgs,
    SweepArgs,
    RenormArgs,
    HistoricArgs,
    WanderArgs
);

#[derive(Subcommand, Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Classify a multiplier list.
    Classify(ClassifyArgs),
    #[command(subcommand)]
    Ghm(GhmCommand),
    #[command(subcommand)]
    Bif(BifCommand),
    #[command(subcommand)]
    Renorm(RenormCommand),
    /// Birkhoff-average oscillation of an orbit file.
    Historic(HistoricArgs),
    /// Iterate a small ball and report disjointness and contraction.
    Wander(WanderArgs),
}

/// Serialized form of one run; equivalent to the command line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub command: Command,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub threads: Option<usize>,
}

#[derive(Parser, Debug)]
#[command(name = "dynkit", version, about = "Numerical toolkit for the generalized Henon family and its renormalization")]
struct Cli {
    /// JSON experiment config; replaces the subcommand.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for pseudo-random sampling. No current subcommand draws random numbers.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Option<Command>,
}

fn resolve(cli: Cli) -> Result<ExperimentConfig, CliError> {
    let mut cfg = match (cli.config, cli.command) {
        (Some(_), Some(_)) => return Err(CliError::BadConfig("give either --config or a subcommand, not both".into())),
        (None, None) => return Err(CliError::UnknownCommand("no subcommand given".into())),
        (Some(path), None) => {
            let text = std::fs::read_to_string(&path).map_err(|e| CliError::IoFailure(format!("{}: {e}", path.display())))?;
            serde_json::from_str::<ExperimentConfig>(&text).map_err(|e| CliError::BadConfig(e.to_string()))?
        }
        (None, Some(command)) => ExperimentConfig { command, out: None, seed: 0, threads: None },
    };
    if cli.out.is_some() {
        cfg.out = cli.out;
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if cli.threads.is_some() {
        cfg.threads = cli.threads;
    }
    Ok(cfg)
}

pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match resolve(cli).and_then(|cfg| execute(&cfg)) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(cfg: &ExperimentConfig) -> Result<(), CliError> {
    let text = match cfg.threads {
        Some(0) => return Err(CliError::Invalid("--threads must be at least 1".into())),
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| CliError::Failed(e.to_string()))?
            .install(|| render(&cfg.command))?,
        None => render(&cfg.command)?,
    };
    output::write(cfg.out.as_deref(), &text)
}

fn invalid<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Invalid(e.to_string())
}

fn failed<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Failed(e.to_string())
}

fn finite(name: &str, vals: &[f64]) -> Result<(), CliError> {
    if vals.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(CliError::Invalid(format!("{name} must be finite")))
    }
}

fn params(a: &ParamArgs) -> Result<GhmParams, CliError> {
    finite("M, B, R", &[a.m, a.b, a.r])?;
    Ok(GhmParams::new(a.m, a.b, a.r))
}

fn render(cmd: &Command) -> Result<String, CliError> {
    match cmd {
        Command::Classify(a) => {
            let text = a.multipliers.as_deref().ok_or_else(|| invalid("--multipliers is required"))?;
            let set = MultiplierSet::parse(text).map_err(invalid)?;
            let class = spectrum::classify(&set, a.tol).map_err(invalid)?;
            Ok(output::json(&class))
        }
        Command::Ghm(g) => render_ghm(g),
        Command::Bif(b) => render_bif(b),
        Command::Renorm(RenormCommand::Verify(a)) => {
            finite("lambda, phi, gamma, mu", &[a.lambda, a.phi, a.gamma, a.mu])?;
            if a.n_min > a.n_max {
                return Err(invalid(format!("n-min {} exceeds n-max {}", a.n_min, a.n_max)));
            }
            let model = renorm::build_model(a.lambda, a.phi, a.gamma, a.mu).map_err(invalid)?;
            let report = renorm::verify_asymptotics(&model, (a.n_min, a.n_max)).map_err(failed)?;
            Ok(output::json(&report))
        }
        Command::Historic(a) => render_historic(a),
        Command::Wander(a) => render_wander(a),
    }
}

fn render_ghm(cmd: &GhmCommand) -> Result<String, CliError> {
    match cmd {
        GhmCommand::Orbit(a) => {
            let p = params(&a.params)?;
            finite("x0, y0", &[a.x0, a.y0])?;
            let orb = ghm::orbit(PlanarState::new(a.x0, a.y0), &p, a.n, a.transient);
            if orb.escaped {
                eprintln!("warning: orbit escaped after {} recorded states", orb.states.len());
            }
            let mut csv = Csv::new(&["i", "x", "y"]);
            for (k, s) in orb.states.iter().enumerate() {
                csv.row(&[(a.transient + k + 1).to_string(), float(s.x), float(s.y)]);
            }
            Ok(csv.finish())
        }
        GhmCommand::FixedPoints(a) => {
            let fps = ghm::fixed_points(&params(a)?).map_err(invalid)?;
            Ok(output::json(&fps))
        }
        GhmCommand::Bt(a) => {
            let p = ghm::bt_point(a.r).map_err(invalid)?;
            let fp = ghm::bt_fixed_point(a.r).map_err(invalid)?;
            #[derive(Serialize)]
            struct Bt {
                #[serde(rename = "M")]
                m: f64,
                #[serde(rename = "B")]
                b: f64,
                #[serde(rename = "R")]
                r: f64,
                fixed_point: ghm::FixedPointInfo,
                jacobian: [[f64; 2]; 2],
            }
            let j = ghm::jacobian(fp.state, &p);
            Ok(output::json(&Bt { m: p.m, b: p.b, r: p.r, fixed_point: fp, jacobian: [[j[(0, 0)], j[(0, 1)]], [j[(1, 0)], j[(1, 1)]]] }))
        }
        GhmCommand::Lyapunov(a) => {
            let p = params(&a.params)?;
            finite("x0, y0", &[a.x0, a.y0])?;
            if a.n == 0 {
                return Err(invalid("--n must be positive"));
            }
            let (l1, l2) = ghm::lyapunov_spectrum(&p, PlanarState::new(a.x0, a.y0), a.n).map_err(failed)?;
            #[derive(Serialize)]
            struct Lyap {
                lyap1: f64,
                lyap2: f64,
                n: usize,
                transient: usize,
            }
            Ok(output::json(&Lyap { lyap1: l1, lyap2: l2, n: a.n, transient: ghm::lyapunov_transient(a.n) }))
        }
    }
}

fn curve_csv(c: &BifurcationCurve) -> String {
    let mut csv = Csv::new(&["M", "B", "y", "residual"]);
    for (i, p) in c.points.iter().enumerate() {
        csv.row(&[float(p.0), float(p.1), float(c.meta.fixed_y[i]), float(c.meta.residuals[i])]);
    }
    csv.finish()
}

fn render_bif(cmd: &BifCommand) -> Result<String, CliError> {
    match cmd {
        BifCommand::Fold(a) => Ok(curve_csv(&fold_curve(a.r, a.range, a.step).map_err(invalid)?)),
        BifCommand::Hopf(a) => Ok(curve_csv(&hopf_curve(a.r, a.range, a.step).map_err(invalid)?)),
        BifCommand::Tangency(a) => {
            if !(a.range > 0.0 && a.step >= 0.0) {
                return Err(invalid("--range must be positive and --step non-negative"));
            }
            let bt = ghm::bt_point(a.r).map_err(invalid)?;
            let sbox = ((bt.m - a.range, bt.m + a.range), (bt.b - a.range, bt.b + a.range));
            let (minus, plus) = tangency_curve(a.r, sbox, a.step).map_err(failed)?;
            let mut csv = Csv::new(&["family", "M", "B", "gap"]);
            for (name, c) in [("T-", &minus), ("T+", &plus)] {
                for (p, g) in c.points.iter().zip(&c.meta.residuals) {
                    csv.row(&[name.to_string(), float(p.0), float(p.1), float(*g)]);
                }
            }
            Ok(csv.finish())
        }
        BifCommand::Sweep(a) => {
            finite("ranges", &[a.r, a.m_range.0, a.m_range.1, a.b_range.0, a.b_range.1])?;
            if a.nm == 0 || a.nb == 0 || a.samples < 2 {
                return Err(invalid("--nm and --nb must be positive, --samples at least 2"));
            }
            let grid = SweepGrid { m_range: a.m_range, b_range: a.b_range, nm: a.nm, nb: a.nb };
            let opts = ClassifyOptions { transient: a.transient, samples: a.samples, ..ClassifyOptions::default() };
            let mut csv = Csv::new(&["M", "B", "label", "lyap1", "lyap2", "rot"]);
            for c in sweep_with(a.r, &grid, &opts) {
                csv.row(&[
                    float(c.m),
                    float(c.b),
                    c.class.label.as_str().to_string(),
                    float(c.class.lyap.0),
                    float(c.class.lyap.1),
                    float(c.class.rotation),
                ]);
            }
            Ok(csv.finish())
        }
    }
}

/// Reads the x and y columns of an orbit CSV.
pub fn read_orbit(path: &Path) -> Result<Vec<PlanarState>, CliError> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| CliError::IoFailure(format!("{}: {e}", path.display())))?;
    let headers = rdr.headers().map_err(invalid)?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| invalid(format!("{}: no column {name:?}", path.display())))
    };
    let (ix, iy) = (col("x")?, col("y")?);
    let mut states = Vec::new();
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(invalid)?;
        let get = |i: usize| {
            rec.get(i)
                .and_then(|t| t.trim().parse::<f64>().ok())
                .ok_or_else(|| invalid(format!("{}: row {} is malformed", path.display(), k + 1)))
        };
        states.push(PlanarState::new(get(ix)?, get(iy)?));
    }
    Ok(states)
}

fn render_historic(a: &HistoricArgs) -> Result<String, CliError> {
    let path = a.input.as_deref().ok_or_else(|| invalid("--input is required"))?;
    let orbit = read_orbit(path)?;
    let obs = Observable::parse(&a.observable).map_err(invalid)?;
    let series = ergodic::birkhoff_with(&orbit, &obs).map_err(invalid)?;
    let report = ergodic::oscillation(&series, a.tail).map_err(invalid)?;
    #[derive(Serialize)]
    struct Historic {
        observable: String,
        terms: usize,
        #[serde(flatten)]
        report: ergodic::HistoricReport,
    }
    Ok(output::json(&Historic { observable: series.observable_id, terms: series.partials.len(), report }))
}

/// Map handle from `ghm:M,B,R`, `model:lambda,phi,gamma,mu,n`, `halve` or `rotation:turns`.
pub fn parse_map(spec: &str) -> Result<Box<dyn MapHandle>, CliError> {
    let (kind, rest) = spec.split_once(':').unwrap_or((spec, ""));
    let nums = || parse_list(rest).map_err(|e| invalid(format!("map {spec:?}: {e}")));
    match kind {
        "halve" if rest.is_empty() => Ok(Box::new(FnMap { dim: 1, f: |s: &[f64]| vec![0.5 * s[0]] })),
        "ghm" => match nums()?[..] {
            [m, b, r] => Ok(Box::new(GhmHandle(GhmParams::new(m, b, r)))),
            _ => Err(invalid("ghm map needs M,B,R")),
        },
        "rotation" => match nums()?[..] {
            [t] => Ok(Box::new(Rotation(t))),
            _ => Err(invalid("rotation map needs one angle in turns")),
        },
        "model" => match nums()?[..] {
            [l, phi, g, mu, n] if n >= 1.0 && n.fract() == 0.0 => {
                let model = renorm::build_model(l, phi, g, mu).map_err(invalid)?;
                Ok(Box::new(ModelHandle { model, n: n as usize }))
            }
            _ => Err(invalid("model map needs lambda,phi,gamma,mu,n with integer n >= 1")),
        },
        _ => Err(invalid(format!("unknown map {spec:?}"))),
    }
}

fn render_wander(a: &WanderArgs) -> Result<String, CliError> {
    let map = parse_map(&a.map)?;
    let center = parse_list(&a.center).map_err(invalid)?;
    let report = ergodic::wandering_probe(map.as_ref(), &center, a.radius, a.n, a.cloud).map_err(|e| match e {
        ergodic::ErgodicError::Escaped(_) => failed(e),
        _ => invalid(e),
    })?;
    Ok(output::json(&report))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_round_trips() {
        let cfg = ExperimentConfig {
            command: Command::Bif(BifCommand::Sweep(SweepArgs { nm: 2, ..SweepArgs::default() })),
            out: Some("x.csv".into()),
            seed: 3,
            threads: Some(2),
        };
        let text = serde_json::to_string(&cfg).unwrap();
        assert_eq!(serde_json::from_str::<ExperimentConfig>(&text).unwrap(), cfg);
    }

    #[test]
    fn config_defaults_match_flags() {
        let cli = Cli::try_parse_from(["dynkit", "ghm", "orbit", "--m", "-0.5"]).unwrap();
        let flags = resolve(cli).unwrap();
        let cfg: ExperimentConfig = serde_json::from_str(r#"{"command": {"ghm": {"orbit": {"m": -0.5}}}}"#).unwrap();
        assert_eq!(flags, cfg);
    }

    #[test]
    fn unknown_keys_rejected() {
        for text in [
            r#"{"command": {"ghm": {"bt": {"r": 0, "q": 1}}}}"#,
            r#"{"command": {"ghm": {"bt": {}}}, "extra": 1}"#,
            r#"{"command": {"nope": {}}}"#,
        ] {
            assert!(serde_json::from_str::<ExperimentConfig>(text).is_err(), "{text}");
        }
    }

    #[test]
    fn map_specs() {
        assert_eq!(parse_map("halve").unwrap().dim(), 1);
        assert_eq!(parse_map("ghm:0,0.3,0").unwrap().dim(), 2);
        assert_eq!(parse_map("model:0.5,1,3,0,4").unwrap().dim(), 3);
        assert_eq!(parse_map("rotation:0.25").unwrap().apply(&[1.0, 0.0])[1], 1.0);
        for bad in ["ghm:1,2", "model:0.5,1,3,0,2.5", "spin", "halve:1"] {
            assert!(parse_map(bad).is_err(), "{bad}");
        }
    }
}
