//! Batch front end. One command per invocation; artifacts go to `--out`.
//!
//! Exit status: 0 when every verdict passes, 2 when a verdict fails, 1 on errors.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{domain, Error, Result};
use crate::hetero1d::{check_tanh_bracket, fit_decay, solve_heteroclinic, Profile1D};
use crate::model::{check_coefficient_symmetries, check_potential_family, CoefficientField};
use crate::nfunc::{check_phi_conditions, check_tilde_phi4, NFunctionSpec, ZetaParams};
use crate::numeric::{linspace, logspace};
use crate::optim::{IterRecord, MinimizeConfig};
use crate::saddle2d::{
    export_field, extend_full, solve_pizza, solve_saddle, ExportFormat, Extension, Solution, SolutionFile,
};
use crate::verify::{check_theorem1, check_theorem2, residual_norms, truncation_consistency, Tolerances, DEFAULT_SEED};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_VERDICT: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "curvwell", version, about = "Saddle and pizza solutions of mean-curvature Allen-Cahn equations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub opts: Opts,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Check the structural conditions on phi, V and A.
    CheckConditions,
    /// Compute the 1D heteroclinic profile.
    #[command(name = "solve-1d")]
    #[serde(rename = "solve-1d")]
    Solve1d,
    /// Compute the saddle solution on the quadrant triangle.
    SolveSaddle,
    /// Compute a pizza solution on the polar sector.
    SolvePizza,
    /// Re-verify a saved solution.
    Verify,
    /// Re-export a saved solution.
    Export,
}

#[derive(Clone, Debug, Default, Args)]
pub struct Opts {
    #[arg(long, global = true)]
    pub alpha: Option<f64>,
    /// Truncation level L.
    #[arg(long = "L", global = true)]
    pub level: Option<f64>,
    /// `periodic:c=2` or `constant:b=1`.
    #[arg(long, global = true)]
    pub coef: Option<String>,
    #[arg(long = "R", global = true)]
    pub r: Option<f64>,
    /// Nodes per side (saddle), radial nodes (pizza) or intervals (1D).
    #[arg(long, global = true)]
    pub n: Option<usize>,
    /// Angular nodes of the pizza sector.
    #[arg(long, global = true)]
    pub n_theta: Option<usize>,
    /// Half-line length of the 1D problem.
    #[arg(long = "T", global = true)]
    pub t: Option<f64>,
    #[arg(long, global = true)]
    pub j: Option<i64>,
    /// `truncated:L=1` or `power:p=1.5`.
    #[arg(long, global = true)]
    pub phi: Option<String>,
    #[arg(long, global = true)]
    pub kappa2: Option<f64>,
    #[arg(long, global = true)]
    pub tol_grad: Option<f64>,
    #[arg(long, global = true)]
    pub max_iter: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub asym_tol: Option<f64>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// `key = value` file; flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub solution: Option<PathBuf>,
    /// `csv` or `json`.
    #[arg(long, global = true)]
    pub format: Option<String>,
    #[arg(long, global = true)]
    pub stride: Option<usize>,
}

/// Fully resolved run configuration, echoed into `report.json`.
#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct RunConfig {
    pub command: Command,
    pub alpha: f64,
    #[serde(rename = "L")]
    pub level: f64,
    pub coef: String,
    #[serde(rename = "R")]
    pub r: f64,
    pub n: usize,
    pub n_theta: usize,
    #[serde(rename = "T")]
    pub t: f64,
    pub j: i64,
    pub phi: String,
    pub kappa2: f64,
    pub tol_grad: f64,
    pub max_iter: usize,
    pub seed: u64,
    pub asym_tol: f64,
    pub stride: usize,
    pub format: String,
    #[serde(skip)]
    pub out: PathBuf,
    #[serde(skip)]
    pub solution: Option<PathBuf>,
}

fn parse_config_file(path: &Path) -> Result<BTreeMap<String, String>> {
    let text = std::fs::read_to_string(path)?;
    let mut map = BTreeMap::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return domain(format!("{}:{}: expected `key = value`", path.display(), no + 1));
        };
        let key = k.trim().trim_start_matches("--").replace('_', "-");
        map.insert(key, v.trim().to_string());
    }
    Ok(map)
}

fn file_value<T: std::str::FromStr>(file: &BTreeMap<String, String>, keys: &[&str]) -> Result<Option<T>> {
    for k in keys {
        if let Some(v) = file.get(*k) {
            return match v.parse() {
                Ok(x) => Ok(Some(x)),
                Err(_) => domain(format!("config key {k}: cannot parse `{v}`")),
            };
        }
    }
    Ok(None)
}

impl RunConfig {
    pub fn resolve(command: Command, opts: &Opts) -> Result<Self> {
        let file = match &opts.config {
            Some(p) => parse_config_file(p)?,
            None => BTreeMap::new(),
        };
        macro_rules! pick {
            ($flag:expr, [$($key:expr),+], $default:expr) => {
                match $flag.clone() {
                    Some(v) => v,
                    None => file_value(&file, &[$($key),+])?.unwrap_or_else(|| $default),
                }
            };
        }
        let r: f64 = pick!(opts.r, ["R", "r"], 40.0);
        let default_n = if command == Command::Solve1d { 1600 } else { 401 };
        let cfg = Self {
            command,
            alpha: pick!(opts.alpha, ["alpha"], 0.1),
            level: pick!(opts.level, ["L", "level"], 1.0),
            coef: pick!(opts.coef, ["coef"], "constant:b=1".to_string()),
            r,
            n: pick!(opts.n, ["n"], default_n),
            n_theta: pick!(opts.n_theta, ["n-theta"], 129),
            t: pick!(opts.t, ["T", "t"], 2.0 * r),
            j: pick!(opts.j, ["j"], 2),
            phi: pick!(opts.phi, ["phi"], "truncated:L=1".to_string()),
            kappa2: pick!(opts.kappa2, ["kappa2"], 1.0),
            tol_grad: pick!(opts.tol_grad, ["tol-grad", "tolGrad"], 1e-10),
            max_iter: pick!(opts.max_iter, ["max-iter", "maxIter"], 50_000),
            seed: pick!(opts.seed, ["seed"], DEFAULT_SEED),
            asym_tol: pick!(opts.asym_tol, ["asym-tol", "asymTol"], 0.05),
            stride: pick!(opts.stride, ["stride"], 1),
            format: pick!(opts.format, ["format"], "csv".to_string()),
            out: pick!(opts.out, ["out"], PathBuf::from(".")),
            solution: match &opts.solution {
                Some(p) => Some(p.clone()),
                None => file_value(&file, &["solution"])?,
            },
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        for (name, v) in [("alpha", self.alpha), ("L", self.level), ("R", self.r), ("T", self.t)] {
            if !(v > 0.0 && v.is_finite()) {
                return domain(format!("{name} must be positive, got {v}"));
            }
        }
        if self.command == Command::SolvePizza && self.j < 2 {
            return domain("j must be ≥ 2");
        }
        if !(self.tol_grad > 0.0) || self.max_iter == 0 {
            return domain("need tol-grad > 0 and max-iter >= 1");
        }
        if self.stride == 0 {
            return domain("stride must be >= 1");
        }
        Ok(())
    }

    fn minimize_config(&self) -> MinimizeConfig {
        MinimizeConfig {
            tol_grad: self.tol_grad,
            max_iter: self.max_iter,
            ..Default::default()
        }
    }

    fn tolerances(&self) -> Tolerances {
        Tolerances {
            asym: self.asym_tol,
            seed: self.seed,
            ..Default::default()
        }
    }

    fn export_format(&self) -> Result<ExportFormat> {
        match self.format.as_str() {
            "csv" => Ok(ExportFormat::Csv),
            "json" => Ok(ExportFormat::Json),
            f => domain(format!("unknown format `{f}` (expected csv or json)")),
        }
    }
}

/// Parses `kind:key=value,...` into its kind and key/value pairs.
fn parse_tagged(s: &str) -> Result<(String, BTreeMap<String, f64>)> {
    let (kind, rest) = s.split_once(':').unwrap_or((s, ""));
    let mut params = BTreeMap::new();
    for kv in rest.split(',').filter(|p| !p.is_empty()) {
        let Some((k, v)) = kv.split_once('=') else {
            return domain(format!("malformed parameter `{kv}` in `{s}`"));
        };
        let v: f64 = v
            .trim()
            .parse()
            .map_err(|_| Error::Domain(format!("parameter `{kv}` in `{s}` is not a number")))?;
        params.insert(k.trim().to_string(), v);
    }
    Ok((kind.trim().to_string(), params))
}

fn param(params: &BTreeMap<String, f64>, key: &str, spec: &str) -> Result<f64> {
    params
        .get(key)
        .copied()
        .ok_or_else(|| Error::Domain(format!("`{spec}` needs {key}=<value>")))
}

pub fn parse_coefficient(s: &str) -> Result<CoefficientField> {
    let (kind, p) = parse_tagged(s)?;
    match kind.as_str() {
        "periodic" => CoefficientField::periodic_model(param(&p, "c", s)?),
        "constant" => CoefficientField::constant(param(&p, "b", s)?),
        _ => domain(format!("unknown coefficient `{s}` (expected periodic:c=.. or constant:b=..)")),
    }
}

pub fn parse_phi(s: &str) -> Result<NFunctionSpec> {
    let (kind, p) = parse_tagged(s)?;
    match kind.as_str() {
        "truncated" => NFunctionSpec::truncated(param(&p, "L", s)?),
        "power" => NFunctionSpec::power_law(param(&p, "p", s)?),
        _ => domain(format!("unknown phi `{s}` (expected truncated:L=.. or power:p=..)")),
    }
}

fn write_json(dir: &Path, name: &str, value: &impl Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(dir.join(name), text)?;
    Ok(())
}

fn write_history(cfg: &RunConfig, history: &[IterRecord], converged: bool, wall: f64) -> Result<()> {
    write_json(
        &cfg.out,
        "history.json",
        &json!({
            "config": cfg,
            "iterations": history,
            "converged": converged,
            "wallSeconds": wall,
        }),
    )
}

fn status(pass: bool) -> i32 {
    if pass {
        EXIT_PASS
    } else {
        EXIT_VERDICT
    }
}

/// Caps the rayon pool from `CURVWELL_THREADS`.
pub fn init_threads() -> Result<()> {
    let Ok(v) = std::env::var("CURVWELL_THREADS") else {
        return Ok(());
    };
    let n: usize = match v.trim().parse() {
        Ok(n) if n > 0 => n,
        _ => return domain(format!("CURVWELL_THREADS must be a positive integer, got `{v}`")),
    };
    // a pool built earlier in the same process is kept
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

/// Runs one command and returns the exit status.
pub fn run(cli: &Cli) -> Result<i32> {
    let cfg = RunConfig::resolve(cli.command, &cli.opts)?;
    if cli.command != Command::CheckConditions || cfg.out != Path::new(".") {
        std::fs::create_dir_all(&cfg.out)?;
    }
    match cfg.command {
        Command::CheckConditions => check_conditions(&cfg),
        Command::Solve1d => solve_1d(&cfg),
        Command::SolveSaddle => {
            let coef = parse_coefficient(&cfg.coef)?;
            let sol = solve_saddle(cfg.alpha, cfg.level, &coef, cfg.r, cfg.n, &cfg.minimize_config())?;
            finish_2d(&cfg, &sol, true)
        }
        Command::SolvePizza => {
            let coef = parse_coefficient(&cfg.coef)?;
            let Some(b) = coef.is_constant() else {
                return domain("solve-pizza needs a constant coefficient (constant:b=..)");
            };
            let j = u32::try_from(cfg.j).map_err(|_| Error::Domain("j out of range".into()))?;
            let sol = solve_pizza(cfg.alpha, cfg.level, b, j, cfg.r, (cfg.n, cfg.n_theta), &cfg.minimize_config())?;
            finish_2d(&cfg, &sol, true)
        }
        Command::Verify => {
            let sol = load_solution(&cfg)?;
            finish_2d(&cfg, &sol, false)
        }
        Command::Export => {
            let sol = load_solution(&cfg)?;
            let ext = Extension::new(&sol.field);
            let format = cfg.export_format()?;
            let name = match format {
                ExportFormat::Csv => "field.csv",
                ExportFormat::Json => "field.json",
            };
            export_field(&ext, cfg.out.join(name), format, cfg.stride)?;
            Ok(EXIT_PASS)
        }
    }
}

fn load_solution(cfg: &RunConfig) -> Result<Solution> {
    let Some(path) = &cfg.solution else {
        return domain("--solution FILE is required");
    };
    if !path.exists() {
        return domain(format!("solution file {} not found", path.display()));
    }
    SolutionFile::load(path)?.into_solution()
}

fn finish_2d(cfg: &RunConfig, sol: &Solution, fresh: bool) -> Result<i32> {
    let alpha = sol.alpha();
    let level = sol.problem.level().unwrap_or(cfg.level);
    let tols = cfg.tolerances();
    for w in &sol.warnings {
        eprintln!("warning: {w}");
    }
    let mut report = json!({
        "command": cfg.command,
        "config": cfg,
        "converged": sol.converged,
        "iterations": sol.iterations,
    });
    let mut pass = sol.converged;
    if sol.converged {
        let theorem = match sol.grid().j() {
            None => check_theorem1(sol, alpha, level, &tols)?,
            Some(j) => check_theorem2(sol, alpha, level, j, &tols)?,
        };
        let trunc = truncation_consistency(sol, level)?;
        let (inf, l2) = residual_norms(sol);
        pass = theorem.pass && trunc.pass;
        report["theorem"] = serde_json::to_value(&theorem)?;
        report["truncation"] = serde_json::to_value(&trunc)?;
        report["residual"] = json!({ "inf": inf, "l2": l2 });
    }
    report["pass"] = Value::Bool(pass);
    write_json(&cfg.out, "report.json", &report)?;
    if fresh {
        write_history(cfg, &sol.history, sol.converged, sol.wall_seconds)?;
        SolutionFile::from_solution(sol)?.save(cfg.out.join("solution.json"))?;
        let ext = match extend_full(sol) {
            Ok(e) => e,
            Err(_) => Extension::new(&sol.field),
        };
        export_field(&ext, cfg.out.join("field.csv"), ExportFormat::Csv, cfg.stride)?;
    }
    Ok(status(pass))
}

fn solve_1d(cfg: &RunConfig) -> Result<i32> {
    let coef = parse_coefficient(&cfg.coef)?;
    let h = cfg.t / cfg.n as f64;
    let a = (0..=cfg.n)
        .map(|i| coef.line_average(i as f64 * h))
        .collect::<Result<Vec<f64>>>()?;
    let profile: Profile1D = solve_heteroclinic(
        cfg.alpha,
        cfg.level,
        |t| a[((t / h).round() as usize).min(cfg.n)],
        cfg.t,
        cfg.n,
        &cfg.minimize_config(),
    )?;
    profile.write_csv(cfg.out.join("field.csv"))?;
    let wall = 0.0;
    write_history(cfg, &profile.history, profile.converged, wall)?;

    let mut report = json!({ "command": cfg.command, "config": cfg, "converged": profile.converged });
    let mut pass = profile.converged;
    if profile.has_unit_coefficient() {
        let bracket = check_tanh_bracket(&profile, 1e-4 * cfg.alpha)?;
        pass &= bracket.pass;
        report["bracket"] = serde_json::to_value(&bracket)?;
        let window = (0.25 * cfg.t, cfg.t / 2.0);
        match fit_decay(&profile, window) {
            Ok(fit) => report["decay"] = serde_json::to_value(&fit)?,
            Err(e) => report["decay"] = json!({ "error": e.to_string() }),
        }
    }
    report["pass"] = Value::Bool(pass);
    write_json(&cfg.out, "report.json", &report)?;
    Ok(status(pass))
}

fn check_conditions(cfg: &RunConfig) -> Result<i32> {
    let phi = parse_phi(&cfg.phi)?;
    let level = phi.level().unwrap_or(cfg.level);
    let mut reports = Vec::new();

    reports.push(check_phi_conditions(&phi, &logspace(1e-4, 10.0, 400))?);

    let params = ZetaParams::new(0.05, 0.01, 5.0, level)?;
    let c = params.center();
    // an even count keeps the critical point itself off the grid
    let mut grid = linspace(c - 20.0, c + 20.0, 2000);
    grid.extend([c - 1e-7, c - 1e-9, c + 5e-7]);
    grid.sort_by(f64::total_cmp);
    reports.push(check_tilde_phi4(&phi, &params, cfg.kappa2, &grid)?);

    let alphas: Vec<f64> = linspace(0.01, 0.99, 50);
    reports.push(check_potential_family(&alphas, 1.0, &phi)?);
    reports.push(check_coefficient_symmetries(&parse_coefficient(&cfg.coef)?, 10_000, 1e-12, cfg.seed)?);

    let pass = reports.iter().all(|r| r.pass);
    let report = json!({
        "command": cfg.command,
        "config": cfg,
        "reports": reports,
        "pass": pass,
    });
    std::fs::create_dir_all(&cfg.out)?;
    write_json(&cfg.out, "report.json", &report)?;
    Ok(status(pass))
}

/// Parses `args`, runs, and maps errors to exit status 1 with a one-line message.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return EXIT_PASS;
            }
            let msg = e.to_string();
            eprintln!("error: {}", msg.lines().next().unwrap_or("invalid arguments").trim_start_matches("error: "));
            return EXIT_ERROR;
        }
    };
    let result = init_threads().and_then(|_| run(&cli));
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}", e.to_string().replace('\n', " "));
            EXIT_ERROR
        }
    }
}
