//! The `sbvp` command line: `solve` and `adomian-bench`.

pub mod bench;
pub mod config;
pub mod output;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::diagnostics::BoundOptions;
use crate::nonlinearity::Nonlinearity;
use crate::solver::{solve, RootOptions, SolutionReport, SolveOptions};
use config::{ConfigError, Format, RawConfig, RunConfig};
use output::{csv_num, sig10, Rendered};

#[derive(Debug, Parser)]
#[command(name = "sbvp", version, about = "Series solutions of singular two-point boundary value problems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
#[allow(clippy::large_enum_variant)]
pub enum Command {
    /// Solve a problem and print the requested tables.
    Solve(SolveArgs),
    /// Time Duan's recurrence against the definitional expansion.
    AdomianBench(BenchArgs),
    /// List the built-in problems.
    Presets,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// Flat key=value file; flags given here override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub preset: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub family: Option<String>,
    /// Nonlinearity parameter, e.g. `--param gamma=5`. Repeatable.
    #[arg(long = "param", value_name = "KEY=VALUE")]
    pub params: Vec<String>,
    /// Boundary coefficients of a·u(1) + b·u'(1) = c.
    #[arg(long, value_name = "A,B,C", allow_hyphen_values = true)]
    pub bc: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    pub order: Option<i64>,
    /// Orders used to confirm the root, e.g. `6,8,10`.
    #[arg(long, value_name = "N,N,...")]
    pub ladder: Option<String>,
    /// Initial-slope scan interval and number of points.
    #[arg(long, value_name = "LO,HI,STEPS", allow_hyphen_values = true)]
    pub scan: Option<String>,
    /// Points of the uniform diagnostic grid on [0, 1].
    #[arg(long = "grid", allow_negative_numbers = true)]
    pub grid_points: Option<i64>,
    /// Exact solution to compare against, or `none`.
    #[arg(long)]
    pub exact: Option<String>,
    /// Comma-separated tables: coeffs, solution, error, residual, bound, convergence.
    #[arg(long, value_name = "TABLES")]
    pub emit: Option<String>,
    #[arg(long = "out")]
    pub output_path: Option<PathBuf>,
    /// text or csv.
    #[arg(long)]
    pub format: Option<String>,
    /// taylor_term or derivative_max.
    #[arg(long)]
    pub bound_mode: Option<String>,
    /// Evaluate the root scan in parallel.
    #[arg(long)]
    pub parallel: bool,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long)]
    pub family: String,
    #[arg(long = "param", value_name = "KEY=VALUE")]
    pub params: Vec<String>,
    #[arg(long, default_value_t = 20)]
    pub n_max: usize,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    #[arg(long, default_value_t = bench::DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long)]
    pub format: Option<String>,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Solve(#[from] crate::Error),
    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

fn flag_error(field: &str, msg: String) -> ConfigError {
    ConfigError::Invalid {
        field: field.to_string(),
        msg,
    }
}

fn family_key(s: &str) -> String {
    s.trim().replace('-', "_")
}

fn parse_params(items: &[String]) -> Result<Vec<(String, f64)>, ConfigError> {
    items
        .iter()
        .map(|item| {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| flag_error("param", format!("expected KEY=VALUE, got `{item}`")))?;
            let v = v
                .trim()
                .parse::<f64>()
                .map_err(|_| flag_error(&format!("param.{}", k.trim()), format!("`{v}` is not a number")))?;
            Ok((k.trim().to_string(), v))
        })
        .collect()
}

impl SolveArgs {
    /// Layers preset, config file and flags, then validates.
    pub fn resolve(&self) -> Result<RunConfig, ConfigError> {
        let mut raw = match &self.preset {
            Some(name) => RawConfig::from_preset(name)?,
            None => RawConfig::default(),
        };
        if let Some(path) = &self.config {
            raw.overlay(RawConfig::from_file(path)?);
        }
        raw.overlay(self.flags()?);
        raw.validate()
    }

    fn flags(&self) -> Result<RawConfig, ConfigError> {
        let mut raw = RawConfig {
            alpha: self.alpha,
            family: self.family.as_deref().map(family_key),
            order: self.order,
            grid_points: self.grid_points,
            output_path: self.output_path.clone(),
            parallel: self.parallel.then_some(true),
            ..RawConfig::default()
        };
        raw.params.extend(parse_params(&self.params)?);
        if let Some(bc) = &self.bc {
            let (a, b, c) = config::parse_bc(bc).map_err(|m| flag_error("bc", m))?;
            (raw.a, raw.b, raw.c) = (Some(a), Some(b), Some(c));
        }
        if let Some(l) = &self.ladder {
            raw.ladder = Some(
                config::parse_list(l, |s| s.parse::<i64>())
                    .map_err(|_| flag_error("ladder", format!("expected integers, got `{l}`")))?,
            );
        }
        if let Some(s) = &self.scan {
            raw.scan = Some(config::parse_scan(s).map_err(|m| flag_error("scan", m))?);
        }
        if let Some(e) = &self.exact {
            raw.exact = Some(config::parse_exact(e).map_err(|m| flag_error("exact", m))?);
        }
        if let Some(e) = &self.emit {
            raw.outputs = Some(config::parse_outputs(e).map_err(|m| flag_error("outputs", m))?);
        }
        if let Some(f) = &self.format {
            raw.format = Some(Format::parse(f).ok_or_else(|| flag_error("format", format!("unknown format `{f}`")))?);
        }
        if let Some(m) = &self.bound_mode {
            raw.bound_mode = Some(config::parse_bound_mode(m).map_err(|e| flag_error("bound_mode", e))?);
        }
        Ok(raw)
    }
}

pub fn solve_options(cfg: &RunConfig) -> SolveOptions {
    SolveOptions {
        roots: RootOptions {
            parallel: cfg.parallel,
            ..RootOptions::with_scan(cfg.scan)
        },
        ladder: cfg.ladder.clone(),
        grid_points: cfg.grid_points,
        exact: cfg.exact,
        bound: BoundOptions {
            mode: cfg.bound_mode,
            grid_points: cfg.grid_points,
            ..BoundOptions::default()
        },
        ..SolveOptions::default()
    }
}

/// Solves and renders every requested table.
pub fn execute(cfg: &RunConfig) -> Result<(SolutionReport, Vec<Rendered>), CliError> {
    let report = solve(&cfg.problem, cfg.order, &solve_options(cfg))?;
    let tables = output::render(cfg, &report)?;
    Ok((report, tables))
}

/// `<stem>.<table>.<ext>` beside `path`, used when several tables go to files.
pub fn table_path(path: &Path, table: &str, format: Format) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let ext = path
        .extension()
        .map(|e| e.to_string_lossy().into_owned())
        .unwrap_or_else(|| format.extension().to_string());
    path.with_file_name(format!("{stem}.{table}.{ext}"))
}

fn write_file(path: &Path, content: &str) -> Result<(), CliError> {
    std::fs::write(path, content).map_err(|source| CliError::Write {
        path: path.to_path_buf(),
        source,
    })
}

/// Runs a resolved configuration. Returns the exit status: 0 on a converged
/// root, 2 when the root could not be confirmed across the ladder.
pub fn run_solve(cfg: &RunConfig, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32, CliError> {
    let (report, tables) = execute(cfg)?;
    match &cfg.output_path {
        Some(path) if tables.len() == 1 => write_file(path, &tables[0].content)?,
        Some(path) => {
            for t in &tables {
                write_file(&table_path(path, t.kind.name(), cfg.format), &t.content)?;
            }
        }
        None => {
            let stdout_err = |source| CliError::Write {
                path: PathBuf::from("<stdout>"),
                source,
            };
            for (i, t) in tables.iter().enumerate() {
                if i > 0 {
                    writeln!(stdout).map_err(stdout_err)?;
                }
                if cfg.format == Format::Text && tables.len() > 1 {
                    writeln!(stdout, "[{}]", t.kind).map_err(stdout_err)?;
                }
                stdout.write_all(t.content.as_bytes()).map_err(stdout_err)?;
            }
        }
    }
    if report.converged() {
        Ok(0)
    } else {
        let ladder: Vec<String> = report
            .roots
            .ladder
            .iter()
            .map(|(n, b)| format!("N={n}: {}", sig10(*b)))
            .collect();
        let _ = writeln!(
            stderr,
            "warning: root not confirmed across the ladder (spread {}; {})",
            sig10(report.roots.spread),
            ladder.join(", ")
        );
        Ok(2)
    }
}

fn run_bench(args: &BenchArgs, stdout: &mut dyn Write) -> Result<i32, CliError> {
    let family = family_key(&args.family);
    let params = parse_params(&args.params)?;
    let f = Nonlinearity::from_params(&family, |k| params.iter().find(|(n, _)| n == k).map(|(_, v)| *v))?;
    let format = match &args.format {
        None => Format::Text,
        Some(s) => Format::parse(s).ok_or_else(|| flag_error("format", format!("unknown format `{s}`")))?,
    };
    let rows = bench::adomian_bench(&f, args.n_max, args.trials, args.seed)?;
    let mut out = String::new();
    use std::fmt::Write as _;
    match format {
        Format::Csv => {
            let _ = writeln!(out, "n,duan_mean_us,oracle_mean_us,max_deviation,failures");
            for r in &rows {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{}",
                    r.n,
                    csv_num(r.duan_mean_us),
                    csv_num(r.oracle_mean_us),
                    csv_num(r.max_deviation),
                    r.failures
                );
            }
        }
        Format::Text => {
            let _ = writeln!(out, "{f}, {} trials, seed {}", args.trials, args.seed);
            let _ = writeln!(out, "{:>3}  {:>14}  {:>14}  {:>14}  failures", "n", "duan_us", "oracle_us", "max_dev");
            for r in &rows {
                let _ = writeln!(
                    out,
                    "{:>3}  {:>14.3}  {:>14.3}  {:>14.3e}  {}",
                    r.n, r.duan_mean_us, r.oracle_mean_us, r.max_deviation, r.failures
                );
            }
        }
    }
    stdout.write_all(out.as_bytes()).map_err(|source| CliError::Write {
        path: PathBuf::from("<stdout>"),
        source,
    })?;
    Ok(0)
}

fn run_presets(stdout: &mut dyn Write) -> i32 {
    for name in config::PRESET_NAMES {
        let p = config::preset(name).expect("listed preset");
        let _ = writeln!(
            stdout,
            "{name}: alpha={} f={} bc=({}, {}, {}){}",
            p.alpha,
            p.family,
            p.a,
            p.b,
            p.c,
            p.exact.map(|e| format!(" exact={}", e.name())).unwrap_or_default()
        );
    }
    0
}

/// Entry point of the binary. Exit codes: 0 success, 1 error, 2 unconverged root.
pub fn main_with_args<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = write!(stderr, "{}", e.render());
            return code;
        }
    };
    let result = match &cli.command {
        Command::Solve(args) => args
            .resolve()
            .map_err(CliError::from)
            .and_then(|cfg| run_solve(&cfg, stdout, stderr)),
        Command::AdomianBench(args) => run_bench(args, stdout),
        Command::Presets => Ok(run_presets(stdout)),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            1
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(args: &[&str]) -> (i32, String, String) {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let mut argv = vec!["sbvp"];
        argv.extend_from_slice(args);
        let code = main_with_args(argv, &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn preset_solve_prints_beta_first() {
        let (code, out, _) = run(&["solve", "--preset", "membrane-cap", "--emit", "coeffs"]);
        assert_eq!(code, 0);
        assert!(out.starts_with("beta = 0.95413"), "{out}");
    }

    #[test]
    fn flags_override_preset() {
        let (code, out, _) = run(&["solve", "--preset", "membrane-cap", "--order", "10", "--emit", "coeffs"]);
        assert_eq!(code, 0);
        assert_eq!(out.lines().count(), 1 + 1 + 11);
    }

    #[test]
    fn full_problem_from_flags() {
        let (code, out, _) = run(&[
            "solve", "--alpha", "2", "--family", "power-law", "--param", "gamma=5", "--bc", "1,0,0.8660254037844386",
            "--exact", "isothermal-gas-sphere", "--emit", "bound", "--order", "12",
        ]);
        assert!(code == 0 || code == 2);
        assert!(out.contains("me = "), "{out}");
    }

    #[test]
    fn errors_exit_one() {
        let (code, _, err) = run(&["solve", "--preset", "membrane-cap", "--grid", "-5"]);
        assert_eq!(code, 1);
        assert!(err.contains("grid_points"), "{err}");
        let (code, _, _) = run(&["solve", "--preset", "nowhere"]);
        assert_eq!(code, 1);
        let (code, _, _) = run(&["solve", "--bogus"]);
        assert_eq!(code, 1);
    }

    #[test]
    fn table_paths() {
        assert_eq!(
            table_path(Path::new("/tmp/run.csv"), "coeffs", Format::Csv),
            PathBuf::from("/tmp/run.coeffs.csv")
        );
        assert_eq!(
            table_path(Path::new("out"), "bound", Format::Text),
            PathBuf::from("out.bound.txt")
        );
    }

    #[test]
    fn bench_runs() {
        let (code, out, _) = run(&["adomian-bench", "--family", "membrane_cap", "--n-max", "4", "--trials", "2", "--format", "csv"]);
        assert_eq!(code, 0);
        assert_eq!(out.lines().count(), 5);
        let (code, _, _) = run(&["adomian-bench", "--family", "membrane_cap", "--n-max", "51"]);
        assert_eq!(code, 1);
    }

    #[test]
    fn presets_listed() {
        let (code, out, _) = run(&["presets"]);
        assert_eq!(code, 0);
        assert_eq!(out.lines().count(), config::PRESET_NAMES.len());
    }
}
