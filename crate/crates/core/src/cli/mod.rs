//! Command-line front end: `run`, `figure`, `sweep` and `selftest`.

pub mod config;
pub mod csv;
pub mod experiments;
pub mod selftest;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::error::{Error, Result};
use crate::models::ModelKind;

use config::{Axis, Mode, RunConfig};
use experiments::Figure;

/// Exit code for a violated acceptance threshold under `--assert`.
pub const EXIT_ASSERT: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "geodec", version, about = "Complex geometric phases of non-Markovian quantum trajectories")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Phase time series for a single configuration.
    Run(Flags),
    /// Regenerate the data behind a figure (fig1a, fig1b, fig2, fig3).
    Figure {
        id: Figure,
        #[command(flatten)]
        flags: Flags,
    },
    /// Final-time geometric phase over one or two parameter axes.
    Sweep(Flags),
    /// Run the closed-form oracle suite.
    Selftest {
        /// Exit with code 4 if any check fails.
        #[arg(long)]
        assert: bool,
    },
}

/// Flags mirroring the configuration keys; they override file values.
#[derive(Debug, Default, Args)]
pub struct Flags {
    /// Configuration file (`key = value` lines, `[section]` headers).
    #[arg(short, long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub model: Option<ModelKind>,
    #[arg(long)]
    pub mode: Option<Mode>,
    #[arg(long, allow_negative_numbers = true)]
    pub omega: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    pub lambda: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    pub gamma: Option<String>,
    /// Bath coupling strength.
    #[arg(long = "Gamma", allow_negative_numbers = true)]
    pub big_gamma: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    pub omega0: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    pub theta: Option<String>,
    #[arg(long = "c_x", alias = "c-x", allow_negative_numbers = true)]
    pub c_x: Option<String>,
    #[arg(long = "Omega_c", alias = "omega-c", allow_negative_numbers = true)]
    pub omega_c: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    pub dt: Option<String>,
    #[arg(long = "t_final", alias = "t-final", allow_negative_numbers = true)]
    pub t_final: Option<String>,
    #[arg(long = "n_traj", alias = "n-traj")]
    pub n_traj: Option<String>,
    /// Master seed; defaults to `GEODEC_SEED`, then 0.
    #[arg(long)]
    pub seed: Option<String>,
    #[arg(long)]
    pub threads: Option<String>,
    /// Sweep axis `name:min:max:points`.
    #[arg(long)]
    pub x: Option<Axis>,
    /// Second sweep axis `name:min:max:points`.
    #[arg(long)]
    pub y: Option<Axis>,
    /// Output CSV path (`-` for stdout).
    #[arg(short, long)]
    pub output: Option<String>,
    /// Check acceptance thresholds and exit with code 4 on violation.
    #[arg(long)]
    pub assert: bool,
}

impl Flags {
    fn pairs(&self) -> Vec<(&'static str, String)> {
        let mut v = Vec::new();
        let mut put = |k: &'static str, x: &Option<String>| {
            if let Some(x) = x {
                v.push((k, x.clone()));
            }
        };
        put("omega", &self.omega);
        put("lambda", &self.lambda);
        put("gamma", &self.gamma);
        put("Gamma", &self.big_gamma);
        put("omega0", &self.omega0);
        put("theta", &self.theta);
        put("c_x", &self.c_x);
        put("Omega_c", &self.omega_c);
        put("dt", &self.dt);
        put("t_final", &self.t_final);
        put("n_traj", &self.n_traj);
        put("seed", &self.seed);
        put("threads", &self.threads);
        put("output", &self.output);
        v
    }

    /// Layer defaults, `GEODEC_SEED`, the config file and the flags, then
    /// validate.
    pub fn resolve(&self, base: RunConfig, env_seed: Option<&str>) -> Result<RunConfig> {
        let mut cfg = base;
        cfg.apply_env_seed(env_seed)?;
        if let Some(path) = &self.config {
            let text = std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.clone(), source })?;
            cfg.apply_text(&text, &path.display().to_string())?;
        }
        for (key, value) in self.pairs() {
            cfg.set(key, &value).map_err(|message| Error::Config { context: format!("--{key}"), message })?;
        }
        if let Some(m) = self.model {
            cfg.model = Some(m);
        }
        if let Some(m) = self.mode {
            cfg.mode = m;
        }
        if let Some(a) = &self.x {
            cfg.x = Some(a.clone());
        }
        if let Some(a) = &self.y {
            cfg.y = Some(a.clone());
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn emit(output: Option<&str>, default: Option<&Path>, contents: &str) -> Result<()> {
    match (output, default) {
        (Some("-"), _) | (None, None) => {
            let mut out = std::io::stdout().lock();
            out.write_all(contents.as_bytes())
                .map_err(|source| Error::Io { path: PathBuf::from("<stdout>"), source })
        }
        (Some(p), _) => csv::write_file(Path::new(p), contents),
        (None, Some(p)) => csv::write_file(p, contents),
    }
}

/// Sibling path `<stem>_<suffix>.csv`.
fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("out");
    path.with_file_name(format!("{stem}_{suffix}.csv"))
}

fn assert_outcome(assert: bool, failures: &[String]) -> i32 {
    for f in failures {
        eprintln!("threshold: {f}");
    }
    if assert && !failures.is_empty() { EXIT_ASSERT } else { 0 }
}

fn execute(cli: Cli, env_seed: Option<&str>) -> Result<i32> {
    match cli.command {
        Command::Run(flags) => {
            let cfg = flags.resolve(RunConfig::default(), env_seed)?;
            let out = experiments::run(&cfg)?;
            emit(cfg.output.as_deref(), None, &csv::series_csv(&out.rows, out.analytic.as_deref()))?;
            if out.excluded > 0 {
                eprintln!("excluded {} of {} trajectories", out.excluded, cfg.n_traj);
            }
            let mut failures = Vec::new();
            if let Some(z) = out.final_z() {
                if z > 3.0 {
                    failures.push(format!("final residual is {z:.2} standard errors"));
                }
            }
            Ok(assert_outcome(flags.assert, &failures))
        }
        Command::Sweep(flags) => {
            let cfg = flags.resolve(RunConfig::default(), env_seed)?;
            let table = experiments::sweep(&cfg)?;
            emit(cfg.output.as_deref(), None, &table.to_csv())?;
            Ok(0)
        }
        Command::Figure { id, flags } => {
            let cfg = flags.resolve(experiments::figure_defaults(id), env_seed)?;
            let default_path = PathBuf::from(format!("{}.csv", id.id()));
            let path = cfg.output.as_deref().map(PathBuf::from).unwrap_or(default_path);
            if id == Figure::Fig3 {
                let exp = experiments::leo_experiment(&cfg)?;
                csv::write_file(&path, &csv::series_csv(&experiments::series_rows(&exp.controlled), None))?;
                csv::write_file(&sibling(&path, "uncontrolled"), &csv::series_csv(&experiments::series_rows(&exp.uncontrolled), None))?;
                csv::write_file(&sibling(&path, "target"), &csv::series_csv(&experiments::series_rows(&exp.target), None))?;
                let (sc, su) = (exp.sup_im_controlled(), exp.sup_im_uncontrolled());
                println!("sup|Im beta| controlled = {}", csv::fmt_num(sc));
                println!("sup|Im beta| uncontrolled = {}", csv::fmt_num(su));
                println!("sup|Re beta - target| controlled = {}", csv::fmt_num(exp.max_real_deviation()));
                let mut failures = Vec::new();
                if sc >= 0.005 {
                    failures.push(format!("controlled sup|Im beta| = {sc:.4e} >= 0.005"));
                }
                if su <= 0.005 {
                    failures.push(format!("uncontrolled sup|Im beta| = {su:.4e} <= 0.005"));
                }
                return Ok(assert_outcome(flags.assert, &failures));
            }
            let table = experiments::sweep(&cfg)?;
            csv::write_file(&path, &table.to_csv())?;
            Ok(assert_outcome(flags.assert, &experiments::check_sweep_figure(id, &table)))
        }
        Command::Selftest { assert } => {
            let checks = selftest::run_selftest()?;
            for c in &checks {
                println!("{}", c.line());
            }
            let failed = checks.iter().any(|c| !c.passed());
            Ok(if assert && failed { EXIT_ASSERT } else { 0 })
        }
    }
}

/// Parse arguments, run, and map the outcome to a process exit code.
pub fn main_with_args<I, T>(args: I, env_seed: Option<&str>) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(cli, env_seed) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
