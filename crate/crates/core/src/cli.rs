//! The `gaussfid` command-line front end.
//!
//! Exit codes:
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | success |
//! | 1 | numerical failure (e.g. singular matrix) |
//! | 2 | usage, parse or unsupported-combination error |
//! | 3 | input state is not pure |
//! | 4 | output could not be written |
//! | 5 | `validate`: G is not symmetric positive semidefinite |
//! | 6 | `oracle`: oracle disagrees with the closed form |

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::Complex;

use crate::channels::{validate, GaussianChannel};
use crate::config::{build_pair, ChannelSpec, ProblemConfig, RowMajor, StateSpec};
use crate::error::Error;
use crate::fidelity::channel_fidelity;
use crate::oracle::{mc_fidelity, quad_fidelity, McConfig, QuadratureGrid};
use crate::states::GaussianState;
use crate::sweep::{fidelity_range, write_csv, write_json, SweepConfig, SweepError, SweepPlan};

pub const EXIT_OK: i32 = 0;
pub const EXIT_NUMERIC: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NOT_PURE: i32 = 3;
pub const EXIT_WRITE: i32 = 4;
pub const EXIT_INVALID_CHANNEL: i32 = 5;
pub const EXIT_ORACLE_MISMATCH: i32 = 6;

/// Environment variable overriding the worker count.
pub const THREADS_ENV: &str = "GF_THREADS";

#[derive(Parser, Debug)]
#[command(name = "gaussfid", version, about = "Fidelity of bosonic Gaussian channels with pure Gaussian inputs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Closed-form fidelity of a channel on a pure input
    Fidelity {
        #[command(flatten)]
        problem: ProblemArgs,
        /// Print the result as JSON
        #[arg(long)]
        json: bool,
    },
    /// Evaluate a parameter grid and write a table
    Sweep(SweepArgs),
    /// Check the positivity conditions of a channel
    Validate {
        #[command(flatten)]
        problem: ProblemArgs,
    },
    /// Compare the closed form against a numerical oracle
    Oracle(OracleArgs),
}

#[derive(Args, Debug, Default)]
struct ProblemArgs {
    /// JSON file with "channel" and optional "state" objects
    #[arg(long, conflicts_with_all = ["channel", "state"])]
    config: Option<PathBuf>,
    /// identity | amplifier | attenuator | classical_noise | memory | custom
    #[arg(long)]
    channel: Option<String>,
    /// Noise variance of the memory channel
    #[arg(long = "N")]
    noise: Option<f64>,
    /// Correlation coefficient of the memory channel
    #[arg(long = "x")]
    x: Option<f64>,
    /// Gain or transmissivity
    #[arg(long)]
    eta: Option<f64>,
    /// Channel matrix A as a JSON row-major array
    #[arg(long = "A")]
    a: Option<String>,
    /// Noise matrix G as a JSON row-major array
    #[arg(long = "G")]
    g: Option<String>,
    /// Mode count for identity channels and vacuum inputs
    #[arg(long = "n")]
    modes: Option<usize>,
    /// vacuum | coherent | tmsv | squeezed | custom
    #[arg(long)]
    state: Option<String>,
    /// Coherent amplitudes as re,im pairs: 0,0,1,-0.5
    #[arg(long, allow_hyphen_values = true)]
    alphas: Option<String>,
    /// Squeeze parameter
    #[arg(long, allow_hyphen_values = true)]
    r: Option<f64>,
    /// Custom covariance matrix as a JSON row-major array
    #[arg(long)]
    cov: Option<String>,
    /// Custom displacement as comma-separated reals
    #[arg(long, allow_hyphen_values = true)]
    disp: Option<String>,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Worker count; GF_THREADS takes precedence
    #[arg(long)]
    parallelism: Option<usize>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Method {
    Quad,
    Mc,
}

#[derive(Args, Debug)]
struct OracleArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    #[arg(long, value_enum)]
    method: Method,
    /// Quadrature half-width per axis
    #[arg(long = "L")]
    half_width: Option<f64>,
    /// Quadrature points per axis
    #[arg(long = "m")]
    points: Option<usize>,
    /// Accepted |oracle - closed form| for quadrature
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    #[arg(long, default_value_t = 1_000_000)]
    samples: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    parallelism: Option<usize>,
}

#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Precondition(_) => EXIT_NOT_PURE,
            Error::SingularMatrix(_) => EXIT_NUMERIC,
            _ => EXIT_USAGE,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl From<SweepError> for Failure {
    fn from(e: SweepError) -> Self {
        match e {
            SweepError::Row { source, row } => {
                let mut f = Failure::from(source);
                f.message = format!("row {row}: {}", f.message);
                f
            }
            SweepError::Invalid(_) | SweepError::TooLarge { .. } => Failure::usage(e.to_string()),
            SweepError::Io(_) | SweepError::Csv(_) | SweepError::Json(_) => Failure {
                code: EXIT_WRITE,
                message: e.to_string(),
            },
        }
    }
}

type CmdResult = Result<i32, Failure>;

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(err, "{}", e.render());
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let result = match cli.command {
        Command::Fidelity { problem, json } => cmd_fidelity(&problem, json, out, err),
        Command::Sweep(args) => cmd_sweep(&args, out),
        Command::Validate { problem } => cmd_validate(&problem, out, err),
        Command::Oracle(args) => cmd_oracle(&args, out),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

/// Rounds to 12 significant digits and prints the shortest representation.
pub fn display_value(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{v:?}");
    }
    let rounded: f64 = format!("{v:.11e}").parse().unwrap_or(v);
    format!("{rounded:?}")
}

/// `GF_THREADS`, then the explicit setting, then the number of cores.
pub fn worker_count(explicit: Option<usize>) -> usize {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|n| *n > 0)
        .or(explicit.filter(|n| *n > 0))
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

fn with_pool<R: Send>(threads: usize, f: impl FnOnce() -> R + Send) -> Result<R, Failure> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Failure {
            code: EXIT_NUMERIC,
            message: format!("cannot start worker pool: {e}"),
        })?;
    Ok(pool.install(f))
}

fn parse_matrix(flag: &str, text: &str) -> Result<RowMajor, Failure> {
    serde_json::from_str(text).map_err(|e| Failure::usage(format!("--{flag}: {e}")))
}

fn parse_list(flag: &str, text: &str) -> Result<Vec<f64>, Failure> {
    text.split(',')
        .map(|t| t.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| Failure::usage(format!("--{flag}: {e}")))
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::usage(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| Failure::usage(format!("cannot parse {}: {e}", path.display())))
}

fn required<T: Copy>(value: Option<T>, flag: &str, family: &str) -> Result<T, Failure> {
    value.ok_or_else(|| Failure::usage(format!("--{flag} is required for {family}")))
}

impl ProblemArgs {
    fn channel_spec(&self) -> Result<ChannelSpec, Failure> {
        let kind = self
            .channel
            .as_deref()
            .ok_or_else(|| Failure::usage("either --config or --channel is required"))?;
        Ok(match kind {
            "identity" => ChannelSpec::Identity { n: self.modes },
            "amplifier" => ChannelSpec::Amplifier {
                eta: required(self.eta, "eta", kind)?,
            },
            "attenuator" => ChannelSpec::Attenuator {
                eta: required(self.eta, "eta", kind)?,
            },
            "memory" => ChannelSpec::Memory {
                noise: required(self.noise, "N", kind)?,
                x: required(self.x, "x", kind)?,
            },
            "classical_noise" => ChannelSpec::ClassicalNoise {
                g: parse_matrix("G", self.g.as_deref().ok_or_else(|| Failure::usage("--G is required"))?)?,
            },
            "custom" => ChannelSpec::Custom {
                a: parse_matrix("A", self.a.as_deref().ok_or_else(|| Failure::usage("--A is required"))?)?,
                g: parse_matrix("G", self.g.as_deref().ok_or_else(|| Failure::usage("--G is required"))?)?,
            },
            other => return Err(Failure::usage(format!("unknown channel type {other:?}"))),
        })
    }

    fn state_spec(&self) -> Result<Option<StateSpec>, Failure> {
        let Some(kind) = self.state.as_deref() else {
            return Ok(None);
        };
        Ok(Some(match kind {
            "vacuum" => StateSpec::Vacuum { n: self.modes },
            "coherent" => {
                let flat = match &self.alphas {
                    Some(text) => parse_list("alphas", text)?,
                    None => return Err(Failure::usage("--alphas is required for coherent")),
                };
                if flat.len() % 2 != 0 {
                    return Err(Failure::usage("--alphas needs re,im pairs"));
                }
                StateSpec::Coherent {
                    alphas: flat.chunks(2).map(|p| [p[0], p[1]]).collect(),
                }
            }
            "tmsv" => StateSpec::Tmsv {
                r: required(self.r, "r", kind)?,
            },
            "squeezed" => StateSpec::Squeezed {
                r: required(self.r, "r", kind)?,
            },
            "custom" => StateSpec::Custom {
                cov: parse_matrix("cov", self.cov.as_deref().ok_or_else(|| Failure::usage("--cov is required"))?)?,
                disp: self.disp.as_deref().map(|d| parse_list("disp", d)).transpose()?,
            },
            other => return Err(Failure::usage(format!("unknown state type {other:?}"))),
        }))
    }

    fn problem(&self) -> Result<ProblemConfig, Failure> {
        match &self.config {
            Some(path) => read_json(path),
            None => Ok(ProblemConfig {
                channel: self.channel_spec()?,
                state: self.state_spec()?,
            }),
        }
    }

    fn channel_and_state(&self) -> Result<(GaussianChannel, GaussianState), Failure> {
        let problem = self.problem()?;
        let state = problem
            .state
            .ok_or_else(|| Failure::usage("an input state is required (--state or \"state\" in the config)"))?;
        Ok(build_pair(&problem.channel, &state)?)
    }
}

fn warn_cp(c: &GaussianChannel, err: &mut dyn Write) {
    let report = validate(c);
    if !report.cp_condition {
        let _ = writeln!(
            err,
            "warning: channel violates the complete-positivity condition (min eigenvalue {})",
            display_value(report.cp_min_eig)
        );
    }
}

fn cmd_fidelity(problem: &ProblemArgs, json: bool, out: &mut dyn Write, err: &mut dyn Write) -> CmdResult {
    let (c, s) = problem.channel_and_state()?;
    warn_cp(&c, err);
    let r = channel_fidelity(&c, &s)?;
    let written = if json {
        writeln!(
            out,
            "{}",
            serde_json::json!({
                "fidelity": r.value,
                "det_factor": r.det_factor,
                "disp_factor": r.disp_factor,
                "matrix_condition": r.matrix_condition,
            })
        )
    } else {
        writeln!(out, "fidelity     {}", display_value(r.value))
            .and_then(|_| writeln!(out, "det_factor   {}", display_value(r.det_factor)))
            .and_then(|_| writeln!(out, "disp_factor  {}", display_value(r.disp_factor)))
            .and_then(|_| writeln!(out, "condition    {}", display_value(r.matrix_condition)))
    };
    written.map_err(|e| Failure {
        code: EXIT_WRITE,
        message: e.to_string(),
    })?;
    Ok(EXIT_OK)
}

fn cmd_validate(problem: &ProblemArgs, out: &mut dyn Write, err: &mut dyn Write) -> CmdResult {
    let cfg = problem.problem()?;
    let hint = cfg.channel.modes().or(cfg.state.as_ref().and_then(StateSpec::modes));
    let c = cfg.channel.build(hint)?;
    let report = validate(&c);
    let noise = if report.noise_condition {
        if report.g_degenerate {
            "ok (G is singular)"
        } else {
            "ok"
        }
    } else if !report.g_symmetric {
        "FAILED (G is not symmetric)"
    } else {
        "FAILED (G is not positive semidefinite)"
    };
    let cp = if report.cp_condition { "ok" } else { "violated" };
    let _ = writeln!(out, "modes            {}", c.modes());
    let _ = writeln!(out, "noise_condition  {noise}");
    let _ = writeln!(out, "g_min_eig        {}", display_value(report.g_min_eig));
    let _ = writeln!(out, "cp_condition     {cp}");
    let _ = writeln!(out, "cp_min_eig       {}", display_value(report.cp_min_eig));
    warn_cp(&c, err);
    Ok(if report.noise_condition {
        EXIT_OK
    } else {
        EXIT_INVALID_CHANNEL
    })
}

fn cmd_oracle(args: &OracleArgs, out: &mut dyn Write) -> CmdResult {
    let (c, s) = args.problem.channel_and_state()?;
    let analytic = channel_fidelity(&c, &s)?.value;
    let threads = worker_count(args.parallelism);
    match args.method {
        Method::Quad => {
            let default = QuadratureGrid::default_for(s.modes());
            let grid = QuadratureGrid::new(
                args.half_width.unwrap_or(default.half_width()),
                args.points.unwrap_or(default.points_per_axis()),
            )?;
            let q = with_pool(threads, || quad_fidelity(&c, &s, grid))??;
            let diff = (q - analytic).abs();
            let _ = writeln!(out, "method       quad (L={}, m={})", grid.half_width(), grid.points_per_axis());
            let _ = writeln!(out, "analytic     {}", display_value(analytic));
            let _ = writeln!(out, "oracle       {}", display_value(q));
            let _ = writeln!(out, "abs_diff     {diff:e}");
            let _ = writeln!(out, "tolerance    {:e}", args.tol);
            Ok(if diff <= args.tol { EXIT_OK } else { EXIT_ORACLE_MISMATCH })
        }
        Method::Mc => {
            let cfg = McConfig::new(args.samples, args.seed)?;
            let est = with_pool(threads, || mc_fidelity(&c, &s, cfg))??;
            let diff = (est.estimate - analytic).abs();
            let _ = writeln!(out, "method       mc (samples={}, seed={})", est.samples, args.seed);
            let _ = writeln!(out, "analytic     {}", display_value(analytic));
            let _ = writeln!(out, "oracle       {}", display_value(est.estimate));
            let _ = writeln!(out, "abs_diff     {diff:e}");
            let _ = writeln!(out, "std_error    {:e}", est.std_error);
            Ok(if diff <= 4.0 * est.std_error {
                EXIT_OK
            } else {
                EXIT_ORACLE_MISMATCH
            })
        }
    }
}

fn cmd_sweep(args: &SweepArgs, out: &mut dyn Write) -> CmdResult {
    let config: SweepConfig = read_json(&args.config)?;
    let plan = SweepPlan::new(config)?;
    let rows = with_pool(worker_count(args.parallelism), || plan.run())??;
    let mut buf = Vec::new();
    match args.format {
        Format::Csv => write_csv(&plan, &rows, &mut buf)?,
        Format::Json => write_json(&plan, &rows, &mut buf)?,
    }
    std::fs::write(&args.out, &buf).map_err(|e| Failure {
        code: EXIT_WRITE,
        message: format!("cannot write {}: {e}", args.out.display()),
    })?;
    let (lo, hi) = fidelity_range(&rows).expect("a sweep has at least one row");
    let _ = writeln!(
        out,
        "rows={} min_fidelity={} max_fidelity={}",
        rows.len(),
        display_value(lo),
        display_value(hi)
    );
    Ok(EXIT_OK)
}

/// Parses the comma-separated amplitude list used by `--alphas`.
pub fn parse_alphas(text: &str) -> Option<Vec<Complex<f64>>> {
    let flat = parse_list("alphas", text).ok()?;
    if flat.len() % 2 != 0 {
        return None;
    }
    Some(flat.chunks(2).map(|p| Complex::new(p[0], p[1])).collect())
}
