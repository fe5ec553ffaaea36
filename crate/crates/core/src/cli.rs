//! Command-line front end. `run` returns the process exit code.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::certify::{certify_equal, Status, Target as CertTarget};
use crate::decomp::{decompose_inhomogeneous, decompose_monomial};
use crate::deep::{compile_deep, scale_bits};
use crate::embed::embed_shallow;
use crate::exact::rational::{format_rational, parse_rational, to_f64};
use crate::exact::{MultiIndex, Polynomial, Rational};
use crate::lab::{run_analytic_experiment, run_sobolev_experiment, run_variation_experiment, DegreeConfig, ExperimentReport, LabError, VariationConfig};
use crate::network::Network;
use crate::points::random_ball;
use crate::shallow::compile_shallow;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NOT_RECOGNIZED: i32 = 3;
pub const EXIT_INTERNAL: i32 = 4;

const SCALE_WARN_BITS: f64 = 256.0;
const RANDOM_DENOMINATOR: i64 = 1000;

#[derive(Debug, Parser)]
#[command(name = "reluk", version, about = "Exact ReLU^k network compiler and certifier")]
pub struct Cli {
    #[arg(long, value_enum, global = true, default_value = "json")]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Shallow,
    Deep,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Experiment {
    Analytic,
    Sobolev,
    Variation,
}

#[derive(Debug, Args)]
pub struct Output {
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Power-sum table for a monomial.
    Decompose {
        /// Comma-separated exponents, e.g. 1,1.
        #[arg(long, value_delimiter = ',', required = true)]
        alpha: Vec<u32>,
        /// Pad to degree k with a constant slot.
        #[arg(long)]
        k: Option<u32>,
        #[command(flatten)]
        output: Output,
    },
    /// Polynomial JSON to network JSON.
    Compile {
        #[arg(long, value_enum)]
        mode: Mode,
        #[arg(long)]
        k: u32,
        #[arg(long = "L")]
        depth: Option<u32>,
        #[arg(long = "B", default_value = "1")]
        bound: String,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        prune: bool,
        #[command(flatten)]
        output: Output,
    },
    /// Shallow network JSON to a deep ReLU^k network JSON.
    Embed {
        #[arg(long)]
        k: u32,
        #[arg(long = "L")]
        depth: u32,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        prune: bool,
        #[command(flatten)]
        output: Output,
    },
    /// Prove a network equal to a polynomial or shallow network.
    Certify {
        #[arg(long)]
        net: PathBuf,
        #[arg(long)]
        target: PathBuf,
        #[command(flatten)]
        output: Output,
    },
    /// Exact evaluation at given or random ball points.
    Eval {
        #[arg(long)]
        net: PathBuf,
        /// JSON list of points, each a list of rational strings.
        #[arg(long, conflicts_with = "random", required_unless_present = "random")]
        points: Option<PathBuf>,
        #[arg(long)]
        random: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        output: Output,
    },
    /// Weight and output bounds against declared or given values.
    Bounds {
        #[arg(long)]
        net: PathBuf,
        #[arg(long = "B")]
        bound: Option<String>,
        #[arg(long = "M")]
        output_bound: Option<String>,
        #[command(flatten)]
        output: Output,
    },
    /// Approximation experiments.
    Experiment {
        #[arg(value_enum)]
        kind: Experiment,
        #[arg(long)]
        config: Option<PathBuf>,
        /// CSV error table; defaults to the report path with a .csv extension.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Whitespace-separated data file for plotting.
        #[arg(long)]
        data: Option<PathBuf>,
        #[command(flatten)]
        output: Output,
    },
}

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

fn usage(message: impl Into<String>) -> CliError {
    CliError { code: EXIT_USAGE, message: message.into() }
}

fn internal(message: impl Into<String>) -> CliError {
    CliError { code: EXIT_INTERNAL, message: message.into() }
}

impl From<LabError> for CliError {
    fn from(e: LabError) -> Self {
        match e {
            LabError::Config(_) | LabError::Compile(_) | LabError::Embed(_) => usage(e.to_string()),
            LabError::Evaluation(_) | LabError::Degenerate(_) => CliError { code: EXIT_FAILED, message: e.to_string() },
        }
    }
}

/// Parses `args` (program name first), runs the command and returns the exit
/// code. Diagnostics go to standard error.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| dispatch(&cli))) {
        Ok(Ok(code)) => code,
        Ok(Err(e)) => {
            eprintln!("error: {}", e.message);
            e.code
        }
        Err(_) => EXIT_INTERNAL,
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn read_network(path: &Path) -> Result<Network, CliError> {
    Network::from_json(&read(path)?).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn read_polynomial(path: &Path) -> Result<Polynomial, CliError> {
    Polynomial::from_json(&read(path)?).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn rational_arg(name: &str, s: &str) -> Result<Rational, CliError> {
    parse_rational(s).map_err(|e| usage(format!("--{name} {s}: {e}")))
}

/// Writes through a temporary file in the target directory and renames it
/// into place.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| usage(format!("{}: {e}", dir.display())))?;
    tmp.write_all(contents.as_bytes()).map_err(|e| internal(e.to_string()))?;
    tmp.persist(path).map_err(|e| internal(format!("{}: {}", path.display(), e.error)))?;
    Ok(())
}

fn emit(output: &Output, contents: &str) -> Result<(), CliError> {
    match &output.out {
        Some(path) => write_atomic(path, contents),
        None => stdout_line(contents),
    }
}

/// A reader that closes the pipe early is not an error.
fn stdout_line(contents: &str) -> Result<(), CliError> {
    let mut out = std::io::stdout().lock();
    match writeln!(out, "{contents}").and_then(|_| out.flush()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(internal(e.to_string())),
        _ => Ok(()),
    }
}

fn sidecar(path: &Path, ext: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}.{ext}"))
}

fn pretty(v: &serde_json::Value) -> String {
    serde_json::to_string_pretty(v).expect("value serializes")
}

fn bounds_json(net: &Network) -> serde_json::Value {
    let report = match net.declared_bounds() {
        Some(db) => net.check_bounds(&db.b, &db.m),
        None => net.check_bounds(&net.max_weight(), &net.output().max_abs()),
    };
    serde_json::to_value(report).expect("bounds serialize")
}

/// Writes a network and its bounds sidecar, or prints both.
fn emit_network(cli: &Cli, output: &Output, net: &Network) -> Result<(), CliError> {
    let bounds = bounds_json(net);
    match &output.out {
        Some(path) => {
            write_atomic(path, &net.to_json())?;
            write_atomic(&sidecar(path, "bounds.json"), &pretty(&bounds))?;
            if cli.format == Format::Text {
                let count = net.count_parameters();
                return stdout_line(&format!(
                    "wrote {} (depth {}, widths {:?}, {} nonzero parameters)",
                    path.display(),
                    net.layers().len(),
                    net.layers().iter().map(|l| l.width()).collect::<Vec<_>>(),
                    count.nonzero
                ));
            }
            Ok(())
        }
        None => {
            eprintln!("{}", pretty(&bounds));
            stdout_line(&net.to_json())
        }
    }
}

fn dispatch(cli: &Cli) -> Result<i32, CliError> {
    match &cli.command {
        Command::Decompose { alpha, k, output } => {
            let alpha = MultiIndex::new(alpha.clone());
            let table = match k {
                Some(k) => decompose_inhomogeneous(&alpha, *k),
                None => decompose_monomial(&alpha),
            }
            .map_err(|e| usage(e.to_string()))?;
            let doc = table.to_json();
            let text = match cli.format {
                Format::Json => serde_json::to_string_pretty(&doc).expect("table serializes"),
                Format::Text => {
                    let mut s = format!("alpha = {:?}, n = {}\n", doc.alpha, doc.n);
                    for e in &doc.entries {
                        s.push_str(&format!("{:?}\t{}\n", e.slopes, format_rational(&e.c)));
                    }
                    s.trim_end().to_string()
                }
            };
            emit(output, &text)?;
            Ok(EXIT_OK)
        }
        Command::Compile { mode, k, depth, bound, input, prune, output } => {
            let bound = rational_arg("B", bound)?;
            let p = read_polynomial(input)?;
            let net = match mode {
                Mode::Shallow => {
                    if depth.is_some_and(|l| l != 1) {
                        return Err(usage("--mode shallow takes no --L other than 1"));
                    }
                    Network::Shallow(compile_shallow(&p, *k, &bound).map_err(|e| usage(e.to_string()))?)
                }
                Mode::Deep => {
                    let depth = depth.ok_or_else(|| usage("--mode deep needs --L"))?;
                    let bits = scale_bits(&bound, *k, depth);
                    if bits > SCALE_WARN_BITS {
                        eprintln!("warning: hidden scale B^(k+...+k^L) has about {bits:.0} bits");
                    }
                    Network::Deep(compile_deep(&p, *k, depth, &bound).map_err(|e| usage(e.to_string()))?)
                }
            };
            let net = if *prune { net.prune() } else { net };
            emit_network(cli, output, &net)?;
            Ok(EXIT_OK)
        }
        Command::Embed { k, depth, input, prune, output } => {
            let Network::Shallow(f) = read_network(input)? else {
                return Err(usage(format!("{}: expected a shallow network", input.display())));
            };
            let net = Network::Deep(embed_shallow(&f, *k, *depth).map_err(|e| usage(e.to_string()))?);
            let net = if *prune { net.prune() } else { net };
            emit_network(cli, output, &net)?;
            Ok(EXIT_OK)
        }
        Command::Certify { net, target, output } => {
            let network = read_network(net)?;
            let text = read(target)?;
            let report = match Polynomial::from_json(&text) {
                Ok(p) => certify_equal(&network, &CertTarget::Polynomial(&p)),
                Err(poly_err) => match Network::from_json(&text) {
                    Ok(Network::Shallow(s)) => certify_equal(&network, &CertTarget::Shallow(&s)),
                    Ok(Network::Deep(_)) => return Err(usage(format!("{}: target must be a polynomial or a shallow network", target.display()))),
                    Err(net_err) => {
                        return Err(usage(format!(
                            "{}: neither a polynomial ({poly_err}) nor a network ({net_err})",
                            target.display()
                        )))
                    }
                },
            };
            let text = match cli.format {
                Format::Json => pretty(&report.to_json()),
                Format::Text => {
                    let mut s = format!("status: {}\n", serde_json::to_value(report.status).expect("status").as_str().unwrap_or(""));
                    for line in &report.checked_structure {
                        s.push_str(&format!("  {line}\n"));
                    }
                    s.trim_end().to_string()
                }
            };
            emit(output, &text)?;
            Ok(match report.status {
                Status::Proven => EXIT_OK,
                Status::Refuted => EXIT_FAILED,
                Status::NotRecognized => EXIT_NOT_RECOGNIZED,
            })
        }
        Command::Eval { net, points, random, seed, output } => {
            let network = read_network(net)?;
            let d = network.input_dim();
            let pts: Vec<Vec<Rational>> = match (points, random) {
                (Some(path), _) => {
                    let raw: Vec<Vec<String>> = serde_json::from_str(&read(path)?).map_err(|e| usage(format!("{}: {e}", path.display())))?;
                    raw.iter()
                        .enumerate()
                        .map(|(i, p)| {
                            if p.len() != d {
                                return Err(usage(format!("points[{i}] has {} coordinates, the network takes {d}", p.len())));
                            }
                            p.iter()
                                .enumerate()
                                .map(|(j, s)| parse_rational(s).map_err(|e| usage(format!("points[{i}][{j}]: {e}"))))
                                .collect()
                        })
                        .collect::<Result<_, _>>()?
                }
                (None, Some(n)) => random_ball(d, *n, RANDOM_DENOMINATOR, *seed),
                (None, None) => return Err(usage("give --points or --random")),
            };
            let mut rows = Vec::with_capacity(pts.len());
            for p in &pts {
                let v = network.eval_exact(p).map_err(|e| internal(e.to_string()))?;
                rows.push((p, v));
            }
            let text = match cli.format {
                Format::Json => pretty(&serde_json::Value::Array(
                    rows.iter()
                        .map(|(p, v)| {
                            json!({
                                "x": p.iter().map(format_rational).collect::<Vec<_>>(),
                                "value": format_rational(v),
                                "approx": to_f64(v),
                            })
                        })
                        .collect(),
                )),
                Format::Text => rows
                    .iter()
                    .map(|(p, v)| format!("{}\t{}", p.iter().map(format_rational).collect::<Vec<_>>().join(" "), format_rational(v)))
                    .collect::<Vec<_>>()
                    .join("\n"),
            };
            emit(output, &text)?;
            Ok(EXIT_OK)
        }
        Command::Bounds { net, bound, output_bound, output } => {
            let network = read_network(net)?;
            let declared = network.declared_bounds().cloned();
            let b = match bound {
                Some(s) => rational_arg("B", s)?,
                None => declared.as_ref().map(|d| d.b.clone()).ok_or_else(|| usage("the network declares no bounds; give --B"))?,
            };
            let m = match output_bound {
                Some(s) => rational_arg("M", s)?,
                None => declared.as_ref().map(|d| d.m.clone()).ok_or_else(|| usage("the network declares no bounds; give --M"))?,
            };
            let report = network.check_bounds(&b, &m);
            let text = match cli.format {
                Format::Json => pretty(&serde_json::to_value(&report).expect("bounds serialize")),
                Format::Text => format!(
                    "max weight {} (B = {}), max output {} (M = {}): {}",
                    format_rational(&report.max_weight),
                    format_rational(&b),
                    format_rational(&report.max_output),
                    format_rational(&m),
                    if report.pass { "pass" } else { "fail" }
                ),
            };
            emit(output, &text)?;
            Ok(if report.pass { EXIT_OK } else { EXIT_FAILED })
        }
        Command::Experiment { kind, config, csv, data, output } => {
            let text = match config {
                Some(path) => read(path)?,
                None => "{}".to_string(),
            };
            let report: ExperimentReport = match kind {
                Experiment::Analytic => run_analytic_experiment(&DegreeConfig::from_json(&text, DegreeConfig::analytic_default())?)?,
                Experiment::Sobolev => run_sobolev_experiment(&DegreeConfig::from_json(&text, DegreeConfig::sobolev_default())?)?,
                Experiment::Variation => run_variation_experiment(&VariationConfig::from_json(&text)?)?,
            };
            let body = match cli.format {
                Format::Json => report.to_json(),
                Format::Text => {
                    let mut s = format!("{} experiment: {}\n", report.experiment, if report.pass { "pass" } else { "fail" });
                    s.push_str(&report.to_csv());
                    if let Some(fit) = &report.fit {
                        s.push_str(&format!("fit ({}): estimate {:.4}, r^2 {:.4}\n", fit.model, fit.estimate, fit.r_squared));
                    }
                    s.trim_end().to_string()
                }
            };
            let csv_path = csv.clone().or_else(|| output.out.as_ref().map(|p| p.with_extension("csv")));
            emit(output, &body)?;
            if let Some(path) = csv_path {
                write_atomic(&path, &report.to_csv())?;
            }
            if let Some(path) = data {
                write_atomic(path, &report.to_data_file())?;
            }
            Ok(if report.pass { EXIT_OK } else { EXIT_FAILED })
        }
    }
}
