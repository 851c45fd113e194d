use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use cvpk_core::{
    gpb, kernels, oracle, pb, scaling, Error, Family, Interpolation, Kernel, OracleOptions, Pb, ScalingConfig,
};
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

#[derive(Parser)]
#[command(name = "cvpk", version, about = "Polarization behaviour of convolutional polar kernels")]
struct Cli {
    /// Worker threads (defaults to all cores)
    #[arg(long, global = true, env = "CVPK_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Kernel matrices
    #[command(subcommand)]
    Kernel(KernelCmd),
    /// Generalized polarization behaviour of Q(n) by recursion
    Gpb {
        #[arg(long)]
        size: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Recompute by exhaustive enumeration and compare
        #[arg(long)]
        verify_oracle: bool,
    },
    /// Polarization behaviour
    Pb {
        #[command(flatten)]
        kernel: KernelArgs,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = DataFormat::Json)]
        format: DataFormat,
    },
    /// Partial distances and polarization rate
    Profile {
        #[command(flatten)]
        kernel: KernelArgs,
        #[arg(long, value_enum, default_value_t = ProfileFormat::Txt)]
        format: ProfileFormat,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// BEC scaling exponent
    Mu {
        #[command(flatten)]
        kernel: KernelArgs,
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Rate and exponent summary tables
    #[command(subcommand)]
    Report(ReportCmd),
    /// Exhaustive enumeration over all erasure configurations
    Oracle {
        #[arg(value_enum)]
        what: OracleWhat,
        #[arg(long, default_value = "cvpk")]
        family: Family,
        #[arg(long)]
        size: usize,
        /// Allow sizes above the default guard
        #[arg(long)]
        force: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum KernelCmd {
    Print {
        #[command(flatten)]
        kernel: KernelArgs,
        #[arg(long, value_enum, default_value_t = KernelFormat::Txt)]
        format: KernelFormat,
    },
}

#[derive(Subcommand)]
enum ReportCmd {
    /// Polarization rate and scaling exponent per kernel
    Table3 {
        #[arg(long, default_value_t = 32)]
        max_size: usize,
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long, value_enum, default_value_t = ReportFormat::Txt)]
        format: ReportFormat,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Clone)]
struct KernelArgs {
    #[arg(long)]
    family: Family,
    #[arg(long)]
    size: usize,
}

#[derive(Args, Clone, Copy)]
struct SolverArgs {
    #[arg(long, default_value_t = 4096)]
    grid: usize,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    #[arg(long, default_value_t = 10_000)]
    max_iters: usize,
    #[arg(long, default_value = "cubic")]
    interpolation: Interpolation,
}

impl SolverArgs {
    fn config(self) -> ScalingConfig {
        ScalingConfig {
            grid_size: self.grid,
            max_iters: self.max_iters,
            tol: self.tol,
            interpolation: self.interpolation,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum KernelFormat {
    Txt,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum DataFormat {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum ProfileFormat {
    Txt,
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum ReportFormat {
    Txt,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum OracleWhat {
    Gpb,
    Pb,
}

/// Failure carrying the process exit code.
#[derive(Debug)]
struct Exit {
    code: u8,
    error: anyhow::Error,
}

impl From<anyhow::Error> for Exit {
    fn from(error: anyhow::Error) -> Self {
        let code = match error.downcast_ref::<Error>() {
            Some(Error::InvalidInput(_) | Error::DimensionMismatch { .. }) => 2,
            Some(Error::GuardExceeded { .. }) => 3,
            _ => 1,
        };
        Exit { code, error }
    }
}

impl From<Error> for Exit {
    fn from(e: Error) -> Self {
        anyhow::Error::from(e).into()
    }
}

fn mismatch(msg: String) -> Exit {
    Exit { code: 4, error: anyhow!(msg) }
}

/// Provenance block embedded in every JSON artifact. The digest covers the
/// payload only, so identical inputs give identical files.
fn manifest(command: &str, params: Value, payload: &Value) -> Value {
    let digest = Sha256::digest(serde_json::to_vec(payload).expect("serializable payload"));
    json!({
        "command": command,
        "params": params,
        "version": env!("CARGO_PKG_VERSION"),
        "digest": format!("sha256:{}", hex::encode(digest)),
    })
}

fn with_manifest(command: &str, params: Value, payload: Value) -> Value {
    let m = manifest(command, params, &payload);
    let mut obj = match payload {
        Value::Object(map) => map,
        other => Map::from_iter([("result".to_string(), other)]),
    };
    obj.insert("manifest".into(), m);
    Value::Object(obj)
}

fn emit(text: &str, out: Option<&Path>) -> anyhow::Result<()> {
    match out {
        Some(path) => std::fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn emit_json(command: &str, params: Value, payload: Value, out: Option<&Path>) -> anyhow::Result<()> {
    let doc = with_manifest(command, params, payload);
    emit(&(serde_json::to_string_pretty(&doc)? + "\n"), out)
}

/// Plain-text data; a sidecar `FILE.manifest.json` when written to a file.
fn emit_plain(command: &str, params: Value, text: &str, out: Option<&Path>) -> anyhow::Result<()> {
    emit(text, out)?;
    if let Some(path) = out {
        let m = manifest(command, params, &Value::String(text.to_string()));
        let mut side = path.as_os_str().to_owned();
        side.push(".manifest.json");
        std::fs::write(&side, serde_json::to_string_pretty(&m)? + "\n")?;
    }
    Ok(())
}

fn compute_pb(family: Family, size: usize) -> Result<Pb, Exit> {
    let m = kernels::log2_exact(size)?;
    if matches!(family, Family::Cvpk | Family::CvpkSwapped) && m >= 8 {
        eprintln!("computing GPB recursion for n = {size}");
        let step = (size / 16).max(1);
        let progress = |phi: usize| {
            if (phi + 1) % step == 0 {
                eprintln!("  phase {} of {}", phi + 1, size - 2);
            }
        };
        return Ok(pb::pb_cvpk_with_progress(m, family == Family::CvpkSwapped, progress)?);
    }
    Ok(pb::compute(family, size, &OracleOptions::default())?)
}

fn run(cli: Cli) -> Result<(), Exit> {
    match cli.command {
        Command::Kernel(KernelCmd::Print { kernel, format }) => {
            let k = Kernel::build(kernel.family, kernel.size)?;
            let text = match format {
                KernelFormat::Txt => k.to_text(),
                KernelFormat::Json => k.to_json() + "\n",
            };
            emit(&text, None)?;
        }
        Command::Gpb { size, out, verify_oracle } => {
            let m = kernels::log2_exact(size)?;
            let opts = OracleOptions::default();
            if verify_oracle {
                opts.check(size)?;
            }
            let g = gpb::gpb(m)?;
            if verify_oracle {
                let truth = oracle::gpb_oracle(&kernels::cvpk(size)?, &opts)?;
                if truth.phases() != g.phases() {
                    return Err(mismatch(format!("recursion and enumeration disagree at n = {size}")));
                }
                eprintln!("verified against enumeration of {} configurations", 1u64 << size);
            }
            emit_json("gpb", json!({ "size": size }), serde_json::to_value(&g).map_err(anyhow::Error::from)?, out.as_deref())?;
        }
        Command::Pb { kernel, out, format } => {
            let p = compute_pb(kernel.family, kernel.size)?;
            let params = json!({ "family": kernel.family.as_str(), "size": kernel.size });
            match format {
                DataFormat::Json => {
                    let payload = serde_json::to_value(&p).map_err(anyhow::Error::from)?;
                    emit_json("pb", params, payload, out.as_deref())?
                }
                DataFormat::Csv => emit_plain("pb", params, &p.to_csv(), out.as_deref())?,
            }
        }
        Command::Profile { kernel, format, out } => {
            let prof = pb::partial_distances(&compute_pb(kernel.family, kernel.size)?)?;
            let params = json!({ "family": kernel.family.as_str(), "size": kernel.size });
            match format {
                ProfileFormat::Txt => emit_plain("profile", params, &(prof.summary() + "\n"), out.as_deref())?,
                ProfileFormat::Csv => emit_plain("profile", params, &prof.to_csv(), out.as_deref())?,
                ProfileFormat::Json => {
                    let payload = json!({
                        "n": kernel.size,
                        "family": kernel.family.as_str(),
                        "d": prof.d,
                        "E": format!("{:.5}", prof.rate),
                        "swap_precondition": pb::check_swap_precondition(&prof),
                    });
                    emit_json("profile", params, payload, out.as_deref())?
                }
            }
        }
        Command::Mu { kernel, solver, out } => {
            let p = compute_pb(kernel.family, kernel.size)?;
            let cfg = solver.config();
            let r = scaling::scaling_exponent(&p, &cfg)?;
            if !r.converged {
                eprintln!("warning: no convergence after {} iterations", r.iters_used);
            }
            if (r.lambda - r.lambda_rayleigh).abs() > 1e3 * cfg.tol {
                eprintln!("warning: Rayleigh estimate {} differs from {}", r.lambda_rayleigh, r.lambda);
            }
            let params = json!({
                "family": kernel.family.as_str(),
                "size": kernel.size,
                "grid": cfg.grid_size,
                "tol": cfg.tol,
                "max_iters": cfg.max_iters,
                "interpolation": cfg.interpolation,
            });
            emit_json("mu", params, r.to_json(&p, &cfg), out.as_deref())?;
        }
        Command::Report(ReportCmd::Table3 { max_size, solver, format, out }) => {
            let rows = table3(max_size, &solver.config())?;
            let params = json!({ "max_size": max_size, "grid": solver.grid, "tol": solver.tol });
            match format {
                ReportFormat::Txt => {
                    let mut text = format!("{:<14}{:>6}{:>10}{:>8}\n", "kernel", "n", "E", "mu");
                    for r in &rows {
                        text += &format!("{:<14}{:>6}{:>10.5}{:>8.3}\n", r.family.as_str(), r.n, r.rate, r.mu);
                    }
                    emit_plain("report table3", params, &text, out.as_deref())?
                }
                ReportFormat::Json => {
                    let payload: Vec<Value> = rows
                        .iter()
                        .map(|r| {
                            json!({
                                "family": r.family.as_str(),
                                "n": r.n,
                                "E": format!("{:.5}", r.rate),
                                "mu": format!("{:.3}", r.mu),
                            })
                        })
                        .collect();
                    emit_json("report table3", params, json!({ "rows": payload }), out.as_deref())?
                }
            }
        }
        Command::Oracle { what, family, size, force, out } => {
            let opts = if force { OracleOptions::forced() } else { OracleOptions::default() };
            opts.check(size)?;
            let k = Kernel::build(family, size)?;
            let params = json!({ "family": family.as_str(), "size": size, "force": force });
            let payload = match what {
                OracleWhat::Gpb => serde_json::to_value(oracle::gpb_oracle(&k, &opts)?),
                OracleWhat::Pb => serde_json::to_value(oracle::pb_oracle(&k, &opts)?),
            }
            .map_err(anyhow::Error::from)?;
            let name = match what {
                OracleWhat::Gpb => "oracle gpb",
                OracleWhat::Pb => "oracle pb",
            };
            emit_json(name, params, payload, out.as_deref())?;
        }
    }
    Ok(())
}

struct Row {
    family: Family,
    n: usize,
    rate: f64,
    mu: f64,
}

fn table3(max_size: usize, cfg: &ScalingConfig) -> Result<Vec<Row>, Exit> {
    kernels::log2_exact(max_size)?;
    if max_size < 4 {
        return Err(Error::InvalidInput("max size must be at least 4".into()).into());
    }
    let mut rows = Vec::new();
    let mut push = |p: &Pb| -> Result<(), Exit> {
        let prof = pb::partial_distances(p)?;
        let r = scaling::scaling_exponent(p, cfg)?;
        eprintln!("{} n = {}: E = {:.5}, mu = {:.3}", p.family(), p.n(), prof.rate, r.mu);
        rows.push(Row { family: p.family(), n: p.n(), rate: prof.rate, mu: r.mu });
        Ok(())
    };
    let mut m = 2;
    while (1usize << m) <= max_size {
        let n = 1usize << m;
        let (plain, swapped) = pb::pb_cvpk_pair(m)?;
        push(&plain)?;
        if n >= 16 {
            push(&swapped)?;
        }
        if n == 16 {
            push(&oracle::pb_oracle(&kernels::sorted_cvpk(16)?, &OracleOptions::default())?)?;
        }
        m += 1;
    }
    Ok(rows)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let started = Instant::now();
    match run(cli) {
        Ok(()) => {
            eprintln!("done in {:.3} s", started.elapsed().as_secs_f64());
            ExitCode::SUCCESS
        }
        Err(Exit { code, error }) => {
            eprintln!("error: {error:#}");
            ExitCode::from(code)
        }
    }
}
