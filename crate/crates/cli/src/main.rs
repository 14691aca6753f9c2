//! `cloe` — generate test models, reduce them (or tabulated data) to
//! rational interpolants with adaptive frequency selection, evaluate
//! responses to Bode-data CSV, and run comparison sweeps.
//!
//! Exit codes: 0 success (including a grid-exhausted run that still wrote
//! results), 1 usage error, 2 computation failure. Every run prints an
//! effective-config line with all defaults expanded, so it can be
//! reproduced from the log alone.

use std::error::Error;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use cloe_core::bench;
use cloe_core::cloe::{run_cloe, CloeConfig, ModelOracle, TabulatedOracle, Termination};
use cloe_core::io::{read_model, read_samples, write_interpolant, write_model};
use cloe_core::lti::{
    generate_modal_model, log_grid, spectral_norm, FrequencySample, LtiError, ModalParams,
    StateSpaceModel,
};

#[derive(Parser)]
#[command(
    name = "cloe",
    version,
    about = "Loewner-based model reduction with adaptive frequency sampling"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a seeded resonant test model and write it as JSON.
    Generate(GenerateArgs),
    /// Build a rational interpolant from a model or tabulated samples.
    Reduce(ReduceArgs),
    /// Evaluate a model or interpolant over a grid into a Bode-data CSV.
    Eval(EvalArgs),
    /// Compare adaptive against coarse sampling over a directory of models.
    Sweep(SweepArgs),
}

#[derive(Args)]
struct GenerateArgs {
    /// RNG seed; identical seeds reproduce the file bit-for-bit.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Number of second-order resonant modes (model order is twice this).
    #[arg(long)]
    modes: usize,
    /// Resonant-frequency range, rad/s (log-uniform draw).
    #[arg(long, default_value_t = 1e-2)]
    fmin: f64,
    #[arg(long, default_value_t = 1e2)]
    fmax: f64,
    /// Damping-ratio range (uniform draw inside (0, 1)).
    #[arg(long, default_value_t = 0.02)]
    zeta_min: f64,
    #[arg(long, default_value_t = 0.2)]
    zeta_max: f64,
    /// Gain range for the input/output maps.
    #[arg(long, default_value_t = -1.0)]
    gain_min: f64,
    #[arg(long, default_value_t = 1.0)]
    gain_max: f64,
    /// Output count (rows of the response).
    #[arg(long, default_value_t = 1)]
    outputs: usize,
    /// Input count (columns of the response).
    #[arg(long, default_value_t = 1)]
    inputs: usize,
    /// Destination model file.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
#[group(id = "reduce_source", required = true, multiple = false)]
struct ReduceSource {
    /// State-space model JSON to reduce (evaluated on demand).
    #[arg(long)]
    model: Option<PathBuf>,
    /// Tabulated samples CSV to reduce (candidates snap to stored rows).
    #[arg(long)]
    samples: Option<PathBuf>,
}

#[derive(Args)]
struct ReduceArgs {
    #[command(flatten)]
    source: ReduceSource,
    /// Band of interest [wmin, wmax], rad/s.
    #[arg(long, default_value_t = 1e-3)]
    wmin: f64,
    #[arg(long, default_value_t = 1e3)]
    wmax: f64,
    /// Search-grid size.
    #[arg(long, default_value_t = 400)]
    nf: usize,
    /// Stopping tolerance, percent.
    #[arg(long, default_value_t = 5.0)]
    eps: f64,
    /// Evaluation budget (distinct oracle frequencies).
    #[arg(long, default_value_t = 40)]
    max_points: usize,
    /// New interpolation points per iteration (1 or 2).
    #[arg(long, default_value_t = 2)]
    ppi: usize,
    /// Guard cells around used frequencies during candidate detection.
    #[arg(long, default_value_t = 2)]
    guard: usize,
    /// Relative singular-value threshold for the realization rank.
    #[arg(long, default_value_t = 1e-10)]
    rank_tol: f64,
    /// Destination interpolant file.
    #[arg(long, default_value = "interpolant.json")]
    out: PathBuf,
    /// Destination trace file.
    #[arg(long, default_value = "trace.json")]
    trace: PathBuf,
}

#[derive(Args)]
#[group(id = "eval_source", required = true, multiple = false)]
struct EvalSource {
    /// State-space model JSON to evaluate.
    #[arg(long)]
    model: Option<PathBuf>,
    /// Interpolant JSON to evaluate (same descriptor file format).
    #[arg(long)]
    interpolant: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    #[command(flatten)]
    source: EvalSource,
    #[arg(long, default_value_t = 1e-3)]
    wmin: f64,
    #[arg(long, default_value_t = 1e3)]
    wmax: f64,
    /// Grid size (logarithmically spaced).
    #[arg(long, default_value_t = 200)]
    points: usize,
    /// Destination CSV.
    #[arg(long, default_value = "bode.csv")]
    out: PathBuf,
}

#[derive(Args)]
struct SweepArgs {
    /// Directory of model JSON files (every *.json is swept).
    #[arg(long)]
    models: PathBuf,
    /// Search-grid sizes, comma separated.
    #[arg(long, value_delimiter = ',', default_values_t = [200, 300, 400, 500])]
    nf: Vec<usize>,
    /// Stopping tolerances in percent, comma separated.
    #[arg(long, value_delimiter = ',', default_values_t = [1.0, 5.0, 10.0, 30.0])]
    eps: Vec<f64>,
    #[arg(long, default_value_t = 1e-3)]
    wmin: f64,
    #[arg(long, default_value_t = 1e3)]
    wmax: f64,
    #[arg(long, default_value_t = 40)]
    max_points: usize,
    /// Destination CSV.
    #[arg(long, default_value = "sweep.csv")]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprint!("{e}");
            return ExitCode::from(1);
        }
    };
    let result = match cli.command {
        Command::Generate(args) => cmd_generate(args),
        Command::Reduce(args) => cmd_reduce(args),
        Command::Eval(args) => cmd_eval(args),
        Command::Sweep(args) => cmd_sweep(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

type CmdResult = Result<(), Box<dyn Error>>;

fn cmd_generate(args: GenerateArgs) -> CmdResult {
    println!(
        "config: generate --seed {} --modes {} --fmin {} --fmax {} --zeta-min {} --zeta-max {} \
         --gain-min {} --gain-max {} --outputs {} --inputs {} --out {}",
        args.seed,
        args.modes,
        args.fmin,
        args.fmax,
        args.zeta_min,
        args.zeta_max,
        args.gain_min,
        args.gain_max,
        args.outputs,
        args.inputs,
        args.out.display()
    );
    let model = generate_modal_model(&ModalParams {
        seed: args.seed,
        n_modes: args.modes,
        freq_range: (args.fmin, args.fmax),
        damping_range: (args.zeta_min, args.zeta_max),
        gain_range: (args.gain_min, args.gain_max),
        outputs: args.outputs,
        inputs: args.inputs,
    })?;
    write_model(&args.out, &model)?;
    let mut poles = String::new();
    for s in model.poles() {
        let _ = write!(poles, " {:.4}{:+.4}j", s.re, s.im);
    }
    println!(
        "wrote {}: order {}, {} outputs, {} inputs; poles:{}",
        args.out.display(),
        model.order(),
        model.outputs(),
        model.inputs(),
        poles
    );
    Ok(())
}

fn cmd_reduce(args: ReduceArgs) -> CmdResult {
    let source = match (&args.source.model, &args.source.samples) {
        (Some(p), None) => format!("--model {}", p.display()),
        (None, Some(p)) => format!("--samples {}", p.display()),
        _ => unreachable!("clap enforces exactly one source"),
    };
    println!(
        "config: reduce {source} --wmin {} --wmax {} --nf {} --eps {} --max-points {} --ppi {} \
         --guard {} --rank-tol {:e} --out {} --trace {}",
        args.wmin,
        args.wmax,
        args.nf,
        args.eps,
        args.max_points,
        args.ppi,
        args.guard,
        args.rank_tol,
        args.out.display(),
        args.trace.display()
    );
    let config = CloeConfig {
        omega_min: args.wmin,
        omega_max: args.wmax,
        max_points: args.max_points,
        epsilon: args.eps / 100.0,
        n_f: args.nf,
        points_per_iteration: args.ppi,
        guard_cells: args.guard,
        rank_tol: args.rank_tol,
    };
    let (h, trace) = match (&args.source.model, &args.source.samples) {
        (Some(path), None) => {
            let mut oracle = ModelOracle::new(read_model(path)?);
            run_cloe(&mut oracle, &config)?
        }
        (None, Some(path)) => {
            let samples = read_samples(path)?;
            for (idx, s) in samples.iter().enumerate() {
                if s.omega < args.wmin || s.omega > args.wmax {
                    return Err(format!(
                        "{}: sample row {} (omega {}) lies outside the band [{}, {}]",
                        path.display(),
                        idx + 1,
                        s.omega,
                        args.wmin,
                        args.wmax
                    )
                    .into());
                }
            }
            let mut oracle = TabulatedOracle::new(samples)?;
            run_cloe(&mut oracle, &config)?
        }
        _ => unreachable!(),
    };
    write_interpolant(&args.out, &h)?;
    std::fs::write(&args.trace, trace.to_json())
        .map_err(|e| format!("failed to write {}: {e}", args.trace.display()))?;
    let last = trace.iterations.last().expect("trace has iterations");
    let e_tilde = match last.e_tilde {
        Some(e) => format!("{e:.3e}"),
        None => "n/a".to_string(),
    };
    if trace.termination == Termination::GridExhausted {
        eprintln!("warning: search grid exhausted before convergence; partial results written");
    }
    println!(
        "terminated: {} | order {} | points used {} | final e~ {} | wrote {} and {}",
        trace.termination,
        h.order,
        last.oracle_calls,
        e_tilde,
        args.out.display(),
        args.trace.display()
    );
    Ok(())
}

fn cmd_eval(args: EvalArgs) -> CmdResult {
    let (flag, path) = match (&args.source.model, &args.source.interpolant) {
        (Some(p), None) => ("--model", p),
        (None, Some(p)) => ("--interpolant", p),
        _ => unreachable!("clap enforces exactly one source"),
    };
    println!(
        "config: eval {flag} {} --wmin {} --wmax {} --points {} --out {}",
        path.display(),
        args.wmin,
        args.wmax,
        args.points,
        args.out.display()
    );
    let model = read_model(path)?;
    let grid = log_grid(args.wmin, args.wmax, args.points)?;
    let mut samples: Vec<FrequencySample> = Vec::with_capacity(grid.len());
    for &omega in grid.points() {
        match model.response(omega) {
            Ok(response) => samples.push(FrequencySample { omega, response }),
            Err(LtiError::SingularPencil { omega }) => {
                eprintln!("warning: skipping omega {omega}: pencil is singular there");
            }
            Err(e) => return Err(e.into()),
        }
    }
    write_bode_csv(&args.out, &samples)?;
    println!("wrote {} ({} rows)", args.out.display(), samples.len());
    Ok(())
}

/// Bode-data CSV: the sample layout of the core CSV format plus a trailing
/// `norm` column with the response's spectral norm (readers of the sample
/// format ignore trailing columns).
fn write_bode_csv(path: &Path, samples: &[FrequencySample]) -> CmdResult {
    if samples.is_empty() {
        return Err("no evaluable frequencies; nothing to write".into());
    }
    let (m, p) = (samples[0].response.nrows(), samples[0].response.ncols());
    let mut out = String::from("omega");
    for i in 1..=m {
        for j in 1..=p {
            let _ = write!(out, ",re_{i}_{j},im_{i}_{j}");
        }
    }
    out.push_str(",norm\n");
    for s in samples {
        let _ = write!(out, "{:.17e}", s.omega);
        for i in 0..m {
            for j in 0..p {
                let z = s.response[(i, j)];
                let _ = write!(out, ",{:.17e},{:.17e}", z.re, z.im);
            }
        }
        let _ = writeln!(out, ",{:.17e}", spectral_norm(&s.response));
    }
    std::fs::write(path, out).map_err(|e| format!("failed to write {}: {e}", path.display()))?;
    Ok(())
}

fn cmd_sweep(args: SweepArgs) -> CmdResult {
    println!(
        "config: sweep --models {} --nf {} --eps {} --wmin {} --wmax {} --max-points {} --out {}",
        args.models.display(),
        args.nf
            .iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join(","),
        args.eps
            .iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join(","),
        args.wmin,
        args.wmax,
        args.max_points,
        args.out.display()
    );
    let mut paths: Vec<PathBuf> = std::fs::read_dir(&args.models)
        .map_err(|e| {
            format!(
                "cannot read models directory {}: {e}",
                args.models.display()
            )
        })?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|ext| ext == "json"))
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(format!(
            "no model files (*.json) in {}; nothing to sweep",
            args.models.display()
        )
        .into());
    }
    let mut models: Vec<(String, StateSpaceModel)> = Vec::with_capacity(paths.len());
    for path in &paths {
        let id = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| path.display().to_string());
        models.push((id, read_model(path)?));
    }
    let config = CloeConfig {
        omega_min: args.wmin,
        omega_max: args.wmax,
        max_points: args.max_points,
        ..CloeConfig::default()
    };
    let epsilons: Vec<f64> = args.eps.iter().map(|e| e / 100.0).collect();
    bench::sweep(&models, &args.nf, &epsilons, &config, &args.out)?;
    println!("wrote {}", args.out.display());
    Ok(())
}
