use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use bondsim_core::filippov::{decay_envelope, Verdict};
use bondsim_core::series::{write_table, Table};
use bondsim_core::{
    builtin, cs_check, km_check, parse_scenario, simulate, solve_filippov, validate_scenario,
    write_series, Error, F2Params, InitialState, Scenario, SeriesFormat,
};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

const EXIT_USAGE: u8 = 1;
const EXIT_CHECK_FAILED: u8 = 2;
const EXIT_RUNTIME: u8 = 3;

#[derive(Parser)]
#[command(
    name = "bondsim",
    version,
    about = "Bonded Kuramoto and Cucker-Smale simulations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

impl From<Format> for SeriesFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Csv => SeriesFormat::Csv,
            Format::Json => SeriesFormat::Json,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Coupling {
    #[value(name = "kappa0", alias = "κ0", alias = "k0")]
    Kappa0,
    #[value(name = "kappa1", alias = "κ1", alias = "k1")]
    Kappa1,
    #[value(name = "kappa2", alias = "κ2", alias = "k2")]
    Kappa2,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate a scenario and write its time series.
    Simulate {
        /// Scenario file, or `builtin:NAME`.
        #[arg(long)]
        scenario: String,
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long = "t-end")]
        t_end: Option<f64>,
        #[arg(long)]
        stride: Option<usize>,
        /// Output file; standard output when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// Evaluate the a-priori framework conditions on the initial data.
    Check {
        #[arg(long)]
        scenario: String,
    },
    /// Solve the two-particle system on a line exactly.
    #[command(allow_negative_numbers = true)]
    Filippov2 {
        #[arg(long)]
        x0: f64,
        #[arg(long)]
        v0: f64,
        #[arg(long)]
        k0: f64,
        #[arg(long)]
        k1: f64,
        #[arg(long)]
        k2: f64,
        #[arg(long)]
        dinf: f64,
        #[arg(long = "t-max")]
        t_max: f64,
        /// CSV of sampled (t, x, v, E).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 1001)]
        samples: usize,
    },
    /// Run one simulation per coupling value.
    #[command(allow_negative_numbers = true)]
    Sweep {
        #[arg(long)]
        scenario: String,
        #[arg(long, value_enum)]
        param: Coupling,
        #[arg(long, value_delimiter = ',', required = true, num_args = 1..)]
        values: Vec<f64>,
        #[arg(long = "out-dir")]
        out_dir: PathBuf,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
}

/// A failure and the exit code it maps to.
struct Failure {
    code: u8,
    name: &'static str,
    message: String,
}

impl Failure {
    fn usage(e: Error) -> Self {
        Failure {
            code: EXIT_USAGE,
            name: e.name(),
            message: e.to_string(),
        }
    }

    fn runtime(e: Error) -> Self {
        Failure {
            code: EXIT_RUNTIME,
            name: e.name(),
            message: e.to_string(),
        }
    }

    fn io(path: &Path, e: io::Error) -> Self {
        Failure {
            code: EXIT_RUNTIME,
            name: "SinkError",
            message: format!("SinkError: {}: {e}", path.display()),
        }
    }
}

/// Prints a line to standard output, ignoring a closed pipe.
fn say(line: &str) {
    let _ = writeln!(io::stdout().lock(), "{line}");
}

fn load(source: &str) -> Result<Scenario, Failure> {
    if let Some(name) = source.strip_prefix("builtin:") {
        return builtin(name).map_err(Failure::usage);
    }
    let text = std::fs::read_to_string(source).map_err(|e| Failure {
        code: EXIT_USAGE,
        name: "ParseError",
        message: format!("ParseError: cannot read {source}: {e}"),
    })?;
    parse_scenario(&text).map_err(Failure::usage)
}

fn sink(out: Option<&Path>) -> Result<Box<dyn Write>, Failure> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| Failure::io(p, e))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

/// Runs one scenario into `out`; the partial trajectory is still written on
/// a runtime failure.
fn run_one(s: &Scenario, format: SeriesFormat, out: Option<&Path>) -> Result<(), Failure> {
    let (traj, err) = match simulate(s) {
        Ok(t) => (Some(t), None),
        Err(e) => (e.partial, Some(e.error)),
    };
    if let Some(t) = traj.filter(|t| !t.is_empty()) {
        let mut w = sink(out)?;
        write_series(&t, format, &mut w).map_err(Failure::runtime)?;
        w.flush()
            .map_err(|e| Failure::runtime(Error::SinkError(e.to_string())))?;
    }
    match err {
        Some(e) => Err(Failure::runtime(e)),
        None => Ok(()),
    }
}

fn cmd_simulate(
    scenario: &str,
    dt: Option<f64>,
    t_end: Option<f64>,
    stride: Option<usize>,
    out: Option<&Path>,
    format: Format,
) -> Result<u8, Failure> {
    let mut s = load(scenario)?;
    s.dt = dt.unwrap_or(s.dt);
    s.t_end = t_end.unwrap_or(s.t_end);
    s.stride = stride.unwrap_or(s.stride);
    validate_scenario(&s).map_err(Failure::usage)?;
    run_one(&s, format.into(), out)?;
    Ok(0)
}

fn cmd_check(scenario: &str) -> Result<u8, Failure> {
    let s = load(scenario)?;
    let verdict = match &s.initial {
        InitialState::Kuramoto(k) => km_check(k, &s.params, &s.target),
        InitialState::Cs(c) => cs_check(c, &s.params, &s.target, &s.weight),
    };
    let text = serde_json::to_string_pretty(&verdict)
        .map_err(|e| Failure::runtime(Error::SinkError(e.to_string())))?;
    say(&text);
    Ok(if verdict.passed { 0 } else { EXIT_CHECK_FAILED })
}

#[allow(clippy::too_many_arguments)]
fn cmd_filippov(
    x0: f64,
    v0: f64,
    k0: f64,
    k1: f64,
    k2: f64,
    dinf: f64,
    t_max: f64,
    out: Option<&Path>,
    samples: usize,
) -> Result<u8, Failure> {
    let p = F2Params::from_couplings(k0, k1, k2, dinf).map_err(Failure::usage)?;
    let res = solve_filippov(&p, x0, v0, t_max).map_err(|e| match e {
        Error::InvalidHorizon(_) | Error::NonFinite(_) => Failure::usage(e),
        _ => Failure::runtime(e),
    })?;
    let report = json!({ "result": res, "decay_rate": decay_envelope(&p) });
    let text = serde_json::to_string_pretty(&report)
        .map_err(|e| Failure::runtime(Error::SinkError(e.to_string())))?;
    say(&text);
    if let Some(path) = out {
        let table = Table {
            columns: ["t", "x", "v", "E"].map(String::from).to_vec(),
            rows: res
                .sample(samples)
                .into_iter()
                .map(|r| r.to_vec())
                .collect(),
        };
        let mut w = sink(Some(path))?;
        write_table(&table, SeriesFormat::Csv, &mut w).map_err(Failure::runtime)?;
        w.flush().map_err(|e| Failure::io(path, e))?;
    }
    if let Verdict::OriginHitIllPosed { time } = res.verdict {
        eprintln!(
            "OriginHit: relative state reached (0, 0) at t = {time}; continuation is not unique"
        );
        return Ok(EXIT_RUNTIME);
    }
    Ok(0)
}

fn cmd_sweep(
    scenario: &str,
    param: Coupling,
    values: &[f64],
    out_dir: &Path,
    format: Format,
) -> Result<u8, Failure> {
    let base = load(scenario)?;
    let tag = match param {
        Coupling::Kappa0 => "kappa0",
        Coupling::Kappa1 => "kappa1",
        Coupling::Kappa2 => "kappa2",
    };
    let ext = match format {
        Format::Csv => "csv",
        Format::Json => "json",
    };
    let mut runs = Vec::with_capacity(values.len());
    for &v in values {
        let mut s = base.clone();
        match param {
            Coupling::Kappa0 => s.params.kappa0 = v,
            Coupling::Kappa1 => s.params.kappa1 = v,
            Coupling::Kappa2 => s.params.kappa2 = v,
        }
        validate_scenario(&s).map_err(Failure::usage)?;
        runs.push((v, s, out_dir.join(format!("{tag}_{v}.{ext}"))));
    }
    std::fs::create_dir_all(out_dir).map_err(|e| Failure::io(out_dir, e))?;

    let results: Vec<Result<(), Failure>> = std::thread::scope(|scope| {
        let handles: Vec<_> = runs
            .iter()
            .map(|(_, s, path)| scope.spawn(move || run_one(s, format.into(), Some(path))))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("sweep worker panicked"))
            .collect()
    });

    let mut code = 0;
    for ((v, _, path), r) in runs.iter().zip(results) {
        match r {
            Ok(()) => say(&format!("{tag}={v} ok {}", path.display())),
            Err(f) => {
                say(&format!("{tag}={v} failed {}", f.name));
                eprintln!("{tag}={v}: {}", f.message);
                code = code.max(f.code);
            }
        }
    }
    Ok(code)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    let outcome = match &cli.command {
        Command::Simulate {
            scenario,
            dt,
            t_end,
            stride,
            out,
            format,
        } => cmd_simulate(scenario, *dt, *t_end, *stride, out.as_deref(), *format),
        Command::Check { scenario } => cmd_check(scenario),
        Command::Filippov2 {
            x0,
            v0,
            k0,
            k1,
            k2,
            dinf,
            t_max,
            out,
            samples,
        } => cmd_filippov(
            *x0,
            *v0,
            *k0,
            *k1,
            *k2,
            *dinf,
            *t_max,
            out.as_deref(),
            *samples,
        ),
        Command::Sweep {
            scenario,
            param,
            values,
            out_dir,
            format,
        } => cmd_sweep(scenario, *param, values, out_dir, *format),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("{}", f.message);
            ExitCode::from(f.code)
        }
    }
}
