//! Adaptive frequency sweep runner and algorithm comparison tool.

mod report;
mod solver_spec;

use clap::{Args, Parser, Subcommand};
use report::RunReport;
use rfsweep_core::baselines::{pradovera_sweep, sb_sweep};
use rfsweep_core::error::Result;
use rfsweep_core::metrics::from_db;
use rfsweep_core::solvers::SolverOracle;
use rfsweep_core::sweep::{run_sweep, SweepConfig, SweepMode, SweepResult, TestGrid};
use rfsweep_core::touchstone::{write as touchstone_write, FrequencyUnit, TouchstoneDocument};
use rfsweep_core::types::{Frequency, SampleSet};
use solver_spec::{parse_frequency, SolverSpec};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

#[derive(Parser)]
#[command(
    name = "rfsweep",
    about = "Rational-macromodeling frequency sweeps over analytic, network and Touchstone-backed solvers",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one adaptive sweep and write model/error/sample files.
    Sweep(SweepArgs),
    /// Run all four algorithms on the same solver and tabulate them.
    Compare(CompareArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Solver: qwt | ckt1 | ckt2 | tl:<lpf7|ladder7|star10|qwt|chain:...> | touchstone:<path>[:lenient]
    #[arg(long)]
    solver: String,

    /// Band start, with optional Hz/kHz/MHz/GHz suffix (defaults to the solver's band).
    #[arg(long)]
    fmin: Option<String>,

    /// Band end, with optional unit suffix.
    #[arg(long)]
    fmax: Option<String>,

    /// Evaluation grid spacing, with optional unit suffix (default: band/190).
    #[arg(long)]
    grid_step: Option<String>,

    /// Error tolerance in dB (relative spectral norm).
    #[arg(long, default_value_t = -60.0)]
    tol_db: f64,

    /// Consecutive below-tolerance samples required to stop.
    #[arg(long, default_value_t = 3)]
    memory: usize,

    /// Lower reduction exponent.
    #[arg(long, default_value_t = 8)]
    q1: u32,

    /// Higher reduction exponent.
    #[arg(long, default_value_t = 12)]
    q2: u32,

    /// Frequency perturbation for the pseudo error, in Hz.
    #[arg(long, default_value_t = 1e-5)]
    delta_f: f64,

    /// Physical trace length in meters (semi-adaptive initial sampling).
    #[arg(long)]
    length_m: Option<f64>,

    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: CommonArgs,

    /// Algorithm: semi | full | sb | pradovera
    #[arg(long)]
    algo: String,

    /// Barycentric sweep without the memory rule.
    #[arg(long, default_value_t = false)]
    pradovera_memoryless: bool,

    /// Also export the model response as a Touchstone file.
    #[arg(long, default_value_t = false)]
    write_snp: bool,
}

#[derive(Args)]
struct CompareArgs {
    #[command(flatten)]
    common: CommonArgs,

    /// Run the barycentric row without the memory rule.
    #[arg(long, default_value_t = false)]
    pradovera_memoryless: bool,
}

struct Setup {
    spec: SolverSpec,
    grid: TestGrid,
    band: (Frequency, Frequency),
    tol: f64,
    memory: usize,
    q1: u32,
    q2: u32,
    delta_f: f64,
    length_m: Option<f64>,
    out: PathBuf,
}

fn prepare(common: &CommonArgs) -> Result<Setup> {
    // resolve the band first against a provisional parse (scaling decisions
    // depend on the magnitude of f_max)
    let fmax_hint = match &common.fmax {
        Some(text) => parse_frequency(text)?,
        None => 1.0,
    };
    let spec = SolverSpec::parse(&common.solver, fmax_hint)?;

    let (native_lo, native_hi) = spec.native_band().unwrap_or((0.05, 1.0));
    let f_min = Frequency::new(match &common.fmin {
        Some(text) => parse_frequency(text)?,
        None => native_lo,
    })?;
    let f_max = Frequency::new(match &common.fmax {
        Some(text) => parse_frequency(text)?,
        None => native_hi,
    })?;
    let step = match &common.grid_step {
        Some(text) => parse_frequency(text)?,
        None => (f_max.hz() - f_min.hz()) / 190.0,
    };
    let grid = TestGrid::from_step(f_min, f_max, step)?;
    let length_m = common
        .length_m
        .or_else(|| spec.default_length_m(f_max));

    Ok(Setup {
        spec,
        grid,
        band: (f_min, f_max),
        tol: from_db(common.tol_db),
        memory: common.memory,
        q1: common.q1,
        q2: common.q2,
        delta_f: common.delta_f,
        length_m,
        out: common.out.clone(),
    })
}

impl Setup {
    fn config(&self, mode: SweepMode) -> Result<SweepConfig> {
        let mut config = SweepConfig {
            mode,
            tol: self.tol,
            memory_target: self.memory,
            q1: self.q1,
            q2: self.q2,
            delta_f: self.delta_f,
            max_iterations: 500,
            trace_length_m: None,
            d_shift: Default::default(),
        };
        if mode == SweepMode::SemiAdaptive {
            config.trace_length_m = self.length_m;
        }
        config.validate()?;
        Ok(config)
    }

    fn oracle(&self) -> Result<Box<dyn SolverOracle>> {
        self.spec.build(self.band)
    }
}

fn run_algorithm(setup: &Setup, algo: &str, memoryless: bool) -> Result<(SweepResult, Box<dyn SolverOracle>)> {
    let oracle = setup.oracle()?;
    let result = match algo {
        "semi" => run_sweep(oracle.as_ref(), &setup.grid, &setup.config(SweepMode::SemiAdaptive)?)?,
        "full" => run_sweep(oracle.as_ref(), &setup.grid, &setup.config(SweepMode::FullyAdaptive)?)?,
        "sb" => sb_sweep(oracle.as_ref(), &setup.grid, &setup.config(SweepMode::FullyAdaptive)?)?,
        "pradovera" => pradovera_sweep(
            oracle.as_ref(),
            &setup.grid,
            &setup.config(SweepMode::FullyAdaptive)?,
            !memoryless,
        )?,
        other => {
            return Err(rfsweep_core::Error::InvalidInput(format!(
                "unknown algorithm '{other}' (expected semi, full, sb or pradovera)"
            )))
        }
    };
    Ok((result, oracle))
}

fn cmd_sweep(args: &SweepArgs) -> Result<bool> {
    let setup = prepare(&args.common)?;
    let started = Instant::now();
    let (result, _oracle) = run_algorithm(&setup, &args.algo, args.pradovera_memoryless)?;
    let wall = started.elapsed().as_secs_f64();

    // verification pass uses a fresh oracle so reported calls stay honest
    let verifier = setup.oracle()?;
    let curve = report::error_curve_db(&result, &setup.grid, verifier.as_ref())?;
    let max_db = curve.iter().map(|(_, db)| *db).fold(f64::NEG_INFINITY, f64::max);

    let run_report = RunReport {
        algorithm: args.algo.clone(),
        input_samples: result.chosen_samples.len(),
        solver_calls: result.solver_calls,
        max_actual_error_db: max_db,
        wall_time_s: wall,
        converged: result.converged,
    };

    let out = &setup.out;
    report::write_file(out, "model_response.csv", &report::response_csv(&setup.grid, &result.grid_response))
        .map_err(io_err)?;
    report::write_file(out, "error_curve.csv", &report::error_csv(&curve)).map_err(io_err)?;
    report::write_file(out, "samples.csv", &report::samples_csv(&result.chosen_samples))
        .map_err(io_err)?;
    let json = serde_json::to_string_pretty(&run_report)
        .map_err(|e| rfsweep_core::Error::InvalidInput(e.to_string()))?;
    report::write_file(out, "report.json", &json).map_err(io_err)?;

    if args.write_snp {
        let samples: Vec<_> = setup
            .grid
            .frequencies()
            .iter()
            .copied()
            .zip(result.grid_response.iter().cloned())
            .collect();
        let ports = result.chosen_samples.ports();
        let doc = TouchstoneDocument::from_samples(
            SampleSet::new(ports, samples)?,
            FrequencyUnit::Hz,
        );
        report::write_file(out, &format!("model.s{ports}p"), &touchstone_write(&doc))
            .map_err(io_err)?;
    }

    println!(
        "{}: {} samples, {} solver calls, max grid error {:.2} dB, converged: {}",
        args.algo, run_report.input_samples, run_report.solver_calls, max_db, result.converged
    );
    Ok(result.converged)
}

fn cmd_compare(args: &CompareArgs) -> Result<bool> {
    let setup = prepare(&args.common)?;
    let mut rows: Vec<(RunReport, Option<String>)> = Vec::new();
    let mut all_converged = true;

    for algo in ["semi", "full", "sb", "pradovera"] {
        let started = Instant::now();
        match run_algorithm(&setup, algo, args.pradovera_memoryless) {
            Ok((result, _oracle)) => {
                let wall = started.elapsed().as_secs_f64();
                let verifier = setup.oracle()?;
                let max_db = report::grid_error_db(&result, &setup.grid, verifier.as_ref())?;
                all_converged &= result.converged;
                rows.push((
                    RunReport {
                        algorithm: algo.to_string(),
                        input_samples: result.chosen_samples.len(),
                        solver_calls: result.solver_calls,
                        max_actual_error_db: max_db,
                        wall_time_s: wall,
                        converged: result.converged,
                    },
                    None,
                ));
            }
            Err(e) => {
                all_converged = false;
                rows.push((
                    RunReport {
                        algorithm: algo.to_string(),
                        input_samples: 0,
                        solver_calls: 0,
                        max_actual_error_db: f64::NAN,
                        wall_time_s: started.elapsed().as_secs_f64(),
                        converged: false,
                    },
                    Some(e.to_string()),
                ));
            }
        }
    }

    report::write_file(&setup.out, "comparison.csv", &report::comparison_csv(&rows))
        .map_err(io_err)?;
    print!("{}", report::comparison_table(&rows));
    Ok(all_converged)
}

fn io_err(e: std::io::Error) -> rfsweep_core::Error {
    rfsweep_core::Error::InvalidInput(format!("io error: {e}"))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Sweep(args) => cmd_sweep(args),
        Command::Compare(args) => cmd_compare(args),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(rfsweep_core::Error::InvalidInput(msg)) => {
            eprintln!("usage error: {msg}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
