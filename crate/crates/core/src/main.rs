use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sidelink_alloc::baselines::{exhaustive_search, greedy_assign, random_assign};
use sidelink_alloc::harness::{export_report, run_experiment, Algorithm, ReportFormat};
use sidelink_alloc::{
    brute_force_assignment, pad_cluster, solve_assignment, solve_constrained,
    verify_assignment_feasibility, Error, MacroPartition, ResourceAssignment, ScenarioConfig,
    WeightMatrix,
};

#[derive(Parser)]
#[command(
    name = "sidelink-alloc",
    about = "Conflict-free V2V sidelink resource allocation via macro-vertex matching"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum AlgoArg {
    Graph,
    Exhaustive,
    Greedy,
    Random,
}

impl From<AlgoArg> for Algorithm {
    fn from(a: AlgoArg) -> Self {
        match a {
            AlgoArg::Graph => Algorithm::Graph,
            AlgoArg::Exhaustive => Algorithm::Exhaustive,
            AlgoArg::Greedy => Algorithm::Greedy,
            AlgoArg::Random => Algorithm::Random,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one instance from a CSV weight matrix (rows = vehicles,
    /// columns = resources) and print the assignment.
    Solve {
        #[arg(long)]
        weights: PathBuf,
        /// Number of subframes N.
        #[arg(long)]
        subframes: usize,
        /// Resources per subframe K.
        #[arg(long = "per-subframe")]
        per_subframe: usize,
        #[arg(long)]
        algo: AlgoArg,
        /// Seed for the random algorithm.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run a multi-trial experiment from a scenario config file and write
    /// report files.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        /// Comma-separated algorithm list.
        #[arg(long, value_delimiter = ',', default_values_t = [AlgoArg::Graph, AlgoArg::Greedy, AlgoArg::Random], value_enum)]
        algos: Vec<AlgoArg>,
        /// Overrides the seed from the config file.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = FormatArg::Json)]
        format: FormatArg,
    },
    /// Run the oracle-equivalence and feasibility suites on random
    /// instances; exits nonzero on any violation.
    Validate {
        #[arg(long, default_value_t = 1000)]
        instances: usize,
        #[arg(long = "max-n", default_value_t = 6)]
        max_n: usize,
        #[arg(long = "max-k", default_value_t = 3)]
        max_k: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::Io { .. } => 3,
        Error::Dimension(_)
        | Error::InvalidWeight(_)
        | Error::InvalidParameter(_)
        | Error::InvalidConfig(_)
        | Error::SizeLimit(_)
        | Error::Overload { .. }
        | Error::Bounds(_)
        | Error::EmptyInput(_) => 2,
        Error::Numeric(_) | Error::InternalInvariant(_) => 1,
    }
}

fn read_weights_csv(path: &PathBuf) -> Result<Vec<Vec<f64>>, Error> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.clone(),
        source,
    })?;
    let mut rows = Vec::new();
    for (line_no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let row: Result<Vec<f64>, Error> = line
            .split(',')
            .map(|cell| {
                cell.trim().parse::<f64>().map_err(|_| {
                    Error::InvalidParameter(format!(
                        "{}:{}: '{}' is not a number",
                        path.display(),
                        line_no + 1,
                        cell.trim()
                    ))
                })
            })
            .collect();
        rows.push(row?);
    }
    if rows.is_empty() {
        return Err(Error::EmptyInput(format!(
            "{} contains no rows",
            path.display()
        )));
    }
    Ok(rows)
}

fn cmd_solve(
    weights_path: &PathBuf,
    subframes: usize,
    per_subframe: usize,
    algo: AlgoArg,
    seed: u64,
) -> Result<(), Error> {
    let rows = read_weights_csv(weights_path)?;
    let n_real = rows.len();
    let raw = WeightMatrix::from_rows(&rows, 0.0)?;
    let partition = MacroPartition::build(subframes, per_subframe)?;
    if raw.n_cols() != partition.total_resources() {
        return Err(Error::Dimension(format!(
            "weight file has {} columns, expected N*K = {}",
            raw.n_cols(),
            partition.total_resources()
        )));
    }
    let weights = pad_cluster(&raw, subframes)?;

    let assignment: ResourceAssignment = match Algorithm::from(algo) {
        Algorithm::Graph => solve_constrained(&weights, &partition)?,
        Algorithm::Exhaustive => exhaustive_search(&weights, &partition)?,
        Algorithm::Greedy => greedy_assign(&weights, &partition)?,
        Algorithm::Random => random_assign(&weights, &partition, seed)?,
    };
    let (feasible, violations) =
        verify_assignment_feasibility(&assignment, subframes, per_subframe);
    if !feasible {
        return Err(Error::InternalInvariant(format!(
            "infeasible assignment: {violations:?}"
        )));
    }

    let mut real_value = 0.0;
    for vehicle in 0..n_real {
        let resource = assignment.vehicle_to_resource[vehicle];
        let rate = weights.get(vehicle, resource);
        real_value += rate;
        println!(
            "vehicle {vehicle} -> resource {resource} (subframe {}, rate {rate:.6})",
            assignment.subframe_of[vehicle]
        );
    }
    println!("total value: {real_value:.6}");
    Ok(())
}

fn cmd_simulate(
    config_path: &PathBuf,
    trials: usize,
    algos: &[AlgoArg],
    seed: Option<u64>,
    out: &PathBuf,
    format: FormatArg,
) -> Result<(), Error> {
    let text = fs::read_to_string(config_path).map_err(|source| Error::Io {
        path: config_path.clone(),
        source,
    })?;
    let mut config: ScenarioConfig = serde_json::from_str(&text)
        .map_err(|e| Error::InvalidConfig(format!("{}: {e}", config_path.display())))?;
    if let Some(seed) = seed {
        config.seed = seed;
    }
    let algorithms: Vec<Algorithm> = algos.iter().map(|&a| a.into()).collect();
    let report = run_experiment(&config, &algorithms, trials)?;
    let format = match format {
        FormatArg::Csv => ReportFormat::Csv,
        FormatArg::Json => ReportFormat::Json,
    };
    export_report(&report, format, out)?;
    for (algo, metrics) in &report.summary {
        println!(
            "{algo}: highest {:.4}, worst {:.4}, mean {:.4}, std {:.4}",
            metrics.highest_rate, metrics.worst_rate, metrics.mean_rate, metrics.std_rate
        );
    }
    for (algo, timing) in &report.timings {
        println!(
            "{algo}: median solve {:.1} us over {} solves",
            timing.median_solve_us, timing.n_samples
        );
    }
    println!("report written to {}", out.display());
    Ok(())
}

fn cmd_validate(instances: usize, max_n: usize, max_k: usize, seed: u64) -> Result<bool, Error> {
    if max_n == 0 || max_k == 0 {
        return Err(Error::InvalidParameter("max-n and max-k must be >= 1".into()));
    }
    if max_n > 8 {
        return Err(Error::SizeLimit(
            "validation uses exhaustive oracles; max-n is limited to 8".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures = 0usize;

    for instance in 0..instances {
        let n = 1 + rng.gen_range(0..max_n);
        let k = 1 + rng.gen_range(0..max_k);

        // unconstrained oracle
        let square: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..n).map(|_| rng.gen_range(0.0..10.0)).collect())
            .collect();
        let square = WeightMatrix::from_rows(&square, 1.0)?;
        let fast = solve_assignment(&square)?;
        let brute = brute_force_assignment(&square)?;
        if (fast.value - brute.value).abs() > 1e-9 {
            eprintln!(
                "FAIL instance {instance}: Kuhn-Munkres {} != brute force {}",
                fast.value, brute.value
            );
            failures += 1;
        }

        // constrained oracle + feasibility
        let partition = MacroPartition::build(n, k)?;
        let wide: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..n * k).map(|_| rng.gen_range(0.0..10.0)).collect())
            .collect();
        let wide = WeightMatrix::from_rows(&wide, 1.0)?;
        let graph = solve_constrained(&wide, &partition)?;
        let exhaustive = exhaustive_search(&wide, &partition)?;
        if (graph.value - exhaustive.value).abs() > 1e-9 {
            eprintln!(
                "FAIL instance {instance}: constrained solver {} != exhaustive {}",
                graph.value, exhaustive.value
            );
            failures += 1;
        }
        for (name, assignment) in [
            ("graph", &graph),
            ("exhaustive", &exhaustive),
            ("greedy", &greedy_assign(&wide, &partition)?),
            ("random", &random_assign(&wide, &partition, seed ^ instance as u64)?),
        ] {
            let (ok, violations) = verify_assignment_feasibility(assignment, n, k);
            if !ok {
                eprintln!("FAIL instance {instance}: {name} infeasible: {violations:?}");
                failures += 1;
            }
        }
    }

    if failures == 0 {
        println!("validation passed: {instances} instances, no violations");
        Ok(true)
    } else {
        eprintln!("validation failed: {failures} violations over {instances} instances");
        Ok(false)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Solve {
            weights,
            subframes,
            per_subframe,
            algo,
            seed,
        } => cmd_solve(weights, *subframes, *per_subframe, *algo, *seed).map(|()| true),
        Command::Simulate {
            config,
            trials,
            algos,
            seed,
            out,
            format,
        } => cmd_simulate(config, *trials, algos, *seed, out, *format).map(|()| true),
        Command::Validate {
            instances,
            max_n,
            max_k,
            seed,
        } => cmd_validate(*instances, *max_n, *max_k, *seed),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}
