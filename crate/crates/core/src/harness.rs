//! Experiment harness: runs the allocation algorithms over seeded trials,
//! collects per-vehicle rate metrics and CDFs, and exports reports.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::baselines::{exhaustive_search, greedy_assign, random_assign};
use crate::error::{Error, Result};
use crate::reduction::{
    solve_constrained, verify_assignment_feasibility, MacroPartition, ResourceAssignment,
};
use crate::scenario::{generate_scenario, ClusterInstance, ScenarioConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Graph,
    Exhaustive,
    Greedy,
    Random,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [
        Algorithm::Graph,
        Algorithm::Exhaustive,
        Algorithm::Greedy,
        Algorithm::Random,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::Graph => "graph",
            Algorithm::Exhaustive => "exhaustive",
            Algorithm::Greedy => "greedy",
            Algorithm::Random => "random",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "graph" => Ok(Algorithm::Graph),
            "exhaustive" => Ok(Algorithm::Exhaustive),
            "greedy" => Ok(Algorithm::Greedy),
            "random" => Ok(Algorithm::Random),
            other => Err(Error::InvalidParameter(format!(
                "unknown algorithm '{other}' (expected graph|exhaustive|greedy|random)"
            ))),
        }
    }
}

/// Rate statistics over the real vehicles of one or more solves.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub highest_rate: f64,
    pub worst_rate: f64,
    pub mean_rate: f64,
    pub std_rate: f64,
}

/// Max, min, mean and sample standard deviation (n-1 divisor, 0 for a
/// singleton).
pub fn compute_metrics(rates: &[f64]) -> Result<Metrics> {
    if rates.is_empty() {
        return Err(Error::EmptyInput("metrics need at least one rate".into()));
    }
    let n = rates.len() as f64;
    let highest = rates.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let worst = rates.iter().cloned().fold(f64::INFINITY, f64::min);
    let mean = rates.iter().sum::<f64>() / n;
    let std = if rates.len() == 1 {
        0.0
    } else {
        let ss: f64 = rates.iter().map(|r| (r - mean) * (r - mean)).sum();
        (ss / (n - 1.0)).sqrt()
    };
    Ok(Metrics {
        highest_rate: highest,
        worst_rate: worst,
        mean_rate: mean,
        std_rate: std,
    })
}

/// Empirical CDF sampled on a grid: fraction of rates strictly below each
/// threshold.
pub fn compute_cdf(rates: &[f64], grid: &[f64]) -> Result<Vec<f64>> {
    if rates.is_empty() {
        return Err(Error::EmptyInput("cdf needs at least one rate".into()));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter(
            "cdf grid must be strictly ascending".into(),
        ));
    }
    let n = rates.len() as f64;
    Ok(grid
        .iter()
        .map(|&t| rates.iter().filter(|&&r| r < t).count() as f64 / n)
        .collect())
}

/// Rates of one algorithm on one cluster of one trial, real vehicles only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub cluster: usize,
    pub algorithm: Algorithm,
    pub rates: Vec<f64>,
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimingSummary {
    pub median_solve_us: f64,
    pub n_samples: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: ScenarioConfig,
    pub n_trials: usize,
    pub algorithms: Vec<Algorithm>,
    pub records: Vec<TrialRecord>,
    /// Field-wise mean of per-(trial, cluster) metrics.
    pub summary: BTreeMap<Algorithm, Metrics>,
    pub cdf_grid: Vec<f64>,
    pub cdf: BTreeMap<Algorithm, Vec<f64>>,
    /// Wall-clock medians. Kept out of serialized reports so exported
    /// files depend only on config, seed and trial count.
    #[serde(skip)]
    pub timings: BTreeMap<Algorithm, TimingSummary>,
}

impl PartialEq for ExperimentReport {
    fn eq(&self, other: &Self) -> bool {
        // timings excluded: they vary run to run
        self.config == other.config
            && self.n_trials == other.n_trials
            && self.algorithms == other.algorithms
            && self.records == other.records
            && self.summary == other.summary
            && self.cdf_grid == other.cdf_grid
            && self.cdf == other.cdf
    }
}

const HARNESS_EXHAUSTIVE_MAX_VEHICLES: usize = 8;
const DEFAULT_CDF_POINTS: usize = 30;

fn run_algorithm(
    algorithm: Algorithm,
    cluster: &ClusterInstance,
    partition: &MacroPartition,
    seed: u64,
) -> Result<ResourceAssignment> {
    match algorithm {
        Algorithm::Graph => solve_constrained(&cluster.weights, partition),
        Algorithm::Exhaustive => exhaustive_search(&cluster.weights, partition),
        Algorithm::Greedy => greedy_assign(&cluster.weights, partition),
        Algorithm::Random => random_assign(&cluster.weights, partition, seed),
    }
}

/// Runs `n_trials` independent scenarios (seed + trial index) and every
/// requested algorithm on every cluster. Assignments are verified feasible
/// before their rates enter the report; an infeasible output is a hard
/// failure.
pub fn run_experiment(
    config: &ScenarioConfig,
    algorithms: &[Algorithm],
    n_trials: usize,
) -> Result<ExperimentReport> {
    config.validate()?;
    let mut algorithms: Vec<Algorithm> = algorithms.to_vec();
    algorithms.sort();
    algorithms.dedup();
    if algorithms.contains(&Algorithm::Exhaustive)
        && config.vehicles_per_cluster > HARNESS_EXHAUSTIVE_MAX_VEHICLES
    {
        return Err(Error::SizeLimit(format!(
            "exhaustive search needs vehicles_per_cluster <= {HARNESS_EXHAUSTIVE_MAX_VEHICLES}, got {}",
            config.vehicles_per_cluster
        )));
    }

    let partition = MacroPartition::build(config.n_subframes, config.resources_per_subframe)?;
    let mut records = Vec::new();
    let mut per_solve_metrics: BTreeMap<Algorithm, Vec<Metrics>> = BTreeMap::new();
    let mut pooled_rates: BTreeMap<Algorithm, Vec<f64>> = BTreeMap::new();
    let mut solve_times: BTreeMap<Algorithm, Vec<f64>> = BTreeMap::new();

    for trial in 0..n_trials {
        let trial_seed = config.seed.wrapping_add(trial as u64);
        let mut trial_config = config.clone();
        trial_config.seed = trial_seed;
        let scenario = generate_scenario(&trial_config)?;

        for (cluster_idx, cluster) in scenario.clusters.iter().enumerate() {
            for &algorithm in &algorithms {
                let random_seed = trial_seed
                    .wrapping_add((cluster_idx as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
                let start = Instant::now();
                let assignment = run_algorithm(algorithm, cluster, &partition, random_seed)?;
                let elapsed_us = start.elapsed().as_secs_f64() * 1e6;

                let (feasible, violations) = verify_assignment_feasibility(
                    &assignment,
                    config.n_subframes,
                    config.resources_per_subframe,
                );
                if !feasible {
                    return Err(Error::InternalInvariant(format!(
                        "{algorithm} produced an infeasible assignment on trial {trial}, cluster {cluster_idx}: {violations:?}"
                    )));
                }

                let rates: Vec<f64> = (0..cluster.n_real_vehicles)
                    .map(|i| cluster.weights.get(i, assignment.vehicle_to_resource[i]))
                    .collect();
                per_solve_metrics
                    .entry(algorithm)
                    .or_default()
                    .push(compute_metrics(&rates)?);
                pooled_rates
                    .entry(algorithm)
                    .or_default()
                    .extend_from_slice(&rates);
                solve_times.entry(algorithm).or_default().push(elapsed_us);
                records.push(TrialRecord {
                    trial,
                    cluster: cluster_idx,
                    algorithm,
                    value: rates.iter().sum(),
                    rates,
                });
            }
        }
    }

    records.sort_by_key(|r| (r.trial, r.cluster, r.algorithm));

    let summary: BTreeMap<Algorithm, Metrics> = per_solve_metrics
        .iter()
        .map(|(&algo, samples)| {
            let n = samples.len() as f64;
            (
                algo,
                Metrics {
                    highest_rate: samples.iter().map(|m| m.highest_rate).sum::<f64>() / n,
                    worst_rate: samples.iter().map(|m| m.worst_rate).sum::<f64>() / n,
                    mean_rate: samples.iter().map(|m| m.mean_rate).sum::<f64>() / n,
                    std_rate: samples.iter().map(|m| m.std_rate).sum::<f64>() / n,
                },
            )
        })
        .collect();

    let max_rate = pooled_rates
        .values()
        .flatten()
        .cloned()
        .fold(0.0_f64, f64::max);
    let cdf_grid: Vec<f64> = if records.is_empty() || max_rate == 0.0 {
        Vec::new()
    } else {
        (0..DEFAULT_CDF_POINTS)
            .map(|i| max_rate * (i + 1) as f64 / (DEFAULT_CDF_POINTS - 1) as f64)
            .collect()
    };
    let cdf: BTreeMap<Algorithm, Vec<f64>> = if cdf_grid.is_empty() {
        BTreeMap::new()
    } else {
        pooled_rates
            .iter()
            .map(|(&algo, rates)| Ok((algo, compute_cdf(rates, &cdf_grid)?)))
            .collect::<Result<_>>()?
    };

    let timings: BTreeMap<Algorithm, TimingSummary> = solve_times
        .into_iter()
        .map(|(algo, mut times)| {
            times.sort_by(|a, b| a.total_cmp(b));
            let median = if times.is_empty() {
                0.0
            } else {
                times[times.len() / 2]
            };
            (
                algo,
                TimingSummary {
                    median_solve_us: median,
                    n_samples: times.len(),
                },
            )
        })
        .collect();

    Ok(ExperimentReport {
        config: config.clone(),
        n_trials,
        algorithms,
        records,
        summary,
        cdf_grid,
        cdf,
        timings,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            other => Err(Error::InvalidParameter(format!(
                "unknown format '{other}' (expected csv|json)"
            ))),
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    let mut file = fs::File::create(path).map_err(io_err(path))?;
    file.write_all(contents.as_bytes()).map_err(io_err(path))
}

/// Writes the report under `dir`. CSV emits `rates.csv` (one row per
/// trial/cluster/algorithm/vehicle) plus `summary.csv` with metrics and
/// CDF points; JSON emits the full nested `report.json`. Output bytes are
/// a pure function of the report: fixed 6-decimal formatting, sorted keys.
pub fn export_report(report: &ExperimentReport, format: ReportFormat, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    match format {
        ReportFormat::Json => {
            let mut text =
                serde_json::to_string_pretty(report).map_err(|e| Error::InternalInvariant(e.to_string()))?;
            text.push('\n');
            write_file(&dir.join("report.json"), &text)
        }
        ReportFormat::Csv => {
            let mut rates = String::from("trial,cluster,algorithm,vehicle,rate_mbit_s\n");
            for record in &report.records {
                for (vehicle, rate) in record.rates.iter().enumerate() {
                    rates.push_str(&format!(
                        "{},{},{},{},{:.6}\n",
                        record.trial, record.cluster, record.algorithm, vehicle, rate
                    ));
                }
            }
            write_file(&dir.join("rates.csv"), &rates)?;

            let mut summary = String::from("kind,algorithm,key,value\n");
            for (algo, m) in &report.summary {
                summary.push_str(&format!("metric,{algo},highest_rate,{:.6}\n", m.highest_rate));
                summary.push_str(&format!("metric,{algo},worst_rate,{:.6}\n", m.worst_rate));
                summary.push_str(&format!("metric,{algo},mean_rate,{:.6}\n", m.mean_rate));
                summary.push_str(&format!("metric,{algo},std_rate,{:.6}\n", m.std_rate));
            }
            for (algo, probs) in &report.cdf {
                for (threshold, prob) in report.cdf_grid.iter().zip(probs) {
                    summary.push_str(&format!("cdf,{algo},{threshold:.6},{prob:.6}\n"));
                }
            }
            write_file(&dir.join("summary.csv"), &summary)
        }
    }
}

/// Reads back a JSON report written by [`export_report`].
pub fn import_report(path: &Path) -> Result<ExperimentReport> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    serde_json::from_str(&text).map_err(|e| Error::InvalidParameter(format!("malformed report: {e}")))
}
