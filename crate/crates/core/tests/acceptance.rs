//! Acceptance suite: one test per release criterion, each printing a
//! pass/fail line. Run with `cargo test --test acceptance -- --nocapture`.

use std::process::Command;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sidelink_alloc::baselines::{exhaustive_search, greedy_assign, random_assign};
use sidelink_alloc::harness::{run_experiment, Algorithm};
use sidelink_alloc::reduction::{reduce_hard, reduce_soft};
use sidelink_alloc::scenario::{generate_scenario, SinrModel};
use sidelink_alloc::{
    brute_force_assignment, build_constrained_constraint_matrix,
    build_unconstrained_constraint_matrix, check_total_unimodularity, solve_assignment,
    solve_constrained, verify_assignment_feasibility, MacroPartition, ScenarioConfig, WeightMatrix,
};

const TOL: f64 = 1e-9;

fn random_wide(rng: &mut ChaCha8Rng, n: usize, k: usize) -> WeightMatrix {
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..n * k).map(|_| rng.gen_range(0.0..10.0)).collect())
        .collect();
    WeightMatrix::from_rows(&rows, 1.0).unwrap()
}

struct Criterion {
    number: u32,
    name: &'static str,
}

impl Criterion {
    fn new(number: u32, name: &'static str) -> Self {
        Criterion { number, name }
    }

    fn pass(self) {
        println!("criterion {}: {} ... PASS", self.number, self.name);
    }
}

impl Drop for Criterion {
    fn drop(&mut self) {
        if std::thread::panicking() {
            println!("criterion {}: {} ... FAIL", self.number, self.name);
        }
    }
}

#[test]
fn criterion_1_constrained_optimality() {
    let c = Criterion::new(1, "solve_constrained matches exhaustive search on 1000 instances");
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    for trial in 0..1000 {
        let n = 2 + trial % 5; // N in 2..=6
        let k = 1 + trial % 3; // K in 1..=3
        let partition = MacroPartition::build(n, k).unwrap();
        let weights = random_wide(&mut rng, n, k);
        let graph = solve_constrained(&weights, &partition).unwrap();
        let oracle = exhaustive_search(&weights, &partition).unwrap();
        assert!(
            (graph.value - oracle.value).abs() <= TOL,
            "trial {trial} (N={n}, K={k}): {} vs {}",
            graph.value,
            oracle.value
        );
    }
    c.pass();
}

#[test]
fn criterion_2_hungarian_oracle() {
    let c = Criterion::new(2, "Kuhn-Munkres matches permutation brute force on 1000 matrices");
    let mut rng = ChaCha8Rng::seed_from_u64(102);
    for trial in 0..1000 {
        let n = 1 + trial % 7;
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..n).map(|_| rng.gen_range(0.0..10.0)).collect())
            .collect();
        let weights = WeightMatrix::from_rows(&rows, 1.0).unwrap();
        let fast = solve_assignment(&weights).unwrap();
        let brute = brute_force_assignment(&weights).unwrap();
        assert!(
            (fast.value - brute.value).abs() <= TOL,
            "trial {trial} (n={n}): {} vs {}",
            fast.value,
            brute.value
        );
    }
    c.pass();
}

#[test]
fn criterion_3_soft_reduction_bound() {
    let c = Criterion::new(3, "log-sum-exp reduction within ln(K)/beta of hard max");
    let mut rng = ChaCha8Rng::seed_from_u64(103);
    for trial in 0..200 {
        let n = 1 + trial % 6;
        let k = 1 + trial % 7;
        let partition = MacroPartition::build(n, k).unwrap();
        let weights = random_wide(&mut rng, n, k);
        let hard = reduce_hard(&weights, &partition).unwrap();
        for beta in [10.0, 100.0, 1000.0] {
            let soft = reduce_soft(&weights, &partition, beta).unwrap();
            let bound = (k as f64).ln() / beta;
            for idx in 0..n * n {
                let gap = soft.entries()[idx] - hard.reduced.entries()[idx];
                assert!(
                    (-TOL..=bound + TOL).contains(&gap),
                    "trial {trial} beta={beta}: gap {gap} outside [0, {bound}]"
                );
            }
        }
        let soft = reduce_soft(&weights, &partition, 1e4).unwrap();
        let max_gap = soft
            .entries()
            .iter()
            .zip(hard.reduced.entries())
            .map(|(s, h)| s - h)
            .fold(f64::NEG_INFINITY, f64::max);
        assert!(max_gap < 1e-3, "trial {trial} (K={k}): max gap {max_gap}");
    }
    c.pass();
}

#[test]
fn criterion_4_feasibility_all_algorithms() {
    let c = Criterion::new(4, "all four algorithms always produce feasible assignments");
    let mut rng = ChaCha8Rng::seed_from_u64(104);
    for trial in 0..1000 {
        let n = 2 + trial % 5;
        let k = 1 + trial % 3;
        let partition = MacroPartition::build(n, k).unwrap();
        let weights = random_wide(&mut rng, n, k);
        let outputs = [
            solve_constrained(&weights, &partition).unwrap(),
            exhaustive_search(&weights, &partition).unwrap(),
            greedy_assign(&weights, &partition).unwrap(),
            random_assign(&weights, &partition, trial as u64).unwrap(),
        ];
        for assignment in &outputs {
            let (ok, violations) = verify_assignment_feasibility(assignment, n, k);
            assert!(ok, "trial {trial}: {violations:?}");
        }
    }
    c.pass();
}

#[test]
fn criterion_5_total_unimodularity() {
    let c = Criterion::new(5, "constraint matrices are totally unimodular up to 4x4 submatrices");
    for n in [2, 3] {
        let a = build_unconstrained_constraint_matrix(n).unwrap();
        assert!(
            check_total_unimodularity(&a, 4).unwrap(),
            "unconstrained n={n}"
        );
        for k in [1, 2] {
            let a = build_constrained_constraint_matrix(n, k).unwrap();
            assert!(
                check_total_unimodularity(&a, 4).unwrap(),
                "constrained n={n} k={k}"
            );
        }
    }
    c.pass();
}

#[test]
fn criterion_6_baseline_ordering() {
    let c = Criterion::new(6, "baseline ordering over 1000 trials at 10 vehicles, K=3");
    let config = ScenarioConfig {
        vehicles_per_cluster: 10,
        n_clusters: 1,
        n_subframes: 10,
        resources_per_subframe: 3,
        bandwidth_mhz: 1.26,
        sinr_model: SinrModel::default(),
        message_rate_hz: 10.0,
        seed: 106,
    };
    let report = run_experiment(
        &config,
        &[Algorithm::Graph, Algorithm::Greedy, Algorithm::Random],
        1000,
    )
    .unwrap();

    // per-trial dominance of the optimum
    for trial in 0..1000 {
        let value = |algo| {
            report
                .records
                .iter()
                .find(|r| r.trial == trial && r.algorithm == algo)
                .unwrap()
                .value
        };
        let graph = value(Algorithm::Graph);
        assert!(value(Algorithm::Greedy) <= graph + TOL, "trial {trial}");
        assert!(value(Algorithm::Random) <= graph + TOL, "trial {trial}");
    }

    // mean worst-rate ordering
    let worst = |algo: Algorithm| report.summary[&algo].worst_rate;
    assert!(worst(Algorithm::Graph) >= worst(Algorithm::Greedy));
    assert!(worst(Algorithm::Greedy) >= worst(Algorithm::Random));

    // CDF ordering within Monte-Carlo noise
    let noise = 0.02;
    let graph_cdf = &report.cdf[&Algorithm::Graph];
    let greedy_cdf = &report.cdf[&Algorithm::Greedy];
    let random_cdf = &report.cdf[&Algorithm::Random];
    for i in 0..report.cdf_grid.len() {
        assert!(
            graph_cdf[i] <= greedy_cdf[i] + noise,
            "grid point {i}: graph {} vs greedy {}",
            graph_cdf[i],
            greedy_cdf[i]
        );
        assert!(
            greedy_cdf[i] <= random_cdf[i] + noise,
            "grid point {i}: greedy {} vs random {}",
            greedy_cdf[i],
            random_cdf[i]
        );
    }
    c.pass();
}

fn median_solve_time(n: usize, k: usize, reps: usize) -> f64 {
    let config = ScenarioConfig {
        vehicles_per_cluster: n,
        n_clusters: 1,
        n_subframes: n,
        resources_per_subframe: k,
        bandwidth_mhz: 1.26,
        sinr_model: SinrModel::default(),
        message_rate_hz: 10.0,
        seed: 107,
    };
    let scenario = generate_scenario(&config).unwrap();
    let weights = &scenario.clusters[0].weights;
    let partition = MacroPartition::build(n, k).unwrap();
    let mut times: Vec<f64> = (0..reps)
        .map(|_| {
            let start = Instant::now();
            let assignment = solve_constrained(weights, &partition).unwrap();
            let elapsed = start.elapsed().as_secs_f64();
            assert!(assignment.value > 0.0);
            elapsed
        })
        .collect();
    times.sort_by(|a, b| a.total_cmp(b));
    times[times.len() / 2]
}

#[test]
fn criterion_7_latency_and_scaling() {
    let c = Criterion::new(7, "full-scale solve under 100 ms with cubic scaling");
    let t25 = median_solve_time(25, 7, 31);
    let t100 = median_solve_time(100, 7, 31);
    assert!(
        t100 < 0.1,
        "N=100, K=7 median solve took {:.1} ms",
        t100 * 1e3
    );
    // (100/25)^3 = 64, allowed to drift by a factor of 3 either way
    let ratio = t100 / t25;
    assert!(
        (64.0 / 3.0..=64.0 * 3.0).contains(&ratio),
        "scaling ratio t(100)/t(25) = {ratio:.1}, expected ~64 within 3x"
    );
    c.pass();
}

#[test]
fn criterion_8_simulate_determinism() {
    let c = Criterion::new(8, "simulate twice with one config yields byte-identical files");
    let bin = env!("CARGO_BIN_EXE_sidelink-alloc");
    let dir = tempfile::tempdir().unwrap();
    let config_path = dir.path().join("config.json");
    std::fs::write(
        &config_path,
        r#"{
            "vehicles_per_cluster": 6,
            "n_clusters": 2,
            "n_subframes": 8,
            "resources_per_subframe": 3,
            "seed": 12345
        }"#,
    )
    .unwrap();

    for run in ["a", "b"] {
        for format in ["json", "csv"] {
            let out = dir.path().join(format!("{run}-{format}"));
            let status = Command::new(bin)
                .args([
                    "simulate",
                    "--config",
                    config_path.to_str().unwrap(),
                    "--trials",
                    "20",
                    "--algos",
                    "graph,greedy,random",
                    "--out",
                    out.to_str().unwrap(),
                    "--format",
                    format,
                ])
                .status()
                .unwrap();
            assert!(status.success());
        }
    }
    for (format, files) in [
        ("json", vec!["report.json"]),
        ("csv", vec!["rates.csv", "summary.csv"]),
    ] {
        for file in files {
            let a = std::fs::read(dir.path().join(format!("a-{format}")).join(file)).unwrap();
            let b = std::fs::read(dir.path().join(format!("b-{format}")).join(file)).unwrap();
            assert_eq!(a, b, "{file} differs between runs");
        }
    }
    c.pass();
}

/// Independent oracle for the unpadded problem: enumerate every injective
/// map of the m real vehicles into the N subframes and take the block
/// argmax within each assigned subframe.
fn unpadded_exhaustive_value(
    weights: &WeightMatrix,
    partition: &MacroPartition,
    n_real: usize,
) -> f64 {
    fn recurse(
        weights: &WeightMatrix,
        partition: &MacroPartition,
        n_real: usize,
        vehicle: usize,
        used: &mut Vec<bool>,
        acc: f64,
        best: &mut f64,
    ) {
        if vehicle == n_real {
            *best = best.max(acc);
            return;
        }
        for subframe in 0..partition.n_subframes() {
            if used[subframe] {
                continue;
            }
            let block_max = partition
                .block(subframe)
                .map(|j| weights.get(vehicle, j))
                .fold(f64::NEG_INFINITY, f64::max);
            used[subframe] = true;
            recurse(weights, partition, n_real, vehicle + 1, used, acc + block_max, best);
            used[subframe] = false;
        }
    }
    let mut best = f64::NEG_INFINITY;
    let mut used = vec![false; partition.n_subframes()];
    recurse(weights, partition, n_real, 0, &mut used, 0.0, &mut best);
    best
}

#[test]
fn criterion_9_dummy_neutrality() {
    let c = Criterion::new(9, "padding with dummy vehicles never changes the real optimum");
    let mut rng = ChaCha8Rng::seed_from_u64(109);
    for trial in 0..200 {
        let n = 2 + trial % 4; // subframes
        let m = 1 + rng.gen_range(0..n - 1); // real vehicles, m < n
        let k = 1 + trial % 3;
        let partition = MacroPartition::build(n, k).unwrap();
        let real_rows: Vec<Vec<f64>> = (0..m)
            .map(|_| (0..n * k).map(|_| rng.gen_range(0.0..10.0)).collect())
            .collect();
        let real = WeightMatrix::from_rows(&real_rows, 1.0).unwrap();
        let padded = sidelink_alloc::pad_cluster(&real, n).unwrap();

        let solution = solve_constrained(&padded, &partition).unwrap();
        let real_value: f64 = (0..m)
            .map(|i| padded.get(i, solution.vehicle_to_resource[i]))
            .sum();
        let oracle = unpadded_exhaustive_value(&real, &partition, m);
        assert!(
            (real_value - oracle).abs() <= TOL,
            "trial {trial} (m={m}, N={n}, K={k}): {real_value} vs {oracle}"
        );
    }
    c.pass();
}
