//! Comparison algorithms: exhaustive search over conflict-free
//! assignments, first-come first-served greedy, and seeded random.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::matching::WeightMatrix;
use crate::reduction::{MacroPartition, ResourceAssignment};

const EXHAUSTIVE_MAX_N: usize = 8;

fn check_dims(weights: &WeightMatrix, partition: &MacroPartition) -> Result<()> {
    if weights.n_rows() != partition.n_subframes()
        || weights.n_cols() != partition.total_resources()
    {
        return Err(Error::Dimension(format!(
            "expected {}x{} weights, got {}x{}",
            partition.n_subframes(),
            partition.total_resources(),
            weights.n_rows(),
            weights.n_cols()
        )));
    }
    Ok(())
}

/// Block argmax for one vehicle inside one subframe, lowest index on ties.
fn block_argmax(weights: &WeightMatrix, partition: &MacroPartition, vehicle: usize, subframe: usize) -> usize {
    partition
        .block(subframe)
        .fold((subframe * partition.resources_per_subframe(), f64::NEG_INFINITY), |(bj, bw), j| {
            let w = weights.get(vehicle, j);
            if w > bw {
                (j, w)
            } else {
                (bj, bw)
            }
        })
        .0
}

/// Enumerates every injective vehicle -> subframe map in lexicographic
/// order. Given the subframe permutation, each vehicle's within-block
/// choice is independent, so the block argmax suffices for the value
/// optimum and the lowest-index argmax keeps ties lexicographic.
pub fn exhaustive_search(
    weights: &WeightMatrix,
    partition: &MacroPartition,
) -> Result<ResourceAssignment> {
    check_dims(weights, partition)?;
    let n = partition.n_subframes();
    if n > EXHAUSTIVE_MAX_N {
        return Err(Error::SizeLimit(format!(
            "exhaustive search is limited to N <= {EXHAUSTIVE_MAX_N}, got {n}"
        )));
    }

    let mut best: Option<ResourceAssignment> = None;
    let mut perm: Vec<usize> = (0..n).collect();
    loop {
        let resources: Vec<usize> = perm
            .iter()
            .enumerate()
            .map(|(i, &a)| block_argmax(weights, partition, i, a))
            .collect();
        let candidate = ResourceAssignment::from_resources(resources, weights, partition);
        let better = match &best {
            None => true,
            Some(b) => {
                candidate.value > b.value
                    || (candidate.value == b.value
                        && candidate.vehicle_to_resource < b.vehicle_to_resource)
            }
        };
        if better {
            best = Some(candidate);
        }
        if !next_permutation(&mut perm) {
            break;
        }
    }
    Ok(best.expect("N >= 1 guarantees at least one permutation"))
}

fn next_permutation(perm: &mut [usize]) -> bool {
    let n = perm.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && perm[i - 1] >= perm[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while perm[j] <= perm[i - 1] {
        j -= 1;
    }
    perm.swap(i - 1, j);
    perm[i..].reverse();
    true
}

/// First-come first-served: vehicles in index order, each taking its
/// best resource among subframes still unused, ties to the lowest
/// resource index.
pub fn greedy_assign(
    weights: &WeightMatrix,
    partition: &MacroPartition,
) -> Result<ResourceAssignment> {
    check_dims(weights, partition)?;
    let n = partition.n_subframes();
    let mut subframe_used = vec![false; n];
    let mut resources = Vec::with_capacity(n);
    for vehicle in 0..n {
        let mut best_j = usize::MAX;
        let mut best_w = f64::NEG_INFINITY;
        for a in 0..n {
            if subframe_used[a] {
                continue;
            }
            for j in partition.block(a) {
                let w = weights.get(vehicle, j);
                if w > best_w {
                    best_w = w;
                    best_j = j;
                }
            }
        }
        subframe_used[partition.subframe_of(best_j)] = true;
        resources.push(best_j);
    }
    Ok(ResourceAssignment::from_resources(
        resources, weights, partition,
    ))
}

/// Uniform random subframe permutation, then a uniform resource within
/// each assigned subframe. Conflict-free by construction and fully
/// determined by the seed.
pub fn random_assign(
    weights: &WeightMatrix,
    partition: &MacroPartition,
    seed: u64,
) -> Result<ResourceAssignment> {
    check_dims(weights, partition)?;
    let n = partition.n_subframes();
    let k = partition.resources_per_subframe();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut subframes: Vec<usize> = (0..n).collect();
    subframes.shuffle(&mut rng);
    let resources: Vec<usize> = subframes
        .iter()
        .map(|&a| a * k + rng.gen_range(0..k))
        .collect();
    Ok(ResourceAssignment::from_resources(
        resources, weights, partition,
    ))
}
