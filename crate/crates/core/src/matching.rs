//! Maximum-weight perfect matching on a square weight matrix.
//!
//! The solver runs the Kuhn-Munkres algorithm in O(n^3); a factorial
//! brute-force enumerator is kept alongside as an independent oracle.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense matrix of achievable rates (Mbit/s), vehicles on rows and
/// resources on columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightMatrix {
    n_rows: usize,
    n_cols: usize,
    entries: Vec<f64>,
    bandwidth_mhz: f64,
}

impl WeightMatrix {
    /// Builds a matrix from row-major entries. Entries must be finite and
    /// non-negative; rates are physical quantities and a negative value
    /// indicates an upstream bug rather than something to clamp.
    pub fn new(n_rows: usize, n_cols: usize, entries: Vec<f64>, bandwidth_mhz: f64) -> Result<Self> {
        if n_rows == 0 || n_cols == 0 {
            return Err(Error::Dimension(format!(
                "matrix must be at least 1x1, got {n_rows}x{n_cols}"
            )));
        }
        if entries.len() != n_rows * n_cols {
            return Err(Error::Dimension(format!(
                "expected {} entries for a {n_rows}x{n_cols} matrix, got {}",
                n_rows * n_cols,
                entries.len()
            )));
        }
        for (idx, &w) in entries.iter().enumerate() {
            if !w.is_finite() || w < 0.0 {
                return Err(Error::InvalidWeight(format!(
                    "entry ({}, {}) is {w}; weights must be finite and >= 0",
                    idx / n_cols,
                    idx % n_cols
                )));
            }
        }
        Ok(Self {
            n_rows,
            n_cols,
            entries,
            bandwidth_mhz,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>], bandwidth_mhz: f64) -> Result<Self> {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != n_cols) {
            return Err(Error::Dimension("ragged rows in weight matrix".into()));
        }
        let entries = rows.iter().flatten().copied().collect();
        Self::new(n_rows, n_cols, entries, bandwidth_mhz)
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn bandwidth_mhz(&self) -> f64 {
        self.bandwidth_mhz
    }

    pub fn is_square(&self) -> bool {
        self.n_rows == self.n_cols
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.entries[row * self.n_cols + col]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.entries[row * self.n_cols..(row + 1) * self.n_cols]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }
}

/// A perfect matching: `assignment[i]` is the column matched to row `i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerfectMatching {
    pub assignment: Vec<usize>,
    pub value: f64,
}

fn require_square(weights: &WeightMatrix) -> Result<usize> {
    if !weights.is_square() {
        return Err(Error::Dimension(format!(
            "expected a square matrix, got {}x{}",
            weights.n_rows(),
            weights.n_cols()
        )));
    }
    Ok(weights.n_rows())
}

/// Kuhn-Munkres on the cost matrix `max_entry - w`, i.e. maximization via
/// the classical minimization formulation. O(n^3), deterministic for a
/// fixed input.
pub fn solve_assignment(weights: &WeightMatrix) -> Result<PerfectMatching> {
    let n = require_square(weights)?;
    let max_entry = weights
        .entries()
        .iter()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max);
    let cost = |i: usize, j: usize| max_entry - weights.get(i, j);

    // Potential-based augmenting-path formulation with a virtual column n.
    let mut row_potential = vec![0.0_f64; n + 1];
    let mut col_potential = vec![0.0_f64; n + 1];
    // col_match[j] = row currently assigned to column j (n = unassigned sentinel).
    let mut col_match = vec![n; n + 1];
    let mut path_prev = vec![0_usize; n + 1];

    for row in 0..n {
        col_match[n] = row;
        let mut current_col = n;
        let mut min_slack = vec![f64::INFINITY; n + 1];
        let mut visited = vec![false; n + 1];

        loop {
            visited[current_col] = true;
            let active_row = col_match[current_col];
            let mut delta = f64::INFINITY;
            let mut next_col = n;
            for j in 0..n {
                if !visited[j] {
                    let slack = cost(active_row, j) - row_potential[active_row] - col_potential[j];
                    if slack < min_slack[j] {
                        min_slack[j] = slack;
                        path_prev[j] = current_col;
                    }
                    if min_slack[j] < delta {
                        delta = min_slack[j];
                        next_col = j;
                    }
                }
            }
            for j in 0..=n {
                if visited[j] {
                    row_potential[col_match[j]] += delta;
                    col_potential[j] -= delta;
                } else {
                    min_slack[j] -= delta;
                }
            }
            current_col = next_col;
            if col_match[current_col] == n {
                break;
            }
        }

        // Unwind the augmenting path.
        while current_col != n {
            let prev = path_prev[current_col];
            col_match[current_col] = col_match[prev];
            current_col = prev;
        }
    }

    let mut assignment = vec![0_usize; n];
    for j in 0..n {
        assignment[col_match[j]] = j;
    }
    let matching = PerfectMatching {
        value: 0.0,
        assignment,
    };
    let value = matching_value(weights, &matching)?;
    Ok(PerfectMatching {
        assignment: matching.assignment,
        value,
    })
}

const BRUTE_FORCE_MAX_N: usize = 10;

/// Enumerates all n! permutations in lexicographic order and keeps the best;
/// on value ties the first (lexicographically smallest) permutation wins.
pub fn brute_force_assignment(weights: &WeightMatrix) -> Result<PerfectMatching> {
    let n = require_square(weights)?;
    if n > BRUTE_FORCE_MAX_N {
        return Err(Error::SizeLimit(format!(
            "brute force is limited to n <= {BRUTE_FORCE_MAX_N}, got {n}"
        )));
    }

    let mut perm: Vec<usize> = (0..n).collect();
    let mut best: Option<PerfectMatching> = None;
    loop {
        let value: f64 = perm
            .iter()
            .enumerate()
            .map(|(i, &j)| weights.get(i, j))
            .sum();
        match &best {
            Some(b) if value <= b.value => {}
            _ => {
                best = Some(PerfectMatching {
                    assignment: perm.clone(),
                    value,
                });
            }
        }
        if !next_permutation(&mut perm) {
            break;
        }
    }
    Ok(best.expect("n >= 1 guarantees at least one permutation"))
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

/// Total weight collected by a matching: sum of the selected entries.
pub fn matching_value(weights: &WeightMatrix, m: &PerfectMatching) -> Result<f64> {
    let mut total = 0.0;
    for (i, &j) in m.assignment.iter().enumerate() {
        if i >= weights.n_rows() || j >= weights.n_cols() {
            return Err(Error::Bounds(format!(
                "matching entry ({i}, {j}) outside a {}x{} matrix",
                weights.n_rows(),
                weights.n_cols()
            )));
        }
        total += weights.get(i, j);
    }
    Ok(total)
}

/// Structural check of the one-to-one constraints. Violations are data,
/// not errors: an empty list means the assignment is a permutation of
/// {0, .., n-1}.
pub fn validate_perfect_matching(m: &PerfectMatching, n: usize) -> Vec<String> {
    let mut violations = Vec::new();
    if m.assignment.len() != n {
        violations.push(format!(
            "length mismatch: assignment has {} entries, expected {n}",
            m.assignment.len()
        ));
    }
    let mut seen = vec![false; n];
    for (i, &j) in m.assignment.iter().enumerate() {
        if j >= n {
            violations.push(format!("row {i}: column {j} out of range 0..{n}"));
        } else if seen[j] {
            violations.push(format!("duplicate column {j}"));
        } else {
            seen[j] = true;
        }
    }
    for (j, &used) in seen.iter().enumerate() {
        if !used && m.assignment.len() == n {
            violations.push(format!("column {j} unmatched"));
        }
    }
    violations
}
