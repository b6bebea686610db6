//! Simulation instance generation: clusters of vehicles, per-(vehicle,
//! resource) SINR draws, Shannon-style rate weights and dummy-vehicle
//! padding.
//!
//! The channel is intentionally simple: i.i.d. SINR in dB per edge, with
//! inter-cluster interference folded into the distribution. Defaults
//! (18 dB mean, 4 dB std, B = 1.26 MHz) put rates in the handful of
//! Mbit/s range.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matching::WeightMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SinrDistribution {
    /// Gaussian in dB (log-normal in linear scale).
    Gaussian,
    /// Uniform in dB over [mean_db - std_db, mean_db + std_db].
    Uniform,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SinrModel {
    pub distribution: SinrDistribution,
    pub mean_db: f64,
    pub std_db: f64,
}

impl Default for SinrModel {
    fn default() -> Self {
        Self {
            distribution: SinrDistribution::Gaussian,
            mean_db: 18.0,
            std_db: 4.0,
        }
    }
}

fn default_bandwidth_mhz() -> f64 {
    1.26
}

fn default_message_rate_hz() -> f64 {
    10.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub vehicles_per_cluster: usize,
    pub n_clusters: usize,
    pub n_subframes: usize,
    pub resources_per_subframe: usize,
    #[serde(default = "default_bandwidth_mhz")]
    pub bandwidth_mhz: f64,
    #[serde(default)]
    pub sinr_model: SinrModel,
    #[serde(default = "default_message_rate_hz")]
    pub message_rate_hz: f64,
    pub seed: u64,
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        if self.vehicles_per_cluster == 0
            || self.n_clusters == 0
            || self.n_subframes == 0
            || self.resources_per_subframe == 0
        {
            return Err(Error::InvalidConfig("all counts must be >= 1".into()));
        }
        if self.n_subframes < self.vehicles_per_cluster {
            return Err(Error::InvalidConfig(format!(
                "{} vehicles per cluster exceed the {} available subframes",
                self.vehicles_per_cluster, self.n_subframes
            )));
        }
        if !(self.bandwidth_mhz > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "bandwidth must be > 0, got {}",
                self.bandwidth_mhz
            )));
        }
        if !(self.sinr_model.std_db >= 0.0) || !self.sinr_model.mean_db.is_finite() {
            return Err(Error::InvalidConfig("malformed SINR model".into()));
        }
        Ok(())
    }
}

/// One cluster after padding: an n_subframes x (K * n_subframes) weight
/// matrix whose trailing rows are all-zero dummies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterInstance {
    pub n_real_vehicles: usize,
    pub weights: WeightMatrix,
    pub dummy_mask: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub clusters: Vec<ClusterInstance>,
    pub seed: u64,
}

/// Shannon-style rate: B * log2(1 + SINR), in Mbit/s when B is in MHz.
pub fn compute_weight(sinr_linear: f64, bandwidth_mhz: f64) -> Result<f64> {
    if !(sinr_linear >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "SINR must be >= 0, got {sinr_linear}"
        )));
    }
    if !(bandwidth_mhz > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "bandwidth must be > 0, got {bandwidth_mhz}"
        )));
    }
    Ok(bandwidth_mhz * (1.0 + sinr_linear).log2())
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Appends all-zero dummy rows until the matrix has `target_rows` rows.
pub fn pad_cluster(weights: &WeightMatrix, target_rows: usize) -> Result<WeightMatrix> {
    if weights.n_rows() > target_rows {
        return Err(Error::Overload {
            vehicles: weights.n_rows(),
            subframes: target_rows,
        });
    }
    if weights.n_rows() == target_rows {
        return Ok(weights.clone());
    }
    let mut entries = weights.entries().to_vec();
    entries.resize(target_rows * weights.n_cols(), 0.0);
    WeightMatrix::new(
        target_rows,
        weights.n_cols(),
        entries,
        weights.bandwidth_mhz(),
    )
}

fn sample_sinr_db(model: &SinrModel, rng: &mut ChaCha8Rng) -> f64 {
    match model.distribution {
        SinrDistribution::Gaussian => {
            // std_db == 0 degenerates to the mean
            if model.std_db == 0.0 {
                model.mean_db
            } else {
                Normal::new(model.mean_db, model.std_db)
                    .expect("std_db validated finite and >= 0")
                    .sample(rng)
            }
        }
        SinrDistribution::Uniform => {
            if model.std_db == 0.0 {
                model.mean_db
            } else {
                rng.gen_range(model.mean_db - model.std_db..=model.mean_db + model.std_db)
            }
        }
    }
}

/// Draws one scenario. Each cluster uses its own ChaCha stream derived
/// from the seed, so clusters are independent and removing one leaves the
/// others bit-identical.
pub fn generate_scenario(config: &ScenarioConfig) -> Result<Scenario> {
    config.validate()?;
    let n = config.n_subframes;
    let k = config.resources_per_subframe;
    let mut clusters = Vec::with_capacity(config.n_clusters);
    for cluster_idx in 0..config.n_clusters {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        rng.set_stream(cluster_idx as u64 + 1);
        let mut rows = Vec::with_capacity(config.vehicles_per_cluster);
        for _ in 0..config.vehicles_per_cluster {
            let row: Result<Vec<f64>> = (0..n * k)
                .map(|_| {
                    let db = sample_sinr_db(&config.sinr_model, &mut rng);
                    compute_weight(db_to_linear(db), config.bandwidth_mhz)
                })
                .collect();
            rows.push(row?);
        }
        let real = WeightMatrix::from_rows(&rows, config.bandwidth_mhz)?;
        let weights = pad_cluster(&real, n)?;
        let dummy_mask = (0..n).map(|i| i >= config.vehicles_per_cluster).collect();
        clusters.push(ClusterInstance {
            n_real_vehicles: config.vehicles_per_cluster,
            weights,
            dummy_mask,
        });
    }
    Ok(Scenario {
        clusters,
        seed: config.seed,
    })
}
