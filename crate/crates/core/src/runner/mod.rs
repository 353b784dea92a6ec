//! End-to-end experiments: config in, diagnostics out.

mod config;
mod emit;

pub use config::{ExperimentConfig, OutputFormat, Setup, WeightMode, DEFAULT_SEED, KEYS};
pub use emit::{emit, format_number, to_csv, to_json, CSV_HEADER};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{build_hamiltonian, environment_band_state, evolve_reduced};
use crate::error::{Error, Result};
use crate::measures::{fidelity_distance, ppt_min_eigenvalue, DiagnosticSample};
use crate::operator::DensityMatrix;
use crate::seeding::{self, Stream};
use crate::separability::{hs_distance, nearest_separable};
use crate::states::{
    decohered_target, microcanonical_target, pure_mixed_entangled, sample_weights, WeightVector,
};

/// Diagnostics over the time grid, in time order.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TimeSeriesRecord {
    samples: Vec<DiagnosticSample>,
}

impl TimeSeriesRecord {
    /// Times must start at 0 and increase strictly. An empty record is allowed.
    pub fn new(samples: Vec<DiagnosticSample>) -> Result<Self> {
        if let Some(first) = samples.first() {
            if first.time != 0.0 {
                return Err(Error::invalid(format!(
                    "first sample at t = {}, expected 0",
                    first.time
                )));
            }
        }
        if samples
            .windows(2)
            .any(|w| w[1].time.is_nan() || w[1].time <= w[0].time)
        {
            return Err(Error::invalid("sample times must increase strictly"));
        }
        Ok(Self { samples })
    }

    pub fn samples(&self) -> &[DiagnosticSample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// The trailing `fraction` of samples (at least one when non-empty).
    pub fn late_window(&self, fraction: f64) -> &[DiagnosticSample] {
        let n = self.samples.len();
        let k = ((n as f64 * fraction).round() as usize).clamp(n.min(1), n);
        &self.samples[n - k..]
    }
}

/// Initial state and the two reference end states.
pub struct Targets {
    pub p: WeightVector,
    pub q: WeightVector,
    pub initial: DensityMatrix,
    pub decohered: DensityMatrix,
    pub microcanonical: DensityMatrix,
}

pub fn prepare_targets(setup: &Setup) -> Result<Targets> {
    let (p, q) = match &setup.explicit_weights {
        Some(pq) => pq.clone(),
        None => {
            let mut rng = seeding::stream(setup.seed, Stream::Weights);
            let p = sample_weights(setup.partition.n1(), &mut rng)?;
            let q = sample_weights(setup.partition.n2(), &mut rng)?;
            (p, q)
        }
    };
    let c = setup.coefficients;
    Ok(Targets {
        initial: pure_mixed_entangled(c, &p, &q, setup.partition)
            .map_err(|e| e.with_key("weights"))?,
        decohered: decohered_target(c, &p, &q, setup.partition)?,
        microcanonical: microcanonical_target(c, setup.partition)?,
        p,
        q,
    })
}

pub fn diagnose(time: f64, rho: &DensityMatrix, targets: &Targets) -> Result<DiagnosticSample> {
    let (min_ppt_eig, n_negative_ppt) = ppt_min_eigenvalue(rho)?;
    Ok(DiagnosticSample {
        time,
        dist_decohered: fidelity_distance(rho, &targets.decohered)?,
        dist_microcanonical: fidelity_distance(rho, &targets.microcanonical)?,
        min_ppt_eig,
        n_negative_ppt,
    })
}

pub fn run_decoherence_experiment(config: &ExperimentConfig) -> Result<TimeSeriesRecord> {
    let setup = config.setup()?;
    let targets = prepare_targets(&setup)?;
    let h = build_hamiltonian(&setup.hamiltonian);
    let env = environment_band_state(&setup.hamiltonian);
    let series = evolve_reduced(&h, &targets.initial, &env, &setup.plan)
        .map_err(|e| e.with_key("lambda"))?;
    let samples = series
        .par_iter()
        .map(|(t, rho)| diagnose(*t, rho, &targets).map_err(|e| e.with_key(format!("time {t}"))))
        .collect::<Result<Vec<_>>>()?;
    TimeSeriesRecord::new(samples)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchReport {
    pub seed: u64,
    /// HS distance from the pure-mixed state to the search result.
    pub hs_dist: f64,
    /// Fidelity distance from the pure-mixed state to the search result.
    pub fidelity_dist: f64,
    pub ensemble_size: usize,
    pub iterations: usize,
    /// HS distance from the search result to the decohered state.
    pub hs_to_decohered: f64,
    /// Fidelity distance from the search result to the decohered state.
    pub fidelity_to_decohered: f64,
    /// HS distance from the pure-mixed state to the decohered state, for scale.
    pub target_hs_to_decohered: f64,
}

pub fn run_separability_search(config: &ExperimentConfig) -> Result<SearchReport> {
    let setup = config.setup()?;
    let targets = prepare_targets(&setup)?;
    let out =
        nearest_separable(&targets.initial, &setup.search).map_err(|e| e.with_key("search"))?;
    let found = out.ensemble.to_density();
    Ok(SearchReport {
        seed: setup.seed,
        hs_dist: out.hs_dist,
        fidelity_dist: out.fidelity_dist,
        ensemble_size: out.ensemble.len(),
        iterations: out.iterations,
        hs_to_decohered: hs_distance(&found, &targets.decohered)?,
        fidelity_to_decohered: fidelity_distance(&found, &targets.decohered)?,
        target_hs_to_decohered: hs_distance(&targets.initial, &targets.decohered)?,
    })
}
