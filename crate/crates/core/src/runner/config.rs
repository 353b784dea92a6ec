//! Flat `key = value` experiment configuration.
//!
//! ```text
//! # Fig. 1 parameters
//! partition.n1 = 3
//! partition.n2 = 4
//! weights.mode = explicit
//! weights.p = 0.2, 0.3, 0.5
//! ```
//!
//! Lines are trimmed, `#` starts a comment, dotted keys group related
//! settings. Unknown and repeated keys are errors.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use num_complex::Complex64;

use crate::dynamics::{EnergyBand, EnergyBands, EvolutionPlan, HamiltonianSpec};
use crate::error::{Error, Result};
use crate::separability::SearchConfig;
use crate::states::{ApparatusPartition, MeasurementCoefficients, WeightVector};

/// Seed used when neither the config, the command line nor the environment supplies one.
pub const DEFAULT_SEED: u64 = 1;

pub const KEYS: &[&str] = &[
    "partition.n1",
    "partition.n2",
    "n_e",
    "lambda",
    "c1.re",
    "c1.im",
    "c2.re",
    "c2.im",
    "weights.mode",
    "weights.p",
    "weights.q",
    "energy.group_a.lo",
    "energy.group_a.hi",
    "energy.group_b.lo",
    "energy.group_b.hi",
    "energy.env.lo",
    "energy.env.hi",
    "evolution.t_max",
    "evolution.n_samples",
    "seed",
    "output.path",
    "output.format",
    "search.n_candidates",
    "search.max_iterations",
    "search.convergence_tol",
];

#[derive(Debug, Clone, PartialEq)]
pub enum WeightMode {
    /// Flat-Dirichlet weights drawn from the seed.
    Random,
    Explicit {
        p: Vec<f64>,
        q: Vec<f64>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(Error::config(
                "output.format",
                format!("expected csv or json, got `{other}`"),
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub n1: usize,
    pub n2: usize,
    pub n_e: usize,
    pub lambda: f64,
    pub c1: Complex64,
    pub c2: Complex64,
    pub weights: WeightMode,
    pub bands: EnergyBands,
    pub t_max: f64,
    pub n_samples: usize,
    /// `None` defers to the caller's fallback chain, ending at [`DEFAULT_SEED`].
    pub seed: Option<u64>,
    pub output_path: Option<PathBuf>,
    pub output_format: OutputFormat,
    pub n_candidates: usize,
    pub max_iterations: usize,
    pub convergence_tol: f64,
}

/// Fig. 1 parameters.
impl Default for ExperimentConfig {
    fn default() -> Self {
        let plan = EvolutionPlan::default();
        let search = SearchConfig::default();
        Self {
            n1: 3,
            n2: 4,
            n_e: 22,
            lambda: 0.04,
            c1: Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0),
            c2: Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0),
            weights: WeightMode::Random,
            bands: EnergyBands::default(),
            t_max: plan.t_max(),
            n_samples: plan.n_samples(),
            seed: None,
            output_path: None,
            output_format: OutputFormat::Csv,
            n_candidates: search.n_candidates,
            max_iterations: search.max_iterations,
            convergence_tol: search.convergence_tol,
        }
    }
}

/// Validated building blocks of an experiment.
#[derive(Debug, Clone)]
pub struct Setup {
    pub partition: ApparatusPartition,
    pub coefficients: MeasurementCoefficients,
    pub explicit_weights: Option<(WeightVector, WeightVector)>,
    pub hamiltonian: HamiltonianSpec,
    pub plan: EvolutionPlan,
    pub search: SearchConfig,
    pub seed: u64,
}

fn parse_value<T: FromStr>(key: &str, raw: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    raw.parse::<T>()
        .map_err(|e| Error::config(key, format!("cannot parse `{raw}`: {e}")))
}

fn parse_list(key: &str, raw: &str) -> Result<Vec<f64>> {
    if raw.is_empty() {
        return Err(Error::config(key, "empty list"));
    }
    raw.split(',').map(|x| parse_value(key, x.trim())).collect()
}

fn as_config(key: &str) -> impl Fn(Error) -> Error + '_ {
    move |e| Error::config(key, e.to_string())
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        let mut seen: Vec<String> = Vec::new();
        let mut mode: Option<String> = None;
        let mut p: Option<Vec<f64>> = None;
        let mut q: Option<Vec<f64>> = None;

        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::config(
                    format!("line {}", lineno + 1),
                    format!("expected key = value, got `{line}`"),
                )
            })?;
            let (key, value) = (key.trim(), value.trim());
            if !KEYS.contains(&key) {
                return Err(Error::config(key, "unknown key"));
            }
            if seen.iter().any(|k| k == key) {
                return Err(Error::config(key, "given more than once"));
            }
            seen.push(key.to_string());

            match key {
                "partition.n1" => cfg.n1 = parse_value(key, value)?,
                "partition.n2" => cfg.n2 = parse_value(key, value)?,
                "n_e" => cfg.n_e = parse_value(key, value)?,
                "lambda" => cfg.lambda = parse_value(key, value)?,
                "c1.re" => cfg.c1.re = parse_value(key, value)?,
                "c1.im" => cfg.c1.im = parse_value(key, value)?,
                "c2.re" => cfg.c2.re = parse_value(key, value)?,
                "c2.im" => cfg.c2.im = parse_value(key, value)?,
                "weights.mode" => mode = Some(value.to_string()),
                "weights.p" => p = Some(parse_list(key, value)?),
                "weights.q" => q = Some(parse_list(key, value)?),
                "energy.group_a.lo" => cfg.bands.group_a.lo = parse_value(key, value)?,
                "energy.group_a.hi" => cfg.bands.group_a.hi = parse_value(key, value)?,
                "energy.group_b.lo" => cfg.bands.group_b.lo = parse_value(key, value)?,
                "energy.group_b.hi" => cfg.bands.group_b.hi = parse_value(key, value)?,
                "energy.env.lo" => cfg.bands.env.lo = parse_value(key, value)?,
                "energy.env.hi" => cfg.bands.env.hi = parse_value(key, value)?,
                "evolution.t_max" => cfg.t_max = parse_value(key, value)?,
                "evolution.n_samples" => cfg.n_samples = parse_value(key, value)?,
                "seed" => cfg.seed = Some(parse_value(key, value)?),
                "output.path" => cfg.output_path = Some(PathBuf::from(value)),
                "output.format" => cfg.output_format = value.parse()?,
                "search.n_candidates" => cfg.n_candidates = parse_value(key, value)?,
                "search.max_iterations" => cfg.max_iterations = parse_value(key, value)?,
                "search.convergence_tol" => cfg.convergence_tol = parse_value(key, value)?,
                _ => unreachable!("key list and match arms disagree"),
            }
        }

        cfg.weights = match mode.as_deref() {
            None | Some("random") => {
                for (key, given) in [("weights.p", p.is_some()), ("weights.q", q.is_some())] {
                    if given {
                        return Err(Error::config(
                            key,
                            "only allowed with weights.mode = explicit",
                        ));
                    }
                }
                WeightMode::Random
            }
            Some("explicit") => WeightMode::Explicit {
                p: p.ok_or_else(|| {
                    Error::config("weights.p", "required with weights.mode = explicit")
                })?,
                q: q.ok_or_else(|| {
                    Error::config("weights.q", "required with weights.mode = explicit")
                })?,
            },
            Some(other) => {
                return Err(Error::config(
                    "weights.mode",
                    format!("expected random or explicit, got `{other}`"),
                ))
            }
        };
        cfg.setup()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn effective_seed(&self) -> u64 {
        self.seed.unwrap_or(DEFAULT_SEED)
    }

    /// Check every cross-field constraint and assemble the typed pieces.
    /// All failures are reported as config errors naming the offending key.
    pub fn setup(&self) -> Result<Setup> {
        let seed = self.effective_seed();
        let partition =
            ApparatusPartition::new(self.n1, self.n2).map_err(as_config("partition"))?;
        let coefficients =
            MeasurementCoefficients::new(self.c1, self.c2).map_err(as_config("c1, c2"))?;
        let explicit_weights = match &self.weights {
            WeightMode::Random => None,
            WeightMode::Explicit { p, q } => {
                let p = WeightVector::new(p.clone()).map_err(as_config("weights.p"))?;
                let q = WeightVector::new(q.clone()).map_err(as_config("weights.q"))?;
                if p.len() != self.n1 {
                    return Err(Error::config(
                        "weights.p",
                        format!("{} weights for n1 = {}", p.len(), self.n1),
                    ));
                }
                if q.len() != self.n2 {
                    return Err(Error::config(
                        "weights.q",
                        format!("{} weights for n2 = {}", q.len(), self.n2),
                    ));
                }
                Some((p, q))
            }
        };
        let bands = EnergyBands {
            group_a: EnergyBand::new(self.bands.group_a.lo, self.bands.group_a.hi)
                .map_err(as_config("energy.group_a"))?,
            group_b: EnergyBand::new(self.bands.group_b.lo, self.bands.group_b.hi)
                .map_err(as_config("energy.group_b"))?,
            env: EnergyBand::new(self.bands.env.lo, self.bands.env.hi)
                .map_err(as_config("energy.env"))?,
        };
        if self.n_e == 0 {
            return Err(Error::config("n_e", "must be >= 1"));
        }
        let hamiltonian =
            HamiltonianSpec::from_bands(partition, self.n_e, bands, self.lambda, seed)
                .map_err(as_config("energy, lambda"))?;
        let plan =
            EvolutionPlan::new(self.t_max, self.n_samples).map_err(as_config("evolution"))?;
        let search = SearchConfig {
            n_candidates: self.n_candidates,
            max_iterations: self.max_iterations,
            convergence_tol: self.convergence_tol,
            seed,
        };
        search.validate().map_err(as_config("search"))?;
        Ok(Setup {
            partition,
            coefficients,
            explicit_weights,
            hamiltonian,
            plan,
            search,
            seed,
        })
    }
}
