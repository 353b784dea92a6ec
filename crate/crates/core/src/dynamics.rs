//! Closed unitary dynamics of system, apparatus and environment.
//!
//! The total Hamiltonian is
//! `H = I_S ⊗ H_A ⊗ I_E + I_S ⊗ I_A ⊗ H_E + λ I_S ⊗ V`, with `H_A`, `H_E`
//! diagonal and `V` a GUE sample on `A ⊗ E`. The system carries no dynamics
//! of its own and does not couple to the environment.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::operator::{
    hermitian_eig, identity, tensor_product, ComplexMatrix, DensityMatrix, HermitianEigen,
    HermitianMatrix, SubsystemDims,
};
use crate::seeding::{self, Stream};
use crate::states::ApparatusPartition;

/// Closed interval `[lo, hi]` of energies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyBand {
    pub lo: f64,
    pub hi: f64,
}

impl EnergyBand {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite()) || lo > hi {
            return Err(Error::invalid(format!("invalid energy band [{lo}, {hi}]")));
        }
        Ok(Self { lo, hi })
    }

    /// `n` levels evenly spread over the band; a single level sits at the centre.
    pub fn levels(&self, n: usize) -> Vec<f64> {
        match n {
            0 => vec![],
            1 => vec![0.5 * (self.lo + self.hi)],
            _ => {
                let step = (self.hi - self.lo) / (n - 1) as f64;
                (0..n).map(|i| self.lo + step * i as f64).collect()
            }
        }
    }
}

/// Energy bands for the two apparatus groups and the environment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyBands {
    pub group_a: EnergyBand,
    pub group_b: EnergyBand,
    pub env: EnergyBand,
}

impl Default for EnergyBands {
    fn default() -> Self {
        Self {
            group_a: EnergyBand { lo: 0.0, hi: 0.1 },
            group_b: EnergyBand { lo: 5.0, hi: 5.1 },
            env: EnergyBand { lo: 2.45, hi: 2.65 },
        }
    }
}

/// Everything that determines the total Hamiltonian.
#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianSpec {
    partition: ApparatusPartition,
    group_a_energies: Vec<f64>,
    group_b_energies: Vec<f64>,
    env_energies: Vec<f64>,
    lambda: f64,
    seed: u64,
}

fn bounds(xs: &[f64]) -> (f64, f64) {
    xs.iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
            (lo.min(x), hi.max(x))
        })
}

impl HamiltonianSpec {
    pub fn new(
        partition: ApparatusPartition,
        group_a_energies: Vec<f64>,
        group_b_energies: Vec<f64>,
        env_energies: Vec<f64>,
        lambda: f64,
        seed: u64,
    ) -> Result<Self> {
        for (name, got, want) in [
            ("group a", group_a_energies.len(), partition.n1()),
            ("group b", group_b_energies.len(), partition.n2()),
        ] {
            if got != want {
                return Err(Error::invalid(format!(
                    "{name} has {got} energies for {want} states"
                )));
            }
        }
        if env_energies.is_empty() {
            return Err(Error::invalid("environment needs at least one level"));
        }
        if !lambda.is_finite() || lambda < 0.0 {
            return Err(Error::invalid(format!("coupling {lambda} must be >= 0")));
        }
        let all = group_a_energies
            .iter()
            .chain(&group_b_energies)
            .chain(&env_energies);
        if all.clone().any(|x| !x.is_finite()) {
            return Err(Error::invalid("energies must be finite"));
        }
        let (_, a_hi) = bounds(&group_a_energies);
        let (b_lo, _) = bounds(&group_b_energies);
        let (e_lo, e_hi) = bounds(&env_energies);
        if a_hi >= b_lo {
            return Err(Error::invalid(format!(
                "group a (up to {a_hi}) must lie below group b (from {b_lo})"
            )));
        }
        if e_lo <= a_hi || e_hi >= b_lo {
            return Err(Error::invalid(format!(
                "environment levels [{e_lo}, {e_hi}] must lie strictly inside the gap ({a_hi}, {b_lo})"
            )));
        }
        Ok(Self {
            partition,
            group_a_energies,
            group_b_energies,
            env_energies,
            lambda,
            seed,
        })
    }

    /// Levels evenly spread over the given bands.
    pub fn from_bands(
        partition: ApparatusPartition,
        n_e: usize,
        bands: EnergyBands,
        lambda: f64,
        seed: u64,
    ) -> Result<Self> {
        Self::new(
            partition,
            bands.group_a.levels(partition.n1()),
            bands.group_b.levels(partition.n2()),
            bands.env.levels(n_e),
            lambda,
            seed,
        )
    }

    pub fn partition(&self) -> ApparatusPartition {
        self.partition
    }

    pub fn n_e(&self) -> usize {
        self.env_energies.len()
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn env_energies(&self) -> &[f64] {
        &self.env_energies
    }

    pub fn dims(&self) -> SubsystemDims {
        SubsystemDims::new(2, self.partition.dim(), self.n_e()).expect("nonzero dims")
    }

    fn apparatus_energies(&self) -> Vec<f64> {
        let mut out = self.group_a_energies.clone();
        out.extend_from_slice(&self.group_b_energies);
        out
    }
}

/// Uniform time grid from 0 to `t_max`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolutionPlan {
    t_max: f64,
    n_samples: usize,
}

impl EvolutionPlan {
    pub fn new(t_max: f64, n_samples: usize) -> Result<Self> {
        if n_samples < 2 {
            return Err(Error::invalid(format!(
                "need at least two time samples, got {n_samples}"
            )));
        }
        if !(t_max.is_finite() && t_max > 0.0) {
            return Err(Error::invalid(format!(
                "t_max must be positive, got {t_max}"
            )));
        }
        Ok(Self { t_max, n_samples })
    }

    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    pub fn n_samples(&self) -> usize {
        self.n_samples
    }

    pub fn times(&self) -> Vec<f64> {
        let step = self.t_max / (self.n_samples - 1) as f64;
        (0..self.n_samples).map(|i| step * i as f64).collect()
    }
}

impl Default for EvolutionPlan {
    fn default() -> Self {
        Self {
            t_max: 2000.0,
            n_samples: 400,
        }
    }
}

/// GUE sample: real N(0,1) diagonal, complex off-diagonal entries with
/// independent real and imaginary parts of variance 1/2.
pub fn sample_gue<R: Rng + ?Sized>(n: usize, rng: &mut R) -> HermitianMatrix {
    let mut m = ComplexMatrix::zeros(n, n);
    let half = std::f64::consts::FRAC_1_SQRT_2;
    for i in 0..n {
        m[(i, i)] = Complex64::new(rng.sample(StandardNormal), 0.0);
        for j in (i + 1)..n {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            let z = Complex64::new(re * half, im * half);
            m[(i, j)] = z;
            m[(j, i)] = z.conj();
        }
    }
    HermitianMatrix::symmetrized(m)
}

fn real_diag(xs: &[f64]) -> ComplexMatrix {
    ComplexMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        xs.len(),
        xs.iter().map(|&x| Complex64::new(x, 0.0)),
    ))
}

/// The apparatus-environment part `H_A ⊗ I_E + I_A ⊗ H_E + λ V`.
pub fn apparatus_environment_hamiltonian(spec: &HamiltonianSpec) -> HermitianMatrix {
    let n_a = spec.partition.dim();
    let n_e = spec.n_e();
    let mut rng = seeding::stream(spec.seed, Stream::Interaction);
    let v = sample_gue(n_a * n_e, &mut rng);
    let h = tensor_product(&real_diag(&spec.apparatus_energies()), &identity(n_e))
        + tensor_product(&identity(n_a), &real_diag(&spec.env_energies))
        + v.matrix() * Complex64::new(spec.lambda, 0.0);
    HermitianMatrix::symmetrized(h)
}

/// Total Hamiltonian on `S ⊗ A ⊗ E`.
pub fn build_hamiltonian(spec: &HamiltonianSpec) -> HermitianMatrix {
    let h_ae = apparatus_environment_hamiltonian(spec);
    HermitianMatrix::symmetrized(tensor_product(&identity(2), h_ae.matrix()))
}

/// Uniform mixture over the environment levels.
pub fn environment_band_state(spec: &HamiltonianSpec) -> DensityMatrix {
    DensityMatrix::maximally_mixed(
        SubsystemDims::new(1, 1, spec.n_e()).expect("environment has at least one level"),
    )
}

/// Unitary evolution of a fixed initial state under a fixed Hamiltonian.
///
/// The Hamiltonian is diagonalized once; the initial state is kept in the
/// energy eigenbasis so that each time sample costs one matrix product.
#[derive(Debug, Clone)]
pub struct Evolution {
    eigen: HermitianEigen,
    rotated: ComplexMatrix,
    dims: SubsystemDims,
}

impl Evolution {
    pub fn new(h: &HermitianMatrix, rho0: &DensityMatrix) -> Result<Self> {
        if h.dim() != rho0.dim() {
            return Err(Error::DimensionMismatch {
                expected: h.dim(),
                actual: rho0.dim(),
            });
        }
        let eigen = hermitian_eig(h)?;
        let rotated = eigen.vectors.adjoint() * rho0.matrix() * &eigen.vectors;
        Ok(Self {
            eigen,
            rotated,
            dims: rho0.dims(),
        })
    }

    pub fn dims(&self) -> SubsystemDims {
        self.dims
    }

    pub fn eigen(&self) -> &HermitianEigen {
        &self.eigen
    }

    pub fn propagator(&self, t: f64) -> ComplexMatrix {
        self.eigen.propagator(t)
    }

    /// `V D(t) rho~ D(t)^H`, i.e. `V` times the phase-rotated eigenbasis state.
    fn left_factor(&self, t: f64) -> ComplexMatrix {
        let phases: Vec<Complex64> = self
            .eigen
            .values
            .iter()
            .map(|&x| Complex64::from_polar(1.0, -x * t))
            .collect();
        let n = phases.len();
        let x = ComplexMatrix::from_fn(n, n, |j, k| {
            self.rotated[(j, k)] * phases[j] * phases[k].conj()
        });
        &self.eigen.vectors * x
    }

    /// Full state `U(t) rho(0) U(t)^H`.
    pub fn full_state(&self, t: f64) -> ComplexMatrix {
        self.left_factor(t) * self.eigen.vectors.adjoint()
    }

    /// `tr_E U(t) rho(0) U(t)^H`, validated as a density matrix.
    pub fn reduced_state(&self, t: f64) -> Result<DensityMatrix> {
        let w = self.left_factor(t);
        let v = &self.eigen.vectors;
        let n_e = self.dims.e();
        let n_sa = self.dims.s() * self.dims.a();
        let mut out = ComplexMatrix::zeros(n_sa, n_sa);
        let rows = |e: usize| (0..n_sa).map(move |i| i * n_e + e).collect::<Vec<_>>();
        for e in 0..n_e {
            let idx = rows(e);
            let w_e = w.select_rows(&idx);
            let v_e = v.select_rows(&idx);
            out += w_e * v_e.adjoint();
        }
        let dims = self.dims.without(crate::operator::Subsystem::E);
        DensityMatrix::new(out, dims).map_err(|e| {
            Error::Internal(format!(
                "reduced state at t = {t} is not a density matrix: {e}"
            ))
        })
    }
}

/// Evolve `rho_sa0 ⊗ rho_e0` and return the reduced system-apparatus state at
/// every time of the plan.
pub fn evolve_reduced(
    h: &HermitianMatrix,
    rho_sa0: &DensityMatrix,
    rho_e0: &DensityMatrix,
    plan: &EvolutionPlan,
) -> Result<Vec<(f64, DensityMatrix)>> {
    let rho0 = DensityMatrix::product(rho_sa0, rho_e0)?;
    let evolution = Evolution::new(h, &rho0)?;
    evolution.reduced_series(&plan.times())
}

impl Evolution {
    /// Reduced states at the given times, evaluated in parallel.
    pub fn reduced_series(&self, times: &[f64]) -> Result<Vec<(f64, DensityMatrix)>> {
        times
            .par_iter()
            .map(|&t| Ok((t, self.reduced_state(t)?)))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::operator::{max_abs, Subsystem};
    use crate::states::*;

    fn small_spec(lambda: f64) -> HamiltonianSpec {
        HamiltonianSpec::from_bands(
            ApparatusPartition::new(2, 3).unwrap(),
            4,
            EnergyBands::default(),
            lambda,
            5,
        )
        .unwrap()
    }

    fn initial(spec: &HamiltonianSpec, seed: u64) -> DensityMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pt = spec.partition();
        let p = sample_weights(pt.n1(), &mut rng).unwrap();
        let q = sample_weights(pt.n2(), &mut rng).unwrap();
        pure_mixed_entangled(MeasurementCoefficients::balanced(), &p, &q, pt).unwrap()
    }

    #[test]
    fn gue_is_exactly_hermitian_and_deterministic() {
        let a = sample_gue(30, &mut ChaCha8Rng::seed_from_u64(1));
        let b = sample_gue(30, &mut ChaCha8Rng::seed_from_u64(1));
        assert_eq!(a, b);
        let m = a.matrix();
        for i in 0..30 {
            for j in 0..30 {
                assert_eq!(m[(i, j)], m[(j, i)].conj());
            }
        }
    }

    #[test]
    fn gue_semicircle_support() {
        let n = 200;
        let h = sample_gue(n, &mut ChaCha8Rng::seed_from_u64(2));
        let eig = hermitian_eig(&h).unwrap();
        let edge = 2.1 * (n as f64).sqrt();
        let inside = eig.values.iter().filter(|x| x.abs() <= edge).count();
        assert!(inside as f64 >= 0.95 * n as f64);
    }

    #[test]
    fn spec_validation() {
        let pt = ApparatusPartition::new(1, 2).unwrap();
        // environment outside the gap
        let bad = EnergyBands {
            env: EnergyBand { lo: 0.05, hi: 1.0 },
            ..EnergyBands::default()
        };
        assert!(HamiltonianSpec::from_bands(pt, 3, bad, 0.04, 0).is_err());
        // overlapping groups
        let bad = EnergyBands {
            group_b: EnergyBand { lo: 0.05, hi: 0.2 },
            ..EnergyBands::default()
        };
        assert!(HamiltonianSpec::from_bands(pt, 3, bad, 0.04, 0).is_err());
        assert!(
            HamiltonianSpec::new(pt, vec![0.0, 0.1], vec![2.0, 2.1], vec![1.0], 0.04, 0).is_err()
        );
        assert!(HamiltonianSpec::from_bands(pt, 0, EnergyBands::default(), 0.04, 0).is_err());
        assert!(EvolutionPlan::new(10.0, 1).is_err());
        assert!(EvolutionPlan::new(0.0, 10).is_err());
    }

    #[test]
    fn plan_grid() {
        let t = EvolutionPlan::new(2.0, 5).unwrap().times();
        assert_eq!(t, vec![0.0, 0.5, 1.0, 1.5, 2.0]);
    }

    #[test]
    fn default_configuration_dimension() {
        let spec = HamiltonianSpec::from_bands(
            ApparatusPartition::new(3, 4).unwrap(),
            22,
            EnergyBands::default(),
            0.04,
            1,
        )
        .unwrap();
        assert_eq!(build_hamiltonian(&spec).dim(), 308);
        let env = environment_band_state(&spec);
        assert_eq!(env.dim(), 22);
        assert!((env.matrix()[(3, 3)].re - 1.0 / 22.0).abs() < 1e-16);
    }

    #[test]
    fn hamiltonian_has_no_system_coherence() {
        let spec = small_spec(0.3);
        let h = build_hamiltonian(&spec);
        let dims = spec.dims();
        let n = dims.a() * dims.e();
        for i in 0..n {
            for j in 0..n {
                assert_eq!(h.matrix()[(i, n + j)], Complex64::new(0.0, 0.0));
            }
        }
    }

    #[test]
    fn uncoupled_hamiltonian_is_diagonal_and_conserves_populations() {
        let spec = small_spec(0.0);
        let h = build_hamiltonian(&spec);
        let m = h.matrix();
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                if i != j {
                    assert_eq!(m[(i, j)], Complex64::new(0.0, 0.0));
                }
            }
        }
        let rho_sa = initial(&spec, 3);
        let plan = EvolutionPlan::new(50.0, 6).unwrap();
        let series = evolve_reduced(&h, &rho_sa, &environment_band_state(&spec), &plan).unwrap();
        let p0 = populations(&rho_sa);
        for (_, rho) in &series {
            assert!((populations(rho) - &p0).amax() < 1e-10);
        }
    }

    #[test]
    fn first_sample_is_initial_state() {
        let spec = small_spec(0.2);
        let h = build_hamiltonian(&spec);
        let rho_sa = initial(&spec, 4);
        let plan = EvolutionPlan::new(10.0, 3).unwrap();
        let series = evolve_reduced(&h, &rho_sa, &environment_band_state(&spec), &plan).unwrap();
        assert_eq!(series[0].0, 0.0);
        assert!(max_abs(&(series[0].1.matrix() - rho_sa.matrix())) < 1e-12);
    }

    #[test]
    fn system_marginal_is_frozen() {
        let spec = small_spec(0.5);
        let h = build_hamiltonian(&spec);
        let rho_sa = initial(&spec, 5);
        let s0 = rho_sa.reduce(Subsystem::A).unwrap();
        let plan = EvolutionPlan::new(40.0, 9).unwrap();
        for (_, rho) in evolve_reduced(&h, &rho_sa, &environment_band_state(&spec), &plan).unwrap()
        {
            let s = rho.reduce(Subsystem::A).unwrap();
            assert!(max_abs(&(s.matrix() - s0.matrix())) < 1e-9);
        }
    }

    #[test]
    fn full_state_spectrum_is_invariant() {
        let spec = small_spec(0.3);
        let h = build_hamiltonian(&spec);
        let rho0 =
            DensityMatrix::product(&initial(&spec, 6), &environment_band_state(&spec)).unwrap();
        let evo = Evolution::new(&h, &rho0).unwrap();
        let before = rho0.eigen().unwrap().values;
        for t in [0.0, 1.5, 37.0, 400.0] {
            let after = hermitian_eig(&HermitianMatrix::new(evo.full_state(t)).unwrap())
                .unwrap()
                .values;
            assert!((&after - &before).amax() < 1e-9);
        }
    }

    #[test]
    fn evolution_is_deterministic() {
        let spec = small_spec(0.3);
        let rho_sa = initial(&spec, 7);
        let plan = EvolutionPlan::new(20.0, 4).unwrap();
        let run = || {
            evolve_reduced(
                &build_hamiltonian(&spec),
                &rho_sa,
                &environment_band_state(&spec),
                &plan,
            )
            .unwrap()
        };
        let a = run();
        let b = run();
        for ((_, x), (_, y)) in a.iter().zip(&b) {
            assert_eq!(x.matrix(), y.matrix());
        }
    }

    #[test]
    fn dimension_mismatch() {
        let spec = small_spec(0.3);
        let h = build_hamiltonian(&spec);
        let wrong = DensityMatrix::maximally_mixed(SubsystemDims::new(1, 1, 3).unwrap());
        let plan = EvolutionPlan::new(1.0, 2).unwrap();
        assert!(evolve_reduced(&h, &initial(&spec, 1), &wrong, &plan).is_err());
    }
}
