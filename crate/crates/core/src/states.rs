//! System-apparatus states: the pure-mixed entangled initial state, its
//! pure-pure special case, and the two candidate separable end states.
//!
//! The system is a qubit with basis `|s1>, |s2>` (indices 0 and 1). The
//! apparatus basis lists the `n1` group-a microstates first, then the `n2`
//! group-b microstates.

use nalgebra::DVector;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::Exp1;

use crate::error::{Error, Result};
use crate::operator::{
    projector, tensor_product, ComplexMatrix, ComplexVector, DensityMatrix, SubsystemDims,
};

const NORM_TOL: f64 = 1e-12;

/// Amplitudes `c1, c2` of the measured system state `c1|s1> + c2|s2>`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementCoefficients {
    c1: Complex64,
    c2: Complex64,
}

impl MeasurementCoefficients {
    pub fn new(c1: Complex64, c2: Complex64) -> Result<Self> {
        let norm = c1.norm_sqr() + c2.norm_sqr();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::invalid(format!(
                "|c1|^2 + |c2|^2 = {norm}, expected 1"
            )));
        }
        Ok(Self { c1, c2 })
    }

    pub fn real(c1: f64, c2: f64) -> Result<Self> {
        Self::new(Complex64::new(c1, 0.0), Complex64::new(c2, 0.0))
    }

    /// `c1 = c2 = 1/sqrt(2)`
    pub fn balanced() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        Self {
            c1: Complex64::new(h, 0.0),
            c2: Complex64::new(h, 0.0),
        }
    }

    pub fn c1(&self) -> Complex64 {
        self.c1
    }

    pub fn c2(&self) -> Complex64 {
        self.c2
    }

    /// True when both amplitudes are nonzero, i.e. the state is entangled.
    pub fn is_entangling(&self) -> bool {
        self.c1.norm() > 0.0 && self.c2.norm() > 0.0
    }
}

/// Probability weights over the microstates of one apparatus group.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::invalid("weight vector is empty"));
        }
        if let Some(w) = weights.iter().find(|w| **w < 0.0 || !w.is_finite()) {
            return Err(Error::invalid(format!(
                "weight {w} is not a nonnegative number"
            )));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > NORM_TOL {
            return Err(Error::invalid(format!("weights sum to {sum}, expected 1")));
        }
        Ok(Self(weights))
    }

    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("weight vector needs at least one entry"));
        }
        Ok(Self(vec![1.0 / n as f64; n]))
    }

    /// Pure group state: all weight on microstate `index`.
    pub fn pure(n: usize, index: usize) -> Result<Self> {
        if index >= n {
            return Err(Error::invalid(format!(
                "index {index} out of range for {n} weights"
            )));
        }
        let mut w = vec![0.0; n];
        w[index] = 1.0;
        Ok(Self(w))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Sizes of the two groups of apparatus microstates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ApparatusPartition {
    n1: usize,
    n2: usize,
}

impl ApparatusPartition {
    pub fn new(n1: usize, n2: usize) -> Result<Self> {
        if n1 == 0 || n2 == 0 {
            return Err(Error::invalid(format!(
                "both apparatus groups need at least one state, got ({n1}, {n2})"
            )));
        }
        Ok(Self { n1, n2 })
    }

    pub fn n1(&self) -> usize {
        self.n1
    }

    pub fn n2(&self) -> usize {
        self.n2
    }

    pub fn dim(&self) -> usize {
        self.n1 + self.n2
    }

    pub fn size(&self, group: Group) -> usize {
        match group {
            Group::A => self.n1,
            Group::B => self.n2,
        }
    }

    /// First apparatus index of `group`.
    pub fn offset(&self, group: Group) -> usize {
        match group {
            Group::A => 0,
            Group::B => self.n1,
        }
    }

    /// Dimensions of the `S ⊗ A` space.
    pub fn dims(&self) -> SubsystemDims {
        SubsystemDims::bipartite(2, self.dim()).expect("partition dims are nonzero")
    }
}

/// Apparatus microstate group.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Group {
    A,
    B,
}

/// Apparatus vector supported on one group, entering the off-diagonal
/// (coherence) terms. Built from weights its norm is generally below one.
#[derive(Debug, Clone, PartialEq)]
pub struct OffDiagVector {
    partition: ApparatusPartition,
    group: Group,
    amplitudes: ComplexVector,
}

impl OffDiagVector {
    /// Arbitrary amplitudes over the microstates of `group`.
    pub fn new(
        partition: ApparatusPartition,
        group: Group,
        amplitudes: &[Complex64],
    ) -> Result<Self> {
        let n = partition.size(group);
        if amplitudes.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                actual: amplitudes.len(),
            });
        }
        let mut full = ComplexVector::zeros(partition.dim());
        let off = partition.offset(group);
        for (i, a) in amplitudes.iter().enumerate() {
            full[off + i] = *a;
        }
        Ok(Self {
            partition,
            group,
            amplitudes: full,
        })
    }

    /// The weights themselves used as amplitudes (not their square roots).
    pub fn from_weights(
        weights: &WeightVector,
        partition: ApparatusPartition,
        group: Group,
    ) -> Result<Self> {
        let amps: Vec<Complex64> = weights
            .as_slice()
            .iter()
            .map(|&w| Complex64::new(w, 0.0))
            .collect();
        Self::new(partition, group, &amps)
    }

    /// Vector over the full apparatus space.
    pub fn embedded(&self) -> &ComplexVector {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    pub fn group(&self) -> Group {
        self.group
    }
}

fn check_len(w: &WeightVector, partition: ApparatusPartition, group: Group) -> Result<()> {
    let n = partition.size(group);
    if w.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: w.len(),
        });
    }
    Ok(())
}

fn diag_on_group(w: &[f64], partition: ApparatusPartition, group: Group) -> ComplexMatrix {
    let n = partition.dim();
    let off = partition.offset(group);
    let mut m = ComplexMatrix::zeros(n, n);
    for (i, &x) in w.iter().enumerate() {
        m[(off + i, off + i)] = Complex64::new(x, 0.0);
    }
    m
}

/// `|s_i><s_j|` on the system qubit.
fn system_unit(i: usize, j: usize) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(2, 2);
    m[(i, j)] = Complex64::new(1.0, 0.0);
    m
}

/// `sum_i w_i |g_i><g_i|` on the full apparatus space, for one group.
pub fn mixed_apparatus_state(
    w: &WeightVector,
    partition: ApparatusPartition,
    group: Group,
) -> Result<DensityMatrix> {
    check_len(w, partition, group)?;
    let dims = SubsystemDims::new(1, partition.dim(), 1)?;
    Ok(DensityMatrix::trusted(
        diag_on_group(w.as_slice(), partition, group),
        dims,
    ))
}

/// `|c1|^2 |s1><s1| ⊗ rho_a + |c2|^2 |s2><s2| ⊗ rho_b`
fn diagonal_blocks(
    c: MeasurementCoefficients,
    rho_a: &ComplexMatrix,
    rho_b: &ComplexMatrix,
) -> ComplexMatrix {
    tensor_product(&system_unit(0, 0), rho_a) * Complex64::new(c.c1.norm_sqr(), 0.0)
        + tensor_product(&system_unit(1, 1), rho_b) * Complex64::new(c.c2.norm_sqr(), 0.0)
}

/// `c1 c2* |s1><s2| ⊗ |phi_a><phi_b| + h.c.`
fn coherence_blocks(
    c: MeasurementCoefficients,
    phi_a: &ComplexVector,
    phi_b: &ComplexVector,
) -> ComplexMatrix {
    let upper =
        tensor_product(&system_unit(0, 1), &(phi_a * phi_b.adjoint())) * (c.c1 * c.c2.conj());
    let lower = upper.adjoint();
    upper + lower
}

/// The pure-mixed entangled system-apparatus state.
pub fn pure_mixed_entangled(
    c: MeasurementCoefficients,
    p: &WeightVector,
    q: &WeightVector,
    partition: ApparatusPartition,
) -> Result<DensityMatrix> {
    check_len(p, partition, Group::A)?;
    check_len(q, partition, Group::B)?;
    let rho_a = diag_on_group(p.as_slice(), partition, Group::A);
    let rho_b = diag_on_group(q.as_slice(), partition, Group::B);
    let phi_a = OffDiagVector::from_weights(p, partition, Group::A)?;
    let phi_b = OffDiagVector::from_weights(q, partition, Group::B)?;
    let m = diagonal_blocks(c, &rho_a, &rho_b)
        + coherence_blocks(c, phi_a.embedded(), phi_b.embedded());
    DensityMatrix::new(m, partition.dims())
        .map_err(|e| Error::Internal(format!("pure-mixed state failed validation: {e}")))
}

/// Rank-one projector onto `c1|s1>|phi1> + c2|s2>|phi2>`.
pub fn pure_pure_entangled(
    c: MeasurementCoefficients,
    phi1: &OffDiagVector,
    phi2: &OffDiagVector,
) -> Result<DensityMatrix> {
    if phi1.group != Group::A || phi2.group != Group::B {
        return Err(Error::invalid(
            "phi1 must live on group a and phi2 on group b",
        ));
    }
    if phi1.partition != phi2.partition {
        return Err(Error::invalid("phi1 and phi2 use different partitions"));
    }
    for (name, phi) in [("phi1", phi1), ("phi2", phi2)] {
        if (phi.norm() - 1.0).abs() > NORM_TOL {
            return Err(Error::invalid(format!(
                "{name} has norm {}, expected 1",
                phi.norm()
            )));
        }
    }
    let s1 = ComplexVector::from_vec(vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]);
    let s2 = ComplexVector::from_vec(vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)]);
    let psi = s1.kronecker(phi1.embedded()) * c.c1 + s2.kronecker(phi2.embedded()) * c.c2;
    Ok(DensityMatrix::trusted(
        projector(&psi),
        phi1.partition.dims(),
    ))
}

/// Pure-pure state with its coherences deleted.
pub fn pure_pure_decohered(
    c: MeasurementCoefficients,
    phi1: &OffDiagVector,
    phi2: &OffDiagVector,
) -> Result<DensityMatrix> {
    // validates the inputs
    pure_pure_entangled(c, phi1, phi2)?;
    let m = diagonal_blocks(c, &projector(phi1.embedded()), &projector(phi2.embedded()));
    Ok(DensityMatrix::trusted(m, phi1.partition.dims()))
}

/// The pure-mixed state with its system coherences deleted.
pub fn decohered_target(
    c: MeasurementCoefficients,
    p: &WeightVector,
    q: &WeightVector,
    partition: ApparatusPartition,
) -> Result<DensityMatrix> {
    check_len(p, partition, Group::A)?;
    check_len(q, partition, Group::B)?;
    let m = diagonal_blocks(
        c,
        &diag_on_group(p.as_slice(), partition, Group::A),
        &diag_on_group(q.as_slice(), partition, Group::B),
    );
    Ok(DensityMatrix::trusted(m, partition.dims()))
}

/// Separable end state with each apparatus group uniformly mixed.
pub fn microcanonical_target(
    c: MeasurementCoefficients,
    partition: ApparatusPartition,
) -> Result<DensityMatrix> {
    let p = WeightVector::uniform(partition.n1)?;
    let q = WeightVector::uniform(partition.n2)?;
    decohered_target(c, &p, &q, partition)
}

/// Flat-Dirichlet (uniform on the simplex) weights.
pub fn sample_weights<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<WeightVector> {
    if n == 0 {
        return Err(Error::invalid("cannot sample an empty weight vector"));
    }
    let draws: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let total: f64 = draws.iter().sum();
    Ok(WeightVector(draws.into_iter().map(|x| x / total).collect()))
}

/// Diagonal of a state as real numbers.
pub fn populations(rho: &DensityMatrix) -> DVector<f64> {
    rho.matrix().diagonal().map(|z| z.re)
}
