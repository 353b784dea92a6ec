use nalgebra::{DVector, SymmetricEigen};
use num_complex::Complex64;

use super::{conjugate_diag, ComplexMatrix, HermitianMatrix, PSD_TOL};
use crate::error::{Error, Result};

/// Spectral decomposition `H = V diag(values) V^H` with ascending eigenvalues.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: DVector<f64>,
    pub vectors: ComplexMatrix,
}

impl HermitianEigen {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn min(&self) -> f64 {
        self.values[0]
    }

    /// `V diag(f(values)) V^H`
    pub fn apply(&self, f: impl Fn(f64) -> Complex64) -> ComplexMatrix {
        let d: Vec<Complex64> = self.values.iter().map(|&x| f(x)).collect();
        conjugate_diag(&self.vectors, &d)
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.apply(|x| Complex64::new(x, 0.0))
    }

    /// `exp(-i H t)`
    pub fn propagator(&self, t: f64) -> ComplexMatrix {
        self.apply(|x| Complex64::from_polar(1.0, -x * t))
    }

    /// Magnitude below which an eigenvalue is indistinguishable from zero.
    pub fn round_off_floor(&self) -> f64 {
        let scale = self.values.iter().fold(0.0f64, |a, &x| a.max(x.abs()));
        self.dim() as f64 * f64::EPSILON * scale
    }

    /// Principal square root. Eigenvalues in `[-PSD_TOL, 0)` are clamped to
    /// zero, as are positive ones within round-off of zero.
    pub fn sqrt_psd(&self) -> Result<ComplexMatrix> {
        let min = self.min();
        if min < -PSD_TOL {
            return Err(Error::NotPositive {
                min_eigenvalue: min,
            });
        }
        let floor = self.round_off_floor();
        Ok(self.apply(|x| {
            let r = if x > floor { x.sqrt() } else { 0.0 };
            Complex64::new(r, 0.0)
        }))
    }
}

pub fn hermitian_eig(h: &HermitianMatrix) -> Result<HermitianEigen> {
    let m = h.matrix().clone();
    let n = m.nrows();
    let eig = SymmetricEigen::try_new(m, f64::EPSILON, 100 * n + 100)
        .ok_or_else(|| Error::Eigen(format!("no convergence for {n}x{n} matrix")))?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let vectors = ComplexMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    Ok(HermitianEigen { values, vectors })
}

/// Spectral calculus: `V f(diag(λ)) V^H`.
pub fn matrix_function(h: &HermitianMatrix, f: impl Fn(f64) -> Complex64) -> Result<ComplexMatrix> {
    Ok(hermitian_eig(h)?.apply(f))
}

pub fn sqrt_psd(h: &HermitianMatrix) -> Result<ComplexMatrix> {
    hermitian_eig(h)?.sqrt_psd()
}

/// `U(t) = exp(-i H t)`; time is dimensionless.
pub fn propagator(h: &HermitianMatrix, t: f64) -> Result<ComplexMatrix> {
    Ok(hermitian_eig(h)?.propagator(t))
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::dynamics::sample_gue;
    use crate::operator::testutil::*;
    use crate::operator::{identity, max_abs};

    fn herm(m: ComplexMatrix) -> HermitianMatrix {
        HermitianMatrix::new(m).unwrap()
    }

    #[test]
    fn diagonal_input_sorted() {
        let e = hermitian_eig(&herm(diag(&[3.0, 1.0, 2.0]))).unwrap();
        assert_eq!(e.values.as_slice(), &[1.0, 2.0, 3.0]);
    }

    #[test]
    fn pauli_x() {
        let m = ComplexMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(1.0), c(0.0)]);
        let e = hermitian_eig(&herm(m)).unwrap();
        assert!((e.values[0] + 1.0).abs() < 1e-15);
        assert!((e.values[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn gue_reconstruction() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let h = sample_gue(50, &mut rng);
        let e = hermitian_eig(&h).unwrap();
        let scale = e.values.iter().fold(1.0f64, |a, &x| a.max(x.abs()));
        assert!(max_abs(&(e.reconstruct() - h.matrix())) <= 1e-10 * scale);
        let gram = e.vectors.adjoint() * &e.vectors;
        assert!(max_abs(&(gram - identity(50))) <= 1e-10);
        assert!(e.values.as_slice().windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn rejects_non_hermitian() {
        let m = ComplexMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(0.0), c(0.0)]);
        assert!(matches!(
            HermitianMatrix::new(m),
            Err(Error::NotHermitian { .. })
        ));
    }

    #[test]
    fn sqrt_of_diagonal() {
        let got = sqrt_psd(&herm(diag(&[4.0, 9.0]))).unwrap();
        assert!(max_abs(&(got - diag(&[2.0, 3.0]))) < 1e-14);
    }

    #[test]
    fn sqrt_clamps_round_off_and_rejects_negative() {
        let got = sqrt_psd(&herm(diag(&[1.0, -5e-11]))).unwrap();
        assert!(max_abs(&(got - diag(&[1.0, 0.0]))) < 1e-15);
        let err = sqrt_psd(&herm(diag(&[1.0, -1e-6]))).unwrap_err();
        assert!(matches!(err, Error::NotPositive { .. }));
    }

    #[test]
    fn identity_function_round_trips() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let h = random_hermitian(&mut rng, 12);
        let got = matrix_function(&herm(h.clone()), c).unwrap();
        assert!(max_abs(&(got - h)) < 1e-10);
    }

    #[test]
    fn exp_inverse_pair() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let h = herm(random_hermitian(&mut rng, 20));
        let plus = matrix_function(&h, |x| c(x.exp())).unwrap();
        let minus = matrix_function(&h, |x| c((-x).exp())).unwrap();
        assert!(max_abs(&(plus * minus - identity(20))) < 1e-9);
    }

    #[test]
    fn propagator_at_zero_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let h = herm(random_hermitian(&mut rng, 16));
        let u = propagator(&h, 0.0).unwrap();
        assert!(max_abs(&(u - identity(16))) <= 1e-12);
    }

    #[test]
    fn propagator_phase() {
        let u = propagator(&herm(diag(&[0.0, 1.0])), PI).unwrap();
        assert!(max_abs(&(u - diag(&[1.0, -1.0]))) < 1e-12);
    }

    #[test]
    fn propagator_group_law_and_unitarity() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let h = herm(random_hermitian(&mut rng, 24));
        let e = hermitian_eig(&h).unwrap();
        let (t1, t2) = (0.7, 2.9);
        let lhs = e.propagator(t1) * e.propagator(t2);
        assert!(max_abs(&(lhs - e.propagator(t1 + t2))) < 1e-9);
        let u = e.propagator(17.0);
        assert!(max_abs(&(&u * u.adjoint() - identity(24))) < 1e-10);
    }

    #[test]
    fn conjugation_preserves_spectrum() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let h = herm(random_hermitian(&mut rng, 10));
        let m = herm(random_hermitian(&mut rng, 10));
        let u = propagator(&h, 3.3).unwrap();
        let moved = herm(&u * m.matrix() * u.adjoint());
        let before = hermitian_eig(&m).unwrap().values;
        let after = hermitian_eig(&moved).unwrap().values;
        assert!((before - after).amax() < 1e-9);
    }
}
