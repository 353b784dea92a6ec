//! Dense complex-matrix kernel.
//!
//! Every composite operator in the crate lives on `S ⊗ A ⊗ E` with a single
//! basis-ordering contract: the composite index of `(i_s, i_a, i_e)` is
//! `((i_s * d_a) + i_a) * d_e + i_e`, i.e. `S` is the slowest index and `E`
//! the fastest. Objects that only live on `S ⊗ A` carry `d_e = 1`.

mod density;
mod eigen;

use nalgebra::{DMatrix, DVector, Dim, Matrix, RawStorage};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub use density::{DensityMatrix, HermitianMatrix};
pub use eigen::{hermitian_eig, matrix_function, propagator, sqrt_psd, HermitianEigen};

pub type ComplexMatrix = DMatrix<Complex64>;
pub type ComplexVector = DVector<Complex64>;

/// Relative tolerance for accepting a matrix as Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Allowed deviation of a density matrix trace from one.
pub const TRACE_TOL: f64 = 1e-12;
/// Eigenvalues above `-PSD_TOL` are treated as non-negative round-off.
pub const PSD_TOL: f64 = 1e-10;

/// One of the three tensor factors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Subsystem {
    S,
    A,
    E,
}

/// Dimensions of the system, apparatus and environment factors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SubsystemDims {
    s: usize,
    a: usize,
    e: usize,
}

impl SubsystemDims {
    pub fn new(s: usize, a: usize, e: usize) -> Result<Self> {
        if s == 0 || a == 0 || e == 0 {
            return Err(Error::invalid(format!(
                "subsystem dimensions must be >= 1, got ({s}, {a}, {e})"
            )));
        }
        Ok(Self { s, a, e })
    }

    /// Dimensions for an `S ⊗ A` object.
    pub fn bipartite(s: usize, a: usize) -> Result<Self> {
        Self::new(s, a, 1)
    }

    pub fn s(&self) -> usize {
        self.s
    }

    pub fn a(&self) -> usize {
        self.a
    }

    pub fn e(&self) -> usize {
        self.e
    }

    pub fn of(&self, which: Subsystem) -> usize {
        match which {
            Subsystem::S => self.s,
            Subsystem::A => self.a,
            Subsystem::E => self.e,
        }
    }

    pub fn total(&self) -> usize {
        self.s * self.a * self.e
    }

    #[inline]
    pub fn index(&self, is: usize, ia: usize, ie: usize) -> usize {
        (is * self.a + ia) * self.e + ie
    }

    #[inline]
    pub fn split(&self, idx: usize) -> [usize; 3] {
        let ie = idx % self.e;
        let rest = idx / self.e;
        [rest / self.a, rest % self.a, ie]
    }

    /// Dimensions left after removing `which` (the removed slot becomes 1).
    pub fn without(&self, which: Subsystem) -> Self {
        let mut out = *self;
        match which {
            Subsystem::S => out.s = 1,
            Subsystem::A => out.a = 1,
            Subsystem::E => out.e = 1,
        }
        out
    }

    fn check_square(&self, m: &ComplexMatrix) -> Result<()> {
        if m.nrows() != m.ncols() {
            return Err(Error::NotSquare {
                rows: m.nrows(),
                cols: m.ncols(),
            });
        }
        if m.nrows() != self.total() {
            return Err(Error::DimensionMismatch {
                expected: self.total(),
                actual: m.nrows(),
            });
        }
        Ok(())
    }
}

fn slot(which: Subsystem) -> usize {
    match which {
        Subsystem::S => 0,
        Subsystem::A => 1,
        Subsystem::E => 2,
    }
}

/// Kronecker product `a ⊗ b`; the index of `b` runs fastest.
pub fn tensor_product(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kronecker(b)
}

/// Kronecker product of two vectors.
pub fn tensor_vec(u: &ComplexVector, v: &ComplexVector) -> ComplexVector {
    u.kronecker(v)
}

/// Identity of size `n`.
pub fn identity(n: usize) -> ComplexMatrix {
    ComplexMatrix::identity(n, n)
}

/// Trace out `which`. The result is indexed by the remaining factors in
/// their original order (dimensions given by `dims.without(which)`).
pub fn partial_trace(
    m: &ComplexMatrix,
    dims: SubsystemDims,
    which: Subsystem,
) -> Result<ComplexMatrix> {
    dims.check_square(m)?;
    let out_dims = dims.without(which);
    let n_out = out_dims.total();
    let k = slot(which);
    let traced = dims.of(which);
    let mut out = ComplexMatrix::zeros(n_out, n_out);
    for r in 0..n_out {
        let mut ri = out_dims.split(r);
        for c in 0..n_out {
            let mut ci = out_dims.split(c);
            let mut acc = Complex64::new(0.0, 0.0);
            for t in 0..traced {
                ri[k] = t;
                ci[k] = t;
                acc += m[(
                    dims.index(ri[0], ri[1], ri[2]),
                    dims.index(ci[0], ci[1], ci[2]),
                )];
            }
            out[(r, c)] = acc;
        }
    }
    Ok(out)
}

/// Transpose the indices of one factor:
/// `<i_k ..| M^T_k |j_k ..> = <j_k ..| M |i_k ..>` with all other indices fixed.
pub fn partial_transpose(
    m: &ComplexMatrix,
    dims: SubsystemDims,
    which: Subsystem,
) -> Result<ComplexMatrix> {
    dims.check_square(m)?;
    let n = dims.total();
    let k = slot(which);
    let mut out = ComplexMatrix::zeros(n, n);
    for r in 0..n {
        let ri = dims.split(r);
        for c in 0..n {
            let ci = dims.split(c);
            let mut src_r = ri;
            let mut src_c = ci;
            src_r[k] = ci[k];
            src_c[k] = ri[k];
            out[(r, c)] = m[(
                dims.index(src_r[0], src_r[1], src_r[2]),
                dims.index(src_c[0], src_c[1], src_c[2]),
            )];
        }
    }
    Ok(out)
}

/// `Re tr(A^H B)`, the real Hilbert-Schmidt inner product.
pub fn hs_inner(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x.conj() * y).re).sum()
}

/// Largest entrywise modulus.
pub fn max_abs<R: Dim, C: Dim, St: RawStorage<Complex64, R, C>>(
    m: &Matrix<Complex64, R, C, St>,
) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn trace(m: &ComplexMatrix) -> Complex64 {
    m.diagonal().iter().sum()
}

/// `|v><v|`
pub fn projector(v: &ComplexVector) -> ComplexMatrix {
    v * v.adjoint()
}

/// `V diag(d) V^H` for a real diagonal.
pub(crate) fn conjugate_diag(v: &ComplexMatrix, d: &[Complex64]) -> ComplexMatrix {
    let mut scaled = v.clone();
    for (j, mut col) in scaled.column_iter_mut().enumerate() {
        col *= d[j];
    }
    scaled * v.adjoint()
}

#[cfg(test)]
pub(crate) mod testutil {
    use super::*;
    use rand::Rng;
    use rand_distr::StandardNormal;

    pub fn random_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> ComplexMatrix {
        ComplexMatrix::from_fn(rows, cols, |_, _| {
            Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
        })
    }

    pub fn random_vector<R: Rng>(rng: &mut R, n: usize) -> ComplexVector {
        ComplexVector::from_fn(n, |_, _| {
            Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
        })
    }

    pub fn random_hermitian<R: Rng>(rng: &mut R, n: usize) -> ComplexMatrix {
        let m = random_matrix(rng, n, n);
        (&m + m.adjoint()).scale(0.5)
    }

    /// Random full-rank density matrix `G G^H / tr`.
    pub fn random_density<R: Rng>(rng: &mut R, n: usize) -> ComplexMatrix {
        let g = random_matrix(rng, n, n);
        let m = &g * g.adjoint();
        let t = trace(&m).re;
        m.unscale(t)
    }

    pub fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    pub fn diag(entries: &[f64]) -> ComplexMatrix {
        ComplexMatrix::from_diagonal(&ComplexVector::from_iterator(
            entries.len(),
            entries.iter().map(|&x| c(x)),
        ))
    }
}
