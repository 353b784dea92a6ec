use super::{
    hermitian_eig, max_abs, partial_trace, partial_transpose, tensor_product, trace, ComplexMatrix,
    HermitianEigen, Subsystem, SubsystemDims, HERMITIAN_TOL, PSD_TOL, TRACE_TOL,
};
use crate::error::{Error, Result};

/// A square matrix that is Hermitian within `HERMITIAN_TOL`. The stored
/// matrix is exactly conjugate-symmetric.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix(ComplexMatrix);

impl HermitianMatrix {
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::NotSquare {
                rows: m.nrows(),
                cols: m.ncols(),
            });
        }
        if m.nrows() == 0 {
            return Err(Error::invalid("empty matrix"));
        }
        let deviation = max_abs(&(&m - m.adjoint()));
        if deviation > HERMITIAN_TOL * max_abs(&m).max(1.0) {
            return Err(Error::NotHermitian { deviation });
        }
        Ok(Self::symmetrized(m))
    }

    /// Skip the tolerance check; the input is symmetrized regardless.
    pub(crate) fn symmetrized(m: ComplexMatrix) -> Self {
        let adj = m.adjoint();
        HermitianMatrix((m + adj).scale(0.5))
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_inner(self) -> ComplexMatrix {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }
}

/// Hermitian, unit-trace, positive-semidefinite operator on `S ⊗ A ⊗ E`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: HermitianMatrix,
    dims: SubsystemDims,
}

impl DensityMatrix {
    pub fn new(matrix: ComplexMatrix, dims: SubsystemDims) -> Result<Self> {
        if matrix.nrows() != dims.total() {
            return Err(Error::DimensionMismatch {
                expected: dims.total(),
                actual: matrix.nrows(),
            });
        }
        let matrix = HermitianMatrix::new(matrix)?;
        let rho = DensityMatrix { matrix, dims };
        rho.validate()?;
        Ok(rho)
    }

    fn validate(&self) -> Result<()> {
        let tr = self.trace();
        if (tr - 1.0).abs() > TRACE_TOL {
            return Err(Error::InvalidTrace { trace: tr });
        }
        let min = self.eigen()?.min();
        if min < -PSD_TOL {
            return Err(Error::NotPositive {
                min_eigenvalue: min,
            });
        }
        Ok(())
    }

    /// Wrap a matrix known to be a state by construction, symmetrizing it.
    pub(crate) fn trusted(matrix: ComplexMatrix, dims: SubsystemDims) -> Self {
        debug_assert_eq!(matrix.nrows(), dims.total());
        DensityMatrix {
            matrix: HermitianMatrix::symmetrized(matrix),
            dims,
        }
    }

    /// `I / n` over the whole space described by `dims`.
    pub fn maximally_mixed(dims: SubsystemDims) -> Self {
        let n = dims.total();
        DensityMatrix::trusted(ComplexMatrix::identity(n, n).unscale(n as f64), dims)
    }

    /// `rho_sa ⊗ rho_e` for an `S ⊗ A` state and an environment-only state.
    pub fn product(rho_sa: &DensityMatrix, rho_e: &DensityMatrix) -> Result<Self> {
        let sa = rho_sa.dims;
        let e = rho_e.dims;
        if sa.e() != 1 || e.s() != 1 || e.a() != 1 {
            return Err(Error::invalid(
                "product expects an S-A state and an environment-only state",
            ));
        }
        let dims = SubsystemDims::new(sa.s(), sa.a(), e.e())?;
        Ok(DensityMatrix::trusted(
            tensor_product(rho_sa.matrix(), rho_e.matrix()),
            dims,
        ))
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        self.matrix.matrix()
    }

    pub fn hermitian(&self) -> &HermitianMatrix {
        &self.matrix
    }

    pub fn dims(&self) -> SubsystemDims {
        self.dims
    }

    pub fn dim(&self) -> usize {
        self.dims.total()
    }

    pub fn trace(&self) -> f64 {
        trace(self.matrix()).re
    }

    /// `tr(rho^2)`
    pub fn purity(&self) -> f64 {
        self.matrix().iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn eigen(&self) -> Result<HermitianEigen> {
        hermitian_eig(&self.matrix)
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(self.eigen()?.min())
    }

    /// Reduced state after tracing out `which`.
    pub fn reduce(&self, which: Subsystem) -> Result<DensityMatrix> {
        let m = partial_trace(self.matrix(), self.dims, which)?;
        Ok(DensityMatrix::trusted(m, self.dims.without(which)))
    }

    /// Partial transpose on `which`; Hermitian but not necessarily positive.
    pub fn partial_transpose(&self, which: Subsystem) -> Result<HermitianMatrix> {
        let m = partial_transpose(self.matrix(), self.dims, which)?;
        Ok(HermitianMatrix::symmetrized(m))
    }
}
