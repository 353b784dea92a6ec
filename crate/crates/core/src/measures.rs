//! Scalar diagnostics on system-apparatus states.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::{hermitian_eig, DensityMatrix, HermitianMatrix, Subsystem, PSD_TOL};
use crate::states::{MeasurementCoefficients, WeightVector};

/// Eigenvalues below this count as genuinely negative.
pub const NEGATIVITY_THRESHOLD: f64 = -1e-10;

/// Diagnostics of the reduced system-apparatus state at one time.
///
/// Serialized field names are part of the CSV/JSON output format.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticSample {
    pub time: f64,
    /// Fidelity distance to the state with deleted coherences.
    #[serde(rename = "dist_eq6")]
    pub dist_decohered: f64,
    /// Fidelity distance to the microcanonical end state.
    #[serde(rename = "dist_eq7")]
    pub dist_microcanonical: f64,
    pub min_ppt_eig: f64,
    pub n_negative_ppt: usize,
}

/// `2 - 2 tr sqrt(sqrt(rho) sigma sqrt(rho))`, in `[0, 2]` up to round-off.
pub fn fidelity_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    Ok(2.0 - 2.0 * fidelity(rho, sigma)?)
}

/// Uhlmann fidelity `tr sqrt(sqrt(rho) sigma sqrt(rho))` (not squared).
pub fn fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            actual: sigma.dim(),
        });
    }
    let sqrt_rho = rho.eigen()?.sqrt_psd()?;
    let sigma_eig = sigma.eigen()?;
    if sigma_eig.min() < -PSD_TOL {
        return Err(Error::NotPositive {
            min_eigenvalue: sigma_eig.min(),
        });
    }
    let inner = HermitianMatrix::symmetrized(&sqrt_rho * sigma.matrix() * &sqrt_rho);
    let eig = hermitian_eig(&inner)?;
    if eig.min() < -PSD_TOL {
        return Err(Error::NotPositive {
            min_eigenvalue: eig.min(),
        });
    }
    let floor = eig.round_off_floor();
    Ok(eig
        .values
        .iter()
        .filter(|&&x| x > floor)
        .map(|&x| x.sqrt())
        .sum())
}

/// Ascending spectrum of the partial transpose with respect to `S`.
pub fn ppt_spectrum(rho: &DensityMatrix) -> Result<Vec<f64>> {
    if rho.dims().e() != 1 {
        return Err(Error::invalid(format!(
            "partial transpose diagnostics need an S-A state, got environment dimension {}",
            rho.dims().e()
        )));
    }
    let pt = rho.partial_transpose(Subsystem::S)?;
    Ok(hermitian_eig(&pt)?.values.iter().copied().collect())
}

/// Minimum eigenvalue of the partial transpose and the number of eigenvalues
/// below [`NEGATIVITY_THRESHOLD`].
pub fn ppt_min_eigenvalue(rho: &DensityMatrix) -> Result<(f64, usize)> {
    let spec = ppt_spectrum(rho)?;
    let n_neg = spec.iter().filter(|&&x| x < NEGATIVITY_THRESHOLD).count();
    Ok((spec[0], n_neg))
}

/// Closed-form partial-transpose spectrum of the pure-mixed state with one
/// group-a state and two group-b states:
/// `±|c1 c2| sqrt(q1^2 + q2^2), 0, |c1|^2, |c2|^2 q1, |c2|^2 q2`, ascending.
pub fn ppt_spectrum_closed_form(c: MeasurementCoefficients, q: &WeightVector) -> Result<[f64; 6]> {
    if q.len() != 2 {
        return Err(Error::invalid(format!(
            "closed form needs two group-b weights, got {}",
            q.len()
        )));
    }
    let (q1, q2) = (q.as_slice()[0], q.as_slice()[1]);
    let a1 = c.c1().norm_sqr();
    let a2 = c.c2().norm_sqr();
    let off = (c.c1() * c.c2()).norm() * (q1 * q1 + q2 * q2).sqrt();
    let mut out = [-off, 0.0, a1, a2 * q1, a2 * q2, off];
    out.sort_by(f64::total_cmp);
    Ok(out)
}
