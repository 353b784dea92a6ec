//! Nearest-separable-state search over convex combinations of product states.
//!
//! The feasible set is the convex hull of product projectors
//! `|s><s| ⊗ |a><a|`. The search minimizes the squared Hilbert-Schmidt
//! distance to the target with an away-step Frank-Wolfe iteration:
//!
//! * the linear-minimization oracle samples `n_candidates` Haar-random product
//!   states, keeps the one with the lowest `<ψ|R|ψ>` (with `R = σ - target`),
//!   then polishes it by alternating minimum-eigenvector sweeps over the two
//!   factors;
//! * each step is either a Frank-Wolfe step toward that atom or an away step
//!   from the worst atom already in the ensemble, whichever has the larger
//!   gap, with exact line search on the quadratic objective.
//!
//! Every iterate is an explicit ensemble, so it is separable by construction.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::measures::{fidelity_distance, ppt_min_eigenvalue};
use crate::operator::{
    hermitian_eig, hs_inner, projector, tensor_vec, ComplexMatrix, ComplexVector, DensityMatrix,
    HermitianMatrix, SubsystemDims, PSD_TOL,
};
use crate::seeding::{self, Stream};
use crate::states::sample_weights;

const UNIT_TOL: f64 = 1e-12;
/// Alternating sweeps used to polish the sampled oracle atom.
const POLISH_SWEEPS: usize = 8;
/// Consecutive sub-tolerance improvements before the search stops.
const STALL_LIMIT: usize = 20;
/// Rebuild the iterate from its ensemble this often to shed accumulated drift.
const REBUILD_EVERY: usize = 50;

/// `|s> ⊗ |a>` with unit-norm factors.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductState {
    s_factor: ComplexVector,
    a_factor: ComplexVector,
}

impl ProductState {
    pub fn new(s_factor: ComplexVector, a_factor: ComplexVector) -> Result<Self> {
        for (name, v) in [("system", &s_factor), ("apparatus", &a_factor)] {
            if (v.norm() - 1.0).abs() > UNIT_TOL {
                return Err(Error::invalid(format!(
                    "{name} factor has norm {}, expected 1",
                    v.norm()
                )));
            }
        }
        Ok(Self { s_factor, a_factor })
    }

    pub fn s_factor(&self) -> &ComplexVector {
        &self.s_factor
    }

    pub fn a_factor(&self) -> &ComplexVector {
        &self.a_factor
    }

    pub fn vector(&self) -> ComplexVector {
        tensor_vec(&self.s_factor, &self.a_factor)
    }

    pub fn projector(&self) -> ComplexMatrix {
        projector(&self.vector())
    }

    /// `<ψ|M|ψ>` (real part) for a Hermitian `M` on `S ⊗ A`.
    fn expectation(&self, m: &ComplexMatrix) -> f64 {
        let v = self.vector();
        v.dotc(&(m * &v)).re
    }
}

fn haar_vector<R: Rng + ?Sized>(n: usize, rng: &mut R) -> ComplexVector {
    loop {
        let v = ComplexVector::from_fn(n, |_, _| {
            Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
        });
        let norm = v.norm();
        if norm > 0.0 {
            return v.unscale(norm);
        }
    }
}

/// Product state with each factor Haar-distributed on its unit sphere.
pub fn sample_product_state<R: Rng + ?Sized>(dims: SubsystemDims, rng: &mut R) -> ProductState {
    ProductState {
        s_factor: haar_vector(dims.s(), rng),
        a_factor: haar_vector(dims.a(), rng),
    }
}

/// Convex combination of product-state projectors.
#[derive(Debug, Clone, PartialEq)]
pub struct SeparableEnsemble {
    dims: SubsystemDims,
    terms: Vec<(f64, ProductState)>,
}

impl SeparableEnsemble {
    pub fn new(dims: SubsystemDims, terms: Vec<(f64, ProductState)>) -> Result<Self> {
        if dims.e() != 1 {
            return Err(Error::invalid("separable ensembles live on S ⊗ A"));
        }
        if terms.is_empty() {
            return Err(Error::invalid("ensemble needs at least one term"));
        }
        for (w, p) in &terms {
            if w.is_nan() || *w < 0.0 {
                return Err(Error::invalid(format!("negative ensemble weight {w}")));
            }
            if p.s_factor.len() != dims.s() || p.a_factor.len() != dims.a() {
                return Err(Error::DimensionMismatch {
                    expected: dims.total(),
                    actual: p.s_factor.len() * p.a_factor.len(),
                });
            }
        }
        let total: f64 = terms.iter().map(|(w, _)| w).sum();
        if (total - 1.0).abs() > UNIT_TOL {
            return Err(Error::invalid(format!("ensemble weights sum to {total}")));
        }
        Ok(Self { dims, terms })
    }

    /// `k` Haar product states with flat-Dirichlet weights.
    pub fn sample<R: Rng + ?Sized>(dims: SubsystemDims, k: usize, rng: &mut R) -> Result<Self> {
        let w = sample_weights(k, rng)?;
        let terms = w
            .as_slice()
            .iter()
            .map(|&x| (x, sample_product_state(dims, rng)))
            .collect();
        Self::new(dims, terms)
    }

    pub fn terms(&self) -> &[(f64, ProductState)] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn matrix(&self) -> ComplexMatrix {
        let n = self.dims.total();
        self.terms
            .iter()
            .fold(ComplexMatrix::zeros(n, n), |acc, (w, p)| {
                acc + p.projector() * Complex64::new(*w, 0.0)
            })
    }

    pub fn to_density(&self) -> DensityMatrix {
        DensityMatrix::trusted(self.matrix(), self.dims)
    }
}

/// Frobenius norm of `rho - sigma`.
pub fn hs_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            actual: sigma.dim(),
        });
    }
    Ok((rho.matrix() - sigma.matrix()).norm())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchConfig {
    pub n_candidates: usize,
    pub max_iterations: usize,
    /// Objective improvements below this count as stalled.
    pub convergence_tol: f64,
    pub seed: u64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            n_candidates: 64,
            max_iterations: 5000,
            convergence_tol: 1e-9,
            seed: 1,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_candidates == 0 {
            return Err(Error::invalid("n_candidates must be >= 1"));
        }
        if self.convergence_tol.is_nan() || self.convergence_tol <= 0.0 {
            return Err(Error::invalid("convergence_tol must be > 0"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SearchOutcome {
    pub ensemble: SeparableEnsemble,
    pub hs_dist: f64,
    pub fidelity_dist: f64,
    pub iterations: usize,
    /// Squared HS distance after every iteration, starting with the first atom.
    pub objective_history: Vec<f64>,
    /// Smallest partial-transpose eigenvalue over all iterates.
    pub min_ppt_seen: f64,
}

/// Hermitian operator `(<s| ⊗ I) M (|s> ⊗ I)` on A.
fn contract_system(m: &ComplexMatrix, s: &ComplexVector, dims: SubsystemDims) -> ComplexMatrix {
    let da = dims.a();
    let mut out = ComplexMatrix::zeros(da, da);
    for i in 0..dims.s() {
        for j in 0..dims.s() {
            let coef = s[i].conj() * s[j];
            if coef == Complex64::new(0.0, 0.0) {
                continue;
            }
            out += m.view((i * da, j * da), (da, da)) * coef;
        }
    }
    out
}

/// Hermitian operator `(I ⊗ <a|) M (I ⊗ |a>)` on S.
fn contract_apparatus(m: &ComplexMatrix, a: &ComplexVector, dims: SubsystemDims) -> ComplexMatrix {
    let da = dims.a();
    DMatrix::from_fn(dims.s(), dims.s(), |i, j| {
        let block = m.view((i * da, j * da), (da, da));
        a.dotc(&(block * a))
    })
}

fn lowest_eigenvector(m: ComplexMatrix) -> Result<ComplexVector> {
    let eig = hermitian_eig(&HermitianMatrix::symmetrized(m))?;
    Ok(eig.vectors.column(0).into_owned())
}

/// Approximate `argmin_ψ <ψ|R|ψ>` over product states.
fn oracle<R: Rng + ?Sized>(
    r: &ComplexMatrix,
    dims: SubsystemDims,
    n_candidates: usize,
    rng: &mut R,
) -> Result<(ProductState, f64)> {
    let mut best = sample_product_state(dims, rng);
    let mut best_val = best.expectation(r);
    for _ in 1..n_candidates {
        let cand = sample_product_state(dims, rng);
        let val = cand.expectation(r);
        if val < best_val {
            best = cand;
            best_val = val;
        }
    }
    for _ in 0..POLISH_SWEEPS {
        let a = lowest_eigenvector(contract_system(r, &best.s_factor, dims))?;
        let s = lowest_eigenvector(contract_apparatus(r, &a, dims))?;
        let cand = ProductState {
            s_factor: s,
            a_factor: a,
        };
        let val = cand.expectation(r);
        if val >= best_val - 1e-15 {
            if val < best_val {
                best = cand;
                best_val = val;
            }
            break;
        }
        best = cand;
        best_val = val;
    }
    Ok((best, best_val))
}

fn objective(sigma: &ComplexMatrix, target: &ComplexMatrix) -> f64 {
    (sigma - target).norm_squared()
}

fn min_ppt(sigma: &ComplexMatrix, dims: SubsystemDims) -> Result<f64> {
    Ok(ppt_min_eigenvalue(&DensityMatrix::trusted(sigma.clone(), dims))?.0)
}

/// Search for the separable state closest (in HS distance) to `target`.
pub fn nearest_separable(target: &DensityMatrix, config: &SearchConfig) -> Result<SearchOutcome> {
    config.validate()?;
    let dims = target.dims();
    if dims.e() != 1 {
        return Err(Error::invalid("search target must be an S-A state"));
    }
    let t = target.matrix();
    let mut rng = seeding::stream(config.seed, Stream::Search);

    let (first, _) = oracle(&(-t), dims, config.n_candidates, &mut rng)?;
    let mut atoms: Vec<(f64, ProductState)> = vec![(1.0, first)];
    let mut projectors: Vec<ComplexMatrix> = vec![atoms[0].1.projector()];
    let mut sigma = projectors[0].clone();
    let mut f = objective(&sigma, t);
    let mut history = vec![f];
    let mut min_ppt_seen = min_ppt(&sigma, dims)?;
    let mut stalled = 0;
    let mut iterations = 0;

    while iterations < config.max_iterations {
        iterations += 1;
        let r = &sigma - t;
        let r_sigma = hs_inner(&r, &sigma);

        let (fw_atom, fw_val) = oracle(&r, dims, config.n_candidates, &mut rng)?;
        let fw_gap = r_sigma - fw_val;

        let (away_idx, away_val) = projectors
            .iter()
            .enumerate()
            .map(|(i, p)| (i, hs_inner(&r, p)))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .expect("ensemble is never empty");
        let away_gap = away_val - r_sigma;
        let away_weight = atoms[away_idx].0;

        let take_away = away_gap > fw_gap && atoms.len() > 1 && away_weight < 1.0;
        let fw_proj = if take_away {
            None
        } else {
            Some(fw_atom.projector())
        };
        let (direction, gamma_max) = match &fw_proj {
            None => (
                &sigma - &projectors[away_idx],
                away_weight / (1.0 - away_weight),
            ),
            Some(p) => (p - &sigma, 1.0),
        };
        let dd = direction.norm_squared();
        let gamma = if dd > 0.0 {
            (-hs_inner(&r, &direction) / dd).clamp(0.0, gamma_max)
        } else {
            0.0
        };

        if gamma > 0.0 {
            match fw_proj {
                None => {
                    for (w, _) in atoms.iter_mut() {
                        *w *= 1.0 + gamma;
                    }
                    atoms[away_idx].0 -= gamma;
                    if gamma >= gamma_max || atoms[away_idx].0 <= 0.0 {
                        atoms.remove(away_idx);
                        projectors.remove(away_idx);
                    }
                }
                Some(p) => {
                    for (w, _) in atoms.iter_mut() {
                        *w *= 1.0 - gamma;
                    }
                    if gamma >= 1.0 {
                        atoms.clear();
                        projectors.clear();
                    }
                    atoms.push((gamma, fw_atom));
                    projectors.push(p);
                }
            }
            renormalize(&mut atoms);
            if iterations % REBUILD_EVERY == 0 {
                sigma = assemble(&atoms, &projectors, dims.total());
            } else {
                sigma += direction * Complex64::new(gamma, 0.0);
            }
        }

        let f_new = objective(&sigma, t);
        history.push(f_new);
        min_ppt_seen = min_ppt_seen.min(min_ppt(&sigma, dims)?);
        if min_ppt_seen < -PSD_TOL {
            return Err(Error::Internal(format!(
                "iterate lost positivity of its partial transpose ({min_ppt_seen:e})"
            )));
        }
        if f - f_new < config.convergence_tol {
            stalled += 1;
        } else {
            stalled = 0;
        }
        f = f_new.min(f);
        if stalled >= STALL_LIMIT {
            break;
        }
    }

    let ensemble = SeparableEnsemble::new(dims, atoms)?;
    let final_state = ensemble.to_density();
    Ok(SearchOutcome {
        hs_dist: hs_distance(target, &final_state)?,
        fidelity_dist: fidelity_distance(target, &final_state)?,
        ensemble,
        iterations,
        objective_history: history,
        min_ppt_seen,
    })
}

fn renormalize(atoms: &mut [(f64, ProductState)]) {
    let total: f64 = atoms.iter().map(|(w, _)| *w).sum();
    for (w, _) in atoms.iter_mut() {
        *w = w.max(0.0) / total;
    }
}

fn assemble(
    atoms: &[(f64, ProductState)],
    projectors: &[ComplexMatrix],
    n: usize,
) -> ComplexMatrix {
    atoms
        .iter()
        .zip(projectors)
        .fold(ComplexMatrix::zeros(n, n), |acc, ((w, _), p)| {
            acc + p * Complex64::new(*w, 0.0)
        })
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::operator::testutil::diag;
    use crate::states::*;

    fn dims(s: usize, a: usize) -> SubsystemDims {
        SubsystemDims::bipartite(s, a).unwrap()
    }

    #[test]
    fn product_states_are_unit_and_seeded() {
        let d = dims(2, 5);
        let a = sample_product_state(d, &mut ChaCha8Rng::seed_from_u64(3));
        let b = sample_product_state(d, &mut ChaCha8Rng::seed_from_u64(3));
        assert_eq!(a, b);
        assert!((a.s_factor().norm() - 1.0).abs() < 1e-12);
        assert!((a.a_factor().norm() - 1.0).abs() < 1e-12);
        assert!((a.vector().norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn product_state_rejects_non_unit_factor() {
        let s = ComplexVector::from_element(2, Complex64::new(1.0, 0.0));
        let a = ComplexVector::from_element(1, Complex64::new(1.0, 0.0));
        assert!(ProductState::new(s, a).is_err());
    }

    #[test]
    fn haar_first_component_mean() {
        // E|<e1|a>|^2 = 1/n for Haar vectors; variance of |a_1|^2 is (n-1)/(n^2 (n+1)).
        let n = 5;
        let samples = 10_000;
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let vals: Vec<f64> = (0..samples)
            .map(|_| sample_product_state(dims(2, n), &mut rng).a_factor()[0].norm_sqr())
            .collect();
        let mean = vals.iter().sum::<f64>() / samples as f64;
        let var = vals.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (samples - 1) as f64;
        let se = (var / samples as f64).sqrt();
        assert!(
            (mean - 1.0 / n as f64).abs() < 3.0 * se,
            "mean {mean}, se {se}"
        );
    }

    #[test]
    fn hs_distance_basics() {
        let d = dims(1, 2);
        let a = DensityMatrix::new(diag(&[1.0, 0.0]), d).unwrap();
        let b = DensityMatrix::new(diag(&[0.0, 1.0]), d).unwrap();
        assert_eq!(hs_distance(&a, &a).unwrap(), 0.0);
        assert!((hs_distance(&a, &b).unwrap() - 2f64.sqrt()).abs() < 1e-15);

        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let x = SeparableEnsemble::sample(dims(2, 3), 4, &mut rng)
                .unwrap()
                .to_density();
            let y = SeparableEnsemble::sample(dims(2, 3), 4, &mut rng)
                .unwrap()
                .to_density();
            let z = SeparableEnsemble::sample(dims(2, 3), 4, &mut rng)
                .unwrap()
                .to_density();
            let xz = hs_distance(&x, &z).unwrap();
            let xy = hs_distance(&x, &y).unwrap();
            let yz = hs_distance(&y, &z).unwrap();
            assert!(xz <= xy + yz + 1e-12);
        }
    }

    #[test]
    fn ensemble_validation() {
        let d = dims(2, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let p = sample_product_state(d, &mut rng);
        assert!(SeparableEnsemble::new(d, vec![(0.5, p.clone())]).is_err());
        assert!(SeparableEnsemble::new(d, vec![]).is_err());
        let e = SeparableEnsemble::new(d, vec![(0.25, p.clone()), (0.75, p)]).unwrap();
        let rho = DensityMatrix::new(e.matrix(), d).unwrap();
        assert!((rho.trace() - 1.0).abs() < 1e-12);
    }

    fn fast_config(seed: u64) -> SearchConfig {
        SearchConfig {
            seed,
            ..SearchConfig::default()
        }
    }

    #[test]
    fn separable_target_is_recovered() {
        let pt = ApparatusPartition::new(1, 2).unwrap();
        let c = MeasurementCoefficients::balanced();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let q = sample_weights(2, &mut rng).unwrap();
        let target = decohered_target(c, &WeightVector::new(vec![1.0]).unwrap(), &q, pt).unwrap();
        for seed in [1, 2, 3] {
            let out = nearest_separable(&target, &fast_config(seed)).unwrap();
            assert!(out.hs_dist <= 1e-3, "seed {seed}: {}", out.hs_dist);
        }
    }

    #[test]
    fn objective_never_increases_and_iterates_stay_separable() {
        let pt = ApparatusPartition::new(1, 2).unwrap();
        let target = pure_mixed_entangled(
            MeasurementCoefficients::balanced(),
            &WeightVector::new(vec![1.0]).unwrap(),
            &WeightVector::new(vec![0.3, 0.7]).unwrap(),
            pt,
        )
        .unwrap();
        let out = nearest_separable(&target, &fast_config(11)).unwrap();
        for w in out.objective_history.windows(2) {
            assert!(w[1] <= w[0] + 1e-14, "{} -> {}", w[0], w[1]);
        }
        assert!(out.min_ppt_seen >= -1e-10);
        let (min, _) = ppt_min_eigenvalue(&out.ensemble.to_density()).unwrap();
        assert!(min >= -1e-10);
    }

    #[test]
    fn bell_target_reaches_the_isotropic_optimum() {
        // Twirling by U ⊗ U* maps every separable state to a separable
        // isotropic one without increasing the HS distance to the Bell state,
        // so the optimum is the isotropic state at the separability boundary:
        // σ* = Φ/3 + I/6, at distance 1/√3 from Φ and 1/√6 from the dephased state.
        let pt = ApparatusPartition::new(1, 1).unwrap();
        let phi1 = OffDiagVector::new(pt, Group::A, &[Complex64::new(1.0, 0.0)]).unwrap();
        let phi2 = OffDiagVector::new(pt, Group::B, &[Complex64::new(1.0, 0.0)]).unwrap();
        let c = MeasurementCoefficients::balanced();
        let bell = pure_pure_entangled(c, &phi1, &phi2).unwrap();
        let dephased = pure_pure_decohered(c, &phi1, &phi2).unwrap();
        let out = nearest_separable(&bell, &fast_config(2)).unwrap();
        assert!(
            (out.hs_dist - 1.0 / 3f64.sqrt()).abs() < 1e-3,
            "{}",
            out.hs_dist
        );
        let to_dephased = hs_distance(&out.ensemble.to_density(), &dephased).unwrap();
        assert!(
            (to_dephased - 1.0 / 6f64.sqrt()).abs() < 5e-3,
            "{to_dephased}"
        );
    }

    #[test]
    fn search_is_deterministic_per_seed() {
        let pt = ApparatusPartition::new(1, 2).unwrap();
        let target =
            microcanonical_target(MeasurementCoefficients::real(0.6, 0.8).unwrap(), pt).unwrap();
        let cfg = SearchConfig {
            max_iterations: 200,
            ..fast_config(9)
        };
        let a = nearest_separable(&target, &cfg).unwrap();
        let b = nearest_separable(&target, &cfg).unwrap();
        assert_eq!(a.objective_history, b.objective_history);
        assert_eq!(a.ensemble, b.ensemble);
    }

    #[test]
    fn config_validation() {
        let target = microcanonical_target(
            MeasurementCoefficients::balanced(),
            ApparatusPartition::new(1, 1).unwrap(),
        )
        .unwrap();
        let bad = SearchConfig {
            n_candidates: 0,
            ..SearchConfig::default()
        };
        assert!(nearest_separable(&target, &bad).is_err());
        let bad = SearchConfig {
            convergence_tol: 0.0,
            ..SearchConfig::default()
        };
        assert!(nearest_separable(&target, &bad).is_err());
    }
}
