//! Projective dilations of POVMs on an extended Hilbert space.
//!
//! A POVM {F_i} on dimension d dilates to a PVM on the extended space
//! system (x) ancilla (row-major, system-major index mapping): the isometry
//! V maps psi to sum_i (sqrt(F_i) psi) (x) e_i and the extended projectors
//! are P_i = I_d (x) |e_i><e_i|. Compression reproduces the POVM statistics:
//! Tr(V rho V~ P_i) = Tr(rho F_i). The extension is not unique; an
//! alternate construction is provided to witness this constructively.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::effects::{born_probability, DensityOperator, Effect};
use crate::error::{Error, Result};
use crate::linalg::{
    basis_vector, check_capacity, identity, psd_sqrt_clamped, spectral_norm, tensor, zeros,
    CMatrix, DEFAULT_TOL,
};
use crate::observables::{GeneralizedMeasure, OutcomeSpace, ProjectiveMeasure};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Isometry plus projective measure on an extended space reproducing a POVM.
#[derive(Debug, Clone)]
pub struct DilationResult {
    ancilla_dim: usize,
    /// (d * ancilla_dim) x d isometry V with V~ V = I_d.
    isometry: CMatrix,
    extended_pvm: ProjectiveMeasure,
}

impl DilationResult {
    pub fn ancilla_dim(&self) -> usize {
        self.ancilla_dim
    }

    pub fn isometry(&self) -> &CMatrix {
        &self.isometry
    }

    pub fn extended_pvm(&self) -> &ProjectiveMeasure {
        &self.extended_pvm
    }

    pub fn system_dim(&self) -> usize {
        self.isometry.ncols()
    }

    pub fn extended_dim(&self) -> usize {
        self.isometry.nrows()
    }

    /// ||V~ V - I|| in operator norm.
    pub fn isometry_defect(&self) -> f64 {
        let d = self.system_dim();
        spectral_norm(&(self.isometry.adjoint() * &self.isometry - identity(d)))
    }

    /// Embeds a state into the extended space: rho -> V rho V~.
    pub fn embed(&self, rho: &DensityOperator) -> Result<DensityOperator> {
        if rho.dim() != self.system_dim() {
            return Err(Error::DimensionMismatch {
                left: rho.dim(),
                right: self.system_dim(),
            });
        }
        let extended = &self.isometry * rho.matrix() * self.isometry.adjoint();
        Ok(DensityOperator::from_validated(extended))
    }

    /// Outcome probabilities of the extended measurement on an embedded state.
    pub fn embedded_probabilities(&self, rho: &DensityOperator) -> Result<Vec<f64>> {
        let embedded = self.embed(rho)?;
        self.extended_pvm
            .projectors()
            .iter()
            .map(|p| {
                Ok(crate::effects::born_probability(
                    &embedded,
                    &Effect::from_validated(p.clone()),
                )?)
            })
            .collect()
    }
}

fn sqrt_effects(povm: &GeneralizedMeasure) -> Vec<CMatrix> {
    povm.effects()
        .iter()
        .map(|e| psd_sqrt_clamped(e.matrix()))
        .collect()
}

/// Builds the isometry psi -> sum_i (sqrt(F_i) psi) (x) e_i for the given
/// square roots, with ancilla dimension = number of blocks.
fn block_isometry(roots: &[CMatrix], d: usize) -> CMatrix {
    let n = roots.len();
    let mut v = CMatrix::zeros(d * n, d);
    for (i, root) in roots.iter().enumerate() {
        for s in 0..d {
            for t in 0..d {
                v[(s * n + i, t)] = root[(s, t)];
            }
        }
    }
    v
}

fn ancilla_projector_pvm(d: usize, n: usize, outcomes: OutcomeSpace) -> Result<ProjectiveMeasure> {
    let mut projectors = Vec::with_capacity(n);
    for i in 0..n {
        let e = basis_vector(n, i);
        let mut unit = zeros(n);
        unit += &e * e.adjoint();
        projectors.push(tensor(&identity(d), &unit)?);
    }
    ProjectiveMeasure::new(projectors, outcomes, DEFAULT_TOL)
}

/// Dilates a POVM to a projective measure with ancilla dimension equal to
/// the number of outcomes.
pub fn dilate(povm: &GeneralizedMeasure) -> Result<DilationResult> {
    let d = povm.dim();
    let n = povm.len();
    check_capacity(d * n)?;
    let roots = sqrt_effects(povm);
    let isometry = block_isometry(&roots, d);
    let extended_pvm = ancilla_projector_pvm(d, n, povm.outcomes().clone())?;
    let result = DilationResult {
        ancilla_dim: n,
        isometry,
        extended_pvm,
    };
    let defect = result.isometry_defect();
    if defect > DEFAULT_TOL {
        return Err(Error::Internal(format!(
            "dilation isometry defect {defect:.3e} exceeds tolerance"
        )));
    }
    Ok(result)
}

/// A dilation guaranteed to differ from [`dilate`] while reproducing the
/// same statistics.
///
/// With `variant_seed` 0 (or a single-outcome POVM) the POVM is padded with
/// an always-zero outcome before dilating, enlarging the ancilla to n + 1
/// and absorbing the extra projector into the last outcome. Otherwise the
/// ancilla factor is rotated by a seeded unitary, which keeps the ancilla
/// dimension and moves every extended projector.
pub fn alternate_dilation(povm: &GeneralizedMeasure, variant_seed: u64) -> Result<DilationResult> {
    let d = povm.dim();
    let n = povm.len();
    if variant_seed == 0 || n == 1 {
        padded_dilation(povm)
    } else {
        check_capacity(d * n)?;
        rotated_dilation(povm, variant_seed)
    }
}

fn padded_dilation(povm: &GeneralizedMeasure) -> Result<DilationResult> {
    let d = povm.dim();
    let n = povm.len();
    check_capacity(d * (n + 1))?;

    let mut roots = sqrt_effects(povm);
    roots.push(zeros(d));
    let isometry = block_isometry(&roots, d);

    // Ancilla projectors on n + 1 levels; the always-zero outcome is
    // absorbed into the last genuine outcome.
    let mut projectors = Vec::with_capacity(n);
    for i in 0..n {
        let e = basis_vector(n + 1, i);
        let mut unit = zeros(n + 1);
        unit += &e * e.adjoint();
        if i == n - 1 {
            let pad = basis_vector(n + 1, n);
            unit += &pad * pad.adjoint();
        }
        projectors.push(tensor(&identity(d), &unit)?);
    }
    let extended_pvm = ProjectiveMeasure::new(projectors, povm.outcomes().clone(), DEFAULT_TOL)?;

    Ok(DilationResult {
        ancilla_dim: n + 1,
        isometry,
        extended_pvm,
    })
}

fn rotated_dilation(povm: &GeneralizedMeasure, variant_seed: u64) -> Result<DilationResult> {
    let base = dilate(povm)?;
    let d = povm.dim();
    let n = povm.len();

    let mut rng = ChaCha12Rng::seed_from_u64(variant_seed);
    for _ in 0..16 {
        let u = crate::random::random_unitary(n, &mut rng);
        // Distance between the ancilla projector families; the extended
        // families differ by exactly the same amount.
        let mut distance: f64 = 0.0;
        for i in 0..n {
            let e = basis_vector(n, i);
            let column = u.column(i);
            let moved = &column * column.adjoint() - &e * e.adjoint();
            distance = distance.max(spectral_norm(&moved));
        }
        if distance <= 1e-6 {
            continue;
        }
        let rotation = tensor(&identity(d), &u)?;
        let isometry = &rotation * base.isometry();
        let projectors = base
            .extended_pvm()
            .projectors()
            .iter()
            .map(|p| &rotation * p * rotation.adjoint())
            .collect();
        let extended_pvm =
            ProjectiveMeasure::new(projectors, povm.outcomes().clone(), DEFAULT_TOL)?;
        return Ok(DilationResult {
            ancilla_dim: n,
            isometry,
            extended_pvm,
        });
    }
    Err(Error::Internal(
        "could not derive a distinct ancilla rotation from the seed".to_string(),
    ))
}

/// Max over states and outcomes of |Tr(V rho V~ P_i) - Tr(rho F_i)|.
///
/// An empty state list yields 0.
pub fn verify_dilation(
    povm: &GeneralizedMeasure,
    dilation: &DilationResult,
    states: &[DensityOperator],
) -> Result<f64> {
    if dilation.system_dim() != povm.dim() {
        return Err(Error::DimensionMismatch {
            left: dilation.system_dim(),
            right: povm.dim(),
        });
    }
    if dilation.extended_pvm().len() != povm.len() {
        return Err(Error::OutcomeShape {
            labels: dilation.extended_pvm().len(),
            values: povm.len(),
        });
    }
    let deviation_for = |rho: &DensityOperator| -> Result<f64> {
        let through = dilation.embedded_probabilities(rho)?;
        let direct: Vec<f64> = povm
            .effects()
            .iter()
            .map(|e| born_probability(rho, e))
            .collect::<Result<_>>()?;
        Ok(through
            .iter()
            .zip(&direct)
            .map(|(p, q)| (p - q).abs())
            .fold(0.0, f64::max))
    };

    let deviations: Vec<f64> = {
        #[cfg(feature = "parallel")]
        {
            states
                .par_iter()
                .map(deviation_for)
                .collect::<Result<Vec<f64>>>()?
        }
        #[cfg(not(feature = "parallel"))]
        {
            states
                .iter()
                .map(deviation_for)
                .collect::<Result<Vec<f64>>>()?
        }
    };
    Ok(deviations.into_iter().fold(0.0, f64::max))
}

/// Max operator-norm distance between the extended projector families of
/// two dilations. Infinite when the extended dimensions differ.
pub fn projector_family_distance(left: &DilationResult, right: &DilationResult) -> f64 {
    if left.extended_dim() != right.extended_dim()
        || left.extended_pvm().len() != right.extended_pvm().len()
    {
        return f64::INFINITY;
    }
    left.extended_pvm()
        .projectors()
        .iter()
        .zip(right.extended_pvm().projectors())
        .map(|(p, q)| spectral_norm(&(p - q)))
        .fold(0.0, f64::max)
}
