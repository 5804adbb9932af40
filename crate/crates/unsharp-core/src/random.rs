//! Seeded generators for random states, effects, unitaries, and measures.
//!
//! Used by the test suites and benchmarks; all functions are deterministic
//! given the caller's RNG state.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::effects::{DensityOperator, Effect};
use crate::error::Result;
use crate::linalg::{check_capacity, symmetrize, zeros, CMatrix, CVector, C64, DEFAULT_TOL};
use crate::observables::{GeneralizedMeasure, OutcomeSpace};

/// Matrix with independent standard complex Gaussian entries.
pub fn complex_ginibre<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMatrix {
    CMatrix::from_fn(dim, dim, |_, _| {
        C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

/// Random Hermitian matrix (G + G~)/2 with Gaussian entries.
pub fn random_hermitian<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMatrix {
    symmetrize(&complex_ginibre(dim, rng))
}

/// Haar-distributed unitary via QR of a Ginibre matrix with phase fixing.
pub fn random_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMatrix {
    let qr = complex_ginibre(dim, rng).qr();
    let r = qr.r();
    let mut q = qr.q();
    for k in 0..dim {
        let pivot = r[(k, k)];
        let phase = if pivot.norm() > 0.0 {
            pivot / C64::new(pivot.norm(), 0.0)
        } else {
            C64::new(1.0, 0.0)
        };
        let column = q.column(k) * phase;
        q.set_column(k, &column);
    }
    q
}

/// Random normalized state vector.
pub fn random_state_vector<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CVector {
    loop {
        let v = CVector::from_fn(dim, |_, _| {
            C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
        });
        let norm = v.norm();
        if norm > 1e-6 {
            return v / C64::new(norm, 0.0);
        }
    }
}

/// Random full-rank density operator G G~ / Tr(G G~).
pub fn random_density<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> DensityOperator {
    let g = complex_ginibre(dim, rng);
    let psd = &g * g.adjoint();
    let tr = crate::linalg::trace_re(&psd);
    DensityOperator::from_validated(psd / C64::new(tr, 0.0))
}

/// Random pure density operator.
pub fn random_pure_density<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> DensityOperator {
    let v = random_state_vector(dim, rng);
    DensityOperator::from_validated(&v * v.adjoint())
}

/// Random effect with uniform spectrum in [0, 1] and Haar eigenbasis.
pub fn random_effect<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Effect {
    let u = random_unitary(dim, rng);
    let mut m = zeros(dim);
    for k in 0..dim {
        let v = u.column(k);
        m += &v * v.adjoint() * C64::new(rng.random::<f64>(), 0.0);
    }
    Effect::from_validated(m)
}

/// Random Hermitian observable with spectrum drawn uniformly from the
/// given interval.
pub fn random_bounded_observable<R: Rng + ?Sized>(
    dim: usize,
    lo: f64,
    hi: f64,
    rng: &mut R,
) -> CMatrix {
    let u = random_unitary(dim, rng);
    let mut m = zeros(dim);
    for k in 0..dim {
        let v = u.column(k);
        m += &v * v.adjoint() * C64::new(rng.random_range(lo..=hi), 0.0);
    }
    symmetrize(&m)
}

/// Random rank-r orthogonal projector with Haar range.
pub fn random_projector<R: Rng + ?Sized>(dim: usize, rank: usize, rng: &mut R) -> CMatrix {
    let u = random_unitary(dim, rng);
    let mut p = zeros(dim);
    for k in 0..rank.min(dim) {
        let v = u.column(k);
        p += &v * v.adjoint();
    }
    p
}

/// Two commuting projectors built as spectral functions of one random
/// Hermitian operator: each projects onto a random subset of eigenvectors.
pub fn random_commuting_projectors<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> (CMatrix, CMatrix) {
    let u = random_unitary(dim, rng);
    let mut p1 = zeros(dim);
    let mut p2 = zeros(dim);
    for k in 0..dim {
        let v = u.column(k);
        let unit = &v * v.adjoint();
        if rng.random::<bool>() {
            p1 += &unit;
        }
        if rng.random::<bool>() {
            p2 += &unit;
        }
    }
    (p1, p2)
}

/// Random POVM: F_i = S^(-1/2) G_i S^(-1/2) for random PSD G_i with
/// S = sum G_i, rejecting draws where S is singular within 1e-10.
pub fn random_povm<R: Rng + ?Sized>(
    dim: usize,
    outcomes: usize,
    rng: &mut R,
) -> Result<GeneralizedMeasure> {
    check_capacity(dim)?;
    if outcomes == 0 {
        return Err(crate::error::Error::EmptyMeasure);
    }
    loop {
        let parts: Vec<CMatrix> = (0..outcomes)
            .map(|_| {
                let g = complex_ginibre(dim, rng);
                &g * g.adjoint()
            })
            .collect();
        let total = parts.iter().fold(zeros(dim), |acc, g| acc + g);
        let eig = total.symmetric_eigen();
        let min = eig
            .eigenvalues
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);
        let max = eig.eigenvalues.iter().cloned().fold(0.0f64, f64::max);
        if min <= 1e-10 * max.max(1.0) {
            continue;
        }
        let mut inv_root = zeros(dim);
        for k in 0..dim {
            let v = eig.eigenvectors.column(k);
            inv_root += &v * v.adjoint() * C64::new(1.0 / eig.eigenvalues[k].sqrt(), 0.0);
        }
        let effects: Vec<CMatrix> = parts
            .iter()
            .map(|g| symmetrize(&(&inv_root * g * &inv_root)))
            .collect();
        return GeneralizedMeasure::new(effects, OutcomeSpace::indexed(outcomes), DEFAULT_TOL);
    }
}

/// Random column-stochastic kernel with the given shape.
pub fn random_kernel<R: Rng + ?Sized>(
    outputs: usize,
    inputs: usize,
    rng: &mut R,
) -> crate::observables::StochasticKernel {
    let mut columns: Vec<Vec<f64>> = Vec::with_capacity(inputs);
    for _ in 0..inputs {
        let raw: Vec<f64> = (0..outputs).map(|_| rng.random::<f64>() + 1e-12).collect();
        let sum: f64 = raw.iter().sum();
        let mut col: Vec<f64> = raw.iter().map(|w| w / sum).collect();
        // Make the column sum exactly 1 by assigning the remainder.
        let partial: f64 = col.iter().take(outputs - 1).sum();
        col[outputs - 1] = 1.0 - partial;
        columns.push(col);
    }
    let rows: Vec<Vec<f64>> = (0..outputs)
        .map(|x| (0..inputs).map(|l| columns[l][x]).collect())
        .collect();
    crate::observables::StochasticKernel::from_rows(&rows)
        .expect("constructed kernel is column-stochastic")
}
