//! Dense complex-matrix foundation: Hermiticity and positivity checks,
//! spectral decomposition with degeneracy grouping, Kronecker products,
//! operator square roots, and subspace-intersection projectors.
//!
//! All operations are pure functions over immutable values.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Largest supported Hilbert-space dimension (including extended spaces).
pub const MAX_DIM: usize = 64;

/// Default validation tolerance.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Default relative gap below which eigenvalues are merged into one eigenspace.
pub const DEFAULT_GROUP_TOL: f64 = 1e-8;

pub fn identity(dim: usize) -> CMatrix {
    CMatrix::identity(dim, dim)
}

pub fn zeros(dim: usize) -> CMatrix {
    CMatrix::zeros(dim, dim)
}

pub fn basis_vector(dim: usize, index: usize) -> CVector {
    let mut v = CVector::zeros(dim);
    v[index] = C64::new(1.0, 0.0);
    v
}

/// Builds a matrix from row-major real entries.
pub fn from_real_rows(dim: usize, rows: &[f64]) -> CMatrix {
    CMatrix::from_row_slice(
        dim,
        dim,
        &rows.iter().map(|&x| C64::new(x, 0.0)).collect::<Vec<_>>(),
    )
}

pub fn check_square(m: &CMatrix) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    Ok(m.nrows())
}

pub fn check_finite(m: &CMatrix) -> Result<()> {
    if m.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite)
    }
}

pub fn check_capacity(dim: usize) -> Result<()> {
    if dim > MAX_DIM {
        Err(Error::Capacity { dim, max: MAX_DIM })
    } else {
        Ok(())
    }
}

pub fn check_same_dim(a: &CMatrix, b: &CMatrix) -> Result<usize> {
    let da = check_square(a)?;
    let db = check_square(b)?;
    if da != db {
        return Err(Error::DimensionMismatch {
            left: da,
            right: db,
        });
    }
    Ok(da)
}

pub fn trace(m: &CMatrix) -> C64 {
    (0..m.nrows()).map(|i| m[(i, i)]).sum()
}

pub fn trace_re(m: &CMatrix) -> f64 {
    trace(m).re
}

/// Largest entrywise modulus.
pub fn max_abs_entry(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Max entrywise |M - M~| where M~ is the conjugate transpose.
pub fn adjoint_deviation(m: &CMatrix) -> f64 {
    let adj = m.adjoint();
    max_abs_entry(&(m - adj))
}

/// Operator (spectral) norm: the largest singular value.
pub fn spectral_norm(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone()
        .singular_values()
        .iter()
        .cloned()
        .fold(0.0, f64::max)
}

pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

/// True iff the max entrywise |M - M~| is at most `tol`.
pub fn is_hermitian(m: &CMatrix, tol: f64) -> Result<bool> {
    check_square(m)?;
    check_finite(m)?;
    Ok(adjoint_deviation(m) <= tol)
}

pub fn check_hermitian(m: &CMatrix, tol: f64) -> Result<()> {
    check_square(m)?;
    check_finite(m)?;
    let deviation = adjoint_deviation(m);
    if deviation <= tol {
        Ok(())
    } else {
        Err(Error::NotHermitian { deviation })
    }
}

/// Hermitian part (M + M~)/2. Bit-identical to M when M is exactly Hermitian.
pub fn symmetrize(m: &CMatrix) -> CMatrix {
    let adj = m.adjoint();
    (m + adj).map(|z| z * 0.5)
}

/// One merged eigenspace of a Hermitian operator.
#[derive(Debug, Clone)]
pub struct Eigenspace {
    /// Representative eigenvalue (mean over the merged group).
    pub eigenvalue: f64,
    /// Basis-independent orthogonal projector onto the eigenspace.
    pub projector: CMatrix,
    pub multiplicity: usize,
}

/// Hermitian eigendecomposition with degeneracy grouping.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    /// All eigenvalues, ascending, one per eigenvector.
    pub eigenvalues: Vec<f64>,
    /// Orthonormal eigenvectors as columns, ordered as `eigenvalues`.
    pub eigenvectors: CMatrix,
    /// Eigenspaces after merging eigenvalues with relative gap below `group_tol`.
    pub eigenspaces: Vec<Eigenspace>,
}

impl SpectralDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(0.0)
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(0.0)
    }

    /// Reconstructs the operator as the sum of eigenvalue * projector.
    pub fn reconstruct(&self) -> CMatrix {
        let dim = self.dim();
        let mut out = zeros(dim);
        for space in &self.eigenspaces {
            out += &space.projector * C64::new(space.eigenvalue, 0.0);
        }
        out
    }

    /// Applies a real function to the spectrum: f(H) = sum f(lambda) P.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> f64) -> CMatrix {
        let dim = self.dim();
        let mut out = zeros(dim);
        for space in &self.eigenspaces {
            out += &space.projector * C64::new(f(space.eigenvalue), 0.0);
        }
        out
    }
}

/// Spectral decomposition of a Hermitian matrix.
///
/// Eigenvalues are sorted ascending. Adjacent eigenvalues whose gap is at
/// most `group_tol * max(1, |lambda|)` are merged into a single eigenspace,
/// so only the basis-independent grouped projectors are exposed downstream.
pub fn eig_hermitian(h: &CMatrix, group_tol: f64) -> Result<SpectralDecomposition> {
    check_hermitian(h, DEFAULT_TOL)?;
    let dim = check_square(h)?;
    check_capacity(dim)?;

    let eig = symmetrize(h).symmetric_eigen();
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

    let eigenvalues: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut eigenvectors = CMatrix::zeros(dim, dim);
    for (col, &k) in order.iter().enumerate() {
        eigenvectors.set_column(col, &eig.eigenvectors.column(k));
    }

    let mut eigenspaces = Vec::new();
    let mut start = 0;
    for k in 0..dim {
        let last_of_group = k + 1 == dim || {
            let gap = eigenvalues[k + 1] - eigenvalues[k];
            let scale = 1.0f64
                .max(eigenvalues[k].abs())
                .max(eigenvalues[k + 1].abs());
            gap > group_tol * scale
        };
        if last_of_group {
            let members = &eigenvalues[start..=k];
            let mut projector = zeros(dim);
            for col in start..=k {
                let v = eigenvectors.column(col);
                projector += &v * v.adjoint();
            }
            eigenspaces.push(Eigenspace {
                eigenvalue: members.iter().sum::<f64>() / members.len() as f64,
                projector,
                multiplicity: members.len(),
            });
            start = k + 1;
        }
    }

    Ok(SpectralDecomposition {
        eigenvalues,
        eigenvectors,
        eigenspaces,
    })
}

/// Eigenvalues only, ascending. Skips projector assembly.
pub fn hermitian_eigenvalues(h: &CMatrix) -> Result<Vec<f64>> {
    check_hermitian(h, DEFAULT_TOL)?;
    let mut vals: Vec<f64> = symmetrize(h)
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .cloned()
        .collect();
    vals.sort_by(f64::total_cmp);
    Ok(vals)
}

pub fn min_eigenvalue(h: &CMatrix) -> Result<f64> {
    Ok(hermitian_eigenvalues(h)?.first().copied().unwrap_or(0.0))
}

/// True iff the smallest eigenvalue is at least `-tol`.
pub fn is_positive_semidefinite(h: &CMatrix, tol: f64) -> Result<bool> {
    check_hermitian(h, tol)?;
    Ok(min_eigenvalue(h)? >= -tol)
}

pub fn check_psd(h: &CMatrix, tol: f64) -> Result<()> {
    check_hermitian(h, tol)?;
    let min = min_eigenvalue(h)?;
    if min >= -tol {
        Ok(())
    } else {
        Err(Error::NotPositiveSemidefinite {
            min_eigenvalue: min,
        })
    }
}

/// Kronecker product A (x) B with row-major (A-major) index mapping:
/// entry ((i*db + k), (j*db + l)) = A[i,j] * B[k,l].
pub fn tensor(a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    let da = check_square(a)?;
    let db = check_square(b)?;
    check_finite(a)?;
    check_finite(b)?;
    check_capacity(da * db)?;
    let dim = da * db;
    let mut out = CMatrix::zeros(dim, dim);
    for i in 0..da {
        for j in 0..da {
            let aij = a[(i, j)];
            for k in 0..db {
                for l in 0..db {
                    out[(i * db + k, j * db + l)] = aij * b[(k, l)];
                }
            }
        }
    }
    Ok(out)
}

/// Principal square root of a PSD matrix.
///
/// Eigenvalues in `(-tol, 0)` are clamped to 0; anything below `-tol` is a
/// validation error.
pub fn sqrt_psd(h: &CMatrix, tol: f64) -> Result<CMatrix> {
    check_hermitian(h, tol)?;
    let eig = eig_hermitian(h, 0.0)?;
    let min = eig.min_eigenvalue();
    if min < -tol {
        return Err(Error::NotPositiveSemidefinite {
            min_eigenvalue: min,
        });
    }
    Ok(eig.map_spectrum(|lambda| lambda.max(0.0).sqrt()))
}

/// Square root of an operator already known to be PSD up to validation
/// tolerance; all negative eigenvalues are clamped to zero.
pub(crate) fn psd_sqrt_clamped(h: &CMatrix) -> CMatrix {
    let eig = symmetrize(h).symmetric_eigen();
    let dim = h.nrows();
    let mut out = zeros(dim);
    for k in 0..dim {
        let lambda = eig.eigenvalues[k].max(0.0);
        let v = eig.eigenvectors.column(k);
        out += &v * v.adjoint() * C64::new(lambda.sqrt(), 0.0);
    }
    out
}

/// ||P^2 - P|| in operator norm.
pub fn projector_deviation(p: &CMatrix) -> f64 {
    spectral_norm(&(p * p - p))
}

pub fn check_projector(p: &CMatrix, tol: f64) -> Result<()> {
    check_hermitian(p, tol)?;
    let deviation = projector_deviation(p);
    if deviation <= tol {
        Ok(())
    } else {
        Err(Error::NotProjector { deviation })
    }
}

pub fn is_projector(p: &CMatrix, tol: f64) -> bool {
    check_projector(p, tol).is_ok()
}

/// Orthogonal projector onto range(P1) intersect range(P2).
///
/// Computed from an orthonormal basis of the joint null space of (I - P1)
/// and (I - P2): the eigenvectors of S = (I - P1) + (I - P2) with eigenvalue
/// at most `tol`. Deterministic and toleranced, no iterated products.
pub fn meet_projectors(p1: &CMatrix, p2: &CMatrix, tol: f64) -> Result<CMatrix> {
    let dim = check_same_dim(p1, p2)?;
    check_projector(p1, tol)?;
    check_projector(p2, tol)?;

    let id = identity(dim);
    let s = (&id - p1) + (&id - p2);
    let eig = eig_hermitian(&s, 0.0)?;

    let mut projector = zeros(dim);
    for (k, &lambda) in eig.eigenvalues.iter().enumerate() {
        if lambda <= tol {
            let v = eig.eigenvectors.column(k);
            projector += &v * v.adjoint();
        }
    }
    Ok(projector)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn diag(entries: &[f64]) -> CMatrix {
        let dim = entries.len();
        CMatrix::from_fn(dim, dim, |i, j| {
            if i == j {
                c(entries[i], 0.0)
            } else {
                c(0.0, 0.0)
            }
        })
    }

    fn max_diff(a: &CMatrix, b: &CMatrix) -> f64 {
        max_abs_entry(&(a - b))
    }

    #[test]
    fn hermiticity_of_identity_and_shift() {
        assert!(is_hermitian(&identity(3), 1e-9).unwrap());
        let shift =
            CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        assert!(!is_hermitian(&shift, 1e-9).unwrap());
    }

    #[test]
    fn hermiticity_with_imaginary_offdiagonal() {
        // [[0, -i], [i, 0]]: conjugate transpose recomputed entrywise.
        let m =
            CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)]);
        let mut adj = CMatrix::zeros(2, 2);
        for i in 0..2 {
            for j in 0..2 {
                adj[(i, j)] = m[(j, i)].conj();
            }
        }
        assert_eq!(max_diff(&m, &adj), 0.0);
        assert!(is_hermitian(&m, 1e-9).unwrap());
    }

    #[test]
    fn hermiticity_rejects_non_square() {
        let m = CMatrix::from_row_slice(1, 2, &[c(1.0, 0.0), c(0.0, 0.0)]);
        assert!(matches!(
            is_hermitian(&m, 1e-9),
            Err(Error::NotSquare { rows: 1, cols: 2 })
        ));
    }

    #[test]
    fn eig_groups_degenerate_diagonal() {
        let d = eig_hermitian(&diag(&[3.0, 3.0, 5.0]), 1e-8).unwrap();
        assert_eq!(d.eigenspaces.len(), 2);
        assert_eq!(d.eigenspaces[0].multiplicity, 2);
        assert!((d.eigenspaces[0].eigenvalue - 3.0).abs() < 1e-12);
        assert!((d.eigenspaces[1].eigenvalue - 5.0).abs() < 1e-12);
        assert!(max_diff(&d.eigenspaces[0].projector, &diag(&[1.0, 1.0, 0.0])) < 1e-12);
        assert!(max_diff(&d.eigenspaces[1].projector, &diag(&[0.0, 0.0, 1.0])) < 1e-12);
    }

    #[test]
    fn eig_pauli_z_ascending() {
        let d = eig_hermitian(&diag(&[1.0, -1.0]), 1e-8).unwrap();
        assert_eq!(d.eigenvalues, vec![-1.0, 1.0]);
        assert!(max_diff(&d.eigenspaces[0].projector, &diag(&[0.0, 1.0])) < 1e-12);
        assert!(max_diff(&d.eigenspaces[1].projector, &diag(&[1.0, 0.0])) < 1e-12);
    }

    #[test]
    fn eig_pauli_x_projectors() {
        let h =
            CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]);
        let d = eig_hermitian(&h, 1e-8).unwrap();
        assert!((d.eigenvalues[0] + 1.0).abs() < 1e-12);
        assert!((d.eigenvalues[1] - 1.0).abs() < 1e-12);
        let minus = CMatrix::from_row_slice(
            2,
            2,
            &[c(0.5, 0.0), c(-0.5, 0.0), c(-0.5, 0.0), c(0.5, 0.0)],
        );
        let plus =
            CMatrix::from_row_slice(2, 2, &[c(0.5, 0.0), c(0.5, 0.0), c(0.5, 0.0), c(0.5, 0.0)]);
        assert!(max_diff(&d.eigenspaces[0].projector, &minus) < 1e-12);
        assert!(max_diff(&d.eigenspaces[1].projector, &plus) < 1e-12);
        // Eigenspace equations H P = lambda P checked by direct multiplication.
        for space in &d.eigenspaces {
            let lhs = &h * &space.projector;
            let rhs = &space.projector * c(space.eigenvalue, 0.0);
            assert!(max_diff(&lhs, &rhs) < 1e-12);
        }
    }

    #[test]
    fn eig_rejects_non_hermitian() {
        let m =
            CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        assert!(matches!(
            eig_hermitian(&m, 1e-8),
            Err(Error::NotHermitian { .. })
        ));
    }

    #[test]
    fn psd_examples() {
        assert!(is_positive_semidefinite(&zeros(3), 1e-9).unwrap());
        assert!(!is_positive_semidefinite(&diag(&[0.5, -0.01]), 1e-9).unwrap());
        // (1/2)[[1,1],[1,1]]: trace 1, determinant 0, so the spectrum is {0, 1}.
        let half =
            CMatrix::from_row_slice(2, 2, &[c(0.5, 0.0), c(0.5, 0.0), c(0.5, 0.0), c(0.5, 0.0)]);
        let eigs = hermitian_eigenvalues(&half).unwrap();
        assert!(eigs[0].abs() < 1e-12 && (eigs[1] - 1.0).abs() < 1e-12);
        assert!(is_positive_semidefinite(&half, 1e-9).unwrap());
    }

    #[test]
    fn tensor_identities_and_pauli_block() {
        assert_eq!(
            max_diff(&tensor(&identity(2), &identity(2)).unwrap(), &identity(4)),
            0.0
        );
        assert_eq!(
            max_diff(
                &tensor(&diag(&[1.0, 0.0]), &diag(&[1.0, 0.0])).unwrap(),
                &diag(&[1.0, 0.0, 0.0, 0.0])
            ),
            0.0
        );
        // sigma_z (x) sigma_x expanded by hand.
        let z = diag(&[1.0, -1.0]);
        let x =
            CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]);
        let expected = CMatrix::from_row_slice(
            4,
            4,
            &[
                c(0.0, 0.0),
                c(1.0, 0.0),
                c(0.0, 0.0),
                c(0.0, 0.0),
                c(1.0, 0.0),
                c(0.0, 0.0),
                c(0.0, 0.0),
                c(0.0, 0.0),
                c(0.0, 0.0),
                c(0.0, 0.0),
                c(0.0, 0.0),
                c(-1.0, 0.0),
                c(0.0, 0.0),
                c(0.0, 0.0),
                c(-1.0, 0.0),
                c(0.0, 0.0),
            ],
        );
        assert_eq!(max_diff(&tensor(&z, &x).unwrap(), &expected), 0.0);
    }

    #[test]
    fn tensor_rejects_oversized_output() {
        let a = identity(16);
        let b = identity(8);
        assert!(matches!(
            tensor(&a, &b),
            Err(Error::Capacity { dim: 128, .. })
        ));
    }

    #[test]
    fn tensor_mixed_product_rule() {
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        for _ in 0..20 {
            let a = crate::random::complex_ginibre(3, &mut rng);
            let b = crate::random::complex_ginibre(2, &mut rng);
            let p = crate::random::complex_ginibre(3, &mut rng);
            let q = crate::random::complex_ginibre(2, &mut rng);
            let lhs = tensor(&a, &b).unwrap() * tensor(&p, &q).unwrap();
            let rhs = tensor(&(&a * &p), &(&b * &q)).unwrap();
            assert!(max_diff(&lhs, &rhs) < 1e-12);
        }
    }

    #[test]
    fn tensor_associativity_is_exact_on_dyadic_entries() {
        // Entries k/16 with |k| <= 16 keep every product exact in f64, so
        // the two association orders must agree bit for bit.
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        let mut dyadic = |dim: usize| {
            CMatrix::from_fn(dim, dim, |_, _| {
                c(
                    rng.random_range(-16i32..=16) as f64 / 16.0,
                    rng.random_range(-16i32..=16) as f64 / 16.0,
                )
            })
        };
        for _ in 0..50 {
            let a = dyadic(2);
            let b = dyadic(3);
            let d = dyadic(2);
            let left = tensor(&tensor(&a, &b).unwrap(), &d).unwrap();
            let right = tensor(&a, &tensor(&b, &d).unwrap()).unwrap();
            assert_eq!(max_diff(&left, &right), 0.0);
        }
    }

    #[test]
    fn sqrt_examples() {
        assert!(max_diff(&sqrt_psd(&identity(3), 1e-9).unwrap(), &identity(3)) < 1e-12);
        assert!(
            max_diff(
                &sqrt_psd(&diag(&[4.0, 9.0]), 1e-9).unwrap(),
                &diag(&[2.0, 3.0])
            ) < 1e-12
        );
        let p =
            CMatrix::from_row_slice(2, 2, &[c(0.5, 0.0), c(0.5, 0.0), c(0.5, 0.0), c(0.5, 0.0)]);
        assert!(max_diff(&sqrt_psd(&p, 1e-9).unwrap(), &p) < 1e-9);
    }

    #[test]
    fn sqrt_clamps_tiny_negative_and_rejects_real_negative() {
        let nearly = diag(&[1.0, -1e-10]);
        let root = sqrt_psd(&nearly, 1e-9).unwrap();
        assert!(root[(1, 1)].re.abs() < 1e-5 && root[(1, 1)].re >= 0.0);
        assert!(matches!(
            sqrt_psd(&diag(&[1.0, -0.01]), 1e-9),
            Err(Error::NotPositiveSemidefinite { .. })
        ));
    }

    #[test]
    fn meet_examples() {
        let p = diag(&[1.0, 0.0]);
        let q =
            CMatrix::from_row_slice(2, 2, &[c(0.5, 0.0), c(0.5, 0.0), c(0.5, 0.0), c(0.5, 0.0)]);
        assert!(max_diff(&meet_projectors(&p, &p, 1e-9).unwrap(), &p) < 1e-9);
        let complement = identity(2) - &p;
        assert!(spectral_norm(&meet_projectors(&p, &complement, 1e-9).unwrap()) < 1e-9);
        // Two distinct one-dimensional ranges of a qubit meet trivially:
        // rank(P) + rank(Q) - rank of their union span = 1 + 1 - 2 = 0.
        assert!(spectral_norm(&meet_projectors(&p, &q, 1e-9).unwrap()) < 1e-9);
    }

    #[test]
    fn meet_with_trivial_projectors() {
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        for dim in [2usize, 3, 4] {
            let p = crate::random::random_projector(dim, 1 + dim / 2, &mut rng);
            assert!(max_diff(&meet_projectors(&p, &identity(dim), 1e-9).unwrap(), &p) < 1e-9);
            assert!(spectral_norm(&meet_projectors(&p, &zeros(dim), 1e-9).unwrap()) < 1e-9);
        }
    }

    #[test]
    fn meet_is_symmetric() {
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        for _ in 0..25 {
            let p = crate::random::random_projector(4, 2, &mut rng);
            let q = crate::random::random_projector(4, 3, &mut rng);
            let pq = meet_projectors(&p, &q, 1e-9).unwrap();
            let qp = meet_projectors(&q, &p, 1e-9).unwrap();
            assert!(max_diff(&pq, &qp) < 1e-9);
            assert!(projector_deviation(&pq) < 1e-9);
        }
    }

    #[test]
    fn meet_rejects_non_projector() {
        let p = diag(&[1.0, 0.0]);
        let e = diag(&[0.5, 0.5]);
        assert!(matches!(
            meet_projectors(&p, &e, 1e-9),
            Err(Error::NotProjector { .. })
        ));
    }

    #[test]
    fn spectral_reconstruction_on_random_hermitian() {
        let mut rng = ChaCha12Rng::seed_from_u64(42);
        for trial in 0..500 {
            let dim = 2 + trial % 7;
            let h = crate::random::random_hermitian(dim, &mut rng);
            let d = eig_hermitian(&h, 1e-8).unwrap();
            assert!(spectral_norm(&(d.reconstruct() - &h)) < 1e-9);
        }
    }

    #[test]
    fn grouped_projectors_are_an_orthogonal_resolution() {
        let mut rng = ChaCha12Rng::seed_from_u64(43);
        for trial in 0..100 {
            let dim = 2 + trial % 7;
            let h = crate::random::random_hermitian(dim, &mut rng);
            let d = eig_hermitian(&h, 1e-8).unwrap();
            let mut sum = zeros(dim);
            for (j, sj) in d.eigenspaces.iter().enumerate() {
                sum += &sj.projector;
                for (k, sk) in d.eigenspaces.iter().enumerate() {
                    let product = &sj.projector * &sk.projector;
                    let expected = if j == k {
                        sj.projector.clone()
                    } else {
                        zeros(dim)
                    };
                    assert!(spectral_norm(&(product - expected)) < 1e-8);
                }
            }
            assert!(spectral_norm(&(sum - identity(dim))) < 1e-9);
        }
    }

    #[test]
    fn sqrt_squares_back_on_random_psd() {
        let mut rng = ChaCha12Rng::seed_from_u64(44);
        for trial in 0..500 {
            let dim = 2 + trial % 7;
            let g = crate::random::complex_ginibre(dim, &mut rng);
            let h = &g * g.adjoint();
            let root = sqrt_psd(&h, 1e-9).unwrap();
            assert!(spectral_norm(&(&root * &root - &h)) < 1e-9 * spectral_norm(&h).max(1.0));
            assert!(spectral_norm(&commutator(&root, &h)) < 1e-8 * spectral_norm(&h).max(1.0));
        }
    }

    #[test]
    fn eigenvector_matrix_is_unitary() {
        let mut rng = ChaCha12Rng::seed_from_u64(45);
        for _ in 0..50 {
            let h = crate::random::random_hermitian(5, &mut rng);
            let d = eig_hermitian(&h, 1e-8).unwrap();
            let q = &d.eigenvectors;
            assert!(spectral_norm(&(q.adjoint() * q - identity(5))) < 1e-9);
        }
    }
}
