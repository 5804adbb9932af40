//! States, effects, Born probabilities, and the property taxonomy
//! (counterproperty, sharp, regular, semitransparent, real-in-a-state).
//!
//! A density operator is a positive unit-trace operator; an effect E is a
//! Hermitian operator with O <= E <= I. The semitransparent effect I/2
//! yields probability 1/2 in every state; effects whose spectrum straddles
//! 1/2 on both sides are regular.

use crate::error::{Error, Result};
use crate::linalg::{
    self, check_capacity, check_hermitian, check_square, hermitian_eigenvalues, identity,
    meet_projectors, spectral_norm, symmetrize, trace, zeros, CMatrix, CVector, C64, DEFAULT_TOL,
};

/// Smallest Hilbert-space dimension for domain objects.
pub const MIN_DIM: usize = 2;

fn check_domain_dim(dim: usize) -> Result<()> {
    if dim < MIN_DIM {
        return Err(Error::ParameterRange {
            name: "dim",
            value: dim as f64,
            expected: "at least 2",
        });
    }
    check_capacity(dim)
}

/// Positive unit-trace operator representing a state.
///
/// The stored matrix is the Hermitian part of the input, which is
/// bit-identical to the input when it is exactly Hermitian.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    matrix: CMatrix,
}

impl DensityOperator {
    pub fn new(matrix: CMatrix, tol: f64) -> Result<Self> {
        let dim = check_square(&matrix)?;
        check_domain_dim(dim)?;
        check_hermitian(&matrix, tol)?;
        let matrix = symmetrize(&matrix);
        let min = linalg::min_eigenvalue(&matrix)?;
        if min < -tol {
            return Err(Error::NotPositiveSemidefinite {
                min_eigenvalue: min,
            });
        }
        let tr = linalg::trace_re(&matrix);
        if (tr - 1.0).abs() > tol {
            return Err(Error::TraceNotOne { trace: tr });
        }
        Ok(Self { matrix })
    }

    /// Construction path for matrices produced by internal arithmetic that
    /// preserves validity (still symmetrized for hygiene).
    pub(crate) fn from_validated(matrix: CMatrix) -> Self {
        Self {
            matrix: symmetrize(&matrix),
        }
    }

    /// Pure state |v><v| from a (not necessarily normalized) vector.
    pub fn pure(v: &CVector) -> Result<Self> {
        let norm_sq: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if norm_sq <= 0.0 || !norm_sq.is_finite() {
            return Err(Error::ParameterRange {
                name: "state vector norm",
                value: norm_sq.sqrt(),
                expected: "positive and finite",
            });
        }
        let outer = v * v.adjoint() / C64::new(norm_sq, 0.0);
        Self::new(outer, DEFAULT_TOL)
    }

    /// Basis state |i><i|.
    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        check_domain_dim(dim)?;
        let mut m = zeros(dim);
        m[(index, index)] = C64::new(1.0, 0.0);
        Ok(Self { matrix: m })
    }

    /// The maximally mixed state I/d.
    pub fn maximally_mixed(dim: usize) -> Result<Self> {
        check_domain_dim(dim)?;
        Ok(Self {
            matrix: identity(dim) / C64::new(dim as f64, 0.0),
        })
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }
}

/// Hermitian operator with spectrum in [0, 1]; the operational
/// generalization of a projector-valued property.
#[derive(Debug, Clone, PartialEq)]
pub struct Effect {
    matrix: CMatrix,
}

/// Exhaustive, mutually exclusive classification of an effect, decided in
/// the order the variants are listed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EffectClass {
    TrivialO,
    TrivialI,
    Semitransparent,
    SharpProjection,
    Regular,
    BelowSemitransparent,
    AboveSemitransparent,
}

impl std::fmt::Display for EffectClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            EffectClass::TrivialO => "Trivial-O",
            EffectClass::TrivialI => "Trivial-I",
            EffectClass::Semitransparent => "Semitransparent",
            EffectClass::SharpProjection => "SharpProjection",
            EffectClass::Regular => "Regular",
            EffectClass::BelowSemitransparent => "BelowSemitransparent",
            EffectClass::AboveSemitransparent => "AboveSemitransparent",
        };
        f.write_str(name)
    }
}

impl Effect {
    pub fn new(matrix: CMatrix, tol: f64) -> Result<Self> {
        let dim = check_square(&matrix)?;
        check_domain_dim(dim)?;
        check_hermitian(&matrix, tol)?;
        let matrix = symmetrize(&matrix);
        let eigs = hermitian_eigenvalues(&matrix)?;
        let min = eigs.first().copied().unwrap_or(0.0);
        let max = eigs.last().copied().unwrap_or(0.0);
        if min < -tol || max > 1.0 + tol {
            return Err(Error::NotEffect { min, max });
        }
        Ok(Self { matrix })
    }

    pub(crate) fn from_validated(matrix: CMatrix) -> Self {
        Self {
            matrix: symmetrize(&matrix),
        }
    }

    /// The impossible property O.
    pub fn null(dim: usize) -> Result<Self> {
        check_domain_dim(dim)?;
        Ok(Self { matrix: zeros(dim) })
    }

    /// The truistic property I.
    pub fn identity(dim: usize) -> Result<Self> {
        check_domain_dim(dim)?;
        Ok(Self {
            matrix: identity(dim),
        })
    }

    /// The semitransparent effect I/2.
    pub fn semitransparent(dim: usize) -> Result<Self> {
        check_domain_dim(dim)?;
        Ok(Self {
            matrix: identity(dim) * C64::new(0.5, 0.0),
        })
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// The counterproperty I - E. Applying it twice returns an effect equal
    /// to E (bit-exact whenever the entries make the subtraction exact).
    pub fn complement(&self) -> Effect {
        Effect {
            matrix: identity(self.dim()) - &self.matrix,
        }
    }

    /// Sharpness: E is a projection, ||E^2 - E|| <= tol.
    ///
    /// For projections this coincides with meet(E, I - E) = O.
    pub fn is_sharp(&self, tol: f64) -> bool {
        linalg::projector_deviation(&self.matrix) <= tol
    }

    /// Regularity: the spectrum of E - I/2 contains a value above `tol`
    /// and a value below `-tol`. An eigenvalue exactly at 1/2 counts
    /// toward neither side.
    pub fn is_regular(&self, tol: f64) -> bool {
        let eigs = hermitian_eigenvalues(&self.matrix).expect("stored matrix is Hermitian");
        let min = eigs.first().copied().unwrap_or(0.0);
        let max = eigs.last().copied().unwrap_or(0.0);
        max - 0.5 > tol && min - 0.5 < -tol
    }

    /// First matching label in the order Trivial-O, Trivial-I,
    /// Semitransparent, SharpProjection, Regular, BelowSemitransparent,
    /// AboveSemitransparent. Sharpness wins over regularity.
    pub fn classify(&self, tol: f64) -> EffectClass {
        let dim = self.dim();
        if spectral_norm(&self.matrix) <= tol {
            return EffectClass::TrivialO;
        }
        if spectral_norm(&(&self.matrix - identity(dim))) <= tol {
            return EffectClass::TrivialI;
        }
        if spectral_norm(&(&self.matrix - identity(dim) * C64::new(0.5, 0.0))) <= tol {
            return EffectClass::Semitransparent;
        }
        if self.is_sharp(tol) {
            return EffectClass::SharpProjection;
        }
        if self.is_regular(tol) {
            return EffectClass::Regular;
        }
        let eigs = hermitian_eigenvalues(&self.matrix).expect("stored matrix is Hermitian");
        let max = eigs.last().copied().unwrap_or(0.0);
        if max <= 0.5 + tol {
            EffectClass::BelowSemitransparent
        } else {
            EffectClass::AboveSemitransparent
        }
    }
}

/// True iff the spectrum of a Hermitian matrix lies in [-tol, 1 + tol].
pub fn is_effect(h: &CMatrix, tol: f64) -> Result<bool> {
    check_hermitian(h, tol)?;
    let eigs = hermitian_eigenvalues(h)?;
    let min = eigs.first().copied().unwrap_or(0.0);
    let max = eigs.last().copied().unwrap_or(0.0);
    Ok(min >= -tol && max <= 1.0 + tol)
}

/// Born probability w = Re Tr(rho E), clamped to [0, 1] when within the
/// default tolerance of the boundary.
pub fn born_probability(rho: &DensityOperator, effect: &Effect) -> Result<f64> {
    if rho.dim() != effect.dim() {
        return Err(Error::DimensionMismatch {
            left: rho.dim(),
            right: effect.dim(),
        });
    }
    let w = trace(&(rho.matrix() * effect.matrix())).re;
    Ok(clamp_probability(w, DEFAULT_TOL))
}

pub(crate) fn clamp_probability(w: f64, tol: f64) -> f64 {
    if w < 0.0 && w >= -tol {
        0.0
    } else if w > 1.0 && w <= 1.0 + tol {
        1.0
    } else {
        w
    }
}

/// A property is real in a state when it is (statistically) either true or
/// false there: the Born probability is within `tol` of 0 or 1.
pub fn is_real_in_state(effect: &Effect, rho: &DensityOperator, tol: f64) -> Result<bool> {
    let w = born_probability(rho, effect)?;
    Ok(w <= tol || w >= 1.0 - tol)
}

/// Sharpness statement for projections: meet(P, I - P) = O within tol.
pub fn sharp_meet_is_null(p: &CMatrix, tol: f64) -> Result<bool> {
    let dim = check_square(p)?;
    let complement = identity(dim) - p;
    let meet = meet_projectors(p, &complement, tol)?;
    Ok(spectral_norm(&meet) <= tol)
}

/// Deterministic family of d^2 states spanning the real space of Hermitian
/// matrices: the basis states |i><i|, and for each i < j the +1 eigenstates
/// of the real and imaginary matrix units.
pub fn spanning_states(dim: usize) -> Result<Vec<DensityOperator>> {
    check_domain_dim(dim)?;
    let mut states = Vec::with_capacity(dim * dim);
    for i in 0..dim {
        states.push(DensityOperator::basis(dim, i)?);
    }
    let normalizer = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    for i in 0..dim {
        for j in (i + 1)..dim {
            let mut plus = CVector::zeros(dim);
            plus[i] = normalizer;
            plus[j] = normalizer;
            states.push(DensityOperator::pure(&plus)?);

            let mut plus_i = CVector::zeros(dim);
            plus_i[i] = normalizer;
            plus_i[j] = C64::new(0.0, std::f64::consts::FRAC_1_SQRT_2);
            states.push(DensityOperator::pure(&plus_i)?);
        }
    }
    Ok(states)
}
