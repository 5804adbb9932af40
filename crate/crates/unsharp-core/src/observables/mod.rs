//! Sharp (PVM) and unsharp (POVM) observables: validation, spectral
//! construction, smearing by stochastic kernels, coexistence tests, moment
//! operators, uncertainty relations, informational completeness, and CHSH
//! evaluation.
//!
//! Outcome spaces are finite and ordered; a smearing kernel is a
//! column-stochastic matrix (each column is a probability measure over the
//! output outcomes for one input outcome).

mod coexist;

pub use coexist::{
    coexist_binary_povms, coexist_binary_povms_serial, CoexistenceOutcome, SearchBudget,
};

use nalgebra::DMatrix;

use crate::effects::{DensityOperator, Effect};
use crate::error::{Error, Result};
use crate::linalg::{
    self, check_hermitian, check_same_dim, check_square, commutator, eig_hermitian,
    hermitian_eigenvalues, identity, spectral_norm, symmetrize, trace, CMatrix, C64, DEFAULT_TOL,
};

/// Tolerance on kernel column sums.
pub const KERNEL_COLSUM_TOL: f64 = 1e-12;

/// Relative singular-value cutoff for the informational-completeness rank test.
pub const IC_RANK_TOL: f64 = 1e-8;

pub fn pauli_x() -> CMatrix {
    CMatrix::from_row_slice(
        2,
        2,
        &[
            C64::new(0.0, 0.0),
            C64::new(1.0, 0.0),
            C64::new(1.0, 0.0),
            C64::new(0.0, 0.0),
        ],
    )
}

pub fn pauli_y() -> CMatrix {
    CMatrix::from_row_slice(
        2,
        2,
        &[
            C64::new(0.0, 0.0),
            C64::new(0.0, -1.0),
            C64::new(0.0, 1.0),
            C64::new(0.0, 0.0),
        ],
    )
}

pub fn pauli_z() -> CMatrix {
    CMatrix::from_row_slice(
        2,
        2,
        &[
            C64::new(1.0, 0.0),
            C64::new(0.0, 0.0),
            C64::new(0.0, 0.0),
            C64::new(-1.0, 0.0),
        ],
    )
}

/// n . sigma for a real 3-vector n.
pub fn spin_component(direction: [f64; 3]) -> CMatrix {
    pauli_x() * C64::new(direction[0], 0.0)
        + pauli_y() * C64::new(direction[1], 0.0)
        + pauli_z() * C64::new(direction[2], 0.0)
}

/// Finite ordered list of outcome labels, optionally with measurement values.
#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeSpace {
    labels: Vec<String>,
    values: Option<Vec<f64>>,
}

impl OutcomeSpace {
    pub fn new(labels: Vec<String>, values: Option<Vec<f64>>) -> Result<Self> {
        let mut seen = std::collections::BTreeSet::new();
        for label in &labels {
            if !seen.insert(label.as_str()) {
                return Err(Error::DuplicateLabels);
            }
        }
        if let Some(v) = &values {
            if v.len() != labels.len() {
                return Err(Error::OutcomeShape {
                    labels: labels.len(),
                    values: v.len(),
                });
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::NonFinite);
            }
        }
        Ok(Self { labels, values })
    }

    /// Labels "0", "1", ..., "n-1"; no values.
    pub fn indexed(n: usize) -> Self {
        Self {
            labels: (0..n).map(|i| i.to_string()).collect(),
            values: None,
        }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn values(&self) -> Option<&[f64]> {
        self.values.as_deref()
    }
}

/// Formats an outcome value, collapsing near-integers.
pub(crate) fn format_value(x: f64) -> String {
    let rounded = x.round();
    if (x - rounded).abs() <= 1e-9 * 1.0f64.max(x.abs()) {
        format!("{}", rounded as i64)
    } else {
        format!("{x:.6}")
    }
}

/// Finite family of mutually orthogonal projectors summing to the identity.
#[derive(Debug, Clone)]
pub struct ProjectiveMeasure {
    outcomes: OutcomeSpace,
    projectors: Vec<CMatrix>,
}

impl ProjectiveMeasure {
    pub fn new(projectors: Vec<CMatrix>, outcomes: OutcomeSpace, tol: f64) -> Result<Self> {
        if projectors.is_empty() {
            return Err(Error::EmptyMeasure);
        }
        if outcomes.len() != projectors.len() {
            return Err(Error::OutcomeShape {
                labels: outcomes.len(),
                values: projectors.len(),
            });
        }
        let dim = check_square(&projectors[0])?;
        for (index, p) in projectors.iter().enumerate() {
            let d = check_square(p)?;
            if d != dim {
                return Err(Error::at_element(
                    index,
                    Error::DimensionMismatch {
                        left: dim,
                        right: d,
                    },
                ));
            }
            linalg::check_projector(p, tol).map_err(|e| Error::at_element(index, e))?;
        }
        for i in 0..projectors.len() {
            for j in (i + 1)..projectors.len() {
                let deviation = spectral_norm(&(&projectors[i] * &projectors[j]));
                if deviation > tol {
                    return Err(Error::NotOrthogonal { i, j, deviation });
                }
            }
        }
        let sum = projectors.iter().fold(linalg::zeros(dim), |acc, p| acc + p);
        let deviation = spectral_norm(&(&sum - identity(dim)));
        if deviation > tol {
            return Err(Error::Incomplete { deviation });
        }
        Ok(Self {
            outcomes,
            projectors: projectors.iter().map(symmetrize).collect(),
        })
    }

    pub(crate) fn from_parts_validated(projectors: Vec<CMatrix>, outcomes: OutcomeSpace) -> Self {
        Self {
            outcomes,
            projectors,
        }
    }

    pub fn outcomes(&self) -> &OutcomeSpace {
        &self.outcomes
    }

    pub fn projectors(&self) -> &[CMatrix] {
        &self.projectors
    }

    pub fn len(&self) -> usize {
        self.projectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.projectors.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.projectors[0].nrows()
    }

    /// Views the projective measure as a generalized one.
    pub fn to_generalized(&self) -> GeneralizedMeasure {
        GeneralizedMeasure {
            outcomes: self.outcomes.clone(),
            effects: self
                .projectors
                .iter()
                .map(|p| Effect::from_validated(p.clone()))
                .collect(),
        }
    }
}

impl From<ProjectiveMeasure> for GeneralizedMeasure {
    fn from(pvm: ProjectiveMeasure) -> Self {
        pvm.to_generalized()
    }
}

/// Finite family of effects summing to the identity (a POVM).
#[derive(Debug, Clone)]
pub struct GeneralizedMeasure {
    outcomes: OutcomeSpace,
    effects: Vec<Effect>,
}

impl GeneralizedMeasure {
    pub fn new(effects: Vec<CMatrix>, outcomes: OutcomeSpace, tol: f64) -> Result<Self> {
        if effects.is_empty() {
            return Err(Error::EmptyMeasure);
        }
        if outcomes.len() != effects.len() {
            return Err(Error::OutcomeShape {
                labels: outcomes.len(),
                values: effects.len(),
            });
        }
        let dim = check_square(&effects[0])?;
        let mut validated = Vec::with_capacity(effects.len());
        for (index, e) in effects.iter().enumerate() {
            let d = check_square(e)?;
            if d != dim {
                return Err(Error::at_element(
                    index,
                    Error::DimensionMismatch {
                        left: dim,
                        right: d,
                    },
                ));
            }
            validated.push(Effect::new(e.clone(), tol).map_err(|e| Error::at_element(index, e))?);
        }
        let sum = validated
            .iter()
            .fold(linalg::zeros(dim), |acc, e| acc + e.matrix());
        let deviation = spectral_norm(&(&sum - identity(dim)));
        if deviation > tol {
            return Err(Error::Incomplete { deviation });
        }
        Ok(Self {
            outcomes,
            effects: validated,
        })
    }

    pub(crate) fn from_parts_validated(effects: Vec<Effect>, outcomes: OutcomeSpace) -> Self {
        Self { outcomes, effects }
    }

    pub fn outcomes(&self) -> &OutcomeSpace {
        &self.outcomes
    }

    pub fn effects(&self) -> &[Effect] {
        &self.effects
    }

    pub fn len(&self) -> usize {
        self.effects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.effects.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.effects[0].dim()
    }

    /// Exact Born probabilities of every outcome in the given state.
    pub fn born_probabilities(&self, rho: &DensityOperator) -> Result<Vec<f64>> {
        self.effects
            .iter()
            .map(|e| crate::effects::born_probability(rho, e))
            .collect()
    }
}

/// Validates a list of Hermitian matrices as a POVM with indexed outcomes.
pub fn validate_povm(effects: &[CMatrix], tol: f64) -> Result<GeneralizedMeasure> {
    GeneralizedMeasure::new(effects.to_vec(), OutcomeSpace::indexed(effects.len()), tol)
}

/// Validates a list of Hermitian matrices as a PVM with indexed outcomes.
pub fn validate_pvm(projectors: &[CMatrix], tol: f64) -> Result<ProjectiveMeasure> {
    ProjectiveMeasure::new(
        projectors.to_vec(),
        OutcomeSpace::indexed(projectors.len()),
        tol,
    )
}

/// Spectral measure of a Hermitian observable: outcomes labeled by the
/// grouped eigenvalues (ascending), projectors from the grouped eigenspaces.
pub fn pvm_from_observable(h: &CMatrix, group_tol: f64) -> Result<ProjectiveMeasure> {
    let decomposition = eig_hermitian(h, group_tol)?;
    let labels = decomposition
        .eigenspaces
        .iter()
        .map(|s| format_value(s.eigenvalue))
        .collect();
    let values = decomposition
        .eigenspaces
        .iter()
        .map(|s| s.eigenvalue)
        .collect();
    let projectors = decomposition
        .eigenspaces
        .into_iter()
        .map(|s| s.projector)
        .collect();
    ProjectiveMeasure::new(
        projectors,
        OutcomeSpace::new(labels, Some(values))?,
        DEFAULT_TOL,
    )
}

/// Sharp properties are coexistent iff their projectors commute:
/// ||P1 P2 - P2 P1|| <= tol in operator norm.
pub fn projectors_coexistent(p1: &CMatrix, p2: &CMatrix, tol: f64) -> Result<bool> {
    check_same_dim(p1, p2)?;
    linalg::check_projector(p1, tol)?;
    linalg::check_projector(p2, tol)?;
    Ok(spectral_norm(&commutator(p1, p2)) <= tol)
}

/// The four-outcome joint observable of two commuting projectors, with
/// outcomes (t,t), (t,f), (f,t), (f,f).
pub fn joint_pvm(p1: &CMatrix, p2: &CMatrix, tol: f64) -> Result<ProjectiveMeasure> {
    let dim = check_same_dim(p1, p2)?;
    linalg::check_projector(p1, tol)?;
    linalg::check_projector(p2, tol)?;
    let norm = spectral_norm(&commutator(p1, p2));
    if norm > tol {
        return Err(Error::NotCoexistent { norm });
    }
    let id = identity(dim);
    let q1 = &id - p1;
    let q2 = &id - p2;
    let projectors = vec![p1 * p2, p1 * &q2, &q1 * p2, &q1 * &q2];
    let labels = ["(t,t)", "(t,f)", "(f,t)", "(f,f)"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    Ok(ProjectiveMeasure::from_parts_validated(
        projectors.iter().map(symmetrize).collect(),
        OutcomeSpace::new(labels, None)?,
    ))
}

/// Column-stochastic post-processing kernel: `weights[(x, lambda)]` is the
/// probability of reporting output outcome `x` given input outcome `lambda`.
#[derive(Debug, Clone, PartialEq)]
pub struct StochasticKernel {
    weights: DMatrix<f64>,
}

impl StochasticKernel {
    pub fn new(weights: DMatrix<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::EmptyMeasure);
        }
        for (col, column) in weights.column_iter().enumerate() {
            let mut sum = 0.0;
            for (row, &w) in column.iter().enumerate() {
                if !w.is_finite() {
                    return Err(Error::NonFinite);
                }
                if w < 0.0 {
                    return Err(Error::KernelNegativeWeight {
                        row,
                        column: col,
                        value: w,
                    });
                }
                sum += w;
            }
            if (sum - 1.0).abs() > KERNEL_COLSUM_TOL {
                return Err(Error::KernelColumnSum { column: col, sum });
            }
        }
        Ok(Self { weights })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        if rows.is_empty() || rows[0].is_empty() {
            return Err(Error::EmptyMeasure);
        }
        let n = rows[0].len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::OutcomeShape {
                labels: n,
                values: rows.iter().map(|r| r.len()).max().unwrap_or(0),
            });
        }
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        Self::new(DMatrix::from_row_slice(rows.len(), n, &flat))
    }

    /// Identity kernel on n outcomes.
    pub fn identity(n: usize) -> Self {
        Self {
            weights: DMatrix::identity(n, n),
        }
    }

    /// Binary symmetric flip kernel [[1-eps, eps], [eps, 1-eps]].
    pub fn binary_flip(eps: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&eps) {
            return Err(Error::ParameterRange {
                name: "eps",
                value: eps,
                expected: "within [0, 1]",
            });
        }
        Self::from_rows(&[vec![1.0 - eps, eps], vec![eps, 1.0 - eps]])
    }

    pub fn output_len(&self) -> usize {
        self.weights.nrows()
    }

    pub fn input_len(&self) -> usize {
        self.weights.ncols()
    }

    pub fn weights(&self) -> &DMatrix<f64> {
        &self.weights
    }

    /// Kernel composition: applying `self` after `first` equals `self . first`.
    pub fn compose(&self, first: &StochasticKernel) -> Result<StochasticKernel> {
        if self.input_len() != first.output_len() {
            return Err(Error::KernelShape {
                kernel_cols: self.input_len(),
                outcomes: first.output_len(),
            });
        }
        StochasticKernel::new(&self.weights * &first.weights)
    }
}

/// Smearing of a measure by a stochastic kernel: F_x = sum_lambda w(x, lambda) E_lambda.
///
/// Positivity and completeness are preserved by construction; the identity
/// kernel is a fixed point with zero arithmetic difference.
pub fn smear(
    measure: &GeneralizedMeasure,
    kernel: &StochasticKernel,
) -> Result<GeneralizedMeasure> {
    if kernel.input_len() != measure.len() {
        return Err(Error::KernelShape {
            kernel_cols: kernel.input_len(),
            outcomes: measure.len(),
        });
    }
    let dim = measure.dim();
    let mut effects = Vec::with_capacity(kernel.output_len());
    for x in 0..kernel.output_len() {
        let mut f = linalg::zeros(dim);
        for (lambda, effect) in measure.effects().iter().enumerate() {
            f += effect.matrix() * C64::new(kernel.weights()[(x, lambda)], 0.0);
        }
        effects.push(Effect::from_validated(f));
    }
    Ok(GeneralizedMeasure::from_parts_validated(
        effects,
        OutcomeSpace::indexed(kernel.output_len()),
    ))
}

/// Binary unsharp spin observable along a unit direction with sharpness eta:
/// effects (I -+ eta n.sigma)/2, outcomes "-1" and "+1" (ascending values).
///
/// Equals the smearing of the sharp spin PVM by the binary flip kernel with
/// eps = (1 - eta)/2.
pub fn unsharp_spin(direction: [f64; 3], eta: f64) -> Result<GeneralizedMeasure> {
    let norm =
        (direction[0] * direction[0] + direction[1] * direction[1] + direction[2] * direction[2])
            .sqrt();
    if (norm - 1.0).abs() > 1e-12 {
        return Err(Error::ParameterRange {
            name: "direction",
            value: norm,
            expected: "unit 3-vector within 1e-12",
        });
    }
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::ParameterRange {
            name: "eta",
            value: eta,
            expected: "within [0, 1]",
        });
    }
    let half = C64::new(0.5, 0.0);
    let spin = spin_component(direction);
    let minus = (identity(2) - &spin * C64::new(eta, 0.0)) * half;
    let plus = (identity(2) + &spin * C64::new(eta, 0.0)) * half;
    let outcomes = OutcomeSpace::new(
        vec!["-1".to_string(), "+1".to_string()],
        Some(vec![-1.0, 1.0]),
    )?;
    Ok(GeneralizedMeasure::from_parts_validated(
        vec![Effect::from_validated(minus), Effect::from_validated(plus)],
        outcomes,
    ))
}

/// First moment operator sum x_i F_i of a measure with outcome values.
#[derive(Debug, Clone)]
pub struct MomentOperator {
    matrix: CMatrix,
}

impl MomentOperator {
    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }
}

pub fn first_moment(povm: &GeneralizedMeasure) -> Result<MomentOperator> {
    let values = povm.outcomes().values().ok_or(Error::MissingValues)?;
    let dim = povm.dim();
    let mut matrix = linalg::zeros(dim);
    for (effect, &x) in povm.effects().iter().zip(values) {
        matrix += effect.matrix() * C64::new(x, 0.0);
    }
    Ok(MomentOperator {
        matrix: symmetrize(&matrix),
    })
}

/// Mean Tr(rho A) and spread sqrt(Tr(rho A^2) - mean^2) of a Hermitian
/// observable in a state.
pub fn expectation_variance(rho: &DensityOperator, a: &CMatrix) -> Result<(f64, f64)> {
    check_hermitian(a, DEFAULT_TOL)?;
    if rho.dim() != a.nrows() {
        return Err(Error::DimensionMismatch {
            left: rho.dim(),
            right: a.nrows(),
        });
    }
    let mean = trace(&(rho.matrix() * a)).re;
    let second = trace(&(rho.matrix() * (a * a))).re;
    let delta = (second - mean * mean).max(0.0).sqrt();
    Ok((mean, delta))
}

/// Outcome of the uncertainty-relation check dA * dB >= |Tr(rho [A, B])| / 2.
#[derive(Debug, Clone, Copy)]
pub struct RobertsonCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// Evaluates the state-dependent uncertainty relation for two Hermitian
/// observables (hbar = 1 convention).
pub fn robertson_check(rho: &DensityOperator, a: &CMatrix, b: &CMatrix) -> Result<RobertsonCheck> {
    check_same_dim(a, b)?;
    let (_, delta_a) = expectation_variance(rho, a)?;
    let (_, delta_b) = expectation_variance(rho, b)?;
    let lhs = delta_a * delta_b;
    let rhs = 0.5 * trace(&(rho.matrix() * commutator(a, b))).norm();
    Ok(RobertsonCheck {
        lhs,
        rhs,
        holds: lhs >= rhs - 1e-9,
    })
}

/// True iff the effects span the full d^2-dimensional real space of
/// Hermitian matrices, so the outcome statistics determine the state.
///
/// Tested via the rank of the Gram matrix of the effects, with relative
/// eigenvalue cutoff `IC_RANK_TOL`.
pub fn is_informationally_complete(povm: &GeneralizedMeasure) -> bool {
    let n = povm.len();
    let d = povm.dim();
    let mut gram = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let g = trace(&(povm.effects()[i].matrix() * povm.effects()[j].matrix())).re;
            gram[(i, j)] = g;
            gram[(j, i)] = g;
        }
    }
    let eigs = gram.symmetric_eigen().eigenvalues;
    let max = eigs.iter().cloned().fold(0.0, f64::max);
    if max <= 0.0 {
        return false;
    }
    let rank = eigs.iter().filter(|&&x| x > IC_RANK_TOL * max).count();
    rank == d * d
}

fn check_dichotomic(label: &'static str, a: &CMatrix, tol: f64) -> Result<()> {
    check_hermitian(a, tol).map_err(|_| Error::ParameterRange {
        name: label,
        value: f64::NAN,
        expected: "Hermitian matrix",
    })?;
    let eigs = hermitian_eigenvalues(a)?;
    let min = eigs.first().copied().unwrap_or(0.0);
    let max = eigs.last().copied().unwrap_or(0.0);
    if min < -1.0 - tol || max > 1.0 + tol {
        return Err(Error::SpectrumRange { min, max });
    }
    Ok(())
}

/// CHSH combination Tr(rho (A0xB0 + A0xB1 + A1xB0 - A1xB1)) for a two-qubit
/// state and four single-qubit observables with spectrum in [-1, 1].
///
/// Smeared observables (eta-scaled spin components) are accepted, so the
/// degradation of the violation with unsharpness can be evaluated.
pub fn chsh_value(
    rho: &DensityOperator,
    a0: &CMatrix,
    a1: &CMatrix,
    b0: &CMatrix,
    b1: &CMatrix,
    tol: f64,
) -> Result<f64> {
    if rho.dim() != 4 {
        return Err(Error::DimensionMismatch {
            left: rho.dim(),
            right: 4,
        });
    }
    for (label, m) in [("A0", a0), ("A1", a1), ("B0", b0), ("B1", b1)] {
        if m.nrows() != 2 || m.ncols() != 2 {
            return Err(Error::DimensionMismatch {
                left: m.nrows(),
                right: 2,
            });
        }
        check_dichotomic(label, m, tol)?;
    }
    let s = linalg::tensor(a0, b0)? + linalg::tensor(a0, b1)? + linalg::tensor(a1, b0)?
        - linalg::tensor(a1, b1)?;
    Ok(trace(&(rho.matrix() * s)).re)
}
