//! Joint-measurability search for pairs of binary POVMs.
//!
//! Two binary observables A = {A+, A-} and B = {B+, B-} admit a joint
//! four-outcome observable exactly when there is a Hermitian G with
//!
//!   G >= 0,  A+ - G >= 0,  B+ - G >= 0,  I - A+ - B+ + G >= 0,
//!
//! in which case {G, A+ - G, B+ - G, I - A+ - B+ + G} has A and B as
//! marginals. For qubits the search is a deterministic coarse-to-fine grid
//! over the four real parameters of G followed by a compass-search polish;
//! for larger dimensions it is a seeded multi-start cyclic projection onto
//! the four constraint cones. Failure to find a feasible G is a heuristic
//! non-coexistence report with the best residual, not a certificate.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::effects::Effect;
use crate::error::{Error, Result};
use crate::linalg::{identity, symmetrize, trace, CMatrix, C64};
use crate::observables::{GeneralizedMeasure, OutcomeSpace};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Deterministic budget for the feasibility search.
#[derive(Debug, Clone)]
pub struct SearchBudget {
    /// Number of grid refinement levels (qubit route), spacing shrinking 4x per level.
    pub grid_depth: usize,
    /// Number of grid candidates kept between refinement levels.
    pub beam_width: usize,
    /// Evaluation budget of the compass-search polish after the grid.
    pub polish_evals: usize,
    /// Number of seeded starts for the projection route (dim > 2).
    pub starts: usize,
    /// Projection cycles per start.
    pub projection_iters: usize,
    /// A candidate is feasible when every constraint eigenvalue is >= -feasibility_tol.
    pub feasibility_tol: f64,
    /// Seed for the deterministic multi-start perturbations.
    pub seed: u64,
}

impl Default for SearchBudget {
    fn default() -> Self {
        Self {
            grid_depth: 6,
            beam_width: 24,
            polish_evals: 4000,
            starts: 20,
            projection_iters: 400,
            feasibility_tol: 1e-8,
            seed: 0,
        }
    }
}

/// Result of the joint-measurability search.
#[derive(Debug, Clone)]
pub enum CoexistenceOutcome {
    /// A feasible G was found; the joint observable has A and B as marginals.
    Found {
        joint: GeneralizedMeasure,
        /// Most negative eigenvalue over the four constraint operators.
        worst_constraint_eigenvalue: f64,
        /// Max operator-norm deviation of the reconstructed marginals.
        marginal_deviation: f64,
    },
    /// No feasible G within budget; `residual` is the most negative
    /// constraint eigenvalue of the best candidate seen.
    NotFound { residual: f64 },
}

impl CoexistenceOutcome {
    pub fn is_found(&self) -> bool {
        matches!(self, CoexistenceOutcome::Found { .. })
    }

    pub fn residual(&self) -> f64 {
        match self {
            CoexistenceOutcome::Found {
                worst_constraint_eigenvalue,
                ..
            } => *worst_constraint_eigenvalue,
            CoexistenceOutcome::NotFound { residual } => *residual,
        }
    }
}

/// Searches for a joint observable of two binary POVMs.
///
/// Uses rayon for the candidate sweeps when the `parallel` feature is
/// enabled; results are independent of scheduling.
pub fn coexist_binary_povms(
    a: &GeneralizedMeasure,
    b: &GeneralizedMeasure,
    budget: &SearchBudget,
) -> Result<CoexistenceOutcome> {
    search(a, b, budget, false)
}

/// Sequential reference path of [`coexist_binary_povms`].
pub fn coexist_binary_povms_serial(
    a: &GeneralizedMeasure,
    b: &GeneralizedMeasure,
    budget: &SearchBudget,
) -> Result<CoexistenceOutcome> {
    search(a, b, budget, true)
}

fn search(
    a: &GeneralizedMeasure,
    b: &GeneralizedMeasure,
    budget: &SearchBudget,
    serial: bool,
) -> Result<CoexistenceOutcome> {
    if a.len() != 2 {
        return Err(Error::NotBinary { outcomes: a.len() });
    }
    if b.len() != 2 {
        return Err(Error::NotBinary { outcomes: b.len() });
    }
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            left: a.dim(),
            right: b.dim(),
        });
    }

    let a_plus = a.effects()[0].matrix().clone();
    let b_plus = b.effects()[0].matrix().clone();

    // The warm starts solve the easy regimes (commuting pairs, compatible
    // unsharp spins) exactly; the sweeps only run when none is feasible.
    let mut best = None;
    for candidate in warm_starts(&a_plus, &b_plus) {
        if worst_constraint_eigenvalue(&candidate, &a_plus, &b_plus) >= -budget.feasibility_tol {
            best = Some(candidate);
            break;
        }
    }
    let best = best.unwrap_or_else(|| {
        if a.dim() == 2 {
            qubit_grid_search(&a_plus, &b_plus, budget, serial)
        } else {
            projection_search(&a_plus, &b_plus, budget, serial)
        }
    });

    let residual = worst_constraint_eigenvalue(&best, &a_plus, &b_plus);
    if residual >= -budget.feasibility_tol {
        let joint = build_joint(&best, a, b, &a_plus, &b_plus)?;
        let marginal_deviation = marginal_deviation(&joint, a, b);
        Ok(CoexistenceOutcome::Found {
            joint,
            worst_constraint_eigenvalue: residual,
            marginal_deviation,
        })
    } else {
        Ok(CoexistenceOutcome::NotFound { residual })
    }
}

/// The four constraint operators for a candidate G.
fn constraints(g: &CMatrix, a_plus: &CMatrix, b_plus: &CMatrix) -> [CMatrix; 4] {
    let id = identity(g.nrows());
    [g.clone(), a_plus - g, b_plus - g, &id - a_plus - b_plus + g]
}

fn worst_constraint_eigenvalue(g: &CMatrix, a_plus: &CMatrix, b_plus: &CMatrix) -> f64 {
    constraints(g, a_plus, b_plus)
        .iter()
        .map(|c| min_eig(c))
        .fold(f64::INFINITY, f64::min)
}

fn min_eig(h: &CMatrix) -> f64 {
    symmetrize(h)
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min)
}

fn build_joint(
    g: &CMatrix,
    a: &GeneralizedMeasure,
    b: &GeneralizedMeasure,
    a_plus: &CMatrix,
    b_plus: &CMatrix,
) -> Result<GeneralizedMeasure> {
    let [c1, c2, c3, c4] = constraints(g, a_plus, b_plus);
    let al = a.outcomes().labels();
    let bl = b.outcomes().labels();
    let labels = vec![
        format!("({},{})", al[0], bl[0]),
        format!("({},{})", al[0], bl[1]),
        format!("({},{})", al[1], bl[0]),
        format!("({},{})", al[1], bl[1]),
    ];
    Ok(GeneralizedMeasure::from_parts_validated(
        vec![
            Effect::from_validated(c1),
            Effect::from_validated(c2),
            Effect::from_validated(c3),
            Effect::from_validated(c4),
        ],
        OutcomeSpace::new(labels, None)?,
    ))
}

/// Max operator-norm deviation between the joint's marginals and the inputs.
fn marginal_deviation(
    joint: &GeneralizedMeasure,
    a: &GeneralizedMeasure,
    b: &GeneralizedMeasure,
) -> f64 {
    let e = joint.effects();
    let a_marginals = [e[0].matrix() + e[1].matrix(), e[2].matrix() + e[3].matrix()];
    let b_marginals = [e[0].matrix() + e[2].matrix(), e[1].matrix() + e[3].matrix()];
    let mut deviation: f64 = 0.0;
    for (m, target) in a_marginals.iter().zip(a.effects()) {
        deviation = deviation.max(crate::linalg::spectral_norm(&(m - target.matrix())));
    }
    for (m, target) in b_marginals.iter().zip(b.effects()) {
        deviation = deviation.max(crate::linalg::spectral_norm(&(m - target.matrix())));
    }
    deviation
}

/// Warm-start candidates that are exactly feasible in the easy regimes:
/// the symmetrized product solves every commuting pair, and the averaged
/// candidate solves unsharp spin pairs inside the compatibility region.
fn warm_starts(a_plus: &CMatrix, b_plus: &CMatrix) -> Vec<CMatrix> {
    let half = C64::new(0.5, 0.0);
    let quarter = C64::new(0.25, 0.0);
    let id = identity(a_plus.nrows());
    vec![
        (a_plus * b_plus + b_plus * a_plus) * half,
        (a_plus + b_plus) * half - &id * quarter,
        a_plus * half,
        b_plus * half,
    ]
}

// ---------------------------------------------------------------------------
// Qubit route: coarse-to-fine grid over the Bloch parameters of G.
// ---------------------------------------------------------------------------

/// Bloch components [c0, cx, cy, cz] of a 2x2 Hermitian M = (c0 I + c.sigma)/2.
fn bloch(m: &CMatrix) -> [f64; 4] {
    let c0 = trace(m).re;
    let cx = 2.0 * m[(0, 1)].re;
    let cy = -2.0 * m[(0, 1)].im;
    let cz = m[(0, 0)].re - m[(1, 1)].re;
    [c0, cx, cy, cz]
}

fn matrix_from_bloch(c: &[f64; 4]) -> CMatrix {
    CMatrix::from_row_slice(
        2,
        2,
        &[
            C64::new(0.5 * (c[0] + c[3]), 0.0),
            C64::new(0.5 * c[1], -0.5 * c[2]),
            C64::new(0.5 * c[1], 0.5 * c[2]),
            C64::new(0.5 * (c[0] - c[3]), 0.0),
        ],
    )
}

struct QubitProblem {
    a: [f64; 4],
    b: [f64; 4],
}

/// Search objectives at one candidate: the summed negative eigenvalue mass
/// (descent objective) and the most negative constraint eigenvalue (the
/// reported residual).
#[derive(Debug, Clone, Copy)]
struct Eval {
    mass: f64,
    min_eig: f64,
}

impl QubitProblem {
    /// Both objectives in the closed qubit form lambda = (c0 +- |c|)/2.
    fn eval(&self, g: &[f64; 4]) -> Eval {
        let a = &self.a;
        let b = &self.b;
        let cons = [
            [g[0], g[1], g[2], g[3]],
            [a[0] - g[0], a[1] - g[1], a[2] - g[2], a[3] - g[3]],
            [b[0] - g[0], b[1] - g[1], b[2] - g[2], b[3] - g[3]],
            [
                2.0 - a[0] - b[0] + g[0],
                g[1] - a[1] - b[1],
                g[2] - a[2] - b[2],
                g[3] - a[3] - b[3],
            ],
        ];
        let mut mass = 0.0;
        let mut min_eig = f64::INFINITY;
        for c in &cons {
            let r = (c[1] * c[1] + c[2] * c[2] + c[3] * c[3]).sqrt();
            let lo = 0.5 * (c[0] - r);
            let hi = 0.5 * (c[0] + r);
            mass += (-lo).max(0.0) + (-hi).max(0.0);
            min_eig = min_eig.min(lo);
        }
        Eval { mass, min_eig }
    }
}

/// The candidate with the least negative worst eigenvalue seen so far.
struct ResidualTracker {
    point: [f64; 4],
    min_eig: f64,
}

impl ResidualTracker {
    fn update(&mut self, point: &[f64; 4], eval: &Eval) {
        if eval.min_eig > self.min_eig {
            self.min_eig = eval.min_eig;
            self.point = *point;
        }
    }
}

fn eval_points(problem: &QubitProblem, points: &[[f64; 4]], serial: bool) -> Vec<Eval> {
    #[cfg(feature = "parallel")]
    if !serial {
        return points.par_iter().map(|g| problem.eval(g)).collect();
    }
    let _ = serial;
    points.iter().map(|g| problem.eval(g)).collect()
}

fn qubit_grid_search(
    a_plus: &CMatrix,
    b_plus: &CMatrix,
    budget: &SearchBudget,
    serial: bool,
) -> CMatrix {
    let problem = QubitProblem {
        a: bloch(a_plus),
        b: bloch(b_plus),
    };

    // Level 0: 9 points per axis over the feasible box g0 in [0,2],
    // g in [-1,1]^3, plus the warm-start candidates.
    let mut points: Vec<[f64; 4]> = Vec::new();
    let coarse = 0.25;
    for i0 in 0..=8 {
        for ix in 0..=8 {
            for iy in 0..=8 {
                for iz in 0..=8 {
                    points.push([
                        i0 as f64 * coarse,
                        -1.0 + ix as f64 * coarse,
                        -1.0 + iy as f64 * coarse,
                        -1.0 + iz as f64 * coarse,
                    ]);
                }
            }
        }
    }
    for warm in warm_starts(a_plus, b_plus) {
        points.push(bloch(&warm));
    }

    let mut tracker = ResidualTracker {
        point: points[0],
        min_eig: f64::NEG_INFINITY,
    };
    let mut beam = select_best(&problem, &points, budget.beam_width, serial, &mut tracker);
    let mut spacing = coarse;

    for _ in 0..budget.grid_depth {
        if problem.eval(&beam[0]).mass == 0.0 {
            break;
        }
        let step = spacing / 4.0;
        let mut next: Vec<[f64; 4]> = Vec::with_capacity(beam.len() * 9 * 9 * 9 * 9);
        for center in &beam {
            for i0 in -4i32..=4 {
                for ix in -4i32..=4 {
                    for iy in -4i32..=4 {
                        for iz in -4i32..=4 {
                            next.push([
                                center[0] + i0 as f64 * step,
                                center[1] + ix as f64 * step,
                                center[2] + iy as f64 * step,
                                center[3] + iz as f64 * step,
                            ]);
                        }
                    }
                }
            }
        }
        beam = select_best(&problem, &next, budget.beam_width, serial, &mut tracker);
        spacing = step;
    }

    compass_polish(
        &problem,
        beam[0],
        spacing,
        budget.polish_evals,
        &mut tracker,
    );
    matrix_from_bloch(&tracker.point)
}

/// Keeps the `width` lowest-mass points, ties broken by input order, and
/// records the best residual seen.
fn select_best(
    problem: &QubitProblem,
    points: &[[f64; 4]],
    width: usize,
    serial: bool,
    tracker: &mut ResidualTracker,
) -> Vec<[f64; 4]> {
    let evals = eval_points(problem, points, serial);
    for (point, eval) in points.iter().zip(&evals) {
        tracker.update(point, eval);
    }
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&i, &j| evals[i].mass.total_cmp(&evals[j].mass).then(i.cmp(&j)));
    order
        .into_iter()
        .take(width.max(1))
        .map(|i| points[i])
        .collect()
}

/// Derivative-free local descent on the negative mass: steps along the
/// coordinate axes, halving the step when no direction improves.
fn compass_polish(
    problem: &QubitProblem,
    start: [f64; 4],
    initial_step: f64,
    eval_budget: usize,
    tracker: &mut ResidualTracker,
) {
    let mut current = start;
    let mut value = problem.eval(&current).mass;
    let mut step = initial_step;
    let mut evals = 0;
    while value > 0.0 && step > 1e-13 && evals < eval_budget {
        let mut improved = false;
        for axis in 0..4 {
            for sign in [1.0, -1.0] {
                let mut candidate = current;
                candidate[axis] += sign * step;
                let eval = problem.eval(&candidate);
                tracker.update(&candidate, &eval);
                evals += 1;
                if eval.mass < value {
                    current = candidate;
                    value = eval.mass;
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
}

// ---------------------------------------------------------------------------
// General route (dim > 2): seeded multi-start cyclic projections onto the
// four constraint cones, tracking the summed negative eigenvalue mass.
// ---------------------------------------------------------------------------

fn clamp_psd(m: &CMatrix) -> CMatrix {
    let eig = symmetrize(m).symmetric_eigen();
    let dim = m.nrows();
    let mut out = CMatrix::zeros(dim, dim);
    for k in 0..dim {
        let lambda = eig.eigenvalues[k];
        if lambda > 0.0 {
            let v = eig.eigenvectors.column(k);
            out += &v * v.adjoint() * C64::new(lambda, 0.0);
        }
    }
    out
}

/// Summed negative eigenvalue mass and most negative eigenvalue over the
/// four constraints.
fn constraint_stats(g: &CMatrix, a_plus: &CMatrix, b_plus: &CMatrix) -> (f64, f64) {
    let mut mass = 0.0;
    let mut min_eig = f64::INFINITY;
    for c in constraints(g, a_plus, b_plus) {
        for &lambda in symmetrize(&c).symmetric_eigen().eigenvalues.iter() {
            mass += (-lambda).max(0.0);
            min_eig = min_eig.min(lambda);
        }
    }
    (mass, min_eig)
}

fn projection_search(
    a_plus: &CMatrix,
    b_plus: &CMatrix,
    budget: &SearchBudget,
    serial: bool,
) -> CMatrix {
    let dim = a_plus.nrows();
    let id = identity(dim);
    let lower = a_plus + b_plus - &id;

    let warm = warm_starts(a_plus, b_plus);
    let mut starts: Vec<CMatrix> = Vec::with_capacity(budget.starts.max(warm.len()));
    starts.extend(warm.iter().cloned());
    let mut rng = ChaCha12Rng::seed_from_u64(budget.seed);
    while starts.len() < budget.starts.max(1) {
        let noise = crate::random::random_hermitian(dim, &mut rng);
        starts.push(&warm[0] + noise * C64::new(0.05, 0.0));
    }

    // Each start descends on the negative mass; the point returned is the
    // one with the least negative worst eigenvalue seen along the way.
    let run = |start: &CMatrix| -> (f64, CMatrix) {
        let mut g = start.clone();
        let (mut best_mass, mut best_min) = constraint_stats(&g, a_plus, b_plus);
        let mut best_point = g.clone();
        for _ in 0..budget.projection_iters {
            // Below double-precision trust; the candidate is feasible.
            if best_mass <= 1e-12 {
                break;
            }
            g = clamp_psd(&g);
            g = a_plus - clamp_psd(&(a_plus - &g));
            g = b_plus - clamp_psd(&(b_plus - &g));
            g = &lower + clamp_psd(&(&g - &lower));
            let (mass, min_eig) = constraint_stats(&g, a_plus, b_plus);
            if min_eig > best_min {
                best_min = min_eig;
                best_point = g.clone();
            }
            best_mass = best_mass.min(mass);
        }
        (best_min, best_point)
    };

    let results: Vec<(f64, CMatrix)> = {
        #[cfg(feature = "parallel")]
        {
            if serial {
                starts.iter().map(run).collect()
            } else {
                starts.par_iter().map(run).collect()
            }
        }
        #[cfg(not(feature = "parallel"))]
        {
            let _ = serial;
            starts.iter().map(run).collect()
        }
    };

    let mut best_index = 0;
    for (k, (min_eig, _)) in results.iter().enumerate() {
        if *min_eig > results[best_index].0 {
            best_index = k;
        }
    }
    results[best_index].1.clone()
}
