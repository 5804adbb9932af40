//! Acceptance suite: one pass/fail line per criterion, each with its
//! pinned tolerances and runtime limit.
//!
//! Run with `cargo test -p unsharp-core --test acceptance -- --nocapture`
//! to see the per-criterion lines.

use std::sync::Mutex;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use unsharp_core::effects::{born_probability, spanning_states, DensityOperator};
use unsharp_core::linalg::{commutator, max_abs_entry, spectral_norm, CMatrix, CVector, C64};
use unsharp_core::naimark::{
    alternate_dilation, dilate, projector_family_distance, verify_dilation,
};
use unsharp_core::observables::{
    chsh_value, coexist_binary_povms, joint_pvm, pauli_x, pauli_y, pauli_z, projectors_coexistent,
    pvm_from_observable, robertson_check, smear, unsharp_spin, validate_povm, CoexistenceOutcome,
    SearchBudget, StochasticKernel,
};
use unsharp_core::random;
use unsharp_core::simulator::{
    run_trajectory, sample_outcomes, sample_outcomes_serial, sequence_marginals,
    sequential_measurement, stream_rng, EnsembleConfig,
};

/// Criteria run one at a time so the runtime limits are meaningful.
static GATE: Mutex<()> = Mutex::new(());

fn criterion(name: &str, limit_seconds: f64, run: impl FnOnce() -> Result<(), String>) {
    let _guard = GATE.lock().unwrap_or_else(|poisoned| poisoned.into_inner());
    let start = Instant::now();
    let outcome = run();
    let elapsed = start.elapsed().as_secs_f64();
    match outcome {
        Ok(()) if elapsed <= limit_seconds => {
            println!("PASS: {name} ({elapsed:.2}s, limit {limit_seconds}s)");
        }
        Ok(()) => {
            println!("FAIL: {name} (runtime {elapsed:.2}s exceeds limit {limit_seconds}s)");
            panic!("{name}: runtime {elapsed:.2}s exceeds limit {limit_seconds}s");
        }
        Err(msg) => {
            println!("FAIL: {name}: {msg} ({elapsed:.2}s)");
            panic!("{name}: {msg}");
        }
    }
}

macro_rules! check {
    ($cond:expr, $($msg:tt)+) => {
        if !($cond) {
            return Err(format!($($msg)+));
        }
    };
}

fn singlet() -> DensityOperator {
    let mut v = CVector::zeros(4);
    v[1] = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    v[2] = C64::new(-std::f64::consts::FRAC_1_SQRT_2, 0.0);
    DensityOperator::pure(&v).expect("singlet is a valid pure state")
}

fn optimal_settings() -> (CMatrix, CMatrix, CMatrix, CMatrix) {
    let inv = std::f64::consts::FRAC_1_SQRT_2;
    (
        pauli_z(),
        pauli_x(),
        (pauli_z() + pauli_x()) * C64::new(-inv, 0.0),
        (pauli_x() - pauli_z()) * C64::new(inv, 0.0),
    )
}

#[test]
fn acceptance_born_effect_bridge() {
    criterion("Born/effect bridge (Eqs. (1)-(2))", 10.0, || {
        let mut rng = ChaCha12Rng::seed_from_u64(0xB0A2);

        // 200+ random states x 200+ random effects across dims 2..8,
        // checked pairwise within each dimension.
        for dim in 2..=8usize {
            let states: Vec<_> = (0..30)
                .map(|_| random::random_density(dim, &mut rng))
                .collect();
            let effects: Vec<_> = (0..30)
                .map(|_| random::random_effect(dim, &mut rng))
                .collect();
            for rho in &states {
                for effect in &effects {
                    let w = born_probability(rho, effect).map_err(|e| e.to_string())?;
                    check!((0.0..=1.0).contains(&w), "probability {w} escaped [0, 1]");
                }
            }
        }

        // 200 Hermitian operators with spectrum escaping [0, 1]: the
        // extremal eigenstate witnesses the escape by the full excess.
        let mut witnesses = 0;
        while witnesses < 200 {
            let dim = 2 + witnesses % 7;
            let h = random::random_hermitian(dim, &mut rng) * C64::new(2.0, 0.0);
            let eig = unsharp_core::linalg::eig_hermitian(&h, 0.0).map_err(|e| e.to_string())?;
            let lo = eig.min_eigenvalue();
            let hi = eig.max_eigenvalue();
            let excess = (-lo).max(hi - 1.0);
            if excess <= 1e-6 {
                continue;
            }
            let column = if -lo >= hi - 1.0 {
                eig.eigenvectors.column(0).into_owned()
            } else {
                eig.eigenvectors.column(dim - 1).into_owned()
            };
            let witness = DensityOperator::pure(&column).map_err(|e| e.to_string())?;
            let (mean, _) = unsharp_core::observables::expectation_variance(&witness, &h)
                .map_err(|e| e.to_string())?;
            let outside = (-mean).max(mean - 1.0);
            check!(
                outside >= 0.5 * excess,
                "witness escapes by {outside}, expected at least half of {excess}"
            );
            witnesses += 1;
        }
        Ok(())
    });
}

#[test]
fn acceptance_robertson_suite() {
    criterion("Robertson uncertainty suite", 10.0, || {
        let mut rng = ChaCha12Rng::seed_from_u64(0x0B57);
        for trial in 0..1000usize {
            let dim = 2 + trial % 7;
            let rho = random::random_density(dim, &mut rng);
            let a = random::random_hermitian(dim, &mut rng);
            let b = random::random_hermitian(dim, &mut rng);
            let check = robertson_check(&rho, &a, &b).map_err(|e| e.to_string())?;
            check!(
                check.lhs >= check.rhs - 1e-9,
                "triple {trial}: lhs {} < rhs {} - 1e-9",
                check.lhs,
                check.rhs
            );
        }
        // Pauli equality case on |0>: both sides equal 1.
        let up = DensityOperator::basis(2, 0).map_err(|e| e.to_string())?;
        let equality = robertson_check(&up, &pauli_x(), &pauli_y()).map_err(|e| e.to_string())?;
        check!(
            (equality.lhs - 1.0).abs() <= 1e-12 && (equality.rhs - 1.0).abs() <= 1e-12,
            "equality case: lhs {} rhs {}",
            equality.lhs,
            equality.rhs
        );
        Ok(())
    });
}

#[test]
fn acceptance_smearing_suite() {
    criterion("Smearing suite", 5.0, || {
        let mut rng = ChaCha12Rng::seed_from_u64(0x53EA);

        // Identity kernel is an exact fixed point.
        for _ in 0..20 {
            let povm = random::random_povm(3, 4, &mut rng).map_err(|e| e.to_string())?;
            let smeared =
                smear(&povm, &StochasticKernel::identity(4)).map_err(|e| e.to_string())?;
            for (before, after) in povm.effects().iter().zip(smeared.effects()) {
                check!(
                    max_abs_entry(&(before.matrix() - after.matrix())) == 0.0,
                    "identity kernel moved an effect"
                );
            }
        }

        // eps-flip smearing of the sharp z measurement, within 1e-15.
        let eps = 0.1;
        let z_pvm = pvm_from_observable(&pauli_z(), 1e-8).map_err(|e| e.to_string())?;
        let flipped = smear(
            &z_pvm.to_generalized(),
            &StochasticKernel::binary_flip(eps).map_err(|e| e.to_string())?,
        )
        .map_err(|e| e.to_string())?;
        let minus = CMatrix::from_row_slice(
            2,
            2,
            &[
                C64::new(eps, 0.0),
                C64::new(0.0, 0.0),
                C64::new(0.0, 0.0),
                C64::new(1.0 - eps, 0.0),
            ],
        );
        let plus = CMatrix::from_row_slice(
            2,
            2,
            &[
                C64::new(1.0 - eps, 0.0),
                C64::new(0.0, 0.0),
                C64::new(0.0, 0.0),
                C64::new(eps, 0.0),
            ],
        );
        check!(
            max_abs_entry(&(flipped.effects()[0].matrix() - minus)) <= 1e-15,
            "flip smearing -1 effect off"
        );
        check!(
            max_abs_entry(&(flipped.effects()[1].matrix() - plus)) <= 1e-15,
            "flip smearing +1 effect off"
        );

        // Kernel composition law on 500 random cases, within 1e-12.
        for trial in 0..500usize {
            let dim = 2 + trial % 3;
            let n = 2 + trial % 3;
            let m = 1 + trial % 4;
            let k = 1 + trial % 3;
            let povm = random::random_povm(dim, n, &mut rng).map_err(|e| e.to_string())?;
            let k1 = random::random_kernel(m, n, &mut rng);
            let k2 = random::random_kernel(k, m, &mut rng);
            let two_step = smear(&smear(&povm, &k1).map_err(|e| e.to_string())?, &k2)
                .map_err(|e| e.to_string())?;
            let composed = smear(&povm, &k2.compose(&k1).map_err(|e| e.to_string())?)
                .map_err(|e| e.to_string())?;
            for (left, right) in two_step.effects().iter().zip(composed.effects()) {
                check!(
                    max_abs_entry(&(left.matrix() - right.matrix())) <= 1e-12,
                    "composition law violated at trial {trial}"
                );
            }
        }
        Ok(())
    });
}

#[test]
fn acceptance_naimark_suite() {
    criterion("Naimark dilation suite", 20.0, || {
        let mut rng = ChaCha12Rng::seed_from_u64(0x4A13);

        for trial in 0..100usize {
            let dim = 2 + trial % 3;
            let outcomes = 2 + trial % 5;
            let povm = random::random_povm(dim, outcomes, &mut rng).map_err(|e| e.to_string())?;
            let dilation = dilate(&povm).map_err(|e| e.to_string())?;
            check!(
                dilation.isometry_defect() <= 1e-9,
                "isometry defect {} at trial {trial}",
                dilation.isometry_defect()
            );
            let states = spanning_states(dim).map_err(|e| e.to_string())?;
            let deviation =
                verify_dilation(&povm, &dilation, &states).map_err(|e| e.to_string())?;
            check!(
                deviation <= 1e-9,
                "statistics deviation {deviation} at trial {trial}"
            );

            let alternate = alternate_dilation(&povm, 1).map_err(|e| e.to_string())?;
            let distance = projector_family_distance(&dilation, &alternate);
            check!(distance > 1e-6, "alternate family too close: {distance}");
            let alt_deviation =
                verify_dilation(&povm, &alternate, &states).map_err(|e| e.to_string())?;
            check!(alt_deviation <= 1e-9, "alternate deviation {alt_deviation}");
        }

        // Trine probabilities from the first basis state: direct Born
        // oracle (2/3) cos^2(theta) gives (2/3, 1/6, 1/6).
        let effects: Vec<CMatrix> = [0.0f64, 120.0, 240.0]
            .iter()
            .map(|deg| {
                let theta = deg.to_radians();
                let v = CVector::from_column_slice(&[
                    C64::new(theta.cos(), 0.0),
                    C64::new(theta.sin(), 0.0),
                ]);
                (&v * v.adjoint()) * C64::new(2.0 / 3.0, 0.0)
            })
            .collect();
        let trine = validate_povm(&effects, 1e-9).map_err(|e| e.to_string())?;
        let dilation = dilate(&trine).map_err(|e| e.to_string())?;
        let rho = DensityOperator::basis(2, 0).map_err(|e| e.to_string())?;
        let through = dilation
            .embedded_probabilities(&rho)
            .map_err(|e| e.to_string())?;
        let oracle = [2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0];
        for (p, q) in through.iter().zip(&oracle) {
            check!((p - q).abs() <= 1e-9, "trine probability {p} vs oracle {q}");
        }
        Ok(())
    });
}

#[test]
fn acceptance_coexistence_suite() {
    criterion("Coexistence suite", 60.0, || {
        // Sharp noncommuting qubit pair: the z/x spectral projectors fail
        // the commutation criterion, and the dichotomic observables have
        // commutator norm 2 (> 0.9, decisively noncommuting).
        let p_z = pvm_from_observable(&pauli_z(), 1e-8).map_err(|e| e.to_string())?;
        let p_x = pvm_from_observable(&pauli_x(), 1e-8).map_err(|e| e.to_string())?;
        let coexistent = projectors_coexistent(&p_z.projectors()[1], &p_x.projectors()[1], 1e-9)
            .map_err(|e| e.to_string())?;
        check!(!coexistent, "z/x projectors reported coexistent");
        let observable_commutator = spectral_norm(&commutator(&pauli_z(), &pauli_x()));
        check!(
            observable_commutator > 0.9,
            "observable commutator norm {observable_commutator} not > 0.9"
        );

        // Commuting projector pairs: joint PVM exists with exact marginals.
        let mut rng = ChaCha12Rng::seed_from_u64(0xC0E1);
        for trial in 0..50usize {
            let dim = 2 + trial % 3;
            let (p, q) = random::random_commuting_projectors(dim, &mut rng);
            let joint = joint_pvm(&p, &q, 1e-9).map_err(|e| e.to_string())?;
            let parts = joint.projectors();
            check!(
                max_abs_entry(&(&parts[0] + &parts[1] - &p)) <= 1e-12,
                "joint marginal deviates at trial {trial}"
            );
            check!(
                max_abs_entry(&(&parts[0] + &parts[2] - &q)) <= 1e-12,
                "joint marginal deviates at trial {trial}"
            );
            let matrices: Vec<CMatrix> = parts.to_vec();
            unsharp_core::observables::validate_pvm(&matrices, 1e-8).map_err(|e| e.to_string())?;
        }

        // Compatible unsharp spins: feasible joint with nonnegative
        // constraint spectrum (within 1e-8).
        let budget = SearchBudget::default();
        let a = unsharp_spin([1.0, 0.0, 0.0], 0.5).map_err(|e| e.to_string())?;
        let b = unsharp_spin([0.0, 0.0, 1.0], 0.5).map_err(|e| e.to_string())?;
        match coexist_binary_povms(&a, &b, &budget).map_err(|e| e.to_string())? {
            CoexistenceOutcome::Found {
                worst_constraint_eigenvalue,
                marginal_deviation,
                ..
            } => {
                check!(
                    worst_constraint_eigenvalue >= -1e-8,
                    "constraint eigenvalue {worst_constraint_eigenvalue}"
                );
                check!(
                    marginal_deviation <= 1e-8,
                    "marginal deviation {marginal_deviation}"
                );
            }
            CoexistenceOutcome::NotFound { residual } => {
                return Err(format!(
                    "eta 0.5 pair reported infeasible, residual {residual}"
                ));
            }
        }

        // Incompatible unsharp spins: the depth-6 grid reports infeasible.
        let a = unsharp_spin([1.0, 0.0, 0.0], 0.9).map_err(|e| e.to_string())?;
        let b = unsharp_spin([0.0, 0.0, 1.0], 0.9).map_err(|e| e.to_string())?;
        match coexist_binary_povms(&a, &b, &budget).map_err(|e| e.to_string())? {
            CoexistenceOutcome::NotFound { residual } => {
                check!(residual < 0.0, "residual {residual} should be negative");
            }
            CoexistenceOutcome::Found {
                worst_constraint_eigenvalue,
                ..
            } => {
                return Err(format!(
                    "eta 0.9 pair reported coexistent, worst eigenvalue {worst_constraint_eigenvalue}"
                ));
            }
        }
        Ok(())
    });
}

#[test]
fn acceptance_chsh() {
    criterion("CHSH violation and bounds", 5.0, || {
        let rho = singlet();
        let (a0, a1, b0, b1) = optimal_settings();
        let value = chsh_value(&rho, &a0, &a1, &b0, &b1, 1e-9).map_err(|e| e.to_string())?;
        let tsirelson = 2.0 * std::f64::consts::SQRT_2;
        check!(
            (value - tsirelson).abs() <= 1e-6,
            "singlet value {value} vs 2*sqrt(2) {tsirelson}"
        );

        // Exhaustive enumeration of the 16 deterministic local strategies.
        let mut best = i32::MIN;
        for a0d in [-1i32, 1] {
            for a1d in [-1i32, 1] {
                for b0d in [-1i32, 1] {
                    for b1d in [-1i32, 1] {
                        best = best.max(a0d * b0d + a0d * b1d + a1d * b0d - a1d * b1d);
                    }
                }
            }
        }
        check!(best == 2, "deterministic maximum {best} != 2");

        // Unsharp settings scale the violation by eta^2.
        for eta in [0.25, 0.5, 0.75, 0.95] {
            let e = C64::new(eta, 0.0);
            let unsharp = chsh_value(&rho, &(&a0 * e), &(&a1 * e), &(&b0 * e), &(&b1 * e), 1e-9)
                .map_err(|err| err.to_string())?;
            check!(
                (unsharp - eta * eta * value).abs() <= 1e-9,
                "eta {eta}: value {unsharp} vs scaled {}",
                eta * eta * value
            );
        }
        Ok(())
    });
}

#[test]
fn acceptance_simulator() {
    criterion("Ensemble simulator", 30.0, || {
        let mut rng = ChaCha12Rng::seed_from_u64(0x51D1);

        // Bit-exact reproducibility, including across execution modes.
        let rho = random::random_density(3, &mut rng);
        let povm = random::random_povm(3, 4, &mut rng).map_err(|e| e.to_string())?;
        let config = EnsembleConfig::new(rho, povm, 50_000, 12345).map_err(|e| e.to_string())?;
        let first = sample_outcomes(&config).map_err(|e| e.to_string())?;
        let second = sample_outcomes(&config).map_err(|e| e.to_string())?;
        let serial = sample_outcomes_serial(&config).map_err(|e| e.to_string())?;
        check!(first.counts == second.counts, "counts changed between runs");
        check!(
            first.counts == serial.counts,
            "parallel and serial counts differ"
        );

        // 20 random (state, POVM) pairs at N = 100000 stay within 5-sigma
        // binomial bounds of the Born values.
        let n = 100_000u64;
        for trial in 0..20u64 {
            let dim = 2 + (trial as usize) % 7;
            let rho = random::random_density(dim, &mut rng);
            let povm = random::random_povm(dim, 2 + (trial as usize) % 4, &mut rng)
                .map_err(|e| e.to_string())?;
            let config =
                EnsembleConfig::new(rho, povm, n, 777 + trial).map_err(|e| e.to_string())?;
            let record = sample_outcomes(&config).map_err(|e| e.to_string())?;
            for (f, p) in record.frequencies.iter().zip(&record.born) {
                let bound = 5.0 * (p * (1.0 - p) / n as f64).sqrt() + 1e-6;
                check!(
                    (f - p).abs() <= bound,
                    "trial {trial}: frequency {f} vs born {p} (bound {bound})"
                );
            }
        }

        // Sharp repeatability along 10000 trajectories.
        let z = pvm_from_observable(&pauli_z(), 1e-8)
            .map_err(|e| e.to_string())?
            .to_generalized();
        let mixed = DensityOperator::maximally_mixed(2).map_err(|e| e.to_string())?;
        let repeat = [z.clone(), z.clone()];
        for t in 0..10_000u64 {
            let mut traj_rng = stream_rng(31, t);
            let trajectory =
                run_trajectory(&mixed, &repeat, &mut traj_rng).map_err(|e| e.to_string())?;
            check!(
                trajectory.steps[0].outcome_index == trajectory.steps[1].outcome_index,
                "sharp repeatability broke on trajectory {t}"
            );
        }

        // z-x-z from |0>: the closed-form marginal of the third step is
        // exactly 1/2, and the sampled frequency stays within 0.016.
        let x = pvm_from_observable(&pauli_x(), 1e-8)
            .map_err(|e| e.to_string())?
            .to_generalized();
        let up = DensityOperator::basis(2, 0).map_err(|e| e.to_string())?;
        let sequence = [z.clone(), x, z];
        let marginals = sequence_marginals(&up, &sequence).map_err(|e| e.to_string())?;
        check!(
            (marginals[2][1] - 0.5).abs() <= 1e-12,
            "closed-form third-step marginal {} != 1/2",
            marginals[2][1]
        );
        let stats =
            sequential_measurement(&up, &sequence, 10_000, 37).map_err(|e| e.to_string())?;
        let third_plus = stats.per_step[2].frequencies[1];
        check!(
            (third_plus - 0.5).abs() <= 0.016,
            "third-step +1 frequency {third_plus} outside 0.5 +- 0.016"
        );
        Ok(())
    });
}
