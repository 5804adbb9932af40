//! Frequencial-ensemble semantics: Born-rule outcome sampling, state
//! updates, filters, and sequential measurement trajectories.
//!
//! Randomness is counter-based and splittable: every draw or trajectory
//! owns a ChaCha12 stream derived from (seed, stream index), so batches
//! are deterministic regardless of execution order or thread count. The
//! `parallel` feature runs batches on rayon; the `*_serial` functions are
//! the sequential reference paths and produce bit-identical results.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::effects::{born_probability, DensityOperator, Effect};
use crate::error::{Error, Result};
use crate::linalg::{self, psd_sqrt_clamped, trace_re, CMatrix, DEFAULT_TOL};
use crate::observables::GeneralizedMeasure;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Probabilities below this threshold cannot be conditioned on.
pub const ZERO_PROBABILITY_TOL: f64 = 1e-12;

/// The deterministic per-stream generator: ChaCha12 keyed by `seed` with
/// the stream id as nonce.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// One ensemble measurement request.
#[derive(Debug, Clone)]
pub struct EnsembleConfig {
    pub state: DensityOperator,
    pub measure: GeneralizedMeasure,
    pub samples: u64,
    pub seed: u64,
}

impl EnsembleConfig {
    pub fn new(
        state: DensityOperator,
        measure: GeneralizedMeasure,
        samples: u64,
        seed: u64,
    ) -> Result<Self> {
        if state.dim() != measure.dim() {
            return Err(Error::DimensionMismatch {
                left: state.dim(),
                right: measure.dim(),
            });
        }
        Ok(Self {
            state,
            measure,
            samples,
            seed,
        })
    }
}

/// Per-outcome counts, frequencies, binomial standard errors, and exact
/// Born probabilities for one ensemble.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementRecord {
    pub labels: Vec<String>,
    pub counts: Vec<u64>,
    pub frequencies: Vec<f64>,
    pub stderr: Vec<f64>,
    pub born: Vec<f64>,
}

impl MeasurementRecord {
    fn from_counts(labels: Vec<String>, counts: Vec<u64>, born: Vec<f64>) -> Self {
        let n: u64 = counts.iter().sum();
        let frequencies: Vec<f64> = if n == 0 {
            vec![0.0; counts.len()]
        } else {
            counts.iter().map(|&c| c as f64 / n as f64).collect()
        };
        let stderr = frequencies
            .iter()
            .map(|&f| {
                if n == 0 {
                    0.0
                } else {
                    (f * (1.0 - f) / n as f64).sqrt()
                }
            })
            .collect();
        Self {
            labels,
            counts,
            frequencies,
            stderr,
            born,
        }
    }

    pub fn samples(&self) -> u64 {
        self.counts.iter().sum()
    }
}

/// Born probabilities of a measure in a state, verified to sum to 1.
fn checked_probabilities(
    state: &DensityOperator,
    measure: &GeneralizedMeasure,
) -> Result<Vec<f64>> {
    let born = measure.born_probabilities(state)?;
    let sum: f64 = born.iter().sum();
    if (sum - 1.0).abs() > 1e-9 {
        return Err(Error::ProbabilityNormalization { sum });
    }
    Ok(born)
}

/// Index of the sampled outcome for a uniform draw u in [0, 1).
fn sample_index(probabilities: &[f64], u: f64) -> usize {
    let mut cumulative = 0.0;
    for (i, &p) in probabilities.iter().enumerate() {
        cumulative += p;
        if u < cumulative {
            return i;
        }
    }
    probabilities.len() - 1
}

#[cfg(feature = "parallel")]
fn merge_counts(mut left: Vec<u64>, right: Vec<u64>) -> Vec<u64> {
    for (l, r) in left.iter_mut().zip(right) {
        *l += r;
    }
    left
}

/// Samples N independent outcomes from the Born distribution.
///
/// Draw i uses the RNG stream (seed, i), so counts are identical whether
/// the batch runs on rayon or sequentially.
pub fn sample_outcomes(config: &EnsembleConfig) -> Result<MeasurementRecord> {
    sample_outcomes_impl(config, false)
}

/// Sequential reference path of [`sample_outcomes`]; bit-identical results.
pub fn sample_outcomes_serial(config: &EnsembleConfig) -> Result<MeasurementRecord> {
    sample_outcomes_impl(config, true)
}

fn sample_outcomes_impl(config: &EnsembleConfig, serial: bool) -> Result<MeasurementRecord> {
    let born = checked_probabilities(&config.state, &config.measure)?;
    let k = born.len();
    let seed = config.seed;
    let draw = |i: u64| -> usize {
        let mut rng = stream_rng(seed, i);
        sample_index(&born, rng.random::<f64>())
    };

    let counts: Vec<u64> = {
        #[cfg(feature = "parallel")]
        {
            if serial {
                sequential_counts(config.samples, k, draw)
            } else {
                (0..config.samples as usize)
                    .into_par_iter()
                    .with_min_len(1024)
                    .fold(
                        || vec![0u64; k],
                        |mut acc, i| {
                            acc[draw(i as u64)] += 1;
                            acc
                        },
                    )
                    .reduce(|| vec![0u64; k], merge_counts)
            }
        }
        #[cfg(not(feature = "parallel"))]
        {
            let _ = serial;
            sequential_counts(config.samples, k, draw)
        }
    };

    Ok(MeasurementRecord::from_counts(
        config.measure.outcomes().labels().to_vec(),
        counts,
        born,
    ))
}

fn sequential_counts(samples: u64, k: usize, draw: impl Fn(u64) -> usize) -> Vec<u64> {
    let mut counts = vec![0u64; k];
    for i in 0..samples {
        counts[draw(i)] += 1;
    }
    counts
}

/// Post-measurement state update: rho -> sqrt(E) rho sqrt(E) / Tr(rho E).
///
/// For a projector P and rho = P rho P this is the identity up to
/// normalization, which makes sharp measurements repeatable.
pub fn luders_update(rho: &DensityOperator, effect: &Effect) -> Result<DensityOperator> {
    if rho.dim() != effect.dim() {
        return Err(Error::DimensionMismatch {
            left: rho.dim(),
            right: effect.dim(),
        });
    }
    let probability = born_probability(rho, effect)?;
    if probability <= ZERO_PROBABILITY_TOL {
        return Err(Error::ZeroProbability { probability });
    }
    let root = psd_sqrt_clamped(effect.matrix());
    let raw = &root * rho.matrix() * &root;
    let tr = trace_re(&raw);
    if tr <= ZERO_PROBABILITY_TOL {
        return Err(Error::ZeroProbability { probability: tr });
    }
    DensityOperator::new(raw / linalg::C64::new(tr, 0.0), DEFAULT_TOL)
}

/// Sends a state through a filter for the sharp property P: passes with
/// probability Tr(rho P), and the state is updated on the realized branch.
pub fn filter_pass(
    rho: &DensityOperator,
    projector: &CMatrix,
    rng: &mut ChaCha12Rng,
) -> Result<(bool, DensityOperator)> {
    linalg::check_projector(projector, DEFAULT_TOL)?;
    let effect = Effect::new(projector.clone(), DEFAULT_TOL)?;
    let p_pass = born_probability(rho, &effect)?;
    let passed = rng.random::<f64>() < p_pass;
    let branch = if passed { effect } else { effect.complement() };
    let post = luders_update(rho, &branch)?;
    Ok((passed, post))
}

/// One realized step of a sequential measurement.
#[derive(Debug, Clone)]
pub struct TrajectoryStep {
    pub measure_index: usize,
    pub outcome_index: usize,
    pub outcome_label: String,
    pub post_state: DensityOperator,
}

/// One realized measurement history.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub steps: Vec<TrajectoryStep>,
    /// Step at which the trajectory hit a zero-probability branch, if any.
    pub terminated_at: Option<usize>,
}

/// Runs a single trajectory through the given measures, sampling each
/// outcome from the current state and advancing by the Lüders update.
pub fn run_trajectory(
    rho: &DensityOperator,
    measures: &[GeneralizedMeasure],
    rng: &mut ChaCha12Rng,
) -> Result<Trajectory> {
    let mut steps = Vec::with_capacity(measures.len());
    let mut state = rho.clone();
    for (measure_index, measure) in measures.iter().enumerate() {
        let born = checked_probabilities(&state, measure)?;
        let outcome_index = sample_index(&born, rng.random::<f64>());
        match luders_update(&state, &measure.effects()[outcome_index]) {
            Ok(post) => {
                steps.push(TrajectoryStep {
                    measure_index,
                    outcome_index,
                    outcome_label: measure.outcomes().labels()[outcome_index].clone(),
                    post_state: post.clone(),
                });
                state = post;
            }
            Err(Error::ZeroProbability { .. }) => {
                return Ok(Trajectory {
                    steps,
                    terminated_at: Some(measure_index),
                });
            }
            Err(e) => return Err(e),
        }
    }
    Ok(Trajectory {
        steps,
        terminated_at: None,
    })
}

/// Ensemble statistics of a sequential measurement.
#[derive(Debug, Clone)]
pub struct SequenceStats {
    pub trajectories: u64,
    /// Aggregated per-step records; `born` holds the exact ensemble
    /// marginals from the non-selective Lüders evolution.
    pub per_step: Vec<MeasurementRecord>,
    /// Number of trajectories that hit a zero-probability branch.
    pub terminated: u64,
    /// The first trajectory, as a reproducible exemplar.
    pub first_trajectory: Option<Trajectory>,
}

/// Exact per-step outcome marginals of a measurement sequence: the state
/// advances through the non-selective channel rho -> sum_i sqrt(F_i) rho sqrt(F_i).
pub fn sequence_marginals(
    rho: &DensityOperator,
    measures: &[GeneralizedMeasure],
) -> Result<Vec<Vec<f64>>> {
    let mut state = rho.clone();
    let mut marginals = Vec::with_capacity(measures.len());
    for measure in measures {
        marginals.push(checked_probabilities(&state, measure)?);
        let mut next = linalg::zeros(state.dim());
        for effect in measure.effects() {
            let root = psd_sqrt_clamped(effect.matrix());
            next += &root * state.matrix() * &root;
        }
        let tr = trace_re(&next);
        state = DensityOperator::from_validated(next / linalg::C64::new(tr, 0.0));
    }
    Ok(marginals)
}

/// Runs `trajectories` independent sequential-measurement histories.
///
/// Trajectory t draws from the RNG stream (seed, t); the aggregation is a
/// pure reduction, so results are independent of execution order.
pub fn sequential_measurement(
    rho: &DensityOperator,
    measures: &[GeneralizedMeasure],
    trajectories: u64,
    seed: u64,
) -> Result<SequenceStats> {
    sequential_measurement_impl(rho, measures, trajectories, seed, false)
}

/// Sequential reference path of [`sequential_measurement`].
pub fn sequential_measurement_serial(
    rho: &DensityOperator,
    measures: &[GeneralizedMeasure],
    trajectories: u64,
    seed: u64,
) -> Result<SequenceStats> {
    sequential_measurement_impl(rho, measures, trajectories, seed, true)
}

#[derive(Clone)]
struct StepTally {
    counts: Vec<Vec<u64>>,
    terminated: u64,
}

impl StepTally {
    fn new(shape: &[usize]) -> Self {
        Self {
            counts: shape.iter().map(|&k| vec![0u64; k]).collect(),
            terminated: 0,
        }
    }

    fn absorb(&mut self, trajectory: &Trajectory) {
        for step in &trajectory.steps {
            self.counts[step.measure_index][step.outcome_index] += 1;
        }
        if trajectory.terminated_at.is_some() {
            self.terminated += 1;
        }
    }

    #[cfg(feature = "parallel")]
    fn merge(mut self, other: StepTally) -> StepTally {
        for (mine, theirs) in self.counts.iter_mut().zip(other.counts) {
            for (l, r) in mine.iter_mut().zip(theirs) {
                *l += r;
            }
        }
        self.terminated += other.terminated;
        self
    }
}

fn sequential_measurement_impl(
    rho: &DensityOperator,
    measures: &[GeneralizedMeasure],
    trajectories: u64,
    seed: u64,
    serial: bool,
) -> Result<SequenceStats> {
    for measure in measures {
        if measure.dim() != rho.dim() {
            return Err(Error::DimensionMismatch {
                left: rho.dim(),
                right: measure.dim(),
            });
        }
    }
    let shape: Vec<usize> = measures.iter().map(GeneralizedMeasure::len).collect();
    let marginals = sequence_marginals(rho, measures)?;

    let run = |t: u64| -> Result<Trajectory> {
        let mut rng = stream_rng(seed, t);
        run_trajectory(rho, measures, &mut rng)
    };

    let tally: StepTally = {
        #[cfg(feature = "parallel")]
        {
            if serial {
                serial_tally(trajectories, &shape, run)?
            } else {
                (0..trajectories as usize)
                    .into_par_iter()
                    .with_min_len(64)
                    .map(|t| run(t as u64))
                    .try_fold(
                        || StepTally::new(&shape),
                        |mut acc, trajectory| {
                            acc.absorb(&trajectory?);
                            Ok::<_, Error>(acc)
                        },
                    )
                    .try_reduce(|| StepTally::new(&shape), |a, b| Ok(a.merge(b)))?
            }
        }
        #[cfg(not(feature = "parallel"))]
        {
            let _ = serial;
            serial_tally(trajectories, &shape, run)?
        }
    };

    let per_step = measures
        .iter()
        .zip(tally.counts)
        .zip(marginals)
        .map(|((measure, counts), born)| {
            MeasurementRecord::from_counts(measure.outcomes().labels().to_vec(), counts, born)
        })
        .collect();

    let first_trajectory = if trajectories > 0 {
        Some(run(0)?)
    } else {
        None
    };

    Ok(SequenceStats {
        trajectories,
        per_step,
        terminated: tally.terminated,
        first_trajectory,
    })
}

fn serial_tally(
    trajectories: u64,
    shape: &[usize],
    run: impl Fn(u64) -> Result<Trajectory>,
) -> Result<StepTally> {
    let mut tally = StepTally::new(shape);
    for t in 0..trajectories {
        tally.absorb(&run(t)?);
    }
    Ok(tally)
}
