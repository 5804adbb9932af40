//! Dispatch from a parsed scenario to the library operations.

use unsharp_core::effects::{born_probability, spanning_states, DensityOperator, Effect};
use unsharp_core::linalg::{check_hermitian, hermitian_eigenvalues, symmetrize, CMatrix};
use unsharp_core::naimark::{alternate_dilation, dilate, verify_dilation};
use unsharp_core::observables::{
    chsh_value, coexist_binary_povms, expectation_variance, robertson_check, smear,
    CoexistenceOutcome, GeneralizedMeasure, OutcomeSpace, ProjectiveMeasure, SearchBudget,
    StochasticKernel,
};
use unsharp_core::simulator::{sample_outcomes, sequential_measurement, EnsembleConfig};

use crate::report::{
    Format, ObjectReport, Payload, Report, Settings, Status, StepOutcome, StepReport,
};
use crate::scenario::{matrix_from_spec, matrix_to_spec, CommandSpec, ObjectSpec, Scenario};

/// Flag values applied to a run.
#[derive(Debug, Clone)]
pub struct Options {
    pub tolerance: f64,
    pub group_tol: f64,
    pub seed: u64,
    pub samples: u64,
    pub format: Format,
}

impl Default for Options {
    fn default() -> Self {
        Self {
            tolerance: 1e-9,
            group_tol: 1e-8,
            seed: 0,
            samples: 10_000,
            format: Format::Text,
        }
    }
}

impl Options {
    fn settings(&self) -> Settings {
        Settings {
            tolerance: self.tolerance,
            group_tol: self.group_tol,
            seed: self.seed,
            samples: self.samples,
            format: self.format,
        }
    }
}

struct Context<'a> {
    scenario: &'a Scenario,
    options: &'a Options,
}

/// An execution failure: the report status plus a diagnostic naming the
/// object and the violated invariant.
struct Failure {
    status: Status,
    message: String,
    /// Machine-readable partial result, e.g. the residual of an
    /// infeasible coexistence search.
    payload: Option<Payload>,
}

impl Failure {
    fn invalid(message: impl Into<String>) -> Self {
        Failure {
            status: Status::Invalid,
            message: message.into(),
            payload: None,
        }
    }
}

type ExecResult<T> = Result<T, Failure>;

fn object_error(name: &str, error: impl std::fmt::Display) -> Failure {
    Failure::invalid(format!("object '{name}': {error}"))
}

fn command_error(op: &str, error: impl std::fmt::Display) -> Failure {
    Failure::invalid(format!("command '{op}': {error}"))
}

impl<'a> Context<'a> {
    fn spec(&self, name: &str) -> ExecResult<&'a ObjectSpec> {
        self.scenario
            .object(name)
            .ok_or_else(|| Failure::invalid(format!("unknown object '{name}'")))
    }

    fn matrix(&self, name: &str) -> ExecResult<CMatrix> {
        let spec = self.spec(name)?;
        let raw = match spec {
            ObjectSpec::State { matrix }
            | ObjectSpec::Effect { matrix }
            | ObjectSpec::Observable { matrix } => matrix,
            _ => {
                return Err(Failure::invalid(format!(
                    "object '{name}' of kind '{}' has no single matrix",
                    spec.kind_name()
                )))
            }
        };
        matrix_from_spec(raw).map_err(|e| object_error(name, e))
    }

    fn state(&self, name: &str) -> ExecResult<DensityOperator> {
        let matrix = self.matrix(name)?;
        DensityOperator::new(matrix, self.options.tolerance).map_err(|e| object_error(name, e))
    }

    fn effect(&self, name: &str) -> ExecResult<Effect> {
        let matrix = self.matrix(name)?;
        Effect::new(matrix, self.options.tolerance).map_err(|e| object_error(name, e))
    }

    /// Observables are validated Hermitian and stored symmetrized, so the
    /// spectral routines see exactly Hermitian input.
    fn observable(&self, name: &str) -> ExecResult<CMatrix> {
        let matrix = self.matrix(name)?;
        check_hermitian(&matrix, self.options.tolerance).map_err(|e| object_error(name, e))?;
        Ok(symmetrize(&matrix))
    }

    fn measure(&self, name: &str) -> ExecResult<GeneralizedMeasure> {
        let spec = self.spec(name)?;
        let tol = self.options.tolerance;
        match spec {
            ObjectSpec::Povm {
                effects,
                labels,
                values,
            } => {
                let matrices = resolve_matrices(name, effects)?;
                let outcomes = outcome_space(name, matrices.len(), labels, values)?;
                GeneralizedMeasure::new(matrices, outcomes, tol).map_err(|e| object_error(name, e))
            }
            ObjectSpec::Pvm {
                projectors,
                labels,
                values,
            } => {
                let matrices = resolve_matrices(name, projectors)?;
                let outcomes = outcome_space(name, matrices.len(), labels, values)?;
                Ok(ProjectiveMeasure::new(matrices, outcomes, tol)
                    .map_err(|e| object_error(name, e))?
                    .to_generalized())
            }
            other => Err(Failure::invalid(format!(
                "object '{name}' has kind '{}', expected a measure",
                other.kind_name()
            ))),
        }
    }

    fn kernel(&self, name: &str) -> ExecResult<StochasticKernel> {
        match self.spec(name)? {
            ObjectSpec::Kernel { weights } => {
                StochasticKernel::from_rows(weights).map_err(|e| object_error(name, e))
            }
            other => Err(Failure::invalid(format!(
                "object '{name}' has kind '{}', expected a kernel",
                other.kind_name()
            ))),
        }
    }
}

fn resolve_matrices(name: &str, specs: &[crate::scenario::MatrixSpec]) -> ExecResult<Vec<CMatrix>> {
    specs
        .iter()
        .map(|s| matrix_from_spec(s).map_err(|e| object_error(name, e)))
        .collect()
}

fn outcome_space(
    name: &str,
    n: usize,
    labels: &Option<Vec<String>>,
    values: &Option<Vec<f64>>,
) -> ExecResult<OutcomeSpace> {
    match labels {
        Some(labels) => {
            OutcomeSpace::new(labels.clone(), values.clone()).map_err(|e| object_error(name, e))
        }
        None => match values {
            Some(values) => {
                let labels = (0..n).map(|i| i.to_string()).collect();
                OutcomeSpace::new(labels, Some(values.clone())).map_err(|e| object_error(name, e))
            }
            None => Ok(OutcomeSpace::indexed(n)),
        },
    }
}

/// Runs a scenario and maps the outcome onto a report and exit code.
pub fn run(scenario: &Scenario, options: &Options) -> (Report, i32) {
    let context = Context { scenario, options };
    let command = scenario.doc.command.op_name().to_string();
    let (status, payload, diagnostics) = match execute(&context) {
        Ok(payload) => (Status::Ok, Some(payload), Vec::new()),
        Err(Failure {
            status,
            message,
            payload,
        }) => (status, payload, vec![message]),
    };
    let report = Report {
        status,
        command,
        settings: options.settings(),
        payload,
        diagnostics,
    };
    let code = status.exit_code();
    (report, code)
}

fn execute(context: &Context) -> ExecResult<Payload> {
    match &context.scenario.doc.command {
        CommandSpec::Validate { target } => run_validate(context, target.as_deref()),
        CommandSpec::Prob { state, effect } => {
            let rho = context.state(state)?;
            let e = context.effect(effect)?;
            let w = born_probability(&rho, &e).map_err(|e| command_error("prob", e))?;
            Ok(Payload::Prob { w })
        }
        CommandSpec::Classify { effect } => {
            let e = context.effect(effect)?;
            let tol = context.options.tolerance;
            Ok(Payload::Classify {
                class: e.classify(tol).to_string(),
                sharp: e.is_sharp(tol),
                regular: e.is_regular(tol),
            })
        }
        CommandSpec::Smear { measure, kernel } => {
            let m = context.measure(measure)?;
            let k = context.kernel(kernel)?;
            let smeared = smear(&m, &k).map_err(|e| command_error("smear", e))?;
            Ok(Payload::Smear {
                labels: smeared.outcomes().labels().to_vec(),
                effects: smeared
                    .effects()
                    .iter()
                    .map(|e| matrix_to_spec(e.matrix()))
                    .collect(),
            })
        }
        CommandSpec::Coexist { a, b } => run_coexist(context, a, b),
        CommandSpec::Dilate { povm, variant_seed } => run_dilate(context, povm, *variant_seed),
        CommandSpec::Uncertainty { state, a, b } => {
            let rho = context.state(state)?;
            let a = context.observable(a)?;
            let b = context.observable(b)?;
            let (mean_a, delta_a) =
                expectation_variance(&rho, &a).map_err(|e| command_error("uncertainty", e))?;
            let (mean_b, delta_b) =
                expectation_variance(&rho, &b).map_err(|e| command_error("uncertainty", e))?;
            let check =
                robertson_check(&rho, &a, &b).map_err(|e| command_error("uncertainty", e))?;
            Ok(Payload::Uncertainty {
                mean_a,
                delta_a,
                mean_b,
                delta_b,
                lhs: check.lhs,
                rhs: check.rhs,
                holds: check.holds,
            })
        }
        CommandSpec::Chsh {
            state,
            a0,
            a1,
            b0,
            b1,
        } => {
            let rho = context.state(state)?;
            let a0 = context.observable(a0)?;
            let a1 = context.observable(a1)?;
            let b0 = context.observable(b0)?;
            let b1 = context.observable(b1)?;
            let value = chsh_value(&rho, &a0, &a1, &b0, &b1, context.options.tolerance)
                .map_err(|e| command_error("chsh", e))?;
            Ok(Payload::Chsh {
                value,
                classical_bound: 2.0,
                tsirelson_bound: 2.0 * std::f64::consts::SQRT_2,
            })
        }
        CommandSpec::Simulate { state, measure } => {
            let rho = context.state(state)?;
            let m = context.measure(measure)?;
            let config = EnsembleConfig::new(rho, m, context.options.samples, context.options.seed)
                .map_err(|e| command_error("simulate", e))?;
            let record = sample_outcomes(&config).map_err(|e| command_error("simulate", e))?;
            Ok(Payload::Simulate {
                labels: record.labels,
                counts: record.counts,
                frequencies: record.frequencies,
                stderr: record.stderr,
                born: record.born,
            })
        }
        CommandSpec::Sequence { state, measures } => {
            let rho = context.state(state)?;
            let resolved: Vec<GeneralizedMeasure> = measures
                .iter()
                .map(|name| context.measure(name))
                .collect::<ExecResult<_>>()?;
            let stats = sequential_measurement(
                &rho,
                &resolved,
                context.options.samples,
                context.options.seed,
            )
            .map_err(|e| command_error("sequence", e))?;
            let steps = stats
                .per_step
                .iter()
                .map(|record| StepReport {
                    labels: record.labels.clone(),
                    counts: record.counts.clone(),
                    frequencies: record.frequencies.clone(),
                    stderr: record.stderr.clone(),
                    born: record.born.clone(),
                })
                .collect();
            let first_trajectory = stats
                .first_trajectory
                .map(|trajectory| {
                    trajectory
                        .steps
                        .iter()
                        .map(|s| StepOutcome {
                            step: s.measure_index,
                            outcome: s.outcome_label.clone(),
                        })
                        .collect()
                })
                .unwrap_or_default();
            Ok(Payload::Sequence {
                trajectories: stats.trajectories,
                terminated: stats.terminated,
                steps,
                first_trajectory,
            })
        }
    }
}

fn run_validate(context: &Context, target: Option<&str>) -> ExecResult<Payload> {
    let names: Vec<String> = match target {
        Some(t) => {
            context.spec(t)?;
            vec![t.to_string()]
        }
        None => context.scenario.doc.objects.keys().cloned().collect(),
    };
    if names.is_empty() {
        return Err(Failure::invalid("no objects"));
    }
    let mut reports = Vec::with_capacity(names.len());
    for name in &names {
        let spec = context.spec(name)?;
        let report = validate_object(context, name, spec)?;
        reports.push(report);
    }
    Ok(Payload::Validate { objects: reports })
}

fn validate_object(context: &Context, name: &str, spec: &ObjectSpec) -> ExecResult<ObjectReport> {
    let tol = context.options.tolerance;
    let (dim, detail) = match spec {
        ObjectSpec::State { .. } => {
            let rho = context.state(name)?;
            (rho.dim(), "valid density operator".to_string())
        }
        ObjectSpec::Effect { .. } => {
            let e = context.effect(name)?;
            (e.dim(), format!("valid effect, class {}", e.classify(tol)))
        }
        ObjectSpec::Observable { .. } => {
            let h = context.observable(name)?;
            let eigs = hermitian_eigenvalues(&h).map_err(|e| object_error(name, e))?;
            (
                h.nrows(),
                format!(
                    "valid observable, spectrum [{:.6}, {:.6}]",
                    eigs.first().copied().unwrap_or(0.0),
                    eigs.last().copied().unwrap_or(0.0)
                ),
            )
        }
        ObjectSpec::Pvm { .. } | ObjectSpec::Povm { .. } => {
            let m = context.measure(name)?;
            let kind = if matches!(spec, ObjectSpec::Pvm { .. }) {
                "projective measure"
            } else {
                "generalized measure"
            };
            (m.dim(), format!("valid {kind}, {} outcomes", m.len()))
        }
        ObjectSpec::Kernel { .. } => {
            let k = context.kernel(name)?;
            (
                k.input_len(),
                format!("valid kernel, {}x{}", k.output_len(), k.input_len()),
            )
        }
    };
    Ok(ObjectReport {
        name: name.to_string(),
        kind: spec.kind_name().to_string(),
        dim,
        detail,
    })
}

fn run_coexist(context: &Context, a: &str, b: &str) -> ExecResult<Payload> {
    let a = context.measure(a)?;
    let b = context.measure(b)?;
    let budget = SearchBudget {
        feasibility_tol: context.options.tolerance.max(1e-8),
        seed: context.options.seed,
        ..SearchBudget::default()
    };
    let outcome = coexist_binary_povms(&a, &b, &budget).map_err(|e| command_error("coexist", e))?;
    match outcome {
        CoexistenceOutcome::Found {
            joint,
            worst_constraint_eigenvalue,
            marginal_deviation,
        } => Ok(Payload::Coexist {
            coexistent: true,
            residual: worst_constraint_eigenvalue,
            marginal_deviation: Some(marginal_deviation),
            joint_labels: Some(joint.outcomes().labels().to_vec()),
            joint_effects: Some(
                joint
                    .effects()
                    .iter()
                    .map(|e| matrix_to_spec(e.matrix()))
                    .collect(),
            ),
        }),
        CoexistenceOutcome::NotFound { residual } => Err(Failure {
            status: Status::Infeasible,
            message: format!(
                "no joint observable found within budget; best residual {residual:.6e} \
                 (heuristic report, not a certificate)"
            ),
            payload: Some(Payload::Coexist {
                coexistent: false,
                residual,
                marginal_deviation: None,
                joint_labels: None,
                joint_effects: None,
            }),
        }),
    }
}

fn run_dilate(context: &Context, povm: &str, variant_seed: Option<u64>) -> ExecResult<Payload> {
    let measure = context.measure(povm)?;
    let dilation = match variant_seed {
        None => dilate(&measure),
        Some(seed) => alternate_dilation(&measure, seed),
    }
    .map_err(|e| command_error("dilate", e))?;
    let states = spanning_states(measure.dim()).map_err(|e| command_error("dilate", e))?;
    let statistics_deviation =
        verify_dilation(&measure, &dilation, &states).map_err(|e| command_error("dilate", e))?;
    Ok(Payload::Dilate {
        ancilla_dim: dilation.ancilla_dim(),
        extended_dim: dilation.extended_dim(),
        isometry_defect: dilation.isometry_defect(),
        statistics_deviation,
        isometry: matrix_to_spec(dilation.isometry()),
        projectors: dilation
            .extended_pvm()
            .projectors()
            .iter()
            .map(matrix_to_spec)
            .collect(),
    })
}
