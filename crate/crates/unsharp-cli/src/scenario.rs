//! Scenario documents: a JSON object declaring a dimension, a named map of
//! objects (states, effects, observables, measures, kernels), and one
//! command over those names.
//!
//! Complex numbers are `[re, im]` pairs; matrices are row-major nested
//! arrays; kernels are row-major real matrices whose columns sum to 1.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use unsharp_core::linalg::{CMatrix, C64, MAX_DIM};

/// Row-major complex matrix literal: entries are [re, im] pairs.
pub type MatrixSpec = Vec<Vec<[f64; 2]>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioDoc {
    pub dimension: usize,
    #[serde(default)]
    pub objects: BTreeMap<String, ObjectSpec>,
    pub command: CommandSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ObjectSpec {
    State {
        matrix: MatrixSpec,
    },
    Effect {
        matrix: MatrixSpec,
    },
    Observable {
        matrix: MatrixSpec,
    },
    Pvm {
        projectors: Vec<MatrixSpec>,
        #[serde(skip_serializing_if = "Option::is_none")]
        labels: Option<Vec<String>>,
        #[serde(skip_serializing_if = "Option::is_none")]
        values: Option<Vec<f64>>,
    },
    Povm {
        effects: Vec<MatrixSpec>,
        #[serde(skip_serializing_if = "Option::is_none")]
        labels: Option<Vec<String>>,
        #[serde(skip_serializing_if = "Option::is_none")]
        values: Option<Vec<f64>>,
    },
    Kernel {
        weights: Vec<Vec<f64>>,
    },
}

impl ObjectSpec {
    pub fn kind_name(&self) -> &'static str {
        match self {
            ObjectSpec::State { .. } => "state",
            ObjectSpec::Effect { .. } => "effect",
            ObjectSpec::Observable { .. } => "observable",
            ObjectSpec::Pvm { .. } => "pvm",
            ObjectSpec::Povm { .. } => "povm",
            ObjectSpec::Kernel { .. } => "kernel",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case", deny_unknown_fields)]
pub enum CommandSpec {
    /// Validates every declared object (or a single named one).
    Validate {
        #[serde(skip_serializing_if = "Option::is_none")]
        target: Option<String>,
    },
    Prob {
        state: String,
        effect: String,
    },
    Classify {
        effect: String,
    },
    Smear {
        measure: String,
        kernel: String,
    },
    Coexist {
        a: String,
        b: String,
    },
    Dilate {
        povm: String,
        #[serde(skip_serializing_if = "Option::is_none")]
        variant_seed: Option<u64>,
    },
    Uncertainty {
        state: String,
        a: String,
        b: String,
    },
    Chsh {
        state: String,
        a0: String,
        a1: String,
        b0: String,
        b1: String,
    },
    Simulate {
        state: String,
        measure: String,
    },
    Sequence {
        state: String,
        measures: Vec<String>,
    },
}

impl CommandSpec {
    pub fn op_name(&self) -> &'static str {
        match self {
            CommandSpec::Validate { .. } => "validate",
            CommandSpec::Prob { .. } => "prob",
            CommandSpec::Classify { .. } => "classify",
            CommandSpec::Smear { .. } => "smear",
            CommandSpec::Coexist { .. } => "coexist",
            CommandSpec::Dilate { .. } => "dilate",
            CommandSpec::Uncertainty { .. } => "uncertainty",
            CommandSpec::Chsh { .. } => "chsh",
            CommandSpec::Simulate { .. } => "simulate",
            CommandSpec::Sequence { .. } => "sequence",
        }
    }

    /// Referenced object names with the kinds each position accepts.
    pub fn references(&self) -> Vec<(&str, &'static [&'static str])> {
        const STATE: &[&str] = &["state"];
        const EFFECT: &[&str] = &["effect"];
        const OBSERVABLE: &[&str] = &["observable"];
        const MEASURE: &[&str] = &["pvm", "povm"];
        const KERNEL: &[&str] = &["kernel"];
        match self {
            CommandSpec::Validate { target } => {
                target.iter().map(|t| (t.as_str(), ANY_KIND)).collect()
            }
            CommandSpec::Prob { state, effect } => {
                vec![(state.as_str(), STATE), (effect.as_str(), EFFECT)]
            }
            CommandSpec::Classify { effect } => vec![(effect.as_str(), EFFECT)],
            CommandSpec::Smear { measure, kernel } => {
                vec![(measure.as_str(), MEASURE), (kernel.as_str(), KERNEL)]
            }
            CommandSpec::Coexist { a, b } => vec![(a.as_str(), MEASURE), (b.as_str(), MEASURE)],
            CommandSpec::Dilate { povm, .. } => vec![(povm.as_str(), MEASURE)],
            CommandSpec::Uncertainty { state, a, b } => vec![
                (state.as_str(), STATE),
                (a.as_str(), OBSERVABLE),
                (b.as_str(), OBSERVABLE),
            ],
            CommandSpec::Chsh {
                state,
                a0,
                a1,
                b0,
                b1,
            } => vec![
                (state.as_str(), STATE),
                (a0.as_str(), OBSERVABLE),
                (a1.as_str(), OBSERVABLE),
                (b0.as_str(), OBSERVABLE),
                (b1.as_str(), OBSERVABLE),
            ],
            CommandSpec::Simulate { state, measure } => {
                vec![(state.as_str(), STATE), (measure.as_str(), MEASURE)]
            }
            CommandSpec::Sequence { state, measures } => {
                let mut refs = vec![(state.as_str(), STATE)];
                refs.extend(measures.iter().map(|m| (m.as_str(), MEASURE)));
                refs
            }
        }
    }
}

const ANY_KIND: &[&str] = &["state", "effect", "observable", "pvm", "povm", "kernel"];

/// A structurally validated scenario: shapes are consistent and every
/// reference resolves to an object of an accepted kind. Tolerance-dependent
/// validation happens when the command runs.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub doc: ScenarioDoc,
}

impl Scenario {
    pub fn dimension(&self) -> usize {
        self.doc.dimension
    }

    pub fn object(&self, name: &str) -> Option<&ObjectSpec> {
        self.doc.objects.get(name)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.doc).expect("scenario serializes")
    }
}

/// Errors from reading a scenario document, tagged with the exit code.
#[derive(Debug)]
pub enum ScenarioError {
    /// Malformed document (exit 3).
    Syntax(String),
    /// Well-formed but inconsistent (exit 1).
    Invalid(String),
}

impl ScenarioError {
    pub fn exit_code(&self) -> i32 {
        match self {
            ScenarioError::Syntax(_) => 3,
            ScenarioError::Invalid(_) => 1,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            ScenarioError::Syntax(m) | ScenarioError::Invalid(m) => m,
        }
    }
}

fn invalid(msg: impl Into<String>) -> ScenarioError {
    ScenarioError::Invalid(msg.into())
}

pub fn matrix_from_spec(spec: &MatrixSpec) -> Result<CMatrix, String> {
    let rows = spec.len();
    if rows == 0 {
        return Err("matrix has no rows".to_string());
    }
    let cols = spec[0].len();
    for (i, row) in spec.iter().enumerate() {
        if row.len() != cols {
            return Err(format!(
                "row {i} has {} entries, expected {cols}",
                row.len()
            ));
        }
    }
    let mut m = CMatrix::zeros(rows, cols);
    for (i, row) in spec.iter().enumerate() {
        for (j, &[re, im]) in row.iter().enumerate() {
            if !re.is_finite() || !im.is_finite() {
                return Err(format!("entry ({i}, {j}) is not finite"));
            }
            m[(i, j)] = C64::new(re, im);
        }
    }
    Ok(m)
}

pub fn matrix_to_spec(m: &CMatrix) -> MatrixSpec {
    (0..m.nrows())
        .map(|i| {
            (0..m.ncols())
                .map(|j| [m[(i, j)].re, m[(i, j)].im])
                .collect()
        })
        .collect()
}

fn check_square_of_dim(name: &str, spec: &MatrixSpec, dim: usize) -> Result<(), ScenarioError> {
    if spec.len() != dim || spec.iter().any(|row| row.len() != dim) {
        return Err(invalid(format!(
            "object '{name}': matrix must be {dim}x{dim} complex entries"
        )));
    }
    Ok(())
}

/// Parses and structurally validates a scenario document.
pub fn parse_scenario(text: &str) -> Result<Scenario, ScenarioError> {
    let doc: ScenarioDoc =
        serde_json::from_str(text).map_err(|e| ScenarioError::Syntax(e.to_string()))?;

    let dim = doc.dimension;
    if !(2..=MAX_DIM).contains(&dim) {
        return Err(invalid(format!(
            "dimension {dim} out of the supported range 2..={MAX_DIM}"
        )));
    }

    for (name, object) in &doc.objects {
        match object {
            ObjectSpec::State { matrix } | ObjectSpec::Effect { matrix } => {
                check_square_of_dim(name, matrix, dim)?;
            }
            ObjectSpec::Observable { matrix } => {
                // Observables may be 2x2 for the chsh command on a
                // dimension-4 scenario.
                let d = matrix.len();
                if !(d == dim || (d == 2 && dim == 4)) {
                    return Err(invalid(format!(
                        "object '{name}': observable must be {dim}x{dim} (or 2x2 for chsh)"
                    )));
                }
                check_square_of_dim(name, matrix, d)?;
            }
            ObjectSpec::Pvm {
                projectors,
                labels,
                values,
            } => {
                check_measure_shape(name, projectors, labels, values, dim)?;
            }
            ObjectSpec::Povm {
                effects,
                labels,
                values,
            } => {
                check_measure_shape(name, effects, labels, values, dim)?;
            }
            ObjectSpec::Kernel { weights } => {
                if weights.is_empty() || weights[0].is_empty() {
                    return Err(invalid(format!(
                        "object '{name}': kernel must be non-empty"
                    )));
                }
                let cols = weights[0].len();
                if weights.iter().any(|row| row.len() != cols) {
                    return Err(invalid(format!(
                        "object '{name}': kernel rows must have equal length"
                    )));
                }
            }
        }
    }

    for (reference, accepted) in doc.command.references() {
        match doc.objects.get(reference) {
            None => {
                return Err(invalid(format!(
                    "command '{}' references unknown object '{reference}'",
                    doc.command.op_name()
                )))
            }
            Some(object) if !accepted.contains(&object.kind_name()) => {
                return Err(invalid(format!(
                    "object '{reference}' has kind '{}', command '{}' expects one of {:?}",
                    object.kind_name(),
                    doc.command.op_name(),
                    accepted
                )))
            }
            Some(_) => {}
        }
    }

    Ok(Scenario { doc })
}

fn check_measure_shape(
    name: &str,
    elements: &[MatrixSpec],
    labels: &Option<Vec<String>>,
    values: &Option<Vec<f64>>,
    dim: usize,
) -> Result<(), ScenarioError> {
    if elements.is_empty() {
        return Err(invalid(format!("object '{name}': measure has no elements")));
    }
    for element in elements {
        check_square_of_dim(name, element, dim)?;
    }
    if let Some(labels) = labels {
        if labels.len() != elements.len() {
            return Err(invalid(format!(
                "object '{name}': {} labels for {} elements",
                labels.len(),
                elements.len()
            )));
        }
    }
    if let Some(values) = values {
        if values.len() != elements.len() {
            return Err(invalid(format!(
                "object '{name}': {} values for {} elements",
                values.len(),
                elements.len()
            )));
        }
    }
    Ok(())
}
