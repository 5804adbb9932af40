//! Machine- and human-readable command reports.
//!
//! JSON output carries full-precision numbers and is byte-identical for
//! identical (scenario, settings) inputs; text output rounds matrices to
//! 12 significant digits.

use serde::Serialize;

use crate::scenario::MatrixSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    Invalid,
    Infeasible,
    Error,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Ok => 0,
            Status::Invalid => 1,
            Status::Infeasible => 2,
            Status::Error => 3,
        }
    }

    fn name(self) -> &'static str {
        match self {
            Status::Ok => "ok",
            Status::Invalid => "invalid",
            Status::Infeasible => "infeasible",
            Status::Error => "error",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Text,
    Json,
}

/// Flags echoed into every report for provenance.
#[derive(Debug, Clone, Serialize)]
pub struct Settings {
    pub tolerance: f64,
    pub group_tol: f64,
    pub seed: u64,
    pub samples: u64,
    pub format: Format,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub status: Status,
    pub command: String,
    pub settings: Settings,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub payload: Option<Payload>,
    pub diagnostics: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
#[serde(untagged)]
pub enum Payload {
    Validate {
        objects: Vec<ObjectReport>,
    },
    Prob {
        w: f64,
    },
    Classify {
        class: String,
        sharp: bool,
        regular: bool,
    },
    Smear {
        labels: Vec<String>,
        effects: Vec<MatrixSpec>,
    },
    Coexist {
        coexistent: bool,
        residual: f64,
        #[serde(skip_serializing_if = "Option::is_none")]
        marginal_deviation: Option<f64>,
        #[serde(skip_serializing_if = "Option::is_none")]
        joint_labels: Option<Vec<String>>,
        #[serde(skip_serializing_if = "Option::is_none")]
        joint_effects: Option<Vec<MatrixSpec>>,
    },
    Dilate {
        ancilla_dim: usize,
        extended_dim: usize,
        isometry_defect: f64,
        statistics_deviation: f64,
        isometry: MatrixSpec,
        projectors: Vec<MatrixSpec>,
    },
    Uncertainty {
        mean_a: f64,
        delta_a: f64,
        mean_b: f64,
        delta_b: f64,
        lhs: f64,
        rhs: f64,
        holds: bool,
    },
    Chsh {
        value: f64,
        classical_bound: f64,
        tsirelson_bound: f64,
    },
    Simulate {
        labels: Vec<String>,
        counts: Vec<u64>,
        frequencies: Vec<f64>,
        stderr: Vec<f64>,
        born: Vec<f64>,
    },
    Sequence {
        trajectories: u64,
        terminated: u64,
        steps: Vec<StepReport>,
        first_trajectory: Vec<StepOutcome>,
    },
}

#[derive(Debug, Clone, Serialize)]
pub struct ObjectReport {
    pub name: String,
    pub kind: String,
    pub dim: usize,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct StepReport {
    pub labels: Vec<String>,
    pub counts: Vec<u64>,
    pub frequencies: Vec<f64>,
    pub stderr: Vec<f64>,
    pub born: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct StepOutcome {
    pub step: usize,
    pub outcome: String,
}

impl Report {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => self.to_json(),
            Format::Text => self.to_text(),
        }
    }

    fn to_text(&self) -> String {
        let mut out = String::new();
        let s = &self.settings;
        out.push_str(&format!("status: {}\n", self.status.name()));
        out.push_str(&format!("command: {}\n", self.command));
        out.push_str(&format!(
            "settings: tolerance={:e} group_tol={:e} seed={} samples={}\n",
            s.tolerance, s.group_tol, s.seed, s.samples
        ));
        for line in &self.diagnostics {
            out.push_str(&format!("diagnostic: {line}\n"));
        }
        if let Some(payload) = &self.payload {
            payload.write_text(&mut out);
        }
        out
    }
}

/// Rounds to 12 significant digits for the text renderer.
fn sig12(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    let magnitude = x.abs().log10().floor() as i32;
    let factor = 10f64.powi(11 - magnitude);
    (x * factor).round() / factor
}

fn fmt_complex(entry: &[f64; 2]) -> String {
    let re = sig12(entry[0]);
    let im = sig12(entry[1]);
    if im == 0.0 {
        format!("{re}")
    } else if im > 0.0 {
        format!("{re}+{im}i")
    } else {
        format!("{re}{im}i")
    }
}

fn write_matrix(out: &mut String, indent: &str, m: &MatrixSpec) {
    for row in m {
        let cells: Vec<String> = row.iter().map(fmt_complex).collect();
        out.push_str(&format!("{indent}[ {} ]\n", cells.join("  ")));
    }
}

fn fmt_vec(values: &[f64]) -> String {
    let cells: Vec<String> = values.iter().map(|&x| format!("{}", sig12(x))).collect();
    format!("[{}]", cells.join(", "))
}

impl Payload {
    fn write_text(&self, out: &mut String) {
        match self {
            Payload::Validate { objects } => {
                for o in objects {
                    out.push_str(&format!(
                        "object '{}': kind={} dim={} {}\n",
                        o.name, o.kind, o.dim, o.detail
                    ));
                }
            }
            Payload::Prob { w } => out.push_str(&format!("w = {w}\n")),
            Payload::Classify {
                class,
                sharp,
                regular,
            } => {
                out.push_str(&format!(
                    "class = {class}\nsharp = {sharp}\nregular = {regular}\n"
                ));
            }
            Payload::Smear { labels, effects } => {
                for (label, effect) in labels.iter().zip(effects) {
                    out.push_str(&format!("effect '{label}':\n"));
                    write_matrix(out, "  ", effect);
                }
            }
            Payload::Coexist {
                coexistent,
                residual,
                marginal_deviation,
                joint_labels,
                joint_effects,
            } => {
                out.push_str(&format!("coexistent = {coexistent}\n"));
                out.push_str(&format!("residual = {}\n", sig12(*residual)));
                if let Some(dev) = marginal_deviation {
                    out.push_str(&format!("marginal_deviation = {}\n", sig12(*dev)));
                }
                if let (Some(labels), Some(effects)) = (joint_labels, joint_effects) {
                    for (label, effect) in labels.iter().zip(effects) {
                        out.push_str(&format!("joint effect '{label}':\n"));
                        write_matrix(out, "  ", effect);
                    }
                }
            }
            Payload::Dilate {
                ancilla_dim,
                extended_dim,
                isometry_defect,
                statistics_deviation,
                isometry,
                projectors,
            } => {
                out.push_str(&format!("ancilla_dim = {ancilla_dim}\n"));
                out.push_str(&format!("extended_dim = {extended_dim}\n"));
                out.push_str(&format!("isometry_defect = {}\n", sig12(*isometry_defect)));
                out.push_str(&format!(
                    "statistics_deviation = {}\n",
                    sig12(*statistics_deviation)
                ));
                out.push_str("isometry:\n");
                write_matrix(out, "  ", isometry);
                for (i, p) in projectors.iter().enumerate() {
                    out.push_str(&format!("projector[{i}]:\n"));
                    write_matrix(out, "  ", p);
                }
            }
            Payload::Uncertainty {
                mean_a,
                delta_a,
                mean_b,
                delta_b,
                lhs,
                rhs,
                holds,
            } => {
                out.push_str(&format!("mean_a = {mean_a}\ndelta_a = {delta_a}\n"));
                out.push_str(&format!("mean_b = {mean_b}\ndelta_b = {delta_b}\n"));
                out.push_str(&format!("lhs = {lhs}\nrhs = {rhs}\nholds = {holds}\n"));
            }
            Payload::Chsh {
                value,
                classical_bound,
                tsirelson_bound,
            } => {
                out.push_str(&format!("value = {value}\n"));
                out.push_str(&format!("classical_bound = {classical_bound}\n"));
                out.push_str(&format!("tsirelson_bound = {tsirelson_bound}\n"));
            }
            Payload::Simulate {
                labels,
                counts,
                frequencies,
                stderr,
                born,
            } => {
                for (i, label) in labels.iter().enumerate() {
                    out.push_str(&format!(
                        "outcome '{}': count={} frequency={} stderr={} born={}\n",
                        label,
                        counts[i],
                        sig12(frequencies[i]),
                        sig12(stderr[i]),
                        sig12(born[i])
                    ));
                }
            }
            Payload::Sequence {
                trajectories,
                terminated,
                steps,
                first_trajectory,
            } => {
                out.push_str(&format!("trajectories = {trajectories}\n"));
                out.push_str(&format!("terminated = {terminated}\n"));
                for (k, step) in steps.iter().enumerate() {
                    out.push_str(&format!(
                        "step {k}: labels={:?} counts={:?} frequencies={} born={}\n",
                        step.labels,
                        step.counts,
                        fmt_vec(&step.frequencies),
                        fmt_vec(&step.born)
                    ));
                }
                let path: Vec<String> = first_trajectory
                    .iter()
                    .map(|s| format!("{}:{}", s.step, s.outcome))
                    .collect();
                out.push_str(&format!("first_trajectory = {}\n", path.join(" -> ")));
            }
        }
    }
}
