//! Scenario-file front end for the unsharp measurement toolkit.
//!
//! A scenario is a JSON document with a dimension, a named object map, and
//! one command; see the repository README for the format reference. Exit
//! codes: 0 ok, 1 validation failure, 2 infeasible search, 3 parse error.

pub mod exec;
pub mod report;
pub mod scenario;

pub use exec::{run, Options};
pub use report::{Format, Payload, Report, Status};
pub use scenario::{parse_scenario, Scenario, ScenarioError};
