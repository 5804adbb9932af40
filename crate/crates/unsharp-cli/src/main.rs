use std::io::Read;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use unsharp_cli::report::{Format, Report, Settings, Status};
use unsharp_cli::{parse_scenario, run, Options};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Text,
    Json,
}

impl From<FormatArg> for Format {
    fn from(value: FormatArg) -> Self {
        match value {
            FormatArg::Text => Format::Text,
            FormatArg::Json => Format::Json,
        }
    }
}

/// Operational quantum measurement toolkit: validates states, effects and
/// measures, evaluates probabilities and uncertainty relations, searches
/// for joint observables, builds projective dilations, and simulates
/// measurement ensembles from a JSON scenario file.
#[derive(Debug, Parser)]
#[command(name = "unsharp", version)]
struct Cli {
    /// Scenario file path; "-" reads the document from stdin
    scenario: String,

    /// Validation tolerance
    #[arg(long, default_value_t = 1e-9)]
    tolerance: f64,

    /// Relative gap below which eigenvalues merge into one outcome
    #[arg(long = "group-tol", default_value_t = 1e-8)]
    group_tol: f64,

    /// Seed for sampling commands and dilation variants
    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Sample count for simulate; trajectory count for sequence
    #[arg(long, default_value_t = 10_000)]
    samples: u64,

    /// Report format
    #[arg(long, value_enum, default_value_t = FormatArg::Text)]
    format: FormatArg,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let options = Options {
        tolerance: cli.tolerance,
        group_tol: cli.group_tol,
        seed: cli.seed,
        samples: cli.samples,
        format: cli.format.into(),
    };

    let text = match read_scenario(&cli.scenario) {
        Ok(text) => text,
        Err(message) => return emit_failure(&options, "read", Status::Error, message),
    };

    let scenario = match parse_scenario(&text) {
        Ok(scenario) => scenario,
        Err(error) => {
            let status = if error.exit_code() == 3 {
                Status::Error
            } else {
                Status::Invalid
            };
            return emit_failure(&options, "parse", status, error.message().to_string());
        }
    };

    let (report, code) = run(&scenario, &options);
    emit(&report, &options);
    ExitCode::from(code as u8)
}

fn read_scenario(path: &str) -> Result<String, String> {
    if path == "-" {
        let mut text = String::new();
        std::io::stdin()
            .read_to_string(&mut text)
            .map_err(|e| format!("failed to read stdin: {e}"))?;
        Ok(text)
    } else {
        std::fs::read_to_string(path).map_err(|e| format!("failed to read '{path}': {e}"))
    }
}

fn emit(report: &Report, options: &Options) {
    println!("{}", report.render(options.format).trim_end());
    for line in &report.diagnostics {
        eprintln!("{line}");
    }
}

fn emit_failure(options: &Options, stage: &str, status: Status, message: String) -> ExitCode {
    let report = Report {
        status,
        command: stage.to_string(),
        settings: Settings {
            tolerance: options.tolerance,
            group_tol: options.group_tol,
            seed: options.seed,
            samples: options.samples,
            format: options.format,
        },
        payload: None,
        diagnostics: vec![message],
    };
    emit(&report, options);
    ExitCode::from(status.exit_code() as u8)
}
