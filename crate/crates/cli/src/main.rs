mod expr;
mod report;
mod runner;
mod scenario;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use runner::{Overrides, EXIT_SCHEMA};
use scenario::Scenario;

/// Bundled scenarios, compiled into the binary.
const BUNDLED: &[(&str, &str)] = &[
    ("example1", include_str!("../scenarios/example1.toml")),
    ("example2", include_str!("../scenarios/example2.toml")),
    ("eq39", include_str!("../scenarios/eq39.toml")),
    ("gamma_fixed_points", include_str!("../scenarios/gamma_fixed_points.toml")),
    ("triple_random", include_str!("../scenarios/triple_random.toml")),
];

#[derive(Parser)]
#[command(name = "nhur", version, about = "Uncertainty-relation scenario runner")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Runs a scenario file (or a bundled scenario by name).
    Run {
        /// Path to a scenario TOML file, or a bundled scenario name.
        scenario: String,
        /// Directory for CSV time series (gamma_orbit analyses).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Overrides the scenario seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides the saturation tolerance.
        #[arg(long)]
        tol: Option<f64>,
        /// Overrides the Fock-space truncation.
        #[arg(long)]
        truncation: Option<usize>,
    },
    /// Lists bundled scenarios (plus any in --dir).
    List {
        /// Extra directory of scenario files to include.
        #[arg(long)]
        dir: Option<PathBuf>,
    },
}

fn load_scenario(name: &str) -> Result<Scenario, String> {
    let source = if Path::new(name).is_file() {
        std::fs::read_to_string(name).map_err(|e| format!("cannot read {name}: {e}"))?
    } else if let Some((_, text)) = BUNDLED.iter().find(|(n, _)| *n == name) {
        (*text).to_string()
    } else {
        return Err(format!(
            "'{name}' is neither a file nor a bundled scenario (try `nhur list`)"
        ));
    };
    toml::from_str(&source).map_err(|e| format!("scenario '{name}': {e}"))
}

fn cmd_run(
    name: &str,
    out: Option<&Path>,
    overrides: &Overrides,
) -> Result<i32, runner::Failure> {
    let scenario = load_scenario(name)
        .map_err(|message| runner::Failure { code: EXIT_SCHEMA, message })?;
    let run = runner::run(&scenario, overrides)?;

    let stdout = std::io::stdout();
    report::write_machine(&mut stdout.lock(), &run).expect("stdout");
    let stderr = std::io::stderr();
    report::write_human(&mut stderr.lock(), &run).expect("stderr");
    if let Some(dir) = out {
        report::write_csv(dir, &run).map_err(|e| runner::Failure {
            code: EXIT_SCHEMA,
            message: format!("cannot write CSV under {}: {e}", dir.display()),
        })?;
    }
    Ok(run.exit_code)
}

fn cmd_list(dir: Option<&Path>) {
    for (name, text) in BUNDLED {
        let description = toml::from_str::<Scenario>(text)
            .ok()
            .and_then(|s| s.description)
            .unwrap_or_default();
        println!("{name}\t{description}");
    }
    let Some(dir) = dir else { return };
    let Ok(entries) = std::fs::read_dir(dir) else {
        eprintln!("warning: cannot read directory {}", dir.display());
        return;
    };
    let mut paths: Vec<PathBuf> = entries
        .flatten()
        .map(|e| e.path())
        .filter(|p| p.extension().is_some_and(|x| x == "toml"))
        .collect();
    paths.sort();
    for p in paths {
        let description = std::fs::read_to_string(&p)
            .ok()
            .and_then(|text| toml::from_str::<Scenario>(&text).ok())
            .and_then(|s| s.description)
            .unwrap_or_else(|| "(does not parse)".into());
        println!("{}\t{description}", p.display());
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.cmd {
        Cmd::Run { scenario, out, seed, tol, truncation } => {
            let overrides = Overrides { seed, tol, truncation };
            match cmd_run(&scenario, out.as_deref(), &overrides) {
                Ok(code) => code,
                Err(failure) => {
                    eprintln!("error: {failure}");
                    failure.code
                }
            }
        }
        Cmd::List { dir } => {
            cmd_list(dir.as_deref());
            0
        }
    };
    ExitCode::from(code as u8)
}
