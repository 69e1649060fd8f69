use std::path::PathBuf;
use std::process::ExitCode;

use deficit_lab::cli::{run_experiment, Experiment, ExperimentConfig};
use deficit_lab::Error;

const USAGE: &str = "usage: deficit-lab <identities|limit-rates|slicing|entropy|projection|all> --config <path> [--output-dir <path>]";

fn parse_args() -> Result<ExperimentConfig, String> {
    let mut args = std::env::args().skip(1);
    let experiment = match args.next() {
        Some(s) => Experiment::parse(&s).map_err(|e| e.to_string())?,
        None => return Err("missing experiment".into()),
    };
    let mut config_path: Option<PathBuf> = None;
    let mut output_dir: Option<PathBuf> = None;
    while let Some(flag) = args.next() {
        match flag.as_str() {
            "--config" => {
                config_path = Some(PathBuf::from(args.next().ok_or("--config needs a path")?));
            }
            "--output-dir" => {
                output_dir = Some(PathBuf::from(
                    args.next().ok_or("--output-dir needs a path")?,
                ));
            }
            other => return Err(format!("unknown argument '{other}'")),
        }
    }
    let path = config_path.ok_or("--config is required")?;
    let mut cfg = ExperimentConfig::from_file(&path).map_err(|e| e.to_string())?;
    cfg.experiment = experiment;
    if let Some(dir) = output_dir {
        cfg.output_dir = dir;
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let cfg = match parse_args() {
        Ok(cfg) => cfg,
        Err(msg) => {
            eprintln!("error: {msg}");
            eprintln!("{USAGE}");
            return ExitCode::from(2);
        }
    };
    match run_experiment(&cfg) {
        Ok(summary) => {
            for check in &summary.checks {
                println!(
                    "[{}] {}/{} = {:.6e} ({})",
                    if check.passed { "PASS" } else { "FAIL" },
                    check.experiment,
                    check.check,
                    check.value,
                    check.threshold
                );
            }
            let failed = summary.failed();
            println!(
                "{} of {} checks passed; outputs in {}",
                summary.checks.len() - failed.len(),
                summary.checks.len(),
                cfg.output_dir.display()
            );
            if failed.is_empty() {
                ExitCode::SUCCESS
            } else {
                for check in failed {
                    eprintln!(
                        "failed: {}/{} ({}) value {:.6e} threshold {}",
                        check.experiment, check.check, check.detail, check.value, check.threshold
                    );
                }
                ExitCode::from(1)
            }
        }
        Err(Error::ConfigParse(msg)) => {
            eprintln!("error: {msg}");
            eprintln!("{USAGE}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
