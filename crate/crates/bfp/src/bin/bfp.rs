//! Command-line front end.
//!
//! Subcommands:
//!   bfp solve --config <path> [--output-dir <path>]
//!   bfp bench table1 --output-dir <path>
//!   bfp oracle --config <path> [--output-dir <path>]
//!
//! Exit status is 0 only when every requested solve converged and, for the
//! benchmark, every iteration-count band passed.

use bfp::harness::{parse_config, run_case, run_table1_bench, MethodSelector};
use std::path::PathBuf;
use std::process::ExitCode;

const USAGE: &str = "usage:
  bfp solve --config <path> [--output-dir <path>]
  bfp bench table1 --output-dir <path>
  bfp oracle --config <path> [--output-dir <path>]";

fn take_flag(args: &mut Vec<String>, flag: &str) -> Result<Option<String>, String> {
    if let Some(pos) = args.iter().position(|a| a == flag) {
        if pos + 1 >= args.len() {
            return Err(format!("{flag} needs a value"));
        }
        let value = args.remove(pos + 1);
        args.remove(pos);
        Ok(Some(value))
    } else {
        Ok(None)
    }
}

fn run_solve(mut args: Vec<String>, force_oracle: bool) -> Result<bool, String> {
    let config_path = take_flag(&mut args, "--config")?
        .ok_or_else(|| "--config is required".to_string())?;
    let output_dir = take_flag(&mut args, "--output-dir")?;
    if !args.is_empty() {
        return Err(format!("unexpected arguments: {}", args.join(" ")));
    }
    let text = std::fs::read_to_string(&config_path)
        .map_err(|e| format!("cannot read {config_path}: {e}"))?;
    let mut cfg = parse_config(&text).map_err(|e| e.to_string())?;
    if let Some(dir) = output_dir {
        cfg.output_dir = PathBuf::from(dir);
    }
    if force_oracle {
        cfg.method = MethodSelector::Oracle;
    }
    let outcome = run_case(&cfg).map_err(|e| e.to_string())?;
    for report in &outcome.reports {
        println!(
            "{}: method={} iterations={} converged={} wall_seconds={:.6}",
            cfg.label, report.method, report.iterations, report.converged, report.wall_seconds
        );
    }
    if outcome.oracle_phi0.is_some() {
        println!("{}: method=oracle direct solve complete", cfg.label);
    }
    for file in &outcome.files {
        println!("wrote {}", file.display());
    }
    Ok(outcome.all_converged)
}

fn run_bench(mut args: Vec<String>) -> Result<bool, String> {
    if args.first().map(String::as_str) != Some("table1") {
        return Err("bench takes the subcommand 'table1'".to_string());
    }
    args.remove(0);
    let output_dir = take_flag(&mut args, "--output-dir")?
        .ok_or_else(|| "--output-dir is required".to_string())?;
    if !args.is_empty() {
        return Err(format!("unexpected arguments: {}", args.join(" ")));
    }
    let outcome = run_table1_bench(PathBuf::from(&output_dir).as_path()).map_err(|e| e.to_string())?;
    println!("kernel  B   si_iters  nda_iters  speedup  pass");
    for r in &outcome.rows {
        println!(
            "{:<6} {:>3} {:>9} {:>10} {:>8.2}  {}",
            r.kernel, r.b, r.si_iterations, r.nda_iterations, r.speedup_iter, r.pass
        );
    }
    for failure in &outcome.failures {
        eprintln!("failure: {failure}");
    }
    println!("wrote {}", outcome.table_path.display());
    Ok(outcome.all_pass)
}

fn main() -> ExitCode {
    let mut args: Vec<String> = std::env::args().skip(1).collect();
    if args.is_empty() {
        eprintln!("{USAGE}");
        return ExitCode::from(2);
    }
    let command = args.remove(0);
    let result = match command.as_str() {
        "solve" => run_solve(args, false),
        "oracle" => run_solve(args, true),
        "bench" => run_bench(args),
        other => {
            eprintln!("unknown command '{other}'\n{USAGE}");
            return ExitCode::from(2);
        }
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}
