//! Single-case execution: runs the selected method(s) and writes the flux,
//! history, and report files.

use super::config::{serialize_config, ConfigError, MethodSelector, RunConfig};
use crate::ho_transport::SpatialGrid;
use crate::solvers::{dense_reference_solve, nda_solve, source_iteration, SolveReport, SolverError};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, PartialEq)]
pub enum HarnessError {
    Config(ConfigError),
    Solver(SolverError),
    Io { path: PathBuf, message: String },
    /// Flux profiles can only be combined on identical grids.
    GridMismatch { left: usize, right: usize },
}

impl fmt::Display for HarnessError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HarnessError::Config(e) => write!(f, "config: {e}"),
            HarnessError::Solver(e) => write!(f, "solver: {e}"),
            HarnessError::Io { path, message } => {
                write!(f, "io error on {}: {message}", path.display())
            }
            HarnessError::GridMismatch { left, right } => {
                write!(f, "grid mismatch: {left} vs {right} nodes")
            }
        }
    }
}

impl std::error::Error for HarnessError {}

impl From<ConfigError> for HarnessError {
    fn from(e: ConfigError) -> Self {
        HarnessError::Config(e)
    }
}

impl From<SolverError> for HarnessError {
    fn from(e: SolverError) -> Self {
        HarnessError::Solver(e)
    }
}

/// Full precision for flux values: 17 significant digits, '.' decimal.
pub(crate) fn fmt_full(v: f64) -> String {
    format!("{v:.16e}")
}

fn write_text(path: &Path, text: &str) -> Result<(), HarnessError> {
    fs::write(path, text)
        .map_err(|e| HarnessError::Io { path: path.to_path_buf(), message: e.to_string() })
}

/// Results of one case: in-memory reports plus the files written.
#[derive(Debug, Clone, PartialEq)]
pub struct CaseOutcome {
    pub reports: Vec<SolveReport>,
    pub oracle_phi0: Option<Vec<f64>>,
    pub files: Vec<PathBuf>,
    pub all_converged: bool,
}

/// Fig.-2-style overlay: x, both scalar fluxes, and their absolute difference.
pub fn emit_flux_profiles(
    path: &Path,
    x: &[f64],
    phi_si: &[f64],
    phi_nda: &[f64],
) -> Result<(), HarnessError> {
    if phi_si.len() != phi_nda.len() || x.len() != phi_si.len() {
        return Err(HarnessError::GridMismatch { left: phi_si.len(), right: phi_nda.len() });
    }
    let mut out = String::from("x_cm,phi0_si,phi0_nda,abs_diff\n");
    for i in 0..x.len() {
        out.push_str(&format!(
            "{},{},{},{}\n",
            fmt_full(x[i]),
            fmt_full(phi_si[i]),
            fmt_full(phi_nda[i]),
            fmt_full((phi_si[i] - phi_nda[i]).abs())
        ));
    }
    write_text(path, &out)
}

fn write_single_flux(path: &Path, x: &[f64], column: &str, phi: &[f64]) -> Result<(), HarnessError> {
    let mut out = format!("x_cm,{column}\n");
    for (xi, p) in x.iter().zip(phi) {
        out.push_str(&format!("{},{}\n", fmt_full(*xi), fmt_full(*p)));
    }
    write_text(path, &out)
}

fn write_history(path: &Path, report: &SolveReport) -> Result<(), HarnessError> {
    let mut out = String::from("k,epsilon\n");
    for (k, eps) in report.error_history.iter().enumerate() {
        out.push_str(&format!("{},{}\n", k + 1, fmt_full(*eps)));
    }
    write_text(path, &out)
}

fn report_block(report: &SolveReport) -> String {
    format!(
        "method: {}\niterations: {}\nconverged: {}\nwall_seconds: {:.6}\nnegative_flux_cells: {}\n",
        report.method,
        report.iterations,
        report.converged,
        report.wall_seconds,
        report.negative_flux_cells
    )
}

/// Execute the configured method(s), write the requested files, and return
/// the in-memory reports.
pub fn run_case(cfg: &RunConfig) -> Result<CaseOutcome, HarnessError> {
    fs::create_dir_all(&cfg.output_dir)
        .map_err(|e| HarnessError::Io { path: cfg.output_dir.clone(), message: e.to_string() })?;
    let grid = SpatialGrid::new(cfg.problem.length_cm, cfg.problem.cells)
        .map_err(SolverError::Grid)?;
    let x = grid.node_positions();
    let mut reports = Vec::new();
    let mut oracle_phi0 = None;
    match cfg.method {
        MethodSelector::Si => reports.push(source_iteration(&cfg.problem)?),
        MethodSelector::Nda => reports.push(nda_solve(&cfg.problem)?),
        MethodSelector::Both => {
            reports.push(source_iteration(&cfg.problem)?);
            reports.push(nda_solve(&cfg.problem)?);
        }
        MethodSelector::Oracle => oracle_phi0 = Some(dense_reference_solve(&cfg.problem)?),
    }

    let mut files = Vec::new();
    let base = cfg.output_dir.join(&cfg.label);
    if cfg.emit_flux {
        let flux_path = PathBuf::from(format!("{}_flux.csv", base.display()));
        match (&oracle_phi0, reports.len()) {
            (Some(phi), _) => write_single_flux(&flux_path, &x, "phi0_oracle", phi)?,
            (None, 2) => emit_flux_profiles(&flux_path, &x, &reports[0].phi0, &reports[1].phi0)?,
            (None, 1) => {
                let col = format!("phi0_{}", reports[0].method);
                write_single_flux(&flux_path, &x, &col, &reports[0].phi0)?;
            }
            _ => {}
        }
        files.push(flux_path);
    }
    if cfg.emit_history {
        if reports.len() == 1 {
            let path = PathBuf::from(format!("{}_history.csv", base.display()));
            write_history(&path, &reports[0])?;
            files.push(path);
        } else {
            for report in &reports {
                let path =
                    PathBuf::from(format!("{}_{}_history.csv", base.display(), report.method));
                write_history(&path, report)?;
                files.push(path);
            }
        }
    }
    let report_path = PathBuf::from(format!("{}_report", base.display()));
    let mut text = String::new();
    for report in &reports {
        text.push_str(&report_block(report));
        text.push('\n');
    }
    if oracle_phi0.is_some() {
        text.push_str("method: oracle\n\n");
    }
    text.push_str("config:\n");
    for line in serialize_config(cfg).lines() {
        text.push_str("  ");
        text.push_str(line);
        text.push('\n');
    }
    write_text(&report_path, &text)?;
    files.push(report_path);

    let all_converged = reports.iter().all(|r| r.converged);
    Ok(CaseOutcome { reports, oracle_phi0, files, all_converged })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::parse_config;

    fn tiny_case(dir: &Path, extra: &str) -> RunConfig {
        let text = format!(
            "kernel=hgk\ng=0.5\nB=1\ncells=10\nquad_order=4\nlabel=tiny\noutput_dir={}\n{extra}",
            dir.display()
        );
        parse_config(&text).unwrap()
    }

    #[test]
    fn run_case_both_writes_expected_files() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = tiny_case(dir.path(), "");
        let outcome = run_case(&cfg).unwrap();
        assert_eq!(outcome.reports.len(), 2);
        assert!(outcome.all_converged);
        let flux = dir.path().join("tiny_flux.csv");
        let report = dir.path().join("tiny_report");
        assert!(flux.exists() && report.exists());
        assert!(dir.path().join("tiny_si_history.csv").exists());
        assert!(dir.path().join("tiny_nda_history.csv").exists());
        let text = fs::read_to_string(&flux).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "x_cm,phi0_si,phi0_nda,abs_diff");
        assert_eq!(lines.count(), 10);
        let rep = fs::read_to_string(&report).unwrap();
        assert!(rep.contains("method: si"));
        assert!(rep.contains("method: nda"));
        assert!(rep.contains("config:"));
    }

    #[test]
    fn emit_flux_false_skips_flux_csv() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = tiny_case(dir.path(), "emit_flux=false\nmethod=si\n");
        let outcome = run_case(&cfg).unwrap();
        assert!(!dir.path().join("tiny_flux.csv").exists());
        assert!(dir.path().join("tiny_report").exists());
        assert_eq!(outcome.reports.len(), 1);
    }

    #[test]
    fn oracle_flux_matches_si_flux() {
        let dir = tempfile::tempdir().unwrap();
        let cfg_si = tiny_case(dir.path(), "method=si\ntol=1e-12\nlabel=t_si\n");
        let si = run_case(&cfg_si).unwrap();
        let cfg_or = tiny_case(dir.path(), "method=oracle\nlabel=t_or\n");
        let or = run_case(&cfg_or).unwrap();
        let phi_si = &si.reports[0].phi0;
        let phi_or = or.oracle_phi0.as_ref().unwrap();
        for (a, b) in phi_si.iter().zip(phi_or) {
            assert!((a - b).abs() < 1e-8 * b.abs().max(1.0));
        }
        assert!(dir.path().join("t_or_flux.csv").exists());
    }

    #[test]
    fn repeat_runs_are_byte_identical_outside_report() {
        let dir1 = tempfile::tempdir().unwrap();
        let dir2 = tempfile::tempdir().unwrap();
        let out1 = run_case(&tiny_case(dir1.path(), "")).unwrap();
        let out2 = run_case(&tiny_case(dir2.path(), "")).unwrap();
        let _ = (out1, out2);
        for name in ["tiny_flux.csv", "tiny_si_history.csv", "tiny_nda_history.csv"] {
            let a = fs::read(dir1.path().join(name)).unwrap();
            let b = fs::read(dir2.path().join(name)).unwrap();
            assert_eq!(a, b, "{name} differs between runs");
        }
    }

    #[test]
    fn flux_profile_grid_mismatch_errors() {
        let err = emit_flux_profiles(Path::new("/dev/null"), &[0.0], &[1.0], &[1.0, 2.0]);
        assert!(matches!(err, Err(HarnessError::GridMismatch { .. })));
    }
}
