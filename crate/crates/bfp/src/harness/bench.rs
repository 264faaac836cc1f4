//! The 8-case benchmark matrix: two kernels times four smooth-moment counts,
//! each solved with source iteration and NDA, with iteration counts checked
//! against the reference bands.

use super::runner::{fmt_full, HarnessError};
use crate::kernels::KernelSpec;
use crate::solvers::{nda_solve, source_iteration, ProblemSpec};
use std::fs;
use std::path::{Path, PathBuf};

/// Reference iteration counts the bands are centered on (+-40%).
pub const HGK_SI_REFERENCE: [usize; 4] = [26, 35, 36, 36];
pub const HGK_NDA_REFERENCE: [usize; 4] = [12, 18, 18, 18];
pub const SRK_SI_REFERENCE: [usize; 4] = [2655, 2739, 2739, 2739];
pub const SRK_NDA_REFERENCE: [usize; 4] = [351, 318, 318, 314];
pub const SMOOTH_COUNTS: [usize; 4] = [1, 5, 9, 13];

pub fn in_band(count: usize, reference: usize) -> bool {
    let lo = 0.6 * reference as f64;
    let hi = 1.4 * reference as f64;
    let c = count as f64;
    c >= lo && c <= hi
}

/// The default benchmark problem for one kernel and smooth-moment count.
pub fn benchmark_problem(kernel: KernelSpec, b: usize) -> ProblemSpec {
    ProblemSpec {
        length_cm: 1.0,
        cells: 200,
        quad_order: 16,
        kernel,
        smooth_moments: b,
        sigma_a: 1e-6,
        source_q: 1.0,
        tol: 1e-6,
        max_iters: 10000,
    }
}

pub fn hgk_benchmark_kernel() -> KernelSpec {
    KernelSpec::hgk(1.0, 0.9).expect("valid benchmark kernel")
}

pub fn srk_benchmark_kernel() -> KernelSpec {
    KernelSpec::srk(1.0, 0.3903, 2.836e-5, true).expect("valid benchmark kernel")
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub kernel: &'static str,
    pub parameter: &'static str,
    pub b: usize,
    pub si_iterations: usize,
    pub si_runtime_s: f64,
    pub nda_iterations: usize,
    pub nda_runtime_s: f64,
    pub speedup_iter: f64,
    pub speedup_time: f64,
    pub si_reference: usize,
    pub nda_reference: usize,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchOutcome {
    pub rows: Vec<BenchRow>,
    pub failures: Vec<String>,
    pub all_pass: bool,
    pub table_path: PathBuf,
}

/// Run the full matrix and write `table1.csv` (plus a failure summary when a
/// case errors out). Runtime columns are informational only; the pass column
/// gates on the iteration-count bands.
pub fn run_table1_bench(output_dir: &Path) -> Result<BenchOutcome, HarnessError> {
    fs::create_dir_all(output_dir)
        .map_err(|e| HarnessError::Io { path: output_dir.to_path_buf(), message: e.to_string() })?;
    let cases = [
        ("hgk", "g=0.9", hgk_benchmark_kernel(), HGK_SI_REFERENCE, HGK_NDA_REFERENCE),
        (
            "srk",
            "C=0.3903 eta=2.836e-5",
            srk_benchmark_kernel(),
            SRK_SI_REFERENCE,
            SRK_NDA_REFERENCE,
        ),
    ];
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for (kernel_name, parameter, kernel, si_ref, nda_ref) in cases {
        for (slot, &b) in SMOOTH_COUNTS.iter().enumerate() {
            let problem = benchmark_problem(kernel.clone(), b);
            let si = match source_iteration(&problem) {
                Ok(r) => r,
                Err(e) => {
                    failures.push(format!("{kernel_name} B={b} si: {e}"));
                    continue;
                }
            };
            let nda = match nda_solve(&problem) {
                Ok(r) => r,
                Err(e) => {
                    failures.push(format!("{kernel_name} B={b} nda: {e}"));
                    continue;
                }
            };
            if !si.converged {
                failures.push(format!("{kernel_name} B={b} si: not converged"));
            }
            if !nda.converged {
                failures.push(format!("{kernel_name} B={b} nda: not converged"));
            }
            let pass = si.converged
                && nda.converged
                && in_band(si.iterations, si_ref[slot])
                && in_band(nda.iterations, nda_ref[slot]);
            rows.push(BenchRow {
                kernel: kernel_name,
                parameter,
                b,
                si_iterations: si.iterations,
                si_runtime_s: si.wall_seconds,
                nda_iterations: nda.iterations,
                nda_runtime_s: nda.wall_seconds,
                speedup_iter: si.iterations as f64 / nda.iterations as f64,
                speedup_time: si.wall_seconds / nda.wall_seconds.max(f64::MIN_POSITIVE),
                si_reference: si_ref[slot],
                nda_reference: nda_ref[slot],
                pass,
            });
        }
    }

    let table_path = output_dir.join("table1.csv");
    let mut csv = String::from(
        "kernel,parameter,B,si_iterations,si_runtime_s,nda_iterations,nda_runtime_s,speedup_iter,speedup_time,pass\n",
    );
    for r in &rows {
        csv.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            r.kernel,
            r.parameter,
            r.b,
            r.si_iterations,
            fmt_full(r.si_runtime_s),
            r.nda_iterations,
            fmt_full(r.nda_runtime_s),
            fmt_full(r.speedup_iter),
            fmt_full(r.speedup_time),
            r.pass
        ));
    }
    fs::write(&table_path, &csv)
        .map_err(|e| HarnessError::Io { path: table_path.clone(), message: e.to_string() })?;
    if !failures.is_empty() {
        let summary_path = output_dir.join("table1_failures.txt");
        fs::write(&summary_path, failures.join("\n") + "\n")
            .map_err(|e| HarnessError::Io { path: summary_path, message: e.to_string() })?;
    }
    let all_pass = failures.is_empty() && rows.iter().all(|r| r.pass);
    Ok(BenchOutcome { rows, failures, all_pass, table_path })
}
