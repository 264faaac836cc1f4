//! Exercises the C ABI exactly as a foreign binding would: parse a config,
//! solve, read scalars, copy arrays out, and free the handles.

use bfp_capi::*;
use std::ffi::{CStr, CString};
use std::ptr;

const CONFIG: &str = "kernel=hgk\ng=0.5\nB=1\ncells=10\nquad_order=4\n";

unsafe fn parse(text: &str) -> *mut BfpProblem {
    let ctext = CString::new(text).unwrap();
    let mut problem: *mut BfpProblem = ptr::null_mut();
    let status = bfp_problem_parse(ctext.as_ptr(), &mut problem);
    assert_eq!(status, BfpStatus::Ok);
    assert!(!problem.is_null());
    problem
}

#[test]
fn solve_roundtrip_through_the_abi() {
    unsafe {
        let problem = parse(CONFIG);
        assert_eq!(bfp_problem_cells(problem), 10);

        let mut report: *mut BfpReport = ptr::null_mut();
        assert_eq!(bfp_solve(problem, BfpMethod::Si, &mut report), BfpStatus::Ok);
        assert!(bfp_report_converged(report));
        let iters = bfp_report_iterations(report);
        assert!(iters > 0 && iters < 100);
        assert_eq!(bfp_report_history_len(report), iters);
        assert!(bfp_report_wall_seconds(report) >= 0.0);

        let nodes = bfp_report_num_nodes(report);
        assert_eq!(nodes, 10);
        let mut flux = vec![0.0f64; nodes];
        assert_eq!(bfp_report_copy_flux(report, flux.as_mut_ptr(), nodes), BfpStatus::Ok);
        assert!(flux.iter().all(|&v| v > 0.0));

        let mut currents = vec![0.0f64; nodes + 1];
        assert_eq!(
            bfp_report_copy_edge_currents(report, currents.as_mut_ptr(), nodes + 1),
            BfpStatus::Ok
        );
        // net leakage out of both faces of a sourced slab
        assert!(currents[0] < 0.0 && currents[nodes] > 0.0);

        let mut history = vec![0.0f64; iters];
        assert_eq!(
            bfp_report_copy_history(report, history.as_mut_ptr(), iters),
            BfpStatus::Ok
        );
        assert!(history.last().unwrap() <= &1e-6);

        // NDA agrees with SI at the fixed point
        let mut nda: *mut BfpReport = ptr::null_mut();
        assert_eq!(bfp_solve(problem, BfpMethod::Nda, &mut nda), BfpStatus::Ok);
        let mut flux_nda = vec![0.0f64; nodes];
        assert_eq!(bfp_report_copy_flux(nda, flux_nda.as_mut_ptr(), nodes), BfpStatus::Ok);
        for (a, b) in flux.iter().zip(&flux_nda) {
            assert!((a - b).abs() < 1e-3 * b.abs());
        }

        bfp_report_free(report);
        bfp_report_free(nda);
        bfp_problem_free(problem);
    }
}

#[test]
fn oracle_flux_through_the_abi() {
    unsafe {
        let problem = parse(CONFIG);
        let cells = bfp_problem_cells(problem);
        let mut flux = vec![0.0f64; cells];
        assert_eq!(bfp_oracle_flux(problem, flux.as_mut_ptr(), cells), BfpStatus::Ok);
        assert!(flux.iter().all(|&v| v > 0.0));
        bfp_problem_free(problem);
    }
}

#[test]
fn error_paths_set_messages() {
    unsafe {
        let mut problem: *mut BfpProblem = ptr::null_mut();

        // null argument
        assert_eq!(bfp_problem_parse(ptr::null(), &mut problem), BfpStatus::NullArgument);

        // invalid configuration names the offending key
        let bad = CString::new("kernel=hgk\ng=2.0\nB=1\n").unwrap();
        assert_eq!(bfp_problem_parse(bad.as_ptr(), &mut problem), BfpStatus::ConfigError);
        let msg = bfp_last_error_message();
        assert!(!msg.is_null());
        let text = CStr::from_ptr(msg).to_string_lossy();
        assert!(text.contains('g'), "message was: {text}");

        // undersized buffer
        let problem = parse(CONFIG);
        let mut too_small = vec![0.0f64; 3];
        assert_eq!(
            bfp_oracle_flux(problem, too_small.as_mut_ptr(), 3),
            BfpStatus::BufferTooSmall
        );

        // null handles are inert
        assert_eq!(bfp_report_iterations(ptr::null()), 0);
        assert!(!bfp_report_converged(ptr::null()));
        bfp_report_free(ptr::null_mut());
        bfp_problem_free(ptr::null_mut());
        bfp_problem_free(problem);
    }
}

#[test]
fn generated_header_exposes_the_surface() {
    let header = std::fs::read_to_string(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/include/bfp.h"
    ))
    .expect("header generated by the build script");
    for symbol in [
        "bfp_problem_parse",
        "bfp_problem_free",
        "bfp_problem_cells",
        "bfp_solve",
        "bfp_oracle_flux",
        "bfp_report_free",
        "bfp_report_iterations",
        "bfp_report_converged",
        "bfp_report_wall_seconds",
        "bfp_report_num_nodes",
        "bfp_report_history_len",
        "bfp_report_copy_flux",
        "bfp_report_copy_edge_currents",
        "bfp_report_copy_history",
        "bfp_last_error_message",
        "BFP_STATUS_BUFFER_TOO_SMALL",
        "BFP_METHOD_NDA",
    ] {
        assert!(header.contains(symbol), "header is missing {symbol}");
    }
}
