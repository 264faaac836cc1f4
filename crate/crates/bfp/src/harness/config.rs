//! Line-oriented key=value run configuration.
//!
//! The format is deliberately plain: one `key=value` per line, `#` starts a
//! comment, blank lines are ignored. It parses with no dependencies in any
//! language and diffs cleanly under version control.

use crate::kernels::KernelSpec;
use crate::solvers::ProblemSpec;
use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ConfigError {
    /// Malformed line (no `=`, empty key) with its 1-based line number.
    Parse { line: usize, message: String },
    /// A key failed validation; the key name is always included.
    Validation { key: String, message: String },
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Parse { line, message } => write!(f, "line {line}: {message}"),
            ConfigError::Validation { key, message } => write!(f, "key '{key}': {message}"),
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MethodSelector {
    Si,
    Nda,
    Both,
    Oracle,
}

impl fmt::Display for MethodSelector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            MethodSelector::Si => "si",
            MethodSelector::Nda => "nda",
            MethodSelector::Both => "both",
            MethodSelector::Oracle => "oracle",
        };
        write!(f, "{s}")
    }
}

/// A validated run configuration: the problem plus harness switches.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub problem: ProblemSpec,
    pub method: MethodSelector,
    pub label: String,
    pub output_dir: PathBuf,
    pub emit_flux: bool,
    pub emit_history: bool,
}

const KNOWN_KEYS: &[&str] = &[
    "kernel", "sigma_s", "g", "C", "eta", "normalize", "B", "sigma_a", "length_cm", "cells",
    "quad_order", "source_q", "tol", "max_iters", "method", "label", "output_dir", "emit_flux",
    "emit_history",
];

struct Raw<'a> {
    map: BTreeMap<&'a str, (&'a str, usize)>,
}

impl<'a> Raw<'a> {
    fn get(&self, key: &str) -> Option<&'a str> {
        self.map.get(key).map(|(v, _)| *v)
    }

    fn f64_or(&self, key: &str, default: f64) -> Result<f64, ConfigError> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|_| ConfigError::Validation {
                key: key.to_string(),
                message: format!("'{v}' is not a number"),
            }),
        }
    }

    fn usize_or(&self, key: &str, default: usize) -> Result<usize, ConfigError> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|_| ConfigError::Validation {
                key: key.to_string(),
                message: format!("'{v}' is not a nonnegative integer"),
            }),
        }
    }

    fn bool_or(&self, key: &str, default: bool) -> Result<bool, ConfigError> {
        match self.get(key) {
            None => Ok(default),
            Some("true") => Ok(true),
            Some("false") => Ok(false),
            Some(v) => Err(ConfigError::Validation {
                key: key.to_string(),
                message: format!("'{v}' is not 'true' or 'false'"),
            }),
        }
    }

    fn required(&self, key: &str) -> Result<&'a str, ConfigError> {
        self.get(key).ok_or_else(|| ConfigError::Validation {
            key: key.to_string(),
            message: "required key is missing".to_string(),
        })
    }
}

/// Parse and validate a configuration. Unset keys take the benchmark
/// defaults (1 cm slab, 200 cells, N = 16, tol = 1e-6, unit source).
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let mut map = BTreeMap::new();
    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw_line.find('#') {
            Some(pos) => &raw_line[..pos],
            None => raw_line,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or(ConfigError::Parse {
            line: line_no,
            message: format!("expected key=value, got '{line}'"),
        })?;
        let key = key.trim();
        let value = value.trim();
        if key.is_empty() {
            return Err(ConfigError::Parse { line: line_no, message: "empty key".to_string() });
        }
        if !KNOWN_KEYS.contains(&key) {
            return Err(ConfigError::Validation {
                key: key.to_string(),
                message: "unknown key".to_string(),
            });
        }
        map.insert(key, (value, line_no));
    }
    let raw = Raw { map };

    let sigma_s = raw.f64_or("sigma_s", 1.0)?;
    let kernel = match raw.required("kernel")? {
        "hgk" => {
            let g = raw.f64_or("g", f64::NAN)?;
            if g.is_nan() {
                return Err(ConfigError::Validation {
                    key: "g".to_string(),
                    message: "required for kernel=hgk".to_string(),
                });
            }
            KernelSpec::hgk(sigma_s, g).map_err(|e| ConfigError::Validation {
                key: "g".to_string(),
                message: e.to_string(),
            })?
        }
        "srk" => {
            let c = raw.f64_or("C", f64::NAN)?;
            let eta = raw.f64_or("eta", f64::NAN)?;
            if c.is_nan() {
                return Err(ConfigError::Validation {
                    key: "C".to_string(),
                    message: "required for kernel=srk".to_string(),
                });
            }
            if eta.is_nan() {
                return Err(ConfigError::Validation {
                    key: "eta".to_string(),
                    message: "required for kernel=srk".to_string(),
                });
            }
            let normalize = raw.bool_or("normalize", true)?;
            KernelSpec::srk(sigma_s, c, eta, normalize).map_err(|e| ConfigError::Validation {
                key: "eta".to_string(),
                message: e.to_string(),
            })?
        }
        other => {
            return Err(ConfigError::Validation {
                key: "kernel".to_string(),
                message: format!("'{other}' is not 'hgk' or 'srk'"),
            })
        }
    };

    let b_str = raw.required("B")?;
    let smooth_moments: usize = b_str.parse().map_err(|_| ConfigError::Validation {
        key: "B".to_string(),
        message: format!("'{b_str}' is not a positive integer"),
    })?;

    let problem = ProblemSpec {
        length_cm: raw.f64_or("length_cm", 1.0)?,
        cells: raw.usize_or("cells", 200)?,
        quad_order: raw.usize_or("quad_order", 16)?,
        kernel,
        smooth_moments,
        sigma_a: raw.f64_or("sigma_a", 1e-6)?,
        source_q: raw.f64_or("source_q", 1.0)?,
        tol: raw.f64_or("tol", 1e-6)?,
        max_iters: raw.usize_or("max_iters", 10000)?,
    };
    problem.validate().map_err(|e| ConfigError::Validation {
        key: problem_error_key(&e).to_string(),
        message: e.to_string(),
    })?;

    let method = match raw.get("method").unwrap_or("both") {
        "si" => MethodSelector::Si,
        "nda" => MethodSelector::Nda,
        "both" => MethodSelector::Both,
        "oracle" => MethodSelector::Oracle,
        other => {
            return Err(ConfigError::Validation {
                key: "method".to_string(),
                message: format!("'{other}' is not one of si|nda|both|oracle"),
            })
        }
    };

    Ok(RunConfig {
        problem,
        method,
        label: raw.get("label").unwrap_or("case").to_string(),
        output_dir: PathBuf::from(raw.get("output_dir").unwrap_or(".")),
        emit_flux: raw.bool_or("emit_flux", true)?,
        emit_history: raw.bool_or("emit_history", true)?,
    })
}

fn problem_error_key(e: &crate::solvers::SolverError) -> &'static str {
    use crate::solvers::SolverError::*;
    match e {
        InvalidTolerance(_) => "tol",
        InvalidMaxIters(_) => "max_iters",
        NegativeSource(_) => "source_q",
        SmoothCountOutOfRange { .. } => "B",
        Quadrature(_) => "quad_order",
        Grid(_) => "length_cm",
        Kernel(_) => "kernel",
        _ => "config",
    }
}

/// Canonical text form; `parse_config(serialize_config(c))` reproduces `c`.
pub fn serialize_config(cfg: &RunConfig) -> String {
    let mut out = String::new();
    let p = &cfg.problem;
    match &p.kernel {
        KernelSpec::Hgk { sigma_s, g } => {
            out.push_str("kernel=hgk\n");
            out.push_str(&format!("sigma_s={sigma_s}\n"));
            out.push_str(&format!("g={g}\n"));
        }
        KernelSpec::Srk { sigma_s, c, eta, normalize } => {
            out.push_str("kernel=srk\n");
            out.push_str(&format!("sigma_s={sigma_s}\n"));
            out.push_str(&format!("C={c}\n"));
            out.push_str(&format!("eta={eta}\n"));
            out.push_str(&format!("normalize={normalize}\n"));
        }
    }
    out.push_str(&format!("B={}\n", p.smooth_moments));
    out.push_str(&format!("sigma_a={}\n", p.sigma_a));
    out.push_str(&format!("length_cm={}\n", p.length_cm));
    out.push_str(&format!("cells={}\n", p.cells));
    out.push_str(&format!("quad_order={}\n", p.quad_order));
    out.push_str(&format!("source_q={}\n", p.source_q));
    out.push_str(&format!("tol={}\n", p.tol));
    out.push_str(&format!("max_iters={}\n", p.max_iters));
    out.push_str(&format!("method={}\n", cfg.method));
    out.push_str(&format!("label={}\n", cfg.label));
    out.push_str(&format!("output_dir={}\n", cfg.output_dir.display()));
    out.push_str(&format!("emit_flux={}\n", cfg.emit_flux));
    out.push_str(&format!("emit_history={}\n", cfg.emit_history));
    out
}
