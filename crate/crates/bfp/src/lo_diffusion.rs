//! Low-order diffusion-plus-drift system.
//!
//! The low-order unknowns are the cell-centered scalar fluxes. Each node
//! equation is an edge-current balance
//!
//!   (J_{i+1/2} - J_{i-1/2}) / dx + sigma_r phi_i = Q_i,
//!
//! with interior edge currents carrying a Fickian part and a drift part,
//!
//!   J_{i+1/2} = -D_{i+1/2} (phi_{i+1} - phi_i)/dx
//!             + Dhat_{i+1/2} (phi_i + phi_{i+1})/2,
//!
//! and boundary currents imposed through current-to-flux ratios taken from
//! the high-order solution, J = r * phi at the boundary cells. The drift
//! factors Dhat are defined so that the high-order moments satisfy these
//! equations identically; that consistency is what lets the low-order solve
//! accelerate the transport iteration without changing its fixed point.

use crate::ho_transport::{AngularFlux, CrossSections, SpatialGrid};
use crate::linalg::{thomas_solve, LinalgError};
use crate::quadrature::Quadrature;
use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum LoError {
    /// D = 1/(3(sigma_t - sigma_tilde_{s,1} + sigma_tr)) needs a positive denominator.
    NonPositiveDiffusionDenominator { cell: usize, value: f64 },
    /// Edge-average scalar flux vanished while evaluating a consistency factor.
    ZeroEdgeFlux { edge: usize },
    /// Boundary scalar flux vanished while evaluating a boundary ratio.
    ZeroBoundaryFlux { side: &'static str },
    /// Zero pivot during the tridiagonal elimination.
    Singular { pivot: usize },
    DimensionMismatch { expected: usize, got: usize },
}

impl fmt::Display for LoError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LoError::NonPositiveDiffusionDenominator { cell, value } => {
                write!(f, "diffusion denominator {value} is not positive in cell {cell}")
            }
            LoError::ZeroEdgeFlux { edge } => {
                write!(f, "edge scalar flux vanishes at edge {edge}; consistency factor undefined")
            }
            LoError::ZeroBoundaryFlux { side } => {
                write!(f, "{side} boundary scalar flux vanishes; boundary ratio undefined")
            }
            LoError::Singular { pivot } => {
                write!(f, "low-order system is singular at pivot {pivot}")
            }
            LoError::DimensionMismatch { expected, got } => {
                write!(f, "expected length {expected}, got {got}")
            }
        }
    }
}

impl std::error::Error for LoError {}

impl From<LinalgError> for LoError {
    fn from(e: LinalgError) -> Self {
        match e {
            LinalgError::SingularPivot(p) => LoError::Singular { pivot: p },
            LinalgError::OutOfBand { row, .. } => LoError::Singular { pivot: row },
        }
    }
}

/// One low-order update: coefficients, drift factors, boundary ratios, and
/// the resulting scalar flux.
#[derive(Debug, Clone, PartialEq)]
pub struct LoState {
    pub d_coef: Vec<f64>,
    pub d_hat: Vec<f64>,
    pub r_left: f64,
    pub r_right: f64,
    pub phi0: Vec<f64>,
}

impl LoState {
    /// Close the low-order system against a transport solution (its node
    /// scalar flux, edge currents, and angular flux) and solve it.
    pub fn from_transport(
        grid: &SpatialGrid,
        xs: &CrossSections,
        d_coef: &[f64],
        phi0_ho: &[f64],
        edge_j: &[f64],
        flux: &AngularFlux,
        quad: &Quadrature,
        q: &[f64],
    ) -> Result<Self, LoError> {
        let d_hat = consistency_factors(phi0_ho, edge_j, d_coef, grid.dx())?;
        let (r_left, r_right) = boundary_ratios(flux, quad)?;
        let sys = assemble_lo(grid, xs, d_coef, &d_hat, r_left, r_right, q);
        let phi0 = solve_lo(&sys)?;
        Ok(LoState { d_coef: d_coef.to_vec(), d_hat, r_left, r_right, phi0 })
    }
}

/// Tridiagonal system over the node scalar fluxes.
#[derive(Debug, Clone, PartialEq)]
pub struct TridiagonalSystem {
    pub sub: Vec<f64>,
    pub diag: Vec<f64>,
    pub sup: Vec<f64>,
    pub rhs: Vec<f64>,
}

impl TridiagonalSystem {
    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// Rows where |diag| < |sub| + |sup|. Drift terms can break dominance
    /// mildly; this is reported, not required.
    pub fn diagonal_dominance_violations(&self) -> usize {
        (0..self.len())
            .filter(|&i| {
                let off = if i > 0 { self.sub[i].abs() } else { 0.0 }
                    + if i + 1 < self.len() { self.sup[i].abs() } else { 0.0 };
                self.diag[i].abs() < off
            })
            .count()
    }

    /// Residual A x - rhs, row by row.
    pub fn residual(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.len());
        (0..self.len())
            .map(|i| {
                let mut v = self.diag[i] * x[i] - self.rhs[i];
                if i > 0 {
                    v += self.sub[i] * x[i - 1];
                }
                if i + 1 < self.len() {
                    v += self.sup[i] * x[i + 1];
                }
                v
            })
            .collect()
    }
}

/// Per-cell diffusion coefficient D = 1/(3(sigma_t - sigma_tilde_{s,1} + sigma_tr)),
/// with sigma_tilde_{s,1} taken as zero when fewer than two smooth moments exist.
pub fn diffusion_coefficient(xs: &CrossSections) -> Result<Vec<f64>, LoError> {
    let st1 = xs.bfp().sigma_tilde_at(1);
    let tr = xs.bfp().sigma_tr();
    xs.sigma_t()
        .iter()
        .enumerate()
        .map(|(cell, &sig)| {
            let den = sig - st1 + tr;
            if den > 0.0 {
                Ok(1.0 / (3.0 * den))
            } else {
                Err(LoError::NonPositiveDiffusionDenominator { cell, value: den })
            }
        })
        .collect()
}

/// Consistency (drift) factors at the I+1 edges. Interior edge e carries
///
///   Dhat_e = [ j_e + D_e (phi0_{e} - phi0_{e-1}) / dx ] / ((phi0_{e-1} + phi0_e)/2),
///
/// with D_e the harmonic mean of the adjacent cell diffusion coefficients
/// (current continuity for heterogeneous media; no effect on uniform cases).
/// Boundary entries are zero; boundary physics enters through the ratios.
pub fn consistency_factors(
    phi0: &[f64],
    edge_j: &[f64],
    d: &[f64],
    dx: f64,
) -> Result<Vec<f64>, LoError> {
    let cells = phi0.len();
    if edge_j.len() != cells + 1 {
        return Err(LoError::DimensionMismatch { expected: cells + 1, got: edge_j.len() });
    }
    if d.len() != cells {
        return Err(LoError::DimensionMismatch { expected: cells, got: d.len() });
    }
    let mut dhat = vec![0.0; cells + 1];
    for e in 1..cells {
        let d_edge = 2.0 * d[e - 1] * d[e] / (d[e - 1] + d[e]);
        let avg = 0.5 * (phi0[e - 1] + phi0[e]);
        if avg == 0.0 {
            return Err(LoError::ZeroEdgeFlux { edge: e });
        }
        dhat[e] = (edge_j[e] + d_edge * (phi0[e] - phi0[e - 1]) / dx) / avg;
    }
    Ok(dhat)
}

/// Boundary current-to-flux ratios. The numerator is the edge current of the
/// high-order solution; the denominator is the scalar flux at the adjacent
/// node, matching the zeroth-order extrapolation used when the low-order
/// system imposes J_boundary = r * phi_node. Computing both sides with the
/// same convention is what keeps the consistency fixed point exact.
pub fn boundary_ratios(flux: &AngularFlux, quad: &Quadrature) -> Result<(f64, f64), LoError> {
    let cells = flux.cells();
    let current = |row: &[f64]| -> f64 {
        row.iter()
            .zip(quad.mu().iter().zip(quad.weights()))
            .map(|(psi, (m, w))| w * m * psi)
            .sum()
    };
    let scalar = |row: &[f64]| -> f64 {
        row.iter().zip(quad.weights()).map(|(psi, w)| w * psi).sum()
    };
    let phi_left = scalar(flux.cell_row(0));
    if phi_left == 0.0 {
        return Err(LoError::ZeroBoundaryFlux { side: "left" });
    }
    let phi_right = scalar(flux.cell_row(cells - 1));
    if phi_right == 0.0 {
        return Err(LoError::ZeroBoundaryFlux { side: "right" });
    }
    let r_left = current(flux.edge_row(0)) / phi_left;
    let r_right = current(flux.edge_row(cells)) / phi_right;
    Ok((r_left, r_right))
}

/// Assemble the node equations. The removal term is
/// sigma_t - sigma_tilde_{s,0} - self_scatter, i.e. sigma_t - sigma_{s,0}:
/// both the isotropic smooth source and the same-angle component feed back
/// into the zeroth-moment balance, so only true absorption removes particles.
pub fn assemble_lo(
    grid: &SpatialGrid,
    xs: &CrossSections,
    d: &[f64],
    d_hat: &[f64],
    r_left: f64,
    r_right: f64,
    q: &[f64],
) -> TridiagonalSystem {
    let cells = grid.cells();
    assert_eq!(d.len(), cells);
    assert_eq!(d_hat.len(), cells + 1);
    assert_eq!(q.len(), cells);
    let dx = grid.dx();
    let removal: Vec<f64> = xs
        .sigma_t()
        .iter()
        .map(|&s| s - xs.bfp().sigma_tilde_at(0) - xs.bfp().self_scatter())
        .collect();
    let mut sub = vec![0.0; cells];
    let mut diag = vec![0.0; cells];
    let mut sup = vec![0.0; cells];
    let rhs = q.to_vec();
    for i in 0..cells {
        diag[i] += removal[i];
        if i + 1 < cells {
            // outgoing current through edge i+1
            let d_edge = 2.0 * d[i] * d[i + 1] / (d[i] + d[i + 1]);
            diag[i] += d_edge / (dx * dx) + d_hat[i + 1] / (2.0 * dx);
            sup[i] += -d_edge / (dx * dx) + d_hat[i + 1] / (2.0 * dx);
        } else {
            diag[i] += r_right / dx;
        }
        if i > 0 {
            // incoming current through edge i
            let d_edge = 2.0 * d[i - 1] * d[i] / (d[i - 1] + d[i]);
            diag[i] += d_edge / (dx * dx) - d_hat[i] / (2.0 * dx);
            sub[i] += -d_edge / (dx * dx) - d_hat[i] / (2.0 * dx);
        } else {
            diag[i] += -r_left / dx;
        }
    }
    TridiagonalSystem { sub, diag, sup, rhs }
}

/// Direct tridiagonal elimination. The residual is verified against 1e-12
/// relative to the right-hand side scale.
pub fn solve_lo(sys: &TridiagonalSystem) -> Result<Vec<f64>, LoError> {
    let x = thomas_solve(&sys.sub, &sys.diag, &sys.sup, &sys.rhs)?;
    let res = sys.residual(&x);
    let scale = sys
        .rhs
        .iter()
        .chain(sys.diag.iter())
        .map(|v| v.abs())
        .fold(f64::MIN_POSITIVE, f64::max);
    let worst = res.iter().map(|v| v.abs()).fold(0.0f64, f64::max);
    if worst > 1e-12 * scale.max(x.iter().map(|v| v.abs()).fold(0.0, f64::max)) {
        return Err(LoError::Singular { pivot: 0 });
    }
    Ok(x)
}
