//! Iteration drivers: unaccelerated source iteration, the NDA Picard loop,
//! the shared convergence metric, and a dense reference solve.
//!
//! Both drivers iterate on the same operator split. The high-order solve
//! treats streaming, removal, and the Fokker-Planck term implicitly; the
//! lagged emission carries the smooth scattering sum, the same-angle
//! component delta * psi, and the fixed source Q/2. Source iteration feeds
//! every lagged quantity from its own previous iterate; the NDA loop feeds
//! the scalar-flux moment from a low-order drift-diffusion solve that is
//! made discretely consistent with the latest transport solution.
//!
//! The kernel decomposition the drivers use is pinned at order
//! [`DECOMPOSITION_ORDER`]; the problem's smooth-moment count B chooses how
//! many of the smooth moments enter the lagged sum.

use crate::ho_transport::{
    assemble_ho_operator, edge_current, fp_tridiagonal, morel_coefficients, project_cell_moments,
    AngularFlux, CrossSections, GridError, HoError, HoOperator, Moments, SpatialGrid,
};
use crate::kernels::{bfp_decompose, KernelError, KernelSpec};
use crate::lo_diffusion::{diffusion_coefficient, LoError, LoState};
use crate::quadrature::{legendre_column, Quadrature, QuadratureError};
use std::fmt;
use std::time::Instant;

/// Expansion order L of the smooth/singular decomposition used by the
/// drivers. Kernel moments are generated through l = L and the smooth-moment
/// count B of a problem may range from 1 to L - 1.
pub const DECOMPOSITION_ORDER: usize = 15;

#[derive(Debug, Clone, PartialEq)]
pub enum SolverError {
    Quadrature(QuadratureError),
    Kernel(KernelError),
    Grid(GridError),
    Ho(HoError),
    Lo(LoError),
    InvalidTolerance(f64),
    InvalidMaxIters(usize),
    NegativeSource(f64),
    SmoothCountOutOfRange { b: usize, max: usize },
    /// The dense reference solve is restricted to small problems.
    OracleTooLarge { unknowns: usize, limit: usize },
    OracleSingular,
}

impl fmt::Display for SolverError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SolverError::Quadrature(e) => write!(f, "{e}"),
            SolverError::Kernel(e) => write!(f, "{e}"),
            SolverError::Grid(e) => write!(f, "{e}"),
            SolverError::Ho(e) => write!(f, "{e}"),
            SolverError::Lo(e) => write!(f, "{e}"),
            SolverError::InvalidTolerance(t) => write!(f, "tolerance {t} must be positive"),
            SolverError::InvalidMaxIters(m) => write!(f, "max_iters {m} must be at least 1"),
            SolverError::NegativeSource(q) => write!(f, "source strength {q} must be nonnegative"),
            SolverError::SmoothCountOutOfRange { b, max } => {
                write!(f, "smooth-moment count B = {b} must lie in 1..={max}")
            }
            SolverError::OracleTooLarge { unknowns, limit } => {
                write!(f, "dense reference solve limited to {limit} unknowns, got {unknowns}")
            }
            SolverError::OracleSingular => write!(f, "dense reference system is singular"),
        }
    }
}

impl std::error::Error for SolverError {}

impl From<QuadratureError> for SolverError {
    fn from(e: QuadratureError) -> Self {
        SolverError::Quadrature(e)
    }
}
impl From<KernelError> for SolverError {
    fn from(e: KernelError) -> Self {
        SolverError::Kernel(e)
    }
}
impl From<GridError> for SolverError {
    fn from(e: GridError) -> Self {
        SolverError::Grid(e)
    }
}
impl From<HoError> for SolverError {
    fn from(e: HoError) -> Self {
        SolverError::Ho(e)
    }
}
impl From<LoError> for SolverError {
    fn from(e: LoError) -> Self {
        SolverError::Lo(e)
    }
}

/// Complete description of one solve. Boundaries are vacuum on both faces.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    pub length_cm: f64,
    pub cells: usize,
    pub quad_order: usize,
    pub kernel: KernelSpec,
    /// Number of smooth moments B kept in the lagged scattering sum.
    pub smooth_moments: usize,
    pub sigma_a: f64,
    /// Isotropic source magnitude Q (enters the transport equation as Q/2).
    pub source_q: f64,
    pub tol: f64,
    pub max_iters: usize,
}

impl ProblemSpec {
    pub fn validate(&self) -> Result<(), SolverError> {
        if !(self.tol > 0.0) {
            return Err(SolverError::InvalidTolerance(self.tol));
        }
        if self.max_iters == 0 {
            return Err(SolverError::InvalidMaxIters(0));
        }
        if self.source_q < 0.0 {
            return Err(SolverError::NegativeSource(self.source_q));
        }
        let max_b = DECOMPOSITION_ORDER - 1;
        if self.smooth_moments == 0 || self.smooth_moments > max_b {
            return Err(SolverError::SmoothCountOutOfRange {
                b: self.smooth_moments,
                max: max_b,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Si,
    Nda,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::Si => write!(f, "si"),
            Method::Nda => write!(f, "nda"),
        }
    }
}

/// Per-run record of an iterative solve.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub method: Method,
    pub iterations: usize,
    pub converged: bool,
    pub error_history: Vec<f64>,
    pub wall_seconds: f64,
    /// Converged scalar flux per node (cell center).
    pub phi0: Vec<f64>,
    /// First angular moment of the final flux at the I+1 edges.
    pub edge_currents: Vec<f64>,
    /// Negative cell-average entries in the final angular flux (reported,
    /// never repaired).
    pub negative_flux_cells: usize,
}

/// epsilon = (1 / sqrt(I)) * ||a - b||_2.
pub fn convergence_error(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len(), "convergence metric needs equal lengths");
    let ss: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    (ss / a.len() as f64).sqrt()
}

/// Everything the iteration loops need, built once per problem.
struct Setup {
    grid: SpatialGrid,
    quad: Quadrature,
    xs: CrossSections,
    ho: HoOperator,
}

fn prepare(p: &ProblemSpec) -> Result<Setup, SolverError> {
    p.validate()?;
    let grid = SpatialGrid::new(p.length_cm, p.cells)?;
    let quad = Quadrature::gauss_legendre(p.quad_order)?;
    let moments = p.kernel.moments(DECOMPOSITION_ORDER)?;
    let bfp = bfp_decompose(&moments, DECOMPOSITION_ORDER - 1)?;
    let xs = CrossSections::uniform(p.cells, p.sigma_a, moments.values()[0], bfp)?;
    let mc = morel_coefficients(&quad);
    let ho = assemble_ho_operator(&grid, &xs, &quad, &mc)?;
    Ok(Setup { grid, quad, xs, ho })
}

/// Emission density for one transport solve: lagged smooth scattering plus
/// the same-angle component plus the fixed source.
fn build_emission(
    setup: &Setup,
    source_moments: &Moments,
    psi_cell: &[f64],
    q_half: f64,
) -> Vec<f64> {
    let bfp = setup.xs.bfp();
    let mut e = crate::ho_transport::scattering_source(source_moments, bfp, &setup.quad);
    let delta = bfp.self_scatter();
    for (ei, psi) in e.iter_mut().zip(psi_cell) {
        *ei += q_half + delta * psi;
    }
    e
}

/// Unaccelerated source iteration: every lagged quantity comes from the
/// previous transport iterate; convergence is the successive-iterate metric
/// on the scalar flux.
pub fn source_iteration(p: &ProblemSpec) -> Result<SolveReport, SolverError> {
    let setup = prepare(p)?;
    let cells = p.cells;
    let n = setup.quad.order();
    let l_max = p.smooth_moments - 1;
    let q_half = p.source_q / 2.0;
    let mut moments = Moments::zeros(l_max, cells);
    let mut psi_cell = vec![0.0; cells * n];
    let mut history = Vec::new();
    let mut converged = false;
    let mut flux: Option<AngularFlux> = None;
    let start = Instant::now();
    for _ in 0..p.max_iters {
        let emission = build_emission(&setup, &moments, &psi_cell, q_half);
        let f = setup.ho.solve(&emission)?;
        let fresh = project_cell_moments(&f, &setup.quad, l_max);
        let eps = convergence_error(fresh.phi(0), moments.phi(0));
        history.push(eps);
        psi_cell.copy_from_slice(f.cell_values());
        moments = fresh;
        flux = Some(f);
        if eps <= p.tol {
            converged = true;
            break;
        }
    }
    let wall_seconds = start.elapsed().as_secs_f64();
    let flux = flux.expect("max_iters >= 1 guarantees one solve");
    Ok(SolveReport {
        method: Method::Si,
        iterations: history.len(),
        converged,
        error_history: history,
        wall_seconds,
        phi0: moments.phi(0).to_vec(),
        edge_currents: edge_current(&flux, &setup.quad),
        negative_flux_cells: flux.negative_cell_count(),
    })
}

/// NDA Picard loop. Each pass solves the transport system with the scalar
/// flux lagged from the low-order solve (higher moments and the same-angle
/// term come from the latest transport solution), tests convergence of the
/// transport scalar flux against the low-order one, and if needed rebuilds
/// the consistency factors and boundary ratios from the fresh solution and
/// solves the low-order system. The first iteration is the zero-scattering
/// transport solve that seeds the low-order flux.
pub fn nda_solve(p: &ProblemSpec) -> Result<SolveReport, SolverError> {
    let setup = prepare(p)?;
    let cells = p.cells;
    let l_max = p.smooth_moments - 1;
    let q_half = p.source_q / 2.0;
    let q_nodes = vec![p.source_q; cells];
    let d = diffusion_coefficient(&setup.xs)?;
    let start = Instant::now();
    let n = setup.quad.order();
    let mut flux = setup.ho.solve(&vec![q_half; cells * n])?;
    let mut moments_ho = project_cell_moments(&flux, &setup.quad, l_max);
    let mut phi_lo = moments_ho.phi(0).to_vec();
    let mut history = vec![convergence_error(&phi_lo, &vec![0.0; cells])];
    let mut converged = history[0] <= p.tol;
    while !converged && history.len() < p.max_iters {
        let source_moments = moments_ho.with_phi0(&phi_lo);
        let emission = build_emission(&setup, &source_moments, flux.cell_values(), q_half);
        flux = setup.ho.solve(&emission)?;
        let fresh = project_cell_moments(&flux, &setup.quad, l_max);
        let eps = convergence_error(fresh.phi(0), &phi_lo);
        history.push(eps);
        moments_ho = fresh;
        if eps <= p.tol {
            converged = true;
            break;
        }
        let j = edge_current(&flux, &setup.quad);
        let lo = LoState::from_transport(
            &setup.grid,
            &setup.xs,
            &d,
            moments_ho.phi(0),
            &j,
            &flux,
            &setup.quad,
            &q_nodes,
        )?;
        phi_lo = lo.phi0;
    }
    let wall_seconds = start.elapsed().as_secs_f64();
    Ok(SolveReport {
        method: Method::Nda,
        iterations: history.len(),
        converged,
        error_history: history,
        wall_seconds,
        phi0: moments_ho.phi(0).to_vec(),
        edge_currents: edge_current(&flux, &setup.quad),
        negative_flux_cells: flux.negative_cell_count(),
    })
}

/// Dense reference solve: assembles the complete discrete system with the
/// scattering fully implicit (smooth sum, same-angle component, and
/// Fokker-Planck term) and solves it directly. No iteration is involved, so
/// the result is an independent oracle for the iterative drivers.
pub fn dense_reference_solve(p: &ProblemSpec) -> Result<Vec<f64>, SolverError> {
    p.validate()?;
    const LIMIT: usize = 5000;
    let unknowns = p.cells * p.quad_order;
    if unknowns > LIMIT {
        return Err(SolverError::OracleTooLarge { unknowns, limit: LIMIT });
    }
    let grid = SpatialGrid::new(p.length_cm, p.cells)?;
    let quad = Quadrature::gauss_legendre(p.quad_order)?;
    let kernel_moments = p.kernel.moments(DECOMPOSITION_ORDER)?;
    let bfp = bfp_decompose(&kernel_moments, DECOMPOSITION_ORDER - 1)?;
    let xs = CrossSections::uniform(p.cells, p.sigma_a, kernel_moments.values()[0], bfp)?;
    let mc = morel_coefficients(&quad);
    let (fp_lo, fp_di, fp_up) = fp_tridiagonal(&quad, &mc);

    let n = quad.order();
    let cells = p.cells;
    let m_total = (cells + 1) * n;
    let dx = grid.dx();
    let sigma_tr = xs.bfp().sigma_tr();
    let delta = xs.bfp().self_scatter();
    let b = p.smooth_moments;

    // smooth-scattering block: s[n][m] = sum_{l<B} (2l+1)/2 sigma_tilde_l
    // P_l(mu_n) P_l(mu_m) w_m
    let p_table: Vec<Vec<f64>> =
        quad.mu().iter().map(|&x| legendre_column(b - 1, x)).collect();
    let mut smooth = vec![vec![0.0; n]; n];
    for a in 0..n {
        for m in 0..n {
            let mut s = 0.0;
            for l in 0..b {
                s += (2.0 * l as f64 + 1.0) / 2.0
                    * xs.bfp().sigma_tilde()[l]
                    * p_table[a][l]
                    * p_table[m][l];
            }
            smooth[a][m] = s * quad.weights()[m];
        }
    }

    let mut a_mat = nalgebra::DMatrix::<f64>::zeros(m_total, m_total);
    let mut rhs = nalgebra::DVector::<f64>::zeros(m_total);
    let pos_start = n - quad.mu().iter().filter(|&&m| m > 0.0).count();
    let mut row = 0;
    for a in pos_start..n {
        a_mat[(row, a)] = 1.0;
        row += 1;
    }
    for i in 0..cells {
        let sig = xs.sigma_t()[i];
        for a in 0..n {
            let stream = quad.mu()[a] / dx;
            for (side, col_base) in [(-1.0, i * n), (1.0, (i + 1) * n)] {
                a_mat[(row, col_base + a)] +=
                    side * stream + 0.5 * (sig - 0.5 * sigma_tr * fp_di[a] - delta);
                if a > 0 {
                    a_mat[(row, col_base + a - 1)] += 0.5 * (-0.5 * sigma_tr * fp_lo[a]);
                }
                if a + 1 < n {
                    a_mat[(row, col_base + a + 1)] += 0.5 * (-0.5 * sigma_tr * fp_up[a]);
                }
                for m in 0..n {
                    a_mat[(row, col_base + m)] -= 0.5 * smooth[a][m];
                }
            }
            rhs[row] = p.source_q / 2.0;
            row += 1;
        }
    }
    for a in 0..pos_start {
        a_mat[(row, cells * n + a)] = 1.0;
        row += 1;
    }
    debug_assert_eq!(row, m_total);

    let x = a_mat.lu().solve(&rhs).ok_or(SolverError::OracleSingular)?;
    let phi0 = (0..cells)
        .map(|i| {
            (0..n)
                .map(|a| quad.weights()[a] * 0.5 * (x[i * n + a] + x[(i + 1) * n + a]))
                .sum()
        })
        .collect();
    Ok(phi0)
}
