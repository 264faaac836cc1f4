//! Discretized high-order BFP operator: diamond difference in space, Morel
//! weighted finite difference for the Fokker-Planck angular operator, vacuum
//! boundaries, and a direct banded solve for a given emission density.
//!
//! Unknowns are the (I+1) x N edge angular fluxes. Each cell balance couples
//! the two bounding edge vectors through the diamond closure
//! psi_cell = (psi_left + psi_right) / 2, and the Fokker-Planck term couples
//! adjacent directions tridiagonally. Because the sweep direction depends on
//! sign(mu) while the angular coupling is implicit, a one-pass ordered sweep
//! cannot solve the system exactly; instead the whole operator is assembled
//! once as a band matrix, factored, and reused for every emission.

use crate::kernels::BfpCoefficients;
use crate::linalg::{BandLu, BandMatrix, LinalgError};
use crate::quadrature::{legendre_column, Quadrature};
use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum GridError {
    NonPositiveLength(f64),
    ZeroCells,
}

impl fmt::Display for GridError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GridError::NonPositiveLength(l) => write!(f, "slab length {l} must be positive"),
            GridError::ZeroCells => write!(f, "grid needs at least one cell"),
        }
    }
}

impl std::error::Error for GridError {}

#[derive(Debug, Clone, PartialEq)]
pub enum HoError {
    /// The assembled operator is singular (degenerate diamond closure is
    /// reported, not silently patched).
    Singular { pivot: usize },
    /// Direct solve failed to reach the residual target even after refinement.
    SolveFailed { residual: f64 },
    /// Total cross-section must be positive in every cell.
    NonPositiveSigmaT { cell: usize },
    /// Emission or inflow vector has the wrong length.
    DimensionMismatch { expected: usize, got: usize },
}

impl fmt::Display for HoError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HoError::Singular { pivot } => {
                write!(f, "high-order operator is singular at pivot {pivot}")
            }
            HoError::SolveFailed { residual } => {
                write!(f, "high-order solve stalled at relative residual {residual:e}")
            }
            HoError::NonPositiveSigmaT { cell } => {
                write!(f, "sigma_t must be positive (cell {cell})")
            }
            HoError::DimensionMismatch { expected, got } => {
                write!(f, "expected a vector of length {expected}, got {got}")
            }
        }
    }
}

impl std::error::Error for HoError {}

impl From<LinalgError> for HoError {
    fn from(e: LinalgError) -> Self {
        match e {
            LinalgError::SingularPivot(p) => HoError::Singular { pivot: p },
            LinalgError::OutOfBand { row, .. } => HoError::Singular { pivot: row },
        }
    }
}

/// Uniform spatial grid: I cells of width dx with cell-centered nodes and
/// I+1 edges.
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialGrid {
    length: f64,
    cells: usize,
    dx: f64,
}

impl SpatialGrid {
    pub fn new(length: f64, cells: usize) -> Result<Self, GridError> {
        if !(length > 0.0) {
            return Err(GridError::NonPositiveLength(length));
        }
        if cells == 0 {
            return Err(GridError::ZeroCells);
        }
        Ok(SpatialGrid { length, cells, dx: length / cells as f64 })
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    /// Cell-center coordinates (the nodes of the low-order system).
    pub fn node_positions(&self) -> Vec<f64> {
        (0..self.cells).map(|i| (i as f64 + 0.5) * self.dx).collect()
    }

    pub fn edge_positions(&self) -> Vec<f64> {
        (0..=self.cells).map(|i| i as f64 * self.dx).collect()
    }
}

/// Per-cell cross-sections plus the kernel decomposition. Construction
/// enforces sigma_t = sigma_a + sigma_{s,0} cell by cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossSections {
    sigma_t: Vec<f64>,
    sigma_a: Vec<f64>,
    bfp: BfpCoefficients,
}

impl CrossSections {
    pub fn new(sigma_a: Vec<f64>, sigma_s0: f64, bfp: BfpCoefficients) -> Result<Self, HoError> {
        let sigma_t: Vec<f64> = sigma_a.iter().map(|a| a + sigma_s0).collect();
        if let Some(cell) = sigma_t.iter().position(|&s| !(s > 0.0)) {
            return Err(HoError::NonPositiveSigmaT { cell });
        }
        Ok(CrossSections { sigma_t, sigma_a, bfp })
    }

    pub fn uniform(
        cells: usize,
        sigma_a: f64,
        sigma_s0: f64,
        bfp: BfpCoefficients,
    ) -> Result<Self, HoError> {
        Self::new(vec![sigma_a; cells], sigma_s0, bfp)
    }

    pub fn sigma_t(&self) -> &[f64] {
        &self.sigma_t
    }

    pub fn sigma_a(&self) -> &[f64] {
        &self.sigma_a
    }

    pub fn bfp(&self) -> &BfpCoefficients {
        &self.bfp
    }
}

/// Morel angular-differencing coefficients gamma_{n+1/2}, n = 0..N.
///
/// gamma_{1/2} = 0 and gamma_{n+1/2} = gamma_{n-1/2} + nu mu_n w_n with
/// nu = -2, mirroring the continuum antiderivative of -2 mu, which is
/// 1 - mu^2. The closing coefficient gamma_{N+1/2} telescopes to
/// nu * sum(mu_n w_n) = 0 on any symmetric set and is stored as exactly zero.
#[derive(Debug, Clone, PartialEq)]
pub struct MorelCoefficients {
    gamma: Vec<f64>,
    nu: f64,
}

impl MorelCoefficients {
    /// gamma_{k+1/2} for k = 0..=N.
    pub fn gamma(&self) -> &[f64] {
        &self.gamma
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }
}

pub fn morel_coefficients(quad: &Quadrature) -> MorelCoefficients {
    let n = quad.order();
    let nu = -2.0;
    let mut gamma = vec![0.0; n + 1];
    for k in 1..n {
        gamma[k] = gamma[k - 1] + nu * quad.mu()[k - 1] * quad.weights()[k - 1];
    }
    gamma[n] = 0.0;
    MorelCoefficients { gamma, nu }
}

/// Tridiagonal rows of the discrete Fokker-Planck operator, including the
/// 1/w_n factor that makes the weighted angular sum telescope to zero.
pub(crate) fn fp_tridiagonal(
    quad: &Quadrature,
    mc: &MorelCoefficients,
) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let n = quad.order();
    let mu = quad.mu();
    let w = quad.weights();
    let g = mc.gamma();
    let mut lo = vec![0.0; n];
    let mut di = vec![0.0; n];
    let mut up = vec![0.0; n];
    for k in 0..n {
        if k + 1 < n {
            let c = g[k + 1] / (w[k] * (mu[k + 1] - mu[k]));
            up[k] = c;
            di[k] -= c;
        }
        if k > 0 {
            let c = g[k] / (w[k] * (mu[k] - mu[k - 1]));
            lo[k] = c;
            di[k] -= c;
        }
    }
    (lo, di, up)
}

/// Apply the discrete angular Laplacian to a per-direction vector at one
/// spatial point: out_n = [gamma_{n+1/2} psidot_{n+1/2}
/// - gamma_{n-1/2} psidot_{n-1/2}] / w_n.
pub fn apply_fp(psi: &[f64], quad: &Quadrature, mc: &MorelCoefficients) -> Vec<f64> {
    let n = quad.order();
    assert_eq!(psi.len(), n, "psi length must match quadrature order");
    let mu = quad.mu();
    let g = mc.gamma();
    // difference form: psidot of a constant vanishes exactly, so constants
    // are in the null space to the bit
    let mut out = vec![0.0; n];
    for k in 0..n {
        let up = if k + 1 < n {
            g[k + 1] * (psi[k + 1] - psi[k]) / (mu[k + 1] - mu[k])
        } else {
            0.0
        };
        let lo = if k > 0 { g[k] * (psi[k] - psi[k - 1]) / (mu[k] - mu[k - 1]) } else { 0.0 };
        out[k] = (up - lo) / quad.weights()[k];
    }
    out
}

/// Cell-average and edge angular fluxes over the space x angle grid.
///
/// The diamond closure cell = (left edge + right edge)/2 holds by
/// construction, and vacuum boundary entries are exact zeros.
#[derive(Debug, Clone, PartialEq)]
pub struct AngularFlux {
    cells: usize,
    angles: usize,
    cell: Vec<f64>,
    edge: Vec<f64>,
}

impl AngularFlux {
    pub fn cells(&self) -> usize {
        self.cells
    }

    pub fn angles(&self) -> usize {
        self.angles
    }

    /// Cell-average fluxes for cell i, one entry per direction.
    pub fn cell_row(&self, i: usize) -> &[f64] {
        &self.cell[i * self.angles..(i + 1) * self.angles]
    }

    /// Edge fluxes for edge e (0 = left face, I = right face).
    pub fn edge_row(&self, e: usize) -> &[f64] {
        &self.edge[e * self.angles..(e + 1) * self.angles]
    }

    /// Flat cell-average storage, index i * angles + n.
    pub fn cell_values(&self) -> &[f64] {
        &self.cell
    }

    pub fn edge_values(&self) -> &[f64] {
        &self.edge
    }

    /// Largest violation of the diamond closure (test support; zero up to
    /// round-off by construction).
    pub fn max_diamond_closure_error(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.cells {
            for n in 0..self.angles {
                let avg = 0.5 * (self.edge_row(i)[n] + self.edge_row(i + 1)[n]);
                let scale = avg.abs().max(1.0);
                worst = worst.max((self.cell_row(i)[n] - avg).abs() / scale);
            }
        }
        worst
    }

    /// Number of negative cell-average entries. Plain diamond difference can
    /// go negative on coarse grids; callers report this rather than fix it up.
    pub fn negative_cell_count(&self) -> usize {
        self.cell.iter().filter(|&&v| v < 0.0).count()
    }
}

/// Per-cell Legendre moments phi_l, stored row-major by l.
#[derive(Debug, Clone, PartialEq)]
pub struct Moments {
    num_l: usize,
    cells: usize,
    data: Vec<f64>,
}

impl Moments {
    pub fn zeros(l_max: usize, cells: usize) -> Self {
        Moments { num_l: l_max + 1, cells, data: vec![0.0; (l_max + 1) * cells] }
    }

    pub fn l_max(&self) -> usize {
        self.num_l - 1
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    pub fn phi(&self, l: usize) -> &[f64] {
        &self.data[l * self.cells..(l + 1) * self.cells]
    }

    pub fn phi_mut(&mut self, l: usize) -> &mut [f64] {
        &mut self.data[l * self.cells..(l + 1) * self.cells]
    }

    /// Copy with row 0 replaced (used by the NDA loop, which feeds the
    /// low-order scalar flux into the scattering source while keeping the
    /// higher moments from the latest transport solve).
    pub fn with_phi0(&self, phi0: &[f64]) -> Self {
        assert_eq!(phi0.len(), self.cells);
        let mut out = self.clone();
        out.phi_mut(0).copy_from_slice(phi0);
        out
    }

    /// View truncated to the first `num_l` rows.
    pub fn truncated(&self, num_l: usize) -> Self {
        assert!(num_l >= 1 && num_l <= self.num_l);
        Moments {
            num_l,
            cells: self.cells,
            data: self.data[..num_l * self.cells].to_vec(),
        }
    }
}

/// Project cell-average fluxes onto Legendre moments, all cells at once.
pub fn project_cell_moments(flux: &AngularFlux, quad: &Quadrature, l_max: usize) -> Moments {
    let mut m = Moments::zeros(l_max, flux.cells());
    for (n, (&x, &w)) in quad.mu().iter().zip(quad.weights()).enumerate() {
        let p = legendre_column(l_max, x);
        for i in 0..flux.cells() {
            let wpsi = w * flux.cell_row(i)[n];
            for l in 0..=l_max {
                m.data[l * flux.cells() + i] += p[l] * wpsi;
            }
        }
    }
    m
}

/// Smooth scattering emission density s_{i,n} = sum_l (2l+1)/2 P_l(mu_n)
/// sigma_tilde_{s,l} phi_{l,i}, summed over the moments supplied (l = 0..B-1).
pub fn scattering_source(moments: &Moments, bfp: &BfpCoefficients, quad: &Quadrature) -> Vec<f64> {
    let n = quad.order();
    let cells = moments.cells();
    let terms = moments.num_l.min(bfp.smooth_count());
    // coef[l][n] = (2l+1)/2 P_l(mu_n) sigma_tilde_l
    let mut coef = vec![vec![0.0; n]; terms];
    for (a, &x) in quad.mu().iter().enumerate() {
        let p = legendre_column(terms.saturating_sub(1), x);
        for l in 0..terms {
            coef[l][a] = (2.0 * l as f64 + 1.0) / 2.0 * p[l] * bfp.sigma_tilde()[l];
        }
    }
    let mut s = vec![0.0; cells * n];
    for l in 0..terms {
        let phi = moments.phi(l);
        let row = &coef[l];
        for i in 0..cells {
            let base = i * n;
            let phil = phi[i];
            for a in 0..n {
                s[base + a] += row[a] * phil;
            }
        }
    }
    s
}

/// First angular moment of the edge flux at every edge:
/// phi_{1,i+1/2} = sum_n w_n mu_n psi_edge.
pub fn edge_current(flux: &AngularFlux, quad: &Quadrature) -> Vec<f64> {
    (0..=flux.cells())
        .map(|e| {
            flux.edge_row(e)
                .iter()
                .zip(quad.mu().iter().zip(quad.weights()))
                .map(|(psi, (m, w))| w * m * psi)
                .sum()
        })
        .collect()
}

/// The assembled and factored high-order operator
/// (streaming + removal - (sigma_tr/2) FP, vacuum boundaries).
pub struct HoOperator {
    grid: SpatialGrid,
    quad: Quadrature,
    matrix: BandMatrix,
    lu: BandLu,
    pos_start: usize,
    nbc_left: usize,
}

/// Assemble the banded high-order system over the edge unknowns and factor it.
///
/// Row layout: one inflow condition per mu > 0 at the left face, then the
/// I x N cell balances, then one inflow condition per mu < 0 at the right
/// face. The factorization is reused across iterations; only the emission
/// changes.
pub fn assemble_ho_operator(
    grid: &SpatialGrid,
    xs: &CrossSections,
    quad: &Quadrature,
    mc: &MorelCoefficients,
) -> Result<HoOperator, HoError> {
    let n = quad.order();
    let cells = grid.cells();
    assert_eq!(xs.sigma_t().len(), cells, "cross-section per cell");
    assert!(
        quad.mu().iter().all(|&m| m != 0.0),
        "directions with mu = 0 have no sweep direction"
    );
    let nbc_left = quad.positive_count();
    let pos_start = n - nbc_left;
    let m_total = (cells + 1) * n;
    let kl = nbc_left + 1;
    let ku = n + 1 - nbc_left;
    let mut band = BandMatrix::zeros(m_total, kl, ku);
    let sigma_tr = xs.bfp().sigma_tr();
    let (fp_lo, fp_di, fp_up) = fp_tridiagonal(quad, mc);
    let dx = grid.dx();
    let mut row = 0;
    for j in 0..nbc_left {
        band.add(row, pos_start + j, 1.0)?;
        row += 1;
    }
    for i in 0..cells {
        let sig = xs.sigma_t()[i];
        for a in 0..n {
            let stream = quad.mu()[a] / dx;
            // removal and the angular-diagonal FP part, split evenly over the
            // two edges by the diamond closure
            let diag = 0.5 * (sig - 0.5 * sigma_tr * fp_di[a]);
            band.add(row, i * n + a, -stream + diag)?;
            band.add(row, (i + 1) * n + a, stream + diag)?;
            if a > 0 {
                let v = 0.5 * (-0.5 * sigma_tr * fp_lo[a]);
                if v != 0.0 {
                    band.add(row, i * n + a - 1, v)?;
                    band.add(row, (i + 1) * n + a - 1, v)?;
                }
            }
            if a + 1 < n {
                let v = 0.5 * (-0.5 * sigma_tr * fp_up[a]);
                if v != 0.0 {
                    band.add(row, i * n + a + 1, v)?;
                    band.add(row, (i + 1) * n + a + 1, v)?;
                }
            }
            row += 1;
        }
    }
    for j in 0..(n - nbc_left) {
        band.add(row, cells * n + j, 1.0)?;
        row += 1;
    }
    debug_assert_eq!(row, m_total);
    let lu = band.clone().factor()?;
    Ok(HoOperator { grid: grid.clone(), quad: quad.clone(), matrix: band, lu, pos_start, nbc_left })
}

impl HoOperator {
    pub fn grid(&self) -> &SpatialGrid {
        &self.grid
    }

    pub fn quadrature(&self) -> &Quadrature {
        &self.quad
    }

    /// Solve for the angular flux given the emission density q_{i,n}
    /// (lagged scattering plus Q/2), with vacuum boundaries.
    ///
    /// The factorization is exact up to round-off; the relative residual is
    /// checked against 1e-12 with one refinement pass before failing.
    pub fn solve(&self, emission: &[f64]) -> Result<AngularFlux, HoError> {
        self.solve_with_inflow(emission, None, None)
    }

    /// Same as `solve` but with prescribed inflow at the slab faces
    /// (per-direction edge values; only inflow directions are used).
    /// Test support for closed-form diamond-difference checks.
    pub(crate) fn solve_with_inflow(
        &self,
        emission: &[f64],
        left_inflow: Option<&[f64]>,
        right_inflow: Option<&[f64]>,
    ) -> Result<AngularFlux, HoError> {
        let n = self.quad.order();
        let cells = self.grid.cells();
        if emission.len() != cells * n {
            return Err(HoError::DimensionMismatch { expected: cells * n, got: emission.len() });
        }
        let m_total = (cells + 1) * n;
        let mut b = vec![0.0; m_total];
        for j in 0..self.nbc_left {
            b[j] = left_inflow.map_or(0.0, |v| v[self.pos_start + j]);
        }
        b[self.nbc_left..self.nbc_left + cells * n].copy_from_slice(emission);
        for j in 0..(n - self.nbc_left) {
            b[self.nbc_left + cells * n + j] = right_inflow.map_or(0.0, |v| v[j]);
        }
        let mut x = b.clone();
        self.lu.solve(&mut x);
        let mut residual = self.relative_residual(&x, &b);
        if residual > 1e-12 {
            // one step of iterative refinement
            let ax = self.matrix.matvec(&x);
            let mut corr: Vec<f64> = ax.iter().zip(&b).map(|(a, bb)| a - bb).collect();
            self.lu.solve(&mut corr);
            for (xi, c) in x.iter_mut().zip(&corr) {
                *xi -= c;
            }
            residual = self.relative_residual(&x, &b);
            if residual > 1e-12 {
                return Err(HoError::SolveFailed { residual });
            }
        }
        // pin prescribed boundary values exactly
        for j in 0..self.nbc_left {
            x[self.pos_start + j] = left_inflow.map_or(0.0, |v| v[self.pos_start + j]);
        }
        for j in 0..(n - self.nbc_left) {
            x[cells * n + j] = right_inflow.map_or(0.0, |v| v[j]);
        }
        let mut cell = vec![0.0; cells * n];
        for i in 0..cells {
            for a in 0..n {
                cell[i * n + a] = 0.5 * (x[i * n + a] + x[(i + 1) * n + a]);
            }
        }
        Ok(AngularFlux { cells, angles: n, cell, edge: x })
    }

    fn relative_residual(&self, x: &[f64], b: &[f64]) -> f64 {
        let ax = self.matrix.matvec(x);
        let rmax = ax
            .iter()
            .zip(b)
            .map(|(a, bb)| (a - bb).abs())
            .fold(0.0f64, f64::max);
        let bmax = b.iter().map(|v| v.abs()).fold(0.0f64, f64::max);
        rmax / bmax.max(f64::MIN_POSITIVE)
    }
}
