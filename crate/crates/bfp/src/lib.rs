//! Slab-geometry Boltzmann-Fokker-Planck (BFP) transport solver.
//!
//! The scattering operator is split into a smooth part, carried as Legendre
//! moments, and a singular forward-peaked part, carried by the Fokker-Planck
//! angular Laplacian plus a same-angle (delta) component. The high-order
//! system is discretized with discrete ordinates in angle (Gauss-Legendre),
//! diamond difference in space, and Morel's weighted finite difference for
//! the Fokker-Planck term. Two iteration drivers are provided: unaccelerated
//! source iteration and a nonlinear diffusion acceleration (NDA) scheme that
//! pairs the transport equation with a drift-corrected diffusion equation
//! closed by discretely defined consistency factors.
//!
//! Modules follow the solver pipeline:
//!
//! * [`quadrature`] - Gauss-Legendre sets, Legendre evaluation, moment projection
//! * [`kernels`] - Henyey-Greenstein / screened Rutherford moments and the
//!   smooth/singular decomposition
//! * [`ho_transport`] - the discretized high-order BFP operator and its direct solve
//! * [`lo_diffusion`] - the low-order diffusion-plus-drift system
//! * [`solvers`] - iteration drivers and a dense reference solve
//! * [`harness`] - config parsing, case runner, benchmark matrix, CSV reports

pub mod harness;
pub mod ho_transport;
pub mod kernels;
pub mod linalg;
pub mod lo_diffusion;
pub mod quadrature;
pub mod solvers;

pub use kernels::{BfpCoefficients, KernelMoments, KernelSpec};
pub use quadrature::Quadrature;
pub use solvers::{Method, ProblemSpec, SolveReport};
