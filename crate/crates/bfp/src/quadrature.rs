//! Gauss-Legendre angular quadrature and Legendre polynomial utilities.
//!
//! Direction cosines are stored ascending (most negative first). The
//! Fokker-Planck angular differencing assumes that fixed traversal order,
//! and sweep setup relies on the sign split around mu = 0.

use std::fmt;

/// Errors from quadrature construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum QuadratureError {
    /// Odd orders place a node at mu = 0 where the sweep direction is undefined.
    OddOrder(usize),
    /// At least two directions are required.
    OrderTooSmall(usize),
}

impl fmt::Display for QuadratureError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QuadratureError::OddOrder(n) => {
                write!(f, "quadrature order {n} is odd; a node at mu = 0 has no sweep direction")
            }
            QuadratureError::OrderTooSmall(n) => {
                write!(f, "quadrature order {n} is below the minimum of 2")
            }
        }
    }
}

impl std::error::Error for QuadratureError {}

/// Symmetric Gauss-Legendre quadrature over mu in (-1, 1).
///
/// Invariants (by construction): mu strictly ascending, mu_n = -mu_{N+1-n}
/// and w_n = w_{N+1-n} exactly, sum of weights = 2 to round-off.
#[derive(Debug, Clone, PartialEq)]
pub struct Quadrature {
    mu: Vec<f64>,
    w: Vec<f64>,
}

impl Quadrature {
    /// Build the order-N Gauss-Legendre set. N must be even and >= 2.
    pub fn gauss_legendre(n: usize) -> Result<Self, QuadratureError> {
        if n < 2 {
            return Err(QuadratureError::OrderTooSmall(n));
        }
        if n % 2 != 0 {
            return Err(QuadratureError::OddOrder(n));
        }
        let (mu, w) = legendre_roots_weights(n);
        Ok(Quadrature { mu, w })
    }

    /// Test-support constructor for hand-built direction sets. Callers are
    /// responsible for any symmetry the downstream operator needs.
    #[cfg(test)]
    pub(crate) fn from_raw(mu: Vec<f64>, w: Vec<f64>) -> Self {
        assert_eq!(mu.len(), w.len());
        Quadrature { mu, w }
    }

    pub fn order(&self) -> usize {
        self.mu.len()
    }

    /// Direction cosines, ascending.
    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    /// Quadrature weights, matching `mu` by index.
    pub fn weights(&self) -> &[f64] {
        &self.w
    }

    /// Number of directions with mu > 0.
    pub(crate) fn positive_count(&self) -> usize {
        self.mu.iter().filter(|&&m| m > 0.0).count()
    }
}

/// Evaluate the Legendre polynomial P_l(x) by the Bonnet three-term recurrence.
pub fn legendre_eval(l: usize, x: f64) -> f64 {
    legendre_pair(l, x).0
}

/// Evaluate P_l(x) and its derivative P_l'(x) in one recurrence pass.
///
/// The derivative uses P_l'(x) = l (x P_l - P_{l-1}) / (x^2 - 1) away from
/// the endpoints and the closed forms +-l(l+1)/2 at x = +-1.
pub fn legendre_pair(l: usize, x: f64) -> (f64, f64) {
    if l == 0 {
        return (1.0, 0.0);
    }
    let mut p_prev = 1.0;
    let mut p = x;
    for k in 1..l {
        let kf = k as f64;
        let p_next = ((2.0 * kf + 1.0) * x * p - kf * p_prev) / (kf + 1.0);
        p_prev = p;
        p = p_next;
    }
    let lf = l as f64;
    let dp = if (x - 1.0).abs() < 1e-14 {
        lf * (lf + 1.0) / 2.0
    } else if (x + 1.0).abs() < 1e-14 {
        let sign = if l % 2 == 0 { -1.0 } else { 1.0 };
        sign * lf * (lf + 1.0) / 2.0
    } else {
        lf * (x * p - p_prev) / (x * x - 1.0)
    };
    (p, dp)
}

/// Evaluate P_0..P_lmax at x in a single recurrence pass.
pub(crate) fn legendre_column(l_max: usize, x: f64) -> Vec<f64> {
    let mut out = vec![0.0; l_max + 1];
    out[0] = 1.0;
    if l_max >= 1 {
        out[1] = x;
    }
    for l in 1..l_max {
        let lf = l as f64;
        out[l + 1] = ((2.0 * lf + 1.0) * x * out[l] - lf * out[l - 1]) / (lf + 1.0);
    }
    out
}

/// Nodes and weights of the order-n Gauss-Legendre rule, ascending.
///
/// Newton iteration from the Chebyshev-like guess cos(pi (k - 1/4)/(n + 1/2)),
/// converged to |P_n(mu)| <= 1e-15. Weights use w = 2 / ((1 - mu^2) P_n'(mu)^2).
/// Symmetry is imposed by mirroring the positive half, not left to round-off.
fn legendre_roots_weights(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut mu = vec![0.0; n];
    let mut w = vec![0.0; n];
    for k in 1..=n / 2 {
        let mut x = (std::f64::consts::PI * (k as f64 - 0.25) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_pair(n, x);
            let step = p / dp;
            x -= step;
            if p.abs() <= 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre_pair(n, x);
        let weight = 2.0 / ((1.0 - x * x) * dp * dp);
        // k = 1 is the largest root; mirror onto the negative half.
        mu[n - k] = x;
        mu[k - 1] = -x;
        w[n - k] = weight;
        w[k - 1] = weight;
    }
    if n % 2 == 1 {
        let (_, dp) = legendre_pair(n, 0.0);
        mu[n / 2] = 0.0;
        w[n / 2] = 2.0 / (dp * dp);
    }
    (mu, w)
}

/// Discrete angular moments of a per-direction vector at one spatial location:
/// phi_l = sum_n w_n P_l(mu_n) psi_n for l = 0..=l_max.
pub fn project_moments(psi: &[f64], quad: &Quadrature, l_max: usize) -> Vec<f64> {
    assert_eq!(psi.len(), quad.order(), "psi length must match quadrature order");
    let mut phi = vec![0.0; l_max + 1];
    for (n, &x) in quad.mu.iter().enumerate() {
        let p = legendre_column(l_max, x);
        let wpsi = quad.w[n] * psi[n];
        for l in 0..=l_max {
            phi[l] += p[l] * wpsi;
        }
    }
    phi
}
