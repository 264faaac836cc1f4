//! Scattering-kernel moment generation and the smooth/singular decomposition.
//!
//! Two kernels are supported: Henyey-Greenstein, whose Legendre moments are
//! sigma_s * g^l, and the screened Rutherford kernel, whose moments are
//! integrals of P_l against C / (1 + 2 eta - mu)^2. The decomposition splits
//! a moment sequence of expansion order L into
//!
//! * smooth transport-corrected moments sigma_tilde_{s,l}, l = 0..L-2,
//! * a Fokker-Planck transfer cross-section sigma_tr, and
//! * a same-angle (delta) component sigma_{s,L} + (sigma_tr/2) L(L+1),
//!
//! chosen so the three parts reproduce the original moments exactly for
//! l <= L-2 and vanish at l = L-1 and l = L.

use crate::quadrature::{legendre_column, Quadrature};
use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum KernelError {
    /// HGK anisotropy factor outside [0, 1).
    InvalidAnisotropy(f64),
    /// Negative macroscopic scattering cross-section.
    InvalidScattering(f64),
    /// SRK screening parameter must be positive.
    InvalidScreening(f64),
    /// SRK kernel constant must be positive.
    InvalidKernelConstant(f64),
    /// The panel quadrature failed to meet its internal error target,
    /// which signals a screening parameter too extreme for the scheme.
    IntegrationFailure { estimate: f64 },
    /// bfp_decompose needs moments through l = B + 1.
    InsufficientMoments { needed: usize, available: usize },
    /// The smooth-moment count B must be at least 1.
    InvalidSmoothCount(usize),
}

impl fmt::Display for KernelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KernelError::InvalidAnisotropy(g) => {
                write!(f, "HGK anisotropy factor g = {g} must lie in [0, 1)")
            }
            KernelError::InvalidScattering(s) => {
                write!(f, "scattering cross-section {s} must be nonnegative")
            }
            KernelError::InvalidScreening(e) => {
                write!(f, "SRK screening parameter eta = {e} must be positive")
            }
            KernelError::InvalidKernelConstant(c) => {
                write!(f, "SRK kernel constant C = {c} must be positive")
            }
            KernelError::IntegrationFailure { estimate } => {
                write!(f, "SRK moment integration error estimate {estimate:e} exceeds 1e-8")
            }
            KernelError::InsufficientMoments { needed, available } => {
                write!(f, "decomposition needs moments through l = {needed} but only {available} are available")
            }
            KernelError::InvalidSmoothCount(b) => {
                write!(f, "smooth-moment count B = {b} must be at least 1")
            }
        }
    }
}

impl std::error::Error for KernelError {}

/// A scattering kernel and its parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum KernelSpec {
    /// Henyey-Greenstein: moments sigma_s * g^l.
    Hgk { sigma_s: f64, g: f64 },
    /// Screened Rutherford: moments sigma_s * int P_l(mu) C/(1+2eta-mu)^2 dmu.
    /// With `normalize` the vector is rescaled so sigma_{s,0} = sigma_s exactly.
    Srk { sigma_s: f64, c: f64, eta: f64, normalize: bool },
}

impl KernelSpec {
    pub fn hgk(sigma_s: f64, g: f64) -> Result<Self, KernelError> {
        if sigma_s < 0.0 || !sigma_s.is_finite() {
            return Err(KernelError::InvalidScattering(sigma_s));
        }
        if !(0.0..1.0).contains(&g) {
            return Err(KernelError::InvalidAnisotropy(g));
        }
        Ok(KernelSpec::Hgk { sigma_s, g })
    }

    pub fn srk(sigma_s: f64, c: f64, eta: f64, normalize: bool) -> Result<Self, KernelError> {
        if sigma_s < 0.0 || !sigma_s.is_finite() {
            return Err(KernelError::InvalidScattering(sigma_s));
        }
        if !(c > 0.0) || !c.is_finite() {
            return Err(KernelError::InvalidKernelConstant(c));
        }
        if !(eta > 0.0) || !eta.is_finite() {
            return Err(KernelError::InvalidScreening(eta));
        }
        Ok(KernelSpec::Srk { sigma_s, c, eta, normalize })
    }

    /// Legendre moments sigma_{s,l} for l = 0..=l_max.
    pub fn moments(&self, l_max: usize) -> Result<KernelMoments, KernelError> {
        match *self {
            KernelSpec::Hgk { sigma_s, g } => Ok(hgk_moments(sigma_s, g, l_max)),
            KernelSpec::Srk { sigma_s, c, eta, normalize } => {
                srk_moments(sigma_s, c, eta, normalize, l_max)
            }
        }
    }

    pub fn sigma_s(&self) -> f64 {
        match *self {
            KernelSpec::Hgk { sigma_s, .. } => sigma_s,
            KernelSpec::Srk { sigma_s, .. } => sigma_s,
        }
    }
}

/// Legendre scattering moments sigma_{s,l}, index = l.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelMoments {
    sigma_s_l: Vec<f64>,
}

impl KernelMoments {
    pub fn values(&self) -> &[f64] {
        &self.sigma_s_l
    }

    pub fn l_max(&self) -> usize {
        self.sigma_s_l.len() - 1
    }

    #[cfg(test)]
    pub(crate) fn from_raw_for_tests(sigma_s_l: Vec<f64>) -> Self {
        KernelMoments { sigma_s_l }
    }
}

/// Henyey-Greenstein moments sigma_{s,l} = sigma_s * g^l (0^0 = 1).
pub fn hgk_moments(sigma_s: f64, g: f64, l_max: usize) -> KernelMoments {
    let sigma_s_l = (0..=l_max).map(|l| sigma_s * g.powi(l as i32)).collect();
    KernelMoments { sigma_s_l }
}

/// Screened Rutherford moments by panel quadrature.
///
/// With t = 1 + 2 eta - mu the integral becomes
/// int_{2 eta}^{2 + 2 eta} P_l(1 + 2 eta - t) C / t^2 dt, whose integrand
/// varies on the scale of t itself near the forward peak. Panels graded
/// geometrically from t = 2 eta (boundaries 2 eta * 4^k) keep a fixed-order
/// Gauss rule accurate on every panel; a doubled rule supplies the error
/// estimate.
pub fn srk_moments(
    sigma_s: f64,
    c: f64,
    eta: f64,
    normalize: bool,
    l_max: usize,
) -> Result<KernelMoments, KernelError> {
    let t_lo = 2.0 * eta;
    let t_hi = 2.0 + 2.0 * eta;
    let mut boundaries = vec![t_lo];
    let mut t = t_lo;
    while t < t_hi {
        t *= 4.0;
        boundaries.push(t.min(t_hi));
    }
    let base = panel_rule(24);
    let fine = panel_rule(48);
    let mut coarse = vec![0.0; l_max + 1];
    let mut refined = vec![0.0; l_max + 1];
    for pair in boundaries.windows(2) {
        accumulate_panel(&base, pair[0], pair[1], eta, c, &mut coarse);
        accumulate_panel(&fine, pair[0], pair[1], eta, c, &mut refined);
    }
    let mut worst = 0.0f64;
    for l in 0..=l_max {
        let denom = refined[l].abs().max(refined[0].abs()).max(f64::MIN_POSITIVE);
        worst = worst.max((refined[l] - coarse[l]).abs() / denom);
    }
    if worst > 1e-8 {
        return Err(KernelError::IntegrationFailure { estimate: worst });
    }
    let mut sigma_s_l: Vec<f64> = refined.iter().map(|v| sigma_s * v).collect();
    if normalize {
        let scale = sigma_s / sigma_s_l[0];
        for v in &mut sigma_s_l {
            *v *= scale;
        }
        sigma_s_l[0] = sigma_s;
    }
    Ok(KernelMoments { sigma_s_l })
}

fn panel_rule(order: usize) -> Quadrature {
    Quadrature::gauss_legendre(order).expect("fixed even panel order")
}

fn accumulate_panel(rule: &Quadrature, a: f64, b: f64, eta: f64, c: f64, out: &mut [f64]) {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (b + a);
    let l_max = out.len() - 1;
    for (x, w) in rule.mu().iter().zip(rule.weights()) {
        let t = mid + half * x;
        let mu = 1.0 + 2.0 * eta - t;
        let weight = w * half * c / (t * t);
        let p = legendre_column(l_max, mu);
        for l in 0..=l_max {
            out[l] += weight * p[l];
        }
    }
}

/// Output of the smooth/singular decomposition at order L = B + 1.
#[derive(Debug, Clone, PartialEq)]
pub struct BfpCoefficients {
    smooth_count: usize,
    order: usize,
    sigma_tilde: Vec<f64>,
    sigma_tr: f64,
    self_scatter: f64,
}

impl BfpCoefficients {
    /// Number of smooth moments retained (B).
    pub fn smooth_count(&self) -> usize {
        self.smooth_count
    }

    /// Decomposition order L = B + 1.
    pub fn order(&self) -> usize {
        self.order
    }

    /// Smooth moments sigma_tilde_{s,l}, l = 0..B-1.
    pub fn sigma_tilde(&self) -> &[f64] {
        &self.sigma_tilde
    }

    /// sigma_tilde_{s,l} with the convention that absent entries (l >= B) are zero.
    pub fn sigma_tilde_at(&self, l: usize) -> f64 {
        self.sigma_tilde.get(l).copied().unwrap_or(0.0)
    }

    /// Transfer cross-section sigma_tr feeding the Fokker-Planck term.
    pub fn sigma_tr(&self) -> f64 {
        self.sigma_tr
    }

    /// Same-angle component sigma_{s,L} + (sigma_tr/2) L(L+1). Together with
    /// the smooth moments it reconstructs sigma_{s,l} exactly for l <= L-2;
    /// in particular self_scatter + sigma_tilde_{s,0} = sigma_{s,0}.
    pub fn self_scatter(&self) -> f64 {
        self.self_scatter
    }
}

/// Decompose a moment sequence into B smooth moments, the transfer
/// cross-section, and the same-angle component, at order L = B + 1.
///
/// sigma_tr = (sigma_{s,L-1} - sigma_{s,L}) / L and
/// sigma_tilde_{s,l} = sigma_{s,l} - sigma_{s,L} - (sigma_tr/2)(L(L+1) - l(l+1)).
pub fn bfp_decompose(moments: &KernelMoments, b: usize) -> Result<BfpCoefficients, KernelError> {
    if b == 0 {
        return Err(KernelError::InvalidSmoothCount(0));
    }
    let order = b + 1;
    let m = moments.values();
    if m.len() < order + 1 {
        return Err(KernelError::InsufficientMoments { needed: order, available: m.len() });
    }
    let lf = order as f64;
    let sigma_tr = (m[order - 1] - m[order]) / lf;
    let ll1 = lf * (lf + 1.0);
    let sigma_tilde = (0..b)
        .map(|l| {
            let l1 = l as f64 * (l as f64 + 1.0);
            m[l] - m[order] - 0.5 * sigma_tr * (ll1 - l1)
        })
        .collect();
    let self_scatter = m[order] + 0.5 * sigma_tr * ll1;
    Ok(BfpCoefficients { smooth_count: b, order, sigma_tilde, sigma_tr, self_scatter })
}

/// Analytic SRK zeroth moment sigma_s * C / (2 eta (1 + eta)), from
/// Q_0'(z) = -1/(z^2 - 1) with z = 1 + 2 eta.
pub fn srk_sigma0_analytic(sigma_s: f64, c: f64, eta: f64) -> f64 {
    sigma_s * c / (2.0 * eta * (1.0 + eta))
}

/// Analytic SRK first moment sigma_s * C * [(1+2eta)/(2 eta (1+eta)) - ln((1+eta)/eta)],
/// from the Legendre Q-function derivative Q_1'(z).
pub fn srk_sigma1_analytic(sigma_s: f64, c: f64, eta: f64) -> f64 {
    sigma_s * c * ((1.0 + 2.0 * eta) / (2.0 * eta * (1.0 + eta)) - ((1.0 + eta) / eta).ln())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hgk_isotropic_limit() {
        let m = hgk_moments(1.0, 0.0, 3);
        assert_eq!(m.values(), &[1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn hgk_powers_of_g() {
        let m = hgk_moments(1.0, 0.9, 2);
        assert!((m.values()[1] - 0.9).abs() < 1e-15);
        assert!((m.values()[2] - 0.81).abs() < 1e-15);
    }

    #[test]
    fn hgk_ratio_recursion() {
        let m = hgk_moments(2.5, 0.7, 10);
        for l in 0..10 {
            assert!((m.values()[l + 1] / m.values()[l] - 0.7).abs() < 1e-13);
        }
    }

    #[test]
    fn hgk_boundedness() {
        let m = hgk_moments(1.0, 0.95, 16);
        for v in m.values() {
            assert!(v.abs() <= m.values()[0]);
        }
    }

    #[test]
    fn kernel_spec_validation() {
        assert!(KernelSpec::hgk(1.0, 0.0).is_ok());
        assert_eq!(KernelSpec::hgk(1.0, 1.0), Err(KernelError::InvalidAnisotropy(1.0)));
        assert_eq!(KernelSpec::hgk(1.0, 1.5), Err(KernelError::InvalidAnisotropy(1.5)));
        assert_eq!(KernelSpec::hgk(-1.0, 0.5), Err(KernelError::InvalidScattering(-1.0)));
        assert_eq!(
            KernelSpec::srk(1.0, 0.3903, 0.0, true),
            Err(KernelError::InvalidScreening(0.0))
        );
        assert_eq!(
            KernelSpec::srk(1.0, 0.0, 1e-3, true),
            Err(KernelError::InvalidKernelConstant(0.0))
        );
    }

    #[test]
    fn srk_zeroth_moment_analytic() {
        // C = 1, eta = 1, sigma_s = 1 -> 1/(2*1*2) = 0.25
        let m = srk_moments(1.0, 1.0, 1.0, false, 0).unwrap();
        assert!((m.values()[0] - 0.25).abs() < 1e-12, "{}", m.values()[0]);
    }

    #[test]
    fn srk_matches_q_derivative_formulas() {
        for eta in [1.0, 1e-2, 2.836e-5] {
            let m = srk_moments(1.0, 0.3903, eta, false, 1).unwrap();
            let s0 = srk_sigma0_analytic(1.0, 0.3903, eta);
            let s1 = srk_sigma1_analytic(1.0, 0.3903, eta);
            assert!(
                ((m.values()[0] - s0) / s0).abs() < 1e-8,
                "eta={eta}: sigma0 {} vs {s0}",
                m.values()[0]
            );
            assert!(
                ((m.values()[1] - s1) / s1).abs() < 1e-8,
                "eta={eta}: sigma1 {} vs {s1}",
                m.values()[1]
            );
        }
    }

    #[test]
    fn srk_normalization() {
        let raw = srk_moments(1.0, 0.3903, 2.836e-5, false, 8).unwrap();
        let norm = srk_moments(1.0, 0.3903, 2.836e-5, true, 8).unwrap();
        assert_eq!(norm.values()[0], 1.0);
        for l in 1..=8 {
            let r_raw = raw.values()[l] / raw.values()[0];
            let r_norm = norm.values()[l] / norm.values()[0];
            assert!((r_raw - r_norm).abs() < 1e-14, "ratio changed at l={l}");
        }
    }

    #[test]
    fn srk_monotone_for_paper_eta() {
        let m = srk_moments(1.0, 0.3903, 2.836e-5, true, 16).unwrap();
        for l in 1..=16 {
            assert!(
                m.values()[l] < m.values()[l - 1] && m.values()[l] > 0.0,
                "not monotone at l={l}"
            );
        }
    }

    #[test]
    fn bfp_decompose_hgk_b1() {
        let m = hgk_moments(1.0, 0.9, 3);
        let bfp = bfp_decompose(&m, 1).unwrap();
        assert_eq!(bfp.order(), 2);
        assert!((bfp.sigma_tr() - 0.045).abs() < 1e-15);
        assert!((bfp.sigma_tilde()[0] - 0.055).abs() < 1e-15);
        assert_eq!(bfp.sigma_tilde_at(1), 0.0);
    }

    #[test]
    fn bfp_decompose_isotropic() {
        let m = hgk_moments(2.0, 0.0, 6);
        for b in 1..=4 {
            let bfp = bfp_decompose(&m, b).unwrap();
            assert_eq!(bfp.sigma_tr(), 0.0);
            assert_eq!(bfp.sigma_tilde()[0], 2.0);
            for l in 1..b {
                assert_eq!(bfp.sigma_tilde()[l], 0.0);
            }
            assert_eq!(bfp.self_scatter(), 0.0);
        }
    }

    #[test]
    fn anchor_identity_vanishes_at_l_minus_1_and_l() {
        let cases = [
            hgk_moments(1.0, 0.9, 16),
            srk_moments(1.0, 0.3903, 2.836e-5, true, 16).unwrap(),
        ];
        for m in &cases {
            for b in [1usize, 5, 9, 13] {
                let bfp = bfp_decompose(m, b).unwrap();
                let order = bfp.order() as f64;
                let ll1 = order * (order + 1.0);
                for l in [bfp.order() - 1, bfp.order()] {
                    let l1 = l as f64 * (l as f64 + 1.0);
                    let v = m.values()[l]
                        - m.values()[bfp.order()]
                        - 0.5 * bfp.sigma_tr() * (ll1 - l1);
                    assert!(v.abs() <= 1e-12 * m.values()[0], "l={l} b={b}: {v}");
                }
            }
        }
    }

    #[test]
    fn decomposition_reconstructs_input() {
        let m = srk_moments(1.0, 0.3903, 1e-2, true, 12).unwrap();
        let bfp = bfp_decompose(&m, 9).unwrap();
        let order = bfp.order() as f64;
        let ll1 = order * (order + 1.0);
        for l in 0..=bfp.order() - 2 {
            let l1 = l as f64 * (l as f64 + 1.0);
            let rebuilt = bfp.sigma_tilde()[l]
                + m.values()[bfp.order()]
                + 0.5 * bfp.sigma_tr() * (ll1 - l1);
            assert!((rebuilt - m.values()[l]).abs() <= 1e-14 * m.values()[0].abs());
        }
    }

    #[test]
    fn self_scatter_completes_zeroth_moment() {
        for (m, b) in [
            (hgk_moments(1.0, 0.9, 16), 14usize),
            (srk_moments(1.0, 0.3903, 2.836e-5, true, 16).unwrap(), 14),
            (hgk_moments(3.0, 0.5, 8), 3),
        ] {
            let bfp = bfp_decompose(&m, b).unwrap();
            let total = bfp.sigma_tilde()[0] + bfp.self_scatter();
            assert!(
                (total - m.values()[0]).abs() <= 1e-13 * m.values()[0].abs(),
                "b={b}: {total} vs {}",
                m.values()[0]
            );
        }
    }

    #[test]
    fn decompose_rejects_short_moment_list() {
        let m = hgk_moments(1.0, 0.9, 3);
        assert_eq!(
            bfp_decompose(&m, 3),
            Err(KernelError::InsufficientMoments { needed: 4, available: 4 })
        );
        assert_eq!(bfp_decompose(&m, 0), Err(KernelError::InvalidSmoothCount(0)));
        assert!(bfp_decompose(&m, 2).is_ok());
    }

    proptest::proptest! {
        #[test]
        fn decomposition_identities_hold_for_decaying_sequences(
            scale in 0.1f64..10.0,
            ratio in 0.05f64..0.95,
            b in 1usize..10,
        ) {
            // geometric-like decaying moments with available length b + 2
            let m = KernelMoments::from_raw_for_tests(
                (0..(b + 2)).map(|l| scale * ratio.powi(l as i32)).collect(),
            );
            let bfp = bfp_decompose(&m, b).unwrap();
            let order = bfp.order() as f64;
            let ll1 = order * (order + 1.0);
            // reconstruction for l <= L-2 plus the zeroth-moment completion
            for l in 0..b {
                let l1 = l as f64 * (l as f64 + 1.0);
                let rebuilt = bfp.sigma_tilde()[l]
                    + m.values()[bfp.order()]
                    + 0.5 * bfp.sigma_tr() * (ll1 - l1);
                proptest::prop_assert!((rebuilt - m.values()[l]).abs() <= 1e-12 * scale);
            }
            let total = bfp.sigma_tilde()[0] + bfp.self_scatter();
            proptest::prop_assert!((total - m.values()[0]).abs() <= 1e-12 * scale);
            proptest::prop_assert!(bfp.sigma_tr() >= 0.0);
        }
    }

    #[test]
    fn integration_failure_signals_panel_limit() {
        // the fixed-order panels resolve the moments comfortably past the
        // solver's expansion order, and report failure instead of returning
        // silently degraded values once P_l oscillates faster than the rule
        assert!(srk_moments(1.0, 0.3903, 2.836e-5, false, 48).is_ok());
        match srk_moments(1.0, 0.3903, 2.836e-5, false, 96) {
            Err(KernelError::IntegrationFailure { estimate }) => assert!(estimate > 1e-8),
            other => panic!("expected integration failure, got {other:?}"),
        }
    }

    #[test]
    fn sigma_tr_nonnegative_for_decreasing_moments() {
        for b in [1usize, 5, 9, 13] {
            let h = bfp_decompose(&hgk_moments(1.0, 0.9, 16), b).unwrap();
            assert!(h.sigma_tr() >= 0.0);
            let s =
                bfp_decompose(&srk_moments(1.0, 0.3903, 2.836e-5, true, 16).unwrap(), b).unwrap();
            assert!(s.sigma_tr() >= 0.0);
        }
    }
}
