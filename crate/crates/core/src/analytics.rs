//! Closed-form quantities: capacity, dispersions, SINR, effective kurtosis,
//! the mismatched information density and the two-term normal approximation.
//!
//! All rates are in nats.

use serde::{Deserialize, Serialize};
use libm::erfc;

use crate::error::{domain, Error, Result};
use crate::montecarlo::Scenario;
use crate::special::{erfcx, ln_gaussian_pdf, ln_gaussian_q};

/// Standard Gaussian tail `Q(x) = Pr[N(0,1) > x]`.
///
/// Positive for every finite `x`: values below the smallest subnormal are
/// reported as that subnormal. Use [`ln_gaussian_q`] for deep tails.
pub fn gaussian_q(x: f64) -> f64 {
    let q = if x < 5.0 {
        0.5 * erfc(x / std::f64::consts::SQRT_2)
    } else {
        0.5 * erfcx(x / std::f64::consts::SQRT_2) * (-0.5 * x * x).exp()
    };
    q.max(f64::from_bits(1))
}

const A: [f64; 6] = [
    -3.969683028665376e+01,
    2.209460984245205e+02,
    -2.759285104469687e+02,
    1.383577518672690e+02,
    -3.066479806614716e+01,
    2.506628277459239e+00,
];
const B: [f64; 5] = [
    -5.447609879822406e+01,
    1.615858368580409e+02,
    -1.556989798598866e+02,
    6.680131188771972e+01,
    -1.328068155288572e+01,
];
const C: [f64; 6] = [
    -7.784894002430293e-03,
    -3.223964580411365e-01,
    -2.400758277161838e+00,
    -2.549671348940838e+00,
    4.374664141464968e+00,
    2.938163982698783e+00,
];
const D: [f64; 4] = [
    7.784695709041462e-03,
    3.224671290700398e-01,
    2.445134137142996e+00,
    3.754408661907416e+00,
];

/// Rational approximation of the standard normal quantile for `p ≤ ½`
/// (relative error about 1e-9).
fn acklam_lower(p: f64) -> f64 {
    if p < 0.02425 {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    }
}

/// Inverse of [`gaussian_q`] on `(0, 1)`.
pub fn gaussian_q_inv(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return domain(format!("Q⁻¹ needs p in (0, 1), got {p}"));
    }
    if p == 0.5 {
        return Ok(0.0);
    }
    if p > 0.5 {
        return Ok(-gaussian_q_inv(1.0 - p)?);
    }
    let mut x = -acklam_lower(p);
    // Newton on ln Q(x) − ln p.
    let lq = ln_gaussian_q(x);
    x += (lq - p.ln()) * (lq - ln_gaussian_pdf(x)).exp();
    Ok(x)
}

fn check_power(p: f64) -> Result<()> {
    if p >= 0.0 && p.is_finite() {
        Ok(())
    } else {
        domain(format!("power must be nonnegative, got {p}"))
    }
}

fn check_xi(xi: f64) -> Result<()> {
    if xi >= 1.0 && xi.is_finite() {
        Ok(())
    } else {
        domain(format!("fourth moment must be at least 1, got {xi}"))
    }
}

pub(crate) fn capacity_unchecked(p: f64) -> f64 {
    0.5 * p.ln_1p()
}

/// `C(P) = ½ ln(1 + P)`.
pub fn capacity(p: f64) -> Result<f64> {
    check_power(p)?;
    Ok(capacity_unchecked(p))
}

/// Gaussian-channel dispersion `P(P+2)/(2(P+1)²)`.
pub fn v_gauss(p: f64) -> Result<f64> {
    check_power(p)?;
    Ok(p * (p + 2.0) / (2.0 * (p + 1.0).powi(2)))
}

/// Shell-codebook dispersion `(P²(ξ−1) + 4P)/(4(P+1)²)`.
pub fn v_shell(p: f64, xi: f64) -> Result<f64> {
    check_power(p)?;
    check_xi(xi)?;
    Ok((p * p * (xi - 1.0) + 4.0 * p) / (4.0 * (p + 1.0).powi(2)))
}

/// i.i.d.-codebook dispersion `(P²(ξ+1) + 4P)/(4(P+1)²)`.
pub fn v_iid(p: f64, xi: f64) -> Result<f64> {
    check_power(p)?;
    check_xi(xi)?;
    Ok((p * p * (xi + 1.0) + 4.0 * p) / (4.0 * (p + 1.0).powi(2)))
}

/// Returns `(P̄, P̃)`: the SINR and the total interferer power.
pub fn sinr(p1: f64, interferers: &[f64]) -> Result<(f64, f64)> {
    if !(p1 > 0.0 && p1.is_finite()) {
        return domain(format!("intended power must be positive, got {p1}"));
    }
    for &p in interferers {
        check_power(p)?;
    }
    let p_tilde: f64 = interferers.iter().sum();
    Ok((p1 / (1.0 + p_tilde), p_tilde))
}

/// Fourth moment of the normalized noise-plus-i.i.d.-interference,
/// `(3P̃² + 6P̃ + ξ)/(P̃+1)²`.
pub fn xi_prime(xi: f64, p_tilde: f64) -> Result<f64> {
    check_xi(xi)?;
    check_power(p_tilde)?;
    Ok((3.0 * p_tilde * p_tilde + 6.0 * p_tilde + xi) / (p_tilde + 1.0).powi(2))
}

/// `Σ_{i<j} P_i P_j`.
pub(crate) fn pairwise_products(powers: &[f64]) -> f64 {
    let total: f64 = powers.iter().sum();
    let squares: f64 = powers.iter().map(|p| p * p).sum();
    0.5 * (total * total - squares)
}

/// Shell dispersion of user 1 when every sender uses a shell codebook.
pub fn v_shell_interference(p1: f64, interferers: &[f64], xi: f64) -> Result<f64> {
    check_xi(xi)?;
    let (_, pt) = sinr(p1, interferers)?;
    let cross = pairwise_products(interferers);
    let num = p1 * p1 * (xi - 1.0 + 4.0 * pt) + 4.0 * p1 * (pt + 1.0).powi(3) + 4.0 * p1 * p1 * cross;
    Ok(num / (4.0 * (pt + 1.0).powi(2) * (p1 + pt + 1.0).powi(2)))
}

/// Mismatched information density `C(P) + y²/(2(P+1)) − (y−x)²/2`.
pub fn info_density(x: f64, y: f64, p: f64) -> Result<f64> {
    if !(p > 0.0) {
        return domain(format!("power must be positive, got {p}"));
    }
    Ok(capacity_unchecked(p) + y * y / (2.0 * (p + 1.0)) - 0.5 * (y - x) * (y - x))
}

/// Sum of [`info_density`] over the symbols of `x` and `y`.
pub fn info_density_vec(x: &[f64], y: &[f64], p: f64) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::Dimension(format!("|x| = {} but |y| = {}", x.len(), y.len())));
    }
    x.iter().zip(y).map(|(&a, &b)| info_density(a, b, p)).sum()
}

/// `nC − √(nV)·Q⁻¹(ε)`, without any third-order term.
pub fn normal_approx_log_m(n: usize, epsilon: f64, capacity: f64, dispersion: f64) -> Result<f64> {
    if n == 0 {
        return domain("blocklength must be at least 1");
    }
    if !(dispersion >= 0.0) {
        return domain(format!("dispersion must be nonnegative, got {dispersion}"));
    }
    let nf = n as f64;
    if epsilon == 0.5 || dispersion == 0.0 {
        gaussian_q_inv(epsilon)?;
        return Ok(nf * capacity);
    }
    Ok(nf * capacity - (nf * dispersion).sqrt() * gaussian_q_inv(epsilon)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DispersionReport {
    pub codebook: String,
    pub interferer_codebook: Option<String>,
    pub capacity_nats_per_use: f64,
    pub dispersion_nats2_per_use: f64,
    pub sinr: Option<f64>,
    pub xi: f64,
    pub xi_effective: f64,
    pub log_m_approx: f64,
    pub n: usize,
    pub epsilon: f64,
    /// The dropped third-order term; always zero.
    pub third_order_term: f64,
}

/// Capacity and dispersion of user 1 in `scenario` as `(C, V, P̄, ξ_eff)`.
///
/// All-shell senders use the interference shell dispersion; i.i.d.
/// interferers are absorbed into the noise, which changes its fourth moment
/// to `ξ′`. An i.i.d. intended codebook with shell interferers is not covered.
pub fn first_and_second_order(scenario: &Scenario) -> Result<(f64, f64, f64, f64)> {
    let xi = scenario.noise.xi();
    let p1 = scenario.intended.power();
    let powers: Vec<f64> = scenario.interferers.iter().map(|c| c.power()).collect();
    let (p_bar, p_tilde) = sinr(p1, &powers)?;
    let cap = capacity_unchecked(p_bar);
    if powers.is_empty() {
        let v = if scenario.intended.is_shell() { v_shell(p1, xi)? } else { v_iid(p1, xi)? };
        return Ok((cap, v, p_bar, xi));
    }
    let all_shell = scenario.interferers.iter().all(|c| c.is_shell());
    let all_iid = scenario.interferers.iter().all(|c| !c.is_shell());
    match (scenario.intended.is_shell(), all_shell, all_iid) {
        (true, true, _) => Ok((cap, v_shell_interference(p1, &powers, xi)?, p_bar, xi)),
        (shell, _, true) => {
            let xp = xi_prime(xi, p_tilde)?;
            let v = if shell { v_shell(p_bar, xp)? } else { v_iid(p_bar, xp)? };
            Ok((cap, v, p_bar, xp))
        }
        _ => Err(Error::Unsupported(
            "no dispersion formula for this mix of intended and interferer codebooks".into(),
        )),
    }
}

pub fn dispersion_report(scenario: &Scenario, n: usize, epsilon: f64) -> Result<DispersionReport> {
    let (cap, v, p_bar, xi_eff) = first_and_second_order(scenario)?;
    let log_m = normal_approx_log_m(n, epsilon, cap, v)?;
    Ok(DispersionReport {
        codebook: scenario.intended.name().to_string(),
        interferer_codebook: scenario.interferers.first().map(|c| c.name().to_string()),
        capacity_nats_per_use: cap,
        dispersion_nats2_per_use: v,
        sinr: (!scenario.interferers.is_empty()).then_some(p_bar),
        xi: scenario.noise.xi(),
        xi_effective: xi_eff,
        log_m_approx: log_m,
        n,
        epsilon,
        third_order_term: 0.0,
    })
}
