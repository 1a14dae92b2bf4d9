//! Exact conditional error probabilities over the codebook ensemble.
//!
//! Given the transmitted codeword `x` and the channel output `y`, an
//! independent competing codeword beats `x` under nearest-neighbor decoding
//! with a probability `Ψ` that depends on `(x, y)` only through the empirical
//! powers `P̂_Y = ‖y‖²/n` and `P̂_Z = ‖y − x‖²/n`. For shell codebooks `Ψ` is a
//! tail of the marginal of one sphere coordinate; for i.i.d. codebooks it is a
//! noncentral chi-square CDF. Both are evaluated in the log domain because
//! they routinely fall below the smallest positive double.

use serde::{Deserialize, Serialize};

use crate::analytics::capacity_unchecked;
use crate::error::{domain, Error, Result};
use crate::special::{ln_beta_inc, ln_gamma_ratio, ln_noncentral_chi2_cdf, ln_one_minus_exp};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalPowers {
    /// `‖y‖²/n`
    pub p_y_hat: f64,
    /// `‖y − x‖²/n`
    pub p_z_hat: f64,
    pub n: usize,
    /// Codebook power `P`.
    pub power: f64,
}

impl EmpiricalPowers {
    pub fn new(p_y_hat: f64, p_z_hat: f64, n: usize, power: f64) -> Result<Self> {
        if !(p_y_hat >= 0.0 && p_y_hat.is_finite() && p_z_hat >= 0.0 && p_z_hat.is_finite()) {
            return domain(format!(
                "empirical powers must be finite and nonnegative, got ({p_y_hat}, {p_z_hat})"
            ));
        }
        if n == 0 {
            return domain("blocklength must be at least 1");
        }
        if !(power > 0.0 && power.is_finite()) {
            return domain(format!("power must be positive, got {power}"));
        }
        Ok(Self { p_y_hat, p_z_hat, n, power })
    }

    /// Powers of the received vector `y` and of `y − x`.
    pub fn from_vectors(x: &[f64], y: &[f64], power: f64) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::Dimension(format!("|x| = {} but |y| = {}", x.len(), y.len())));
        }
        let n = x.len();
        let (mut sy, mut sz) = (0.0, 0.0);
        for (a, b) in x.iter().zip(y) {
            sy += b * b;
            sz += (b - a) * (b - a);
        }
        Self::new(sy / n.max(1) as f64, sz / n.max(1) as f64, n, power)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentResult {
    pub s_star: f64,
    pub exponent: f64,
}

/// `ln Pr[X̄₁ ≥ t]` for the first coordinate of a vector uniform on the
/// sphere of radius `√(nP)`.
pub fn ln_shell_tail(t: f64, n: usize, power: f64) -> Result<f64> {
    if n < 2 {
        return domain(format!("shell marginal needs n >= 2, got {n}"));
    }
    if !(power > 0.0) {
        return domain(format!("power must be positive, got {power}"));
    }
    if t.is_nan() {
        return domain("threshold is NaN");
    }
    let r = (n as f64 * power).sqrt();
    if t >= r {
        return Ok(f64::NEG_INFINITY);
    }
    if t <= -r {
        return Ok(0.0);
    }
    if t == 0.0 {
        return Ok(-std::f64::consts::LN_2);
    }
    // u = X̄₁/r satisfies u² ~ Beta(½, (n−1)/2), so Pr[u ≥ a] = ½ I_{1−a²}((n−1)/2, ½).
    let a = t.abs() / r;
    let tau = a * a;
    let one_minus_tau = (1.0 - a) * (1.0 + a);
    let ln_half_i =
        ln_beta_inc(0.5 * (n as f64 - 1.0), 0.5, one_minus_tau, tau) - std::f64::consts::LN_2;
    if t > 0.0 {
        Ok(ln_half_i)
    } else {
        Ok(ln_one_minus_exp(ln_half_i))
    }
}

pub fn shell_tail(t: f64, n: usize, power: f64) -> Result<f64> {
    Ok(ln_shell_tail(t, n, power)?.exp())
}

/// Density of the first coordinate of a shell vector.
pub fn shell_marginal_density(x: f64, n: usize, power: f64) -> f64 {
    let np = n as f64 * power;
    let u2 = x * x / np;
    if n < 2 || u2 >= 1.0 {
        return 0.0;
    }
    let nf = n as f64;
    let ln_norm = -0.5 * (std::f64::consts::PI * np).ln() - ln_gamma_ratio(0.5 * (nf - 1.0), 0.5);
    (ln_norm + 0.5 * (nf - 3.0) * (-u2).ln_1p()).exp()
}

/// `Pr[X̄₁ ≥ t]` by composite Simpson quadrature of the marginal density.
///
/// Slow and only accurate for `n ≥ 3`; kept to cross-check [`shell_tail`].
pub fn shell_tail_quadrature(t: f64, n: usize, power: f64, steps: usize) -> f64 {
    let r = (n as f64 * power).sqrt();
    let lo = t.clamp(-r, r);
    let steps = steps.max(2) & !1;
    let h = (r - lo) / steps as f64;
    let mut acc = shell_marginal_density(lo, n, power) + shell_marginal_density(r, n, power);
    for i in 1..steps {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * shell_marginal_density(lo + i as f64 * h, n, power);
    }
    acc * h / 3.0
}

/// Threshold on `X̄₁` above which a shell competitor is at least as close to
/// `y` as the transmitted codeword.
pub fn shell_threshold(powers: &EmpiricalPowers) -> Result<f64> {
    if powers.p_y_hat <= 0.0 {
        return Err(Error::Degenerate("received power is zero; threshold undefined".into()));
    }
    let n = powers.n as f64;
    Ok(n * (powers.p_y_hat + powers.power - powers.p_z_hat) / (2.0 * (n * powers.p_y_hat).sqrt()))
}

pub fn ln_psi_shell(powers: &EmpiricalPowers) -> Result<f64> {
    let t = shell_threshold(powers)?;
    ln_shell_tail(t, powers.n, powers.power)
}

pub fn psi_shell(powers: &EmpiricalPowers) -> Result<f64> {
    Ok(ln_psi_shell(powers)?.exp())
}

/// `ln Pr[‖X̄ − y‖² ≤ nP̂_Z]` for `X̄ ~ N(0, P·I)`.
pub fn ln_psi_iid(powers: &EmpiricalPowers) -> Result<f64> {
    let n = powers.n as f64;
    let p = powers.power;
    Ok(ln_noncentral_chi2_cdf(n * powers.p_z_hat / p, n, n * powers.p_y_hat / p))
}

pub fn psi_iid(powers: &EmpiricalPowers) -> Result<f64> {
    Ok(ln_psi_iid(powers)?.exp())
}

/// `1 − (1 − ψ)^{M−1}`.
pub fn conditional_error(psi: f64, m: u64) -> f64 {
    if m <= 1 || psi <= 0.0 {
        return 0.0;
    }
    if psi >= 1.0 {
        return 1.0;
    }
    -((m - 1) as f64 * (-psi).ln_1p()).exp_m1()
}

/// `ln(M − 1)` for `M = e^{log_m}`, or `None` when there is no competitor.
///
/// Below `2^52` the codebook size is rounded to an integer first.
pub fn ln_competitors(log_m: f64) -> Option<f64> {
    if log_m.is_nan() {
        return None;
    }
    if log_m < 52.0 * std::f64::consts::LN_2 {
        let m = log_m.exp().round();
        if m <= 1.0 {
            None
        } else {
            Some((m - 1.0).ln())
        }
    } else {
        Some(log_m + ln_one_minus_exp(-log_m))
    }
}

/// [`conditional_error`] with `ψ` and `M` both given by their logarithms.
pub fn conditional_error_log(ln_psi: f64, log_m: f64) -> f64 {
    let Some(ln_c) = ln_competitors(log_m) else {
        return 0.0;
    };
    if ln_psi == f64::NEG_INFINITY {
        return 0.0;
    }
    if ln_psi >= 0.0 {
        return 1.0;
    }
    // ln(−ln(1 − ψ))
    let ln_l = if ln_psi < -30.0 {
        ln_psi + 0.5 * ln_psi.exp()
    } else {
        (-(-ln_psi.exp()).ln_1p()).ln()
    };
    -(-(ln_c + ln_l).exp()).exp_m1()
}

/// Objective `P̂_Y s/(P(1+2s)) + ½ ln(1+2s) − s P̂_Z/P` of the large-deviation
/// exponent.
pub fn ld_objective(s: f64, powers: &EmpiricalPowers) -> f64 {
    let p = powers.power;
    let u = 1.0 + 2.0 * s;
    powers.p_y_hat * s / (p * u) + 0.5 * u.ln() - s * powers.p_z_hat / p
}

pub fn ld_exponent(powers: &EmpiricalPowers) -> Result<ExponentResult> {
    if powers.p_z_hat <= 0.0 {
        return Err(Error::Degenerate("P̂_Z = 0; the maximizer is unbounded".into()));
    }
    let p = powers.power;
    let (y, z) = (powers.p_y_hat, powers.p_z_hat);
    let s = ((p - 2.0 * z + (p * p + 4.0 * y * z).sqrt()) / (4.0 * z)).max(0.0);
    Ok(ExponentResult { s_star: s, exponent: ld_objective(s, powers) })
}

/// First-order expansion `C(P) + P̂_Y/(2(P+1)) − P̂_Z/2` of the exponent about
/// `(P+1, 1)`.
pub fn exponent_taylor_ref(powers: &EmpiricalPowers) -> f64 {
    let p = powers.power;
    capacity_unchecked(p) + powers.p_y_hat / (2.0 * (p + 1.0)) - 0.5 * powers.p_z_hat
}

/// `−½ ln(1 − (P̂_Y + P − P̂_Z)²/(4P·P̂_Y))`, the per-symbol exponent of the
/// shell `Ψ`.
pub fn shell_log_psi_exponent(powers: &EmpiricalPowers) -> Result<f64> {
    let p = powers.power;
    let (y, z) = (powers.p_y_hat, powers.p_z_hat);
    if y <= 0.0 {
        return domain("P̂_Y must be positive");
    }
    let d = y + p - z;
    let arg = 1.0 - d * d / (4.0 * p * y);
    if !(arg > 0.0) {
        return domain(format!("(P̂_Y, P̂_Z) = ({y}, {z}) is outside the typical regime"));
    }
    Ok(-0.5 * arg.ln())
}
