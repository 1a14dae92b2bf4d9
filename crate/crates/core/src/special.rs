//! Special functions used by the closed-form and semi-analytic code paths.
//!
//! Everything that can underflow for blocklengths in the thousands is
//! available in log form: the Gaussian tail, the regularized incomplete beta
//! function (shell marginal tail) and the regularized lower incomplete gamma
//! function (noncentral chi-square series).

use libm::{erfc, lgamma as ln_gamma};

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;
const EPS: f64 = 1e-16;
const TINY: f64 = 1e-300;
const MAX_CF_ITER: usize = 50_000;

/// `ln(exp(a) + exp(b))` without overflow.
pub fn ln_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// `ln(1 - exp(l))` for `l <= 0`.
pub fn ln_one_minus_exp(l: f64) -> f64 {
    if l >= 0.0 {
        return f64::NEG_INFINITY;
    }
    if l > -std::f64::consts::LN_2 {
        (-l.exp_m1()).ln()
    } else {
        (-l.exp()).ln_1p()
    }
}

/// Scaled complementary error function `exp(u²)·erfc(u)` for `u ≥ 0`.
pub fn erfcx(u: f64) -> f64 {
    debug_assert!(u >= 0.0);
    if u < 4.0 {
        return (u * u).exp() * erfc(u);
    }
    // Continued fraction of the Mills ratio, modified Lentz.
    // erfcx(u) = (1/√π) · 1/(u + (1/2)/(u + 1/(u + (3/2)/(u + ...))))
    let mut f = u;
    let mut c = u;
    let mut d = 0.0;
    for k in 1..MAX_CF_ITER {
        let a = k as f64 * 0.5;
        d = u + a * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = u + a / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < EPS {
            break;
        }
    }
    1.0 / (f * std::f64::consts::PI.sqrt())
}

/// Log of the standard Gaussian tail, `ln Q(x)`.
pub fn ln_gaussian_q(x: f64) -> f64 {
    if x < 5.0 {
        (0.5 * erfc(x / std::f64::consts::SQRT_2)).ln()
    } else {
        -0.5 * x * x + (0.5 * erfcx(x / std::f64::consts::SQRT_2)).ln()
    }
}

/// Log of the standard normal density.
pub fn ln_gaussian_pdf(x: f64) -> f64 {
    -0.5 * x * x - LN_SQRT_2PI
}

/// `ln Γ(a) − ln Γ(a + b)`, accurate when `a` is large and `b` is small.
pub fn ln_gamma_ratio(a: f64, b: f64) -> f64 {
    if a < 20.0 || b > a {
        return ln_gamma(a) - ln_gamma(a + b);
    }
    let stirling = |x: f64| {
        let r = 1.0 / x;
        let r2 = r * r;
        r * (1.0 / 12.0
            - r2 * (1.0 / 360.0 - r2 * (1.0 / 1260.0 - r2 * (1.0 / 1680.0 - r2 / 1188.0))))
    };
    -b * a.ln() - (a + b - 0.5) * (b / a).ln_1p() + b + stirling(a) - stirling(a + b)
}

/// `ln B(a, b)`.
pub fn ln_beta(a: f64, b: f64) -> f64 {
    let (big, small) = if a >= b { (a, b) } else { (b, a) };
    ln_gamma(small) + ln_gamma_ratio(big, small)
}

/// Continued fraction for the incomplete beta function (modified Lentz).
fn beta_cf(a: f64, b: f64, x: f64) -> f64 {
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..MAX_CF_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

/// `ln I_x(a, b)`, the log of the regularized incomplete beta function.
///
/// `y` must equal `1 − x`; passing it separately keeps full precision when
/// `x` is within rounding of one.
pub fn ln_beta_inc(a: f64, b: f64, x: f64, y: f64) -> f64 {
    debug_assert!(a > 0.0 && b > 0.0);
    if x <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if y <= 0.0 {
        return 0.0;
    }
    if x > (a + 1.0) / (a + b + 2.0) {
        let other = ln_beta_inc_cf(b, a, y, x).exp();
        return (-other).ln_1p();
    }
    ln_beta_inc_cf(a, b, x, y)
}

fn ln_beta_inc_cf(a: f64, b: f64, x: f64, y: f64) -> f64 {
    let ln_front = a * x.ln() + b * y.ln() - ln_beta(a, b) - a.ln();
    ln_front + beta_cf(a, b, x).ln()
}

/// Regularized incomplete beta `I_x(a, b)`.
pub fn beta_inc(a: f64, b: f64, x: f64) -> f64 {
    ln_beta_inc(a, b, x, 1.0 - x).exp()
}

/// `ln P(a, x)`, the log of the regularized lower incomplete gamma function.
pub fn ln_gamma_p(a: f64, x: f64) -> f64 {
    debug_assert!(a > 0.0);
    if x <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if x < a + 1.0 {
        let mut ap = a;
        let mut del = 1.0 / a;
        let mut sum = del;
        for _ in 0..MAX_CF_ITER {
            ap += 1.0;
            del *= x / ap;
            sum += del;
            if del.abs() < sum.abs() * EPS {
                break;
            }
        }
        sum.ln() + a * x.ln() - x - ln_gamma(a)
    } else {
        ln_one_minus_exp(ln_gamma_q_cf(a, x))
    }
}

/// `ln Q(a, x)` via the Legendre continued fraction; valid for `x ≥ a + 1`.
fn ln_gamma_q_cf(a: f64, x: f64) -> f64 {
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..MAX_CF_ITER {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < EPS {
            break;
        }
    }
    h.ln() + a * x.ln() - x - ln_gamma(a)
}

/// `ln F(x; k, λ)`, the log CDF of a noncentral chi-square law with `k`
/// degrees of freedom and noncentrality `λ`.
///
/// Evaluated as the Poisson(λ/2) mixture of central chi-square CDFs. The
/// series stops once the bound `P(k/2 + j, x/2) · Pr[Pois ≥ j]` on the
/// remaining terms falls below `1e-16` of the running sum, or the remaining
/// Poisson mass drops below `1e-300`.
pub fn ln_noncentral_chi2_cdf(x: f64, k: f64, lambda: f64) -> f64 {
    debug_assert!(k > 0.0 && lambda >= 0.0);
    if x <= 0.0 {
        return f64::NEG_INFINITY;
    }
    let half_x = 0.5 * x;
    let mu = 0.5 * lambda;
    if mu == 0.0 {
        return ln_gamma_p(0.5 * k, half_x);
    }
    let ln_mu = mu.ln();
    let mut acc = f64::NEG_INFINITY;
    let mut j = 0usize;
    loop {
        let jf = j as f64;
        let ln_weight = jf * ln_mu - mu - ln_gamma(jf + 1.0);
        let ln_cdf = ln_gamma_p(0.5 * k + jf, half_x);
        acc = ln_add_exp(acc, ln_weight + ln_cdf);
        j += 1;
        let jf = j as f64;
        // Pr[Pois(mu) >= j] = P(j, mu)
        let ln_tail_mass = ln_gamma_p(jf, mu);
        let ln_bound = ln_tail_mass + ln_gamma_p(0.5 * k + jf, half_x);
        if ln_bound < acc - 37.0 || ln_tail_mass < -690.0 {
            break;
        }
    }
    acc.min(0.0)
}
