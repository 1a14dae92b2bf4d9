//! Delta-method variance of smooth functions of sample means, and an
//! empirical check of the accompanying Berry–Esseen rate.
//!
//! A [`DeltaSpec`] collects the Jacobian `J` of the function at the mean and
//! the per-symbol covariance `V` of the underlying variables; the limiting
//! variance is `JᵀVJ`. The two constructors build the specs of the
//! point-to-point and interference decoding statistics.

use serde::{Deserialize, Serialize};

use crate::analytics::{gaussian_q, pairwise_products, sinr};
use crate::error::{domain, Error, Result};
use crate::montecarlo::Scenario;
use crate::parallel::map_trials;
use crate::rng::RandomStream;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaSpec {
    pub jacobian: Vec<f64>,
    /// Row-major `m × m`.
    pub covariance: Vec<Vec<f64>>,
    pub labels: Vec<String>,
}

impl DeltaSpec {
    pub fn diagonal(entries: Vec<(String, f64, f64)>) -> Self {
        let m = entries.len();
        let mut covariance = vec![vec![0.0; m]; m];
        let mut jacobian = Vec::with_capacity(m);
        let mut labels = Vec::with_capacity(m);
        for (i, (label, var, j)) in entries.into_iter().enumerate() {
            covariance[i][i] = var;
            jacobian.push(j);
            labels.push(label);
        }
        Self { jacobian, covariance, labels }
    }

    pub fn len(&self) -> usize {
        self.jacobian.len()
    }

    pub fn is_empty(&self) -> bool {
        self.jacobian.is_empty()
    }
}

/// `σ² = JᵀVJ`.
pub fn delta_variance(spec: &DeltaSpec) -> Result<f64> {
    let m = spec.jacobian.len();
    if spec.covariance.len() != m || spec.covariance.iter().any(|row| row.len() != m) {
        return Err(Error::Dimension(format!(
            "jacobian has {m} entries but covariance is {}×{}",
            spec.covariance.len(),
            spec.covariance.first().map_or(0, |r| r.len())
        )));
    }
    if !spec.labels.is_empty() && spec.labels.len() != m {
        return Err(Error::Dimension(format!("{} labels for {m} variables", spec.labels.len())));
    }
    let j = &spec.jacobian;
    Ok(spec
        .covariance
        .iter()
        .zip(j)
        .map(|(row, ji)| ji * row.iter().zip(j).map(|(v, jk)| v * jk).sum::<f64>())
        .sum())
}

/// Spec of the point-to-point statistic: `J = [P, 2, 0]`,
/// `V = diag(ξ−1, P, 2)`.
pub fn p2p_spec(p: f64, xi: f64) -> Result<DeltaSpec> {
    check(p, xi)?;
    Ok(DeltaSpec::diagonal(vec![
        ("1-Z^2".into(), xi - 1.0, p),
        ("sqrt(P)X~Z".into(), p, 2.0),
        ("X~^2-1".into(), 2.0, 0.0),
    ]))
}

/// `4(P+1)²`, the factor turning the point-to-point `σ²` into a dispersion.
pub fn p2p_normalizer(p: f64) -> f64 {
    4.0 * (p + 1.0).powi(2)
}

fn check(p: f64, xi: f64) -> Result<()> {
    if !(p > 0.0 && p.is_finite()) {
        return domain(format!("power must be positive, got {p}"));
    }
    if !(xi >= 1.0 && xi.is_finite()) {
        return domain(format!("fourth moment must be at least 1, got {xi}"));
    }
    Ok(())
}

/// Spec of the interference statistic when every interferer uses a shell
/// codebook.
pub fn interference_spec(p1: f64, interferers: &[f64], xi: f64) -> Result<DeltaSpec> {
    let senders: Vec<(f64, bool)> = interferers.iter().map(|&p| (p, true)).collect();
    mixed_interference_spec(p1, &senders, xi)
}

/// Spec of the interference statistic with per-interferer codebook classes
/// given as `(power, is_shell)`.
///
/// An i.i.d. interferer's codeword power fluctuates, which switches on the
/// `X̃ᵢ² − 1` family with Jacobian entry `−P₁Pᵢ`.
pub fn mixed_interference_spec(p1: f64, interferers: &[(f64, bool)], xi: f64) -> Result<DeltaSpec> {
    check(p1, xi)?;
    if interferers.is_empty() {
        return domain("no interferers; use the point-to-point spec");
    }
    let powers: Vec<f64> = interferers.iter().map(|&(p, _)| p).collect();
    let (_, pt) = sinr(p1, &powers)?;
    let b = 2.0 * (pt + 1.0);
    let mut e: Vec<(String, f64, f64)> = vec![
        ("A1: 1-Z^2".into(), xi - 1.0, p1),
        ("A2: sqrt(P1)X~1 Z".into(), p1, b),
        ("A3: X~1^2-1".into(), 2.0, 0.0),
    ];
    for (i, &(pi, _)) in interferers.iter().enumerate() {
        e.push((format!("A4[{}]: sqrt(P1 P{0})X~1 X~{0}", i + 2), p1 * pi, b));
    }
    for (i, &(pi, _)) in interferers.iter().enumerate() {
        e.push((format!("A5[{}]: sqrt(P{0})X~{0} Z", i + 2), pi, -2.0 * p1));
    }
    for (i, &(pi, shell)) in interferers.iter().enumerate() {
        let j = if shell { 0.0 } else { -p1 * pi };
        e.push((format!("A6[{}]: X~{0}^2-1", i + 2), 2.0, j));
    }
    for i in 0..interferers.len() {
        for k in i + 1..interferers.len() {
            let (pi, pk) = (interferers[i].0, interferers[k].0);
            e.push((format!("A7[{},{}]: sqrt(P{0}P{1})X~{0}X~{1}", i + 2, k + 2), pi * pk, -2.0 * p1));
        }
    }
    Ok(DeltaSpec::diagonal(e))
}

/// `(2(P̃+1)(P₁+P̃+1))²`, the factor turning the interference `σ²` into a
/// dispersion.
pub fn interference_normalizer(p1: f64, interferers: &[f64]) -> f64 {
    let pt: f64 = interferers.iter().sum();
    (2.0 * (pt + 1.0) * (p1 + pt + 1.0)).powi(2)
}

/// Closed form of the interference `σ²` with shell interferers.
pub fn interference_sigma2(p1: f64, interferers: &[f64], xi: f64) -> f64 {
    let pt: f64 = interferers.iter().sum();
    p1 * p1 * (xi - 1.0 + 4.0 * pt)
        + 4.0 * p1 * (pt + 1.0).powi(3)
        + 4.0 * p1 * p1 * pairwise_products(interferers)
}

/// Spec of the decoding statistic for user 1 in `scenario`.
pub fn scenario_spec(scenario: &Scenario) -> Result<DeltaSpec> {
    if !scenario.intended.is_shell() {
        return Err(Error::Unsupported("the statistic is defined for a shell intended codebook".into()));
    }
    let xi = scenario.noise.xi();
    let p1 = scenario.intended.power();
    if scenario.interferers.is_empty() {
        return p2p_spec(p1, xi);
    }
    let senders: Vec<(f64, bool)> =
        scenario.interferers.iter().map(|c| (c.power(), c.is_shell())).collect();
    mixed_interference_spec(p1, &senders, xi)
}

/// Exact one-sample Kolmogorov–Smirnov distance between the sample and the
/// standard normal law. Sorts `xs` in place.
pub fn ks_distance_normal(xs: &mut [f64]) -> f64 {
    xs.sort_by(|a, b| a.total_cmp(b));
    let t = xs.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        let cdf = gaussian_q(-x);
        d = d.max((i + 1) as f64 / t - cdf).max(cdf - i as f64 / t);
    }
    d
}

/// Dvoretzky–Kiefer–Wolfowitz bound: with probability at least `1 − alpha`
/// the KS distance of `trials` exact draws is below this value.
pub fn dkw_bound(trials: u64, alpha: f64) -> f64 {
    ((2.0 / alpha).ln() / (2.0 * trials as f64)).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CltRow {
    pub n: usize,
    pub ks_distance: f64,
    /// 99% DKW fluctuation level at this trial count.
    pub fluctuation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CltReport {
    pub sigma2: f64,
    pub trials: u64,
    pub seed: u64,
    pub rows: Vec<CltRow>,
    /// Least-squares slope of `ln KS` against `ln n`; absent with fewer than
    /// two blocklengths.
    pub decay_slope: Option<f64>,
}

/// Least-squares slope of `y` against `x`.
pub fn fit_slope(x: &[f64], y: &[f64]) -> f64 {
    let k = x.len() as f64;
    let mx = x.iter().sum::<f64>() / k;
    let my = y.iter().sum::<f64>() / k;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// Kolmogorov distance of `S_n/√(nσ²)` to the standard normal law at each
/// blocklength, where `sampler(n, stream)` returns one draw of the centered
/// sum statistic `S_n`.
pub fn clt_check<F>(sampler: F, sigma2: f64, n_values: &[usize], trials: u64, seed: u64) -> Result<CltReport>
where
    F: Fn(usize, &mut RandomStream) -> f64 + Sync + Send,
{
    if !(sigma2 > 0.0 && sigma2.is_finite()) {
        return domain(format!("sigma2 must be positive, got {sigma2}"));
    }
    if trials == 0 || n_values.is_empty() || n_values.contains(&0) {
        return domain("clt_check needs trials >= 1 and blocklengths >= 1");
    }
    let mut rows = Vec::with_capacity(n_values.len());
    for &n in n_values {
        let scale = 1.0 / (n as f64 * sigma2).sqrt();
        let mut xs = map_trials(trials, || (), |_, i| {
            sampler(n, &mut RandomStream::new(seed, i)) * scale
        });
        rows.push(CltRow { n, ks_distance: ks_distance_normal(&mut xs), fluctuation: dkw_bound(trials, 0.01) });
    }
    let decay_slope = (rows.len() >= 2).then(|| {
        let x: Vec<f64> = rows.iter().map(|r| (r.n as f64).ln()).collect();
        let y: Vec<f64> = rows.iter().map(|r| r.ks_distance.ln()).collect();
        fit_slope(&x, &y)
    });
    Ok(CltReport { sigma2, trials, seed, rows, decay_slope })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytics::{v_iid, v_shell, v_shell_interference, xi_prime};
    use proptest::prelude::*;
    use rand_distr::{Distribution, StandardNormal};

    #[test]
    fn basic_quadratic_form() {
        let spec = DeltaSpec {
            jacobian: vec![1.0, 0.0],
            covariance: vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            labels: vec![],
        };
        assert_eq!(delta_variance(&spec).unwrap(), 1.0);
        let bad = DeltaSpec { jacobian: vec![1.0], ..spec.clone() };
        assert_eq!(delta_variance(&bad).unwrap_err().category(), "dimension");
        let full = DeltaSpec {
            jacobian: vec![1.0, 2.0],
            covariance: vec![vec![2.0, 0.5], vec![0.5, 1.0]],
            labels: vec![],
        };
        assert_eq!(delta_variance(&full).unwrap(), 2.0 + 2.0 + 4.0);
    }

    #[test]
    fn p2p_values() {
        assert_eq!(delta_variance(&p2p_spec(1.0, 3.0).unwrap()).unwrap(), 6.0);
        assert_eq!(delta_variance(&p2p_spec(1.0, 1.0).unwrap()).unwrap(), 4.0);
        assert_eq!(p2p_spec(1.0, 3.0).unwrap().jacobian, vec![1.0, 2.0, 0.0]);
    }

    #[test]
    fn interference_values() {
        let one = interference_spec(10.0, &[1.0], 3.0).unwrap();
        assert_eq!(delta_variance(&one).unwrap(), 920.0);
        assert!(!one.labels.iter().any(|l| l.starts_with("A7")));
        let v = delta_variance(&one).unwrap() / interference_normalizer(10.0, &[1.0]);
        assert!((v - v_shell_interference(10.0, &[1.0], 3.0).unwrap()).abs() < 1e-15);
        let two = interference_spec(10.0, &[1.0, 1.0], 3.0).unwrap();
        assert_eq!(delta_variance(&two).unwrap(), 2480.0);
        assert_eq!(interference_spec(10.0, &[], 3.0).unwrap_err().category(), "domain");
    }

    #[test]
    fn iid_interferers_follow_effective_noise_route() {
        for &(p1, ref ps, xi) in &[(10.0, vec![1.0], 3.0), (3.0, vec![0.5, 2.0], 6.0), (1.0, vec![4.0], 1.0)] {
            let senders: Vec<(f64, bool)> = ps.iter().map(|&p| (p, false)).collect();
            let s2 = delta_variance(&mixed_interference_spec(p1, &senders, xi).unwrap()).unwrap();
            let (pb, pt) = sinr(p1, ps).unwrap();
            let xp = xi_prime(xi, pt).unwrap();
            let shell = v_shell(pb, xp).unwrap();
            assert!((s2 / interference_normalizer(p1, ps) - shell).abs() < 1e-12);
            // The i.i.d.-intended dispersion is the shell one plus the codeword-power term.
            let gap = v_iid(pb, xp).unwrap() - shell;
            assert!((gap - 0.5 * (pb / (pb + 1.0)).powi(2)).abs() < 1e-12);
        }
    }

    #[test]
    fn effective_kurtosis_by_sampling() {
        // Z̃ = (X₂ + Z)/√(P̃+1) with Gaussian X₂ of power P̃ and Laplace Z.
        let pt: f64 = 1.5;
        let mut s = RandomStream::new(3, 3);
        let noise = crate::noise::NoiseModel::laplace();
        let trials = 2_000_000;
        let mut z = vec![0.0; trials];
        noise.fill(&mut z, &mut s);
        let mut m4 = 0.0;
        for zi in &z {
            let g: f64 = StandardNormal.sample(&mut s);
            m4 += ((g * pt.sqrt() + zi) / (pt + 1.0f64).sqrt()).powi(4);
        }
        m4 /= trials as f64;
        assert!((m4 - xi_prime(6.0, pt).unwrap()).abs() < 0.05, "{m4}");
    }

    #[test]
    fn ks_of_exact_gaussians_is_small() {
        let trials = 20_000;
        let rep = clt_check(
            |n, s| (0..n).map(|_| -> f64 { StandardNormal.sample(s) }).sum::<f64>(),
            1.0,
            &[1, 10, 50],
            trials,
            5,
        )
        .unwrap();
        for row in &rep.rows {
            assert!(row.ks_distance <= 2.0 * dkw_bound(trials, 0.01), "{row:?}");
        }
        assert!(clt_check(|_, _| 0.0, 0.0, &[1], 10, 0).is_err());
    }

    #[test]
    fn slope_fit() {
        let x = [1.0, 2.0, 3.0];
        let y = [1.0, 3.0, 5.0];
        assert!((fit_slope(&x, &y) - 2.0).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn p2p_normalizes_to_v_shell(p in 1e-3f64..100.0, xi in 1.0f64..50.0) {
            let s2 = delta_variance(&p2p_spec(p, xi).unwrap()).unwrap();
            prop_assert!((s2 / p2p_normalizer(p) - v_shell(p, xi).unwrap()).abs() < 1e-12);
        }

        #[test]
        fn interference_normalizes(
            p1 in 0.01f64..50.0,
            ps in proptest::collection::vec(0.0f64..10.0, 1..6),
            xi in 1.0f64..20.0,
        ) {
            let s2 = delta_variance(&interference_spec(p1, &ps, xi).unwrap()).unwrap();
            prop_assert!((s2 - interference_sigma2(p1, &ps, xi)).abs() <= 1e-9 * s2);
            let v = s2 / interference_normalizer(p1, &ps);
            prop_assert!((v - v_shell_interference(p1, &ps, xi).unwrap()).abs() < 1e-12);
        }

        #[test]
        fn permutation_invariant(
            p1 in 0.01f64..50.0,
            ps in proptest::collection::vec(0.0f64..10.0, 2..6),
            xi in 1.0f64..20.0,
        ) {
            let a = delta_variance(&interference_spec(p1, &ps, xi).unwrap()).unwrap();
            let mut rev = ps.clone();
            rev.reverse();
            rev.rotate_left(1);
            let b = delta_variance(&interference_spec(p1, &rev, xi).unwrap()).unwrap();
            prop_assert!((a - b).abs() <= 1e-12 * a);
        }
    }
}
