//! Monte Carlo estimators of the ensemble error probability, the decoding
//! statistic's variance, and concentration of the empirical powers.
//!
//! The semi-analytic estimator samples only the channel realization (the
//! transmitted codeword, the interferers and the noise) and averages the exact
//! conditional error over the intended codebook ensemble. Brute-force decoding
//! over a materialized codebook is kept as a small-scale oracle.

mod statistic;
mod typical;

use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact_error::{conditional_error_log, EmpiricalPowers};
use crate::noise::NoiseModel;
use crate::parallel::{map_trials, mean_and_se};
use crate::registry::Registry;
use crate::rng::RandomStream;
use crate::sampling::CodebookKind;

pub use statistic::{decoding_statistic, statistic_variance, StatisticSampler};
pub use typical::{typical_set_diagnostic, TypicalSetReport};

/// Largest codebook the brute-force decoder will materialize.
pub const BRUTE_FORCE_MAX_M: u64 = 1 << 14;

/// Channel seen by receiver 1: the intended sender, any interferers and the
/// additive noise.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub intended: CodebookKind,
    pub interferers: Vec<CodebookKind>,
    pub noise: NoiseModel,
    noise_scale: f64,
}

impl Scenario {
    pub fn new(intended: CodebookKind, interferers: Vec<CodebookKind>, noise: NoiseModel) -> Self {
        Self { intended, interferers, noise, noise_scale: 1.0 }
    }

    pub fn point_to_point(intended: CodebookKind, noise: NoiseModel) -> Self {
        Self::new(intended, Vec::new(), noise)
    }

    #[cfg(test)]
    pub(crate) fn noiseless(mut self) -> Self {
        self.noise_scale = 0.0;
        self
    }

    pub fn interferer_powers(&self) -> Vec<f64> {
        self.interferers.iter().map(|c| c.power()).collect()
    }

    pub fn summary(&self) -> ScenarioSummary {
        ScenarioSummary {
            codebook: self.intended.name().into(),
            power: self.intended.power(),
            interferers: self
                .interferers
                .iter()
                .map(|c| InterfererSummary { codebook: c.name().into(), power: c.power() })
                .collect(),
            noise: self.noise.name().into(),
            xi: self.noise.xi(),
        }
    }

    fn min_blocklength(&self) -> usize {
        self.intended.ensemble().min_blocklength()
    }

    /// Fill `x` with the intended codeword and `y` with the channel output.
    fn realize(&self, x: &mut [f64], y: &mut [f64], tmp: &mut [f64], stream: &mut RandomStream) {
        self.intended.fill(x, stream);
        y.copy_from_slice(x);
        for c in &self.interferers {
            c.fill(tmp, stream);
            y.iter_mut().zip(tmp.iter()).for_each(|(a, b)| *a += b);
        }
        self.noise.fill(tmp, stream);
        let s = self.noise_scale;
        y.iter_mut().zip(tmp.iter()).for_each(|(a, b)| *a += s * b);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterfererSummary {
    pub codebook: String,
    pub power: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSummary {
    pub codebook: String,
    pub power: f64,
    pub interferers: Vec<InterfererSummary>,
    pub noise: String,
    pub xi: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    SemiAnalytic,
    BruteForce,
    Statistic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MCEstimate {
    pub estimate: f64,
    pub std_error: f64,
    pub trials: u64,
    pub seed: u64,
    pub method: Method,
}

/// Per-trial scratch buffers.
struct Buffers {
    x: Vec<f64>,
    y: Vec<f64>,
    tmp: Vec<f64>,
    cw: Vec<f64>,
}

impl Buffers {
    fn new(n: usize) -> Self {
        Self { x: vec![0.0; n], y: vec![0.0; n], tmp: vec![0.0; n], cw: vec![0.0; n] }
    }
}

fn check_common(scenario: &Scenario, n: usize, trials: u64) -> Result<()> {
    if trials == 0 {
        return Err(Error::Domain("at least one trial is required".into()));
    }
    if n == 0 {
        return Err(Error::Domain("blocklength must be at least 1".into()));
    }
    if n < scenario.min_blocklength() {
        return Err(Error::Unsupported(format!(
            "{} codebook needs n >= {}",
            scenario.intended.name(),
            scenario.min_blocklength()
        )));
    }
    Ok(())
}

/// Per-trial conditional errors of the semi-analytic estimator, in trial
/// order.
pub fn semi_analytic_samples(
    scenario: &Scenario,
    n: usize,
    log_m: f64,
    trials: u64,
    seed: u64,
) -> Result<Vec<f64>> {
    check_common(scenario, n, trials)?;
    if log_m.is_nan() {
        return Err(Error::Domain("log M is NaN".into()));
    }
    let p = scenario.intended.power();
    let out: Vec<Result<f64>> = map_trials(trials, || Buffers::new(n), |b, i| {
        let mut stream = RandomStream::new(seed, i);
        scenario.realize(&mut b.x, &mut b.y, &mut b.tmp, &mut stream);
        let powers = EmpiricalPowers::from_vectors(&b.x, &b.y, p)?;
        let ln_psi = scenario.intended.ln_psi(&powers)?;
        Ok(conditional_error_log(ln_psi, log_m))
    });
    out.into_iter().collect()
}

/// Ensemble error probability with `M = e^{log_m}` codewords, averaging the
/// exact conditional error given each sampled channel realization.
pub fn simulate_semi_analytic(
    scenario: &Scenario,
    n: usize,
    log_m: f64,
    trials: u64,
    seed: u64,
) -> Result<MCEstimate> {
    let v = semi_analytic_samples(scenario, n, log_m, trials, seed)?;
    let (estimate, std_error) = mean_and_se(&v);
    Ok(MCEstimate { estimate, std_error, trials, seed, method: Method::SemiAnalytic })
}

/// Error frequency of nearest-neighbor decoding over a fresh codebook of
/// `m` codewords per trial. Message 1 is always sent.
pub fn simulate_brute_force(
    scenario: &Scenario,
    n: usize,
    m: u64,
    trials: u64,
    seed: u64,
) -> Result<MCEstimate> {
    check_common(scenario, n, trials)?;
    if m == 0 {
        return Err(Error::Domain("codebook must contain at least one codeword".into()));
    }
    if m > BRUTE_FORCE_MAX_M {
        return Err(Error::Guard(format!(
            "M = {m} exceeds the brute-force limit {BRUTE_FORCE_MAX_M}; use the semi-analytic method"
        )));
    }
    let v = map_trials(trials, || Buffers::new(n), |b, i| {
        let mut stream = RandomStream::new(seed, i);
        scenario.realize(&mut b.x, &mut b.y, &mut b.tmp, &mut stream);
        let d0: f64 = b.x.iter().zip(&b.y).map(|(a, c)| (c - a) * (c - a)).sum();
        for _ in 1..m {
            scenario.intended.fill(&mut b.cw, &mut stream);
            let d: f64 = b.cw.iter().zip(&b.y).map(|(a, c)| (c - a) * (c - a)).sum();
            if d < d0 {
                return 1.0;
            }
        }
        0.0
    });
    let (estimate, std_error) = mean_and_se(&v);
    Ok(MCEstimate { estimate, std_error, trials, seed, method: Method::BruteForce })
}

/// Converts a natural-log codebook size into the integer used by brute force.
pub fn codebook_size(log_m: f64) -> Result<u64> {
    let m = log_m.exp().round();
    if !(m >= 1.0) || m > BRUTE_FORCE_MAX_M as f64 {
        return Err(Error::Guard(format!(
            "M = e^{log_m} is outside [1, {BRUTE_FORCE_MAX_M}] for brute force; use the semi-analytic method"
        )));
    }
    Ok(m as u64)
}

/// An error-probability estimator selectable by name.
pub trait ErrorEstimator: Send + Sync {
    fn name(&self) -> &'static str;
    fn method(&self) -> Method;
    fn estimate(&self, scenario: &Scenario, n: usize, log_m: f64, trials: u64, seed: u64)
        -> Result<MCEstimate>;
}

pub struct SemiAnalytic;

impl ErrorEstimator for SemiAnalytic {
    fn name(&self) -> &'static str {
        "semi"
    }

    fn method(&self) -> Method {
        Method::SemiAnalytic
    }

    fn estimate(&self, scenario: &Scenario, n: usize, log_m: f64, trials: u64, seed: u64) -> Result<MCEstimate> {
        simulate_semi_analytic(scenario, n, log_m, trials, seed)
    }
}

pub struct BruteForce;

impl ErrorEstimator for BruteForce {
    fn name(&self) -> &'static str {
        "brute"
    }

    fn method(&self) -> Method {
        Method::BruteForce
    }

    fn estimate(&self, scenario: &Scenario, n: usize, log_m: f64, trials: u64, seed: u64) -> Result<MCEstimate> {
        simulate_brute_force(scenario, n, codebook_size(log_m)?, trials, seed)
    }
}

pub type EstimatorFactory = fn() -> Arc<dyn ErrorEstimator>;

/// Error-probability estimators keyed by name.
pub fn registry() -> &'static Registry<EstimatorFactory> {
    static REGISTRY: OnceLock<Registry<EstimatorFactory>> = OnceLock::new();
    REGISTRY.get_or_init(|| {
        let semi: EstimatorFactory = || Arc::new(SemiAnalytic);
        let brute: EstimatorFactory = || Arc::new(BruteForce);
        Registry::new("estimator")
            .with("semi", semi)
            .with("semi-analytic", semi)
            .with("brute", brute)
            .with("brute-force", brute)
    })
}

pub fn estimator(name: &str) -> Result<Arc<dyn ErrorEstimator>> {
    Ok((registry().get(name)?)())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parallel::with_workers;

    fn p2p(shell: bool, noise: NoiseModel) -> Scenario {
        let cb = if shell { CodebookKind::shell(1.0) } else { CodebookKind::iid(1.0) };
        Scenario::point_to_point(cb.unwrap(), noise)
    }

    #[test]
    fn single_codeword_never_errs() {
        let s = p2p(true, NoiseModel::gaussian());
        let e = simulate_semi_analytic(&s, 16, 0.0, 100, 1).unwrap();
        assert_eq!((e.estimate, e.std_error), (0.0, 0.0));
        let e = simulate_brute_force(&s, 16, 1, 100, 1).unwrap();
        assert_eq!(e.estimate, 0.0);
    }

    #[test]
    fn noiseless_brute_force_is_error_free() {
        let s = p2p(true, NoiseModel::gaussian()).noiseless();
        let e = simulate_brute_force(&s, 8, 2, 2000, 4).unwrap();
        assert_eq!(e.estimate, 0.0);
    }

    #[test]
    fn guards_and_unsupported() {
        let s = p2p(true, NoiseModel::gaussian());
        let err = simulate_brute_force(&s, 8, BRUTE_FORCE_MAX_M + 1, 10, 0).unwrap_err();
        assert_eq!(err.category(), "guard");
        assert!(err.to_string().contains("semi-analytic"));
        let err = simulate_semi_analytic(&s, 1, 2.0, 10, 0).unwrap_err();
        assert_eq!(err.category(), "unsupported");
        assert!(simulate_semi_analytic(&p2p(false, NoiseModel::gaussian()), 1, 2.0, 10, 0).is_ok());
        assert_eq!(codebook_size(100.0).unwrap_err().category(), "guard");
        assert_eq!(codebook_size(16f64.ln()).unwrap(), 16);
    }

    #[test]
    fn huge_codebooks_stay_finite() {
        let s = p2p(true, NoiseModel::gaussian());
        let e = simulate_semi_analytic(&s, 200, 5000.0, 50, 2).unwrap();
        assert_eq!(e.estimate, 1.0);
        let e = simulate_semi_analytic(&s, 200, 1.0, 50, 2).unwrap();
        assert!(e.estimate < 1e-20);
    }

    #[test]
    fn semi_agrees_with_brute_at_small_scale() {
        for noise in [NoiseModel::gaussian(), NoiseModel::rademacher()] {
            let s = p2p(true, noise);
            let a = simulate_semi_analytic(&s, 8, 4f64.ln(), 20_000, 10).unwrap();
            let b = simulate_brute_force(&s, 8, 4, 20_000, 11).unwrap();
            let tol = 3.0 * (a.std_error.powi(2) + b.std_error.powi(2)).sqrt();
            assert!((a.estimate - b.estimate).abs() <= tol, "{a:?} {b:?}");
        }
    }

    #[test]
    fn monotone_in_codebook_size() {
        let s = p2p(true, NoiseModel::laplace());
        let mut last = vec![0.0; 500];
        for log_m in [0.7, 2.0, 5.0, 9.0] {
            let v = semi_analytic_samples(&s, 20, log_m, 500, 3).unwrap();
            assert!(v.iter().zip(&last).all(|(a, b)| a >= b));
            last = v;
        }
    }

    #[test]
    fn deterministic_across_workers() {
        let s = Scenario::new(
            CodebookKind::shell(2.0).unwrap(),
            vec![CodebookKind::iid(0.5).unwrap()],
            NoiseModel::uniform(),
        );
        let run = |k| with_workers(k, || simulate_semi_analytic(&s, 30, 6.0, 3000, 8).unwrap()).unwrap();
        let a = run(1);
        for k in [2, 5] {
            let b = run(k);
            assert_eq!(a.estimate.to_bits(), b.estimate.to_bits());
            assert_eq!(a.std_error.to_bits(), b.std_error.to_bits());
        }
    }

    #[test]
    fn estimator_registry() {
        assert_eq!(estimator("SEMI").unwrap().method(), Method::SemiAnalytic);
        assert_eq!(estimator("brute-force").unwrap().name(), "brute");
        assert_eq!(estimator("exact").err().unwrap().category(), "config");
        let s = p2p(false, NoiseModel::gaussian());
        let e = estimator("brute").unwrap().estimate(&s, 8, 2f64.ln(), 100, 0).unwrap();
        assert_eq!(e.method, Method::BruteForce);
    }
}
