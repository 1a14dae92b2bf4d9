use super::{check_common, Buffers, MCEstimate, Method, Scenario};
use crate::error::{Error, Result};
use crate::parallel::{map_trials, pairwise_sum};
use crate::rng::RandomStream;

/// Draws the decoding statistic
/// `(P₁+P̃+1)‖W‖² − (P̃+1)‖X₁+W‖²` with `W` the interference plus noise.
///
/// Without interferers this is `P‖Z‖² − nP − 2⟨X,Z⟩`. It has mean zero and
/// per-symbol variance given by the delta method.
#[derive(Debug, Clone)]
pub struct StatisticSampler {
    scenario: Scenario,
    a: f64,
    b: f64,
}

impl StatisticSampler {
    pub fn new(scenario: &Scenario) -> Result<Self> {
        if !scenario.intended.is_shell() {
            return Err(Error::Unsupported(
                "the decoding statistic is defined for a shell intended codebook".into(),
            ));
        }
        let pt: f64 = scenario.interferer_powers().iter().sum();
        let p1 = scenario.intended.power();
        Ok(Self { scenario: scenario.clone(), a: p1 + pt + 1.0, b: pt + 1.0 })
    }

    fn draw(&self, buf: &mut Buffers, stream: &mut RandomStream) -> f64 {
        self.scenario.realize(&mut buf.x, &mut buf.y, &mut buf.tmp, stream);
        let (mut w2, mut y2) = (0.0, 0.0);
        for (x, y) in buf.x.iter().zip(&buf.y) {
            let w = y - x;
            w2 += w * w;
            y2 += y * y;
        }
        self.a * w2 - self.b * y2
    }

    /// One draw at blocklength `n`.
    pub fn sample(&self, n: usize, stream: &mut RandomStream) -> f64 {
        self.draw(&mut Buffers::new(n), stream)
    }
}

/// One draw of the decoding statistic for `scenario`.
pub fn decoding_statistic(scenario: &Scenario, n: usize, stream: &mut RandomStream) -> Result<f64> {
    Ok(StatisticSampler::new(scenario)?.sample(n, stream))
}

/// Sample variance of the decoding statistic divided by `n`.
///
/// The standard error comes from the fourth central moment of the draws.
pub fn statistic_variance(scenario: &Scenario, n: usize, trials: u64, seed: u64) -> Result<MCEstimate> {
    check_common(scenario, n, trials)?;
    if trials < 4 {
        return Err(Error::Domain("statistic variance needs at least 4 trials".into()));
    }
    let sampler = StatisticSampler::new(scenario)?;
    let s = map_trials(trials, || Buffers::new(n), |b, i| {
        sampler.draw(b, &mut RandomStream::new(seed, i))
    });
    let t = trials as f64;
    let mean = pairwise_sum(&s) / t;
    let d2: Vec<f64> = s.iter().map(|v| (v - mean).powi(2)).collect();
    let d4: Vec<f64> = d2.iter().map(|v| v * v).collect();
    let m2 = pairwise_sum(&d2) / t;
    let m4 = pairwise_sum(&d4) / t;
    let var = m2 * t / (t - 1.0);
    let var_of_var = ((m4 - m2 * m2 * (t - 3.0) / (t - 1.0)) / t).max(0.0);
    let nf = n as f64;
    Ok(MCEstimate {
        estimate: var / nf,
        std_error: var_of_var.sqrt() / nf,
        trials,
        seed,
        method: Method::Statistic,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::NoiseModel;
    use crate::sampling::CodebookKind;

    #[test]
    fn matches_delta_method_small() {
        for (noise, target) in [(NoiseModel::gaussian(), 6.0), (NoiseModel::rademacher(), 4.0)] {
            let s = Scenario::point_to_point(CodebookKind::shell(1.0).unwrap(), noise);
            let e = statistic_variance(&s, 50, 20_000, 9).unwrap();
            assert!((e.estimate - target).abs() <= 5.0 * e.std_error, "{e:?}");
        }
    }

    #[test]
    fn iid_intended_is_unsupported() {
        let s = Scenario::point_to_point(CodebookKind::iid(1.0).unwrap(), NoiseModel::gaussian());
        assert_eq!(statistic_variance(&s, 10, 100, 0).unwrap_err().category(), "unsupported");
    }
}
