//! Scalar additive noise laws with unit second moment.
//!
//! Each law implements [`NoiseLaw`]; [`NoiseModel`] is the shared handle the
//! rest of the crate passes around. Built-in laws are looked up by name
//! through [`registry`], and arbitrary discrete laws can be given as a
//! [`FiniteTable`].

use std::fmt;
use std::sync::{Arc, OnceLock};

use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::registry::Registry;
use crate::rng::RandomStream;

const NORMALIZATION_TOL: f64 = 1e-12;

/// Raw moments of a noise law.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseMoments {
    pub m1: f64,
    pub m2: f64,
    /// Fourth moment `E[Z⁴]`.
    pub xi: f64,
    pub m6: f64,
}

pub trait NoiseLaw: Send + Sync + fmt::Debug {
    fn name(&self) -> &str;

    fn moments(&self) -> NoiseMoments;

    fn sample(&self, rng: &mut RandomStream) -> f64;

    fn fill(&self, out: &mut [f64], rng: &mut RandomStream) {
        for z in out {
            *z = self.sample(rng);
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Gaussian;

impl NoiseLaw for Gaussian {
    fn name(&self) -> &str {
        "gaussian"
    }

    fn moments(&self) -> NoiseMoments {
        NoiseMoments { m1: 0.0, m2: 1.0, xi: 3.0, m6: 15.0 }
    }

    fn sample(&self, rng: &mut RandomStream) -> f64 {
        StandardNormal.sample(rng)
    }
}

/// Laplace law with scale `1/√2`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Laplace;

impl NoiseLaw for Laplace {
    fn name(&self) -> &str {
        "laplace"
    }

    fn moments(&self) -> NoiseMoments {
        // E[Z^{2k}] = (2k)! b^{2k}, b² = 1/2
        NoiseMoments { m1: 0.0, m2: 1.0, xi: 6.0, m6: 90.0 }
    }

    fn sample(&self, rng: &mut RandomStream) -> f64 {
        let e: f64 = Exp1.sample(rng);
        let magnitude = e * std::f64::consts::FRAC_1_SQRT_2;
        if rng.random::<bool>() {
            magnitude
        } else {
            -magnitude
        }
    }
}

/// ±1 with equal probability.
#[derive(Debug, Clone, Copy, Default)]
pub struct Rademacher;

impl NoiseLaw for Rademacher {
    fn name(&self) -> &str {
        "rademacher"
    }

    fn moments(&self) -> NoiseMoments {
        NoiseMoments { m1: 0.0, m2: 1.0, xi: 1.0, m6: 1.0 }
    }

    fn sample(&self, rng: &mut RandomStream) -> f64 {
        if rng.random::<bool>() {
            1.0
        } else {
            -1.0
        }
    }
}

/// Uniform on `[−√3, √3]`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Uniform;

impl NoiseLaw for Uniform {
    fn name(&self) -> &str {
        "uniform"
    }

    fn moments(&self) -> NoiseMoments {
        NoiseMoments { m1: 0.0, m2: 1.0, xi: 9.0 / 5.0, m6: 27.0 / 7.0 }
    }

    fn sample(&self, rng: &mut RandomStream) -> f64 {
        let half_width = 3f64.sqrt();
        rng.random_range(-half_width..half_width)
    }
}

/// Discrete law on finitely many support points.
///
/// Serialized as a JSON list of `[value, probability]` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<(f64, f64)>", into = "Vec<(f64, f64)>")]
pub struct FiniteTable {
    values: Vec<f64>,
    probs: Vec<f64>,
    cumulative: Vec<f64>,
    moments: NoiseMoments,
}

impl FiniteTable {
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Config("noise table has no support points".into()));
        }
        if points.iter().any(|&(v, p)| !v.is_finite() || !p.is_finite() || p < 0.0) {
            return Err(Error::Config(
                "noise table entries must be finite with nonnegative probabilities".into(),
            ));
        }
        let total: f64 = points.iter().map(|&(_, p)| p).sum();
        if (total - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::Config(format!("noise table probabilities sum to {total}, not 1")));
        }
        let raw = |k: i32| points.iter().map(|&(v, p)| p * v.powi(k)).sum::<f64>();
        let moments = NoiseMoments { m1: raw(1), m2: raw(2), xi: raw(4), m6: raw(6) };
        if (moments.m2 - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::NonNormalizedNoise(format!(
                "E[Z^2] = {} differs from 1 by more than {NORMALIZATION_TOL:e}",
                moments.m2
            )));
        }
        assert!(
            moments.xi >= 1.0 - 1e-9,
            "fourth moment below one contradicts unit second moment"
        );
        let (values, probs): (Vec<f64>, Vec<f64>) = points.into_iter().unzip();
        let cumulative = probs
            .iter()
            .scan(0.0, |acc, &p| {
                *acc += p;
                Some(*acc)
            })
            .collect();
        Ok(Self { values, probs, cumulative, moments })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| match e.classify() {
            serde_json::error::Category::Data => {
                // try_from errors are surfaced as data errors; keep their text
                let msg = e.to_string();
                if msg.contains("non-normalized noise") {
                    Error::NonNormalizedNoise(msg)
                } else {
                    Error::Config(msg)
                }
            }
            _ => Error::Config(format!("noise table is not valid JSON: {e}")),
        })
    }

    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.values.iter().copied().zip(self.probs.iter().copied())
    }
}

impl TryFrom<Vec<(f64, f64)>> for FiniteTable {
    type Error = Error;

    fn try_from(points: Vec<(f64, f64)>) -> Result<Self> {
        FiniteTable::new(points)
    }
}

impl From<FiniteTable> for Vec<(f64, f64)> {
    fn from(t: FiniteTable) -> Self {
        t.points().collect()
    }
}

impl NoiseLaw for FiniteTable {
    fn name(&self) -> &str {
        "table"
    }

    fn moments(&self) -> NoiseMoments {
        self.moments
    }

    fn sample(&self, rng: &mut RandomStream) -> f64 {
        let u: f64 = rng.random();
        // first index whose cumulative weight exceeds u
        let idx = self.cumulative.partition_point(|&c| c <= u);
        self.values[idx.min(self.values.len() - 1)]
    }
}

pub type NoiseFactory = fn() -> Arc<dyn NoiseLaw>;

/// The built-in noise laws, keyed by name.
pub fn registry() -> &'static Registry<NoiseFactory> {
    static REGISTRY: OnceLock<Registry<NoiseFactory>> = OnceLock::new();
    REGISTRY.get_or_init(|| {
        Registry::new("noise")
            .with("gaussian", (|| Arc::new(Gaussian)) as NoiseFactory)
            .with("laplace", || Arc::new(Laplace))
            .with("rademacher", || Arc::new(Rademacher))
            .with("uniform", || Arc::new(Uniform))
    })
}

/// Shared handle to a noise law. Cheap to clone and safe to share across
/// worker threads.
#[derive(Clone)]
pub struct NoiseModel {
    law: Arc<dyn NoiseLaw>,
}

impl NoiseModel {
    pub fn new(law: Arc<dyn NoiseLaw>) -> Self {
        let m = law.moments();
        assert!(m.xi >= 1.0 - 1e-9, "noise law {} has fourth moment below one", law.name());
        Self { law }
    }

    pub fn by_name(name: &str) -> Result<Self> {
        Ok(Self::new((registry().get(name)?)()))
    }

    pub fn gaussian() -> Self {
        Self::new(Arc::new(Gaussian))
    }

    pub fn laplace() -> Self {
        Self::new(Arc::new(Laplace))
    }

    pub fn rademacher() -> Self {
        Self::new(Arc::new(Rademacher))
    }

    pub fn uniform() -> Self {
        Self::new(Arc::new(Uniform))
    }

    pub fn table(points: Vec<(f64, f64)>) -> Result<Self> {
        Ok(Self::new(Arc::new(FiniteTable::new(points)?)))
    }

    pub fn name(&self) -> &str {
        self.law.name()
    }

    pub fn moments(&self) -> NoiseMoments {
        self.law.moments()
    }

    pub fn xi(&self) -> f64 {
        self.law.moments().xi
    }

    pub fn law(&self) -> &dyn NoiseLaw {
        self.law.as_ref()
    }

    pub fn fill(&self, out: &mut [f64], stream: &mut RandomStream) {
        self.law.fill(out, stream)
    }
}

impl fmt::Debug for NoiseModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("NoiseModel").field(&self.law).finish()
    }
}

pub fn moments(model: &NoiseModel) -> NoiseMoments {
    model.moments()
}

/// `n` i.i.d. draws from `model`.
pub fn sample_noise(model: &NoiseModel, n: usize, stream: &mut RandomStream) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::Domain("noise length must be at least 1".into()));
    }
    let mut out = vec![0.0; n];
    model.fill(&mut out, stream);
    Ok(out)
}
