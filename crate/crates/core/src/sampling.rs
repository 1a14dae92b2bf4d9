//! Gaussian codebook ensembles: shell (uniform on the sphere of radius
//! `√(nP)`) and i.i.d. `N(0, P)`.
//!
//! Both ensembles implement [`CodebookEnsemble`], which pairs the codeword
//! sampler with the exact probability that an independent codeword beats the
//! transmitted one under nearest-neighbor decoding. [`CodebookKind`] is the
//! shared handle; ensembles are looked up by name through [`registry`].

use std::fmt;
use std::sync::{Arc, OnceLock};

use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::exact_error::{self, EmpiricalPowers};
use crate::registry::Registry;
use crate::rng::RandomStream;

pub trait CodebookEnsemble: Send + Sync + fmt::Debug {
    fn name(&self) -> &'static str;

    /// Per-symbol power `P`.
    fn power(&self) -> f64;

    /// Smallest blocklength the ensemble is defined for.
    fn min_blocklength(&self) -> usize {
        1
    }

    /// Write one codeword of length `out.len()` into `out`.
    fn fill(&self, out: &mut [f64], stream: &mut RandomStream);

    /// `ln Pr[‖y − X̄‖ ≤ ‖y − x‖]` for a fresh codeword `X̄`, which depends on
    /// `(x, y)` only through the empirical powers.
    fn ln_psi(&self, powers: &EmpiricalPowers) -> Result<f64>;

    /// `true` when every codeword has squared norm exactly `nP`.
    fn constant_norm(&self) -> bool;
}

#[derive(Debug, Clone, Copy)]
pub struct Shell {
    power: f64,
}

impl Shell {
    pub fn new(power: f64) -> Result<Self> {
        check_power(power)?;
        Ok(Self { power })
    }
}

impl CodebookEnsemble for Shell {
    fn name(&self) -> &'static str {
        "shell"
    }

    fn power(&self) -> f64 {
        self.power
    }

    fn min_blocklength(&self) -> usize {
        2
    }

    fn fill(&self, out: &mut [f64], stream: &mut RandomStream) {
        fill_shell(out, self.power, stream)
    }

    fn ln_psi(&self, powers: &EmpiricalPowers) -> Result<f64> {
        exact_error::ln_psi_shell(powers)
    }

    fn constant_norm(&self) -> bool {
        true
    }
}

#[derive(Debug, Clone, Copy)]
pub struct IidGaussian {
    power: f64,
}

impl IidGaussian {
    pub fn new(power: f64) -> Result<Self> {
        check_power(power)?;
        Ok(Self { power })
    }
}

impl CodebookEnsemble for IidGaussian {
    fn name(&self) -> &'static str {
        "iid"
    }

    fn power(&self) -> f64 {
        self.power
    }

    fn fill(&self, out: &mut [f64], stream: &mut RandomStream) {
        fill_iid(out, self.power, stream)
    }

    fn ln_psi(&self, powers: &EmpiricalPowers) -> Result<f64> {
        exact_error::ln_psi_iid(powers)
    }

    fn constant_norm(&self) -> bool {
        false
    }
}

fn check_power(power: f64) -> Result<()> {
    if power > 0.0 && power.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("codebook power must be positive, got {power}")))
    }
}

pub type CodebookFactory = fn(f64) -> Result<Arc<dyn CodebookEnsemble>>;

/// Codebook ensembles keyed by name.
pub fn registry() -> &'static Registry<CodebookFactory> {
    static REGISTRY: OnceLock<Registry<CodebookFactory>> = OnceLock::new();
    REGISTRY.get_or_init(|| {
        let shell: CodebookFactory = |p| Ok(Arc::new(Shell::new(p)?));
        let iid: CodebookFactory = |p| Ok(Arc::new(IidGaussian::new(p)?));
        Registry::new("codebook")
            .with("shell", shell)
            .with("iid", iid)
            .with("iid-gaussian", iid)
    })
}

/// A codebook ensemble together with its power.
#[derive(Clone)]
pub struct CodebookKind {
    ensemble: Arc<dyn CodebookEnsemble>,
}

impl CodebookKind {
    pub fn new(ensemble: Arc<dyn CodebookEnsemble>) -> Self {
        Self { ensemble }
    }

    pub fn shell(power: f64) -> Result<Self> {
        Ok(Self::new(Arc::new(Shell::new(power)?)))
    }

    pub fn iid(power: f64) -> Result<Self> {
        Ok(Self::new(Arc::new(IidGaussian::new(power)?)))
    }

    pub fn by_name(name: &str, power: f64) -> Result<Self> {
        Ok(Self::new((registry().get(name)?)(power)?))
    }

    pub fn name(&self) -> &'static str {
        self.ensemble.name()
    }

    pub fn power(&self) -> f64 {
        self.ensemble.power()
    }

    pub fn is_shell(&self) -> bool {
        self.ensemble.constant_norm()
    }

    pub fn ensemble(&self) -> &dyn CodebookEnsemble {
        self.ensemble.as_ref()
    }

    pub fn fill(&self, out: &mut [f64], stream: &mut RandomStream) {
        self.ensemble.fill(out, stream)
    }

    pub fn ln_psi(&self, powers: &EmpiricalPowers) -> Result<f64> {
        self.ensemble.ln_psi(powers)
    }
}

impl fmt::Debug for CodebookKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(P={})", self.name(), self.power())
    }
}

pub fn fill_iid(out: &mut [f64], power: f64, stream: &mut RandomStream) {
    let sd = power.sqrt();
    for x in out.iter_mut() {
        let g: f64 = StandardNormal.sample(stream);
        *x = sd * g;
    }
}

/// Normalized Gaussian vector scaled to squared norm `n·power`.
pub fn fill_shell(out: &mut [f64], power: f64, stream: &mut RandomStream) {
    let n = out.len();
    if n == 1 {
        fill_iid(out, 1.0, stream);
        out[0] = power.sqrt().copysign(out[0]);
        return;
    }
    loop {
        fill_iid(out, 1.0, stream);
        let norm2: f64 = out.iter().map(|v| v * v).sum();
        if norm2 > 0.0 {
            let scale = (n as f64 * power / norm2).sqrt();
            out.iter_mut().for_each(|v| *v *= scale);
            return;
        }
    }
}

fn check_args(n: usize, power: f64) -> Result<()> {
    if n == 0 {
        return Err(Error::Domain("blocklength must be at least 1".into()));
    }
    check_power(power)
}

pub fn sample_shell(n: usize, power: f64, stream: &mut RandomStream) -> Result<Vec<f64>> {
    check_args(n, power)?;
    let mut out = vec![0.0; n];
    fill_shell(&mut out, power, stream);
    Ok(out)
}

pub fn sample_iid(n: usize, power: f64, stream: &mut RandomStream) -> Result<Vec<f64>> {
    check_args(n, power)?;
    let mut out = vec![0.0; n];
    fill_iid(&mut out, power, stream);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_sphere() {
        for i in 0..50 {
            let x = sample_shell(1, 4.0, &mut RandomStream::new(9, i)).unwrap();
            assert!(x[0] == 2.0 || x[0] == -2.0, "{x:?}");
        }
    }

    #[test]
    fn shell_norm_constraint() {
        for &n in &[1usize, 2, 7, 100, 10_000] {
            for &p in &[0.3, 1.0, 10.0] {
                let x = sample_shell(n, p, &mut RandomStream::new(n as u64, 1)).unwrap();
                let norm2: f64 = x.iter().map(|v| v * v).sum();
                let target = n as f64 * p;
                assert!((norm2 - target).abs() <= 1e-10 * target, "n={n} P={p}");
            }
        }
        let x = sample_shell(100, 1.0, &mut RandomStream::new(0, 0)).unwrap();
        let norm2: f64 = x.iter().map(|v| v * v).sum();
        assert!((norm2 - 100.0).abs() < 1e-8);
    }

    #[test]
    fn shell_coordinate_second_moment() {
        let trials = 1_000_000u64;
        let mut s = RandomStream::new(42, 0);
        let mut buf = [0.0; 3];
        let mut acc = 0.0;
        for _ in 0..trials {
            fill_shell(&mut buf, 1.0, &mut s);
            acc += buf[0] * buf[0];
        }
        assert!((acc / trials as f64 - 1.0).abs() < 0.01);
    }

    #[test]
    fn iid_variance_and_kurtosis() {
        let n = 1_000_000;
        let x = sample_iid(n, 2.0, &mut RandomStream::new(5, 5)).unwrap();
        let var = x.iter().map(|v| v * v).sum::<f64>() / n as f64;
        assert!((var - 2.0).abs() < 0.02);
        let y = sample_iid(n, 1.0, &mut RandomStream::new(5, 6)).unwrap();
        let m4 = y.iter().map(|v| v.powi(4)).sum::<f64>() / n as f64;
        assert!((m4 - 3.0).abs() < 0.05);
    }

    #[test]
    fn iid_is_reproducible() {
        let a = sample_iid(1, 1.0, &mut RandomStream::new(123, 0)).unwrap();
        let b = sample_iid(1, 1.0, &mut RandomStream::new(123, 0)).unwrap();
        assert_eq!(a[0].to_bits(), b[0].to_bits());
    }

    #[test]
    fn rejects_bad_arguments() {
        let mut s = RandomStream::new(0, 0);
        assert!(sample_shell(0, 1.0, &mut s).is_err());
        assert!(sample_iid(3, 0.0, &mut s).is_err());
        assert!(CodebookKind::by_name("shell", -1.0).is_err());
        assert!(CodebookKind::by_name("lattice", 1.0).is_err());
        assert_eq!(CodebookKind::by_name("IID", 2.0).unwrap().name(), "iid");
    }
}
