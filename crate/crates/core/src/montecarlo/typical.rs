use serde::{Deserialize, Serialize};

use super::Buffers;
use crate::error::{domain, Result};
use crate::noise::NoiseModel;
use crate::parallel::{map_trials, pairwise_sum};
use crate::rng::RandomStream;
use crate::sampling::fill_shell;

/// Frequencies with which `(P̂_Y, P̂_Z)` leaves the typical set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TypicalSetReport {
    pub n: usize,
    pub eta: f64,
    pub trials: u64,
    pub seed: u64,
    /// `|P̂_Y − (P+1)| > √(c_y ln n / n)` with `c_y = ξ − 1 + 4P`.
    pub p_y_out: f64,
    /// `|P̂_Z − 1| > √(c_z ln n / n)` with `c_z = ξ − 1`.
    pub p_z_out: f64,
    /// `P̂_Y + P − P̂_Z ≤ η`.
    pub q_out: f64,
    /// Any of the three.
    pub total_out: f64,
    /// `exp(−n(2P−η)²/(8P))`, the large-deviation part of the bound on
    /// `q_out`.
    pub q_exponential_bound: f64,
}

/// Out-of-set frequencies for a shell codebook of power `p` over `noise`.
pub fn typical_set_diagnostic(
    p: f64,
    noise: &NoiseModel,
    n: usize,
    eta: f64,
    trials: u64,
    seed: u64,
) -> Result<TypicalSetReport> {
    if !(p > 0.0 && p.is_finite()) {
        return domain(format!("power must be positive, got {p}"));
    }
    if !(eta > 0.0 && eta < 2.0 * p) {
        return domain(format!("eta must lie in (0, 2P) = (0, {}), got {eta}", 2.0 * p));
    }
    if n == 0 || trials == 0 {
        return domain("blocklength and trial count must be positive");
    }
    let xi = noise.xi();
    let nf = n as f64;
    let ln_n = nf.ln();
    let dy = ((xi - 1.0 + 4.0 * p) * ln_n / nf).sqrt();
    let dz = ((xi - 1.0) * ln_n / nf).sqrt();
    let flags = map_trials(trials, || Buffers::new(n), |b, i| {
        let mut stream = RandomStream::new(seed, i);
        fill_shell(&mut b.x, p, &mut stream);
        noise.fill(&mut b.tmp, &mut stream);
        let (mut sy, mut sz) = (0.0, 0.0);
        for (x, z) in b.x.iter().zip(&b.tmp) {
            sy += (x + z) * (x + z);
            sz += z * z;
        }
        let (py, pz) = (sy / nf, sz / nf);
        let out_y = (py - (p + 1.0)).abs() > dy;
        let out_z = (pz - 1.0).abs() > dz;
        let out_q = py + p - pz <= eta;
        [out_y as u8 as f64, out_z as u8 as f64, out_q as u8 as f64, (out_y || out_z || out_q) as u8 as f64]
    });
    let freq = |k: usize| pairwise_sum(&flags.iter().map(|f| f[k]).collect::<Vec<_>>()) / trials as f64;
    Ok(TypicalSetReport {
        n,
        eta,
        trials,
        seed,
        p_y_out: freq(0),
        p_z_out: freq(1),
        q_out: freq(2),
        total_out: freq(3),
        q_exponential_bound: (-nf * (2.0 * p - eta).powi(2) / (8.0 * p)).exp(),
    })
}
