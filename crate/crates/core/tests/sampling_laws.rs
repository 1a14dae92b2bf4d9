//! Distributional checks of the codebook samplers against exact laws.

use nndisp::exact_error::shell_tail;
use nndisp::sampling::{sample_iid, sample_shell};
use nndisp::RandomStream;

/// Two-sample Kolmogorov–Smirnov statistic.
fn ks_two_sample(a: &mut [f64], b: &mut [f64]) -> f64 {
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// Orthonormal rotation of R^n from Gram–Schmidt on a fixed random matrix.
fn rotation(n: usize) -> Vec<Vec<f64>> {
    let mut s = RandomStream::new(77, 0);
    let mut q: Vec<Vec<f64>> = Vec::new();
    while q.len() < n {
        let mut v = sample_iid(n, 1.0, &mut s).unwrap();
        for u in &q {
            let d: f64 = u.iter().zip(&v).map(|(a, b)| a * b).sum();
            v.iter_mut().zip(u).for_each(|(x, y)| *x -= d * y);
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v.iter_mut().for_each(|x| *x /= norm);
        q.push(v);
    }
    q
}

#[test]
fn rotated_shell_samples_have_the_same_first_coordinate_law() {
    let (n, draws) = (6, 100_000u64);
    let r = rotation(n);
    let mut plain = Vec::with_capacity(draws as usize);
    let mut rotated = Vec::with_capacity(draws as usize);
    for i in 0..draws {
        let x = sample_shell(n, 2.0, &mut RandomStream::new(1, i)).unwrap();
        plain.push(x[0]);
        let y = sample_shell(n, 2.0, &mut RandomStream::new(2, i)).unwrap();
        rotated.push(r[0].iter().zip(&y).map(|(a, b)| a * b).sum());
    }
    let d = ks_two_sample(&mut plain, &mut rotated);
    // 1% critical value: c(α)·√((m+n)/(mn)) with c(0.01) = 1.628
    let crit = 1.628 * (2.0 / draws as f64).sqrt();
    assert!(d < crit, "KS {d} >= {crit}");
}

#[test]
fn rotation_is_orthonormal() {
    let r = rotation(6);
    for (i, a) in r.iter().enumerate() {
        for (j, b) in r.iter().enumerate() {
            let d: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
            assert!((d - if i == j { 1.0 } else { 0.0 }).abs() < 1e-12);
        }
    }
}

#[test]
fn shell_coordinate_tail_matches_exact_law() {
    let (n, p, draws) = (8, 1.0, 200_000u64);
    let xs: Vec<f64> = (0..draws).map(|i| sample_shell(n, p, &mut RandomStream::new(3, i)).unwrap()[0]).collect();
    let radius = (n as f64 * p).sqrt();
    for k in 0..10 {
        let t = radius * (-0.9 + 0.2 * k as f64);
        let exact = shell_tail(t, n, p).unwrap();
        let freq = xs.iter().filter(|&&x| x > t).count() as f64 / draws as f64;
        let se = (exact * (1.0 - exact) / draws as f64).sqrt();
        assert!((freq - exact).abs() <= 5.0 * se, "t={t}: {freq} vs {exact}");
    }
}

#[test]
fn shell_norm_holds_across_dimensions() {
    for n in [1, 2, 7, 100, 10_000] {
        let x = sample_shell(n, 3.0, &mut RandomStream::new(4, n as u64)).unwrap();
        let norm2: f64 = x.iter().map(|v| v * v).sum();
        assert!((norm2 / (3.0 * n as f64) - 1.0).abs() < 1e-10, "n={n}");
    }
}
