//! Small statistics toolbox shared by the verification suites: sample
//! mean/standard error, two-sample Kolmogorov-Smirnov, and chi-square
//! goodness of fit.

use num_complex::Complex64;
use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Sample mean and standard error of the mean.
pub fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    assert!(n >= 2, "need at least two samples");
    let mean = xs.iter().sum::<f64>() / n as f64;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0);
    (mean, (var / n as f64).sqrt())
}

/// Mean of complex samples with a scalar standard error combining both
/// coordinates: `sqrt((Var Re + Var Im) / n)`.
pub fn complex_mean_se(zs: &[Complex64]) -> (Complex64, f64) {
    let n = zs.len();
    assert!(n >= 2, "need at least two samples");
    let mean = zs.iter().sum::<Complex64>() / n as f64;
    let var = zs
        .iter()
        .map(|z| {
            let d = z - mean;
            d.re * d.re + d.im * d.im
        })
        .sum::<f64>()
        / (n as f64 - 1.0);
    (mean, (var / n as f64).sqrt())
}

/// Sample covariance of paired observations.
pub fn sample_cov(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    xs.iter()
        .zip(ys)
        .map(|(x, y)| (x - mx) * (y - my))
        .sum::<f64>()
        / (n - 1.0)
}

/// Standard error of the sample covariance, from the empirical variance of
/// the centered products.
pub fn cov_se(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let prods: Vec<f64> = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).collect();
    mean_se(&prods).1
}

/// Two-sample Kolmogorov-Smirnov statistic `sup |F_n - G_m|`.
pub fn ks_statistic(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(|x, y| x.partial_cmp(y).unwrap());
    b.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let (n, m) = (a.len(), b.len());
    assert!(n > 0 && m > 0);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < n && j < m {
        let x = a[i].min(b[j]);
        while i < n && a[i] <= x {
            i += 1;
        }
        while j < m && b[j] <= x {
            j += 1;
        }
        let gap = (i as f64 / n as f64 - j as f64 / m as f64).abs();
        if gap > d {
            d = gap;
        }
    }
    d
}

/// Asymptotic survival function of the Kolmogorov distribution,
/// `Q(λ) = 2 Σ_{k≥1} (-1)^{k-1} exp(-2 k² λ²)`.
fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda < 1e-3 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for k in 1..=100 {
        let term = (-2.0 * (k as f64).powi(2) * lambda * lambda).exp();
        sum += sign * term;
        sign = -sign;
        if term < 1e-12 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Two-sample KS test; returns `(statistic, asymptotic p-value)`.
///
/// Uses the Stephens small-sample correction of the effective sample size.
/// With ties (discrete data) the p-value is conservative.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> (f64, f64) {
    let d = ks_statistic(a, b);
    let ne = (a.len() * b.len()) as f64 / (a.len() + b.len()) as f64;
    let sqrt_ne = ne.sqrt();
    let lambda = (sqrt_ne + 0.12 + 0.11 / sqrt_ne) * d;
    (d, kolmogorov_sf(lambda))
}

/// One-sample KS statistic against a cdf.
pub fn ks_statistic_cdf<F: Fn(f64) -> f64>(a: &[f64], cdf: F) -> f64 {
    let mut a = a.to_vec();
    a.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let n = a.len() as f64;
    let mut d = 0.0f64;
    for (i, x) in a.iter().enumerate() {
        let f = cdf(*x);
        d = d.max((f - i as f64 / n).abs());
        d = d.max(((i + 1) as f64 / n - f).abs());
    }
    d
}

/// Chi-square goodness of fit for observed counts against expected counts.
///
/// Bins with expected count below `min_expected` are pooled into the last
/// bin. Returns `(statistic, degrees of freedom, p-value)`.
pub fn chi_square_gof(observed: &[f64], expected: &[f64], min_expected: f64) -> (f64, usize, f64) {
    assert_eq!(observed.len(), expected.len());
    let mut obs = Vec::new();
    let mut exp = Vec::new();
    let mut pool_o = 0.0;
    let mut pool_e = 0.0;
    for (&o, &e) in observed.iter().zip(expected) {
        if e < min_expected {
            pool_o += o;
            pool_e += e;
        } else {
            obs.push(o);
            exp.push(e);
        }
    }
    if pool_e > 0.0 {
        if pool_e >= min_expected || obs.is_empty() {
            obs.push(pool_o);
            exp.push(pool_e);
        } else {
            let last = obs.len() - 1;
            obs[last] += pool_o;
            exp[last] += pool_e;
        }
    }
    let stat: f64 = obs
        .iter()
        .zip(&exp)
        .map(|(o, e)| (o - e).powi(2) / e)
        .sum();
    let dof = obs.len().saturating_sub(1).max(1);
    let chi = ChiSquared::new(dof as f64).expect("positive dof");
    (stat, dof, 1.0 - chi.cdf(stat))
}

/// Standard normal cdf.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * statrs::function::erf::erfc(-x / std::f64::consts::SQRT_2)
}
