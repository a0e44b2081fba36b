//! Pathwise joint construction of a Lévy process with its noise reinforced
//! version: the base path with a full jump record, Bernoulli thinning plus
//! decoration of its jump measure, the correlated Brownian pair, and the
//! joint finite-dimensional characteristic function.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::measure::{admissibility_violation, Band, LevyTriplet, MemoryParam};
use crate::path_synthesis::{PathError, SamplePath};
use crate::point_process::{self, MarkedAtom, MarkedPointPattern, Origin};
use crate::yule_simon;

/// Brownian motion with its reinforced version on a shared grid. The pair
/// is built from `β_t = (1-p) B_t + sqrt(1-(1-p)²) W_t` so that
/// `E[B_t B̂_s] = (t∧s)^{1-p} s^p`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoupledBrownianPair {
    pub grid: Vec<f64>,
    pub b: Vec<f64>,
    pub b_hat: Vec<f64>,
    pub p: f64,
}

/// Fate of one base jump under the thinning.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JumpFate {
    pub innovation_id: u64,
    pub time: f64,
    pub mark: f64,
    pub kept: bool,
}

/// A coupled pair `(ξ, ξ̂)` with the shared-jump bookkeeping.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoupledPaths {
    pub base: SamplePath,
    pub reinforced: SamplePath,
    pub jump_map: Vec<JumpFate>,
}

/// Standard Lévy path on `(0, horizon]` with every jump above `ε` recorded
/// as an innovation-candidate atom; small jumps in `[ε, 1)` compensated.
pub fn sample_levy_with_jumps<R: Rng + ?Sized>(
    triplet: &LevyTriplet,
    horizon: f64,
    eps: f64,
    grid: &[f64],
    rng: &mut R,
) -> Result<SamplePath, PathError> {
    if !(0.0 < eps && eps < 1.0) {
        return Err(PathError::EpsilonRange(eps));
    }
    let spec = &triplet.levy_measure;
    let comp_drift = spec.mean_in(Band::new(eps, 1.0));
    let q = triplet.gaussian_variance.sqrt();
    let mut bm = 0.0f64;
    let mut continuous = Vec::with_capacity(grid.len());
    for (i, &t) in grid.iter().enumerate() {
        if i > 0 {
            let h = t - grid[i - 1];
            let z: f64 = rng.sample(StandardNormal);
            bm += h.sqrt() * z;
        }
        continuous.push((triplet.drift - comp_drift) * t + q * bm);
    }
    let mut jumps = MarkedPointPattern::empty(horizon);
    let mut next_id = 0u64;
    for band in point_process::ring_partition(spec, eps)? {
        let rate = spec.mass_in(band);
        if rate <= 0.0 {
            continue;
        }
        let mut t = 0.0f64;
        loop {
            t += rng.sample::<f64, _>(Exp1) / rate;
            if t > horizon {
                break;
            }
            let mark = spec.sample_jump(band, rng)?;
            jumps.atoms.push(MarkedAtom {
                time: t,
                mark,
                origin: Origin::Innovation,
                innovation_id: next_id,
                innovation_time: t,
            });
            next_id += 1;
        }
    }
    jumps.sort_atoms();
    Ok(SamplePath {
        grid: grid.to_vec(),
        continuous,
        jumps,
        centering: triplet.drift + spec.mean_in(Band::new(1.0, f64::INFINITY)),
    })
}

/// Thins a base jump record by Bernoulli(1-p) and decorates each kept jump,
/// producing an NRPPP with the same characteristic measure.
pub fn reinforce_jumps<R: Rng + ?Sized>(
    jumps: &MarkedPointPattern,
    p: MemoryParam,
    horizon: f64,
    rng: &mut R,
) -> Result<(MarkedPointPattern, Vec<JumpFate>), PathError> {
    let mut out = MarkedPointPattern::empty(horizon);
    let mut fates = Vec::new();
    for atom in jumps.atoms.iter().filter(|a| a.origin == Origin::Innovation) {
        let kept = rng.random::<f64>() < 1.0 - p.get();
        fates.push(JumpFate {
            innovation_id: atom.innovation_id,
            time: atom.time,
            mark: atom.mark,
            kept,
        });
        if kept {
            point_process::push_family(
                &mut out,
                atom.innovation_id,
                atom.time,
                atom.mark,
                horizon,
                p,
                rng,
            )?;
        }
    }
    out.sort_atoms();
    Ok((out, fates))
}

/// Samples `(B, B̂)` exactly in law at the grid points. Per cell the pair
/// `(ΔB, ∫ s^{-p} dB)` is bivariate Gaussian with
/// `Cov = (b^{1-p} - a^{1-p})/(1-p)` and `Var(∫) = (b^{1-2p} - a^{1-2p})/(1-2p)`;
/// the `W` integral only enters through its marginal.
pub fn sample_coupled_bm<R: Rng + ?Sized>(
    p: MemoryParam,
    grid: &[f64],
    rng: &mut R,
) -> Result<CoupledBrownianPair, PathError> {
    if p.get() >= 0.5 {
        return Err(PathError::NrbmRequiresHalf(p.get()));
    }
    if grid.len() < 2 || grid[0] != 0.0 || grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(PathError::BadGrid);
    }
    let pv = p.get();
    let e1 = 1.0 - pv;
    let e2 = 1.0 - 2.0 * pv;
    let kappa = (1.0 - e1 * e1).sqrt();
    let mut b = vec![0.0f64];
    let mut b_hat = vec![0.0f64];
    let mut acc_b = 0.0f64;
    let mut acc_int = 0.0f64;
    for w in grid.windows(2) {
        let h = w[1] - w[0];
        let var_i = (w[1].powf(e2) - w[0].powf(e2)) / e2;
        let cov = (w[1].powf(e1) - w[0].powf(e1)) / e1;
        let z1: f64 = rng.sample(StandardNormal);
        let z2: f64 = rng.sample(StandardNormal);
        let z3: f64 = rng.sample(StandardNormal);
        let db = h.sqrt() * z1;
        let i_b = cov / h.sqrt() * z1 + (var_i - cov * cov / h).max(0.0).sqrt() * z2;
        let i_w = var_i.sqrt() * z3;
        acc_b += db;
        acc_int += e1 * i_b + kappa * i_w;
        b.push(acc_b);
        b_hat.push(w[1].powf(pv) * acc_int);
    }
    Ok(CoupledBrownianPair {
        grid: grid.to_vec(),
        b,
        b_hat,
        p: pv,
    })
}

/// Full coupled pair on [0,1]: `ξ` from [`sample_levy_with_jumps`], `ξ̂`
/// from the thinned and decorated jump record plus the coupled NRBM, both
/// sharing drift and small-jump compensation.
pub fn sample_coupled_pair<R: Rng + ?Sized>(
    triplet: &LevyTriplet,
    p: MemoryParam,
    eps: f64,
    grid: &[f64],
    rng: &mut R,
) -> Result<CoupledPaths, PathError> {
    if let Some(v) = admissibility_violation(p, triplet) {
        return Err(PathError::Inadmissible(v));
    }
    let horizon = *grid.last().ok_or(PathError::BadGrid)?;
    let q = triplet.gaussian_variance.sqrt();
    let bm_pair = if triplet.gaussian_variance > 0.0 {
        Some(sample_coupled_bm(p, grid, rng)?)
    } else {
        None
    };
    // Base Brownian values are taken from the coupled pair, so build the
    // base path without its own Gaussian part and add q·B afterwards.
    let diffusion_free = LevyTriplet {
        gaussian_variance: 0.0,
        ..triplet.clone()
    };
    let mut base = sample_levy_with_jumps(&diffusion_free, horizon, eps, grid, rng)?;
    if let Some(pair) = &bm_pair {
        for (c, b) in base.continuous.iter_mut().zip(&pair.b) {
            *c += q * b;
        }
    }
    let (reinforced_jumps, fates) = reinforce_jumps(&base.jumps, p, horizon, rng)?;
    let comp_drift = triplet.levy_measure.mean_in(Band::new(eps, 1.0));
    let continuous: Vec<f64> = grid
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            (triplet.drift - comp_drift) * t
                + bm_pair.as_ref().map_or(0.0, |pair| q * pair.b_hat[i])
        })
        .collect();
    let reinforced = SamplePath {
        grid: grid.to_vec(),
        continuous,
        jumps: reinforced_jumps,
        centering: base.centering,
    };
    Ok(CoupledPaths {
        base,
        reinforced,
        jump_map: fates,
    })
}

/// Joint characteristic function of `(ξ_{t_j}, ξ̂_{t_j})_j` at arguments
/// `(λ_j, β_j)`:
/// `exp{ t·p·E[Ψ(Σ λ_j 1{U <= t_j/t})]
///      + t·(1-p)·E[Ψ(Σ (λ_j 1{Y(t_j/t) >= 1} + β_j Y(t_j/t)))] }`,
/// both expectations by Monte Carlo. Returns the value and a propagated
/// scalar standard error.
pub fn joint_charfn<R: Rng + ?Sized>(
    triplet: &LevyTriplet,
    p: MemoryParam,
    times: &[f64],
    lambdas: &[f64],
    betas: &[f64],
    n_mc: usize,
    rng: &mut R,
) -> Result<(Complex64, f64), PathError> {
    assert!(
        times.len() == lambdas.len() && times.len() == betas.len(),
        "probe vectors must share a length"
    );
    let t = times.iter().cloned().fold(0.0f64, f64::max);
    assert!(t > 0.0, "need a positive probe time");
    let mut cache: std::collections::HashMap<u64, Complex64> = std::collections::HashMap::new();
    let mut psi = |arg: f64, triplet: &LevyTriplet| -> Result<Complex64, PathError> {
        if let Some(v) = cache.get(&arg.to_bits()) {
            return Ok(*v);
        }
        let v = triplet.char_exponent(arg)?;
        cache.insert(arg.to_bits(), v);
        Ok(v)
    };
    let mut first = Vec::with_capacity(n_mc);
    let mut second = Vec::with_capacity(n_mc);
    for _ in 0..n_mc {
        let u = 1.0 - rng.random::<f64>();
        let ys = yule_simon::sample_ys_path(p, rng)?;
        let mut arg1 = 0.0f64;
        let mut arg2 = 0.0f64;
        for ((&tj, &lj), &bj) in times.iter().zip(lambdas).zip(betas) {
            let s = tj / t;
            if u <= s {
                arg1 += lj;
            }
            let y = ys.value(s) as f64;
            if y >= 1.0 {
                arg2 += lj;
            }
            arg2 += bj * y;
        }
        first.push(psi(arg1, triplet)?);
        second.push(psi(arg2, triplet)?);
    }
    let (m1, se1) = crate::stats::complex_mean_se(&first);
    let (m2, se2) = crate::stats::complex_mean_se(&second);
    let exponent = t * p.get() * m1 + t * (1.0 - p.get()) * m2;
    let se_exp = ((t * p.get() * se1).powi(2) + (t * (1.0 - p.get()) * se2).powi(2)).sqrt();
    let value = exponent.exp();
    Ok((value, value.norm() * se_exp))
}
