//! Discrete step reinforcement: reinforced random walks, paired n-skeletons
//! of a Lévy path, the ratio-normalized martingale `a_n Ŝ_n` with its
//! predictable quadratic variation, and empirical convergence experiments.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::coupling;
use crate::measure::{LevyMeasureSpec, LevyTriplet, MemoryParam};
use crate::path_synthesis::{self, PathError};
use crate::stats;

/// A noise reinforced walk together with its innovation record.
///
/// `steps[k]` is the k-th candidate innovation `X_{k+1}` (always drawn),
/// `reinforced[k]` the realized step `X̂_{k+1}`. A repetition copies an
/// earlier reinforced step picked uniformly by index; `roots[k]` resolves
/// the copy chain to the innovation index actually repeated, so that
/// `Ŝ_n = Σ_k N_k(n) X_k` holds exactly with `N_k(n) = #{m <= n : roots[m] = k}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReinforcedWalk {
    pub steps: Vec<f64>,
    pub reinforced: Vec<f64>,
    pub roots: Vec<usize>,
    pub is_repetition: Vec<bool>,
    pub picks: Vec<Option<usize>>,
    pub p: f64,
}

impl ReinforcedWalk {
    pub fn len(&self) -> usize {
        self.reinforced.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reinforced.is_empty()
    }

    /// Partial sums `Ŝ_1, ..., Ŝ_n`.
    pub fn positions(&self) -> Vec<f64> {
        self.reinforced
            .iter()
            .scan(0.0, |acc, x| {
                *acc += x;
                Some(*acc)
            })
            .collect()
    }

    /// Repetition counts `N_k(n)` for `k = 1..n` at the final time.
    pub fn counts(&self) -> Vec<u64> {
        let mut n_k = vec![0u64; self.len()];
        for &r in &self.roots {
            n_k[r] += 1;
        }
        n_k
    }
}

/// Paired n-skeletons `(S, Ŝ)` of one Lévy path on mesh `1/n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkeletonPair {
    pub n: usize,
    /// Partial sums of the raw increments, `S_k = ξ_{k/n}`.
    pub s: Vec<f64>,
    pub walk: ReinforcedWalk,
}

/// One row of a convergence experiment: skeleton marginals at `probe_time`
/// against synthesized process marginals, plus a joint characteristic
/// function probe at fixed arguments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub n: usize,
    pub probe_time: f64,
    pub ks_distance: f64,
    pub ks_p_value: f64,
    pub joint_gap: f64,
    pub joint_se: f64,
}

/// Reinforces a fixed step sequence: `X̂_1 = X_1`; thereafter each step is
/// a repetition with probability `p` (uniform index pick over the earlier
/// reinforced steps) and the next fresh step otherwise.
pub fn reinforce_steps<R: Rng + ?Sized>(
    x: &[f64],
    p: MemoryParam,
    rng: &mut R,
) -> ReinforcedWalk {
    assert!(!x.is_empty(), "need at least one step");
    let n = x.len();
    let mut reinforced = Vec::with_capacity(n);
    let mut roots = Vec::with_capacity(n);
    let mut is_repetition = Vec::with_capacity(n);
    let mut picks = Vec::with_capacity(n);
    reinforced.push(x[0]);
    roots.push(0);
    is_repetition.push(false);
    picks.push(None);
    for k in 1..n {
        if rng.random::<f64>() < p.get() {
            let j = rng.random_range(0..k);
            reinforced.push(reinforced[j]);
            roots.push(roots[j]);
            is_repetition.push(true);
            picks.push(Some(j));
        } else {
            reinforced.push(x[k]);
            roots.push(k);
            is_repetition.push(false);
            picks.push(None);
        }
    }
    ReinforcedWalk {
        steps: x.to_vec(),
        reinforced,
        roots,
        is_repetition,
        picks,
        p: p.get(),
    }
}

/// One increment of the Lévy process over a window of length `h`. Jumps
/// require a finite-mass measure (compound Poisson regime).
pub fn sample_levy_increment<R: Rng + ?Sized>(
    triplet: &LevyTriplet,
    h: f64,
    rng: &mut R,
) -> Result<f64, PathError> {
    let mut v = triplet.drift * h;
    if triplet.gaussian_variance > 0.0 {
        let z: f64 = rng.sample(StandardNormal);
        v += (triplet.gaussian_variance * h).sqrt() * z;
    }
    match &triplet.levy_measure {
        LevyMeasureSpec::FiniteAtoms(atoms) if atoms.is_empty() => {}
        spec => {
            if !spec.total_mass_finite() {
                return Err(PathError::InfiniteMeasure);
            }
            let mass = spec.mass_in(crate::measure::Band::all());
            if mass > 0.0 {
                let count = path_synthesis::poisson_count(mass * h, rng);
                for _ in 0..count {
                    v += spec.sample_jump(crate::measure::Band::all(), rng)?;
                }
            }
        }
    }
    Ok(v)
}

/// Samples the n-skeleton increments of one Lévy path on `[0,1]` and
/// reinforces them, sharing the step source between both walks.
pub fn skeleton_pair<R: Rng + ?Sized>(
    triplet: &LevyTriplet,
    n: usize,
    p: MemoryParam,
    rng: &mut R,
) -> Result<SkeletonPair, PathError> {
    assert!(n >= 1, "need at least one mesh cell");
    let h = 1.0 / n as f64;
    let mut x = Vec::with_capacity(n);
    for _ in 0..n {
        x.push(sample_levy_increment(triplet, h, rng)?);
    }
    let walk = reinforce_steps(&x, p, rng);
    let s = x
        .iter()
        .scan(0.0, |acc, v| {
            *acc += v;
            Some(*acc)
        })
        .collect();
    Ok(SkeletonPair { n, s, walk })
}

/// Coefficients `a_k = Π_{j=1}^{k-1} j/(j+p)` for `k = 1..n` (`a_1 = 1`).
fn ratio_coefficients(n: usize, p: f64) -> Vec<f64> {
    let mut a = Vec::with_capacity(n);
    let mut cur = 1.0f64;
    for k in 1..=n {
        a.push(cur);
        cur *= k as f64 / (k as f64 + p);
    }
    a
}

/// The martingale `M_n = a_n Ŝ_n`. The step law's mean must be supplied by
/// the caller; a nonzero mean breaks the martingale property and is refused.
pub fn bercu_martingale(
    walk: &ReinforcedWalk,
    p: MemoryParam,
    step_mean: f64,
) -> Result<Vec<f64>, PathError> {
    if step_mean.abs() >= 1e-8 {
        return Err(PathError::NotCentered(step_mean));
    }
    let a = ratio_coefficients(walk.len(), p.get());
    Ok(walk
        .positions()
        .iter()
        .zip(&a)
        .map(|(s, ak)| ak * s)
        .collect())
}

/// Predictable quadratic variation
/// `⟨M,M⟩_n = σ² + Σ_{k=2}^n a_k² ((1-p)σ² - p² Ŝ_{k-1}²/(k-1)² + p V̂_{k-1}/(k-1))`
/// with `V̂_m = Σ_{j<=m} X̂_j²`, using the same `a_k` normalization as
/// [`bercu_martingale`].
pub fn predictable_qv(
    walk: &ReinforcedWalk,
    p: MemoryParam,
    sigma2: f64,
) -> Result<Vec<f64>, PathError> {
    assert!(sigma2.is_finite() && sigma2 > 0.0, "need a positive variance");
    let pv = p.get();
    let a = ratio_coefficients(walk.len(), pv);
    let s = walk.positions();
    let mut v_hat = 0.0f64;
    let mut acc = sigma2;
    let mut out = Vec::with_capacity(walk.len());
    for k in 1..=walk.len() {
        if k >= 2 {
            let m = (k - 1) as f64;
            v_hat += walk.reinforced[k - 2].powi(2);
            acc += a[k - 1].powi(2)
                * ((1.0 - pv) * sigma2 - pv * pv * s[k - 2].powi(2) / (m * m)
                    + pv * v_hat / m);
        }
        out.push(acc);
    }
    Ok(out)
}

/// For each mesh count `n`, compares the skeleton marginal `Ŝ_{⌊n t⌋}` at
/// the probe times against marginals of the synthesized process by a
/// two-sample KS test, and probes `E[e^{i(λ S_n + β Ŝ_n)}]` against the
/// closed joint characteristic function at `(λ, β) = (0.5, 0.5)`.
pub fn convergence_experiment<R: Rng + ?Sized>(
    triplet: &LevyTriplet,
    p: MemoryParam,
    n_list: &[usize],
    probes: &[f64],
    n_paths: usize,
    rng: &mut R,
) -> Result<Vec<ConvergenceRow>, PathError> {
    const LAMBDA: f64 = 0.5;
    const BETA: f64 = 0.5;
    let mut grid = vec![0.0];
    grid.extend(probes.iter().cloned().filter(|&t| t > 0.0 && t < 1.0));
    grid.push(1.0);
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    let mut reference: Vec<Vec<f64>> = vec![Vec::with_capacity(n_paths); probes.len()];
    for _ in 0..n_paths {
        let path = path_synthesis::synthesize_nrlp(triplet, p, 1e-3, &grid, rng)?;
        for (slot, &t) in reference.iter_mut().zip(probes) {
            slot.push(path.value(t));
        }
    }
    let (cf_target, cf_se) =
        coupling::joint_charfn(triplet, p, &[1.0, 1.0], &[LAMBDA, 0.0], &[0.0, BETA], 20_000, rng)?;
    let mut rows = Vec::new();
    for &n in n_list {
        let mut marginals: Vec<Vec<f64>> = vec![Vec::with_capacity(n_paths); probes.len()];
        let mut cf_draws = Vec::with_capacity(n_paths);
        for _ in 0..n_paths {
            let pair = skeleton_pair(triplet, n, p, rng)?;
            let positions = pair.walk.positions();
            for (slot, &t) in marginals.iter_mut().zip(probes) {
                let k = ((n as f64 * t) as usize).clamp(1, n);
                slot.push(positions[k - 1]);
            }
            cf_draws.push(Complex64::new(
                0.0,
                LAMBDA * pair.s[n - 1] + BETA * positions[n - 1],
            )
            .exp());
        }
        let (cf_emp, cf_emp_se) = stats::complex_mean_se(&cf_draws);
        for ((samples, refs), &t) in marginals.iter().zip(&reference).zip(probes) {
            let (ks, p_value) = stats::ks_two_sample(samples, refs);
            rows.push(ConvergenceRow {
                n,
                probe_time: t,
                ks_distance: ks,
                ks_p_value: p_value,
                joint_gap: (cf_emp - cf_target).norm(),
                joint_se: (cf_emp_se.powi(2) + cf_se.powi(2)).sqrt(),
            });
        }
    }
    Ok(rows)
}
