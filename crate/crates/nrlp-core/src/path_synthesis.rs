//! NRLP sample paths: noise reinforced Brownian motion on an exact grid,
//! reinforced compound Poisson paths, compensated Yule-Simon series with
//! truncation, the full reinforced Lévy-Itô synthesis, and the
//! martingale/compensator diagnostics attached to them.

use rand::Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::measure::{
    admissibility_violation, Band, LevyMeasureSpec, LevyTriplet, MeasureError, MemoryParam,
};
use crate::point_process::{MarkedPointPattern, Origin, PointProcessError};
use crate::yule_simon::{self, YsError};

#[derive(Debug, Error)]
pub enum PathError {
    #[error("NRBM requires p < 1/2, got p = {0}")]
    NrbmRequiresHalf(f64),
    #[error("epsilon must lie in (0,1), got {0}")]
    EpsilonRange(f64),
    #[error("total mass is infinite, use synthesize_nrlp")]
    InfiniteMeasure,
    #[error("inadmissible memory parameter: {0}")]
    Inadmissible(String),
    #[error("martingale requires centered exponent, Ψ'(0) residue = {0:e}")]
    NotCentered(f64),
    #[error("grid must start at 0 and be strictly increasing")]
    BadGrid,
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error(transparent)]
    Point(#[from] PointProcessError),
    #[error(transparent)]
    Ys(#[from] YsError),
}

/// One rcll path: a continuous part stored on a grid (linear in between)
/// plus a marked jump pattern. `value(t)` adds the marks of atoms up to `t`.
///
/// `centering` records `a + ∫_{uncompensated} x Λ(dx)` for the construction
/// that produced the path: the derivative `-i Ψ'(0)` of its exponent, zero
/// exactly when `t^{-p} ξ̂_t` is a martingale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplePath {
    pub grid: Vec<f64>,
    pub continuous: Vec<f64>,
    pub jumps: MarkedPointPattern,
    pub centering: f64,
}

impl SamplePath {
    fn continuous_at(&self, t: f64) -> f64 {
        let g = &self.grid;
        if t <= g[0] {
            return self.continuous[0];
        }
        if t >= *g.last().unwrap() {
            return *self.continuous.last().unwrap();
        }
        let i = g.partition_point(|&x| x <= t) - 1;
        let (t0, t1) = (g[i], g[i + 1]);
        let w = (t - t0) / (t1 - t0);
        self.continuous[i] * (1.0 - w) + self.continuous[i + 1] * w
    }

    pub fn value(&self, t: f64) -> f64 {
        let jump_sum: f64 = self
            .jumps
            .atoms
            .iter()
            .take_while(|a| a.time <= t)
            .map(|a| a.mark)
            .sum();
        self.continuous_at(t) + jump_sum
    }

    /// `sup_{s <= t_max} |value(s)|`, exact for piecewise-linear continuous
    /// parts: candidates are grid points, atom times with their left limits,
    /// and `t_max` itself.
    pub fn sup_abs(&self, t_max: f64) -> f64 {
        let mut sup: f64 = self.continuous[0].abs();
        let mut jump_sum = 0.0f64;
        for a in &self.jumps.atoms {
            if a.time > t_max {
                break;
            }
            let cont = self.continuous_at(a.time);
            sup = sup.max((cont + jump_sum).abs());
            jump_sum += a.mark;
            sup = sup.max((cont + jump_sum).abs());
        }
        for (&g, _) in self.grid.iter().zip(&self.continuous) {
            if g > t_max {
                break;
            }
            sup = sup.max(self.value(g).abs());
        }
        sup.max(self.value(t_max).abs())
    }
}

/// Noise reinforced Brownian motion `t^p ∫_0^t s^{-p} dB_s` on a grid,
/// defined for `p < 1/2`; `Var B̂_t = t/(1-2p)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NrbmPath {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub p: f64,
}

fn check_grid(grid: &[f64]) -> Result<(), PathError> {
    if grid.len() < 2 || grid[0] != 0.0 || grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(PathError::BadGrid);
    }
    Ok(())
}

/// Uniform grid of `n` cells on [0,1].
pub fn uniform_grid(n: usize) -> Vec<f64> {
    (0..=n).map(|i| i as f64 / n as f64).collect()
}

pub(crate) fn poisson_count<R: Rng + ?Sized>(lambda: f64, rng: &mut R) -> u64 {
    if lambda <= 0.0 {
        return 0;
    }
    Poisson::<f64>::new(lambda).expect("positive rate").sample(rng) as u64
}

/// Samples the NRBM exactly in law at the grid points: per cell the Wiener
/// integral increment `∫ s^{-p} dB` is centered Gaussian with variance
/// `(t_{i+1}^{1-2p} - t_i^{1-2p})/(1-2p)`, and `B̂(t_k) = t_k^p Σ_{i<k} I_i`.
pub fn sample_nrbm<R: Rng + ?Sized>(
    p: MemoryParam,
    grid: &[f64],
    rng: &mut R,
) -> Result<NrbmPath, PathError> {
    if p.get() >= 0.5 {
        return Err(PathError::NrbmRequiresHalf(p.get()));
    }
    check_grid(grid)?;
    let e = 1.0 - 2.0 * p.get();
    let mut values = Vec::with_capacity(grid.len());
    values.push(0.0);
    let mut acc = 0.0f64;
    for w in grid.windows(2) {
        let var = (w[1].powf(e) - w[0].powf(e)) / e;
        let z: f64 = rng.sample(StandardNormal);
        acc += var.sqrt() * z;
        values.push(w[1].powf(p.get()) * acc);
    }
    Ok(NrbmPath {
        grid: grid.to_vec(),
        values,
        p: p.get(),
    })
}

/// Poissonian Yule-Simon sum on [0,1]: `Poisson((1-p)Λ(ℝ))` independent
/// pairs of a mark and a Yule-Simon path, `ξ̂_t = Σ x_i Y_i(t)`.
pub fn sample_reinforced_cpp<R: Rng + ?Sized>(
    spec: &LevyMeasureSpec,
    p: MemoryParam,
    rng: &mut R,
) -> Result<SamplePath, PathError> {
    let mass = spec.mass_in(Band::all());
    if !mass.is_finite() {
        return Err(PathError::InfiniteMeasure);
    }
    let mut path = ys_sum_pattern(spec, p, Band::all(), mass, rng)?;
    path.centering = spec.mean_in(Band::all());
    Ok(path)
}

/// Shared Poissonian construction over one mark band, uncompensated.
fn ys_sum_pattern<R: Rng + ?Sized>(
    spec: &LevyMeasureSpec,
    p: MemoryParam,
    band: Band,
    mass: f64,
    rng: &mut R,
) -> Result<SamplePath, PathError> {
    let mut jumps = MarkedPointPattern::empty(1.0);
    if mass > 0.0 {
        let n = poisson_count((1.0 - p.get()) * mass, rng);
        for id in 0..n {
            let mark = spec.sample_jump(band, rng)?;
            let ys = yule_simon::sample_ys_path(p, rng)?;
            for (i, &s) in ys.jumps.iter().enumerate() {
                jumps.atoms.push(crate::point_process::MarkedAtom {
                    time: s,
                    mark,
                    origin: if i == 0 {
                        Origin::Innovation
                    } else {
                        Origin::Repetition
                    },
                    innovation_id: id,
                    innovation_time: ys.first_jump(),
                });
            }
        }
        jumps.sort_atoms();
    }
    Ok(SamplePath {
        grid: vec![0.0, 1.0],
        continuous: vec![0.0, 0.0],
        jumps,
        centering: 0.0,
    })
}

/// Compensated Yule-Simon series on the band `ε <= |x| < hi`:
/// `Σ 1{band} x_i Y_i(t) - t ∫_band x Λ(dx)`. Zero mean at every `t`.
pub fn sample_compensated_band<R: Rng + ?Sized>(
    spec: &LevyMeasureSpec,
    p: MemoryParam,
    band: Band,
    rng: &mut R,
) -> Result<SamplePath, PathError> {
    let mass = spec.mass_in(band);
    if !mass.is_finite() {
        return Err(PathError::InfiniteMeasure);
    }
    let drift = spec.mean_in(band);
    let mut path = ys_sum_pattern(spec, p, band, mass, rng)?;
    path.continuous = vec![0.0, -drift];
    Ok(path)
}

/// The small-jump block `ξ̂^{(3)}_{ε,1}` on [0,1].
pub fn sample_compensated_series<R: Rng + ?Sized>(
    spec: &LevyMeasureSpec,
    p: MemoryParam,
    eps: f64,
    rng: &mut R,
) -> Result<SamplePath, PathError> {
    if !(0.0 < eps && eps < 1.0) {
        return Err(PathError::EpsilonRange(eps));
    }
    sample_compensated_band(spec, p, Band::new(eps, 1.0), rng)
}

/// Full reinforced Lévy-Itô synthesis on [0,1]:
/// `a·t + q·B̂_t + (large jumps |x| >= 1) + (compensated series on [ε,1))`,
/// the three random blocks independent.
pub fn synthesize_nrlp<R: Rng + ?Sized>(
    triplet: &LevyTriplet,
    p: MemoryParam,
    eps: f64,
    grid: &[f64],
    rng: &mut R,
) -> Result<SamplePath, PathError> {
    if let Some(v) = admissibility_violation(p, triplet) {
        return Err(PathError::Inadmissible(v));
    }
    if !(0.0 < eps && eps < 1.0) {
        return Err(PathError::EpsilonRange(eps));
    }
    check_grid(grid)?;
    let spec = &triplet.levy_measure;
    let small = Band::new(eps, 1.0);
    let large = Band::new(1.0, f64::INFINITY);
    let comp_drift = spec.mean_in(small);
    let nrbm = if triplet.gaussian_variance > 0.0 {
        Some(sample_nrbm(p, grid, rng)?)
    } else {
        None
    };
    let q = triplet.gaussian_variance.sqrt();
    let continuous: Vec<f64> = grid
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            (triplet.drift - comp_drift) * t + nrbm.as_ref().map_or(0.0, |b| q * b.values[i])
        })
        .collect();
    let mut jumps = MarkedPointPattern::empty(1.0);
    let mut next_id = 0u64;
    for band in [large, small] {
        let mass = spec.mass_in(band);
        let block = ys_sum_pattern(spec, p, band, mass, rng)?;
        for mut atom in block.jumps.atoms {
            atom.innovation_id += next_id;
            jumps.atoms.push(atom);
        }
        next_id = jumps
            .atoms
            .iter()
            .map(|a| a.innovation_id + 1)
            .max()
            .unwrap_or(next_id);
    }
    jumps.sort_atoms();
    Ok(SamplePath {
        grid: grid.to_vec(),
        continuous,
        jumps,
        centering: triplet.drift + spec.mean_in(large),
    })
}

/// `M_t = t^{-p} ξ̂_t` evaluated at the given times (0 maps to 0); requires
/// the generating exponent to be centered, `Ψ'(0) = 0`.
pub fn martingale_transform(
    path: &SamplePath,
    p: MemoryParam,
    times: &[f64],
) -> Result<Vec<f64>, PathError> {
    if path.centering.abs() >= 1e-8 {
        return Err(PathError::NotCentered(path.centering));
    }
    Ok(times
        .iter()
        .map(|&t| {
            if t == 0.0 {
                0.0
            } else {
                t.powf(-p.get()) * path.value(t)
            }
        })
        .collect())
}

/// Compensation-formula residual
/// `N̂_A(t) - (1-p) t Λ(A) - p ∫_0^t N̂_A(s-)/s ds`,
/// the time integral evaluated exactly on the atom-time partition.
pub fn compensator_residual(
    pattern: &MarkedPointPattern,
    band: Band,
    spec: &LevyMeasureSpec,
    p: MemoryParam,
    t: f64,
) -> Result<f64, PathError> {
    let mass = spec.mass_in(band);
    if !mass.is_finite() {
        return Err(PathError::InfiniteMeasure);
    }
    let times: Vec<f64> = pattern
        .atoms
        .iter()
        .filter(|a| a.time <= t && band.contains(a.mark))
        .map(|a| a.time)
        .collect();
    let mut integral = 0.0f64;
    for (i, &s) in times.iter().enumerate() {
        let next = times.get(i + 1).copied().unwrap_or(t);
        integral += (i + 1) as f64 * (next / s).ln();
    }
    Ok(times.len() as f64 - (1.0 - p.get()) * t * mass - p.get() * integral)
}
