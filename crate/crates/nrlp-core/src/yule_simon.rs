//! Standard Yule processes, Yule-Simon processes on [0,1] and the
//! Yule-Simon distribution with its closed-form moments.
//!
//! The Yule-Simon process is `Y(t) = 1{U <= t} Z_{p(ln t - ln U)}` for a
//! uniform first jump `U` and an independent standard Yule process `Z`; its
//! terminal value `Y(1)` has pmf `p⁻¹ B(k, 1/p + 1)`.

use rand::Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;
use thiserror::Error;

use crate::measure::MemoryParam;

/// Hard cap on jumps per path; only reachable through a pathological seed,
/// since any finite horizon sees finitely many jumps a.s.
pub const MAX_JUMPS: usize = 10_000_000;

#[derive(Debug, Error)]
pub enum YsError {
    #[error("jump cap of {MAX_JUMPS} exceeded on one path")]
    JumpCapExceeded,
    #[error("second moment undefined: requires p < 1/2, got p = {0}")]
    SecondMomentUndefined(f64),
}

/// One Yule-Simon trajectory on [0,1], stored as its jump times. The first
/// entry is the uniform first jump `U`; `Y(t)` counts jumps up to `t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct YuleSimonPath {
    pub jumps: Vec<f64>,
}

impl YuleSimonPath {
    pub fn first_jump(&self) -> f64 {
        self.jumps[0]
    }

    /// `Y(t) = #{jumps <= t}` (rcll counting value).
    pub fn value(&self, t: f64) -> u64 {
        self.jumps.iter().take_while(|&&s| s <= t).count() as u64
    }
}

/// Jump times of a standard Yule process on `[0, horizon]`: the process
/// starts at 1 and the k-th inter-jump gap is Exponential(k).
pub fn sample_standard_yule<R: Rng + ?Sized>(
    horizon: f64,
    rng: &mut R,
) -> Result<Vec<f64>, YsError> {
    let mut times = Vec::new();
    let mut t = 0.0f64;
    let mut k = 1.0f64;
    loop {
        let gap: f64 = rng.sample::<f64, _>(Exp1) / k;
        t += gap;
        if t > horizon {
            return Ok(times);
        }
        times.push(t);
        k += 1.0;
        if times.len() >= MAX_JUMPS {
            return Err(YsError::JumpCapExceeded);
        }
    }
}

/// Samples a Yule-Simon path: uniform `U` in (0,1], then the time-changed
/// standard Yule jumps `U·e^{τ_k/p}` up to 1.
pub fn sample_ys_path<R: Rng + ?Sized>(
    p: MemoryParam,
    rng: &mut R,
) -> Result<YuleSimonPath, YsError> {
    let u = 1.0 - rng.random::<f64>();
    let horizon = -p.get() * u.ln();
    let yule = sample_standard_yule(horizon, rng)?;
    let mut jumps = Vec::with_capacity(yule.len() + 1);
    jumps.push(u);
    for tau in yule {
        // τ <= -p ln U guarantees the image stays in (u, 1] up to rounding.
        jumps.push((u * (tau / p.get()).exp()).min(1.0));
    }
    Ok(YuleSimonPath { jumps })
}

/// Yule-Simon pmf `P(Y(1) = k) = p⁻¹ B(k, 1/p + 1)`, via log-gamma.
pub fn ys_pmf(p: MemoryParam, k: u64) -> f64 {
    assert!(k >= 1, "pmf support starts at 1");
    let rho = 1.0 / p.get();
    let log_beta = ln_gamma(k as f64) + ln_gamma(rho + 1.0) - ln_gamma(k as f64 + rho + 1.0);
    rho * log_beta.exp()
}

/// `E[Y(t)] = t / (1 - p)`.
pub fn ys_mean(p: MemoryParam, t: f64) -> f64 {
    t / (1.0 - p.get())
}

/// `E[Y(t) | Y(s) = k] = k (t/s)^p` for `0 < s <= t <= 1`.
pub fn ys_cond_mean(p: MemoryParam, k: u64, s: f64, t: f64) -> f64 {
    assert!(0.0 < s && s <= t && t <= 1.0);
    k as f64 * (t / s).powf(p.get())
}

/// `E[Y(s)Y(t)] = s^{1-p} t^p / ((1-p)(1-2p))`, defined for `p < 1/2`.
pub fn ys_cov(p: MemoryParam, s: f64, t: f64) -> Result<f64, YsError> {
    if p.get() >= 0.5 {
        return Err(YsError::SecondMomentUndefined(p.get()));
    }
    let (lo, hi) = if s <= t { (s, t) } else { (t, s) };
    Ok(lo.powf(1.0 - p.get()) * hi.powf(p.get()) / ((1.0 - p.get()) * (1.0 - 2.0 * p.get())))
}
