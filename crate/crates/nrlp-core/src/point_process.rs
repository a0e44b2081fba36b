//! Noise reinforced Poisson point processes built by decoration: Poisson
//! innovations at rate `(1-p)Λ`, each dressed with repetition times
//! `u·e^{T_n}` whose log-gaps are Exponential(p·n). Also the
//! restriction/thinning algebra, counting processes and the Laplace
//! functional.

use rand::Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::measure::{Band, LevyMeasureSpec, MeasureError, MemoryParam};
use crate::yule_simon;

#[derive(Debug, Error)]
pub enum PointProcessError {
    #[error("truncation required: infinite measure near 0")]
    TruncationRequired,
    #[error("repetition cap of {0} exceeded for one innovation")]
    RepetitionCap(usize),
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error("mark region of the step function has infinite mass")]
    InfiniteMarkMass,
}

/// Repetition cap per innovation; a guard against pathological seeds, not a
/// truncation (hitting it is an error).
pub const MAX_REPETITIONS: usize = 10_000_000;

/// Decoration set `D = {0, T_1, T_2, …}` with `T_n - T_{n-1} ~ Exp(p·n)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecorationSet {
    pub gaps: Vec<f64>,
}

impl DecorationSet {
    /// Samples gaps until `T_n` exceeds `log_horizon`.
    pub fn sample<R: Rng + ?Sized>(
        p: MemoryParam,
        log_horizon: f64,
        rng: &mut R,
    ) -> Result<Self, PointProcessError> {
        let mut gaps = Vec::new();
        let mut total = 0.0f64;
        let mut n = 1.0f64;
        while total <= log_horizon {
            let gap: f64 = rng.sample::<f64, _>(Exp1) / (p.get() * n);
            gaps.push(gap);
            total += gap;
            n += 1.0;
            if gaps.len() >= MAX_REPETITIONS {
                return Err(PointProcessError::RepetitionCap(MAX_REPETITIONS));
            }
        }
        Ok(DecorationSet { gaps })
    }

    /// The set itself: 0 followed by the partial sums of the gaps.
    pub fn times(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.gaps.len() + 1);
        out.push(0.0);
        let mut t = 0.0;
        for g in &self.gaps {
            t += g;
            out.push(t);
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Origin {
    Innovation,
    Repetition,
}

/// One atom `(time, mark)` of a reinforced pattern, tagged with the
/// innovation family it belongs to. `time = u·e^T` for some `T` in the
/// family's decoration set; `T = 0` exactly for the innovation itself.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarkedAtom {
    pub time: f64,
    pub mark: f64,
    pub origin: Origin,
    pub innovation_id: u64,
    pub innovation_time: f64,
}

/// Atoms of a (reinforced) point process on `(0, horizon]`, sorted by time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarkedPointPattern {
    pub horizon: f64,
    pub atoms: Vec<MarkedAtom>,
}

impl MarkedPointPattern {
    pub fn empty(horizon: f64) -> Self {
        MarkedPointPattern {
            horizon,
            atoms: Vec::new(),
        }
    }

    pub fn sort_atoms(&mut self) {
        self.atoms.sort_by(|a, b| {
            a.time
                .total_cmp(&b.time)
                .then(a.innovation_id.cmp(&b.innovation_id))
        });
    }

    /// Distinct innovation ids in ascending order.
    pub fn innovation_ids(&self) -> Vec<u64> {
        let mut ids: Vec<u64> = self
            .atoms
            .iter()
            .filter(|a| a.origin == Origin::Innovation)
            .map(|a| a.innovation_id)
            .collect();
        ids.sort_unstable();
        ids.dedup();
        ids
    }

    /// `Σ_atoms f(time, mark)` for a step function.
    pub fn integral(&self, f: &StepFunction) -> f64 {
        self.atoms.iter().map(|a| f.eval(a.time, a.mark)).sum()
    }
}

/// Repetition times `{u·e^{T_n}} ∩ (0, horizon]` for one innovation at `u`,
/// the innovation time itself included as first element.
pub fn sample_decoration<R: Rng + ?Sized>(
    u: f64,
    horizon: f64,
    p: MemoryParam,
    rng: &mut R,
) -> Result<Vec<f64>, PointProcessError> {
    assert!(u > 0.0, "innovation time must be positive");
    if u > horizon {
        return Ok(Vec::new());
    }
    let deco = DecorationSet::sample(p, (horizon / u).ln(), rng)?;
    let mut times = vec![u];
    let mut t_log = 0.0;
    for g in &deco.gaps {
        t_log += g;
        let s = u * t_log.exp();
        if s > horizon {
            break;
        }
        times.push(s);
    }
    Ok(times)
}

/// The dyadic ring partition used for infinite measures: `{|x| >= 1}` plus
/// `{1/(j+1) <= |x| < 1/j}`, keeping only rings whose lower edge is `>= ε`.
/// Finite measures need no partition and yield the single full band.
pub fn ring_partition(
    spec: &LevyMeasureSpec,
    eps: f64,
) -> Result<Vec<Band>, PointProcessError> {
    if spec.total_mass_finite() {
        return Ok(vec![Band::all()]);
    }
    if !(eps > 0.0) {
        return Err(PointProcessError::TruncationRequired);
    }
    let mut bands = vec![Band::new(1.0, f64::INFINITY)];
    let mut j = 1u64;
    while 1.0 / (j + 1) as f64 >= eps {
        bands.push(Band::new(1.0 / (j + 1) as f64, 1.0 / j as f64));
        j += 1;
    }
    Ok(bands.into_iter().filter(|b| spec.mass_in(*b) > 0.0).collect())
}

/// Samples an NRPPP on `(0, horizon]`: per ring, Poisson innovations with
/// intensity `(1-p)Λ(ring)` dt (exponential gaps), independent marks with
/// the ring-restricted law, independent decorations.
pub fn sample_nrppp<R: Rng + ?Sized>(
    spec: &LevyMeasureSpec,
    p: MemoryParam,
    horizon: f64,
    eps: f64,
    rng: &mut R,
) -> Result<MarkedPointPattern, PointProcessError> {
    let mut pattern = MarkedPointPattern::empty(horizon);
    let mut next_id = 0u64;
    for band in ring_partition(spec, eps)? {
        let rate = (1.0 - p.get()) * spec.mass_in(band);
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
            push_family(&mut pattern, next_id, t, mark, horizon, p, rng)?;
            next_id += 1;
        }
    }
    pattern.sort_atoms();
    Ok(pattern)
}

/// Appends the full decorated family of one innovation to a pattern.
pub(crate) fn push_family<R: Rng + ?Sized>(
    pattern: &mut MarkedPointPattern,
    id: u64,
    u: f64,
    mark: f64,
    horizon: f64,
    p: MemoryParam,
    rng: &mut R,
) -> Result<(), PointProcessError> {
    for (i, s) in sample_decoration(u, horizon, p, rng)?.into_iter().enumerate() {
        pattern.atoms.push(MarkedAtom {
            time: s,
            mark,
            origin: if i == 0 {
                Origin::Innovation
            } else {
                Origin::Repetition
            },
            innovation_id: id,
            innovation_time: u,
        });
    }
    Ok(())
}

/// `N̂_A(t)`: atoms with time `<= t` and `|mark|` in the band.
pub fn counting_process(pattern: &MarkedPointPattern, band: Band, t: f64) -> u64 {
    pattern
        .atoms
        .iter()
        .filter(|a| a.time <= t && band.contains(a.mark))
        .count() as u64
}

/// Bernoulli thinning acting on whole innovation families: one draw per
/// innovation id, repetitions following their innovation.
pub fn thin_pattern<R: Rng + ?Sized>(
    pattern: &MarkedPointPattern,
    keep_prob: f64,
    rng: &mut R,
) -> (MarkedPointPattern, MarkedPointPattern) {
    use std::collections::HashMap;
    let mut keep: HashMap<u64, bool> = HashMap::new();
    for id in pattern.innovation_ids() {
        keep.insert(id, rng.random::<f64>() < keep_prob);
    }
    let mut kept = MarkedPointPattern::empty(pattern.horizon);
    let mut discarded = MarkedPointPattern::empty(pattern.horizon);
    for atom in &pattern.atoms {
        if *keep.get(&atom.innovation_id).unwrap_or(&false) {
            kept.atoms.push(*atom);
        } else {
            discarded.atoms.push(*atom);
        }
    }
    (kept, discarded)
}

/// One rectangle of a step function: `value` on `(t_lo, t_hi] × band`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepPiece {
    pub t_lo: f64,
    pub t_hi: f64,
    pub band: Band,
    pub value: f64,
}

/// Nonnegative step function on `(0, t] × marks` with finitely many pieces;
/// overlapping pieces add.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepFunction {
    pub pieces: Vec<StepPiece>,
}

impl StepFunction {
    /// Constant `value` on `(0, t_hi] × band`.
    pub fn indicator(t_hi: f64, band: Band, value: f64) -> Self {
        StepFunction {
            pieces: vec![StepPiece {
                t_lo: 0.0,
                t_hi,
                band,
                value,
            }],
        }
    }

    pub fn eval(&self, s: f64, x: f64) -> f64 {
        self.pieces
            .iter()
            .filter(|p| p.t_lo < s && s <= p.t_hi && p.band.contains(x))
            .map(|p| p.value)
            .sum()
    }

    /// Disjoint merged mark bands touched by any piece.
    fn mark_bands(&self) -> Vec<Band> {
        let mut bands: Vec<Band> = self.pieces.iter().map(|p| p.band).collect();
        bands.sort_by(|a, b| a.lo.total_cmp(&b.lo));
        let mut merged: Vec<Band> = Vec::new();
        for b in bands {
            match merged.last_mut() {
                Some(last) if b.lo <= last.hi => last.hi = last.hi.max(b.hi),
                _ => merged.push(b),
            }
        }
        merged
    }
}

/// Evaluates the exponential formula
/// `exp{-t(1-p) ∫Λ(dx) E[1 - e^{-∫_0^1 f(st,x) dY(s)}]}`
/// with the inner expectation by Monte Carlo over `n_mc` pairs of a mark
/// and a Yule-Simon path. Returns `(value, propagated standard error)`.
pub fn laplace_functional<R: Rng + ?Sized>(
    spec: &LevyMeasureSpec,
    p: MemoryParam,
    t: f64,
    f: &StepFunction,
    n_mc: usize,
    rng: &mut R,
) -> Result<(f64, f64), PointProcessError> {
    let bands = f.mark_bands();
    let masses: Vec<f64> = bands.iter().map(|b| spec.mass_in(*b)).collect();
    let total: f64 = masses.iter().sum();
    if total == 0.0 {
        return Ok((1.0, 0.0));
    }
    if !total.is_finite() {
        return Err(PointProcessError::InfiniteMarkMass);
    }
    let mut samples = Vec::with_capacity(n_mc);
    for _ in 0..n_mc {
        // Mark from Λ restricted to the support region.
        let mut u = rng.random::<f64>() * total;
        let mut band = bands[bands.len() - 1];
        for (b, m) in bands.iter().zip(&masses) {
            if u < *m {
                band = *b;
                break;
            }
            u -= m;
        }
        let x = spec.sample_jump(band, rng).map_err(PointProcessError::Measure)?;
        let path = yule_simon::sample_ys_path(p, rng).expect("jump cap");
        let stieltjes: f64 = path.jumps.iter().map(|&s| f.eval(s * t, x)).sum();
        samples.push(1.0 - (-stieltjes).exp());
    }
    let (inner_mean, inner_se) = crate::stats::mean_se(&samples);
    let scale = t * (1.0 - p.get()) * total;
    let value = (-scale * inner_mean).exp();
    Ok((value, value * scale * inner_se))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::labeled_stream;
    use crate::stats::mean_se;

    fn p(v: f64) -> MemoryParam {
        MemoryParam::new(v).unwrap()
    }

    fn dirac1() -> LevyMeasureSpec {
        LevyMeasureSpec::FiniteAtoms(vec![(1.0, 1.0)])
    }

    #[test]
    fn decoration_at_horizon_is_single() {
        let mut rng = labeled_stream(2, "pp/deco-edge", 0);
        let times = sample_decoration(1.0, 1.0, p(0.5), &mut rng).unwrap();
        assert_eq!(times, vec![1.0]);
        assert!(sample_decoration(1.5, 1.0, p(0.5), &mut rng)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn decoration_mean_count() {
        // Count at the horizon is a Yule value Z_r with r = p ln(h/u), so
        // the mean count is e^r = sqrt(2) for u=1/2, h=1, p=1/2.
        let mut rng = labeled_stream(2, "pp/deco-mean", 0);
        let counts: Vec<f64> = (0..100_000)
            .map(|_| sample_decoration(0.5, 1.0, p(0.5), &mut rng).unwrap().len() as f64)
            .collect();
        let (mean, se) = mean_se(&counts);
        let target = std::f64::consts::SQRT_2;
        assert!(
            (mean - target).abs() <= 4.0 * se,
            "mean {mean} vs {target} (se {se})"
        );
    }

    #[test]
    fn decoration_count_geometric() {
        // u=1/4, p=1/2: r = ln 2, so the count is Geometric(1/2).
        let mut rng = labeled_stream(2, "pp/deco-geom", 0);
        let n = 100_000;
        let mut freq = vec![0.0f64; 24];
        for _ in 0..n {
            let c = sample_decoration(0.25, 1.0, p(0.5), &mut rng).unwrap().len();
            if c < freq.len() {
                freq[c] += 1.0;
            }
        }
        let mut max_err = 0.0f64;
        for k in 1..freq.len() {
            let theo = 0.5f64.powi(k as i32);
            max_err = max_err.max((freq[k] / n as f64 - theo).abs());
        }
        assert!(max_err < 0.005, "max pmf error {max_err}");
    }

    #[test]
    fn nrppp_empty_measure() {
        let mut rng = labeled_stream(2, "pp/empty", 0);
        let pat = sample_nrppp(
            &LevyMeasureSpec::FiniteAtoms(vec![]),
            p(0.5),
            1.0,
            1e-3,
            &mut rng,
        )
        .unwrap();
        assert!(pat.atoms.is_empty());
    }

    #[test]
    fn nrppp_intensity_unit_rate() {
        // E[N̂((0,1] × A)] = Λ(A) = 1.
        let mut rng = labeled_stream(2, "pp/intensity", 0);
        let counts: Vec<f64> = (0..20_000)
            .map(|_| {
                let pat = sample_nrppp(&dirac1(), p(0.5), 1.0, 1e-3, &mut rng).unwrap();
                pat.atoms.len() as f64
            })
            .collect();
        let (mean, se) = mean_se(&counts);
        assert!((mean - 1.0).abs() <= 4.0 * se, "mean {mean} (se {se})");
    }

    #[test]
    fn nrppp_structure_invariants() {
        let mut rng = labeled_stream(2, "pp/structure", 0);
        let spec = LevyMeasureSpec::FiniteAtoms(vec![(1.0, 2.0), (-0.5, 1.0)]);
        for _ in 0..200 {
            let pat = sample_nrppp(&spec, p(0.5), 2.0, 1e-3, &mut rng).unwrap();
            for w in pat.atoms.windows(2) {
                assert!(w[0].time <= w[1].time);
            }
            for a in &pat.atoms {
                assert!(a.time > 0.0 && a.time <= 2.0);
                assert!(a.mark != 0.0);
                assert_eq!(a.origin == Origin::Innovation, a.time == a.innovation_time);
            }
            // Families share mark and innovation time.
            use std::collections::HashMap;
            let mut seen: HashMap<u64, (f64, f64)> = HashMap::new();
            for a in &pat.atoms {
                let entry = seen.entry(a.innovation_id).or_insert((a.mark, a.innovation_time));
                assert_eq!(entry.0, a.mark);
                assert_eq!(entry.1, a.innovation_time);
            }
        }
    }

    #[test]
    fn nrppp_small_p_rarely_repeats() {
        let mut rng = labeled_stream(2, "pp/small-p", 0);
        let mut reps = 0u64;
        let mut total = 0u64;
        for _ in 0..2_000 {
            let pat = sample_nrppp(&dirac1(), p(0.01), 1.0, 1e-3, &mut rng).unwrap();
            total += pat.atoms.len() as u64;
            reps += pat
                .atoms
                .iter()
                .filter(|a| a.origin == Origin::Repetition)
                .count() as u64;
        }
        let frac = reps as f64 / total as f64;
        assert!(frac < 0.05, "repetition fraction {frac}");
    }

    #[test]
    fn ring_partition_requires_truncation() {
        let spec = LevyMeasureSpec::StableLike {
            alpha: 0.5,
            scale: 1.0,
            truncation: 1.0,
        };
        assert!(matches!(
            ring_partition(&spec, 0.0),
            Err(PointProcessError::TruncationRequired)
        ));
        let rings = ring_partition(&spec, 0.2).unwrap();
        // Lower edges 1/2, 1/3, 1/4, 1/5 are >= 0.2; the unit ring has no
        // mass since R = 1.
        assert_eq!(rings.len(), 4);
        assert!(rings.iter().all(|b| b.lo >= 0.2));
    }

    #[test]
    fn counting_process_basics() {
        let mut rng = labeled_stream(2, "pp/counting", 0);
        let pat = sample_nrppp(&dirac1(), p(0.5), 1.0, 1e-3, &mut rng).unwrap();
        assert_eq!(counting_process(&pat, Band::all(), 0.0), 0);
        assert_eq!(counting_process(&pat, Band::new(5.0, 6.0), 1.0), 0);
        assert_eq!(
            counting_process(&pat, Band::all(), 1.0),
            pat.atoms.len() as u64
        );
    }

    #[test]
    fn thinning_edge_cases_and_family_integrity() {
        let mut rng = labeled_stream(2, "pp/thin", 0);
        let pat = sample_nrppp(&dirac1(), p(0.5), 4.0, 1e-3, &mut rng).unwrap();
        let (kept, disc) = thin_pattern(&pat, 1.0, &mut rng);
        assert_eq!(kept.atoms.len(), pat.atoms.len());
        assert!(disc.atoms.is_empty());
        let (kept, disc) = thin_pattern(&pat, 0.0, &mut rng);
        assert!(kept.atoms.is_empty());
        assert_eq!(disc.atoms.len(), pat.atoms.len());
        let (kept, disc) = thin_pattern(&pat, 0.5, &mut rng);
        assert_eq!(kept.atoms.len() + disc.atoms.len(), pat.atoms.len());
        let kept_ids = kept.innovation_ids();
        for a in &disc.atoms {
            assert!(!kept_ids.contains(&a.innovation_id));
        }
    }

    #[test]
    fn thinning_keep_fraction() {
        let mut rng = labeled_stream(2, "pp/thin-frac", 0);
        let mut kept_n = 0usize;
        let mut total = 0usize;
        // ~10⁴ innovations across replicas.
        for _ in 0..200 {
            let pat = sample_nrppp(
                &LevyMeasureSpec::FiniteAtoms(vec![(1.0, 50.0)]),
                p(0.5),
                1.0,
                1e-3,
                &mut rng,
            )
            .unwrap();
            let (kept, _) = thin_pattern(&pat, 0.7, &mut rng);
            kept_n += kept.innovation_ids().len();
            total += pat.innovation_ids().len();
        }
        let frac = kept_n as f64 / total as f64;
        let se = (0.7f64 * 0.3 / total as f64).sqrt();
        assert!((frac - 0.7).abs() <= 4.0 * se, "kept fraction {frac}");
    }

    #[test]
    fn laplace_functional_of_zero_is_one() {
        let mut rng = labeled_stream(2, "pp/laplace0", 0);
        let f = StepFunction::indicator(1.0, Band::all(), 0.0);
        let (v, se) =
            laplace_functional(&dirac1(), p(0.5), 1.0, &f, 2_000, &mut rng).unwrap();
        assert_eq!(v, 1.0);
        assert_eq!(se, 0.0);
    }

    #[test]
    fn laplace_functional_matches_series() {
        // f = 1{(0,1]×A}, Λ(A)=1, θ=1, p=1/2: the value is
        // exp{(1-p)(E[e^{-η}] - 1)} with η Yule-Simon, by direct series.
        let series: f64 = (1..200u64)
            .map(|k| {
                let kf = k as f64;
                (-kf).exp() * 4.0 / (kf * (kf + 1.0) * (kf + 2.0))
            })
            .sum();
        let target = (0.5 * (series - 1.0)).exp();
        let mut rng = labeled_stream(2, "pp/laplace-series", 0);
        let f = StepFunction::indicator(1.0, Band::new(0.5, 2.0), 1.0);
        let (v, se) =
            laplace_functional(&dirac1(), p(0.5), 1.0, &f, 200_000, &mut rng).unwrap();
        assert!(
            (v - target).abs() <= 4.0 * se.max(1e-9),
            "value {v} vs {target} (se {se})"
        );
    }

    #[test]
    fn laplace_functional_consistent_with_patterns() {
        // E[e^{-⟨pat, f⟩}] over sampled patterns must agree with the
        // exponential formula.
        let mut rng = labeled_stream(2, "pp/laplace-consistency", 0);
        let f = StepFunction::indicator(0.75, Band::new(0.5, 2.0), 0.8);
        let emp: Vec<f64> = (0..40_000)
            .map(|_| {
                let pat = sample_nrppp(&dirac1(), p(0.5), 1.0, 1e-3, &mut rng).unwrap();
                (-pat.integral(&f)).exp()
            })
            .collect();
        let (emp_mean, emp_se) = mean_se(&emp);
        let (formula, f_se) =
            laplace_functional(&dirac1(), p(0.5), 1.0, &f, 40_000, &mut rng).unwrap();
        let combined = (emp_se * emp_se + f_se * f_se).sqrt();
        assert!(
            (emp_mean - formula).abs() <= 4.0 * combined,
            "empirical {emp_mean} vs formula {formula} (se {combined})"
        );
    }
}
