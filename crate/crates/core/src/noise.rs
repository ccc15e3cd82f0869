//! Monte Carlo cross-checks: Ornstein–Uhlenbeck field trajectories for the
//! coherence factor and shot-by-shot click statistics for a measurement.
//!
//! Random numbers come from ChaCha8 seeded with `seed_from_u64(seed)`; each
//! trajectory (or chunk of shots) uses its own stream, so results do not
//! depend on the rayon thread count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::channel::{StatePair, SwitchingFunction};
use crate::discrim::{Outcome, Povm};
use crate::error::{ensure, Result};

/// Trajectories per parallel work item.
const TRAJ_CHUNK: usize = 256;
/// Shots per RNG stream.
const SHOT_CHUNK: u64 = 1 << 16;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OuParams {
    /// Stationary standard deviation of the field, µs⁻¹.
    pub kappa: f64,
    /// Correlation time, µs.
    pub tau_c: f64,
    /// Largest time step, µs.
    pub dt: f64,
    pub seed: u64,
    pub n_traj: usize,
}

impl OuParams {
    fn validate(&self) -> Result<()> {
        ensure(self.kappa >= 0.0 && self.kappa.is_finite(), "kappa", self.kappa, ">= 0")?;
        ensure(self.tau_c > 0.0 && self.tau_c.is_finite(), "tau_c", self.tau_c, "> 0")?;
        ensure(self.dt > 0.0, "dt", self.dt, "> 0")?;
        ensure(self.dt <= self.tau_c / 50.0, "dt", self.dt, "<= tau_c / 50")?;
        ensure(self.n_traj >= 2, "n_traj", self.n_traj as f64, ">= 2")
    }

    fn rng(&self, stream: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(stream);
        rng
    }
}

/// One exact OU step of length h: (decay, innovation standard deviation).
fn ou_step(kappa: f64, tau_c: f64, h: f64) -> (f64, f64) {
    let decay = (-h / tau_c).exp();
    (decay, kappa * (-(-2.0 * h / tau_c).exp_m1()).sqrt())
}

/// Field samples B(k·h) for k = 0..=n with n = ⌈horizon/dt⌉ and h = horizon/n,
/// drawn from stream `index`.
pub fn ou_trajectory(params: &OuParams, horizon: f64, index: u64) -> Result<Vec<f64>> {
    params.validate()?;
    ensure(horizon >= 0.0 && horizon.is_finite(), "horizon", horizon, ">= 0")?;
    let n = (horizon / params.dt).ceil().max(1.0) as usize;
    let h = horizon / n as f64;
    let (decay, sd) = ou_step(params.kappa, params.tau_c, h);
    let mut rng = params.rng(index);
    let mut b = params.kappa * rng.sample::<f64, _>(StandardNormal);
    let mut out = Vec::with_capacity(n + 1);
    out.push(b);
    for _ in 0..n {
        b = b * decay + sd * rng.sample::<f64, _>(StandardNormal);
        out.push(b);
    }
    Ok(out)
}

/// Sample mean with its standard error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub std_err: f64,
    pub n: u64,
}

impl Estimate {
    fn from_sums(sum: f64, sum_sq: f64, n: u64) -> Self {
        let nf = n as f64;
        let mean = sum / nf;
        let var = ((sum_sq - nf * mean * mean) / (nf - 1.0)).max(0.0);
        Estimate { value: mean, std_err: (var / nf).sqrt(), n }
    }

    /// Binomial proportion k/n with standard error √(p(1−p)/n).
    pub fn proportion(k: u64, n: u64) -> Option<Self> {
        (n > 0).then(|| {
            let p = k as f64 / n as f64;
            Estimate { value: p, std_err: (p * (1.0 - p) / n as f64).sqrt(), n }
        })
    }

    /// |value − expected| in units of the standard error.
    pub fn z(&self, expected: f64) -> f64 {
        let d = (self.value - expected).abs();
        if d == 0.0 {
            0.0
        } else {
            d / self.std_err
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NuEstimate {
    /// Mean of cos φ.
    pub nu: Estimate,
    /// Mean of sin φ; zero in expectation, reported as a diagnostic.
    pub imag: Estimate,
}

#[derive(Clone, Copy, Default)]
struct Sums {
    cos: f64,
    cos_sq: f64,
    sin: f64,
    sin_sq: f64,
}

impl Sums {
    fn merge(self, o: Sums) -> Sums {
        Sums { cos: self.cos + o.cos, cos_sq: self.cos_sq + o.cos_sq, sin: self.sin + o.sin, sin_sq: self.sin_sq + o.sin_sq }
    }
}

/// Estimates ν = E[cos φ] with φ = ∫₀^T ξ(t) B(t) dt.
///
/// The time grid is refined per constant-sign segment of ξ so every flip
/// falls on a grid point; φ is integrated by the trapezoid rule.
pub fn empirical_nu(params: &OuParams, xi: &SwitchingFunction) -> Result<NuEstimate> {
    params.validate()?;
    let spacing = xi.flips().windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    ensure(params.dt <= spacing / 50.0, "dt", params.dt, "<= pulse spacing / 50")?;

    // (h, sign, decay, innovation sd) per step
    let mut steps = Vec::new();
    for (a, b, sign) in xi.segments() {
        let len = b - a;
        if len <= 0.0 {
            continue;
        }
        let n = (len / params.dt).ceil() as usize;
        let h = len / n as f64;
        let (decay, sd) = ou_step(params.kappa, params.tau_c, h);
        steps.extend(std::iter::repeat_n((h, sign, decay, sd), n));
    }

    let n_chunks = params.n_traj.div_ceil(TRAJ_CHUNK);
    let partial: Vec<Sums> = (0..n_chunks)
        .into_par_iter()
        .map(|chunk| {
            let lo = chunk * TRAJ_CHUNK;
            let hi = (lo + TRAJ_CHUNK).min(params.n_traj);
            let mut s = Sums::default();
            for index in lo..hi {
                let mut rng = params.rng(index as u64);
                let mut b = params.kappa * rng.sample::<f64, _>(StandardNormal);
                let mut phi = 0.0;
                for &(h, sign, decay, sd) in &steps {
                    let next = b * decay + sd * rng.sample::<f64, _>(StandardNormal);
                    phi += sign * 0.5 * h * (b + next);
                    b = next;
                }
                let (sn, cs) = phi.sin_cos();
                s = s.merge(Sums { cos: cs, cos_sq: cs * cs, sin: sn, sin_sq: sn * sn });
            }
            s
        })
        .collect();
    let total = partial.into_iter().fold(Sums::default(), Sums::merge);
    let n = params.n_traj as u64;
    Ok(NuEstimate { nu: Estimate::from_sums(total.cos, total.cos_sq, n), imag: Estimate::from_sums(total.sin, total.sin_sq, n) })
}

/// Outcome counts: `counts[j][k]` is the number of shots prepared in ρⱼ that
/// gave outcome k.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ClickTally {
    pub counts: [[u64; 3]; 2],
}

impl ClickTally {
    pub fn shots(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    /// Shots with outcome k, over both preparations.
    pub fn clicks(&self, k: Outcome) -> u64 {
        self.counts[0][k.index()] + self.counts[1][k.index()]
    }

    fn merge(mut self, o: ClickTally) -> ClickTally {
        for j in 0..2 {
            for k in 0..3 {
                self.counts[j][k] += o.counts[j][k];
            }
        }
        self
    }
}

/// Draws the prepared state from the priors, then the outcome from the Born
/// probabilities of `povm`.
pub fn simulate_clicks(povm: &Povm, pair: &StatePair, shots: u64, seed: u64) -> Result<ClickTally> {
    ensure(shots > 0, "shots", shots as f64, "> 0")?;
    let probs: [[f64; 3]; 2] = std::array::from_fn(|j| {
        let p = povm.probabilities(pair.state(j)).map(|x| x.max(0.0));
        let s: f64 = p.iter().sum();
        p.map(|x| x / s)
    });
    let n_chunks = shots.div_ceil(SHOT_CHUNK);
    let tally = (0..n_chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(chunk);
            let n = SHOT_CHUNK.min(shots - chunk * SHOT_CHUNK);
            let mut t = ClickTally::default();
            for _ in 0..n {
                let j = if rng.random::<f64>() < pair.eta0 { 0 } else { 1 };
                let u = rng.random::<f64>();
                let k = if u < probs[j][0] {
                    0
                } else if u < probs[j][0] + probs[j][1] {
                    1
                } else {
                    2
                };
                t.counts[j][k] += 1;
            }
            t
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold(ClickTally::default(), ClickTally::merge);
    Ok(tally)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EmpiricalConfidence {
    /// Fraction of outcome-0 clicks that came from ρ₀; `None` without any.
    pub c0: Option<Estimate>,
    pub c1: Option<Estimate>,
    pub p_inc: Estimate,
}

pub fn empirical_confidence(tally: &ClickTally) -> Result<EmpiricalConfidence> {
    let shots = tally.shots();
    ensure(shots > 0, "shots", 0.0, "> 0")?;
    let conf = |k: Outcome| Estimate::proportion(tally.counts[k.index()][k.index()], tally.clicks(k));
    Ok(EmpiricalConfidence {
        c0: conf(Outcome::Zero),
        c1: conf(Outcome::One),
        p_inc: Estimate::proportion(tally.clicks(Outcome::Inconclusive), shots).expect("shots > 0"),
    })
}
