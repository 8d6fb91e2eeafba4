//! Phased-array signal simulation and empirical detection rates.
//!
//! Trials are split into fixed-size shards. Shard `k` draws from ChaCha8 seeded
//! with the scenario seed on stream `k`, so results do not depend on the
//! number of worker threads.

use crate::detectors::{BeamformedVector, Detector, LrtParams, SnapshotMatrix};
use crate::distributions::{chi2_cdf, noncentral_chi2_cdf};
use crate::stats::{ks_one_sample, ks_two_sample, pearson, spearman, wilson_interval, KsResult, Z95};
use crate::{ComplexValue, Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

/// Trials per RNG stream.
pub const SHARD_TRIALS: u64 = 1 << 16;

/// Exceedances needed before an empirical quantile is trusted.
pub const MIN_EXCEEDANCES: u64 = 100;

/// Per-antenna echo means and noise level of one simulated array.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub n_antennas: u32,
    pub m_samples: u32,
    pub mu_x: Vec<f64>,
    pub mu_y: Vec<f64>,
    pub sigma_sq: f64,
    pub seed: u64,
}

impl Scenario {
    pub fn new(m_samples: u32, mu_x: Vec<f64>, mu_y: Vec<f64>, sigma_sq: f64, seed: u64) -> Result<Self> {
        let n = mu_x.len();
        if n < 1 || mu_y.len() != n {
            return Err(Error::domain(format!(
                "need matching non-empty mean vectors, got {} and {}",
                n,
                mu_y.len()
            )));
        }
        if m_samples < 2 {
            return Err(Error::domain(format!("m_samples must be >= 2, got {m_samples}")));
        }
        if !(sigma_sq > 0.0 && sigma_sq.is_finite()) {
            return Err(Error::domain(format!("sigma_sq must be finite and > 0, got {sigma_sq}")));
        }
        if mu_x.iter().chain(&mu_y).any(|v| !v.is_finite()) {
            return Err(Error::domain("echo means must be finite"));
        }
        Ok(Scenario { n_antennas: n as u32, m_samples, mu_x, mu_y, sigma_sq, seed })
    }

    /// Every antenna sees the same in-phase echo at per-antenna SNR `snr_db`.
    pub fn equal_snr(n: u32, m: u32, snr_db: f64, sigma_sq: f64, seed: u64) -> Result<Self> {
        let a = (2.0 * sigma_sq * 10f64.powf(snr_db / 10.0)).sqrt();
        Self::new(m, vec![a; n as usize], vec![0.0; n as usize], sigma_sq, seed)
    }

    pub fn noise_only(n: u32, m: u32, sigma_sq: f64, seed: u64) -> Result<Self> {
        Self::new(m, vec![0.0; n as usize], vec![0.0; n as usize], sigma_sq, seed)
    }

    /// Same array and seed with the echo removed.
    pub fn without_echo(&self) -> Self {
        Scenario { mu_x: vec![0.0; self.mu_x.len()], mu_y: vec![0.0; self.mu_y.len()], ..self.clone() }
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Scenario { seed, ..self.clone() }
    }

    /// Beamformed echo mean `(μ_X, μ_Y)`.
    pub fn summed_means(&self) -> (f64, f64) {
        (self.mu_x.iter().sum(), self.mu_y.iter().sum())
    }

    pub fn snr_n(&self, i: usize) -> f64 {
        (self.mu_x[i] * self.mu_x[i] + self.mu_y[i] * self.mu_y[i]) / (2.0 * self.sigma_sq)
    }

    /// `Υ = (μ_X^2 + μ_Y^2) / (2 N σ^2)`.
    pub fn upsilon(&self) -> f64 {
        let (mx, my) = self.summed_means();
        (mx * mx + my * my) / (2.0 * f64::from(self.n_antennas) * self.sigma_sq)
    }

    pub fn lrt_params(&self) -> LrtParams {
        let (mu_x, mu_y) = self.summed_means();
        LrtParams { mu_x, mu_y, sigma_sq: self.sigma_sq }
    }

    /// RNG for shard `k`.
    pub fn stream(&self, k: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(k);
        rng
    }
}

pub fn generate_snapshot_into<R: Rng + ?Sized>(sc: &Scenario, rng: &mut R, out: &mut SnapshotMatrix) {
    let m = sc.m_samples as usize;
    let sd = sc.sigma_sq.sqrt();
    let (x, y) = out.components_mut();
    for (i, (mx, my)) in sc.mu_x.iter().zip(&sc.mu_y).enumerate() {
        for j in 0..m {
            let zx: f64 = rng.sample(StandardNormal);
            let zy: f64 = rng.sample(StandardNormal);
            x[i * m + j] = mx + sd * zx;
            y[i * m + j] = my + sd * zy;
        }
    }
}

pub fn generate_snapshot<R: Rng + ?Sized>(sc: &Scenario, rng: &mut R) -> SnapshotMatrix {
    let mut s = SnapshotMatrix::zeros(sc.n_antennas as usize, sc.m_samples as usize)
        .expect("scenario dimensions are validated at construction");
    generate_snapshot_into(sc, rng, &mut s);
    s
}

pub fn beamform_into(s: &SnapshotMatrix, out: &mut [ComplexValue]) {
    out.fill(ComplexValue::new(0.0, 0.0));
    for i in 0..s.antennas() {
        for ((o, a), b) in out.iter_mut().zip(s.x_row(i)).zip(s.y_row(i)) {
            o.re += a;
            o.im += b;
        }
    }
}

/// Unity-gain, zero-phase sum across antennas.
pub fn beamform(s: &SnapshotMatrix) -> BeamformedVector {
    let mut r = BeamformedVector::new(vec![ComplexValue::new(0.0, 0.0); s.samples()])
        .expect("snapshot has at least two samples");
    beamform_into(s, r.as_mut_slice());
    r
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialReport {
    pub trials: u64,
    pub detections: u64,
    pub rate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub seed: u64,
    /// Trials whose statistic was undefined; they count as H0 decisions.
    pub degenerate: u64,
}

impl TrialReport {
    fn new(trials: u64, detections: u64, degenerate: u64, seed: u64) -> Self {
        let (ci_low, ci_high) = wilson_interval(detections, trials, Z95);
        TrialReport { trials, detections, rate: detections as f64 / trials as f64, ci_low, ci_high, seed, degenerate }
    }

    /// Binomial standard deviation of the rate under success probability `p`.
    pub fn sigma_at(&self, p: f64) -> f64 {
        (p * (1.0 - p) / self.trials as f64).sqrt()
    }
}

fn shards(trials: u64) -> Vec<(u64, u64)> {
    (0..trials.div_ceil(SHARD_TRIALS))
        .map(|k| (k, SHARD_TRIALS.min(trials - k * SHARD_TRIALS)))
        .collect()
}

/// Runs `body(statistic)` for each trial of one shard; `None` marks a degenerate sample.
fn run_shard(
    detector: &Detector,
    sc: &Scenario,
    shard: u64,
    count: u64,
    mut body: impl FnMut(Option<f64>),
) -> Result<()> {
    let mut rng = sc.stream(shard);
    let mut s = SnapshotMatrix::zeros(sc.n_antennas as usize, sc.m_samples as usize)?;
    let mut r = vec![ComplexValue::new(0.0, 0.0); sc.m_samples as usize];
    for _ in 0..count {
        generate_snapshot_into(sc, &mut rng, &mut s);
        beamform_into(&s, &mut r);
        match detector.statistic(&s, &r) {
            Ok(t) => body(Some(t)),
            Err(Error::DegenerateSample) => body(None),
            Err(e) => return Err(e),
        }
    }
    Ok(())
}

/// Detection rates at several thresholds from one set of trials.
pub fn estimate_rates(detector: &Detector, thresholds: &[f64], sc: &Scenario, trials: u64) -> Result<Vec<TrialReport>> {
    if trials < 1 {
        return Err(Error::domain("trials must be >= 1"));
    }
    let k = thresholds.len();
    let counts = shards(trials)
        .into_par_iter()
        .map(|(shard, count)| {
            let mut hits = vec![0u64; k + 1];
            run_shard(detector, sc, shard, count, |t| match t {
                Some(t) => {
                    for (h, &g) in hits.iter_mut().zip(thresholds) {
                        if t > g {
                            *h += 1;
                        }
                    }
                }
                None => hits[k] += 1,
            })?;
            Ok::<_, Error>(hits)
        })
        .try_reduce(
            || vec![0u64; k + 1],
            |mut a, b| {
                a.iter_mut().zip(&b).for_each(|(x, y)| *x += y);
                Ok(a)
            },
        )?;
    Ok(thresholds.iter().enumerate().map(|(i, _)| TrialReport::new(trials, counts[i], counts[k], sc.seed)).collect())
}

pub fn estimate_rate(detector: &Detector, threshold: f64, sc: &Scenario, trials: u64) -> Result<TrialReport> {
    Ok(estimate_rates(detector, &[threshold], sc, trials)?[0])
}

/// Statistic values of every non-degenerate trial, in shard order.
pub fn sample_statistics(detector: &Detector, sc: &Scenario, trials: u64) -> Result<Vec<f64>> {
    let parts: Vec<Vec<f64>> = shards(trials)
        .into_par_iter()
        .map(|(shard, count)| {
            let mut v = Vec::with_capacity(count as usize);
            run_shard(detector, sc, shard, count, |t| v.extend(t))?;
            Ok(v)
        })
        .collect::<Result<_>>()?;
    Ok(parts.concat())
}

/// Empirical `(1 - pfa)` quantile of the statistic under H0.
pub fn calibrate_threshold(detector: &Detector, pfa: f64, sc_h0: &Scenario, trials: u64) -> Result<f64> {
    if !(pfa > 0.0 && pfa < 1.0) {
        return Err(Error::domain(format!("pfa must lie in (0, 1), got {pfa}")));
    }
    if (trials as f64) * pfa < MIN_EXCEEDANCES as f64 * (1.0 - 1e-12) {
        return Err(Error::InsufficientTrials { trials, pfa, min_exceedances: MIN_EXCEEDANCES });
    }
    let mut v = sample_statistics(detector, sc_h0, trials)?;
    let n = v.len();
    let idx = (((1.0 - pfa) * n as f64).ceil() as usize).clamp(1, n) - 1;
    let (_, q, _) = v.select_nth_unstable_by(idx, f64::total_cmp);
    Ok(*q)
}

/// Checks on the two independent chi-squared parts of the post-GLRT statistic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LemmaReport {
    pub trials: u64,
    /// Residual energy against chi-squared with `2(M-1)` dof.
    pub ks_i2: KsResult,
    /// Residual energy against the same quantity simulated without echo.
    pub ks_i2_vs_h0: KsResult,
    /// Mean energy against (noncentral) chi-squared with 2 dof.
    pub ks_i1: KsResult,
    pub lambda1: f64,
    pub pearson: f64,
    pub spearman: f64,
    /// `4 / sqrt(trials)`.
    pub correlation_bound: f64,
}

impl LemmaReport {
    pub fn passes(&self, alpha: f64) -> bool {
        self.ks_i2.p_value > alpha
            && self.ks_i2_vs_h0.p_value > alpha
            && self.ks_i1.p_value > alpha
            && self.pearson.abs() <= self.correlation_bound
            && self.spearman.abs() <= self.correlation_bound
    }
}

/// `(I_1, I_2)` per trial: `M |μ̂|^2 / (N σ^2)` and `Σ |R_m - μ̂|^2 / (N σ^2)`.
fn lemma_pairs(sc: &Scenario, trials: u64) -> Result<(Vec<f64>, Vec<f64>)> {
    let m = f64::from(sc.m_samples);
    let scale = 1.0 / (f64::from(sc.n_antennas) * sc.sigma_sq);
    let parts: Vec<(Vec<f64>, Vec<f64>)> = shards(trials)
        .into_par_iter()
        .map(|(shard, count)| {
            let mut rng = sc.stream(shard);
            let mut s = SnapshotMatrix::zeros(sc.n_antennas as usize, sc.m_samples as usize)?;
            let mut r = vec![ComplexValue::new(0.0, 0.0); sc.m_samples as usize];
            let (mut a, mut b) = (Vec::with_capacity(count as usize), Vec::with_capacity(count as usize));
            for _ in 0..count {
                generate_snapshot_into(sc, &mut rng, &mut s);
                beamform_into(&s, &mut r);
                let mean = r.iter().sum::<ComplexValue>() / m;
                a.push(m * mean.norm_sqr() * scale);
                b.push(r.iter().map(|z| (z - mean).norm_sqr()).sum::<f64>() * scale);
            }
            Ok((a, b))
        })
        .collect::<Result<_>>()?;
    let (a, b): (Vec<_>, Vec<_>) = parts.into_iter().unzip();
    Ok((a.concat(), b.concat()))
}

pub fn lemma_tests(sc: &Scenario, trials: u64) -> Result<LemmaReport> {
    if trials < 10_000 {
        return Err(Error::domain(format!("lemma tests need >= 10000 trials, got {trials}")));
    }
    let (i1, i2) = lemma_pairs(sc, trials)?;
    let twin = sc.without_echo().with_seed(sc.seed ^ 0x9e37_79b9_7f4a_7c15);
    let (_, i2_h0) = lemma_pairs(&twin, trials)?;
    let dof2 = 2 * (sc.m_samples - 1);
    let (mx, my) = sc.summed_means();
    let lambda1 = f64::from(sc.m_samples) * (mx * mx + my * my) / (f64::from(sc.n_antennas) * sc.sigma_sq);
    let ks_i1 = if lambda1 == 0.0 {
        ks_one_sample(&i1, |x| chi2_cdf(x, 2))?
    } else {
        ks_one_sample(&i1, |x| noncentral_chi2_cdf(x, 2, lambda1))?
    };
    Ok(LemmaReport {
        trials,
        ks_i2: ks_one_sample(&i2, |x| chi2_cdf(x, dof2))?,
        ks_i2_vs_h0: ks_two_sample(&i2, &i2_h0)?,
        ks_i1,
        lambda1,
        pearson: pearson(&i1, &i2)?,
        spearman: spearman(&i1, &i2)?,
        correlation_bound: 4.0 / (trials as f64).sqrt(),
    })
}
