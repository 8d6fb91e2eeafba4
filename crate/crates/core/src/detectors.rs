//! Sample-path statistics, thresholds and decisions for the four detectors.

use crate::analytic::{pre_glrt_threshold, q_inverse, square_law_normalized_threshold, threshold_for_pfa};
use crate::{ComplexValue, Error, Result};
use std::fmt;
use std::str::FromStr;

/// Beamformed samples `R_m`, one per time index.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamformedVector {
    r: Vec<ComplexValue>,
}

impl BeamformedVector {
    pub fn new(r: Vec<ComplexValue>) -> Result<Self> {
        if r.len() < 2 {
            return Err(Error::domain(format!("need at least 2 samples, got {}", r.len())));
        }
        Ok(BeamformedVector { r })
    }

    pub fn as_slice(&self) -> &[ComplexValue] {
        &self.r
    }

    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    pub(crate) fn as_mut_slice(&mut self) -> &mut [ComplexValue] {
        &mut self.r
    }
}

/// In-phase and quadrature snapshots, `n` antennas by `m` samples, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotMatrix {
    n: usize,
    m: usize,
    x: Vec<f64>,
    y: Vec<f64>,
}

impl SnapshotMatrix {
    pub fn new(n: usize, m: usize, x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if n < 1 || m < 2 {
            return Err(Error::domain(format!("snapshot needs n >= 1 and m >= 2, got {n}x{m}")));
        }
        if x.len() != n * m || y.len() != n * m {
            return Err(Error::domain(format!(
                "snapshot {n}x{m} needs {} entries per component, got {} and {}",
                n * m,
                x.len(),
                y.len()
            )));
        }
        Ok(SnapshotMatrix { n, m, x, y })
    }

    pub fn zeros(n: usize, m: usize) -> Result<Self> {
        Self::new(n, m, vec![0.0; n * m], vec![0.0; n * m])
    }

    pub fn antennas(&self) -> usize {
        self.n
    }

    pub fn samples(&self) -> usize {
        self.m
    }

    /// In-phase row of antenna `i`.
    pub fn x_row(&self, i: usize) -> &[f64] {
        &self.x[i * self.m..(i + 1) * self.m]
    }

    /// Quadrature row of antenna `i`.
    pub fn y_row(&self, i: usize) -> &[f64] {
        &self.y[i * self.m..(i + 1) * self.m]
    }

    pub(crate) fn components_mut(&mut self) -> (&mut [f64], &mut [f64]) {
        (&mut self.x, &mut self.y)
    }
}

/// Maximum-likelihood estimates from the beamformed samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MleSet {
    pub mu_x_hat: f64,
    pub mu_y_hat: f64,
    /// Noise variance estimate with the mean forced to zero.
    pub sigma0_sq_hat: f64,
    /// Noise variance estimate around the estimated mean.
    pub sigma1_sq_hat: f64,
}

fn mle_raw(r: &[ComplexValue], n_antennas: u32) -> Result<MleSet> {
    if r.len() < 2 {
        return Err(Error::domain(format!("need at least 2 samples, got {}", r.len())));
    }
    if n_antennas < 1 {
        return Err(Error::domain("n_antennas must be >= 1"));
    }
    let m = r.len() as f64;
    let scale = 1.0 / (2.0 * m * f64::from(n_antennas));
    let (mut sx, mut sy, mut s0) = (0.0, 0.0, 0.0);
    for z in r {
        sx += z.re;
        sy += z.im;
        s0 += z.norm_sqr();
    }
    let (mx, my) = (sx / m, sy / m);
    let mut s1 = 0.0;
    for z in r {
        let (dx, dy) = (z.re - mx, z.im - my);
        s1 += dx * dx + dy * dy;
    }
    let sigma1 = s1 * scale;
    if !(sigma1 > 0.0) {
        return Err(Error::DegenerateSample);
    }
    Ok(MleSet { mu_x_hat: mx, mu_y_hat: my, sigma0_sq_hat: s0 * scale, sigma1_sq_hat: sigma1 })
}

pub fn mle_estimates(r: &BeamformedVector, n_antennas: u32) -> Result<MleSet> {
    mle_raw(&r.r, n_antennas)
}

pub(crate) fn post_glrt_raw(r: &[ComplexValue], n_antennas: u32) -> Result<f64> {
    let e = mle_raw(r, n_antennas)?;
    let psi = (r.len() - 1) as f64 / (2.0 * f64::from(n_antennas));
    Ok(psi * (e.mu_x_hat * e.mu_x_hat + e.mu_y_hat * e.mu_y_hat) / e.sigma1_sq_hat)
}

/// Post-beamforming GLRT statistic `Z`; F(2, 2(M-1)) distributed under H0.
pub fn post_glrt_statistic(r: &BeamformedVector, n_antennas: u32) -> Result<f64> {
    post_glrt_raw(&r.r, n_antennas)
}

/// Pre-beamforming GLRT: per-antenna mean energy over pooled residual variance,
/// scaled to be F(2N, 2N(M-1)) distributed under H0.
///
/// `noise_floor_guard` is the smallest pooled residual variance accepted; below
/// it the sample is reported as degenerate.
pub fn pre_glrt_statistic(s: &SnapshotMatrix, noise_floor_guard: f64) -> Result<f64> {
    let m = s.m as f64;
    let (mut energy, mut residual) = (0.0, 0.0);
    for i in 0..s.n {
        let (xr, yr) = (s.x_row(i), s.y_row(i));
        let mx = xr.iter().sum::<f64>() / m;
        let my = yr.iter().sum::<f64>() / m;
        energy += m * (mx * mx + my * my);
        for (a, b) in xr.iter().zip(yr) {
            let (dx, dy) = (a - mx, b - my);
            residual += dx * dx + dy * dy;
        }
    }
    let pooled = residual / (2.0 * s.n as f64 * (m - 1.0));
    if !(pooled > noise_floor_guard.max(0.0)) {
        return Err(Error::DegenerateSample);
    }
    Ok(energy / (2.0 * s.n as f64) / pooled)
}

/// `Σ |R_m|^2`.
pub fn square_law_statistic(r: &[ComplexValue]) -> f64 {
    r.iter().map(|z| z.norm_sqr()).sum()
}

/// Square-law threshold for noise variance `sigma_sq` per component and antenna.
pub fn square_law_threshold(pfa: f64, m: u32, n_antennas: u32, sigma_sq: f64) -> Result<f64> {
    if !(sigma_sq > 0.0) {
        return Err(Error::domain(format!("sigma_sq must be > 0, got {sigma_sq}")));
    }
    Ok(f64::from(n_antennas) * sigma_sq * square_law_normalized_threshold(m, pfa)?)
}

/// Known echo means (summed over antennas) and per-component noise variance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LrtParams {
    pub mu_x: f64,
    pub mu_y: f64,
    pub sigma_sq: f64,
}

impl LrtParams {
    /// `d^2 = M |μ|^2 / (N σ^2)`, the squared deflection of the log-likelihood ratio.
    pub fn deflection_sq(&self, m: u32, n_antennas: u32) -> f64 {
        f64::from(m) * (self.mu_x * self.mu_x + self.mu_y * self.mu_y) / (f64::from(n_antennas) * self.sigma_sq)
    }
}

/// Log-likelihood ratio with every parameter known.
pub fn lrt_statistic(r: &[ComplexValue], p: &LrtParams, n_antennas: u32) -> Result<f64> {
    if !(p.sigma_sq > 0.0) {
        return Err(Error::domain(format!("sigma_sq must be > 0, got {}", p.sigma_sq)));
    }
    let mu2 = p.mu_x * p.mu_x + p.mu_y * p.mu_y;
    let sum: f64 = r.iter().map(|z| 2.0 * (z.re * p.mu_x + z.im * p.mu_y) - mu2).sum();
    Ok(sum / (2.0 * f64::from(n_antennas) * p.sigma_sq))
}

/// The log-likelihood ratio is Gaussian with mean `-d^2/2` and variance `d^2` under H0.
pub fn lrt_threshold(pfa: f64, p: &LrtParams, m: u32, n_antennas: u32) -> Result<f64> {
    let d2 = p.deflection_sq(m, n_antennas);
    Ok(-0.5 * d2 + d2.sqrt() * q_inverse(pfa)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Hypothesis {
    H0,
    H1,
}

/// H1 iff the statistic strictly exceeds the threshold.
pub fn decide(statistic: f64, threshold: f64) -> Hypothesis {
    if statistic > threshold {
        Hypothesis::H1
    } else {
        Hypothesis::H0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Detector {
    PostGlrt,
    PreGlrt,
    /// Needs the true noise variance to set its threshold.
    SquareLaw { sigma_sq: f64 },
    Lrt(LrtParams),
}

impl Detector {
    pub fn name(&self) -> &'static str {
        match self {
            Detector::PostGlrt => "post-glrt",
            Detector::PreGlrt => "pre-glrt",
            Detector::SquareLaw { .. } => "square-law",
            Detector::Lrt(_) => "lrt",
        }
    }

    /// Statistic for one snapshot; `r` must be its beamformed vector.
    pub fn statistic(&self, s: &SnapshotMatrix, r: &[ComplexValue]) -> Result<f64> {
        let n = s.n as u32;
        match self {
            Detector::PostGlrt => post_glrt_raw(r, n),
            Detector::PreGlrt => pre_glrt_statistic(s, 0.0),
            Detector::SquareLaw { .. } => Ok(square_law_statistic(r)),
            Detector::Lrt(p) => lrt_statistic(r, p, n),
        }
    }

    /// Threshold from the detector's H0 law.
    pub fn analytic_threshold(&self, pfa: f64, m: u32, n_antennas: u32) -> Result<f64> {
        match self {
            Detector::PostGlrt => threshold_for_pfa(pfa, m),
            Detector::PreGlrt => pre_glrt_threshold(m, n_antennas, pfa),
            Detector::SquareLaw { sigma_sq } => square_law_threshold(pfa, m, n_antennas, *sigma_sq),
            Detector::Lrt(p) => lrt_threshold(pfa, p, m, n_antennas),
        }
    }
}

impl fmt::Display for Detector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Detector family named in configs; parameters are filled from the scenario.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DetectorKind {
    PostGlrt,
    PreGlrt,
    SquareLaw,
    Lrt,
}

impl DetectorKind {
    pub const ALL: [DetectorKind; 4] =
        [DetectorKind::PostGlrt, DetectorKind::PreGlrt, DetectorKind::SquareLaw, DetectorKind::Lrt];

    pub fn name(self) -> &'static str {
        match self {
            DetectorKind::PostGlrt => "post-glrt",
            DetectorKind::PreGlrt => "pre-glrt",
            DetectorKind::SquareLaw => "square-law",
            DetectorKind::Lrt => "lrt",
        }
    }
}

impl FromStr for DetectorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        DetectorKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown detector '{s}' (expected post-glrt, pre-glrt, square-law or lrt)")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::{pfa_closed_form, pfa_pre_glrt};
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> ComplexValue {
        ComplexValue::new(re, im)
    }

    #[test]
    fn hand_computed_mle() {
        let r = BeamformedVector::new(vec![c(2.0, 0.0), c(0.0, 0.0)]).unwrap();
        let e = mle_estimates(&r, 1).unwrap();
        assert_eq!((e.mu_x_hat, e.mu_y_hat, e.sigma0_sq_hat, e.sigma1_sq_hat), (1.0, 0.0, 1.0, 0.5));
        assert_eq!(post_glrt_statistic(&r, 1).unwrap(), 1.0);
    }

    #[test]
    fn degenerate_and_zero_mean() {
        let zeros = BeamformedVector::new(vec![c(0.0, 0.0); 5]).unwrap();
        assert!(matches!(mle_estimates(&zeros, 2), Err(Error::DegenerateSample)));
        let sym = BeamformedVector::new(vec![c(1.0, -2.0), c(-1.0, 2.0)]).unwrap();
        assert_eq!(post_glrt_statistic(&sym, 3).unwrap(), 0.0);
        assert!(BeamformedVector::new(vec![c(1.0, 0.0)]).is_err());
    }

    #[test]
    fn pre_glrt_edge_cases() {
        let z = SnapshotMatrix::zeros(3, 4).unwrap();
        assert!(matches!(pre_glrt_statistic(&z, 0.0), Err(Error::DegenerateSample)));
        let s = SnapshotMatrix::new(2, 2, vec![1.0, -1.0, 3.0, -3.0], vec![0.5, -0.5, 0.0, 0.0]).unwrap();
        assert_eq!(pre_glrt_statistic(&s, 0.0).unwrap(), 0.0);
        assert!(matches!(pre_glrt_statistic(&s, 100.0), Err(Error::DegenerateSample)));
        assert!(SnapshotMatrix::new(2, 3, vec![0.0; 5], vec![0.0; 6]).is_err());
    }

    #[test]
    fn pre_glrt_equals_post_glrt_for_one_antenna() {
        let x = vec![0.3, -1.2, 2.5, 0.7, 0.1];
        let y = vec![1.1, 0.4, -0.6, 0.9, -2.0];
        let r: Vec<_> = x.iter().zip(&y).map(|(a, b)| c(*a, *b)).collect();
        let s = SnapshotMatrix::new(1, 5, x, y).unwrap();
        let pre = pre_glrt_statistic(&s, 0.0).unwrap();
        let post = post_glrt_raw(&r, 1).unwrap();
        assert!((pre - post).abs() <= 1e-13 * post);
        // Same law too.
        assert!((pfa_pre_glrt(5, 1, 2.0).unwrap() - pfa_closed_form(2.0, 5).unwrap()).abs() < 1e-14);
    }

    #[test]
    fn square_law_values() {
        assert_eq!(square_law_statistic(&[c(0.0, 0.0); 3]), 0.0);
        assert_eq!(square_law_statistic(&[c(3.0, 4.0)]), 25.0);
        assert_eq!(square_law_threshold(1.0, 10, 3, 2.0).unwrap(), 0.0);
        assert!(square_law_threshold(0.1, 10, 3, 0.0).is_err());
    }

    #[test]
    fn lrt_hand_expansion() {
        // One sample: ln p1/p0 = (|r|^2 - |r - μ|^2) / (2Nσ^2).
        let p = LrtParams { mu_x: 0.8, mu_y: -0.3, sigma_sq: 1.5 };
        let r = c(1.7, 0.4);
        let want = (r.norm_sqr() - (r - c(0.8, -0.3)).norm_sqr()) / (2.0 * 2.0 * 1.5);
        assert!((lrt_statistic(&[r], &p, 2).unwrap() - want).abs() < 1e-15);
        let null = LrtParams { mu_x: 0.0, mu_y: 0.0, sigma_sq: 1.0 };
        assert_eq!(lrt_statistic(&[r, c(-4.0, 9.0)], &null, 3).unwrap(), 0.0);
        assert_eq!(lrt_threshold(1e-3, &null, 10, 3).unwrap(), 0.0);
        assert!(lrt_statistic(&[r], &LrtParams { sigma_sq: 0.0, ..p }, 1).is_err());
    }

    #[test]
    fn tie_goes_to_h0() {
        assert_eq!(decide(0.0, 0.0), Hypothesis::H0);
        assert_eq!(decide(1.0 + 1e-12, 1.0), Hypothesis::H1);
        assert_eq!(decide(f64::NAN, 1.0), Hypothesis::H0);
    }

    #[test]
    fn detector_names_round_trip() {
        for k in DetectorKind::ALL {
            assert_eq!(k.name().parse::<DetectorKind>().unwrap(), k);
        }
        assert!(matches!("cfar".parse::<DetectorKind>(), Err(Error::Config(_))));
    }

    fn vector() -> impl Strategy<Value = Vec<ComplexValue>> {
        prop::collection::vec((-10.0..10.0f64, -10.0..10.0f64).prop_map(|(a, b)| c(a, b)), 2..40)
    }

    proptest! {
        #[test]
        fn mle_identity(r in vector(), n in 1u32..20) {
            if let Ok(e) = mle_raw(&r, n) {
                let rhs = e.sigma1_sq_hat + (e.mu_x_hat * e.mu_x_hat + e.mu_y_hat * e.mu_y_hat) / (2.0 * f64::from(n));
                prop_assert!((e.sigma0_sq_hat - rhs).abs() <= 1e-12 * e.sigma0_sq_hat);
            }
        }

        #[test]
        fn post_glrt_scale_invariant(r in vector(), n in 1u32..20, k in 1e-3..1e3f64) {
            if let Ok(z) = post_glrt_raw(&r, n) {
                let scaled: Vec<_> = r.iter().map(|v| v * k).collect();
                let zs = post_glrt_raw(&scaled, n).unwrap();
                prop_assert!((z - zs).abs() <= 1e-12 * z.max(1e-300) + 1e-300);
            }
        }

        #[test]
        fn pre_glrt_scale_invariant(
            xs in prop::collection::vec(-5.0..5.0f64, 12),
            ys in prop::collection::vec(-5.0..5.0f64, 12),
            k in 1e-3..1e3f64,
        ) {
            let s = SnapshotMatrix::new(3, 4, xs.clone(), ys.clone()).unwrap();
            let t = SnapshotMatrix::new(3, 4, xs.iter().map(|v| v * k).collect(), ys.iter().map(|v| v * k).collect()).unwrap();
            let (a, b) = (pre_glrt_statistic(&s, 0.0).unwrap(), pre_glrt_statistic(&t, 0.0).unwrap());
            prop_assert!((a - b).abs() <= 1e-12 * a.max(1e-300) + 1e-300);
        }
    }
}
