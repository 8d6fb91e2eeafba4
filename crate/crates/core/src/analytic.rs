//! False-alarm and detection probabilities of the post-beamforming GLRT.

use crate::distributions::{chi2_isf, f_isf, f_sf, noncentral_chi2_sf, noncentral_f_sf};
use crate::quadrature::{integrate, QuadOptions};
use crate::special::{laguerre, ln_gamma, ln_kummer_1f1};
use crate::{Error, Result};
use statrs::function::erf::{erfc, erfc_inv};
use std::f64::consts::SQRT_2;
use std::time::{Duration, Instant};

const MAX_SERIES_TERMS: usize = 10_000;

/// Number of samples, target false-alarm rate and SNR aggregate, with the
/// matching threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatingPoint {
    pub m: u32,
    pub pfa: f64,
    pub upsilon: f64,
    pub gamma: f64,
}

impl OperatingPoint {
    pub fn new(m: u32, pfa: f64, upsilon: f64) -> Result<Self> {
        if !(upsilon >= 0.0 && upsilon.is_finite()) {
            return Err(Error::domain(format!("upsilon must be finite and >= 0, got {upsilon}")));
        }
        let gamma = threshold_for_pfa(pfa, m)?;
        Ok(OperatingPoint { m, pfa, upsilon, gamma })
    }

    /// Equal per-antenna SNR (dB) over `n` antennas.
    pub fn from_snr_db(m: u32, n: u32, pfa: f64, snr_db: f64) -> Result<Self> {
        Self::new(m, pfa, upsilon_from_snr_db(n, snr_db))
    }

    /// `Ω = (M - 1) / γ`.
    pub fn omega(&self) -> f64 {
        f64::from(self.m - 1) / self.gamma
    }
}

/// `Υ = N · SNR_n` with the per-antenna SNR given in dB.
pub fn upsilon_from_snr_db(n: u32, snr_db: f64) -> f64 {
    f64::from(n) * 10f64.powf(snr_db / 10.0)
}

fn check_m(m: u32) -> Result<()> {
    if m < 2 {
        Err(Error::domain(format!("m must be >= 2, got {m}")))
    } else {
        Ok(())
    }
}

pub fn pfa_closed_form(gamma: f64, m: u32) -> Result<f64> {
    check_m(m)?;
    if !(gamma >= 0.0) {
        return Err(Error::domain(format!("threshold must be >= 0, got {gamma}")));
    }
    let k = f64::from(m - 1);
    Ok((-k * (gamma / k).ln_1p()).exp())
}

pub fn threshold_for_pfa(pfa: f64, m: u32) -> Result<f64> {
    check_m(m)?;
    if !(pfa > 0.0 && pfa <= 1.0) {
        return Err(Error::domain(format!("pfa must lie in (0, 1], got {pfa}")));
    }
    let k = f64::from(m - 1);
    Ok(k * (-pfa.ln() / k).exp_m1())
}

/// Detection probability as a single finite integral.
///
/// With `u = (M-1)/(M+z-1)` the tail integral of the target-present density
/// becomes `(M-1) e^{-ΥM} ∫_0^{u_γ} u^{M-2} 1F1(M; 1; ΥM(1-u)) du`.
pub fn pd_quadrature(op: &OperatingPoint, tol: f64) -> Result<f64> {
    if !(tol > 0.0) {
        return Err(Error::domain("tolerance must be positive"));
    }
    let m = f64::from(op.m);
    let upper = (m - 1.0) / (m + op.gamma - 1.0);
    let um = op.upsilon * m;
    let integrand = |u: f64| -> Result<f64> {
        let f = ln_kummer_1f1(m, 1.0, um * (1.0 - u))?;
        let pow = if op.m == 2 { 0.0 } else { (m - 2.0) * u.ln() };
        Ok((m - 1.0) * (pow + f.ln_abs - um).exp())
    };
    let opts = QuadOptions { abs_tol: tol, rel_tol: 0.0, max_subdivisions: 5000 };
    let r = integrate(integrand, 0.0, upper, opts)?;
    Ok(r.value.clamp(0.0, 1.0))
}

/// Outcome of the residue series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesReport {
    pub pd: f64,
    /// Number of summed terms `T0`.
    pub terms_used: usize,
    /// Certified bound on the neglected tail, at most the requested tolerance.
    pub bound_at_stop: f64,
    /// The Laguerre-polynomial bound at `T0`, reported for comparison.
    pub laguerre_bound: f64,
    pub elapsed: Duration,
}

/// Per-term data shared by the series and its bounds.
struct SeriesTerms {
    m: f64,
    um: f64,
    omega: f64,
    ln_omega: f64,
    ln_1p_omega: f64,
    ln_lag: f64,
    ln_gamma_m: f64,
}

impl SeriesTerms {
    fn new(m: u32, upsilon: f64, omega: f64) -> Self {
        let mf = f64::from(m);
        SeriesTerms {
            m: mf,
            um: upsilon * mf,
            omega,
            ln_omega: omega.ln(),
            ln_1p_omega: omega.ln_1p(),
            ln_lag: laguerre(m - 1, -mf * upsilon).ln(),
            ln_gamma_m: ln_gamma(mf),
        }
    }

    /// `ln 2F~1(M-1, k+M; M; -Ω)`.
    ///
    /// Euler's transformation gives `(1+Ω)^{1-k-M} Σ_j k!/(k-j)! Ω^j / (M)_j`,
    /// a polynomial with positive terms.
    fn ln_f(&self, k: usize) -> f64 {
        const BIG: f64 = 1e250;
        let (mut sum, mut term, mut ln_scale) = (1.0_f64, 1.0_f64, 0.0_f64);
        for j in 0..k {
            let jf = j as f64;
            term *= (k as f64 - jf) * self.omega / (self.m + jf);
            sum += term;
            if sum > BIG {
                sum /= BIG;
                term /= BIG;
                ln_scale += BIG.ln();
            }
        }
        (1.0 - k as f64 - self.m) * self.ln_1p_omega + sum.ln() + ln_scale - self.ln_gamma_m
    }

    /// `ln 2F~1(M-1, k+M; M; -Ω)` from `q_k = (1+Ω)^{-k} Σ_j k!/(k-j)! Ω^j / (M)_j`.
    fn ln_f_from_q(&self, q: f64) -> f64 {
        (1.0 - self.m) * self.ln_1p_omega + q.ln() - self.ln_gamma_m
    }

    /// `q_{k+1}` from `q_k` and `q_{k-1}` (a contiguous relation of 2F1; the
    /// wanted solution is the dominant one, so forward recursion is stable).
    fn q_next(&self, k: usize, q_k: f64, q_km1: f64) -> f64 {
        let kf = k as f64;
        ((2.0 * kf + self.m + (1.0 + kf) * self.omega) * q_k - kf * q_km1) / ((self.m + kf) * (1.0 + self.omega))
    }

    /// `ln` of the coefficient `e^{-ΥM} Ω^{M-1} Γ(k+M) (ΥM)^k / Γ(k+1)^2`.
    fn ln_coef0(&self) -> f64 {
        -self.um + (self.m - 1.0) * self.ln_omega + self.ln_gamma_m
    }

    /// Step from coefficient `k - 1` to `k`.
    fn ln_coef_step(&self, k: usize) -> f64 {
        let kf = k as f64;
        self.um.ln() + (kf - 1.0 + self.m).ln() - 2.0 * kf.ln()
    }

    fn ln_laguerre_bound(&self, ln_f: f64) -> f64 {
        (self.m - 1.0) * self.ln_omega + self.ln_lag + ln_f + self.ln_gamma_m
    }

    /// Successive-term ratio bound `ΥM (k+M) / (k+1)^2`; it decreases in `k`.
    fn ratio(&self, k: usize) -> f64 {
        let kf = k as f64;
        self.um * (kf + self.m) / ((kf + 1.0) * (kf + 1.0))
    }
}

/// Detection probability from the residue series, truncated at the first `T0`
/// whose neglected tail is certified to be at most `tol`.
///
/// Two certified tail bounds are tracked: the Laguerre-polynomial bound of
/// [`truncation_bound`] and a geometric bound `t_{T0} / (1 - r_{T0})` from the
/// decreasing term-ratio majorant. The series stops when either holds.
pub fn pd_series(op: &OperatingPoint, tol: f64) -> Result<SeriesReport> {
    let start = Instant::now();
    if !(tol > 0.0) {
        return Err(Error::domain("tolerance must be positive"));
    }
    if op.gamma == 0.0 {
        return Ok(SeriesReport {
            pd: 1.0,
            terms_used: 0,
            bound_at_stop: 0.0,
            laguerre_bound: 0.0,
            elapsed: start.elapsed(),
        });
    }
    let st = SeriesTerms::new(op.m, op.upsilon, op.omega());
    let mut sum = 0.0_f64;
    let mut ln_coef = st.ln_coef0();
    let (mut q_prev, mut q) = (0.0, 1.0);
    for k in 0..MAX_SERIES_TERMS {
        if k > 0 {
            ln_coef += st.ln_coef_step(k);
            let next = st.q_next(k - 1, q, q_prev);
            q_prev = q;
            q = next;
        }
        let ln_f = st.ln_f_from_q(q);
        let term = (ln_coef + ln_f).exp();
        let r = st.ratio(k);
        let geometric = if r < 1.0 { term / (1.0 - r) } else { f64::INFINITY };
        let lag = st.ln_laguerre_bound(ln_f).exp();
        let bound = geometric.min(lag);
        if bound <= tol {
            return Ok(SeriesReport {
                pd: sum.clamp(0.0, 1.0),
                terms_used: k,
                bound_at_stop: bound,
                laguerre_bound: lag,
                elapsed: start.elapsed(),
            });
        }
        sum += term;
    }
    Err(Error::NonConvergence { what: "residue series", iterations: MAX_SERIES_TERMS })
}

/// The first `count` series terms, each with its hypergeometric factor summed
/// directly rather than by recurrence.
pub fn series_terms(op: &OperatingPoint, count: usize) -> Result<Vec<f64>> {
    if op.gamma == 0.0 {
        return Err(Error::domain("series terms are undefined at a zero threshold"));
    }
    let st = SeriesTerms::new(op.m, op.upsilon, op.omega());
    let mut ln_coef = st.ln_coef0();
    Ok((0..count)
        .map(|k| {
            if k > 0 {
                ln_coef += st.ln_coef_step(k);
            }
            (ln_coef + st.ln_f(k)).exp()
        })
        .collect())
}

/// Partial sum of the first `t0` series terms.
pub fn pd_series_partial(op: &OperatingPoint, t0: usize) -> Result<f64> {
    if op.gamma == 0.0 {
        return Ok(1.0);
    }
    Ok(series_terms(op, t0)?.iter().sum())
}

/// Bound on the series tail beyond `t0` terms:
/// `Ω^{M-1} L_{M-1}(-MΥ) 2F1(M-1, M+T0; M; -Ω)`.
pub fn truncation_bound(m: u32, upsilon: f64, omega: f64, t0: usize) -> Result<f64> {
    check_m(m)?;
    if !(upsilon >= 0.0 && omega > 0.0) {
        return Err(Error::domain("truncation_bound needs upsilon >= 0 and omega > 0"));
    }
    let st = SeriesTerms::new(m, upsilon, omega);
    Ok(st.ln_laguerre_bound(st.ln_f(t0)).exp())
}

fn crossing(curve: &[(f64, f64)], target: f64) -> Result<f64> {
    for w in curve.windows(2) {
        let ((x0, y0), (x1, y1)) = (w[0], w[1]);
        if (y0 <= target && target <= y1) || (y1 <= target && target <= y0) {
            if y1 == y0 {
                return Ok(x0);
            }
            return Ok(x0 + (target - y0) * (x1 - x0) / (y1 - y0));
        }
    }
    Err(Error::Bracket { target })
}

/// Extra SNR (dB) the detector needs over the reference to reach `target_pd`.
///
/// Curves are `(snr_db, pd)` pairs sorted by SNR; crossings are located by
/// piecewise-linear interpolation, which preserves monotonicity.
pub fn snr_loss(detector: &[(f64, f64)], reference: &[(f64, f64)], target_pd: f64) -> Result<f64> {
    Ok(crossing(detector, target_pd)? - crossing(reference, target_pd)?)
}

/// SNR (dB) at which a monotone PD curve reaches `target`, by bisection on `[lo, hi]`.
pub fn snr_for_pd(pd: impl Fn(f64) -> Result<f64>, target: f64, lo: f64, hi: f64) -> Result<f64> {
    let (mut lo, mut hi) = (lo, hi);
    if pd(lo)? > target || pd(hi)? < target {
        return Err(Error::Bracket { target });
    }
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if pd(mid)? < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-10 {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Gaussian tail `Q(x)`.
pub fn q_function(x: f64) -> f64 {
    0.5 * erfc(x / SQRT_2)
}

/// Inverse Gaussian tail.
pub fn q_inverse(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::domain(format!("q_inverse needs p in (0, 1), got {p}")));
    }
    Ok(SQRT_2 * erfc_inv(2.0 * p))
}

/// Clairvoyant LRT with known echo and noise power.
pub fn pd_lrt(m: u32, pfa: f64, upsilon: f64) -> Result<f64> {
    check_m(m)?;
    let d = (2.0 * f64::from(m) * upsilon).sqrt();
    Ok(q_function(q_inverse(pfa)? - d))
}

/// Square-law detector with known noise power: `Σ|R_m|^2 / (Nσ^2)` against a chi-squared threshold.
pub fn pd_square_law(m: u32, pfa: f64, upsilon: f64) -> Result<f64> {
    check_m(m)?;
    let dof = 2 * m;
    let t = chi2_isf(pfa, dof)?;
    noncentral_chi2_sf(t, dof, 2.0 * f64::from(m) * upsilon)
}

/// Threshold on `Σ|R_m|^2 / (Nσ^2)` for the square-law detector.
pub fn square_law_normalized_threshold(m: u32, pfa: f64) -> Result<f64> {
    check_m(m)?;
    chi2_isf(pfa, 2 * m)
}

/// Degrees of freedom of the pre-beamforming GLRT F statistic.
pub fn pre_glrt_dof(m: u32, n: u32) -> (f64, f64) {
    let n = f64::from(n);
    (2.0 * n, 2.0 * n * f64::from(m - 1))
}

pub fn pre_glrt_threshold(m: u32, n: u32, pfa: f64) -> Result<f64> {
    check_m(m)?;
    let (d1, d2) = pre_glrt_dof(m, n);
    f_isf(pfa, d1, d2)
}

/// Pre-beamforming GLRT, `sum_snr = Σ_n SNR_n` (linear).
pub fn pd_pre_glrt(m: u32, n: u32, pfa: f64, sum_snr: f64) -> Result<f64> {
    let t = pre_glrt_threshold(m, n, pfa)?;
    let (d1, d2) = pre_glrt_dof(m, n);
    noncentral_f_sf(t, d1, d2, 2.0 * f64::from(m) * sum_snr)
}

/// Pre-beamforming GLRT false-alarm rate at a given threshold.
pub fn pfa_pre_glrt(m: u32, n: u32, threshold: f64) -> Result<f64> {
    let (d1, d2) = pre_glrt_dof(m, n);
    f_sf(threshold, d1, d2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn pfa_and_threshold_values() {
        assert_eq!(pfa_closed_form(0.0, 9).unwrap(), 1.0);
        assert!(rel(pfa_closed_form(1.0, 2).unwrap(), 0.5) < 1e-15);
        assert_eq!(threshold_for_pfa(1.0, 30).unwrap(), 0.0);
        assert!(rel(threshold_for_pfa(1e-8, 50).unwrap(), 22.36107539756094561) < 1e-13);
        let g = threshold_for_pfa(1e-6, 15).unwrap();
        assert!(rel(pfa_closed_form(g, 15).unwrap(), 1e-6) < 1e-14);
        assert!(threshold_for_pfa(0.0, 5).is_err());
        assert!(threshold_for_pfa(1.5, 5).is_err());
    }

    #[test]
    fn omega_matches_direct_expression() {
        // Ω = (M-1)/γ and Ω/(1+Ω) = PFA^{1/(M-1)}.
        let op = OperatingPoint::new(50, 1e-8, 0.1).unwrap();
        let z = op.omega() / (1.0 + op.omega());
        assert!(rel(z, 1e-8f64.powf(1.0 / 49.0)) < 1e-14);
    }

    #[test]
    fn quadrature_reduces_to_pfa() {
        for (m, pfa) in [(2, 0.3), (15, 1e-6), (50, 1e-8)] {
            let op = OperatingPoint::new(m, pfa, 0.0).unwrap();
            assert!(rel(pd_quadrature(&op, 1e-16).unwrap(), pfa) < 1e-10);
        }
    }

    #[test]
    fn series_reduces_to_pfa_with_one_term() {
        let op = OperatingPoint::new(50, 1e-8, 0.0).unwrap();
        let r = pd_series(&op, 1e-12).unwrap();
        assert_eq!(r.terms_used, 1);
        assert!(rel(r.pd, 1e-8) < 1e-12);
    }

    #[test]
    fn table_corner_rows() {
        let op = OperatingPoint::new(50, 1e-8, 0.1).unwrap();
        let s = pd_series(&op, 1e-9).unwrap();
        assert!((s.pd - 0.00106).abs() < 5e-5);
        assert!(s.bound_at_stop <= 1e-9);
        assert!((pd_quadrature(&op, 1e-12).unwrap() - s.pd).abs() < 1e-8);
        let op = OperatingPoint::new(50, 1e-6, 10f64.powf(-0.1)).unwrap();
        let s = pd_series(&op, 1e-9).unwrap();
        assert!((s.pd - 0.99902).abs() < 5e-5);
        assert!((pd_quadrature(&op, 1e-12).unwrap() - s.pd).abs() < 1e-8);
    }

    #[test]
    fn truncation_bound_is_sound_and_monotone() {
        let op = OperatingPoint::new(50, 1e-8, 0.1).unwrap();
        let full = pd_series(&op, 1e-15).unwrap().pd;
        let mut last = f64::INFINITY;
        for t0 in [0, 5, 10, 20, 23, 40, 80] {
            let b = truncation_bound(50, 0.1, op.omega(), t0).unwrap();
            let tail = full - pd_series_partial(&op, t0).unwrap();
            assert!(tail <= b * (1.0 + 1e-12) + 1e-16, "t0={t0} tail={tail} bound={b}");
            assert!(b <= last);
            last = b;
        }
        // The Laguerre bound first drops below 1e-9 at T0 = 27 for this point.
        assert!(truncation_bound(50, 0.1, op.omega(), 26).unwrap() > 1e-9);
        assert!(truncation_bound(50, 0.1, op.omega(), 27).unwrap() <= 1e-9);
    }

    #[test]
    fn series_factor_matches_general_gauss() {
        use crate::special::ln_gauss_2f1_regularized;
        for (m, omega) in [(2u32, 0.3), (50, 2.19), (100, 21.0)] {
            let st = SeriesTerms::new(m, 0.1, omega);
            for k in [0usize, 1, 7, 60, 300] {
                let mf = f64::from(m);
                let want = ln_gauss_2f1_regularized(mf - 1.0, k as f64 + mf, mf, -omega).unwrap().ln_abs;
                assert!((st.ln_f(k) - want).abs() < 1e-12 * want.abs().max(1.0));
            }
            let (mut q_prev, mut q) = (0.0, 1.0);
            for k in 0..400 {
                if k > 0 {
                    let next = st.q_next(k - 1, q, q_prev);
                    q_prev = q;
                    q = next;
                }
                assert!((st.ln_f_from_q(q) - st.ln_f(k)).abs() < 1e-11 * st.ln_f(k).abs().max(1.0), "m={m} k={k}");
            }
        }
    }

    #[test]
    fn snr_loss_of_shifted_curve() {
        let base: Vec<(f64, f64)> = (0..=40).map(|i| {
            let x = -10.0 + i as f64 * 0.5;
            (x, 1.0 / (1.0 + (-x).exp()))
        }).collect();
        assert_eq!(snr_loss(&base, &base, 0.8).unwrap(), 0.0);
        let shifted: Vec<(f64, f64)> = base.iter().map(|&(x, y)| (x + 1.5, y)).collect();
        assert!((snr_loss(&shifted, &base, 0.8).unwrap() - 1.5).abs() < 1e-12);
        assert!(matches!(snr_loss(&base, &base, 1.5), Err(Error::Bracket { .. })));
    }

    #[test]
    fn comparison_detectors_reduce_to_pfa() {
        assert!(rel(pd_lrt(15, 1e-6, 0.0).unwrap(), 1e-6) < 1e-9);
        assert!(rel(pd_square_law(15, 1e-6, 0.0).unwrap(), 1e-6) < 1e-9);
        assert!(rel(pd_pre_glrt(15, 10, 1e-6, 0.0).unwrap(), 1e-6) < 1e-9);
    }

    proptest! {
        #[test]
        fn threshold_round_trip(m in 2u32..200, e in 0.0f64..10.0) {
            let pfa = 10f64.powf(-e);
            let g = threshold_for_pfa(pfa, m).unwrap();
            prop_assert!(rel(pfa_closed_form(g, m).unwrap(), pfa) < 1e-12);
        }

        #[test]
        fn threshold_decreases_in_pfa(m in 2u32..100, a in 1e-9f64..0.5, b in 1e-9f64..0.5) {
            prop_assume!(a < b);
            prop_assert!(threshold_for_pfa(a, m).unwrap() > threshold_for_pfa(b, m).unwrap());
        }

        #[test]
        fn pd_exceeds_pfa_and_grows(m in 2u32..60, e in 1.0f64..8.0, u in 0.001f64..1.0) {
            let pfa = 10f64.powf(-e);
            let lo = pd_series(&OperatingPoint::new(m, pfa, u).unwrap(), 1e-13).unwrap().pd;
            let hi = pd_series(&OperatingPoint::new(m, pfa, 1.1 * u).unwrap(), 1e-13).unwrap().pd;
            prop_assert!(lo >= pfa);
            prop_assert!(hi > lo || lo > 1.0 - 1e-12);
        }

        #[test]
        fn series_stops_within_tolerance(m in 2u32..120, e in 1.0f64..9.0, u in 0.0f64..2.0, t in 6.0f64..14.0) {
            let tol = 10f64.powf(-t);
            let r = pd_series(&OperatingPoint::new(m, 10f64.powf(-e), u).unwrap(), tol).unwrap();
            prop_assert!(r.bound_at_stop <= tol);
            prop_assert!((0.0..=1.0).contains(&r.pd));
        }
    }
}
