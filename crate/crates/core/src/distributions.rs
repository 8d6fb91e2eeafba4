//! Laws of the detection statistic and the chi-squared / F families around it.

use crate::special::{ln_gamma, ln_kummer_1f1};
use crate::{Error, Result};
use statrs::function::beta::beta_reg;
use statrs::function::gamma::{gamma_lr, gamma_ur};

/// Law of `Z` under noise only.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct H0Law {
    pub m: u32,
}

impl H0Law {
    pub fn new(m: u32) -> Result<Self> {
        if m < 2 {
            return Err(Error::domain(format!("H0Law needs m >= 2, got {m}")));
        }
        Ok(H0Law { m })
    }

    pub fn pdf(&self, z: f64) -> Result<f64> {
        pdf_h0(z, self)
    }
}

/// Law of `Z` with a nonfluctuating target, `upsilon = (mu_x^2 + mu_y^2) / (2 N sigma^2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct H1Law {
    pub m: u32,
    pub upsilon: f64,
}

impl H1Law {
    pub fn new(m: u32, upsilon: f64) -> Result<Self> {
        if m < 2 {
            return Err(Error::domain(format!("H1Law needs m >= 2, got {m}")));
        }
        if !(upsilon >= 0.0 && upsilon.is_finite()) {
            return Err(Error::domain(format!("H1Law needs upsilon >= 0, got {upsilon}")));
        }
        Ok(H1Law { m, upsilon })
    }

    pub fn pdf(&self, z: f64) -> Result<f64> {
        pdf_h1(z, self)
    }
}

/// Ratio of two independent noncentral chi-squared variates, each divided by its dof.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DoublyNoncentralF {
    pub alpha1: u32,
    pub alpha2: u32,
    pub lambda1: f64,
    pub lambda2: f64,
}

impl DoublyNoncentralF {
    pub fn new(alpha1: u32, alpha2: u32, lambda1: f64, lambda2: f64) -> Result<Self> {
        if alpha1 == 0 || alpha2 == 0 {
            return Err(Error::domain("doubly noncentral F needs positive degrees of freedom"));
        }
        if !(lambda1 >= 0.0 && lambda2 >= 0.0 && lambda1.is_finite() && lambda2.is_finite()) {
            return Err(Error::domain("doubly noncentral F needs finite nonnegative noncentralities"));
        }
        Ok(DoublyNoncentralF { alpha1, alpha2, lambda1, lambda2 })
    }

    /// The specialization that describes `Z` under a target.
    pub fn for_h1(law: &H1Law) -> Self {
        DoublyNoncentralF {
            alpha1: 2,
            alpha2: 2 * (law.m - 1),
            lambda1: 2.0 * f64::from(law.m) * law.upsilon,
            lambda2: 0.0,
        }
    }
}

fn check_z(z: f64) -> Result<()> {
    if z >= 0.0 && z.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("density argument must be finite and >= 0, got {z}")))
    }
}

pub fn pdf_h0(z: f64, law: &H0Law) -> Result<f64> {
    check_z(z)?;
    let m = f64::from(law.m);
    Ok((m * ((m - 1.0) / (m + z - 1.0)).ln()).exp())
}

pub fn pdf_h1(z: f64, law: &H1Law) -> Result<f64> {
    check_z(z)?;
    if law.upsilon == 0.0 {
        return pdf_h0(z, &H0Law { m: law.m });
    }
    let m = f64::from(law.m);
    let x = law.upsilon * z * m / (m + z - 1.0);
    let f = ln_kummer_1f1(m, 1.0, x)?;
    let ln_h0 = m * ((m - 1.0) / (m + z - 1.0)).ln();
    Ok((f.ln_abs + ln_h0 - law.upsilon * m).exp())
}

/// Density of the doubly noncentral F law by diagonal-shell summation of its
/// Poisson double series.
pub fn doubly_noncentral_f_pdf(z: f64, law: &DoublyNoncentralF) -> Result<f64> {
    const MAX_SHELLS: usize = 10_000;
    check_z(z)?;
    let a1 = f64::from(law.alpha1);
    let a2 = f64::from(law.alpha2);
    let (l1, l2) = (law.lambda1, law.lambda2);
    let denom = a1 * z + a2;
    // Terms are  C * u^k * v^l / (k! l! B(a1/2 + k, a2/2 + l)) * z^{a1/2 - 1 + k}.
    let ln_c = -(l1 + l2) / 2.0 + 0.5 * a1 * a1.ln() + 0.5 * a2 * a2.ln() - 0.5 * (a1 + a2) * denom.ln();
    let ln_u = (0.5 * l1 * a1 / denom).ln();
    let ln_v = (0.5 * l2 * a2 / denom).ln();
    let ln_z = z.ln();
    let term = |k: usize, l: usize| -> f64 {
        let (kf, lf) = (k as f64, l as f64);
        let zpow = 0.5 * a1 - 1.0 + kf;
        let z_part = if zpow == 0.0 { 0.0 } else { zpow * ln_z };
        let u_part = if k == 0 { 0.0 } else { kf * ln_u };
        let v_part = if l == 0 { 0.0 } else { lf * ln_v };
        let ln_b = ln_gamma(0.5 * a1 + kf) + ln_gamma(0.5 * a2 + lf) - ln_gamma(0.5 * (a1 + a2) + kf + lf);
        (ln_c + z_part + u_part + v_part - ln_gamma(kf + 1.0) - ln_gamma(lf + 1.0) - ln_b).exp()
    };
    let mode = 0.5 * (l1 + l2);
    let mut total = 0.0;
    for s in 0..MAX_SHELLS {
        let mut shell = 0.0;
        for k in 0..=s {
            let l = s - k;
            if (l1 == 0.0 && k > 0) || (l2 == 0.0 && l > 0) {
                continue;
            }
            shell += term(k, l);
        }
        total += shell;
        if !total.is_finite() {
            return Err(Error::domain(format!("doubly noncentral F density diverges at z = {z}")));
        }
        let past_mode = s as f64 > mode;
        if past_mode && shell <= 1e-14 * total {
            return Ok(total);
        }
        if l1 == 0.0 && l2 == 0.0 {
            return Ok(total);
        }
    }
    Err(Error::NonConvergence { what: "doubly noncentral F series", iterations: MAX_SHELLS })
}

fn check_x(x: f64) -> Result<()> {
    if x >= 0.0 && !x.is_nan() {
        Ok(())
    } else {
        Err(Error::domain(format!("distribution argument must be >= 0, got {x}")))
    }
}

pub fn chi2_cdf(x: f64, dof: u32) -> Result<f64> {
    check_x(x)?;
    if x == 0.0 {
        return Ok(0.0);
    }
    Ok(gamma_lr(0.5 * f64::from(dof), 0.5 * x))
}

pub fn chi2_sf(x: f64, dof: u32) -> Result<f64> {
    check_x(x)?;
    if x == 0.0 {
        return Ok(1.0);
    }
    Ok(gamma_ur(0.5 * f64::from(dof), 0.5 * x))
}

/// Poisson(λ/2) mixture `Σ_j w_j g(j)`, summed outward from the mode in log space.
fn poisson_mixture(lambda: f64, mut g: impl FnMut(u64) -> f64) -> f64 {
    let mu = 0.5 * lambda;
    let ln_w = |j: u64| -> f64 {
        let jf = j as f64;
        -mu + jf * mu.ln() - ln_gamma(jf + 1.0)
    };
    let mode = mu.floor() as u64;
    let mut sum = 0.0;
    let mut j = mode;
    loop {
        let w = ln_w(j).exp();
        sum += w * g(j);
        if w < 1e-20 && j > mode {
            break;
        }
        j += 1;
    }
    let mut j = mode;
    while j > 0 {
        j -= 1;
        let w = ln_w(j).exp();
        sum += w * g(j);
        if w < 1e-20 {
            break;
        }
    }
    sum
}

pub fn noncentral_chi2_cdf(x: f64, dof: u32, lambda: f64) -> Result<f64> {
    check_x(x)?;
    check_lambda(lambda)?;
    if lambda == 0.0 {
        return chi2_cdf(x, dof);
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    let k = f64::from(dof);
    Ok(poisson_mixture(lambda, |j| gamma_lr(0.5 * k + j as f64, 0.5 * x)).clamp(0.0, 1.0))
}

pub fn noncentral_chi2_sf(x: f64, dof: u32, lambda: f64) -> Result<f64> {
    check_x(x)?;
    check_lambda(lambda)?;
    if lambda == 0.0 {
        return chi2_sf(x, dof);
    }
    if x == 0.0 {
        return Ok(1.0);
    }
    let k = f64::from(dof);
    Ok(poisson_mixture(lambda, |j| gamma_ur(0.5 * k + j as f64, 0.5 * x)).clamp(0.0, 1.0))
}

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda >= 0.0 && lambda.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("noncentrality must be finite and >= 0, got {lambda}")))
    }
}

/// Survival function of the central F law with `(d1, d2)` degrees of freedom.
pub fn f_sf(x: f64, d1: f64, d2: f64) -> Result<f64> {
    check_x(x)?;
    Ok(beta_reg(0.5 * d2, 0.5 * d1, d2 / (d2 + d1 * x)))
}

/// Survival function of the singly noncentral F law (noncentral numerator).
pub fn noncentral_f_sf(x: f64, d1: f64, d2: f64, lambda: f64) -> Result<f64> {
    check_x(x)?;
    check_lambda(lambda)?;
    if lambda == 0.0 {
        return f_sf(x, d1, d2);
    }
    let y = d2 / (d2 + d1 * x);
    Ok(poisson_mixture(lambda, |j| beta_reg(0.5 * d2, 0.5 * d1 + j as f64, y)).clamp(0.0, 1.0))
}

/// Inverts a decreasing survival function by bracketing and bisection.
pub(crate) fn invert_sf(p: f64, start: f64, sf: impl Fn(f64) -> Result<f64>) -> Result<f64> {
    if p == 1.0 {
        return Ok(0.0);
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::domain(format!("tail probability must lie in (0, 1], got {p}")));
    }
    let (mut lo, mut hi) = (0.0, start.max(1.0));
    let mut guard = 0;
    while sf(hi)? > p {
        lo = hi;
        hi *= 2.0;
        guard += 1;
        if guard > 200 {
            return Err(Error::Bracket { target: p });
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if sf(mid)? > p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `x` with `chi2_sf(x, dof) = p`.
pub fn chi2_isf(p: f64, dof: u32) -> Result<f64> {
    invert_sf(p, f64::from(dof), |x| chi2_sf(x, dof))
}

/// `x` with `f_sf(x, d1, d2) = p`.
pub fn f_isf(p: f64, d1: f64, d2: f64) -> Result<f64> {
    invert_sf(p, 1.0, |x| f_sf(x, d1, d2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{integrate_to_infinity, QuadOptions};
    use proptest::prelude::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn h0_density_values() {
        assert_eq!(pdf_h0(0.0, &H0Law::new(7).unwrap()).unwrap(), 1.0);
        assert_eq!(pdf_h0(1.0, &H0Law::new(2).unwrap()).unwrap(), 0.25);
        // Central F(2, 42) density at 5.
        assert!(rel(pdf_h0(5.0, &H0Law::new(22).unwrap()).unwrap(), 0.0091077442894158777709) < 1e-13);
        assert!(pdf_h0(-1.0, &H0Law::new(3).unwrap()).is_err());
        assert!(H0Law::new(1).is_err());
    }

    #[test]
    fn h1_density_values() {
        let law = H1Law::new(15, 0.1).unwrap();
        assert!(rel(pdf_h1(0.0, &law).unwrap(), (-1.5f64).exp()) < 1e-15);
        assert!(rel(pdf_h1(3.0, &law).unwrap(), 0.14612223231439849439) < 1e-13);
        let law = H1Law::new(50, 0.1).unwrap();
        assert!(rel(pdf_h1(10.0, &law).unwrap(), 0.04551101735918414854) < 1e-13);
    }

    #[test]
    fn h1_collapses_to_h0_exactly() {
        for m in [2, 15, 50] {
            for z in [0.0, 0.3, 2.0, 17.0, 300.0] {
                let h0 = pdf_h0(z, &H0Law::new(m).unwrap()).unwrap();
                let h1 = pdf_h1(z, &H1Law::new(m, 0.0).unwrap()).unwrap();
                assert_eq!(h0, h1);
            }
        }
    }

    #[test]
    fn doubly_noncentral_values() {
        let central = DoublyNoncentralF::new(2, 42, 0.0, 0.0).unwrap();
        assert!(rel(doubly_noncentral_f_pdf(5.0, &central).unwrap(), 0.0091077442894158777709) < 1e-12);
        let law = DoublyNoncentralF::for_h1(&H1Law::new(15, 0.1).unwrap());
        let h1 = pdf_h1(3.0, &H1Law::new(15, 0.1).unwrap()).unwrap();
        assert!(rel(doubly_noncentral_f_pdf(3.0, &law).unwrap(), h1) < 1e-12);
        let both = DoublyNoncentralF::new(2, 6, 1.0, 1.0).unwrap();
        assert!(rel(doubly_noncentral_f_pdf(1.0, &both).unwrap(), 0.31788804249340053664) < 1e-12);
    }

    #[test]
    fn central_f_density_is_textbook() {
        for (d1, d2) in [(2u32, 8u32), (4, 10), (3, 7)] {
            let law = DoublyNoncentralF::new(d1, d2, 0.0, 0.0).unwrap();
            for x in [0.2, 1.0, 3.5] {
                let (a, b) = (f64::from(d1), f64::from(d2));
                let ln_b = ln_gamma(a / 2.0) + ln_gamma(b / 2.0) - ln_gamma((a + b) / 2.0);
                let want = ((a * x).powf(a) * b.powf(b) / (a * x + b).powf(a + b)).sqrt() / (x * ln_b.exp());
                assert!(rel(doubly_noncentral_f_pdf(x, &law).unwrap(), want) < 1e-12);
            }
        }
    }

    #[test]
    fn chi2_values() {
        assert_eq!(chi2_cdf(0.0, 4).unwrap(), 0.0);
        assert!(rel(noncentral_chi2_cdf(5.0, 4, 2.0).unwrap(), 0.48196384244277051409) < 1e-12);
        for x in [0.1, 1.0, 4.0, 20.0] {
            assert_eq!(noncentral_chi2_cdf(x, 6, 0.0).unwrap(), chi2_cdf(x, 6).unwrap());
        }
        assert!(chi2_cdf(-1.0, 2).is_err());
        let x = chi2_isf(1e-6, 30).unwrap();
        assert!(rel(chi2_sf(x, 30).unwrap(), 1e-6) < 1e-10);
    }

    #[test]
    fn noncentral_chi2_large_lambda() {
        // Mean of the law is dof + lambda; the CDF there sits near one half.
        let c = noncentral_chi2_cdf(1000.0 + 4.0, 4, 1000.0).unwrap();
        assert!((c - 0.5).abs() < 0.02);
        let s = noncentral_chi2_sf(1004.0, 4, 1000.0).unwrap();
        assert!((c + s - 1.0).abs() < 1e-12);
    }

    #[test]
    fn f_law_tails() {
        let x = f_isf(1e-6, 20.0, 280.0).unwrap();
        assert!(rel(f_sf(x, 20.0, 280.0).unwrap(), 1e-6) < 1e-10);
        assert!(noncentral_f_sf(x, 20.0, 280.0, 30.0).unwrap() > 1e-6);
    }

    #[test]
    fn densities_integrate_to_one() {
        let opts = QuadOptions { abs_tol: 1e-12, rel_tol: 1e-13, max_subdivisions: 4000 };
        for m in [2, 5, 15, 50, 100] {
            let law = H0Law::new(m).unwrap();
            let r = integrate_to_infinity(|z| pdf_h0(z, &law), 0.0, opts).unwrap();
            assert!((r.value - 1.0).abs() < 1e-10, "m={m}: {}", r.value);
        }
        for m in [2, 15, 50] {
            for u in [0.05, 0.1, 0.5, 1.0] {
                let law = H1Law::new(m, u).unwrap();
                let r = integrate_to_infinity(|z| pdf_h1(z, &law), 0.0, opts).unwrap();
                assert!((r.value - 1.0).abs() < 1e-8, "m={m} u={u}: {}", r.value);
            }
        }
    }

    proptest! {
        #[test]
        fn h1_density_at_zero_snr_is_h0(z in 0.0f64..50.0, m in 2u32..200) {
            prop_assert_eq!(pdf_h1(z, &H1Law::new(m, 0.0).unwrap()).unwrap(), pdf_h0(z, &H0Law::new(m).unwrap()).unwrap());
        }

        #[test]
        fn noncentral_chi2_reduces_when_lambda_vanishes(x in 0.0f64..80.0, dof in 1u32..60) {
            prop_assert_eq!(noncentral_chi2_cdf(x, dof, 0.0).unwrap(), chi2_cdf(x, dof).unwrap());
        }

        #[test]
        fn noncentral_chi2_cdf_and_sf_sum_to_one(x in 0.0f64..200.0, dof in 1u32..40, lambda in 0.0f64..150.0) {
            let c = noncentral_chi2_cdf(x, dof, lambda).unwrap();
            let s = noncentral_chi2_sf(x, dof, lambda).unwrap();
            prop_assert!((c + s - 1.0).abs() < 1e-10);
        }
    }
}
