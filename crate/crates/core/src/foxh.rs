//! Fox H-functions of one and two variables by Mellin-Barnes contour quadrature.
//!
//! The kernel is
//!
//! ```text
//! Θ(s) = Π_i Γ(δ_i + Σ_k d_ik s_k) / Π_j Γ(β_j + Σ_k b_jk s_k)
//! ```
//!
//! and `H(x) = (2πi)^{-L} ∫ Θ(s) Π_k x_k^{-s_k} ds`. Axes with `x_k > 0` are
//! integrated along the vertical line `Re s_k = ξ_k`, truncated at `±W`. For
//! `x_k < 0` the factor `x_k^{-s_k}` grows like `e^{π|Im s_k|}` on a vertical
//! line, so that axis is deformed into a loop that starts at `-∞ - ic`, passes
//! `ξ_k` and returns to `-∞ + ic`, enclosing the same left-hand poles.

use crate::quadrature::{integrate, QuadOptions};
use crate::special::{ln_gamma, log_gamma_complex};
use crate::{ComplexValue, Error, Result};
use num_complex::Complex64;
use std::cell::Cell;
use std::f64::consts::PI;

/// Half-height of the loop contours around the negative real axis.
const LOOP_HALF_HEIGHT: f64 = 1.0;
/// Longest loop ray considered before giving up.
const MAX_LOOP_LENGTH: f64 = 5000.0;
/// `exp` overflows beyond this magnitude.
const LOG_LIMIT: f64 = 700.0;

#[derive(Debug, Clone, PartialEq)]
pub struct FoxHProblem {
    /// Arguments, one per variable (`L = x.len()` is 1 or 2).
    pub x: Vec<f64>,
    pub delta: Vec<f64>,
    /// `delta.len()` rows of `L` coefficients.
    pub dmat: Vec<Vec<f64>>,
    pub beta: Vec<f64>,
    /// `beta.len()` rows of `L` coefficients.
    pub bmat: Vec<Vec<f64>>,
    /// Real parts of the contours; chosen automatically when `None`.
    pub contour_offsets: Option<Vec<f64>>,
    /// Half-length `W` of vertical contours.
    pub truncation: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FoxHEvaluation {
    pub value: ComplexValue,
    pub abs_error: f64,
    /// Set when a contour reaches `|Im s| π` beyond the range `exp` can represent.
    pub branch_warning: bool,
    pub kernel_evaluations: usize,
    pub offsets: Vec<f64>,
}

/// Inputs of the detection probability as a bivariate H-function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PdFoxHInputs {
    pub m: u32,
    pub upsilon: f64,
    pub omega: f64,
    /// `Φ = Ω^{M-1} e^{-ΥM} / Γ(M-1)`.
    pub phi: f64,
}

impl PdFoxHInputs {
    pub fn new(m: u32, upsilon: f64, omega: f64) -> Result<Self> {
        if m < 2 || !(upsilon >= 0.0 && upsilon.is_finite()) || !(omega > 0.0 && omega.is_finite()) {
            return Err(Error::domain("PdFoxHInputs needs m >= 2, upsilon >= 0 and omega > 0"));
        }
        Ok(PdFoxHInputs { m, upsilon, omega, phi: Self::ln_phi_of(m, upsilon, omega).exp() })
    }

    pub fn from_operating_point(op: &crate::analytic::OperatingPoint) -> Result<Self> {
        Self::new(op.m, op.upsilon, op.omega())
    }

    fn ln_phi_of(m: u32, upsilon: f64, omega: f64) -> f64 {
        let mf = f64::from(m);
        (mf - 1.0) * omega.ln() - upsilon * mf - ln_gamma(mf - 1.0)
    }

    fn ln_phi(&self) -> f64 {
        Self::ln_phi_of(self.m, self.upsilon, self.omega)
    }

    /// Coefficient structure `δ = [0, 0, M-1, M]`, `β = [M, 1]`, `B = -I`.
    pub fn problem(&self, truncation: f64) -> FoxHProblem {
        let m = f64::from(self.m);
        FoxHProblem {
            x: vec![self.omega, -self.upsilon * m],
            delta: vec![0.0, 0.0, m - 1.0, m],
            dmat: vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![-1.0, 0.0], vec![-1.0, -1.0]],
            beta: vec![m, 1.0],
            bmat: vec![vec![-1.0, 0.0], vec![0.0, -1.0]],
            contour_offsets: None,
            truncation,
        }
    }

    /// With `Υ = 0` the second variable collapses onto its pole at the origin.
    fn zero_snr_problem(&self, truncation: f64) -> FoxHProblem {
        let m = f64::from(self.m);
        FoxHProblem {
            x: vec![self.omega],
            delta: vec![0.0, m - 1.0],
            dmat: vec![vec![1.0], vec![-1.0]],
            beta: vec![],
            bmat: vec![],
            contour_offsets: None,
            truncation,
        }
    }
}

impl FoxHProblem {
    fn dims(&self) -> usize {
        self.x.len()
    }

    fn validate(&self) -> Result<()> {
        let l = self.dims();
        if !(1..=2).contains(&l) {
            return Err(Error::domain(format!("only one or two variables are supported, got {l}")));
        }
        if self.x.iter().any(|v| *v == 0.0 || !v.is_finite()) {
            return Err(Error::domain("H-function arguments must be finite and nonzero"));
        }
        if self.dmat.len() != self.delta.len() || self.bmat.len() != self.beta.len() {
            return Err(Error::domain("coefficient matrices must have one row per gamma factor"));
        }
        if self.dmat.iter().chain(self.bmat.iter()).any(|r| r.len() != l) {
            return Err(Error::domain("coefficient rows must have one entry per variable"));
        }
        if !(self.truncation > 0.0 && self.truncation.is_finite()) {
            return Err(Error::domain("truncation W must be positive"));
        }
        Ok(())
    }

    /// `ln Θ(s) - Σ_k s_k ln x_k`, principal branch for negative `x_k`.
    pub fn log_integrand(&self, s: &[Complex64]) -> Result<Complex64> {
        let mut acc = Complex64::new(0.0, 0.0);
        for (d, row) in self.delta.iter().zip(&self.dmat) {
            acc += log_gamma_complex(affine(*d, row, s))?;
        }
        for (b, row) in self.beta.iter().zip(&self.bmat) {
            match log_gamma_complex(affine(*b, row, s)) {
                Ok(v) => acc -= v,
                // 1/Γ vanishes at its poles.
                Err(Error::Pole { .. }) => return Ok(Complex64::new(f64::NEG_INFINITY, 0.0)),
                Err(e) => return Err(e),
            }
        }
        for (xk, sk) in self.x.iter().zip(s) {
            let ln_x = if *xk > 0.0 { Complex64::new(xk.ln(), 0.0) } else { Complex64::new((-xk).ln(), PI) };
            acc -= sk * ln_x;
        }
        Ok(acc)
    }
}

fn affine(c: f64, row: &[f64], s: &[Complex64]) -> Complex64 {
    row.iter().zip(s).fold(Complex64::new(c, 0.0), |acc, (d, sk)| acc + sk * *d)
}

/// Open interval `(lo, hi)` for one axis from constraints `a + b ξ > 0`.
fn interval(constraints: &[(f64, f64)]) -> Result<(f64, f64)> {
    let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
    for &(a, b) in constraints {
        if b > 0.0 {
            lo = lo.max(-a / b);
        } else if b < 0.0 {
            hi = hi.min(-a / b);
        } else if a <= 0.0 {
            return Err(Error::InfeasibleContour(format!("constant constraint {a} > 0 fails")));
        }
    }
    if lo >= hi {
        return Err(Error::InfeasibleContour(format!("empty interval ({lo}, {hi})")));
    }
    Ok((lo, hi))
}

fn midpoint((lo, hi): (f64, f64)) -> f64 {
    match (lo.is_finite(), hi.is_finite()) {
        (true, true) => 0.5 * (lo + hi),
        (true, false) => lo + 1.0,
        (false, true) => hi - 1.0,
        (false, false) => 0.0,
    }
}

/// Interval for the first axis: the second is eliminated (Fourier-Motzkin).
fn first_axis_interval(p: &FoxHProblem) -> Result<(f64, f64)> {
    let rows: Vec<(f64, &Vec<f64>)> = p.delta.iter().copied().zip(&p.dmat).collect();
    if p.dims() == 1 {
        let c: Vec<(f64, f64)> = rows.iter().map(|(a, r)| (*a, r[0])).collect();
        return interval(&c);
    }
    let mut c = Vec::new();
    for (a, r) in &rows {
        if r[1] == 0.0 {
            c.push((*a, r[0]));
        }
    }
    for (ap, rp) in rows.iter().filter(|(_, r)| r[1] > 0.0) {
        for (an, rn) in rows.iter().filter(|(_, r)| r[1] < 0.0) {
            // Scale so the second coefficients cancel.
            let (wp, wn) = (-rn[1], rp[1]);
            c.push((wp * ap + wn * an, wp * rp[0] + wn * rn[0]));
        }
    }
    // Keep the second axis itself feasible: it needs both a lower and upper
    // bound to be non-contradictory, which the pairwise combinations encode.
    interval(&c)
}

fn second_axis_interval(p: &FoxHProblem, xi1: f64) -> Result<(f64, f64)> {
    let c: Vec<(f64, f64)> = p.delta.iter().zip(&p.dmat).map(|(a, r)| (a + r[0] * xi1, r[1])).collect();
    interval(&c)
}

/// Contour offsets at the midpoints of the pole-separating intervals, axis by axis.
pub fn select_contours(problem: &FoxHProblem) -> Result<Vec<f64>> {
    problem.validate()?;
    let xi1 = midpoint(first_axis_interval(problem)?);
    if problem.dims() == 1 {
        return Ok(vec![xi1]);
    }
    let xi2 = midpoint(second_axis_interval(problem, xi1)?);
    Ok(vec![xi1, xi2])
}

#[derive(Debug, Clone, Copy)]
enum Contour {
    Vertical { xi: f64, half_length: f64 },
    Loop { xi: f64 },
}

impl Contour {
    fn for_axis(x: f64, xi: f64, w: f64) -> Self {
        if x > 0.0 {
            Contour::Vertical { xi, half_length: w }
        } else {
            Contour::Loop { xi }
        }
    }
}

struct Evaluator<'a> {
    problem: &'a FoxHProblem,
    scale: f64,
    calls: Cell<usize>,
    max_im: Cell<f64>,
}

impl<'a> Evaluator<'a> {
    fn new(problem: &'a FoxHProblem) -> Self {
        Evaluator { problem, scale: 0.0, calls: Cell::new(0), max_im: Cell::new(0.0) }
    }

    fn log_f(&self, s: &[Complex64]) -> Result<Complex64> {
        self.calls.set(self.calls.get() + 1);
        for sk in s {
            if sk.im.abs() > self.max_im.get() {
                self.max_im.set(sk.im.abs());
            }
        }
        self.problem.log_integrand(s)
    }

    fn f(&self, s: &[Complex64]) -> Result<Complex64> {
        let l = self.log_f(s)? - self.scale;
        if l.re < -LOG_LIMIT {
            return Ok(Complex64::new(0.0, 0.0));
        }
        Ok(l.exp())
    }
}

/// Length of loop rays: march left until `|g|` has dropped 40 e-folds below its peak.
fn ray_length(g: &dyn Fn(Complex64) -> Result<f64>, xi: f64) -> Result<f64> {
    let mut peak = f64::NEG_INFINITY;
    let mut u = 0.0;
    loop {
        let v = g(Complex64::new(xi - u, LOOP_HALF_HEIGHT))?;
        peak = peak.max(v);
        if u >= 4.0 && v < peak - 40.0 {
            return Ok(u);
        }
        u += 1.0;
        if u > MAX_LOOP_LENGTH {
            return Err(Error::NonConvergence { what: "loop contour length", iterations: u as usize });
        }
    }
}

/// `∫_C g(s) ds` along one contour; `ln_abs_g` locates where a loop may be cut.
fn integrate_contour(
    contour: Contour,
    g: &dyn Fn(Complex64) -> Result<Complex64>,
    ln_abs_g: &dyn Fn(Complex64) -> Result<f64>,
    abs_tol: f64,
) -> Result<(Complex64, f64)> {
    let i = Complex64::new(0.0, 1.0);
    match contour {
        Contour::Vertical { xi, half_length } => {
            let opts = QuadOptions { abs_tol, rel_tol: 1e-14, max_subdivisions: 4000 };
            let r = integrate(|t| Ok(g(Complex64::new(xi, t))? * i), -half_length, half_length, opts)?;
            Ok((r.value, r.abs_error))
        }
        Contour::Loop { xi } => {
            let c = LOOP_HALF_HEIGHT;
            let len = ray_length(ln_abs_g, xi)?;
            let opts = QuadOptions { abs_tol: abs_tol / 3.0, rel_tol: 1e-14, max_subdivisions: 4000 };
            let bottom = integrate(|u| g(Complex64::new(xi - u, -c)), 0.0, len, opts)?;
            let side = integrate(|y| Ok(g(Complex64::new(xi, y))? * i), -c, c, opts)?;
            let top = integrate(|u| g(Complex64::new(xi - u, c)), 0.0, len, opts)?;
            Ok((bottom.value + side.value - top.value, bottom.abs_error + side.abs_error + top.abs_error))
        }
    }
}

/// `ln ∫_C |f(s1, s2)| |ds2|` for real `s1 = sigma`, the size of the inner integrand.
fn inner_mass(ev: &Evaluator, sigma: f64) -> Result<f64> {
    let p = ev.problem;
    if p.dims() == 1 {
        return Ok(ev.log_f(&[Complex64::new(sigma, 0.0)])?.re);
    }
    let xi2 = midpoint(second_axis_interval(p, sigma)?);
    let s1 = Complex64::new(sigma, 0.0);
    let anchor = ev.log_f(&[s1, Complex64::new(xi2, 0.0)])?.re;
    let anchor = if anchor.is_finite() { anchor } else { 0.0 };
    let g = |s2: Complex64| -> Result<Complex64> {
        let l = ev.log_f(&[s1, s2])?.re - anchor;
        Ok(Complex64::new(if l < -LOG_LIMIT { 0.0 } else { l.exp() }, 0.0))
    };
    let lg = |s2: Complex64| -> Result<f64> { Ok(ev.log_f(&[s1, s2])?.re) };
    let contour = Contour::for_axis(p.x[1], xi2, p.truncation.min(60.0));
    let (v, _) = integrate_contour(contour, &g, &lg, 1e-6)?;
    // Vertical pieces carry a factor i; loops are real. Either way take the modulus.
    Ok(anchor + v.norm().max(f64::MIN_POSITIVE).ln())
}

/// Places the first (vertical) contour where the inner integrand is smallest,
/// which is where the Mellin-Barnes integrand has its saddle on the real axis
/// and the quadrature suffers the least cancellation.
fn saddle_offset(ev: &Evaluator, lo: f64, hi: f64) -> Result<(f64, f64)> {
    let inv_phi = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (lo, hi);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = inner_mass(ev, c)?;
    let mut fd = inner_mass(ev, d)?;
    for _ in 0..40 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = inner_mass(ev, c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = inner_mass(ev, d)?;
        }
        if (b - a) < 1e-4 * (hi - lo) {
            break;
        }
    }
    Ok(if fc < fd { (c, fc) } else { (d, fd) })
}

fn evaluate(problem: &FoxHProblem, tol: f64, ln_prefactor: f64) -> Result<FoxHEvaluation> {
    problem.validate()?;
    if !(tol > 0.0) {
        return Err(Error::domain("tolerance must be positive"));
    }
    let mut ev = Evaluator::new(problem);
    let l = problem.dims();
    let w = problem.truncation;

    let (offsets, scale) = match &problem.contour_offsets {
        Some(o) => {
            if o.len() != l {
                return Err(Error::domain("one contour offset per variable is required"));
            }
            let pts: Vec<Complex64> = o.iter().map(|v| Complex64::new(*v, 0.0)).collect();
            let v = ev.log_f(&pts)?.re;
            (o.clone(), if v.is_finite() { v } else { 0.0 })
        }
        None => {
            let mut o = select_contours(problem)?;
            let mut scale = inner_mass(&ev, o[0])?;
            if !scale.is_finite() {
                scale = 0.0;
            }
            if problem.x[0] > 0.0 {
                let (lo, hi) = first_axis_interval(problem)?;
                if lo.is_finite() && hi.is_finite() {
                    let margin = 1e-3 * (hi - lo);
                    let (best, mass) = saddle_offset(&ev, lo + margin, hi - margin)?;
                    o[0] = best;
                    scale = mass;
                }
            }
            if l == 2 {
                o[1] = midpoint(second_axis_interval(problem, o[0])?);
            }
            (o, scale)
        }
    };
    ev.scale = scale;

    // The unscaled result is e^{scale + ln_prefactor} J / (2πi)^L.
    let two_pi = 2.0 * PI;
    let factor_ln = scale + ln_prefactor - (l as f64) * two_pi.ln();
    let j_tol = (tol * (-factor_ln).exp()).max(f64::MIN_POSITIVE);
    let c1 = Contour::for_axis(problem.x[0], offsets[0], w);

    let (j, err) = if l == 1 {
        let g = |s: Complex64| ev.f(&[s]);
        let lg = |s: Complex64| Ok(ev.log_f(&[s])?.re - ev.scale);
        integrate_contour(c1, &g, &lg, j_tol)?
    } else {
        let inner_tol = j_tol / (4.0 * w.min(50.0));
        let xi2 = offsets[1];
        let c2 = Contour::for_axis(problem.x[1], xi2, w);
        let outer = |s1: Complex64| -> Result<Complex64> {
            let g = |s2: Complex64| ev.f(&[s1, s2]);
            let lg = |s2: Complex64| Ok(ev.log_f(&[s1, s2])?.re - ev.scale);
            Ok(integrate_contour(c2, &g, &lg, inner_tol)?.0)
        };
        let outer_lg = |s1: Complex64| -> Result<f64> {
            Ok(ev.log_f(&[s1, Complex64::new(xi2, 0.0)])?.re - ev.scale)
        };
        integrate_contour(c1, &outer, &outer_lg, j_tol)?
    };
    // (2πi)^{-L}: i^{-1} = -i, i^{-2} = -1.
    let i_pow = if l == 1 { Complex64::new(0.0, -1.0) } else { Complex64::new(-1.0, 0.0) };
    let f = factor_ln.exp();
    Ok(FoxHEvaluation {
        value: j * i_pow * f,
        abs_error: err * f,
        branch_warning: ev.max_im.get() * PI > LOG_LIMIT,
        kernel_evaluations: ev.calls.get(),
        offsets,
    })
}

/// Evaluates a Fox H-function of one or two variables.
pub fn eval_bivariate_h(problem: &FoxHProblem, tol: f64) -> Result<FoxHEvaluation> {
    evaluate(problem, tol, 0.0)
}

/// Detection probability from the bivariate H-function with the default `W = 100`.
pub fn pd_foxh(inputs: &PdFoxHInputs, tol: f64) -> Result<f64> {
    Ok(pd_foxh_detailed(inputs, tol, 100.0)?.value.re)
}

/// As [`pd_foxh`], with explicit `W` and the full evaluation record.
pub fn pd_foxh_detailed(inputs: &PdFoxHInputs, tol: f64, truncation: f64) -> Result<FoxHEvaluation> {
    let problem = if inputs.upsilon == 0.0 {
        inputs.zero_snr_problem(truncation)
    } else {
        inputs.problem(truncation)
    };
    let mut r = evaluate(&problem, tol, inputs.ln_phi())?;
    if r.value.im.abs() > tol {
        return Err(Error::ImaginaryResidue { im: r.value.im, tol });
    }
    r.value = Complex64::new(r.value.re.clamp(0.0, 1.0), 0.0);
    Ok(r)
}
