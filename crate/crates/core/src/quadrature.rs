//! Globally adaptive Gauss-Kronrod (10/21) quadrature for real and complex integrands.

use crate::{Error, Result};
use num_complex::Complex64;
use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::ops::{Add, Mul, Sub};

const XGK: [f64; 11] = [
    0.995_657_163_025_808_1,
    0.973_906_528_517_171_7,
    0.930_157_491_355_708_2,
    0.865_063_366_688_984_5,
    0.780_817_726_586_416_9,
    0.679_409_568_299_024_4,
    0.562_757_134_668_604_7,
    0.433_395_394_129_247_2,
    0.294_392_862_701_460_2,
    0.148_874_338_981_631_2,
    0.0,
];
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874,
    0.032_558_162_307_964_73,
    0.054_755_896_574_352,
    0.075_039_674_810_919_95,
    0.093_125_454_583_697_6,
    0.109_387_158_802_297_64,
    0.123_491_976_262_065_85,
    0.134_709_217_311_473_33,
    0.142_775_938_577_060_08,
    0.147_739_104_901_338_5,
    0.149_445_554_002_916_9,
];
// Gauss weights for XGK[1], XGK[3], ..., XGK[9].
const WG: [f64; 5] = [
    0.066_671_344_308_688_14,
    0.149_451_349_150_580_6,
    0.219_086_362_515_982_04,
    0.269_266_719_309_996_35,
    0.295_524_224_714_752_87,
];

/// Values an integrand may return.
pub trait QuadValue:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> + Send + Sync
{
    fn zero() -> Self;
    fn magnitude(self) -> f64;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn magnitude(self) -> f64 {
        self.abs()
    }
}

impl QuadValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn magnitude(self) -> f64 {
        self.norm()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions { abs_tol: 1e-12, rel_tol: 1e-12, max_subdivisions: 2000 }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct QuadResult<T> {
    pub value: T,
    pub abs_error: f64,
    pub evaluations: usize,
}

struct Segment<T> {
    a: f64,
    b: f64,
    value: T,
    error: f64,
}

impl<T> PartialEq for Segment<T> {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl<T> Eq for Segment<T> {}
impl<T> PartialOrd for Segment<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T> Ord for Segment<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// One 21-point Kronrod panel: (kronrod value, |K - G| error, Σ|f| w).
fn gk21<T: QuadValue>(f: &mut impl FnMut(f64) -> Result<T>, a: f64, b: f64) -> Result<(T, f64, f64)> {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c)?;
    let mut k = fc * WGK[10];
    let mut g = T::zero();
    let mut abs_sum = fc.magnitude() * WGK[10];
    for i in 0..10 {
        let dx = h * XGK[i];
        let f1 = f(c - dx)?;
        let f2 = f(c + dx)?;
        let pair = f1 + f2;
        k = k + pair * WGK[i];
        abs_sum += (f1.magnitude() + f2.magnitude()) * WGK[i];
        if i % 2 == 1 {
            g = g + pair * WG[i / 2];
        }
    }
    let kv = k * h;
    let err = (k - g).magnitude() * h.abs();
    Ok((kv, err, abs_sum * h.abs()))
}

/// Integrates `f` over `[a, b]` until the summed error estimate falls below
/// `max(abs_tol, rel_tol * |I|)`.
///
/// Returns `NonConvergence` when the subdivision budget runs out first, unless
/// the remaining error is already at the rounding floor of the integrand.
pub fn integrate<T: QuadValue>(
    mut f: impl FnMut(f64) -> Result<T>,
    a: f64,
    b: f64,
    opts: QuadOptions,
) -> Result<QuadResult<T>> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::domain(format!("integration limits [{a}, {b}] must be finite")));
    }
    if a == b {
        return Ok(QuadResult { value: T::zero(), abs_error: 0.0, evaluations: 0 });
    }
    let mut heap = BinaryHeap::new();
    let (v, e, abs) = gk21(&mut f, a, b)?;
    let mut total = v;
    let mut total_err = e;
    let mut abs_total = abs;
    let mut evaluations = 21;
    heap.push(Segment { a, b, value: v, error: e });
    let min_width = (b - a).abs() * 1e-13;
    // Segments too narrow to split; their error is accepted as is.
    let mut frozen: Vec<Segment<T>> = Vec::new();
    loop {
        let target = opts.abs_tol.max(opts.rel_tol * total.magnitude());
        let floor = 50.0 * f64::EPSILON * abs_total;
        if total_err <= target || total_err <= floor {
            break;
        }
        if heap.len() + frozen.len() >= opts.max_subdivisions {
            return Err(Error::NonConvergence { what: "adaptive quadrature", iterations: heap.len() });
        }
        let Some(seg) = heap.pop() else { break };
        let mid = 0.5 * (seg.a + seg.b);
        if (seg.b - seg.a).abs() < min_width {
            frozen.push(seg);
            continue;
        }
        let (v1, e1, a1) = gk21(&mut f, seg.a, mid)?;
        let (v2, e2, a2) = gk21(&mut f, mid, seg.b)?;
        evaluations += 42;
        total = total - seg.value + v1 + v2;
        total_err += e1 + e2 - seg.error;
        abs_total += a1 + a2;
        heap.push(Segment { a: seg.a, b: mid, value: v1, error: e1 });
        heap.push(Segment { a: mid, b: seg.b, value: v2, error: e2 });
    }
    // Re-sum to shed drift from the running updates.
    let mut value = T::zero();
    let mut err = 0.0;
    for s in heap.iter().chain(frozen.iter()) {
        value = value + s.value;
        err += s.error;
    }
    Ok(QuadResult { value, abs_error: err, evaluations })
}

/// Integrates over `[a, ∞)` through `x = a + t / (1 - t)`.
pub fn integrate_to_infinity(
    mut f: impl FnMut(f64) -> Result<f64>,
    a: f64,
    opts: QuadOptions,
) -> Result<QuadResult<f64>> {
    integrate(
        |t| {
            if t >= 1.0 {
                return Ok(0.0);
            }
            let s = 1.0 - t;
            let v = f(a + t / s)?;
            Ok(if v == 0.0 { 0.0 } else { v / (s * s) })
        },
        0.0,
        1.0,
        opts,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_interval_length() {
        let k: f64 = 2.0 * WGK[..10].iter().sum::<f64>() + WGK[10];
        let g: f64 = 2.0 * WG.iter().sum::<f64>();
        assert!((k - 2.0).abs() < 1e-15 && (g - 2.0).abs() < 1e-15);
    }

    #[test]
    fn single_panel_is_exact_for_polynomials() {
        let (v, _, _) = gk21(&mut |x: f64| Ok(x.powi(30)), -1.0, 1.0).unwrap();
        assert!((v - 2.0 / 31.0).abs() < 1e-15);
    }

    #[test]
    fn oscillatory_integrand() {
        let r = integrate(|x: f64| Ok((50.0 * x).cos()), 0.0, 3.0, QuadOptions::default()).unwrap();
        assert!((r.value - (150.0f64).sin() / 50.0).abs() < 1e-12);
    }

    #[test]
    fn complex_integrand() {
        let r = integrate(
            |t: f64| Ok(Complex64::new(0.0, t).exp()),
            0.0,
            std::f64::consts::PI,
            QuadOptions::default(),
        )
        .unwrap();
        assert!((r.value - Complex64::new(0.0, 2.0)).norm() < 1e-13);
    }

    #[test]
    fn endpoint_singularity() {
        let r = integrate(|x: f64| Ok(x.ln()), 0.0, 1.0, QuadOptions { abs_tol: 1e-10, ..Default::default() }).unwrap();
        assert!((r.value + 1.0).abs() < 1e-10);
    }

    #[test]
    fn semi_infinite() {
        let r = integrate_to_infinity(|x| Ok((-x).exp()), 0.0, QuadOptions::default()).unwrap();
        assert!((r.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn budget_exhaustion_is_reported() {
        let opts = QuadOptions { abs_tol: 1e-15, rel_tol: 0.0, max_subdivisions: 3 };
        let r = integrate(|x: f64| Ok((200.0 * x).sin()), 0.0, 10.0, opts);
        assert!(matches!(r, Err(Error::NonConvergence { .. })));
    }
}
