//! Experiment drivers behind the subcommands.

use super::config::{ExperimentConfig, Method};
use super::output::CsvRow;
use crate::analytic::{
    pd_lrt, pd_pre_glrt, pd_quadrature, pd_series, pd_series_partial, pd_square_law, pfa_closed_form,
    snr_for_pd, threshold_for_pfa, truncation_bound, OperatingPoint,
};
use crate::detectors::{Detector, DetectorKind};
use crate::distributions::{pdf_h0, pdf_h1, H0Law, H1Law};
use crate::foxh::{eval_bivariate_h, pd_foxh, FoxHProblem, PdFoxHInputs};
use crate::montecarlo::{estimate_rate, estimate_rates, lemma_tests, sample_statistics, Scenario};
use crate::stats::ks_one_sample;
use crate::{Error, Result};
use serde::Deserialize;
use std::collections::HashMap;
use std::fmt::Write as _;
use std::time::{Duration, Instant};

/// Benchmark operating points `(M, PFA, Υ in dB)`.
pub const TABLE1_POINTS: [(u32, f64, f64); 9] = [
    (50, 1e-8, -10.0),
    (80, 1e-8, -10.0),
    (100, 1e-8, -10.0),
    (50, 1e-8, -5.0),
    (50, 1e-6, -5.0),
    (50, 1e-4, -5.0),
    (50, 1e-6, -3.0),
    (50, 1e-6, -2.0),
    (50, 1e-6, -1.0),
];

/// SNR search range (dB) for loss computations.
const SNR_SEARCH: (f64, f64) = (-40.0, 30.0);
const SNR_STEP: f64 = 2.0;

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed for one sub-experiment, derived from the base seed and its grid position.
pub fn derive_seed(base: u64, parts: &[u64]) -> u64 {
    parts.iter().fold(splitmix(base), |acc, &p| splitmix(acc ^ p))
}

struct GridPoint {
    n_idx: usize,
    m_idx: usize,
    snr_idx: usize,
    snr_db: f64,
    sc: Scenario,
}

fn grid(cfg: &ExperimentConfig) -> Result<Vec<GridPoint>> {
    let s = &cfg.scenario;
    let mut out = Vec::new();
    for (m_idx, &m) in s.m.iter().enumerate() {
        match &s.means {
            Some((x, y)) => {
                let sc = Scenario::new(m, x.clone(), y.clone(), s.sigma_sq, 0)?;
                let snr_db = 10.0 * (sc.upsilon() / f64::from(sc.n_antennas)).log10();
                out.push(GridPoint { n_idx: 0, m_idx, snr_idx: 0, snr_db, sc });
            }
            None => {
                for (n_idx, &n) in s.n.iter().enumerate() {
                    for (snr_idx, snr) in s.snr.iter().enumerate() {
                        let a = (2.0 * s.sigma_sq * snr.linear).sqrt();
                        let sc = Scenario::new(m, vec![a; n as usize], vec![0.0; n as usize], s.sigma_sq, 0)?;
                        out.push(GridPoint { n_idx, m_idx, snr_idx, snr_db: snr.db, sc });
                    }
                }
            }
        }
    }
    out.sort_by_key(|p| (p.n_idx, p.m_idx, p.snr_idx));
    Ok(out)
}

pub fn detector_for(kind: DetectorKind, sc: &Scenario) -> Detector {
    match kind {
        DetectorKind::PostGlrt => Detector::PostGlrt,
        DetectorKind::PreGlrt => Detector::PreGlrt,
        DetectorKind::SquareLaw => Detector::SquareLaw { sigma_sq: sc.sigma_sq },
        DetectorKind::Lrt => Detector::Lrt(sc.lrt_params()),
    }
}

/// Analytic PD of a detector in a scenario; `terms_used` is reported by the series.
pub fn analytic_pd(
    kind: DetectorKind,
    method: Method,
    sc: &Scenario,
    pfa: f64,
    tol: f64,
) -> Result<(f64, Option<usize>)> {
    let (m, n, ups) = (sc.m_samples, sc.n_antennas, sc.upsilon());
    match kind {
        DetectorKind::PostGlrt => {
            let op = OperatingPoint::new(m, pfa, ups)?;
            match method {
                Method::Quadrature => Ok((pd_quadrature(&op, tol)?, None)),
                Method::FoxH => Ok((pd_foxh(&PdFoxHInputs::from_operating_point(&op)?, tol)?, None)),
                _ => {
                    let r = pd_series(&op, tol)?;
                    Ok((r.pd, Some(r.terms_used)))
                }
            }
        }
        DetectorKind::PreGlrt => {
            let sum_snr = (0..n as usize).map(|i| sc.snr_n(i)).sum();
            Ok((pd_pre_glrt(m, n, pfa, sum_snr)?, None))
        }
        DetectorKind::SquareLaw => Ok((pd_square_law(m, pfa, ups)?, None)),
        DetectorKind::Lrt => Ok((pd_lrt(m, pfa, ups)?, None)),
    }
}

/// Row methods for one detector under the configured method list.
fn analytic_methods(kind: DetectorKind, methods: &[Method]) -> Vec<Method> {
    let analytic: Vec<Method> = methods.iter().copied().filter(|m| *m != Method::MonteCarlo).collect();
    match kind {
        DetectorKind::PostGlrt => analytic,
        _ if analytic.is_empty() => Vec::new(),
        _ => vec![Method::Analytic],
    }
}

struct Entry {
    /// (n_idx, m_idx, snr_idx, detector index, pfa index, method).
    key: (usize, usize, usize, usize, usize, Method),
    n: u32,
    m: u32,
    kind: DetectorKind,
    row: CsvRow,
}

fn evaluate(cfg: &ExperimentConfig) -> Result<Vec<Entry>> {
    let mut out = Vec::new();
    for p in grid(cfg)? {
        let (n, m) = (p.sc.n_antennas, p.sc.m_samples);
        let experiment = format!("{}-n{}-m{}", cfg.experiment, n, m);
        for (d_idx, &kind) in cfg.detectors.iter().enumerate() {
            let base = |pfa: f64, method: Method, pd: f64| CsvRow {
                experiment: experiment.clone(),
                detector: kind.name().to_string(),
                method,
                pfa,
                snr_db: p.snr_db,
                pd,
                ci: None,
                terms_used: None,
                elapsed_ms: None,
                snr_loss_db: None,
            };
            for method in analytic_methods(kind, &cfg.methods) {
                for (f_idx, &pfa) in cfg.pfa.iter().enumerate() {
                    let (pd, terms) = analytic_pd(kind, method, &p.sc, pfa, cfg.tolerance)?;
                    let mut row = base(pfa, method, pd);
                    row.terms_used = terms;
                    out.push(Entry { key: (p.n_idx, p.m_idx, p.snr_idx, d_idx, f_idx, method), n, m, kind, row });
                }
            }
            if cfg.methods.contains(&Method::MonteCarlo) && cfg.trials > 0 {
                let det = detector_for(kind, &p.sc);
                let thresholds =
                    cfg.pfa.iter().map(|&pfa| det.analytic_threshold(pfa, m, n)).collect::<Result<Vec<_>>>()?;
                let seed = derive_seed(cfg.seed, &[u64::from(n), u64::from(m), p.snr_idx as u64, d_idx as u64]);
                let reports = estimate_rates(&det, &thresholds, &p.sc.with_seed(seed), cfg.trials)?;
                for (f_idx, (&pfa, r)) in cfg.pfa.iter().zip(&reports).enumerate() {
                    let mut row = base(pfa, Method::MonteCarlo, r.rate);
                    row.ci = Some((r.ci_low, r.ci_high));
                    out.push(Entry { key: (p.n_idx, p.m_idx, p.snr_idx, d_idx, f_idx, Method::MonteCarlo), n, m, kind, row });
                }
            }
        }
    }
    Ok(out)
}

/// PD against PFA for every scenario and detector.
pub fn cmd_roc(cfg: &ExperimentConfig) -> Result<Vec<CsvRow>> {
    let mut e = evaluate(cfg)?;
    e.sort_by_key(|e| e.key);
    Ok(e.into_iter().map(|e| e.row).collect())
}

/// SNR (dB) per antenna at which `kind` reaches `target` PD, for an equal-SNR array.
///
/// The bracket is found by stepping up from the bottom of the search range, so
/// the series is never asked for SNRs far above the crossing.
pub fn snr_at_pd(kind: DetectorKind, n: u32, m: u32, pfa: f64, target: f64, tol: f64) -> Result<f64> {
    let pd = |db: f64| -> Result<f64> {
        let sc = Scenario::equal_snr(n, m, db, 1.0, 0)?;
        Ok(analytic_pd(kind, Method::Series, &sc, pfa, tol)?.0)
    };
    let mut hi = SNR_SEARCH.0;
    while pd(hi)? < target {
        hi += SNR_STEP;
        if hi > SNR_SEARCH.1 {
            return Err(Error::Bracket { target });
        }
    }
    if hi == SNR_SEARCH.0 {
        return Err(Error::Bracket { target });
    }
    snr_for_pd(pd, target, hi - SNR_STEP, hi)
}

/// PD against SNR, with the SNR loss relative to the LRT at the target PD.
pub fn cmd_pd_vs_snr(cfg: &ExperimentConfig) -> Result<Vec<CsvRow>> {
    let mut e = evaluate(cfg)?;
    e.sort_by_key(|e| {
        let (n, m, snr, d, f, method) = e.key;
        (n, m, f, d, method, snr)
    });
    if cfg.scenario.means.is_none() {
        // Equal-SNR families: one loss per (N, M, PFA, detector) curve.
        let mut cache: HashMap<(u32, u32, u64, DetectorKind), Option<f64>> = HashMap::new();
        for entry in e.iter_mut().filter(|e| e.row.method != Method::MonteCarlo) {
            let (n, m, kind, pfa) = (entry.n, entry.m, entry.kind, entry.row.pfa);
            let loss = *cache.entry((n, m, pfa.to_bits(), kind)).or_insert_with(|| {
                let target = cfg.target_pd;
                let det = snr_at_pd(kind, n, m, pfa, target, cfg.tolerance).ok()?;
                let lrt = snr_at_pd(DetectorKind::Lrt, n, m, pfa, target, cfg.tolerance).ok()?;
                Some(det - lrt)
            });
            entry.row.snr_loss_db = loss;
        }
    }
    Ok(e.into_iter().map(|e| e.row).collect())
}

/// Mean wall time of `f` over enough repetitions to fill about 20 ms.
pub fn time_per_call<T>(mut f: impl FnMut() -> Result<T>) -> Result<(T, Duration)> {
    let value = f()?;
    let mut reps = 1u32;
    loop {
        let start = Instant::now();
        for _ in 0..reps {
            std::hint::black_box(f()?);
        }
        let el = start.elapsed();
        if el >= Duration::from_millis(20) || reps >= 1 << 20 {
            return Ok((value, el / reps));
        }
        reps *= 2;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table1Row {
    pub m: u32,
    pub pfa: f64,
    pub upsilon_db: f64,
    pub pd_quadrature: f64,
    pub pd_series: f64,
    pub terms_used: usize,
    pub time_quadrature: Duration,
    pub time_series: Duration,
}

impl Table1Row {
    /// Time saved by the series, in percent of the quadrature time.
    pub fn reduction_percent(&self) -> f64 {
        100.0 * (1.0 - self.time_series.as_secs_f64() / self.time_quadrature.as_secs_f64())
    }
}

pub fn table1(tol: f64) -> Result<Vec<Table1Row>> {
    TABLE1_POINTS
        .iter()
        .map(|&(m, pfa, db)| {
            let op = OperatingPoint::new(m, pfa, 10f64.powf(db / 10.0))?;
            let (pd_quadrature, time_quadrature) = time_per_call(|| pd_quadrature(&op, tol))?;
            let (s, time_series) = time_per_call(|| pd_series(&op, tol))?;
            Ok(Table1Row {
                m,
                pfa,
                upsilon_db: db,
                pd_quadrature,
                pd_series: s.pd,
                terms_used: s.terms_used,
                time_quadrature,
                time_series,
            })
        })
        .collect()
}

pub fn table1_text(rows: &[Table1Row]) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:>4} {:>6} {:>6} {:>14} {:>14} {:>9} {:>5} {:>11} {:>11} {:>9}",
        "M", "PFA", "Υ dB", "PD quad %", "PD series %", "|Δ|", "terms", "quad µs", "series µs", "saved %"
    );
    for r in rows {
        let _ = writeln!(
            s,
            "{:>4} {:>6.0e} {:>6} {:>14.6} {:>14.6} {:>9.1e} {:>5} {:>11.2} {:>11.2} {:>9.2}",
            r.m,
            r.pfa,
            r.upsilon_db,
            100.0 * r.pd_quadrature,
            100.0 * r.pd_series,
            (r.pd_quadrature - r.pd_series).abs(),
            r.terms_used,
            r.time_quadrature.as_secs_f64() * 1e6,
            r.time_series.as_secs_f64() * 1e6,
            r.reduction_percent()
        );
    }
    s
}

pub fn table1_rows(rows: &[Table1Row]) -> Vec<CsvRow> {
    let mut out = Vec::new();
    for (i, r) in rows.iter().enumerate() {
        let row = |method: Method, pd: f64, t: Duration, terms: Option<usize>| CsvRow {
            experiment: format!("table1-row{}", i + 1),
            detector: DetectorKind::PostGlrt.name().to_string(),
            method,
            pfa: r.pfa,
            snr_db: r.upsilon_db,
            pd,
            ci: None,
            terms_used: terms,
            elapsed_ms: Some(t.as_secs_f64() * 1e3),
            snr_loss_db: None,
        };
        out.push(row(Method::Quadrature, r.pd_quadrature, r.time_quadrature, None));
        out.push(row(Method::Series, r.pd_series, r.time_series, Some(r.terms_used)));
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &str, passed: bool, detail: String) -> Self {
        Check { name: name.to_string(), passed, detail }
    }

    pub fn line(&self) -> String {
        format!("{} {} {}", if self.passed { "PASS" } else { "FAIL" }, self.name, self.detail)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidateOptions {
    pub trials: u64,
    pub seed: u64,
    /// Perturbs thresholds in the round-trip check by this relative amount.
    pub threshold_fault: f64,
}

impl Default for ValidateOptions {
    fn default() -> Self {
        ValidateOptions { trials: 100_000, seed: 1, threshold_fault: 0.0 }
    }
}

/// Cross-module invariant suite.
pub fn cmd_validate(opts: &ValidateOptions) -> Result<Vec<Check>> {
    let mut checks = Vec::new();

    let mut worst = 0.0_f64;
    for m in [2, 15, 50, 100] {
        for e in 2..=8 {
            let pfa = 10f64.powi(-e);
            let g = threshold_for_pfa(pfa, m)? * (1.0 + opts.threshold_fault);
            worst = worst.max((pfa_closed_form(g, m)? / pfa - 1.0).abs());
        }
    }
    checks.push(Check::new("pfa_round_trip", worst <= 1e-12, format!("max_rel_err={worst:.3e} limit=1e-12")));

    let mut worst = 0.0_f64;
    let mut foxh_worst = 0.0_f64;
    for (i, &(m, pfa, db)) in TABLE1_POINTS.iter().enumerate() {
        let op = OperatingPoint::new(m, pfa, 10f64.powf(db / 10.0))?;
        let s = pd_series(&op, 1e-12)?.pd;
        worst = worst.max((pd_quadrature(&op, 1e-12)? - s).abs());
        if i == 0 || i == 8 {
            foxh_worst = foxh_worst.max((pd_foxh(&PdFoxHInputs::from_operating_point(&op)?, 1e-10)? - s).abs());
        }
    }
    checks.push(Check::new("series_vs_quadrature", worst <= 1e-8, format!("max_abs_diff={worst:.3e} limit=1e-8")));
    checks.push(Check::new("foxh_vs_series", foxh_worst <= 1e-6, format!("max_abs_diff={foxh_worst:.3e} limit=1e-6")));

    let mut exact = true;
    for m in [2, 15, 50] {
        let (h0, h1) = (H0Law::new(m)?, H1Law::new(m, 0.0)?);
        for i in 0..200 {
            let z = 0.05 * f64::from(i);
            exact &= pdf_h0(z, &h0)? == pdf_h1(z, &h1)?;
        }
    }
    checks.push(Check::new("pdf_h1_at_zero_snr_is_pdf_h0", exact, "bitwise_equal".into()));

    let mut margin = f64::INFINITY;
    for (m, pfa, ups) in [(15, 1e-4, 0.5), (50, 1e-6, 0.3), (100, 1e-8, 0.1)] {
        let op = OperatingPoint::new(m, pfa, ups)?;
        let full = pd_series(&op, 1e-15)?.pd;
        for t0 in [5, 10, 20, 40] {
            let tail = full - pd_series_partial(&op, t0)?;
            margin = margin.min(truncation_bound(m, ups, op.omega(), t0)? - tail);
        }
    }
    checks.push(Check::new("truncation_bound_sound", margin >= -1e-15, format!("min_bound_minus_tail={margin:.3e}")));

    let (m, n) = (15, 10);
    let h0 = Scenario::noise_only(n, m, 1.0, derive_seed(opts.seed, &[1]))?;
    let z = sample_statistics(&Detector::PostGlrt, &h0, opts.trials)?;
    let ks = ks_one_sample(&z, |x| Ok(1.0 - pfa_closed_form(x, m)?))?;
    checks.push(Check::new("post_glrt_h0_law_ks", ks.p_value > 0.01, format!("D={:.4e} p={:.4}", ks.statistic, ks.p_value)));

    let h1 = Scenario::equal_snr(n, m, -8.0, 1.0, derive_seed(opts.seed, &[2]))?;
    let ups = h1.upsilon();
    let z = sample_statistics(&Detector::PostGlrt, &h1, opts.trials)?;
    let ks = ks_one_sample(&z, |x| {
        let op = OperatingPoint { m, pfa: pfa_closed_form(x, m)?, upsilon: ups, gamma: x };
        Ok(1.0 - pd_series(&op, 1e-12)?.pd)
    })?;
    checks.push(Check::new("post_glrt_h1_law_ks", ks.p_value > 0.01, format!("D={:.4e} p={:.4}", ks.statistic, ks.p_value)));

    for (name, sc) in [("lemma_h0", h0.with_seed(derive_seed(opts.seed, &[3]))), ("lemma_h1", h1.with_seed(derive_seed(opts.seed, &[4])))] {
        let r = lemma_tests(&sc, opts.trials.max(10_000))?;
        checks.push(Check::new(
            name,
            r.passes(0.01),
            format!(
                "p_i2={:.4} p_i2_vs_h0={:.4} p_i1={:.4} pearson={:.2e} spearman={:.2e} bound={:.2e}",
                r.ks_i2.p_value, r.ks_i2_vs_h0.p_value, r.ks_i1.p_value, r.pearson, r.spearman, r.correlation_bound
            ),
        ));
    }

    let sc = Scenario::noise_only(3, 22, 1.0, derive_seed(opts.seed, &[5]))?;
    let pfa = 1e-2;
    let r = estimate_rate(&Detector::PostGlrt, threshold_for_pfa(pfa, 22)?, &sc, opts.trials)?;
    let z = (r.rate - pfa) / r.sigma_at(pfa);
    checks.push(Check::new("montecarlo_pfa", z.abs() <= 3.0, format!("rate={:.5e} z={z:.3} limit=3", r.rate)));

    Ok(checks)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPdProblem {
    m: u32,
    pfa: f64,
    upsilon_db: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProblem {
    x: Option<Vec<f64>>,
    delta: Option<Vec<f64>>,
    d: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    beta: Vec<f64>,
    #[serde(default)]
    b: Vec<Vec<f64>>,
    offsets: Option<Vec<f64>>,
    truncation: Option<f64>,
    tolerance: Option<f64>,
    pd: Option<RawPdProblem>,
}

/// Evaluates an H-function problem file and returns `key = value` lines.
pub fn cmd_fox_h(text: &str, tolerance: Option<f64>) -> Result<String> {
    let raw: RawProblem = toml::from_str(text).map_err(|e| Error::Config(e.to_string().trim_end().to_string()))?;
    let tol = tolerance.or(raw.tolerance).unwrap_or(1e-10);
    let truncation = raw.truncation.unwrap_or(100.0);
    let mut s = String::new();
    let problem = match &raw.pd {
        Some(pd) => {
            let op = OperatingPoint::new(pd.m, pd.pfa, 10f64.powf(pd.upsilon_db / 10.0))?;
            let inputs = PdFoxHInputs::from_operating_point(&op)?;
            let series = pd_series(&op, tol)?;
            let foxh = crate::foxh::pd_foxh_detailed(&inputs, tol, truncation)?;
            let _ = writeln!(s, "pd_foxh = {:.16e}", foxh.value.re);
            let _ = writeln!(s, "pd_series = {:.16e}", series.pd);
            let _ = writeln!(s, "abs_diff = {:.3e}", (foxh.value.re - series.pd).abs());
            let _ = writeln!(s, "abs_error = {:.3e}", foxh.abs_error);
            let _ = writeln!(s, "offsets = {:?}", foxh.offsets);
            let _ = writeln!(s, "branch_warning = {}", foxh.branch_warning);
            let _ = writeln!(s, "kernel_evaluations = {}", foxh.kernel_evaluations);
            return Ok(s);
        }
        None => FoxHProblem {
            x: raw.x.ok_or_else(|| Error::Config("field `x` is required".into()))?,
            delta: raw.delta.ok_or_else(|| Error::Config("field `delta` is required".into()))?,
            dmat: raw.d.ok_or_else(|| Error::Config("field `d` is required".into()))?,
            beta: raw.beta,
            bmat: raw.b,
            contour_offsets: raw.offsets,
            truncation,
        },
    };
    let r = eval_bivariate_h(&problem, tol)?;
    let _ = writeln!(s, "value_re = {:.16e}", r.value.re);
    let _ = writeln!(s, "value_im = {:.16e}", r.value.im);
    let _ = writeln!(s, "abs_error = {:.3e}", r.abs_error);
    let _ = writeln!(s, "offsets = {:?}", r.offsets);
    let _ = writeln!(s, "branch_warning = {}", r.branch_warning);
    let _ = writeln!(s, "kernel_evaluations = {}", r.kernel_evaluations);
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cli::output::csv_string;

    fn cfg(text: &str) -> ExperimentConfig {
        ExperimentConfig::parse(text, "t").unwrap()
    }

    const SMALL: &str = r#"
pfa = [1e-2, 1e-3]
trials = 3000
seed = 4
[scenario]
n = [2]
m = [6, 8]
snr_db = [-3.0, 0.0]
"#;

    #[test]
    fn roc_is_deterministic_and_complete() {
        let c = cfg(SMALL);
        let a = csv_string(&cmd_roc(&c).unwrap()).unwrap();
        let b = csv_string(&cmd_roc(&c).unwrap()).unwrap();
        assert_eq!(a, b);
        // 2 M x 2 SNR x 4 detectors x 2 PFA x (analytic + montecarlo).
        assert_eq!(a.lines().count(), 1 + 2 * 2 * 4 * 2 * 2);
        assert!(!a.contains('\r'));
    }

    #[test]
    fn roc_matches_series_for_post_glrt() {
        let c = cfg(SMALL);
        for r in cmd_roc(&c).unwrap().iter().filter(|r| r.detector == "post-glrt" && r.method == Method::Series) {
            let m: u32 = r.experiment.rsplit("-m").next().unwrap().parse().unwrap();
            let op = OperatingPoint::from_snr_db(m, 2, r.pfa, r.snr_db).unwrap();
            assert!((r.pd - pd_series(&op, 1e-10).unwrap().pd).abs() < 1e-14);
        }
    }

    #[test]
    fn pd_vs_snr_reports_loss() {
        let mut c = cfg(SMALL);
        c.methods = vec![Method::Series];
        let rows = cmd_pd_vs_snr(&c).unwrap();
        let lrt: Vec<_> = rows.iter().filter(|r| r.detector == "lrt").collect();
        assert!(lrt.iter().all(|r| r.snr_loss_db == Some(0.0)));
        let post = rows.iter().find(|r| r.detector == "post-glrt").unwrap();
        assert!(post.snr_loss_db.unwrap() > 0.0);
        // Rows of one curve are consecutive and ordered by SNR.
        assert_eq!(rows[0].snr_db, -3.0);
        assert_eq!(rows[1].snr_db, 0.0);
    }

    #[test]
    fn validate_passes_and_detects_fault() {
        let opts = ValidateOptions { trials: 20_000, ..Default::default() };
        let checks = cmd_validate(&opts).unwrap();
        assert!(checks.iter().all(|c| c.passed), "{checks:?}");
        let bad = cmd_validate(&ValidateOptions { threshold_fault: 1e-6, ..opts }).unwrap();
        let rt = bad.iter().find(|c| c.name == "pfa_round_trip").unwrap();
        assert!(!rt.passed);
    }

    #[test]
    fn fox_h_problem_file() {
        // Γ(s) Γ(1 - s) kernel gives H = 1 / (1 + x).
        let out = cmd_fox_h("x = [0.5]\ndelta = [0.0, 1.0]\nd = [[1.0], [-1.0]]\n", Some(1e-12)).unwrap();
        let v: f64 = out.lines().next().unwrap().split(" = ").nth(1).unwrap().parse().unwrap();
        assert!((v - 1.0 / 1.5).abs() < 1e-10, "{out}");
        let out = cmd_fox_h("[pd]\nm = 50\npfa = 1e-8\nupsilon_db = -10.0\n", None).unwrap();
        assert!(out.contains("branch_warning = false"));
        assert!(cmd_fox_h("delta = [1.0]\n", None).is_err());
    }

    #[test]
    fn table1_layout() {
        let rows = table1(1e-9).unwrap();
        assert_eq!(rows.len(), 9);
        let csv = table1_rows(&rows);
        assert_eq!(csv.len(), 18);
        assert!(csv.iter().all(|r| r.elapsed_ms.is_some()));
        assert!(table1_text(&rows).lines().count() == 10);
    }
}
