//! Experiment configuration files.

use crate::detectors::DetectorKind;
use crate::{Error, Result};
use serde::Deserialize;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;
use toml::Spanned;

/// How a PD value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Series,
    Quadrature,
    FoxH,
    MonteCarlo,
    /// Closed-form law of a comparison detector.
    Analytic,
}

impl Method {
    pub fn tag(self) -> &'static str {
        match self {
            Method::Series => "series",
            Method::Quadrature => "quadrature",
            Method::FoxH => "foxh",
            Method::MonteCarlo => "montecarlo",
            Method::Analytic => "analytic",
        }
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [Method::Series, Method::Quadrature, Method::FoxH, Method::MonteCarlo]
            .into_iter()
            .find(|m| m.tag() == s)
            .ok_or_else(|| Error::Config(format!("unknown method '{s}' (expected series, quadrature, foxh or montecarlo)")))
    }
}

/// Per-antenna SNR, kept in both units so the conversion happens once.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Snr {
    pub db: f64,
    pub linear: f64,
}

impl Snr {
    pub fn from_db(db: f64) -> Self {
        Snr { db, linear: 10f64.powf(db / 10.0) }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    /// Antenna counts; each is a curve family member.
    pub n: Vec<u32>,
    /// Sample counts; each is a curve family member.
    pub m: Vec<u32>,
    pub sigma_sq: f64,
    pub snr: Vec<Snr>,
    /// Explicit per-antenna means; replaces `n` and `snr` when present.
    pub means: Option<(Vec<f64>, Vec<f64>)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: String,
    pub detectors: Vec<DetectorKind>,
    pub methods: Vec<Method>,
    pub pfa: Vec<f64>,
    pub trials: u64,
    pub seed: u64,
    pub tolerance: f64,
    pub target_pd: f64,
    pub out: Option<PathBuf>,
    pub scenario: ScenarioConfig,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    experiment: Option<String>,
    detectors: Option<Spanned<Vec<String>>>,
    methods: Option<Spanned<Vec<String>>>,
    pfa: Option<Spanned<Vec<f64>>>,
    trials: Option<u64>,
    seed: Option<u64>,
    tolerance: Option<Spanned<f64>>,
    target_pd: Option<Spanned<f64>>,
    out: Option<PathBuf>,
    scenario: Option<RawScenario>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    n: Option<Spanned<Vec<u32>>>,
    m: Option<Spanned<Vec<u32>>>,
    sigma_sq: Option<Spanned<f64>>,
    snr_db: Option<Spanned<Vec<f64>>>,
    mu_x: Option<Spanned<Vec<f64>>>,
    mu_y: Option<Spanned<Vec<f64>>>,
}

struct Source<'a>(&'a str);

impl Source<'_> {
    fn line(&self, offset: usize) -> usize {
        self.0[..offset.min(self.0.len())].bytes().filter(|&b| b == b'\n').count() + 1
    }

    fn err<T>(&self, field: &str, v: &Spanned<T>, msg: impl std::fmt::Display) -> Error {
        Error::Config(format!("line {}, field `{field}`: {msg}", self.line(v.span().start)))
    }

    fn missing(&self, field: &str) -> Error {
        Error::Config(format!("field `{field}` is required"))
    }
}

fn non_empty<T>(src: &Source, field: &str, v: &Spanned<Vec<T>>) -> Result<()> {
    if v.get_ref().is_empty() {
        Err(src.err(field, v, "list must not be empty"))
    } else {
        Ok(())
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str, default_name: &str) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string().trim_end().to_string()))?;
        let src = Source(text);

        let detectors = match &raw.detectors {
            Some(d) => {
                non_empty(&src, "detectors", d)?;
                let mut out = Vec::new();
                for name in d.get_ref() {
                    let k = name.parse::<DetectorKind>().map_err(|e| src.err("detectors", d, e))?;
                    if !out.contains(&k) {
                        out.push(k);
                    }
                }
                out
            }
            None => DetectorKind::ALL.to_vec(),
        };
        let methods = match &raw.methods {
            Some(v) => {
                non_empty(&src, "methods", v)?;
                let mut out = Vec::new();
                for name in v.get_ref() {
                    let k = name.parse::<Method>().map_err(|e| src.err("methods", v, e))?;
                    if !out.contains(&k) {
                        out.push(k);
                    }
                }
                out
            }
            None => vec![Method::Series, Method::MonteCarlo],
        };
        let pfa = match &raw.pfa {
            Some(v) => {
                non_empty(&src, "pfa", v)?;
                if let Some(p) = v.get_ref().iter().find(|p| !(**p > 0.0 && **p < 1.0)) {
                    return Err(src.err("pfa", v, format!("{p} is outside (0, 1)")));
                }
                v.get_ref().clone()
            }
            None => vec![1e-4],
        };
        let tolerance = match &raw.tolerance {
            Some(t) if !(*t.get_ref() > 0.0) => return Err(src.err("tolerance", t, "must be > 0")),
            Some(t) => *t.get_ref(),
            None => 1e-10,
        };
        let target_pd = match &raw.target_pd {
            Some(t) if !(*t.get_ref() > 0.0 && *t.get_ref() < 1.0) => {
                return Err(src.err("target_pd", t, "must lie in (0, 1)"))
            }
            Some(t) => *t.get_ref(),
            None => 0.8,
        };

        let sc = raw.scenario.ok_or_else(|| src.missing("scenario"))?;
        let m = sc.m.ok_or_else(|| src.missing("scenario.m"))?;
        non_empty(&src, "scenario.m", &m)?;
        if m.get_ref().iter().any(|&v| v < 2) {
            return Err(src.err("scenario.m", &m, "every M must be >= 2"));
        }
        let sigma_sq = match &sc.sigma_sq {
            Some(s) if !(*s.get_ref() > 0.0 && s.get_ref().is_finite()) => {
                return Err(src.err("scenario.sigma_sq", s, "must be finite and > 0"))
            }
            Some(s) => *s.get_ref(),
            None => 1.0,
        };
        let (n, snr, means) = match (sc.mu_x, sc.mu_y) {
            (Some(x), Some(y)) => {
                non_empty(&src, "scenario.mu_x", &x)?;
                if x.get_ref().len() != y.get_ref().len() {
                    return Err(src.err("scenario.mu_y", &y, "must have the same length as mu_x"));
                }
                const BOTH: &str = "give either mu_x/mu_y or n/snr_db, not both";
                if let Some(f) = &sc.n {
                    return Err(src.err("scenario.n", f, BOTH));
                }
                if let Some(f) = &sc.snr_db {
                    return Err(src.err("scenario.snr_db", f, BOTH));
                }
                (vec![x.get_ref().len() as u32], Vec::new(), Some((x.into_inner(), y.into_inner())))
            }
            (Some(x), None) => return Err(src.err("scenario.mu_x", &x, "mu_y is missing")),
            (None, Some(y)) => return Err(src.err("scenario.mu_y", &y, "mu_x is missing")),
            (None, None) => {
                let n = sc.n.ok_or_else(|| src.missing("scenario.n"))?;
                non_empty(&src, "scenario.n", &n)?;
                if n.get_ref().contains(&0) {
                    return Err(src.err("scenario.n", &n, "every N must be >= 1"));
                }
                let snr = sc.snr_db.ok_or_else(|| src.missing("scenario.snr_db"))?;
                non_empty(&src, "scenario.snr_db", &snr)?;
                if snr.get_ref().iter().any(|v| !v.is_finite()) {
                    return Err(src.err("scenario.snr_db", &snr, "values must be finite"));
                }
                (n.into_inner(), snr.get_ref().iter().map(|&d| Snr::from_db(d)).collect(), None)
            }
        };

        Ok(ExperimentConfig {
            experiment: raw.experiment.unwrap_or_else(|| default_name.to_string()),
            detectors,
            methods,
            pfa,
            trials: raw.trials.unwrap_or(100_000),
            seed: raw.seed.unwrap_or(1),
            tolerance,
            target_pd,
            out: raw.out,
            scenario: ScenarioConfig { n, m: m.into_inner(), sigma_sq, snr, means },
        })
    }

    pub fn load(path: &std::path::Path, default_name: &str) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text, default_name).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    /// The configuration as TOML; SNRs are echoed in dB.
    pub fn echo(&self) -> String {
        fn list<T: std::fmt::Debug>(v: impl IntoIterator<Item = T>) -> String {
            let items: Vec<String> = v.into_iter().map(|x| format!("{x:?}")).collect();
            format!("[{}]", items.join(", "))
        }
        let mut s = String::new();
        let _ = writeln!(s, "experiment = {:?}", self.experiment);
        let _ = writeln!(s, "detectors = {}", list(self.detectors.iter().map(|d| d.name())));
        let _ = writeln!(s, "methods = {}", list(self.methods.iter().map(|m| m.tag())));
        let _ = writeln!(s, "pfa = {}", list(&self.pfa));
        let _ = writeln!(s, "trials = {}", self.trials);
        let _ = writeln!(s, "seed = {}", self.seed);
        let _ = writeln!(s, "tolerance = {:?}", self.tolerance);
        let _ = writeln!(s, "target_pd = {:?}", self.target_pd);
        if let Some(out) = &self.out {
            let _ = writeln!(s, "out = {:?}", out.display().to_string());
        }
        let sc = &self.scenario;
        let _ = writeln!(s, "\n[scenario]");
        let _ = writeln!(s, "m = {}", list(&sc.m));
        let _ = writeln!(s, "sigma_sq = {:?}", sc.sigma_sq);
        match &sc.means {
            Some((x, y)) => {
                let _ = writeln!(s, "mu_x = {}", list(x));
                let _ = writeln!(s, "mu_y = {}", list(y));
            }
            None => {
                let _ = writeln!(s, "n = {}", list(&sc.n));
                let _ = writeln!(s, "snr_db = {}", list(sc.snr.iter().map(|v| v.db)));
            }
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const FIG4: &str = r#"
experiment = "fig4"
detectors = ["post-glrt", "square-law"]
pfa = [1e-4, 1e-3]
trials = 5000
seed = 9

[scenario]
n = [3]
m = [22]
snr_db = [-7.9, -6.5, -5.1]
"#;

    #[test]
    fn parses_and_converts_once() {
        let c = ExperimentConfig::parse(FIG4, "roc").unwrap();
        assert_eq!(c.detectors, vec![DetectorKind::PostGlrt, DetectorKind::SquareLaw]);
        assert_eq!(c.methods, vec![Method::Series, Method::MonteCarlo]);
        assert_eq!(c.scenario.snr[0].linear, 10f64.powf(-0.79));
        assert_eq!(c.trials, 5000);
        assert_eq!(c.tolerance, 1e-10);
    }

    #[test]
    fn echo_round_trips() {
        let c = ExperimentConfig::parse(FIG4, "roc").unwrap();
        let again = ExperimentConfig::parse(&c.echo(), "other").unwrap();
        assert_eq!(c, again);
        let means = "[scenario]\nm = [4]\nmu_x = [0.5, 1.0]\nmu_y = [0.0, -0.25]\n";
        let c = ExperimentConfig::parse(means, "x").unwrap();
        assert_eq!(c.scenario.n, vec![2]);
        assert_eq!(ExperimentConfig::parse(&c.echo(), "x").unwrap(), c);
    }

    #[test]
    fn diagnostics_name_line_and_field() {
        let bad = FIG4.replace(r#"detectors = ["post-glrt", "square-law"]"#, "detectors = []");
        let e = ExperimentConfig::parse(&bad, "roc").unwrap_err().to_string();
        assert!(e.contains("line 3") && e.contains("`detectors`") && e.contains("empty"), "{e}");
        let bad = FIG4.replace("m = [22]", "m = [1]");
        let e = ExperimentConfig::parse(&bad, "roc").unwrap_err().to_string();
        assert!(e.contains("line 10") && e.contains("scenario.m"), "{e}");
        let e = ExperimentConfig::parse("pfa = [2.0]\n", "roc").unwrap_err().to_string();
        assert!(e.contains("line 1") && e.contains("`pfa`"), "{e}");
        let e = ExperimentConfig::parse("colour = 1\n", "roc").unwrap_err().to_string();
        assert!(e.contains("colour") && e.contains("line 1"), "{e}");
        let e = ExperimentConfig::parse("detectors = [\"cfar\"]\n[scenario]\nm=[3]\n", "roc").unwrap_err().to_string();
        assert!(e.contains("unknown detector"), "{e}");
    }
}
