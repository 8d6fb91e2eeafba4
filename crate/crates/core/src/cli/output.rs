//! CSV rows shared by all commands.

use super::config::Method;
use crate::{Error, Result};
use std::io::Write;

pub const CSV_HEADER: [&str; 11] = [
    "experiment",
    "detector",
    "method",
    "pfa",
    "snr_db",
    "pd",
    "ci_low",
    "ci_high",
    "terms_used",
    "elapsed_ms",
    "snr_loss_db",
];

#[derive(Debug, Clone, PartialEq)]
pub struct CsvRow {
    pub experiment: String,
    pub detector: String,
    pub method: Method,
    pub pfa: f64,
    pub snr_db: f64,
    pub pd: f64,
    pub ci: Option<(f64, f64)>,
    pub terms_used: Option<usize>,
    pub elapsed_ms: Option<f64>,
    pub snr_loss_db: Option<f64>,
}

/// 17 significant digits.
fn prob(x: f64) -> String {
    format!("{x:.16e}")
}

impl CsvRow {
    fn fields(&self) -> [String; 11] {
        let opt = |v: Option<String>| v.unwrap_or_default();
        [
            self.experiment.clone(),
            self.detector.clone(),
            self.method.tag().to_string(),
            format!("{:e}", self.pfa),
            format!("{}", self.snr_db),
            prob(self.pd),
            opt(self.ci.map(|c| prob(c.0))),
            opt(self.ci.map(|c| prob(c.1))),
            opt(self.terms_used.map(|t| t.to_string())),
            opt(self.elapsed_ms.map(|t| format!("{t:.6}"))),
            opt(self.snr_loss_db.map(|t| format!("{t:.6}"))),
        ]
    }
}

/// Writes the header and rows with LF line endings, quoting only where needed.
pub fn write_csv<W: Write>(rows: &[CsvRow], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    let io = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(CSV_HEADER).map_err(io)?;
    for r in rows {
        w.write_record(r.fields()).map_err(io)?;
    }
    w.flush()?;
    Ok(())
}

pub fn csv_string(rows: &[CsvRow]) -> Result<String> {
    let mut buf = Vec::new();
    write_csv(rows, &mut buf)?;
    String::from_utf8(buf).map_err(|e| Error::Io(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout() {
        let row = CsvRow {
            experiment: "a,b".into(),
            detector: "post-glrt".into(),
            method: Method::Series,
            pfa: 1e-4,
            snr_db: -7.9,
            pd: 0.5,
            ci: None,
            terms_used: Some(12),
            elapsed_ms: None,
            snr_loss_db: Some(2.5),
        };
        let s = csv_string(&[row]).unwrap();
        assert_eq!(
            s,
            "experiment,detector,method,pfa,snr_db,pd,ci_low,ci_high,terms_used,elapsed_ms,snr_loss_db\n\
             \"a,b\",post-glrt,series,1e-4,-7.9,5.0000000000000000e-1,,,12,,2.500000\n"
        );
    }
}
