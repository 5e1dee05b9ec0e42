//! CSV emission with lossless float formatting.

use std::io::Write;

use crate::error::Result;
use crate::experiments::ResultRow;

pub const CSV_HEADER: [&str; 13] = [
    "experiment",
    "protocol",
    "n",
    "theta",
    "a",
    "k",
    "states",
    "shots",
    "seed",
    "run_seed",
    "mean",
    "variance",
    "variance_stderr",
];

/// 17 significant digits, enough to round-trip any `f64`.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn write_csv<W: Write>(rows: &[ResultRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.write_record([
            r.experiment.name().to_string(),
            r.protocol.name().to_string(),
            r.n.to_string(),
            r.theta.map(format_float).unwrap_or_default(),
            r.a.map(format_float).unwrap_or_default(),
            opt(r.k),
            opt(r.states),
            r.shots.to_string(),
            r.seed.to_string(),
            r.run_seed.to_string(),
            format_float(r.mean),
            format_float(r.variance),
            format_float(r.variance_stderr),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn csv_string(rows: &[ResultRow]) -> Result<String> {
    let mut buf = Vec::new();
    write_csv(rows, &mut buf)?;
    Ok(String::from_utf8(buf).expect("csv output is ASCII"))
}
