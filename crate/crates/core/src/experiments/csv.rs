//! CSV serialization of [`ExperimentRecord`]s: header row, LF endings, floats
//! at 17 significant digits so that parsing gives back the same bits.

use std::fmt::Write as _;
use std::path::Path;

use super::{Estimator, ExperimentRecord};
use crate::datagen::FeatureDistribution;
use crate::error::{Error, Result};

pub const HEADER: [&str; 13] = [
    "seed",
    "run_index",
    "n",
    "d",
    "sigma2",
    "dist",
    "estimator",
    "err_l2sq",
    "l1_norm",
    "support_size",
    "theory_rate",
    "wall_time_ms",
    "status",
];

/// 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn to_csv_string(records: &[ExperimentRecord]) -> String {
    let mut out = HEADER.join(",");
    out.push('\n');
    for r in records {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.seed,
            r.run_index,
            r.n,
            r.d,
            fmt_f64(r.sigma2),
            r.dist.name(),
            r.estimator.name(),
            fmt_f64(r.err_l2sq),
            fmt_f64(r.l1_norm),
            r.support_size,
            fmt_f64(r.theory_rate),
            fmt_f64(r.wall_time_ms),
            r.status,
        );
    }
    out
}

pub fn write_csv(records: &[ExperimentRecord], path: &Path) -> Result<()> {
    std::fs::write(path, to_csv_string(records))?;
    Ok(())
}

fn field<T: std::str::FromStr>(raw: &str, name: &str, line: usize) -> Result<T> {
    raw.parse()
        .map_err(|_| Error::Parse(format!("line {line}: bad {name} value {raw:?}")))
}

pub fn parse_csv(text: &str) -> Result<Vec<ExperimentRecord>> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| Error::Parse("missing header".into()))?;
    if header != HEADER.join(",") {
        return Err(Error::Parse(format!("unexpected header {header:?}")));
    }
    let mut out = Vec::new();
    for (i, line) in lines.enumerate() {
        let ln = i + 2;
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != HEADER.len() {
            return Err(Error::Parse(format!("line {ln}: expected {} fields, got {}", HEADER.len(), cols.len())));
        }
        out.push(ExperimentRecord {
            seed: field(cols[0], "seed", ln)?,
            run_index: field(cols[1], "run_index", ln)?,
            n: field(cols[2], "n", ln)?,
            d: field(cols[3], "d", ln)?,
            sigma2: field(cols[4], "sigma2", ln)?,
            dist: cols[5].parse::<FeatureDistribution>()?,
            estimator: Estimator::from_name(cols[6])
                .ok_or_else(|| Error::Parse(format!("line {ln}: bad estimator {:?}", cols[6])))?,
            err_l2sq: field(cols[7], "err_l2sq", ln)?,
            l1_norm: field(cols[8], "l1_norm", ln)?,
            support_size: field(cols[9], "support_size", ln)?,
            theory_rate: field(cols[10], "theory_rate", ln)?,
            wall_time_ms: field(cols[11], "wall_time_ms", ln)?,
            status: cols[12].to_string(),
        });
    }
    Ok(out)
}

pub fn read_csv(path: &Path) -> Result<Vec<ExperimentRecord>> {
    parse_csv(&std::fs::read_to_string(path)?)
}
