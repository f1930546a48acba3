//! Parameter sweeps. Point `i` draws noise from streams starting at
//! `(first_index + i) << 32` of the scenario seed, so a sweep can be split
//! into pieces or run on any number of threads with identical rows.

use std::io::Write;

use rayon::prelude::*;

use crate::error::{config, Result};
use crate::mask::SpectralMask;
use crate::run::{run_point, LinkReport};
use crate::scenario::{parse_value, Scenario, KEYS};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub rx_power_dbm: f64,
    pub snr_db: f64,
    pub n_bits: u64,
    pub n_errors: u64,
    pub ber: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub n_avg: usize,
}

impl From<&LinkReport> for SweepRow {
    fn from(r: &LinkReport) -> Self {
        Self {
            rx_power_dbm: r.rx_power,
            snr_db: r.snr,
            n_bits: r.ber.n_bits,
            n_errors: r.ber.n_errors,
            ber: r.ber.ber,
            ci_lo: r.ber.ci95.0,
            ci_hi: r.ber.ci95.1,
            n_avg: r.n_avg,
        }
    }
}

pub const COLUMNS: [&str; 8] = [
    "rx_power_dbm",
    "snr_db",
    "n_bits",
    "n_errors",
    "ber",
    "ci_lo",
    "ci_hi",
    "n_avg",
];

pub fn write_rows<W: Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(COLUMNS)?;
    for r in rows {
        w.write_record([
            r.rx_power_dbm.to_string(),
            r.snr_db.to_string(),
            r.n_bits.to_string(),
            r.n_errors.to_string(),
            r.ber.to_string(),
            r.ci_lo.to_string(),
            r.ci_hi.to_string(),
            r.n_avg.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// One scenario per value with `param` replaced.
pub fn sweep_scenarios(s: &Scenario, param: &str, values: &[String]) -> Result<Vec<Scenario>> {
    if !KEYS.contains(&param) {
        return config(format!(
            "--param {param}: not a scenario key; valid keys are {}",
            KEYS.join(", ")
        ));
    }
    values
        .iter()
        .map(|v| {
            let mut p = s.clone();
            p.set(param, &parse_value(v))?;
            p.validate()?;
            Ok(p)
        })
        .collect()
}

/// Full reports, in input order, on up to `jobs` threads.
pub fn sweep_reports(
    s: &Scenario,
    mask: &SpectralMask,
    param: &str,
    values: &[String],
    first_index: u64,
    jobs: usize,
) -> Result<Vec<LinkReport>> {
    let points = sweep_scenarios(s, param, values)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| crate::error::SimError::Config(format!("--jobs: {e}")))?;
    pool.install(|| {
        points
            .par_iter()
            .enumerate()
            .map(|(i, p)| run_point(p, mask, (first_index + i as u64) << 32))
            .collect()
    })
}

pub fn sweep(
    s: &Scenario,
    mask: &SpectralMask,
    param: &str,
    values: &[String],
    first_index: u64,
    jobs: usize,
) -> Result<Vec<SweepRow>> {
    Ok(sweep_reports(s, mask, param, values, first_index, jobs)?
        .iter()
        .map(SweepRow::from)
        .collect())
}
