//! Text summary and output files of a run.

use std::fmt::Write as _;
use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use uwb_core::dll::trajectory_csv;
use uwb_core::dump::write_waveform;

use crate::error::{AtStage, Result};
use crate::mask::write_spectrum_csv;
use crate::run::LinkReport;
use crate::sweep::{write_rows, SweepRow};

pub fn summary(r: &LinkReport) -> String {
    let mut s = String::new();
    let b = &r.ber;
    let _ = writeln!(s, "mode            {}", r.mode.name());
    let _ = writeln!(s, "p_out           {:.2} dBm", r.p_out_dbm);
    let _ = writeln!(s, "rx power        {:.2} dBm", r.rx_power);
    let _ = writeln!(s, "noise floor     {:.2} dBm", r.noise_floor);
    let _ = writeln!(s, "snr             {:.2} dB", r.snr);
    let _ = writeln!(
        s,
        "ber             {:.3e} ({} / {}, 95% CI {:.2e} .. {:.2e}), n_avg {}",
        b.ber, b.n_errors, b.n_bits, b.ci95.0, b.ci95.1, r.n_avg
    );
    let _ = writeln!(
        s,
        "dll             {} at delay {:.1} ps, lock error {:.1} ps",
        if r.dll.locked { "locked" } else { "NOT locked" },
        r.dll.delay * 1e12,
        r.dll.lock_error * 1e12
    );
    match r.occupied_band {
        Some((lo, hi)) => {
            let _ = writeln!(s, "-10 dB band     {:.3} .. {:.3} GHz", lo / 1e9, hi / 1e9);
        }
        None => {
            let _ = writeln!(s, "-10 dB band     none (no emission)");
        }
    }
    let _ = writeln!(s, "mask            {}", if r.pass_mask { "pass" } else { "FAIL" });
    for m in &r.mask.bands {
        let hi = if m.band.f_hi.is_finite() {
            format!("{:.2}", m.band.f_hi / 1e9)
        } else {
            "inf".to_owned()
        };
        let margin = m.margin.map_or("not evaluated".to_owned(), |x| format!("{x:+.2} dB"));
        let _ = writeln!(
            s,
            "  {:>5.2} .. {:>5} GHz  limit {:6.1} dBm/MHz  margin {margin}",
            m.band.f_lo / 1e9,
            hi,
            m.band.limit
        );
    }
    let _ = writeln!(
        s,
        "table row       efficiency {:.4} %, energy/bit {:.2} pJ, data rate {:.2} Mb/s",
        r.tx_efficiency,
        r.energy_per_bit_pj,
        r.data_rate / 1e6
    );
    if let Some(p) = &r.power_link {
        let _ = writeln!(s, "power link      efficiency {:.1} %", p.efficiency);
        let _ = writeln!(
            s,
            "  rectifier     {:.3} V tuned, ripple {:.1} µV",
            p.v_dc_tuned,
            p.ripple * 1e6
        );
        let _ = writeln!(
            s,
            "  regulation    {:.3} V, C/C0 {:.4}, limiter {}, {}",
            p.v_rect,
            p.c_tune_ratio,
            if p.limiter_active { "on" } else { "off" },
            if p.regulated { "regulated" } else { "NOT regulated" }
        );
        let _ = writeln!(s, "  vco-free rate {:.2} Mb/s", p.vco_free_rate / 1e6);
    }
    s
}

/// Writes `report.csv`, `mask.csv`, `spectrum.csv`, `dll_trajectory.csv`,
/// `summary.txt` and, with `dump`, `radiated.uwbw` into `dir`.
pub fn write_outputs(r: &LinkReport, dir: &Path, dump: bool) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    write_rows(&[SweepRow::from(r)], File::create(dir.join("report.csv"))?)?;
    r.mask.write_csv(File::create(dir.join("mask.csv"))?)?;
    write_spectrum_csv(&r.spectrum, BufWriter::new(File::create(dir.join("spectrum.csv"))?))?;
    std::fs::write(dir.join("dll_trajectory.csv"), trajectory_csv(&r.dll.trajectory))?;
    std::fs::write(dir.join("summary.txt"), summary(r))?;
    if dump {
        let mut f = BufWriter::new(File::create(dir.join("radiated.uwbw"))?);
        write_waveform(&mut f, &r.radiated).at("dump")?;
    }
    Ok(())
}
