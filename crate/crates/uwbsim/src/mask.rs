//! Spectral emission masks and per-band compliance margins.

use std::io::{Read, Write};
use std::path::Path;

use uwb_core::Spectrum;

use crate::error::{config, AtStage, Result, SimError};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaskBand {
    /// Hz
    pub f_lo: f64,
    /// Hz; infinite for an open upper band.
    pub f_hi: f64,
    /// dBm/MHz
    pub limit: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralMask {
    bands: Vec<MaskBand>,
}

/// The FCC indoor mask shipped with the crate.
pub const FCC_INDOOR: &str = include_str!("../data/fcc_indoor.mask");

impl SpectralMask {
    pub fn new(bands: Vec<MaskBand>) -> Result<Self> {
        if bands.is_empty() {
            return config("mask: no bands");
        }
        for b in &bands {
            if !(b.limit.is_finite() && b.f_lo >= 0.0 && b.f_lo < b.f_hi) {
                return config(format!("mask band {b:?}: needs 0 ≤ f_lo < f_hi and a finite limit"));
            }
        }
        if let Some(w) = bands.windows(2).find(|w| w[1].f_lo < w[0].f_hi) {
            return config(format!("mask bands {:?} and {:?} overlap or are unsorted", w[0], w[1]));
        }
        Ok(Self { bands })
    }

    /// One band per line, `f_lo f_hi limit`; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut bands = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let f: Vec<f64> = line
                .split_whitespace()
                .map(str::parse)
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| SimError::Config(format!("mask line {}: {e}", n + 1)))?;
            let [f_lo, f_hi, limit] = f[..] else {
                return config(format!("mask line {}: expected f_lo f_hi limit", n + 1));
            };
            bands.push(MaskBand { f_lo, f_hi, limit });
        }
        Self::new(bands)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| SimError::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn fcc_indoor() -> Self {
        Self::parse(FCC_INDOOR).expect("shipped mask parses")
    }

    pub fn bands(&self) -> &[MaskBand] {
        &self.bands
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandMargin {
    pub band: MaskBand,
    /// Highest PSD in the band, dBm/MHz; `None` when not evaluated.
    pub max_psd: Option<f64>,
    /// `limit − max_psd`, dB.
    pub margin: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MaskResult {
    pub bands: Vec<BandMargin>,
}

impl MaskResult {
    pub fn fully_evaluated(&self) -> bool {
        self.bands.iter().all(|b| b.margin.is_some())
    }

    /// Compliance over every band; `None` if some band was not evaluated.
    pub fn pass(&self) -> Option<bool> {
        self.fully_evaluated().then(|| self.pass_partial())
    }

    /// Compliance over the evaluated bands only.
    pub fn pass_partial(&self) -> bool {
        self.bands.iter().filter_map(|b| b.margin).all(|m| m >= 0.0)
    }

    pub fn min_margin(&self) -> Option<f64> {
        self.bands.iter().filter_map(|b| b.margin).reduce(f64::min)
    }

    /// Band table as CSV.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "f_lo_hz",
            "f_hi_hz",
            "limit_dbm_per_mhz",
            "max_psd_dbm_per_mhz",
            "margin_db",
        ])?;
        let opt = |x: Option<f64>| x.map_or("not evaluated".to_owned(), |v| v.to_string());
        for b in &self.bands {
            w.write_record([
                b.band.f_lo.to_string(),
                b.band.f_hi.to_string(),
                b.band.limit.to_string(),
                opt(b.max_psd),
                opt(b.margin),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Margin of every band the spectrum spans. A closed band must lie inside
/// the spectrum; an open band is checked from its lower edge up to the top bin.
pub fn mask_check(s: &Spectrum, mask: &SpectralMask) -> MaskResult {
    let tol = 1e-9 * s.f_max();
    let bands = mask
        .bands
        .iter()
        .map(|&band| {
            let covered = if band.f_hi.is_finite() {
                band.f_lo >= s.f_min() - tol && band.f_hi <= s.f_max() + tol
            } else {
                band.f_lo >= s.f_min() - tol && band.f_lo < s.f_max()
            };
            let max_psd = if covered { s.max_in(band.f_lo, band.f_hi) } else { None };
            BandMargin {
                band,
                max_psd,
                margin: max_psd.map(|p| band.limit - p),
            }
        })
        .collect();
    MaskResult { bands }
}

pub fn write_spectrum_csv<W: Write>(s: &Spectrum, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["freq_hz", "psd_dbm_per_mhz"])?;
    for (f, p) in s.bin_freqs().iter().zip(s.psd()) {
        w.write_record([f.to_string(), p.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a `{freq_hz, psd_dbm_per_mhz}` CSV. The bin spacing stands in for
/// the resolution bandwidth.
pub fn read_spectrum_csv<R: Read>(inp: R) -> Result<Spectrum> {
    let mut r = csv::Reader::from_reader(inp);
    let head = r.headers()?.clone();
    if head.iter().collect::<Vec<_>>() != ["freq_hz", "psd_dbm_per_mhz"] {
        return config(format!(
            "spectrum csv: header {head:?}, expected freq_hz,psd_dbm_per_mhz"
        ));
    }
    let (mut f, mut p) = (Vec::new(), Vec::new());
    for (n, rec) in r.records().enumerate() {
        let rec = rec?;
        let num = |i: usize| -> Result<f64> {
            rec.get(i)
                .and_then(|x| x.trim().parse().ok())
                .ok_or_else(|| SimError::Config(format!("spectrum csv row {}: bad number", n + 2)))
        };
        f.push(num(0)?);
        p.push(num(1)?);
    }
    if f.len() < 2 {
        return config("spectrum csv: needs at least two bins");
    }
    let rbw = f[1] - f[0];
    Spectrum::new(f, p, rbw).at("spectrum csv")
}
