//! Slot-synchronous energy statistic used for Monte Carlo BER runs.
//!
//! Each slot is reduced to `|⟨r, s⟩| / (σ‖s‖)` over a short window centred on
//! the strongest part of the noiseless all-ones reference `s`. Taking the magnitude
//! makes the statistic blind to the pulse polarity, which alternates with the
//! carrier half-period a slot happens to start on.

use crate::error::{invalid, Error, Result};
use crate::rx::ber::average_pulses;
use crate::waveform::Waveform;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlotGrid {
    /// Start of slot 0, s.
    pub t_start: f64,
    /// Slot width, s.
    pub slot: f64,
    pub n: usize,
}

/// Normalized correlation magnitude for every slot. The window is centred on
/// the reference peak within the middle half of the slot. In noise alone each value
/// is the magnitude of a unit normal.
pub fn slot_statistics(
    r: &Waveform,
    reference: &Waveform,
    grid: &SlotGrid,
    window: f64,
    sigma: f64,
) -> Result<Vec<f64>> {
    if r.len() != reference.len() || r.sample_rate() != reference.sample_rate() {
        return Err(Error::LengthMismatch {
            what: "reference samples",
            expected: r.len(),
            got: reference.len(),
        });
    }
    if !(sigma > 0.0) || !(window > 0.0) || !(grid.slot > 0.0) {
        return invalid("slot statistic", "sigma, window and slot must be positive");
    }
    let x = r.samples();
    let s = reference.samples();
    let fs = r.sample_rate();
    let half = ((window * fs / 2.0).round() as usize).max(1);
    let idx = |t: f64| -> usize { (((t - r.t0()) * fs).round().max(0.0) as usize).min(x.len()) };
    let mut out = Vec::with_capacity(grid.n);
    for k in 0..grid.n {
        let a = idx(grid.t_start + k as f64 * grid.slot);
        let b = idx(grid.t_start + (k + 1) as f64 * grid.slot);
        if a >= b {
            return invalid("slot grid", format!("slot {k} lies outside the record"));
        }
        // middle half only, so the window stays clear of the neighbours
        let q = (b - a) / 4;
        let p = (a + q..b - q)
            .max_by(|&i, &j| s[i].abs().total_cmp(&s[j].abs()))
            .expect("slot is non-empty");
        let lo = p.saturating_sub(half);
        let hi = (p + half).min(x.len());
        let (mut dot, mut energy) = (0.0, 0.0);
        for i in lo..hi {
            dot += x[i] * s[i];
            energy += s[i] * s[i];
        }
        if energy == 0.0 {
            return invalid("reference", format!("slot {k} carries no reference energy"));
        }
        out.push((dot / (sigma * energy.sqrt())).abs());
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Decision {
    pub bits: Vec<bool>,
    pub threshold: f64,
    pub mean_one: f64,
    pub mean_zero: f64,
}

/// Groups `stats` into bits of `n_avg` slots, sets the threshold halfway
/// between the mean "1" and "0" statistic of the leading `preamble` bits,
/// and decides the bits that follow it.
pub fn decide_with_preamble(stats: &[f64], n_avg: usize, preamble: &[bool]) -> Result<Decision> {
    if n_avg == 0 {
        return invalid("n_avg", "must be at least 1");
    }
    if !stats.len().is_multiple_of(n_avg) {
        return invalid(
            "slot statistics",
            format!("{} slots do not split into groups of {n_avg}", stats.len()),
        );
    }
    let groups: Vec<&[f64]> = stats.chunks_exact(n_avg).collect();
    if groups.len() < preamble.len() {
        return invalid("slot statistics", "shorter than the preamble");
    }
    let mean = |g: &[f64]| g.iter().sum::<f64>() / g.len() as f64;
    let (mut s1, mut n1, mut s0, mut n0) = (0.0, 0usize, 0.0, 0usize);
    for (g, &b) in groups.iter().zip(preamble) {
        if b {
            s1 += mean(g);
            n1 += 1;
        } else {
            s0 += mean(g);
            n0 += 1;
        }
    }
    if n1 == 0 || n0 == 0 {
        return invalid("preamble", "needs both ones and zeros");
    }
    let (mean_one, mean_zero) = (s1 / n1 as f64, s0 / n0 as f64);
    let threshold = 0.5 * (mean_one + mean_zero);
    let bits = groups[preamble.len()..]
        .iter()
        .map(|g| average_pulses(g, n_avg, threshold))
        .collect::<Result<Vec<_>>>()?;
    Ok(Decision {
        bits,
        threshold,
        mean_one,
        mean_zero,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn noiseless_statistic_is_reference_norm_over_sigma() {
        let s: Vec<f64> = (0..200).map(|i| ((i as f64) * 0.3).sin()).collect();
        let w = Waveform::new(s, 1e9, 0.0).unwrap();
        let grid = SlotGrid {
            t_start: 0.0,
            slot: 100e-9,
            n: 2,
        };
        let z = slot_statistics(&w, &w, &grid, 20e-9, 0.5).unwrap();
        for (k, v) in z.iter().enumerate() {
            let a = k * 100;
            let x = w.samples();
            let p = (a + 25..a + 75)
                .max_by(|&i, &j| x[i].abs().total_cmp(&x[j].abs()))
                .unwrap();
            let e: f64 = x[p.saturating_sub(10)..(p + 10).min(200)].iter().map(|v| v * v).sum();
            assert!((v - e.sqrt() / 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn preamble_must_have_both_symbols() {
        assert!(decide_with_preamble(&[1.0, 2.0], 1, &[true, true]).is_err());
        let d = decide_with_preamble(&[4.0, 0.0, 3.0, 1.0], 1, &[true, false]).unwrap();
        assert_eq!(d.threshold, 2.0);
        assert_eq!(d.bits, vec![true, false]);
    }
}
