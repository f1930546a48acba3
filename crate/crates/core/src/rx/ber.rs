use statrs::function::erf::erfc;

use crate::error::{invalid, Error, Result};
use crate::waveform::BitStream;

const Z95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BerResult {
    pub n_bits: u64,
    pub n_errors: u64,
    pub ber: f64,
    /// Wilson 95 % interval.
    pub ci95: (f64, f64),
}

impl BerResult {
    pub fn from_counts(n_bits: u64, n_errors: u64) -> Result<Self> {
        if n_errors > n_bits {
            return invalid("ber counts", format!("{n_errors} errors in {n_bits} bits"));
        }
        if n_bits == 0 {
            return Ok(Self {
                n_bits,
                n_errors,
                ber: 0.0,
                ci95: (0.0, 1.0),
            });
        }
        let n = n_bits as f64;
        let p = n_errors as f64 / n;
        Ok(Self {
            n_bits,
            n_errors,
            ber: p,
            ci95: wilson(p, n, Z95),
        })
    }

    /// Pools two independent runs.
    pub fn merge(&self, other: &Self) -> Self {
        Self::from_counts(self.n_bits + other.n_bits, self.n_errors + other.n_errors)
            .expect("sums of valid counts stay valid")
    }
}

fn wilson(p: f64, n: f64, z: f64) -> (f64, f64) {
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// Hamming error rate between equal-length streams.
pub fn ber_compute(tx: &BitStream, rx: &BitStream) -> Result<BerResult> {
    if tx.len() != rx.len() {
        return Err(Error::LengthMismatch {
            what: "ber streams",
            expected: tx.len(),
            got: rx.len(),
        });
    }
    let errors = tx.bits().iter().zip(rx.bits()).filter(|(a, b)| a != b).count();
    BerResult::from_counts(tx.len() as u64, errors as u64)
}

/// Reference OOK error rate Q(√(2γ)) at linear SNR γ.
pub fn analytic_ook_ber(snr_db: f64) -> f64 {
    if snr_db == f64::NEG_INFINITY {
        return 0.5;
    }
    let gamma = 10f64.powf(snr_db / 10.0);
    // Q(x) = erfc(x/√2)/2 with x = √(2γ)
    0.5 * erfc(gamma.sqrt())
}

/// 1 iff the mean of `n_avg` amplitudes reaches `threshold`.
pub fn average_pulses(peak_amps: &[f64], n_avg: usize, threshold: f64) -> Result<bool> {
    if n_avg == 0 {
        return invalid("n_avg", "must be at least 1");
    }
    if peak_amps.len() != n_avg {
        return Err(Error::LengthMismatch {
            what: "averaged amplitudes",
            expected: n_avg,
            got: peak_amps.len(),
        });
    }
    let mean = peak_amps.iter().sum::<f64>() / n_avg as f64;
    Ok(mean >= threshold)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_run_has_full_interval() {
        let r = BerResult::from_counts(0, 0).unwrap();
        assert_eq!(r.ci95, (0.0, 1.0));
        assert!(BerResult::from_counts(3, 4).is_err());
    }

    #[test]
    fn merge_sums_counts() {
        let a = BerResult::from_counts(100, 1).unwrap();
        let b = BerResult::from_counts(300, 3).unwrap();
        let m = a.merge(&b);
        assert_eq!((m.n_bits, m.n_errors), (400, 4));
        assert_eq!(m, BerResult::from_counts(400, 4).unwrap());
    }

    #[test]
    fn zero_snr_limit() {
        assert_eq!(analytic_ook_ber(f64::NEG_INFINITY), 0.5);
        assert!((analytic_ook_ber(-200.0) - 0.5).abs() < 1e-9);
    }
}
