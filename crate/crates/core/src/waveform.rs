//! Sampled signal containers shared by every pipeline stage.

use crate::error::{invalid, Error, Result};
use crate::scalar::Scalar;

/// Uniformly sampled real voltage signal.
#[derive(Debug, Clone, PartialEq)]
pub struct Waveform<T = f64> {
    samples: Vec<T>,
    sample_rate: f64,
    t0: f64,
}

impl<T: Scalar> Waveform<T> {
    pub fn new(samples: Vec<T>, sample_rate: f64, t0: f64) -> Result<Self> {
        if !(sample_rate.is_finite() && sample_rate > 0.0) {
            return invalid("sample_rate", format!("{sample_rate} Hz must be positive and finite"));
        }
        if !t0.is_finite() {
            return invalid("t0", "start time must be finite");
        }
        if samples.is_empty() {
            return invalid("waveform", "needs at least one sample");
        }
        if let Some(i) = samples.iter().position(|v| !v.is_finite()) {
            return invalid("waveform", format!("sample {i} is not finite"));
        }
        Ok(Self {
            samples,
            sample_rate,
            t0,
        })
    }

    /// Builds `n` samples from a function of absolute time.
    pub fn from_fn(n: usize, sample_rate: f64, t0: f64, mut f: impl FnMut(f64) -> T) -> Result<Self> {
        let dt = 1.0 / sample_rate;
        let samples = (0..n).map(|i| f(t0 + i as f64 * dt)).collect();
        Self::new(samples, sample_rate, t0)
    }

    pub fn zeros(n: usize, sample_rate: f64, t0: f64) -> Result<Self> {
        Self::new(vec![T::zero(); n], sample_rate, t0)
    }

    /// Same timing as `self`, new sample values. Length must match.
    pub fn with_samples(&self, samples: Vec<T>) -> Result<Self> {
        if samples.len() != self.samples.len() {
            return Err(Error::LengthMismatch {
                what: "waveform samples",
                expected: self.samples.len(),
                got: samples.len(),
            });
        }
        Self::new(samples, self.sample_rate, self.t0)
    }

    pub fn samples(&self) -> &[T] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<T> {
        self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    /// Always false; a waveform holds at least one sample.
    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    pub fn dt(&self) -> f64 {
        1.0 / self.sample_rate
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn time(&self, i: usize) -> f64 {
        self.t0 + i as f64 / self.sample_rate
    }

    /// Span covered by the samples, `len / sample_rate`.
    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate
    }

    pub fn t_end(&self) -> f64 {
        self.t0 + self.duration()
    }

    /// Index of the sample nearest to absolute time `t`, clamped to the record.
    pub fn nearest_index(&self, t: f64) -> usize {
        let x = ((t - self.t0) * self.sample_rate).round();
        if x <= 0.0 {
            0
        } else {
            (x as usize).min(self.samples.len() - 1)
        }
    }

    pub fn map(&self, mut f: impl FnMut(T) -> T) -> Result<Self> {
        self.with_samples(self.samples.iter().map(|&v| f(v)).collect())
    }

    pub fn scaled(&self, k: T) -> Self {
        Self {
            samples: self.samples.iter().map(|&v| v * k).collect(),
            sample_rate: self.sample_rate,
            t0: self.t0,
        }
    }

    /// Sample-wise sum; both records must share rate and length.
    pub fn add(&self, other: &Self) -> Result<Self> {
        if other.samples.len() != self.samples.len() {
            return Err(Error::LengthMismatch {
                what: "waveform sum",
                expected: self.samples.len(),
                got: other.samples.len(),
            });
        }
        if (other.sample_rate - self.sample_rate).abs() > 1e-9 * self.sample_rate {
            return invalid("waveform sum", "sample rates differ");
        }
        let samples = self.samples.iter().zip(&other.samples).map(|(&a, &b)| a + b).collect();
        self.with_samples(samples)
    }

    /// Mean-square voltage over the record.
    pub fn mean_square(&self) -> f64 {
        let acc: f64 = self.samples.iter().map(|v| v.as_f64() * v.as_f64()).sum();
        acc / self.samples.len() as f64
    }

    /// Average power delivered into `r_ref` ohms, in watts.
    pub fn mean_power(&self, r_ref: f64) -> f64 {
        self.mean_square() / r_ref
    }

    /// Copy of the samples in `[i0, i1)`, keeping absolute timing.
    pub fn slice(&self, i0: usize, i1: usize) -> Result<Self> {
        if i0 >= i1 || i1 > self.samples.len() {
            return invalid("slice", format!("[{i0}, {i1}) outside 0..{}", self.samples.len()));
        }
        Self::new(self.samples[i0..i1].to_vec(), self.sample_rate, self.time(i0))
    }

    pub fn to_f64(&self) -> Waveform<f64> {
        Waveform {
            samples: self.samples.iter().map(|v| v.as_f64()).collect(),
            sample_rate: self.sample_rate,
            t0: self.t0,
        }
    }
}

/// One-sided power spectral density on a uniform frequency grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    bin_freqs: Vec<f64>,
    psd: Vec<f64>,
    rbw: f64,
}

impl Spectrum {
    /// `psd` is in dBm/MHz, `rbw` in Hz.
    pub fn new(bin_freqs: Vec<f64>, psd: Vec<f64>, rbw: f64) -> Result<Self> {
        if bin_freqs.len() != psd.len() {
            return Err(Error::LengthMismatch {
                what: "spectrum",
                expected: bin_freqs.len(),
                got: psd.len(),
            });
        }
        if bin_freqs.len() < 2 {
            return invalid("spectrum", "needs at least two bins");
        }
        if !(rbw.is_finite() && rbw > 0.0) {
            return invalid("rbw", format!("{rbw} Hz must be positive"));
        }
        let df = bin_freqs[1] - bin_freqs[0];
        if !(df > 0.0) {
            return invalid("spectrum", "bins must ascend");
        }
        for (i, w) in bin_freqs.windows(2).enumerate() {
            if ((w[1] - w[0]) - df).abs() > 1e-6 * df {
                return invalid("spectrum", format!("bin spacing not uniform at bin {}", i + 1));
            }
        }
        if psd.iter().any(|p| !p.is_finite()) {
            return invalid("spectrum", "psd values must be finite");
        }
        Ok(Self { bin_freqs, psd, rbw })
    }

    pub fn bin_freqs(&self) -> &[f64] {
        &self.bin_freqs
    }

    /// PSD in dBm/MHz.
    pub fn psd(&self) -> &[f64] {
        &self.psd
    }

    pub fn rbw(&self) -> f64 {
        self.rbw
    }

    pub fn bin_spacing(&self) -> f64 {
        self.bin_freqs[1] - self.bin_freqs[0]
    }

    pub fn f_min(&self) -> f64 {
        self.bin_freqs[0]
    }

    pub fn f_max(&self) -> f64 {
        *self.bin_freqs.last().expect("spectrum has bins")
    }

    /// Largest PSD value among bins inside `[f_lo, f_hi]`, if any bin falls there.
    pub fn max_in(&self, f_lo: f64, f_hi: f64) -> Option<f64> {
        self.bin_freqs
            .iter()
            .zip(&self.psd)
            .filter(|(f, _)| **f >= f_lo && **f <= f_hi)
            .map(|(_, p)| *p)
            .reduce(f64::max)
    }

    /// Returns a copy with every PSD value shifted by `db`.
    pub fn offset(&self, db: f64) -> Self {
        Self {
            bin_freqs: self.bin_freqs.clone(),
            psd: self.psd.iter().map(|p| p + db).collect(),
            rbw: self.rbw,
        }
    }
}

/// Binary data stream with its nominal rate.
#[derive(Debug, Clone, PartialEq)]
pub struct BitStream {
    bits: Vec<bool>,
    bit_rate: f64,
}

impl BitStream {
    pub fn new(bits: Vec<bool>, bit_rate: f64) -> Result<Self> {
        if !(bit_rate.is_finite() && bit_rate > 0.0) {
            return invalid("bit_rate", format!("{bit_rate} b/s must be positive"));
        }
        Ok(Self { bits, bit_rate })
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn into_bits(self) -> Vec<bool> {
        self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bit_rate(&self) -> f64 {
        self.bit_rate
    }

    pub fn bit_period(&self) -> f64 {
        1.0 / self.bit_rate()
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().filter(|b| **b).count()
    }
}
