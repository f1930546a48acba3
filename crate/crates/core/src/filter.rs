//! Bilinear-transform IIR sections with corner prewarping.

use crate::error::{invalid, Result};
use crate::scalar::Scalar;
use crate::waveform::Waveform;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FilterMode {
    Highpass,
    Lowpass,
}

fn check_corner(corner: f64, fs: f64) -> Result<()> {
    if !(corner > 0.0) || corner >= fs / 2.0 {
        return invalid(
            "corner",
            format!("{corner} Hz must lie in (0, {}) Hz for a {fs} Hz sample rate", fs / 2.0),
        );
    }
    Ok(())
}

/// Single-pole section. `gain` is the DC gain of a lowpass or the
/// high-frequency gain of a highpass.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FirstOrder<T> {
    b0: T,
    b1: T,
    a1: T,
}

impl<T: Scalar> FirstOrder<T> {
    pub fn design(mode: FilterMode, corner: f64, gain: f64, fs: f64) -> Result<Self> {
        check_corner(corner, fs)?;
        let k = (std::f64::consts::PI * corner / fs).tan();
        let a1 = (k - 1.0) / (k + 1.0);
        let (b0, b1) = match mode {
            FilterMode::Lowpass => {
                let b = gain * k / (1.0 + k);
                (b, b)
            }
            FilterMode::Highpass => {
                let b = gain / (1.0 + k);
                (b, -b)
            }
        };
        Ok(Self {
            b0: T::lit(b0),
            b1: T::lit(b1),
            a1: T::lit(a1),
        })
    }

    /// Filters from rest.
    pub fn run(&self, x: &[T]) -> Vec<T> {
        let mut x1 = T::zero();
        let mut y1 = T::zero();
        x.iter()
            .map(|&x0| {
                let y0 = self.b0 * x0 + self.b1 * x1 - self.a1 * y1;
                x1 = x0;
                y1 = y0;
                y0
            })
            .collect()
    }
}

/// Second-order Butterworth section (Q = 1/sqrt 2).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Biquad<T> {
    b: [T; 3],
    a: [T; 2],
}

impl<T: Scalar> Biquad<T> {
    pub fn butterworth(mode: FilterMode, corner: f64, fs: f64) -> Result<Self> {
        check_corner(corner, fs)?;
        let w0 = 2.0 * std::f64::consts::PI * corner / fs;
        let (sn, cs) = w0.sin_cos();
        let alpha = sn / std::f64::consts::SQRT_2;
        let a0 = 1.0 + alpha;
        let b = match mode {
            FilterMode::Lowpass => [(1.0 - cs) / 2.0, 1.0 - cs, (1.0 - cs) / 2.0],
            FilterMode::Highpass => [(1.0 + cs) / 2.0, -(1.0 + cs), (1.0 + cs) / 2.0],
        };
        Ok(Self {
            b: b.map(|v| T::lit(v / a0)),
            a: [T::lit(-2.0 * cs / a0), T::lit((1.0 - alpha) / a0)],
        })
    }

    pub fn run(&self, x: &[T]) -> Vec<T> {
        // transposed direct form II
        let (mut z1, mut z2) = (T::zero(), T::zero());
        x.iter()
            .map(|&x0| {
                let y0 = self.b[0] * x0 + z1;
                z1 = self.b[1] * x0 - self.a[0] * y0 + z2;
                z2 = self.b[2] * x0 - self.a[1] * y0;
                y0
            })
            .collect()
    }
}

/// Single-pole filter of a whole waveform, starting from rest.
pub fn filter_first_order<T: Scalar>(
    w: &Waveform<T>,
    mode: FilterMode,
    corner: f64,
    dc_gain: f64,
) -> Result<Waveform<T>> {
    let f = FirstOrder::<T>::design(mode, corner, dc_gain, w.sample_rate())?;
    w.with_samples(f.run(w.samples()))
}

/// Flat passband between `f_lo` and `f_hi` with second-order Butterworth
/// edges on both sides.
pub fn band_limit<T: Scalar>(w: &Waveform<T>, f_lo: f64, f_hi: f64) -> Result<Waveform<T>> {
    if !(f_lo < f_hi) {
        return invalid("band", format!("f_lo {f_lo} Hz must be below f_hi {f_hi} Hz"));
    }
    let fs = w.sample_rate();
    let hp = Biquad::<T>::butterworth(FilterMode::Highpass, f_lo, fs)?;
    let lp = Biquad::<T>::butterworth(FilterMode::Lowpass, f_hi, fs)?;
    w.with_samples(lp.run(&hp.run(w.samples())))
}
