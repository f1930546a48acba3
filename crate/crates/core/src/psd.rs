//! Welch power spectral density estimate and band integration.

use rustfft::num_complex::Complex;
use rustfft::{FftNum, FftPlanner};

use crate::error::{invalid, Result};
use crate::scalar::Scalar;
use crate::units::power_to_dbm;
use crate::waveform::{Spectrum, Waveform};

/// Lowest representable PSD; empty bins are clamped here instead of -inf.
pub const PSD_FLOOR_DBM_PER_MHZ: f64 = -300.0;

pub const DEFAULT_R_REF: f64 = 50.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Window {
    Hann,
    Rect,
}

impl Window {
    fn coefficients(self, n: usize) -> Vec<f64> {
        match self {
            Window::Rect => vec![1.0; n],
            // periodic Hann, the usual choice for spectral averaging
            Window::Hann => (0..n)
                .map(|i| 0.5 - 0.5 * (2.0 * std::f64::consts::PI * i as f64 / n as f64).cos())
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WelchConfig {
    pub segment_len: usize,
    pub overlap_fraction: f64,
    pub window: Window,
    pub r_ref: f64,
}

impl WelchConfig {
    pub fn new(segment_len: usize, overlap_fraction: f64, window: Window) -> Self {
        Self {
            segment_len,
            overlap_fraction,
            window,
            r_ref: DEFAULT_R_REF,
        }
    }
}

/// One-sided PSD in dBm/MHz into the reference resistance.
///
/// `rbw` of the result is the window's equivalent noise bandwidth.
pub fn welch_psd<T: Scalar + FftNum>(w: &Waveform<T>, cfg: &WelchConfig) -> Result<Spectrum> {
    let n = cfg.segment_len;
    if n < 2 {
        return invalid("segment_len", "must be at least 2");
    }
    if n > w.len() {
        return invalid("segment_len", format!("{n} exceeds signal length {}", w.len()));
    }
    if !(0.0..1.0).contains(&cfg.overlap_fraction) {
        return invalid("overlap_fraction", format!("{} not in [0, 1)", cfg.overlap_fraction));
    }
    if !(cfg.r_ref > 0.0) {
        return invalid("r_ref", "reference resistance must be positive");
    }
    let fs = w.sample_rate();
    let win = cfg.window.coefficients(n);
    let win_t: Vec<T> = win.iter().map(|&c| T::lit(c)).collect();
    let s2: f64 = win.iter().map(|c| c * c).sum();
    let s1: f64 = win.iter().sum();

    let step = ((n as f64 * (1.0 - cfg.overlap_fraction)).round() as usize).max(1);
    let fft = FftPlanner::<T>::new().plan_fft_forward(n);
    let n_bins = n / 2 + 1;
    let mut acc = vec![0.0f64; n_bins];
    let mut buf = vec![Complex::new(T::zero(), T::zero()); n];
    let mut segments = 0usize;
    let x = w.samples();
    let mut start = 0;
    while start + n <= x.len() {
        for (b, (&v, &c)) in buf.iter_mut().zip(x[start..start + n].iter().zip(&win_t)) {
            *b = Complex::new(v * c, T::zero());
        }
        fft.process(&mut buf);
        for (a, c) in acc.iter_mut().zip(&buf) {
            *a += c.re.as_f64().powi(2) + c.im.as_f64().powi(2);
        }
        segments += 1;
        start += step;
    }

    // V^2/Hz -> mW/MHz
    let scale = 1e3 * 1e6 / (fs * s2 * segments as f64 * cfg.r_ref);
    let psd = acc
        .iter()
        .enumerate()
        .map(|(k, &p)| {
            let one_sided = if k == 0 || (n.is_multiple_of(2) && k == n / 2) {
                1.0
            } else {
                2.0
            };
            let lin = p * scale * one_sided;
            if lin > 0.0 {
                (10.0 * lin.log10()).max(PSD_FLOOR_DBM_PER_MHZ)
            } else {
                PSD_FLOOR_DBM_PER_MHZ
            }
        })
        .collect();
    let bin_freqs = (0..n_bins).map(|k| k as f64 * fs / n as f64).collect();
    let rbw = fs * s2 / (s1 * s1);
    Spectrum::new(bin_freqs, psd, rbw)
}

/// Total power in `[f_lo, f_hi]` by trapezoidal integration of the linear PSD,
/// with linear interpolation at the band edges.
pub fn band_power(s: &Spectrum, f_lo: f64, f_hi: f64) -> Result<f64> {
    if !(f_lo < f_hi) {
        return invalid("band", format!("f_lo {f_lo} Hz must be below f_hi {f_hi} Hz"));
    }
    let tol = 1e-9 * s.f_max();
    if f_lo < s.f_min() - tol || f_hi > s.f_max() + tol {
        return invalid(
            "band",
            format!(
                "[{f_lo}, {f_hi}] Hz outside spectrum span [{}, {}] Hz",
                s.f_min(),
                s.f_max()
            ),
        );
    }
    let f = s.bin_freqs();
    let lin: Vec<f64> = s.psd().iter().map(|d| 10f64.powf(d / 10.0)).collect();
    let df = s.bin_spacing();
    let at = |x: f64| -> f64 {
        let pos = ((x - f[0]) / df).clamp(0.0, (f.len() - 1) as f64);
        let i = (pos.floor() as usize).min(f.len() - 2);
        let frac = pos - i as f64;
        lin[i] * (1.0 - frac) + lin[i + 1] * frac
    };
    // grid points strictly inside the band
    let i_first = ((f_lo - f[0]) / df).floor() as isize + 1;
    let i_last = ((f_hi - f[0]) / df).ceil() as isize - 1;
    let mut pts: Vec<(f64, f64)> = vec![(f_lo, at(f_lo))];
    for i in i_first.max(0)..=i_last.min(f.len() as isize - 1) {
        let fi = f[i as usize];
        if fi > f_lo && fi < f_hi {
            pts.push((fi, lin[i as usize]));
        }
    }
    pts.push((f_hi, at(f_hi)));
    let mw: f64 = pts
        .windows(2)
        .map(|p| 0.5 * (p[0].1 + p[1].1) * (p[1].0 - p[0].0) * 1e-6)
        .sum();
    if mw > 0.0 {
        power_to_dbm(mw * 1e-3)
    } else {
        Ok(f64::NEG_INFINITY)
    }
}

/// Lowest and highest bin frequencies whose PSD is within `drop_db` of the
/// peak. On a line spectrum this spans every line that clears the level, not
/// just the neighbourhood of the strongest one.
pub fn occupied_band(s: &Spectrum, drop_db: f64) -> (f64, f64) {
    let psd = s.psd();
    let f = s.bin_freqs();
    let pk = psd.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let level = pk - drop_db;
    let lo = psd.iter().position(|&p| p >= level).expect("peak bin qualifies");
    let hi = psd.iter().rposition(|&p| p >= level).expect("peak bin qualifies");
    (f[lo], f[hi])
}
