use std::f64::consts::PI;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use uwb_core::filter::{filter_first_order, FilterMode};
use uwb_core::prbs::prbs_generate;
use uwb_core::psd::{band_power, welch_psd, WelchConfig, Window, PSD_FLOOR_DBM_PER_MHZ};
use uwb_core::units::{dbm_to_power, power_to_dbm};
use uwb_core::{Spectrum, Waveform, Waveform32};

/// Shift register kept as one cell per stage, taps read off the polynomial.
fn lfsr_oracle(poly: &[usize], order: usize, seed: u32, n: usize) -> Vec<bool> {
    let mut cells: Vec<bool> = (0..order).map(|i| (seed >> i) & 1 == 1).collect();
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        out.push(cells[order - 1]);
        let fb = poly.iter().fold(false, |acc, &stage| acc ^ cells[stage - 1]);
        for i in (1..order).rev() {
            cells[i] = cells[i - 1];
        }
        cells[0] = fb;
    }
    out
}

fn tone(fs: f64, f: f64, p_dbm: f64, n: usize) -> Waveform {
    let a = (2.0 * 50.0 * dbm_to_power(p_dbm)).sqrt();
    Waveform::from_fn(n, fs, 0.0, |t| a * (2.0 * PI * f * t).sin()).unwrap()
}

#[test]
fn prbs15_has_full_period() {
    let n = 32767;
    let bits = prbs_generate(15, 1, 2 * n).unwrap();
    assert_eq!(bits[..n], bits[n..]);
    for p in 1..n {
        if n % p == 0 {
            assert_ne!(bits[..n - p], bits[p..n], "shorter period {p}");
        }
    }
}

#[test]
fn prbs15_is_balanced() {
    let bits = prbs_generate(15, 1, 32767).unwrap();
    let ones = bits.iter().filter(|b| **b).count();
    assert_eq!((ones, bits.len() - ones), (16384, 16383));
}

#[test]
fn prbs7_matches_cellwise_register() {
    let got = prbs_generate(7, 0x5A, 127).unwrap();
    assert_eq!(got, lfsr_oracle(&[7, 6], 7, 0x5A, 127));
}

#[test]
fn welch_single_tone_power() {
    let w = tone(80e9, 4e9, 0.0, 1 << 16);
    let s = welch_psd(&w, &WelchConfig::new(8192, 0.5, Window::Hann)).unwrap();
    let p = band_power(&s, 3.9e9, 4.1e9).unwrap();
    assert!(p.abs() < 0.1, "{p} dBm");
}

#[test]
fn welch_zero_signal_sits_on_floor() {
    let w = Waveform::<f64>::zeros(4096, 80e9, 0.0).unwrap();
    let s = welch_psd(&w, &WelchConfig::new(1024, 0.5, Window::Hann)).unwrap();
    assert!(s.psd().iter().all(|&p| p == PSD_FLOOR_DBM_PER_MHZ));
}

#[test]
fn welch_white_noise_parseval() {
    let fs = 80e9;
    let sigma: f64 = 0.01;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let nd = Normal::new(0.0, sigma).unwrap();
    let w = Waveform::from_fn(1024 * 100, fs, 0.0, |_| nd.sample(&mut rng)).unwrap();
    let s = welch_psd(&w, &WelchConfig::new(1024, 0.0, Window::Hann)).unwrap();
    let expect_dbm = 10.0 * (sigma * sigma / 50.0 * 1e3).log10();
    let got = band_power(&s, 0.0, fs / 2.0).unwrap();
    let ratio = 10f64.powf((got - expect_dbm) / 10.0);
    assert!((ratio - 1.0).abs() < 0.05, "ratio {ratio}");
    // flat: both halves of the band carry the same density
    let lo = band_power(&s, 1e9, 19e9).unwrap();
    let hi = band_power(&s, 21e9, 39e9).unwrap();
    assert!((lo - hi).abs() < 0.5, "{lo} vs {hi}");
}

#[test]
fn flat_density_over_receiver_bandwidth() {
    let dens_dbm_hz = -161.8;
    let df = 1e6;
    let n = 3001;
    let freqs: Vec<f64> = (0..n).map(|k| k as f64 * df).collect();
    let psd = vec![dens_dbm_hz + 60.0; n];
    let s = Spectrum::new(freqs, psd, df).unwrap();
    let got = band_power(&s, 0.5e9, 2.0e9).unwrap();
    let expect = dens_dbm_hz + 10.0 * 1.5e9f64.log10();
    assert!((got - expect).abs() < 0.05);
    assert!((got + 70.0).abs() < 0.05);
}

#[test]
fn band_power_is_additive() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let nd = Normal::new(0.0, 0.02).unwrap();
    let w = Waveform::from_fn(1 << 15, 20e9, 0.0, |_| nd.sample(&mut rng)).unwrap();
    let s = welch_psd(&w, &WelchConfig::new(2048, 0.5, Window::Hann)).unwrap();
    let mw = |d: f64| 10f64.powf(d / 10.0);
    let a = band_power(&s, 1e9, 3.3e9).unwrap();
    let b = band_power(&s, 3.3e9, 7e9).unwrap();
    let full = band_power(&s, 1e9, 7e9).unwrap();
    let sum = 10.0 * (mw(a) + mw(b)).log10();
    assert!((sum - full).abs() < 0.01);
}

#[test]
fn band_outside_span_is_rejected() {
    let w = tone(20e9, 4e9, 0.0, 4096);
    let s = welch_psd(&w, &WelchConfig::new(1024, 0.5, Window::Hann)).unwrap();
    assert!(band_power(&s, 9e9, 11e9).is_err());
    assert!(band_power(&s, 4e9, 4e9).is_err());
}

#[test]
fn lowpass_settles_to_dc_gain() {
    let fs = 80e9;
    let fc = 1e9;
    let tau = 1.0 / (2.0 * PI * fc);
    let n = (5.0 * tau * fs).ceil() as usize + 1;
    let w = Waveform::new(vec![1.0f64; n], fs, 0.0).unwrap();
    let y = filter_first_order(&w, FilterMode::Lowpass, fc, 0.5).unwrap();
    let last = *y.samples().last().unwrap();
    assert!((last - 0.5).abs() <= 0.5 * (-5.0f64).exp() * 1.05, "{last}");
}

#[test]
fn highpass_settles_to_zero_on_constant() {
    let fs = 80e9;
    let fc = 1e9;
    let n = (5.0 / (2.0 * PI * fc) * fs).ceil() as usize + 1;
    let w = Waveform::new(vec![1.0f64; n], fs, 0.0).unwrap();
    let y = filter_first_order(&w, FilterMode::Highpass, fc, 1.0).unwrap();
    assert!(y.samples().last().unwrap().abs() < (-5.0f64).exp() * 1.05);
}

#[test]
fn highpass_gain_at_corner() {
    let fs = 80e9;
    let fc = 2e9;
    let w = Waveform::from_fn(80_000, fs, 0.0, |t| (2.0 * PI * fc * t).sin()).unwrap();
    let y = filter_first_order(&w, FilterMode::Highpass, fc, 1.0).unwrap();
    let tail = &y.samples()[40_000..];
    let amp = tail.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let g = amp / (0.5f64).sqrt();
    assert!((g - 1.0).abs() < 0.02, "gain {amp}");
}

#[test]
fn corner_at_nyquist_is_rejected() {
    let w = Waveform::new(vec![0.0; 8], 10e9, 0.0).unwrap();
    assert!(filter_first_order(&w, FilterMode::Lowpass, 5e9, 1.0).is_err());
    assert!(filter_first_order(&w, FilterMode::Lowpass, 0.0, 1.0).is_err());
}

#[test]
fn dbm_conversions() {
    assert_eq!(power_to_dbm(1e-3).unwrap(), 0.0);
    assert!((dbm_to_power(-1.0) * 1e3 - 0.794).abs() < 0.001);
    assert!((dbm_to_power(-1.0) - 10f64.powf(-0.1) * 1e-3).abs() < 1e-15);
    assert!(power_to_dbm(0.0).is_err());
    assert!(power_to_dbm(-1.0).is_err());
}

#[test]
fn single_precision_waveforms_track_double() {
    let w64 = tone(80e9, 4e9, 0.0, 1 << 14);
    let w32: Waveform32 = Waveform::new(w64.samples().iter().map(|&v| v as f32).collect(), 80e9, 0.0).unwrap();
    let cfg = WelchConfig::new(4096, 0.5, Window::Hann);
    let p64 = band_power(&welch_psd(&w64, &cfg).unwrap(), 3.9e9, 4.1e9).unwrap();
    let p32 = band_power(&welch_psd(&w32, &cfg).unwrap(), 3.9e9, 4.1e9).unwrap();
    assert!((p64 - p32).abs() < 1e-3);
    let y64 = filter_first_order(&w64, FilterMode::Highpass, 2e9, 1.0).unwrap();
    let y32 = filter_first_order(&w32, FilterMode::Highpass, 2e9, 1.0).unwrap();
    for (a, b) in y64.samples().iter().zip(y32.samples()) {
        assert!((a - *b as f64).abs() < 1e-5);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn prbs_is_deterministic(order in 2u32..=31, seed in 1u32.., n in 1usize..2000) {
        let seed = seed | 1;
        prop_assert_eq!(prbs_generate(order, seed, n).unwrap(), prbs_generate(order, seed, n).unwrap());
    }

    #[test]
    fn tone_power_is_calibrated(f_ghz in 1.0f64..30.0, p_dbm in -40.0f64..10.0) {
        let w = tone(80e9, f_ghz * 1e9, p_dbm, 1 << 15);
        let s = welch_psd(&w, &WelchConfig::new(4096, 0.5, Window::Hann)).unwrap();
        let r = 5.0 * s.rbw();
        let got = band_power(&s, f_ghz * 1e9 - r, f_ghz * 1e9 + r).unwrap();
        prop_assert!((got - p_dbm).abs() < 0.2, "{} vs {}", got, p_dbm);
    }

    #[test]
    fn first_order_filters_are_linear(
        x1 in prop::collection::vec(-1.0f64..1.0, 64),
        x2 in prop::collection::vec(-1.0f64..1.0, 64),
        a in -3.0f64..3.0,
        b in -3.0f64..3.0,
        corner in 0.1e9f64..9e9,
        high in any::<bool>(),
    ) {
        let mode = if high { FilterMode::Highpass } else { FilterMode::Lowpass };
        let fs = 20e9;
        let w1 = Waveform::new(x1.clone(), fs, 0.0).unwrap();
        let w2 = Waveform::new(x2.clone(), fs, 0.0).unwrap();
        let mix = Waveform::new(x1.iter().zip(&x2).map(|(p, q)| a * p + b * q).collect(), fs, 0.0).unwrap();
        let y1 = filter_first_order(&w1, mode, corner, 0.7).unwrap();
        let y2 = filter_first_order(&w2, mode, corner, 0.7).unwrap();
        let ym = filter_first_order(&mix, mode, corner, 0.7).unwrap();
        for i in 0..64 {
            let lin = a * y1.samples()[i] + b * y2.samples()[i];
            let scale = lin.abs().max(ym.samples()[i].abs()).max(1e-12);
            prop_assert!((lin - ym.samples()[i]).abs() <= 1e-9 * scale.max(1.0));
        }
    }

    #[test]
    fn dbm_round_trip(p in 1e-15f64..10.0) {
        let back = dbm_to_power(power_to_dbm(p).unwrap());
        prop_assert!((back / p - 1.0).abs() < 1e-12);
    }
}
