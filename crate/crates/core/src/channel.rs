//! Over-the-air path: antenna band limits, Friis loss with one calibrated
//! gain term, and white receiver noise.

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{invalid, Result};
use crate::filter::band_limit;
use crate::units::{db_to_ratio, dbm_to_power, power_to_dbm};
use crate::waveform::Waveform;

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelConfig {
    /// m
    pub distance: f64,
    /// Frequency at which the path loss is evaluated, Hz.
    pub center_freq: f64,
    pub tx_band: (f64, f64),
    pub rx_band: (f64, f64),
    /// Combined antenna gains and mismatch, dB.
    pub gain_cal: f64,
    /// dBm/Hz; `-inf` disables noise.
    pub noise_density: f64,
    /// Cap on the noise integration bandwidth, Hz.
    pub analysis_bw: f64,
    /// Ω
    pub r_ref: f64,
    pub rng_seed: u64,
}

impl Default for ChannelConfig {
    fn default() -> Self {
        Self {
            distance: 1.0,
            center_freq: 4e9,
            tx_band: (3.3e9, 8e9),
            rx_band: (2.4e9, 8e9),
            gain_cal: -13.5,
            noise_density: -161.8,
            analysis_bw: 1.5e9,
            r_ref: 50.0,
            rng_seed: 1,
        }
    }
}

impl ChannelConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.distance > 0.0 && self.distance.is_finite()) {
            return invalid("channel.distance", format!("{} m must be positive", self.distance));
        }
        if !(self.center_freq > 0.0) {
            return invalid(
                "channel.center_freq",
                format!("{} Hz must be positive", self.center_freq),
            );
        }
        for (name, (lo, hi)) in [("channel.tx_band", self.tx_band), ("channel.rx_band", self.rx_band)] {
            if !(0.0 < lo && lo < hi && hi.is_finite()) {
                return invalid("band", format!("{name} = ({lo}, {hi}) Hz must satisfy 0 < lo < hi"));
            }
        }
        if self.noise_density.is_nan() || self.noise_density == f64::INFINITY {
            return invalid("channel.noise_density", format!("{} dBm/Hz", self.noise_density));
        }
        if !self.gain_cal.is_finite() {
            return invalid("channel.gain_cal", format!("{} dB must be finite", self.gain_cal));
        }
        if !(self.analysis_bw > 0.0) || !(self.r_ref > 0.0) {
            return invalid("channel", "analysis_bw and r_ref must be positive");
        }
        Ok(())
    }

    /// Noise integration bandwidth: RX band width capped at `analysis_bw`.
    pub fn noise_bandwidth(&self) -> f64 {
        (self.rx_band.1 - self.rx_band.0).min(self.analysis_bw)
    }

    /// Net voltage gain from TX port to RX port at band center.
    pub fn path_gain(&self) -> Result<f64> {
        let loss = free_space_path_loss(self.distance, self.center_freq)?;
        Ok(db_to_ratio(self.gain_cal - loss).sqrt())
    }
}

/// Friis free-space loss, dB.
pub fn free_space_path_loss(d: f64, f: f64) -> Result<f64> {
    if !(d > 0.0 && f > 0.0) {
        return invalid(
            "path loss",
            format!("distance {d} m and frequency {f} Hz must be positive"),
        );
    }
    Ok(20.0 * (4.0 * PI * d * f / SPEED_OF_LIGHT).log10())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Budget {
    /// dBm
    pub rx_power: f64,
    /// dBm
    pub noise_floor: f64,
    /// dB
    pub snr: f64,
}

pub fn rx_power_budget(p_out_dbm: f64, cfg: &ChannelConfig) -> Result<Budget> {
    cfg.validate()?;
    let rx_power = p_out_dbm - free_space_path_loss(cfg.distance, cfg.center_freq)? + cfg.gain_cal;
    let noise_floor = cfg.noise_density + 10.0 * cfg.noise_bandwidth().log10();
    Ok(Budget {
        rx_power,
        noise_floor,
        snr: rx_power - noise_floor,
    })
}

/// Per-sample standard deviation of white noise at `density` dBm/Hz into
/// `r_ref`, sampled at `fs`.
pub fn noise_sigma(density_dbm_hz: f64, r_ref: f64, fs: f64) -> f64 {
    if density_dbm_hz == f64::NEG_INFINITY {
        return 0.0;
    }
    (dbm_to_power(density_dbm_hz) * r_ref * fs / 2.0).sqrt()
}

/// Seeded generator for Monte Carlo trial `stream` of `seed`.
pub fn trial_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Adds white Gaussian noise of the configured density using `rng`.
pub fn add_noise(w: &Waveform, cfg: &ChannelConfig, rng: &mut ChaCha8Rng) -> Result<Waveform> {
    let sigma = noise_sigma(cfg.noise_density, cfg.r_ref, w.sample_rate());
    if sigma == 0.0 {
        return Ok(w.clone());
    }
    w.map(|v| {
        let z: f64 = StandardNormal.sample(rng);
        v + sigma * z
    })
}

/// Noiseless part of the channel: TX band, flat path gain, RX band.
pub fn propagate(w: &Waveform, cfg: &ChannelConfig) -> Result<Waveform> {
    cfg.validate()?;
    let fs = w.sample_rate();
    if fs < 2.0 * cfg.rx_band.1 || fs < 2.0 * cfg.tx_band.1 {
        return invalid(
            "sample_rate",
            format!(
                "{fs} Hz cannot carry the {} Hz band edge",
                cfg.rx_band.1.max(cfg.tx_band.1)
            ),
        );
    }
    let tx = band_limit(w, cfg.tx_band.0, cfg.tx_band.1)?;
    let g = cfg.path_gain()?;
    band_limit(&tx.scaled(g), cfg.rx_band.0, cfg.rx_band.1)
}

/// TX output power referred through both antenna band responses at unit
/// path gain, dBm. The budget's `p_out` is defined at this plane, so the
/// band edges shape the spectrum while `gain_cal` alone sets the level.
pub fn referred_output_power(w: &Waveform, cfg: &ChannelConfig) -> Result<f64> {
    cfg.validate()?;
    let tx = band_limit(w, cfg.tx_band.0, cfg.tx_band.1)?;
    let both = band_limit(&tx, cfg.rx_band.0, cfg.rx_band.1)?;
    power_to_dbm(both.mean_power(cfg.r_ref))
}

/// Full channel with noise drawn from stream 0 of `rng_seed`.
pub fn apply_channel(w: &Waveform, cfg: &ChannelConfig) -> Result<Waveform> {
    apply_channel_trial(w, cfg, 0)
}

pub fn apply_channel_trial(w: &Waveform, cfg: &ChannelConfig, stream: u64) -> Result<Waveform> {
    let clean = propagate(w, cfg)?;
    add_noise(&clean, cfg, &mut trial_rng(cfg.rng_seed, stream))
}
