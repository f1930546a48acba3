use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{invalid, Result};
use crate::waveform::Waveform;

/// Series-resonant tank: drive source, loss resistance and antenna load in series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TankParams {
    /// H
    pub l: f64,
    /// F
    pub c: f64,
    /// Ω
    pub r_loss: f64,
    /// Ω
    pub r_antenna: f64,
    /// V
    pub drive_amp: f64,
    /// Hz; `None` drives at resonance.
    pub drive_freq: Option<f64>,
}

impl Default for TankParams {
    /// 915 MHz tank with Q = 20 and the antenna share of the series resistance
    /// set for a 21.35 % steady-state efficiency.
    fn default() -> Self {
        let l: f64 = 10e-9;
        let c = 3.026e-12;
        let w0 = 1.0 / (l * c).sqrt();
        let r_total = w0 * l / 20.0;
        let r_antenna = 0.2135 * r_total;
        Self {
            l,
            c,
            r_loss: r_total - r_antenna,
            r_antenna,
            drive_amp: 0.025,
            drive_freq: None,
        }
    }
}

impl TankParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("tank.l", self.l),
            ("tank.c", self.c),
            ("tank.r_loss", self.r_loss),
            ("tank.r_antenna", self.r_antenna),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return invalid("tank parameter", format!("{name} = {v} must be positive"));
            }
        }
        if !(self.drive_amp.is_finite() && self.drive_amp >= 0.0) {
            return invalid(
                "tank parameter",
                format!("tank.drive_amp = {} must be non-negative", self.drive_amp),
            );
        }
        if let Some(f) = self.drive_freq {
            if !(f.is_finite() && f > 0.0) {
                return invalid("tank parameter", format!("tank.drive_freq = {f} must be positive"));
            }
        }
        Ok(())
    }

    pub fn omega0(&self) -> f64 {
        1.0 / (self.l * self.c).sqrt()
    }

    pub fn f0(&self) -> f64 {
        self.omega0() / (2.0 * PI)
    }

    pub fn period(&self) -> f64 {
        1.0 / self.f0()
    }

    pub fn r_total(&self) -> f64 {
        self.r_loss + self.r_antenna
    }

    pub fn q(&self) -> f64 {
        self.omega0() * self.l / self.r_total()
    }

    /// Neper frequency of the series RLC, 1/s.
    pub fn alpha(&self) -> f64 {
        self.r_total() / (2.0 * self.l)
    }

    pub fn drive_freq(&self) -> f64 {
        self.drive_freq.unwrap_or_else(|| self.f0())
    }

    /// Capacitor-voltage magnification |Vc/Vin| at the drive frequency.
    pub fn gain_at_drive(&self) -> f64 {
        let w = 2.0 * PI * self.drive_freq();
        let re = 1.0 - w * w * self.l * self.c;
        let im = w * self.r_total() * self.c;
        1.0 / (re * re + im * im).sqrt()
    }

    /// Steady-state capacitor amplitude, V.
    pub fn steady_amplitude(&self) -> f64 {
        self.drive_amp * self.gain_at_drive()
    }
}

/// Conventional on/off drive burst.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseBurstSpec {
    /// On-duration, s.
    pub t_p: f64,
}

impl PulseBurstSpec {
    pub fn new(t_p: f64) -> Result<Self> {
        if !(t_p.is_finite() && t_p > 0.0) {
            return invalid("t_p", format!("{t_p} s must be positive"));
        }
        Ok(Self { t_p })
    }
}

/// Timing imperfections of the synthesized tone.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ToneImpairments {
    /// RMS of white Gaussian timing jitter applied to the tone phase, s.
    pub jitter_rms: f64,
    pub seed: u64,
}

/// Capacitor voltage of a tank in steady state: `A sin(2π f t)` with
/// `A = drive_amp · |Vc/Vin|` and zero phase at t = 0.
pub fn tank_steady_state_wave(p: &TankParams, duration: f64, sample_rate: f64) -> Result<Waveform> {
    tank_wave_impaired(p, duration, sample_rate, &ToneImpairments::default())
}

pub fn tank_wave_impaired(p: &TankParams, duration: f64, sample_rate: f64, imp: &ToneImpairments) -> Result<Waveform> {
    p.validate()?;
    let f = p.drive_freq();
    if !(sample_rate > 10.0 * f) {
        return invalid(
            "sample_rate",
            format!("{sample_rate} Hz must exceed 10x the {f} Hz tone"),
        );
    }
    if !(duration > 0.0) {
        return invalid("duration", format!("{duration} s must be positive"));
    }
    let n = (duration * sample_rate).round().max(1.0) as usize;
    let a = p.steady_amplitude();
    let w = 2.0 * PI * f;
    if imp.jitter_rms > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(imp.seed);
        let jit = Normal::new(0.0, imp.jitter_rms).map_err(|e| crate::Error::Invalid {
            what: "jitter_rms",
            detail: e.to_string(),
        })?;
        Waveform::from_fn(n, sample_rate, 0.0, |t| a * (w * (t + jit.sample(&mut rng))).sin())
    } else {
        Waveform::from_fn(n, sample_rate, 0.0, |t| a * (w * t).sin())
    }
}

/// Normalized oscillation envelope of a tank switched on for `t_p` and then
/// left to ring down.
pub fn tank_onoff_envelope(p: &TankParams, spec: &PulseBurstSpec, t: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return invalid("t", format!("{t} s must be non-negative"));
    }
    let a = p.alpha();
    if t <= spec.t_p {
        Ok(-(-a * t).exp_m1())
    } else {
        Ok(-(-a * spec.t_p).exp_m1() * (-a * (t - spec.t_p)).exp())
    }
}
