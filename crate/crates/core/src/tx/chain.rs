use std::f64::consts::PI;

use crate::error::{invalid, Result};
use crate::tx::clip::{antenna_couple, clip_waveform, ook_gate, ClipperConfig};
use crate::tx::tank::{tank_wave_impaired, TankParams, ToneImpairments};
use crate::waveform::{BitStream, Waveform};

/// Additive tone leaking from the synthesizer into the radiated signal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Spur {
    /// Hz; `None` puts it on the tank frequency.
    pub freq: Option<f64>,
    /// Power into the reference load, dBm.
    pub power_dbm: f64,
    pub r_ref: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TxConfig {
    pub tank: TankParams,
    pub clipper: ClipperConfig,
    /// Antenna coupling corner, Hz.
    pub hp_corner: f64,
    /// Linear voltage gain from the coupling node to the TX port.
    pub output_scale: f64,
    pub spur: Option<Spur>,
    pub impairments: ToneImpairments,
}

impl Default for TxConfig {
    fn default() -> Self {
        Self {
            tank: TankParams::default(),
            clipper: ClipperConfig::default(),
            hp_corner: 2e9,
            output_scale: 1.0,
            spur: None,
            impairments: ToneImpairments::default(),
        }
    }
}

impl TxConfig {
    pub fn validate(&self) -> Result<()> {
        self.tank.validate()?;
        self.clipper.validate()?;
        if !(self.hp_corner > 0.0) {
            return invalid("tx.hp_corner", format!("{} Hz must be positive", self.hp_corner));
        }
        if !(self.output_scale > 0.0 && self.output_scale.is_finite()) {
            return invalid("tx.output_scale", format!("{} must be positive", self.output_scale));
        }
        if self.tank.steady_amplitude() + self.clipper.v_mid > self.clipper.dac_fullscale * 2.0 {
            return invalid("tank drive", "tank swing far exceeds the clipper supply");
        }
        Ok(())
    }
}

/// Every named node of one transmission.
#[derive(Debug, Clone, PartialEq)]
pub struct TxStages {
    /// Tank node, biased at `v_mid`.
    pub v_c: Waveform,
    /// Unit-amplitude PA output, a quarter period ahead of the tank node.
    pub v1: Waveform,
    /// Clipped tank node.
    pub v2: Waveform,
    /// After the OOK switch.
    pub gated: Waveform,
    /// Radiated pulse train at the TX port.
    pub v3: Waveform,
}

/// Unit-amplitude PA output `cos(ω t)` used as the DLL reference.
pub fn pa_output(tank: &TankParams, duration: f64, sample_rate: f64) -> Result<Waveform> {
    let w = 2.0 * PI * tank.drive_freq();
    let n = (duration * sample_rate).round().max(1.0) as usize;
    Waveform::from_fn(n, sample_rate, 0.0, |t| (w * t).cos())
}

/// Runs tank → clip → OOK gate → antenna coupling for `bits` switched at
/// `edges`, over `duration` at `sample_rate`.
pub fn transmit(cfg: &TxConfig, bits: &BitStream, edges: &[f64], duration: f64, sample_rate: f64) -> Result<TxStages> {
    cfg.validate()?;
    let clipper = cfg.clipper.quantized()?;
    let tone = tank_wave_impaired(&cfg.tank, duration, sample_rate, &cfg.impairments)?;
    let v_c = tone.map(|v| v + clipper.v_mid)?;
    let v1 = pa_output(&cfg.tank, duration, sample_rate)?;
    let v2 = clip_waveform(&v_c, &clipper)?;
    let gated = ook_gate(&v2, bits, &clipper, edges)?;
    let mut v3 = antenna_couple(&gated, cfg.hp_corner)?.scaled(cfg.output_scale);
    if let Some(sp) = cfg.spur {
        let f = sp.freq.unwrap_or_else(|| cfg.tank.drive_freq());
        let amp = (2.0 * sp.r_ref * crate::units::dbm_to_power(sp.power_dbm)).sqrt();
        let tone = Waveform::from_fn(v3.len(), sample_rate, 0.0, |t| amp * (2.0 * PI * f * t).sin())?;
        v3 = v3.add(&tone)?;
    }
    Ok(TxStages { v_c, v1, v2, gated, v3 })
}
