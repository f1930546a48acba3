//! Inductive power link: two-coil efficiency, rectifier, slow detuning
//! regulation with a hard limiter, and the synthesizer-free design rules.

use std::f64::consts::PI;

use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerLinkParams {
    /// Hz
    pub f_link: f64,
    pub k: f64,
    pub q_tx: f64,
    pub q_rx: f64,
    /// Received peak voltage with the RX tank tuned to `f_link`, V.
    pub v_source: f64,
    /// V
    pub diode_drop: f64,
    /// F
    pub c_filter: f64,
    /// V
    pub v_target: f64,
    /// F/(V·s)
    pub detune_gain: f64,
    /// RX coil inductance, H.
    pub l_rx: f64,
    /// Smallest tuning capacitance as a fraction of the resonant value.
    pub c_min_ratio: f64,
}

impl Default for PowerLinkParams {
    /// Coupling and coil quality factors fitted to 28 % at 4 mA and 40 % at 10 mA.
    fn default() -> Self {
        Self {
            f_link: 1.5e6,
            k: 0.031_908_7,
            q_tx: 50.0,
            q_rx: 25.0,
            v_source: 6.0,
            diode_drop: 0.4,
            c_filter: 10e-6,
            v_target: 5.0,
            detune_gain: 1e-9,
            l_rx: 3.315_728e-3,
            c_min_ratio: 0.5,
        }
    }
}

/// Limiter clamp relative to `v_target`.
pub const LIMITER_RATIO: f64 = 1.15;

impl PowerLinkParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("power_link.f_link", self.f_link),
            ("power_link.k", self.k),
            ("power_link.q_tx", self.q_tx),
            ("power_link.q_rx", self.q_rx),
            ("power_link.v_source", self.v_source),
            ("power_link.diode_drop", self.diode_drop),
            ("power_link.c_filter", self.c_filter),
            ("power_link.v_target", self.v_target),
            ("power_link.detune_gain", self.detune_gain),
            ("power_link.l_rx", self.l_rx),
            ("power_link.c_min_ratio", self.c_min_ratio),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return invalid("power link", format!("{name} = {v} must be positive"));
            }
        }
        if self.k >= 1.0 {
            return invalid("power_link.k", format!("{} must be below 1", self.k));
        }
        if self.c_min_ratio >= 1.0 {
            return invalid("power_link.c_min_ratio", "must be below 1");
        }
        Ok(())
    }

    pub fn omega(&self) -> f64 {
        2.0 * PI * self.f_link
    }

    /// Tuning capacitance resonating `l_rx` at `f_link`, F.
    pub fn c_resonant(&self) -> f64 {
        1.0 / (self.omega() * self.omega() * self.l_rx)
    }

    /// Load damping expressed as a quality factor: `ω L_rx / R_L` with
    /// `R_L = v_target / i_load`. Heavier loads give larger values.
    pub fn load_q(&self, i_load: f64) -> f64 {
        self.omega() * self.l_rx * i_load / self.v_target
    }

    pub fn limiter_level(&self) -> f64 {
        LIMITER_RATIO * self.v_target
    }
}

/// Two-coil resonant link efficiency, percent.
pub fn link_efficiency(p: &PowerLinkParams, i_load: f64) -> Result<f64> {
    if !(i_load > 0.0) {
        return invalid("i_load", format!("{i_load} A must be positive"));
    }
    p.validate()?;
    let f = p.k * p.k * p.q_tx * p.q_rx;
    let q_l = p.load_q(i_load);
    Ok(100.0 * f / (1.0 + f) * q_l / (p.q_rx + q_l))
}

/// Solves `q_rx` and `k` so that `link_efficiency` passes through two
/// (load current, percent) points, keeping the other fields of `base`.
pub fn fit_link(base: &PowerLinkParams, a: (f64, f64), b: (f64, f64)) -> Result<PowerLinkParams> {
    let ((i1, e1), (i2, e2)) = (a, b);
    if !(i1 > 0.0 && i2 > i1 && e1 > 0.0 && e2 > e1 && e2 < 100.0) {
        return invalid("fit targets", "need 0 < i1 < i2 with 0 < η1 < η2 < 100 %");
    }
    let m = i2 / i1;
    let r = e2 / e1;
    if r >= m {
        return invalid("fit targets", "efficiency cannot grow faster than load current");
    }
    // with x = q_L(i1)/q_rx: m(1+x)/(1+mx) = r
    let x = (m - r) / (m * (r - 1.0));
    let coupled = e1 / 100.0 * (1.0 + x) / x;
    if !(coupled < 1.0) {
        return invalid("fit targets", "no coupling reaches the requested efficiency");
    }
    let mut p = *base;
    p.q_rx = p.load_q(i1) / x;
    p.k = (coupled / (1.0 - coupled) / (p.q_tx * p.q_rx)).sqrt();
    p.validate()?;
    Ok(p)
}

/// Quasi-static dual-halfwave rectifier: `(v_dc, ripple)`.
pub fn rectifier_output(v_peak: f64, p: &PowerLinkParams, i_load: f64) -> Result<(f64, f64)> {
    if !(v_peak > p.diode_drop) {
        return invalid(
            "rectifier",
            format!("peak {v_peak} V does not exceed the {} V diode drop", p.diode_drop),
        );
    }
    if !(i_load >= 0.0) {
        return invalid("i_load", format!("{i_load} A must be non-negative"));
    }
    Ok((v_peak - p.diode_drop, i_load / (2.0 * p.f_link * p.c_filter)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegulatorState {
    /// F
    pub c_tune: f64,
    /// V
    pub v_rect: f64,
    pub limiter_active: bool,
}

/// Received amplitude factor of an RX tank tuned with `c_tune`.
pub fn detune_attenuation(p: &PowerLinkParams, c_tune: f64) -> f64 {
    let delta = (p.c_resonant() / c_tune).sqrt() - 1.0;
    1.0 / (1.0 + (2.0 * p.q_rx * delta).powi(2)).sqrt()
}

/// Rectified voltage for a tuning setting: `(v_rect, limiter_active)`.
pub fn rectified_at(p: &PowerLinkParams, c_tune: f64) -> (f64, bool) {
    let v = (p.v_source * detune_attenuation(p, c_tune) - p.diode_drop).max(0.0);
    let lim = p.limiter_level();
    if v > lim {
        (lim, true)
    } else {
        (v, false)
    }
}

impl RegulatorState {
    /// Tank tuned to resonance, rectifier settled.
    pub fn tuned(p: &PowerLinkParams) -> Self {
        Self::at(p, p.c_resonant())
    }

    pub fn at(p: &PowerLinkParams, c_tune: f64) -> Self {
        let (v_rect, limiter_active) = rectified_at(p, c_tune);
        Self {
            c_tune,
            v_rect,
            limiter_active,
        }
    }
}

pub fn detune_step(s: &RegulatorState, p: &PowerLinkParams, dt: f64) -> Result<RegulatorState> {
    if !(dt > 0.0) {
        return invalid("dt", format!("{dt} s must be positive"));
    }
    let c_max = p.c_resonant();
    let c_min = p.c_min_ratio * c_max;
    let c_tune = (s.c_tune - p.detune_gain * (s.v_rect - p.v_target) * dt).clamp(c_min, c_max);
    Ok(RegulatorState::at(p, c_tune))
}

/// Small-signal regulation time constant around `c_tune`, s.
pub fn regulation_time_constant(p: &PowerLinkParams, c_tune: f64) -> f64 {
    let h = 1e-6 * c_tune;
    let v = |c: f64| p.v_source * detune_attenuation(p, c);
    let slope = (v(c_tune + h) - v(c_tune - h)) / (2.0 * h);
    1.0 / (p.detune_gain * slope.abs())
}

/// Quality factor needed to keep the pulse rise behaviour when the tank
/// frequency drops from `f_ref` to `f_target`.
pub fn vco_free_required_q(f_target: f64, f_ref: f64, q_ref: f64) -> Result<f64> {
    if !(f_target > 0.0 && f_ref > 0.0 && q_ref > 0.0) {
        return invalid("vco-free q", "frequencies and q_ref must be positive");
    }
    Ok(q_ref * f_ref / f_target)
}

/// One OOK bit per clip event, two clip events per carrier period.
pub fn vco_free_max_rate(f_power: f64) -> Result<f64> {
    if !(f_power > 0.0) {
        return invalid("f_power", format!("{f_power} Hz must be positive"));
    }
    Ok(2.0 * f_power)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fit_rejects_impossible_targets() {
        let p = PowerLinkParams::default();
        assert!(fit_link(&p, (4e-3, 40.0), (10e-3, 28.0)).is_err());
        assert!(fit_link(&p, (4e-3, 10.0), (10e-3, 30.0)).is_err());
    }

    #[test]
    fn tuned_state_is_resonant() {
        let p = PowerLinkParams::default();
        assert!((detune_attenuation(&p, p.c_resonant()) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rectifier_needs_conduction() {
        let p = PowerLinkParams::default();
        assert!(rectifier_output(0.4, &p, 1e-3).is_err());
    }
}
