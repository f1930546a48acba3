use crate::error::{invalid, Result};
use crate::tx::tank::{PulseBurstSpec, TankParams};
use crate::units::dbm_to_power;

/// Share of drive power reaching the antenna in steady state, percent.
pub fn steady_state_efficiency(r_loss: f64, r_antenna: f64) -> Result<f64> {
    if !(r_loss >= 0.0 && r_antenna >= 0.0) || !(r_loss + r_antenna > 0.0) {
        return invalid(
            "resistances",
            format!("r_loss = {r_loss}, r_antenna = {r_antenna}: both must be non-negative with a positive sum"),
        );
    }
    Ok(100.0 * r_antenna / (r_antenna + r_loss))
}

/// Mean of `1 - e^{-x·u}` over `u` in [0, 1]: `1 - (1 - e^{-x})/x`.
fn mean_startup_envelope(x: f64) -> f64 {
    if x < 1e-4 {
        x / 2.0 - x * x / 6.0 + x * x * x / 24.0
    } else {
        (x + (-x).exp_m1()) / x
    }
}

/// Efficiency of a burst of length `t_p`, percent: steady-state efficiency
/// weighted by the mean normalized envelope over the on-window.
pub fn transient_pulse_efficiency(p: &TankParams, spec: &PulseBurstSpec) -> Result<f64> {
    p.validate()?;
    let eta = steady_state_efficiency(p.r_loss, p.r_antenna)?;
    Ok(eta * mean_startup_envelope(p.alpha() * spec.t_p))
}

/// Burst efficiency measured on a time-stepped series RLC driven at resonance
/// from rest for `t_p`.
///
/// At each step the cycle-averaged antenna-to-source power ratio is
/// `R_A·I_env/V`, with the current envelope taken from the in-phase current
/// and the quadrature capacitor charge. The result is its average over the
/// on-window, in percent.
pub fn burst_efficiency_sampled(p: &TankParams, spec: &PulseBurstSpec, sample_rate: f64) -> Result<f64> {
    p.validate()?;
    let w0 = p.omega0();
    if !(sample_rate > 10.0 * p.f0()) {
        return invalid("sample_rate", format!("{sample_rate} Hz undersamples the tank"));
    }
    let v = if p.drive_amp > 0.0 { p.drive_amp } else { 1.0 };
    let (l, r, c) = (p.l, p.r_total(), p.c);
    let h = 1.0 / sample_rate;
    let n = (spec.t_p * sample_rate).round().max(1.0) as usize;
    // state: capacitor charge q, loop current i
    let deriv = |t: f64, q: f64, i: f64| -> (f64, f64) { (i, (v * (w0 * t).cos() - r * i - q / c) / l) };
    let (mut q, mut i) = (0.0f64, 0.0f64);
    let mut acc = 0.0;
    for k in 0..n {
        let t = k as f64 * h;
        let (k1q, k1i) = deriv(t, q, i);
        let (k2q, k2i) = deriv(t + h / 2.0, q + h / 2.0 * k1q, i + h / 2.0 * k1i);
        let (k3q, k3i) = deriv(t + h / 2.0, q + h / 2.0 * k2q, i + h / 2.0 * k2i);
        let (k4q, k4i) = deriv(t + h, q + h * k3q, i + h * k3i);
        let (q_new, i_new) = (
            q + h / 6.0 * (k1q + 2.0 * k2q + 2.0 * k3q + k4q),
            i + h / 6.0 * (k1i + 2.0 * k2i + 2.0 * k3i + k4i),
        );
        // trapezoid over the step
        let env0 = (i * i + (w0 * q) * (w0 * q)).sqrt();
        let env1 = (i_new * i_new + (w0 * q_new) * (w0 * q_new)).sqrt();
        acc += 0.5 * (env0 + env1);
        q = q_new;
        i = i_new;
    }
    let mean_env = acc / n as f64;
    Ok(100.0 * p.r_antenna * mean_env / v)
}

/// Measured output power over DC draw, percent.
pub fn chip_efficiency(p_out_dbm: f64, p_dc_mw: f64) -> Result<f64> {
    if !(p_dc_mw > 0.0) {
        return invalid("p_dc", format!("{p_dc_mw} mW must be positive"));
    }
    Ok(100.0 * dbm_to_power(p_out_dbm) * 1e3 / p_dc_mw)
}

/// Energy per bit in pJ.
pub fn energy_per_bit(p_dc_mw: f64, rate: f64) -> Result<f64> {
    if !(rate > 0.0) {
        return invalid("rate", format!("{rate} b/s must be positive"));
    }
    Ok(p_dc_mw * 1e-3 / rate * 1e12)
}
