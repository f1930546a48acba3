use crate::error::{invalid, Result};
use crate::scalar::Scalar;
use crate::waveform::Waveform;

/// Times of narrow excursions: runs where `|v| ≥ threshold` that last no
/// longer than `max_width`. Each run reports the time of its largest sample.
/// Runs touching either end of the record are ignored.
pub fn detect_pulses<T: Scalar>(w: &Waveform<T>, threshold: f64, max_width: f64) -> Result<Vec<f64>> {
    if !(threshold > 0.0) {
        return invalid("pulse threshold", format!("{threshold} V must be positive"));
    }
    if !(max_width > 0.0) {
        return invalid("pulse max_width", format!("{max_width} s must be positive"));
    }
    let x = w.samples();
    let max_len = (max_width * w.sample_rate()).floor() as usize;
    let mut out = Vec::new();
    let mut i = 0;
    while i < x.len() {
        if x[i].as_f64().abs() < threshold {
            i += 1;
            continue;
        }
        let start = i;
        let mut best = start;
        while i < x.len() && x[i].as_f64().abs() >= threshold {
            if x[i].as_f64().abs() > x[best].as_f64().abs() {
                best = i;
            }
            i += 1;
        }
        if start > 0 && i < x.len() && i - start <= max_len {
            out.push(w.time(best));
        }
    }
    Ok(out)
}

/// Pulse rate from the mean spacing of detected pulses, Hz. Needs at least two.
pub fn pulse_rate(times: &[f64]) -> Option<f64> {
    match times {
        [first, .., last] if last > first => Some((times.len() - 1) as f64 / (last - first)),
        _ => None,
    }
}
