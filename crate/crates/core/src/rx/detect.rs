use crate::error::{invalid, Result};
use crate::waveform::{BitStream, Waveform};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionConfig {
    /// Longest excursion that still counts as a notch, s.
    pub notch_width_max: f64,
    /// V
    pub trigger_level: f64,
    /// Capture length, also the trigger hold-off, s.
    pub segment_len: f64,
    /// Spacing of the three correlated samples, s.
    pub cds_spacing: f64,
    /// V
    pub slope_threshold: f64,
}

impl DetectionConfig {
    /// Levels set from the per-sample noise deviation: trigger at 6σ, slope at 3σ.
    pub fn for_noise(sigma: f64) -> Self {
        Self {
            notch_width_max: 500e-12,
            trigger_level: 6.0 * sigma,
            segment_len: 10e-9,
            cds_spacing: 100e-12,
            slope_threshold: 3.0 * sigma,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("detection.notch_width_max", self.notch_width_max),
            ("detection.trigger_level", self.trigger_level),
            ("detection.segment_len", self.segment_len),
            ("detection.cds_spacing", self.cds_spacing),
            ("detection.slope_threshold", self.slope_threshold),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return invalid("detection", format!("{name} = {v} must be positive"));
            }
        }
        if !(2.0 * self.cds_spacing < self.segment_len) {
            return invalid("detection", "two CDS spacings must fit in a segment");
        }
        Ok(())
    }
}

/// Start times of excursions beyond ±`trigger_level` that return within
/// `notch_width_max`. After a trigger, nothing fires for `segment_len`.
pub fn notch_triggers(w: &Waveform, cfg: &DetectionConfig) -> Result<Vec<f64>> {
    cfg.validate()?;
    if w.dt() > cfg.cds_spacing / 4.0 {
        return invalid(
            "sample_rate",
            format!(
                "{} Hz is too coarse for {} s CDS spacing",
                w.sample_rate(),
                cfg.cds_spacing
            ),
        );
    }
    let x = w.samples();
    let lvl = cfg.trigger_level;
    let max_len = (cfg.notch_width_max * w.sample_rate()).floor() as usize;
    let mut out = Vec::new();
    let mut armed_at = f64::NEG_INFINITY;
    let mut i = 1;
    while i < x.len() {
        if x[i].abs() >= lvl && x[i - 1].abs() < lvl {
            let start = i;
            while i < x.len() && x[i].abs() >= lvl {
                i += 1;
            }
            let t = w.time(start);
            if i < x.len() && i - start <= max_len && t >= armed_at {
                out.push(t);
                armed_at = t + cfg.segment_len;
            }
        } else {
            i += 1;
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    /// Trigger time the segment is centred on, s.
    pub timestamp: f64,
    pub samples: Vec<f64>,
    pub sample_rate: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Capture {
    pub segments: Vec<Segment>,
    /// Triggers too close to either end of the record.
    pub dropped: usize,
}

/// Cuts a `segment_len` window centred on every trigger.
pub fn capture_segments(w: &Waveform, triggers: &[f64], cfg: &DetectionConfig) -> Result<Capture> {
    cfg.validate()?;
    let n = (cfg.segment_len * w.sample_rate()).round() as usize;
    let half = n / 2;
    let mut segments = Vec::with_capacity(triggers.len());
    let mut dropped = 0;
    for &t in triggers {
        let k = ((t - w.t0()) * w.sample_rate()).round();
        if k < half as f64 || k as usize + (n - half) > w.len() {
            dropped += 1;
            continue;
        }
        let i0 = k as usize - half;
        segments.push(Segment {
            timestamp: t,
            samples: w.samples()[i0..i0 + n].to_vec(),
            sample_rate: w.sample_rate(),
        });
    }
    Ok(Capture { segments, dropped })
}

/// Three-sample slope test around the segment maximum.
///
/// `t0` sits one CDS spacing before the peak; the peak is searched only where
/// the whole triple fits. EDGE1 is a rise of at least the threshold over the
/// first spacing, EDGE2 the same over the second. A pulse is EDGE1 and not EDGE2.
pub fn cds_detect(seg: &Segment, cfg: &DetectionConfig) -> Result<bool> {
    let k = (cfg.cds_spacing * seg.sample_rate).round() as usize;
    if k == 0 || seg.samples.len() < 2 * k + 1 {
        return invalid(
            "segment",
            format!(
                "{} samples cannot hold two {} s spacings",
                seg.samples.len(),
                cfg.cds_spacing
            ),
        );
    }
    let x = &seg.samples;
    let p = (k..x.len() - k)
        .max_by(|&a, &b| x[a].total_cmp(&x[b]))
        .expect("range is non-empty");
    let (v0, v1, v2) = (x[p - k], x[p], x[p + k]);
    let edge1 = v1 - v0 >= cfg.slope_threshold;
    let edge2 = v2 - v1 >= cfg.slope_threshold;
    Ok(edge1 && !edge2)
}

/// Bit `k` is 1 iff a detected segment's timestamp falls in
/// `[t_start + k/rate, t_start + (k+1)/rate)`.
pub fn recover_bits(
    detected: &[bool],
    timestamps: &[f64],
    bit_rate: f64,
    n_expected: usize,
    t_start: f64,
) -> Result<BitStream> {
    if detected.len() != timestamps.len() {
        return Err(crate::Error::LengthMismatch {
            what: "detections per timestamp",
            expected: timestamps.len(),
            got: detected.len(),
        });
    }
    if timestamps.windows(2).any(|w| w[1] < w[0]) {
        return invalid("timestamps", "must be sorted");
    }
    let mut bits = vec![false; n_expected];
    for (&d, &t) in detected.iter().zip(timestamps) {
        if !d {
            continue;
        }
        let slot = ((t - t_start) * bit_rate).floor();
        if slot >= 0.0 && (slot as usize) < n_expected {
            bits[slot as usize] = true;
        }
    }
    BitStream::new(bits, bit_rate)
}
