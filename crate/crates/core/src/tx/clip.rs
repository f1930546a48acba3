use crate::error::{invalid, Error, Result};
use crate::filter::{FilterMode, FirstOrder};
use crate::scalar::Scalar;
use crate::waveform::{BitStream, Waveform};

/// Clipping thresholds as programmed through the threshold DACs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClipperConfig {
    /// Upper clip level, V.
    pub v_max: f64,
    /// AC ground; the lower clip mirrors `v_max` about it.
    pub v_mid: f64,
    pub dac_bits: u32,
    /// V
    pub dac_fullscale: f64,
    /// Width of the smoothed region around each threshold, V. Zero is a hard clip.
    pub knee_width: f64,
}

impl Default for ClipperConfig {
    fn default() -> Self {
        Self {
            v_max: 0.78,
            v_mid: 0.6,
            dac_bits: 8,
            dac_fullscale: 1.2,
            knee_width: 0.0,
        }
    }
}

impl ClipperConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.v_mid < self.v_max) {
            return invalid(
                "clipper",
                format!("v_mid = {} must be below v_max = {}", self.v_mid, self.v_max),
            );
        }
        if !(1..=24).contains(&self.dac_bits) {
            return invalid("clipper.dac_bits", format!("{} not in 1..=24", self.dac_bits));
        }
        if !(self.dac_fullscale > 0.0) {
            return invalid("clipper.dac_fullscale", "must be positive");
        }
        if !(self.knee_width >= 0.0) || self.knee_width >= self.v_max - self.lower() {
            return invalid(
                "clipper.knee_width",
                format!("{} V must be in [0, {}) V", self.knee_width, self.v_max - self.lower()),
            );
        }
        Ok(())
    }

    pub fn lower(&self) -> f64 {
        2.0 * self.v_mid - self.v_max
    }

    pub fn lsb(&self) -> f64 {
        self.dac_fullscale / ((1u64 << self.dac_bits) - 1) as f64
    }

    /// Copy with both programmed thresholds snapped to the DAC grid.
    pub fn quantized(&self) -> Result<Self> {
        let mut q = *self;
        q.v_max = dac_quantize(self.v_max, self)?;
        q.v_mid = dac_quantize(self.v_mid, self)?;
        q.validate()?;
        Ok(q)
    }
}

/// Nearest DAC level to `v`; halfway values round up.
pub fn dac_quantize(v: f64, cfg: &ClipperConfig) -> Result<f64> {
    if !(0.0..=cfg.dac_fullscale).contains(&v) {
        return invalid("dac input", format!("{v} V outside [0, {}] V", cfg.dac_fullscale));
    }
    let lsb = cfg.lsb();
    let top = ((1u64 << cfg.dac_bits) - 1) as f64;
    let k = (v / lsb + 0.5).floor().min(top);
    Ok(k * lsb)
}

#[inline]
fn soft_upper(v: f64, h: f64, w: f64) -> f64 {
    if w == 0.0 {
        return v.min(h);
    }
    let start = h - w / 2.0;
    if v <= start {
        v
    } else if v >= h + w / 2.0 {
        h
    } else {
        // C1 blend from slope 1 to slope 0 across the knee
        v - (v - start) * (v - start) / (2.0 * w)
    }
}

/// Clips between `2·v_mid − v_max` and `v_max`, with an optional smooth knee.
pub fn clip_waveform<T: Scalar>(w: &Waveform<T>, cfg: &ClipperConfig) -> Result<Waveform<T>> {
    cfg.validate()?;
    let (hi, lo, k) = (cfg.v_max, cfg.lower(), cfg.knee_width);
    if k == 0.0 {
        let (hi_t, lo_t) = (T::lit(hi), T::lit(lo));
        return w.map(|v| v.min(hi_t).max(lo_t));
    }
    w.map(|v| {
        let x = v.as_f64();
        let up = soft_upper(x, hi, k);
        T::lit(-soft_upper(-up, -lo, k))
    })
}

/// Passes the clipped signal during "1" bits and holds `v_mid` during "0"
/// bits and before the first edge. Bit `k` occupies
/// `[edge_times[k], edge_times[k+1])`; the last bit runs to the end.
pub fn ook_gate<T: Scalar>(
    w_clipped: &Waveform<T>,
    bits: &BitStream,
    cfg: &ClipperConfig,
    edge_times: &[f64],
) -> Result<Waveform<T>> {
    if edge_times.len() != bits.len() {
        return Err(Error::LengthMismatch {
            what: "ook edges per bit",
            expected: bits.len(),
            got: edge_times.len(),
        });
    }
    if edge_times.windows(2).any(|e| !(e[1] > e[0])) {
        return invalid("edge_times", "must be strictly increasing");
    }
    let mid = T::lit(cfg.v_mid);
    let x = w_clipped.samples();
    let mut out = vec![mid; x.len()];
    let idx = |t: f64| -> usize {
        let k = ((t - w_clipped.t0()) * w_clipped.sample_rate()).round();
        if k <= 0.0 {
            0
        } else {
            (k as usize).min(x.len())
        }
    };
    for (k, &bit) in bits.bits().iter().enumerate() {
        if !bit {
            continue;
        }
        let i0 = idx(edge_times[k]);
        let i1 = edge_times.get(k + 1).map_or(x.len(), |&t| idx(t));
        if i0 < i1 {
            out[i0..i1].copy_from_slice(&x[i0..i1]);
        }
    }
    w_clipped.with_samples(out)
}

/// AC coupling into the antenna: first-order highpass with unity passband
/// gain, started as if the input had sat at its first value forever.
pub fn antenna_couple<T: Scalar>(w: &Waveform<T>, hp_corner: f64) -> Result<Waveform<T>> {
    let f = FirstOrder::<T>::design(FilterMode::Highpass, hp_corner, 1.0, w.sample_rate())?;
    let x0 = w.samples()[0];
    let shifted: Vec<T> = w.samples().iter().map(|&v| v - x0).collect();
    w.with_samples(f.run(&shifted))
}
