//! Block-wise Monte Carlo BER of the full link.
//!
//! Each block is one packet: a known preamble followed by data, every bit
//! repeated over `n_avg` slots. Noise for block `b` comes from stream
//! `first_stream + b` of the channel seed, so blocks are independent and a
//! run can be split anywhere without changing its result.

use crate::channel::{add_noise, noise_sigma, propagate, referred_output_power, trial_rng, ChannelConfig};
use crate::dll::data_start_offset;
use crate::error::{invalid, Result};
use crate::filter::band_limit;
use crate::prbs::prbs_generate;
use crate::rx::ber::{average_pulses, BerResult};
use crate::rx::detect::{capture_segments, cds_detect, notch_triggers, recover_bits, DetectionConfig};
use crate::rx::matched::{decide_with_preamble, slot_statistics, SlotGrid};
use crate::tx::{transmit, TxConfig};
use crate::units::{dbm_to_power, power_to_dbm};
use crate::waveform::{BitStream, Waveform};

/// Sets the received level of a block.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Drive {
    /// Scale the received data segment to this SNR, dB.
    Snr(f64),
    /// TX output power at the referred plane, dBm; the channel sets the rest.
    OutputPower(f64),
    /// Transmit at the configured `output_scale`.
    Configured,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Detector {
    /// Slot-synchronous correlation against the noiseless all-ones record,
    /// threshold from the preamble.
    Matched {
        /// Correlation window, s.
        window: f64,
    },
    /// Notch trigger, segment capture and three-sample slope test on the
    /// RX-band filtered record. Levels are multiples of the filtered noise
    /// deviation. Each slot must be at least one segment long.
    Cds {
        notch_width_max: f64,
        segment_len: f64,
        cds_spacing: f64,
        trigger_sigmas: f64,
        slope_sigmas: f64,
    },
}

impl Detector {
    pub fn cds_default() -> Self {
        Self::Cds {
            notch_width_max: 500e-12,
            segment_len: 10e-9,
            cds_spacing: 100e-12,
            trigger_sigmas: 6.5,
            slope_sigmas: 3.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinkSim {
    pub tx: TxConfig,
    pub channel: ChannelConfig,
    pub sample_rate: f64,
    /// Carrier periods per slot.
    pub periods_per_slot: usize,
    pub n_avg: usize,
    /// Delay from the slot boundary to the OOK switching edge, s.
    pub edge_delay: f64,
    pub detector: Detector,
    pub preamble: Vec<bool>,
    /// Data bits per packet.
    pub block_bits: usize,
}

impl LinkSim {
    /// Matched detector, four periods per slot, edges at the locked DLL delay.
    pub fn new(tx: TxConfig, channel: ChannelConfig, sample_rate: f64) -> Result<Self> {
        let t = tx.tank.period();
        Ok(Self {
            tx,
            channel,
            sample_rate,
            periods_per_slot: 4,
            n_avg: 1,
            edge_delay: 0.75 * t,
            detector: Detector::Matched {
                window: 2.0 / channel.noise_bandwidth(),
            },
            preamble: prbs_generate(7, 0x5A, 64)?,
            block_bits: 4096,
        })
    }

    pub fn slot(&self) -> f64 {
        self.periods_per_slot as f64 * self.tx.tank.period()
    }

    fn validate(&self) -> Result<()> {
        self.tx.validate()?;
        self.channel.validate()?;
        if self.n_avg == 0 || self.block_bits == 0 || self.periods_per_slot == 0 {
            return invalid("link", "n_avg, block_bits and periods_per_slot must be positive");
        }
        if !(self.edge_delay >= 0.0 && self.edge_delay < self.slot()) {
            return invalid(
                "link.edge_delay",
                format!("{} s must lie within one slot", self.edge_delay),
            );
        }
        match self.detector {
            Detector::Matched { window } if !(window > 0.0) => invalid("detector.window", "must be positive"),
            Detector::Cds {
                segment_len,
                trigger_sigmas,
                slope_sigmas,
                ..
            } => {
                if segment_len > self.slot() {
                    return invalid(
                        "detector.segment_len",
                        format!("{segment_len} s is longer than the {} s slot", self.slot()),
                    );
                }
                if !(trigger_sigmas > 0.0 && slope_sigmas > 0.0) {
                    return invalid("detector", "threshold multiples must be positive");
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinkOutcome {
    pub ber: BerResult,
    /// Mean received data power, dBm.
    pub rx_power_dbm: f64,
    /// Received data power over the noise in the analysis bandwidth, dB.
    pub snr_db: f64,
    pub rx_bits: Vec<bool>,
}

struct Block {
    errors: u64,
    p_data: f64,
    bits: Vec<bool>,
}

/// Growth of white-noise variance through the RX band filter at `fs`.
fn band_noise_gain(ch: &ChannelConfig, fs: f64) -> Result<f64> {
    let n = (64.0 * fs / ch.rx_band.0).ceil() as usize;
    let mut imp = vec![0.0; n];
    imp[0] = 1.0;
    let h = band_limit(&Waveform::new(imp, fs, 0.0)?, ch.rx_band.0, ch.rx_band.1)?;
    Ok(h.samples().iter().map(|v| v * v).sum())
}

fn run_block(link: &LinkSim, data: &[bool], drive: Drive, stream: u64) -> Result<Block> {
    let t = link.tx.tank.period();
    let slot = link.slot();
    let fs = link.sample_rate;
    let n_pre = link.preamble.len();
    let symbols: Vec<bool> = link
        .preamble
        .iter()
        .chain(data)
        .flat_map(|&b| std::iter::repeat_n(b, link.n_avg))
        .collect();
    let ns = symbols.len();
    // idle lead-in lets the coupling and band filters settle
    let off = data_start_offset(t) + 4.0 * slot;
    let edges: Vec<f64> = (0..ns).map(|k| off + k as f64 * slot + link.edge_delay).collect();
    let duration = off + (ns + 4) as f64 * slot;
    let rate = 1.0 / slot;

    let ch = link.channel;
    let mut tx_cfg = link.tx;
    if let Drive::OutputPower(p) = drive {
        let probe = transmit(&tx_cfg, &BitStream::new(symbols.clone(), rate)?, &edges, duration, fs)?;
        let Ok(p_ref) = referred_output_power(&probe.v3, &ch) else {
            return invalid("link", "silent data cannot be scaled to an output power");
        };
        tx_cfg.output_scale *= 10f64.powf((p - p_ref) / 20.0);
    }
    let sent = transmit(&tx_cfg, &BitStream::new(symbols, rate)?, &edges, duration, fs)?;
    let mut clean = propagate(&sent.v3, &ch)?;

    let i0 = clean.nearest_index(off + (n_pre * link.n_avg) as f64 * slot);
    let i1 = clean.nearest_index(off + ns as f64 * slot);
    let seg = |w: &Waveform| w.samples()[i0..i1].iter().map(|v| v * v).sum::<f64>() / (i1 - i0) as f64 / ch.r_ref;
    let n_floor = dbm_to_power(ch.noise_density) * ch.noise_bandwidth();
    let mut p_data = seg(&clean);
    let mut gain = 1.0;
    if let Drive::Snr(snr) = drive {
        if !(p_data > 0.0) {
            return invalid("link", "no received signal to scale");
        }
        gain = (10f64.powf(snr / 10.0) * n_floor / p_data).sqrt();
        clean = clean.scaled(gain);
        p_data *= gain * gain;
    }
    let r = add_noise(&clean, &ch, &mut trial_rng(ch.rng_seed, stream))?;
    let sigma = noise_sigma(ch.noise_density, ch.r_ref, fs);
    if !(sigma > 0.0) {
        return invalid("channel.noise_density", "detection needs a finite noise floor");
    }

    let bits = match link.detector {
        Detector::Matched { window } => {
            let ones = BitStream::new(vec![true; ns], rate)?;
            let reference = propagate(&transmit(&tx_cfg, &ones, &edges, duration, fs)?.v3, &ch)?.scaled(gain);
            let grid = SlotGrid {
                t_start: off + link.edge_delay,
                slot,
                n: ns,
            };
            let stats = slot_statistics(&r, &reference, &grid, window, sigma)?;
            decide_with_preamble(&stats, link.n_avg, &link.preamble)?.bits
        }
        Detector::Cds {
            notch_width_max,
            segment_len,
            cds_spacing,
            trigger_sigmas,
            slope_sigmas,
        } => {
            let front = band_limit(&r, ch.rx_band.0, ch.rx_band.1)?;
            let sigma_f = sigma * band_noise_gain(&ch, fs)?.sqrt();
            let cfg = DetectionConfig {
                notch_width_max,
                trigger_level: trigger_sigmas * sigma_f,
                segment_len,
                cds_spacing,
                slope_threshold: slope_sigmas * sigma_f,
            };
            let trig = notch_triggers(&front, &cfg)?;
            let cap = capture_segments(&front, &trig, &cfg)?;
            let hits = cap
                .segments
                .iter()
                .map(|s| cds_detect(s, &cfg))
                .collect::<Result<Vec<_>>>()?;
            let stamps: Vec<f64> = cap.segments.iter().map(|s| s.timestamp).collect();
            // a slot opens half a period before its switching edge
            let t0 = off + link.edge_delay - 0.5 * t;
            let slots = recover_bits(&hits, &stamps, rate, ns, t0)?;
            slots.bits()[n_pre * link.n_avg..]
                .chunks_exact(link.n_avg)
                .map(|g| {
                    let v: Vec<f64> = g.iter().map(|&b| f64::from(u8::from(b))).collect();
                    average_pulses(&v, link.n_avg, 0.5)
                })
                .collect::<Result<Vec<_>>>()?
        }
    };
    let errors = bits.iter().zip(data).filter(|(a, b)| a != b).count() as u64;
    Ok(Block { errors, p_data, bits })
}

/// Sends `data` in packets of `block_bits`, block `b` using noise stream
/// `first_stream + b`.
pub fn simulate_link(link: &LinkSim, data: &[bool], drive: Drive, first_stream: u64) -> Result<LinkOutcome> {
    link.validate()?;
    if data.is_empty() {
        return invalid("data", "no bits to send");
    }
    let mut errors = 0;
    let mut p_sum = 0.0;
    let mut rx_bits = Vec::with_capacity(data.len());
    for (b, chunk) in data.chunks(link.block_bits).enumerate() {
        let blk = run_block(link, chunk, drive, first_stream + b as u64)?;
        errors += blk.errors;
        p_sum += blk.p_data * chunk.len() as f64;
        rx_bits.extend(blk.bits);
    }
    let p = p_sum / data.len() as f64;
    let n_floor = dbm_to_power(link.channel.noise_density) * link.channel.noise_bandwidth();
    Ok(LinkOutcome {
        ber: BerResult::from_counts(data.len() as u64, errors)?,
        rx_power_dbm: if p > 0.0 { power_to_dbm(p)? } else { f64::NEG_INFINITY },
        snr_db: 10.0 * (p / n_floor).log10(),
        rx_bits,
    })
}
