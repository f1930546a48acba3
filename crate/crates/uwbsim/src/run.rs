//! One end-to-end scenario: data → DLL lock → transmitter → spectrum and
//! mask → channel → detection → BER.

use uwb_core::channel::{referred_output_power, rx_power_budget, ChannelConfig};
use uwb_core::dll::{data_start_offset, dll_run, insert_aux_bits, DllState, Schedule, TrajectoryPoint};
use uwb_core::filter::band_limit;
use uwb_core::power_link::{
    detune_step, link_efficiency, rectifier_output, regulation_time_constant, vco_free_max_rate, RegulatorState,
};
use uwb_core::prbs::prbs_generate;
use uwb_core::psd::{occupied_band, welch_psd, WelchConfig, Window, PSD_FLOOR_DBM_PER_MHZ};
use uwb_core::rx::{simulate_link, BerResult, Drive, LinkSim};
use uwb_core::tx::chain::pa_output;
use uwb_core::tx::{chip_efficiency, energy_per_bit, transmit, TxConfig};
use uwb_core::{BitStream, Spectrum, Waveform};

use crate::error::{config, AtStage, Result};
use crate::mask::{mask_check, MaskResult, SpectralMask};
use crate::scenario::{DataPattern, Mode, PowerLinkSettings, PowerSetting, Scenario};

/// Welch segment for mask checks: about 1 MHz resolution at 80 GS/s.
const MASK_SEGMENT: usize = 1 << 17;
/// Max-compliant power sits this far under the binding limit, dB.
const MASK_BACKOFF_DB: f64 = 0.01;

#[derive(Debug, Clone, PartialEq)]
pub struct DllSummary {
    pub locked: bool,
    /// s
    pub delay: f64,
    /// s
    pub lock_error: f64,
    pub trajectory: Vec<TrajectoryPoint>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerLinkReport {
    /// percent
    pub efficiency: f64,
    /// Rectified voltage with the tank tuned, V.
    pub v_dc_tuned: f64,
    /// V
    pub ripple: f64,
    /// After the detuning loop has run, V.
    pub v_rect: f64,
    pub limiter_active: bool,
    /// Final tuning over the resonant capacitance.
    pub c_tune_ratio: f64,
    /// Within 2 % of the target.
    pub regulated: bool,
    /// VCO-free data rate at the link frequency, b/s.
    pub vco_free_rate: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinkReport {
    pub mode: Mode,
    pub ber: BerResult,
    pub n_avg: usize,
    /// TX output power at the referred plane, dBm.
    pub p_out_dbm: f64,
    /// dBm
    pub rx_power: f64,
    /// dBm
    pub noise_floor: f64,
    /// dB
    pub snr: f64,
    /// percent
    pub tx_efficiency: f64,
    pub energy_per_bit_pj: f64,
    /// Data bits per second after averaging.
    pub data_rate: f64,
    /// −10 dB band of the radiated spectrum; `None` when nothing is sent.
    pub occupied_band: Option<(f64, f64)>,
    pub mask: MaskResult,
    pub pass_mask: bool,
    pub dll: DllSummary,
    pub power_link: Option<PowerLinkReport>,
    /// Radiated PSD at the reported output power.
    pub spectrum: Spectrum,
    /// Radiated waveform at unit output scale.
    pub radiated: Waveform,
}

fn lfsr_seed(s: &Scenario) -> u32 {
    let period = (1u64 << s.prbs_order) - 1;
    (s.seed % period) as u32 + 1
}

pub fn data_bits(s: &Scenario) -> Result<Vec<bool>> {
    Ok(match s.data {
        DataPattern::Prbs => prbs_generate(s.prbs_order, lfsr_seed(s), s.n_bits).at("prbs")?,
        DataPattern::Zeros => vec![false; s.n_bits],
        DataPattern::Ones => vec![true; s.n_bits],
    })
}

/// `n` on-air symbols: each bit repeated `n_avg` times, the pattern cycled.
fn on_air(bits: &[bool], n_avg: usize, n: usize) -> Vec<bool> {
    bits.iter()
        .flat_map(|&b| std::iter::repeat_n(b, n_avg))
        .cycle()
        .take(n)
        .collect()
}

fn lock_dll(s: &Scenario, symbols: &[bool], slot: f64) -> Result<DllSummary> {
    let t = s.tank.period();
    let cfg = s.dll.config(t);
    let n = (s.dll.run_time / slot).ceil() as usize + 2;
    let sym: Vec<bool> = symbols.iter().copied().cycle().take(n).collect();
    let schedule = if s.dll.aux_bits {
        insert_aux_bits(&BitStream::new(sym, 1.0 / (slot - t / 4.0)).at("dll")?, t)
    } else {
        Schedule::plain(&BitStream::new(sym, 1.0 / slot).at("dll")?)
    }
    .starting_at(data_start_offset(t));
    let pa = pa_output(&s.tank, s.dll.run_time + 5e-9, s.spectrum_rate).at("dll")?;
    let init = DllState::at_delay(&cfg, s.dll.init_delay * t);
    let run = dll_run(&schedule, &pa, &cfg, s.dll.run_time, init).at("dll")?;
    Ok(DllSummary {
        locked: run.state.locked,
        delay: run.delay(),
        lock_error: run.final_lock_error(),
        trajectory: run.trajectory,
    })
}

/// Transmits `symbols` from `data_start_offset` with edges `edge_delay`
/// into each slot and returns the TX port waveform.
fn tx_record(tx: &TxConfig, symbols: &[bool], slot: f64, edge_delay: f64, fs: f64) -> Result<Waveform> {
    let off = data_start_offset(tx.tank.period());
    let edges: Vec<f64> = (0..symbols.len()).map(|k| off + k as f64 * slot + edge_delay).collect();
    let dur = off + (symbols.len() + 1) as f64 * slot;
    let bits = BitStream::new(symbols.to_vec(), 1.0 / slot).at("tx")?;
    Ok(transmit(tx, &bits, &edges, dur, fs).at("tx")?.v3)
}

fn radiated_spectrum(v3: &Waveform, ch: &ChannelConfig) -> Result<(Waveform, Spectrum)> {
    let rad = band_limit(v3, ch.tx_band.0, ch.tx_band.1).at("spectrum")?;
    let seg = MASK_SEGMENT.min(1 << rad.len().ilog2());
    let s = welch_psd(&rad, &WelchConfig::new(seg, 0.5, Window::Hann)).at("spectrum")?;
    Ok((rad, s))
}

fn power_link_report(pl: &PowerLinkSettings) -> Result<PowerLinkReport> {
    let p = pl.params;
    let efficiency = link_efficiency(&p, pl.i_load).at("power_link")?;
    let (v_dc_tuned, ripple) = rectifier_output(p.v_source, &p, pl.i_load).at("power_link")?;
    // step at a hundredth of the fastest small-signal constant
    let c0 = p.c_resonant();
    let tau = (1..200)
        .map(|i| c0 * (p.c_min_ratio + (1.0 - p.c_min_ratio) * i as f64 / 200.0))
        .map(|c| regulation_time_constant(&p, c))
        .fold(f64::INFINITY, f64::min);
    let mut st = RegulatorState::tuned(&p);
    for _ in 0..20_000 {
        st = detune_step(&st, &p, tau / 100.0).at("power_link")?;
    }
    Ok(PowerLinkReport {
        efficiency,
        v_dc_tuned,
        ripple,
        v_rect: st.v_rect,
        limiter_active: st.limiter_active,
        c_tune_ratio: st.c_tune / c0,
        regulated: (st.v_rect - p.v_target).abs() <= 0.02 * p.v_target,
        vco_free_rate: vco_free_max_rate(p.f_link).at("power_link")?,
    })
}

pub fn run_scenario(s: &Scenario, mask: &SpectralMask) -> Result<LinkReport> {
    run_point(s, mask, 0)
}

/// Runs with noise streams starting at `first_stream`.
pub(crate) fn run_point(s: &Scenario, mask: &SpectralMask, first_stream: u64) -> Result<LinkReport> {
    s.validate()?;
    let t = s.tank.period();
    let slot = s.periods_per_slot()? as f64 * t;
    let ch = s.data_channel()?;
    let data = data_bits(s)?;
    let symbols = on_air(&data, s.n_avg, data.len() * s.n_avg);

    let dll = lock_dll(s, &symbols, slot)?;
    let edge_delay = dll.delay;

    // The output level is a TX setting, calibrated on PRBS whatever the data.
    let tx = s.tx();
    let cal_bits = prbs_generate(s.prbs_order, lfsr_seed(s), s.spectrum_bits).at("prbs")?;
    let cal_sym = on_air(&cal_bits, s.n_avg, s.spectrum_bits);
    let cal = tx_record(&tx, &cal_sym, slot, edge_delay, s.spectrum_rate)?;
    let p_ref = referred_output_power(&cal, &ch).at("tx calibration")?;
    let p_out_dbm = match s.p_out {
        PowerSetting::Dbm(p) => p,
        PowerSetting::MaxCompliant => {
            let (_, cal_spec) = radiated_spectrum(&cal, &ch)?;
            let Some(m) = mask_check(&cal_spec, mask).min_margin() else {
                return config("p_out_dbm: max_compliant needs a mask band inside the spectrum");
            };
            p_ref + m - MASK_BACKOFF_DB
        }
    };
    let scale_db = p_out_dbm - p_ref;

    let sent = on_air(&data, s.n_avg, s.spectrum_bits);
    let v3 = if sent == cal_sym {
        cal
    } else {
        tx_record(&tx, &sent, slot, edge_delay, s.spectrum_rate)?
    };
    let (radiated, unit_spec) = radiated_spectrum(&v3, &ch)?;
    let spectrum = unit_spec.offset(scale_db);
    let mask_result = mask_check(&spectrum, mask);
    let silent = spectrum.psd().iter().all(|&p| p <= PSD_FLOOR_DBM_PER_MHZ + scale_db);
    let occupied = (!silent).then(|| occupied_band(&spectrum, 10.0));

    // detection chain at the Monte Carlo rate, calibrated on a PRBS record
    // as long as the data so a PRBS payload carries exactly p_out
    let mc_bits = prbs_generate(s.prbs_order, lfsr_seed(s), s.n_bits).at("prbs")?;
    let mc_sym = on_air(&mc_bits, s.n_avg, s.n_bits * s.n_avg);
    let cal_mc = tx_record(&tx, &mc_sym, slot, edge_delay, s.sample_rate)?;
    let p_ref_mc = referred_output_power(&cal_mc, &ch).at("tx calibration")?;
    let mut link = LinkSim::new(tx, ch, s.sample_rate).at("link")?;
    link.tx.output_scale = 10f64.powf((p_out_dbm - p_ref_mc) / 20.0);
    link.periods_per_slot = s.periods_per_slot()?;
    link.n_avg = s.n_avg;
    link.edge_delay = edge_delay;
    link.detector = s.detection.detector(&ch);
    let drive = s.target_snr_db.map_or(Drive::Configured, Drive::Snr);
    let out = simulate_link(&link, &data, drive, first_stream).at("detection")?;

    let budget = rx_power_budget(p_out_dbm, &ch).at("channel")?;
    let data_rate = 1.0 / (slot * s.n_avg as f64);
    Ok(LinkReport {
        mode: s.mode,
        ber: out.ber,
        n_avg: s.n_avg,
        p_out_dbm,
        rx_power: out.rx_power_dbm,
        noise_floor: budget.noise_floor,
        snr: out.snr_db,
        tx_efficiency: chip_efficiency(p_out_dbm, s.p_dc_mw).at("report")?,
        energy_per_bit_pj: energy_per_bit(s.p_dc_mw, data_rate).at("report")?,
        data_rate,
        occupied_band: occupied,
        pass_mask: mask_result.pass() == Some(true),
        mask: mask_result,
        dll,
        power_link: s.power_link.as_ref().map(power_link_report).transpose()?,
        spectrum,
        radiated,
    })
}
