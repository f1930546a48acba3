//! Scenario files: TOML with a few top-level keys and one table per model.
//!
//! Every key is optional except `mode`; `all_wireless` also needs a
//! `[power_link]` table, which the wired modes must not have. Unknown keys
//! are rejected with the closest valid name.

use std::path::Path;

use toml::{Table, Value};
use uwb_core::channel::{free_space_path_loss, ChannelConfig};
use uwb_core::dll::DllConfig;
use uwb_core::power_link::PowerLinkParams;
use uwb_core::rx::Detector;
use uwb_core::tx::{ClipperConfig, TankParams, ToneImpairments, TxConfig};

use crate::error::{config, AtStage, Result, SimError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    WiredWired,
    WiredWireless,
    AllWireless,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::WiredWired => "wired_wired",
            Mode::WiredWireless => "wired_wireless",
            Mode::AllWireless => "all_wireless",
        }
    }

    pub fn wireless_data(self) -> bool {
        self != Mode::WiredWired
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DataPattern {
    Prbs,
    Zeros,
    Ones,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PowerSetting {
    /// Largest output that keeps every mask band at or under its limit.
    MaxCompliant,
    Dbm(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DetectorKind {
    Matched,
    Cds,
}

/// DLL settings with the delay range in carrier periods.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DllSettings {
    pub aux_bits: bool,
    /// Starting delay, periods.
    pub init_delay: f64,
    /// s
    pub run_time: f64,
    pub loop_gain: f64,
    pub loop_tau: f64,
    pub rc_tau: f64,
    pub leak_tau: f64,
    pub delay_min: f64,
    pub delay_max: f64,
}

impl Default for DllSettings {
    fn default() -> Self {
        let d = DllConfig::for_period(1.0);
        Self {
            aux_bits: true,
            init_delay: 0.5,
            run_time: 2e-6,
            loop_gain: d.loop_gain,
            loop_tau: d.loop_tau,
            rc_tau: d.rc_tau,
            leak_tau: d.leak_tau,
            delay_min: d.delay_min,
            delay_max: d.delay_max,
        }
    }
}

impl DllSettings {
    pub fn config(&self, period: f64) -> DllConfig {
        DllConfig {
            period,
            delay_min: self.delay_min * period,
            delay_max: self.delay_max * period,
            loop_gain: self.loop_gain,
            loop_tau: self.loop_tau,
            rc_tau: self.rc_tau,
            step_dt: period / 64.0,
            leak_tau: self.leak_tau,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionSettings {
    pub kind: DetectorKind,
    /// Matched correlation window, s; `None` uses two over the noise bandwidth.
    pub window: Option<f64>,
    pub notch_width_max: f64,
    pub segment_len: f64,
    pub cds_spacing: f64,
    pub trigger_sigmas: f64,
    pub slope_sigmas: f64,
}

impl Default for DetectionSettings {
    fn default() -> Self {
        let Detector::Cds {
            notch_width_max,
            segment_len,
            cds_spacing,
            trigger_sigmas,
            slope_sigmas,
        } = Detector::cds_default()
        else {
            unreachable!("cds_default builds the CDS variant")
        };
        Self {
            kind: DetectorKind::Matched,
            window: None,
            notch_width_max,
            segment_len,
            cds_spacing,
            trigger_sigmas,
            slope_sigmas,
        }
    }
}

impl DetectionSettings {
    pub fn detector(&self, ch: &ChannelConfig) -> Detector {
        match self.kind {
            DetectorKind::Matched => Detector::Matched {
                window: self.window.unwrap_or(2.0 / ch.noise_bandwidth()),
            },
            DetectorKind::Cds => Detector::Cds {
                notch_width_max: self.notch_width_max,
                segment_len: self.segment_len,
                cds_spacing: self.cds_spacing,
                trigger_sigmas: self.trigger_sigmas,
                slope_sigmas: self.slope_sigmas,
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerLinkSettings {
    pub params: PowerLinkParams,
    /// A
    pub i_load: f64,
}

impl Default for PowerLinkSettings {
    fn default() -> Self {
        Self {
            params: PowerLinkParams::default(),
            i_load: 4e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub mode: Mode,
    pub tank: TankParams,
    pub clipper: ClipperConfig,
    /// Antenna coupling corner, Hz.
    pub hp_corner: f64,
    /// DC draw used for the efficiency and energy figures, mW.
    pub p_dc_mw: f64,
    pub jitter_rms: f64,
    pub dll: DllSettings,
    pub channel: ChannelConfig,
    pub detection: DetectionSettings,
    pub power_link: Option<PowerLinkSettings>,
    /// On-air slot rate, b/s; `None` gives four carrier periods per slot.
    pub bit_rate: Option<f64>,
    pub n_bits: usize,
    pub n_avg: usize,
    pub seed: u64,
    pub data: DataPattern,
    pub prbs_order: u32,
    pub p_out: PowerSetting,
    /// Scales the received signal to this SNR instead of using `p_out`.
    pub target_snr_db: Option<f64>,
    /// Monte Carlo sample rate, Hz.
    pub sample_rate: f64,
    /// Sample rate of the spectrum record, Hz.
    pub spectrum_rate: f64,
    pub spectrum_bits: usize,
}

impl Scenario {
    pub fn new(mode: Mode) -> Self {
        let tx = TxConfig::default();
        Self {
            mode,
            tank: tx.tank,
            clipper: tx.clipper,
            hp_corner: tx.hp_corner,
            p_dc_mw: 3.72,
            jitter_rms: 0.0,
            dll: DllSettings::default(),
            channel: ChannelConfig::default(),
            detection: DetectionSettings::default(),
            power_link: (mode == Mode::AllWireless).then(PowerLinkSettings::default),
            bit_rate: None,
            n_bits: 4096,
            n_avg: 1,
            seed: 1,
            data: DataPattern::Prbs,
            prbs_order: 15,
            p_out: PowerSetting::MaxCompliant,
            target_snr_db: None,
            sample_rate: 20e9,
            spectrum_rate: 80e9,
            spectrum_bits: 1000,
        }
    }

    /// TX configuration at unit output scale.
    pub fn tx(&self) -> TxConfig {
        TxConfig {
            tank: self.tank,
            clipper: self.clipper,
            hp_corner: self.hp_corner,
            output_scale: 1.0,
            spur: None,
            impairments: ToneImpairments {
                jitter_rms: self.jitter_rms,
                seed: self.seed,
            },
        }
    }

    /// Channel the data path sees. Wired modes keep the band edges as the
    /// measurement front end but cancel the path loss.
    pub fn data_channel(&self) -> Result<ChannelConfig> {
        let mut ch = ChannelConfig {
            rng_seed: self.seed,
            ..self.channel
        };
        if !self.mode.wireless_data() {
            ch.gain_cal = free_space_path_loss(ch.distance, ch.center_freq).at("channel")?;
        }
        Ok(ch)
    }

    /// Carrier periods per slot implied by `bit_rate`.
    pub fn periods_per_slot(&self) -> Result<usize> {
        let f = 1.0 / self.tank.period();
        let Some(rate) = self.bit_rate else {
            return Ok(4);
        };
        let m = f / rate;
        let k = m.round();
        if k < 2.0 || (m - k).abs() > 0.01 * k {
            return config(format!(
                "bit_rate: {rate} b/s must be the {f} Hz carrier over an integer of at least 2"
            ));
        }
        Ok(k as usize)
    }

    pub fn validate(&self) -> Result<()> {
        self.tx().validate().at("tx")?;
        self.channel.validate().at("channel")?;
        self.dll.config(self.tank.period()).validate().at("dll")?;
        if let Some(pl) = &self.power_link {
            pl.params.validate().at("power_link")?;
            if !(pl.i_load > 0.0) {
                return config("power_link.i_load: must be positive");
            }
        }
        match (self.mode, self.power_link.is_some()) {
            (Mode::AllWireless, false) => return config("all_wireless needs a [power_link] section"),
            (Mode::WiredWired | Mode::WiredWireless, true) => {
                return config(format!(
                    "[power_link] only applies to all_wireless, not {}",
                    self.mode.name()
                ))
            }
            _ => {}
        }
        if self.n_bits == 0 {
            return config("n_bits: must be at least 1");
        }
        if self.n_avg == 0 {
            return config("n_avg: must be at least 1");
        }
        if self.spectrum_bits == 0 {
            return config("spectrum_bits: must be at least 1");
        }
        if !(2..=32).contains(&self.prbs_order) {
            return config(format!("prbs_order: {} not in 2..=32", self.prbs_order));
        }
        if !(self.p_dc_mw > 0.0) {
            return config("tx.p_dc_mw: must be positive");
        }
        let d = self.dll.init_delay;
        if !(self.dll.delay_min..=self.dll.delay_max).contains(&d) {
            return config(format!("dll.init_delay: {d} periods lies outside the delay range"));
        }
        if !(self.dll.run_time > 0.0) {
            return config("dll.run_time: must be positive");
        }
        for (name, fs) in [("sample_rate", self.sample_rate), ("spectrum_rate", self.spectrum_rate)] {
            if !(fs > 2.0 * self.channel.rx_band.1.max(self.channel.tx_band.1)) {
                return config(format!("{name}: {fs} Hz cannot carry the channel band edges"));
            }
        }
        self.periods_per_slot()?;
        Ok(())
    }

    /// Assigns one `section.key` (or top-level `key`).
    pub fn set(&mut self, path: &str, v: &Value) -> Result<()> {
        let num = || as_f64(path, v);
        let count = || as_count(path, v);
        match path {
            "mode" => self.mode = parse_mode(path, v)?,
            "n_bits" => self.n_bits = count()?,
            "n_avg" => self.n_avg = count()?,
            "seed" => self.seed = count()? as u64,
            "data" => {
                self.data = match as_str(path, v)? {
                    "prbs" => DataPattern::Prbs,
                    "zeros" => DataPattern::Zeros,
                    "ones" => DataPattern::Ones,
                    other => return config(format!("{path}: \"{other}\" is not one of prbs, zeros, ones")),
                }
            }
            "prbs_order" => self.prbs_order = count()? as u32,
            "bit_rate" => self.bit_rate = Some(num()?),
            "p_out_dbm" => {
                self.p_out = match v {
                    Value::String(s) if s == "max_compliant" => PowerSetting::MaxCompliant,
                    _ => PowerSetting::Dbm(num()?),
                }
            }
            "target_snr_db" => self.target_snr_db = Some(num()?),
            "sample_rate" => self.sample_rate = num()?,
            "spectrum_rate" => self.spectrum_rate = num()?,
            "spectrum_bits" => self.spectrum_bits = count()?,

            "tank.l" => self.tank.l = num()?,
            "tank.c" => self.tank.c = num()?,
            "tank.r_loss" => self.tank.r_loss = num()?,
            "tank.r_antenna" => self.tank.r_antenna = num()?,
            "tank.drive_amp" => self.tank.drive_amp = num()?,
            "tank.drive_freq" => self.tank.drive_freq = Some(num()?),

            "clipper.v_max" => self.clipper.v_max = num()?,
            "clipper.v_mid" => self.clipper.v_mid = num()?,
            "clipper.dac_bits" => self.clipper.dac_bits = count()? as u32,
            "clipper.dac_fullscale" => self.clipper.dac_fullscale = num()?,
            "clipper.knee_width" => self.clipper.knee_width = num()?,

            "tx.hp_corner" => self.hp_corner = num()?,
            "tx.p_dc_mw" => self.p_dc_mw = num()?,
            "tx.jitter_rms" => self.jitter_rms = num()?,

            "dll.aux_bits" => self.dll.aux_bits = as_bool(path, v)?,
            "dll.init_delay" => self.dll.init_delay = num()?,
            "dll.run_time" => self.dll.run_time = num()?,
            "dll.loop_gain" => self.dll.loop_gain = num()?,
            "dll.loop_tau" => self.dll.loop_tau = num()?,
            "dll.rc_tau" => self.dll.rc_tau = num()?,
            "dll.leak_tau" => self.dll.leak_tau = num()?,
            "dll.delay_min" => self.dll.delay_min = num()?,
            "dll.delay_max" => self.dll.delay_max = num()?,

            "channel.distance" => self.channel.distance = num()?,
            "channel.center_freq" => self.channel.center_freq = num()?,
            "channel.tx_band_lo" => self.channel.tx_band.0 = num()?,
            "channel.tx_band_hi" => self.channel.tx_band.1 = num()?,
            "channel.rx_band_lo" => self.channel.rx_band.0 = num()?,
            "channel.rx_band_hi" => self.channel.rx_band.1 = num()?,
            "channel.gain_cal" => self.channel.gain_cal = num()?,
            "channel.noise_density" => self.channel.noise_density = num()?,
            "channel.analysis_bw" => self.channel.analysis_bw = num()?,
            "channel.r_ref" => self.channel.r_ref = num()?,

            "detection.detector" => {
                self.detection.kind = match as_str(path, v)? {
                    "matched" => DetectorKind::Matched,
                    "cds" => DetectorKind::Cds,
                    other => return config(format!("{path}: \"{other}\" is not one of matched, cds")),
                }
            }
            "detection.window" => self.detection.window = Some(num()?),
            "detection.notch_width_max" => self.detection.notch_width_max = num()?,
            "detection.segment_len" => self.detection.segment_len = num()?,
            "detection.cds_spacing" => self.detection.cds_spacing = num()?,
            "detection.trigger_sigmas" => self.detection.trigger_sigmas = num()?,
            "detection.slope_sigmas" => self.detection.slope_sigmas = num()?,

            p if p.starts_with("power_link.") => {
                let pl = self
                    .power_link
                    .as_mut()
                    .ok_or_else(|| SimError::Config(format!("{p}: needs mode all_wireless")))?;
                let x = num()?;
                let q = &mut pl.params;
                match p {
                    "power_link.f_link" => q.f_link = x,
                    "power_link.k" => q.k = x,
                    "power_link.q_tx" => q.q_tx = x,
                    "power_link.q_rx" => q.q_rx = x,
                    "power_link.v_source" => q.v_source = x,
                    "power_link.diode_drop" => q.diode_drop = x,
                    "power_link.c_filter" => q.c_filter = x,
                    "power_link.v_target" => q.v_target = x,
                    "power_link.detune_gain" => q.detune_gain = x,
                    "power_link.l_rx" => q.l_rx = x,
                    "power_link.c_min_ratio" => q.c_min_ratio = x,
                    "power_link.i_load" => pl.i_load = x,
                    _ => return unknown_key(p),
                }
            }
            _ => return unknown_key(path),
        }
        Ok(())
    }

    /// Parses scenario text. `mode` is read first; the other keys are independent.
    pub fn parse(text: &str) -> Result<Self> {
        let table: Table = text
            .parse()
            .map_err(|e: toml::de::Error| SimError::Config(format!("scenario syntax: {e}")))?;
        let mode = match table.get("mode") {
            Some(v) => parse_mode("mode", v)?,
            None => return config("mode: required (wired_wired, wired_wireless or all_wireless)"),
        };
        let mut s = Scenario::new(mode);
        // presence, not content, decides whether the power link exists
        s.power_link = table.contains_key("power_link").then(PowerLinkSettings::default);
        for (key, v) in &table {
            match v {
                Value::Table(inner) => {
                    if !SECTIONS.contains(&key.as_str()) {
                        return config(format!("[{key}]: unknown section{}", suggest(key, SECTIONS)));
                    }
                    for (k, x) in inner {
                        s.set(&format!("{key}.{k}"), x)?;
                    }
                }
                _ if key == "mode" => {}
                _ => s.set(key, v)?,
            }
        }
        s.validate()?;
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| SimError::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }
}

pub const SECTIONS: &[&str] = &["tank", "clipper", "tx", "dll", "channel", "detection", "power_link"];

/// Every assignable path, in documentation order.
pub const KEYS: &[&str] = &[
    "mode",
    "n_bits",
    "n_avg",
    "seed",
    "data",
    "prbs_order",
    "bit_rate",
    "p_out_dbm",
    "target_snr_db",
    "sample_rate",
    "spectrum_rate",
    "spectrum_bits",
    "tank.l",
    "tank.c",
    "tank.r_loss",
    "tank.r_antenna",
    "tank.drive_amp",
    "tank.drive_freq",
    "clipper.v_max",
    "clipper.v_mid",
    "clipper.dac_bits",
    "clipper.dac_fullscale",
    "clipper.knee_width",
    "tx.hp_corner",
    "tx.p_dc_mw",
    "tx.jitter_rms",
    "dll.aux_bits",
    "dll.init_delay",
    "dll.run_time",
    "dll.loop_gain",
    "dll.loop_tau",
    "dll.rc_tau",
    "dll.leak_tau",
    "dll.delay_min",
    "dll.delay_max",
    "channel.distance",
    "channel.center_freq",
    "channel.tx_band_lo",
    "channel.tx_band_hi",
    "channel.rx_band_lo",
    "channel.rx_band_hi",
    "channel.gain_cal",
    "channel.noise_density",
    "channel.analysis_bw",
    "channel.r_ref",
    "detection.detector",
    "detection.window",
    "detection.notch_width_max",
    "detection.segment_len",
    "detection.cds_spacing",
    "detection.trigger_sigmas",
    "detection.slope_sigmas",
    "power_link.f_link",
    "power_link.k",
    "power_link.q_tx",
    "power_link.q_rx",
    "power_link.v_source",
    "power_link.diode_drop",
    "power_link.c_filter",
    "power_link.v_target",
    "power_link.detune_gain",
    "power_link.l_rx",
    "power_link.c_min_ratio",
    "power_link.i_load",
];

fn unknown_key<T>(path: &str) -> Result<T> {
    let (section, _) = path.rsplit_once('.').unwrap_or(("", path));
    let peers: Vec<&str> = KEYS
        .iter()
        .copied()
        .filter(|k| k.rsplit_once('.').map_or("", |(s, _)| s) == section)
        .collect();
    config(format!("{path}: unknown key{}", suggest(path, &peers)))
}

/// Closest candidate by whole-name and best-word similarity.
fn suggest(key: &str, candidates: &[&str]) -> String {
    let leaf = |s: &str| s.rsplit('.').next().unwrap_or(s).to_owned();
    let k = leaf(key);
    let score = |c: &str| {
        let c = leaf(c);
        let words = k
            .split('_')
            .flat_map(|a| c.split('_').map(move |b| strsim::jaro_winkler(a, b)))
            .fold(0.0, f64::max);
        0.5 * strsim::jaro_winkler(&k, &c) + 0.5 * words
    };
    candidates
        .iter()
        .map(|c| (score(c), *c))
        .filter(|(s, _)| *s >= 0.7)
        .max_by(|a, b| a.0.total_cmp(&b.0))
        .map_or(String::new(), |(_, c)| format!("; did you mean \"{}\"?", leaf(c)))
}

fn parse_mode(path: &str, v: &Value) -> Result<Mode> {
    match as_str(path, v)? {
        "wired_wired" => Ok(Mode::WiredWired),
        "wired_wireless" => Ok(Mode::WiredWireless),
        "all_wireless" => Ok(Mode::AllWireless),
        other => config(format!(
            "{path}: \"{other}\" is not one of wired_wired, wired_wireless, all_wireless"
        )),
    }
}

fn as_f64(path: &str, v: &Value) -> Result<f64> {
    match v {
        Value::Float(x) => Ok(*x),
        Value::Integer(i) => Ok(*i as f64),
        _ => config(format!("{path}: expected a number, got {v}")),
    }
}

fn as_count(path: &str, v: &Value) -> Result<usize> {
    match v {
        Value::Integer(i) if *i >= 0 => Ok(*i as usize),
        _ => config(format!("{path}: expected a non-negative integer, got {v}")),
    }
}

fn as_bool(path: &str, v: &Value) -> Result<bool> {
    v.as_bool()
        .ok_or_else(|| SimError::Config(format!("{path}: expected true or false, got {v}")))
}

fn as_str<'a>(path: &str, v: &'a Value) -> Result<&'a str> {
    v.as_str()
        .ok_or_else(|| SimError::Config(format!("{path}: expected a string, got {v}")))
}

/// Reads a command-line value: TOML syntax, or a bare word as a string.
pub fn parse_value(text: &str) -> Value {
    let doc = format!("v = {text}");
    match doc.parse::<Table>() {
        Ok(mut t) => t.remove("v").unwrap_or(Value::String(text.to_owned())),
        Err(_) => Value::String(text.trim().to_owned()),
    }
}
