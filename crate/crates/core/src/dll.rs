//! Behavioral delay-locked loop placing the OOK switching edges a quarter
//! carrier period ahead of the PA output zero crossings.
//!
//! Phase detector: every falling edge of the delayed data (a rising edge of
//! the inverting delay-line output) opens two pulses. Pulse A lasts half a
//! carrier period and enters filter A, whose DC gain is 1/2. Pulse B lasts
//! until the next transition of the squared PA output V1' and enters filter
//! B. The filters agree when an edge sits T/4 before a V1' transition.
//!
//! That comparison cannot tell rising from falling V1' transitions, so it
//! has two stable points: edges leading the rising V1 crossing by T/4 (the
//! target) and edges following it by T/4. The quarter-period auxiliary "1"
//! appended to each symbol breaks the tie: while an auxiliary slot overlaps
//! V1' high it is NORed with the inverted PA square into filter B, which
//! pushes the delay forward until the auxiliary slot lands in the V1' low
//! half. That only happens at the target.

use std::fmt::Write as _;

use crate::error::{invalid, Result};
use crate::waveform::{BitStream, Waveform};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DllConfig {
    /// Carrier period T, s.
    pub period: f64,
    /// Delay-line range, s.
    pub delay_min: f64,
    pub delay_max: f64,
    /// Integrator gain, 1/(V·s).
    pub loop_gain: f64,
    /// Compensation pole between the amplifier and the delay line, s.
    pub loop_tau: f64,
    /// Time constant of both pulse-averaging filters, s.
    pub rc_tau: f64,
    pub step_dt: f64,
    /// Leak of the finite-gain integrator, s. `f64::INFINITY` makes it ideal.
    pub leak_tau: f64,
}

impl DllConfig {
    /// Defaults for a carrier of period `period`: lock well inside 2 µs at 915 MHz.
    pub fn for_period(period: f64) -> Self {
        Self {
            period,
            delay_min: 0.02 * period,
            delay_max: 0.98 * period,
            loop_gain: 2e7,
            loop_tau: 10e-9,
            rc_tau: 10e-9,
            step_dt: period / 64.0,
            leak_tau: 100e-6,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let p = self.period;
        if !(p > 0.0 && p.is_finite()) {
            return invalid("dll.period", format!("{p} s must be positive"));
        }
        if !(0.0 < self.delay_min && self.delay_min < self.delay_max && self.delay_max < p) {
            return invalid(
                "dll delay range",
                format!(
                    "need 0 < delay_min ({}) < delay_max ({}) < period ({p})",
                    self.delay_min, self.delay_max
                ),
            );
        }
        for (name, v) in [
            ("dll.loop_tau", self.loop_tau),
            ("dll.rc_tau", self.rc_tau),
            ("dll.step_dt", self.step_dt),
            ("dll.leak_tau", self.leak_tau),
        ] {
            if !(v > 0.0) {
                return invalid("dll time constant", format!("{name} = {v} must be positive"));
            }
        }
        if !(self.loop_gain > 0.0 && self.loop_gain.is_finite()) {
            return invalid("dll.loop_gain", format!("{} must be positive", self.loop_gain));
        }
        if self.step_dt > self.period / 8.0 {
            return invalid("dll.step_dt", "must resolve an eighth of the carrier period");
        }
        Ok(())
    }

    pub fn span(&self) -> f64 {
        self.delay_max - self.delay_min
    }

    /// Delay commanded by a control voltage before clamping.
    pub fn delay_for(&self, v_ctrl: f64) -> f64 {
        self.delay_max - self.span() * v_ctrl
    }

    pub fn v_ctrl_for(&self, delay: f64) -> f64 {
        (self.delay_max - delay) / self.span()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DllState {
    pub delay: f64,
    pub v_ctrl: f64,
    pub filt_a: f64,
    pub filt_b: f64,
    pub locked: bool,
    prev_data: bool,
    prev_pa: Option<bool>,
    pulse_a_left: f64,
    pulse_b_open: bool,
}

impl DllState {
    /// Loop at rest with the delay line at `delay` (clamped to range).
    pub fn at_delay(cfg: &DllConfig, delay: f64) -> Self {
        let delay = delay.clamp(cfg.delay_min, cfg.delay_max);
        Self {
            delay,
            v_ctrl: cfg.v_ctrl_for(delay),
            filt_a: 0.0,
            filt_b: 0.0,
            locked: false,
            prev_data: false,
            prev_pa: None,
            pulse_a_left: 0.0,
            pulse_b_open: false,
        }
    }
}

fn binary(name: &'static str, v: u8) -> Result<bool> {
    match v {
        0 => Ok(false),
        1 => Ok(true),
        _ => invalid(name, format!("{v} is not a binary sample")),
    }
}

/// One loop update without an auxiliary-slot indication.
pub fn dll_step(s: &DllState, cfg: &DllConfig, pa_square: u8, delayed_data: u8) -> Result<DllState> {
    dll_step_aux(s, cfg, pa_square, delayed_data, 0)
}

/// One loop update. `delayed_aux` is 1 while the delayed stream is inside an
/// auxiliary quarter-period slot.
pub fn dll_step_aux(
    s: &DllState,
    cfg: &DllConfig,
    pa_square: u8,
    delayed_data: u8,
    delayed_aux: u8,
) -> Result<DllState> {
    let pa = binary("pa_square", pa_square)?;
    let data = binary("delayed_data", delayed_data)?;
    let aux = binary("delayed_aux", delayed_aux)?;
    let dt = cfg.step_dt;
    let mut n = *s;

    if n.prev_data && !data {
        n.pulse_a_left = cfg.period / 2.0;
        n.pulse_b_open = true;
    }
    if let Some(prev) = n.prev_pa {
        if prev != pa {
            n.pulse_b_open = false;
        }
    }
    n.prev_data = data;
    n.prev_pa = Some(pa);

    let a_in = if n.pulse_a_left > 0.0 {
        let frac = (n.pulse_a_left / dt).min(1.0);
        n.pulse_a_left -= dt;
        frac
    } else {
        0.0
    };
    let b_in = f64::from(u8::from(n.pulse_b_open)) + f64::from(u8::from(pa && aux));

    let k = -(-dt / cfg.rc_tau).exp_m1();
    n.filt_a += (0.5 * a_in - n.filt_a) * k;
    n.filt_b += (b_in - n.filt_b) * k;

    n.v_ctrl += dt * (cfg.loop_gain * (n.filt_a - n.filt_b) - n.v_ctrl / cfg.leak_tau);
    let target = cfg.delay_for(n.v_ctrl).clamp(cfg.delay_min, cfg.delay_max);
    let kd = -(-dt / cfg.loop_tau).exp_m1();
    n.delay = (n.delay + (target - n.delay) * kd).clamp(cfg.delay_min, cfg.delay_max);
    Ok(n)
}

/// One constant-level stretch of the DLL input stream.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Symbol {
    pub level: bool,
    pub duration: f64,
    pub aux: bool,
}

/// Timed symbol stream feeding the delay line; repeats when read past its end.
#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    symbols: Vec<Symbol>,
    starts: Vec<f64>,
    total: f64,
    offset: f64,
}

impl Schedule {
    pub fn new(symbols: Vec<Symbol>) -> Self {
        let mut starts = Vec::with_capacity(symbols.len());
        let mut t = 0.0;
        for s in &symbols {
            starts.push(t);
            t += s.duration;
        }
        Self {
            symbols,
            starts,
            total: t,
            offset: 0.0,
        }
    }

    /// Same stream starting at `offset` instead of 0.
    pub fn starting_at(mut self, offset: f64) -> Self {
        self.offset = offset;
        self
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    /// Data bits at their own rate with no auxiliary slots.
    pub fn plain(data: &BitStream) -> Self {
        let tb = data.bit_period();
        Self::new(
            data.bits()
                .iter()
                .map(|&b| Symbol {
                    level: b,
                    duration: tb,
                    aux: false,
                })
                .collect(),
        )
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    pub fn total_duration(&self) -> f64 {
        self.total
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// Symbol in force at time `t`; times before the start read as idle "0".
    pub fn at(&self, t: f64) -> Symbol {
        const IDLE: Symbol = Symbol {
            level: false,
            duration: 0.0,
            aux: false,
        };
        let t = t - self.offset;
        if self.symbols.is_empty() || t < 0.0 {
            return IDLE;
        }
        let tt = t % self.total;
        let i = self.starts.partition_point(|&s| s <= tt).saturating_sub(1);
        self.symbols[i]
    }
}

/// Appends a quarter-period "1" after every data bit.
pub fn insert_aux_bits(data: &BitStream, period: f64) -> Schedule {
    let tb = data.bit_period();
    let mut symbols = Vec::with_capacity(2 * data.len());
    for &b in data.bits() {
        symbols.push(Symbol {
            level: b,
            duration: tb,
            aux: false,
        });
        symbols.push(Symbol {
            level: true,
            duration: period / 4.0,
            aux: true,
        });
    }
    Schedule::new(symbols)
}

/// Data start time for a PA output `cos(2πt/T)`: the lead lock then needs a
/// delay of 3T/4 and the lag point sits at T/4, both inside the default
/// delay range, and the lead point's capture range covers the whole line.
pub fn data_start_offset(period: f64) -> f64 {
    0.75 * period
}

/// `measured_lead − T/4`, wrapped into (−T/2, T/2].
pub fn lock_error(cfg: &DllConfig, measured_lead: f64) -> f64 {
    let p = cfg.period;
    let mut e = (measured_lead - p / 4.0) % p;
    if e > p / 2.0 {
        e -= p;
    } else if e <= -p / 2.0 {
        e += p;
    }
    e
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryPoint {
    pub t: f64,
    pub delay: f64,
    pub v_ctrl: f64,
    pub filt_a: f64,
    pub filt_b: f64,
    pub lock_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DllRun {
    pub state: DllState,
    pub trajectory: Vec<TrajectoryPoint>,
    /// Symbol period whose boundaries are the aligned edges, s.
    pub symbol_period: f64,
}

impl DllRun {
    /// Delay of the final state.
    pub fn delay(&self) -> f64 {
        self.state.delay
    }

    pub fn final_lock_error(&self) -> f64 {
        self.trajectory.last().map_or(f64::NAN, |p| p.lock_error)
    }
}

/// Rising zero crossings of `w`, linearly interpolated.
pub fn rising_crossings(w: &Waveform) -> Vec<f64> {
    let x = w.samples();
    let dt = w.dt();
    let mut out = Vec::new();
    for i in 1..x.len() {
        if x[i - 1] < 0.0 && x[i] >= 0.0 {
            let frac = -x[i - 1] / (x[i] - x[i - 1]);
            out.push(w.time(i - 1) + frac * dt);
        }
    }
    out
}

/// Time from `t_edge` to the next rising crossing in `crossings`.
pub fn lead_to_next(crossings: &[f64], t_edge: f64) -> Option<f64> {
    let i = crossings.partition_point(|&c| c < t_edge);
    crossings.get(i).map(|c| c - t_edge)
}

/// Steps the loop for `duration` against the PA output `pa`.
///
/// Edges whose alignment is reported are the boundaries of the repeating
/// symbol (data bit plus its auxiliary slot, if any) shifted by the delay.
/// `locked` is set when every recorded lock error in the trailing 10 % of the
/// run is below 0.02·T and the phase detector saw edges in that window.
pub fn dll_run(schedule: &Schedule, pa: &Waveform, cfg: &DllConfig, duration: f64, init: DllState) -> Result<DllRun> {
    cfg.validate()?;
    if schedule.is_empty() {
        return invalid("dll schedule", "no symbols");
    }
    if pa.t0() > 0.0 || pa.t_end() < duration {
        return invalid(
            "pa waveform",
            format!(
                "covers [{}, {}] s but the run needs [0, {duration}] s",
                pa.t0(),
                pa.t_end()
            ),
        );
    }
    let syms = schedule.symbols();
    let symbol_period = syms[0].duration + syms.get(1).filter(|s| s.aux).map_or(0.0, |s| s.duration);
    let crossings = rising_crossings(pa);
    let pa_x = pa.samples();
    let steps = (duration / cfg.step_dt).floor() as usize;
    let record_every = ((symbol_period / cfg.step_dt).round() as usize).max(1);
    let tail_start = 0.9 * duration;

    let mut s = init;
    let mut traj = Vec::with_capacity(steps / record_every + 1);
    let mut edges_in_tail = 0usize;
    for k in 0..steps {
        let t = k as f64 * cfg.step_dt;
        let sym = schedule.at(t - s.delay);
        let pa_sq = u8::from(pa_x[pa.nearest_index(t)] > 0.0);
        let before = s.prev_data;
        s = dll_step_aux(&s, cfg, pa_sq, u8::from(sym.level), u8::from(sym.aux))?;
        if t >= tail_start && before && !sym.level {
            edges_in_tail += 1;
        }
        if k % record_every == 0 || k + 1 == steps {
            let off = schedule.offset();
            let t_nom = off + ((t - s.delay - off) / symbol_period).floor() * symbol_period;
            let t_edge = t_nom + s.delay;
            let err = lead_to_next(&crossings, t_edge).map_or(f64::NAN, |l| lock_error(cfg, l));
            traj.push(TrajectoryPoint {
                t,
                delay: s.delay,
                v_ctrl: s.v_ctrl,
                filt_a: s.filt_a,
                filt_b: s.filt_b,
                lock_error: err,
            });
        }
    }
    let tol = 0.02 * cfg.period;
    let tail: Vec<&TrajectoryPoint> = traj.iter().filter(|p| p.t >= tail_start).collect();
    s.locked = edges_in_tail > 0 && !tail.is_empty() && tail.iter().all(|p| p.lock_error.abs() < tol);
    Ok(DllRun {
        state: s,
        trajectory: traj,
        symbol_period,
    })
}

/// Trajectory as CSV with a header row.
pub fn trajectory_csv(traj: &[TrajectoryPoint]) -> String {
    let mut out = String::from("t_s,delay_s,v_ctrl,filt_a,filt_b,lock_error_s\n");
    for p in traj {
        let _ = writeln!(
            out,
            "{:.6e},{:.6e},{:.6e},{:.6e},{:.6e},{:.6e}",
            p.t, p.delay, p.v_ctrl, p.filt_a, p.filt_b, p.lock_error
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lock_error_wraps() {
        let cfg = DllConfig::for_period(1.093e-9);
        let t = cfg.period;
        assert_eq!(lock_error(&cfg, t / 4.0), 0.0);
        assert!((lock_error(&cfg, t / 2.0) - t / 4.0).abs() < 1e-24);
        assert!((lock_error(&cfg, t / 4.0 - 30e-12) + 30e-12).abs() < 1e-21);
        assert!((lock_error(&cfg, 3.0 * t / 4.0) - t / 2.0).abs() < 1e-21);
        assert!((lock_error(&cfg, t + t / 4.0)).abs() < 1e-21);
    }

    #[test]
    fn non_binary_input_is_rejected() {
        let cfg = DllConfig::for_period(1e-9);
        let s = DllState::at_delay(&cfg, 0.5e-9);
        assert!(dll_step(&s, &cfg, 2, 0).is_err());
        assert!(dll_step(&s, &cfg, 0, 7).is_err());
    }

    #[test]
    fn schedule_lookup_wraps_and_idles_before_start() {
        let b = BitStream::new(vec![true, false], 1e9).unwrap();
        let s = insert_aux_bits(&b, 1e-9);
        assert!(!s.at(-1e-12).level);
        assert!(s.at(0.5e-9).level);
        assert!(s.at(1.1e-9).aux);
        assert!(!s.at(1.5e-9).level);
        assert!(s.at(2.4e-9).aux);
        assert!(s.at(2.5e-9 + 0.5e-9).level);
    }
}
