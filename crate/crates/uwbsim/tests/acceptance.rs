//! Acceptance suite: one line per criterion, nonzero exit if any fails.

use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use uwb_core::channel::{rx_power_budget, ChannelConfig};
use uwb_core::dll::{data_start_offset, dll_run, insert_aux_bits, DllConfig, DllState, Schedule};
use uwb_core::power_link::{
    detune_step, link_efficiency, regulation_time_constant, vco_free_max_rate, vco_free_required_q, PowerLinkParams,
    RegulatorState,
};
use uwb_core::prbs::prbs_generate;
use uwb_core::rx::analytic_ook_ber;
use uwb_core::tx::chain::pa_output;
use uwb_core::tx::{
    burst_efficiency_sampled, chip_efficiency, detect_pulses, pulse_rate, steady_state_efficiency,
    transient_pulse_efficiency, transmit, PulseBurstSpec, TankParams,
};
use uwb_core::BitStream;
use uwbsim::report::write_outputs;
use uwbsim::sweep::write_rows;
use uwbsim::{run_scenario, sweep, Scenario, SpectralMask, SweepRow};

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn preset(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

fn c1_efficiency() -> Outcome {
    let ss = steady_state_efficiency(50.0, 50.0).map_err(|e| e.to_string())?;
    let chip = chip_efficiency(-1.0, 3.72).map_err(|e| e.to_string())?;
    check(
        ss == 50.0 && (chip - 21.35).abs() <= 0.1,
        format!("steady state {ss} %, chip {chip:.3} %"),
    )
}

fn c2_two_q() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let p = TankParams {
            l: 10f64.powf(rng.random_range(-10.0..-6.0)),
            c: 10f64.powf(rng.random_range(-14.0..-10.0)),
            r_loss: 10f64.powf(rng.random_range(-2.0..1.5)),
            r_antenna: 10f64.powf(rng.random_range(-2.0..1.5)),
            ..TankParams::default()
        };
        worst = worst.max((p.omega0() / p.alpha() / (2.0 * p.q()) - 1.0).abs());
    }
    check(
        worst <= 1e-9,
        format!("worst relative error {worst:.1e} over 1000 tanks"),
    )
}

fn c3_transient() -> Outcome {
    let mut p = TankParams::default();
    let r = p.omega0() * p.l / 20.0;
    p.r_loss = r / 2.0;
    p.r_antenna = r / 2.0;
    let spec = PulseBurstSpec::new(3.0 * p.period()).map_err(|e| e.to_string())?;
    let closed = transient_pulse_efficiency(&p, &spec).map_err(|e| e.to_string())?;
    let sim = burst_efficiency_sampled(&p, &spec, 80e9).map_err(|e| e.to_string())?;
    check(
        (closed - 10.2).abs() <= 0.2 && (sim / closed - 1.0).abs() < 0.01,
        format!("closed form {closed:.3} %, sampled {sim:.3} %"),
    )
}

fn c4_pulse_rate() -> Outcome {
    let s = Scenario::load(&preset("wired_wired.toml")).map_err(|e| e.to_string())?;
    let tx = s.tx();
    let t = tx.tank.period();
    let n = 16;
    let slot = 4.0 * t;
    let edges: Vec<f64> = (0..n).map(|k| data_start_offset(t) + k as f64 * slot).collect();
    let dur = data_start_offset(t) + (n + 1) as f64 * slot;
    let bits = BitStream::new(vec![true; n], 1.0 / slot).map_err(|e| e.to_string())?;
    let v3 = transmit(&tx, &bits, &edges, dur, 80e9).map_err(|e| e.to_string())?.v3;
    // skip the gating transients at both ends
    let inner = v3
        .slice(v3.nearest_index(edges[2]), v3.nearest_index(edges[n - 2]))
        .map_err(|e| e.to_string())?;
    let peak = inner.samples().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let times = detect_pulses(&inner, 0.5 * peak, 0.2 * t).map_err(|e| e.to_string())?;
    let rate = pulse_rate(&times).ok_or("no pulses")?;
    check(
        (rate / 1.83e9 - 1.0).abs() <= 0.01,
        format!("{:.4} GHz from {} pulses", rate / 1e9, times.len()),
    )
}

fn c5_spectrum() -> Outcome {
    let s = Scenario::load(&preset("wired_wired.toml")).map_err(|e| e.to_string())?;
    let r = run_scenario(&s, &SpectralMask::fcc_indoor()).map_err(|e| e.to_string())?;
    let (lo, hi) = r.occupied_band.ok_or("no emission")?;
    let m = r.mask.min_margin().ok_or("mask not evaluated")?;
    check(
        lo >= 2.7e9 && hi <= 5.3e9 && r.pass_mask && m >= 0.0,
        format!(
            "-10 dB band {:.3}..{:.3} GHz, min margin {m:.3} dB at {:.2} dBm",
            lo / 1e9,
            hi / 1e9,
            r.p_out_dbm
        ),
    )
}

fn c6_budget() -> Outcome {
    let b = rx_power_budget(-1.0, &ChannelConfig::default()).map_err(|e| e.to_string())?;
    check(
        (b.rx_power + 59.0).abs() <= 0.5 && (b.noise_floor + 70.0).abs() <= 0.2 && (b.snr - 11.0).abs() <= 0.7,
        format!(
            "rx {:.2} dBm, floor {:.2} dBm, snr {:.2} dB",
            b.rx_power, b.noise_floor, b.snr
        ),
    )
}

/// SNR at which the analytic curve reaches `ber`.
fn analytic_snr_for(ber: f64) -> f64 {
    let (mut lo, mut hi) = (-10.0, 30.0);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if analytic_ook_ber(mid) > ber {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn c7_ber() -> Outcome {
    let snr6 = analytic_snr_for(1e-6);
    let snr3 = analytic_snr_for(1e-3);
    let mut s = Scenario::load(&preset("wired_wireless.toml")).map_err(|e| e.to_string())?;
    s.n_bits = 30_000;
    s.sample_rate = 20e9;
    s.target_snr_db = Some(snr3);
    let r = run_scenario(&s, &SpectralMask::fcc_indoor()).map_err(|e| e.to_string())?;
    let ratio = r.ber.ber / 1e-3;
    check(
        (10.5..=11.0).contains(&snr6) && (1.0 / 3.0..=3.0).contains(&ratio),
        format!(
            "analytic 1e-6 at {snr6:.2} dB; at {snr3:.2} dB Monte Carlo {:.2e} ({} / {})",
            r.ber.ber, r.ber.n_errors, r.ber.n_bits
        ),
    )
}

/// RX power where log BER crosses `target`, linear in between points.
fn crossing(rows: &[SweepRow], target: f64) -> Option<f64> {
    rows.windows(2).find_map(|w| {
        let (a, b) = (w[0], w[1]);
        if a.ber >= target && b.ber < target && b.ber > 0.0 {
            let (la, lb, lt) = (a.ber.log10(), b.ber.log10(), target.log10());
            Some(a.rx_power_dbm + (la - lt) / (la - lb) * (b.rx_power_dbm - a.rx_power_dbm))
        } else if a.ber >= target && b.ber == 0.0 {
            // no errors: bound by the upper edge of the interval
            let (la, lt) = (a.ber.log10(), target.log10());
            let lb = b.ci_hi.log10();
            Some(a.rx_power_dbm + (la - lt) / (la - lb).max(1e-9) * (b.rx_power_dbm - a.rx_power_dbm))
        } else {
            None
        }
    })
}

fn c8_averaging() -> Outcome {
    let mask = SpectralMask::fcc_indoor();
    let curve = |n_avg: usize, p: &[f64]| -> Result<Vec<SweepRow>, String> {
        let mut s = Scenario::load(&preset("wired_wireless.toml")).map_err(|e| e.to_string())?;
        s.n_bits = 12_000;
        s.n_avg = n_avg;
        let v: Vec<String> = p.iter().map(|x| x.to_string()).collect();
        sweep(&s, &mask, "p_out_dbm", &v, 0, 1).map_err(|e| e.to_string())
    };
    let single = curve(1, &[-8.0, -7.0, -6.0, -5.0, -4.0, -3.0])?;
    let avg = curve(5, &[-15.0, -14.0, -13.0, -12.0, -11.0, -10.0, -9.0])?;
    let x1 = crossing(&single, 1e-3).ok_or("n_avg 1 curve does not cross 1e-3")?;
    let x5 = crossing(&avg, 1e-3).ok_or("n_avg 5 curve does not cross 1e-3")?;
    let delta = x1 - x5;
    check(
        (3.0..=7.0).contains(&delta),
        format!("1e-3 at {x1:.2} dBm single, {x5:.2} dBm averaged, shift {delta:.2} dB"),
    )
}

fn c9_dll() -> Outcome {
    let tank = TankParams {
        drive_freq: Some(TankParams::default().f0()),
        ..TankParams::default()
    };
    let t = tank.period();
    let cfg = DllConfig::for_period(t);
    let run_time = 2e-6;
    let pa = pa_output(&tank, run_time + 5e-9, 80e9).map_err(|e| e.to_string())?;
    let bits = prbs_generate(15, 1, 600).map_err(|e| e.to_string())?;
    let aux = insert_aux_bits(
        &BitStream::new(bits.clone(), 1.0 / (4.0 * t - t / 4.0)).map_err(|e| e.to_string())?,
        t,
    )
    .starting_at(data_start_offset(t));
    let plain = Schedule::plain(&BitStream::new(bits, 1.0 / (4.0 * t)).map_err(|e| e.to_string())?)
        .starting_at(data_start_offset(t));
    let (mut locked, mut worst, mut false_locks) = (0, 0.0f64, 0);
    for k in 0..50 {
        let d0 = cfg.delay_min + cfg.span() * k as f64 / 49.0;
        let init = DllState::at_delay(&cfg, d0);
        let r = dll_run(&aux, &pa, &cfg, run_time, init).map_err(|e| e.to_string())?;
        if r.state.locked {
            locked += 1;
            worst = worst.max(r.final_lock_error().abs());
        }
        let r = dll_run(&plain, &pa, &cfg, run_time, init).map_err(|e| e.to_string())?;
        if (r.delay() - 0.25 * t).abs() < 0.02 * t {
            false_locks += 1;
        }
    }
    check(
        locked > 0 && worst < 0.02 * t && false_locks >= 1,
        format!(
            "aux bits: {locked}/50 locked, worst error {:.3} T; without: {false_locks}/50 at the T/4 lag",
            worst / t
        ),
    )
}

fn c10_power_link() -> Outcome {
    let s = Scenario::load(&preset("all_wireless.toml")).map_err(|e| e.to_string())?;
    let p: PowerLinkParams = s.power_link.ok_or("preset lacks [power_link]")?.params;
    let e4 = link_efficiency(&p, 4e-3).map_err(|e| e.to_string())?;
    let e10 = link_efficiency(&p, 10e-3).map_err(|e| e.to_string())?;

    // settle, then raise the source by half
    let c0 = p.c_resonant();
    let tau_min = |q: &PowerLinkParams| {
        (1..1000)
            .map(|i| c0 * (q.c_min_ratio + (1.0 - q.c_min_ratio) * i as f64 / 1000.0))
            .map(|c| regulation_time_constant(q, c))
            .fold(f64::INFINITY, f64::min)
    };
    let mut st = RegulatorState::tuned(&p);
    let dt = tau_min(&p) / 200.0;
    for _ in 0..100_000 {
        st = detune_step(&st, &p, dt).map_err(|e| e.to_string())?;
    }
    let stepped = PowerLinkParams {
        v_source: 1.5 * p.v_source,
        ..p
    };
    let tau = regulation_time_constant(&stepped, st.c_tune);
    let dt = tau_min(&stepped) / 200.0;
    let mut st = RegulatorState::at(&stepped, st.c_tune);
    let mut overshoot: f64 = 0.0;
    let mut t = 0.0;
    while t < 20.0 * tau {
        overshoot = overshoot.max(st.v_rect - stepped.limiter_level());
        st = detune_step(&st, &stepped, dt).map_err(|e| e.to_string())?;
        t += dt;
    }
    let recovered = (st.v_rect - p.v_target).abs() <= 0.02 * p.v_target;
    check(
        (e4 - 28.0).abs() <= 2.0 && (e10 - 40.0).abs() <= 2.0 && recovered && overshoot <= 1e-12,
        format!(
            "{e4:.2} % at 4 mA, {e10:.2} % at 10 mA; after +50 % step {:.3} V, limiter overshoot {overshoot:.1e} V",
            st.v_rect
        ),
    )
}

fn c11_vco_free() -> Outcome {
    let f0 = 915e6;
    let q = vco_free_required_q(f0 / 5.0, f0, 20.0).map_err(|e| e.to_string())?;
    let rate = vco_free_max_rate(13.67e6).map_err(|e| e.to_string())?;
    check(
        q == 5.0 * 20.0 && (20e6..=30e6).contains(&rate),
        format!("Q at f0/5 = {q}, max rate at 13.67 MHz = {:.2} Mb/s", rate / 1e6),
    )
}

fn read_csvs(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .map(|p| {
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                std::fs::read(&p).unwrap(),
            )
        })
        .collect();
    files.sort();
    files
}

fn c12_determinism() -> Outcome {
    let mask = SpectralMask::fcc_indoor();
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut compared = 0;
    for name in ["wired_wired", "wired_wireless", "all_wireless"] {
        let mut s = Scenario::load(&preset(&format!("{name}.toml"))).map_err(|e| e.to_string())?;
        s.n_bits = 1024;
        let mut outs = Vec::new();
        for run in 0..2 {
            let dir = tmp.path().join(format!("{name}{run}"));
            let r = run_scenario(&s, &mask).map_err(|e| e.to_string())?;
            write_outputs(&r, &dir, false).map_err(|e| e.to_string())?;
            outs.push(read_csvs(&dir));
        }
        if outs[0] != outs[1] {
            return Err(format!("{name}: CSVs differ between runs"));
        }
        compared += outs[0].len();
    }
    let mut s = Scenario::load(&preset("wired_wireless.toml")).map_err(|e| e.to_string())?;
    s.n_bits = 1024;
    let v: Vec<String> = ["-10", "-8", "-6", "-4"].iter().map(|x| x.to_string()).collect();
    let mut a = Vec::new();
    let mut b = Vec::new();
    write_rows(
        &sweep(&s, &mask, "p_out_dbm", &v, 0, 1).map_err(|e| e.to_string())?,
        &mut a,
    )
    .map_err(|e| e.to_string())?;
    write_rows(
        &sweep(&s, &mask, "p_out_dbm", &v, 0, 8).map_err(|e| e.to_string())?,
        &mut b,
    )
    .map_err(|e| e.to_string())?;
    check(
        a == b,
        format!("{compared} CSVs identical across runs; sweep rows identical with 1 and 8 jobs"),
    )
}

type Criterion = (u32, &'static str, fn() -> Outcome, Option<Duration>);

fn main() {
    let criteria: [Criterion; 12] = [
        (1, "efficiency formulas", c1_efficiency, None),
        (2, "2Q identity", c2_two_q, Some(Duration::from_secs(1))),
        (
            3,
            "transient vs steady state",
            c3_transient,
            Some(Duration::from_secs(10)),
        ),
        (4, "clipped pulse rate", c4_pulse_rate, Some(Duration::from_secs(10))),
        (5, "spectrum and mask", c5_spectrum, Some(Duration::from_secs(30))),
        (6, "link budget", c6_budget, None),
        (7, "BER consistency", c7_ber, Some(Duration::from_secs(300))),
        (8, "averaging bracket", c8_averaging, Some(Duration::from_secs(600))),
        (9, "DLL lock", c9_dll, Some(Duration::from_secs(120))),
        (10, "power link", c10_power_link, Some(Duration::from_secs(60))),
        (11, "VCO-free calculators", c11_vco_free, None),
        (12, "determinism", c12_determinism, Some(Duration::from_secs(120))),
    ];
    let mut failed = 0;
    for (n, name, f, limit) in criteria {
        let t0 = Instant::now();
        let out = f();
        let dt = t0.elapsed();
        let slow = limit.is_some_and(|l| dt > l);
        let (verdict, detail) = match &out {
            Ok(d) if !slow => ("PASS", d.clone()),
            Ok(d) => ("FAIL", format!("{d}; took longer than {:?}", limit.unwrap())),
            Err(d) => ("FAIL", d.clone()),
        };
        if verdict == "FAIL" {
            failed += 1;
        }
        println!(
            "criterion {n:>2} {verdict} {name}: {detail} [{:.1} s]",
            dt.as_secs_f64()
        );
    }
    println!("{} of 12 criteria pass", 12 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
