use uwbsim::report::{summary, write_outputs};
use uwbsim::{run_scenario, Mode, Scenario, SpectralMask};

fn run(text: &str) -> uwbsim::run::LinkReport {
    run_scenario(&Scenario::parse(text).unwrap(), &SpectralMask::fcc_indoor()).unwrap()
}

#[test]
fn wired_wired_at_max_compliant_power_passes_the_mask() {
    let r = run("mode = \"wired_wired\"\nn_bits = 512\n");
    assert!(r.pass_mask);
    assert!(r.mask.min_margin().unwrap() >= 0.0);
    let (lo, hi) = r.occupied_band.unwrap();
    assert!(lo >= 2.7e9 && hi <= 5.3e9, "{lo} .. {hi}");
    assert!(r.dll.locked);
    assert_eq!(r.ber.n_errors, 0);
}

#[test]
fn wired_wireless_at_minus_one_dbm_matches_the_budget() {
    let r = run("mode = \"wired_wireless\"\nn_bits = 4096\np_out_dbm = -1.0\n[channel]\ndistance = 1.0\n");
    assert!((r.rx_power + 59.0).abs() <= 0.5, "rx {}", r.rx_power);
    assert!((r.snr - 11.0).abs() <= 0.7, "snr {}", r.snr);
    assert!((r.noise_floor + 70.0).abs() <= 0.2);
    assert!((r.tx_efficiency - 21.35).abs() < 0.1);
    assert!(!r.pass_mask);
}

#[test]
fn all_zeros_through_cds_raises_no_false_alarms() {
    let r = run(
        "mode = \"wired_wireless\"\nn_bits = 10000\ndata = \"zeros\"\np_out_dbm = -1.0\n\
         bit_rate = 91.5e6\nsample_rate = 80e9\n[detection]\ndetector = \"cds\"\n",
    );
    assert_eq!(r.ber.n_bits, 10_000);
    assert_eq!(r.ber.n_errors, 0);
    assert!(r.occupied_band.is_none());
}

#[test]
fn wired_reports_never_mention_the_power_link() {
    for mode in ["wired_wired", "wired_wireless"] {
        let r = run(&format!("mode = \"{mode}\"\nn_bits = 256\n"));
        assert!(r.power_link.is_none());
        assert!(!summary(&r).contains("power link"));
    }
    let r = run("mode = \"all_wireless\"\nn_bits = 256\n[power_link]\ni_load = 4e-3\n");
    assert_eq!(r.mode, Mode::AllWireless);
    let p = r.power_link.unwrap();
    assert!((p.efficiency - 28.0).abs() <= 2.0);
    assert!(p.regulated);
    assert!(summary(&r).contains("power link"));
}

#[test]
fn output_files_are_written() {
    let r = run("mode = \"wired_wired\"\nn_bits = 256\n");
    let dir = tempfile::tempdir().unwrap();
    write_outputs(&r, dir.path(), true).unwrap();
    for f in [
        "report.csv",
        "mask.csv",
        "spectrum.csv",
        "dll_trajectory.csv",
        "summary.txt",
        "radiated.uwbw",
    ] {
        assert!(dir.path().join(f).metadata().unwrap().len() > 0, "{f}");
    }
    let spec = std::fs::read_to_string(dir.path().join("spectrum.csv")).unwrap();
    assert!(spec.starts_with("freq_hz,psd_dbm_per_mhz\n"));
}
