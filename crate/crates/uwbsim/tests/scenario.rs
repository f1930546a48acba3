use uwbsim::scenario::{DataPattern, PowerSetting};
use uwbsim::{Mode, Scenario};

fn err(text: &str) -> String {
    Scenario::parse(text).unwrap_err().to_string()
}

#[test]
fn minimal_wired_wired_takes_defaults() {
    let s = Scenario::parse("mode = \"wired_wired\"\n").unwrap();
    assert_eq!(s.mode, Mode::WiredWired);
    assert_eq!(s.p_out, PowerSetting::MaxCompliant);
    assert_eq!(s.data, DataPattern::Prbs);
    assert!(s.power_link.is_none());
    assert_eq!(s, Scenario::new(Mode::WiredWired));
}

#[test]
fn all_wireless_without_power_link_names_the_section() {
    let e = err("mode = \"all_wireless\"\n");
    assert!(e.contains("[power_link]"), "{e}");
}

#[test]
fn wired_modes_reject_a_power_link_section() {
    let e = err("mode = \"wired_wireless\"\n[power_link]\nk = 0.03\n");
    assert!(e.contains("power_link"), "{e}");
}

#[test]
fn misspelled_key_suggests_the_real_one() {
    let e = err("mode = \"wired_wireless\"\n[channel]\nantena_gain = 3.0\n");
    assert!(e.contains("channel.antena_gain"), "{e}");
    assert!(e.contains("did you mean \"gain_cal\""), "{e}");
}

#[test]
fn unknown_section_and_missing_mode_are_errors() {
    assert!(err("mode = \"wired_wired\"\n[antena]\ngain = 1.0\n").contains("antena"));
    assert!(err("n_bits = 10\n").contains("mode"));
    assert!(err("mode = \"wireless\"\n").contains("mode"));
}

#[test]
fn bad_values_carry_the_key_path() {
    assert!(err("mode = \"wired_wired\"\nn_bits = -3\n").contains("n_bits"));
    assert!(err("mode = \"wired_wired\"\n[channel]\ndistance = \"far\"\n").contains("channel.distance"));
    assert!(err("mode = \"wired_wired\"\nbit_rate = 300e6\n").contains("bit_rate"));
}

#[test]
fn shipped_presets_load() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    for f in ["wired_wired", "wired_wireless", "all_wireless", "zeros_cds"] {
        let s = Scenario::load(&dir.join(format!("{f}.toml"))).unwrap_or_else(|e| panic!("{f}: {e}"));
        s.validate().unwrap();
    }
}
