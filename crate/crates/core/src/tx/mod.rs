//! Transmitter: resonant tank, threshold clipper, OOK switch and antenna coupling.

pub mod chain;
pub mod clip;
pub mod efficiency;
pub mod pulses;
pub mod tank;

pub use chain::{transmit, Spur, TxConfig, TxStages};
pub use clip::{antenna_couple, clip_waveform, dac_quantize, ook_gate, ClipperConfig};
pub use efficiency::{
    burst_efficiency_sampled, chip_efficiency, energy_per_bit, steady_state_efficiency, transient_pulse_efficiency,
};
pub use pulses::{detect_pulses, pulse_rate};
pub use tank::{
    tank_onoff_envelope, tank_steady_state_wave, tank_wave_impaired, PulseBurstSpec, TankParams, ToneImpairments,
};
