//! Receiver: notch-triggered segment capture, correlated-sample slope
//! detection, bit recovery, pulse averaging and BER statistics.

pub mod ber;
pub mod detect;
pub mod matched;
pub mod montecarlo;

pub use ber::{analytic_ook_ber, average_pulses, ber_compute, BerResult};
pub use detect::{capture_segments, cds_detect, notch_triggers, recover_bits, Capture, DetectionConfig, Segment};
pub use matched::{decide_with_preamble, slot_statistics, Decision, SlotGrid};
pub use montecarlo::{simulate_link, Detector, Drive, LinkOutcome, LinkSim};
