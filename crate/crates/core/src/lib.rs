//! Waveform-level models for a clipped-sinusoid UWB impulse-radio
//! transmitter, its timing loop, the radio channel, the receiver and the
//! inductive power link.
//!
//! Signal processing on [`Waveform`] is generic over the sample type
//! ([`Scalar`], implemented for `f32` and `f64`). The circuit models work in
//! `f64`.

// `!(x > 0.0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod dll;
pub mod dump;
pub mod error;
pub mod filter;
pub mod power_link;
pub mod prbs;
pub mod psd;
pub mod rx;
pub mod scalar;
pub mod tx;
pub mod units;
pub mod waveform;

pub use error::{Error, Result};
pub use scalar::Scalar;
pub use waveform::{BitStream, Spectrum, Waveform};

pub type Waveform64 = Waveform<f64>;
pub type Waveform32 = Waveform<f32>;
