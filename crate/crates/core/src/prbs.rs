//! Maximal-length LFSR sequences for BER testing.

use crate::error::{invalid, Result};

/// Default sequence order (x^15 + x^14 + 1).
pub const DEFAULT_ORDER: u32 = 15;

/// Feedback taps (1-based register stages) of a maximal-length Fibonacci LFSR
/// for each order 2..=31.
const TAPS: [&[u32]; 30] = [
    &[2, 1],
    &[3, 2],
    &[4, 3],
    &[5, 3],
    &[6, 5],
    &[7, 6],
    &[8, 6, 5, 4],
    &[9, 5],
    &[10, 7],
    &[11, 9],
    &[12, 6, 4, 1],
    &[13, 4, 3, 1],
    &[14, 5, 3, 1],
    &[15, 14],
    &[16, 15, 13, 4],
    &[17, 14],
    &[18, 11],
    &[19, 6, 2, 1],
    &[20, 17],
    &[21, 19],
    &[22, 21],
    &[23, 18],
    &[24, 23, 22, 17],
    &[25, 22],
    &[26, 6, 2, 1],
    &[27, 5, 2, 1],
    &[28, 25],
    &[29, 27],
    &[30, 6, 4, 1],
    &[31, 28],
];

/// Tap stages for `order`, highest stage first.
pub fn taps(order: u32) -> Result<&'static [u32]> {
    if !(2..=31).contains(&order) {
        return invalid("prbs order", format!("{order} not in 2..=31"));
    }
    Ok(TAPS[(order - 2) as usize])
}

/// Fibonacci LFSR emitting the top register stage each clock.
#[derive(Debug, Clone)]
pub struct Lfsr {
    state: u32,
    mask: u32,
    tap_mask: u32,
    order: u32,
}

impl Lfsr {
    pub fn new(order: u32, seed: u32) -> Result<Self> {
        let taps = taps(order)?;
        let mask = (1u32 << order) - 1;
        let state = seed & mask;
        if state == 0 {
            return invalid(
                "prbs seed",
                format!("{seed:#x} leaves the {order}-stage register all zero"),
            );
        }
        let tap_mask = taps.iter().fold(0u32, |m, &t| m | 1 << (t - 1));
        Ok(Self {
            state,
            mask,
            tap_mask,
            order,
        })
    }

    pub fn period(&self) -> u64 {
        (1u64 << self.order) - 1
    }
}

impl Iterator for Lfsr {
    type Item = bool;

    fn next(&mut self) -> Option<bool> {
        let out = (self.state >> (self.order - 1)) & 1 == 1;
        let fb = (self.state & self.tap_mask).count_ones() & 1;
        self.state = ((self.state << 1) | fb) & self.mask;
        Some(out)
    }
}

/// First `n` bits of the order-`order` m-sequence started from `seed`.
pub fn prbs_generate(order: u32, seed: u32, n: usize) -> Result<Vec<bool>> {
    if n == 0 {
        return invalid("prbs length", "n must be at least 1");
    }
    Ok(Lfsr::new(order, seed)?.take(n).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_zero_seed_and_bad_order() {
        assert!(prbs_generate(15, 0, 10).is_err());
        assert!(prbs_generate(7, 0x80, 10).is_err());
        assert!(prbs_generate(1, 1, 10).is_err());
        assert!(prbs_generate(32, 1, 10).is_err());
        assert!(prbs_generate(15, 1, 0).is_err());
    }

    #[test]
    fn every_order_up_to_20_is_maximal() {
        for order in 2..=20 {
            let mut l = Lfsr::new(order, 1).unwrap();
            let start = l.state;
            let mut steps = 0u64;
            loop {
                l.next();
                steps += 1;
                if l.state == start {
                    break;
                }
                assert!(steps <= l.period(), "order {order} overran its period");
            }
            assert_eq!(steps, l.period(), "order {order}");
        }
    }
}
