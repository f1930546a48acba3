//! Power unit conversions.

use crate::error::{invalid, Result};

/// Watts to dBm.
pub fn power_to_dbm(p: f64) -> Result<f64> {
    if !(p > 0.0) || !p.is_finite() {
        return invalid("power", format!("{p} W must be positive"));
    }
    Ok(10.0 * (p * 1e3).log10())
}

/// dBm to watts.
pub fn dbm_to_power(x: f64) -> f64 {
    1e-3 * 10f64.powf(x / 10.0)
}

pub fn db_to_ratio(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn ratio_to_db(r: f64) -> f64 {
    10.0 * r.log10()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn anchors() {
        assert_eq!(power_to_dbm(1e-3).unwrap(), 0.0);
        assert!((dbm_to_power(-1.0) * 1e3 - 0.794).abs() < 1e-3);
        assert!(power_to_dbm(0.0).is_err());
        assert!(power_to_dbm(-1.0).is_err());
    }
}
