//! CSV emission helpers shared by the trajectory, bound, ensemble and
//! regularity reports.

/// Decimal rendering at 17 significant digits: enough for a bit-exact
//  f64 round trip.
pub fn g17(x: f64) -> String {
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".to_string() } else { "0".to_string() };
    }
    format!("{x:.16e}")
}

/// Parses a value produced by [`g17`].
pub fn parse_g17(s: &str) -> Option<f64> {
    s.parse::<f64>().ok()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn signed_zero_roundtrips() {
        assert_eq!(parse_g17(&g17(0.0)).unwrap().to_bits(), 0.0f64.to_bits());
        assert_eq!(parse_g17(&g17(-0.0)).unwrap().to_bits(), (-0.0f64).to_bits());
    }

    proptest! {
        /// 17 significant digits round-trip every finite f64 bit-exactly.
        #[test]
        fn roundtrip_bits(x in proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL | proptest::num::f64::ZERO) {
            let back = parse_g17(&g17(x)).unwrap();
            prop_assert_eq!(back.to_bits(), x.to_bits());
        }
    }
}
