//! Fixed-precision number formatting shared by every CSV writer.

/// Formats `x` with 12 significant digits, `%.12g` style: trailing zeros
/// trimmed, exponent form outside `[1e-5, 1e12)`.
pub fn sig12(x: f64) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    // Round first so the exponent reflects the rounded mantissa (9.9999999999995 -> 10).
    let sci = format!("{:.11e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        trim_zeros(format!("{:.*}", decimals, x))
    } else {
        format!("{}e{}", trim_zeros(mantissa.to_string()), exp)
    }
}

/// Value after a round trip through [`sig12`].
pub fn round12(x: f64) -> f64 {
    parse_f64(&sig12(x)).unwrap_or(x)
}

pub fn parse_f64(s: &str) -> Option<f64> {
    match s.trim() {
        "NaN" | "nan" => Some(f64::NAN),
        "inf" => Some(f64::INFINITY),
        "-inf" => Some(f64::NEG_INFINITY),
        t => t.parse().ok(),
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formats_like_printf_g() {
        assert_eq!(sig12(0.0), "0");
        assert_eq!(sig12(1.0), "1");
        assert_eq!(sig12(2.0 / 3.0), "0.666666666667");
        assert_eq!(sig12(-0.25), "-0.25");
        assert_eq!(sig12(123456.789), "123456.789");
        assert_eq!(sig12(1e-7), "1e-7");
        assert_eq!(sig12(1.5e13), "1.5e13");
        assert_eq!(sig12(9.9999999999995), "10");
        assert_eq!(sig12(f64::NAN), "NaN");
    }

    #[test]
    fn round_trip_is_idempotent() {
        for x in [std::f64::consts::PI, 1.0 / 7.0, -3.3e-9, 7.25e20] {
            let once = round12(x);
            assert_eq!(round12(once), once);
            assert!(((once - x) / x).abs() < 1e-11);
        }
    }
}
