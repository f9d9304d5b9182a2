//! Fixed 12-significant-digit number formatting shared by text, OFF and
//! JSON output.

/// `%.12g`: 12 significant digits, trailing zeros trimmed, scientific
/// notation outside `[1e-5, 1e12)`.
pub fn sig12(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("exponent digits");
    if !(-5..12).contains(&exp) {
        return format!("{}e{exp}", trim(mantissa));
    }
    let decimals = (11 - exp).max(0) as usize;
    trim(&format!("{x:.decimals$}")).to_string()
}

fn trim(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// `x` rounded to 12 significant digits, for JSON output.
pub fn round12(x: f64) -> f64 {
    if x.is_finite() {
        sig12(x).parse().unwrap_or(x)
    } else {
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formats() {
        assert_eq!(sig12(1728.0), "1728");
        assert_eq!(sig12(4.0 * 3f64.powf(5.5)), "1683.55338496");
        assert_eq!(sig12(1296.0 * 2f64.sqrt()), "1832.82077684");
        assert_eq!(sig12(-0.5), "-0.5");
        assert_eq!(sig12(1e-7), "1e-7");
        assert_eq!(sig12(1.5e-7), "1.5e-7");
        assert_eq!(sig12(123456789012345.0), "1.23456789012e14");
        assert_eq!(sig12(9.9999999999999), "10");
        assert_eq!(sig12(0.000123), "0.000123");
    }

    #[test]
    fn rounding() {
        assert_eq!(round12(1.0 / 3.0), 0.333333333333);
        assert!(round12(f64::NAN).is_nan());
    }
}
