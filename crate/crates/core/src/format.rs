//! Number formatting for reports: a fixed count of significant digits,
//! trailing zeros kept (`%#g`-style).

/// Formats `value` with `digits` significant digits. Uses scientific
/// notation outside `1e-5 <= |value| < 10^digits`.
pub fn sig(value: f64, digits: usize) -> String {
    let digits = digits.max(1);
    if !value.is_finite() {
        return value.to_string();
    }
    if value == 0.0 {
        return format!("{:.*}", digits - 1, 0.0);
    }
    let sci = format!("{:.*e}", digits - 1, value);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -5 || exp >= digits as i32 {
        return format!("{mantissa}e{exp}");
    }
    let decimals = (digits as i32 - 1 - exp).max(0) as usize;
    format!("{:.*}", decimals, value)
}

/// Five significant digits, the precision used in every printed report.
pub fn sig5(value: f64) -> String {
    sig(value, 5)
}
