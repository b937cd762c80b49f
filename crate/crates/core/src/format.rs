//! Float formatting shared by the CSV writers.

/// Shortest decimal form of `x` after rounding to 12 significant digits.
pub fn fmt_sig(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    let rounded: f64 = format!("{x:.11e}").parse().expect("valid float literal");
    format!("{rounded}")
}

/// Fixed-point with `decimals` places, without a negative zero.
pub fn fmt_fixed(x: f64, decimals: usize) -> String {
    let s = format!("{x:.decimals$}");
    if s.starts_with('-') && s[1..].chars().all(|c| c == '0' || c == '.') {
        s[1..].to_string()
    } else {
        s
    }
}

/// `0.2352` becomes `"23.52"`.
pub fn fmt_pct(fraction: f64) -> String {
    fmt_fixed(fraction * 100.0, 2)
}
