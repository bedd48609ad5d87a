//! Fixed-width float formatting shared by every text output.
//!
//! Output files are compared byte-for-byte across runs, so all writers go
//! through these helpers instead of `Display`.

/// Formats `x` with 9 significant digits in fixed notation, falling back to
/// scientific notation outside `[1e-5, 1e9)`.
pub fn fmt9(x: f64) -> String {
    if x.is_nan() {
        return "nan".to_string();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0.00000000".to_string();
    }
    let exp = x.abs().log10().floor() as i32;
    if !(-5..9).contains(&exp) {
        return format!("{:.8e}", x);
    }
    let decimals = (8 - exp).max(0) as usize;
    let s = format!("{:.*}", decimals, x);
    // Rounding can carry into a new digit (9.99999999995 -> 10.00000000);
    // re-format once with the corrected exponent.
    let digits = s.trim_start_matches('-').replace('.', "");
    let sig = digits.trim_start_matches('0').len();
    if sig > 9 && decimals > 0 {
        return format!("{:.*}", decimals - 1, x);
    }
    s
}

/// Like [`fmt9`] but strips trailing fractional zeros, so integral
/// frequencies print as integers (`15000000`).
pub fn fmt9_trim(x: f64) -> String {
    let s = fmt9(x);
    if s.contains('e') || !s.contains('.') {
        return s;
    }
    let t = s.trim_end_matches('0').trim_end_matches('.');
    if t.is_empty() || t == "-" {
        "0".to_string()
    } else {
        t.to_string()
    }
}
