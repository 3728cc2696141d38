//! Number formatting for human-facing reports.

/// Formats `x` with six significant digits, `%g` style.
pub fn sig6(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let exp = x.abs().log10().floor() as i32;
    let s = if (-4..6).contains(&exp) {
        let decimals = (5 - exp).max(0) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        let s = format!("{x:.5e}");
        match s.split_once('e') {
            Some((mantissa, e)) => format!("{}e{e}", trim_zeros(mantissa.to_string())),
            None => s,
        }
    };
    // rounding may carry into a new digit (e.g. 999999.7); fall back to exponent form
    if s.trim_start_matches('-').split('.').next().map_or(0, str::len) > 6 {
        return sig6_exp(x);
    }
    s
}

fn sig6_exp(x: f64) -> String {
    let s = format!("{x:.5e}");
    match s.split_once('e') {
        Some((mantissa, e)) => format!("{}e{e}", trim_zeros(mantissa.to_string())),
        None => s,
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
    use super::sig6;

    #[test]
    fn six_significant_digits() {
        assert_eq!(sig6(0.0), "0");
        assert_eq!(sig6(1.0), "1");
        assert_eq!(sig6(0.00127571), "0.00127571");
        assert_eq!(sig6(0.001275714), "0.00127571");
        assert_eq!(sig6(123456.7), "123457");
        assert_eq!(sig6(-2.5), "-2.5");
        assert_eq!(sig6(3.4395e-6), "3.4395e-6");
        assert_eq!(sig6(1.23456789e9), "1.23457e9");
        assert_eq!(sig6(999999.7), "1e6");
    }
}
