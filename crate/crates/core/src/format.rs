//! Number formatting for tabular output.

/// Shortest form of `x` at 12 significant digits, following C's `%.12g`.
pub fn sig(x: f64) -> String {
    sig_digits(x, 12)
}

pub fn sig_digits(x: f64, digits: usize) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let digits = digits.max(1);
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci
        .split_once('e')
        .expect("scientific format has an exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= digits as i32 {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{}{:02}", trim_zeros(mantissa), sign, exp.abs())
    } else {
        let decimals = (digits as i32 - 1 - exp) as usize;
        trim_zeros(&format!("{:.*}", decimals, x)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_printf_g() {
        assert_eq!(sig(2.5), "2.5");
        assert_eq!(sig(1.0), "1");
        assert_eq!(sig(-0.125), "-0.125");
        assert_eq!(sig(2.0 / 3.0), "0.666666666667");
        assert_eq!(sig(2.081977523200), "2.0819775232");
        assert_eq!(sig(123456789012345.0), "1.23456789012e+14");
        assert_eq!(sig(0.00001234), "1.234e-05");
        assert_eq!(sig(0.0001234), "0.0001234");
        assert_eq!(sig(999999999999.5), "1e+12");
        assert_eq!(sig(0.0), "0");
        assert_eq!(sig(f64::INFINITY), "inf");
    }
}
