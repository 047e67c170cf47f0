//! Minimal CSV emission shared by the pattern, sweep and histogram writers.

use std::fmt::Write as _;

/// Default number of significant digits in CSV cells.
pub const DEFAULT_CSV_DIGITS: usize = 9;

/// Formats `v` with `digits` significant digits, using plain notation when
/// that is exact enough and exponent notation otherwise.
pub fn fmt_sig(v: f64, digits: usize) -> String {
    let digits = digits.max(1);
    if v == 0.0 || !v.is_finite() {
        return format!("{v}");
    }
    let exp = v.abs().log10().floor() as i32;
    if (-4..15).contains(&exp) {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        let s = format!("{v:.decimals$}");
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    } else {
        format!("{:.*e}", digits - 1, v)
    }
}

/// Builds a CSV document: `#`-prefixed metadata lines, a header row, then rows.
pub fn render(metadata: &[(String, String)], header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut out = String::new();
    for (k, v) in metadata {
        let _ = writeln!(out, "# {k}: {v}");
    }
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digits() {
        assert_eq!(fmt_sig(1.0, 9), "1");
        assert_eq!(fmt_sig(0.123456789123, 9), "0.123456789");
        assert_eq!(fmt_sig(-2.5e-3, 9), "-0.0025");
        assert_eq!(fmt_sig(7.02e-7, 3), "7.02e-7");
        assert_eq!(fmt_sig(0.0, 9), "0");
        let v = 1.234_567_890_123e20;
        assert!((fmt_sig(v, 9).parse::<f64>().unwrap() / v - 1.0).abs() < 1e-8);
    }

    #[test]
    fn render_layout() {
        let doc = render(&[("a".into(), "1".into())], &["x", "y"], vec![vec!["1".into(), "2".into()]]);
        assert_eq!(doc, "# a: 1\nx,y\n1,2\n");
    }
}
