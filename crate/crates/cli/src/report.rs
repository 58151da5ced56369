//! Fixed-format CSV helpers: dot decimal, six digits, empty cell for
//! missing values. Reports are byte-reproducible across runs.

/// Six-decimal fixed formatting.
pub fn fmt(v: f64) -> String {
    format!("{v:.6}")
}

/// Missing values render as the empty cell.
pub fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt).unwrap_or_default()
}

pub fn fmt_bool(b: bool) -> &'static str {
    if b {
        "1"
    } else {
        "0"
    }
}

/// Join one CSV row. Fields never contain commas in these reports.
pub fn row(fields: &[String]) -> String {
    fields.join(",")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formatting_is_fixed_width_decimal() {
        assert_eq!(fmt(1.0), "1.000000");
        assert_eq!(fmt(0.1234567), "0.123457");
        assert_eq!(fmt_opt(None), "");
        assert_eq!(fmt_opt(Some(2.5)), "2.500000");
    }
}
