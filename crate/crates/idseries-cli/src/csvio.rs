//! CSV output helpers. Every float is written as `{:.16e}` so reruns with
//! the same inputs produce byte-identical files, and booleans are written
//! as the literal words `true` and `false`.

use std::path::Path;

use crate::AppError;

/// Formats a float for CSV output with 17 significant digits.
pub fn fmt_f(v: f64) -> String {
    format!("{v:.16e}")
}

/// Formats a flag for CSV output.
pub fn fmt_flag(v: bool) -> String {
    if v { "true".into() } else { "false".into() }
}

/// Writes a header line and data rows to `path` in one shot.
pub fn write_csv(path: &Path, header: &str, rows: &[Vec<String>]) -> Result<(), AppError> {
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(header);
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    std::fs::write(path, out)
        .map_err(|e| AppError::io(format!("cannot write '{}': {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_carry_seventeen_significant_digits() {
        assert_eq!(fmt_f(1.0), "1.0000000000000000e0");
        assert_eq!(fmt_f(0.5), "5.0000000000000000e-1");
        assert_eq!(fmt_f(-0.75), "-7.5000000000000000e-1");
    }

    #[test]
    fn flags_are_words() {
        assert_eq!(fmt_flag(true), "true");
        assert_eq!(fmt_flag(false), "false");
    }

    #[test]
    fn csv_layout_is_header_then_rows() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        write_csv(&path, "a,b", &[vec!["1".into(), "2".into()], vec!["3".into(), "4".into()]]).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text, "a,b\n1,2\n3,4\n");
    }
}
