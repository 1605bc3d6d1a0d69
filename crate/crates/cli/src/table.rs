//! CSV output with a header row and 15 significant digits.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::CliError;

/// Like C's `%.15g`.
pub fn format_sig(v: f64) -> String {
    const DIGITS: i32 = 15;
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let sci = format!("{:.*e}", (DIGITS - 1) as usize, v);
    let (mantissa, exp) = sci.split_once('e').unwrap();
    let exp: i32 = exp.parse().unwrap();
    if !(-4..DIGITS).contains(&exp) {
        let m = mantissa.trim_end_matches('0').trim_end_matches('.');
        format!("{m}e{exp}")
    } else {
        let fixed = format!("{:.*}", (DIGITS - 1 - exp) as usize, v);
        if fixed.contains('.') {
            fixed.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            fixed
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<f64>>,
    /// Lines written after the rows, each prefixed with `# `.
    pub trailer: Vec<String>,
}

impl Table {
    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|v| format_sig(*v)).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        for line in &self.trailer {
            let _ = writeln!(out, "# {line}");
        }
        out
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        std::fs::write(path, self.to_csv()).map_err(|e| CliError::io(path, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digits() {
        assert_eq!(format_sig(0.0), "0");
        assert_eq!(format_sig(1.0), "1");
        assert_eq!(format_sig(-2.5), "-2.5");
        assert_eq!(format_sig(0.1), "0.1");
        assert_eq!(format_sig(1.0 / 3.0), "0.333333333333333");
        assert_eq!(format_sig(2.0f64.sqrt() * 2.0), "2.82842712474619");
        assert_eq!(format_sig(1e-7), "1e-7");
        assert_eq!(format_sig(123456.789), "123456.789");
        assert_eq!(format_sig(3.14159265358979e20), "3.14159265358979e20");
        assert_eq!(format_sig(std::f64::consts::PI), "3.14159265358979");
    }

    #[test]
    fn csv_layout() {
        let t = Table { header: vec!["a", "b"], rows: vec![vec![1.0, 0.5]], trailer: vec!["max=1".into()] };
        assert_eq!(t.to_csv(), "a,b\n1,0.5\n# max=1\n");
    }
}
