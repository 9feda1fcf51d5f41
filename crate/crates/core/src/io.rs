//! Shared output formatting.

use std::io::{self, Write};

/// 17 significant digits, round-trip exact.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes `text` as `# `-prefixed comment lines.
pub fn write_comment_header<W: Write>(out: &mut W, text: &str) -> io::Result<()> {
    for line in text.lines() {
        writeln!(out, "# {line}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, f64::MIN_POSITIVE] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(fmt_f64(1.0), "1.0000000000000000e0");
    }

    #[test]
    fn header_prefixes_every_line() {
        let mut buf = Vec::new();
        write_comment_header(&mut buf, "a = 1\nb = 2").unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "# a = 1\n# b = 2\n");
    }
}
