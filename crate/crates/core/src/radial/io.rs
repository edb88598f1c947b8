//! Two-column `r value` text files with `#` header lines.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

pub fn format_two_column(header: &[String], r: &[f64], values: &[f64]) -> String {
    let mut out = String::new();
    for line in header {
        out.push_str("# ");
        out.push_str(line);
        out.push('\n');
    }
    for (x, y) in r.iter().zip(values) {
        out.push_str(&format!("{x:.16e} {y:.16e}\n"));
    }
    out
}

/// Writes the file through a temporary sibling and a rename.
pub fn write_two_column(path: &Path, header: &[String], r: &[f64], values: &[f64]) -> io::Result<()> {
    write_atomic(path, format_two_column(header, r, values).as_bytes())
}

pub fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = Path::new(&tmp);
    {
        let mut f = fs::File::create(tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(tmp, path)
}

/// Parses the text produced by [`format_two_column`]; returns `(r, values)`.
pub fn parse_two_column(text: &str) -> io::Result<(Vec<f64>, Vec<f64>)> {
    let mut r = Vec::new();
    let mut v = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut cols = line.split_whitespace();
        let parse = |s: Option<&str>| -> io::Result<f64> {
            s.and_then(|x| x.parse().ok()).ok_or_else(|| {
                io::Error::new(io::ErrorKind::InvalidData, format!("line {}: expected two numbers", lineno + 1))
            })
        };
        r.push(parse(cols.next())?);
        v.push(parse(cols.next())?);
    }
    Ok((r, v))
}

pub fn read_two_column(path: &Path) -> io::Result<(Vec<f64>, Vec<f64>)> {
    parse_two_column(&fs::read_to_string(path)?)
}
