//! Plain-text file formats: histograms, raw detection events, two-column
//! curves and flat key-value reports. All times on disk are in ns.

mod curve;
mod events;
mod histogram_file;
mod kv;

pub use curve::{read_curve, write_curve};
pub use events::{read_events, write_events};
pub use histogram_file::{read_histogram, write_histogram, HISTOGRAM_FORMAT};
pub use kv::{read_kv, write_kv};

use crate::error::{Error, Result};

/// Splits a `# key = value` header line. `None` for plain comments.
pub(crate) fn header_pair(line: &str) -> Option<(&str, &str)> {
    let body = line.strip_prefix('#')?;
    let (k, v) = body.split_once('=')?;
    let k = k.trim();
    if k.is_empty() || k.contains(char::is_whitespace) {
        return None;
    }
    Some((k, v.trim()))
}

pub(crate) fn parse_f64(line: usize, field: &str, s: &str) -> Result<f64> {
    let v: f64 = s
        .parse()
        .map_err(|_| Error::parse(line, format!("{field}: expected a number, got {s:?}")))?;
    if !v.is_finite() {
        return Err(Error::parse(line, format!("{field}: value must be finite, got {s:?}")));
    }
    Ok(v)
}

/// Two tab- or space-separated fields.
pub(crate) fn two_columns(line: usize, s: &str) -> Result<(&str, &str)> {
    let mut it = s.split_whitespace();
    match (it.next(), it.next(), it.next()) {
        (Some(a), Some(b), None) => Ok((a, b)),
        _ => Err(Error::parse(line, format!("expected two columns, got {s:?}"))),
    }
}
