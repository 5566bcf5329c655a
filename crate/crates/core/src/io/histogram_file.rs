use std::io::{BufRead, Write};

use super::{header_pair, parse_f64, two_columns};
use crate::error::{Error, Result};
use crate::histogram::Histogram;
use crate::units::{ns, to_ns};

pub const HISTOGRAM_FORMAT: &str = "opocomb-histogram-v1";

const RESERVED: [&str; 4] = ["format", "bin_width_ns", "origin_ns", "n_bins"];
const SPACING_TOL: f64 = 1e-9;

pub fn write_histogram<W: Write>(mut w: W, h: &Histogram) -> Result<()> {
    writeln!(w, "# format = {HISTOGRAM_FORMAT}")?;
    writeln!(w, "# bin_width_ns = {}", to_ns(h.bin_width()))?;
    writeln!(w, "# origin_ns = {}", to_ns(h.origin()))?;
    writeln!(w, "# n_bins = {}", h.len())?;
    for (k, v) in &h.meta {
        writeln!(w, "# {k} = {v}")?;
    }
    writeln!(w, "# columns = bin_center_ns\tcounts")?;
    for (i, c) in h.counts().iter().enumerate() {
        writeln!(w, "{}\t{c}", to_ns(h.center(i)))?;
    }
    w.flush()?;
    Ok(())
}

/// Parses a histogram file. Bin centers must increase with constant spacing
/// and counts must be non-negative integers.
pub fn read_histogram<R: BufRead>(r: R) -> Result<Histogram> {
    let mut width_hdr = None;
    let mut meta = Vec::new();
    let mut rows: Vec<(usize, f64, u64)> = Vec::new();

    for (idx, line) in r.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        if t.starts_with('#') {
            if let Some((k, v)) = header_pair(t) {
                match k {
                    "bin_width_ns" => width_hdr = Some((line_no, parse_f64(line_no, k, v)?)),
                    "format" if v != HISTOGRAM_FORMAT => {
                        return Err(Error::parse(line_no, format!("unsupported format {v:?}")));
                    }
                    "columns" => {}
                    _ if RESERVED.contains(&k) => {}
                    _ => meta.push((k.to_string(), v.to_string())),
                }
            }
            continue;
        }
        let (a, b) = two_columns(line_no, t)?;
        let center = parse_f64(line_no, "bin_center_ns", a)?;
        let count: u64 = b
            .parse()
            .map_err(|_| Error::parse(line_no, format!("counts: expected a non-negative integer, got {b:?}")))?;
        rows.push((line_no, center, count));
    }

    if rows.is_empty() {
        return Err(Error::parse(0, "no histogram rows"));
    }
    let width = match (width_hdr, rows.len()) {
        (Some((line, w)), _) if !(w > 0.0) => {
            return Err(Error::parse(line, format!("bin_width_ns must be positive, got {w}")));
        }
        (Some((_, w)), _) => w,
        (None, 1) => return Err(Error::parse(rows[0].0, "single-bin file needs a bin_width_ns header")),
        (None, _) => rows[1].1 - rows[0].1,
    };

    for pair in rows.windows(2) {
        let (line, c, _) = pair[1];
        if !(c > pair[0].1) {
            return Err(Error::parse(line, format!("non-monotone bin centers: {c} after {}", pair[0].1)));
        }
    }
    for pair in rows.windows(2) {
        let (line, c, _) = pair[1];
        let step = c - pair[0].1;
        if (step - width).abs() > SPACING_TOL * width.max(c.abs()) {
            return Err(Error::parse(
                line,
                format!("non-uniform bins: spacing {step} ns, expected {width} ns"),
            ));
        }
    }

    let origin = ns(rows[0].1 - 0.5 * width);
    let mut h = Histogram::new(origin, ns(width), rows.iter().map(|r| r.2).collect())?;
    h.meta = meta;
    Ok(h)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Histogram {
        let mut h = Histogram::new(ns(-2.0), ns(0.05), (0..400).map(|i| (i * 7 % 13) as u64).collect()).unwrap();
        h.set_meta("seed", 42);
        h.set_meta("pair_rate_hz", 1.5e6);
        h
    }

    #[test]
    fn round_trip() {
        let h = sample();
        let mut buf = Vec::new();
        write_histogram(&mut buf, &h).unwrap();
        let back = read_histogram(buf.as_slice()).unwrap();
        assert_eq!(back.counts(), h.counts());
        assert_eq!(back.meta, h.meta);
        for (a, b) in back.bin_centers().iter().zip(h.bin_centers()) {
            assert!(((a - b) / b.abs().max(h.bin_width())).abs() < 1e-9);
        }
    }

    #[test]
    fn shuffled_rows_are_rejected() {
        let text = "# bin_width_ns = 1\n0.5\t1\n2.5\t3\n1.5\t2\n";
        match read_histogram(text.as_bytes()) {
            Err(Error::Parse { line, message }) => {
                assert_eq!(line, 4);
                assert!(message.contains("non-monotone"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn gaps_and_bad_counts_are_rejected() {
        let gap = "0.5\t1\n1.5\t2\n3.5\t2\n";
        assert!(matches!(read_histogram(gap.as_bytes()), Err(Error::Parse { line: 3, .. })));
        for bad in ["-1", "2.5", "x"] {
            let text = format!("0.5\t1\n1.5\t{bad}\n");
            assert!(matches!(read_histogram(text.as_bytes()), Err(Error::Parse { line: 2, .. })));
        }
        assert!(matches!(read_histogram("0.5 1 2\n".as_bytes()), Err(Error::Parse { line: 1, .. })));
        assert!(read_histogram("# only = header\n".as_bytes()).is_err());
    }

    #[test]
    fn accepts_files_without_width_header() {
        let h = read_histogram("# note: hand written\n10\t1\n10.5\t0\n11\t4\n".as_bytes()).unwrap();
        assert!((h.bin_width() - ns(0.5)).abs() < 1e-21);
        assert!((h.origin() - ns(9.75)).abs() < 1e-20);
        assert_eq!(h.counts(), &[1, 0, 4]);
    }
}
