use std::io::{BufRead, Write};

use super::{parse_f64, two_columns};
use crate::error::{Error, Result};
use crate::simulator::{Detector, EventRecord};
use crate::units::{ns, to_ns};

/// One `detector_id<TAB>timestamp_ns` line per event.
pub fn write_events<W: Write>(mut w: W, events: &[EventRecord], header: &[(String, String)]) -> Result<()> {
    writeln!(w, "# format = opocomb-events-v1")?;
    for (k, v) in header {
        writeln!(w, "# {k} = {v}")?;
    }
    writeln!(w, "# columns = detector_id\ttimestamp_ns")?;
    for e in events {
        writeln!(w, "{}\t{}", e.detector.id(), to_ns(e.timestamp))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_events<R: BufRead>(r: R) -> Result<Vec<EventRecord>> {
    let mut out = Vec::new();
    for (idx, line) in r.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let (a, b) = two_columns(line_no, t)?;
        let detector = a
            .parse()
            .ok()
            .and_then(|id| Detector::from_id(id).ok())
            .ok_or_else(|| Error::parse(line_no, format!("detector_id must be 1 or 2, got {a:?}")))?;
        let timestamp = ns(parse_f64(line_no, "timestamp_ns", b)?);
        out.push(EventRecord { detector, timestamp });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let ev = vec![
            EventRecord { detector: Detector::One, timestamp: 1.25e-6 },
            EventRecord { detector: Detector::Two, timestamp: 3.0e-3 },
        ];
        let mut buf = Vec::new();
        write_events(&mut buf, &ev, &[("seed".into(), "7".into())]).unwrap();
        let back = read_events(buf.as_slice()).unwrap();
        assert_eq!(back.len(), 2);
        for (a, b) in back.iter().zip(&ev) {
            assert_eq!(a.detector, b.detector);
            assert!((a.timestamp - b.timestamp).abs() <= 1e-15 * b.timestamp);
        }
    }

    #[test]
    fn bad_detector() {
        assert!(matches!(read_events("3\t1.0\n".as_bytes()), Err(Error::Parse { line: 1, .. })));
    }
}
