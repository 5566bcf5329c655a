use std::io::{BufRead, Write};

use crate::error::{Error, Result};

/// `key = value` per line; `#` starts a comment line.
pub fn write_kv<W: Write>(mut w: W, pairs: &[(String, String)]) -> Result<()> {
    for (k, v) in pairs {
        writeln!(w, "{k} = {v}")?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_kv<R: BufRead>(r: R) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (idx, line) in r.lines().enumerate() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let (k, v) = t
            .split_once('=')
            .ok_or_else(|| Error::parse(idx + 1, format!("expected key = value, got {t:?}")))?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let pairs = vec![("tau_f_ns".to_string(), "2.07".to_string()), ("converged".into(), "true".into())];
        let mut buf = Vec::new();
        write_kv(&mut buf, &pairs).unwrap();
        assert_eq!(read_kv(buf.as_slice()).unwrap(), pairs);
        assert!(read_kv("no equals\n".as_bytes()).is_err());
    }
}
