use std::io::{BufRead, Write};

use super::{parse_f64, two_columns};
use crate::error::Result;

/// Two-column curve with a `# columns = x<TAB>y` header naming both axes.
pub fn write_curve<W: Write>(mut w: W, header: &[(String, String)], x_name: &str, y_name: &str, points: &[(f64, f64)]) -> Result<()> {
    for (k, v) in header {
        writeln!(w, "# {k} = {v}")?;
    }
    writeln!(w, "# columns = {x_name}\t{y_name}")?;
    for (x, y) in points {
        writeln!(w, "{x}\t{y:e}")?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_curve<R: BufRead>(r: R) -> Result<Vec<(f64, f64)>> {
    let mut out = Vec::new();
    for (idx, line) in r.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let (a, b) = two_columns(line_no, t)?;
        out.push((parse_f64(line_no, "x", a)?, parse_f64(line_no, "y", b)?));
    }
    Ok(out)
}
