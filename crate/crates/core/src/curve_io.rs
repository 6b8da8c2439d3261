//! CSV input and output for bound curves.

use std::io::{Read, Write};
use std::path::Path;

use serde::Deserialize;

use crate::bounds::{Anchor, BoundCurve, ConvexPoint};
use crate::error::{Error, Result};

#[derive(Debug, Deserialize)]
struct AnchorRow {
    d: f64,
    value: f64,
    #[serde(default)]
    s: Option<f64>,
    source: String,
}

/// Reads `d,value[,s],source` rows; lines starting with `#` are skipped.
/// All rows of a deletion/substitution curve must carry the same `s`.
pub fn read_curve<R: Read>(reader: R) -> Result<BoundCurve> {
    let mut csv = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = csv.headers()?.clone();
    let names: Vec<&str> = headers.iter().collect();
    if names != ["d", "value", "source"] && names != ["d", "value", "s", "source"] {
        return Err(Error::InvalidCurve(format!(
            "expected header d,value[,s],source, got {}",
            names.join(",")
        )));
    }

    let mut anchors = Vec::new();
    let mut s: Option<f64> = None;
    for (i, row) in csv.deserialize::<AnchorRow>().enumerate() {
        let row = row?;
        match (i, s, row.s) {
            (0, _, rs) => s = rs,
            (_, Some(a), Some(b)) if a == b => {}
            (_, None, None) => {}
            _ => {
                return Err(Error::InvalidCurve(format!(
                    "inconsistent s column at row {}",
                    i + 1
                )))
            }
        }
        anchors.push(Anchor::new(row.d, row.value, row.source));
    }
    BoundCurve::from_unsorted(anchors, s)
}

pub fn read_curve_file(path: impl AsRef<Path>) -> Result<BoundCurve> {
    read_curve(std::fs::File::open(path)?)
}

/// Formats `x` with 12 significant digits, trailing zeros trimmed.
pub fn format_sig12(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { "0".into() } else { x.to_string() };
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (11 - magnitude).max(0) as usize;
    let mut s = format!("{x:.decimals$}");
    if s.contains('.') {
        s.truncate(s.trim_end_matches('0').trim_end_matches('.').len());
    }
    s
}

/// Writes `d,value,rule,witness_anchors`, preceded by one `# ` line per
/// header entry. Witness anchors are separated by `;`.
pub fn write_convex_points<W: Write>(out: W, header: &[String], points: &[ConvexPoint]) -> Result<()> {
    let mut out = out;
    for line in header {
        writeln!(out, "# {line}")?;
    }
    let mut csv = csv::Writer::from_writer(out);
    csv.write_record(["d", "value", "rule", "witness_anchors"])?;
    for p in points {
        let witnesses: Vec<String> = p.witnesses.iter().map(|&w| format_sig12(w)).collect();
        csv.write_record([
            format_sig12(p.d),
            format_sig12(p.value),
            p.rule.as_str().to_string(),
            witnesses.join(";"),
        ])?;
    }
    csv.flush()?;
    Ok(())
}
