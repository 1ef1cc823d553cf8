//! Deterministic artifact writers. Floats are printed with 17 significant
//! digits everywhere (`{:.16e}`), which round-trips every f64 bit pattern;
//! CSV uses '.' decimals, ',' separators, a header row, and LF endings.

use std::io;

use serde::Serialize;
use tt_core::Result;

struct SigDigits17;

impl serde_json::ser::Formatter for SigDigits17 {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        write!(writer, "{:.16e}", value)
    }
}

/// Renders any report as deterministic JSON text with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SigDigits17);
    value.serialize(&mut ser)?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("serialized JSON is UTF-8"))
}

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Assembles a CSV document from a header and pre-formatted cells.
pub fn csv(header: &[String], rows: &[Vec<String>]) -> String {
    let mut out = String::new();
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        debug_assert_eq!(row.len(), header.len());
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// Header for a state-vector block: coeff_1..coeff_N.
pub fn coeff_header(n: usize) -> Vec<String> {
    (1..=n).map(|k| format!("coeff_{k}")).collect()
}
