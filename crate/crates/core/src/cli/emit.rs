//! Byte-stable report encoding.

use std::io;

use serde::Serialize;
use serde_json::ser::Formatter;
use serde_json::Value;

/// Compact JSON with every float written to 17 significant digits, which
/// round-trips `f64` exactly. Object keys come out sorted.
struct FloatFormatter;

impl Formatter for FloatFormatter {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, f64::from(value))
    }
}

pub fn to_json_bytes<T: Serialize>(value: &T) -> Vec<u8> {
    // Routing through `Value` sorts object keys.
    let value: Value = serde_json::to_value(value).expect("reports are serializable");
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, FloatFormatter);
    value.serialize(&mut ser).expect("writing to memory");
    out.push(b'\n');
    out
}

/// Writes rows under a fixed header.
pub fn csv_bytes(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Vec<u8> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(header).expect("writing to memory");
    for row in rows {
        w.write_record(&row).expect("writing to memory");
    }
    w.into_inner().expect("flushing to memory")
}
