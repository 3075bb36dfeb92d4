//! Result documents: JSON with 17-significant-digit floats, per-trial CSV, and the
//! metric comparison used by replay.

use std::io::{self, Write};

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};
use serde_json::Value;

use flatrsp::protocols::TrialRecord;

pub const SCHEMA_VERSION: u64 = 1;

/// Keys that vary from run to run and are ignored when comparing metrics.
const VOLATILE_KEYS: [&str; 1] = ["wall_time_ms"];

/// Pretty printer that writes every float as `d.dddddddddddddddde±x`.
struct SigDigits(PrettyFormatter<'static>);

impl Formatter for SigDigits {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, value as f64)
    }

    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }

    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }

    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }

    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }

    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }

    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

/// Serializes `value`; non-finite floats become `null`.
pub fn render<T: Serialize + ?Sized>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SigDigits(PrettyFormatter::new()));
    value.serialize(&mut ser).expect("in-memory JSON serialization cannot fail");
    buf.push(b'\n');
    String::from_utf8(buf).expect("serde_json emits UTF-8")
}

pub fn write_csv<W: Write>(mut w: W, records: &[TrialRecord]) -> io::Result<()> {
    writeln!(w, "trial_index,input_hash,per_input_error,message_index_distribution_entropy")?;
    for r in records {
        writeln!(
            w,
            "{},{},{:.16e},{:.16e}",
            r.trial_index, r.input_hash, r.per_input_error, r.message_index_distribution_entropy
        )?;
    }
    Ok(())
}

fn strip_volatile(v: &Value) -> Value {
    match v {
        Value::Object(map) => Value::Object(
            map.iter()
                .filter(|(k, _)| !VOLATILE_KEYS.contains(&k.as_str()))
                .map(|(k, v)| (k.clone(), strip_volatile(v)))
                .collect(),
        ),
        Value::Array(xs) => Value::Array(xs.iter().map(strip_volatile).collect()),
        other => other.clone(),
    }
}

/// First JSON path at which `a` and `b` differ, after dropping volatile keys. Floats
/// compare by bit pattern (17 significant digits round-trip exactly).
pub fn first_difference(a: &Value, b: &Value) -> Option<String> {
    diff(&strip_volatile(a), &strip_volatile(b), "$")
}

fn diff(a: &Value, b: &Value, path: &str) -> Option<String> {
    match (a, b) {
        (Value::Object(x), Value::Object(y)) => {
            for key in x.keys().chain(y.keys()) {
                let sub = format!("{path}.{key}");
                match (x.get(key), y.get(key)) {
                    (Some(u), Some(v)) => {
                        if let Some(p) = diff(u, v, &sub) {
                            return Some(p);
                        }
                    }
                    _ => return Some(sub),
                }
            }
            None
        }
        (Value::Array(x), Value::Array(y)) => {
            if x.len() != y.len() {
                return Some(format!("{path} (length {} vs {})", x.len(), y.len()));
            }
            x.iter().zip(y).enumerate().find_map(|(i, (u, v))| diff(u, v, &format!("{path}[{i}]")))
        }
        (Value::Number(x), Value::Number(y)) => {
            let same = match (x.as_u64(), y.as_u64(), x.as_i64(), y.as_i64()) {
                (Some(u), Some(v), _, _) => u == v,
                (_, _, Some(u), Some(v)) => u == v,
                _ => match (x.as_f64(), y.as_f64()) {
                    (Some(u), Some(v)) => u.to_bits() == v.to_bits(),
                    _ => false,
                },
            };
            (!same).then(|| path.to_string())
        }
        _ => (a != b).then(|| path.to_string()),
    }
}
