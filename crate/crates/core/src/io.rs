//! JSON state files and number formatting.
//!
//! A state file is `{"dims": [d1, …, dn], "amplitudes": [[re, im], …]}` with
//! the amplitudes in lexicographic order, last index fastest. Output floats
//! are written with 17 significant digits.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use num_complex::Complex64;
use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::tensor::{CMatrix, LocalUnitaryTuple, ModeShape, StateTensor};

/// Pretty JSON formatter that prints every float as `d.dddddddddddddddde±x`.
pub struct PreciseFormatter<'a> {
    inner: PrettyFormatter<'a>,
}

impl Default for PreciseFormatter<'_> {
    fn default() -> Self {
        Self { inner: PrettyFormatter::with_indent(b"  ") }
    }
}

impl Formatter for PreciseFormatter<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        if value.is_finite() {
            write!(writer, "{value:.16e}")
        } else {
            writer.write_all(b"null")
        }
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, f64::from(value))
    }

    fn begin_array<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.begin_array(writer)
    }

    fn end_array<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.end_array(writer)
    }

    fn begin_array_value<W: ?Sized + Write>(&mut self, writer: &mut W, first: bool) -> io::Result<()> {
        self.inner.begin_array_value(writer, first)
    }

    fn end_array_value<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.end_array_value(writer)
    }

    fn begin_object<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.begin_object(writer)
    }

    fn end_object<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.end_object(writer)
    }

    fn begin_object_key<W: ?Sized + Write>(&mut self, writer: &mut W, first: bool) -> io::Result<()> {
        self.inner.begin_object_key(writer, first)
    }

    fn begin_object_value<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.begin_object_value(writer)
    }

    fn end_object_value<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.end_object_value(writer)
    }
}

/// Serializes with [`PreciseFormatter`] and a trailing newline.
pub fn to_json_string<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, PreciseFormatter::default());
    value.serialize(&mut ser).map_err(|e| Error::Format(e.to_string()))?;
    out.push(b'\n');
    String::from_utf8(out).map_err(|e| Error::Format(e.to_string()))
}

pub fn complex_json(z: Complex64) -> Value {
    json!([z.re, z.im])
}

/// Row-major nested arrays of `[re, im]` pairs.
pub fn matrix_json(m: &CMatrix) -> Value {
    Value::Array((0..m.nrows()).map(|i| Value::Array((0..m.ncols()).map(|j| complex_json(m[(i, j)])).collect())).collect())
}

pub fn transforms_json(us: &LocalUnitaryTuple) -> Value {
    Value::Array(us.matrices().iter().map(matrix_json).collect())
}

/// The state-file object for `psi`.
pub fn state_json(psi: &StateTensor) -> Value {
    json!({
        "dims": psi.dims(),
        "amplitudes": psi.amplitudes().iter().map(|z| complex_json(*z)).collect::<Vec<_>>(),
    })
}

/// Parses a state-file object. Non-normalized states are rejected unless
/// `normalize` is set, in which case they are rescaled. An object without
/// `dims` but with a `canonical` member (the output of a canonicalization) is
/// read through that member.
pub fn state_from_value(value: &Value, normalize: bool) -> Result<StateTensor> {
    let obj = value.as_object().ok_or_else(|| Error::Format("state file must be a JSON object".into()))?;
    if !obj.contains_key("dims") {
        if let Some(inner) = obj.get("canonical") {
            return state_from_value(inner, normalize);
        }
    }
    let dims_value = obj.get("dims").ok_or_else(|| Error::Format("missing field `dims`".into()))?;
    let dims_array = dims_value.as_array().ok_or_else(|| Error::Format("`dims` must be an array".into()))?;
    let dims = dims_array
        .iter()
        .enumerate()
        .map(|(k, d)| {
            d.as_u64()
                .map(|d| d as usize)
                .ok_or_else(|| Error::Format(format!("`dims[{k}]` must be a positive integer")))
        })
        .collect::<Result<Vec<usize>>>()?;
    let shape = ModeShape::new(dims).map_err(|e| Error::Format(format!("`dims`: {e}")))?;
    let amps_value = obj.get("amplitudes").ok_or_else(|| Error::Format("missing field `amplitudes`".into()))?;
    let amps_array = amps_value.as_array().ok_or_else(|| Error::Format("`amplitudes` must be an array".into()))?;
    if amps_array.len() != shape.size() {
        return Err(Error::AmplitudeCount { expected: shape.size(), found: amps_array.len() });
    }
    let amps = amps_array
        .iter()
        .enumerate()
        .map(|(k, a)| {
            let bad = || Error::Format(format!("`amplitudes[{k}]` must be a [re, im] pair of numbers"));
            let pair = a.as_array().filter(|p| p.len() == 2).ok_or_else(bad)?;
            let re = pair[0].as_f64().ok_or_else(bad)?;
            let im = pair[1].as_f64().ok_or_else(bad)?;
            Ok(Complex64::new(re, im))
        })
        .collect::<Result<Vec<Complex64>>>()?;
    if normalize {
        StateTensor::normalized(shape, amps)
    } else {
        StateTensor::new(shape, amps)
    }
}

pub fn parse_state(text: &str, normalize: bool) -> Result<StateTensor> {
    let value: Value = serde_json::from_str(text).map_err(|e| Error::Format(format!("invalid JSON: {e}")))?;
    state_from_value(&value, normalize)
}

pub fn read_state(path: &Path, normalize: bool) -> Result<StateTensor> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_state(&text, normalize)
}

pub fn write_state(path: &Path, psi: &StateTensor) -> Result<()> {
    write_json(path, &state_json(psi))
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let text = to_json_string(value)?;
    fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::random_state;
    use crate::testutil::*;

    #[test]
    fn round_trip_is_exact() {
        let psi = random_state(&ModeShape::new(vec![2, 3, 2]).unwrap(), 9).unwrap();
        let text = to_json_string(&state_json(&psi)).unwrap();
        let back = parse_state(&text, false).unwrap();
        assert_eq!(back, psi);
    }

    #[test]
    fn floats_have_seventeen_digits() {
        let text = to_json_string(&json!({"x": 0.1, "y": -2.0, "n": 3})).unwrap();
        assert!(text.contains("1.0000000000000001e-1"), "{text}");
        assert!(text.contains("-2.0000000000000000e0"), "{text}");
        assert!(text.contains("\"n\": 3"), "{text}");
        let value: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(value["x"].as_f64(), Some(0.1));
    }

    #[test]
    fn rejects_wrong_length() {
        let text = r#"{"dims": [2, 2], "amplitudes": [[1, 0], [0, 0], [0, 0]]}"#;
        assert!(matches!(parse_state(text, false), Err(Error::AmplitudeCount { expected: 4, found: 3 })));
    }

    #[test]
    fn normalization_needs_the_flag() {
        let text = r#"{"dims": [2], "amplitudes": [[1, 0], [1, 0]]}"#;
        assert!(matches!(parse_state(text, false), Err(Error::NotNormalized { .. })));
        let psi = parse_state(text, true).unwrap();
        assert_close(psi.amplitudes()[0], c(0.5f64.sqrt(), 0.0), 1e-15);
    }

    #[test]
    fn errors_name_the_field() {
        for (text, field) in [
            (r#"{"amplitudes": []}"#, "dims"),
            (r#"{"dims": [2, "x"], "amplitudes": []}"#, "dims[1]"),
            (r#"{"dims": [2]}"#, "amplitudes"),
            (r#"{"dims": [2], "amplitudes": [[1, 0], [0]]}"#, "amplitudes[1]"),
        ] {
            let err = parse_state(text, false).unwrap_err().to_string();
            assert!(err.contains(field), "{err}");
        }
        assert!(matches!(parse_state("{", false), Err(Error::Format(_))));
    }

    #[test]
    fn reads_through_canonical_member() {
        let psi = psi_star();
        let wrapped = json!({"canonical": state_json(&psi), "R": [1.0]});
        assert_eq!(state_from_value(&wrapped, false).unwrap(), psi);
    }
}
