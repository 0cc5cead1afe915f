//! JSON and CSV layouts for quaternion matrices and vectors.
//!
//! JSON: `{"schema_version": 1, "shape": [m, n], "data": [[a,b,c,d], ...]}`
//! with `data` row-major; vectors use `"shape": [n]`.
//! CSV: one line per matrix row, four columns (`a,b,c,d`) per entry, with a
//! header naming them `a0,b0,c0,d0,a1,...`.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::matrix::QMatrix;
use super::vector::QVector;
use crate::error::{Error, Result};
use crate::quaternion::Quaternion;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct ArrayJson {
    #[serde(default = "default_schema")]
    schema_version: u32,
    shape: Vec<usize>,
    data: Vec<Quaternion>,
}

fn default_schema() -> u32 {
    SCHEMA_VERSION
}

impl Serialize for QMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ArrayJson {
            schema_version: SCHEMA_VERSION,
            shape: vec![self.rows(), self.cols()],
            data: self.as_slice().to_vec(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for QMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = ArrayJson::deserialize(d)?;
        let [rows, cols] = raw.shape[..] else {
            return Err(serde::de::Error::custom(format!("matrix shape must have two entries, got {:?}", raw.shape)));
        };
        QMatrix::from_row_major(rows, cols, raw.data).map_err(serde::de::Error::custom)
    }
}

impl Serialize for QVector {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ArrayJson { schema_version: SCHEMA_VERSION, shape: vec![self.len()], data: self.as_slice().to_vec() }
            .serialize(s)
    }
}

impl<'de> Deserialize<'de> for QVector {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = ArrayJson::deserialize(d)?;
        match raw.shape[..] {
            [n] if n == raw.data.len() => Ok(QVector::from_vec(raw.data)),
            _ => Err(serde::de::Error::custom(format!(
                "vector shape {:?} does not match {} entries",
                raw.shape,
                raw.data.len()
            ))),
        }
    }
}

pub fn matrix_to_csv(a: &QMatrix) -> String {
    rows_to_csv(a.cols(), (0..a.rows()).map(|i| a.row(i)))
}

/// A vector is written as a single CSV row.
pub fn vector_to_csv(x: &QVector) -> String {
    rows_to_csv(x.len(), std::iter::once(x.as_slice()))
}

fn rows_to_csv<'a>(cols: usize, rows: impl Iterator<Item = &'a [Quaternion]>) -> String {
    let mut out = String::new();
    let header: Vec<String> = (0..cols).flat_map(|j| ["a", "b", "c", "d"].map(|p| format!("{p}{j}"))).collect();
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().flat_map(|q| q.to_array()).map(|v| format!("{v:e}")).collect();
        let _ = writeln!(out, "{}", cells.join(","));
    }
    out
}

/// Parses the CSV layout written by [`matrix_to_csv`].
pub fn matrix_from_csv(text: &str) -> Result<QMatrix> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines.next().ok_or_else(|| Error::InvalidInput("empty CSV".into()))?;
    let width = header.split(',').count();
    if width % 4 != 0 {
        return Err(Error::BadLength { len: width, group: 4 });
    }
    let cols = width / 4;
    let mut data = Vec::new();
    let mut rows = 0;
    for line in lines {
        let vals: Vec<f64> = line
            .split(',')
            .map(|c| c.trim().parse::<f64>().map_err(|_| Error::InvalidInput(format!("bad CSV cell {c:?}"))))
            .collect::<Result<_>>()?;
        if vals.len() != width {
            return Err(Error::DimensionMismatch(format!("CSV row has {} cells, header has {width}", vals.len())));
        }
        data.extend(vals.chunks_exact(4).map(|c| Quaternion::new(c[0], c[1], c[2], c[3])));
        rows += 1;
    }
    QMatrix::from_row_major(rows, cols, data)
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quaternion::Quaternion as Q;

    #[test]
    fn matrix_json_layout() {
        let a = QMatrix::from_row_major(1, 2, vec![Q::new(1.0, 2.0, 3.0, 4.0), Q::K]).unwrap();
        let text = serde_json::to_string(&a).unwrap();
        assert_eq!(text, r#"{"schema_version":1,"shape":[1,2],"data":[[1.0,2.0,3.0,4.0],[0.0,0.0,0.0,1.0]]}"#);
        let back: QMatrix = serde_json::from_str(&text).unwrap();
        assert_eq!(back, a);
    }

    #[test]
    fn matrix_json_shape_is_checked() {
        let bad = r#"{"shape":[2,2],"data":[[1,0,0,0]]}"#;
        assert!(serde_json::from_str::<QMatrix>(bad).is_err());
        let bad = r#"{"shape":[3],"data":[[1,0,0,0]]}"#;
        assert!(serde_json::from_str::<QVector>(bad).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let a = QMatrix::from_fn(2, 3, |i, j| Q::new(i as f64, j as f64, -0.25, 1e-17));
        let csv = matrix_to_csv(&a);
        assert!(csv.starts_with("a0,b0,c0,d0,a1,"));
        assert_eq!(matrix_from_csv(&csv).unwrap(), a);
    }
}
