//! Small helpers around `ndarray` shared by the algorithm modules.

use ndarray::{Array2, ArrayView1, ArrayView2};

use crate::error::{Error, Result};

/// Serde adapter storing an `Array2` as row-major nested arrays.
pub mod nested {
    use ndarray::Array2;
    use serde::de::Error as _;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<T, S>(m: &Array2<T>, s: S) -> Result<S::Ok, S::Error>
    where
        T: Serialize + Clone,
        S: Serializer,
    {
        let rows: Vec<Vec<T>> = m.outer_iter().map(|r| r.to_vec()).collect();
        rows.serialize(s)
    }

    pub fn deserialize<'de, T, D>(d: D) -> Result<Array2<T>, D::Error>
    where
        T: Deserialize<'de> + Clone,
        D: Deserializer<'de>,
    {
        let rows: Vec<Vec<T>> = Vec::deserialize(d)?;
        super::from_rows(&rows).map_err(D::Error::custom)
    }
}

/// Build a matrix from nested rows. An empty outer vector gives a 0×0 matrix.
pub fn from_rows<T: Clone>(rows: &[Vec<T>]) -> std::result::Result<Array2<T>, String> {
    let n = rows.len();
    let d = rows.first().map_or(0, Vec::len);
    let mut flat = Vec::with_capacity(n * d);
    for (i, r) in rows.iter().enumerate() {
        if r.len() != d {
            return Err(format!("row {i} has {} entries, expected {d}", r.len()));
        }
        flat.extend_from_slice(r);
    }
    Array2::from_shape_vec((n, d), flat).map_err(|e| e.to_string())
}

pub fn ensure_finite(data: ArrayView2<'_, f64>) -> Result<()> {
    for ((row, col), v) in data.indexed_iter() {
        if !v.is_finite() {
            return Err(Error::NonFinite { row, col });
        }
    }
    Ok(())
}

#[inline]
pub fn squared_euclidean(a: ArrayView1<'_, f64>, b: ArrayView1<'_, f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y) * (x - y)).sum()
}

#[inline]
pub fn euclidean(a: ArrayView1<'_, f64>, b: ArrayView1<'_, f64>) -> f64 {
    squared_euclidean(a, b).sqrt()
}

/// Select rows by index, in the given order.
pub fn take_rows<T: Clone>(m: &Array2<T>, idx: &[usize]) -> Array2<T> {
    m.select(ndarray::Axis(0), idx)
}
