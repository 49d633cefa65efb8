//! JSON encodings: a complex number is `[re, im]`, a matrix is a list of rows.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub mod complex {
    use super::*;

    pub fn serialize<S: Serializer>(z: &Complex64, s: S) -> Result<S::Ok, S::Error> {
        [z.re, z.im].serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Complex64, D::Error> {
        let [re, im] = <[f64; 2]>::deserialize(d)?;
        Ok(Complex64::new(re, im))
    }
}

pub(crate) fn matrix_to_rows(m: &DMatrix<Complex64>) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

pub(crate) fn rows_to_matrix(rows: &[Vec<[f64; 2]>]) -> Result<DMatrix<Complex64>, String> {
    let n = rows.len();
    if n == 0 {
        return Err("empty matrix".into());
    }
    let m = rows[0].len();
    if rows.iter().any(|r| r.len() != m) {
        return Err("ragged matrix rows".into());
    }
    Ok(DMatrix::from_fn(n, m, |i, j| Complex64::new(rows[i][j][0], rows[i][j][1])))
}

pub mod matrix_list {
    use super::*;

    pub fn serialize<S: Serializer>(ms: &[DMatrix<Complex64>], s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<_> = ms.iter().map(matrix_to_rows).collect();
        rows.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<DMatrix<Complex64>>, D::Error> {
        let raw = Vec::<Vec<Vec<[f64; 2]>>>::deserialize(d)?;
        raw.iter()
            .map(|r| rows_to_matrix(r).map_err(D::Error::custom))
            .collect()
    }
}

/// JSON has no infinity: an unbounded quantity is written as `null` and
/// read back as `+∞`.
pub mod unbounded {
    use super::*;

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        if x.is_finite() { Some(*x) } else { None }.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
    }
}
