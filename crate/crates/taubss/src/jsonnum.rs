//! Serde glue that writes `BigInt`s as plain JSON numbers of unlimited size
//! (serde_json's arbitrary_precision feature carries the digits losslessly).

use num_bigint::BigInt;
use serde::de::Error as DeError;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::str::FromStr;

pub fn serialize<S: Serializer>(x: &BigInt, s: S) -> Result<S::Ok, S::Error> {
    let n = serde_json::Number::from_str(&x.to_string())
        .map_err(|e| serde::ser::Error::custom(format!("bigint to json number: {e}")))?;
    n.serialize(s)
}

pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigInt, D::Error> {
    let n = serde_json::Number::deserialize(d)?;
    BigInt::from_str(&n.to_string()).map_err(|e| D::Error::custom(format!("json number to bigint: {e}")))
}

pub mod vec {
    use super::*;

    pub fn serialize<S: Serializer>(xs: &[BigInt], s: S) -> Result<S::Ok, S::Error> {
        let nums: Result<Vec<serde_json::Number>, _> =
            xs.iter().map(|x| serde_json::Number::from_str(&x.to_string())).collect();
        nums.map_err(|e| serde::ser::Error::custom(format!("bigint to json number: {e}")))?.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<BigInt>, D::Error> {
        let nums = Vec::<serde_json::Number>::deserialize(d)?;
        nums.iter()
            .map(|n| BigInt::from_str(&n.to_string()).map_err(|e| D::Error::custom(format!("{e}"))))
            .collect()
    }
}

/// Rows-of-numbers representation for serialized matrices.
pub mod mat {
    use super::*;
    use crate::matrix::Matrix;

    pub fn serialize<S: Serializer>(m: &Matrix, s: S) -> Result<S::Ok, S::Error> {
        let rows: Result<Vec<Vec<serde_json::Number>>, _> = (0..m.rows())
            .map(|i| {
                (0..m.cols())
                    .map(|j| serde_json::Number::from_str(&m[(i, j)].to_string()))
                    .collect()
            })
            .collect();
        rows.map_err(|e| serde::ser::Error::custom(format!("bigint to json number: {e}")))?.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Matrix, D::Error> {
        let rows = Vec::<Vec<serde_json::Number>>::deserialize(d)?;
        let parsed: Result<Vec<Vec<BigInt>>, D::Error> = rows
            .iter()
            .map(|r| {
                r.iter()
                    .map(|n| BigInt::from_str(&n.to_string()).map_err(|e| D::Error::custom(format!("{e}"))))
                    .collect()
            })
            .collect();
        let parsed = parsed?;
        if let Some(first) = parsed.first() {
            let w = first.len();
            if parsed.iter().any(|r| r.len() != w) {
                return Err(D::Error::custom("ragged matrix rows"));
            }
        }
        Ok(Matrix::from_rows(parsed))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde::{Deserialize, Serialize};

    #[derive(Serialize, Deserialize, PartialEq, Debug)]
    struct Wrap {
        #[serde(with = "crate::jsonnum")]
        x: BigInt,
        #[serde(with = "crate::jsonnum::vec")]
        v: Vec<BigInt>,
    }

    #[test]
    fn big_roundtrip() {
        let w = Wrap {
            x: BigInt::from_str("123456789012345678901234567890123456789").unwrap(),
            v: vec![BigInt::from(-7), BigInt::from(0)],
        };
        let s = serde_json::to_string(&w).unwrap();
        assert!(s.contains("123456789012345678901234567890123456789"));
        let back: Wrap = serde_json::from_str(&s).unwrap();
        assert_eq!(back, w);
    }
}
