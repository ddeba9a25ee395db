//! JSON helpers: integers may arrive as numbers or decimal strings and are
//! emitted as numbers when they fit in an `i64`.

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::zmat::ZMatrix;

fn parse_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Parse(msg.into()))
}

pub fn parse_int(v: &Value) -> Result<BigInt> {
    match v {
        Value::Number(n) => match n.as_i64() {
            Some(i) => Ok(BigInt::from(i)),
            None => match n.as_u64() {
                Some(u) => Ok(BigInt::from(u)),
                None => parse_err(format!("not an integer: {n}")),
            },
        },
        Value::String(s) => s.trim().parse::<BigInt>().map_err(|_| Error::Parse(format!("not an integer: {s:?}"))),
        other => parse_err(format!("expected integer, found {other}")),
    }
}

pub fn parse_usize(v: &Value) -> Result<usize> {
    parse_int(v)?.to_usize().ok_or_else(|| Error::Parse("expected a non-negative machine integer".into()))
}

pub fn parse_vector(v: &Value) -> Result<Vec<BigInt>> {
    match v {
        Value::Array(a) => a.iter().map(parse_int).collect(),
        _ => parse_err("expected an array of integers"),
    }
}

pub fn parse_matrix(v: &Value) -> Result<ZMatrix> {
    let Value::Array(rows) = v else {
        return parse_err("expected a matrix (array of rows)");
    };
    let rows: Vec<Vec<BigInt>> = rows.iter().map(parse_vector).collect::<Result<_>>()?;
    ZMatrix::from_rows(&rows).map_err(|e| Error::Parse(e.to_string()))
}

pub fn field<'a>(obj: &'a Value, key: &str) -> Result<&'a Value> {
    obj.get(key).ok_or_else(|| Error::Parse(format!("missing field {key:?}")))
}

pub fn parse_bool(obj: &Value, key: &str) -> Result<bool> {
    field(obj, key)?.as_bool().ok_or_else(|| Error::Parse(format!("field {key:?} must be a boolean")))
}

pub fn int_json(x: &BigInt) -> Value {
    match x.to_i64() {
        Some(i) => Value::from(i),
        None => Value::String(x.to_string()),
    }
}

pub fn vector_json(v: &[BigInt]) -> Value {
    Value::Array(v.iter().map(int_json).collect())
}

pub fn matrix_json(m: &ZMatrix) -> Value {
    Value::Array((0..m.nrows()).map(|i| vector_json(m.row(i))).collect())
}

pub fn ser_int<S: serde::Serializer>(x: &BigInt, s: S) -> std::result::Result<S::Ok, S::Error> {
    serde::Serialize::serialize(&int_json(x), s)
}

pub fn ser_vec<S: serde::Serializer>(v: &[BigInt], s: S) -> std::result::Result<S::Ok, S::Error> {
    serde::Serialize::serialize(&vector_json(v), s)
}

pub fn ser_vecs<S: serde::Serializer>(v: &[Vec<BigInt>], s: S) -> std::result::Result<S::Ok, S::Error> {
    serde::Serialize::serialize(&Value::Array(v.iter().map(|x| vector_json(x)).collect()), s)
}

pub fn ser_opt_vec<S: serde::Serializer>(v: &Option<Vec<BigInt>>, s: S) -> std::result::Result<S::Ok, S::Error> {
    serde::Serialize::serialize(&v.as_ref().map(|x| vector_json(x)), s)
}

pub fn ser_matrix<S: serde::Serializer>(m: &ZMatrix, s: S) -> std::result::Result<S::Ok, S::Error> {
    serde::Serialize::serialize(&matrix_json(m), s)
}

pub fn from_str(text: &str) -> Result<Value> {
    serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integers_as_numbers_or_strings() {
        let v = from_str(r#"[[1, "-2"], ["123456789012345678901234567890", 0]]"#).unwrap();
        let m = parse_matrix(&v).unwrap();
        assert_eq!(m[(0, 1)], BigInt::from(-2));
        let back = matrix_json(&m);
        assert_eq!(back[0][1], Value::from(-2));
        assert!(back[1][0].is_string());
        assert_eq!(parse_matrix(&back).unwrap(), m);
        assert!(parse_int(&Value::from(1.5)).is_err());
    }
}
