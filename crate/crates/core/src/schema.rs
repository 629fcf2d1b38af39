//! JSON encodings of scalars, vectors and matrices.
//!
//! A scalar is a number, a string surd such as `"1/2"` or `"sqrt2/2"`, a
//! pair `[re, im]`, or an object `{"re": .., "im": ..}`. Integers, fractions
//! and surds are exact; decimal literals are floats.

use serde_json::{json, Value};

use crate::error::{schema, Result};
use crate::linalg::Mat;
use crate::scalar::{parse_real_surd, Scalar};

fn parse_real(v: &Value, field: &str) -> Result<Scalar> {
    match v {
        Value::Number(num) => {
            if let Some(i) = num.as_i64() {
                Ok(Scalar::int(i))
            } else {
                let f = num.as_f64().ok_or_else(|| schema(field, "bad number"))?;
                Ok(Scalar::float(f, 0.0))
            }
        }
        Value::String(s) => parse_real_surd(s)
            .map(Scalar::Exact)
            .ok_or_else(|| schema(field, format!("cannot parse scalar {s:?}"))),
        _ => Err(schema(field, "expected a real number or string")),
    }
}

pub fn parse_scalar(v: &Value, field: &str) -> Result<Scalar> {
    match v {
        Value::Array(a) if a.len() == 2 => {
            let re = parse_real(&a[0], &format!("{field}[0]"))?;
            let im = parse_real(&a[1], &format!("{field}[1]"))?;
            Ok(re + Scalar::i() * im)
        }
        Value::Array(_) => Err(schema(field, "complex scalars are [re, im] pairs")),
        Value::Object(o) => {
            let re = parse_real(o.get("re").unwrap_or(&json!(0)), &format!("{field}.re"))?;
            let im = parse_real(o.get("im").unwrap_or(&json!(0)), &format!("{field}.im"))?;
            Ok(re + Scalar::i() * im)
        }
        other => parse_real(other, field),
    }
}

pub fn parse_vector(v: &Value, field: &str) -> Result<Vec<Scalar>> {
    let arr = v
        .as_array()
        .ok_or_else(|| schema(field, "expected an array of scalars"))?;
    arr.iter()
        .enumerate()
        .map(|(i, x)| parse_scalar(x, &format!("{field}[{i}]")))
        .collect()
}

pub fn parse_matrix(v: &Value, field: &str) -> Result<Mat> {
    let arr = v
        .as_array()
        .ok_or_else(|| schema(field, "expected an array of rows"))?;
    let m: Mat = arr
        .iter()
        .enumerate()
        .map(|(i, r)| parse_vector(r, &format!("{field}[{i}]")))
        .collect::<Result<_>>()?;
    if m.iter().any(|r| r.len() != m.len()) {
        return Err(schema(field, "expected a square matrix"));
    }
    Ok(m)
}

/// Encodes a scalar as `[re, im]` floats, plus the exact form when exact.
pub fn scalar_json(c: &Scalar) -> Value {
    let [re, im] = c.to_pair();
    let re = crate::scalar::fmt_g12(re).parse::<f64>().unwrap_or(re);
    let im = crate::scalar::fmt_g12(im).parse::<f64>().unwrap_or(im);
    json!([re, im])
}

pub fn vector_json(v: &[Scalar]) -> Value {
    Value::Array(v.iter().map(scalar_json).collect())
}

pub fn matrix_json(m: &Mat) -> Value {
    Value::Array(m.iter().map(|r| vector_json(r)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_forms() {
        assert_eq!(parse_scalar(&json!(1), "x").unwrap(), Scalar::int(1));
        assert_eq!(
            parse_scalar(&json!("1/2"), "x").unwrap(),
            Scalar::ratio(1, 2)
        );
        assert_eq!(parse_scalar(&json!([0, 1]), "x").unwrap(), Scalar::i());
        assert_eq!(
            parse_scalar(&json!({"re": "sqrt2/2"}), "x").unwrap(),
            Scalar::inv_sqrt2()
        );
        assert!(!parse_scalar(&json!(0.5), "x").unwrap().is_exact());
        assert!(parse_scalar(&json!([1, 2, 3]), "x").is_err());
        assert!(parse_scalar(&json!(true), "x").is_err());
    }
}
