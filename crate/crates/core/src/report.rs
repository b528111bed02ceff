//! JSON encoding of matrices, certificates and witnesses.
//!
//! Floats are written with 17 significant digits. Matrices are arrays of
//! rows whose entries are `[re, im]` pairs.

use base64::engine::general_purpose::STANDARD as B64;
use base64::Engine;
use serde_json::{json, Map, Number, Value};
use sha2::{Digest, Sha256};

use crate::algebra::Ambient;
use crate::cb::{CbReport, Certificate, Falsifier};
use crate::closure::Witness;
use crate::error::{Error, Result};
use crate::linalg::{c, Mat};
use crate::structure::BlockStructure;

pub fn num(x: f64) -> Value {
    if !x.is_finite() {
        return Value::Null;
    }
    let s = format!("{x:.16e}");
    Value::Number(s.parse::<Number>().expect("formatted float"))
}

pub fn mat(m: &Mat) -> Value {
    Value::Array((0..m.nrows()).map(|i| Value::Array((0..m.ncols()).map(|j| json!([num(m[(i, j)].re), num(m[(i, j)].im)])).collect())).collect())
}

fn entry(v: &Value) -> Option<crate::linalg::C64> {
    match v {
        Value::Number(n) => n.as_f64().map(|x| c(x, 0.0)),
        Value::Array(p) if p.len() == 2 => Some(c(p[0].as_f64()?, p[1].as_f64()?)),
        _ => None,
    }
}

/// Parses a matrix; entries may be `[re, im]` pairs or plain reals.
pub fn parse_mat(v: &Value) -> Result<Mat> {
    let rows = v.as_array().ok_or_else(|| Error::Input("matrix must be an array of rows".into()))?;
    let n = rows.len();
    let cols = rows.first().and_then(Value::as_array).map_or(0, Vec::len);
    let mut m = Mat::zeros(n, cols);
    for (i, row) in rows.iter().enumerate() {
        let row = row.as_array().filter(|r| r.len() == cols).ok_or_else(|| Error::Input(format!("matrix row {i} is not of length {cols}")))?;
        for (j, e) in row.iter().enumerate() {
            m[(i, j)] = entry(e).ok_or_else(|| Error::Input(format!("bad matrix entry at ({i}, {j})")))?;
        }
    }
    Ok(m)
}

fn mat_bytes(m: &Mat) -> Vec<u8> {
    let mut out = Vec::with_capacity(16 * m.len());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            out.extend_from_slice(&m[(i, j)].re.to_le_bytes());
            out.extend_from_slice(&m[(i, j)].im.to_le_bytes());
        }
    }
    out
}

/// Row-major little-endian `f64` pairs, base64 encoded.
pub fn mat_b64(m: &Mat) -> Value {
    json!({"rows": m.nrows(), "cols": m.ncols(), "data": B64.encode(mat_bytes(m))})
}

pub fn decode_mat_b64(v: &Value) -> Result<Mat> {
    let bad = || Error::Input("bad base64 matrix".into());
    let rows = v["rows"].as_u64().ok_or_else(bad)? as usize;
    let cols = v["cols"].as_u64().ok_or_else(bad)? as usize;
    let bytes = B64.decode(v["data"].as_str().ok_or_else(bad)?).map_err(|_| bad())?;
    if bytes.len() != 16 * rows * cols {
        return Err(bad());
    }
    let f = |k: usize| f64::from_le_bytes(bytes[8 * k..8 * k + 8].try_into().expect("8 bytes"));
    Ok(Mat::from_fn(rows, cols, |i, j| c(f(2 * (i * cols + j)), f(2 * (i * cols + j) + 1))))
}

/// SHA-256 of the entries rounded to `1e-9`, so that last-bit noise does not
/// change the hash.
pub fn hash_mat(m: &Mat) -> String {
    let mut h = Sha256::new();
    h.update((m.nrows() as u64).to_le_bytes());
    h.update((m.ncols() as u64).to_le_bytes());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            for x in [m[(i, j)].re, m[(i, j)].im] {
                let q = (x * 1e9).round() as i64;
                h.update(q.to_le_bytes());
            }
        }
    }
    format!("{:x}", h.finalize())
}

pub fn blocks(st: &BlockStructure) -> Value {
    json!({"blocks": st.shape()})
}

pub fn ambient(a: &Ambient) -> Value {
    json!(a.blocks())
}

pub fn certificate(cert: &Certificate) -> Value {
    json!({
        "domain_support": cert.domain_support,
        "component": cert.component,
        "min_eig": num(cert.min_eig),
        "residual": num(cert.residual),
        "iterations": cert.iterations,
        "choi": mat_b64(&cert.choi),
    })
}

pub fn falsifier(f: &Falsifier) -> Value {
    json!({
        "level": f.level,
        "kind": f.kind,
        "norm_in": num(f.norm_in),
        "norm_out": num(f.norm_out),
        "x": mat_b64(&f.x),
        "hash": hash_mat(&f.x),
    })
}

pub fn cb_report(r: &CbReport) -> Value {
    let mut m = Map::new();
    m.insert("verdict".into(), json!(r.verdict));
    m.insert("iterations".into(), json!(r.iterations));
    m.insert("residual".into(), num(r.residual));
    m.insert("best_ratio".into(), num(r.best_ratio));
    m.insert("conflict".into(), json!(r.conflict));
    m.insert("certificates".into(), Value::Array(r.certificates.iter().map(certificate).collect()));
    if !r.inverse_certificates.is_empty() {
        m.insert("inverse_certificates".into(), Value::Array(r.inverse_certificates.iter().map(certificate).collect()));
    }
    if let Some(f) = &r.falsifier {
        m.insert("falsifier".into(), falsifier(f));
    }
    Value::Object(m)
}

pub fn witness(w: &Witness, names: &[String]) -> Value {
    let poly: Vec<Value> = w.poly.0.iter().map(|(k, word)| json!({"coeff": [num(k.re), num(k.im)], "word": word.render(names)})).collect();
    json!({"matrix": mat(&w.y), "hash": hash_mat(&w.y), "polynomial": poly})
}

/// Does `actual` contain `expected`? Objects match key by key, arrays
/// elementwise, numbers to within `tol`.
pub fn matches(expected: &Value, actual: &Value, tol: f64) -> bool {
    match (expected, actual) {
        (Value::Object(e), Value::Object(a)) => e.iter().all(|(k, v)| a.get(k).is_some_and(|x| matches(v, x, tol))),
        (Value::Number(_), Value::Array(a)) if a.len() == 2 => matches(expected, &a[0], tol) && matches(&json!(0.0), &a[1], tol),
        (Value::Array(e), Value::Array(a)) => e.len() == a.len() && e.iter().zip(a).all(|(x, y)| matches(x, y, tol)),
        (Value::Number(e), Value::Number(a)) => match (e.as_f64(), a.as_f64()) {
            (Some(x), Some(y)) => (x - y).abs() <= tol,
            _ => false,
        },
        _ => expected == actual,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{frob, random_complex};
    use rand::SeedableRng;

    #[test]
    fn float_format_has_17_digits() {
        assert_eq!(num(0.1).to_string(), "1.0000000000000001e-1");
        assert_eq!(num(f64::NAN), Value::Null);
        let back: f64 = num(std::f64::consts::PI).as_f64().unwrap();
        assert_eq!(back, std::f64::consts::PI);
    }

    #[test]
    fn matrix_round_trips() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let m = Mat::from_fn(3, 3, |_, _| random_complex(&mut rng));
        assert!(frob(&(parse_mat(&mat(&m)).unwrap() - &m)) == 0.0);
        assert!(frob(&(decode_mat_b64(&mat_b64(&m)).unwrap() - &m)) == 0.0);
        let text = serde_json::to_string(&mat(&m)).unwrap();
        let v: Value = serde_json::from_str(&text).unwrap();
        assert!(frob(&(parse_mat(&v).unwrap() - &m)) == 0.0);
    }

    #[test]
    fn hash_ignores_last_bit_noise() {
        let m = Mat::identity(2, 2);
        let mut n = m.clone();
        n[(0, 1)] = c(1e-14, 0.0);
        assert_eq!(hash_mat(&m), hash_mat(&n));
        n[(0, 1)] = c(1e-3, 0.0);
        assert_ne!(hash_mat(&m), hash_mat(&n));
    }

    #[test]
    fn subset_matching() {
        let a = json!({"verdict": "NotCI", "dims": [4, 2], "r": 1.0, "extra": true});
        assert!(matches(&json!({"verdict": "NotCI", "r": 1.0000001}), &a, 1e-6));
        assert!(!matches(&json!({"dims": [4]}), &a, 1e-6));
        assert!(!matches(&json!({"missing": 1}), &a, 1e-6));
        assert!(matches(&json!([[1, 0]]), &json!([[[1.0, 0.0], [0.0, 1e-9]]]), 1e-6));
        assert!(!matches(&json!([[1, 0]]), &json!([[[1.0, 0.5], [0.0, 0.0]]]), 1e-6));
    }
}
