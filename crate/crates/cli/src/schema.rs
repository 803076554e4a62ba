//! JSON file formats, schema version 1.
//!
//! Tensor: `{"schema": 1, "n": N, "m": M, "entries": E}` where `E[h][k][α][β]`
//! is a `[re, im]` pair for `A^{h+1,k+1}_{α+1,β+1}` (files are 0-indexed).
//!
//! Field: `{"schema": 1, "n", "m", "grid": [N per axis], "periodic": bool,
//! "samples": [E, ...]}` with samples row-major over the lattice `i/N`,
//! first axis slowest.
//!
//! Lamé moduli: `{"schema": 1, "lambda": [...], "mu": [...]}`.

use std::fmt;
use std::io::Read;

use pell_core::tensor::SampledField;
use pell_core::{CoefficientTensor, Complex64, TensorField};
use serde::Deserialize;
use serde_json::{json, Value};

pub const SCHEMA: u32 = 1;

type Entries = Vec<Vec<Vec<Vec<[f64; 2]>>>>;

#[derive(Debug)]
pub enum InputError {
    Io { path: String, message: String },
    Syntax { path: String, line: usize, column: usize, message: String },
    Invalid { path: String, message: String },
}

impl fmt::Display for InputError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InputError::Io { path, message } => write!(f, "{path}: {message}"),
            InputError::Syntax {
                path,
                line,
                column,
                message,
            } => write!(f, "{path}:{line}:{column}: {message}"),
            InputError::Invalid { path, message } => write!(f, "{path}: {message}"),
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TensorDoc {
    schema: u32,
    n: usize,
    m: usize,
    entries: Option<Entries>,
    grid: Option<Vec<usize>>,
    periodic: Option<bool>,
    samples: Option<Vec<Entries>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ModuliDoc {
    schema: u32,
    lambda: Vec<f64>,
    mu: Vec<f64>,
}

/// Reads `path`, or stdin when `path` is `-`.
pub fn read_source(path: &str) -> Result<String, InputError> {
    let io = |e: std::io::Error| InputError::Io {
        path: path.to_string(),
        message: e.to_string(),
    };
    if path == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s).map_err(io)?;
        Ok(s)
    } else {
        std::fs::read_to_string(path).map_err(io)
    }
}

fn parse<'a, T: Deserialize<'a>>(path: &str, text: &'a str) -> Result<T, InputError> {
    serde_json::from_str(text).map_err(|e| InputError::Syntax {
        path: path.to_string(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

fn invalid(path: &str, message: impl Into<String>) -> InputError {
    InputError::Invalid {
        path: path.to_string(),
        message: message.into(),
    }
}

fn check_schema(path: &str, schema: u32) -> Result<(), InputError> {
    if schema != SCHEMA {
        return Err(invalid(path, format!("unsupported schema {schema}, expected {SCHEMA}")));
    }
    Ok(())
}

fn flatten(path: &str, n: usize, m: usize, e: &Entries) -> Result<Vec<Complex64>, InputError> {
    let bad = || invalid(path, format!("entries must have shape [{n}][{n}][{m}][{m}][2]"));
    if e.len() != n {
        return Err(bad());
    }
    let mut out = Vec::with_capacity(n * n * m * m);
    for row in e {
        if row.len() != n {
            return Err(bad());
        }
        for block in row {
            if block.len() != m {
                return Err(bad());
            }
            for line in block {
                if line.len() != m {
                    return Err(bad());
                }
                out.extend(line.iter().map(|&[re, im]| Complex64::new(re, im)));
            }
        }
    }
    Ok(out)
}

fn tensor(path: &str, n: usize, m: usize, e: &Entries) -> Result<CoefficientTensor, InputError> {
    CoefficientTensor::new(n, m, flatten(path, n, m, e)?).map_err(|err| invalid(path, err.to_string()))
}

/// Parses a tensor or a field document.
pub fn parse_field(path: &str, text: &str) -> Result<TensorField, InputError> {
    let doc: TensorDoc = parse(path, text)?;
    check_schema(path, doc.schema)?;
    match (doc.entries, doc.samples) {
        (Some(e), None) => {
            if doc.grid.is_some() || doc.periodic.is_some() {
                return Err(invalid(path, "\"grid\" and \"periodic\" belong to field documents"));
            }
            Ok(TensorField::Constant(tensor(path, doc.n, doc.m, &e)?))
        }
        (None, Some(samples)) => {
            let grid = doc.grid.ok_or_else(|| invalid(path, "field documents need \"grid\""))?;
            let samples = samples
                .iter()
                .enumerate()
                .map(|(i, e)| tensor(path, doc.n, doc.m, e).map_err(|err| invalid(path, format!("sample {i}: {err}"))))
                .collect::<Result<Vec<_>, _>>()?;
            let field = SampledField::new(grid, doc.periodic.unwrap_or(false), samples)
                .map_err(|e| invalid(path, e.to_string()))?;
            Ok(TensorField::Sampled(field))
        }
        (Some(_), Some(_)) => Err(invalid(path, "give either \"entries\" or \"samples\", not both")),
        (None, None) => Err(invalid(path, "missing \"entries\" (tensor) or \"samples\" (field)")),
    }
}

pub fn read_field(path: &str) -> Result<TensorField, InputError> {
    parse_field(path, &read_source(path)?)
}

pub fn read_moduli(path: &str) -> Result<(Vec<f64>, Vec<f64>), InputError> {
    let text = read_source(path)?;
    let doc: ModuliDoc = parse(path, &text)?;
    check_schema(path, doc.schema)?;
    if doc.lambda.len() != doc.mu.len() || doc.lambda.is_empty() {
        return Err(invalid(path, "\"lambda\" and \"mu\" must be non-empty and equally long"));
    }
    Ok((doc.lambda, doc.mu))
}

pub fn complex(z: Complex64) -> Value {
    json!([num(z.re), num(z.im)])
}

pub fn complexes(zs: &[Complex64]) -> Value {
    Value::Array(zs.iter().copied().map(complex).collect())
}

/// A JSON number, or `"inf"` / `"-inf"` (JSON has no infinity), or null for NaN.
pub fn num(x: f64) -> Value {
    if x == f64::INFINITY {
        json!("inf")
    } else if x == f64::NEG_INFINITY {
        json!("-inf")
    } else {
        serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
    }
}

#[cfg(test)]
pub fn tensor_json(a: &CoefficientTensor) -> Value {
    let (n, m) = (a.n(), a.m());
    let entries: Vec<Value> = (0..n)
        .map(|h| {
            Value::Array(
                (0..n)
                    .map(|k| {
                        Value::Array(
                            (0..m)
                                .map(|al| Value::Array((0..m).map(|be| complex(a.get(h, k, al, be))).collect()))
                                .collect(),
                        )
                    })
                    .collect(),
            )
        })
        .collect();
    json!({"schema": SCHEMA, "n": n, "m": m, "entries": entries})
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tensor_round_trip() {
        let a = pell_core::lame::lame_tensor(1.0, 2.0, 0.3, 2).unwrap();
        let text = tensor_json(&a).to_string();
        match parse_field("t.json", &text).unwrap() {
            TensorField::Constant(b) => assert_eq!(a, b),
            _ => panic!("expected a constant field"),
        }
    }

    #[test]
    fn syntax_errors_carry_positions() {
        let err = parse_field("x.json", "{\n  \"schema\": 1,\n  \"n\": oops\n}").unwrap_err();
        match err {
            InputError::Syntax { line, column, .. } => assert_eq!((line, column), (3, 8)),
            e => panic!("{e}"),
        }
    }

    #[test]
    fn shape_and_schema_checks() {
        let bad = r#"{"schema": 1, "n": 1, "m": 1, "entries": [[[[[1, 0], [2, 0]]]]]}"#;
        assert!(matches!(parse_field("a", bad), Err(InputError::Invalid { .. })));
        let v2 = r#"{"schema": 2, "n": 1, "m": 1, "entries": [[[[[1, 0]]]]]}"#;
        assert!(matches!(parse_field("a", v2), Err(InputError::Invalid { .. })));
        let field = r#"{"schema": 1, "n": 1, "m": 1, "grid": [2], "periodic": true,
                        "samples": [[[[[[1, 0]]]]], [[[[[2, 0]]]]]]}"#;
        assert!(matches!(parse_field("a", field), Ok(TensorField::Sampled(_))));
    }

    #[test]
    fn infinity_is_a_string() {
        assert_eq!(num(f64::INFINITY), json!("inf"));
        assert_eq!(num(2.5), json!(2.5));
    }
}
