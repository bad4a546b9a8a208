//! Tensor JSON format:
//! `{"kind":"riemann"|"kahler","dim":n,"components":[...],"convention":"..."}`
//! with components in row-major `(i, j, k, l)` order and complex entries as
//! `[re, im]` pairs.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{KahlerTensor, Kind, RiemannTensor, Tensor};
use crate::error::{invalid, Result};
use crate::linalg::C64;

/// Symmetry residual tolerance (relative to `max(1, |T|)`) applied by readers.
pub const READER_TOL: f64 = 1e-9;

pub const RIEMANN_CONVENTION: &str = "R_ijij is the sectional curvature of span{e_i,e_j}; \
Lambda2 basis e_i^e_j (i<j) with operator entries R_ijkl, so Scal = 2 tr; components row-major (i,j,k,l)";

pub const KAHLER_CONVENTION: &str = "components R_{i jbar k lbar}; fubini_study(n,1) has \
R(X,Xbar,X,Xbar) = 2 for unit X; real form uses x_k -> 2k, y_k = J x_k -> 2k+1; \
Kahler and Riemannian reactions agree under realification with factor 1; components row-major (i,j,k,l)";

#[derive(Serialize, Deserialize)]
struct RealDoc {
    kind: String,
    dim: usize,
    components: Vec<f64>,
    convention: String,
}

#[derive(Serialize, Deserialize)]
struct ComplexDoc {
    kind: String,
    dim: usize,
    components: Vec<[f64; 2]>,
    convention: String,
}

pub fn to_json_value(t: &Tensor) -> Value {
    match t {
        Tensor::Riemann(r) => serde_json::to_value(RealDoc {
            kind: Kind::Riemann.as_str().into(),
            dim: r.dim(),
            components: r.components().to_vec(),
            convention: RIEMANN_CONVENTION.into(),
        }),
        Tensor::Kahler(k) => serde_json::to_value(ComplexDoc {
            kind: Kind::Kahler.as_str().into(),
            dim: k.dim(),
            components: k.components().iter().map(|z| [z.re, z.im]).collect(),
            convention: KAHLER_CONVENTION.into(),
        }),
    }
    .expect("tensor documents always serialize")
}

pub fn to_json_string(t: &Tensor) -> String {
    serde_json::to_string(&to_json_value(t)).expect("tensor documents always serialize")
}

/// Parses a tensor document. Without `project`, inputs whose symmetry
/// residual exceeds [`READER_TOL`] are rejected; with it, they are projected.
pub fn from_json_value(v: &Value, project: bool) -> Result<Tensor> {
    let kind = v.get("kind").and_then(Value::as_str).ok_or_else(|| {
        crate::Error::InvalidInput("tensor JSON needs a string \"kind\"".into())
    })?;
    let dim = v
        .get("dim")
        .and_then(Value::as_u64)
        .ok_or_else(|| crate::Error::InvalidInput("tensor JSON needs an integer \"dim\"".into()))?
        as usize;
    if dim == 0 || dim > 64 {
        return invalid(format!("unsupported dimension {dim}"));
    }
    let comps = v
        .get("components")
        .and_then(Value::as_array)
        .ok_or_else(|| crate::Error::InvalidInput("tensor JSON needs \"components\"".into()))?;
    match kind {
        "riemann" => {
            let mut raw = Vec::with_capacity(comps.len());
            for c in comps {
                raw.push(c.as_f64().ok_or_else(|| {
                    crate::Error::InvalidInput("Riemannian components must be numbers".into())
                })?);
            }
            if project {
                Ok(RiemannTensor::project(dim, &raw)?.into())
            } else {
                Ok(RiemannTensor::from_components(dim, raw, READER_TOL)?.into())
            }
        }
        "kahler" => {
            let mut raw = Vec::with_capacity(comps.len());
            for c in comps {
                let pair = c.as_array().filter(|a| a.len() == 2);
                let z = pair.and_then(|a| Some(C64::new(a[0].as_f64()?, a[1].as_f64()?)));
                raw.push(z.ok_or_else(|| {
                    crate::Error::InvalidInput("Kähler components must be [re, im] pairs".into())
                })?);
            }
            if project {
                Ok(KahlerTensor::project(dim, &raw)?.into())
            } else {
                Ok(KahlerTensor::from_components(dim, raw, READER_TOL)?.into())
            }
        }
        other => invalid(format!("unknown tensor kind {other:?}")),
    }
}

pub fn from_json_str(s: &str, project: bool) -> Result<Tensor> {
    let v: Value = serde_json::from_str(s)
        .map_err(|e| crate::Error::InvalidInput(format!("malformed tensor JSON: {e}")))?;
    from_json_value(&v, project)
}

pub fn read_tensor(path: &std::path::Path, project: bool) -> Result<Tensor> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| crate::Error::InvalidInput(format!("cannot read {}: {e}", path.display())))?;
    from_json_str(&text, project)
}

pub fn write_tensor(path: &std::path::Path, t: &Tensor) -> Result<()> {
    std::fs::write(path, to_json_string(t))?;
    Ok(())
}
