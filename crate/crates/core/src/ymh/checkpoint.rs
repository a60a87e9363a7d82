//! Binary checkpoints of lattice states.
//!
//! Layout (all integers and floats little-endian):
//!
//! | offset      | size    | content                                   |
//! |-------------|---------|-------------------------------------------|
//! | 0           | 8       | magic `YMHCKPT1`                          |
//! | 8           | 4       | `u32` header length `L`                   |
//! | 12          | `L`     | UTF-8 JSON header ([`CheckpointHeader`])  |
//! | 12 + `L`    | 8 × len | `f64` field data: `A`, `D`, `φ`, `π`, `A₀` |
//!
//! Each field is site-major (x fastest), then direction for `A` and `D`,
//! then component.

use serde::{Deserialize, Serialize};
use std::io::{Read, Write};
use std::path::Path;

use super::{fiber_dim, representation_name, LatticeGeometry, LatticeState, YmhParams};
use crate::error::{Error, Result};
use crate::lie::Group;

pub const MAGIC: &[u8; 8] = b"YMHCKPT1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldEntry {
    pub name: String,
    /// Number of `f64` values.
    pub len: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckpointHeader {
    pub group: Group,
    pub representation: String,
    pub n: usize,
    pub a: f64,
    pub t: f64,
    pub dt: f64,
    pub mu: f64,
    pub v: f64,
    pub fields: Vec<FieldEntry>,
}

/// A state together with the run parameters stored alongside it.
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub state: LatticeState,
    pub params: YmhParams,
    pub dt: f64,
}

fn field_entries(state: &LatticeState) -> Vec<FieldEntry> {
    let (a, d, phi, pi, a0) = state.sections();
    [("A", a.len()), ("D", d.len()), ("phi", phi.len()), ("pi", pi.len()), ("A0", a0.len())]
        .into_iter()
        .map(|(name, len)| FieldEntry {
            name: name.to_string(),
            len,
        })
        .collect()
}

pub fn encode(cp: &Checkpoint) -> Result<Vec<u8>> {
    let s = &cp.state;
    let header = CheckpointHeader {
        group: s.group,
        representation: representation_name(s.group).to_string(),
        n: s.geom.n,
        a: s.geom.a,
        t: s.t,
        dt: cp.dt,
        mu: cp.params.mu,
        v: cp.params.v,
        fields: field_entries(s),
    };
    let json = serde_json::to_vec(&header).map_err(|e| Error::Checkpoint(e.to_string()))?;
    let len = u32::try_from(json.len()).map_err(|_| Error::Checkpoint("header too large".into()))?;
    let mut out = Vec::with_capacity(12 + json.len() + 8 * s.data.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&len.to_le_bytes());
    out.extend_from_slice(&json);
    for v in &s.data {
        out.extend_from_slice(&v.to_le_bytes());
    }
    Ok(out)
}

pub fn decode(bytes: &[u8]) -> Result<Checkpoint> {
    if bytes.len() < 12 || &bytes[..8] != MAGIC {
        return Err(Error::Checkpoint("missing YMHCKPT1 magic".into()));
    }
    let len = u32::from_le_bytes(bytes[8..12].try_into().expect("4 bytes")) as usize;
    let body = bytes
        .get(12..12 + len)
        .ok_or_else(|| Error::Checkpoint("truncated header".into()))?;
    let header: CheckpointHeader = serde_json::from_slice(body).map_err(|e| Error::Checkpoint(e.to_string()))?;
    if header.representation != representation_name(header.group) {
        return Err(Error::Checkpoint(format!(
            "representation {} is not supported for {}",
            header.representation, header.group
        )));
    }
    let geom = LatticeGeometry::new(header.n, header.a)?;
    let mut template = LatticeState::zeros(geom, header.group)?;
    if header.fields != field_entries(&template) {
        return Err(Error::Checkpoint("field table does not match the lattice shape".into()));
    }
    let payload = &bytes[12 + len..];
    if payload.len() != 8 * template.data.len() {
        return Err(Error::Checkpoint(format!(
            "expected {} data bytes, found {}",
            8 * template.data.len(),
            payload.len()
        )));
    }
    for (v, chunk) in template.data.iter_mut().zip(payload.chunks_exact(8)) {
        *v = f64::from_le_bytes(chunk.try_into().expect("8 bytes"));
    }
    template.t = header.t;
    debug_assert_eq!(template.f(), fiber_dim(header.group));
    Ok(Checkpoint {
        state: template,
        params: YmhParams {
            mu: header.mu,
            v: header.v,
        },
        dt: header.dt,
    })
}

pub fn write_checkpoint(path: &Path, cp: &Checkpoint) -> Result<()> {
    let bytes = encode(cp)?;
    let mut f = std::fs::File::create(path)?;
    f.write_all(&bytes)?;
    Ok(())
}

pub fn read_checkpoint(path: &Path) -> Result<Checkpoint> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut bytes)?;
    decode(&bytes)
}
