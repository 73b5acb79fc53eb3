//! JSON line-class documents: field description, class with provenance, and
//! lines as normalized Plücker tuples in ascending order.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use clines_core::classes::{LineClass, ProvenanceStep};
use clines_core::geometry::{klein_relation, DEFAULT_MAX_Q};
use clines_core::{Fe, Field, Geometry, IdSet};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum DocumentError {
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported schema version {0}")]
    Schema(u32),
    #[error("field: {0}")]
    Field(String),
    #[error("line {index}: {reason}")]
    Line { index: usize, reason: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldBlock {
    pub p: u32,
    pub e: u32,
    pub modulus: Vec<u32>,
    pub omega: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassBlock {
    pub parameter: u32,
    pub provenance: Vec<ProvenanceStep>,
    pub lines: Vec<[u32; 6]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineClassDocument {
    pub schema_version: u32,
    pub field: FieldBlock,
    pub class: ClassBlock,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reports: Option<serde_json::Value>,
}

impl LineClassDocument {
    pub fn from_class(g: &Geometry, class: &LineClass) -> LineClassDocument {
        let f = g.field();
        LineClassDocument {
            schema_version: SCHEMA_VERSION,
            field: FieldBlock {
                p: f.characteristic(),
                e: f.degree(),
                modulus: f.modulus().to_vec(),
                omega: g.omega().code(),
            },
            class: ClassBlock {
                parameter: class.parameter,
                provenance: class.provenance.clone(),
                lines: class
                    .lines
                    .iter()
                    .map(|l| g.plucker(l).map(|c| c.code()))
                    .collect(),
            },
            reports: None,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("documents serialize");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<LineClassDocument, DocumentError> {
        let doc: LineClassDocument = serde_json::from_str(text)?;
        if doc.schema_version != SCHEMA_VERSION {
            return Err(DocumentError::Schema(doc.schema_version));
        }
        Ok(doc)
    }

    /// The canonical field for `(p, e)`, rejecting any other modulus.
    pub fn field(&self) -> Result<Field, DocumentError> {
        let fb = &self.field;
        let f = Field::new(fb.p, fb.e).map_err(|e| DocumentError::Field(e.to_string()))?;
        if f.modulus() != fb.modulus.as_slice() {
            return Err(DocumentError::Field(format!(
                "modulus {:?} is not the canonical {:?}",
                fb.modulus,
                f.modulus()
            )));
        }
        Ok(f)
    }

    pub fn geometry(&self, max_q: Option<u32>) -> Result<Geometry, DocumentError> {
        let f = self.field()?;
        let omega = f
            .element(self.field.omega)
            .map_err(|e| DocumentError::Field(e.to_string()))?;
        Geometry::build_with(f, omega, max_q.unwrap_or(DEFAULT_MAX_Q))
            .map_err(|e| DocumentError::Field(e.to_string()))
    }

    /// Resolves every tuple to a line id. Size is not checked here; the
    /// verifier reports a size that is not a multiple of q²+q+1.
    pub fn to_class(&self, g: &Geometry) -> Result<LineClass, DocumentError> {
        let f = g.field();
        let mut lines = IdSet::new(g.num_lines());
        for (index, tuple) in self.class.lines.iter().enumerate() {
            let bad = |reason: String| DocumentError::Line { index, reason };
            let mut coords = [Fe::ZERO; 6];
            for (c, &code) in coords.iter_mut().zip(tuple) {
                *c = f.element(code).map_err(|e| bad(e.to_string()))?;
            }
            if !klein_relation(f, &coords).is_zero() {
                return Err(bad("not on the Klein quadric".into()));
            }
            let id = g.line_id(&coords).ok_or_else(|| bad("not a line".into()))?;
            if g.plucker(id) != &coords {
                return Err(bad("tuple is not normalized".into()));
            }
            if !lines.insert(id) {
                return Err(bad("duplicate line".into()));
            }
        }
        Ok(LineClass {
            q: g.q(),
            lines,
            parameter: self.class.parameter,
            provenance: self.class.provenance.clone(),
        })
    }
}
