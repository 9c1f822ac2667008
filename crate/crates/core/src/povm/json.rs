//! POVM interchange format.
//!
//! ```text
//! { "dim": 3 | 9,
//!   "outcomes": [ { "label": "0", "matrix": [[[re, im], ...], ...] }, ... ],
//!   "meta": { "ka": [re, im], "kb": [re, im], "branch": "...", "kappa": [u1, u2, u3] },
//!   "sequential": { "alice": [...], "bob": [...] } }
//! ```
//!
//! Matrices are row-major. Floats are written with 17 significant digits.
//! The `sequential` object is optional; when present it holds Alice's seven
//! operators and Bob's four-outcome measurement for each of her labels.

use std::io;

use serde::{Deserialize, Serialize};

use super::{Povm, SequentialMeasurement, ALICE_LABELS};
use crate::error::{Error, Result};
use crate::numerics::{CMat, C64};
use crate::optimality::Branch;

pub type JsonMatrix = Vec<Vec<[f64; 2]>>;

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct JsonOutcome {
    pub label: String,
    pub matrix: JsonMatrix,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct Meta {
    pub ka: [f64; 2],
    pub kb: [f64; 2],
    pub branch: String,
    pub kappa: [f64; 3],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub success: Option<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct JsonBob {
    pub label: String,
    pub outcomes: Vec<JsonOutcome>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct JsonSequential {
    pub alice: Vec<JsonOutcome>,
    pub bob: Vec<JsonBob>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct PovmDocument {
    pub dim: usize,
    pub outcomes: Vec<JsonOutcome>,
    pub meta: Meta,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sequential: Option<JsonSequential>,
}

pub fn matrix_to_json<const N: usize>(m: &CMat<N>) -> JsonMatrix {
    m.0.iter()
        .map(|row| row.iter().map(|c| [c.re, c.im]).collect())
        .collect()
}

pub fn matrix_from_json<const N: usize>(m: &JsonMatrix) -> Result<CMat<N>> {
    if m.len() != N || m.iter().any(|row| row.len() != N) {
        return Err(Error::InvalidPovm(format!("expected a {N}x{N} matrix")));
    }
    let mut out = CMat::<N>::zero();
    for (i, row) in m.iter().enumerate() {
        for (j, [re, im]) in row.iter().enumerate() {
            out.0[i][j] = C64::new(*re, *im);
        }
    }
    Ok(out)
}

fn outcomes_to_json<const N: usize>(p: &Povm<N>) -> Vec<JsonOutcome> {
    p.outcomes
        .iter()
        .zip(&p.labels)
        .map(|(m, l)| JsonOutcome {
            label: l.clone(),
            matrix: matrix_to_json(m),
        })
        .collect()
}

fn outcomes_from_json<const N: usize>(o: &[JsonOutcome]) -> Result<Povm<N>> {
    let outcomes = o
        .iter()
        .map(|x| matrix_from_json::<N>(&x.matrix))
        .collect::<Result<Vec<_>>>()?;
    Ok(Povm {
        outcomes,
        labels: o.iter().map(|x| x.label.clone()).collect(),
    })
}

impl PovmDocument {
    pub fn from_povm9(p: &Povm<9>, meta: Meta, seq: Option<&SequentialMeasurement>) -> Self {
        let sequential = seq.map(|s| JsonSequential {
            alice: ALICE_LABELS
                .iter()
                .zip(&s.alice)
                .map(|(l, m)| JsonOutcome {
                    label: l.to_string(),
                    matrix: matrix_to_json(m),
                })
                .collect(),
            bob: ALICE_LABELS
                .iter()
                .zip(&s.bob)
                .map(|(l, b)| JsonBob {
                    label: l.to_string(),
                    outcomes: outcomes_to_json(b),
                })
                .collect(),
        });
        PovmDocument {
            dim: 9,
            outcomes: outcomes_to_json(p),
            meta,
            sequential,
        }
    }

    /// The flattened joint POVM; fails unless `dim` is 9 and every matrix
    /// is 9x9.
    pub fn povm9(&self) -> Result<Povm<9>> {
        if self.dim != 9 {
            return Err(Error::InvalidPovm(format!("expected dim 9, found {}", self.dim)));
        }
        outcomes_from_json(&self.outcomes)
    }

    pub fn povm3(&self) -> Result<Povm<3>> {
        if self.dim != 3 {
            return Err(Error::InvalidPovm(format!("expected dim 3, found {}", self.dim)));
        }
        outcomes_from_json(&self.outcomes)
    }

    pub fn sequential(&self) -> Result<Option<SequentialMeasurement>> {
        let Some(s) = &self.sequential else { return Ok(None) };
        if s.alice.len() != 7 || s.bob.len() != 7 {
            return Err(Error::InvalidPovm("sequential measurement needs seven labels".into()));
        }
        let alice = s
            .alice
            .iter()
            .map(|o| matrix_from_json::<3>(&o.matrix))
            .collect::<Result<Vec<_>>>()?;
        let bob = s
            .bob
            .iter()
            .map(|b| {
                if b.outcomes.len() != 4 {
                    return Err(Error::InvalidPovm(format!("{}: Bob needs four outcomes", b.label)));
                }
                outcomes_from_json::<3>(&b.outcomes)
            })
            .collect::<Result<Vec<_>>>()?;
        let branch = Branch::parse(&self.meta.branch)
            .ok_or_else(|| Error::InvalidPovm(format!("unknown branch {:?}", self.meta.branch)))?;
        Ok(Some(SequentialMeasurement {
            alice: alice.try_into().expect("length checked"),
            bob: bob.try_into().expect("length checked"),
            kappa: self.meta.kappa,
            branch,
        }))
    }
}

/// Writes floats as `{:.16e}`.
#[derive(Clone, Debug, Default)]
pub struct PreciseFormatter;

impl serde_json::ser::Formatter for PreciseFormatter {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }
}

/// Serializes any value with [`PreciseFormatter`].
pub fn to_precise_json<T: Serialize>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, PreciseFormatter);
    value.serialize(&mut ser).expect("serialization to memory cannot fail");
    String::from_utf8(buf).expect("serde_json emits UTF-8")
}

pub fn parse_document(text: &str) -> Result<PovmDocument> {
    serde_json::from_str(text).map_err(|e| Error::InvalidPovm(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::povm::{build_sequential, flatten};
    use crate::states::{canonicalize, Overlap};
    use std::f64::consts::PI;

    #[test]
    fn round_trip_is_lossless() {
        let k = Overlap::new(C64::from_polar(0.2, PI / 10.0)).unwrap();
        let pair = canonicalize(k, k).unwrap();
        let seq = build_sequential(&pair).unwrap();
        let flat = flatten(&seq);
        let meta = Meta {
            ka: k.to_pair(),
            kb: k.to_pair(),
            branch: seq.branch.as_str().into(),
            kappa: seq.kappa,
            success: None,
        };
        let doc = PovmDocument::from_povm9(&flat, meta, Some(&seq));
        let text = to_precise_json(&doc);
        let back = parse_document(&text).unwrap();
        assert_eq!(back, doc);
        assert_eq!(back.povm9().unwrap(), flat);
        let s = back.sequential().unwrap().unwrap();
        assert_eq!(s.alice, seq.alice);
        assert!(back.povm3().is_err());
    }

    #[test]
    fn floats_have_seventeen_digits() {
        let s = to_precise_json(&vec![0.1f64, f64::NAN]);
        assert_eq!(s, "[1.0000000000000001e-1,null]");
    }

    #[test]
    fn wrong_size_matrix_rejected() {
        let m: JsonMatrix = vec![vec![[0.0, 0.0]; 3]; 2];
        assert!(matrix_from_json::<3>(&m).is_err());
    }
}
