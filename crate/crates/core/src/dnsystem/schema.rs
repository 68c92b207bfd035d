//! JSON form of a system.
//!
//! ```json
//! {"p": 1, "n": 2,
//!  "ops": [[{"terms": [{"mu": [2, 0], "coeff": {"re": 1, "im": 0}},
//!                      {"mu": [0, 2], "coeff": {"fourier": [{"k": [1, 0], "re": 0.5, "im": 0}]}}]}]],
//!  "dn": {"l": [0], "m": [2]}}
//! ```
//! A zero block is `{"terms": []}`; `dn` may be omitted.

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{DiffOp, DnNumbers, DnSystem, TrigPoly};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSpec {
    pub p: usize,
    pub n: usize,
    pub ops: Vec<Vec<OpSpec>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dn: Option<DnSpec>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OpSpec {
    pub terms: Vec<TermSpec>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermSpec {
    pub mu: Vec<u32>,
    pub coeff: CoeffSpec,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CoeffSpec {
    Constant { re: f64, #[serde(default)] im: f64 },
    Fourier { fourier: Vec<FourierTerm> },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FourierTerm {
    pub k: Vec<i64>,
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DnSpec {
    pub l: Vec<f64>,
    pub m: Vec<f64>,
}

impl CoeffSpec {
    fn build(&self, dim: usize) -> Result<TrigPoly> {
        match self {
            CoeffSpec::Constant { re, im } => Ok(TrigPoly::constant(Complex64::new(*re, *im))),
            CoeffSpec::Fourier { fourier } => {
                let mut terms = Vec::with_capacity(fourier.len());
                for t in fourier {
                    if t.k.len() != dim {
                        return Err(Error::InvalidSystem(format!(
                            "fourier mode {:?} has length {} but n = {dim}",
                            t.k,
                            t.k.len()
                        )));
                    }
                    let mut m = [0i64; 3];
                    m[..dim].copy_from_slice(&t.k);
                    terms.push((m, Complex64::new(t.re, t.im)));
                }
                Ok(TrigPoly::new(terms))
            }
        }
    }

    fn from_poly(a: &TrigPoly, dim: usize) -> Self {
        if a.is_constant() {
            let c = a.terms().first().map(|t| t.1).unwrap_or_default();
            return CoeffSpec::Constant { re: c.re, im: c.im };
        }
        CoeffSpec::Fourier {
            fourier: a
                .terms()
                .iter()
                .map(|(m, c)| FourierTerm {
                    k: m[..dim].to_vec(),
                    re: c.re,
                    im: c.im,
                })
                .collect(),
        }
    }
}

impl SystemSpec {
    pub fn build(&self) -> Result<DnSystem> {
        if self.ops.len() != self.p {
            return Err(Error::ShapeMismatch {
                expected: self.p,
                got: self.ops.len(),
            });
        }
        let ops = self
            .ops
            .iter()
            .map(|row| {
                if row.len() != self.p {
                    return Err(Error::ShapeMismatch {
                        expected: self.p,
                        got: row.len(),
                    });
                }
                row.iter()
                    .map(|op| {
                        let terms = op
                            .terms
                            .iter()
                            .map(|t| Ok((t.mu.clone(), t.coeff.build(self.n)?)))
                            .collect::<Result<Vec<_>>>()?;
                        Ok(DiffOp::new(terms))
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let dn = match &self.dn {
            Some(d) => Some(DnNumbers::new(d.l.clone(), d.m.clone())?),
            None => None,
        };
        DnSystem::new(self.n, ops, dn)
    }

    pub fn from_system(sys: &DnSystem) -> Self {
        let dim = sys.dim();
        SystemSpec {
            p: sys.p(),
            n: dim,
            ops: sys
                .ops()
                .iter()
                .map(|row| {
                    row.iter()
                        .map(|op| OpSpec {
                            terms: op
                                .terms()
                                .map(|(mu, a)| TermSpec {
                                    mu: mu.clone(),
                                    coeff: CoeffSpec::from_poly(a, dim),
                                })
                                .collect(),
                        })
                        .collect()
                })
                .collect(),
            dn: sys.dn().map(|d| DnSpec {
                l: d.l.clone(),
                m: d.m.clone(),
            }),
        }
    }
}

pub fn parse_system(text: &str) -> Result<DnSystem> {
    let spec: SystemSpec = serde_json::from_str(text)?;
    spec.build()
}

pub fn load_system(path: &Path) -> Result<DnSystem> {
    parse_system(&std::fs::read_to_string(path)?)
}

pub fn system_to_json(sys: &DnSystem) -> String {
    serde_json::to_string_pretty(&SystemSpec::from_system(sys)).expect("system spec serializes")
}
