//! The model file format: JSON description of a finite-domain world
//! (name distributions, constants, stochastic function tables, and the
//! data generator), mapped onto the core types.
//!
//! Rationals are written `"p/q"` (plain integers also parse). Writing is
//! byte-deterministic: keys sort, rationals print in lowest terms with an
//! explicit positive denominator.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use stacl_core::dist::{Distribution, PlainKernel, Rational, Val};
use stacl_core::generator::DataGenerator;
use stacl_core::parse::{parse_causal_term, Signature};
use stacl_core::world::Model;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelFile {
    pub id: String,
    pub domain_size: u8,
    #[serde(default)]
    pub names: BTreeMap<String, Vec<String>>,
    #[serde(default)]
    pub constants: BTreeMap<String, u8>,
    #[serde(default)]
    pub functions: BTreeMap<String, FunctionFile>,
    pub generator: BTreeMap<String, Option<String>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FunctionFile {
    pub arity: usize,
    pub table: BTreeMap<String, Vec<String>>,
}

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("malformed rational `{0}`")]
    Rational(String),
    #[error("name `{name}`: expected {want} entries, found {got}")]
    NameLength { name: String, want: usize, got: usize },
    #[error("distribution for `{0}` does not sum to exactly 1")]
    NotNormalized(String),
    #[error("function `{fsym}`: malformed table key `{key}`")]
    TableKey { fsym: String, key: String },
    #[error("function `{fsym}`: row `{key}` has {got} entries, expected {want}")]
    RowLength { fsym: String, key: String, want: usize, got: usize },
    #[error("generator entry `{var}`: {msg}")]
    Term { var: String, msg: String },
    #[error("{0}")]
    Build(String),
}

pub fn parse_rational(s: &str) -> Result<Rational, ModelError> {
    let parse_int = |t: &str| t.trim().parse::<BigInt>().ok();
    let r = match s.split_once('/') {
        Some((n, d)) => {
            let (n, d) = (parse_int(n), parse_int(d));
            match (n, d) {
                (Some(n), Some(d)) if !d.is_zero() => Some(Rational::new(n, d)),
                _ => None,
            }
        }
        None => parse_int(s).map(Rational::from_integer),
    };
    r.ok_or_else(|| ModelError::Rational(s.to_string()))
}

pub fn format_rational(r: &Rational) -> String {
    stacl_core::dist::format_rational(r)
}

fn dist_from_list(owner: &str, list: &[String], domain: usize) -> Result<Distribution, ModelError> {
    if list.len() != domain {
        return Err(ModelError::NameLength {
            name: owner.to_string(),
            want: domain,
            got: list.len(),
        });
    }
    let entries: Vec<(Vec<Val>, Rational)> = list
        .iter()
        .enumerate()
        .map(|(i, s)| Ok((vec![i as Val], parse_rational(s)?)))
        .collect::<Result<_, ModelError>>()?;
    Distribution::from_entries(1, entries).ok_or_else(|| ModelError::NotNormalized(owner.to_string()))
}

impl ModelFile {
    pub fn load(path: &Path) -> Result<ModelFile, ModelError> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn save(&self, path: &Path) -> Result<(), ModelError> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }

    pub fn to_json(&self) -> String {
        let mut out = serde_json::to_string_pretty(self).expect("model serializes");
        out.push('\n');
        out
    }

    /// The identifier classification this file defines.
    pub fn signature(&self) -> Signature {
        let mut sig = Signature::default();
        sig.vars.extend(self.generator.keys().cloned());
        sig.vars.extend(self.generator.keys().map(|v| format!("{v}'")));
        sig.names.extend(self.names.keys().cloned());
        sig.consts.extend(self.constants.keys().cloned());
        sig.fsyms.extend(self.functions.keys().cloned());
        sig
    }

    /// Builds and validates the core model.
    pub fn to_model(&self) -> Result<Arc<Model>, ModelError> {
        let domain = self.domain_size as usize;
        let mut names = BTreeMap::new();
        for (n, list) in &self.names {
            names.insert(n.clone(), dist_from_list(n, list, domain)?);
        }
        let mut fsyms = BTreeMap::new();
        for (f, spec) in &self.functions {
            let mut rows = BTreeMap::new();
            for (key, list) in &spec.table {
                let input: Vec<Val> = if spec.arity == 0 {
                    if !key.is_empty() {
                        return Err(ModelError::TableKey {
                            fsym: f.clone(),
                            key: key.clone(),
                        });
                    }
                    Vec::new()
                } else {
                    key.split(',')
                        .map(|v| v.trim().parse::<Val>().ok())
                        .collect::<Option<_>>()
                        .ok_or_else(|| ModelError::TableKey {
                            fsym: f.clone(),
                            key: key.clone(),
                        })?
                };
                if input.len() != spec.arity {
                    return Err(ModelError::TableKey {
                        fsym: f.clone(),
                        key: key.clone(),
                    });
                }
                if list.len() != domain {
                    return Err(ModelError::RowLength {
                        fsym: f.clone(),
                        key: key.clone(),
                        want: domain,
                        got: list.len(),
                    });
                }
                let row = dist_from_list(&format!("{f}[{key}]"), list, domain)?;
                rows.insert(input, row);
            }
            fsyms.insert(
                f.clone(),
                PlainKernel {
                    arity_in: spec.arity,
                    arity_out: 1,
                    rows,
                },
            );
        }
        let sig = self.signature();
        let mut g = DataGenerator::new(self.id.clone());
        for (v, term) in &self.generator {
            let mech = match term {
                None => None,
                Some(src) => Some(parse_causal_term(src, &sig).map_err(|e| ModelError::Term {
                    var: v.clone(),
                    msg: e.to_string(),
                })?),
            };
            g.assignments.insert(v.clone(), mech);
        }
        Model::new(self.domain_size, names, self.constants.clone(), fsyms, g)
            .map(Arc::new)
            .map_err(|e| ModelError::Build(e.to_string()))
    }

    /// Reconstructs a file from a core model (used by `intervene -o` and
    /// by the fuzzer when persisting counterexample worlds).
    pub fn from_model(model: &Model, generator: &DataGenerator) -> ModelFile {
        let domain = model.domain_size as usize;
        let dist_list = |d: &Distribution| -> Vec<String> {
            (0..domain)
                .map(|v| format_rational(&d.mass(&[v as Val])))
                .collect()
        };
        let names = model
            .names
            .iter()
            .map(|(n, d)| (n.clone(), dist_list(d)))
            .collect();
        let functions = model
            .fsyms
            .iter()
            .map(|(f, k)| {
                let table = k
                    .rows
                    .iter()
                    .map(|(input, row)| {
                        let key = input
                            .iter()
                            .map(|v| v.to_string())
                            .collect::<Vec<_>>()
                            .join(",");
                        (key, dist_list(row))
                    })
                    .collect();
                (
                    f.clone(),
                    FunctionFile {
                        arity: k.arity_in,
                        table,
                    },
                )
            })
            .collect();
        let generator_map = generator
            .assignments
            .iter()
            .map(|(v, t)| (v.clone(), t.as_ref().map(|t| t.to_string())))
            .collect();
        ModelFile {
            id: generator.id.clone(),
            domain_size: model.domain_size,
            names,
            constants: model.consts.clone(),
            functions,
            generator: generator_map,
        }
    }
}

/// Renders a distribution as the CLI's JSON object: sorted comma-joined
/// value tuples mapping to lowest-terms rationals.
pub fn distribution_json(d: &Distribution) -> serde_json::Value {
    let mut map = serde_json::Map::new();
    for (t, p) in d.support() {
        let key = t
            .iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join(",");
        map.insert(key, serde_json::Value::String(format_rational(p)));
    }
    serde_json::Value::Object(map)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rationals_parse_and_print() {
        assert_eq!(parse_rational("18/20").unwrap(), stacl_core::dist::rat(9, 10));
        assert_eq!(parse_rational("3").unwrap(), stacl_core::dist::rat(3, 1));
        assert!(parse_rational("x").is_err());
        assert!(parse_rational("1/0").is_err());
        assert_eq!(format_rational(&stacl_core::dist::rat(4, 8)), "1/2");
    }

    #[test]
    fn model_round_trip() {
        let json = r#"{
            "id": "t",
            "domain_size": 2,
            "names": { "n": ["1/2", "1/2"] },
            "constants": { "c0": 0, "c1": 1 },
            "functions": { "f": { "arity": 1, "table": { "0": ["1/3", "2/3"], "1": ["1", "0"] } } },
            "generator": { "x": "n", "y": "f(x)", "w": null }
        }"#;
        let file: ModelFile = serde_json::from_str(json).unwrap();
        let model = file.to_model().unwrap();
        assert_eq!(model.domain_size, 2);
        let back = ModelFile::from_model(&model, &model.base);
        assert_eq!(back.to_model().unwrap().base, model.base);
        // byte determinism
        assert_eq!(back.to_json(), back.to_json());
    }

    #[test]
    fn bad_rows_are_rejected() {
        let json = r#"{
            "id": "t",
            "domain_size": 2,
            "names": { "n": ["1/2", "1/3"] },
            "constants": {},
            "functions": {},
            "generator": { "x": "n" }
        }"#;
        let file: ModelFile = serde_json::from_str(json).unwrap();
        assert!(matches!(file.to_model(), Err(ModelError::NotNormalized(_))));
    }
}
