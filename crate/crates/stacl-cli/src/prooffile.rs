//! The derivation file format: a JSON tree of rule applications checked by
//! the proof kernel.
//!
//! ```json
//! {
//!   "generator_file": "drug.json",
//!   "layer": "AXGCP",
//!   "context": ["hypothesis", ...],
//!   "root": {
//!     "rule": "MP",
//!     "gen": "drug[x:=c1]E",           // inherited from the parent if absent
//!     "context": ["..."],              // inherited if absent (Deduction overrides)
//!     "bind": { "x": "<z>", ... },     // typed by the key's naming convention
//!     "conclusion": "formula",
//!     "premises": [ ... ]
//!   }
//! }
//! ```
//!
//! Rejections print node paths like `root.premises[1]`.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use stacl_core::parse::{
    parse_assignments, parse_formula, parse_gen_ref, parse_kernel_ref, parse_term,
    parse_var_tuple, Parser, Signature,
};
use stacl_core::proof::{
    binding_sort, Binding, BindingSort, Bindings, DerivationNode, Judgment, Layer, Rule,
};
use stacl_core::syntax::{Formula, GenRef};
use stacl_core::world::Model;

use crate::model::{ModelError, ModelFile};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProofFile {
    pub generator_file: String,
    pub layer: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub context: Vec<String>,
    pub root: NodeFile,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NodeFile {
    pub rule: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gen: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub context: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub bind: BTreeMap<String, String>,
    pub conclusion: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub premises: Vec<NodeFile>,
}

#[derive(Debug, Error)]
pub enum ProofError {
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("model: {0}")]
    Model(#[from] ModelError),
    #[error("unknown rule `{0}`")]
    UnknownRule(String),
    #[error("unknown layer `{0}`")]
    UnknownLayer(String),
    #[error("{path}: binding `{key}`: {msg}")]
    Binding { path: String, key: String, msg: String },
    #[error("{path}: {msg}")]
    Node { path: String, msg: String },
}

/// A proof file resolved against its model.
pub struct LoadedProof {
    pub model: Arc<Model>,
    pub model_path: PathBuf,
    pub root: DerivationNode,
}

pub fn load_proof(path: &Path) -> Result<LoadedProof, ProofError> {
    let text = std::fs::read_to_string(path)?;
    let file: ProofFile = serde_json::from_str(&text)?;
    let model_path = path
        .parent()
        .unwrap_or_else(|| Path::new("."))
        .join(&file.generator_file);
    let model_file = ModelFile::load(&model_path)?;
    let model = model_file.to_model()?;
    let sig = model_file.signature();
    let layer = Layer::from_name(&file.layer)
        .ok_or_else(|| ProofError::UnknownLayer(file.layer.clone()))?;
    let context = parse_formulas(&file.context, &sig, "root")?;
    let base_gen = GenRef::base(model.base.id.clone());
    let root = resolve_node(&file.root, &sig, layer, &base_gen, &context, "root")?;
    Ok(LoadedProof {
        model,
        model_path,
        root,
    })
}

fn parse_formulas(
    sources: &[String],
    sig: &Signature,
    path: &str,
) -> Result<Vec<Formula>, ProofError> {
    sources
        .iter()
        .map(|src| {
            parse_formula(src, sig).map_err(|e| ProofError::Node {
                path: path.to_string(),
                msg: format!("context formula `{src}`: {e}"),
            })
        })
        .collect()
}

fn resolve_node(
    node: &NodeFile,
    sig: &Signature,
    layer: Layer,
    parent_gen: &GenRef,
    parent_ctx: &[Formula],
    path: &str,
) -> Result<DerivationNode, ProofError> {
    let rule = Rule::from_name(&node.rule).ok_or_else(|| ProofError::UnknownRule(node.rule.clone()))?;
    let gen = match &node.gen {
        None => parent_gen.clone(),
        Some(src) => parse_gen_ref(src, sig).map_err(|e| ProofError::Node {
            path: path.to_string(),
            msg: format!("generator reference `{src}`: {e}"),
        })?,
    };
    let context = match &node.context {
        None => parent_ctx.to_vec(),
        Some(srcs) => parse_formulas(srcs, sig, path)?,
    };
    let conclusion = parse_formula(&node.conclusion, sig).map_err(|e| ProofError::Node {
        path: path.to_string(),
        msg: format!("conclusion: {e}"),
    })?;
    let mut bind = Bindings::new();
    for (key, value) in &node.bind {
        bind.insert(key.clone(), parse_binding(key, value, sig, path)?);
    }
    let mut premises = Vec::with_capacity(node.premises.len());
    for (i, p) in node.premises.iter().enumerate() {
        let child_path = format!("{path}.premises[{i}]");
        premises.push(resolve_node(p, sig, layer, &gen, &context, &child_path)?);
    }
    Ok(DerivationNode {
        rule,
        bind,
        judgment: Judgment {
            context,
            gen,
            layer,
            conclusion,
        },
        premises,
    })
}

fn parse_binding(
    key: &str,
    value: &str,
    sig: &Signature,
    path: &str,
) -> Result<Binding, ProofError> {
    let err = |msg: String| ProofError::Binding {
        path: path.to_string(),
        key: key.to_string(),
        msg,
    };
    let sort = binding_sort(key).ok_or_else(|| err("unrecognized binding key".to_string()))?;
    Ok(match sort {
        BindingSort::Tuple => {
            Binding::Tuple(parse_var_tuple(value, sig).map_err(|e| err(e.to_string()))?)
        }
        BindingSort::Assigns => {
            Binding::Assigns(parse_assignments(value, sig).map_err(|e| err(e.to_string()))?)
        }
        BindingSort::Term => Binding::Term(parse_term(value, sig).map_err(|e| err(e.to_string()))?),
        BindingSort::Kref => {
            Binding::Kref(parse_kernel_ref(value, sig).map_err(|e| err(e.to_string()))?)
        }
        BindingSort::CondV => {
            let mut p = Parser::new(value, sig).map_err(|e| err(e.to_string()))?;
            let cv = p.cond_var().map_err(|e| err(e.to_string()))?;
            Binding::CondV(cv)
        }
        BindingSort::Gen => {
            Binding::Gen(parse_gen_ref(value, sig).map_err(|e| err(e.to_string()))?)
        }
        BindingSort::Formula => {
            Binding::Formula(parse_formula(value, sig).map_err(|e| err(e.to_string()))?)
        }
        BindingSort::Indices => {
            let indices = value
                .split(',')
                .filter(|s| !s.trim().is_empty())
                .map(|s| s.trim().parse::<usize>().map_err(|e| err(e.to_string())))
                .collect::<Result<Vec<_>, _>>()?;
            Binding::Indices(indices)
        }
        BindingSort::Consts => Binding::Consts(
            value
                .split(',')
                .map(|s| s.trim().to_string())
                .filter(|s| !s.is_empty())
                .collect(),
        ),
    })
}

/// Serializes a checked derivation back into the file format, inheriting
/// generators and contexts from parents where they agree.
pub fn proof_to_file(
    generator_file: &str,
    root: &DerivationNode,
) -> ProofFile {
    let base_gen = GenRef::base(root.judgment.gen.base.clone());
    ProofFile {
        generator_file: generator_file.to_string(),
        layer: root.judgment.layer.name().to_string(),
        context: root.judgment.context.iter().map(|f| f.to_string()).collect(),
        root: node_to_file(root, &base_gen, &root.judgment.context),
    }
}

fn node_to_file(node: &DerivationNode, parent_gen: &GenRef, parent_ctx: &[Formula]) -> NodeFile {
    let gen = if node.judgment.gen == *parent_gen {
        None
    } else {
        Some(node.judgment.gen.to_string())
    };
    let context = if node.judgment.context == parent_ctx {
        None
    } else {
        Some(node.judgment.context.iter().map(|f| f.to_string()).collect())
    };
    let bind = node
        .bind
        .iter()
        .map(|(k, v)| (k.clone(), binding_to_string(v)))
        .collect();
    NodeFile {
        rule: node.rule.name().to_string(),
        gen,
        context,
        bind,
        conclusion: node.judgment.conclusion.to_string(),
        premises: node
            .premises
            .iter()
            .map(|p| node_to_file(p, &node.judgment.gen, &node.judgment.context))
            .collect(),
    }
}

pub fn binding_to_string(b: &Binding) -> String {
    match b {
        Binding::Tuple(t) => t.to_string(),
        Binding::Assigns(a) => a.to_string(),
        Binding::Term(t) => t.to_string(),
        Binding::Kref(k) => k.to_string(),
        Binding::CondV(cv) => cv.to_string(),
        Binding::Gen(g) => g.to_string(),
        Binding::Formula(f) => f.to_string(),
        Binding::Indices(is) => is
            .iter()
            .map(|i| i.to_string())
            .collect::<Vec<_>>()
            .join(","),
        Binding::Consts(cs) => cs.join(","),
    }
}

pub fn proof_json(file: &ProofFile) -> String {
    let mut out = serde_json::to_string_pretty(file).expect("proof serializes");
    out.push('\n');
    out
}
