//! The end-to-end walkthrough over the bundled drug model: conditional
//! recovery rates, both interventional effects computed three ways, the
//! adjustment precondition, and the equivalence between the experimental
//! and adjusted formulas.

use std::path::Path;
use std::sync::Arc;

use anyhow::{anyhow, bail, Context, Result};
use serde_json::json;

use stacl_core::dist::rat;
use stacl_core::parse::parse_formula;
use stacl_core::syntax::{Assignments, CondVar, VarTuple};
use stacl_core::world::{truncated_factorization, Model, World};

use crate::model::{distribution_json, format_rational, ModelFile};

/// Runs the walkthrough; any numeric mismatch is an internal-invariant
/// error (the caller maps it to exit code 3).
pub fn run(drug_path: &Path) -> Result<serde_json::Value> {
    let file = ModelFile::load(drug_path)
        .with_context(|| format!("loading {}", drug_path.display()))?;
    let sig = file.signature();
    let model: Arc<Model> = file.to_model()?;
    let w = World::base(model.clone())?;
    let vt = |s: &str| VarTuple::new([s]).unwrap();

    // Conditional recovery rates from the observed joint.
    let by_xz = w.interpret_cond(
        &CondVar::new(vt("y"), VarTuple::new(["x", "z"]).unwrap(), VarTuple::empty(), vec![])
            .unwrap(),
    )?;
    let by_x = w.interpret_cond(
        &CondVar::new(vt("y"), vt("x"), VarTuple::empty(), vec![]).unwrap(),
    )?;
    // inputs are (x, z); z: 0 male, 1 female; x: 1 drug; y: 1 recovery
    let rates = [
        ("male_drug", by_xz.rows[&vec![1, 0]].mass(&[1]), rat(18, 20)),
        ("male_nodrug", by_xz.rows[&vec![0, 0]].mass(&[1]), rat(68, 80)),
        ("female_drug", by_xz.rows[&vec![1, 1]].mass(&[1]), rat(55, 80)),
        ("female_nodrug", by_xz.rows[&vec![0, 1]].mass(&[1]), rat(12, 20)),
        ("total_drug", by_x.rows[&vec![1]].mass(&[1]), rat(73, 100)),
        ("total_nodrug", by_x.rows[&vec![0]].mass(&[1]), rat(80, 100)),
    ];
    for (label, got, want) in &rates {
        if got != want {
            bail!("conditional rate {label}: got {got}, expected {want}");
        }
    }

    // Interventional effects, three routes each: eagerly intervened world,
    // truncated factorization, and the backdoor adjustment computation.
    let mut effects = serde_json::Map::new();
    for c in ["c0", "c1"] {
        let assigns = Assignments::single("x", c);
        let via_world = w.causal_effect(&assigns, &vt("y"))?;
        let via_truncation = truncated_factorization(&model, &assigns, &vt("y"))?;
        if via_world != via_truncation {
            bail!("do(x={c}): intervened world and truncated factorization disagree");
        }
        let adjusted_src = format!("margin(cond(<y>;<z>;x={c})(<z>); <y>)");
        let adjusted = w
            .interpret(&stacl_core::parse::parse_term(&adjusted_src, &sig).map_err(|e| anyhow!("{e}"))?)?
            .dist;
        if adjusted != via_world {
            bail!("do(x={c}): backdoor adjustment disagrees with the intervened world");
        }
        effects.insert(format!("do_x_{c}"), distribution_json(&via_world));
    }
    let do1 = w.causal_effect(&Assignments::single("x", "c1"), &vt("y"))?;
    let do0 = w.causal_effect(&Assignments::single("x", "c0"), &vt("y"))?;
    if do1.mass(&[1]) != rat(127, 160) || do0.mass(&[1]) != rat(29, 40) {
        bail!("interventional recovery rates moved off 127/160 and 29/40");
    }

    // The paradox inversion: intervening helps although observing suggests
    // otherwise.
    let inverted = do1.mass(&[1]) > do0.mass(&[1])
        && by_x.rows[&vec![1]].mass(&[1]) < by_x.rows[&vec![0]].mass(&[1]);
    if !inverted {
        bail!("paradox inversion failed");
    }

    // Adjustment precondition and the experiment/adjustment equivalence,
    // with the observed name bound to the interventional distribution.
    let precondition = parse_formula("pa(<z>;<x>) & pos(<x,z>)", &sig).map_err(|e| anyhow!("{e}"))?;
    if !w.satisfies(&precondition)? {
        bail!("adjustment precondition does not hold");
    }
    let n0 = "#n(drug[x:=c1]E; <y>)";
    let rct = format!("[x:=c1]E ({n0} == <y>)");
    let bda = format!(
        "#f(drug; cond(<y>;<z>;x=c1)) == cond(<y>;<z>;x=c1) \
         & #n(drug; <z>) == <z> \
         & {n0} == margin(#f(drug; cond(<y>;<z>;x=c1))(#n(drug; <z>)); <y>)"
    );
    let equivalence = parse_formula(&format!("({rct}) <-> ({bda})"), &sig).map_err(|e| anyhow!("{e}"))?;
    if !w.satisfies(&equivalence)? {
        bail!("experiment/adjustment equivalence does not hold");
    }
    // both sides are individually true under these bindings
    for side in [rct.as_str(), bda.as_str()] {
        let f = parse_formula(side, &sig).map_err(|e| anyhow!("{e}"))?;
        if !w.satisfies(&f)? {
            bail!("formula `{side}` does not hold");
        }
    }

    Ok(json!({
        "conditional_rates": rates
            .iter()
            .map(|(label, got, _)| {
                (label.to_string(), serde_json::Value::String(format_rational(got)))
            })
            .collect::<serde_json::Map<String, serde_json::Value>>(),
        "effects": effects,
        "paradox_inversion": true,
        "precondition": "pa(<z>;<x>) & pos(<x,z>)",
        "equivalence_holds": true,
    }))
}
