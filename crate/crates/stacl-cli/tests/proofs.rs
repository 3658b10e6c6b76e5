//! The bundled derivations: built programmatically, checked by the kernel,
//! their hypotheses and conclusions verified semantically on their bundled
//! worlds, and kept in sync with the serialized fixture files.

use std::path::{Path, PathBuf};

use stacl_cli::model::ModelFile;
use stacl_cli::prooffile::{load_proof, proof_json, proof_to_file};
use stacl_cli::proofs;
use stacl_core::proof::{check_derivation, DerivationNode};
use stacl_core::world::World;

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

fn count_nodes(n: &DerivationNode) -> usize {
    1 + n.premises.iter().map(count_nodes).sum::<usize>()
}

fn check_bundle(root: &DerivationNode, model_file: &str) {
    let file = ModelFile::load(&fixtures().join(model_file)).unwrap();
    let model = file.to_model().unwrap();
    check_derivation(root, Some(&model.base))
        .unwrap_or_else(|r| panic!("{model_file}: {r}"));
    // hypotheses and conclusion hold on the bundled world
    let w = World::base(model).unwrap();
    for h in &root.judgment.context {
        assert!(
            w.satisfies(h).unwrap(),
            "{model_file}: hypothesis `{h}` fails"
        );
    }
    assert!(
        w.satisfies(&root.judgment.conclusion).unwrap(),
        "{model_file}: conclusion fails semantically"
    );
}

#[test]
fn backdoor_derivation_checks_and_holds() {
    let root = proofs::build_backdoor();
    check_bundle(&root, "drug.json");
    assert!(count_nodes(&root) > 30);
}

#[test]
fn do2_derivation_checks_and_holds() {
    let root = proofs::build_do2();
    check_bundle(&root, "docalc2.json");
}

#[test]
fn do3_derivation_checks_and_holds() {
    let root = proofs::build_do3();
    check_bundle(&root, "docalc3.json");
}

#[test]
fn do2_antecedent_is_non_vacuous() {
    let file = ModelFile::load(&fixtures().join("docalc2.json")).unwrap();
    let w = World::base(file.to_model().unwrap()).unwrap();
    let root = proofs::build_do2();
    let (ant, _) = stacl_core::proof::split_imp(&root.judgment.conclusion).unwrap();
    assert!(w.satisfies(ant).unwrap(), "do2 guard should hold on g4a");
}

#[test]
fn do3_antecedent_is_non_vacuous() {
    let file = ModelFile::load(&fixtures().join("docalc3.json")).unwrap();
    let w = World::base(file.to_model().unwrap()).unwrap();
    let root = proofs::build_do3();
    let (ant, _) = stacl_core::proof::split_imp(&root.judgment.conclusion).unwrap();
    assert!(w.satisfies(ant).unwrap(), "do3 guard should hold on g4b");
}

fn rendered(builder: fn() -> DerivationNode, model_file: &str) -> String {
    proof_json(&proof_to_file(model_file, &builder()))
}

/// Regenerates the three fixture files. Run explicitly after changing the
/// builders: `cargo test -p stacl-cli write_proof_fixtures -- --ignored`
#[test]
#[ignore]
fn write_proof_fixtures() {
    for (builder, model_file, out) in bundles() {
        std::fs::write(fixtures().join(out), rendered(builder, model_file)).unwrap();
    }
}

fn bundles() -> [(fn() -> DerivationNode, &'static str, &'static str); 3] {
    [
        (proofs::build_backdoor, "drug.json", "backdoor.proof.json"),
        (proofs::build_do2, "docalc2.json", "do2.proof.json"),
        (proofs::build_do3, "docalc3.json", "do3.proof.json"),
    ]
}

#[test]
fn proof_fixtures_are_in_sync_and_reload() {
    for (builder, model_file, out) in bundles() {
        let path = fixtures().join(out);
        let on_disk = std::fs::read_to_string(&path)
            .unwrap_or_else(|_| panic!("{out} missing; run write_proof_fixtures"));
        assert_eq!(
            on_disk,
            rendered(builder, model_file),
            "{out} is stale; run write_proof_fixtures"
        );
        // the serialized form reloads and checks
        let loaded = load_proof(&path).unwrap();
        check_derivation(&loaded.root, Some(&loaded.model.base))
            .unwrap_or_else(|r| panic!("{out}: {r}"));
        assert_eq!(loaded.root, builder(), "{out} loses information in transit");
    }
}
