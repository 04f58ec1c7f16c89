//! Shared builders for the worked-example fixtures and seeded random
//! generators used across the integration and acceptance suites.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use simnet_core::graphs::{SimilarityGraph, SimilarityStructure};
use simnet_core::model::{
    config_space, BeliefNetwork, Cpt, ParentConfig, Variable, ABSENT, PRESENT,
};
use simnet_core::simnet::{LocalBeliefNetwork, SimilarityNetwork};

pub fn fixture_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

pub fn fixture_path(name: &str) -> PathBuf {
    fixture_dir().join(name)
}

pub fn read_fixture(name: &str) -> String {
    let path = fixture_path(name);
    std::fs::read_to_string(&path)
        .unwrap_or_else(|e| panic!("missing fixture {}: {e}", path.display()))
}

pub fn assert_close(a: f64, b: f64, tol: f64, what: &str) {
    assert!(
        (a - b).abs() <= tol,
        "{what}: {a} vs {b} (|diff| = {:e})",
        (a - b).abs()
    );
}

/// Probability of a partial assignment under an enumerated joint: the sum
/// of all consistent entries.
pub fn joint_marginal(
    table: &simnet_core::JointTable,
    assignment: &BTreeMap<String, String>,
) -> f64 {
    let slots: Vec<(usize, usize)> = assignment
        .iter()
        .filter_map(|(name, label)| {
            table
                .variables()
                .iter()
                .position(|v| &v.name == name)
                .map(|slot| (slot, table.variables()[slot].index_of(label).unwrap()))
        })
        .collect();
    table
        .iter()
        .filter(|(digits, _)| slots.iter().all(|&(s, p)| digits[s] == p))
        .map(|(_, p)| p)
        .sum()
}

fn pair_root(owner: &str, instances: [&str; 2], prior: [f64; 2]) -> (Variable, Cpt) {
    (
        Variable::new(owner, instances),
        Cpt::root(owner, prior.to_vec()),
    )
}

fn fault_rows(owner: &str, fault_var: &str, rows: &[(&str, Vec<f64>)]) -> Cpt {
    let mut cpt = Cpt::new(owner, [fault_var]);
    for (fault, p) in rows {
        cpt.insert_row(ParentConfig::new([(fault_var, *fault)]), p.clone());
    }
    cpt
}

// ---------------------------------------------------------------------------
// Sore-throat similarity network (five diseases, four edges, eight features)
// ---------------------------------------------------------------------------

pub const DISEASE: &str = "DISEASE";
pub const VIRAL: &str = "VIRAL PHARYNGITIS";
pub const STREP: &str = "STREP THROAT";
pub const MONO: &str = "MONONUCLEOSIS";
pub const TC: &str = "TONSILLAR CELLULITIS";
pub const PA: &str = "PERITONSILLAR ABSCESS";

pub fn sore_throat_similarity() -> SimilarityNetwork {
    let mut graph = SimilarityGraph::new();
    graph.add_edge(VIRAL, STREP);
    graph.add_edge(STREP, MONO);
    graph.add_edge(MONO, TC);
    graph.add_edge(TC, PA);
    let mut s = SimilarityNetwork::new(
        Variable::new(DISEASE, [VIRAL, STREP, MONO, TC, PA]),
        SimilarityStructure::Graph(graph),
    );

    // PERITONSILLAR ABSCESS vs TONSILLAR CELLULITIS: two features, no arcs
    // among the nondistinguished nodes.
    {
        let mut bn = BeliefNetwork::new();
        let (v, c) = pair_root(DISEASE, [TC, PA], [0.5, 0.5]);
        bn.add_variable(v);
        bn.set_cpt(c);
        bn.add_variable(Variable::new("QUALITY OF VOICE", ["normal", "muffled"]));
        bn.add_arc(DISEASE, "QUALITY OF VOICE");
        bn.set_cpt(fault_rows(
            "QUALITY OF VOICE",
            DISEASE,
            &[(TC, vec![0.875, 0.125]), (PA, vec![0.25, 0.75])],
        ));
        bn.add_variable(Variable::binary("TRISMUS"));
        bn.add_arc(DISEASE, "TRISMUS");
        bn.set_cpt(fault_rows(
            "TRISMUS",
            DISEASE,
            &[(TC, vec![0.75, 0.25]), (PA, vec![0.125, 0.875])],
        ));
        s.add_local(LocalBeliefNetwork::new([TC, PA], bn));
    }

    // STREP THROAT vs VIRAL PHARYNGITIS: dependent manifestations, and FEVER
    // carried without a disease arc (relevant only through TOXIC APPEARANCE).
    {
        let mut bn = BeliefNetwork::new();
        let (v, c) = pair_root(DISEASE, [VIRAL, STREP], [2.0 / 3.0, 1.0 / 3.0]);
        bn.add_variable(v);
        bn.set_cpt(c);

        bn.add_variable(Variable::new(
            "TONSILS INVOLVED",
            ["neither", "one", "both"],
        ));
        bn.add_arc(DISEASE, "TONSILS INVOLVED");
        bn.set_cpt(fault_rows(
            "TONSILS INVOLVED",
            DISEASE,
            &[
                (VIRAL, vec![0.5, 0.375, 0.125]),
                (STREP, vec![0.125, 0.375, 0.5]),
            ],
        ));

        bn.add_variable(Variable::binary("TONSILLAR PUS"));
        bn.add_arc(DISEASE, "TONSILLAR PUS");
        bn.add_arc("TONSILS INVOLVED", "TONSILLAR PUS");
        let mut cpt = Cpt::new("TONSILLAR PUS", [DISEASE, "TONSILS INVOLVED"]);
        for (fault, ti, p) in [
            (VIRAL, "neither", vec![0.9375, 0.0625]),
            (VIRAL, "one", vec![0.75, 0.25]),
            (VIRAL, "both", vec![0.625, 0.375]),
            (STREP, "neither", vec![0.875, 0.125]),
            (STREP, "one", vec![0.5, 0.5]),
            (STREP, "both", vec![0.25, 0.75]),
        ] {
            cpt.insert_row(
                ParentConfig::new([(DISEASE, fault), ("TONSILS INVOLVED", ti)]),
                p,
            );
        }
        bn.set_cpt(cpt);

        bn.add_variable(Variable::binary("ABDOMINAL PAIN"));
        bn.add_arc(DISEASE, "ABDOMINAL PAIN");
        bn.set_cpt(fault_rows(
            "ABDOMINAL PAIN",
            DISEASE,
            &[(VIRAL, vec![0.875, 0.125]), (STREP, vec![0.625, 0.375])],
        ));

        bn.add_variable(Variable::binary("FEVER"));
        bn.set_cpt(Cpt::root("FEVER", vec![0.375, 0.625]));

        bn.add_variable(Variable::binary("TOXIC APPEARANCE"));
        bn.add_arc(DISEASE, "TOXIC APPEARANCE");
        bn.add_arc("FEVER", "TOXIC APPEARANCE");
        bn.add_arc("ABDOMINAL PAIN", "TOXIC APPEARANCE");
        let mut cpt = Cpt::new("TOXIC APPEARANCE", ["ABDOMINAL PAIN", DISEASE, "FEVER"]);
        for (fault, ap, fe, p) in [
            (VIRAL, ABSENT, ABSENT, vec![0.96875, 0.03125]),
            (VIRAL, ABSENT, PRESENT, vec![0.875, 0.125]),
            (VIRAL, PRESENT, ABSENT, vec![0.8125, 0.1875]),
            (VIRAL, PRESENT, PRESENT, vec![0.625, 0.375]),
            (STREP, ABSENT, ABSENT, vec![0.9375, 0.0625]),
            (STREP, ABSENT, PRESENT, vec![0.75, 0.25]),
            (STREP, PRESENT, ABSENT, vec![0.6875, 0.3125]),
            (STREP, PRESENT, PRESENT, vec![0.5, 0.5]),
        ] {
            cpt.insert_row(
                ParentConfig::new([(DISEASE, fault), ("ABDOMINAL PAIN", ap), ("FEVER", fe)]),
                p,
            );
        }
        bn.set_cpt(cpt);
        s.add_local(LocalBeliefNetwork::new([VIRAL, STREP], bn));
    }

    // MONONUCLEOSIS vs STREP THROAT. FEVER discriminates here, so TOXIC
    // APPEARANCE (downstream of FEVER) must stay in the local — but the
    // disease influences it only through FEVER, and ABDOMINAL PAIN has the
    // same distribution for both diseases, so neither carries a disease arc.
    {
        let mut bn = BeliefNetwork::new();
        let (v, c) = pair_root(DISEASE, [STREP, MONO], [2.0 / 3.0, 1.0 / 3.0]);
        bn.add_variable(v);
        bn.set_cpt(c);
        bn.add_variable(Variable::binary("SPLENOMEGALY"));
        bn.add_arc(DISEASE, "SPLENOMEGALY");
        bn.set_cpt(fault_rows(
            "SPLENOMEGALY",
            DISEASE,
            &[(STREP, vec![0.9375, 0.0625]), (MONO, vec![0.375, 0.625])],
        ));
        // FEVER's rate for STREP matches its prior in the strep/viral local.
        bn.add_variable(Variable::binary("FEVER"));
        bn.add_arc(DISEASE, "FEVER");
        bn.set_cpt(fault_rows(
            "FEVER",
            DISEASE,
            &[(STREP, vec![0.375, 0.625]), (MONO, vec![0.125, 0.875])],
        ));
        bn.add_variable(Variable::binary("ABDOMINAL PAIN"));
        bn.set_cpt(Cpt::root("ABDOMINAL PAIN", vec![0.625, 0.375]));
        bn.add_variable(Variable::binary("TOXIC APPEARANCE"));
        bn.add_arc("FEVER", "TOXIC APPEARANCE");
        bn.add_arc("ABDOMINAL PAIN", "TOXIC APPEARANCE");
        let mut cpt = Cpt::new("TOXIC APPEARANCE", ["ABDOMINAL PAIN", "FEVER"]);
        for (ap, fe, p) in [
            (ABSENT, ABSENT, vec![0.9375, 0.0625]),
            (ABSENT, PRESENT, vec![0.75, 0.25]),
            (PRESENT, ABSENT, vec![0.6875, 0.3125]),
            (PRESENT, PRESENT, vec![0.5, 0.5]),
        ] {
            cpt.insert_row(
                ParentConfig::new([("ABDOMINAL PAIN", ap), ("FEVER", fe)]),
                p,
            );
        }
        bn.set_cpt(cpt);
        s.add_local(LocalBeliefNetwork::new([STREP, MONO], bn));
    }

    // TONSILLAR CELLULITIS vs MONONUCLEOSIS.
    {
        let mut bn = BeliefNetwork::new();
        let (v, c) = pair_root(DISEASE, [MONO, TC], [2.0 / 3.0, 1.0 / 3.0]);
        bn.add_variable(v);
        bn.set_cpt(c);
        bn.add_variable(Variable::binary("SPLENOMEGALY"));
        bn.add_arc(DISEASE, "SPLENOMEGALY");
        bn.set_cpt(fault_rows(
            "SPLENOMEGALY",
            DISEASE,
            &[(MONO, vec![0.375, 0.625]), (TC, vec![0.8125, 0.1875])],
        ));
        s.add_local(LocalBeliefNetwork::new([MONO, TC], bn));
    }
    s
}

/// The node set of the sore-throat global network.
pub fn sore_throat_global_nodes() -> BTreeSet<String> {
    [
        DISEASE,
        "ABDOMINAL PAIN",
        "FEVER",
        "QUALITY OF VOICE",
        "SPLENOMEGALY",
        "TONSILLAR PUS",
        "TONSILS INVOLVED",
        "TOXIC APPEARANCE",
        "TRISMUS",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect()
}

/// The arc set of the sore-throat global network.
pub fn sore_throat_global_arcs() -> BTreeSet<(String, String)> {
    let mut arcs: BTreeSet<(String, String)> = [
        "ABDOMINAL PAIN",
        "FEVER",
        "QUALITY OF VOICE",
        "SPLENOMEGALY",
        "TONSILLAR PUS",
        "TONSILS INVOLVED",
        "TOXIC APPEARANCE",
        "TRISMUS",
    ]
    .iter()
    .map(|child| (DISEASE.to_string(), child.to_string()))
    .collect();
    arcs.insert(("TONSILS INVOLVED".into(), "TONSILLAR PUS".into()));
    arcs.insert(("FEVER".into(), "TOXIC APPEARANCE".into()));
    arcs.insert(("ABDOMINAL PAIN".into(), "TOXIC APPEARANCE".into()));
    arcs
}

// ---------------------------------------------------------------------------
// APPI / RUPTURED ECTOPIC worked example
// ---------------------------------------------------------------------------

pub const FAULT: &str = "DISEASE";
pub const NORMAL: &str = "NORMAL";
pub const APPI: &str = "APPI";
pub const ECTOPIC: &str = "RUPTURED ECTOPIC";
pub const ANOREXIA: &str = "ANOREXIA";
pub const PERITONITIS: &str = "PERITONITIS";
pub const BLEEDING: &str = "VAGINAL BLEEDING";

fn appi_normal_local() -> BeliefNetwork {
    let mut bn = BeliefNetwork::new();
    let (v, c) = pair_root(FAULT, [NORMAL, APPI], [0.75, 0.25]);
    bn.add_variable(v);
    bn.set_cpt(c);
    bn.add_variable(Variable::binary(ANOREXIA));
    bn.add_arc(FAULT, ANOREXIA);
    bn.set_cpt(fault_rows(
        ANOREXIA,
        FAULT,
        &[(NORMAL, vec![0.875, 0.125]), (APPI, vec![0.25, 0.75])],
    ));
    bn.add_variable(Variable::binary(PERITONITIS));
    bn.add_arc(FAULT, PERITONITIS);
    bn.set_cpt(fault_rows(
        PERITONITIS,
        FAULT,
        &[(NORMAL, vec![0.9375, 0.0625]), (APPI, vec![0.1875, 0.8125])],
    ));
    bn
}

fn ectopic_normal_local() -> BeliefNetwork {
    let mut bn = BeliefNetwork::new();
    let (v, c) = pair_root(FAULT, [NORMAL, ECTOPIC], [0.875, 0.125]);
    bn.add_variable(v);
    bn.set_cpt(c);
    bn.add_variable(Variable::binary(PERITONITIS));
    bn.add_arc(FAULT, PERITONITIS);
    bn.set_cpt(fault_rows(
        PERITONITIS,
        FAULT,
        &[(NORMAL, vec![0.9375, 0.0625]), (ECTOPIC, vec![0.5, 0.5])],
    ));
    bn.add_variable(Variable::binary(BLEEDING));
    bn.add_arc(FAULT, BLEEDING);
    bn.set_cpt(fault_rows(
        BLEEDING,
        FAULT,
        &[
            (NORMAL, vec![0.96875, 0.03125]),
            (ECTOPIC, vec![0.5625, 0.4375]),
        ],
    ));
    bn
}

/// The star-topology similarity network: NORMAL at the center, ANOREXIA
/// omitted from the ectopic local and VAGINAL BLEEDING omitted from the
/// appendicitis local.
pub fn abdominal_star_similarity() -> SimilarityNetwork {
    let mut graph = SimilarityGraph::new();
    graph.add_edge(APPI, NORMAL);
    graph.add_edge(NORMAL, ECTOPIC);
    let mut s = SimilarityNetwork::new(
        Variable::new(FAULT, [NORMAL, APPI, ECTOPIC]),
        SimilarityStructure::Graph(graph),
    );
    s.add_local(LocalBeliefNetwork::new([APPI, NORMAL], appi_normal_local()));
    s.add_local(LocalBeliefNetwork::new(
        [NORMAL, ECTOPIC],
        ectopic_normal_local(),
    ));
    s
}

/// The chain-topology similarity network over the same distributions: APPI
/// and NORMAL are not connected, so the multi-fault construction needs the
/// star restructuring first.
pub fn abdominal_chain_similarity() -> SimilarityNetwork {
    let mut graph = SimilarityGraph::new();
    graph.add_edge(APPI, ECTOPIC);
    graph.add_edge(ECTOPIC, NORMAL);
    let mut s = SimilarityNetwork::new(
        Variable::new(FAULT, [NORMAL, APPI, ECTOPIC]),
        SimilarityStructure::Graph(graph),
    );

    let mut pair = BeliefNetwork::new();
    let (v, c) = pair_root(FAULT, [APPI, ECTOPIC], [0.7, 0.3]);
    pair.add_variable(v);
    pair.set_cpt(c);
    pair.add_variable(Variable::binary(ANOREXIA));
    pair.add_arc(FAULT, ANOREXIA);
    pair.set_cpt(fault_rows(
        ANOREXIA,
        FAULT,
        &[(APPI, vec![0.25, 0.75]), (ECTOPIC, vec![0.875, 0.125])],
    ));
    pair.add_variable(Variable::binary(PERITONITIS));
    pair.add_arc(FAULT, PERITONITIS);
    pair.set_cpt(fault_rows(
        PERITONITIS,
        FAULT,
        &[(APPI, vec![0.1875, 0.8125]), (ECTOPIC, vec![0.5, 0.5])],
    ));
    pair.add_variable(Variable::binary(BLEEDING));
    pair.add_arc(FAULT, BLEEDING);
    pair.set_cpt(fault_rows(
        BLEEDING,
        FAULT,
        &[
            (APPI, vec![0.96875, 0.03125]),
            (ECTOPIC, vec![0.5625, 0.4375]),
        ],
    ));
    s.add_local(LocalBeliefNetwork::new([APPI, ECTOPIC], pair));

    let mut base = BeliefNetwork::new();
    let (v, c) = pair_root(FAULT, [NORMAL, ECTOPIC], [0.875, 0.125]);
    base.add_variable(v);
    base.set_cpt(c);
    base.add_variable(Variable::binary(PERITONITIS));
    base.add_arc(FAULT, PERITONITIS);
    base.set_cpt(fault_rows(
        PERITONITIS,
        FAULT,
        &[(NORMAL, vec![0.9375, 0.0625]), (ECTOPIC, vec![0.5, 0.5])],
    ));
    base.add_variable(Variable::binary(BLEEDING));
    base.add_arc(FAULT, BLEEDING);
    base.set_cpt(fault_rows(
        BLEEDING,
        FAULT,
        &[
            (NORMAL, vec![0.96875, 0.03125]),
            (ECTOPIC, vec![0.5625, 0.4375]),
        ],
    ));
    s.add_local(LocalBeliefNetwork::new([NORMAL, ECTOPIC], base));
    s
}

pub fn abdominal_priors() -> BTreeMap<String, f64> {
    BTreeMap::from([(APPI.to_string(), 0.0625), (ECTOPIC.to_string(), 0.03125)])
}

/// The fault-to-manifestation arcs of the multi-fault example.
pub fn expected_abdominal_fault_arcs() -> BTreeSet<(String, String)> {
    BTreeSet::from([
        (APPI.to_string(), ANOREXIA.to_string()),
        (APPI.to_string(), PERITONITIS.to_string()),
        (ECTOPIC.to_string(), PERITONITIS.to_string()),
        (ECTOPIC.to_string(), BLEEDING.to_string()),
    ])
}

// ---------------------------------------------------------------------------
// Small fixtures
// ---------------------------------------------------------------------------

pub fn one_fault_similarity() -> SimilarityNetwork {
    let mut graph = SimilarityGraph::new();
    graph.add_edge(NORMAL, "WIDGET FAULT");
    let mut s = SimilarityNetwork::new(
        Variable::new("FAULT", [NORMAL, "WIDGET FAULT"]),
        SimilarityStructure::Graph(graph),
    );
    let mut bn = BeliefNetwork::new();
    let (v, c) = pair_root("FAULT", [NORMAL, "WIDGET FAULT"], [0.75, 0.25]);
    bn.add_variable(v);
    bn.set_cpt(c);
    bn.add_variable(Variable::binary("ALARM"));
    bn.add_arc("FAULT", "ALARM");
    bn.set_cpt(fault_rows(
        "ALARM",
        "FAULT",
        &[
            (NORMAL, vec![0.875, 0.125]),
            ("WIDGET FAULT", vec![0.25, 0.75]),
        ],
    ));
    s.add_local(LocalBeliefNetwork::new([NORMAL, "WIDGET FAULT"], bn));
    s
}

/// Faults f1–f2–f3 in a chain; `x` assessed only on the (f2,f3) edge.
pub fn chain3_similarity() -> SimilarityNetwork {
    let mut graph = SimilarityGraph::new();
    graph.add_edge("f1", "f2");
    graph.add_edge("f2", "f3");
    let mut s = SimilarityNetwork::new(
        Variable::new("fault", ["f1", "f2", "f3"]),
        SimilarityStructure::Graph(graph),
    );

    let mut left = BeliefNetwork::new();
    let (v, c) = pair_root("fault", ["f1", "f2"], [0.5, 0.5]);
    left.add_variable(v);
    left.set_cpt(c);
    left.add_variable(Variable::binary("y"));
    left.add_arc("fault", "y");
    left.set_cpt(fault_rows(
        "y",
        "fault",
        &[("f1", vec![0.75, 0.25]), ("f2", vec![0.25, 0.75])],
    ));
    s.add_local(LocalBeliefNetwork::new(["f1", "f2"], left));

    let mut right = BeliefNetwork::new();
    let (v, c) = pair_root("fault", ["f2", "f3"], [0.75, 0.25]);
    right.add_variable(v);
    right.set_cpt(c);
    right.add_variable(Variable::binary("x"));
    right.add_arc("fault", "x");
    right.set_cpt(fault_rows(
        "x",
        "fault",
        &[("f2", vec![0.875, 0.125]), ("f3", vec![0.375, 0.625])],
    ));
    right.add_variable(Variable::binary("y"));
    right.add_arc("fault", "y");
    right.set_cpt(fault_rows(
        "y",
        "fault",
        &[("f2", vec![0.25, 0.75]), ("f3", vec![0.5, 0.5])],
    ));
    s.add_local(LocalBeliefNetwork::new(["f2", "f3"], right));
    s
}

/// Four faults with a size-3 hyperedge and a pair hyperedge.
pub fn hyper_similarity() -> SimilarityNetwork {
    let mut graph = simnet_core::graphs::SimilarityHypergraph::new();
    graph.add_hyperedge(["f1", "f2", "f3"]);
    graph.add_hyperedge(["f3", "f4"]);
    let mut s = SimilarityNetwork::new(
        Variable::new("fault", ["f1", "f2", "f3", "f4"]),
        SimilarityStructure::Hypergraph(graph),
    );

    let mut triple = BeliefNetwork::new();
    triple.add_variable(Variable::new("fault", ["f1", "f2", "f3"]));
    triple.set_cpt(Cpt::root("fault", vec![0.5, 0.25, 0.25]));
    triple.add_variable(Variable::binary("x"));
    triple.add_arc("fault", "x");
    triple.set_cpt(fault_rows(
        "x",
        "fault",
        &[
            ("f1", vec![0.875, 0.125]),
            ("f2", vec![0.5, 0.5]),
            ("f3", vec![0.25, 0.75]),
        ],
    ));
    s.add_local(LocalBeliefNetwork::new(["f1", "f2", "f3"], triple));

    let mut pair = BeliefNetwork::new();
    let (v, c) = pair_root("fault", ["f3", "f4"], [0.5, 0.5]);
    pair.add_variable(v);
    pair.set_cpt(c);
    pair.add_variable(Variable::binary("y"));
    pair.add_arc("fault", "y");
    pair.set_cpt(fault_rows(
        "y",
        "fault",
        &[("f3", vec![0.625, 0.375]), ("f4", vec![0.125, 0.875])],
    ));
    s.add_local(LocalBeliefNetwork::new(["f3", "f4"], pair));
    s
}

/// Two locals whose feature arcs point in opposite directions, so the graph
/// union is cyclic.
pub fn cyclic_pair_similarity() -> SimilarityNetwork {
    let mut graph = SimilarityGraph::new();
    graph.add_edge("f1", "f2");
    graph.add_edge("f2", "f3");
    let mut s = SimilarityNetwork::new(
        Variable::new("fault", ["f1", "f2", "f3"]),
        SimilarityStructure::Graph(graph),
    );
    let make_local = |faults: [&str; 2], arc: (&str, &str)| {
        let mut bn = BeliefNetwork::new();
        bn.add_variable(Variable::new("fault", faults));
        bn.set_cpt(Cpt::root("fault", vec![0.5, 0.5]));
        bn.add_variable(Variable::binary("u"));
        bn.add_variable(Variable::binary("v"));
        bn.add_arc("fault", arc.0);
        bn.add_arc(arc.0, arc.1);
        let mut root_cpt = Cpt::new(arc.0, ["fault"]);
        for fa in faults {
            root_cpt.insert_row(ParentConfig::new([("fault", fa)]), vec![0.5, 0.5]);
        }
        bn.set_cpt(root_cpt);
        let mut child_cpt = Cpt::new(arc.1, [arc.0]);
        child_cpt.insert_row(ParentConfig::new([(arc.0, ABSENT)]), vec![0.25, 0.75]);
        child_cpt.insert_row(ParentConfig::new([(arc.0, PRESENT)]), vec![0.75, 0.25]);
        bn.set_cpt(child_cpt);
        bn
    };
    s.add_local(LocalBeliefNetwork::new(
        ["f1", "f2"],
        make_local(["f1", "f2"], ("u", "v")),
    ));
    s.add_local(LocalBeliefNetwork::new(
        ["f2", "f3"],
        make_local(["f2", "f3"], ("v", "u")),
    ));
    s
}

/// Similarity network whose graph has an isolated fault.
pub fn disconnected_similarity() -> SimilarityNetwork {
    let mut s = chain3_similarity();
    let mut graph = SimilarityGraph::new();
    graph.add_edge("f1", "f2");
    graph.add_node("f3");
    s.graph = SimilarityStructure::Graph(graph);
    s.locals
        .remove(&BTreeSet::from(["f2".to_string(), "f3".to_string()]));
    s
}

pub fn minimal_bn() -> BeliefNetwork {
    let mut bn = BeliefNetwork::new();
    bn.add_variable(Variable::new("a", ["x", "y"]));
    bn.set_cpt(Cpt::root("a", vec![0.3, 0.7]));
    bn
}

pub fn collider_bn() -> BeliefNetwork {
    let mut bn = BeliefNetwork::new();
    for name in ["a", "b"] {
        bn.add_variable(Variable::binary(name));
        bn.set_cpt(Cpt::root(name, vec![0.75, 0.25]));
    }
    bn.add_variable(Variable::binary("c"));
    bn.add_arc("a", "c");
    bn.add_arc("b", "c");
    let mut cpt = Cpt::new("c", ["a", "b"]);
    for (a, b, p) in [
        (ABSENT, ABSENT, vec![0.9375, 0.0625]),
        (ABSENT, PRESENT, vec![0.5, 0.5]),
        (PRESENT, ABSENT, vec![0.375, 0.625]),
        (PRESENT, PRESENT, vec![0.125, 0.875]),
    ] {
        cpt.insert_row(ParentConfig::new([("a", a), ("b", b)]), p);
    }
    bn.set_cpt(cpt);
    bn
}

pub fn chain_bn() -> BeliefNetwork {
    let mut bn = BeliefNetwork::new();
    bn.add_variable(Variable::binary("a"));
    bn.set_cpt(Cpt::root("a", vec![0.75, 0.25]));
    for (parent, child) in [("a", "b"), ("b", "c")] {
        bn.add_variable(Variable::binary(child));
        bn.add_arc(parent, child);
        let mut cpt = Cpt::new(child, [parent]);
        cpt.insert_row(ParentConfig::new([(parent, ABSENT)]), vec![0.875, 0.125]);
        cpt.insert_row(ParentConfig::new([(parent, PRESENT)]), vec![0.25, 0.75]);
        bn.set_cpt(cpt);
    }
    bn
}

pub fn diamond_bn() -> BeliefNetwork {
    let mut bn = BeliefNetwork::new();
    bn.add_variable(Variable::binary("a"));
    bn.set_cpt(Cpt::root("a", vec![0.5, 0.5]));
    for mid in ["b", "c"] {
        bn.add_variable(Variable::binary(mid));
        bn.add_arc("a", mid);
        let mut cpt = Cpt::new(mid, ["a"]);
        cpt.insert_row(ParentConfig::new([("a", ABSENT)]), vec![0.8125, 0.1875]);
        cpt.insert_row(ParentConfig::new([("a", PRESENT)]), vec![0.375, 0.625]);
        bn.set_cpt(cpt);
    }
    bn.add_variable(Variable::binary("d"));
    bn.add_arc("b", "d");
    bn.add_arc("c", "d");
    let mut cpt = Cpt::new("d", ["b", "c"]);
    for (b, c, p) in [
        (ABSENT, ABSENT, vec![0.96875, 0.03125]),
        (ABSENT, PRESENT, vec![0.625, 0.375]),
        (PRESENT, ABSENT, vec![0.5625, 0.4375]),
        (PRESENT, PRESENT, vec![0.0625, 0.9375]),
    ] {
        cpt.insert_row(ParentConfig::new([("b", b), ("c", c)]), p);
    }
    bn.set_cpt(cpt);
    bn
}

pub fn cyclic_bn() -> BeliefNetwork {
    let mut bn = BeliefNetwork::new();
    bn.add_variable(Variable::binary("a"));
    bn.add_variable(Variable::binary("b"));
    bn.add_arc("a", "b");
    bn.add_arc("b", "a");
    for (name, parent) in [("a", "b"), ("b", "a")] {
        let mut cpt = Cpt::new(name, [parent]);
        cpt.insert_row(ParentConfig::new([(parent, ABSENT)]), vec![0.5, 0.5]);
        cpt.insert_row(ParentConfig::new([(parent, PRESENT)]), vec![0.25, 0.75]);
        bn.set_cpt(cpt);
    }
    bn
}

pub fn denormalized_bn() -> BeliefNetwork {
    let mut bn = minimal_bn();
    bn.set_cpt(Cpt::root("a", vec![0.5, 0.6]));
    bn
}

pub fn zero_probability_bn() -> BeliefNetwork {
    let mut bn = minimal_bn();
    bn.set_cpt(Cpt::root("a", vec![0.0, 1.0]));
    bn
}

/// The strep/viral local network as a standalone document (used by the
/// d-separation example tests).
pub fn strep_viral_local_bn() -> BeliefNetwork {
    sore_throat_similarity()
        .local_for(&BTreeSet::from([STREP.to_string(), VIRAL.to_string()]))
        .unwrap()
        .network
        .clone()
}

// ---------------------------------------------------------------------------
// Random generators
// ---------------------------------------------------------------------------

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random strictly-positive probability in [lo, hi], quantized so fixture
/// arithmetic stays well away from tolerance boundaries.
fn random_prob(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    rng.random_range(lo..=hi)
}

/// A random DAG over `n` binary variables with strictly positive tables.
pub fn random_binary_network(rng: &mut ChaCha8Rng, n: usize, arc_prob: f64) -> BeliefNetwork {
    let names: Vec<String> = (0..n).map(|i| format!("v{i}")).collect();
    let mut bn = BeliefNetwork::new();
    for name in &names {
        bn.add_variable(Variable::binary(name.clone()));
    }
    for j in 1..n {
        for i in 0..j {
            if rng.random_bool(arc_prob) {
                bn.add_arc(names[i].clone(), names[j].clone());
            }
        }
    }
    for name in &names {
        let parents = bn.parents_of(name);
        let parent_vars: Vec<&Variable> = parents.iter().map(|p| bn.variable(p).unwrap()).collect();
        let mut cpt = Cpt::new(name.clone(), parents.clone());
        for cfg in config_space(&parent_vars) {
            let p = random_prob(rng, 0.05, 0.95);
            cpt.insert_row(cfg, vec![1.0 - p, p]);
        }
        bn.set_cpt(cpt);
    }
    bn
}

/// A random noisy-OR gate over `n` faults.
pub fn random_noisy_or(rng: &mut ChaCha8Rng, n: usize) -> simnet_core::NoisyOrSpec {
    let faults: Vec<String> = (0..n).map(|i| format!("d{i}")).collect();
    let leak = random_prob(rng, 0.0, 0.5);
    let singles: Vec<f64> = (0..n).map(|_| random_prob(rng, leak, 1.0)).collect();
    simnet_core::NoisyOrSpec::from_singles("m", faults, leak, singles).unwrap()
}

/// A randomly generated similarity network together with the designed
/// single-fault global network its locals were cut from.
pub struct GeneratedCase {
    pub designed: BeliefNetwork,
    pub similarity: SimilarityNetwork,
    pub fault_var: String,
    pub faults: Vec<String>,
}

/// Generate a designed global network (NORMAL + `n_faults` faults,
/// `n_features` binary features, sparse feature-to-feature arcs, and
/// designed fault-to-NORMAL equalities), then carve a similarity network
/// out of it over a random connected similarity graph.
///
/// Locals are exact restrictions of the designed network: a feature's fault
/// arc is dropped in a local when its rows agree exactly across the edge,
/// and features left disconnected from the distinguished node are omitted —
/// which is precisely what licenses the equality propagation on rebuild.
pub fn random_similarity_case(
    rng: &mut ChaCha8Rng,
    n_faults: usize,
    n_features: usize,
) -> GeneratedCase {
    let fault_var = "FAULT".to_string();
    let mut instances = vec![NORMAL.to_string()];
    for i in 1..=n_faults {
        instances.push(format!("F{i}"));
    }
    let features: Vec<String> = (0..n_features).map(|i| format!("X{i}")).collect();

    // Designed global network.
    let mut designed = BeliefNetwork::new();
    designed.add_variable(Variable::new(fault_var.clone(), instances.clone()));
    let weights: Vec<f64> = (0..instances.len())
        .map(|_| random_prob(rng, 0.1, 1.0))
        .collect();
    let total: f64 = weights.iter().sum();
    designed.set_cpt(Cpt::root(
        fault_var.clone(),
        weights.iter().map(|w| w / total).collect(),
    ));

    // Sparse feature-to-feature arcs, lexicographically forward.
    let mut feature_parents: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for j in 1..n_features {
        if rng.random_bool(0.3) {
            let i = rng.random_range(0..j);
            feature_parents
                .entry(features[j].clone())
                .or_default()
                .push(features[i].clone());
        }
    }

    for x in &features {
        designed.add_variable(Variable::binary(x.clone()));
        designed.add_arc(fault_var.clone(), x.clone());
        for w in feature_parents.get(x).into_iter().flatten() {
            designed.add_arc(w.clone(), x.clone());
        }
    }
    for x in &features {
        let parents = designed.parents_of(x);
        let parent_vars: Vec<&Variable> = parents
            .iter()
            .map(|p| designed.variable(p).unwrap())
            .collect();
        let context: Vec<&Variable> = parent_vars
            .iter()
            .copied()
            .filter(|v| v.name != fault_var)
            .collect();
        let mut cpt = Cpt::new(x.clone(), parents.clone());
        // Base rows per (fault, context), with every fault's probability at
        // least NORMAL's within the same context so a noisy-OR
        // parameterization always exists; then copy NORMAL's rows onto a
        // random subset of faults to design subset independencies.
        let mut rows: BTreeMap<(String, ParentConfig), f64> = BTreeMap::new();
        for ctx in config_space(&context) {
            let base = random_prob(rng, 0.05, 0.45);
            rows.insert((NORMAL.to_string(), ctx.clone()), base);
            for fault in &instances[1..] {
                rows.insert((fault.clone(), ctx.clone()), random_prob(rng, base, 0.95));
            }
        }
        for fault in &instances[1..] {
            if rng.random_bool(0.4) {
                for ctx in config_space(&context) {
                    let normal_row = rows[&(NORMAL.to_string(), ctx.clone())];
                    rows.insert((fault.clone(), ctx), normal_row);
                }
            }
        }
        for ((fault, ctx), p) in rows {
            cpt.insert_row(ctx.with(fault_var.clone(), fault), vec![1.0 - p, p]);
        }
        bn_set(&mut designed, cpt);
    }

    // Random connected similarity graph over every instance.
    let mut graph = SimilarityGraph::new();
    let mut order: Vec<String> = instances.clone();
    order.shuffle(rng);
    for k in 1..order.len() {
        let j = rng.random_range(0..k);
        graph.add_edge(order[j].clone(), order[k].clone());
    }
    for i in 0..instances.len() {
        for j in i + 1..instances.len() {
            if rng.random_bool(0.25) {
                graph.add_edge(instances[i].clone(), instances[j].clone());
            }
        }
    }

    let mut s = SimilarityNetwork::new(
        Variable::new(fault_var.clone(), instances.clone()),
        SimilarityStructure::Graph(graph.clone()),
    );
    for (a, b) in &graph.edges {
        let local = designed_local(&designed, &fault_var, &[a.clone(), b.clone()]);
        s.add_local(LocalBeliefNetwork::new([a.clone(), b.clone()], local));
    }

    GeneratedCase {
        designed,
        similarity: s,
        fault_var,
        faults: instances[1..].to_vec(),
    }
}

fn bn_set(bn: &mut BeliefNetwork, cpt: Cpt) {
    bn.set_cpt(cpt);
}

/// Restrict the designed network to one edge's faults, applying the
/// node-omission rule: drop fault arcs whose restricted rows are exactly
/// equal, then drop features no longer connected to the distinguished node.
fn designed_local(designed: &BeliefNetwork, fault_var: &str, edge: &[String]) -> BeliefNetwork {
    let dvar = designed.variable(fault_var).unwrap();
    let pair_instances: Vec<String> = dvar
        .instances
        .iter()
        .filter(|i| edge.contains(i))
        .cloned()
        .collect();
    let prior_row = designed
        .cpt(fault_var)
        .unwrap()
        .row(&ParentConfig::empty())
        .unwrap();
    let pair_weights: Vec<f64> = pair_instances
        .iter()
        .map(|i| prior_row[dvar.index_of(i).unwrap()])
        .collect();
    let pair_total: f64 = pair_weights.iter().sum();

    // Which fault arcs stay: rows must differ somewhere across the edge.
    let mut kept_fault_arc: BTreeSet<String> = BTreeSet::new();
    for x in designed.children_of(fault_var) {
        let cpt = designed.cpt(&x).unwrap();
        let context: Vec<&Variable> = cpt
            .parents
            .iter()
            .filter(|p| p.as_str() != fault_var)
            .map(|p| designed.variable(p).unwrap())
            .collect();
        let differs = config_space(&context).iter().any(|ctx| {
            let rows: Vec<&[f64]> = pair_instances
                .iter()
                .map(|i| cpt.row(&ctx.clone().with(fault_var, i.clone())).unwrap())
                .collect();
            rows.windows(2).any(|w| w[0] != w[1])
        });
        if differs {
            kept_fault_arc.insert(x);
        }
    }

    let mut pruned = simnet_core::DiGraph::from(designed);
    pruned
        .arcs
        .retain(|(p, c)| p != fault_var || kept_fault_arc.contains(c));
    let kept: BTreeSet<String> = designed
        .variables
        .keys()
        .filter(|n| simnet_core::graphs::connected_to(n, fault_var, &pruned))
        .cloned()
        .collect();

    let mut local = BeliefNetwork::new();
    local.add_variable(Variable::new(fault_var, pair_instances.clone()));
    local.set_cpt(Cpt::root(
        fault_var,
        pair_weights.iter().map(|w| w / pair_total).collect(),
    ));
    for name in &kept {
        if name == fault_var {
            continue;
        }
        local.add_variable(designed.variable(name).unwrap().clone());
    }
    for (p, c) in &pruned.arcs {
        if p != fault_var && kept.contains(p) && kept.contains(c) {
            local.add_arc(p.clone(), c.clone());
        }
    }
    for x in &kept {
        if x == fault_var {
            continue;
        }
        let cpt = designed.cpt(x).unwrap();
        let context: Vec<&Variable> = cpt
            .parents
            .iter()
            .filter(|p| p.as_str() != fault_var)
            .map(|p| designed.variable(p).unwrap())
            .collect();
        if kept_fault_arc.contains(x) {
            local.add_arc(fault_var.to_string(), x.clone());
            let mut sliced = Cpt::new(x.clone(), cpt.parents.clone());
            for ctx in config_space(&context) {
                for fault in &pair_instances {
                    let cfg = ctx.clone().with(fault_var, fault.clone());
                    sliced.insert_row(cfg.clone(), cpt.row(&cfg).unwrap().to_vec());
                }
            }
            local.set_cpt(sliced);
        } else {
            // Rows are exactly equal across the edge; either fault's row is
            // the restricted conditional.
            let mut reduced = Cpt::new(x.clone(), context.iter().map(|v| v.name.clone()));
            for ctx in config_space(&context) {
                let cfg = ctx.clone().with(fault_var, pair_instances[0].clone());
                reduced.insert_row(ctx, cpt.row(&cfg).unwrap().to_vec());
            }
            local.set_cpt(reduced);
        }
    }
    local
}
