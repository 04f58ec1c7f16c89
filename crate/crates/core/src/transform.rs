//! Star-topology restructuring and the general similarity-network →
//! multiple-fault belief-network transformation, including the entry point
//! that starts from a plain single-fault belief network.
//!
//! The pipeline: build the global network, restructure it into a similarity
//! network whose graph is a star centered on the no-fault instance, then
//! read leak and single-fault assessments off the star's distributions and
//! synthesize each manifestation's table with the noisy-OR gate. Every
//! ordering decision is lexicographic, so identical inputs produce
//! bit-identical outputs.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::causal::{self, CausalError, NoisyOrSpec};
use crate::graphs::{self, DiGraph, SimilarityGraph, SimilarityStructure};
use crate::model::{
    config_space, validate_network, BeliefNetwork, Cpt, ParentConfig, ValidationReport, Variable,
};
use crate::oracle::{self, OracleError};
use crate::simnet::{self, LocalBeliefNetwork, SimilarityNetwork, SimnetError};

/// Default tolerance for "these restricted distributions are equal, omit
/// the node" decisions.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;
/// Default label of the fault instance meaning "no fault present".
pub const DEFAULT_NORMAL: &str = "NORMAL";

#[derive(Debug, Error, PartialEq)]
pub enum TransformError {
    #[error("fault variable `{0}` has parents; the transformation requires a root")]
    FaultHasParents(String),
    #[error("variable `{variable}` has no instance `{instance}`")]
    UnknownInstance { variable: String, instance: String },
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("the distinguished variable has no `{0}` instance to supply leak probabilities")]
    NoNormalInstance(String),
    #[error("no prior supplied for fault `{0}`")]
    MissingPrior(String),
    #[error("manifestation `{0}` is not binary (absent/present); the noisy-OR gate requires binary manifestations")]
    NonBinaryManifestation(String),
    #[error("fault `{0}` collides with a manifestation name")]
    NameCollision(String),
    #[error("input network failed validation with {} error(s)", .0.errors().count())]
    InvalidInput(Box<ValidationReport>),
    #[error("supplied fault dependencies break the output network ({} error(s))", .0.errors().count())]
    InvalidFaultDeps(Box<ValidationReport>),
    #[error(transparent)]
    Simnet(#[from] SimnetError),
    #[error(transparent)]
    Causal(#[from] CausalError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

/// The noisy-OR parameters used to synthesize one manifestation's table:
/// one gate per configuration of its nondistinguished (context) parents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoisyOrProvenance {
    pub context: Vec<String>,
    pub gates: BTreeMap<ParentConfig, NoisyOrSpec>,
}

/// A belief network for multiple coexisting faults: one binary node per
/// fault, the manifestation subgraph carried over from the star's global
/// network, and noisy-OR provenance per synthesized manifestation.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiFaultNetwork {
    pub network: BeliefNetwork,
    pub fault_nodes: Vec<String>,
    pub manifest_nodes: Vec<String>,
    pub provenance: BTreeMap<String, NoisyOrProvenance>,
    pub priors: BTreeMap<String, f64>,
}

/// One conditional-independence assertion the output makes beyond its
/// input: with both faults present — a configuration the similarity network
/// never licensed — the listed manifestations are treated as independent.
/// The tool reports these so a user can check them against the domain; it
/// does not judge their validity.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AddedIndependence {
    pub faults: (String, String),
    pub manifestations: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TransformReport {
    pub added_independence: Vec<AddedIndependence>,
}

/// Explicit inter-fault dependencies: arcs among fault nodes plus the full
/// tables for the dependent faults. Faults not covered here stay parentless
/// with their supplied priors.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FaultDependencies {
    pub arcs: BTreeSet<(String, String)>,
    pub cpts: BTreeMap<String, Cpt>,
}

#[derive(Debug, Clone)]
pub struct TransformOptions {
    pub normal: String,
    pub tolerance: f64,
    pub fault_deps: Option<FaultDependencies>,
}

impl Default for TransformOptions {
    fn default() -> Self {
        TransformOptions {
            normal: DEFAULT_NORMAL.to_string(),
            tolerance: DEFAULT_TOLERANCE,
            fault_deps: None,
        }
    }
}

/// Restrict a global network to two instances of its (root) fault
/// variable. Because the fault node is a root, conditioning on membership
/// in the pair only renormalizes its prior and slices the tables it
/// conditions; the rest of the factorization is untouched.
fn restrict_to_pair(global: &BeliefNetwork, fault_var: &str, pair: &[String; 2]) -> BeliefNetwork {
    let dvar = global.variable(fault_var).unwrap();
    let instances: Vec<String> = dvar
        .instances
        .iter()
        .filter(|i| pair.contains(i))
        .cloned()
        .collect();

    let mut bn = BeliefNetwork::new();
    for (name, var) in &global.variables {
        if name == fault_var {
            bn.add_variable(Variable::new(fault_var, instances.clone()));
        } else {
            bn.add_variable(var.clone());
        }
    }
    bn.arcs = global.arcs.clone();

    for (name, cpt) in &global.cpts {
        if name == fault_var {
            let row = cpt.row(&ParentConfig::empty()).unwrap();
            let weights: Vec<f64> = instances
                .iter()
                .map(|i| row[dvar.index_of(i).unwrap()])
                .collect();
            let total: f64 = weights.iter().sum();
            let prior = if total > 0.0 {
                weights.iter().map(|w| w / total).collect()
            } else {
                // Degenerate pair mass; fall back to an uninformative prior
                // so the construction can proceed (positivity is a
                // soundness warning upstream, not a hard precondition).
                vec![1.0 / instances.len() as f64; instances.len()]
            };
            bn.set_cpt(Cpt::root(fault_var, prior));
        } else if cpt.parents.iter().any(|p| p == fault_var) {
            let mut sliced = Cpt::new(name.clone(), cpt.parents.clone());
            for (cfg, row) in &cpt.rows {
                if instances.iter().any(|i| cfg.get(fault_var) == Some(i)) {
                    sliced.insert_row(cfg.clone(), row.clone());
                }
            }
            bn.set_cpt(sliced);
        } else {
            bn.set_cpt(cpt.clone());
        }
    }
    bn
}

/// True iff, restricted to the pair, the fault arc into `child` is vacuous:
/// the child's conditional rows for the two fault instances agree within
/// `tol` for every configuration of its other parents.
fn fault_arc_is_vacuous(
    restricted: &BeliefNetwork,
    fault_var: &str,
    child: &str,
    pair: &[String; 2],
    tol: f64,
) -> bool {
    let cpt = restricted.cpt(child).unwrap();
    let other_parents: Vec<&Variable> = cpt
        .parents
        .iter()
        .filter(|p| p.as_str() != fault_var)
        .map(|p| restricted.variable(p).unwrap())
        .collect();
    for cfg in config_space(&other_parents) {
        let row_a = cpt
            .row(&cfg.clone().with(fault_var, pair[0].clone()))
            .unwrap();
        let row_b = cpt
            .row(&cfg.clone().with(fault_var, pair[1].clone()))
            .unwrap();
        if row_a.iter().zip(row_b).any(|(a, b)| (a - b).abs() > tol) {
            return false;
        }
    }
    true
}

/// Restructure a single-fault global network into a similarity network
/// whose similarity graph is a star centered on `normal`.
///
/// For each fault, the local network discriminating it from `normal` keeps
/// exactly the nondistinguished nodes still connected to the fault node
/// once vacuous fault arcs (equal restricted conditionals, within `tol`)
/// are removed. Arcs among nondistinguished nodes are carried over from
/// the global network, so they follow its topological order; conditional
/// distributions for nodes that lost their fault arc are recomputed by the
/// exact-inference oracle on the restricted global.
pub fn star_restructure(
    global: &BeliefNetwork,
    fault_var: &str,
    normal: &str,
    tol: f64,
) -> Result<SimilarityNetwork, TransformError> {
    let report = validate_network(global);
    if report.has_errors() {
        return Err(TransformError::InvalidInput(Box::new(report)));
    }
    let dvar = global
        .variable(fault_var)
        .ok_or_else(|| TransformError::UnknownVariable(fault_var.to_string()))?;
    if !global.parents_of(fault_var).is_empty() {
        return Err(TransformError::FaultHasParents(fault_var.to_string()));
    }
    if dvar.index_of(normal).is_none() {
        return Err(TransformError::UnknownInstance {
            variable: fault_var.to_string(),
            instance: normal.to_string(),
        });
    }

    let mut graph = SimilarityGraph::new();
    graph.add_node(normal);
    let mut s_prime = SimilarityNetwork::new(
        dvar.clone(),
        SimilarityStructure::Graph(SimilarityGraph::new()),
    );

    for fault in &dvar.instances {
        if fault == normal {
            continue;
        }
        graph.add_edge(normal, fault.clone());
        let pair = [normal.to_string(), fault.clone()];
        let restricted = restrict_to_pair(global, fault_var, &pair);

        let mut dropped: BTreeSet<String> = BTreeSet::new();
        for child in restricted.children_of(fault_var) {
            if fault_arc_is_vacuous(&restricted, fault_var, &child, &pair, tol) {
                dropped.insert(child);
            }
        }

        let mut pruned = DiGraph::from(&restricted);
        pruned
            .arcs
            .retain(|(p, c)| !(p == fault_var && dropped.contains(c)));
        let kept: BTreeSet<String> = restricted
            .variables
            .keys()
            .filter(|n| graphs::connected_to(n, fault_var, &pruned))
            .cloned()
            .collect();

        let table = oracle::joint_table(&restricted)?;
        let mut local = BeliefNetwork::new();
        for name in &kept {
            local.add_variable(restricted.variable(name).unwrap().clone());
        }
        for (p, c) in &pruned.arcs {
            if kept.contains(p) && kept.contains(c) {
                local.add_arc(p.clone(), c.clone());
            }
        }
        for name in &kept {
            let cpt = restricted.cpt(name).unwrap();
            if dropped.contains(name) {
                // The fault arc was vacuous: re-derive the distribution over
                // the remaining parents from the restricted joint.
                let remaining: Vec<&Variable> = cpt
                    .parents
                    .iter()
                    .filter(|p| p.as_str() != fault_var)
                    .map(|p| restricted.variable(p).unwrap())
                    .collect();
                let mut reduced = Cpt::new(name.clone(), remaining.iter().map(|v| v.name.clone()));
                for cfg in config_space(&remaining) {
                    let evidence: BTreeMap<String, String> = cfg
                        .assignments()
                        .iter()
                        .map(|(k, v)| (k.clone(), v.clone()))
                        .collect();
                    let row = match oracle::query_table(&table, &evidence, name) {
                        Ok(row) => row,
                        // Impossible parent configuration: the two fault
                        // rows agree within tol, so either one serves.
                        Err(OracleError::ZeroEvidence) => cpt
                            .row(&cfg.clone().with(fault_var, normal.to_string()))
                            .unwrap()
                            .to_vec(),
                        Err(other) => return Err(other.into()),
                    };
                    reduced.insert_row(cfg, row);
                }
                local.set_cpt(reduced);
            } else {
                local.set_cpt(cpt.clone());
            }
        }
        s_prime.add_local(LocalBeliefNetwork::new(pair, local));
    }

    s_prime.graph = SimilarityStructure::Graph(graph);
    Ok(s_prime)
}

fn present_index(var: &Variable) -> Result<usize, TransformError> {
    if !var.is_binary() {
        return Err(TransformError::NonBinaryManifestation(var.name.clone()));
    }
    Ok(1)
}

/// The common tail of both transformation entry points, starting from an
/// already-star similarity network.
fn transform_star(
    s_prime: &SimilarityNetwork,
    priors: &BTreeMap<String, f64>,
    opts: &TransformOptions,
) -> Result<(MultiFaultNetwork, TransformReport), TransformError> {
    let f = s_prime.distinguished_name().to_string();
    let normal = opts.normal.as_str();
    let star_global = simnet::build_global(s_prime)?;

    let faults: Vec<String> = s_prime
        .distinguished
        .instances
        .iter()
        .filter(|i| i.as_str() != normal)
        .cloned()
        .collect();
    let manifest_nodes: Vec<String> = star_global
        .variables
        .keys()
        .filter(|n| **n != f)
        .cloned()
        .collect();

    for fault in &faults {
        if manifest_nodes.iter().any(|m| m == fault) {
            return Err(TransformError::NameCollision(fault.clone()));
        }
        if !priors.contains_key(fault)
            && !opts
                .fault_deps
                .as_ref()
                .is_some_and(|deps| deps.cpts.contains_key(fault))
        {
            return Err(TransformError::MissingPrior(fault.clone()));
        }
    }

    let mut network = BeliefNetwork::new();
    for m in &manifest_nodes {
        network.add_variable(star_global.variable(m).unwrap().clone());
    }
    for fault in &faults {
        network.add_variable(Variable::binary(fault.clone()));
    }

    // Manifestation-to-manifestation arcs transfer unchanged.
    for (p, c) in &star_global.arcs {
        if p != &f && c != &f {
            network.add_arc(p.clone(), c.clone());
        }
    }
    // A fault arc exists exactly when the manifestation belongs to that
    // fault's local network in the star.
    for fault in &faults {
        let edge = BTreeSet::from([normal.to_string(), fault.clone()]);
        let local = s_prime
            .local_for(&edge)
            .ok_or_else(|| SimnetError::UnknownVariable(simnet::edge_label(&edge)))?;
        for member in local.network.variables.keys() {
            if member != &f {
                network.add_arc(fault.clone(), member.clone());
            }
        }
    }

    // Fault nodes: parentless with the supplied priors unless explicit
    // dependencies were given.
    let mut used_priors: BTreeMap<String, f64> = BTreeMap::new();
    for fault in &faults {
        if let Some(deps) = &opts.fault_deps {
            if let Some(cpt) = deps.cpts.get(fault) {
                for (p, c) in &deps.arcs {
                    if c == fault {
                        if !faults.contains(p) {
                            return Err(TransformError::UnknownVariable(p.clone()));
                        }
                        network.add_arc(p.clone(), c.clone());
                    }
                }
                network.set_cpt(cpt.clone());
                continue;
            }
        }
        let p = priors[fault.as_str()];
        network.set_cpt(Cpt::root(fault.clone(), vec![1.0 - p, p]));
        used_priors.insert(fault.clone(), p);
    }

    // Synthesize each manifestation's table from the star's distributions:
    // leak = p(x | NORMAL, context), singles = p(x | only that fault,
    // context), one gate per context configuration.
    let mut provenance: BTreeMap<String, NoisyOrProvenance> = BTreeMap::new();
    for m in &manifest_nodes {
        let mvar = star_global.variable(m).unwrap();
        let present = present_index(mvar)?;
        let star_cpt = star_global.cpt(m).unwrap();
        let context_names: Vec<String> = star_cpt
            .parents
            .iter()
            .filter(|p| **p != f)
            .cloned()
            .collect();
        let context_vars: Vec<Variable> = context_names
            .iter()
            .map(|w| star_global.variable(w).unwrap().clone())
            .collect();
        let has_f = star_cpt.parents.contains(&f);

        let fault_parents: Vec<String> = faults
            .iter()
            .filter(|fault| network.arcs.contains(&((*fault).clone(), m.clone())))
            .cloned()
            .collect();

        let row_for = |fault_instance: &str, w_cfg: &ParentConfig| -> f64 {
            let cfg = if has_f {
                w_cfg.clone().with(f.clone(), fault_instance.to_string())
            } else {
                w_cfg.clone()
            };
            star_cpt.row(&cfg).unwrap()[present]
        };

        let context_refs: Vec<&Variable> = context_vars.iter().collect();
        let mut gates: BTreeMap<ParentConfig, NoisyOrSpec> = BTreeMap::new();
        for w_cfg in config_space(&context_refs) {
            let leak = row_for(normal, &w_cfg);
            let singles: Vec<f64> = fault_parents
                .iter()
                .map(|fault| row_for(fault, &w_cfg))
                .collect();
            let spec = NoisyOrSpec::from_singles(m.clone(), fault_parents.clone(), leak, singles)?;
            gates.insert(w_cfg, spec);
        }
        let cpt = causal::synthesize_cpt_with_context(&context_vars, &gates)?;
        network.set_cpt(cpt);
        provenance.insert(
            m.clone(),
            NoisyOrProvenance {
                context: context_names,
                gates,
            },
        );
    }

    if opts.fault_deps.is_some() {
        let report = validate_network(&network);
        if report.has_errors() {
            return Err(TransformError::InvalidFaultDeps(Box::new(report)));
        }
    }

    let report = TransformReport {
        added_independence: added_independence(&network, &faults, &manifest_nodes),
    };
    let mfn = MultiFaultNetwork {
        network,
        fault_nodes: faults,
        manifest_nodes,
        provenance,
        priors: used_priors,
    };
    Ok((mfn, report))
}

/// The independence assertions the multi-fault network adds beyond the
/// similarity network: for each fault pair, the manifestations either fault
/// influences are treated as conditionally independent given the full fault
/// configuration — a conditioning event with two faults present that the
/// single-fault input could never express.
fn added_independence(
    network: &BeliefNetwork,
    faults: &[String],
    manifest_nodes: &[String],
) -> Vec<AddedIndependence> {
    let mut sorted_faults: Vec<&String> = faults.iter().collect();
    sorted_faults.sort();
    let mut out = Vec::new();
    for i in 0..sorted_faults.len() {
        for j in i + 1..sorted_faults.len() {
            let influenced: Vec<String> = manifest_nodes
                .iter()
                .filter(|m| {
                    network
                        .arcs
                        .contains(&(sorted_faults[i].clone(), (*m).clone()))
                        || network
                            .arcs
                            .contains(&(sorted_faults[j].clone(), (*m).clone()))
                })
                .cloned()
                .collect();
            if influenced.len() >= 2 {
                out.push(AddedIndependence {
                    faults: (sorted_faults[i].clone(), sorted_faults[j].clone()),
                    manifestations: influenced,
                });
            }
        }
    }
    out
}

/// Transform a similarity network into a multiple-fault belief network:
/// build its global network, restructure that into a star centered on
/// `opts.normal`, then synthesize the output per fault membership and
/// noisy-OR.
pub fn transform_similarity(
    s: &SimilarityNetwork,
    priors: &BTreeMap<String, f64>,
    opts: &TransformOptions,
) -> Result<(MultiFaultNetwork, TransformReport), TransformError> {
    if s.distinguished.index_of(&opts.normal).is_none() {
        return Err(TransformError::NoNormalInstance(opts.normal.clone()));
    }
    let global = simnet::build_global(s)?;
    let s_prime = star_restructure(
        &global,
        s.distinguished_name(),
        &opts.normal,
        opts.tolerance,
    )?;
    transform_star(&s_prime, priors, opts)
}

/// The belief-network-only entry point: no original similarity network is
/// required — the star is derived from the global network directly and the
/// rest of the pipeline is identical.
pub fn transform_global(
    bn: &BeliefNetwork,
    fault_var: &str,
    priors: &BTreeMap<String, f64>,
    opts: &TransformOptions,
) -> Result<(MultiFaultNetwork, TransformReport), TransformError> {
    let s_prime = star_restructure(bn, fault_var, &opts.normal, opts.tolerance)?;
    transform_star(&s_prime, priors, opts)
}
