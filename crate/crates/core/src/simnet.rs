//! Similarity networks: representation, validation, global-network
//! construction by graph union, subset-independence extraction and
//! verification, and cross-edge probability fill.
//!
//! The probability fill is the load-bearing piece. A feature omitted from an
//! edge's local network asserts that its distribution is equal across that
//! edge's faults, so omissions induce equivalence classes of fault instances
//! (per feature) and assessed rows are copied across each class. Conflicting
//! duplicate assessments are an error, never averaged.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graphs::{self, DiGraph, SimilarityStructure};
use crate::model::{
    config_space, validate_network, BeliefNetwork, Cpt, ParentConfig, ValidationReport, Variable,
};
use crate::oracle::{self, OracleError};

/// Tolerance for agreement between duplicate or equality-propagated
/// assessments.
pub const ASSESSMENT_TOL: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum SimnetError {
    #[error("similarity network failed validation with {} error(s)", .0.errors().count())]
    InvalidInput(Box<ValidationReport>),
    #[error("graph union of the local networks contains a directed cycle")]
    CyclicGlobal,
    #[error("no assessment determines `{node}` for fault(s) {faults:?}")]
    UnderdeterminedCpt { node: String, faults: Vec<String> },
    #[error("conflicting assessments for `{node}`: {detail}")]
    InconsistentAssessment { node: String, detail: String },
    #[error("local network `{edge}` contains `{missing}` but does not condition `{node}` on it")]
    ScopeMismatch {
        node: String,
        edge: String,
        missing: String,
    },
    #[error("a conditioning event has probability zero; strict positivity is required")]
    NotPositive,
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("variable `{variable}` has no instance `{instance}`")]
    UnknownInstance { variable: String, instance: String },
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

/// A belief network over one (hyper)edge's faults plus only the features
/// relevant to discriminating them. The distinguished node's instances are
/// restricted to exactly the edge's fault set and it has no predecessors.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalBeliefNetwork {
    pub edge: BTreeSet<String>,
    pub network: BeliefNetwork,
}

impl LocalBeliefNetwork {
    pub fn new(edge: impl IntoIterator<Item = impl Into<String>>, network: BeliefNetwork) -> Self {
        LocalBeliefNetwork {
            edge: edge.into_iter().map(Into::into).collect(),
            network,
        }
    }
}

/// A distinguished variable, a similarity (hyper)graph over its fault
/// instances, and one local belief network per (hyper)edge.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityNetwork {
    pub distinguished: Variable,
    pub graph: SimilarityStructure,
    pub locals: BTreeMap<BTreeSet<String>, LocalBeliefNetwork>,
}

impl SimilarityNetwork {
    pub fn new(distinguished: Variable, graph: SimilarityStructure) -> Self {
        SimilarityNetwork {
            distinguished,
            graph,
            locals: BTreeMap::new(),
        }
    }

    pub fn add_local(&mut self, local: LocalBeliefNetwork) {
        self.locals.insert(local.edge.clone(), local);
    }

    pub fn distinguished_name(&self) -> &str {
        &self.distinguished.name
    }

    pub fn local_for(&self, edge: &BTreeSet<String>) -> Option<&LocalBeliefNetwork> {
        self.locals.get(edge)
    }
}

/// One asymmetric independence assertion: the feature's distribution is
/// equal across every fault in the subset.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SubsetIndependenceAssertion {
    pub feature: String,
    pub subset: BTreeSet<String>,
}

pub fn edge_label(edge: &BTreeSet<String>) -> String {
    edge.iter().cloned().collect::<Vec<_>>().join("|")
}

/// Validate a similarity network's structure: graph connectivity, one local
/// per edge, the no-predecessor rule for the distinguished node, instance
/// sets matching edges, and node-omission consistency. All problems are
/// reported, none thrown.
pub fn validate_similarity_network(s: &SimilarityNetwork) -> ValidationReport {
    let mut report = ValidationReport::new();
    let f = s.distinguished_name();

    if s.distinguished.instances.len() < 2 {
        report.error(
            "too-few-instances",
            format!("distinguished variable `{f}` needs at least 2 fault instances"),
            "distinguished",
        );
    }
    let fault_set: BTreeSet<&str> = s
        .distinguished
        .instances
        .iter()
        .map(String::as_str)
        .collect();
    if fault_set.len() != s.distinguished.instances.len() {
        report.error(
            "duplicate-instance",
            format!("distinguished variable `{f}` repeats a fault label"),
            "distinguished",
        );
    }

    for node in s.graph.nodes() {
        if !fault_set.contains(node.as_str()) {
            report.error(
                "unknown-fault",
                format!("similarity-graph node `{node}` is not an instance of `{f}`"),
                "similarity-graph",
            );
        }
    }
    for fault in &s.distinguished.instances {
        if !s.graph.nodes().contains(fault) {
            report.error(
                "fault-not-in-graph",
                format!("fault `{fault}` does not appear in the similarity graph"),
                "similarity-graph",
            );
        }
    }
    if !s.graph.is_connected() {
        report.error(
            "similarity-graph-disconnected",
            "the similarity graph must be connected",
            "similarity-graph",
        );
    }

    let edges: BTreeSet<BTreeSet<String>> = s.graph.edge_sets().into_iter().collect();
    for edge in &edges {
        if s.local_for(edge).is_none() {
            report.error(
                "missing-local-network",
                format!("edge {} has no local belief network", edge_label(edge)),
                format!("local:{}", edge_label(edge)),
            );
        }
    }
    for edge in s.locals.keys() {
        if !edges.contains(edge) {
            report.error(
                "unknown-edge",
                format!(
                    "local network {} has no matching (hyper)edge",
                    edge_label(edge)
                ),
                format!("local:{}", edge_label(edge)),
            );
        }
    }

    // Variable definitions must agree across locals.
    let mut defs: BTreeMap<&str, (&BTreeSet<String>, &Variable)> = BTreeMap::new();

    for (edge, local) in &s.locals {
        let label = format!("local:{}", edge_label(edge));
        report.merge(validate_network(&local.network).with_location_prefix(&label));

        let Some(dvar) = local.network.variable(f) else {
            report.error(
                "missing-distinguished",
                format!("local network does not contain the distinguished node `{f}`"),
                label.clone(),
            );
            continue;
        };
        if !local.network.parents_of(f).is_empty() {
            report.error(
                "distinguished-has-predecessor",
                format!(
                    "the distinguished node `{f}` must have no predecessors in a local network"
                ),
                label.clone(),
            );
        }
        let local_instances: BTreeSet<String> = dvar.instances.iter().cloned().collect();
        if local_instances != *edge {
            report.error(
                "local-instances-mismatch",
                format!(
                    "distinguished instances {:?} do not equal the edge's fault set {:?}",
                    dvar.instances, edge
                ),
                label.clone(),
            );
        }

        let digraph = DiGraph::from(&local.network);
        for name in local.network.variables.keys() {
            if name == f {
                continue;
            }
            if !graphs::connected_to(name, f, &digraph) {
                report.error(
                    "node-disconnected",
                    format!(
                        "`{name}` is disconnected from the distinguished node and must be omitted"
                    ),
                    label.clone(),
                );
            }
            match defs.get(name.as_str()) {
                None => {
                    defs.insert(name, (edge, local.network.variable(name).unwrap()));
                }
                Some((first_edge, first_var)) => {
                    if first_var.instances != local.network.variable(name).unwrap().instances {
                        report.error(
                            "instance-set-conflict",
                            format!(
                                "`{name}` has different instance lists in locals {} and {}",
                                edge_label(first_edge),
                                edge_label(edge)
                            ),
                            label.clone(),
                        );
                    }
                }
            }
        }
    }
    report
}

/// Union-find over fault indices, path-compressed.
struct Classes {
    parent: Vec<usize>,
}

impl Classes {
    fn new(n: usize) -> Self {
        Classes {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, i: usize) -> usize {
        if self.parent[i] != i {
            let root = self.find(self.parent[i]);
            self.parent[i] = root;
        }
        self.parent[i]
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            // Smaller index wins so representatives are deterministic.
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }
}

fn rows_agree(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
}

/// Nondistinguished variable definitions, agreed across locals.
fn collect_definitions(s: &SimilarityNetwork) -> Result<BTreeMap<String, Variable>, SimnetError> {
    let f = s.distinguished_name();
    let mut defs: BTreeMap<String, Variable> = BTreeMap::new();
    for local in s.locals.values() {
        for var in local.network.variables.values() {
            if var.name == f {
                continue;
            }
            match defs.get(&var.name) {
                None => {
                    defs.insert(var.name.clone(), var.clone());
                }
                Some(existing) if existing.instances != var.instances => {
                    return Err(SimnetError::InconsistentAssessment {
                        node: var.name.clone(),
                        detail: "instance lists differ across locals".into(),
                    });
                }
                _ => {}
            }
        }
    }
    Ok(defs)
}

/// Global parent sets from the arc union of the locals.
fn union_parents(s: &SimilarityNetwork) -> BTreeMap<String, BTreeSet<String>> {
    let f = s.distinguished_name();
    let mut parents: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    for local in s.locals.values() {
        for (p, c) in &local.network.arcs {
            if c != f {
                parents.entry(c.clone()).or_default().insert(p.clone());
            }
        }
        for name in local.network.variables.keys() {
            if name != f {
                parents.entry(name.clone()).or_default();
            }
        }
    }
    parents
}

/// Derive the distinguished node's global prior from the locals' pair (or
/// hyperedge) priors: each local prior is the global prior conditioned on
/// membership in its edge, so relative weights chain along the connected
/// similarity graph and normalize once at the end. Every edge is then
/// re-checked against the result, which catches inconsistent priors around
/// graph cycles.
fn derive_distinguished_prior(s: &SimilarityNetwork) -> Result<Cpt, SimnetError> {
    let f = s.distinguished_name();
    let faults = &s.distinguished.instances;

    let mut edge_priors: Vec<(BTreeSet<String>, BTreeMap<String, f64>)> = Vec::new();
    for (edge, local) in &s.locals {
        let dvar = local
            .network
            .variable(f)
            .ok_or_else(|| SimnetError::UnknownVariable(f.to_string()))?;
        let row = local
            .network
            .cpt(f)
            .and_then(|c| c.row(&ParentConfig::empty()))
            .ok_or_else(|| SimnetError::UnderdeterminedCpt {
                node: f.to_string(),
                faults: edge.iter().cloned().collect(),
            })?;
        let prior: BTreeMap<String, f64> = dvar
            .instances
            .iter()
            .cloned()
            .zip(row.iter().copied())
            .collect();
        edge_priors.push((edge.clone(), prior));
    }

    let mut weight: BTreeMap<&str, f64> = BTreeMap::new();
    if let Some(first) = faults.iter().map(String::as_str).min() {
        weight.insert(first, 1.0);
    }
    loop {
        let mut changed = false;
        for (edge, q) in &edge_priors {
            let Some(anchor) = edge.iter().find(|e| weight.contains_key(e.as_str())) else {
                continue;
            };
            let q_anchor = q[anchor.as_str()];
            let w_anchor = weight[anchor.as_str()];
            for fault in edge {
                if weight.contains_key(fault.as_str()) {
                    continue;
                }
                if q_anchor <= 0.0 {
                    return Err(SimnetError::InconsistentAssessment {
                        node: f.to_string(),
                        detail: format!(
                            "cannot chain the prior through `{anchor}` in local {}: it has probability zero there",
                            edge_label(edge)
                        ),
                    });
                }
                weight.insert(fault.as_str(), w_anchor * q[fault.as_str()] / q_anchor);
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let missing: Vec<String> = faults
        .iter()
        .filter(|ft| !weight.contains_key(ft.as_str()))
        .cloned()
        .collect();
    if !missing.is_empty() {
        return Err(SimnetError::UnderdeterminedCpt {
            node: f.to_string(),
            faults: missing,
        });
    }

    let total: f64 = weight.values().sum();
    let prior: Vec<f64> = faults
        .iter()
        .map(|ft| weight[ft.as_str()] / total)
        .collect();
    let by_name: BTreeMap<&str, f64> = faults
        .iter()
        .map(String::as_str)
        .zip(prior.iter().copied())
        .collect();

    for (edge, q) in &edge_priors {
        let members: Vec<&String> = edge.iter().collect();
        for i in 0..members.len() {
            for j in i + 1..members.len() {
                let (a, b) = (members[i].as_str(), members[j].as_str());
                if (q[a] * by_name[b] - q[b] * by_name[a]).abs() > ASSESSMENT_TOL {
                    return Err(SimnetError::InconsistentAssessment {
                        node: f.to_string(),
                        detail: format!(
                            "prior for {} in local {} conflicts with the prior chained through the rest of the graph",
                            edge_label(edge),
                            edge_label(edge)
                        ),
                    });
                }
            }
        }
    }
    Ok(Cpt::root(f, prior))
}

struct Assessments {
    /// (fault, context config) -> (row, source edge label).
    rows: BTreeMap<(String, ParentConfig), (Vec<f64>, String)>,
}

impl Assessments {
    fn record(
        &mut self,
        node: &str,
        fault: &str,
        cfg: ParentConfig,
        row: &[f64],
        source: &str,
    ) -> Result<(), SimnetError> {
        match self.rows.get(&(fault.to_string(), cfg.clone())) {
            Some((existing, first_source)) => {
                if !rows_agree(existing, row, ASSESSMENT_TOL) {
                    return Err(SimnetError::InconsistentAssessment {
                        node: node.to_string(),
                        detail: format!(
                            "locals {first_source} and {source} assess the row for fault `{fault}` at {:?} differently",
                            cfg.assignments()
                        ),
                    });
                }
            }
            None => {
                self.rows
                    .insert((fault.to_string(), cfg), (row.to_vec(), source.to_string()));
            }
        }
        Ok(())
    }
}

/// Assemble one table per global node by copying assessed rows out of the
/// locals and propagating equalities across the equivalence classes that
/// node omission induces.
///
/// A local assessed with a smaller parent scope is accepted only when the
/// missing parents are absent from that local entirely; its rows then read
/// as constant over the missing parents. A local containing a feature
/// without a distinguished arc contributes that feature's rows to every
/// fault of its edge.
pub fn fill_cpts_by_equality(s: &SimilarityNetwork) -> Result<BTreeMap<String, Cpt>, SimnetError> {
    let f = s.distinguished_name();
    let faults = &s.distinguished.instances;
    let defs = collect_definitions(s)?;
    let parents = union_parents(s);

    let mut out: BTreeMap<String, Cpt> = BTreeMap::new();
    out.insert(f.to_string(), derive_distinguished_prior(s)?);

    let fault_index: BTreeMap<&str, usize> = faults
        .iter()
        .enumerate()
        .map(|(i, ft)| (ft.as_str(), i))
        .collect();

    for (x, def) in &defs {
        let pset = &parents[x];
        let has_f = pset.contains(f);
        let context_names: Vec<&str> = pset
            .iter()
            .filter(|p| p.as_str() != f)
            .map(String::as_str)
            .collect();
        let context_vars: Vec<&Variable> = context_names
            .iter()
            .map(|w| {
                defs.get(*w)
                    .ok_or_else(|| SimnetError::UnknownVariable((*w).to_string()))
            })
            .collect::<Result<_, _>>()?;
        let context_cfgs = config_space(&context_vars);

        let mut assessed = Assessments {
            rows: BTreeMap::new(),
        };

        for (edge, local) in &s.locals {
            if !local.network.variables.contains_key(x) {
                continue;
            }
            let label = edge_label(edge);
            let local_parents: BTreeSet<String> = local.network.parents_of(x).into_iter().collect();
            for w in &context_names {
                if !local_parents.contains(*w) && local.network.variables.contains_key(*w) {
                    return Err(SimnetError::ScopeMismatch {
                        node: x.clone(),
                        edge: label,
                        missing: (*w).to_string(),
                    });
                }
            }
            let cpt = local
                .network
                .cpt(x)
                .ok_or_else(|| SimnetError::UnknownVariable(x.clone()))?;
            let local_has_f = local_parents.contains(f);
            let local_context: Vec<&str> = local_parents
                .iter()
                .filter(|p| p.as_str() != f)
                .map(String::as_str)
                .collect();

            for w_cfg in &context_cfgs {
                let local_cfg = w_cfg.restrict(local_context.iter().copied());
                if local_has_f {
                    for fault in edge {
                        let cfg = local_cfg.clone().with(f, fault.clone());
                        let row = cpt
                            .row(&cfg)
                            .ok_or_else(|| SimnetError::UnderdeterminedCpt {
                                node: x.clone(),
                                faults: vec![fault.clone()],
                            })?;
                        assessed.record(x, fault, w_cfg.clone(), row, &label)?;
                    }
                } else {
                    // No distinguished arc: this local asserts the rows hold
                    // for every fault of its edge.
                    let row =
                        cpt.row(&local_cfg)
                            .ok_or_else(|| SimnetError::UnderdeterminedCpt {
                                node: x.clone(),
                                faults: edge.iter().cloned().collect(),
                            })?;
                    for fault in edge {
                        assessed.record(x, fault, w_cfg.clone(), row, &label)?;
                    }
                }
            }
        }

        if has_f {
            // Equivalence classes from node omission, per feature.
            let mut classes = Classes::new(faults.len());
            for edge_set in s.graph.edge_sets() {
                let Some(local) = s.local_for(&edge_set) else {
                    continue;
                };
                if local.network.variables.contains_key(x) {
                    continue;
                }
                let members: Vec<usize> = edge_set
                    .iter()
                    .filter_map(|ft| fault_index.get(ft.as_str()).copied())
                    .collect();
                for pair in members.windows(2) {
                    classes.union(pair[0], pair[1]);
                }
            }

            // Representative assessed fault per class; classes with no
            // assessment are underdetermined.
            let assessed_faults: BTreeSet<&str> = assessed
                .rows
                .keys()
                .map(|(fault, _)| fault.as_str())
                .collect();
            let mut rep: BTreeMap<usize, &str> = BTreeMap::new();
            for fault in faults {
                if assessed_faults.contains(fault.as_str()) {
                    let class = classes.find(fault_index[fault.as_str()]);
                    rep.entry(class).or_insert(fault.as_str());
                }
            }
            for fault in faults {
                let class = classes.find(fault_index[fault.as_str()]);
                match rep.get(&class) {
                    None => {
                        let members: Vec<String> = faults
                            .iter()
                            .filter(|ft| classes.find(fault_index[ft.as_str()]) == class)
                            .cloned()
                            .collect();
                        return Err(SimnetError::UnderdeterminedCpt {
                            node: x.clone(),
                            faults: members,
                        });
                    }
                    Some(&rep_fault) => {
                        // Every assessed member of the class must agree with
                        // the representative — that is the Eq-propagated
                        // equality the omissions assert.
                        if assessed_faults.contains(fault.as_str()) && fault != rep_fault {
                            for w_cfg in &context_cfgs {
                                let a = &assessed.rows[&(fault.clone(), w_cfg.clone())].0;
                                let b = &assessed.rows[&(rep_fault.to_string(), w_cfg.clone())].0;
                                if !rows_agree(a, b, ASSESSMENT_TOL) {
                                    return Err(SimnetError::InconsistentAssessment {
                                        node: x.clone(),
                                        detail: format!(
                                            "faults `{fault}` and `{rep_fault}` are asserted equal by omission but assessed differently"
                                        ),
                                    });
                                }
                            }
                        }
                    }
                }
            }

            let mut parent_vars: Vec<&Variable> = context_vars.clone();
            parent_vars.push(&s.distinguished);
            let mut cpt = Cpt::new(x.clone(), pset.iter().cloned());
            for cfg in config_space(&parent_vars) {
                let fault = cfg.get(f).unwrap().to_string();
                let w_cfg = cfg.restrict(context_names.iter().copied());
                let key = (fault.clone(), w_cfg.clone());
                let row = match assessed.rows.get(&key) {
                    Some((row, _)) => row.clone(),
                    None => {
                        let class = classes.find(fault_index[fault.as_str()]);
                        let rep_fault = rep[&class];
                        assessed.rows[&(rep_fault.to_string(), w_cfg)].0.clone()
                    }
                };
                cpt.insert_row(cfg, row);
            }
            out.insert(x.clone(), cpt);
        } else {
            // No local conditions this feature on the distinguished node;
            // its rows are fault-free and must simply agree everywhere.
            let any_fault = assessed
                .rows
                .keys()
                .map(|(fault, _)| fault.clone())
                .next()
                .ok_or_else(|| SimnetError::UnderdeterminedCpt {
                    node: x.clone(),
                    faults: Vec::new(),
                })?;
            let mut cpt = Cpt::new(x.clone(), pset.iter().cloned());
            for w_cfg in &context_cfgs {
                // All faults carry the same row here; recorded consistency
                // checks already enforced agreement.
                let row = assessed.rows[&(any_fault.clone(), w_cfg.clone())].0.clone();
                cpt.insert_row(w_cfg.clone(), row);
            }
            out.insert(x.clone(), cpt);
        }
        let _ = def;
    }
    Ok(out)
}

/// Construct the global belief network: node and arc sets are the graph
/// union of the locals, the distinguished node carries its full fault list,
/// and the tables come from [`fill_cpts_by_equality`].
pub fn build_global(s: &SimilarityNetwork) -> Result<BeliefNetwork, SimnetError> {
    let report = validate_similarity_network(s);
    if report.has_errors() {
        return Err(SimnetError::InvalidInput(Box::new(report)));
    }

    let local_graphs: Vec<DiGraph> = s
        .locals
        .values()
        .map(|l| DiGraph::from(&l.network))
        .collect();
    let union = graphs::graph_union(local_graphs.iter());
    if !graphs::is_acyclic(&union.nodes, &union.arcs) {
        return Err(SimnetError::CyclicGlobal);
    }

    let defs = collect_definitions(s)?;
    let cpts = fill_cpts_by_equality(s)?;

    let mut bn = BeliefNetwork::new();
    bn.add_variable(s.distinguished.clone());
    for def in defs.into_values() {
        bn.add_variable(def);
    }
    bn.arcs = union.arcs;
    for cpt in cpts.into_values() {
        bn.set_cpt(cpt);
    }
    Ok(bn)
}

/// Every subset-independence assertion the similarity network encodes: for
/// each edge, each feature that exists somewhere in the network but is
/// omitted from (or left dangling in) that edge's local network is asserted
/// equal across the edge's faults.
pub fn extract_subset_independence(s: &SimilarityNetwork) -> Vec<SubsetIndependenceAssertion> {
    let f = s.distinguished_name();
    let mut features: BTreeSet<&str> = BTreeSet::new();
    for local in s.locals.values() {
        features.extend(
            local
                .network
                .variables
                .keys()
                .map(String::as_str)
                .filter(|n| *n != f),
        );
    }

    let mut out = Vec::new();
    for edge_set in s.graph.edge_sets() {
        let Some(local) = s.local_for(&edge_set) else {
            continue;
        };
        let digraph = DiGraph::from(&local.network);
        for x in &features {
            let omitted = !local.network.variables.contains_key(*x);
            // A feature present but unreachable from the distinguished node
            // carries the same assertion; validation normally rejects such
            // locals, so this is a defensive reading.
            let dangling = !omitted && !graphs::connected_to(x, f, &digraph);
            if omitted || dangling {
                out.push(SubsetIndependenceAssertion {
                    feature: (*x).to_string(),
                    subset: edge_set.clone(),
                });
            }
        }
    }
    out.sort();
    out
}

/// Check one subset-independence assertion numerically: the feature's
/// conditional distribution, computed by the exact-inference oracle, must
/// agree across every fault pair in the subset within `tol`.
pub fn verify_subset_independence(
    bn: &BeliefNetwork,
    distinguished: &str,
    assertion: &SubsetIndependenceAssertion,
    tol: f64,
) -> Result<bool, SimnetError> {
    let dvar = bn
        .variable(distinguished)
        .ok_or_else(|| SimnetError::UnknownVariable(distinguished.to_string()))?;
    if bn.variable(&assertion.feature).is_none() {
        return Err(SimnetError::UnknownVariable(assertion.feature.clone()));
    }
    for fault in &assertion.subset {
        if dvar.index_of(fault).is_none() {
            return Err(SimnetError::UnknownInstance {
                variable: distinguished.to_string(),
                instance: fault.clone(),
            });
        }
    }

    let table = oracle::joint_table(bn)?;
    let mut conditionals: Vec<Vec<f64>> = Vec::new();
    for fault in &assertion.subset {
        let evidence = BTreeMap::from([(distinguished.to_string(), fault.clone())]);
        let dist =
            oracle::query_table(&table, &evidence, &assertion.feature).map_err(|e| match e {
                OracleError::ZeroEvidence => SimnetError::NotPositive,
                other => SimnetError::Oracle(other),
            })?;
        conditionals.push(dist);
    }
    for i in 0..conditionals.len() {
        for j in i + 1..conditionals.len() {
            if !rows_agree(&conditionals[i], &conditionals[j], tol) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Report the three soundness conditions for a constructed global network:
/// no directed cycles, a connected similarity graph, and strict positivity.
/// The first two are errors; positivity failures are warnings because they
/// gate the soundness theorem, not the construction itself.
pub fn check_soundness(s: &SimilarityNetwork, global: &BeliefNetwork) -> ValidationReport {
    let mut report = ValidationReport::new();
    if !s.graph.is_connected() {
        report.error(
            "similarity-graph-disconnected",
            "the similarity graph must be connected",
            "similarity-graph",
        );
    }
    let node_names: BTreeSet<String> = global.variables.keys().cloned().collect();
    if !graphs::is_acyclic(&node_names, &global.arcs) {
        report.error(
            "cycle",
            "the global belief network contains a directed cycle",
            "global",
        );
    }
    for (name, cpt) in &global.cpts {
        let zeros = cpt
            .rows
            .values()
            .flat_map(|row| row.iter())
            .filter(|&&p| p == 0.0)
            .count();
        if zeros > 0 {
            report.warning(
                "positivity-violated",
                format!(
                    "{zeros} zero probabilit{} in the table for `{name}`",
                    if zeros == 1 { "y" } else { "ies" }
                ),
                format!("cpt:{name}"),
            );
        }
    }
    report
}
