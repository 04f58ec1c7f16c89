//! Domain types shared by every other module: discrete variables, conditional
//! probability tables, belief networks, and the validation report machinery.
//!
//! All types are immutable values once constructed; nothing in this crate
//! mutates a network in place. Construction is deliberately permissive —
//! [`validate_network`] accepts arbitrary candidate structures and reports
//! every problem it finds instead of failing on the first one.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::graphs;

/// Instance label for the "absent" state of a binary variable.
pub const ABSENT: &str = "absent";
/// Instance label for the "present" state of a binary variable.
pub const PRESENT: &str = "present";

/// Tolerance for "this row sums to one" checks.
pub const NORMALIZATION_TOL: f64 = 1e-12;

/// A named discrete variable with an ordered list of instance labels.
///
/// Instance order is presentational only: rows and probability vectors use
/// it for addressing, but no semantics attach to the position of a label.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Variable {
    pub name: String,
    pub instances: Vec<String>,
}

impl Variable {
    pub fn new(
        name: impl Into<String>,
        instances: impl IntoIterator<Item = impl Into<String>>,
    ) -> Self {
        Variable {
            name: name.into(),
            instances: instances.into_iter().map(Into::into).collect(),
        }
    }

    /// A binary variable has exactly the instances `absent`, `present`,
    /// in that order.
    pub fn binary(name: impl Into<String>) -> Self {
        Variable::new(name, [ABSENT, PRESENT])
    }

    pub fn is_binary(&self) -> bool {
        self.instances.len() == 2 && self.instances[0] == ABSENT && self.instances[1] == PRESENT
    }

    pub fn index_of(&self, instance: &str) -> Option<usize> {
        self.instances.iter().position(|i| i == instance)
    }
}

/// A total assignment of one instance label to every parent of a node.
///
/// Assignments are keyed by parent variable name, so two configs compare
/// equal independent of the order in which they were built.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ParentConfig(BTreeMap<String, String>);

impl ParentConfig {
    pub fn empty() -> Self {
        ParentConfig(BTreeMap::new())
    }

    pub fn new(
        assignments: impl IntoIterator<Item = (impl Into<String>, impl Into<String>)>,
    ) -> Self {
        ParentConfig(
            assignments
                .into_iter()
                .map(|(k, v)| (k.into(), v.into()))
                .collect(),
        )
    }

    pub fn set(&mut self, parent: impl Into<String>, instance: impl Into<String>) {
        self.0.insert(parent.into(), instance.into());
    }

    pub fn with(mut self, parent: impl Into<String>, instance: impl Into<String>) -> Self {
        self.set(parent, instance);
        self
    }

    pub fn get(&self, parent: &str) -> Option<&str> {
        self.0.get(parent).map(String::as_str)
    }

    pub fn assignments(&self) -> &BTreeMap<String, String> {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// True iff the config assigns every listed parent exactly once and
    /// nothing else.
    pub fn is_total_over<'a>(&self, parents: impl IntoIterator<Item = &'a str>) -> bool {
        let wanted: BTreeSet<&str> = parents.into_iter().collect();
        self.0.len() == wanted.len() && self.0.keys().all(|k| wanted.contains(k.as_str()))
    }

    /// The sub-config over the given parent names.
    pub fn restrict<'a>(&self, parents: impl IntoIterator<Item = &'a str>) -> ParentConfig {
        let keep: BTreeSet<&str> = parents.into_iter().collect();
        ParentConfig(
            self.0
                .iter()
                .filter(|(k, _)| keep.contains(k.as_str()))
                .map(|(k, v)| (k.clone(), v.clone()))
                .collect(),
        )
    }
}

/// Enumerate every total configuration over the given parent variables, in
/// canonical order: parents sorted by name, each parent cycling through its
/// instances in declared order, first parent most significant.
pub fn config_space(parents: &[&Variable]) -> Vec<ParentConfig> {
    let mut sorted: Vec<&Variable> = parents.to_vec();
    sorted.sort_by(|a, b| a.name.cmp(&b.name));
    let mut out = vec![ParentConfig::empty()];
    for var in sorted {
        let mut next = Vec::with_capacity(out.len() * var.instances.len());
        for cfg in &out {
            for inst in &var.instances {
                next.push(cfg.clone().with(var.name.clone(), inst.clone()));
            }
        }
        out = next;
    }
    out
}

/// A conditional probability table: one probability vector over the owner's
/// instances per configuration of its parents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cpt {
    pub owner: String,
    /// Parent variable names, sorted lexicographically. The sort fixes row
    /// addressing across runs and across serializations.
    pub parents: Vec<String>,
    pub rows: BTreeMap<ParentConfig, Vec<f64>>,
}

impl Cpt {
    pub fn new(
        owner: impl Into<String>,
        parents: impl IntoIterator<Item = impl Into<String>>,
    ) -> Self {
        let mut parents: Vec<String> = parents.into_iter().map(Into::into).collect();
        parents.sort();
        Cpt {
            owner: owner.into(),
            parents,
            rows: BTreeMap::new(),
        }
    }

    /// A parentless table holding a single prior row.
    pub fn root(owner: impl Into<String>, prior: Vec<f64>) -> Self {
        let mut cpt = Cpt::new(owner, Vec::<String>::new());
        cpt.rows.insert(ParentConfig::empty(), prior);
        cpt
    }

    pub fn insert_row(&mut self, config: ParentConfig, probabilities: Vec<f64>) {
        self.rows.insert(config, probabilities);
    }

    pub fn row(&self, config: &ParentConfig) -> Option<&[f64]> {
        self.rows.get(config).map(Vec::as_slice)
    }
}

/// A directed acyclic graph over variables plus one [`Cpt`] per node.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BeliefNetwork {
    pub variables: BTreeMap<String, Variable>,
    pub arcs: BTreeSet<(String, String)>,
    pub cpts: BTreeMap<String, Cpt>,
}

impl BeliefNetwork {
    pub fn new() -> Self {
        BeliefNetwork::default()
    }

    pub fn add_variable(&mut self, var: Variable) {
        self.variables.insert(var.name.clone(), var);
    }

    pub fn add_arc(&mut self, parent: impl Into<String>, child: impl Into<String>) {
        self.arcs.insert((parent.into(), child.into()));
    }

    pub fn set_cpt(&mut self, cpt: Cpt) {
        self.cpts.insert(cpt.owner.clone(), cpt);
    }

    pub fn variable(&self, name: &str) -> Option<&Variable> {
        self.variables.get(name)
    }

    pub fn cpt(&self, name: &str) -> Option<&Cpt> {
        self.cpts.get(name)
    }

    /// In-neighbors of `name`, sorted lexicographically.
    pub fn parents_of(&self, name: &str) -> Vec<String> {
        self.arcs
            .iter()
            .filter(|(_, c)| c == name)
            .map(|(p, _)| p.clone())
            .collect()
    }

    /// Out-neighbors of `name`, sorted lexicographically.
    pub fn children_of(&self, name: &str) -> Vec<String> {
        let mut out: Vec<String> = self
            .arcs
            .iter()
            .filter(|(p, _)| p == name)
            .map(|(_, c)| c.clone())
            .collect();
        out.sort();
        out
    }

    /// Total number of joint states, saturating at `u64::MAX`.
    pub fn state_count(&self) -> u64 {
        self.variables
            .values()
            .fold(1u64, |acc, v| acc.saturating_mul(v.instances.len() as u64))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

/// One validation finding: what went wrong (or is suspicious), and where.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Finding {
    pub severity: Severity,
    pub code: String,
    pub message: String,
    pub location: String,
}

/// The outcome of a validation pass. An empty error list means the subject
/// passed; warnings never fail validation on their own.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub findings: Vec<Finding>,
}

impl ValidationReport {
    pub fn new() -> Self {
        ValidationReport::default()
    }

    pub fn error(&mut self, code: &str, message: impl Into<String>, location: impl Into<String>) {
        self.findings.push(Finding {
            severity: Severity::Error,
            code: code.to_string(),
            message: message.into(),
            location: location.into(),
        });
    }

    pub fn warning(&mut self, code: &str, message: impl Into<String>, location: impl Into<String>) {
        self.findings.push(Finding {
            severity: Severity::Warning,
            code: code.to_string(),
            message: message.into(),
            location: location.into(),
        });
    }

    pub fn errors(&self) -> impl Iterator<Item = &Finding> {
        self.findings
            .iter()
            .filter(|f| f.severity == Severity::Error)
    }

    pub fn warnings(&self) -> impl Iterator<Item = &Finding> {
        self.findings
            .iter()
            .filter(|f| f.severity == Severity::Warning)
    }

    pub fn has_errors(&self) -> bool {
        self.errors().next().is_some()
    }

    pub fn is_clean(&self) -> bool {
        self.findings.is_empty()
    }

    pub fn merge(&mut self, other: ValidationReport) {
        self.findings.extend(other.findings);
    }

    /// Prefix every finding's location, e.g. with the local network it came
    /// from.
    pub fn with_location_prefix(mut self, prefix: &str) -> Self {
        for f in &mut self.findings {
            f.location = if f.location.is_empty() {
                prefix.to_string()
            } else {
                format!("{prefix}/{}", f.location)
            };
        }
        self
    }
}

fn validate_variables(bn: &BeliefNetwork, report: &mut ValidationReport) {
    for var in bn.variables.values() {
        if var.instances.len() < 2 {
            report.error(
                "too-few-instances",
                format!(
                    "variable `{}` has {} instance(s); at least 2 required",
                    var.name,
                    var.instances.len()
                ),
                format!("variable:{}", var.name),
            );
        }
        let mut seen = BTreeSet::new();
        for inst in &var.instances {
            if !seen.insert(inst) {
                report.error(
                    "duplicate-instance",
                    format!("variable `{}` repeats instance label `{inst}`", var.name),
                    format!("variable:{}", var.name),
                );
            }
        }
    }
}

fn validate_arcs(bn: &BeliefNetwork, report: &mut ValidationReport) {
    for (parent, child) in &bn.arcs {
        for end in [parent, child] {
            if !bn.variables.contains_key(end) {
                report.error(
                    "dangling-arc",
                    format!("arc {parent}->{child} names undeclared variable `{end}`"),
                    format!("arc:{parent}->{child}"),
                );
            }
        }
    }
    if !graphs::is_acyclic(&bn.variables.keys().cloned().collect(), &bn.arcs) {
        report.error("cycle", "the arc set contains a directed cycle", "arcs");
    }
}

fn validate_cpt_rows(bn: &BeliefNetwork, cpt: &Cpt, report: &mut ValidationReport) {
    let owner = match bn.variable(&cpt.owner) {
        Some(v) => v,
        None => return,
    };
    let parent_vars: Option<Vec<&Variable>> = cpt.parents.iter().map(|p| bn.variable(p)).collect();
    let parent_vars = match parent_vars {
        Some(v) => v,
        // Dangling parents are already reported via parent-mismatch/dangling-arc.
        None => return,
    };

    let expected: BTreeSet<ParentConfig> = config_space(&parent_vars).into_iter().collect();
    for cfg in &expected {
        if !cpt.rows.contains_key(cfg) {
            report.error(
                "missing-row",
                format!("no row for parent configuration {:?}", cfg.assignments()),
                format!("cpt:{}", cpt.owner),
            );
        }
    }
    for (cfg, row) in &cpt.rows {
        let loc = format!("cpt:{}@{:?}", cpt.owner, cfg.assignments());
        if !expected.contains(cfg) {
            report.error(
                "extra-row",
                format!(
                    "row for configuration {:?} outside the parent space",
                    cfg.assignments()
                ),
                loc.clone(),
            );
            continue;
        }
        if row.len() != owner.instances.len() {
            report.error(
                "row-length",
                format!(
                    "row has {} entries; owner has {} instances",
                    row.len(),
                    owner.instances.len()
                ),
                loc.clone(),
            );
            continue;
        }
        let mut sum = 0.0;
        for &p in row {
            sum += p;
            if !(0.0..=1.0).contains(&p) || !p.is_finite() {
                report.error(
                    "entry-out-of-range",
                    format!("probability {p} outside [0, 1]"),
                    loc.clone(),
                );
            } else if p == 0.0 {
                // Strict positivity gates the soundness theorem, not the
                // structure, so a zero entry is only a warning.
                report.warning(
                    "zero-probability",
                    "row contains a zero probability",
                    loc.clone(),
                );
            }
        }
        if (sum - 1.0).abs() > NORMALIZATION_TOL {
            report.error(
                "row-not-normalized",
                format!("row sums to {sum}, expected 1 within {NORMALIZATION_TOL:e}"),
                loc,
            );
        }
    }
}

/// Structural validation of a belief network.
///
/// Reports errors for cycles, dangling arc endpoints, missing or extra
/// tables, missing/extra/denormalized rows, and parent lists that disagree
/// with the arc set; zero probabilities are reported as warnings. All
/// problems are reported — nothing is thrown.
pub fn validate_network(bn: &BeliefNetwork) -> ValidationReport {
    let mut report = ValidationReport::new();
    validate_variables(bn, &mut report);
    validate_arcs(bn, &mut report);

    for name in bn.variables.keys() {
        match bn.cpt(name) {
            None => {
                report.error(
                    "missing-cpt",
                    format!("variable `{name}` has no table"),
                    format!("cpt:{name}"),
                );
            }
            Some(cpt) => {
                let in_neighbors = bn.parents_of(name);
                if cpt.parents != in_neighbors {
                    report.error(
                        "parent-mismatch",
                        format!(
                            "table parents {:?} do not match in-neighbors {:?}",
                            cpt.parents, in_neighbors
                        ),
                        format!("cpt:{name}"),
                    );
                } else {
                    validate_cpt_rows(bn, cpt, &mut report);
                }
            }
        }
    }
    for owner in bn.cpts.keys() {
        if !bn.variables.contains_key(owner) {
            report.error(
                "extra-cpt",
                format!("table owner `{owner}` is not a declared variable"),
                format!("cpt:{owner}"),
            );
        }
    }
    report
}
