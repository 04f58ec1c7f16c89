//! Brute-force exact inference by full-joint enumeration.
//!
//! This module is the independent verification engine for every other
//! module: it knows nothing about similarity networks, noisy-OR gates, or
//! d-separation — it just multiplies table rows along the factorization and
//! sums. Full enumeration only, no variable elimination, no sampling;
//! desk-scale networks enumerate in well under a second, and simplicity is
//! what makes the answers trustworthy.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::model::{BeliefNetwork, Variable};

/// Enumeration guard: joint tables beyond this many states are refused.
pub const MAX_STATES: u64 = 1 << 24;

#[derive(Debug, Error, PartialEq)]
pub enum OracleError {
    #[error("network has {0} joint states, above the enumeration guard of {MAX_STATES}")]
    TooLarge(u64),
    #[error("conditioning event has probability zero")]
    ZeroEvidence,
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("variable `{0}` has no instance `{1}`")]
    UnknownInstance(String, String),
}

/// The full joint distribution of a belief network, enumerated explicitly.
///
/// Entries are stored in mixed-radix order over the variables sorted by
/// name (first variable most significant), so iteration order — and
/// therefore every floating-point sum — is identical from run to run.
#[derive(Debug, Clone, PartialEq)]
pub struct JointTable {
    variables: Vec<Variable>,
    entries: Vec<f64>,
}

impl JointTable {
    /// Variables in table order (sorted by name).
    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.entries.iter().sum()
    }

    /// Decode entry `index` into per-variable instance indices.
    pub fn decode(&self, mut index: usize) -> Vec<usize> {
        let mut digits = vec![0usize; self.variables.len()];
        for (slot, var) in self.variables.iter().enumerate().rev() {
            let radix = var.instances.len();
            digits[slot] = index % radix;
            index /= radix;
        }
        digits
    }

    /// Probability of one full assignment, by variable name.
    pub fn probability(&self, assignment: &BTreeMap<String, String>) -> Result<f64, OracleError> {
        let mut index = 0usize;
        for var in &self.variables {
            let label = assignment
                .get(&var.name)
                .ok_or_else(|| OracleError::UnknownVariable(var.name.clone()))?;
            let pos = var
                .index_of(label)
                .ok_or_else(|| OracleError::UnknownInstance(var.name.clone(), label.clone()))?;
            index = index * var.instances.len() + pos;
        }
        Ok(self.entries[index])
    }

    /// Iterate `(instance indices, probability)` in entry order.
    pub fn iter(&self) -> impl Iterator<Item = (Vec<usize>, f64)> + '_ {
        self.entries
            .iter()
            .enumerate()
            .map(|(i, &p)| (self.decode(i), p))
    }

    fn slot_of(&self, name: &str) -> Result<usize, OracleError> {
        self.variables
            .iter()
            .position(|v| v.name == name)
            .ok_or_else(|| OracleError::UnknownVariable(name.to_string()))
    }

    /// Marginal distribution of one variable.
    pub fn marginal(&self, name: &str) -> Result<Vec<f64>, OracleError> {
        let slot = self.slot_of(name)?;
        let mut out = vec![0.0; self.variables[slot].instances.len()];
        for (digits, p) in self.iter() {
            out[digits[slot]] += p;
        }
        Ok(out)
    }
}

fn evidence_slots(
    table: &JointTable,
    evidence: &BTreeMap<String, String>,
) -> Result<Vec<(usize, usize)>, OracleError> {
    evidence
        .iter()
        .map(|(name, label)| {
            let slot = table.slot_of(name)?;
            let pos = table.variables[slot]
                .index_of(label)
                .ok_or_else(|| OracleError::UnknownInstance(name.clone(), label.clone()))?;
            Ok((slot, pos))
        })
        .collect()
}

/// Enumerate the full joint: each entry is the product of one table row
/// lookup per variable.
///
/// Rows are pre-indexed per variable in canonical parent order (parents
/// sorted by name, first parent most significant), so the hot loop is pure
/// index arithmetic.
pub fn joint_table(bn: &BeliefNetwork) -> Result<JointTable, OracleError> {
    let states = bn.state_count();
    if states > MAX_STATES {
        return Err(OracleError::TooLarge(states));
    }
    let variables: Vec<Variable> = bn.variables.values().cloned().collect();
    let slot_by_name: BTreeMap<&str, usize> = variables
        .iter()
        .enumerate()
        .map(|(i, v)| (v.name.as_str(), i))
        .collect();

    // Per variable: parent slots in canonical (sorted-name) order and the
    // rows flattened in the same mixed-radix order `config_space` uses.
    let mut parent_slots: Vec<Vec<usize>> = Vec::with_capacity(variables.len());
    let mut flat_rows: Vec<Vec<&[f64]>> = Vec::with_capacity(variables.len());
    for var in &variables {
        let cpt = bn
            .cpt(&var.name)
            .ok_or_else(|| OracleError::UnknownVariable(var.name.clone()))?;
        let slots: Vec<usize> = cpt
            .parents
            .iter()
            .map(|p| {
                slot_by_name
                    .get(p.as_str())
                    .copied()
                    .ok_or_else(|| OracleError::UnknownVariable(p.clone()))
            })
            .collect::<Result<_, _>>()?;
        let parent_vars: Vec<&Variable> = slots.iter().map(|&s| &variables[s]).collect();
        let rows: Vec<&[f64]> = crate::model::config_space(&parent_vars)
            .iter()
            .map(|cfg| {
                cpt.row(cfg)
                    .ok_or_else(|| OracleError::UnknownVariable(var.name.clone()))
            })
            .collect::<Result<_, _>>()?;
        parent_slots.push(slots);
        flat_rows.push(rows);
    }

    let mut entries = Vec::with_capacity(states as usize);
    let mut digits = vec![0usize; variables.len()];
    loop {
        let mut p = 1.0;
        for slot in 0..variables.len() {
            let mut row_index = 0usize;
            for &ps in &parent_slots[slot] {
                row_index = row_index * variables[ps].instances.len() + digits[ps];
            }
            p *= flat_rows[slot][row_index][digits[slot]];
        }
        entries.push(p);

        // Mixed-radix increment, last variable fastest.
        let mut slot = variables.len();
        loop {
            if slot == 0 {
                return Ok(JointTable { variables, entries });
            }
            slot -= 1;
            digits[slot] += 1;
            if digits[slot] < variables[slot].instances.len() {
                break;
            }
            digits[slot] = 0;
        }
    }
}

/// Normalized conditional distribution of `target` given the evidence.
pub fn query(
    bn: &BeliefNetwork,
    evidence: &BTreeMap<String, String>,
    target: &str,
) -> Result<Vec<f64>, OracleError> {
    let table = joint_table(bn)?;
    query_table(&table, evidence, target)
}

/// Same as [`query`], against an already-enumerated joint.
pub fn query_table(
    table: &JointTable,
    evidence: &BTreeMap<String, String>,
    target: &str,
) -> Result<Vec<f64>, OracleError> {
    let target_slot = table.slot_of(target)?;
    let fixed = evidence_slots(table, evidence)?;
    let mut buckets = vec![0.0; table.variables[target_slot].instances.len()];
    for (digits, p) in table.iter() {
        if fixed.iter().all(|&(slot, pos)| digits[slot] == pos) {
            buckets[digits[target_slot]] += p;
        }
    }
    let total: f64 = buckets.iter().sum();
    if total <= 0.0 {
        return Err(OracleError::ZeroEvidence);
    }
    Ok(buckets.iter().map(|b| b / total).collect())
}

/// Numerical conditional independence: true iff for every configuration of
/// `given` and every instance pair, |p(x,y|Z) − p(x|Z)·p(y|Z)| ≤ tol.
///
/// This is the numerical counterpart of d-separation; conditioning events
/// with probability zero are refused rather than skipped.
pub fn independent(
    bn: &BeliefNetwork,
    x: &str,
    y: &str,
    given: &BTreeSet<String>,
    tol: f64,
) -> Result<bool, OracleError> {
    let table = joint_table(bn)?;
    let x_slot = table.slot_of(x)?;
    let y_slot = table.slot_of(y)?;
    let given_slots: Vec<usize> = given
        .iter()
        .map(|g| table.slot_of(g))
        .collect::<Result<_, _>>()?;

    let x_card = table.variables[x_slot].instances.len();
    let y_card = table.variables[y_slot].instances.len();
    let z_card: usize = given_slots
        .iter()
        .map(|&s| table.variables[s].instances.len())
        .product();

    // One pass over the joint, bucketing by (z-config, x, y).
    let mut joint_xy = vec![0.0; z_card * x_card * y_card];
    let mut z_mass = vec![0.0; z_card];
    for (digits, p) in table.iter() {
        let mut z_index = 0usize;
        for &s in &given_slots {
            z_index = z_index * table.variables[s].instances.len() + digits[s];
        }
        z_mass[z_index] += p;
        joint_xy[(z_index * x_card + digits[x_slot]) * y_card + digits[y_slot]] += p;
    }

    for z_index in 0..z_card {
        let mass = z_mass[z_index];
        if mass <= 0.0 {
            return Err(OracleError::ZeroEvidence);
        }
        for xi in 0..x_card {
            for yi in 0..y_card {
                let p_xy = joint_xy[(z_index * x_card + xi) * y_card + yi] / mass;
                let p_x: f64 = (0..y_card)
                    .map(|k| joint_xy[(z_index * x_card + xi) * y_card + k])
                    .sum::<f64>()
                    / mass;
                let p_y: f64 = (0..x_card)
                    .map(|k| joint_xy[(z_index * x_card + k) * y_card + yi])
                    .sum::<f64>()
                    / mass;
                if (p_xy - p_x * p_y).abs() > tol {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}
