//! Noisy-OR causal independence: the temporal product formulas, table
//! synthesis from single-fault assessments, and the atemporal network
//! expansion with explicit cause nodes.
//!
//! Terminology: the *leak* is the probability that the manifestation is
//! present when every fault is absent; the *causal power* of a fault is the
//! probability that the fault, acting alone, produces the manifestation in
//! a patient who lacks it; a *single* is the assessed probability that the
//! manifestation is present when exactly that fault is present.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{config_space, BeliefNetwork, Cpt, ParentConfig, Variable, ABSENT, PRESENT};

/// Consistency tolerance between the singles route and the powers route.
pub const CONSISTENCY_TOL: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum CausalError {
    #[error("leak probability {leak} leaves no room for causes (1 - leak < {CONSISTENCY_TOL:e})")]
    DegenerateLeak { leak: f64 },
    #[error("single-fault assessment {single} for `{fault}` is below the leak {leak}: causal power would be negative")]
    NegativeCausalPower {
        fault: String,
        single: f64,
        leak: f64,
    },
    #[error("probability {value} for `{what}` outside [0, 1]")]
    InvalidProbability { what: String, value: f64 },
    #[error("{found} assessments supplied for {expected} faults")]
    LengthMismatch { expected: usize, found: usize },
    #[error("fault list repeats `{0}`")]
    DuplicateFault(String),
    #[error("singles and powers disagree on `{fault}`: {single} vs {implied} implied")]
    InconsistentRoutes {
        fault: String,
        single: f64,
        implied: f64,
    },
    #[error("configuration does not cover exactly the faults of the gate")]
    ConfigMismatch,
    #[error("no gate parameters for context configuration {0:?}")]
    MissingContextGate(String),
}

fn check_probability(what: &str, value: f64) -> Result<(), CausalError> {
    if !(0.0..=1.0).contains(&value) || !value.is_finite() {
        return Err(CausalError::InvalidProbability {
            what: what.to_string(),
            value,
        });
    }
    Ok(())
}

/// Causal power of one fault from its single-fault assessment:
/// `p = 1 - (1 - single) / (1 - leak)`.
///
/// Substituting back reproduces the single exactly, which is the round-trip
/// the tests pin down. A single below the leak signals inconsistent
/// elicitation and is an error — except within [`CONSISTENCY_TOL`], where
/// the difference is derivation noise and the power is exactly zero.
pub fn power_from_single(leak: f64, single: f64) -> Result<f64, CausalError> {
    check_probability("leak", leak)?;
    check_probability("single", single)?;
    if 1.0 - leak < CONSISTENCY_TOL {
        return Err(CausalError::DegenerateLeak { leak });
    }
    if single < leak {
        if leak - single <= CONSISTENCY_TOL {
            return Ok(0.0);
        }
        return Err(CausalError::NegativeCausalPower {
            fault: String::new(),
            single,
            leak,
        });
    }
    Ok(1.0 - (1.0 - single) / (1.0 - leak))
}

/// Inverse of [`power_from_single`]: the single-fault assessment implied by
/// a causal power.
pub fn single_from_power(leak: f64, power: f64) -> f64 {
    1.0 - (1.0 - leak) * (1.0 - power)
}

/// Leak plus per-fault causal powers / single-fault assessments for one
/// binary manifestation. Both parameterizations are kept and are consistent
/// by construction; deserialized specs are re-checked by [`NoisyOrSpec::validate`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoisyOrSpec {
    pub manifestation: String,
    /// Binary fault variable names, in assessment order.
    pub faults: Vec<String>,
    /// p(manifestation present | all faults absent).
    pub leak: f64,
    /// p(manifestation present | only fault i present), aligned with `faults`.
    pub singles: Vec<f64>,
    /// Causal power of fault i, aligned with `faults`.
    pub powers: Vec<f64>,
}

impl NoisyOrSpec {
    pub fn from_singles(
        manifestation: impl Into<String>,
        faults: impl IntoIterator<Item = impl Into<String>>,
        leak: f64,
        singles: Vec<f64>,
    ) -> Result<Self, CausalError> {
        let manifestation = manifestation.into();
        let faults = collect_faults(faults)?;
        if singles.len() != faults.len() {
            return Err(CausalError::LengthMismatch {
                expected: faults.len(),
                found: singles.len(),
            });
        }
        let powers = faults
            .iter()
            .zip(&singles)
            .map(|(fault, &s)| {
                power_from_single(leak, s).map_err(|e| match e {
                    CausalError::NegativeCausalPower { single, leak, .. } => {
                        CausalError::NegativeCausalPower {
                            fault: fault.clone(),
                            single,
                            leak,
                        }
                    }
                    other => other,
                })
            })
            .collect::<Result<Vec<f64>, _>>()?;
        Ok(NoisyOrSpec {
            manifestation,
            faults,
            leak,
            singles,
            powers,
        })
    }

    pub fn from_powers(
        manifestation: impl Into<String>,
        faults: impl IntoIterator<Item = impl Into<String>>,
        leak: f64,
        powers: Vec<f64>,
    ) -> Result<Self, CausalError> {
        let manifestation = manifestation.into();
        let faults = collect_faults(faults)?;
        check_probability("leak", leak)?;
        if 1.0 - leak < CONSISTENCY_TOL {
            return Err(CausalError::DegenerateLeak { leak });
        }
        if powers.len() != faults.len() {
            return Err(CausalError::LengthMismatch {
                expected: faults.len(),
                found: powers.len(),
            });
        }
        for &p in &powers {
            check_probability("power", p)?;
        }
        let singles = powers.iter().map(|&p| single_from_power(leak, p)).collect();
        Ok(NoisyOrSpec {
            manifestation,
            faults,
            leak,
            singles,
            powers,
        })
    }

    /// Re-check the invariants on a spec that was built field-by-field
    /// (e.g. deserialized): probability ranges and agreement between the
    /// singles and the powers within [`CONSISTENCY_TOL`].
    pub fn validate(&self) -> Result<(), CausalError> {
        check_probability("leak", self.leak)?;
        if 1.0 - self.leak < CONSISTENCY_TOL {
            return Err(CausalError::DegenerateLeak { leak: self.leak });
        }
        if self.singles.len() != self.faults.len() || self.powers.len() != self.faults.len() {
            return Err(CausalError::LengthMismatch {
                expected: self.faults.len(),
                found: self.singles.len().max(self.powers.len()),
            });
        }
        let mut seen = std::collections::BTreeSet::new();
        for f in &self.faults {
            if !seen.insert(f) {
                return Err(CausalError::DuplicateFault(f.clone()));
            }
        }
        for (i, fault) in self.faults.iter().enumerate() {
            check_probability("single", self.singles[i])?;
            check_probability("power", self.powers[i])?;
            if self.singles[i] < self.leak - CONSISTENCY_TOL {
                return Err(CausalError::NegativeCausalPower {
                    fault: fault.clone(),
                    single: self.singles[i],
                    leak: self.leak,
                });
            }
            let implied = single_from_power(self.leak, self.powers[i]);
            if (implied - self.singles[i]).abs() > CONSISTENCY_TOL {
                return Err(CausalError::InconsistentRoutes {
                    fault: fault.clone(),
                    single: self.singles[i],
                    implied,
                });
            }
        }
        Ok(())
    }

    /// Indices of faults set to `present` in the configuration.
    fn present_indices(&self, config: &ParentConfig) -> Result<Vec<usize>, CausalError> {
        if !config.is_total_over(self.faults.iter().map(String::as_str)) {
            return Err(CausalError::ConfigMismatch);
        }
        Ok(self
            .faults
            .iter()
            .enumerate()
            .filter(|(_, f)| config.get(f) == Some(PRESENT))
            .map(|(i, _)| i)
            .collect())
    }

    /// Probability the manifestation is absent under the configuration:
    /// `(1 - leak) * Π over present faults of (1 - power)`.
    pub fn absent_probability(&self, config: &ParentConfig) -> Result<f64, CausalError> {
        let present = self.present_indices(config)?;
        let mut p = 1.0 - self.leak;
        for i in present {
            p *= 1.0 - self.powers[i];
        }
        Ok(p)
    }

    /// Complement of [`Self::absent_probability`]. The all-absent case
    /// returns the leak itself so the identity is exact, not within an ulp.
    pub fn present_probability(&self, config: &ParentConfig) -> Result<f64, CausalError> {
        let present = self.present_indices(config)?;
        if present.is_empty() {
            return Ok(self.leak);
        }
        let mut absent = 1.0 - self.leak;
        for i in present {
            absent *= 1.0 - self.powers[i];
        }
        Ok(1.0 - absent)
    }

    /// The same probability computed on the singles route, without going
    /// through causal powers:
    /// `1 - (1 - leak) * Π over present faults of (1 - single) / (1 - leak)`.
    ///
    /// Kept as an independent algebraic route; agreement with
    /// [`Self::present_probability`] is a tested invariant, not an
    /// implementation shortcut.
    pub fn present_from_singles(&self, config: &ParentConfig) -> Result<f64, CausalError> {
        let present = self.present_indices(config)?;
        if 1.0 - self.leak < CONSISTENCY_TOL {
            return Err(CausalError::DegenerateLeak { leak: self.leak });
        }
        if present.is_empty() {
            return Ok(self.leak);
        }
        if present.len() == 1 {
            // One present fault: the assessment itself, exactly.
            return Ok(self.singles[present[0]]);
        }
        let mut product = 1.0 - self.leak;
        for i in present {
            if self.singles[i] < self.leak - CONSISTENCY_TOL {
                return Err(CausalError::NegativeCausalPower {
                    fault: self.faults[i].clone(),
                    single: self.singles[i],
                    leak: self.leak,
                });
            }
            // Noise-level shortfalls act as a powerless cause.
            let single = self.singles[i].max(self.leak);
            product *= (1.0 - single) / (1.0 - self.leak);
        }
        Ok(1.0 - product)
    }
}

fn collect_faults(
    faults: impl IntoIterator<Item = impl Into<String>>,
) -> Result<Vec<String>, CausalError> {
    let faults: Vec<String> = faults.into_iter().map(Into::into).collect();
    let mut seen = std::collections::BTreeSet::new();
    for f in &faults {
        if !seen.insert(f.clone()) {
            return Err(CausalError::DuplicateFault(f.clone()));
        }
    }
    Ok(faults)
}

/// Synthesize the manifestation's full table over its binary fault parents:
/// one row per fault configuration (2^n rows for n faults), each computed
/// on the singles route.
pub fn synthesize_cpt(spec: &NoisyOrSpec) -> Result<Cpt, CausalError> {
    let fault_vars: Vec<Variable> = spec.faults.iter().map(Variable::binary).collect();
    let refs: Vec<&Variable> = fault_vars.iter().collect();
    let mut cpt = Cpt::new(spec.manifestation.clone(), spec.faults.clone());
    for cfg in config_space(&refs) {
        let p = spec.present_from_singles(&cfg)?;
        cpt.insert_row(cfg, vec![1.0 - p, p]);
    }
    Ok(cpt)
}

/// Synthesize a table for a manifestation that also has nondistinguished
/// (context) parents: one `(leak, singles)` bundle per context
/// configuration, the gate applied independently within each.
///
/// Every gate must name the same faults; `gates` must cover the full
/// context configuration space.
pub fn synthesize_cpt_with_context(
    context: &[Variable],
    gates: &BTreeMap<ParentConfig, NoisyOrSpec>,
) -> Result<Cpt, CausalError> {
    let mut iter = gates.values();
    let first = iter.next().ok_or(CausalError::ConfigMismatch)?;
    for gate in iter {
        if gate.faults != first.faults || gate.manifestation != first.manifestation {
            return Err(CausalError::ConfigMismatch);
        }
    }
    if context.is_empty() {
        return synthesize_cpt(first);
    }

    let fault_vars: Vec<Variable> = first.faults.iter().map(Variable::binary).collect();
    let mut parent_vars: Vec<&Variable> = fault_vars.iter().collect();
    parent_vars.extend(context.iter());

    let mut parents: Vec<String> = first.faults.clone();
    parents.extend(context.iter().map(|v| v.name.clone()));
    let mut cpt = Cpt::new(first.manifestation.clone(), parents);

    let context_names: Vec<&str> = context.iter().map(|v| v.name.as_str()).collect();
    let fault_names: Vec<&str> = first.faults.iter().map(String::as_str).collect();
    for cfg in config_space(&parent_vars) {
        let ctx_cfg = cfg.restrict(context_names.iter().copied());
        let gate = gates.get(&ctx_cfg).ok_or_else(|| {
            CausalError::MissingContextGate(format!("{:?}", ctx_cfg.assignments()))
        })?;
        let fault_cfg = cfg.restrict(fault_names.iter().copied());
        let p = gate.present_from_singles(&fault_cfg)?;
        cpt.insert_row(cfg, vec![1.0 - p, p]);
    }
    Ok(cpt)
}

/// Name of the intermediate cause node for one fault.
///
/// The double underscores keep generated names collision-free and
/// mechanically reversible.
pub fn cause_node_name(fault: &str, manifestation: &str) -> String {
    format!("{fault}__causes__{manifestation}")
}

/// Name of the leak's cause node (the event that produces the manifestation
/// with every fault absent).
pub fn leak_node_name(manifestation: &str) -> String {
    format!("leak__causes__{manifestation}")
}

/// Expand the gate into its atemporal network:
///
/// * one binary root per fault (uniform placeholder prior — every check
///   against this network conditions on a full fault configuration),
/// * one cause node per fault, present with the fault's causal power when
///   the fault is present and never otherwise,
/// * a parentless leak cause node,
/// * the manifestation as a deterministic OR of all cause nodes.
///
/// No arcs run between cause nodes: that absence is the causal-independence
/// assertion itself.
pub fn expand_atemporal(spec: &NoisyOrSpec) -> BeliefNetwork {
    let mut bn = BeliefNetwork::new();
    let mut cause_nodes: Vec<String> = Vec::new();

    for (i, fault) in spec.faults.iter().enumerate() {
        bn.add_variable(Variable::binary(fault));
        bn.set_cpt(Cpt::root(fault, vec![0.5, 0.5]));

        let cause = cause_node_name(fault, &spec.manifestation);
        bn.add_variable(Variable::binary(&cause));
        bn.add_arc(fault, &cause);
        let mut cpt = Cpt::new(&cause, [fault.clone()]);
        cpt.insert_row(
            ParentConfig::new([(fault.clone(), ABSENT.to_string())]),
            vec![1.0, 0.0],
        );
        cpt.insert_row(
            ParentConfig::new([(fault.clone(), PRESENT.to_string())]),
            vec![1.0 - spec.powers[i], spec.powers[i]],
        );
        bn.set_cpt(cpt);
        cause_nodes.push(cause);
    }

    let leak_node = leak_node_name(&spec.manifestation);
    bn.add_variable(Variable::binary(&leak_node));
    bn.set_cpt(Cpt::root(&leak_node, vec![1.0 - spec.leak, spec.leak]));
    cause_nodes.push(leak_node);

    bn.add_variable(Variable::binary(&spec.manifestation));
    for cause in &cause_nodes {
        bn.add_arc(cause.clone(), spec.manifestation.clone());
    }
    let cause_vars: Vec<&Variable> = {
        let mut v: Vec<&Variable> = cause_nodes
            .iter()
            .map(|c| bn.variable(c).unwrap())
            .collect();
        v.sort_by(|a, b| a.name.cmp(&b.name));
        v
    };
    let mut cpt = Cpt::new(&spec.manifestation, cause_nodes.clone());
    for cfg in config_space(&cause_vars) {
        let any_present = cause_nodes.iter().any(|c| cfg.get(c) == Some(PRESENT));
        let row = if any_present {
            vec![0.0, 1.0]
        } else {
            vec![1.0, 0.0]
        };
        cpt.insert_row(cfg, row);
    }
    bn.set_cpt(cpt);
    bn
}
