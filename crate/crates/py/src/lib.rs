//! Python bindings: the main network types and operations, driven
//! in-process. Values are immutable once constructed, mirroring the Rust
//! API; every operation returns plain Python data (lists, dicts, tuples)
//! or another wrapped network.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use simnet_core::document::{self, NetworkDocument};
use simnet_core::model::{ParentConfig, Severity, ValidationReport, ABSENT, PRESENT};
use simnet_core::{causal, graphs, oracle, simnet, transform};

fn err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// (severity, code, message, location) per finding.
fn findings(report: &ValidationReport) -> Vec<(String, String, String, String)> {
    report
        .findings
        .iter()
        .map(|f| {
            let severity = match f.severity {
                Severity::Error => "error",
                Severity::Warning => "warning",
            };
            (
                severity.to_string(),
                f.code.clone(),
                f.message.clone(),
                f.location.clone(),
            )
        })
        .collect()
}

/// The added-independence report as plain tuples:
/// (fault_a, fault_b, [manifestations treated as independent]).
type AddedAssertions = Vec<(String, String, Vec<String>)>;

/// One gate of a manifestation's provenance:
/// (context configuration, leak, singles aligned with the fault parents).
type GateRow = (HashMap<String, String>, f64, Vec<f64>);

/// One table row: (parent configuration, probabilities over the owner's
/// instances).
type CptRow = (HashMap<String, String>, Vec<f64>);

fn evidence_map(evidence: HashMap<String, String>) -> BTreeMap<String, String> {
    evidence.into_iter().collect()
}

fn present_config(faults: &[String], present: &[String]) -> ParentConfig {
    let mut cfg = ParentConfig::empty();
    for fault in faults {
        let state = if present.iter().any(|p| p == fault) {
            PRESENT
        } else {
            ABSENT
        };
        cfg.set(fault.clone(), state);
    }
    cfg
}

/// A directed acyclic network of discrete variables with one conditional
/// probability table per node.
#[pyclass(frozen)]
struct BeliefNetwork {
    inner: simnet_core::BeliefNetwork,
}

#[pymethods]
impl BeliefNetwork {
    /// Parse a `.bn.json` document.
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        match document::parse_document(text).map_err(err)? {
            NetworkDocument::BeliefNetwork(inner) => Ok(BeliefNetwork { inner }),
            other => Err(err(format!(
                "expected a belief-network document, got {}",
                other.kind()
            ))),
        }
    }

    fn to_json(&self) -> String {
        document::serialize_document(&NetworkDocument::BeliefNetwork(self.inner.clone()))
    }

    fn variables(&self) -> Vec<String> {
        self.inner.variables.keys().cloned().collect()
    }

    fn instances(&self, variable: &str) -> PyResult<Vec<String>> {
        self.inner
            .variable(variable)
            .map(|v| v.instances.clone())
            .ok_or_else(|| err(format!("unknown variable `{variable}`")))
    }

    fn arcs(&self) -> Vec<(String, String)> {
        self.inner.arcs.iter().cloned().collect()
    }

    /// Structural validation; returns (severity, code, message, location)
    /// tuples, empty when the network is well formed.
    fn validate(&self) -> Vec<(String, String, String, String)> {
        findings(&simnet_core::validate_network(&self.inner))
    }

    /// Exact conditional distribution of `target` given the evidence.
    fn query(&self, evidence: HashMap<String, String>, target: &str) -> PyResult<Vec<f64>> {
        oracle::query(&self.inner, &evidence_map(evidence), target).map_err(err)
    }

    #[pyo3(signature = (x, y, given = Vec::new()))]
    fn d_separated(&self, x: Vec<String>, y: Vec<String>, given: Vec<String>) -> PyResult<bool> {
        graphs::d_separated(
            &self.inner,
            &x.into_iter().collect(),
            &y.into_iter().collect(),
            &given.into_iter().collect(),
        )
        .map_err(err)
    }

    /// Numerical conditional independence under full enumeration.
    #[pyo3(signature = (x, y, given = Vec::new(), tol = 1e-9))]
    fn independent(&self, x: &str, y: &str, given: Vec<String>, tol: f64) -> PyResult<bool> {
        let given: BTreeSet<String> = given.into_iter().collect();
        oracle::independent(&self.inner, x, y, &given, tol).map_err(err)
    }

    fn topological_order(&self) -> PyResult<Vec<String>> {
        graphs::topological_order(&graphs::DiGraph::from(&self.inner)).map_err(err)
    }

    #[pyo3(signature = (distinguished = None))]
    fn to_dot(&self, distinguished: Option<&str>) -> String {
        document::export_dot(&self.inner, distinguished, &[])
    }

    fn __repr__(&self) -> String {
        format!(
            "BeliefNetwork({} variables, {} arcs)",
            self.inner.variables.len(),
            self.inner.arcs.len()
        )
    }
}

/// A distinguished fault variable, a similarity (hyper)graph over its
/// instances, and one local belief network per (hyper)edge.
#[pyclass(frozen)]
struct SimilarityNetwork {
    inner: simnet_core::SimilarityNetwork,
}

#[pymethods]
impl SimilarityNetwork {
    /// Parse a `.simnet.json` document.
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        match document::parse_document(text).map_err(err)? {
            NetworkDocument::SimilarityNetwork(inner) => Ok(SimilarityNetwork { inner }),
            other => Err(err(format!(
                "expected a similarity-network document, got {}",
                other.kind()
            ))),
        }
    }

    fn to_json(&self) -> String {
        document::serialize_document(&NetworkDocument::SimilarityNetwork(self.inner.clone()))
    }

    fn distinguished(&self) -> String {
        self.inner.distinguished_name().to_string()
    }

    fn faults(&self) -> Vec<String> {
        self.inner.distinguished.instances.clone()
    }

    fn edges(&self) -> Vec<Vec<String>> {
        self.inner
            .graph
            .edge_sets()
            .into_iter()
            .map(|e| e.into_iter().collect())
            .collect()
    }

    fn validate(&self) -> Vec<(String, String, String, String)> {
        findings(&simnet::validate_similarity_network(&self.inner))
    }

    /// Construct the global belief network by graph union with the
    /// equality-propagated probability fill.
    fn build_global(&self) -> PyResult<BeliefNetwork> {
        simnet::build_global(&self.inner)
            .map(|inner| BeliefNetwork { inner })
            .map_err(err)
    }

    /// Validate, build the global network, and report the soundness
    /// conditions (cycles, connectivity, strict positivity).
    fn check_soundness(&self) -> PyResult<Vec<(String, String, String, String)>> {
        let global = simnet::build_global(&self.inner).map_err(err)?;
        Ok(findings(&simnet::check_soundness(&self.inner, &global)))
    }

    /// Every (feature, fault subset) equality assertion the network encodes
    /// through node omission.
    fn extract_subset_independence(&self) -> Vec<(String, Vec<String>)> {
        simnet::extract_subset_independence(&self.inner)
            .into_iter()
            .map(|a| (a.feature, a.subset.into_iter().collect()))
            .collect()
    }

    /// Check one assertion against a network with the exact-inference
    /// oracle.
    #[pyo3(signature = (network, feature, subset, tol = 1e-9))]
    fn verify_subset_independence(
        &self,
        network: &BeliefNetwork,
        feature: &str,
        subset: Vec<String>,
        tol: f64,
    ) -> PyResult<bool> {
        let assertion = simnet::SubsetIndependenceAssertion {
            feature: feature.to_string(),
            subset: subset.into_iter().collect(),
        };
        simnet::verify_subset_independence(
            &network.inner,
            self.inner.distinguished_name(),
            &assertion,
            tol,
        )
        .map_err(err)
    }

    /// Restructure into a star-topology similarity network centered on
    /// `normal`.
    #[pyo3(signature = (normal = "NORMAL", tolerance = 1e-9))]
    fn star_restructure(&self, normal: &str, tolerance: f64) -> PyResult<SimilarityNetwork> {
        let global = simnet::build_global(&self.inner).map_err(err)?;
        transform::star_restructure(&global, self.inner.distinguished_name(), normal, tolerance)
            .map(|inner| SimilarityNetwork { inner })
            .map_err(err)
    }

    /// Transform into a multiple-fault belief network. Returns the network
    /// and the added-independence report as (fault_a, fault_b,
    /// [manifestations]) tuples.
    #[pyo3(signature = (priors, normal = "NORMAL", tolerance = 1e-9))]
    fn transform(
        &self,
        priors: HashMap<String, f64>,
        normal: &str,
        tolerance: f64,
    ) -> PyResult<(MultiFaultNetwork, AddedAssertions)> {
        let opts = transform::TransformOptions {
            normal: normal.to_string(),
            tolerance,
            fault_deps: None,
        };
        let priors: BTreeMap<String, f64> = priors.into_iter().collect();
        let (mfn, report) =
            transform::transform_similarity(&self.inner, &priors, &opts).map_err(err)?;
        Ok((MultiFaultNetwork { inner: mfn }, added_tuples(report)))
    }

    fn __repr__(&self) -> String {
        format!(
            "SimilarityNetwork({} faults, {} locals)",
            self.inner.distinguished.instances.len(),
            self.inner.locals.len()
        )
    }
}

fn added_tuples(report: transform::TransformReport) -> AddedAssertions {
    report
        .added_independence
        .into_iter()
        .map(|a| (a.faults.0, a.faults.1, a.manifestations))
        .collect()
}

/// A belief network for multiple coexisting faults, with the noisy-OR
/// provenance of every synthesized manifestation table.
#[pyclass(frozen)]
struct MultiFaultNetwork {
    inner: transform::MultiFaultNetwork,
}

#[pymethods]
impl MultiFaultNetwork {
    /// Parse a `.mfbn.json` document.
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        match document::parse_document(text).map_err(err)? {
            NetworkDocument::MultiFaultNetwork(inner) => Ok(MultiFaultNetwork { inner }),
            other => Err(err(format!(
                "expected a multi-fault-network document, got {}",
                other.kind()
            ))),
        }
    }

    fn to_json(&self) -> String {
        document::serialize_document(&NetworkDocument::MultiFaultNetwork(self.inner.clone()))
    }

    fn network(&self) -> BeliefNetwork {
        BeliefNetwork {
            inner: self.inner.network.clone(),
        }
    }

    fn fault_nodes(&self) -> Vec<String> {
        self.inner.fault_nodes.clone()
    }

    fn manifest_nodes(&self) -> Vec<String> {
        self.inner.manifest_nodes.clone()
    }

    fn priors(&self) -> HashMap<String, f64> {
        self.inner.priors.clone().into_iter().collect()
    }

    /// The (leak, singles-by-fault) gates behind one manifestation, keyed
    /// by context configuration.
    fn gate(&self, manifestation: &str) -> PyResult<Vec<GateRow>> {
        let prov = self
            .inner
            .provenance
            .get(manifestation)
            .ok_or_else(|| err(format!("no synthesized gate for `{manifestation}`")))?;
        Ok(prov
            .gates
            .iter()
            .map(|(cfg, spec)| {
                let given: HashMap<String, String> =
                    cfg.assignments().clone().into_iter().collect();
                (given, spec.leak, spec.singles.clone())
            })
            .collect())
    }

    fn query(&self, evidence: HashMap<String, String>, target: &str) -> PyResult<Vec<f64>> {
        oracle::query(&self.inner.network, &evidence_map(evidence), target).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!(
            "MultiFaultNetwork({} faults, {} manifestations)",
            self.inner.fault_nodes.len(),
            self.inner.manifest_nodes.len()
        )
    }
}

/// Leak plus per-fault assessments for one binary manifestation.
#[pyclass(frozen)]
struct NoisyOrSpec {
    inner: causal::NoisyOrSpec,
}

#[pymethods]
impl NoisyOrSpec {
    #[new]
    fn new(
        manifestation: &str,
        faults: Vec<String>,
        leak: f64,
        singles: Vec<f64>,
    ) -> PyResult<Self> {
        causal::NoisyOrSpec::from_singles(manifestation, faults, leak, singles)
            .map(|inner| NoisyOrSpec { inner })
            .map_err(err)
    }

    #[staticmethod]
    fn from_powers(
        manifestation: &str,
        faults: Vec<String>,
        leak: f64,
        powers: Vec<f64>,
    ) -> PyResult<Self> {
        causal::NoisyOrSpec::from_powers(manifestation, faults, leak, powers)
            .map(|inner| NoisyOrSpec { inner })
            .map_err(err)
    }

    #[getter]
    fn leak(&self) -> f64 {
        self.inner.leak
    }

    #[getter]
    fn singles(&self) -> Vec<f64> {
        self.inner.singles.clone()
    }

    #[getter]
    fn powers(&self) -> Vec<f64> {
        self.inner.powers.clone()
    }

    #[getter]
    fn faults(&self) -> Vec<String> {
        self.inner.faults.clone()
    }

    /// p(manifestation present | exactly these faults present), on the
    /// causal-power route.
    fn present_probability(&self, present: Vec<String>) -> PyResult<f64> {
        let cfg = present_config(&self.inner.faults, &present);
        self.inner.present_probability(&cfg).map_err(err)
    }

    fn absent_probability(&self, present: Vec<String>) -> PyResult<f64> {
        let cfg = present_config(&self.inner.faults, &present);
        self.inner.absent_probability(&cfg).map_err(err)
    }

    /// The same probability on the independent singles route.
    fn present_from_singles(&self, present: Vec<String>) -> PyResult<f64> {
        let cfg = present_config(&self.inner.faults, &present);
        self.inner.present_from_singles(&cfg).map_err(err)
    }

    /// The full table: one (fault-configuration, [p_absent, p_present]) row
    /// per configuration, 2^n in total.
    fn synthesize_cpt(&self) -> PyResult<Vec<CptRow>> {
        let cpt = causal::synthesize_cpt(&self.inner).map_err(err)?;
        Ok(cpt
            .rows
            .into_iter()
            .map(|(cfg, row)| (cfg.assignments().clone().into_iter().collect(), row))
            .collect())
    }

    /// Expand into the atemporal network with explicit cause nodes and a
    /// deterministic OR.
    fn expand_atemporal(&self) -> BeliefNetwork {
        BeliefNetwork {
            inner: causal::expand_atemporal(&self.inner),
        }
    }

    fn __repr__(&self) -> String {
        format!(
            "NoisyOrSpec({} -> {}, leak {})",
            self.inner.faults.join(", "),
            self.inner.manifestation,
            self.inner.leak
        )
    }
}

/// Causal power from a single-fault assessment.
#[pyfunction]
fn power_from_single(leak: f64, single: f64) -> PyResult<f64> {
    causal::power_from_single(leak, single).map_err(err)
}

/// Single-fault assessment implied by a causal power.
#[pyfunction]
fn single_from_power(leak: f64, power: f64) -> f64 {
    causal::single_from_power(leak, power)
}

/// Transform a plain single-fault belief network (no similarity network
/// required) into a multiple-fault belief network.
#[pyfunction]
#[pyo3(signature = (network, fault_var, priors, normal = "NORMAL", tolerance = 1e-9))]
fn transform_global(
    network: &BeliefNetwork,
    fault_var: &str,
    priors: HashMap<String, f64>,
    normal: &str,
    tolerance: f64,
) -> PyResult<(MultiFaultNetwork, AddedAssertions)> {
    let opts = transform::TransformOptions {
        normal: normal.to_string(),
        tolerance,
        fault_deps: None,
    };
    let priors: BTreeMap<String, f64> = priors.into_iter().collect();
    let (mfn, report) =
        transform::transform_global(&network.inner, fault_var, &priors, &opts).map_err(err)?;
    Ok((MultiFaultNetwork { inner: mfn }, added_tuples(report)))
}

#[pymodule]
fn simnet_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<BeliefNetwork>()?;
    m.add_class::<SimilarityNetwork>()?;
    m.add_class::<MultiFaultNetwork>()?;
    m.add_class::<NoisyOrSpec>()?;
    m.add_function(wrap_pyfunction!(power_from_single, m)?)?;
    m.add_function(wrap_pyfunction!(single_from_power, m)?)?;
    m.add_function(wrap_pyfunction!(transform_global, m)?)?;
    Ok(())
}
