//! On-disk document formats: `.bn.json`, `.simnet.json`, and `.mfbn.json`.
//!
//! Documents are JSON with an explicit `format_version` and `kind`, laid
//! out for human diffing: every list is emitted in a canonical sort order,
//! so serialization is byte-deterministic and `parse(serialize(x)) == x`
//! for every valid in-memory value.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::causal::NoisyOrSpec;
use crate::graphs::{SimilarityGraph, SimilarityHypergraph, SimilarityStructure};
use crate::model::{BeliefNetwork, Cpt, ParentConfig, Variable};
use crate::simnet::{LocalBeliefNetwork, SimilarityNetwork};
use crate::transform::{MultiFaultNetwork, NoisyOrProvenance};

pub const FORMAT_VERSION: u64 = 1;

pub const KIND_BELIEF_NETWORK: &str = "belief-network";
pub const KIND_SIMILARITY_NETWORK: &str = "similarity-network";
pub const KIND_MULTI_FAULT_NETWORK: &str = "multi-fault-network";

#[derive(Debug, Error, PartialEq)]
pub enum DocumentError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("schema error: {0}")]
    Schema(String),
    #[error("unsupported format_version {found} (this tool reads version {FORMAT_VERSION})")]
    Version { found: u64 },
}

impl DocumentError {
    /// Machine-readable code for reports and exit-status mapping.
    pub fn code(&self) -> &'static str {
        match self {
            DocumentError::Parse { .. } => "parse-error",
            DocumentError::Schema(_) => "schema-error",
            DocumentError::Version { .. } => "version-error",
        }
    }
}

/// A parsed network document of any kind.
#[derive(Debug, Clone, PartialEq)]
pub enum NetworkDocument {
    BeliefNetwork(BeliefNetwork),
    SimilarityNetwork(SimilarityNetwork),
    MultiFaultNetwork(MultiFaultNetwork),
}

impl NetworkDocument {
    pub fn kind(&self) -> &'static str {
        match self {
            NetworkDocument::BeliefNetwork(_) => KIND_BELIEF_NETWORK,
            NetworkDocument::SimilarityNetwork(_) => KIND_SIMILARITY_NETWORK,
            NetworkDocument::MultiFaultNetwork(_) => KIND_MULTI_FAULT_NETWORK,
        }
    }
}

// ---------------------------------------------------------------------------
// Wire structs
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct RowDoc {
    given: BTreeMap<String, String>,
    p: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct CptDoc {
    owner: String,
    parents: Vec<String>,
    rows: Vec<RowDoc>,
}

#[derive(Serialize, Deserialize)]
struct BeliefNetworkBody {
    variables: Vec<Variable>,
    arcs: Vec<(String, String)>,
    cpts: Vec<CptDoc>,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "type")]
enum GraphDoc {
    #[serde(rename = "graph")]
    Graph {
        nodes: Vec<String>,
        edges: Vec<(String, String)>,
    },
    #[serde(rename = "hypergraph")]
    Hypergraph {
        nodes: Vec<String>,
        hyperedges: Vec<Vec<String>>,
    },
}

#[derive(Serialize, Deserialize)]
struct LocalDoc {
    edge: Vec<String>,
    network: BeliefNetworkBody,
}

#[derive(Serialize, Deserialize)]
struct SimilarityNetworkBody {
    distinguished: Variable,
    graph: GraphDoc,
    locals: Vec<LocalDoc>,
}

#[derive(Serialize, Deserialize)]
struct GateDoc {
    given: BTreeMap<String, String>,
    leak: f64,
    singles: Vec<f64>,
    powers: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct ProvenanceDoc {
    manifestation: String,
    faults: Vec<String>,
    context: Vec<String>,
    gates: Vec<GateDoc>,
}

#[derive(Serialize, Deserialize)]
struct MultiFaultBody {
    network: BeliefNetworkBody,
    fault_nodes: Vec<String>,
    manifest_nodes: Vec<String>,
    priors: BTreeMap<String, f64>,
    provenance: Vec<ProvenanceDoc>,
}

#[derive(Serialize)]
struct Envelope<T: Serialize> {
    format_version: u64,
    kind: &'static str,
    #[serde(flatten)]
    body: T,
}

// ---------------------------------------------------------------------------
// In-memory -> wire
// ---------------------------------------------------------------------------

fn config_to_map(cfg: &ParentConfig) -> BTreeMap<String, String> {
    cfg.assignments().clone()
}

fn bn_to_body(bn: &BeliefNetwork) -> BeliefNetworkBody {
    BeliefNetworkBody {
        variables: bn.variables.values().cloned().collect(),
        arcs: bn.arcs.iter().cloned().collect(),
        cpts: bn
            .cpts
            .values()
            .map(|cpt| CptDoc {
                owner: cpt.owner.clone(),
                parents: cpt.parents.clone(),
                rows: cpt
                    .rows
                    .iter()
                    .map(|(cfg, p)| RowDoc {
                        given: config_to_map(cfg),
                        p: p.clone(),
                    })
                    .collect(),
            })
            .collect(),
    }
}

fn simnet_to_body(s: &SimilarityNetwork) -> SimilarityNetworkBody {
    let graph = match &s.graph {
        SimilarityStructure::Graph(g) => GraphDoc::Graph {
            nodes: g.nodes.iter().cloned().collect(),
            edges: g.edges.iter().cloned().collect(),
        },
        SimilarityStructure::Hypergraph(h) => GraphDoc::Hypergraph {
            nodes: h.nodes.iter().cloned().collect(),
            hyperedges: h
                .hyperedges
                .iter()
                .map(|e| e.iter().cloned().collect())
                .collect(),
        },
    };
    SimilarityNetworkBody {
        distinguished: s.distinguished.clone(),
        graph,
        locals: s
            .locals
            .values()
            .map(|local| LocalDoc {
                edge: local.edge.iter().cloned().collect(),
                network: bn_to_body(&local.network),
            })
            .collect(),
    }
}

fn mfbn_to_body(m: &MultiFaultNetwork) -> MultiFaultBody {
    MultiFaultBody {
        network: bn_to_body(&m.network),
        fault_nodes: m.fault_nodes.clone(),
        manifest_nodes: m.manifest_nodes.clone(),
        priors: m.priors.clone(),
        provenance: m
            .provenance
            .iter()
            .map(|(manifestation, prov)| {
                let faults = prov
                    .gates
                    .values()
                    .next()
                    .map(|g| g.faults.clone())
                    .unwrap_or_default();
                ProvenanceDoc {
                    manifestation: manifestation.clone(),
                    faults,
                    context: prov.context.clone(),
                    gates: prov
                        .gates
                        .iter()
                        .map(|(cfg, spec)| GateDoc {
                            given: config_to_map(cfg),
                            leak: spec.leak,
                            singles: spec.singles.clone(),
                            powers: spec.powers.clone(),
                        })
                        .collect(),
                }
            })
            .collect(),
    }
}

/// Serialize any document kind to its canonical JSON text.
pub fn serialize_document(doc: &NetworkDocument) -> String {
    let text = match doc {
        NetworkDocument::BeliefNetwork(bn) => serde_json::to_string_pretty(&Envelope {
            format_version: FORMAT_VERSION,
            kind: KIND_BELIEF_NETWORK,
            body: bn_to_body(bn),
        }),
        NetworkDocument::SimilarityNetwork(s) => serde_json::to_string_pretty(&Envelope {
            format_version: FORMAT_VERSION,
            kind: KIND_SIMILARITY_NETWORK,
            body: simnet_to_body(s),
        }),
        NetworkDocument::MultiFaultNetwork(m) => serde_json::to_string_pretty(&Envelope {
            format_version: FORMAT_VERSION,
            kind: KIND_MULTI_FAULT_NETWORK,
            body: mfbn_to_body(m),
        }),
    };
    let mut text = text.expect("document serialization cannot fail");
    text.push('\n');
    text
}

// ---------------------------------------------------------------------------
// Wire -> in-memory
// ---------------------------------------------------------------------------

fn body_to_bn(body: BeliefNetworkBody) -> Result<BeliefNetwork, DocumentError> {
    let mut bn = BeliefNetwork::new();
    for var in body.variables {
        if bn.variables.contains_key(&var.name) {
            return Err(DocumentError::Schema(format!(
                "duplicate variable `{}`",
                var.name
            )));
        }
        bn.add_variable(var);
    }
    for (p, c) in body.arcs {
        bn.add_arc(p, c);
    }
    for cpt_doc in body.cpts {
        if bn.cpts.contains_key(&cpt_doc.owner) {
            return Err(DocumentError::Schema(format!(
                "duplicate cpt for `{}`",
                cpt_doc.owner
            )));
        }
        let mut cpt = Cpt::new(cpt_doc.owner, cpt_doc.parents);
        for row in cpt_doc.rows {
            let cfg = ParentConfig::new(row.given);
            if cpt.rows.contains_key(&cfg) {
                return Err(DocumentError::Schema(format!(
                    "duplicate row {:?} in cpt for `{}`",
                    cfg.assignments(),
                    cpt.owner
                )));
            }
            cpt.insert_row(cfg, row.p);
        }
        bn.set_cpt(cpt);
    }
    Ok(bn)
}

fn body_to_simnet(body: SimilarityNetworkBody) -> Result<SimilarityNetwork, DocumentError> {
    let graph = match body.graph {
        GraphDoc::Graph { nodes, edges } => {
            let mut g = SimilarityGraph::new();
            for n in nodes {
                g.add_node(n);
            }
            for (a, b) in edges {
                if a == b {
                    return Err(DocumentError::Schema(format!("self-loop edge on `{a}`")));
                }
                g.add_edge(a, b);
            }
            SimilarityStructure::Graph(g)
        }
        GraphDoc::Hypergraph { nodes, hyperedges } => {
            let mut h = SimilarityHypergraph::new();
            for n in nodes {
                h.add_node(n);
            }
            for members in hyperedges {
                let set: BTreeSet<String> = members.into_iter().collect();
                if set.len() < 2 {
                    return Err(DocumentError::Schema(
                        "hyperedges must span at least two distinct faults".into(),
                    ));
                }
                h.add_hyperedge(set);
            }
            SimilarityStructure::Hypergraph(h)
        }
    };
    let mut s = SimilarityNetwork::new(body.distinguished, graph);
    for local in body.locals {
        let edge: BTreeSet<String> = local.edge.into_iter().collect();
        if edge.len() < 2 {
            return Err(DocumentError::Schema(
                "a local network's edge must name at least two distinct faults".into(),
            ));
        }
        if s.locals.contains_key(&edge) {
            return Err(DocumentError::Schema(format!(
                "duplicate local network for edge {:?}",
                edge
            )));
        }
        s.add_local(LocalBeliefNetwork {
            edge,
            network: body_to_bn(local.network)?,
        });
    }
    Ok(s)
}

fn body_to_mfbn(body: MultiFaultBody) -> Result<MultiFaultNetwork, DocumentError> {
    for (fault, p) in &body.priors {
        if !(0.0..=1.0).contains(p) {
            return Err(DocumentError::Schema(format!(
                "prior {p} for `{fault}` outside [0, 1]"
            )));
        }
    }
    let mut provenance = BTreeMap::new();
    for prov in body.provenance {
        let mut gates = BTreeMap::new();
        for gate in prov.gates {
            let spec = NoisyOrSpec {
                manifestation: prov.manifestation.clone(),
                faults: prov.faults.clone(),
                leak: gate.leak,
                singles: gate.singles,
                powers: gate.powers,
            };
            spec.validate().map_err(|e| {
                DocumentError::Schema(format!("invalid gate for `{}`: {e}", prov.manifestation))
            })?;
            gates.insert(ParentConfig::new(gate.given), spec);
        }
        if provenance
            .insert(
                prov.manifestation.clone(),
                NoisyOrProvenance {
                    context: prov.context,
                    gates,
                },
            )
            .is_some()
        {
            return Err(DocumentError::Schema(format!(
                "duplicate provenance for `{}`",
                prov.manifestation
            )));
        }
    }
    Ok(MultiFaultNetwork {
        network: body_to_bn(body.network)?,
        fault_nodes: body.fault_nodes,
        manifest_nodes: body.manifest_nodes,
        priors: body.priors,
        provenance,
    })
}

fn schema_err(e: serde_json::Error) -> DocumentError {
    DocumentError::Schema(e.to_string())
}

/// Parse a document of any kind, reporting syntax errors with line/column
/// and shape problems with a machine-readable code.
pub fn parse_document(text: &str) -> Result<NetworkDocument, DocumentError> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| DocumentError::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
    let object = value
        .as_object()
        .ok_or_else(|| DocumentError::Schema("document root must be an object".into()))?;
    let version = object
        .get("format_version")
        .and_then(serde_json::Value::as_u64)
        .ok_or_else(|| DocumentError::Schema("missing integer `format_version`".into()))?;
    if version != FORMAT_VERSION {
        return Err(DocumentError::Version { found: version });
    }
    let kind = object
        .get("kind")
        .and_then(serde_json::Value::as_str)
        .ok_or_else(|| DocumentError::Schema("missing string `kind`".into()))?;
    match kind {
        KIND_BELIEF_NETWORK => {
            let body: BeliefNetworkBody = serde_json::from_value(value).map_err(schema_err)?;
            Ok(NetworkDocument::BeliefNetwork(body_to_bn(body)?))
        }
        KIND_SIMILARITY_NETWORK => {
            let body: SimilarityNetworkBody = serde_json::from_value(value).map_err(schema_err)?;
            Ok(NetworkDocument::SimilarityNetwork(body_to_simnet(body)?))
        }
        KIND_MULTI_FAULT_NETWORK => {
            let body: MultiFaultBody = serde_json::from_value(value).map_err(schema_err)?;
            Ok(NetworkDocument::MultiFaultNetwork(body_to_mfbn(body)?))
        }
        other => Err(DocumentError::Schema(format!(
            "unknown document kind `{other}`"
        ))),
    }
}

// ---------------------------------------------------------------------------
// DOT export
// ---------------------------------------------------------------------------

fn dot_escape(name: &str) -> String {
    name.replace('\\', "\\\\").replace('"', "\\\"")
}

/// Render a belief network as a DOT digraph. The distinguished node, when
/// named, is drawn in the small-oval convention; fault nodes of a
/// multi-fault network are drawn bold.
pub fn export_dot(
    bn: &BeliefNetwork,
    distinguished: Option<&str>,
    fault_nodes: &[String],
) -> String {
    let mut out = String::from("digraph belief_network {\n");
    for name in bn.variables.keys() {
        let escaped = dot_escape(name);
        if Some(name.as_str()) == distinguished {
            out.push_str(&format!(
                "  \"{escaped}\" [shape=oval, width=0.5, height=0.3, fixedsize=true];\n"
            ));
        } else if fault_nodes.iter().any(|f| f == name) {
            out.push_str(&format!("  \"{escaped}\" [style=bold];\n"));
        } else {
            out.push_str(&format!("  \"{escaped}\";\n"));
        }
    }
    for (p, c) in &bn.arcs {
        out.push_str(&format!(
            "  \"{}\" -> \"{}\";\n",
            dot_escape(p),
            dot_escape(c)
        ));
    }
    out.push_str("}\n");
    out
}

/// Render a similarity structure as an undirected DOT graph; hyperedges
/// appear as dashed cliques.
pub fn export_similarity_dot(s: &SimilarityNetwork) -> String {
    let mut out = String::from("graph similarity_graph {\n");
    for node in s.graph.nodes() {
        out.push_str(&format!("  \"{}\";\n", dot_escape(node)));
    }
    match &s.graph {
        SimilarityStructure::Graph(g) => {
            for (a, b) in &g.edges {
                out.push_str(&format!(
                    "  \"{}\" -- \"{}\";\n",
                    dot_escape(a),
                    dot_escape(b)
                ));
            }
        }
        SimilarityStructure::Hypergraph(h) => {
            for edge in &h.hyperedges {
                let members: Vec<&String> = edge.iter().collect();
                for i in 0..members.len() {
                    for j in i + 1..members.len() {
                        out.push_str(&format!(
                            "  \"{}\" -- \"{}\" [style=dashed];\n",
                            dot_escape(members[i]),
                            dot_escape(members[j])
                        ));
                    }
                }
            }
        }
    }
    out.push_str("}\n");
    out
}
