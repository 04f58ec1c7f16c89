//! Command-line front end: parse network documents, run the
//! validate/build/transform/query pipelines, and emit reports, output
//! documents, and DOT diagrams.
//!
//! Exit status: 0 on success, 1 when validation or an operation fails on
//! the inputs, 2 on usage errors. Identical invocations produce
//! byte-identical outputs.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::document::{self, NetworkDocument};
use crate::graphs;
use crate::model::{validate_network, BeliefNetwork, ValidationReport};
use crate::oracle;
use crate::simnet::{self, SimilarityNetwork};
use crate::transform::{self, FaultDependencies, TransformOptions};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Text,
    Json,
}

#[derive(Debug, Parser)]
#[command(
    name = "simnet",
    about = "Validate similarity networks, build global belief networks, and transform them into multiple-fault belief networks",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct CommonArgs {
    /// Report format.
    #[arg(long, value_enum, default_value = "text", global = false)]
    format: OutputFormat,
    /// Tolerance for probability comparisons.
    #[arg(long, default_value_t = transform::DEFAULT_TOLERANCE)]
    tolerance: f64,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Validate a document; similarity networks also get the soundness
    /// report for their constructed global network.
    Validate {
        file: PathBuf,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Construct the global belief network of a similarity network.
    BuildGlobal {
        file: PathBuf,
        #[command(flatten)]
        common: CommonArgs,
        /// Write the global network here (.bn.json).
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Restructure a single-fault global network (or a similarity
    /// network's global) into a star-topology similarity network.
    StarRestructure {
        file: PathBuf,
        #[command(flatten)]
        common: CommonArgs,
        /// Name of the distinguished (fault) variable; required for
        /// belief-network input.
        #[arg(long)]
        fault_var: Option<String>,
        /// Label of the no-fault instance.
        #[arg(long, default_value = transform::DEFAULT_NORMAL)]
        normal: String,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Transform a similarity network (or a single-fault belief network)
    /// into a multiple-fault belief network.
    Transform {
        file: PathBuf,
        #[command(flatten)]
        common: CommonArgs,
        /// JSON file mapping each fault to its prior probability.
        #[arg(long)]
        priors: PathBuf,
        /// Optional inter-fault dependencies (.bn.json with arcs and cpts
        /// over fault nodes).
        #[arg(long)]
        fault_deps: Option<PathBuf>,
        #[arg(long)]
        fault_var: Option<String>,
        #[arg(long, default_value = transform::DEFAULT_NORMAL)]
        normal: String,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Exact conditional query against a belief network or a multi-fault
    /// network.
    Query {
        file: PathBuf,
        #[command(flatten)]
        common: CommonArgs,
        /// Evidence assignments, VAR=instance (repeatable).
        #[arg(long = "set", value_name = "VAR=INSTANCE")]
        set: Vec<String>,
        #[arg(long)]
        target: String,
    },
    /// Independence checks: d-separation and the numerical oracle for
    /// --x/--y on a network; for a similarity network, extract and verify
    /// every subset-independence assertion on its filled global.
    CheckIndependence {
        file: PathBuf,
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        x: Option<String>,
        #[arg(long)]
        y: Option<String>,
        /// Conditioning variables (repeatable).
        #[arg(long = "given", value_name = "VAR")]
        given: Vec<String>,
    },
    /// Emit a DOT diagram.
    ExportDot {
        file: PathBuf,
        #[command(flatten)]
        common: CommonArgs,
        /// Mark this variable with the small-oval distinguished-node
        /// convention.
        #[arg(long)]
        fault_var: Option<String>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

/// Everything that can stop a command, mapped to one exit status.
enum CliFailure {
    Invalid(String),
    Usage(String),
}

impl CliFailure {
    fn status(&self) -> i32 {
        match self {
            CliFailure::Invalid(_) => EXIT_INVALID,
            CliFailure::Usage(_) => EXIT_USAGE,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliFailure::Invalid(m) | CliFailure::Usage(m) => m,
        }
    }
}

fn invalid(e: impl std::fmt::Display) -> CliFailure {
    CliFailure::Invalid(e.to_string())
}

fn read_file(path: &Path) -> Result<String, CliFailure> {
    std::fs::read_to_string(path)
        .map_err(|e| CliFailure::Usage(format!("cannot read {}: {e}", path.display())))
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliFailure> {
    std::fs::write(path, contents)
        .map_err(|e| CliFailure::Usage(format!("cannot write {}: {e}", path.display())))
}

fn load_document(path: &Path) -> Result<NetworkDocument, CliFailure> {
    let text = read_file(path)?;
    document::parse_document(&text).map_err(invalid)
}

fn load_priors(path: &Path) -> Result<BTreeMap<String, f64>, CliFailure> {
    let text = read_file(path)?;
    serde_json::from_str(&text)
        .map_err(|e| CliFailure::Invalid(format!("invalid priors file {}: {e}", path.display())))
}

fn load_fault_deps(path: &Path) -> Result<FaultDependencies, CliFailure> {
    match load_document(path)? {
        NetworkDocument::BeliefNetwork(bn) => Ok(FaultDependencies {
            arcs: bn.arcs,
            cpts: bn.cpts,
        }),
        other => Err(CliFailure::Invalid(format!(
            "fault-dependency file must be a belief-network document, got {}",
            other.kind()
        ))),
    }
}

fn findings_json(report: &ValidationReport) -> serde_json::Value {
    serde_json::to_value(&report.findings).expect("findings serialize")
}

fn print_report<W: Write>(
    out: &mut W,
    format: OutputFormat,
    command: &str,
    report: &ValidationReport,
    sound_when_clean: bool,
) {
    match format {
        OutputFormat::Json => {
            let value = json!({
                "command": command,
                "findings": findings_json(report),
                "errors": report.errors().count(),
                "warnings": report.warnings().count(),
                "sound": sound_when_clean && report.is_clean(),
            });
            let _ = writeln!(out, "{}", serde_json::to_string_pretty(&value).unwrap());
        }
        OutputFormat::Text => {
            if report.is_clean() {
                let _ = writeln!(out, "{}", if sound_when_clean { "sound" } else { "ok" });
            } else {
                for f in &report.findings {
                    let sev = match f.severity {
                        crate::model::Severity::Error => "error",
                        crate::model::Severity::Warning => "warning",
                    };
                    let _ = writeln!(out, "{sev}[{}] {} ({})", f.code, f.message, f.location);
                }
                let _ = writeln!(
                    out,
                    "{} error(s), {} warning(s)",
                    report.errors().count(),
                    report.warnings().count()
                );
            }
        }
    }
}

fn emit_document<W: Write>(
    out: &mut W,
    output: Option<&Path>,
    doc: &NetworkDocument,
) -> Result<(), CliFailure> {
    let text = document::serialize_document(doc);
    match output {
        Some(path) => write_file(path, &text),
        None => {
            let _ = out.write_all(text.as_bytes());
            Ok(())
        }
    }
}

fn want_similarity(doc: NetworkDocument) -> Result<SimilarityNetwork, CliFailure> {
    match doc {
        NetworkDocument::SimilarityNetwork(s) => Ok(s),
        other => Err(CliFailure::Invalid(format!(
            "expected a similarity-network document, got {}",
            other.kind()
        ))),
    }
}

/// The inference-facing network of any document kind.
fn inference_network(doc: &NetworkDocument) -> Result<&BeliefNetwork, CliFailure> {
    match doc {
        NetworkDocument::BeliefNetwork(bn) => Ok(bn),
        NetworkDocument::MultiFaultNetwork(m) => Ok(&m.network),
        NetworkDocument::SimilarityNetwork(_) => Err(CliFailure::Invalid(
            "queries need a belief network; run build-global on the similarity network first"
                .into(),
        )),
    }
}

fn parse_evidence(pairs: &[String]) -> Result<BTreeMap<String, String>, CliFailure> {
    let mut evidence = BTreeMap::new();
    for pair in pairs {
        let (var, inst) = pair.split_once('=').ok_or_else(|| {
            CliFailure::Usage(format!(
                "evidence must look like VAR=INSTANCE, got `{pair}`"
            ))
        })?;
        evidence.insert(var.to_string(), inst.to_string());
    }
    Ok(evidence)
}

fn run_validate<W: Write>(
    out: &mut W,
    file: &Path,
    common: &CommonArgs,
) -> Result<i32, CliFailure> {
    let doc = load_document(file)?;
    let (report, sound_flavored) = match &doc {
        NetworkDocument::BeliefNetwork(bn) => (validate_network(bn), false),
        NetworkDocument::MultiFaultNetwork(m) => (validate_network(&m.network), false),
        NetworkDocument::SimilarityNetwork(s) => {
            let mut report = simnet::validate_similarity_network(s);
            if !report.has_errors() {
                match simnet::build_global(s) {
                    Ok(global) => report.merge(simnet::check_soundness(s, &global)),
                    Err(e) => report.error("construction-failed", e.to_string(), "global"),
                }
            }
            (report, true)
        }
    };
    print_report(out, common.format, "validate", &report, sound_flavored);
    Ok(if report.has_errors() {
        EXIT_INVALID
    } else {
        EXIT_OK
    })
}

fn run_build_global<W: Write>(
    out: &mut W,
    file: &Path,
    output: Option<&Path>,
) -> Result<i32, CliFailure> {
    let s = want_similarity(load_document(file)?)?;
    let global = simnet::build_global(&s).map_err(invalid)?;
    emit_document(out, output, &NetworkDocument::BeliefNetwork(global))?;
    Ok(EXIT_OK)
}

/// Guess the fault variable of a plain belief network when the flag is
/// omitted: the unique parentless variable with three or more instances.
fn infer_fault_var(bn: &BeliefNetwork) -> Result<String, CliFailure> {
    let candidates: Vec<&str> = bn
        .variables
        .values()
        .filter(|v| v.instances.len() > 2 && bn.parents_of(&v.name).is_empty())
        .map(|v| v.name.as_str())
        .collect();
    match candidates.as_slice() {
        [single] => Ok((*single).to_string()),
        _ => Err(CliFailure::Usage(
            "cannot infer the fault variable; pass --fault-var".into(),
        )),
    }
}

fn run_star_restructure<W: Write>(
    out: &mut W,
    file: &Path,
    fault_var: Option<&str>,
    normal: &str,
    tolerance: f64,
    output: Option<&Path>,
) -> Result<i32, CliFailure> {
    let doc = load_document(file)?;
    let (global, fault_var) = match doc {
        NetworkDocument::SimilarityNetwork(s) => {
            let fv = fault_var.unwrap_or(s.distinguished_name()).to_string();
            (simnet::build_global(&s).map_err(invalid)?, fv)
        }
        NetworkDocument::BeliefNetwork(bn) => {
            let fv = match fault_var {
                Some(fv) => fv.to_string(),
                None => infer_fault_var(&bn)?,
            };
            (bn, fv)
        }
        other => {
            return Err(CliFailure::Invalid(format!(
                "star-restructure expects a belief or similarity network, got {}",
                other.kind()
            )))
        }
    };
    let s_prime =
        transform::star_restructure(&global, &fault_var, normal, tolerance).map_err(invalid)?;
    emit_document(out, output, &NetworkDocument::SimilarityNetwork(s_prime))?;
    Ok(EXIT_OK)
}

#[allow(clippy::too_many_arguments)]
fn run_transform<W: Write>(
    out: &mut W,
    file: &Path,
    common: &CommonArgs,
    priors_path: &Path,
    fault_deps: Option<&Path>,
    fault_var: Option<&str>,
    normal: &str,
    output: Option<&Path>,
) -> Result<i32, CliFailure> {
    let priors = load_priors(priors_path)?;
    let opts = TransformOptions {
        normal: normal.to_string(),
        tolerance: common.tolerance,
        fault_deps: fault_deps.map(load_fault_deps).transpose()?,
    };
    let doc = load_document(file)?;
    let (mfn, report) = match doc {
        NetworkDocument::SimilarityNetwork(s) => {
            transform::transform_similarity(&s, &priors, &opts).map_err(invalid)?
        }
        NetworkDocument::BeliefNetwork(bn) => {
            let fv = match fault_var {
                Some(fv) => fv.to_string(),
                None => infer_fault_var(&bn)?,
            };
            transform::transform_global(&bn, &fv, &priors, &opts).map_err(invalid)?
        }
        other => {
            return Err(CliFailure::Invalid(format!(
                "transform expects a belief or similarity network, got {}",
                other.kind()
            )))
        }
    };

    match common.format {
        OutputFormat::Json => {
            let value = json!({
                "command": "transform",
                "fault_nodes": mfn.fault_nodes,
                "manifest_nodes": mfn.manifest_nodes,
                "added_independence": report.added_independence,
            });
            let _ = writeln!(out, "{}", serde_json::to_string_pretty(&value).unwrap());
        }
        OutputFormat::Text => {
            let _ = writeln!(
                out,
                "transformed {} fault(s), {} manifestation(s)",
                mfn.fault_nodes.len(),
                mfn.manifest_nodes.len()
            );
            if report.added_independence.is_empty() {
                let _ = writeln!(out, "no independence assertions added beyond the input");
            } else {
                let _ = writeln!(out, "added independence assertions to verify:");
                for a in &report.added_independence {
                    let _ = writeln!(
                        out,
                        "  given {} and {} both present: {} treated as independent",
                        a.faults.0,
                        a.faults.1,
                        a.manifestations.join(", ")
                    );
                }
            }
        }
    }
    emit_document(out, output, &NetworkDocument::MultiFaultNetwork(mfn))?;
    Ok(EXIT_OK)
}

fn run_query<W: Write>(
    out: &mut W,
    file: &Path,
    common: &CommonArgs,
    set: &[String],
    target: &str,
) -> Result<i32, CliFailure> {
    let doc = load_document(file)?;
    let bn = inference_network(&doc)?;
    let evidence = parse_evidence(set)?;
    let dist = oracle::query(bn, &evidence, target).map_err(invalid)?;
    let var = bn.variable(target).expect("query validated the target");
    match common.format {
        OutputFormat::Json => {
            let value = json!({
                "command": "query",
                "target": target,
                "distribution": var.instances.iter().zip(&dist).collect::<BTreeMap<_, _>>(),
            });
            let _ = writeln!(out, "{}", serde_json::to_string_pretty(&value).unwrap());
        }
        OutputFormat::Text => {
            for (inst, p) in var.instances.iter().zip(&dist) {
                let _ = writeln!(out, "p({target} = {inst} | evidence) = {p}");
            }
        }
    }
    Ok(EXIT_OK)
}

fn run_check_independence<W: Write>(
    out: &mut W,
    file: &Path,
    common: &CommonArgs,
    x: Option<&str>,
    y: Option<&str>,
    given: &[String],
) -> Result<i32, CliFailure> {
    let doc = load_document(file)?;
    if let NetworkDocument::SimilarityNetwork(s) = &doc {
        // Extract every subset-independence assertion and verify it against
        // the filled global network.
        let global = simnet::build_global(s).map_err(invalid)?;
        let assertions = simnet::extract_subset_independence(s);
        let mut failures = 0usize;
        let mut results = Vec::new();
        for assertion in &assertions {
            let holds = simnet::verify_subset_independence(
                &global,
                s.distinguished_name(),
                assertion,
                common.tolerance,
            )
            .map_err(invalid)?;
            if !holds {
                failures += 1;
            }
            results.push((assertion, holds));
        }
        match common.format {
            OutputFormat::Json => {
                let value = json!({
                    "command": "check-independence",
                    "assertions": results
                        .iter()
                        .map(|(a, holds)| json!({
                            "feature": a.feature,
                            "subset": a.subset,
                            "holds": holds,
                        }))
                        .collect::<Vec<_>>(),
                    "failures": failures,
                });
                let _ = writeln!(out, "{}", serde_json::to_string_pretty(&value).unwrap());
            }
            OutputFormat::Text => {
                for (a, holds) in &results {
                    let verdict = if *holds { "holds" } else { "FAILS" };
                    let subset: Vec<&str> = a.subset.iter().map(String::as_str).collect();
                    let _ = writeln!(
                        out,
                        "{verdict}: {} equal across {{{}}}",
                        a.feature,
                        subset.join(", ")
                    );
                }
                let _ = writeln!(
                    out,
                    "{} assertion(s), {} failure(s)",
                    results.len(),
                    failures
                );
            }
        }
        return Ok(if failures == 0 { EXIT_OK } else { EXIT_INVALID });
    }

    let bn = inference_network(&doc)?;
    let (x, y) = match (x, y) {
        (Some(x), Some(y)) => (x, y),
        _ => {
            return Err(CliFailure::Usage(
                "pass --x and --y for network documents".into(),
            ))
        }
    };
    let given_set: BTreeSet<String> = given.iter().cloned().collect();
    let xs = BTreeSet::from([x.to_string()]);
    let ys = BTreeSet::from([y.to_string()]);
    let separated = graphs::d_separated(bn, &xs, &ys, &given_set).map_err(invalid)?;
    let numeric = oracle::independent(bn, x, y, &given_set, common.tolerance).map_err(invalid)?;
    match common.format {
        OutputFormat::Json => {
            let value = json!({
                "command": "check-independence",
                "x": x,
                "y": y,
                "given": given_set,
                "d_separated": separated,
                "numerically_independent": numeric,
            });
            let _ = writeln!(out, "{}", serde_json::to_string_pretty(&value).unwrap());
        }
        OutputFormat::Text => {
            let _ = writeln!(out, "d-separated: {separated}");
            let _ = writeln!(
                out,
                "numerically independent (tol {}): {numeric}",
                common.tolerance
            );
        }
    }
    Ok(EXIT_OK)
}

fn run_export_dot<W: Write>(
    out: &mut W,
    file: &Path,
    fault_var: Option<&str>,
    output: Option<&Path>,
) -> Result<i32, CliFailure> {
    let doc = load_document(file)?;
    let dot = match &doc {
        NetworkDocument::BeliefNetwork(bn) => document::export_dot(bn, fault_var, &[]),
        NetworkDocument::MultiFaultNetwork(m) => {
            document::export_dot(&m.network, fault_var, &m.fault_nodes)
        }
        NetworkDocument::SimilarityNetwork(s) => document::export_similarity_dot(s),
    };
    match output {
        Some(path) => write_file(path, &dot)?,
        None => {
            let _ = out.write_all(dot.as_bytes());
        }
    }
    Ok(EXIT_OK)
}

/// Parse and dispatch one invocation. `argv` excludes the program name.
pub fn run_command<W: Write, E: Write>(argv: &[String], stdout: &mut W, stderr: &mut E) -> i32 {
    let mut full = vec!["simnet".to_string()];
    full.extend(argv.iter().cloned());
    let cli = match Cli::try_parse_from(&full) {
        Ok(cli) => cli,
        Err(e) => {
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{e}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(stderr, "{e}");
                    EXIT_USAGE
                }
            };
        }
    };

    let result = match &cli.command {
        Command::Validate { file, common } => run_validate(stdout, file, common),
        Command::BuildGlobal { file, output, .. } => {
            run_build_global(stdout, file, output.as_deref())
        }
        Command::StarRestructure {
            file,
            common,
            fault_var,
            normal,
            output,
        } => run_star_restructure(
            stdout,
            file,
            fault_var.as_deref(),
            normal,
            common.tolerance,
            output.as_deref(),
        ),
        Command::Transform {
            file,
            common,
            priors,
            fault_deps,
            fault_var,
            normal,
            output,
        } => run_transform(
            stdout,
            file,
            common,
            priors,
            fault_deps.as_deref(),
            fault_var.as_deref(),
            normal,
            output.as_deref(),
        ),
        Command::Query {
            file,
            common,
            set,
            target,
        } => run_query(stdout, file, common, set, target),
        Command::CheckIndependence {
            file,
            common,
            x,
            y,
            given,
        } => run_check_independence(stdout, file, common, x.as_deref(), y.as_deref(), given),
        Command::ExportDot {
            file,
            fault_var,
            output,
            ..
        } => run_export_dot(stdout, file, fault_var.as_deref(), output.as_deref()),
    };
    match result {
        Ok(status) => status,
        Err(failure) => {
            let _ = writeln!(stderr, "error: {}", failure.message());
            failure.status()
        }
    }
}
