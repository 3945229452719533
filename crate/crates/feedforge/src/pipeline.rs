//! Pipeline orchestration: the staged documents, the stage functions, and
//! the end-to-end runner behind the CLI.
//!
//! Every stage consumes and produces JSON documents so subcommands can be
//! composed; the runner chains them in-process and writes the same bytes,
//! which keeps staged execution byte-equivalent to a single run.

use crate::config::{InputFormat, PipelineConfig, SolverKind};
use crate::electrify::{
    allocate_loads, assign_line_params, build_network, compute_weights, ElectricalNetwork,
};
use crate::export::{
    from_network_json, render_overlay_svg, render_voltage_profile_svg, to_geojson, to_network_json,
    to_opendss, Provenance, SCHEMA_VERSION,
};
use crate::geograph::{
    clean, parse_geojson, parse_osm_xml, parse_point_collection, project, score_edges,
    CandidateGraph, GeoGraph, GeoJsonOptions, GeoPoint, NodeId, OsmOptions, Projection,
};
use crate::metrics::{structural_summary, StructuralSummary};
use crate::powerflow::{run_scenarios, PowerFlowOptions, PowerFlowResult, ValidationReport};
use crate::synth::{
    solve_exact_with, solve_heuristic, to_feeder_graph, verify_solution, ExactOptions,
    FeederGraph, SynthesisProblem, SynthesisSolution,
};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

pub const STREET_FILE: &str = "street.json";
pub const CANDIDATE_FILE: &str = "candidate.json";
pub const SOLUTION_FILE: &str = "solution.json";
pub const FEEDER_FILE: &str = "feeder.json";
pub const NETWORK_FILE: &str = "network.json";
pub const PF_FILE: &str = "pf_results.json";
pub const MANIFEST_FILE: &str = "run_manifest.json";
pub const DSS_FILE: &str = "feeder.dss";
pub const GEOJSON_FILE: &str = "feeder.geojson";
pub const OVERLAY_FILE: &str = "overlay.svg";
pub const PROFILE_FILE: &str = "voltage_profile.svg";
pub const SUMMARY_JSON_FILE: &str = "summary.json";

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StreetDocument {
    pub schema_version: String,
    pub provenance: Provenance,
    pub projection: Projection<f64>,
    pub street: GeoGraph<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CandidateDocument {
    pub schema_version: String,
    pub provenance: Provenance,
    pub projection: Projection<f64>,
    pub source: NodeId,
    pub required: Vec<NodeId>,
    pub candidate: CandidateGraph<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolutionDocument {
    pub schema_version: String,
    pub provenance: Provenance,
    pub solver: SolverKind,
    pub solution: SynthesisSolution<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FeederDocument {
    pub schema_version: String,
    pub provenance: Provenance,
    pub projection: Projection<f64>,
    pub feeder: FeederGraph<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScenarioOutcome {
    pub result: PowerFlowResult<f64>,
    pub report: ValidationReport<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PfDocument {
    pub schema_version: String,
    pub provenance: Provenance,
    pub v_min: f64,
    pub scenarios: BTreeMap<String, ScenarioOutcome>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StageTiming {
    pub stage: String,
    pub wall_ms: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolverInfo {
    pub solver: SolverKind,
    pub objective: f64,
    pub proven_optimal: bool,
    pub gap: f64,
}

/// Per-run record of stage wall times and input identity. Wall times vary
/// between runs, so this file is not part of the deterministic artifact
/// set.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema_version: String,
    pub tool_version: String,
    pub config_digest: String,
    pub source_digest: String,
    pub stages: Vec<StageTiming>,
    pub solver: Option<SolverInfo>,
}

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error("config: {0}")]
    Config(String),
    #[error("{stage}: {message}")]
    Stage { stage: &'static str, message: String },
    #[error("pf: {0}")]
    PowerFlow(String),
}

impl PipelineError {
    /// CLI exit code: 2 config, 3 data/stage, 5 power-flow divergence.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Config(_) => 2,
            PipelineError::Stage { .. } => 3,
            PipelineError::PowerFlow(_) => 5,
        }
    }
}

impl From<crate::config::ConfigError> for PipelineError {
    fn from(e: crate::config::ConfigError) -> Self {
        PipelineError::Config(e.0)
    }
}

fn stage_err(stage: &'static str, e: impl std::fmt::Display) -> PipelineError {
    PipelineError::Stage {
        stage,
        message: e.to_string(),
    }
}

/// Parse, project, clean, simplify, score, and resolve the synthesis
/// source and required set.
pub fn stage_ingest(
    cfg: &PipelineConfig,
) -> Result<(StreetDocument, CandidateDocument), PipelineError> {
    let err = |e: &dyn std::fmt::Display| stage_err("ingest", e);
    let bytes = std::fs::read(&cfg.input.path)
        .map_err(|e| err(&format!("cannot read {}: {e}", cfg.input.path.display())))?;
    let source_digest = crate::export::sha256_hex(&bytes);
    let raw = String::from_utf8(bytes).map_err(|e| err(&format!("input is not utf-8: {e}")))?;
    let scoring = cfg.scoring.to_scoring_config();
    let keep = scoring.class_penalties.classes();

    let mut graph: GeoGraph<f64> = match cfg.input.format {
        InputFormat::GeoJson => {
            let mut options = GeoJsonOptions::default();
            options.keep_classes = Some(keep);
            parse_geojson(&raw, &options).map_err(|e| err(&e))?
        }
        InputFormat::OsmXml => {
            let options = OsmOptions {
                keep_classes: Some(keep),
            };
            parse_osm_xml(&raw, &options).map_err(|e| err(&e))?
        }
    };
    let projection = project(&mut graph).map_err(|e| err(&e))?;
    let street = clean(&graph).map_err(|e| err(&e))?;

    // Explicit ids resolve against the cleaned graph and are protected
    // from simplification; coordinates resolve after simplification.
    let mut protected: BTreeSet<NodeId> = BTreeSet::new();
    for &id in cfg
        .synthesis
        .required
        .nodes
        .iter()
        .chain(cfg.synthesis.source.node.iter())
    {
        let id = NodeId(id);
        if !street.nodes.contains_key(&id) {
            return Err(err(&format!(
                "node {id} is not in the cleaned street graph"
            )));
        }
        protected.insert(id);
    }
    let candidate = crate::geograph::simplify(&street, &protected).map_err(|e| err(&e))?;
    let candidate = score_edges(&candidate, &scoring).map_err(|e| err(&e))?;

    let source = match (cfg.synthesis.source.node, cfg.synthesis.source.coord) {
        (Some(id), None) => NodeId(id),
        (None, Some([lon, lat])) => nearest_node(&candidate, &projection, lon, lat)
            .ok_or_else(|| err(&"candidate graph has no nodes"))?,
        _ => unreachable!("config validation enforces exactly one"),
    };
    if !candidate.nodes.contains_key(&source) {
        return Err(err(&format!("source node {source} is not a candidate node")));
    }

    let mut required: BTreeSet<NodeId> = BTreeSet::new();
    for &id in &cfg.synthesis.required.nodes {
        required.insert(NodeId(id));
    }
    for &[lon, lat] in &cfg.synthesis.required.coords {
        let id = nearest_node(&candidate, &projection, lon, lat)
            .ok_or_else(|| err(&"candidate graph has no nodes"))?;
        required.insert(id);
    }
    if let Some(k) = cfg.synthesis.required.top_k {
        let path = cfg
            .input
            .activity_path
            .as_ref()
            .expect("config validation requires activity_path with top_k");
        let activity = read_activity(path, &projection)?;
        let ranked = top_activity_nodes(&candidate, &activity, cfg, source);
        if ranked.len() < k {
            return Err(err(&format!(
                "top_k = {k} but only {} non-source candidate nodes",
                ranked.len()
            )));
        }
        required.extend(ranked.into_iter().take(k));
    }
    required.remove(&source);
    for &id in &required {
        if !candidate.nodes.contains_key(&id) {
            return Err(err(&format!("required node {id} is not a candidate node")));
        }
    }
    if required.is_empty() {
        return Err(err(&"required set resolved to nothing"));
    }

    let provenance = Provenance::new(source_digest, cfg.digest());
    Ok((
        StreetDocument {
            schema_version: SCHEMA_VERSION.to_string(),
            provenance: provenance.clone(),
            projection: projection.clone(),
            street,
        },
        CandidateDocument {
            schema_version: SCHEMA_VERSION.to_string(),
            provenance,
            projection,
            source,
            required: required.into_iter().collect(),
            candidate,
        },
    ))
}

/// Nearest candidate node to a lon/lat, by planar distance, smaller id on
/// ties.
fn nearest_node(
    candidate: &CandidateGraph<f64>,
    projection: &Projection<f64>,
    lon: f64,
    lat: f64,
) -> Option<NodeId> {
    let (px, py) = projection.to_plane(lon, lat);
    let mut best: Option<(f64, NodeId)> = None;
    for (&id, point) in &candidate.nodes {
        let (x, y) = point.planar().ok()?;
        let d2 = (x - px) * (x - px) + (y - py) * (y - py);
        if best.map_or(true, |(bd, _)| d2 < bd) {
            best = Some((d2, id));
        }
    }
    best.map(|(_, id)| id)
}

fn read_activity(
    path: &Path,
    projection: &Projection<f64>,
) -> Result<Vec<GeoPoint<f64>>, PipelineError> {
    let raw = std::fs::read_to_string(path)
        .map_err(|e| stage_err("ingest", format!("cannot read {}: {e}", path.display())))?;
    let mut points: Vec<GeoPoint<f64>> =
        parse_point_collection(&raw).map_err(|e| stage_err("ingest", e))?;
    for p in points.iter_mut() {
        projection.project_point(p);
    }
    Ok(points)
}

/// Non-source candidate nodes ranked by activity count within the
/// configured radius, ties to the smaller id.
fn top_activity_nodes(
    candidate: &CandidateGraph<f64>,
    activity: &[GeoPoint<f64>],
    cfg: &PipelineConfig,
    source: NodeId,
) -> Vec<NodeId> {
    let radius = cfg.electrify.allocation.activity_radius_m;
    let mut ranked: Vec<(usize, NodeId)> = Vec::new();
    for (&id, point) in &candidate.nodes {
        if id == source {
            continue;
        }
        let Ok((x, y)) = point.planar() else { continue };
        let count = activity
            .iter()
            .filter(|p| {
                p.planar().map_or(false, |(px, py)| {
                    ((px - x) * (px - x) + (py - y) * (py - y)).sqrt() <= radius
                })
            })
            .count();
        ranked.push((count, id));
    }
    ranked.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    ranked.into_iter().map(|(_, id)| id).collect()
}

/// Build the synthesis problem from the candidate document, solve it with
/// the configured solver, verify, and orient the feeder tree.
pub fn stage_synth(
    cfg: &PipelineConfig,
    cand: &CandidateDocument,
) -> Result<(SolutionDocument, FeederDocument), PipelineError> {
    let required: BTreeSet<NodeId> = cand.required.iter().copied().collect();
    let problem = SynthesisProblem::new(
        cand.candidate.clone(),
        cand.source,
        required,
        cfg.alpha_weights(),
    )
    .map_err(|e| stage_err("synth", e))?;
    let solution = match cfg.synthesis.solver {
        SolverKind::Exact => solve_exact_with(
            &problem,
            ExactOptions {
                timeout: Duration::from_secs_f64(cfg.synthesis.timeout_s),
            },
        ),
        SolverKind::Heuristic => solve_heuristic(&problem),
    }
    .map_err(|e| stage_err("synth", e))?;
    let report = verify_solution(&problem, &solution);
    if !report.ok() {
        return Err(stage_err(
            "synth",
            format!("solution failed verification: {report}"),
        ));
    }
    let feeder = to_feeder_graph(&problem, &solution).map_err(|e| stage_err("synth", e))?;
    Ok((
        SolutionDocument {
            schema_version: SCHEMA_VERSION.to_string(),
            provenance: cand.provenance.clone(),
            solver: cfg.synthesis.solver,
            solution,
        },
        FeederDocument {
            schema_version: SCHEMA_VERSION.to_string(),
            provenance: cand.provenance.clone(),
            projection: cand.projection.clone(),
            feeder,
        },
    ))
}

/// Assign line parameters, allocate loads, and assemble the validated
/// electrical network.
pub fn stage_electrify(
    cfg: &PipelineConfig,
    feeder_doc: &FeederDocument,
) -> Result<ElectricalNetwork<f64>, PipelineError> {
    let feeder = &feeder_doc.feeder;
    let lines =
        assign_line_params(feeder, &cfg.line_templates()).map_err(|e| stage_err("electrify", e))?;
    let mut alloc = cfg.allocation_config()?;
    for c in alloc.centroids.iter_mut() {
        feeder_doc.projection.project_point(c);
    }
    let activity = match &cfg.input.activity_path {
        Some(path) => read_activity_for(path, &feeder_doc.projection, "electrify")?,
        None => Vec::new(),
    };
    let weights =
        compute_weights(feeder, &alloc, &activity).map_err(|e| stage_err("electrify", e))?;
    let loads = allocate_loads(&weights, &alloc, cfg.electrify.households)
        .map_err(|e| stage_err("electrify", e))?;
    build_network(
        feeder,
        lines,
        loads,
        cfg.electrify.slack_v_pu,
        cfg.electrify.base_mva,
        cfg.electrify.base_kv,
    )
    .map_err(|e| stage_err("electrify", e))
}

fn read_activity_for(
    path: &Path,
    projection: &Projection<f64>,
    stage: &'static str,
) -> Result<Vec<GeoPoint<f64>>, PipelineError> {
    let raw = std::fs::read_to_string(path)
        .map_err(|e| stage_err(stage, format!("cannot read {}: {e}", path.display())))?;
    let mut points: Vec<GeoPoint<f64>> =
        parse_point_collection(&raw).map_err(|e| stage_err(stage, e))?;
    for p in points.iter_mut() {
        projection.project_point(p);
    }
    Ok(points)
}

/// Run every configured scenario; a diverging scenario is the dedicated
/// power-flow failure, everything else a data failure.
pub fn stage_pf(
    cfg: &PipelineConfig,
    net: &ElectricalNetwork<f64>,
    provenance: &Provenance,
) -> Result<PfDocument, PipelineError> {
    let options = PowerFlowOptions {
        tol: cfg.powerflow.tol,
        max_iter: cfg.powerflow.max_iter,
    };
    let outcomes = run_scenarios(net, &cfg.powerflow.factors, options, cfg.powerflow.v_min)
        .map_err(|e| match e {
            crate::powerflow::PowerFlowError::ScenarioDiverged { .. } => {
                PipelineError::PowerFlow(e.to_string())
            }
            other => stage_err("pf", other),
        })?;
    Ok(PfDocument {
        schema_version: SCHEMA_VERSION.to_string(),
        provenance: provenance.clone(),
        v_min: cfg.powerflow.v_min,
        scenarios: outcomes
            .into_iter()
            .map(|(name, (result, report))| (name, ScenarioOutcome { result, report }))
            .collect(),
    })
}

/// The report artifacts as rendered bytes, keyed by file name, plus the
/// structural summary itself.
pub struct ReportArtifacts {
    pub files: Vec<(&'static str, String)>,
    pub summary: StructuralSummary<f64>,
}

pub fn stage_report(
    cfg: &PipelineConfig,
    street_doc: &StreetDocument,
    feeder_doc: &FeederDocument,
    net: &ElectricalNetwork<f64>,
    pf: &PfDocument,
) -> Result<ReportArtifacts, PipelineError> {
    let feeder = &feeder_doc.feeder;
    let summary = structural_summary(feeder, net);
    let mut files: Vec<(&'static str, String)> = Vec::new();
    if cfg.output.summary {
        let mut json = serde_json::to_string_pretty(&summary)
            .map_err(|e| stage_err("report", e))?;
        json.push('\n');
        files.push((SUMMARY_JSON_FILE, json));
    }
    if cfg.output.opendss {
        files.push((DSS_FILE, to_opendss(net)));
    }
    if cfg.output.geojson {
        files.push((
            GEOJSON_FILE,
            to_geojson(feeder, net).map_err(|e| stage_err("report", e))?,
        ));
    }
    if cfg.output.overlay_svg {
        files.push((
            OVERLAY_FILE,
            render_overlay_svg(&street_doc.street, feeder).map_err(|e| stage_err("report", e))?,
        ));
    }
    if cfg.output.voltage_profile_svg {
        let results: BTreeMap<String, PowerFlowResult<f64>> = pf
            .scenarios
            .iter()
            .map(|(k, v)| (k.clone(), v.result.clone()))
            .collect();
        files.push((
            PROFILE_FILE,
            render_voltage_profile_svg(feeder, &results, pf.v_min)
                .map_err(|e| stage_err("report", e))?,
        ));
    }
    Ok(ReportArtifacts { files, summary })
}

/// Tracks files written by one run so a failure can remove its partial
/// output.
pub struct Workspace {
    dir: PathBuf,
    written: Vec<PathBuf>,
}

impl Workspace {
    pub fn new(dir: &Path) -> Result<Self, PipelineError> {
        std::fs::create_dir_all(dir)
            .map_err(|e| stage_err("io", format!("cannot create {}: {e}", dir.display())))?;
        Ok(Workspace {
            dir: dir.to_path_buf(),
            written: Vec::new(),
        })
    }

    pub fn write(&mut self, name: &str, content: &str) -> Result<(), PipelineError> {
        let path = self.dir.join(name);
        let tmp = self.dir.join(format!(".{name}.tmp"));
        std::fs::write(&tmp, content)
            .and_then(|()| std::fs::rename(&tmp, &path))
            .map_err(|e| stage_err("io", format!("cannot write {}: {e}", path.display())))?;
        self.written.push(path);
        Ok(())
    }

    pub fn read(&self, name: &str) -> Result<String, PipelineError> {
        let path = self.dir.join(name);
        std::fs::read_to_string(&path)
            .map_err(|e| stage_err("io", format!("cannot read {}: {e}", path.display())))
    }

    /// Removes everything this run wrote.
    pub fn rollback(&mut self) {
        for path in self.written.drain(..) {
            let _ = std::fs::remove_file(path);
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> Result<String, PipelineError> {
    let mut out = serde_json::to_string_pretty(value).map_err(|e| stage_err("io", e))?;
    out.push('\n');
    Ok(out)
}

fn parse_doc<T: for<'de> Deserialize<'de>>(
    raw: &str,
    what: &'static str,
) -> Result<T, PipelineError> {
    serde_json::from_str(raw).map_err(|e| stage_err("io", format!("{what}: {e}")))
}

pub struct RunOutcome {
    pub summary_table: String,
    pub exit_code: i32,
    pub manifest: RunManifest,
}

struct StageClock {
    verbose: bool,
    timings: Vec<StageTiming>,
}

impl StageClock {
    fn new(verbose: bool) -> Self {
        StageClock {
            verbose,
            timings: Vec::new(),
        }
    }

    fn time<T>(
        &mut self,
        stage: &str,
        f: impl FnOnce() -> Result<T, PipelineError>,
    ) -> Result<T, PipelineError> {
        let start = Instant::now();
        let out = f()?;
        let wall_ms = start.elapsed().as_secs_f64() * 1e3;
        if self.verbose {
            eprintln!("{stage}: {wall_ms:.1} ms");
        }
        self.timings.push(StageTiming {
            stage: stage.to_string(),
            wall_ms,
        });
        Ok(out)
    }
}

/// The full pipeline in one process: every stage, every artifact, the run
/// manifest, and the printed summary. On failure all files written by this
/// run are removed.
pub fn run_pipeline(
    cfg: &PipelineConfig,
    out_dir: &Path,
    verbose: bool,
) -> Result<RunOutcome, PipelineError> {
    let mut ws = Workspace::new(out_dir)?;
    match run_pipeline_inner(cfg, &mut ws, verbose) {
        Ok(outcome) => Ok(outcome),
        Err(e) => {
            ws.rollback();
            Err(e)
        }
    }
}

fn run_pipeline_inner(
    cfg: &PipelineConfig,
    ws: &mut Workspace,
    verbose: bool,
) -> Result<RunOutcome, PipelineError> {
    let mut clock = StageClock::new(verbose);

    let (street_doc, cand_doc) = clock.time("ingest", || stage_ingest(cfg))?;
    ws.write(STREET_FILE, &to_json(&street_doc)?)?;
    ws.write(CANDIDATE_FILE, &to_json(&cand_doc)?)?;

    let (solution_doc, feeder_doc) = clock.time("synth", || stage_synth(cfg, &cand_doc))?;
    ws.write(SOLUTION_FILE, &to_json(&solution_doc)?)?;
    ws.write(FEEDER_FILE, &to_json(&feeder_doc)?)?;

    let net = clock.time("electrify", || stage_electrify(cfg, &feeder_doc))?;
    if cfg.output.network_json {
        let json = to_network_json(&net, &feeder_doc.provenance)
            .map_err(|e| stage_err("electrify", e))?;
        ws.write(NETWORK_FILE, &json)?;
    }

    let pf_doc = clock.time("pf", || stage_pf(cfg, &net, &feeder_doc.provenance))?;
    ws.write(PF_FILE, &to_json(&pf_doc)?)?;

    let report = clock.time("report", || {
        stage_report(cfg, &street_doc, &feeder_doc, &net, &pf_doc)
    })?;
    for (name, content) in &report.files {
        ws.write(name, content)?;
    }

    let solution = &solution_doc.solution;
    let manifest = RunManifest {
        schema_version: SCHEMA_VERSION.to_string(),
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        config_digest: cfg.digest(),
        source_digest: cand_doc.provenance.source_digest.clone(),
        stages: clock.timings.clone(),
        solver: Some(SolverInfo {
            solver: cfg.synthesis.solver,
            objective: solution.objective,
            proven_optimal: solution.proven_optimal,
            gap: solution.gap,
        }),
    };
    ws.write(MANIFEST_FILE, &to_json(&manifest)?)?;

    // Exit 4: the exact solver hit its deadline and returned an unproven
    // incumbent; artifacts stay on disk.
    let exit_code = if cfg.synthesis.solver == SolverKind::Exact && !solution.proven_optimal {
        4
    } else {
        0
    };
    Ok(RunOutcome {
        summary_table: report.summary.to_text_table(),
        exit_code,
        manifest,
    })
}

/// `ingest` subcommand: input file → street.json + candidate.json.
pub fn cmd_ingest(cfg: &PipelineConfig, out_dir: &Path) -> Result<(), PipelineError> {
    let mut ws = Workspace::new(out_dir)?;
    let run = |ws: &mut Workspace| {
        let (street_doc, cand_doc) = stage_ingest(cfg)?;
        ws.write(STREET_FILE, &to_json(&street_doc)?)?;
        ws.write(CANDIDATE_FILE, &to_json(&cand_doc)?)
    };
    run(&mut ws).inspect_err(|_| ws.rollback())
}

/// `synth` subcommand: candidate.json → solution.json + feeder.json.
/// Returns 4 when the exact solver timed out on the way to its incumbent.
pub fn cmd_synth(
    cfg: &PipelineConfig,
    in_dir: &Path,
    out_dir: &Path,
) -> Result<i32, PipelineError> {
    let cand_doc: CandidateDocument =
        parse_doc(&Workspace::new(in_dir)?.read(CANDIDATE_FILE)?, CANDIDATE_FILE)?;
    let mut ws = Workspace::new(out_dir)?;
    let run = |ws: &mut Workspace| -> Result<i32, PipelineError> {
        let (solution_doc, feeder_doc) = stage_synth(cfg, &cand_doc)?;
        ws.write(SOLUTION_FILE, &to_json(&solution_doc)?)?;
        ws.write(FEEDER_FILE, &to_json(&feeder_doc)?)?;
        let timed_out =
            cfg.synthesis.solver == SolverKind::Exact && !solution_doc.solution.proven_optimal;
        Ok(if timed_out { 4 } else { 0 })
    };
    run(&mut ws).inspect_err(|_| ws.rollback())
}

/// `electrify` subcommand: feeder.json → network.json.
pub fn cmd_electrify(
    cfg: &PipelineConfig,
    in_dir: &Path,
    out_dir: &Path,
) -> Result<(), PipelineError> {
    let feeder_doc: FeederDocument =
        parse_doc(&Workspace::new(in_dir)?.read(FEEDER_FILE)?, FEEDER_FILE)?;
    let mut ws = Workspace::new(out_dir)?;
    let run = |ws: &mut Workspace| {
        let net = stage_electrify(cfg, &feeder_doc)?;
        let json =
            to_network_json(&net, &feeder_doc.provenance).map_err(|e| stage_err("electrify", e))?;
        ws.write(NETWORK_FILE, &json)
    };
    run(&mut ws).inspect_err(|_| ws.rollback())
}

/// `pf` subcommand: network.json → pf_results.json.
pub fn cmd_pf(cfg: &PipelineConfig, in_dir: &Path, out_dir: &Path) -> Result<(), PipelineError> {
    let raw = Workspace::new(in_dir)?.read(NETWORK_FILE)?;
    let doc = from_network_json::<f64>(&raw).map_err(|e| stage_err("pf", e))?;
    let mut ws = Workspace::new(out_dir)?;
    let run = |ws: &mut Workspace| {
        let pf_doc = stage_pf(cfg, &doc.network, &doc.provenance)?;
        ws.write(PF_FILE, &to_json(&pf_doc)?)
    };
    run(&mut ws).inspect_err(|_| ws.rollback())
}

/// `report` subcommand: street/feeder/network/pf_results → report files.
/// Returns the printed summary table.
pub fn cmd_report(
    cfg: &PipelineConfig,
    in_dir: &Path,
    out_dir: &Path,
) -> Result<String, PipelineError> {
    let input = Workspace::new(in_dir)?;
    let street_doc: StreetDocument = parse_doc(&input.read(STREET_FILE)?, STREET_FILE)?;
    let feeder_doc: FeederDocument = parse_doc(&input.read(FEEDER_FILE)?, FEEDER_FILE)?;
    let net_doc = from_network_json::<f64>(&input.read(NETWORK_FILE)?)
        .map_err(|e| stage_err("report", e))?;
    let pf_doc: PfDocument = parse_doc(&input.read(PF_FILE)?, PF_FILE)?;
    let mut ws = Workspace::new(out_dir)?;
    let run = |ws: &mut Workspace| {
        let report = stage_report(cfg, &street_doc, &feeder_doc, &net_doc.network, &pf_doc)?;
        for (name, content) in &report.files {
            ws.write(name, content)?;
        }
        Ok(report.summary.to_text_table())
    };
    run(&mut ws).inspect_err(|_| ws.rollback())
}
