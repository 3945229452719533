//! The pipeline's TOML configuration: one file parameterizes every stage,
//! with defaults for everything except the input path and the synthesis
//! source and required-node selection.

use crate::electrify::{LineTemplate, LoadAllocationConfig};
use crate::geograph::{ClassPenalties, NodeId, RoadClass, ScoringConfig, ScoringWeights};
use crate::synth::AlphaWeights;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    /// Seed for randomized fixtures and tests; the pipeline itself is
    /// deterministic and does not consume it.
    #[serde(default)]
    pub seed: u64,
    pub input: InputSection,
    #[serde(default)]
    pub scoring: ScoringSection,
    pub synthesis: SynthesisSection,
    #[serde(default)]
    pub electrify: ElectrifySection,
    #[serde(default)]
    pub powerflow: PowerflowSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputSection {
    /// Street network file, relative paths resolved against the config
    /// file's directory.
    pub path: PathBuf,
    pub format: InputFormat,
    /// Optional GeoJSON Point collection of activity locations, used for
    /// top-K required-node selection and activity-weighted allocation.
    #[serde(default)]
    pub activity_path: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum InputFormat {
    #[serde(rename = "geojson")]
    GeoJson,
    #[serde(rename = "osm-xml")]
    OsmXml,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScoringSection {
    pub lambda_d: f64,
    pub lambda_c: f64,
    pub lambda_b: f64,
    /// Road class → penalty; classes absent here are dropped at ingestion.
    pub class_penalties: BTreeMap<String, f64>,
}

impl Default for ScoringSection {
    fn default() -> Self {
        let weights = ScoringWeights::<f64>::default();
        let penalties = ClassPenalties::<f64>::default();
        ScoringSection {
            lambda_d: weights.lambda_d,
            lambda_c: weights.lambda_c,
            lambda_b: weights.lambda_b,
            class_penalties: penalties
                .0
                .into_iter()
                .map(|(c, p)| (c.as_str().to_string(), p))
                .collect(),
        }
    }
}

impl ScoringSection {
    pub fn to_scoring_config(&self) -> ScoringConfig<f64> {
        ScoringConfig {
            weights: ScoringWeights {
                lambda_d: self.lambda_d,
                lambda_c: self.lambda_c,
                lambda_b: self.lambda_b,
            },
            class_penalties: ClassPenalties(
                self.class_penalties
                    .iter()
                    .map(|(c, &p)| (RoadClass::new(c.clone()), p))
                    .collect(),
            ),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthesisSection {
    #[serde(default)]
    pub solver: SolverKind,
    #[serde(default = "default_timeout_s")]
    pub timeout_s: f64,
    #[serde(default = "default_alpha_geo")]
    pub alpha_geo: f64,
    #[serde(default = "default_alpha_top")]
    pub alpha_top: f64,
    #[serde(default = "default_alpha_elec")]
    pub alpha_elec: f64,
    pub source: SourceSelect,
    pub required: RequiredSelect,
}

fn default_timeout_s() -> f64 {
    120.0
}

fn default_alpha_geo() -> f64 {
    AlphaWeights::<f64>::default().alpha_geo
}

fn default_alpha_top() -> f64 {
    AlphaWeights::<f64>::default().alpha_top
}

fn default_alpha_elec() -> f64 {
    AlphaWeights::<f64>::default().alpha_elec
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverKind {
    #[default]
    Exact,
    Heuristic,
}

/// Exactly one of `node` (an id that must survive cleaning) or `coord`
/// (lon/lat, resolved to the nearest candidate node after simplification).
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SourceSelect {
    pub node: Option<i64>,
    pub coord: Option<[f64; 2]>,
}

/// Required nodes by explicit id, by coordinate, and/or as the top-K
/// activity nodes; the selections are unioned and at least one must be
/// given.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RequiredSelect {
    pub nodes: Vec<i64>,
    pub coords: Vec<[f64; 2]>,
    pub top_k: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ElectrifySection {
    pub slack_v_pu: f64,
    pub base_mva: f64,
    pub base_kv: f64,
    /// Total households apportioned over the feeder's load points.
    pub households: u32,
    pub templates: BTreeMap<String, TemplateSection>,
    pub allocation: AllocationSection,
}

impl Default for ElectrifySection {
    fn default() -> Self {
        ElectrifySection {
            slack_v_pu: 1.0,
            base_mva: 1.0,
            base_kv: 11.0,
            households: 0,
            templates: crate::electrify::default_templates::<f64>()
                .into_iter()
                .map(|(c, t)| {
                    (
                        c.as_str().to_string(),
                        TemplateSection {
                            r_per_km: t.r_per_km,
                            x_per_km: t.x_per_km,
                            rating_mva: t.rating_mva,
                        },
                    )
                })
                .collect(),
            allocation: AllocationSection::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TemplateSection {
    pub r_per_km: f64,
    pub x_per_km: f64,
    pub rating_mva: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AllocationSection {
    pub eta: f64,
    pub beta: f64,
    pub epsilon: f64,
    pub total_p_mw: f64,
    pub power_factor: f64,
    /// Per-bus power factor overrides, keyed by node id.
    pub power_factor_overrides: BTreeMap<String, f64>,
    /// Town/suburb centroids as lon/lat; required when beta > 0.
    pub centroids: Vec<[f64; 2]>,
    pub activity_radius_m: f64,
}

impl Default for AllocationSection {
    fn default() -> Self {
        let d = LoadAllocationConfig::<f64>::default();
        AllocationSection {
            eta: d.eta,
            // The centroid term is opt-in at the config level since
            // centroids default to none.
            beta: 0.0,
            epsilon: d.epsilon,
            total_p_mw: d.total_p_mw,
            power_factor: d.power_factor,
            power_factor_overrides: BTreeMap::new(),
            centroids: Vec::new(),
            activity_radius_m: d.activity_radius_m,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PowerflowSection {
    pub tol: f64,
    pub max_iter: usize,
    pub v_min: f64,
    /// Scenario name → load scale factor.
    pub factors: BTreeMap<String, f64>,
}

impl Default for PowerflowSection {
    fn default() -> Self {
        PowerflowSection {
            tol: 1e-8,
            max_iter: 100,
            v_min: 0.95,
            factors: crate::powerflow::default_scenarios(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub network_json: bool,
    pub opendss: bool,
    pub geojson: bool,
    pub overlay_svg: bool,
    pub voltage_profile_svg: bool,
    pub summary: bool,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection {
            network_json: true,
            opendss: true,
            geojson: true,
            overlay_svg: true,
            voltage_profile_svg: true,
            summary: true,
        }
    }
}

impl PipelineConfig {
    pub fn from_toml_str(raw: &str) -> Result<Self, ConfigError> {
        let cfg: PipelineConfig =
            toml::from_str(raw).map_err(|e| ConfigError(format!("config parse: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads and validates a config file, resolving its relative paths
    /// against the file's own directory.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let raw = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = Self::from_toml_str(&raw)?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        cfg.input.path = resolve(base, &cfg.input.path);
        cfg.input.activity_path = cfg.input.activity_path.map(|p| resolve(base, &p));
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let fail = |m: String| Err(ConfigError(m));
        match (self.synthesis.source.node, self.synthesis.source.coord) {
            (Some(_), Some(_)) => {
                return fail("synthesis.source: give either node or coord, not both".into())
            }
            (None, None) => {
                return fail("synthesis.source: one of node or coord is required".into())
            }
            _ => {}
        }
        let req = &self.synthesis.required;
        if req.nodes.is_empty() && req.coords.is_empty() && req.top_k.is_none() {
            return fail("synthesis.required: select nodes, coords, or top_k".into());
        }
        if req.top_k == Some(0) {
            return fail("synthesis.required.top_k must be positive".into());
        }
        if req.top_k.is_some() && self.input.activity_path.is_none() {
            return fail("synthesis.required.top_k needs input.activity_path".into());
        }
        if !(self.synthesis.timeout_s > 0.0) {
            return fail(format!(
                "synthesis.timeout_s must be positive, got {}",
                self.synthesis.timeout_s
            ));
        }
        self.alpha_weights()
            .validate()
            .map_err(|e| ConfigError(format!("synthesis: {e}")))?;
        self.scoring
            .to_scoring_config()
            .weights
            .validate()
            .map_err(|e| ConfigError(format!("scoring: {e}")))?;
        self.scoring
            .to_scoring_config()
            .class_penalties
            .validate()
            .map_err(|e| ConfigError(format!("scoring: {e}")))?;
        for (class, t) in &self.electrify.templates {
            self.template_of(class, t)
                .validate(&RoadClass::new(class.clone()))
                .map_err(|e| ConfigError(format!("electrify.templates: {e}")))?;
        }
        let e = &self.electrify;
        for (name, v) in [
            ("slack_v_pu", e.slack_v_pu),
            ("base_mva", e.base_mva),
            ("base_kv", e.base_kv),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return fail(format!("electrify.{name} must be positive, got {v}"));
            }
        }
        self.allocation_config()?
            .validate()
            .map_err(|e| ConfigError(format!("electrify.allocation: {e}")))?;
        if self.electrify.allocation.beta != 0.0 && self.electrify.allocation.centroids.is_empty() {
            return fail("electrify.allocation: beta > 0 needs at least one centroid".into());
        }
        let p = &self.powerflow;
        if !(p.tol > 0.0) || !p.tol.is_finite() {
            return fail(format!("powerflow.tol must be positive, got {}", p.tol));
        }
        if p.max_iter == 0 {
            return fail("powerflow.max_iter must be positive".into());
        }
        if !(p.v_min > 0.0 && p.v_min < self.electrify.slack_v_pu) {
            return fail(format!(
                "powerflow.v_min must sit in (0, slack_v_pu), got {}",
                p.v_min
            ));
        }
        if p.factors.is_empty() {
            return fail("powerflow.factors must name at least one scenario".into());
        }
        for (name, &f) in &p.factors {
            if !f.is_finite() || f < 0.0 {
                return fail(format!("powerflow.factors.{name} must be >= 0, got {f}"));
            }
        }
        Ok(())
    }

    pub fn alpha_weights(&self) -> AlphaWeights<f64> {
        AlphaWeights {
            alpha_geo: self.synthesis.alpha_geo,
            alpha_top: self.synthesis.alpha_top,
            alpha_elec: self.synthesis.alpha_elec,
        }
    }

    fn template_of(&self, _class: &str, t: &TemplateSection) -> LineTemplate<f64> {
        LineTemplate {
            r_per_km: t.r_per_km,
            x_per_km: t.x_per_km,
            rating_mva: t.rating_mva,
        }
    }

    pub fn line_templates(&self) -> BTreeMap<RoadClass, LineTemplate<f64>> {
        self.electrify
            .templates
            .iter()
            .map(|(c, t)| (RoadClass::new(c.clone()), self.template_of(c, t)))
            .collect()
    }

    /// The allocation config with centroids still unprojected (the pipeline
    /// projects them into the street frame before use).
    pub fn allocation_config(&self) -> Result<LoadAllocationConfig<f64>, ConfigError> {
        let a = &self.electrify.allocation;
        let mut overrides = BTreeMap::new();
        for (key, &pf) in &a.power_factor_overrides {
            let id: i64 = key.parse().map_err(|_| {
                ConfigError(format!(
                    "electrify.allocation.power_factor_overrides: key '{key}' is not a node id"
                ))
            })?;
            overrides.insert(NodeId(id), pf);
        }
        Ok(LoadAllocationConfig {
            eta: a.eta,
            beta: a.beta,
            epsilon: a.epsilon,
            total_p_mw: a.total_p_mw,
            power_factor: a.power_factor,
            power_factor_overrides: overrides,
            centroids: a
                .centroids
                .iter()
                .map(|&[lon, lat]| crate::geograph::GeoPoint::new(lon, lat))
                .collect(),
            activity_radius_m: a.activity_radius_m,
        })
    }

    /// Digest of the canonical (JSON) form of the parsed config, stable
    /// under TOML reformatting and comments.
    pub fn digest(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serializes");
        crate::export::sha256_hex(canonical.as_bytes())
    }
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct ConfigError(pub String);
