//! End-to-end pipeline: ingest → score → scale → PCA → choose K → cluster →
//! evaluate → report, driven by a JSON config.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evaluate::{self, DistortionCurve, SilhouetteReport};
use crate::kmeans::{self, ClusteringResult, KMeansParams};
use crate::matrix::FeatureMatrix;
use crate::pca::{self, ComponentSelection, PcaModel};
use crate::preprocess::{ScalerKind, ScalerModel};
use crate::profile::{self, Report, ReportMetadata};
use crate::survey::{self, LikertMatrix, ScaleDefinition, ScoreMatrix};

pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_K_RANGE: (usize, usize) = (2, 10);

/// What the respondents are clustered on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureMode {
    /// Raw item answers.
    #[default]
    Answers,
    /// Subscale scores.
    Scores,
}

impl FeatureMode {
    /// 0.70 for answers and 0.75 for scores.
    pub fn default_variance_threshold(self) -> f64 {
        match self {
            FeatureMode::Answers => 0.70,
            FeatureMode::Scores => 0.75,
        }
    }
}

impl std::fmt::Display for FeatureMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            FeatureMode::Answers => "answers",
            FeatureMode::Scores => "scores",
        })
    }
}

impl std::str::FromStr for FeatureMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "answers" => Ok(FeatureMode::Answers),
            "scores" => Ok(FeatureMode::Scores),
            other => Err(Error::config(
                "feature_mode",
                format!("unknown mode '{other}'"),
            )),
        }
    }
}

fn default_id_column() -> String {
    "respondent_id".into()
}

fn default_seed() -> u64 {
    DEFAULT_SEED
}

fn default_restarts() -> usize {
    KMeansParams::default().restarts
}

fn default_max_iter() -> usize {
    KMeansParams::default().max_iter
}

fn default_tol() -> f64 {
    KMeansParams::default().tol
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub input_path: PathBuf,
    #[serde(default = "default_id_column")]
    pub id_column: String,
    /// Scale definition files. Empty means the bundled placeholder scales.
    #[serde(default)]
    pub scale_definition_paths: Vec<PathBuf>,
    #[serde(default)]
    pub feature_mode: FeatureMode,
    #[serde(default = "zscore")]
    pub scaler: ScalerKind,
    /// Defaults by feature mode when unset.
    #[serde(default)]
    pub variance_threshold: Option<f64>,
    /// Keep exactly this many components instead of using a threshold.
    #[serde(default)]
    pub pca_components: Option<usize>,
    #[serde(default)]
    pub k: Option<usize>,
    #[serde(default)]
    pub k_range: Option<(usize, usize)>,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_restarts")]
    pub restarts: usize,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default = "default_tol")]
    pub tol: f64,
    pub output_dir: PathBuf,
}

fn zscore() -> ScalerKind {
    ScalerKind::Zscore
}

impl PipelineConfig {
    /// A config with every optional field at its default.
    pub fn new(input_path: impl Into<PathBuf>, output_dir: impl Into<PathBuf>) -> Self {
        Self {
            input_path: input_path.into(),
            id_column: default_id_column(),
            scale_definition_paths: Vec::new(),
            feature_mode: FeatureMode::default(),
            scaler: ScalerKind::Zscore,
            variance_threshold: None,
            pca_components: None,
            k: None,
            k_range: None,
            seed: DEFAULT_SEED,
            restarts: default_restarts(),
            max_iter: default_max_iter(),
            tol: default_tol(),
            output_dir: output_dir.into(),
        }
    }

    /// Reads a JSON config. Relative paths inside it are resolved against the
    /// config file's directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config("config", format!("cannot read {}: {e}", path.display())))?;
        let mut config: Self = serde_json::from_str(&text)
            .map_err(|e| Error::config("config", format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        let resolve = |p: &mut PathBuf| {
            if p.is_relative() && !p.as_os_str().is_empty() {
                *p = base.join(&*p);
            }
        };
        resolve(&mut config.input_path);
        resolve(&mut config.output_dir);
        config.scale_definition_paths.iter_mut().for_each(resolve);
        Ok(config)
    }

    pub fn effective_threshold(&self) -> f64 {
        self.variance_threshold
            .unwrap_or_else(|| self.feature_mode.default_variance_threshold())
    }

    pub fn component_selection(&self) -> ComponentSelection {
        match self.pca_components {
            Some(m) => ComponentSelection::Fixed(m),
            None => ComponentSelection::VarianceThreshold(self.effective_threshold()),
        }
    }

    pub fn clustering_plan(&self) -> ClusterPlan {
        match (self.k, self.k_range) {
            (Some(k), _) => ClusterPlan::Fixed(k),
            (None, Some((lo, hi))) => ClusterPlan::Sweep(lo, hi),
            (None, None) => ClusterPlan::Sweep(DEFAULT_K_RANGE.0, DEFAULT_K_RANGE.1),
        }
    }

    pub fn kmeans_params(&self) -> KMeansParams {
        KMeansParams {
            seed: self.seed,
            restarts: self.restarts,
            max_iter: self.max_iter,
            tol: self.tol,
        }
    }
}

/// How K is chosen for the final clustering.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClusterPlan {
    Fixed(usize),
    /// Sweep `min..=max` and take the elbow.
    Sweep(usize, usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub field: String,
    pub reason: String,
}

impl std::fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.field, self.reason)
    }
}

/// Checks every precondition of [`run`]; an empty list means the config is
/// runnable.
pub fn validate(config: &PipelineConfig) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let mut bad = |field: &str, reason: String| {
        out.push(Diagnostic {
            field: field.into(),
            reason,
        })
    };

    if config.input_path.as_os_str().is_empty() {
        bad("input_path", "must not be empty".into());
    } else if !config.input_path.is_file() {
        bad(
            "input_path",
            format!("{} is not a readable file", config.input_path.display()),
        );
    }
    if config.id_column.is_empty() {
        bad("id_column", "must not be empty".into());
    }
    for (i, p) in config.scale_definition_paths.iter().enumerate() {
        let field = format!("scale_definition_paths[{i}]");
        if p.as_os_str().is_empty() {
            bad(&field, "must not be empty".into());
        } else if !p.is_file() {
            bad(&field, format!("{} is not a readable file", p.display()));
        }
    }
    if let Some(t) = config.variance_threshold {
        if !(t > 0.0 && t <= 1.0) {
            bad("variance_threshold", format!("{t} is outside (0, 1]"));
        }
        if config.pca_components.is_some() {
            bad(
                "pca_components",
                "set either pca_components or variance_threshold, not both".into(),
            );
        }
    }
    if config.pca_components == Some(0) {
        bad("pca_components", "must be at least 1".into());
    }
    match (config.k, config.k_range) {
        (Some(_), Some(_)) => bad("k", "set either k or k_range, not both".into()),
        (Some(k), None) if k < 2 => bad(
            "k",
            format!("{k} is too small; the silhouette needs at least 2 clusters"),
        ),
        (None, Some((lo, hi))) if lo < 1 || hi < lo + 2 => bad(
            "k_range",
            format!("[{lo}, {hi}] must start at 1 or more and span at least 3 values"),
        ),
        _ => {}
    }
    if config.restarts == 0 {
        bad("restarts", "must be at least 1".into());
    }
    if config.max_iter == 0 {
        bad("max_iter", "must be at least 1".into());
    }
    if !(config.tol >= 0.0 && config.tol.is_finite()) {
        bad("tol", format!("{} must be finite and >= 0", config.tol));
    }
    if config.output_dir.as_os_str().is_empty() {
        bad("output_dir", "must not be empty".into());
    }
    out
}

fn check(config: &PipelineConfig) -> Result<()> {
    let diags = validate(config);
    if diags.is_empty() {
        return Ok(());
    }
    Err(Error::Config {
        field: diags[0].field.clone(),
        reason: diags
            .iter()
            .enumerate()
            .map(|(i, d)| {
                if i == 0 {
                    d.reason.clone()
                } else {
                    d.to_string()
                }
            })
            .collect::<Vec<_>>()
            .join("; "),
    })
}

fn stage<T>(name: &'static str, r: Result<T>) -> Result<T> {
    r.map_err(|e| Error::Stage {
        stage: name,
        source: Box::new(e),
    })
}

/// Everything up to and including scoring.
#[derive(Debug, Clone)]
pub struct Scored {
    pub scales: Vec<ScaleDefinition>,
    pub answers: LikertMatrix,
    pub scores: ScoreMatrix,
}

/// Scored data plus the scaler and PCA fitted on the selected features.
#[derive(Debug, Clone)]
pub struct Reduced {
    pub scored: Scored,
    pub scaler: ScalerModel,
    pub pca: PcaModel,
    pub projected: FeatureMatrix,
}

pub fn load_scales(config: &PipelineConfig) -> Result<Vec<ScaleDefinition>> {
    if config.scale_definition_paths.is_empty() {
        return Ok(survey::default_scales());
    }
    config
        .scale_definition_paths
        .iter()
        .map(ScaleDefinition::load)
        .collect()
}

pub fn run_scoring(config: &PipelineConfig) -> Result<Scored> {
    check(config)?;
    let scales = stage("ingest", load_scales(config))?;
    let answers = stage(
        "ingest",
        survey::parse_csv(&config.input_path, &config.id_column, &scales),
    )?;
    let scores = stage("score", survey::score(&answers, &scales))?;
    Ok(Scored {
        scales,
        answers,
        scores,
    })
}

pub fn run_reduction(config: &PipelineConfig) -> Result<Reduced> {
    let scored = run_scoring(config)?;
    let features = match config.feature_mode {
        FeatureMode::Answers => scored.answers.to_features(),
        FeatureMode::Scores => scored.scores.to_features(),
    };
    let scaler = stage("scale", ScalerModel::fit(config.scaler, &features))?;
    let scaled = stage("scale", scaler.transform(&features))?;
    let pca = stage("pca", pca::fit_with(&scaled, config.component_selection()))?;
    let projected = stage("pca", pca::project(&pca, &scaled))?;
    Ok(Reduced {
        scored,
        scaler,
        pca,
        projected,
    })
}

pub fn run_sweep(
    config: &PipelineConfig,
    reduced: &Reduced,
    range: (usize, usize),
) -> Result<DistortionCurve> {
    let mut curve = stage(
        "sweep",
        evaluate::sweep(
            &reduced.projected,
            range.0,
            range.1,
            &config.kmeans_params(),
        ),
    )?;
    stage("sweep", evaluate::find_elbow(&mut curve))?;
    Ok(curve)
}

/// Outcome of a full pipeline run, held in memory.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub reduced: Reduced,
    pub curve: Option<DistortionCurve>,
    pub clustering: ClusteringResult,
    pub silhouette: SilhouetteReport,
    pub report: Report,
}

impl RunOutput {
    /// Artifact file names and their contents, in write order.
    pub fn artifacts(&self) -> Result<Vec<(&'static str, Vec<u8>)>> {
        let csv_bytes = |f: &dyn Fn(&mut Vec<u8>) -> std::result::Result<(), csv::Error>| {
            let mut buf = Vec::new();
            f(&mut buf).map_err(|e| Error::Csv {
                path: "<artifact>".into(),
                source: e,
            })?;
            Ok::<_, Error>(buf)
        };

        let mut files = vec![
            (
                "scores.csv",
                csv_bytes(&|b| self.reduced.scored.scores.write_csv(b))?,
            ),
            ("scaler.json", to_pretty_json(&self.reduced.scaler)),
            ("pca.json", to_pretty_json(&self.reduced.pca)),
            (
                "scree.csv",
                csv_bytes(&|b| self.reduced.pca.write_scree_csv(b))?,
            ),
        ];
        if let Some(curve) = &self.curve {
            files.push(("elbow.csv", csv_bytes(&|b| curve.write_csv(b))?));
        }
        files.push((
            "assignments.csv",
            csv_bytes(&|b| {
                self.clustering
                    .write_assignments_csv(self.reduced.projected.row_ids(), b)
            })?,
        ));
        files.push(("silhouette.json", to_pretty_json(&self.silhouette)));
        files.push(("report.json", self.report.to_json().into_bytes()));
        files.push(("report.txt", self.report.to_text().into_bytes()));
        Ok(files)
    }
}

/// Pretty JSON with a trailing newline, as written for every JSON artifact.
pub fn to_pretty_json<T: Serialize>(value: &T) -> Vec<u8> {
    let mut v = serde_json::to_vec_pretty(value).expect("artifact serializes");
    v.push(b'\n');
    v
}

/// Runs every stage in memory without touching the output directory.
pub fn compute(config: &PipelineConfig) -> Result<RunOutput> {
    let reduced = run_reduction(config)?;
    log::info!(
        "{} respondents, {} features reduced to {} components",
        reduced.projected.nrows(),
        reduced.pca.dim(),
        reduced.pca.n_components()
    );
    let (k, curve) = match config.clustering_plan() {
        ClusterPlan::Fixed(k) => (k, None),
        ClusterPlan::Sweep(lo, hi) => {
            let curve = run_sweep(config, &reduced, (lo, hi))?;
            (curve.elbow_k.expect("find_elbow sets elbow_k"), Some(curve))
        }
    };
    let clustering = stage(
        "cluster",
        kmeans::fit(&reduced.projected, k, &config.kmeans_params()),
    )?;
    log::info!(
        "K = {k}: inertia {:.4} after {} iterations",
        clustering.inertia,
        clustering.iterations
    );
    let silhouette = stage(
        "evaluate",
        evaluate::silhouette(&reduced.projected, &clustering.assignments),
    )?;

    let scores = &reduced.scored.scores;
    let profiles = stage(
        "profile",
        profile::profile_clusters(scores, &clustering.assignments, k, &reduced.scored.scales),
    )?;
    let distribution = profile::distribution(&clustering.assignments, k);
    let descriptive = stage("profile", profile::describe(scores))?;
    let metadata = ReportMetadata {
        seed: config.seed,
        restarts: config.restarts,
        feature_mode: config.feature_mode.to_string(),
        scaler: config.scaler.to_string(),
        pca_components: reduced.pca.n_components(),
        pca_cumulative_ratio: *reduced.pca.cumulative_ratio.last().expect("m >= 1"),
        k,
        k_source: if curve.is_some() { "elbow" } else { "fixed" }.into(),
        silhouette_mean: silhouette.mean,
        silhouette_space: format!("pca ({} components)", reduced.pca.n_components()),
        respondents: scores.nrows(),
    };
    let report = profile::render_report(
        profiles,
        distribution,
        descriptive,
        &silhouette,
        curve.clone(),
        metadata,
    );
    Ok(RunOutput {
        reduced,
        curve,
        clustering,
        silhouette,
        report,
    })
}

/// Writes `files` into `dir`; if any write fails the files already written
/// by this call are removed.
pub fn write_artifacts(dir: &Path, files: &[(&str, Vec<u8>)]) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();
    for (name, bytes) in files {
        let path = dir.join(name);
        if let Err(e) = std::fs::write(&path, bytes) {
            for p in &written {
                let _ = std::fs::remove_file(p);
            }
            let _ = std::fs::remove_file(&path);
            return Err(Error::io(path, e));
        }
        written.push(path);
    }
    Ok(written)
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub k: usize,
    pub elbow_k: Option<usize>,
    pub pca_components: usize,
    pub silhouette_mean: f64,
    pub artifacts: Vec<PathBuf>,
}

/// Full pipeline run: compute everything, then write the artifacts.
pub fn run(config: &PipelineConfig) -> Result<RunSummary> {
    let output = compute(config)?;
    let files = output.artifacts()?;
    let artifacts = stage("write", write_artifacts(&config.output_dir, &files))?;
    Ok(RunSummary {
        k: output.clustering.k(),
        elbow_k: output.curve.as_ref().and_then(|c| c.elbow_k),
        pca_components: output.reduced.pca.n_components(),
        silhouette_mean: output.silhouette.mean,
        artifacts,
    })
}
