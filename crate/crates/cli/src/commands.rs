//! The five subcommands. Each returns the rendered report text.

use serde::Serialize;
use surprisal_core::anomaly::Detector;
use surprisal_core::conviction::{case_phis, similarity_conviction_with_phis, ConvictionReport, FamiliarityIndex};
use surprisal_core::data::{load_dataset, load_queries, QueryTable, Schema};
use surprisal_core::learners::{predict_with_explanation, Prediction};
use surprisal_core::metrics::f1_binary;
use surprisal_core::residuals::{fit_residuals_iterative, ResidualFit};
use surprisal_core::{Dataset, DistanceConfig, FeatureKind};

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::evaluate::{evaluate, fit_options};
use crate::report::{eval_csv, render, write_text};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Fit,
    Predict,
    Evaluate,
    Detect,
    Explain,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Fit => "fit",
            Command::Predict => "predict",
            Command::Evaluate => "evaluate",
            Command::Detect => "detect",
            Command::Explain => "explain",
        }
    }
}

pub fn load(cfg: &RunConfig) -> CliResult<Dataset> {
    let schema = Schema::from_path(&cfg.schema)?;
    Ok(load_dataset(&cfg.data, &schema)?)
}

/// Run one command and return its report.
pub fn run(command: Command, cfg: &RunConfig) -> CliResult<String> {
    cfg.validate()?;
    let dataset = load(cfg)?;
    let text = match command {
        Command::Fit => render("fit", cfg, fit_summary(&dataset, cfg)?)?,
        Command::Evaluate => {
            let report = evaluate(&dataset, cfg)?;
            if let Some(path) = &cfg.csv {
                write_text(path, &eval_csv(&report)?)?;
            }
            render("evaluate", cfg, report)?
        }
        Command::Predict => render("predict", cfg, predictions(&dataset, cfg)?)?,
        Command::Detect => render("detect", cfg, detections(&dataset, cfg)?)?,
        Command::Explain => render("explain", cfg, explanations(&dataset, cfg)?)?,
    };
    Ok(text)
}

fn fit_model(dataset: &Dataset, cfg: &RunConfig) -> CliResult<(ResidualFit, usize)> {
    let opts = fit_options(cfg, dataset.len(), cfg.seed);
    Ok((fit_residuals_iterative(dataset, &opts)?, opts.k))
}

#[derive(Debug, Serialize)]
pub struct FeatureSummary {
    pub name: String,
    pub kind: &'static str,
    pub residual: f64,
    pub scale: f64,
    pub weight: f64,
}

#[derive(Debug, Serialize)]
pub struct FitSummary {
    pub n_cases: usize,
    pub k: usize,
    pub p: f64,
    pub iterations_run: usize,
    pub converged: bool,
    pub history: Vec<f64>,
    pub features: Vec<FeatureSummary>,
}

pub fn fit_summary(dataset: &Dataset, cfg: &RunConfig) -> CliResult<FitSummary> {
    let (fit, k) = fit_model(dataset, cfg)?;
    let metric = fit.metric(dataset, cfg.p)?;
    let features = dataset
        .specs()
        .iter()
        .enumerate()
        .map(|(i, s)| FeatureSummary {
            name: s.name.clone(),
            kind: match s.kind {
                FeatureKind::Continuous => "continuous",
                FeatureKind::Nominal(_) => "nominal",
                FeatureKind::Ordinal(_) => "ordinal",
            },
            residual: fit.residuals[i],
            scale: metric.scales()[i],
            weight: fit.weights[i],
        })
        .collect();
    Ok(FitSummary {
        n_cases: dataset.len(),
        k,
        p: cfg.p,
        iterations_run: fit.iterations_run,
        converged: fit.converged,
        history: fit.history,
        features,
    })
}

/// Metric for scoring query rows: the target is masked when the dataset has
/// one and the query file does not supply it.
fn query_metric(dataset: &Dataset, metric: DistanceConfig, table: &QueryTable) -> CliResult<DistanceConfig> {
    match dataset.target() {
        Some(t) if !table.has_target => Ok(metric.without_feature(t)?),
        _ => Ok(metric),
    }
}

#[derive(Debug, Serialize)]
pub struct PredictionRow {
    pub row: usize,
    #[serde(flatten)]
    pub prediction: Prediction,
}

pub fn predictions(dataset: &Dataset, cfg: &RunConfig) -> CliResult<Vec<PredictionRow>> {
    if dataset.target().is_none() {
        return Err(CliError::Config("predict needs a target column in the schema".into()));
    }
    let table = load_queries(cfg.require_queries()?, dataset, None)?;
    let (fit, k) = fit_model(dataset, cfg)?;
    let metric = fit.metric(dataset, cfg.p)?;
    table
        .rows
        .iter()
        .enumerate()
        .map(|(row, q)| {
            let prediction = predict_with_explanation(dataset, q, k, &metric, Some(&fit.case_errors))?;
            Ok(PredictionRow { row: row + 1, prediction })
        })
        .collect()
}

#[derive(Debug, Serialize)]
pub struct DetectionRow {
    pub row: usize,
    pub score: f64,
    pub is_anomaly: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub truth: Option<bool>,
}

#[derive(Debug, Serialize)]
pub struct DetectionReport {
    pub k: usize,
    pub n_flagged: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub f1: Option<f64>,
    pub rows: Vec<DetectionRow>,
}

fn parse_flag(token: &str, row: usize, column: &str) -> CliResult<bool> {
    match token.trim().to_ascii_lowercase().as_str() {
        "1" | "true" | "yes" | "anomaly" | "outlier" => Ok(true),
        "0" | "false" | "no" | "normal" | "inlier" => Ok(false),
        other => Err(CliError::Data(format!("row {row}, column '{column}': cannot read '{other}' as an anomaly flag"))),
    }
}

pub fn detections(dataset: &Dataset, cfg: &RunConfig) -> CliResult<DetectionReport> {
    let table = load_queries(cfg.require_queries()?, dataset, cfg.truth.as_deref())?;
    let truth = match (&cfg.truth, &table.extra) {
        (Some(col), Some(tokens)) => Some(
            tokens
                .iter()
                .enumerate()
                .map(|(i, t)| parse_flag(t, i + 1, col))
                .collect::<CliResult<Vec<bool>>>()?,
        ),
        _ => None,
    };
    let (fit, k) = fit_model(dataset, cfg)?;
    let metric = query_metric(dataset, fit.metric(dataset, cfg.p)?, &table)?;
    let detector = Detector::new(dataset, &metric, k, cfg.mode, cfg.threshold)?;
    let verdicts = table.rows.iter().map(|q| detector.detect(q)).collect::<Result<Vec<_>, _>>()?;
    let flags: Vec<bool> = verdicts.iter().map(|v| v.is_anomaly).collect();
    let f1 = truth.as_ref().map(|t| f1_binary(t, &flags)).transpose()?;
    let rows = verdicts
        .iter()
        .enumerate()
        .map(|(i, v)| DetectionRow { row: i + 1, score: v.score, is_anomaly: v.is_anomaly, truth: truth.as_ref().map(|t| t[i]) })
        .collect();
    Ok(DetectionReport { k, n_flagged: flags.iter().filter(|&&f| f).count(), f1, rows })
}

#[derive(Debug, Serialize)]
pub struct ExplanationRow {
    pub row: usize,
    #[serde(flatten)]
    pub conviction: ConvictionReport,
}

pub fn explanations(dataset: &Dataset, cfg: &RunConfig) -> CliResult<Vec<ExplanationRow>> {
    let table = load_queries(cfg.require_queries()?, dataset, None)?;
    let (fit, k) = fit_model(dataset, cfg)?;
    let metric = query_metric(dataset, fit.metric(dataset, cfg.p)?, &table)?;
    let phis = case_phis(dataset, &metric, k)?;
    let index = FamiliarityIndex::build(dataset, &metric, k)?;
    table
        .rows
        .iter()
        .enumerate()
        .map(|(i, q)| {
            let mut conviction = similarity_conviction_with_phis(dataset, q, k, &metric, &phis)?;
            conviction.pi_f = Some(index.query_conviction(dataset, q, &metric)?);
            Ok(ExplanationRow { row: i + 1, conviction })
        })
        .collect()
}
