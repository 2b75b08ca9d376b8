//! Repeated split/fit/score evaluation over a list of seeds.

use rayon::prelude::*;
use surprisal_core::learners::{classify, default_k, regress};
use surprisal_core::metrics::{classification_metrics, regression_metrics, EvalReport, MetricRow, Task};
use surprisal_core::residuals::{fit_residuals_iterative, FitOptions};
use surprisal_core::Dataset;

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::split::train_test_split;

pub fn task_of(dataset: &Dataset) -> CliResult<Task> {
    let t = dataset
        .target()
        .ok_or_else(|| CliError::Config("evaluate needs a target column in the schema".into()))?;
    Ok(if dataset.specs()[t].kind.is_continuous() { Task::Regression } else { Task::Classification })
}

pub fn fit_options(cfg: &RunConfig, n_train: usize, seed: u64) -> FitOptions {
    FitOptions {
        p: cfg.p,
        max_iter: cfg.iters,
        tol: cfg.tol,
        sample: cfg.sample,
        seed,
        ..FitOptions::new(cfg.k.unwrap_or_else(|| default_k(n_train)))
    }
}

/// Split with `seed`, fit on the training part, score the held-out part.
pub fn evaluate_seed(dataset: &Dataset, cfg: &RunConfig, seed: u64) -> CliResult<MetricRow> {
    let task = task_of(dataset)?;
    let target = dataset.target().expect("checked by task_of");
    let split = train_test_split(dataset, cfg.split, seed)?;
    let train = dataset.subset(&split.train);
    let opts = fit_options(cfg, train.len(), seed);
    let fit = fit_residuals_iterative(&train, &opts)?;
    let metric = fit.metric(&train, cfg.p)?;

    let queries: Vec<Vec<f64>> = split
        .test
        .iter()
        .map(|&id| {
            let mut q = dataset.row(id).to_vec();
            q[target] = f64::NAN;
            q
        })
        .collect();
    match task {
        Task::Classification => {
            let truth: Vec<usize> = split.test.iter().map(|&id| dataset.row(id)[target] as usize).collect();
            let predicted = queries
                .iter()
                .map(|q| Ok(classify(&train, q, opts.k, &metric)?.code as usize))
                .collect::<CliResult<Vec<_>>>()?;
            Ok(MetricRow::classification(seed, &classification_metrics(&truth, &predicted)?))
        }
        _ => {
            let truth: Vec<f64> = split.test.iter().map(|&id| dataset.row(id)[target]).collect();
            let predicted = queries
                .iter()
                .map(|q| Ok(regress(&train, q, opts.k, &metric)?.code))
                .collect::<CliResult<Vec<_>>>()?;
            Ok(MetricRow::regression(seed, &regression_metrics(&truth, &predicted)?))
        }
    }
}

/// Evaluate every seed (in parallel) and aggregate in seed-list order.
pub fn evaluate(dataset: &Dataset, cfg: &RunConfig) -> CliResult<EvalReport> {
    cfg.validate()?;
    let task = task_of(dataset)?;
    let rows = cfg
        .seeds
        .par_iter()
        .map(|&seed| evaluate_seed(dataset, cfg, seed))
        .collect::<CliResult<Vec<_>>>()?;
    Ok(EvalReport::from_rows(task, rows)?)
}
