//! Report assembly: per-task rows with per-seed medians and ensemble
//! results, group averages, and rendering to a text table, JSON, or TSV.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::{median_report, Metric};

/// One task's results across model runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskResult {
    pub task: String,
    pub group: String,
    pub metric: Metric,
    /// Metric value per seed/model, in input order.
    pub per_seed: Vec<f64>,
    pub median: f64,
    pub stddev: f64,
    /// Metric of the score-averaged ensemble, when more than one run.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ensemble: Option<f64>,
}

impl TaskResult {
    pub fn new(
        task: impl Into<String>,
        group: impl Into<String>,
        metric: Metric,
        per_seed: Vec<f64>,
        ensemble: Option<f64>,
    ) -> Result<Self> {
        let summary = median_report(&per_seed)?;
        Ok(TaskResult {
            task: task.into(),
            group: group.into(),
            metric,
            per_seed,
            median: summary.median,
            stddev: summary.stddev,
            ensemble,
        })
    }
}

/// Whole-suite report: per-task rows plus group and overall averages of the
/// median (and ensemble, when present) columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub tasks: Vec<TaskResult>,
    pub group_median_avg: BTreeMap<String, f64>,
    pub group_ensemble_avg: BTreeMap<String, f64>,
    pub overall_median_avg: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub overall_ensemble_avg: Option<f64>,
}

impl EvalReport {
    pub fn from_tasks(tasks: Vec<TaskResult>) -> Result<Self> {
        if tasks.is_empty() {
            return Err(Error::InvalidInput("report needs at least one task".into()));
        }
        let mut group_median: BTreeMap<String, Vec<f64>> = BTreeMap::new();
        let mut group_ensemble: BTreeMap<String, Vec<f64>> = BTreeMap::new();
        for task in &tasks {
            group_median
                .entry(task.group.clone())
                .or_default()
                .push(task.median);
            if let Some(e) = task.ensemble {
                group_ensemble.entry(task.group.clone()).or_default().push(e);
            }
        }
        let avg = |values: &[f64]| values.iter().sum::<f64>() / values.len() as f64;
        let group_median_avg = group_median
            .iter()
            .map(|(g, v)| (g.clone(), avg(v)))
            .collect();
        let group_ensemble_avg = group_ensemble
            .iter()
            .map(|(g, v)| (g.clone(), avg(v)))
            .collect();
        let overall_median_avg = avg(&tasks.iter().map(|t| t.median).collect::<Vec<_>>());
        let ensembles: Vec<f64> = tasks.iter().filter_map(|t| t.ensemble).collect();
        let overall_ensemble_avg = if ensembles.len() == tasks.len() {
            Some(avg(&ensembles))
        } else {
            None
        };
        Ok(EvalReport {
            tasks,
            group_median_avg,
            group_ensemble_avg,
            overall_median_avg,
            overall_ensemble_avg,
        })
    }

    /// Plain-text table: one row per task, then group and overall averages.
    pub fn render_table(&self) -> String {
        let mut out = String::new();
        let has_ensemble = self.tasks.iter().any(|t| t.ensemble.is_some());
        let multi_seed = self.tasks.iter().any(|t| t.per_seed.len() > 1);
        out.push_str(&format!(
            "{:<16} {:<12} {:<12} {:>8}",
            "task", "group", "metric", "median"
        ));
        if multi_seed {
            out.push_str(&format!(" {:>8}", "stddev"));
        }
        if has_ensemble {
            out.push_str(&format!(" {:>8}", "ensemble"));
        }
        out.push('\n');
        for task in &self.tasks {
            out.push_str(&format!(
                "{:<16} {:<12} {:<12} {:>8.4}",
                task.task, task.group, task.metric, task.median
            ));
            if multi_seed {
                out.push_str(&format!(" {:>8.4}", task.stddev));
            }
            if let Some(e) = task.ensemble {
                out.push_str(&format!(" {:>8.4}", e));
            } else if has_ensemble {
                out.push_str(&format!(" {:>8}", "-"));
            }
            out.push('\n');
        }
        for (group, value) in &self.group_median_avg {
            out.push_str(&format!("avg[{group}] median={value:.4}"));
            if let Some(e) = self.group_ensemble_avg.get(group) {
                out.push_str(&format!(" ensemble={e:.4}"));
            }
            out.push('\n');
        }
        out.push_str(&format!("avg[all] median={:.4}", self.overall_median_avg));
        if let Some(e) = self.overall_ensemble_avg {
            out.push_str(&format!(" ensemble={e:.4}"));
        }
        out.push('\n');
        out
    }
}

/// Confusion matrix as TSV with label names on both axes.
pub fn render_confusion_tsv(counts: &[u64], labels: &[String]) -> String {
    let m = labels.len();
    debug_assert_eq!(counts.len(), m * m);
    let mut out = String::new();
    out.push_str("gold\\pred");
    for label in labels {
        out.push('\t');
        out.push_str(label);
    }
    out.push('\n');
    for (g, label) in labels.iter().enumerate() {
        out.push_str(label);
        for p in 0..m {
            out.push('\t');
            out.push_str(&counts[g * m + p].to_string());
        }
        out.push('\n');
    }
    out
}
