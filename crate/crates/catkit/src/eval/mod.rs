//! Evaluation harness: task specs, batch prediction, metrics, ensembling,
//! and seen/unseen label-split reports.

pub mod metrics;
pub mod report;

pub use metrics::{
    accuracy, confusion_matrix, ensemble_scores, lrap, median_report, split_report,
    threshold_predictions, weighted_f1, MedianReport, SplitReport,
};
pub use report::{render_confusion_tsv, EvalReport, TaskResult};

use std::collections::BTreeSet;
use std::io::BufRead;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scorer::Scorer;

/// Which metric a task is scored with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Accuracy,
    Lrap,
    WeightedF1,
}

impl std::fmt::Display for Metric {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Metric::Accuracy => "accuracy",
            Metric::Lrap => "lrap",
            Metric::WeightedF1 => "weighted_f1",
        };
        f.write_str(s)
    }
}

/// A classification task: label names in fixed order plus the metric.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskSpec {
    pub name: String,
    pub labels: Vec<String>,
    pub multi_label: bool,
    pub metric: Metric,
    /// Reporting group (topical / sentiment / multi-label); derived from the
    /// task name when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group: Option<String>,
}

impl TaskSpec {
    pub fn label_count(&self) -> usize {
        self.labels.len()
    }

    /// Index of a label name.
    pub fn label_index(&self, name: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == name)
    }

    pub fn validate(&self) -> Result<()> {
        if self.labels.len() < 2 {
            return Err(Error::InvalidInput(format!(
                "task {} needs at least two labels",
                self.name
            )));
        }
        let distinct: BTreeSet<&String> = self.labels.iter().collect();
        if distinct.len() != self.labels.len() {
            return Err(Error::InvalidInput(format!(
                "task {} has duplicate labels",
                self.name
            )));
        }
        if self.labels.iter().any(|l| l.is_empty()) {
            return Err(Error::InvalidInput(format!(
                "task {} has an empty label name",
                self.name
            )));
        }
        match self.metric {
            Metric::Accuracy if self.multi_label => Err(Error::InvalidInput(format!(
                "task {}: accuracy requires a single-label task",
                self.name
            ))),
            Metric::Lrap if !self.multi_label => Err(Error::InvalidInput(format!(
                "task {}: lrap requires a multi-label task",
                self.name
            ))),
            _ => Ok(()),
        }
    }

    pub fn from_json(path: &Path, reader: impl std::io::Read) -> Result<TaskSpec> {
        let spec: TaskSpec = serde_json::from_reader(reader).map_err(|e| {
            Error::InvalidInput(format!("task spec {}: {e}", path.display()))
        })?;
        spec.validate()?;
        Ok(spec)
    }

    /// Reporting group, falling back to well-known task names.
    pub fn group_name(&self) -> String {
        if let Some(group) = &self.group {
            return group.clone();
        }
        match self.name.as_str() {
            "agnews" | "dbpedia" | "yahoo" | "20newsgroups" => "topical".into(),
            "emotion" | "sst2" | "yelp2" | "amazon2" => "sentiment".into(),
            "nytimes" | "comment" | "situation" => "multi-label".into(),
            _ if self.multi_label => "multi-label".into(),
            _ => "other".into(),
        }
    }
}

/// The bundled task suite: 11 ready-made specs with fixed label names.
pub const BUILTIN_TASKS: &[(&str, &str)] = &[
    ("agnews", include_str!("../../assets/tasks/agnews.json")),
    ("dbpedia", include_str!("../../assets/tasks/dbpedia.json")),
    ("yahoo", include_str!("../../assets/tasks/yahoo.json")),
    ("20newsgroups", include_str!("../../assets/tasks/20newsgroups.json")),
    ("emotion", include_str!("../../assets/tasks/emotion.json")),
    ("sst2", include_str!("../../assets/tasks/sst2.json")),
    ("yelp2", include_str!("../../assets/tasks/yelp2.json")),
    ("amazon2", include_str!("../../assets/tasks/amazon2.json")),
    ("nytimes", include_str!("../../assets/tasks/nytimes.json")),
    ("comment", include_str!("../../assets/tasks/comment.json")),
    ("situation", include_str!("../../assets/tasks/situation.json")),
];

/// Fetches a bundled task spec by name.
pub fn builtin_task(name: &str) -> Result<TaskSpec> {
    let json = BUILTIN_TASKS
        .iter()
        .find(|(task_name, _)| *task_name == name)
        .map(|(_, json)| *json)
        .ok_or_else(|| {
            Error::InvalidInput(format!(
                "unknown builtin task {name:?}; bundled tasks: {}",
                BUILTIN_TASKS
                    .iter()
                    .map(|(n, _)| *n)
                    .collect::<Vec<_>>()
                    .join(", ")
            ))
        })?;
    let spec: TaskSpec = serde_json::from_str(json)?;
    spec.validate()?;
    Ok(spec)
}

/// One evaluation example: text plus gold label indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvalInstance {
    pub text: String,
    pub gold: BTreeSet<usize>,
}

#[derive(Deserialize)]
struct RawInstance {
    text: String,
    labels: Vec<String>,
}

/// Loads task data: newline-delimited JSON `{text, labels: [names]}`, with
/// names resolved against the task's label order.
pub fn load_instances(
    task: &TaskSpec,
    path: &Path,
    reader: impl BufRead,
) -> Result<Vec<EvalInstance>> {
    let mut out = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let raw: RawInstance =
            serde_json::from_str(&line).map_err(|e| Error::MalformedRecord {
                path: path.to_path_buf(),
                line: lineno + 1,
                message: e.to_string(),
            })?;
        let mut gold = BTreeSet::new();
        for name in &raw.labels {
            let index = task.label_index(name).ok_or_else(|| Error::MalformedRecord {
                path: path.to_path_buf(),
                line: lineno + 1,
                message: format!("label {name:?} is not part of task {}", task.name),
            })?;
            gold.insert(index);
        }
        if gold.is_empty() {
            return Err(Error::MalformedRecord {
                path: path.to_path_buf(),
                line: lineno + 1,
                message: "instance has no gold labels".into(),
            });
        }
        if !task.multi_label && gold.len() != 1 {
            return Err(Error::MalformedRecord {
                path: path.to_path_buf(),
                line: lineno + 1,
                message: format!(
                    "single-label task {} got {} gold labels",
                    task.name,
                    gold.len()
                ),
            });
        }
        out.push(EvalInstance {
            text: raw.text,
            gold,
        });
    }
    Ok(out)
}

/// Dense row-major score table: one row per instance, one column per label.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl ScoreMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::InvalidInput(format!(
                "score matrix data length {} does not match {rows}x{cols}",
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("score matrix has non-finite entries".into()));
        }
        Ok(ScoreMatrix { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    /// Argmax per row; ties break toward the lowest label index.
    pub fn argmax_predictions(&self) -> Vec<usize> {
        (0..self.rows).map(|i| argmax_lowest(self.row(i))).collect()
    }

    /// Tab-separated serialization; floats print in shortest round-trip form.
    pub fn write_tsv(&self, mut w: impl std::io::Write) -> std::io::Result<()> {
        for i in 0..self.rows {
            let row = self.row(i);
            for (j, value) in row.iter().enumerate() {
                if j > 0 {
                    write!(w, "\t")?;
                }
                write!(w, "{value}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }

    pub fn read_tsv(path: &Path, reader: impl BufRead) -> Result<Self> {
        let mut data = Vec::new();
        let mut cols = None;
        let mut rows = 0;
        for (lineno, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| Error::io(path, e))?;
            if line.is_empty() {
                continue;
            }
            let values: Vec<f64> = line
                .split('\t')
                .map(|cell| {
                    cell.parse::<f64>().map_err(|_| Error::MalformedRecord {
                        path: path.to_path_buf(),
                        line: lineno + 1,
                        message: format!("bad float {cell:?}"),
                    })
                })
                .collect::<Result<_>>()?;
            match cols {
                None => cols = Some(values.len()),
                Some(c) if c != values.len() => {
                    return Err(Error::MalformedRecord {
                        path: path.to_path_buf(),
                        line: lineno + 1,
                        message: format!("expected {c} columns, found {}", values.len()),
                    })
                }
                _ => {}
            }
            rows += 1;
            data.extend(values);
        }
        ScoreMatrix::new(rows, cols.unwrap_or(0), data)
    }
}

/// Lowest-index argmax.
pub fn argmax_lowest(row: &[f64]) -> usize {
    let mut best = 0;
    for (j, &v) in row.iter().enumerate().skip(1) {
        if v > row[best] {
            best = j;
        }
    }
    debug_assert!(!row.is_empty());
    best
}

/// Scores every (instance, label) pair and takes per-row argmax predictions.
/// Scoring runs in parallel over instances; the matrix layout is fixed by
/// instance order, so results do not depend on scheduling.
pub fn predict_task(
    scorer: &dyn Scorer,
    task: &TaskSpec,
    instances: &[EvalInstance],
) -> Result<(ScoreMatrix, Vec<usize>)> {
    use rayon::prelude::*;
    let labels = &task.labels;
    let rows: Vec<Vec<f64>> = instances
        .par_iter()
        .enumerate()
        .map(|(i, instance)| {
            labels
                .iter()
                .enumerate()
                .map(|(j, label)| {
                    let score = scorer.score(label, &instance.text);
                    if score.is_finite() {
                        Ok(score)
                    } else {
                        Err(Error::InvalidInput(format!(
                            "scorer produced {score} for instance {i}, label {j} ({label:?})"
                        )))
                    }
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    let mut data = Vec::with_capacity(instances.len() * labels.len());
    for row in rows {
        data.extend(row);
    }
    let matrix = ScoreMatrix::new(instances.len(), labels.len(), data)?;
    let predictions = matrix.argmax_predictions();
    Ok((matrix, predictions))
}

/// Seen/unseen label split for half-seen style reports.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelPartition {
    pub seen: BTreeSet<usize>,
    pub unseen: BTreeSet<usize>,
}

impl LabelPartition {
    pub fn validate(&self, label_count: usize) -> Result<()> {
        if !self.seen.is_disjoint(&self.unseen) {
            return Err(Error::InvalidInput("seen and unseen labels overlap".into()));
        }
        let union: BTreeSet<usize> = self.seen.union(&self.unseen).copied().collect();
        let all: BTreeSet<usize> = (0..label_count).collect();
        if union != all {
            return Err(Error::InvalidInput(format!(
                "partition must cover all {label_count} labels"
            )));
        }
        Ok(())
    }

    /// The mirrored partition with seen and unseen swapped.
    pub fn swapped(&self) -> LabelPartition {
        LabelPartition {
            seen: self.unseen.clone(),
            unseen: self.seen.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn task(labels: &[&str], multi: bool, metric: Metric) -> TaskSpec {
        TaskSpec {
            name: "fixture".into(),
            labels: labels.iter().map(|s| s.to_string()).collect(),
            multi_label: multi,
            metric,
            group: None,
        }
    }

    struct FixedScorer;

    impl Scorer for FixedScorer {
        fn score(&self, category: &str, document: &str) -> f64 {
            // Deterministic toy: score is the shared-character count.
            document.chars().filter(|c| category.contains(*c)).count() as f64
        }

        fn kind(&self) -> &'static str {
            "fixed"
        }
    }

    #[test]
    fn argmax_breaks_ties_toward_lowest_index() {
        assert_eq!(argmax_lowest(&[0.2, 0.9]), 1);
        assert_eq!(argmax_lowest(&[0.5, 0.5]), 0);
        assert_eq!(argmax_lowest(&[0.1, 0.7, 0.7]), 1);
    }

    #[test]
    fn metric_task_mismatch_is_rejected() {
        assert!(task(&["a", "b"], false, Metric::Lrap).validate().is_err());
        assert!(task(&["a", "b"], true, Metric::Accuracy).validate().is_err());
        assert!(task(&["a", "b"], false, Metric::Accuracy).validate().is_ok());
        assert!(task(&["a", "b"], true, Metric::Lrap).validate().is_ok());
    }

    #[test]
    fn duplicate_or_too_few_labels_rejected() {
        assert!(task(&["a", "a"], false, Metric::Accuracy).validate().is_err());
        assert!(task(&["only"], false, Metric::Accuracy).validate().is_err());
    }

    #[test]
    fn instance_loading_resolves_label_names() {
        let spec = task(&["cats", "dogs"], false, Metric::Accuracy);
        let data = "{\"text\": \"meow\", \"labels\": [\"cats\"]}\n{\"text\": \"woof\", \"labels\": [\"dogs\"]}\n";
        let instances = load_instances(&spec, Path::new("mem"), data.as_bytes()).unwrap();
        assert_eq!(instances.len(), 2);
        assert!(instances[0].gold.contains(&0));
        assert!(instances[1].gold.contains(&1));
    }

    #[test]
    fn unknown_label_name_is_an_error() {
        let spec = task(&["cats", "dogs"], false, Metric::Accuracy);
        let data = "{\"text\": \"x\", \"labels\": [\"birds\"]}\n";
        assert!(load_instances(&spec, Path::new("mem"), data.as_bytes()).is_err());
    }

    #[test]
    fn multiple_golds_on_single_label_task_is_an_error() {
        let spec = task(&["cats", "dogs"], false, Metric::Accuracy);
        let data = "{\"text\": \"x\", \"labels\": [\"cats\", \"dogs\"]}\n";
        assert!(load_instances(&spec, Path::new("mem"), data.as_bytes()).is_err());
    }

    #[test]
    fn predict_makes_one_call_per_pair() {
        use std::sync::atomic::{AtomicUsize, Ordering};

        struct CountingScorer(AtomicUsize);
        impl Scorer for CountingScorer {
            fn score(&self, _: &str, _: &str) -> f64 {
                self.0.fetch_add(1, Ordering::Relaxed);
                0.5
            }
            fn kind(&self) -> &'static str {
                "counting"
            }
        }

        // Shaped like the news benchmark: 7,600 instances x 4 labels.
        let spec = task(&["a", "b", "c", "d"], false, Metric::Accuracy);
        let instances: Vec<EvalInstance> = (0..7_600)
            .map(|i| EvalInstance {
                text: format!("doc {i}"),
                gold: BTreeSet::from([i % 4]),
            })
            .collect();
        let scorer = CountingScorer(AtomicUsize::new(0));
        let (matrix, preds) = predict_task(&scorer, &spec, &instances).unwrap();
        assert_eq!(scorer.0.load(Ordering::Relaxed), 30_400);
        assert_eq!(matrix.rows(), 7_600);
        assert_eq!(matrix.cols(), 4);
        assert_eq!(preds.len(), 7_600);
    }

    #[test]
    fn prediction_picks_highest_scoring_label() {
        let spec = task(&["abc", "xyz"], false, Metric::Accuracy);
        let instances = vec![
            EvalInstance {
                text: "aaa".into(),
                gold: BTreeSet::from([0]),
            },
            EvalInstance {
                text: "zzz".into(),
                gold: BTreeSet::from([1]),
            },
        ];
        let (_, preds) = predict_task(&FixedScorer, &spec, &instances).unwrap();
        assert_eq!(preds, vec![0, 1]);
    }

    #[test]
    fn score_matrix_tsv_round_trips_exactly() {
        let matrix = ScoreMatrix::new(
            2,
            3,
            vec![0.1, 0.2 + 1e-16, 1.0 / 3.0, -4.5e-300, 0.0, 7.25],
        )
        .unwrap();
        let mut buf = Vec::new();
        matrix.write_tsv(&mut buf).unwrap();
        let back = ScoreMatrix::read_tsv(Path::new("mem"), buf.as_slice()).unwrap();
        assert_eq!(matrix, back);
    }

    #[test]
    fn all_builtin_tasks_parse_and_validate() {
        assert_eq!(BUILTIN_TASKS.len(), 11);
        let mut by_group: std::collections::BTreeMap<String, usize> = Default::default();
        for (name, _) in BUILTIN_TASKS {
            let spec = builtin_task(name).unwrap();
            assert_eq!(&spec.name, name);
            *by_group.entry(spec.group_name()).or_default() += 1;
        }
        assert_eq!(by_group["topical"], 4);
        assert_eq!(by_group["sentiment"], 4);
        assert_eq!(by_group["multi-label"], 3);
        // Spot checks on fixed label counts.
        assert_eq!(builtin_task("agnews").unwrap().label_count(), 4);
        assert_eq!(builtin_task("dbpedia").unwrap().label_count(), 14);
        assert_eq!(builtin_task("nytimes").unwrap().label_count(), 100);
        assert!(builtin_task("nope").is_err());
    }

    #[test]
    fn partition_validation() {
        let p = LabelPartition {
            seen: BTreeSet::from([0, 1]),
            unseen: BTreeSet::from([2, 3]),
        };
        assert!(p.validate(4).is_ok());
        assert!(p.validate(5).is_err());
        let overlapping = LabelPartition {
            seen: BTreeSet::from([0, 1]),
            unseen: BTreeSet::from([1, 2]),
        };
        assert!(overlapping.validate(3).is_err());
    }
}
