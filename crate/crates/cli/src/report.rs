//! Metric reports: JSON for machines, an aligned table for people.
//!
//! Reports hold no timestamps, so equal inputs give byte-identical files.

use std::path::Path;

use cag_core::claims::JudgeKind;
use cag_core::Method;
use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct Row {
    pub event_id: String,
    pub method: Method,
    pub rouge_1: f64,
    pub rouge_2: f64,
    pub rouge_l: f64,
    pub bertscore: Option<f64>,
    pub arg_edit_f1: Option<f64>,
    pub arg_exact_f1: Option<f64>,
    pub alignscore: Option<f64>,
    pub groundedness: Option<f64>,
    pub ndcg: Option<f64>,
    pub judge_kind: Option<JudgeKind>,
    pub claims: Option<usize>,
    pub flagged_claims: Option<usize>,
    pub arg_questions_scored: Option<usize>,
    pub arg_questions_flagged: Option<usize>,
    pub errors: Vec<String>,
}

impl Row {
    pub fn new(event_id: &str, method: Method) -> Self {
        Self {
            event_id: event_id.to_string(),
            method,
            rouge_1: 0.0,
            rouge_2: 0.0,
            rouge_l: 0.0,
            bertscore: None,
            arg_edit_f1: None,
            arg_exact_f1: None,
            alignscore: None,
            groundedness: None,
            ndcg: None,
            judge_kind: None,
            claims: None,
            flagged_claims: None,
            arg_questions_scored: None,
            arg_questions_flagged: None,
            errors: Vec::new(),
        }
    }

    fn columns(&self) -> [Option<f64>; 9] {
        [
            Some(self.rouge_1),
            Some(self.rouge_2),
            Some(self.rouge_l),
            self.bertscore,
            self.arg_edit_f1,
            self.arg_exact_f1,
            self.alignscore,
            self.groundedness,
            self.ndcg,
        ]
    }
}

/// Column order of the table.
pub const HEADERS: [&str; 9] = ["R1", "R2", "RL", "BS", "ArgED", "ArgEX", "AS", "G", "nDCG"];

#[derive(Debug, Clone, Serialize)]
pub struct MethodMean {
    pub method: Method,
    pub events: usize,
    /// Means in `HEADERS` order, over the events where the column is set.
    pub means: Vec<Option<f64>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Row>,
    pub aggregate: Vec<MethodMean>,
}

impl Report {
    pub fn new(mut rows: Vec<Row>) -> Self {
        rows.sort_by(|a, b| (a.method, &a.event_id).cmp(&(b.method, &b.event_id)));
        let aggregate = Method::ALL
            .into_iter()
            .filter_map(|method| {
                let mine: Vec<&Row> = rows.iter().filter(|r| r.method == method).collect();
                if mine.is_empty() {
                    return None;
                }
                let means = (0..HEADERS.len())
                    .map(|c| {
                        let vals: Vec<f64> = mine.iter().filter_map(|r| r.columns()[c]).collect();
                        (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64)
                    })
                    .collect();
                Some(MethodMean {
                    method,
                    events: mine.len(),
                    means,
                })
            })
            .collect();
        Self {
            columns: HEADERS.to_vec(),
            rows,
            aggregate,
        }
    }

    /// Scores as percentages with two decimals; `-` marks an unset column.
    pub fn table(&self) -> String {
        let cell = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{:.2}", 100.0 * x));
        let mut lines: Vec<Vec<String>> = Vec::new();
        let mut head = vec!["event".to_string(), "method".to_string()];
        head.extend(HEADERS.iter().map(|h| h.to_string()));
        lines.push(head);
        for row in &self.rows {
            let mut line = vec![row.event_id.clone(), row.method.to_string()];
            line.extend(row.columns().into_iter().map(cell));
            lines.push(line);
        }
        for mean in &self.aggregate {
            let mut line = vec![format!("mean (n={})", mean.events), mean.method.to_string()];
            line.extend(mean.means.iter().copied().map(cell));
            lines.push(line);
        }
        let widths: Vec<usize> = (0..lines[0].len())
            .map(|c| lines.iter().map(|l| l[c].chars().count()).max().unwrap_or(0))
            .collect();
        let mut out = String::new();
        for line in &lines {
            let cells: Vec<String> = line
                .iter()
                .enumerate()
                .map(|(c, s)| {
                    if c < 2 {
                        format!("{s:<w$}", w = widths[c])
                    } else {
                        format!("{s:>w$}", w = widths[c])
                    }
                })
                .collect();
            out.push_str(cells.join("  ").trim_end());
            out.push('\n');
        }
        let errors: Vec<String> = self
            .rows
            .iter()
            .flat_map(|r| {
                r.errors
                    .iter()
                    .map(move |e| format!("{} ({}): {e}", r.event_id, r.method))
            })
            .collect();
        if !errors.is_empty() {
            out.push_str("\nerrors:\n");
            for e in errors {
                out.push_str(&format!("  {e}\n"));
            }
        }
        out
    }

    pub fn write(&self, dir: &Path) -> std::io::Result<()> {
        std::fs::create_dir_all(dir)?;
        let json = serde_json::to_string_pretty(self).expect("report serializes");
        std::fs::write(dir.join("report.json"), json + "\n")?;
        std::fs::write(dir.join("report.txt"), self.table())
    }
}
