use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{Qrels, RankedRun};

/// Linear-gain DCG with a `log2(i + 1)` discount over 1-based positions.
pub fn dcg(gains: &[u32]) -> f64 {
    gains
        .iter()
        .enumerate()
        .map(|(i, &g)| g as f64 / ((i + 2) as f64).log2())
        .sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NdcgReport {
    pub k: usize,
    pub per_event: BTreeMap<String, f64>,
    /// Mean over `per_event`; `None` when no event could be scored.
    pub macro_average: Option<f64>,
    /// Events in the qrels with no relevant video.
    pub no_relevant_videos: Vec<String>,
    /// Events with relevant videos that the run never ranks; scored 0.
    pub missing_from_run: Vec<String>,
}

/// nDCG@k for every qrels event. Scores lie in [0, 1].
pub fn ndcg_at_k(run: &RankedRun, qrels: &Qrels, k: usize) -> NdcgReport {
    let mut report = NdcgReport {
        k,
        per_event: BTreeMap::new(),
        macro_average: None,
        no_relevant_videos: Vec::new(),
        missing_from_run: Vec::new(),
    };
    for (event, grades) in &qrels.0 {
        let mut ideal: Vec<u32> = grades.values().copied().filter(|&g| g > 0).collect();
        if ideal.is_empty() {
            log::warn!("event {event} has no relevant videos; skipped for nDCG");
            report.no_relevant_videos.push(event.clone());
            continue;
        }
        ideal.sort_unstable_by(|a, b| b.cmp(a));
        ideal.truncate(k);
        let idcg = dcg(&ideal);
        let score = match run.ranking(event) {
            Some(entries) => {
                let gains: Vec<u32> = entries
                    .iter()
                    .take(k)
                    .map(|e| grades.get(&e.video_id).copied().unwrap_or(0))
                    .collect();
                dcg(&gains) / idcg
            }
            None => {
                report.missing_from_run.push(event.clone());
                0.0
            }
        };
        report.per_event.insert(event.clone(), score);
    }
    if !report.per_event.is_empty() {
        report.macro_average = Some(report.per_event.values().sum::<f64>() / report.per_event.len() as f64);
    }
    report
}
