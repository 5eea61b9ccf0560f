use std::collections::BTreeMap;

use cag_core::corpus::{corpus_stats, krippendorff_alpha, AlphaScope, Channel};
use cag_core::retrieval::{ndcg_at_k, DEFAULT_TOP_K};
use serde::Serialize;

use crate::config::{self, invalid, FileConfig};
use crate::{NdcgArgs, StatsArgs};

#[derive(Serialize)]
struct AlphaEntry {
    scope: String,
    alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

#[derive(Serialize)]
struct StatsOutput {
    stats: cag_core::corpus::StatsReport,
    /// Empty when the corpus has no annotations.
    agreement: Vec<AlphaEntry>,
}

pub fn stats(args: StatsArgs) -> anyhow::Result<bool> {
    let file = FileConfig::discover(args.config.as_deref())?;
    let corpus = config::load_corpus(args.corpus.as_deref().or(file.corpus.as_deref()))?;
    let stats = corpus_stats(&corpus).map_err(|e| invalid(e.to_string()))?;
    let agreement = corpus
        .annotations()
        .map(|matrix| {
            Channel::ALL
                .into_iter()
                .map(AlphaScope::Channel)
                .chain([AlphaScope::Overall])
                .map(|scope| match krippendorff_alpha(matrix, scope) {
                    Ok(a) => AlphaEntry {
                        scope: scope.to_string(),
                        alpha: Some(a),
                        error: None,
                    },
                    Err(e) => AlphaEntry {
                        scope: scope.to_string(),
                        alpha: None,
                        error: Some(e.to_string()),
                    },
                })
                .collect()
        })
        .unwrap_or_default();
    let out = StatsOutput { stats, agreement };
    if args.json {
        println!("{}", serde_json::to_string_pretty(&out)?);
        return Ok(true);
    }
    let s = &out.stats;
    let rows = [
        ("events", s.events.to_string()),
        ("videos", s.videos.to_string()),
        ("subclaims", s.subclaims.to_string()),
        ("videos per event", format!("{:.2}", s.mean_videos_per_event)),
        ("video length (s)", format!("{:.1}", s.mean_video_length_s)),
        ("article tokens", format!("{:.1}", s.mean_article_tokens)),
        ("audio subclaims", format!("{:.1}", s.mean_audio_subclaims)),
        ("video subclaims", format!("{:.1}", s.mean_video_subclaims)),
        ("OCR subclaims", format!("{:.1}", s.mean_ocr_subclaims)),
        ("A/V/O subclaims", format!("{:.1}", s.mean_all_modality_subclaims)),
        ("total subclaims", format!("{:.1}", s.mean_total_subclaims)),
    ];
    for (name, value) in rows {
        println!("{name:<18} {value:>8}");
    }
    if !out.agreement.is_empty() {
        println!();
        for a in &out.agreement {
            let value = a.alpha.map_or_else(
                || format!("n/a ({})", a.error.as_deref().unwrap_or("")),
                |x| format!("{x:.3}"),
            );
            println!("alpha {:<12} {value:>8}", a.scope);
        }
    }
    Ok(true)
}

#[derive(Serialize)]
struct NdcgOutput {
    run_tag: String,
    #[serde(flatten)]
    report: cag_core::retrieval::NdcgReport,
}

pub fn ndcg(args: NdcgArgs) -> anyhow::Result<bool> {
    let file = FileConfig::discover(args.config.as_deref())?;
    let run = config::load_run(args.run.as_deref().or(file.run.as_deref()))?;
    let qrels_path = args.qrels.or(file.qrels.clone());
    let corpus = match (&qrels_path, args.corpus.as_deref().or(file.corpus.as_deref())) {
        (None, path) => Some(config::load_corpus(path)?),
        (Some(_), _) => None,
    };
    let qrels = config::load_qrels(qrels_path.as_deref(), corpus.as_ref())?;
    let k = args.top_k.or(file.top_k).unwrap_or(DEFAULT_TOP_K);
    if k == 0 {
        return Err(invalid("--top-k must be positive"));
    }
    let report = ndcg_at_k(&run, &qrels, k);
    if args.json {
        let out = NdcgOutput {
            run_tag: run.run_tag.clone(),
            report,
        };
        println!("{}", serde_json::to_string_pretty(&out)?);
        return Ok(true);
    }
    let width = report.per_event.keys().map(|k| k.len()).max().unwrap_or(5).max(5);
    let per_event: &BTreeMap<String, f64> = &report.per_event;
    for (event, score) in per_event {
        println!("{event:<width$}  {score:.4}");
    }
    match report.macro_average {
        Some(m) => println!("{:<width$}  {m:.4}", format!("mean@{k}")),
        None => println!("no event could be scored"),
    }
    for e in &report.no_relevant_videos {
        println!("skipped {e}: no relevant videos");
    }
    for e in &report.missing_from_run {
        println!("{e}: not ranked by the run (scored 0)");
    }
    Ok(true)
}
