use serde::{Deserialize, Serialize};

use super::load::CorpusError;
use super::model::Modality;
use super::Corpus;

/// Dataset-level and per-event averages.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsReport {
    pub events: usize,
    pub videos: usize,
    pub subclaims: usize,
    /// Mean over all videos in the corpus.
    pub mean_video_length_s: f64,
    /// Whitespace tokens in the reference article, averaged over events.
    pub mean_article_tokens: f64,
    pub mean_videos_per_event: f64,
    pub mean_audio_subclaims: f64,
    pub mean_video_subclaims: f64,
    pub mean_ocr_subclaims: f64,
    /// Subclaims supported through all three channels (union over videos).
    pub mean_all_modality_subclaims: f64,
    pub mean_total_subclaims: f64,
}

pub fn corpus_stats(corpus: &Corpus) -> Result<StatsReport, CorpusError> {
    let n_events = corpus.events().len();
    if n_events == 0 || corpus.videos().is_empty() {
        return Err(CorpusError::EmptyCorpus);
    }
    let per_event = |total: u64| total as f64 / n_events as f64;

    let article_tokens: u64 = corpus
        .events()
        .iter()
        .map(|e| e.reference_article.split_whitespace().count() as u64)
        .sum();
    let relevant: u64 = corpus.events().iter().map(|e| e.relevant_video_ids.len() as u64).sum();

    let (mut audio, mut video, mut ocr, mut all) = (0u64, 0u64, 0u64, 0u64);
    for claim in corpus.subclaims() {
        let m = claim.modalities();
        audio += u64::from(m.contains(&Modality::Audio));
        video += u64::from(m.contains(&Modality::Video));
        ocr += u64::from(m.contains(&Modality::Ocr));
        all += u64::from(m.len() == 3);
    }

    let total_duration: f64 = corpus.videos().iter().map(|v| v.duration_s).sum();

    Ok(StatsReport {
        events: n_events,
        videos: corpus.videos().len(),
        subclaims: corpus.subclaims().len(),
        mean_video_length_s: total_duration / corpus.videos().len() as f64,
        mean_article_tokens: per_event(article_tokens),
        mean_videos_per_event: per_event(relevant),
        mean_audio_subclaims: per_event(audio),
        mean_video_subclaims: per_event(video),
        mean_ocr_subclaims: per_event(ocr),
        mean_all_modality_subclaims: per_event(all),
        mean_total_subclaims: per_event(corpus.subclaims().len() as u64),
    })
}
