//! Events, videos, subclaims and grounding annotations.
//!
//! A corpus directory holds `events.json`, `videos.json`, `subclaims.json`
//! and optionally `annotations.json`. Loading resolves every cross
//! reference; a dangling id is an error.

mod agreement;
mod load;
mod model;
mod stats;

use std::collections::HashMap;

pub use agreement::{
    krippendorff_alpha, nominal_alpha, AgreementError, AlphaScope, AnnotationItem, AnnotationMatrix, Channel,
};
pub use load::{load_corpus, write_corpus, CorpusError};
pub use model::{EventTopic, EventType, Modality, Subclaim, VideoRecord};
pub use stats::{corpus_stats, StatsReport};

/// An immutable, fully resolved corpus.
#[derive(Debug, Clone)]
pub struct Corpus {
    events: Vec<EventTopic>,
    videos: Vec<VideoRecord>,
    subclaims: Vec<Subclaim>,
    annotations: Option<AnnotationMatrix>,
    event_index: HashMap<String, usize>,
    video_index: HashMap<String, usize>,
}

impl PartialEq for Corpus {
    fn eq(&self, other: &Self) -> bool {
        self.events == other.events
            && self.videos == other.videos
            && self.subclaims == other.subclaims
            && self.annotations == other.annotations
    }
}

impl Corpus {
    /// Builds a corpus from parts, enforcing the same invariants as
    /// [`load_corpus`].
    pub fn from_parts(
        events: Vec<EventTopic>,
        videos: Vec<VideoRecord>,
        subclaims: Vec<Subclaim>,
        annotations: Option<AnnotationMatrix>,
    ) -> Result<Self, CorpusError> {
        load::validate(&events, &videos, &subclaims, annotations.as_ref())?;
        let event_index = events.iter().enumerate().map(|(i, e)| (e.id.clone(), i)).collect();
        let video_index = videos.iter().enumerate().map(|(i, v)| (v.id.clone(), i)).collect();
        Ok(Self {
            events,
            videos,
            subclaims,
            annotations,
            event_index,
            video_index,
        })
    }

    pub fn events(&self) -> &[EventTopic] {
        &self.events
    }

    pub fn videos(&self) -> &[VideoRecord] {
        &self.videos
    }

    pub fn subclaims(&self) -> &[Subclaim] {
        &self.subclaims
    }

    pub fn annotations(&self) -> Option<&AnnotationMatrix> {
        self.annotations.as_ref()
    }

    pub fn event(&self, id: &str) -> Option<&EventTopic> {
        self.event_index.get(id).map(|&i| &self.events[i])
    }

    pub fn video(&self, id: &str) -> Option<&VideoRecord> {
        self.video_index.get(id).map(|&i| &self.videos[i])
    }

    pub fn subclaims_for<'a>(&'a self, event_id: &'a str) -> impl Iterator<Item = &'a Subclaim> + 'a {
        self.subclaims.iter().filter(move |c| c.event_id == event_id)
    }

    /// The event's gold video set, ordered as in `videos.json`.
    pub fn oracle_videos(&self, event: &EventTopic) -> Vec<&VideoRecord> {
        let mut idx: Vec<usize> = event
            .relevant_video_ids
            .iter()
            .filter_map(|id| self.video_index.get(id).copied())
            .collect();
        idx.sort_unstable();
        idx.into_iter().map(|i| &self.videos[i]).collect()
    }
}
