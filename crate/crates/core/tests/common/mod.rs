#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use cag_core::{EventTopic, EventType, Modality, Subclaim, VideoRecord};

pub fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

pub fn video(id: &str, duration_s: f64) -> VideoRecord {
    VideoRecord {
        id: id.into(),
        uri: format!("file:///videos/{id}.mp4"),
        duration_s,
        transcript: None,
        ocr_present: false,
    }
}

pub fn event(id: &str, videos: &[&str]) -> EventTopic {
    EventTopic {
        id: id.into(),
        name: format!("Event {id}"),
        event_type: EventType::NaturalDisaster,
        year: 2020,
        reference_article: "A flood hit the valley. Roads were closed.".into(),
        relevant_video_ids: videos.iter().map(|v| v.to_string()).collect(),
    }
}

pub fn subclaim(id: &str, event_id: &str, support: &[(&str, &[Modality])]) -> Subclaim {
    Subclaim {
        id: id.into(),
        event_id: event_id.into(),
        text: format!("claim {id}"),
        support: support
            .iter()
            .map(|(v, ms)| (v.to_string(), ms.iter().copied().collect::<BTreeSet<_>>()))
            .collect::<BTreeMap<_, _>>(),
    }
}
