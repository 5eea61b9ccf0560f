use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

/// The seven-type event ontology.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventType {
    #[serde(alias = "sporting_events", alias = "sports")]
    SportingEvent,
    #[serde(alias = "natural_disasters", alias = "disaster")]
    NaturalDisaster,
    #[serde(alias = "elections")]
    Election,
    #[serde(alias = "social_events")]
    SocialEvent,
    #[serde(alias = "demonstrations", alias = "protest")]
    Demonstration,
    #[serde(alias = "discoveries_launches", alias = "discovery", alias = "launch")]
    DiscoveryLaunch,
    #[serde(alias = "political_developments", alias = "political")]
    PoliticalDevelopment,
}

impl EventType {
    pub const ALL: [EventType; 7] = [
        EventType::SportingEvent,
        EventType::NaturalDisaster,
        EventType::Election,
        EventType::SocialEvent,
        EventType::Demonstration,
        EventType::DiscoveryLaunch,
        EventType::PoliticalDevelopment,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            EventType::SportingEvent => "sporting_event",
            EventType::NaturalDisaster => "natural_disaster",
            EventType::Election => "election",
            EventType::SocialEvent => "social_event",
            EventType::Demonstration => "demonstration",
            EventType::DiscoveryLaunch => "discovery_launch",
            EventType::PoliticalDevelopment => "political_development",
        }
    }
}

impl fmt::Display for EventType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Evidence channel a subclaim can be grounded in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Modality {
    Audio,
    Video,
    Ocr,
}

/// A target event. `name` doubles as the query.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventTopic {
    pub id: String,
    pub name: String,
    pub event_type: EventType,
    pub year: i32,
    pub reference_article: String,
    /// Gold-relevant videos, in file order.
    pub relevant_video_ids: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VideoRecord {
    pub id: String,
    pub uri: String,
    pub duration_s: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transcript: Option<String>,
    #[serde(default)]
    pub ocr_present: bool,
}

/// An atomic statement from a reference article with per-video support.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Subclaim {
    pub id: String,
    pub event_id: String,
    pub text: String,
    /// Per judged video, the channels that support the claim. An empty set
    /// means the video was judged and supports nothing.
    #[serde(default)]
    pub support: BTreeMap<String, BTreeSet<Modality>>,
}

impl Subclaim {
    pub fn unsupported_everywhere(&self) -> bool {
        self.support.values().all(BTreeSet::is_empty)
    }

    /// Union of supporting channels across all videos.
    pub fn modalities(&self) -> BTreeSet<Modality> {
        self.support.values().flatten().copied().collect()
    }

    pub fn supported_by(&self, modality: Modality) -> bool {
        self.support.values().any(|s| s.contains(&modality))
    }
}
