mod common;

use std::collections::BTreeMap;
use std::sync::Mutex;

use cag_core::engine::{read_run_artifact, write_run_artifact, Engine, EngineError, FixedClock, Termination};
use cag_core::gateway::{MockGateway, MockReply, MockRule, MockScript, ReplyError};
use cag_core::prompts::{LEAD_MARKER, REPROMPT_PREFIX};
use cag_core::{EventTopic, GatewayError, Method, Role, RunConfig, VideoRecord};
use common::{event, video};
use proptest::prelude::*;

const REPROMPT: &str = "Describe the video in detail and focus on the rescue effort.";

fn engine(gw: &MockGateway) -> Engine<'_> {
    Engine::new(gw).with_clock(FixedClock("2025-01-01T00:00:00.000Z".into()))
}

fn generic_rule(v: &str, text: &str) -> MockRule {
    MockRule::new(Role::VideoSummarizer, [text]).with_media(v).cycling()
}

fn focused_rule(v: &str, text: &str) -> MockRule {
    MockRule::new(Role::VideoSummarizer, [text])
        .containing("focus on")
        .with_media(v)
        .cycling()
}

fn videos(ids: &[&str]) -> Vec<VideoRecord> {
    ids.iter().map(|id| video(id, 30.0)).collect()
}

fn refs(vs: &[VideoRecord]) -> Vec<&VideoRecord> {
    vs.iter().collect()
}

#[test]
fn generic_summary_is_returned_verbatim() {
    let gw = MockGateway::new(MockScript::new(vec![generic_rule("v1", "A fire at a cathedral.")]));
    assert_eq!(
        engine(&gw).generic_summarize(&video("v1", 1.0)).unwrap(),
        "A fire at a cathedral."
    );
}

#[test]
fn transport_error_carries_video_id() {
    let gw = MockGateway::new(MockScript::new(vec![MockRule::new(
        Role::VideoSummarizer,
        [MockReply::Error {
            error: ReplyError::Transport,
        }],
    )]));
    match engine(&gw).generic_summarize(&video("v7", 1.0)) {
        Err(EngineError::Gateway {
            video_id,
            source: GatewayError::Transport { .. },
            ..
        }) => {
            assert_eq!(video_id.as_deref(), Some("v7"))
        }
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn budget_zero_makes_no_reasoner_call() {
    let gw = MockGateway::new(MockScript::new(vec![generic_rule("v1", "Water rises.")]));
    let trace = engine(&gw).reprompt_loop(&video("v1", 1.0), "Flood", 0).unwrap();
    assert!(trace.rounds.is_empty());
    assert_eq!(trace.terminated_by, Termination::BudgetExhausted);
    assert_eq!(gw.count(Role::Reasoner), 0);
}

#[test]
fn reprompt_then_sentinel_stops_early() {
    let gw = MockGateway::new(MockScript::new(vec![
        focused_rule("v1", "Boats rescue people."),
        generic_rule("v1", "Water rises."),
        MockRule::new(Role::Reasoner, [REPROMPT, "no new query."]),
    ]));
    let trace = engine(&gw).reprompt_loop(&video("v1", 1.0), "Flood", 2).unwrap();
    assert_eq!(trace.rounds.len(), 1);
    assert_eq!(trace.rounds[0].reprompt, REPROMPT);
    assert_eq!(trace.rounds[0].summary, "Boats rescue people.");
    assert_eq!(trace.terminated_by, Termination::Sufficient);
    assert_eq!(gw.count(Role::VideoSummarizer), 2);
    assert_eq!(gw.count(Role::Reasoner), 2);
}

#[test]
fn two_reprompts_exhaust_budget_two() {
    let gw = MockGateway::new(MockScript::new(vec![
        focused_rule("v1", "Boats rescue people."),
        generic_rule("v1", "Water rises."),
        MockRule::new(Role::Reasoner, [REPROMPT, REPROMPT]),
    ]));
    let trace = engine(&gw).reprompt_loop(&video("v1", 1.0), "Flood", 2).unwrap();
    assert_eq!(trace.rounds.len(), 2);
    assert_eq!(trace.terminated_by, Termination::BudgetExhausted);
    assert_eq!(gw.count(Role::VideoSummarizer), 3);
}

#[test]
fn reasoner_sees_the_latest_summary() {
    let gw = MockGateway::new(MockScript::new(vec![
        focused_rule("v1", "SECOND-SUMMARY"),
        generic_rule("v1", "FIRST-SUMMARY"),
        MockRule::new(Role::Reasoner, [REPROMPT, "no new query."]),
    ]));
    engine(&gw).reprompt_loop(&video("v1", 1.0), "Flood", 3).unwrap();
    let reasoner: Vec<String> = gw
        .requests()
        .into_iter()
        .filter(|r| r.role == Role::Reasoner)
        .map(|r| r.text())
        .collect();
    assert!(reasoner[0].contains("FIRST-SUMMARY") && reasoner[0].contains("Flood"));
    assert!(reasoner[1].contains("SECOND-SUMMARY"));
}

struct Capture(Mutex<Vec<String>>);

impl log::Log for Capture {
    fn enabled(&self, m: &log::Metadata) -> bool {
        m.level() <= log::Level::Warn
    }
    fn log(&self, record: &log::Record) {
        if self.enabled(record.metadata()) {
            self.0.lock().unwrap().push(record.args().to_string());
        }
    }
    fn flush(&self) {}
}

static LOGS: Capture = Capture(Mutex::new(Vec::new()));

#[test]
fn nonconforming_reply_falls_back_to_sufficient_and_logs() {
    let _ = log::set_logger(&LOGS);
    log::set_max_level(log::LevelFilter::Warn);
    let reply = "I think the summary covers everything relevant.";
    let gw = MockGateway::new(MockScript::new(vec![
        generic_rule("v9", "Water rises."),
        MockRule::new(Role::Reasoner, [reply]),
    ]));
    let trace = engine(&gw).reprompt_loop(&video("v9", 1.0), "Flood", 2).unwrap();
    assert_eq!(trace.terminated_by, Termination::Sufficient);
    assert!(trace.rounds.is_empty());
    assert_eq!(trace.audit.len(), 1);
    let logs = LOGS.0.lock().unwrap();
    assert!(logs
        .iter()
        .any(|l| l.contains("v9") && l.contains("unparseable") && l.contains(reply)));
}

#[test]
fn empty_summary_is_rejected_by_feedback() {
    let gw = MockGateway::new(MockScript::new(vec![]));
    assert!(matches!(
        engine(&gw).relevance_feedback("Flood", "  "),
        Err(EngineError::EmptySummary)
    ));
    assert_eq!(gw.calls().len(), 0);
}

#[test]
fn concat0_joins_generic_summaries_without_aggregator() {
    let gw = MockGateway::new(MockScript::new(vec![generic_rule("a", "A."), generic_rule("b", "B.")]));
    let vs = videos(&["a", "b"]);
    let out = engine(&gw)
        .run_method(
            &RunConfig::new(Method::Concat0, 0),
            &event("e", &["a", "b"]),
            &refs(&vs),
        )
        .unwrap();
    assert_eq!(out.article.body, "A.\n\nB.");
    assert_eq!(gw.count(Role::Aggregator), 0);
    assert_eq!(gw.count(Role::Reasoner), 0);
}

#[test]
fn concatr_without_rounds_is_empty_output() {
    let gw = MockGateway::new(MockScript::new(vec![
        generic_rule("a", "A."),
        MockRule::new(Role::Reasoner, ["no new query."]).cycling(),
    ]));
    let vs = videos(&["a"]);
    let err = engine(&gw)
        .run_method(
            &RunConfig::new(Method::ConcatRePrompt, 2),
            &event("e", &["a"]),
            &refs(&vs),
        )
        .unwrap_err();
    assert!(matches!(err, EngineError::EmptyOutput(_)));
}

#[test]
fn concatr_joins_only_reprompted_summaries() {
    let gw = MockGateway::new(MockScript::new(vec![
        focused_rule("a", "Focused A."),
        generic_rule("a", "Generic A."),
        generic_rule("b", "Generic B."),
        MockRule::new(Role::Reasoner, [REPROMPT, "no new query.", "no new query."]),
    ]));
    let vs = videos(&["a", "b"]);
    let out = engine(&gw)
        .run_method(
            &RunConfig::new(Method::ConcatRePrompt, 2),
            &event("e", &["a", "b"]),
            &refs(&vs),
        )
        .unwrap();
    assert_eq!(out.article.body, "Focused A.");
}

#[test]
fn cagr_aggregator_input_has_every_summary() {
    let gw = MockGateway::new(MockScript::new(vec![
        focused_rule("a", "FOCUS-A"),
        focused_rule("b", "FOCUS-B"),
        focused_rule("c", "FOCUS-C"),
        generic_rule("a", "GEN-A"),
        generic_rule("b", "GEN-B"),
        generic_rule("c", "GEN-C"),
        MockRule::new(Role::Reasoner, [REPROMPT, "no new query."]).cycling(),
        MockRule::new(Role::Aggregator, ["<lead> Water rose over the valley."]),
    ]));
    let vs = videos(&["a", "b", "c"]);
    let out = engine(&gw)
        .run_method(
            &RunConfig::new(Method::CagR, 2),
            &event("e", &["a", "b", "c"]),
            &refs(&vs),
        )
        .unwrap();
    assert_eq!(out.article.body, "Water rose over the valley.");
    let agg = gw
        .requests()
        .into_iter()
        .find(|r| r.role == Role::Aggregator)
        .unwrap()
        .text();
    for needle in ["GEN-A", "GEN-B", "GEN-C", "FOCUS-A", "FOCUS-B", "FOCUS-C"] {
        assert_eq!(agg.matches(needle).count(), 1, "{needle}");
    }
    assert_eq!(agg.matches(REPROMPT).count(), 3);
    assert!(agg.find("GEN-A").unwrap() < agg.find("FOCUS-A").unwrap());
    assert!(agg.find("FOCUS-A").unwrap() < agg.find("GEN-B").unwrap());
}

#[test]
fn transcripts_reach_aggregator_in_video_order() {
    let gw = MockGateway::new(MockScript::new(vec![
        generic_rule("a", "GEN-A"),
        generic_rule("b", "GEN-B"),
        MockRule::new(Role::Aggregator, ["<lead> Water rose."]),
    ]));
    let mut vs = videos(&["a", "b"]);
    vs[0].transcript = Some("TRANSCRIPT ONE".into());
    vs[1].transcript = Some("TRANSCRIPT TWO".into());
    let mut config = RunConfig::new(Method::Cag0, 0);
    config.include_transcripts = true;
    let out = engine(&gw)
        .run_method(&config, &event("e", &["a", "b"]), &refs(&vs))
        .unwrap();
    let agg = gw
        .requests()
        .into_iter()
        .find(|r| r.role == Role::Aggregator)
        .unwrap()
        .text();
    let one = agg.find("TRANSCRIPT ONE").unwrap();
    assert!(one < agg.find("TRANSCRIPT TWO").unwrap());
    assert!(out.article.provenance.config.include_transcripts);
}

#[test]
fn missing_lead_marker_is_retried_once_then_fails() {
    let gw = MockGateway::new(MockScript::new(vec![
        generic_rule("a", "GEN-A"),
        MockRule::new(Role::Aggregator, ["A fire.", "Still no marker."]),
    ]));
    let vs = videos(&["a"]);
    let err = engine(&gw)
        .run_method(&RunConfig::new(Method::Cag0, 0), &event("e", &["a"]), &refs(&vs))
        .unwrap_err();
    assert!(matches!(err, EngineError::MissingLeadMarker { attempts: 2 }));
    assert_eq!(gw.count(Role::Aggregator), 2);
}

#[test]
fn invalid_budget_is_rejected_before_any_call() {
    let gw = MockGateway::new(MockScript::new(vec![]));
    let vs = videos(&["a"]);
    for config in [
        RunConfig::new(Method::Cag0, 1),
        RunConfig::new(Method::CagR, 0),
        RunConfig::new(Method::Concat0, 2),
    ] {
        let err = engine(&gw)
            .run_method(&config, &event("e", &["a"]), &refs(&vs))
            .unwrap_err();
        assert!(matches!(err, EngineError::InvalidConfig(_)));
    }
    assert!(gw.calls().is_empty());
}

#[test]
fn no_videos_is_an_error() {
    let gw = MockGateway::new(MockScript::new(vec![]));
    let err = engine(&gw)
        .run_method(&RunConfig::new(Method::Concat0, 0), &event("e", &[]), &[])
        .unwrap_err();
    assert!(matches!(err, EngineError::NoVideos));
}

#[test]
fn artifact_round_trips() {
    let gw = MockGateway::new(MockScript::new(vec![
        generic_rule("a", "Water rose."),
        MockRule::new(Role::Aggregator, ["<lead> Water rose over the valley."]),
    ]));
    let vs = videos(&["a"]);
    let out = engine(&gw)
        .run_method(&RunConfig::new(Method::Cag0, 0), &event("e", &["a"]), &refs(&vs))
        .unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = write_run_artifact(dir.path(), &out).unwrap();
    assert!(path.ends_with("e/cag0.json"));
    assert_eq!(read_run_artifact(&path).unwrap().into_output(), out);
    assert!(!out.article.body.contains(LEAD_MARKER));
    assert_eq!(out.article.provenance.video_ids, vec!["a"]);
    assert_eq!(out.article.provenance.started_at, "2025-01-01T00:00:00.000Z");
}

fn cag_script(seed: &[(u8, bool)]) -> MockScript {
    let reasoner: Vec<MockReply> = seed
        .iter()
        .map(|(kind, _)| match kind % 3 {
            0 => MockReply::from("no new query."),
            1 => MockReply::Text(format!("{REPROMPT_PREFIX} the crowd.")),
            _ => MockReply::from("Hmm, hard to say."),
        })
        .collect();
    let mut rules = vec![
        MockRule::new(Role::VideoSummarizer, ["Focused."])
            .containing("focus on")
            .cycling(),
        MockRule::new(Role::VideoSummarizer, ["Generic."]).cycling(),
        MockRule::new(Role::Aggregator, ["<lead> Something happened."]).cycling(),
    ];
    let mut r = MockRule::new(Role::Reasoner, reasoner);
    if seed.first().is_some_and(|s| s.1) {
        r = r.cycling();
    }
    rules.push(r);
    MockScript::new(rules)
}

fn run_cag(
    budget: u32,
    n_videos: usize,
    seed: &[(u8, bool)],
) -> (MockGateway, Result<cag_core::engine::RunOutput, EngineError>) {
    let gw = MockGateway::new(cag_script(seed));
    let ids: Vec<String> = (0..n_videos).map(|i| format!("v{i}")).collect();
    let vs: Vec<VideoRecord> = ids.iter().map(|id| video(id, 5.0)).collect();
    let ev: EventTopic = event("e", &ids.iter().map(String::as_str).collect::<Vec<_>>());
    let method = if budget == 0 { Method::Cag0 } else { Method::CagR };
    let out = engine(&gw).run_method(&RunConfig::new(method, budget), &ev, &refs(&vs));
    (gw, out)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn budget_is_never_exceeded(
        budget in 0u32..4,
        n_videos in 1usize..4,
        seed in proptest::collection::vec((any::<u8>(), any::<bool>()), 1..8),
    ) {
        let (gw, out) = run_cag(budget, n_videos, &seed);
        let mut per_video: BTreeMap<String, usize> = BTreeMap::new();
        for r in gw.requests().iter().filter(|r| r.role == Role::VideoSummarizer) {
            *per_video.entry(r.media[0].uri.clone()).or_default() += 1;
        }
        prop_assert!(per_video.values().all(|&n| n as u32 <= 1 + budget));
        prop_assert!(gw.count(Role::Reasoner) as u32 <= budget * n_videos as u32);
        if budget == 0 {
            prop_assert_eq!(gw.count(Role::Reasoner), 0);
        }
        if let Ok(out) = out {
            for t in &out.traces {
                prop_assert!(t.reasoner_calls as u32 <= budget);
                prop_assert!(t.rounds.len() as u32 <= budget);
                if t.terminated_by == Termination::BudgetExhausted && budget > 0 {
                    prop_assert_eq!(t.reasoner_calls as u32, budget);
                }
            }
            let cited: Vec<&String> = out.article.citations.iter().flat_map(|c| &c.videos).collect();
            prop_assert!(cited.iter().all(|v| out.article.provenance.video_ids.contains(v)));
        }
    }

    #[test]
    fn identical_inputs_give_identical_articles(
        budget in 0u32..3,
        seed in proptest::collection::vec((any::<u8>(), Just(true)), 1..6),
    ) {
        let (_, a) = run_cag(budget, 3, &seed);
        let (_, b) = run_cag(budget, 3, &seed);
        prop_assert_eq!(
            serde_json::to_string(&a.map_err(|e| e.to_string())).unwrap(),
            serde_json::to_string(&b.map_err(|e| e.to_string())).unwrap()
        );
    }
}
