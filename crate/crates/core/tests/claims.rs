mod common;

use std::collections::{BTreeMap, BTreeSet};

use cag_core::claims::{
    decompose, groundedness, judge_with_llm, load_human_judgments, video_evidence, Claim, ClaimSet, ClaimVerdict,
    GroundingError, GroundingJudgment, JudgeKind,
};
use cag_core::engine::{SummaryTrace, Termination};
use cag_core::gateway::{MockGateway, MockRule, MockScript};
use cag_core::prompts::PromptSet;
use cag_core::Role;
use common::video;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn claim_set(n: usize) -> ClaimSet {
    ClaimSet {
        event_id: "e".into(),
        method: "cagr".into(),
        claims: (0..n)
            .map(|i| Claim {
                text: format!("claim {i}"),
                source_sentence: i,
                flagged: false,
            })
            .collect(),
    }
}

fn judgment(supported: &[bool]) -> GroundingJudgment {
    GroundingJudgment {
        judge_kind: JudgeKind::HumanFile,
        claims: supported
            .iter()
            .map(|&s| ClaimVerdict {
                per_video: BTreeMap::from([("v1".to_string(), s)]),
                all_videos: None,
                flagged: false,
            })
            .collect(),
    }
}

#[test]
fn decomposition_reply_yields_claims_in_order() {
    let gw = MockGateway::new(MockScript::new(vec![MockRule::new(
        Role::Extractor,
        [r#"[{"claim":"A fire broke out"},{"claim":"The fire was in Paris"}]"#],
    )]));
    let set = decompose("e", "cagr", "A fire broke out in Paris.", &gw, &PromptSet::default()).unwrap();
    assert_eq!(
        set.texts().collect::<Vec<_>>(),
        vec!["A fire broke out", "The fire was in Paris"]
    );
    assert!(set.claims.iter().all(|c| c.source_sentence == 0 && !c.flagged));
    let prompt = gw.requests()[0].text();
    assert!(prompt.contains("SENTENCE: A fire broke out in Paris."));
    assert!(prompt.contains("PARAGRAPH: A fire broke out in Paris."));
}

#[test]
fn two_refusals_keep_the_sentence_as_a_flagged_claim() {
    let gw = MockGateway::new(MockScript::new(vec![MockRule::new(
        Role::Extractor,
        ["sorry, I cannot", "sorry, I cannot"],
    )]));
    let set = decompose("e", "cagr", "The spire fell.", &gw, &PromptSet::default()).unwrap();
    assert_eq!(set.claims.len(), 1);
    assert_eq!(set.claims[0].text, "The spire fell.");
    assert!(set.claims[0].flagged);
    assert_eq!(gw.count(Role::Extractor), 2);
}

#[test]
fn every_sentence_is_covered() {
    let gw = MockGateway::new(MockScript::new(vec![
        MockRule::new(Role::Extractor, [r#"[]"#, "nope"]).containing("SENTENCE: Two."),
        MockRule::new(Role::Extractor, [r#"[{"claim":"x"},{"claim":"y"}]"#]).cycling(),
    ]));
    let set = decompose("e", "cagr", "One. Two. Three!", &gw, &PromptSet::default()).unwrap();
    let covered: BTreeSet<usize> = set.claims.iter().map(|c| c.source_sentence).collect();
    assert_eq!(covered, BTreeSet::from([0, 1, 2]));
    let sources: Vec<usize> = set.claims.iter().map(|c| c.source_sentence).collect();
    assert!(sources.windows(2).all(|w| w[0] <= w[1]));
    assert_eq!(set.flagged(), 1);
}

#[test]
fn llm_judge_yes_marks_pair_supported() {
    let gw = MockGateway::new(MockScript::new(vec![
        MockRule::new(Role::Judge, ["Shown clearly.\n\nYES"]).containing("EVIDENCE-V1"),
        MockRule::new(Role::Judge, ["NO"]).cycling(),
    ]));
    let evidence = BTreeMap::from([
        ("v1".to_string(), "EVIDENCE-V1".to_string()),
        ("v2".to_string(), "EVIDENCE-V2".to_string()),
    ]);
    let j = judge_with_llm(&claim_set(1), &evidence, &gw, &PromptSet::default()).unwrap();
    assert_eq!(j.judge_kind, JudgeKind::LlmJudge);
    assert_eq!(
        j.claims[0].per_video,
        BTreeMap::from([("v1".into(), true), ("v2".into(), false)])
    );
    assert_eq!(groundedness(&j, &claim_set(1)).unwrap(), 1.0);
}

#[test]
fn unusable_verdict_counts_unsupported_and_flags() {
    let gw = MockGateway::new(MockScript::new(vec![MockRule::new(Role::Judge, ["maybe", "perhaps"])]));
    let evidence = BTreeMap::from([("v1".to_string(), "text".to_string())]);
    let j = judge_with_llm(&claim_set(1), &evidence, &gw, &PromptSet::default()).unwrap();
    assert!(!j.claims[0].supported());
    assert!(j.claims[0].flagged);
    assert_eq!(gw.count(Role::Judge), 2);
}

#[test]
fn evidence_holds_trace_text_and_transcript() {
    let mut v = video("v1", 1.0);
    v.transcript = Some("spoken words".into());
    let trace = SummaryTrace {
        video_id: "v1".into(),
        generic_summary: "generic".into(),
        rounds: vec![],
        terminated_by: Termination::BudgetExhausted,
        reasoner_calls: 0,
        audit: vec![],
    };
    let text = video_evidence(&v, Some(&trace));
    assert!(text.contains("generic") && text.contains("spoken words"));
}

#[test]
fn human_file_passthrough() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("j.json");
    std::fs::write(
        &path,
        r#"[{"claim_index":0,"video_id":"v1","supported":1},{"claim_index":1,"video_id":"v1","supported":1},{"claim_index":2,"video_id":"v1","supported":0}]"#,
    )
    .unwrap();
    let ids = BTreeSet::from(["v1".to_string()]);
    let j = load_human_judgments(&path, &claim_set(3), &ids).unwrap();
    let supported: Vec<bool> = j.claims.iter().map(ClaimVerdict::supported).collect();
    assert_eq!(supported, vec![true, true, false]);
    assert!((groundedness(&j, &claim_set(3)).unwrap() - 2.0 / 3.0).abs() < 1e-12);
}

#[test]
fn all_supported_is_one() {
    assert_eq!(groundedness(&judgment(&[true; 4]), &claim_set(4)).unwrap(), 1.0);
}

#[test]
fn empty_claim_set_never_scores_zero() {
    assert!(matches!(
        groundedness(&judgment(&[]), &claim_set(0)),
        Err(GroundingError::EmptyClaimSet)
    ));
}

#[test]
fn randomized_matrices_match_the_count_formula() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..500 {
        let n_claims = rng.gen_range(1..40);
        let n_videos = rng.gen_range(1..6);
        let claims: Vec<ClaimVerdict> = (0..n_claims)
            .map(|_| ClaimVerdict {
                per_video: (0..n_videos).map(|v| (format!("v{v}"), rng.gen_bool(0.3))).collect(),
                all_videos: None,
                flagged: false,
            })
            .collect();
        let hand = claims.iter().filter(|c| c.per_video.values().any(|&s| s)).count() as f64 / n_claims as f64;
        let j = GroundingJudgment {
            judge_kind: JudgeKind::LlmJudge,
            claims,
        };
        assert!((groundedness(&j, &claim_set(n_claims)).unwrap() - hand).abs() < 1e-12);
    }
}

proptest! {
    #[test]
    fn order_and_idle_videos_do_not_matter(supported in proptest::collection::vec(any::<bool>(), 1..30)) {
        let n = supported.len();
        let g = groundedness(&judgment(&supported), &claim_set(n)).unwrap();
        let mut reversed = supported.clone();
        reversed.reverse();
        prop_assert_eq!(groundedness(&judgment(&reversed), &claim_set(n)).unwrap(), g);
        let mut idle = judgment(&supported);
        for c in &mut idle.claims {
            c.per_video.insert("idle".into(), false);
        }
        prop_assert_eq!(groundedness(&idle, &claim_set(n)).unwrap(), g);
    }

    #[test]
    fn adding_claims_moves_g_by_the_identity(supported in proptest::collection::vec(any::<bool>(), 1..30)) {
        let n = supported.len();
        let g_old = groundedness(&judgment(&supported), &claim_set(n)).unwrap();
        let mut more = supported.clone();
        more.push(false);
        let g_new = groundedness(&judgment(&more), &claim_set(n + 1)).unwrap();
        prop_assert!((g_old - g_new - g_old / (n as f64 + 1.0)).abs() < 1e-12);
        if supported.iter().all(|&s| s) {
            let mut yes = supported.clone();
            yes.push(true);
            prop_assert_eq!(groundedness(&judgment(&yes), &claim_set(n + 1)).unwrap(), 1.0);
        }
    }
}
