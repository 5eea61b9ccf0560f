mod common;

use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::sync::{Arc, Mutex};

use cag_core::engine::{Engine, EngineError};
use cag_core::gateway::{ChatRequest, EndpointConfig, HttpGateway, MediaRef, Message, RetryPolicy};
use cag_core::metrics::{Scorer, ScorerClient};
use cag_core::{Gateway, GatewayError, Role};
use serde_json::Value;

#[derive(Debug, Clone)]
struct Seen {
    path: String,
    authorization: Option<String>,
    body: Value,
}

/// Serves the scripted `(status, body)` replies in order, one per
/// connection, recording every request.
fn stub(replies: Vec<(u16, String)>) -> (String, Arc<Mutex<Vec<Seen>>>) {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let base = format!("http://{}", listener.local_addr().unwrap());
    let seen = Arc::new(Mutex::new(Vec::new()));
    let log = Arc::clone(&seen);
    std::thread::spawn(move || {
        for (status, body) in replies {
            let Ok((stream, _)) = listener.accept() else { return };
            let mut reader = BufReader::new(stream);
            let mut line = String::new();
            reader.read_line(&mut line).unwrap();
            let path = line.split_whitespace().nth(1).unwrap_or_default().to_string();
            let mut length = 0;
            let mut authorization = None;
            loop {
                let mut header = String::new();
                reader.read_line(&mut header).unwrap();
                let header = header.trim_end();
                if header.is_empty() {
                    break;
                }
                let (name, value) = header.split_once(':').unwrap();
                match name.to_ascii_lowercase().as_str() {
                    "content-length" => length = value.trim().parse().unwrap(),
                    "authorization" => authorization = Some(value.trim().to_string()),
                    _ => {}
                }
            }
            let mut raw = vec![0; length];
            reader.read_exact(&mut raw).unwrap();
            log.lock().unwrap().push(Seen {
                path,
                authorization,
                body: serde_json::from_slice(&raw).unwrap_or(Value::Null),
            });
            let mut stream = reader.into_inner();
            let reply = format!(
                "HTTP/1.1 {status} X\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
                body.len()
            );
            stream.write_all(reply.as_bytes()).unwrap();
        }
    });
    (base, seen)
}

fn ok_body(content: &str) -> String {
    serde_json::json!({
        "choices": [{"message": {"role": "assistant", "content": content}}],
        "usage": {"prompt_tokens": 12, "completion_tokens": 5}
    })
    .to_string()
}

fn gateway(base: &str, role: Role, retries: u32) -> HttpGateway {
    let mut cfg = EndpointConfig::new(base, "served-model");
    cfg.api_key = Some("k-123".into());
    HttpGateway::new(
        BTreeMap::from([(role, cfg)]),
        RetryPolicy {
            max_retries: retries,
            base_delay_ms: 1,
        },
    )
    .unwrap()
}

fn summarizer_request() -> ChatRequest {
    ChatRequest::new(
        Role::VideoSummarizer,
        vec![Message::user("Describe the video in detail.")],
    )
    .with_media(MediaRef {
        uri: "file:///videos/v1.mp4".into(),
        fps: Some(1.0),
    })
}

#[test]
fn wire_contract_and_verbatim_reply() {
    let scripted = "  A fire at a cathedral.\nSmoke \u{2014} everywhere.  ";
    let (base, seen) = stub(vec![(200, ok_body(scripted))]);
    let gw = gateway(&base, Role::VideoSummarizer, 0);
    let resp = gw.complete(&summarizer_request()).unwrap();
    assert_eq!(resp.text, scripted);
    assert_eq!(resp.usage.prompt_tokens, 12);

    let seen = seen.lock().unwrap();
    assert_eq!(seen[0].path, "/chat/completions");
    assert_eq!(seen[0].authorization.as_deref(), Some("Bearer k-123"));
    let body = &seen[0].body;
    assert_eq!(body["model"], "served-model");
    assert_eq!(body["temperature"], 0.0);
    assert_eq!(body["seed"], 0);
    assert!(body["max_tokens"].as_u64().unwrap() > 0);
    let parts = body["messages"][0]["content"].as_array().unwrap();
    assert_eq!(parts[0]["text"], "Describe the video in detail.");
    assert_eq!(parts[1]["type"], "video_url");
    assert_eq!(parts[1]["url"], "file:///videos/v1.mp4");
    assert_eq!(parts[1]["fps"], 1.0);
}

#[test]
fn server_errors_are_retried() {
    let (base, seen) = stub(vec![(503, "{}".into()), (200, ok_body("fine"))]);
    let gw = gateway(&base, Role::Reasoner, 2);
    let resp = gw
        .complete(&ChatRequest::new(Role::Reasoner, vec![Message::user("q")]))
        .unwrap();
    assert_eq!(resp.text, "fine");
    assert_eq!(seen.lock().unwrap().len(), 2);
}

#[test]
fn exhausted_retries_are_transport_errors() {
    let (base, _) = stub(vec![(500, "{}".into()), (429, "{}".into())]);
    let gw = gateway(&base, Role::Reasoner, 1);
    let err = gw
        .complete(&ChatRequest::new(Role::Reasoner, vec![Message::user("q")]))
        .unwrap_err();
    assert!(matches!(err, GatewayError::Transport { attempts: 2, .. }));
}

#[test]
fn context_overflow_is_not_retried() {
    let body = r#"{"error":{"message":"This model's maximum context length is 32768 tokens","code":"context_length_exceeded"}}"#;
    let (base, seen) = stub(vec![(400, body.into()), (200, ok_body("never"))]);
    let gw = gateway(&base, Role::Aggregator, 3);
    let err = gw
        .complete(&ChatRequest::new(Role::Aggregator, vec![Message::user("long")]))
        .unwrap_err();
    assert!(matches!(err, GatewayError::ContextOverflow(_)));
    assert_eq!(seen.lock().unwrap().len(), 1);
}

#[test]
fn other_client_errors_are_rejections() {
    let (base, _) = stub(vec![(401, r#"{"error":"bad key"}"#.into())]);
    let gw = gateway(&base, Role::Judge, 3);
    let err = gw
        .complete(&ChatRequest::new(Role::Judge, vec![Message::user("q")]))
        .unwrap_err();
    assert!(matches!(err, GatewayError::Rejected { status: 401, .. }));
}

#[test]
fn non_json_success_is_a_protocol_violation() {
    let (base, _) = stub(vec![(200, "<html>proxy</html>".into())]);
    let gw = gateway(&base, Role::Judge, 0);
    let err = gw
        .complete(&ChatRequest::new(Role::Judge, vec![Message::user("q")]))
        .unwrap_err();
    assert!(matches!(err, GatewayError::ProtocolViolation(_)));
}

#[test]
fn unconfigured_role_is_reported() {
    let gw = HttpGateway::new(BTreeMap::new(), RetryPolicy::default()).unwrap();
    let err = gw
        .complete(&ChatRequest::new(Role::Judge, vec![Message::user("q")]))
        .unwrap_err();
    assert_eq!(err, GatewayError::NotConfigured(Role::Judge));
}

#[test]
fn unreachable_endpoint_names_the_video() {
    let port = TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port();
    let gw = gateway(&format!("http://127.0.0.1:{port}"), Role::VideoSummarizer, 0);
    match Engine::new(&gw).generic_summarize(&common::video("v42", 3.0)) {
        Err(EngineError::Gateway {
            video_id,
            source: GatewayError::Transport { .. },
            ..
        }) => assert_eq!(video_id.as_deref(), Some("v42")),
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn external_scorer_contract() {
    let (base, seen) = stub(vec![
        (200, r#"{"score":0.8123,"version":"bertscore-0.3.13"}"#.into()),
        (500, "boom".into()),
    ]);
    let client = ScorerClient::new(&base);
    let s = client.score("pred text", "ref text", Scorer::Bertscore).unwrap();
    assert_eq!(s.score, 0.8123);
    assert_eq!(s.version, "bertscore-0.3.13");
    {
        let seen = seen.lock().unwrap();
        assert_eq!(seen[0].path, "/score");
        assert_eq!(seen[0].body["pred"], "pred text");
        assert_eq!(seen[0].body["ref"], "ref text");
        assert_eq!(seen[0].body["scorer"], "BERTSCORE");
    }
    assert!(matches!(
        client.score("a", "b", Scorer::Alignscore),
        Err(GatewayError::Rejected { status: 500, .. })
    ));
}
