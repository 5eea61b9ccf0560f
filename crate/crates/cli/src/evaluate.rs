use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use cag_core::claims::{
    decompose, groundedness, judge_with_llm, load_human_judgments, video_evidence, ClaimSet, GroundingJudgment,
};
use cag_core::engine::{read_run_artifact, RunArtifact};
use cag_core::metrics::{arg_f1, rouge_l, rouge_n, QuestionBank, Scorer, ScorerClient};
use cag_core::parallel::bounded_map;
use cag_core::prompts::PromptSet;
use cag_core::retrieval::{ndcg_at_k, NdcgReport, DEFAULT_TOP_K};
use cag_core::{Corpus, Method, Role};

use crate::backend::Backend;
use crate::config::{self, invalid, FileConfig, Grounding};
use crate::report::{Report, Row};
use crate::EvaluateArgs;

const DEFAULT_CONCURRENCY: usize = 4;

struct Found {
    path: PathBuf,
    event_id: String,
    method: Method,
}

/// Artifacts laid out as `{runs}/{event_id}/{method}.json`, sorted by path.
fn discover(runs: &Path, events: &[String], only: Option<Method>) -> anyhow::Result<Vec<Found>> {
    let read = |p: &Path| std::fs::read_dir(p).map_err(|e| invalid(format!("MissingRuns: {}: {e}", p.display())));
    let mut found = Vec::new();
    for entry in read(runs)? {
        let dir = entry?.path();
        if !dir.is_dir() {
            continue;
        }
        let event_id = dir.file_name().unwrap_or_default().to_string_lossy().to_string();
        if !events.is_empty() && !events.contains(&event_id) {
            continue;
        }
        for file in read(&dir)? {
            let path = file?.path();
            let name = path.file_name().unwrap_or_default().to_string_lossy().to_string();
            let Some(method) = name.strip_suffix(".json").and_then(|s| s.parse::<Method>().ok()) else {
                continue;
            };
            if only.is_none_or(|m| m == method) {
                found.push(Found {
                    path,
                    event_id: event_id.clone(),
                    method,
                });
            }
        }
    }
    found.sort_by(|a, b| a.path.cmp(&b.path));
    if found.is_empty() {
        return Err(invalid(format!(
            "MissingRuns: no run artifacts under {}",
            runs.display()
        )));
    }
    Ok(found)
}

fn claims_path(artifact: &Path) -> PathBuf {
    artifact.with_extension("claims.json")
}

struct Context<'a> {
    corpus: &'a Corpus,
    backend: &'a Backend,
    prompts: &'a PromptSet,
    bank: &'a QuestionBank,
    scorer: Option<ScorerClient>,
    grounding: Grounding,
    judgments: Option<PathBuf>,
    judgments_is_file: bool,
    ndcg: Option<NdcgReport>,
    arg_enabled: bool,
}

impl Context<'_> {
    fn claims(&self, found: &Found, artifact: &RunArtifact) -> Result<ClaimSet, String> {
        let cache = claims_path(&found.path);
        if let Ok(raw) = std::fs::read_to_string(&cache) {
            if let Ok(set) = serde_json::from_str::<ClaimSet>(&raw) {
                if set.event_id == found.event_id && set.method == found.method.as_str() {
                    return Ok(set);
                }
            }
        }
        if !self.backend.has_role(Role::Extractor) {
            return Err("claim decomposition needs an EXTRACTOR endpoint".into());
        }
        let set = decompose(
            &found.event_id,
            found.method.as_str(),
            &artifact.article.body,
            self.backend.gateway(),
            self.prompts,
        )
        .map_err(|e| format!("claim decomposition: {e}"))?;
        let json = serde_json::to_string_pretty(&set).expect("claims serialize");
        std::fs::write(&cache, json + "\n").map_err(|e| format!("cannot cache claims: {e}"))?;
        Ok(set)
    }

    fn judge(&self, found: &Found, artifact: &RunArtifact, claims: &ClaimSet) -> Result<GroundingJudgment, String> {
        let video_ids: BTreeSet<String> = artifact.provenance.video_ids.iter().cloned().collect();
        match self.grounding {
            Grounding::Off => unreachable!("grounding is off"),
            Grounding::Human => {
                let base = self.judgments.as_ref().expect("checked at startup");
                let path = if self.judgments_is_file {
                    base.clone()
                } else {
                    base.join(&found.event_id).join(format!("{}.json", found.method))
                };
                load_human_judgments(&path, claims, &video_ids).map_err(|e| e.to_string())
            }
            Grounding::Llm => {
                let mut evidence = BTreeMap::new();
                for id in &video_ids {
                    let video = self
                        .corpus
                        .video(id)
                        .ok_or_else(|| format!("video {id} is not in the corpus"))?;
                    let trace = artifact.traces.iter().find(|t| &t.video_id == id);
                    evidence.insert(id.clone(), video_evidence(video, trace));
                }
                judge_with_llm(claims, &evidence, self.backend.gateway(), self.prompts).map_err(|e| e.to_string())
            }
        }
    }

    fn row(&self, found: &Found) -> Row {
        let mut row = Row::new(&found.event_id, found.method);
        let artifact = match read_run_artifact(&found.path) {
            Ok(a) => a,
            Err(e) => {
                row.errors.push(format!("cannot read {}: {e}", found.path.display()));
                return row;
            }
        };
        let Some(event) = self.corpus.event(&found.event_id) else {
            row.errors.push("event is not in the corpus".into());
            return row;
        };
        let pred = &artifact.article.body;
        let reference = &event.reference_article;
        row.rouge_1 = rouge_n(pred, reference, 1).f1;
        row.rouge_2 = rouge_n(pred, reference, 2).f1;
        row.rouge_l = rouge_l(pred, reference).f1;

        if let Some(scorer) = &self.scorer {
            match scorer.score(pred, reference, Scorer::Bertscore) {
                Ok(s) => row.bertscore = Some(s.score),
                Err(e) => row.errors.push(format!("BERTScore: {e}")),
            }
            match scorer.score(pred, reference, Scorer::Alignscore) {
                Ok(s) => row.alignscore = Some(s.score),
                Err(e) => row.errors.push(format!("AlignScore: {e}")),
            }
        }

        if self.arg_enabled {
            match arg_f1(
                pred,
                reference,
                event.event_type,
                self.bank,
                self.backend.gateway(),
                self.prompts,
            ) {
                Ok(arg) => {
                    row.arg_edit_f1 = arg.edit_f1;
                    row.arg_exact_f1 = arg.exact_f1;
                    row.arg_questions_scored = Some(arg.scored());
                    row.arg_questions_flagged = Some(arg.flagged());
                }
                Err(e) => row.errors.push(format!("Arg: {e}")),
            }
        }

        if self.grounding != Grounding::Off {
            let result = self.claims(found, &artifact).and_then(|claims| {
                row.claims = Some(claims.len());
                let judgment = self.judge(found, &artifact, &claims)?;
                row.judge_kind = Some(judgment.judge_kind);
                row.flagged_claims = Some(claims.flagged() + judgment.flagged());
                groundedness(&judgment, &claims).map_err(|e| e.to_string())
            });
            match result {
                Ok(g) => row.groundedness = Some(g),
                Err(e) => row.errors.push(format!("G: {e}")),
            }
        }

        let from_run = artifact
            .provenance
            .video_source
            .as_deref()
            .is_some_and(|s| s.starts_with("rag"));
        if let (true, Some(report)) = (from_run, &self.ndcg) {
            row.ndcg = report.per_event.get(&found.event_id).copied();
        }
        row
    }
}

/// Returns whether every artifact was scored without error.
pub fn run(args: EvaluateArgs) -> anyhow::Result<bool> {
    let file = FileConfig::discover(args.common.config.as_deref())?;
    let corpus = config::load_corpus(args.common.corpus.as_deref().or(file.corpus.as_deref()))?;
    config::select_events(&corpus, &args.common.events)?;
    let runs = args
        .runs
        .or(args.out)
        .or(file.out.clone())
        .unwrap_or_else(|| PathBuf::from("runs"));
    let only = args.method.as_deref().map(config::parse_method).transpose()?;
    let found = discover(&runs, &args.common.events, only)?;

    let grounding = args.grounding.or(file.grounding).unwrap_or_default();
    let judgments = args.judgments.or(file.judgments.clone());
    let mut judgments_is_file = false;
    if grounding == Grounding::Human {
        let path = judgments
            .as_ref()
            .ok_or_else(|| invalid("--grounding human needs --judgments"))?;
        if !path.exists() {
            return Err(invalid(format!("judgments {} do not exist", path.display())));
        }
        judgments_is_file = path.is_file();
        if judgments_is_file && found.len() > 1 {
            return Err(invalid(
                "a single judgments file needs exactly one artifact; narrow with --event and --method or pass a directory",
            ));
        }
    }

    let backend = Backend::build(args.common.mock.as_deref().or(file.mock.as_deref()), &file)?;
    if grounding == Grounding::Llm {
        backend.require(&[Role::Extractor, Role::Judge])?;
    }
    let arg_enabled = backend.has_role(Role::Extractor);
    if !arg_enabled {
        log::warn!("no EXTRACTOR endpoint; Arg columns are left empty");
    }
    let prompts = config::load_prompts(args.common.prompts.as_deref().or(file.prompts.as_deref()))?;
    let bank = match args.questions.or(file.questions.clone()) {
        Some(p) => QuestionBank::load(&p).map_err(|e| invalid(e.to_string()))?,
        None => QuestionBank::builtin(),
    };
    let ndcg = match args.run.or(file.run.clone()) {
        Some(p) => {
            let run = config::load_run(Some(&p))?;
            let qrels = config::load_qrels(args.qrels.or(file.qrels.clone()).as_deref(), Some(&corpus))?;
            Some(ndcg_at_k(
                &run,
                &qrels,
                args.top_k.or(file.top_k).unwrap_or(DEFAULT_TOP_K),
            ))
        }
        None => None,
    };

    let ctx = Context {
        corpus: &corpus,
        backend: &backend,
        prompts: &prompts,
        bank: &bank,
        scorer: args.scorer_url.or(file.scorer_url.clone()).map(ScorerClient::new),
        grounding,
        judgments,
        judgments_is_file,
        ndcg,
        arg_enabled,
    };
    let cap = args
        .common
        .concurrency
        .or(file.concurrency)
        .unwrap_or(DEFAULT_CONCURRENCY)
        .min(backend.gateway().max_concurrency());
    let rows = bounded_map(&found, cap, |_, f| ctx.row(f));

    let report = Report::new(rows);
    let dir = args.report.unwrap_or_else(|| runs.clone());
    report.write(&dir)?;
    print!("{}", report.table());
    Ok(report.rows.iter().all(|r| r.errors.is_empty()))
}
