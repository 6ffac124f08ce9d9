mod common;

use std::collections::BTreeMap;

use menli_core::nli::Direction;
use menli_core::perturb::{Lexicon, Phenomenon, PhenomenonSet};
use menli_core::scorer_io::{
    load_scores, read_requests, read_responses, records_from_responses, request_id, run_external_scorer, split_request_id,
    suite_requests, write_requests, write_responses, write_score_file, Candidate, LineScorer, LoadedScores,
};
use menli_core::suite::{build_ref_based, ParaMode, SeedRecord};
use menli_core::{Error, PoolingStrategy, ScoreMode, ScoreRequest, ScoreResponse, TestSuite};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const ECHO: &str = r#"sed -n 's/.*"request_id":"\([^"]*\)".*/{"request_id":"\1","scalar":1.0}/p' {in} > {out}"#;

fn small_suite() -> TestSuite {
    let seeds: Vec<SeedRecord> = common::corpus(20, 8)
        .into_iter()
        .enumerate()
        .map(|(i, s)| SeedRecord::new(format!("s{i:02}"), s.clone()).with_para(format!("Indeed, {s}")))
        .collect();
    let phenomena = [Phenomenon::NumberError, Phenomenon::Jumbling].map(PhenomenonSet::single);
    build_ref_based("protocol", &seeds, &phenomena, Lexicon::builtin(), 1, ParaMode::Original).unwrap()
}

#[test]
fn requests_survive_a_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("req.jsonl");
    let reqs = suite_requests(&small_suite(), ScoreMode::Scalar);
    assert_eq!(write_requests(&reqs, &path).unwrap(), reqs.len());
    let header: serde_json::Value = serde_json::from_str(std::fs::read_to_string(&path).unwrap().lines().next().unwrap()).unwrap();
    assert_eq!(header["kind"], "requests");
    assert_eq!(header["version"], 1);
    let mut want = reqs.clone();
    want.sort_by(|a, b| a.request_id.cmp(&b.request_id));
    assert_eq!(read_requests(&path).unwrap(), want);
}

#[test]
fn external_echo_scorer_answers_every_request() {
    let dir = tempfile::tempdir().unwrap();
    let reqs = suite_requests(&small_suite(), ScoreMode::Scalar);
    let (input, output) = (dir.path().join("in.jsonl"), dir.path().join("out.jsonl"));
    write_requests(&reqs, &input).unwrap();
    let got = run_external_scorer(ECHO, &input, &output, None).unwrap();
    assert_eq!(got.len(), reqs.len());
    for r in &reqs {
        assert_eq!(got[&r.request_id].scalar, Some(1.0));
    }
}

#[test]
fn responses_survive_a_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("resp.jsonl");
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let reqs = suite_requests(&small_suite(), ScoreMode::NliBoth);
    let sent: Vec<ScoreResponse> = reqs
        .iter()
        .map(|r| ScoreResponse::triples(&r.request_id, Some(common::random_triple(&mut rng)), Some(common::random_triple(&mut rng))))
        .collect();
    write_responses(&sent, &path).unwrap();
    let back = read_responses(&path, &reqs).unwrap();
    assert_eq!(back.len(), sent.len());
    for s in &sent {
        let b = &back[&s.request_id];
        for (x, y) in [(s.forward.unwrap(), b.forward.unwrap()), (s.backward.unwrap(), b.backward.unwrap())] {
            assert!((x.e - y.e).abs() < 1e-15 && (x.c - y.c).abs() < 1e-15 && (x.n - y.n).abs() < 1e-15);
        }
    }

    let scores = dir.path().join("scores.jsonl");
    write_score_file(&scores, &records_from_responses("nli", &back)).unwrap();
    let LoadedScores::Nli(table) = load_scores(&scores).unwrap() else { panic!("expected triples") };
    assert!(table.has_backward());
    assert_eq!(table.strategies(), PoolingStrategy::all());
    for s in PoolingStrategy::all() {
        let pooled = table.pooled(s).unwrap();
        for (id, v) in &pooled.para {
            let want = back[&request_id(id, Some(Candidate::Para), None)].directional().pool(s).unwrap();
            assert_eq!(v.len(), 1);
            assert!((v[0] - want).abs() < 1e-12);
        }
    }
}

#[test]
fn missing_and_foreign_responses_are_reported() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("resp.jsonl");
    let reqs: Vec<ScoreRequest> = (0..3).map(|i| ScoreRequest::new(format!("r{i}"), "a", "b", ScoreMode::Scalar)).collect();
    let sent = [ScoreResponse::scalar("r0", 0.1), ScoreResponse::scalar("r1", 0.2), ScoreResponse::scalar("zz", 0.3)];
    write_responses(&sent, &path).unwrap();
    match read_responses(&path, &reqs) {
        Err(Error::CoverageGap { missing, extra }) => {
            assert_eq!(missing, ["r2"]);
            assert_eq!(extra, ["zz"]);
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn line_scorer_speaks_one_response_per_request() {
    let cmd = r#"while IFS= read -r l; do echo "$l" | sed 's/.*"request_id":"\([^"]*\)".*/{"request_id":"\1","forward":{"e":0.5,"c":0.25,"n":0.25}}/'; done"#;
    let reqs = suite_requests(&small_suite(), ScoreMode::NliForward);
    let mut scorer = LineScorer::spawn(cmd).unwrap();
    let got = scorer.score_all(&reqs).unwrap();
    assert_eq!(got.len(), reqs.len());
    let s = PoolingStrategy::new(Direction::Forward, menli_core::nli::Formula::EMinusC);
    assert!(got.values().all(|r| r.directional().pool(s).unwrap() == 0.25));
}

proptest! {
    #[test]
    fn request_ids_split_back(item in "[a-z0-9:_-]{1,12}", cand in 0u8..3, reference in prop::option::of("[a-z0-9]{1,6}")) {
        let candidate = [None, Some(Candidate::Para), Some(Candidate::Adv)][cand as usize];
        let id = request_id(&item, candidate, reference.as_deref());
        let key = split_request_id(&id);
        prop_assert_eq!(key.item, item.as_str());
        prop_assert_eq!(key.candidate, candidate);
        prop_assert_eq!(key.reference, reference.as_deref());
    }
}

#[test]
fn ids_group_by_instance() {
    let reqs = suite_requests(&small_suite(), ScoreMode::Scalar);
    let mut per_item: BTreeMap<&str, usize> = BTreeMap::new();
    for r in &reqs {
        *per_item.entry(split_request_id(&r.request_id).item).or_default() += 1;
    }
    assert!(per_item.values().all(|&n| n == 2));
}
