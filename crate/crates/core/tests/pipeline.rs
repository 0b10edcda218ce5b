use pprs::engine::synth::{gen_synthetic, SynthSpec};
use pprs::engine::{
    plaintext_oracle, run_local, screen_then_link, serve_candidate, CandidateStatus, Connector, MemConnector,
    NoLinkage, Role, RunConfig, TcpConnector,
};
use pprs::error::Error;
use pprs::ot::OtMode;
use pprs::transport::{Channel, Phase};
use std::net::TcpListener;
use std::time::Duration;

fn dealer(seed: u64) -> RunConfig {
    RunConfig { ot_mode: OtMode::Dealer, seed: Some(seed), ..RunConfig::default() }
}

#[test]
fn tcp_session_matches_oracle() {
    let data = gen_synthetic(&SynthSpec { n: 150, overlap: 0.4, typo_rate: 0.2, seed: 21, ..Default::default() }).unwrap();
    let cfg = RunConfig::parse("schema = aware\nattributes = n:first_name+last_name:approximate; d:birth_date\not_mode = extended")
        .unwrap();
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap().to_string();
    let (cand_cfg, right) = (cfg.clone(), data.right.clone());
    let server = std::thread::spawn(move || serve_candidate(&cand_cfg, &right, &listener, 1));
    let conns: Vec<Box<dyn Connector>> = vec![Box::new(TcpConnector { addr, timeout: Duration::from_secs(10) })];
    let report = screen_then_link(&cfg, &data.left, &conns, &mut NoLinkage::default());
    let served = server.join().unwrap().unwrap();
    let outcome = report.candidates[0].outcome.as_ref().expect("screened");
    let oracle = plaintext_oracle(&data.left, &data.right, &cfg, &outcome.salt).unwrap();
    assert_eq!(outcome.c, oracle.c);
    assert_eq!(served[0].c, oracle.c);
    assert_eq!(served[0].salt, outcome.salt);
    assert!(outcome.counters.phase(Phase::Ofa).total_bytes() > 0);
}

#[test]
fn failing_candidate_is_isolated() {
    let data = gen_synthetic(&SynthSpec { n: 60, overlap: 0.5, seed: 22, ..Default::default() }).unwrap();
    let req = RunConfig { threshold: 10, ..dealer(1) };
    let (good, good_peer) = Channel::mem_pair();
    let (bad, bad_peer) = Channel::mem_pair();
    let mut wrong = RunConfig { role: Role::Candidate, ..dealer(2) };
    wrong.approximate = true;
    let ok_cfg = RunConfig { role: Role::Candidate, ..dealer(3) };
    let (r1, r2) = (data.right.clone(), data.right.clone());
    let t1 = std::thread::spawn(move || pprs::engine::run_screening(&ok_cfg, good_peer, &r1));
    let t2 = std::thread::spawn(move || pprs::engine::run_screening(&wrong, bad_peer, &r2));
    let conns: Vec<Box<dyn Connector>> = vec![
        Box::new(MemConnector::new("bad", bad)),
        Box::new(MemConnector::new("good", good)),
        Box::new(TcpConnector { addr: "127.0.0.1:1".into(), timeout: Duration::from_millis(200) }),
    ];
    let mut backend = NoLinkage::default();
    let report = screen_then_link(&req, &data.left, &conns, &mut backend);
    assert!(t1.join().unwrap().is_ok());
    assert!(matches!(t2.join().unwrap(), Err(Error::Handshake(_))));
    assert!(matches!(report.candidates[0].status, CandidateStatus::Errored(_)));
    assert_eq!(report.candidates[1].status, CandidateStatus::Passed);
    assert!(matches!(report.candidates[2].status, CandidateStatus::Errored(_)));
    assert_eq!(backend.calls, ["good"]);
    assert_eq!(report.summary.passed, 1);
}

#[test]
fn unset_seeds_give_fresh_salts() {
    let data = gen_synthetic(&SynthSpec { n: 20, overlap: 0.5, seed: 23, ..Default::default() }).unwrap();
    let cfg = RunConfig { ot_mode: OtMode::Dealer, ..RunConfig::default() };
    let cand = RunConfig { role: Role::Candidate, ..cfg.clone() };
    let (a, _) = run_local(&cfg, &cand, &data.left, &data.right).unwrap();
    let (b, _) = run_local(&cfg, &cand, &data.left, &data.right).unwrap();
    assert_ne!(a.salt, b.salt);
    assert_eq!(a.c, b.c);
}

#[test]
fn seeded_runs_are_reproducible() {
    let data = gen_synthetic(&SynthSpec { n: 40, overlap: 0.3, seed: 24, ..Default::default() }).unwrap();
    let cfg = dealer(9);
    let cand = RunConfig { role: Role::Candidate, ..dealer(10) };
    let (a, _) = run_local(&cfg, &cand, &data.left, &data.right).unwrap();
    let (b, _) = run_local(&cfg, &cand, &data.left, &data.right).unwrap();
    assert_eq!(a.salt, b.salt);
    assert_eq!(a.counters.total().total_bytes(), b.counters.total().total_bytes());
}

#[test]
fn only_the_count_is_revealed() {
    let data = gen_synthetic(&SynthSpec { n: 50, overlap: 0.5, missing_rate: 0.1, seed: 25, ..Default::default() }).unwrap();
    let cfg = RunConfig::parse(
        "schema = aware\nattributes = f:first_name; l:last_name; z:zip\nmodel = linear\nweights_matched = 1,1,1\n\
         weights_unmatched = 0,0,0\nweights_missing = 0.5,0.5,0.5\nscore_threshold = 2\not_mode = dealer\nseed = 4",
    )
    .unwrap();
    let cand = RunConfig { role: Role::Candidate, weights: None, ..cfg.clone() };
    let (a, b) = run_local(&cfg, &cand, &data.left, &data.right).unwrap();
    for o in [&a, &b] {
        assert_eq!(o.reveals, [("collaboration_value".to_string(), 1)]);
        assert_eq!(o.decisions, None);
    }
    assert_eq!(a.columns.len(), 3);
    assert_eq!(a.columns, b.columns);
}
