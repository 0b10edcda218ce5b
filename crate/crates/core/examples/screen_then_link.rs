//! Screening five candidates in-process, then linking only those above the threshold.

use pprs::engine::synth::{gen_synthetic, SynthSpec};
use pprs::engine::{report::screening_text, screen_then_link, Connector, MemConnector, PlaintextJoin, Role, RunConfig};
use pprs::error::Result;
use pprs::transport::Channel;
use std::collections::BTreeMap;

fn main() -> Result<()> {
    let req = RunConfig { threshold: 100, parallel: 5, ..RunConfig::default() };
    let base = gen_synthetic(&SynthSpec { n: 400, overlap: 0.0, seed: 1, ..Default::default() })?;
    let mut conns: Vec<Box<dyn Connector>> = Vec::new();
    let mut tables = BTreeMap::new();
    let mut servers = Vec::new();
    for (k, overlap) in [0.1, 0.6, 0.05, 0.8, 0.2].into_iter().enumerate() {
        let d = gen_synthetic(&SynthSpec { n: 400, overlap, seed: 1, ..Default::default() })?;
        let name = format!("candidate-{k}");
        let (mine, theirs) = Channel::mem_pair();
        conns.push(Box::new(MemConnector::new(&name, mine)));
        tables.insert(name, d.right.clone());
        let cfg = RunConfig { role: Role::Candidate, seed: Some(100 + k as u64), ..req.clone() };
        servers.push(std::thread::spawn(move || pprs::engine::run_screening(&cfg, theirs, &d.right)));
    }
    let mut backend = PlaintextJoin::new(tables);
    let report = screen_then_link(&req, &base.left, &conns, &mut backend);
    for s in servers {
        s.join().expect("candidate thread")?;
    }
    print!("{}", screening_text(&report));
    println!("\nlinked: {:?}", backend.calls);
    Ok(())
}
