//! A requester and a candidate talking over loopback TCP.

use pprs::engine::synth::{gen_synthetic, SynthSpec};
use pprs::engine::{report::screening_text, screen_then_link, serve_candidate, Connector, NoLinkage, RunConfig, TcpConnector};
use pprs::error::Result;
use std::net::TcpListener;
use std::time::Duration;

fn main() -> Result<()> {
    let data = gen_synthetic(&SynthSpec { n: 1000, overlap: 0.3, seed: 6, ..Default::default() })?;
    let listener = TcpListener::bind("127.0.0.1:0")?;
    let addr = listener.local_addr()?.to_string();
    let cfg = RunConfig::parse("threshold = 200\nschema = aware\nattributes = name:first_name+last_name; dob:birth_date")?;
    let cand_cfg = cfg.clone();
    let right = data.right.clone();
    let server = std::thread::spawn(move || serve_candidate(&cand_cfg, &right, &listener, 1));
    let conns: Vec<Box<dyn Connector>> = vec![Box::new(TcpConnector { addr, timeout: Duration::from_secs(5) })];
    let report = screen_then_link(&cfg, &data.left, &conns, &mut NoLinkage::default());
    let served = server.join().expect("candidate thread")?;
    print!("{}", screening_text(&report));
    println!("\ncandidate saw c = {}", served[0].c);
    Ok(())
}
