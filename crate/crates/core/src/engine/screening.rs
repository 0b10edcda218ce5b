//! Screening many candidates and linking only the promising ones.

use super::config::{Role, RunConfig};
use super::{run_screening, ScreeningOutcome};
use crate::error::{Error, Result};
use crate::features::RecordTable;
use crate::transport::Channel;
use std::collections::{BTreeMap, HashMap};
use std::net::TcpListener;
use std::sync::Mutex;
use std::time::{Duration, Instant};

/// Opens a channel to one candidate.
pub trait Connector: Send + Sync {
    fn name(&self) -> String;
    fn open(&self) -> Result<Channel>;
}

pub struct TcpConnector {
    pub addr: String,
    pub timeout: Duration,
}

impl Connector for TcpConnector {
    fn name(&self) -> String {
        self.addr.clone()
    }

    fn open(&self) -> Result<Channel> {
        Channel::connect(self.addr.as_str(), self.timeout)
    }
}

/// A pre-connected channel, usable once.
pub struct MemConnector {
    name: String,
    chan: Mutex<Option<Channel>>,
}

impl MemConnector {
    pub fn new(name: impl Into<String>, chan: Channel) -> Self {
        Self { name: name.into(), chan: Mutex::new(Some(chan)) }
    }
}

impl Connector for MemConnector {
    fn name(&self) -> String {
        self.name.clone()
    }

    fn open(&self) -> Result<Channel> {
        self.chan
            .lock()
            .expect("connector lock")
            .take()
            .ok_or_else(|| Error::Config(format!("channel to {} already used", self.name)))
    }
}

/// Downstream record linkage for candidates that pass screening.
pub trait LinkageBackend {
    /// `(requester row, candidate row)` pairs.
    fn link(&mut self, candidate: &str, requester: &RecordTable) -> Result<Vec<(usize, usize)>>;
}

/// NOT PRIVATE. Joins on whole-row equality with the candidate's table in
/// the clear; a stand-in for a real linkage protocol.
#[derive(Debug, Default)]
pub struct PlaintextJoin {
    pub tables: BTreeMap<String, RecordTable>,
    /// Candidates linked so far, in call order.
    pub calls: Vec<String>,
}

impl PlaintextJoin {
    pub fn new(tables: BTreeMap<String, RecordTable>) -> Self {
        Self { tables, calls: Vec::new() }
    }
}

impl LinkageBackend for PlaintextJoin {
    fn link(&mut self, candidate: &str, requester: &RecordTable) -> Result<Vec<(usize, usize)>> {
        self.calls.push(candidate.to_string());
        let other = self
            .tables
            .get(candidate)
            .ok_or_else(|| Error::Config(format!("no table for candidate {candidate}")))?;
        let mut index: HashMap<&[Option<String>], Vec<usize>> = HashMap::new();
        for (j, row) in other.rows().iter().enumerate() {
            index.entry(row.as_slice()).or_default().push(j);
        }
        let mut out = Vec::new();
        for (i, row) in requester.rows().iter().enumerate() {
            for &j in index.get(row.as_slice()).map_or(&[][..], Vec::as_slice) {
                out.push((i, j));
            }
        }
        Ok(out)
    }
}

/// Records which candidates would be linked without linking anything.
#[derive(Debug, Default)]
pub struct NoLinkage {
    pub calls: Vec<String>,
}

impl LinkageBackend for NoLinkage {
    fn link(&mut self, candidate: &str, _requester: &RecordTable) -> Result<Vec<(usize, usize)>> {
        self.calls.push(candidate.to_string());
        Ok(Vec::new())
    }
}

/// Candidate side: accepts `sessions` requesters on `listener` in turn.
pub fn serve_candidate(
    cfg: &RunConfig,
    table: &RecordTable,
    listener: &TcpListener,
    sessions: usize,
) -> Result<Vec<ScreeningOutcome>> {
    let mut c = cfg.clone();
    c.role = Role::Candidate;
    let timeout = Duration::from_secs(cfg.timeout_secs);
    (0..sessions)
        .map(|_| Channel::accept(listener, timeout).and_then(|ch| run_screening(&c, ch, table)))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CandidateStatus {
    Passed,
    Below,
    Errored(String),
}

#[derive(Debug, Clone)]
pub struct CandidateReport {
    pub name: String,
    pub status: CandidateStatus,
    pub outcome: Option<ScreeningOutcome>,
    pub screen_seconds: f64,
    pub pprl_seconds: Option<f64>,
    pub links: Option<Vec<(usize, usize)>>,
}

#[derive(Debug, Clone)]
pub struct ScreeningReport {
    pub threshold: u64,
    pub candidates: Vec<CandidateReport>,
    pub summary: Summary,
}

/// Cost model of screening-then-linkage against linking everyone.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub total: usize,
    pub passed: usize,
    /// Fraction of candidates that passed.
    pub alpha: f64,
    /// Mean screening time per candidate.
    pub t_pprs: f64,
    /// Mean linkage time per linked candidate.
    pub t_pprl: Option<f64>,
    /// `t_pprs / t_pprl + α`; below 1 means screening paid off.
    pub gamma: Option<f64>,
}

impl Summary {
    pub fn compute(total: usize, passed: usize, screen_secs: &[f64], pprl_secs: &[f64]) -> Summary {
        let mean = |v: &[f64]| (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64);
        let alpha = if total == 0 { 0.0 } else { passed as f64 / total as f64 };
        let t_pprs = mean(screen_secs).unwrap_or(0.0);
        let t_pprl = mean(pprl_secs);
        let gamma = t_pprl.filter(|&t| t > 0.0).map(|t| t_pprs / t + alpha);
        Summary { total, passed, alpha, t_pprs, t_pprl, gamma }
    }
}

/// Screens every candidate, then links those with `c > threshold`. A failing
/// candidate is recorded and skipped.
pub fn screen_then_link(
    cfg: &RunConfig,
    table: &RecordTable,
    candidates: &[Box<dyn Connector>],
    pprl: &mut dyn LinkageBackend,
) -> ScreeningReport {
    let mut reports: Vec<CandidateReport> = Vec::with_capacity(candidates.len());
    let screen_one = |idx: usize, conn: &dyn Connector| -> CandidateReport {
        let mut c = cfg.clone();
        c.role = Role::Requester;
        c.seed = cfg.seed.map(|s| s.wrapping_add((idx as u64).wrapping_mul(0xa076_1d64_78bd_642f)));
        let start = Instant::now();
        let res = conn.open().and_then(|ch| run_screening(&c, ch, table));
        let screen_seconds = start.elapsed().as_secs_f64();
        let (status, outcome) = match res {
            Ok(o) if o.c > cfg.threshold => (CandidateStatus::Passed, Some(o)),
            Ok(o) => (CandidateStatus::Below, Some(o)),
            Err(e) => (CandidateStatus::Errored(e.to_string()), None),
        };
        CandidateReport { name: conn.name(), status, outcome, screen_seconds, pprl_seconds: None, links: None }
    };
    for (chunk_no, chunk) in candidates.chunks(cfg.parallel.max(1)).enumerate() {
        let base = chunk_no * cfg.parallel.max(1);
        if chunk.len() == 1 {
            reports.push(screen_one(base, chunk[0].as_ref()));
            continue;
        }
        std::thread::scope(|s| {
            let handles: Vec<_> = chunk
                .iter()
                .enumerate()
                .map(|(k, conn)| {
                    let f = &screen_one;
                    s.spawn(move || f(base + k, conn.as_ref()))
                })
                .collect();
            reports.extend(handles.into_iter().map(|h| h.join().expect("screening thread panicked")));
        });
    }
    for r in reports.iter_mut().filter(|r| r.status == CandidateStatus::Passed) {
        let start = Instant::now();
        match pprl.link(&r.name, table) {
            Ok(l) => r.links = Some(l),
            Err(e) => r.status = CandidateStatus::Errored(format!("linkage: {e}")),
        }
        r.pprl_seconds = Some(start.elapsed().as_secs_f64());
    }
    let screen: Vec<f64> = reports.iter().map(|r| r.screen_seconds).collect();
    let pprl_t: Vec<f64> = reports.iter().filter_map(|r| r.pprl_seconds).collect();
    let passed = reports.iter().filter(|r| r.pprl_seconds.is_some()).count();
    ScreeningReport { threshold: cfg.threshold, summary: Summary::compute(reports.len(), passed, &screen, &pprl_t), candidates: reports }
}
