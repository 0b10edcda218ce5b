//! End-to-end screening: feature engineering, per-column circuit-PSI,
//! alignment, scoring and the revealed collaboration value.

pub mod bench;
pub mod config;
pub mod data;
pub mod oracle;
pub mod report;
pub mod screening;
pub mod synth;

pub use config::{ModelKind, Role, RunConfig};
pub use oracle::{plaintext_oracle, OracleResult};
pub use screening::{
    screen_then_link, serve_candidate, CandidateReport, CandidateStatus, Connector, LinkageBackend, MemConnector, NoLinkage,
    PlaintextJoin, ScreeningReport, TcpConnector,
};

use crate::binning::BinningParams;
use crate::bits::Bits;
use crate::cpsi::cpsi_attribute;
use crate::error::{Error, Result};
use crate::features::{featurize, RecordTable};
use crate::ofa::ofa_execute;
use crate::score::{band_or, collaboration_value, decide_all_match, decide_threshold, score_linear, share_weights};
use crate::session::{run_pair_with, Party, Session, SessionConfig};
use crate::transport::{ByteCounters, Channel, Phase, Tag};
use std::collections::BTreeMap;
use std::time::Instant;

/// Hashing statistics of one matching column.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ColumnStats {
    pub bins: usize,
    /// Sender bin capacity, visible to both parties.
    pub beta: usize,
    pub retries: u32,
}

/// What one party learns from a screening run.
#[derive(Debug, Clone)]
pub struct ScreeningOutcome {
    pub party: Party,
    pub c: u64,
    /// Requester only, and only when both parties enabled the reveal.
    pub decisions: Option<Vec<bool>>,
    pub salt: [u8; 32],
    pub counters: ByteCounters,
    pub ot_counts: BTreeMap<Phase, u64>,
    pub seconds: f64,
    pub columns: Vec<ColumnStats>,
    pub reveals: Vec<(String, usize)>,
}

pub fn session_config(cfg: &RunConfig, headers: &[String]) -> SessionConfig {
    let mut s = SessionConfig::new(cfg.ot_mode, cfg.seed.unwrap_or_else(rand::random));
    s.params = cfg.canonical_params(headers);
    s
}

/// Runs the whole pipeline on an established session.
pub fn screen_session(sess: &mut Session, cfg: &RunConfig, table: &RecordTable) -> Result<ScreeningOutcome> {
    let start = Instant::now();
    let party = sess.party();
    let salt = sess.salt();
    let schema = cfg.schema_for(&table.headers)?;
    let derived = featurize(table, &schema, &salt)?;
    let binning = BinningParams { eps: cfg.eps, ..BinningParams::default() };

    let mut aligned = Vec::with_capacity(derived.columns.len());
    let mut columns = Vec::with_capacity(derived.columns.len());
    for (k, col) in derived.columns.iter().enumerate() {
        let out = cpsi_attribute(sess, &col.values, k as u64, &binning)?;
        columns.push(ColumnStats { bins: out.bins, beta: out.beta, retries: out.retries });
        aligned.push(ofa_execute(sess, &out.membership, out.perm.as_ref(), cfg.ofa)?);
    }
    let per_attr = band_or(sess, &aligned, &derived.group_columns())?;
    let ring = cfg.ring();
    let d = match cfg.model {
        ModelKind::AllMatch => decide_all_match(sess, &per_attr)?,
        ModelKind::Linear => {
            let mine = (party == Party::P0 || cfg.public_weights).then_some(()).and(cfg.weights.as_ref());
            let w = share_weights(sess, mine, per_attr.len(), ring, cfg.public_weights)?;
            let missing = (party == Party::P0).then_some(derived.missing.as_slice());
            let s = score_linear(sess, &per_attr, &w, missing, cfg.missing_mode)?;
            decide_threshold(sess, &s, &w.threshold)?
        }
    };
    let (c, _) = collaboration_value(sess, &d, ring)?;
    let decisions = reveal_decisions(sess, &d.bits, cfg.reveal_decisions)?;
    Ok(ScreeningOutcome {
        party,
        c,
        decisions,
        salt,
        counters: sess.counters(),
        ot_counts: sess.ot_counts(),
        seconds: start.elapsed().as_secs_f64(),
        columns,
        reveals: sess.reveal_log().to_vec(),
    })
}

/// Opens the decision bits to P0 when both parties opted in.
fn reveal_decisions(sess: &mut Session, share: &Bits, enabled: bool) -> Result<Option<Vec<bool>>> {
    let prev = sess.enter(Phase::Reveal);
    let out = (|| {
        let theirs = sess.exchange(Tag::Data, &[enabled as u8])?;
        if !(enabled && theirs.first() == Some(&1)) {
            return Ok(None);
        }
        sess.log_reveal("decisions", share.len());
        match sess.party() {
            Party::P1 => {
                sess.send(Tag::Reveal, &share.to_bytes())?;
                Ok(None)
            }
            Party::P0 => {
                let bytes = sess.recv(Tag::Reveal)?;
                let other = Bits::from_bytes(&bytes, share.len())
                    .ok_or(Error::LengthMismatch { expected: share.len(), actual: bytes.len() * 8 })?;
                Ok(Some(share.xor(&other).to_bools()))
            }
        }
    })();
    sess.enter(prev);
    out
}

/// Handshake on `chan` in the configured role, then [`screen_session`].
pub fn run_screening(cfg: &RunConfig, chan: Channel, table: &RecordTable) -> Result<ScreeningOutcome> {
    let party = match cfg.role {
        Role::Requester => Party::P0,
        Role::Candidate => Party::P1,
    };
    let mut sess = Session::establish(party, chan, &session_config(cfg, &table.headers))?;
    screen_session(&mut sess, cfg, table)
}

/// Both parties in one process over an in-memory channel.
pub fn run_local(
    cfg0: &RunConfig,
    cfg1: &RunConfig,
    left: &RecordTable,
    right: &RecordTable,
) -> Result<(ScreeningOutcome, ScreeningOutcome)> {
    let s0 = session_config(cfg0, &left.headers);
    let mut s1 = session_config(cfg1, &right.headers);
    if cfg0.seed.is_some() && cfg0.seed == cfg1.seed {
        s1.seed = s1.seed.wrapping_add(0x9e37_79b9_7f4a_7c15);
    }
    run_pair_with(&s0, &s1, |s| screen_session(s, cfg0, left), |s| screen_session(s, cfg1, right))
}
