//! Per-execution protocol state shared by every two-party module.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::ot::{OtMode, OtState};
use crate::shares::TriplePool;
use crate::transport::{
    handshake_initiate, handshake_respond, ByteCounters, Channel, Frame, Handshake, Phase, Tag,
    MAX_FRAME, PROTOCOL_VERSION,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Party {
    P0,
    P1,
}

impl Party {
    pub fn index(self) -> usize {
        match self {
            Party::P0 => 0,
            Party::P1 => 1,
        }
    }

    pub fn other(self) -> Party {
        match self {
            Party::P0 => Party::P1,
            Party::P1 => Party::P0,
        }
    }

    pub fn from_index(i: usize) -> Party {
        if i == 0 {
            Party::P0
        } else {
            Party::P1
        }
    }
}

/// Settings both parties must agree on before a session starts.
#[derive(Debug, Clone)]
pub struct SessionConfig {
    pub ot_mode: OtMode,
    /// Seed for this party's private randomness; mixed with the party index.
    pub seed: u64,
    /// Canonical parameter string covered by the handshake digest.
    pub params: String,
    /// Refill the triple pool automatically when a gate needs more.
    pub auto_triples: bool,
    /// Salt announced by P0; random when `None`.
    pub salt: Option<[u8; 32]>,
}

impl SessionConfig {
    pub fn new(ot_mode: OtMode, seed: u64) -> Self {
        Self { ot_mode, seed, params: String::new(), auto_triples: true, salt: None }
    }
}

/// Hashes a domain tag and parts into 32 bytes.
pub fn derive_key(domain: &str, parts: &[&[u8]]) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update((domain.len() as u32).to_be_bytes());
    h.update(domain.as_bytes());
    for p in parts {
        h.update((p.len() as u32).to_be_bytes());
        h.update(p);
    }
    h.finalize().into()
}

/// Most bytes carried by one fragment after the session header.
const FRAGMENT: usize = MAX_FRAME - 3;

pub struct Session {
    party: Party,
    chan: Channel,
    sid: u16,
    pub(crate) rng: ChaCha20Rng,
    pub(crate) ot: OtState,
    pub(crate) triples: TriplePool,
    auto_triples: bool,
    salt: [u8; 32],
    ot_counts: BTreeMap<Phase, u64>,
    reveals: Vec<(String, usize)>,
}

impl Session {
    /// Runs the handshake on `chan` and returns a ready session.
    pub fn establish(party: Party, mut chan: Channel, cfg: &SessionConfig) -> Result<Session> {
        let seed = derive_key("party-rng", &[&cfg.seed.to_be_bytes(), &[party.index() as u8]]);
        let mut rng = ChaCha20Rng::from_seed(seed);
        let salt = match party {
            Party::P0 => {
                let salt = cfg.salt.unwrap_or_else(|| rand::Rng::gen(&mut rng));
                let hs = Handshake {
                    version: PROTOCOL_VERSION,
                    salt,
                    params: canonical_params(cfg),
                };
                handshake_initiate(&mut chan, &hs)?;
                salt
            }
            Party::P1 => handshake_respond(&mut chan, PROTOCOL_VERSION, &canonical_params(cfg))?,
        };
        Ok(Session {
            party,
            chan,
            sid: 0,
            rng,
            ot: OtState::new(cfg.ot_mode, &salt),
            triples: TriplePool::new(party),
            auto_triples: cfg.auto_triples,
            salt,
            ot_counts: BTreeMap::new(),
            reveals: Vec::new(),
        })
    }

    pub fn party(&self) -> Party {
        self.party
    }

    pub fn is_p0(&self) -> bool {
        self.party == Party::P0
    }

    pub fn salt(&self) -> [u8; 32] {
        self.salt
    }

    pub fn ot_mode(&self) -> OtMode {
        self.ot.mode()
    }

    pub fn rng(&mut self) -> &mut ChaCha20Rng {
        &mut self.rng
    }

    pub fn auto_triples(&self) -> bool {
        self.auto_triples
    }

    pub fn set_auto_triples(&mut self, on: bool) {
        self.auto_triples = on;
    }

    pub fn triple_pool(&mut self) -> &mut TriplePool {
        &mut self.triples
    }

    /// Selects the logical sub-session carried in every payload header.
    pub fn set_sid(&mut self, sid: u16) {
        self.sid = sid;
    }

    pub fn sid(&self) -> u16 {
        self.sid
    }

    /// Switches the accounting phase, returning the previous one.
    pub fn enter(&mut self, phase: Phase) -> Phase {
        self.chan.set_phase(phase)
    }

    pub fn phase(&self) -> Phase {
        self.chan.phase()
    }

    pub fn counters(&self) -> ByteCounters {
        self.chan.counters()
    }

    pub fn count_ots(&mut self, n: u64) {
        *self.ot_counts.entry(self.chan.phase()).or_default() += n;
    }

    /// Logical OTs per phase.
    pub fn ot_counts(&self) -> BTreeMap<Phase, u64> {
        self.ot_counts.clone()
    }

    pub fn ot_count(&self, phase: Phase) -> u64 {
        self.ot_counts.get(&phase).copied().unwrap_or(0)
    }

    /// Public-key operations performed so far (base OT instances).
    pub fn public_key_ops(&self) -> u64 {
        self.ot.public_key_ops()
    }

    pub fn send(&mut self, tag: Tag, data: &[u8]) -> Result<()> {
        let mut chunks = data.chunks(FRAGMENT).peekable();
        if data.is_empty() {
            return self.send_fragment(tag, &[], false);
        }
        while let Some(chunk) = chunks.next() {
            let more = chunks.peek().is_some();
            self.send_fragment(tag, chunk, more)?;
        }
        Ok(())
    }

    fn send_fragment(&mut self, tag: Tag, chunk: &[u8], more: bool) -> Result<()> {
        let mut payload = Vec::with_capacity(chunk.len() + 3);
        payload.extend_from_slice(&self.sid.to_be_bytes());
        payload.push(more as u8);
        payload.extend_from_slice(chunk);
        self.chan.send_frame(&Frame::new(tag, payload))
    }

    pub fn recv(&mut self, tag: Tag) -> Result<Vec<u8>> {
        let mut out = Vec::new();
        loop {
            let payload = self.chan.recv_tag(tag)?;
            if payload.len() < 3 {
                return Err(Error::Truncated);
            }
            let sid = u16::from_be_bytes([payload[0], payload[1]]);
            if sid != self.sid {
                return Err(Error::SessionMismatch { expected: self.sid, actual: sid });
            }
            let more = payload[2] != 0;
            if out.is_empty() && !more {
                out = payload;
                out.drain(..3);
                return Ok(out);
            }
            out.extend_from_slice(&payload[3..]);
            if !more {
                return Ok(out);
            }
        }
    }

    /// Symmetric swap: P0 sends first, P1 receives first.
    pub fn exchange(&mut self, tag: Tag, data: &[u8]) -> Result<Vec<u8>> {
        match self.party {
            Party::P0 => {
                self.send(tag, data)?;
                self.recv(tag)
            }
            Party::P1 => {
                let got = self.recv(tag)?;
                self.send(tag, data)?;
                Ok(got)
            }
        }
    }

    /// Records that `count` values are opened under `label`.
    pub(crate) fn log_reveal(&mut self, label: &str, count: usize) {
        self.reveals.push((label.to_string(), count));
    }

    /// Every opening of secret values to both parties, in order.
    pub fn reveal_log(&self) -> &[(String, usize)] {
        &self.reveals
    }
}

fn canonical_params(cfg: &SessionConfig) -> String {
    format!("ot_mode={}\n{}", cfg.ot_mode.name(), cfg.params)
}

/// Runs both parties on an in-memory channel, each on its own thread.
pub fn run_pair<A, B, FA, FB>(cfg: &SessionConfig, f0: FA, f1: FB) -> Result<(A, B)>
where
    A: Send,
    B: Send,
    FA: FnOnce(&mut Session) -> Result<A> + Send,
    FB: FnOnce(&mut Session) -> Result<B> + Send,
{
    let mut cfg1 = cfg.clone();
    cfg1.seed = cfg.seed.wrapping_add(0x9e37_79b9_7f4a_7c15);
    run_pair_with(cfg, &cfg1, f0, f1)
}

/// As [`run_pair`] with a separate configuration per party.
pub fn run_pair_with<A, B, FA, FB>(
    cfg0: &SessionConfig,
    cfg1: &SessionConfig,
    f0: FA,
    f1: FB,
) -> Result<(A, B)>
where
    A: Send,
    B: Send,
    FA: FnOnce(&mut Session) -> Result<A> + Send,
    FB: FnOnce(&mut Session) -> Result<B> + Send,
{
    let (c0, c1) = Channel::mem_pair();
    std::thread::scope(|scope| {
        let h1 = scope.spawn(move || -> Result<B> {
            let mut s = Session::establish(Party::P1, c1, cfg1)?;
            f1(&mut s)
        });
        let r0 = Session::establish(Party::P0, c0, cfg0).and_then(|mut s| f0(&mut s));
        let r1 = h1.join().expect("party 1 panicked");
        // Report the root cause when one side fails and the other only saw hang-up.
        match (r0, r1) {
            (Ok(a), Ok(b)) => Ok((a, b)),
            (Err(e), Ok(_)) | (Ok(_), Err(e)) => Err(e),
            (Err(e0), Err(e1)) => match e0 {
                Error::Truncated | Error::Io(_) => Err(e1),
                _ => Err(e0),
            },
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fragments_reassemble_and_sid_is_checked() {
        let cfg = SessionConfig::new(OtMode::Dealer, 1);
        let big = vec![7u8; FRAGMENT + 10];
        let big2 = big.clone();
        let (got, _) = run_pair(
            &cfg,
            move |s| {
                s.send(Tag::Data, &big)?;
                s.send(Tag::Data, &[])?;
                s.set_sid(3);
                s.send(Tag::Data, &[1])
            },
            |s| {
                let a = s.recv(Tag::Data)?;
                let b = s.recv(Tag::Data)?;
                let c = s.recv(Tag::Data);
                Ok((a, b, matches!(c, Err(Error::SessionMismatch { expected: 0, actual: 3 }))))
            },
        )
        .map(|(a, b)| (b, a))
        .unwrap();
        assert_eq!(got.0, big2);
        assert!(got.1.is_empty());
        assert!(got.2);
    }

    #[test]
    fn params_mismatch_aborts() {
        let mut a = SessionConfig::new(OtMode::Dealer, 1);
        let mut b = a.clone();
        a.params = "b=8\n".into();
        b.params = "b=4\n".into();
        let r = run_pair_with(&a, &b, |_| Ok(()), |_| Ok(()));
        assert!(matches!(r, Err(Error::Handshake(_))));
    }
}
