//! Oblivious feature alignment: evaluating a [`SwitchProgram`] on shares.
//!
//! P0 knows the extended permutation and picks one table row per switch by
//! OT; P1 draws a random label for every wire, builds the switch tables and
//! blinds its input share with the input labels. P0 walks the network on
//! masked values, so at each output it holds `π(q₁) ⊕ r_out`; XOR-ing in
//! `π(q₀)` leaves the two parties with shares of `π(q)`.
//!
//! [`oep_execute`] is the unoptimised baseline: additive 64-bit labels, full
//! replication tables and no dropping of redundant wires.

use crate::binning::ExtendedPermutation;
use crate::bits::{BitReader, BitWriter, Bits};
use crate::error::{Error, Result};
use crate::ot;
use crate::permnet::{decompose_extended, ProgramShape, SwitchKind, SwitchProgram};
use crate::session::{Party, Session};
use crate::shares::{ArithShare, BoolShare};
use crate::transport::{Phase, PhaseCounters, Tag};
use rand::Rng;

/// Toggles for the three optimisations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct OfaOptions {
    /// Drop redundant wires after the first stage.
    pub tail_drop: bool,
    /// Replication switches send only the bottom correction.
    pub partial_tables: bool,
    /// One-bit labels instead of 64-bit ones.
    pub bit_labels: bool,
}

impl OfaOptions {
    pub const ALL: OfaOptions = OfaOptions { tail_drop: true, partial_tables: true, bit_labels: true };
    pub const NONE: OfaOptions = OfaOptions { tail_drop: false, partial_tables: false, bit_labels: false };

    fn flags(self) -> u8 {
        self.tail_drop as u8 | (self.partial_tables as u8) << 1 | (self.bit_labels as u8) << 2
    }
}

impl Default for OfaOptions {
    fn default() -> Self {
        Self::ALL
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Labels {
    XorBit,
    Xor64,
    Add64,
}

impl Labels {
    fn width(self) -> u32 {
        match self {
            Labels::XorBit => 1,
            _ => 64,
        }
    }

    fn mask(self) -> u64 {
        match self {
            Labels::XorBit => 1,
            _ => u64::MAX,
        }
    }

    fn code(self) -> u8 {
        self as u8
    }

    /// Correction that turns a value under label `from` into one under `to`.
    fn corr(self, from: u64, to: u64) -> u64 {
        match self {
            Labels::Add64 => to.wrapping_sub(from),
            _ => from ^ to,
        }
    }

    fn apply(self, v: u64, t: u64) -> u64 {
        match self {
            Labels::Add64 => v.wrapping_add(t),
            _ => v ^ t,
        }
    }

    fn p1_output(self, r: u64) -> u64 {
        match self {
            Labels::Add64 => r.wrapping_neg(),
            _ => r,
        }
    }
}

fn pack(l: Labels, top: u64, bot: u64) -> u128 {
    top as u128 | (bot as u128) << l.width()
}

fn unpack(l: Labels, t: u128) -> (u64, u64) {
    (t as u64 & l.mask(), (t >> l.width()) as u64 & l.mask())
}

/// Aligns a boolean share of length `M` to record order. P0 passes the
/// extended permutation; P1 passes `None` and learns the output length from
/// P0.
pub fn ofa_execute(
    sess: &mut Session,
    share: &BoolShare,
    ep: Option<&ExtendedPermutation>,
    opts: OfaOptions,
) -> Result<BoolShare> {
    if share.party != sess.party() {
        return Err(Error::ShareMismatch("share belongs to the other party"));
    }
    let labels = if opts.bit_labels { Labels::XorBit } else { Labels::Xor64 };
    let own: Vec<u64> = share.bits.iter().map(u64::from).collect();
    let out = execute(sess, &own, ep, opts, labels)?;
    Ok(BoolShare::new(sess.party(), out.iter().map(|&v| v & 1 == 1).collect()))
}

/// Baseline extended permutation on additive shares.
pub fn oep_execute(sess: &mut Session, share: &ArithShare, ep: Option<&ExtendedPermutation>) -> Result<ArithShare> {
    if share.party != sess.party() {
        return Err(Error::ShareMismatch("share belongs to the other party"));
    }
    let out = execute(sess, &share.elems, ep, OfaOptions::NONE, Labels::Add64)?;
    let ring = share.ring;
    Ok(ArithShare::new(sess.party(), ring, out.into_iter().map(|v| ring.reduce(v)).collect()))
}

fn execute(
    sess: &mut Session,
    own: &[u64],
    ep: Option<&ExtendedPermutation>,
    opts: OfaOptions,
    labels: Labels,
) -> Result<Vec<u64>> {
    let prev = sess.enter(Phase::Ofa);
    let out = match sess.party() {
        Party::P0 => permuter(sess, own, ep, opts, labels),
        Party::P1 => labeler(sess, own, opts, labels),
    };
    sess.enter(prev);
    out
}

fn permuter(
    sess: &mut Session,
    own: &[u64],
    ep: Option<&ExtendedPermutation>,
    opts: OfaOptions,
    labels: Labels,
) -> Result<Vec<u64>> {
    let ep = ep.ok_or_else(|| Error::Config("P0 must supply the extended permutation".into()))?;
    if ep.m != own.len() {
        return Err(Error::LengthMismatch { expected: ep.m, actual: own.len() });
    }
    let mut meta = Vec::with_capacity(18);
    meta.extend_from_slice(&(ep.m as u64).to_be_bytes());
    meta.extend_from_slice(&(ep.n() as u64).to_be_bytes());
    meta.push(opts.flags());
    meta.push(labels.code());
    sess.send(Tag::OfaMeta, &meta)?;

    let prog = decompose_extended(ep, opts.tail_drop)?;
    let net = &prog.network;
    let (mut perm_bits, mut repl_bits) = (Bits::default(), Bits::default());
    for (s, b) in net.switches.iter().zip(prog.bits.iter()) {
        match s.kind {
            SwitchKind::Permutation => perm_bits.push(b),
            SwitchKind::Replication => repl_bits.push(b),
        }
    }
    let w = labels.width();
    let perm_t = ot::receive(sess, &perm_bits, 2 * w)?;
    let repl_t = ot::receive(sess, &repl_bits, if opts.partial_tables { w } else { 2 * w })?;

    let blinded = sess.recv(Tag::OfaBlindedInputs)?;
    let mut rd = BitReader::new(&blinded);
    let mut vals = vec![0u64; net.wires];
    for v in vals.iter_mut().take(net.inputs) {
        *v = rd.read(w).ok_or(Error::Truncated)? as u64;
    }
    let (mut pi, mut ri) = (0, 0);
    for (s, b) in net.switches.iter().zip(prog.bits.iter()) {
        let [i, j] = s.inputs;
        let [k, l] = s.outputs;
        match s.kind {
            SwitchKind::Permutation => {
                let (x, y) = if b { (vals[j], vals[i]) } else { (vals[i], vals[j]) };
                let (top, bot) = unpack(labels, perm_t[pi]);
                pi += 1;
                vals[k] = labels.apply(x, top);
                vals[l] = labels.apply(y, bot);
            }
            SwitchKind::Replication => {
                let sel = if b { vals[i] } else { vals[j] };
                let t = repl_t[ri];
                ri += 1;
                if opts.partial_tables {
                    vals[k] = vals[i];
                    vals[l] = labels.apply(sel, t as u64 & labels.mask());
                } else {
                    let (top, bot) = unpack(labels, t);
                    vals[k] = labels.apply(vals[i], top);
                    vals[l] = labels.apply(sel, bot);
                }
            }
        }
    }
    let mine = prog.evaluate(own)?;
    Ok(net.outputs.iter().zip(mine).map(|(&o, q)| labels.apply(vals[o], q) & labels.mask()).collect())
}

fn labeler(sess: &mut Session, own: &[u64], opts: OfaOptions, labels: Labels) -> Result<Vec<u64>> {
    let meta = sess.recv(Tag::OfaMeta)?;
    if meta.len() != 18 {
        return Err(Error::Truncated);
    }
    let m = u64::from_be_bytes(meta[..8].try_into().expect("8")) as usize;
    let n = u64::from_be_bytes(meta[8..16].try_into().expect("8")) as usize;
    if m != own.len() {
        return Err(Error::LengthMismatch { expected: m, actual: own.len() });
    }
    if meta[16] != opts.flags() || meta[17] != labels.code() {
        return Err(Error::Config("parties disagree on alignment options".into()));
    }
    let prog = SwitchProgram::shape_only(ProgramShape::new(m, n, opts.tail_drop));
    let net = &prog.network;
    let mask = labels.mask();
    let mut r: Vec<u64> = {
        let rng = sess.rng();
        (0..net.wires).map(|_| rng.gen::<u64>() & mask).collect()
    };
    if opts.partial_tables {
        for s in net.switches.iter().filter(|s| s.kind == SwitchKind::Replication) {
            r[s.outputs[0]] = r[s.inputs[0]];
        }
    }
    let (mut perm_msgs, mut repl_msgs) = (Vec::new(), Vec::new());
    for s in &net.switches {
        let (ri, rj, rk, rl) = (r[s.inputs[0]], r[s.inputs[1]], r[s.outputs[0]], r[s.outputs[1]]);
        let c = |a, b| labels.corr(a, b);
        match s.kind {
            SwitchKind::Permutation => perm_msgs.push((
                pack(labels, c(ri, rk), c(rj, rl)),
                pack(labels, c(rj, rk), c(ri, rl)),
            )),
            SwitchKind::Replication if opts.partial_tables => {
                repl_msgs.push((c(rj, rl) as u128, c(ri, rl) as u128));
            }
            SwitchKind::Replication => repl_msgs.push((
                pack(labels, c(ri, rk), c(rj, rl)),
                pack(labels, c(ri, rk), c(ri, rl)),
            )),
        }
    }
    let w = labels.width();
    ot::send(sess, &perm_msgs, 2 * w)?;
    drop(perm_msgs);
    ot::send(sess, &repl_msgs, if opts.partial_tables { w } else { 2 * w })?;

    let mut wr = BitWriter::with_capacity_bits(net.inputs * w as usize);
    for (idx, &label) in r.iter().enumerate().take(net.inputs) {
        let q = own.get(idx).copied().unwrap_or(0);
        wr.write(labels.apply(q, label) as u128 & mask as u128, w);
    }
    sess.send(Tag::OfaBlindedInputs, &wr.finish())?;
    Ok(net.outputs.iter().map(|&o| labels.p1_output(r[o]) & mask).collect())
}

/// Traffic and OT totals for one phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PhaseReport {
    pub phase: Phase,
    pub counters: PhaseCounters,
    pub ots: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommReport {
    pub phases: Vec<PhaseReport>,
}

impl CommReport {
    pub fn phase(&self, p: Phase) -> PhaseReport {
        self.phases
            .iter()
            .copied()
            .find(|r| r.phase == p)
            .unwrap_or(PhaseReport { phase: p, counters: PhaseCounters::default(), ots: 0 })
    }

    pub fn total_bytes(&self) -> u64 {
        self.phases.iter().map(|r| r.counters.total_bytes()).sum()
    }
}

/// Per-phase communication of a session that has run at least one alignment.
pub fn comm_report(sess: &Session) -> Result<CommReport> {
    let counters = sess.counters();
    let ofa = counters.phase(Phase::Ofa);
    if ofa.frames_sent + ofa.frames_recv == 0 {
        return Err(Error::Unfinished);
    }
    let phases = Phase::ALL
        .iter()
        .map(|&p| PhaseReport { phase: p, counters: counters.phase(p), ots: sess.ot_count(p) })
        .collect();
    Ok(CommReport { phases })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::binning::ExtendedPermutation;
    use crate::ot::OtMode;
    use crate::session::{run_pair, SessionConfig};
    use crate::shares::{reconstruct_arith, reconstruct_bool, Ring};
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn split(rng: &mut ChaCha20Rng, x: &Bits) -> (Bits, Bits) {
        let a = Bits::random(rng, x.len());
        let b = a.xor(x);
        (a, b)
    }

    fn run_ofa(ep: &ExtendedPermutation, x: &Bits, opts: OfaOptions, seed: u64) -> (Bits, CommReport) {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let (a, b) = split(&mut rng, x);
        let cfg = SessionConfig::new(OtMode::Dealer, seed);
        let ep0 = ep.clone();
        let (o0, o1) = run_pair(
            &cfg,
            move |s| {
                let out = ofa_execute(s, &BoolShare::new(Party::P0, a), Some(&ep0), opts)?;
                Ok((out, comm_report(s)?))
            },
            move |s| ofa_execute(s, &BoolShare::new(Party::P1, b), None, opts),
        )
        .unwrap();
        (reconstruct_bool(&o0.0, &o1).unwrap(), o0.1)
    }

    fn variants() -> Vec<OfaOptions> {
        let mut v = vec![OfaOptions::ALL, OfaOptions::NONE];
        for i in 0..3 {
            let mut o = OfaOptions::ALL;
            match i {
                0 => o.tail_drop = false,
                1 => o.partial_tables = false,
                _ => o.bit_labels = false,
            }
            v.push(o);
        }
        v
    }

    #[test]
    fn identity_alignment() {
        let ep = ExtendedPermutation::new(5, (0..5).collect()).unwrap();
        let x = Bits::from_bools(&[true, false, true, true, false]);
        assert_eq!(run_ofa(&ep, &x, OfaOptions::ALL, 1).0, x);
    }

    #[test]
    fn shared_bin_alignment() {
        let ep = ExtendedPermutation::new(6, vec![5, 5, 2]).unwrap();
        let x = Bits::from_bools(&[false, false, false, false, false, true]);
        for o in variants() {
            assert_eq!(run_ofa(&ep, &x, o, 2).0.to_bools(), [true, true, false]);
        }
    }

    #[test]
    fn random_instances_all_variants() {
        let mut rng = ChaCha20Rng::seed_from_u64(9);
        for t in 0..20 {
            let n = rng.gen_range(1..=128);
            let m = crate::binning::table_size(n, 0.27);
            let ep = ExtendedPermutation::new(m, (0..n).map(|_| rng.gen_range(0..m)).collect()).unwrap();
            let x = Bits::random(&mut rng, m);
            let expect: Bits = ep.src.iter().map(|&s| x.get(s)).collect();
            for o in variants() {
                assert_eq!(run_ofa(&ep, &x, o, t).0, expect, "trial {t} {o:?}");
            }
        }
    }

    #[test]
    fn ot_counts_follow_program_size() {
        let lg = |x: usize| x.trailing_zeros() as u64;
        for (n, m) in [(16usize, 16usize), (100, 127), (200, 254)] {
            let ep = ExtendedPermutation::new(m, (0..n).map(|i| i % m).collect()).unwrap();
            let x = Bits::zeros(m);
            let (mp, np) = (m.next_power_of_two() as u64, n.next_power_of_two() as u64);
            let (_, rep) = run_ofa(&ep, &x, OfaOptions::ALL, 3);
            assert_eq!(rep.phase(Phase::Ofa).ots, mp * lg(mp as usize) + np * lg(np as usize) - mp + 1);
            let (_, rep) = run_ofa(&ep, &x, OfaOptions::NONE, 3);
            assert_eq!(rep.phase(Phase::Ofa).ots, 2 * mp * lg(mp as usize) - mp + 1);
        }
    }

    #[test]
    fn oep_matches_ofa() {
        let mut rng = ChaCha20Rng::seed_from_u64(4);
        let ring = Ring::new(64).unwrap();
        for t in 0..10 {
            let n = rng.gen_range(1..=100);
            let m = crate::binning::table_size(n, 0.27);
            let ep = ExtendedPermutation::new(m, (0..n).map(|_| rng.gen_range(0..m)).collect()).unwrap();
            let vals: Vec<u64> = (0..m).map(|_| rng.gen()).collect();
            let a: Vec<u64> = (0..m).map(|_| rng.gen()).collect();
            let b: Vec<u64> = vals.iter().zip(&a).map(|(v, a)| v.wrapping_sub(*a)).collect();
            let cfg = SessionConfig::new(OtMode::Dealer, t);
            let ep0 = ep.clone();
            let (o0, o1) = run_pair(
                &cfg,
                move |s| oep_execute(s, &ArithShare::new(Party::P0, ring, a), Some(&ep0)),
                move |s| oep_execute(s, &ArithShare::new(Party::P1, ring, b), None),
            )
            .unwrap();
            let got = reconstruct_arith(&o0, &o1).unwrap();
            assert_eq!(got, ep.apply(&vals));
            let bits: Bits = vals.iter().map(|v| v & 1 == 1).collect();
            let ofa = run_ofa(&ep, &bits, OfaOptions::ALL, t).0;
            assert_eq!(ofa, got.iter().map(|v| v & 1 == 1).collect::<Bits>());
        }
    }

    #[test]
    fn ofa_sends_fewer_bytes_than_oep() {
        let n = 500;
        let m = crate::binning::table_size(n, 0.27);
        let ep = ExtendedPermutation::new(m, (0..n).map(|i| (i * 7) % m).collect()).unwrap();
        let on = run_ofa(&ep, &Bits::zeros(m), OfaOptions::ALL, 1).1.phase(Phase::Ofa).counters.total_bytes();
        let off = run_ofa(&ep, &Bits::zeros(m), OfaOptions::NONE, 1).1.phase(Phase::Ofa).counters.total_bytes();
        assert!(on * 10 < off, "{on} vs {off}");
    }

    #[test]
    fn extended_mode_alignment() {
        let ep = ExtendedPermutation::new(40, (0..30).map(|i| (i * 3) % 40).collect()).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(11);
        let x = Bits::random(&mut rng, 40);
        let (a, b) = split(&mut rng, &x);
        let cfg = SessionConfig::new(OtMode::Extended, 5);
        let ep0 = ep.clone();
        let (o0, o1) = run_pair(
            &cfg,
            move |s| ofa_execute(s, &BoolShare::new(Party::P0, a), Some(&ep0), OfaOptions::ALL),
            move |s| ofa_execute(s, &BoolShare::new(Party::P1, b), None, OfaOptions::ALL),
        )
        .unwrap();
        let expect: Bits = ep.src.iter().map(|&s| x.get(s)).collect();
        assert_eq!(reconstruct_bool(&o0, &o1).unwrap(), expect);
    }

    #[test]
    fn mismatched_options_rejected() {
        let ep = ExtendedPermutation::new(4, vec![0, 1, 2, 3]).unwrap();
        let cfg = SessionConfig::new(OtMode::Dealer, 1);
        let r = run_pair(
            &cfg,
            move |s| ofa_execute(s, &BoolShare::new(Party::P0, Bits::zeros(4)), Some(&ep), OfaOptions::ALL),
            move |s| ofa_execute(s, &BoolShare::new(Party::P1, Bits::zeros(4)), None, OfaOptions::NONE),
        );
        assert!(matches!(r, Err(Error::Config(_))));
    }

    #[test]
    fn report_requires_alignment() {
        let cfg = SessionConfig::new(OtMode::Dealer, 1);
        let (a, _) = run_pair(&cfg, |s| Ok(comm_report(s).is_err()), |_| Ok(())).unwrap();
        assert!(a);
    }
}
