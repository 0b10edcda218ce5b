//! 1-out-of-2 oblivious transfer and correlated randomness.
//!
//! Every mode first produces *random* OTs (sender holds two random pads,
//! receiver holds a random choice bit and the matching pad). Chosen-message
//! transfers are then derandomized with one correction bit from the receiver
//! and two masked messages from the sender.

use curve25519_dalek::constants::RISTRETTO_BASEPOINT_TABLE;
use curve25519_dalek::ristretto::{CompressedRistretto, RistrettoPoint};
use curve25519_dalek::Scalar;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use sha2::{Digest, Sha256};

use crate::bits::{BitReader, BitWriter, Bits};
use crate::error::{Error, Result};
use crate::session::{derive_key, Party, Session};
use crate::shares::{ArithTriples, BoolTriples};
use crate::transport::{Phase, Tag};

/// Computational security parameter: number of base OTs behind an extension.
pub const LAMBDA: usize = 128;
/// Statistical security parameter.
pub const SIGMA: u32 = 40;

/// OTs derandomized per round trip.
const CHUNK: usize = 1 << 18;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OtMode {
    /// Trusted-dealer randomness derived from the public salt. Insecure.
    Dealer,
    /// Every OT runs the public-key protocol.
    Base,
    /// λ base OTs extended with symmetric crypto.
    Extended,
}

impl OtMode {
    pub fn name(self) -> &'static str {
        match self {
            OtMode::Dealer => "dealer",
            OtMode::Base => "base",
            OtMode::Extended => "extended",
        }
    }

    pub fn parse(s: &str) -> Result<OtMode> {
        match s {
            "dealer" => Ok(OtMode::Dealer),
            "base" => Ok(OtMode::Base),
            "extended" => Ok(OtMode::Extended),
            other => Err(Error::Config(format!("unknown OT mode {other:?}"))),
        }
    }

    pub fn is_insecure(self) -> bool {
        self == OtMode::Dealer
    }
}

/// Sender half of a batch of random OTs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RotSender {
    pub m0: Vec<u128>,
    pub m1: Vec<u128>,
}

/// Receiver half of a batch of random OTs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RotReceiver {
    pub choices: Bits,
    pub mc: Vec<u128>,
}

pub(crate) struct OtState {
    mode: OtMode,
    /// Dealer streams indexed by the sending party.
    dealer_ot: [ChaCha20Rng; 2],
    dealer_triples: ChaCha20Rng,
    ext_sender: Option<IknpSender>,
    ext_receiver: Option<IknpReceiver>,
    pk_ops: u64,
}

impl OtState {
    pub(crate) fn new(mode: OtMode, salt: &[u8; 32]) -> Self {
        let stream = |label: &str| ChaCha20Rng::from_seed(derive_key(label, &[salt]));
        Self {
            mode,
            dealer_ot: [stream("dealer-ot-0"), stream("dealer-ot-1")],
            dealer_triples: stream("dealer-triples"),
            ext_sender: None,
            ext_receiver: None,
            pk_ops: 0,
        }
    }

    pub(crate) fn mode(&self) -> OtMode {
        self.mode
    }

    pub(crate) fn public_key_ops(&self) -> u64 {
        self.pk_ops
    }
}

#[inline]
fn mask(width: u32) -> u128 {
    if width >= 128 {
        u128::MAX
    } else {
        (1u128 << width) - 1
    }
}

fn random_u128s<R: RngCore>(rng: &mut R, n: usize) -> Vec<u128> {
    (0..n).map(|_| rng.gen()).collect()
}

fn dealer_rot<R: RngCore>(rng: &mut R, n: usize) -> (RotSender, RotReceiver) {
    let m0 = random_u128s(rng, n);
    let m1 = random_u128s(rng, n);
    let choices = Bits::random(rng, n);
    let mc = (0..n).map(|i| if choices.get(i) { m1[i] } else { m0[i] }).collect();
    (RotSender { m0, m1 }, RotReceiver { choices, mc })
}

// ---------------------------------------------------------------------------
// Base OT over the Ristretto group.

fn random_scalar<R: RngCore>(rng: &mut R) -> Scalar {
    let mut wide = [0u8; 64];
    rng.fill_bytes(&mut wide);
    Scalar::from_bytes_mod_order_wide(&wide)
}

fn point_key(index: u64, a: &CompressedRistretto, b: &CompressedRistretto, p: &RistrettoPoint) -> u128 {
    let mut h = Sha256::new();
    h.update(b"base-ot");
    h.update(index.to_be_bytes());
    h.update(a.as_bytes());
    h.update(b.as_bytes());
    h.update(p.compress().as_bytes());
    let d = h.finalize();
    u128::from_le_bytes(d[..16].try_into().expect("16 bytes"))
}

fn decompress(bytes: &[u8]) -> Result<(CompressedRistretto, RistrettoPoint)> {
    let c = CompressedRistretto::from_slice(bytes).map_err(|_| Error::MalformedPoint)?;
    let p = c.decompress().ok_or(Error::MalformedPoint)?;
    Ok((c, p))
}

/// Base OT, sender side: returns the two random keys per instance.
pub fn base_ot_send(sess: &mut Session, count: usize) -> Result<RotSender> {
    let a = random_scalar(sess.rng());
    let big_a = &a * RISTRETTO_BASEPOINT_TABLE;
    let ca = big_a.compress();
    sess.send(Tag::OtMsg1, ca.as_bytes())?;
    let reply = sess.recv(Tag::OtMsg2)?;
    if reply.len() != 32 * count {
        return Err(Error::Truncated);
    }
    let mut m0 = Vec::with_capacity(count);
    let mut m1 = Vec::with_capacity(count);
    for (i, chunk) in reply.chunks(32).enumerate() {
        let (cb, b) = decompress(chunk)?;
        let ab = a * b;
        m0.push(point_key(i as u64, &ca, &cb, &ab));
        m1.push(point_key(i as u64, &ca, &cb, &(ab - a * big_a)));
    }
    sess.ot.pk_ops += count as u64;
    Ok(RotSender { m0, m1 })
}

/// Base OT, receiver side with explicit choice bits.
pub fn base_ot_recv(sess: &mut Session, choices: &Bits) -> Result<Vec<u128>> {
    let first = sess.recv(Tag::OtMsg1)?;
    let (ca, big_a) = decompress(&first)?;
    let mut out = Vec::with_capacity(choices.len());
    let mut reply = Vec::with_capacity(32 * choices.len());
    let mut secrets = Vec::with_capacity(choices.len());
    for c in choices.iter() {
        let b = random_scalar(sess.rng());
        let mut big_b = &b * RISTRETTO_BASEPOINT_TABLE;
        if c {
            big_b += big_a;
        }
        let cb = big_b.compress();
        reply.extend_from_slice(cb.as_bytes());
        secrets.push((b, cb));
    }
    sess.send(Tag::OtMsg2, &reply)?;
    for (i, (b, cb)) in secrets.into_iter().enumerate() {
        out.push(point_key(i as u64, &ca, &cb, &(b * big_a)));
    }
    sess.ot.pk_ops += choices.len() as u64;
    Ok(out)
}

// ---------------------------------------------------------------------------
// Matrix-transpose OT extension.

/// Transposes a 128×128 bit matrix; bit `c` of `a[r]` is entry (r, c).
pub fn transpose128(a: &mut [u128; 128]) {
    let mut j = 64usize;
    let mut m: u128 = u64::MAX as u128;
    while j != 0 {
        for r in 0..128 {
            if r & j == 0 {
                let t = ((a[r] >> j) ^ a[r + j]) & m;
                a[r + j] ^= t;
                a[r] ^= t << j;
            }
        }
        j >>= 1;
        m ^= m << j;
    }
}

fn column_rng(key: u128) -> ChaCha20Rng {
    ChaCha20Rng::from_seed(derive_key("iknp-column", &[&key.to_le_bytes()]))
}

fn fill_column(rng: &mut ChaCha20Rng, words: usize) -> Vec<u64> {
    let mut v = vec![0u64; words];
    rng.fill(&mut v[..]);
    v
}

/// Collects row `j` of 128 bit columns into a u128 per row.
fn rows_from_columns(cols: &[Vec<u64>], rows: usize) -> Vec<u128> {
    let mut out = Vec::with_capacity(rows);
    let mut block = [0u128; 128];
    for b in 0..rows / 128 {
        for (i, col) in cols.iter().enumerate() {
            block[i] = col[2 * b] as u128 | ((col[2 * b + 1] as u128) << 64);
        }
        transpose128(&mut block);
        out.extend_from_slice(&block);
    }
    out
}

fn row_hash(index: u64, row: u128) -> u128 {
    let mut h = Sha256::new();
    h.update(index.to_le_bytes());
    h.update(row.to_le_bytes());
    let d = h.finalize();
    u128::from_le_bytes(d[..16].try_into().expect("16 bytes"))
}

/// Extension sender: holds `s` and the base-OT keys it selected.
pub struct IknpSender {
    s: u128,
    prgs: Vec<ChaCha20Rng>,
    counter: u64,
}

/// Extension receiver: holds both base-OT keys per column.
pub struct IknpReceiver {
    prgs: Vec<(ChaCha20Rng, ChaCha20Rng)>,
    counter: u64,
}

impl IknpSender {
    pub fn new(s: u128, keys: &[u128]) -> Result<Self> {
        if keys.len() < LAMBDA {
            return Err(Error::InsufficientBaseOts { needed: LAMBDA, have: keys.len() });
        }
        Ok(Self { s, prgs: keys[..LAMBDA].iter().map(|&k| column_rng(k)).collect(), counter: 0 })
    }

    /// Consumes the receiver's column matrix for `count` OTs.
    pub fn extend(&mut self, count: usize, u: &[u8]) -> Result<RotSender> {
        let rows = count.div_ceil(128) * 128;
        let words = rows / 64;
        if u.len() != LAMBDA * words * 8 {
            return Err(Error::Truncated);
        }
        let mut cols = Vec::with_capacity(LAMBDA);
        for (i, prg) in self.prgs.iter_mut().enumerate() {
            let mut q = fill_column(prg, words);
            if (self.s >> i) & 1 == 1 {
                let chunk = &u[i * words * 8..(i + 1) * words * 8];
                for (w, b) in q.iter_mut().zip(chunk.chunks(8)) {
                    *w ^= u64::from_le_bytes(b.try_into().expect("8 bytes"));
                }
            }
            cols.push(q);
        }
        let q_rows = rows_from_columns(&cols, rows);
        let mut m0 = Vec::with_capacity(count);
        let mut m1 = Vec::with_capacity(count);
        for (j, &q) in q_rows.iter().take(count).enumerate() {
            let idx = self.counter + j as u64;
            m0.push(row_hash(idx, q));
            m1.push(row_hash(idx, q ^ self.s));
        }
        self.counter += rows as u64;
        Ok(RotSender { m0, m1 })
    }
}

impl IknpReceiver {
    pub fn new(keys: &RotSender) -> Result<Self> {
        if keys.m0.len() < LAMBDA {
            return Err(Error::InsufficientBaseOts { needed: LAMBDA, have: keys.m0.len() });
        }
        let prgs = (0..LAMBDA).map(|i| (column_rng(keys.m0[i]), column_rng(keys.m1[i]))).collect();
        Ok(Self { prgs, counter: 0 })
    }

    /// Builds the column matrix for `choices`; returns it with the receiver's pads.
    pub fn extend(&mut self, choices: &Bits) -> (Vec<u8>, Vec<u128>) {
        let count = choices.len();
        let rows = count.div_ceil(128) * 128;
        let words = rows / 64;
        let mut c = choices.words().to_vec();
        c.resize(words, 0);
        let mut u = Vec::with_capacity(LAMBDA * words * 8);
        let mut cols = Vec::with_capacity(LAMBDA);
        for (g0, g1) in self.prgs.iter_mut() {
            let t = fill_column(g0, words);
            let t1 = fill_column(g1, words);
            for k in 0..words {
                u.extend_from_slice(&(t[k] ^ t1[k] ^ c[k]).to_le_bytes());
            }
            cols.push(t);
        }
        let t_rows = rows_from_columns(&cols, rows);
        let mc = t_rows
            .iter()
            .take(count)
            .enumerate()
            .map(|(j, &t)| row_hash(self.counter + j as u64, t))
            .collect();
        self.counter += rows as u64;
        (u, mc)
    }
}

fn ensure_ext_sender(sess: &mut Session) -> Result<()> {
    if sess.ot.ext_sender.is_none() {
        let s: u128 = sess.rng().gen();
        let choices = Bits::from_bools(&(0..LAMBDA).map(|i| (s >> i) & 1 == 1).collect::<Vec<_>>());
        let keys = base_ot_recv(sess, &choices)?;
        sess.ot.ext_sender = Some(IknpSender::new(s, &keys)?);
    }
    Ok(())
}

fn ensure_ext_receiver(sess: &mut Session) -> Result<()> {
    if sess.ot.ext_receiver.is_none() {
        let keys = base_ot_send(sess, LAMBDA)?;
        sess.ot.ext_receiver = Some(IknpReceiver::new(&keys)?);
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Mode-agnostic random OT.

/// Random OTs with this party as sender. Traffic is booked to the OT setup phase.
pub fn random_send(sess: &mut Session, count: usize) -> Result<RotSender> {
    let prev = sess.enter(Phase::OtSetup);
    let out = random_send_inner(sess, count);
    sess.enter(prev);
    out
}

fn random_send_inner(sess: &mut Session, count: usize) -> Result<RotSender> {
    match sess.ot.mode {
        OtMode::Dealer => {
            let me = sess.party().index();
            Ok(dealer_rot(&mut sess.ot.dealer_ot[me], count).0)
        }
        OtMode::Base => base_ot_send(sess, count),
        OtMode::Extended => {
            ensure_ext_sender(sess)?;
            let u = sess.recv(Tag::OtMsg1)?;
            sess.ot.ext_sender.as_mut().expect("set up").extend(count, &u)
        }
    }
}

/// Random OTs with this party as receiver.
pub fn random_recv(sess: &mut Session, count: usize) -> Result<RotReceiver> {
    let prev = sess.enter(Phase::OtSetup);
    let out = random_recv_inner(sess, count);
    sess.enter(prev);
    out
}

fn random_recv_inner(sess: &mut Session, count: usize) -> Result<RotReceiver> {
    match sess.ot.mode {
        OtMode::Dealer => {
            let sender = sess.party().other().index();
            Ok(dealer_rot(&mut sess.ot.dealer_ot[sender], count).1)
        }
        OtMode::Base => {
            let choices = Bits::random(sess.rng(), count);
            let mc = base_ot_recv(sess, &choices)?;
            Ok(RotReceiver { choices, mc })
        }
        OtMode::Extended => {
            ensure_ext_receiver(sess)?;
            let choices = Bits::random(sess.rng(), count);
            let (u, mc) = sess.ot.ext_receiver.as_mut().expect("set up").extend(&choices);
            sess.send(Tag::OtMsg1, &u)?;
            Ok(RotReceiver { choices, mc })
        }
    }
}

// ---------------------------------------------------------------------------
// Chosen-message OT.

/// Sends `msgs[i] = (x0, x1)`, each `width` bits, one logical OT per pair.
pub fn send(sess: &mut Session, msgs: &[(u128, u128)], width: u32) -> Result<()> {
    let mk = mask(width);
    for chunk in msgs.chunks(CHUNK) {
        let rot = random_send(sess, chunk.len())?;
        let e_bytes = sess.recv(Tag::OtCorrection)?;
        let e = Bits::from_bytes(&e_bytes, chunk.len())
            .ok_or_else(|| Error::Ot("malformed correction bits".into()))?;
        let mut w = BitWriter::with_capacity_bits(chunk.len() * 2 * width as usize);
        for (i, &(x0, x1)) in chunk.iter().enumerate() {
            let (p0, p1) = if e.get(i) { (rot.m1[i], rot.m0[i]) } else { (rot.m0[i], rot.m1[i]) };
            w.write((x0 ^ p0) & mk, width);
            w.write((x1 ^ p1) & mk, width);
        }
        sess.send(Tag::OtCorrection, &w.finish())?;
        sess.count_ots(chunk.len() as u64);
    }
    Ok(())
}

/// Receives `x_{choices[i]}` for every instance.
pub fn receive(sess: &mut Session, choices: &Bits, width: u32) -> Result<Vec<u128>> {
    let mk = mask(width);
    let mut out = Vec::with_capacity(choices.len());
    let mut start = 0;
    while start < choices.len() {
        let len = CHUNK.min(choices.len() - start);
        let b = choices.slice(start, len);
        let rot = random_recv(sess, len)?;
        sess.send(Tag::OtCorrection, &b.xor(&rot.choices).to_bytes())?;
        let reply = sess.recv(Tag::OtCorrection)?;
        let mut r = BitReader::new(&reply);
        for i in 0..len {
            let y0 = r.read(width).ok_or(Error::Truncated)?;
            let y1 = r.read(width).ok_or(Error::Truncated)?;
            let y = if b.get(i) { y1 } else { y0 };
            out.push((y ^ rot.mc[i]) & mk);
        }
        sess.count_ots(len as u64);
        start += len;
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Triples.

/// Boolean triples for this party. Dealer mode draws them from the dealer
/// stream; other modes derive them from two random OTs per triple.
pub fn bool_triples(sess: &mut Session, count: usize) -> Result<BoolTriples> {
    if sess.ot.mode == OtMode::Dealer {
        let pair = dealer_bool_triples_from(&mut sess.ot.dealer_triples, count);
        let [t0, t1] = pair;
        return Ok(if sess.is_p0() { t0 } else { t1 });
    }
    // Direction 1: P1 sends. Direction 2: P0 sends.
    let (own_recv, own_send) = match sess.party() {
        Party::P0 => {
            let r = random_recv(sess, count)?;
            let s = random_send(sess, count)?;
            (r, s)
        }
        Party::P1 => {
            let s = random_send(sess, count)?;
            let r = random_recv(sess, count)?;
            (r, s)
        }
    };
    sess.count_ots(2 * count as u64);
    // As receiver: a = choice, u = m_a. As sender: b = m0 ⊕ m1, v = m0.
    let a = own_recv.choices;
    let u = Bits::from_iter(own_recv.mc.iter().map(|&m| m & 1 == 1));
    let v = Bits::from_iter(own_send.m0.iter().map(|&m| m & 1 == 1));
    let b = Bits::from_iter(own_send.m0.iter().zip(&own_send.m1).map(|(&x, &y)| (x ^ y) & 1 == 1));
    let mut c = a.and(&b);
    c.xor_assign(&u);
    c.xor_assign(&v);
    Ok(BoolTriples { a, b, c })
}

fn dealer_bool_triples_from<R: RngCore>(rng: &mut R, count: usize) -> [BoolTriples; 2] {
    let a0 = Bits::random(rng, count);
    let b0 = Bits::random(rng, count);
    let c0 = Bits::random(rng, count);
    let a1 = Bits::random(rng, count);
    let b1 = Bits::random(rng, count);
    let mut c1 = a0.xor(&a1).and(&b0.xor(&b1));
    c1.xor_assign(&c0);
    [BoolTriples { a: a0, b: b0, c: c0 }, BoolTriples { a: a1, b: b1, c: c1 }]
}

fn dealer_arith_triples_from<R: RngCore>(rng: &mut R, count: usize) -> [ArithTriples; 2] {
    let mut draw = || (0..count).map(|_| rng.next_u64()).collect::<Vec<u64>>();
    let (a0, b0, c0, a1, b1) = (draw(), draw(), draw(), draw(), draw());
    let c1 = (0..count)
        .map(|i| a0[i].wrapping_add(a1[i]).wrapping_mul(b0[i].wrapping_add(b1[i])).wrapping_sub(c0[i]))
        .collect();
    [ArithTriples { a: a0, b: b0, c: c0 }, ArithTriples { a: a1, b: b1, c: c1 }]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DealerKind {
    BoolTriple,
    ArithTriple,
    RandomOt,
}

/// One party's share of dealer-generated correlated randomness.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DealerPool {
    Bool(BoolTriples),
    Arith(ArithTriples),
    /// Party 0 is the OT sender, party 1 the receiver.
    OtSender(RotSender),
    OtReceiver(RotReceiver),
}

/// Deterministic dealer output for both parties. Test and offline use only.
pub fn dealer_randomness(kind: DealerKind, count: usize, seed: u64) -> [DealerPool; 2] {
    let mut rng = ChaCha20Rng::from_seed(derive_key("dealer-seed", &[&seed.to_be_bytes()]));
    match kind {
        DealerKind::BoolTriple => dealer_bool_triples_from(&mut rng, count).map(DealerPool::Bool),
        DealerKind::ArithTriple => {
            dealer_arith_triples_from(&mut rng, count).map(DealerPool::Arith)
        }
        DealerKind::RandomOt => {
            let (s, r) = dealer_rot(&mut rng, count);
            [DealerPool::OtSender(s), DealerPool::OtReceiver(r)]
        }
    }
}
