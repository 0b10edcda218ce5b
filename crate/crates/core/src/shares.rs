//! XOR and additive two-party secret sharing with batched gates.
//!
//! Gates take the local party's share plus a [`Session`]; both parties call
//! the same gate with their own halves in the same order.

use rand::Rng;

use crate::bits::Bits;
use crate::error::{Error, Result};
use crate::ot;
use crate::session::{Party, Session};
use crate::transport::{Phase, Tag};

/// Default fixed-point precision.
pub const FRAC_BITS: u32 = 12;

/// The ring Z_{2^l}, `1 <= l <= 64`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Ring {
    bits: u32,
}

impl Default for Ring {
    fn default() -> Self {
        Ring::R64
    }
}

impl Ring {
    pub const R64: Ring = Ring { bits: 64 };

    pub fn new(bits: u32) -> Result<Ring> {
        if (2..=64).contains(&bits) {
            Ok(Ring { bits })
        } else {
            Err(Error::Config(format!("ring width {bits} outside 2..=64")))
        }
    }

    pub fn bits(self) -> u32 {
        self.bits
    }

    #[inline]
    pub fn mask(self) -> u64 {
        if self.bits == 64 {
            u64::MAX
        } else {
            (1u64 << self.bits) - 1
        }
    }

    #[inline]
    pub fn reduce(self, v: u64) -> u64 {
        v & self.mask()
    }

    #[inline]
    pub fn add(self, a: u64, b: u64) -> u64 {
        a.wrapping_add(b) & self.mask()
    }

    #[inline]
    pub fn sub(self, a: u64, b: u64) -> u64 {
        a.wrapping_sub(b) & self.mask()
    }

    #[inline]
    pub fn mul(self, a: u64, b: u64) -> u64 {
        a.wrapping_mul(b) & self.mask()
    }

    #[inline]
    pub fn neg(self, a: u64) -> u64 {
        a.wrapping_neg() & self.mask()
    }

    /// Two's-complement sign bit.
    #[inline]
    pub fn msb(self, v: u64) -> bool {
        (v >> (self.bits - 1)) & 1 == 1
    }

    pub fn from_i64(self, v: i64) -> u64 {
        (v as u64) & self.mask()
    }

    pub fn to_i64(self, v: u64) -> i64 {
        let v = self.reduce(v);
        if self.bits < 64 && self.msb(v) {
            (v | !self.mask()) as i64
        } else {
            v as i64
        }
    }

    pub fn random<R: Rng + ?Sized>(self, rng: &mut R) -> u64 {
        rng.gen::<u64>() & self.mask()
    }

    /// Fixed-point encoding `ceil(x * 2^f)`.
    pub fn encode_fixed(self, x: f64, f: u32) -> u64 {
        self.from_i64((x * (1u64 << f) as f64).ceil() as i64)
    }

    pub fn decode_fixed(self, v: u64, f: u32) -> f64 {
        self.to_i64(v) as f64 / (1u64 << f) as f64
    }
}

/// One party's half of a XOR-shared bit vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoolShare {
    pub party: Party,
    pub bits: Bits,
}

/// One party's half of an additively shared ring vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArithShare {
    pub party: Party,
    pub ring: Ring,
    pub elems: Vec<u64>,
}

impl BoolShare {
    pub fn new(party: Party, bits: Bits) -> Self {
        Self { party, bits }
    }

    /// Sharing of a public vector: P0 holds it, P1 holds zeros.
    pub fn public(party: Party, value: &Bits) -> Self {
        match party {
            Party::P0 => Self::new(party, value.clone()),
            Party::P1 => Self::new(party, Bits::zeros(value.len())),
        }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn xor(&self, other: &BoolShare) -> Result<BoolShare> {
        check_bool(self, other)?;
        Ok(BoolShare::new(self.party, self.bits.xor(&other.bits)))
    }

    /// Local NOT: party 0 flips, party 1 keeps its share.
    pub fn not(&self) -> BoolShare {
        match self.party {
            Party::P0 => BoolShare::new(self.party, self.bits.not()),
            Party::P1 => self.clone(),
        }
    }

    pub fn slice(&self, start: usize, len: usize) -> BoolShare {
        BoolShare::new(self.party, self.bits.slice(start, len))
    }

    pub fn concat<'a>(party: Party, parts: impl IntoIterator<Item = &'a BoolShare>) -> BoolShare {
        BoolShare::new(party, Bits::concat(parts.into_iter().map(|p| &p.bits)))
    }
}

impl ArithShare {
    pub fn new(party: Party, ring: Ring, elems: Vec<u64>) -> Self {
        Self { party, ring, elems }
    }

    pub fn zeros(party: Party, ring: Ring, len: usize) -> Self {
        Self::new(party, ring, vec![0; len])
    }

    /// Sharing of public values: P0 holds them, P1 holds zeros.
    pub fn public(party: Party, ring: Ring, values: &[u64]) -> Self {
        match party {
            Party::P0 => Self::new(party, ring, values.iter().map(|&v| ring.reduce(v)).collect()),
            Party::P1 => Self::zeros(party, ring, values.len()),
        }
    }

    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }

    pub fn add(&self, other: &ArithShare) -> Result<ArithShare> {
        check_arith(self, other)?;
        let r = self.ring;
        Ok(ArithShare::new(
            self.party,
            r,
            self.elems.iter().zip(&other.elems).map(|(&a, &b)| r.add(a, b)).collect(),
        ))
    }

    pub fn sub(&self, other: &ArithShare) -> Result<ArithShare> {
        check_arith(self, other)?;
        let r = self.ring;
        Ok(ArithShare::new(
            self.party,
            r,
            self.elems.iter().zip(&other.elems).map(|(&a, &b)| r.sub(a, b)).collect(),
        ))
    }

    /// Adds a public constant to every element (applied by party 0 only).
    pub fn add_public(&self, c: u64) -> ArithShare {
        let r = self.ring;
        match self.party {
            Party::P0 => ArithShare::new(self.party, r, self.elems.iter().map(|&a| r.add(a, c)).collect()),
            Party::P1 => self.clone(),
        }
    }

    pub fn neg(&self) -> ArithShare {
        let r = self.ring;
        ArithShare::new(self.party, r, self.elems.iter().map(|&a| r.neg(a)).collect())
    }

    pub fn scale(&self, k: u64) -> ArithShare {
        let r = self.ring;
        ArithShare::new(self.party, r, self.elems.iter().map(|&a| r.mul(a, k)).collect())
    }

    /// Local sum of all elements.
    pub fn sum(&self) -> ArithShare {
        let r = self.ring;
        ArithShare::new(self.party, r, vec![self.elems.iter().fold(0, |acc, &a| r.add(acc, a))])
    }
}

fn check_bool(x: &BoolShare, y: &BoolShare) -> Result<()> {
    if x.party != y.party {
        return Err(Error::ShareMismatch("boolean shares held by different parties"));
    }
    if x.len() != y.len() {
        return Err(Error::LengthMismatch { expected: x.len(), actual: y.len() });
    }
    Ok(())
}

fn check_arith(x: &ArithShare, y: &ArithShare) -> Result<()> {
    if x.party != y.party {
        return Err(Error::ShareMismatch("arithmetic shares held by different parties"));
    }
    if x.ring != y.ring {
        return Err(Error::ShareMismatch("arithmetic shares over different rings"));
    }
    if x.len() != y.len() {
        return Err(Error::LengthMismatch { expected: x.len(), actual: y.len() });
    }
    Ok(())
}

fn check_party(sess: &Session, party: Party) -> Result<()> {
    if sess.party() != party {
        return Err(Error::ShareMismatch("share does not belong to this session's party"));
    }
    Ok(())
}

/// Bit-sliced Beaver triples `c = a AND b`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BoolTriples {
    pub a: Bits,
    pub b: Bits,
    pub c: Bits,
}

impl BoolTriples {
    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }
}

/// Multiplication triples over Z_{2^64}.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ArithTriples {
    pub a: Vec<u64>,
    pub b: Vec<u64>,
    pub c: Vec<u64>,
}

/// Boolean triples with single-use consumption.
#[derive(Debug, Clone)]
pub struct TriplePool {
    party: Party,
    store: BoolTriples,
    cursor: usize,
    consumed: u64,
}

impl TriplePool {
    pub fn new(party: Party) -> Self {
        Self { party, store: BoolTriples::default(), cursor: 0, consumed: 0 }
    }

    pub fn party(&self) -> Party {
        self.party
    }

    pub fn available(&self) -> usize {
        self.store.len() - self.cursor
    }

    /// Total triples handed out so far.
    pub fn consumed(&self) -> u64 {
        self.consumed
    }

    pub fn add(&mut self, t: BoolTriples) {
        if self.cursor > 0 {
            let rest = self.available();
            self.store = BoolTriples {
                a: self.store.a.slice(self.cursor, rest),
                b: self.store.b.slice(self.cursor, rest),
                c: self.store.c.slice(self.cursor, rest),
            };
            self.cursor = 0;
        }
        self.store.a.extend_from(&t.a);
        self.store.b.extend_from(&t.b);
        self.store.c.extend_from(&t.c);
    }

    pub fn take(&mut self, n: usize) -> Result<BoolTriples> {
        let available = self.available();
        if n > available {
            return Err(Error::TriplesExhausted { requested: n, available });
        }
        let s = &self.store;
        let out = BoolTriples {
            a: s.a.slice(self.cursor, n),
            b: s.b.slice(self.cursor, n),
            c: s.c.slice(self.cursor, n),
        };
        self.cursor += n;
        self.consumed += n as u64;
        Ok(out)
    }
}

/// Smallest top-up when the pool runs dry.
const PROVISION_MIN: usize = 1 << 14;

/// Generates `count` triples into the session pool.
pub fn provision_triples(sess: &mut Session, count: usize) -> Result<()> {
    let prev = sess.enter(Phase::Triples);
    let t = ot::bool_triples(sess, count);
    sess.enter(prev);
    sess.triples.add(t?);
    Ok(())
}

fn take_triples(sess: &mut Session, n: usize) -> Result<BoolTriples> {
    let avail = sess.triples.available();
    if n > avail && sess.auto_triples() {
        provision_triples(sess, (n - avail).max(PROVISION_MIN))?;
    }
    sess.triples.take(n)
}

// ---------------------------------------------------------------------------
// Input sharing and reconstruction.

/// Shares `input` owned by `owner`. The non-owner passes `None` and the length.
pub fn share_bool(sess: &mut Session, owner: Party, input: Option<&Bits>, len: usize) -> Result<BoolShare> {
    if sess.party() == owner {
        let x = input.ok_or(Error::ShareMismatch("owner must supply the input"))?;
        if x.len() != len {
            return Err(Error::LengthMismatch { expected: len, actual: x.len() });
        }
        let r = Bits::random(sess.rng(), len);
        sess.send(Tag::ShareInput, &r.to_bytes())?;
        Ok(BoolShare::new(owner, x.xor(&r)))
    } else {
        let bytes = sess.recv(Tag::ShareInput)?;
        let actual = bytes.len() * 8;
        let r = Bits::from_bytes(&bytes, len)
            .ok_or(Error::LengthMismatch { expected: len, actual })?;
        Ok(BoolShare::new(sess.party(), r))
    }
}

/// Additive counterpart of [`share_bool`].
pub fn share_arith(
    sess: &mut Session,
    owner: Party,
    input: Option<&[u64]>,
    len: usize,
    ring: Ring,
) -> Result<ArithShare> {
    if sess.party() == owner {
        let x = input.ok_or(Error::ShareMismatch("owner must supply the input"))?;
        if x.len() != len {
            return Err(Error::LengthMismatch { expected: len, actual: x.len() });
        }
        let r: Vec<u64> = (0..len).map(|_| ring.random(sess.rng())).collect();
        sess.send(Tag::ShareInput, &u64s_to_bytes(&r))?;
        Ok(ArithShare::new(owner, ring, x.iter().zip(&r).map(|(&v, &m)| ring.sub(v, m)).collect()))
    } else {
        let bytes = sess.recv(Tag::ShareInput)?;
        if bytes.len() != 8 * len {
            return Err(Error::LengthMismatch { expected: len, actual: bytes.len() / 8 });
        }
        Ok(ArithShare::new(sess.party(), ring, bytes_to_u64s(&bytes)))
    }
}

pub fn reconstruct_bool(local: &BoolShare, remote: &BoolShare) -> Result<Bits> {
    if local.party == remote.party {
        return Err(Error::ShareMismatch("both shares claim the same party"));
    }
    if local.len() != remote.len() {
        return Err(Error::LengthMismatch { expected: local.len(), actual: remote.len() });
    }
    Ok(local.bits.xor(&remote.bits))
}

pub fn reconstruct_arith(local: &ArithShare, remote: &ArithShare) -> Result<Vec<u64>> {
    if local.party == remote.party {
        return Err(Error::ShareMismatch("both shares claim the same party"));
    }
    if local.ring != remote.ring {
        return Err(Error::ShareMismatch("arithmetic shares over different rings"));
    }
    if local.len() != remote.len() {
        return Err(Error::LengthMismatch { expected: local.len(), actual: remote.len() });
    }
    let r = local.ring;
    Ok(local.elems.iter().zip(&remote.elems).map(|(&a, &b)| r.add(a, b)).collect())
}

/// Opens a boolean sharing to both parties. Every call is logged.
pub fn open_bool(sess: &mut Session, share: &BoolShare, label: &str) -> Result<Bits> {
    check_party(sess, share.party)?;
    sess.log_reveal(label, share.len());
    let other = sess.exchange(Tag::Reveal, &share.bits.to_bytes())?;
    let actual = other.len() * 8;
    let bits = Bits::from_bytes(&other, share.len())
        .ok_or(Error::LengthMismatch { expected: share.len(), actual })?;
    Ok(share.bits.xor(&bits))
}

/// Opens an arithmetic sharing to both parties. Every call is logged.
pub fn open_arith(sess: &mut Session, share: &ArithShare, label: &str) -> Result<Vec<u64>> {
    check_party(sess, share.party)?;
    sess.log_reveal(label, share.len());
    let other = sess.exchange(Tag::Reveal, &u64s_to_bytes(&share.elems))?;
    if other.len() != 8 * share.len() {
        return Err(Error::LengthMismatch { expected: share.len(), actual: other.len() / 8 });
    }
    let r = share.ring;
    Ok(share.elems.iter().zip(bytes_to_u64s(&other)).map(|(&a, b)| r.add(a, b)).collect())
}

pub(crate) fn u64s_to_bytes(v: &[u64]) -> Vec<u8> {
    let mut out = Vec::with_capacity(8 * v.len());
    for x in v {
        out.extend_from_slice(&x.to_le_bytes());
    }
    out
}

pub(crate) fn bytes_to_u64s(b: &[u8]) -> Vec<u64> {
    b.chunks_exact(8).map(|c| u64::from_le_bytes(c.try_into().expect("8 bytes"))).collect()
}

// ---------------------------------------------------------------------------
// Gates.

/// Batched AND with one Beaver triple per bit and one round.
pub fn and_batch(sess: &mut Session, x: &BoolShare, y: &BoolShare) -> Result<BoolShare> {
    and_batch_tagged(sess, x, y, Tag::GateOpen)
}

/// [`and_batch`] with the openings carried under `tag`.
pub fn and_batch_tagged(sess: &mut Session, x: &BoolShare, y: &BoolShare, tag: Tag) -> Result<BoolShare> {
    check_bool(x, y)?;
    check_party(sess, x.party)?;
    let n = x.len();
    if n == 0 {
        return Ok(BoolShare::new(x.party, Bits::zeros(0)));
    }
    let t = take_triples(sess, n)?;
    let d = x.bits.xor(&t.a);
    let e = y.bits.xor(&t.b);
    let payload = Bits::concat([&d, &e]).to_bytes();
    let other = sess.exchange(tag, &payload)?;
    let other = Bits::from_bytes(&other, 2 * n).ok_or(Error::Truncated)?;
    let d_open = d.xor(&other.slice(0, n));
    let e_open = e.xor(&other.slice(n, n));
    let mut z = t.c;
    z.xor_assign(&d_open.and(&t.b));
    z.xor_assign(&e_open.and(&t.a));
    if x.party == Party::P0 {
        z.xor_assign(&d_open.and(&e_open));
    }
    Ok(BoolShare::new(x.party, z))
}

/// `x OR y = x XOR y XOR (x AND y)`.
pub fn or_batch(sess: &mut Session, x: &BoolShare, y: &BoolShare) -> Result<BoolShare> {
    or_batch_tagged(sess, x, y, Tag::GateOpen)
}

fn or_batch_tagged(sess: &mut Session, x: &BoolShare, y: &BoolShare, tag: Tag) -> Result<BoolShare> {
    let xy = and_batch_tagged(sess, x, y, tag)?;
    x.xor(y)?.xor(&xy)
}

/// Reduces `columns` (all the same length) with a balanced AND or OR tree.
pub fn reduce_tree(sess: &mut Session, columns: Vec<BoolShare>, or: bool) -> Result<BoolShare> {
    reduce_tree_tagged(sess, columns, or, Tag::GateOpen)
}

/// [`reduce_tree`] with gate openings carried under `tag`.
pub fn reduce_tree_tagged(sess: &mut Session, columns: Vec<BoolShare>, or: bool, tag: Tag) -> Result<BoolShare> {
    let party = sess.party();
    let mut level = columns;
    if level.is_empty() {
        return Err(Error::LengthMismatch { expected: 1, actual: 0 });
    }
    while level.len() > 1 {
        let pairs = level.len() / 2;
        let width = level[0].len();
        let lhs = BoolShare::concat(party, level.iter().step_by(2).take(pairs));
        let rhs = BoolShare::concat(party, level.iter().skip(1).step_by(2).take(pairs));
        let joined = if or {
            or_batch_tagged(sess, &lhs, &rhs, tag)?
        } else {
            and_batch_tagged(sess, &lhs, &rhs, tag)?
        };
        let mut next: Vec<BoolShare> = (0..pairs).map(|i| joined.slice(i * width, width)).collect();
        if level.len() % 2 == 1 {
            next.push(level.pop().expect("odd tail"));
        }
        level = next;
    }
    Ok(level.pop().expect("one left"))
}

/// `z = b ? w : 0` using one OT in each direction per element.
pub fn mux_batch(sess: &mut Session, w: &ArithShare, b: &BoolShare) -> Result<ArithShare> {
    check_party(sess, w.party)?;
    if b.party != w.party {
        return Err(Error::ShareMismatch("mux operands held by different parties"));
    }
    if w.len() != b.len() {
        return Err(Error::LengthMismatch { expected: w.len(), actual: b.len() });
    }
    let ring = w.ring;
    let width = ring.bits();
    let n = w.len();
    // Sender role: m_t = (b_own ^ t) * w_own - r; keep r.
    let sender_msgs = |sess: &mut Session| -> (Vec<(u128, u128)>, Vec<u64>) {
        let mut keep = Vec::with_capacity(n);
        let msgs = (0..n)
            .map(|i| {
                let r = ring.random(sess.rng());
                keep.push(r);
                let own = b.bits.get(i);
                let m = |t: bool| ring.sub(if own ^ t { w.elems[i] } else { 0 }, r) as u128;
                (m(false), m(true))
            })
            .collect();
        (msgs, keep)
    };
    let (kept, got) = match sess.party() {
        Party::P0 => {
            let (msgs, keep) = sender_msgs(sess);
            ot::send(sess, &msgs, width)?;
            let got = ot::receive(sess, &b.bits, width)?;
            (keep, got)
        }
        Party::P1 => {
            let got = ot::receive(sess, &b.bits, width)?;
            let (msgs, keep) = sender_msgs(sess);
            ot::send(sess, &msgs, width)?;
            (keep, got)
        }
    };
    Ok(ArithShare::new(
        w.party,
        ring,
        kept.iter().zip(&got).map(|(&r, &g)| ring.add(r, g as u64)).collect(),
    ))
}

/// Boolean-to-arithmetic conversion with one OT per element.
pub fn b2a_batch(sess: &mut Session, b: &BoolShare, ring: Ring) -> Result<ArithShare> {
    check_party(sess, b.party)?;
    let n = b.len();
    match sess.party() {
        Party::P0 => {
            let mut keep = Vec::with_capacity(n);
            let msgs: Vec<(u128, u128)> = (0..n)
                .map(|i| {
                    let r = ring.random(sess.rng());
                    keep.push(r);
                    let own = b.bits.get(i) as u64;
                    (ring.sub(own, r) as u128, ring.sub(own ^ 1, r) as u128)
                })
                .collect();
            ot::send(sess, &msgs, ring.bits())?;
            Ok(ArithShare::new(b.party, ring, keep))
        }
        Party::P1 => {
            let got = ot::receive(sess, &b.bits, ring.bits())?;
            Ok(ArithShare::new(b.party, ring, got.into_iter().map(|g| g as u64).collect()))
        }
    }
}

/// Bit `k` of every element.
fn bit_slice(elems: &[u64], k: u32) -> Bits {
    Bits::from_iter(elems.iter().map(|&v| (v >> k) & 1 == 1))
}

/// Sign bit of the shared value, via a carry tree over both shares' bits.
pub fn msb_batch(sess: &mut Session, x: &ArithShare) -> Result<BoolShare> {
    check_party(sess, x.party)?;
    let party = x.party;
    let n = x.len();
    let l = x.ring.bits();
    let zero = Bits::zeros(n);
    // P0's share bits are shared as (a, 0), P1's as (0, b).
    let own = |k: u32| bit_slice(&x.elems, k);
    let a_share = |k: u32| if party == Party::P0 { own(k) } else { zero.clone() };
    let b_share = |k: u32| if party == Party::P1 { own(k) } else { zero.clone() };

    let low = (l - 1) as usize;
    let a_all = BoolShare::new(party, Bits::concat(&(0..low as u32).map(a_share).collect::<Vec<_>>()));
    let b_all = BoolShare::new(party, Bits::concat(&(0..low as u32).map(b_share).collect::<Vec<_>>()));
    let g_all = and_batch(sess, &a_all, &b_all)?;
    let p_all = a_all.xor(&b_all)?;
    // (generate, propagate) per group, least significant first.
    let mut groups: Vec<(BoolShare, BoolShare)> =
        (0..low).map(|k| (g_all.slice(k * n, n), p_all.slice(k * n, n))).collect();
    while groups.len() > 1 {
        let pairs = groups.len() / 2;
        // G = G_hi ^ P_hi & G_lo for every pair; P = P_hi & P_lo except for the lowest.
        let mut lhs = Vec::new();
        let mut rhs = Vec::new();
        for i in 0..pairs {
            lhs.push(&groups[2 * i + 1].1);
            rhs.push(&groups[2 * i].0);
        }
        for i in 1..pairs {
            lhs.push(&groups[2 * i + 1].1);
            rhs.push(&groups[2 * i].1);
        }
        let lhs = BoolShare::concat(party, lhs);
        let rhs = BoolShare::concat(party, rhs);
        let prod = and_batch(sess, &lhs, &rhs)?;
        let mut next = Vec::with_capacity(pairs + 1);
        for i in 0..pairs {
            let g = groups[2 * i + 1].0.xor(&prod.slice(i * n, n))?;
            let p = if i == 0 {
                BoolShare::new(party, zero.clone())
            } else {
                prod.slice((pairs + i - 1) * n, n)
            };
            next.push((g, p));
        }
        if groups.len() % 2 == 1 {
            next.push(groups.pop().expect("odd tail"));
        }
        groups = next;
    }
    let carry = groups.pop().map(|g| g.0).unwrap_or_else(|| BoolShare::new(party, zero.clone()));
    let top = own(l - 1);
    Ok(BoolShare::new(party, top.xor(&carry.bits)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ot::OtMode;
    use crate::session::{run_pair, SessionConfig};
    use proptest::prelude::{any, prop_assert_eq, proptest, ProptestConfig};
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn dealer(seed: u64) -> SessionConfig {
        SessionConfig::new(OtMode::Dealer, seed)
    }

    /// Shares (x, y) from P0 / P1, applies a boolean gate, reconstructs.
    fn bool_gate(x: Bits, y: Bits, or: bool) -> Bits {
        let n = x.len();
        let (z0, z1) = run_pair(
            &dealer(7),
            move |s| {
                let xs = share_bool(s, Party::P0, Some(&x), n)?;
                let ys = share_bool(s, Party::P1, None, n)?;
                if or { or_batch(s, &xs, &ys) } else { and_batch(s, &xs, &ys) }
            },
            move |s| {
                let xs = share_bool(s, Party::P0, None, n)?;
                let ys = share_bool(s, Party::P1, Some(&y), n)?;
                if or { or_batch(s, &xs, &ys) } else { and_batch(s, &xs, &ys) }
            },
        )
        .unwrap();
        reconstruct_bool(&z0, &z1).unwrap()
    }

    #[test]
    fn and_or_truth_tables() {
        let x = Bits::from_bools(&[false, false, true, true]);
        let y = Bits::from_bools(&[false, true, false, true]);
        assert_eq!(bool_gate(x.clone(), y.clone(), false).to_bools(), [false, false, false, true]);
        assert_eq!(bool_gate(x, y, true).to_bools(), [false, true, true, true]);
    }

    #[test]
    fn and_or_random_4096() {
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let x = Bits::random(&mut rng, 4096);
        let y = Bits::random(&mut rng, 4096);
        assert_eq!(bool_gate(x.clone(), y.clone(), false), x.and(&y));
        assert_eq!(bool_gate(x.clone(), x.clone(), true), x);
        assert_eq!(bool_gate(Bits::zeros(4096), y.clone(), false), Bits::zeros(4096));
        let mut or = x.xor(&y);
        or.xor_assign(&x.and(&y));
        assert_eq!(bool_gate(x, y, true), or);
    }

    #[test]
    fn reconstruct_examples() {
        let a = BoolShare::new(Party::P0, Bits::ones(1));
        let b = BoolShare::new(Party::P1, Bits::ones(1));
        assert_eq!(reconstruct_bool(&a, &b).unwrap(), Bits::zeros(1));
        let a = ArithShare::new(Party::P0, Ring::R64, vec![u64::MAX]);
        let b = ArithShare::new(Party::P1, Ring::R64, vec![2]);
        assert_eq!(reconstruct_arith(&a, &b).unwrap(), vec![1]);
        assert!(reconstruct_arith(&a, &a).is_err());
        let short = ArithShare::new(Party::P1, Ring::R64, vec![]);
        assert!(matches!(reconstruct_arith(&a, &short), Err(Error::LengthMismatch { .. })));
    }

    #[test]
    fn sharing_round_trip() {
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        let vals: Vec<u64> = (0..10_000).map(|_| rng.gen()).collect();
        let bits = Bits::from_bools(&[true, false, true, true]);
        let v2 = vals.clone();
        let b2 = bits.clone();
        let ((a0, x0, c0), (a1, x1, c1)) = run_pair(
            &dealer(3),
            move |s| {
                let a = share_arith(s, Party::P0, Some(&v2), 10_000, Ring::R64)?;
                let x = share_bool(s, Party::P0, Some(&b2), 4)?;
                let c = share_arith(s, Party::P1, None, 2, Ring::R64)?;
                Ok((a, x, c))
            },
            |s| {
                let a = share_arith(s, Party::P0, None, 10_000, Ring::R64)?;
                let x = share_bool(s, Party::P0, None, 4)?;
                let c = share_arith(s, Party::P1, Some(&[5, 0]), 2, Ring::R64)?;
                Ok((a, x, c))
            },
        )
        .unwrap();
        assert_eq!(reconstruct_arith(&a0, &a1).unwrap(), vals);
        assert_eq!(reconstruct_bool(&x0, &x1).unwrap(), bits);
        assert_eq!(reconstruct_arith(&c0, &c1).unwrap(), vec![5, 0]);
    }

    #[test]
    fn announced_length_mismatch() {
        let r = run_pair(
            &dealer(3),
            |s| share_bool(s, Party::P0, Some(&Bits::zeros(3)), 4),
            |s| Ok(s.party()),
        );
        assert!(matches!(r, Err(Error::LengthMismatch { expected: 4, actual: 3 })));
    }

    #[test]
    fn exhausted_pool_is_an_error() {
        let r = run_pair(
            &dealer(4),
            |s| {
                s.set_auto_triples(false);
                provision_triples(s, 10)?;
                let x = BoolShare::new(Party::P0, Bits::zeros(11));
                and_batch(s, &x, &x).map(|_| ())
            },
            |s| {
                s.set_auto_triples(false);
                provision_triples(s, 10)?;
                let x = BoolShare::new(Party::P1, Bits::zeros(11));
                and_batch(s, &x, &x).map(|_| ())
            },
        );
        assert!(matches!(r, Err(Error::TriplesExhausted { requested: 11, available: 10 })));
    }

    #[test]
    fn pool_never_reuses() {
        let mut p = TriplePool::new(Party::P0);
        let mut rng = ChaCha20Rng::seed_from_u64(5);
        let t = BoolTriples {
            a: Bits::random(&mut rng, 64),
            b: Bits::random(&mut rng, 64),
            c: Bits::random(&mut rng, 64),
        };
        p.add(t.clone());
        let x = p.take(40).unwrap();
        let y = p.take(24).unwrap();
        assert_eq!(Bits::concat([&x.a, &y.a]), t.a);
        assert!(p.take(1).is_err());
        assert_eq!(p.consumed(), 64);
    }

    fn arith_pair<F>(ring: Ring, w: Vec<u64>, b: Bits, seed: u64, f: F) -> Vec<u64>
    where
        F: Fn(&mut Session, &ArithShare, &BoolShare) -> Result<ArithShare> + Sync,
    {
        let n = w.len();
        let f = &f;
        let (z0, z1) = run_pair(
            &dealer(seed),
            move |s| {
                let ws = share_arith(s, Party::P0, Some(&w), n, ring)?;
                let bs = share_bool(s, Party::P1, None, n)?;
                f(s, &ws, &bs)
            },
            move |s| {
                let ws = share_arith(s, Party::P0, None, n, ring)?;
                let bs = share_bool(s, Party::P1, Some(&b), n)?;
                f(s, &ws, &bs)
            },
        )
        .unwrap();
        reconstruct_arith(&z0, &z1).unwrap()
    }

    #[test]
    fn mux_examples_and_random() {
        let got = arith_pair(Ring::R64, vec![42, 42], Bits::from_bools(&[true, false]), 1, |s, w, b| {
            mux_batch(s, w, b)
        });
        assert_eq!(got, vec![42, 0]);
        let mut rng = ChaCha20Rng::seed_from_u64(9);
        let w: Vec<u64> = (0..1024).map(|_| rng.gen()).collect();
        let b = Bits::random(&mut rng, 1024);
        let got = arith_pair(Ring::R64, w.clone(), b.clone(), 2, mux_batch);
        for i in 0..1024 {
            assert_eq!(got[i], if b.get(i) { w[i] } else { 0 });
        }
        let got = arith_pair(Ring::R64, w, Bits::zeros(1024), 3, mux_batch);
        assert!(got.iter().all(|&v| v == 0));
    }

    #[test]
    fn b2a_popcount() {
        let mut rng = ChaCha20Rng::seed_from_u64(10);
        let b = Bits::random(&mut rng, 1000);
        let k = b.count_ones() as u64;
        let got = arith_pair(Ring::R64, vec![0; 1000], b.clone(), 4, |s, _, b| {
            Ok(b2a_batch(s, b, Ring::R64)?.sum())
        });
        assert_eq!(got, vec![k]);
        let got = arith_pair(Ring::R64, vec![0; 2], b.slice(0, 2), 5, |s, _, b| b2a_batch(s, b, Ring::R64));
        assert_eq!(got, b.slice(0, 2).iter().map(u64::from).collect::<Vec<_>>());
    }

    #[test]
    fn b2a_of_cancelling_shares() {
        let (z0, z1) = run_pair(
            &dealer(6),
            |s| b2a_batch(s, &BoolShare::new(Party::P0, Bits::ones(1)), Ring::R64),
            |s| b2a_batch(s, &BoolShare::new(Party::P1, Bits::ones(1)), Ring::R64),
        )
        .unwrap();
        assert_eq!(reconstruct_arith(&z0, &z1).unwrap(), vec![0]);
    }

    fn msb_of(ring: Ring, vals: Vec<u64>, seed: u64) -> Bits {
        let n = vals.len();
        let (z0, z1) = run_pair(
            &dealer(seed),
            move |s| {
                let x = share_arith(s, Party::P0, Some(&vals), n, ring)?;
                msb_batch(s, &x)
            },
            move |s| {
                let x = share_arith(s, Party::P0, None, n, ring)?;
                msb_batch(s, &x)
            },
        )
        .unwrap();
        reconstruct_bool(&z0, &z1).unwrap()
    }

    #[test]
    fn msb_examples() {
        let r = Ring::R64;
        assert_eq!(msb_of(r, vec![r.from_i64(-5), 7, 0, r.from_i64(-1)], 1).to_bools(), [true, false, false, true]);
    }

    #[test]
    fn msb_exhaustive_l8() {
        let ring = Ring::new(8).unwrap();
        let vals: Vec<u64> = (0..256).collect();
        let got = msb_of(ring, vals.clone(), 2);
        for v in vals {
            assert_eq!(got.get(v as usize), ring.msb(v), "value {v}");
        }
    }

    #[test]
    fn msb_random_l64() {
        let mut rng = ChaCha20Rng::seed_from_u64(12);
        let vals: Vec<u64> = (0..10_000).map(|_| rng.gen()).collect();
        let got = msb_of(Ring::R64, vals.clone(), 3);
        for (i, v) in vals.iter().enumerate() {
            assert_eq!(got.get(i), v >> 63 == 1);
        }
    }

    #[test]
    fn non_owner_share_is_balanced() {
        // Fixed input, fresh randomness per instance: P1's output-share bit of AND.
        let n = 10_000;
        let (_, z1) = run_pair(
            &dealer(77),
            move |s| {
                let x = share_bool(s, Party::P0, Some(&Bits::ones(n)), n)?;
                and_batch(s, &x, &x)
            },
            move |s| {
                let x = share_bool(s, Party::P0, None, n)?;
                and_batch(s, &x, &x)
            },
        )
        .unwrap();
        let ones = z1.bits.count_ones() as f64;
        let expected = n as f64 / 2.0;
        let chi2 = 2.0 * (ones - expected).powi(2) / expected;
        assert!(chi2 < 6.635, "chi-square {chi2}");
        assert!((ones / n as f64 - 0.5).abs() < 0.02);
    }

    #[test]
    fn fixed_point_round_trip() {
        let r = Ring::R64;
        for x in [0.0, 1.5, -2.25, 1234.567, -0.000_1] {
            let v = r.decode_fixed(r.encode_fixed(x, FRAC_BITS), FRAC_BITS);
            assert!((v - x).abs() <= 1.0 / (1u64 << FRAC_BITS) as f64, "{x} -> {v}");
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn and_matches_plaintext(seed in any::<u64>(), n in 1usize..300) {
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            let x = Bits::random(&mut rng, n);
            let y = Bits::random(&mut rng, n);
            prop_assert_eq!(bool_gate(x.clone(), y.clone(), false), x.and(&y));
        }

        #[test]
        fn local_arith_ops_homomorphic(a in any::<u64>(), b in any::<u64>(), r in any::<u64>(), k in any::<u64>()) {
            let ring = Ring::R64;
            let a0 = ArithShare::new(Party::P0, ring, vec![a.wrapping_sub(r)]);
            let a1 = ArithShare::new(Party::P1, ring, vec![r]);
            let b0 = ArithShare::public(Party::P0, ring, &[b]);
            let b1 = ArithShare::public(Party::P1, ring, &[b]);
            let sum = reconstruct_arith(&a0.add(&b0).unwrap(), &a1.add(&b1).unwrap()).unwrap();
            prop_assert_eq!(sum[0], a.wrapping_add(b));
            let sc = reconstruct_arith(&a0.scale(k).add_public(b), &a1.scale(k).add_public(b)).unwrap();
            prop_assert_eq!(sc[0], a.wrapping_mul(k).wrapping_add(b));
            let ng = reconstruct_arith(&a0.neg(), &a1.neg()).unwrap();
            prop_assert_eq!(ng[0], a.wrapping_neg());
        }
    }
}
