//! Per-attribute circuit-PSI: secret-shared membership bits per Cuckoo bin.
//!
//! P0 is the receiver (Cuckoo hashing), P1 the sender (simple hashing). For
//! every bin the receiver's single digest is compared with each of the
//! sender's `β` slots by a GMW equality circuit, and the `β` results are
//! OR-ed together.

use crate::binning::{
    cuckoo_insert, extended_perm_from_cuckoo, simple_insert, table_size, BinningParams, CuckooTable,
    ExtendedPermutation, HashKeys, MAX_RETRIES, REAL_MASK,
};
use crate::bits::Bits;
use crate::error::{Error, Result};
use crate::features::{keyed_hash, sip_keys};
use crate::session::{derive_key, Party, Session};
use crate::shares::{reduce_tree_tagged, BoolShare};
use crate::transport::{Phase, Tag};

/// Digest width in bits.
pub const DIGEST_BITS: u32 = 64;

/// Keyed digests of set elements; real digests keep the top bit clear.
pub fn digest_values(values: &[Option<Vec<u8>>], salt: &[u8; 32], column: u64) -> Vec<Option<u64>> {
    let key = sip_keys(&derive_key("element-digest", &[salt, &column.to_be_bytes()]));
    values.iter().map(|v| v.as_ref().map(|b| keyed_hash(key, b) & REAL_MASK)).collect()
}

/// Shares of `[x_k = y_k]` where P0 holds `x` and P1 holds `y`, compared on
/// their low `width` bits. The bitwise XOR of the two inputs is already a
/// valid XOR sharing of `x ^ y`, so no input sharing is needed.
pub fn private_equality_batch(sess: &mut Session, own: &[u64], width: u32) -> Result<BoolShare> {
    let party = sess.party();
    let planes: Vec<BoolShare> = (0..width)
        .map(|i| {
            let z = BoolShare::new(party, Bits::from_iter(own.iter().map(|&v| (v >> i) & 1 == 1)));
            z.not()
        })
        .collect();
    if own.is_empty() {
        return Ok(BoolShare::new(party, Bits::zeros(0)));
    }
    reduce_tree_tagged(sess, planes, false, Tag::CpsiEqRound)
}

/// Result of one circuit-PSI instance.
#[derive(Debug, Clone)]
pub struct CpsiOutput {
    /// One bit per Cuckoo bin.
    pub membership: BoolShare,
    pub bins: usize,
    pub beta: usize,
    pub retries: u32,
    /// Receiver only.
    pub cuckoo: Option<CuckooTable>,
    /// Receiver only: record-order map back from bins.
    pub perm: Option<ExtendedPermutation>,
}

const STATUS_OK: u8 = 0;
const STATUS_FAILED: u8 = 1;

/// Runs circuit-PSI on one column. Both parties pass their own column and
/// the same `column` id.
pub fn cpsi_attribute(
    sess: &mut Session,
    values: &[Option<Vec<u8>>],
    column: u64,
    params: &BinningParams,
) -> Result<CpsiOutput> {
    let prev = sess.enter(Phase::Cpsi);
    let out = cpsi_inner(sess, values, column, params);
    sess.enter(prev);
    out
}

fn cpsi_inner(
    sess: &mut Session,
    values: &[Option<Vec<u8>>],
    column: u64,
    params: &BinningParams,
) -> Result<CpsiOutput> {
    let salt = sess.salt();
    let digests = digest_values(values, &salt, column);
    match sess.party() {
        Party::P0 => {
            let n0 = values.len();
            let bins = table_size(n0, params.eps);
            let mut placed = None;
            let mut retry = 0;
            while retry <= MAX_RETRIES {
                let keys = HashKeys::new(&salt, column, retry, params.hashes, bins);
                match cuckoo_insert(&digests, &keys, params.eviction_limit, sess.rng()) {
                    Ok(t) => {
                        placed = Some(t);
                        break;
                    }
                    Err(Error::InsertionFailure { .. }) => retry += 1,
                    Err(e) => return Err(e),
                }
            }
            let mut meta = Vec::with_capacity(13);
            meta.extend_from_slice(&retry.min(MAX_RETRIES).to_be_bytes());
            meta.extend_from_slice(&(n0 as u64).to_be_bytes());
            meta.push(if placed.is_some() { STATUS_OK } else { STATUS_FAILED });
            sess.send(Tag::CpsiMeta, &meta)?;
            let table = placed.ok_or(Error::InsertionFailure { retries: MAX_RETRIES })?;
            let reply = sess.recv(Tag::CpsiMeta)?;
            let beta = u64::from_be_bytes(reply.get(..8).ok_or(Error::Truncated)?.try_into().expect("8"))
                as usize;
            let bin_digests = table.bin_digests(sess.rng());
            let mut layout = Vec::with_capacity(bins * beta);
            for _ in 0..beta {
                layout.extend_from_slice(&bin_digests);
            }
            let membership = membership_from_layout(sess, &layout, bins, beta)?;
            let perm = extended_perm_from_cuckoo(&table)?;
            Ok(CpsiOutput { membership, bins, beta, retries: retry, cuckoo: Some(table), perm: Some(perm) })
        }
        Party::P1 => {
            let meta = sess.recv(Tag::CpsiMeta)?;
            if meta.len() != 13 {
                return Err(Error::Truncated);
            }
            let retry = u32::from_be_bytes(meta[..4].try_into().expect("4"));
            let n0 = u64::from_be_bytes(meta[4..12].try_into().expect("8")) as usize;
            if meta[12] != STATUS_OK {
                return Err(Error::InsertionFailure { retries: retry });
            }
            let bins = table_size(n0, params.eps);
            let keys = HashKeys::new(&salt, column, retry, params.hashes, bins);
            let table = simple_insert(&digests, &keys);
            sess.send(Tag::CpsiMeta, &(table.beta as u64).to_be_bytes())?;
            let layout = table.padded(table.beta, sess.rng());
            let membership = membership_from_layout(sess, &layout, bins, table.beta)?;
            Ok(CpsiOutput { membership, bins, beta: table.beta, retries: retry, cuckoo: None, perm: None })
        }
    }
}

fn membership_from_layout(sess: &mut Session, layout: &[u64], bins: usize, beta: usize) -> Result<BoolShare> {
    let eq = private_equality_batch(sess, layout, DIGEST_BITS)?;
    let slots: Vec<BoolShare> = (0..beta).map(|k| eq.slice(k * bins, bins)).collect();
    reduce_tree_tagged(sess, slots, true, Tag::CpsiEqRound)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ot::OtMode;
    use crate::session::{run_pair, SessionConfig};
    use crate::shares::reconstruct_bool;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha20Rng;
    use std::collections::BTreeSet;

    fn eq_pairs(x: Vec<u64>, y: Vec<u64>, width: u32) -> Bits {
        let cfg = SessionConfig::new(OtMode::Dealer, 1);
        let (a, b) = run_pair(
            &cfg,
            move |s| private_equality_batch(s, &x, width),
            move |s| private_equality_batch(s, &y, width),
        )
        .unwrap();
        reconstruct_bool(&a, &b).unwrap()
    }

    #[test]
    fn equality_examples() {
        let got = eq_pairs(vec![0xDEAD_BEEF, 0xDEAD_BEEF], vec![0xDEAD_BEEF, 0xDEAD_BEEE], 64);
        assert_eq!(got.to_bools(), [true, false]);
    }

    #[test]
    fn equality_exhaustive_4bit() {
        let (x, y): (Vec<u64>, Vec<u64>) = (0..256u64).map(|k| (k >> 4, k & 15)).unzip();
        let got = eq_pairs(x.clone(), y.clone(), 4);
        for k in 0..256 {
            assert_eq!(got.get(k), x[k] == y[k]);
        }
    }

    #[test]
    fn digests_deterministic_and_distinct() {
        let salt = [1u8; 32];
        let vals: Vec<Option<Vec<u8>>> = (0..100_000u32).map(|i| Some(i.to_le_bytes().to_vec())).collect();
        let a = digest_values(&vals, &salt, 0);
        assert_eq!(a, digest_values(&vals, &salt, 0));
        let set: BTreeSet<_> = a.iter().flatten().collect();
        assert_eq!(set.len(), vals.len());
        assert!(a.iter().flatten().all(|d| d >> 63 == 0));
    }

    pub(crate) fn run_cpsi(
        x: Vec<Option<Vec<u8>>>,
        y: Vec<Option<Vec<u8>>>,
        seed: u64,
    ) -> (Bits, CpsiOutput) {
        let cfg = SessionConfig::new(OtMode::Dealer, seed);
        let p = BinningParams::default();
        let (a, b) = run_pair(
            &cfg,
            move |s| cpsi_attribute(s, &x, 0, &p),
            move |s| cpsi_attribute(s, &y, 0, &p),
        )
        .unwrap();
        (reconstruct_bool(&a.membership, &b.membership).unwrap(), a)
    }

    fn col(vals: impl IntoIterator<Item = u64>) -> Vec<Option<Vec<u8>>> {
        vals.into_iter().map(|v| Some(v.to_le_bytes().to_vec())).collect()
    }

    #[test]
    fn disjoint_and_identical() {
        let (bits, _) = run_cpsi(col(0..50), col(100..150), 1);
        assert_eq!(bits.count_ones(), 0);
        let (bits, out) = run_cpsi(col(0..50), col(0..50), 2);
        assert_eq!(bits.count_ones(), 50);
        let cuckoo = out.cuckoo.unwrap();
        for (b, slot) in cuckoo.bins.iter().enumerate() {
            assert_eq!(bits.get(b), slot.is_some());
        }
    }

    #[test]
    fn random_overlaps_match_plaintext() {
        let mut rng = ChaCha20Rng::seed_from_u64(5);
        for trial in 0..20 {
            let n = rng.gen_range(1..200);
            let k = rng.gen_range(0..=n);
            let base: u64 = rng.gen::<u64>() >> 8;
            let x: Vec<u64> = (0..n as u64).map(|i| base + i).collect();
            let mut y: Vec<u64> = (0..k as u64).map(|i| base + i).collect();
            y.extend((0..rng.gen_range(0..200u64)).map(|i| base + 10_000 + i));
            let (bits, out) = run_cpsi(col(x.clone()), col(y), trial);
            assert_eq!(bits.count_ones(), k, "trial {trial}");
            let cuckoo = out.cuckoo.unwrap();
            for (b, slot) in cuckoo.bins.iter().enumerate() {
                if slot.is_none() {
                    assert!(!bits.get(b));
                }
            }
        }
    }

    #[test]
    fn missing_values_on_both_sides() {
        let mut x = col(0..10);
        x[3] = None;
        let mut y = col(0..10);
        y[4] = None;
        let (bits, _) = run_cpsi(x, y, 3);
        assert_eq!(bits.count_ones(), 8);
    }
}
