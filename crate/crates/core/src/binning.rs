//! Cuckoo hashing for the receiver, simple hashing for the sender, and the
//! extended permutation that maps bins back to record order.

use std::collections::BTreeMap;

use rand::Rng;

use crate::error::{Error, Result};
use crate::features::{keyed_hash, sip_keys};
use crate::session::derive_key;

pub const EPSILON: f64 = 0.27;
pub const NUM_HASHES: usize = 3;
pub const EVICTION_LIMIT: usize = 500;
pub const MAX_RETRIES: u32 = 8;

/// Real digests never set the top bit.
pub const REAL_MASK: u64 = (1 << 63) - 1;
const FAKE_BIT: u64 = 1 << 63;
const SENDER_BIT: u64 = 1 << 62;

/// A receiver-domain fake digest.
pub fn receiver_fake<R: Rng + ?Sized>(rng: &mut R) -> u64 {
    FAKE_BIT | (rng.gen::<u64>() & (SENDER_BIT - 1))
}

/// A sender-domain fake digest.
pub fn sender_fake<R: Rng + ?Sized>(rng: &mut R) -> u64 {
    FAKE_BIT | SENDER_BIT | (rng.gen::<u64>() & (SENDER_BIT - 1))
}

pub fn is_fake(d: u64) -> bool {
    d & FAKE_BIT != 0
}

/// Number of bins for `n` receiver items.
pub fn table_size(n: usize, eps: f64) -> usize {
    (((1.0 + eps) * n as f64).ceil() as usize).max(1)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinningParams {
    pub eps: f64,
    pub hashes: usize,
    pub eviction_limit: usize,
}

impl Default for BinningParams {
    fn default() -> Self {
        Self { eps: EPSILON, hashes: NUM_HASHES, eviction_limit: EVICTION_LIMIT }
    }
}

/// The `a` bin-hash functions shared by both parties.
#[derive(Debug, Clone)]
pub struct HashKeys {
    keys: Vec<(u64, u64)>,
    bins: usize,
}

impl HashKeys {
    /// Keys for one column; `retry` rotates them after an insertion failure.
    pub fn new(salt: &[u8; 32], column: u64, retry: u32, hashes: usize, bins: usize) -> Self {
        let keys = (0..hashes as u32)
            .map(|i| {
                sip_keys(&derive_key(
                    "bin-hash",
                    &[salt, &column.to_be_bytes(), &retry.to_be_bytes(), &i.to_be_bytes()],
                ))
            })
            .collect();
        Self { keys, bins }
    }

    /// Builds keys directly, for constructing collisions in tests.
    pub fn from_raw(keys: Vec<(u64, u64)>, bins: usize) -> Self {
        Self { keys, bins }
    }

    pub fn bins(&self) -> usize {
        self.bins
    }

    pub fn hashes(&self) -> usize {
        self.keys.len()
    }

    pub fn bin(&self, i: usize, digest: u64) -> usize {
        (keyed_hash(self.keys[i], &digest.to_le_bytes()) % self.bins as u64) as usize
    }

    pub fn candidates(&self, digest: u64) -> Vec<usize> {
        (0..self.keys.len()).map(|i| self.bin(i, digest)).collect()
    }
}

/// A placed value with every record that carries it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Slot {
    pub digest: u64,
    pub records: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct CuckooTable {
    pub bins: Vec<Option<Slot>>,
    /// Records in the original input.
    pub n: usize,
}

/// Collapses duplicates, keeping records in ascending order per value.
fn collapse(values: &[Option<u64>]) -> BTreeMap<u64, Vec<usize>> {
    let mut m: BTreeMap<u64, Vec<usize>> = BTreeMap::new();
    for (i, v) in values.iter().enumerate() {
        if let Some(d) = v {
            m.entry(*d).or_default().push(i);
        }
    }
    m
}

/// Inserts every distinct value of `values` (one per record, `None` =
/// missing) with random-walk eviction.
pub fn cuckoo_insert<R: Rng + ?Sized>(
    values: &[Option<u64>],
    keys: &HashKeys,
    limit: usize,
    rng: &mut R,
) -> Result<CuckooTable> {
    let mut bins: Vec<Option<Slot>> = vec![None; keys.bins()];
    let a = keys.hashes();
    for (digest, records) in collapse(values) {
        let mut item = Slot { digest, records };
        let mut from = usize::MAX;
        let mut evictions = 0;
        loop {
            let cands = keys.candidates(item.digest);
            if let Some(&free) = cands.iter().find(|&&b| bins[b].is_none()) {
                bins[free] = Some(item);
                break;
            }
            if evictions == limit {
                return Err(Error::InsertionFailure { retries: 0 });
            }
            // Avoid bouncing straight back when there is a choice.
            let mut pick = cands[rng.gen_range(0..a)];
            if pick == from && cands.iter().any(|&c| c != from) {
                while pick == from {
                    pick = cands[rng.gen_range(0..a)];
                }
            }
            item = bins[pick].replace(item).expect("occupied");
            from = pick;
            evictions += 1;
        }
    }
    Ok(CuckooTable { bins, n: values.len() })
}

impl CuckooTable {
    /// Per-bin digests, empty bins replaced by receiver fakes.
    pub fn bin_digests<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<u64> {
        self.bins
            .iter()
            .map(|b| b.as_ref().map_or_else(|| receiver_fake(rng), |s| s.digest))
            .collect()
    }

    pub fn occupied(&self) -> usize {
        self.bins.iter().filter(|b| b.is_some()).count()
    }
}

#[derive(Debug, Clone)]
pub struct SimpleTable {
    /// Real entries per bin; a value appears once per hash function landing here.
    pub bins: Vec<Vec<u64>>,
    /// Maximum load, made public to size the comparison circuit.
    pub beta: usize,
}

/// Places every distinct value in all of its candidate bins.
pub fn simple_insert(values: &[Option<u64>], keys: &HashKeys) -> SimpleTable {
    let mut bins = vec![Vec::new(); keys.bins()];
    for digest in collapse(values).into_keys() {
        for b in keys.candidates(digest) {
            bins[b].push(digest);
        }
    }
    let beta = bins.iter().map(Vec::len).max().unwrap_or(0).max(1);
    SimpleTable { bins, beta }
}

impl SimpleTable {
    /// Slot-major layout padded to `beta` per bin: entry `k * bins + b` is
    /// slot `k` of bin `b`.
    pub fn padded<R: Rng + ?Sized>(&self, beta: usize, rng: &mut R) -> Vec<u64> {
        let m = self.bins.len();
        let mut out = vec![0; m * beta];
        for k in 0..beta {
            for (b, bin) in self.bins.iter().enumerate() {
                out[k * m + b] = bin.get(k).copied().unwrap_or_else(|| sender_fake(rng));
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputKind {
    /// First record drawing from its source bin.
    FirstUse,
    /// Later record sharing a source bin.
    Replica,
}

/// Output-to-source map with replication and omission.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtendedPermutation {
    /// Source count M.
    pub m: usize,
    /// `src[y]` is the source of output `y`.
    pub src: Vec<usize>,
}

impl ExtendedPermutation {
    pub fn new(m: usize, src: Vec<usize>) -> Result<Self> {
        if let Some(&bad) = src.iter().find(|&&s| s >= m) {
            return Err(Error::NotBijective(format!("source {bad} outside 0..{m}")));
        }
        Ok(Self { m, src })
    }

    pub fn n(&self) -> usize {
        self.src.len()
    }

    pub fn output_kinds(&self) -> Vec<OutputKind> {
        let mut seen = vec![false; self.m];
        self.src
            .iter()
            .map(|&s| {
                if std::mem::replace(&mut seen[s], true) {
                    OutputKind::Replica
                } else {
                    OutputKind::FirstUse
                }
            })
            .collect()
    }

    /// Sources never read by any output.
    pub fn redundant(&self) -> Vec<usize> {
        let mut used = vec![false; self.m];
        for &s in &self.src {
            used[s] = true;
        }
        (0..self.m).filter(|&b| !used[b]).collect()
    }

    pub fn apply<T: Clone>(&self, input: &[T]) -> Vec<T> {
        self.src.iter().map(|&s| input[s].clone()).collect()
    }
}

/// Maps every record to the bin holding its value. Records with a missing
/// value share the first empty bin.
pub fn extended_perm_from_cuckoo(table: &CuckooTable) -> Result<ExtendedPermutation> {
    let mut src = vec![usize::MAX; table.n];
    for (b, slot) in table.bins.iter().enumerate() {
        if let Some(s) = slot {
            for &r in &s.records {
                src[r] = b;
            }
        }
    }
    let empty = table.bins.iter().position(Option::is_none);
    for (r, s) in src.iter_mut().enumerate() {
        if *s == usize::MAX {
            *s = empty.ok_or(Error::UnmappedRecord(r))?;
        }
    }
    ExtendedPermutation::new(table.bins.len(), src)
}
