//! Seeded synthetic record pairs with typos, duplicates and missing cells.

use crate::error::{Error, Result};
use crate::features::RecordTable;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use std::collections::{BTreeMap, BTreeSet};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthSpec {
    /// Records per table.
    pub n: usize,
    /// Chance that an overlapping right-hand record carries 1–2 typos.
    pub typo_rate: f64,
    /// Fraction of rows replaced by a copy of another row of the same table.
    pub duplicate_rate: f64,
    /// Per-cell chance of a missing value.
    pub missing_rate: f64,
    /// Fraction of right-hand entities that also appear on the left.
    pub overlap: f64,
    pub seed: u64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        Self { n: 100, typo_rate: 0.0, duplicate_rate: 0.0, missing_rate: 0.0, overlap: 0.5, seed: 0 }
    }
}

#[derive(Debug, Clone)]
pub struct SynthData {
    pub left: RecordTable,
    pub right: RecordTable,
    /// Underlying entity of every row.
    pub left_entities: Vec<usize>,
    pub right_entities: Vec<usize>,
    /// `(left row, right row)` pairs describing the same entity.
    pub links: Vec<(usize, usize)>,
    /// Rows overwritten by duplicates in each table.
    pub duplicates: (usize, usize),
}

impl SynthData {
    /// `true` for every left row with a counterpart on the right.
    pub fn linked_left(&self) -> Vec<bool> {
        let right: BTreeSet<usize> = self.right_entities.iter().copied().collect();
        self.left_entities.iter().map(|e| right.contains(e)).collect()
    }
}

pub const HEADERS: [&str; 4] = ["first_name", "last_name", "birth_date", "zip"];

const SYLLABLES: &[&str] = &[
    "an", "be", "ca", "do", "el", "fa", "gi", "ho", "is", "jo", "ka", "li", "ma", "ne", "or", "pa", "ri", "sa",
    "te", "vi", "wy", "xu", "yo", "ze", "mar", "lin", "son", "ton", "ber", "ley",
];

fn name<R: Rng>(rng: &mut R) -> String {
    let k = rng.gen_range(2..=3);
    (0..k).map(|_| *SYLLABLES.choose(rng).expect("non-empty")).collect()
}

fn entity<R: Rng>(rng: &mut R) -> Vec<String> {
    vec![
        name(rng),
        format!("{}{}", name(rng), name(rng)),
        format!("{:04}-{:02}-{:02}", rng.gen_range(1930..2010), rng.gen_range(1..=12), rng.gen_range(1..=28)),
        format!("{:05}", rng.gen_range(10000..99999)),
    ]
}

const ALPHABET: &[u8] = b"abcdefghijklmnopqrstuvwxyz0123456789";

/// One random edit: substitution, insertion, deletion or transposition.
pub fn typo<R: Rng>(s: &str, rng: &mut R) -> String {
    let mut c: Vec<char> = s.chars().collect();
    let fresh = |rng: &mut R| ALPHABET[rng.gen_range(0..ALPHABET.len())] as char;
    if c.len() < 2 {
        c.push(fresh(rng));
        return c.into_iter().collect();
    }
    let i = rng.gen_range(0..c.len());
    let j = if i + 1 < c.len() { i + 1 } else { i - 1 };
    match rng.gen_range(0..4) {
        1 => c.insert(i, fresh(rng)),
        2 => {
            c.remove(i);
        }
        3 if c[i] != c[j] => c.swap(i, j),
        _ => {
            let mut x = fresh(rng);
            while x == c[i] {
                x = fresh(rng);
            }
            c[i] = x;
        }
    }
    c.into_iter().collect()
}

fn check_rate(name: &str, v: f64) -> Result<()> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(Error::Config(format!("{name} must be in [0, 1], got {v}")))
    }
}

fn duplicate<R: Rng>(rows: &mut [Vec<String>], ents: &mut [usize], rate: f64, rng: &mut R) -> usize {
    let n = rows.len();
    let k = ((rate * n as f64).round() as usize).min(n.saturating_sub(1));
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(rng);
    let (targets, sources) = idx.split_at(k);
    for &t in targets {
        let s = *sources.choose(rng).expect("at least one source row");
        rows[t] = rows[s].clone();
        ents[t] = ents[s];
    }
    k
}

pub fn gen_synthetic(spec: &SynthSpec) -> Result<SynthData> {
    for (name, v) in [
        ("typo_rate", spec.typo_rate),
        ("duplicate_rate", spec.duplicate_rate),
        ("missing_rate", spec.missing_rate),
        ("overlap", spec.overlap),
    ] {
        check_rate(name, v)?;
    }
    let mut rng = ChaCha20Rng::seed_from_u64(spec.seed);
    let n = spec.n;
    let mut seen = BTreeSet::new();
    let mut pool = Vec::with_capacity(2 * n);
    while pool.len() < 2 * n {
        let e = entity(&mut rng);
        if seen.insert(e.concat()) {
            pool.push(e);
        }
    }
    let mut left: Vec<Vec<String>> = pool[..n].to_vec();
    let mut left_ents: Vec<usize> = (0..n).collect();
    let shared = (spec.overlap * n as f64).round() as usize;
    let mut picks: Vec<usize> = (0..n).collect();
    picks.shuffle(&mut rng);
    let mut right_ents: Vec<usize> = picks[..shared].to_vec();
    right_ents.extend(n..2 * n - shared);
    right_ents.shuffle(&mut rng);
    let mut right: Vec<Vec<String>> = right_ents
        .iter()
        .map(|&e| {
            let mut r = pool[e].clone();
            if e < n && rng.gen_bool(spec.typo_rate) {
                for _ in 0..rng.gen_range(1..=2) {
                    let f = rng.gen_range(0..r.len());
                    r[f] = typo(&r[f], &mut rng);
                }
            }
            r
        })
        .collect();
    let dl = duplicate(&mut left, &mut left_ents, spec.duplicate_rate, &mut rng);
    let dr = duplicate(&mut right, &mut right_ents, spec.duplicate_rate, &mut rng);
    let mut to_table = |rows: Vec<Vec<String>>| {
        let rows = rows
            .into_iter()
            .map(|r| r.into_iter().map(|v| (!rng.gen_bool(spec.missing_rate)).then_some(v)).collect())
            .collect();
        RecordTable::new(HEADERS.iter().map(|h| h.to_string()).collect(), rows)
    };
    let left_t = to_table(left)?;
    let right_t = to_table(right)?;
    let mut by_entity: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (j, &e) in right_ents.iter().enumerate() {
        by_entity.entry(e).or_default().push(j);
    }
    let mut links = Vec::new();
    for (i, e) in left_ents.iter().enumerate() {
        for &j in by_entity.get(e).map_or(&[][..], Vec::as_slice) {
            links.push((i, j));
        }
    }
    Ok(SynthData {
        left: left_t,
        right: right_t,
        left_entities: left_ents,
        right_entities: right_ents,
        links,
        duplicates: (dl, dr),
    })
}

/// Mean of true-positive and true-negative rates.
pub fn balanced_accuracy(predicted: &[bool], truth: &[bool]) -> f64 {
    let (mut tp, mut tn, mut p, mut n) = (0usize, 0usize, 0usize, 0usize);
    for (&x, &y) in predicted.iter().zip(truth) {
        if y {
            p += 1;
            tp += x as usize;
        } else {
            n += 1;
            tn += !x as usize;
        }
    }
    let rate = |a: usize, b: usize| if b == 0 { 1.0 } else { a as f64 / b as f64 };
    (rate(tp, p) + rate(tn, n)) / 2.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_overlap_clean_copy() {
        let d = gen_synthetic(&SynthSpec { n: 50, overlap: 1.0, ..Default::default() }).unwrap();
        let mut l: Vec<_> = d.left.rows().to_vec();
        let mut r: Vec<_> = d.right.rows().to_vec();
        l.sort();
        r.sort();
        assert_eq!(l, r);
        assert_eq!(d.links.len(), 50);
    }

    #[test]
    fn no_overlap_no_links() {
        let d = gen_synthetic(&SynthSpec { n: 80, overlap: 0.0, ..Default::default() }).unwrap();
        assert!(d.links.is_empty());
        assert!(d.linked_left().iter().all(|x| !x));
    }

    #[test]
    fn duplicates_counted() {
        let spec = SynthSpec { n: 1000, duplicate_rate: 0.1, seed: 4, ..Default::default() };
        let d = gen_synthetic(&spec).unwrap();
        assert_eq!(d.duplicates, (100, 100));
        let distinct: BTreeSet<_> = d.left.rows().iter().collect();
        assert!(distinct.len() <= 900);
        let again = gen_synthetic(&spec).unwrap();
        assert_eq!(again.left, d.left);
        assert_eq!(again.right, d.right);
    }

    #[test]
    fn typos_change_strings() {
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        for _ in 0..200 {
            let s = name(&mut rng);
            assert_ne!(typo(&s, &mut rng), s);
        }
    }

    #[test]
    fn missing_rate_respected() {
        let d = gen_synthetic(&SynthSpec { n: 500, missing_rate: 0.2, ..Default::default() }).unwrap();
        let miss = d.left.missing_mask().iter().flatten().filter(|&&x| x).count();
        let frac = miss as f64 / (500.0 * 4.0);
        assert!((frac - 0.2).abs() < 0.03, "{frac}");
    }

    #[test]
    fn rejects_bad_rates() {
        assert!(gen_synthetic(&SynthSpec { overlap: 1.5, ..Default::default() }).is_err());
    }

    #[test]
    fn bac_values() {
        assert_eq!(balanced_accuracy(&[true, false], &[true, false]), 1.0);
        assert_eq!(balanced_accuracy(&[true, true], &[true, false]), 0.5);
    }
}
