//! Local feature engineering: derived attributes, q-grams and MinHash bands.

use std::collections::BTreeSet;
use std::hash::Hasher;

use siphasher::sip::SipHasher24;

use crate::error::{Error, Result};
use crate::session::derive_key;

/// Joins source values inside a derived attribute. Rejected in raw values.
pub const SEPARATOR: char = '\u{241F}';

/// Plain records, one string per attribute; `None` marks a missing cell.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RecordTable {
    pub headers: Vec<String>,
    rows: Vec<Vec<Option<String>>>,
}

impl RecordTable {
    pub fn new(headers: Vec<String>, rows: Vec<Vec<Option<String>>>) -> Result<Self> {
        for (i, row) in rows.iter().enumerate() {
            if row.len() != headers.len() {
                return Err(Error::Config(format!(
                    "row {i} has {} fields, header has {}",
                    row.len(),
                    headers.len()
                )));
            }
            if row.iter().flatten().any(|v| v.contains(SEPARATOR)) {
                return Err(Error::ReservedSeparator);
            }
        }
        Ok(Self { headers, rows })
    }

    /// Builds a table whose empty strings are missing cells.
    pub fn from_strings(headers: &[&str], rows: &[Vec<&str>]) -> Result<Self> {
        let rows = rows
            .iter()
            .map(|r| r.iter().map(|v| (!v.is_empty()).then(|| v.to_string())).collect())
            .collect();
        Self::new(headers.iter().map(|h| h.to_string()).collect(), rows)
    }

    pub fn n(&self) -> usize {
        self.rows.len()
    }

    pub fn m(&self) -> usize {
        self.headers.len()
    }

    pub fn cell(&self, i: usize, j: usize) -> Option<&str> {
        self.rows[i][j].as_deref()
    }

    pub fn is_missing(&self, i: usize, j: usize) -> bool {
        self.rows[i][j].is_none()
    }

    pub fn rows(&self) -> &[Vec<Option<String>>] {
        &self.rows
    }

    /// The n×m missing mask.
    pub fn missing_mask(&self) -> Vec<Vec<bool>> {
        self.rows.iter().map(|r| r.iter().map(Option::is_none).collect()).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LshParams {
    /// Bands.
    pub b: usize,
    /// Rows per band.
    pub r: usize,
    /// Gram length.
    pub q: usize,
}

impl LshParams {
    pub fn new(b: usize, r: usize, q: usize) -> Result<Self> {
        if b == 0 || r == 0 || q == 0 {
            return Err(Error::Config("LSH parameters B, R, q must be at least 1".into()));
        }
        Ok(Self { b, r, q })
    }

    /// Probability that at least one band matches at Jaccard similarity `j`.
    pub fn s_curve(&self, j: f64) -> f64 {
        1.0 - (1.0 - j.powi(self.r as i32)).powi(self.b as i32)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatchType {
    Exact,
    Approximate(LshParams),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchemaMode {
    Aware,
    Agnostic,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DerivedSpec {
    pub name: String,
    pub sources: Vec<usize>,
    pub match_type: MatchType,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SchemaConfig {
    pub mode: SchemaMode,
    /// In agnostic mode only the first entry's match type is used.
    pub derived: Vec<DerivedSpec>,
}

impl SchemaConfig {
    pub fn agnostic(match_type: MatchType) -> Self {
        Self {
            mode: SchemaMode::Agnostic,
            derived: vec![DerivedSpec { name: "all".into(), sources: vec![], match_type }],
        }
    }

    /// Effective derived attributes for a table with `m` attributes.
    pub fn resolve(&self, m: usize) -> Result<Vec<DerivedSpec>> {
        match self.mode {
            SchemaMode::Agnostic => {
                let match_type = self.derived.first().map_or(MatchType::Exact, |d| d.match_type);
                Ok(vec![DerivedSpec { name: "all".into(), sources: (0..m).collect(), match_type }])
            }
            SchemaMode::Aware => {
                if self.derived.is_empty() {
                    return Err(Error::Config("schema-aware mode needs a derived attribute".into()));
                }
                for d in &self.derived {
                    if d.sources.is_empty() {
                        return Err(Error::Config(format!("derived attribute {} has no sources", d.name)));
                    }
                    if let Some(&bad) = d.sources.iter().find(|&&s| s >= m) {
                        return Err(Error::Config(format!(
                            "derived attribute {} refers to attribute {bad}, table has {m}",
                            d.name
                        )));
                    }
                }
                Ok(self.derived.clone())
            }
        }
    }
}

/// Concatenates source attributes. A derived cell is missing only when every
/// source is missing; otherwise missing sources contribute empty strings.
pub fn derive_attributes(table: &RecordTable, cfg: &SchemaConfig) -> Result<RecordTable> {
    let specs = cfg.resolve(table.m())?;
    let sep = SEPARATOR.to_string();
    let rows = table
        .rows
        .iter()
        .map(|row| {
            specs
                .iter()
                .map(|d| {
                    if d.sources.iter().all(|&s| row[s].is_none()) {
                        None
                    } else {
                        Some(
                            d.sources
                                .iter()
                                .map(|&s| row[s].as_deref().unwrap_or(""))
                                .collect::<Vec<_>>()
                                .join(&sep),
                        )
                    }
                })
                .collect()
        })
        .collect();
    Ok(RecordTable { headers: specs.iter().map(|d| d.name.clone()).collect(), rows })
}

/// Distinct overlapping substrings of `q` characters; shorter strings yield
/// themselves.
pub fn qgrams(s: &str, q: usize) -> BTreeSet<String> {
    let chars: Vec<char> = s.chars().collect();
    if chars.len() < q.max(1) {
        return std::iter::once(s.to_string()).collect();
    }
    chars.windows(q.max(1)).map(|w| w.iter().collect()).collect()
}

const MERSENNE61: u64 = (1 << 61) - 1;

#[inline]
fn mod_m61(x: u128) -> u64 {
    let lo = (x as u64) & MERSENNE61;
    let hi = (x >> 61) as u64;
    let mut r = lo + (hi & MERSENNE61) + ((x >> 122) as u64);
    while r >= MERSENNE61 {
        r -= MERSENNE61;
    }
    r
}

pub(crate) fn sip_keys(key: &[u8; 32]) -> (u64, u64) {
    (
        u64::from_le_bytes(key[..8].try_into().expect("8 bytes")),
        u64::from_le_bytes(key[8..16].try_into().expect("8 bytes")),
    )
}

/// Keyed 64-bit hash of a byte string.
pub fn keyed_hash(key: (u64, u64), data: &[u8]) -> u64 {
    let mut h = SipHasher24::new_with_keys(key.0, key.1);
    h.write(data);
    h.finish()
}

/// Seeded MinHash family for one attribute, derived from the session salt.
#[derive(Debug, Clone)]
pub struct MinHasher {
    params: LshParams,
    base: (u64, u64),
    band: (u64, u64),
    coeffs: Vec<(u64, u64)>,
}

impl MinHasher {
    pub fn new(params: LshParams, salt: &[u8; 32], namespace: u64) -> Self {
        let ns = namespace.to_be_bytes();
        let base = sip_keys(&derive_key("minhash-base", &[salt, &ns]));
        let band = sip_keys(&derive_key("minhash-band", &[salt, &ns]));
        let coeffs = (0..params.b * params.r)
            .map(|k| {
                let kb = (k as u64).to_be_bytes();
                let d = derive_key("minhash-perm", &[salt, &ns, &kb]);
                let a = u64::from_le_bytes(d[..8].try_into().expect("8")) % (MERSENNE61 - 1) + 1;
                let b = u64::from_le_bytes(d[8..16].try_into().expect("8")) % MERSENNE61;
                (a, b)
            })
            .collect();
        Self { params, base, band, coeffs }
    }

    pub fn params(&self) -> LshParams {
        self.params
    }

    /// B band signatures; band index is hashed into each.
    pub fn bands<S: AsRef<str>>(&self, grams: &BTreeSet<S>) -> Result<Vec<u64>> {
        if grams.is_empty() {
            return Err(Error::EmptyGrams);
        }
        let xs: Vec<u64> =
            grams.iter().map(|g| keyed_hash(self.base, g.as_ref().as_bytes()) % MERSENNE61).collect();
        let digests: Vec<u64> = self
            .coeffs
            .iter()
            .map(|&(a, b)| {
                xs.iter().map(|&x| mod_m61(a as u128 * x as u128 + b as u128)).min().expect("non-empty")
            })
            .collect();
        Ok(digests
            .chunks(self.params.r)
            .enumerate()
            .map(|(band, rows)| {
                let mut h = SipHasher24::new_with_keys(self.band.0, self.band.1);
                h.write_u64(band as u64);
                for &d in rows {
                    h.write_u64(d);
                }
                h.finish()
            })
            .collect())
    }
}

/// Convenience wrapper around [`MinHasher::bands`].
pub fn minhash_bands<S: AsRef<str>>(
    grams: &BTreeSet<S>,
    params: LshParams,
    salt: &[u8; 32],
    namespace: u64,
) -> Result<Vec<u64>> {
    MinHasher::new(params, salt, namespace).bands(grams)
}

/// One matching column after expansion.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Column {
    /// Derived attribute this column came from.
    pub group: usize,
    /// Band index for approximate attributes.
    pub band: Option<usize>,
    /// Set elements per record; `None` when missing.
    pub values: Vec<Option<Vec<u8>>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DerivedTable {
    pub n: usize,
    /// Number of derived attributes before band expansion.
    pub groups: usize,
    pub columns: Vec<Column>,
    /// Missing mask per derived attribute.
    pub missing: Vec<Vec<bool>>,
}

impl DerivedTable {
    /// Column indices belonging to each derived attribute.
    pub fn group_columns(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.groups];
        for (c, col) in self.columns.iter().enumerate() {
            out[col.group].push(c);
        }
        out
    }
}

/// Encodes a band signature as a set element.
pub fn band_element(band: usize, sig: u64) -> Vec<u8> {
    let mut v = Vec::with_capacity(12);
    v.extend_from_slice(&(band as u32).to_be_bytes());
    v.extend_from_slice(&sig.to_le_bytes());
    v
}

/// Expands derived attributes into matching columns: exact attributes pass
/// through, approximate ones become B band columns.
pub fn expand_lsh(derived: &RecordTable, specs: &[DerivedSpec], salt: &[u8; 32]) -> Result<DerivedTable> {
    if specs.len() != derived.m() {
        return Err(Error::LengthMismatch { expected: specs.len(), actual: derived.m() });
    }
    let n = derived.n();
    let mut columns = Vec::new();
    let mut missing = Vec::with_capacity(specs.len());
    for (j, spec) in specs.iter().enumerate() {
        missing.push((0..n).map(|i| derived.is_missing(i, j)).collect());
        match spec.match_type {
            MatchType::Exact => columns.push(Column {
                group: j,
                band: None,
                values: (0..n).map(|i| derived.cell(i, j).map(|s| s.as_bytes().to_vec())).collect(),
            }),
            MatchType::Approximate(p) => {
                let hasher = MinHasher::new(p, salt, j as u64);
                let mut cols: Vec<Column> = (0..p.b)
                    .map(|b| Column { group: j, band: Some(b), values: Vec::with_capacity(n) })
                    .collect();
                for i in 0..n {
                    match derived.cell(i, j) {
                        None => cols.iter_mut().for_each(|c| c.values.push(None)),
                        Some(s) => {
                            let sigs = hasher.bands(&qgrams(s, p.q))?;
                            for (b, c) in cols.iter_mut().enumerate() {
                                c.values.push(Some(band_element(b, sigs[b])));
                            }
                        }
                    }
                }
                columns.extend(cols);
            }
        }
    }
    Ok(DerivedTable { n, groups: specs.len(), columns, missing })
}

/// Derivation plus expansion in one step.
pub fn featurize(table: &RecordTable, cfg: &SchemaConfig, salt: &[u8; 32]) -> Result<DerivedTable> {
    let specs = cfg.resolve(table.m())?;
    let derived = derive_attributes(table, cfg)?;
    expand_lsh(&derived, &specs, salt)
}
