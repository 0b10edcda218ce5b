//! `key = value` run configuration.

use crate::error::{Error, Result};
use crate::features::{DerivedSpec, LshParams, MatchType, SchemaConfig, SchemaMode};
use crate::ofa::OfaOptions;
use crate::ot::OtMode;
use crate::score::{MissingMode, Weights};
use crate::shares::Ring;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    /// P0: holds the weights and the extended permutation.
    Requester,
    /// P1.
    Candidate,
}

impl Role {
    pub fn parse(s: &str) -> Result<Role> {
        match s {
            "requester" | "p0" => Ok(Role::Requester),
            "candidate" | "p1" => Ok(Role::Candidate),
            _ => Err(Error::Config(format!("unknown role {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    AllMatch,
    Linear,
}

/// A derived attribute named by source headers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttributeSpec {
    pub name: String,
    pub sources: Vec<String>,
    pub approximate: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub role: Role,
    pub listen: Option<String>,
    pub candidates: Vec<String>,
    pub data: Option<PathBuf>,
    pub schema: SchemaMode,
    /// Agnostic mode: match type of the single derived attribute.
    pub approximate: bool,
    /// Aware mode.
    pub attributes: Vec<AttributeSpec>,
    pub lsh: LshParams,
    pub model: ModelKind,
    /// Requester only, unless `public_weights`.
    pub weights: Option<Weights>,
    pub public_weights: bool,
    pub missing_mode: MissingMode,
    pub ofa: OfaOptions,
    pub ot_mode: OtMode,
    /// Fresh OS entropy per session when unset.
    pub seed: Option<u64>,
    pub reveal_decisions: bool,
    /// Candidates with `c > threshold` go on to linkage.
    pub threshold: u64,
    pub eps: f64,
    pub score_ring_bits: u32,
    pub parallel: usize,
    pub timeout_secs: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            role: Role::Requester,
            listen: None,
            candidates: Vec::new(),
            data: None,
            schema: SchemaMode::Agnostic,
            approximate: false,
            attributes: Vec::new(),
            lsh: LshParams { b: 8, r: 4, q: 2 },
            model: ModelKind::AllMatch,
            weights: None,
            public_weights: false,
            missing_mode: MissingMode::Replace,
            ofa: OfaOptions::ALL,
            ot_mode: OtMode::Extended,
            seed: None,
            reveal_decisions: false,
            threshold: 0,
            eps: crate::binning::EPSILON,
            score_ring_bits: 32,
            parallel: 1,
            timeout_secs: 30,
        }
    }
}

/// Recognised keys with a one-line description each.
pub const KEYS: &[(&str, &str)] = &[
    ("role", "requester | candidate"),
    ("listen", "address a candidate listens on, e.g. 127.0.0.1:7000"),
    ("candidates", "comma-separated candidate addresses (requester)"),
    ("data", "CSV file with a header row; empty fields are missing"),
    ("schema", "agnostic | aware"),
    ("match", "exact | approximate (agnostic schema)"),
    ("attributes", "aware schema: name:src+src:exact|approximate; ..."),
    ("lsh_bands", "MinHash bands B"),
    ("lsh_rows", "MinHash rows per band R"),
    ("qgram", "q-gram length"),
    ("model", "all-match | linear"),
    ("weights_matched", "comma-separated w^e per derived attribute"),
    ("weights_unmatched", "comma-separated w^n per derived attribute"),
    ("weights_missing", "comma-separated w^m per derived attribute"),
    ("score_threshold", "linear model: record linked iff score >= this"),
    ("public_weights", "true: both parties load the weights"),
    ("missing_mode", "replace | additive"),
    ("opt_tail_drop", "drop redundant wires after dummy placement"),
    ("opt_partial_tables", "bottom-only replication tables"),
    ("opt_bit_labels", "one-bit wire labels"),
    ("ot_mode", "dealer | base | extended"),
    ("seed", "u64 seed for local randomness; fresh entropy when unset"),
    ("reveal_decisions", "reveal per-record decisions to the requester if both agree"),
    ("threshold", "screening threshold: candidates with c > threshold pass"),
    ("eps", "Cuckoo table expansion"),
    ("score_ring_bits", "ring width for scores and counts"),
    ("parallel", "candidates screened concurrently"),
    ("timeout_secs", "connect/accept timeout"),
];

fn parse_bool(key: &str, v: &str) -> Result<bool> {
    match v {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        _ => Err(Error::Config(format!("{key}: expected a boolean, got {v:?}"))),
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse().map_err(|_| Error::Config(format!("{key}: cannot parse {v:?}")))
}

fn parse_list(key: &str, v: &str) -> Result<Vec<f64>> {
    v.split(',').map(|x| parse_num(key, x.trim())).collect()
}

fn parse_attributes(v: &str) -> Result<Vec<AttributeSpec>> {
    v.split(';')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|item| {
            let parts: Vec<&str> = item.split(':').map(str::trim).collect();
            let (name, srcs, kind) = match parts.as_slice() {
                [n, s] => (*n, *s, "exact"),
                [n, s, k] => (*n, *s, *k),
                _ => return Err(Error::Config(format!("attributes: malformed entry {item:?}"))),
            };
            let approximate = match kind {
                "exact" => false,
                "approximate" | "approx" => true,
                _ => return Err(Error::Config(format!("attributes: unknown match type {kind:?}"))),
            };
            Ok(AttributeSpec {
                name: name.to_string(),
                sources: srcs.split('+').map(|s| s.trim().to_string()).collect(),
                approximate,
            })
        })
        .collect()
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<RunConfig> {
        let mut cfg = RunConfig::default();
        let (mut we, mut wn, mut wm, mut wt) = (None, None, None, None);
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, val) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", lineno + 1)))?;
            let (key, val) = (key.trim(), val.trim());
            match key {
                "role" => cfg.role = Role::parse(val)?,
                "listen" => cfg.listen = Some(val.to_string()),
                "candidates" => {
                    cfg.candidates = val.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect()
                }
                "data" => cfg.data = Some(PathBuf::from(val)),
                "schema" => {
                    cfg.schema = match val {
                        "agnostic" => SchemaMode::Agnostic,
                        "aware" => SchemaMode::Aware,
                        _ => return Err(Error::Config(format!("schema: unknown mode {val:?}"))),
                    }
                }
                "match" => {
                    cfg.approximate = match val {
                        "exact" => false,
                        "approximate" | "approx" => true,
                        _ => return Err(Error::Config(format!("match: unknown type {val:?}"))),
                    }
                }
                "attributes" => cfg.attributes = parse_attributes(val)?,
                "lsh_bands" => cfg.lsh.b = parse_num(key, val)?,
                "lsh_rows" => cfg.lsh.r = parse_num(key, val)?,
                "qgram" => cfg.lsh.q = parse_num(key, val)?,
                "model" => {
                    cfg.model = match val {
                        "all-match" | "all_match" => ModelKind::AllMatch,
                        "linear" => ModelKind::Linear,
                        _ => return Err(Error::Config(format!("model: unknown model {val:?}"))),
                    }
                }
                "weights_matched" => we = Some(parse_list(key, val)?),
                "weights_unmatched" => wn = Some(parse_list(key, val)?),
                "weights_missing" => wm = Some(parse_list(key, val)?),
                "score_threshold" => wt = Some(parse_num::<f64>(key, val)?),
                "public_weights" => cfg.public_weights = parse_bool(key, val)?,
                "missing_mode" => {
                    cfg.missing_mode = match val {
                        "replace" => MissingMode::Replace,
                        "additive" => MissingMode::Additive,
                        _ => return Err(Error::Config(format!("missing_mode: unknown mode {val:?}"))),
                    }
                }
                "opt_tail_drop" => cfg.ofa.tail_drop = parse_bool(key, val)?,
                "opt_partial_tables" => cfg.ofa.partial_tables = parse_bool(key, val)?,
                "opt_bit_labels" => cfg.ofa.bit_labels = parse_bool(key, val)?,
                "ot_mode" => cfg.ot_mode = OtMode::parse(val)?,
                "seed" => cfg.seed = Some(parse_num(key, val)?),
                "reveal_decisions" => cfg.reveal_decisions = parse_bool(key, val)?,
                "threshold" => cfg.threshold = parse_num(key, val)?,
                "eps" => cfg.eps = parse_num(key, val)?,
                "score_ring_bits" => cfg.score_ring_bits = parse_num(key, val)?,
                "parallel" => cfg.parallel = parse_num(key, val)?,
                "timeout_secs" => cfg.timeout_secs = parse_num(key, val)?,
                _ => return Err(Error::Config(format!("line {}: unknown key {key:?}", lineno + 1))),
            }
        }
        if we.is_some() || wn.is_some() || wm.is_some() || wt.is_some() {
            let matched = we.ok_or_else(|| Error::Config("weights_matched missing".into()))?;
            let m = matched.len();
            let w = Weights {
                unmatched: wn.unwrap_or_else(|| vec![0.0; m]),
                missing: wm.unwrap_or_else(|| vec![0.0; m]),
                matched,
                threshold: wt.ok_or_else(|| Error::Config("score_threshold missing".into()))?,
            };
            w.validate()?;
            cfg.weights = Some(w);
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<RunConfig> {
        RunConfig::parse(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        LshParams::new(self.lsh.b, self.lsh.r, self.lsh.q)?;
        Ring::new(self.score_ring_bits)?;
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            return Err(Error::Config(format!("eps must be positive, got {}", self.eps)));
        }
        if self.parallel == 0 {
            return Err(Error::Config("parallel must be at least 1".into()));
        }
        if self.schema == SchemaMode::Aware && self.attributes.is_empty() {
            return Err(Error::Config("schema = aware needs attributes".into()));
        }
        Ok(())
    }

    pub fn ring(&self) -> Ring {
        Ring::new(self.score_ring_bits).expect("validated")
    }

    /// Resolves attribute source names against `headers`.
    pub fn schema_for(&self, headers: &[String]) -> Result<SchemaConfig> {
        let mt = |approx: bool| if approx { MatchType::Approximate(self.lsh) } else { MatchType::Exact };
        match self.schema {
            SchemaMode::Agnostic => Ok(SchemaConfig::agnostic(mt(self.approximate))),
            SchemaMode::Aware => {
                let derived = self
                    .attributes
                    .iter()
                    .map(|a| {
                        let sources = a
                            .sources
                            .iter()
                            .map(|s| {
                                headers
                                    .iter()
                                    .position(|h| h == s)
                                    .ok_or_else(|| Error::Config(format!("attribute {}: no column {s:?}", a.name)))
                            })
                            .collect::<Result<_>>()?;
                        Ok(DerivedSpec { name: a.name.clone(), sources, match_type: mt(a.approximate) })
                    })
                    .collect::<Result<_>>()?;
                Ok(SchemaConfig { mode: SchemaMode::Aware, derived })
            }
        }
    }

    /// Number of derived attributes for a table with `headers`.
    pub fn derived_count(&self) -> usize {
        match self.schema {
            SchemaMode::Agnostic => 1,
            SchemaMode::Aware => self.attributes.len(),
        }
    }

    /// Everything both parties must agree on, in canonical form.
    pub fn canonical_params(&self, headers: &[String]) -> String {
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            s.push_str(k);
            s.push('=');
            s.push_str(&v);
            s.push('\n');
        };
        kv("normalize", "lowercase-trim".into());
        kv("headers", headers.join(","));
        kv("schema", format!("{:?}", self.schema));
        kv("match", self.approximate.to_string());
        let attrs: Vec<String> = self
            .attributes
            .iter()
            .map(|a| format!("{}:{}:{}", a.name, a.sources.join("+"), a.approximate))
            .collect();
        kv("attributes", attrs.join(";"));
        kv("lsh", format!("{},{},{}", self.lsh.b, self.lsh.r, self.lsh.q));
        kv("model", format!("{:?}", self.model));
        kv("public_weights", self.public_weights.to_string());
        if self.public_weights {
            kv("weights", format!("{:?}", self.weights));
        }
        kv("missing_mode", format!("{:?}", self.missing_mode));
        kv("ofa", format!("{:?}", self.ofa));
        kv("eps", self.eps.to_string());
        kv("score_ring_bits", self.score_ring_bits.to_string());
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_every_key() {
        let text = "\
# example
role = candidate
listen = 127.0.0.1:7000
candidates = a:1, b:2
data = x.csv
schema = aware
match = exact
attributes = name:first+last:approximate; dob:dob
lsh_bands = 6
lsh_rows = 3
qgram = 3
model = linear
weights_matched = 2, 1
weights_unmatched = -1,-1
weights_missing = 0,0
score_threshold = 1.5
public_weights = true
missing_mode = additive
opt_tail_drop = false
opt_partial_tables = false
opt_bit_labels = false
ot_mode = dealer
seed = 42
reveal_decisions = yes
threshold = 10
eps = 0.3
score_ring_bits = 40
parallel = 2
timeout_secs = 5
";
        let c = RunConfig::parse(text).unwrap();
        assert_eq!(c.role, Role::Candidate);
        assert_eq!(c.candidates, ["a:1", "b:2"]);
        assert_eq!(c.attributes.len(), 2);
        assert!(c.attributes[0].approximate && !c.attributes[1].approximate);
        assert_eq!(c.attributes[0].sources, ["first", "last"]);
        assert_eq!(c.lsh, LshParams { b: 6, r: 3, q: 3 });
        assert_eq!(c.weights.as_ref().unwrap().matched, [2.0, 1.0]);
        assert_eq!(c.ofa, OfaOptions::NONE);
        assert_eq!((c.seed, c.threshold, c.parallel), (Some(42), 10, 2));
        assert!(c.reveal_decisions && c.public_weights);
        let headers: Vec<String> = ["first", "last", "dob"].iter().map(|s| s.to_string()).collect();
        let schema = c.schema_for(&headers).unwrap();
        assert_eq!(schema.derived[0].sources, [0, 1]);
        for (k, _) in KEYS {
            assert!(text.contains(&format!("{k} =")), "{k} untested");
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(RunConfig::parse("nope = 1").is_err());
        assert!(RunConfig::parse("seed = x").is_err());
        assert!(RunConfig::parse("schema = aware").is_err());
        assert!(RunConfig::parse("weights_matched = 1").is_err());
        assert!(RunConfig::parse("lsh_bands = 0").is_err());
        let c = RunConfig::parse("schema = aware\nattributes = a:zz").unwrap();
        assert!(c.schema_for(&["x".to_string()]).is_err());
    }

    #[test]
    fn params_ignore_private_fields() {
        let a = RunConfig::parse("seed = 1\nthreshold = 3\nrole = requester").unwrap();
        let b = RunConfig::parse("seed = 2\nthreshold = 9\nrole = candidate").unwrap();
        let h = vec!["x".to_string()];
        assert_eq!(a.canonical_params(&h), b.canonical_params(&h));
        let c = RunConfig::parse("match = approximate").unwrap();
        assert_ne!(a.canonical_params(&h), c.canonical_params(&h));
    }
}
