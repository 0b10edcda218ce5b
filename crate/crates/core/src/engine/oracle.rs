//! The screening pipeline evaluated in the clear.

use super::config::{ModelKind, RunConfig};
use crate::error::{Error, Result};
use crate::features::{featurize, RecordTable};
use crate::score::MissingMode;
use std::collections::HashSet;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleResult {
    pub c: u64,
    pub decisions: Vec<bool>,
    /// Per derived attribute, per left record.
    pub matches: Vec<Vec<bool>>,
    /// Ring-encoded scores under the linear model.
    pub scores: Option<Vec<u64>>,
}

/// Ground truth for a protocol run between `left` (requester) and `right`
/// with the same configuration and salt.
pub fn plaintext_oracle(left: &RecordTable, right: &RecordTable, cfg: &RunConfig, salt: &[u8; 32]) -> Result<OracleResult> {
    let d0 = featurize(left, &cfg.schema_for(&left.headers)?, salt)?;
    let d1 = featurize(right, &cfg.schema_for(&right.headers)?, salt)?;
    if d0.columns.len() != d1.columns.len() {
        return Err(Error::LengthMismatch { expected: d0.columns.len(), actual: d1.columns.len() });
    }
    let n = d0.n;
    let column_hits: Vec<Vec<bool>> = d0
        .columns
        .iter()
        .zip(&d1.columns)
        .map(|(c0, c1)| {
            let set: HashSet<&[u8]> = c1.values.iter().flatten().map(Vec::as_slice).collect();
            c0.values.iter().map(|v| v.as_deref().is_some_and(|x| set.contains(x))).collect()
        })
        .collect();
    let matches: Vec<Vec<bool>> = d0
        .group_columns()
        .iter()
        .map(|g| (0..n).map(|i| g.iter().any(|&k| column_hits[k][i])).collect())
        .collect();
    let (decisions, scores) = match cfg.model {
        ModelKind::AllMatch => ((0..n).map(|i| matches.iter().all(|m| m[i])).collect(), None),
        ModelKind::Linear => {
            let w = cfg.weights.as_ref().ok_or_else(|| Error::Config("linear model needs weights".into()))?;
            if w.m() != matches.len() {
                return Err(Error::LengthMismatch { expected: matches.len(), actual: w.m() });
            }
            let ring = cfg.ring();
            let (we, wn, wm, t) = w.encode(ring);
            let mut scores = vec![0u64; n];
            let mut dec = vec![false; n];
            for i in 0..n {
                let mut s = 0;
                for j in 0..matches.len() {
                    let base = if matches[j][i] { we[j] } else { wn[j] };
                    s = match (d0.missing[j][i], cfg.missing_mode) {
                        (true, MissingMode::Replace) => ring.add(s, wm[j]),
                        (true, MissingMode::Additive) => ring.add(ring.add(s, base), wm[j]),
                        (false, _) => ring.add(s, base),
                    };
                }
                scores[i] = s;
                dec[i] = ring.msb(ring.sub(ring.sub(t, s), 1));
            }
            (dec, Some(scores))
        }
    };
    let c = decisions.iter().filter(|&&d| d).count() as u64;
    Ok(OracleResult { c, decisions, matches, scores })
}
