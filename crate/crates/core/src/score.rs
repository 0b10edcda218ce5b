//! Secret-shared record scoring and the collaboration value.

use crate::error::{Error, Result};
use crate::session::{Party, Session};
use crate::shares::{
    b2a_batch, msb_batch, mux_batch, open_arith, reduce_tree, share_arith, ArithShare, BoolShare, Ring, FRAC_BITS,
};
use crate::transport::Phase;

fn in_phase<T>(sess: &mut Session, phase: Phase, f: impl FnOnce(&mut Session) -> Result<T>) -> Result<T> {
    let prev = sess.enter(phase);
    let out = f(sess);
    sess.enter(prev);
    out
}

/// ORs the band columns of each group. `groups[g]` lists indices into
/// `columns`; a singleton group passes through unchanged.
pub fn band_or(sess: &mut Session, columns: &[BoolShare], groups: &[Vec<usize>]) -> Result<Vec<BoolShare>> {
    let party = sess.party();
    let n = columns.first().map_or(0, BoolShare::len);
    if let Some(c) = columns.iter().find(|c| c.len() != n) {
        return Err(Error::LengthMismatch { expected: n, actual: c.len() });
    }
    let arity = groups.iter().map(Vec::len).max().unwrap_or(0);
    if groups.iter().any(Vec::is_empty) {
        return Err(Error::Config("empty band group".into()));
    }
    if let Some(&bad) = groups.iter().flatten().find(|&&c| c >= columns.len()) {
        return Err(Error::LengthMismatch { expected: columns.len(), actual: bad + 1 });
    }
    if arity <= 1 {
        return Ok(groups.iter().map(|g| columns[g[0]].clone()).collect());
    }
    let zero = BoolShare::new(party, crate::bits::Bits::zeros(n));
    let stacked: Vec<BoolShare> = (0..arity)
        .map(|t| BoolShare::concat(party, groups.iter().map(|g| g.get(t).map_or(&zero, |&c| &columns[c]))))
        .collect();
    let joined = in_phase(sess, Phase::Score, |s| reduce_tree(s, stacked, true))?;
    Ok((0..groups.len()).map(|g| joined.slice(g * n, n)).collect())
}

/// `d[i] = AND_j attrs[j][i]`.
pub fn decide_all_match(sess: &mut Session, attrs: &[BoolShare]) -> Result<BoolShare> {
    in_phase(sess, Phase::Score, |s| reduce_tree(s, attrs.to_vec(), false))
}

/// Plaintext weights of a linear model.
#[derive(Debug, Clone, PartialEq)]
pub struct Weights {
    pub matched: Vec<f64>,
    pub unmatched: Vec<f64>,
    pub missing: Vec<f64>,
    pub threshold: f64,
}

impl Weights {
    pub fn m(&self) -> usize {
        self.matched.len()
    }

    pub fn validate(&self) -> Result<()> {
        let m = self.m();
        for (name, v) in [("unmatched", &self.unmatched), ("missing", &self.missing)] {
            if v.len() != m {
                return Err(Error::Config(format!("{name} weights: expected {m}, got {}", v.len())));
            }
        }
        let all = self.matched.iter().chain(&self.unmatched).chain(&self.missing).chain([&self.threshold]);
        if all.into_iter().any(|x| !x.is_finite()) {
            return Err(Error::Config("weights must be finite".into()));
        }
        Ok(())
    }

    /// Fixed-point encodings `(w^e, w^n, w^m, t)`.
    pub fn encode(&self, ring: Ring) -> (Vec<u64>, Vec<u64>, Vec<u64>, u64) {
        let enc = |v: &[f64]| v.iter().map(|&x| ring.encode_fixed(x, FRAC_BITS)).collect::<Vec<_>>();
        (enc(&self.matched), enc(&self.unmatched), enc(&self.missing), ring.encode_fixed(self.threshold, FRAC_BITS))
    }
}

/// How P0 folds in its missing cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MissingMode {
    /// `w^m` replaces the (always unmatched) contribution.
    #[default]
    Replace,
    /// `w^m` is added on top.
    Additive,
}

/// Weight shares; P0 additionally keeps the plaintext for local corrections.
#[derive(Debug, Clone)]
pub struct SharedWeights {
    pub ring: Ring,
    pub matched: ArithShare,
    pub unmatched: ArithShare,
    pub threshold: ArithShare,
    /// P0 only: encoded `(w^n, w^m)` per attribute.
    pub local: Option<(Vec<u64>, Vec<u64>)>,
}

impl SharedWeights {
    pub fn m(&self) -> usize {
        self.matched.len()
    }
}

/// P0 secret-shares its weights with P1. With `public`, both parties pass
/// the same weights and no messages are exchanged.
pub fn share_weights(
    sess: &mut Session,
    weights: Option<&Weights>,
    m: usize,
    ring: Ring,
    public: bool,
) -> Result<SharedWeights> {
    let party = sess.party();
    let enc = match weights {
        Some(w) => {
            w.validate()?;
            if w.m() != m {
                return Err(Error::LengthMismatch { expected: m, actual: w.m() });
            }
            Some(w.encode(ring))
        }
        None if public || party == Party::P0 => {
            return Err(Error::Config("weights required".into()));
        }
        None => None,
    };
    let local = match (&enc, party) {
        (Some((_, wn, wm, _)), Party::P0) => Some((wn.clone(), wm.clone())),
        _ => None,
    };
    if public {
        let (we, wn, _, t) = enc.expect("checked above");
        return Ok(SharedWeights {
            ring,
            matched: ArithShare::public(party, ring, &we),
            unmatched: ArithShare::public(party, ring, &wn),
            threshold: ArithShare::public(party, ring, &[t]),
            local,
        });
    }
    in_phase(sess, Phase::Score, |s| {
        let flat: Option<Vec<u64>> = enc.as_ref().map(|(we, wn, _, t)| {
            let mut v = we.clone();
            v.extend_from_slice(wn);
            v.push(*t);
            v
        });
        let sh = share_arith(s, Party::P0, flat.as_deref(), 2 * m + 1, ring)?;
        Ok(SharedWeights {
            ring,
            matched: ArithShare::new(party, ring, sh.elems[..m].to_vec()),
            unmatched: ArithShare::new(party, ring, sh.elems[m..2 * m].to_vec()),
            threshold: ArithShare::new(party, ring, vec![sh.elems[2 * m]]),
            local,
        })
    })
}

/// `s[i] = Σ_j MUX(w^e_j, q_j[i]) + MUX(w^n_j, ¬q_j[i])`, with P0 adjusting
/// its missing cells (`missing[j][i]`, P0 only).
pub fn score_linear(
    sess: &mut Session,
    attrs: &[BoolShare],
    w: &SharedWeights,
    missing: Option<&[Vec<bool>]>,
    mode: MissingMode,
) -> Result<ArithShare> {
    let party = sess.party();
    let m = attrs.len();
    if w.m() != m {
        return Err(Error::LengthMismatch { expected: w.m(), actual: m });
    }
    let n = attrs.first().map_or(0, BoolShare::len);
    if let Some(a) = attrs.iter().find(|a| a.len() != n) {
        return Err(Error::LengthMismatch { expected: n, actual: a.len() });
    }
    let ring = w.ring;
    let mut wvec = Vec::with_capacity(2 * n * m);
    for j in 0..m {
        wvec.extend(std::iter::repeat_n(w.matched.elems[j], n));
    }
    for j in 0..m {
        wvec.extend(std::iter::repeat_n(w.unmatched.elems[j], n));
    }
    let negated: Vec<BoolShare> = attrs.iter().map(BoolShare::not).collect();
    let sel = BoolShare::concat(party, attrs.iter().chain(&negated));
    let wsh = ArithShare::new(party, ring, wvec);
    let picked = in_phase(sess, Phase::Score, |s| mux_batch(s, &wsh, &sel))?;
    let mut out = vec![0u64; n];
    for (k, &v) in picked.elems.iter().enumerate() {
        let i = k % n;
        out[i] = ring.add(out[i], v);
    }
    if party == Party::P0 {
        if let Some(mask) = missing {
            let (wn, wm) = w.local.as_ref().ok_or(Error::ShareMismatch("P0 weights missing"))?;
            if mask.len() != m {
                return Err(Error::LengthMismatch { expected: m, actual: mask.len() });
            }
            for (j, col) in mask.iter().enumerate() {
                if col.len() != n {
                    return Err(Error::LengthMismatch { expected: n, actual: col.len() });
                }
                let adj = match mode {
                    MissingMode::Replace => ring.sub(wm[j], wn[j]),
                    MissingMode::Additive => wm[j],
                };
                for (i, _) in col.iter().enumerate().filter(|(_, &x)| x) {
                    out[i] = ring.add(out[i], adj);
                }
            }
        }
    }
    Ok(ArithShare::new(party, ring, out))
}

/// `d[i] = [s[i] ≥ t]`, computed as the sign of `t − s[i] − 1`.
pub fn decide_threshold(sess: &mut Session, s: &ArithShare, t: &ArithShare) -> Result<BoolShare> {
    if t.len() != 1 {
        return Err(Error::LengthMismatch { expected: 1, actual: t.len() });
    }
    let ring = s.ring;
    let diff = ArithShare::new(s.party, ring, s.elems.iter().map(|&v| ring.sub(t.elems[0], v)).collect());
    let x = diff.add_public(ring.neg(1));
    in_phase(sess, Phase::Score, |sess| msb_batch(sess, &x))
}

/// Counts linked records and opens the count to both parties.
pub fn collaboration_value(sess: &mut Session, d: &BoolShare, ring: Ring) -> Result<(u64, ArithShare)> {
    let total = in_phase(sess, Phase::Score, |s| Ok(b2a_batch(s, d, ring)?.sum()))?;
    let c = in_phase(sess, Phase::Reveal, |s| open_arith(s, &total, "collaboration_value"))?;
    Ok((c[0], total))
}

/// Per-attribute bin-match probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationStats {
    /// Linked pairs.
    pub p1: Vec<f64>,
    /// Unlinked pairs.
    pub p2: Vec<f64>,
    pub missing_rate: Vec<f64>,
    pub repetition_rate: Vec<f64>,
}

impl CalibrationStats {
    pub fn new(p1: Vec<f64>, p2: Vec<f64>) -> Self {
        let m = p1.len();
        Self { p1, p2, missing_rate: vec![0.0; m], repetition_rate: vec![0.0; m] }
    }

    /// `p1` reduced by the missing rate, `p2` raised by the repetition rate.
    pub fn adjusted(&self) -> (Vec<f64>, Vec<f64>) {
        let p1 = self.p1.iter().zip(&self.missing_rate).map(|(p, r)| (p - r).clamp(0.0, 1.0)).collect();
        let p2 = self.p2.iter().zip(&self.repetition_rate).map(|(p, r)| (p + r).clamp(0.0, 1.0)).collect();
        (p1, p2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SumMode {
    /// Enumerate all `2^m` match patterns.
    Literal,
    /// `Σ w_j p_j`.
    #[default]
    Linear,
}

pub const LITERAL_MAX_M: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Calibration {
    pub e1: f64,
    pub e2: f64,
    pub t: f64,
    pub feasible: bool,
}

/// Expected score `Σ_δ Π_j p_j^δ_j (1 − p_j)^(1 − δ_j) Σ_j w_j δ_j`.
pub fn expected_score(w: &[f64], p: &[f64], mode: SumMode) -> Result<f64> {
    if w.len() != p.len() {
        return Err(Error::LengthMismatch { expected: w.len(), actual: p.len() });
    }
    match mode {
        SumMode::Linear => Ok(w.iter().zip(p).map(|(w, p)| w * p).sum()),
        SumMode::Literal => {
            let m = w.len();
            if m > LITERAL_MAX_M {
                return Err(Error::CalibrationTooLarge(m));
            }
            let mut e = 0.0;
            for delta in 0u64..1 << m {
                let mut prob = 1.0;
                let mut score = 0.0;
                for j in 0..m {
                    if delta >> j & 1 == 1 {
                        prob *= p[j];
                        score += w[j];
                    } else {
                        prob *= 1.0 - p[j];
                    }
                }
                e += prob * score;
            }
            Ok(e)
        }
    }
}

/// Threshold halfway between the expected scores of linked and unlinked
/// pairs.
pub fn calibrate_weights(stats: &CalibrationStats, w: &[f64], mode: SumMode) -> Result<Calibration> {
    let m = w.len();
    for v in [&stats.p1, &stats.p2, &stats.missing_rate, &stats.repetition_rate] {
        if v.len() != m {
            return Err(Error::LengthMismatch { expected: m, actual: v.len() });
        }
    }
    let (p1, p2) = stats.adjusted();
    let e1 = expected_score(w, &p1, mode)?;
    let e2 = expected_score(w, &p2, mode)?;
    let t = (e1 + e2) / 2.0;
    Ok(Calibration { e1, e2, t, feasible: e1 > t && t > e2 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::Bits;
    use crate::ot::OtMode;
    use crate::session::{run_pair, SessionConfig};
    use crate::shares::{reconstruct_arith, reconstruct_bool, share_bool};
    use proptest::prelude::{prop_assert, proptest, ProptestConfig};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha20Rng;

    fn cfg() -> SessionConfig {
        SessionConfig::new(OtMode::Dealer, 7)
    }

    /// Runs `f` on shares of `cols` dealt by P0.
    fn on_shared<T: Send, F>(cols: Vec<Bits>, f: F) -> (T, T)
    where
        F: Fn(&mut Session, Vec<BoolShare>) -> Result<T> + Sync,
    {
        let len: Vec<usize> = cols.iter().map(Bits::len).collect();
        let len1 = len.clone();
        let f = &f;
        run_pair(
            &cfg(),
            move |s| {
                let sh = cols.iter().map(|c| share_bool(s, Party::P0, Some(c), c.len())).collect::<Result<_>>()?;
                f(s, sh)
            },
            move |s| {
                let sh = len1.iter().map(|&l| share_bool(s, Party::P0, None, l)).collect::<Result<_>>()?;
                f(s, sh)
            },
        )
        .unwrap()
    }

    #[test]
    fn band_or_examples() {
        let cols = vec![
            Bits::from_bools(&[false, false]),
            Bits::from_bools(&[false, false]),
            Bits::from_bools(&[true, false]),
            Bits::from_bools(&[false, false]),
            Bits::from_bools(&[true, false]),
        ];
        let (a, b) = on_shared(cols, |s, sh| band_or(s, &sh, &[vec![0, 1, 2, 3], vec![4]]));
        assert_eq!(reconstruct_bool(&a[0], &b[0]).unwrap().to_bools(), [true, false]);
        assert_eq!(reconstruct_bool(&a[1], &b[1]).unwrap().to_bools(), [true, false]);
    }

    #[test]
    fn band_or_random_b8() {
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let n = 300;
        let cols: Vec<Bits> = (0..16).map(|_| (0..n).map(|_| rng.gen_bool(0.1)).collect()).collect();
        let expect: Vec<Bits> = (0..2)
            .map(|g| (0..n).map(|i| (0..8).any(|t| cols[g * 8 + t].get(i))).collect())
            .collect();
        let groups: Vec<Vec<usize>> = vec![(0..8).collect(), (8..16).collect()];
        let (a, b) = on_shared(cols, move |s, sh| band_or(s, &sh, &groups));
        for g in 0..2 {
            assert_eq!(reconstruct_bool(&a[g], &b[g]).unwrap(), expect[g]);
        }
    }

    #[test]
    fn all_match_random() {
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        let n = 512;
        let cols: Vec<Bits> = (0..5).map(|_| (0..n).map(|_| rng.gen_bool(0.8)).collect()).collect();
        let expect: Bits = (0..n).map(|i| cols.iter().all(|c| c.get(i))).collect();
        let (a, b) = on_shared(cols, |s, sh| decide_all_match(s, &sh));
        assert_eq!(reconstruct_bool(&a, &b).unwrap(), expect);
    }

    fn weights(we: &[f64], wn: &[f64], wm: &[f64], t: f64) -> Weights {
        Weights { matched: we.to_vec(), unmatched: wn.to_vec(), missing: wm.to_vec(), threshold: t }
    }

    fn run_score(
        cols: Vec<Bits>,
        w: Weights,
        missing: Vec<Vec<bool>>,
        mode: MissingMode,
        public: bool,
    ) -> (Vec<u64>, Bits) {
        let ring = Ring::new(32).unwrap();
        let m = w.m();
        let (a, b) = on_shared(cols, move |s, sh| {
            let mine = (s.is_p0() || public).then_some(&w);
            let sw = share_weights(s, mine, m, ring, public)?;
            let mask = s.is_p0().then_some(missing.as_slice());
            let score = score_linear(s, &sh, &sw, mask, mode)?;
            let d = decide_threshold(s, &score, &sw.threshold)?;
            Ok((score, d))
        });
        (reconstruct_arith(&a.0, &b.0).unwrap(), reconstruct_bool(&a.1, &b.1).unwrap())
    }

    #[test]
    fn linear_direct_sum() {
        let cols = vec![Bits::from_bools(&[true, true]), Bits::from_bools(&[false, true])];
        let w = weights(&[3.0, 5.0], &[0.0, 0.0], &[0.0, 0.0], 4.0);
        let (s, d) = run_score(cols, w, vec![vec![false; 2]; 2], MissingMode::Replace, false);
        let r = Ring::new(32).unwrap();
        assert_eq!(s, [r.encode_fixed(3.0, FRAC_BITS), r.encode_fixed(8.0, FRAC_BITS)]);
        assert_eq!(d.to_bools(), [false, true]);
    }

    #[test]
    fn linear_random_with_missing() {
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        let ring = Ring::new(32).unwrap();
        for trial in 0..6 {
            let (n, m) = (rng.gen_range(1..200), rng.gen_range(1..5));
            let mut missing: Vec<Vec<bool>> = (0..m).map(|_| (0..n).map(|_| rng.gen_bool(0.2)).collect()).collect();
            let cols: Vec<Bits> = (0..m)
                .map(|j| (0..n).map(|i| !missing[j][i] && rng.gen_bool(0.5)).collect())
                .collect();
            if trial % 2 == 0 {
                missing.iter_mut().for_each(|c| c.iter_mut().for_each(|x| *x = false));
            }
            let w = weights(
                &(0..m).map(|_| rng.gen_range(0.0..5.0)).collect::<Vec<_>>(),
                &(0..m).map(|_| rng.gen_range(-5.0..0.0)).collect::<Vec<_>>(),
                &(0..m).map(|_| rng.gen_range(-1.0..1.0)).collect::<Vec<_>>(),
                rng.gen_range(-3.0..3.0),
            );
            let (we, wn, wm, t) = w.encode(ring);
            for mode in [MissingMode::Replace, MissingMode::Additive] {
                let (s, d) = run_score(cols.clone(), w.clone(), missing.clone(), mode, trial % 3 == 0);
                for i in 0..n {
                    let mut e = 0u64;
                    for j in 0..m {
                        let base = if cols[j].get(i) { we[j] } else { wn[j] };
                        e = match (missing[j][i], mode) {
                            (true, MissingMode::Replace) => ring.add(e, wm[j]),
                            (true, MissingMode::Additive) => ring.add(ring.add(e, base), wm[j]),
                            (false, _) => ring.add(e, base),
                        };
                    }
                    assert_eq!(s[i], e);
                    assert_eq!(d.get(i), ring.to_i64(e) >= ring.to_i64(t));
                }
            }
        }
    }

    #[test]
    fn threshold_boundaries_and_grid() {
        let ring = Ring::new(9).unwrap();
        let mut sv = Vec::new();
        let mut tv = Vec::new();
        for s in 0..256u64 {
            for t in 0..256u64 {
                sv.push(s);
                tv.push(t);
            }
        }
        let n = sv.len();
        let (sv0, tv0) = (sv.clone(), tv.clone());
        let (a, b) = run_pair(
            &cfg(),
            move |s| {
                let sh = share_arith(s, Party::P0, Some(&sv0), n, ring)?;
                let th = share_arith(s, Party::P0, Some(&tv0), n, ring)?;
                let x = ArithShare::new(Party::P0, ring, (0..n).map(|i| ring.sub(th.elems[i], sh.elems[i])).collect());
                msb_batch(s, &x.add_public(ring.neg(1)))
            },
            move |s| {
                let sh = share_arith(s, Party::P0, None, n, ring)?;
                let th = share_arith(s, Party::P0, None, n, ring)?;
                let x = ArithShare::new(Party::P1, ring, (0..n).map(|i| ring.sub(th.elems[i], sh.elems[i])).collect());
                msb_batch(s, &x)
            },
        )
        .unwrap();
        let d = reconstruct_bool(&a, &b).unwrap();
        for i in 0..n {
            assert_eq!(d.get(i), sv[i] >= tv[i], "s={} t={}", sv[i], tv[i]);
        }

        let (a, b) = run_pair(
            &cfg(),
            |s| {
                let sc = share_arith(s, Party::P0, Some(&[10, 9]), 2, ring)?;
                let t = ArithShare::public(Party::P0, ring, &[10]);
                decide_threshold(s, &sc, &t)
            },
            |s| {
                let sc = share_arith(s, Party::P0, None, 2, ring)?;
                decide_threshold(s, &sc, &ArithShare::public(Party::P1, ring, &[10]))
            },
        )
        .unwrap();
        assert_eq!(reconstruct_bool(&a, &b).unwrap().to_bools(), [true, false]);
    }

    #[test]
    fn collaboration_counts() {
        let ring = Ring::new(32).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(4);
        for (n, p) in [(7, 0.0), (7, 1.0), (10_000, 0.3)] {
            let d: Bits = (0..n).map(|_| rng.gen_bool(p)).collect();
            let expect = d.count_ones() as u64;
            let ((c0, _), (c1, _)) = on_shared(vec![d], move |s, sh| collaboration_value(s, &sh[0], ring));
            assert_eq!((c0, c1), (expect, expect));
        }
    }

    #[test]
    fn only_count_is_revealed() {
        let ring = Ring::new(32).unwrap();
        let (a, _) = on_shared(vec![Bits::ones(5)], move |s, sh| {
            collaboration_value(s, &sh[0], ring)?;
            Ok(s.reveal_log().to_vec())
        });
        assert_eq!(a, [("collaboration_value".to_string(), 1)]);
    }

    #[test]
    fn calibration_examples() {
        let stats = CalibrationStats::new(vec![1.0, 1.0], vec![0.0, 0.0]);
        let c = calibrate_weights(&stats, &[1.0, 1.0], SumMode::Literal).unwrap();
        assert_eq!((c.e1, c.e2, c.t, c.feasible), (2.0, 0.0, 1.0, true));
        let same = CalibrationStats::new(vec![0.4, 0.7], vec![0.4, 0.7]);
        let c = calibrate_weights(&same, &[2.0, 3.0], SumMode::Linear).unwrap();
        assert!(!c.feasible);
        let big = vec![0.5; 31];
        assert!(matches!(expected_score(&big, &big, SumMode::Literal), Err(Error::CalibrationTooLarge(31))));
        let mut adj = CalibrationStats::new(vec![0.9], vec![0.1]);
        adj.missing_rate = vec![0.2];
        adj.repetition_rate = vec![0.05];
        let (p1, p2) = adj.adjusted();
        assert!((p1[0] - 0.7).abs() < 1e-12 && (p2[0] - 0.15).abs() < 1e-12);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn literal_sum_is_linear(seed in 0u64..u64::MAX, m in 1usize..=10) {
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            let w: Vec<f64> = (0..m).map(|_| rng.gen_range(-5.0..5.0)).collect();
            let p: Vec<f64> = (0..m).map(|_| rng.gen()).collect();
            let lit = expected_score(&w, &p, SumMode::Literal).unwrap();
            let lin = expected_score(&w, &p, SumMode::Linear).unwrap();
            prop_assert!((lit - lin).abs() < 1e-12);
        }

        #[test]
        fn separation_when_dominated(seed in 0u64..u64::MAX, m in 1usize..=10) {
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            let w: Vec<f64> = (0..m).map(|_| rng.gen_range(0.1..5.0)).collect();
            let p2: Vec<f64> = (0..m).map(|_| rng.gen_range(0.0..0.9)).collect();
            let p1: Vec<f64> = p2.iter().map(|p| p + rng.gen_range(0.01..(1.0 - p))).collect();
            let c = calibrate_weights(&CalibrationStats::new(p1, p2), &w, SumMode::Literal).unwrap();
            prop_assert!(c.feasible && c.e1 > c.t && c.t > c.e2);
        }
    }
}
