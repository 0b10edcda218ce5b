//! Alignment benchmark: bytes, OTs and time per variant.

use crate::binning::{table_size, ExtendedPermutation};
use crate::bits::Bits;
use crate::error::{Error, Result};
use crate::ofa::{comm_report, oep_execute, ofa_execute, OfaOptions};
use crate::ot::OtMode;
use crate::session::{run_pair, Party, SessionConfig};
use crate::shares::{ArithShare, BoolShare, Ring};
use crate::transport::Phase;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use std::io::Write;
use std::time::Instant;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    /// 64-bit additive baseline.
    Oep,
    Opt1,
    Opt12,
    /// All three optimisations.
    Ofa,
}

impl Variant {
    pub const ALL: [Variant; 4] = [Variant::Oep, Variant::Opt1, Variant::Opt12, Variant::Ofa];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Oep => "oep",
            Variant::Opt1 => "opt1",
            Variant::Opt12 => "opt1+2",
            Variant::Ofa => "ofa",
        }
    }

    pub fn parse(s: &str) -> Result<Variant> {
        Variant::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown variant {s:?}")))
    }

    pub fn options(self) -> Option<OfaOptions> {
        match self {
            Variant::Oep => None,
            Variant::Opt1 => Some(OfaOptions { tail_drop: true, ..OfaOptions::NONE }),
            Variant::Opt12 => Some(OfaOptions { tail_drop: true, partial_tables: true, bit_labels: false }),
            Variant::Ofa => Some(OfaOptions::ALL),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub n: usize,
    pub eps: f64,
    pub variant: Variant,
    /// Alignment-phase bytes in both directions.
    pub bytes: u64,
    /// Random-OT setup bytes consumed by the alignment.
    pub setup_bytes: u64,
    pub ots: u64,
    pub seconds: f64,
    /// Output matched the plaintext permutation.
    pub correct: bool,
}

/// Random injective record→bin map, as Cuckoo hashing produces.
pub fn random_instance(n: usize, eps: f64, seed: u64) -> (ExtendedPermutation, Bits) {
    let m = table_size(n, eps);
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut bins: Vec<usize> = (0..m).collect();
    bins.shuffle(&mut rng);
    bins.truncate(n);
    let x = Bits::random(&mut rng, m);
    (ExtendedPermutation::new(m, bins).expect("bins in range"), x)
}

pub fn bench_alignment(n: usize, eps: f64, variant: Variant, ot_mode: OtMode, seed: u64) -> Result<BenchRow> {
    let (ep, x) = random_instance(n, eps, seed);
    let m = ep.m;
    let mut rng = ChaCha20Rng::seed_from_u64(seed ^ 0x5eed);
    let cfg = SessionConfig::new(ot_mode, seed);
    let expect: Bits = ep.src.iter().map(|&s| x.get(s)).collect();
    let start = Instant::now();
    let (bytes, setup_bytes, ots, got) = match variant.options() {
        Some(opts) => {
            let a = Bits::random(&mut rng, m);
            let b = a.xor(&x);
            let ep0 = ep.clone();
            let ((out0, rep), out1) = run_pair(
                &cfg,
                move |s| {
                    let o = ofa_execute(s, &BoolShare::new(Party::P0, a), Some(&ep0), opts)?;
                    Ok((o, comm_report(s)?))
                },
                move |s| ofa_execute(s, &BoolShare::new(Party::P1, b), None, opts),
            )?;
            let r = rep.phase(Phase::Ofa);
            let setup = rep.phase(Phase::OtSetup).counters.total_bytes();
            (r.counters.total_bytes(), setup, r.ots, out0.bits.xor(&out1.bits))
        }
        None => {
            let ring = Ring::new(64)?;
            let a: Vec<u64> = (0..m).map(|_| rng.gen()).collect();
            let b: Vec<u64> = a.iter().enumerate().map(|(i, &v)| (x.get(i) as u64).wrapping_sub(v)).collect();
            let ep0 = ep.clone();
            let ((out0, rep), out1) = run_pair(
                &cfg,
                move |s| {
                    let o = oep_execute(s, &ArithShare::new(Party::P0, ring, a), Some(&ep0))?;
                    Ok((o, comm_report(s)?))
                },
                move |s| oep_execute(s, &ArithShare::new(Party::P1, ring, b), None),
            )?;
            let r = rep.phase(Phase::Ofa);
            let setup = rep.phase(Phase::OtSetup).counters.total_bytes();
            let bits = out0.elems.iter().zip(&out1.elems).map(|(p, q)| p.wrapping_add(*q) == 1).collect();
            (r.counters.total_bytes(), setup, r.ots, bits)
        }
    };
    Ok(BenchRow { n, eps, variant, bytes, setup_bytes, ots, seconds: start.elapsed().as_secs_f64(), correct: got == expect })
}

pub fn write_csv<W: Write>(w: W, rows: &[BenchRow]) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["n", "eps", "variant", "bytes", "setup_bytes", "ots", "seconds", "correct"])?;
    for r in rows {
        wr.write_record([
            r.n.to_string(),
            r.eps.to_string(),
            r.variant.name().to_string(),
            r.bytes.to_string(),
            r.setup_bytes.to_string(),
            r.ots.to_string(),
            format!("{:.6}", r.seconds),
            r.correct.to_string(),
        ])?;
    }
    wr.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn variants_are_correct_and_ordered() {
        let rows: Vec<BenchRow> =
            Variant::ALL.iter().map(|&v| bench_alignment(300, 0.27, v, OtMode::Dealer, 1).unwrap()).collect();
        assert!(rows.iter().all(|r| r.correct));
        for w in rows.windows(2) {
            assert!(w[1].bytes <= w[0].bytes, "{:?} then {:?}", w[0].variant, w[1].variant);
        }
        let mut buf = Vec::new();
        write_csv(&mut buf, &rows).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 5);
    }

    #[test]
    fn variant_names_round_trip() {
        for v in Variant::ALL {
            assert_eq!(Variant::parse(v.name()).unwrap(), v);
        }
    }
}
