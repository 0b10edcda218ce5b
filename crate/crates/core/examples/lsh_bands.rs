//! MinHash band signatures: how often two strings collide in at least one band.

use pprs::error::Result;
use pprs::features::{qgrams, LshParams, MinHasher};
use std::collections::BTreeSet;

fn jaccard(a: &BTreeSet<String>, b: &BTreeSet<String>) -> f64 {
    a.intersection(b).count() as f64 / a.union(b).count() as f64
}

fn main() -> Result<()> {
    let params = LshParams::new(8, 4, 2)?;
    let pairs = [("jonathan", "jonathon"), ("smith", "smyth"), ("katherine", "catherine"), ("alice", "robert")];
    println!("B={} R={} q={}", params.b, params.r, params.q);
    println!("{:<22} {:>7} {:>9} {:>9}", "pair", "jaccard", "s-curve", "observed");
    for (a, b) in pairs {
        let (ga, gb) = (qgrams(a, params.q), qgrams(b, params.q));
        let j = jaccard(&ga, &gb);
        let trials = 2000;
        let hits = (0..trials)
            .filter(|&t| {
                let mut salt = [0u8; 32];
                salt[..8].copy_from_slice(&(t as u64).to_be_bytes());
                let h = MinHasher::new(params, &salt, 0);
                let (x, y) = (h.bands(&ga).unwrap(), h.bands(&gb).unwrap());
                x.iter().zip(&y).any(|(p, q)| p == q)
            })
            .count();
        println!("{:<22} {:>7.3} {:>9.3} {:>9.3}", format!("{a}/{b}"), j, params.s_curve(j), hits as f64 / trials as f64);
    }
    Ok(())
}
