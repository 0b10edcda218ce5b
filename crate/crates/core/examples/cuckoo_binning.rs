//! Cuckoo and simple hashing tables for one column, and the bin-to-record map.

use pprs::binning::{cuckoo_insert, extended_perm_from_cuckoo, simple_insert, table_size, BinningParams, HashKeys};
use pprs::error::Result;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

fn main() -> Result<()> {
    let mut rng = ChaCha20Rng::seed_from_u64(9);
    let params = BinningParams::default();
    for n in [100usize, 1000, 10_000] {
        let mut values: Vec<Option<u64>> = (0..n).map(|_| Some(rng.gen::<u64>() >> 1)).collect();
        values[0] = None;
        values[1] = values[2];
        let bins = table_size(n, params.eps);
        let keys = HashKeys::new(&[1; 32], 0, 0, params.hashes, bins);
        let cuckoo = cuckoo_insert(&values, &keys, params.eviction_limit, &mut rng)?;
        let simple = simple_insert(&values, &keys);
        let beta = simple.beta;
        let ep = extended_perm_from_cuckoo(&cuckoo)?;
        println!(
            "n={n:>6} bins={bins:>6} occupied={:>6} max simple load={beta:>2} records 1,2 -> bins {},{}",
            cuckoo.occupied(),
            ep.src[1],
            ep.src[2]
        );
    }
    Ok(())
}
