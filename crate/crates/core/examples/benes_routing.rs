//! Routing permutations and extended permutations through switching networks.

use pprs::binning::ExtendedPermutation;
use pprs::error::Result;
use pprs::permnet::{benes_route, decompose_extended, opn_switches, ProgramShape, SwitchKind};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

fn main() -> Result<()> {
    let mut rng = ChaCha20Rng::seed_from_u64(2);
    println!("{:>6} {:>9}", "N", "switches");
    for n in [2usize, 4, 8, 16, 1024] {
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut rng);
        let net = benes_route(&perm)?;
        let input: Vec<usize> = (0..n).collect();
        assert_eq!(net.evaluate(&input)?, perm);
        let switches = net.network.switches.len();
        println!("{n:>6} {switches:>9}");
        assert_eq!(switches, opn_switches(n));
    }

    // Output y takes input src[y]; input 1 is copied twice, input 3 dropped.
    let ep = ExtendedPermutation::new(5, vec![4, 1, 1, 0])?;
    for tail_drop in [false, true] {
        let prog = decompose_extended(&ep, tail_drop)?;
        let out = prog.evaluate(&["a", "b", "c", "d", "e"])?;
        let shape = ProgramShape::new(5, 4, tail_drop);
        println!(
            "tail_drop={tail_drop}: {:?} via {} switches ({} replication), shape predicts {}",
            out,
            prog.network.switches.len(),
            prog.network.count(SwitchKind::Replication),
            shape.switches()
        );
    }
    Ok(())
}
