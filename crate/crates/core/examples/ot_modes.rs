//! Chosen-message OT under each randomness mode, with traffic per mode.

use pprs::bits::Bits;
use pprs::error::Result;
use pprs::ot::{self, OtMode};
use pprs::session::{run_pair, SessionConfig};
use pprs::transport::Phase;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

fn main() -> Result<()> {
    let count = 10_000;
    let mut rng = ChaCha20Rng::seed_from_u64(1);
    let msgs: Vec<(u128, u128)> = (0..count).map(|_| (rng.gen::<u64>() as u128, rng.gen::<u64>() as u128)).collect();
    let choices = Bits::random(&mut rng, count);
    println!("{:<9} {:>12} {:>12} {:>8}", "mode", "setup bytes", "online bytes", "ok");
    for mode in [OtMode::Dealer, OtMode::Extended, OtMode::Base] {
        let n = if mode == OtMode::Base { 200 } else { count };
        let (m, c) = (msgs[..n].to_vec(), choices.slice(0, n));
        let ((), (got, counters)) = run_pair(
            &SessionConfig::new(mode, 3),
            move |s| ot::send(s, &m, 64),
            move |s| Ok((ot::receive(s, &c, 64)?, s.counters())),
        )?;
        let ok = (0..n).all(|i| got[i] == if choices.get(i) { msgs[i].1 } else { msgs[i].0 });
        let setup = counters.phase(Phase::OtSetup).total_bytes();
        let online = counters.total().total_bytes() - setup - counters.phase(Phase::Handshake).total_bytes();
        println!("{:<9} {:>12} {:>12} {:>8}  ({n} OTs)", mode.name(), setup, online, ok);
    }
    Ok(())
}
