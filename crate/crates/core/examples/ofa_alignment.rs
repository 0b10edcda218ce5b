//! Oblivious feature alignment: bin-ordered boolean shares become record-ordered.

use pprs::binning::ExtendedPermutation;
use pprs::bits::Bits;
use pprs::error::Result;
use pprs::ofa::{comm_report, ofa_execute, OfaOptions};
use pprs::ot::OtMode;
use pprs::session::{run_pair, Party, SessionConfig};
use pprs::shares::{reconstruct_bool, BoolShare};
use pprs::transport::Phase;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

fn main() -> Result<()> {
    let mut rng = ChaCha20Rng::seed_from_u64(4);
    let x = Bits::from_bools(&[true, false, true, true, false, false, true, false]);
    let ep = ExtendedPermutation::new(8, vec![6, 0, 3, 3, 1])?;
    let a = Bits::random(&mut rng, x.len());
    let b = a.xor(&x);
    let ep0 = ep.clone();
    let ((y0, report), y1) = run_pair(
        &SessionConfig::new(OtMode::Extended, 4),
        move |s| {
            let y = ofa_execute(s, &BoolShare::new(Party::P0, a), Some(&ep0), OfaOptions::ALL)?;
            Ok((y, comm_report(s)?))
        },
        move |s| ofa_execute(s, &BoolShare::new(Party::P1, b), None, OfaOptions::ALL),
    )?;
    let y = reconstruct_bool(&y0, &y1)?;
    println!("bins     {:?}", x.to_bools());
    println!("src      {:?}", ep.src);
    println!("records  {:?}", y.to_bools());
    assert_eq!(y.to_bools(), ep.apply(&x.to_bools()));
    let r = report.phase(Phase::Ofa);
    println!("alignment: {} bytes, {} OTs, {} rounds", r.counters.total_bytes(), r.ots, r.counters.rounds);
    Ok(())
}
