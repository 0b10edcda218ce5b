//! Secret-shared AND/OR, multiplexers and comparison between two local parties.

use pprs::bits::Bits;
use pprs::error::Result;
use pprs::ot::OtMode;
use pprs::session::{run_pair, Party, Session, SessionConfig};
use pprs::shares::{
    and_batch, msb_batch, mux_batch, or_batch, reconstruct_arith, reconstruct_bool, share_arith, share_bool, ArithShare,
    BoolShare, Ring,
};

type Outputs = (BoolShare, BoolShare, ArithShare, BoolShare);

/// P0 owns `x`, the weights and the signed values; P1 owns `y`.
fn gates(s: &mut Session, x: Option<&Bits>, y: Option<&Bits>, w: Option<&[u64]>, v: Option<&[u64]>, ring: Ring) -> Result<Outputs> {
    let a = share_bool(s, Party::P0, x, 4)?;
    let b = share_bool(s, Party::P1, y, 4)?;
    let w = share_arith(s, Party::P0, w, 4, ring)?;
    let v = share_arith(s, Party::P0, v, 4, ring)?;
    Ok((and_batch(s, &a, &b)?, or_batch(s, &a, &b)?, mux_batch(s, &w, &b)?, msb_batch(s, &v)?))
}

fn main() -> Result<()> {
    let x = Bits::from_bools(&[false, false, true, true]);
    let y = Bits::from_bools(&[false, true, false, true]);
    let ring = Ring::new(16)?;
    let weights = [5u64, 7, 11, 13];
    let signed: Vec<u64> = [-3i64, 0, 4, -1].iter().map(|&v| ring.from_i64(v)).collect();

    let (r0, r1) = run_pair(
        &SessionConfig::new(OtMode::Extended, 7),
        |s| gates(s, Some(&x), None, Some(&weights), Some(&signed), ring),
        |s| gates(s, None, Some(&y), None, None, ring),
    )?;
    println!("x         = {:?}", x.to_bools());
    println!("y         = {:?}", y.to_bools());
    println!("x AND y   = {:?}", reconstruct_bool(&r0.0, &r1.0)?.to_bools());
    println!("x OR y    = {:?}", reconstruct_bool(&r0.1, &r1.1)?.to_bools());
    println!("y ? w : 0 = {:?}", reconstruct_arith(&r0.2, &r1.2)?);
    println!("v < 0     = {:?}  (v = [-3, 0, 4, -1])", reconstruct_bool(&r0.3, &r1.3)?.to_bools());
    Ok(())
}
