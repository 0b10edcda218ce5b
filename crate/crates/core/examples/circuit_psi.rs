//! One circuit-PSI instance: shared membership bits per bin, aligned back to records.

use pprs::binning::BinningParams;
use pprs::cpsi::cpsi_attribute;
use pprs::error::Result;
use pprs::ot::OtMode;
use pprs::session::{run_pair, SessionConfig};
use pprs::shares::reconstruct_bool;

fn column(words: &[&str]) -> Vec<Option<Vec<u8>>> {
    words.iter().map(|w| (!w.is_empty()).then(|| w.as_bytes().to_vec())).collect()
}

fn main() -> Result<()> {
    let left = column(&["ann", "bob", "", "dee", "bob", "eve"]);
    let right = column(&["eve", "zed", "bob", "kim"]);
    let params = BinningParams::default();
    let (p0, p1) = run_pair(
        &SessionConfig::new(OtMode::Extended, 5),
        |s| cpsi_attribute(s, &left, 0, &params),
        |s| cpsi_attribute(s, &right, 0, &params),
    )?;
    let bins = reconstruct_bool(&p0.membership, &p1.membership)?;
    let ep = p0.perm.expect("receiver holds the map");
    let per_record = ep.apply(&bins.to_bools());
    println!("bins={} beta={} retries={}", p0.bins, p0.beta, p0.retries);
    for (v, hit) in left.iter().zip(per_record) {
        let name = v.as_deref().map_or("<missing>".into(), |b| String::from_utf8_lossy(b).into_owned());
        println!("{name:<10} in right: {hit}");
    }
    Ok(())
}
