//! Weight calibration and the secret-shared linear score on a synthetic pair.

use pprs::engine::synth::{balanced_accuracy, gen_synthetic, SynthSpec};
use pprs::engine::{plaintext_oracle, run_local, Role, RunConfig};
use pprs::error::Result;
use pprs::score::{calibrate_weights, CalibrationStats, SumMode};

fn main() -> Result<()> {
    let stats = CalibrationStats::new(vec![0.95, 0.9, 0.97, 0.9], vec![0.01, 0.02, 0.05, 0.1]);
    let w = [2.0, 2.0, 1.5, 1.0];
    let cal = calibrate_weights(&stats, &w, SumMode::Linear)?;
    println!("E[match] = {:.3}  E[non-match] = {:.3}  threshold = {:.3}", cal.e1, cal.e2, cal.t);

    let data = gen_synthetic(&SynthSpec { n: 500, typo_rate: 0.1, missing_rate: 0.05, overlap: 0.5, seed: 8, ..Default::default() })?;
    let text = format!(
        "schema = aware\nattributes = f:first_name; l:last_name; b:birth_date; z:zip\nmodel = linear\n\
         weights_matched = 2,2,1.5,1\nweights_unmatched = -1,-1,-1,-0.5\nweights_missing = 0,0,0,0\n\
         score_threshold = {}\not_mode = extended",
        cal.t
    );
    let req = RunConfig::parse(&text)?;
    let cand = RunConfig { role: Role::Candidate, weights: None, ..req.clone() };
    let (o0, _) = run_local(&req, &cand, &data.left, &data.right)?;
    let oracle = plaintext_oracle(&data.left, &data.right, &req, &o0.salt)?;
    println!("secure c = {}  oracle c = {}  true links = {}", o0.c, oracle.c, data.links.len());
    println!("balanced accuracy = {:.3}", balanced_accuracy(&oracle.decisions, &data.linked_left()));
    Ok(())
}
