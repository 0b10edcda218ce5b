//! Plain-text reports: `[section]` headers followed by `key = value` lines.

use super::screening::{CandidateStatus, ScreeningReport};
use super::ScreeningOutcome;
use crate::transport::Phase;
use std::fmt::Write;

fn kv(out: &mut String, k: &str, v: impl std::fmt::Display) {
    let _ = writeln!(out, "{k} = {v}");
}

/// Key-value lines describing one run, without a section header.
pub fn outcome_lines(out: &mut String, o: &ScreeningOutcome) {
    kv(out, "c", o.c);
    kv(out, "salt", o.salt.iter().map(|b| format!("{b:02x}")).collect::<String>());
    kv(out, "seconds", format!("{:.6}", o.seconds));
    let total = o.counters.total();
    kv(out, "bytes.total", total.total_bytes());
    kv(out, "rounds.total", total.rounds);
    for p in Phase::ALL {
        let c = o.counters.phase(p);
        if c.frames_sent + c.frames_recv == 0 {
            continue;
        }
        kv(out, &format!("bytes.{}.sent", p.name()), c.bytes_sent);
        kv(out, &format!("bytes.{}.recv", p.name()), c.bytes_recv);
        kv(out, &format!("rounds.{}", p.name()), c.rounds);
    }
    for (p, n) in &o.ot_counts {
        kv(out, &format!("ots.{}", p.name()), n);
    }
    let betas: Vec<String> = o.columns.iter().map(|c| c.beta.to_string()).collect();
    kv(out, "columns", o.columns.len());
    kv(out, "leak.beta", betas.join(","));
    if let Some(d) = &o.decisions {
        kv(out, "decisions", d.iter().map(|&b| if b { '1' } else { '0' }).collect::<String>());
    }
}

pub fn outcome_block(name: &str, o: &ScreeningOutcome) -> String {
    let mut out = String::from("[run]\n");
    kv(&mut out, "name", name);
    outcome_lines(&mut out, o);
    out
}

pub fn screening_text(r: &ScreeningReport) -> String {
    let s = &r.summary;
    let mut out = String::from("[summary]\n");
    kv(&mut out, "candidates", s.total);
    kv(&mut out, "threshold", r.threshold);
    kv(&mut out, "passed", s.passed);
    kv(&mut out, "alpha", s.alpha);
    kv(&mut out, "t_pprs_seconds", s.t_pprs);
    if let Some(t) = s.t_pprl {
        kv(&mut out, "t_pprl_seconds", t);
    }
    if let Some(g) = s.gamma {
        kv(&mut out, "gamma", g);
    }
    for c in &r.candidates {
        out.push_str("\n[candidate]\n");
        kv(&mut out, "name", &c.name);
        match &c.status {
            CandidateStatus::Passed => kv(&mut out, "status", "passed"),
            CandidateStatus::Below => kv(&mut out, "status", "below"),
            CandidateStatus::Errored(e) => {
                kv(&mut out, "status", "error");
                kv(&mut out, "error", e);
            }
        }
        kv(&mut out, "screen_seconds", format!("{:.6}", c.screen_seconds));
        if let Some(t) = c.pprl_seconds {
            kv(&mut out, "pprl_seconds", format!("{t:.6}"));
        }
        if let Some(l) = &c.links {
            kv(&mut out, "links", l.len());
        }
        if let Some(o) = &c.outcome {
            outcome_lines(&mut out, o);
        }
    }
    out
}

/// Inverse of the `salt` report line.
pub fn parse_salt(hex: &str) -> Option<[u8; 32]> {
    let hex = hex.trim();
    if hex.len() != 64 || !hex.is_ascii() {
        return None;
    }
    let mut out = [0u8; 32];
    for (i, b) in out.iter_mut().enumerate() {
        *b = u8::from_str_radix(&hex[2 * i..2 * i + 2], 16).ok()?;
    }
    Some(out)
}

/// Parses `[section]` blocks back into ordered key-value lists.
pub fn parse_blocks(text: &str) -> Vec<(String, Vec<(String, String)>)> {
    let mut out: Vec<(String, Vec<(String, String)>)> = Vec::new();
    for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            out.push((name.to_string(), Vec::new()));
        } else if let (Some((k, v)), Some(last)) = (line.split_once('='), out.last_mut()) {
            last.1.push((k.trim().to_string(), v.trim().to_string()));
        }
    }
    out
}
