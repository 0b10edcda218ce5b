use clap::{Parser, Subcommand};
use pprs::engine::bench::{bench_alignment, write_csv as write_bench_csv, Variant};
use pprs::engine::data::{read_csv, write_csv};
use pprs::engine::report::{outcome_block, parse_salt, screening_text};
use pprs::engine::synth::{gen_synthetic, SynthSpec};
use pprs::engine::{
    plaintext_oracle, screen_then_link, serve_candidate, Connector, NoLinkage, Role, RunConfig, TcpConnector,
};
use pprs::error::{Error, Result};
use pprs::ot::OtMode;
use std::net::TcpListener;
use std::path::PathBuf;
use std::time::Duration;

#[derive(Parser)]
#[command(name = "pprs", version, about = "Two-party record screening")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one party of a screening session over TCP.
    Screen {
        #[arg(long)]
        config: PathBuf,
        /// Overrides `role`.
        #[arg(long)]
        role: Option<String>,
        /// Candidate: address to listen on.
        #[arg(long)]
        listen: Option<String>,
        /// Requester: candidate address; repeatable, overrides `candidates`.
        #[arg(long = "connect")]
        connect: Vec<String>,
        /// Overrides `data`.
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// Candidate: requesters to serve before exiting.
        #[arg(long, default_value_t = 1)]
        sessions: usize,
        /// Write the report here instead of stdout.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Evaluate the screening function in the clear.
    Oracle {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        left: PathBuf,
        #[arg(long)]
        right: PathBuf,
        /// 64 hex digits, as printed in a run report.
        #[arg(long)]
        salt: Option<String>,
        /// Print per-record decisions.
        #[arg(long)]
        decisions: bool,
    },
    /// Generate a synthetic pair of tables with ground truth.
    Gen {
        #[arg(long, default_value_t = 1000)]
        n: usize,
        #[arg(long, default_value_t = 0.0)]
        typo_rate: f64,
        #[arg(long, default_value_t = 0.0)]
        duplicate_rate: f64,
        #[arg(long, default_value_t = 0.0)]
        missing_rate: f64,
        #[arg(long, default_value_t = 0.5)]
        overlap: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Receives left.csv, right.csv and links.csv.
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Measure alignment bytes, OTs and time per variant as CSV.
    BenchOfa {
        #[arg(long, value_delimiter = ',', default_value = "1000")]
        n: Vec<usize>,
        #[arg(long, default_value_t = 0.27)]
        eps: f64,
        #[arg(long, value_delimiter = ',', default_value = "oep,opt1,opt1+2,ofa")]
        variants: Vec<String>,
        #[arg(long, default_value = "extended")]
        ot_mode: String,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn emit(path: Option<&PathBuf>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.cmd {
        Cmd::Screen { config, role, listen, connect, data, seed, sessions, report } => {
            let mut cfg = RunConfig::load(&config)?;
            if let Some(r) = role {
                cfg.role = Role::parse(&r)?;
            }
            cfg.listen = listen.or(cfg.listen);
            if !connect.is_empty() {
                cfg.candidates = connect;
            }
            cfg.data = data.or(cfg.data);
            cfg.seed = seed.or(cfg.seed);
            let path = cfg.data.clone().ok_or_else(|| Error::Config("no data file".into()))?;
            let table = read_csv(&path)?;
            let text = match cfg.role {
                Role::Requester => {
                    let timeout = Duration::from_secs(cfg.timeout_secs);
                    let conns: Vec<Box<dyn Connector>> = cfg
                        .candidates
                        .iter()
                        .map(|a| Box::new(TcpConnector { addr: a.clone(), timeout }) as Box<dyn Connector>)
                        .collect();
                    if conns.is_empty() {
                        return Err(Error::Config("requester needs at least one candidate".into()));
                    }
                    screening_text(&screen_then_link(&cfg, &table, &conns, &mut NoLinkage::default()))
                }
                Role::Candidate => {
                    let addr = cfg.listen.clone().ok_or_else(|| Error::Config("candidate needs listen".into()))?;
                    let listener = TcpListener::bind(&addr)?;
                    serve_candidate(&cfg, &table, &listener, sessions)?
                        .iter()
                        .enumerate()
                        .map(|(i, o)| outcome_block(&format!("session-{i}"), o))
                        .collect::<Vec<_>>()
                        .join("\n")
                }
            };
            emit(report.as_ref(), &text)
        }
        Cmd::Oracle { config, left, right, salt, decisions } => {
            let cfg = RunConfig::load(&config)?;
            let salt = match salt {
                Some(h) => parse_salt(&h).ok_or_else(|| Error::Config("salt must be 64 hex digits".into()))?,
                None => [0; 32],
            };
            let o = plaintext_oracle(&read_csv(&left)?, &read_csv(&right)?, &cfg, &salt)?;
            println!("c = {}", o.c);
            if decisions {
                let d: String = o.decisions.iter().map(|&b| if b { '1' } else { '0' }).collect();
                println!("decisions = {d}");
            }
            Ok(())
        }
        Cmd::Gen { n, typo_rate, duplicate_rate, missing_rate, overlap, seed, out_dir } => {
            let d = gen_synthetic(&SynthSpec { n, typo_rate, duplicate_rate, missing_rate, overlap, seed })?;
            std::fs::create_dir_all(&out_dir)?;
            write_csv(&out_dir.join("left.csv"), &d.left)?;
            write_csv(&out_dir.join("right.csv"), &d.right)?;
            let mut w = csv::Writer::from_path(out_dir.join("links.csv"))?;
            w.write_record(["left", "right"])?;
            for (i, j) in &d.links {
                w.write_record([i.to_string(), j.to_string()])?;
            }
            w.flush()?;
            println!("left = {}\nright = {}\nlinks = {}", d.left.n(), d.right.n(), d.links.len());
            Ok(())
        }
        Cmd::BenchOfa { n, eps, variants, ot_mode, seed, out } => {
            let mode = OtMode::parse(&ot_mode)?;
            let variants: Vec<Variant> = variants.iter().map(|v| Variant::parse(v)).collect::<Result<_>>()?;
            let mut rows = Vec::new();
            for &size in &n {
                for &v in &variants {
                    rows.push(bench_alignment(size, eps, v, mode, seed)?);
                }
            }
            let mut buf = Vec::new();
            write_bench_csv(&mut buf, &rows)?;
            emit(out.as_ref(), &String::from_utf8_lossy(&buf))
        }
    }
}

fn main() {
    if let Err(e) = run(Cli::parse()) {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
