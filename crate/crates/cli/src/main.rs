use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use slp_cli::{compress_bytes, compress_ints, emit, grammar_bytes, load_grammar, parse_codes, parse_range};
use slp_core::query::MERSENNE_61;
use slp_core::scd::to_dot;
use slp_core::{
    balance, decompose, verify_equivalence, AccessIndex, Error, FingerprintIndex, Method, MultiDag, OccIndex, RmqIndex, Sslp,
    Symbol,
};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "slp", version, about = "Grammar-compressed strings: compress, balance, inspect, query")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Input {
    /// Grammar file, text or binary
    #[arg(long = "in")]
    input: PathBuf,
}

#[derive(Args)]
struct Query {
    #[command(flatten)]
    input: Input,
    /// Query the grammar as given instead of balancing it first
    #[arg(long)]
    no_balance: bool,
}

#[derive(Subcommand)]
enum Cmd {
    /// Build a grammar for a file
    Compress {
        /// Raw input file
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Input holds newline-separated integers, coded by rank
        #[arg(long)]
        ints: bool,
        /// Write the binary grammar format
        #[arg(long)]
        binary: bool,
    },
    /// Rebalance a grammar to logarithmic depth
    Balance {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        binary: bool,
        /// Fail if the output depth exceeds C log2(n) + 12
        #[arg(long, value_name = "C", default_value_t = 6.0)]
        envelope: f64,
    },
    /// Print size, depth and length, and what balancing would do
    Stats {
        #[command(flatten)]
        input: Input,
        /// Depth envelope C in C log2(n) + 12
        #[arg(long, value_name = "C", default_value_t = 6.0)]
        envelope: f64,
    },
    /// Write the derived string
    Expand {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Refuse strings longer than this
        #[arg(long, default_value_t = 1 << 30)]
        cap: u64,
        /// Print codes one per line instead of bytes
        #[arg(long)]
        ints: bool,
    },
    /// Letter at a 1-based position
    Access {
        #[command(flatten)]
        q: Query,
        #[arg(long)]
        pos: u64,
    },
    /// Occurrences of a letter among the first `pos` letters
    Rank {
        #[command(flatten)]
        q: Query,
        #[arg(long)]
        sym: u32,
        #[arg(long)]
        pos: u64,
    },
    /// Position of the `pos`-th occurrence of a letter
    Select {
        #[command(flatten)]
        q: Query,
        #[arg(long)]
        sym: u32,
        #[arg(long)]
        pos: u64,
    },
    /// Next occurrence of a letter after a position
    Succ {
        #[command(flatten)]
        q: Query,
        #[arg(long)]
        sym: u32,
        #[arg(long)]
        pos: u64,
        /// Previous occurrence instead
        #[arg(long)]
        pred: bool,
    },
    /// Minimal windows containing a pattern as a subsequence
    Subseq {
        #[command(flatten)]
        q: Query,
        /// Comma-separated codes
        #[arg(long)]
        pattern: String,
    },
    /// Karp-Rabin fingerprint of a factor
    Fp {
        #[command(flatten)]
        q: Query,
        #[arg(long, value_parser = parse_range, value_name = "I:J")]
        range: (u64, u64),
        #[arg(long, default_value_t = 257)]
        base: u64,
        /// A prime below 2^61
        #[arg(long, default_value_t = MERSENNE_61)]
        modulus: u64,
    },
    /// Leftmost minimum of a factor
    Rmq {
        /// A grammar, or with --ints a file of integers
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_parser = parse_range, value_name = "I:J")]
        range: (u64, u64),
        /// Input holds newline-separated integers
        #[arg(long)]
        ints: bool,
        #[arg(long)]
        no_balance: bool,
    },
    /// Check that two grammars derive the same string
    Verify {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        against: PathBuf,
        /// Compare expansions up to this length, fingerprints beyond
        #[arg(long, default_value_t = 1 << 26)]
        cap: u64,
    },
    /// Show the centroid paths of the grammar's normal form
    Decompose {
        #[command(flatten)]
        input: Input,
        /// Graphviz output
        #[arg(long)]
        dot: bool,
    },
}

fn prepare(q: &Query) -> Result<Sslp> {
    let g = load_grammar(&q.input.input)?;
    Ok(if q.no_balance { g } else { balance(&g)?.0 })
}

fn found(r: slp_core::Result<u64>) -> Result<String> {
    match r {
        Ok(p) => Ok(p.to_string()),
        Err(Error::NotFound) => Ok("none".into()),
        Err(e) => Err(e.into()),
    }
}

fn envelope(c: f64, n: u64) -> f64 {
    c * (n as f64).log2() + 12.0
}

fn run(cmd: Cmd) -> Result<String> {
    Ok(match cmd {
        Cmd::Compress { input, out, ints, binary } => {
            let data = std::fs::read(&input).with_context(|| format!("reading {}", input.display()))?;
            let g = if ints {
                compress_ints(std::str::from_utf8(&data).context("integer input is not UTF-8")?)?.0
            } else {
                compress_bytes(&data)?
            };
            emit(out.as_deref(), &grammar_bytes(&g, binary))?;
            String::new()
        }
        Cmd::Balance { input, out, binary, envelope: c } => {
            let (h, rep) = balance(&load_grammar(&input.input)?)?;
            let bound = envelope(c, rep.n);
            if rep.output_max_path as f64 > bound {
                bail!("output depth {} exceeds the envelope {bound:.1}", rep.output_max_path);
            }
            emit(out.as_deref(), &grammar_bytes(&h, binary))?;
            String::new()
        }
        Cmd::Stats { input, envelope: c } => {
            let g = load_grammar(&input.input)?;
            let s = g.stats()?;
            let mut o = String::new();
            writeln!(o, "variables {}", g.var_count())?;
            writeln!(o, "size {}", s.size)?;
            writeln!(o, "depth {}", s.depth)?;
            writeln!(o, "max_path {}", s.max_path)?;
            match s.length {
                Some(n) => writeln!(o, "length {n}")?,
                None => {
                    writeln!(o, "length overflow")?;
                    return Ok(o);
                }
            }
            let (_, r) = balance(&g)?;
            let bound = envelope(c, r.n);
            writeln!(o, "input_size {}", r.input_size)?;
            writeln!(o, "cnf_size {}", r.cnf_size)?;
            writeln!(o, "output_size {}", r.output_size)?;
            writeln!(o, "input_max_path {}", r.input_max_path)?;
            writeln!(o, "output_max_path {}", r.output_max_path)?;
            writeln!(o, "n {}", r.n)?;
            writeln!(o, "size_ratio {:.3}", r.size_ratio)?;
            writeln!(o, "depth_slack {:.3}", r.depth_slack)?;
            writeln!(o, "envelope {bound:.3}")?;
            writeln!(o, "within_envelope {}", if r.output_max_path as f64 <= bound { "yes" } else { "no" })?;
            o
        }
        Cmd::Expand { input, out, cap, ints } => {
            let g = load_grammar(&input.input)?;
            let s = g.expand(cap)?;
            let bytes = if ints || g.alphabet_size > 256 {
                s.iter()
                    .fold(String::new(), |mut o, c| {
                        let _ = writeln!(o, "{c}");
                        o
                    })
                    .into_bytes()
            } else {
                s.iter().map(|&c| c as u8).collect()
            };
            emit(out.as_deref(), &bytes)?;
            String::new()
        }
        Cmd::Access { q, pos } => format!("{}\n", AccessIndex::new(&prepare(&q)?)?.access(pos)?),
        Cmd::Rank { q, sym, pos } => {
            format!("{}\n", OccIndex::with_counts(&prepare(&q)?, &[sym])?.rank(sym, pos)?)
        }
        Cmd::Select { q, sym, pos } => {
            format!("{}\n", found(OccIndex::with_counts(&prepare(&q)?, &[sym])?.select(sym, pos))?)
        }
        Cmd::Succ { q, sym, pos, pred } => {
            let ix = OccIndex::new(&prepare(&q)?)?;
            let r = if pred { ix.predecessor(pos, sym) } else { ix.successor(pos, sym) };
            format!("{}\n", found(r)?)
        }
        Cmd::Subseq { q, pattern } => {
            let pattern = parse_codes(&pattern).map_err(anyhow::Error::msg)?;
            let occ = OccIndex::new(&prepare(&q)?)?.minimal_subsequence_occurrences(&pattern)?;
            occ.iter().fold(String::new(), |mut o, (i, j)| {
                let _ = writeln!(o, "{i} {j}");
                o
            })
        }
        Cmd::Fp { q, range: (i, j), base, modulus } => {
            format!("{}\n", FingerprintIndex::with_modulus(&prepare(&q)?, base, modulus)?.fingerprint(i, j)?)
        }
        Cmd::Rmq { input, range: (i, j), ints, no_balance } => {
            let (g, values) = if ints {
                let src = std::fs::read_to_string(&input).with_context(|| format!("reading {}", input.display()))?;
                compress_ints(&src)?
            } else {
                let g = load_grammar(&input)?;
                let v = (0..i64::from(g.alphabet_size)).collect();
                (g, v)
            };
            let g = if no_balance { g } else { balance(&g)?.0 };
            let (p, v) = RmqIndex::new(&g, values)?.rmq(i, j)?;
            format!("{p} {v}\n")
        }
        Cmd::Verify { input, against, cap } => {
            let eq = verify_equivalence(&load_grammar(&input.input)?, &load_grammar(&against)?, cap)?;
            let how = match eq.method {
                Method::Exact => "exact",
                Method::Fingerprint => "fingerprint",
            };
            format!("{} ({how})\n", if eq.equal { "equal" } else { "different" })
        }
        Cmd::Decompose { input, dot } => decomposition(&load_grammar(&input.input)?, dot)?,
    })
}

fn decomposition(g: &Sslp, dot: bool) -> Result<String> {
    let cnf = g.to_cnf()?;
    let edges = cnf
        .rules
        .iter()
        .map(|r| r.iter().filter_map(|s| if let Symbol::Variable(y) = *s { Some(y) } else { None }).collect())
        .collect();
    let d = MultiDag::new(edges, cnf.start)?;
    let r = decompose(&d)?;
    if dot {
        return Ok(to_dot(&d, &r, |v| format!("v{v}")));
    }
    let mut o = String::new();
    writeln!(o, "nodes {}", d.node_count())?;
    writeln!(o, "paths {}", r.paths.len())?;
    writeln!(o, "decomposition_edges {}", r.scd_edges().len())?;
    for p in r.paths.iter().filter(|p| !p.is_empty()) {
        let (a, b) = r.labels[p.nodes[0] as usize];
        let nodes: Vec<String> = p.nodes.iter().map(|v| format!("v{v}")).collect();
        writeln!(o, "path ({a},{b}) {}", nodes.join(" "))?;
    }
    Ok(o)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.cmd) {
        Ok(out) => {
            if !out.is_empty() {
                let _ = emit(None::<&Path>, out.as_bytes());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("slp: {e:#}");
            ExitCode::from(1)
        }
    }
}
