//! Reading and writing grammars and inputs for the `slp` tool.

pub mod repair;

use anyhow::{bail, Context, Result};
use slp_core::sslp::{from_binary, parse_text, to_binary, write_text, BINARY_MAGIC};
use slp_core::Sslp;
use std::fs;
use std::io::Write;
use std::path::Path;

/// Loads a grammar in either format, telling them apart by the magic bytes.
pub fn load_grammar(path: &Path) -> Result<Sslp> {
    let buf = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    let g = if buf.starts_with(BINARY_MAGIC) {
        from_binary(&buf)?
    } else {
        let s = std::str::from_utf8(&buf).with_context(|| format!("{} is neither binary nor UTF-8", path.display()))?;
        parse_text(s)?
    };
    g.validate()?;
    Ok(g)
}

pub fn grammar_bytes(g: &Sslp, binary: bool) -> Vec<u8> {
    if binary {
        to_binary(g)
    } else {
        write_text(g).into_bytes()
    }
}

/// Writes to `out`, or to standard output when absent.
pub fn emit(out: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match out {
        Some(p) => fs::write(p, bytes).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut o = std::io::stdout().lock();
            o.write_all(bytes)?;
            o.flush()?;
            Ok(())
        }
    }
}

/// Newline-separated decimal integers, mapped to codes by rank among the
/// distinct values. Returns the codes and the value of each code.
pub fn parse_ints(src: &str) -> Result<(Vec<u32>, Vec<i64>)> {
    let mut vals = Vec::new();
    for (i, l) in src.lines().enumerate() {
        let l = l.trim();
        if l.is_empty() {
            continue;
        }
        vals.push(l.parse::<i64>().with_context(|| format!("line {}: `{l}` is not an integer", i + 1))?);
    }
    if vals.is_empty() {
        bail!("no integers in input");
    }
    let mut table = vals.clone();
    table.sort_unstable();
    table.dedup();
    let codes = vals.iter().map(|v| table.binary_search(v).unwrap() as u32).collect();
    Ok((codes, table))
}

/// Compresses a raw file: bytes become codes `0..256`.
pub fn compress_bytes(data: &[u8]) -> Result<Sslp> {
    if data.is_empty() {
        bail!(slp_core::Error::EmptyInput);
    }
    let codes: Vec<u32> = data.iter().map(|&b| u32::from(b)).collect();
    Ok(repair::compress(&codes, 256))
}

/// Compresses newline-separated integers; see [`parse_ints`].
pub fn compress_ints(src: &str) -> Result<(Sslp, Vec<i64>)> {
    let (codes, table) = parse_ints(src)?;
    Ok((repair::compress(&codes, table.len() as u32), table))
}

/// `i:j` with `1 <= i <= j`.
pub fn parse_range(s: &str) -> std::result::Result<(u64, u64), String> {
    let (a, b) = s.split_once(':').ok_or("expected i:j")?;
    let i: u64 = a.trim().parse().map_err(|_| format!("bad start `{a}`"))?;
    let j: u64 = b.trim().parse().map_err(|_| format!("bad end `{b}`"))?;
    if i == 0 || i > j {
        return Err(format!("need 1 <= i <= j, got {i}:{j}"));
    }
    Ok((i, j))
}

/// Comma-separated codes, e.g. `97,98`.
pub fn parse_codes(s: &str) -> std::result::Result<Vec<u32>, String> {
    let v: Vec<u32> = s
        .split(',')
        .map(|t| t.trim().parse::<u32>().map_err(|_| format!("bad code `{t}`")))
        .collect::<std::result::Result<_, _>>()?;
    if v.is_empty() {
        return Err("empty pattern".into());
    }
    Ok(v)
}
