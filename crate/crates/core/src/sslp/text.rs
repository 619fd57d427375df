use super::{Sslp, Symbol};
use crate::error::{Error, Result};
use std::fmt::Write;

pub fn write_text(g: &Sslp) -> String {
    let mut s = String::new();
    writeln!(s, "SSLP 1").unwrap();
    writeln!(s, "alphabet {}", g.alphabet_size).unwrap();
    writeln!(s, "vars {}", g.rules.len()).unwrap();
    writeln!(s, "start {}", g.start).unwrap();
    for (x, rhs) in g.rules.iter().enumerate() {
        write!(s, "rule {x}").unwrap();
        for sym in rhs {
            match sym {
                Symbol::Terminal(a) => write!(s, " t{a}").unwrap(),
                Symbol::Variable(y) => write!(s, " v{y}").unwrap(),
            }
        }
        s.push('\n');
    }
    s
}

pub(crate) fn perr(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

/// Splits into lines, requiring LF endings; a missing final newline is tolerated.
pub(crate) fn lines(src: &str) -> Result<Vec<&str>> {
    if src.contains('\r') {
        return Err(perr(0, "carriage return in input"));
    }
    let mut v: Vec<&str> = src.split('\n').collect();
    if v.last() == Some(&"") {
        v.pop();
    }
    Ok(v)
}

/// Parses a decimal number without sign, leading `+` or superfluous leading zeros.
pub(crate) fn num<T: std::str::FromStr>(tok: &str, line: usize) -> Result<T> {
    let ok = !tok.is_empty() && tok.bytes().all(|b| b.is_ascii_digit()) && (tok == "0" || !tok.starts_with('0'));
    if !ok {
        return Err(perr(line, format!("bad number `{tok}`")));
    }
    tok.parse().map_err(|_| perr(line, format!("number out of range `{tok}`")))
}

pub(crate) fn keyed<T: std::str::FromStr>(lines: &[&str], i: usize, key: &str) -> Result<T> {
    let l = lines.get(i).ok_or_else(|| perr(i + 1, format!("missing `{key}` line")))?;
    let rest =
        l.strip_prefix(key).and_then(|r| r.strip_prefix(' ')).ok_or_else(|| perr(i + 1, format!("expected `{key} <n>`")))?;
    num(rest, i + 1)
}

pub fn parse_text(src: &str) -> Result<Sslp> {
    let ls = lines(src)?;
    if ls.first() != Some(&"SSLP 1") {
        return Err(perr(1, "expected header `SSLP 1`"));
    }
    let alphabet_size: u32 = keyed(&ls, 1, "alphabet")?;
    let vars: usize = keyed(&ls, 2, "vars")?;
    let start: u32 = keyed(&ls, 3, "start")?;
    if ls.len() != 4 + vars {
        return Err(perr(ls.len().min(4 + vars) + 1, format!("expected exactly {vars} rule lines")));
    }
    let mut rules = Vec::with_capacity(vars);
    for (x, l) in ls[4..].iter().enumerate() {
        let lno = x + 5;
        let mut toks = l.split(' ');
        if toks.next() != Some("rule") {
            return Err(perr(lno, "expected `rule`"));
        }
        let id: usize = num(toks.next().unwrap_or(""), lno)?;
        if id != x {
            return Err(perr(lno, format!("rule {id} out of order, expected {x}")));
        }
        let mut rhs = Vec::new();
        for t in toks {
            let sym = if let Some(c) = t.strip_prefix('t') {
                Symbol::Terminal(num(c, lno)?)
            } else if let Some(v) = t.strip_prefix('v') {
                Symbol::Variable(num(v, lno)?)
            } else {
                return Err(perr(lno, format!("bad symbol `{t}`")));
            };
            rhs.push(sym);
        }
        rules.push(rhs);
    }
    let g = Sslp { alphabet_size, rules, start };
    g.validate()?;
    Ok(g)
}
