use super::gslp::GammaSlp;
use super::signature::Signature;
use super::term::Term;
use crate::error::Result;
use crate::sslp::text::{keyed, lines, num, perr};
use std::fmt::Write;
use std::sync::Arc;

fn write_term(t: &Term<u32>, s: &mut String) {
    match t {
        Term::Leaf(y) => write!(s, "v{y}").unwrap(),
        Term::App(f, args) => {
            write!(s, "s{f}").unwrap();
            if !args.is_empty() {
                s.push('(');
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        s.push_str(", ");
                    }
                    write_term(a, s);
                }
                s.push(')');
            }
        }
    }
}

pub(crate) fn write_body(g: &GammaSlp, s: &mut String) {
    let sig = &g.signature;
    writeln!(s, "sorts {}", sig.sort_count).unwrap();
    writeln!(s, "symbols {}", sig.symbol_count()).unwrap();
    for (f, t) in sig.types.iter().enumerate() {
        write!(s, "sym {f}").unwrap();
        for p in t {
            write!(s, " {p}").unwrap();
        }
        s.push('\n');
    }
    writeln!(s, "vars {}", g.rules.len()).unwrap();
    writeln!(s, "start {}", g.start).unwrap();
    for (x, r) in g.rules.iter().enumerate() {
        write!(s, "rule {x} ").unwrap();
        write_term(r, s);
        s.push('\n');
    }
}

pub fn write_gslp(g: &GammaSlp) -> String {
    let mut s = String::from("GSLP 1\n");
    write_body(g, &mut s);
    s
}

struct TermParser<'a> {
    src: &'a [u8],
    pos: usize,
    line: usize,
}

impl TermParser<'_> {
    fn number(&mut self) -> Result<u32> {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        num(std::str::from_utf8(&self.src[start..self.pos]).unwrap(), self.line)
    }

    fn eat(&mut self, s: &str) -> bool {
        if self.src[self.pos..].starts_with(s.as_bytes()) {
            self.pos += s.len();
            true
        } else {
            false
        }
    }

    fn term(&mut self, depth: usize) -> Result<Term<u32>> {
        if depth > 10_000 {
            return Err(perr(self.line, "term nested too deeply"));
        }
        if self.eat("v") {
            return Ok(Term::Leaf(self.number()?));
        }
        if !self.eat("s") {
            return Err(perr(self.line, format!("expected `s` or `v` at column {}", self.pos + 1)));
        }
        let f = self.number()?;
        let mut args = Vec::new();
        if self.eat("(") {
            loop {
                args.push(self.term(depth + 1)?);
                if self.eat(")") {
                    break;
                }
                if !self.eat(", ") {
                    return Err(perr(self.line, format!("expected `, ` or `)` at column {}", self.pos + 1)));
                }
            }
        }
        Ok(Term::App(f, args))
    }
}

pub(crate) fn parse_term(src: &str, line: usize) -> Result<Term<u32>> {
    let mut p = TermParser { src: src.as_bytes(), pos: 0, line };
    let t = p.term(0)?;
    if p.pos != src.len() {
        return Err(perr(line, format!("trailing input at column {}", p.pos + 1)));
    }
    Ok(t)
}

/// Parses the body starting at line index `at`, with symbol names taken from `names`.
pub(crate) fn parse_body(ls: &[&str], at: usize, names: Option<Vec<String>>) -> Result<GammaSlp> {
    let sorts: u32 = keyed(ls, at, "sorts")?;
    let symbols: usize = keyed(ls, at + 1, "symbols")?;
    let mut types = Vec::with_capacity(symbols);
    let mut i = at + 2;
    for f in 0..symbols {
        let l = ls.get(i).ok_or_else(|| perr(i + 1, "missing `sym` line"))?;
        let mut toks = l.split(' ');
        if toks.next() != Some("sym") || num::<usize>(toks.next().unwrap_or(""), i + 1)? != f {
            return Err(perr(i + 1, format!("expected `sym {f} ...`")));
        }
        types.push(toks.map(|t| num(t, i + 1)).collect::<Result<Vec<u32>>>()?);
        i += 1;
    }
    let names = names.unwrap_or_else(|| (0..symbols).map(|f| format!("f{f}")).collect());
    let sig = Signature::new(sorts, types, names).map_err(|e| perr(at + 1, e.to_string()))?;
    let vars: usize = keyed(ls, i, "vars")?;
    let start: u32 = keyed(ls, i + 1, "start")?;
    i += 2;
    if ls.len() != i + vars {
        return Err(perr(ls.len().min(i + vars) + 1, format!("expected exactly {vars} rule lines")));
    }
    let mut rules = Vec::with_capacity(vars);
    for (x, l) in ls[i..].iter().enumerate() {
        let lno = i + x + 1;
        let rest = l.strip_prefix("rule ").ok_or_else(|| perr(lno, "expected `rule`"))?;
        let (id, term) = rest.split_once(' ').ok_or_else(|| perr(lno, "expected `rule <id> <term>`"))?;
        if num::<usize>(id, lno)? != x {
            return Err(perr(lno, format!("rule {id} out of order, expected {x}")));
        }
        rules.push(parse_term(term, lno)?);
    }
    GammaSlp::infer(Arc::new(sig), rules, start)
}

pub fn parse_gslp(src: &str) -> Result<GammaSlp> {
    let ls = lines(src)?;
    if ls.first() != Some(&"GSLP 1") {
        return Err(perr(1, "expected header `GSLP 1`"));
    }
    parse_body(&ls, 1, None)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let src = "GSLP 1\nsorts 1\nsymbols 3\nsym 0 0 0 0\nsym 1 0 0\nsym 2 0\nvars 3\nstart 2\nrule 0 s2\nrule 1 s1(v0)\nrule 2 s0(v1, s1(v0))\n";
        let g = parse_gslp(src).unwrap();
        assert_eq!(write_gslp(&g), src);
        assert_eq!(g.unfolded_size().unwrap(), 5);
    }

    #[test]
    fn rejects_garbage() {
        for bad in [
            "",
            "GSLP 2\n",
            "GSLP 1\nsorts 1\nsymbols 1\nsym 0 0\nvars 1\nstart 0\nrule 0 s0(\n",
            "GSLP 1\nsorts 1\nsymbols 1\nsym 0 0\nvars 1\nstart 0\nrule 0 s0 \n",
            "GSLP 1\nsorts 1\nsymbols 1\nsym 0 0\nvars 1\nstart 0\nrule 0 s1\n",
            "GSLP 1\nsorts 1\nsymbols 1\nsym 0 1\nvars 1\nstart 0\nrule 0 s0\n",
            "GSLP 1\nsorts 1\nsymbols 1\nsym 0 0 0\nvars 1\nstart 0\nrule 0 s0(v0)\n",
        ] {
            assert!(parse_gslp(bad).is_err(), "{bad:?}");
        }
    }
}
