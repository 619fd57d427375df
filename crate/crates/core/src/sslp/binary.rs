use super::{Sslp, Symbol};
use crate::error::{Error, Result};

pub const BINARY_MAGIC: &[u8; 4] = b"SLPB";
const VERSION: u8 = 1;

fn put(out: &mut Vec<u8>, mut v: u64) {
    while v >= 0x80 {
        out.push((v as u8) | 0x80);
        v >>= 7;
    }
    out.push(v as u8);
}

/// Layout: magic, version byte, then LEB128 varints: alphabet, vars, start, and per
/// rule its length followed by symbols encoded as `code << 1` (terminal) or `id << 1 | 1`.
pub fn to_binary(g: &Sslp) -> Vec<u8> {
    let mut out = Vec::with_capacity(16 + 2 * g.size() as usize);
    out.extend_from_slice(BINARY_MAGIC);
    out.push(VERSION);
    put(&mut out, g.alphabet_size as u64);
    put(&mut out, g.rules.len() as u64);
    put(&mut out, g.start as u64);
    for rhs in &g.rules {
        put(&mut out, rhs.len() as u64);
        for s in rhs {
            match *s {
                Symbol::Terminal(a) => put(&mut out, (a as u64) << 1),
                Symbol::Variable(y) => put(&mut out, ((y as u64) << 1) | 1),
            }
        }
    }
    out
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn err(&self, msg: &str) -> Error {
        Error::Parse { line: 0, msg: format!("{msg} at byte {}", self.pos) }
    }

    fn get(&mut self) -> Result<u64> {
        let mut v: u64 = 0;
        let mut shift = 0;
        loop {
            let b = *self.buf.get(self.pos).ok_or_else(|| self.err("truncated varint"))?;
            self.pos += 1;
            if shift == 63 && b > 1 {
                return Err(self.err("varint overflow"));
            }
            v |= ((b & 0x7f) as u64) << shift;
            if b & 0x80 == 0 {
                return Ok(v);
            }
            shift += 7;
            if shift > 63 {
                return Err(self.err("varint overflow"));
            }
        }
    }

    fn get_u32(&mut self) -> Result<u32> {
        let v = self.get()?;
        u32::try_from(v).map_err(|_| self.err("value exceeds 32 bits"))
    }
}

pub fn from_binary(buf: &[u8]) -> Result<Sslp> {
    if buf.len() < 5 || &buf[..4] != BINARY_MAGIC {
        return Err(Error::Parse { line: 0, msg: "missing SLPB magic".into() });
    }
    if buf[4] != VERSION {
        return Err(Error::Parse { line: 0, msg: format!("unsupported version {}", buf[4]) });
    }
    let mut r = Reader { buf, pos: 5 };
    let alphabet_size = r.get_u32()?;
    let vars = r.get_u32()? as usize;
    let start = r.get_u32()?;
    let mut rules = Vec::with_capacity(vars.min(buf.len()));
    for _ in 0..vars {
        let n = r.get()? as usize;
        if n > buf.len() - r.pos {
            return Err(r.err("rule longer than remaining input"));
        }
        let mut rhs = Vec::with_capacity(n);
        for _ in 0..n {
            let v = r.get()?;
            let id = u32::try_from(v >> 1).map_err(|_| r.err("symbol exceeds 32 bits"))?;
            rhs.push(if v & 1 == 0 { Symbol::Terminal(id) } else { Symbol::Variable(id) });
        }
        rules.push(rhs);
    }
    if r.pos != buf.len() {
        return Err(r.err("trailing bytes"));
    }
    let g = Sslp { alphabet_size, rules, start };
    g.validate()?;
    Ok(g)
}
