use crate::error::{Error, Result};

pub type SortId = u32;
pub type SymbolId = u32;

/// A many-sorted signature. `types[f]` lists the argument sorts of `f`
/// followed by its result sort.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Signature {
    pub sort_count: u32,
    pub types: Vec<Vec<SortId>>,
    pub names: Vec<String>,
}

impl Signature {
    pub fn new(sort_count: u32, types: Vec<Vec<SortId>>, names: Vec<String>) -> Result<Self> {
        if names.len() != types.len() {
            return Err(Error::Invalid("one name per symbol required".into()));
        }
        for (f, t) in types.iter().enumerate() {
            if t.is_empty() {
                return Err(Error::Invalid(format!("symbol {f} has an empty type")));
            }
            if let Some(&s) = t.iter().find(|&&s| s >= sort_count) {
                return Err(Error::Invalid(format!("symbol {f} uses unknown sort {s}")));
            }
        }
        Ok(Signature { sort_count, types, names })
    }

    /// Symbols named `f0, f1, ...`.
    pub fn unnamed(sort_count: u32, types: Vec<Vec<SortId>>) -> Result<Self> {
        let names = (0..types.len()).map(|f| format!("f{f}")).collect();
        Self::new(sort_count, types, names)
    }

    pub fn symbol_count(&self) -> usize {
        self.types.len()
    }

    pub fn rank(&self, f: SymbolId) -> usize {
        self.types[f as usize].len() - 1
    }

    pub fn result_sort(&self, f: SymbolId) -> SortId {
        *self.types[f as usize].last().unwrap()
    }

    pub fn arg_sorts(&self, f: SymbolId) -> &[SortId] {
        let t = &self.types[f as usize];
        &t[..t.len() - 1]
    }

    pub fn check_symbol(&self, f: SymbolId) -> Result<()> {
        if (f as usize) < self.types.len() {
            Ok(())
        } else {
            Err(Error::SortMismatch(format!("unknown symbol {f}")))
        }
    }

    pub fn max_rank(&self) -> usize {
        self.types.iter().map(|t| t.len() - 1).max().unwrap_or(0)
    }
}
