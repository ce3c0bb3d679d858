//! Partial assignments over the flat binary vector `z = (x, phi)`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::SolveError;

/// Values for a subset of the `2 J T` binary indices, kept sorted by index.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PartialAssignment {
    entries: BTreeMap<usize, u8>,
}

impl PartialAssignment {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds from `(index, value)` pairs. A repeated index with a different
    /// value is rejected.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (usize, u8)>) -> Result<Self, SolveError> {
        let mut out = Self::new();
        for (k, v) in pairs {
            out.insert(k, v)?;
        }
        Ok(out)
    }

    /// The complete assignment `z`.
    pub fn full(z: &[u8]) -> Self {
        Self {
            entries: z.iter().copied().enumerate().collect(),
        }
    }

    pub fn insert(&mut self, index: usize, value: u8) -> Result<(), SolveError> {
        if value > 1 {
            return Err(SolveError::NotBinary { index, value });
        }
        match self.entries.insert(index, value) {
            Some(old) if old != value => Err(SolveError::Conflict(index)),
            _ => Ok(()),
        }
    }

    pub fn get(&self, index: usize) -> Option<u8> {
        self.entries.get(&index).copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, u8)> + '_ {
        self.entries.iter().map(|(&k, &v)| (k, v))
    }

    pub fn max_index(&self) -> Option<usize> {
        self.entries.keys().next_back().copied()
    }

    /// Dense lookup table of length `n`.
    pub(crate) fn dense(&self, n: usize) -> Vec<Option<u8>> {
        let mut out = vec![None; n];
        for (k, v) in self.iter() {
            out[k] = Some(v);
        }
        out
    }

    /// `index,value` lines with a header.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("index,value\n");
        for (k, v) in self.iter() {
            let _ = writeln!(out, "{k},{v}");
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self, SolveError> {
        let mut out = Self::new();
        for (line, (index, value)) in onts_core::io::read_csv(text, &["index", "value"])? {
            out.insert(index, value).map_err(|e| SolveError::Parse {
                line,
                msg: e.to_string(),
            })?;
        }
        Ok(out)
    }
}
