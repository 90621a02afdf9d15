//! Target-level dataset splits and the starting-material stock.

use super::route::SyntheticRoute;
use crate::chem::{parse_smiles, Molecule, ParseError};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeSet;
use std::io::{self, BufRead, Write};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SplitError {
    #[error("split ratios must sum to 100, got {0}")]
    BadRatios(u32),
    #[error("{0} items cannot fill {1} buckets")]
    TooFew(usize, usize),
    #[error("bucket sizes sum to {0}, but there are {1} items")]
    CountMismatch(usize, usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Split<T> {
    pub train: Vec<T>,
    pub validation: Vec<T>,
    pub test: Vec<T>,
}

/// Shuffles `items` with the seed and splits them by percentage. The
/// validation and test sizes are rounded down but kept at least one; the
/// training bucket takes the rest. Each item (a target together with all of
/// its routes) lands in exactly one bucket.
pub fn split_dataset<T>(items: Vec<T>, ratios: [u32; 3], seed: u64) -> Result<Split<T>, SplitError> {
    let total: u32 = ratios.iter().sum();
    if total != 100 {
        return Err(SplitError::BadRatios(total));
    }
    let n = items.len();
    if n < 3 {
        return Err(SplitError::TooFew(n, 3));
    }
    let size = |pct: u32| ((n as u64 * pct as u64 / 100) as usize).max(1);
    let (val, test) = (size(ratios[1]), size(ratios[2]));
    if val + test >= n {
        return Err(SplitError::TooFew(n, 3));
    }
    split_by_counts(items, [n - val - test, val, test], seed)
}

/// Shuffles `items` with the seed and cuts them into buckets of exactly the
/// given sizes.
pub fn split_by_counts<T>(
    mut items: Vec<T>,
    counts: [usize; 3],
    seed: u64,
) -> Result<Split<T>, SplitError> {
    let sum: usize = counts.iter().sum();
    if sum != items.len() {
        return Err(SplitError::CountMismatch(sum, items.len()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    items.shuffle(&mut rng);
    let test = items.split_off(counts[0] + counts[1]);
    let validation = items.split_off(counts[0]);
    Ok(Split {
        train: items,
        validation,
        test,
    })
}

/// Purchasable starting materials, by canonical SMILES.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StockSet {
    smiles: BTreeSet<String>,
}

impl StockSet {
    pub fn new() -> StockSet {
        StockSet::default()
    }

    pub fn from_molecules<'a>(ms: impl IntoIterator<Item = &'a Molecule>) -> StockSet {
        StockSet {
            smiles: ms.into_iter().map(|m| m.canonical_smiles().to_string()).collect(),
        }
    }

    /// Parses and canonicalizes each entry.
    pub fn from_smiles<'a>(texts: impl IntoIterator<Item = &'a str>) -> Result<StockSet, ParseError> {
        let mut smiles = BTreeSet::new();
        for t in texts {
            smiles.insert(parse_smiles(t)?.canonical_smiles().to_string());
        }
        Ok(StockSet { smiles })
    }

    pub fn insert(&mut self, m: &Molecule) {
        self.smiles.insert(m.canonical_smiles().to_string());
    }

    pub fn contains(&self, m: &Molecule) -> bool {
        self.smiles.contains(m.canonical_smiles())
    }

    /// Exact string membership; `smiles` must already be canonical.
    pub fn contains_smiles(&self, smiles: &str) -> bool {
        self.smiles.contains(smiles)
    }

    pub fn len(&self) -> usize {
        self.smiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.smiles.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.smiles.iter().map(String::as_str)
    }

    /// One SMILES per line; blank lines and `#` comments are skipped and
    /// entries are canonicalized. Errors carry the 1-based line number.
    pub fn read<R: BufRead>(input: R) -> Result<StockSet, (usize, StockReadError)> {
        let mut smiles = BTreeSet::new();
        for (i, line) in input.lines().enumerate() {
            let line = line.map_err(|e| (i + 1, StockReadError::Io(e)))?;
            let t = line.trim();
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            let m = parse_smiles(t).map_err(|e| (i + 1, StockReadError::Parse(e)))?;
            smiles.insert(m.canonical_smiles().to_string());
        }
        Ok(StockSet { smiles })
    }

    pub fn write<W: Write>(&self, mut out: W) -> io::Result<()> {
        for s in &self.smiles {
            writeln!(out, "{s}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum StockReadError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Parse(#[from] ParseError),
}

/// Union of the leaves of the given routes.
pub fn default_stock<'a>(routes: impl IntoIterator<Item = &'a SyntheticRoute>) -> StockSet {
    StockSet::from_molecules(routes.into_iter().flat_map(|r| &r.leaves))
}
