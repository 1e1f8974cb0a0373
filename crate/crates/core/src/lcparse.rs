//! One round of locally consistent parsing.
//!
//! A round collapses maximal runs into metasymbols, finds the strict local
//! minima of the collapsed sequence under a permutation of the alphabet, and
//! cuts the sequence into blocks that end at the last position of every local
//! minimum and at the end of the sequence.
//!
//! Positions are 0-based throughout. A boundary `p` means a block ends at `p`.

use thiserror::Error;

use crate::Sym;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("symbol {0} has no rank in the permutation")]
    MissingRank(Sym),
    #[error("sequence of length {0} is too short to parse")]
    TooShort(usize),
    #[error("block ({0}, {1}) touches the sequence ends and has no extension")]
    NoExtension(usize, usize),
}

/// Ranks of a contiguous range of symbol ids. Rank 0 marks an absent symbol.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Permutation {
    lo: Sym,
    ranks: Vec<u32>,
}

impl Permutation {
    pub fn new(lo: Sym, ranks: Vec<u32>) -> Self {
        Permutation { lo, ranks }
    }

    /// Builds a permutation from `(symbol, rank)` pairs.
    pub fn from_pairs(pairs: &[(Sym, u32)]) -> Self {
        let lo = pairs.iter().map(|p| p.0).min().unwrap_or(0);
        let hi = pairs.iter().map(|p| p.0).max().unwrap_or(0);
        let mut ranks = vec![0; if pairs.is_empty() { 0 } else { (hi - lo) as usize + 1 }];
        for &(s, r) in pairs {
            ranks[(s - lo) as usize] = r;
        }
        Permutation { lo, ranks }
    }

    #[inline]
    pub fn rank(&self, s: Sym) -> Option<u32> {
        let k = s.checked_sub(self.lo)? as usize;
        match self.ranks.get(k) {
            Some(&r) if r > 0 => Some(r),
            _ => None,
        }
    }

    pub fn lo(&self) -> Sym {
        self.lo
    }

    pub fn raw_ranks(&self) -> &[u32] {
        &self.ranks
    }

    /// Largest rank in use.
    pub fn max_rank(&self) -> u32 {
        self.ranks.iter().copied().max().unwrap_or(0)
    }

    /// Number of ranked symbols.
    pub fn len(&self) -> usize {
        self.ranks.iter().filter(|&&r| r > 0).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// A sequence with maximal runs collapsed to `(base, length)` entries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunCollapse {
    pub bases: Vec<Sym>,
    pub lens: Vec<u32>,
    starts: Vec<usize>,
}

impl RunCollapse {
    pub fn len(&self) -> usize {
        self.bases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bases.is_empty()
    }

    /// Collapsed index of original position `i`.
    pub fn map(&self, i: usize) -> usize {
        self.starts.partition_point(|&s| s <= i) - 1
    }

    /// First original position of collapsed entry `k`.
    pub fn fimap(&self, k: usize) -> usize {
        self.starts[k]
    }

    /// Last original position of collapsed entry `k`.
    pub fn limap(&self, k: usize) -> usize {
        self.starts[k] + self.lens[k] as usize - 1
    }

    /// Length of the original sequence.
    pub fn original_len(&self) -> usize {
        match self.bases.len() {
            0 => 0,
            k => self.limap(k - 1) + 1,
        }
    }

    pub fn entries(&self) -> impl Iterator<Item = (Sym, u32)> + '_ {
        self.bases.iter().copied().zip(self.lens.iter().copied())
    }
}

pub fn collapse_runs(s: &[Sym]) -> RunCollapse {
    let mut bases = Vec::new();
    let mut lens = Vec::new();
    let mut starts = Vec::new();
    let mut i = 0;
    while i < s.len() {
        let mut j = i + 1;
        while j < s.len() && s[j] == s[i] {
            j += 1;
        }
        bases.push(s[i]);
        lens.push((j - i) as u32);
        starts.push(i);
        i = j;
    }
    RunCollapse { bases, lens, starts }
}

/// Strict interior valleys of a rank sequence.
pub fn valleys(ranks: &[u32]) -> Vec<usize> {
    let mut out = Vec::new();
    for k in 1..ranks.len().saturating_sub(1) {
        if ranks[k - 1] > ranks[k] && ranks[k] < ranks[k + 1] {
            out.push(k);
        }
    }
    out
}

fn base_ranks(rc: &RunCollapse, pi: &Permutation) -> Result<Vec<u32>, ParseError> {
    rc.bases
        .iter()
        .map(|&b| pi.rank(b).ok_or(ParseError::MissingRank(b)))
        .collect()
}

/// Collapsed indices that are local minima under `pi`.
pub fn local_minima(rc: &RunCollapse, pi: &Permutation) -> Result<Vec<usize>, ParseError> {
    Ok(valleys(&base_ranks(rc, pi)?))
}

/// Block boundaries and blocks of one round.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoundParse {
    pub boundaries: Vec<usize>,
    /// Inclusive `(start, end)` original positions.
    pub blocks: Vec<(usize, usize)>,
}

pub fn parse_round(s: &[Sym], pi: &Permutation) -> Result<RoundParse, ParseError> {
    if s.len() < 2 {
        return Err(ParseError::TooShort(s.len()));
    }
    let rc = collapse_runs(s);
    let mut boundaries: Vec<usize> = local_minima(&rc, pi)?
        .into_iter()
        .map(|k| rc.limap(k))
        .collect();
    boundaries.push(s.len() - 1);
    let mut blocks = Vec::with_capacity(boundaries.len());
    let mut start = 0;
    for &b in &boundaries {
        blocks.push((start, b));
        start = b + 1;
    }
    Ok(RoundParse { boundaries, blocks })
}

/// Relative boundary set of the fragment `s[i..=j]`.
pub fn fragment_boundaries(parse: &RoundParse, i: usize, j: usize) -> Vec<usize> {
    let lo = parse.boundaries.partition_point(|&p| p < i);
    parse.boundaries[lo..]
        .iter()
        .take_while(|&&p| p < j)
        .map(|&p| p - i)
        .collect()
}

/// Extension `(i_e, j_e)` of the block `s[i..=j]`: one position past the
/// block on the right, and the whole run before the block plus one more
/// position on the left.
pub fn block_extension(
    rc: &RunCollapse,
    block: (usize, usize),
    n: usize,
) -> Result<(usize, usize), ParseError> {
    let (i, j) = block;
    if i == 0 || j + 1 >= n {
        return Err(ParseError::NoExtension(i, j));
    }
    let first = rc.fimap(rc.map(i - 1));
    if first == 0 {
        return Err(ParseError::NoExtension(i, j));
    }
    Ok((first - 1, j + 1))
}
