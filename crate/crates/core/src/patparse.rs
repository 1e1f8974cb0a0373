//! Parsing `# P $` with the grammar's round tables to find the few split
//! positions of `P` that can yield primary occurrences.
//!
//! Offsets are 0-based within `P`; an offset `x` stands for the boundary
//! between `P[x]` and `P[x + 1]`.

use rustc_hash::FxHashMap;

use crate::grammar::{block_spans, Rlcfg, RoundTables};
use crate::lcparse::{collapse_runs, valleys};
use crate::{Sym, DOLLAR, HASH};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Abandon {
    /// The pattern holds a byte that does not occur in the text.
    UnknownByte(u8),
    /// An interior block of the pattern's parse is not in the round's table.
    NovelBlock { round: usize, index: usize },
    /// An interior run of the pattern's parse is not in the round's table.
    NovelRun { round: usize, index: usize },
}

/// Context-insensitive block and run boundaries of one level.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LevelSets {
    pub blocks: Vec<usize>,
    pub runs: Vec<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SplitSet {
    /// Sorted candidate split offsets.
    pub m_of_p: Vec<usize>,
    /// Boundary sets per level, while non-empty.
    pub levels: Vec<LevelSets>,
    pub abandoned: Option<Abandon>,
    /// Symbols handled across all rounds of the pattern parse.
    pub symbols_processed: usize,
}

impl SplitSet {
    pub fn is_abandoned(&self) -> bool {
        self.abandoned.is_some()
    }
}

/// Split positions `q` (prefix lengths) to probe: `(M(P) + 1) ∩ [1, m − 1]`.
pub fn splits_for_search(ss: &SplitSet, m: usize) -> Vec<usize> {
    ss.m_of_p
        .iter()
        .map(|&x| x + 1)
        .filter(|&q| q >= 1 && q < m)
        .collect()
}

/// Fresh ids and ranks for runs and blocks of the pattern that the text's
/// parse never produced.
struct NovelRegistry {
    next_id: Sym,
    runs: FxHashMap<(Sym, u32), Sym>,
    blocks: FxHashMap<Vec<Sym>, Sym>,
    ranks: FxHashMap<Sym, u32>,
}

impl NovelRegistry {
    fn fresh(&mut self) -> Sym {
        let id = self.next_id;
        self.next_id += 1;
        id
    }

    fn run(&mut self, base: Sym, len: u32) -> Sym {
        if let Some(&id) = self.runs.get(&(base, len)) {
            return id;
        }
        let id = self.fresh();
        self.runs.insert((base, len), id);
        id
    }

    fn block(&mut self, tuple: &[Sym]) -> Sym {
        if let Some(&id) = self.blocks.get(tuple) {
            return id;
        }
        let id = self.fresh();
        self.blocks.insert(tuple.to_vec(), id);
        id
    }
}

fn restrict(bounds: impl Iterator<Item = usize>, lo: usize, hi: usize) -> Vec<usize> {
    bounds.filter(|&x| lo <= x && x < hi).collect()
}

/// Offsets (in `P`) of the ends of all but the last symbol, given their
/// inclusive end positions in `# P $`.
fn symbol_bounds(ends: &[usize]) -> impl Iterator<Item = usize> + '_ {
    ends[..ends.len() - 1].iter().filter_map(|&e| e.checked_sub(1))
}

/// Offsets of the ends of runs, except the final one. The end of a leading
/// `#` is not an offset of `P` and is dropped, as in `symbol_bounds`.
fn run_bounds<'a>(seq: &'a [Sym], ends: &'a [usize]) -> impl Iterator<Item = usize> + 'a {
    (0..seq.len() - 1)
        .filter(move |&k| seq[k] != seq[k + 1])
        .filter_map(move |k| ends[k].checked_sub(1))
}

pub fn parse_pattern(g: &Rlcfg, p: &[u8]) -> SplitSet {
    assert!(!p.is_empty(), "empty pattern");
    let mut out = SplitSet::default();
    if let Some(&b) = p.iter().find(|&&b| !g.has_byte(b)) {
        out.abandoned = Some(Abandon::UnknownByte(b));
        return out;
    }
    let m = p.len();
    let mut seq: Vec<Sym> = Vec::with_capacity(m + 2);
    seq.push(HASH);
    seq.extend(p.iter().map(|&b| b as Sym));
    seq.push(DOLLAR);
    let mut ends: Vec<usize> = (0..m + 2).collect();
    let mut reg = NovelRegistry {
        next_id: g.num_symbols() as Sym,
        runs: FxHashMap::default(),
        blocks: FxHashMap::default(),
        ranks: FxHashMap::default(),
    };

    let mut blocks: Vec<usize> = (0..m.saturating_sub(1)).collect();
    let mut r = 0;
    loop {
        out.symbols_processed += seq.len();
        if blocks.is_empty() {
            break;
        }
        let runs = restrict(run_bounds(&seq, &ends), blocks[0] + 1, *blocks.last().unwrap());
        out.levels.push(LevelSets {
            blocks: blocks.clone(),
            runs: runs.clone(),
        });
        if runs.is_empty() || r >= g.rounds().len() {
            break;
        }
        match parse_level(&g.rounds()[r], g.rounds().get(r + 1), &seq, &ends, &mut reg, r) {
            Err(a) => {
                out.abandoned = Some(a);
                out.levels.clear();
                return out;
            }
            Ok((s, e)) => {
                seq = s;
                ends = e;
            }
        }
        let hi = *blocks.last().unwrap();
        blocks = restrict(symbol_bounds(&ends), runs[0] + 1, hi);
        r += 1;
    }

    let mut mp = Vec::new();
    for lv in &out.levels {
        if let (Some(&a), Some(&b)) = (lv.blocks.first(), lv.blocks.last()) {
            mp.extend([a, b]);
        }
        if let Some(&c) = lv.runs.first() {
            mp.push(c);
        }
    }
    mp.sort_unstable();
    mp.dedup();
    out.m_of_p = mp;
    out
}

/// One round over the pattern's current sequence. Returns the next sequence
/// with the inclusive end positions of its symbols.
fn parse_level(
    tables: &RoundTables,
    next_tables: Option<&RoundTables>,
    seq: &[Sym],
    ends: &[usize],
    reg: &mut NovelRegistry,
    round: usize,
) -> Result<(Vec<Sym>, Vec<usize>), Abandon> {
    let last = seq.len() - 1;
    let rank = |k: usize, s: Sym| -> u32 {
        if k == 0 {
            2
        } else if k == last {
            1
        } else {
            tables
                .perm
                .rank(s)
                .or_else(|| reg.ranks.get(&s).copied())
                .expect("pattern symbol without rank")
        }
    };
    let rc = collapse_runs(seq);
    let mut ranks = Vec::with_capacity(rc.len());
    let mut hat = Vec::with_capacity(rc.len());
    for (k, (base, _)) in rc.entries().enumerate() {
        ranks.push(rank(rc.fimap(k), base));
    }
    let nr = rc.len();
    for (k, (base, len)) in rc.entries().enumerate() {
        hat.push(base);
        if len >= 2 {
            hat[k] = match tables.run(base, len) {
                Some(id) => id,
                None => {
                    // Same extreme window as for blocks below.
                    let index = k + 1;
                    if index > 4 && index + 1 < nr {
                        return Err(Abandon::NovelRun { round, index });
                    }
                    reg.run(base, len)
                }
            };
        }
    }
    let minima = valleys(&ranks);
    let nb = minima.len() + 1;
    let mut next = Vec::with_capacity(nb);
    let mut next_ends = Vec::with_capacity(nb);
    for (idx, (a, b)) in block_spans(&minima, hat.len()).enumerate() {
        let tuple = &hat[a..b];
        let id = match tables.block(tuple) {
            Some(id) => id,
            None => {
                let index = idx + 1;
                if index > 4 && index + 1 < nb {
                    return Err(Abandon::NovelBlock { round, index });
                }
                reg.block(tuple)
            }
        };
        next.push(id);
        next_ends.push(ends[rc.limap(b - 1)]);
    }
    // Novel symbols of the next level get unused ranks above the table's.
    reg.ranks.clear();
    let mut fresh = next_tables.map_or(0, |t| t.perm.max_rank());
    for &s in &next {
        let known = next_tables.is_some_and(|t| t.perm.rank(s).is_some());
        if !known && !reg.ranks.contains_key(&s) {
            fresh += 1;
            reg.ranks.insert(s, fresh);
        }
    }
    Ok((next, next_ends))
}
