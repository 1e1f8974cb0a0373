//! Locating pattern occurrences.
//!
//! Primary occurrences cross a phrase boundary of the grammar tree and come
//! out of the locate grid, one rectangle per candidate split of the pattern.
//! Each is then propagated: upwards through `anc` until the root yields a text
//! position, and sideways through `next` to every other node with the same
//! label.

use crate::fingerprint::TextSigs;
use crate::grammar::Rule;
use crate::index::Index;
use crate::members::Query;
use crate::par::{self, Exec};
use crate::patparse::{parse_pattern, splits_for_search};
use crate::tree::{GrammarTree, NodeKind, NONE};
use crate::Sym;

/// Which split positions to probe.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplitMode {
    /// Only the candidate splits from the pattern parse.
    Candidates,
    /// Every split `1..m`; a debugging reference.
    All,
}

/// Collects reported positions, optionally up to a cap.
#[derive(Debug, Clone)]
pub struct OccurrenceSink {
    pub positions: Vec<u64>,
    cap: usize,
    /// Work items processed by secondary propagation.
    pub steps: u64,
}

impl OccurrenceSink {
    pub fn new(cap: Option<usize>) -> Self {
        OccurrenceSink {
            positions: Vec::new(),
            cap: cap.unwrap_or(usize::MAX),
            steps: 0,
        }
    }

    pub fn is_full(&self) -> bool {
        self.positions.len() >= self.cap
    }

    fn push(&mut self, p: u64) {
        self.positions.push(p);
    }
}

/// A primary occurrence: the grid point's locus, the split, and for run
/// points the copy boundary `i` it crosses (0 for block points). `start` is
/// its offset within the expansion of the locus's `anc`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Primary {
    pub locus: u32,
    pub start: u64,
}

/// Pattern data shared by all splits of one query.
pub(crate) struct PatternCtx {
    pub syms: Vec<Sym>,
    pub rev: Vec<Sym>,
    pub sigs: TextSigs,
    pub rev_sigs: TextSigs,
}

impl PatternCtx {
    pub fn new(idx: &Index, p: &[u8]) -> Self {
        let syms: Vec<Sym> = p.iter().map(|&b| b as Sym).collect();
        let rev: Vec<Sym> = syms.iter().rev().copied().collect();
        let sigs = TextSigs::new(&idx.fp, &syms);
        let rev_sigs = TextSigs::new(&idx.fp, &rev);
        PatternCtx {
            syms,
            rev,
            sigs,
            rev_sigs,
        }
    }

    /// `P[..q]` reversed.
    pub fn x_query(&self, q: usize) -> Query<'_> {
        Query {
            seq: &self.rev,
            sigs: &self.rev_sigs,
            from: self.rev.len() - q,
        }
    }

    /// `P[q..]`.
    pub fn y_query(&self, q: usize) -> Query<'_> {
        Query {
            seq: &self.syms,
            sigs: &self.sigs,
            from: q,
        }
    }
}

impl Index {
    /// Sorted 1-based positions of all occurrences of `p` in the raw text.
    pub fn locate(&self, p: &[u8]) -> Vec<u64> {
        let mut sink = OccurrenceSink::new(None);
        self.locate_into(p, SplitMode::Candidates, &mut sink);
        let mut v = sink.positions;
        v.sort_unstable();
        debug_assert!(v.windows(2).all(|w| w[0] < w[1]), "duplicate occurrence");
        v
    }

    /// At most `k` occurrences, sorted; the traversal stops once `k` are
    /// found.
    pub fn locate_limited(&self, p: &[u8], k: usize) -> Vec<u64> {
        let mut sink = OccurrenceSink::new(Some(k));
        self.locate_into(p, SplitMode::Candidates, &mut sink);
        let mut v = sink.positions;
        v.truncate(k);
        v.sort_unstable();
        v
    }

    /// Locates each pattern, in parallel when `exec` asks for it.
    pub fn locate_batch(&self, patterns: &[Vec<u8>], exec: Exec) -> Vec<Vec<u64>> {
        par::map(exec, patterns, |p| self.locate(p))
    }

    /// Runs a locate into `sink`, with a choice of split set.
    pub fn locate_into(&self, p: &[u8], mode: SplitMode, sink: &mut OccurrenceSink) {
        assert!(!p.is_empty(), "empty pattern");
        let mut prim = |v: u32, q: usize, i: u64, sink: &mut OccurrenceSink| {
            let _ = i;
            let start = self.primary_start(v, q, i);
            self.report_secondary(self.tree.anc[v as usize], start, sink);
            !sink.is_full()
        };
        self.for_each_primary(p, mode, sink, &mut prim);
    }

    /// Primary occurrences of `p`, sorted; with `SplitMode::All` this is the
    /// brute-force reference set.
    pub fn primary_occurrences(&self, p: &[u8], mode: SplitMode) -> Vec<Primary> {
        let mut out = Vec::new();
        let mut sink = OccurrenceSink::new(None);
        self.for_each_primary(p, mode, &mut sink, &mut |v, q, i, _| {
            out.push(Primary {
                locus: v,
                start: self.primary_start(v, q, i),
            });
            true
        });
        out.sort_unstable();
        out
    }

    /// Offset, within the expansion of `anc(v)`, of the primary occurrence
    /// at locus `v` with split `q` (and copy boundary `i` for runs).
    fn primary_start(&self, v: u32, q: usize, i: u64) -> u64 {
        let t = &self.tree;
        let len = self.grammar.exp_len(t.label[v as usize]);
        t.offs[v as usize] + if i == 0 { len } else { i * len } - q as u64
    }

    fn for_each_primary(
        &self,
        p: &[u8],
        mode: SplitMode,
        sink: &mut OccurrenceSink,
        f: &mut dyn FnMut(u32, usize, u64, &mut OccurrenceSink) -> bool,
    ) {
        let m = p.len();
        if m == 1 {
            if !self.grammar.has_byte(p[0]) {
                return;
            }
            let pc = PatternCtx::new(self, p);
            let xr = self.x.prefix_range(&self.view(), &pc.x_query(1));
            let all_y = 0..self.y_locate.len() as u32;
            self.locate_grid
                .report_range(xr.start as u32..xr.end as u32, all_y, |v| {
                    self.expand_point(v, 1, 1, sink, f)
                });
            return;
        }
        let ss = parse_pattern(&self.grammar, p);
        if ss.is_abandoned() {
            return;
        }
        let splits = match mode {
            SplitMode::Candidates => splits_for_search(&ss, m),
            SplitMode::All => (1..m).collect(),
        };
        let pc = PatternCtx::new(self, p);
        let view = self.view();
        for q in splits {
            let xr = self.x.prefix_range(&view, &pc.x_query(q));
            if xr.is_empty() {
                continue;
            }
            let yr = self.y_locate.prefix_range(&view, &pc.y_query(q));
            if yr.is_empty() {
                continue;
            }
            let done = self.locate_grid.report_range(
                xr.start as u32..xr.end as u32,
                yr.start as u32..yr.end as u32,
                |v| self.expand_point(v, q, m, sink, f),
            );
            if !done || sink.is_full() {
                return;
            }
        }
    }

    /// Emits the primary occurrences of one grid point: one for a block
    /// point, one per fitting copy boundary for a run point.
    fn expand_point(
        &self,
        v: u32,
        q: usize,
        m: usize,
        sink: &mut OccurrenceSink,
        f: &mut dyn FnMut(u32, usize, u64, &mut OccurrenceSink) -> bool,
    ) -> bool {
        let t = &self.tree;
        let parent = t.parent[v as usize];
        match self.grammar.rule(t.label[parent as usize]) {
            Some(&Rule::Run { base, exp }) => {
                let bl = self.grammar.exp_len(base);
                let s = exp as u64;
                let mut i = 1u64;
                loop {
                    // A single symbol ending the last copy ends the run itself
                    // and is found from the run's own parent.
                    let fits = if m == 1 {
                        i < s
                    } else {
                        i * bl - q as u64 + m as u64 <= s * bl
                    };
                    if !fits {
                        return true;
                    }
                    if !f(v, q, i, sink) {
                        return false;
                    }
                    i += 1;
                }
            }
            _ => f(v, q, 0, sink),
        }
    }

    /// Reports every text occurrence of the string at offset `start` in the
    /// expansion of node `w`.
    pub fn report_secondary(&self, w: u32, start: u64, sink: &mut OccurrenceSink) {
        let t = &self.tree;
        let mut stack = vec![(w, start)];
        while let Some((w, o)) = stack.pop() {
            sink.steps += 1;
            if w == GrammarTree::ROOT {
                sink.push(o);
                if sink.is_full() {
                    return;
                }
                continue;
            }
            let nx = t.next[w as usize];
            let up = (t.anc[w as usize], o + t.offs[w as usize]);
            if nx != NONE && t.kind[nx as usize] == NodeKind::Pseudo {
                let after = t.next[nx as usize];
                if after != NONE {
                    stack.push((after, o));
                }
                let s = t.run_exponent_of_child(&self.grammar, w).unwrap() as u64;
                let bl = self.grammar.exp_len(t.label[w as usize]);
                for i in (0..s).rev() {
                    stack.push((up.0, up.1 + i * bl));
                }
            } else {
                if nx != NONE {
                    stack.push((nx, o));
                }
                stack.push(up);
            }
        }
    }
}
