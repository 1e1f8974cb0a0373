//! The self-index: grammar, grammar tree, fingerprints, ranked member sets and
//! the two grids.
//!
//! External positions are 1-based over the raw text, which coincides with
//! 0-based positions over the wrapped text `# T $`.

use std::time::{Duration, Instant};

use thiserror::Error;

use crate::count::{compute_counts, RunPeriodTable};
use crate::expand::Forward;
use crate::fingerprint::{make_fingerprint_context, FingerprintContext, TextSigs};
use crate::grammar::{
    build_with_source, grammar_stats, wrap, BuildConfig, GrammarError, GrammarStats,
    PermutationSource, RandomPermutations, Rlcfg, Rule,
};
use crate::grid::{CountGrid, LocateGrid};
use crate::members::{sort_placed, Handle, MemberView, Placed, RankedStrings};
use crate::par::Exec;
use crate::sigs::PrefixSigTables;
use crate::tree::{build_grammar_tree, GrammarTree, NodeKind};
use crate::{Sym, FIRST_NONTERMINAL};

#[derive(Debug, Error)]
pub enum IndexError {
    #[error(transparent)]
    Grammar(#[from] GrammarError),
    #[error("range {from}..{from}+{len} is outside the text of length {n}")]
    Bounds { from: u64, len: u64, n: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IndexOptions {
    pub seed: u64,
    pub grammar: BuildConfig,
    pub exec: Exec,
}

impl Default for IndexOptions {
    fn default() -> Self {
        IndexOptions {
            seed: 0,
            grammar: BuildConfig::default(),
            exec: Exec::Parallel,
        }
    }
}

/// Seed offset separating the fingerprint base from the permutations.
const FINGERPRINT_SEED: u64 = 0x6b61_7070_6101;

#[derive(Debug, Clone)]
pub struct Index {
    pub(crate) grammar: Rlcfg,
    pub(crate) tree: GrammarTree,
    pub(crate) fp: FingerprintContext,
    pub(crate) sigs: PrefixSigTables,
    pub(crate) x: RankedStrings,
    pub(crate) y_locate: RankedStrings,
    pub(crate) y_count: RankedStrings,
    pub(crate) locate_grid: LocateGrid,
    pub(crate) count_grid: CountGrid,
    pub(crate) counts: Vec<u64>,
    pub(crate) periods: RunPeriodTable,
    pub(crate) term_counts: Vec<u64>,
    pub(crate) seed: u64,
    pub(crate) build_time: Duration,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IndexStats {
    pub grammar: GrammarStats,
    pub tree_nodes: usize,
    pub locate_points: usize,
    pub count_points: usize,
    pub fingerprint_redraws: u32,
    pub build_time: Duration,
}

impl Index {
    pub fn build(text: &[u8], seed: u64) -> Result<Self, IndexError> {
        Index::build_with(
            text,
            &IndexOptions {
                seed,
                ..Default::default()
            },
        )
    }

    pub fn build_with(text: &[u8], opts: &IndexOptions) -> Result<Self, IndexError> {
        Index::build_with_source(text, &mut RandomPermutations::new(opts.seed), opts)
    }

    /// Builds with an explicit permutation source, e.g. fixed permutations.
    pub fn build_with_source(
        text: &[u8],
        source: &mut dyn PermutationSource,
        opts: &IndexOptions,
    ) -> Result<Self, IndexError> {
        let t0 = Instant::now();
        let grammar = build_with_source(text, source, &opts.grammar)?;
        let wrapped = wrap(text);
        let fp = make_fingerprint_context(&wrapped, opts.seed ^ FINGERPRINT_SEED, opts.exec);
        let mut idx = Index::assemble(grammar, &wrapped, fp, opts.exec);
        idx.seed = opts.seed;
        idx.build_time = t0.elapsed();
        Ok(idx)
    }

    fn assemble(grammar: Rlcfg, wrapped: &[Sym], fp: FingerprintContext, exec: Exec) -> Index {
        let g = &grammar;
        let tree = build_grammar_tree(g);
        let sigs = PrefixSigTables::build(g, &fp);
        let counts = compute_counts(&tree, g);
        let pos = tree.positions(g);
        let text_sigs = TextSigs::new(&fp, wrapped);

        let mut xs: Vec<Placed> = Vec::new();
        let mut yl: Vec<Placed> = Vec::new();
        let mut yc: Vec<Placed> = Vec::new();
        let mut locus: Vec<u32> = Vec::new();
        // (locate point, y_count member, weight)
        let mut count_pts: Vec<(u32, u32, u64)> = Vec::new();
        for u in 0..tree.len() as u32 {
            if tree.kind[u as usize] != NodeKind::Internal {
                continue;
            }
            let a = tree.label[u as usize];
            let kids = tree.children_of(u);
            let cu = counts[u as usize];
            let add_x = |v: u32, xs: &mut Vec<Placed>, locus: &mut Vec<u32>| -> u32 {
                let i = locus.len() as u32;
                let l = g.exp_len(tree.label[v as usize]) as usize;
                xs.push(Placed {
                    handle: Handle::Rev(tree.label[v as usize]),
                    pos: pos[v as usize] as usize + l,
                    len: l,
                    tag: i,
                });
                locus.push(v);
                i
            };
            match g.rule(a).unwrap() {
                Rule::Block { children, ends } => {
                    for k in 0..children.len() - 1 {
                        let i = add_x(kids[k], &mut xs, &mut locus);
                        let y = Placed {
                            handle: Handle::Suffix {
                                rule: a,
                                first: k as u32 + 1,
                            },
                            pos: pos[kids[k + 1] as usize] as usize,
                            len: (g.exp_len(a) - ends[k]) as usize,
                            tag: i,
                        };
                        yl.push(y);
                        count_pts.push((i, yc.len() as u32, cu));
                        yc.push(Placed {
                            tag: yc.len() as u32,
                            ..y
                        });
                    }
                }
                &Rule::Run { base, exp } => {
                    let i = add_x(kids[0], &mut xs, &mut locus);
                    let bl = g.exp_len(base) as usize;
                    let at = pos[u as usize] as usize;
                    yl.push(Placed {
                        handle: Handle::Power { run: a, k: exp - 1 },
                        pos: at,
                        len: bl * (exp as usize - 1),
                        tag: i,
                    });
                    let mut power = |k: u32, w: u64| {
                        count_pts.push((i, yc.len() as u32, w));
                        yc.push(Placed {
                            handle: Handle::Power { run: a, k },
                            pos: at,
                            len: bl * k as usize,
                            tag: yc.len() as u32,
                        });
                    };
                    power(1, cu);
                    if exp >= 3 {
                        power(2, (exp as u64 - 2) * cu);
                    }
                }
            }
        }

        let ((), ((), ())) = crate::par::join(
            exec,
            || sort_placed(&mut xs, wrapped, &text_sigs, true, exec),
            || {
                crate::par::join(
                    exec,
                    || sort_placed(&mut yl, wrapped, &text_sigs, false, exec),
                    || sort_placed(&mut yc, wrapped, &text_sigs, false, exec),
                )
            },
        );
        let ranks = |v: &[Placed]| {
            let mut r = vec![0u32; v.len()];
            for (k, p) in v.iter().enumerate() {
                r[p.tag as usize] = k as u32;
            }
            r
        };
        let (xr, ylr, ycr) = (ranks(&xs), ranks(&yl), ranks(&yc));
        let locate_grid = LocateGrid::new(
            (0..locus.len())
                .map(|i| (xr[i], ylr[i], locus[i]))
                .collect(),
        );
        let count_grid = CountGrid::new(
            count_pts
                .iter()
                .map(|&(i, j, w)| (xr[i as usize], ycr[j as usize], w))
                .collect(),
        );
        let handles = |v: &[Placed]| RankedStrings {
            members: v.iter().map(|p| p.handle).collect(),
        };
        let periods = RunPeriodTable::build(g, &tree, &counts, &sigs);
        let mut term_counts = vec![0u64; 256];
        for &s in &wrapped[1..wrapped.len() - 1] {
            term_counts[s as usize] += 1;
        }
        Index {
            x: handles(&xs),
            y_locate: handles(&yl),
            y_count: handles(&yc),
            locate_grid,
            count_grid,
            counts,
            periods,
            term_counts,
            sigs,
            fp,
            tree,
            grammar,
            seed: 0,
            build_time: Duration::ZERO,
        }
    }

    pub fn grammar(&self) -> &Rlcfg {
        &self.grammar
    }

    pub fn tree(&self) -> &GrammarTree {
        &self.tree
    }

    pub fn fingerprints(&self) -> &FingerprintContext {
        &self.fp
    }

    pub fn prefix_sigs(&self) -> &PrefixSigTables {
        &self.sigs
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn periods(&self) -> &RunPeriodTable {
        &self.periods
    }

    pub fn x_members(&self) -> &RankedStrings {
        &self.x
    }

    pub fn y_locate_members(&self) -> &RankedStrings {
        &self.y_locate
    }

    pub fn y_count_members(&self) -> &RankedStrings {
        &self.y_count
    }

    pub fn locate_grid(&self) -> &LocateGrid {
        &self.locate_grid
    }

    pub fn count_grid(&self) -> &CountGrid {
        &self.count_grid
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn view(&self) -> MemberView<'_> {
        MemberView {
            g: &self.grammar,
            sigs: &self.sigs,
        }
    }

    /// Length of the raw text.
    pub fn text_len(&self) -> u64 {
        self.grammar.text_len() - 2
    }

    /// Symbols `p..=q` of the wrapped text, 1-based (position 1 is `#`).
    pub fn extract(&self, p: u64, q: u64) -> Result<Vec<Sym>, IndexError> {
        let n = self.grammar.text_len();
        if p == 0 || p > q || q > n {
            return Err(IndexError::Bounds {
                from: p,
                len: q.saturating_sub(p) + 1,
                n,
            });
        }
        Ok(Forward::new(&self.grammar, self.grammar.start(), p - 1, q - p + 1).collect())
    }

    /// `len` bytes of the raw text starting at external position `from`.
    pub fn extract_text(&self, from: u64, len: u64) -> Result<Vec<u8>, IndexError> {
        let n = self.text_len();
        if from == 0 || from.checked_add(len).is_none_or(|e| e > n + 1) {
            return Err(IndexError::Bounds { from, len, n });
        }
        Ok(Forward::new(&self.grammar, self.grammar.start(), from, len)
            .map(|s| s as u8)
            .collect())
    }

    pub fn stats(&self) -> IndexStats {
        IndexStats {
            grammar: grammar_stats(&self.grammar),
            tree_nodes: self.tree.len(),
            locate_points: self.locate_grid.len(),
            count_points: self.count_grid.len(),
            fingerprint_redraws: self.fp.redraws,
            build_time: self.build_time,
        }
    }

    /// Number of nonterminals.
    pub fn num_rules(&self) -> usize {
        self.grammar.num_symbols() - FIRST_NONTERMINAL as usize
    }
}
