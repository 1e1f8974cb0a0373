//! Occurrence counters on the grammar tree, periods, and the run-length
//! correction table used by counting queries.

use rustc_hash::FxHashMap;

use crate::expand::Forward;
use crate::fingerprint::{floor_pow2, KappaPrime};
use crate::grammar::{Rlcfg, Rule};
use crate::index::Index;
use crate::locate::PatternCtx;
use crate::par::{self, Exec};
use crate::patparse::{parse_pattern, splits_for_search};
use crate::sigs::PrefixSigTables;
use crate::tree::{GrammarTree, NodeKind, NONE};
use crate::Sym;

/// `c(u)` for every grammar-tree node; pseudo-leaves hold 0.
///
/// `c(root) = 1` and `c(u) = c(anc(u)) + c(next(u))`, except that for the
/// first child of a run `A → B^s` it is `s·c(anc(u))` plus the counter of the
/// node after the pseudo-leaf.
pub fn compute_counts(t: &GrammarTree, g: &Rlcfg) -> Vec<u64> {
    const UNSET: u64 = u64::MAX;
    let n = t.len();
    let mut c = vec![UNSET; n];
    c[GrammarTree::ROOT as usize] = 1;
    let mut on_stack = vec![false; n];
    // Each entry's dependencies: (anc, next node, multiplier of anc).
    let deps = |u: u32| -> (u32, u32, u64) {
        let nx = t.next[u as usize];
        if nx != NONE && t.kind[nx as usize] == NodeKind::Pseudo {
            let s = t.run_exponent_of_child(g, u).expect("pseudo-leaf after a non-run child");
            (t.anc[u as usize], t.next[nx as usize], s as u64)
        } else {
            (t.anc[u as usize], nx, 1)
        }
    };
    for start in 0..n as u32 {
        if c[start as usize] != UNSET || t.kind[start as usize] == NodeKind::Pseudo {
            continue;
        }
        let mut stack = vec![start];
        on_stack[start as usize] = true;
        while let Some(&u) = stack.last() {
            let (a, nx, mult) = deps(u);
            // Descend into one pending dependency at a time, so the stack is
            // always a dependency path.
            if let Some(d) = [a, nx].into_iter().find(|&d| d != NONE && c[d as usize] == UNSET) {
                assert!(!on_stack[d as usize], "cycle in counter dependencies");
                on_stack[d as usize] = true;
                stack.push(d);
            } else {
                let next = if nx == NONE { 0 } else { c[nx as usize] };
                c[u as usize] = mult * c[a as usize] + next;
                on_stack[u as usize] = false;
                stack.pop();
            }
        }
    }
    for (v, k) in t.kind.iter().enumerate() {
        if *k == NodeKind::Pseudo {
            c[v] = 0;
        }
    }
    c
}

/// Smallest `p ≥ 1` with `P[..m − p] = P[p..]`, from the failure function.
pub fn shortest_period<T: PartialEq>(p: &[T]) -> usize {
    let m = p.len();
    if m == 0 {
        return 0;
    }
    let mut fail = vec![0usize; m];
    let mut k = 0;
    for i in 1..m {
        while k > 0 && p[i] != p[k] {
            k = fail[k - 1];
        }
        if p[i] == p[k] {
            k += 1;
        }
        fail[i] = k;
    }
    m - fail[m - 1]
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunPeriodEntry {
    pub base: Sym,
    /// Sorted exponents `s ≥ 3` of the run rules over `base`.
    pub exps: Vec<u32>,
    /// `c[i]`: sum of `c(A)` over those rules with exponent `≥ exps[i]`.
    pub c: Vec<u64>,
    /// `c_prime[i]`: the same sum weighted by the exponents.
    pub c_prime: Vec<u64>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RunPeriodTable {
    pub keys: FxHashMap<KappaPrime, usize>,
    pub entries: Vec<RunPeriodEntry>,
}

/// `κ'` of `exp(s)`.
pub fn kappa_prime_of(g: &Rlcfg, sigs: &PrefixSigTables, s: Sym) -> KappaPrime {
    let l = g.exp_len(s);
    let k = floor_pow2(l);
    (sigs.prefix(g, s, k).kappa, sigs.suffix(g, s, k).kappa, l)
}

impl RunPeriodTable {
    pub fn build(g: &Rlcfg, t: &GrammarTree, counts: &[u64], sigs: &PrefixSigTables) -> Self {
        let mut by_base: FxHashMap<Sym, Vec<(u32, u64)>> = FxHashMap::default();
        for (k, rule) in g.rules().iter().enumerate() {
            if let &Rule::Run { base, exp } = rule {
                if exp >= 3 {
                    let id = crate::FIRST_NONTERMINAL + k as Sym;
                    let c = counts[t.internal[id as usize] as usize];
                    by_base.entry(base).or_default().push((exp, c));
                }
            }
        }
        let mut bases: Vec<Sym> = by_base.keys().copied().collect();
        bases.sort_unstable();
        let mut table = RunPeriodTable::default();
        for base in bases {
            let mut v = by_base.remove(&base).unwrap();
            v.sort_unstable();
            let exps: Vec<u32> = v.iter().map(|e| e.0).collect();
            let mut c = vec![0u64; v.len()];
            let mut c_prime = vec![0u64; v.len()];
            let (mut acc, mut acc_p) = (0u64, 0u64);
            for i in (0..v.len()).rev() {
                acc += v[i].1;
                acc_p += v[i].0 as u64 * v[i].1;
                c[i] = acc;
                c_prime[i] = acc_p;
            }
            table
                .keys
                .insert(kappa_prime_of(g, sigs, base), table.entries.len());
            table.entries.push(RunPeriodEntry {
                base,
                exps,
                c,
                c_prime,
            });
        }
        table
    }

    pub fn get(&self, key: &KappaPrime) -> Option<&RunPeriodEntry> {
        self.keys.get(key).map(|&i| &self.entries[i])
    }
}

impl RunPeriodEntry {
    /// Occurrences inside runs over this base of a string of period
    /// `|base|` that starts `q` symbols before a copy boundary and extends
    /// `rest` symbols past it, counting only runs that fit it in `s − 1`
    /// copies.
    pub fn correction(&self, base_len: u64, rest: u64) -> u64 {
        let i = self
            .exps
            .partition_point(|&s| (s as u64 - 1) * base_len < rest);
        if i == self.exps.len() {
            return 0;
        }
        self.c_prime[i] - self.c[i] * rest.div_ceil(base_len)
    }
}

impl Index {
    /// Number of occurrences of `p` in the raw text.
    pub fn count(&self, p: &[u8]) -> u64 {
        assert!(!p.is_empty(), "empty pattern");
        let m = p.len();
        if m == 1 {
            return self.term_counts[p[0] as usize];
        }
        let ss = parse_pattern(&self.grammar, p);
        if ss.is_abandoned() {
            return 0;
        }
        let pc = PatternCtx::new(self, p);
        let view = self.view();
        let period = shortest_period(p);
        let mut total = 0u64;
        for q in splits_for_search(&ss, m) {
            let xr = self.x.prefix_range(&view, &pc.x_query(q));
            if xr.is_empty() {
                continue;
            }
            let yr = self.y_count.prefix_range(&view, &pc.y_query(q));
            total += self
                .count_grid
                .sum_range(xr.start as u32..xr.end as u32, yr.start as u32..yr.end as u32);
            let rest = m - q;
            if rest > 2 * period && q <= period {
                total += self.run_correction(&pc, q, period);
            }
        }
        total
    }

    /// Occurrences inside long runs whose base is `P[q..q + period]`, which
    /// the grid misses because `P[q..]` is longer than two copies.
    fn run_correction(&self, pc: &PatternCtx, q: usize, period: usize) -> u64 {
        let key = pc.sigs.kappa_prime(q, q + period);
        let Some(e) = self.periods.get(&key) else {
            return 0;
        };
        let bl = self.grammar.exp_len(e.base);
        let same = bl == period as u64
            && Forward::new(&self.grammar, e.base, 0, bl).eq(pc.syms[q..q + period].iter().copied());
        if !same {
            return 0;
        }
        e.correction(bl, (pc.syms.len() - q) as u64)
    }

    /// Counts each pattern, in parallel when `exec` asks for it.
    pub fn count_batch(&self, patterns: &[Vec<u8>], exec: Exec) -> Vec<u64> {
        par::map(exec, patterns, |p| self.count(p))
    }
}
