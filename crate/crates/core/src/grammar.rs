//! Construction of the locally consistent run-length grammar.
//!
//! The wrapped text `# T $` is parsed in rounds. Each round collapses runs
//! into Run rules, draws a permutation of the round's alphabet, cuts blocks at
//! local minima and replaces every distinct block by a Block rule. Rounds stop
//! once a single symbol is left, which becomes the start symbol.
//!
//! A permutation is redrawn while the round adds more than
//! `budget_factor * δ_r` to the grammar size, keeping the best draw seen.

use std::ops::Range;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rustc_hash::{FxHashMap, FxHashSet};
use thiserror::Error;

use crate::delta::compute_delta_syms;
use crate::lcparse::{collapse_runs, valleys, Permutation};
use crate::{Sym, DOLLAR, FIRST_NONTERMINAL, HASH};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GrammarError {
    #[error("cannot index an empty text")]
    EmptyText,
    #[error("malformed grammar: {0}")]
    Structure(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Rule {
    /// `ends[k]` is the expansion length of `children[..=k]`.
    Block { children: Box<[Sym]>, ends: Box<[u64]> },
    Run { base: Sym, exp: u32 },
}

impl Rule {
    /// Size under the usual convention: arity for blocks, 2 for runs.
    pub fn size(&self) -> usize {
        match self {
            Rule::Block { children, .. } => children.len(),
            Rule::Run { .. } => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BuildConfig {
    pub budget_factor: f64,
    pub max_retries: u32,
}

impl Default for BuildConfig {
    fn default() -> Self {
        BuildConfig {
            budget_factor: 16.0,
            max_retries: 32,
        }
    }
}

/// Parsing tables of one round, needed again to parse patterns.
#[derive(Debug, Clone)]
pub struct RoundTables {
    pub perm: Permutation,
    /// Ids of the Run rules created in this round.
    pub runs: Range<Sym>,
    /// Ids of the Block rules created in this round.
    pub blocks: Range<Sym>,
    run_table: FxHashMap<(Sym, u32), Sym>,
    block_table: FxHashMap<Box<[Sym]>, Sym>,
}

impl RoundTables {
    pub fn run(&self, base: Sym, len: u32) -> Option<Sym> {
        self.run_table.get(&(base, len)).copied()
    }

    pub fn block(&self, children: &[Sym]) -> Option<Sym> {
        self.block_table.get(children).copied()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoundStats {
    pub len: usize,
    pub collapsed_len: usize,
    pub retries: u32,
    pub contribution: u64,
    pub delta: f64,
    pub within_budget: bool,
}

#[derive(Debug, Clone)]
pub struct Rlcfg {
    rules: Vec<Rule>,
    exp_len: Vec<u64>,
    start: Sym,
    rounds: Vec<RoundTables>,
    alphabet: Vec<u8>,
    round_stats: Vec<RoundStats>,
}

/// What a permutation source sees when asked for a round's ranks.
pub struct DrawContext<'a> {
    pub round: usize,
    /// Sorted alphabet of the round's sequence.
    pub alphabet: &'a [Sym],
    pub hash_role: Sym,
    pub dollar_role: Sym,
    /// Rules built so far, for sources that key ranks on expansions.
    pub grammar: &'a Rlcfg,
}

pub trait PermutationSource {
    /// Ranks aligned with `ctx.alphabet`, a bijection onto `1..=σ` that gives
    /// the `$`-role symbol rank 1 and the `#`-role symbol rank 2.
    fn draw(&mut self, ctx: &DrawContext<'_>) -> Vec<u32>;

    /// Whether redrawing can give a different permutation.
    fn is_random(&self) -> bool {
        true
    }
}

/// Fisher–Yates permutations from a seeded ChaCha generator.
pub struct RandomPermutations {
    rng: ChaCha8Rng,
}

impl RandomPermutations {
    pub fn new(seed: u64) -> Self {
        RandomPermutations {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }
}

impl PermutationSource for RandomPermutations {
    fn draw(&mut self, ctx: &DrawContext<'_>) -> Vec<u32> {
        let sigma = ctx.alphabet.len() as u32;
        let mut ranks: Vec<u32> = (1..=sigma).collect();
        ranks.shuffle(&mut self.rng);
        let pos = |s: Sym| ctx.alphabet.binary_search(&s).unwrap();
        for (role, want) in [(ctx.dollar_role, 1), (ctx.hash_role, 2)] {
            let at = pos(role);
            let holder = ranks.iter().position(|&r| r == want).unwrap();
            ranks.swap(at, holder);
        }
        ranks
    }
}

impl Rlcfg {
    fn empty() -> Self {
        Rlcfg {
            rules: Vec::new(),
            exp_len: vec![1; FIRST_NONTERMINAL as usize],
            start: HASH,
            rounds: Vec::new(),
            alphabet: Vec::new(),
            round_stats: Vec::new(),
        }
    }

    /// Assembles a grammar from explicit rules, checking that every rule only
    /// refers to smaller ids (which rules out cycles). `rules[k]` defines
    /// symbol `FIRST_NONTERMINAL + k`.
    pub fn from_rules(rules: Vec<Rule>, start: Sym) -> Result<Self, GrammarError> {
        let mut g = Rlcfg::empty();
        for rule in rules {
            g.push_rule(rule)?;
        }
        if start as usize >= g.exp_len.len() {
            return Err(GrammarError::Structure(format!("start symbol {start} has no rule")));
        }
        g.start = start;
        let mut seen = [false; 256];
        for s in g.expand(start) {
            if s < 256 {
                seen[s as usize] = true;
            }
        }
        g.alphabet = (0..=255u8).filter(|&b| seen[b as usize]).collect();
        Ok(g)
    }

    /// Assembles a grammar with its round tables, as produced by a build.
    pub(crate) fn from_parts(
        rules: Vec<Rule>,
        start: Sym,
        rounds: Vec<(Permutation, Range<Sym>, Range<Sym>)>,
        alphabet: Vec<u8>,
        round_stats: Vec<RoundStats>,
    ) -> Result<Self, GrammarError> {
        let mut g = Rlcfg::empty();
        for rule in rules {
            g.push_rule(rule)?;
        }
        if start as usize >= g.exp_len.len() {
            return Err(GrammarError::Structure(format!("start symbol {start} has no rule")));
        }
        g.start = start;
        g.alphabet = alphabet;
        g.round_stats = round_stats;
        for (perm, runs, blocks) in rounds {
            let mut run_table = FxHashMap::default();
            let mut block_table = FxHashMap::default();
            for id in runs.clone() {
                match g.rule(id) {
                    Some(Rule::Run { base, exp }) => {
                        run_table.insert((*base, *exp), id);
                    }
                    _ => return Err(GrammarError::Structure(format!("{id} is not a run rule"))),
                }
            }
            for id in blocks.clone() {
                match g.rule(id) {
                    Some(Rule::Block { children, .. }) => {
                        block_table.insert(children.clone(), id);
                    }
                    _ => return Err(GrammarError::Structure(format!("{id} is not a block rule"))),
                }
            }
            g.rounds.push(RoundTables {
                perm,
                runs,
                blocks,
                run_table,
                block_table,
            });
        }
        Ok(g)
    }

    fn push_rule(&mut self, rule: Rule) -> Result<Sym, GrammarError> {
        let id = self.exp_len.len() as Sym;
        let check = |s: Sym| {
            if s >= id {
                Err(GrammarError::Structure(format!(
                    "rule {id} refers to {s}, which is not defined before it"
                )))
            } else {
                Ok(())
            }
        };
        let len = match &rule {
            Rule::Block { children, ends } => {
                if children.len() < 2 || ends.len() != children.len() {
                    return Err(GrammarError::Structure(format!("block rule {id} has arity < 2")));
                }
                let mut acc = 0;
                for (k, &c) in children.iter().enumerate() {
                    check(c)?;
                    acc += self.exp_len[c as usize];
                    if ends[k] != acc {
                        return Err(GrammarError::Structure(format!("block rule {id} has bad lengths")));
                    }
                }
                acc
            }
            Rule::Run { base, exp } => {
                check(*base)?;
                if *exp < 2 {
                    return Err(GrammarError::Structure(format!("run rule {id} has exponent < 2")));
                }
                self.exp_len[*base as usize] * *exp as u64
            }
        };
        self.rules.push(rule);
        self.exp_len.push(len);
        Ok(id)
    }

    fn add_block(&mut self, children: &[Sym]) -> Sym {
        let mut ends = Vec::with_capacity(children.len());
        let mut acc = 0;
        for &c in children {
            acc += self.exp_len[c as usize];
            ends.push(acc);
        }
        let id = self.exp_len.len() as Sym;
        self.rules.push(Rule::Block {
            children: children.into(),
            ends: ends.into(),
        });
        self.exp_len.push(acc);
        id
    }

    fn add_run(&mut self, base: Sym, exp: u32) -> Sym {
        let id = self.exp_len.len() as Sym;
        self.rules.push(Rule::Run { base, exp });
        self.exp_len.push(self.exp_len[base as usize] * exp as u64);
        id
    }

    pub fn start(&self) -> Sym {
        self.start
    }

    /// Number of symbol ids in use, terminals included.
    pub fn num_symbols(&self) -> usize {
        self.exp_len.len()
    }

    pub fn is_nonterminal(&self, s: Sym) -> bool {
        s >= FIRST_NONTERMINAL
    }

    pub fn rule(&self, s: Sym) -> Option<&Rule> {
        s.checked_sub(FIRST_NONTERMINAL)
            .and_then(|k| self.rules.get(k as usize))
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    #[inline]
    pub fn exp_len(&self, s: Sym) -> u64 {
        self.exp_len[s as usize]
    }

    /// Length of the wrapped text.
    pub fn text_len(&self) -> u64 {
        self.exp_len(self.start)
    }

    pub fn rounds(&self) -> &[RoundTables] {
        &self.rounds
    }

    pub fn round_stats(&self) -> &[RoundStats] {
        &self.round_stats
    }

    /// Bytes occurring in the text, sorted.
    pub fn alphabet(&self) -> &[u8] {
        &self.alphabet
    }

    pub fn has_byte(&self, b: u8) -> bool {
        self.alphabet.binary_search(&b).is_ok()
    }

    /// Grammar size: sum of rule sizes.
    pub fn size(&self) -> usize {
        self.rules.iter().map(Rule::size).sum()
    }

    /// Full expansion of `s`.
    pub fn expand(&self, s: Sym) -> Vec<Sym> {
        let mut out = Vec::with_capacity(self.exp_len(s) as usize);
        let mut stack = vec![s];
        while let Some(x) = stack.pop() {
            match self.rule(x) {
                None => out.push(x),
                Some(Rule::Block { children, .. }) => stack.extend(children.iter().rev()),
                Some(Rule::Run { base, exp }) => {
                    stack.extend(std::iter::repeat_n(*base, *exp as usize))
                }
            }
        }
        out
    }

    /// Heights of all symbols; terminals have height 0.
    pub fn heights(&self) -> Vec<u32> {
        let mut h = vec![0u32; self.num_symbols()];
        for (k, rule) in self.rules.iter().enumerate() {
            let id = FIRST_NONTERMINAL as usize + k;
            h[id] = 1 + match rule {
                Rule::Block { children, .. } => {
                    children.iter().map(|&c| h[c as usize]).max().unwrap()
                }
                Rule::Run { base, .. } => h[*base as usize],
            };
        }
        h
    }
}

/// Wraps a text in the sentinels.
pub fn wrap(text: &[u8]) -> Vec<Sym> {
    let mut v = Vec::with_capacity(text.len() + 2);
    v.push(HASH);
    v.extend(text.iter().map(|&b| b as Sym));
    v.push(DOLLAR);
    v
}

pub fn build_grammar(text: &[u8], seed: u64, config: &BuildConfig) -> Result<Rlcfg, GrammarError> {
    build_with_source(text, &mut RandomPermutations::new(seed), config)
}

pub fn build_with_source(
    text: &[u8],
    source: &mut dyn PermutationSource,
    config: &BuildConfig,
) -> Result<Rlcfg, GrammarError> {
    Ok(build_with_trace(text, source, config)?.0)
}

/// Builds the grammar and also returns every round's sequence `T_0, T_1, …`.
pub fn build_with_trace(
    text: &[u8],
    source: &mut dyn PermutationSource,
    config: &BuildConfig,
) -> Result<(Rlcfg, Vec<Vec<Sym>>), GrammarError> {
    if text.is_empty() {
        return Err(GrammarError::EmptyText);
    }
    let mut g = Rlcfg::empty();
    let mut seen = [false; 256];
    for &b in text {
        seen[b as usize] = true;
    }
    g.alphabet = (0..=255u8).filter(|&b| seen[b as usize]).collect();

    let mut trace = vec![wrap(text)];
    let mut alphabet: Vec<Sym> = g.alphabet.iter().map(|&b| b as Sym).collect();
    alphabet.extend([HASH, DOLLAR]);
    let mut lo = 0;
    let guard = 2 * (64 - (trace[0].len() as u64).leading_zeros()) as usize + 2;

    while trace.last().unwrap().len() > 1 {
        assert!(g.rounds.len() < guard, "round count exceeded its guard");
        let cur = trace.last().unwrap();
        let (next, tables, stats) = run_round(&mut g, cur, &alphabet, lo, source, config);
        lo = tables.blocks.start;
        alphabet = tables.blocks.clone().collect();
        g.rounds.push(tables);
        g.round_stats.push(stats);
        trace.push(next);
    }
    g.start = trace.last().unwrap()[0];
    Ok((g, trace))
}

fn run_round(
    g: &mut Rlcfg,
    cur: &[Sym],
    alphabet: &[Sym],
    lo: Sym,
    source: &mut dyn PermutationSource,
    config: &BuildConfig,
) -> (Vec<Sym>, RoundTables, RoundStats) {
    let round = g.rounds.len();
    let rc = collapse_runs(cur);

    // Run rules do not depend on the permutation.
    let run_start = g.num_symbols() as Sym;
    let mut run_table = FxHashMap::default();
    let mut hat = Vec::with_capacity(rc.len());
    for (base, len) in rc.entries() {
        if len >= 2 {
            let id = *run_table
                .entry((base, len))
                .or_insert_with(|| g.add_run(base, len));
            hat.push(id);
        } else {
            hat.push(base);
        }
    }
    let runs = run_start..g.num_symbols() as Sym;
    let run_cost = 2 * runs.len() as u64;

    let delta = compute_delta_syms(cur).delta;
    let budget = config.budget_factor * delta;
    let hash_role = cur[0];
    let dollar_role = *cur.last().unwrap();
    let attempts = if source.is_random() {
        config.max_retries + 1
    } else {
        1
    };

    let mut best: Option<(u64, Vec<usize>, Permutation)> = None;
    let mut tried = 0;
    for _ in 0..attempts {
        tried += 1;
        let ranks = source.draw(&DrawContext {
            round,
            alphabet,
            hash_role,
            dollar_role,
            grammar: g,
        });
        let perm = dense_permutation(alphabet, lo, &ranks);
        let base_ranks: Vec<u32> = rc.bases.iter().map(|&b| perm.rank(b).unwrap()).collect();
        let minima = valleys(&base_ranks);
        let mut distinct: FxHashSet<&[Sym]> = FxHashSet::default();
        let mut cost = run_cost;
        for (a, b) in block_spans(&minima, hat.len()) {
            if distinct.insert(&hat[a..b]) {
                cost += (b - a) as u64;
            }
        }
        let better = best.as_ref().is_none_or(|(c, _, _)| cost < *c);
        if better {
            best = Some((cost, minima, perm));
        }
        if cost as f64 <= budget {
            break;
        }
    }
    let (contribution, minima, perm) = best.unwrap();

    let block_start = g.num_symbols() as Sym;
    let mut ids: FxHashMap<&[Sym], Sym> = FxHashMap::default();
    let mut next = Vec::with_capacity(minima.len() + 1);
    for (a, b) in block_spans(&minima, hat.len()) {
        let slice = &hat[a..b];
        let id = match ids.get(slice) {
            Some(&id) => id,
            None => {
                let id = g.add_block(slice);
                ids.insert(slice, id);
                id
            }
        };
        next.push(id);
    }
    let blocks = block_start..g.num_symbols() as Sym;
    let block_table = ids.into_iter().map(|(k, v)| (k.into(), v)).collect();

    let stats = RoundStats {
        len: cur.len(),
        collapsed_len: hat.len(),
        retries: tried - 1,
        contribution,
        delta,
        within_budget: contribution as f64 <= budget,
    };
    let tables = RoundTables {
        perm,
        runs,
        blocks,
        run_table,
        block_table,
    };
    (next, tables, stats)
}

/// Half-open collapsed spans of the blocks ending at each minimum and at the end.
pub(crate) fn block_spans(minima: &[usize], n: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
    let ends = minima.iter().map(|&k| k + 1).chain(std::iter::once(n));
    let mut start = 0;
    ends.map(move |e| {
        let span = (start, e);
        start = e;
        span
    })
}

fn dense_permutation(alphabet: &[Sym], lo: Sym, ranks: &[u32]) -> Permutation {
    let hi = *alphabet.last().unwrap();
    let mut dense = vec![0u32; (hi - lo) as usize + 1];
    for (&s, &r) in alphabet.iter().zip(ranks) {
        dense[(s - lo) as usize] = r;
    }
    Permutation::new(lo, dense)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GrammarStats {
    pub text_len: u64,
    pub size: usize,
    pub rules: usize,
    pub rounds: usize,
    pub height: u32,
    pub retries: Vec<u32>,
    pub delta: f64,
    /// `size / (δ · log₂(n / δ))`, with the logarithm floored at 1.
    pub ratio: f64,
}

/// Summary figures of a grammar. δ is that of the wrapped text.
pub fn grammar_stats(g: &Rlcfg) -> GrammarStats {
    let n = g.text_len();
    let delta = g.round_stats.first().map_or(1.0, |s| s.delta);
    let height = g.heights()[g.start as usize];
    let log = (n as f64 / delta).log2().max(1.0);
    GrammarStats {
        text_len: n,
        size: g.size(),
        rules: g.rules.len(),
        rounds: g.rounds.len(),
        height,
        retries: g.round_stats.iter().map(|s| s.retries).collect(),
        delta,
        ratio: g.size() as f64 / (delta * log),
    }
}
