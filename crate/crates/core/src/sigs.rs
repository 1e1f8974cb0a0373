//! Fingerprints of prefixes of grammar expansions.
//!
//! Every Block rule stores the signatures of its child prefixes and of its
//! reversed child suffixes; Run rules use the closed form for powers. A prefix
//! signature of any expansion then takes one descent of the grammar.

use crate::fingerprint::{sig_concat, sig_split_right, FingerprintContext, SignatureTriple};
use crate::grammar::{Rlcfg, Rule};
use crate::{Sym, FIRST_NONTERMINAL};

#[derive(Debug, Clone)]
pub struct PrefixSigTables {
    ctx: FingerprintContext,
    full: Vec<SignatureTriple>,
    full_rev: Vec<SignatureTriple>,
    /// Per rule: start of its entries in `pre` and `rsuf` (Block rules hold
    /// arity + 1 entries each, Run rules none).
    start: Vec<u32>,
    /// `pre[start + j]` is the signature of the first `j` children.
    pre: Vec<SignatureTriple>,
    /// `rsuf[start + t]` is the signature of the last `t` children, reversed.
    rsuf: Vec<SignatureTriple>,
    /// Per Run rule, `(c^|base| − 1)^{−1}`, or 0 when undefined.
    run_den: Vec<u64>,
}

impl PrefixSigTables {
    pub fn build(g: &Rlcfg, ctx: &FingerprintContext) -> Self {
        let n = g.num_symbols();
        let mut full = Vec::with_capacity(n);
        for s in 0..FIRST_NONTERMINAL {
            full.push(ctx.symbol(s));
        }
        let mut full_rev = full.clone();
        let mut start = Vec::with_capacity(g.rules().len());
        let mut pre = Vec::new();
        let mut rsuf = Vec::new();
        let mut run_den = Vec::with_capacity(g.rules().len());
        for rule in g.rules() {
            start.push(pre.len() as u32);
            match rule {
                Rule::Block { children, .. } => {
                    let base = pre.len();
                    pre.push(SignatureTriple::EMPTY);
                    rsuf.push(SignatureTriple::EMPTY);
                    for (j, &c) in children.iter().enumerate() {
                        let p = sig_concat(pre[base + j], full[c as usize]);
                        pre.push(p);
                        let back = children[children.len() - 1 - j];
                        let r = sig_concat(rsuf[base + j], full_rev[back as usize]);
                        rsuf.push(r);
                    }
                    full.push(*pre.last().unwrap());
                    full_rev.push(*rsuf.last().unwrap());
                    run_den.push(0);
                }
                &Rule::Run { base, exp } => {
                    let b = full[base as usize];
                    let den = ctx.power_denominator(b);
                    full.push(ctx.sig_power(b, exp as u64, den));
                    full_rev.push(ctx.sig_power(full_rev[base as usize], exp as u64, den));
                    run_den.push(den.unwrap_or(0));
                }
            }
        }
        PrefixSigTables {
            ctx: *ctx,
            full,
            full_rev,
            start,
            pre,
            rsuf,
            run_den,
        }
    }

    pub fn context(&self) -> &FingerprintContext {
        &self.ctx
    }

    pub fn full(&self, s: Sym) -> SignatureTriple {
        self.full[s as usize]
    }

    pub fn full_rev(&self, s: Sym) -> SignatureTriple {
        self.full_rev[s as usize]
    }

    fn rule_index(s: Sym) -> usize {
        (s - FIRST_NONTERMINAL) as usize
    }

    /// Signature of the first `j` children of block rule `s`.
    pub fn child_prefix(&self, s: Sym, j: usize) -> SignatureTriple {
        self.pre[self.start[Self::rule_index(s)] as usize + j]
    }

    fn den(&self, run: Sym) -> Option<u64> {
        match self.run_den[Self::rule_index(run)] {
            0 => None,
            d => Some(d),
        }
    }

    /// Signature of `exp(base)^k` where `run` is a Run rule over `base`.
    pub fn power(&self, run: Sym, base: Sym, k: u64) -> SignatureTriple {
        self.ctx.sig_power(self.full(base), k, self.den(run))
    }

    fn power_rev(&self, run: Sym, base: Sym, k: u64) -> SignatureTriple {
        self.ctx.sig_power(self.full_rev(base), k, self.den(run))
    }

    /// Signature of the length-`len` prefix of `exp(s)`.
    pub fn prefix(&self, g: &Rlcfg, mut s: Sym, mut len: u64) -> SignatureTriple {
        let mut acc = SignatureTriple::EMPTY;
        loop {
            if len == 0 {
                return acc;
            }
            if len == g.exp_len(s) {
                return sig_concat(acc, self.full(s));
            }
            match g.rule(s) {
                Some(Rule::Block { children, ends }) => {
                    let j = ends.partition_point(|&e| e <= len);
                    acc = sig_concat(acc, self.child_prefix(s, j));
                    if j > 0 {
                        len -= ends[j - 1];
                    }
                    s = children[j];
                }
                Some(&Rule::Run { base, .. }) => {
                    let bl = g.exp_len(base);
                    let k = len / bl;
                    acc = sig_concat(acc, self.power(s, base, k));
                    len -= k * bl;
                    s = base;
                }
                None => unreachable!("partial prefix of a terminal"),
            }
        }
    }

    /// Signature of the last `len` terminals of `exp(s)`, reversed.
    pub fn rev_suffix(&self, g: &Rlcfg, mut s: Sym, mut len: u64) -> SignatureTriple {
        let mut acc = SignatureTriple::EMPTY;
        loop {
            if len == 0 {
                return acc;
            }
            let total = g.exp_len(s);
            if len == total {
                return sig_concat(acc, self.full_rev(s));
            }
            match g.rule(s) {
                Some(Rule::Block { children, ends }) => {
                    let from = total - len;
                    let j = ends.partition_point(|&e| e <= from);
                    let t = children.len() - 1 - j;
                    acc = sig_concat(acc, self.rsuf[self.start[Self::rule_index(s)] as usize + t]);
                    len -= total - ends[j];
                    s = children[j];
                }
                Some(&Rule::Run { base, .. }) => {
                    let bl = g.exp_len(base);
                    let k = len / bl;
                    acc = sig_concat(acc, self.power_rev(s, base, k));
                    len -= k * bl;
                    s = base;
                }
                None => unreachable!("partial suffix of a terminal"),
            }
        }
    }

    /// Signature of the forward suffix of length `len` of `exp(s)`.
    pub fn suffix(&self, g: &Rlcfg, s: Sym, len: u64) -> SignatureTriple {
        let head = self.prefix(g, s, g.exp_len(s) - len);
        sig_split_right(self.full(s), head)
    }

    /// Signature of the first `len` terminals of the children of block rule
    /// `s` from child `first` on.
    pub fn rule_suffix_prefix(&self, g: &Rlcfg, s: Sym, first: usize, len: u64) -> SignatureTriple {
        let skipped = match g.rule(s) {
            Some(Rule::Block { ends, .. }) => {
                if first == 0 {
                    0
                } else {
                    ends[first - 1]
                }
            }
            _ => panic!("{s} is not a block rule"),
        };
        let whole = self.prefix(g, s, skipped + len);
        sig_split_right(whole, self.child_prefix(s, first))
    }

    /// Signature of the first `len` terminals of `exp(base)^∞`.
    pub fn power_prefix(&self, g: &Rlcfg, run: Sym, base: Sym, len: u64) -> SignatureTriple {
        let bl = g.exp_len(base);
        let k = len / bl;
        sig_concat(self.power(run, base, k), self.prefix(g, base, len - k * bl))
    }
}
