//! Streaming expansion of grammar symbols.
//!
//! The iterators keep an explicit stack of partially consumed rules, so every
//! emitted terminal costs O(1) amortized after an initial O(height) descent.

use crate::grammar::{Rlcfg, Rule};
use crate::Sym;

#[derive(Debug, Clone, Copy)]
enum Frame {
    /// Children of `rule` from index `next` on (forward) or down to `next`
    /// (reverse).
    Kids { rule: Sym, next: u32 },
    /// `left` more copies of `sym`.
    Repeat { sym: Sym, left: u64 },
}

fn children(g: &Rlcfg, rule: Sym) -> &[Sym] {
    match g.rule(rule) {
        Some(Rule::Block { children, .. }) => children,
        _ => unreachable!("frame over a non-block rule"),
    }
}

/// Left-to-right stream of terminals.
#[derive(Clone)]
pub struct Forward<'g> {
    g: &'g Rlcfg,
    stack: Vec<Frame>,
    pending: Option<Sym>,
    remaining: u64,
}

impl<'g> Forward<'g> {
    /// `exp(sym)[offset..offset + len]`, clipped to the expansion.
    pub fn new(g: &'g Rlcfg, sym: Sym, offset: u64, len: u64) -> Self {
        let total = g.exp_len(sym);
        let remaining = len.min(total.saturating_sub(offset));
        let mut it = Forward {
            g,
            stack: Vec::new(),
            pending: None,
            remaining,
        };
        if remaining > 0 {
            it.pending = Some(it.descend(sym, offset));
        }
        it
    }

    /// Concatenated expansions of the children of block rule `rule` from
    /// child `first` on, limited to `len` terminals.
    pub fn rule_suffix(g: &'g Rlcfg, rule: Sym, first: u32, len: u64) -> Self {
        let (arity, skipped) = match g.rule(rule) {
            Some(Rule::Block { children, ends }) => {
                let skipped = if first == 0 { 0 } else { ends[first as usize - 1] };
                (children.len() as u32, skipped)
            }
            _ => panic!("{rule} is not a block rule"),
        };
        let mut it = Forward {
            g,
            stack: Vec::new(),
            pending: None,
            remaining: len.min(g.exp_len(rule) - skipped),
        };
        if first < arity {
            it.stack.push(Frame::Kids { rule, next: first });
        }
        it
    }

    /// `exp(sym)^k`, limited to `len` terminals.
    pub fn power(g: &'g Rlcfg, sym: Sym, k: u64, len: u64) -> Self {
        let mut it = Forward {
            g,
            stack: Vec::new(),
            pending: None,
            remaining: len.min(k * g.exp_len(sym)),
        };
        if k > 0 {
            it.stack.push(Frame::Repeat { sym, left: k });
        }
        it
    }

    fn descend(&mut self, mut sym: Sym, mut off: u64) -> Sym {
        loop {
            match self.g.rule(sym) {
                None => return sym,
                Some(Rule::Block { children, ends }) => {
                    let j = ends.partition_point(|&e| e <= off);
                    if j + 1 < children.len() {
                        self.stack.push(Frame::Kids {
                            rule: sym,
                            next: j as u32 + 1,
                        });
                    }
                    if j > 0 {
                        off -= ends[j - 1];
                    }
                    sym = children[j];
                }
                Some(&Rule::Run { base, exp }) => {
                    let bl = self.g.exp_len(base);
                    let j = off / bl;
                    let left = exp as u64 - 1 - j;
                    if left > 0 {
                        self.stack.push(Frame::Repeat { sym: base, left });
                    }
                    off %= bl;
                    sym = base;
                }
            }
        }
    }
}

impl Iterator for Forward<'_> {
    type Item = Sym;

    fn next(&mut self) -> Option<Sym> {
        if self.remaining == 0 {
            return None;
        }
        self.remaining -= 1;
        if let Some(s) = self.pending.take() {
            return Some(s);
        }
        let sym = match self.stack.pop()? {
            Frame::Kids { rule, next } => {
                let kids = children(self.g, rule);
                if (next as usize) + 1 < kids.len() {
                    self.stack.push(Frame::Kids {
                        rule,
                        next: next + 1,
                    });
                }
                kids[next as usize]
            }
            Frame::Repeat { sym, left } => {
                if left > 1 {
                    self.stack.push(Frame::Repeat {
                        sym,
                        left: left - 1,
                    });
                }
                sym
            }
        };
        Some(self.descend(sym, 0))
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        (self.remaining as usize, Some(self.remaining as usize))
    }
}

/// Right-to-left stream of terminals.
#[derive(Clone)]
pub struct Reverse<'g> {
    g: &'g Rlcfg,
    stack: Vec<Frame>,
    pending: Option<Sym>,
    remaining: u64,
}

impl<'g> Reverse<'g> {
    /// `exp(sym)[..end]` read backwards, at most `len` terminals.
    pub fn new(g: &'g Rlcfg, sym: Sym, end: u64, len: u64) -> Self {
        let end = end.min(g.exp_len(sym));
        let remaining = len.min(end);
        let mut it = Reverse {
            g,
            stack: Vec::new(),
            pending: None,
            remaining,
        };
        if remaining > 0 {
            it.pending = Some(it.descend(sym, end));
        }
        it
    }

    /// The whole of `exp(sym)` read backwards.
    pub fn of(g: &'g Rlcfg, sym: Sym) -> Self {
        let l = g.exp_len(sym);
        Reverse::new(g, sym, l, l)
    }

    fn descend(&mut self, mut sym: Sym, mut end: u64) -> Sym {
        loop {
            match self.g.rule(sym) {
                None => return sym,
                Some(Rule::Block { children, ends }) => {
                    let j = ends.partition_point(|&e| e < end);
                    if j > 0 {
                        self.stack.push(Frame::Kids {
                            rule: sym,
                            next: j as u32 - 1,
                        });
                        end -= ends[j - 1];
                    }
                    sym = children[j];
                }
                Some(&Rule::Run { base, .. }) => {
                    let bl = self.g.exp_len(base);
                    let j = (end - 1) / bl;
                    if j > 0 {
                        self.stack.push(Frame::Repeat { sym: base, left: j });
                    }
                    end -= j * bl;
                    sym = base;
                }
            }
        }
    }
}

impl Iterator for Reverse<'_> {
    type Item = Sym;

    fn next(&mut self) -> Option<Sym> {
        if self.remaining == 0 {
            return None;
        }
        self.remaining -= 1;
        if let Some(s) = self.pending.take() {
            return Some(s);
        }
        let sym = match self.stack.pop()? {
            Frame::Kids { rule, next } => {
                if next > 0 {
                    self.stack.push(Frame::Kids {
                        rule,
                        next: next - 1,
                    });
                }
                children(self.g, rule)[next as usize]
            }
            Frame::Repeat { sym, left } => {
                if left > 1 {
                    self.stack.push(Frame::Repeat {
                        sym,
                        left: left - 1,
                    });
                }
                sym
            }
        };
        let l = self.g.exp_len(sym);
        Some(self.descend(sym, l))
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        (self.remaining as usize, Some(self.remaining as usize))
    }
}

/// First `len` terminals of `exp(sym)`.
pub fn expand_prefix(g: &Rlcfg, sym: Sym, len: u64) -> Forward<'_> {
    Forward::new(g, sym, 0, len)
}

/// Last `len` terminals of `exp(sym)`, emitted from the end backwards.
pub fn expand_suffix(g: &Rlcfg, sym: Sym, len: u64) -> Reverse<'_> {
    Reverse::new(g, sym, g.exp_len(sym), len)
}

/// Terminal at `off` in `exp(sym)`.
pub fn char_at(g: &Rlcfg, mut sym: Sym, mut off: u64) -> Sym {
    loop {
        match g.rule(sym) {
            None => return sym,
            Some(Rule::Block { children, ends }) => {
                let j = ends.partition_point(|&e| e <= off);
                if j > 0 {
                    off -= ends[j - 1];
                }
                sym = children[j];
            }
            Some(&Rule::Run { base, .. }) => {
                off %= g.exp_len(base);
                sym = base;
            }
        }
    }
}
