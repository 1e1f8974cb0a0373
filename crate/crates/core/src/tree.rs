//! The grammar tree: the parse tree pruned so that every nonterminal keeps a
//! single internal node, its leftmost occurrence in preorder. A Run rule
//! `A → B^s` has two children, `B` and a pseudo-leaf standing for `B^(s−1)`.
//!
//! Per node the tree stores `anc` (nearest proper ancestor that is the root or
//! has a `next` link), `offs` (start offset relative to `anc`) and `next` (the
//! following node with the same label in preorder; the first child of a run
//! links to its pseudo-leaf, whose `next` continues the label chain).

use crate::grammar::{Rlcfg, Rule};
use crate::Sym;

pub const NONE: u32 = u32::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum NodeKind {
    Terminal = 0,
    Internal = 1,
    /// A leaf for a nonterminal whose internal node is elsewhere.
    Leaf = 2,
    Pseudo = 3,
}

impl NodeKind {
    pub fn from_u8(b: u8) -> Option<Self> {
        Some(match b {
            0 => NodeKind::Terminal,
            1 => NodeKind::Internal,
            2 => NodeKind::Leaf,
            3 => NodeKind::Pseudo,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrammarTree {
    pub label: Vec<Sym>,
    pub kind: Vec<NodeKind>,
    pub parent: Vec<u32>,
    /// Children of node `v` are `children[child_start[v]..child_start[v + 1]]`.
    pub child_start: Vec<u32>,
    pub children: Vec<u32>,
    pub anc: Vec<u32>,
    pub offs: Vec<u64>,
    pub next: Vec<u32>,
    /// Internal node of each symbol, `NONE` for terminals.
    pub internal: Vec<u32>,
    /// Sorted start positions (0-based, wrapped text) of the leaves.
    pub phrase_starts: Vec<u64>,
}

impl GrammarTree {
    pub const ROOT: u32 = 0;

    pub fn len(&self) -> usize {
        self.label.len()
    }

    pub fn is_empty(&self) -> bool {
        self.label.is_empty()
    }

    pub fn children_of(&self, v: u32) -> &[u32] {
        let a = self.child_start[v as usize] as usize;
        let b = self.child_start[v as usize + 1] as usize;
        &self.children[a..b]
    }

    pub fn next_of(&self, v: u32) -> Option<u32> {
        let n = self.next[v as usize];
        (n != NONE).then_some(n)
    }

    pub fn is_branching(&self, v: u32) -> bool {
        v == Self::ROOT || self.next[v as usize] != NONE
    }

    /// Start offset of each child of `v` within `exp(label(v))`.
    fn child_offsets<'a>(&'a self, g: &'a Rlcfg, v: u32) -> impl Iterator<Item = (u32, u64)> + 'a {
        let kids = self.children_of(v);
        let label = self.label[v as usize];
        kids.iter().enumerate().map(move |(k, &c)| {
            let off = match g.rule(label) {
                Some(Rule::Block { ends, .. }) => {
                    if k == 0 {
                        0
                    } else {
                        ends[k - 1]
                    }
                }
                Some(&Rule::Run { base, .. }) => k as u64 * g.exp_len(base),
                None => unreachable!(),
            };
            (c, off)
        })
    }

    /// Start position of every node in the wrapped text, by a top-down pass
    /// (parents precede their children in preorder).
    pub fn positions(&self, g: &Rlcfg) -> Vec<u64> {
        let mut pos = vec![0u64; self.len()];
        for v in 0..self.len() as u32 {
            if self.kind[v as usize] == NodeKind::Internal {
                for (c, off) in self.child_offsets(g, v) {
                    pos[c as usize] = pos[v as usize] + off;
                }
            }
        }
        pos
    }

    /// Exponent of the run rule that is the parent of the run's first child
    /// `v`, if `v` is such a child.
    pub fn run_exponent_of_child(&self, g: &Rlcfg, v: u32) -> Option<u32> {
        let p = self.parent[v as usize];
        if p == NONE {
            return None;
        }
        match g.rule(self.label[p as usize]) {
            Some(&Rule::Run { exp, .. }) if self.children_of(p)[0] == v => Some(exp),
            _ => None,
        }
    }

    /// Recomputes `anc`, `offs` and `phrase_starts` from the structural
    /// fields and `next`.
    pub(crate) fn derive_fields(&mut self, g: &Rlcfg) {
        let n = self.len();
        let pos = self.positions(g);
        self.anc = vec![NONE; n];
        self.offs = vec![0; n];
        for v in 1..n {
            let p = self.parent[v];
            let a = if self.is_branching(p) {
                p
            } else {
                self.anc[p as usize]
            };
            self.anc[v] = a;
            self.offs[v] = pos[v] - pos[a as usize];
        }
        let mut starts: Vec<u64> = (0..n)
            .filter(|&v| self.kind[v] != NodeKind::Internal)
            .map(|v| pos[v])
            .collect();
        starts.sort_unstable();
        self.phrase_starts = starts;
    }
}

pub fn build_grammar_tree(g: &Rlcfg) -> GrammarTree {
    let mut t = GrammarTree {
        label: Vec::new(),
        kind: Vec::new(),
        parent: Vec::new(),
        child_start: Vec::new(),
        children: Vec::new(),
        anc: Vec::new(),
        offs: Vec::new(),
        next: Vec::new(),
        internal: vec![NONE; g.num_symbols()],
        phrase_starts: Vec::new(),
    };
    // Child slots are filled as the children are created; `slots[v]` holds
    // the slot range of node `v`.
    let mut slots: Vec<(u32, u32)> = Vec::new();
    // (label, parent, slot, pseudo)
    let mut stack: Vec<(Sym, u32, u32, bool)> = vec![(g.start(), NONE, NONE, false)];
    while let Some((label, parent, slot, pseudo)) = stack.pop() {
        let v = t.label.len() as u32;
        if slot != NONE {
            t.children[slot as usize] = v;
        }
        t.label.push(label);
        t.parent.push(parent);
        let kind = if pseudo {
            NodeKind::Pseudo
        } else if !g.is_nonterminal(label) {
            NodeKind::Terminal
        } else if t.internal[label as usize] != NONE {
            NodeKind::Leaf
        } else {
            NodeKind::Internal
        };
        t.kind.push(kind);
        let first = t.children.len() as u32;
        if kind == NodeKind::Internal {
            t.internal[label as usize] = v;
            match g.rule(label).unwrap() {
                Rule::Block { children, .. } => {
                    t.children.extend(std::iter::repeat_n(NONE, children.len()));
                    for (k, &c) in children.iter().enumerate().rev() {
                        stack.push((c, v, first + k as u32, false));
                    }
                }
                &Rule::Run { base, .. } => {
                    t.children.extend([NONE, NONE]);
                    stack.push((base, v, first + 1, true));
                    stack.push((base, v, first, false));
                }
            }
        }
        slots.push((first, t.children.len() as u32));
    }
    // Children were allocated in creation order, so slot ranges are
    // contiguous and increasing.
    t.child_start = slots.iter().map(|s| s.0).collect();
    t.child_start.push(t.children.len() as u32);

    let n = t.len();
    t.next = vec![NONE; n];
    let mut last = vec![NONE; g.num_symbols()];
    for v in 0..n as u32 {
        if t.kind[v as usize] == NodeKind::Pseudo {
            continue;
        }
        let label = t.label[v as usize] as usize;
        let prev = last[label];
        if prev != NONE {
            // A run's first child already points at its pseudo-leaf.
            let from = match t.next[prev as usize] {
                NONE => prev,
                pseudo => pseudo,
            };
            t.next[from as usize] = v;
        }
        last[label] = v;
        if t.run_exponent_of_child(g, v).is_some() {
            let p = t.parent[v as usize];
            t.next[v as usize] = t.children_of(p)[1];
        }
    }
    t.derive_fields(g);
    t
}
