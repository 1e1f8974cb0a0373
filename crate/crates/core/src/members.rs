//! Lexicographically ranked sets of virtual strings.
//!
//! Members are never materialized: a handle names a reversed expansion, the
//! expansion of a rule's trailing children, or a power of a run's base. They
//! are compared by streaming extraction, with prefix fingerprints used to skip
//! over long common prefixes.

use std::cmp::Ordering;
use std::ops::Range;

use crate::expand::{char_at, Forward, Reverse};
use crate::fingerprint::{gallop, SignatureTriple, TextSigs};
use crate::grammar::{Rlcfg, Rule};
use crate::par::{self, Exec};
use crate::sigs::PrefixSigTables;
use crate::Sym;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Handle {
    /// `exp(A)` reversed.
    Rev(Sym),
    /// Expansions of the children of block rule `rule` from `first` on.
    Suffix { rule: Sym, first: u32 },
    /// `exp(base)^k` for the run rule `run → base^s`.
    Power { run: Sym, k: u32 },
}

/// Read access to member contents.
#[derive(Clone, Copy)]
pub struct MemberView<'a> {
    pub g: &'a Rlcfg,
    pub sigs: &'a PrefixSigTables,
}

fn run_base(g: &Rlcfg, run: Sym) -> Sym {
    match g.rule(run) {
        Some(&Rule::Run { base, .. }) => base,
        _ => panic!("{run} is not a run rule"),
    }
}

fn skipped(g: &Rlcfg, rule: Sym, first: u32) -> u64 {
    match g.rule(rule) {
        Some(Rule::Block { ends, .. }) => {
            if first == 0 {
                0
            } else {
                ends[first as usize - 1]
            }
        }
        _ => panic!("{rule} is not a block rule"),
    }
}

/// Streams a member's symbols.
pub enum MemberIter<'a> {
    Fwd(Forward<'a>),
    Rev(Reverse<'a>),
}

impl Iterator for MemberIter<'_> {
    type Item = Sym;

    fn next(&mut self) -> Option<Sym> {
        match self {
            MemberIter::Fwd(f) => f.next(),
            MemberIter::Rev(r) => r.next(),
        }
    }
}

impl<'a> MemberView<'a> {
    pub fn len(&self, h: Handle) -> u64 {
        match h {
            Handle::Rev(a) => self.g.exp_len(a),
            Handle::Suffix { rule, first } => self.g.exp_len(rule) - skipped(self.g, rule, first),
            Handle::Power { run, k } => self.g.exp_len(run_base(self.g, run)) * k as u64,
        }
    }

    pub fn char_at(&self, h: Handle, k: u64) -> Sym {
        match h {
            Handle::Rev(a) => char_at(self.g, a, self.g.exp_len(a) - 1 - k),
            Handle::Suffix { rule, first } => char_at(self.g, rule, skipped(self.g, rule, first) + k),
            Handle::Power { run, .. } => {
                let base = run_base(self.g, run);
                char_at(self.g, base, k % self.g.exp_len(base))
            }
        }
    }

    pub fn stream(&self, h: Handle) -> MemberIter<'a> {
        match h {
            Handle::Rev(a) => MemberIter::Rev(Reverse::of(self.g, a)),
            Handle::Suffix { rule, first } => {
                MemberIter::Fwd(Forward::rule_suffix(self.g, rule, first, u64::MAX))
            }
            Handle::Power { run, k } => {
                MemberIter::Fwd(Forward::power(self.g, run_base(self.g, run), k as u64, u64::MAX))
            }
        }
    }

    pub fn to_vec(&self, h: Handle) -> Vec<Sym> {
        self.stream(h).collect()
    }

    /// Signature of the length-`len` prefix of a member.
    pub fn sig_prefix(&self, h: Handle, len: u64) -> SignatureTriple {
        match h {
            Handle::Rev(a) => sig_x_prefix(self.g, self.sigs, a, len),
            _ => sig_y_prefix(self.g, self.sigs, h, len),
        }
    }
}

/// Signature of the length-`len` prefix of `exp(a)` reversed.
pub fn sig_x_prefix(g: &Rlcfg, sigs: &PrefixSigTables, a: Sym, len: u64) -> SignatureTriple {
    assert!(len <= g.exp_len(a), "prefix longer than the member");
    sigs.rev_suffix(g, a, len)
}

/// Signature of the length-`len` prefix of a forward member.
pub fn sig_y_prefix(g: &Rlcfg, sigs: &PrefixSigTables, h: Handle, len: u64) -> SignatureTriple {
    match h {
        Handle::Suffix { rule, first } => {
            assert!(len <= g.exp_len(rule) - skipped(g, rule, first), "prefix longer than the member");
            sigs.rule_suffix_prefix(g, rule, first as usize, len)
        }
        Handle::Power { run, k } => {
            let base = run_base(g, run);
            assert!(len <= g.exp_len(base) * k as u64, "prefix longer than the member");
            sigs.power_prefix(g, run, base, len)
        }
        Handle::Rev(_) => panic!("reversed member passed as a forward member"),
    }
}

/// A query string: the suffix of `seq` starting at `from`, with prefix
/// fingerprints of `seq`.
#[derive(Clone, Copy)]
pub struct Query<'a> {
    pub seq: &'a [Sym],
    pub sigs: &'a TextSigs,
    pub from: usize,
}

impl Query<'_> {
    pub fn len(&self) -> usize {
        self.seq.len() - self.from
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn at(&self, k: usize) -> Sym {
        self.seq[self.from + k]
    }

    fn kappa(&self, len: usize) -> u64 {
        self.sigs.kappa(self.from, self.from + len)
    }
}

/// How a query relates to a member: `Equal` when the query is a prefix of
/// it, otherwise the lexicographic order of query and member.
fn exact_cmp(view: &MemberView<'_>, q: &Query<'_>, h: Handle) -> Ordering {
    let mut it = view.stream(h);
    for k in 0..q.len() {
        match it.next() {
            None => return Ordering::Greater,
            Some(c) => match q.at(k).cmp(&c) {
                Ordering::Equal => {}
                o => return o,
            },
        }
    }
    Ordering::Equal
}

fn fingerprint_cmp(view: &MemberView<'_>, q: &Query<'_>, h: Handle) -> Ordering {
    let ml = view.len(h);
    let ql = q.len() as u64;
    let cap = ml.min(ql) as usize;
    let l = gallop(cap, |l| q.kappa(l) == view.sig_prefix(h, l as u64).kappa);
    if l as u64 == ql {
        Ordering::Equal
    } else if l as u64 == ml {
        Ordering::Greater
    } else {
        q.at(l).cmp(&view.char_at(h, l as u64))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RankedStrings {
    pub members: Vec<Handle>,
}

impl RankedStrings {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    fn bounds(&self, cmp: impl Fn(Handle) -> Ordering) -> Range<usize> {
        let lo = self.members.partition_point(|&h| cmp(h) == Ordering::Greater);
        let hi = lo + self.members[lo..].partition_point(|&h| cmp(h) != Ordering::Less);
        lo..hi
    }

    fn verified(&self, view: &MemberView<'_>, q: &Query<'_>, r: &Range<usize>) -> bool {
        let n = self.members.len();
        let cmp = |i: usize| exact_cmp(view, q, self.members[i]);
        let lo_ok = (r.start == n || cmp(r.start) != Ordering::Greater)
            && (r.start == 0 || cmp(r.start - 1) == Ordering::Greater);
        let hi_ok = (r.end == n || cmp(r.end) == Ordering::Less)
            && (r.end == 0 || r.end == r.start || cmp(r.end - 1) == Ordering::Equal);
        lo_ok && hi_ok
    }

    /// Rank interval of the members that have `q` as a prefix. Binary search
    /// uses fingerprints; the boundaries are then confirmed by extraction,
    /// falling back to a fully exact search if they do not hold.
    pub fn prefix_range(&self, view: &MemberView<'_>, q: &Query<'_>) -> Range<usize> {
        if q.is_empty() {
            return 0..self.members.len();
        }
        let r = self.bounds(|h| fingerprint_cmp(view, q, h));
        if self.verified(view, q, &r) {
            r
        } else {
            self.prefix_range_exact(view, q)
        }
    }

    /// Binary search comparing by extraction only.
    pub fn prefix_range_exact(&self, view: &MemberView<'_>, q: &Query<'_>) -> Range<usize> {
        self.bounds(|h| exact_cmp(view, q, h))
    }
}

/// A member with the text position of one of its occurrences: the start for
/// forward members, the end (exclusive) for reversed ones.
#[derive(Debug, Clone, Copy)]
pub struct Placed {
    pub handle: Handle,
    pub pos: usize,
    pub len: usize,
    /// Final tiebreak between equal handles.
    pub tag: u32,
}

/// Sorts members by content using the text they occur in; equal contents are
/// ordered by handle, then by tag.
pub fn sort_placed(members: &mut [Placed], text: &[Sym], sigs: &TextSigs, reversed: bool, exec: Exec) {
    let cmp = |a: &Placed, b: &Placed| -> Ordering {
        let cap = a.len.min(b.len);
        let by_content = if reversed {
            let l = sigs.lcs(a.pos, b.pos, cap);
            if l == cap {
                a.len.cmp(&b.len)
            } else {
                text[a.pos - 1 - l].cmp(&text[b.pos - 1 - l])
            }
        } else {
            let l = sigs.lcp(a.pos, b.pos, cap);
            if l == cap {
                a.len.cmp(&b.len)
            } else {
                text[a.pos + l].cmp(&text[b.pos + l])
            }
        };
        by_content
            .then(a.handle.cmp(&b.handle))
            .then(a.tag.cmp(&b.tag))
    };
    par::sort_by(exec, members, cmp);
}
