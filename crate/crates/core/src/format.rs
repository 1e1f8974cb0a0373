//! Binary index files.
//!
//! Layout: the magic `RLCI`, a `u32` format version, a header (text length,
//! alphabet, fingerprint base, modulus and seed), then named sections. Each
//! section is a length-prefixed name, a `u64` payload length, the payload and
//! an FNV-1a checksum of the payload. Integers are little-endian and
//! fixed-width. Wavelet matrices and prefix signature tables are rebuilt on
//! load.

use std::io::{Read, Write};
use std::time::Duration;

use thiserror::Error;

use crate::count::{kappa_prime_of, RunPeriodEntry, RunPeriodTable};
use crate::fingerprint::{FingerprintContext, MU};
use crate::grammar::{Rlcfg, RoundStats, Rule};
use crate::grid::{CountGrid, LocateGrid};
use crate::index::Index;
use crate::lcparse::Permutation;
use crate::members::{Handle, RankedStrings};
use crate::sigs::PrefixSigTables;
use crate::tree::{GrammarTree, NodeKind, NONE};
use crate::{Sym, FIRST_NONTERMINAL};

pub const MAGIC: &[u8; 4] = b"RLCI";
pub const VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("not an index file (bad magic)")]
    BadMagic,
    #[error("unsupported format version {found} (expected {VERSION})")]
    Version { found: u32 },
    #[error("section `{section}`: {msg}")]
    Corrupt { section: String, msg: String },
}

fn corrupt(section: &str, msg: impl Into<String>) -> FormatError {
    FormatError::Corrupt {
        section: section.to_string(),
        msg: msg.into(),
    }
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

#[derive(Default)]
struct Enc(Vec<u8>);

impl Enc {
    fn u8(&mut self, v: u8) {
        self.0.push(v);
    }
    fn u32(&mut self, v: u32) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn u64(&mut self, v: u64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn bytes(&mut self, v: &[u8]) {
        self.u64(v.len() as u64);
        self.0.extend_from_slice(v);
    }
    fn u32s(&mut self, v: &[u32]) {
        self.u64(v.len() as u64);
        v.iter().for_each(|&x| self.u32(x));
    }
    fn u64s(&mut self, v: &[u64]) {
        self.u64(v.len() as u64);
        v.iter().for_each(|&x| self.u64(x));
    }
}

struct Dec<'a> {
    buf: &'a [u8],
    at: usize,
    section: &'a str,
}

impl<'a> Dec<'a> {
    fn new(buf: &'a [u8], section: &'a str) -> Self {
        Dec { buf, at: 0, section }
    }

    fn err(&self, msg: impl Into<String>) -> FormatError {
        corrupt(self.section, msg)
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8], FormatError> {
        if self.buf.len() - self.at < n {
            return Err(self.err("truncated"));
        }
        let s = &self.buf[self.at..self.at + n];
        self.at += n;
        Ok(s)
    }
    fn u8(&mut self) -> Result<u8, FormatError> {
        Ok(self.take(1)?[0])
    }
    fn u32(&mut self) -> Result<u32, FormatError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
    fn u64(&mut self) -> Result<u64, FormatError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    /// A length prefix, checked against the bytes left.
    fn len(&mut self, elem: usize) -> Result<usize, FormatError> {
        let n = self.u64()?;
        let left = (self.buf.len() - self.at) as u64;
        if n.saturating_mul(elem.max(1) as u64) > left {
            return Err(self.err("length prefix exceeds section"));
        }
        Ok(n as usize)
    }
    fn bytes(&mut self) -> Result<Vec<u8>, FormatError> {
        let n = self.len(1)?;
        Ok(self.take(n)?.to_vec())
    }
    fn u32s(&mut self) -> Result<Vec<u32>, FormatError> {
        let n = self.len(4)?;
        (0..n).map(|_| self.u32()).collect()
    }
    fn u64s(&mut self) -> Result<Vec<u64>, FormatError> {
        let n = self.len(8)?;
        (0..n).map(|_| self.u64()).collect()
    }
    fn finish(&self) -> Result<(), FormatError> {
        if self.at != self.buf.len() {
            return Err(self.err("trailing bytes"));
        }
        Ok(())
    }
}

const SECTIONS: [&str; 9] = [
    "grammar", "rounds", "tree", "members", "locate-grid", "count-grid", "counts", "run-periods",
    "terminal-counts",
];

fn put_handles(e: &mut Enc, r: &RankedStrings) {
    e.u64(r.members.len() as u64);
    for h in &r.members {
        match *h {
            Handle::Rev(a) => {
                e.u8(0);
                e.u32(a);
                e.u32(0);
            }
            Handle::Suffix { rule, first } => {
                e.u8(1);
                e.u32(rule);
                e.u32(first);
            }
            Handle::Power { run, k } => {
                e.u8(2);
                e.u32(run);
                e.u32(k);
            }
        }
    }
}

fn get_handles(d: &mut Dec<'_>, g: &Rlcfg) -> Result<RankedStrings, FormatError> {
    let n = d.len(9)?;
    let mut members = Vec::with_capacity(n);
    for _ in 0..n {
        let (tag, a, b) = (d.u8()?, d.u32()?, d.u32()?);
        let h = match (tag, g.rule(a)) {
            (0, _) if (a as usize) < g.num_symbols() => Handle::Rev(a),
            (1, Some(Rule::Block { children, .. })) if (b as usize) < children.len() && b > 0 => {
                Handle::Suffix { rule: a, first: b }
            }
            (2, Some(&Rule::Run { exp, .. })) if b >= 1 && b < exp => Handle::Power { run: a, k: b },
            _ => return Err(d.err(format!("bad member handle ({tag}, {a}, {b})"))),
        };
        members.push(h);
    }
    Ok(RankedStrings { members })
}

impl Index {
    /// Writes the index in the binary format.
    pub fn save(&self, w: &mut impl Write) -> Result<(), FormatError> {
        let g = &self.grammar;
        let mut head = Enc::default();
        head.0.extend_from_slice(MAGIC);
        head.u32(VERSION);
        head.u64(self.text_len());
        head.bytes(g.alphabet());
        head.u64(self.fp.c);
        head.u64(MU);
        head.u64(self.fp.seed);
        head.u32(self.fp.redraws);
        head.u8(self.fp.verified as u8);
        head.u64(self.seed);
        w.write_all(&head.0)?;

        for name in SECTIONS {
            let mut e = Enc::default();
            match name {
                "grammar" => {
                    e.u32(g.start());
                    e.u64(g.rules().len() as u64);
                    for r in g.rules() {
                        match r {
                            Rule::Block { children, .. } => {
                                e.u8(0);
                                e.u32s(children);
                            }
                            &Rule::Run { base, exp } => {
                                e.u8(1);
                                e.u32(base);
                                e.u32(exp);
                            }
                        }
                    }
                }
                "rounds" => {
                    e.u64(g.rounds().len() as u64);
                    for t in g.rounds() {
                        e.u32(t.perm.lo());
                        e.u32s(t.perm.raw_ranks());
                        for v in [t.runs.start, t.runs.end, t.blocks.start, t.blocks.end] {
                            e.u32(v);
                        }
                    }
                    e.u64(g.round_stats().len() as u64);
                    for s in g.round_stats() {
                        e.u64(s.len as u64);
                        e.u64(s.collapsed_len as u64);
                        e.u32(s.retries);
                        e.u64(s.contribution);
                        e.u64(s.delta.to_bits());
                        e.u8(s.within_budget as u8);
                    }
                }
                "tree" => {
                    let t = &self.tree;
                    e.u32s(&t.label);
                    e.bytes(&t.kind.iter().map(|&k| k as u8).collect::<Vec<u8>>());
                    e.u32s(&t.parent);
                    e.u32s(&t.child_start);
                    e.u32s(&t.children);
                    e.u32s(&t.anc);
                    e.u64s(&t.offs);
                    e.u32s(&t.next);
                    e.u32s(&t.internal);
                    e.u64s(&t.phrase_starts);
                }
                "members" => {
                    put_handles(&mut e, &self.x);
                    put_handles(&mut e, &self.y_locate);
                    put_handles(&mut e, &self.y_count);
                }
                "locate-grid" => {
                    let pts: Vec<_> = self.locate_grid.points().collect();
                    e.u64(pts.len() as u64);
                    for (x, y, v) in pts {
                        e.u32(x);
                        e.u32(y);
                        e.u32(v);
                    }
                }
                "count-grid" => {
                    let pts: Vec<_> = self.count_grid.points().collect();
                    e.u64(pts.len() as u64);
                    for (x, y, w) in pts {
                        e.u32(x);
                        e.u32(y);
                        e.u64(w);
                    }
                }
                "counts" => e.u64s(&self.counts),
                "run-periods" => {
                    e.u64(self.periods.entries.len() as u64);
                    for en in &self.periods.entries {
                        e.u32(en.base);
                        e.u32s(&en.exps);
                        e.u64s(&en.c);
                        e.u64s(&en.c_prime);
                    }
                }
                "terminal-counts" => e.u64s(&self.term_counts),
                _ => unreachable!(),
            }
            let mut framed = Enc::default();
            framed.bytes(name.as_bytes());
            framed.bytes(&e.0);
            framed.u64(fnv1a(&e.0));
            w.write_all(&framed.0)?;
        }
        Ok(())
    }

    /// Reads an index written by [`Index::save`].
    pub fn load(r: &mut impl Read) -> Result<Index, FormatError> {
        let mut buf = Vec::new();
        r.read_to_end(&mut buf)?;
        Index::from_bytes(&buf)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        self.save(&mut out).expect("writing to memory");
        out
    }

    pub fn from_bytes(buf: &[u8]) -> Result<Index, FormatError> {
        if buf.len() < 8 || &buf[..4] != MAGIC {
            return Err(FormatError::BadMagic);
        }
        let found = u32::from_le_bytes(buf[4..8].try_into().unwrap());
        if found != VERSION {
            return Err(FormatError::Version { found });
        }
        let mut d = Dec::new(&buf[8..], "header");
        let text_len = d.u64()?;
        let alphabet = d.bytes()?;
        let c = d.u64()?;
        let mu = d.u64()?;
        if mu != MU {
            return Err(d.err(format!("modulus {mu} differs from {MU}")));
        }
        if !(2..=MU - 2).contains(&c) {
            return Err(d.err("fingerprint base out of range"));
        }
        let fp_seed = d.u64()?;
        let mut fp = FingerprintContext::with_base(c, fp_seed);
        fp.redraws = d.u32()?;
        fp.verified = d.u8()? != 0;
        let seed = d.u64()?;

        // Section payloads, in order.
        let mut rest = &buf[8 + d.at..];
        let mut payloads: Vec<&[u8]> = Vec::new();
        for name in SECTIONS {
            let mut h = Dec::new(rest, name);
            let got = h.bytes().map_err(|_| corrupt(name, "missing or truncated"))?;
            if got != name.as_bytes() {
                return Err(corrupt(name, "missing or out of order"));
            }
            let n = h.len(1)?;
            let body = h.take(n)?;
            if h.u64()? != fnv1a(body) {
                return Err(corrupt(name, "checksum mismatch"));
            }
            payloads.push(body);
            rest = &rest[h.at..];
        }
        if !rest.is_empty() {
            return Err(corrupt("trailer", "unexpected bytes after the last section"));
        }

        let grammar = {
            let mut d = Dec::new(payloads[0], "grammar");
            let start = d.u32()?;
            let n = d.len(5)?;
            let mut rules = Vec::with_capacity(n);
            for _ in 0..n {
                rules.push(match d.u8()? {
                    0 => {
                        let children = d.u32s()?;
                        Rule::Block {
                            children: children.into(),
                            ends: Box::new([]),
                        }
                    }
                    1 => Rule::Run {
                        base: d.u32()?,
                        exp: d.u32()?,
                    },
                    t => return Err(d.err(format!("unknown rule kind {t}"))),
                });
            }
            d.finish()?;
            let mut d = Dec::new(payloads[1], "rounds");
            let nr = d.len(16)?;
            let mut rounds = Vec::with_capacity(nr);
            for _ in 0..nr {
                let lo = d.u32()?;
                let ranks = d.u32s()?;
                let v = [d.u32()?, d.u32()?, d.u32()?, d.u32()?];
                rounds.push((Permutation::new(lo, ranks), v[0]..v[1], v[2]..v[3]));
            }
            let ns = d.len(37)?;
            let mut stats = Vec::with_capacity(ns);
            for _ in 0..ns {
                stats.push(RoundStats {
                    len: d.u64()? as usize,
                    collapsed_len: d.u64()? as usize,
                    retries: d.u32()?,
                    contribution: d.u64()?,
                    delta: f64::from_bits(d.u64()?),
                    within_budget: d.u8()? != 0,
                });
            }
            d.finish()?;
            let rules = with_ends(rules).map_err(|m| corrupt("grammar", m))?;
            let g = Rlcfg::from_parts(rules, start, rounds, alphabet, stats)
                .map_err(|e| corrupt("grammar", e.to_string()))?;
            if g.text_len() != text_len + 2 {
                return Err(corrupt("grammar", "expansion length differs from the header"));
            }
            g
        };
        let g = &grammar;
        let nsym = g.num_symbols();

        let tree = {
            let mut d = Dec::new(payloads[2], "tree");
            let label = d.u32s()?;
            let kind = d
                .bytes()?
                .into_iter()
                .map(NodeKind::from_u8)
                .collect::<Option<Vec<_>>>()
                .ok_or_else(|| d.err("unknown node kind"))?;
            let t = GrammarTree {
                label,
                kind,
                parent: d.u32s()?,
                child_start: d.u32s()?,
                children: d.u32s()?,
                anc: d.u32s()?,
                offs: d.u64s()?,
                next: d.u32s()?,
                internal: d.u32s()?,
                phrase_starts: d.u64s()?,
            };
            d.finish()?;
            check_tree(&t, nsym).map_err(|m| corrupt("tree", m))?;
            t
        };
        let n = tree.len();

        let mut d = Dec::new(payloads[3], "members");
        let x = get_handles(&mut d, g)?;
        let y_locate = get_handles(&mut d, g)?;
        let y_count = get_handles(&mut d, g)?;
        d.finish()?;

        let mut d = Dec::new(payloads[4], "locate-grid");
        let np = d.len(12)?;
        let mut pts = Vec::with_capacity(np);
        for _ in 0..np {
            let p = (d.u32()?, d.u32()?, d.u32()?);
            if p.0 as usize >= x.len() || p.1 as usize >= y_locate.len() || p.2 as usize >= n {
                return Err(d.err("point out of range"));
            }
            pts.push(p);
        }
        d.finish()?;
        let locate_grid = LocateGrid::new(pts);

        let mut d = Dec::new(payloads[5], "count-grid");
        let np = d.len(16)?;
        let mut pts = Vec::with_capacity(np);
        for _ in 0..np {
            let p = (d.u32()?, d.u32()?, d.u64()?);
            if p.0 as usize >= x.len() || p.1 as usize >= y_count.len() {
                return Err(d.err("point out of range"));
            }
            pts.push(p);
        }
        d.finish()?;
        let count_grid = CountGrid::new(pts);

        let mut d = Dec::new(payloads[6], "counts");
        let counts = d.u64s()?;
        d.finish()?;
        if counts.len() != n {
            return Err(d.err("one counter per tree node expected"));
        }

        let sigs = PrefixSigTables::build(g, &fp);
        let mut d = Dec::new(payloads[7], "run-periods");
        let ne = d.len(4)?;
        let mut periods = RunPeriodTable::default();
        for _ in 0..ne {
            let base = d.u32()?;
            let en = RunPeriodEntry {
                base,
                exps: d.u32s()?,
                c: d.u64s()?,
                c_prime: d.u64s()?,
            };
            if base as usize >= nsym || en.exps.len() != en.c.len() || en.c.len() != en.c_prime.len() {
                return Err(d.err("malformed entry"));
            }
            periods
                .keys
                .insert(kappa_prime_of(g, &sigs, base), periods.entries.len());
            periods.entries.push(en);
        }
        d.finish()?;

        let mut d = Dec::new(payloads[8], "terminal-counts");
        let term_counts = d.u64s()?;
        d.finish()?;
        if term_counts.len() != 256 {
            return Err(d.err("256 entries expected"));
        }

        Ok(Index {
            grammar,
            tree,
            fp,
            sigs,
            x,
            y_locate,
            y_count,
            locate_grid,
            count_grid,
            counts,
            periods,
            term_counts,
            seed,
            build_time: Duration::ZERO,
        })
    }
}

/// Fills in the cumulative lengths of block rules, checking references.
fn with_ends(rules: Vec<Rule>) -> Result<Vec<Rule>, String> {
    let mut len: Vec<u64> = vec![1; FIRST_NONTERMINAL as usize];
    let mut out = Vec::with_capacity(rules.len());
    for r in rules {
        let id = len.len();
        let get = |s: Sym| {
            len.get(s as usize)
                .copied()
                .ok_or_else(|| format!("rule {id} refers to undefined symbol {s}"))
        };
        let (rule, l) = match r {
            Rule::Block { children, .. } => {
                let mut ends = Vec::with_capacity(children.len());
                let mut acc = 0u64;
                for &c in children.iter() {
                    acc = acc.checked_add(get(c)?).ok_or("length overflow")?;
                    ends.push(acc);
                }
                (
                    Rule::Block {
                        children,
                        ends: ends.into(),
                    },
                    acc,
                )
            }
            Rule::Run { base, exp } => {
                let l = get(base)?.checked_mul(exp as u64).ok_or("length overflow")?;
                (Rule::Run { base, exp }, l)
            }
        };
        len.push(l);
        out.push(rule);
    }
    Ok(out)
}

fn check_tree(t: &GrammarTree, nsym: usize) -> Result<(), String> {
    let n = t.len();
    let same = [t.kind.len(), t.parent.len(), t.anc.len(), t.offs.len(), t.next.len()];
    if same.iter().any(|&l| l != n) || t.child_start.len() != n + 1 || n == 0 {
        return Err("field lengths disagree".into());
    }
    if t.internal.len() != nsym {
        return Err("one internal node per symbol expected".into());
    }
    let node = |v: u32| v == NONE || (v as usize) < n;
    let ok = t.label.iter().all(|&s| (s as usize) < nsym)
        && t.parent.iter().all(|&v| node(v))
        && t.anc.iter().all(|&v| node(v))
        && t.next.iter().all(|&v| node(v))
        && t.internal.iter().all(|&v| node(v))
        && t.children.iter().all(|&v| (v as usize) < n)
        && t.child_start.windows(2).all(|w| w[0] <= w[1])
        && t.child_start.last().is_some_and(|&e| e as usize == t.children.len());
    if !ok {
        return Err("node reference out of range".into());
    }
    Ok(())
}
