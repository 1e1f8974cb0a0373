//! The worked example: a 49-symbol text (sentinels included) with fixed
//! permutations at every level.

use rlindex::grammar::{DrawContext, PermutationSource};
use rlindex::{Rlcfg, Sym, DOLLAR, HASH};

pub const RAW: &str = "adbdaacaacbdaabcbdaabcbdbdaacaacbdaabcbdaabcbd";

/// Ranks keyed by the expansion of each symbol, `#` and `$` spelled out.
pub struct FixedPermutations {
    levels: Vec<Vec<(&'static str, u32)>>,
}

pub fn spell(g: &Rlcfg, s: Sym) -> String {
    g.expand(s)
        .into_iter()
        .map(|x| match x {
            HASH => '#',
            DOLLAR => '$',
            b => b as u8 as char,
        })
        .collect()
}

impl PermutationSource for FixedPermutations {
    fn draw(&mut self, ctx: &DrawContext<'_>) -> Vec<u32> {
        let table = &self.levels[ctx.round];
        ctx.alphabet
            .iter()
            .map(|&s| {
                let e = spell(ctx.grammar, s);
                table
                    .iter()
                    .find(|(k, _)| *k == e)
                    .unwrap_or_else(|| panic!("no rank for {e:?} in round {}", ctx.round))
                    .1
            })
            .collect()
    }

    fn is_random(&self) -> bool {
        false
    }
}

pub fn figure_source() -> FixedPermutations {
    FixedPermutations {
        levels: vec![
            vec![("$", 1), ("#", 2), ("d", 3), ("c", 4), ("b", 5), ("a", 6)],
            vec![("c$", 1), ("#ad", 2), ("aac", 3), ("aabc", 4), ("bd", 5)],
            vec![("bdc$", 1), ("#adbdaacaac", 2), ("bdbdaacaac", 3), ("bdaabc", 4)],
            vec![("bdaabcbdaabcbdc$", 1), ("#adbdaacaacbdaabcbdaabcbdbdaacaac", 2)],
        ],
    }
}

pub fn text() -> Vec<u8> {
    // The text body between the sentinels ends in "bdc".
    format!("{RAW}c").into_bytes()
}

/// 1-based inclusive end positions (sentinels counted) of all symbols of a
/// level but the last.
pub fn boundaries(g: &Rlcfg, seq: &[Sym]) -> Vec<u64> {
    let mut acc = 0;
    let mut out = Vec::new();
    for &s in &seq[..seq.len() - 1] {
        acc += g.exp_len(s);
        out.push(acc);
    }
    out
}

/// Relabels a sequence by order of first appearance.
pub fn canonical(seq: &[Sym]) -> Vec<usize> {
    let mut seen: Vec<Sym> = Vec::new();
    seq.iter()
        .map(|s| match seen.iter().position(|x| x == s) {
            Some(k) => k,
            None => {
                seen.push(*s);
                seen.len() - 1
            }
        })
        .collect()
}

