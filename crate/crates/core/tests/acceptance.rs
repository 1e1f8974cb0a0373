//! Acceptance suite. Runs every criterion at its stated tolerance and prints
//! one PASS/FAIL line each; exits non-zero if any fails.

mod common;

use std::collections::HashMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::figure;
use common::{naive_locate, Corpus};
use rlindex::count::shortest_period;
use rlindex::delta::compute_delta;
use rlindex::fingerprint::{sig_concat, sig_split_left, sig_split_right, FingerprintContext};
use rlindex::grammar::{build_with_trace, grammar_stats, wrap};
use rlindex::index::IndexOptions;
use rlindex::lcparse::{block_extension, collapse_runs, fragment_boundaries, parse_round, Permutation};
use rlindex::locate::SplitMode;
use rlindex::patparse::parse_pattern;
use rlindex::{build_grammar, corpus, BuildConfig, Index, Sym, DOLLAR, HASH};

type Outcome = Result<String, String>;

struct Entry {
    corpus: Corpus,
    index: Index,
    patterns: Vec<Vec<u8>>,
}

const TOTAL_PATTERNS: usize = 10_500;
const MAX_PATTERN: usize = 128;

fn oracle_corpora() -> Vec<Corpus> {
    let mut v = Vec::new();
    let mut add = |name: String, text: Vec<u8>| v.push(Corpus { name, text });
    for (k, (sigma, n)) in [(2, 1_000), (2, 20_000), (4, 5_000), (4, 100_000), (26, 2_000), (26, 50_000)]
        .into_iter()
        .enumerate()
    {
        add(format!("random σ={sigma} n={n}"), corpus::random(n, sigma, k as u64).unwrap());
    }
    for n in [1_000, 10_000, 100_000] {
        add(format!("fibonacci n={n}"), corpus::fibonacci(n).unwrap());
    }
    for (k, (n, copies, muts, sigma)) in [
        (10_000, 10, 2, 4),
        (50_000, 50, 3, 26),
        (100_000, 100, 5, 4),
        (100_000, 20, 20, 2),
        (30_000, 300, 0, 4),
    ]
    .into_iter()
    .enumerate()
    {
        add(
            format!("copy-edit n={n} copies={copies} mutations={muts} σ={sigma}"),
            corpus::copy_edit(n, copies, muts, sigma, 50 + k as u64).unwrap(),
        );
    }
    add("unary n=10000".into(), vec![b'a'; 10_000]);
    add("periodic abc n=15000".into(), b"abc".repeat(5_000));
    add("periodic abaab with edits".into(), {
        let mut t = b"abaab".repeat(4_000);
        for k in [777, 5_000, 12_345, 19_000] {
            t[k] = b'c';
        }
        t
    });
    add("random runs n=20000".into(), common::runs_text(20_000, 3));
    add("single byte".into(), b"x".to_vec());
    add("two bytes".into(), b"xy".to_vec());
    add("abracadabra".into(), b"abracadabra".to_vec());
    v
}

/// Unary and periodic patterns built from a text's own letters.
fn periodic_patterns(t: &[u8], rng: &mut ChaCha8Rng, count: usize) -> Vec<Vec<u8>> {
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let per = rng.gen_range(1..=3usize).min(t.len());
        let i = rng.gen_range(0..=t.len() - per);
        let unit = &t[i..i + per];
        let m = rng.gen_range(1..=MAX_PATTERN);
        out.push(unit.iter().cycle().take(m).copied().collect());
    }
    out
}

fn build_suite() -> Vec<Entry> {
    let corpora = oracle_corpora();
    let per = TOTAL_PATTERNS.div_ceil(corpora.len());
    corpora
        .into_iter()
        .enumerate()
        .map(|(k, c)| {
            let index = Index::build(&c.text, 1000 + k as u64).expect("index build");
            let mut rng = ChaCha8Rng::seed_from_u64(k as u64);
            let mut patterns = common::patterns(&c.text, per - per / 5, MAX_PATTERN, k as u64);
            patterns.extend(periodic_patterns(&c.text, &mut rng, per / 5));
            Entry {
                corpus: c,
                index,
                patterns,
            }
        })
        .collect()
}

fn criterion_locate(suite: &[Entry]) -> Outcome {
    let mut total = 0;
    let mut present = 0;
    let mut bad = Vec::new();
    for e in suite {
        for p in &e.patterns {
            total += 1;
            let want = naive_locate(&e.corpus.text, p);
            present += !want.is_empty() as usize;
            if e.index.locate(p) != want {
                bad.push(format!("{}: {:?}", e.corpus.name, String::from_utf8_lossy(p)));
            }
        }
    }
    let detail = format!(
        "{total} patterns ({present} present) over {} corpora, {} mismatches",
        suite.len(),
        bad.len()
    );
    if total >= 10_000 && suite.len() >= 20 && bad.is_empty() {
        Ok(detail)
    } else {
        Err(format!("{detail}; first: {:?}", bad.first()))
    }
}

fn criterion_count(suite: &[Entry]) -> Outcome {
    let mut total = 0;
    let mut periodic = 0;
    let mut bad = Vec::new();
    for e in suite {
        for p in &e.patterns {
            total += 1;
            let want = naive_locate(&e.corpus.text, p).len() as u64;
            if want > 0 && 3 * shortest_period(p) < p.len() {
                periodic += 1;
            }
            let got = e.index.count(p);
            let listed = e.index.locate(p).len() as u64;
            if got != want || listed != want {
                bad.push(format!(
                    "{}: {:?} count {got}, locate {listed}, oracle {want}",
                    e.corpus.name,
                    String::from_utf8_lossy(p)
                ));
            }
        }
    }
    let detail = format!(
        "{total} patterns, {periodic} present with period < m/3, {} mismatches",
        bad.len()
    );
    if bad.is_empty() && periodic > 0 {
        Ok(detail)
    } else {
        Err(format!("{detail}; first: {:?}", bad.first()))
    }
}

fn criterion_figure() -> Outcome {
    let t = figure::text();
    let (g, trace) = build_with_trace(&t, &mut figure::figure_source(), &BuildConfig::default())
        .map_err(|e| e.to_string())?;
    let mut fails = Vec::new();
    let b1 = figure::boundaries(&g, &trace[1]);
    if b1 != [3, 5, 8, 11, 13, 17, 19, 23, 25, 27, 30, 33, 35, 39, 41, 45, 47] {
        fails.push(format!("level-1 boundaries {b1:?}"));
    }
    let b2 = figure::boundaries(&g, &trace[2]);
    if b2 != [11, 17, 23, 33, 39, 45] {
        fails.push(format!("level-2 boundaries {b2:?}"));
    }
    if figure::canonical(&trace[2]) != [0, 1, 1, 2, 1, 1, 3] {
        fails.push("T2 is not #DDEDD$".into());
    }
    let ss = parse_pattern(&g, b"dbdaacaacbdaabcbdaabcbd");
    if ss.m_of_p != [0, 1, 2, 8, 14, 20, 21] {
        fails.push(format!("M(P) = {:?}", ss.m_of_p));
    }
    let idx = Index::build_with_source(&t, &mut figure::figure_source(), &IndexOptions::default())
        .map_err(|e| e.to_string())?;
    let occ: Vec<u64> = idx.locate(b"bdaabc").iter().map(|p| p + 1).collect();
    if occ != [12, 18, 34, 40] {
        fails.push(format!("bdaabc at {occ:?} (sentinel-inclusive)"));
    }
    if fails.is_empty() {
        Ok("level-1/level-2 boundaries, T2 shape, M(P) and locate(bdaabc) reproduced".into())
    } else {
        Err(fails.join("; "))
    }
}

fn criterion_split_bound(suite: &[Entry]) -> Outcome {
    let mut checked = 0;
    let mut worst = 0.0f64;
    let mut bad = Vec::new();
    for e in suite {
        for p in &e.patterns {
            let ss = parse_pattern(e.index.grammar(), p);
            if ss.is_abandoned() {
                // Abandoning is only sound for patterns absent from the text.
                if p.len() <= e.corpus.text.len()
                    && e.corpus.text.windows(p.len()).any(|w| w == p.as_slice())
                {
                    bad.push(format!("{:?}: abandoned but present", String::from_utf8_lossy(p)));
                }
                continue;
            }
            checked += 1;
            let bound = 3 * (p.len() as f64).log2().ceil() as usize;
            if bound > 0 {
                worst = worst.max(ss.m_of_p.len() as f64 / bound as f64);
            }
            if ss.m_of_p.len() > bound {
                bad.push(format!("{:?}: |M| = {}", String::from_utf8_lossy(p), ss.m_of_p.len()));
            }
        }
    }
    let detail = format!(
        "{checked} parsed patterns, max |M|/bound = {worst:.2}, {} violations",
        bad.len()
    );
    if bad.is_empty() {
        Ok(detail)
    } else {
        Err(format!("{detail}; first: {:?}", bad.first()))
    }
}

fn criterion_split_completeness(suite: &[Entry]) -> Outcome {
    let mut checked = 0;
    let mut primaries = 0;
    let mut bad = Vec::new();
    for e in suite {
        for p in e.patterns.iter().filter(|p| p.len() >= 2) {
            checked += 1;
            let fast = e.index.primary_occurrences(p, SplitMode::Candidates);
            let all = e.index.primary_occurrences(p, SplitMode::All);
            primaries += all.len();
            if fast != all {
                bad.push(format!("{}: {:?}", e.corpus.name, String::from_utf8_lossy(p)));
            }
        }
    }
    let detail = format!(
        "{checked} patterns, {primaries} primary occurrences, {} discrepancies",
        bad.len()
    );
    if bad.is_empty() {
        Ok(detail)
    } else {
        Err(format!("{detail}; first: {:?}", bad.first()))
    }
}

fn criterion_structure(suite: &[Entry]) -> Outcome {
    let mut fails = Vec::new();
    let mut rounds = 0;
    let mut rules = 0;
    for e in suite {
        let g = e.index.grammar();
        let name = &e.corpus.name;
        let lens: Vec<usize> = g.round_stats().iter().map(|s| s.len).collect();
        for w in lens.windows(2) {
            rounds += 1;
            if w[1] > w[0] / 2 {
                fails.push(format!("{name}: round length {} -> {}", w[0], w[1]));
            }
        }
        let h = g.heights();
        for s in 258..g.num_symbols() as Sym {
            rules += 1;
            let bound = 2.0 * (g.exp_len(s) as f64).log2();
            if h[s as usize] as f64 > bound + 1e-9 {
                fails.push(format!("{name}: symbol {s} height {} > {bound:.2}", h[s as usize]));
            }
        }
        if g.expand(g.start()) != wrap(&e.corpus.text) {
            fails.push(format!("{name}: expansion differs from the text"));
        }
        let n = e.corpus.text.len() as u64;
        if e.index.extract_text(1, n).ok().as_deref() != Some(&e.corpus.text[..]) {
            fails.push(format!("{name}: extraction differs from the text"));
        }
    }
    let detail = format!("{} corpora, {rounds} round transitions, {rules} rules", suite.len());
    if fails.is_empty() {
        Ok(detail)
    } else {
        Err(format!("{detail}; {} failures, first: {}", fails.len(), fails[0]))
    }
}

/// δ by enumerating the distinct substrings of every length.
fn brute_delta(t: &[u8]) -> (Vec<u64>, u64, u64) {
    let n = t.len();
    let mut counts = vec![0u64; n + 1];
    let (mut best_t, mut best_l) = (0u64, 1u64);
    for (l, slot) in counts.iter_mut().enumerate().skip(1) {
        let set: std::collections::HashSet<&[u8]> = t.windows(l).collect();
        *slot = set.len() as u64;
        if *slot * best_l > best_t * l as u64 {
            best_t = *slot;
            best_l = l as u64;
        }
    }
    (counts, best_t, best_l)
}

fn criterion_delta() -> Outcome {
    let mut checked = 0;
    let mut fails = Vec::new();
    let mut check = |t: &[u8]| {
        checked += 1;
        let d = compute_delta(t);
        let (counts, bt, bl) = brute_delta(t);
        if d.t_of_ell[1..] != counts[1..] || d.best_t * bl != bt * d.best_ell {
            fails.push(String::from_utf8_lossy(t).into_owned());
        }
    };
    for n in 1..=14usize {
        for bits in 0u32..(1 << n) {
            let t: Vec<u8> = (0..n).map(|k| b'0' + ((bits >> k) & 1) as u8).collect();
            check(&t);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for _ in 0..100 {
        let n = rng.gen_range(1..=500);
        let sigma = rng.gen_range(1..=8u8);
        let t: Vec<u8> = (0..n).map(|_| b'a' + rng.gen_range(0..sigma)).collect();
        check(&t);
    }
    let detail = format!("{checked} strings, {} mismatches", fails.len());
    if fails.is_empty() {
        Ok(detail)
    } else {
        Err(format!("{detail}; first: {}", fails[0]))
    }
}

/// Checks boundary-set equality and block extension for one wrapped string
/// and permutation. Returns the number of fragment pairs checked.
fn local_consistency(s: &[Sym], pi: &Permutation) -> Result<usize, String> {
    let parse = parse_round(s, pi).map_err(|e| format!("{e:?}"))?;
    let rc = collapse_runs(s);
    let n = s.len();
    let mut by_content: HashMap<&[Sym], Vec<usize>> = HashMap::new();
    let mut pairs = 0;
    for len in 1..=n {
        by_content.clear();
        for i in 0..=n - len {
            by_content.entry(&s[i..i + len]).or_default().push(i);
        }
        for starts in by_content.values() {
            for &i in starts {
                let j = i + len - 1;
                let skip = rc.limap(rc.map(i)) - i;
                let strip = |v: Vec<usize>| -> Vec<usize> { v.into_iter().filter(|&x| x != skip).collect() };
                let bi = strip(fragment_boundaries(&parse, i, j));
                for &i2 in starts {
                    if i2 == i {
                        continue;
                    }
                    pairs += 1;
                    let bj = strip(fragment_boundaries(&parse, i2, i2 + len - 1));
                    if bi != bj {
                        return Err(format!("boundary sets differ for fragments at {i} and {i2}, length {len}"));
                    }
                }
            }
        }
    }
    let is_boundary = |p: usize| parse.boundaries.binary_search(&p).is_ok();
    for &(i, j) in &parse.blocks {
        let Ok((ie, je)) = block_extension(&rc, (i, j), n) else {
            continue;
        };
        let ext = &s[ie..=je];
        for r in 0..=n - ext.len() {
            if &s[r..r + ext.len()] != ext {
                continue;
            }
            pairs += 1;
            let (bs, be) = (r + (i - ie), r + (j - ie));
            let block = is_boundary(be) && (bs == 0 || is_boundary(bs - 1));
            if !block || block_extension(&rc, (bs, be), n) != Ok((r, r + (je - ie))) {
                return Err(format!("extension of block {i}..{j} not preserved at {r}"));
            }
        }
    }
    Ok(pairs)
}

fn random_permutation(s: &[Sym], rng: &mut ChaCha8Rng) -> Permutation {
    let mut alpha: Vec<Sym> = s.to_vec();
    alpha.sort_unstable();
    alpha.dedup();
    let mut ranks: Vec<u32> = (3..=alpha.len() as u32).collect();
    ranks.shuffle(rng);
    let mut pairs = vec![(DOLLAR, 1), (HASH, 2)];
    pairs.extend(alpha.iter().filter(|&&a| a < 256).copied().zip(ranks));
    Permutation::from_pairs(&pairs)
}

fn criterion_local_consistency() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut pairs = 0;
    let mut strings = 0;
    // Every string of length ≤ 7 over three letters under every permutation.
    let perms: [[u32; 3]; 6] = [[3, 4, 5], [3, 5, 4], [4, 3, 5], [4, 5, 3], [5, 3, 4], [5, 4, 3]];
    for n in 1..=7u32 {
        for code in 0..3u32.pow(n) {
            let body: Vec<Sym> = (0..n).map(|k| b'a' as Sym + (code / 3u32.pow(k)) % 3).collect();
            let s: Vec<Sym> = [HASH].into_iter().chain(body).chain([DOLLAR]).collect();
            for p in &perms {
                let pi = Permutation::from_pairs(&[
                    (DOLLAR, 1),
                    (HASH, 2),
                    (b'a' as Sym, p[0]),
                    (b'b' as Sym, p[1]),
                    (b'c' as Sym, p[2]),
                ]);
                strings += 1;
                pairs += local_consistency(&s, &pi)?;
            }
        }
    }
    // Random strings of length ≤ 64 over σ ≤ 3 with 10³ random permutations.
    for _ in 0..1000 {
        let n = rng.gen_range(1..=64);
        let sigma = rng.gen_range(1..=3);
        let s: Vec<Sym> = [HASH]
            .into_iter()
            .chain((0..n).map(|_| b'a' as Sym + rng.gen_range(0..sigma)))
            .chain([DOLLAR])
            .collect();
        let pi = random_permutation(&s, &mut rng);
        strings += 1;
        pairs += local_consistency(&s, &pi)?;
    }
    Ok(format!("{strings} (string, permutation) cases, {pairs} fragment pairs, all consistent"))
}

fn criterion_space(ratios: &[(String, usize, f64)]) -> Outcome {
    let mut worst = 0.0f64;
    let mut lines = Vec::new();
    for (name, n, r) in ratios {
        worst = worst.max(*r);
        lines.push(format!("{name} n={n}: {r:.2}"));
    }
    println!("    g/(δ·log2(n/δ)) by size: {}", lines.join(", "));
    let detail = format!("{} builds, max ratio {worst:.2} (bound 64)", ratios.len());
    if worst <= 64.0 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn scaling_builds() -> (Vec<(String, usize, f64)>, Vec<u32>) {
    let mut out = Vec::new();
    let mut retries = Vec::new();
    for (k, n) in [1_000usize, 10_000, 100_000, 1_000_000].into_iter().enumerate() {
        let texts = [
            ("copy-edit", corpus::copy_edit(n, (n / 500).max(2), 1, 4, 900 + k as u64).unwrap()),
            ("fibonacci", corpus::fibonacci(n).unwrap()),
        ];
        for (name, t) in texts {
            let g = build_grammar(&t, k as u64, &BuildConfig::default()).unwrap();
            let st = grammar_stats(&g);
            retries.extend(st.retries.iter().copied());
            out.push((name.to_string(), n, st.ratio));
        }
    }
    (out, retries)
}

fn criterion_retries(suite: &[Entry], scaling: &[u32]) -> Outcome {
    let mut all: Vec<u32> = scaling.to_vec();
    for e in suite {
        all.extend(e.index.grammar().round_stats().iter().map(|s| s.retries));
    }
    let mean = all.iter().sum::<u32>() as f64 / all.len() as f64;
    let max = all.iter().max().copied().unwrap_or(0);
    let detail = format!("{} rounds, mean retries {mean:.3}, max {max} (bound 8)", all.len());
    if mean <= 8.0 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn criterion_fingerprints(suite: &[Entry]) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut fails = Vec::new();
    let ctx = FingerprintContext::with_base(rng.gen_range(2..(1u64 << 61) - 2), 0);
    for _ in 0..5_000 {
        let a: Vec<Sym> = (0..rng.gen_range(0..60)).map(|_| rng.gen_range(0..600)).collect();
        let b: Vec<Sym> = (0..rng.gen_range(0..60)).map(|_| rng.gen_range(0..600)).collect();
        let (sa, sb) = (ctx.sig_of(&a), ctx.sig_of(&b));
        let ab: Vec<Sym> = a.iter().chain(&b).copied().collect();
        let sab = ctx.sig_of(&ab);
        if sig_concat(sa, sb) != sab || sig_split_right(sab, sa) != sb || sig_split_left(sab, sb) != sa {
            fails.push(format!("algebra on {a:?} / {b:?}"));
        }
    }
    let mut member_cases = 0;
    let with_members: Vec<&Entry> = suite.iter().filter(|e| !e.index.x_members().is_empty()).collect();
    while member_cases < 5_000 {
        let e = with_members[rng.gen_range(0..with_members.len())];
        let idx = &e.index;
        let view = idx.view();
        let set = match rng.gen_range(0..3) {
            0 => idx.x_members(),
            1 => idx.y_locate_members(),
            _ => idx.y_count_members(),
        };
        let h = set.members[rng.gen_range(0..set.len())];
        let full = view.to_vec(h);
        let len = rng.gen_range(0..=full.len().min(4096));
        member_cases += 1;
        let want = idx.fingerprints().sig_of(&full[..len]);
        if view.sig_prefix(h, len as u64) != want {
            fails.push(format!("{}: member {h:?} prefix {len}", e.corpus.name));
        }
    }
    let unverified: Vec<&str> = suite
        .iter()
        .filter(|e| !e.index.fingerprints().verified)
        .map(|e| e.corpus.name.as_str())
        .collect();
    let detail = format!(
        "5000 algebra cases, {member_cases} member prefixes, {} mismatches, collision check passed on {}/{} corpora",
        fails.len(),
        suite.len() - unverified.len(),
        suite.len()
    );
    if fails.is_empty() && unverified.is_empty() {
        Ok(detail)
    } else {
        Err(format!("{detail}; first: {:?}; unverified: {unverified:?}", fails.first()))
    }
}

fn run(id: usize, name: &str, f: impl FnOnce() -> Outcome) -> bool {
    let t0 = Instant::now();
    let out = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
        let msg = e
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_default();
        Err(format!("panicked: {msg}"))
    });
    let secs = t0.elapsed().as_secs_f64();
    let (tag, detail, ok) = match out {
        Ok(d) => ("PASS", d, true),
        Err(d) => ("FAIL", d, false),
    };
    println!("{tag} criterion {id:>2} {name}: {detail} [{secs:.1}s]");
    ok
}

fn main() {
    let t0 = Instant::now();
    let suite = build_suite();
    println!(
        "built {} indexes in {:.1}s",
        suite.len(),
        t0.elapsed().as_secs_f64()
    );
    let (ratios, scaling_retries) = scaling_builds();
    let results = [
        run(1, "locate equals naive oracle", || criterion_locate(&suite)),
        run(2, "count equals naive oracle", || criterion_count(&suite)),
        run(3, "worked example", criterion_figure),
        run(4, "split-set size bound", || criterion_split_bound(&suite)),
        run(5, "split completeness", || criterion_split_completeness(&suite)),
        run(6, "structural invariants", || criterion_structure(&suite)),
        run(7, "delta correctness", criterion_delta),
        run(8, "local consistency", criterion_local_consistency),
        run(9, "space scaling", || criterion_space(&ratios)),
        run(10, "Las Vegas retries", || criterion_retries(&suite, &scaling_retries)),
        run(11, "fingerprint algebra", || criterion_fingerprints(&suite)),
    ];
    let failed = results.iter().filter(|&&ok| !ok).count();
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
