#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rlindex::corpus;

pub mod figure;

/// 1-based start positions of `p` in `t`, by direct comparison.
pub fn naive_locate(t: &[u8], p: &[u8]) -> Vec<u64> {
    if p.len() > t.len() {
        return Vec::new();
    }
    (0..=t.len() - p.len())
        .filter(|&i| &t[i..i + p.len()] == p)
        .map(|i| i as u64 + 1)
        .collect()
}

#[derive(Debug, Clone)]
pub struct Corpus {
    pub name: String,
    pub text: Vec<u8>,
}

/// The mixed suite: random texts over several alphabets, Fibonacci words,
/// copy-edit collections and a few unary/periodic texts. `scale` multiplies
/// the base lengths.
pub fn suite(scale: usize) -> Vec<Corpus> {
    let mut v = Vec::new();
    let mut add = |name: String, text: Vec<u8>| v.push(Corpus { name, text });
    for (k, sigma) in [2usize, 4, 26].into_iter().enumerate() {
        for (j, n) in [300 * scale, 2000 * scale].into_iter().enumerate() {
            add(format!("random-s{sigma}-{n}"), corpus::random(n, sigma, (k * 10 + j) as u64).unwrap());
        }
    }
    for n in [200 * scale, 3000 * scale, 10_000 * scale] {
        add(format!("fibonacci-{n}"), corpus::fibonacci(n).unwrap());
    }
    for (k, (n, copies, muts, sigma)) in [
        (2000 * scale, 10, 2, 4),
        (4000 * scale, 40, 1, 26),
        (6000 * scale, 20, 5, 2),
        (3000 * scale, 100, 0, 4),
        (10_000 * scale, 25, 3, 26),
    ]
    .into_iter()
    .enumerate()
    {
        add(
            format!("copy-edit-{n}x{copies}m{muts}s{sigma}"),
            corpus::copy_edit(n, copies, muts, sigma, 100 + k as u64).unwrap(),
        );
    }
    add("unary-1000".into(), vec![b'a'; 1000 * scale]);
    add("periodic-abc".into(), b"abc".repeat(500 * scale));
    add("runs".into(), runs_text(3000 * scale, 7));
    add("single".into(), b"x".to_vec());
    add("two".into(), b"xy".to_vec());
    v
}

/// Text made of random runs of random lengths.
pub fn runs_text(n: usize, seed: u64) -> Vec<u8> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = Vec::with_capacity(n);
    while t.len() < n {
        let c = b"ab"[rng.gen_range(0..2)];
        let l = rng.gen_range(1..40);
        t.extend(std::iter::repeat_n(c, l));
    }
    t.truncate(n);
    t
}

/// Present substrings, perturbed copies (mostly absent), and periodic
/// patterns, with lengths in `1..=max_len`.
pub fn patterns(t: &[u8], count: usize, max_len: usize, seed: u64) -> Vec<Vec<u8>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = t.len();
    let mut alpha: Vec<u8> = t.to_vec();
    alpha.sort_unstable();
    alpha.dedup();
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let m = rng.gen_range(1..=max_len.min(n));
        let i = rng.gen_range(0..=n - m);
        let mut p = t[i..i + m].to_vec();
        match rng.gen_range(0..6) {
            0 => {
                let k = rng.gen_range(0..m);
                p[k] = alpha[rng.gen_range(0..alpha.len())].wrapping_add(rng.gen_range(0..2));
            }
            1 => {
                let per = rng.gen_range(1..=m.min(4));
                let unit = p[..per].to_vec();
                p = unit.iter().cycle().take(m).copied().collect();
            }
            _ => {}
        }
        out.push(p);
    }
    out
}
