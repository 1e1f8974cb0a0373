//! Suffix and LCP arrays over integer sequences.
//!
//! Prefix doubling with counting sorts, O(n log n). The alphabet is arbitrary
//! `u32`, which rules out the byte-only suffix array crates.

/// Suffix array of `s`.
pub fn suffix_array(s: &[u32]) -> Vec<u32> {
    let n = s.len();
    if n == 0 {
        return Vec::new();
    }
    let mut alphabet = s.to_vec();
    alphabet.sort_unstable();
    alphabet.dedup();
    let mut rank: Vec<u32> = s
        .iter()
        .map(|c| alphabet.binary_search(c).unwrap() as u32)
        .collect();
    let mut classes = alphabet.len();
    let mut sa: Vec<u32> = (0..n as u32).collect();
    sa.sort_unstable_by_key(|&i| rank[i as usize]);
    let mut order = vec![0u32; n];
    let mut next_rank = vec![0u32; n];
    let mut count = Vec::new();
    let mut k = 1usize;
    while classes < n {
        // Order by the second half: suffixes without one come first.
        let mut p = 0;
        for i in n - k.min(n)..n {
            order[p] = i as u32;
            p += 1;
        }
        for &j in &sa {
            if j as usize >= k {
                order[p] = j - k as u32;
                p += 1;
            }
        }
        // Stable counting sort by the first half.
        count.clear();
        count.resize(classes + 1, 0usize);
        for &r in &rank {
            count[r as usize + 1] += 1;
        }
        for c in 1..=classes {
            count[c] += count[c - 1];
        }
        for &i in &order {
            let r = rank[i as usize] as usize;
            sa[count[r]] = i;
            count[r] += 1;
        }
        let second = |i: usize| -> i64 {
            if i + k < n {
                rank[i + k] as i64
            } else {
                -1
            }
        };
        next_rank[sa[0] as usize] = 0;
        classes = 1;
        for j in 1..n {
            let a = sa[j - 1] as usize;
            let b = sa[j] as usize;
            if rank[a] != rank[b] || second(a) != second(b) {
                classes += 1;
            }
            next_rank[b] = (classes - 1) as u32;
        }
        std::mem::swap(&mut rank, &mut next_rank);
        k *= 2;
    }
    sa
}

/// Kasai LCP array: `lcp[i]` is the longest common prefix of the suffixes
/// `sa[i - 1]` and `sa[i]`, with `lcp[0] = 0`.
pub fn lcp_array(s: &[u32], sa: &[u32]) -> Vec<u32> {
    let n = s.len();
    let mut inv = vec![0u32; n];
    for (i, &p) in sa.iter().enumerate() {
        inv[p as usize] = i as u32;
    }
    let mut lcp = vec![0u32; n];
    let mut h = 0usize;
    for i in 0..n {
        let r = inv[i] as usize;
        if r == 0 {
            h = 0;
            continue;
        }
        let j = sa[r - 1] as usize;
        while i + h < n && j + h < n && s[i + h] == s[j + h] {
            h += 1;
        }
        lcp[r] = h as u32;
        h = h.saturating_sub(1);
    }
    lcp
}
