//! The substring-complexity measure δ = max over ℓ of T(ℓ)/ℓ, where T(ℓ) is
//! the number of distinct length-ℓ substrings.

use crate::suffix::{lcp_array, suffix_array};

#[derive(Debug, Clone, PartialEq)]
pub struct DeltaProfile {
    /// `t_of_ell[l]` is the number of distinct substrings of length `l`;
    /// entry 0 is unused and set to 0.
    pub t_of_ell: Vec<u64>,
    /// The maximizing ratio as a fraction `best_t / best_ell`.
    pub best_t: u64,
    pub best_ell: u64,
    pub delta: f64,
}

pub fn compute_delta(text: &[u8]) -> DeltaProfile {
    let s: Vec<u32> = text.iter().map(|&b| b as u32).collect();
    compute_delta_syms(&s)
}

/// Each suffix in suffix-array order contributes one new distinct substring
/// for every length above its LCP with the previous suffix.
pub fn compute_delta_syms(s: &[u32]) -> DeltaProfile {
    let n = s.len();
    assert!(n > 0, "δ of an empty sequence");
    let sa = suffix_array(s);
    let lcp = lcp_array(s, &sa);
    let mut diff = vec![0i64; n + 2];
    for (i, &p) in sa.iter().enumerate() {
        let len = n - p as usize;
        let lo = lcp[i] as usize + 1;
        if lo <= len {
            diff[lo] += 1;
            diff[len + 1] -= 1;
        }
    }
    let mut t_of_ell = vec![0u64; n + 1];
    let mut acc = 0i64;
    let (mut best_t, mut best_ell) = (0u64, 1u64);
    for l in 1..=n {
        acc += diff[l];
        let t = acc as u64;
        t_of_ell[l] = t;
        if t as u128 * best_ell as u128 > best_t as u128 * l as u128 {
            best_t = t;
            best_ell = l as u64;
        }
    }
    DeltaProfile {
        t_of_ell,
        best_t,
        best_ell,
        delta: best_t as f64 / best_ell as f64,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unary() {
        let d = compute_delta(b"aaaa");
        assert_eq!(&d.t_of_ell[1..], &[1, 1, 1, 1]);
        assert_eq!(d.delta, 1.0);
    }

    #[test]
    fn abab() {
        let d = compute_delta(b"abab");
        assert_eq!(&d.t_of_ell[1..], &[2, 2, 2, 1]);
        assert_eq!(d.delta, 2.0);
    }

    #[test]
    fn all_distinct() {
        let d = compute_delta(b"qwertyui");
        assert_eq!(d.delta, 8.0);
    }
}
