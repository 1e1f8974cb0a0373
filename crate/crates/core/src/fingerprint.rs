//! Karp–Rabin fingerprints modulo the Mersenne prime 2^61 − 1.
//!
//! `κ(S) = Σ code(S[i])·c^i mod μ` with 0-based `i` and `code(s) = s + 1`, so
//! that no symbol hashes to zero. Signatures carry `c^|S|` and `c^{−|S|}`
//! alongside `κ` so that concatenation and both splits cost O(1).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::suffix::{lcp_array, suffix_array};
use crate::Sym;

pub const MU: u64 = (1 << 61) - 1;

#[inline]
pub fn mul(a: u64, b: u64) -> u64 {
    let p = a as u128 * b as u128;
    let lo = (p as u64) & MU;
    let hi = (p >> 61) as u64;
    let s = lo + hi;
    if s >= MU {
        s - MU
    } else {
        s
    }
}

#[inline]
pub fn add(a: u64, b: u64) -> u64 {
    let s = a + b;
    if s >= MU {
        s - MU
    } else {
        s
    }
}

#[inline]
pub fn sub(a: u64, b: u64) -> u64 {
    if a >= b {
        a - b
    } else {
        a + MU - b
    }
}

pub fn pow(mut base: u64, mut e: u64) -> u64 {
    let mut acc = 1;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul(acc, base);
        }
        base = mul(base, base);
        e >>= 1;
    }
    acc
}

/// Inverse of a nonzero residue.
pub fn inv(a: u64) -> u64 {
    debug_assert!(!a.is_multiple_of(MU));
    pow(a, MU - 2)
}

#[inline]
pub fn code(s: Sym) -> u64 {
    s as u64 + 1
}

/// Fingerprint of a string together with `c^len` and `c^{−len}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SignatureTriple {
    pub kappa: u64,
    pub pow: u64,
    pub ipow: u64,
    pub len: u64,
}

impl SignatureTriple {
    pub const EMPTY: SignatureTriple = SignatureTriple {
        kappa: 0,
        pow: 1,
        ipow: 1,
        len: 0,
    };
}

/// Signature of `a · b`.
#[inline]
pub fn sig_concat(a: SignatureTriple, b: SignatureTriple) -> SignatureTriple {
    SignatureTriple {
        kappa: add(a.kappa, mul(a.pow, b.kappa)),
        pow: mul(a.pow, b.pow),
        ipow: mul(a.ipow, b.ipow),
        len: a.len + b.len,
    }
}

/// Signature of `b` given those of `a · b` and of its prefix `a`.
#[inline]
pub fn sig_split_right(ab: SignatureTriple, a: SignatureTriple) -> SignatureTriple {
    SignatureTriple {
        kappa: mul(sub(ab.kappa, a.kappa), a.ipow),
        pow: mul(ab.pow, a.ipow),
        ipow: mul(ab.ipow, a.pow),
        len: ab.len - a.len,
    }
}

/// Signature of `a` given those of `a · b` and of its suffix `b`.
#[inline]
pub fn sig_split_left(ab: SignatureTriple, b: SignatureTriple) -> SignatureTriple {
    let pow = mul(ab.pow, b.ipow);
    SignatureTriple {
        kappa: sub(ab.kappa, mul(pow, b.kappa)),
        pow,
        ipow: mul(ab.ipow, b.pow),
        len: ab.len - b.len,
    }
}

/// Key for a string of length `len`: fingerprints of its longest
/// power-of-two prefix and suffix, plus the length. Collision-freeness among
/// power-of-two text substrings makes this key exact for text substrings.
pub type KappaPrime = (u64, u64, u64);

pub fn floor_pow2(len: u64) -> u64 {
    debug_assert!(len > 0);
    1 << (63 - len.leading_zeros())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FingerprintContext {
    pub c: u64,
    pub c_inv: u64,
    pub seed: u64,
    /// Number of draws of `c` rejected by the collision check.
    pub redraws: u32,
    pub verified: bool,
}

impl FingerprintContext {
    pub fn with_base(c: u64, seed: u64) -> Self {
        assert!(c > 1 && c < MU - 1);
        FingerprintContext {
            c,
            c_inv: inv(c),
            seed,
            redraws: 0,
            verified: false,
        }
    }

    #[inline]
    pub fn symbol(&self, s: Sym) -> SignatureTriple {
        SignatureTriple {
            kappa: code(s),
            pow: self.c,
            ipow: self.c_inv,
            len: 1,
        }
    }

    pub fn sig_of(&self, s: &[Sym]) -> SignatureTriple {
        s.iter()
            .fold(SignatureTriple::EMPTY, |acc, &x| sig_concat(acc, self.symbol(x)))
    }

    /// Direct evaluation of `κ` by the defining sum.
    pub fn kappa(&self, s: &[Sym]) -> u64 {
        let mut acc = 0;
        let mut p = 1;
        for &x in s {
            acc = add(acc, mul(code(x), p));
            p = mul(p, self.c);
        }
        acc
    }

    /// Signature of `S^k` given that of `S`. `inv_den` is `(c^|S| − 1)^{−1}`
    /// when that exists; otherwise the power is built by doubling.
    pub fn sig_power(&self, s: SignatureTriple, k: u64, inv_den: Option<u64>) -> SignatureTriple {
        if k == 0 {
            return SignatureTriple::EMPTY;
        }
        let powk = pow(s.pow, k);
        match inv_den {
            Some(d) => SignatureTriple {
                kappa: mul(mul(s.kappa, sub(powk, 1)), d),
                pow: powk,
                ipow: pow(s.ipow, k),
                len: s.len * k,
            },
            None => {
                let mut acc = SignatureTriple::EMPTY;
                let mut base = s;
                let mut e = k;
                while e > 0 {
                    if e & 1 == 1 {
                        acc = sig_concat(acc, base);
                    }
                    base = sig_concat(base, base);
                    e >>= 1;
                }
                acc
            }
        }
    }

    /// `(c^|S| − 1)^{−1}` for a string with signature `s`, if defined.
    pub fn power_denominator(&self, s: SignatureTriple) -> Option<u64> {
        if s.pow == 1 {
            None
        } else {
            Some(inv(sub(s.pow, 1)))
        }
    }
}

/// Prefix fingerprints of one sequence, for O(1) substring signatures.
pub struct TextSigs {
    prefix: Vec<u64>,
    pows: Vec<u64>,
    ipows: Vec<u64>,
}

impl TextSigs {
    pub fn new(ctx: &FingerprintContext, s: &[Sym]) -> Self {
        let n = s.len();
        let mut prefix = Vec::with_capacity(n + 1);
        let mut pows = Vec::with_capacity(n + 1);
        let mut ipows = Vec::with_capacity(n + 1);
        prefix.push(0);
        pows.push(1);
        ipows.push(1);
        for (i, &x) in s.iter().enumerate() {
            prefix.push(add(prefix[i], mul(code(x), pows[i])));
            pows.push(mul(pows[i], ctx.c));
            ipows.push(mul(ipows[i], ctx.c_inv));
        }
        TextSigs { prefix, pows, ipows }
    }

    /// Signature of `s[a..b]`.
    #[inline]
    pub fn sig(&self, a: usize, b: usize) -> SignatureTriple {
        SignatureTriple {
            kappa: mul(sub(self.prefix[b], self.prefix[a]), self.ipows[a]),
            pow: self.pows[b - a],
            ipow: self.ipows[b - a],
            len: (b - a) as u64,
        }
    }

    #[inline]
    pub fn kappa(&self, a: usize, b: usize) -> u64 {
        mul(sub(self.prefix[b], self.prefix[a]), self.ipows[a])
    }

    pub fn kappa_prime(&self, a: usize, b: usize) -> KappaPrime {
        let l = floor_pow2((b - a) as u64) as usize;
        (self.kappa(a, a + l), self.kappa(b - l, b), (b - a) as u64)
    }

    /// Whether `s[a..a+len] == s[b..b+len]`, exact for text substrings once
    /// the context is verified.
    pub fn equal(&self, a: usize, b: usize, len: usize) -> bool {
        if len == 0 || a == b {
            return true;
        }
        let l = floor_pow2(len as u64) as usize;
        self.kappa(a, a + l) == self.kappa(b, b + l)
            && self.kappa(a + len - l, a + len) == self.kappa(b + len - l, b + len)
    }

    /// Longest common prefix of the suffixes at `a` and `b`, capped at `cap`.
    pub fn lcp(&self, a: usize, b: usize, cap: usize) -> usize {
        gallop(cap, |l| self.equal(a, b, l))
    }

    /// Longest common suffix of `s[..a]` and `s[..b]`, capped at `cap`.
    pub fn lcs(&self, a: usize, b: usize, cap: usize) -> usize {
        gallop(cap, |l| self.equal(a - l, b - l, l))
    }
}

/// Largest `l ≤ cap` with `pred(l)`, for a predicate that is monotone
/// decreasing and true at 0. Probes doubling lengths, then bisects.
pub fn gallop(cap: usize, pred: impl Fn(usize) -> bool) -> usize {
    let mut good = 0;
    let mut step = 1;
    loop {
        let probe = good + step;
        if probe > cap {
            break;
        }
        if pred(probe) {
            good = probe;
            step *= 2;
        } else {
            break;
        }
    }
    let mut hi = (good + step).min(cap + 1);
    // good satisfies pred, hi does not (or exceeds cap)
    while hi - good > 1 {
        let mid = good + (hi - good) / 2;
        if pred(mid) {
            good = mid;
        } else {
            hi = mid;
        }
    }
    good
}

/// Checks that no two distinct power-of-two-length substrings of `s` share a
/// fingerprint under `c`. Equality classes come from the suffix array.
pub fn verify_collision_free(
    c: u64,
    s: &[Sym],
    sa: &[u32],
    lcp: &[u32],
    exec: crate::Exec,
) -> bool {
    let ctx = FingerprintContext::with_base(c, 0);
    let sigs = TextSigs::new(&ctx, s);
    let n = s.len();
    let mut lengths = Vec::new();
    let mut l = 1;
    while l <= n {
        lengths.push(l);
        l *= 2;
    }
    let check = |l: usize| -> bool {
        let mut class = vec![0u32; n];
        let mut cls = 0u32;
        for i in 0..n {
            if i == 0 || (lcp[i] as usize) < l {
                cls += 1;
            }
            class[sa[i] as usize] = cls;
        }
        let mut pairs: Vec<(u64, u32)> = (0..=n - l).map(|i| (sigs.kappa(i, i + l), class[i])).collect();
        pairs.sort_unstable();
        pairs.windows(2).all(|w| w[0].0 != w[1].0 || w[0].1 == w[1].1)
    };
    crate::par::all(exec, &lengths, |&l| check(l))
}

/// Draws `c` until the fingerprints of power-of-two substrings of `s` are
/// collision-free.
pub fn make_fingerprint_context(s: &[Sym], seed: u64, exec: crate::Exec) -> FingerprintContext {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sa = suffix_array(s);
    let lcp = lcp_array(s, &sa);
    let mut redraws = 0;
    loop {
        let c = rng.gen_range(2..=MU - 2);
        if verify_collision_free(c, s, &sa, &lcp, exec) {
            let mut ctx = FingerprintContext::with_base(c, seed);
            ctx.redraws = redraws;
            ctx.verified = true;
            return ctx;
        }
        redraws += 1;
    }
}
