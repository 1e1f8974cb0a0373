//! Deterministic test corpora.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CorpusError {
    #[error("corpus size must be positive")]
    EmptySize,
    #[error("alphabet size must be in 1..=256, got {0}")]
    Alphabet(usize),
    #[error("copy count must be in 1..=size")]
    Copies,
}

/// Symbol `k` of an alphabet of size `sigma`: lowercase letters first, so
/// small alphabets stay printable.
fn letter(k: usize, sigma: usize) -> u8 {
    if sigma <= 26 {
        b'a' + k as u8
    } else {
        k as u8
    }
}

fn check_sigma(sigma: usize) -> Result<(), CorpusError> {
    if sigma == 0 || sigma > 256 {
        return Err(CorpusError::Alphabet(sigma));
    }
    Ok(())
}

/// Uniform i.i.d. text over `sigma` letters.
pub fn random(size: usize, sigma: usize, seed: u64) -> Result<Vec<u8>, CorpusError> {
    if size == 0 {
        return Err(CorpusError::EmptySize);
    }
    check_sigma(sigma)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..size).map(|_| letter(rng.gen_range(0..sigma), sigma)).collect())
}

/// The first `size` symbols of the Fibonacci word `S_k = S_{k−1} S_{k−2}`,
/// `S_1 = a`, `S_2 = ab`.
pub fn fibonacci(size: usize) -> Result<Vec<u8>, CorpusError> {
    if size == 0 {
        return Err(CorpusError::EmptySize);
    }
    let (mut prev, mut cur) = (b"a".to_vec(), b"ab".to_vec());
    while cur.len() < size {
        let next = [cur.as_slice(), prev.as_slice()].concat();
        prev = cur;
        cur = next;
    }
    cur.truncate(size);
    Ok(cur)
}

/// A random base of length `size / copies` followed by `copies − 1` further
/// copies, each with `mutations` random point substitutions.
pub fn copy_edit(
    size: usize,
    copies: usize,
    mutations: usize,
    sigma: usize,
    seed: u64,
) -> Result<Vec<u8>, CorpusError> {
    if size == 0 {
        return Err(CorpusError::EmptySize);
    }
    check_sigma(sigma)?;
    if copies == 0 || copies > size {
        return Err(CorpusError::Copies);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let base_len = size / copies;
    let base: Vec<u8> = (0..base_len)
        .map(|_| letter(rng.gen_range(0..sigma), sigma))
        .collect();
    let mut out = Vec::with_capacity(base_len * copies);
    out.extend_from_slice(&base);
    for _ in 1..copies {
        let at = out.len();
        out.extend_from_slice(&base);
        for _ in 0..mutations {
            let k = at + rng.gen_range(0..base_len);
            out[k] = letter(rng.gen_range(0..sigma), sigma);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fibonacci_prefix() {
        assert_eq!(fibonacci(13).unwrap(), b"abaababaabaab");
        assert_eq!(fibonacci(1).unwrap(), b"a");
        assert_eq!(fibonacci(0), Err(CorpusError::EmptySize));
    }

    #[test]
    fn random_is_deterministic() {
        assert_eq!(random(100, 4, 9).unwrap(), random(100, 4, 9).unwrap());
        assert!(random(100, 4, 9).unwrap().iter().all(|b| (b'a'..b'e').contains(b)));
        assert_eq!(random(0, 4, 9), Err(CorpusError::EmptySize));
    }

    #[test]
    fn copies_without_mutations() {
        let t = copy_edit(40, 4, 0, 26, 3).unwrap();
        assert_eq!(t.len(), 40);
        for c in t.chunks(10) {
            assert_eq!(c, &t[..10]);
        }
    }
}
