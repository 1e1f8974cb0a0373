//! Wavelet matrix over integer sequences with optional per-element weights.
//!
//! Supports listing the positions of a position range whose values fall in a
//! value range, and summing their weights, in O(log σ) steps per reported
//! element (plus O(log σ) overall).

#[derive(Debug, Clone, PartialEq, Eq)]
struct BitVec {
    words: Vec<u64>,
    /// Ones before each word.
    before: Vec<u32>,
}

impl BitVec {
    fn from_bits(bits: impl Iterator<Item = bool>, len: usize) -> Self {
        let mut words = vec![0u64; len.div_ceil(64)];
        for (i, b) in bits.enumerate() {
            if b {
                words[i / 64] |= 1 << (i % 64);
            }
        }
        let mut before = Vec::with_capacity(words.len() + 1);
        let mut acc = 0u32;
        for w in &words {
            before.push(acc);
            acc += w.count_ones();
        }
        before.push(acc);
        BitVec { words, before }
    }

    #[inline]
    fn rank1(&self, i: usize) -> usize {
        let w = i / 64;
        let r = i % 64;
        let mut c = self.before[w] as usize;
        if r > 0 {
            c += (self.words[w] & ((1u64 << r) - 1)).count_ones() as usize;
        }
        c
    }

    #[inline]
    fn rank0(&self, i: usize) -> usize {
        i - self.rank1(i)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WaveletMatrix {
    len: usize,
    levels: usize,
    bits: Vec<BitVec>,
    zeros: Vec<usize>,
    /// Original position of each element in the bottom-level order.
    bottom: Vec<u32>,
    /// `sums[d][i]`: total weight of the first `i` elements in level-`d`
    /// order; level `levels` is the bottom order. Empty when unweighted.
    sums: Vec<Vec<u64>>,
}

impl WaveletMatrix {
    pub fn new(values: &[u32], weights: Option<&[u64]>) -> Self {
        let len = values.len();
        let max = values.iter().copied().max().unwrap_or(0);
        let levels = (32 - max.leading_zeros()).max(1) as usize;
        let mut cur: Vec<u32> = (0..len as u32).collect();
        let mut bits = Vec::with_capacity(levels);
        let mut zeros = Vec::with_capacity(levels);
        let mut sums = Vec::new();
        let prefix = |order: &[u32], w: &[u64]| {
            let mut s = Vec::with_capacity(order.len() + 1);
            s.push(0u64);
            let mut acc = 0;
            for &i in order {
                acc += w[i as usize];
                s.push(acc);
            }
            s
        };
        for d in 0..levels {
            let shift = levels - 1 - d;
            if let Some(w) = weights {
                sums.push(prefix(&cur, w));
            }
            let bit = |i: u32| (values[i as usize] >> shift) & 1 == 1;
            bits.push(BitVec::from_bits(cur.iter().map(|&i| bit(i)), len));
            let (z, o): (Vec<u32>, Vec<u32>) = cur.iter().partition(|&&i| !bit(i));
            zeros.push(z.len());
            cur = z;
            cur.extend(o);
        }
        if let Some(w) = weights {
            sums.push(prefix(&cur, w));
        }
        WaveletMatrix {
            len,
            levels,
            bits,
            zeros,
            bottom: cur,
            sums,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Calls `f` with the original position of every element in positions
    /// `[l, r)` whose value lies in `[y1, y2)`. Stops early when `f` returns
    /// false; the return value tells whether the scan ran to completion.
    pub fn report(&self, l: usize, r: usize, y1: u64, y2: u64, f: &mut impl FnMut(u32) -> bool) -> bool {
        self.report_rec(0, l, r, 0, y1, y2, f)
    }

    #[allow(clippy::too_many_arguments)]
    fn report_rec(
        &self,
        d: usize,
        l: usize,
        r: usize,
        vlo: u64,
        y1: u64,
        y2: u64,
        f: &mut impl FnMut(u32) -> bool,
    ) -> bool {
        if l >= r {
            return true;
        }
        let vhi = vlo + (1u64 << (self.levels - d));
        if vhi <= y1 || vlo >= y2 {
            return true;
        }
        if d == self.levels {
            return self.bottom[l..r].iter().all(|&i| f(i));
        }
        let bv = &self.bits[d];
        let half = 1u64 << (self.levels - d - 1);
        let (l0, r0) = (bv.rank0(l), bv.rank0(r));
        let (l1, r1) = (self.zeros[d] + l - l0, self.zeros[d] + r - r0);
        self.report_rec(d + 1, l0, r0, vlo, y1, y2, f)
            && self.report_rec(d + 1, l1, r1, vlo + half, y1, y2, f)
    }

    /// Total weight of the elements in positions `[l, r)` with values in
    /// `[y1, y2)`.
    pub fn sum(&self, l: usize, r: usize, y1: u64, y2: u64) -> u64 {
        assert!(!self.sums.is_empty(), "wavelet matrix built without weights");
        self.sum_rec(0, l, r, 0, y1, y2)
    }

    fn sum_rec(&self, d: usize, l: usize, r: usize, vlo: u64, y1: u64, y2: u64) -> u64 {
        if l >= r {
            return 0;
        }
        let vhi = vlo + (1u64 << (self.levels - d));
        if vhi <= y1 || vlo >= y2 {
            return 0;
        }
        if y1 <= vlo && vhi <= y2 {
            return self.sums[d][r] - self.sums[d][l];
        }
        let bv = &self.bits[d];
        let half = 1u64 << (self.levels - d - 1);
        let (l0, r0) = (bv.rank0(l), bv.rank0(r));
        let (l1, r1) = (self.zeros[d] + l - l0, self.zeros[d] + r - r0);
        self.sum_rec(d + 1, l0, r0, vlo, y1, y2) + self.sum_rec(d + 1, l1, r1, vlo + half, y1, y2)
    }
}
