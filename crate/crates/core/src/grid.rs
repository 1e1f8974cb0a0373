//! Two-dimensional point sets over X/Y ranks.
//!
//! Points are sorted by x-rank and a wavelet matrix over their y-ranks answers
//! rectangle queries. Several points may share an x-rank. Ranges are
//! half-open.

use std::ops::Range;

use crate::wavelet::WaveletMatrix;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Grid<P> {
    xs: Vec<u32>,
    ys: Vec<u32>,
    payload: Vec<P>,
    weighted: bool,
    wm: WaveletMatrix,
}

/// Payload of the locate grid: the grammar-tree node of the child left of
/// the split.
pub type LocateGrid = Grid<u32>;
/// Payload of the counting grid: the point's weight.
pub type CountGrid = Grid<u64>;

impl<P: Copy> Grid<P> {
    fn build(mut points: Vec<(u32, u32, P)>, weight: Option<fn(&P) -> u64>) -> Self {
        points.sort_by_key(|p| (p.0, p.1));
        let xs: Vec<u32> = points.iter().map(|p| p.0).collect();
        let ys: Vec<u32> = points.iter().map(|p| p.1).collect();
        let payload: Vec<P> = points.iter().map(|p| p.2).collect();
        let weights: Option<Vec<u64>> = weight.map(|w| payload.iter().map(w).collect());
        let wm = WaveletMatrix::new(&ys, weights.as_deref());
        Grid {
            xs,
            ys,
            payload,
            weighted: weight.is_some(),
            wm,
        }
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    /// Points as `(x, y, payload)`, sorted by `(x, y)`.
    pub fn points(&self) -> impl Iterator<Item = (u32, u32, P)> + '_ {
        (0..self.len()).map(|i| (self.xs[i], self.ys[i], self.payload[i]))
    }

    fn slots(&self, x: &Range<u32>) -> (usize, usize) {
        let l = self.xs.partition_point(|&v| v < x.start);
        let r = self.xs.partition_point(|&v| v < x.end);
        (l, r.max(l))
    }

    /// Calls `f` on every point in the rectangle until it returns false.
    /// Returns whether the scan completed.
    pub fn report_range(&self, x: Range<u32>, y: Range<u32>, mut f: impl FnMut(P) -> bool) -> bool {
        let (l, r) = self.slots(&x);
        if y.start >= y.end {
            return true;
        }
        self.wm
            .report(l, r, y.start as u64, y.end as u64, &mut |i| f(self.payload[i as usize]))
    }
}

impl LocateGrid {
    pub fn new(points: Vec<(u32, u32, u32)>) -> Self {
        Grid::build(points, None)
    }
}

impl CountGrid {
    pub fn new(points: Vec<(u32, u32, u64)>) -> Self {
        Grid::build(points, Some(|w: &u64| *w))
    }

    /// Total weight of the points in the rectangle.
    pub fn sum_range(&self, x: Range<u32>, y: Range<u32>) -> u64 {
        debug_assert!(self.weighted);
        let (l, r) = self.slots(&x);
        if y.start >= y.end {
            return 0;
        }
        self.wm.sum(l, r, y.start as u64, y.end as u64)
    }
}
