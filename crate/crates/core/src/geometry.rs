//! Planar geometry and a uniform-grid spatial index.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

/// A point in the deployment plane, in meters.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Position {
    pub x: f64,
    pub y: f64,
}

impl Position {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    #[inline]
    pub fn distance_sq(&self, other: &Position) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }

    #[inline]
    pub fn distance(&self, other: &Position) -> f64 {
        libm::sqrt(self.distance_sq(other))
    }
}

/// Euclidean distance between two positions.
#[inline]
pub fn distance(a: Position, b: Position) -> f64 {
    a.distance(&b)
}

/// Bucket grid over a fixed set of points. Radius queries visit only the
/// cells overlapping the query disc. Boundary is inclusive (`d <= r`).
#[derive(Debug, Clone)]
pub struct GridIndex {
    cell: f64,
    min_x: f64,
    min_y: f64,
    cols: usize,
    rows: usize,
    buckets: Vec<Vec<u32>>,
}

impl GridIndex {
    /// Index `points` (tagged with their `u32` key) using square cells of side `cell`.
    pub fn new(points: impl IntoIterator<Item = (u32, Position)>, cell: f64) -> Self {
        let points: Vec<(u32, Position)> = points.into_iter().collect();
        let cell = if cell.is_finite() && cell > 0.0 { cell } else { 1.0 };
        if points.is_empty() {
            return Self {
                cell,
                min_x: 0.0,
                min_y: 0.0,
                cols: 1,
                rows: 1,
                buckets: vec![Vec::new()],
            };
        }
        let (mut min_x, mut min_y) = (f64::INFINITY, f64::INFINITY);
        let (mut max_x, mut max_y) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
        for (_, p) in &points {
            min_x = min_x.min(p.x);
            min_y = min_y.min(p.y);
            max_x = max_x.max(p.x);
            max_y = max_y.max(p.y);
        }
        // Very small cells over a large extent would allocate a huge grid.
        let extent = (max_x - min_x).max(max_y - min_y);
        let cell = cell.max(extent / 1024.0);
        let cols = ((max_x - min_x) / cell) as usize + 1;
        let rows = ((max_y - min_y) / cell) as usize + 1;
        let mut buckets = vec![Vec::new(); cols * rows];
        let mut index = Self {
            cell,
            min_x,
            min_y,
            cols,
            rows,
            buckets: Vec::new(),
        };
        for (key, p) in &points {
            let (c, r) = index.cell_of(p);
            buckets[r * cols + c].push(*key);
        }
        index.buckets = buckets;
        index
    }

    fn cell_of(&self, p: &Position) -> (usize, usize) {
        let c = ((p.x - self.min_x) / self.cell).max(0.0) as usize;
        let r = ((p.y - self.min_y) / self.cell).max(0.0) as usize;
        (c.min(self.cols - 1), r.min(self.rows - 1))
    }

    /// Calls `visit` with every indexed key whose cell may hold a point within
    /// `radius` of `center`. Callers apply the exact distance test.
    pub fn for_each_candidate(&self, center: &Position, radius: f64, mut visit: impl FnMut(u32)) {
        let span = |v: f64, min: f64, n: usize| -> (usize, usize) {
            let lo = libm::floor((v - radius - min) / self.cell);
            let hi = libm::floor((v + radius - min) / self.cell);
            if hi < 0.0 || lo >= n as f64 {
                return (1, 0);
            }
            (lo.max(0.0) as usize, (hi as usize).min(n - 1))
        };
        let (c0, c1) = span(center.x, self.min_x, self.cols);
        let (r0, r1) = span(center.y, self.min_y, self.rows);
        if c0 > c1 || r0 > r1 {
            return;
        }
        for r in r0..=r1 {
            for c in c0..=c1 {
                for &key in &self.buckets[r * self.cols + c] {
                    visit(key);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_four_five() {
        assert_eq!(distance(Position::new(0.0, 0.0), Position::new(3.0, 4.0)), 5.0);
    }

    #[test]
    fn identity_is_zero() {
        let p = Position::new(12.5, -3.25);
        assert_eq!(distance(p, p), 0.0);
    }

    #[test]
    fn field_diagonal() {
        let d = distance(Position::new(0.0, 0.0), Position::new(1000.0, 1000.0));
        let expected = 1414.213_562_373_095;
        assert!(((d - expected) / expected).abs() < 1e-9);
    }

    #[test]
    fn grid_matches_brute_force() {
        let pts: Vec<(u32, Position)> = (0..200u32)
            .map(|i| {
                let x = ((i * 7919) % 997) as f64;
                let y = ((i * 104_729) % 991) as f64;
                (i, Position::new(x, y))
            })
            .collect();
        let grid = GridIndex::new(pts.iter().copied(), 50.0);
        for &(_, c) in pts.iter().take(20) {
            for r in [0.0, 25.0, 50.0, 130.0] {
                let mut got = Vec::new();
                grid.for_each_candidate(&c, r, |k| {
                    if pts[k as usize].1.distance(&c) <= r {
                        got.push(k)
                    }
                });
                got.sort_unstable();
                let want: Vec<u32> = pts
                    .iter()
                    .filter(|(_, p)| p.distance(&c) <= r)
                    .map(|(k, _)| *k)
                    .collect();
                assert_eq!(got, want);
            }
        }
    }
}
