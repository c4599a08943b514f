//! Sum tree over nonnegative leaf weights: `O(log n)` single-weight updates
//! and weighted sampling by cumulative-interval descent.
//!
//! The tree is a complete binary tree in implicit array layout over the
//! leaves padded to a power of two. Sampling maps `u in [0, 1)` to the leaf
//! whose left-closed cumulative interval contains `u * total`, so a given
//! `u` always resolves to the same coordinate and zero-weight leaves are
//! never returned.

use std::cell::Cell;

/// Internal sums are recomputed bottom-up after this many updates to cap
/// floating-point drift.
const REBUILD_INTERVAL: u64 = 1 << 20;

#[derive(Clone, Debug)]
pub struct SumTree {
    n: usize,
    base: usize,
    nodes: Vec<f64>,
    sets: u64,
    touched: Cell<u64>,
    since_rebuild: u64,
}

impl SumTree {
    pub fn new(weights: &[f64]) -> Self {
        let n = weights.len();
        let base = n.next_power_of_two().max(1);
        let mut t = Self {
            n,
            base,
            nodes: vec![0.0; 2 * base],
            sets: 0,
            touched: Cell::new(0),
            since_rebuild: 0,
        };
        for (i, &w) in weights.iter().enumerate() {
            assert!(w >= 0.0, "negative weight {w} at leaf {i}");
            t.nodes[base + i] = w;
        }
        t.rebuild();
        t
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn total(&self) -> f64 {
        self.nodes[1]
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.nodes[self.base + i]
    }

    /// Number of `set` calls so far.
    pub fn sets(&self) -> u64 {
        self.sets
    }

    /// Cumulative count of nodes touched by sets and samples.
    pub fn touched_nodes(&self) -> u64 {
        self.touched.get()
    }

    /// Sets leaf `i` to `w` and refreshes the path sums to the root.
    ///
    /// Panics on a negative (or NaN) weight or an out-of-range index.
    pub fn set(&mut self, i: usize, w: f64) {
        assert!(w >= 0.0, "negative weight {w} at leaf {i}");
        assert!(i < self.n, "leaf {i} out of range for {} leaves", self.n);
        let mut node = self.base + i;
        self.nodes[node] = w;
        self.bump_touched(1);
        while node > 1 {
            node /= 2;
            self.nodes[node] = self.nodes[2 * node] + self.nodes[2 * node + 1];
            self.bump_touched(1);
        }
        self.sets += 1;
        self.since_rebuild += 1;
        if self.since_rebuild >= REBUILD_INTERVAL {
            self.rebuild();
        }
    }

    /// Recomputes every internal sum bottom-up.
    pub fn rebuild(&mut self) {
        for node in (1..self.base).rev() {
            self.nodes[node] = self.nodes[2 * node] + self.nodes[2 * node + 1];
        }
        self.since_rebuild = 0;
    }

    /// Maps `u in [0, 1)` to the leaf whose cumulative interval
    /// `[C_{i-1}, C_i)` contains `u * total` (leaves ordered by index).
    ///
    /// Panics when the total weight is zero.
    pub fn sample(&self, u: f64) -> usize {
        assert!((0.0..1.0).contains(&u), "u = {u} outside [0, 1)");
        let total = self.total();
        assert!(total > 0.0, "sample from an all-zero tree");
        let mut target = u * total;
        let mut node = 1;
        while node < self.base {
            let left = 2 * node;
            let left_sum = self.nodes[left];
            let right_sum = self.nodes[left + 1];
            // Strict `<` keeps intervals left-closed; an empty right subtree
            // forces left so drift can never select a zero leaf.
            node = if target < left_sum || right_sum <= 0.0 {
                left
            } else {
                target -= left_sum;
                left + 1
            };
            self.bump_touched(1);
        }
        node - self.base
    }

    fn bump_touched(&self, by: u64) {
        self.touched.set(self.touched.get() + by);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn set_updates_total() {
        let mut t = SumTree::new(&[1.0, 3.0]);
        assert_eq!(t.total(), 4.0);
        t.set(1, 0.0);
        assert_eq!(t.total(), 1.0);
        t.set(0, 1.0);
        assert_eq!(t.total(), 1.0);
    }

    #[test]
    fn sample_follows_cumulative_intervals() {
        let t = SumTree::new(&[1.0, 3.0]);
        assert_eq!(t.sample(0.1), 0); // 0.4 < 1
        assert_eq!(t.sample(0.5), 1); // 2.0 >= 1
        assert_eq!(t.sample(0.25), 1); // boundary: interval is left-closed
    }

    #[test]
    fn zero_weight_leaves_unreachable() {
        let t = SumTree::new(&[2.0, 0.0, 2.0]);
        assert_eq!(t.sample(0.5), 2);
        for step in 0..100 {
            let u = step as f64 / 100.0;
            assert_ne!(t.sample(u), 1);
        }
    }

    #[test]
    fn totals_track_direct_sums() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let n = 257;
        let mut weights = vec![0.0f64; n];
        let mut t = SumTree::new(&weights);
        for _ in 0..10_000 {
            let i = rng.random_range(0..n);
            let w = rng.random::<f64>() * 10.0;
            weights[i] = w;
            t.set(i, w);
            let direct: f64 = weights.iter().sum();
            assert!((t.total() - direct).abs() <= 1e-9 * direct.max(1.0));
        }
    }

    #[test]
    fn sampling_frequencies_match_weights() {
        use rand::{Rng, SeedableRng};
        let weights = [0.5, 0.0, 3.0, 1.5, 0.25];
        let t = SumTree::new(&weights);
        let total: f64 = weights.iter().sum();
        let draws = 100_000usize;
        let mut counts = vec![0usize; weights.len()];
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..draws {
            counts[t.sample(rng.random::<f64>())] += 1;
        }
        for (i, &w) in weights.iter().enumerate() {
            let p = w / total;
            let se = (p * (1.0 - p) / draws as f64).sqrt();
            let observed = counts[i] as f64 / draws as f64;
            assert!(
                (observed - p).abs() <= 3.0 * se + 1e-12,
                "leaf {i}: observed {observed}, expected {p} +- {se}"
            );
        }
    }

    #[test]
    fn touched_nodes_stay_logarithmic() {
        let n = 1000usize;
        let budget = (n as f64).log2().ceil() as u64 + 2;
        let mut t = SumTree::new(&vec![1.0; n]);
        for i in 0..n {
            let before = t.touched_nodes();
            t.set(i, 2.0);
            assert!(t.touched_nodes() - before <= budget);
        }
        let before = t.touched_nodes();
        t.sample(0.37);
        assert!(t.touched_nodes() - before <= budget);
    }

    #[test]
    #[should_panic(expected = "negative weight")]
    fn negative_weight_panics() {
        SumTree::new(&[1.0]).set(0, -0.5);
    }

    #[test]
    #[should_panic(expected = "all-zero tree")]
    fn sample_from_zero_total_panics() {
        SumTree::new(&[0.0, 0.0]).sample(0.5);
    }
}
