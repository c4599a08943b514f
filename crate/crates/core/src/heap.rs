//! Indexed binary heap with updatable keys.
//!
//! Every coordinate `0..n` is always present; the heap answers
//! argmax/argmin queries under a comparator fixed at construction and
//! restores heap order after a single key change in `O(log n)`. An explicit
//! inverse-position array makes the update path deterministic, and a
//! touched-node counter instruments the logarithmic cost claim.

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HeapOrder {
    Max,
    Min,
}

#[derive(Clone, Debug)]
pub struct IndexedHeap {
    order: HeapOrder,
    keys: Vec<f64>,
    heap: Vec<usize>,
    pos: Vec<usize>,
    updates: u64,
    touched: u64,
}

impl IndexedHeap {
    pub fn new(keys: Vec<f64>, order: HeapOrder) -> Self {
        let n = keys.len();
        let mut h = Self {
            order,
            keys,
            heap: (0..n).collect(),
            pos: (0..n).collect(),
            updates: 0,
            touched: 0,
        };
        h.heapify();
        h
    }

    fn heapify(&mut self) {
        let n = self.heap.len();
        for slot in (0..n / 2).rev() {
            self.sift_down_quiet(slot);
        }
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }

    pub fn key(&self, i: usize) -> f64 {
        self.keys[i]
    }

    pub fn keys(&self) -> &[f64] {
        &self.keys
    }

    /// Coordinate with the best key; ties break to the smaller coordinate.
    ///
    /// Panics on an empty heap.
    pub fn top(&self) -> usize {
        assert!(!self.heap.is_empty(), "top() on an empty heap");
        self.heap[0]
    }

    /// Number of `update` calls so far.
    pub fn updates(&self) -> u64 {
        self.updates
    }

    /// Cumulative count of heap nodes touched by updates (one per key write
    /// plus one per level an entry moved).
    pub fn touched_nodes(&self) -> u64 {
        self.touched
    }

    /// Sets `keys[i] = new_key` and restores heap order.
    ///
    /// Panics when `i` is out of range.
    pub fn update(&mut self, i: usize, new_key: f64) {
        debug_assert!(new_key == new_key, "NaN heap key for coordinate {i}");
        self.keys[i] = new_key;
        self.updates += 1;
        self.touched += 1;
        let slot = self.pos[i];
        let moved = self.sift_up(slot);
        if !moved {
            self.sift_down(slot);
        }
    }

    /// Replaces every key and rebuilds the heap in `O(n)`.
    ///
    /// Used by full refreshes; deliberately not counted as incremental work.
    pub fn rebuild(&mut self, keys: &[f64]) {
        assert_eq!(keys.len(), self.keys.len());
        self.keys.copy_from_slice(keys);
        for (slot, entry) in self.heap.iter_mut().enumerate() {
            *entry = slot;
        }
        for (i, p) in self.pos.iter_mut().enumerate() {
            *p = i;
        }
        self.heapify();
    }

    /// Strict total order: key comparison first, smaller coordinate wins ties.
    fn better(&self, a: usize, b: usize) -> bool {
        let (ka, kb) = (self.keys[a], self.keys[b]);
        let ahead = match self.order {
            HeapOrder::Max => ka > kb,
            HeapOrder::Min => ka < kb,
        };
        ahead || (ka == kb && a < b)
    }

    fn sift_up(&mut self, mut slot: usize) -> bool {
        let mut moved = false;
        while slot > 0 {
            let parent = (slot - 1) / 2;
            if self.better(self.heap[slot], self.heap[parent]) {
                self.swap_slots(slot, parent);
                self.touched += 1;
                slot = parent;
                moved = true;
            } else {
                break;
            }
        }
        moved
    }

    fn sift_down(&mut self, mut slot: usize) {
        let n = self.heap.len();
        loop {
            let left = 2 * slot + 1;
            if left >= n {
                break;
            }
            let mut child = left;
            let right = left + 1;
            if right < n && self.better(self.heap[right], self.heap[left]) {
                child = right;
            }
            if self.better(self.heap[child], self.heap[slot]) {
                self.swap_slots(slot, child);
                self.touched += 1;
                slot = child;
            } else {
                break;
            }
        }
    }

    fn sift_down_quiet(&mut self, slot: usize) {
        let before = self.touched;
        self.sift_down(slot);
        self.touched = before;
    }

    fn swap_slots(&mut self, a: usize, b: usize) {
        self.heap.swap(a, b);
        self.pos[self.heap[a]] = a;
        self.pos[self.heap[b]] = b;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scan_best(keys: &[f64], order: HeapOrder) -> usize {
        let mut best = 0;
        for (i, &k) in keys.iter().enumerate().skip(1) {
            let ahead = match order {
                HeapOrder::Max => k > keys[best],
                HeapOrder::Min => k < keys[best],
            };
            if ahead {
                best = i;
            }
        }
        best
    }

    #[test]
    fn update_moves_top() {
        let mut h = IndexedHeap::new(vec![1.0, 5.0, 3.0], HeapOrder::Max);
        assert_eq!(h.top(), 1);
        h.update(0, 9.0);
        assert_eq!(h.top(), 0);
    }

    #[test]
    fn identity_update_keeps_heap_array() {
        let mut h = IndexedHeap::new(vec![1.0, 5.0, 3.0], HeapOrder::Max);
        let before = h.heap.clone();
        h.update(2, 3.0);
        assert_eq!(h.heap, before);
    }

    #[test]
    fn tie_breaks_to_smaller_index() {
        let h = IndexedHeap::new(vec![2.0, 2.0, 1.0], HeapOrder::Max);
        assert_eq!(h.top(), 0);
        let h = IndexedHeap::new(vec![-3.0, 1.0, 0.0], HeapOrder::Min);
        assert_eq!(h.top(), 0);
    }

    #[test]
    fn random_updates_match_scan_oracle() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        let n = 37;
        let keys: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
        for &order in &[HeapOrder::Max, HeapOrder::Min] {
            let mut h = IndexedHeap::new(keys.clone(), order);
            for _ in 0..1000 {
                let i = rng.random_range(0..n);
                // Coarse grid keys force plenty of exact ties.
                let k = (rng.random::<f64>() * 4.0).floor();
                h.update(i, k);
                assert_eq!(h.top(), scan_best(h.keys(), order));
            }
            for (i, &p) in h.pos.iter().enumerate() {
                assert_eq!(h.heap[p], i);
            }
        }
    }

    #[test]
    fn touched_nodes_stay_logarithmic() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let n = 1000usize;
        let budget = (n as f64).log2().ceil() as u64 + 2;
        let mut h = IndexedHeap::new(vec![0.0; n], HeapOrder::Max);
        for _ in 0..5000 {
            let before = h.touched_nodes();
            h.update(rng.random_range(0..n), rng.random::<f64>() * 100.0 - 50.0);
            assert!(h.touched_nodes() - before <= budget);
        }
    }

    #[test]
    #[should_panic(expected = "empty heap")]
    fn top_on_empty_panics() {
        IndexedHeap::new(Vec::new(), HeapOrder::Max).top();
    }
}
