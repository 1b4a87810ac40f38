//! Recency queue with counter-bearing boundary regions.
//!
//! `LruQueue` is a doubly-linked list over a slab of nodes, most-recent
//! first, with a page-id index for O(1) membership. Optionally the top
//! `read_len` and `write_len` positions form counter regions. Counters are
//! maintained with the touch-time housekeeping rule: every touch, after
//! the reorder, zeroes the read counter of the entry at position
//! `read_len` and the write counter of the entry at position `write_len`
//! (the first position past each region). Inserts and removals move
//! entries across a boundary without clearing anything, so a counter
//! pushed out by an insert can resurface if its page climbs back in
//! before any touch lands on the boundary position. Two cursors track the
//! last in-region node per boundary, so touch, insert, evict, and remove
//! stay O(1) — rank scans never happen on the hot path.

use std::collections::HashMap;

use crate::trace::PageId;

const NIL: usize = usize::MAX;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum QueueError {
    #[error("page {0} is not resident")]
    Missing(PageId),
    #[error("page {0} is already resident")]
    Duplicate(PageId),
    #[error("queue is full")]
    Full,
    #[error("queue is empty")]
    Empty,
}

/// Region membership of a page at the moment it was touched (before the
/// move to front).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TouchInfo {
    pub in_read_region: bool,
    pub in_write_region: bool,
}

struct Node {
    page: PageId,
    prev: usize,
    next: usize,
    read_count: u64,
    write_count: u64,
    in_read: bool,
    in_write: bool,
}

struct Regions {
    read_len: usize,
    write_len: usize,
    /// Slab index of the node at rank `read_len - 1`, NIL while len < read_len.
    read_boundary: usize,
    /// Slab index of the node at rank `write_len - 1`, NIL while len < write_len.
    write_boundary: usize,
}

pub struct LruQueue {
    nodes: Vec<Node>,
    free: Vec<usize>,
    index: HashMap<PageId, usize>,
    head: usize,
    tail: usize,
    len: usize,
    capacity: usize,
    regions: Option<Regions>,
}

impl LruQueue {
    /// A plain recency queue without counter regions.
    pub fn new(capacity: usize) -> Self {
        assert!(capacity >= 1, "queue capacity must be >= 1");
        LruQueue {
            nodes: Vec::with_capacity(capacity),
            free: Vec::new(),
            index: HashMap::with_capacity(capacity),
            head: NIL,
            tail: NIL,
            len: 0,
            capacity,
            regions: None,
        }
    }

    /// A queue whose top `read_len` / `write_len` positions carry read and
    /// write counters. Requires `1 <= read_len <= write_len <= capacity`.
    pub fn with_regions(capacity: usize, read_len: usize, write_len: usize) -> Self {
        assert!(
            (1..=write_len).contains(&read_len) && write_len <= capacity,
            "need 1 <= read_len <= write_len <= capacity"
        );
        let mut q = LruQueue::new(capacity);
        q.regions = Some(Regions {
            read_len,
            write_len,
            read_boundary: NIL,
            write_boundary: NIL,
        });
        q
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn is_full(&self) -> bool {
        self.len == self.capacity
    }

    pub fn contains(&self, page: PageId) -> bool {
        self.index.contains_key(&page)
    }

    /// Moves a resident page to the front and applies the touch-time
    /// housekeeping: the read counter of the entry now at position
    /// `read_len` and the write counter of the entry now at position
    /// `write_len` are zeroed. Returns the page's region membership from
    /// before the move.
    pub fn touch(&mut self, page: PageId) -> Result<TouchInfo, QueueError> {
        let &idx = self.index.get(&page).ok_or(QueueError::Missing(page))?;
        let info = TouchInfo {
            in_read_region: self.nodes[idx].in_read,
            in_write_region: self.nodes[idx].in_write,
        };
        if self.head != idx {
            let old_prev = self.nodes[idx].prev;
            self.unlink(idx);
            self.push_front(idx);
            if let Some(rg) = self.regions.as_mut() {
                if !info.in_read_region {
                    // The touched node enters the region from below; the
                    // old last-in-region node is pushed out.
                    let b = rg.read_boundary;
                    debug_assert_ne!(b, NIL);
                    self.nodes[b].in_read = false;
                    rg.read_boundary = self.nodes[b].prev;
                    self.nodes[idx].in_read = true;
                } else if rg.read_boundary == idx {
                    rg.read_boundary = old_prev;
                }
                if !info.in_write_region {
                    let b = rg.write_boundary;
                    debug_assert_ne!(b, NIL);
                    self.nodes[b].in_write = false;
                    rg.write_boundary = self.nodes[b].prev;
                    self.nodes[idx].in_write = true;
                } else if rg.write_boundary == idx {
                    rg.write_boundary = old_prev;
                }
            }
        }
        if let Some(rg) = self.regions.as_ref() {
            // Touch-time housekeeping fires on every touch, reorder or not.
            if self.len > rg.read_len {
                let out = self.nodes[rg.read_boundary].next;
                self.nodes[out].read_count = 0;
            }
            if self.len > rg.write_len {
                let out = self.nodes[rg.write_boundary].next;
                self.nodes[out].write_count = 0;
            }
        }
        Ok(info)
    }

    /// Inserts a new page at the front with zeroed counters.
    pub fn insert(&mut self, page: PageId) -> Result<(), QueueError> {
        if self.index.contains_key(&page) {
            return Err(QueueError::Duplicate(page));
        }
        if self.is_full() {
            return Err(QueueError::Full);
        }
        let idx = self.alloc(page);
        self.push_front(idx);
        self.index.insert(page, idx);
        self.len += 1;
        if let Some(rg) = self.regions.as_mut() {
            self.nodes[idx].in_read = true;
            self.nodes[idx].in_write = true;
            if self.len > rg.read_len {
                // The last in-region node is pushed out; its counter
                // survives until a touch lands on the boundary position.
                let b = rg.read_boundary;
                self.nodes[b].in_read = false;
                rg.read_boundary = self.nodes[b].prev;
            } else if self.len == rg.read_len {
                rg.read_boundary = self.tail;
            }
            if self.len > rg.write_len {
                let b = rg.write_boundary;
                self.nodes[b].in_write = false;
                rg.write_boundary = self.nodes[b].prev;
            } else if self.len == rg.write_len {
                rg.write_boundary = self.tail;
            }
        }
        Ok(())
    }

    /// Removes and returns the least-recent page.
    pub fn evict(&mut self) -> Result<PageId, QueueError> {
        if self.tail == NIL {
            return Err(QueueError::Empty);
        }
        let page = self.nodes[self.tail].page;
        self.remove(page)?;
        Ok(page)
    }

    /// Removes a resident page from anywhere in the queue.
    pub fn remove(&mut self, page: PageId) -> Result<(), QueueError> {
        let idx = self.index.remove(&page).ok_or(QueueError::Missing(page))?;
        if let Some(rg) = self.regions.as_mut() {
            if self.nodes[idx].in_read {
                if self.len > rg.read_len {
                    // The first node past the boundary slides into the region.
                    let b = rg.read_boundary;
                    let s = if b == idx {
                        self.nodes[idx].next
                    } else {
                        self.nodes[b].next
                    };
                    self.nodes[s].in_read = true;
                    rg.read_boundary = s;
                } else {
                    rg.read_boundary = NIL;
                }
            }
            if self.nodes[idx].in_write {
                if self.len > rg.write_len {
                    let b = rg.write_boundary;
                    let s = if b == idx {
                        self.nodes[idx].next
                    } else {
                        self.nodes[b].next
                    };
                    self.nodes[s].in_write = true;
                    rg.write_boundary = s;
                } else {
                    rg.write_boundary = NIL;
                }
            }
        }
        self.unlink(idx);
        self.free.push(idx);
        self.len -= 1;
        Ok(())
    }

    /// Applies the counter-update rule for a read of a resident page:
    /// increment if the access found the page inside the read region,
    /// otherwise restart the counter at 1. Returns the new value.
    pub fn record_read(&mut self, page: PageId, within_region: bool) -> Result<u64, QueueError> {
        let &idx = self.index.get(&page).ok_or(QueueError::Missing(page))?;
        let node = &mut self.nodes[idx];
        node.read_count = if within_region {
            node.read_count + 1
        } else {
            1
        };
        Ok(node.read_count)
    }

    /// Write-side counterpart of [`LruQueue::record_read`].
    pub fn record_write(&mut self, page: PageId, within_region: bool) -> Result<u64, QueueError> {
        let &idx = self.index.get(&page).ok_or(QueueError::Missing(page))?;
        let node = &mut self.nodes[idx];
        node.write_count = if within_region {
            node.write_count + 1
        } else {
            1
        };
        Ok(node.write_count)
    }

    /// `(read_count, write_count)` of a resident page.
    pub fn counters_of(&self, page: PageId) -> Option<(u64, u64)> {
        let &idx = self.index.get(&page)?;
        Some((self.nodes[idx].read_count, self.nodes[idx].write_count))
    }

    /// Rank of a resident page, 0 = most recent. O(n); inspection only.
    pub fn rank_of(&self, page: PageId) -> Option<usize> {
        let &idx = self.index.get(&page)?;
        let mut at = self.head;
        let mut rank = 0;
        while at != NIL {
            if at == idx {
                return Some(rank);
            }
            at = self.nodes[at].next;
            rank += 1;
        }
        None
    }

    /// Pages from most to least recent. O(n); inspection only.
    pub fn pages_mru_to_lru(&self) -> Vec<PageId> {
        let mut out = Vec::with_capacity(self.len);
        let mut at = self.head;
        while at != NIL {
            out.push(self.nodes[at].page);
            at = self.nodes[at].next;
        }
        out
    }

    /// Full structural scan used by tests: link symmetry, index agreement,
    /// and region flags and cursors consistent with literal ranks.
    pub fn check_invariants(&self) -> Result<(), String> {
        let mut at = self.head;
        let mut prev = NIL;
        let mut rank = 0usize;
        while at != NIL {
            let node = &self.nodes[at];
            if node.prev != prev {
                return Err(format!("broken prev link at rank {rank}"));
            }
            if self.index.get(&node.page) != Some(&at) {
                return Err(format!("index mismatch for page {}", node.page));
            }
            if let Some(rg) = &self.regions {
                let want_read = rank < rg.read_len;
                let want_write = rank < rg.write_len;
                if node.in_read != want_read {
                    return Err(format!("read flag wrong at rank {rank}"));
                }
                if node.in_write != want_write {
                    return Err(format!("write flag wrong at rank {rank}"));
                }
                if rank + 1 == rg.read_len && rg.read_boundary != at {
                    return Err("read boundary cursor out of place".to_string());
                }
                if rank + 1 == rg.write_len && rg.write_boundary != at {
                    return Err("write boundary cursor out of place".to_string());
                }
            }
            prev = at;
            at = node.next;
            rank += 1;
        }
        if prev != self.tail {
            return Err("tail link broken".to_string());
        }
        if rank != self.len || self.index.len() != self.len {
            return Err("length bookkeeping broken".to_string());
        }
        if let Some(rg) = &self.regions {
            if self.len < rg.read_len && rg.read_boundary != NIL {
                return Err("read boundary should be unset".to_string());
            }
            if self.len < rg.write_len && rg.write_boundary != NIL {
                return Err("write boundary should be unset".to_string());
            }
        }
        Ok(())
    }

    fn alloc(&mut self, page: PageId) -> usize {
        let node = Node {
            page,
            prev: NIL,
            next: NIL,
            read_count: 0,
            write_count: 0,
            in_read: false,
            in_write: false,
        };
        if let Some(idx) = self.free.pop() {
            self.nodes[idx] = node;
            idx
        } else {
            self.nodes.push(node);
            self.nodes.len() - 1
        }
    }

    fn push_front(&mut self, idx: usize) {
        self.nodes[idx].prev = NIL;
        self.nodes[idx].next = self.head;
        if self.head != NIL {
            self.nodes[self.head].prev = idx;
        }
        self.head = idx;
        if self.tail == NIL {
            self.tail = idx;
        }
    }

    fn unlink(&mut self, idx: usize) {
        let (prev, next) = (self.nodes[idx].prev, self.nodes[idx].next);
        if prev != NIL {
            self.nodes[prev].next = next;
        } else {
            self.head = next;
        }
        if next != NIL {
            self.nodes[next].prev = prev;
        } else {
            self.tail = prev;
        }
        self.nodes[idx].prev = NIL;
        self.nodes[idx].next = NIL;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn filled(capacity: usize, read_len: usize, write_len: usize, n: usize) -> LruQueue {
        // Inserting 0..n leaves page n-1 at rank 0 and page 0 at rank n-1.
        let mut q = LruQueue::with_regions(capacity, read_len, write_len);
        for p in 0..n as PageId {
            q.insert(p).unwrap();
        }
        q.check_invariants().unwrap();
        q
    }

    #[test]
    fn touch_moves_to_front_and_reports_prior_rank() {
        let mut q = LruQueue::new(4);
        for p in [2, 1, 0] {
            q.insert(p).unwrap();
        }
        // Order is [0, 1, 2]; touching 2 (rank 2) gives [2, 0, 1].
        assert_eq!(q.rank_of(2), Some(2));
        q.touch(2).unwrap();
        assert_eq!(q.pages_mru_to_lru(), vec![2, 0, 1]);
    }

    #[test]
    fn touching_the_front_page_changes_nothing() {
        let mut q = LruQueue::new(4);
        q.insert(1).unwrap();
        q.insert(2).unwrap();
        q.touch(2).unwrap();
        assert_eq!(q.rank_of(2), Some(0));
        assert_eq!(q.pages_mru_to_lru(), vec![2, 1]);
    }

    #[test]
    fn touch_of_missing_page_errors() {
        let mut q = LruQueue::new(2);
        assert_eq!(q.touch(9), Err(QueueError::Missing(9)));
    }

    #[test]
    fn boundary_crossing_resets_read_counter() {
        // Capacity 10, read region = top 2: touching a deep page pushes the
        // former rank-1 page to rank 2 and clears its read counter.
        let mut q = filled(10, 2, 4, 10);
        let rank1 = q.pages_mru_to_lru()[1];
        q.record_read(rank1, true).unwrap();
        q.record_read(rank1, true).unwrap();
        q.record_read(rank1, true).unwrap();
        assert_eq!(q.counters_of(rank1).unwrap().0, 3);
        let deep = q.pages_mru_to_lru()[5];
        let info = q.touch(deep).unwrap();
        assert!(!info.in_read_region && !info.in_write_region);
        assert_eq!(q.rank_of(rank1), Some(2));
        assert_eq!(q.counters_of(rank1).unwrap().0, 0);
        q.check_invariants().unwrap();
    }

    #[test]
    fn in_region_touch_preserves_other_counters() {
        let mut q = filled(10, 3, 5, 10);
        let order = q.pages_mru_to_lru();
        q.record_write(order[2], true).unwrap();
        // Touching the rank-1 page reorders only inside the region.
        let info = q.touch(order[1]).unwrap();
        assert!(info.in_read_region && info.in_write_region);
        assert_eq!(q.counters_of(order[2]).unwrap().1, 1);
        q.check_invariants().unwrap();
    }

    #[test]
    fn evict_returns_least_recent() {
        let mut q = LruQueue::new(3);
        for p in [2, 1, 0] {
            q.insert(p).unwrap();
        }
        assert_eq!(q.evict().unwrap(), 2);
        assert_eq!(q.evict().unwrap(), 1);
        assert_eq!(q.evict().unwrap(), 0);
        assert_eq!(q.evict(), Err(QueueError::Empty));
    }

    #[test]
    fn insert_rejects_duplicates_and_overflow() {
        let mut q = LruQueue::new(2);
        q.insert(1).unwrap();
        assert_eq!(q.insert(1), Err(QueueError::Duplicate(1)));
        q.insert(2).unwrap();
        assert_eq!(q.insert(3), Err(QueueError::Full));
    }

    #[test]
    fn head_removal_slides_next_page_into_region() {
        let mut q = filled(8, 2, 3, 8);
        let order = q.pages_mru_to_lru();
        q.remove(order[0]).unwrap();
        q.check_invariants().unwrap();
        assert_eq!(q.rank_of(order[2]), Some(1));
    }

    // Reference: a naive move-to-front vector with full scans.
    #[derive(Default)]
    struct NaiveList {
        pages: Vec<PageId>,
    }

    impl NaiveList {
        fn touch(&mut self, p: PageId) -> bool {
            if let Some(i) = self.pages.iter().position(|&x| x == p) {
                let v = self.pages.remove(i);
                self.pages.insert(0, v);
                true
            } else {
                false
            }
        }
    }

    proptest! {
        // Queue order equals the naive move-to-front list under random
        // touch/insert/evict/remove sequences, and every structural
        // invariant survives every step.
        #[test]
        fn matches_naive_list(ops in proptest::collection::vec((0u8..4, 0u64..24), 1..400),
                              capacity in 1usize..12,
                              read_len in 1usize..6,
                              extra in 0usize..6) {
            let read_len = read_len.min(capacity);
            let write_len = (read_len + extra).min(capacity);
            let mut q = LruQueue::with_regions(capacity, read_len, write_len);
            let mut naive = NaiveList::default();
            for (kind, page) in ops {
                match kind {
                    0 => {
                        if naive.touch(page) {
                            q.touch(page).unwrap();
                        } else {
                            prop_assert!(q.touch(page).is_err());
                        }
                    }
                    1 => {
                        if naive.pages.contains(&page) {
                            prop_assert!(q.insert(page).is_err());
                        } else if naive.pages.len() < capacity {
                            naive.pages.insert(0, page);
                            q.insert(page).unwrap();
                        } else {
                            prop_assert!(q.insert(page).is_err());
                        }
                    }
                    2 => {
                        if let Some(last) = naive.pages.pop() {
                            prop_assert_eq!(q.evict().unwrap(), last);
                        } else {
                            prop_assert!(q.evict().is_err());
                        }
                    }
                    _ => {
                        if let Some(i) = naive.pages.iter().position(|&x| x == page) {
                            naive.pages.remove(i);
                            q.remove(page).unwrap();
                        } else {
                            prop_assert!(q.remove(page).is_err());
                        }
                    }
                }
                prop_assert_eq!(q.pages_mru_to_lru(), naive.pages.clone());
                q.check_invariants().map_err(TestCaseError::fail)?;
            }
        }
    }

    #[test]
    fn long_random_churn_stays_consistent() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(99);
        let mut q = LruQueue::with_regions(16, 3, 7);
        let mut naive = NaiveList::default();
        for step in 0..100_000u32 {
            let page = rng.random_range(0..40u64);
            match rng.random_range(0..10u32) {
                0..=5 => {
                    if naive.touch(page) {
                        q.touch(page).unwrap();
                    }
                }
                6..=8 => {
                    if !naive.pages.contains(&page) && naive.pages.len() < 16 {
                        naive.pages.insert(0, page);
                        q.insert(page).unwrap();
                    }
                }
                _ => {
                    if let Some(last) = naive.pages.pop() {
                        assert_eq!(q.evict().unwrap(), last, "step {step}");
                    }
                }
            }
            if step % 1024 == 0 {
                q.check_invariants().unwrap();
                assert_eq!(q.pages_mru_to_lru(), naive.pages);
            }
        }
        assert_eq!(q.pages_mru_to_lru(), naive.pages);
        q.check_invariants().unwrap();
    }
}
