//! Online stable multiset sorting with a periodically rebuilt weighted tree.
//!
//! Distinct elements seen at the last rebuild sit in a search tree shaped
//! by their frequencies. Every empty child slot of that tree holds an AVL
//! tree that collects elements first seen since the rebuild. The tree is
//! rebuilt once the number of elements processed since the last rebuild
//! reaches the number of distinct elements known at that rebuild.
//!
//! Comparisons are ternary and counted once per node visited, so finding a
//! key at depth `d` costs `d + 1`.

use std::cmp::Ordering;

use crate::error::{Error, Result};

/// Shape of a weight-balanced search tree over keys `0..k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MehlhornTree {
    pub root: Option<usize>,
    pub left: Vec<Option<usize>>,
    pub right: Vec<Option<usize>>,
    pub depth: Vec<u32>,
}

impl MehlhornTree {
    pub fn height(&self) -> u32 {
        self.depth.iter().copied().max().unwrap_or(0)
    }
}

/// Builds the tree by repeatedly rooting each range at its weighted median.
///
/// The root of a range is the first key at which the prefix weight reaches
/// half of the range total, so both sides weigh at most half. A key of
/// weight `w` therefore ends up at depth at most `log2(W / w)`.
pub fn build_mehlhorn(probs: &[f64]) -> Result<MehlhornTree> {
    if probs.iter().any(|&p| !(p > 0.0)) {
        return Err(Error::ZeroProbability);
    }
    if !probs.is_empty() && (probs.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
        return Err(Error::NotNormalized);
    }
    Ok(mehlhorn_shape(probs))
}

/// Same construction for arbitrary positive weights.
pub fn mehlhorn_shape(weights: &[f64]) -> MehlhornTree {
    let k = weights.len();
    let mut prefix = Vec::with_capacity(k + 1);
    prefix.push(0.0);
    for &w in weights {
        prefix.push(prefix.last().unwrap() + w);
    }
    let mut tree = MehlhornTree {
        root: None,
        left: vec![None; k],
        right: vec![None; k],
        depth: vec![0; k],
    };
    tree.root = build_range(&prefix, 0, k, 0, &mut tree);
    tree
}

fn build_range(prefix: &[f64], lo: usize, hi: usize, depth: u32, t: &mut MehlhornTree) -> Option<usize> {
    if lo >= hi {
        return None;
    }
    let total = prefix[hi] - prefix[lo];
    // first r with weight(lo..=r) >= total / 2
    let r = lo + prefix[lo + 1..=hi].partition_point(|&p| 2.0 * (p - prefix[lo]) < total);
    let r = r.min(hi - 1);
    t.depth[r] = depth;
    t.left[r] = build_range(prefix, lo, r, depth + 1, t);
    t.right[r] = build_range(prefix, r + 1, hi, depth + 1, t);
    Some(r)
}

#[derive(Clone, Debug)]
struct Entry<K> {
    key: K,
    positions: Vec<u64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Link {
    Node(usize),
    Leaf(usize),
}

#[derive(Clone, Debug)]
struct Internal {
    entry: usize,
    left: Link,
    right: Link,
}

#[derive(Clone, Debug)]
struct AvlNode {
    entry: usize,
    height: i32,
    left: Option<Box<AvlNode>>,
    right: Option<Box<AvlNode>>,
}

fn height(n: &Option<Box<AvlNode>>) -> i32 {
    n.as_ref().map_or(0, |n| n.height)
}

fn fix_height(n: &mut AvlNode) {
    n.height = 1 + height(&n.left).max(height(&n.right));
}

fn rotate_right(mut n: Box<AvlNode>) -> Box<AvlNode> {
    let mut l = n.left.take().expect("left child");
    n.left = l.right.take();
    fix_height(&mut n);
    l.right = Some(n);
    fix_height(&mut l);
    l
}

fn rotate_left(mut n: Box<AvlNode>) -> Box<AvlNode> {
    let mut r = n.right.take().expect("right child");
    n.right = r.left.take();
    fix_height(&mut n);
    r.left = Some(n);
    fix_height(&mut r);
    r
}

fn rebalance(mut n: Box<AvlNode>) -> Box<AvlNode> {
    fix_height(&mut n);
    let balance = height(&n.left) - height(&n.right);
    if balance > 1 {
        let l = n.left.as_ref().unwrap();
        if height(&l.left) < height(&l.right) {
            n.left = Some(rotate_left(n.left.take().unwrap()));
        }
        rotate_right(n)
    } else if balance < -1 {
        let r = n.right.as_ref().unwrap();
        if height(&r.right) < height(&r.left) {
            n.right = Some(rotate_right(n.right.take().unwrap()));
        }
        rotate_left(n)
    } else {
        n
    }
}

/// Inserts into an AVL tree; `cmp(entry)` compares the new key against an entry.
/// Returns the new subtree and the entry that matched, if any.
fn avl_insert(
    node: Option<Box<AvlNode>>,
    cmp: &mut dyn FnMut(usize) -> Ordering,
    fresh: usize,
) -> (Box<AvlNode>, Option<usize>) {
    let Some(mut n) = node else {
        let leaf = AvlNode {
            entry: fresh,
            height: 1,
            left: None,
            right: None,
        };
        return (Box::new(leaf), None);
    };
    match cmp(n.entry) {
        Ordering::Equal => {
            let e = n.entry;
            (n, Some(e))
        }
        Ordering::Less => {
            let (child, hit) = avl_insert(n.left.take(), cmp, fresh);
            n.left = Some(child);
            (if hit.is_some() { n } else { rebalance(n) }, hit)
        }
        Ordering::Greater => {
            let (child, hit) = avl_insert(n.right.take(), cmp, fresh);
            n.right = Some(child);
            (if hit.is_some() { n } else { rebalance(n) }, hit)
        }
    }
}

fn avl_in_order(node: &Option<Box<AvlNode>>, out: &mut Vec<usize>) {
    if let Some(n) = node {
        avl_in_order(&n.left, out);
        out.push(n.entry);
        avl_in_order(&n.right, out);
    }
}

fn avl_size(node: &Option<Box<AvlNode>>) -> usize {
    node.as_ref()
        .map_or(0, |n| 1 + avl_size(&n.left) + avl_size(&n.right))
}

/// Search tree over distinct elements with occurrence lists and a comparison counter.
#[derive(Clone, Debug)]
pub struct WeightedTree<K> {
    entries: Vec<Entry<K>>,
    internal: Vec<Internal>,
    leaves: Vec<Option<Box<AvlNode>>>,
    root: Link,
    comparisons: u64,
    processed: u64,
    since_rebuild: u64,
    distinct_at_rebuild: usize,
    rebuilds: u64,
}

impl<K: Ord> Default for WeightedTree<K> {
    fn default() -> Self {
        Self::new()
    }
}

impl<K: Ord> WeightedTree<K> {
    pub fn new() -> Self {
        Self {
            entries: Vec::new(),
            internal: Vec::new(),
            leaves: vec![None],
            root: Link::Leaf(0),
            comparisons: 0,
            processed: 0,
            since_rebuild: 0,
            distinct_at_rebuild: 0,
            rebuilds: 0,
        }
    }

    pub fn comparisons(&self) -> u64 {
        self.comparisons
    }

    pub fn processed(&self) -> u64 {
        self.processed
    }

    pub fn distinct(&self) -> usize {
        self.entries.len()
    }

    pub fn rebuilds(&self) -> u64 {
        self.rebuilds
    }

    /// Distinct elements held in the weighted part of the tree.
    pub fn distinct_at_last_rebuild(&self) -> usize {
        self.distinct_at_rebuild
    }

    /// Inserts the next element and returns the comparisons it took.
    pub fn push(&mut self, key: K) -> u64 {
        let before = self.comparisons;
        let pos = self.processed + 1;
        let mut link = self.root;
        loop {
            match link {
                Link::Node(id) => {
                    let node = &self.internal[id];
                    self.comparisons += 1;
                    match key.cmp(&self.entries[node.entry].key) {
                        Ordering::Equal => {
                            self.entries[node.entry].positions.push(pos);
                            break;
                        }
                        Ordering::Less => link = node.left,
                        Ordering::Greater => link = node.right,
                    }
                }
                Link::Leaf(id) => {
                    let fresh = self.entries.len();
                    let entries = &self.entries;
                    let counter = &mut self.comparisons;
                    let mut cmp = |e: usize| {
                        *counter += 1;
                        key.cmp(&entries[e].key)
                    };
                    let (subtree, hit) = avl_insert(self.leaves[id].take(), &mut cmp, fresh);
                    self.leaves[id] = Some(subtree);
                    match hit {
                        Some(e) => self.entries[e].positions.push(pos),
                        None => self.entries.push(Entry {
                            key,
                            positions: vec![pos],
                        }),
                    }
                    break;
                }
            }
        }
        self.processed = pos;
        self.since_rebuild += 1;
        if self.since_rebuild >= self.distinct_at_rebuild.max(1) as u64 {
            self.rebuild();
        }
        self.comparisons - before
    }

    fn in_order_entries(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.entries.len());
        let mut stack = Vec::new();
        let mut link = Some(self.root);
        loop {
            while let Some(Link::Node(id)) = link {
                stack.push(id);
                link = Some(self.internal[id].left);
            }
            if let Some(Link::Leaf(id)) = link {
                avl_in_order(&self.leaves[id], &mut out);
            }
            match stack.pop() {
                Some(id) => {
                    out.push(self.internal[id].entry);
                    link = Some(self.internal[id].right);
                }
                None => break,
            }
        }
        out
    }

    /// Rebuilds with weights equal to occurrence counts so far.
    pub fn rebuild(&mut self) {
        let order = self.in_order_entries();
        let weights: Vec<f64> = order
            .iter()
            .map(|&e| self.entries[e].positions.len() as f64)
            .collect();
        let shape = mehlhorn_shape(&weights);
        self.internal = order
            .iter()
            .map(|&entry| Internal {
                entry,
                left: Link::Leaf(0),
                right: Link::Leaf(0),
            })
            .collect();
        self.leaves.clear();
        let link_for = |child: Option<usize>, leaves: &mut Vec<Option<Box<AvlNode>>>| match child {
            Some(c) => Link::Node(c),
            None => {
                leaves.push(None);
                Link::Leaf(leaves.len() - 1)
            }
        };
        for i in 0..order.len() {
            self.internal[i].left = link_for(shape.left[i], &mut self.leaves);
            self.internal[i].right = link_for(shape.right[i], &mut self.leaves);
        }
        self.root = link_for(shape.root, &mut self.leaves);
        self.since_rebuild = 0;
        self.distinct_at_rebuild = order.len();
        self.rebuilds += 1;
    }

    /// Depth of the deepest internal node, counting the root as depth 0.
    pub fn internal_height(&self) -> u32 {
        let mut best = 0;
        let mut stack = vec![(self.root, 0u32)];
        while let Some((link, d)) = stack.pop() {
            if let Link::Node(id) = link {
                best = best.max(d);
                stack.push((self.internal[id].left, d + 1));
                stack.push((self.internal[id].right, d + 1));
            }
        }
        best
    }

    pub fn max_leaf_size(&self) -> usize {
        self.leaves.iter().map(avl_size).max().unwrap_or(0)
    }

    /// Distinct keys in increasing order.
    pub fn sorted_keys(&self) -> Vec<&K> {
        self.in_order_entries()
            .into_iter()
            .map(|e| &self.entries[e].key)
            .collect()
    }

    /// Positions (1-based) in stable sorted order.
    pub fn sorted_output(&self) -> Vec<u64> {
        self.in_order_entries()
            .into_iter()
            .flat_map(|e| self.entries[e].positions.iter().copied())
            .collect()
    }

    /// Machine words held by the tree, entries and leaves, in bits.
    pub fn state_size_bits(&self) -> u64 {
        let word = 64u64;
        let positions: u64 = self.entries.iter().map(|e| e.positions.len() as u64).sum();
        (self.entries.len() as u64 * 2 + self.internal.len() as u64 * 3 + self.leaves.len() as u64) * word
            + positions * word
    }
}

/// Sorts `items` and returns the permutation with the total comparison count.
pub fn sort_counting<K: Ord>(items: impl IntoIterator<Item = K>) -> (Vec<u64>, u64) {
    let mut tree = WeightedTree::new();
    for item in items {
        tree.push(item);
    }
    (tree.sorted_output(), tree.comparisons())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::cell::Cell;

    fn random_probs(rng: &mut ChaCha8Rng, k: usize) -> Vec<f64> {
        let mut p: Vec<f64> = (0..k).map(|_| -rng.gen::<f64>().max(1e-12).ln()).collect();
        if rng.gen_bool(0.3) {
            for x in p.iter_mut() {
                *x = x.powi(6);
            }
        }
        let s: f64 = p.iter().sum();
        p.iter_mut().for_each(|x| *x /= s);
        p
    }

    fn check_bst(t: &MehlhornTree) {
        fn walk(t: &MehlhornTree, at: Option<usize>, lo: usize, hi: usize, d: u32, seen: &mut usize) {
            if let Some(r) = at {
                assert!(lo <= r && r < hi);
                assert_eq!(t.depth[r], d);
                *seen += 1;
                walk(t, t.left[r], lo, r, d + 1, seen);
                walk(t, t.right[r], r + 1, hi, d + 1, seen);
            }
        }
        let mut seen = 0;
        walk(t, t.root, 0, t.depth.len(), 0, &mut seen);
        assert_eq!(seen, t.depth.len());
    }

    #[test]
    fn single_key() {
        let t = build_mehlhorn(&[1.0]).unwrap();
        assert_eq!(t.root, Some(0));
        assert_eq!(t.depth, [0]);
    }

    #[test]
    fn uniform_weights_balance() {
        for m in 1..8u32 {
            let k = (1usize << m) - 1;
            let t = build_mehlhorn(&vec![1.0 / k as f64; k]).unwrap();
            check_bst(&t);
            // a complete tree: 2^d keys at each depth d < m
            for d in 0..m {
                assert_eq!(t.depth.iter().filter(|&&x| x == d).count(), 1 << d);
            }
            let k = 1usize << m;
            let t = build_mehlhorn(&vec![1.0 / k as f64; k]).unwrap();
            assert_eq!(t.height(), m);
            assert!(t.depth.iter().all(|&d| d <= m));
        }
    }

    #[test]
    fn depths_within_log_inverse_probability() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..2000 {
            let k = rng.gen_range(1..=64);
            let p = random_probs(&mut rng, k);
            let t = build_mehlhorn(&p).unwrap();
            check_bst(&t);
            for (i, &d) in t.depth.iter().enumerate() {
                let limit = (1.0 / p[i]).log2();
                assert!(d as f64 <= limit + 2.0);
                assert!(d as f64 <= limit + 1e-9, "depth {d} exceeds log(1/p) = {limit}");
            }
        }
    }

    #[test]
    fn rejects_bad_probabilities() {
        assert_eq!(build_mehlhorn(&[0.5, 0.0, 0.5]), Err(Error::ZeroProbability));
        assert_eq!(build_mehlhorn(&[0.5, 0.2]), Err(Error::NotNormalized));
    }

    #[test]
    fn root_hit_costs_one_comparison() {
        let mut t = WeightedTree::new();
        assert_eq!(t.push(5), 0);
        assert_eq!(t.rebuilds(), 1);
        assert_eq!(t.push(5), 1);
    }

    #[test]
    fn new_key_in_empty_leaf_costs_leaf_depth() {
        let mut t = WeightedTree::new();
        t.push(10);
        // tree is just the root; 20 goes to its empty right leaf
        assert_eq!(t.push(20), 1);
    }

    #[test]
    fn rebuild_schedule() {
        let mut t = WeightedTree::new();
        let mut rebuild_points = vec![];
        for (i, k) in [1, 2, 3, 1, 2, 3, 4, 4, 4, 4, 4].into_iter().enumerate() {
            let before = t.rebuilds();
            t.push(k);
            if t.rebuilds() > before {
                rebuild_points.push((i + 1, t.distinct_at_last_rebuild()));
            }
        }
        // after a rebuild with d distinct keys, the next comes d elements later
        assert_eq!(rebuild_points, [(1, 1), (2, 2), (4, 3), (7, 4), (11, 4)]);
    }

    #[test]
    fn rebuild_preserves_content() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut t = WeightedTree::new();
        for _ in 0..500 {
            t.push(rng.gen_range(0..60u32));
        }
        let keys: Vec<u32> = t.sorted_keys().into_iter().copied().collect();
        let out = t.sorted_output();
        t.rebuild();
        assert_eq!(t.sorted_keys().into_iter().copied().collect::<Vec<_>>(), keys);
        assert_eq!(t.sorted_output(), out);
    }

    #[test]
    fn height_and_leaf_sizes_bounded() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let sigma = 40u32;
        let mut t = WeightedTree::new();
        for i in 1..=20_000u64 {
            let k = if rng.gen_bool(0.8) { rng.gen_range(0..3) } else { rng.gen_range(0..sigma) };
            t.push(k);
            if t.since_rebuild == 0 {
                assert!(t.internal_height() as f64 <= (i as f64).log2() + 2.0);
            }
            assert!(t.max_leaf_size() <= sigma as usize);
        }
    }

    #[test]
    fn matches_stable_sort_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        for _ in 0..300 {
            let sigma = rng.gen_range(1..30);
            let n = rng.gen_range(0..1500);
            let s: Vec<u32> = (0..n).map(|_| rng.gen_range(0..sigma)).collect();
            let (perm, _) = sort_counting(s.iter().copied());
            let mut oracle: Vec<u64> = (1..=n as u64).collect();
            oracle.sort_by_key(|&i| (s[i as usize - 1], i));
            assert_eq!(perm, oracle);
        }
        let sorted: Vec<u32> = (0..100).collect();
        assert_eq!(sort_counting(sorted).0, (1..=100).collect::<Vec<u64>>());
    }

    thread_local! {
        static CALLS: Cell<u64> = const { Cell::new(0) };
    }

    #[derive(PartialEq, Eq)]
    struct Counted(u32);

    impl PartialOrd for Counted {
        fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
            Some(self.cmp(other))
        }
    }

    impl Ord for Counted {
        fn cmp(&self, other: &Self) -> Ordering {
            CALLS.with(|c| c.set(c.get() + 1));
            self.0.cmp(&other.0)
        }
    }

    #[test]
    fn counter_matches_instrumented_keys() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..50 {
            CALLS.with(|c| c.set(0));
            let sigma = rng.gen_range(1..50);
            let mut t = WeightedTree::new();
            let mut per_push = 0u64;
            for _ in 0..rng.gen_range(1..3000) {
                let before = CALLS.with(|c| c.get());
                let used = t.push(Counted(rng.gen_range(0..sigma)));
                assert_eq!(used, CALLS.with(|c| c.get()) - before);
                per_push += used;
            }
            assert_eq!(t.comparisons(), per_push);
            assert_eq!(t.comparisons(), CALLS.with(|c| c.get()));
        }
    }
}
