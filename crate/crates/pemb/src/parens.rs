//! Balanced parentheses over a bitvector, with 0 encoding an opening and 1 a
//! closing parenthesis. The sequence may be a forest: prefix excess stays
//! non-negative and returns to zero at the end, but may touch zero in
//! between.
//!
//! Matching and parent queries run over a range min-max tree whose leaves
//! summarize 512-bit blocks; a query scans at most two blocks and walks
//! O(log t) tree nodes.

use crate::bits::BitVector;
use crate::error::{Error, Result};

const BLOCK_BITS: usize = 512;

#[derive(Clone, Debug)]
pub struct BalancedParens {
    bits: BitVector,
    /// Number of leaves rounded up to a power of two.
    leaf_base: usize,
    /// 1-based complete binary tree of minimum prefix excess per span.
    min_tree: Vec<i32>,
    /// Same layout, maximum prefix excess per span.
    max_tree: Vec<i32>,
}

impl BalancedParens {
    /// Validates balance and builds the excess tree.
    pub fn new(bits: BitVector) -> Result<BalancedParens> {
        Self::build(bits, false)
    }

    /// Parallel variant; identical result, leaf summaries computed with the
    /// current rayon pool.
    pub fn new_par(bits: BitVector) -> Result<BalancedParens> {
        Self::build(bits, true)
    }

    fn build(bits: BitVector, parallel: bool) -> Result<BalancedParens> {
        let len = bits.len();
        if len % 2 != 0 {
            return Err(Error::Validation("parenthesis sequence has odd length".into()));
        }
        if len > i32::MAX as usize / 2 {
            return Err(Error::Validation("parenthesis sequence too long".into()));
        }
        let nblocks = len.div_ceil(BLOCK_BITS);
        let leaf_base = nblocks.max(1).next_power_of_two();
        let mut min_tree = vec![i32::MAX; 2 * leaf_base];
        let mut max_tree = vec![i32::MIN; 2 * leaf_base];

        // Per-block relative (min, max, total) of the excess walk.
        let summarize = |b: usize| -> (i32, i32, i32) {
            let start = b * BLOCK_BITS;
            let end = (start + BLOCK_BITS).min(len);
            let mut e = 0i32;
            let mut lo = i32::MAX;
            let mut hi = i32::MIN;
            for p in start + 1..=end {
                e += if bits.get(p) { -1 } else { 1 };
                lo = lo.min(e);
                hi = hi.max(e);
            }
            (lo, hi, e)
        };
        let rel: Vec<(i32, i32, i32)> = if parallel && nblocks >= 64 {
            use rayon::prelude::*;
            (0..nblocks).into_par_iter().map(summarize).collect()
        } else {
            (0..nblocks).map(summarize).collect()
        };

        let mut base_excess = 0i64;
        for (b, &(lo, hi, total)) in rel.iter().enumerate() {
            min_tree[leaf_base + b] = (base_excess + lo as i64) as i32;
            max_tree[leaf_base + b] = (base_excess + hi as i64) as i32;
            base_excess += total as i64;
            if min_tree[leaf_base + b] < 0 {
                return Err(Error::Validation("parenthesis excess drops below zero".into()));
            }
        }
        if base_excess != 0 {
            return Err(Error::Validation("parenthesis sequence does not balance".into()));
        }
        for k in (1..leaf_base).rev() {
            min_tree[k] = min_tree[2 * k].min(min_tree[2 * k + 1]);
            max_tree[k] = max_tree[2 * k].max(max_tree[2 * k + 1]);
        }
        Ok(BalancedParens { bits, leaf_base, min_tree, max_tree })
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    /// Number of encoded nodes.
    pub fn node_count(&self) -> usize {
        self.bits.len() / 2
    }

    pub fn bits(&self) -> &BitVector {
        &self.bits
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        self.bits.get(i)
    }

    #[inline]
    pub fn is_open(&self, i: usize) -> bool {
        !self.bits.get(i)
    }

    #[inline]
    pub fn rank0(&self, i: usize) -> usize {
        self.bits.rank0(i)
    }

    #[inline]
    pub fn rank1(&self, i: usize) -> usize {
        self.bits.rank1(i)
    }

    #[inline]
    pub fn select0(&self, j: usize) -> usize {
        self.bits.select0(j)
    }

    #[inline]
    pub fn select1(&self, j: usize) -> usize {
        self.bits.select1(j)
    }

    /// Prefix excess: opens minus closes in positions `1..=i`.
    #[inline]
    pub fn excess(&self, i: usize) -> i64 {
        2 * self.bits.rank0(i) as i64 - i as i64
    }

    /// Position of the parenthesis matching the one at `i`.
    pub fn match_pos(&self, i: usize) -> usize {
        assert!(i >= 1 && i <= self.len(), "position {i} out of range 1..={}", self.len());
        if self.is_open(i) {
            self.fwd_search(i, self.excess(i) - 1)
                .expect("open parenthesis without a match in a balanced sequence")
        } else {
            let j = self
                .bwd_search(i, self.excess(i))
                .expect("close parenthesis without a match in a balanced sequence");
            j + 1
        }
    }

    /// Parent of node `v` in preorder numbering, 0 for forest roots.
    pub fn parent(&self, v: usize) -> usize {
        assert!(v >= 1 && v <= self.node_count(), "node {v} out of range 1..={}", self.node_count());
        let p = self.bits.select0(v);
        let e = self.excess(p);
        if e == 1 {
            return 0;
        }
        let j = self
            .bwd_search(p, e - 2)
            .expect("non-root node without an enclosing parenthesis");
        self.bits.rank0(j + 1)
    }

    #[inline]
    fn node_contains(&self, node: usize, target: i64) -> bool {
        self.min_tree[node] as i64 <= target && target <= self.max_tree[node] as i64
    }

    /// Smallest `j > i` with `excess(j) == target`.
    fn fwd_search(&self, i: usize, target: i64) -> Option<usize> {
        let len = self.len();
        if i >= len {
            return None;
        }
        let b = i / BLOCK_BITS;
        let end = ((b + 1) * BLOCK_BITS).min(len);
        let mut e = self.excess(i);
        for j in i + 1..=end {
            e += if self.bits.get(j) { -1 } else { 1 };
            if e == target {
                return Some(j);
            }
        }
        let mut node = self.leaf_base + b;
        while node > 1 {
            if node % 2 == 0 && self.node_contains(node + 1, target) {
                return Some(self.descend_leftmost(node + 1, target));
            }
            node /= 2;
        }
        None
    }

    fn descend_leftmost(&self, mut node: usize, target: i64) -> usize {
        while node < self.leaf_base {
            node *= 2;
            if !self.node_contains(node, target) {
                node += 1;
            }
        }
        let b = node - self.leaf_base;
        let start = b * BLOCK_BITS;
        let end = (start + BLOCK_BITS).min(self.len());
        let mut e = self.excess(start);
        for j in start + 1..=end {
            e += if self.bits.get(j) { -1 } else { 1 };
            if e == target {
                return j;
            }
        }
        unreachable!("excess tree reported a hit the block does not contain");
    }

    /// Largest `j < i` with `excess(j) == target`; position 0 counts with
    /// excess 0.
    fn bwd_search(&self, i: usize, target: i64) -> Option<usize> {
        if i >= 1 {
            if let Some(j) = self.bwd_block_scan(i - 1, target) {
                return Some(j);
            }
            if i > 1 {
                let mut node = self.leaf_base + (i - 2) / BLOCK_BITS;
                while node > 1 {
                    if node % 2 == 1 && self.node_contains(node - 1, target) {
                        return Some(self.descend_rightmost(node - 1, target));
                    }
                    node /= 2;
                }
            }
        }
        if target == 0 {
            return Some(0);
        }
        None
    }

    /// Scans positions `from` down to the start of `from`'s block.
    fn bwd_block_scan(&self, from: usize, target: i64) -> Option<usize> {
        if from == 0 {
            return None;
        }
        let b = (from - 1) / BLOCK_BITS;
        let floor = b * BLOCK_BITS + 1;
        let mut e = self.excess(from);
        let mut j = from;
        loop {
            if e == target {
                return Some(j);
            }
            if j == floor {
                return None;
            }
            e -= if self.bits.get(j) { -1 } else { 1 };
            j -= 1;
        }
    }

    fn descend_rightmost(&self, mut node: usize, target: i64) -> usize {
        while node < self.leaf_base {
            node = 2 * node + 1;
            if !self.node_contains(node, target) {
                node -= 1;
            }
        }
        let b = node - self.leaf_base;
        let end = ((b + 1) * BLOCK_BITS).min(self.len());
        self.bwd_block_scan(end, target)
            .expect("excess tree reported a hit the block does not contain")
    }

    /// In-memory footprint including the bitvector directory, in bits.
    pub fn size_bits(&self) -> usize {
        self.bits.size_bits() + (self.min_tree.len() + self.max_tree.len()) * 32
    }

    pub fn directory_bits(&self) -> usize {
        self.size_bits() - self.bits.words().len() * 64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::XorShift64;

    /// Stack-based reference for match and parent queries.
    struct NaiveParens {
        bits: Vec<bool>,
        match_of: Vec<usize>,
        parent_of_node: Vec<usize>,
    }

    impl NaiveParens {
        fn new(bits: Vec<bool>) -> NaiveParens {
            let n = bits.len();
            let mut match_of = vec![0usize; n + 1];
            let mut parent_of_node = Vec::new();
            let mut stack: Vec<(usize, usize)> = Vec::new();
            let mut node = 0usize;
            for (k, &close) in bits.iter().enumerate() {
                let pos = k + 1;
                if !close {
                    node += 1;
                    parent_of_node.push(stack.last().map_or(0, |&(_, v)| v));
                    stack.push((pos, node));
                } else {
                    let (open, _) = stack.pop().expect("unbalanced test input");
                    match_of[pos] = open;
                    match_of[open] = pos;
                }
            }
            assert!(stack.is_empty(), "unbalanced test input");
            NaiveParens { bits, match_of, parent_of_node }
        }
    }

    fn check(bits: Vec<bool>) {
        let naive = NaiveParens::new(bits.clone());
        let bp = BalancedParens::new(BitVector::from_bits(bits)).unwrap();
        for i in 1..=bp.len() {
            assert_eq!(bp.match_pos(i), naive.match_of[i], "match({i}) of {:?}", naive.bits);
        }
        for v in 1..=bp.node_count() {
            assert_eq!(bp.parent(v), naive.parent_of_node[v - 1], "parent({v}) of {:?}", naive.bits);
        }
    }

    /// All balanced sequences of `len` bits, as bit patterns (true = close).
    fn gen_balanced(len: usize) -> Vec<Vec<bool>> {
        let mut out = Vec::new();
        let mut cur = Vec::with_capacity(len);
        fn rec(cur: &mut Vec<bool>, excess: usize, len: usize, out: &mut Vec<Vec<bool>>) {
            if cur.len() == len {
                if excess == 0 {
                    out.push(cur.clone());
                }
                return;
            }
            let left = len - cur.len();
            if left > excess {
                cur.push(false);
                rec(cur, excess + 1, len, out);
                cur.pop();
            }
            if excess > 0 {
                cur.push(true);
                rec(cur, excess - 1, len, out);
                cur.pop();
            }
        }
        rec(&mut cur, 0, len, &mut out);
        out
    }

    fn random_balanced(rng: &mut XorShift64, pairs: usize) -> Vec<bool> {
        let mut bits = Vec::with_capacity(2 * pairs);
        let mut opens_left = pairs;
        let mut excess = 0usize;
        while bits.len() < 2 * pairs {
            let may_open = opens_left > 0;
            let may_close = excess > 0;
            let open = if may_open && may_close { rng.next() % 2 == 0 } else { may_open };
            if open {
                bits.push(false);
                opens_left -= 1;
                excess += 1;
            } else {
                bits.push(true);
                excess -= 1;
            }
        }
        bits
    }

    #[test]
    fn exhaustive_small() {
        for len in (2..=12).step_by(2) {
            for bits in gen_balanced(len) {
                check(bits);
            }
        }
    }

    #[test]
    fn single_pair() {
        let bp = BalancedParens::new(BitVector::from_bit_str("01")).unwrap();
        assert_eq!(bp.match_pos(1), 2);
        assert_eq!(bp.match_pos(2), 1);
        assert_eq!(bp.parent(1), 0);
    }

    #[test]
    fn empty_builds() {
        let bp = BalancedParens::new(BitVector::from_bits(std::iter::empty())).unwrap();
        assert_eq!(bp.len(), 0);
        assert_eq!(bp.node_count(), 0);
    }

    #[test]
    #[should_panic(expected = "out of range")]
    fn empty_query_errors() {
        let bp = BalancedParens::new(BitVector::from_bits(std::iter::empty())).unwrap();
        bp.match_pos(1);
    }

    #[test]
    fn unbalanced_rejected() {
        for s in ["0", "10", "0010", "0111", "00"] {
            assert!(
                BalancedParens::new(BitVector::from_bit_str(s)).is_err(),
                "{s} should be rejected"
            );
        }
    }

    #[test]
    fn forest_parents() {
        // Two trees: ( ( ) ( ) ) ( ( ) )
        let bp = BalancedParens::new(BitVector::from_bit_str("0010110011")).unwrap();
        assert_eq!(bp.parent(1), 0);
        assert_eq!(bp.parent(2), 1);
        assert_eq!(bp.parent(3), 1);
        assert_eq!(bp.parent(4), 0);
        assert_eq!(bp.parent(5), 4);
    }

    #[test]
    fn random_large_vs_naive() {
        let mut rng = XorShift64::new(0xABCD);
        for pairs in [1, 5, 40, 256, 300, 700, 1500] {
            let bits = random_balanced(&mut rng, pairs);
            check(bits);
        }
    }

    #[test]
    fn rank_boundary_regression() {
        // A sequence exactly one block long exercises excess(len) at the
        // block boundary.
        let mut rng = XorShift64::new(0xABCD);
        check(random_balanced(&mut rng, 256));
        check(random_balanced(&mut rng, 512));
    }

    #[test]
    fn deep_nesting_across_blocks() {
        // A single path of 2000 nodes spans several 512-bit blocks.
        let pairs = 2000;
        let mut bits = vec![false; pairs];
        bits.extend(vec![true; pairs]);
        let bp = BalancedParens::new(BitVector::from_bits(bits)).unwrap();
        assert_eq!(bp.match_pos(1), 2 * pairs);
        assert_eq!(bp.match_pos(pairs), pairs + 1);
        assert_eq!(bp.parent(1), 0);
        for v in 2..=pairs {
            assert_eq!(bp.parent(v), v - 1);
        }
    }

    #[test]
    fn parallel_build_identical() {
        let mut rng = XorShift64::new(77);
        let bits = random_balanced(&mut rng, 40_000);
        let seq = BalancedParens::new(BitVector::from_bits(bits.iter().copied())).unwrap();
        let par = BalancedParens::new_par(BitVector::from_bits(bits)).unwrap();
        assert_eq!(seq.min_tree, par.min_tree);
        assert_eq!(seq.max_tree, par.max_tree);
    }
}
