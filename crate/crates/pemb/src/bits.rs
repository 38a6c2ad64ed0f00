//! Plain bitvector with constant-time rank and near-constant-time select.
//!
//! Positions are 1-based throughout and `select_b(0) = 0`, so that prefix
//! formulas compose without special cases. The rank directory is two-level:
//! absolute 64-bit counts at 65536-bit superblock boundaries and 16-bit
//! counts relative to the superblock at 512-bit block boundaries. Select
//! keeps sampled positions of every 4096th set (and unset) bit and finishes
//! with a bounded binary search plus a word scan. Directory overhead stays
//! under 7% of the payload, well inside the 25% budget.

use crate::error::{Error, Result};

const SUPER_BITS: usize = 1 << 16;
const BLOCK_BITS: usize = 512;
const WORDS_PER_BLOCK: usize = BLOCK_BITS / 64;
const HINT_EVERY: usize = 4096;

/// Immutable bitvector over 64-bit words, LSB-first inside each word.
#[derive(Clone, Debug)]
pub struct BitVector {
    len: usize,
    words: Vec<u64>,
    ones: usize,
    /// Cumulative ones at each superblock boundary, `nsb + 1` entries.
    rank_super: Vec<u64>,
    /// Ones from the enclosing superblock start to each block boundary.
    rank_block: Vec<u16>,
    /// Position of the `(i * 4096 + 1)`-th one.
    hints_one: Vec<u64>,
    /// Position of the `(i * 4096 + 1)`-th zero.
    hints_zero: Vec<u64>,
}

fn words_for(len: usize) -> usize {
    len.div_ceil(64)
}

/// Zero-filled word buffer sized for `len` bits, for scatter-style builders.
pub fn zeroed_words(len: usize) -> Vec<u64> {
    vec![0u64; words_for(len)]
}

impl BitVector {
    /// Builds from raw words. Bits beyond `len` are masked off.
    pub fn from_words(mut words: Vec<u64>, len: usize) -> BitVector {
        Self::build(&mut words, len, false)
    }

    /// Same as [`from_words`](Self::from_words) but fills the directory with
    /// the current rayon pool. The result is identical bit for bit.
    pub fn from_words_par(mut words: Vec<u64>, len: usize) -> BitVector {
        Self::build(&mut words, len, true)
    }

    pub fn from_bits<I: IntoIterator<Item = bool>>(bits: I) -> BitVector {
        let mut words = Vec::new();
        let mut len = 0usize;
        for b in bits {
            if len % 64 == 0 {
                words.push(0);
            }
            if b {
                *words.last_mut().unwrap() |= 1u64 << (len % 64);
            }
            len += 1;
        }
        Self::from_words(words, len)
    }

    /// Parses a string of `0`/`1` characters, ignoring whitespace.
    pub fn from_bit_str(s: &str) -> BitVector {
        Self::from_bits(s.chars().filter(|c| !c.is_whitespace()).map(|c| c == '1'))
    }

    fn build(words: &mut Vec<u64>, len: usize, parallel: bool) -> BitVector {
        let nwords = words_for(len);
        assert!(words.len() >= nwords, "word buffer shorter than len");
        words.truncate(nwords);
        if len % 64 != 0 {
            let mask = (1u64 << (len % 64)) - 1;
            if let Some(w) = words.last_mut() {
                *w &= mask;
            }
        }
        let nblocks = len.div_ceil(BLOCK_BITS);
        let nsuper = len.div_ceil(SUPER_BITS);

        let mut rank_block = vec![0u16; nblocks + 1];
        let mut rank_super = vec![0u64; nsuper + 1];

        let block_ones = |words: &[u64], b: usize| -> u32 {
            let start = b * WORDS_PER_BLOCK;
            let end = (start + WORDS_PER_BLOCK).min(words.len());
            words[start..end].iter().map(|w| w.count_ones()).sum()
        };

        let use_par = parallel && len >= 1 << 20;
        let super_totals: Vec<u64> = if use_par {
            use rayon::prelude::*;
            let counts: Vec<(usize, Vec<u16>, u64)> = (0..nsuper)
                .into_par_iter()
                .map(|s| {
                    let b0 = s * (SUPER_BITS / BLOCK_BITS);
                    let b1 = (b0 + SUPER_BITS / BLOCK_BITS).min(nblocks);
                    let mut local = Vec::with_capacity(b1 - b0);
                    let mut acc = 0u64;
                    for b in b0..b1 {
                        local.push(acc as u16);
                        acc += block_ones(words, b) as u64;
                    }
                    (s, local, acc)
                })
                .collect();
            let mut totals = vec![0u64; nsuper];
            for (s, local, total) in counts {
                let b0 = s * (SUPER_BITS / BLOCK_BITS);
                rank_block[b0..b0 + local.len()].copy_from_slice(&local);
                totals[s] = total;
            }
            totals
        } else {
            let mut totals = vec![0u64; nsuper];
            for s in 0..nsuper {
                let b0 = s * (SUPER_BITS / BLOCK_BITS);
                let b1 = (b0 + SUPER_BITS / BLOCK_BITS).min(nblocks);
                let mut acc = 0u64;
                for b in b0..b1 {
                    rank_block[b] = acc as u16;
                    acc += block_ones(words, b) as u64;
                }
                totals[s] = acc;
            }
            totals
        };
        let mut acc = 0u64;
        for s in 0..nsuper {
            rank_super[s] = acc;
            acc += super_totals[s];
        }
        rank_super[nsuper] = acc;
        let ones = acc as usize;
        // The trailing boundary entry is only consulted when len is a block
        // multiple; it is relative to the superblock containing position len.
        if len % SUPER_BITS != 0 {
            rank_block[nblocks] = (acc - rank_super[len / SUPER_BITS]) as u16;
        }

        let mut bv = BitVector {
            len,
            words: std::mem::take(words),
            ones,
            rank_super,
            rank_block,
            hints_one: Vec::new(),
            hints_zero: Vec::new(),
        };
        bv.hints_one = bv.build_hints(true, use_par);
        bv.hints_zero = bv.build_hints(false, use_par);
        bv
    }

    fn build_hints(&self, bit: bool, parallel: bool) -> Vec<u64> {
        let count = if bit { self.ones } else { self.len - self.ones };
        let n = count.div_ceil(HINT_EVERY);
        let gen = |i: usize| self.select_search(bit, i * HINT_EVERY + 1, 0, self.super_count()) as u64;
        if parallel {
            use rayon::prelude::*;
            (0..n).into_par_iter().map(gen).collect()
        } else {
            (0..n).map(gen).collect()
        }
    }

    fn super_count(&self) -> usize {
        self.rank_super.len() - 1
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn count_ones(&self) -> usize {
        self.ones
    }

    pub fn count_zeros(&self) -> usize {
        self.len - self.ones
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    /// Reads position `i`, 1-based.
    #[inline]
    pub fn get(&self, i: usize) -> bool {
        assert!(i >= 1 && i <= self.len, "position {i} out of range 1..={}", self.len);
        let k = i - 1;
        self.words[k / 64] >> (k % 64) & 1 == 1
    }

    /// Number of ones in positions `1..=i`. `rank1(0) = 0`.
    #[inline]
    pub fn rank1(&self, i: usize) -> usize {
        assert!(i <= self.len, "rank position {i} out of range 0..={}", self.len);
        let mut r = self.rank_super[i / SUPER_BITS] as usize + self.rank_block[i / BLOCK_BITS] as usize;
        let block_word = (i / BLOCK_BITS) * WORDS_PER_BLOCK;
        for w in block_word..i / 64 {
            r += self.words[w].count_ones() as usize;
        }
        if i % 64 != 0 {
            let mask = (1u64 << (i % 64)) - 1;
            r += (self.words[i / 64] & mask).count_ones() as usize;
        }
        r
    }

    #[inline]
    pub fn rank0(&self, i: usize) -> usize {
        i - self.rank1(i)
    }

    pub fn rank(&self, bit: bool, i: usize) -> usize {
        if bit {
            self.rank1(i)
        } else {
            self.rank0(i)
        }
    }

    /// Position of the `j`-th one; `select1(0) = 0`.
    pub fn select1(&self, j: usize) -> usize {
        self.try_select1(j)
            .unwrap_or_else(|| panic!("select1({j}) out of range, only {} ones", self.ones))
    }

    /// Position of the `j`-th zero; `select0(0) = 0`.
    pub fn select0(&self, j: usize) -> usize {
        self.try_select0(j)
            .unwrap_or_else(|| panic!("select0({j}) out of range, only {} zeros", self.len - self.ones))
    }

    pub fn try_select1(&self, j: usize) -> Option<usize> {
        if j == 0 {
            return Some(0);
        }
        if j > self.ones {
            return None;
        }
        let (lo, hi) = self.hint_range(&self.hints_one, j);
        Some(self.select_search(true, j, lo, hi))
    }

    pub fn try_select0(&self, j: usize) -> Option<usize> {
        if j == 0 {
            return Some(0);
        }
        if j > self.len - self.ones {
            return None;
        }
        let (lo, hi) = self.hint_range(&self.hints_zero, j);
        Some(self.select_search(false, j, lo, hi))
    }

    /// Superblock range bracketing the `j`-th occurrence, from the hints.
    fn hint_range(&self, hints: &[u64], j: usize) -> (usize, usize) {
        let idx = (j - 1) / HINT_EVERY;
        let lo = (hints[idx] as usize - 1) / SUPER_BITS;
        let hi = match hints.get(idx + 1) {
            Some(&p) => (p as usize - 1) / SUPER_BITS + 1,
            None => self.super_count(),
        };
        (lo, hi.max(lo + 1))
    }

    /// Binary search for the `j`-th occurrence of `bit` over superblocks
    /// `lo..hi`, then blocks, then a word scan. `j >= 1` must exist.
    fn select_search(&self, bit: bool, j: usize, mut lo: usize, mut hi: usize) -> usize {
        let sup_count = |s: usize| -> usize {
            let ones = self.rank_super[s] as usize;
            if bit {
                ones
            } else {
                s * SUPER_BITS - ones
            }
        };
        // Last superblock whose starting cumulative count is < j.
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if sup_count(mid) < j {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let s = lo;
        let mut rem = j - sup_count(s);

        let nblocks = self.len.div_ceil(BLOCK_BITS);
        let b0 = s * (SUPER_BITS / BLOCK_BITS);
        let b1 = (b0 + SUPER_BITS / BLOCK_BITS).min(nblocks);
        let blk_count = |b: usize| -> usize {
            let ones = self.rank_block[b] as usize;
            if bit {
                ones
            } else {
                (b - b0) * BLOCK_BITS - ones
            }
        };
        let (mut blo, mut bhi) = (b0, b1);
        while bhi - blo > 1 {
            let mid = (blo + bhi) / 2;
            if blk_count(mid) < rem {
                blo = mid;
            } else {
                bhi = mid;
            }
        }
        let b = blo;
        rem -= blk_count(b);

        let w0 = b * WORDS_PER_BLOCK;
        for w in w0..self.words.len() {
            let word = if bit { self.words[w] } else { !self.words[w] };
            let c = word.count_ones() as usize;
            if rem <= c {
                return w * 64 + select_in_word(word, rem);
            }
            rem -= c;
        }
        unreachable!("select target not found; directory corrupt");
    }

    /// Serialized layout: `[u64 len][ceil(len/64) words]`, little-endian.
    pub fn write_into(&self, out: &mut Vec<u8>) {
        out.extend_from_slice(&(self.len as u64).to_le_bytes());
        for w in &self.words {
            out.extend_from_slice(&w.to_le_bytes());
        }
    }

    /// Reads the layout produced by [`write_into`](Self::write_into),
    /// advancing `pos`. The directory is rebuilt, never deserialized.
    pub fn read_from(buf: &[u8], pos: &mut usize) -> Result<BitVector> {
        fn take<'a>(buf: &'a [u8], pos: &mut usize, n: usize) -> Result<&'a [u8]> {
            if *pos + n > buf.len() {
                return Err(Error::Format("unexpected end of bit array".into()));
            }
            let s = &buf[*pos..*pos + n];
            *pos += n;
            Ok(s)
        }
        let len_bytes = take(buf, pos, 8)?;
        let len = u64::from_le_bytes(len_bytes.try_into().unwrap()) as usize;
        let nwords = words_for(len);
        let mut words = Vec::with_capacity(nwords);
        let raw = take(buf, pos, nwords * 8)?;
        for c in raw.chunks_exact(8) {
            words.push(u64::from_le_bytes(c.try_into().unwrap()));
        }
        Ok(Self::from_words(words, len))
    }

    pub fn serialized_bits(&self) -> usize {
        64 + self.words.len() * 64
    }

    /// In-memory footprint including the directory, in bits.
    pub fn size_bits(&self) -> usize {
        self.words.len() * 64
            + self.rank_super.len() * 64
            + self.rank_block.len() * 16
            + (self.hints_one.len() + self.hints_zero.len()) * 64
    }

    pub fn directory_bits(&self) -> usize {
        self.size_bits() - self.words.len() * 64
    }
}

/// 1-based position of the `r`-th set bit of `w`; `r <= popcount(w)`.
#[inline]
fn select_in_word(w: u64, mut r: usize) -> usize {
    debug_assert!(r >= 1 && r <= w.count_ones() as usize);
    let mut base = 0usize;
    let mut cur = w;
    loop {
        let c = (cur & 0xFF).count_ones() as usize;
        if r <= c {
            break;
        }
        r -= c;
        base += 8;
        cur >>= 8;
    }
    let mut byte = cur & 0xFF;
    loop {
        let tz = byte.trailing_zeros() as usize;
        if r == 1 {
            return base + tz + 1;
        }
        r -= 1;
        byte &= byte - 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::XorShift64;

    struct NaiveBits {
        bits: Vec<bool>,
        prefix: Vec<usize>,
        ones: Vec<usize>,
        zeros: Vec<usize>,
    }

    impl NaiveBits {
        fn new(bits: Vec<bool>) -> NaiveBits {
            let mut prefix = vec![0];
            let mut ones = Vec::new();
            let mut zeros = Vec::new();
            for (k, &b) in bits.iter().enumerate() {
                prefix.push(prefix[k] + b as usize);
                if b {
                    ones.push(k + 1);
                } else {
                    zeros.push(k + 1);
                }
            }
            NaiveBits { bits, prefix, ones, zeros }
        }
        fn rank(&self, bit: bool, i: usize) -> usize {
            if bit {
                self.prefix[i]
            } else {
                i - self.prefix[i]
            }
        }
        fn select(&self, bit: bool, j: usize) -> Option<usize> {
            if j == 0 {
                return Some(0);
            }
            let list = if bit { &self.ones } else { &self.zeros };
            list.get(j - 1).copied()
        }
    }

    fn check_against_naive(bits: Vec<bool>) {
        let naive = NaiveBits::new(bits.clone());
        let bv = BitVector::from_bits(bits.iter().copied());
        assert_eq!(bv.len(), naive.bits.len());
        assert_eq!(bv.count_ones(), naive.rank(true, naive.bits.len()));
        for i in 0..=bv.len() {
            assert_eq!(bv.rank1(i), naive.rank(true, i), "rank1({i})");
            assert_eq!(bv.rank0(i), naive.rank(false, i), "rank0({i})");
        }
        for j in 0..=bv.count_ones() + 1 {
            assert_eq!(bv.try_select1(j), naive.select(true, j), "select1({j})");
        }
        for j in 0..=bv.count_zeros() + 1 {
            assert_eq!(bv.try_select0(j), naive.select(false, j), "select0({j})");
        }
        for i in 1..=bv.len() {
            assert_eq!(bv.get(i), naive.bits[i - 1], "get({i})");
        }
    }

    #[test]
    fn empty() {
        let bv = BitVector::from_bits(std::iter::empty());
        assert_eq!(bv.len(), 0);
        assert_eq!(bv.rank1(0), 0);
        assert_eq!(bv.select1(0), 0);
        assert_eq!(bv.try_select1(1), None);
    }

    #[test]
    fn small_patterns() {
        check_against_naive(vec![]);
        check_against_naive(vec![true]);
        check_against_naive(vec![false]);
        check_against_naive(vec![true; 200]);
        check_against_naive(vec![false; 200]);
        check_against_naive((0..300).map(|i| i % 2 == 0).collect());
        check_against_naive((0..300).map(|i| i % 3 == 0).collect());
    }

    #[test]
    fn block_boundaries() {
        for len in [511, 512, 513, 1023, 1024, 1025, 64, 65, 127, 128] {
            check_against_naive((0..len).map(|i| i % 5 == 0).collect());
            check_against_naive((0..len).map(|i| i % 7 != 0).collect());
        }
    }

    #[test]
    fn superblock_boundary() {
        let mut rng = XorShift64::new(7);
        for len in [SUPER_BITS - 1, SUPER_BITS, SUPER_BITS + 1, SUPER_BITS + 777] {
            let bits: Vec<bool> = (0..len).map(|_| rng.next() % 4 == 0).collect();
            check_against_naive(bits);
        }
    }

    #[test]
    fn random_vs_naive() {
        let mut rng = XorShift64::new(0xDEC0DE);
        for round in 0..30 {
            let len = (rng.next() % 3000) as usize + 1;
            let density = 1 + round % 7;
            let bits: Vec<bool> = (0..len).map(|_| rng.next() % 8 < density as u64).collect();
            check_against_naive(bits);
        }
    }

    #[test]
    fn sparse_hints_cross_superblocks() {
        // Few ones spread over many superblocks forces select to search far
        // from the hint superblock.
        let len = 5 * SUPER_BITS + 123;
        let mut words = zeroed_words(len);
        let positions = [1usize, SUPER_BITS + 5, 3 * SUPER_BITS + 70, len - 1];
        for &p in &positions {
            words[(p - 1) / 64] |= 1 << ((p - 1) % 64);
        }
        let bv = BitVector::from_words(words, len);
        for (j, &p) in positions.iter().enumerate() {
            assert_eq!(bv.select1(j + 1), p);
        }
        assert_eq!(bv.rank1(len), positions.len());
    }

    #[test]
    fn rank_select_roundtrip() {
        let mut rng = XorShift64::new(99);
        let bits: Vec<bool> = (0..10_000).map(|_| rng.next() % 2 == 0).collect();
        let bv = BitVector::from_bits(bits);
        for j in 1..=bv.count_ones() {
            let p = bv.select1(j);
            assert_eq!(bv.rank1(p), j);
            assert!(bv.get(p));
        }
        for j in 1..=bv.count_zeros() {
            let p = bv.select0(j);
            assert_eq!(bv.rank0(p), j);
            assert!(!bv.get(p));
        }
    }

    #[test]
    fn serialization_roundtrip() {
        let mut rng = XorShift64::new(5);
        let bits: Vec<bool> = (0..777).map(|_| rng.next() % 3 == 0).collect();
        let bv = BitVector::from_bits(bits.iter().copied());
        let mut buf = Vec::new();
        bv.write_into(&mut buf);
        let mut pos = 0;
        let back = BitVector::read_from(&buf, &mut pos).unwrap();
        assert_eq!(pos, buf.len());
        assert_eq!(back.len(), bv.len());
        assert_eq!(back.words(), bv.words());
    }

    #[test]
    fn truncated_serialization_rejected() {
        let bv = BitVector::from_bits((0..100).map(|i| i % 2 == 0));
        let mut buf = Vec::new();
        bv.write_into(&mut buf);
        buf.truncate(buf.len() - 1);
        let mut pos = 0;
        assert!(BitVector::read_from(&buf, &mut pos).is_err());
    }

    #[test]
    fn parallel_build_identical() {
        let mut rng = XorShift64::new(1234);
        let len = (1 << 20) + 517;
        let mut words = zeroed_words(len);
        for w in words.iter_mut() {
            *w = rng.next();
        }
        let seq = BitVector::from_words(words.clone(), len);
        let par = BitVector::from_words_par(words, len);
        assert_eq!(seq.words(), par.words());
        assert_eq!(seq.rank_super, par.rank_super);
        assert_eq!(seq.rank_block, par.rank_block);
        assert_eq!(seq.hints_one, par.hints_one);
        assert_eq!(seq.hints_zero, par.hints_zero);
    }

    #[test]
    fn directory_overhead_within_budget() {
        let mut rng = XorShift64::new(42);
        let len = 2_000_000;
        let mut words = zeroed_words(len);
        for w in words.iter_mut() {
            *w = rng.next();
        }
        let bv = BitVector::from_words(words, len);
        let payload = bv.words().len() * 64;
        assert!(
            bv.directory_bits() * 4 <= payload,
            "directory {} bits exceeds 25% of payload {}",
            bv.directory_bits(),
            payload
        );
    }

    #[test]
    #[should_panic(expected = "out of range")]
    fn get_out_of_range_panics() {
        let bv = BitVector::from_bits([true, false]);
        bv.get(3);
    }
}
