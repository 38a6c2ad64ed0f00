//! Entropy-compressed bitvector for sparse marker sets. Blocks of b =
//! ceil(lg l / 2) bits are stored as a (class, offset) pair: the class is the
//! block popcount and the offset indexes the block within the combinatorial
//! enumeration of its class. Blocks with class 0 cost no offset bits at all,
//! which is what makes mostly-empty markers cheap.
//!
//! Every 64th block carries an absolute rank sample and an absolute offset
//! pointer, so rank and select walk at most one group of class fields.

use crate::error::{Error, Result};
use std::io::{Read, Write};

const GROUP_BLOCKS: usize = 64;

/// C(n, k) for n, k <= 64; values fit u64.
fn binomial_table() -> &'static [[u64; 65]; 65] {
    use std::sync::OnceLock;
    static TABLE: OnceLock<Box<[[u64; 65]; 65]>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut c = Box::new([[0u64; 65]; 65]);
        for n in 0..=64 {
            c[n][0] = 1;
            for k in 1..=n {
                c[n][k] = c[n - 1][k - 1] + if k <= n - 1 { c[n - 1][k] } else { 0 };
            }
        }
        c
    })
}

fn ceil_log2(x: u64) -> usize {
    if x <= 1 {
        0
    } else {
        64 - (x - 1).leading_zeros() as usize
    }
}

/// Offset of `pattern` (bit p = position p of the block) within the
/// enumeration of b-bit blocks having its popcount.
fn encode_offset(pattern: u64, b: usize) -> u64 {
    let binom = binomial_table();
    let mut r = pattern.count_ones() as usize;
    let mut o = 0u64;
    for p in 0..b {
        if pattern >> p & 1 == 1 {
            o += binom[b - p - 1][r];
            r -= 1;
        }
    }
    o
}

fn decode_offset(mut o: u64, b: usize, c: usize) -> u64 {
    let binom = binomial_table();
    let mut r = c;
    let mut pattern = 0u64;
    for p in 0..b {
        if r == 0 {
            break;
        }
        let t = binom[b - p - 1][r];
        if o >= t {
            pattern |= 1 << p;
            o -= t;
            r -= 1;
        }
    }
    pattern
}

fn read_bits(words: &[u64], start: usize, width: usize) -> u64 {
    if width == 0 {
        return 0;
    }
    let w = start / 64;
    let off = start % 64;
    let mut v = words[w] >> off;
    if off + width > 64 {
        v |= words[w + 1] << (64 - off);
    }
    if width == 64 { v } else { v & ((1u64 << width) - 1) }
}

fn append_bits(words: &mut Vec<u64>, bit_len: &mut usize, value: u64, width: usize) {
    if width == 0 {
        return;
    }
    let need = (*bit_len + width).div_ceil(64);
    words.resize(need.max(words.len()), 0);
    let w = *bit_len / 64;
    let off = *bit_len % 64;
    words[w] |= value << off;
    if off + width > 64 {
        words[w + 1] |= value >> (64 - off);
    }
    *bit_len += width;
}

#[derive(Clone, Debug)]
pub struct SparseBitVector {
    len: usize,
    ones: usize,
    block_bits: usize,
    class_width: usize,
    classes: Vec<u64>,
    offsets: Vec<u64>,
    offset_len: usize,
    /// Per group: ones before it and offset-stream position of its first block.
    sample_rank: Vec<u64>,
    sample_ptr: Vec<u64>,
}

impl SparseBitVector {
    pub fn from_bits<I: IntoIterator<Item = bool>>(len: usize, bits: I) -> SparseBitVector {
        let block_bits = ceil_log2(len.max(2) as u64).div_ceil(2).clamp(1, 63);
        let nblocks = len.div_ceil(block_bits);
        let class_width = ceil_log2(block_bits as u64 + 1);
        let mut classes = Vec::with_capacity((nblocks * class_width).div_ceil(64));
        let mut class_len = 0usize;
        let mut offsets = Vec::new();
        let mut offset_len = 0usize;
        let binom = binomial_table();

        let mut it = bits.into_iter();
        let mut ones = 0usize;
        let mut taken = 0usize;
        for _ in 0..nblocks {
            let in_block = block_bits.min(len - taken);
            let mut pattern = 0u64;
            for p in 0..in_block {
                if it.next().expect("bit iterator shorter than stated length") {
                    pattern |= 1 << p;
                }
            }
            taken += in_block;
            let c = pattern.count_ones() as usize;
            ones += c;
            append_bits(&mut classes, &mut class_len, c as u64, class_width);
            let w = ceil_log2(binom[block_bits][c]);
            append_bits(&mut offsets, &mut offset_len, encode_offset(pattern, block_bits), w);
        }
        assert!(it.next().is_none(), "bit iterator longer than stated length");

        let mut sv = SparseBitVector {
            len,
            ones,
            block_bits,
            class_width,
            classes,
            offsets,
            offset_len,
            sample_rank: Vec::new(),
            sample_ptr: Vec::new(),
        };
        sv.build_samples();
        sv
    }

    pub fn from_positions(len: usize, ones: &[usize]) -> SparseBitVector {
        for w in ones.windows(2) {
            assert!(w[0] < w[1], "positions must be strictly increasing");
        }
        if let Some(&last) = ones.last() {
            assert!(last >= 1 && last <= len, "position {last} out of range 1..={len}");
        }
        let mut next = 0usize;
        let bits = (1..=len).map(|i| {
            if next < ones.len() && ones[next] == i {
                next += 1;
                true
            } else {
                false
            }
        });
        SparseBitVector::from_bits(len, bits)
    }

    fn build_samples(&mut self) {
        let nblocks = self.len.div_ceil(self.block_bits);
        let ngroups = nblocks.div_ceil(GROUP_BLOCKS);
        self.sample_rank = Vec::with_capacity(ngroups + 1);
        self.sample_ptr = Vec::with_capacity(ngroups + 1);
        let binom = binomial_table();
        let mut rank = 0u64;
        let mut ptr = 0u64;
        for b in 0..nblocks {
            if b % GROUP_BLOCKS == 0 {
                self.sample_rank.push(rank);
                self.sample_ptr.push(ptr);
            }
            let c = read_bits(&self.classes, b * self.class_width, self.class_width) as usize;
            rank += c as u64;
            ptr += ceil_log2(binom[self.block_bits][c]) as u64;
        }
        self.sample_rank.push(rank);
        self.sample_ptr.push(ptr);
        debug_assert_eq!(rank as usize, self.ones);
        debug_assert_eq!(ptr as usize, self.offset_len);
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

    fn class_of(&self, block: usize) -> usize {
        read_bits(&self.classes, block * self.class_width, self.class_width) as usize
    }

    /// Decoded pattern of `block` plus the ones and offset-stream position
    /// before it, via a walk from the nearest sample.
    fn locate(&self, block: usize) -> (u64, usize) {
        let g = block / GROUP_BLOCKS;
        let mut rank = self.sample_rank[g] as usize;
        let mut ptr = self.sample_ptr[g] as usize;
        let binom = binomial_table();
        for b in g * GROUP_BLOCKS..block {
            let c = self.class_of(b);
            rank += c;
            ptr += ceil_log2(binom[self.block_bits][c]);
        }
        let c = self.class_of(block);
        let w = ceil_log2(binom[self.block_bits][c]);
        let pattern = decode_offset(read_bits(&self.offsets, ptr, w), self.block_bits, c);
        (pattern, rank)
    }

    pub fn get(&self, i: usize) -> bool {
        assert!(i >= 1 && i <= self.len, "position {i} out of range 1..={}", self.len);
        let block = (i - 1) / self.block_bits;
        let (pattern, _) = self.locate(block);
        pattern >> ((i - 1) % self.block_bits) & 1 == 1
    }

    pub fn rank1(&self, i: usize) -> usize {
        assert!(i <= self.len, "position {i} out of range 0..={}", self.len);
        if i == 0 {
            return 0;
        }
        let block = (i - 1) / self.block_bits;
        let (pattern, before) = self.locate(block);
        let within = (i - 1) % self.block_bits + 1;
        before + (pattern & ((1u64 << within) - 1)).count_ones() as usize
    }

    pub fn rank0(&self, i: usize) -> usize {
        i - self.rank1(i)
    }

    /// Position of the j-th one; 0 for j = 0.
    pub fn select1(&self, j: usize) -> usize {
        self.try_select1(j)
            .unwrap_or_else(|| panic!("select1({j}) beyond {} ones", self.ones))
    }

    pub fn try_select1(&self, j: usize) -> Option<usize> {
        if j == 0 {
            return Some(0);
        }
        if j > self.ones {
            return None;
        }
        let g = self.sample_rank.partition_point(|&r| (r as usize) < j) - 1;
        let mut rank = self.sample_rank[g] as usize;
        let mut ptr = self.sample_ptr[g] as usize;
        let binom = binomial_table();
        let nblocks = self.len.div_ceil(self.block_bits);
        for b in g * GROUP_BLOCKS..nblocks {
            let c = self.class_of(b);
            let w = ceil_log2(binom[self.block_bits][c]);
            if rank + c >= j {
                let mut pattern =
                    decode_offset(read_bits(&self.offsets, ptr, w), self.block_bits, c);
                let mut need = j - rank;
                let mut pos = 0usize;
                loop {
                    let tz = pattern.trailing_zeros() as usize;
                    pos += tz;
                    need -= 1;
                    if need == 0 {
                        return Some(b * self.block_bits + pos + 1);
                    }
                    pattern >>= tz + 1;
                    pos += 1;
                }
            }
            rank += c;
            ptr += w;
        }
        unreachable!("rank samples inconsistent with stored ones count");
    }

    /// Position of the j-th zero; 0 for j = 0.
    pub fn select0(&self, j: usize) -> usize {
        self.try_select0(j)
            .unwrap_or_else(|| panic!("select0({j}) beyond {} zeros", self.len - self.ones))
    }

    pub fn try_select0(&self, j: usize) -> Option<usize> {
        if j == 0 {
            return Some(0);
        }
        if j > self.len - self.ones {
            return None;
        }
        let zeros_before = |g: usize| -> usize {
            let bits = (g * GROUP_BLOCKS * self.block_bits).min(self.len);
            bits - self.sample_rank[g] as usize
        };
        let mut lo = 0usize;
        let mut hi = self.sample_rank.len() - 1;
        while lo < hi {
            let mid = (lo + hi + 1) / 2;
            if zeros_before(mid) < j {
                lo = mid;
            } else {
                hi = mid - 1;
            }
        }
        let g = lo;
        let mut zeros = zeros_before(g);
        let mut ptr = self.sample_ptr[g] as usize;
        let binom = binomial_table();
        let nblocks = self.len.div_ceil(self.block_bits);
        for b in g * GROUP_BLOCKS..nblocks {
            let c = self.class_of(b);
            let w = ceil_log2(binom[self.block_bits][c]);
            let in_block = self.block_bits.min(self.len - b * self.block_bits);
            if zeros + in_block - c >= j {
                let pattern = decode_offset(read_bits(&self.offsets, ptr, w), self.block_bits, c);
                let mut need = j - zeros;
                for pos in 0..in_block {
                    if pattern >> pos & 1 == 0 {
                        need -= 1;
                        if need == 0 {
                            return Some(b * self.block_bits + pos + 1);
                        }
                    }
                }
                unreachable!("zero count inconsistent inside block");
            }
            zeros += in_block - c;
            ptr += w;
        }
        unreachable!("rank samples inconsistent with stored zeros count");
    }

    /// In-memory footprint in bits, samples included.
    pub fn size_bits(&self) -> usize {
        (self.classes.len() + self.offsets.len()) * 64
            + (self.sample_rank.len() + self.sample_ptr.len()) * 64
            + 64 * 5
    }

    pub fn write_into<W: Write>(&self, out: &mut W) -> Result<()> {
        out.write_all(&(self.len as u64).to_le_bytes())?;
        out.write_all(&(self.ones as u64).to_le_bytes())?;
        out.write_all(&(self.offset_len as u64).to_le_bytes())?;
        for arr in [&self.classes, &self.offsets] {
            out.write_all(&(arr.len() as u64).to_le_bytes())?;
            for w in arr {
                out.write_all(&w.to_le_bytes())?;
            }
        }
        Ok(())
    }

    pub fn read_from<R: Read>(inp: &mut R) -> Result<SparseBitVector> {
        fn u64_of<R: Read>(inp: &mut R, what: &str) -> Result<u64> {
            let mut buf = [0u8; 8];
            inp.read_exact(&mut buf)
                .map_err(|_| Error::Format(format!("truncated sparse bitvector ({what})")))?;
            Ok(u64::from_le_bytes(buf))
        }
        let len = u64_of(inp, "length")? as usize;
        let ones = u64_of(inp, "ones")? as usize;
        let offset_len = u64_of(inp, "offset length")? as usize;
        let mut arrays = Vec::new();
        for what in ["classes", "offsets"] {
            let words = u64_of(inp, what)? as usize;
            let mut arr = Vec::with_capacity(words.min(1 << 24));
            for _ in 0..words {
                arr.push(u64_of(inp, what)?);
            }
            arrays.push(arr);
        }
        let offsets = arrays.pop().unwrap();
        let classes = arrays.pop().unwrap();

        let block_bits = ceil_log2(len.max(2) as u64).div_ceil(2).clamp(1, 63);
        let class_width = ceil_log2(block_bits as u64 + 1);
        let nblocks = len.div_ceil(block_bits);
        if classes.len() != (nblocks * class_width).div_ceil(64)
            || offsets.len() != offset_len.div_ceil(64)
            || ones > len
        {
            return Err(Error::Format("sparse bitvector sections inconsistent".into()));
        }
        let mut sv = SparseBitVector {
            len,
            ones,
            block_bits,
            class_width,
            classes,
            offsets,
            offset_len,
            sample_rank: Vec::new(),
            sample_ptr: Vec::new(),
        };
        sv.build_samples();
        if sv.sample_rank.last().copied() != Some(ones as u64)
            || sv.sample_ptr.last().copied() != Some(offset_len as u64)
        {
            return Err(Error::Format("sparse bitvector payload inconsistent".into()));
        }
        Ok(sv)
    }
}
