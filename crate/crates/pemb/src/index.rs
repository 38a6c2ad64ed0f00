//! Optional directories for constant-time degree and fast adjacency.
//!
//! Both indexes mark only vertices of large degree, so their footprint
//! stays within o(m) bits for the default thresholds. Unmarked vertices
//! fall back to the plain chain walks, which are short by construction.

use std::io::Write as _;

use crate::embedding::{read_u64, PembStructure};
use crate::error::Error;
use crate::sparse::SparseBitVector;

fn ceil_log2(x: usize) -> usize {
    assert!(x >= 1);
    (usize::BITS - (x - 1).leading_zeros()) as usize
}

/// Degree threshold used when none is given: ceil(lg m).
pub fn default_degree_threshold(m: usize) -> usize {
    ceil_log2(m.max(2))
}

/// Neighbour threshold used when none is given: ceil(lg m) * ceil(lg lg m).
pub fn default_neighbour_threshold(m: usize) -> usize {
    let l = ceil_log2(m.max(2));
    l * ceil_log2(l.max(2))
}

/// Marks vertices of degree at least `f` and stores their degrees as a
/// unary staircase: entry `r`'s degree is the gap between the `r`th and
/// previous one positions of `e`. At most 2m/f vertices qualify.
pub struct DegreeIndex {
    f: usize,
    d: SparseBitVector,
    e: SparseBitVector,
}

pub fn build_degree_index(s: &PembStructure, f: usize) -> DegreeIndex {
    assert!(f >= 1, "threshold must be positive");
    let mut marked = Vec::new();
    let mut cumulative = Vec::new();
    let mut acc = 0usize;
    for v in 1..=s.n() {
        let d = s.degree_slow(v);
        if d >= f {
            marked.push(v);
            acc += d;
            cumulative.push(acc);
        }
    }
    DegreeIndex {
        f,
        d: SparseBitVector::from_positions(s.n(), &marked),
        e: SparseBitVector::from_positions(2 * s.m().max(1), &cumulative),
    }
}

impl DegreeIndex {
    pub fn threshold(&self) -> usize {
        self.f
    }

    pub fn is_marked(&self, v: usize) -> bool {
        self.d.get(v)
    }

    pub fn marked_count(&self) -> usize {
        self.d.count_ones()
    }

    /// Degree of a marked vertex.
    pub fn degree(&self, v: usize) -> usize {
        let r = self.d.rank1(v);
        assert!(r >= 1 && self.d.get(v), "vertex {v} is not marked");
        let hi = self.e.select1(r);
        let lo = if r == 1 { 0 } else { self.e.select1(r - 1) };
        hi - lo
    }

    pub fn size_bits(&self) -> usize {
        64 + self.d.size_bits() + self.e.size_bits()
    }

    pub fn write_into(&self, out: &mut Vec<u8>) {
        out.write_all(&(self.f as u64).to_le_bytes()).expect("vec write");
        self.d.write_into(out).expect("vec write");
        self.e.write_into(out).expect("vec write");
    }

    pub fn read_from(buf: &[u8], pos: &mut usize) -> Result<DegreeIndex, Error> {
        let f = read_u64(buf, pos)? as usize;
        if f == 0 {
            return Err(Error::Format("degree threshold must be positive".into()));
        }
        let mut rdr = &buf[*pos..];
        let d = SparseBitVector::read_from(&mut rdr)?;
        let e = SparseBitVector::read_from(&mut rdr)?;
        *pos = buf.len() - rdr.len();
        if d.count_ones() != e.count_ones() {
            return Err(Error::Format(
                "degree index marks and boundaries disagree".into(),
            ));
        }
        Ok(DegreeIndex { f, d, e })
    }
}

/// Adjacency between two heavy vertices, answered on the simple graph
/// induced by them. Lists are sorted, so a lookup is one binary search.
pub struct NeighbourIndex {
    f: usize,
    dp: SparseBitVector,
    starts: Vec<u32>,
    nbrs: Vec<u32>,
}

pub fn build_neighbour_index(s: &PembStructure, f: usize) -> NeighbourIndex {
    assert!(f >= 1, "threshold must be positive");
    let mut marked = Vec::new();
    for v in 1..=s.n() {
        if s.degree_slow(v) >= f {
            marked.push(v);
        }
    }
    let dp = SparseBitVector::from_positions(s.n(), &marked);
    let mut starts = Vec::with_capacity(marked.len() + 1);
    let mut nbrs = Vec::new();
    starts.push(0u32);
    for &u in &marked {
        let mut list: Vec<u32> = Vec::new();
        let mut i = s.first(u);
        while i != 0 {
            let w = s.vertex(s.mate(i));
            if w != u && dp.get(w) {
                list.push(dp.rank1(w) as u32);
            }
            i = s.next(i);
        }
        list.sort_unstable();
        list.dedup();
        nbrs.extend_from_slice(&list);
        starts.push(nbrs.len() as u32);
    }
    NeighbourIndex { f, dp, starts, nbrs }
}

impl NeighbourIndex {
    pub fn threshold(&self) -> usize {
        self.f
    }

    pub fn is_marked(&self, v: usize) -> bool {
        self.dp.get(v)
    }

    pub fn marked_count(&self) -> usize {
        self.dp.count_ones()
    }

    /// Whether marked vertices `u` and `v` share an edge.
    pub fn adjacent(&self, u: usize, v: usize) -> bool {
        assert!(self.dp.get(u) && self.dp.get(v), "both endpoints must be marked");
        if u == v {
            return false;
        }
        let up = self.dp.rank1(u);
        let vp = self.dp.rank1(v) as u32;
        let lo = self.starts[up - 1] as usize;
        let hi = self.starts[up] as usize;
        self.nbrs[lo..hi].binary_search(&vp).is_ok()
    }

    pub fn size_bits(&self) -> usize {
        64 + self.dp.size_bits() + 32 * (self.starts.len() + self.nbrs.len())
    }

    pub fn write_into(&self, out: &mut Vec<u8>) {
        out.write_all(&(self.f as u64).to_le_bytes()).expect("vec write");
        self.dp.write_into(out).expect("vec write");
        out.write_all(&(self.nbrs.len() as u64).to_le_bytes()).expect("vec write");
        for &x in self.starts.iter().skip(1) {
            out.write_all(&x.to_le_bytes()).expect("vec write");
        }
        for &x in &self.nbrs {
            out.write_all(&x.to_le_bytes()).expect("vec write");
        }
    }

    pub fn read_from(buf: &[u8], pos: &mut usize) -> Result<NeighbourIndex, Error> {
        let f = read_u64(buf, pos)? as usize;
        if f == 0 {
            return Err(Error::Format("neighbour threshold must be positive".into()));
        }
        let mut rdr = &buf[*pos..];
        let dp = SparseBitVector::read_from(&mut rdr)?;
        *pos = buf.len() - rdr.len();
        let count = dp.count_ones();
        let total = read_u64(buf, pos)? as usize;
        let read_u32 = |pos: &mut usize| -> Result<u32, Error> {
            let end = *pos + 4;
            if end > buf.len() {
                return Err(Error::Format("truncated neighbour index".into()));
            }
            let x = u32::from_le_bytes(buf[*pos..end].try_into().unwrap());
            *pos = end;
            Ok(x)
        };
        let mut starts = Vec::with_capacity(count + 1);
        starts.push(0u32);
        for _ in 0..count {
            let x = read_u32(pos)?;
            if (x as usize) < *starts.last().unwrap() as usize || x as usize > total {
                return Err(Error::Format("neighbour index offsets out of order".into()));
            }
            starts.push(x);
        }
        if *starts.last().unwrap() as usize != total {
            return Err(Error::Format("neighbour index length mismatch".into()));
        }
        let mut nbrs = Vec::with_capacity(total);
        for _ in 0..total {
            nbrs.push(read_u32(pos)?);
        }
        for w in 0..count {
            let lo = starts[w] as usize;
            let hi = starts[w + 1] as usize;
            for k in lo..hi {
                if k > lo && nbrs[k - 1] >= nbrs[k] {
                    return Err(Error::Format("neighbour list not sorted".into()));
                }
                if nbrs[k] == 0 || nbrs[k] as usize > count {
                    return Err(Error::Format("neighbour id out of range".into()));
                }
            }
        }
        Ok(NeighbourIndex { f, dp, starts, nbrs })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embedding::build_sequential;
    use crate::generate;
    use crate::rotation::RotationSystem;
    use crate::spanning::{spanning_tree_dfs, SpanningTree};

    fn fig1_structure() -> PembStructure {
        let g = RotationSystem::load_pg(include_str!("../tests/data/fig1.pg")).unwrap();
        let parents = vec![0u32, 0, 7, 11, 13, 15, 18, 21, 25];
        let t = SpanningTree::from_parent_slots(&g, parents).unwrap();
        build_sequential(&g, &t).unwrap()
    }

    #[test]
    fn fig1_marks_at_threshold_four() {
        let s = fig1_structure();
        let di = build_degree_index(&s, 4);
        let marked: Vec<usize> = (1..=8).filter(|&v| di.is_marked(v)).collect();
        assert_eq!(marked, vec![1, 2, 7, 8]);
        assert_eq!(di.degree(1), 6);
        assert_eq!(di.degree(2), 4);
        assert_eq!(di.degree(7), 4);
        assert_eq!(di.degree(8), 4);
        assert!(di.marked_count() * 4 <= 2 * s.m());
        assert_eq!(s.degree(3), 2);
    }

    #[test]
    fn extreme_thresholds() {
        let s = fig1_structure();
        let none = build_degree_index(&s, 100);
        assert_eq!(none.marked_count(), 0);
        let all = build_degree_index(&s, 1);
        assert_eq!(all.marked_count(), 8);
        for v in 1..=8 {
            assert_eq!(all.degree(v), s.degree_slow(v));
        }
    }

    #[test]
    fn indexed_degree_equals_slow() {
        for seed in [3u64, 19, 40] {
            let base = generate::stacked(200, seed).unwrap();
            let g = generate::decorate(&base, 5, 8, seed ^ 0xf0).unwrap();
            let t = spanning_tree_dfs(&g).unwrap();
            let mut s = build_sequential(&g, &t).unwrap();
            let slow: Vec<usize> = (1..=g.n()).map(|v| s.degree_slow(v)).collect();
            let f = default_degree_threshold(g.m());
            let di = build_degree_index(&s, f);
            assert!(di.marked_count() * f <= 2 * g.m());
            s.attach_degree_index(di);
            for v in 1..=g.n() {
                assert_eq!(s.degree(v), slow[v - 1]);
            }
        }
    }

    #[test]
    fn neighbour_index_equivalence() {
        for seed in [1u64, 8, 21] {
            let base = generate::stacked(55, seed).unwrap();
            let g = generate::decorate(&base, 4, 6, seed ^ 0x33).unwrap();
            let t = spanning_tree_dfs(&g).unwrap();
            let mut s = build_sequential(&g, &t).unwrap();
            let mut plain = Vec::new();
            for u in 1..=g.n() {
                for v in 1..=g.n() {
                    plain.push(s.neighbour(u, v));
                }
            }
            s.attach_neighbour_index(build_neighbour_index(&s, 3));
            let mut k = 0;
            for u in 1..=g.n() {
                for v in 1..=g.n() {
                    assert_eq!(s.neighbour(u, v), plain[k], "pair ({u}, {v})");
                    k += 1;
                }
            }
        }
    }

    #[test]
    fn contracted_graph_is_simple() {
        let base = generate::stacked(40, 12).unwrap();
        let g = generate::decorate(&base, 6, 6, 5).unwrap();
        let s = build_sequential(&g, &spanning_tree_dfs(&g).unwrap()).unwrap();
        let ni = build_neighbour_index(&s, 4);
        let count = ni.marked_count();
        for w in 0..count {
            let lo = ni.starts[w] as usize;
            let hi = ni.starts[w + 1] as usize;
            for k in lo..hi {
                assert_ne!(ni.nbrs[k] as usize, w + 1, "no self-loops");
                if k > lo {
                    assert!(ni.nbrs[k - 1] < ni.nbrs[k], "sorted, no duplicates");
                }
            }
        }
    }

    #[test]
    fn serialization_with_indexes() {
        let base = generate::stacked(80, 2).unwrap();
        let g = generate::decorate(&base, 3, 3, 77).unwrap();
        let mut s = build_sequential(&g, &spanning_tree_dfs(&g).unwrap()).unwrap();
        s.attach_degree_index(build_degree_index(&s, default_degree_threshold(g.m())));
        s.attach_neighbour_index(build_neighbour_index(
            &s,
            default_neighbour_threshold(g.m()),
        ));
        let bytes = s.to_bytes();
        let back = PembStructure::from_bytes(&bytes).unwrap();
        assert!(back.degree_index().is_some());
        assert!(back.neighbour_index().is_some());
        for v in 1..=g.n() {
            assert_eq!(back.degree(v), s.degree(v));
        }
        for u in 1..=g.n() {
            for v in 1..=g.n() {
                assert_eq!(back.neighbour(u, v), s.neighbour(u, v));
            }
        }
        assert_eq!(back.to_bytes(), bytes);
    }

    #[test]
    fn large_sparse_index() {
        let g = generate::stacked(10_000, 31).unwrap();
        let s = build_sequential(&g, &spanning_tree_dfs(&g).unwrap()).unwrap();
        let f = default_degree_threshold(g.m());
        let di = build_degree_index(&s, f);
        assert!(di.marked_count() * f <= 2 * g.m());
        for v in (1..=g.n()).step_by(379) {
            if di.is_marked(v) {
                assert_eq!(di.degree(v), s.degree_slow(v));
            } else {
                assert!(s.degree_slow(v) < f);
            }
        }
    }

    #[test]
    fn thresholds_grow_slowly() {
        assert_eq!(default_degree_threshold(1), 1);
        assert_eq!(default_degree_threshold(2), 1);
        assert_eq!(default_degree_threshold(16), 4);
        assert_eq!(default_degree_threshold(1 << 20), 20);
        assert_eq!(default_neighbour_threshold(1 << 20), 20 * 5);
    }
}
