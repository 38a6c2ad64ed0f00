//! The compact embedding itself.
//!
//! Three bit arrays describe a planar embedding completely: `A` records,
//! for each of the 2m edge processings of the traversal, whether the edge
//! belongs to the spanning tree; `B` collects the tree processings as a
//! parenthesis forest (the root's own parentheses are dropped); `Bstar`
//! does the same for the non-tree edges, which form the co-tree. Together
//! they take 4m + o(m) bits and answer all navigation queries.

use crate::bits::{self, BitVector};
use crate::error::{Error, Result};
use crate::index::{DegreeIndex, NeighbourIndex};
use crate::parens::BalancedParens;
use crate::rotation::RotationSystem;
use crate::spanning::SpanningTree;

const MAGIC: [u8; 4] = *b"PEMB";
const VERSION: u8 = 1;

const FLAG_DEGREE: u8 = 1;
const FLAG_NEIGHBOUR: u8 = 2;

/// A compact planar embedding, immutable once built.
///
/// Vertex ids exposed by queries are preorder ranks of the spanning tree,
/// with the root mapped to 1. Edge positions are 1-based processing steps
/// in `1..=2m`.
pub struct PembStructure {
    n: usize,
    m: usize,
    a: BitVector,
    b: BalancedParens,
    bstar: BalancedParens,
    pub(crate) degree_index: Option<DegreeIndex>,
    pub(crate) neighbour_index: Option<NeighbourIndex>,
}

impl PembStructure {
    /// Assembles a structure from its parts, checking the length and
    /// popcount invariants.
    pub fn from_parts(
        n: usize,
        m: usize,
        a: BitVector,
        b: BalancedParens,
        bstar: BalancedParens,
    ) -> Result<PembStructure> {
        if n == 0 {
            return Err(Error::Validation("vertex count must be positive".into()));
        }
        if m + 1 < n {
            return Err(Error::Validation(format!(
                "{m} edges cannot connect {n} vertices"
            )));
        }
        if a.len() != 2 * m {
            return Err(Error::Inconsistent(format!(
                "A has {} bits, expected {}",
                a.len(),
                2 * m
            )));
        }
        if b.len() != 2 * (n - 1) {
            return Err(Error::Inconsistent(format!(
                "B has {} bits, expected {}",
                b.len(),
                2 * (n - 1)
            )));
        }
        if bstar.len() != 2 * (m + 1 - n) {
            return Err(Error::Inconsistent(format!(
                "Bstar has {} bits, expected {}",
                bstar.len(),
                2 * (m + 1 - n)
            )));
        }
        if a.count_ones() != 2 * (n - 1) {
            return Err(Error::Inconsistent(
                "A must hold exactly one set bit per tree arc".into(),
            ));
        }
        Ok(PembStructure {
            n,
            m,
            a,
            b,
            bstar,
            degree_index: None,
            neighbour_index: None,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn a(&self) -> &BitVector {
        &self.a
    }

    pub fn b(&self) -> &BalancedParens {
        &self.b
    }

    pub fn bstar(&self) -> &BalancedParens {
        &self.bstar
    }

    pub fn degree_index(&self) -> Option<&DegreeIndex> {
        self.degree_index.as_ref()
    }

    pub fn neighbour_index(&self) -> Option<&NeighbourIndex> {
        self.neighbour_index.as_ref()
    }

    pub fn attach_degree_index(&mut self, idx: DegreeIndex) {
        self.degree_index = Some(idx);
    }

    pub fn attach_neighbour_index(&mut self, idx: NeighbourIndex) {
        self.neighbour_index = Some(idx);
    }

    /// In-memory footprint, query directories included.
    pub fn size_bits(&self) -> usize {
        self.a.size_bits()
            + self.b.size_bits()
            + self.bstar.size_bits()
            + self.degree_index.as_ref().map_or(0, |d| d.size_bits())
            + self.neighbour_index.as_ref().map_or(0, |x| x.size_bits())
    }

    /// Serializes to the `.pemb` container. Directories are not stored;
    /// they are rebuilt on load.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(&MAGIC);
        out.push(VERSION);
        out.extend_from_slice(&(self.n as u64).to_le_bytes());
        out.extend_from_slice(&(self.m as u64).to_le_bytes());
        self.a.write_into(&mut out);
        self.b.bits().write_into(&mut out);
        self.bstar.bits().write_into(&mut out);
        let mut flags = 0u8;
        if self.degree_index.is_some() {
            flags |= FLAG_DEGREE;
        }
        if self.neighbour_index.is_some() {
            flags |= FLAG_NEIGHBOUR;
        }
        out.push(flags);
        if let Some(di) = &self.degree_index {
            di.write_into(&mut out);
        }
        if let Some(ni) = &self.neighbour_index {
            ni.write_into(&mut out);
        }
        out
    }

    pub fn from_bytes(buf: &[u8]) -> Result<PembStructure> {
        let mut pos = 0usize;
        if buf.len() < MAGIC.len() + 1 || buf[..4] != MAGIC {
            return Err(Error::Format("not a pemb file".into()));
        }
        pos += 4;
        if buf[pos] != VERSION {
            return Err(Error::Format(format!(
                "unsupported version {}",
                buf[pos]
            )));
        }
        pos += 1;
        let n = read_u64(buf, &mut pos)? as usize;
        let m = read_u64(buf, &mut pos)? as usize;
        let a = BitVector::read_from(buf, &mut pos)?;
        let b = BalancedParens::new(BitVector::read_from(buf, &mut pos)?)?;
        let bstar = BalancedParens::new(BitVector::read_from(buf, &mut pos)?)?;
        if pos >= buf.len() {
            return Err(Error::Format("missing flags byte".into()));
        }
        let flags = buf[pos];
        pos += 1;
        if flags & !(FLAG_DEGREE | FLAG_NEIGHBOUR) != 0 {
            return Err(Error::Format(format!("unknown flags {flags:#x}")));
        }
        let mut s = PembStructure::from_parts(n, m, a, b, bstar)?;
        if flags & FLAG_DEGREE != 0 {
            s.degree_index = Some(DegreeIndex::read_from(buf, &mut pos)?);
        }
        if flags & FLAG_NEIGHBOUR != 0 {
            s.neighbour_index = Some(NeighbourIndex::read_from(buf, &mut pos)?);
        }
        if pos != buf.len() {
            return Err(Error::Format(format!(
                "{} trailing bytes after structure",
                buf.len() - pos
            )));
        }
        Ok(s)
    }
}

pub(crate) fn read_u64(buf: &[u8], pos: &mut usize) -> Result<u64> {
    let end = *pos + 8;
    if end > buf.len() {
        return Err(Error::Format("truncated input".into()));
    }
    let v = u64::from_le_bytes(buf[*pos..end].try_into().unwrap());
    *pos = end;
    Ok(v)
}

/// Checks that `t` can drive a traversal of `g`.
pub(crate) fn check_tree(g: &RotationSystem, t: &SpanningTree) -> Result<()> {
    if t.root() != g.root() {
        return Err(Error::Inconsistent("tree and graph roots differ".into()));
    }
    if t.len() != 2 * (g.n() - 1) || t.slot_span() != 2 * g.m() {
        return Err(Error::Inconsistent(
            "spanning tree size does not match the graph".into(),
        ));
    }
    for v in 1..=g.n() {
        let p = t.parent_slot(v);
        if v == g.root() {
            if p != 0 {
                return Err(Error::Inconsistent("root must have no parent".into()));
            }
            continue;
        }
        if p == 0 || p > 2 * g.m() || g.src(p) != v || !t.is_tree_slot(p) {
            return Err(Error::Inconsistent(format!(
                "parent slot of vertex {v} does not belong to it"
            )));
        }
    }
    Ok(())
}

/// Builds the structure with one sequential walk of the traversal.
///
/// Starting at the root's first slot, each step processes one slot: a
/// non-tree slot writes its bit and moves to the next slot at the same
/// vertex, a tree slot writes its bit and jumps past the mate, descending
/// into or returning from the subtree. First processings of an edge write
/// an opening parenthesis, second processings a closing one.
pub fn build_sequential(g: &RotationSystem, t: &SpanningTree) -> Result<PembStructure> {
    check_tree(g, t)?;
    let n = g.n();
    let m = g.m();
    let total = 2 * m;
    let tree_bits = 2 * (n - 1);
    let mut a = bits::zeroed_words(total);
    let mut b = bits::zeroed_words(tree_bits);
    let mut bstar = bits::zeroed_words(total - tree_bits);
    let mut seen = vec![false; m + 1];
    let mut processed = vec![false; total + 1];
    let mut bp = 0usize;
    let mut sp = 0usize;
    if m > 0 {
        let start = g.first_slot(g.root());
        let mut cur = start;
        for step in 0..total {
            if processed[cur] {
                return Err(Error::Inconsistent(
                    "traversal revisited a slot; tree does not span the graph".into(),
                ));
            }
            processed[cur] = true;
            let e = g.edge_of(cur);
            let second = seen[e];
            seen[e] = true;
            if t.is_tree_slot(cur) {
                a[step / 64] |= 1 << (step % 64);
                if bp >= tree_bits {
                    return Err(Error::Inconsistent("too many tree processings".into()));
                }
                if second {
                    b[bp / 64] |= 1 << (bp % 64);
                }
                bp += 1;
                cur = g.rot_next(g.mate(cur));
            } else {
                if second {
                    bstar[sp / 64] |= 1 << (sp % 64);
                }
                sp += 1;
                cur = g.rot_next(cur);
            }
        }
        if cur != start || bp != tree_bits {
            return Err(Error::Inconsistent(
                "traversal did not close its cycle".into(),
            ));
        }
    }
    PembStructure::from_parts(
        n,
        m,
        BitVector::from_words(a, total),
        BalancedParens::new(BitVector::from_words(b, tree_bits))?,
        BalancedParens::new(BitVector::from_words(bstar, total - tree_bits))?,
    )
}
