//! Slow reference implementations for tests.
//!
//! `replay` walks the processing order directly on a rotation system and
//! a spanning tree, recording everything the compact structure is
//! supposed to answer. Queries here are linear scans over that record,
//! which keeps them obviously correct.

use crate::rotation::RotationSystem;
use crate::spanning::SpanningTree;

/// Full trace of one traversal. `slot`, `a`, `b` and `bstar` carry a
/// dummy entry at index 0 so steps stay 1-based.
pub struct Replay {
    pub slot: Vec<usize>,
    pub step_of: Vec<usize>,
    pub step_vertex: Vec<usize>,
    pub visits: Vec<Vec<usize>>,
    pub relabel: Vec<usize>,
    pub original: Vec<usize>,
    pub a: Vec<bool>,
    pub b: Vec<bool>,
    pub bstar: Vec<bool>,
}

pub fn replay(g: &RotationSystem, t: &SpanningTree) -> Replay {
    let n = g.n();
    let m = g.m();
    let total = 2 * m;
    let root = g.root();
    let mut relabel = vec![0usize; n + 1];
    let mut original = vec![0usize];
    relabel[root] = 1;
    original.push(root);
    let mut slot = vec![0usize];
    let mut step_of = vec![0usize; total + 1];
    let mut a = vec![false];
    let mut b = vec![false];
    let mut bstar = vec![false];
    let mut seen_edge = vec![false; m + 1];
    let mut cur = if m == 0 { 0 } else { g.first_slot(root) };
    for step in 1..=total {
        assert_eq!(step_of[cur], 0, "no slot is processed twice");
        let e = g.edge_of(cur);
        let second = seen_edge[e];
        seen_edge[e] = true;
        slot.push(cur);
        step_of[cur] = step;
        if t.is_tree_slot(cur) {
            a.push(true);
            b.push(second);
            if !second {
                let w = g.src(g.mate(cur));
                assert_eq!(relabel[w], 0, "tree opens reach fresh vertices");
                relabel[w] = original.len();
                original.push(w);
            }
            cur = g.rot_next(g.mate(cur));
        } else {
            a.push(false);
            bstar.push(second);
            cur = g.rot_next(cur);
        }
    }
    if m > 0 {
        assert_eq!(cur, g.first_slot(root), "the tour closes its cycle");
    }
    assert!(seen_edge.iter().skip(1).all(|&x| x), "every edge appears");
    assert!(relabel.iter().skip(1).all(|&x| x != 0), "every vertex is reached");
    let mut visits = vec![Vec::new(); n + 1];
    let mut step_vertex = vec![0usize; total + 1];
    for step in 1..=total {
        let v = relabel[g.src(slot[step])];
        step_vertex[step] = v;
        visits[v].push(step);
    }
    Replay {
        slot,
        step_of,
        step_vertex,
        visits,
        relabel,
        original,
        a,
        b,
        bstar,
    }
}

impl Replay {
    pub fn steps(&self) -> usize {
        self.slot.len() - 1
    }

    pub fn vertex(&self, i: usize) -> usize {
        self.step_vertex[i]
    }

    pub fn mate(&self, i: usize, g: &RotationSystem) -> usize {
        self.step_of[g.mate(self.slot[i])]
    }

    pub fn first(&self, v: usize) -> usize {
        self.visits[v].first().copied().unwrap_or(0)
    }

    pub fn last(&self, v: usize) -> usize {
        self.visits[v].last().copied().unwrap_or(0)
    }

    pub fn next(&self, i: usize) -> usize {
        let chain = &self.visits[self.vertex(i)];
        let k = chain.iter().position(|&x| x == i).unwrap();
        chain.get(k + 1).copied().unwrap_or(0)
    }

    pub fn prev(&self, i: usize) -> usize {
        let chain = &self.visits[self.vertex(i)];
        let k = chain.iter().position(|&x| x == i).unwrap();
        if k == 0 {
            0
        } else {
            chain[k - 1]
        }
    }

    pub fn degree(&self, v: usize) -> usize {
        self.visits[v].len()
    }

    pub fn listing(&self, v: usize, g: &RotationSystem, ccw: bool) -> Vec<usize> {
        let mut out: Vec<usize> = self.visits[v]
            .iter()
            .map(|&i| self.relabel[g.src(g.mate(self.slot[i]))])
            .collect();
        if !ccw {
            out.reverse();
        }
        out
    }

    pub fn face(&self, e: usize, g: &RotationSystem, cw: bool) -> Vec<usize> {
        let s0 = self.slot[e];
        let mut out = Vec::new();
        let mut s = s0;
        loop {
            out.push(self.relabel[g.src(g.mate(s))]);
            s = g.rot_next(g.mate(s));
            if s == s0 {
                break;
            }
        }
        if !cw {
            let tail: Vec<usize> = out[1..].iter().rev().copied().collect();
            out.truncate(1);
            out.extend(tail);
        }
        out
    }

    pub fn neighbour(&self, u: usize, v: usize, g: &RotationSystem) -> bool {
        let ou = self.original[u];
        let ov = self.original[v];
        g.slots(ou).any(|s| g.src(g.mate(s)) == ov)
    }

    /// Rotation of every vertex under the new labels, anchored at the
    /// slot ordering of the input, one list per new label.
    pub fn relabeled_rotations(&self, g: &RotationSystem) -> Vec<Vec<usize>> {
        (1..=g.n())
            .map(|v| {
                g.slots(self.original[v])
                    .map(|s| self.relabel[g.src(g.mate(s))])
                    .collect()
            })
            .collect()
    }
}

/// Whether `b` is a rotation of `a`.
pub fn cyclically_equal(a: &[usize], b: &[usize]) -> bool {
    if a.len() != b.len() {
        return false;
    }
    if a.is_empty() {
        return true;
    }
    (0..a.len()).any(|off| (0..a.len()).all(|k| a[k] == b[(k + off) % b.len()]))
}

pub fn bit_string(bits: &[bool]) -> String {
    bits.iter()
        .skip(1)
        .map(|&x| if x { '1' } else { '0' })
        .collect()
}
