//! Navigation queries over the compact embedding.
//!
//! Every query runs in constant time on top of rank, select, match and
//! parent, except the derived ones (degree, listing, face, neighbour,
//! dfs) which pay constant time per element they touch. Positions index
//! the processing order `1..=2m`; vertices are preorder ids `1..=n`.

use crate::embedding::PembStructure;
use crate::rotation::RotationSystem;

/// Direction for listing and face walks.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Order {
    Ccw,
    Cw,
}

impl PembStructure {
    fn check_vertex(&self, v: usize) {
        assert!(
            v >= 1 && v <= self.n(),
            "vertex {v} out of range 1..={}",
            self.n()
        );
    }

    fn check_pos(&self, i: usize) {
        assert!(
            i >= 1 && i <= 2 * self.m(),
            "position {i} out of range 1..={}",
            2 * self.m()
        );
    }

    /// First edge processed while visiting `v`; 0 when m = 0.
    pub fn first(&self, v: usize) -> usize {
        self.check_vertex(v);
        if self.m() == 0 {
            return 0;
        }
        self.a().select1(self.b().select0(v - 1)) + 1
    }

    /// Last edge processed while visiting `v`; 0 when m = 0.
    pub fn last(&self, v: usize) -> usize {
        self.check_vertex(v);
        let total = 2 * self.m();
        if total == 0 {
            return 0;
        }
        if v == 1 {
            // The root has no closing parenthesis in B. Its final edge is
            // either the overall last processing, or the opening of the
            // subtree whose closing lands on position 2m.
            return if self.a().get(total) {
                self.mate(total)
            } else {
                total
            };
        }
        self.a()
            .select1(self.b().match_pos(self.b().select0(v - 1)))
    }

    /// Next edge processed at the same vertex; 0 when `i` is its last.
    pub fn next(&self, i: usize) -> usize {
        self.check_pos(i);
        let total = 2 * self.m();
        if !self.a().get(i) {
            return if i < total { i + 1 } else { 0 };
        }
        if self.b().get(self.a().rank1(i)) {
            return 0;
        }
        let j = self.mate(i) + 1;
        if j > total {
            0
        } else {
            j
        }
    }

    /// Previous edge processed at the same vertex; 0 when `i` is its first.
    pub fn prev(&self, i: usize) -> usize {
        self.check_pos(i);
        if i == 1 {
            return 0;
        }
        if !self.a().get(i - 1) {
            return i - 1;
        }
        if self.b().get(self.a().rank1(i - 1)) {
            self.mate(i - 1)
        } else {
            0
        }
    }

    /// The other processing of the same edge.
    pub fn mate(&self, i: usize) -> usize {
        self.check_pos(i);
        if self.a().get(i) {
            self.a()
                .select1(self.b().match_pos(self.a().rank1(i)))
        } else {
            self.a()
                .select0(self.bstar().match_pos(self.a().rank0(i)))
        }
    }

    /// The vertex being visited at step `i`.
    pub fn vertex(&self, i: usize) -> usize {
        self.check_pos(i);
        let t = self.a().rank1(i);
        if !self.a().get(i) {
            // Before any tree processing we are still at the root.
            if t == 0 || !self.b().get(t) {
                self.b().rank0(t) + 1
            } else {
                self.b().parent(self.b().rank0(self.b().match_pos(t))) + 1
            }
        } else if !self.b().get(t) {
            self.b().parent(self.b().rank0(t)) + 1
        } else {
            self.b().rank0(self.b().match_pos(t)) + 1
        }
    }

    /// Incidence count of `v`, self-loops counted twice. Uses the degree
    /// index when one is attached and covers `v`.
    pub fn degree(&self, v: usize) -> usize {
        self.check_vertex(v);
        if let Some(di) = &self.degree_index {
            if di.is_marked(v) {
                return di.degree(v);
            }
        }
        self.degree_slow(v)
    }

    /// Degree by walking the processing chain of `v`.
    pub fn degree_slow(&self, v: usize) -> usize {
        self.check_vertex(v);
        let mut d = 0;
        let mut i = self.first(v);
        while i != 0 {
            d += 1;
            i = self.next(i);
        }
        d
    }

    /// Neighbours of `v` in rotation order.
    pub fn listing(&self, v: usize, order: Order) -> Vec<usize> {
        self.check_vertex(v);
        let mut out = Vec::new();
        match order {
            Order::Ccw => {
                let mut i = self.first(v);
                while i != 0 {
                    out.push(self.vertex(self.mate(i)));
                    i = self.next(i);
                }
            }
            Order::Cw => {
                let mut i = self.last(v);
                while i != 0 {
                    out.push(self.vertex(self.mate(i)));
                    i = self.prev(i);
                }
            }
        }
        out
    }

    /// Next processing at the same vertex, wrapping past the last one.
    pub fn cyc_next(&self, i: usize) -> usize {
        let j = self.next(i);
        if j != 0 {
            j
        } else {
            self.first(self.vertex(i))
        }
    }

    /// Previous processing at the same vertex, wrapping past the first.
    pub fn cyc_prev(&self, i: usize) -> usize {
        let j = self.prev(i);
        if j != 0 {
            j
        } else {
            self.last(self.vertex(i))
        }
    }

    /// Vertices around the face containing edge position `e`. `Cw` walks
    /// the face in clockwise order; `Ccw` yields the reverse walk.
    pub fn face(&self, e: usize, order: Order) -> Vec<usize> {
        self.check_pos(e);
        let mut out = Vec::new();
        let mut j = e;
        loop {
            let mt = self.mate(j);
            out.push(self.vertex(mt));
            j = match order {
                Order::Cw => self.cyc_next(mt),
                Order::Ccw => self.mate(self.cyc_prev(j)),
            };
            if j == e {
                return out;
            }
        }
    }

    /// Face successor of a slot position: the next edge along its face,
    /// clockwise. Orbits of this map partition `1..=2m` into the faces.
    pub fn face_next(&self, i: usize) -> usize {
        self.cyc_next(self.mate(i))
    }

    /// Whether `u` and `v` share an edge; `neighbour(v, v)` tests for a
    /// self-loop. The two processing chains are walked in interleaved
    /// form, so the cost is the smaller of the two degrees; with an
    /// attached neighbour index, heavy pairs short-circuit through the
    /// contracted graph.
    pub fn neighbour(&self, u: usize, v: usize) -> bool {
        self.check_vertex(u);
        self.check_vertex(v);
        if self.m() == 0 {
            return false;
        }
        if let Some(ni) = &self.neighbour_index {
            if u != v {
                match (ni.is_marked(u), ni.is_marked(v)) {
                    (true, true) => return ni.adjacent(u, v),
                    (true, false) => return self.scan_adjacent(v, u),
                    (false, true) => return self.scan_adjacent(u, v),
                    (false, false) => {
                        let (small, big) = if self.degree(u) <= self.degree(v) {
                            (u, v)
                        } else {
                            (v, u)
                        };
                        return self.scan_adjacent(small, big);
                    }
                }
            }
        }
        if u == v {
            return self.scan_adjacent(u, u);
        }
        let mut iu = self.first(u);
        let mut iv = self.first(v);
        loop {
            if iu == 0 || iv == 0 {
                return false;
            }
            if self.vertex(self.mate(iu)) == v {
                return true;
            }
            iu = self.next(iu);
            if self.vertex(self.mate(iv)) == u {
                return true;
            }
            iv = self.next(iv);
        }
    }

    fn scan_adjacent(&self, from: usize, target: usize) -> bool {
        let mut i = self.first(from);
        while i != 0 {
            if self.vertex(self.mate(i)) == target {
                return true;
            }
            i = self.next(i);
        }
        false
    }

    /// Depth-first visit order from `start`, neighbours explored
    /// counter-clockwise.
    pub fn dfs(&self, start: usize) -> Vec<usize> {
        self.check_vertex(start);
        let n = self.n();
        let mut seen = vec![false; n + 1];
        let mut order = Vec::with_capacity(n);
        let mut stack = vec![start];
        seen[start] = true;
        while let Some(v) = stack.pop() {
            order.push(v);
            let base = stack.len();
            let mut i = self.first(v);
            while i != 0 {
                let w = self.vertex(self.mate(i));
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
                i = self.next(i);
            }
            stack[base..].reverse();
        }
        order
    }

    /// Rebuilds the rotation system the structure encodes, with vertices
    /// named by preorder rank and each rotation listed in processing
    /// order, the root's starting at the overall first processed slot.
    pub fn recover_embedding(&self) -> RotationSystem {
        let n = self.n();
        let m = self.m();
        let total = 2 * m;
        let mut edge_id = vec![0u32; total + 1];
        let mut edges = Vec::with_capacity(m);
        for i in 1..=total {
            if edge_id[i] == 0 {
                let j = self.mate(i);
                edges.push((self.vertex(i) as u32, self.vertex(j) as u32));
                let id = edges.len() as u32;
                edge_id[i] = id;
                edge_id[j] = id;
            }
        }
        let mut rotations = vec![Vec::new(); n];
        for v in 1..=n {
            let mut i = self.first(v);
            while i != 0 {
                rotations[v - 1].push(edge_id[i]);
                i = self.next(i);
            }
        }
        RotationSystem::from_parts(n, edges, rotations, 1)
            .expect("a valid structure recovers a valid rotation system")
    }

    /// Parent slot of each vertex in `recover_embedding`'s slot
    /// numbering: the closing processing of the parent edge is the last
    /// slot in each rotation. Feeding these back through a spanning tree
    /// reproduces the structure bit for bit.
    pub fn implied_parent_slots(&self) -> Vec<u32> {
        let mut parents = vec![0u32; self.n() + 1];
        let mut slot = 0u32;
        for v in 1..=self.n() {
            let mut i = self.first(v);
            while i != 0 {
                slot += 1;
                i = self.next(i);
            }
            if v != 1 {
                parents[v] = slot;
            }
        }
        parents
    }
}
