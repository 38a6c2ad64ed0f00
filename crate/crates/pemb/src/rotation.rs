//! Rotation systems: the input form of a planar embedding. Every vertex owns
//! a contiguous range of slots, one per incident arc, listed in
//! counterclockwise order; the two slots of an edge are mates. A self-loop
//! contributes two slots to its vertex, a parallel edge one slot per
//! endpoint per copy.
//!
//! The `PG1` text format mirrors this directly:
//!
//! ```text
//! PG1 n m root
//! u_1 v_1            (m edge lines)
//! ...
//! d_1 e_11 ... e_1d  (n rotation lines: degree, then edge ids ccw)
//! ...
//! ```
//!
//! The rotation of the root must start at an arc bordering the outer face;
//! generators and the traversal below rely on that convention.

use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct RotationSystem {
    n: usize,
    m: usize,
    root: usize,
    edge_u: Vec<u32>,
    edge_v: Vec<u32>,
    /// Slot arrays are 1-based; index 0 is a sentinel.
    slot_src: Vec<u32>,
    slot_edge: Vec<u32>,
    slot_mate: Vec<u32>,
    first: Vec<u32>,
    last: Vec<u32>,
}

impl RotationSystem {
    /// Assembles and validates a rotation system. `edges[e-1]` are the
    /// endpoints of edge `e`; `rotations[v-1]` lists edge ids around `v` in
    /// ccw order, self-loops appearing twice.
    pub fn from_parts(
        n: usize,
        edges: Vec<(u32, u32)>,
        rotations: Vec<Vec<u32>>,
        root: usize,
    ) -> Result<RotationSystem> {
        let m = edges.len();
        if n == 0 {
            return Err(Error::Validation("graph needs at least one vertex".into()));
        }
        if root < 1 || root > n {
            return Err(Error::Validation(format!("root {root} out of range 1..={n}")));
        }
        if rotations.len() != n {
            return Err(Error::Validation(format!(
                "expected {n} rotation lists, got {}",
                rotations.len()
            )));
        }
        let mut edge_u = Vec::with_capacity(m);
        let mut edge_v = Vec::with_capacity(m);
        for (e, &(u, v)) in edges.iter().enumerate() {
            let (u, v) = (u as usize, v as usize);
            if u < 1 || u > n || v < 1 || v > n {
                return Err(Error::Validation(format!(
                    "edge {} endpoints ({u}, {v}) out of range",
                    e + 1
                )));
            }
            edge_u.push(u as u32);
            edge_v.push(v as u32);
        }

        let total: usize = rotations.iter().map(|r| r.len()).sum();
        if total != 2 * m {
            return Err(Error::Validation(format!(
                "rotation lists hold {total} slots, expected {}",
                2 * m
            )));
        }
        let mut slot_src = vec![0u32; 2 * m + 1];
        let mut slot_edge = vec![0u32; 2 * m + 1];
        let mut slot_mate = vec![0u32; 2 * m + 1];
        let mut first = vec![0u32; n + 1];
        let mut last = vec![0u32; n + 1];
        // First and second slot seen per edge.
        let mut seen = vec![(0u32, 0u32); m + 1];
        let mut s = 0usize;
        for (vi, rot) in rotations.iter().enumerate() {
            let v = vi + 1;
            first[v] = (s + 1) as u32;
            for &e in rot {
                let e = e as usize;
                if e < 1 || e > m {
                    return Err(Error::Validation(format!("edge id {e} out of range at vertex {v}")));
                }
                s += 1;
                slot_src[s] = v as u32;
                slot_edge[s] = e as u32;
                let entry = &mut seen[e];
                if entry.0 == 0 {
                    entry.0 = s as u32;
                } else if entry.1 == 0 {
                    entry.1 = s as u32;
                } else {
                    return Err(Error::Validation(format!("edge {e} appears more than twice")));
                }
            }
            last[v] = s as u32;
        }
        for e in 1..=m {
            let (a, b) = seen[e];
            if b == 0 {
                return Err(Error::Validation(format!("edge {e} appears fewer than twice")));
            }
            let (su, sv) = (slot_src[a as usize], slot_src[b as usize]);
            let (eu, ev) = (edge_u[e - 1], edge_v[e - 1]);
            if !(su == eu && sv == ev || su == ev && sv == eu) {
                return Err(Error::Validation(format!(
                    "edge {e} listed at vertices {su} and {sv}, declared ({eu}, {ev})"
                )));
            }
            slot_mate[a as usize] = b;
            slot_mate[b as usize] = a;
        }

        let rs = RotationSystem {
            n,
            m,
            root,
            edge_u,
            edge_v,
            slot_src,
            slot_edge,
            slot_mate,
            first,
            last,
        };
        rs.check_connected()?;
        Ok(rs)
    }

    fn check_connected(&self) -> Result<()> {
        let mut visited = vec![false; self.n + 1];
        let mut stack = vec![self.root];
        visited[self.root] = true;
        let mut count = 1usize;
        while let Some(v) = stack.pop() {
            for s in self.slots(v) {
                let w = self.src(self.mate(s));
                if !visited[w] {
                    visited[w] = true;
                    count += 1;
                    stack.push(w);
                }
            }
        }
        if count != self.n {
            return Err(Error::Validation(format!(
                "graph not connected: reached {count} of {} vertices",
                self.n
            )));
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn deg(&self, v: usize) -> usize {
        (self.last[v] + 1 - self.first[v]) as usize
    }

    pub fn first_slot(&self, v: usize) -> usize {
        self.first[v] as usize
    }

    pub fn last_slot(&self, v: usize) -> usize {
        self.last[v] as usize
    }

    pub fn slots(&self, v: usize) -> std::ops::RangeInclusive<usize> {
        self.first[v] as usize..=self.last[v] as usize
    }

    #[inline]
    pub fn src(&self, s: usize) -> usize {
        self.slot_src[s] as usize
    }

    #[inline]
    pub fn mate(&self, s: usize) -> usize {
        self.slot_mate[s] as usize
    }

    #[inline]
    pub fn edge_of(&self, s: usize) -> usize {
        self.slot_edge[s] as usize
    }

    pub fn endpoints(&self, e: usize) -> (usize, usize) {
        (self.edge_u[e - 1] as usize, self.edge_v[e - 1] as usize)
    }

    pub fn is_loop(&self, e: usize) -> bool {
        self.edge_u[e - 1] == self.edge_v[e - 1]
    }

    /// Next slot ccw around the slot's vertex, wrapping.
    #[inline]
    pub fn rot_next(&self, s: usize) -> usize {
        let v = self.slot_src[s] as usize;
        if s == self.last[v] as usize {
            self.first[v] as usize
        } else {
            s + 1
        }
    }

    /// Previous slot ccw around the slot's vertex, wrapping.
    #[inline]
    pub fn rot_prev(&self, s: usize) -> usize {
        let v = self.slot_src[s] as usize;
        if s == self.first[v] as usize {
            self.last[v] as usize
        } else {
            s - 1
        }
    }

    /// Number of faces of the embedded graph.
    pub fn face_count(&self) -> usize {
        let mut visited = vec![false; 2 * self.m + 1];
        let mut faces = 0usize;
        for s in 1..=2 * self.m {
            if visited[s] {
                continue;
            }
            faces += 1;
            let mut t = s;
            while !visited[t] {
                visited[t] = true;
                t = self.rot_next(self.mate(t));
            }
        }
        faces
    }

    /// Euler check: a connected rotation system is a planar embedding iff
    /// n - m + f = 2.
    pub fn is_planar_embedding(&self) -> bool {
        if self.m == 0 {
            return self.n == 1;
        }
        self.n as i64 - self.m as i64 + self.face_count() as i64 == 2
    }

    pub fn load_pg(text: &str) -> Result<RotationSystem> {
        let mut tokens = text.split_whitespace();
        let magic = tokens.next().ok_or_else(|| Error::Format("empty input".into()))?;
        if magic != "PG1" {
            return Err(Error::Format(format!("expected PG1 header, found {magic:?}")));
        }
        let mut num = |what: &str| -> Result<usize> {
            tokens
                .next()
                .ok_or_else(|| Error::Format(format!("missing {what}")))?
                .parse::<usize>()
                .map_err(|_| Error::Format(format!("bad {what}")))
        };
        let n = num("vertex count")?;
        let m = num("edge count")?;
        let root = num("root")?;
        let mut edges = Vec::with_capacity(m);
        for e in 1..=m {
            let u = num(&format!("edge {e} endpoint"))?;
            let v = num(&format!("edge {e} endpoint"))?;
            edges.push((u as u32, v as u32));
        }
        let mut rotations = Vec::with_capacity(n);
        for v in 1..=n {
            let d = num(&format!("degree of vertex {v}"))?;
            let mut rot = Vec::with_capacity(d);
            for _ in 0..d {
                rot.push(num(&format!("rotation of vertex {v}"))? as u32);
            }
            rotations.push(rot);
        }
        if tokens.next().is_some() {
            return Err(Error::Format("trailing tokens after rotation lines".into()));
        }
        RotationSystem::from_parts(n, edges, rotations, root)
    }

    pub fn save_pg(&self) -> String {
        use std::fmt::Write;
        let mut out = String::new();
        writeln!(out, "PG1 {} {} {}", self.n, self.m, self.root).unwrap();
        for e in 1..=self.m {
            writeln!(out, "{} {}", self.edge_u[e - 1], self.edge_v[e - 1]).unwrap();
        }
        for v in 1..=self.n {
            write!(out, "{}", self.deg(v)).unwrap();
            for s in self.slots(v) {
                write!(out, " {}", self.slot_edge[s]).unwrap();
            }
            writeln!(out).unwrap();
        }
        out
    }
}
