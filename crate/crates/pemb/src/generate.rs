//! Deterministic planar embedding generators for tests and benchmarks.
//! Every generator produces the same rotation system for the same
//! parameters and seed, on any machine and thread count.

use crate::error::{Error, Result};
use crate::rng::XorShift64;
use crate::rotation::RotationSystem;

/// rows x cols grid. Root is the top-left corner; its rotation starts with
/// the arc along the top boundary, which borders the outer face.
pub fn grid(rows: usize, cols: usize) -> Result<RotationSystem> {
    if rows < 1 || cols < 1 || rows * cols < 2 {
        return Err(Error::Validation("grid needs at least two vertices".into()));
    }
    let id = |r: usize, c: usize| ((r - 1) * cols + c) as u32;
    let mut edges = Vec::new();
    let mut east = vec![0u32; rows * cols + 1];
    let mut south = vec![0u32; rows * cols + 1];
    for r in 1..=rows {
        for c in 1..=cols {
            if c < cols {
                edges.push((id(r, c), id(r, c + 1)));
                east[id(r, c) as usize] = edges.len() as u32;
            }
            if r < rows {
                edges.push((id(r, c), id(r + 1, c)));
                south[id(r, c) as usize] = edges.len() as u32;
            }
        }
    }
    let mut rotations = Vec::with_capacity(rows * cols);
    for r in 1..=rows {
        for c in 1..=cols {
            let v = id(r, c) as usize;
            let mut rot = Vec::with_capacity(4);
            if c < cols {
                rot.push(east[v]);
            }
            if r > 1 {
                rot.push(south[id(r - 1, c) as usize]);
            }
            if c > 1 {
                rot.push(east[id(r, c - 1) as usize]);
            }
            if r < rows {
                rot.push(south[v]);
            }
            rotations.push(rot);
        }
    }
    RotationSystem::from_parts(rows * cols, edges, rotations, 1)
}

/// Cycle on `k` vertices; `cycle(1)` is a single self-loop, `cycle(2)` a
/// double edge.
pub fn cycle(k: usize) -> Result<RotationSystem> {
    if k == 0 {
        return Err(Error::Validation("cycle needs at least one vertex".into()));
    }
    if k == 1 {
        return RotationSystem::from_parts(1, vec![(1, 1)], vec![vec![1, 1]], 1);
    }
    let mut edges = Vec::with_capacity(k);
    for v in 1..=k {
        edges.push((v as u32, if v == k { 1 } else { v as u32 + 1 }));
    }
    let mut rotations = Vec::with_capacity(k);
    for v in 1..=k {
        let prev = if v == 1 { k as u32 } else { v as u32 - 1 };
        rotations.push(vec![prev, v as u32]);
    }
    RotationSystem::from_parts(k, edges, rotations, 1)
}

/// Stacked triangulation: starting from a triangle, repeatedly drop a new
/// vertex into a uniformly random inner face and connect it to the three
/// corners. The outer face stays the initial triangle, so the whole graph
/// is a planar triangulation with m = 3n - 6.
pub fn stacked(n: usize, seed: u64) -> Result<RotationSystem> {
    if n < 3 {
        return Err(Error::Validation("stacked triangulation needs n >= 3".into()));
    }
    let mut rng = XorShift64::new(seed);
    // Half-edge arrays, 0-based; arc h pairs with h ^ 1.
    let mut origin: Vec<u32> = Vec::with_capacity(6 * n);
    let mut fnext: Vec<u32> = Vec::with_capacity(6 * n);
    let mut edges: Vec<(u32, u32)> = Vec::with_capacity(3 * n);
    let push_edge = |origin: &mut Vec<u32>, edges: &mut Vec<(u32, u32)>, u: u32, v: u32| -> u32 {
        let h = origin.len() as u32;
        origin.push(u);
        origin.push(v);
        edges.push((u, v));
        h
    };

    // Initial triangle: inner face 1-2-3, outer face the reverse cycle.
    let h12 = push_edge(&mut origin, &mut edges, 1, 2);
    let h23 = push_edge(&mut origin, &mut edges, 2, 3);
    let h31 = push_edge(&mut origin, &mut edges, 3, 1);
    fnext.resize(6, 0);
    fnext[h12 as usize] = h23;
    fnext[h23 as usize] = h31;
    fnext[h31 as usize] = h12;
    fnext[(h31 ^ 1) as usize] = h23 ^ 1;
    fnext[(h23 ^ 1) as usize] = h12 ^ 1;
    fnext[(h12 ^ 1) as usize] = h31 ^ 1;

    let mut faces: Vec<[u32; 3]> = vec![[h12, h23, h31]];
    for w in 4..=n as u32 {
        let f = rng.below(faces.len());
        let [a, b, c] = faces[f];
        let (x, y, z) = (origin[a as usize], origin[b as usize], origin[c as usize]);
        let wx = push_edge(&mut origin, &mut edges, w, x);
        let wy = push_edge(&mut origin, &mut edges, w, y);
        let wz = push_edge(&mut origin, &mut edges, w, z);
        fnext.resize(origin.len(), 0);
        fnext[a as usize] = wy ^ 1;
        fnext[(wy ^ 1) as usize] = wx;
        fnext[wx as usize] = a;
        fnext[b as usize] = wz ^ 1;
        fnext[(wz ^ 1) as usize] = wy;
        fnext[wy as usize] = b;
        fnext[c as usize] = wx ^ 1;
        fnext[(wx ^ 1) as usize] = wz;
        fnext[wz as usize] = c;
        faces[f] = [a, wy ^ 1, wx];
        faces.push([b, wz ^ 1, wy]);
        faces.push([c, wx ^ 1, wz]);
    }

    // Rotation around v: sigma(h) = fnext(twin(h)) cycles through the arcs
    // leaving v. The root starts at its outer-face arc 1 -> 3.
    let arcs = origin.len();
    let mut start = vec![u32::MAX; n + 1];
    for h in 0..arcs as u32 {
        let v = origin[h as usize] as usize;
        if start[v] == u32::MAX {
            start[v] = h;
        }
    }
    start[1] = h31 ^ 1;
    let mut rotations = Vec::with_capacity(n);
    for v in 1..=n {
        let s = start[v];
        let mut rot = Vec::new();
        let mut h = s;
        loop {
            rot.push(h / 2 + 1);
            h = fnext[(h ^ 1) as usize];
            if h == s {
                break;
            }
        }
        rotations.push(rot);
    }
    RotationSystem::from_parts(n, edges, rotations, 1)
}

/// Adds `loops` self-loops and `multi` parallel copies of existing edges at
/// seeded random spots, keeping the embedding planar and the root's first
/// slot untouched.
pub fn decorate(rs: &RotationSystem, loops: usize, multi: usize, seed: u64) -> Result<RotationSystem> {
    let n = rs.n();
    let root = rs.root();
    let mut rng = XorShift64::new(seed);
    let mut edges: Vec<(u32, u32)> = (1..=rs.m()).map(|e| {
        let (u, v) = rs.endpoints(e);
        (u as u32, v as u32)
    }).collect();
    let mut rotations: Vec<Vec<u32>> = (1..=n)
        .map(|v| rs.slots(v).map(|s| rs.edge_of(s) as u32).collect())
        .collect();

    for _ in 0..loops {
        let v = rng.below(n) + 1;
        let deg = rotations[v - 1].len();
        let pos = if deg == 0 {
            0
        } else if v == root {
            1 + rng.below(deg)
        } else {
            rng.below(deg + 1)
        };
        let e = (edges.len() + 1) as u32;
        edges.push((v as u32, v as u32));
        rotations[v - 1].insert(pos, e);
        rotations[v - 1].insert(pos, e);
    }

    let plain: Vec<u32> = (1..=edges.len() as u32).filter(|&e| {
        let (u, v) = edges[e as usize - 1];
        u != v
    }).collect();
    for _ in 0..multi {
        if plain.is_empty() {
            break;
        }
        let e = plain[rng.below(plain.len())];
        let (u, v) = edges[e as usize - 1];
        let (u, v) = (u as usize, v as usize);
        let iu = rotations[u - 1].iter().position(|&x| x == e).unwrap();
        let iv = rotations[v - 1].iter().position(|&x| x == e).unwrap();
        let copy = (edges.len() + 1) as u32;
        edges.push((u as u32, v as u32));
        if v == root && iv == 0 {
            rotations[u - 1].insert(iu, copy);
            rotations[v - 1].insert(iv + 1, copy);
        } else {
            rotations[u - 1].insert(iu + 1, copy);
            rotations[v - 1].insert(iv, copy);
        }
    }
    RotationSystem::from_parts(n, edges, rotations, root)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids_are_planar() {
        for (r, c) in [(1, 2), (2, 2), (1, 9), (3, 4), (7, 5), (20, 20)] {
            let rs = grid(r, c).unwrap();
            assert_eq!(rs.n(), r * c);
            assert_eq!(rs.m(), r * (c - 1) + (r - 1) * c);
            assert!(rs.is_planar_embedding(), "grid {r}x{c}");
            assert_eq!(rs.face_count(), (r - 1) * (c - 1) + 1);
        }
        assert!(grid(1, 1).is_err());
    }

    #[test]
    fn cycles_are_planar() {
        for k in [1usize, 2, 3, 4, 10, 101] {
            let rs = cycle(k).unwrap();
            assert_eq!(rs.n(), k);
            assert_eq!(rs.m(), k);
            assert_eq!(rs.face_count(), 2);
            assert!(rs.is_planar_embedding(), "cycle {k}");
        }
    }

    #[test]
    fn stacked_is_triangulation() {
        for n in [3usize, 4, 5, 10, 50, 400] {
            let rs = stacked(n, 11).unwrap();
            assert_eq!(rs.n(), n);
            assert_eq!(rs.m(), 3 * n - 6);
            assert!(rs.is_planar_embedding(), "stacked {n}");
            assert_eq!(rs.face_count(), 2 * n - 4);
        }
    }

    #[test]
    fn stacked_deterministic() {
        let a = stacked(200, 5).unwrap().save_pg();
        let b = stacked(200, 5).unwrap().save_pg();
        let c = stacked(200, 6).unwrap().save_pg();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn decorated_stays_planar() {
        let base = stacked(40, 3).unwrap();
        let rs = decorate(&base, 7, 9, 13).unwrap();
        assert_eq!(rs.m(), base.m() + 16);
        assert!(rs.is_planar_embedding());
        // Root's first arc is the same edge as before.
        assert_eq!(rs.edge_of(1), base.edge_of(1));

        let tiny = RotationSystem::from_parts(1, vec![], vec![vec![]], 1).unwrap();
        let dec = decorate(&tiny, 3, 2, 1).unwrap();
        assert_eq!(dec.m(), 3);
        assert!(dec.is_planar_embedding());
    }

    #[test]
    fn decorate_deterministic() {
        let base = grid(4, 4).unwrap();
        let a = decorate(&base, 3, 3, 77).unwrap().save_pg();
        let b = decorate(&base, 3, 3, 77).unwrap().save_pg();
        assert_eq!(a, b);
    }
}
