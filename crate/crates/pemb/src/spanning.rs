//! Spanning trees over a rotation system, in the adjacency form the
//! builders consume: tree arcs grouped by source vertex, each non-root
//! vertex listing its parent arc first and then child arcs ccw after it.
//! C[j] counts the non-tree slots cyclically following arc j's slot at its
//! source, so every non-tree slot is charged to exactly one tree arc and
//! sum(C) = 2m - 2(n-1).

use crate::error::{Error, Result};
use crate::rotation::RotationSystem;
use std::sync::atomic::{AtomicU32, Ordering};

#[derive(Clone, Debug)]
pub struct SpanningTree {
    root: usize,
    /// parent[v] = slot at v on the edge toward its parent; 0 for the root.
    parent: Vec<u32>,
    /// Entry range per vertex, 1-based into the arrays below.
    t_first: Vec<u32>,
    t_last: Vec<u32>,
    tgt: Vec<u32>,
    mat: Vec<u32>,
    /// Slot in the rotation system for each tree arc.
    refs: Vec<u32>,
    c: Vec<u32>,
    /// Non-tree slots strictly before the root's first tree slot.
    lead: u32,
    is_tree: Vec<bool>,
}

impl SpanningTree {
    /// Builds the adjacency form from parent slots, validating that they
    /// describe a spanning tree of `g` rooted at `g.root()`.
    pub fn from_parent_slots(g: &RotationSystem, parent: Vec<u32>) -> Result<SpanningTree> {
        let n = g.n();
        let root = g.root();
        if parent.len() != n + 1 {
            return Err(Error::Inconsistent("parent array length mismatch".into()));
        }
        if parent[root] != 0 {
            return Err(Error::Inconsistent("root must have no parent".into()));
        }
        let mut is_tree = vec![false; 2 * g.m() + 1];
        for v in 1..=n {
            if v == root {
                continue;
            }
            let s = parent[v] as usize;
            if s == 0 || s > 2 * g.m() || g.src(s) != v {
                return Err(Error::Inconsistent(format!("vertex {v}: bad parent slot {s}")));
            }
            if g.src(g.mate(s)) == v {
                return Err(Error::Inconsistent(format!("vertex {v}: self-loop as tree edge")));
            }
            is_tree[s] = true;
            is_tree[g.mate(s)] = true;
        }
        // Climb with memoized depths; a cycle never reaches the root.
        let mut depth = vec![u32::MAX; n + 1];
        depth[root] = 0;
        let mut path = Vec::new();
        for v in 1..=n {
            let mut u = v;
            while depth[u] == u32::MAX {
                path.push(u);
                u = g.src(g.mate(parent[u] as usize));
                if path.len() > n {
                    return Err(Error::Inconsistent("parent references contain a cycle".into()));
                }
            }
            let mut d = depth[u];
            while let Some(w) = path.pop() {
                d += 1;
                depth[w] = d;
            }
        }

        let mut t_first = vec![0u32; n + 1];
        let mut t_last = vec![0u32; n + 1];
        let mut entries = 0u32;
        for v in 1..=n {
            t_first[v] = entries + 1;
            let deg_t = g
                .slots(v)
                .filter(|&s| is_tree[s])
                .count() as u32;
            entries += deg_t;
            t_last[v] = entries;
        }
        if entries as usize != 2 * (n - 1) {
            return Err(Error::Inconsistent(format!(
                "tree has {} arc entries, expected {}",
                entries,
                2 * (n - 1)
            )));
        }

        let total = entries as usize;
        let mut tgt = vec![0u32; total + 1];
        let mut refs = vec![0u32; total + 1];
        let mut c = vec![0u32; total + 1];
        let mut entry_of_slot = vec![0u32; 2 * g.m() + 1];
        let mut lead = 0u32;
        let mut root_anchor = 0usize;
        for s in g.slots(root) {
            if is_tree[s] {
                root_anchor = s;
                break;
            }
            lead += 1;
        }
        for v in 1..=n {
            if t_first[v] > t_last[v] {
                continue;
            }
            let anchor = if v == root { root_anchor } else { parent[v] as usize };
            let mut j = t_first[v];
            let mut s = anchor;
            loop {
                tgt[j as usize] = g.src(g.mate(s)) as u32;
                refs[j as usize] = s as u32;
                entry_of_slot[s] = j;
                let mut gap = 0u32;
                let mut t = g.rot_next(s);
                while !is_tree[t] {
                    gap += 1;
                    t = g.rot_next(t);
                }
                c[j as usize] = gap;
                s = t;
                j += 1;
                if s == anchor {
                    break;
                }
            }
            debug_assert_eq!(j, t_last[v] + 1);
        }
        let mut mat = vec![0u32; total + 1];
        for j in 1..=total {
            mat[j] = entry_of_slot[g.mate(refs[j] as usize)];
        }

        Ok(SpanningTree {
            root,
            parent,
            t_first,
            t_last,
            tgt,
            mat,
            refs,
            c,
            lead,
            is_tree,
        })
    }

    pub fn root(&self) -> usize {
        self.root
    }

    /// Number of directed tree arcs, 2(n-1).
    pub fn len(&self) -> usize {
        self.tgt.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn parent_slot(&self, v: usize) -> usize {
        self.parent[v] as usize
    }

    #[inline]
    pub fn is_tree_slot(&self, s: usize) -> bool {
        self.is_tree[s]
    }

    /// Slot count of the rotation system this tree was built against.
    pub fn slot_span(&self) -> usize {
        self.is_tree.len() - 1
    }

    pub fn entries(&self, v: usize) -> std::ops::RangeInclusive<usize> {
        self.t_first[v] as usize..=self.t_last[v] as usize
    }

    pub fn t_first(&self, v: usize) -> usize {
        self.t_first[v] as usize
    }

    pub fn t_last(&self, v: usize) -> usize {
        self.t_last[v] as usize
    }

    #[inline]
    pub fn tgt(&self, j: usize) -> usize {
        self.tgt[j] as usize
    }

    #[inline]
    pub fn mat(&self, j: usize) -> usize {
        self.mat[j] as usize
    }

    /// E_G slot of tree arc `j`.
    #[inline]
    pub fn refs(&self, j: usize) -> usize {
        self.refs[j] as usize
    }

    #[inline]
    pub fn c(&self, j: usize) -> usize {
        self.c[j] as usize
    }

    pub fn lead(&self) -> usize {
        self.lead as usize
    }

    pub fn c_sum(&self) -> usize {
        self.c.iter().map(|&x| x as usize).sum()
    }

    /// Undirected tree edges as (child, parent) pairs, for tests.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for v in 1..self.parent.len() {
            if v != self.root {
                let j = self.t_first[v] as usize;
                out.push((v, self.tgt[j] as usize));
            }
        }
        out
    }
}

/// Depth-first spanning tree: from the root's first slot, scan each
/// vertex's rotation ccw (continuing just after the arrival arc) and take
/// every edge that reaches an unvisited vertex.
pub fn spanning_tree_dfs(g: &RotationSystem) -> Result<SpanningTree> {
    let n = g.n();
    let root = g.root();
    let mut parent = vec![0u32; n + 1];
    let mut visited = vec![false; n + 1];
    visited[root] = true;
    // (current slot, slots left to scan at this vertex)
    let mut stack: Vec<(usize, usize)> = Vec::new();
    if g.m() > 0 && n > 1 {
        stack.push((g.first_slot(root), g.deg(root)));
    }
    loop {
        let Some(top) = stack.last_mut() else { break };
        if top.1 == 0 {
            stack.pop();
            continue;
        }
        let cur = top.0;
        top.0 = g.rot_next(cur);
        top.1 -= 1;
        let back = g.mate(cur);
        let w = g.src(back);
        if !visited[w] {
            visited[w] = true;
            parent[w] = back as u32;
            stack.push((g.rot_next(back), g.deg(w) - 1));
        }
    }
    SpanningTree::from_parent_slots(g, parent)
}

/// Stub-tree parallel spanning tree. A short sequential phase claims a few
/// vertices; their unexplored arcs seed fork-join workers that race to
/// claim the rest through compare-and-swap on the parent array. Different
/// schedules may return different trees; every outcome is a valid spanning
/// tree. Workers re-split their stacks above an O(m/threads) threshold.
pub fn spanning_tree_parallel(g: &RotationSystem, threads: usize) -> Result<SpanningTree> {
    let n = g.n();
    let root = g.root();
    let threads = threads.max(1);
    if n == 1 || threads == 1 {
        return spanning_tree_dfs(g);
    }

    // Claimed vertices carry their parent slot; the root holds a sentinel.
    let claim: Vec<AtomicU32> = (0..=n).map(|_| AtomicU32::new(0)).collect();
    claim[root].store(u32::MAX, Ordering::Relaxed);

    // Sequential stub: BFS until there is enough seed work to go around.
    let mut seeds: Vec<usize> = vec![root];
    let mut frontier = vec![root];
    while seeds.len() < 4 * threads && !frontier.is_empty() {
        let mut next = Vec::new();
        for &v in &frontier {
            for s in g.slots(v) {
                let w = g.src(g.mate(s));
                if claim[w]
                    .compare_exchange(0, g.mate(s) as u32, Ordering::Relaxed, Ordering::Relaxed)
                    .is_ok()
                {
                    seeds.push(w);
                    next.push(w);
                }
            }
        }
        if next.is_empty() {
            break;
        }
        frontier = next;
    }

    let threshold = (g.m() / threads).max(64);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Structural(format!("thread pool: {e}")))?;
    pool.scope(|scope| {
        fn work<'a>(
            g: &'a RotationSystem,
            claim: &'a [AtomicU32],
            mut stack: Vec<usize>,
            threshold: usize,
            scope: &rayon::Scope<'a>,
        ) {
            while let Some(v) = stack.pop() {
                for s in g.slots(v) {
                    let w = g.src(g.mate(s));
                    if claim[w]
                        .compare_exchange(0, g.mate(s) as u32, Ordering::Relaxed, Ordering::Relaxed)
                        .is_ok()
                    {
                        stack.push(w);
                    }
                }
                if stack.len() > threshold {
                    let donated = stack.split_off(stack.len() / 2);
                    scope.spawn(move |scope| work(g, claim, donated, threshold, scope));
                }
            }
        }
        let claim = &claim;
        for chunk in seeds.chunks(seeds.len().div_ceil(threads)) {
            let stack = chunk.to_vec();
            scope.spawn(move |scope| work(g, claim, stack, threshold, scope));
        }
    });

    let mut parent = vec![0u32; n + 1];
    for v in 1..=n {
        let p = claim[v].load(Ordering::Relaxed);
        if p == 0 {
            return Err(Error::Structural(format!("vertex {v} never claimed")));
        }
        parent[v] = if v == root { 0 } else { p };
    }
    SpanningTree::from_parent_slots(g, parent)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::{cycle, decorate, grid, stacked};

    fn fig1() -> RotationSystem {
        RotationSystem::load_pg(include_str!("../tests/data/fig1.pg")).unwrap()
    }

    fn sorted_edges(t: &SpanningTree) -> Vec<(usize, usize)> {
        let mut e: Vec<(usize, usize)> = t
            .edges()
            .into_iter()
            .map(|(a, b)| (a.min(b), a.max(b)))
            .collect();
        e.sort();
        e
    }

    #[test]
    fn k3_dfs() {
        let rs = RotationSystem::from_parts(
            3,
            vec![(1, 2), (2, 3), (1, 3)],
            vec![vec![1, 3], vec![2, 1], vec![3, 2]],
            1,
        )
        .unwrap();
        let t = spanning_tree_dfs(&rs).unwrap();
        assert_eq!(sorted_edges(&t), vec![(1, 2), (2, 3)]);
        assert_eq!(t.c_sum(), 2);
        assert_eq!(t.lead(), 0);
        assert_eq!(t.len(), 4);
        for j in 1..=t.len() {
            assert_eq!(t.mat(t.mat(j)), j);
        }
    }

    #[test]
    fn tree_input_gives_zero_c() {
        // Path 1-2-3-4 as a rotation system.
        let rs = RotationSystem::from_parts(
            4,
            vec![(1, 2), (2, 3), (3, 4)],
            vec![vec![1], vec![1, 2], vec![2, 3], vec![3]],
            1,
        )
        .unwrap();
        let t = spanning_tree_dfs(&rs).unwrap();
        assert_eq!(t.c_sum(), 0);
        assert_eq!(t.lead(), 0);
        assert_eq!(sorted_edges(&t), vec![(1, 2), (2, 3), (3, 4)]);
    }

    #[test]
    fn fig1_dfs_tree() {
        // First-encounter ccw DFS from the root's first slot: (1,3) leads
        // the rotation, so the tree hugs that side of the graph.
        let t = spanning_tree_dfs(&fig1()).unwrap();
        assert_eq!(
            sorted_edges(&t),
            vec![(1, 3), (2, 3), (2, 4), (4, 8), (5, 6), (5, 7), (7, 8)]
        );
        assert_eq!(t.c_sum(), 2 * 14 - 2 * 7);
    }

    #[test]
    fn fig1_injected_tree() {
        // The tree from the original figure: parent slots per vertex.
        let rs = fig1();
        let parent = vec![0u32, 0, 7, 11, 13, 15, 18, 21, 25];
        let t = SpanningTree::from_parent_slots(&rs, parent).unwrap();
        assert_eq!(
            sorted_edges(&t),
            vec![(1, 2), (1, 5), (1, 7), (2, 3), (2, 4), (5, 6), (7, 8)]
        );
        assert_eq!(t.c_sum(), 14);
        assert_eq!(t.lead(), 1);
        // Root entries: slots 2, 3, 4 in rotation order.
        assert_eq!(t.entries(1), 1..=3);
        assert_eq!(t.refs(1), 2);
        assert_eq!(t.refs(2), 3);
        assert_eq!(t.refs(3), 4);
        // v7: parent arc first (slot 21), then the child arc (slot 23).
        assert_eq!(t.refs(t.t_first(7)), 21);
        assert_eq!(t.refs(t.t_last(7)), 23);
        // C around the root: slot 2 -> slot 3 adjacent, slot 4 wraps over
        // the two loop slots and the leading (1,3) slot.
        assert_eq!(t.c(1), 0);
        assert_eq!(t.c(2), 0);
        assert_eq!(t.c(3), 3);
    }

    #[test]
    fn rejects_broken_parents() {
        let rs = fig1();
        // Slot 1 is (1,3) seen from vertex 1, not from vertex 2.
        let bad = vec![0u32, 0, 1, 11, 13, 15, 18, 21, 25];
        assert!(SpanningTree::from_parent_slots(&rs, bad).is_err());
        // Two vertices pointing at each other is a cycle.
        let rs2 = cycle(4).unwrap();
        let cyc = vec![0u32, 0, 3, 6, 7];
        assert!(SpanningTree::from_parent_slots(&rs2, cyc).is_err());
    }

    #[test]
    fn parallel_matches_invariants() {
        for threads in [1, 2, 4, 8] {
            for rs in [grid(9, 7).unwrap(), stacked(150, 21).unwrap(), cycle(40).unwrap()] {
                let t = spanning_tree_parallel(&rs, threads).unwrap();
                assert_eq!(t.len(), 2 * (rs.n() - 1), "threads={threads}");
                assert_eq!(t.c_sum(), 2 * rs.m() - 2 * (rs.n() - 1));
            }
        }
    }

    #[test]
    fn parallel_single_thread_deterministic() {
        let rs = stacked(300, 9).unwrap();
        let a = spanning_tree_parallel(&rs, 1).unwrap();
        let b = spanning_tree_parallel(&rs, 1).unwrap();
        assert_eq!(a.parent, b.parent);
        let d = spanning_tree_dfs(&rs).unwrap();
        assert_eq!(a.parent, d.parent);
    }

    #[test]
    fn decorated_graphs_have_trees() {
        let base = stacked(60, 4).unwrap();
        let rs = decorate(&base, 5, 6, 2).unwrap();
        let t = spanning_tree_dfs(&rs).unwrap();
        assert_eq!(t.c_sum(), 2 * rs.m() - 2 * (rs.n() - 1));
        for (u, v) in t.edges() {
            assert_ne!(u, v, "loop crept into the tree");
        }
        let tp = spanning_tree_parallel(&rs, 4).unwrap();
        assert_eq!(tp.c_sum(), 2 * rs.m() - 2 * (rs.n() - 1));
    }

    #[test]
    fn single_vertex_tree() {
        let rs = RotationSystem::from_parts(1, vec![(1, 1)], vec![vec![1, 1]], 1).unwrap();
        let t = spanning_tree_dfs(&rs).unwrap();
        assert_eq!(t.len(), 0);
        assert_eq!(t.lead(), 2);
        assert_eq!(t.c_sum(), 0);
    }
}
