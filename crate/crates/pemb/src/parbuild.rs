//! Fork-join construction of the compact embedding.
//!
//! The processing order is never walked sequentially here. Each tree arc
//! becomes one entry of a successor chain built independently per arc;
//! list ranking turns per-arc weights into tour positions; from those
//! every bit of A, B and B* is a scatter into a known slot. Seven
//! barriers separate the phases, every parallel loop writes disjoint
//! indices, and the output is bit-identical to `build_sequential` for
//! any thread count. The only nondeterminism in the whole pipeline lives
//! upstream, in `spanning_tree_parallel`.

pub mod ranking;

pub use ranking::{list_ranking, prefix_sum_exclusive, prefix_sum_inclusive, EulerEntry};

use std::sync::atomic::{AtomicBool, AtomicU32, AtomicU64, AtomicUsize, Ordering};

use rayon::prelude::*;

use crate::bits::BitVector;
use crate::embedding::{check_tree, PembStructure};
use crate::error::{Error, Result};
use crate::parens::BalancedParens;
use crate::rotation::RotationSystem;
use crate::spanning::SpanningTree;

const GRAIN: usize = 4096;

/// Instrumentation for the work and memory budgets: how many array
/// elements the pipeline touched and how many words of scratch it
/// allocated beyond the output. Both stay linear in m for every thread
/// count.
#[derive(Debug, Clone, Copy)]
pub struct WorkStats {
    pub element_touches: usize,
    pub aux_words: usize,
}

/// Worker count actually used: an explicit request wins, otherwise the
/// PEMB_THREADS variable, otherwise the machine.
pub fn worker_threads(requested: usize) -> usize {
    if requested > 0 {
        return requested;
    }
    if let Ok(s) = std::env::var("PEMB_THREADS") {
        if let Ok(k) = s.trim().parse::<usize>() {
            if k > 0 {
                return k;
            }
        }
    }
    std::thread::available_parallelism().map(|p| p.get()).unwrap_or(1)
}

fn pool(threads: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Structural(format!("thread pool: {e}")))
}

pub fn par_build(g: &RotationSystem, t: &SpanningTree, threads: usize) -> Result<PembStructure> {
    par_build_counted(g, t, threads).map(|(s, _)| s)
}

pub fn par_build_counted(
    g: &RotationSystem,
    t: &SpanningTree,
    threads: usize,
) -> Result<(PembStructure, WorkStats)> {
    check_tree(g, t)?;
    let workers = worker_threads(threads);
    pool(workers)?.install(|| par_build_inner(g, t, workers))
}

/// Builds the rank/select and parenthesis directories on a pool of the
/// given size; the directories equal the sequentially built ones.
pub fn par_build_directories(
    a_words: Vec<u64>,
    a_len: usize,
    b_words: Vec<u64>,
    b_len: usize,
    bstar_words: Vec<u64>,
    bstar_len: usize,
    threads: usize,
) -> Result<(BitVector, BalancedParens, BalancedParens)> {
    pool(worker_threads(threads))?
        .install(|| directories(a_words, a_len, b_words, b_len, bstar_words, bstar_len))
}

fn directories(
    a_words: Vec<u64>,
    a_len: usize,
    b_words: Vec<u64>,
    b_len: usize,
    bstar_words: Vec<u64>,
    bstar_len: usize,
) -> Result<(BitVector, BalancedParens, BalancedParens)> {
    let a = BitVector::from_words_par(a_words, a_len);
    let b = BalancedParens::new_par(BitVector::from_words_par(b_words, b_len))?;
    let bstar = BalancedParens::new_par(BitVector::from_words_par(bstar_words, bstar_len))?;
    Ok((a, b, bstar))
}

fn par_build_inner(
    g: &RotationSystem,
    t: &SpanningTree,
    workers: usize,
) -> Result<(PembStructure, WorkStats)> {
    let n = g.n();
    let m = g.m();
    let total = 2 * m;
    let tree_bits = t.len();
    let bstar_len = total - tree_bits;
    let touches = AtomicUsize::new(0);
    let mut aux_words = 0usize;

    // Phase 1: wire the Euler chain, one entry per tree arc.
    let (mut entries, head) = wire_entries(t);
    aux_words += 3 * entries.len();
    touches.fetch_add(tree_bits, Ordering::Relaxed);

    // Phase 2: rank the chain.
    let cost = ranking::list_ranking_counted(&mut entries, head, workers)?;
    touches.fetch_add(cost.touches, Ordering::Relaxed);
    aux_words += cost.aux_words;

    // Phase 3: scatter A and B.
    let entries = entries;
    if let Some(bad) = entries[1..]
        .par_iter()
        .with_min_len(GRAIN)
        .position_any(|e| {
            e.rank_a == 0
                || e.rank_a > total as u64
                || e.rank_b == 0
                || e.rank_b > tree_bits as u64
        })
    {
        return Err(Error::Inconsistent(format!(
            "tour rank out of range at arc {}",
            bad + 1
        )));
    }
    let a_atomic: Vec<AtomicU64> = (0..total.div_ceil(64)).map(|_| AtomicU64::new(0)).collect();
    let b_atomic: Vec<AtomicU64> = (0..tree_bits.div_ceil(64))
        .map(|_| AtomicU64::new(0))
        .collect();
    aux_words += a_atomic.len() + b_atomic.len();
    entries[1..].par_iter().with_min_len(GRAIN).for_each(|e| {
        let pa = e.rank_a as usize - 1;
        a_atomic[pa / 64].fetch_or(1 << (pa % 64), Ordering::Relaxed);
        if e.value {
            let pb = e.rank_b as usize - 1;
            b_atomic[pb / 64].fetch_or(1 << (pb % 64), Ordering::Relaxed);
        }
    });
    touches.fetch_add(tree_bits, Ordering::Relaxed);

    // Phases 4 and 5: place every non-tree slot in B* and orient it.
    let d_pos: Vec<AtomicU32> = (0..=total).map(|_| AtomicU32::new(0)).collect();
    let d_edge: Vec<AtomicU32> = (0..=bstar_len).map(|_| AtomicU32::new(0)).collect();
    aux_words += (d_pos.len() + d_edge.len() + 1) / 2;
    fill_dual_maps(g, t, &entries, &d_pos, &d_edge, &touches);
    let bstar_words = orient_bstar(g, &d_pos, &d_edge, bstar_len, &touches)?;
    drop(d_pos);
    drop(d_edge);
    drop(entries);

    // Phases 6 and 7: strip the atomics and build the directories.
    let a_words: Vec<u64> = a_atomic.into_iter().map(|w| w.into_inner()).collect();
    let b_words: Vec<u64> = b_atomic.into_iter().map(|w| w.into_inner()).collect();
    let (a, b, bstar) = directories(a_words, total, b_words, tree_bits, bstar_words, bstar_len)?;
    let structure = PembStructure::from_parts(n, m, a, b, bstar)?;
    Ok((
        structure,
        WorkStats {
            element_touches: touches.into_inner(),
            aux_words,
        },
    ))
}

/// Entry j covers the processing of tree arc j: its B bit, the next arc
/// in the tour, and as weights the count of A positions it accounts for
/// (itself plus the non-tree slots walked just before it).
fn wire_entries(t: &SpanningTree) -> (Vec<EulerEntry>, usize) {
    let total = t.len();
    if total == 0 {
        return (vec![EulerEntry::default()], 0);
    }
    let root = t.root();
    let head = t.t_first(root);
    let lead = t.lead() as u64;
    let entries: Vec<EulerEntry> = (0..total + 1)
        .into_par_iter()
        .with_min_len(GRAIN)
        .map(|j| {
            if j == 0 {
                return EulerEntry::default();
            }
            let src = t.tgt(t.mat(j));
            let tgt = t.tgt(j);
            let mj = t.mat(j);
            let succ = if tgt == root && mj == t.t_last(root) {
                0
            } else if mj == t.t_last(tgt) {
                t.t_first(tgt) as u32
            } else {
                mj as u32 + 1
            };
            let weight_a = if j == head {
                lead + 1
            } else {
                let prev = if j > t.t_first(src) { j - 1 } else { t.t_last(src) };
                t.c(prev) as u64 + 1
            };
            EulerEntry {
                value: src != root && j == t.t_first(src),
                succ,
                rank_a: weight_a,
                rank_b: 1,
            }
        })
        .collect();
    (entries, head)
}

/// After arc j the tour walks the non-tree slots that follow j's mate
/// slot in the target's rotation; their B* positions start right after
/// rank_a(j) − rank_b(j). The root's pre-tree slots take positions
/// 1..lead, and the final arc stops short of them when its gap wraps
/// around the root's rotation.
fn fill_dual_maps(
    g: &RotationSystem,
    t: &SpanningTree,
    entries: &[EulerEntry],
    d_pos: &[AtomicU32],
    d_edge: &[AtomicU32],
    touches: &AtomicUsize,
) {
    let root = t.root();
    let lead = t.lead();
    if lead > 0 {
        let base = g.first_slot(root);
        (1..lead + 1)
            .into_par_iter()
            .with_min_len(GRAIN)
            .for_each(|q| {
                let slot = base + q - 1;
                d_pos[slot].store(q as u32, Ordering::Relaxed);
                d_edge[q].store(slot as u32, Ordering::Relaxed);
            });
        touches.fetch_add(lead, Ordering::Relaxed);
    }
    let tree_arcs = entries.len() - 1;
    if tree_arcs == 0 {
        return;
    }
    (1..tree_arcs + 1)
        .into_par_iter()
        .with_min_len(GRAIN)
        .fold(
            || 0usize,
            |acc, j| {
                let mj = t.mat(j);
                let tgt = t.tgt(j);
                let mut count = t.c(mj);
                if tgt == root && mj == t.t_last(root) {
                    count -= lead;
                }
                if count == 0 {
                    return acc + 1;
                }
                let first = g.first_slot(tgt);
                let deg = g.deg(tgt);
                let anchor = t.refs(mj) - first;
                let p = (entries[j].rank_a - entries[j].rank_b) as usize;
                if p + count >= d_edge.len() {
                    // Leaves a hole for the orientation pass to report.
                    return acc + 1;
                }
                for i in 1..=count {
                    let slot = first + (anchor + i) % deg;
                    d_pos[slot].store((p + i) as u32, Ordering::Relaxed);
                    d_edge[p + i].store(slot as u32, Ordering::Relaxed);
                }
                acc + count + 1
            },
        )
        .for_each(|acc| {
            touches.fetch_add(acc, Ordering::Relaxed);
        });
}

/// A non-tree position closes its parenthesis exactly when its edge was
/// already seen, which in B* terms means the mate sits earlier.
fn orient_bstar(
    g: &RotationSystem,
    d_pos: &[AtomicU32],
    d_edge: &[AtomicU32],
    bstar_len: usize,
    touches: &AtomicUsize,
) -> Result<Vec<u64>> {
    let nwords = bstar_len.div_ceil(64);
    let broken = AtomicBool::new(false);
    let words: Vec<u64> = (0..nwords)
        .into_par_iter()
        .with_min_len(GRAIN)
        .map(|w| {
            let mut word = 0u64;
            let base = w * 64;
            for bit in 0..64 {
                let i = base + bit + 1;
                if i > bstar_len {
                    break;
                }
                let slot = d_edge[i].load(Ordering::Relaxed) as usize;
                if slot == 0 {
                    broken.store(true, Ordering::Relaxed);
                    continue;
                }
                let mate_pos = d_pos[g.mate(slot)].load(Ordering::Relaxed) as usize;
                if mate_pos == 0 {
                    broken.store(true, Ordering::Relaxed);
                } else if mate_pos < i {
                    word |= 1 << bit;
                }
            }
            word
        })
        .collect();
    touches.fetch_add(bstar_len, Ordering::Relaxed);
    if broken.load(Ordering::Relaxed) {
        return Err(Error::Inconsistent(
            "dual position maps do not cover the co-tree".into(),
        ));
    }
    Ok(words)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embedding::build_sequential;
    use crate::generate;
    use crate::rng::XorShift64;
    use crate::spanning::{spanning_tree_dfs, SpanningTree};

    fn fig1() -> RotationSystem {
        RotationSystem::load_pg(include_str!("../tests/data/fig1.pg")).unwrap()
    }

    fn fig1_tree(g: &RotationSystem) -> SpanningTree {
        SpanningTree::from_parent_slots(g, vec![0u32, 0, 7, 11, 13, 15, 18, 21, 25]).unwrap()
    }

    #[test]
    fn fig1_matches_golden_for_every_thread_count() {
        let g = fig1();
        let t = fig1_tree(&g);
        let seq = build_sequential(&g, &t).unwrap();
        let a = BitVector::from_bit_str("0110110101110010110100010100");
        assert_eq!(seq.a().words(), a.words());
        for threads in [1usize, 2, 4, 8] {
            let par = par_build(&g, &t, threads).unwrap();
            assert_eq!(par.a().words(), seq.a().words(), "A, {threads} threads");
            assert_eq!(
                par.b().bits().words(),
                seq.b().bits().words(),
                "B, {threads} threads"
            );
            assert_eq!(
                par.bstar().bits().words(),
                seq.bstar().bits().words(),
                "B*, {threads} threads"
            );
        }
    }

    #[test]
    fn fig1_chain_ranks() {
        let g = fig1();
        let t = fig1_tree(&g);
        let (mut entries, head) = wire_entries(&t);
        assert_eq!(head, t.t_first(1));
        list_ranking(&mut entries, head, 4).unwrap();
        let tail = (1..entries.len()).find(|&j| entries[j].succ == 0).unwrap();
        let trailing = t.c(t.t_last(1)) - t.lead();
        assert_eq!(entries[tail].rank_a as usize, 2 * g.m() - trailing);
        assert_eq!(entries[tail].rank_b as usize, t.len());
        let mut ranks_b: Vec<u64> = entries[1..].iter().map(|e| e.rank_b).collect();
        ranks_b.sort_unstable();
        let expect: Vec<u64> = (1..=t.len() as u64).collect();
        assert_eq!(ranks_b, expect);
        let mut j = head;
        let mut last = 0u64;
        loop {
            assert!(entries[j].rank_a > last);
            last = entries[j].rank_a;
            if entries[j].succ == 0 {
                break;
            }
            j = entries[j].succ as usize;
        }
    }

    #[test]
    fn thread_count_leaves_no_trace_in_bytes() {
        let mut graphs = vec![
            generate::grid(9, 14).unwrap(),
            generate::cycle(33).unwrap(),
            generate::stacked(4000, 5).unwrap(),
        ];
        for seed in 0..4 {
            let base = generate::stacked(300 + 101 * seed as usize, seed).unwrap();
            graphs.push(generate::decorate(&base, 17, 23, seed ^ 0xbeef).unwrap());
        }
        for g in &graphs {
            let t = spanning_tree_dfs(g).unwrap();
            let seq_bytes = build_sequential(g, &t).unwrap().to_bytes();
            for threads in [1usize, 2, 4, 8] {
                let par_bytes = par_build(g, &t, threads).unwrap().to_bytes();
                assert_eq!(par_bytes, seq_bytes, "n={} threads={threads}", g.n());
            }
        }
    }

    #[test]
    fn tiny_and_degenerate_graphs() {
        let single = RotationSystem::from_parts(1, vec![], vec![vec![]], 1).unwrap();
        let loops = generate::cycle(1).unwrap();
        let p2 = RotationSystem::from_parts(2, vec![(1, 2)], vec![vec![1], vec![1]], 1).unwrap();
        let multi =
            generate::decorate(&generate::cycle(2).unwrap(), 3, 3, 9).unwrap();
        for g in [&single, &loops, &p2, &multi] {
            let t = spanning_tree_dfs(g).unwrap();
            let seq = build_sequential(g, &t).unwrap();
            for threads in [1usize, 3] {
                let par = par_build(g, &t, threads).unwrap();
                assert_eq!(par.to_bytes(), seq.to_bytes());
            }
        }
    }

    #[test]
    fn work_and_memory_stay_linear() {
        let base = generate::stacked(20_000, 8).unwrap();
        let g = generate::decorate(&base, 50, 60, 3).unwrap();
        let t = spanning_tree_dfs(&g).unwrap();
        let m = g.m();
        let mut first_bytes = None;
        for threads in [1usize, 2, 8] {
            let (s, stats) = par_build_counted(&g, &t, threads).unwrap();
            assert!(
                stats.element_touches <= 24 * m + 256,
                "{} touches for m={m}",
                stats.element_touches
            );
            assert!(
                stats.aux_words <= 16 * m + 256,
                "{} aux words for m={m}",
                stats.aux_words
            );
            let bytes = s.to_bytes();
            if let Some(b) = &first_bytes {
                assert_eq!(&bytes, b);
            } else {
                first_bytes = Some(bytes);
            }
        }
    }

    #[test]
    fn directories_equal_sequential_build() {
        let mut rng = XorShift64::new(0xD1CE);
        let len = 1_000_000;
        let mut bal = Vec::with_capacity(len);
        let mut depth = 0i64;
        for k in 0..len {
            let remaining = (len - k) as i64;
            let must_close = remaining == depth;
            let open = !must_close && (depth == 0 || rng.next() % 2 == 0);
            bal.push(open);
            depth += if open { 1 } else { -1 };
        }
        // Opens are zeros in the parenthesis convention.
        let bits: Vec<bool> = bal.iter().map(|&open| !open).collect();
        let seq_bv = BitVector::from_bits(bits.iter().copied());
        let words = seq_bv.words().to_vec();
        let plain: Vec<bool> = (0..len).map(|_| rng.next() % 3 == 0).collect();
        let plain_bv = BitVector::from_bits(plain.iter().copied());
        let (a, b, bstar) = par_build_directories(
            plain_bv.words().to_vec(),
            len,
            words.clone(),
            len,
            words,
            len,
            4,
        )
        .unwrap();
        let seq_b = BalancedParens::new(seq_bv).unwrap();
        let mut probe = 1usize;
        while probe <= len {
            assert_eq!(a.rank1(probe), plain_bv.rank1(probe));
            assert_eq!(b.rank0(probe), seq_b.rank0(probe));
            assert_eq!(b.match_pos(probe), seq_b.match_pos(probe));
            assert_eq!(bstar.match_pos(probe), seq_b.match_pos(probe));
            probe = probe * 3 + 7;
        }
        let ones = plain_bv.count_ones();
        let mut j = 1usize;
        while j <= ones {
            assert_eq!(a.select1(j), plain_bv.select1(j));
            j = j * 5 + 3;
        }
    }

    #[test]
    fn rejects_foreign_tree() {
        let g = fig1();
        let other = generate::grid(3, 3).unwrap();
        let t = spanning_tree_dfs(&other).unwrap();
        assert!(par_build(&g, &t, 2).is_err());
    }
}
