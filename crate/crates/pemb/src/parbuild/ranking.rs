//! Parallel list ranking and prefix sums.
//!
//! Ranking follows the classic sublist scheme: a few evenly spaced heads
//! split the successor chain, each sublist is swept independently, the
//! per-sublist totals are combined in tour order, and a final parallel
//! pass adds each sublist's offset back in. The result is identical to a
//! sequential pointer chase for every thread count.

use std::sync::atomic::{AtomicBool, AtomicU32, AtomicU64, Ordering};

use rayon::prelude::*;

use crate::error::{Error, Result};

/// One tour arc. `rank_a` and `rank_b` hold per-entry weights before
/// ranking and inclusive prefix sums along the `succ` chain afterwards.
/// `succ` is the array index of the next arc, 0 on the final one.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct EulerEntry {
    pub value: bool,
    pub succ: u32,
    pub rank_a: u64,
    pub rank_b: u64,
}

pub(crate) struct RankingCost {
    pub touches: usize,
    pub aux_words: usize,
}

struct Sublist {
    next: usize,
    nodes: u64,
    tot_a: u64,
    tot_b: u64,
}

/// Replaces the weights in `entries[1..]` with inclusive prefix sums
/// along the chain starting at `head`. The chain must visit every entry
/// exactly once; anything else (a cycle, a merge, an early stop) is
/// reported as a structural error and leaves the ranks unspecified.
pub fn list_ranking(entries: &mut [EulerEntry], head: usize, threads: usize) -> Result<()> {
    list_ranking_counted(entries, head, threads).map(|_| ())
}

pub(crate) fn list_ranking_counted(
    entries: &mut [EulerEntry],
    head: usize,
    threads: usize,
) -> Result<RankingCost> {
    let count = entries.len().saturating_sub(1);
    if count == 0 {
        return Ok(RankingCost { touches: 0, aux_words: 0 });
    }
    if head == 0 || head > count {
        return Err(Error::Structural(format!("ranking head {head} out of range")));
    }
    let s = (threads.max(1) * 8).min(count);
    let mut is_head = vec![false; count + 1];
    let mut heads = Vec::with_capacity(s);
    is_head[head] = true;
    heads.push(head);
    for k in 1..s {
        let idx = 1 + k * count / s;
        if !is_head[idx] {
            is_head[idx] = true;
            heads.push(idx);
        }
    }
    let mut head_id = vec![0u32; count + 1];
    for (k, &h) in heads.iter().enumerate() {
        head_id[h] = k as u32 + 1;
    }
    let owner: Vec<AtomicU32> = (0..=count).map(|_| AtomicU32::new(0)).collect();
    let ra: Vec<AtomicU64> = (0..=count).map(|_| AtomicU64::new(0)).collect();
    let rb: Vec<AtomicU64> = (0..=count).map(|_| AtomicU64::new(0)).collect();
    let broken = AtomicBool::new(false);

    let shared: &[EulerEntry] = entries;
    let subs: Vec<Sublist> = heads
        .par_iter()
        .map(|&h| {
            let id = head_id[h];
            let mut x = h;
            let mut acc_a = 0u64;
            let mut acc_b = 0u64;
            let mut nodes = 0u64;
            loop {
                if owner[x]
                    .compare_exchange(0, id, Ordering::Relaxed, Ordering::Relaxed)
                    .is_err()
                {
                    // Someone reached this node first: the chain merges
                    // or loops, so it cannot be a single covering path.
                    broken.store(true, Ordering::Relaxed);
                    return Sublist { next: 0, nodes, tot_a: acc_a, tot_b: acc_b };
                }
                acc_a += shared[x].rank_a;
                acc_b += shared[x].rank_b;
                ra[x].store(acc_a, Ordering::Relaxed);
                rb[x].store(acc_b, Ordering::Relaxed);
                nodes += 1;
                let nx = shared[x].succ as usize;
                if nx == 0 || nx > count {
                    if nx > count {
                        broken.store(true, Ordering::Relaxed);
                    }
                    return Sublist { next: 0, nodes, tot_a: acc_a, tot_b: acc_b };
                }
                if is_head[nx] {
                    return Sublist { next: nx, nodes, tot_a: acc_a, tot_b: acc_b };
                }
                x = nx;
            }
        })
        .collect();
    if broken.load(Ordering::Relaxed) {
        return Err(Error::Structural("successor links do not form a chain".into()));
    }

    let mut off = vec![(0u64, 0u64); heads.len() + 1];
    let mut seen = vec![false; heads.len() + 1];
    let mut cur = head;
    let mut oa = 0u64;
    let mut ob = 0u64;
    let mut covered = 0u64;
    loop {
        let id = head_id[cur] as usize;
        if seen[id] {
            return Err(Error::Structural("successor links form a cycle".into()));
        }
        seen[id] = true;
        off[id] = (oa, ob);
        let sub = &subs[id - 1];
        oa += sub.tot_a;
        ob += sub.tot_b;
        covered += sub.nodes;
        if sub.next == 0 {
            break;
        }
        cur = sub.next;
    }
    if covered as usize != count {
        return Err(Error::Structural(format!(
            "chain covers {covered} of {count} entries"
        )));
    }

    entries
        .par_iter_mut()
        .enumerate()
        .skip(1)
        .with_min_len(4096)
        .for_each(|(i, e)| {
            let id = owner[i].load(Ordering::Relaxed) as usize;
            let (base_a, base_b) = off[id];
            e.rank_a = ra[i].load(Ordering::Relaxed) + base_a;
            e.rank_b = rb[i].load(Ordering::Relaxed) + base_b;
        });

    let aux_words = (count + 1) / 2 + 1
        + 2 * (count + 1)
        + (count + 1).div_ceil(8)
        + (count + 1).div_ceil(2)
        + 6 * heads.len();
    Ok(RankingCost {
        touches: 2 * count + heads.len(),
        aux_words,
    })
}

/// Chunked parallel scan; `threads` controls the chunk count, not the
/// pool, so results match the sequential scan exactly.
pub fn prefix_sum_inclusive(values: &[u64], threads: usize) -> Vec<u64> {
    prefix_sum(values, threads, true)
}

pub fn prefix_sum_exclusive(values: &[u64], threads: usize) -> Vec<u64> {
    prefix_sum(values, threads, false)
}

fn prefix_sum(values: &[u64], threads: usize, inclusive: bool) -> Vec<u64> {
    let n = values.len();
    if n == 0 {
        return Vec::new();
    }
    let chunk = n.div_ceil(threads.max(1) * 4).max(4096).min(n);
    let sums: Vec<u64> = values
        .par_chunks(chunk)
        .map(|c| c.iter().sum())
        .collect();
    let mut offs = Vec::with_capacity(sums.len());
    let mut acc = 0u64;
    for &s in &sums {
        offs.push(acc);
        acc += s;
    }
    let mut out = vec![0u64; n];
    out.par_chunks_mut(chunk)
        .zip(values.par_chunks(chunk))
        .zip(offs.par_iter())
        .for_each(|((o, v), &base)| {
            let mut run = base;
            for k in 0..v.len() {
                if inclusive {
                    run += v[k];
                    o[k] = run;
                } else {
                    o[k] = run;
                    run += v[k];
                }
            }
        });
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::XorShift64;

    fn chain(order: &[usize], weights_a: &[u64], weights_b: &[u64]) -> Vec<EulerEntry> {
        // order[k] is the array index of the k-th tour element.
        let count = order.len();
        let mut entries = vec![EulerEntry::default(); count + 1];
        for k in 0..count {
            let idx = order[k];
            entries[idx] = EulerEntry {
                value: false,
                succ: if k + 1 < count { order[k + 1] as u32 } else { 0 },
                rank_a: weights_a[k],
                rank_b: weights_b[k],
            };
        }
        entries
    }

    #[test]
    fn unit_weights_rank_one_to_n() {
        let order = [1, 2, 3, 4, 5];
        let mut entries = chain(&order, &[1; 5], &[1; 5]);
        list_ranking(&mut entries, 1, 4).unwrap();
        for (k, &idx) in order.iter().enumerate() {
            assert_eq!(entries[idx].rank_a, k as u64 + 1);
            assert_eq!(entries[idx].rank_b, k as u64 + 1);
        }
    }

    #[test]
    fn random_chains_match_pointer_chase() {
        let mut rng = XorShift64::new(0xA11CE);
        for &count in &[1usize, 2, 37, 1000, 1_000_000] {
            let mut order: Vec<usize> = (1..=count).collect();
            for k in (1..count).rev() {
                order.swap(k, rng.below(k + 1));
            }
            let wa: Vec<u64> = (0..count).map(|_| rng.next() % 100).collect();
            let wb: Vec<u64> = (0..count).map(|_| 1 + rng.next() % 3).collect();
            let baseline = chain(&order, &wa, &wb);
            let mut expect = baseline.clone();
            let mut run_a = 0u64;
            let mut run_b = 0u64;
            let mut x = order[0];
            loop {
                run_a += baseline[x].rank_a;
                run_b += baseline[x].rank_b;
                expect[x].rank_a = run_a;
                expect[x].rank_b = run_b;
                let nx = baseline[x].succ as usize;
                if nx == 0 {
                    break;
                }
                x = nx;
            }
            for threads in [1usize, 2, 3, 8] {
                let mut entries = baseline.clone();
                list_ranking(&mut entries, order[0], threads).unwrap();
                assert_eq!(entries, expect, "count {count}, threads {threads}");
            }
        }
    }

    #[test]
    fn broken_chains_are_rejected() {
        // A cycle that never terminates.
        let mut cyc = chain(&[1, 2, 3, 4], &[1; 4], &[1; 4]);
        cyc[4].succ = 1;
        assert!(matches!(
            list_ranking(&mut cyc, 1, 2),
            Err(Error::Structural(_))
        ));
        // Two fragments: the chain from the head misses half the array.
        let mut split = chain(&[1, 2, 3, 4, 5, 6], &[1; 6], &[1; 6]);
        split[3].succ = 0;
        assert!(matches!(
            list_ranking(&mut split, 1, 2),
            Err(Error::Structural(_))
        ));
        // Two nodes share a successor.
        let mut merge = chain(&[1, 2, 3, 4, 5], &[1; 5], &[1; 5]);
        merge[5].succ = 3;
        assert!(matches!(
            list_ranking(&mut merge, 1, 2),
            Err(Error::Structural(_))
        ));
        // Successor out of range.
        let mut oob = chain(&[1, 2, 3], &[1; 3], &[1; 3]);
        oob[2].succ = 9;
        assert!(matches!(
            list_ranking(&mut oob, 1, 2),
            Err(Error::Structural(_))
        ));
        // Head out of range.
        let mut ok = chain(&[1, 2, 3], &[1; 3], &[1; 3]);
        assert!(matches!(
            list_ranking(&mut ok, 7, 2),
            Err(Error::Structural(_))
        ));
        // Long chains where sublists meet mid-stride: a merge into a
        // non-head node and a cycle inside one sublist.
        let order: Vec<usize> = (1..=40).collect();
        let mut long_merge = chain(&order, &[1; 40], &[1; 40]);
        long_merge[40].succ = 17;
        assert!(matches!(
            list_ranking(&mut long_merge, 1, 1),
            Err(Error::Structural(_))
        ));
        let mut long_cycle = chain(&order, &[1; 40], &[1; 40]);
        long_cycle[20].succ = 18;
        assert!(matches!(
            list_ranking(&mut long_cycle, 1, 1),
            Err(Error::Structural(_))
        ));
    }

    #[test]
    fn empty_ranking_is_trivial() {
        let mut entries = vec![EulerEntry::default()];
        list_ranking(&mut entries, 0, 4).unwrap();
    }

    #[test]
    fn prefix_sums_match_scan() {
        assert_eq!(prefix_sum_inclusive(&[1, 1, 1, 1], 2), vec![1, 2, 3, 4]);
        assert_eq!(prefix_sum_exclusive(&[1, 1, 1, 1], 2), vec![0, 1, 2, 3]);
        assert!(prefix_sum_inclusive(&[], 4).is_empty());
        let mut rng = XorShift64::new(77);
        let values: Vec<u64> = (0..1_000_000).map(|_| rng.next() % 1000).collect();
        let mut expect_inc = Vec::with_capacity(values.len());
        let mut expect_exc = Vec::with_capacity(values.len());
        let mut acc = 0u64;
        for &v in &values {
            expect_exc.push(acc);
            acc += v;
            expect_inc.push(acc);
        }
        for threads in 1..=8 {
            assert_eq!(prefix_sum_inclusive(&values, threads), expect_inc);
            assert_eq!(prefix_sum_exclusive(&values, threads), expect_exc);
        }
    }
}
