//! Space accounting and entropy estimates.
//!
//! The three arrays admit a four letter view: each processing step is
//! one of `(` `)` `[` `]` depending on its A bit and the matching B or
//! B* bit. Empirical entropy of that string bounds how far the raw
//! 4 bits per edge can be squeezed by an entropy coder.

use crate::embedding::PembStructure;

pub const SYMBOLS: [char; 4] = ['(', ')', '[', ']'];

#[derive(Debug, Clone)]
pub struct StatsReport {
    pub n: usize,
    pub m: usize,
    pub loaded_bits: usize,
    pub serialized_bits: usize,
    pub bits_per_edge: f64,
    pub serialized_bits_per_edge: f64,
    pub symbol_counts: [usize; 4],
    pub h0: f64,
    pub h1: f64,
    pub entropy_bits_per_edge: f64,
    pub components: Vec<(&'static str, usize)>,
}

/// Symbol codes of the processing sequence: 0 `(`, 1 `)`, 2 `[`, 3 `]`.
pub fn symbols(s: &PembStructure) -> Vec<u8> {
    let total = 2 * s.m();
    let mut out = Vec::with_capacity(total);
    for i in 1..=total {
        if s.a().get(i) {
            out.push(if s.b().get(s.a().rank1(i)) { 1 } else { 0 });
        } else {
            out.push(if s.bstar().get(s.a().rank0(i)) { 3 } else { 2 });
        }
    }
    out
}

pub fn symbols_string(s: &PembStructure) -> String {
    symbols(s).into_iter().map(|c| SYMBOLS[c as usize]).collect()
}

pub fn stats(s: &PembStructure) -> StatsReport {
    let syms = symbols(s);
    let total = syms.len();
    let mut counts = [0usize; 4];
    for &c in &syms {
        counts[c as usize] += 1;
    }
    let mut pairs = [[0usize; 4]; 4];
    for (k, &c) in syms.iter().enumerate() {
        let d = syms[(k + 1) % total.max(1)];
        pairs[c as usize][d as usize] += 1;
    }
    let nf = total as f64;
    let mut h0 = 0.0;
    let mut h1 = 0.0;
    if total > 0 {
        for c in 0..4 {
            if counts[c] == 0 {
                continue;
            }
            let p = counts[c] as f64 / nf;
            h0 -= p * p.log2();
            for d in 0..4 {
                if pairs[c][d] == 0 {
                    continue;
                }
                h1 += (pairs[c][d] as f64 / nf)
                    * (counts[c] as f64 / pairs[c][d] as f64).log2();
            }
        }
    }
    let mut components = vec![
        ("A", s.a().size_bits()),
        ("B", s.b().size_bits()),
        ("Bstar", s.bstar().size_bits()),
    ];
    if let Some(di) = s.degree_index() {
        components.push(("degree_index", di.size_bits()));
    }
    if let Some(ni) = s.neighbour_index() {
        components.push(("neighbour_index", ni.size_bits()));
    }
    let loaded_bits = s.size_bits();
    let serialized_bits = s.to_bytes().len() * 8;
    let per_edge = |bits: usize| {
        if s.m() == 0 {
            0.0
        } else {
            bits as f64 / s.m() as f64
        }
    };
    StatsReport {
        n: s.n(),
        m: s.m(),
        loaded_bits,
        serialized_bits,
        bits_per_edge: per_edge(loaded_bits),
        serialized_bits_per_edge: per_edge(serialized_bits),
        symbol_counts: counts,
        h0,
        h1,
        entropy_bits_per_edge: 2.0 * h1,
        components,
    }
}
