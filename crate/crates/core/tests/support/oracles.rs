//! Independent reference computations used by the property and acceptance
//! tests. Nothing here calls into the library.

#![allow(dead_code)]

use std::collections::VecDeque;

/// Members of each cluster of a label vector, in first-appearance order.
pub fn clusters(labels: &[usize]) -> Vec<Vec<usize>> {
    let mut seen: Vec<usize> = Vec::new();
    let mut out: Vec<Vec<usize>> = Vec::new();
    for (m, &l) in labels.iter().enumerate() {
        match seen.iter().position(|&s| s == l) {
            Some(k) => out[k].push(m),
            None => {
                seen.push(l);
                out.push(vec![m]);
            }
        }
    }
    out
}

fn div(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

pub fn f1(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

/// MUC by counting, per key chain, the response pieces it is cut into.
pub fn muc(gold: &[usize], pred: &[usize]) -> (f64, f64, f64) {
    let side = |key: &[usize], resp: &[usize]| {
        let (mut num, mut den) = (0.0, 0.0);
        for chain in clusters(key) {
            let mut pieces: Vec<usize> = Vec::new();
            for &m in &chain {
                if !pieces.contains(&resp[m]) {
                    pieces.push(resp[m]);
                }
            }
            num += (chain.len() - pieces.len()) as f64;
            den += (chain.len() - 1) as f64;
        }
        div(num, den)
    };
    let (r, p) = (side(gold, pred), side(pred, gold));
    (p, r, f1(p, r))
}

/// B³ with explicit per-mention loops.
pub fn b_cubed(gold: &[usize], pred: &[usize]) -> (f64, f64, f64) {
    let n = gold.len();
    let (mut p, mut r) = (0.0, 0.0);
    for m in 0..n {
        let both = (0..n).filter(|&x| gold[x] == gold[m] && pred[x] == pred[m]).count() as f64;
        p += both / (0..n).filter(|&x| pred[x] == pred[m]).count() as f64;
        r += both / (0..n).filter(|&x| gold[x] == gold[m]).count() as f64;
    }
    let (p, r) = (div(p, n as f64), div(r, n as f64));
    (p, r, f1(p, r))
}

fn best_matching(w: &[Vec<f64>], row: usize, used: &mut [bool]) -> f64 {
    if row == w.len() {
        return 0.0;
    }
    let mut best = best_matching(w, row + 1, used);
    for c in 0..used.len() {
        if !used[c] {
            used[c] = true;
            best = best.max(w[row][c] + best_matching(w, row + 1, used));
            used[c] = false;
        }
    }
    best
}

/// CEAF_e with the alignment found by trying every matching.
pub fn ceaf_e(gold: &[usize], pred: &[usize]) -> (f64, f64, f64) {
    let (g, s) = (clusters(gold), clusters(pred));
    let w: Vec<Vec<f64>> = g
        .iter()
        .map(|a| {
            s.iter()
                .map(|b| 2.0 * a.iter().filter(|m| b.contains(m)).count() as f64 / (a.len() + b.len()) as f64)
                .collect()
        })
        .collect();
    let mass = best_matching(&w, 0, &mut vec![false; s.len()]);
    let (p, r) = (div(mass, s.len() as f64), div(mass, g.len() as f64));
    (p, r, f1(p, r))
}

/// `ln Γ(x + n) - ln Γ(x)` as a sum of logs of the rising factorial.
pub fn log_rising(x: f64, n: u32) -> f64 {
    (0..n).map(|k| (x + f64::from(k)).ln()).sum()
}

/// Dirichlet-multinomial log marginal from rising factorials.
pub fn dirichlet_multinomial(counts: &[u32], lambda: f64, vocab: usize) -> f64 {
    let total: u32 = counts.iter().sum();
    counts.iter().map(|&c| log_rising(lambda, c)).sum::<f64>() - log_rising(lambda * vocab as f64, total)
}

/// CRP probability of a partition with the given block sizes, by sequential
/// seating.
pub fn crp_probability(sizes: &[usize], alpha: f64) -> f64 {
    let n: usize = sizes.iter().sum();
    let mut p = alpha.powi(sizes.len() as i32);
    for &s in sizes {
        p *= (1..s).product::<usize>() as f64;
    }
    for k in 0..n {
        p /= alpha + k as f64;
    }
    p
}

/// Component labels of an undirected graph by breadth-first search.
pub fn components(n: usize, edges: &[(usize, usize)]) -> Vec<usize> {
    let mut adj = vec![Vec::new(); n];
    for &(a, b) in edges {
        adj[a].push(b);
        adj[b].push(a);
    }
    let mut label = vec![usize::MAX; n];
    let mut next = 0;
    for s in 0..n {
        if label[s] != usize::MAX {
            continue;
        }
        let mut q = VecDeque::from([s]);
        label[s] = next;
        while let Some(x) = q.pop_front() {
            for &y in &adj[x] {
                if label[y] == usize::MAX {
                    label[y] = next;
                    q.push_back(y);
                }
            }
        }
        next += 1;
    }
    label
}

/// Whether two label vectors describe the same partition.
pub fn same_partition(a: &[usize], b: &[usize]) -> bool {
    let mut ca = clusters(a);
    let mut cb = clusters(b);
    ca.sort();
    cb.sort();
    ca == cb
}
