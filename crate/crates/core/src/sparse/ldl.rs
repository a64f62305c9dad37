//! Sparse LDLᵀ factorization with a nested-dissection fill-reducing ordering.
//!
//! The numeric phase is the up-looking row-by-row algorithm: row `k` of `L`
//! is a sparse triangular solve whose pattern is the reach of row `k` of the
//! permuted matrix in the elimination tree.

use super::SparseSymMatrix;
use crate::error::{Error, Result};

const NONE: usize = usize::MAX;
/// Regions at most this large are ordered as they come.
const LEAF_SIZE: usize = 48;

/// Fill-reducing ordering by recursive bisection along BFS level sets.
/// Returns `perm` with `perm[new] = old`.
pub fn nested_dissection(adj: &[Vec<usize>]) -> Vec<usize> {
    let n = adj.len();
    let mut st = Dissector {
        adj,
        region: vec![0; n],
        seen: vec![0; n],
        next_region: 0,
        stamp: 0,
        order: Vec::with_capacity(n),
    };
    st.dissect((0..n).collect());
    debug_assert_eq!(st.order.len(), n);
    st.order
}

struct Dissector<'a> {
    adj: &'a [Vec<usize>],
    region: Vec<u32>,
    seen: Vec<u32>,
    next_region: u32,
    stamp: u32,
    order: Vec<usize>,
}

impl Dissector<'_> {
    /// BFS inside the current region; returns the level sets.
    fn levels(&mut self, start: usize, id: u32) -> Vec<Vec<usize>> {
        self.stamp += 1;
        let stamp = self.stamp;
        self.seen[start] = stamp;
        let mut levels = vec![vec![start]];
        loop {
            let mut next = Vec::new();
            for &v in levels.last().unwrap() {
                for &u in &self.adj[v] {
                    if self.region[u] == id && self.seen[u] != stamp {
                        self.seen[u] = stamp;
                        next.push(u);
                    }
                }
            }
            if next.is_empty() {
                break;
            }
            levels.push(next);
        }
        levels
    }

    fn dissect(&mut self, nodes: Vec<usize>) {
        if nodes.len() <= LEAF_SIZE {
            self.order.extend(nodes);
            return;
        }
        self.next_region += 1;
        let id = self.next_region;
        for &v in &nodes {
            self.region[v] = id;
        }
        let mut levels = self.levels(nodes[0], id);
        let reached: usize = levels.iter().map(Vec::len).sum();
        if reached < nodes.len() {
            // Disconnected region: handle each component on its own.
            let mut comps = Vec::new();
            let first: Vec<usize> = levels.concat();
            let stamp_first = self.stamp;
            comps.push(first);
            let rest: Vec<usize> = nodes.iter().copied().filter(|&v| self.seen[v] != stamp_first).collect();
            let mut assigned = std::collections::HashSet::new();
            for &v in &rest {
                if assigned.contains(&v) {
                    continue;
                }
                let comp: Vec<usize> = self.levels(v, id).concat();
                for &u in &comp {
                    assigned.insert(u);
                }
                comps.push(comp);
            }
            for c in comps {
                self.dissect(c);
            }
            return;
        }
        // Pseudo-peripheral start: restart from a min-degree node of the last level.
        for _ in 0..4 {
            let last = levels.last().unwrap();
            let cand = *last
                .iter()
                .min_by_key(|&&v| self.adj[v].iter().filter(|&&u| self.region[u] == id).count())
                .unwrap();
            let trial = self.levels(cand, id);
            if trial.len() > levels.len() {
                levels = trial;
            } else {
                break;
            }
        }
        if levels.len() < 3 {
            self.order.extend(nodes);
            return;
        }
        let total = nodes.len();
        let mut before = 0usize;
        let mut best: Option<(usize, usize)> = None;
        let mut median = 1;
        for (j, lv) in levels.iter().enumerate() {
            if j > 0 && j + 1 < levels.len() {
                let frac = before as f64 / total as f64;
                if (0.3..=0.7).contains(&frac) && best.map_or(true, |(_, s)| lv.len() < s) {
                    best = Some((j, lv.len()));
                }
                if before * 2 <= total {
                    median = j;
                }
            }
            before += lv.len();
        }
        let sep = best.map_or(median, |(j, _)| j);
        let a: Vec<usize> = levels[..sep].concat();
        let b: Vec<usize> = levels[sep + 1..].concat();
        let s = std::mem::take(&mut levels[sep]);
        self.dissect(a);
        self.dissect(b);
        self.order.extend(s);
    }
}

/// `P A Pᵀ = L D Lᵀ` with unit lower-triangular `L` stored by columns.
#[derive(Debug, Clone)]
pub struct LdlFactor {
    n: usize,
    perm: Vec<usize>,
    lp: Vec<usize>,
    li: Vec<usize>,
    lx: Vec<f64>,
    d: Vec<f64>,
}

impl LdlFactor {
    /// Factor a symmetric positive definite matrix with nested-dissection ordering.
    pub fn new(a: &SparseSymMatrix) -> Result<Self> {
        let perm = nested_dissection(&a.adjacency());
        Self::with_ordering(a, perm)
    }

    pub fn with_ordering(a: &SparseSymMatrix, perm: Vec<usize>) -> Result<Self> {
        let n = a.n();
        if perm.len() != n {
            return Err(Error::Argument("permutation length mismatch".into()));
        }
        let mut iperm = vec![NONE; n];
        for (new, &old) in perm.iter().enumerate() {
            if old >= n || iperm[old] != NONE {
                return Err(Error::Argument("invalid permutation".into()));
            }
            iperm[old] = new;
        }
        // Upper triangle of the permuted matrix, column-compressed.
        let mut count = vec![0usize; n + 1];
        for i in 0..n {
            for (j, _) in a.row(i) {
                let (ni, nj) = (iperm[i], iperm[j]);
                if ni <= nj {
                    count[nj + 1] += 1;
                }
            }
        }
        for k in 0..n {
            count[k + 1] += count[k];
        }
        let ap = count.clone();
        let mut next = count;
        let mut ai = vec![0usize; ap[n]];
        let mut ax = vec![0.0; ap[n]];
        for i in 0..n {
            for (j, v) in a.row(i) {
                let (ni, nj) = (iperm[i], iperm[j]);
                if ni <= nj {
                    ai[next[nj]] = ni;
                    ax[next[nj]] = v;
                    next[nj] += 1;
                }
            }
        }

        // Symbolic: elimination tree and column counts.
        let mut parent = vec![NONE; n];
        let mut flag = vec![NONE; n];
        let mut lnz = vec![0usize; n];
        for k in 0..n {
            flag[k] = k;
            for &row in &ai[ap[k]..ap[k + 1]] {
                let mut i = row;
                if i < k {
                    while flag[i] != k {
                        if parent[i] == NONE {
                            parent[i] = k;
                        }
                        lnz[i] += 1;
                        flag[i] = k;
                        i = parent[i];
                    }
                }
            }
        }
        let mut lp = vec![0usize; n + 1];
        for k in 0..n {
            lp[k + 1] = lp[k] + lnz[k];
        }

        // Numeric.
        let nnz = lp[n];
        let mut li = vec![0usize; nnz];
        let mut lx = vec![0.0; nnz];
        let mut d = vec![0.0; n];
        let mut y = vec![0.0; n];
        let mut pattern = vec![0usize; n];
        flag.iter_mut().for_each(|f| *f = NONE);
        lnz.iter_mut().for_each(|c| *c = 0);
        for k in 0..n {
            let mut top = n;
            flag[k] = k;
            for p in ap[k]..ap[k + 1] {
                let mut i = ai[p];
                y[i] += ax[p];
                let mut len = 0;
                while flag[i] != k {
                    pattern[len] = i;
                    len += 1;
                    flag[i] = k;
                    i = parent[i];
                }
                while len > 0 {
                    top -= 1;
                    len -= 1;
                    pattern[top] = pattern[len];
                }
            }
            d[k] = y[k];
            y[k] = 0.0;
            while top < n {
                let i = pattern[top];
                let yi = y[i];
                y[i] = 0.0;
                let end = lp[i] + lnz[i];
                for p in lp[i]..end {
                    y[li[p]] -= lx[p] * yi;
                }
                let l_ki = yi / d[i];
                d[k] -= l_ki * yi;
                li[end] = k;
                lx[end] = l_ki;
                lnz[i] += 1;
                top += 1;
            }
            if !(d[k] > 0.0) {
                return Err(Error::NotPositiveDefinite {
                    pivot: k,
                    value: d[k],
                });
            }
        }
        Ok(LdlFactor {
            n,
            perm,
            lp,
            li,
            lx,
            d,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of stored off-diagonal entries of `L`.
    pub fn fill(&self) -> usize {
        self.lx.len()
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = vec![0.0; self.n];
        self.solve_into(b, &mut x);
        x
    }

    pub fn solve_into(&self, b: &[f64], out: &mut [f64]) {
        let n = self.n;
        let mut x: Vec<f64> = self.perm.iter().map(|&old| b[old]).collect();
        for j in 0..n {
            let xj = x[j];
            for p in self.lp[j]..self.lp[j + 1] {
                x[self.li[p]] -= self.lx[p] * xj;
            }
        }
        for j in 0..n {
            x[j] /= self.d[j];
        }
        for j in (0..n).rev() {
            let mut s = x[j];
            for p in self.lp[j]..self.lp[j + 1] {
                s -= self.lx[p] * x[self.li[p]];
            }
            x[j] = s;
        }
        for (new, &old) in self.perm.iter().enumerate() {
            out[old] = x[new];
        }
    }
}
