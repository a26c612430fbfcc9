//! Small directed-graph utilities: strongly connected components and
//! non-negative integer matrices for transfer counting.

use num_bigint::BigUint;
use num_traits::{One, Zero};

/// Strongly connected components via Kosaraju's two-pass DFS.
///
/// Components are returned with sorted members, ordered by smallest member,
/// so downstream tie-breaks are deterministic.
pub(crate) fn strongly_connected_components(adj: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let n = adj.len();
    let mut order = Vec::with_capacity(n);
    let mut seen = vec![false; n];
    // First pass: record vertices in post-order, iteratively.
    for start in 0..n {
        if seen[start] {
            continue;
        }
        let mut stack = vec![(start, 0usize)];
        seen[start] = true;
        while let Some(&mut (v, ref mut i)) = stack.last_mut() {
            if *i < adj[v].len() {
                let w = adj[v][*i];
                *i += 1;
                if !seen[w] {
                    seen[w] = true;
                    stack.push((w, 0));
                }
            } else {
                order.push(v);
                stack.pop();
            }
        }
    }
    // Reverse graph.
    let mut radj = vec![Vec::new(); n];
    for (v, outs) in adj.iter().enumerate() {
        for &w in outs {
            radj[w].push(v);
        }
    }
    // Second pass in reverse post-order.
    let mut comp = vec![usize::MAX; n];
    let mut comps: Vec<Vec<usize>> = Vec::new();
    for &start in order.iter().rev() {
        if comp[start] != usize::MAX {
            continue;
        }
        let id = comps.len();
        let mut members = vec![start];
        comp[start] = id;
        let mut stack = vec![start];
        while let Some(v) = stack.pop() {
            for &w in &radj[v] {
                if comp[w] == usize::MAX {
                    comp[w] = id;
                    members.push(w);
                    stack.push(w);
                }
            }
        }
        members.sort_unstable();
        comps.push(members);
    }
    comps.sort_by_key(|c| c[0]);
    comps
}

/// Out-degree of each member inside its own component.
pub(crate) fn internal_out_degrees(adj: &[Vec<usize>], component: &[usize]) -> Vec<usize> {
    component
        .iter()
        .map(|&v| adj[v].iter().filter(|w| component.contains(w)).count())
        .collect()
}

/// A component is a single simple cycle exactly when it is strongly
/// connected (given) and every internal out-degree is 1.
pub(crate) fn is_simple_cycle(adj: &[Vec<usize>], component: &[usize]) -> bool {
    internal_out_degrees(adj, component).iter().all(|&d| d == 1)
}

/// Non-trivial component: contains at least one internal edge.
pub(crate) fn has_internal_edge(adj: &[Vec<usize>], component: &[usize]) -> bool {
    component
        .iter()
        .any(|&v| adj[v].iter().any(|w| component.contains(w)))
}

/// Dense square matrix of big non-negative integers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct IntMatrix {
    pub n: usize,
    pub data: Vec<BigUint>,
}

impl IntMatrix {
    pub fn zeros(n: usize) -> IntMatrix {
        IntMatrix {
            n,
            data: vec![BigUint::zero(); n * n],
        }
    }

    pub fn from_adjacency(adj: &[Vec<usize>]) -> IntMatrix {
        let mut m = IntMatrix::zeros(adj.len());
        for (u, outs) in adj.iter().enumerate() {
            for &v in outs {
                m.data[u * m.n + v] = BigUint::one();
            }
        }
        m
    }

    pub fn add_identity(&self) -> IntMatrix {
        let mut m = self.clone();
        for i in 0..self.n {
            m.data[i * self.n + i] += BigUint::one();
        }
        m
    }

    pub fn transpose(&self) -> IntMatrix {
        let mut m = IntMatrix::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                m.data[j * self.n + i] = self.data[i * self.n + j].clone();
            }
        }
        m
    }

    pub fn mul(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(self.n, other.n);
        let n = self.n;
        let mut out = IntMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = &self.data[i * n + k];
                if a.is_zero() {
                    continue;
                }
                for j in 0..n {
                    let b = &other.data[k * n + j];
                    if !b.is_zero() {
                        out.data[i * n + j] += a * b;
                    }
                }
            }
        }
        out
    }

    /// Matrix-vector product `A v`.
    pub fn mul_vec(&self, v: &[BigUint]) -> Vec<BigUint> {
        let n = self.n;
        let mut out = vec![BigUint::zero(); n];
        for i in 0..n {
            for j in 0..n {
                let a = &self.data[i * n + j];
                if !a.is_zero() && !v[j].is_zero() {
                    out[i] += a * &v[j];
                }
            }
        }
        out
    }

    pub fn max_row_sum(&self) -> BigUint {
        (0..self.n)
            .map(|i| self.data[i * self.n..(i + 1) * self.n].iter().sum())
            .max()
            .unwrap_or_else(BigUint::zero)
    }

    pub fn max_diagonal(&self) -> BigUint {
        (0..self.n)
            .map(|i| self.data[i * self.n + i].clone())
            .max()
            .unwrap_or_else(BigUint::zero)
    }

    /// Principal submatrix on the given (sorted) vertex list.
    pub fn submatrix(&self, vertices: &[usize]) -> IntMatrix {
        let k = vertices.len();
        let mut m = IntMatrix::zeros(k);
        for (i, &vi) in vertices.iter().enumerate() {
            for (j, &vj) in vertices.iter().enumerate() {
                m.data[i * k + j] = self.data[vi * self.n + vj].clone();
            }
        }
        m
    }
}
