//! Truncated tree Laplacians.
//!
//! Vertices are numbered breadth-first, generation by generation, with the
//! children of a vertex contiguous. Truncation at depth `D` keeps
//! generations `0..=D` and drops every edge into generation `D + 1`.

use std::fmt::Write as _;

use crate::eigen::{dense_eigenvalues, tridiagonal_eigenvalues};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::tree::{ball_count, generation_size, kappa, TreeSpec};

/// Largest truncation (in vertices) that may be enumerated.
pub const VERTEX_GUARD: u64 = 1_000_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VertexIndexing {
    pub depth: u64,
    /// `offsets[g]` is the index of the first vertex of generation `g`;
    /// `offsets[depth + 1] == total`.
    pub offsets: Vec<usize>,
    /// Branching number of each generation `0..=depth`.
    pub kappa: Vec<usize>,
    pub total: usize,
}

impl VertexIndexing {
    pub fn generation_len(&self, g: usize) -> usize {
        self.offsets[g + 1] - self.offsets[g]
    }

    pub fn generation_of(&self, v: usize) -> usize {
        self.offsets.partition_point(|&o| o <= v) - 1
    }

    pub fn parent(&self, v: usize) -> Option<usize> {
        let g = self.generation_of(v);
        (g > 0).then(|| self.offsets[g - 1] + (v - self.offsets[g]) / self.kappa[g - 1])
    }

    /// Children of `v` inside the truncation.
    pub fn children(&self, v: usize) -> std::ops::Range<usize> {
        let g = self.generation_of(v);
        if g as u64 >= self.depth {
            return v..v;
        }
        let k = self.kappa[g];
        let first = self.offsets[g + 1] + (v - self.offsets[g]) * k;
        first..first + k
    }
}

pub fn enumerate_vertices(spec: &TreeSpec, depth: u64) -> Result<VertexIndexing> {
    let count = ball_count(spec, depth).count;
    if count > VERTEX_GUARD.into() {
        return Err(Error::SizeGuard {
            what: "truncated tree vertices",
            actual: count.to_string(),
            limit: VERTEX_GUARD,
        });
    }
    let mut offsets = Vec::with_capacity(depth as usize + 2);
    let mut acc = 0usize;
    for g in 0..=depth {
        offsets.push(acc);
        acc += generation_size(spec, g)? as usize;
    }
    offsets.push(acc);
    let kappa = (0..=depth).map(|g| kappa(spec, g) as usize).collect();
    Ok(VertexIndexing {
        depth,
        offsets,
        kappa,
        total: acc,
    })
}

/// Real symmetric matrix with each off-diagonal entry stored once.
#[derive(Clone, Debug, PartialEq)]
pub struct SymOperator<T> {
    diag: Vec<T>,
    /// `(i, j, value)` with `i < j`.
    upper: Vec<(usize, usize, T)>,
    tridiagonal: bool,
}

impl<T: Scalar> SymOperator<T> {
    pub fn zeros(n: usize) -> Self {
        Self {
            diag: vec![T::zero(); n],
            upper: Vec::new(),
            tridiagonal: true,
        }
    }

    /// Jacobi matrix with diagonal `b` and off-diagonal `a`.
    pub fn tridiagonal(b: Vec<T>, a: &[T]) -> Result<Self> {
        if !b.is_empty() && a.len() + 1 != b.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} diagonal and {} off-diagonal entries",
                b.len(),
                a.len()
            )));
        }
        let upper = a.iter().enumerate().map(|(i, &x)| (i, i + 1, x)).collect();
        Ok(Self {
            diag: b,
            upper,
            tridiagonal: true,
        })
    }

    pub fn dimension(&self) -> usize {
        self.diag.len()
    }

    pub fn diag(&self) -> &[T] {
        &self.diag
    }

    pub fn upper(&self) -> &[(usize, usize, T)] {
        &self.upper
    }

    pub fn is_tridiagonal(&self) -> bool {
        self.tridiagonal
    }

    fn push_edge(&mut self, i: usize, j: usize, value: T) {
        let (i, j) = if i < j { (i, j) } else { (j, i) };
        debug_assert!(i != j);
        if j != i + 1 {
            self.tridiagonal = false;
        }
        self.upper.push((i, j, value));
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        if i == j {
            return self.diag[i];
        }
        let (i, j) = if i < j { (i, j) } else { (j, i) };
        self.upper
            .iter()
            .filter(|e| e.0 == i && e.1 == j)
            .fold(T::zero(), |acc, e| acc + e.2)
    }

    /// Row-major full storage.
    pub fn to_dense(&self) -> Vec<T> {
        let n = self.dimension();
        let mut a = vec![T::zero(); n * n];
        for (i, &d) in self.diag.iter().enumerate() {
            a[i * n + i] = d;
        }
        for &(i, j, v) in &self.upper {
            a[i * n + j] = a[i * n + j] + v;
            a[j * n + i] = a[j * n + i] + v;
        }
        a
    }

    /// Number of stored neighbours of each row.
    pub fn row_degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.dimension()];
        for &(i, j, _) in &self.upper {
            deg[i] += 1;
            deg[j] += 1;
        }
        deg
    }

    pub fn row_sums(&self) -> Vec<T> {
        let mut s = self.diag.clone();
        for &(i, j, v) in &self.upper {
            s[i] = s[i] + v;
            s[j] = s[j] + v;
        }
        s
    }

    /// Largest absolute row sum; bounds the spectral radius.
    pub fn gershgorin_bound(&self) -> T {
        let mut s: Vec<T> = self.diag.iter().map(|d| d.abs()).collect();
        for &(i, j, v) in &self.upper {
            s[i] = s[i] + v.abs();
            s[j] = s[j] + v.abs();
        }
        s.into_iter().fold(T::zero(), T::max)
    }

    /// Tridiagonal `(diag, off)` if the operator is a Jacobi matrix in
    /// index order.
    fn as_jacobi(&self) -> Option<(Vec<T>, Vec<T>)> {
        if !self.tridiagonal {
            return None;
        }
        let n = self.dimension();
        let mut off = vec![T::zero(); n.saturating_sub(1)];
        for &(i, _, v) in &self.upper {
            off[i] = off[i] + v;
        }
        Some((self.diag.clone(), off))
    }

    /// `row col value` lines (0-based, upper triangle and diagonal).
    pub fn to_triplets(&self) -> String {
        let mut out = format!(
            "# symmetric {} {}\n",
            self.dimension(),
            self.diag.len() + self.upper.len()
        );
        let mut entries: Vec<(usize, usize, T)> = self.diag.iter().enumerate().map(|(i, &d)| (i, i, d)).collect();
        entries.extend(self.upper.iter().copied());
        entries.sort_by_key(|e| (e.0, e.1));
        for (i, j, v) in entries {
            let _ = writeln!(out, "{i} {j} {:.16e}", v.as_f64());
        }
        out
    }
}

fn assemble<T: Scalar>(spec: &TreeSpec, depth: u64, laplacian: bool) -> Result<SymOperator<T>> {
    let idx = enumerate_vertices(spec, depth)?;
    let mut op = SymOperator::zeros(idx.total);
    op.upper.reserve(idx.total.saturating_sub(1));
    for v in 0..idx.total {
        for c in idx.children(v) {
            op.push_edge(v, c, T::one());
        }
    }
    if laplacian {
        for (v, deg) in op.row_degrees().into_iter().enumerate() {
            op.diag[v] = -T::of_u64(deg as u64);
        }
    }
    Ok(op)
}

/// Adjacency operator of the tree truncated at generation `depth`.
pub fn assemble_delta<T: Scalar>(spec: &TreeSpec, depth: u64) -> Result<SymOperator<T>> {
    assemble(spec, depth, false)
}

/// Adjacency minus degree, degrees counted inside the truncation.
pub fn assemble_delta_tilde<T: Scalar>(spec: &TreeSpec, depth: u64) -> Result<SymOperator<T>> {
    assemble(spec, depth, true)
}

/// Subtracts `tan(rho)` from the root diagonal entry.
pub fn apply_root_boundary<T: Scalar>(op: &SymOperator<T>, rho: T) -> Result<SymOperator<T>> {
    if !(rho.abs() < T::FRAC_PI_2()) {
        return Err(Error::domain("rho", "must lie in (-pi/2, pi/2)"));
    }
    let mut out = op.clone();
    if let Some(root) = out.diag.first_mut() {
        *root = *root - rho.tan();
    }
    Ok(out)
}

/// Elimination order of an acyclic operator graph: children before parents,
/// each vertex with the weight of the edge to its parent.
struct Forest<T> {
    order: Vec<usize>,
    parent: Vec<Option<(usize, T)>>,
}

impl<T: Scalar> SymOperator<T> {
    fn forest(&self) -> Option<Forest<T>> {
        let n = self.dimension();
        let mut adj: Vec<Vec<(usize, T)>> = vec![Vec::new(); n];
        for &(i, j, v) in &self.upper {
            adj[i].push((j, v));
            adj[j].push((i, v));
        }
        let mut parent: Vec<Option<(usize, T)>> = vec![None; n];
        let mut seen = vec![false; n];
        let mut bfs = Vec::with_capacity(n);
        for root in 0..n {
            if seen[root] {
                continue;
            }
            seen[root] = true;
            let start = bfs.len();
            bfs.push(root);
            let mut head = start;
            while head < bfs.len() {
                let v = bfs[head];
                head += 1;
                let mut parent_edge_used = false;
                for &(w, weight) in &adj[v] {
                    if !parent_edge_used && parent[v].is_some_and(|(p, _)| p == w) {
                        parent_edge_used = true;
                        continue;
                    }
                    if seen[w] {
                        return None;
                    }
                    seen[w] = true;
                    parent[w] = Some((v, weight));
                    bfs.push(w);
                }
            }
        }
        bfs.reverse();
        Some(Forest { order: bfs, parent })
    }

    /// Number of eigenvalues below `x`: by Sylvester's law of inertia, the
    /// negative pivots of `A - x` eliminated leaves-first, which on a forest
    /// produces no fill-in.
    fn count_below(&self, forest: &Forest<T>, x: T, pivmin: T) -> usize {
        let mut acc = vec![T::zero(); self.dimension()];
        let mut negative = 0;
        for &v in &forest.order {
            let mut pivot = self.diag[v] - x - acc[v];
            if pivot.abs() < pivmin {
                pivot = -pivmin;
            }
            if pivot < T::zero() {
                negative += 1;
            }
            if let Some((p, w)) = forest.parent[v] {
                acc[p] = acc[p] + w * w / pivot;
            }
        }
        negative
    }

    /// All eigenvalues of an operator whose graph is a forest, by bisection
    /// on inertia counts; `None` if the graph has a cycle. Clusters closer
    /// than a few ulps of the spectral radius are returned as one value with
    /// its multiplicity.
    pub fn forest_eigenvalues(&self) -> Option<Vec<T>> {
        let forest = self.forest()?;
        let n = self.dimension();
        let bound = self.gershgorin_bound() + T::one();
        let max_w2 = self.upper.iter().fold(T::min_positive_value(), |m, e| m.max(e.2 * e.2));
        let pivmin = T::min_positive_value().sqrt().max(T::epsilon() * T::epsilon() * max_w2);
        let tol = T::epsilon() * T::of(8.0) * bound;
        let mut out = Vec::with_capacity(n);
        // (lo, hi, count below lo, count below hi), upper halves on top.
        let mut stack = vec![(-bound, bound, 0usize, n)];
        while let Some((lo, hi, clo, chi)) = stack.pop() {
            if chi == clo {
                continue;
            }
            let mid = (lo + hi) * T::of(0.5);
            if hi - lo <= tol || mid <= lo || mid >= hi {
                out.extend(std::iter::repeat_n(mid, chi - clo));
                continue;
            }
            let cm = self.count_below(&forest, mid, pivmin);
            stack.push((mid, hi, cm, chi));
            stack.push((lo, mid, clo, cm));
        }
        Some(out)
    }
}

/// All eigenvalues, ascending. Jacobi matrices take the tridiagonal QL path,
/// forests (every tree operator) bisection on inertia counts; anything else
/// is solved densely.
pub fn eigenvalues_sym<T: Scalar>(op: &SymOperator<T>) -> Result<Vec<T>> {
    if let Some((d, e)) = op.as_jacobi() {
        return tridiagonal_eigenvalues(&d, &e);
    }
    match op.forest_eigenvalues() {
        Some(values) => Ok(values),
        None => dense_eigenvalues(&op.to_dense(), op.dimension()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::make_gamma_tree;
    use num_bigint::BigUint;

    fn star_spec() -> TreeSpec {
        TreeSpec::explicit_u64(&[1], &[2]).unwrap()
    }

    #[test]
    fn enumeration_counts() {
        assert_eq!(enumerate_vertices(&star_spec(), 2).unwrap().total, 4);
        assert_eq!(enumerate_vertices(&star_spec(), 0).unwrap().total, 1);
        let g = make_gamma_tree(2, &"3".parse().unwrap(), 4).unwrap();
        let idx = enumerate_vertices(&g, 9).unwrap();
        assert_eq!(BigUint::from(idx.total), ball_count(&g, 9).count);
        assert_eq!(idx.total, 1 + 3 + 2 * 6);
    }

    #[test]
    fn parent_child_arithmetic() {
        let s = TreeSpec::explicit_u64(&[1, 3], &[3, 2]).unwrap();
        let idx = enumerate_vertices(&s, 5).unwrap();
        for v in 0..idx.total {
            for c in idx.children(v) {
                assert_eq!(idx.parent(c), Some(v));
            }
        }
        assert_eq!(idx.parent(0), None);
        let last = idx.total - 1;
        assert!(idx.children(last).is_empty());
    }

    #[test]
    fn size_guard() {
        let l: Vec<u64> = (1..=25).collect();
        let s = TreeSpec::explicit_u64(&l, &[2; 25]).unwrap();
        assert!(matches!(enumerate_vertices(&s, 25), Err(Error::SizeGuard { .. })));
    }

    #[test]
    fn delta_star_with_tail() {
        let op: SymOperator<f64> = assemble_delta(&star_spec(), 2).unwrap();
        let ev = eigenvalues_sym(&op).unwrap();
        let s3 = 3f64.sqrt();
        for (x, y) in ev.iter().zip([-s3, 0.0, 0.0, s3]) {
            assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn delta_path() {
        let path = TreeSpec::explicit_u64(&[], &[]).unwrap();
        let op: SymOperator<f64> = assemble_delta(&path, 2).unwrap();
        let ev = eigenvalues_sym(&op).unwrap();
        let s2 = 2f64.sqrt();
        for (x, y) in ev.iter().zip([-s2, 0.0, s2]) {
            assert!((x - y).abs() < 1e-12);
        }
        let op: SymOperator<f64> = assemble_delta(&path, 0).unwrap();
        assert_eq!(op.to_dense(), vec![0.0]);
    }

    #[test]
    fn delta_tilde_degrees_and_semidefinite() {
        let op: SymOperator<f64> = assemble_delta_tilde(&star_spec(), 2).unwrap();
        assert_eq!(op.diag(), [-1.0, -3.0, -1.0, -1.0]);
        assert!(op.row_sums().iter().all(|s| *s == 0.0));
        let g = make_gamma_tree(3, &"2.5".parse().unwrap(), 4).unwrap();
        let op: SymOperator<f64> = assemble_delta_tilde(&g, 12).unwrap();
        assert!(op.row_sums().iter().all(|s| *s == 0.0));
        let ev = eigenvalues_sym(&op).unwrap();
        assert!(*ev.last().unwrap() <= 1e-10);
    }

    #[test]
    fn root_boundary() {
        let op: SymOperator<f64> = assemble_delta(&star_spec(), 2).unwrap();
        assert_eq!(apply_root_boundary(&op, 0.0).unwrap(), op);
        let b = apply_root_boundary(&op, std::f64::consts::FRAC_PI_4).unwrap();
        assert!((b.diag()[0] + 1.0).abs() < 1e-15);
        assert_eq!(&b.diag()[1..], &op.diag()[1..]);
        assert_eq!(b.upper(), op.upper());
        assert!(apply_root_boundary(&op, 2.0).is_err());
    }

    #[test]
    fn nesting_and_gershgorin() {
        let g = make_gamma_tree(2, &"2.5".parse().unwrap(), 4).unwrap();
        let small: SymOperator<f64> = assemble_delta(&g, 7).unwrap();
        let big: SymOperator<f64> = assemble_delta(&g, 8).unwrap();
        let n = small.dimension();
        let (ds, db) = (small.to_dense(), big.to_dense());
        let m = big.dimension();
        for i in 0..n {
            for j in 0..n {
                assert_eq!(ds[i * n + j], db[i * m + j]);
            }
        }
        let ev = eigenvalues_sym(&big).unwrap();
        let rho = ev.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        assert!(rho <= big.gershgorin_bound() + 1e-12);
        let maxdeg = *big.row_degrees().iter().max().unwrap() as f64;
        assert!(rho <= maxdeg);
    }

    #[test]
    fn dense_storage_is_exactly_symmetric() {
        let g = make_gamma_tree(3, &"2".parse().unwrap(), 3).unwrap();
        let op: SymOperator<f64> = assemble_delta_tilde(&g, 6).unwrap();
        let n = op.dimension();
        let a = op.to_dense();
        for i in 0..n {
            for j in 0..n {
                assert_eq!(a[i * n + j], a[j * n + i]);
            }
        }
        assert!(!op.is_tridiagonal());
    }

    #[test]
    fn triplet_export() {
        let op: SymOperator<f64> = assemble_delta(&star_spec(), 2).unwrap();
        let t = op.to_triplets();
        let mut lines = t.lines();
        assert_eq!(lines.next(), Some("# symmetric 4 7"));
        let parsed: Vec<(usize, usize, f64)> = lines
            .map(|l| {
                let mut it = l.split_whitespace();
                (
                    it.next().unwrap().parse().unwrap(),
                    it.next().unwrap().parse().unwrap(),
                    it.next().unwrap().parse().unwrap(),
                )
            })
            .collect();
        for (i, j, v) in parsed {
            assert_eq!(op.get(i, j), v);
        }
    }

    #[test]
    fn forest_bisection_matches_dense() {
        let specs = [
            (TreeSpec::explicit_u64(&[1, 3, 6], &[3, 2, 4]).unwrap(), 9),
            (make_gamma_tree(2, &"5/2".parse().unwrap(), 5).unwrap(), 14),
            (star_spec(), 5),
        ];
        for (spec, depth) in &specs {
            for op in [
                assemble_delta::<f64>(spec, *depth).unwrap(),
                apply_root_boundary(&assemble_delta_tilde::<f64>(spec, *depth).unwrap(), 0.4).unwrap(),
            ] {
                let fast = op.forest_eigenvalues().unwrap();
                let dense = dense_eigenvalues(&op.to_dense(), op.dimension()).unwrap();
                assert_eq!(fast.len(), dense.len());
                for (a, b) in fast.iter().zip(&dense) {
                    assert!((a - b).abs() < 1e-11, "{a} vs {b}");
                }
            }
        }
        // Two disjoint paths form a forest.
        let mut op = SymOperator::<f64>::zeros(4);
        op.push_edge(0, 1, 1.0);
        op.push_edge(2, 3, 2.0);
        let e = op.forest_eigenvalues().unwrap();
        for (a, b) in e.iter().zip([-2.0, -1.0, 1.0, 2.0]) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn cycles_fall_back_to_dense() {
        let mut op = SymOperator::<f64>::zeros(3);
        op.push_edge(0, 1, 1.0);
        op.push_edge(1, 2, 1.0);
        op.push_edge(0, 2, 1.0);
        assert!(op.forest_eigenvalues().is_none());
        let e = eigenvalues_sym(&op).unwrap();
        assert!((e[0] + 1.0).abs() < 1e-12 && (e[1] + 1.0).abs() < 1e-12 && (e[2] - 2.0).abs() < 1e-12);
    }
}
