//! Exact splitting of the tree Laplacians into Jacobi matrices.
//!
//! The space of functions on a spherically homogeneous tree decomposes into
//! radial sectors. Sector `n` lives on generations `R_n, R_n + 1, ...` with
//! `R_0 = 0` and `R_n = L_n + 1`; it occurs with multiplicity `M_n`, and on
//! it the operator acts as the Jacobi matrix `J_n` whose index `j` stands
//! for generation `R_n + j - 1`. The off-diagonal entry between `j` and
//! `j + 1` is `sqrt(k_m)` when generation `R_n + j - 1` is the branching
//! generation `L_m` (`m > n`) and 1 otherwise. For the degree-subtracted
//! Laplacian the diagonal carries minus the degree of that generation.
//!
//! The unitary is never built. The equivalence is certified by the exact
//! vertex-count identity and by comparing sorted spectra at a truncation.

use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::eigen::{compare_spectra, tridiagonal_eigenvalues, DENSE_GUARD};
use crate::error::{Error, Result};
use crate::operator::{assemble_delta, assemble_delta_tilde, eigenvalues_sym, SymOperator};
use crate::scalar::Scalar;
use crate::tree::{ball_count, kappa, TreeSpec};

/// Which tree Laplacian is decomposed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Variant {
    /// Plain adjacency operator.
    #[serde(rename = "delta")]
    Adjacency,
    /// Adjacency minus degree.
    #[serde(rename = "delta-tilde")]
    Laplacian,
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::Adjacency => "delta",
            Variant::Laplacian => "delta-tilde",
        })
    }
}

impl std::str::FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "delta" => Ok(Variant::Adjacency),
            "delta-tilde" => Ok(Variant::Laplacian),
            other => Err(Error::domain("variant", format!("unknown variant {other:?}"))),
        }
    }
}

/// Off-diagonal `a(j)` and diagonal `b(j)`, `j >= 1`, of a Jacobi matrix that
/// is free (`a = 1`, `b = bulk`) except at finitely many bumps.
#[derive(Clone, Debug, PartialEq)]
pub struct JacobiCoefficients<T> {
    /// `(j, k)` with `a(j) = sqrt(k)`, sorted by `j`.
    bumps: Vec<(u64, u64)>,
    bulk_diag: T,
    /// Whether `b(j) = -(k + 1)` at a bump `j` (degree-subtracted case).
    bump_diag: bool,
    /// Explicit diagonal values, sorted by `j`; take precedence.
    overrides: Vec<(u64, T)>,
}

impl<T: Scalar> JacobiCoefficients<T> {
    /// `a = 1`, `b = 0`.
    pub fn free() -> Self {
        Self::with_bumps(Vec::new(), T::zero(), false)
    }

    fn with_bumps(bumps: Vec<(u64, u64)>, bulk_diag: T, bump_diag: bool) -> Self {
        Self {
            bumps,
            bulk_diag,
            bump_diag,
            overrides: Vec::new(),
        }
    }

    /// Adjacency-type coefficients with `a(j) = sqrt(k)` at the listed
    /// `(j, k)` pairs.
    pub fn from_bumps(mut bumps: Vec<(u64, u64)>) -> Self {
        bumps.sort_unstable();
        Self::with_bumps(bumps, T::zero(), false)
    }

    pub fn bumps(&self) -> &[(u64, u64)] {
        &self.bumps
    }

    fn bump_at(&self, j: u64) -> Option<u64> {
        self.bumps
            .binary_search_by_key(&j, |b| b.0)
            .ok()
            .map(|i| self.bumps[i].1)
    }

    /// `a(j)`, with the convention `a(0) = 1`.
    pub fn a(&self, j: u64) -> T {
        match self.bump_at(j) {
            Some(k) => T::of_u64(k).sqrt(),
            None => T::one(),
        }
    }

    pub fn b(&self, j: u64) -> T {
        if let Ok(i) = self.overrides.binary_search_by_key(&j, |o| o.0) {
            return self.overrides[i].1;
        }
        match self.bump_at(j) {
            Some(k) if self.bump_diag => -T::of_u64(k + 1),
            _ => self.bulk_diag,
        }
    }

    /// Replaces `b(j)`.
    pub fn set_diag(mut self, j: u64, value: T) -> Self {
        match self.overrides.binary_search_by_key(&j, |o| o.0) {
            Ok(i) => self.overrides[i].1 = value,
            Err(i) => self.overrides.insert(i, (j, value)),
        }
        self
    }

    /// Root boundary condition: `b(1) -> b(1) - tan(rho)`.
    pub fn with_boundary(self, rho: T) -> Result<Self> {
        if !(rho.abs() < T::FRAC_PI_2()) {
            return Err(Error::domain("rho", "must lie in (-pi/2, pi/2)"));
        }
        let b1 = self.b(1) - rho.tan();
        Ok(self.set_diag(1, b1))
    }

    /// The `size x size` leading principal block.
    pub fn truncate(&self, size: u64) -> Result<SymOperator<T>> {
        let b = (1..=size).map(|j| self.b(j)).collect();
        let a: Vec<T> = (1..size).map(|j| self.a(j)).collect();
        SymOperator::tridiagonal(b, &a)
    }
}

/// `R_n`: 0 for the root sector, `L_n + 1` otherwise (`None` beyond `u64`).
pub fn sector_offset(spec: &TreeSpec, n: usize) -> Option<u64> {
    if n == 0 {
        Some(0)
    } else {
        spec.l_u64(n)?.checked_add(1)
    }
}

/// `M_0, ..., M_n_max`: `M_0 = 1`, `M_n = k_1 ... k_n - k_1 ... k_{n-1}`.
pub fn multiplicities(spec: &TreeSpec, n_max: usize) -> Result<Vec<BigUint>> {
    if n_max > spec.horizon() {
        return Err(Error::domain(
            "N",
            format!("{n_max} exceeds the {} branchings of the tree", spec.horizon()),
        ));
    }
    let mut out = Vec::with_capacity(n_max + 1);
    out.push(BigUint::one());
    let mut prod = BigUint::one();
    for &k in &spec.k()[..n_max] {
        let next = &prod * k;
        out.push(&next - &prod);
        prod = next;
    }
    Ok(out)
}

/// Coefficients of `J_n` for the chosen Laplacian.
pub fn block_coefficients<T: Scalar>(spec: &TreeSpec, n: usize, variant: Variant) -> Result<JacobiCoefficients<T>> {
    if n > spec.horizon() {
        return Err(Error::domain("n", "beyond the tree's branchings"));
    }
    let r_n = sector_offset(spec, n).ok_or(Error::Overflow("sector offset"))?;
    let bumps = (n + 1..=spec.horizon())
        .map_while(|m| Some((sector_offset(spec, m)? - r_n, spec.k()[m - 1])))
        .collect();
    Ok(match variant {
        Variant::Adjacency => JacobiCoefficients::with_bumps(bumps, T::zero(), false),
        Variant::Laplacian => {
            let c = JacobiCoefficients::with_bumps(bumps, -T::of_u64(2), true);
            // The root has no parent: its degree is kappa_0 = 1.
            if n == 0 {
                c.set_diag(1, -T::one())
            } else {
                c
            }
        }
    })
}

/// Sector data of the tree truncated at generation `depth`.
#[derive(Clone, Debug)]
pub struct DecompositionPlan {
    spec: TreeSpec,
    depth: u64,
    variant: Variant,
    offsets: Vec<u64>,
    multiplicities: Vec<BigUint>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BlockSummary {
    pub n: usize,
    pub offset: u64,
    /// Decimal string: multiplicities outgrow 64 bits quickly.
    pub multiplicity: String,
    pub size: u64,
    /// `(j, k)`: `a(j) = sqrt(k)` inside the truncated block.
    pub bumps: Vec<(u64, u64)>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PlanSummary {
    pub variant: Variant,
    pub depth: u64,
    pub blocks: Vec<BlockSummary>,
}

impl DecompositionPlan {
    pub fn new(spec: &TreeSpec, depth: u64, variant: Variant) -> Result<Self> {
        let offsets: Vec<u64> = (0..=spec.horizon())
            .map_while(|n| sector_offset(spec, n))
            .take_while(|&r| r <= depth)
            .collect();
        let multiplicities = multiplicities(spec, offsets.len() - 1)?;
        Ok(Self {
            spec: spec.clone(),
            depth,
            variant,
            offsets,
            multiplicities,
        })
    }

    /// Number of sectors meeting the truncation.
    pub fn block_count(&self) -> usize {
        self.offsets.len()
    }

    pub fn depth(&self) -> u64 {
        self.depth
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn offsets(&self) -> &[u64] {
        &self.offsets
    }

    pub fn multiplicities(&self) -> &[BigUint] {
        &self.multiplicities
    }

    /// `depth - R_n + 1`, or `None` when sector `n` starts below the cut.
    pub fn block_size(&self, n: usize) -> Option<u64> {
        self.offsets.get(n).map(|r| self.depth - r + 1)
    }

    /// `sum_n M_n (D - R_n + 1)`.
    pub fn counted_vertices(&self) -> BigUint {
        self.multiplicities
            .iter()
            .zip(&self.offsets)
            .map(|(m, r)| m * (self.depth - r + 1))
            .sum()
    }

    pub fn coefficients<T: Scalar>(&self, n: usize) -> Result<JacobiCoefficients<T>> {
        block_coefficients(&self.spec, n, self.variant)
    }

    /// `J_n` restricted to generations `R_n..=depth`; `None` if the sector is
    /// empty. In the degree-subtracted case the last row uses the degree
    /// inside the truncation (the parent only).
    pub fn truncated_block<T: Scalar>(&self, n: usize) -> Result<Option<SymOperator<T>>> {
        let Some(size) = self.block_size(n) else {
            return Ok(None);
        };
        let coeffs = self.coefficients::<T>(n)?;
        let coeffs = match self.variant {
            Variant::Adjacency => coeffs,
            Variant::Laplacian => {
                let edge_degree = if self.depth >= 1 { T::one() } else { T::zero() };
                coeffs.set_diag(size, -edge_degree)
            }
        };
        coeffs.truncate(size).map(Some)
    }

    pub fn summary(&self) -> PlanSummary {
        let blocks = (0..self.block_count())
            .map(|n| {
                let r = self.offsets[n];
                let size = self.depth - r + 1;
                let bumps = self
                    .spec
                    .l_small()
                    .iter()
                    .zip(self.spec.k())
                    .skip(n)
                    .map(|(&l, &k)| (l + 1 - r, k))
                    .take_while(|&(j, _)| j < size)
                    .collect();
                BlockSummary {
                    n,
                    offset: r,
                    multiplicity: self.multiplicities[n].to_string(),
                    size,
                    bumps,
                }
            })
            .collect();
        PlanSummary {
            variant: self.variant,
            depth: self.depth,
            blocks,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecompositionReport {
    pub variant: Variant,
    pub depth: u64,
    pub vertices: u64,
    pub blocks: usize,
    pub max_deviation: f64,
    pub tolerance: f64,
    pub count_identity: bool,
    pub pass: bool,
}

/// Relative tolerance of the spectral comparison in `f64`.
pub const SPECTRAL_TOLERANCE: f64 = 1e-9;

/// Compares the spectrum of the truncated tree operator with that of
/// `⊕ M_n J_n` truncated at the same depth, and checks the count identity.
pub fn verify_decomposition(spec: &TreeSpec, depth: u64, variant: Variant) -> Result<DecompositionReport> {
    verify_decomposition_with::<f64>(spec, depth, variant, SPECTRAL_TOLERANCE)
}

pub fn verify_decomposition_with<T: Scalar>(
    spec: &TreeSpec,
    depth: u64,
    variant: Variant,
    rel: T,
) -> Result<DecompositionReport> {
    let plan = DecompositionPlan::new(spec, depth, variant)?;
    let vertices = ball_count(spec, depth).count;
    let count_identity = plan.counted_vertices() == vertices;
    let n_vertices = vertices.to_u64().unwrap_or(u64::MAX);
    if n_vertices > DENSE_GUARD as u64 {
        return Err(Error::SizeGuard {
            what: "dense eigensolve dimension",
            actual: vertices.to_string(),
            limit: DENSE_GUARD as u64,
        });
    }

    let tree: SymOperator<T> = match variant {
        Variant::Adjacency => assemble_delta(spec, depth)?,
        Variant::Laplacian => assemble_delta_tilde(spec, depth)?,
    };
    let tree_eigs = eigenvalues_sym(&tree)?;

    let per_block: Vec<(Vec<T>, usize)> = (0..plan.block_count())
        .into_par_iter()
        .map(|n| {
            let block = plan.truncated_block::<T>(n)?.expect("sector within cut");
            let (d, e) = (
                block.diag().to_vec(),
                block.upper().iter().map(|x| x.2).collect::<Vec<_>>(),
            );
            let copies = plan.multiplicities()[n]
                .to_usize()
                .ok_or(Error::Overflow("multiplicity"))?;
            Ok((tridiagonal_eigenvalues(&d, &e)?, copies))
        })
        .collect::<Result<_>>()?;
    let mut block_eigs = Vec::with_capacity(tree_eigs.len());
    for (eigs, copies) in per_block {
        for _ in 0..copies {
            block_eigs.extend_from_slice(&eigs);
        }
    }
    block_eigs.sort_by(|a, b| a.partial_cmp(b).expect("finite eigenvalues"));
    if block_eigs.len() != tree_eigs.len() {
        return Err(Error::DimensionMismatch(format!(
            "tree has {} eigenvalues, blocks {}",
            tree_eigs.len(),
            block_eigs.len()
        )));
    }
    let cmp = compare_spectra(&tree_eigs, &block_eigs, rel)?;
    Ok(DecompositionReport {
        variant,
        depth,
        vertices: n_vertices,
        blocks: plan.block_count(),
        max_deviation: cmp.max_deviation.as_f64(),
        tolerance: cmp.tolerance.as_f64(),
        count_identity,
        pass: cmp.pass && count_identity,
    })
}

/// The two sides of the count identity at depth `depth`.
pub fn count_identity(spec: &TreeSpec, depth: u64) -> Result<(BigUint, BigUint)> {
    let plan = DecompositionPlan::new(spec, depth, Variant::Adjacency)?;
    Ok((plan.counted_vertices(), ball_count(spec, depth).count))
}

/// Branching number at the generation labelled by index `j` of sector `n`.
pub fn sector_kappa(spec: &TreeSpec, n: usize, j: u64) -> Option<u64> {
    Some(kappa(spec, sector_offset(spec, n)? + j - 1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::make_gamma_tree;
    use proptest::prelude::*;

    fn star() -> TreeSpec {
        TreeSpec::explicit_u64(&[1], &[2]).unwrap()
    }

    #[test]
    fn multiplicity_values() {
        let s = TreeSpec::explicit_u64(&[1, 3, 6, 10], &[2, 2, 2, 2]).unwrap();
        let m: Vec<u64> = multiplicities(&s, 4)
            .unwrap()
            .iter()
            .map(|x| x.to_u64().unwrap())
            .collect();
        assert_eq!(m, [1, 1, 2, 4, 8]);
        let s = TreeSpec::explicit_u64(&[2, 5], &[3, 2]).unwrap();
        let m: Vec<u64> = multiplicities(&s, 2)
            .unwrap()
            .iter()
            .map(|x| x.to_u64().unwrap())
            .collect();
        assert_eq!(m, [1, 2, 3]);
        assert_eq!(multiplicities(&s, 0).unwrap(), [BigUint::one()]);
        assert!(multiplicities(&s, 3).is_err());
    }

    #[test]
    fn adjacency_block_coefficients() {
        let c = block_coefficients::<f64>(&star(), 0, Variant::Adjacency).unwrap();
        assert!((c.a(2) - 2f64.sqrt()).abs() < 1e-15);
        for j in [0, 1, 3, 4, 100] {
            assert_eq!(c.a(j), 1.0);
        }
        assert!((0..10).all(|j| c.b(j) == 0.0));
        let c1 = block_coefficients::<f64>(&star(), 1, Variant::Adjacency).unwrap();
        assert!(c1.bumps().is_empty());
        assert!((0..10).all(|j| c1.a(j) == 1.0));
    }

    #[test]
    fn laplacian_block_coefficients() {
        let c = block_coefficients::<f64>(&star(), 0, Variant::Laplacian).unwrap();
        assert_eq!(c.b(2), -3.0);
        assert_eq!(c.b(1), -1.0);
        assert_eq!(c.b(3), -2.0);
        assert_eq!(c.b(50), -2.0);
        let c1 = block_coefficients::<f64>(&star(), 1, Variant::Laplacian).unwrap();
        assert_eq!(c1.b(1), -2.0);
    }

    #[test]
    fn star_blocks() {
        let plan = DecompositionPlan::new(&star(), 2, Variant::Adjacency).unwrap();
        let j0: SymOperator<f64> = plan.truncated_block(0).unwrap().unwrap();
        let s2 = 2f64.sqrt();
        assert_eq!(j0.to_dense(), vec![0.0, 1.0, 0.0, 1.0, 0.0, s2, 0.0, s2, 0.0]);
        // Characteristic polynomial -x^3 + 3x has roots 0, ±sqrt(3).
        let ev = eigenvalues_sym(&j0).unwrap();
        for (x, y) in ev.iter().zip([-3f64.sqrt(), 0.0, 3f64.sqrt()]) {
            assert!((x - y).abs() < 1e-12);
        }
        let j1: SymOperator<f64> = plan.truncated_block(1).unwrap().unwrap();
        assert_eq!(j1.to_dense(), vec![0.0]);
        let shallow = DecompositionPlan::new(&star(), 1, Variant::Adjacency).unwrap();
        assert!(shallow.truncated_block::<f64>(1).unwrap().is_none());
    }

    #[test]
    fn verify_small_cases() {
        for variant in [Variant::Adjacency, Variant::Laplacian] {
            for depth in 0..=4 {
                let r = verify_decomposition(&star(), depth, variant).unwrap();
                assert!(r.pass, "{variant} depth {depth}: {r:?}");
            }
        }
        let r = verify_decomposition(&star(), 2, Variant::Adjacency).unwrap();
        assert_eq!((r.vertices, r.blocks), (4, 2));
    }

    #[test]
    fn verify_gamma_five_halves() {
        let g = make_gamma_tree(2, &"5/2".parse().unwrap(), 6).unwrap();
        for variant in [Variant::Adjacency, Variant::Laplacian] {
            let r = verify_decomposition(&g, 15, variant).unwrap();
            assert!(r.pass, "{r:?}");
        }
    }

    #[test]
    fn f32_instantiation() {
        let g = make_gamma_tree(3, &"2".parse().unwrap(), 4).unwrap();
        let r = verify_decomposition_with::<f32>(&g, 9, Variant::Laplacian, 1e-4).unwrap();
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn boundary_condition() {
        let c = JacobiCoefficients::<f64>::free()
            .with_boundary(std::f64::consts::FRAC_PI_4)
            .unwrap();
        assert!((c.b(1) + 1.0).abs() < 1e-15);
        assert_eq!(c.b(2), 0.0);
        assert!(JacobiCoefficients::<f64>::free().with_boundary(1.6).is_err());
    }

    #[test]
    fn plan_summary() {
        let g = make_gamma_tree(2, &"5/2".parse().unwrap(), 6).unwrap();
        let plan = DecompositionPlan::new(&g, 15, Variant::Adjacency).unwrap();
        let s = plan.summary();
        let offsets: Vec<u64> = s.blocks.iter().map(|b| b.offset).collect();
        assert_eq!(offsets, [0, 3, 7]);
        assert_eq!(s.blocks[0].bumps, [(3, 2), (7, 2)]);
        assert_eq!(s.blocks[1].bumps, [(4, 2)]);
        assert_eq!(s.blocks[2].size, 9);
        let mults: Vec<&str> = s.blocks.iter().map(|b| b.multiplicity.as_str()).collect();
        assert_eq!(mults, ["1", "1", "2"]);
    }

    #[test]
    fn variant_parsing() {
        assert_eq!("delta".parse::<Variant>().unwrap(), Variant::Adjacency);
        assert_eq!("delta-tilde".parse::<Variant>().unwrap(), Variant::Laplacian);
        assert!("laplace".parse::<Variant>().is_err());
        assert_eq!(Variant::Laplacian.to_string(), "delta-tilde");
    }

    fn sparse_spec() -> impl Strategy<Value = TreeSpec> {
        (1usize..5, prop::collection::vec((1u64..6, 2u64..5), 1..5)).prop_map(|(first, steps)| {
            let mut l = Vec::new();
            let mut k = Vec::new();
            let mut cur = first as u64;
            for (i, (gap, kn)) in steps.into_iter().enumerate() {
                cur += if i == 0 { 0 } else { gap + i as u64 };
                l.push(cur);
                k.push(kn);
            }
            TreeSpec::explicit_u64(&l, &k).unwrap()
        })
    }

    proptest! {
        #[test]
        fn count_identity_holds(spec in sparse_spec(), depth in 0u64..40) {
            let (lhs, rhs) = count_identity(&spec, depth).unwrap();
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn tail_property(spec in sparse_spec(), extra in 0u64..10) {
            let depth = spec.l_small().last().unwrap() + 1 + extra;
            for variant in [Variant::Adjacency, Variant::Laplacian] {
                let plan = DecompositionPlan::new(&spec, depth, variant).unwrap();
                for n in 1..plan.block_count() {
                    let cut = (plan.offsets()[n] - plan.offsets()[n - 1]) as usize;
                    let prev = plan.truncated_block::<f64>(n - 1).unwrap().unwrap();
                    let cur = plan.truncated_block::<f64>(n).unwrap().unwrap();
                    // Off-diagonals agree on the tail; the diagonal also does,
                    // except for the root row of the root sector.
                    let pd = prev.to_dense();
                    let cd = cur.to_dense();
                    let (np, nc) = (prev.dimension(), cur.dimension());
                    prop_assert_eq!(np - cut, nc);
                    for i in 0..nc {
                        for j in 0..nc {
                            prop_assert_eq!(pd[(i + cut) * np + j + cut], cd[i * nc + j]);
                        }
                    }
                }
            }
        }

        #[test]
        fn random_decompositions(spec in sparse_spec(), extra in 0u64..6) {
            let depth = spec.l_small().last().unwrap() + extra;
            if ball_count(&spec, depth).count <= BigUint::from(600u32) {
                for variant in [Variant::Adjacency, Variant::Laplacian] {
                    let r = verify_decomposition(&spec, depth, variant).unwrap();
                    prop_assert!(r.pass, "{:?}", r);
                }
            }
        }
    }
}
