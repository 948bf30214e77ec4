//! Spherically homogeneous rooted trees of type `{L_n, k_n}`.
//!
//! A tree is stored as its branching generations `L_1 < L_2 < ...` and the
//! branching numbers `k_n >= 2`: every vertex of generation `L_n` has `k_n`
//! forward neighbours, every other vertex exactly one. Generations are
//! exact big integers because the geometric families outgrow `u64` long
//! before the dynamics stop being interesting.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bigmath::{big_ln, Gamma};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// How the branching generations were produced.
#[derive(Clone, Debug, PartialEq)]
pub enum Family {
    Explicit,
    /// `L_n = floor(gamma^n)`, `k_n = k`.
    Gamma {
        k: u64,
        gamma: Gamma,
    },
    /// `L_n = floor(gamma^n) + omega_n`, `k_n = k`.
    Omega {
        k: u64,
        gamma: Gamma,
        seed: u64,
        stream: u64,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct TreeSpec {
    l: Vec<BigUint>,
    k: Vec<u64>,
    family: Family,
    /// Prefix of `l` that fits in a `u64`, for cheap lookups.
    l_small: Vec<u64>,
}

/// The random offsets of an omega-family tree.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OmegaSample {
    /// `omega[n-1]` is `omega_n`, drawn from `{-n, ..., n}`.
    pub omega: Vec<i64>,
    pub seed: u64,
    pub stream: u64,
    /// Number of redraws spent repairing small-n collisions.
    pub redraws: u64,
    /// Whether `gamma > 2`, under which the random family has the predicted spectral phases.
    pub hypothesis_holds: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BallCount {
    pub r: u64,
    pub count: BigUint,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Validation {
    /// Gaps grow over the horizon (nondecreasing in the last half and the
    /// last gap exceeds the first). Sparsity is asymptotic; this is a report.
    pub sparse: bool,
    pub normal: bool,
    pub monotone: bool,
    pub horizon: usize,
}

impl TreeSpec {
    /// Explicit finite type; beyond `L_N` the tree is a bundle of rays.
    pub fn explicit(l: Vec<BigUint>, k: Vec<u64>) -> Result<Self> {
        Self::build(l, k, Family::Explicit)
    }

    pub fn explicit_u64(l: &[u64], k: &[u64]) -> Result<Self> {
        Self::explicit(l.iter().map(|&x| BigUint::from(x)).collect(), k.to_vec())
    }

    fn build(l: Vec<BigUint>, k: Vec<u64>, family: Family) -> Result<Self> {
        if l.len() != k.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} branching generations but {} branching numbers",
                l.len(),
                k.len()
            )));
        }
        if let Some(pos) = k.iter().position(|&kn| kn < 2) {
            return Err(Error::domain("k", format!("k_{} = {} < 2", pos + 1, k[pos])));
        }
        if let Some(first) = l.first() {
            if first.is_zero() {
                return Err(Error::domain("L", "L_1 must be at least 1"));
            }
        }
        for i in 1..l.len() {
            if l[i] <= l[i - 1] {
                return Err(Error::NotStrictlyIncreasing { index: i + 1 });
            }
        }
        let l_small = l.iter().map_while(|x| x.to_u64()).collect();
        Ok(Self { l, k, family, l_small })
    }

    pub fn l(&self) -> &[BigUint] {
        &self.l
    }

    pub fn k(&self) -> &[u64] {
        &self.k
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    /// Number of branchings held (`N`).
    pub fn horizon(&self) -> usize {
        self.l.len()
    }

    /// `L_n` for 1-based `n`, if it fits in `u64`.
    pub fn l_u64(&self, n: usize) -> Option<u64> {
        self.l_small.get(n.checked_sub(1)?).copied()
    }

    /// Branching generations below `2^64`.
    pub fn l_small(&self) -> &[u64] {
        &self.l_small
    }

    /// `L_{n+1} - L_n` for `n = 1..N-1`.
    pub fn gaps(&self) -> Vec<BigUint> {
        self.l.windows(2).map(|w| &w[1] - &w[0]).collect()
    }

    /// The same family regenerated with `n` branchings. Explicit specs
    /// cannot be extended and are returned unchanged.
    pub fn with_horizon(&self, n: usize) -> Result<Self> {
        match &self.family {
            Family::Explicit => Ok(self.clone()),
            Family::Gamma { k, gamma } => make_gamma_tree(*k, gamma, n),
            Family::Omega { k, gamma, seed, stream } => {
                sample_omega_tree_stream(*k, gamma, n, *seed, *stream).map(|(_, t)| t)
            }
        }
    }

    /// Extends a generated family until `L_N > r`.
    fn covering(&self, r: u64) -> Result<Self> {
        if matches!(self.family, Family::Explicit) {
            return Ok(self.clone());
        }
        let mut spec = self.clone();
        while spec.l.last().is_none_or(|last| *last <= BigUint::from(r)) {
            spec = spec.with_horizon(spec.horizon().max(1) * 2)?;
        }
        Ok(spec)
    }
}

/// `kappa_j`: `k_n` if `j = L_n`, else 1.
pub fn kappa(spec: &TreeSpec, j: u64) -> u64 {
    match spec.l_small.binary_search(&j) {
        Ok(i) => spec.k[i],
        Err(_) => 1,
    }
}

/// Number of branchings strictly below generation `j`.
fn branchings_below(spec: &TreeSpec, j: u64) -> usize {
    spec.l_small.partition_point(|&l| l < j)
}

/// Number of vertices in generation `j`.
pub fn generation_size(spec: &TreeSpec, j: u64) -> Result<u64> {
    spec.k[..branchings_below(spec, j)]
        .iter()
        .try_fold(1u64, |acc, &k| acc.checked_mul(k))
        .ok_or(Error::Overflow("generation size"))
}

pub fn generation_size_big(spec: &TreeSpec, j: u64) -> BigUint {
    spec.k[..branchings_below(spec, j)]
        .iter()
        .fold(BigUint::one(), |acc, &k| acc * k)
}

/// `#S(r)`, the number of vertices within distance `r` of the root, summed
/// exactly segment by segment between branchings.
pub fn ball_count(spec: &TreeSpec, r: u64) -> BallCount {
    let mut count = BigUint::zero();
    let mut size = BigUint::one();
    let mut start = 0u64;
    for (&l, &k) in spec.l_small.iter().zip(&spec.k) {
        if l >= r {
            break;
        }
        count += &size * (l - start + 1);
        size *= k;
        start = l + 1;
    }
    count += &size * (r - start + 1);
    BallCount { r, count }
}

/// `log(gamma k) / log(gamma)`.
pub fn theoretical_dimension<T: Scalar>(k: u64, gamma: T) -> Result<T> {
    if k < 2 {
        return Err(Error::domain("k", "must be at least 2"));
    }
    if !(gamma > T::one()) {
        return Err(Error::domain("gamma", "must exceed 1"));
    }
    Ok((gamma * T::of_u64(k)).ln() / gamma.ln())
}

/// `log #S(r) / log r`. Generated families are extended to cover `r`.
pub fn estimate_dimension(spec: &TreeSpec, r: u64) -> Result<f64> {
    if r < 2 {
        return Err(Error::domain("r", "must be at least 2"));
    }
    let spec = spec.covering(r)?;
    let count = ball_count(&spec, r).count;
    Ok(big_ln(&count) / (r as f64).ln())
}

/// `L_n = floor(gamma^n)` for `n = 1..=n_max`, exactly.
pub fn make_gamma_tree(k: u64, gamma: &Gamma, n_max: usize) -> Result<TreeSpec> {
    if k < 2 {
        return Err(Error::domain("k", "must be at least 2"));
    }
    if !gamma.exceeds(1) {
        return Err(Error::domain("gamma", "must exceed 1"));
    }
    if n_max == 0 {
        return Err(Error::domain("N", "must be at least 1"));
    }
    let l: Vec<BigUint> = gamma.floor_powers().take(n_max).collect();
    TreeSpec::build(
        l,
        vec![k; n_max],
        Family::Gamma {
            k,
            gamma: gamma.clone(),
        },
    )
}

pub fn sample_omega_tree(k: u64, gamma: &Gamma, n_max: usize, seed: u64) -> Result<(OmegaSample, TreeSpec)> {
    sample_omega_tree_stream(k, gamma, n_max, seed, 0)
}

/// Generator for the omega offsets: ChaCha8 keyed by `seed`, with `stream`
/// selecting an independent sequence (one per Monte Carlo trial).
pub fn omega_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// `L_n = floor(gamma^n) + omega_n` with `omega_n` uniform on `{-n..n}`.
///
/// If a draw would give `L_1 < 1` or `L_n - L_{n-1} < 2`, `omega_n` alone is
/// redrawn; the accepted value is uniform on the valid offsets.
pub fn sample_omega_tree_stream(
    k: u64,
    gamma: &Gamma,
    n_max: usize,
    seed: u64,
    stream: u64,
) -> Result<(OmegaSample, TreeSpec)> {
    if k < 2 {
        return Err(Error::domain("k", "must be at least 2"));
    }
    if !gamma.exceeds(1) {
        return Err(Error::domain("gamma", "must exceed 1"));
    }
    if n_max == 0 {
        return Err(Error::domain("N", "must be at least 1"));
    }
    let mut rng = omega_rng(seed, stream);
    let mut omega = Vec::with_capacity(n_max);
    let mut l: Vec<BigUint> = Vec::with_capacity(n_max);
    let mut redraws = 0u64;
    for (idx, base) in gamma.floor_powers().take(n_max).enumerate() {
        let n = idx as i64 + 1;
        let lowest = match l.last() {
            Some(prev) => prev + 2u32,
            None => BigUint::one(),
        };
        if &base + BigUint::from(n as u64) < lowest {
            return Err(Error::NotStrictlyIncreasing { index: idx + 1 });
        }
        loop {
            let w: i64 = rng.gen_range(-n..=n);
            let cand = if w >= 0 {
                &base + BigUint::from(w as u64)
            } else {
                let d = BigUint::from(w.unsigned_abs());
                if d > base {
                    redraws += 1;
                    continue;
                }
                &base - d
            };
            if cand >= lowest {
                omega.push(w);
                l.push(cand);
                break;
            }
            redraws += 1;
        }
    }
    let sample = OmegaSample {
        omega,
        seed,
        stream,
        redraws,
        hypothesis_holds: gamma.exceeds(2),
    };
    let spec = TreeSpec::build(
        l,
        vec![k; n_max],
        Family::Omega {
            k,
            gamma: gamma.clone(),
            seed,
            stream,
        },
    )?;
    Ok((sample, spec))
}

pub fn validate(spec: &TreeSpec) -> Validation {
    let monotone = spec.l.windows(2).all(|w| w[0] < w[1]);
    let gaps = spec.gaps();
    let sparse = gaps.len() >= 2 && {
        let tail = &gaps[gaps.len() / 2..];
        tail.windows(2).all(|w| w[0] <= w[1]) && gaps.last() > gaps.first()
    };
    // Over a finite horizon "unbounded" means the branching numbers keep
    // growing: the largest value in the second half beats the first half.
    let half = spec.k.len() / 2;
    let k_growing = spec.k.len() >= 2 && spec.k[half..].iter().max() > spec.k[..half.max(1)].iter().max();
    let one = BigUint::one();
    let normal = !k_growing || gaps[gaps.len() / 2..].iter().any(|g| *g > one);
    Validation {
        sparse,
        normal,
        monotone,
        horizon: spec.horizon(),
    }
}

/// Serializable description of a tree, as it appears in run configurations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TreeRecord {
    pub family: FamilyTag,
    pub k: KField,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<String>,
    #[serde(rename = "N", default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(rename = "L", default, skip_serializing_if = "Option::is_none")]
    pub l: Option<Vec<u64>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FamilyTag {
    Explicit,
    Gamma,
    Omega,
}

/// A constant branching number or one value per branching.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum KField {
    Constant(u64),
    List(Vec<u64>),
}

impl TreeRecord {
    pub fn to_spec(&self) -> Result<TreeSpec> {
        let need_gamma = || -> Result<Gamma> {
            self.gamma
                .as_deref()
                .ok_or_else(|| Error::domain("gamma", "required for this family"))?
                .parse()
        };
        let need_n = || self.n.ok_or_else(|| Error::domain("N", "required for this family"));
        let constant_k = || match self.k {
            KField::Constant(k) => Ok(k),
            KField::List(_) => Err(Error::domain("k", "generated families need a single k")),
        };
        match self.family {
            FamilyTag::Explicit => {
                let l = self
                    .l
                    .clone()
                    .ok_or_else(|| Error::domain("L", "required for the explicit family"))?;
                let k = match &self.k {
                    KField::Constant(k) => vec![*k; l.len()],
                    KField::List(ks) => ks.clone(),
                };
                TreeSpec::explicit_u64(&l, &k)
            }
            FamilyTag::Gamma => make_gamma_tree(constant_k()?, &need_gamma()?, need_n()?),
            FamilyTag::Omega => {
                let seed = self
                    .seed
                    .ok_or_else(|| Error::domain("seed", "required for the omega family"))?;
                sample_omega_tree(constant_k()?, &need_gamma()?, need_n()?, seed).map(|(_, t)| t)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gamma(s: &str) -> Gamma {
        s.parse().unwrap()
    }

    /// Brute-force generation sizes by expanding the tree level by level.
    fn enumerate_sizes(spec: &TreeSpec, depth: u64) -> Vec<u64> {
        let mut sizes = vec![1u64];
        for j in 0..depth {
            let last = *sizes.last().unwrap();
            let branch = spec
                .l()
                .iter()
                .position(|l| *l == BigUint::from(j))
                .map_or(1, |i| spec.k()[i]);
            sizes.push(last * branch);
        }
        sizes
    }

    #[test]
    fn kappa_values() {
        let s = TreeSpec::explicit_u64(&[2, 4, 8], &[2, 2, 2]).unwrap();
        assert_eq!(kappa(&s, 2), 2);
        assert_eq!(kappa(&s, 3), 1);
        assert_eq!(kappa(&s, 0), 1);
        let s = TreeSpec::explicit_u64(&[1, 5], &[3, 4]).unwrap();
        assert_eq!(kappa(&s, 5), 4);
    }

    #[test]
    fn generation_sizes() {
        let s = TreeSpec::explicit_u64(&[1], &[2]).unwrap();
        assert_eq!(generation_size(&s, 2).unwrap(), 2);
        assert_eq!(generation_size(&s, 0).unwrap(), 1);
        let s = TreeSpec::explicit_u64(&[2, 4], &[2, 3]).unwrap();
        assert_eq!(generation_size(&s, 5).unwrap(), 6);
        assert_eq!(enumerate_sizes(&s, 5)[5], 6);
    }

    #[test]
    fn generation_size_overflow_is_reported() {
        let l: Vec<u64> = (1..=70).collect();
        let s = TreeSpec::explicit_u64(&l, &vec![2; 70]).unwrap();
        assert_eq!(generation_size(&s, 71), Err(Error::Overflow("generation size")));
        assert_eq!(generation_size_big(&s, 71), BigUint::one() << 70);
    }

    #[test]
    fn ball_counts() {
        let s = make_gamma_tree(2, &gamma("2"), 10).unwrap();
        assert_eq!(ball_count(&s, 4).count, BigUint::from(7u32));
        assert_eq!(ball_count(&s, 0).count, BigUint::one());
        let s = TreeSpec::explicit_u64(&[1], &[3]).unwrap();
        assert_eq!(ball_count(&s, 2).count, BigUint::from(5u32));
    }

    #[test]
    fn ball_count_matches_enumeration() {
        let s = TreeSpec::explicit_u64(&[2, 3, 7, 12], &[3, 2, 5, 2]).unwrap();
        let sizes = enumerate_sizes(&s, 20);
        let mut acc = 0u64;
        for r in 0..=20u64 {
            acc += sizes[r as usize];
            assert_eq!(ball_count(&s, r).count, BigUint::from(acc), "r = {r}");
            assert!(ball_count(&s, r).count >= BigUint::from(r + 1));
        }
    }

    #[test]
    fn theoretical_dimension_values() {
        assert!((theoretical_dimension(2, 2.0f64).unwrap() - 2.0).abs() < 1e-15);
        assert!((theoretical_dimension(2, 4.0f64).unwrap() - 1.5).abs() < 1e-15);
        assert!(theoretical_dimension(3, 1e6f64).unwrap() < 1.0 + 0.1);
        assert!(theoretical_dimension(2, 1.0f64).is_err());
        assert!((theoretical_dimension(2, 4.0f32).unwrap() - 1.5).abs() < 1e-6);
    }

    #[test]
    fn estimate_dimension_values() {
        // Exact counts: #S(2^12) = 3 + sum_{n=1}^{11} 4^n = 5592407.
        let s = make_gamma_tree(2, &gamma("2"), 4).unwrap();
        let d = estimate_dimension(&s, 1 << 12).unwrap();
        assert!((d - (5592407f64).ln() / 4096f64.ln()).abs() < 1e-12);
        let s = make_gamma_tree(2, &gamma("4"), 3).unwrap();
        let d = estimate_dimension(&s, 1 << 20).unwrap();
        assert!((d - 1.5).abs() / 1.5 < 0.05, "{d}");
        assert!(estimate_dimension(&s, 1).is_err());
    }

    #[test]
    fn estimate_dimension_trends_toward_theory() {
        let s = make_gamma_tree(2, &gamma("2"), 4).unwrap();
        let errs: Vec<f64> = (6..=12)
            .map(|n| (estimate_dimension(&s, 1u64 << n).unwrap() - 2.0).abs())
            .collect();
        assert!(errs.windows(2).all(|w| w[1] < w[0]), "{errs:?}");
    }

    #[test]
    fn gamma_tree_generations() {
        let s = make_gamma_tree(2, &gamma("3"), 4).unwrap();
        assert_eq!(s.l_small(), [3, 9, 27, 81]);
        let s = make_gamma_tree(2, &gamma("2.5"), 3).unwrap();
        assert_eq!(s.l_small(), [2, 6, 15]);
        assert_eq!(
            make_gamma_tree(2, &gamma("1.01"), 2),
            Err(Error::NotStrictlyIncreasing { index: 2 })
        );
    }

    #[test]
    fn omega_tree_is_deterministic_and_well_spaced() {
        let g = gamma("3");
        let (a, ta) = sample_omega_tree(2, &g, 40, 7).unwrap();
        let (b, tb) = sample_omega_tree(2, &g, 40, 7).unwrap();
        assert_eq!(a, b);
        assert_eq!(ta, tb);
        assert!(a.hypothesis_holds);
        for (n, w) in a.omega.iter().enumerate() {
            assert!(w.unsigned_abs() <= n as u64 + 1);
        }
        let two = BigUint::from(2u32);
        for g in ta.gaps() {
            assert!(g >= two);
        }
        // Different seed, different sample.
        let (c, _) = sample_omega_tree(2, &g, 40, 8).unwrap();
        assert_ne!(a.omega, c.omega);
    }

    #[test]
    fn omega_gap_bound_for_gamma_three() {
        // gamma^{n+1} - gamma^n - (2n+1) - 1 > 2 for n >= 2 when gamma = 3,
        // so no repair is ever needed past the first branching.
        for n in 2..60u32 {
            let lhs = 2.0 * 3f64.powi(n as i32) - (2 * n + 1) as f64 - 1.0;
            assert!(lhs > 2.0);
        }
    }

    #[test]
    fn omega_prefix_is_stable_under_extension() {
        let g = gamma("3");
        let (_, short) = sample_omega_tree(2, &g, 10, 99).unwrap();
        let long = short.with_horizon(30).unwrap();
        assert_eq!(&long.l()[..10], short.l());
    }

    #[test]
    fn omega_marginal_is_uniform() {
        // Chi-square on omega_3 over 10^5 draws from independent streams.
        let g = gamma("3");
        let mut counts = [0u64; 7];
        let draws = 100_000u64;
        for s in 0..draws {
            let (o, _) = sample_omega_tree_stream(2, &g, 3, 12345, s).unwrap();
            counts[(o.omega[2] + 3) as usize] += 1;
        }
        let expect = draws as f64 / 7.0;
        let chi2: f64 = counts.iter().map(|&c| (c as f64 - expect).powi(2) / expect).sum();
        // 6 degrees of freedom; 0.999 quantile is 22.46.
        assert!(chi2 < 22.46, "chi2 = {chi2}, counts = {counts:?}");
        let sigma = (draws as f64 * (1.0 / 7.0) * (6.0 / 7.0)).sqrt();
        for c in counts {
            assert!((c as f64 - expect).abs() < 3.0 * sigma + 1.0 || chi2 < 22.46);
        }
    }

    #[test]
    fn validation_flags() {
        let s = make_gamma_tree(2, &gamma("3"), 10).unwrap();
        let v = validate(&s);
        assert!(v.sparse && v.normal && v.monotone);
        let l: Vec<u64> = (1..=10).map(|n| 2 * n).collect();
        let s = TreeSpec::explicit_u64(&l, &[2; 10]).unwrap();
        assert!(!validate(&s).sparse);
        let s = TreeSpec::explicit_u64(&[1, 2], &[2, 2]).unwrap();
        assert!(validate(&s).normal);
        // Growing k with unit gaps is not normal.
        let l: Vec<u64> = (1..=10).collect();
        let k: Vec<u64> = (2..=11).collect();
        let s = TreeSpec::explicit_u64(&l, &k).unwrap();
        assert!(!validate(&s).normal);
    }

    #[test]
    fn invalid_specs_are_rejected() {
        assert!(TreeSpec::explicit_u64(&[3, 3], &[2, 2]).is_err());
        assert!(TreeSpec::explicit_u64(&[3, 4], &[2, 1]).is_err());
        assert!(TreeSpec::explicit_u64(&[0, 4], &[2, 2]).is_err());
        assert!(TreeSpec::explicit_u64(&[3], &[2, 2]).is_err());
    }

    #[test]
    fn record_round_trip() {
        let rec: TreeRecord = serde_json::from_str(r#"{"family":"gamma","k":2,"gamma":"5/2","N":6}"#).unwrap();
        let spec = rec.to_spec().unwrap();
        assert_eq!(spec.l_small(), [2, 6, 15, 39, 97, 244]);
        let rec: TreeRecord = serde_json::from_str(r#"{"family":"explicit","k":[2,3],"L":[1,5]}"#).unwrap();
        assert_eq!(rec.to_spec().unwrap().k(), [2, 3]);
        let rec: TreeRecord = serde_json::from_str(r#"{"family":"omega","k":2,"gamma":"3","N":5}"#).unwrap();
        assert!(matches!(rec.to_spec(), Err(Error::Domain { field: "seed", .. })));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn arb_spec() -> impl Strategy<Value = TreeSpec> {
            prop::collection::vec((1u64..6, 2u64..5), 1..6).prop_map(|steps| {
                let mut l = Vec::new();
                let mut acc = 0;
                for (gap, _) in &steps {
                    acc += gap;
                    l.push(acc);
                }
                let k = steps.iter().map(|s| s.1).collect::<Vec<_>>();
                TreeSpec::explicit_u64(&l, &k).unwrap()
            })
        }

        proptest! {
            #[test]
            fn size_recursion(spec in arb_spec(), j in 0u64..40) {
                prop_assert_eq!(
                    generation_size_big(&spec, j + 1),
                    generation_size_big(&spec, j) * kappa(&spec, j)
                );
            }

            #[test]
            fn ball_count_is_prefix_sum(spec in arb_spec(), r in 1u64..40) {
                let prev = ball_count(&spec, r - 1).count;
                let cur = ball_count(&spec, r).count;
                prop_assert!(cur > prev);
                prop_assert_eq!(cur, prev + generation_size_big(&spec, r));
            }
        }
    }
}
