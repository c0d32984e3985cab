//! Brute-force VC combinatorics: dichotomies, shattering, VC dimension,
//! growth function, and the Sauer–Shelah sum.
//!
//! Classes are first packed into one bit row per distinct concept; a
//! labeling of `k ≤ 64` points is a single `u64`. Subset scans run on the
//! current rayon pool and reduce with `any`/`max`, so results do not depend
//! on the thread count.

use std::collections::HashSet;

use itertools::Itertools;
use num_bigint::BigUint;
use num_integer::binomial;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::concept::ParamClass;
use crate::error::{Error, Result};

/// Explicit work limits for the exhaustive scans.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budget {
    /// Maximum number of point subsets examined per query.
    pub subset_cap: u128,
    /// Maximum number of `(parameter, point)` evaluations per query.
    pub eval_cap: u128,
    /// Maximum number of points in one labeling (at most 64).
    pub bitvec_cap: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Self {
            subset_cap: 1_000_000,
            eval_cap: 100_000_000,
            bitvec_cap: 24,
        }
    }
}

/// Labelings realized by a class on an ordered point list. Bit `j` of a
/// labeling is the label of `points[j]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DichotomySet {
    pub points: Vec<usize>,
    pub labelings: Vec<u64>,
}

impl DichotomySet {
    pub fn len(&self) -> usize {
        self.labelings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labelings.is_empty()
    }

    pub fn contains(&self, labels: &[bool]) -> bool {
        self.labelings.binary_search(&pack(labels)).is_ok()
    }

    pub fn is_full(&self) -> bool {
        self.labelings.len() as u128 == 1u128 << self.points.len()
    }
}

pub fn pack(labels: &[bool]) -> u64 {
    labels
        .iter()
        .enumerate()
        .fold(0u64, |acc, (j, &b)| acc | (u64::from(b) << j))
}

/// One bit row per distinct concept of a class.
struct PackedClass {
    rows: Vec<Vec<u64>>,
}

impl PackedClass {
    fn new(cls: &ParamClass) -> Self {
        let n = cls.domain().len();
        let words = n.div_ceil(64);
        let mut seen = HashSet::new();
        let mut rows = Vec::new();
        for t in 0..cls.len() {
            let mut row = vec![0u64; words];
            for x in 0..n {
                if cls.eval(t, x) {
                    row[x / 64] |= 1 << (x % 64);
                }
            }
            if seen.insert(row.clone()) {
                rows.push(row);
            }
        }
        Self { rows }
    }

    #[inline]
    fn labeling(row: &[u64], pts: &[usize]) -> u64 {
        pts.iter().enumerate().fold(0u64, |acc, (j, &x)| {
            acc | (((row[x / 64] >> (x % 64)) & 1) << j)
        })
    }

    fn labelings(&self, pts: &[usize], stop_at: Option<usize>) -> HashSet<u64> {
        let mut out = HashSet::new();
        for row in &self.rows {
            out.insert(Self::labeling(row, pts));
            if stop_at.is_some_and(|s| out.len() >= s) {
                break;
            }
        }
        out
    }
}

fn check_points(cls: &ParamClass, pts: &[usize], budget: &Budget) -> Result<()> {
    let cap = budget.bitvec_cap.min(64);
    if pts.len() > cap {
        return Err(Error::CapExceeded {
            needed: pts.len() as u128,
            cap: cap as u128,
        });
    }
    let n = cls.domain().len();
    let mut seen = HashSet::new();
    for &x in pts {
        if x >= n {
            return Err(Error::InvalidArgument(format!("point index {x} outside domain")));
        }
        if !seen.insert(x) {
            return Err(Error::InvalidArgument(format!("point index {x} repeated")));
        }
    }
    Ok(())
}

fn check_evals(needed: u128, budget: &Budget, lower_bound: Option<usize>) -> Result<()> {
    if needed > budget.eval_cap {
        return Err(Error::BudgetExceeded {
            resource: "evaluation",
            needed,
            budget: budget.eval_cap,
            lower_bound,
        });
    }
    Ok(())
}

fn check_subsets(needed: u128, budget: &Budget, lower_bound: Option<usize>) -> Result<()> {
    if needed > budget.subset_cap {
        return Err(Error::BudgetExceeded {
            resource: "subset",
            needed,
            budget: budget.subset_cap,
            lower_bound,
        });
    }
    Ok(())
}

fn subset_count(n: usize, k: usize) -> u128 {
    binomial(BigUint::from(n), BigUint::from(k))
        .to_u128()
        .unwrap_or(u128::MAX)
}

/// The exact set `{(e_θ(x₁),…,e_θ(x_k)) : θ ∈ Θ}`.
pub fn dichotomies(cls: &ParamClass, pts: &[usize], budget: &Budget) -> Result<DichotomySet> {
    check_points(cls, pts, budget)?;
    check_evals(cls.len() as u128 * pts.len() as u128, budget, None)?;
    let mut labelings: Vec<u64> = (0..cls.len())
        .map(|t| pts.iter().enumerate().fold(0u64, |acc, (j, &x)| {
            acc | (u64::from(cls.eval(t, x)) << j)
        }))
        .collect::<HashSet<_>>()
        .into_iter()
        .collect();
    labelings.sort_unstable();
    Ok(DichotomySet {
        points: pts.to_vec(),
        labelings,
    })
}

/// Whether all `2^|pts|` labelings are realized. The empty list is shattered.
pub fn shatters(cls: &ParamClass, pts: &[usize], budget: &Budget) -> Result<bool> {
    check_points(cls, pts, budget)?;
    check_evals(cls.len() as u128 * cls.domain().len() as u128, budget, None)?;
    let packed = PackedClass::new(cls);
    let full = 1usize << pts.len();
    Ok(packed.labelings(pts, Some(full)).len() == full)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VcDimension {
    Exact(usize),
    /// Some `cap`-subset is shattered; larger sizes were not examined.
    AtLeast(usize),
}

impl VcDimension {
    pub fn lower_bound(&self) -> usize {
        match *self {
            VcDimension::Exact(d) | VcDimension::AtLeast(d) => d,
        }
    }
}

/// Largest `k ≤ cap` such that some `k`-subset of the domain is shattered.
///
/// Ascends from `k = 1` and stops at the first size with no shattered
/// subset (shattering is closed under taking subsets).
pub fn vc_dimension(cls: &ParamClass, cap: usize, budget: &Budget) -> Result<VcDimension> {
    let n = cls.domain().len();
    check_evals(cls.len() as u128 * n as u128, budget, Some(0))?;
    let packed = PackedClass::new(cls);
    let distinct = packed.rows.len() as u128;
    let mut best = 0usize;
    for k in 1..=cap.min(n) {
        if k > 64 || distinct < 1u128 << k {
            return Ok(VcDimension::Exact(best));
        }
        if k > budget.bitvec_cap.min(64) {
            return Err(Error::CapExceeded {
                needed: k as u128,
                cap: budget.bitvec_cap.min(64) as u128,
            });
        }
        let subsets = subset_count(n, k);
        check_subsets(subsets, budget, Some(best))?;
        check_evals(
            subsets.saturating_mul(distinct).saturating_mul(k as u128),
            budget,
            Some(best),
        )?;
        let full = 1usize << k;
        let found = (0..n)
            .combinations(k)
            .par_bridge()
            .any(|pts| packed.labelings(&pts, Some(full)).len() == full);
        if !found {
            return Ok(VcDimension::Exact(best));
        }
        best = k;
    }
    if best == n || best < cap {
        Ok(VcDimension::Exact(best))
    } else {
        Ok(VcDimension::AtLeast(best))
    }
}

/// `Π(m)`: the maximum number of labelings over all `m`-subsets of
/// distinct domain points.
pub fn growth_function(cls: &ParamClass, m: usize, budget: &Budget) -> Result<u64> {
    let n = cls.domain().len();
    if m > n {
        return Err(Error::InvalidArgument(format!(
            "growth function at m = {m} needs at least {m} distinct points, domain has {n}"
        )));
    }
    if m == 0 {
        return Ok(1);
    }
    if m > budget.bitvec_cap.min(64) {
        return Err(Error::CapExceeded {
            needed: m as u128,
            cap: budget.bitvec_cap.min(64) as u128,
        });
    }
    check_evals(cls.len() as u128 * n as u128, budget, None)?;
    let packed = PackedClass::new(cls);
    let subsets = subset_count(n, m);
    check_subsets(subsets, budget, None)?;
    check_evals(
        subsets
            .saturating_mul(packed.rows.len() as u128)
            .saturating_mul(m as u128),
        budget,
        None,
    )?;
    let best = (0..n)
        .combinations(m)
        .par_bridge()
        .map(|pts| packed.labelings(&pts, None).len() as u64)
        .max()
        .unwrap_or(1);
    Ok(best)
}

/// Growth value used for samples of `k` points that may repeat: a multiset
/// realizes exactly the labelings of its distinct support, so this is
/// `Π(min(k, |X|))`.
pub fn sample_growth(cls: &ParamClass, k: usize, budget: &Budget) -> Result<u64> {
    growth_function(cls, k.min(cls.domain().len()), budget)
}

/// `Σ_{i=0}^{min(d,m)} C(m, i)`.
pub fn sauer_shelah(d: usize, m: usize) -> BigUint {
    let m_big = BigUint::from(m);
    (0..=d.min(m)).fold(BigUint::zero(), |acc, i| {
        acc + binomial(m_big.clone(), BigUint::from(i))
    })
}

/// Deduplicated labelings restricted to a subset of a larger labeling set,
/// used to compare sub- and super-classes on the same points.
pub fn is_subset(sub: &DichotomySet, sup: &DichotomySet) -> bool {
    sub.points == sup.points
        && sub
            .labelings
            .iter()
            .all(|l| sup.labelings.binary_search(l).is_ok())
}

/// `2^k` as a `BigUint`, for comparisons against [`sauer_shelah`].
pub fn power_of_two(k: usize) -> BigUint {
    BigUint::one() << k
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructors::singleton_witness_class;
    use crate::measure::FiniteDomain;
    use std::sync::Arc;

    fn domain(n: usize) -> Arc<FiniteDomain> {
        Arc::new(FiniteDomain::with_size(n).unwrap())
    }

    /// Direct enumeration: every subset of every size, every parameter.
    fn brute_vc(cls: &ParamClass) -> usize {
        let n = cls.domain().len();
        let concepts = cls.materialize();
        let mut best = 0;
        for mask in 0u32..(1 << n) {
            let pts: Vec<usize> = (0..n).filter(|&i| mask >> i & 1 == 1).collect();
            let labs: HashSet<Vec<bool>> = concepts
                .iter()
                .map(|c| pts.iter().map(|&x| c[x]).collect())
                .collect();
            if labs.len() == 1 << pts.len() {
                best = best.max(pts.len());
            }
        }
        best
    }

    #[test]
    fn constant_class_has_one_labeling() {
        let d = domain(5);
        let cls = ParamClass::constant(d, false);
        let ds = dichotomies(&cls, &[0, 2, 4], &Budget::default()).unwrap();
        assert_eq!(ds.labelings, vec![0]);
    }

    #[test]
    fn threshold_suffix_patterns() {
        let d = domain(7);
        let cls = ParamClass::threshold(d);
        let pts = [1, 2, 4, 6];
        let ds = dichotomies(&cls, &pts, &Budget::default()).unwrap();
        // oracle: labelings 1[x >= t] for every cut position
        let oracle: HashSet<u64> = (0..=pts.len())
            .map(|cut| pack(&(0..pts.len()).map(|j| j >= cut).collect::<Vec<_>>()))
            .collect();
        assert_eq!(ds.len(), pts.len() + 1);
        assert_eq!(ds.labelings.iter().copied().collect::<HashSet<_>>(), oracle);
    }

    #[test]
    fn singleton_witness_one_hot() {
        let d = domain(6);
        let cls = singleton_witness_class(d, &[0, 2, 3, 5]).unwrap();
        let pts = [2, 3, 5];
        let ds = dichotomies(&cls, &pts, &Budget::default()).unwrap();
        assert_eq!(ds.labelings, vec![0b000, 0b001, 0b010, 0b100]);
    }

    #[test]
    fn shattering_examples() {
        let d = domain(6);
        let b = Budget::default();
        assert!(shatters(&ParamClass::constant(d.clone(), false), &[], &b).unwrap());
        let iv = ParamClass::interval(d.clone());
        for x in 0..6 {
            for y in x + 1..6 {
                assert!(shatters(&iv, &[x, y], &b).unwrap());
            }
        }
        assert!(!shatters(&iv, &[0, 1, 2], &b).unwrap());
        let w = singleton_witness_class(d, &[0, 1, 2, 3, 4, 5]).unwrap();
        assert!(!shatters(&w, &[1, 4], &b).unwrap());
        assert!(shatters(&w, &[4], &b).unwrap());
    }

    #[test]
    fn point_validation() {
        let d = domain(4);
        let cls = ParamClass::threshold(d);
        let b = Budget::default();
        assert!(dichotomies(&cls, &[1, 1], &b).is_err());
        assert!(dichotomies(&cls, &[9], &b).is_err());
        let tight = Budget { bitvec_cap: 2, ..b };
        assert!(matches!(dichotomies(&cls, &[0, 1, 2], &tight), Err(Error::CapExceeded { .. })));
    }

    #[test]
    fn vc_dimensions_match_brute_force() {
        let b = Budget::default();
        for n in [1, 2, 3, 5, 7] {
            let d = domain(n);
            for cls in [
                ParamClass::threshold(d.clone()),
                ParamClass::interval(d.clone()),
                singleton_witness_class(d.clone(), &(0..n).collect::<Vec<_>>()).unwrap(),
                ParamClass::constant(d.clone(), false),
            ] {
                let got = vc_dimension(&cls, 8, &b).unwrap();
                assert_eq!(got, VcDimension::Exact(brute_vc(&cls)), "{} n={n}", cls.name());
            }
        }
        assert_eq!(vc_dimension(&ParamClass::threshold(domain(4)), 8, &b).unwrap(), VcDimension::Exact(1));
        assert_eq!(vc_dimension(&ParamClass::interval(domain(4)), 8, &b).unwrap(), VcDimension::Exact(2));
        assert_eq!(vc_dimension(&ParamClass::constant(domain(4), false), 8, &b).unwrap(), VcDimension::Exact(0));
    }

    #[test]
    fn vc_cap_saturation_and_budget() {
        // all 16 concepts on 4 points shatter the whole domain
        let d = domain(4);
        let rows = (0..16u8).map(|m| (0..4).map(|i| m >> i & 1 == 1).collect()).collect();
        let full = ParamClass::table(d, rows).unwrap();
        let b = Budget::default();
        assert_eq!(vc_dimension(&full, 2, &b).unwrap(), VcDimension::AtLeast(2));
        assert_eq!(vc_dimension(&full, 10, &b).unwrap(), VcDimension::Exact(4));
        let tiny = Budget { subset_cap: 5, ..b };
        match vc_dimension(&full, 4, &tiny) {
            Err(Error::BudgetExceeded { lower_bound, .. }) => assert_eq!(lower_bound, Some(1)),
            other => panic!("expected budget error, got {other:?}"),
        }
    }

    #[test]
    fn growth_examples() {
        let b = Budget::default();
        let d = domain(8);
        assert_eq!(growth_function(&ParamClass::interval(d.clone()), 0, &b).unwrap(), 1);
        assert_eq!(growth_function(&ParamClass::threshold(d.clone()), 5, &b).unwrap(), 6);
        let w = singleton_witness_class(d.clone(), &[0, 1, 2, 3, 4, 5]).unwrap();
        assert_eq!(growth_function(&w, 4, &b).unwrap(), 5);
        assert_eq!(growth_function(&ParamClass::interval(d.clone()), 6, &b).unwrap(), 22);
        assert!(growth_function(&w, 9, &b).is_err());
        assert_eq!(sample_growth(&w, 20, &b).unwrap(), growth_function(&w, 8, &b).unwrap());
    }

    #[test]
    fn sauer_shelah_values() {
        for m in 0..10 {
            assert_eq!(sauer_shelah(0, m), BigUint::from(1u32));
        }
        assert_eq!(sauer_shelah(1, 3), BigUint::from(4u32));
        assert_eq!(sauer_shelah(2, 6), BigUint::from(22u32));
        assert_eq!(sauer_shelah(10, 4), power_of_two(4));
    }

    #[test]
    fn subclass_dichotomies_nest() {
        let d = domain(6);
        let b = Budget::default();
        let big = singleton_witness_class(d.clone(), &[0, 1, 2, 3, 4, 5]).unwrap();
        let small = singleton_witness_class(d, &[1, 3]).unwrap();
        let pts = [1, 2, 3];
        assert!(is_subset(
            &dichotomies(&small, &pts, &b).unwrap(),
            &dichotomies(&big, &pts, &b).unwrap()
        ));
    }
}
